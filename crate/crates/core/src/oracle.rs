//! Slow reference implementations and random local operations.
//!
//! Nothing here is used on the fast paths. The dense routines materialize the
//! full `2^n x 2^n` density matrix and are capped at
//! [`limits::MAX_DENSE_QUBITS`].

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::limits;
use crate::statevector::{qubit_bit, QubitSet, Statevector};

/// Row-major 2x2 complex matrix.
pub type Mat2 = [[Complex64; 2]; 2];

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Dense density matrix on `n` qubits, same index convention as [`Statevector`].
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    n_qubits: usize,
    entries: DMatrix<Complex64>,
}

impl DensityMatrix {
    pub fn from_statevector(psi: &Statevector) -> Result<Self> {
        limits::check("dense density-matrix qubits", psi.n_qubits(), limits::MAX_DENSE_QUBITS)?;
        let a = psi.amplitudes();
        let entries = DMatrix::from_fn(a.len(), a.len(), |i, j| a[i] * a[j].conj());
        Ok(Self {
            n_qubits: psi.n_qubits(),
            entries,
        })
    }

    /// Accepts any matrix that passes [`DensityMatrix::check_invariants`].
    pub fn from_matrix(entries: DMatrix<Complex64>) -> Result<Self> {
        let dim = entries.nrows();
        if dim != entries.ncols() || dim < 2 || !dim.is_power_of_two() {
            return Err(Error::BadLength(dim));
        }
        let rho = Self {
            n_qubits: dim.trailing_zeros() as usize,
            entries,
        };
        rho.check_invariants()?;
        Ok(rho)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    /// Hermitian and unit trace within 1e-10, smallest eigenvalue at least -1e-9.
    pub fn check_invariants(&self) -> Result<()> {
        let herm = (&self.entries - self.entries.adjoint()).camax();
        if herm > 1e-10 {
            return Err(Error::Consistency(format!("not Hermitian (residual {herm:e})")));
        }
        let trace = self.entries.trace();
        if (trace - ONE).norm() > 1e-10 {
            return Err(Error::Consistency(format!("trace {trace} is not 1")));
        }
        let min_eig = self
            .entries
            .clone()
            .symmetric_eigenvalues()
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        if min_eig < -1e-9 {
            return Err(Error::Consistency(format!("negative eigenvalue {min_eig:e}")));
        }
        Ok(())
    }

    /// Reduced state on `keep`, tracing out every other qubit index by index.
    pub fn partial_trace(&self, keep: QubitSet) -> Result<DensityMatrix> {
        keep.check_register(self.n_qubits)?;
        let n = self.n_qubits;
        let kept: Vec<usize> = keep.qubits().collect();
        let traced: Vec<usize> = keep.complement().qubits().collect();
        // Full-register index from (kept-index, traced-index).
        let compose = |r: usize, e: usize| {
            let mut idx = 0;
            for (j, &q) in kept.iter().enumerate() {
                if r >> (kept.len() - 1 - j) & 1 == 1 {
                    idx |= qubit_bit(n, q);
                }
            }
            for (j, &q) in traced.iter().enumerate() {
                if e >> (traced.len() - 1 - j) & 1 == 1 {
                    idx |= qubit_bit(n, q);
                }
            }
            idx
        };
        let dk = 1usize << kept.len();
        let de = 1usize << traced.len();
        let mut out = DMatrix::from_element(dk, dk, ZERO);
        for r in 0..dk {
            for c in 0..dk {
                out[(r, c)] = (0..de)
                    .map(|e| self.entries[(compose(r, e), compose(c, e))])
                    .sum();
            }
        }
        Ok(DensityMatrix {
            n_qubits: kept.len(),
            entries: out,
        })
    }

    /// `Tr[rho^2]`.
    pub fn purity(&self) -> f64 {
        (&self.entries * &self.entries).trace().re
    }

    /// `p rho + (1 - p) sigma`.
    pub fn mix(&self, p: f64, other: &DensityMatrix) -> Result<DensityMatrix> {
        if self.n_qubits != other.n_qubits {
            return Err(Error::DimensionMismatch {
                left: self.n_qubits,
                right: other.n_qubits,
            });
        }
        Ok(DensityMatrix {
            n_qubits: self.n_qubits,
            entries: &self.entries * Complex64::new(p, 0.0) + &other.entries * Complex64::new(1.0 - p, 0.0),
        })
    }

    /// Random mixed state `G G^dagger / Tr[G G^dagger]` with `G` a
    /// `2^n x rank` complex Gaussian matrix.
    pub fn random_mixed(n_qubits: usize, rank: usize, seed: u64) -> Result<DensityMatrix> {
        limits::check("dense density-matrix qubits", n_qubits, limits::MAX_DENSE_QUBITS)?;
        if n_qubits == 0 || rank == 0 {
            return Err(Error::InvalidParameter("need at least one qubit and rank 1".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = DMatrix::from_fn(1 << n_qubits, rank, |_, _| gaussian(&mut rng));
        let gg = &g * g.adjoint();
        let t = gg.trace();
        Ok(DensityMatrix {
            n_qubits,
            entries: gg / t,
        })
    }
}

/// `Tr[rho_alpha^2]` through the dense density matrix.
pub fn dense_reduced_purity(psi: &Statevector, alpha: QubitSet) -> Result<f64> {
    alpha.check_register(psi.n_qubits())?;
    DensityMatrix::from_statevector(psi)?
        .partial_trace(alpha)
        .map(|r| r.purity())
}

/// Two-outcome local measurement `{m0, m1}` on one qubit.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalKrausPair {
    pub qubit: usize,
    pub m0: Mat2,
    pub m1: Mat2,
}

impl LocalKrausPair {
    /// Validates the completeness relation `m0^† m0 + m1^† m1 = 1` within 1e-10.
    pub fn new(qubit: usize, m0: Mat2, m1: Mat2) -> Result<Self> {
        let pair = Self { qubit, m0, m1 };
        let residual = pair.completeness_residual();
        if residual > 1e-10 {
            return Err(Error::InvalidParameter(format!(
                "Kraus pair violates completeness by {residual:e}"
            )));
        }
        Ok(pair)
    }

    /// Max-entry deviation of `m0^† m0 + m1^† m1` from the identity.
    pub fn completeness_residual(&self) -> f64 {
        let sum = add(&mul(&adjoint(&self.m0), &self.m0), &mul(&adjoint(&self.m1), &self.m1));
        let mut worst: f64 = 0.0;
        for r in 0..2 {
            for c in 0..2 {
                let target = if r == c { ONE } else { ZERO };
                worst = worst.max((sum[r][c] - target).norm());
            }
        }
        worst
    }
}

/// Random two-outcome Kraus pair: `m0 = A / sigma_max(A)` for a complex
/// Gaussian `A`, and `m1 = U sqrt(1 - m0^† m0)` with `U` Haar on U(2).
pub fn random_local_kraus(seed: u64, qubit: usize) -> LocalKrausPair {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a: Mat2 = [[gaussian(&mut rng), gaussian(&mut rng)], [gaussian(&mut rng), gaussian(&mut rng)]];
    let sigma = largest_singular_value(&a);
    let m0 = scale(&a, 1.0 / sigma);
    let rest = sub(&identity(), &mul(&adjoint(&m0), &m0));
    let m1 = mul(&haar_unitary(&mut rng), &psd_sqrt(&rest));
    LocalKrausPair { qubit, m0, m1 }
}

/// Haar-random single-qubit unitary.
pub fn random_unitary(seed: u64) -> Mat2 {
    haar_unitary(&mut ChaCha8Rng::seed_from_u64(seed))
}

/// Post-measurement branch of a local operation on a pure state.
#[derive(Clone, Debug, PartialEq)]
pub struct KrausBranch {
    pub probability: f64,
    pub state: Statevector,
}

/// Applies both Kraus operators of `k`, returning the normalized branches
/// with their probabilities. Branches below 1e-14 are dropped.
pub fn apply_local_kraus(psi: &Statevector, k: &LocalKrausPair) -> Result<Vec<KrausBranch>> {
    let mut out = Vec::with_capacity(2);
    for m in [&k.m0, &k.m1] {
        let raw = psi.apply_single_qubit(k.qubit, m)?;
        let p: f64 = raw.iter().map(|a| a.norm_sqr()).sum();
        if p >= 1e-14 {
            out.push(KrausBranch {
                probability: p,
                state: Statevector::normalized(raw)?,
            });
        }
    }
    Ok(out)
}

/// Expands a sequence of local operations into the full branch tree. The
/// worst-case branch count `2^len` must stay within [`limits::MAX_BRANCHES`].
pub fn apply_separable_sequence(psi: &Statevector, kraus: &[LocalKrausPair]) -> Result<Vec<KrausBranch>> {
    let worst = 1u64.checked_shl(kraus.len() as u32).filter(|&w| w != 0 && kraus.len() < 64);
    match worst {
        Some(w) if w <= limits::MAX_BRANCHES => {}
        _ => {
            return Err(Error::Budget {
                what: "separable-operation branches",
                requested: worst.unwrap_or(u64::MAX),
                limit: limits::MAX_BRANCHES,
            })
        }
    }
    let mut branches = vec![KrausBranch {
        probability: 1.0,
        state: psi.clone(),
    }];
    for k in kraus {
        let mut next = Vec::with_capacity(branches.len() * 2);
        for b in &branches {
            for child in apply_local_kraus(&b.state, k)? {
                next.push(KrausBranch {
                    probability: b.probability * child.probability,
                    state: child.state,
                });
            }
        }
        branches = next;
    }
    Ok(branches)
}

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re, im)
}

fn haar_unitary<R: Rng + ?Sized>(rng: &mut R) -> Mat2 {
    let (a, b) = (gaussian(rng), gaussian(rng));
    let norm = (a.norm_sqr() + b.norm_sqr()).sqrt();
    let (a, b) = (a / norm, b / norm);
    let phase = Complex64::from_polar(1.0, rng.gen::<f64>() * std::f64::consts::TAU);
    [[a * phase, -b.conj() * phase], [b * phase, a.conj() * phase]]
}

pub fn identity() -> Mat2 {
    [[ONE, ZERO], [ZERO, ONE]]
}

pub fn mul(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut out = [[ZERO; 2]; 2];
    for r in 0..2 {
        for c in 0..2 {
            out[r][c] = a[r][0] * b[0][c] + a[r][1] * b[1][c];
        }
    }
    out
}

pub fn adjoint(a: &Mat2) -> Mat2 {
    [[a[0][0].conj(), a[1][0].conj()], [a[0][1].conj(), a[1][1].conj()]]
}

fn add(a: &Mat2, b: &Mat2) -> Mat2 {
    [[a[0][0] + b[0][0], a[0][1] + b[0][1]], [a[1][0] + b[1][0], a[1][1] + b[1][1]]]
}

fn sub(a: &Mat2, b: &Mat2) -> Mat2 {
    add(a, &scale(b, -1.0))
}

fn scale(a: &Mat2, f: f64) -> Mat2 {
    [[a[0][0] * f, a[0][1] * f], [a[1][0] * f, a[1][1] * f]]
}

fn largest_singular_value(a: &Mat2) -> f64 {
    let h = mul(&adjoint(a), a);
    let tr = (h[0][0] + h[1][1]).re;
    let det = (h[0][0] * h[1][1] - h[0][1] * h[1][0]).re;
    let disc = (tr * tr - 4.0 * det).max(0.0).sqrt();
    ((tr + disc) / 2.0).sqrt()
}

/// Square root of a 2x2 positive semidefinite Hermitian matrix:
/// `(X + sqrt(det X) 1) / sqrt(tr X + 2 sqrt(det X))`.
fn psd_sqrt(x: &Mat2) -> Mat2 {
    let det = (x[0][0] * x[1][1] - x[0][1] * x[1][0]).re.max(0.0);
    let s = det.sqrt();
    let t = ((x[0][0] + x[1][1]).re + 2.0 * s).max(0.0).sqrt();
    if t == 0.0 {
        return [[ZERO; 2]; 2];
    }
    scale(&add(x, &scale(&identity(), s)), 1.0 / t)
}

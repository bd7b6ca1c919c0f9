//! Reduced-state purities `Tr[rho_alpha^2]` of pure states.
//!
//! The amplitudes are regrouped into a `2^|alpha| x 2^(n-|alpha|)` matrix `M`
//! (rows indexed by the qubits in `alpha`, columns by the rest), so that
//! `rho_alpha = M M^dagger`. The purity is `||M M^dagger||_F^2`, or
//! equivalently `||M^dagger M||_F^2` on the complement; whichever Gram matrix
//! is smaller gets formed. No `4^n` density matrix is ever built.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::limits;
use crate::statevector::{QubitSet, Statevector};

/// Enumerates every submask of `mask` exactly once, from `mask` down to 0.
#[derive(Clone, Debug)]
pub struct Submasks {
    mask: u64,
    next: Option<u64>,
}

impl Submasks {
    pub fn new(mask: u64) -> Self {
        Self {
            mask,
            next: Some(mask),
        }
    }
}

impl Iterator for Submasks {
    type Item = u64;

    fn next(&mut self) -> Option<u64> {
        let current = self.next?;
        self.next = if current == 0 {
            None
        } else {
            Some((current - 1) & self.mask)
        };
        Some(current)
    }
}

/// All subsets of `s` (including the empty set and `s` itself).
pub fn subsets_of(s: QubitSet) -> impl Iterator<Item = QubitSet> {
    let n = s.n_qubits();
    Submasks::new(s.mask()).map(move |m| QubitSet::new(n, m).expect("submask of a valid mask"))
}

/// Splits the register into `alpha` (row) and complement (column) bits.
/// Rows and columns keep ascending qubit order, most significant first.
struct Bipartition {
    row_bits: Vec<usize>,
    col_bits: Vec<usize>,
}

impl Bipartition {
    fn new(n_qubits: usize, alpha: QubitSet) -> Self {
        let (row, col): (Vec<usize>, Vec<usize>) = (0..n_qubits).partition(|&k| alpha.contains(k));
        let to_bits = |qs: Vec<usize>| qs.into_iter().map(|k| n_qubits - 1 - k).collect();
        Self {
            row_bits: to_bits(row),
            col_bits: to_bits(col),
        }
    }

    fn rows(&self) -> usize {
        1 << self.row_bits.len()
    }

    fn cols(&self) -> usize {
        1 << self.col_bits.len()
    }

    /// Row-major `rows x cols` matrix of the amplitudes.
    fn gather(&self, amplitudes: &[Complex64]) -> Vec<Complex64> {
        let cols = self.cols();
        let mut m = vec![Complex64::new(0.0, 0.0); amplitudes.len()];
        for (i, &a) in amplitudes.iter().enumerate() {
            let r = extract(i, &self.row_bits);
            let c = extract(i, &self.col_bits);
            m[r * cols + c] = a;
        }
        m
    }
}

/// Packs the listed index bits (most significant listed first) into an integer.
fn extract(index: usize, bits: &[usize]) -> usize {
    bits.iter().fold(0, |acc, &b| (acc << 1) | (index >> b & 1))
}

/// `Tr[rho_alpha rho'_alpha]` from the two regrouped matrices.
fn gram_overlap(m: &[Complex64], m2: &[Complex64], rows: usize, cols: usize) -> f64 {
    let same = std::ptr::eq(m, m2);
    if rows <= cols {
        let gram = |x: &[Complex64]| {
            let mut g = vec![Complex64::new(0.0, 0.0); rows * rows];
            for r in 0..rows {
                let xr = &x[r * cols..(r + 1) * cols];
                for s in r..rows {
                    let xs = &x[s * cols..(s + 1) * cols];
                    let v: Complex64 = xr.iter().zip(xs).map(|(a, b)| a * b.conj()).sum();
                    g[r * rows + s] = v;
                    g[s * rows + r] = v.conj();
                }
            }
            g
        };
        let g = gram(m);
        if same {
            g.iter().map(|v| v.norm_sqr()).sum()
        } else {
            let g2 = gram(m2);
            let mut acc = 0.0;
            for r in 0..rows {
                for s in 0..rows {
                    acc += (g[r * rows + s] * g2[s * rows + r]).re;
                }
            }
            acc
        }
    } else {
        // ||M^dagger M'||_F^2, accumulated row by row.
        let mut x = vec![Complex64::new(0.0, 0.0); cols * cols];
        for r in 0..rows {
            let a = &m[r * cols..(r + 1) * cols];
            let b = &m2[r * cols..(r + 1) * cols];
            for (c, ac) in a.iter().enumerate() {
                let ac = ac.conj();
                if ac == Complex64::new(0.0, 0.0) {
                    continue;
                }
                let row = &mut x[c * cols..(c + 1) * cols];
                for (slot, bc) in row.iter_mut().zip(b) {
                    *slot += ac * bc;
                }
            }
        }
        x.iter().map(|v| v.norm_sqr()).sum()
    }
}

/// `Tr[rho_alpha^2]` for the reduced state of `psi` on `alpha`. The empty set
/// and the full register both give exactly 1.
pub fn purity(psi: &Statevector, alpha: QubitSet) -> Result<f64> {
    alpha.check_register(psi.n_qubits())?;
    if alpha.is_empty() || alpha.complement().is_empty() {
        return Ok(1.0);
    }
    let split = Bipartition::new(psi.n_qubits(), alpha);
    let m = split.gather(psi.amplitudes());
    Ok(gram_overlap(&m, &m, split.rows(), split.cols()))
}

/// `Tr[rho_alpha rho'_alpha]` for two states of the same register. Reduces to
/// [`purity`] when both arguments coincide. The empty set gives exactly 1.
pub fn cross_purity(psi: &Statevector, phi: &Statevector, alpha: QubitSet) -> Result<f64> {
    if psi.n_qubits() != phi.n_qubits() {
        return Err(Error::DimensionMismatch {
            left: psi.n_qubits(),
            right: phi.n_qubits(),
        });
    }
    alpha.check_register(psi.n_qubits())?;
    if alpha.is_empty() {
        return Ok(1.0);
    }
    let split = Bipartition::new(psi.n_qubits(), alpha);
    let m = split.gather(psi.amplitudes());
    let m2 = split.gather(phi.amplitudes());
    Ok(gram_overlap(&m, &m2, split.rows(), split.cols()))
}

/// Purities of every subset of a qubit set, keyed by subset mask.
#[derive(Clone, Debug, PartialEq)]
pub struct PurityTable {
    n_qubits: usize,
    values: BTreeMap<u64, f64>,
}

fn check_table_budget(s: QubitSet) -> Result<()> {
    let c = s.cardinality();
    if c > limits::MAX_TABLE_CARDINALITY {
        return Err(Error::Budget {
            what: "purity table entries (2^c(s))",
            requested: 1u64 << c,
            limit: 1u64 << limits::MAX_TABLE_CARDINALITY,
        });
    }
    Ok(())
}

/// Tabulates `Tr[rho_alpha^2]` for every `alpha ⊆ s`.
pub fn purity_table(psi: &Statevector, s: QubitSet) -> Result<PurityTable> {
    s.check_register(psi.n_qubits())?;
    if s.is_empty() {
        return Err(Error::EmptySubset);
    }
    check_table_budget(s)?;
    let masks: Vec<u64> = Submasks::new(s.mask()).collect();
    let values = masks
        .par_iter()
        .map(|&m| purity(psi, QubitSet::new(psi.n_qubits(), m)?).map(|p| (m, p)))
        .collect::<Result<Vec<_>>>()?;
    Ok(PurityTable {
        n_qubits: psi.n_qubits(),
        values: values.into_iter().collect(),
    })
}

/// Tabulates `Tr[rho_alpha rho'_alpha]` for every `alpha ⊆ s`.
pub fn cross_purity_table(psi: &Statevector, phi: &Statevector, s: QubitSet) -> Result<PurityTable> {
    s.check_register(psi.n_qubits())?;
    if s.is_empty() {
        return Err(Error::EmptySubset);
    }
    check_table_budget(s)?;
    let masks: Vec<u64> = Submasks::new(s.mask()).collect();
    let values = masks
        .par_iter()
        .map(|&m| cross_purity(psi, phi, QubitSet::new(psi.n_qubits(), m)?).map(|p| (m, p)))
        .collect::<Result<Vec<_>>>()?;
    Ok(PurityTable {
        n_qubits: psi.n_qubits(),
        values: values.into_iter().collect(),
    })
}

impl PurityTable {
    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, alpha: u64) -> Option<f64> {
        self.values.get(&alpha).copied()
    }

    /// `(mask, purity)` pairs in ascending mask order.
    pub fn iter(&self) -> impl Iterator<Item = (u64, f64)> + '_ {
        self.values.iter().map(|(&m, &p)| (m, p))
    }

    pub fn sum(&self) -> f64 {
        self.values.values().sum()
    }

    pub fn to_json(&self) -> String {
        let file = PurityTableFile {
            n: self.n_qubits,
            entries: self
                .iter()
                .map(|(mask, purity)| PurityEntry { mask, purity })
                .collect(),
        };
        serde_json::to_string(&file).expect("table serialization is infallible")
    }

    /// Reads `{"n": .., "entries": [{"mask": .., "purity": ..}, ..]}`,
    /// rejecting out-of-range masks, duplicate masks and values outside
    /// `[2^-c(alpha), 1]`.
    pub fn from_json_str(text: &str) -> Result<Self> {
        let file: PurityTableFile = serde_json::from_str(text)?;
        if file.n == 0 || file.n > 63 {
            return Err(Error::Parse(format!("bad qubit count {}", file.n)));
        }
        let mut values = BTreeMap::new();
        for PurityEntry { mask, purity } in file.entries {
            let alpha = QubitSet::new(file.n, mask)?;
            let floor = 0.5f64.powi(alpha.cardinality() as i32);
            if !purity.is_finite() || purity < floor - 1e-10 || purity > 1.0 + 1e-10 {
                return Err(Error::Parse(format!(
                    "purity {purity} of mask {mask} outside [{floor}, 1]"
                )));
            }
            if mask == 0 && purity != 1.0 {
                return Err(Error::Parse("empty-set purity must be exactly 1".into()));
            }
            if values.insert(mask, purity).is_some() {
                return Err(Error::Parse(format!("duplicate mask {mask}")));
            }
        }
        Ok(Self {
            n_qubits: file.n,
            values,
        })
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PurityTableFile {
    n: usize,
    entries: Vec<PurityEntry>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PurityEntry {
    mask: u64,
    purity: f64,
}

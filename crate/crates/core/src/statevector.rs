//! Dense n-qubit pure states and qubit subsets.
//!
//! Qubit `k` (0-based) occupies bit `n - 1 - k` of an amplitude index, so
//! qubit 0 is the most significant bit and `|q0 q1 ... q(n-1)>` reads left to
//! right. [`QubitSet`] masks use the opposite, label-oriented layout: bit `k`
//! of the mask is set when qubit `k` belongs to the set. Use
//! [`QubitSet::index_mask`] to translate between the two.

use std::fmt;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::limits;

/// Tolerance on `|sum |c_i|^2 - 1|` accepted at construction.
pub const NORM_TOLERANCE: f64 = 1e-10;

/// Amplitude-index bit for qubit `qubit` of an `n`-qubit register.
#[inline]
pub fn qubit_bit(n_qubits: usize, qubit: usize) -> usize {
    1 << (n_qubits - 1 - qubit)
}

/// A normalized n-qubit pure state.
#[derive(Clone, Debug, PartialEq)]
pub struct Statevector {
    n_qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl Statevector {
    /// Builds a state from `2^n` amplitudes, rejecting anything whose squared
    /// norm is off by more than [`NORM_TOLERANCE`].
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        let len = amplitudes.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(Error::BadLength(len));
        }
        let n_qubits = len.trailing_zeros() as usize;
        let norm_squared = norm_squared(&amplitudes);
        if !norm_squared.is_finite() || (norm_squared - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::NotNormalized {
                norm_squared,
                tolerance: NORM_TOLERANCE,
            });
        }
        Ok(Self {
            n_qubits,
            amplitudes,
        })
    }

    /// Rescales `amplitudes` to unit norm. Fails on a (numerically) zero vector.
    pub fn normalized(mut amplitudes: Vec<Complex64>) -> Result<Self> {
        let norm_squared = norm_squared(&amplitudes);
        if !(norm_squared > 1e-300) || !norm_squared.is_finite() {
            return Err(Error::ZeroProbability(norm_squared));
        }
        let scale = 1.0 / norm_squared.sqrt();
        amplitudes.iter_mut().for_each(|a| *a *= scale);
        Self::new(amplitudes)
    }

    /// Computational basis state `|index>`.
    pub fn basis(n_qubits: usize, index: usize) -> Result<Self> {
        check_qubits(n_qubits)?;
        let dim = 1usize << n_qubits;
        if index >= dim {
            return Err(Error::InvalidParameter(format!(
                "basis index {index} out of range for {n_qubits} qubits"
            )));
        }
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); dim];
        amplitudes[index] = Complex64::new(1.0, 0.0);
        Self::new(amplitudes)
    }

    /// Tensor product of single-qubit states, first factor on qubit 0.
    pub fn product(factors: &[(Complex64, Complex64)]) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::NoQubits(0));
        }
        for (k, (a, b)) in factors.iter().enumerate() {
            let ns = a.norm_sqr() + b.norm_sqr();
            if !ns.is_finite() || (ns - 1.0).abs() > NORM_TOLERANCE {
                return Err(Error::InvalidParameter(format!(
                    "factor {k} has squared norm {ns}"
                )));
            }
        }
        let mut amplitudes = vec![Complex64::new(1.0, 0.0)];
        for &(a, b) in factors {
            amplitudes = amplitudes
                .iter()
                .flat_map(|&x| [x * a, x * b])
                .collect();
        }
        Self::new(amplitudes)
    }

    /// `(|0...0> + |1...1>)/sqrt(2)`.
    pub fn ghz(n_qubits: usize) -> Result<Self> {
        check_qubits(n_qubits)?;
        let dim = 1usize << n_qubits;
        let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); dim];
        amplitudes[0] = h;
        amplitudes[dim - 1] = h;
        Self::new(amplitudes)
    }

    /// Equal superposition of all Hamming-weight-one basis states.
    pub fn w(n_qubits: usize) -> Result<Self> {
        check_qubits(n_qubits)?;
        let dim = 1usize << n_qubits;
        let a = Complex64::new(1.0 / (n_qubits as f64).sqrt(), 0.0);
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); dim];
        for k in 0..n_qubits {
            amplitudes[1 << k] = a;
        }
        Self::new(amplitudes)
    }

    /// Haar-random state: i.i.d. standard complex Gaussian amplitudes,
    /// normalized. Deterministic in `seed`.
    pub fn haar_random(n_qubits: usize, seed: u64) -> Result<Self> {
        check_qubits(n_qubits)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self::haar_random_with(n_qubits, &mut rng)
    }

    pub fn haar_random_with<R: rand::Rng + ?Sized>(n_qubits: usize, rng: &mut R) -> Result<Self> {
        check_qubits(n_qubits)?;
        let amplitudes = (0..1usize << n_qubits)
            .map(|_| {
                let re: f64 = StandardNormal.sample(rng);
                let im: f64 = StandardNormal.sample(rng);
                Complex64::new(re, im)
            })
            .collect();
        Self::normalized(amplitudes)
    }

    /// A state at trace distance exactly `epsilon` from `self`:
    /// `delta |psi> + sqrt(1 - delta^2) |v>` with `delta = sqrt(1 - epsilon^2)`
    /// and `|v>` the normalized component of `|0>` orthogonal to `|psi>`.
    pub fn perturb(&self, epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "epsilon must lie in (0, 1], got {epsilon}"
            )));
        }
        let c0 = self.amplitudes[0];
        if c0.norm() >= 1.0 - 1e-12 {
            return Err(Error::InvalidParameter(
                "state is parallel to |0>; the orthogonal direction vanishes".into(),
            ));
        }
        // (I - |psi><psi|)|0> = |0> - conj(c0) |psi>
        let mut orth: Vec<Complex64> = self.amplitudes.iter().map(|&a| -c0.conj() * a).collect();
        orth[0] += 1.0;
        let orth_norm = norm_squared(&orth).sqrt();
        let delta = (1.0 - epsilon * epsilon).max(0.0).sqrt();
        let amplitudes = self
            .amplitudes
            .iter()
            .zip(&orth)
            .map(|(&a, &o)| a * delta + o * (epsilon / orth_norm))
            .collect();
        Self::normalized(amplitudes)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amplitudes
    }

    /// `<self|other>`, conjugate-linear in `self`.
    pub fn inner_product(&self, other: &Statevector) -> Result<Complex64> {
        self.same_size(other)?;
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// Trace distance between the two pure states, `sqrt(1 - |<a|b>|^2)`.
    pub fn trace_distance(&self, other: &Statevector) -> Result<f64> {
        let overlap = self.inner_product(other)?.norm_sqr();
        Ok((1.0 - overlap).clamp(0.0, 1.0).sqrt())
    }

    /// `e^{i theta} |psi>`.
    pub fn with_global_phase(&self, theta: f64) -> Self {
        let phase = Complex64::from_polar(1.0, theta);
        Self {
            n_qubits: self.n_qubits,
            amplitudes: self.amplitudes.iter().map(|&a| a * phase).collect(),
        }
    }

    /// `self ⊗ other`; qubits of `other` follow those of `self`.
    pub fn tensor(&self, other: &Statevector) -> Self {
        let amplitudes = self
            .amplitudes
            .iter()
            .flat_map(|&a| other.amplitudes.iter().map(move |&b| a * b))
            .collect();
        Self {
            n_qubits: self.n_qubits + other.n_qubits,
            amplitudes,
        }
    }

    /// Relabels qubits: qubit `k` of `self` becomes qubit `perm[k]` of the result.
    pub fn permute_qubits(&self, perm: &[usize]) -> Result<Self> {
        let n = self.n_qubits;
        let mut seen = vec![false; n];
        if perm.len() != n || perm.iter().any(|&p| p >= n || std::mem::replace(&mut seen[p], true)) {
            return Err(Error::InvalidParameter(format!("{perm:?} is not a permutation of 0..{n}")));
        }
        let mut out = vec![Complex64::new(0.0, 0.0); self.dim()];
        for (i, &a) in self.amplitudes.iter().enumerate() {
            let j = (0..n)
                .filter(|&k| i & qubit_bit(n, k) != 0)
                .fold(0, |acc, k| acc | qubit_bit(n, perm[k]));
            out[j] = a;
        }
        Ok(Self {
            n_qubits: n,
            amplitudes: out,
        })
    }

    /// Applies a 2x2 operator (row-major) to one qubit. The result is generally
    /// unnormalized, so raw amplitudes are returned.
    pub fn apply_single_qubit(&self, qubit: usize, op: &[[Complex64; 2]; 2]) -> Result<Vec<Complex64>> {
        if qubit >= self.n_qubits {
            return Err(Error::QubitOutOfRange {
                qubit,
                n_qubits: self.n_qubits,
            });
        }
        let bit = qubit_bit(self.n_qubits, qubit);
        let mut out = self.amplitudes.clone();
        for i in (0..self.dim()).filter(|i| i & bit == 0) {
            let (a0, a1) = (self.amplitudes[i], self.amplitudes[i | bit]);
            out[i] = op[0][0] * a0 + op[0][1] * a1;
            out[i | bit] = op[1][0] * a0 + op[1][1] * a1;
        }
        Ok(out)
    }

    /// Projects one qubit onto `|outcome>`. Returns the outcome probability and
    /// the renormalized post-measurement state.
    pub fn measure_qubit(&self, qubit: usize, outcome: u8) -> Result<(f64, Statevector)> {
        if outcome > 1 {
            return Err(Error::InvalidParameter(format!("outcome must be 0 or 1, got {outcome}")));
        }
        let zero = Complex64::new(0.0, 0.0);
        let one = Complex64::new(1.0, 0.0);
        let projector = if outcome == 0 {
            [[one, zero], [zero, zero]]
        } else {
            [[zero, zero], [zero, one]]
        };
        let raw = self.apply_single_qubit(qubit, &projector)?;
        let p = norm_squared(&raw);
        if p <= 1e-12 {
            return Err(Error::ZeroProbability(p));
        }
        Ok((p, Statevector::normalized(raw)?))
    }

    fn same_size(&self, other: &Statevector) -> Result<()> {
        if self.n_qubits != other.n_qubits {
            Err(Error::DimensionMismatch {
                left: self.n_qubits,
                right: other.n_qubits,
            })
        } else {
            Ok(())
        }
    }

    pub fn to_file(&self) -> StateFile {
        StateFile {
            n: self.n_qubits,
            amplitudes: self.amplitudes.iter().map(|a| [a.re, a.im]).collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_file()).expect("state serialization is infallible")
    }

    /// Reads the `{"n": .., "amplitudes": [[re, im], ..]}` format, validating
    /// both length and norm.
    pub fn from_json_str(text: &str) -> Result<Self> {
        let file: StateFile = serde_json::from_str(text)?;
        Self::try_from(file)
    }

    pub fn from_json_slice(bytes: &[u8]) -> Result<Self> {
        let file: StateFile = serde_json::from_slice(bytes)?;
        Self::try_from(file)
    }
}

/// On-disk state representation.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct StateFile {
    pub n: usize,
    pub amplitudes: Vec<[f64; 2]>,
}

impl TryFrom<StateFile> for Statevector {
    type Error = Error;

    fn try_from(file: StateFile) -> Result<Self> {
        check_qubits(file.n)?;
        limits::check("state file qubits", file.n, limits::MAX_STATE_QUBITS)?;
        if file.amplitudes.len() != 1usize << file.n {
            return Err(Error::Parse(format!(
                "expected {} amplitudes for n = {}, found {}",
                1usize << file.n,
                file.n,
                file.amplitudes.len()
            )));
        }
        Statevector::new(
            file.amplitudes
                .into_iter()
                .map(|[re, im]| Complex64::new(re, im))
                .collect(),
        )
    }
}

pub(crate) fn norm_squared(amplitudes: &[Complex64]) -> f64 {
    amplitudes.iter().map(|a| a.norm_sqr()).sum()
}

fn check_qubits(n: usize) -> Result<()> {
    if n < 1 {
        return Err(Error::NoQubits(n));
    }
    limits::check("qubits", n, limits::MAX_STATE_QUBITS)
}

/// A subset of qubit labels of an n-qubit register. Bit `k` of the mask is
/// set iff qubit `k` is a member.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct QubitSet {
    n_qubits: usize,
    mask: u64,
}

impl QubitSet {
    pub fn new(n_qubits: usize, mask: u64) -> Result<Self> {
        if n_qubits == 0 || n_qubits > 63 {
            return Err(Error::NoQubits(n_qubits));
        }
        if mask >> n_qubits != 0 {
            return Err(Error::MaskOutOfRange { mask, n_qubits });
        }
        Ok(Self { n_qubits, mask })
    }

    /// Like [`QubitSet::new`] but rejects the empty set.
    pub fn nonempty(n_qubits: usize, mask: u64) -> Result<Self> {
        let s = Self::new(n_qubits, mask)?;
        if s.is_empty() {
            return Err(Error::EmptySubset);
        }
        Ok(s)
    }

    pub fn from_qubits(n_qubits: usize, qubits: &[usize]) -> Result<Self> {
        let mut mask = 0u64;
        for &q in qubits {
            if q >= n_qubits {
                return Err(Error::QubitOutOfRange { qubit: q, n_qubits });
            }
            mask |= 1 << q;
        }
        Self::new(n_qubits, mask)
    }

    /// The whole register `{0, .., n-1}`.
    pub fn full(n_qubits: usize) -> Result<Self> {
        Self::new(n_qubits, low_bits(n_qubits))
    }

    /// Canonical representative `{0, .., c-1}` of cardinality `c`.
    pub fn first(n_qubits: usize, cardinality: usize) -> Result<Self> {
        if cardinality > n_qubits {
            return Err(Error::InvalidParameter(format!(
                "cardinality {cardinality} exceeds {n_qubits} qubits"
            )));
        }
        Self::new(n_qubits, low_bits(cardinality))
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn mask(&self) -> u64 {
        self.mask
    }

    pub fn cardinality(&self) -> usize {
        self.mask.count_ones() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.mask == 0
    }

    pub fn contains(&self, qubit: usize) -> bool {
        qubit < self.n_qubits && self.mask >> qubit & 1 == 1
    }

    /// Member labels in ascending order.
    pub fn qubits(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.n_qubits).filter(move |&k| self.contains(k))
    }

    pub fn complement(&self) -> Self {
        Self {
            n_qubits: self.n_qubits,
            mask: !self.mask & low_bits(self.n_qubits),
        }
    }

    pub fn union(&self, other: &Self) -> Self {
        Self {
            n_qubits: self.n_qubits,
            mask: self.mask | other.mask,
        }
    }

    pub fn is_subset_of(&self, other: &Self) -> bool {
        self.mask & !other.mask == 0
    }

    /// The same set as a mask over amplitude-index bits.
    pub fn index_mask(&self) -> usize {
        self.qubits()
            .fold(0, |acc, k| acc | qubit_bit(self.n_qubits, k))
    }

    pub(crate) fn check_register(&self, n_qubits: usize) -> Result<()> {
        if self.n_qubits != n_qubits {
            Err(Error::DimensionMismatch {
                left: self.n_qubits,
                right: n_qubits,
            })
        } else {
            Ok(())
        }
    }
}

impl fmt::Display for QubitSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, q) in self.qubits().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{q}")?;
        }
        write!(f, "}}")
    }
}

/// Parses a subset mask written as `0b101`, `0x5` or `5`.
pub fn parse_mask(text: &str) -> Result<u64> {
    let t = text.trim().replace('_', "");
    let parsed = if let Some(bits) = t.strip_prefix("0b").or_else(|| t.strip_prefix("0B")) {
        u64::from_str_radix(bits, 2)
    } else if let Some(hex) = t.strip_prefix("0x").or_else(|| t.strip_prefix("0X")) {
        u64::from_str_radix(hex, 16)
    } else {
        t.parse()
    };
    parsed.map_err(|e| Error::Parse(format!("bad mask {text:?}: {e}")))
}

pub(crate) fn low_bits(count: usize) -> u64 {
    if count >= 64 {
        u64::MAX
    } else {
        (1u64 << count) - 1
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn assert_amps(psi: &Statevector, expected: &[f64]) {
        assert_eq!(psi.dim(), expected.len());
        for (a, &e) in psi.amplitudes().iter().zip(expected) {
            assert_abs_diff_eq!(a.re, e, epsilon = 1e-15);
            assert_abs_diff_eq!(a.im, 0.0, epsilon = 1e-15);
        }
    }

    const H: f64 = std::f64::consts::FRAC_1_SQRT_2;

    #[test]
    fn product_states() {
        let z = (c(1.0, 0.0), c(0.0, 0.0));
        let plus = (c(H, 0.0), c(H, 0.0));
        assert_amps(&Statevector::product(&[z, z]).unwrap(), &[1.0, 0.0, 0.0, 0.0]);
        assert_amps(&Statevector::product(&[plus, z]).unwrap(), &[H, 0.0, H, 0.0]);
        assert!(matches!(
            Statevector::product(&[(c(1.0, 0.0), c(1.0, 0.0))]),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn ghz_and_w_layout() {
        assert_amps(&Statevector::ghz(2).unwrap(), &[H, 0.0, 0.0, H]);
        assert_amps(&Statevector::ghz(1).unwrap(), &[H, H]);
        let g3 = Statevector::ghz(3).unwrap();
        let nz: Vec<usize> = (0..8).filter(|&i| g3.amplitudes()[i].norm() > 0.0).collect();
        assert_eq!(nz, vec![0, 7]);

        let w3 = Statevector::w(3).unwrap();
        let nz: Vec<usize> = (0..8).filter(|&i| w3.amplitudes()[i].norm() > 0.0).collect();
        assert_eq!(nz, vec![1, 2, 4]);
        assert_abs_diff_eq!(w3.amplitudes()[4].re, 1.0 / 3f64.sqrt(), epsilon = 1e-15);
        assert_amps(&Statevector::w(1).unwrap(), &[0.0, 1.0]);
        assert_amps(&Statevector::w(2).unwrap(), &[0.0, H, H, 0.0]);

        assert_eq!(Statevector::ghz(0), Err(Error::NoQubits(0)));
        assert_eq!(Statevector::w(0), Err(Error::NoQubits(0)));
    }

    #[test]
    fn ghz_and_w_are_permutation_symmetric() {
        for n in 2..6 {
            for psi in [Statevector::ghz(n).unwrap(), Statevector::w(n).unwrap()] {
                for a in 0..n {
                    for b in a + 1..n {
                        let mut perm: Vec<usize> = (0..n).collect();
                        perm.swap(a, b);
                        assert_eq!(psi.permute_qubits(&perm).unwrap(), psi);
                    }
                }
            }
        }
    }

    #[test]
    fn construction_rejects_bad_norm_and_length() {
        assert!(matches!(
            Statevector::new(vec![c(1.0, 0.0), c(1e-4, 0.0)]),
            Err(Error::NotNormalized { .. })
        ));
        assert_eq!(Statevector::new(vec![c(1.0, 0.0); 3]), Err(Error::BadLength(3)));
        assert_eq!(Statevector::new(vec![c(1.0, 0.0)]), Err(Error::BadLength(1)));
        assert!(Statevector::new(vec![c(1.0, 0.0), c(2e-5, 0.0)]).is_err());
        assert!(Statevector::new(vec![c(1.0, 0.0), c(1e-6, 0.0)]).is_ok());
        assert!(Statevector::new(vec![c(1.0, 0.0), c(1e-3, 0.0)].into_iter().map(|x| x / (1.0f64 + 1e-6).sqrt()).collect()).is_ok());
    }

    #[test]
    fn haar_is_deterministic_and_normalized() {
        let a = Statevector::haar_random(3, 7).unwrap();
        let b = Statevector::haar_random(3, 7).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, Statevector::haar_random(3, 8).unwrap());
        assert_abs_diff_eq!(norm_squared(a.amplitudes()), 1.0, epsilon = 1e-10);
    }

    #[test]
    fn inner_products() {
        let psi = Statevector::haar_random(4, 1).unwrap();
        assert_abs_diff_eq!(psi.inner_product(&psi).unwrap().re, 1.0, epsilon = 1e-12);
        let g = Statevector::ghz(3).unwrap();
        let w = Statevector::w(3).unwrap();
        assert_eq!(g.inner_product(&w).unwrap(), c(0.0, 0.0));
        let zero = Statevector::basis(1, 0).unwrap();
        let plus = Statevector::ghz(1).unwrap();
        assert_abs_diff_eq!(zero.inner_product(&plus).unwrap().re, H, epsilon = 1e-15);
        assert!(matches!(
            g.inner_product(&zero),
            Err(Error::DimensionMismatch { left: 3, right: 1 })
        ));
    }

    #[test]
    fn conjugate_linear_in_left_argument() {
        let a = Statevector::haar_random(2, 3).unwrap();
        let b = Statevector::haar_random(2, 4).unwrap();
        let ab = a.inner_product(&b).unwrap();
        let ia = a.with_global_phase(std::f64::consts::FRAC_PI_2);
        let iab = ia.inner_product(&b).unwrap();
        assert_abs_diff_eq!((iab - ab * c(0.0, -1.0)).norm(), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn trace_distance_edges() {
        let a = Statevector::basis(2, 0).unwrap();
        let b = Statevector::basis(2, 3).unwrap();
        assert_eq!(a.trace_distance(&a).unwrap(), 0.0);
        assert_eq!(a.trace_distance(&b).unwrap(), 1.0);
    }

    #[test]
    fn perturb_hits_target_distance() {
        for seed in 0..20 {
            let psi = Statevector::haar_random(3, seed).unwrap();
            for eps in [0.1, 1e-3, 1e-4, 0.5] {
                let p = psi.perturb(eps).unwrap();
                assert_abs_diff_eq!(norm_squared(p.amplitudes()), 1.0, epsilon = 1e-10);
                assert_abs_diff_eq!(psi.trace_distance(&p).unwrap(), eps, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn perturb_small_epsilon_stays_close() {
        let psi = Statevector::haar_random(3, 11).unwrap();
        let p = psi.perturb(1e-8).unwrap();
        assert_abs_diff_eq!(psi.inner_product(&p).unwrap().norm(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn perturb_epsilon_one_gives_orthogonal_state() {
        // Direct evaluation: delta = 0, so psi' is the normalized projection of
        // |0> orthogonal to |+>^n, whose overlap with |+>^n vanishes.
        let plus = (c(H, 0.0), c(H, 0.0));
        let psi = Statevector::product(&[plus, plus, plus]).unwrap();
        let p = psi.perturb(1.0).unwrap();
        assert_abs_diff_eq!(psi.inner_product(&p).unwrap().norm(), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn perturb_rejects_zero_state() {
        let zero = Statevector::basis(2, 0).unwrap().with_global_phase(0.3);
        assert!(matches!(zero.perturb(0.1), Err(Error::InvalidParameter(_))));
        let psi = Statevector::ghz(2).unwrap();
        assert!(psi.perturb(0.0).is_err());
        assert!(psi.perturb(1.5).is_err());
    }

    #[test]
    fn qubit_set_basics() {
        let s = QubitSet::new(3, 0b101).unwrap();
        assert_eq!(s.cardinality(), 2);
        assert_eq!(s.qubits().collect::<Vec<_>>(), vec![0, 2]);
        assert_eq!(s.complement().mask(), 0b010);
        // qubit 0 -> index bit 2, qubit 2 -> index bit 0
        assert_eq!(s.index_mask(), 0b101);
        assert_eq!(QubitSet::new(3, 0b001).unwrap().index_mask(), 0b100);
        assert_eq!(QubitSet::new(3, 0b1000), Err(Error::MaskOutOfRange { mask: 8, n_qubits: 3 }));
        assert_eq!(QubitSet::nonempty(3, 0), Err(Error::EmptySubset));
        assert_eq!(QubitSet::first(4, 2).unwrap().mask(), 0b11);
        assert_eq!(QubitSet::full(4).unwrap().to_string(), "{0,1,2,3}");
    }

    #[test]
    fn masks_parse() {
        assert_eq!(parse_mask("0b111").unwrap(), 7);
        assert_eq!(parse_mask("0x1f").unwrap(), 31);
        assert_eq!(parse_mask("12").unwrap(), 12);
        assert!(parse_mask("0b2").is_err());
        assert!(parse_mask("").is_err());
    }

    #[test]
    fn state_file_round_trip_and_validation() {
        let psi = Statevector::haar_random(3, 5).unwrap();
        let back = Statevector::from_json_str(&psi.to_json()).unwrap();
        assert_eq!(back, psi);
        assert!(matches!(
            Statevector::from_json_str(r#"{"n": 2, "amplitudes": [[1,0],[0,0]]}"#),
            Err(Error::Parse(_))
        ));
        assert!(matches!(
            Statevector::from_json_str(r#"{"n": 1, "amplitudes": [[1,0],[1,0]]}"#),
            Err(Error::NotNormalized { .. })
        ));
        assert!(Statevector::from_json_str(r#"{"n": 64, "amplitudes": []}"#).is_err());
        assert!(Statevector::from_json_str(r#"{"n": 0, "amplitudes": []}"#).is_err());
    }
}

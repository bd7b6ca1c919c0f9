//! The parallelized SWAP test on two n-qubit copies.
//!
//! The default route never simulates the control register. Measuring control
//! `k` in `z_k` applies the projector `(1 + (-1)^z_k S_k)/2` to the two-copy
//! vector, where `S_k` exchanges qubit `k` of copy A with qubit `k` of copy B,
//! so an outcome probability is the squared norm left after the whole chain.
//! The swaps commute, so the chain is evaluated in one pass by rotating each
//! tested pair into its symmetric/antisymmetric basis and binning `|amp|^2` by
//! which pairs came out antisymmetric. The explicit ancilla + Hadamard + Fredkin circuit lives in
//! [`full_circuit_oracle`] as an independent check.
//!
//! Outcome bitstrings follow the register convention: the first tested qubit
//! (lowest label) is the most significant bit of the outcome index and the
//! leftmost character of its string form.

use std::collections::{BTreeMap, HashMap};
use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::limits;
use crate::reductions::purity_table;
use crate::statevector::{low_bits, QubitSet, Statevector};

/// Probabilities in `[-NEGATIVE_SLACK, 0)` are roundoff and clamp to zero.
pub const NEGATIVE_SLACK: f64 = 1e-12;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// A (possibly unnormalized) vector on copy A ⊗ copy B. Index layout is
/// `(a << n) | b` for copy-A index `a` and copy-B index `b`.
#[derive(Clone, Debug, PartialEq)]
pub struct JointState {
    n_per_copy: usize,
    amplitudes: Vec<Complex64>,
}

impl JointState {
    /// `|psi> ⊗ |phi>`.
    pub fn product(psi: &Statevector, phi: &Statevector) -> Result<Self> {
        if psi.n_qubits() != phi.n_qubits() {
            return Err(Error::DimensionMismatch {
                left: psi.n_qubits(),
                right: phi.n_qubits(),
            });
        }
        let n = psi.n_qubits();
        limits::check("qubits per copy in a two-copy state", n, limits::max_joint_qubits())?;
        let amplitudes = psi
            .amplitudes()
            .iter()
            .flat_map(|&a| phi.amplitudes().iter().map(move |&b| a * b))
            .collect();
        Ok(Self {
            n_per_copy: n,
            amplitudes,
        })
    }

    pub fn n_qubits_per_copy(&self) -> usize {
        self.n_per_copy
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm_squared(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Index bits of qubit `k` in copy A and copy B.
    fn pair_bits(&self, k: usize) -> (usize, usize) {
        let b = 1usize << (self.n_per_copy - 1 - k);
        (b << self.n_per_copy, b)
    }

    fn check_qubit(&self, qubit: usize) -> Result<()> {
        if qubit >= self.n_per_copy {
            Err(Error::QubitOutOfRange {
                qubit,
                n_qubits: self.n_per_copy,
            })
        } else {
            Ok(())
        }
    }

    /// Applies `(1 + (-1)^z_bit S_qubit)/2`. The result is not renormalized.
    pub fn apply_controlled_projector(&self, qubit: usize, z_bit: u8) -> Result<JointState> {
        self.check_qubit(qubit)?;
        if z_bit > 1 {
            return Err(Error::InvalidParameter(format!("z_bit must be 0 or 1, got {z_bit}")));
        }
        let mut out = vec![ZERO; self.amplitudes.len()];
        project_into(&self.amplitudes, &mut out, self.pair_bits(qubit), z_bit == 1);
        Ok(JointState {
            n_per_copy: self.n_per_copy,
            amplitudes: out,
        })
    }

    /// Reduced 4x4 density matrix of (copy-A qubit k, copy-B qubit k), basis
    /// `|ab>` with index `2a + b`, normalized by the squared norm.
    pub fn pair_marginal(&self, k: usize) -> Result<[[Complex64; 4]; 4]> {
        self.check_qubit(k)?;
        let norm = self.norm_squared();
        if !(norm > 0.0) {
            return Err(Error::ZeroProbability(norm));
        }
        let (ba, bb) = self.pair_bits(k);
        let local = |a: usize, b: usize| (if a == 1 { ba } else { 0 }) | (if b == 1 { bb } else { 0 });
        let offsets: [usize; 4] = [local(0, 0), local(0, 1), local(1, 0), local(1, 1)];
        let mut rho = [[ZERO; 4]; 4];
        for base in (0..self.amplitudes.len()).filter(|i| i & (ba | bb) == 0) {
            let v: [Complex64; 4] = offsets.map(|o| self.amplitudes[base | o]);
            for r in 0..4 {
                for c in 0..4 {
                    rho[r][c] += v[r] * v[c].conj();
                }
            }
        }
        for row in rho.iter_mut() {
            for x in row.iter_mut() {
                *x /= norm;
            }
        }
        Ok(rho)
    }

    /// `<Psi-| rho_kk |Psi->` with `|Psi-> = (|01> - |10>)/sqrt(2)`.
    pub fn singlet_fidelity(&self, k: usize) -> Result<f64> {
        let rho = self.pair_marginal(k)?;
        Ok(0.5 * (rho[1][1] + rho[2][2] - rho[1][2] - rho[2][1]).re)
    }

    fn scaled(mut self, factor: f64) -> Self {
        self.amplitudes.iter_mut().for_each(|a| *a *= factor);
        self
    }
}

/// Writes `(1 ± S)/2 src` into `dst`; `minus` selects the antisymmetric
/// projector. `(bit_a, bit_b)` are the two index bits being exchanged.
fn project_into(src: &[Complex64], dst: &mut [Complex64], (bit_a, bit_b): (usize, usize), minus: bool) {
    let both = bit_a | bit_b;
    for i in 0..src.len() {
        let masked = i & both;
        if masked == 0 || masked == both {
            dst[i] = if minus { ZERO } else { src[i] };
        } else {
            let j = i ^ both;
            dst[i] = if minus {
                (src[i] - src[j]) * 0.5
            } else {
                (src[i] + src[j]) * 0.5
            };
        }
    }
}

/// Exact probabilities `p(z)` over control outcomes for the tested qubits.
#[derive(Clone, Debug, PartialEq)]
pub struct OutcomeDistribution {
    tested: QubitSet,
    probabilities: Vec<f64>,
}

impl OutcomeDistribution {
    pub fn tested(&self) -> QubitSet {
        self.tested
    }

    /// Number of tested qubits (the outcome bitstring width).
    pub fn width(&self) -> usize {
        self.tested.cardinality()
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn get(&self, z: usize) -> f64 {
        self.probabilities[z]
    }

    pub fn total(&self) -> f64 {
        self.probabilities.iter().sum()
    }

    /// Largest `|p(z)|` over odd-Hamming-weight outcomes.
    pub fn max_odd_weight(&self) -> f64 {
        self.probabilities
            .iter()
            .enumerate()
            .filter(|(z, _)| z.count_ones() % 2 == 1)
            .map(|(_, p)| p.abs())
            .fold(0.0, f64::max)
    }

    /// The outcome index whose bits are set exactly on `qubits` (which must
    /// all be tested).
    pub fn outcome_for(&self, qubits: QubitSet) -> Result<usize> {
        outcome_index(self.tested, qubits)
    }

    pub fn bitstring(&self, z: usize) -> String {
        bitstring(z, self.width())
    }

    pub fn to_file(&self) -> OutcomeFile {
        OutcomeFile {
            tested_mask: self.tested.mask(),
            n: Some(self.tested.n_qubits()),
            shots: None,
            seed: None,
            entries: self
                .probabilities
                .iter()
                .enumerate()
                .map(|(z, &p)| OutcomeEntry {
                    z: self.bitstring(z),
                    p_or_count: p,
                })
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_file()).expect("distribution serialization is infallible")
    }

    /// Reads the outcome JSON schema. Missing bitstrings count as zero
    /// probability; the total must be 1 within 1e-9.
    pub fn from_json_str(text: &str) -> Result<Self> {
        let file: OutcomeFile = serde_json::from_str(text)?;
        let tested = file.tested_set()?;
        let mut probabilities = vec![0.0; 1 << tested.cardinality()];
        for (z, p) in file.parse_entries(tested.cardinality())? {
            if !(0.0..=1.0 + 1e-10).contains(&p) {
                return Err(Error::Parse(format!("probability {p} out of range")));
            }
            probabilities[z] = p;
        }
        let total: f64 = probabilities.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::Parse(format!("probabilities sum to {total}")));
        }
        Ok(Self {
            tested,
            probabilities,
        })
    }
}

/// Empirical outcome counts from sampled SWAP-test runs.
#[derive(Clone, Debug, PartialEq)]
pub struct ShotHistogram {
    tested: QubitSet,
    shots: u64,
    seed: u64,
    counts: BTreeMap<usize, u64>,
}

impl ShotHistogram {
    pub fn tested(&self) -> QubitSet {
        self.tested
    }

    pub fn shots(&self) -> u64 {
        self.shots
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn width(&self) -> usize {
        self.tested.cardinality()
    }

    pub fn count(&self, z: usize) -> u64 {
        self.counts.get(&z).copied().unwrap_or(0)
    }

    /// Non-zero counts in ascending outcome order.
    pub fn counts(&self) -> impl Iterator<Item = (usize, u64)> + '_ {
        self.counts.iter().map(|(&z, &c)| (z, c))
    }

    pub fn frequency(&self, z: usize) -> f64 {
        self.count(z) as f64 / self.shots as f64
    }

    pub fn to_file(&self) -> OutcomeFile {
        OutcomeFile {
            tested_mask: self.tested.mask(),
            n: Some(self.tested.n_qubits()),
            shots: Some(self.shots),
            seed: Some(self.seed),
            entries: self
                .counts
                .iter()
                .map(|(&z, &c)| OutcomeEntry {
                    z: bitstring(z, self.width()),
                    p_or_count: c as f64,
                })
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_file()).expect("histogram serialization is infallible")
    }

    /// Reads the outcome JSON schema with integer counts. `shots` defaults to
    /// the sum of counts and `seed` to 0 when absent.
    pub fn from_json_str(text: &str) -> Result<Self> {
        let file: OutcomeFile = serde_json::from_str(text)?;
        let tested = file.tested_set()?;
        let mut counts = BTreeMap::new();
        let mut total = 0u64;
        for (z, c) in file.parse_entries(tested.cardinality())? {
            if !(c >= 0.0 && c.fract() == 0.0 && c < 2f64.powi(53)) {
                return Err(Error::Parse(format!("count {c} is not a non-negative integer")));
            }
            let c = c as u64;
            total = total
                .checked_add(c)
                .ok_or_else(|| Error::Parse("count total overflows".into()))?;
            if c > 0 {
                counts.insert(z, c);
            }
        }
        let shots = file.shots.unwrap_or(total);
        if shots != total || shots == 0 {
            return Err(Error::Parse(format!("counts sum to {total}, shots = {shots}")));
        }
        Ok(Self {
            tested,
            shots,
            seed: file.seed.unwrap_or(0),
            counts,
        })
    }
}

/// Shared JSON layout for distributions (`p_or_count` = probability) and
/// histograms (`p_or_count` = count).
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct OutcomeFile {
    pub tested_mask: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shots: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub entries: Vec<OutcomeEntry>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct OutcomeEntry {
    pub z: String,
    pub p_or_count: f64,
}

impl OutcomeFile {
    fn tested_set(&self) -> Result<QubitSet> {
        let minimal = (64 - self.tested_mask.leading_zeros() as usize).max(1);
        let n = self.n.unwrap_or(minimal);
        if n > limits::MAX_STATE_QUBITS {
            return Err(Error::Parse(format!("register of {n} qubits is too large")));
        }
        let tested = QubitSet::new(n, self.tested_mask)?;
        if tested.cardinality() > limits::MAX_OUTCOME_QUBITS {
            return Err(Error::Budget {
                what: "tested qubits",
                requested: tested.cardinality() as u64,
                limit: limits::MAX_OUTCOME_QUBITS as u64,
            });
        }
        Ok(tested)
    }

    fn parse_entries(&self, width: usize) -> Result<Vec<(usize, f64)>> {
        let mut seen = vec![false; 1 << width];
        self.entries
            .iter()
            .map(|e| {
                let z = parse_bitstring(&e.z, width)?;
                if std::mem::replace(&mut seen[z], true) {
                    return Err(Error::Parse(format!("duplicate outcome {}", e.z)));
                }
                if !e.p_or_count.is_finite() {
                    return Err(Error::Parse(format!("non-finite value for {}", e.z)));
                }
                Ok((z, e.p_or_count))
            })
            .collect()
    }
}

/// `z` as a `width`-character string, most significant bit first.
pub fn bitstring(z: usize, width: usize) -> String {
    (0..width)
        .rev()
        .map(|b| if z >> b & 1 == 1 { '1' } else { '0' })
        .collect()
}

/// Inverse of [`bitstring`]; the string must have exactly `width` characters.
pub fn parse_bitstring(text: &str, width: usize) -> Result<usize> {
    if text.len() != width {
        return Err(Error::Parse(format!(
            "bitstring {text:?} should have {width} characters"
        )));
    }
    text.chars().try_fold(0usize, |acc, ch| match ch {
        '0' => Ok(acc << 1),
        '1' => Ok(acc << 1 | 1),
        _ => Err(Error::Parse(format!("bitstring {text:?} contains {ch:?}"))),
    })
}

/// Outcome index of `tested` whose 1 bits sit exactly on `ones`.
pub fn outcome_index(tested: QubitSet, ones: QubitSet) -> Result<usize> {
    if !ones.is_subset_of(&tested) {
        return Err(Error::InvalidParameter(format!("{ones} is not a subset of {tested}")));
    }
    let m = tested.cardinality();
    Ok(tested
        .qubits()
        .enumerate()
        .filter(|&(_, q)| ones.contains(q))
        .fold(0, |acc, (j, _)| acc | 1 << (m - 1 - j)))
}

/// The tested qubits flagged by outcome `z`.
pub fn ones_of(tested: QubitSet, z: usize) -> QubitSet {
    let m = tested.cardinality();
    let mask = tested
        .qubits()
        .enumerate()
        .filter(|&(j, _)| z >> (m - 1 - j) & 1 == 1)
        .fold(0u64, |acc, (_, q)| acc | 1 << q);
    QubitSet::new(tested.n_qubits(), mask).expect("subset of a valid set")
}

fn check_outcome_budget(tested: QubitSet) -> Result<()> {
    limits::check("tested qubits (2^m outcomes)", tested.cardinality(), limits::MAX_OUTCOME_QUBITS)
}

/// Exact outcome distribution of the parallelized SWAP test on `psi ⊗ phi`,
/// testing the qubits in `tested`.
pub fn exact_distribution(
    psi: &Statevector,
    phi: &Statevector,
    tested: QubitSet,
) -> Result<OutcomeDistribution> {
    exact_distribution_impl(psi, phi, tested, false)
}

/// Same as [`exact_distribution`], optionally with the projector signs
/// exchanged. The faulty variant exists so the verification harness can
/// prove it detects a broken kernel.
///
/// The projectors of different pairs commute, and each is diagonal in the
/// basis `{|00>, |11>, (|01> + |10>)/sqrt2}` (`S_k = +1`) plus
/// `(|01> - |10>)/sqrt2` (`S_k = -1`) of its pair. Rotating every tested pair
/// into that basis therefore applies all `2^m` projector chains at once: each
/// rotated amplitude lands in exactly one outcome.
pub(crate) fn exact_distribution_impl(
    psi: &Statevector,
    phi: &Statevector,
    tested: QubitSet,
    flip_sign: bool,
) -> Result<OutcomeDistribution> {
    tested.check_register(psi.n_qubits())?;
    check_outcome_budget(tested)?;
    let joint = JointState::product(psi, phi)?;
    let bits: Vec<(usize, usize)> = tested.qubits().map(|k| joint.pair_bits(k)).collect();
    let mut amplitudes = joint.amplitudes;
    for &pair in &bits {
        rotate_pair(&mut amplitudes, pair);
    }
    let mut probabilities = vec![0.0; 1 << bits.len()];
    for (i, a) in amplitudes.iter().enumerate() {
        let z = bits.iter().fold(0usize, |z, &(bit_a, bit_b)| {
            let antisymmetric = i & (bit_a | bit_b) == bit_a;
            z << 1 | usize::from(antisymmetric ^ flip_sign)
        });
        probabilities[z] += a.norm_sqr();
    }
    for p in probabilities.iter_mut() {
        *p = clamp_probability(*p)?;
    }
    Ok(OutcomeDistribution {
        tested,
        probabilities,
    })
}

/// Maps the `|01>, |10>` amplitudes of one pair to the symmetric combination
/// (kept at the copy-B-set slot) and the antisymmetric one (copy-A-set slot).
fn rotate_pair(amplitudes: &mut [Complex64], (bit_a, bit_b): (usize, usize)) {
    let both = bit_a | bit_b;
    for i in 0..amplitudes.len() {
        if i & both == bit_b {
            let j = i ^ both;
            let (x, y) = (amplitudes[i], amplitudes[j]);
            amplitudes[i] = (x + y) * FRAC_1_SQRT_2;
            amplitudes[j] = (y - x) * FRAC_1_SQRT_2;
        }
    }
}

fn clamp_probability(p: f64) -> Result<f64> {
    if p >= 0.0 {
        Ok(p)
    } else if p >= -NEGATIVE_SLACK {
        Ok(0.0)
    } else {
        Err(Error::Consistency(format!("negative probability {p:e}")))
    }
}

/// `p(z)` for identical copies from reduced purities:
/// `2^-m sum_{x ⊆ tested} (-1)^{|ones(z) ∩ x|} Tr[rho_x^2]`.
pub fn distribution_via_purities(psi: &Statevector, tested: QubitSet, z: usize) -> Result<f64> {
    tested.check_register(psi.n_qubits())?;
    check_outcome_budget(tested)?;
    let m = tested.cardinality();
    if z >> m != 0 {
        return Err(Error::InvalidParameter(format!("outcome {z} wider than {m} bits")));
    }
    if tested.is_empty() {
        return Ok(1.0);
    }
    let ones = ones_of(tested, z).mask();
    let table = purity_table(psi, tested)?;
    let signed: f64 = table
        .iter()
        .map(|(x, p)| if (x & ones).count_ones() % 2 == 0 { p } else { -p })
        .sum();
    clamp_probability(signed / (1u64 << m) as f64)
}

/// The whole identical-copy distribution from one purity table, via a
/// Walsh-Hadamard transform over the tested qubits.
pub fn distribution_via_purities_all(psi: &Statevector, tested: QubitSet) -> Result<OutcomeDistribution> {
    tested.check_register(psi.n_qubits())?;
    check_outcome_budget(tested)?;
    let m = tested.cardinality();
    if m == 0 {
        return Ok(OutcomeDistribution {
            tested,
            probabilities: vec![1.0],
        });
    }
    let table = purity_table(psi, tested)?;
    // Lay purities out on the outcome-index convention, then transform.
    let mut values = vec![0.0; 1 << m];
    for (x, p) in table.iter() {
        let idx = outcome_index(tested, QubitSet::new(tested.n_qubits(), x)?)?;
        values[idx] = p;
    }
    let mut h = 1;
    while h < values.len() {
        for block in values.chunks_mut(2 * h) {
            let (a, b) = block.split_at_mut(h);
            for (x, y) in a.iter_mut().zip(b.iter_mut()) {
                let (s, d) = (*x + *y, *x - *y);
                *x = s;
                *y = d;
            }
        }
        h *= 2;
    }
    let scale = 1.0 / values.len() as f64;
    let probabilities = values
        .into_iter()
        .map(|v| clamp_probability(v * scale))
        .collect::<Result<Vec<_>>>()?;
    Ok(OutcomeDistribution {
        tested,
        probabilities,
    })
}

/// Samples `shots` runs of the test by sequential conditional measurement of
/// the tested controls in ascending label order. Shot `i` draws from its own
/// ChaCha stream (`seed`, stream `i`), so the histogram depends only on the
/// inputs, the seed and the shot count.
pub fn sample(
    psi: &Statevector,
    phi: &Statevector,
    tested: QubitSet,
    shots: u64,
    seed: u64,
) -> Result<ShotHistogram> {
    tested.check_register(psi.n_qubits())?;
    if shots == 0 {
        return Err(Error::InvalidParameter("shots must be at least 1".into()));
    }
    let joint = JointState::product(psi, phi)?;
    let bits: Vec<(usize, usize)> = tested.qubits().map(|k| joint.pair_bits(k)).collect();
    let mut tree = ConditionalTree::new(&joint.amplitudes, &bits);
    let mut counts = BTreeMap::new();
    for shot in 0..shots {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(shot);
        let mut prefix = 0usize;
        for level in 0..bits.len() {
            let n0 = tree.norm(level + 1, prefix << 1);
            let n1 = tree.norm(level + 1, prefix << 1 | 1);
            let total = n0 + n1;
            if !(total > 0.0) {
                return Err(Error::Consistency(format!(
                    "conditional branch with zero weight at level {level}"
                )));
            }
            let u: f64 = rng.gen::<f64>() * total;
            prefix = prefix << 1 | usize::from(u >= n0);
        }
        *counts.entry(prefix).or_insert(0) += 1;
    }
    Ok(ShotHistogram {
        tested,
        shots,
        seed,
        counts,
    })
}

/// Lazily evaluated squared norms of projector-chain prefixes. Vectors of
/// visited nodes are kept so each node costs one projector application.
struct ConditionalTree<'a> {
    root: &'a [Complex64],
    bits: &'a [(usize, usize)],
    nodes: HashMap<(usize, usize), (f64, Option<Vec<Complex64>>)>,
}

impl<'a> ConditionalTree<'a> {
    const MAX_CACHED: usize = 1 << 22;

    fn new(root: &'a [Complex64], bits: &'a [(usize, usize)]) -> Self {
        Self {
            root,
            bits,
            nodes: HashMap::new(),
        }
    }

    fn norm(&mut self, level: usize, prefix: usize) -> f64 {
        if let Some((n, _)) = self.nodes.get(&(level, prefix)) {
            return *n;
        }
        let vector = self.vector(level, prefix);
        let n = vector.iter().map(|a| a.norm_sqr()).sum();
        let keep = level < self.bits.len()
            && self.nodes.len().saturating_mul(self.root.len()) < Self::MAX_CACHED;
        self.nodes.insert((level, prefix), (n, keep.then_some(vector)));
        n
    }

    fn vector(&mut self, level: usize, prefix: usize) -> Vec<Complex64> {
        if level == 0 {
            return self.root.to_vec();
        }
        let parent = match self.nodes.get(&(level - 1, prefix >> 1)) {
            Some((_, Some(v))) => v.clone(),
            _ => self.vector(level - 1, prefix >> 1),
        };
        let mut child = vec![ZERO; parent.len()];
        project_into(&parent, &mut child, self.bits[level - 1], prefix & 1 == 1);
        child
    }
}

/// One branch of the SWAP-test measurement.
#[derive(Clone, Debug, PartialEq)]
pub struct MeasurementOutcome {
    pub probability: f64,
    /// Normalized post-measurement two-copy state.
    pub post_state: JointState,
}

/// Post-measurement state and probability for outcome `z` on `tested`.
pub fn post_measurement(
    psi: &Statevector,
    phi: &Statevector,
    tested: QubitSet,
    z: usize,
) -> Result<MeasurementOutcome> {
    tested.check_register(psi.n_qubits())?;
    let m = tested.cardinality();
    if z >> m != 0 {
        return Err(Error::InvalidParameter(format!("outcome {z} wider than {m} bits")));
    }
    let mut joint = JointState::product(psi, phi)?;
    for (j, k) in tested.qubits().enumerate() {
        let bit = (z >> (m - 1 - j) & 1) as u8;
        joint = joint.apply_controlled_projector(k, bit)?;
    }
    let probability = joint.norm_squared();
    if probability <= 1e-12 {
        return Err(Error::ZeroProbability(probability));
    }
    Ok(MeasurementOutcome {
        probability,
        post_state: joint.scaled(1.0 / probability.sqrt()),
    })
}

/// Reference simulation of the explicit circuit: one ancilla per tested qubit
/// prepared in `|0>`, Hadamard on every ancilla, a Fredkin gate from ancilla
/// `j` onto the `j`-th tested pair, Hadamard again, then the exact ancilla
/// marginal. Register order is ancillas, copy A, copy B.
pub fn full_circuit_oracle(
    psi: &Statevector,
    phi: &Statevector,
    tested: QubitSet,
) -> Result<OutcomeDistribution> {
    if psi.n_qubits() != phi.n_qubits() {
        return Err(Error::DimensionMismatch {
            left: psi.n_qubits(),
            right: phi.n_qubits(),
        });
    }
    tested.check_register(psi.n_qubits())?;
    let n = psi.n_qubits();
    let m = tested.cardinality();
    let total = 2 * n + m;
    limits::check("circuit oracle qubits", total, limits::MAX_CIRCUIT_QUBITS)?;

    let global_bit = |qubit: usize| 1usize << (total - 1 - qubit);
    let mut state = vec![ZERO; 1 << total];
    for (a, &ca) in psi.amplitudes().iter().enumerate() {
        for (b, &cb) in phi.amplitudes().iter().enumerate() {
            state[(a << n) | b] = ca * cb;
        }
    }
    let hadamard = |state: &mut Vec<Complex64>, bit: usize| {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        for i in (0..state.len()).filter(|i| i & bit == 0) {
            let (x, y) = (state[i], state[i | bit]);
            state[i] = (x + y) * h;
            state[i | bit] = (x - y) * h;
        }
    };
    let fredkin = |state: &mut Vec<Complex64>, control: usize, t1: usize, t2: usize| {
        for i in 0..state.len() {
            if i & control != 0 && i & t1 != 0 && i & t2 == 0 {
                state.swap(i, i ^ t1 ^ t2);
            }
        }
    };
    for j in 0..m {
        hadamard(&mut state, global_bit(j));
    }
    for (j, k) in tested.qubits().enumerate() {
        fredkin(&mut state, global_bit(j), global_bit(m + k), global_bit(m + n + k));
    }
    for j in 0..m {
        hadamard(&mut state, global_bit(j));
    }
    let mut probabilities = vec![0.0; 1 << m];
    for (i, a) in state.iter().enumerate() {
        probabilities[i >> (2 * n)] += a.norm_sqr();
    }
    Ok(OutcomeDistribution {
        tested,
        probabilities,
    })
}

/// Full-register mask of the whole `n`-qubit set, for callers testing all qubits.
pub fn all_tested(n_qubits: usize) -> Result<QubitSet> {
    QubitSet::new(n_qubits, low_bits(n_qubits))
}

/// Outcome indices of even Hamming weight.
pub fn even_weight_outcomes(width: usize) -> impl Iterator<Item = usize> {
    (0..1usize << width).filter(|z| z.count_ones() % 2 == 0)
}

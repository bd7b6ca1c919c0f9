//! Concentratable Entanglement and related quantities.
//!
//! `C(s) = 1 - 2^-c(s) sum_{alpha ⊆ s} Tr[rho_alpha^2]` is available through
//! four independent routes: the purity sum, the all-zero probability of a
//! SWAP test restricted to `s`, the even-weight outcome sum of the full test,
//! and shot sampling. Closed forms for GHZ and W states are provided for
//! cross-checking.

use std::io;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::limits;
use crate::oracle::Mat2;
use crate::reductions::{cross_purity_table, purity_table};
use crate::statevector::{QubitSet, Statevector};
use crate::swaptest::{all_tested, exact_distribution, sample};
use num_complex::Complex64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    PuritySum,
    DistributionZeroSet,
    EvenWeightSum,
    Shots,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::PuritySum => "purity_sum",
            Method::DistributionZeroSet => "distribution_zero_set",
            Method::EvenWeightSum => "even_weight_sum",
            Method::Shots => "shots",
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Detail {
    /// Number of summed terms (purities or outcome probabilities).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub terms: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shots: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Binomial standard error of a shot estimate.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stderr: Option<f64>,
}

/// A CE value together with how it was obtained.
#[derive(Clone, Debug, PartialEq)]
pub struct CeResult {
    pub value: f64,
    pub s: QubitSet,
    pub method: Method,
    pub detail: Detail,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CeResultFile {
    value: f64,
    n: usize,
    mask: u64,
    method: Method,
    #[serde(default)]
    detail: Detail,
}

/// One line of the batch CSV.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CeCsvRow {
    pub n: usize,
    pub mask: u64,
    pub cardinality: usize,
    pub method: Method,
    pub value: f64,
    pub stderr: Option<f64>,
}

impl CeResult {
    /// Largest value compatible with the empty-set term, `1 - 2^-c(s)`.
    pub fn upper_bound(&self) -> f64 {
        1.0 - 0.5f64.powi(self.s.cardinality() as i32)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&CeResultFile {
            value: self.value,
            n: self.s.n_qubits(),
            mask: self.s.mask(),
            method: self.method,
            detail: self.detail.clone(),
        })
        .expect("result serialization is infallible")
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let file: CeResultFile = serde_json::from_str(text)?;
        if file.n > 63 {
            return Err(Error::Parse(format!("bad qubit count {}", file.n)));
        }
        let s = QubitSet::nonempty(file.n, file.mask)?;
        let r = CeResult {
            value: file.value,
            s,
            method: file.method,
            detail: file.detail,
        };
        r.check_range()?;
        Ok(r)
    }

    fn check_range(&self) -> Result<()> {
        if !self.value.is_finite() || self.value < -1e-9 || self.value > self.upper_bound() + 1e-9 {
            return Err(Error::Parse(format!(
                "CE value {} outside [0, {}]",
                self.value,
                self.upper_bound()
            )));
        }
        Ok(())
    }

    pub fn csv_row(&self) -> CeCsvRow {
        CeCsvRow {
            n: self.s.n_qubits(),
            mask: self.s.mask(),
            cardinality: self.s.cardinality(),
            method: self.method,
            value: self.value,
            stderr: self.detail.stderr,
        }
    }
}

/// Writes results as CSV with header `n,mask,cardinality,method,value,stderr`.
pub fn write_csv<W: io::Write>(results: &[CeResult], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for r in results {
        w.serialize(r.csv_row())?;
    }
    w.flush().map_err(|e| Error::Parse(e.to_string()))?;
    Ok(())
}

/// Parses the batch CSV back, checking each row for consistency.
pub fn read_csv<R: io::Read>(reader: R) -> Result<Vec<CeResult>> {
    let mut rd = csv::Reader::from_reader(reader);
    let mut out = Vec::new();
    for row in rd.deserialize::<CeCsvRow>() {
        let row = row?;
        if row.n > 63 {
            return Err(Error::Parse(format!("bad qubit count {}", row.n)));
        }
        let s = QubitSet::nonempty(row.n, row.mask)?;
        if s.cardinality() != row.cardinality {
            return Err(Error::Parse(format!(
                "cardinality {} does not match mask {}",
                row.cardinality, row.mask
            )));
        }
        let r = CeResult {
            value: row.value,
            s,
            method: row.method,
            detail: Detail {
                stderr: row.stderr,
                ..Detail::default()
            },
        };
        r.check_range()?;
        out.push(r);
    }
    Ok(out)
}

fn check_subset(psi: &Statevector, s: QubitSet) -> Result<()> {
    s.check_register(psi.n_qubits())?;
    if s.is_empty() {
        return Err(Error::EmptySubset);
    }
    Ok(())
}

/// CE from the purity sum over all subsets of `s`.
pub fn ce_purity(psi: &Statevector, s: QubitSet) -> Result<CeResult> {
    check_subset(psi, s)?;
    let table = purity_table(psi, s)?;
    let terms = table.len() as u64;
    Ok(CeResult {
        value: 1.0 - table.sum() / terms as f64,
        s,
        method: Method::PuritySum,
        detail: Detail {
            terms: Some(terms),
            ..Detail::default()
        },
    })
}

/// CE as `1 - p(0...0)` of a SWAP test run on the qubits of `s` only.
pub fn ce_distribution(psi: &Statevector, s: QubitSet) -> Result<CeResult> {
    check_subset(psi, s)?;
    let d = exact_distribution(psi, psi, s)?;
    Ok(CeResult {
        value: 1.0 - d.get(0),
        s,
        method: Method::DistributionZeroSet,
        detail: Detail {
            terms: Some(1),
            ..Detail::default()
        },
    })
}

/// CE as the sum of full-register outcome probabilities with even weight and
/// at least one 1 inside `s`.
pub fn ce_even_weight(psi: &Statevector, s: QubitSet) -> Result<CeResult> {
    check_subset(psi, s)?;
    let d = exact_distribution(psi, psi, all_tested(psi.n_qubits())?)?;
    // With every qubit tested the outcome index uses the amplitude convention.
    let inside = s.index_mask();
    let terms: Vec<f64> = d
        .probabilities()
        .iter()
        .enumerate()
        .filter(|&(z, _)| z.count_ones() % 2 == 0 && z & inside != 0)
        .map(|(_, &p)| p)
        .collect();
    Ok(CeResult {
        value: terms.iter().sum(),
        s,
        method: Method::EvenWeightSum,
        detail: Detail {
            terms: Some(terms.len() as u64),
            ..Detail::default()
        },
    })
}

/// CE estimated from `shots` sampled SWAP tests on `s`.
pub fn ce_shots(psi: &Statevector, s: QubitSet, shots: u64, seed: u64) -> Result<CeResult> {
    check_subset(psi, s)?;
    if shots < 100 {
        return Err(Error::InvalidParameter(format!("need at least 100 shots, got {shots}")));
    }
    let h = sample(psi, psi, s, shots, seed)?;
    let value = 1.0 - h.count(0) as f64 / shots as f64;
    Ok(CeResult {
        value,
        s,
        method: Method::Shots,
        detail: Detail {
            shots: Some(shots),
            seed: Some(seed),
            stderr: Some((value * (1.0 - value) / shots as f64).sqrt()),
            ..Detail::default()
        },
    })
}

/// Picks the cheaper exact route: the purity sum when `2^c(s) <= 2^(n - c(s))`,
/// otherwise the restricted SWAP-test distribution (falling back to the
/// purity sum if the two-copy state exceeds its budget).
pub fn ce_auto(psi: &Statevector, s: QubitSet) -> Result<CeResult> {
    check_subset(psi, s)?;
    if s.cardinality() <= psi.n_qubits() - s.cardinality() {
        return ce_purity(psi, s);
    }
    match ce_distribution(psi, s) {
        Err(e) if e.is_budget() => ce_purity(psi, s),
        other => other,
    }
}

/// CE of the unequal-input SWAP test,
/// `1 - 2^-c(s) sum_{alpha ⊆ s} Tr[rho_alpha rho'_alpha]`.
pub fn ce_two_state(psi: &Statevector, phi: &Statevector, s: QubitSet) -> Result<f64> {
    check_subset(psi, s)?;
    let table = cross_purity_table(psi, phi, s)?;
    Ok(1.0 - table.sum() / table.len() as f64)
}

/// n-tangle `|<psi| sigma_y^{⊗n} |psi*>|^2`, evaluated from the definition.
pub fn n_tangle(psi: &Statevector) -> Result<f64> {
    let i = Complex64::new(0.0, 1.0);
    let zero = Complex64::new(0.0, 0.0);
    let sigma_y: Mat2 = [[zero, -i], [i, zero]];
    let mut tilde = Statevector::new(psi.amplitudes().iter().map(|a| a.conj()).collect())?;
    for k in 0..psi.n_qubits() {
        tilde = Statevector::new(tilde.apply_single_qubit(k, &sigma_y)?)?;
    }
    Ok(psi.inner_product(&tilde)?.norm_sqr())
}

fn check_cardinality(n: usize, cardinality: usize) -> Result<()> {
    if n == 0 || cardinality == 0 || cardinality > n {
        return Err(Error::InvalidParameter(format!(
            "cardinality {cardinality} not in 1..={n}"
        )));
    }
    Ok(())
}

/// `C_GHZ(s) = (1 - 2^-(c - [c = n])) / 2`.
pub fn ghz_closed_form(n: usize, cardinality: usize) -> Result<f64> {
    check_cardinality(n, cardinality)?;
    let exponent = cardinality - usize::from(cardinality == n);
    Ok(0.5 * (1.0 - 0.5f64.powi(exponent as i32)))
}

/// `C_W(s) = c (2n - c - 1) / (2 n^2)`.
pub fn w_closed_form(n: usize, cardinality: usize) -> Result<f64> {
    check_cardinality(n, cardinality)?;
    let (n, c) = (n as f64, cardinality as f64);
    Ok(c * (2.0 * n - c - 1.0) / (2.0 * n * n))
}

/// Measuring the last qubit of `W_n` in the computational basis.
#[derive(Clone, Debug, PartialEq)]
pub struct WProjection {
    /// `c (2n - c - 3) / (2 (n-1)^2)`, the CE quoted for the zero branch.
    pub quoted_zero_value: f64,
    /// `1 - 1/n^2`, the probability quoted for the zero branch.
    pub quoted_zero_probability: f64,
    /// `1/n^2`, the probability quoted for the one branch.
    pub quoted_one_probability: f64,
    pub simulated_zero_value: f64,
    pub simulated_zero_probability: f64,
    pub simulated_one_value: f64,
    pub simulated_one_probability: f64,
}

/// Quoted and simulated CE after measuring qubit `n-1` of `W_n`, for
/// `s = {0, .., c-1}` among the surviving qubits.
pub fn w_post_projection_ce(n: usize, cardinality: usize) -> Result<WProjection> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("need n >= 2, got {n}")));
    }
    check_cardinality(n - 1, cardinality)?;
    let (nf, c) = (n as f64, cardinality as f64);
    let w = Statevector::w(n)?;
    let s = QubitSet::first(n, cardinality)?;
    let (p0, zero_branch) = w.measure_qubit(n - 1, 0)?;
    let (p1, one_branch) = w.measure_qubit(n - 1, 1)?;
    Ok(WProjection {
        quoted_zero_value: c * (2.0 * nf - c - 3.0) / (2.0 * (nf - 1.0) * (nf - 1.0)),
        quoted_zero_probability: 1.0 - 1.0 / (nf * nf),
        quoted_one_probability: 1.0 / (nf * nf),
        simulated_zero_value: ce_purity(&zero_branch, s)?.value,
        simulated_zero_probability: p0,
        simulated_one_value: ce_purity(&one_branch, s)?.value,
        simulated_one_probability: p1,
    })
}

/// Which cardinality a comparison row uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CardinalityLabel {
    #[serde(rename = "1")]
    One,
    #[serde(rename = "2")]
    Two,
    #[serde(rename = "n/2")]
    Half,
    #[serde(rename = "n-1")]
    AllButOne,
    #[serde(rename = "n")]
    All,
}

impl CardinalityLabel {
    pub const ALL: [CardinalityLabel; 5] = [
        CardinalityLabel::One,
        CardinalityLabel::Two,
        CardinalityLabel::Half,
        CardinalityLabel::AllButOne,
        CardinalityLabel::All,
    ];

    /// Concrete cardinality for an `n`-qubit register (`n/2` rounds down).
    pub fn cardinality(&self, n: usize) -> usize {
        match self {
            CardinalityLabel::One => 1,
            CardinalityLabel::Two => 2,
            CardinalityLabel::Half => n / 2,
            CardinalityLabel::AllButOne => n - 1,
            CardinalityLabel::All => n,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub n: usize,
    pub label: CardinalityLabel,
    pub cardinality: usize,
    pub ghz: f64,
    pub w: f64,
    pub delta: f64,
}

/// `C_GHZ - C_W` from the closed forms for `n = 4..=n_max` and the five
/// tracked cardinalities. Fails if any difference is not strictly positive.
pub fn compare_ghz_w(n_max: usize) -> Result<Vec<ComparisonRow>> {
    if n_max < 4 {
        return Err(Error::InvalidParameter(format!("n_max must be at least 4, got {n_max}")));
    }
    limits::check("comparison qubits", n_max, 1000)?;
    let mut rows = Vec::new();
    for n in 4..=n_max {
        for label in CardinalityLabel::ALL {
            let c = label.cardinality(n);
            let ghz = ghz_closed_form(n, c)?;
            let w = w_closed_form(n, c)?;
            let delta = ghz - w;
            if !(delta > 0.0) {
                return Err(Error::Consistency(format!(
                    "C_GHZ - C_W = {delta} is not positive at n = {n}, c = {c}"
                )));
            }
            rows.push(ComparisonRow {
                n,
                label,
                cardinality: c,
                ghz,
                w,
                delta,
            });
        }
    }
    Ok(rows)
}

pub fn write_comparison_csv<W: io::Write>(rows: &[ComparisonRow], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| Error::Parse(e.to_string()))?;
    Ok(())
}

pub fn read_comparison_csv<R: io::Read>(reader: R) -> Result<Vec<ComparisonRow>> {
    let mut rd = csv::Reader::from_reader(reader);
    let mut out = Vec::new();
    for row in rd.deserialize::<ComparisonRow>() {
        let row = row?;
        if row.n < 2 || row.cardinality == 0 || row.cardinality > row.n || row.label.cardinality(row.n) != row.cardinality {
            return Err(Error::Parse(format!(
                "row n = {} with cardinality {} is inconsistent",
                row.n, row.cardinality
            )));
        }
        out.push(row);
    }
    Ok(out)
}

//! Randomized property suite for the CE routes and the SWAP-test kernel.
//!
//! Every trial derives its own RNG from `base_seed + trial`, so a reported
//! witness seed reproduces the failing case on its own.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::{ce_purity, ce_two_state, n_tangle};
use crate::oracle::{apply_local_kraus, random_local_kraus, random_unitary};
use crate::reductions::{purity_table, subsets_of};
use crate::statevector::{QubitSet, Statevector};
use crate::swaptest::{all_tested, exact_distribution_impl, post_measurement, sample, OutcomeDistribution};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Property {
    RouteAgreement,
    OddZero,
    Biseparable,
    Tangle,
    Singlets,
    LoccMonotone,
    LocalPurity,
    NestedMonotone,
    Subadditivity,
    Continuity,
    ErrorBound,
    LocalUnitary,
}

impl Property {
    pub const ALL: [Property; 12] = [
        Property::RouteAgreement,
        Property::OddZero,
        Property::Biseparable,
        Property::Tangle,
        Property::Singlets,
        Property::LoccMonotone,
        Property::LocalPurity,
        Property::NestedMonotone,
        Property::Subadditivity,
        Property::Continuity,
        Property::ErrorBound,
        Property::LocalUnitary,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Property::RouteAgreement => "route-agreement",
            Property::OddZero => "odd-zero",
            Property::Biseparable => "bi-separable",
            Property::Tangle => "n-tangle",
            Property::Singlets => "singlets",
            Property::LoccMonotone => "locc-monotone",
            Property::LocalPurity => "local-purity",
            Property::NestedMonotone => "nested-monotone",
            Property::Subadditivity => "subadditivity",
            Property::Continuity => "continuity",
            Property::ErrorBound => "error-bound",
            Property::LocalUnitary => "local-unitary",
        }
    }

    /// Largest excess a passing trial may show.
    pub fn tolerance(&self) -> f64 {
        match self {
            Property::RouteAgreement | Property::Tangle | Property::Singlets => 1e-9,
            Property::LoccMonotone | Property::LocalPurity | Property::ErrorBound => 1e-9,
            Property::OddZero | Property::Biseparable => 1e-10,
            Property::NestedMonotone | Property::Subadditivity | Property::Continuity => 1e-10,
            Property::LocalUnitary => 1e-10,
        }
    }
}

impl fmt::Display for Property {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Property {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Property::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = Property::ALL.iter().map(|p| p.name()).collect();
                Error::InvalidParameter(format!("unknown property {s:?}; expected one of {}", names.join(", ")))
            })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct VerifyConfig {
    pub trials: usize,
    /// Largest register drawn by properties that vary `n`.
    pub max_qubits: usize,
    pub base_seed: u64,
    pub epsilons: Vec<f64>,
    /// Empty selects every property.
    pub properties: Vec<Property>,
    /// Runs the distribution kernel with exchanged projector signs.
    pub inject_fault: bool,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            trials: 200,
            max_qubits: 6,
            base_seed: 0,
            epsilons: vec![0.1, 1e-3, 1e-4],
            properties: Vec::new(),
            inject_fault: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PropertyReport {
    pub name: String,
    pub trials: usize,
    pub tolerance: f64,
    /// Largest excess over all trials (0 when every inequality had slack).
    pub max_violation: f64,
    pub violations: usize,
    pub passed: bool,
    /// Seed of the first failing trial.
    pub witness_seed: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyReport {
    pub properties: Vec<PropertyReport>,
    pub passed: bool,
}

impl VerifyReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization is infallible")
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let r: VerifyReport = serde_json::from_str(text)?;
        if r.passed != r.properties.iter().all(|p| p.passed) {
            return Err(Error::Parse("overall verdict disagrees with property verdicts".into()));
        }
        Ok(r)
    }

    pub fn failures(&self) -> impl Iterator<Item = &PropertyReport> {
        self.properties.iter().filter(|p| !p.passed)
    }
}

struct Trial {
    excess: f64,
    violated: bool,
}

impl Trial {
    fn within(excess: f64, tolerance: f64) -> Self {
        Trial {
            excess,
            violated: !(excess <= tolerance),
        }
    }
}

/// Runs the selected properties.
pub fn run(config: &VerifyConfig) -> Result<VerifyReport> {
    if config.trials == 0 {
        return Err(Error::InvalidParameter("trials must be at least 1".into()));
    }
    if config.max_qubits < 2 || config.max_qubits > 8 {
        return Err(Error::InvalidParameter(format!(
            "max qubits must be in 2..=8, got {}",
            config.max_qubits
        )));
    }
    if config.epsilons.is_empty() || config.epsilons.iter().any(|e| !(*e > 0.0 && *e <= 1.0)) {
        return Err(Error::InvalidParameter("epsilons must lie in (0, 1]".into()));
    }
    let selected: Vec<Property> = if config.properties.is_empty() {
        Property::ALL.to_vec()
    } else {
        let mut p = config.properties.clone();
        p.sort();
        p.dedup();
        p
    };
    let mut reports = Vec::new();
    for property in selected {
        reports.push(run_property(property, config)?);
    }
    let passed = reports.iter().all(|r| r.passed);
    Ok(VerifyReport {
        properties: reports,
        passed,
    })
}

fn run_property(property: Property, config: &VerifyConfig) -> Result<PropertyReport> {
    let trials: Vec<Trial> = (0..config.trials)
        .into_par_iter()
        .map(|t| {
            let seed = config.base_seed.wrapping_add(t as u64);
            run_trial(property, config, seed)
        })
        .collect::<Result<_>>()?;
    let max_violation = trials.iter().map(|t| t.excess).fold(0.0, f64::max);
    let witness = trials.iter().position(|t| t.violated);
    let violations = trials.iter().filter(|t| t.violated).count();
    Ok(PropertyReport {
        name: property.name().to_string(),
        trials: config.trials,
        tolerance: property.tolerance(),
        max_violation,
        violations,
        passed: violations == 0,
        witness_seed: witness.map(|t| config.base_seed.wrapping_add(t as u64)),
    })
}

fn random_subset<R: Rng>(rng: &mut R, n: usize) -> QubitSet {
    let mask = rng.gen_range(1..1u64 << n);
    QubitSet::new(n, mask).expect("mask within register")
}

fn haar<R: Rng>(rng: &mut R, n: usize) -> Result<Statevector> {
    Statevector::haar_random_with(n, rng)
}

fn ce(psi: &Statevector, s: QubitSet) -> Result<f64> {
    Ok(ce_purity(psi, s)?.value)
}

/// CE of every nonempty subset, indexed by mask.
fn ce_all(psi: &Statevector) -> Result<Vec<f64>> {
    let n = psi.n_qubits();
    let table = purity_table(psi, QubitSet::full(n)?)?;
    let mut out = vec![0.0; 1 << n];
    for (mask, slot) in out.iter_mut().enumerate().skip(1) {
        let s = QubitSet::new(n, mask as u64)?;
        let sum: f64 = subsets_of(s).map(|a| table.get(a.mask()).expect("subset in table")).sum();
        *slot = 1.0 - sum / (1u64 << s.cardinality()) as f64;
    }
    Ok(out)
}

fn run_trial(property: Property, config: &VerifyConfig, seed: u64) -> Result<Trial> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tol = property.tolerance();
    let max_n = config.max_qubits;
    let distribution = |psi: &Statevector, tested: QubitSet| -> Result<OutcomeDistribution> {
        exact_distribution_impl(psi, psi, tested, config.inject_fault)
    };
    match property {
        Property::RouteAgreement => {
            let n = rng.gen_range(2..=max_n);
            let psi = haar(&mut rng, n)?;
            let s = random_subset(&mut rng, n);
            let p = ce(&psi, s)?;
            let zero_set = 1.0 - distribution(&psi, s)?.get(0);
            let full = distribution(&psi, all_tested(n)?)?;
            let inside = s.index_mask();
            let even: f64 = full
                .probabilities()
                .iter()
                .enumerate()
                .filter(|&(z, _)| z.count_ones() % 2 == 0 && z & inside != 0)
                .map(|(_, &p)| p)
                .sum();
            Ok(Trial::within((p - zero_set).abs().max((p - even).abs()), tol))
        }
        Property::OddZero => {
            let n = rng.gen_range(1..=max_n);
            let psi = haar(&mut rng, n)?;
            Ok(Trial::within(distribution(&psi, all_tested(n)?)?.max_odd_weight(), tol))
        }
        Property::Biseparable => {
            let n = rng.gen_range(2..=max_n);
            let cut = rng.gen_range(1..n);
            let psi = haar(&mut rng, cut)?.tensor(&haar(&mut rng, n - cut)?);
            let d = distribution(&psi, all_tested(n)?)?;
            let mut worst: f64 = 0.0;
            for a in 0..cut {
                for b in cut..n {
                    let z = (1usize << (n - 1 - a)) | (1usize << (n - 1 - b));
                    worst = worst.max(d.get(z));
                }
            }
            Ok(Trial::within(worst, tol))
        }
        Property::Tangle => {
            let n = 2 * rng.gen_range(1..=max_n / 2);
            let psi = haar(&mut rng, n)?;
            let d = distribution(&psi, all_tested(n)?)?;
            let from_test = (1u64 << n) as f64 * d.get((1 << n) - 1);
            Ok(Trial::within((from_test - n_tangle(&psi)?).abs(), tol))
        }
        Property::Singlets => {
            let n = rng.gen_range(1..=max_n.min(4));
            let psi = haar(&mut rng, n)?;
            let tested = all_tested(n)?;
            let shot = sample(&psi, &psi, tested, 1, rng.gen())?;
            let (z, _) = shot.counts().next().expect("one shot recorded");
            let post = post_measurement(&psi, &psi, tested, z)?;
            let mut worst: f64 = 0.0;
            for k in (0..n).filter(|k| z >> (n - 1 - k) & 1 == 1) {
                worst = worst.max(1.0 - post.post_state.singlet_fidelity(k)?);
            }
            Ok(Trial::within(worst, tol))
        }
        Property::LoccMonotone | Property::LocalPurity => {
            let n = rng.gen_range(2..=max_n.min(5));
            let psi = haar(&mut rng, n)?;
            let qubit = rng.gen_range(0..n);
            let branches = apply_local_kraus(&psi, &random_local_kraus(rng.gen(), qubit))?;
            let full = QubitSet::full(n)?;
            let mut worst: f64 = 0.0;
            if property == Property::LoccMonotone {
                let before = ce_all(&psi)?;
                let mut after = vec![0.0; before.len()];
                for b in &branches {
                    for (acc, c) in after.iter_mut().zip(ce_all(&b.state)?) {
                        *acc += b.probability * c;
                    }
                }
                for mask in 1..before.len() {
                    worst = worst.max(after[mask] - before[mask]);
                }
            } else {
                let before = purity_table(&psi, full)?;
                let tables: Vec<_> = branches
                    .iter()
                    .map(|b| purity_table(&b.state, full))
                    .collect::<Result<_>>()?;
                for (alpha, p) in before.iter() {
                    let avg: f64 = branches
                        .iter()
                        .zip(&tables)
                        .map(|(b, t)| b.probability * t.get(alpha).expect("same subsets"))
                        .sum();
                    worst = worst.max(p - avg);
                }
            }
            Ok(Trial::within(worst, tol))
        }
        Property::NestedMonotone => {
            let n = rng.gen_range(1..=max_n);
            let psi = haar(&mut rng, n)?;
            let s = random_subset(&mut rng, n);
            let qubits: Vec<usize> = s.qubits().collect();
            let keep = rng.gen_range(1..=qubits.len());
            let inner: Vec<usize> = qubits.choose_multiple(&mut rng, keep).copied().collect();
            let inner = QubitSet::from_qubits(n, &inner)?;
            Ok(Trial::within((ce(&psi, inner)? - ce(&psi, s)?).max(0.0), tol))
        }
        Property::Subadditivity => {
            let n = rng.gen_range(2..=max_n);
            let psi = haar(&mut rng, n)?;
            let mut qubits: Vec<usize> = (0..n).collect();
            qubits.shuffle(&mut rng);
            let split = rng.gen_range(1..n);
            let end = rng.gen_range(split + 1..=n);
            let s = QubitSet::from_qubits(n, &qubits[..split])?;
            let t = QubitSet::from_qubits(n, &qubits[split..end])?;
            let (cs, ct, cu) = (ce(&psi, s)?, ce(&psi, t)?, ce(&psi, s.union(&t))?);
            let excess = (cu - cs - ct).max(cs.max(ct) - cu).max(0.0);
            Ok(Trial::within(excess, tol))
        }
        Property::Continuity => {
            let n = rng.gen_range(1..=max_n);
            let psi = haar(&mut rng, n)?;
            let phi = if rng.gen_bool(0.5) {
                haar(&mut rng, n)?
            } else {
                let eps = *config.epsilons.choose(&mut rng).expect("nonempty");
                psi.perturb(eps)?
            };
            // ||psi psi^† - phi phi^†||_1 = 2 D for pure states
            let bound = 4.0 * psi.trace_distance(&phi)?;
            let (a, b) = (ce_all(&psi)?, ce_all(&phi)?);
            let excess = a.iter().zip(&b).skip(1).map(|(x, y)| (x - y).abs() - bound).fold(0.0, f64::max);
            Ok(Trial::within(excess, tol))
        }
        Property::ErrorBound => {
            let n = 3.min(max_n);
            let psi = haar(&mut rng, n)?;
            let mut excess: f64 = 0.0;
            let mut violated = false;
            for &eps in &config.epsilons {
                let phi = psi.perturb(eps)?;
                let (a, b) = (ce_all(&psi)?, ce_all(&phi)?);
                let limit = 4.0 * eps * eps;
                for mask in 1..1u64 << n {
                    let s = QubitSet::new(n, mask)?;
                    let cross = ce_two_state(&psi, &phi, s)?;
                    let gap = (cross - a[mask as usize]) + (cross - b[mask as usize]);
                    excess = excess.max(-gap).max(gap - limit);
                    violated |= gap < -tol || gap >= limit;
                }
            }
            Ok(Trial { excess, violated })
        }
        Property::LocalUnitary => {
            let n = rng.gen_range(1..=max_n);
            let psi = haar(&mut rng, n)?;
            let qubit = rng.gen_range(0..n);
            let rotated = Statevector::normalized(psi.apply_single_qubit(qubit, &random_unitary(rng.gen()))?)?;
            let (a, b) = (ce_all(&psi)?, ce_all(&rotated)?);
            let excess = a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
            Ok(Trial::within(excess, tol))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick(properties: Vec<Property>, inject_fault: bool) -> VerifyReport {
        run(&VerifyConfig {
            trials: 20,
            max_qubits: 5,
            properties,
            inject_fault,
            ..VerifyConfig::default()
        })
        .unwrap()
    }

    #[test]
    fn every_property_passes() {
        let report = quick(Vec::new(), false);
        for p in &report.properties {
            assert!(p.passed, "{p:?}");
            assert!(p.witness_seed.is_none());
        }
        assert!(report.passed);
        assert_eq!(report.properties.len(), Property::ALL.len());
    }

    #[test]
    fn injected_fault_is_caught() {
        let report = quick(vec![Property::RouteAgreement, Property::OddZero], true);
        assert!(!report.passed);
        for p in &report.properties {
            assert!(!p.passed, "{} missed the fault", p.name);
            assert!(p.witness_seed.is_some());
        }
    }

    #[test]
    fn witness_reproduces() {
        let report = quick(vec![Property::RouteAgreement], true);
        let seed = report.properties[0].witness_seed.unwrap();
        let config = VerifyConfig {
            inject_fault: true,
            max_qubits: 5,
            ..VerifyConfig::default()
        };
        assert!(run_trial(Property::RouteAgreement, &config, seed).unwrap().violated);
    }

    #[test]
    fn names_round_trip() {
        for p in Property::ALL {
            assert_eq!(p.name().parse::<Property>().unwrap(), p);
        }
        assert!("nope".parse::<Property>().is_err());
    }

    #[test]
    fn report_json() {
        let report = quick(vec![Property::Tangle], false);
        assert_eq!(VerifyReport::from_json_str(&report.to_json()).unwrap(), report);
        let mut bad = report.clone();
        bad.passed = false;
        assert!(VerifyReport::from_json_str(&bad.to_json()).is_err());
    }

    #[test]
    fn config_validation() {
        let bad = VerifyConfig {
            trials: 0,
            ..VerifyConfig::default()
        };
        assert!(run(&bad).is_err());
        let bad = VerifyConfig {
            epsilons: vec![0.0],
            ..VerifyConfig::default()
        };
        assert!(run(&bad).is_err());
    }
}

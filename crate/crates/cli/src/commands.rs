use std::fmt::Write as _;

use concentratable::limits;
use concentratable::measures::{self, CeResult};
use concentratable::statevector::parse_mask;
use concentratable::swaptest::{self, all_tested, bitstring, parse_bitstring};
use concentratable::verify::{self, Property, VerifyConfig};
use concentratable::{Error, QubitSet, Statevector};
use serde_json::json;

use crate::output::{emit, json_line};
use crate::{CeArgs, CompareArgs, DistArgs, DistillArgs, Format, MethodArg, SampleArgs, StateArgs, SubsetArgs, VerifyArgs};

pub const EXIT_VIOLATION: u8 = 1;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_BUDGET: u8 = 3;

/// Largest register swept by `--all-subsets`.
const MAX_ALL_SUBSETS_QUBITS: usize = 12;

const SINGLET_TOLERANCE: f64 = 1e-9;

#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }

    fn violation(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_VIOLATION,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure {
            code: if e.is_budget() { EXIT_BUDGET } else { EXIT_USAGE },
            message: e.to_string(),
        }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::usage(format!("{e:#}"))
    }
}

type Outcome = Result<(), Failure>;

/// Reads `CE_MAX_QUBITS` into the two-copy budget.
pub fn apply_env() -> Outcome {
    let Ok(value) = std::env::var("CE_MAX_QUBITS") else {
        return Ok(());
    };
    let n: usize = value
        .trim()
        .parse()
        .map_err(|_| Failure::usage(format!("CE_MAX_QUBITS must be a positive integer, got {value:?}")))?;
    if n == 0 {
        return Err(Failure::usage("CE_MAX_QUBITS must be at least 1"));
    }
    limits::set_max_joint_qubits(n);
    Ok(())
}

fn load_state(state: &StateArgs, haar_seed: u64) -> Result<Statevector, Failure> {
    let psi = if let Some(n) = state.ghz {
        Statevector::ghz(n)?
    } else if let Some(n) = state.w {
        Statevector::w(n)?
    } else if let Some(n) = state.haar {
        Statevector::haar_random(n, haar_seed)?
    } else if let Some(path) = &state.file {
        let bytes = std::fs::read(path).map_err(|e| Failure::usage(format!("reading {}: {e}", path.display())))?;
        Statevector::from_json_slice(&bytes).map_err(|e| Failure {
            message: format!("{}: {e}", path.display()),
            ..Failure::from(e)
        })?
    } else {
        return Err(Failure::usage("no state source given"));
    };
    Ok(psi)
}

fn tested_set(mask: Option<&str>, n: usize) -> Result<QubitSet, Failure> {
    match mask {
        Some(text) => Ok(QubitSet::nonempty(n, parse_mask(text)?)?),
        None => Ok(all_tested(n)?),
    }
}

fn subsets(args: &SubsetArgs, n: usize) -> Result<Vec<QubitSet>, Failure> {
    if let Some(text) = &args.subset_mask {
        return Ok(vec![QubitSet::nonempty(n, parse_mask(text)?)?]);
    }
    if let Some(c) = args.cardinality {
        if c == 0 || c > n {
            return Err(Failure::usage(format!("cardinality {c} not in 1..={n}")));
        }
        return Ok(vec![QubitSet::first(n, c)?]);
    }
    if args.all_cardinalities {
        return (1..=n).map(|c| QubitSet::first(n, c).map_err(Failure::from)).collect();
    }
    if args.all_subsets {
        if n > MAX_ALL_SUBSETS_QUBITS {
            return Err(Error::Budget {
                what: "qubits for an exhaustive subset sweep",
                requested: n as u64,
                limit: MAX_ALL_SUBSETS_QUBITS as u64,
            }
            .into());
        }
        return (1..1u64 << n).map(|m| QubitSet::new(n, m).map_err(Failure::from)).collect();
    }
    Ok(vec![QubitSet::full(n)?])
}

pub fn ce(args: CeArgs) -> Outcome {
    let psi = load_state(&args.state, args.haar_seed)?;
    let sets = subsets(&args.subset, psi.n_qubits())?;
    let method = match (args.method, args.shots) {
        (MethodArg::Auto | MethodArg::Shots, Some(_)) => MethodArg::Shots,
        (MethodArg::Shots, None) => return Err(Failure::usage("--method shots needs --shots and --seed")),
        (m, Some(_)) => return Err(Failure::usage(format!("--shots conflicts with --method {m:?}"))),
        (m, None) => m,
    };
    let results: Vec<CeResult> = sets
        .into_iter()
        .map(|s| match method {
            MethodArg::Auto => measures::ce_auto(&psi, s),
            MethodArg::Purity => measures::ce_purity(&psi, s),
            MethodArg::Distribution => measures::ce_distribution(&psi, s),
            MethodArg::EvenWeight => measures::ce_even_weight(&psi, s),
            MethodArg::Shots => measures::ce_shots(
                &psi,
                s,
                args.shots.expect("shots checked above"),
                args.seed.expect("clap requires --seed with --shots"),
            ),
        })
        .collect::<Result<_, _>>()?;
    let bytes = match args.format {
        Format::Csv => {
            let mut buf = Vec::new();
            measures::write_csv(&results, &mut buf)?;
            buf
        }
        Format::Json if results.len() == 1 => json_line(results[0].to_json()),
        Format::Json => {
            let items: Vec<String> = results.iter().map(CeResult::to_json).collect();
            json_line(format!("[{}]", items.join(",")))
        }
    };
    emit(args.output.as_deref(), &bytes)?;
    Ok(())
}

pub fn dist(args: DistArgs) -> Outcome {
    let psi = load_state(&args.state, args.haar_seed)?;
    let tested = tested_set(args.subset_mask.as_deref(), psi.n_qubits())?;
    if args.check_odd_zero && tested.cardinality() != psi.n_qubits() {
        return Err(Failure::usage("--check-odd-zero needs every qubit tested"));
    }
    let d = swaptest::exact_distribution(&psi, &psi, tested)?;
    let mut file = d.to_file();
    if args.nonzero {
        file.entries.retain(|e| e.p_or_count > 0.0);
    }
    let bytes = match args.format {
        Format::Json => json_line(serde_json::to_string(&file).map_err(anyhow::Error::from)?),
        Format::Csv => {
            let mut text = String::from("z,p\n");
            for e in &file.entries {
                writeln!(text, "{},{}", e.z, e.p_or_count).expect("writing to a String");
            }
            text.into_bytes()
        }
    };
    emit(args.output.as_deref(), &bytes)?;
    if args.check_odd_zero {
        let worst = d.max_odd_weight();
        if worst > 1e-10 {
            return Err(Failure::violation(format!("odd-weight outcome has probability {worst:e}")));
        }
    }
    Ok(())
}

pub fn sample(args: SampleArgs) -> Outcome {
    let psi = load_state(&args.state, args.haar_seed)?;
    let tested = tested_set(args.subset_mask.as_deref(), psi.n_qubits())?;
    let h = swaptest::sample(&psi, &psi, tested, args.shots, args.seed)?;
    let value = 1.0 - h.frequency(0);
    let stderr = (value * (1.0 - value) / args.shots as f64).sqrt();
    let bytes = match args.format {
        Format::Json => {
            let report = json!({
                "n": psi.n_qubits(),
                "mask": tested.mask(),
                "shots": args.shots,
                "seed": args.seed,
                "value": value,
                "stderr": stderr,
                "histogram": h.to_file(),
            });
            json_line(report.to_string())
        }
        Format::Csv => {
            let mut text = String::from("z,count\n");
            for (z, c) in h.counts() {
                writeln!(text, "{},{c}", bitstring(z, h.width())).expect("writing to a String");
            }
            text.into_bytes()
        }
    };
    emit(args.output.as_deref(), &bytes)?;
    Ok(())
}

pub fn verify(args: VerifyArgs) -> Outcome {
    let properties = args
        .properties
        .iter()
        .map(|p| p.parse::<Property>())
        .collect::<Result<Vec<_>, _>>()?;
    let mut config = VerifyConfig {
        trials: args.trials,
        max_qubits: args.max_qubits,
        base_seed: args.seed,
        properties,
        inject_fault: args.inject_fault,
        ..VerifyConfig::default()
    };
    if !args.epsilons.is_empty() {
        config.epsilons = args.epsilons;
    }
    let report = verify::run(&config)?;
    emit(args.output.as_deref(), &json_line(report.to_json()))?;
    let failures: Vec<String> = report
        .failures()
        .map(|p| {
            format!(
                "property {} violated in {} of {} trials (max violation {:e}, witness seed {})",
                p.name,
                p.violations,
                p.trials,
                p.max_violation,
                p.witness_seed.map_or_else(|| "none".to_string(), |s| s.to_string()),
            )
        })
        .collect();
    if failures.is_empty() {
        Ok(())
    } else {
        Err(Failure::violation(failures.join("\nerror: ")))
    }
}

pub fn compare(args: CompareArgs) -> Outcome {
    let rows = measures::compare_ghz_w(args.n_max).map_err(|e| match e {
        Error::Consistency(m) => Failure::violation(m),
        other => other.into(),
    })?;
    let bytes = match args.format {
        Format::Csv => {
            let mut buf = Vec::new();
            measures::write_comparison_csv(&rows, &mut buf)?;
            buf
        }
        Format::Json => json_line(serde_json::to_string(&rows).map_err(anyhow::Error::from)?),
    };
    emit(args.output.as_deref(), &bytes)?;
    Ok(())
}

pub fn distill(args: DistillArgs) -> Outcome {
    let psi = load_state(&args.state, args.haar_seed)?;
    let n = psi.n_qubits();
    let tested = tested_set(args.subset_mask.as_deref(), n)?;
    let width = tested.cardinality();
    if args.runs == 0 {
        return Err(Failure::usage("--runs must be at least 1"));
    }
    let forced = args
        .outcome
        .as_deref()
        .map(|text| parse_bitstring(text, width))
        .transpose()?;
    let qubits: Vec<usize> = tested.qubits().collect();
    let mut runs = Vec::new();
    let mut all_verified = true;
    for run in 0..args.runs {
        let z = match forced {
            Some(z) => z,
            None => {
                let h = swaptest::sample(&psi, &psi, tested, 1, args.seed.wrapping_add(run))?;
                let z = h.counts().next().expect("one shot recorded").0;
                z
            }
        };
        let post = swaptest::post_measurement(&psi, &psi, tested, z)?;
        let mut fidelities = Vec::new();
        let mut verified = true;
        for (j, &k) in qubits.iter().enumerate() {
            if z >> (width - 1 - j) & 1 == 1 {
                let f = post.post_state.singlet_fidelity(k)?;
                verified &= f >= 1.0 - SINGLET_TOLERANCE;
                fidelities.push(json!({ "qubit": k, "fidelity": f }));
            }
        }
        all_verified &= verified;
        runs.push(json!({
            "run": run,
            "z": bitstring(z, width),
            "probability": post.probability,
            "bell_pairs": fidelities.len(),
            "fidelities": fidelities,
            "verified": verified,
        }));
    }
    let report = json!({
        "n": n,
        "mask": tested.mask(),
        "seed": args.seed,
        "runs": runs,
        "verified": all_verified,
    });
    emit(args.output.as_deref(), &json_line(report.to_string()))?;
    if all_verified {
        Ok(())
    } else {
        Err(Failure::violation("a flagged pair fell short of singlet fidelity"))
    }
}

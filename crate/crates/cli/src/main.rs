use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use framelab::fusion::{self, FusionSequence};
use framelab::io::{self, FrameInput};
use framelab::perturb;
use framelab::reproduce;
use framelab::sweep::{self, SuiteConfig};
use framelab::{DualParam, FrameError, Matrix, OvSequence, Tolerance};

#[derive(Parser)]
#[command(name = "framelab", version, about = "Operator-valued frames and fusion frames: duals and perturbation bounds")]
struct Cli {
    /// Relative singular-value cutoff for numerical rank.
    #[arg(long, global = true, default_value_t = Tolerance::default().rank)]
    tol_rank: f64,
    /// Absolute tolerance for equality checks.
    #[arg(long, global = true, default_value_t = Tolerance::default().eq)]
    tol_eq: f64,
    #[arg(long, global = true, env = "FRAMELAB_SEED", default_value_t = 42)]
    seed: u64,
    /// Trial count for sweeps; each suite has its own default.
    #[arg(long, global = true)]
    trials: Option<usize>,
    /// Write JSON here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Frame bounds and flags of an operator-valued or fusion sequence.
    Analyze { path: PathBuf },
    /// Canonical dual, or the dual with parameter L.
    Dual {
        path: PathBuf,
        #[arg(long = "L", value_name = "PATH", conflicts_with = "canonical")]
        l: Option<PathBuf>,
        #[arg(long)]
        canonical: bool,
    },
    /// Perturbation bounds for a pair of sequences.
    Perturb {
        a: PathBuf,
        b: PathBuf,
        #[arg(long = "L", value_name = "PATH")]
        l: Option<PathBuf>,
    },
    /// Canonical or alternate fusion frame dual with its witness.
    FusionDual {
        path: PathBuf,
        #[arg(long = "L", value_name = "PATH", conflicts_with = "canonical")]
        l: Option<PathBuf>,
        #[arg(long)]
        canonical: bool,
    },
    /// Stability of the canonical fusion frame dual.
    FusionPerturb { w: PathBuf, v: PathBuf },
    /// Runs a worked example against its quoted values.
    Reproduce { name: Example },
    /// Randomized property suites.
    Sweep {
        /// Suite name, or `all`.
        #[arg(long, default_value = "all")]
        suite: String,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Example {
    Mercedes,
    GavrutaCounterexample,
    Decomposition,
}

impl Example {
    fn name(self) -> &'static str {
        match self {
            Example::Mercedes => "mercedes",
            Example::GavrutaCounterexample => "gavruta-counterexample",
            Example::Decomposition => "decomposition",
        }
    }
}

enum Failure {
    Frame(FrameError),
    Usage(String),
    Checks(Value, String),
}

impl From<FrameError> for Failure {
    fn from(e: FrameError) -> Self {
        Failure::Frame(e)
    }
}

fn exit_code(e: &FrameError) -> u8 {
    match e {
        FrameError::Parse(_) | FrameError::InvalidInput(_) => 2,
        FrameError::InvalidDualParam(_) => 4,
        _ => 3,
    }
}

type Outcome = Result<(Value, String), Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn load_frame(path: &Path, tol: &Tolerance) -> Result<FrameInput, Failure> {
    Ok(io::frame_from_json(&read(path)?, tol)?)
}

fn load_matrix(path: &Path) -> Result<Matrix, Failure> {
    Ok(io::matrix_from_json(&read(path)?)?)
}

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("serializable")
}

fn analyze(path: &Path, tol: &Tolerance) -> Outcome {
    let report = match load_frame(path, tol)? {
        FrameInput::Ov(a) => a.classify(tol),
        FrameInput::Fusion(w) => w.classify(tol),
    };
    let summary = format!(
        "frame bounds [{:e}, {:e}], dim H_A = {}, frame: {}",
        report.lower_bound, report.bessel_bound, report.h_a_dim, report.is_frame
    );
    Ok((to_value(&report), summary))
}

fn ov_dual(a: &OvSequence, l: Option<&Path>, tol: &Tolerance) -> Outcome {
    let dual = match l {
        Some(p) => a.make_dual(&DualParam::new(a, load_matrix(p)?, tol)?, tol)?,
        None => a.canonical_dual(tol)?,
    };
    let check = a.dual_check(&dual, tol)?;
    let summary = format!("dual computed, is_dual = {}", check.is_dual);
    Ok((json!({ "dual": io::ov_to_value(&dual), "is_dual": check.is_dual, "check": to_value(&check) }), summary))
}

fn fusion_dual(w: &FusionSequence, l: Option<&Path>, tol: &Tolerance) -> Outcome {
    let (v, q) = match l {
        Some(p) => fusion::alternate_ffdual(w, &load_matrix(p)?, tol)?,
        None => fusion::canonical_ffdual_with_witness(w, tol)?,
    };
    let check = fusion::ffdual_verify(&v, w, &q, tol)?;
    let summary = format!("fusion frame dual computed, ffdual_verify = {}", check.is_dual);
    Ok((
        json!({
            "dual": io::fusion_to_value(&v),
            "Q": io::witness_to_value(&q)["Q"],
            "ffdual_verify": to_value(&check),
        }),
        summary,
    ))
}

fn dual(path: &Path, l: Option<&Path>, tol: &Tolerance) -> Outcome {
    match load_frame(path, tol)? {
        FrameInput::Ov(a) => ov_dual(&a, l, tol),
        FrameInput::Fusion(w) => fusion_dual(&w, l, tol),
    }
}

fn require_fusion(path: &Path, tol: &Tolerance) -> Result<FusionSequence, Failure> {
    match load_frame(path, tol)? {
        FrameInput::Fusion(w) => Ok(w),
        FrameInput::Ov(_) => Err(Failure::Usage(format!("{}: expected a fusion sequence", path.display()))),
    }
}

/// Collects violated inequalities and unmet hypotheses separately.
#[derive(Default)]
struct Verdict {
    violations: Vec<String>,
    not_applicable: Vec<String>,
}

impl Verdict {
    fn absorb<T>(&mut self, r: framelab::Result<T>) -> Result<Option<T>, Failure> {
        match r {
            Ok(v) => Ok(Some(v)),
            Err(FrameError::NotApplicable(m)) => {
                self.not_applicable.push(m);
                Ok(None)
            }
            Err(e) => Err(e.into()),
        }
    }

    fn finish(self, mut body: Value) -> Outcome {
        let status = if !self.violations.is_empty() {
            "violation"
        } else if !self.not_applicable.is_empty() {
            "not_applicable"
        } else {
            "ok"
        };
        body["status"] = json!(status);
        body["violations"] = json!(self.violations);
        body["not_applicable"] = json!(self.not_applicable);
        let summary = match status {
            "violation" => format!("inequalities violated: {}", self.violations.join("; ")),
            "not_applicable" => format!("hypotheses not met: {}", self.not_applicable.join("; ")),
            _ => "all inequalities hold".to_string(),
        };
        if status == "violation" {
            Err(Failure::Checks(body, summary))
        } else {
            Ok((body, summary))
        }
    }
}

fn ov_perturb(a: &OvSequence, b: &OvSequence, l: Option<&Path>, tol: &Tolerance) -> Outcome {
    let mut verdict = Verdict::default();
    let report = perturb::perturbation_report(a, b, tol)?;
    for c in report.checks.iter().filter(|c| !c.holds) {
        verdict.violations.push(c.name.clone());
    }
    if !report.applicable {
        verdict.not_applicable.push("mu < sqrt(alpha) and Delta(H_A, H_B) < 1 required".into());
    }
    let canonical = verdict.absorb(perturb::canonical_dual_deviation(a, b, tol))?;
    if canonical.as_ref().is_some_and(|r| !r.holds) {
        verdict.violations.push("canonical dual deviation".into());
    }
    let param = match l {
        Some(p) => DualParam::new(a, load_matrix(p)?, tol)?,
        None => DualParam::zero(a),
    };
    let stable = verdict.absorb(perturb::stable_dual(a, b, &param, tol))?;
    let mut stable_value = Value::Null;
    if let Some((dual, r)) = &stable {
        if !r.holds {
            verdict.violations.push("stable dual deviation".into());
        }
        if !b.is_dual(dual, tol)? {
            verdict.violations.push("stable dual is not a dual of B".into());
        }
        stable_value = json!({ "dual": io::ov_to_value(dual), "deviation": to_value(r) });
    }
    verdict.finish(json!({
        "perturbation": to_value(&report),
        "canonical_dual_deviation": canonical.map(|r| to_value(&r)),
        "stable_dual": stable_value,
    }))
}

fn fusion_perturb(w: &FusionSequence, v: &FusionSequence, tol: &Tolerance) -> Outcome {
    let mut verdict = Verdict::default();
    let report = verdict.absorb(perturb::fusion_stability(w, v, tol))?;
    if let Some(r) = &report {
        if !r.holds {
            verdict.violations.push("||T_W~ - T_V~|| <= C mu".into());
        }
    }
    verdict.finish(json!({ "fusion_stability": report.map(|r| to_value(&r)) }))
}

fn perturb_cmd(a: &Path, b: &Path, l: Option<&Path>, tol: &Tolerance) -> Outcome {
    match (load_frame(a, tol)?, load_frame(b, tol)?) {
        (FrameInput::Ov(a), FrameInput::Ov(b)) => ov_perturb(&a, &b, l, tol),
        (FrameInput::Fusion(w), FrameInput::Fusion(v)) => fusion_perturb(&w, &v, tol),
        _ => Err(Failure::Usage("inputs must both be operator-valued or both fusion sequences".into())),
    }
}

fn reproduce_cmd(example: Example, tol: &Tolerance) -> Outcome {
    let r = reproduce::run(example.name(), tol)?;
    let failed: Vec<&str> = r.assertions.iter().filter(|a| !a.pass).map(|a| a.name.as_str()).collect();
    let summary = format!("{}: {} of {} assertions hold", r.name, r.assertions.len() - failed.len(), r.assertions.len());
    if r.passed {
        Ok((to_value(&r), summary))
    } else {
        Err(Failure::Checks(to_value(&r), format!("{summary}; failed: {}", failed.join("; "))))
    }
}

fn sweep_cmd(suite: &str, trials: Option<usize>, cfg: &SuiteConfig) -> Outcome {
    let names: Vec<&str> = if suite == "all" {
        sweep::SUITES.iter().map(|(n, _)| *n).collect()
    } else {
        vec![suite]
    };
    let mut reports = Vec::new();
    for name in names {
        let r = sweep::run_named(name, cfg, trials).ok_or_else(|| {
            let known: Vec<&str> = sweep::SUITES.iter().map(|(n, _)| *n).collect();
            Failure::Usage(format!("unknown suite {name:?}; expected all or one of {}", known.join(", ")))
        })?;
        reports.extend(r);
    }
    let failed: Vec<&str> = reports.iter().filter(|r| !r.passed()).map(|r| r.name.as_str()).collect();
    let summary = format!("{} of {} suites passed", reports.len() - failed.len(), reports.len());
    let body = json!({ "seed": cfg.seed, "suites": to_value(&reports) });
    if failed.is_empty() {
        Ok((body, summary))
    } else {
        Err(Failure::Checks(body, format!("{summary}; failed: {}", failed.join(", "))))
    }
}

fn emit(value: &Value, out: Option<&Path>) -> Result<(), String> {
    let text = io::to_exact_json(value) + "\n";
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| format!("{}: {e}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let tol = Tolerance { rank: cli.tol_rank, eq: cli.tol_eq };
    let cfg = SuiteConfig { seed: cli.seed, tol };
    let result = match &cli.command {
        Command::Analyze { path } => analyze(path, &tol),
        Command::Dual { path, l, .. } => dual(path, l.as_deref(), &tol),
        Command::Perturb { a, b, l } => perturb_cmd(a, b, l.as_deref(), &tol),
        Command::FusionDual { path, l, .. } => {
            require_fusion(path, &tol).and_then(|w| fusion_dual(&w, l.as_deref(), &tol))
        }
        Command::FusionPerturb { w, v } => require_fusion(w, &tol)
            .and_then(|w| Ok((w, require_fusion(v, &tol)?)))
            .and_then(|(w, v)| fusion_perturb(&w, &v, &tol)),
        Command::Reproduce { name } => reproduce_cmd(*name, &tol),
        Command::Sweep { suite } => sweep_cmd(suite, cli.trials, &cfg),
    };
    let (body, summary, code) = match result {
        Ok((body, summary)) => (Some(body), summary, 0),
        Err(Failure::Checks(body, summary)) => (Some(body), summary, 1),
        Err(Failure::Usage(msg)) => (None, format!("error: {msg}"), 2),
        Err(Failure::Frame(e)) => (None, format!("error: {e}"), exit_code(&e)),
    };
    eprintln!("{summary}");
    if let Some(body) = body {
        if let Err(msg) = emit(&body, cli.out.as_deref()) {
            eprintln!("error: {msg}");
            return ExitCode::from(2);
        }
    }
    ExitCode::from(code)
}

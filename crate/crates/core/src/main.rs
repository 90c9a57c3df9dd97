use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use nhqc_rescale::algebra::{classify_label, ErrorClass, GeneralizedPauliLabel};
use nhqc_rescale::analysis::{
    closed_form_detection, closed_form_expected_detection, closed_form_report, decompose_on_pair, run_experiment,
    simulate_detection, DetectionReport, LogicalAmplitudeDecomposition, Sampling,
};
use nhqc_rescale::config::ExperimentConfig;
use nhqc_rescale::holonomy::{integrate_schedule, Envelope, PulseSchedule, DEFAULT_STEPS, HOLONOMY_ACCEPT_TOL};
use nhqc_rescale::noise::NoiseSpec;
use nhqc_rescale::output::{emit, result_document, write_trials_csv_path};
use nhqc_rescale::state::QutritState;
use nhqc_rescale::{Error, Result};

#[derive(Parser)]
#[command(name = "nhqc", version, about = "Leakage post-selection for noisy holonomic qutrit circuits")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List the 81 two-qutrit Pauli labels and their subsets.
    EnumerateErrors {
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Closed-form detection probabilities for a logical basis state or a config.
    DetectProb(DetectArgs),
    /// Monte Carlo detection rates.
    Simulate(RunArgs),
    /// Full estimator comparison (conventional vs rescaled).
    Run(RunArgs),
    /// Integrate a Λ pulse and check the holonomy conditions.
    ValidateGate(GateArgs),
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long)]
    shots: Option<u64>,
    /// Use exact outcome distributions even if shots are configured.
    #[arg(long)]
    exact: bool,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write per-trial records as CSV (default path: draws.csv).
    #[arg(long, value_name = "PATH", num_args = 0..=1, default_missing_value = "draws.csv")]
    dump_draws: Option<PathBuf>,
}

#[derive(Args)]
struct DetectArgs {
    /// Ternary basis string of a logical state, e.g. `0110`.
    #[arg(long, conflicts_with = "config", required_unless_present = "config")]
    state: Option<String>,
    /// Expected detection over a config's circuit and noise model.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Faulty pair for `--state`.
    #[arg(long, value_delimiter = ',', num_args = 2, default_values_t = [0usize, 1])]
    pair: Vec<usize>,
    /// Single label `a1,a2,b1,b2` (or `a1a2b1b2`).
    #[arg(long)]
    label: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GateArgs {
    #[arg(long, allow_hyphen_values = true)]
    theta: f64,
    #[arg(long, allow_hyphen_values = true)]
    phi: f64,
    #[arg(long, default_value_t = std::f64::consts::PI)]
    area: f64,
    #[arg(long, default_value_t = DEFAULT_STEPS)]
    steps: usize,
    #[arg(long, default_value_t = 1.0)]
    tau: f64,
    #[arg(long, value_parser = parse_envelope, default_value = "sine_squared")]
    envelope: Envelope,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_envelope(s: &str) -> std::result::Result<Envelope, String> {
    match s {
        "sine_squared" | "sin2" => Ok(Envelope::SineSquared),
        "square" => Ok(Envelope::Square),
        _ => Err(format!("unknown envelope {s:?} (expected sine_squared or square)")),
    }
}

fn parse_label(s: &str) -> Result<GeneralizedPauliLabel> {
    let digits: Vec<u8> = s
        .chars()
        .filter(|c| !matches!(c, ',' | ' ' | '(' | ')'))
        .map(|c| c.to_digit(10).map(|d| d as u8).ok_or_else(|| Error::Config(format!("bad label {s:?}"))))
        .collect::<Result<_>>()?;
    match digits[..] {
        [a1, a2, b1, b2] => GeneralizedPauliLabel::new(a1, a2, b1, b2),
        _ => Err(Error::Config(format!("label {s:?} needs four exponents"))),
    }
}

fn load_config(args: &RunArgs) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::from_path(&args.config)?;
    if let Some(seed) = args.seed {
        cfg.run.seed = Some(seed);
    }
    if let Some(trials) = args.trials {
        cfg.run.trials = trials;
        cfg.run.ensemble = nhqc_rescale::config::EnsembleKind::Sampled;
    }
    if let Some(shots) = args.shots {
        cfg.run.shots = Some(shots);
    }
    cfg.run.exact |= args.exact;
    Ok(cfg)
}

fn out_path<'a>(flag: &'a Option<PathBuf>, cfg: &'a ExperimentConfig) -> Option<&'a Path> {
    flag.as_deref().or(cfg.run.out.as_deref())
}

#[derive(Serialize)]
struct LabelRow {
    label: GeneralizedPauliLabel,
    name: String,
    subset: ErrorClass,
}

#[derive(Serialize)]
struct Enumeration {
    labels: Vec<LabelRow>,
    counts: std::collections::BTreeMap<ErrorClass, usize>,
}

fn enumerate_errors(out: Option<&Path>) -> Result<()> {
    let labels: Vec<LabelRow> = GeneralizedPauliLabel::all()
        .map(|label| LabelRow { label, name: label.to_string(), subset: classify_label(label) })
        .collect();
    let mut counts = std::collections::BTreeMap::new();
    for row in &labels {
        *counts.entry(row.subset).or_insert(0) += 1;
    }
    emit(&result_document::<(), _>("enumerate-errors", None, &Enumeration { labels, counts })?, out)
}

#[derive(Serialize)]
struct StateDetection {
    state: String,
    pair: [usize; 2],
    decomposition: LogicalAmplitudeDecomposition,
    #[serde(skip_serializing_if = "Option::is_none")]
    label: Option<GeneralizedPauliLabel>,
    #[serde(skip_serializing_if = "Option::is_none")]
    probability: Option<f64>,
    report: DetectionReport,
}

#[derive(Serialize)]
struct CircuitDetection {
    expected_detection: f64,
}

fn detect_prob(args: &DetectArgs) -> Result<()> {
    if let Some(path) = &args.config {
        let cfg = ExperimentConfig::from_path(path)?;
        let exp = cfg.experiment()?;
        let expected = closed_form_expected_detection(&exp.initial, &exp.circuit, &exp.noise)?;
        let doc = result_document("detect-prob", Some(&cfg), &CircuitDetection { expected_detection: expected })?;
        return emit(&doc, args.out.as_deref());
    }
    let text = args.state.as_deref().unwrap_or_default();
    let state = QutritState::basis(text)?;
    let decomposition = decompose_on_pair(&state, args.pair[0], args.pair[1])?;
    let label = args.label.as_deref().map(parse_label).transpose()?;
    let result = StateDetection {
        state: text.to_string(),
        pair: [args.pair[0], args.pair[1]],
        decomposition,
        label,
        probability: label.map(|l| closed_form_detection(&decomposition, l)),
        report: closed_form_report(&decomposition, &NoiseSpec::symmetric(0))?,
    };
    emit(&result_document::<(), _>("detect-prob", None, &result)?, args.out.as_deref())
}

#[derive(Serialize)]
struct SimulationResult {
    detection: DetectionReport,
    closed_form_detection: f64,
    sampling: Sampling,
}

fn simulate(args: &RunArgs) -> Result<()> {
    let cfg = load_config(args)?;
    let exp = cfg.experiment()?;
    let sampling = match exp.sampling {
        Sampling::Exact => Sampling::Exact,
        Sampling::Shots { .. } => Sampling::Shots { shots: 1 },
    };
    let (detection, records) = simulate_detection(&exp.initial, &exp.circuit, &exp.noise, cfg.run.trials, sampling)?;
    let result = SimulationResult {
        detection,
        closed_form_detection: closed_form_expected_detection(&exp.initial, &exp.circuit, &exp.noise)?,
        sampling,
    };
    if let Some(path) = args.dump_draws.as_deref().or(cfg.run.draws_csv.as_deref()) {
        write_trials_csv_path(path, &records)?;
    }
    emit(&result_document("simulate", Some(&cfg), &result)?, out_path(&args.out, &cfg))
}

fn run(args: &RunArgs) -> Result<()> {
    let cfg = load_config(args)?;
    let report = run_experiment(&cfg.experiment()?)?;
    if let Some(path) = args.dump_draws.as_deref().or(cfg.run.draws_csv.as_deref()) {
        write_trials_csv_path(path, &report.records)?;
    }
    emit(&result_document("run", Some(&cfg), &report)?, out_path(&args.out, &cfg))
}

fn validate_gate(args: &GateArgs) -> Result<()> {
    let schedule = PulseSchedule {
        theta: args.theta,
        phi: args.phi,
        area: args.area,
        steps: args.steps,
        tau: args.tau,
        envelope: args.envelope,
    };
    let report = integrate_schedule(&schedule)?;
    emit(&result_document("validate-gate", Some(&schedule), &report)?, args.out.as_deref())?;
    if !report.is_holonomic(HOLONOMY_ACCEPT_TOL) {
        return Err(Error::NotHolonomic(Box::new(report)));
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::EnumerateErrors { out } => enumerate_errors(out.as_deref()),
        Command::DetectProb(args) => detect_prob(args),
        Command::Simulate(args) => simulate(args),
        Command::Run(args) => run(args),
        Command::ValidateGate(args) => validate_gate(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

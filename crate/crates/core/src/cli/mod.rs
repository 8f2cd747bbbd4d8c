//! The `tsqc` command-line front end.
//!
//! ```text
//! tsqc <run|table1|snr|classify|experiment|worked-example> [--config FILE] [--seed N] [--out FILE] [flags...]
//! ```
//!
//! Settings come from built-in defaults, then the `--config` file (flat
//! `key = value` lines), then command-line flags. Output is rendered fully in
//! memory before anything is written, so a failing command writes nothing.
//! Exit codes: 0 success, 1 configuration error, 2 runtime failure.

pub mod format;
pub mod settings;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use crate::adversary::{AttackPlan, TomographyKind, TomographyModel};
use crate::analytics::{classify_protocol, intensity_budget_table, snr_general, ProtocolKind};
use crate::montecarlo::{
    reproduce_worked_example_with, run_experiment, snr_curve, ExperimentSpec, Sweep,
    WORKED_EXAMPLE_TRIALS,
};
use crate::optics::SplitMode;
use crate::protocol::{run_three_stage, AngleSet, BreachRule, GPolicy, SessionConfig};

pub use settings::Settings;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 1,
            CliError::Runtime(_) => 2,
        }
    }
}

impl From<crate::Error> for CliError {
    fn from(e: crate::Error) -> Self {
        CliError::Config(e.to_string())
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "tsqc",
    version,
    about = "Three-stage multi-photon quantum cryptography simulator"
)]
pub struct Cli {
    /// Flat `key = value` configuration file.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    #[arg(long, global = true, value_name = "N")]
    pub seed: Option<String>,
    /// Output path; `-` (the default) writes to standard output.
    #[arg(long, global = true, value_name = "FILE")]
    pub out: Option<String>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one session and report every checkpoint.
    Run {
        #[command(flatten)]
        session: SessionFlags,
        #[command(flatten)]
        attack: AttackFlags,
        /// `text` or `kv` (machine-readable key=value lines).
        #[arg(long)]
        format: Option<String>,
    },
    /// Intensity-budget table (alpha rows x beta columns).
    Table1 {
        #[arg(long)]
        g: Option<String>,
        /// Comma-separated alpha values.
        #[arg(long)]
        alphas: Option<String>,
        /// Comma-separated ascending beta values.
        #[arg(long)]
        betas: Option<String>,
    },
    /// SNR of Bob's final pulse against the siphon fraction.
    Snr {
        #[arg(long)]
        alpha_min: Option<String>,
        #[arg(long)]
        alpha_max: Option<String>,
        #[arg(long)]
        steps: Option<String>,
        #[arg(long)]
        a1: Option<String>,
        #[arg(long)]
        a2: Option<String>,
        #[arg(long)]
        a3: Option<String>,
    },
    /// (p-k-n) threshold classification.
    Classify {
        /// `bb84` or `tsqc`.
        #[arg(long)]
        kind: Option<String>,
        #[arg(long)]
        p: Option<String>,
        #[arg(long)]
        n: Option<String>,
    },
    /// Batch of seeded sessions, optionally sweeping one parameter.
    Experiment {
        #[command(flatten)]
        session: SessionFlags,
        #[command(flatten)]
        attack: AttackFlags,
        #[arg(long)]
        trials: Option<String>,
        /// alpha, beta, a1, a2, a3, n, loss, g or s.
        #[arg(long)]
        sweep: Option<String>,
        #[arg(long)]
        sweep_values: Option<String>,
        /// Draw the sent bit independently per trial.
        #[arg(long)]
        random_bit: Option<String>,
    },
    /// Scripted 100-photon siphon-and-replace trace.
    WorkedExample {
        #[arg(long)]
        trials: Option<String>,
    },
}

#[derive(Debug, Args, Default)]
pub struct SessionFlags {
    /// Angle-set size (power of two).
    #[arg(long)]
    pub s: Option<String>,
    /// Source intensity in photons.
    #[arg(long)]
    pub photons: Option<String>,
    #[arg(long)]
    pub alpha: Option<String>,
    #[arg(long)]
    pub g: Option<String>,
    /// constant, per-session or within-session.
    #[arg(long)]
    pub g_mode: Option<String>,
    #[arg(long)]
    pub g_schedule: Option<String>,
    #[arg(long)]
    pub bit: Option<String>,
    #[arg(long)]
    pub loss: Option<String>,
    /// deterministic or binomial.
    #[arg(long)]
    pub split: Option<String>,
    /// per-stage or total-budget.
    #[arg(long)]
    pub breach_rule: Option<String>,
}

#[derive(Debug, Args, Default)]
pub struct AttackFlags {
    /// Siphon fraction on all three passes.
    #[arg(long)]
    pub beta: Option<String>,
    #[arg(long)]
    pub a1: Option<String>,
    #[arg(long)]
    pub a2: Option<String>,
    #[arg(long)]
    pub a3: Option<String>,
    /// Inject a random photon per siphoned photon (default true).
    #[arg(long)]
    pub replace: Option<String>,
    /// abstract or ml.
    #[arg(long)]
    pub tomography: Option<String>,
    #[arg(long)]
    pub p_min: Option<String>,
}

impl SessionFlags {
    fn pairs(&self) -> [(&'static str, Option<&String>); 10] {
        [
            ("s", self.s.as_ref()),
            ("photons", self.photons.as_ref()),
            ("alpha", self.alpha.as_ref()),
            ("g", self.g.as_ref()),
            ("g_mode", self.g_mode.as_ref()),
            ("g_schedule", self.g_schedule.as_ref()),
            ("bit", self.bit.as_ref()),
            ("loss", self.loss.as_ref()),
            ("split", self.split.as_ref()),
            ("breach_rule", self.breach_rule.as_ref()),
        ]
    }
}

impl AttackFlags {
    fn pairs(&self) -> [(&'static str, Option<&String>); 7] {
        [
            ("beta", self.beta.as_ref()),
            ("a1", self.a1.as_ref()),
            ("a2", self.a2.as_ref()),
            ("a3", self.a3.as_ref()),
            ("replace", self.replace.as_ref()),
            ("tomography", self.tomography.as_ref()),
            ("p_min", self.p_min.as_ref()),
        ]
    }
}

/// Default grid for the intensity-budget table: 0.01 through 0.10.
pub fn default_grid() -> Vec<f64> {
    (1..=10).map(|i| i as f64 / 100.0).collect()
}

pub fn session_config(s: &Settings) -> Result<SessionConfig, CliError> {
    let d = SessionConfig::default();
    let angle_set = AngleSet::new(s.get_or("s", d.angle_set.size() as u64)?)?;
    let g_policy = match s.raw("g_mode").unwrap_or("constant") {
        "constant" => GPolicy::Constant(s.get_or("g", 0.2)?),
        mode @ ("per-session" | "within-session") => {
            let schedule = s
                .get_list("g_schedule")?
                .ok_or_else(|| CliError::Config(format!("g_mode {mode} needs g_schedule")))?;
            if mode == "per-session" {
                GPolicy::PerSession(schedule)
            } else {
                GPolicy::WithinSession(schedule)
            }
        }
        other => return Err(CliError::Config(format!("unknown g_mode `{other}`"))),
    };
    let bit = match s.raw("bit").unwrap_or("0") {
        "0" => false,
        "1" => true,
        other => {
            return Err(CliError::Config(format!(
                "bit must be 0 or 1, got `{other}`"
            )))
        }
    };
    let split_mode = match s.raw("split").unwrap_or("deterministic") {
        "deterministic" => SplitMode::Deterministic,
        "binomial" => SplitMode::Binomial,
        other => return Err(CliError::Config(format!("unknown split mode `{other}`"))),
    };
    let breach_rule = match s.raw("breach_rule").unwrap_or("per-stage") {
        "per-stage" => BreachRule::PerStage,
        "total-budget" => BreachRule::TotalBudget,
        other => return Err(CliError::Config(format!("unknown breach rule `{other}`"))),
    };
    let config = SessionConfig {
        angle_set,
        pulse_size: s.get_or("photons", d.pulse_size)?,
        alpha: s.get_or("alpha", d.alpha)?,
        g_policy,
        bit,
        channel_loss: s.get_or("loss", 0.0)?,
        split_mode,
        breach_rule,
        session_index: 0,
        seed: s.get_or("seed", 0)?,
    };
    config.validate()?;
    Ok(config)
}

/// `None` unless a siphon fraction is configured.
pub fn attack_plan(s: &Settings, angle_set: AngleSet) -> Result<Option<AttackPlan>, CliError> {
    if !["beta", "a1", "a2", "a3"].iter().any(|k| s.contains(k)) {
        return Ok(None);
    }
    let beta = s.get_or("beta", 0.0)?;
    let fractions = [
        s.get_or("a1", beta)?,
        s.get_or("a2", beta)?,
        s.get_or("a3", beta)?,
    ];
    let kind = match s.raw("tomography").unwrap_or("abstract") {
        "abstract" => TomographyKind::AbstractThreshold,
        "ml" => TomographyKind::PhysicalMl,
        other => return Err(CliError::Config(format!("unknown tomography `{other}`"))),
    };
    let model = TomographyModel::new(kind, s.get_or("p_min", 20)?, angle_set)?;
    let plan = AttackPlan::new(
        fractions,
        s.get_bool("replace", true)?,
        model,
        s.get_or("seed", 0)?,
    )?;
    Ok(Some(plan))
}

fn settings_for(cli: &Cli) -> Result<Settings, CliError> {
    let mut s = match &cli.config {
        Some(path) => Settings::load(path)?,
        None => Settings::default(),
    };
    s.overlay([("seed", cli.seed.as_ref())])?;
    match &cli.command {
        Command::Run {
            session,
            attack,
            format,
        } => {
            s.overlay(session.pairs())?;
            s.overlay(attack.pairs())?;
            s.overlay([("format", format.as_ref())])?;
        }
        Command::Table1 { g, alphas, betas } => {
            s.overlay([
                ("g", g.as_ref()),
                ("alphas", alphas.as_ref()),
                ("betas", betas.as_ref()),
            ])?;
        }
        Command::Snr {
            alpha_min,
            alpha_max,
            steps,
            a1,
            a2,
            a3,
        } => s.overlay([
            ("alpha_min", alpha_min.as_ref()),
            ("alpha_max", alpha_max.as_ref()),
            ("steps", steps.as_ref()),
            ("a1", a1.as_ref()),
            ("a2", a2.as_ref()),
            ("a3", a3.as_ref()),
        ])?,
        Command::Classify { kind, p, n } => {
            s.overlay([
                ("kind", kind.as_ref()),
                ("p", p.as_ref()),
                ("n", n.as_ref()),
            ])?;
        }
        Command::Experiment {
            session,
            attack,
            trials,
            sweep,
            sweep_values,
            random_bit,
        } => {
            s.overlay(session.pairs())?;
            s.overlay(attack.pairs())?;
            s.overlay([
                ("trials", trials.as_ref()),
                ("sweep", sweep.as_ref()),
                ("sweep_values", sweep_values.as_ref()),
                ("random_bit", random_bit.as_ref()),
            ])?;
        }
        Command::WorkedExample { trials } => s.overlay([("trials", trials.as_ref())])?,
    }
    Ok(s)
}

/// Renders the output of `cli` without writing it anywhere.
pub fn render(cli: &Cli) -> Result<String, CliError> {
    let s = settings_for(cli)?;
    match &cli.command {
        Command::Run { .. } => {
            let config = session_config(&s)?;
            let attack = attack_plan(&s, config.angle_set)?;
            let outcome = run_three_stage(&config, attack.as_ref())
                .map_err(|e| CliError::Runtime(e.to_string()))?;
            match s.raw("format").unwrap_or("text") {
                "text" => Ok(format::session_text(&outcome)),
                "kv" => Ok(format::session_kv(&outcome)),
                other => Err(CliError::Config(format!("unknown format `{other}`"))),
            }
        }
        Command::Table1 { .. } => {
            let g = s.get_or("g", 0.2)?;
            let alphas = s.get_list("alphas")?.unwrap_or_else(default_grid);
            let betas = s.get_list("betas")?.unwrap_or_else(default_grid);
            let rows = intensity_budget_table(g, &alphas, &betas)?;
            Ok(format::table1_csv(&betas, &rows))
        }
        Command::Snr { .. } => {
            if ["a1", "a2", "a3"].iter().any(|k| s.contains(k)) {
                let a = [
                    s.get_or("a1", 0.0)?,
                    s.get_or("a2", 0.0)?,
                    s.get_or("a3", 0.0)?,
                ];
                let snr = snr_general(a[0], a[1], a[2])?;
                return Ok(format::snr_general_csv(a, snr));
            }
            let points = snr_curve(
                s.get_or("alpha_min", 0.01)?,
                s.get_or("alpha_max", 0.5)?,
                s.get_or("steps", 50)?,
            )?;
            Ok(format::snr_csv(&points))
        }
        Command::Classify { .. } => {
            let kind = match s
                .raw("kind")
                .unwrap_or("tsqc")
                .to_ascii_lowercase()
                .as_str()
            {
                "bb84" => ProtocolKind::Bb84,
                "tsqc" | "three-stage" => ProtocolKind::ThreeStage,
                other => return Err(CliError::Config(format!("unknown protocol `{other}`"))),
            };
            let class = classify_protocol(kind, s.get("p")?, s.get("n")?)?;
            Ok(format::classify_text(&class))
        }
        Command::Experiment { .. } => {
            let config = session_config(&s)?;
            let attack = attack_plan(&s, config.angle_set)?;
            let sweep = match s.raw("sweep") {
                None => None,
                Some(name) => Some(Sweep {
                    param: name.parse()?,
                    values: s
                        .get_list("sweep_values")?
                        .ok_or_else(|| CliError::Config("sweep needs sweep_values".into()))?,
                }),
            };
            let spec = ExperimentSpec {
                base_config: config,
                attack,
                trials: s.get_or("trials", 1000)?,
                seed: s.get_or("seed", 0)?,
                sweep,
                randomize_bit: s.get_bool("random_bit", false)?,
            };
            let result = run_experiment(&spec)?;
            Ok(format::experiment_csv(&result))
        }
        Command::WorkedExample { .. } => {
            let trials = s.get_or("trials", WORKED_EXAMPLE_TRIALS)?;
            if trials < 1 {
                return Err(CliError::Config("trials must be >= 1".into()));
            }
            let trace = reproduce_worked_example_with(s.get_or("seed", 0)?, trials);
            Ok(format::worked_example_csv(&trace))
        }
    }
}

fn emit(out: Option<&str>, text: &str) -> Result<(), CliError> {
    match out {
        None | Some("-") => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| CliError::Runtime(format!("cannot write output: {e}")))
        }
        Some(path) => std::fs::write(path, text)
            .map_err(|e| CliError::Runtime(format!("cannot write {path}: {e}"))),
    }
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match render(&cli).and_then(|text| emit(cli.out.as_deref(), &text)) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("tsqc: {e}");
            e.exit_code()
        }
    }
}

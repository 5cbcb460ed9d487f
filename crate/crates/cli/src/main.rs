use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use weldopt_cli::config::{CvScheme, FeatureSubsample, InputSource, ModelKind, OutputFormat, RunConfig, StageSet};
use weldopt_cli::render::{render, render_json, render_text, write_files};
use weldopt_cli::{run_pipeline, CliError, EXIT_ALL_STAGES_FAILED};
use weldopt_core::taguchi::SnCriterion;

/// Taguchi, ANOVA and tree-ensemble analysis of friction stir welding trials.
#[derive(Parser)]
#[command(name = "weldopt", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Design diagnostics, response table and optimal levels.
    Taguchi(Opts),
    /// Main-effects ANOVA and model summary.
    Anova(Opts),
    /// Fit a forest or boosted ensemble and cross-validate it.
    Fit(Opts),
    /// Full pipeline.
    Report(Opts),
}

#[derive(Clone, Copy, ValueEnum)]
enum Builtin {
    Aa6262,
}

#[derive(Clone, Copy, ValueEnum)]
enum Criterion {
    Larger,
    Smaller,
    Nominal,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelArg {
    Rf,
    Gbm,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Text,
    Csv,
    Json,
}

#[derive(Args)]
#[group(skip)]
#[command(group(ArgGroup::new("source").required(true).args(["input", "builtin"])))]
struct Opts {
    /// CSV file with columns rpm, traverse_mm_min, plan_depth_mm, hardness.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Use a built-in dataset.
    #[arg(long, value_enum)]
    builtin: Option<Builtin>,
    #[arg(long, default_value = "hardness")]
    response: String,
    #[arg(long, value_enum, default_value = "larger")]
    criterion: Criterion,
    #[arg(long, value_enum, default_value = "rf")]
    model: ModelArg,
    #[arg(long, default_value_t = 200)]
    trees: usize,
    #[arg(long, default_value_t = 100)]
    rounds: usize,
    /// Maximum tree depth; 0 means unlimited.
    #[arg(long, default_value_t = 0)]
    depth: usize,
    #[arg(long, default_value_t = 0.1)]
    nu: f64,
    #[arg(long, default_value_t = 0.0)]
    lambda: f64,
    /// Features tried per split: a count, or a fraction when below 1.
    #[arg(long)]
    m: Option<f64>,
    #[arg(long, default_value = "loo")]
    cv: CvScheme,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "text")]
    format: FormatArg,
    /// Directory for report files; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Opts {
    fn into_config(self, stages: StageSet) -> RunConfig {
        RunConfig {
            input: match self.input {
                Some(p) => InputSource::Csv(p),
                None => InputSource::Builtin,
            },
            response: self.response,
            criterion: match self.criterion {
                Criterion::Larger => SnCriterion::LargerIsBetter,
                Criterion::Smaller => SnCriterion::SmallerIsBetter,
                Criterion::Nominal => SnCriterion::NominalIsBest,
            },
            model: match self.model {
                ModelArg::Rf => ModelKind::Rf,
                ModelArg::Gbm => ModelKind::Gbm,
            },
            trees: self.trees,
            rounds: self.rounds,
            depth: self.depth,
            nu: self.nu,
            lambda: self.lambda,
            m: self.m.map(FeatureSubsample),
            cv: self.cv,
            seed: self.seed,
            format: match self.format {
                FormatArg::Text => OutputFormat::Text,
                FormatArg::Csv => OutputFormat::Csv,
                FormatArg::Json => OutputFormat::Json,
            },
            out: self.out,
            stages,
        }
    }
}

fn run(cfg: &RunConfig) -> Result<i32, CliError> {
    let doc = run_pipeline(cfg)?;
    for w in doc.design.iter().flat_map(|d| &d.warnings) {
        eprintln!("warning: {w}");
    }
    match &cfg.out {
        Some(dir) => write_files(dir, &render(&doc, cfg.format)?)?,
        None => match cfg.format {
            OutputFormat::Json => print!("{}", render_json(&doc)?),
            _ => print!("{}", render_text(&doc)),
        },
    }
    Ok(if doc.any_stage_succeeded() { 0 } else { EXIT_ALL_STAGES_FAILED })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match cli.command {
        Command::Taguchi(o) => o.into_config(StageSet::TAGUCHI),
        Command::Anova(o) => o.into_config(StageSet::ANOVA),
        Command::Fit(o) => o.into_config(StageSet::FIT),
        Command::Report(o) => o.into_config(StageSet::ALL),
    };
    let code = run(&cfg).unwrap_or_else(|e| {
        eprintln!("weldopt: {e}");
        e.exit_code()
    });
    ExitCode::from(code as u8)
}

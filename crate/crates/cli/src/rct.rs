//! Trial-analysis verbs.

use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Subcommand, ValueEnum};
use humility_core::rct::{
    arm_summary, compute_outcomes, fit_grid, fit_rct, grid_report, rct_report, read_outcomes_file, simulate_outcomes,
    write_outcomes, ExperimentBundle, LabelMode, Mode, Outcome, OutcomeRow, RctModel, RctSimConfig,
};

use crate::{emit, output, ClassifierArgs};

#[derive(Subcommand)]
pub enum RctCmd {
    /// Per-participant outcomes from an experiment export directory.
    Outcomes(OutcomesArgs),
    /// One regression.
    Fit(FitArgs),
    /// Every model for every outcome.
    Report(ReportArgs),
    /// Simulated outcomes with known arm effects.
    Simulate(SimulateArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum LabelModeArg {
    Reclassify,
    Live,
}

/// Where outcome rows come from: a CSV written by `rct outcomes`, or an
/// export directory that is scored on the fly.
#[derive(Args)]
pub struct RowSource {
    #[arg(long, conflicts_with = "export", required_unless_present = "export")]
    outcomes: Option<PathBuf>,
    #[arg(long)]
    export: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "reclassify")]
    label_mode: LabelModeArg,
    #[command(flatten)]
    classifier: ClassifierArgs,
}

#[derive(Args)]
pub struct OutcomesArgs {
    #[arg(long)]
    export: PathBuf,
    /// Outcome CSV; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "reclassify")]
    label_mode: LabelModeArg,
    #[command(flatten)]
    classifier: ClassifierArgs,
}

#[derive(Args)]
pub struct FitArgs {
    #[command(flatten)]
    source: RowSource,
    /// base, interaction, base-cov or interaction-cov.
    #[arg(long, value_parser = |s: &str| s.parse::<RctModel>().map_err(|e| e.to_string()))]
    model: RctModel,
    /// demonstrated, self or ncomments.
    #[arg(long, value_parser = |s: &str| s.parse::<Outcome>().map_err(|e| e.to_string()))]
    outcome: Outcome,
    /// itt or tot.
    #[arg(long, default_value = "itt", value_parser = |s: &str| s.parse::<Mode>().map_err(|e| e.to_string()))]
    mode: Mode,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
pub struct ReportArgs {
    #[command(flatten)]
    source: RowSource,
    #[arg(long, default_value = "itt", value_parser = |s: &str| s.parse::<Mode>().map_err(|e| e.to_string()))]
    mode: Mode,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
pub struct SimulateArgs {
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    participants: Option<usize>,
    /// No arm effects.
    #[arg(long)]
    null: bool,
}

fn label_mode(m: LabelModeArg) -> LabelMode {
    match m {
        LabelModeArg::Reclassify => LabelMode::Reclassify,
        LabelModeArg::Live => LabelMode::LiveWhereAvailable,
    }
}

fn score_export(
    dir: &Path,
    classifier: &ClassifierArgs,
    mode: LabelModeArg,
    seed: Option<u64>,
) -> anyhow::Result<Vec<OutcomeRow>> {
    let bundle = ExperimentBundle::read_dir(dir)?;
    let classifier = classifier.build(seed)?;
    let report = compute_outcomes(&bundle, classifier.as_ref(), label_mode(mode))?;
    for e in &report.excluded {
        eprintln!("excluded {}: {}", e.participant, e.reason);
    }
    eprintln!("{} participants analyzable, {} excluded", report.rows.len(), report.excluded.len());
    Ok(report.rows)
}

impl RowSource {
    fn rows(&self, seed: Option<u64>) -> anyhow::Result<Vec<OutcomeRow>> {
        match (&self.outcomes, &self.export) {
            (Some(p), _) => Ok(read_outcomes_file(p)?),
            (None, Some(dir)) => score_export(dir, &self.classifier, self.label_mode, seed),
            (None, None) => anyhow::bail!("pass --outcomes or --export"),
        }
    }
}

pub fn run(cmd: RctCmd, seed: Option<u64>) -> anyhow::Result<()> {
    match cmd {
        RctCmd::Outcomes(a) => {
            let rows = score_export(&a.export, &a.classifier, a.label_mode, seed)?;
            eprint!("{}", arm_summary(&rows));
            let mut w = output(a.out.as_deref())?;
            write_outcomes(&mut w, &rows)?;
            w.flush()?;
            Ok(())
        }
        RctCmd::Fit(a) => {
            let rows = a.source.rows(seed)?;
            let fit = fit_rct(&rows, a.model, a.outcome, a.mode)?;
            let title = format!("{} ({})", a.outcome.title(), a.mode.title());
            let text = rct_report(&title, &[(a.model.title().to_string(), &fit)]);
            emit(a.json, &fit, &text)
        }
        RctCmd::Report(a) => {
            let rows = a.source.rows(seed)?;
            let fits = fit_grid(&rows, &RctModel::ALL, &Outcome::ALL, a.mode)?;
            emit(a.json, &fits, &grid_report(&fits))
        }
        RctCmd::Simulate(a) => {
            let s = seed.unwrap_or(0);
            let mut cfg = if a.null { RctSimConfig::null(s) } else { RctSimConfig::planted(s) };
            if let Some(n) = a.participants {
                cfg.n_participants = n;
            }
            let rows = simulate_outcomes(&cfg);
            let mut w = output(a.out.as_deref())?;
            write_outcomes(&mut w, &rows)?;
            w.flush()?;
            Ok(())
        }
    }
}

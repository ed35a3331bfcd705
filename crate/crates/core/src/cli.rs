//! Command-line interface: `generate`, `plan`, `validate` and `profile`.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};

use crate::bundles::{BundleKind, DifficultySpec};
use crate::error::{Error, Result};
use crate::panel::{gen_panel, GeneratorConfig};
use crate::pipeline::{
    build_dataset, build_epoch_plan, emit_dataset, floor_fraction, load_real_csv, read_table,
    DatasetSpec, EpochPlan, Manifest, MixMode, MixPlan, SparsityMode, SplitFractions, Strategy,
    WindowSpec,
};
use crate::profile::{profile, recommend_bundle, BundleRanking, StatReport};

#[derive(Debug, Parser)]
#[command(
    name = "synthts",
    version,
    about = "Difficulty-conditioned synthetic time-series panels and real/synthetic mixing"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic panel, or a mixed dataset when --real is given.
    Generate(GenerateArgs),
    /// Print the per-epoch real/synthetic schedule.
    Plan(PlanArgs),
    /// Write a statistical report for a CSV.
    Validate(ReportArgs),
    /// Rank bundle kinds by how well they match a CSV.
    Profile(ReportArgs),
}

/// `all` or a single bundle kind.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BundleChoice(pub Option<BundleKind>);

impl FromStr for BundleChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.eq_ignore_ascii_case("all") {
            return Ok(BundleChoice(None));
        }
        s.parse()
            .map(|k| BundleChoice(Some(k)))
            .map_err(|_| Error::invalid("bundle", format!("expected st|nr|lm|ve|all, got {s:?}")))
    }
}

#[derive(Clone, Debug, Args)]
pub struct PanelArgs {
    /// st, nr, lm, ve or all.
    #[arg(long, default_value = "all")]
    pub bundle: BundleChoice,
    /// default, uniform, easy, medium, hard, or a fixed value in [0, 1].
    #[arg(long, default_value = "default")]
    pub difficulty: DifficultySpec,
    #[arg(long, default_value_t = 7)]
    pub channels: usize,
    #[arg(long, default_value_t = 1000)]
    pub length: usize,
    /// Probability of latent-factor mixing across channels.
    #[arg(long, default_value_t = 0.5)]
    pub latent_prob: f64,
    /// Draw one difficulty per channel.
    #[arg(long)]
    pub per_channel_difficulty: bool,
}

impl PanelArgs {
    pub fn config(&self, seed: u64) -> Result<GeneratorConfig> {
        let config = GeneratorConfig {
            length: self.length,
            channels: self.channels,
            bundle_filter: self.bundle.0,
            difficulty: self.difficulty,
            per_channel_difficulty: self.per_channel_difficulty,
            p_latent: self.latent_prob,
            master_seed: seed,
            ..GeneratorConfig::default()
        };
        config.validate().map_err(flag_error)?;
        Ok(config)
    }
}

#[derive(Clone, Debug, Args)]
pub struct MixArgs {
    /// real, mixed, anneal or anneal_inverse.
    #[arg(long, default_value = "real")]
    pub mode: MixMode,
    /// Synthetic volume as a multiple of the original real training size.
    #[arg(long, default_value_t = 0.0)]
    pub synth_ratio: f64,
    /// Fraction of real training windows kept, in (0, 1].
    #[arg(long, default_value_t = 1.0)]
    pub sparsity: f64,
    /// random or prefix.
    #[arg(long, default_value = "random")]
    pub sparsity_mode: SparsityMode,
    /// hard or gradual.
    #[arg(long, default_value = "hard")]
    pub strategy: Strategy,
    #[arg(long, default_value_t = 5)]
    pub anneal_epoch: usize,
    #[arg(long, default_value_t = 10)]
    pub epochs: usize,
    /// 0 generates fresh samples every epoch.
    #[arg(long, default_value_t = 0)]
    pub cache_size: usize,
}

impl MixArgs {
    pub fn plan(&self) -> Result<MixPlan> {
        let plan = MixPlan {
            mode: self.mode,
            r_synth: self.synth_ratio,
            sparsity: self.sparsity,
            sparsity_mode: self.sparsity_mode,
            strategy: self.strategy,
            anneal_epoch: self.anneal_epoch,
            epochs: self.epochs,
            cache_size: self.cache_size,
        };
        plan.validate().map_err(flag_error)?;
        Ok(plan)
    }
}

#[derive(Clone, Debug, Args)]
pub struct WindowArgs {
    #[arg(long, default_value_t = 96)]
    pub input_len: usize,
    #[arg(long, default_value_t = 48)]
    pub label_len: usize,
    #[arg(long, default_value_t = 96)]
    pub horizon: usize,
    #[arg(long, default_value_t = 1)]
    pub stride: usize,
}

impl WindowArgs {
    pub fn spec(&self) -> Result<WindowSpec> {
        let spec = WindowSpec {
            input_len: self.input_len,
            label_len: self.label_len,
            horizon: self.horizon,
            stride: self.stride,
        };
        spec.validate().map_err(flag_error)?;
        Ok(spec)
    }
}

#[derive(Clone, Debug, Args)]
pub struct GenerateArgs {
    #[command(flatten)]
    pub panel: PanelArgs,
    #[command(flatten)]
    pub mix: MixArgs,
    #[command(flatten)]
    pub window: WindowArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Real benchmark CSV (index column then numeric columns).
    #[arg(long)]
    pub real: Option<PathBuf>,
    #[arg(long, default_value = "0.7,0.1,0.2")]
    pub splits: SplitFractions,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Clone, Debug, Args)]
pub struct PlanArgs {
    #[command(flatten)]
    pub mix: MixArgs,
    #[command(flatten)]
    pub window: WindowArgs,
    /// Real CSV used to count training windows.
    #[arg(long, conflicts_with = "train_windows")]
    pub real: Option<PathBuf>,
    #[arg(long, default_value = "0.7,0.1,0.2")]
    pub splits: SplitFractions,
    /// Original training window count, instead of --real.
    #[arg(long)]
    pub train_windows: Option<usize>,
}

#[derive(Clone, Debug, Args)]
pub struct ReportArgs {
    /// CSV with an index column followed by numeric columns.
    #[arg(long)]
    pub input: PathBuf,
    /// Write JSON here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Rename a validation error's parameter to the command-line flag that sets it.
pub fn flag_error(err: Error) -> Error {
    match err {
        Error::InvalidParameter { name, reason } => {
            let flag = match name.as_str() {
                "channels" => "--channels",
                "length" => "--length",
                "p_latent" => "--latent-prob",
                "difficulty" | "d" => "--difficulty",
                "bundle" => "--bundle",
                "r_synth" => "--synth-ratio",
                "sparsity" => "--sparsity",
                "anneal_epoch" => "--anneal-epoch",
                "epochs" => "--epochs",
                "cache_size" => "--cache-size",
                "splits" => "--splits",
                "input-len" => "--input-len",
                "label-len" => "--label-len",
                "horizon" => "--horizon",
                "stride" => "--stride",
                "rows" => "--real",
                _ => return Error::InvalidParameter { name, reason },
            };
            Error::InvalidParameter {
                name: flag.to_string(),
                reason,
            }
        }
        other => other,
    }
}

#[derive(Debug)]
pub enum GenerateOutput {
    Panel { csv: PathBuf, metadata: PathBuf },
    Dataset(Box<Manifest>),
}

pub fn cmd_generate(args: &GenerateArgs) -> Result<GenerateOutput> {
    let config = args.panel.config(args.seed)?;
    let plan = args.mix.plan()?;
    let windows = args.window.spec()?;
    std::fs::create_dir_all(&args.out).map_err(|e| Error::io(&args.out, e))?;
    match &args.real {
        None => {
            let panel = gen_panel(&config)?;
            let csv = args.out.join("panel.csv");
            let metadata = args.out.join("panel.json");
            panel.save(&config, &csv, &metadata)?;
            Ok(GenerateOutput::Panel { csv, metadata })
        }
        Some(path) => {
            let real = load_real_csv(path, args.splits)?;
            let spec = DatasetSpec {
                generator: config,
                plan,
                windows,
                seed: args.seed,
            };
            let dataset = build_dataset(real, &spec).map_err(flag_error)?;
            Ok(GenerateOutput::Dataset(Box::new(emit_dataset(
                &args.out, &dataset,
            )?)))
        }
    }
}

/// Resolve the schedule and print it as an aligned table.
pub fn cmd_plan<W: Write>(args: &PlanArgs, out: &mut W) -> Result<EpochPlan> {
    let plan = args.mix.plan()?;
    let orig = match (&args.real, args.train_windows) {
        (Some(path), _) => {
            let windows = args.window.spec()?;
            let real = load_real_csv(path, args.splits)?;
            windows.count(real.train.rows())
        }
        (None, Some(n)) => n,
        (None, None) => {
            return Err(Error::invalid(
                "--train-windows",
                "pass --real or --train-windows",
            ));
        }
    };
    let sparse = floor_fraction(orig, plan.sparsity).min(orig);
    let epoch_plan = build_epoch_plan(&plan, orig, sparse)?;
    write!(out, "{epoch_plan}").map_err(|e| Error::io("<stdout>", e))?;
    Ok(epoch_plan)
}

fn load_report_input(path: &Path) -> Result<StatReport> {
    let table = read_table(path)?;
    profile(&table.data, Some(&table.columns))
}

fn emit_json<W: Write, T: serde::Serialize>(
    value: &T,
    dest: Option<&Path>,
    out: &mut W,
) -> Result<()> {
    let text = serde_json::to_string_pretty(value)? + "\n";
    match dest {
        Some(path) => std::fs::write(path, text).map_err(|e| Error::io(path, e)),
        None => out
            .write_all(text.as_bytes())
            .map_err(|e| Error::io("<stdout>", e)),
    }
}

pub fn cmd_validate<W: Write>(args: &ReportArgs, out: &mut W) -> Result<StatReport> {
    let report = load_report_input(&args.input)?;
    emit_json(&report, args.out.as_deref(), out)?;
    Ok(report)
}

pub fn cmd_profile<W: Write>(args: &ReportArgs, out: &mut W) -> Result<BundleRanking> {
    let ranking = recommend_bundle(&load_report_input(&args.input)?);
    emit_json(&ranking, args.out.as_deref(), out)?;
    Ok(ranking)
}

pub fn run<W: Write>(cli: &Cli, out: &mut W) -> Result<()> {
    match &cli.command {
        Command::Generate(args) => match cmd_generate(args)? {
            GenerateOutput::Panel { csv, metadata } => {
                writeln!(out, "wrote {} and {}", csv.display(), metadata.display())
                    .map_err(|e| Error::io("<stdout>", e))
            }
            GenerateOutput::Dataset(manifest) => writeln!(
                out,
                "wrote dataset to {} ({} retained real windows, {} synthetic samples)",
                args.out.display(),
                manifest.retained_windows.len(),
                manifest.synthetic_samples.len()
            )
            .map_err(|e| Error::io("<stdout>", e)),
        },
        Command::Plan(args) => cmd_plan(args, out).map(|_| ()),
        Command::Validate(args) => cmd_validate(args, out).map(|_| ()),
        Command::Profile(args) => cmd_profile(args, out).map(|_| ()),
    }
}

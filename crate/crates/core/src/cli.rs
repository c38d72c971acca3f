//! Command-line interface.
//!
//! Exit codes: 0 success, 2 input error, 3 judgements needed (a manifest of
//! pairs to judge was written), 4 the reasoning is infeasible for the
//! given inputs.

use std::collections::BTreeSet;
use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::delta_recall::{
    curve_csv, estimate_with_policy, heatmap_csv, recall_curve, recall_heatmap, ClipPolicy,
    DiagramInputs, RecallPolicy, Variant, DEFAULT_CURVE_POINTS, DEFAULT_HEATMAP_STEPS,
};
use crate::error::Error;
use crate::impact::{affected_items, impact_metrics};
use crate::iq::{geometry_csv, iq_approx, iq_exact, iq_geometry, GeometryGrid};
use crate::model::{load_clustering, restrict_to_common, Clustering, ClusteringPair, Partition};
use crate::quality::{
    delta_recall_pairs, draw_quality_pairs, estimate_delta_recall, estimate_quality_from_sample,
    exact_quality, exact_recall_precision, write_manifest, Estimate, IdealJudge, Judge, NoJudge,
    Sampling, Scope, VerdictJudge,
};
use crate::report::{
    ApproxIq, DeltaRecallSection, EvalReport, IqSection, QualityMode, QualitySection,
    SimulationSection, Unavailable, VariantEstimate,
};
use crate::simulation::{study_csv, validation_study, StudyConfig};
use crate::snapshot::{snapshot_eval, Reference, SnapshotOptions};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_JUDGEMENTS_NEEDED: i32 = 3;
pub const EXIT_INFEASIBLE: i32 = 4;

#[derive(Debug, Parser)]
#[command(
    name = "clusterdiff",
    version,
    about = "Evaluate the quality and impact of clustering changes"
)]
pub struct Cli {
    /// Seed for every sampled quantity.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    /// Output file; stdout if absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Split, merge and Jaccard impact of Exp relative to Base.
    Impact(PairArgs),
    /// Good/bad split and merge rates and ΔPrecision.
    Quality {
        #[command(flatten)]
        pair: PairArgs,
        #[command(flatten)]
        judge: JudgeArgs,
    },
    /// Approximate ΔRecall from the quality rates and an assumed recall.
    DeltaRecall(DeltaRecallArgs),
    /// The IQ metric, exact against an Ideal or approximated from quality.
    Iq(IqArgs),
    /// IQ over a plane with Base at the origin and Ideal at (0, d).
    Geometry(GeometryArgs),
    /// Absolute quality of one clustering.
    Snapshot(SnapshotArgs),
    /// Validation study on synthetic worlds.
    Simulate(SimulateArgs),
}

#[derive(Debug, Args)]
pub struct PairArgs {
    /// Base clustering TSV: item, cluster[, weight].
    #[arg(long)]
    pub base: PathBuf,
    /// Exp clustering TSV.
    #[arg(long)]
    pub exp: PathBuf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    /// Venn enumeration; needs --ideal.
    Exact,
    /// Judge every pair of the universe.
    Exhaustive,
    /// Judge a seeded sample of pairs.
    Sampled,
}

#[derive(Debug, Args)]
pub struct JudgeArgs {
    /// Ideal clustering TSV, used as an oracle.
    #[arg(long)]
    pub ideal: Option<PathBuf>,
    /// Verdicts TSV: item_a, item_b, 0|1.
    #[arg(long, conflicts_with = "ideal")]
    pub judgements: Option<PathBuf>,
    /// Defaults to exact with --ideal and sampled otherwise.
    #[arg(long, value_enum)]
    pub mode: Option<Mode>,
    /// Pairs per stratum in sampled mode.
    #[arg(long, default_value_t = 1000)]
    pub n: usize,
    /// Where to write pairs that still need judgements.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum VariantChoice {
    #[value(name = "1")]
    One,
    #[value(name = "2")]
    Two,
    Both,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum PolicyChoice {
    Dampened,
    Fixed,
}

#[derive(Debug, Args)]
pub struct DiagramArgs {
    #[arg(long, value_enum, default_value_t = VariantChoice::One)]
    pub variant: VariantChoice,
    /// Assumed Precision_Base of the affected items (variant 2).
    #[arg(long)]
    pub precision_base: Option<f64>,
    #[arg(long, value_enum, default_value_t = PolicyChoice::Dampened)]
    pub policy: PolicyChoice,
    /// Assumed recall for the fixed policy.
    #[arg(long, default_value_t = 0.7)]
    pub recall: f64,
    /// Dampened policy: recall assumed for recall-positive changes.
    #[arg(long, default_value_t = 0.6)]
    pub recall_lo: f64,
    /// Dampened policy: recall assumed otherwise.
    #[arg(long, default_value_t = 0.8)]
    pub recall_hi: f64,
    #[arg(long, value_enum, default_value_t = ClipChoice::Clip)]
    pub clip: ClipChoice,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ClipChoice {
    Clip,
    Abort,
}

#[derive(Debug, Args)]
pub struct DeltaRecallArgs {
    #[command(flatten)]
    pub pair: PairArgs,
    #[command(flatten)]
    pub judge: JudgeArgs,
    #[command(flatten)]
    pub diagram: DiagramArgs,
    /// Write ΔRecall(T) against assumed recall as CSV.
    #[arg(long)]
    pub curve: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_CURVE_POINTS)]
    pub curve_points: usize,
    /// Write the variant-2 precision/recall heatmap as CSV.
    #[arg(long)]
    pub heatmap: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_HEATMAP_STEPS)]
    pub heatmap_steps: usize,
}

#[derive(Debug, Args)]
pub struct IqArgs {
    #[command(flatten)]
    pub pair: PairArgs,
    #[command(flatten)]
    pub judge: JudgeArgs,
    /// Also approximate IQ from the quality rates.
    #[arg(long)]
    pub approx_from_quality: bool,
    #[command(flatten)]
    pub diagram: DiagramArgs,
}

#[derive(Debug, Args)]
pub struct GeometryArgs {
    #[arg(long, default_value_t = 1.0)]
    pub d: f64,
    /// Points per axis.
    #[arg(long, default_value_t = 401)]
    pub grid: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ReferenceChoice {
    PerfectPrecision,
    PerfectRecall,
}

#[derive(Debug, Args)]
pub struct SnapshotArgs {
    /// Clustering TSV to evaluate.
    #[arg(long)]
    pub snapshot: PathBuf,
    #[command(flatten)]
    pub judge: JudgeArgs,
    #[arg(long, value_enum, default_value_t = ReferenceChoice::PerfectPrecision)]
    pub reference: ReferenceChoice,
    #[arg(long)]
    pub allow_perfect_recall: bool,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Study configuration JSON; the built-in default otherwise.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Write one row per change as CSV.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug)]
enum CliError {
    Lib(Error),
    Usage(String),
    JudgementsNeeded { manifest: PathBuf, pairs: usize },
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Lib(e)
    }
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_INPUT,
            CliError::JudgementsNeeded { .. } => EXIT_JUDGEMENTS_NEEDED,
            CliError::Lib(Error::Infeasible { .. } | Error::VariantInapplicable { .. }) => {
                EXIT_INFEASIBLE
            }
            CliError::Lib(Error::Unjudged(..)) => EXIT_JUDGEMENTS_NEEDED,
            CliError::Lib(_) => EXIT_INPUT,
        }
    }

    fn message(&self) -> String {
        match self {
            CliError::Lib(e) => e.to_string(),
            CliError::Usage(m) => m.clone(),
            CliError::JudgementsNeeded { manifest, pairs } => format!(
                "judgements needed: {pairs} pairs written to {}",
                manifest.display()
            ),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("clusterdiff: {}", e.message());
            e.exit_code()
        }
    }
}

fn write_file(path: &Path, text: &str) -> CliResult<()> {
    std::fs::write(path, text).map_err(|e| CliError::Lib(Error::io(path, e)))
}

fn emit(cli: &Cli, text: &str) -> CliResult<()> {
    match &cli.out {
        Some(path) => write_file(path, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn emit_report(cli: &Cli, report: &EvalReport) -> CliResult<()> {
    let text = match cli.format {
        Format::Json => report.to_json()?,
        Format::Csv => report.to_csv()?,
    };
    emit(cli, &text)
}

fn path_string(p: &Path) -> String {
    p.display().to_string()
}

struct Loaded {
    pair: ClusteringPair,
    ideal: Option<(Clustering, Partition)>,
}

fn load_pair(
    args: &PairArgs,
    judge: Option<&JudgeArgs>,
    report: &mut EvalReport,
) -> CliResult<Loaded> {
    let base = load_clustering(&args.base)?;
    let exp = load_clustering(&args.exp)?;
    let pair = restrict_to_common(&base, &exp)?;
    report
        .provenance
        .inputs
        .insert("base".into(), path_string(&args.base));
    report
        .provenance
        .inputs
        .insert("exp".into(), path_string(&args.exp));
    let r = pair.restriction();
    if r.dropped > 0 {
        report.warnings.push(format!(
            "{} items not in both clusterings were dropped",
            r.dropped
        ));
    }
    if !r.weight_conflicts.is_empty() {
        report.warnings.push(format!(
            "{} items have different weights in Base and Exp; Base weights were used",
            r.weight_conflicts.len()
        ));
    }
    report.restriction = Some(r.clone());
    let ideal = match judge.and_then(|j| j.ideal.as_ref()) {
        Some(path) => {
            let ideal = load_clustering(path)?;
            let aligned = pair.align(&ideal)?;
            report
                .provenance
                .inputs
                .insert("ideal".into(), path_string(path));
            Some((ideal, aligned))
        }
        None => None,
    };
    Ok(Loaded { pair, ideal })
}

fn judge_from(
    args: &JudgeArgs,
    ideal: Option<&Clustering>,
    report: &mut EvalReport,
) -> CliResult<Box<dyn Judge>> {
    if let Some(ideal) = ideal {
        return Ok(Box::new(IdealJudge::new(ideal)));
    }
    match &args.judgements {
        Some(path) => {
            report
                .provenance
                .inputs
                .insert("judgements".into(), path_string(path));
            Ok(Box::new(VerdictJudge::load(path)?))
        }
        None => Ok(Box::new(NoJudge)),
    }
}

fn resolve_mode(args: &JudgeArgs, has_ideal: bool) -> CliResult<Mode> {
    let mode = args.mode.unwrap_or(if has_ideal {
        Mode::Exact
    } else {
        Mode::Sampled
    });
    if mode == Mode::Exact && !has_ideal {
        return Err(CliError::Usage("exact mode requires --ideal".into()));
    }
    if mode == Mode::Sampled && args.n == 0 {
        return Err(CliError::Lib(Error::Config(
            "sample size must be positive".into(),
        )));
    }
    Ok(mode)
}

fn sampling(mode: Mode, n: usize, seed: u64) -> Sampling {
    match mode {
        Mode::Sampled => Sampling::Sampled { n, seed },
        _ => Sampling::Exhaustive,
    }
}

fn manifest_path(cli: &Cli, args: &JudgeArgs) -> PathBuf {
    if let Some(p) = &args.manifest {
        return p.clone();
    }
    match &cli.out {
        Some(out) => {
            let mut s = out.clone().into_os_string();
            s.push(".manifest.tsv");
            PathBuf::from(s)
        }
        None => PathBuf::from("clusterdiff-manifest.tsv"),
    }
}

/// Writes every distinct drawn pair that the judge cannot answer.
fn needs_judgements(
    cli: &Cli,
    args: &JudgeArgs,
    pair: &ClusteringPair,
    sampling: Sampling,
    judge: &dyn Judge,
) -> CliResult<CliError> {
    let sample = draw_quality_pairs(pair, sampling)?;
    let mut seen = BTreeSet::new();
    let missing: Vec<_> = sample
        .strata()
        .into_iter()
        .flat_map(|(_, s)| s.pairs.iter())
        .filter(|p| judge.equivalent(&p.item_a, &p.item_b).is_err())
        .filter(|p| {
            let key = if p.item_a <= p.item_b {
                (p.item_a.clone(), p.item_b.clone())
            } else {
                (p.item_b.clone(), p.item_a.clone())
            };
            seen.insert(key)
        })
        .collect();
    let path = manifest_path(cli, args);
    write_file(&path, &write_manifest(missing.iter().copied()))?;
    Ok(CliError::JudgementsNeeded {
        manifest: path,
        pairs: missing.len(),
    })
}

fn quality_section(
    cli: &Cli,
    args: &JudgeArgs,
    loaded: &Loaded,
    report: &mut EvalReport,
) -> CliResult<QualitySection> {
    let pair = &loaded.pair;
    let mode = resolve_mode(args, loaded.ideal.is_some())?;
    report
        .provenance
        .parameters
        .insert("mode".into(), json!(format!("{mode:?}").to_lowercase()));
    let awf = affected_items(pair).fraction;
    if mode == Mode::Exact {
        let (_, ideal) = loaded.ideal.as_ref().expect("checked by resolve_mode");
        let population = exact_quality(pair, ideal, Scope::Population)?;
        let affected = if awf > 0.0 {
            Some(exact_quality(pair, ideal, Scope::Affected)?)
        } else {
            None
        };
        let dr = exact_recall_precision(pair, ideal, Scope::Population)?.delta_recall;
        return Ok(QualitySection {
            mode: QualityMode::Exact,
            population,
            affected,
            std_errors: None,
            sampling: None,
            pairs_judged: None,
            delta_recall: Some(Estimate {
                value: dr,
                std_error: 0.0,
                ci_low: dr,
                ci_high: dr,
                pairs: 0,
            }),
            caveat: None,
        });
    }
    let s = sampling(mode, args.n, cli.seed);
    if let Sampling::Sampled { n, seed } = s {
        report.provenance.seed = Some(seed);
        report.provenance.parameters.insert("n".into(), json!(n));
    }
    let judge = judge_from(args, loaded.ideal.as_ref().map(|(c, _)| c), report)?;
    let sample = draw_quality_pairs(pair, s)?;
    let est = match estimate_quality_from_sample(&sample, judge.as_ref(), awf) {
        Ok(e) => e,
        Err(Error::Unjudged(..)) => {
            return Err(needs_judgements(cli, args, pair, s, judge.as_ref())?)
        }
        Err(e) => return Err(e.into()),
    };
    let delta_recall = match judge.ideal_weights(pair.population()) {
        Some(w) => {
            let dr_sample = delta_recall_pairs(pair, &w, s)?;
            if dr_sample.is_empty() {
                None
            } else {
                Some(estimate_delta_recall(&dr_sample, judge.as_ref())?)
            }
        }
        None => None,
    };
    let mut caveat = est.delta_precision_absent_reason.clone();
    if let Sampling::Sampled { n, .. } = s {
        if n < 30 {
            caveat = Some(format!(
                "normal-approximation intervals are unreliable with {n} pairs per stratum"
            ));
        }
    }
    Ok(QualitySection {
        mode: if mode == Mode::Sampled {
            QualityMode::Sampled
        } else {
            QualityMode::Exhaustive
        },
        population: est.population,
        affected: est.affected,
        std_errors: Some(est.std_errors),
        sampling: Some(s),
        pairs_judged: Some(est.pairs_judged),
        delta_recall,
        caveat,
    })
}

fn policy(args: &DiagramArgs) -> CliResult<RecallPolicy> {
    let p = match args.policy {
        PolicyChoice::Fixed => RecallPolicy::Fixed {
            recall: args.recall,
        },
        PolicyChoice::Dampened => RecallPolicy::Dampened {
            lo: args.recall_lo,
            hi: args.recall_hi,
        },
    };
    p.validate()?;
    Ok(p)
}

fn clip(args: &DiagramArgs) -> ClipPolicy {
    match args.clip {
        ClipChoice::Clip => ClipPolicy::Clip,
        ClipChoice::Abort => ClipPolicy::Abort,
    }
}

fn variants(args: &DiagramArgs) -> CliResult<Vec<Variant>> {
    let v2 = || {
        args.precision_base
            .map(|precision_base| Variant::V2 { precision_base })
            .ok_or_else(|| CliError::Usage("variant 2 requires --precision-base".into()))
    };
    Ok(match args.variant {
        VariantChoice::One => vec![Variant::V1],
        VariantChoice::Two => vec![v2()?],
        VariantChoice::Both => vec![Variant::V1, v2()?],
    })
}

fn diagram_estimates(
    inputs: &DiagramInputs,
    args: &DiagramArgs,
    report: &mut EvalReport,
) -> CliResult<(Vec<VariantEstimate>, Vec<Unavailable>)> {
    let policy = policy(args)?;
    let clip = clip(args);
    let requested = variants(args)?;
    report.provenance.parameters.insert(
        "policy".into(),
        serde_json::to_value(policy).map_err(Error::from)?,
    );
    report.provenance.parameters.insert(
        "clip".into(),
        serde_json::to_value(clip).map_err(Error::from)?,
    );
    if let Some(p) = args.precision_base {
        report
            .provenance
            .parameters
            .insert("precision_base".into(), json!(p));
    }
    let mut estimates = Vec::new();
    let mut unavailable = Vec::new();
    let mut last_err = None;
    for v in &requested {
        match estimate_with_policy(inputs, *v, policy, clip) {
            Ok(e) => {
                report.provenance.parameters.insert(
                    format!("assumed_recall_v{}", v.number()),
                    json!(e.diagram.assumed_recall_base),
                );
                if e.diagram.clipped || e.diagram.missing_clipped {
                    report
                        .warnings
                        .push(format!("variant {} diagram was clipped", v.number()));
                }
                estimates.push(VariantEstimate {
                    variant: v.number(),
                    policy,
                    clip,
                    clipped: e.diagram.clipped || e.diagram.missing_clipped,
                    diagram: e.diagram,
                    overall: e.overall,
                    jd_back_of_envelope: e.jd_back_of_envelope,
                });
            }
            Err(e @ (Error::VariantInapplicable { .. } | Error::Infeasible { .. }))
                if requested.len() > 1 =>
            {
                unavailable.push(Unavailable {
                    variant: v.number(),
                    reason: e.to_string(),
                });
                last_err = Some(e);
            }
            Err(e) => return Err(e.into()),
        }
    }
    if estimates.is_empty() {
        return Err(last_err.expect("at least one variant was requested").into());
    }
    Ok((estimates, unavailable))
}

fn diagram_inputs(
    loaded: &Loaded,
    quality: &QualitySection,
    report: &EvalReport,
) -> CliResult<DiagramInputs> {
    let impact = report
        .impact
        .clone()
        .unwrap_or_else(|| impact_metrics(&loaded.pair));
    if impact.affected_weight_fraction == 0.0 {
        return Err(Error::NoopChange.into());
    }
    Ok(DiagramInputs::new(&impact, &quality.population)?)
}

fn cmd_delta_recall(cli: &Cli, args: &DeltaRecallArgs) -> CliResult<EvalReport> {
    let mut report = EvalReport::new("delta-recall");
    let loaded = load_pair(&args.pair, Some(&args.judge), &mut report)?;
    report.impact = Some(impact_metrics(&loaded.pair));
    let quality = quality_section(cli, &args.judge, &loaded, &mut report)?;
    let inputs = diagram_inputs(&loaded, &quality, &report)?;
    let (estimates, unavailable) = diagram_estimates(&inputs, &args.diagram, &mut report)?;
    let mut section = DeltaRecallSection {
        estimates,
        unavailable,
        curve_path: None,
        heatmap_path: None,
    };
    if let Some(path) = &args.curve {
        let v = variants(&args.diagram)?[0];
        let curve = recall_curve(&inputs, v, args.curve_points, clip(&args.diagram))?;
        write_file(path, &curve_csv(&curve)?)?;
        section.curve_path = Some(path_string(path));
    }
    if let Some(path) = &args.heatmap {
        let heatmap = recall_heatmap(&inputs, (args.heatmap_steps, args.heatmap_steps))?;
        write_file(path, &heatmap_csv(&heatmap)?)?;
        section.heatmap_path = Some(path_string(path));
    }
    report.quality = Some(quality);
    report.delta_recall = Some(section);
    Ok(report)
}

fn cmd_iq(cli: &Cli, args: &IqArgs) -> CliResult<EvalReport> {
    let mut report = EvalReport::new("iq");
    let loaded = load_pair(&args.pair, Some(&args.judge), &mut report)?;
    let impact = impact_metrics(&loaded.pair);
    let mut section = IqSection::default();
    if let Some((_, ideal)) = &loaded.ideal {
        section.exact = Some(iq_exact(&loaded.pair, ideal)?);
    } else if !args.approx_from_quality {
        return Err(CliError::Usage(
            "iq needs --ideal or --approx-from-quality".into(),
        ));
    }
    report.impact = Some(impact.clone());
    if args.approx_from_quality {
        if impact.jaccard_distance <= 0.0 {
            return Err(Error::ZeroDiff.into());
        }
        let quality = quality_section(cli, &args.judge, &loaded, &mut report)?;
        let inputs = diagram_inputs(&loaded, &quality, &report)?;
        let (estimates, _) = diagram_estimates(&inputs, &args.diagram, &mut report)?;
        let e = &estimates[0];
        section.approx = Some(ApproxIq {
            variant: e.variant,
            policy: e.policy,
            diagram_clipped: e.clipped,
            result: iq_approx(
                &e.diagram,
                impact.affected_weight_fraction,
                impact.jaccard_distance,
            )?,
        });
        report.quality = Some(quality);
    }
    report.iq = Some(section);
    Ok(report)
}

fn cmd_snapshot(cli: &Cli, args: &SnapshotArgs) -> CliResult<EvalReport> {
    let mut report = EvalReport::new("snapshot");
    let snapshot = load_clustering(&args.snapshot)?;
    report
        .provenance
        .inputs
        .insert("snapshot".into(), path_string(&args.snapshot));
    let ideal = match &args.judge.ideal {
        Some(path) => {
            report
                .provenance
                .inputs
                .insert("ideal".into(), path_string(path));
            Some(load_clustering(path)?)
        }
        None => None,
    };
    let mode = resolve_mode(&args.judge, ideal.is_some())?;
    let s = sampling(mode, args.judge.n, cli.seed);
    if let Sampling::Sampled { seed, n } = s {
        report.provenance.seed = Some(seed);
        report.provenance.parameters.insert("n".into(), json!(n));
    }
    let judge = judge_from(&args.judge, ideal.as_ref(), &mut report)?;
    let options = SnapshotOptions {
        reference: match args.reference {
            ReferenceChoice::PerfectPrecision => Reference::PerfectPrecision,
            ReferenceChoice::PerfectRecall => Reference::PerfectRecall,
        },
        allow_perfect_recall: args.allow_perfect_recall,
        sampling: s,
    };
    match snapshot_eval(&snapshot, judge.as_ref(), options) {
        Ok(q) => report.snapshot = Some(q),
        Err(Error::Unjudged(..)) => {
            let exp = match options.reference {
                Reference::PerfectPrecision => Partition::singletons(snapshot.len()),
                Reference::PerfectRecall => Partition::single_cluster(snapshot.len()),
            };
            let pair = ClusteringPair::new(
                snapshot.population().clone(),
                snapshot.partition().clone(),
                exp,
            )?;
            return Err(needs_judgements(
                cli,
                &args.judge,
                &pair,
                s,
                judge.as_ref(),
            )?);
        }
        Err(e) => return Err(e.into()),
    }
    Ok(report)
}

fn cmd_simulate(cli: &Cli, args: &SimulateArgs) -> CliResult<EvalReport> {
    let mut report = EvalReport::new("simulate");
    let config = match &args.config {
        Some(path) => {
            report
                .provenance
                .inputs
                .insert("config".into(), path_string(path));
            let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            StudyConfig::from_json(&text)?
        }
        None => StudyConfig::default(),
    };
    report.provenance.seed = Some(config.world.seed);
    report.provenance.parameters.insert(
        "config".into(),
        serde_json::to_value(&config).map_err(Error::from)?,
    );
    let study = validation_study(&config)?;
    let csv_path = match (&args.csv, cli.format) {
        (Some(path), _) => {
            write_file(path, &study_csv(&study)?)?;
            Some(path_string(path))
        }
        (None, _) => None,
    };
    report.simulation = Some(SimulationSection {
        changes: study.rows.len(),
        delta_recall: study.delta_recall,
        jaccard_distance: study.jaccard_distance,
        iq: study.iq,
        iq_sign_agreement: study.iq_sign_agreement,
        csv_path,
    });
    Ok(report)
}

fn execute(cli: &Cli) -> CliResult<()> {
    let report = match &cli.command {
        Command::Impact(args) => {
            let mut report = EvalReport::new("impact");
            let loaded = load_pair(args, None, &mut report)?;
            report.impact = Some(impact_metrics(&loaded.pair));
            report
        }
        Command::Quality { pair, judge } => {
            let mut report = EvalReport::new("quality");
            let loaded = load_pair(pair, Some(judge), &mut report)?;
            report.impact = Some(impact_metrics(&loaded.pair));
            report.quality = Some(quality_section(cli, judge, &loaded, &mut report)?);
            report
        }
        Command::DeltaRecall(args) => cmd_delta_recall(cli, args)?,
        Command::Iq(args) => cmd_iq(cli, args)?,
        Command::Geometry(args) => {
            let points = iq_geometry(&GeometryGrid::around(args.d, args.grid))?;
            return emit(cli, &geometry_csv(&points)?);
        }
        Command::Snapshot(args) => cmd_snapshot(cli, args)?,
        Command::Simulate(args) => cmd_simulate(cli, args)?,
    };
    emit_report(cli, &report)
}

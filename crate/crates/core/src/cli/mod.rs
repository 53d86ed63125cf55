//! The `ordinal-bayes` command line.
//!
//! Every subcommand writes into a fresh output location (or one it is
//! explicitly allowed to replace with `--force`) and leaves a
//! `manifest.json` recording the resolved configuration, seeds, input
//! digests and artifacts. `rerun --manifest` replays a recorded run.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.

mod manifest;
mod report;

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

pub use manifest::{digest_bytes, digest_file, InputDigest, RunManifest, MANIFEST_FILE};
pub use report::{build_report, GrmSummary, MrfSummary, Report, RunSummary, SUMMARY_FILE};

use crate::error::{Error, ErrorKind, Result};
use crate::explore::{item_median_test, likert_summary, significance_stars};
use crate::grm::{self, covariate_effects, rank_discrimination, GrmPrior, PrecisionConvention, DEFAULT_HYPERPARAMETER};
use crate::mcmc::McmcConfig;
use crate::mrf::{self, median_probability_graph, write_edges_csv, MrfPrior};
use crate::output::fmt_f64;
use crate::simulate::{self, GrmSimSpec, MrfSimSpec};
use crate::survey::{self, clean, CleaningPolicy, Codebook, CovariateFilter, SurveyDataset};

/// Default root for output directories when `--out` is omitted.
pub const OUT_ROOT_ENV: &str = "ORDINAL_BAYES_OUT";

#[derive(Parser, Debug)]
#[command(name = "ordinal-bayes", version, about = "Bayesian network and item response analysis of ordinal survey data")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Clone, Debug)]
pub enum Command {
    /// Validate a survey file against its codebook and apply row cleaning.
    Ingest(IngestArgs),
    /// Likert distributions and Mood's median tests across subgroups.
    Explore(ExploreArgs),
    /// Spike-and-slab ordinal MRF structure learning.
    FitMrf(FitMrfArgs),
    /// Graded response model with latent regression on covariates.
    FitGrm(FitGrmArgs),
    /// Generate synthetic data with known parameters.
    Simulate(SimulateArgs),
    /// Merge an MRF run and a GRM run into one comparative report.
    Report(ReportArgs),
    /// Replay a run from its manifest into a new location.
    Rerun(RerunArgs),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Ingest(_) => "ingest",
            Command::Explore(_) => "explore",
            Command::FitMrf(_) => "fit-mrf",
            Command::FitGrm(_) => "fit-grm",
            Command::Simulate(_) => "simulate",
            Command::Report(_) => "report",
            Command::Rerun(_) => "rerun",
        }
    }
}

#[derive(Args, Clone, Debug, Serialize, Deserialize)]
pub struct DataArgs {
    /// Survey CSV with a header row.
    #[arg(long)]
    pub data: PathBuf,
    /// Codebook JSON; the bundled demo codebook when omitted.
    #[arg(long)]
    pub codebook: Option<PathBuf>,
    /// Comma-separated item abbreviations; all codebook items when omitted.
    #[arg(long, value_delimiter = ',')]
    pub items: Vec<String>,
    /// Keep only respondents matching e.g. `G=female,AG=13-15`.
    #[arg(long = "where", value_name = "FILTER")]
    pub filter: Option<String>,
}

#[derive(Args, Clone, Debug, Serialize, Deserialize)]
pub struct OutArgs {
    /// Output directory; defaults to `$ORDINAL_BAYES_OUT/<command>`
    /// (or `runs/<command>`).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Replace the output of an earlier run at the same location.
    #[arg(long)]
    #[serde(skip)]
    pub force: bool,
}

#[derive(Args, Clone, Debug, Serialize, Deserialize)]
pub struct IngestArgs {
    /// Survey CSV with a header row.
    #[arg(long)]
    pub data: PathBuf,
    /// Codebook JSON; the bundled demo codebook when omitted.
    #[arg(long)]
    pub codebook: Option<PathBuf>,
    /// Keep rows with some missing items.
    #[arg(long)]
    pub keep_incomplete: bool,
    /// Keep rows with every item missing.
    #[arg(long)]
    pub keep_empty: bool,
    /// Drop rows whose modal answer covers at least this share of items.
    #[arg(long)]
    pub max_straightline: Option<f64>,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Args, Clone, Debug, Serialize, Deserialize)]
pub struct ExploreArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Comma-separated grouping covariates.
    #[arg(long, value_delimiter = ',', required = true)]
    pub by: Vec<String>,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Args, Clone, Debug, Serialize, Deserialize)]
pub struct FitMrfArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Binary or categorical covariates entering as additional nodes.
    #[arg(long, value_delimiter = ',')]
    pub covariates: Vec<String>,
    #[arg(long, default_value_t = 20_000)]
    pub iterations: usize,
    #[arg(long = "burnin", default_value_t = 5_000)]
    pub burn_in: usize,
    #[arg(long, default_value_t = 1)]
    pub chains: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = 2.5)]
    pub slab_scale: f64,
    #[arg(long, default_value_t = 0.5)]
    pub inclusion_prior: f64,
    #[arg(long, default_value_t = 10.0)]
    pub threshold_sd: f64,
    #[arg(long, default_value_t = mrf::DEFAULT_BF_THRESHOLD)]
    pub bf_threshold: f64,
    /// Also write every retained draw to draws.csv.
    #[arg(long)]
    pub draws: bool,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Args, Clone, Debug, Serialize, Deserialize)]
pub struct FitGrmArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Covariates of the latent regression.
    #[arg(long, value_delimiter = ',')]
    pub covariates: Vec<String>,
    #[arg(long, default_value_t = 2)]
    pub chains: usize,
    #[arg(long, default_value_t = 15_000)]
    pub iterations: usize,
    #[arg(long = "burnin", default_value_t = 5_000)]
    pub burn_in: usize,
    #[arg(long, default_value_t = 10)]
    pub thin: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// How the prior hyperparameter is read.
    #[arg(long, value_enum, default_value_t = PrecisionConvention::Precision)]
    pub precision_convention: PrecisionConvention,
    #[arg(long, default_value_t = DEFAULT_HYPERPARAMETER)]
    pub prior_hyperparameter: f64,
    /// Also write every retained draw to grm_draws.csv.
    #[arg(long)]
    pub draws: bool,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum SimModel {
    Grm,
    Mrf,
}

#[derive(Args, Clone, Debug, Serialize, Deserialize)]
pub struct SimulateArgs {
    #[arg(long, value_enum)]
    pub model: SimModel,
    /// Simulation spec JSON.
    #[arg(long)]
    pub spec: PathBuf,
    /// Survey CSV to write. A codebook, the true parameters and the
    /// manifest are written next to it as `<stem>.codebook.json`,
    /// `<stem>.truth.json` and `<stem>.manifest.json`.
    #[arg(long)]
    pub out: PathBuf,
    /// MRF only: lay the simulated variables out as this codebook's items
    /// and covariates (matched by name) instead of numbering categories.
    #[arg(long)]
    pub codebook: Option<PathBuf>,
    /// Overwrite existing output files.
    #[arg(long)]
    #[serde(skip)]
    pub force: bool,
}

#[derive(Args, Clone, Debug, Serialize, Deserialize)]
pub struct ReportArgs {
    /// Run directories of fit-mrf and/or fit-grm.
    #[arg(long, num_args = 1.., required = true)]
    pub runs: Vec<PathBuf>,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Args, Clone, Debug)]
pub struct RerunArgs {
    /// manifest.json of an earlier run (or `<stem>.manifest.json` for simulate).
    #[arg(long)]
    pub manifest: PathBuf,
    /// New output location (directory, or CSV path for simulate runs).
    #[arg(long)]
    pub out: PathBuf,
    /// Replace the output of an earlier run at the same location.
    #[arg(long)]
    pub force: bool,
}

/// Where and what a successful run wrote.
#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub manifest_path: PathBuf,
    pub manifest: RunManifest,
}

impl RunOutcome {
    pub fn artifact_paths(&self) -> Vec<PathBuf> {
        let dir = self.manifest_path.parent().unwrap_or(Path::new("."));
        self.manifest.artifacts.iter().map(|a| dir.join(a)).collect()
    }
}

pub fn exit_code(kind: ErrorKind) -> i32 {
    match kind {
        ErrorKind::Usage => 1,
        ErrorKind::Data => 2,
        ErrorKind::Numerical => 3,
    }
}

/// Parses `argv` (program name first), runs the command and returns the
/// process exit code. Diagnostics go to stderr.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match execute(cli.command) {
        Ok(outcome) => {
            println!("{}", outcome.manifest_path.display());
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(e.kind())
        }
    }
}

pub fn execute(command: Command) -> Result<RunOutcome> {
    let name = command.name();
    match command {
        Command::Ingest(mut a) => {
            a.data = absolute(&a.data)?;
            a.codebook = a.codebook.as_deref().map(absolute).transpose()?;
            let dir = out_dir(&mut a.out, name)?;
            let force = a.out.force;
            in_dir(name, &a, &dir, force, |s| ingest(&a, s))
        }
        Command::Explore(mut a) => {
            resolve_data(&mut a.data)?;
            let dir = out_dir(&mut a.out, name)?;
            let force = a.out.force;
            in_dir(name, &a, &dir, force, |s| explore(&a, s))
        }
        Command::FitMrf(mut a) => {
            resolve_data(&mut a.data)?;
            let dir = out_dir(&mut a.out, name)?;
            let force = a.out.force;
            in_dir(name, &a, &dir, force, |s| fit_mrf(&a, s))
        }
        Command::FitGrm(mut a) => {
            resolve_data(&mut a.data)?;
            let dir = out_dir(&mut a.out, name)?;
            let force = a.out.force;
            in_dir(name, &a, &dir, force, |s| fit_grm(&a, s))
        }
        Command::Simulate(mut a) => {
            a.spec = absolute(&a.spec)?;
            a.out = absolute(&a.out)?;
            a.codebook = a.codebook.as_deref().map(absolute).transpose()?;
            simulate_to_file(&a)
        }
        Command::Report(mut a) => {
            a.runs = a.runs.iter().map(|p| absolute(p)).collect::<Result<_>>()?;
            let dir = out_dir(&mut a.out, name)?;
            let force = a.out.force;
            in_dir(name, &a, &dir, force, |s| report(&a, s))
        }
        Command::Rerun(a) => rerun(&a),
    }
}

fn rerun(a: &RerunArgs) -> Result<RunOutcome> {
    let m = RunManifest::load(&absolute(&a.manifest)?)?;
    m.verify_inputs()?;
    let config = m.config.clone();
    let parse = |e| Error::json("configuration recorded in manifest", e);
    let out = Some(a.out.clone());
    let command = match m.command.as_str() {
        "ingest" => {
            let mut c: IngestArgs = serde_json::from_value(config).map_err(parse)?;
            c.out = OutArgs { out, force: a.force };
            Command::Ingest(c)
        }
        "explore" => {
            let mut c: ExploreArgs = serde_json::from_value(config).map_err(parse)?;
            c.out = OutArgs { out, force: a.force };
            Command::Explore(c)
        }
        "fit-mrf" => {
            let mut c: FitMrfArgs = serde_json::from_value(config).map_err(parse)?;
            c.out = OutArgs { out, force: a.force };
            Command::FitMrf(c)
        }
        "fit-grm" => {
            let mut c: FitGrmArgs = serde_json::from_value(config).map_err(parse)?;
            c.out = OutArgs { out, force: a.force };
            Command::FitGrm(c)
        }
        "simulate" => {
            let mut c: SimulateArgs = serde_json::from_value(config).map_err(parse)?;
            c.out = a.out.clone();
            c.force = a.force;
            Command::Simulate(c)
        }
        "report" => {
            let mut c: ReportArgs = serde_json::from_value(config).map_err(parse)?;
            c.out = OutArgs { out, force: a.force };
            Command::Report(c)
        }
        other => return Err(Error::InvalidConfig(format!("manifest records unknown command {other:?}"))),
    };
    execute(command)
}

fn absolute(path: &Path) -> Result<PathBuf> {
    std::path::absolute(path).map_err(|e| Error::io(path, e))
}

fn resolve_data(d: &mut DataArgs) -> Result<()> {
    d.data = absolute(&d.data)?;
    d.codebook = d.codebook.as_deref().map(absolute).transpose()?;
    Ok(())
}

fn out_dir(out: &mut OutArgs, command: &str) -> Result<PathBuf> {
    let dir = match &out.out {
        Some(p) => p.clone(),
        None => {
            let root = std::env::var_os(OUT_ROOT_ENV).map(PathBuf::from).unwrap_or_else(|| PathBuf::from("runs"));
            root.join(command)
        }
    };
    let dir = absolute(&dir)?;
    out.out = Some(dir.clone());
    Ok(dir)
}

/// Artifacts and input digests collected while a command runs; nothing
/// touches the output location until the command has succeeded.
struct Sink {
    inputs: Vec<InputDigest>,
    artifacts: Vec<(String, Vec<u8>)>,
}

impl Sink {
    fn new() -> Self {
        Self {
            inputs: Vec::new(),
            artifacts: Vec::new(),
        }
    }

    fn input(&mut self, role: &str, path: &Path) -> Result<Vec<u8>> {
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        self.inputs.push(InputDigest {
            role: role.to_string(),
            path: path.to_path_buf(),
            sha256: digest_bytes(&bytes),
        });
        Ok(bytes)
    }

    fn add(&mut self, name: impl Into<String>, bytes: Vec<u8>) {
        self.artifacts.push((name.into(), bytes));
    }

    fn csv(&mut self, name: &str, write: impl FnOnce(&mut Vec<u8>) -> Result<()>) -> Result<()> {
        let mut buf = Vec::new();
        write(&mut buf)?;
        self.add(name, buf);
        Ok(())
    }

    fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::json(name, e))?;
        text.push('\n');
        self.add(name, text.into_bytes());
        Ok(())
    }
}

/// Refuses to clobber an existing run unless forced; a forced run removes
/// the artifacts listed by the previous manifest.
fn prepare(dir: &Path, manifest_name: &str, claimed: &[PathBuf], force: bool) -> Result<()> {
    let manifest_path = dir.join(manifest_name);
    let taken = manifest_path.exists() || claimed.iter().any(|p| p.exists());
    let non_empty_dir = manifest_name == MANIFEST_FILE
        && dir.is_dir()
        && fs::read_dir(dir).map_err(|e| Error::io(dir, e))?.next().is_some();
    if (taken || non_empty_dir) && !force {
        return Err(Error::OutputExists(dir.to_path_buf()));
    }
    if force && manifest_path.exists() {
        if let Ok(old) = RunManifest::load(&manifest_path) {
            for a in &old.artifacts {
                let _ = fs::remove_file(dir.join(a));
            }
        }
        let _ = fs::remove_file(&manifest_path);
    }
    Ok(())
}

fn finish<A: Serialize>(
    command: &str,
    args: &A,
    dir: &Path,
    manifest_name: &str,
    sink: Sink,
    seeds: Vec<u64>,
    start: Instant,
) -> Result<RunOutcome> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut artifacts = Vec::new();
    for (name, bytes) in &sink.artifacts {
        let path = dir.join(name);
        fs::write(&path, bytes).map_err(|e| Error::io(&path, e))?;
        artifacts.push(name.clone());
    }
    let manifest = RunManifest {
        tool: "ordinal-bayes".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        command: command.into(),
        config: serde_json::to_value(args).map_err(|e| Error::json("configuration", e))?,
        seeds,
        inputs: sink.inputs,
        artifacts,
        duration_seconds: start.elapsed().as_secs_f64(),
    };
    let manifest_path = dir.join(manifest_name);
    let mut text = serde_json::to_string_pretty(&manifest).map_err(|e| Error::json("manifest", e))?;
    text.push('\n');
    fs::write(&manifest_path, text).map_err(|e| Error::io(&manifest_path, e))?;
    Ok(RunOutcome { manifest_path, manifest })
}

fn in_dir<A: Serialize>(
    command: &str,
    args: &A,
    dir: &Path,
    force: bool,
    body: impl FnOnce(&mut Sink) -> Result<Vec<u64>>,
) -> Result<RunOutcome> {
    let start = Instant::now();
    prepare(dir, MANIFEST_FILE, &[], force)?;
    let mut sink = Sink::new();
    let seeds = body(&mut sink)?;
    prepare(dir, MANIFEST_FILE, &[], force)?;
    finish(command, args, dir, MANIFEST_FILE, sink, seeds, start)
}

fn load_codebook(sink: &mut Sink, path: Option<&Path>) -> Result<Codebook> {
    match path {
        None => Ok(Codebook::demo()),
        Some(p) => {
            let bytes = sink.input("codebook", p)?;
            let text = String::from_utf8(bytes).map_err(|_| Error::InvalidCodebook("codebook is not UTF-8".into()))?;
            Codebook::from_json(&text)
        }
    }
}

fn load_dataset(sink: &mut Sink, path: &Path, codebook: Option<&Path>) -> Result<SurveyDataset> {
    let cb = load_codebook(sink, codebook)?;
    let bytes = sink.input("data", path)?;
    survey::read_csv(&bytes[..], &cb)
}

fn load_selection(sink: &mut Sink, d: &DataArgs) -> Result<SurveyDataset> {
    let ds = load_dataset(sink, &d.data, d.codebook.as_deref())?;
    let items = if d.items.is_empty() {
        ds.codebook().item_abbrs()
    } else {
        d.items.clone()
    };
    let filter = match &d.filter {
        Some(f) => CovariateFilter::parse(f)?,
        None => CovariateFilter::all(),
    };
    ds.subset(&items, &filter)
}

/// Listwise deletion over the selected items and covariates.
fn complete_cases(ds: &SurveyDataset, covariates: &[String]) -> Result<(SurveyDataset, usize)> {
    let columns = covariates
        .iter()
        .map(|c| ds.covariate(c).map(|(_, col)| col))
        .collect::<Result<Vec<_>>>()?;
    let keep: Vec<usize> = (0..ds.n_rows())
        .filter(|&r| ds.row(r).iter().all(Option::is_some) && columns.iter().all(|c| !c.is_missing(r)))
        .collect();
    let dropped = ds.n_rows() - keep.len();
    Ok((ds.select_rows(&keep), dropped))
}

fn ingest(a: &IngestArgs, sink: &mut Sink) -> Result<Vec<u64>> {
    let ds = load_dataset(sink, &a.data, a.codebook.as_deref())?;
    let policy = CleaningPolicy {
        drop_all_missing: !a.keep_empty,
        drop_any_missing: !a.keep_incomplete,
        max_straightline: a.max_straightline,
    };
    let (cleaned, report) = clean(&ds, &policy)?;
    sink.csv("clean.csv", |w| survey::write_csv(&cleaned, w))?;
    sink.json("codebook.json", cleaned.codebook())?;
    sink.json("cleaning.json", &serde_json::json!({ "policy": policy, "report": report }))?;
    Ok(Vec::new())
}

fn explore(a: &ExploreArgs, sink: &mut Sink) -> Result<Vec<u64>> {
    let ds = load_selection(sink, &a.data)?;
    let mut tests = Vec::new();
    {
        let mut w = csv::Writer::from_writer(&mut tests);
        w.write_record([
            "item", "grouping", "groups", "n", "pooled_median", "chi_square", "df", "p_value", "stars", "degenerate",
        ])?;
        for item in ds.codebook().item_abbrs() {
            for by in &a.by {
                let t = item_median_test(&ds, &item, by)?;
                w.write_record([
                    item.clone(),
                    by.clone(),
                    t.groups.join("|"),
                    t.total().to_string(),
                    fmt_f64(t.pooled_median),
                    fmt_f64(t.chi_square),
                    t.df.to_string(),
                    fmt_f64(t.p_value),
                    significance_stars(t.p_value)?.to_string(),
                    t.degenerate.to_string(),
                ])?;
            }
        }
        w.flush().map_err(|e| Error::Csv(e.to_string()))?;
    }
    sink.add("explore.csv", tests);
    let mut likert = Vec::new();
    {
        let mut w = csv::Writer::from_writer(&mut likert);
        w.write_record(["item", "grouping", "group", "n", "category", "count", "proportion", "low", "high"])?;
        for item in ds.codebook().item_abbrs() {
            let groupings = std::iter::once(None).chain(a.by.iter().map(|b| Some(b.as_str())));
            for by in groupings {
                for s in likert_summary(&ds, &item, by)? {
                    for (c, (&count, &p)) in s.counts.iter().zip(&s.proportions).enumerate() {
                        w.write_record([
                            item.clone(),
                            by.unwrap_or("all").to_string(),
                            s.group.clone().unwrap_or_else(|| "all".into()),
                            s.n.to_string(),
                            (c + 1).to_string(),
                            count.to_string(),
                            fmt_f64(p),
                            fmt_f64(s.low),
                            fmt_f64(s.high),
                        ])?;
                    }
                }
            }
        }
        w.flush().map_err(|e| Error::Csv(e.to_string()))?;
    }
    sink.add("likert.csv", likert);
    Ok(Vec::new())
}

fn fit_mrf(a: &FitMrfArgs, sink: &mut Sink) -> Result<Vec<u64>> {
    let ds = load_selection(sink, &a.data)?;
    let (ds, rows_dropped) = complete_cases(&ds, &a.covariates)?;
    let data = ds.ordinal_matrix(&a.covariates)?;
    let prior = MrfPrior {
        slab_scale: a.slab_scale,
        inclusion_prob: a.inclusion_prior,
        threshold_sd: a.threshold_sd,
    };
    let config = McmcConfig {
        iterations: a.iterations,
        burn_in: a.burn_in,
        thin: 1,
        chains: a.chains,
        seed: a.seed,
    };
    let post = mrf::fit(&data, &prior, &config)?;
    let graph = median_probability_graph(&post, a.bf_threshold)?;
    sink.csv("edges.csv", |w| write_edges_csv(&post, a.bf_threshold, w))?;
    sink.add("network.dot", graph.to_dot().into_bytes());
    if a.draws {
        sink.csv("draws.csv", |w| post.write_draws_csv(w))?;
    }
    let summary = RunSummary::Mrf(MrfSummary {
        items: ds.codebook().item_abbrs(),
        covariates: a.covariates.clone(),
        nodes: post.names().to_vec(),
        n_rows: data.n_rows(),
        rows_dropped,
        bf_threshold: a.bf_threshold,
        clusters: graph.conclusive_clusters(),
        edges: graph.edges,
    });
    sink.json(SUMMARY_FILE, &summary)?;
    Ok(vec![a.seed])
}

fn fit_grm(a: &FitGrmArgs, sink: &mut Sink) -> Result<Vec<u64>> {
    let ds = load_selection(sink, &a.data)?;
    let (ds, rows_dropped) = complete_cases(&ds, &a.covariates)?;
    let data = ds.item_matrix()?;
    let x = ds.covariate_design(&a.covariates)?;
    let prior = GrmPrior::from_hyperparameter(a.prior_hyperparameter, a.precision_convention);
    let config = McmcConfig {
        iterations: a.iterations,
        burn_in: a.burn_in,
        thin: a.thin,
        chains: a.chains,
        seed: a.seed,
    };
    let post = grm::fit(&data, &x, &prior, &config)?;
    sink.csv("grm_params.csv", |w| post.write_params_csv(w))?;
    sink.csv("grm_items.csv", |w| post.write_items_csv(w))?;
    sink.csv("grm_theta.csv", |w| post.write_theta_csv(w))?;
    let effects = covariate_effects(&post);
    let mut buf = Vec::new();
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        w.write_record(["covariate", "mean", "sd", "ci_low", "ci_high", "prob_positive"])?;
        for e in &effects {
            w.write_record([
                e.covariate.clone(),
                fmt_f64(e.mean),
                fmt_f64(e.sd),
                fmt_f64(e.ci_low),
                fmt_f64(e.ci_high),
                fmt_f64(e.prob_positive),
            ])?;
        }
        w.flush().map_err(|e| Error::Csv(e.to_string()))?;
    }
    sink.add("grm_effects.csv", buf);
    if a.draws {
        sink.csv("grm_draws.csv", |w| post.write_draws_csv(w))?;
    }
    let summary = RunSummary::Grm(GrmSummary {
        items: ds.codebook().item_abbrs(),
        covariates: x.names().to_vec(),
        n_rows: data.n_rows(),
        rows_dropped,
        max_rhat: post.max_rhat(),
        ranking: rank_discrimination(&post),
        effects,
    });
    sink.json(SUMMARY_FILE, &summary)?;
    Ok(vec![a.seed])
}

fn simulate_to_file(a: &SimulateArgs) -> Result<RunOutcome> {
    let start = Instant::now();
    let dir = a.out.parent().map(Path::to_path_buf).unwrap_or_else(|| PathBuf::from("."));
    let file = a
        .out
        .file_name()
        .ok_or_else(|| Error::InvalidConfig(format!("{} is not a file path", a.out.display())))?
        .to_string_lossy()
        .into_owned();
    let stem = a.out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| file.clone());
    let (codebook_name, truth_name, manifest_name) = (
        format!("{stem}.codebook.json"),
        format!("{stem}.truth.json"),
        format!("{stem}.manifest.json"),
    );
    let claimed = [a.out.clone(), dir.join(&codebook_name), dir.join(&truth_name)];
    prepare(&dir, &manifest_name, &claimed, a.force)?;

    let mut sink = Sink::new();
    let bytes = sink.input("spec", &a.spec)?;
    let text = String::from_utf8(bytes).map_err(|_| Error::InvalidConfig("spec is not UTF-8".into()))?;
    let seed = match a.model {
        SimModel::Grm => {
            if a.codebook.is_some() {
                return Err(Error::InvalidConfig("--codebook applies to MRF simulations only".into()));
            }
            let spec = GrmSimSpec::from_json(&text)?;
            let sim = simulate::gen_grm(&spec)?;
            sink.csv(&file, |w| survey::write_csv(&sim.dataset, w))?;
            sink.json(&codebook_name, sim.dataset.codebook())?;
            sink.json(&truth_name, &sim.truth)?;
            spec.seed
        }
        SimModel::Mrf => {
            let spec = MrfSimSpec::from_json(&text)?;
            let state = spec.state()?;
            let data = simulate::gen_mrf_spec(&spec)?;
            let ds = match a.codebook.as_deref() {
                Some(p) => simulate::dataset_with_codebook(&data, &load_codebook(&mut sink, Some(p))?)?,
                None => simulate::mrf_dataset(&data)?,
            };
            sink.csv(&file, |w| survey::write_csv(&ds, w))?;
            sink.json(&codebook_name, ds.codebook())?;
            let edges: Vec<_> = state
                .edges()
                .filter(|&(i, j)| state.theta(i, j) != 0.0)
                .map(|(i, j)| serde_json::json!({ "a": spec.names()[i], "b": spec.names()[j], "theta": state.theta(i, j) }))
                .collect();
            let thresholds: Vec<_> = (0..state.p()).map(|i| state.thresholds(i).to_vec()).collect();
            sink.json(&truth_name, &serde_json::json!({ "nodes": spec.names(), "thresholds": thresholds, "edges": edges }))?;
            spec.seed
        }
    };
    prepare(&dir, &manifest_name, &claimed, a.force)?;
    finish("simulate", a, &dir, &manifest_name, sink, vec![seed], start)
}

fn report(a: &ReportArgs, sink: &mut Sink) -> Result<Vec<u64>> {
    let mut runs = Vec::new();
    for dir in &a.runs {
        let path = dir.join(SUMMARY_FILE);
        let bytes = sink.input("run", &path)?;
        let summary: RunSummary =
            serde_json::from_slice(&bytes).map_err(|e| Error::json(path.display().to_string(), e))?;
        runs.push(summary);
    }
    let report = build_report(runs)?;
    sink.json("report.json", &report)?;
    sink.add("report.txt", report.render_text().into_bytes());
    Ok(Vec::new())
}

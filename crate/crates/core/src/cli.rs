//! The `cadorder` command-line tool.
//!
//! [`run`] takes the argument vector and output streams explicitly so the
//! binary is a thin wrapper and tests can drive every subcommand in-process.

use std::fs::File;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::evalharness::{
    first_choices, format_report_table, load_problems, load_timings, parse_selector, survival_curve,
    write_choices_csv, write_report_csv, EvalConfig, MetricsReport, Problem, Selector, TimingTable, Workload,
    DEFAULT_PENALTY_FACTOR, DEFAULT_TIME_LIMIT,
};
use crate::features::{enumerate_features, evaluate_feature, MergedFeature};
use crate::heuristics::{enumerate_triples, greedy_ordering, mods_ordering, TiePolicy, TieStats};
use crate::poly::{lazard_projection, lazard_projection_raw, parse_system, PolySystem};
use crate::xai_rank::{
    load_shap_csv, rank_pipeline, ratio_to_f64, top_k, write_ranking_csv, write_raw_csv, write_voted_csv,
    VoteMethod, VotedScores,
};

/// Heuristics evaluated when `evaluate` or `survival` get no `--heuristic`.
pub const DEFAULT_HEURISTICS: [&str; 6] = ["virtual-best", "Brown", "gmods", "mods", "free-mods", "random"];

#[derive(Parser, Debug)]
#[command(
    name = "cadorder",
    version,
    about = "Variable-ordering heuristics for cylindrical algebraic decomposition"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Print the feature vector of a system, or the list of feature names
    Features(FeaturesArgs),
    /// Print the Lazard projection of a system with respect to one variable
    Project(ProjectArgs),
    /// Print the variable ordering a heuristic picks for a system
    Choose(ChooseArgs),
    /// Aggregate a SHAP table into merged feature rankings and vote across models
    Rank(RankArgs),
    /// Evaluate every ordered triple of the top six features
    Triples(TriplesArgs),
    /// Evaluate heuristics against a timing table
    Evaluate(EvaluateArgs),
    /// Emit survival-curve points for heuristics on a timing table
    Survival(SurvivalArgs),
}

#[derive(Args, Debug)]
pub struct SystemArgs {
    /// Problem set, one JSON object per line: {"id": .., "vars": [..], "polys": [..]}
    #[arg(long, requires = "id", conflicts_with_all = ["vars", "poly"])]
    pub problems: Option<PathBuf>,
    /// Problem identifier to take from --problems
    #[arg(long)]
    pub id: Option<String>,
    /// Comma-separated variable names, in index order
    #[arg(long, value_delimiter = ',', default_value = "x1,x2,x3")]
    pub vars: Vec<String>,
    /// A polynomial of the system (repeat for several)
    #[arg(long)]
    pub poly: Vec<String>,
}

impl SystemArgs {
    fn load(&self) -> Result<(Vec<String>, PolySystem)> {
        if let Some(path) = &self.problems {
            let id = self.id.as_deref().expect("clap enforces --id");
            let problems = read_problems(path)?;
            let p = problems
                .into_iter()
                .find(|p| p.id == id)
                .ok_or_else(|| Error::InvalidArgument(format!("no problem `{id}` in {}", path.display())))?;
            return Ok((p.vars, p.system));
        }
        if self.poly.is_empty() {
            return Err(Error::InvalidArgument("give --poly at least once, or --problems with --id".into()));
        }
        Ok((self.vars.clone(), parse_system(&self.poly, &self.vars)?))
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum Format {
    Csv,
    Table,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum Vote {
    Dowdall,
    Borda,
}

impl From<Vote> for VoteMethod {
    fn from(v: Vote) -> Self {
        match v {
            Vote::Dowdall => VoteMethod::Dowdall,
            Vote::Borda => VoteMethod::Borda,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum Ties {
    Random,
    LowestIndex,
}

#[derive(Args, Debug)]
pub struct FeaturesArgs {
    #[command(flatten)]
    pub system: SystemArgs,
    /// Print the enumerated feature names instead of their values
    #[arg(long)]
    pub list: bool,
    /// Output format
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Args, Debug)]
pub struct ProjectArgs {
    #[command(flatten)]
    pub system: SystemArgs,
    /// Variable to eliminate
    #[arg(long = "var")]
    pub var: String,
    /// Print the projection factors before squarefree and GCD-free simplification
    #[arg(long)]
    pub raw: bool,
}

#[derive(Args, Debug)]
pub struct ChooseArgs {
    #[command(flatten)]
    pub system: SystemArgs,
    /// Heuristic: Brown, gmods, mods, T1, T2, random, or a chain such as SumMaxV>AvgAvgV
    #[arg(long, default_value = "gmods")]
    pub heuristic: String,
    /// Seed for the random tie-breaker
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// How ties left after the last feature are broken
    #[arg(long, value_enum, default_value_t = Ties::Random)]
    pub tie_policy: Ties,
}

#[derive(Args, Debug)]
pub struct RankArgs {
    /// SHAP table with columns model,class,instance,feature,shap_value
    #[arg(long)]
    pub shap: PathBuf,
    /// Voting rule used to combine the per-model rankings
    #[arg(long, value_enum, default_value_t = Vote::Dowdall)]
    pub vote: Vote,
    /// Print only the names of the K best features, one per line
    #[arg(long)]
    pub top: Option<usize>,
    /// Directory for per-stage CSVs (raw, variable-merged, proportional, voted)
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    /// Output format for the voted table
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Args, Debug)]
pub struct EvalArgs {
    /// Problem set, one JSON object per line
    #[arg(long)]
    pub problems: PathBuf,
    /// Timing table with columns problem,ord1,...,ordK
    #[arg(long)]
    pub timings: PathBuf,
    /// Master seed from which per-problem seeds are derived
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Repetitions per problem, averaged
    #[arg(long, default_value_t = 1)]
    pub reps: u64,
    /// Time limit in seconds; slower runs count as timeouts
    #[arg(long, default_value_t = DEFAULT_TIME_LIMIT)]
    pub time_limit: f64,
    /// A timeout costs this multiple of the time limit
    #[arg(long, default_value_t = DEFAULT_PENALTY_FACTOR)]
    pub penalty_factor: f64,
    /// Add the wall-clock time of each heuristic to its total time
    #[arg(long)]
    pub charge_heuristic_time: bool,
    /// Output format
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

impl EvalArgs {
    fn config(&self) -> EvalConfig {
        EvalConfig {
            repetitions: self.reps,
            master_seed: self.seed,
            penalty_factor: self.penalty_factor,
            charge_heuristic_time: self.charge_heuristic_time,
        }
    }

    fn load(&self) -> Result<(Vec<Problem>, TimingTable)> {
        let problems = read_problems(&self.problems)?;
        let table = load_timings(open(&self.timings)?, self.time_limit)?;
        Ok((problems, table))
    }
}

#[derive(Args, Debug)]
pub struct TriplesArgs {
    #[command(flatten)]
    pub eval: EvalArgs,
    /// Six comma-separated features, best first
    #[arg(long, value_delimiter = ',', conflicts_with = "shap", required_unless_present = "shap")]
    pub top_features: Vec<String>,
    /// Take the top six features from the Dowdall vote over this SHAP table
    #[arg(long)]
    pub shap: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct EvaluateArgs {
    #[command(flatten)]
    pub eval: EvalArgs,
    /// Heuristic to evaluate (repeatable); also mods, free-mods, virtual-best
    #[arg(long)]
    pub heuristic: Vec<String>,
    /// Write per-problem choices of the first heuristic to this CSV
    #[arg(long)]
    pub choices_out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SurvivalArgs {
    #[command(flatten)]
    pub eval: EvalArgs,
    /// Heuristic to trace (repeatable)
    #[arg(long)]
    pub heuristic: Vec<String>,
}

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

fn read_problems(path: &Path) -> Result<Vec<Problem>> {
    load_problems(BufReader::new(open(path)?))
}

/// Parses `argv` (including the program name) and runs the subcommand.
/// Returns the process exit status: 0 success, 1 input error, 2 internal error.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(err, "{text}");
                1
            } else {
                let _ = write!(out, "{text}");
                0
            };
        }
    };
    match execute(&cli.command, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            if e.is_internal() {
                2
            } else {
                1
            }
        }
    }
}

pub fn execute(command: &Command, out: &mut dyn Write) -> Result<()> {
    match command {
        Command::Features(a) => features(a, out),
        Command::Project(a) => project(a, out),
        Command::Choose(a) => choose(a, out),
        Command::Rank(a) => rank(a, out),
        Command::Triples(a) => triples(a, out),
        Command::Evaluate(a) => evaluate(a, out),
        Command::Survival(a) => survival(a, out),
    }
}

fn features(a: &FeaturesArgs, out: &mut dyn Write) -> Result<()> {
    let (_, system) = a.system.load()?;
    let descriptors = enumerate_features(system.nvars());
    if a.list {
        for d in descriptors {
            writeln!(out, "{d}")?;
        }
        return Ok(());
    }
    let rows: Vec<(String, String)> = descriptors
        .iter()
        .map(|d| Ok((d.name(), evaluate_feature(d, &system)?.to_string())))
        .collect::<Result<_>>()?;
    match a.format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            w.write_record(["feature", "value"])?;
            for (n, v) in &rows {
                w.write_record([n, v])?;
            }
            w.flush()?;
        }
        Format::Table => {
            let width = rows.iter().map(|r| r.0.len()).max().unwrap_or(0);
            for (n, v) in &rows {
                writeln!(out, "{n:<width$}  {v}")?;
            }
        }
    }
    Ok(())
}

fn var_index(names: &[String], var: &str) -> Result<usize> {
    names
        .iter()
        .position(|n| n == var)
        .ok_or_else(|| Error::InvalidArgument(format!("unknown variable `{var}`")))
}

fn project(a: &ProjectArgs, out: &mut dyn Write) -> Result<()> {
    let (names, system) = a.system.load()?;
    let v = var_index(&names, &a.var)?;
    let polys = if a.raw {
        lazard_projection_raw(&system, v)?
    } else {
        lazard_projection(&system, v)?.polys().to_vec()
    };
    for p in polys {
        writeln!(out, "{}", p.to_string_with(&names))?;
    }
    Ok(())
}

fn write_tie_stats(out: &mut dyn Write, stats: &TieStats) -> Result<()> {
    for (i, d) in stats.decisions.iter().enumerate() {
        let after: Vec<String> = d.tied_after_link.iter().map(usize::to_string).collect();
        writeln!(
            out,
            "step {}: candidates {}, tied after links [{}], tie-breaker {}",
            i + 1,
            d.candidates,
            after.join(", "),
            if d.random_fired {
                "random"
            } else if d.fallback_used {
                "lowest-index"
            } else {
                "unused"
            }
        )?;
    }
    Ok(())
}

fn choose(a: &ChooseArgs, out: &mut dyn Write) -> Result<()> {
    let (names, system) = a.system.load()?;
    let named = parse_selector(&a.heuristic)?;
    match named.selector {
        Selector::Mods => {
            let (ordering, product) = mods_ordering(&system)?;
            writeln!(out, "{}", ordering.to_string_with(&names))?;
            writeln!(out, "class {}", ordering.class_label())?;
            writeln!(out, "product {product}")?;
        }
        Selector::Heuristic(chain) => {
            let policy = match a.tie_policy {
                Ties::Random => TiePolicy::Random,
                Ties::LowestIndex => TiePolicy::LowestIndex,
            };
            let chain = chain.with_tie_policy(policy);
            let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
            let (ordering, stats) = greedy_ordering(&system, &chain, &mut rng)?;
            writeln!(out, "{}", ordering.to_string_with(&names))?;
            writeln!(out, "class {}", ordering.class_label())?;
            write_tie_stats(out, &stats)?;
        }
        Selector::VirtualBest => {
            return Err(Error::InvalidArgument("virtual-best needs timings; use `evaluate`".into()));
        }
    }
    Ok(())
}

fn write_voted(out: &mut dyn Write, voted: &VotedScores, format: Format) -> Result<()> {
    match format {
        Format::Csv => write_voted_csv(out, voted),
        Format::Table => {
            let width = voted.entries.iter().map(|e| e.0.merged_name().len()).max().unwrap_or(0);
            for (i, (f, s)) in voted.entries.iter().enumerate() {
                writeln!(
                    out,
                    "{:>2}  {:<width$}  {:<12}  {:.4}",
                    i + 1,
                    f.merged_name(),
                    f.camel_name(),
                    ratio_to_f64(s)
                )?;
            }
            Ok(())
        }
    }
}

fn create(path: &Path) -> Result<File> {
    File::create(path)
        .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

fn rank(a: &RankArgs, out: &mut dyn Write) -> Result<()> {
    let records = load_shap_csv(open(&a.shap)?)?;
    let report = rank_pipeline(&records, a.vote.into())?;
    if let Some(dir) = &a.out_dir {
        std::fs::create_dir_all(dir)?;
        write_raw_csv(create(&dir.join("raw.csv"))?, &report.raw)?;
        write_ranking_csv(create(&dir.join("variable_merged.csv"))?, &report.variable_merged)?;
        write_ranking_csv(create(&dir.join("proportional.csv"))?, &report.proportional)?;
        let voted_name = match a.vote {
            Vote::Dowdall => "voted_dowdall.csv",
            Vote::Borda => "voted_borda.csv",
        };
        write_voted_csv(create(&dir.join(voted_name))?, &report.voted)?;
    }
    match a.top {
        Some(k) => {
            for f in top_k(&report.voted, k)? {
                writeln!(out, "{}", f.merged_name())?;
            }
            Ok(())
        }
        None => write_voted(out, &report.voted, a.format),
    }
}

fn write_reports(out: &mut dyn Write, reports: &[MetricsReport], format: Format) -> Result<()> {
    match format {
        Format::Csv => write_report_csv(out, reports),
        Format::Table => Ok(out.write_all(format_report_table(reports).as_bytes())?),
    }
}

fn heuristic_names(given: &[String]) -> Vec<String> {
    if given.is_empty() {
        DEFAULT_HEURISTICS.iter().map(|s| s.to_string()).collect()
    } else {
        given.to_vec()
    }
}

fn evaluate(a: &EvaluateArgs, out: &mut dyn Write) -> Result<()> {
    let (problems, table) = a.eval.load()?;
    let workload = Workload::new(&problems, &table)?;
    let config = a.eval.config();
    let reports = heuristic_names(&a.heuristic)
        .iter()
        .map(|h| workload.evaluate(&parse_selector(h)?, &config))
        .collect::<Result<Vec<_>>>()?;
    if let (Some(path), Some(first)) = (&a.choices_out, reports.first()) {
        write_choices_csv(create(path)?, &table, first)?;
    }
    write_reports(out, &reports, a.eval.format)
}

fn triples(a: &TriplesArgs, out: &mut dyn Write) -> Result<()> {
    let top: Vec<MergedFeature> = match &a.shap {
        Some(path) => {
            let records = load_shap_csv(open(path)?)?;
            top_k(&rank_pipeline(&records, VoteMethod::Dowdall)?.voted, 6)?
        }
        None => a.top_features.iter().map(|n| MergedFeature::parse_camel(n.trim())).collect::<Result<_>>()?,
    };
    if top.len() != 6 {
        return Err(Error::InvalidArgument(format!("need six top features, got {}", top.len())));
    }
    let chains = enumerate_triples(&top)?;
    let (problems, table) = a.eval.load()?;
    let workload = Workload::new(&problems, &table)?;
    let config = a.eval.config();
    let mut reports = chains
        .iter()
        .map(|c| workload.evaluate(&parse_selector(&c.name())?, &config))
        .collect::<Result<Vec<_>>>()?;
    // stable: equal totals keep enumeration order
    reports.sort_by(|x, y| x.total_time.total_cmp(&y.total_time));
    write_reports(out, &reports, a.eval.format)
}

fn survival(a: &SurvivalArgs, out: &mut dyn Write) -> Result<()> {
    let (problems, table) = a.eval.load()?;
    let workload = Workload::new(&problems, &table)?;
    let config = a.eval.config();
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["heuristic", "time", "completed"])?;
    for h in heuristic_names(&a.heuristic) {
        let report = workload.evaluate(&parse_selector(&h)?, &config)?;
        for (t, n) in survival_curve(&table, &first_choices(&report))? {
            w.write_record([h.clone(), t.to_string(), n.to_string()])?;
        }
    }
    w.flush()?;
    Ok(())
}

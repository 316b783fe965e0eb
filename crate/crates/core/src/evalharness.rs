//! Evaluation of ordering heuristics against per-ordering timing tables.
//!
//! Four metrics are reported per heuristic: accuracy (share of problems where
//! the chosen ordering is as fast as the fastest one), total time, average
//! markup and number of problems completed within the time limit. Timeouts
//! cost `penalty_factor * time_limit`.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt::Write as _;
use std::io::{BufRead, Read, Write};
use std::time::Instant;

use log::warn;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::heuristics::{
    derive_seed, factorial, greedy_ordering_cached, mods_ordering_cached, parse_heuristic, HeuristicChain,
    ProjectionCache, VariableOrdering,
};
use crate::poly::{parse_system, PolySystem};

pub const DEFAULT_TIME_LIMIT: f64 = 60.0;
pub const DEFAULT_PENALTY_FACTOR: f64 = 2.0;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Timing {
    Seconds(f64),
    Timeout,
}

impl Timing {
    pub fn seconds(self) -> Option<f64> {
        match self {
            Timing::Seconds(t) => Some(t),
            Timing::Timeout => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TimingRow {
    pub problem: String,
    /// Indexed by class label minus one.
    pub times: Vec<Timing>,
}

impl TimingRow {
    pub fn penalized(&self, class_label: usize, time_limit: f64, penalty_factor: f64) -> f64 {
        match self.times[class_label - 1] {
            Timing::Seconds(t) => t,
            Timing::Timeout => penalty_factor * time_limit,
        }
    }

    /// Fastest finishing time.
    pub fn best(&self) -> f64 {
        self.times.iter().filter_map(|t| t.seconds()).fold(f64::INFINITY, f64::min)
    }

    /// Lowest class label achieving the fastest time.
    pub fn best_class(&self) -> usize {
        let best = self.best();
        self.times.iter().position(|t| t.seconds() == Some(best)).expect("row has a finishing time") + 1
    }

    /// Number of orderings achieving the fastest time.
    pub fn co_optimal(&self) -> usize {
        let best = self.best();
        self.times.iter().filter(|t| t.seconds() == Some(best)).count()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TimingTable {
    pub nvars: usize,
    pub time_limit: f64,
    pub rows: Vec<TimingRow>,
    /// Problems dropped because no ordering finished.
    pub dropped: Vec<String>,
}

impl TimingTable {
    pub fn orderings(&self) -> usize {
        factorial(self.nvars)
    }

    pub fn row(&self, problem: &str) -> Option<&TimingRow> {
        self.rows.iter().find(|r| r.problem == problem)
    }
}

fn nvars_for_columns(k: usize) -> Option<usize> {
    (1..=8).find(|&n| factorial(n) == k)
}

/// Reads `problem,ord1,...,ordK` with `K = n!`. Cells are seconds or the
/// literal `timeout`. Finite times above `time_limit` count as timeouts.
pub fn load_timings<R: Read>(reader: R, time_limit: f64) -> Result<TimingTable> {
    if !(time_limit > 0.0 && time_limit.is_finite()) {
        return Err(Error::InvalidArgument(format!("time limit must be positive, got {time_limit}")));
    }
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).flexible(true).from_reader(reader);
    let headers = rdr.headers()?.clone();
    if headers.get(0) != Some("problem") {
        return Err(Error::MissingHeader("first column must be `problem`".into()));
    }
    let k = headers.len() - 1;
    let mut columns = Vec::with_capacity(k);
    for h in headers.iter().skip(1) {
        let idx = h
            .strip_prefix("ord")
            .and_then(|d| d.parse::<usize>().ok())
            .filter(|&i| i >= 1 && i <= k)
            .ok_or_else(|| Error::UnknownColumn(h.to_string()))?;
        if columns.contains(&idx) {
            return Err(Error::UnknownColumn(h.to_string()));
        }
        columns.push(idx);
    }
    let nvars = nvars_for_columns(k)
        .ok_or_else(|| Error::MissingHeader(format!("{k} ordering columns is not a factorial")))?;
    let mut rows = Vec::new();
    let mut dropped = Vec::new();
    let mut seen = HashSet::new();
    for (i, rec) in rdr.records().enumerate() {
        let line = i + 2;
        let rec = rec?;
        if rec.len() != k + 1 {
            return Err(Error::MalformedRow {
                line,
                msg: format!("expected {} fields, got {}", k + 1, rec.len()),
            });
        }
        let problem = rec[0].to_string();
        if !seen.insert(problem.clone()) {
            return Err(Error::MalformedRow { line, msg: format!("duplicate problem `{problem}`") });
        }
        let mut times = vec![Timing::Timeout; k];
        for (cell, &col) in rec.iter().skip(1).zip(&columns) {
            times[col - 1] = if cell.eq_ignore_ascii_case("timeout") {
                Timing::Timeout
            } else {
                let t: f64 = cell
                    .parse()
                    .map_err(|_| Error::MalformedRow { line, msg: format!("bad time `{cell}`") })?;
                if !t.is_finite() {
                    return Err(Error::MalformedRow { line, msg: format!("bad time `{cell}`") });
                }
                if t < 0.0 {
                    return Err(Error::NegativeTime(t));
                }
                if t > time_limit {
                    warn!("problem {problem}: time {t} exceeds the limit {time_limit}, treated as timeout");
                    Timing::Timeout
                } else {
                    Timing::Seconds(t)
                }
            };
        }
        if times.iter().all(|t| *t == Timing::Timeout) {
            warn!("problem {problem}: no ordering finished, dropped");
            dropped.push(problem);
        } else {
            rows.push(TimingRow { problem, times });
        }
    }
    log::info!("loaded {} problems ({} dropped)", rows.len(), dropped.len());
    Ok(TimingTable { nvars, time_limit, rows, dropped })
}

#[derive(Clone, Debug, PartialEq)]
pub struct Problem {
    pub id: String,
    pub vars: Vec<String>,
    pub system: PolySystem,
}

#[derive(Deserialize)]
struct ProblemLine {
    id: serde_json::Value,
    vars: Vec<String>,
    polys: Vec<String>,
}

/// Reads one `{"id": .., "vars": [..], "polys": [..]}` object per line.
pub fn load_problems<R: BufRead>(reader: R) -> Result<Vec<Problem>> {
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let lineno = i + 1;
        let p: ProblemLine = serde_json::from_str(&line)
            .map_err(|e| Error::MalformedRow { line: lineno, msg: e.to_string() })?;
        let id = match p.id {
            serde_json::Value::String(s) => s,
            serde_json::Value::Number(n) => n.to_string(),
            other => return Err(Error::MalformedRow { line: lineno, msg: format!("bad id {other}") }),
        };
        if !seen.insert(id.clone()) {
            return Err(Error::MalformedRow { line: lineno, msg: format!("duplicate problem `{id}`") });
        }
        let system = parse_system(&p.polys, &p.vars)?;
        out.push(Problem { id, vars: p.vars, system });
    }
    Ok(out)
}

/// `(t_heuristic - t_optimal) / (t_optimal + 1)`.
pub fn markup(t_heuristic: f64, t_optimal: f64) -> Result<f64> {
    for t in [t_heuristic, t_optimal] {
        if t < 0.0 {
            return Err(Error::NegativeTime(t));
        }
    }
    Ok((t_heuristic - t_optimal) / (t_optimal + 1.0))
}

#[derive(Clone, Debug, PartialEq)]
pub enum Selector {
    Heuristic(HeuristicChain),
    /// Exhaustive projection-product minimisation.
    Mods,
    /// Always picks a fastest ordering.
    VirtualBest,
}

/// A named selector. A `free-` prefix marks a heuristic whose own running
/// time is never charged.
#[derive(Clone, Debug, PartialEq)]
pub struct NamedSelector {
    pub name: String,
    pub selector: Selector,
    pub free: bool,
}

pub fn parse_selector(name: &str) -> Result<NamedSelector> {
    let (free, base) = match name.strip_prefix("free-") {
        Some(rest) => (true, rest),
        None => (false, name),
    };
    let selector = match base {
        "mods" => Selector::Mods,
        "virtual-best" => Selector::VirtualBest,
        other => Selector::Heuristic(parse_heuristic(other)?),
    };
    Ok(NamedSelector { name: name.to_string(), selector, free })
}

#[derive(Clone, Debug)]
pub struct EvalConfig {
    pub repetitions: u64,
    pub master_seed: u64,
    pub penalty_factor: f64,
    pub charge_heuristic_time: bool,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            repetitions: 1,
            master_seed: 0,
            penalty_factor: DEFAULT_PENALTY_FACTOR,
            charge_heuristic_time: false,
        }
    }
}

/// What a selector did on one problem across all repetitions.
#[derive(Clone, Debug, PartialEq)]
pub struct ProblemChoice {
    pub problem: String,
    /// Class label chosen in the first repetition.
    pub first_class: usize,
    /// Repetitions per chosen class label.
    pub class_counts: BTreeMap<usize, u64>,
    /// Repetitions in which the random tie-breaker decided.
    pub random_ties: u64,
    /// Mean wall-clock seconds spent choosing, when charged.
    pub heuristic_seconds: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MetricsReport {
    pub name: String,
    pub accuracy: f64,
    pub total_time: f64,
    pub markup: f64,
    pub completed: f64,
    pub repetitions: u64,
    pub tie_rate: f64,
    pub problems: usize,
    pub choices: Vec<ProblemChoice>,
}

/// Per-problem inputs shared by every selector evaluated on a table.
pub struct Workload<'a> {
    pub table: &'a TimingTable,
    entries: Vec<(&'a TimingRow, Option<ProjectionCache>)>,
}

impl<'a> Workload<'a> {
    /// Pairs every timing row with its problem. Systems are required unless
    /// only the virtual best will be evaluated (`problems` may then be empty).
    pub fn new(problems: &[Problem], table: &'a TimingTable) -> Result<Self> {
        if table.rows.is_empty() {
            return Err(Error::NoProblems);
        }
        let by_id: HashMap<&str, &Problem> = problems.iter().map(|p| (p.id.as_str(), p)).collect();
        let mut entries = Vec::with_capacity(table.rows.len());
        for row in &table.rows {
            let cache = match by_id.get(row.problem.as_str()) {
                Some(p) => {
                    if p.system.nvars() != table.nvars {
                        return Err(Error::VariableCountMismatch {
                            expected: table.nvars,
                            got: p.system.nvars(),
                        });
                    }
                    Some(ProjectionCache::new(&p.system))
                }
                None if problems.is_empty() => None,
                None => return Err(Error::IdMismatch(row.problem.clone())),
            };
            entries.push((row, cache));
        }
        Ok(Workload { table, entries })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn evaluate(&self, selector: &NamedSelector, config: &EvalConfig) -> Result<MetricsReport> {
        if config.repetitions == 0 {
            return Err(Error::InvalidArgument("repetitions must be at least 1".into()));
        }
        if !(config.penalty_factor >= 1.0 && config.penalty_factor.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "penalty factor must be at least 1, got {}",
                config.penalty_factor
            )));
        }
        let choices: Vec<ProblemChoice> = self
            .entries
            .par_iter()
            .map(|(row, cache)| choose_for_problem(row, cache.as_ref(), selector, config))
            .collect::<Result<_>>()?;
        Ok(self.summarize(&selector.name, choices, config))
    }

    fn summarize(&self, name: &str, choices: Vec<ProblemChoice>, config: &EvalConfig) -> MetricsReport {
        let limit = self.table.time_limit;
        let reps = config.repetitions as f64;
        let (mut hits, mut total, mut markup_sum, mut completed, mut ties) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for ((row, _), choice) in self.entries.iter().zip(&choices) {
            let best = row.best();
            for (&class, &count) in &choice.class_counts {
                let w = count as f64 / reps;
                let t = row.penalized(class, limit, config.penalty_factor);
                total += w * t;
                markup_sum += w * markup(t, best).expect("times are nonnegative");
                if t == best {
                    hits += w;
                }
                if row.times[class - 1] != Timing::Timeout {
                    completed += w;
                }
            }
            total += choice.heuristic_seconds;
            ties += choice.random_ties as f64 / reps;
        }
        let n = self.entries.len() as f64;
        MetricsReport {
            name: name.to_string(),
            accuracy: 100.0 * hits / n,
            total_time: total,
            markup: markup_sum / n,
            completed,
            repetitions: config.repetitions,
            tie_rate: 100.0 * ties / n,
            problems: self.entries.len(),
            choices,
        }
    }
}

fn choose_for_problem(
    row: &TimingRow,
    cache: Option<&ProjectionCache>,
    selector: &NamedSelector,
    config: &EvalConfig,
) -> Result<ProblemChoice> {
    let charge = config.charge_heuristic_time && !selector.free;
    let mut class_counts = BTreeMap::new();
    let mut random_ties = 0;
    let mut seconds = 0.0;
    let mut first_class = None;
    let need_cache = || cache.ok_or_else(|| Error::IdMismatch(row.problem.clone()));
    match &selector.selector {
        Selector::VirtualBest => {
            class_counts.insert(row.best_class(), config.repetitions);
        }
        Selector::Mods => {
            let cache = need_cache()?;
            let start = Instant::now();
            let (ordering, _) = mods_ordering_cached(cache)?;
            seconds = start.elapsed().as_secs_f64();
            class_counts.insert(ordering.class_label(), config.repetitions);
        }
        Selector::Heuristic(chain) => {
            let cache = need_cache()?;
            for rep in 0..config.repetitions {
                let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(config.master_seed, &row.problem, rep));
                let start = Instant::now();
                let (ordering, stats) = greedy_ordering_cached(cache, chain, &mut rng)?;
                seconds += start.elapsed().as_secs_f64();
                check_ordering(&ordering, row)?;
                first_class.get_or_insert(ordering.class_label());
                if !stats.random_fired() {
                    // no random draw happened, so every repetition repeats this one
                    class_counts.insert(ordering.class_label(), config.repetitions);
                    seconds *= config.repetitions as f64;
                    break;
                }
                random_ties += 1;
                *class_counts.entry(ordering.class_label()).or_insert(0) += 1;
            }
            seconds /= config.repetitions as f64;
        }
    }
    let first_class = first_class.unwrap_or_else(|| *class_counts.keys().next().expect("one repetition"));
    Ok(ProblemChoice {
        problem: row.problem.clone(),
        first_class,
        class_counts,
        random_ties,
        heuristic_seconds: if charge { seconds } else { 0.0 },
    })
}

fn check_ordering(ordering: &VariableOrdering, row: &TimingRow) -> Result<()> {
    if ordering.class_label() > row.times.len() {
        return Err(Error::Invariant(format!("class {} outside timing row", ordering.class_label())));
    }
    Ok(())
}

/// Convenience wrapper around [`Workload`] for a single selector.
pub fn evaluate(
    problems: &[Problem],
    table: &TimingTable,
    selector: &NamedSelector,
    config: &EvalConfig,
) -> Result<MetricsReport> {
    Workload::new(problems, table)?.evaluate(selector, config)
}

/// Step points `(t, number of chosen orderings finishing within t)` at each
/// distinct finishing time. Timeouts never finish.
pub fn survival_curve(table: &TimingTable, choices: &BTreeMap<String, usize>) -> Result<Vec<(f64, usize)>> {
    let mut times = Vec::with_capacity(choices.len());
    for (id, &class) in choices {
        let row = table.row(id).ok_or_else(|| Error::IdMismatch(id.clone()))?;
        if class == 0 || class > row.times.len() {
            return Err(Error::InvalidArgument(format!("class label {class} out of range for `{id}`")));
        }
        if let Timing::Seconds(t) = row.times[class - 1] {
            times.push(t);
        }
    }
    times.sort_by(f64::total_cmp);
    let mut out: Vec<(f64, usize)> = Vec::new();
    for (i, t) in times.into_iter().enumerate() {
        match out.last_mut() {
            Some(last) if last.0 == t => last.1 = i + 1,
            _ => out.push((t, i + 1)),
        }
    }
    Ok(out)
}

/// First-repetition class label per problem.
pub fn first_choices(report: &MetricsReport) -> BTreeMap<String, usize> {
    report.choices.iter().map(|c| (c.problem.clone(), c.first_class)).collect()
}

pub fn virtual_best_choices(table: &TimingTable) -> BTreeMap<String, usize> {
    table.rows.iter().map(|r| (r.problem.clone(), r.best_class())).collect()
}

pub const REPORT_COLUMNS: [&str; 5] = ["Name", "Accuracy", "Total time", "Markup", "Completed"];

fn report_cells(r: &MetricsReport) -> [String; 5] {
    [
        r.name.clone(),
        format!("{:.2}", r.accuracy),
        format!("{:.1}", r.total_time),
        format!("{:.3}", r.markup),
        format!("{:.1}", r.completed),
    ]
}

pub fn write_report_csv<W: Write>(out: W, reports: &[MetricsReport]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(REPORT_COLUMNS)?;
    for r in reports {
        w.write_record(report_cells(r))?;
    }
    w.flush()?;
    Ok(())
}

/// Aligned text table with the same columns as the CSV report.
pub fn format_report_table(reports: &[MetricsReport]) -> String {
    let rows: Vec<[String; 5]> = reports.iter().map(report_cells).collect();
    let mut widths = REPORT_COLUMNS.map(str::len);
    for row in &rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.len());
        }
    }
    let mut out = String::new();
    let line = |out: &mut String, cells: Vec<&str>| {
        let padded: Vec<String> =
            cells
                .iter()
                .enumerate()
                .map(|(i, c)| {
                    if i == 0 {
                        format!("{c:<w$}", w = widths[i])
                    } else {
                        format!("{c:>w$}", w = widths[i])
                    }
                })
                .collect();
        let _ = writeln!(out, "{}", padded.join("  ").trim_end());
    };
    line(&mut out, REPORT_COLUMNS.to_vec());
    let rule: Vec<String> = widths.iter().map(|&w| "-".repeat(w)).collect();
    line(&mut out, rule.iter().map(String::as_str).collect());
    for row in &rows {
        line(&mut out, row.iter().map(String::as_str).collect());
    }
    out
}

/// `problem,class,chosen_time,best_time,random_ties` per problem.
pub fn write_choices_csv<W: Write>(out: W, table: &TimingTable, report: &MetricsReport) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["problem", "class", "chosen_time", "best_time", "random_ties"])?;
    for c in &report.choices {
        let row = table.row(&c.problem).ok_or_else(|| Error::IdMismatch(c.problem.clone()))?;
        let chosen = match row.times[c.first_class - 1] {
            Timing::Seconds(t) => t.to_string(),
            Timing::Timeout => "timeout".to_string(),
        };
        w.write_record([
            c.problem.clone(),
            c.first_class.to_string(),
            chosen,
            row.best().to_string(),
            c.random_ties.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_survival_csv<W: Write>(out: W, curve: &[(f64, usize)]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["time", "completed"])?;
    for (t, n) in curve {
        w.write_record([t.to_string(), n.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

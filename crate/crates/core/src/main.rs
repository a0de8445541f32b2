use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use lonely_spectrum::analysis::{
    lemma3_min_speed, lemma4_condition, verify_common_factor_theorem, verify_family, verify_shifted_theorem2,
    FamilyReport, TheoremId, TheoremScanReport,
};
use lonely_spectrum::engine::MlReport;
use lonely_spectrum::rational;
use lonely_spectrum::scan::GcdFilter;
use lonely_spectrum::{
    classify, compute_ml, enumerate_primitive, merge_census, oracle_ml, run_scan, shifted_ml, shifted_oracle,
    CensusSummary, Error, Rational, ScanConfig, ScanParams, Shard, ShiftedInstance, SpectrumClass, SpeedSet,
};

const EXIT_VIOLATION: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_WIDTH: u8 = 3;

/// Exact maximum loneliness of integer runner speeds.
#[derive(Parser)]
#[command(name = "lonely", version)]
struct Cli {
    /// Render human-readable tables instead of JSON.
    #[arg(long, global = true)]
    table: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Maximum loneliness of one speed tuple, or of every tuple in a file.
    Ml {
        #[arg(allow_negative_numbers = true)]
        speeds: Vec<String>,
        /// File with one whitespace- or comma-separated tuple per line.
        #[arg(long)]
        file: Option<PathBuf>,
    },
    /// Classify a loneliness value against 1/n and the s/(ns+k) lattice.
    Classify {
        #[arg(short = 'n', long = "n")]
        n: u32,
        #[arg(allow_negative_numbers = true)]
        value: Rational,
    },
    /// Exhaustive checkpointed scan over primitive tuples.
    Scan {
        #[arg(short = 'n', long = "n")]
        n: usize,
        #[arg(long)]
        v_max: u64,
        /// Early-exit floor (default 1/n).
        #[arg(long)]
        floor: Option<Rational>,
        #[arg(long, default_value = "0/1")]
        shard: String,
        #[arg(long, default_value = "scan.jsonl")]
        out: PathBuf,
        /// Defaults to OUT with a .checkpoint.json extension.
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        /// Defaults to OUT with a .summary.json extension.
        #[arg(long)]
        summary: Option<PathBuf>,
        #[arg(long)]
        resume: bool,
        #[arg(long)]
        workers: Option<usize>,
        /// gcd filter: three-share, no-three-share, pair-gcd-gt:G, pair-gcd-eq:G.
        #[arg(long = "filter")]
        filters: Vec<String>,
    },
    /// Merge census summaries of disjoint shards.
    MergeCensus { files: Vec<PathBuf> },
    /// Check ML(8, 4s+3, 4s+11, 4s+19) = (2s+7)/(8s+30) over a range of s.
    VerifyFamily {
        #[arg(long, default_value_t = 0)]
        s_lo: u64,
        #[arg(long, default_value_t = 200)]
        s_hi: u64,
    },
    /// Empirical check of a four-runner theorem (1, 2, 3 or 4).
    VerifyTheorem {
        theorem: u32,
        #[arg(long)]
        v_max: Option<u64>,
        #[arg(long, default_value_t = 10_000)]
        trials: u64,
        #[arg(long, default_value_t = 8)]
        q_max: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Least speed for one very fast runner to keep loneliness >= L - eps.
    Lemma3 {
        #[arg(long = "l")]
        l: Rational,
        #[arg(long)]
        eps: Rational,
        #[arg(long)]
        v_prev: u64,
    },
    /// Whether two very fast runners keep loneliness >= 1/n.
    Lemma4 {
        #[arg(long = "l")]
        l: Rational,
        #[arg(short = 'n', long = "n")]
        n: u32,
        #[arg(long)]
        v_nm2: u64,
        #[arg(long)]
        v_nm1: u64,
    },
    /// Compare the engine with the breakpoint oracle on one tuple or a full range.
    OracleCheck {
        #[arg(allow_negative_numbers = true)]
        speeds: Vec<String>,
        #[arg(short = 'n', long = "n")]
        n: Option<usize>,
        #[arg(long)]
        v_max: Option<u64>,
    },
    /// Loneliness with individual starting points.
    ShiftedMl {
        #[arg(long, num_args = 1.., required = true)]
        speeds: Vec<i64>,
        #[arg(long, num_args = 1.., required = true, allow_negative_numbers = true)]
        offsets: Vec<Rational>,
    },
}

/// Outcome of a command that ran to completion.
enum Verdict {
    Ok,
    Violation,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(Verdict::Ok) => ExitCode::SUCCESS,
        Ok(Verdict::Violation) => ExitCode::from(EXIT_VIOLATION),
        Err(e) => {
            eprintln!("lonely: {e}");
            ExitCode::from(if e.is_width_exceeded() { EXIT_WIDTH } else { EXIT_USAGE })
        }
    }
}

fn emit<T: Serialize>(value: &T) -> Result<(), Error> {
    println!("{}", serde_json::to_string(value)?);
    Ok(())
}

fn parse_speeds(raw: &[String]) -> Result<Vec<i64>, Error> {
    let mut out: Vec<i64> = Vec::with_capacity(raw.len());
    for tok in raw.iter().flat_map(|s| s.split([',', ' ', '\t'])).filter(|s| !s.is_empty()) {
        let v: i64 = tok
            .parse()
            .map_err(|_| Error::invalid(format!("speed {tok:?} is not an integer")))?;
        if v <= 0 {
            return Err(Error::NonPositiveSpeed(v));
        }
        if out.contains(&v) {
            eprintln!("lonely: warning: dropping duplicate speed {v}");
            continue;
        }
        out.push(v);
    }
    if out.is_empty() {
        return Err(Error::EmptySpeeds);
    }
    Ok(out)
}

#[derive(Serialize)]
struct MlOutput {
    #[serde(flatten)]
    report: MlReport,
    class: SpectrumClass,
}

fn ml_output(raw: &[i64]) -> Result<MlOutput, Error> {
    let set = SpeedSet::normalize(raw)?;
    let res = compute_ml(&set);
    Ok(MlOutput {
        report: MlReport::new(&set, &res),
        class: classify(set.len() as u32, res.value)?,
    })
}

fn print_ml_table(rows: &[MlOutput]) {
    println!("{:<32} {:>6} {:>12} {:>16} {:>8} {:>6}", "speeds", "scale", "ml", "class", "s", "k_min");
    for row in rows {
        let speeds = format!("{:?}", row.report.speeds);
        let kind = serde_json::to_value(row.class.kind).unwrap();
        println!(
            "{:<32} {:>6} {:>12} {:>16} {:>8} {:>6}",
            speeds,
            row.report.scale,
            row.report.ml.to_string(),
            kind.as_str().unwrap_or(""),
            row.class.s.map_or("-".into(), |s| s.to_string()),
            row.class.k_min.map_or("-".into(), |k| k.to_string()),
        );
    }
}

fn print_theorem_table(report: &TheoremScanReport) {
    println!("{}: {} tuples checked", report.theorem_id, report.tuples_checked);
    println!("expected exceptions: {}", report.expected_exceptions);
    for e in &report.exceptions_found {
        let tag = if report.theorem_id.is_expected_exception(&e.speeds) { "expected" } else { "UNEXPECTED" };
        match &e.offsets {
            Some(offsets) => println!("  {:?} offsets {:?}  ml {}  {tag}", e.speeds, offsets, e.ml),
            None => println!("  {:?}  ml {}  {tag}", e.speeds, e.ml),
        }
    }
}

fn print_census_table(census: &CensusSummary) {
    println!("total {}   at least floor {}", census.total, census.at_least_floor);
    println!("{:>4} {:>8} {:>10}", "k", "s", "count");
    for (&(k, s), &count) in &census.histogram {
        println!("{k:>4} {s:>8} {count:>10}");
    }
    for v in &census.violations.amended {
        println!("amended violation {:?} ml {}", v.speeds, v.ml);
    }
    for v in &census.violations.lrc {
        println!("lonely runner violation {:?} ml {}", v.speeds, v.ml);
    }
}

fn run(cli: &Cli) -> Result<Verdict, Error> {
    match &cli.command {
        Command::Ml { speeds, file } => {
            let mut tuples = Vec::new();
            if !speeds.is_empty() {
                tuples.push(parse_speeds(speeds)?);
            }
            if let Some(path) = file {
                for line in fs::read_to_string(path)?.lines() {
                    let line = line.trim();
                    if !line.is_empty() && !line.starts_with('#') {
                        tuples.push(parse_speeds(&[line.to_string()])?);
                    }
                }
            }
            if tuples.is_empty() {
                return Err(Error::EmptySpeeds);
            }
            let rows = tuples.iter().map(|t| ml_output(t)).collect::<Result<Vec<_>, _>>()?;
            if cli.table {
                print_ml_table(&rows);
            } else {
                rows.iter().try_for_each(emit)?;
            }
            Ok(Verdict::Ok)
        }
        Command::Classify { n, value } => {
            let class = classify(*n, *value)?;
            if cli.table {
                println!("n={n} value={value}: {}", serde_json::to_string(&class)?);
            } else {
                emit(&class)?;
            }
            Ok(Verdict::Ok)
        }
        Command::Scan { n, v_max, floor, shard, out, checkpoint, summary, resume, workers, filters } => {
            let shard: Shard = shard.parse()?;
            let mut params = ScanParams::new(*n, *v_max)?;
            if let Some(f) = floor {
                params.floor = *f;
            }
            params.filters = filters.iter().map(|f| f.parse::<GcdFilter>()).collect::<Result<_, _>>()?;
            params.shard = (shard != Shard::WHOLE).then_some(shard);
            params.validate()?;
            let mut cfg = ScanConfig::new(params, out.clone());
            if let Some(cp) = checkpoint {
                cfg.checkpoint_path = cp.clone();
            }
            cfg.summary_path = summary.clone();
            cfg.resume = *resume;
            cfg.progress = true;
            if let Some(w) = workers {
                if *w == 0 {
                    return Err(Error::invalid("--workers must be at least 1"));
                }
                cfg.workers = *w;
            }
            let census = run_scan(&cfg)?;
            if cli.table {
                print_census_table(&census);
            } else {
                emit(&census)?;
            }
            Ok(if census.has_violations() { Verdict::Violation } else { Verdict::Ok })
        }
        Command::MergeCensus { files } => {
            let mut parts = files.iter().map(|p| -> Result<CensusSummary, Error> {
                Ok(serde_json::from_slice(&fs::read(p)?)?)
            });
            let first = parts.next().ok_or_else(|| Error::invalid("no census files given"))??;
            let census = parts.try_fold(first, |acc, next| merge_census(&acc, &next?))?;
            if cli.table {
                print_census_table(&census);
            } else {
                emit(&census)?;
            }
            Ok(if census.has_violations() { Verdict::Violation } else { Verdict::Ok })
        }
        Command::VerifyFamily { s_lo, s_hi } => {
            let report: FamilyReport = verify_family(*s_lo, *s_hi)?;
            if cli.table {
                println!("s in [{s_lo}, {s_hi}]: {} failures", report.failures.len());
                for f in &report.failures {
                    println!("  s={} expected {} got {}", f.s, f.expected, f.got);
                }
            } else {
                emit(&report)?;
            }
            Ok(if report.all_pass { Verdict::Ok } else { Verdict::Violation })
        }
        Command::VerifyTheorem { theorem, v_max, trials, q_max, seed } => {
            let id = TheoremId::from_number(*theorem)
                .ok_or_else(|| Error::invalid(format!("unknown theorem {theorem}; expected 1, 2, 3 or 4")))?;
            let report = match id {
                TheoremId::ShiftedThree => verify_shifted_theorem2(*trials, *q_max, v_max.unwrap_or(12), *seed)?,
                TheoremId::PairFactor3 => verify_common_factor_theorem(id, v_max.unwrap_or(48))?,
                _ => verify_common_factor_theorem(id, v_max.unwrap_or(40))?,
            };
            if cli.table {
                print_theorem_table(&report);
            } else {
                emit(&report)?;
            }
            Ok(if report.holds() { Verdict::Ok } else { Verdict::Violation })
        }
        Command::Lemma3 { l, eps, v_prev } => {
            let min_speed = lemma3_min_speed(*l, *eps, *v_prev)?;
            if cli.table {
                println!("v_n >= {min_speed}");
            } else {
                emit(&json!({
                    "l": l.to_string(), "eps": eps.to_string(), "v_prev": v_prev, "min_speed": min_speed
                }))?;
            }
            Ok(Verdict::Ok)
        }
        Command::Lemma4 { l, n, v_nm2, v_nm1 } => {
            let holds = lemma4_condition(*l, *n, *v_nm2, *v_nm1)?;
            if cli.table {
                println!("condition {}", if holds { "holds" } else { "fails" });
            } else {
                emit(&json!({
                    "l": l.to_string(), "n": n, "v_nm2": v_nm2, "v_nm1": v_nm1, "holds": holds
                }))?;
            }
            Ok(Verdict::Ok)
        }
        Command::OracleCheck { speeds, n, v_max } => oracle_check(cli, speeds, *n, *v_max),
        Command::ShiftedMl { speeds, offsets } => {
            let inst = ShiftedInstance::new(speeds, offsets)?;
            let res = shifted_ml(&inst);
            let oracle = shifted_oracle(&inst)?;
            let agree = oracle.value == res.value;
            if cli.table {
                println!("speeds {:?} offsets {:?}: ml {} (oracle {})", inst.speeds(), inst.offsets(), res.value, oracle.value);
            } else {
                emit(&json!({
                    "speeds": inst.speeds(),
                    "offsets": inst.offsets().iter().map(|s| s.to_string()).collect::<Vec<_>>(),
                    "ml": res.value.to_string(),
                    "mode": res.mode,
                    "witness": res.witness,
                    "oracle_agrees": agree,
                }))?;
            }
            Ok(if agree { Verdict::Ok } else { Verdict::Violation })
        }
    }
}

#[derive(Serialize)]
struct Mismatch {
    speeds: Vec<u64>,
    #[serde(with = "rational::as_text")]
    engine: Rational,
    #[serde(with = "rational::as_text")]
    oracle: Rational,
}

fn compare_one(set: &SpeedSet) -> Result<Option<Mismatch>, Error> {
    let engine = compute_ml(set).value;
    let oracle = oracle_ml(set)?.value;
    Ok((engine != oracle).then(|| Mismatch { speeds: set.speeds().to_vec(), engine, oracle }))
}

fn oracle_check(cli: &Cli, speeds: &[String], n: Option<usize>, v_max: Option<u64>) -> Result<Verdict, Error> {
    if !speeds.is_empty() {
        let set = SpeedSet::normalize(&parse_speeds(speeds)?)?;
        let engine = compute_ml(&set).value;
        let oracle = oracle_ml(&set)?.value;
        if cli.table {
            println!("{:?}: engine {engine} oracle {oracle}", set.speeds());
        } else {
            emit(&json!({
                "speeds": set.speeds(), "engine": engine.to_string(), "oracle": oracle.to_string(),
                "agree": engine == oracle
            }))?;
        }
        return Ok(if engine == oracle { Verdict::Ok } else { Verdict::Violation });
    }
    let (Some(n), Some(v_max)) = (n, v_max) else {
        return Err(Error::invalid("oracle-check needs speeds or both --n and --v-max"));
    };
    ScanParams::new(n, v_max)?;
    let tuples: Vec<Vec<u64>> = enumerate_primitive(n, v_max, Shard::WHOLE).collect();
    let mismatches: Vec<Mismatch> = tuples
        .par_iter()
        .map(|t| compare_one(&SpeedSet::from_unsigned(t.clone())?))
        .filter_map(|r| r.transpose())
        .collect::<Result<_, _>>()?;
    if cli.table {
        println!("n={n} v_max={v_max}: {} tuples, {} mismatches", tuples.len(), mismatches.len());
    } else {
        emit(&json!({ "n": n, "v_max": v_max, "checked": tuples.len(), "mismatches": mismatches }))?;
    }
    Ok(if mismatches.is_empty() { Verdict::Ok } else { Verdict::Violation })
}

//! Exhaustive, resumable enumeration of primitive speed tuples.
//!
//! Tuples are grouped into blocks by their two smallest speeds. Blocks are the
//! unit of sharding (round-robin by block index), of parallel work, and of
//! checkpointing: after every finished block the output is flushed and the
//! checkpoint records the block and the number of lines written. Resuming
//! truncates the output back to that line count and continues with the next
//! block, so an interrupted run ends byte-identical to an uninterrupted one.

use std::fmt;
use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::ops::ControlFlow;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use itertools::Itertools;
use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use sha2::{Digest, Sha256};

use crate::census::CensusSummary;
use crate::engine::{compute_ml_with_floor, Mode, SpeedSet, Witness, MAX_SPEED};
use crate::error::{Error, Result};
use crate::rational::{self, gcd_u64, Rational};
use crate::spectrum::{classify, SpectrumClass};

/// A predicate on the gcd pattern of a tuple.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GcdFilter {
    /// Some three speeds share a factor of at least 2.
    ThreeShare,
    /// No three speeds share a factor.
    NoThreeShare,
    /// Some pair has gcd strictly above the bound.
    PairGcdAbove(u64),
    /// Some pair has gcd exactly equal to the value.
    PairGcdEq(u64),
}

impl GcdFilter {
    pub fn accepts(self, speeds: &[u64]) -> bool {
        match self {
            GcdFilter::ThreeShare => some_triple_shares(speeds),
            GcdFilter::NoThreeShare => !some_triple_shares(speeds),
            GcdFilter::PairGcdAbove(g) => pair_gcds(speeds).any(|d| d > g),
            GcdFilter::PairGcdEq(g) => pair_gcds(speeds).any(|d| d == g),
        }
    }
}

fn pair_gcds(speeds: &[u64]) -> impl Iterator<Item = u64> + '_ {
    speeds.iter().tuple_combinations().map(|(&a, &b)| gcd_u64(a, b))
}

fn some_triple_shares(speeds: &[u64]) -> bool {
    speeds
        .iter()
        .tuple_combinations()
        .any(|(&a, &b, &c)| gcd_u64(gcd_u64(a, b), c) > 1)
}

impl fmt::Display for GcdFilter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GcdFilter::ThreeShare => f.write_str("three-share"),
            GcdFilter::NoThreeShare => f.write_str("no-three-share"),
            GcdFilter::PairGcdAbove(g) => write!(f, "pair-gcd-gt:{g}"),
            GcdFilter::PairGcdEq(g) => write!(f, "pair-gcd-eq:{g}"),
        }
    }
}

impl FromStr for GcdFilter {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::invalid(format!("unknown filter {s:?}"));
        match s {
            "three-share" => return Ok(GcdFilter::ThreeShare),
            "no-three-share" => return Ok(GcdFilter::NoThreeShare),
            _ => {}
        }
        let (name, g) = s.split_once(':').ok_or_else(bad)?;
        let g: u64 = g.parse().map_err(|_| bad())?;
        match name {
            "pair-gcd-gt" => Ok(GcdFilter::PairGcdAbove(g)),
            "pair-gcd-eq" => Ok(GcdFilter::PairGcdEq(g)),
            _ => Err(bad()),
        }
    }
}

impl Serialize for GcdFilter {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for GcdFilter {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        String::deserialize(deserializer)?
            .parse()
            .map_err(serde::de::Error::custom)
    }
}

/// Shard `index` of `total`, written `index/total`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Shard {
    pub index: u64,
    pub total: u64,
}

impl Shard {
    pub const WHOLE: Shard = Shard { index: 0, total: 1 };

    pub fn new(index: u64, total: u64) -> Result<Shard> {
        if total == 0 || index >= total {
            return Err(Error::invalid(format!("shard {index}/{total} needs index < total")));
        }
        Ok(Shard { index, total })
    }

    pub fn owns(self, block_index: u64) -> bool {
        block_index % self.total == self.index
    }
}

impl Default for Shard {
    fn default() -> Self {
        Shard::WHOLE
    }
}

impl fmt::Display for Shard {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.index, self.total)
    }
}

impl FromStr for Shard {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::invalid(format!("shard must look like i/t, got {s:?}"));
        let (i, t) = s.split_once('/').ok_or_else(bad)?;
        Shard::new(i.trim().parse().map_err(|_| bad())?, t.trim().parse().map_err(|_| bad())?)
    }
}

impl Serialize for Shard {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        [self.index, self.total].serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Shard {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let [index, total] = <[u64; 2]>::deserialize(deserializer)?;
        Shard::new(index, total).map_err(serde::de::Error::custom)
    }
}

/// Leading pairs `(a, b)`, `a < b`, that can start an increasing `n`-tuple
/// with maximum at most `v_max`, in lexicographic order.
pub fn leading_pairs(n: usize, v_max: u64) -> impl Iterator<Item = (u64, u64)> {
    let tail = n.saturating_sub(2) as u64;
    (1..=v_max).flat_map(move |a| {
        (a + 1..=v_max)
            .take_while(move |&b| b + tail <= v_max)
            .map(move |b| (a, b))
    })
}

/// Every primitive increasing `n`-tuple whose two smallest speeds are `lead`.
pub fn block_tuples(n: usize, v_max: u64, lead: (u64, u64)) -> Vec<Vec<u64>> {
    let (a, b) = lead;
    let g = gcd_u64(a, b);
    if n == 2 {
        return if g == 1 { vec![vec![a, b]] } else { Vec::new() };
    }
    (b + 1..=v_max)
        .combinations(n - 2)
        .filter(|rest| rest.iter().fold(g, |acc, &v| gcd_u64(acc, v)) == 1)
        .map(|rest| {
            let mut t = Vec::with_capacity(n);
            t.push(a);
            t.push(b);
            t.extend(rest);
            t
        })
        .collect()
}

/// The blocks owned by `shard`, each with its global block index.
pub fn shard_blocks(n: usize, v_max: u64, shard: Shard) -> impl Iterator<Item = (u64, (u64, u64))> {
    leading_pairs(n, v_max)
        .enumerate()
        .map(|(i, lead)| (i as u64, lead))
        .filter(move |&(i, _)| shard.owns(i))
}

/// Every strictly increasing tuple of length `n` with entries in `1..=v_max`
/// and gcd 1, in lexicographic order, restricted to `shard`.
pub fn enumerate_primitive(n: usize, v_max: u64, shard: Shard) -> impl Iterator<Item = Vec<u64>> {
    shard_blocks(n, v_max, shard).flat_map(move |(_, lead)| block_tuples(n, v_max, lead))
}

/// The parameters that determine a scan's output.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScanParams {
    pub n: usize,
    pub v_max: u64,
    #[serde(with = "rational::as_text")]
    pub floor: Rational,
    #[serde(default)]
    pub filters: Vec<GcdFilter>,
    /// `None` for the whole tuple space, including merged censuses.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shard: Option<Shard>,
}

impl ScanParams {
    /// Whole-space scan with the default floor `1/n`.
    pub fn new(n: usize, v_max: u64) -> Result<ScanParams> {
        let params = ScanParams {
            n,
            v_max,
            floor: Rational::new(1, n.max(1) as i64)?,
            filters: Vec::new(),
            shard: None,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::invalid("scans need n >= 2"));
        }
        if self.v_max < self.n as u64 {
            return Err(Error::invalid(format!("v_max {} is below n {}", self.v_max, self.n)));
        }
        if self.v_max > MAX_SPEED {
            return Err(Error::SpeedTooLarge { speed: self.v_max, limit: MAX_SPEED });
        }
        let one_over_n = Rational::new(1, self.n as i64)?;
        if self.floor < one_over_n || self.floor > Rational::HALF {
            return Err(Error::InvalidFloor(self.floor));
        }
        Ok(())
    }

    pub fn shard(&self) -> Shard {
        self.shard.unwrap_or(Shard::WHOLE)
    }

    /// Same scan with the shard forgotten; shards of one scan share this.
    pub fn unsharded(&self) -> ScanParams {
        ScanParams { shard: None, ..self.clone() }
    }

    pub fn accepts(&self, speeds: &[u64]) -> bool {
        self.filters.iter().all(|f| f.accepts(speeds))
    }

    pub fn config_hash(&self) -> String {
        let mut canonical = self.clone();
        if canonical.shard == Some(Shard::WHOLE) {
            canonical.shard = None;
        }
        let bytes = serde_json::to_vec(&canonical).expect("params serialize");
        hex::encode(Sha256::digest(&bytes))
    }
}

/// One line of scan output.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScanRecord {
    pub speeds: Vec<u64>,
    #[serde(with = "rational::as_text_opt")]
    pub ml: Option<Rational>,
    pub floor: bool,
    pub class: SpectrumClass,
    pub witness: Option<Witness>,
}

/// Computes and classifies one primitive tuple.
pub fn evaluate_tuple(params: &ScanParams, speeds: &[u64]) -> Result<ScanRecord> {
    let set = SpeedSet::from_unsigned(speeds.to_vec())?;
    let res = compute_ml_with_floor(&set, params.floor)?;
    Ok(match res.mode {
        Mode::Floor => ScanRecord {
            speeds: speeds.to_vec(),
            ml: None,
            floor: true,
            class: SpectrumClass::at_least_floor(),
            witness: None,
        },
        Mode::Exact => ScanRecord {
            speeds: speeds.to_vec(),
            ml: Some(res.value),
            floor: false,
            class: classify(params.n as u32, res.value)?,
            witness: Some(res.witness),
        },
    })
}

fn block_records(params: &ScanParams, lead: (u64, u64)) -> Result<Vec<ScanRecord>> {
    block_tuples(params.n, params.v_max, lead)
        .into_iter()
        .filter(|t| params.accepts(t))
        .map(|t| evaluate_tuple(params, &t))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScanCheckpoint {
    pub config_hash: String,
    pub last_block: [u64; 2],
    pub emitted: u64,
}

impl ScanCheckpoint {
    pub fn load(path: &Path) -> Result<ScanCheckpoint> {
        Ok(serde_json::from_slice(&fs::read(path)?)?)
    }

    fn store(&self, path: &Path) -> Result<()> {
        let tmp = path.with_extension("tmp");
        fs::write(&tmp, serde_json::to_vec(self)?)?;
        fs::rename(&tmp, path)?;
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct ScanConfig {
    pub params: ScanParams,
    pub output_path: PathBuf,
    pub checkpoint_path: PathBuf,
    /// Defaults to the output path with a `.summary.json` extension.
    pub summary_path: Option<PathBuf>,
    pub workers: usize,
    pub resume: bool,
    /// Emit one progress line per batch of blocks on standard error.
    pub progress: bool,
}

impl ScanConfig {
    pub fn new(params: ScanParams, output_path: impl Into<PathBuf>) -> ScanConfig {
        let output_path = output_path.into();
        ScanConfig {
            params,
            checkpoint_path: output_path.with_extension("checkpoint.json"),
            output_path,
            summary_path: None,
            workers: std::thread::available_parallelism().map_or(1, |n| n.get()),
            resume: false,
            progress: false,
        }
    }

    pub fn summary_path(&self) -> PathBuf {
        self.summary_path
            .clone()
            .unwrap_or_else(|| self.output_path.with_extension("summary.json"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ScanOutcome {
    Complete(CensusSummary),
    /// The checkpoint hook asked to stop; the checkpoint on disk matches.
    Interrupted(ScanCheckpoint),
}

/// Runs a scan to completion.
pub fn run_scan(cfg: &ScanConfig) -> Result<CensusSummary> {
    match run_scan_with(cfg, |_| ControlFlow::Continue(()))? {
        ScanOutcome::Complete(census) => Ok(census),
        ScanOutcome::Interrupted(_) => unreachable!("hook never breaks"),
    }
}

/// Runs a scan, calling `on_checkpoint` after every checkpoint write. Returning
/// `Break` stops the scan as if the process had been killed right there.
pub fn run_scan_with<F>(cfg: &ScanConfig, mut on_checkpoint: F) -> Result<ScanOutcome>
where
    F: FnMut(&ScanCheckpoint) -> ControlFlow<()>,
{
    let params = &cfg.params;
    params.validate()?;
    let hash = params.config_hash();

    let mut census = CensusSummary::empty(params.clone());
    let mut emitted = 0u64;
    let mut resume_after: Option<(u64, u64)> = None;

    if cfg.resume && cfg.checkpoint_path.exists() {
        let cp = ScanCheckpoint::load(&cfg.checkpoint_path)?;
        if cp.config_hash != hash {
            return Err(Error::CheckpointMismatch { expected: hash, found: cp.config_hash });
        }
        for record in truncate_to_lines(&cfg.output_path, cp.emitted)? {
            census.add(&record);
        }
        emitted = cp.emitted;
        resume_after = Some((cp.last_block[0], cp.last_block[1]));
    } else {
        File::create(&cfg.output_path)?;
        if cfg.checkpoint_path.exists() {
            fs::remove_file(&cfg.checkpoint_path)?;
        }
    }

    let blocks: Vec<(u64, u64)> = shard_blocks(params.n, params.v_max, params.shard())
        .map(|(_, lead)| lead)
        .filter(|&lead| resume_after.map_or(true, |last| lead > last))
        .collect();

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers.max(1))
        .build()
        .map_err(|e| Error::invalid(format!("cannot start worker pool: {e}")))?;
    let mut out = BufWriter::new(OpenOptions::new().append(true).open(&cfg.output_path)?);
    let batch = cfg.workers.max(1) * 4;

    for chunk in blocks.chunks(batch) {
        let results: Vec<Vec<ScanRecord>> = pool.install(|| {
            chunk
                .par_iter()
                .map(|&lead| block_records(params, lead))
                .collect::<Result<_>>()
        })?;
        for (&lead, records) in chunk.iter().zip(results) {
            for record in &records {
                serde_json::to_writer(&mut out, record)?;
                out.write_all(b"\n")?;
                census.add(record);
            }
            emitted += records.len() as u64;
            out.flush()?;
            let cp = ScanCheckpoint { config_hash: hash.clone(), last_block: [lead.0, lead.1], emitted };
            cp.store(&cfg.checkpoint_path)?;
            if on_checkpoint(&cp).is_break() {
                return Ok(ScanOutcome::Interrupted(cp));
            }
        }
        if cfg.progress {
            let last = chunk.last().unwrap();
            eprintln!("scan: through block ({}, {}), {emitted} records", last.0, last.1);
        }
    }
    out.flush()?;
    drop(out);

    fs::write(cfg.summary_path(), serde_json::to_vec_pretty(&census)?)?;
    Ok(ScanOutcome::Complete(census))
}

/// Cuts `path` down to its first `lines` lines and returns them parsed.
fn truncate_to_lines(path: &Path, lines: u64) -> Result<Vec<ScanRecord>> {
    let file = File::open(path)?;
    let mut reader = BufReader::new(file);
    let mut records = Vec::with_capacity(lines as usize);
    let mut offset = 0u64;
    let mut line = String::new();
    for _ in 0..lines {
        line.clear();
        let read = reader.read_line(&mut line)?;
        if read == 0 || !line.ends_with('\n') {
            return Err(Error::invalid(format!(
                "{} holds fewer than the {lines} records its checkpoint claims",
                path.display()
            )));
        }
        records.push(serde_json::from_str(line.trim_end())?);
        offset += read as u64;
    }
    OpenOptions::new().write(true).open(path)?.set_len(offset)?;
    Ok(records)
}

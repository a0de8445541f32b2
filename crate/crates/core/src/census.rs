use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{self, Rational};
use crate::scan::{ScanParams, ScanRecord};
use crate::spectrum::SpectrumKind;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Violation {
    pub speeds: Vec<u64>,
    #[serde(with = "rational::as_text")]
    pub ml: Rational,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violations {
    /// Values below `1/n` that are not spectrum points.
    pub amended: Vec<Violation>,
    /// Values below `1/(n+1)`.
    pub lrc: Vec<Violation>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
struct HistogramEntry {
    k: u32,
    s: u64,
    count: u64,
}

/// Aggregate classification counts of a scan.
///
/// `total = at_least_floor + sum(histogram) + violations.amended.len()`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CensusSummary {
    pub config: ScanParams,
    pub total: u64,
    pub at_least_floor: u64,
    /// Spectrum points keyed by `(k_min, s)`.
    #[serde(with = "histogram_entries")]
    pub histogram: BTreeMap<(u32, u64), u64>,
    pub violations: Violations,
}

mod histogram_entries {
    use std::collections::BTreeMap;

    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use super::HistogramEntry;

    pub fn serialize<S: Serializer>(map: &BTreeMap<(u32, u64), u64>, serializer: S) -> Result<S::Ok, S::Error> {
        let entries: Vec<HistogramEntry> = map
            .iter()
            .map(|(&(k, s), &count)| HistogramEntry { k, s, count })
            .collect();
        entries.serialize(serializer)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(deserializer: D) -> Result<BTreeMap<(u32, u64), u64>, D::Error> {
        let entries = Vec::<HistogramEntry>::deserialize(deserializer)?;
        let mut map = BTreeMap::new();
        for e in entries {
            *map.entry((e.k, e.s)).or_insert(0) += e.count;
        }
        Ok(map)
    }
}

impl CensusSummary {
    pub fn empty(config: ScanParams) -> Self {
        CensusSummary {
            config,
            total: 0,
            at_least_floor: 0,
            histogram: BTreeMap::new(),
            violations: Violations::default(),
        }
    }

    pub fn add(&mut self, record: &ScanRecord) {
        self.total += 1;
        let violation = || Violation {
            speeds: record.speeds.clone(),
            ml: record.ml.expect("exact records carry a value"),
        };
        match record.class.kind {
            SpectrumKind::AtLeastFloor => self.at_least_floor += 1,
            SpectrumKind::SpectrumPoint => {
                let key = (
                    record.class.k_min.expect("spectrum point has k_min"),
                    record.class.s.expect("spectrum point has s"),
                );
                *self.histogram.entry(key).or_insert(0) += 1;
            }
            SpectrumKind::AmendedViolation => self.violations.amended.push(violation()),
        }
        if record.class.lrc_violation {
            self.violations.lrc.push(violation());
        }
    }

    pub fn spectrum_points(&self) -> u64 {
        self.histogram.values().sum()
    }

    /// Counts add up to the total.
    pub fn is_coherent(&self) -> bool {
        self.total == self.at_least_floor + self.spectrum_points() + self.violations.amended.len() as u64
    }

    /// Distinct `k_min` values seen among spectrum points.
    pub fn observed_k(&self) -> Vec<u32> {
        let mut ks: Vec<u32> = self.histogram.keys().map(|&(k, _)| k).collect();
        ks.dedup();
        ks
    }

    pub fn has_violations(&self) -> bool {
        !self.violations.amended.is_empty() || !self.violations.lrc.is_empty()
    }
}

/// Combines the censuses of disjoint shards of one scan.
///
/// Violation lists are kept sorted by speeds, which is the enumeration order of
/// an unsharded scan, so merging is commutative and associative.
pub fn merge_census(a: &CensusSummary, b: &CensusSummary) -> Result<CensusSummary> {
    if a.config.unsharded() != b.config.unsharded() {
        return Err(Error::invalid("cannot merge censuses of different scans"));
    }
    let mut histogram = a.histogram.clone();
    for (&key, &count) in &b.histogram {
        *histogram.entry(key).or_insert(0) += count;
    }
    let join = |x: &[Violation], y: &[Violation]| {
        let mut all: Vec<Violation> = x.iter().chain(y).cloned().collect();
        all.sort();
        all
    };
    Ok(CensusSummary {
        config: a.config.unsharded(),
        total: a.total + b.total,
        at_least_floor: a.at_least_floor + b.at_least_floor,
        histogram,
        violations: Violations {
            amended: join(&a.violations.amended, &b.violations.amended),
            lrc: join(&a.violations.lrc, &b.violations.lrc),
        },
    })
}

//! Lemma thresholds and empirical checks of the theorem statements about
//! four runners: the `7/30`-type counterexample family, the common-factor
//! theorems, and three shifted runners.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::engine::{compute_ml, compute_ml_with_floor, SpeedSet};
use crate::error::{Error, Result};
use crate::rational::{self, gcd_u64, Rational};
use crate::scan::{block_tuples, leading_pairs, GcdFilter};
use crate::shifted::{shifted_ml, ShiftedInstance};

/// The tuple `(8, 4s+3, 4s+11, 4s+19)`.
pub fn family_speeds(s: u64) -> [u64; 4] {
    [8, 4 * s + 3, 4 * s + 11, 4 * s + 19]
}

/// The claimed value `(2s+7)/(8s+30)` for [`family_speeds`].
pub fn family_value(s: u64) -> Result<Rational> {
    Ok(Rational::from_i128(2 * s as i128 + 7, 8 * s as i128 + 30)?)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FamilyFailure {
    pub s: u64,
    #[serde(with = "rational::as_text")]
    pub expected: Rational,
    #[serde(with = "rational::as_text")]
    pub got: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FamilyReport {
    pub s_range: (u64, u64),
    pub failures: Vec<FamilyFailure>,
    pub all_pass: bool,
}

pub fn verify_family(s_lo: u64, s_hi: u64) -> Result<FamilyReport> {
    if s_lo > s_hi {
        return Err(Error::invalid(format!("empty family range {s_lo}..={s_hi}")));
    }
    let mut failures: Vec<FamilyFailure> = (s_lo..=s_hi)
        .into_par_iter()
        .map(|s| -> Result<Option<FamilyFailure>> {
            let set = SpeedSet::from_unsigned(family_speeds(s).to_vec())?;
            let expected = family_value(s)?;
            let got = compute_ml(&set).value;
            Ok((got != expected).then_some(FamilyFailure { s, expected, got }))
        })
        .filter_map(|r| r.transpose())
        .collect::<Result<_>>()?;
    failures.sort_by_key(|f| f.s);
    Ok(FamilyReport { s_range: (s_lo, s_hi), all_pass: failures.is_empty(), failures })
}

/// Least `v_n` with `v_n >= ((L - eps) / eps) * v_prev`: a runner at least
/// this fast keeps the loneliness of the slower runners within `eps`.
pub fn lemma3_min_speed(l: Rational, eps: Rational, v_prev: u64) -> Result<u64> {
    if !eps.is_positive() || eps >= l || l > Rational::HALF {
        return Err(Error::invalid(format!("need 0 < eps < L <= 1/2 (got L={l}, eps={eps})")));
    }
    if v_prev == 0 {
        return Err(Error::invalid("v_prev must be positive"));
    }
    let bound = l
        .checked_sub(eps)?
        .checked_div(eps)?
        .checked_mul_int(i64::try_from(v_prev).map_err(|_| Error::invalid("v_prev too large"))?)?;
    Ok(bound.ceil() as u64)
}

/// Whether `L - 3 v_{n-2} / (n v_{n-1}) >= 1/n`, the condition under which two
/// fast runners cannot pull the loneliness below `1/n`.
pub fn lemma4_condition(l: Rational, n: u32, v_nm2: u64, v_nm1: u64) -> Result<bool> {
    if n < 4 {
        return Err(Error::invalid(format!("need n >= 4 (got {n})")));
    }
    if v_nm2 == 0 || v_nm2 >= v_nm1 {
        return Err(Error::invalid(format!("need 0 < v_(n-2) < v_(n-1) (got {v_nm2}, {v_nm1})")));
    }
    if !l.is_positive() || l > Rational::HALF {
        return Err(Error::invalid(format!("L={l} outside (0, 1/2]")));
    }
    let drift = Rational::from_i128(3 * v_nm2 as i128, n as i128 * v_nm1 as i128)?;
    Ok(l.checked_sub(drift)? >= Rational::new(1, n as i64)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TheoremId {
    /// Three speeds share a common factor.
    #[serde(rename = "theorem-1")]
    ThreeShareFactor,
    /// Three runners with arbitrary starting points.
    #[serde(rename = "theorem-2")]
    ShiftedThree,
    /// Two speeds share a factor above 3.
    #[serde(rename = "theorem-3")]
    PairFactorAbove3,
    /// Two speeds share exactly the factor 3.
    #[serde(rename = "theorem-4")]
    PairFactor3,
}

impl TheoremId {
    pub fn from_number(k: u32) -> Option<TheoremId> {
        match k {
            1 => Some(TheoremId::ThreeShareFactor),
            2 => Some(TheoremId::ShiftedThree),
            3 => Some(TheoremId::PairFactorAbove3),
            4 => Some(TheoremId::PairFactor3),
            _ => None,
        }
    }

    pub fn expected_exceptions(self) -> &'static str {
        match self {
            TheoremId::PairFactor3 => "(1,2,3,12k) for k >= 1",
            _ => "none",
        }
    }

    fn filters(self) -> &'static [GcdFilter] {
        match self {
            TheoremId::ThreeShareFactor => &[GcdFilter::ThreeShare],
            TheoremId::PairFactorAbove3 => &[GcdFilter::PairGcdAbove(3)],
            TheoremId::PairFactor3 => &[GcdFilter::PairGcdEq(3), GcdFilter::NoThreeShare],
            TheoremId::ShiftedThree => &[],
        }
    }

    /// Whether a tuple falling below `1/4` is one the statement excludes.
    pub fn is_expected_exception(self, speeds: &[u64]) -> bool {
        match self {
            TheoremId::PairFactor3 => {
                speeds.len() == 4 && speeds[..3] == [1, 2, 3] && speeds[3] % 12 == 0
            }
            _ => false,
        }
    }
}

impl fmt::Display for TheoremId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let k = match self {
            TheoremId::ThreeShareFactor => 1,
            TheoremId::ShiftedThree => 2,
            TheoremId::PairFactorAbove3 => 3,
            TheoremId::PairFactor3 => 4,
        };
        write!(f, "theorem-{k}")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TheoremException {
    pub speeds: Vec<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub offsets: Option<Vec<String>>,
    #[serde(with = "rational::as_text")]
    pub ml: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TheoremScanReport {
    pub theorem_id: TheoremId,
    pub tuples_checked: u64,
    pub exceptions_found: Vec<TheoremException>,
    pub expected_exceptions: String,
}

impl TheoremScanReport {
    /// Exceptions the theorem statement does not allow for.
    pub fn unexpected(&self) -> Vec<&TheoremException> {
        self.exceptions_found
            .iter()
            .filter(|e| !self.theorem_id.is_expected_exception(&e.speeds))
            .collect()
    }

    pub fn holds(&self) -> bool {
        self.unexpected().is_empty()
    }

    /// Combines reports over disjoint tuple ranges.
    pub fn merge(mut self, other: TheoremScanReport) -> Result<TheoremScanReport> {
        if self.theorem_id != other.theorem_id {
            return Err(Error::invalid("cannot merge reports of different theorems"));
        }
        self.tuples_checked += other.tuples_checked;
        self.exceptions_found.extend(other.exceptions_found);
        self.exceptions_found.sort();
        Ok(self)
    }
}

fn quarter() -> Rational {
    Rational::HALF.checked_mul(Rational::HALF).expect("1/4")
}

/// Checks `ML >= 1/4` on every primitive 4-tuple up to `v_max` meeting the
/// hypothesis of one of the common-factor theorems.
pub fn verify_common_factor_theorem(theorem: TheoremId, v_max: u64) -> Result<TheoremScanReport> {
    if theorem == TheoremId::ShiftedThree {
        return Err(Error::invalid("the shifted theorem is checked by verify_shifted_theorem2"));
    }
    if v_max < 4 {
        return Err(Error::invalid(format!("v_max {v_max} leaves no 4-tuples")));
    }
    let filters = theorem.filters();
    let floor = quarter();
    let blocks: Vec<(u64, u64)> = leading_pairs(4, v_max).collect();
    let (checked, mut exceptions) = blocks
        .par_iter()
        .map(|&lead| -> Result<(u64, Vec<TheoremException>)> {
            let mut checked = 0;
            let mut found = Vec::new();
            for t in block_tuples(4, v_max, lead) {
                if !filters.iter().all(|f| f.accepts(&t)) {
                    continue;
                }
                checked += 1;
                let res = compute_ml_with_floor(&SpeedSet::from_unsigned(t.clone())?, floor)?;
                if res.is_exact() {
                    found.push(TheoremException { speeds: t, offsets: None, ml: res.value });
                }
            }
            Ok((checked, found))
        })
        .try_reduce(
            || (0, Vec::new()),
            |mut a, b| {
                a.0 += b.0;
                a.1.extend(b.1);
                Ok(a)
            },
        )?;
    exceptions.sort();
    Ok(TheoremScanReport {
        theorem_id: theorem,
        tuples_checked: checked,
        exceptions_found: exceptions,
        expected_exceptions: theorem.expected_exceptions().to_string(),
    })
}

pub fn verify_theorem1(v_max: u64) -> Result<TheoremScanReport> {
    verify_common_factor_theorem(TheoremId::ThreeShareFactor, v_max)
}

pub fn verify_theorem3(v_max: u64) -> Result<TheoremScanReport> {
    verify_common_factor_theorem(TheoremId::PairFactorAbove3, v_max)
}

pub fn verify_theorem4(v_max: u64) -> Result<TheoremScanReport> {
    verify_common_factor_theorem(TheoremId::PairFactor3, v_max)
}

/// Draws `trials` seeded random instances of three distinct speeds (gcd 1,
/// at most `v_max`) with start points of denominator at most `q_max`.
pub fn sample_shifted_instances(trials: u64, q_max: u64, v_max: u64, seed: u64) -> Result<Vec<ShiftedInstance>> {
    if v_max < 3 {
        return Err(Error::invalid("v_max must be at least 3 for three distinct speeds"));
    }
    if q_max == 0 {
        return Err(Error::invalid("q_max must be at least 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(trials as usize);
    while (out.len() as u64) < trials {
        let speeds: [u64; 3] = std::array::from_fn(|_| rng.gen_range(1..=v_max));
        let distinct = speeds[0] != speeds[1] && speeds[1] != speeds[2] && speeds[0] != speeds[2];
        if !distinct || speeds.iter().fold(0, |g, &v| gcd_u64(g, v)) != 1 {
            continue;
        }
        let offsets: Vec<Rational> = (0..3)
            .map(|_| {
                let q = rng.gen_range(1..=q_max) as i64;
                let p = rng.gen_range(0..q);
                Rational::new(p, q)
            })
            .collect::<std::result::Result<_, _>>()?;
        let raw: Vec<i64> = speeds.iter().map(|&v| v as i64).collect();
        out.push(ShiftedInstance::new(&raw, &offsets)?);
    }
    Ok(out)
}

/// Checks that three shifted runners always reach distance `1/4` together.
pub fn verify_shifted_theorem2(trials: u64, q_max: u64, v_max: u64, seed: u64) -> Result<TheoremScanReport> {
    let instances = sample_shifted_instances(trials, q_max, v_max, seed)?;
    let floor = quarter();
    let mut exceptions: Vec<TheoremException> = instances
        .par_iter()
        .filter_map(|inst| {
            let res = shifted_ml(inst);
            (res.value < floor).then(|| TheoremException {
                speeds: inst.speeds().to_vec(),
                offsets: Some(inst.offsets().iter().map(|s| s.to_string()).collect()),
                ml: res.value,
            })
        })
        .collect();
    exceptions.sort();
    Ok(TheoremScanReport {
        theorem_id: TheoremId::ShiftedThree,
        tuples_checked: trials,
        exceptions_found: exceptions,
        expected_exceptions: TheoremId::ShiftedThree.expected_exceptions().to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n, d).unwrap()
    }

    #[test]
    fn family_first_members() {
        assert_eq!(family_value(0).unwrap(), r(7, 30));
        assert_eq!(family_value(1).unwrap(), r(9, 38));
        let report = verify_family(0, 1).unwrap();
        assert!(report.all_pass, "{report:?}");
        assert!(verify_family(3, 2).is_err());
    }

    #[test]
    fn lemma3_examples() {
        assert_eq!(lemma3_min_speed(r(1, 3), r(1, 12), 5).unwrap(), 15);
        assert_eq!(lemma3_min_speed(r(1, 2), r(1, 4), 1).unwrap(), 1);
        assert_eq!(lemma3_min_speed(r(2, 5), r(1, 10), 20).unwrap(), 60);
        // Non-integral bound rounds up: (1/3 - 1/7) / (1/7) * 2 = 8/3.
        assert_eq!(lemma3_min_speed(r(1, 3), r(1, 7), 2).unwrap(), 3);
        assert!(lemma3_min_speed(r(1, 4), r(1, 4), 5).is_err());
        assert!(lemma3_min_speed(r(1, 4), Rational::ZERO, 5).is_err());
        assert!(lemma3_min_speed(r(1, 4), r(1, 8), 0).is_err());
    }

    #[test]
    fn lemma4_examples() {
        assert!(lemma4_condition(r(2, 5), 4, 20, 100).unwrap());
        assert!(!lemma4_condition(r(2, 5), 4, 20, 99).unwrap());
        assert!(lemma4_condition(r(1, 2), 4, 1, 3).unwrap());
        assert!(lemma4_condition(r(1, 2), 3, 1, 3).is_err());
        assert!(lemma4_condition(r(1, 2), 4, 3, 3).is_err());
    }

    #[test]
    fn theorem_filters_select_expected_tuples() {
        let t1 = TheoremId::ThreeShareFactor.filters();
        assert!(t1.iter().all(|f| f.accepts(&[2, 3, 4, 6])));
        assert!(!t1.iter().all(|f| f.accepts(&[1, 2, 3, 4])));
        let t3 = TheoremId::PairFactorAbove3.filters();
        assert!(t3.iter().all(|f| f.accepts(&[1, 4, 5, 16])));
        assert!(t3.iter().all(|f| f.accepts(&[5, 20, 101, 106])));
        let t4 = TheoremId::PairFactor3.filters();
        assert!(t4.iter().all(|f| f.accepts(&[1, 2, 3, 6])));
        assert!(t4.iter().all(|f| f.accepts(&[1, 2, 3, 12])));
    }

    #[test]
    fn single_instances_hold() {
        let q = quarter();
        for t in [[2, 3, 4, 6], [1, 4, 5, 16], [5, 20, 101, 106], [1, 2, 3, 6]] {
            let set = SpeedSet::from_unsigned(t.to_vec()).unwrap();
            assert!(compute_ml(&set).value >= q, "{t:?}");
        }
        let set = SpeedSet::from_unsigned(vec![1, 2, 3, 12]).unwrap();
        assert!(compute_ml(&set).value < q);
    }

    #[test]
    fn expected_exception_family() {
        let id = TheoremId::PairFactor3;
        assert!(id.is_expected_exception(&[1, 2, 3, 12]));
        assert!(id.is_expected_exception(&[1, 2, 3, 48]));
        assert!(!id.is_expected_exception(&[1, 2, 3, 18]));
        assert!(!TheoremId::ThreeShareFactor.is_expected_exception(&[1, 2, 3, 12]));
    }

    #[test]
    fn small_theorem_scans() {
        assert!(verify_theorem1(16).unwrap().exceptions_found.is_empty());
        assert!(verify_theorem3(16).unwrap().exceptions_found.is_empty());
        let t4 = verify_theorem4(12).unwrap();
        assert_eq!(t4.exceptions_found.len(), 1);
        assert_eq!(t4.exceptions_found[0].speeds, vec![1, 2, 3, 12]);
        assert!(t4.holds());
    }

    #[test]
    fn report_merge() {
        let a = verify_theorem4(12).unwrap();
        let b = a.clone();
        let m = a.clone().merge(b).unwrap();
        assert_eq!(m.tuples_checked, 2 * a.tuples_checked);
        assert!(a.merge(verify_theorem1(8).unwrap()).is_err());
    }

    #[test]
    fn shifted_sampling_is_seeded() {
        let a = sample_shifted_instances(50, 8, 12, 7).unwrap();
        let b = sample_shifted_instances(50, 8, 12, 7).unwrap();
        let c = sample_shifted_instances(50, 8, 12, 8).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert!(a.iter().all(|i| i.speeds().len() == 3 && i.common_denominator() <= 840));
    }

    proptest! {
        #[test]
        fn lemma3_monotone(l_num in 2i64..50, e1 in 1i64..50, e2 in 1i64..50, v in 1u64..1000, dv in 0u64..100) {
            let l = r(l_num, 100);
            let (small, large) = (r(e1.min(e2), 100), r(e1.max(e2), 100));
            prop_assume!(large < l);
            let at_small = lemma3_min_speed(l, small, v).unwrap();
            let at_large = lemma3_min_speed(l, large, v).unwrap();
            prop_assert!(at_small >= at_large);
            prop_assert!(lemma3_min_speed(l, small, v + dv).unwrap() >= at_small);
        }

        #[test]
        fn lemma4_monotone(l_num in 1i64..50, n in 4u32..8, a in 1u64..100, b in 1u64..1000, db in 0u64..1000) {
            let l = r(l_num, 100);
            let b = a + b;
            if lemma4_condition(l, n, a, b).unwrap() {
                prop_assert!(lemma4_condition(l, n, a, b + db).unwrap());
            }
        }
    }
}

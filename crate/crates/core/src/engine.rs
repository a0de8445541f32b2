//! Exact maximum loneliness of a set of integer speeds.
//!
//! The objective `f(t) = min_i ||t * v_i||` is piecewise linear with period 1
//! and symmetric under `t -> 1 - t`. For a primitive speed set with at least two
//! runners every local maximum sits at a time `m / (v_i + v_j)`, so the maximum
//! is found by scanning that finite set with integer residues only.
//!
//! [`oracle_ml`] reaches the same value by a separate route: it evaluates the
//! objective with [`Rational`] arithmetic on every breakpoint of the envelope
//! (single-runner kinks and all sum/difference crossings) and never relies on
//! the pair-sum restriction.

use serde::{Deserialize, Serialize};

use crate::error::{ArithError, Error, Result};
use crate::rational::{self, gcd_u64, Rational};

/// Largest normalized speed the engine accepts. Keeps every residue product
/// `m * v` (with `m < 2V`) and every cross product within 64 bits.
pub const MAX_SPEED: u64 = 1 << 30;

/// Strictly increasing, primitive (gcd 1) positive speeds.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SpeedSet {
    speeds: Vec<u64>,
    scale: u64,
}

impl SpeedSet {
    /// Sorts the speeds and divides out their gcd. Maximum loneliness is
    /// invariant under both operations.
    pub fn normalize(raw: &[i64]) -> Result<SpeedSet> {
        if raw.is_empty() {
            return Err(Error::EmptySpeeds);
        }
        let mut speeds = Vec::with_capacity(raw.len());
        for &v in raw {
            if v <= 0 {
                return Err(Error::NonPositiveSpeed(v));
            }
            speeds.push(v as u64);
        }
        Self::from_unsigned(speeds)
    }

    pub fn from_unsigned(mut speeds: Vec<u64>) -> Result<SpeedSet> {
        if speeds.is_empty() {
            return Err(Error::EmptySpeeds);
        }
        if let Some(&zero) = speeds.iter().find(|&&v| v == 0) {
            return Err(Error::NonPositiveSpeed(zero as i64));
        }
        speeds.sort_unstable();
        if let Some(w) = speeds.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::DuplicateSpeed(w[0]));
        }
        let scale = speeds.iter().copied().fold(0, gcd_u64);
        if scale > 1 {
            speeds.iter_mut().for_each(|v| *v /= scale);
        }
        let top = *speeds.last().unwrap();
        if top > MAX_SPEED {
            return Err(Error::SpeedTooLarge { speed: top, limit: MAX_SPEED });
        }
        Ok(SpeedSet { speeds, scale })
    }

    pub fn speeds(&self) -> &[u64] {
        &self.speeds
    }

    /// The gcd that was divided out of the raw input.
    pub fn scale(&self) -> u64 {
        self.scale
    }

    pub fn len(&self) -> usize {
        self.speeds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.speeds.is_empty()
    }

    /// `min_i ||t * v_i||` evaluated exactly.
    pub fn objective(&self, t: Rational) -> Result<Rational> {
        let mut best = Rational::HALF;
        for &v in &self.speeds {
            let d = t.checked_mul_int(v as i64)?.circle_norm().value();
            best = best.min(d);
        }
        Ok(best)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// `value` is the exact maximum.
    Exact,
    /// Some time reached the requested floor; `value` is that floor, a lower
    /// bound on the true maximum.
    Floor,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    #[serde(rename = "t", with = "rational::as_text")]
    pub time: Rational,
    /// Indices into the normalized speed list; `None` for a single runner.
    pub pair: Option<(usize, usize)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LonelinessResult {
    pub value: Rational,
    pub witness: Witness,
    pub mode: Mode,
}

impl LonelinessResult {
    pub fn is_exact(&self) -> bool {
        self.mode == Mode::Exact
    }
}

/// One element of the candidate-time stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Candidate {
    pub time: Rational,
    pub pair: (usize, usize),
    /// `time = m / denom` before reduction, `denom = v_i + v_j`.
    pub m: u64,
    pub denom: u64,
}

/// Iterator over the times `m / (v_i + v_j)` with `i < j` and
/// `1 <= m <= (v_i + v_j) / 2`, pairs in lexicographic order.
pub struct CandidateTimes<'a> {
    speeds: &'a [u64],
    i: usize,
    j: usize,
    m: u64,
}

impl Iterator for CandidateTimes<'_> {
    type Item = Candidate;

    fn next(&mut self) -> Option<Candidate> {
        let n = self.speeds.len();
        loop {
            if self.i + 1 >= n {
                return None;
            }
            let denom = self.speeds[self.i] + self.speeds[self.j];
            if self.m <= denom / 2 {
                let m = self.m;
                self.m += 1;
                let time = Rational::new(m as i64, denom as i64).expect("bounded speeds");
                return Some(Candidate { time, pair: (self.i, self.j), m, denom });
            }
            self.m = 1;
            self.j += 1;
            if self.j >= n {
                self.i += 1;
                self.j = self.i + 1;
            }
        }
    }
}

pub fn candidate_times(set: &SpeedSet) -> CandidateTimes<'_> {
    CandidateTimes { speeds: &set.speeds, i: 0, j: 1, m: 1 }
}

/// Best candidate found so far, kept as the unreduced score `num / denom`.
#[derive(Clone, Copy)]
struct Best {
    num: u64,
    denom: u64,
    m: u64,
    pair: (usize, usize),
}

impl Best {
    fn into_result(self, mode: Mode) -> LonelinessResult {
        LonelinessResult {
            value: Rational::new(self.num as i64, self.denom as i64).expect("bounded speeds"),
            witness: Witness {
                time: Rational::new(self.m as i64, self.denom as i64).expect("bounded speeds"),
                pair: Some(self.pair),
            },
            mode,
        }
    }
}

fn single_runner(v: u64) -> LonelinessResult {
    LonelinessResult {
        value: Rational::HALF,
        witness: Witness {
            time: Rational::new(1, 2 * v as i64).expect("bounded speeds"),
            pair: None,
        },
        mode: Mode::Exact,
    }
}

/// Maximum of `min_i ||t * v_i||` over all real `t`, with a witness time.
///
/// Ties between maximizers go to the smallest pair sum, then the smallest `m`.
pub fn compute_ml(set: &SpeedSet) -> LonelinessResult {
    search(set, None)
}

/// Like [`compute_ml`], but stops at the first candidate whose objective
/// reaches `floor` and reports [`Mode::Floor`].
pub fn compute_ml_with_floor(set: &SpeedSet, floor: Rational) -> Result<LonelinessResult> {
    if !floor.is_positive() || floor > Rational::HALF {
        return Err(Error::InvalidFloor(floor));
    }
    Ok(search(set, Some(floor)))
}

fn search(set: &SpeedSet, floor: Option<Rational>) -> LonelinessResult {
    let speeds = &set.speeds;
    let n = speeds.len();
    if n == 1 {
        // 1/2 reaches every admissible floor.
        let mut r = single_runner(speeds[0]);
        if let Some(f) = floor {
            r.value = f;
            r.mode = Mode::Floor;
        }
        return r;
    }
    // Scores and pair sums stay below 2^31, so score/denom cross products fit
    // in u64; the caller's floor may be arbitrary and is compared at u128.
    let floor_pq = floor.map(|f| (f.num() as u128, f.den() as u128));

    let mut best: Option<Best> = None;
    let mut residues = vec![0u64; n];
    let mut steps = vec![0u64; n];
    for i in 0..n {
        for j in i + 1..n {
            let denom = speeds[i] + speeds[j];
            let half = denom / 2;
            if let Some(b) = best {
                // Nothing at this denominator can beat or tie-break-win.
                let cap = half * b.denom;
                let cur = b.num * denom;
                if cap < cur || (cap == cur && denom >= b.denom) {
                    continue;
                }
            }
            residues.fill(0);
            for (step, &v) in steps.iter_mut().zip(speeds) {
                *step = v % denom;
            }
            for m in 1..=half {
                let mut score = u64::MAX;
                for (r, &step) in residues.iter_mut().zip(&steps) {
                    *r += step;
                    if *r >= denom {
                        *r -= denom;
                    }
                    let d = (*r).min(denom - *r);
                    if d < score {
                        score = d;
                    }
                }
                let better = match best {
                    None => true,
                    Some(b) => {
                        let lhs = score * b.denom;
                        let rhs = b.num * denom;
                        lhs > rhs || (lhs == rhs && denom < b.denom)
                    }
                };
                if better {
                    let cand = Best { num: score, denom, m, pair: (i, j) };
                    if let Some((p, q)) = floor_pq {
                        if score as u128 * q >= p * denom as u128 {
                            let mut r = cand.into_result(Mode::Floor);
                            r.value = floor.unwrap();
                            return r;
                        }
                    }
                    best = Some(cand);
                }
            }
        }
    }
    best.expect("n >= 2 yields at least one candidate").into_result(Mode::Exact)
}

/// Independent maximization over the full breakpoint superset using
/// [`Rational`] evaluation.
pub fn oracle_ml(set: &SpeedSet) -> Result<LonelinessResult> {
    let speeds = &set.speeds;
    let n = speeds.len();
    let mut best: Option<(Rational, Witness)> = None;
    let mut consider = |time: Rational, pair: Option<(usize, usize)>| -> Result<()> {
        let value = set.objective(time)?;
        if best.map_or(true, |(b, _)| value > b) {
            best = Some((value, Witness { time, pair }));
        }
        Ok(())
    };
    for (i, &vi) in speeds.iter().enumerate() {
        // Kinks of ||t v_i||: peaks and zeros at multiples of 1/(2 v_i).
        let denom = 2 * vi as i64;
        for m in 0..denom {
            let pair = if n == 1 { None } else { Some((i, i)) };
            consider(Rational::new(m, denom)?, pair)?;
        }
        for (j, &vj) in speeds.iter().enumerate().skip(i + 1) {
            let sum = (vi + vj) as i64;
            for m in 0..sum {
                consider(Rational::new(m, sum)?, Some((i, j)))?;
            }
            let diff = (vj - vi) as i64;
            for m in 0..diff {
                consider(Rational::new(m, diff)?, Some((i, j)))?;
            }
        }
    }
    let (value, witness) = best.ok_or(Error::EmptySpeeds)?;
    Ok(LonelinessResult { value, witness, mode: Mode::Exact })
}

/// Checks that advancing time by `h/g` leaves `min(||t v1||, ||t v2||)`
/// unchanged when `g` divides both speeds.
pub fn prejump_invariant(v1: u64, v2: u64, g: u64, t: Rational, h: i64) -> Result<bool> {
    if g == 0 || v1 % g != 0 || v2 % g != 0 {
        return Err(Error::invalid(format!("{g} does not divide both {v1} and {v2}")));
    }
    let pair_min = |time: Rational| -> std::result::Result<Rational, ArithError> {
        let a = time.checked_mul_int(v1 as i64)?.circle_norm().value();
        let b = time.checked_mul_int(v2 as i64)?.circle_norm().value();
        Ok(a.min(b))
    };
    let jumped = t.checked_add(Rational::new(h, g as i64)?)?;
    Ok(pair_min(t)? == pair_min(jumped)?)
}

/// JSON form of a loneliness computation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MlReport {
    pub speeds: Vec<u64>,
    pub scale: u64,
    #[serde(with = "rational::as_text")]
    pub ml: Rational,
    pub mode: Mode,
    pub witness: Witness,
}

impl MlReport {
    pub fn new(set: &SpeedSet, result: &LonelinessResult) -> Self {
        MlReport {
            speeds: set.speeds.clone(),
            scale: set.scale,
            ml: result.value,
            mode: result.mode,
            witness: result.witness,
        }
    }
}

//! Loneliness with individual starting points: maximize
//! `min_k ||t * v_k + s_k||` over real `t`.
//!
//! A local maximum of the shifted envelope is either a runner at the antipode
//! or two runners at equal distance on opposite sides of the origin, so every
//! maximizer solves `t (v_i + v_j) + s_i + s_j = m` for some `i <= j` and
//! integer `m`. With all offsets over a common denominator `Q` these times are
//! `N / (Q (v_i + v_j))` and the search runs on integer residues.

use crate::engine::{LonelinessResult, Mode, Witness, MAX_SPEED};
use crate::error::{Error, Result};
use crate::rational::{gcd_u64, Rational};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShiftedInstance {
    speeds: Vec<u64>,
    offsets: Vec<Rational>,
    common_den: u64,
    /// Offsets as numerators over `common_den`.
    offset_nums: Vec<u64>,
}

impl ShiftedInstance {
    /// Pairs each speed with its start point, sorts by speed and divides the
    /// speeds by their gcd. Offsets are folded into `[0, 1)`.
    pub fn new(speeds: &[i64], offsets: &[Rational]) -> Result<ShiftedInstance> {
        if speeds.is_empty() {
            return Err(Error::EmptySpeeds);
        }
        if speeds.len() != offsets.len() {
            return Err(Error::invalid(format!(
                "{} speeds but {} offsets",
                speeds.len(),
                offsets.len()
            )));
        }
        let mut runners = Vec::with_capacity(speeds.len());
        for (&v, &s) in speeds.iter().zip(offsets) {
            if v <= 0 {
                return Err(Error::NonPositiveSpeed(v));
            }
            runners.push((v as u64, s.fract()));
        }
        runners.sort_unstable_by_key(|&(v, _)| v);
        if let Some(w) = runners.windows(2).find(|w| w[0].0 == w[1].0) {
            return Err(Error::DuplicateSpeed(w[0].0));
        }
        let g = runners.iter().fold(0, |g, &(v, _)| gcd_u64(g, v));
        let speeds: Vec<u64> = runners.iter().map(|&(v, _)| v / g).collect();
        let offsets: Vec<Rational> = runners.iter().map(|&(_, s)| s).collect();

        let top = *speeds.last().unwrap();
        if top > MAX_SPEED {
            return Err(Error::SpeedTooLarge { speed: top, limit: MAX_SPEED });
        }
        let mut q: u64 = 1;
        for s in &offsets {
            let d = s.den() as u64;
            q = (q / gcd_u64(q, d)).checked_mul(d).ok_or(Error::OffsetTooLarge(u64::MAX))?;
        }
        // Q * (v_i + v_j) must fit i64 so witness times and values stay representable.
        let budget = (i64::MAX as u64) / (2 * top);
        if q > budget {
            return Err(Error::OffsetTooLarge(q));
        }
        let offset_nums = offsets
            .iter()
            .map(|s| s.num() as u64 * (q / s.den() as u64))
            .collect();
        Ok(ShiftedInstance { speeds, offsets, common_den: q, offset_nums })
    }

    pub fn speeds(&self) -> &[u64] {
        &self.speeds
    }

    pub fn offsets(&self) -> &[Rational] {
        &self.offsets
    }

    pub fn common_denominator(&self) -> u64 {
        self.common_den
    }

    /// `min_k ||t v_k + s_k||` evaluated exactly.
    pub fn objective(&self, t: Rational) -> Result<Rational> {
        let mut best = Rational::HALF;
        for (&v, &s) in self.speeds.iter().zip(&self.offsets) {
            let pos = t.checked_mul_int(v as i64)?.checked_add(s)?;
            best = best.min(pos.circle_norm().value());
        }
        Ok(best)
    }
}

/// Exact maximum over the candidate times `(m - s_i - s_j) / (v_i + v_j)`,
/// `i <= j`, `t` in `[0, 1)`.
pub fn shifted_ml(inst: &ShiftedInstance) -> LonelinessResult {
    let speeds = &inst.speeds;
    let nums = &inst.offset_nums;
    let q = inst.common_den as u128;
    let n = speeds.len();

    // (score, period, numerator, pair); value = score / period, time = numerator / period.
    let mut best: Option<(u128, u128, u128, (usize, usize))> = None;
    for i in 0..n {
        for j in i..n {
            let d = (speeds[i] + speeds[j]) as u128;
            let period = q * d;
            let shift = (nums[i] + nums[j]) as u128 % q;
            let mut numer = (q - shift) % q;
            while numer < period {
                let mut score = u128::MAX;
                for (&v, &a) in speeds.iter().zip(nums) {
                    let r = (numer * v as u128 + a as u128 * d) % period;
                    score = score.min(r.min(period - r));
                }
                let better = match best {
                    None => true,
                    Some((bs, bp, _, _)) => {
                        let lhs = score * bp;
                        let rhs = bs * period;
                        lhs > rhs || (lhs == rhs && period < bp)
                    }
                };
                if better {
                    best = Some((score, period, numer, (i, j)));
                }
                numer += q;
            }
        }
    }
    let (score, period, numer, pair) = best.expect("at least one runner");
    let rat = |a: u128, b: u128| Rational::from_i128(a as i128, b as i128).expect("width checked");
    LonelinessResult {
        value: rat(score, period),
        witness: Witness { time: rat(numer, period), pair: Some(pair) },
        mode: Mode::Exact,
    }
}

/// Independent check of [`shifted_ml`]: evaluates the objective with
/// [`Rational`] arithmetic at every kink and every sum/difference crossing.
pub fn shifted_oracle(inst: &ShiftedInstance) -> Result<LonelinessResult> {
    let speeds = &inst.speeds;
    let offsets = &inst.offsets;
    let mut best: Option<(Rational, Witness)> = None;
    let mut consider = |raw: Rational, pair: (usize, usize)| -> Result<()> {
        let time = raw.fract();
        let value = inst.objective(time)?;
        if best.map_or(true, |(b, _)| value > b) {
            best = Some((value, Witness { time, pair: Some(pair) }));
        }
        Ok(())
    };
    for (i, (&vi, &si)) in speeds.iter().zip(offsets).enumerate() {
        let vi = vi as i64;
        // t v_i + s_i = m / 2
        for m in 0..2 * vi {
            let t = Rational::new(m, 2)?.checked_sub(si)?.checked_div(Rational::from_integer(vi))?;
            consider(t, (i, i))?;
        }
        for (j, (&vj, &sj)) in speeds.iter().zip(offsets).enumerate().skip(i + 1) {
            let vj = vj as i64;
            let sum = Rational::from_integer(vi + vj);
            let diff = Rational::from_integer(vj - vi);
            let both = si.checked_add(sj)?;
            let gap = sj.checked_sub(si)?;
            for m in 0..vi + vj {
                consider(Rational::from_integer(m).checked_sub(both)?.checked_div(sum)?, (i, j))?;
            }
            for m in 0..vj - vi {
                consider(Rational::from_integer(m).checked_sub(gap)?.checked_div(diff)?, (i, j))?;
            }
        }
    }
    let (value, witness) = best.ok_or(Error::EmptySpeeds)?;
    Ok(LonelinessResult { value, witness, mode: Mode::Exact })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{compute_ml, SpeedSet};

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n, d).unwrap()
    }

    #[test]
    fn zero_offsets_match_unshifted() {
        let inst = ShiftedInstance::new(&[1, 2, 3], &[Rational::ZERO; 3]).unwrap();
        assert_eq!(shifted_ml(&inst).value, r(1, 4));
        assert_eq!(shifted_oracle(&inst).unwrap().value, r(1, 4));
        let inst = ShiftedInstance::new(&[8, 3, 11, 19], &[Rational::ZERO; 4]).unwrap();
        let unshifted = compute_ml(&SpeedSet::normalize(&[8, 3, 11, 19]).unwrap());
        assert_eq!(shifted_ml(&inst).value, unshifted.value);
    }

    #[test]
    fn antipodal_start() {
        let inst = ShiftedInstance::new(&[7], &[r(1, 2)]).unwrap();
        let res = shifted_ml(&inst);
        assert_eq!(res.value, Rational::HALF);
        assert_eq!(res.witness.time, Rational::ZERO);
        assert_eq!(shifted_oracle(&inst).unwrap().value, Rational::HALF);
    }

    #[test]
    fn half_shifted_tight_set() {
        let inst = ShiftedInstance::new(&[1, 2, 3], &[r(1, 2), Rational::ZERO, r(1, 2)]).unwrap();
        let res = shifted_ml(&inst);
        assert_eq!(res.value, r(1, 4));
        assert_eq!(inst.objective(res.witness.time).unwrap(), r(1, 4));
        assert_eq!(shifted_oracle(&inst).unwrap().value, r(1, 4));
    }

    #[test]
    fn offsets_fold_and_follow_their_speed() {
        let inst = ShiftedInstance::new(&[3, 1], &[r(5, 4), r(-1, 3)]).unwrap();
        assert_eq!(inst.speeds(), &[1, 3]);
        assert_eq!(inst.offsets(), &[r(2, 3), r(1, 4)]);
        assert_eq!(inst.common_denominator(), 12);
    }

    #[test]
    fn rejects_bad_instances() {
        assert!(ShiftedInstance::new(&[1, 2], &[Rational::ZERO]).is_err());
        assert!(ShiftedInstance::new(&[2, 2], &[Rational::ZERO; 2]).is_err());
        assert!(ShiftedInstance::new(&[0], &[Rational::ZERO]).is_err());
        let huge = r(1, (1 << 40) + 1);
        let err = ShiftedInstance::new(&[1, 1 << 29], &[huge, r(1, 3)]).unwrap_err();
        assert!(err.is_width_exceeded());
    }
}

//! Classification of loneliness values against the floor `1/n` and the
//! lattice of values `s / (n s + k)` with `1 <= k <= n`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::Rational;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpectrumKind {
    AtLeastFloor,
    SpectrumPoint,
    AmendedViolation,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpectrumClass {
    pub kind: SpectrumKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_min: Option<u32>,
    pub all_k: Vec<u32>,
    pub lrc_violation: bool,
}

impl SpectrumClass {
    pub fn at_least_floor() -> Self {
        SpectrumClass {
            kind: SpectrumKind::AtLeastFloor,
            s: None,
            k_min: None,
            all_k: Vec::new(),
            lrc_violation: false,
        }
    }
}

/// `s / (n s + k)`, reduced.
pub fn spectrum_value(n: u32, s: u64, k: u32) -> Result<Rational> {
    if n == 0 || s == 0 || k == 0 || k > n {
        return Err(Error::invalid(format!(
            "spectrum parameters need n >= 1, s >= 1, 1 <= k <= n (got n={n}, s={s}, k={k})"
        )));
    }
    let den = (n as i128) * (s as i128) + k as i128;
    Ok(Rational::from_i128(s as i128, den)?)
}

/// Places `value` relative to `1/n` and the spectrum lattice.
///
/// Values at or above `1/n` are `at-least-floor`. Below it, every `k` in
/// `1..=n` with an integer `s = p k / (q - n p) >= 1` is recorded. Values
/// below `1/(n+1)` are flagged as lonely-runner violations and never count as
/// spectrum points: the lattice form alone cannot place a value outside the
/// interval `[1/(n+1), 1/n)`.
pub fn classify(n: u32, value: Rational) -> Result<SpectrumClass> {
    if n == 0 {
        return Err(Error::invalid("runner count must be at least 1"));
    }
    if !value.is_positive() || value > Rational::HALF {
        return Err(Error::invalid(format!("loneliness value {value} outside (0, 1/2]")));
    }
    let p = value.num() as i128;
    let q = value.den() as i128;
    let n_big = n as i128;
    // value >= 1/n  <=>  n p >= q
    if n_big * p >= q {
        return Ok(SpectrumClass::at_least_floor());
    }
    // value < 1/(n+1)  <=>  (n+1) p < q
    let lrc_violation = (n_big + 1) * p < q;
    let gap = q - n_big * p;
    let all_k: Vec<u32> = if lrc_violation {
        Vec::new()
    } else {
        (1..=n).filter(|&k| (p * k as i128) % gap == 0).collect()
    };
    match all_k.first() {
        Some(&k) => {
            let s = (p * k as i128) / gap;
            Ok(SpectrumClass {
                kind: SpectrumKind::SpectrumPoint,
                s: Some(s as u64),
                k_min: Some(k),
                all_k,
                lrc_violation,
            })
        }
        None => Ok(SpectrumClass {
            kind: SpectrumKind::AmendedViolation,
            s: None,
            k_min: None,
            all_k,
            lrc_violation,
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n, d).unwrap()
    }

    fn point(n: u32, v: Rational) -> (u64, u32, Vec<u32>) {
        let c = classify(n, v).unwrap();
        assert_eq!(c.kind, SpectrumKind::SpectrumPoint, "{v} for n={n}");
        (c.s.unwrap(), c.k_min.unwrap(), c.all_k)
    }

    #[test]
    fn classify_examples() {
        assert_eq!(point(4, r(7, 30)), (7, 2, vec![2, 4]));
        assert_eq!(point(6, r(8, 51)), (8, 3, vec![3, 6]));
        assert_eq!(point(3, r(2, 7)), (2, 1, vec![1, 2, 3]));
        assert_eq!(classify(4, r(1, 4)).unwrap().kind, SpectrumKind::AtLeastFloor);
        assert_eq!(point(4, r(1, 5)), (1, 1, vec![1, 2, 3, 4]));

        let c = classify(4, r(1, 6)).unwrap();
        assert_eq!(c.kind, SpectrumKind::AmendedViolation);
        assert!(c.lrc_violation);
        assert!(c.all_k.is_empty());
    }

    #[test]
    fn amended_violation_inside_interval() {
        // 3/14: gap 2, so k must be even.
        assert_eq!(point(4, r(3, 14)), (3, 2, vec![2, 4]));
        // 6/25: gap 1, every k works.
        assert_eq!(point(4, r(6, 25)), (6, 1, vec![1, 2, 3, 4]));
        // 5/23 with n = 4: gap 3, needs 5k divisible by 3 -> k = 3, s = 5.
        assert_eq!(point(4, r(5, 23)), (5, 3, vec![3]));
        // 9/41 with n = 4: gap 5, 9k divisible by 5 has no k <= 4.
        let c = classify(4, r(9, 41)).unwrap();
        assert_eq!(c.kind, SpectrumKind::AmendedViolation);
        assert!(!c.lrc_violation);
    }

    #[test]
    fn classify_rejects_out_of_range() {
        assert!(classify(4, Rational::ZERO).is_err());
        assert!(classify(4, r(2, 3)).is_err());
        assert!(classify(0, r(1, 3)).is_err());
    }

    #[test]
    fn spectrum_value_examples() {
        assert_eq!(spectrum_value(4, 7, 2).unwrap(), r(7, 30));
        assert_eq!(spectrum_value(3, 1, 1).unwrap(), r(1, 4));
        assert_eq!(spectrum_value(4, 2, 2).unwrap(), r(1, 5));
        assert!(spectrum_value(4, 1, 5).is_err());
        assert!(spectrum_value(4, 0, 1).is_err());
    }

    #[test]
    fn classify_json() {
        let json = serde_json::to_value(classify(4, r(7, 30)).unwrap()).unwrap();
        assert_eq!(
            json,
            serde_json::json!({"kind":"spectrum-point","s":7,"k_min":2,"all_k":[2,4],"lrc_violation":false})
        );
        let json = serde_json::to_value(classify(4, r(1, 3)).unwrap()).unwrap();
        assert_eq!(json, serde_json::json!({"kind":"at-least-floor","all_k":[],"lrc_violation":false}));
    }

    proptest! {
        #[test]
        fn round_trip(n in 2u32..8, s in 1u64..500, k in 1u32..8) {
            prop_assume!(k <= n);
            let v = spectrum_value(n, s, k).unwrap();
            let c = classify(n, v).unwrap();
            if s >= k as u64 {
                prop_assert!(c.all_k.contains(&k));
                let k_min = c.k_min.unwrap();
                let s_min = c.s.unwrap();
                prop_assert_eq!(spectrum_value(n, s_min, k_min).unwrap(), v);
            } else {
                prop_assert!(c.lrc_violation);
            }
        }

        #[test]
        fn deterministic(n in 1u32..8, p in 1i64..200, q in 2i64..2000) {
            let v = r(p, q);
            prop_assume!(v <= Rational::HALF);
            prop_assert_eq!(classify(n, v).unwrap(), classify(n, v).unwrap());
        }
    }
}

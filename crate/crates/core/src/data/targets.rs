use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::data::Source;
use crate::error::{Error, Result};

/// The three synthetic regression targets on `(0, 1]`:
///
/// - `F1(x) = x²/2 − 5/(1 + eˣ)`
/// - `F2(x) = 6x⁵ − 3/(1 + eˣ) + eˣ − 9 log₁₀ x`
/// - `F3(x) = 22x²⁰ − 1/(1 + eˣ) + 2eˣ + 5 log₁₀ x`
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TargetFn {
    F1,
    F2,
    F3,
}

impl TargetFn {
    pub const ALL: [TargetFn; 3] = [TargetFn::F1, TargetFn::F2, TargetFn::F3];

    pub fn source(self) -> Source {
        match self {
            TargetFn::F1 => Source::F1,
            TargetFn::F2 => Source::F2,
            TargetFn::F3 => Source::F3,
        }
    }

    fn raw(self, x: f64) -> f64 {
        let logistic = 1.0 / (1.0 + x.exp());
        match self {
            TargetFn::F1 => 0.5 * x * x - 5.0 * logistic,
            TargetFn::F2 => 6.0 * x.powi(5) - 3.0 * logistic + x.exp() - 9.0 * x.log10(),
            TargetFn::F3 => 22.0 * x.powi(20) - logistic + 2.0 * x.exp() + 5.0 * x.log10(),
        }
    }
}

impl fmt::Display for TargetFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TargetFn::F1 => "f1",
            TargetFn::F2 => "f2",
            TargetFn::F3 => "f3",
        })
    }
}

impl FromStr for TargetFn {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "f1" => Ok(TargetFn::F1),
            "f2" => Ok(TargetFn::F2),
            "f3" => Ok(TargetFn::F3),
            _ => Err(Error::config(format!("unknown target function {s:?}"))),
        }
    }
}

/// Evaluates a target on `0 < x <= 1`.
pub fn eval_target(which: TargetFn, x: f64) -> Result<f64> {
    if !(x > 0.0 && x <= 1.0) {
        return Err(Error::Domain {
            what: "target function input (0, 1]",
            value: x,
        });
    }
    Ok(which.raw(x))
}

#[cfg(test)]
mod tests {
    use super::*;

    // 40-digit evaluations.
    #[allow(clippy::excessive_precision)]
    const REFERENCE: [(f64, [f64; 3]); 5] = [
        (
            0.015,
            [
                -2.481137851554590024,
                15.94154152673808379,
                -7.585567645801073836,
            ],
        ),
        (
            0.25,
            [
                -2.157867495571009480,
                5.394954216296797310,
                -0.8800726223585219965,
            ],
        ),
        (
            0.5,
            [
                -1.762703343990727177,
                3.412869225281522598,
                1.414772875117165820,
            ],
        ),
        (
            0.9,
            [
                -1.040252486874980183,
                5.547209034078037683,
                7.076054673128052000,
            ],
        ),
        (
            1.0,
            [
                -0.8447071068499756037,
                7.911457564349059873,
                27.16762223554809535,
            ],
        ),
    ];

    #[test]
    fn matches_high_precision_values() {
        for (x, ys) in REFERENCE {
            for (f, y) in TargetFn::ALL.into_iter().zip(ys) {
                let got = eval_target(f, x).unwrap();
                assert!(
                    (got - y).abs() <= 1e-12 * y.abs(),
                    "{f}({x}) = {got}, want {y}"
                );
            }
        }
        assert!((eval_target(TargetFn::F2, 1.0).unwrap() - 7.9114576).abs() < 1e-7);
    }

    #[test]
    fn f1_at_zero_is_minus_two_and_a_half() {
        assert_eq!(TargetFn::F1.raw(0.0), -2.5);
    }

    /// The same formulas rearranged: `1/(1+eˣ)` as `e⁻ˣ/(1+e⁻ˣ)`, `log₁₀` as
    /// `ln / ln 10`, powers by repeated multiplication.
    fn rearranged(f: TargetFn, x: f64) -> f64 {
        let en = (-x).exp();
        let logistic = en / (1.0 + en);
        let log10 = x.ln() / std::f64::consts::LN_10;
        let pow = |k: usize| (0..k).fold(1.0, |acc, _| acc * x);
        match f {
            TargetFn::F1 => pow(2) / 2.0 - 5.0 * logistic,
            TargetFn::F2 => 6.0 * pow(5) - 3.0 * logistic + x.exp() - 9.0 * log10,
            TargetFn::F3 => 22.0 * pow(20) - logistic + 2.0 * x.exp() + 5.0 * log10,
        }
    }

    #[test]
    fn agrees_with_rearranged_formulas_on_a_grid() {
        for i in 1..=1000 {
            let x = f64::from(i) / 1000.0;
            for f in TargetFn::ALL {
                let a = eval_target(f, x).unwrap();
                let b = rearranged(f, x);
                assert!(
                    (a - b).abs() <= 1e-12 * a.abs().max(1.0),
                    "{f}({x}): {a} vs {b}"
                );
            }
        }
    }

    #[test]
    fn domain() {
        for x in [0.0, -0.1, 1.5, f64::NAN] {
            assert!(matches!(
                eval_target(TargetFn::F1, x),
                Err(Error::Domain { .. })
            ));
        }
        assert!(eval_target(TargetFn::F3, 1e-6).unwrap().is_finite());
    }

    #[test]
    fn parse() {
        assert_eq!("F2".parse::<TargetFn>().unwrap(), TargetFn::F2);
        assert!("f4".parse::<TargetFn>().is_err());
    }
}

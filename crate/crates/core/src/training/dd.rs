//! Double-double arithmetic (about 32 significant digits) for the
//! finite-difference reference. Sums and products use the error-free
//! transforms TwoSum and TwoProd (via fused multiply-add).

use std::cmp::Ordering;
use std::ops::{Add, Div, Mul, Neg, Sub};

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub(crate) struct Dd {
    hi: f64,
    lo: f64,
}

const LN2: Dd = Dd {
    hi: std::f64::consts::LN_2,
    lo: 2.319_046_813_846_299_6e-17,
};

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };
    pub const ONE: Dd = Dd { hi: 1.0, lo: 0.0 };

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    pub fn abs(self) -> Dd {
        if self.hi < 0.0 {
            -self
        } else {
            self
        }
    }

    fn scale_pow2(self, k: i32) -> Dd {
        let f = 2f64.powi(k);
        Dd {
            hi: self.hi * f,
            lo: self.lo * f,
        }
    }

    pub fn powi(self, p: u32) -> Dd {
        (0..p).fold(Dd::ONE, |acc, _| acc * self)
    }

    pub fn exp(self) -> Dd {
        if self.hi > 709.0 {
            return Dd::from(f64::INFINITY);
        }
        if self.hi < -745.0 {
            return Dd::ZERO;
        }
        // x = k ln2 + r, then exp(r) = exp(r / 32)^32.
        let k = (self.hi / LN2.hi).round();
        let r = (self - LN2 * Dd::from(k)).scale_pow2(-5);
        let mut sum = Dd::ONE;
        let mut term = Dd::ONE;
        for n in 1..=14 {
            term = term * r / Dd::from(f64::from(n));
            sum = sum + term;
        }
        for _ in 0..5 {
            sum = sum * sum;
        }
        sum.scale_pow2(k as i32)
    }

    /// Natural log by Newton steps on `exp`.
    pub fn ln(self) -> Dd {
        let mut x = Dd::from(self.hi.ln());
        for _ in 0..2 {
            x = x + self * (-x).exp() - Dd::ONE;
        }
        x
    }
}

impl From<f64> for Dd {
    fn from(hi: f64) -> Self {
        Dd { hi, lo: 0.0 }
    }
}

impl Neg for Dd {
    type Output = Dd;
    fn neg(self) -> Dd {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl Add for Dd {
    type Output = Dd;
    fn add(self, y: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, y.hi);
        let (t, f) = two_sum(self.lo, y.lo);
        let (s, e) = quick_two_sum(s, e + t);
        let (hi, lo) = quick_two_sum(s, e + f);
        Dd { hi, lo }
    }
}

impl Sub for Dd {
    type Output = Dd;
    fn sub(self, y: Dd) -> Dd {
        self + (-y)
    }
}

impl Mul for Dd {
    type Output = Dd;
    fn mul(self, y: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, y.hi);
        let (hi, lo) = quick_two_sum(p, e + (self.hi * y.lo + self.lo * y.hi));
        Dd { hi, lo }
    }
}

impl Div for Dd {
    type Output = Dd;
    fn div(self, y: Dd) -> Dd {
        let q1 = self.hi / y.hi;
        let r = self - y * Dd::from(q1);
        let q2 = r.hi / y.hi;
        let r = r - y * Dd::from(q2);
        let q3 = r.hi / y.hi;
        let (hi, lo) = quick_two_sum(q1, q2);
        Dd { hi, lo } + Dd::from(q3)
    }
}

impl PartialOrd for Dd {
    fn partial_cmp(&self, other: &Dd) -> Option<Ordering> {
        match self.hi.partial_cmp(&other.hi)? {
            Ordering::Equal => self.lo.partial_cmp(&other.lo),
            o => Some(o),
        }
    }
}

#[cfg(test)]
#[allow(clippy::excessive_precision)]
mod tests {
    use super::*;

    // Differences from the nearest f64, from 40-digit references.
    #[test]
    fn matches_reference_tails() {
        let third = Dd::ONE / Dd::from(3.0);
        assert_eq!(third.hi, 1.0 / 3.0);
        assert!((third.lo - 1.850_371_707_708_594_2e-17).abs() < 1e-31);

        let e = Dd::from(0.5).exp();
        assert_eq!(e.hi, 1.648_721_270_700_128_2);
        assert!((e.lo + 4.731_568_479_435_833_5e-17).abs() < 1e-30);

        let l = Dd::from(0.5).ln();
        assert_eq!(l.hi, -std::f64::consts::LN_2);
        assert!((l.lo + 2.319_046_813_846_299_6e-17).abs() < 1e-30);
    }

    #[test]
    fn exp_ln_round_trip() {
        for x in [-30.0, -1.0, -1e-3, 0.0, 0.7, 5.0, 100.0] {
            let d = Dd::from(x);
            let back = d.exp().ln();
            assert!((back - d).abs().to_f64() <= 1e-29, "{x}");
        }
    }

    #[test]
    fn products_keep_the_tail() {
        let a = Dd::from(1.0 + f64::EPSILON);
        let sq = a * a;
        assert_eq!(sq.hi, 1.0 + 2.0 * f64::EPSILON);
        assert_eq!(sq.lo, f64::EPSILON * f64::EPSILON);
        assert_eq!(Dd::from(3.0).powi(4).to_f64(), 81.0);
    }
}

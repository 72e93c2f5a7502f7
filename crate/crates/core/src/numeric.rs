//! Floating-point helpers for `no_std`: thin `libm` wrappers, compensated
//! summation, and the scaled complementary error function.

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::lattice::Rational;

pub const PI: f64 = core::f64::consts::PI;

#[inline]
pub fn exp(x: f64) -> f64 {
    libm::exp(x)
}

#[inline]
pub fn expm1(x: f64) -> f64 {
    libm::expm1(x)
}

#[inline]
pub fn ln(x: f64) -> f64 {
    libm::log(x)
}

#[inline]
pub fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

#[inline]
pub fn floor(x: f64) -> f64 {
    libm::floor(x)
}

#[inline]
pub fn ceil(x: f64) -> f64 {
    libm::ceil(x)
}

#[inline]
pub fn round(x: f64) -> f64 {
    libm::round(x)
}

#[inline]
pub fn powf(x: f64, y: f64) -> f64 {
    libm::pow(x, y)
}

#[inline]
pub fn erfc(x: f64) -> f64 {
    libm::erfc(x)
}

/// Neumaier's variant of Kahan summation.
#[derive(Debug, Default, Clone, Copy)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if libm::fabs(self.sum) >= libm::fabs(x) {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

pub fn compensated_sum<I: IntoIterator<Item = f64>>(xs: I) -> f64 {
    let mut acc = CompensatedSum::new();
    for x in xs {
        acc.add(x);
    }
    acc.value()
}

/// `exp(x^2) * erfc(x)` for `x >= 0`, without overflow or underflow.
pub fn erfcx(x: f64) -> f64 {
    debug_assert!(x >= 0.0);
    if x < 25.0 {
        return exp(x * x) * erfc(x);
    }
    // Continued fraction erfc(x) = e^{-x^2}/sqrt(pi) * 1/(x + (1/2)/(x + 1/(x + (3/2)/(x + ...))))
    // evaluated with the modified Lentz method.
    let tiny = 1e-300;
    let mut f = x;
    let mut c = x;
    let mut d = 0.0;
    for k in 1..200 {
        let a = k as f64 / 2.0;
        d = x + a * d;
        if d == 0.0 {
            d = tiny;
        }
        c = x + a / c;
        if c == 0.0 {
            c = tiny;
        }
        d = 1.0 / d;
        let delta = c * d;
        f *= delta;
        if libm::fabs(delta - 1.0) < 1e-16 {
            break;
        }
    }
    1.0 / (sqrt(PI) * f)
}

/// Natural log of the standard normal upper tail `P(Z > z)` for `z >= 0`.
pub fn ln_normal_tail(z: f64) -> f64 {
    let x = z / core::f64::consts::SQRT_2;
    ln(0.5) + ln(erfcx(x)) - x * x
}

/// Nearest `f64` to a rational.
pub fn rational_to_f64(r: &Rational) -> f64 {
    if r.is_zero() {
        return 0.0;
    }
    let n = r.numer();
    let d = r.denom();
    if let (Some(a), Some(b)) = (n.to_f64(), d.to_f64()) {
        if a.is_finite() && b.is_finite() && b != 0.0 {
            let q = a / b;
            if q.is_finite() && q != 0.0 {
                return q;
            }
        }
    }
    // Huge or tiny: shift both sides to 64 significant bits first.
    let nb = n.bits() as i64;
    let db = d.bits() as i64;
    let ns = shift_to_f64(n, nb - 64);
    let ds = shift_to_f64(d, db - 64);
    let e = (nb - 64) - (db - 64);
    let v = ns / ds;
    v * powf(2.0, e as f64)
}

fn shift_to_f64(x: &BigInt, shift: i64) -> f64 {
    let y = if shift > 0 { x >> (shift as usize) } else { x << ((-shift) as usize) };
    let v = y.abs().to_f64().unwrap_or(f64::MAX);
    if x.is_negative() {
        -v
    } else {
        v
    }
}

/// Largest dyadic rational `k / 2^bits` that is `<= x` (for `x > 0`).
pub fn dyadic_below(x: f64, bits: u32) -> Rational {
    let scale = powf(2.0, bits as f64);
    let k = floor(x * scale);
    let num = BigInt::from(k as i128);
    let den = BigInt::from(1i128 << bits);
    Rational::new(num, den)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn erfcx_matches_direct_formula_where_both_work() {
        for &x in &[0.0, 0.5, 1.0, 3.0, 7.5, 20.0] {
            let direct = exp(x * x) * erfc(x);
            assert!((erfcx(x) - direct).abs() <= 1e-13 * direct);
        }
    }

    #[test]
    fn erfcx_continued_fraction_is_continuous_at_switch() {
        let below = exp(24.999 * 24.999) * erfc(24.999);
        let above = erfcx(25.001);
        assert!((below - above).abs() / below < 1e-4);
        // asymptotic 1/(x sqrt(pi)) (1 - 1/(2x^2))
        let x: f64 = 100.0;
        let approx = 1.0 / (x * sqrt(PI)) * (1.0 - 0.5 / (x * x) + 0.75 / (x * x * x * x));
        assert!((erfcx(x) - approx).abs() / approx < 1e-9);
    }

    #[test]
    fn compensated_sum_beats_naive() {
        let xs = [1.0, 1e100, 1.0, -1e100];
        assert_eq!(compensated_sum(xs), 2.0);
    }

    #[test]
    fn rational_to_f64_handles_huge_values() {
        let big = Rational::new(BigInt::from(1u8) << 2000usize, BigInt::from(3u8) << 1999usize);
        assert!((rational_to_f64(&big) - 2.0 / 3.0).abs() < 1e-15);
    }
}

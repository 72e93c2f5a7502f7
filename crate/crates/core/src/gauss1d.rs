//! One-dimensional helpers: `ρ_s(Z \ {0})` and an exact sampler for `D_{Z\{0},s}`.

use rand::Rng;

use crate::numeric::{ceil, erfcx, exp, ln, sqrt, PI};

/// `ρ_s(Z \ {0}) = 2 Σ_{k>=1} exp(-π k²/s²)`.
pub fn rho_z_nonzero(s: f64) -> f64 {
    assert!(s > 0.0, "s must be positive");
    if s <= 4.0 {
        theta_tail(s)
    } else {
        // ρ_s(Z) = s ρ_{1/s}(Z); the dual series converges after a term or two
        s * (1.0 + theta_tail(1.0 / s)) - 1.0
    }
}

/// `ρ_s(Z) = 1 + ρ_s(Z \ {0})`.
pub fn rho_z(s: f64) -> f64 {
    1.0 + rho_z_nonzero(s)
}

/// `2 Σ_{k>=1} exp(-π k²/s²)`, summed until the next term is negligible. Successive
/// term ratios are at most `exp(-3π/s²)`, so the tail after the stopping term is
/// dominated by a geometric series.
fn theta_tail(s: f64) -> f64 {
    let a = PI / (s * s);
    let mut sum = 0.0;
    let mut k = 1.0f64;
    loop {
        let term = exp(-a * k * k);
        sum += term;
        if term == 0.0 || term < 1e-17 * sum {
            break;
        }
        k += 1.0;
    }
    2.0 * sum
}

/// A draw together with the number of rounds the rejection loop took.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ZDraw {
    pub value: i64,
    pub iterations: u64,
}

/// Exact sample from `D_{Z\{0},s}`.
pub fn sample_z_nonzero<R: Rng + ?Sized>(s: f64, rng: &mut R) -> i64 {
    sample_z_nonzero_counted(s, rng).value
}

/// Samples `|z|` from `D_{Z+,s}`: output 1 with probability `e^{-π/s²}/Z`, otherwise
/// draw `x` from the continuous Gaussian on `(1, ∞)` and output `⌈x⌉` with probability
/// `exp(-π(⌈x⌉² - x²)/s²)`, retrying on rejection. The sign is uniform.
pub fn sample_z_nonzero_counted<R: Rng + ?Sized>(s: f64, rng: &mut R) -> ZDraw {
    assert!(s > 0.0 && s.is_finite(), "s must be positive");
    let a = sqrt(PI) / s;
    // Z e^{π/s²} = 1 + (s/2) erfcx(√π/s)
    let cont = 0.5 * s * erfcx(a);
    let p_one = 1.0 / (1.0 + cont);
    let mut iterations = 0;
    let magnitude = loop {
        iterations += 1;
        if rng.gen::<f64>() < p_one {
            break 1.0;
        }
        let x = tail_sample(a, rng) / a;
        let y = ceil(x);
        if y <= 1.0 {
            continue;
        }
        if rng.gen::<f64>() < exp(-PI * (y - x) * (y + x) / (s * s)) {
            break y;
        }
    };
    let value = magnitude as i64;
    ZDraw { value: if rng.gen::<bool>() { value } else { -value }, iterations }
}

/// `ln erfc(y)` for `y >= 0`.
fn ln_erfc(y: f64) -> f64 {
    ln(erfcx(y)) - y * y
}

/// Draws `y > a` with density proportional to `exp(-y²)` by inverting
/// `erfc(y) = u erfc(a)`.
fn tail_sample<R: Rng + ?Sized>(a: f64, rng: &mut R) -> f64 {
    let u: f64 = loop {
        let u = rng.gen::<f64>();
        if u > 0.0 {
            break u;
        }
    };
    let goal = ln(u) + ln_erfc(a);
    let g = |y: f64| ln_erfc(y) - goal;
    let mut lo = a;
    let mut hi = sqrt(a * a - ln(u)) + 1.0;
    while g(hi) > 0.0 {
        hi = 2.0 * hi + 1.0;
    }
    // asymptotically exact starting point
    let mut y = sqrt(a * a - ln(u)).clamp(lo, hi);
    for _ in 0..200 {
        let v = g(y);
        if v > 0.0 {
            lo = y;
        } else {
            hi = y;
        }
        // d/dy ln erfc(y) = -2 / (√π erfcx(y))
        let slope = -2.0 / (sqrt(PI) * erfcx(y));
        let mut next = y - v / slope;
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - y).abs() < 1e-13 * (1.0 + y) || hi - lo < 1e-13 * (1.0 + y) {
            return next;
        }
        y = next;
    }
    y
}

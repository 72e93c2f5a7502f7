//! Counting and sampling in general norms: `ℓ_q` norms, CVP in those norms, the
//! `K`-ball gap decision and uniform sampler, and the sampler for
//! `χ_q(x) ∝ exp(-‖x‖_q^q)` on `L - t` built from a decomposition into `ℓ_q` balls.
//!
//! For integer `q` (and `q = ∞`) every comparison is exact on scaled integers.
//! Other `q` compare in floating point and refuse to decide inside a relative margin.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Ordering;

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};
use rand::Rng;

use crate::counting::{estimate_count_with, vcp_decide_with, CountEstimate, CountingParams, Decision, GapInstance};
use crate::enumerate::{self, Reduced};
use crate::error::{invalid, Error, Result};
use crate::lattice::{IntBasis, IntShifted, Rational, RationalVector, ShiftedLattice};
use crate::numeric::{ceil, floor, compensated_sum, dyadic_below, exp, expm1, ln, powf, rational_to_f64, sqrt};
use crate::oracles::{dim_cap, scaled_bound, CvpOracle, ExactDistribution, ExactOracle, SvpOracle};
use crate::samplers::{ball_cap, ball_prime, check_f, pick_index, uniform_ball_int, Draw};

/// Relative margin inside which floating-point norm comparisons are refused.
const MARGIN: f64 = 1e-9;

/// Largest integer exponent handled exactly.
const MAX_EXACT_Q: f64 = 64.0;

/// A norm `‖·‖_K` with `K` an `ℓ_q` unit ball.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Norm {
    L1,
    L2,
    LInf,
    /// `ℓ_q` for any other `q > 1`.
    Lq(f64),
}

impl Norm {
    /// `ℓ_q` for `q >= 1`, with `q = ∞` allowed.
    pub fn lq(q: f64) -> Result<Self> {
        if q == f64::INFINITY {
            return Ok(Norm::LInf);
        }
        if !(q >= 1.0) || !q.is_finite() {
            return Err(invalid("q must be at least 1"));
        }
        Ok(if q == 1.0 {
            Norm::L1
        } else if q == 2.0 {
            Norm::L2
        } else {
            Norm::Lq(q)
        })
    }

    pub fn q(&self) -> f64 {
        match *self {
            Norm::L1 => 1.0,
            Norm::L2 => 2.0,
            Norm::LInf => f64::INFINITY,
            Norm::Lq(q) => q,
        }
    }

    pub fn name(&self) -> String {
        match *self {
            Norm::L1 => "l1".into(),
            Norm::L2 => "l2".into(),
            Norm::LInf => "linf".into(),
            Norm::Lq(q) => format!("l{q}"),
        }
    }

    /// Whether comparisons are decided exactly.
    pub fn is_exact(&self) -> bool {
        matches!(self, Norm::LInf) || self.int_q().is_some()
    }

    fn int_q(&self) -> Option<u32> {
        let q = self.q();
        (q.is_finite() && floor(q) == q && q <= MAX_EXACT_Q).then_some(q as u32)
    }

    /// `‖x‖_K` in floating point.
    pub fn eval(&self, x: &RationalVector) -> f64 {
        let v: Vec<f64> = x.coords().iter().map(|c| rational_to_f64(c).abs()).collect();
        match *self {
            Norm::LInf => v.iter().fold(0.0, |m, &a| m.max(a)),
            _ => {
                let q = self.q();
                powf(compensated_sum(v.iter().map(|&a| powf(a, q))), 1.0 / q)
            }
        }
    }

    /// `‖x‖_q^q` for integer `q`, or `‖x‖_∞`, exactly.
    pub fn gauge_exact(&self, x: &RationalVector) -> Option<Rational> {
        if let Norm::LInf = self {
            return x.coords().iter().map(|c| c.abs()).max();
        }
        let q = self.int_q()?;
        Some(x.coords().iter().fold(Rational::zero(), |acc, c| acc + num_traits::pow(c.abs(), q as usize)))
    }

    /// Smallest `c` with `‖x‖₂ <= c‖x‖_K` in dimension `n`.
    pub fn l2_factor(&self, n: usize) -> f64 {
        let q = self.q();
        if q <= 2.0 {
            1.0
        } else if q.is_infinite() {
            sqrt(n as f64)
        } else {
            powf(n as f64, 0.5 - 1.0 / q)
        }
    }

    /// Rational upper bound on `l2_factor(n)²`.
    fn l2_factor_sq_upper(&self, n: usize) -> Rational {
        match *self {
            Norm::L1 | Norm::L2 => Rational::from_integer(1.into()),
            Norm::LInf => Rational::from_integer(n.into()),
            Norm::Lq(q) if q <= 2.0 => Rational::from_integer(1.into()),
            Norm::Lq(_) => {
                let c = self.l2_factor(n);
                dyadic_below(c * c * (1.0 + 1e-9) + 1e-9, 40) + Rational::new(1.into(), (1u64 << 40).into())
            }
        }
    }

    /// `Σ|v_i|^q` (or `max|v_i|`) of scaled integers, exactly.
    fn power_sum(&self, v: &[i128]) -> Option<BigInt> {
        if let Norm::LInf = self {
            return Some(BigInt::from(v.iter().map(|x| x.unsigned_abs()).max().unwrap_or(0)));
        }
        let q = self.int_q()?;
        if let Some(s) = power_sum_i128(v, q) {
            return Some(s.into());
        }
        Some(v.iter().map(|&x| num_traits::pow(BigInt::from(x).abs(), q as usize)).sum())
    }

    /// `Σ(|v_i|/scale)^q` in floating point.
    fn power_sum_f64(&self, v: &[i128], scale: i128) -> f64 {
        let q = self.q();
        let c = scale as f64;
        compensated_sum(v.iter().map(|&x| powf((x as f64).abs() / c, q)))
    }

    /// Compares `‖a‖_K` with `‖b‖_K`.
    fn cmp_scaled(&self, a: &[i128], b: &[i128], scale: i128) -> Result<Ordering> {
        if let (Some(x), Some(y)) = (self.power_sum(a), self.power_sum(b)) {
            return Ok(x.cmp(&y));
        }
        let (x, y) = (self.power_sum_f64(a, scale), self.power_sum_f64(b, scale));
        if (x - y).abs() > MARGIN * x.max(y) {
            return Ok(x.partial_cmp(&y).ok_or(Error::AmbiguousComparison)?);
        }
        let sorted = |v: &[i128]| {
            let mut s: Vec<u128> = v.iter().map(|x| x.unsigned_abs()).collect();
            s.sort_unstable();
            s
        };
        if sorted(a) == sorted(b) {
            Ok(Ordering::Equal)
        } else {
            Err(Error::AmbiguousComparison)
        }
    }
}

fn power_sum_i128(v: &[i128], q: u32) -> Option<i128> {
    v.iter().try_fold(0i128, |acc, &x| acc.checked_add(x.checked_abs()?.checked_pow(q)?))
}

fn sub(a: &[i128], b: &[i128]) -> Result<Vec<i128>> {
    a.iter().zip(b).map(|(x, y)| x.checked_sub(*y).ok_or(Error::Overflow)).collect()
}

/// Membership in a `K`-ball around the origin, on scaled integer vectors.
#[derive(Clone, Debug)]
pub(crate) struct KBall {
    norm: Norm,
    scale: i128,
    test: BallTest,
    /// Upper bound on the squared `ℓ₂` radius of the same-size `ℓ_q` ball.
    lq_radius_sq: Rational,
}

#[derive(Clone, Debug)]
enum BallTest {
    /// `power_sum(v)^exponent <= bound`.
    Exact { exponent: u32, bound: BigInt, bound_i: Option<i128> },
    /// `Σ(|v_i|/scale)^q <= bound`, refused inside the margin.
    Real { bound: f64 },
}

impl KBall {
    /// The ball `‖x‖_K² <= radius_sq`.
    pub(crate) fn from_radius_sq(norm: Norm, radius_sq: &Rational, scale: i128) -> Result<Self> {
        if radius_sq.is_negative() {
            return Err(invalid("radius must be nonnegative"));
        }
        let c = Rational::from_integer(scale.into());
        let test = match (norm, norm.int_q()) {
            (Norm::LInf, _) | (_, Some(1)) => exact_test(2, radius_sq * &c * &c),
            (_, Some(q)) if q % 2 == 0 => {
                let g = num_traits::pow(radius_sq.clone(), q as usize / 2);
                exact_test(1, g * num_traits::pow(c, q as usize))
            }
            (_, Some(q)) => exact_test(2, num_traits::pow(radius_sq * &c * &c, q as usize)),
            (_, None) => BallTest::Real { bound: powf(rational_to_f64(radius_sq), norm.q() / 2.0) },
        };
        Ok(Self { norm, scale, test, lq_radius_sq: radius_sq.clone() })
    }

    /// The ball `‖x‖_q^q <= gauge` (for `ℓ∞`, `‖x‖_∞ <= gauge`).
    pub(crate) fn from_gauge(norm: Norm, gauge: &Rational, scale: i128) -> Result<Self> {
        if gauge.is_negative() {
            return Err(invalid("radius must be nonnegative"));
        }
        let c = Rational::from_integer(scale.into());
        let test = match (norm, norm.int_q()) {
            (Norm::LInf, _) => exact_test(1, gauge * c),
            (_, Some(q)) => exact_test(1, gauge * num_traits::pow(c, q as usize)),
            (_, None) => BallTest::Real { bound: rational_to_f64(gauge) },
        };
        let lq_radius_sq = match (norm, norm.int_q()) {
            (Norm::LInf, _) => gauge * gauge,
            (_, Some(q)) => gauge_to_l2_sq(gauge, q),
            (_, None) => {
                let x = powf(rational_to_f64(gauge), 2.0 / norm.q());
                dyadic_below(x * (1.0 + 1e-9) + 1e-9, 40) + Rational::new(1.into(), (1u64 << 40).into())
            }
        };
        Ok(Self { norm, scale, test, lq_radius_sq })
    }

    /// Squared `ℓ₂` radius (scaled) of a ball around the origin containing this one.
    pub(crate) fn l2_enclosing(&self, n: usize) -> Result<i128> {
        scaled_bound(&(&self.lq_radius_sq * self.norm.l2_factor_sq_upper(n)), self.scale)
    }

    pub(crate) fn contains(&self, v: &[i128]) -> Result<bool> {
        match &self.test {
            BallTest::Exact { exponent, bound, bound_i } => {
                if let (Some(b), Norm::L2) = (bound_i, self.norm) {
                    if let Some(s) = power_sum_i128(v, 2) {
                        return Ok(s <= *b);
                    }
                }
                let s = self.norm.power_sum(v).ok_or(Error::Overflow)?;
                if let (Some(b), Some(s)) = (bound_i, s.to_i128()) {
                    if let Some(p) = s.checked_pow(*exponent) {
                        return Ok(p <= *b);
                    }
                }
                Ok(num_traits::pow(s, *exponent as usize) <= *bound)
            }
            BallTest::Real { bound } => {
                let s = self.norm.power_sum_f64(v, self.scale);
                if (s - bound).abs() <= MARGIN * bound.max(f64::MIN_POSITIVE) {
                    return Err(Error::AmbiguousComparison);
                }
                Ok(s < *bound)
            }
        }
    }
}

fn exact_test(exponent: u32, bound: Rational) -> BallTest {
    let bound = bound.floor().to_integer();
    let bound_i = bound.to_i128();
    BallTest::Exact { exponent, bound, bound_i }
}

/// Exact `CVP_K` by enumeration: the `ℓ₂` closest vector bounds the `K`-distance
/// `D`, and every candidate lies in the `ℓ₂` ball of radius `l2_factor · D`. Ties go to
/// the lexicographically smallest lattice vector.
#[derive(Clone, Debug)]
pub struct NormOracle {
    pub norm: Norm,
    pub dim_cap: usize,
}

impl NormOracle {
    pub fn new(norm: Norm) -> Self {
        Self { norm, dim_cap: dim_cap() }
    }
}

impl CvpOracle for NormOracle {
    fn closest(&mut self, basis: &IntBasis, target: &[i128]) -> Result<Vec<i128>> {
        let n = basis.dim();
        if n > self.dim_cap {
            return Err(Error::DimensionCap { dim: n, cap: self.dim_cap });
        }
        if target.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: target.len() });
        }
        let red = Reduced::new(basis)?;
        let y0 = enumerate::closest(&red, target)?;
        if self.norm == Norm::L2 {
            return Ok(y0);
        }
        let d0 = sub(&y0, target)?;
        let bound = search_bound(self.norm, &d0, basis.scale())?;
        let mut best: Option<(Vec<i128>, Vec<i128>)> = None;
        let norm = self.norm;
        enumerate::for_each_in_ball(&red, target, bound, |v, _, _| {
            let d = sub(v, target)?;
            let better = match &best {
                None => true,
                Some((bv, bd)) => match norm.cmp_scaled(&d, bd, basis.scale())? {
                    Ordering::Less => true,
                    Ordering::Equal => v < bv.as_slice(),
                    Ordering::Greater => false,
                },
            };
            if better {
                best = Some((v.to_vec(), d));
            }
            Ok(())
        })?;
        Ok(best.map_or(y0, |b| b.0))
    }

    /// Searches only the `ℓ₂` ball of squared radius `bound` around `target`, so a
    /// `Some` answer is the `K`-closest vector whenever that vector lies in the ball,
    /// and otherwise some lattice vector of the ball.
    fn closest_within(&mut self, basis: &IntBasis, target: &[i128], bound: i128) -> Result<Option<Vec<i128>>> {
        let n = basis.dim();
        if n > self.dim_cap {
            return Err(Error::DimensionCap { dim: n, cap: self.dim_cap });
        }
        if target.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: target.len() });
        }
        let mut red = Reduced::new(basis)?;
        if self.norm == Norm::L2 {
            return enumerate::closest_within(&mut red, target, bound);
        }
        let mut best: Option<(Vec<i128>, Vec<i128>)> = None;
        let norm = self.norm;
        enumerate::for_each_in_ball(&red, target, bound, |v, _, _| {
            let d = sub(v, target)?;
            let better = match &best {
                None => true,
                Some((bv, bd)) => match norm.cmp_scaled(&d, bd, basis.scale())? {
                    Ordering::Less => true,
                    Ordering::Equal => v < bv.as_slice(),
                    Ordering::Greater => false,
                },
            };
            if better {
                best = Some((v.to_vec(), d));
            }
            Ok(())
        })?;
        Ok(best.map(|b| b.0))
    }
}

/// Squared `ℓ₂` radius (scaled) containing every point at `K`-distance at most `‖d0‖_K`.
fn search_bound(norm: Norm, d0: &[i128], scale: i128) -> Result<i128> {
    let n = d0.len();
    match norm {
        Norm::L1 => {
            let s = power_sum_i128(d0, 1).ok_or(Error::Overflow)?;
            s.checked_mul(s).ok_or(Error::Overflow)
        }
        Norm::LInf => {
            let m = d0.iter().map(|x| x.unsigned_abs()).max().unwrap_or(0) as i128;
            m.checked_mul(m).and_then(|x| x.checked_mul(n as i128)).ok_or(Error::Overflow)
        }
        _ => {
            let d = powf(norm.power_sum_f64(d0, scale), 1.0 / norm.q());
            let r = norm.l2_factor(n) * d * scale as f64;
            let b = ceil(r * r * (1.0 + 1e-6)) + 1.0;
            if !(b < 1e36) {
                return Err(Error::Overflow);
            }
            Ok(b as i128)
        }
    }
}

/// A lattice vector `y` minimizing `‖y - t‖_K`.
pub fn cvp_k(lat: &ShiftedLattice, norm: Norm) -> Result<RationalVector> {
    let int = lat.int_form()?;
    let y = NormOracle::new(norm).closest(&int.basis, &int.shift)?;
    Ok(RationalVector::from_scaled(&y, int.scale()))
}

/// `dist_K(t, L)` in floating point.
pub fn distance_k(lat: &ShiftedLattice, norm: Norm) -> Result<f64> {
    let y = cvp_k(lat, norm)?;
    Ok(norm.eval(&y.sub(&lat.shift)?))
}

/// Calls `f` with each point of `(L - t) ∩ ball` (scaled), enumerating the enclosing
/// `ℓ₂` ball of squared radius `l2_radius_sq`.
fn for_each_in_k_ball<F>(lat: &IntShifted, l2_radius_sq: &Rational, ball: &KBall, mut f: F) -> Result<()>
where
    F: FnMut(&[i128]) -> Result<()>,
{
    crate::oracles::for_each_in_int_ball(lat, l2_radius_sq, |v, _| {
        if ball.contains(v)? {
            f(v)?;
        }
        Ok(())
    })
}

fn enclosing_l2_sq(norm: Norm, n: usize, radius_sq: &Rational) -> Rational {
    radius_sq * norm.l2_factor_sq_upper(n)
}

/// `(L - t) ∩ rK`, sorted.
pub fn enumerate_k_ball(lat: &ShiftedLattice, radius_sq: &Rational, norm: Norm) -> Result<Vec<RationalVector>> {
    let int = lat.int_form()?;
    let ball = KBall::from_radius_sq(norm, radius_sq, int.scale())?;
    let mut pts = Vec::new();
    for_each_in_k_ball(&int, &enclosing_l2_sq(norm, int.dim(), radius_sq), &ball, |v| {
        pts.push(RationalVector::from_scaled(v, int.scale()));
        Ok(())
    })?;
    pts.sort();
    Ok(pts)
}

/// `|(L - t) ∩ rK|`.
pub fn exact_k_count(lat: &ShiftedLattice, radius_sq: &Rational, norm: Norm) -> Result<u64> {
    Ok(enumerate_k_ball(lat, radius_sq, norm)?.len() as u64)
}

/// `γ`-GapVCP in the norm `K`. The oracle must solve CVP in that norm, for example
/// [`NormOracle`].
pub fn gap_vcp_k<O, R>(
    inst: &GapInstance,
    norm: Norm,
    params: &CountingParams,
    oracle: &mut O,
    rng: &mut R,
) -> Result<Decision>
where
    O: CvpOracle + ?Sized,
    R: Rng + ?Sized,
{
    if inst.threshold_n == 0 {
        return Err(invalid("N must be at least 1"));
    }
    let lat = inst.lat.int_form()?;
    let ball = KBall::from_radius_sq(norm, &inst.radius_sq, lat.scale())?;
    let pre = ball.l2_enclosing(lat.dim())?;
    vcp_decide_with(&lat, inst.threshold_n, inst.gap_gamma, params, oracle, rng, Some(pre), |d| ball.contains(d))
}

/// Estimate of `|(L - t) ∩ rK|` from the gap decision, as in `counting::estimate_count`.
pub fn estimate_k_count<O, R>(
    lat: &ShiftedLattice,
    radius_sq: &Rational,
    f: f64,
    norm: Norm,
    params: &CountingParams,
    oracle: &mut O,
    rng: &mut R,
) -> Result<CountEstimate>
where
    O: CvpOracle + ?Sized,
    R: Rng + ?Sized,
{
    let int = lat.int_form()?;
    let ball = KBall::from_radius_sq(norm, radius_sq, int.scale())?;
    k_estimate_int(&int, &ball, f, params, oracle, rng)
}

fn k_estimate_int<O, R>(
    lat: &IntShifted,
    ball: &KBall,
    f: f64,
    params: &CountingParams,
    oracle: &mut O,
    rng: &mut R,
) -> Result<CountEstimate>
where
    O: CvpOracle + ?Sized,
    R: Rng + ?Sized,
{
    let pre = ball.l2_enclosing(lat.dim())?;
    estimate_count_with(f, params, |n, gap| {
        Ok(vcp_decide_with(lat, n, gap, params, oracle, rng, Some(pre), |d| ball.contains(d))?.yes)
    })
}

/// Nearly uniform point of `(L - t) ∩ rK`, assuming `N <= |(L - t) ∩ rK| <= fN`.
/// With `N = 0` the ball is taken to be empty and the output is the fixed point `-t`.
#[allow(clippy::too_many_arguments)]
pub fn uniform_k_ball_sample<O, R>(
    lat: &ShiftedLattice,
    radius_sq: &Rational,
    n_est: u64,
    f: u64,
    norm: Norm,
    oracle: &mut O,
    rng: &mut R,
) -> Result<RationalVector>
where
    O: CvpOracle + ?Sized,
    R: Rng + ?Sized,
{
    check_f(f)?;
    if n_est == 0 {
        return Ok(lat.shift.scale_int(-1));
    }
    let int = lat.int_form()?;
    let ball = KBall::from_radius_sq(norm, radius_sq, int.scale())?;
    let p = ball_prime(n_est, f)?;
    let (x, _) = uniform_ball_int(&int, p, ball_cap(f), Some(ball.l2_enclosing(int.dim())?), |d| ball.contains(d), oracle, rng)?;
    Ok(RationalVector::from_scaled(&x, int.scale()))
}

/// A distribution written as a weighted average of uniform distributions on the
/// lattice points of `K`-balls.
#[derive(Clone, Debug)]
pub struct BallDecomposition {
    /// `(center, radius)`, relative to the shift.
    pub balls: Vec<(RationalVector, f64)>,
    /// `r_i^q` exactly.
    pub gauges: Vec<Rational>,
    pub counts: Vec<CountEstimate>,
    /// Normalized `N_i ŵ_i`.
    pub weights: Vec<f64>,
}

impl BallDecomposition {
    pub fn len(&self) -> usize {
        self.balls.len()
    }

    pub fn is_empty(&self) -> bool {
        self.balls.is_empty()
    }
}

/// How the `χ_q` decomposition counts its balls.
#[derive(Clone, Debug, PartialEq)]
pub enum KCounter {
    Exact,
    Sparsification(CountingParams),
}

/// Refuse decompositions with more balls than this.
pub const MAX_BALLS: f64 = 1e7;

/// Sampler for `χ_q(L - t)` with the decomposition built once.
///
/// With `d = dist_q(t, L)`, the balls have `r_i^q = d^q + i/(10f)` for
/// `i <= ℓ = ⌈100 n^q f^{q+1}⌉` and weights proportional to
/// `N_i (e^{-r_i^q} - e^{-r_{i+1}^q})`, the last one `N_ℓ e^{-r_ℓ^q}`.
#[derive(Clone, Debug)]
pub struct ChiQSampler {
    lat: IntShifted,
    norm: Norm,
    f: u64,
    uniform_f: u64,
    decomposition: BallDecomposition,
    cumulative: Vec<f64>,
    balls: Vec<KBall>,
    primes: Vec<u64>,
}

impl ChiQSampler {
    /// Needs an integer `q`; the oracle must solve CVP in `ℓ_q`.
    pub fn prepare<O, R>(
        lat: &ShiftedLattice,
        q: f64,
        f: u64,
        counter: &KCounter,
        oracle: &mut O,
        rng: &mut R,
    ) -> Result<Self>
    where
        O: CvpOracle + ?Sized,
        R: Rng + ?Sized,
    {
        check_f(f)?;
        let norm = Norm::lq(q)?;
        let qi = match (norm, norm.int_q()) {
            (Norm::LInf, _) | (_, None) => return Err(invalid("the χ_q sampler needs an integer q")),
            (_, Some(qi)) => qi,
        };
        let int = lat.int_form()?;
        let n = int.dim();
        let y = oracle.closest(&int.basis, &int.shift)?;
        let d = RationalVector::from_scaled(&sub(&y, &int.shift)?, int.scale());
        let d_gauge = norm.gauge_exact(&d).ok_or(Error::Overflow)?;
        let ell_f = ceil(100.0 * powf(n as f64, q) * powf(f as f64, q + 1.0));
        if !(ell_f <= MAX_BALLS) {
            return Err(Error::Overflow);
        }
        let ell = ell_f as usize;
        let step = Rational::new(1.into(), (10 * f).into());
        let gauges: Vec<Rational> = (0..=ell).map(|i| &d_gauge + &step * Rational::from_integer(i.into())).collect();
        let balls =
            gauges.iter().map(|g| KBall::from_gauge(norm, g, int.scale())).collect::<Result<Vec<_>>>()?;
        let counts = match counter {
            KCounter::Exact => exact_gauge_counts(&int, norm, qi, &gauges)?
                .into_iter()
                .map(CountEstimate::exact)
                .collect::<Vec<_>>(),
            KCounter::Sparsification(params) => balls
                .iter()
                .map(|b| k_estimate_int(&int, b, f as f64, params, oracle, rng))
                .collect::<Result<Vec<_>>>()?,
        };
        // e^{-r_i^q} - e^{-r_{i+1}^q} = e^{-d^q} e^{-i/(10f)} (1 - e^{-1/(10f)})
        let a = 1.0 / (10.0 * f as f64);
        let c = -expm1(-a);
        let raw: Vec<f64> = counts
            .iter()
            .enumerate()
            .map(|(i, n)| {
                let w = if i < ell { exp(-a * i as f64) * c } else { exp(-a * i as f64) };
                n.value as f64 * w
            })
            .collect();
        let total = compensated_sum(raw.iter().copied());
        let mut acc = crate::numeric::CompensatedSum::new();
        let cumulative = raw
            .iter()
            .map(|w| {
                acc.add(*w);
                acc.value()
            })
            .collect();
        let zero = RationalVector::zeros(n);
        let decomposition = BallDecomposition {
            balls: gauges.iter().map(|g| (zero.clone(), powf(rational_to_f64(g), 1.0 / q))).collect(),
            gauges,
            weights: raw.iter().map(|w| w / total).collect(),
            counts,
        };
        let primes = decomposition.counts.iter().map(|c| ball_prime(c.value, f)).collect::<Result<Vec<_>>>()?;
        Ok(Self { lat: int, norm, f, uniform_f: f, decomposition, cumulative, balls, primes })
    }

    /// Runs the ball sampler at precision `uniform_f` instead of `f`.
    pub fn with_uniform_f(mut self, uniform_f: u64) -> Result<Self> {
        check_f(uniform_f)?;
        self.primes =
            self.decomposition.counts.iter().map(|c| ball_prime(c.value, uniform_f)).collect::<Result<Vec<_>>>()?;
        self.uniform_f = uniform_f;
        Ok(self)
    }

    pub fn decomposition(&self) -> &BallDecomposition {
        &self.decomposition
    }

    pub fn norm(&self) -> Norm {
        self.norm
    }

    pub fn f(&self) -> u64 {
        self.f
    }

    pub fn sample<O, R>(&self, oracle: &mut O, rng: &mut R) -> Result<RationalVector>
    where
        O: CvpOracle + ?Sized,
        R: Rng + ?Sized,
    {
        Ok(self.sample_detailed(oracle, rng)?.vector)
    }

    pub fn sample_detailed<O, R>(&self, oracle: &mut O, rng: &mut R) -> Result<Draw>
    where
        O: CvpOracle + ?Sized,
        R: Rng + ?Sized,
    {
        let k = pick_index(&self.cumulative, rng);
        let ball = &self.balls[k];
        let (x, iterations) =
            uniform_ball_int(&self.lat, self.primes[k], ball_cap(self.uniform_f), Some(ball.l2_enclosing(self.lat.dim())?), |d| ball.contains(d), oracle, rng)?;
        Ok(Draw { vector: RationalVector::from_scaled(&x, self.lat.scale()), index: Some(k), iterations })
    }
}

/// Exact counts for nested balls `‖x‖_q^q <= g_i`, from one enumeration of the
/// largest enclosing `ℓ₂` ball.
fn exact_gauge_counts(lat: &IntShifted, norm: Norm, q: u32, gauges: &[Rational]) -> Result<Vec<u64>> {
    let Some(g_max) = gauges.last() else {
        return Ok(Vec::new());
    };
    let n = lat.dim();
    let r_sq = gauge_to_l2_sq(g_max, q) * norm.l2_factor_sq_upper(n);
    let mut sums: Vec<BigInt> = Vec::new();
    crate::oracles::for_each_in_int_ball(lat, &r_sq, |v, _| {
        sums.push(norm.power_sum(v).ok_or(Error::Overflow)?);
        Ok(())
    })?;
    sums.sort_unstable();
    let cq = num_traits::pow(BigInt::from(lat.scale()), q as usize);
    Ok(gauges
        .iter()
        .map(|g| {
            let bound = (g * Rational::from_integer(cq.clone())).floor().to_integer();
            sums.partition_point(|s| s <= &bound) as u64
        })
        .collect())
}

/// Rational upper bound on `g^{2/q}`, the squared `ℓ_q` radius of gauge `g`.
fn gauge_to_l2_sq(g: &Rational, q: u32) -> Rational {
    match q {
        1 => g * g,
        2 => g.clone(),
        _ => {
            let x = powf(rational_to_f64(g), 2.0 / q as f64);
            dyadic_below(x * (1.0 + 1e-9) + 1e-9, 40) + Rational::new(1.into(), (1u64 << 40).into())
        }
    }
}

/// One draw from the `χ_q(L - t)` sampler, preparing the decomposition with exact counts.
pub fn lsp_chi_q_sample<O, R>(lat: &ShiftedLattice, q: f64, f: u64, oracle: &mut O, rng: &mut R) -> Result<RationalVector>
where
    O: CvpOracle + ?Sized,
    R: Rng + ?Sized,
{
    ChiQSampler::prepare(lat, q, f, &KCounter::Exact, oracle, rng)?.sample(oracle, rng)
}

/// `χ_q(L - t)`, `x ↦ exp(-‖x‖_q^q)`, restricted to `‖x‖_q^q <= d^q + T` with `T`
/// chosen so the omitted mass is below `tail_eps`. The bound counts lattice points
/// by packing: an `ℓ₂` ball of radius `ρ` holds at most `(1 + 2ρ/λ₁)^n` of them.
pub fn exact_chi_q(lat: &ShiftedLattice, q: f64, tail_eps: f64) -> Result<ExactDistribution> {
    if !(tail_eps > 0.0 && tail_eps < 1.0) {
        return Err(invalid("tail_eps must lie in (0, 1)"));
    }
    let norm = Norm::lq(q)?;
    let qi = match (norm, norm.int_q()) {
        (Norm::LInf, _) | (_, None) => return Err(invalid("χ_q needs an integer q")),
        (_, Some(qi)) => qi,
    };
    let int = lat.int_form()?;
    let n = int.dim();
    let y = NormOracle::new(norm).closest(&int.basis, &int.shift)?;
    let d = RationalVector::from_scaled(&sub(&y, &int.shift)?, int.scale());
    let d_gauge = norm.gauge_exact(&d).ok_or(Error::Overflow)?;
    let lambda1 = {
        let v = ExactOracle::default().shortest(&int.basis)?;
        sqrt(rational_to_f64(&RationalVector::from_scaled(&v, int.scale()).norm_sq()))
    };
    let dq = rational_to_f64(&d_gauge);
    let c2 = norm.l2_factor(n);
    let omitted = |t: f64| {
        // shells [d^q + t + k, d^q + t + k + 1), each point weighing at most e^{-(t + k)}
        let mut sum = 0.0;
        for k in 0..100_000u32 {
            let rho = c2 * powf(dq + t + k as f64 + 1.0, 1.0 / q);
            let term = powf(1.0 + 2.0 * rho / lambda1, n as f64) * exp(-(t + k as f64));
            sum += term;
            if term < 1e-20 * sum.max(tail_eps) {
                break;
            }
        }
        sum
    };
    let mut t = ln(1.0 / tail_eps);
    while omitted(t) >= tail_eps {
        t += 1.0;
    }
    let t_rat = dyadic_below(t, 8) + Rational::from_integer(1.into());
    let gauge = &d_gauge + t_rat;
    let ball = KBall::from_gauge(norm, &gauge, int.scale())?;
    let r_sq = gauge_to_l2_sq(&gauge, qi) * norm.l2_factor_sq_upper(n);
    let scale = int.scale();
    let mut pairs = Vec::new();
    for_each_in_k_ball(&int, &r_sq, &ball, |v| {
        let x = RationalVector::from_scaled(v, scale);
        let g = norm.gauge_exact(&x).ok_or(Error::Overflow)?;
        pairs.push((x, exp(-rational_to_f64(&(g - &d_gauge)))));
        Ok(())
    })?;
    // the largest ℓ₂ ball inside the ℓ_q ball of gauge g: ‖x‖_q <= n^{max(0, 1/q - 1/2)} ‖x‖₂
    let r_q = powf(rational_to_f64(&gauge), 1.0 / q);
    let shrink = if q < 2.0 { powf(n as f64, 1.0 / q - 0.5) } else { 1.0 };
    let inner = r_q / shrink;
    ExactDistribution::from_weights(pairs, tail_eps, dyadic_below(inner * inner * (1.0 - 1e-9), 30))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{rat, rat_int, Basis};
    use crate::oracles::{distance_sq, solve_cvp};
    use crate::rng::seeded;

    fn z2(t: &[(i64, i64)]) -> ShiftedLattice {
        ShiftedLattice::new(Basis::identity(2), RationalVector::from_pairs(t)).unwrap()
    }

    #[test]
    fn norm_values() {
        let x = RationalVector::from_pairs(&[(3, 1), (-4, 1)]);
        assert_eq!(Norm::L1.eval(&x), 7.0);
        assert_eq!(Norm::L2.eval(&x), 5.0);
        assert_eq!(Norm::LInf.eval(&x), 4.0);
        assert!((Norm::lq(3.0).unwrap().eval(&x) - 91f64.powf(1.0 / 3.0)).abs() < 1e-12);
        assert_eq!(Norm::lq(3.0).unwrap().gauge_exact(&x), Some(rat_int(91)));
        assert_eq!(Norm::lq(2.5).unwrap().gauge_exact(&x), None);
        assert!(Norm::lq(0.5).is_err());
        assert_eq!(Norm::lq(f64::INFINITY).unwrap(), Norm::LInf);
    }

    #[test]
    fn cvp_k_examples() {
        assert_eq!(cvp_k(&z2(&[(2, 5), (2, 5)]), Norm::L1).unwrap(), RationalVector::from_ints(&[0, 0]));
        // (0,0) and (1,0) are both at ℓ∞ distance 1/2
        assert_eq!(cvp_k(&z2(&[(1, 2), (1, 5)]), Norm::LInf).unwrap(), RationalVector::from_ints(&[0, 0]));
        // ℓ₁ and ℓ∞ can disagree with ℓ₂
        let b = Basis::from_int_columns(&[&[2, 0], &[1, 2]]).unwrap();
        let lat = ShiftedLattice::new(b, RationalVector::from_pairs(&[(3, 2), (5, 4)])).unwrap();
        for norm in [Norm::L1, Norm::L2, Norm::LInf, Norm::Lq(3.0), Norm::Lq(1.5)] {
            let y = cvp_k(&lat, norm).unwrap();
            let best = brute_force_distance(&lat, norm);
            assert!((norm.eval(&y.sub(&lat.shift).unwrap()) - best).abs() < 1e-12, "{}", norm.name());
        }
    }

    fn brute_force_distance(lat: &ShiftedLattice, norm: Norm) -> f64 {
        let mut best = f64::INFINITY;
        for a in -8..=8 {
            for b in -8..=8 {
                let y = lat.basis.combine_ints(&[a, b]).unwrap();
                best = best.min(norm.eval(&y.sub(&lat.shift).unwrap()));
            }
        }
        best
    }

    #[test]
    fn l2_matches_solve_cvp() {
        let lat = ShiftedLattice::new(
            Basis::diagonal(&[rat_int(3), rat(1, 2)]).unwrap(),
            RationalVector::from_pairs(&[(3, 2), (1, 4)]),
        )
        .unwrap();
        let y = cvp_k(&lat, Norm::L2).unwrap();
        assert_eq!(y, solve_cvp(&lat).unwrap());
        assert_eq!(y.sub(&lat.shift).unwrap().norm_sq(), distance_sq(&lat).unwrap());
    }

    #[test]
    fn ball_counts() {
        let z = z2(&[(0, 1), (0, 1)]);
        assert_eq!(exact_k_count(&z, &rat_int(1), Norm::L1).unwrap(), 5);
        assert_eq!(exact_k_count(&z, &rat_int(1), Norm::LInf).unwrap(), 9);
        assert_eq!(exact_k_count(&z, &rat_int(4), Norm::L1).unwrap(), 13);
        // ‖(1,1)‖₃ = 2^{1/3}, radius² = 2^{2/3} is irrational; use radius² = 2 > 2^{2/3}
        assert_eq!(exact_k_count(&z, &rat_int(2), Norm::Lq(3.0)).unwrap(), 9);
        // the boundary points (±1, 0) make a floating-point decision impossible
        assert_eq!(exact_k_count(&z, &rat_int(1), Norm::Lq(2.5)), Err(Error::AmbiguousComparison));
    }

    #[test]
    fn gap_vcp_k_examples() {
        let mut rng = seeded(21);
        let params = CountingParams::fast();
        let z = z2(&[(0, 1), (0, 1)]);
        let inst = GapInstance::new(z.clone(), rat_int(1), 2, 4.0).unwrap();
        assert!(gap_vcp_k(&inst, Norm::L1, &params, &mut NormOracle::new(Norm::L1), &mut rng).unwrap().yes);
        let inst = GapInstance::new(z, rat_int(1), 9, 4.0).unwrap();
        assert!(!gap_vcp_k(&inst, Norm::LInf, &params, &mut NormOracle::new(Norm::LInf), &mut rng).unwrap().yes);
    }

    #[test]
    fn empty_ball_returns_minus_t() {
        let lat = z2(&[(1, 2), (1, 3)]);
        let mut o = NormOracle::new(Norm::L1);
        let x = uniform_k_ball_sample(&lat, &rat(1, 100), 0, 4, Norm::L1, &mut o, &mut seeded(1)).unwrap();
        assert_eq!(x, RationalVector::from_pairs(&[(-1, 2), (-1, 3)]));
    }

    #[test]
    fn uniform_k_ball_is_near_uniform() {
        let mut rng = seeded(8);
        let z = z2(&[(0, 1), (0, 1)]);
        for (norm, count) in [(Norm::L1, 5u64), (Norm::LInf, 9)] {
            let support = enumerate_k_ball(&z, &rat_int(1), norm).unwrap();
            assert_eq!(support.len() as u64, count);
            let mut o = NormOracle::new(norm);
            let draws = 4000;
            let mut hist = alloc::collections::BTreeMap::new();
            for _ in 0..draws {
                let x = uniform_k_ball_sample(&z, &rat_int(1), count, 10, norm, &mut o, &mut rng).unwrap();
                assert!(support.binary_search(&x).is_ok());
                *hist.entry(x).or_insert(0u32) += 1;
            }
            assert_eq!(hist.len() as u64, count);
            let expect = draws as f64 / count as f64;
            for c in hist.values() {
                // (1 + 1/f) uniformity plus sampling noise
                assert!((*c as f64 / expect - 1.0).abs() < 0.1 + 4.0 / expect.sqrt(), "{}", norm.name());
            }
        }
    }

    #[test]
    fn decomposition_shape() {
        let z = z2(&[(0, 1), (0, 1)]);
        let mut o = NormOracle::new(Norm::L1);
        let s = ChiQSampler::prepare(&z, 1.0, 2, &KCounter::Exact, &mut o, &mut seeded(2)).unwrap();
        let dec = s.decomposition();
        assert_eq!(dec.len(), 100 * 2 * 4 + 1);
        assert!((dec.weights.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(dec.weights.iter().all(|w| *w >= 0.0));
        assert!(dec.balls.windows(2).all(|w| w[0].1 < w[1].1));
        assert!(dec.balls.iter().all(|b| b.0.is_zero()));
        // r_i = i/20 around the origin: count |x|+|y| <= r in Z²
        for (g, c) in dec.gauges.iter().zip(&dec.counts).step_by(37) {
            let r = g.floor().to_integer().to_i64().unwrap();
            assert_eq!(c.value, (2 * r * r + 2 * r + 1) as u64);
        }
        assert!(ChiQSampler::prepare(&z, 2.5, 2, &KCounter::Exact, &mut o, &mut seeded(2)).is_err());
        assert_eq!(
            ChiQSampler::prepare(&z, 6.0, 50, &KCounter::Exact, &mut o, &mut seeded(2)).unwrap_err(),
            Error::Overflow
        );
    }

    #[test]
    fn q2_decomposition_tracks_the_dgs_schedule() {
        // with q = 2 the radii are r_i² = d² + i/(10f), the same shells as the ℓ₂ schedule
        let lat = z2(&[(1, 3), (0, 1)]);
        let mut o = NormOracle::new(Norm::L2);
        let s = ChiQSampler::prepare(&lat, 2.0, 1, &KCounter::Exact, &mut o, &mut seeded(2)).unwrap();
        let dec = s.decomposition();
        for (i, g) in dec.gauges.iter().enumerate().step_by(13) {
            assert_eq!(*g, rat(1, 9) + rat(i as i64, 10));
            assert_eq!(dec.counts[i].value, crate::oracles::exact_count(&lat, g).unwrap());
        }
    }

    #[test]
    fn exact_chi_q_one_dimensional() {
        // q = 2 on Z: P(x) ∝ e^{-x²}
        let lat = ShiftedLattice::centered(Basis::identity(1));
        let d = exact_chi_q(&lat, 2.0, 1e-12).unwrap();
        let z: f64 = (-30i32..=30).map(|k| (-(k * k) as f64).exp()).sum();
        for k in -3i64..=3 {
            let p = d.probability(&RationalVector::from_ints(&[k]));
            assert!((p - (-(k * k) as f64).exp() / z).abs() < 1e-12);
        }
        assert!(d.within_truncation(&RationalVector::from_ints(&[4])));
    }

    #[test]
    fn chi_1_sampler_close_to_exact() {
        let lat = z2(&[(0, 1), (0, 1)]);
        let exact = exact_chi_q(&lat, 1.0, 1e-12).unwrap();
        let mut o = NormOracle::new(Norm::L1);
        let mut rng = seeded(33);
        let s = ChiQSampler::prepare(&lat, 1.0, 4, &KCounter::Exact, &mut o, &mut rng).unwrap();
        let n = 20_000;
        let mut hist = alloc::collections::BTreeMap::new();
        for _ in 0..n {
            let x = s.sample(&mut o, &mut rng).unwrap();
            *hist.entry(x).or_insert(0u32) += 1;
        }
        let mut sd = 0.0;
        for (x, p) in exact.support.iter().zip(&exact.probabilities) {
            sd += (hist.get(x).copied().unwrap_or(0) as f64 / n as f64 - p).abs();
        }
        sd += hist.iter().filter(|(x, _)| exact.probability(x) == 0.0).map(|(_, c)| *c as f64 / n as f64).sum::<f64>();
        assert!(sd / 2.0 < 0.1, "sd = {}", sd / 2.0);
    }
}

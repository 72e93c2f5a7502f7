//! Counting lattice points (and primitive lattice vectors) in a ball by
//! sparsification, plus exact enumeration counters with the same interface.
//!
//! A single decision draws `ℓ` sparsified sublattices, asks the oracle for the closest
//! (or shortest) vector of each, and counts how often that vector lands inside the
//! ball. The hit rate is about `count / p`, so comparing the hit count with
//! `ℓN/p + 2√ℓ` separates `count <= N` from `count > γN`. Estimates come from an
//! ascending ladder of such decisions.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::enumerate::gcd_coeffs;
use crate::error::{invalid, Error, Result};
use crate::lattice::{IntBasis, IntShifted, Rational, ShiftedLattice};
use crate::numeric::{ceil, floor, ln, powf, rational_to_f64, sqrt, PI};
use crate::oracles::{for_each_in_int_ball, scaled_bound, CvpOracle, SvpOracle};
use crate::sparsify::{prime_in_real_interval, shifted_draw, unshifted_draw};

/// Constants of the counting reductions.
#[derive(Clone, Debug, PartialEq)]
pub struct CountingParams {
    /// Prime interval `[lo f N, hi f N]` (times `ln(10 f N)` for primitive counting).
    pub prime_lo_factor: f64,
    pub prime_hi_factor: f64,
    /// `ℓ = ⌈trials_factor · f² p² / N²⌉`.
    pub trials_factor: f64,
    /// Ladder rungs grow by `γ^{1/ladder_exponent}`.
    pub ladder_exponent: u32,
    /// Majority-vote each ladder rung so the whole ladder errs with probability at
    /// most `1 - confidence`.
    pub amplify: bool,
    pub confidence: f64,
    /// Refuse decisions needing more oracle calls than this.
    pub max_trials: u64,
}

impl CountingParams {
    pub fn faithful() -> Self {
        Self {
            prime_lo_factor: 200.0,
            prime_hi_factor: 400.0,
            trials_factor: 100.0,
            ladder_exponent: 20,
            amplify: true,
            confidence: 0.99,
            max_trials: u64::MAX,
        }
    }

    /// Smaller constants: prime interval `[20fN, 40fN]`, `ℓ = ⌈16 f² p²/N²⌉`, rungs
    /// spaced by `√γ`, one vote per rung.
    pub fn fast() -> Self {
        Self {
            prime_lo_factor: 20.0,
            prime_hi_factor: 40.0,
            trials_factor: 16.0,
            ladder_exponent: 2,
            amplify: false,
            confidence: 0.99,
            max_trials: u64::MAX,
        }
    }
}

impl Default for CountingParams {
    fn default() -> Self {
        Self::faithful()
    }
}

/// A promise instance: is the ball count at most `N`, or above `γN`?
#[derive(Clone, Debug, PartialEq)]
pub struct GapInstance {
    pub lat: ShiftedLattice,
    pub radius_sq: Rational,
    pub threshold_n: u64,
    pub gap_gamma: f64,
    /// Degeneracy guard of the primitive variant: NO whenever `λ₁ < βr/N`.
    pub beta: f64,
}

impl GapInstance {
    /// `γ = 1 + 1/f` and `β = 1/f`.
    pub fn new(lat: ShiftedLattice, radius_sq: Rational, threshold_n: u64, f: f64) -> Result<Self> {
        if threshold_n == 0 {
            return Err(invalid("N must be at least 1"));
        }
        if !(f > 0.0) {
            return Err(invalid("f must be positive"));
        }
        Ok(Self { lat, radius_sq, threshold_n, gap_gamma: 1.0 + 1.0 / f, beta: 1.0 / f })
    }
}

/// Outcome of one decision run.
#[derive(Clone, Debug, PartialEq)]
pub struct Decision {
    pub yes: bool,
    pub hits: u64,
    pub trials: u64,
    pub prime: u64,
    pub threshold: f64,
}

impl Decision {
    fn short_circuit_no() -> Self {
        Self { yes: false, hits: 0, trials: 0, prime: 0, threshold: 0.0 }
    }
}

fn gap_f(gamma: f64) -> Result<f64> {
    if !(gamma > 1.0) || !gamma.is_finite() {
        return Err(invalid("gap must exceed 1"));
    }
    Ok(1.0 / (gamma - 1.0))
}

fn trial_count(params: &CountingParams, f: f64, p: u64, n: u64) -> Result<u64> {
    let ratio = p as f64 / n as f64;
    let l = ceil(params.trials_factor * f * f * ratio * ratio);
    if !(l <= params.max_trials as f64) || l >= 1.8e19 {
        return Err(Error::IterationCap { iterations: if l < 1.8e19 { l as u64 } else { u64::MAX } });
    }
    Ok((l as u64).max(1))
}

/// Runs `ℓ` independent trials at prime `p` and applies the threshold rule.
fn threshold_decision<R, T>(p: u64, n: u64, f: f64, params: &CountingParams, rng: &mut R, mut trial: T) -> Result<Decision>
where
    R: Rng + ?Sized,
    T: FnMut(&mut R) -> Result<bool>,
{
    let l = trial_count(params, f, p, n)?;
    let mut hits = 0u64;
    for _ in 0..l {
        if trial(rng)? {
            hits += 1;
        }
    }
    let threshold = l as f64 * n as f64 / p as f64 + 2.0 * sqrt(l as f64);
    Ok(Decision { yes: hits as f64 > threshold, hits, trials: l, prime: p, threshold })
}

pub(crate) fn vcp_prime(n: u64, f: f64, params: &CountingParams) -> Result<u64> {
    let nf = n as f64;
    prime_in_real_interval(params.prime_lo_factor * f * nf, params.prime_hi_factor * f * nf)
}

/// The prime also exceeds `N/β`, so that `λ₁ >= βr/N` implies `λ₁ > r/p`.
pub(crate) fn pvcp_prime(n: u64, f: f64, beta: f64, params: &CountingParams) -> Result<u64> {
    let nf = n as f64;
    let l = ln(10.0 * f * nf);
    let lo = (params.prime_lo_factor * f * nf * l).max(101.0).max(floor(nf / beta) + 1.0);
    let hi = (params.prime_hi_factor * f * nf * l).max(2.0 * lo);
    prime_in_real_interval(lo, hi)
}

/// Decision on integer data: `bound` is `⌊r² q²⌋` in the lattice's scale.
pub(crate) fn vcp_decide_int<O, R>(
    lat: &IntShifted,
    bound: i128,
    n: u64,
    gamma: f64,
    params: &CountingParams,
    oracle: &mut O,
    rng: &mut R,
) -> Result<Decision>
where
    O: CvpOracle + ?Sized,
    R: Rng + ?Sized,
{
    vcp_decide_with(lat, n, gamma, params, oracle, rng, Some(bound), |_| Ok(true))
}

/// Decision with an arbitrary ball around the origin: `inside` gets `y' - w - t`.
pub(crate) fn vcp_decide_with<O, R, F>(
    lat: &IntShifted,
    n: u64,
    gamma: f64,
    params: &CountingParams,
    oracle: &mut O,
    rng: &mut R,
    l2_bound: Option<i128>,
    mut inside: F,
) -> Result<Decision>
where
    O: CvpOracle + ?Sized,
    R: Rng + ?Sized,
    F: FnMut(&[i128]) -> Result<bool>,
{
    let f = gap_f(gamma)?;
    let p = vcp_prime(n, f, params)?;
    let dim = lat.dim();
    let mut target = vec![0i128; dim];
    let mut diff = vec![0i128; dim];
    threshold_decision(p, n, f, params, rng, |rng| {
        let pair = shifted_draw(&lat.basis, p, rng)?;
        for ((t, a), w) in target.iter_mut().zip(&lat.shift).zip(&pair.shift_vector) {
            *t = a.checked_add(*w).ok_or(Error::Overflow)?;
        }
        let y = match l2_bound {
            Some(b) => match oracle.closest_within(&pair.sublattice, &target, b)? {
                Some(y) => y,
                None => return Ok(false),
            },
            None => oracle.closest(&pair.sublattice, &target)?,
        };
        for ((d, a), b) in diff.iter_mut().zip(&y).zip(&target) {
            *d = a.checked_sub(*b).ok_or(Error::Overflow)?;
        }
        inside(&diff)
    })
}

fn norm_sq(a: &[i128]) -> Result<i128> {
    a.iter().try_fold(0i128, |acc, &x| {
        acc.checked_add(x.checked_mul(x).ok_or(Error::Overflow)?).ok_or(Error::Overflow)
    })
}

/// `γ`-GapVCP by shifted sparsification and a CVP oracle.
pub fn gap_vcp_decide<O, R>(inst: &GapInstance, params: &CountingParams, oracle: &mut O, rng: &mut R) -> Result<Decision>
where
    O: CvpOracle + ?Sized,
    R: Rng + ?Sized,
{
    if inst.threshold_n == 0 {
        return Err(invalid("N must be at least 1"));
    }
    let lat = inst.lat.int_form()?;
    let bound = scaled_bound(&inst.radius_sq, lat.scale())?;
    vcp_decide_int(&lat, bound, inst.threshold_n, inst.gap_gamma, params, oracle, rng)
}

pub(crate) fn pvcp_decide_int<O, R>(
    basis: &IntBasis,
    lambda1_sq: i128,
    bound: i128,
    n: u64,
    gamma: f64,
    beta: f64,
    params: &CountingParams,
    oracle: &mut O,
    rng: &mut R,
) -> Result<Decision>
where
    O: SvpOracle + ?Sized,
    R: Rng + ?Sized,
{
    let f = gap_f(gamma)?;
    // λ₁ > r, or λ₁ < βr/N
    if lambda1_sq > bound || (lambda1_sq as f64) * ((n * n) as f64) < beta * beta * (bound as f64) {
        return Ok(Decision::short_circuit_no());
    }
    let p = pvcp_prime(n, f, beta, params)?;
    threshold_decision(p, n, f, params, rng, |rng| {
        let pair = unshifted_draw(basis, p, rng)?;
        Ok(oracle.shortest_within(&pair.sublattice, bound)?.is_some())
    })
}

/// `(β, γ)`-GapPVCP by unshifted sparsification and an SVP oracle. The shift of
/// `inst.lat` is ignored.
pub fn gap_pvcp_decide<O, R>(inst: &GapInstance, params: &CountingParams, oracle: &mut O, rng: &mut R) -> Result<Decision>
where
    O: SvpOracle + ?Sized,
    R: Rng + ?Sized,
{
    if inst.threshold_n == 0 {
        return Err(invalid("N must be at least 1"));
    }
    let basis = inst.lat.basis.int_basis();
    let bound = scaled_bound(&inst.radius_sq, basis.scale())?;
    let l1 = norm_sq(&oracle.shortest(basis)?)?;
    pvcp_decide_int(basis, l1, bound, inst.threshold_n, inst.gap_gamma, inst.beta, params, oracle, rng)
}

/// A count approximation.
#[derive(Clone, Debug, PartialEq)]
pub struct CountEstimate {
    pub value: u64,
    /// `value >= lower_factor · true count` with the configured confidence.
    pub lower_factor: f64,
    /// Primitive counting gave up because `λ₁` is tiny compared with the radius.
    pub degenerate_flag: bool,
    /// No (primitive) vector at all in the ball; `value` is then 1 by convention.
    pub empty_ball: bool,
}

impl CountEstimate {
    pub fn exact(value: u64) -> Self {
        Self { value: value.max(1), lower_factor: 1.0, degenerate_flag: false, empty_ball: value == 0 }
    }
}

const HOEFFDING_GAP: f64 = 0.5 - 1.0 / core::f64::consts::E;

/// Votes so that a majority of runs, each right with probability `>= 1 - 1/e`, errs
/// with probability at most `delta`.
pub fn votes_for(delta: f64) -> u64 {
    let m = ceil(ln(1.0 / delta) / (2.0 * HOEFFDING_GAP * HOEFFDING_GAP)) as u64;
    m.max(1) | 1
}

struct Ladder {
    step: f64,
    params: CountingParams,
}

impl Ladder {
    fn new(f: f64, params: &CountingParams) -> Result<Self> {
        if !(f > 0.0) {
            return Err(invalid("f must be positive"));
        }
        if params.ladder_exponent == 0 {
            return Err(invalid("ladder exponent must be positive"));
        }
        let gamma = 1.0 + 1.0 / f;
        Ok(Self { step: powf(gamma, 1.0 / params.ladder_exponent as f64), params: params.clone() })
    }

    fn lower_factor(&self) -> f64 {
        1.0 / (self.step * self.step)
    }

    fn next(&self, n: u64) -> u64 {
        (n + 1).max(ceil(self.step * n as f64) as u64)
    }

    fn votes(&self, rung: u64) -> u64 {
        if !self.params.amplify {
            return 1;
        }
        let delta = (1.0 - self.params.confidence) * 6.0 / (PI * PI * ((rung + 1) * (rung + 1)) as f64);
        votes_for(delta)
    }

    /// Walks rungs from `start` until the first NO. Returns the last YES rung and
    /// whether the very first rung already said NO.
    fn climb<D>(&self, start: u64, mut decide: D) -> Result<(Option<u64>, bool)>
    where
        D: FnMut(u64) -> Result<bool>,
    {
        let mut n = start;
        let mut last_yes = None;
        for rung in 0..10_000u64 {
            let m = self.votes(rung);
            let mut yes = 0;
            for _ in 0..m {
                if decide(n)? {
                    yes += 1;
                }
            }
            if 2 * yes > m {
                last_yes = Some(n);
                n = self.next(n);
            } else {
                return Ok((last_yes, rung == 0));
            }
        }
        Err(Error::IterationCap { iterations: 10_000 })
    }
}

/// Multiplicative estimate of `|(L - t) ∩ rB|` from GapVCP decisions at gap
/// `γ^{1/k}`, `γ = 1 + 1/f`, `k = params.ladder_exponent`.
pub fn estimate_count<O, R>(
    lat: &ShiftedLattice,
    radius_sq: &Rational,
    f: f64,
    params: &CountingParams,
    oracle: &mut O,
    rng: &mut R,
) -> Result<CountEstimate>
where
    O: CvpOracle + ?Sized,
    R: Rng + ?Sized,
{
    let int = lat.int_form()?;
    estimate_count_int(&int, radius_sq, f, params, oracle, rng)
}

pub(crate) fn estimate_count_int<O, R>(
    lat: &IntShifted,
    radius_sq: &Rational,
    f: f64,
    params: &CountingParams,
    oracle: &mut O,
    rng: &mut R,
) -> Result<CountEstimate>
where
    O: CvpOracle + ?Sized,
    R: Rng + ?Sized,
{
    let bound = scaled_bound(radius_sq, lat.scale())?;
    estimate_count_with(f, params, |n, gap| Ok(vcp_decide_int(lat, bound, n, gap, params, oracle, rng)?.yes))
}

/// Ladder estimate from any decision procedure `decide(N, gap)`.
pub(crate) fn estimate_count_with<D>(f: f64, params: &CountingParams, mut decide: D) -> Result<CountEstimate>
where
    D: FnMut(u64, f64) -> Result<bool>,
{
    let ladder = Ladder::new(f, params)?;
    let (last_yes, _) = ladder.climb(1, |n| decide(n, ladder.step))?;
    Ok(CountEstimate {
        value: last_yes.map_or(1, |n| n + 1),
        lower_factor: ladder.lower_factor(),
        degenerate_flag: false,
        empty_ball: false,
    })
}

/// Multiplicative estimate of `ξ(L, r)` from GapPVCP decisions; the degeneracy guard
/// uses `β = 1/(100 n² f)`.
pub fn estimate_primitive_count<O, R>(
    basis: &crate::lattice::Basis,
    radius_sq: &Rational,
    f: f64,
    params: &CountingParams,
    oracle: &mut O,
    rng: &mut R,
) -> Result<CountEstimate>
where
    O: SvpOracle + ?Sized,
    R: Rng + ?Sized,
{
    let b = basis.int_basis();
    let l1 = norm_sq(&oracle.shortest(b)?)?;
    estimate_primitive_int(b, l1, radius_sq, f, params, oracle, rng)
}

pub(crate) fn estimate_primitive_int<O, R>(
    basis: &IntBasis,
    lambda1_sq: i128,
    radius_sq: &Rational,
    f: f64,
    params: &CountingParams,
    oracle: &mut O,
    rng: &mut R,
) -> Result<CountEstimate>
where
    O: SvpOracle + ?Sized,
    R: Rng + ?Sized,
{
    let ladder = Ladder::new(f, params)?;
    let bound = scaled_bound(radius_sq, basis.scale())?;
    if lambda1_sq > bound {
        return Ok(CountEstimate { value: 1, lower_factor: ladder.lower_factor(), degenerate_flag: false, empty_ball: true });
    }
    let n = basis.dim() as f64;
    let beta = 1.0 / (100.0 * n * n * f);
    let ratio = sqrt(bound as f64 / lambda1_sq as f64);
    let start = (ceil(beta * ratio) as u64).max(1);
    let (last_yes, first_no) = ladder.climb(start, |k| {
        Ok(pvcp_decide_int(basis, lambda1_sq, bound, k, ladder.step, beta, params, oracle, rng)?.yes)
    })?;
    let degenerate = first_no && start > 1;
    Ok(CountEstimate {
        value: if degenerate { 1 } else { last_yes.map_or(1, |k| k + 1) },
        lower_factor: ladder.lower_factor(),
        degenerate_flag: degenerate,
        empty_ball: false,
    })
}

/// Supplies `N_i` for a list of radii around the shift.
pub trait BallCounter {
    fn count_radii<O, R>(
        &mut self,
        lat: &IntShifted,
        radii_sq: &[Rational],
        oracle: &mut O,
        rng: &mut R,
    ) -> Result<Vec<CountEstimate>>
    where
        O: CvpOracle + ?Sized,
        R: Rng + ?Sized;

    fn method(&self) -> &'static str;
}

/// Supplies `N_i` (primitive pairs) for a list of radii around the origin.
pub trait PrimitiveCounter {
    fn count_radii<O, R>(
        &mut self,
        basis: &IntBasis,
        lambda1_sq: i128,
        radii_sq: &[Rational],
        oracle: &mut O,
        rng: &mut R,
    ) -> Result<Vec<CountEstimate>>
    where
        O: SvpOracle + ?Sized,
        R: Rng + ?Sized;

    fn method(&self) -> &'static str;
}

/// Ground truth by enumeration; makes no oracle calls.
#[derive(Clone, Copy, Debug, Default)]
pub struct ExactBallCounter;

/// Exact counts for a batch of radii from one enumeration at the largest radius.
pub(crate) fn exact_counts_int(lat: &IntShifted, radii_sq: &[Rational]) -> Result<Vec<u64>> {
    let Some(max) = radii_sq.iter().max() else { return Ok(Vec::new()) };
    let mut norms = Vec::new();
    for_each_in_int_ball(lat, max, |v, _| {
        norms.push(norm_sq(v)?);
        Ok(())
    })?;
    norms.sort_unstable();
    radii_sq
        .iter()
        .map(|r| {
            let b = scaled_bound(r, lat.scale())?;
            Ok(norms.partition_point(|&x| x <= b) as u64)
        })
        .collect()
}

impl BallCounter for ExactBallCounter {
    fn count_radii<O, R>(&mut self, lat: &IntShifted, radii_sq: &[Rational], _: &mut O, _: &mut R) -> Result<Vec<CountEstimate>>
    where
        O: CvpOracle + ?Sized,
        R: Rng + ?Sized,
    {
        Ok(exact_counts_int(lat, radii_sq)?.into_iter().map(CountEstimate::exact).collect())
    }

    fn method(&self) -> &'static str {
        "exact"
    }
}

/// Ground-truth primitive counts, with the fallback `N_i = 1` whenever
/// `λ₁ < r_i / (100 n² f ξ(L, r_i))`.
#[derive(Clone, Copy, Debug)]
pub struct ExactPrimitiveCounter {
    pub f: f64,
}

impl PrimitiveCounter for ExactPrimitiveCounter {
    fn count_radii<O, R>(
        &mut self,
        basis: &IntBasis,
        lambda1_sq: i128,
        radii_sq: &[Rational],
        _: &mut O,
        _: &mut R,
    ) -> Result<Vec<CountEstimate>>
    where
        O: SvpOracle + ?Sized,
        R: Rng + ?Sized,
    {
        let Some(max) = radii_sq.iter().max() else { return Ok(Vec::new()) };
        let mut norms = Vec::new();
        for_each_in_int_ball(&IntShifted::centered(basis.clone()), max, |v, x| {
            if gcd_coeffs(x) == 1 {
                norms.push(norm_sq(v)?);
            }
            Ok(())
        })?;
        norms.sort_unstable();
        let n = basis.dim() as f64;
        let l1 = sqrt(lambda1_sq as f64);
        radii_sq
            .iter()
            .map(|r| {
                let b = scaled_bound(r, basis.scale())?;
                let xi = (norms.partition_point(|&x| x <= b) / 2) as u64;
                if xi == 0 {
                    return Ok(CountEstimate::exact(0));
                }
                let r_scaled = sqrt(rational_to_f64(r)) * basis.scale() as f64;
                if l1 * 100.0 * n * n * self.f * (xi as f64) < r_scaled {
                    return Ok(CountEstimate { value: 1, lower_factor: 1.0, degenerate_flag: true, empty_ball: false });
                }
                Ok(CountEstimate::exact(xi))
            })
            .collect()
    }

    fn method(&self) -> &'static str {
        "exact"
    }
}

/// Counts every radius with [`estimate_count`].
#[derive(Clone, Debug)]
pub struct SparsificationCounter {
    pub f: f64,
    pub params: CountingParams,
}

impl BallCounter for SparsificationCounter {
    fn count_radii<O, R>(&mut self, lat: &IntShifted, radii_sq: &[Rational], oracle: &mut O, rng: &mut R) -> Result<Vec<CountEstimate>>
    where
        O: CvpOracle + ?Sized,
        R: Rng + ?Sized,
    {
        radii_sq.iter().map(|r| estimate_count_int(lat, r, self.f, &self.params, oracle, rng)).collect()
    }

    fn method(&self) -> &'static str {
        "sparsification"
    }
}

/// Counts every radius with [`estimate_primitive_count`].
#[derive(Clone, Debug)]
pub struct SparsificationPrimitiveCounter {
    pub f: f64,
    pub params: CountingParams,
}

impl PrimitiveCounter for SparsificationPrimitiveCounter {
    fn count_radii<O, R>(
        &mut self,
        basis: &IntBasis,
        lambda1_sq: i128,
        radii_sq: &[Rational],
        oracle: &mut O,
        rng: &mut R,
    ) -> Result<Vec<CountEstimate>>
    where
        O: SvpOracle + ?Sized,
        R: Rng + ?Sized,
    {
        radii_sq
            .iter()
            .map(|r| estimate_primitive_int(basis, lambda1_sq, r, self.f, &self.params, oracle, rng))
            .collect()
    }

    fn method(&self) -> &'static str {
        "sparsification"
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{rat, rat_int, Basis};
    use crate::oracles::{exact_count, exact_primitive_count, ExactOracle};
    use crate::rng::seeded;

    fn z2() -> ShiftedLattice {
        ShiftedLattice::centered(Basis::identity(2))
    }

    #[test]
    fn vcp_examples() {
        let mut rng = seeded(1);
        let mut o = ExactOracle::default();
        let params = CountingParams::fast();
        let no = GapInstance::new(z2(), rat_int(1), 5, 4.0).unwrap();
        assert!(!gap_vcp_decide(&no, &params, &mut o, &mut rng).unwrap().yes);
        let yes = GapInstance::new(z2(), rat_int(1), 2, 4.0).unwrap();
        assert!(gap_vcp_decide(&yes, &params, &mut o, &mut rng).unwrap().yes);
    }

    #[test]
    fn pvcp_examples() {
        let mut rng = seeded(2);
        let mut o = ExactOracle::default();
        let params = CountingParams::fast();
        let no = GapInstance::new(z2(), rat_int(1), 2, 1.0).unwrap();
        assert!(!gap_pvcp_decide(&no, &params, &mut o, &mut rng).unwrap().yes);
        let yes = GapInstance::new(z2(), rat_int(2), 2, 1.0).unwrap();
        assert!(gap_pvcp_decide(&yes, &params, &mut o, &mut rng).unwrap().yes);
        // λ₁ = 1/1000 < βr/N with β = 1/10, r = 1, N = 2
        let tiny = Basis::diagonal(&[rat(1, 1000), rat_int(1)]).unwrap();
        let degenerate = GapInstance::new(ShiftedLattice::centered(tiny), rat_int(1), 2, 10.0).unwrap();
        let d = gap_pvcp_decide(&degenerate, &params, &mut o, &mut rng).unwrap();
        assert!(!d.yes);
        assert_eq!(d.trials, 0);
    }

    #[test]
    fn estimates_bracket_truth() {
        let mut rng = seeded(3);
        let mut o = ExactOracle::default();
        let params = CountingParams::fast();
        for r in [rat(1, 4), rat_int(1), rat_int(2)] {
            let truth = exact_count(&z2(), &r).unwrap();
            let e = estimate_count(&z2(), &r, 1.0, &params, &mut o, &mut rng).unwrap();
            assert!(e.value <= truth, "{} > {truth}", e.value);
            assert!(e.value as f64 >= e.lower_factor * truth as f64);
        }
        let i2 = Basis::identity(2);
        let e = estimate_primitive_count(&i2, &rat(1, 4), 1.0, &params, &mut o, &mut rng).unwrap();
        assert_eq!((e.value, e.empty_ball, e.degenerate_flag), (1, true, false));
        let truth = exact_primitive_count(&i2, &rat_int(2)).unwrap();
        let e = estimate_primitive_count(&i2, &rat_int(2), 1.0, &params, &mut o, &mut rng).unwrap();
        assert!(e.value <= truth && e.value as f64 >= e.lower_factor * truth as f64);
    }

    #[test]
    fn degenerate_primitive_estimate() {
        let mut rng = seeded(4);
        let mut o = ExactOracle::default();
        // only ±e₁/1000 is primitive inside radius 1/2, and λ₁ is far below r/(400 ξ)
        let tiny = Basis::diagonal(&[rat(1, 1000), rat_int(1)]).unwrap();
        let params = CountingParams { ladder_exponent: 1, ..CountingParams::fast() };
        let e = estimate_primitive_count(&tiny, &rat(1, 4), 1.0, &params, &mut o, &mut rng).unwrap();
        assert!(e.degenerate_flag);
        assert_eq!(e.value, 1);
    }

    #[test]
    fn exact_counters_match_enumeration() {
        let lat = ShiftedLattice::new(
            Basis::from_int_columns(&[&[2, 1], &[1, 3]]).unwrap(),
            crate::lattice::RationalVector::from_pairs(&[(1, 3), (1, 2)]),
        )
        .unwrap();
        let radii: Vec<Rational> = (0..30).map(|i| rat(i, 2)).collect();
        let got = ExactBallCounter
            .count_radii(&lat.int_form().unwrap(), &radii, &mut ExactOracle::default(), &mut seeded(0))
            .unwrap();
        for (r, c) in radii.iter().zip(&got) {
            let t = exact_count(&lat, r).unwrap();
            assert_eq!(c.value, t.max(1));
            assert_eq!(c.empty_ball, t == 0);
        }
    }

    #[test]
    fn votes_grow_with_confidence() {
        assert!(votes_for(0.01) < votes_for(0.0001));
        assert_eq!(votes_for(0.5) % 2, 1);
    }
}

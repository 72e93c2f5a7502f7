//! Sampling from `D_{L-t,s}` with a CVP oracle and from `D_{L,s}` with an SVP oracle.
//!
//! Both pipelines split the Gaussian into a mixture of uniform distributions over
//! nested balls: pick a radius `r_k` with probability proportional to `N_k w_k`, then
//! draw a nearly uniform point of the ball by sparsifying until the oracle's answer
//! lands inside it. The schedule (radii, counts, weights) only depends on the
//! instance, so [`DgsSampler`] and [`CdgsSampler`] build it once and reuse it.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use rand::Rng;

use crate::counting::{BallCounter, CountEstimate, PrimitiveCounter};
use crate::error::{invalid, Error, Result};
use crate::gauss1d::sample_z_nonzero;
use crate::lattice::{Basis, IntBasis, IntShifted, Rational, RationalVector, ShiftedLattice};
use crate::numeric::{ceil, compensated_sum, exp, expm1, ln, rational_to_f64, sqrt, CompensatedSum, PI};
use crate::oracles::{scaled_bound, CvpOracle, SvpOracle};
use crate::sparsify::{prime_in_interval, prime_in_real_interval, shifted_draw, unshifted_draw, SparsifiedPair};

/// Gaussian width `s > 0`, kept exact so rescaling by `1/s` stays exact.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GaussianParam(Rational);

impl GaussianParam {
    pub fn new(s: Rational) -> Result<Self> {
        if s <= Rational::from_integer(0.into()) {
            return Err(invalid("s must be positive"));
        }
        Ok(Self(s))
    }

    pub fn value(&self) -> &Rational {
        &self.0
    }

    pub fn to_f64(&self) -> f64 {
        rational_to_f64(&self.0)
    }
}

/// Radii `r_0 < ... < r_ℓ`, counts `N_i` and weights `w_i` of a sampling pipeline,
/// in the coordinates of the lattice rescaled to `s = 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct RadialSchedule {
    pub radii_sq: Vec<Rational>,
    pub counts: Vec<CountEstimate>,
    /// For DGS these are the radial weights times `e^{π d²}`.
    pub weights: Vec<f64>,
    /// `W = Σ N_i w_i`, in the same units as `weights`.
    pub total: f64,
}

impl RadialSchedule {
    /// `ℓ`, the index of the last radius.
    pub fn ell(&self) -> usize {
        self.radii_sq.len() - 1
    }

    pub fn radii(&self) -> Vec<f64> {
        self.radii_sq.iter().map(|r| sqrt(rational_to_f64(r))).collect()
    }

    fn cumulative(&self) -> Vec<f64> {
        let mut acc = CompensatedSum::new();
        self.counts
            .iter()
            .zip(&self.weights)
            .map(|(c, w)| {
                acc.add(c.value as f64 * w);
                acc.value()
            })
            .collect()
    }
}

pub(crate) fn pick_index<R: Rng + ?Sized>(cumulative: &[f64], rng: &mut R) -> usize {
    let total = *cumulative.last().expect("nonempty schedule");
    let u = rng.gen::<f64>() * total;
    cumulative.partition_point(|&c| c <= u).min(cumulative.len() - 1)
}

pub(crate) fn check_f(f: u64) -> Result<()> {
    if f == 0 {
        return Err(invalid("f must be at least 1"));
    }
    Ok(())
}

fn norm_sq(v: &[i128]) -> Result<i128> {
    v.iter().try_fold(0i128, |acc, &x| {
        acc.checked_add(x.checked_mul(x).ok_or(Error::Overflow)?).ok_or(Error::Overflow)
    })
}

/// A sampler output together with its bookkeeping.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Draw {
    pub vector: RationalVector,
    /// Schedule index `k`; `None` for the zero branch of cDGS.
    pub index: Option<usize>,
    /// Rejection rounds of the ball sampler (oracle calls).
    pub iterations: u64,
}

/// Prime in `[10fN, 20fN]` for the shifted uniform sampler.
pub fn ball_prime(n_est: u64, f: u64) -> Result<u64> {
    let lo = 10u64.checked_mul(f).and_then(|x| x.checked_mul(n_est)).ok_or(Error::Overflow)?;
    prime_in_interval(lo, 2 * lo)
}

/// Prime in `[100fN ln(10fN), 200fN ln(10fN)]`, at least 101, for the primitive sampler.
pub fn primitive_prime(n_est: u64, f: u64) -> Result<u64> {
    let fnn = f as f64 * n_est as f64;
    let lo = (100.0 * fnn * ln(10.0 * fnn)).max(101.0);
    prime_in_real_interval(lo, 2.0 * lo)
}

pub(crate) fn ball_cap(f: u64) -> u64 {
    100_000u64.saturating_mul(f.saturating_mul(f))
}

fn primitive_cap(n_est: u64, f: u64) -> u64 {
    let l = ceil(ln(10.0 * f as f64 * n_est as f64)).max(1.0) as u64;
    ball_cap(f).saturating_mul(l)
}

/// One shifted sparsification draw. In dimension one `z = 0` would leave the whole
/// lattice in place with probability `1/p`, which is the same order as the target
/// probabilities, so `z` is redrawn until nonzero there.
fn ball_pair<R: Rng + ?Sized>(basis: &IntBasis, p: u64, rng: &mut R) -> Result<SparsifiedPair> {
    loop {
        let pair = shifted_draw(basis, p, rng)?;
        if basis.dim() > 1 || pair.z[0] != 0 {
            return Ok(pair);
        }
    }
}

/// Nearly uniform point of `(L - t) ∩ K` for a ball `K` around the origin given by
/// `inside`. Returns the point of `L - t` (scaled) and the number of rounds.
pub(crate) fn uniform_ball_int<O, R, F>(
    lat: &IntShifted,
    p: u64,
    cap: u64,
    l2_bound: Option<i128>,
    mut inside: F,
    oracle: &mut O,
    rng: &mut R,
) -> Result<(Vec<i128>, u64)>
where
    O: CvpOracle + ?Sized,
    R: Rng + ?Sized,
    F: FnMut(&[i128]) -> Result<bool>,
{
    let n = lat.dim();
    let mut target = alloc::vec![0i128; n];
    let mut diff = alloc::vec![0i128; n];
    for it in 1..=cap {
        let pair = ball_pair(&lat.basis, p, rng)?;
        for ((t, a), w) in target.iter_mut().zip(&lat.shift).zip(&pair.shift_vector) {
            *t = a.checked_add(*w).ok_or(Error::Overflow)?;
        }
        let y = match l2_bound {
            Some(b) => match oracle.closest_within(&pair.sublattice, &target, b)? {
                Some(y) => y,
                None => continue,
            },
            None => oracle.closest(&pair.sublattice, &target)?,
        };
        // y' - w - t
        for ((d, a), b) in diff.iter_mut().zip(&y).zip(&target) {
            *d = a.checked_sub(*b).ok_or(Error::Overflow)?;
        }
        if inside(&diff)? {
            return Ok((diff, it));
        }
    }
    Err(Error::IterationCap { iterations: cap })
}

/// Nearly uniform element of `(L - t) ∩ rB`, assuming `N <= |(L - t) ∩ rB| <= fN`.
/// Gives up after `10⁵ f²` rounds.
pub fn uniform_ball_sample<O, R>(
    lat: &ShiftedLattice,
    radius_sq: &Rational,
    n_est: u64,
    f: u64,
    oracle: &mut O,
    rng: &mut R,
) -> Result<RationalVector>
where
    O: CvpOracle + ?Sized,
    R: Rng + ?Sized,
{
    check_f(f)?;
    if n_est == 0 {
        return Err(invalid("N must be at least 1"));
    }
    let int = lat.int_form()?;
    let bound = scaled_bound(radius_sq, int.scale())?;
    let p = ball_prime(n_est, f)?;
    let (x, _) = uniform_ball_int(&int, p, ball_cap(f), Some(bound), |_| Ok(true), oracle, rng)?;
    Ok(RationalVector::from_scaled(&x, int.scale()))
}

pub(crate) fn uniform_primitive_int<O, R>(
    basis: &IntBasis,
    bound: i128,
    p: u64,
    cap: u64,
    oracle: &mut O,
    rng: &mut R,
) -> Result<(Vec<i128>, u64)>
where
    O: SvpOracle + ?Sized,
    R: Rng + ?Sized,
{
    for it in 1..=cap {
        let pair = unshifted_draw(basis, p, rng)?;
        if let Some(y) = oracle.shortest_within(&pair.sublattice, bound)? {
            return Ok((y, it));
        }
    }
    Err(Error::IterationCap { iterations: cap })
}

/// A primitive vector of norm at most `r`, each `±` pair nearly equally likely,
/// assuming `N <= ξ(L, r) <= fN` and `λ₁ > r/(f ξ)`.
pub fn uniform_primitive_sample<O, R>(
    basis: &Basis,
    radius_sq: &Rational,
    n_est: u64,
    f: u64,
    oracle: &mut O,
    rng: &mut R,
) -> Result<RationalVector>
where
    O: SvpOracle + ?Sized,
    R: Rng + ?Sized,
{
    check_f(f)?;
    if n_est == 0 {
        return Err(invalid("N must be at least 1"));
    }
    let ib = basis.int_basis();
    let bound = scaled_bound(radius_sq, ib.scale())?;
    let p = primitive_prime(n_est, f)?;
    let (y, _) = uniform_primitive_int(ib, bound, p, primitive_cap(n_est, f), oracle, rng)?;
    Ok(RationalVector::from_scaled(&y, ib.scale()))
}

fn primes_for<F>(counts: &[CountEstimate], mut prime: F) -> Result<BTreeMap<u64, u64>>
where
    F: FnMut(u64) -> Result<u64>,
{
    let mut out = BTreeMap::new();
    for c in counts {
        if let alloc::collections::btree_map::Entry::Vacant(e) = out.entry(c.value) {
            e.insert(prime(c.value)?);
        }
    }
    Ok(out)
}

/// Prepared `(γ, ε)`-DGS sampler for `L - t` at width `s`, with `γ = 1 + 1/f` and
/// `ε = 2^{-f}`.
#[derive(Clone, Debug)]
pub struct DgsSampler {
    lat: IntShifted,
    s: Rational,
    f: u64,
    uniform_f: u64,
    dist_sq: Rational,
    schedule: RadialSchedule,
    cumulative: Vec<f64>,
    bounds: Vec<i128>,
    primes: BTreeMap<u64, u64>,
}

impl DgsSampler {
    /// Rescales to `s = 1`, finds `d = dist(t, L)` with the oracle, and counts the
    /// points in each ball `r_i = √(d² + i/(10f))`, `i <= ℓ = ⌈100 n² f ln(10 + d)⌉`.
    pub fn prepare<C, O, R>(
        lat: &ShiftedLattice,
        s: &GaussianParam,
        f: u64,
        counter: &mut C,
        oracle: &mut O,
        rng: &mut R,
    ) -> Result<Self>
    where
        C: BallCounter + ?Sized,
        O: CvpOracle + ?Sized,
        R: Rng + ?Sized,
    {
        check_f(f)?;
        let int = lat.scaled_down(s.value())?.int_form()?;
        let q2 = Rational::from_integer((int.scale() * int.scale()).into());
        let y = oracle.closest(&int.basis, &int.shift)?;
        let d2: Vec<i128> = y.iter().zip(&int.shift).map(|(a, b)| a - b).collect();
        let dist_sq = Rational::from_integer(norm_sq(&d2)?.into()) / &q2;
        let d = sqrt(rational_to_f64(&dist_sq));
        let n = int.dim() as f64;
        let ell = ceil(100.0 * n * n * f as f64 * ln(10.0 + d)) as usize;
        let step = Rational::new(1.into(), (10 * f).into());
        let radii_sq: Vec<Rational> =
            (0..=ell).map(|i| &dist_sq + &step * Rational::from_integer(i.into())).collect();
        let counts = counter.count_radii(&int, &radii_sq, oracle, rng)?;
        if counts.len() != radii_sq.len() {
            return Err(invalid("counter returned the wrong number of counts"));
        }
        // e^{-π r_i²} - e^{-π r_{i+1}²} = e^{-π d²} e^{-π i/(10f)} (1 - e^{-π/(10f)})
        let a = PI / (10.0 * f as f64);
        let c = -expm1(-a);
        let weights: Vec<f64> =
            (0..=ell).map(|i| if i < ell { exp(-a * i as f64) * c } else { exp(-a * i as f64) }).collect();
        let total = compensated_sum(counts.iter().zip(&weights).map(|(c, w)| c.value as f64 * w));
        let schedule = RadialSchedule { radii_sq, counts, weights, total };
        let bounds = schedule.radii_sq.iter().map(|r| scaled_bound(r, int.scale())).collect::<Result<Vec<_>>>()?;
        let primes = primes_for(&schedule.counts, |v| ball_prime(v, f))?;
        Ok(Self {
            lat: int,
            s: s.value().clone(),
            f,
            uniform_f: f,
            dist_sq,
            cumulative: schedule.cumulative(),
            schedule,
            bounds,
            primes,
        })
    }

    /// Runs the ball sampler at precision `uniform_f` instead of `f`
    /// (`10f` gives uniformity within `γ^{1/10}`).
    pub fn with_uniform_f(mut self, uniform_f: u64) -> Result<Self> {
        check_f(uniform_f)?;
        self.primes = primes_for(&self.schedule.counts, |v| ball_prime(v, uniform_f))?;
        self.uniform_f = uniform_f;
        Ok(self)
    }

    pub fn schedule(&self) -> &RadialSchedule {
        &self.schedule
    }

    /// `dist(t/s, L/s)²`.
    pub fn dist_sq(&self) -> &Rational {
        &self.dist_sq
    }

    pub fn f(&self) -> u64 {
        self.f
    }

    /// The rescaled lattice `(L - t)/s` that the oracle sees.
    pub fn working_lattice(&self) -> Result<ShiftedLattice> {
        self.lat.to_shifted()
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
        let bound = self.bounds[k];
        let p = self.primes[&self.schedule.counts[k].value];
        let (x, iterations) =
            uniform_ball_int(&self.lat, p, ball_cap(self.uniform_f), Some(bound), |_| Ok(true), oracle, rng)?;
        let vector = RationalVector::from_scaled(&x, self.lat.scale()).scale(&self.s);
        Ok(Draw { vector, index: Some(k), iterations })
    }
}

/// One DGS sample; prefer [`DgsSampler`] for repeated draws.
pub fn dgs_sample<C, O, R>(
    lat: &ShiftedLattice,
    s: &GaussianParam,
    f: u64,
    counter: &mut C,
    oracle: &mut O,
    rng: &mut R,
) -> Result<RationalVector>
where
    C: BallCounter + ?Sized,
    O: CvpOracle + ?Sized,
    R: Rng + ?Sized,
{
    DgsSampler::prepare(lat, s, f, counter, oracle, rng)?.sample(oracle, rng)
}

/// `ρ_{1/r}(Z \ {0}) - ρ_{1/r'}(Z \ {0})` for `r'² = r² + delta`, without cancellation.
fn rho_inv_difference(r_sq: f64, delta: f64) -> f64 {
    let mut acc = CompensatedSum::new();
    let mut k = 1.0f64;
    loop {
        let e = exp(-PI * k * k * r_sq);
        let term = e * -expm1(-PI * k * k * delta);
        acc.add(term);
        if e == 0.0 || term < 1e-18 * acc.value() {
            break;
        }
        k += 1.0;
    }
    2.0 * acc.value()
}

/// `ρ_{1/r}(Z \ {0}) = 2 Σ_k e^{-π k² r²}`.
fn rho_inv(r_sq: f64) -> f64 {
    crate::gauss1d::rho_z_nonzero(1.0 / sqrt(r_sq))
}

/// Prepared `(γ, ε)`-cDGS sampler for `L` at width `s`.
#[derive(Clone, Debug)]
pub struct CdgsSampler {
    basis: IntBasis,
    s: Rational,
    f: u64,
    uniform_f: u64,
    svp: Vec<i128>,
    lambda1_sq: Rational,
    schedule: RadialSchedule,
    cumulative: Vec<f64>,
    bounds: Vec<i128>,
    primes: BTreeMap<u64, u64>,
}

impl CdgsSampler {
    /// Rescales to `s = 1`, gets `λ₁` from the oracle, and counts primitive pairs in
    /// the balls `r_i = √(λ₁² + i/(100nf))`, `i <= ℓ = ⌈200 n² f²⌉`.
    pub fn prepare<C, O, R>(
        basis: &Basis,
        s: &GaussianParam,
        f: u64,
        counter: &mut C,
        oracle: &mut O,
        rng: &mut R,
    ) -> Result<Self>
    where
        C: PrimitiveCounter + ?Sized,
        O: SvpOracle + ?Sized,
        R: Rng + ?Sized,
    {
        check_f(f)?;
        let scaled = basis.scaled(&s.value().recip())?;
        let ib = scaled.int_basis().clone();
        let svp = oracle.shortest(&ib)?;
        let l1 = norm_sq(&svp)?;
        let q2 = Rational::from_integer((ib.scale() * ib.scale()).into());
        let lambda1_sq = Rational::from_integer(l1.into()) / &q2;
        let n = ib.dim() as u64;
        let ell = (200 * n * n * f * f) as usize;
        let step = Rational::new(1.into(), (100 * n * f).into());
        let radii_sq: Vec<Rational> =
            (0..=ell).map(|i| &lambda1_sq + &step * Rational::from_integer(i.into())).collect();
        let counts = counter.count_radii(&ib, l1, &radii_sq, oracle, rng)?;
        if counts.len() != radii_sq.len() {
            return Err(invalid("counter returned the wrong number of counts"));
        }
        let l1f = rational_to_f64(&lambda1_sq);
        let delta = 1.0 / (100 * n * f) as f64;
        let weights: Vec<f64> = (0..=ell)
            .map(|i| {
                let r_sq = l1f + i as f64 * delta;
                if i < ell {
                    rho_inv_difference(r_sq, delta)
                } else {
                    rho_inv(r_sq)
                }
            })
            .collect();
        let total = compensated_sum(counts.iter().zip(&weights).map(|(c, w)| c.value as f64 * w));
        let schedule = RadialSchedule { radii_sq, counts, weights, total };
        let bounds = schedule.radii_sq.iter().map(|r| scaled_bound(r, ib.scale())).collect::<Result<Vec<_>>>()?;
        let primes = primes_for(&schedule.counts, |v| primitive_prime(v, f))?;
        Ok(Self {
            basis: ib,
            s: s.value().clone(),
            f,
            uniform_f: f,
            svp,
            lambda1_sq,
            cumulative: schedule.cumulative(),
            schedule,
            bounds,
            primes,
        })
    }

    pub fn with_uniform_f(mut self, uniform_f: u64) -> Result<Self> {
        check_f(uniform_f)?;
        self.primes = primes_for(&self.schedule.counts, |v| primitive_prime(v, uniform_f))?;
        self.uniform_f = uniform_f;
        Ok(self)
    }

    pub fn schedule(&self) -> &RadialSchedule {
        &self.schedule
    }

    /// `λ₁(L/s)²`.
    pub fn lambda1_sq(&self) -> &Rational {
        &self.lambda1_sq
    }

    /// `1/(1 + W)`.
    pub fn zero_probability(&self) -> f64 {
        1.0 / (1.0 + self.schedule.total)
    }

    pub fn f(&self) -> u64 {
        self.f
    }

    /// The rescaled lattice `L/s` that the oracle sees.
    pub fn working_basis(&self) -> Result<Basis> {
        self.basis.to_basis()
    }

    pub fn sample<O, R>(&self, oracle: &mut O, rng: &mut R) -> Result<RationalVector>
    where
        O: SvpOracle + ?Sized,
        R: Rng + ?Sized,
    {
        Ok(self.sample_detailed(oracle, rng)?.vector)
    }

    pub fn sample_detailed<O, R>(&self, oracle: &mut O, rng: &mut R) -> Result<Draw>
    where
        O: SvpOracle + ?Sized,
        R: Rng + ?Sized,
    {
        let n = self.basis.dim();
        if rng.gen::<f64>() * (1.0 + self.schedule.total) < 1.0 {
            return Ok(Draw { vector: RationalVector::zeros(n), index: None, iterations: 0 });
        }
        let k = pick_index(&self.cumulative, rng);
        let est = &self.schedule.counts[k];
        // N_k = 1 only stands for a unique pair when the estimate rules out a second
        // one; otherwise sample among the pairs unless the count is degenerate.
        let unique = est.value == 1 && (est.degenerate_flag || (est.value as f64) / est.lower_factor < 2.0);
        let (x, iterations) = if unique {
            (self.svp.clone(), 0)
        } else {
            let p = self.primes[&est.value];
            uniform_primitive_int(
                &self.basis,
                self.bounds[k],
                p,
                primitive_cap(est.value, self.uniform_f),
                oracle,
                rng,
            )?
        };
        let len = sqrt(norm_sq(&x)? as f64) / self.basis.scale() as f64;
        let z = sample_z_nonzero(1.0 / len, rng) as i128;
        let zx = x.iter().map(|&a| a.checked_mul(z).ok_or(Error::Overflow)).collect::<Result<Vec<_>>>()?;
        let vector = RationalVector::from_scaled(&zx, self.basis.scale()).scale(&self.s);
        Ok(Draw { vector, index: Some(k), iterations })
    }
}

/// One cDGS sample; prefer [`CdgsSampler`] for repeated draws.
pub fn cdgs_sample<C, O, R>(
    basis: &Basis,
    s: &GaussianParam,
    f: u64,
    counter: &mut C,
    oracle: &mut O,
    rng: &mut R,
) -> Result<RationalVector>
where
    C: PrimitiveCounter + ?Sized,
    O: SvpOracle + ?Sized,
    R: Rng + ?Sized,
{
    CdgsSampler::prepare(basis, s, f, counter, oracle, rng)?.sample(oracle, rng)
}

//! Exact CVP/SVP oracles by enumeration, ground-truth counts, and exact discrete
//! Gaussian tables.
//!
//! The reductions only ever talk to the [`CvpOracle`] and [`SvpOracle`] traits, so any
//! exact solver can be plugged in. [`ExactOracle`] is the enumeration-backed one and
//! [`AuditedOracle`] wraps another oracle to record whether every query really was on
//! a sublattice (and coset) of a fixed reference lattice.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::sync::atomic::{AtomicUsize, Ordering};

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use rand::Rng;

use crate::enumerate::{self, gcd_coeffs, Reduced};
use crate::error::{invalid, Error, Result};
use crate::lattice::{
    Basis, IntBasis, IntShifted, MembershipTest, Rational, RationalVector, ShiftedLattice,
};
use crate::numeric::{self, compensated_sum, exp, ln, rational_to_f64, sqrt, PI};

pub const DEFAULT_DIM_CAP: usize = 6;

static DIM_CAP: AtomicUsize = AtomicUsize::new(DEFAULT_DIM_CAP);

/// Process-wide dimension cap for enumeration.
pub fn dim_cap() -> usize {
    DIM_CAP.load(Ordering::Relaxed)
}

pub fn set_dim_cap(cap: usize) {
    DIM_CAP.store(cap.max(1), Ordering::Relaxed);
}

fn check_cap(n: usize, cap: usize) -> Result<()> {
    if n > cap {
        return Err(Error::DimensionCap { dim: n, cap });
    }
    Ok(())
}

/// Exact CVP oracle on scaled integer lattices. `target` uses the basis' scale and
/// the returned lattice vector does too.
pub trait CvpOracle {
    fn closest(&mut self, basis: &IntBasis, target: &[i128]) -> Result<Vec<i128>>;

    /// The answer of [`closest`](Self::closest) if its squared distance to `target`
    /// is at most `bound`, otherwise `None`. Implementations may answer without
    /// locating far-away closest vectors, but must agree with `closest` exactly.
    fn closest_within(&mut self, basis: &IntBasis, target: &[i128], bound: i128) -> Result<Option<Vec<i128>>> {
        let y = self.closest(basis, target)?;
        Ok((enumerate::dist_sq(&y, target)? <= bound).then_some(y))
    }
}

/// Exact SVP oracle on scaled integer lattices.
pub trait SvpOracle {
    fn shortest(&mut self, basis: &IntBasis) -> Result<Vec<i128>>;

    /// The answer of [`shortest`](Self::shortest) if its squared norm is at most
    /// `bound`, otherwise `None`.
    fn shortest_within(&mut self, basis: &IntBasis, bound: i128) -> Result<Option<Vec<i128>>> {
        let y = self.shortest(basis)?;
        Ok((enumerate::norm_sq(&y)? <= bound).then_some(y))
    }
}

impl<T: CvpOracle + ?Sized> CvpOracle for &mut T {
    fn closest(&mut self, basis: &IntBasis, target: &[i128]) -> Result<Vec<i128>> {
        (**self).closest(basis, target)
    }

    fn closest_within(&mut self, basis: &IntBasis, target: &[i128], bound: i128) -> Result<Option<Vec<i128>>> {
        (**self).closest_within(basis, target, bound)
    }
}

impl<T: SvpOracle + ?Sized> SvpOracle for &mut T {
    fn shortest(&mut self, basis: &IntBasis) -> Result<Vec<i128>> {
        (**self).shortest(basis)
    }

    fn shortest_within(&mut self, basis: &IntBasis, bound: i128) -> Result<Option<Vec<i128>>> {
        (**self).shortest_within(basis, bound)
    }
}

/// Enumeration-backed exact oracle with lexicographic tie-breaking.
#[derive(Clone, Debug)]
pub struct ExactOracle {
    pub dim_cap: usize,
    scratch: Reduced,
}

impl Default for ExactOracle {
    fn default() -> Self {
        Self::with_cap(dim_cap())
    }
}

impl ExactOracle {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_cap(dim_cap: usize) -> Self {
        Self { dim_cap, scratch: Reduced::empty() }
    }
}

impl CvpOracle for ExactOracle {
    fn closest(&mut self, basis: &IntBasis, target: &[i128]) -> Result<Vec<i128>> {
        check_cap(basis.dim(), self.dim_cap)?;
        if target.len() != basis.dim() {
            return Err(Error::DimensionMismatch { expected: basis.dim(), found: target.len() });
        }
        enumerate::closest(&Reduced::new(basis)?, target)
    }

    fn closest_within(&mut self, basis: &IntBasis, target: &[i128], bound: i128) -> Result<Option<Vec<i128>>> {
        check_cap(basis.dim(), self.dim_cap)?;
        if target.len() != basis.dim() {
            return Err(Error::DimensionMismatch { expected: basis.dim(), found: target.len() });
        }
        self.scratch.reset(basis)?;
        enumerate::closest_within(&mut self.scratch, target, bound)
    }
}

impl SvpOracle for ExactOracle {
    fn shortest(&mut self, basis: &IntBasis) -> Result<Vec<i128>> {
        check_cap(basis.dim(), self.dim_cap)?;
        enumerate::shortest(&Reduced::new(basis)?)
    }

    fn shortest_within(&mut self, basis: &IntBasis, bound: i128) -> Result<Option<Vec<i128>>> {
        check_cap(basis.dim(), self.dim_cap)?;
        self.scratch.reset(basis)?;
        enumerate::shortest_within(&mut self.scratch, bound)
    }
}

/// Wraps an oracle and checks every query against a reference lattice `L - t`:
/// each basis column must lie in `L`, and each CVP target must lie in `t + L`.
#[derive(Clone, Debug)]
pub struct AuditedOracle<O> {
    pub inner: O,
    test: MembershipTest,
    shift: Vec<i128>,
    shift_scale: i128,
    calls: u64,
    violations: u64,
}

impl<O> AuditedOracle<O> {
    pub fn new(inner: O, reference: &ShiftedLattice) -> Result<Self> {
        let test = reference.basis.membership_test()?;
        let q = reference.shift.common_denominator().to_i128().ok_or(Error::Overflow)?;
        let shift = reference.shift.to_scaled(q)?;
        Ok(Self { inner, test, shift, shift_scale: q, calls: 0, violations: 0 })
    }

    pub fn centered(inner: O, reference: &Basis) -> Result<Self> {
        Self::new(inner, &ShiftedLattice::centered(reference.clone()))
    }

    pub fn calls(&self) -> u64 {
        self.calls
    }

    pub fn violations(&self) -> u64 {
        self.violations
    }

    fn audit_basis(&mut self, basis: &IntBasis) {
        self.calls += 1;
        if !self.test.contains_lattice(basis) {
            self.violations += 1;
        }
    }

    fn target_in_coset(&self, target: &[i128], scale: i128) -> bool {
        // target/scale - shift/shift_scale, over the common denominator
        let Some(den) = scale.checked_mul(self.shift_scale) else { return false };
        let mut v = Vec::with_capacity(target.len());
        for (a, b) in target.iter().zip(&self.shift) {
            let (Some(x), Some(y)) = (a.checked_mul(self.shift_scale), b.checked_mul(scale)) else {
                return false;
            };
            let Some(d) = x.checked_sub(y) else { return false };
            v.push(d);
        }
        self.test.contains_scaled(&v, den)
    }
}

impl<O: CvpOracle> CvpOracle for AuditedOracle<O> {
    fn closest(&mut self, basis: &IntBasis, target: &[i128]) -> Result<Vec<i128>> {
        self.audit_basis(basis);
        if !self.target_in_coset(target, basis.scale()) {
            self.violations += 1;
        }
        self.inner.closest(basis, target)
    }

    fn closest_within(&mut self, basis: &IntBasis, target: &[i128], bound: i128) -> Result<Option<Vec<i128>>> {
        self.audit_basis(basis);
        if !self.target_in_coset(target, basis.scale()) {
            self.violations += 1;
        }
        self.inner.closest_within(basis, target, bound)
    }
}

impl<O: SvpOracle> SvpOracle for AuditedOracle<O> {
    fn shortest(&mut self, basis: &IntBasis) -> Result<Vec<i128>> {
        self.audit_basis(basis);
        self.inner.shortest(basis)
    }

    fn shortest_within(&mut self, basis: &IntBasis, bound: i128) -> Result<Option<Vec<i128>>> {
        self.audit_basis(basis);
        self.inner.shortest_within(basis, bound)
    }
}

/// `(L - t) ∩ rB`, listed as elements of `L - t` in lexicographic order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BallEnumeration {
    pub center: RationalVector,
    pub radius_sq: Rational,
    pub points: Vec<RationalVector>,
}

/// Largest integer `k` with `k <= radius_sq * scale^2`.
pub(crate) fn scaled_bound(radius_sq: &Rational, scale: i128) -> Result<i128> {
    let s = BigInt::from(scale);
    let v = radius_sq * Rational::from_integer(&s * &s);
    v.floor().to_integer().to_i128().ok_or(Error::Overflow)
}

fn int_form_capped(lat: &ShiftedLattice) -> Result<IntShifted> {
    check_cap(lat.dim(), dim_cap())?;
    lat.int_form()
}

/// Calls `f` with each point of `L - t` (scaled) within the ball, in enumeration order.
pub(crate) fn for_each_in_int_ball<F>(lat: &IntShifted, radius_sq: &Rational, mut f: F) -> Result<()>
where
    F: FnMut(&[i128], &[i64]) -> Result<()>,
{
    check_cap(lat.dim(), dim_cap())?;
    if radius_sq < &Rational::zero() {
        return Err(invalid("radius must be nonnegative"));
    }
    let red = Reduced::new(&lat.basis)?;
    let bound = scaled_bound(radius_sq, lat.scale())?;
    let mut buf = vec![0i128; lat.dim()];
    enumerate::for_each_in_ball(&red, &lat.shift, bound, |v, x, _| {
        for (b, (a, t)) in buf.iter_mut().zip(v.iter().zip(&lat.shift)) {
            *b = a - t;
        }
        f(&buf, x)
    })
}

pub fn enumerate_ball(lat: &ShiftedLattice, radius_sq: &Rational) -> Result<BallEnumeration> {
    let int = int_form_capped(lat)?;
    let mut pts = Vec::new();
    for_each_in_int_ball(&int, radius_sq, |v, _| {
        pts.push(v.to_vec());
        Ok(())
    })?;
    pts.sort();
    let points = pts.iter().map(|p| RationalVector::from_scaled(p, int.scale())).collect();
    Ok(BallEnumeration { center: RationalVector::zeros(lat.dim()), radius_sq: radius_sq.clone(), points })
}

pub fn exact_count(lat: &ShiftedLattice, radius_sq: &Rational) -> Result<u64> {
    let int = int_form_capped(lat)?;
    exact_count_int(&int, radius_sq)
}

pub(crate) fn exact_count_int(lat: &IntShifted, radius_sq: &Rational) -> Result<u64> {
    let mut count = 0u64;
    for_each_in_int_ball(lat, radius_sq, |_, _| {
        count += 1;
        Ok(())
    })?;
    Ok(count)
}

/// Number of primitive `±` pairs of norm at most `r`.
pub fn exact_primitive_count(basis: &Basis, radius_sq: &Rational) -> Result<u64> {
    check_cap(basis.dim(), dim_cap())?;
    exact_primitive_count_int(basis.int_basis(), radius_sq)
}

pub(crate) fn exact_primitive_count_int(basis: &IntBasis, radius_sq: &Rational) -> Result<u64> {
    let mut count = 0u64;
    for_each_in_int_ball(&IntShifted::centered(basis.clone()), radius_sq, |_, x| {
        if gcd_coeffs(x) == 1 {
            count += 1;
        }
        Ok(())
    })?;
    Ok(count / 2)
}

/// A closest vector of `L` to the shift `t`.
pub fn solve_cvp(lat: &ShiftedLattice) -> Result<RationalVector> {
    let int = int_form_capped(lat)?;
    let v = ExactOracle::default().closest(&int.basis, &int.shift)?;
    Ok(RationalVector::from_scaled(&v, int.scale()))
}

/// `dist(t, L)^2`, exactly.
pub fn distance_sq(lat: &ShiftedLattice) -> Result<Rational> {
    let y = solve_cvp(lat)?;
    Ok(y.sub(&lat.shift)?.norm_sq())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SvpSolution {
    pub vector: RationalVector,
    pub lambda1_sq: Rational,
    /// `None` in dimension one.
    pub lambda2_sq: Option<Rational>,
}

pub fn solve_svp(basis: &Basis) -> Result<SvpSolution> {
    check_cap(basis.dim(), dim_cap())?;
    let ib = basis.int_basis();
    let red = Reduced::new(ib)?;
    let v = enumerate::shortest(&red)?;
    let q2 = Rational::from_integer(BigInt::from(ib.scale()) * BigInt::from(ib.scale()));
    let sq = |x: i128| Rational::from_integer(BigInt::from(x)) / &q2;
    let l1: i128 = v.iter().map(|a| a * a).sum();
    let l2 = enumerate::second_minimum(&red, &v)?;
    Ok(SvpSolution {
        vector: RationalVector::from_scaled(&v, ib.scale()),
        lambda1_sq: sq(l1),
        lambda2_sq: l2.map(sq),
    })
}

/// `e^{-r^2 n}`, valid when `r >= 10 sqrt(ln(10 + dist/(s sqrt n)))`.
pub fn gaussian_tail_bound(dist_t: f64, s: f64, n: usize, r: f64) -> Result<f64> {
    if !(s > 0.0) || n == 0 || dist_t < 0.0 {
        return Err(invalid("need s > 0, n >= 1, dist >= 0"));
    }
    let need = tail_radius_threshold(dist_t, s, n);
    if r < need * (1.0 - 1e-12) {
        return Err(Error::HypothesisViolated(format!("r = {r} is below {need}")));
    }
    Ok(exp(-r * r * n as f64))
}

/// Smallest `r` admitted by [`gaussian_tail_bound`].
pub fn tail_radius_threshold(dist_t: f64, s: f64, n: usize) -> f64 {
    10.0 * sqrt(ln(10.0 + dist_t / (s * sqrt(n as f64))))
}

/// The general tail bound `(sqrt(2 pi e r'^2) e^{-pi r^2})^n` with
/// `r'^2 = dist^2/(s^2 n) + r^2`, valid for `r >= 1/sqrt(2 pi)`.
pub fn shifted_tail_bound(dist_t: f64, s: f64, n: usize, r: f64) -> Result<f64> {
    if r < 1.0 / sqrt(2.0 * PI) {
        return Err(Error::HypothesisViolated(format!("r = {r} is below 1/sqrt(2 pi)")));
    }
    Ok(exp(ln_shifted_tail_bound(dist_t * dist_t, s * s, n, r)))
}

fn ln_shifted_tail_bound(dist_sq: f64, s_sq: f64, n: usize, r: f64) -> f64 {
    let nf = n as f64;
    let rp_sq = dist_sq / (s_sq * nf) + r * r;
    nf * (0.5 * ln(2.0 * PI * core::f64::consts::E * rp_sq) - PI * r * r)
}

/// A finite distribution with exact support and floating-point probabilities.
#[derive(Clone, Debug)]
pub struct ExactDistribution {
    /// Sorted lexicographically.
    pub support: Vec<RationalVector>,
    pub probabilities: Vec<f64>,
    pub truncation_mass_bound: f64,
    /// Points of the underlying set with squared norm at most this are all in `support`.
    pub truncation_radius_sq: Rational,
    cumulative: Vec<f64>,
}

impl ExactDistribution {
    /// Normalizes `weights` over `support`; the pairs need not be sorted.
    pub fn from_weights(
        mut pairs: Vec<(RationalVector, f64)>,
        truncation_mass_bound: f64,
        truncation_radius_sq: Rational,
    ) -> Result<Self> {
        if pairs.is_empty() {
            return Err(invalid("empty support"));
        }
        pairs.sort_by(|a, b| a.0.cmp(&b.0));
        let total = compensated_sum(pairs.iter().map(|p| p.1));
        if !(total > 0.0) || !total.is_finite() {
            return Err(invalid("weights must have a positive finite sum"));
        }
        let (support, weights): (Vec<_>, Vec<_>) = pairs.into_iter().unzip();
        let probabilities: Vec<f64> = weights.iter().map(|w| w / total).collect();
        let mut cumulative = Vec::with_capacity(probabilities.len());
        let mut acc = numeric::CompensatedSum::default();
        for p in &probabilities {
            acc.add(*p);
            cumulative.push(acc.value());
        }
        Ok(Self { support, probabilities, truncation_mass_bound, truncation_radius_sq, cumulative })
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    pub fn probability(&self, x: &RationalVector) -> f64 {
        self.support.binary_search(x).map(|i| self.probabilities[i]).unwrap_or(0.0)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> &RationalVector {
        let total = *self.cumulative.last().expect("nonempty");
        let u: f64 = rng.gen::<f64>() * total;
        let i = self.cumulative.partition_point(|&c| c <= u);
        &self.support[i.min(self.support.len() - 1)]
    }

    /// Whether `x` lies inside the truncation ball, where the table is complete.
    pub fn within_truncation(&self, x: &RationalVector) -> bool {
        x.norm_sq() <= self.truncation_radius_sq
    }
}

/// Squared radius `d² + k² s²/16` around the shift outside which `D_{L-t,s}` has
/// mass below `tail_eps`: `k` is the least integer for which `r = k/(4√n)` passes the
/// general tail bound.
pub fn dgs_truncation_radius_sq(d_sq: &Rational, s: &Rational, n: usize, tail_eps: f64) -> Result<Rational> {
    if !(tail_eps > 0.0 && tail_eps < 1.0) {
        return Err(invalid("tail_eps must lie in (0, 1)"));
    }
    let s_sq = s * s;
    let (d_sq_f, s_sq_f) = (rational_to_f64(d_sq), rational_to_f64(&s_sq));
    let target = ln(tail_eps);
    let r_min = 1.0 / sqrt(2.0 * PI);
    let mut k: u64 = 1;
    loop {
        let r = k as f64 / (4.0 * sqrt(n as f64));
        if r >= r_min && ln_shifted_tail_bound(d_sq_f, s_sq_f, n, r) < target {
            break;
        }
        k += 1;
        if k > 1_000_000 {
            return Err(Error::IterationCap { iterations: k });
        }
    }
    let k_sq = Rational::from_integer(BigInt::from(k * k));
    Ok(d_sq + &s_sq * k_sq / Rational::from_integer(BigInt::from(16)))
}

/// `D_{L-t,s}` restricted to a ball carrying all but `tail_eps` of its mass.
pub fn exact_dgs(lat: &ShiftedLattice, s: &Rational, tail_eps: f64) -> Result<ExactDistribution> {
    if s <= &Rational::zero() {
        return Err(invalid("s must be positive"));
    }
    if !(tail_eps > 0.0 && tail_eps < 1.0) {
        return Err(invalid("tail_eps must lie in (0, 1)"));
    }
    let n = lat.dim();
    let int = int_form_capped(lat)?;
    let y = ExactOracle::default().closest(&int.basis, &int.shift)?;
    let d_sq = RationalVector::from_scaled(&y, int.scale()).sub(&lat.shift)?.norm_sq();
    let s_sq = s * s;
    let radius_sq = dgs_truncation_radius_sq(&d_sq, s, n, tail_eps)?;
    let scale = int.scale();
    let mut pairs = Vec::new();
    for_each_in_int_ball(&int, &radius_sq, |v, _| {
        let x = RationalVector::from_scaled(v, scale);
        let excess = rational_to_f64(&((x.norm_sq() - &d_sq) / &s_sq));
        pairs.push((x, exp(-PI * excess)));
        Ok(())
    })?;
    ExactDistribution::from_weights(pairs, tail_eps, radius_sq)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{rat, rat_int};

    fn z(n: usize) -> ShiftedLattice {
        ShiftedLattice::centered(Basis::identity(n))
    }

    fn fig1() -> Basis {
        Basis::diagonal(&[rat_int(3), rat(1, 2)]).unwrap()
    }

    #[test]
    fn ball_examples() {
        assert_eq!(enumerate_ball(&z(2), &rat_int(1)).unwrap().points.len(), 5);
        assert_eq!(enumerate_ball(&z(2), &rat_int(2)).unwrap().points.len(), 9);
        let deep = ShiftedLattice::new(fig1(), RationalVector::from_pairs(&[(3, 2), (1, 4)])).unwrap();
        let e = enumerate_ball(&deep, &rat(37, 16)).unwrap();
        assert_eq!(e.points.len(), 4);
        assert!(e.points.iter().all(|p| p.norm_sq() == rat(37, 16)));
    }

    #[test]
    fn count_examples() {
        assert_eq!(exact_count(&z(2), &rat_int(1)).unwrap(), 5);
        assert_eq!(exact_count(&z(2), &rat(1, 4)).unwrap(), 1);
        assert_eq!(exact_count(&z(3), &rat_int(2)).unwrap(), 19);
        let i2 = Basis::identity(2);
        assert_eq!(exact_primitive_count(&i2, &rat_int(1)).unwrap(), 2);
        assert_eq!(exact_primitive_count(&i2, &rat_int(2)).unwrap(), 4);
        assert_eq!(exact_primitive_count(&i2, &rat_int(4)).unwrap(), 4);
    }

    #[test]
    fn cvp_examples() {
        let lat = ShiftedLattice::new(Basis::identity(2), RationalVector::from_pairs(&[(1, 5), (7, 10)])).unwrap();
        assert_eq!(solve_cvp(&lat).unwrap(), RationalVector::from_ints(&[0, 1]));
        let on = ShiftedLattice::new(Basis::identity(2), RationalVector::from_ints(&[5, -3])).unwrap();
        assert_eq!(solve_cvp(&on).unwrap(), RationalVector::from_ints(&[5, -3]));
        assert_eq!(distance_sq(&on).unwrap(), rat_int(0));
        let deep = ShiftedLattice::new(fig1(), RationalVector::from_pairs(&[(3, 2), (1, 4)])).unwrap();
        assert_eq!(solve_cvp(&deep).unwrap(), RationalVector::from_ints(&[0, 0]));
    }

    #[test]
    fn svp_examples() {
        let s = solve_svp(&Basis::identity(2)).unwrap();
        assert_eq!(s.vector, RationalVector::from_ints(&[-1, 0]));
        assert_eq!(s.lambda1_sq, rat_int(1));
        let s = solve_svp(&fig1()).unwrap();
        assert_eq!(s.vector, RationalVector::from_pairs(&[(0, 1), (-1, 2)]));
        assert_eq!(s.lambda1_sq, rat(1, 4));
        assert_eq!(s.lambda2_sq, Some(rat_int(9)));
        assert_eq!(solve_svp(&Basis::identity(1)).unwrap().lambda2_sq, None);
    }

    #[test]
    fn dimension_cap_enforced() {
        let r = ExactOracle::with_cap(2).shortest(Basis::identity(3).int_basis());
        assert_eq!(r.unwrap_err(), Error::DimensionCap { dim: 3, cap: 2 });
    }

    #[test]
    fn dgs_z_origin_mass() {
        // independent series: 1 / (1 + 2 sum e^{-pi k^2})
        let tail: f64 = (1..40).map(|k| (-PI * (k * k) as f64).exp()).sum();
        let p1 = 1.0 / (1.0 + 2.0 * tail);
        let d = exact_dgs(&z(1), &rat_int(1), 1e-15).unwrap();
        assert!((d.probability(&RationalVector::from_ints(&[0])) - p1).abs() < 1e-12);
        assert!((p1 - 0.92044).abs() < 1e-5);
        let d2 = exact_dgs(&z(2), &rat_int(1), 1e-15).unwrap();
        assert!((d2.probability(&RationalVector::from_ints(&[0, 0])) - p1 * p1).abs() < 1e-12);
        let total: f64 = d2.probabilities.iter().sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn tail_bound_examples() {
        let r = 10.0 * sqrt(ln(10.0));
        let b = gaussian_tail_bound(0.0, 1.0, 2, r).unwrap();
        assert!((ln(b) + 200.0 * ln(10.0)).abs() < 1e-9);
        assert!(gaussian_tail_bound(0.0, 1.0, 2, r + 1.0).unwrap() < b);
        assert!(matches!(gaussian_tail_bound(0.0, 1.0, 2, 1.0), Err(Error::HypothesisViolated(_))));
    }

    #[test]
    fn audit_flags_foreign_lattices() {
        let mut o = AuditedOracle::centered(ExactOracle::default(), &Basis::identity(2)).unwrap();
        let sub = IntBasis::new(1, vec![vec![1, 1], vec![0, 3]]).unwrap();
        o.closest(&sub, &[0, 0]).unwrap();
        assert_eq!(o.violations(), 0);
        let half = IntBasis::new(2, vec![vec![1, 0], vec![0, 2]]).unwrap();
        o.closest(&half, &[0, 0]).unwrap();
        assert_eq!(o.violations(), 1);
        // integer targets are in the reference coset
        o.closest(&sub, &[1, 0]).unwrap();
        assert_eq!(o.violations(), 1);
        let mut shifted = AuditedOracle::new(
            ExactOracle::default(),
            &ShiftedLattice::new(Basis::identity(2), RationalVector::from_pairs(&[(1, 2), (0, 1)])).unwrap(),
        )
        .unwrap();
        shifted.closest(&IntBasis::new(2, vec![vec![2, 0], vec![0, 2]]).unwrap(), &[0, 0]).unwrap();
        assert_eq!(shifted.violations(), 1);
        shifted.closest(&IntBasis::new(2, vec![vec![2, 0], vec![0, 2]]).unwrap(), &[3, 4]).unwrap();
        assert_eq!(shifted.violations(), 1);
    }
}

//! The reverse reductions: CVP from a DGS oracle at a tiny width, and approximate
//! SVP from a centered DGS oracle swept over a geometric grid of widths.

use alloc::vec::Vec;

use num_bigint::BigInt;
use rand::Rng;

use crate::error::{invalid, Error, Result};
use crate::lattice::{bit_length_bounds, Basis, Rational, RationalVector, ShiftedLattice};
use crate::numeric::{ceil, dyadic_below, exp, ln, powf, rational_to_f64, sqrt, CompensatedSum, PI};
use crate::oracles::{dgs_truncation_radius_sq, for_each_in_int_ball, CvpOracle, ExactOracle};

/// Samples `D_{L-t,s}` (up to the oracle's own error).
pub trait DgsOracle {
    fn sample_dgs<R: Rng + ?Sized>(&mut self, lat: &ShiftedLattice, s: &Rational, rng: &mut R) -> Result<RationalVector>;
}

/// Samples `D_{L,s}`.
pub trait CdgsOracle {
    fn sample_cdgs<R: Rng + ?Sized>(&mut self, basis: &Basis, s: &Rational, rng: &mut R) -> Result<RationalVector>;
}

impl<T: DgsOracle + ?Sized> DgsOracle for &mut T {
    fn sample_dgs<R: Rng + ?Sized>(&mut self, lat: &ShiftedLattice, s: &Rational, rng: &mut R) -> Result<RationalVector> {
        (**self).sample_dgs(lat, s, rng)
    }
}

impl<T: CdgsOracle + ?Sized> CdgsOracle for &mut T {
    fn sample_cdgs<R: Rng + ?Sized>(&mut self, basis: &Basis, s: &Rational, rng: &mut R) -> Result<RationalVector> {
        (**self).sample_cdgs(basis, s, rng)
    }
}

#[derive(Clone, Debug)]
struct Table {
    lat: ShiftedLattice,
    s: Rational,
    n: usize,
    scale: i128,
    /// Points of `L - t`, scaled, row after row.
    points: Vec<i128>,
    cumulative: Vec<f64>,
}

/// Ideal sampler backed by enumeration: tabulates `D_{L-t,s}` on a ball holding all
/// but `tail_eps` of its mass and caches recent tables.
#[derive(Clone, Debug)]
pub struct ExactDgsOracle {
    pub tail_eps: f64,
    /// Refuse tables with more points than this.
    pub max_support: usize,
    cache: Vec<Table>,
    calls: u64,
}

impl Default for ExactDgsOracle {
    fn default() -> Self {
        Self::new(1e-12)
    }
}

impl ExactDgsOracle {
    const CACHE: usize = 64;

    pub fn new(tail_eps: f64) -> Self {
        Self { tail_eps, max_support: 5_000_000, cache: Vec::new(), calls: 0 }
    }

    pub fn calls(&self) -> u64 {
        self.calls
    }

    fn table(&mut self, lat: &ShiftedLattice, s: &Rational) -> Result<&Table> {
        if let Some(i) = self.cache.iter().rposition(|t| &t.s == s && &t.lat == lat) {
            return Ok(&self.cache[i]);
        }
        let t = build_table(lat, s, self.tail_eps, self.max_support)?;
        if self.cache.len() == Self::CACHE {
            self.cache.remove(0);
        }
        self.cache.push(t);
        Ok(self.cache.last().expect("just pushed"))
    }
}

impl Table {
    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> RationalVector {
        let total = *self.cumulative.last().expect("ball contains the closest point");
        let u = rng.gen::<f64>() * total;
        let i = self.cumulative.partition_point(|&c| c <= u).min(self.cumulative.len() - 1);
        RationalVector::from_scaled(&self.points[i * self.n..(i + 1) * self.n], self.scale)
    }
}

fn build_table(lat: &ShiftedLattice, s: &Rational, tail_eps: f64, max_support: usize) -> Result<Table> {
    if s <= &Rational::from_integer(0.into()) {
        return Err(invalid("s must be positive"));
    }
    let n = lat.dim();
    let int = lat.int_form()?;
    let scale = int.scale();
    let y = ExactOracle::default().closest(&int.basis, &int.shift)?;
    let d_int: i128 = y.iter().zip(&int.shift).map(|(a, b)| (a - b) * (a - b)).sum();
    let q2 = BigInt::from(scale) * BigInt::from(scale);
    let d_sq = Rational::new(d_int.into(), q2.clone());
    let radius_sq = dgs_truncation_radius_sq(&d_sq, s, n, tail_eps)?;
    // exponent -π (‖x‖² - d²)/s², with the integer difference taken exactly
    let denom = rational_to_f64(&(s * s * Rational::from_integer(q2)));
    let mut points = Vec::new();
    let mut cumulative = Vec::new();
    let mut acc = CompensatedSum::new();
    for_each_in_int_ball(&int, &radius_sq, |v, _| {
        if cumulative.len() >= max_support {
            return Err(invalid("exact DGS table exceeds max_support"));
        }
        let nsq: i128 = v.iter().map(|a| a * a).sum();
        acc.add(exp(-PI * (nsq - d_int) as f64 / denom));
        cumulative.push(acc.value());
        points.extend_from_slice(v);
        Ok(())
    })?;
    Ok(Table { lat: lat.clone(), s: s.clone(), n, scale, points, cumulative })
}

impl DgsOracle for ExactDgsOracle {
    fn sample_dgs<R: Rng + ?Sized>(&mut self, lat: &ShiftedLattice, s: &Rational, rng: &mut R) -> Result<RationalVector> {
        self.calls += 1;
        Ok(self.table(lat, s)?.draw(rng))
    }
}

impl CdgsOracle for ExactDgsOracle {
    fn sample_cdgs<R: Rng + ?Sized>(&mut self, basis: &Basis, s: &Rational, rng: &mut R) -> Result<RationalVector> {
        let hit = self.cache.iter().rposition(|t| &t.s == s && &t.lat.basis == basis && t.lat.shift.is_zero());
        match hit {
            Some(i) => {
                self.calls += 1;
                Ok(self.cache[i].draw(rng))
            }
            None => self.sample_dgs(&ShiftedLattice::centered(basis.clone()), s, rng),
        }
    }
}

/// Dyadic rational just below `x`, with about 40 significant bits.
fn dyadic_approx(x: f64) -> Result<Rational> {
    if !(x > 0.0 && x.is_finite()) {
        return Err(invalid("value must be positive and finite"));
    }
    let bits = (ceil(-libm::log2(x)).max(0.0) as u32) + 40;
    if bits > 120 {
        return Err(Error::Overflow);
    }
    Ok(dyadic_below(x, bits))
}

/// `s = 1/(100 f n q ln(10 + d))` rounded down to a dyadic rational, where
/// `L, t ⊂ Z^n/q` and `d` bounds the covering radius.
pub fn cvp_parameter(lat: &ShiftedLattice, f: u64) -> Result<Rational> {
    if f < 2 {
        return Err(invalid("f must be at least 2"));
    }
    let q = rational_to_f64(&Rational::from_integer(lat.common_denominator()));
    let d = rational_to_f64(&bit_length_bounds(&lat.basis).mu_hi);
    let n = lat.dim() as f64;
    dyadic_approx(1.0 / (100.0 * f as f64 * n * q * ln(10.0 + d)))
}

/// One DGS call at the width of [`cvp_parameter`]; returns `y + t`, a lattice vector
/// that is a closest vector to `t` with probability at least `1/(2f²)`.
pub fn cvp_via_dgs<O, R>(lat: &ShiftedLattice, f: u64, oracle: &mut O, rng: &mut R) -> Result<RationalVector>
where
    O: DgsOracle + ?Sized,
    R: Rng + ?Sized,
{
    let s = cvp_parameter(lat, f)?;
    let y = oracle.sample_dgs(lat, &s, rng)?;
    y.add(&lat.shift)
}

/// Repeats [`cvp_via_dgs`] `⌈2f² ln(1/δ)⌉` times and keeps the nearest answer
/// (smallest in lexicographic order among ties).
pub fn amplified_cvp_via_dgs<O, R>(
    lat: &ShiftedLattice,
    f: u64,
    delta: f64,
    oracle: &mut O,
    rng: &mut R,
) -> Result<RationalVector>
where
    O: DgsOracle + ?Sized,
    R: Rng + ?Sized,
{
    if !(delta > 0.0 && delta < 1.0) {
        return Err(invalid("delta must lie in (0, 1)"));
    }
    let reps = ceil(2.0 * (f * f) as f64 * ln(1.0 / delta)).max(1.0) as u64;
    let mut best: Option<(Rational, RationalVector)> = None;
    for _ in 0..reps {
        let y = cvp_via_dgs(lat, f, oracle, rng)?;
        let d = y.sub(&lat.shift)?.norm_sq();
        let better = match &best {
            None => true,
            Some((bd, by)) => d < *bd || (d == *bd && y < *by),
        };
        if better {
            best = Some((d, y));
        }
    }
    Ok(best.expect("at least one repetition").1)
}

/// `10 √(n / ln f)`.
pub fn svp_gamma(n: usize, f: u64) -> f64 {
    10.0 * sqrt(n as f64 / ln(f as f64))
}

/// Widths `s_i = (1 + 1/n²)^i d_min/√(ln f)` queried by [`svp_via_cdgs`].
#[derive(Clone, Debug, PartialEq)]
pub struct SvpGrid {
    pub widths: Vec<Rational>,
    pub samples_per_width: u64,
}

/// The grid runs from `d_min/√(ln f)` until it first passes
/// `10 d_max/√(ln f)`, which is as far as the success argument ever looks, and never
/// beyond `100 n² ⌈ln(d_max/d_min)⌉` steps. `d_min`, `d_max` are the bit-length
/// bounds on `λ₁`.
pub fn svp_grid(basis: &Basis, f: u64) -> Result<SvpGrid> {
    if f < 10 {
        return Err(invalid("f must be at least 10"));
    }
    let n = basis.dim();
    let b = bit_length_bounds(basis);
    let (lo, hi) = (rational_to_f64(&b.lambda1_lo), rational_to_f64(&b.lambda1_hi));
    let ratio = 1.0 + 1.0 / (n * n) as f64;
    let lf = sqrt(ln(f as f64));
    let grid_last = 100 * (n * n) as u64 * ceil(ln(hi / lo)) as u64;
    let needed = ceil(ln(10.0 * hi / lo) / ln(ratio)) as u64 + 1;
    let last = needed.min(grid_last);
    let widths = (0..=last)
        .map(|i| dyadic_approx(powf(ratio, i as f64) * lo / lf))
        .collect::<Result<Vec<_>>>()?;
    Ok(SvpGrid { widths, samples_per_width: ceil(100.0 * n as f64 * (f * f) as f64) as u64 })
}

/// Shortest nonzero vector among `⌈100 n f²⌉` cDGS samples at every grid width.
/// With a `(f, 1/f)`-cDGS oracle the answer is within `10 √(n/ln f) · λ₁` with the
/// probability stated for the reduction; all-zero sample sets are reported.
pub fn svp_via_cdgs<O, R>(basis: &Basis, f: u64, oracle: &mut O, rng: &mut R) -> Result<RationalVector>
where
    O: CdgsOracle + ?Sized,
    R: Rng + ?Sized,
{
    let grid = svp_grid(basis, f)?;
    let mut best: Option<(Rational, RationalVector)> = None;
    for s in &grid.widths {
        for _ in 0..grid.samples_per_width {
            let x = oracle.sample_cdgs(basis, s, rng)?;
            if x.is_zero() {
                continue;
            }
            let d = x.norm_sq();
            let better = match &best {
                None => true,
                Some((bd, bx)) => d < *bd || (d == *bd && x < *bx),
            };
            if better {
                best = Some((d, x));
            }
        }
    }
    best.map(|b| b.1).ok_or(Error::AllSamplesZero)
}

/// Adapts a CVP oracle to answer the closest-vector question for a whole
/// [`ShiftedLattice`], for comparisons against [`cvp_via_dgs`].
pub fn exact_cvp<O: CvpOracle + ?Sized>(lat: &ShiftedLattice, oracle: &mut O) -> Result<RationalVector> {
    let int = lat.int_form()?;
    let y = oracle.closest(&int.basis, &int.shift)?;
    Ok(RationalVector::from_scaled(&y, int.scale()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gauss1d::rho_z_nonzero;
    use crate::lattice::{is_lattice_member, rat, rat_int};
    use crate::oracles::{distance_sq, exact_dgs, solve_svp};
    use crate::rng::seeded;

    /// `(f, 1 - 1/f)`-DGS: exact with probability `1/f`, otherwise a far point.
    struct Noisy {
        inner: ExactDgsOracle,
        f: u64,
    }

    impl DgsOracle for Noisy {
        fn sample_dgs<R: Rng + ?Sized>(&mut self, lat: &ShiftedLattice, s: &Rational, rng: &mut R) -> Result<RationalVector> {
            let y = self.inner.sample_dgs(lat, s, rng)?;
            if rng.gen_range(0..self.f) == 0 {
                Ok(y)
            } else {
                y.add(&lat.basis.columns()[0].scale_int(3))
            }
        }
    }

    fn z2_shift(a: (i64, i64), b: (i64, i64)) -> ShiftedLattice {
        ShiftedLattice::new(Basis::identity(2), RationalVector::from_pairs(&[a, b])).unwrap()
    }

    #[test]
    fn member_target_is_returned() {
        let mut rng = seeded(1);
        let mut o = ExactDgsOracle::default();
        let lat = z2_shift((2, 1), (-1, 1));
        for _ in 0..50 {
            assert_eq!(cvp_via_dgs(&lat, 5, &mut o, &mut rng).unwrap(), lat.shift);
        }
    }

    #[test]
    fn exact_backend_always_succeeds() {
        let mut rng = seeded(2);
        let mut o = ExactDgsOracle::default();
        let lat = z2_shift((1, 5), (7, 10));
        let d = distance_sq(&lat).unwrap();
        let ok = (0..500)
            .filter(|_| {
                let y = cvp_via_dgs(&lat, 3, &mut o, &mut rng).unwrap();
                y.sub(&lat.shift).unwrap().norm_sq() == d
            })
            .count();
        assert!(ok as f64 / 500.0 >= 1.0 / 18.0);
        assert_eq!(ok, 500);
    }

    #[test]
    fn parameter_is_tiny_and_dyadic() {
        let lat = z2_shift((1, 5), (7, 10));
        let s = cvp_parameter(&lat, 3).unwrap();
        assert!(rational_to_f64(&s) <= 1.0 / (100.0 * 3.0 * 2.0 * 10.0 * 12f64.ln()));
        let den = s.denom().clone();
        assert!((&den & (&den - BigInt::from(1))) == BigInt::from(0));
    }

    #[test]
    fn amplification_beats_noise() {
        let mut rng = seeded(3);
        let f = 3;
        let mut o = Noisy { inner: ExactDgsOracle::default(), f };
        let lat = z2_shift((1, 5), (7, 10));
        let d = distance_sq(&lat).unwrap();
        let single = (0..2000)
            .filter(|_| cvp_via_dgs(&lat, f, &mut o, &mut rng).unwrap().sub(&lat.shift).unwrap().norm_sq() == d)
            .count() as f64
            / 2000.0;
        assert!(single >= 1.0 / 18.0 - 3.0 * (1.0f64 / 18.0 * 17.0 / 18.0 / 2000.0).sqrt());
        let fails = (0..300)
            .filter(|_| {
                let y = amplified_cvp_via_dgs(&lat, f, 0.01, &mut o, &mut rng).unwrap();
                y.sub(&lat.shift).unwrap().norm_sq() != d
            })
            .count();
        assert!(fails as f64 / 300.0 <= 0.01 + 3.0 * (0.01f64 * 0.99 / 300.0).sqrt());
    }

    #[test]
    fn svp_on_z2_and_fig1() {
        let mut rng = seeded(4);
        let mut o = ExactDgsOracle::default();
        let z2 = Basis::identity(2);
        let gamma = svp_gamma(2, 10);
        let mut exact = 0;
        for _ in 0..5 {
            let x = svp_via_cdgs(&z2, 10, &mut o, &mut rng).unwrap();
            assert!(is_lattice_member(&z2, &x).unwrap() && !x.is_zero());
            assert!(x.norm_f64() <= gamma);
            if x.norm_sq() == rat_int(1) {
                exact += 1;
            }
        }
        assert_eq!(exact, 5);
        let fig = Basis::diagonal(&[rat_int(3), rat(1, 2)]).unwrap();
        let x = svp_via_cdgs(&fig, 10, &mut o, &mut rng).unwrap();
        assert!(x.norm_f64() <= gamma / 2.0);
        assert_eq!(x.norm_sq(), rat(1, 4));
    }

    #[test]
    fn grid_covers_the_useful_width() {
        let fig = Basis::diagonal(&[rat_int(3), rat(1, 2)]).unwrap();
        let g = svp_grid(&fig, 10).unwrap();
        let target = 10.0 * 0.5 / 10f64.ln().sqrt();
        let i = g.widths.iter().position(|s| rational_to_f64(s) > target).unwrap();
        assert!(i > 0);
        assert!(rational_to_f64(&g.widths[i - 1]) <= target);
        assert!(rational_to_f64(&g.widths[i]) / rational_to_f64(&g.widths[i - 1]) <= 1.25 + 1e-9);
        assert_eq!(g.samples_per_width, 20_000);
    }

    #[test]
    fn all_zero_is_reported() {
        struct Zero;
        impl CdgsOracle for Zero {
            fn sample_cdgs<R: Rng + ?Sized>(&mut self, b: &Basis, _: &Rational, _: &mut R) -> Result<RationalVector> {
                Ok(RationalVector::zeros(b.dim()))
            }
        }
        let mut rng = seeded(5);
        assert_eq!(svp_via_cdgs(&Basis::identity(2), 10, &mut Zero, &mut rng), Err(Error::AllSamplesZero));
    }

    #[test]
    fn table_matches_exact_dgs() {
        let lat = ShiftedLattice::new(
            Basis::diagonal(&[rat_int(3), rat(1, 2)]).unwrap(),
            RationalVector::from_pairs(&[(3, 2), (1, 4)]),
        )
        .unwrap();
        let s = rat_int(5);
        let t = build_table(&lat, &s, 1e-12, usize::MAX).unwrap();
        let d = exact_dgs(&lat, &s, 1e-12).unwrap();
        assert_eq!(t.cumulative.len(), d.len());
        let total = *t.cumulative.last().unwrap();
        let mut prev = 0.0;
        for (i, c) in t.cumulative.iter().enumerate() {
            let x = RationalVector::from_scaled(&t.points[i * 2..i * 2 + 2], t.scale);
            assert!(((c - prev) / total - d.probability(&x)).abs() < 1e-12);
            prev = *c;
        }
    }

    /// `L = L' ⊕ tZ` with `λ₁(L') > t`: short nonzero vectors are multiples of the
    /// appended one, and their mass stays below `ρ_{s/t}(Z\{0}) / ρ_s(L')`.
    #[test]
    fn appended_short_vector_is_rarely_sampled() {
        let mut rng = seeded(6);
        let t = 2i64;
        let inner: [&[i64]; 4] = [&[3, 1, 0, -1], &[0, 3, 1, 1], &[1, -1, 3, 0], &[-1, 0, 1, 3]];
        let lp = Basis::from_int_columns(&inner).unwrap();
        assert!(solve_svp(&lp).unwrap().lambda1_sq > rat_int(t * t));
        let mut cols: Vec<RationalVector> = lp
            .columns()
            .iter()
            .map(|c| RationalVector::new(c.coords().iter().cloned().chain([rat_int(0)]).collect()))
            .collect();
        cols.push(RationalVector::from_ints(&[0, 0, 0, 0, t]));
        let l = Basis::from_columns(cols).unwrap();
        let mut o = ExactDgsOracle::new(1e-9);
        for s in [1i64, 2, 3] {
            let sf = s as f64;
            let rho_lp: f64 = {
                let d = exact_dgs(&ShiftedLattice::centered(lp.clone()), &rat_int(s), 1e-12).unwrap();
                // 1/Pr[0] = ρ_s(L')
                1.0 / d.probability(&RationalVector::zeros(4))
            };
            let bound = rho_z_nonzero(sf / t as f64) / rho_lp;
            let n = 20_000;
            let hits = (0..n)
                .filter(|_| {
                    let x = o.sample_cdgs(&l, &rat_int(s), &mut rng).unwrap();
                    !x.is_zero() && x.norm_sq() <= rat_int(t * t)
                })
                .count() as f64
                / n as f64;
            assert!(hits <= bound + 3.0 * (bound * (1.0 - bound) / n as f64).sqrt() + 1e-9, "s = {s}");
        }
    }
}

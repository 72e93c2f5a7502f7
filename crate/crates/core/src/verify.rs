//! Empirical histograms of sampler output and their comparison with an exact
//! distribution in the sense of `(γ, ε)`-closeness: statistical distance at most `ε`
//! from a distribution whose point masses are within a factor `γ` of the ideal.
//!
//! Slacks follow a 3σ convention. The distance gets `3√(k/total)` for a support of
//! size `k`; a heavy point (at least 10 expected hits) with ideal mass `p` gets the
//! relative standard error `√((1 - p)/(p · total))`, scaled by `z`.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use rand::Rng;

use crate::error::{invalid, Error, Result};
use crate::lattice::RationalVector;
use crate::numeric::sqrt;
use crate::oracles::ExactDistribution;

/// Counts keyed by [`RationalVector::to_key`].
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct EmpiricalHistogram {
    counts: BTreeMap<String, u64>,
    total: u64,
}

impl EmpiricalHistogram {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: &RationalVector) {
        self.add_key(x.to_key(), 1);
    }

    pub fn add_key(&mut self, key: String, count: u64) {
        if count == 0 {
            return;
        }
        *self.counts.entry(key).or_insert(0) += count;
        self.total += count;
    }

    pub fn merge(&mut self, other: &EmpiricalHistogram) {
        for (k, c) in &other.counts {
            self.add_key(k.clone(), *c);
        }
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn count(&self, key: &str) -> u64 {
        self.counts.get(key).copied().unwrap_or(0)
    }

    pub fn frequency(&self, key: &str) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            self.count(key) as f64 / self.total as f64
        }
    }

    /// `(key, count)` in key order.
    pub fn iter(&self) -> impl Iterator<Item = (&str, u64)> {
        self.counts.iter().map(|(k, c)| (k.as_str(), *c))
    }
}

impl FromIterator<RationalVector> for EmpiricalHistogram {
    fn from_iter<I: IntoIterator<Item = RationalVector>>(iter: I) -> Self {
        let mut h = Self::new();
        for x in iter {
            h.add(&x);
        }
        h
    }
}

/// Histogram of `n_samples` draws.
pub fn collect<R, S>(mut sampler: S, n_samples: u64, rng: &mut R) -> Result<EmpiricalHistogram>
where
    R: Rng + ?Sized,
    S: FnMut(&mut R) -> Result<RationalVector>,
{
    if n_samples == 0 {
        return Err(invalid("n_samples must be at least 1"));
    }
    let mut h = EmpiricalHistogram::new();
    for _ in 0..n_samples {
        h.add(&sampler(rng)?);
    }
    Ok(h)
}

/// One row of the per-point table.
#[derive(Clone, Debug, PartialEq)]
pub struct PointRow {
    pub key: String,
    pub count: u64,
    pub ideal: f64,
    pub empirical: f64,
    /// `empirical / ideal` on heavy points.
    pub ratio: Option<f64>,
    /// `[lo, hi]` accepted for the ratio.
    pub ratio_window: Option<(f64, f64)>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClosenessReport {
    pub statistical_distance: f64,
    /// Largest `max(r, 1/r)` over heavy points.
    pub max_likelihood_ratio: f64,
    pub gamma_budget: f64,
    pub eps_budget: f64,
    pub se_slack: f64,
    /// Multiplier of the per-point standard errors.
    pub z: f64,
    pub total: u64,
    pub support_size: usize,
    pub heavy_points: usize,
    pub heavy_failures: usize,
    /// Empirical mass on points beyond the ideal's truncation radius.
    pub outside_truncation: f64,
    pub distance_ok: bool,
    pub pass: bool,
    pub rows: Vec<PointRow>,
}

/// Minimum expected count for a ratio test.
pub const HEAVY_EXPECTED: f64 = 10.0;

/// Minimum histogram size accepted by [`closeness_check`].
pub const MIN_TOTAL: u64 = 1000;

/// Compares `hist` with `ideal` at the 3σ convention.
pub fn closeness_check(
    hist: &EmpiricalHistogram,
    ideal: &ExactDistribution,
    gamma: f64,
    eps: f64,
) -> Result<ClosenessReport> {
    closeness_check_z(hist, ideal, gamma, eps, 3.0)
}

/// [`closeness_check`] with per-point slack `z` standard errors.
pub fn closeness_check_z(
    hist: &EmpiricalHistogram,
    ideal: &ExactDistribution,
    gamma: f64,
    eps: f64,
    z: f64,
) -> Result<ClosenessReport> {
    if hist.total < MIN_TOTAL {
        return Err(invalid("closeness checks need at least 1000 samples"));
    }
    if !(gamma >= 1.0) || !(eps >= 0.0) || !(z >= 0.0) {
        return Err(invalid("need gamma >= 1, eps >= 0, z >= 0"));
    }
    let total = hist.total as f64;
    let mut seen = BTreeMap::new();
    let mut rows = Vec::with_capacity(ideal.len());
    let mut abs_diff = crate::numeric::CompensatedSum::new();
    let (mut heavy, mut heavy_failures, mut max_ratio) = (0usize, 0usize, 1.0f64);
    for (x, &p) in ideal.support.iter().zip(&ideal.probabilities) {
        let key = x.to_key();
        let count = hist.count(&key);
        seen.insert(key.clone(), ());
        let empirical = count as f64 / total;
        abs_diff.add((empirical - p).abs());
        let (mut ratio, mut ratio_window) = (None, None);
        if p * total >= HEAVY_EXPECTED {
            heavy += 1;
            let se = sqrt((1.0 - p) / (p * total));
            let window = (((1.0 - z * se) / gamma).max(0.0), gamma * (1.0 + z * se));
            let r = empirical / p;
            if r < window.0 || r > window.1 {
                heavy_failures += 1;
            }
            max_ratio = max_ratio.max(if r > 0.0 { r.max(1.0 / r) } else { f64::INFINITY });
            ratio = Some(r);
            ratio_window = Some(window);
        }
        rows.push(PointRow { key, count, ideal: p, empirical, ratio, ratio_window });
    }
    let mut outside = 0.0;
    for (key, count) in hist.iter() {
        if seen.contains_key(key) {
            continue;
        }
        let x = RationalVector::parse_key(key)?;
        if ideal.within_truncation(&x) {
            return Err(Error::HypothesisViolated(alloc::format!("sample {key} is outside the support")));
        }
        let empirical = count as f64 / total;
        outside += empirical;
        abs_diff.add(empirical);
        rows.push(PointRow { key: key.into(), count, ideal: 0.0, empirical, ratio: None, ratio_window: None });
    }
    let statistical_distance = abs_diff.value() / 2.0;
    let se_slack = 3.0 * sqrt(ideal.len() as f64 / total);
    let distance_ok = statistical_distance <= eps + (1.0 - 1.0 / gamma) + se_slack;
    Ok(ClosenessReport {
        statistical_distance,
        max_likelihood_ratio: max_ratio,
        gamma_budget: gamma,
        eps_budget: eps,
        se_slack,
        z,
        total: hist.total,
        support_size: ideal.len(),
        heavy_points: heavy,
        heavy_failures,
        outside_truncation: outside,
        distance_ok,
        pass: distance_ok && heavy_failures == 0,
        rows,
    })
}

/// Pearson statistic `Σ (O - E)²/E` over cells with `E > 0`, and the number of
/// such cells.
pub fn chi_square_statistic(observed: &[u64], expected: &[f64]) -> Result<(f64, usize)> {
    if observed.len() != expected.len() {
        return Err(Error::DimensionMismatch { expected: expected.len(), found: observed.len() });
    }
    let mut stat = 0.0;
    let mut cells = 0;
    for (&o, &e) in observed.iter().zip(expected) {
        if e > 0.0 {
            let d = o as f64 - e;
            stat += d * d / e;
            cells += 1;
        } else if o > 0 {
            return Err(Error::HypothesisViolated("observation in a cell of zero probability".into()));
        }
    }
    Ok((stat, cells))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{rat_int, Basis, ShiftedLattice};
    use crate::oracles::exact_dgs;
    use crate::rng::seeded;

    fn two_points() -> ExactDistribution {
        ExactDistribution::from_weights(
            alloc::vec![(RationalVector::from_ints(&[1, 0]), 1.0), (RationalVector::from_ints(&[-1, 0]), 1.0)],
            0.0,
            rat_int(1),
        )
        .unwrap()
    }

    #[test]
    fn constant_sampler() {
        let x = RationalVector::from_pairs(&[(1, 2), (-3, 1)]);
        let h = collect(|_| Ok(x.clone()), 250, &mut seeded(0)).unwrap();
        assert_eq!(h.len(), 1);
        assert_eq!(h.count(&x.to_key()), 250);
        assert!(collect(|_| Ok(x.clone()), 0, &mut seeded(0)).is_err());
    }

    #[test]
    fn fair_coin() {
        let d = two_points();
        let h = collect(|r| Ok(d.sample(r).clone()), 10_000, &mut seeded(4)).unwrap();
        let c = h.count(&RationalVector::from_ints(&[1, 0]).to_key()) as f64;
        assert!((c - 5000.0).abs() <= 150.0);
        let rep = closeness_check(&h, &d, 1.01, 0.01).unwrap();
        assert!(rep.pass, "{rep:?}");
        assert_eq!(rep.heavy_points, 2);
    }

    #[test]
    fn self_test_on_exact_dgs() {
        let lat = ShiftedLattice::new(Basis::identity(2), RationalVector::from_pairs(&[(1, 3), (0, 1)])).unwrap();
        let d = exact_dgs(&lat, &rat_int(1), 1e-12).unwrap();
        let mut rng = seeded(12);
        let h = collect(|r| Ok(d.sample(r).clone()), 20_000, &mut rng).unwrap();
        let rep = closeness_check(&h, &d, 1.01, 0.01).unwrap();
        assert!(rep.pass, "{}", rep.statistical_distance);
        // identical seeds, identical reports
        let h2 = collect(|r| Ok(d.sample(r).clone()), 20_000, &mut seeded(12)).unwrap();
        assert_eq!(closeness_check(&h2, &d, 1.01, 0.01).unwrap(), rep);
    }

    #[test]
    fn swapped_mass_fails() {
        let d = ExactDistribution::from_weights(
            alloc::vec![
                (RationalVector::from_ints(&[0]), 0.5),
                (RationalVector::from_ints(&[1]), 0.3),
                (RationalVector::from_ints(&[-1]), 0.2),
            ],
            0.0,
            rat_int(1),
        )
        .unwrap();
        let mut h = EmpiricalHistogram::new();
        h.add_key(RationalVector::from_ints(&[0]).to_key(), 3000);
        h.add_key(RationalVector::from_ints(&[1]).to_key(), 5000);
        h.add_key(RationalVector::from_ints(&[-1]).to_key(), 2000);
        let rep = closeness_check(&h, &d, 1.0, 0.05).unwrap();
        assert!((rep.statistical_distance - 0.2).abs() < 1e-12);
        assert!(!rep.pass);
    }

    #[test]
    fn distortion_is_detected() {
        // five of twenty points get ratio γ² = 1.21; the rest absorb the difference
        let pts: Vec<_> = (0..20).map(|i| (RationalVector::from_ints(&[i]), 1.0)).collect();
        let d = ExactDistribution::from_weights(pts.clone(), 0.0, rat_int(400)).unwrap();
        let rest = (1.0 - 5.0 * 1.21 / 20.0) / 15.0 * 20.0;
        let skew: Vec<_> = pts.into_iter().map(|(x, _)| (x.clone(), if x.coords()[0] < rat_int(5) { 1.21 } else { rest })).collect();
        let skewed = ExactDistribution::from_weights(skew, 0.0, rat_int(400)).unwrap();
        let h = collect(|r| Ok(skewed.sample(r).clone()), 100_000, &mut seeded(5)).unwrap();
        assert!(!closeness_check(&h, &d, 1.1, 0.0).unwrap().pass);
    }

    #[test]
    fn out_of_support_is_hard_error() {
        let d = two_points();
        let mut h = EmpiricalHistogram::new();
        h.add_key(RationalVector::from_ints(&[1, 0]).to_key(), 999);
        h.add_key(RationalVector::from_pairs(&[(1, 2), (0, 1)]).to_key(), 1);
        assert!(matches!(closeness_check(&h, &d, 1.1, 0.1), Err(Error::HypothesisViolated(_))));
        // beyond the truncation radius it only costs distance
        let mut h = EmpiricalHistogram::new();
        h.add_key(RationalVector::from_ints(&[1, 0]).to_key(), 500);
        h.add_key(RationalVector::from_ints(&[-1, 0]).to_key(), 499);
        h.add_key(RationalVector::from_ints(&[5, 0]).to_key(), 1);
        let rep = closeness_check(&h, &d, 1.1, 0.1).unwrap();
        assert!((rep.outside_truncation - 1e-3).abs() < 1e-15);
        assert!(closeness_check(&EmpiricalHistogram::new(), &d, 1.1, 0.1).is_err());
    }

    #[test]
    fn chi_square() {
        let (s, k) = chi_square_statistic(&[10, 20, 30], &[20.0, 20.0, 20.0]).unwrap();
        assert_eq!((s, k), (10.0, 3));
        assert!(chi_square_statistic(&[1], &[0.0]).is_err());
    }
}

//! Run-wide bookkeeping for the structural invariant: every oracle call is on a
//! (shifted) sublattice of the input, and every emitted sample is a member.

use std::sync::atomic::{AtomicU64, Ordering};

use dgslab_core::lattice::{MembershipTest, RationalVector, ShiftedLattice};
use dgslab_core::oracles::AuditedOracle;
use dgslab_core::reductions::{CdgsOracle, DgsOracle};
use dgslab_core::{Basis, Rational, Result};
use num_traits::ToPrimitive;
use rand::Rng;
use serde::Serialize;

#[derive(Debug, Default)]
pub struct Audit {
    oracle_calls: AtomicU64,
    violations: AtomicU64,
    samples: AtomicU64,
    membership_failures: AtomicU64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct AuditSummary {
    pub oracle_calls: u64,
    pub violations: u64,
    pub samples: u64,
    pub membership_failures: u64,
}

impl AuditSummary {
    pub fn pass(&self) -> bool {
        self.violations == 0 && self.membership_failures == 0
    }
}

impl Audit {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn record_calls(&self, calls: u64, violations: u64) {
        self.oracle_calls.fetch_add(calls, Ordering::Relaxed);
        self.violations.fetch_add(violations, Ordering::Relaxed);
    }

    pub fn absorb<O>(&self, oracle: &AuditedOracle<O>) {
        self.record_calls(oracle.calls(), oracle.violations());
    }

    pub fn record_samples(&self, samples: u64, failures: u64) {
        self.samples.fetch_add(samples, Ordering::Relaxed);
        self.membership_failures.fetch_add(failures, Ordering::Relaxed);
    }

    pub fn summary(&self) -> AuditSummary {
        AuditSummary {
            oracle_calls: self.oracle_calls.load(Ordering::Relaxed),
            violations: self.violations.load(Ordering::Relaxed),
            samples: self.samples.load(Ordering::Relaxed),
            membership_failures: self.membership_failures.load(Ordering::Relaxed),
        }
    }
}

/// Exact membership in `L - t`.
#[derive(Clone, Debug)]
pub struct Membership {
    test: MembershipTest,
    shift: RationalVector,
}

impl Membership {
    pub fn new(lat: &ShiftedLattice) -> Result<Self> {
        Ok(Self { test: lat.basis.membership_test()?, shift: lat.shift.clone() })
    }

    pub fn contains(&self, x: &RationalVector) -> bool {
        let Ok(y) = x.add(&self.shift) else { return false };
        let Some(q) = y.common_denominator().to_i128() else { return false };
        match y.to_scaled(q) {
            Ok(v) => self.test.contains_scaled(&v, q),
            Err(_) => false,
        }
    }

    /// Whether every column of `basis` lies in `L`.
    pub fn contains_basis(&self, basis: &Basis) -> bool {
        self.test.contains_lattice(basis.int_basis())
    }
}

/// Checks that every table request from a reduction is on the input lattice.
pub struct AuditedSampler<O> {
    pub inner: O,
    reference: Membership,
    calls: u64,
    violations: u64,
    /// The last request checked and its verdict; reductions repeat the same lattice.
    last: Option<(Basis, RationalVector, bool)>,
}

impl<O> AuditedSampler<O> {
    pub fn new(inner: O, reference: &ShiftedLattice) -> Result<Self> {
        Ok(Self { inner, reference: Membership::new(reference)?, calls: 0, violations: 0, last: None })
    }

    pub fn calls(&self) -> u64 {
        self.calls
    }

    pub fn violations(&self) -> u64 {
        self.violations
    }

    pub fn flush(&mut self, audit: &Audit) {
        audit.record_calls(self.calls, self.violations);
        self.calls = 0;
        self.violations = 0;
    }

    fn check(&mut self, basis: &Basis, shift: &RationalVector) {
        self.calls += 1;
        let ok = match &self.last {
            Some((b, t, ok)) if b == basis && t == shift => *ok,
            _ => {
                let neg: RationalVector = shift.scale_int(-1);
                let ok = self.reference.contains_basis(basis) && self.reference.contains(&neg);
                self.last = Some((basis.clone(), shift.clone(), ok));
                ok
            }
        };
        if !ok {
            self.violations += 1;
        }
    }
}

impl<O: DgsOracle> DgsOracle for AuditedSampler<O> {
    fn sample_dgs<R: Rng + ?Sized>(&mut self, lat: &ShiftedLattice, s: &Rational, rng: &mut R) -> Result<RationalVector> {
        self.check(&lat.basis, &lat.shift);
        self.inner.sample_dgs(lat, s, rng)
    }
}

impl<O: CdgsOracle> CdgsOracle for AuditedSampler<O> {
    fn sample_cdgs<R: Rng + ?Sized>(&mut self, basis: &Basis, s: &Rational, rng: &mut R) -> Result<RationalVector> {
        self.check(basis, &RationalVector::zeros(basis.dim()));
        self.inner.sample_cdgs(basis, s, rng)
    }
}

/// Counts membership failures in `samples` and records them.
pub fn audit_samples<'a, I>(audit: &Audit, member: &Membership, samples: I) -> u64
where
    I: IntoIterator<Item = &'a RationalVector>,
{
    let (mut total, mut bad) = (0, 0);
    for x in samples {
        total += 1;
        if !member.contains(x) {
            bad += 1;
        }
    }
    audit.record_samples(total, bad);
    bad
}

#[cfg(test)]
mod tests {
    use super::*;
    use dgslab_core::lattice::rat;

    #[test]
    fn membership_respects_the_shift() {
        let b = Basis::diagonal(&[rat(3, 1), rat(1, 2)]).unwrap();
        let lat = ShiftedLattice::new(b, RationalVector::new(vec![rat(3, 2), rat(1, 4)])).unwrap();
        let m = Membership::new(&lat).unwrap();
        assert!(m.contains(&RationalVector::new(vec![rat(3, 2), rat(1, 4)])));
        assert!(m.contains(&RationalVector::new(vec![rat(-3, 2), rat(-1, 4)])));
        assert!(!m.contains(&RationalVector::new(vec![rat(0, 1), rat(1, 4)])));
        assert!(!m.contains(&RationalVector::new(vec![rat(3, 2), rat(1, 3)])));
    }
}

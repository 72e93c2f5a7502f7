//! Prepared samplers with audited oracles, and seeded batch drawing.

use dgslab_core::counting::{
    CountingParams, ExactBallCounter, ExactPrimitiveCounter, SparsificationCounter, SparsificationPrimitiveCounter,
};
use dgslab_core::lattice::{RationalVector, ShiftedLattice};
use dgslab_core::norms::{ChiQSampler, KCounter, Norm, NormOracle};
use dgslab_core::oracles::{AuditedOracle, ExactOracle};
use dgslab_core::samplers::{CdgsSampler, DgsSampler, Draw, GaussianParam};
use dgslab_core::Rational;

use crate::audit::{Audit, Membership};
use crate::error::CliResult;
use crate::parallel::{chunked, prepare_rng, CHUNK};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Mode {
    Dgs,
    Cdgs,
    /// `χ_q` at width `s`: density proportional to `exp(-‖x/s‖_q^q)`.
    Lq(f64),
}

#[derive(Clone, Debug, PartialEq)]
pub enum CountMethod {
    Exact,
    Sparsification(CountingParams),
}

#[derive(Clone, Debug)]
enum Prepared {
    Dgs(DgsSampler),
    Cdgs(CdgsSampler),
    Lq(ChiQSampler, Norm),
}

/// A sampler ready to draw, with the lattice its oracle calls must stay inside.
#[derive(Clone, Debug)]
pub struct SampleJob {
    prepared: Prepared,
    /// The input lattice in the sampler's working scale.
    reference: ShiftedLattice,
    s: Rational,
    member: Membership,
}

impl SampleJob {
    pub fn prepare(
        lat: &ShiftedLattice,
        mode: Mode,
        s: &Rational,
        f: u64,
        count: &CountMethod,
        seed: u64,
        audit: &Audit,
    ) -> CliResult<Self> {
        let param = GaussianParam::new(s.clone())?;
        let rng = &mut prepare_rng(seed);
        let member = match mode {
            Mode::Cdgs => Membership::new(&ShiftedLattice::centered(lat.basis.clone()))?,
            _ => Membership::new(lat)?,
        };
        let (prepared, reference) = match mode {
            Mode::Dgs => {
                let reference = lat.scaled_down(s)?;
                let mut oracle = AuditedOracle::new(ExactOracle::default(), &reference)?;
                let sampler = match count {
                    CountMethod::Exact => DgsSampler::prepare(lat, &param, f, &mut ExactBallCounter, &mut oracle, rng),
                    CountMethod::Sparsification(params) => {
                        let mut c = SparsificationCounter { f: f as f64, params: params.clone() };
                        DgsSampler::prepare(lat, &param, f, &mut c, &mut oracle, rng)
                    }
                };
                audit.absorb(&oracle);
                (Prepared::Dgs(sampler?), reference)
            }
            Mode::Cdgs => {
                let reference = ShiftedLattice::centered(lat.basis.scaled(&s.recip())?);
                let mut oracle = AuditedOracle::new(ExactOracle::default(), &reference)?;
                let sampler = match count {
                    CountMethod::Exact => {
                        let mut c = ExactPrimitiveCounter { f: f as f64 };
                        CdgsSampler::prepare(&lat.basis, &param, f, &mut c, &mut oracle, rng)
                    }
                    CountMethod::Sparsification(params) => {
                        let mut c = SparsificationPrimitiveCounter { f: f as f64, params: params.clone() };
                        CdgsSampler::prepare(&lat.basis, &param, f, &mut c, &mut oracle, rng)
                    }
                };
                audit.absorb(&oracle);
                (Prepared::Cdgs(sampler?), reference)
            }
            Mode::Lq(q) => {
                let norm = Norm::lq(q)?;
                let reference = lat.scaled_down(s)?;
                let mut oracle = AuditedOracle::new(NormOracle::new(norm), &reference)?;
                let counter = match count {
                    CountMethod::Exact => KCounter::Exact,
                    CountMethod::Sparsification(p) => KCounter::Sparsification(p.clone()),
                };
                let sampler = ChiQSampler::prepare(&reference, q, f, &counter, &mut oracle, rng);
                audit.absorb(&oracle);
                (Prepared::Lq(sampler?, norm), reference)
            }
        };
        Ok(Self { prepared, reference, s: s.clone(), member })
    }

    /// The centered sampler's probability of returning zero, if this is one.
    pub fn zero_probability(&self) -> Option<f64> {
        match &self.prepared {
            Prepared::Cdgs(c) => Some(c.zero_probability()),
            _ => None,
        }
    }

    pub fn member(&self) -> &Membership {
        &self.member
    }

    fn draw_chunk(&self, len: u64, rng: &mut dgslab_core::rng::DgsRng, audit: &Audit) -> CliResult<Vec<Draw>> {
        let mut out = Vec::with_capacity(len as usize);
        match &self.prepared {
            Prepared::Dgs(d) => {
                let mut o = AuditedOracle::new(ExactOracle::default(), &self.reference)?;
                let res = (0..len).try_for_each(|_| {
                    out.push(d.sample_detailed(&mut o, rng)?);
                    Ok::<_, dgslab_core::Error>(())
                });
                audit.absorb(&o);
                res?;
            }
            Prepared::Cdgs(c) => {
                let mut o = AuditedOracle::new(ExactOracle::default(), &self.reference)?;
                let res = (0..len).try_for_each(|_| {
                    out.push(c.sample_detailed(&mut o, rng)?);
                    Ok::<_, dgslab_core::Error>(())
                });
                audit.absorb(&o);
                res?;
            }
            Prepared::Lq(x, norm) => {
                let mut o = AuditedOracle::new(NormOracle::new(*norm), &self.reference)?;
                let res = (0..len).try_for_each(|_| {
                    let mut d = x.sample_detailed(&mut o, rng)?;
                    d.vector = d.vector.scale(&self.s);
                    out.push(d);
                    Ok::<_, dgslab_core::Error>(())
                });
                audit.absorb(&o);
                res?;
            }
        }
        let bad = out.iter().filter(|d| !self.member.contains(&d.vector)).count() as u64;
        audit.record_samples(out.len() as u64, bad);
        Ok(out)
    }

    /// `n` draws in chunks of [`CHUNK`]; chunk `i` uses stream `i` of `seed`.
    pub fn draw(&self, n: u64, seed: u64, audit: &Audit) -> CliResult<Vec<Draw>> {
        let chunks = chunked(n, CHUNK, seed, |_, len, rng| self.draw_chunk(len, rng, audit))?;
        Ok(chunks.into_iter().flatten().collect())
    }

    pub fn draw_vectors(&self, n: u64, seed: u64, audit: &Audit) -> CliResult<Vec<RationalVector>> {
        Ok(self.draw(n, seed, audit)?.into_iter().map(|d| d.vector).collect())
    }
}

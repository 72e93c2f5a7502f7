//! The verification suites. Each criterion runs with a fixed seed, compares against
//! exact ground truth, and reports every check it made.

use std::time::Instant;

use dgslab_core::counting::{gap_vcp_decide, CountingParams, GapInstance};
use dgslab_core::gauss1d::sample_z_nonzero_counted;
use dgslab_core::lattice::{parse_rational, rat, Basis, RationalVector, ShiftedLattice};
use dgslab_core::norms::{cvp_k, exact_chi_q, Norm};
use dgslab_core::numeric::rational_to_f64;
use dgslab_core::oracles::{
    distance_sq, enumerate_ball, exact_count, exact_dgs, exact_primitive_count, gaussian_tail_bound,
    shifted_tail_bound, solve_cvp, solve_svp, tail_radius_threshold, AuditedOracle, ExactDistribution, ExactOracle,
    SvpOracle,
};
use dgslab_core::reductions::{cvp_via_dgs, svp_gamma, svp_via_cdgs, ExactDgsOracle};
use dgslab_core::rng::{self, DgsRng};
use dgslab_core::sparsify::{inner_mod, sample_unshifted_sparsifier};
use dgslab_core::verify::{chi_square_statistic, closeness_check, EmpiricalHistogram};
use dgslab_core::Rational;
use rand::{Rng, RngCore};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::audit::{Audit, AuditedSampler, Membership};
use crate::corpus;
use crate::error::{CliError, CliResult};
use crate::lattice_file::NamedLattice;
use crate::parallel::chunked;
use crate::report::{Check, CriterionReport, SuiteReport};
use crate::sampling::{CountMethod, Mode, SampleJob};

/// `γ = 1 + 1/f` and `ε = 2^{-f}` at `f = 10`.
pub const SAMPLER_F: u64 = 10;
pub const GAMMA: f64 = 1.1;
pub const EPS: f64 = 1.0 / 1024.0;
/// Plain empirical statistical distance allowed for sampler fidelity.
pub const MAX_DISTANCE: f64 = 0.10;
/// Mass left out of the exact reference tables.
pub const TABLE_TAIL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    Sparsifier,
    Counting,
    Dgs,
    Cdgs,
    Reductions,
    Lq,
    All,
}

impl Suite {
    pub fn parse(name: &str) -> CliResult<Self> {
        Ok(match name {
            "sparsifier" => Suite::Sparsifier,
            "counting" => Suite::Counting,
            "dgs" => Suite::Dgs,
            "cdgs" => Suite::Cdgs,
            "reductions" => Suite::Reductions,
            "lq" => Suite::Lq,
            "all" => Suite::All,
            _ => return Err(CliError::Config(format!("unknown suite {name}"))),
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Suite::Sparsifier => "sparsifier",
            Suite::Counting => "counting",
            Suite::Dgs => "dgs",
            Suite::Cdgs => "cdgs",
            Suite::Reductions => "reductions",
            Suite::Lq => "lq",
            Suite::All => "all",
        }
    }

    /// Criteria run by the suite; the structural audit (11) closes every suite.
    pub fn criteria(self) -> &'static [u8] {
        match self {
            Suite::Sparsifier => &[1, 2],
            Suite::Counting => &[3],
            Suite::Dgs => &[4, 9],
            Suite::Cdgs => &[5, 6],
            Suite::Reductions => &[7, 8],
            Suite::Lq => &[10],
            Suite::All => &[1, 2, 3, 4, 5, 6, 7, 8, 9, 10],
        }
    }
}

#[derive(Clone, Debug)]
pub struct SuiteConfig {
    pub seed: u64,
    /// Draws per distribution check; the other budgets scale with it.
    pub samples: u64,
    /// Distort the exact reference tables, to confirm that the checks can fail.
    pub tamper: bool,
}

impl SuiteConfig {
    pub fn new(seed: u64, samples: u64) -> Self {
        Self { seed, samples, tamper: false }
    }

    fn sparsifier_trials(&self) -> u64 {
        self.samples
    }

    fn gap_instances(&self) -> u64 {
        (self.samples / 500).max(20)
    }

    fn draws_1d(&self) -> u64 {
        10 * self.samples
    }

    fn cvp_trials(&self) -> u64 {
        (self.samples / 50).max(100)
    }

    fn svp_runs(&self) -> u64 {
        (self.samples / 500).max(10)
    }

    fn seed_for(&self, id: u8) -> u64 {
        rng::stream(self.seed, 1_000 + id as u64).next_u64()
    }
}

pub const TITLES: [&str; 11] = [
    "sparsification bounds, exhaustive",
    "SVP sparsifier bounds, Monte Carlo",
    "GapVCP correctness",
    "DGS sampler fidelity",
    "cDGS sampler fidelity",
    "one-dimensional sampler",
    "CVP from DGS",
    "SVP from cDGS",
    "Gaussian tail bound",
    "chi_q sampler and CVP_K",
    "structural invariant",
];

/// Runs `suite`, calling `progress` after each criterion.
pub fn run_suite<F>(suite: Suite, cfg: &SuiteConfig, mut progress: F) -> CliResult<SuiteReport>
where
    F: FnMut(&CriterionReport),
{
    let audit = Audit::new();
    let mut criteria = Vec::new();
    for &id in suite.criteria() {
        let r = run_criterion(id, cfg, &audit)?;
        progress(&r);
        criteria.push(r);
    }
    let summary = audit.summary();
    let mut c11 = CriterionReport::new(11, TITLES[10]);
    c11.check(Check::at_most("oracle calls off the input lattice", summary.violations as f64, 0.0));
    c11.check(Check::at_most("samples failing membership", summary.membership_failures as f64, 0.0));
    c11.check(Check::at_least("oracle calls audited", summary.oracle_calls as f64, 1.0));
    progress(&c11);
    criteria.push(c11);
    Ok(SuiteReport {
        suite: suite.name().into(),
        seed: cfg.seed,
        samples: cfg.samples,
        pass: criteria.iter().all(|c| c.pass),
        criteria,
        audit: summary,
    })
}

pub fn run_criterion(id: u8, cfg: &SuiteConfig, audit: &Audit) -> CliResult<CriterionReport> {
    let start = Instant::now();
    let mut r = CriterionReport::new(id, TITLES[id as usize - 1]);
    match id {
        1 => sparsification_exhaustive(&mut r)?,
        2 => svp_sparsifier(cfg, audit, &mut r)?,
        3 => gap_vcp(cfg, audit, &mut r)?,
        4 => dgs_fidelity(cfg, audit, &mut r)?,
        5 => cdgs_fidelity(cfg, audit, &mut r)?,
        6 => one_dimensional(cfg, &mut r)?,
        7 => cvp_from_dgs(cfg, audit, &mut r)?,
        8 => svp_from_cdgs(cfg, audit, &mut r)?,
        9 => tail_bound(cfg, audit, &mut r)?,
        10 => chi_q(cfg, audit, &mut r)?,
        _ => return Err(CliError::Config(format!("no criterion {id}"))),
    }
    r.seconds = start.elapsed().as_secs_f64();
    Ok(r)
}

/// `√x` for exact squares, otherwise rounded to six decimals.
fn sqrt_rational(x: &Rational) -> Rational {
    let s = rational_to_f64(x).sqrt();
    let k = (s * 1e6).round() as i64;
    rat(k, 1_000_000)
}

/// `factor · λ₁(L)`.
fn width(basis: &Basis, factor: &str) -> CliResult<Rational> {
    let l1 = sqrt_rational(&solve_svp(basis)?.lambda1_sq);
    Ok(parse_rational(factor)? * l1)
}

const WIDTH_FACTORS: [&str; 3] = ["1/2", "1", "5"];

/// Three binomial standard errors of a proportion `q` over `n` trials.
fn three_se(q: f64, n: u64) -> f64 {
    3.0 * (q * (1.0 - q) / n as f64).sqrt()
}

/// Moves extra mass onto the heaviest point.
fn tamper(d: ExactDistribution) -> CliResult<ExactDistribution> {
    let heavy = d
        .probabilities
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .unwrap_or(0);
    let pairs = d
        .support
        .iter()
        .cloned()
        .zip(d.probabilities.iter().enumerate().map(|(i, p)| if i == heavy { 1.5 * p } else { *p }))
        .collect();
    Ok(ExactDistribution::from_weights(pairs, d.truncation_mass_bound, d.truncation_radius_sq.clone())?)
}

fn reference(d: ExactDistribution, cfg: &SuiteConfig) -> CliResult<ExactDistribution> {
    if cfg.tamper {
        tamper(d)
    } else {
        Ok(d)
    }
}

fn histogram(samples: &[RationalVector]) -> EmpiricalHistogram {
    samples.iter().cloned().collect()
}

// ---------------------------------------------------------------- criterion 1

/// Integer coordinate vectors `x, y_1..y_N` with `x - y_i` nonzero mod 3, 5 and 7.
fn vector_set(n: usize, size: usize, rng: &mut DgsRng) -> (Vec<i128>, Vec<Vec<i128>>) {
    let draw = |rng: &mut DgsRng| (0..n).map(|_| rng.gen_range(-3i128..=3)).collect::<Vec<_>>();
    let x = draw(rng);
    let mut ys = Vec::new();
    while ys.len() < size {
        let y = draw(rng);
        if [3i128, 5, 7].iter().all(|&p| x.iter().zip(&y).any(|(a, b)| (a - b) % p != 0)) {
            ys.push(y);
        }
    }
    (x, ys)
}

/// `#{(z, c) : ⟨z, x + c⟩ ≡ 0 and ⟨z, y_i + c⟩ ≢ 0 for all i}` over `Z_p^{2n}`.
fn exhaustive_count(p: u64, x: &[i128], ys: &[Vec<i128>]) -> u64 {
    let n = x.len();
    let total = p.pow(n as u32);
    let unpack = |mut k: u64| {
        (0..n)
            .map(|_| {
                let d = k % p;
                k /= p;
                d
            })
            .collect::<Vec<u64>>()
    };
    let mut hits = 0;
    for zi in 0..total {
        let z = unpack(zi);
        let zx = inner_mod(&z, x, p);
        let zy: Vec<u64> = ys.iter().map(|y| inner_mod(&z, y, p)).collect();
        for ci in 0..total {
            let c: Vec<i128> = unpack(ci).into_iter().map(|v| v as i128).collect();
            let zc = inner_mod(&z, &c, p);
            if (zx + zc).is_multiple_of(p) && zy.iter().all(|&v| !(v + zc).is_multiple_of(p)) {
                hits += 1;
            }
        }
    }
    hits
}

fn sparsification_exhaustive(r: &mut CriterionReport) -> CliResult<()> {
    // instances are fixed, independent of the run seed
    let mut rng = rng::seeded(0x5eed_0001);
    for n in [2usize, 3] {
        for j in 0..5 {
            let (x, ys) = vector_set(n, 1 + 2 * j, &mut rng);
            for p in [3u64, 5, 7] {
                let hits = exhaustive_count(p, &x, &ys);
                let big_n = ys.len() as i64;
                let pi = p as i64;
                let prob = rat(hits as i64, pi.pow(2 * n as u32));
                let lo = rat(1, pi) - rat(big_n, pi * pi) - rat(big_n, pi.pow(n as u32 - 1));
                let hi = rat(1, pi) + rat(1, pi.pow(n as u32));
                r.check(Check {
                    label: format!("n={n} instance {j} N={big_n} p={p}"),
                    observed: rational_to_f64(&prob),
                    lo: Some(rational_to_f64(&lo)),
                    hi: Some(rational_to_f64(&hi)),
                    pass: lo <= prob && prob <= hi,
                });
            }
        }
    }
    Ok(())
}

// ---------------------------------------------------------------- criterion 2

fn svp_sparsifier(cfg: &SuiteConfig, audit: &Audit, r: &mut CriterionReport) -> CliResult<()> {
    const P: u64 = 101;
    let z2 = corpus::get("z2")?;
    let fig1 = corpus::get("fig1")?;
    let cases = [
        (&z2, RationalVector::from_ints(&[1, 0])),
        (&fig1, RationalVector::new(vec![rat(0, 1), rat(1, 2)])),
        (&fig1, RationalVector::from_ints(&[3, 0])),
    ];
    let trials = cfg.sparsifier_trials();
    for (k, (lat, x)) in cases.iter().enumerate() {
        let basis = lat.basis();
        let norm_sq = x.norm_sq();
        let big_n = exact_primitive_count(basis, &norm_sq)? - 1;
        let l1 = solve_svp(basis)?.lambda1_sq;
        let p = P as f64;
        let label = format!("{} x=({})", lat.name, x.to_key());
        r.check(Check::at_most(format!("{label} hypothesis N <= p/(20 ln p)"), big_n as f64, p / (20.0 * p.ln())));
        r.check(Check::holds(
            format!("{label} hypothesis lambda1 > |x|/p"),
            l1 * Rational::from_integer((P * P).into()) > norm_sq,
        ));
        let seed = rng::stream(cfg.seed_for(2), k as u64).next_u64();
        let hits: u64 = chunked(trials, 10_000, seed, |_, len, rng| -> CliResult<u64> {
            let mut oracle = AuditedOracle::centered(ExactOracle::default(), basis)?;
            let ib = basis.int_basis();
            let target = x.to_scaled(ib.scale())?;
            let mut hits = 0;
            for _ in 0..len {
                let pair = sample_unshifted_sparsifier(ib, P, rng)?;
                let y = oracle.shortest(&pair.sublattice)?;
                if y == target || y.iter().zip(&target).all(|(a, b)| *a == -*b) {
                    hits += 1;
                }
            }
            audit.absorb(&oracle);
            Ok(hits)
        })?
        .into_iter()
        .sum();
        let q = 1.0 / p;
        let slack = three_se(q, trials);
        let lo = q - big_n as f64 / (p * p);
        r.check(Check::within(format!("{label} Pr[SVP(L') = ±x]"), hits as f64 / trials as f64, lo - slack, q + slack));
    }
    Ok(())
}

// ---------------------------------------------------------------- criterion 3

/// Gap `γ = 2`, so the fast constants stay within minutes.
const GAP_F: f64 = 1.0;
const VOTES: usize = 15;

struct Promise {
    inst: GapInstance,
    yes: bool,
}

fn promise_instances(count: u64, rng: &mut DgsRng) -> CliResult<Vec<Promise>> {
    let pool: Vec<NamedLattice> = corpus::all()?;
    let gamma = 1.0 + 1.0 / GAP_F;
    let mut out = Vec::new();
    while (out.len() as u64) < count {
        let lat = &pool[out.len() % pool.len()];
        let n = lat.dim();
        let shift = RationalVector::new((0..n).map(|_| rat(rng.gen_range(-6..=6), 12)).collect());
        let l = ShiftedLattice::new(lat.basis().clone(), shift)?;
        let radius_sq = rat(rng.gen_range(1..=64), 8);
        let c = exact_count(&l, &radius_sq)?;
        if c > 60 {
            continue;
        }
        let want_yes = out.len() % 2 == 0;
        let big_n = if want_yes {
            // c > γN
            let top = ((c as f64 - 1.0) / gamma).floor() as u64;
            if top < 1 {
                continue;
            }
            rng.gen_range(1..=top)
        } else {
            if c < 1 {
                continue;
            }
            rng.gen_range(c..=2 * c)
        };
        out.push(Promise { inst: GapInstance::new(l, radius_sq, big_n, GAP_F)?, yes: want_yes });
    }
    Ok(out)
}

fn gap_vcp(cfg: &SuiteConfig, audit: &Audit, r: &mut CriterionReport) -> CliResult<()> {
    let mut rng = rng::seeded(cfg.seed_for(3));
    let instances = promise_instances(cfg.gap_instances(), &mut rng)?;
    let params = CountingParams::fast();
    let seed = rng.next_u64();
    let outcomes = chunked(instances.len() as u64, 1, seed, |i, _, rng| -> CliResult<Vec<bool>> {
        let p = &instances[i as usize];
        let mut oracle = AuditedOracle::new(ExactOracle::default(), &p.inst.lat)?;
        let votes = (0..VOTES)
            .map(|_| Ok(gap_vcp_decide(&p.inst, &params, &mut oracle, rng)?.yes == p.yes))
            .collect::<CliResult<Vec<_>>>();
        audit.absorb(&oracle);
        votes
    })?;
    let runs = (outcomes.len() * VOTES) as f64;
    let single_errors = outcomes.iter().flatten().filter(|ok| !**ok).count() as f64;
    let majority_errors = outcomes.iter().filter(|v| 2 * v.iter().filter(|ok| **ok).count() < VOTES).count() as f64;
    r.check(Check::at_most("single-run error rate", single_errors / runs, (-1.0f64).exp() + 0.05));
    r.check(Check::at_most(
        format!("majority-of-{VOTES} error rate over {} instances", outcomes.len()),
        majority_errors / outcomes.len() as f64,
        0.01,
    ));
    Ok(())
}

// ---------------------------------------------------------------- criteria 4, 5

fn closeness_case(
    cfg: &SuiteConfig,
    audit: &Audit,
    r: &mut CriterionReport,
    lat: &ShiftedLattice,
    mode: Mode,
    s: &Rational,
    label: &str,
    seed: u64,
) -> CliResult<Vec<RationalVector>> {
    let job = SampleJob::prepare(lat, mode, s, SAMPLER_F, &CountMethod::Exact, seed, audit)?;
    let samples = job.draw_vectors(cfg.samples, seed, audit)?;
    let ideal = match mode {
        Mode::Lq(q) => {
            // the table lives on (L - t)/s; samples come back multiplied by s
            let d = exact_chi_q(&lat.scaled_down(s)?, q, TABLE_TAIL)?;
            let pairs = d.support.iter().map(|x| x.scale(s)).zip(d.probabilities.iter().copied()).collect();
            ExactDistribution::from_weights(pairs, d.truncation_mass_bound, &d.truncation_radius_sq * s * s)?
        }
        _ => exact_dgs(lat, s, TABLE_TAIL)?,
    };
    let report = closeness_check(&histogram(&samples), &reference(ideal, cfg)?, GAMMA, EPS)?;
    r.closeness(label, &report);
    r.check(Check::at_most(format!("{label} statistical distance"), report.statistical_distance, MAX_DISTANCE));
    if let Some(z) = job.zero_probability() {
        let rho = rho_lattice(&lat.basis, s)?;
        let zeros = samples.iter().filter(|x| x.is_zero()).count() as f64 / samples.len() as f64;
        let q = 1.0 / rho;
        let slack = three_se(q, samples.len() as u64);
        r.check(Check::within(format!("{label} Pr[0] vs 1/rho_s(L)"), zeros, q - slack, q + slack));
        // radial rounding leaves the sampler's own zero weight only γ-close in general
        r.check(Check::within(format!("{label} sampler zero mass vs 1/rho_s(L)"), z, q / GAMMA, q * GAMMA));
    }
    Ok(samples)
}

/// `ρ_s(L)` summed over a ball that leaves out less than `1e-15` of it.
fn rho_lattice(basis: &Basis, s: &Rational) -> CliResult<f64> {
    let lat = ShiftedLattice::centered(basis.clone());
    let n = basis.dim();
    let s2 = rational_to_f64(&(s * s));
    // r = 3 in the tail bound leaves (√(2πe)·3·e^{-9π})^n of the mass
    let radius_sq = s * s * rat(9 * n as i64, 1);
    let ball = enumerate_ball(&lat, &radius_sq)?;
    Ok(ball.points.iter().map(|x| (-std::f64::consts::PI * rational_to_f64(&x.norm_sq()) / s2).exp()).sum())
}

fn dgs_fidelity(cfg: &SuiteConfig, audit: &Audit, r: &mut CriterionReport) -> CliResult<()> {
    let seed = cfg.seed_for(4);
    for (k, name) in ["z2", "fig1", "random3"].into_iter().enumerate() {
        let lat = corpus::get(name)?;
        for (j, factor) in WIDTH_FACTORS.iter().enumerate() {
            let s = width(lat.basis(), factor)?;
            let label = format!("{name} s={}", s);
            let case_seed = rng::stream(seed, (3 * k + j) as u64).next_u64();
            closeness_case(cfg, audit, r, &lat.lattice, Mode::Dgs, &s, &label, case_seed)?;
        }
    }
    Ok(())
}

fn cdgs_fidelity(cfg: &SuiteConfig, audit: &Audit, r: &mut CriterionReport) -> CliResult<()> {
    let seed = cfg.seed_for(5);
    for (k, name) in ["z1", "z2", "fig1", "random3"].into_iter().enumerate() {
        let lat = ShiftedLattice::centered(corpus::get(name)?.lattice.basis);
        for (j, factor) in WIDTH_FACTORS.iter().enumerate() {
            let s = width(&lat.basis, factor)?;
            let label = format!("{name} s={}", s);
            let case_seed = rng::stream(seed, (3 * k + j) as u64).next_u64();
            closeness_case(cfg, audit, r, &lat, Mode::Cdgs, &s, &label, case_seed)?;
        }
    }
    Ok(())
}

// ---------------------------------------------------------------- criterion 6

fn one_dimensional(cfg: &SuiteConfig, r: &mut CriterionReport) -> CliResult<()> {
    let draws = cfg.draws_1d();
    for (j, s) in [0.5f64, 1.0, 3.0].into_iter().enumerate() {
        let seed = rng::stream(cfg.seed_for(6), j as u64).next_u64();
        let parts = chunked(draws, 100_000, seed, |_, len, rng| -> CliResult<(Vec<i64>, u64, f64)> {
            let mut values = Vec::with_capacity(len as usize);
            let (mut iters, mut iters_sq) = (0u64, 0f64);
            for _ in 0..len {
                let d = sample_z_nonzero_counted(s, rng);
                values.push(d.value);
                iters += d.iterations;
                iters_sq += (d.iterations * d.iterations) as f64;
            }
            Ok((values, iters, iters_sq))
        })?;
        // exact D_{Z\{0},s} by direct summation
        let weight = |k: i64| (-std::f64::consts::PI * (k * k) as f64 / (s * s)).exp();
        let kmax = (s * 12.0).ceil() as i64 + 2;
        let total: f64 = (1..=kmax).map(|k| 2.0 * weight(k)).sum();
        let keys: Vec<i64> = (-kmax..=kmax).filter(|k| *k != 0).collect();
        let mut counts = vec![0u64; keys.len()];
        let mut outside = 0u64;
        for v in parts.iter().flat_map(|p| p.0.iter()) {
            match keys.binary_search(v) {
                Ok(i) => counts[i] += 1,
                Err(_) => outside += 1,
            }
        }
        // cells with at least 5 expected draws; the rest is pooled into the tails
        let n = draws as f64;
        let (mut obs, mut exp) = (Vec::new(), Vec::new());
        let (mut pooled_o, mut pooled_e) = (outside, 0.0);
        for (k, c) in keys.iter().zip(&counts) {
            let e = n * weight(*k) / total;
            if e >= 5.0 {
                obs.push(*c);
                exp.push(e);
            } else {
                pooled_o += c;
                pooled_e += e;
            }
        }
        if pooled_e >= 5.0 {
            obs.push(pooled_o);
            exp.push(pooled_e);
        } else if let (Some(o), Some(e)) = (obs.last_mut(), exp.last_mut()) {
            *o += pooled_o;
            *e += pooled_e;
        }
        let (stat, cells) = chi_square_statistic(&obs, &exp)?;
        let p_value = if cells > 1 {
            ChiSquared::new((cells - 1) as f64).map_err(|e| CliError::Config(e.to_string()))?.sf(stat)
        } else {
            1.0
        };
        r.check(Check::at_least(format!("s={s} chi-square p-value ({cells} cells)"), p_value, 1e-3));
        let it: u64 = parts.iter().map(|p| p.1).sum();
        let it_sq: f64 = parts.iter().map(|p| p.2).sum();
        let mean = it as f64 / n;
        let sd = (it_sq / n - mean * mean).max(0.0).sqrt();
        r.check(Check::at_most(format!("s={s} mean rejection rounds"), mean, 2.0 + 3.0 * sd / n.sqrt()));
    }
    Ok(())
}

// ---------------------------------------------------------------- criterion 7

fn cvp_from_dgs(cfg: &SuiteConfig, audit: &Audit, r: &mut CriterionReport) -> CliResult<()> {
    const F: u64 = 3;
    let trials = cfg.cvp_trials();
    let q = 1.0 / (2.0 * (F * F) as f64);
    for (k, lat) in corpus::all()?.into_iter().enumerate() {
        let d_sq = distance_sq(&lat.lattice)?;
        let seed = rng::stream(cfg.seed_for(7), k as u64).next_u64();
        let member = Membership::new(&ShiftedLattice::centered(lat.basis().clone()))?;
        let hits: u64 = chunked(trials, 500, seed, |_, len, rng| -> CliResult<u64> {
            let mut oracle = AuditedSampler::new(ExactDgsOracle::default(), &lat.lattice)?;
            let mut hits = 0;
            let mut bad = 0;
            for _ in 0..len {
                let y = cvp_via_dgs(&lat.lattice, F, &mut oracle, rng)?;
                if !member.contains(&y) {
                    bad += 1;
                }
                if y.sub(&lat.lattice.shift)?.norm_sq() == d_sq {
                    hits += 1;
                }
            }
            oracle.flush(audit);
            audit.record_samples(len, bad);
            Ok(hits)
        })?
        .into_iter()
        .sum();
        r.check(Check::at_least(
            format!("{} success rate", lat.name),
            hits as f64 / trials as f64,
            q - three_se(q, trials),
        ));
    }
    Ok(())
}

// ---------------------------------------------------------------- criterion 8

fn svp_from_cdgs(cfg: &SuiteConfig, audit: &Audit, r: &mut CriterionReport) -> CliResult<()> {
    let runs = cfg.svp_runs();
    let pool = corpus::all()?;
    let seed = cfg.seed_for(8);
    // runs are spread over the corpus, round robin
    let results = chunked(runs, 1, seed, |i, _, rng| -> CliResult<(usize, f64, f64)> {
        let k = i as usize % pool.len();
        let lat = &pool[k];
        let basis = lat.basis();
        let centered = ShiftedLattice::centered(basis.clone());
        let mut oracle = AuditedSampler::new(ExactDgsOracle::default(), &centered)?;
        let x = svp_via_cdgs(basis, 10, &mut oracle, rng);
        oracle.flush(audit);
        let x = x?;
        let member = Membership::new(&centered)?;
        audit.record_samples(1, !member.contains(&x) as u64);
        let l1 = rational_to_f64(&solve_svp(basis)?.lambda1_sq).sqrt();
        Ok((k, x.norm_f64(), l1))
    })?;
    for (k, lat) in pool.iter().enumerate() {
        let mine: Vec<_> = results.iter().filter(|x| x.0 == k).collect();
        if mine.is_empty() {
            continue;
        }
        let gamma = svp_gamma(lat.dim(), 10);
        let worst = mine.iter().map(|x| x.1 / x.2).fold(0.0, f64::max);
        r.check(Check::at_most(format!("{} worst |x|/lambda1 over {} runs", lat.name, mine.len()), worst, gamma));
    }
    Ok(())
}

// ---------------------------------------------------------------- criterion 9

fn tail_bound(cfg: &SuiteConfig, audit: &Audit, r: &mut CriterionReport) -> CliResult<()> {
    let n_samples = cfg.samples;
    for (k, name) in ["fig1", "skew2", "random3"].into_iter().enumerate() {
        let lat = corpus::get(name)?;
        let n = lat.dim();
        let s = width(lat.basis(), "1")?;
        let table = exact_dgs(&lat.lattice, &s, TABLE_TAIL)?;
        let seed = rng::stream(cfg.seed_for(9), k as u64).next_u64();
        let samples: Vec<RationalVector> = chunked(n_samples, 10_000, seed, |_, len, rng| -> CliResult<Vec<_>> {
            Ok((0..len).map(|_| table.sample(rng).clone()).collect())
        })?
        .into_iter()
        .flatten()
        .collect();
        let member = Membership::new(&lat.lattice)?;
        crate::audit::audit_samples(audit, &member, &samples);
        let d_sq = rational_to_f64(&distance_sq(&lat.lattice)?);
        let sf = rational_to_f64(&s);
        let norms: Vec<f64> = samples.iter().map(|x| rational_to_f64(&x.norm_sq())).collect();
        let tail = |r: f64| norms.iter().filter(|&&v| v >= d_sq + r * r * sf * sf * n as f64).count() as f64 / n_samples as f64;
        let r0 = tail_radius_threshold(d_sq.sqrt(), sf, n);
        let bound = gaussian_tail_bound(d_sq.sqrt(), sf, n, r0)?;
        r.check(Check::at_most(
            format!("{name} tail at r={r0:.3}"),
            tail(r0),
            bound + three_se(bound, n_samples),
        ));
        // the general form of the same bound, where the tail is not empty
        for rr in [0.5f64, 0.75, 1.0] {
            let b = shifted_tail_bound(d_sq.sqrt(), sf, n, rr)?.min(1.0);
            r.check(Check::at_most(format!("{name} tail at r={rr}"), tail(rr), b + three_se(b, n_samples)));
        }
    }
    Ok(())
}

// ---------------------------------------------------------------- criterion 10

fn chi_q(cfg: &SuiteConfig, audit: &Audit, r: &mut CriterionReport) -> CliResult<()> {
    let z2 = corpus::get("z2")?;
    closeness_case(cfg, audit, r, &z2.lattice, Mode::Lq(1.0), &rat(1, 1), "z2 chi_1", cfg.seed_for(10))?;
    for lat in corpus::all()? {
        let a = cvp_k(&lat.lattice, Norm::L2)?.sub(&lat.lattice.shift)?.norm_sq();
        let b = solve_cvp(&lat.lattice)?.sub(&lat.lattice.shift)?.norm_sq();
        r.check(Check::holds(format!("{} CVP_K(l2) distance equals CVP distance", lat.name), a == b));
    }
    Ok(())
}

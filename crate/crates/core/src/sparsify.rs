//! Random sparsification: the index-`p` sublattice
//! `L' = { x in L : <z, B^{-1} x> = 0 mod p }`, optionally paired with a random coset
//! shift `w = B c`.

use alloc::vec::Vec;

use rand::Rng;

use crate::error::{invalid, Error, Result};
use crate::lattice::{Basis, IntBasis, Rational, RationalVector};

/// Deterministic primality test for all `u64`.
pub fn is_prime(n: u64) -> bool {
    const SMALL: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if n < 2 {
        return false;
    }
    for &p in &SMALL {
        if n % p == 0 {
            return n == p;
        }
    }
    if n < 41 * 41 {
        return true;
    }
    let mut d = n - 1;
    let mut s = 0;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    // these witnesses are exact for every 64-bit input
    'witness: for &a in &SMALL {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    match a.checked_mul(b) {
        Some(x) => x % m,
        None => ((a as u128 * b as u128) % m as u128) as u64,
    }
}

fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1u64;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = mul_mod(r, b, m);
        }
        b = mul_mod(b, b, m);
        e >>= 1;
    }
    r
}

/// Smallest prime in `[lo, hi]`.
pub fn prime_in_interval(lo: u64, hi: u64) -> Result<u64> {
    (lo.max(2)..=hi).find(|&k| is_prime(k)).ok_or(Error::NoPrimeInInterval { lo, hi })
}

/// Prime in `[ceil(lo), floor(hi)]` for real endpoints.
pub fn prime_in_real_interval(lo: f64, hi: f64) -> Result<u64> {
    if !(lo.is_finite() && hi.is_finite()) || hi > 1e18 {
        return Err(Error::Overflow);
    }
    prime_in_interval(crate::numeric::ceil(lo.max(2.0)) as u64, crate::numeric::floor(hi) as u64)
}

/// Inverse of a unit `a` mod `p`, by the extended Euclidean algorithm.
fn inv_mod(a: u64, p: u64) -> u64 {
    let Ok(pi) = i64::try_from(p) else {
        return pow_mod(a, p - 2, p);
    };
    // Bezout coefficients stay below p in absolute value
    let (mut r0, mut r1) = (pi, a as i64);
    let (mut t0, mut t1) = (0i64, 1i64);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    t0.rem_euclid(pi) as u64
}

fn check_z(n: usize, p: u64, z: &[u64]) -> Result<()> {
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    if z.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: z.len() });
    }
    Ok(())
}

/// `z` scaled so its last nonzero entry is 1 (same kernel mod p), with the index of
/// that entry; `None` for `z = 0`.
fn normalize(p: u64, z: &[u64]) -> Option<(usize, Vec<u64>)> {
    let j = z.iter().rposition(|&x| x % p != 0)?;
    let inv = inv_mod(z[j] % p, p);
    Some((j, z.iter().map(|&x| mul_mod(x % p, inv, p)).collect()))
}

/// Basis of `L'` by the dual construction: replace the `j`-th dual vector by
/// `(1/p) sum z_i b_i*` and invert-transpose.
pub fn sparsify_basis(basis: &Basis, p: u64, z: &[u64]) -> Result<Basis> {
    check_z(basis.dim(), p, z)?;
    let Some((j, z)) = normalize(p, z) else {
        return Ok(basis.clone());
    };
    let n = basis.dim();
    let mut dual = basis.dual_columns();
    let inv_p = Rational::new(1.into(), p.into());
    let mut v = RationalVector::zeros(n);
    for (zi, d) in z.iter().zip(&dual) {
        v = v.add(&d.scale(&Rational::from_integer((*zi).into())))?;
    }
    dual[j] = v.scale(&inv_p);
    let hat = Basis::from_columns(dual)?;
    Basis::from_columns(hat.dual_columns())
}

/// Same lattice as [`sparsify_basis`] in closed form on a scaled integer basis:
/// columns `b_i - z_i b_j` for `i != j` and `p b_j`.
pub fn sparsify_int(basis: &IntBasis, p: u64, z: &[u64]) -> Result<IntBasis> {
    check_z(basis.dim(), p, z)?;
    sparsify_int_unchecked(basis, p, z)
}

pub(crate) fn sparsify_int_unchecked(basis: &IntBasis, p: u64, z: &[u64]) -> Result<IntBasis> {
    let Some((j, z)) = normalize(p, z) else {
        return Ok(basis.clone());
    };
    let n = basis.dim();
    let half = p / 2;
    let bj = basis.col(j);
    let mut data = Vec::with_capacity(n * n);
    for i in 0..n {
        if i == j {
            for &x in bj {
                data.push(x.checked_mul(p as i128).ok_or(Error::Overflow)?);
            }
            continue;
        }
        // centered representative keeps entries small
        let zi = if z[i] > half { z[i] as i128 - p as i128 } else { z[i] as i128 };
        for (&a, &b) in basis.col(i).iter().zip(bj) {
            let t = b.checked_mul(zi).ok_or(Error::Overflow)?;
            data.push(a.checked_sub(t).ok_or(Error::Overflow)?);
        }
    }
    Ok(IntBasis::from_raw(n, basis.scale(), data))
}

/// Output of one sparsification draw, in the scaled coordinates of the input basis.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SparsifiedPair {
    pub sublattice: IntBasis,
    /// `w = B c`; zero for unshifted draws.
    pub shift_vector: Vec<i128>,
    pub prime_p: u64,
    pub z: Vec<u64>,
    pub c: Vec<u64>,
}

impl SparsifiedPair {
    pub fn sublattice_basis(&self) -> Result<Basis> {
        self.sublattice.to_basis()
    }

    pub fn shift_rational(&self) -> RationalVector {
        RationalVector::from_scaled(&self.shift_vector, self.sublattice.scale())
    }
}

fn uniform_vec<R: Rng + ?Sized>(n: usize, p: u64, rng: &mut R) -> Vec<u64> {
    (0..n).map(|_| rng.gen_range(0..p)).collect()
}

/// `z, c` uniform over `Z_p^n`; sublattice from `z`, shift `w = B c`.
pub fn sample_shifted_sparsifier<R: Rng + ?Sized>(basis: &IntBasis, p: u64, rng: &mut R) -> Result<SparsifiedPair> {
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    shifted_draw(basis, p, rng)
}

pub(crate) fn shifted_draw<R: Rng + ?Sized>(basis: &IntBasis, p: u64, rng: &mut R) -> Result<SparsifiedPair> {
    let n = basis.dim();
    let z = uniform_vec(n, p, rng);
    let c = uniform_vec(n, p, rng);
    let sublattice = sparsify_int_unchecked(basis, p, &z)?;
    let ci: Vec<i128> = c.iter().map(|&x| x as i128).collect();
    let shift_vector = basis.combine(&ci);
    Ok(SparsifiedPair { sublattice, shift_vector, prime_p: p, z, c })
}

/// `z` uniform over `Z_p^n`, no shift. Requires `p >= 101`.
pub fn sample_unshifted_sparsifier<R: Rng + ?Sized>(basis: &IntBasis, p: u64, rng: &mut R) -> Result<SparsifiedPair> {
    if p < 101 {
        return Err(invalid("unshifted sparsification needs p >= 101"));
    }
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    unshifted_draw(basis, p, rng)
}

pub(crate) fn unshifted_draw<R: Rng + ?Sized>(basis: &IntBasis, p: u64, rng: &mut R) -> Result<SparsifiedPair> {
    let n = basis.dim();
    let z = uniform_vec(n, p, rng);
    let sublattice = sparsify_int_unchecked(basis, p, &z)?;
    Ok(SparsifiedPair { sublattice, shift_vector: alloc::vec![0; n], prime_p: p, z, c: alloc::vec![0; n] })
}

/// `<z, v> mod p` for integer `v`.
pub fn inner_mod(z: &[u64], v: &[i128], p: u64) -> u64 {
    let pm = p as i128;
    let mut acc: i128 = 0;
    for (&zi, &vi) in z.iter().zip(v) {
        acc = (acc + (zi as i128 % pm) * vi.rem_euclid(pm)) % pm;
    }
    acc as u64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{coords, is_lattice_member, rat_int};
    use rand::SeedableRng;

    #[test]
    fn primes() {
        let small: Vec<u64> = (0..50).filter(|&k| is_prime(k)).collect();
        assert_eq!(small, [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47]);
        assert!(is_prime(1_000_000_007));
        assert!(!is_prime(3_215_031_751)); // strong pseudoprime to bases 2, 3, 5, 7
        assert!(is_prime(18_446_744_073_709_551_557));
        assert_eq!(prime_in_interval(24, 28), Err(Error::NoPrimeInInterval { lo: 24, hi: 28 }));
        assert_eq!(prime_in_interval(200, 400).unwrap(), 211);
    }

    #[test]
    fn inverses_agree_with_fermat() {
        for p in [3u64, 101, 65_537, 1_000_000_007, 18_446_744_073_709_551_557] {
            for a in [1u64, 2, 57, p - 1, p / 2 + 1].into_iter().filter(|a| a % p != 0) {
                let inv = inv_mod(a % p, p);
                assert_eq!(mul_mod(a % p, inv, p), 1);
                assert_eq!(inv, pow_mod(a, p - 2, p));
            }
        }
    }

    fn same_lattice(a: &Basis, b: &Basis) -> bool {
        a.columns().iter().all(|c| is_lattice_member(b, c).unwrap())
            && b.columns().iter().all(|c| is_lattice_member(a, c).unwrap())
    }

    #[test]
    fn zero_z_is_identity() {
        let i2 = Basis::identity(2);
        assert_eq!(sparsify_basis(&i2, 3, &[0, 0]).unwrap(), i2);
    }

    #[test]
    fn example_congruence_lattice() {
        let out = sparsify_basis(&Basis::identity(2), 3, &[1, 2]).unwrap();
        let expect = Basis::from_int_columns(&[&[1, 1], &[0, 3]]).unwrap();
        assert!(same_lattice(&out, &expect));
        assert_eq!(out.determinant().clone() * out.determinant(), rat_int(9));
    }

    #[test]
    fn not_prime_rejected() {
        assert_eq!(sparsify_basis(&Basis::identity(2), 4, &[1, 1]), Err(Error::NotPrime(4)));
        assert_eq!(
            sample_unshifted_sparsifier(Basis::identity(2).int_basis(), 97, &mut rand_chacha::ChaCha8Rng::seed_from_u64(0))
                .unwrap_err(),
            invalid("unshifted sparsification needs p >= 101")
        );
    }

    #[test]
    fn closed_form_matches_dual_construction() {
        let b = Basis::from_int_columns(&[&[2, 1, 0], &[1, 3, 1], &[0, -1, 4]]).unwrap();
        for p in [3u64, 5, 7] {
            for z0 in 0..p {
                for z2 in 0..p {
                    let z = [z0, 2 % p, z2];
                    let dual = sparsify_basis(&b, p, &z).unwrap();
                    let closed = sparsify_int(b.int_basis(), p, &z).unwrap().to_basis().unwrap();
                    assert!(same_lattice(&dual, &closed));
                    for col in dual.columns() {
                        let c = coords(&b, col).unwrap();
                        let ints: Vec<i128> = c.coords().iter().map(|x| x.to_integer().try_into().unwrap()).collect();
                        assert_eq!(inner_mod(&z, &ints, p), 0);
                    }
                }
            }
        }
    }
}

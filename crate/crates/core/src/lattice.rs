//! Exact rational lattices: vectors, bases, coordinates, membership, primitivity,
//! and the bit-length bounds on the first minimum and covering radius.
//!
//! Two representations live side by side. [`Basis`] keeps arbitrary-precision
//! rational columns together with the exact inverse; it backs every public
//! coordinate and membership question. [`IntBasis`] is the same lattice scaled by a
//! common denominator into `i128` columns, which is what the enumeration oracles and
//! the sparsification loops work on.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{invalid, Error, Result};

/// Exact rational number in lowest terms with positive denominator.
pub type Rational = BigRational;

/// Largest absolute value allowed for a scaled integer entry.
pub const INT_ENTRY_LIMIT: i128 = 1 << 40;

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn rat_int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn parse_rational(s: &str) -> Result<Rational> {
    let t = s.trim();
    Rational::from_str(t).map_err(|_| invalid(alloc::format!("cannot parse rational {t:?}")))
}

/// `p/q` form, always with an explicit denominator.
pub fn format_rational(r: &Rational) -> String {
    alloc::format!("{}/{}", r.numer(), r.denom())
}

/// Integer coordinate vector in `Q^n`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RationalVector(Vec<Rational>);

impl RationalVector {
    pub fn new(coords: Vec<Rational>) -> Self {
        Self(coords)
    }

    pub fn zeros(n: usize) -> Self {
        Self(vec![Rational::zero(); n])
    }

    pub fn from_ints(xs: &[i64]) -> Self {
        Self(xs.iter().map(|&x| rat_int(x)).collect())
    }

    pub fn from_pairs(xs: &[(i64, i64)]) -> Self {
        Self(xs.iter().map(|&(n, d)| rat(n, d)).collect())
    }

    /// `coords[i] / scale` for a scaled integer vector.
    pub fn from_scaled(coords: &[i128], scale: i128) -> Self {
        let d = BigInt::from(scale);
        Self(coords.iter().map(|&c| Rational::new(BigInt::from(c), d.clone())).collect())
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[Rational] {
        &self.0
    }

    pub fn into_coords(self) -> Vec<Rational> {
        self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(Zero::is_zero)
    }

    fn check_dim(&self, other: &Self) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: other.dim() });
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        Ok(Self(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect()))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        Ok(Self(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect()))
    }

    pub fn scale(&self, c: &Rational) -> Self {
        Self(self.0.iter().map(|a| a * c).collect())
    }

    pub fn scale_int(&self, k: i64) -> Self {
        self.scale(&rat_int(k))
    }

    pub fn dot(&self, other: &Self) -> Result<Rational> {
        self.check_dim(other)?;
        Ok(self.0.iter().zip(&other.0).fold(Rational::zero(), |acc, (a, b)| acc + a * b))
    }

    pub fn norm_sq(&self) -> Rational {
        self.0.iter().fold(Rational::zero(), |acc, a| acc + a * a)
    }

    pub fn norm_f64(&self) -> f64 {
        crate::numeric::sqrt(crate::numeric::rational_to_f64(&self.norm_sq()))
    }

    /// Least common multiple of the coordinate denominators.
    pub fn common_denominator(&self) -> BigInt {
        self.0.iter().fold(BigInt::one(), |acc, a| acc.lcm(a.denom()))
    }

    /// Canonical serialization: comma-separated `p/q` coordinates.
    pub fn to_key(&self) -> String {
        let mut s = String::new();
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                s.push(',');
            }
            s.push_str(&format_rational(c));
        }
        s
    }

    pub fn parse_key(s: &str) -> Result<Self> {
        let coords = s.split(',').map(parse_rational).collect::<Result<Vec<_>>>()?;
        if coords.is_empty() {
            return Err(invalid("empty vector"));
        }
        Ok(Self(coords))
    }

    /// Scaled integer coordinates; fails if `scale` does not clear every denominator.
    pub fn to_scaled(&self, scale: i128) -> Result<Vec<i128>> {
        let s = BigInt::from(scale);
        self.0
            .iter()
            .map(|a| {
                let v = a * Rational::from_integer(s.clone());
                if !v.is_integer() {
                    return Err(invalid("scale does not clear denominators"));
                }
                v.to_integer().to_i128().ok_or(Error::Overflow)
            })
            .collect()
    }
}

impl fmt::Display for RationalVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{c}")?;
        }
        f.write_str(")")
    }
}

/// Dense square rational matrix, row-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct RatMatrix {
    n: usize,
    a: Vec<Rational>,
}

impl RatMatrix {
    fn from_columns(cols: &[RationalVector]) -> Self {
        let n = cols.len();
        let mut a = vec![Rational::zero(); n * n];
        for (j, c) in cols.iter().enumerate() {
            for i in 0..n {
                a[i * n + j] = c.coords()[i].clone();
            }
        }
        Self { n, a }
    }

    fn at(&self, i: usize, j: usize) -> &Rational {
        &self.a[i * self.n + j]
    }

    fn transpose(&self) -> Self {
        let n = self.n;
        let mut a = vec![Rational::zero(); n * n];
        for i in 0..n {
            for j in 0..n {
                a[j * n + i] = self.a[i * n + j].clone();
            }
        }
        Self { n, a }
    }

    fn column(&self, j: usize) -> RationalVector {
        RationalVector::new((0..self.n).map(|i| self.at(i, j).clone()).collect())
    }

    fn mul_vec(&self, x: &[Rational]) -> Vec<Rational> {
        (0..self.n)
            .map(|i| (0..self.n).fold(Rational::zero(), |acc, j| acc + self.at(i, j) * &x[j]))
            .collect()
    }

    /// Determinant and inverse by Gauss-Jordan elimination; `None` if singular.
    fn det_inverse(&self) -> (Rational, Option<Self>) {
        let n = self.n;
        let mut m = self.a.clone();
        let mut inv = vec![Rational::zero(); n * n];
        for i in 0..n {
            inv[i * n + i] = Rational::one();
        }
        let mut det = Rational::one();
        for col in 0..n {
            let Some(piv) = (col..n).find(|&r| !m[r * n + col].is_zero()) else {
                return (Rational::zero(), None);
            };
            if piv != col {
                for k in 0..n {
                    m.swap(piv * n + k, col * n + k);
                    inv.swap(piv * n + k, col * n + k);
                }
                det = -det;
            }
            let p = m[col * n + col].clone();
            det *= &p;
            let pinv = p.recip();
            for k in 0..n {
                m[col * n + k] *= &pinv;
                inv[col * n + k] *= &pinv;
            }
            for r in 0..n {
                if r == col || m[r * n + col].is_zero() {
                    continue;
                }
                let factor = m[r * n + col].clone();
                for k in 0..n {
                    let a = &m[col * n + k] * &factor;
                    m[r * n + k] -= a;
                    let b = &inv[col * n + k] * &factor;
                    inv[r * n + k] -= b;
                }
            }
        }
        (det, Some(Self { n, a: inv }))
    }
}

/// Full-rank lattice basis with exact inverse and cached bit-length bound.
#[derive(Clone, Debug)]
pub struct Basis {
    columns: Vec<RationalVector>,
    inverse: RatMatrix,
    det: Rational,
    bit_length: u64,
    int: IntBasis,
}

impl PartialEq for Basis {
    fn eq(&self, other: &Self) -> bool {
        self.columns == other.columns
    }
}

impl Eq for Basis {}

impl Basis {
    /// Builds a basis from its column vectors, rejecting singular input.
    pub fn from_columns(columns: Vec<RationalVector>) -> Result<Self> {
        let n = columns.len();
        if n == 0 {
            return Err(invalid("basis must have at least one column"));
        }
        for c in &columns {
            if c.dim() != n {
                return Err(Error::DimensionMismatch { expected: n, found: c.dim() });
            }
        }
        let m = RatMatrix::from_columns(&columns);
        let (det, inverse) = m.det_inverse();
        let inverse = inverse.ok_or(Error::SingularBasis)?;
        let bit_length = columns.iter().map(column_bit_length).max().unwrap_or(0);
        let int = IntBasis::from_columns(&columns, &BigInt::one())?;
        Ok(Self { columns, inverse, det, bit_length, int })
    }

    pub fn from_int_columns(cols: &[&[i64]]) -> Result<Self> {
        Self::from_columns(cols.iter().map(|c| RationalVector::from_ints(c)).collect())
    }

    pub fn identity(n: usize) -> Self {
        let cols = (0..n)
            .map(|j| {
                let mut v = vec![Rational::zero(); n];
                v[j] = Rational::one();
                RationalVector::new(v)
            })
            .collect();
        Self::from_columns(cols).expect("identity is nonsingular")
    }

    /// Diagonal basis with the given entries.
    pub fn diagonal(entries: &[Rational]) -> Result<Self> {
        let n = entries.len();
        let cols = entries
            .iter()
            .enumerate()
            .map(|(j, e)| {
                let mut v = vec![Rational::zero(); n];
                v[j] = e.clone();
                RationalVector::new(v)
            })
            .collect();
        Self::from_columns(cols)
    }

    pub fn dim(&self) -> usize {
        self.columns.len()
    }

    pub fn columns(&self) -> &[RationalVector] {
        &self.columns
    }

    pub fn determinant(&self) -> &Rational {
        &self.det
    }

    /// The cached bound `m` on the bit length of the basis entries.
    pub fn bit_length(&self) -> u64 {
        self.bit_length
    }

    /// Scaled-integer form of the basis with the basis' own common denominator.
    pub fn int_basis(&self) -> &IntBasis {
        &self.int
    }

    /// `B * v`.
    pub fn combine(&self, v: &[Rational]) -> Result<RationalVector> {
        if v.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: v.len() });
        }
        let m = RatMatrix::from_columns(&self.columns);
        Ok(RationalVector::new(m.mul_vec(v)))
    }

    pub fn combine_ints(&self, v: &[i64]) -> Result<RationalVector> {
        let r: Vec<Rational> = v.iter().map(|&x| rat_int(x)).collect();
        self.combine(&r)
    }

    /// `B^{-T}`, the dual basis, as columns.
    pub fn dual_columns(&self) -> Vec<RationalVector> {
        let t = self.inverse.transpose();
        (0..self.dim()).map(|j| t.column(j)).collect()
    }

    /// The basis `c * B`.
    pub fn scaled(&self, c: &Rational) -> Result<Self> {
        if c.is_zero() {
            return Err(invalid("scale factor must be nonzero"));
        }
        Self::from_columns(self.columns.iter().map(|v| v.scale(c)).collect())
    }

    /// Least common multiple of all entry denominators.
    pub fn common_denominator(&self) -> BigInt {
        self.columns.iter().fold(BigInt::one(), |acc, c| acc.lcm(&c.common_denominator()))
    }

    /// Exact integer membership tester built from `B^{-1}`.
    pub fn membership_test(&self) -> Result<MembershipTest> {
        MembershipTest::new(&self.inverse)
    }
}

fn bits(x: &BigInt) -> u64 {
    x.bits()
}

/// Smallest `k >= 0` with `x <= 2^k` for a positive integer.
fn ceil_log2(x: &BigInt) -> u64 {
    if *x <= BigInt::one() {
        return 0;
    }
    let b = bits(&(x - 1u8));
    b
}

/// Bound on the bit length of a column: covers every entry's natural encoding,
/// the column's common denominator, and the column's Euclidean length.
fn column_bit_length(c: &RationalVector) -> u64 {
    let entry = c
        .coords()
        .iter()
        .map(|a| bits(&a.numer().abs()) + bits(a.denom()) - 1)
        .max()
        .unwrap_or(0);
    let den = ceil_log2(&c.common_denominator());
    // smallest k with ||c||^2 <= 4^k
    let nsq = c.norm_sq();
    let mut k = 0u64;
    loop {
        let four_k = Rational::from_integer(BigInt::one() << (2 * k as usize));
        if nsq <= four_k {
            break;
        }
        k += 1;
    }
    entry.max(den).max(k)
}

/// `B^{-1} x`, exactly.
pub fn coords(basis: &Basis, x: &RationalVector) -> Result<RationalVector> {
    if x.dim() != basis.dim() {
        return Err(Error::DimensionMismatch { expected: basis.dim(), found: x.dim() });
    }
    Ok(RationalVector::new(basis.inverse.mul_vec(x.coords())))
}

/// Integer coordinates of a lattice member, or `None` for a non-member.
pub fn integer_coords(basis: &Basis, x: &RationalVector) -> Result<Option<Vec<BigInt>>> {
    let c = coords(basis, x)?;
    if c.coords().iter().all(|a| a.is_integer()) {
        Ok(Some(c.coords().iter().map(|a| a.to_integer()).collect()))
    } else {
        Ok(None)
    }
}

pub fn is_lattice_member(basis: &Basis, x: &RationalVector) -> Result<bool> {
    Ok(integer_coords(basis, x)?.is_some())
}

/// A nonzero member is primitive iff its integer coordinates are coprime.
pub fn is_primitive(basis: &Basis, x: &RationalVector) -> Result<bool> {
    if x.is_zero() {
        return Err(Error::ZeroVector);
    }
    let c = integer_coords(basis, x)?.ok_or(Error::NotMember)?;
    let g = c.iter().fold(BigInt::zero(), |acc, a| acc.gcd(a));
    Ok(g.is_one())
}

/// Bounds on the first minimum and covering radius derived from the bit length.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BitLengthBounds {
    pub lambda1_lo: Rational,
    pub lambda1_hi: Rational,
    pub mu_lo: Rational,
    pub mu_hi: Rational,
}

pub fn bit_length_bounds(basis: &Basis) -> BitLengthBounds {
    let n = basis.dim() as u64;
    let m = basis.bit_length();
    let two_pow = |e: u64| Rational::from_integer(BigInt::one() << (e as usize));
    let lambda1_lo = two_pow(n * m).recip();
    let lambda1_hi = two_pow(m);
    let mu_lo = two_pow(n * m + 1).recip();
    let mu_hi = two_pow(m) * Rational::from_integer(BigInt::from(n));
    BitLengthBounds { lambda1_lo, lambda1_hi, mu_lo, mu_hi }
}

/// A lattice together with a shift: the set `L - t`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShiftedLattice {
    pub basis: Basis,
    pub shift: RationalVector,
}

impl ShiftedLattice {
    pub fn new(basis: Basis, shift: RationalVector) -> Result<Self> {
        if shift.dim() != basis.dim() {
            return Err(Error::DimensionMismatch { expected: basis.dim(), found: shift.dim() });
        }
        Ok(Self { basis, shift })
    }

    pub fn centered(basis: Basis) -> Self {
        let n = basis.dim();
        Self { basis, shift: RationalVector::zeros(n) }
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    /// `(L - t) / s`, i.e. the lattice `L/s` with shift `t/s`.
    pub fn scaled_down(&self, s: &Rational) -> Result<Self> {
        if !s.is_positive() {
            return Err(invalid("scale must be positive"));
        }
        let c = s.recip();
        Ok(Self { basis: self.basis.scaled(&c)?, shift: self.shift.scale(&c) })
    }

    /// Least common multiple of basis and shift denominators.
    pub fn common_denominator(&self) -> BigInt {
        self.basis.common_denominator().lcm(&self.shift.common_denominator())
    }

    /// Scaled-integer form sharing one denominator between basis and shift.
    pub fn int_form(&self) -> Result<IntShifted> {
        let q = self.common_denominator();
        let basis = IntBasis::from_columns(self.basis.columns(), &q)?;
        let shift = self.shift.to_scaled(basis.scale())?;
        check_entries(&shift)?;
        Ok(IntShifted { basis, shift })
    }
}

fn check_entries(v: &[i128]) -> Result<()> {
    if v.iter().any(|x| x.abs() > INT_ENTRY_LIMIT) {
        return Err(Error::Overflow);
    }
    Ok(())
}

/// Lattice in `Z^n / scale`, stored as integer columns (column-major).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct IntBasis {
    n: usize,
    scale: i128,
    data: Vec<i128>,
}

impl IntBasis {
    /// Scales `columns` by the lcm of their denominators and `extra`.
    pub fn from_columns(columns: &[RationalVector], extra: &BigInt) -> Result<Self> {
        let n = columns.len();
        let q = columns.iter().fold(extra.clone(), |acc, c| acc.lcm(&c.common_denominator()));
        let scale = q.to_i128().filter(|&s| s <= INT_ENTRY_LIMIT).ok_or(Error::Overflow)?;
        let mut data = Vec::with_capacity(n * n);
        for c in columns {
            if c.dim() != n {
                return Err(Error::DimensionMismatch { expected: n, found: c.dim() });
            }
            data.extend(c.to_scaled(scale)?);
        }
        check_entries(&data)?;
        Ok(Self { n, scale, data })
    }

    /// Trusted constructor for columns already known to be independent.
    pub(crate) fn from_raw(n: usize, scale: i128, data: Vec<i128>) -> Self {
        debug_assert_eq!(data.len(), n * n);
        Self { n, scale, data }
    }

    /// Checked constructor from integer columns.
    pub fn new(scale: i128, columns: Vec<Vec<i128>>) -> Result<Self> {
        let n = columns.len();
        if scale <= 0 {
            return Err(invalid("scale must be positive"));
        }
        let mut data = Vec::with_capacity(n * n);
        for c in &columns {
            if c.len() != n {
                return Err(Error::DimensionMismatch { expected: n, found: c.len() });
            }
            data.extend_from_slice(c);
        }
        check_entries(&data)?;
        let b = Self { n, scale, data };
        b.to_basis()?;
        Ok(b)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn scale(&self) -> i128 {
        self.scale
    }

    pub fn col(&self, j: usize) -> &[i128] {
        &self.data[j * self.n..(j + 1) * self.n]
    }

    pub fn data(&self) -> &[i128] {
        &self.data
    }

    /// `M v` in scaled coordinates.
    pub fn combine(&self, v: &[i128]) -> Vec<i128> {
        let n = self.n;
        let mut out = vec![0i128; n];
        for (j, &vj) in v.iter().enumerate() {
            if vj == 0 {
                continue;
            }
            for i in 0..n {
                out[i] += self.data[j * n + i] * vj;
            }
        }
        out
    }

    pub fn columns_rational(&self) -> Vec<RationalVector> {
        (0..self.n).map(|j| RationalVector::from_scaled(self.col(j), self.scale)).collect()
    }

    pub fn to_basis(&self) -> Result<Basis> {
        Basis::from_columns(self.columns_rational())
    }

    /// Same lattice, expressed over a multiple of the current scale.
    pub fn rescaled_to(&self, scale: i128) -> Result<Self> {
        if scale % self.scale != 0 {
            return Err(invalid("new scale must be a multiple of the old one"));
        }
        let k = scale / self.scale;
        let data: Vec<i128> = self.data.iter().map(|&x| x * k).collect();
        check_entries(&data)?;
        Ok(Self { n: self.n, scale, data })
    }
}

/// `L - t` in scaled integer coordinates, basis and shift sharing one scale.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntShifted {
    pub basis: IntBasis,
    pub shift: Vec<i128>,
}

impl IntShifted {
    pub fn centered(basis: IntBasis) -> Self {
        let n = basis.dim();
        Self { basis, shift: vec![0; n] }
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    pub fn scale(&self) -> i128 {
        self.basis.scale()
    }

    pub fn to_shifted(&self) -> Result<ShiftedLattice> {
        ShiftedLattice::new(self.basis.to_basis()?, RationalVector::from_scaled(&self.shift, self.scale()))
    }
}

/// Exact test of `x ∈ L` using `B^{-1} = A / d` with integer `A`.
#[derive(Clone, Debug)]
pub struct MembershipTest {
    n: usize,
    a: Vec<i128>,
    d: i128,
}

impl MembershipTest {
    fn new(inverse: &RatMatrix) -> Result<Self> {
        let n = inverse.n;
        let d = inverse.a.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
        let a = inverse
            .a
            .iter()
            .map(|x| (x * Rational::from_integer(d.clone())).to_integer().to_i128().ok_or(Error::Overflow))
            .collect::<Result<Vec<_>>>()?;
        let d = d.to_i128().ok_or(Error::Overflow)?;
        Ok(Self { n, a, d })
    }

    /// Integer coordinates of `v / scale`, or `None` if it is not a lattice vector or
    /// the arithmetic would overflow.
    pub fn coords_scaled(&self, v: &[i128], scale: i128) -> Option<Vec<i128>> {
        if v.len() != self.n {
            return None;
        }
        let modulus = self.d.checked_mul(scale)?;
        let mut out = Vec::with_capacity(self.n);
        for i in 0..self.n {
            let mut acc: i128 = 0;
            for j in 0..self.n {
                acc = acc.checked_add(self.a[i * self.n + j].checked_mul(v[j])?)?;
            }
            if acc % modulus != 0 {
                return None;
            }
            out.push(acc / modulus);
        }
        Some(out)
    }

    /// Whether `v / scale` lies in the lattice.
    pub fn contains_scaled(&self, v: &[i128], scale: i128) -> bool {
        if v.len() != self.n {
            return false;
        }
        let Some(modulus) = self.d.checked_mul(scale) else { return false };
        // plain sums first; reduce as we go only if they overflow
        let plain = (0..self.n).try_fold(true, |ok, i| {
            let mut acc: i128 = 0;
            for j in 0..self.n {
                acc = acc.checked_add(self.a[i * self.n + j].checked_mul(v[j])?)?;
            }
            Some(ok && acc % modulus == 0)
        });
        if let Some(ok) = plain {
            return ok;
        }
        for i in 0..self.n {
            let mut acc: i128 = 0;
            for j in 0..self.n {
                let Some(t) = self.a[i * self.n + j].checked_mul(v[j]) else { return false };
                let Some(s) = acc.checked_add(t % modulus) else { return false };
                acc = s % modulus;
            }
            if acc % modulus != 0 {
                return false;
            }
        }
        true
    }

    /// Whether every column of `sub` lies in the lattice.
    pub fn contains_lattice(&self, sub: &IntBasis) -> bool {
        (0..sub.dim()).all(|j| self.contains_scaled(sub.col(j), sub.scale()))
    }
}

//! Lattice point enumeration on scaled integer bases.
//!
//! The basis is LLL-reduced first (same lattice, better-conditioned Gram-Schmidt
//! data), then a Fincke-Pohst depth-first search walks every coefficient vector whose
//! floating-point partial distance stays inside the bound plus a safety margin. Each
//! leaf is rebuilt as an exact `i128` vector and handed to a visitor, which makes all
//! final decisions with exact integer distances. Floating point therefore only decides
//! which candidates get looked at, never which ones are accepted.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::lattice::IntBasis;
use crate::numeric::{ceil, floor, round, sqrt};

const LLL_DELTA: f64 = 0.99;

/// Columns as exact integer vectors plus floating-point Gram-Schmidt data.
#[derive(Clone, Debug)]
pub(crate) struct Reduced {
    pub n: usize,
    /// Column-major reduced basis.
    pub cols: Vec<i128>,
    cols_f: Vec<f64>,
    mu: Vec<f64>,
    bstar_sq: Vec<f64>,
    bstar: Vec<f64>,
    /// Enumeration scratch, kept to avoid allocating per query.
    y_buf: Vec<f64>,
    x_buf: Vec<i64>,
}

fn dot_f(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl Reduced {
    pub fn new(basis: &IntBasis) -> Result<Self> {
        let mut r = Self::empty();
        r.reset(basis)?;
        Ok(r)
    }

    pub fn empty() -> Self {
        Self {
            n: 0,
            cols: Vec::new(),
            cols_f: Vec::new(),
            mu: Vec::new(),
            bstar_sq: Vec::new(),
            bstar: Vec::new(),
            y_buf: Vec::new(),
            x_buf: Vec::new(),
        }
    }

    /// Reduces `basis` in place of whatever this held, reusing the buffers.
    pub fn reset(&mut self, basis: &IntBasis) -> Result<()> {
        let n = basis.dim();
        self.n = n;
        self.cols.clear();
        self.cols.extend_from_slice(basis.data());
        self.cols_f.clear();
        self.cols_f.extend(basis.data().iter().map(|&x| to_f64(x)));
        for v in [&mut self.mu, &mut self.bstar] {
            v.clear();
            v.resize(n * n, 0.0);
        }
        self.bstar_sq.clear();
        self.bstar_sq.resize(n, 0.0);
        self.lll()
    }

    pub fn col(&self, j: usize) -> &[i128] {
        &self.cols[j * self.n..(j + 1) * self.n]
    }

    fn gram_schmidt(&mut self) {
        let n = self.n;
        for i in 0..n {
            self.bstar[i * n..(i + 1) * n].copy_from_slice(&self.cols_f[i * n..(i + 1) * n]);
            for j in 0..i {
                let m = if self.bstar_sq[j] > 0.0 {
                    let mut d = 0.0;
                    for k in 0..n {
                        d += self.cols_f[i * n + k] * self.bstar[j * n + k];
                    }
                    d / self.bstar_sq[j]
                } else {
                    0.0
                };
                self.mu[i * n + j] = m;
                for k in 0..n {
                    self.bstar[i * n + k] -= m * self.bstar[j * n + k];
                }
            }
            let bs = &self.bstar[i * n..(i + 1) * n];
            self.bstar_sq[i] = dot_f(bs, bs);
        }
    }

    fn sub_multiple(&mut self, k: usize, j: usize, c: i128) -> Result<()> {
        let n = self.n;
        for i in 0..n {
            let t = self.cols[j * n + i].checked_mul(c).ok_or(Error::Overflow)?;
            self.cols[k * n + i] = self.cols[k * n + i].checked_sub(t).ok_or(Error::Overflow)?;
            self.cols_f[k * n + i] = to_f64(self.cols[k * n + i]);
        }
        Ok(())
    }

    fn lll(&mut self) -> Result<()> {
        let n = self.n;
        if n == 2 && self.gauss_2d().is_some() {
            self.gram_schmidt();
            return Ok(());
        }
        self.gram_schmidt();
        if n < 2 {
            return Ok(());
        }
        let mut k = 1;
        let mut steps = 0usize;
        let limit = 10_000 * n * n;
        while k < n {
            steps += 1;
            if steps > limit {
                // enumeration stays correct on any basis; reduction is only for speed
                break;
            }
            for j in (0..k).rev() {
                let m = self.mu[k * n + j];
                if m.abs() > 0.5 {
                    if !m.is_finite() || m.abs() > 1e30 {
                        return Err(Error::Overflow);
                    }
                    let c = if m.abs() < 4e15 { nearest(m) } else { round(m) };
                    self.sub_multiple(k, j, c as i128)?;
                    // b_k -= c b_j leaves b*_k alone and shifts the k-th row of mu
                    for l in 0..j {
                        self.mu[k * n + l] -= c * self.mu[j * n + l];
                    }
                    self.mu[k * n + j] -= c;
                }
            }
            let m = self.mu[k * n + k - 1];
            if self.bstar_sq[k] >= (LLL_DELTA - m * m) * self.bstar_sq[k - 1] {
                k += 1;
            } else {
                for i in 0..n {
                    self.cols.swap(k * n + i, (k - 1) * n + i);
                    self.cols_f.swap(k * n + i, (k - 1) * n + i);
                }
                self.swap_update(k, m);
                k = if k > 1 { k - 1 } else { 1 };
            }
        }
        // enumeration prunes with these, so drop any drift from the incremental updates
        self.gram_schmidt();
        Ok(())
    }

    /// Lagrange-Gauss reduction of a planar basis in exact integers. `None` on
    /// overflow, leaving a basis of the same lattice for the general path.
    fn gauss_2d(&mut self) -> Option<()> {
        let dot = |a: &[i128], b: &[i128]| -> Option<i128> {
            a[0].checked_mul(b[0])?.checked_add(a[1].checked_mul(b[1])?)
        };
        let (mut u, mut v) = ([self.cols[0], self.cols[1]], [self.cols[2], self.cols[3]]);
        let mut uu = dot(&u, &u)?;
        let mut vv = dot(&v, &v)?;
        loop {
            if vv < uu {
                core::mem::swap(&mut u, &mut v);
                core::mem::swap(&mut uu, &mut vv);
            }
            if uu == 0 {
                return None;
            }
            // q = round(<u, v> / <u, u>)
            let num = dot(&u, &v)?;
            let q = num.checked_mul(2)?.checked_add(uu)?.div_euclid(uu.checked_mul(2)?);
            if q == 0 {
                break;
            }
            v = [v[0].checked_sub(q.checked_mul(u[0])?)?, v[1].checked_sub(q.checked_mul(u[1])?)?];
            vv = dot(&v, &v)?;
        }
        self.cols.copy_from_slice(&[u[0], u[1], v[0], v[1]]);
        for (f, &x) in self.cols_f.iter_mut().zip(&self.cols) {
            *f = to_f64(x);
        }
        Some(())
    }

    /// Gram-Schmidt data after exchanging `b_{k-1}` and `b_k`, where `m` was
    /// `mu[k][k-1]` before the exchange.
    fn swap_update(&mut self, k: usize, m: f64) {
        let n = self.n;
        let (b_prev, b_k) = (self.bstar_sq[k - 1], self.bstar_sq[k]);
        let b = b_k + m * m * b_prev;
        if !(b > 0.0) {
            self.gram_schmidt();
            return;
        }
        let m_new = m * b_prev / b;
        self.bstar_sq[k] = b_prev * b_k / b;
        self.bstar_sq[k - 1] = b;
        self.mu[k * n + k - 1] = m_new;
        for j in 0..k - 1 {
            self.mu.swap(k * n + j, (k - 1) * n + j);
        }
        for i in k + 1..n {
            let t = self.mu[i * n + k];
            self.mu[i * n + k] = self.mu[i * n + k - 1] - m * t;
            self.mu[i * n + k - 1] = t + m_new * self.mu[i * n + k];
        }
    }

    /// `R x` exactly.
    pub fn combine(&self, x: &[i64]) -> Result<Vec<i128>> {
        let n = self.n;
        let mut v = vec![0i128; n];
        for (j, &xj) in x.iter().enumerate() {
            if xj == 0 {
                continue;
            }
            let xj = xj as i128;
            for i in 0..n {
                let t = self.cols[j * n + i].checked_mul(xj).ok_or(Error::Overflow)?;
                v[i] = v[i].checked_add(t).ok_or(Error::Overflow)?;
            }
        }
        Ok(v)
    }

    /// Babai rounding-off coefficients for the target.
    fn babai(&self, target: &[i128]) -> Vec<i64> {
        let n = self.n;
        let t: Vec<f64> = target.iter().map(|&x| to_f64(x)).collect();
        let mut y: Vec<f64> = (0..n)
            .map(|i| {
                let bs = &self.bstar[i * n..(i + 1) * n];
                if self.bstar_sq[i] > 0.0 { dot_f(&t, bs) / self.bstar_sq[i] } else { 0.0 }
            })
            .collect();
        let mut x = vec![0i64; n];
        for i in (0..n).rev() {
            let c = round(y[i]);
            x[i] = c as i64;
            for j in 0..i {
                y[j] -= c * self.mu[i * n + j];
            }
        }
        x
    }

    /// Depth-first enumeration of all coefficient vectors with
    /// `||R x - target||^2 <= visitor.bound()` (up to the float margin).
    pub fn enumerate<V: Visitor>(&self, target: &[i128], visitor: &mut V) -> Result<()> {
        let n = self.n;
        let mut y = vec![0.0; n];
        self.project(target, &mut y);
        let mut x = vec![0i64; n];
        self.recurse(n, 0.0, &y, &mut x, target, visitor)
    }

    /// Same as [`enumerate`](Self::enumerate), using this value's scratch buffers.
    pub fn enumerate_mut<V: Visitor>(&mut self, target: &[i128], visitor: &mut V) -> Result<()> {
        let n = self.n;
        let mut y = core::mem::take(&mut self.y_buf);
        let mut x = core::mem::take(&mut self.x_buf);
        y.clear();
        y.resize(n, 0.0);
        x.clear();
        x.resize(n, 0);
        self.project(target, &mut y);
        let r = self.recurse(n, 0.0, &y, &mut x, target, visitor);
        self.y_buf = y;
        self.x_buf = x;
        r
    }

    /// Gram-Schmidt coordinates of `target`.
    fn project(&self, target: &[i128], y: &mut [f64]) {
        let n = self.n;
        for (i, yi) in y.iter_mut().enumerate() {
            let bs = &self.bstar[i * n..(i + 1) * n];
            *yi = if self.bstar_sq[i] > 0.0 {
                let d: f64 = target.iter().zip(bs).map(|(&a, b)| to_f64(a) * b).sum();
                d / self.bstar_sq[i]
            } else {
                0.0
            };
        }
    }

    fn recurse<V: Visitor>(
        &self,
        level: usize,
        partial: f64,
        y: &[f64],
        x: &mut [i64],
        target: &[i128],
        visitor: &mut V,
    ) -> Result<()> {
        let n = self.n;
        if level == 0 {
            let v = self.combine(x)?;
            let mut d: i128 = 0;
            for i in 0..n {
                let diff = v[i].checked_sub(target[i]).ok_or(Error::Overflow)?;
                let sq = diff.checked_mul(diff).ok_or(Error::Overflow)?;
                d = d.checked_add(sq).ok_or(Error::Overflow)?;
            }
            return visitor.visit(&v, x, d);
        }
        let i = level - 1;
        let mut c = y[i];
        for j in level..n {
            c -= self.mu[j * n + i] * x[j] as f64;
        }
        let bound = margin(visitor.bound());
        let rem = bound - partial;
        if rem < 0.0 || self.bstar_sq[i] <= 0.0 {
            return Ok(());
        }
        let w = sqrt(rem / self.bstar_sq[i]);
        let lo = ceil(c - w);
        let hi = floor(c + w);
        if !(lo.is_finite() && hi.is_finite()) || lo.abs() > 9e15 || hi.abs() > 9e15 {
            return Err(Error::Overflow);
        }
        let mut xi = lo as i64;
        let hi = hi as i64;
        while xi <= hi {
            let diff = xi as f64 - c;
            let p = partial + diff * diff * self.bstar_sq[i];
            // the visitor may have shrunk the bound since the range was computed
            if p <= margin(visitor.bound()) {
                x[i] = xi;
                self.recurse(level - 1, p, y, x, target, visitor)?;
            }
            xi += 1;
        }
        x[i] = 0;
        Ok(())
    }
}

/// Nearest integer for `|x| < 2^52`, without a libm call.
fn nearest(x: f64) -> f64 {
    let t = x as i64 as f64;
    let d = x - t;
    if d > 0.5 {
        t + 1.0
    } else if d < -0.5 {
        t - 1.0
    } else {
        t
    }
}

/// `i128 -> f64` with a single-instruction path for values that fit in `i64`.
fn to_f64(x: i128) -> f64 {
    match i64::try_from(x) {
        Ok(v) => v as f64,
        Err(_) => x as f64,
    }
}

fn margin(bound: f64) -> f64 {
    bound * (1.0 + 1e-9) + 0.5
}

/// Receives every enumerated candidate along with its exact squared distance
/// (in scaled units) to the target.
pub(crate) trait Visitor {
    fn bound(&self) -> f64;
    fn visit(&mut self, v: &[i128], coeffs: &[i64], dist_sq: i128) -> Result<()>;
}

pub(crate) fn norm_sq(v: &[i128]) -> Result<i128> {
    v.iter().try_fold(0i128, |acc, &x| {
        let sq = x.checked_mul(x).ok_or(Error::Overflow)?;
        acc.checked_add(sq).ok_or(Error::Overflow)
    })
}

pub(crate) fn dist_sq(a: &[i128], b: &[i128]) -> Result<i128> {
    a.iter().zip(b).try_fold(0i128, |acc, (&x, &y)| {
        let d = x.checked_sub(y).ok_or(Error::Overflow)?;
        let sq = d.checked_mul(d).ok_or(Error::Overflow)?;
        acc.checked_add(sq).ok_or(Error::Overflow)
    })
}

struct Minimizer {
    best: i128,
    best_vec: Option<Vec<i128>>,
    exclude_zero: bool,
}

impl Visitor for Minimizer {
    fn bound(&self) -> f64 {
        to_f64(self.best)
    }

    fn visit(&mut self, v: &[i128], coeffs: &[i64], d: i128) -> Result<()> {
        if self.exclude_zero && coeffs.iter().all(|&c| c == 0) {
            return Ok(());
        }
        let better = match &self.best_vec {
            None => d <= self.best,
            Some(b) => d < self.best || (d == self.best && v < b.as_slice()),
        };
        if better {
            self.best = d;
            self.best_vec = Some(v.to_vec());
        }
        Ok(())
    }
}

/// Closest lattice vector to `target`, ties broken by lexicographic order.
pub(crate) fn closest(red: &Reduced, target: &[i128]) -> Result<Vec<i128>> {
    let x = red.babai(target);
    let start = red.combine(&x)?;
    let d = dist_sq(&start, target)?;
    let mut m = Minimizer { best: d, best_vec: None, exclude_zero: false };
    red.enumerate(target, &mut m)?;
    Ok(m.best_vec.unwrap_or(start))
}

/// Shortest nonzero lattice vector, ties broken by lexicographic order.
pub(crate) fn shortest(red: &Reduced) -> Result<Vec<i128>> {
    let n = red.n;
    let mut best = i128::MAX;
    for j in 0..n {
        best = best.min(norm_sq(red.col(j))?);
    }
    let mut m = Minimizer { best, best_vec: None, exclude_zero: true };
    red.enumerate(&vec![0; n], &mut m)?;
    m.best_vec.ok_or(Error::Overflow)
}

/// Closest lattice vector if it lies within `bound` of `target`. Only the ball is
/// searched, so this is much cheaper than [`closest`] when the lattice is sparse.
pub(crate) fn closest_within(red: &mut Reduced, target: &[i128], bound: i128) -> Result<Option<Vec<i128>>> {
    if bound < 0 {
        return Ok(None);
    }
    let mut m = Minimizer { best: bound, best_vec: None, exclude_zero: false };
    red.enumerate_mut(target, &mut m)?;
    Ok(m.best_vec)
}

/// Shortest nonzero lattice vector if its squared norm is at most `bound`.
pub(crate) fn shortest_within(red: &mut Reduced, bound: i128) -> Result<Option<Vec<i128>>> {
    if bound <= 0 {
        return Ok(None);
    }
    let mut m = Minimizer { best: bound, best_vec: None, exclude_zero: true };
    let origin = [0i128; 8];
    if red.n <= origin.len() {
        red.enumerate_mut(&origin[..red.n], &mut m)?;
    } else {
        red.enumerate_mut(&vec![0; red.n], &mut m)?;
    }
    Ok(m.best_vec)
}

struct Collector<F> {
    bound: i128,
    f: F,
}

impl<F: FnMut(&[i128], &[i64], i128) -> Result<()>> Visitor for Collector<F> {
    fn bound(&self) -> f64 {
        to_f64(self.bound)
    }

    fn visit(&mut self, v: &[i128], coeffs: &[i64], d: i128) -> Result<()> {
        if d <= self.bound {
            (self.f)(v, coeffs, d)?;
        }
        Ok(())
    }
}

/// Calls `f(v, coeffs, dist_sq)` for every lattice vector with
/// `||v - center||^2 <= bound` (all in scaled units). Coefficients are with respect
/// to the reduced basis, which is unimodularly equivalent to the input.
pub(crate) fn for_each_in_ball<F>(red: &Reduced, center: &[i128], bound: i128, f: F) -> Result<()>
where
    F: FnMut(&[i128], &[i64], i128) -> Result<()>,
{
    if bound < 0 {
        return Ok(());
    }
    let mut c = Collector { bound, f };
    red.enumerate(center, &mut c)
}

/// Squared length of the shortest lattice vector linearly independent of `v`.
pub(crate) fn second_minimum(red: &Reduced, v: &[i128]) -> Result<Option<i128>> {
    let n = red.n;
    if n < 2 {
        return Ok(None);
    }
    let mut bound = 0i128;
    for j in 0..n {
        bound = bound.max(norm_sq(red.col(j))?);
    }
    let mut best: Option<i128> = None;
    for_each_in_ball(red, &vec![0; n], bound, |w, _, d| {
        if !parallel(v, w) && best.is_none_or(|b| d < b) {
            best = Some(d);
        }
        Ok(())
    })?;
    Ok(best)
}

/// Whether `w` is a (possibly zero) multiple of `v`: all 2x2 minors vanish.
pub(crate) fn parallel(v: &[i128], w: &[i128]) -> bool {
    let n = v.len();
    for i in 0..n {
        for j in i + 1..n {
            let a = v[i].checked_mul(w[j]);
            let b = v[j].checked_mul(w[i]);
            match (a, b) {
                (Some(a), Some(b)) if a == b => {}
                _ => return false,
            }
        }
    }
    true
}

pub(crate) fn gcd_coeffs(x: &[i64]) -> u64 {
    x.iter().fold(0u64, |g, &c| {
        let mut a = g;
        let mut b = c.unsigned_abs();
        while b != 0 {
            let t = a % b;
            a = b;
            b = t;
        }
        a
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::IntBasis;

    fn ib(scale: i128, cols: &[&[i128]]) -> IntBasis {
        IntBasis::new(scale, cols.iter().map(|c| c.to_vec()).collect()).unwrap()
    }

    // independent reference: scan a coefficient box
    fn brute_closest(b: &IntBasis, t: &[i128], box_r: i64) -> (i128, Vec<i128>) {
        let n = b.dim();
        let mut best: Option<(i128, Vec<i128>)> = None;
        let mut x = vec![-box_r; n];
        loop {
            let xi: Vec<i128> = x.iter().map(|&c| c as i128).collect();
            let v = b.combine(&xi);
            let d: i128 = v.iter().zip(t).map(|(a, b)| (a - b) * (a - b)).sum();
            if best.as_ref().is_none_or(|(bd, bv)| d < *bd || (d == *bd && v < *bv)) {
                best = Some((d, v));
            }
            let mut k = 0;
            while k < n {
                x[k] += 1;
                if x[k] <= box_r {
                    break;
                }
                x[k] = -box_r;
                k += 1;
            }
            if k == n {
                break;
            }
        }
        best.unwrap()
    }

    #[test]
    fn closest_matches_box_scan() {
        let b = ib(1, &[&[7, 2, -1], &[3, 9, 4], &[-2, 1, 8]]);
        let red = Reduced::new(&b).unwrap();
        for t in [[5i128, -3, 11], [0, 0, 0], [13, 13, -7], [3, 4, 5]] {
            let got = closest(&red, &t).unwrap();
            let (d, v) = brute_closest(&b, &t, 6);
            assert_eq!(dist_sq(&got, &t).unwrap(), d);
            assert_eq!(got, v);
        }
    }

    #[test]
    fn shortest_of_skewed_basis() {
        // (1,0) and (1000,1): LLL must find (-1,0)
        let b = ib(1, &[&[1, 0], &[1000, 1]]);
        let red = Reduced::new(&b).unwrap();
        assert_eq!(shortest(&red).unwrap(), vec![-1, 0]);
        assert_eq!(second_minimum(&red, &[1, 0]).unwrap(), Some(1));
    }

    #[test]
    fn ball_count_z3() {
        let b = ib(1, &[&[1, 0, 0], &[0, 1, 0], &[0, 0, 1]]);
        let red = Reduced::new(&b).unwrap();
        let mut count = 0;
        for_each_in_ball(&red, &[0, 0, 0], 2, |_, _, _| {
            count += 1;
            Ok(())
        })
        .unwrap();
        assert_eq!(count, 19);
    }

    #[test]
    fn parallel_detection() {
        assert!(parallel(&[2, 4], &[-1, -2]));
        assert!(parallel(&[2, 4], &[0, 0]));
        assert!(!parallel(&[2, 4], &[1, 3]));
    }
}

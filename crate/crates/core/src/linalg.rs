//! Small dense linear algebra used by the fiber kernels.
//!
//! Everything here is deterministic: the eigensolvers are cyclic Jacobi
//! iterations with a fixed sweep order, so a given build produces
//! bit-identical results for identical inputs.
//!
//! Two eigendecompositions are provided:
//!
//! * [`sym_eigen`] — two-sided cyclic Jacobi on a symmetric matrix. Absolute
//!   accuracy `~eps * ||A||`, fine for tangent vectors and Rayleigh–Ritz.
//! * [`spd_eigen`] — pivoted Cholesky followed by one-sided Jacobi on the
//!   factor. Eigenvalues of positive definite matrices come out with high
//!   *relative* accuracy, which is what makes `log` of a matrix with
//!   eigenvalue spread `e^{±14}` round-trip to ~1e-12.

use crate::error::{Error, Result};
use crate::real::Real;

/// Dense square matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Mat<T> {
    n: usize,
    data: Vec<T>,
}

impl<T: Real> Mat<T> {
    pub fn zeros(n: usize) -> Self {
        Mat { n, data: vec![T::zero(); n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn from_rows(n: usize, rows: &[&[T]]) -> Self {
        assert_eq!(rows.len(), n);
        let mut m = Self::zeros(n);
        for (i, r) in rows.iter().enumerate() {
            assert_eq!(r.len(), n);
            m.data[i * n..(i + 1) * n].copy_from_slice(r);
        }
        m
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.n, |i, j| self[(j, i)])
    }

    /// `self * other`
    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n);
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a == T::zero() {
                    continue;
                }
                for j in 0..n {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    /// `self * other^T`
    pub fn mul_transpose(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n);
        let n = self.n;
        Self::from_fn(n, |i, j| {
            let mut s = T::zero();
            for k in 0..n {
                s += self[(i, k)] * other[(j, k)];
            }
            s
        })
    }

    /// `self * v`
    pub fn mul_vec(&self, v: &[T]) -> Vec<T> {
        assert_eq!(v.len(), self.n);
        (0..self.n)
            .map(|i| {
                let mut s = T::zero();
                for j in 0..self.n {
                    s += self[(i, j)] * v[j];
                }
                s
            })
            .collect()
    }

    pub fn frob_norm(&self) -> T {
        self.data.iter().fold(T::zero(), |acc, &x| acc + x * x).sqrt()
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n);
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(other.data.iter()) {
            *a -= *b;
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n);
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(other.data.iter()) {
            *a += *b;
        }
        out
    }

    pub fn scale(&self, c: T) -> Self {
        let mut out = self.clone();
        for a in out.data.iter_mut() {
            *a *= c;
        }
        out
    }

    pub fn trace(&self) -> T {
        (0..self.n).fold(T::zero(), |acc, i| acc + self[(i, i)])
    }

    /// Determinant by LU with partial pivoting.
    pub fn det(&self) -> T {
        let n = self.n;
        let mut a = self.data.clone();
        let mut det = T::one();
        for col in 0..n {
            let mut piv = col;
            let mut best = a[col * n + col].abs();
            for r in col + 1..n {
                let v = a[r * n + col].abs();
                if v > best {
                    best = v;
                    piv = r;
                }
            }
            if best == T::zero() {
                return T::zero();
            }
            if piv != col {
                for j in 0..n {
                    a.swap(col * n + j, piv * n + j);
                }
                det = -det;
            }
            let d = a[col * n + col];
            det *= d;
            for r in col + 1..n {
                let f = a[r * n + col] / d;
                for j in col..n {
                    let v = a[col * n + j];
                    a[r * n + j] = a[r * n + j] - f * v;
                }
            }
        }
        det
    }

    /// Max |a_ij - a_ji|, a cheap symmetry check.
    pub fn asymmetry(&self) -> T {
        let mut worst = T::zero();
        for i in 0..self.n {
            for j in i + 1..self.n {
                worst = worst.max((self[(i, j)] - self[(j, i)]).abs());
            }
        }
        worst
    }
}

impl<T: Real> std::ops::Index<(usize, usize)> for Mat<T> {
    type Output = T;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.n + j]
    }
}

impl<T: Real> std::ops::IndexMut<(usize, usize)> for Mat<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.n + j]
    }
}

/// Symmetric matrix stored as the packed upper triangle, so the symmetry
/// invariant holds by representation.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix<T> {
    n: usize,
    /// Row-wise upper triangle including the diagonal.
    upper: Vec<T>,
}

#[inline]
fn upper_index(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(i <= j);
    // offset of row i = sum_{r<i} (n - r) = i(2n - i + 1)/2
    i * (2 * n - i + 1) / 2 + (j - i)
}

impl<T: Real> SymMatrix<T> {
    pub fn zeros(n: usize) -> Self {
        SymMatrix { n, upper: vec![T::zero(); n * (n + 1) / 2] }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Build from any square matrix by averaging `(a_ij + a_ji)/2`.
    pub fn symmetrize(m: &Mat<T>) -> Self {
        let n = m.dim();
        let mut s = Self::zeros(n);
        for i in 0..n {
            for j in i..n {
                s.set(i, j, (m[(i, j)] + m[(j, i)]) * T::lit(0.5));
            }
        }
        s
    }

    pub fn from_diag(d: &[T]) -> Self {
        let mut s = Self::zeros(d.len());
        for (i, &v) in d.iter().enumerate() {
            s.set(i, i, v);
        }
        s
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        if i <= j {
            self.upper[upper_index(self.n, i, j)]
        } else {
            self.upper[upper_index(self.n, j, i)]
        }
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: T) {
        if i <= j {
            self.upper[upper_index(self.n, i, j)] = v;
        } else {
            self.upper[upper_index(self.n, j, i)] = v;
        }
    }

    pub fn to_mat(&self) -> Mat<T> {
        Mat::from_fn(self.n, |i, j| self.get(i, j))
    }

    pub fn trace(&self) -> T {
        (0..self.n).fold(T::zero(), |acc, i| acc + self.get(i, i))
    }

    pub fn frob_norm(&self) -> T {
        let mut s = T::zero();
        for i in 0..self.n {
            for j in 0..self.n {
                let v = self.get(i, j);
                s += v * v;
            }
        }
        s.sqrt()
    }
}

/// Antisymmetric matrix stored as the packed strict upper triangle.
#[derive(Debug, Clone, PartialEq)]
pub struct SkewMatrix<T> {
    n: usize,
    /// Row-wise strict upper triangle; `a_ij = upper[..], a_ji = -a_ij`.
    upper: Vec<T>,
}

impl<T: Real> SkewMatrix<T> {
    pub fn zeros(n: usize) -> Self {
        SkewMatrix { n, upper: vec![T::zero(); n * (n - 1) / 2] }
    }

    pub fn from_upper(n: usize, upper: Vec<T>) -> Self {
        assert_eq!(upper.len(), n * (n - 1) / 2);
        SkewMatrix { n, upper }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn upper(&self) -> &[T] {
        &self.upper
    }

    #[inline]
    fn strict_index(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < j);
        i * self.n - i * (i + 1) / 2 + (j - i - 1)
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        if i == j {
            T::zero()
        } else if i < j {
            self.upper[self.strict_index(i, j)]
        } else {
            -self.upper[self.strict_index(j, i)]
        }
    }

    pub fn set_upper(&mut self, i: usize, j: usize, v: T) {
        assert!(i < j);
        let idx = self.strict_index(i, j);
        self.upper[idx] = v;
    }

    pub fn to_mat(&self) -> Mat<T> {
        Mat::from_fn(self.n, |i, j| self.get(i, j))
    }

    pub fn frob_norm(&self) -> T {
        let two = T::lit(2.0);
        (self.upper.iter().fold(T::zero(), |acc, &x| acc + x * x) * two).sqrt()
    }

    pub fn scale_mut(&mut self, c: T) {
        for v in self.upper.iter_mut() {
            *v *= c;
        }
    }
}

const JACOBI_MAX_SWEEPS: usize = 60;

/// Symmetric eigendecomposition `A = V diag(w) V^T` by two-sided cyclic
/// Jacobi. Eigenpairs are returned sorted descending; V's columns are the
/// eigenvectors.
pub fn sym_eigen<T: Real>(a: &SymMatrix<T>) -> (Vec<T>, Mat<T>) {
    let n = a.dim();
    let mut m = a.to_mat();
    let mut v = Mat::identity(n);
    let eps = T::epsilon();
    for _sweep in 0..JACOBI_MAX_SWEEPS {
        let mut off = T::zero();
        let mut scale = T::zero();
        for i in 0..n {
            scale = scale.max(m[(i, i)].abs());
            for j in i + 1..n {
                off = off.max(m[(i, j)].abs());
                scale = scale.max(m[(i, j)].abs());
            }
        }
        if off <= eps * scale.max(T::min_positive_value()) {
            break;
        }
        for p in 0..n - 1 {
            for q in p + 1..n {
                let apq = m[(p, q)];
                if apq.abs() <= eps * scale {
                    continue;
                }
                let theta = (m[(q, q)] - m[(p, p)]) / (T::lit(2.0) * apq);
                let t = if theta.abs() > T::lit(1e12) {
                    (T::lit(2.0) * theta).recip()
                } else {
                    let sgn = if theta >= T::zero() { T::one() } else { -T::one() };
                    sgn / (theta.abs() + (theta * theta + T::one()).sqrt())
                };
                let c = (t * t + T::one()).sqrt().recip();
                let s = t * c;
                // rotate rows/columns p and q of M
                for k in 0..n {
                    let mkp = m[(k, p)];
                    let mkq = m[(k, q)];
                    m[(k, p)] = c * mkp - s * mkq;
                    m[(k, q)] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[(p, k)];
                    let mqk = m[(q, k)];
                    m[(p, k)] = c * mpk - s * mqk;
                    m[(q, k)] = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut pairs: Vec<(T, usize)> = (0..n).map(|i| (m[(i, i)], i)).collect();
    pairs.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
    let w: Vec<T> = pairs.iter().map(|&(val, _)| val).collect();
    let vs = Mat::from_fn(n, |i, j| v[(i, pairs[j].1)]);
    (w, vs)
}

/// Plain lower Cholesky factor of an SPD matrix.
pub fn cholesky<T: Real>(a: &Mat<T>) -> Result<Mat<T>> {
    let n = a.dim();
    let mut l = Mat::zeros(n);
    for i in 0..n {
        for j in 0..=i {
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            if i == j {
                if s <= T::zero() {
                    return Err(Error::NotPositiveDefinite);
                }
                l[(i, i)] = s.sqrt();
            } else {
                l[(i, j)] = s / l[(j, j)];
            }
        }
    }
    Ok(l)
}

/// Solve `L x = b` for lower-triangular `L`.
pub fn solve_lower<T: Real>(l: &Mat<T>, b: &[T]) -> Vec<T> {
    let n = l.dim();
    let mut x = b.to_vec();
    for i in 0..n {
        for k in 0..i {
            let v = x[k];
            x[i] = x[i] - l[(i, k)] * v;
        }
        x[i] = x[i] / l[(i, i)];
    }
    x
}

/// Solve `L^T x = b` for lower-triangular `L`.
pub fn solve_lower_transpose<T: Real>(l: &Mat<T>, b: &[T]) -> Vec<T> {
    let n = l.dim();
    let mut x = b.to_vec();
    for i in (0..n).rev() {
        for k in i + 1..n {
            let v = x[k];
            x[i] = x[i] - l[(k, i)] * v;
        }
        x[i] = x[i] / l[(i, i)];
    }
    x
}

/// Eigendecomposition of a symmetric positive definite matrix with high
/// relative accuracy: pivoted Cholesky `A = G G^T`, then one-sided Jacobi
/// orthogonalization of the columns of `G`. Returns eigenvalues descending
/// with matching eigenvector columns.
pub fn spd_eigen<T: Real>(a: &Mat<T>) -> Result<(Vec<T>, Mat<T>)> {
    let n = a.dim();
    // pivoted Cholesky: A[p,p] = L L^T, pivot on the largest diagonal
    let work = a.data.clone();
    let idx = |i: usize, j: usize| i * n + j;
    let mut perm: Vec<usize> = (0..n).collect();
    let mut l = Mat::zeros(n);
    for step in 0..n {
        let mut piv = step;
        let mut best = work[idx(perm[step], perm[step])];
        for r in step + 1..n {
            let v = work[idx(perm[r], perm[r])];
            if v > best {
                best = v;
                piv = r;
            }
        }
        perm.swap(step, piv);
        if piv != step {
            for j in 0..n {
                let t = l[(step, j)];
                l[(step, j)] = l[(piv, j)];
                l[(piv, j)] = t;
            }
        }
        let p = perm[step];
        let mut s = work[idx(p, p)];
        for k in 0..step {
            s -= l[(step, k)] * l[(step, k)];
        }
        if s <= T::zero() {
            return Err(Error::NotPositiveDefinite);
        }
        let d = s.sqrt();
        l[(step, step)] = d;
        for r in step + 1..n {
            let q = perm[r];
            let mut s = work[idx(q, p)];
            for k in 0..step {
                s -= l[(r, k)] * l[(step, k)];
            }
            l[(r, step)] = s / d;
        }
    }
    // G with rows un-permuted: G[perm[i], j] = L[i][j]; then A = G G^T
    let mut g = Mat::zeros(n);
    for i in 0..n {
        for j in 0..n {
            g[(perm[i], j)] = l[(i, j)];
        }
    }
    // one-sided Jacobi: orthogonalize the columns of G by right rotations
    let eps = T::epsilon();
    for _sweep in 0..JACOBI_MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n - 1 {
            for q in p + 1..n {
                let mut app = T::zero();
                let mut aqq = T::zero();
                let mut apq = T::zero();
                for k in 0..n {
                    let gp = g[(k, p)];
                    let gq = g[(k, q)];
                    app += gp * gp;
                    aqq += gq * gq;
                    apq += gp * gq;
                }
                if apq.abs() <= eps * (app * aqq).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (aqq - app) / (T::lit(2.0) * apq);
                let t = if zeta.abs() > T::lit(1e12) {
                    (T::lit(2.0) * zeta).recip()
                } else {
                    let sgn = if zeta >= T::zero() { T::one() } else { -T::one() };
                    sgn / (zeta.abs() + (zeta * zeta + T::one()).sqrt())
                };
                let c = (t * t + T::one()).sqrt().recip();
                let s = t * c;
                for k in 0..n {
                    let gp = g[(k, p)];
                    let gq = g[(k, q)];
                    g[(k, p)] = c * gp - s * gq;
                    g[(k, q)] = s * gp + c * gq;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    // column norms are the singular values of G; eigenvalues of A are their squares
    let mut pairs: Vec<(T, usize)> = (0..n)
        .map(|j| {
            let mut s = T::zero();
            for k in 0..n {
                s += g[(k, j)] * g[(k, j)];
            }
            (s, j)
        })
        .collect();
    pairs.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
    let evals: Vec<T> = pairs.iter().map(|&(v, _)| v).collect();
    let evecs = Mat::from_fn(n, |i, j| {
        let (lam, col) = pairs[j];
        g[(i, col)] / lam.sqrt()
    });
    Ok((evals, evecs))
}

// -------------------------------------------------------------------------
// Compensated determinant
//
// The determinant of a graded matrix (eigenvalue spread e^{2s}) evaluated
// in working precision loses ~eps * spread digits to cancellation, which
// already breaks a 1e-10 check at s = 7. An LU in double-double arithmetic
// evaluates the determinant of the *stored* entries essentially exactly;
// n is small here, so cost does not matter.
// -------------------------------------------------------------------------

#[derive(Clone, Copy)]
struct Dd<T> {
    hi: T,
    lo: T,
}

impl<T: Real> Dd<T> {
    fn from(x: T) -> Self {
        Dd { hi: x, lo: T::zero() }
    }

    fn two_sum(a: T, b: T) -> Self {
        let s = a + b;
        let bb = s - a;
        let err = (a - (s - bb)) + (b - bb);
        Dd { hi: s, lo: err }
    }

    fn two_prod(a: T, b: T) -> Self {
        let p = a * b;
        // fused multiply-add extracts the rounding error exactly
        let err = a.mul_add(b, -p);
        Dd { hi: p, lo: err }
    }

    fn add(self, other: Self) -> Self {
        let s = Self::two_sum(self.hi, other.hi);
        let lo = s.lo + self.lo + other.lo;
        let r = Self::two_sum(s.hi, lo);
        Dd { hi: r.hi, lo: r.lo }
    }

    fn mul(self, other: Self) -> Self {
        let p = Self::two_prod(self.hi, other.hi);
        let lo = p.lo + self.hi * other.lo + self.lo * other.hi;
        let r = Self::two_sum(p.hi, lo);
        Dd { hi: r.hi, lo: r.lo }
    }

    fn sub(self, other: Self) -> Self {
        self.add(Dd { hi: -other.hi, lo: -other.lo })
    }

    fn div(self, other: Self) -> Self {
        let q1 = self.hi / other.hi;
        let r = self.sub(Dd::from(q1).mul(other));
        let q2 = (r.hi + r.lo) / other.hi;
        let s = Self::two_sum(q1, q2);
        Dd { hi: s.hi, lo: s.lo }
    }
}

/// Determinant by LU with partial pivoting in double-double arithmetic;
/// returns the high part. Exact to ~eps^2 of the entry scale, so graded
/// matrices keep their full determinant accuracy.
pub fn det_compensated<T: Real>(m: &Mat<T>) -> T {
    let n = m.dim();
    let mut a: Vec<Dd<T>> = m.as_slice().iter().map(|&x| Dd::from(x)).collect();
    let mut det = Dd::from(T::one());
    let mut sign = T::one();
    for col in 0..n {
        let mut piv = col;
        let mut best = a[col * n + col].hi.abs();
        for r in col + 1..n {
            let v = a[r * n + col].hi.abs();
            if v > best {
                best = v;
                piv = r;
            }
        }
        if best == T::zero() {
            return T::zero();
        }
        if piv != col {
            for j in 0..n {
                a.swap(col * n + j, piv * n + j);
            }
            sign = -sign;
        }
        let d = a[col * n + col];
        det = det.mul(d);
        for r in col + 1..n {
            let f = a[r * n + col].div(d);
            for j in col..n {
                let sub = f.mul(a[col * n + j]);
                a[r * n + j] = a[r * n + j].sub(sub);
            }
        }
    }
    sign * (det.hi + det.lo)
}

/// Orthogonal exponential of a skew-symmetric matrix by scaling and squaring
/// with a truncated Taylor series; one Newton–Schulz polar step re-enforces
/// orthogonality if rounding drift exceeds 1e-12.
pub fn expm_skew<T: Real>(u: &SkewMatrix<T>) -> Mat<T> {
    let n = u.dim();
    let norm = u.frob_norm();
    let mut s = 0usize;
    let mut scaled = u.to_mat();
    if norm > T::lit(0.25) {
        s = (norm / T::lit(0.25)).log2().ceil().to_f64_lossy() as usize;
        scaled = scaled.scale(T::lit(0.5).powi(s as i32));
    }
    // Taylor series of exp on the scaled matrix
    let mut result = Mat::identity(n);
    let mut term = Mat::identity(n);
    for k in 1..=24 {
        term = term.mul(&scaled).scale(T::lit(1.0 / k as f64));
        let mut done = true;
        for i in 0..n {
            for j in 0..n {
                result[(i, j)] += term[(i, j)];
                if term[(i, j)].abs() > T::epsilon() {
                    done = false;
                }
            }
        }
        if done {
            break;
        }
    }
    for _ in 0..s {
        result = result.mul(&result);
    }
    // drift check: ||Q^T Q - I||_F
    let qtq = result.transpose().mul(&result);
    let drift = qtq.sub(&Mat::identity(n)).frob_norm();
    if drift > T::lit(1e-12) {
        // one polar step: Q (3I - Q^T Q)/2 is the Newton–Schulz correction
        let mut corr = qtq.scale(-T::one());
        for i in 0..n {
            corr[(i, i)] += T::lit(3.0);
        }
        result = result.mul(&corr.scale(T::lit(0.5)));
    }
    result
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jacobi_diagonalizes() {
        let mut a = SymMatrix::zeros(3);
        a.set(0, 0, 2.0);
        a.set(1, 1, 3.0);
        a.set(2, 2, 4.0);
        a.set(0, 1, 0.5);
        a.set(0, 2, -0.25);
        a.set(1, 2, 0.75);
        let (w, v) = sym_eigen(&a);
        // reconstruct
        let d = Mat::from_fn(3, |i, j| if i == j { w[i] } else { 0.0 });
        let rec = v.mul(&d).mul(&v.transpose());
        assert!(rec.sub(&a.to_mat()).frob_norm() < 1e-13);
        assert!(w[0] >= w[1] && w[1] >= w[2]);
    }

    #[test]
    fn spd_eigen_relative_accuracy_extreme_spread() {
        // rotation of diag(e^14, 1, e^-14): eigenvalues must survive with
        // relative accuracy despite the e^28 spread (the assembly of the
        // test matrix itself costs a few e-11, so the bar is 1e-9)
        let th = 0.7f64;
        let (c, s) = (th.cos(), th.sin());
        let q = Mat::from_rows(3, &[&[c, -s, 0.0], &[s, c, 0.0], &[0.0, 0.0, 1.0]]);
        let lam = [14.0f64.exp(), 1.0, (-14.0f64).exp()];
        let d = Mat::from_fn(3, |i, j| if i == j { lam[i] } else { 0.0 });
        let a = q.mul(&d).mul(&q.transpose());
        let (w, _) = spd_eigen(&a).unwrap();
        for (got, want) in w.iter().zip(lam.iter()) {
            assert!(
                ((got - want) / want).abs() < 1e-9,
                "eigenvalue {got} vs {want}"
            );
        }
        // moderate spread: near machine accuracy
        let lam2 = [3.0f64.exp(), 1.0, (-3.0f64).exp()];
        let d2 = Mat::from_fn(3, |i, j| if i == j { lam2[i] } else { 0.0 });
        let a2 = q.mul(&d2).mul(&q.transpose());
        let (w2, v2) = spd_eigen(&a2).unwrap();
        for (got, want) in w2.iter().zip(lam2.iter()) {
            assert!(((got - want) / want).abs() < 1e-13);
        }
        // reconstruction
        let dd = Mat::from_fn(3, |i, j| if i == j { w2[i] } else { 0.0 });
        let rec = v2.mul(&dd).mul(&v2.transpose());
        assert!(rec.sub(&a2).frob_norm() / a2.frob_norm() < 1e-14);
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let a = Mat::from_rows(2, &[&[1.0, 2.0], &[2.0, 1.0]]);
        assert!(matches!(cholesky(&a), Err(Error::NotPositiveDefinite)));
    }

    #[test]
    fn expm_skew_rotation_2d_block() {
        // exp of theta * (e1 e2 - e2 e1) is a rotation by theta
        let mut u = SkewMatrix::zeros(3);
        let theta = 1.234f64;
        u.set_upper(0, 1, theta);
        let q = expm_skew(&u);
        assert!((q[(0, 0)] - theta.cos()).abs() < 1e-14);
        assert!((q[(0, 1)] - theta.sin()).abs() < 1e-14);
        assert!((q[(1, 0)] + theta.sin()).abs() < 1e-14);
        assert!((q[(2, 2)] - 1.0).abs() < 1e-15);
        let drift = q.transpose().mul(&q).sub(&Mat::identity(3)).frob_norm();
        assert!(drift < 1e-14);
    }

    #[test]
    fn det_of_known_matrix() {
        let a = Mat::<f64>::from_rows(3, &[&[2.0, 0.0, 0.0], &[0.0, 0.5, 0.0], &[0.0, 0.0, 1.0]]);
        assert!((a.det() - 1.0).abs() < 1e-15);
    }
}

//! The fiber geometry: symmetric positive definite matrices of determinant
//! one, their exp/log, Cartan (polar) decomposition, the congruence action
//! and the fiber distance.
//!
//! A point of the fiber is a symmetric positive definite matrix `P` with
//! `det P = 1`. Writing `P = k e^{2b} k^T` with `k` special orthogonal and
//! `b` a traceless diagonal vector, the distance to the identity is `||b||`,
//! so the fiber distance between `P` and `Q` is
//!
//! ```text
//! d(P, Q) = ( 1/4 * sum_i log^2 mu_i )^{1/2},   mu_i = eig(P^{-1} Q).
//! ```
//!
//! The quarter normalizes the log-eigenvalues of the *metric* matrix, whose
//! spectrum is `e^{2 b_i}`, back to the `b`-vector.

use crate::error::{Error, Result};
use crate::linalg::{cholesky, solve_lower, spd_eigen, sym_eigen, Mat, SymMatrix};
use crate::real::Real;

pub use crate::linalg::SkewMatrix;

/// Tolerance on `|det - 1|` for determinant-one matrices.
pub const DET_ONE_TOL: f64 = 1e-10;
/// Tolerance on `|trace|` for traceless tangent vectors (at f64).
pub const TRACE_TOL: f64 = 1e-12;

/// Trace tolerance at a given scalar and magnitude scale: the f64 contract
/// value, widened only when the scalar's own epsilon demands it (f32).
fn trace_tol<T: Real>(scale: T) -> T {
    T::lit(TRACE_TOL).max(T::epsilon() * T::lit(32.0) * (T::one() + scale))
}

/// Traceless diagonal vector: the log-scale radial coordinate of a fiber
/// point. The trace-zero invariant is enforced on construction.
#[derive(Debug, Clone, PartialEq)]
pub struct TracelessDiag<T> {
    b: Vec<T>,
}

impl<T: Real> TracelessDiag<T> {
    /// Wrap a vector that is already traceless (up to 1e-12 at f64).
    pub fn new(b: Vec<T>) -> Result<Self> {
        let sum: T = b.iter().fold(T::zero(), |acc, &x| acc + x);
        let scale = b.iter().fold(T::zero(), |acc, &x| acc.max(x.abs()));
        if sum.abs() > trace_tol(scale) {
            return Err(Error::NonZeroTrace(sum.to_f64_lossy()));
        }
        Ok(TracelessDiag { b })
    }

    /// Orthogonal projection of an arbitrary vector onto the trace-zero
    /// hyperplane: `v - mean(v) * 1`.
    pub fn project(v: &[T]) -> Self {
        let n = T::lit(v.len() as f64);
        let mean = v.iter().fold(T::zero(), |acc, &x| acc + x) / n;
        TracelessDiag { b: v.iter().map(|&x| x - mean).collect() }
    }

    pub fn zeros(n: usize) -> Self {
        TracelessDiag { b: vec![T::zero(); n] }
    }

    pub fn as_slice(&self) -> &[T] {
        &self.b
    }

    pub fn dim(&self) -> usize {
        self.b.len()
    }

    pub fn norm(&self) -> T {
        self.b.iter().fold(T::zero(), |acc, &x| acc + x * x).sqrt()
    }
}

/// A fiber point: symmetric positive definite with `det = 1` (within 1e-10;
/// the constructor renormalizes).
#[derive(Debug, Clone, PartialEq)]
pub struct SpdDetOne<T> {
    mat: Mat<T>,
}

impl<T: Real> SpdDetOne<T> {
    /// Validate and renormalize an SPD matrix to determinant one.
    pub fn try_new(m: Mat<T>) -> Result<Self> {
        let scale = m.frob_norm().max(T::min_positive_value());
        if m.asymmetry() > T::lit(1e-9) * scale {
            return Err(Error::ShapeMismatch("matrix is not symmetric".into()));
        }
        let sym = SymMatrix::symmetrize(&m).to_mat();
        cholesky(&sym)?; // positive definiteness
        Ok(SpdDetOne { mat: renorm_det_one(sym)? })
    }

    pub fn identity(n: usize) -> Self {
        SpdDetOne { mat: Mat::identity(n) }
    }

    /// Assemble `k e^{2b} k^T` from Cartan data.
    pub fn from_cartan(k: &Mat<T>, b: &TracelessDiag<T>) -> Self {
        let n = b.dim();
        assert_eq!(k.dim(), n);
        let two = T::lit(2.0);
        let mut scaled = Mat::zeros(n);
        for i in 0..n {
            let e = (two * b.as_slice()[i]).exp();
            for j in 0..n {
                scaled[(j, i)] = k[(j, i)] * e;
            }
        }
        let m = scaled.mul_transpose(k);
        // symmetrize away the rounding of the triple product, then scale
        // out its determinant residue
        let sym = SymMatrix::symmetrize(&m).to_mat();
        let mat = renorm_det_one(sym).expect("positive definite by construction");
        SpdDetOne { mat }
    }

    pub fn dim(&self) -> usize {
        self.mat.dim()
    }

    pub fn as_mat(&self) -> &Mat<T> {
        &self.mat
    }

    /// Determinant by compensated elimination; stays accurate however
    /// graded the matrix is.
    pub fn det(&self) -> T {
        crate::linalg::det_compensated(&self.mat)
    }
}

/// Cartan (polar) factors of a fiber point: `P = k e^{2b} k^T`.
///
/// `b` is sorted non-increasing, which picks the canonical Weyl-chamber
/// representative; `k` is special orthogonal. When eigenvalues repeat, `k`
/// is whatever the deterministic eigensolver produced.
#[derive(Debug, Clone)]
pub struct CartanFactors<T> {
    pub k: Mat<T>,
    pub b: TracelessDiag<T>,
}

/// Exponential of a traceless symmetric tangent vector into the fiber.
pub fn spd_exp<T: Real>(x: &SymMatrix<T>) -> Result<SpdDetOne<T>> {
    let tr = x.trace();
    if tr.abs() > trace_tol(x.frob_norm()) {
        return Err(Error::NonZeroTrace(tr.to_f64_lossy()));
    }
    let n = x.dim();
    let (w, v) = sym_eigen(x);
    let mut scaled = Mat::zeros(n);
    for j in 0..n {
        let e = w[j].exp();
        for i in 0..n {
            scaled[(i, j)] = v[(i, j)] * e;
        }
    }
    let m = scaled.mul_transpose(&v);
    let sym = SymMatrix::symmetrize(&m).to_mat();
    // renormalize against the measured determinant of the assembled matrix
    // (assembly rounding shifts it by ~eps * spread, which at spread e^14
    // already grazes the 1e-10 invariant)
    Ok(SpdDetOne { mat: renorm_det_one(sym)? })
}

/// Scale an SPD matrix to determinant one, measuring the determinant with
/// compensated elimination so grading cannot poison the measurement.
fn renorm_det_one<T: Real>(m: Mat<T>) -> Result<Mat<T>> {
    let n = m.dim();
    let det = crate::linalg::det_compensated(&m);
    if det <= T::zero() {
        return Err(Error::NotPositiveDefinite);
    }
    Ok(m.scale((-det.ln() / T::lit(n as f64)).exp()))
}

/// Matrix logarithm of a fiber point; the inverse of [`spd_exp`].
pub fn spd_log<T: Real>(p: &SpdDetOne<T>) -> Result<SymMatrix<T>> {
    let n = p.dim();
    let (w, v) = spd_eigen(p.as_mat())?;
    let mut scaled = Mat::zeros(n);
    for j in 0..n {
        let l = w[j].ln();
        for i in 0..n {
            scaled[(i, j)] = v[(i, j)] * l;
        }
    }
    Ok(SymMatrix::symmetrize(&scaled.mul_transpose(&v)))
}

/// Cartan decomposition `P = k e^{2b} k^T`, `b` non-increasing, `det k = 1`.
pub fn cartan_decompose<T: Real>(p: &SpdDetOne<T>) -> Result<CartanFactors<T>> {
    let n = p.dim();
    let (w, mut v) = spd_eigen(p.as_mat())?; // eigenvalues descending
    let half = T::lit(0.5);
    let mut b: Vec<T> = w.iter().map(|&mu| half * mu.ln()).collect();
    // kill the rounding residue of sum(b) = log(det)/2 = 0
    let mean = b.iter().fold(T::zero(), |acc, &x| acc + x) / T::lit(n as f64);
    for bi in b.iter_mut() {
        *bi -= mean;
    }
    if v.det() < T::zero() {
        for i in 0..n {
            v[(i, n - 1)] = -v[(i, n - 1)];
        }
    }
    Ok(CartanFactors { k: v, b: TracelessDiag::new(b)? })
}

/// Distance between two fiber points:
/// `d(P,Q) = (1/4 sum log^2 mu_i)^{1/2}` over the eigenvalues of `P^{-1}Q`,
/// computed through the symmetric pencil `L^{-1} Q L^{-T}` with `P = L L^T`.
pub fn fiber_distance<T: Real>(p: &SpdDetOne<T>, q: &SpdDetOne<T>) -> Result<T> {
    let n = p.dim();
    if q.dim() != n {
        return Err(Error::ShapeMismatch(format!(
            "fiber points of dimension {n} and {}",
            q.dim()
        )));
    }
    let l = cholesky(p.as_mat())?;
    // W = L^{-1} Q  (column by column), then M = W L^{-T} = (L^{-1} W^T)^T
    let mut w = Mat::zeros(n);
    for j in 0..n {
        let col: Vec<T> = (0..n).map(|i| q.as_mat()[(i, j)]).collect();
        let sol = solve_lower(&l, &col);
        for i in 0..n {
            w[(i, j)] = sol[i];
        }
    }
    let mut m = Mat::zeros(n);
    for j in 0..n {
        let row: Vec<T> = (0..n).map(|i| w[(j, i)]).collect();
        let sol = solve_lower(&l, &row);
        for i in 0..n {
            m[(i, j)] = sol[i];
        }
    }
    let msym = SymMatrix::symmetrize(&m).to_mat();
    let (mu, _) = spd_eigen(&msym)?;
    let mut s = T::zero();
    for &v in &mu {
        let lg = v.ln();
        s += lg * lg;
    }
    Ok((s * T::lit(0.25)).sqrt())
}

/// Congruence action `h . P = h^T P h` of a unimodular matrix, renormalized
/// back to determinant one.
pub fn congruence_act<T: Real>(h: &Mat<T>, p: &SpdDetOne<T>) -> Result<SpdDetOne<T>> {
    if h.dim() != p.dim() {
        return Err(Error::ShapeMismatch(format!(
            "acting matrix of dimension {} on fiber point of dimension {}",
            h.dim(),
            p.dim()
        )));
    }
    let det = h.det();
    if (det - T::one()).abs() > T::lit(DET_ONE_TOL) {
        return Err(Error::NotUnimodular(det.to_f64_lossy()));
    }
    let m = h.transpose().mul(p.as_mat()).mul(h);
    SpdDetOne::try_new(m)
}

//! Laplace eigenbasis of the flat torus `R^n / (2 pi Z)^n` and the decay
//! schedules that damp it.
//!
//! Eigenfunctions are the real trigonometric modes
//! `psi = c * cos(k.x)` and `c * sin(k.x)` over nonzero integer lattice
//! vectors `k`, with `c = sqrt(2/(2 pi)^n)` so that `int psi^2 dv = 1`.
//! The eigenvalue is exactly `|k|^2` (kept as an integer). Only canonical
//! lattice vectors (first nonzero component positive) are enumerated; the
//! other sign gives the same pair of modes.
//!
//! The constant eigenfunction is excluded throughout: all spectral sums
//! start at the first nonzero eigenvalue.

use crate::error::{Error, Result};
use crate::real::Real;
use serde::{Deserialize, Serialize};

/// cos/sin branch of a real torus mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    Cos,
    Sin,
}

/// One Laplace eigenfunction of the reference torus.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EigenMode {
    /// 1-based position in the non-decreasing eigenvalue ordering.
    pub index: usize,
    /// Canonical lattice vector (first nonzero component positive).
    pub lattice_vector: Vec<i32>,
    pub branch: Branch,
    /// Eigenvalue `|k|^2`, exact.
    pub lambda: u64,
    /// L2 normalization constant `sqrt(2/(2 pi)^n)`.
    pub norm_const: f64,
}

/// Truncated eigenbasis, always extended to a complete eigenspace.
#[derive(Debug, Clone)]
pub struct SpectralBasis {
    n: usize,
    modes: Vec<EigenMode>,
}

/// JSON-facing description of a basis (for experiment provenance).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BasisDescriptor {
    pub n: usize,
    pub j: usize,
    pub modes: Vec<EigenMode>,
}

pub fn norm_const(n: usize) -> f64 {
    (2.0 / (2.0 * std::f64::consts::PI).powi(n as i32)).sqrt()
}

/// All canonical lattice vectors with `|k|^2 = lambda`, sorted
/// lexicographically.
fn canonical_shell(n: usize, lambda: u64) -> Vec<Vec<i32>> {
    let kmax = (lambda as f64).sqrt().floor() as i64 + 1;
    let mut out = Vec::new();
    let mut v = vec![-kmax; n];
    'outer: loop {
        let norm: i64 = v.iter().map(|&x| x * x).sum();
        if norm as u64 == lambda {
            if let Some(first) = v.iter().find(|&&x| x != 0) {
                if *first > 0 {
                    out.push(v.iter().map(|&x| x as i32).collect());
                }
            }
        }
        for i in (0..n).rev() {
            if v[i] < kmax {
                v[i] += 1;
                continue 'outer;
            }
            v[i] = -kmax;
        }
        break;
    }
    out.sort();
    out
}

/// Build the torus eigenbasis with at least `j_min` modes, rounded up to a
/// complete eigenspace. Ordering: non-decreasing eigenvalue, then
/// lexicographic lattice vector, then cos before sin.
pub fn torus_basis(n: usize, j_min: usize) -> Result<SpectralBasis> {
    if n < 3 {
        return Err(Error::DimensionTooSmall(n));
    }
    if j_min == 0 {
        return Err(Error::BadParameter("j_min must be at least 1".into()));
    }
    let c = norm_const(n);
    let mut modes = Vec::new();
    let mut lambda = 0u64;
    while modes.len() < j_min {
        lambda += 1;
        for k in canonical_shell(n, lambda) {
            for branch in [Branch::Cos, Branch::Sin] {
                modes.push(EigenMode {
                    index: modes.len() + 1,
                    lattice_vector: k.clone(),
                    branch,
                    lambda,
                    norm_const: c,
                });
            }
        }
    }
    Ok(SpectralBasis { n, modes })
}

impl SpectralBasis {
    pub fn dim(&self) -> usize {
        self.n
    }

    /// Number of retained modes.
    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn modes(&self) -> &[EigenMode] {
        &self.modes
    }

    /// Largest eigenvalue retained.
    pub fn max_lambda(&self) -> u64 {
        self.modes.last().map(|m| m.lambda).unwrap_or(0)
    }

    /// `max_j |k_j|_inf`, the quantity the Nyquist condition is about.
    pub fn max_k_inf(&self) -> u32 {
        self.modes
            .iter()
            .flat_map(|m| m.lattice_vector.iter().map(|k| k.unsigned_abs()))
            .max()
            .unwrap_or(0)
    }

    /// Evaluate `psi_j` at an arbitrary point of the torus.
    pub fn eval<T: Real>(&self, mode: &EigenMode, x: &[T]) -> T {
        debug_assert_eq!(x.len(), self.n);
        let mut dot = T::zero();
        for (ki, xi) in mode.lattice_vector.iter().zip(x.iter()) {
            dot += T::lit(*ki as f64) * *xi;
        }
        let c = T::lit(mode.norm_const);
        match mode.branch {
            Branch::Cos => c * dot.cos(),
            Branch::Sin => c * dot.sin(),
        }
    }

    pub fn descriptor(&self) -> BasisDescriptor {
        BasisDescriptor { n: self.n, j: self.modes.len(), modes: self.modes.clone() }
    }

    /// Short provenance id, e.g. `torus:n=3:J=256:lmax=16`.
    pub fn id(&self) -> String {
        format!("torus:n={}:J={}:lmax={}", self.n, self.modes.len(), self.max_lambda())
    }
}

/// Spectral damping `beta_j = F(lambda_j)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DecaySchedule<T> {
    /// `beta = lambda^{-s}`
    PowerLaw { s: T },
    /// `beta = exp(-t lambda)`
    HeatKernel { t: T },
}

impl<T: Real> DecaySchedule<T> {
    pub fn validate(&self) -> Result<()> {
        match self {
            DecaySchedule::PowerLaw { s } if *s <= T::zero() => {
                Err(Error::BadParameter(format!("power-law exponent s={s} must be positive")))
            }
            DecaySchedule::HeatKernel { t } if *t <= T::zero() => {
                Err(Error::BadParameter(format!("heat-kernel time t={t} must be positive")))
            }
            _ => Ok(()),
        }
    }

    pub fn beta(&self, lambda: u64) -> T {
        let l = T::lit(lambda as f64);
        match self {
            DecaySchedule::PowerLaw { s } => l.powf(-*s),
            DecaySchedule::HeatKernel { t } => (-*t * l).exp(),
        }
    }

    pub fn id(&self) -> String {
        match self {
            DecaySchedule::PowerLaw { s } => format!("power:s={s}"),
            DecaySchedule::HeatKernel { t } => format!("heat:t={t}"),
        }
    }
}

/// Evaluate the decay coefficients over a basis: positive, non-increasing,
/// constant within eigenspaces.
pub fn decay_eval<T: Real>(schedule: &DecaySchedule<T>, basis: &SpectralBasis) -> Result<Vec<T>> {
    schedule.validate()?;
    Ok(basis.modes().iter().map(|m| schedule.beta(m.lambda)).collect())
}

/// Smallest power-law exponent granting almost-sure `C^q` fields in
/// dimension `n`: callers need `s > q/2 + n/4`.
pub fn regularity_floor(q: u32, n: usize) -> f64 {
    q as f64 / 2.0 + n as f64 / 4.0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_eigenspace_of_t3() {
        let b = torus_basis(3, 1).unwrap();
        assert_eq!(b.len(), 6);
        assert!(b.modes().iter().all(|m| m.lambda == 1));
        let vecs: Vec<_> = b.modes().iter().map(|m| m.lattice_vector.clone()).collect();
        assert_eq!(vecs[0], vec![0, 0, 1]);
        assert_eq!(vecs[2], vec![0, 1, 0]);
        assert_eq!(vecs[4], vec![1, 0, 0]);
        assert_eq!(b.modes()[0].branch, Branch::Cos);
        assert_eq!(b.modes()[1].branch, Branch::Sin);
    }

    #[test]
    fn rounds_up_to_complete_eigenspace() {
        // asking for 7 modes pulls in the whole lambda=2 shell: 6+12 = 18
        let b = torus_basis(3, 7).unwrap();
        assert_eq!(b.len(), 18);
        assert_eq!(b.max_lambda(), 2);
    }

    #[test]
    fn rejects_low_dimension() {
        assert!(matches!(torus_basis(2, 1), Err(Error::DimensionTooSmall(2))));
    }

    #[test]
    fn lambda_is_exact_norm() {
        let b = torus_basis(3, 100).unwrap();
        for m in b.modes() {
            let norm: i64 = m.lattice_vector.iter().map(|&k| (k as i64) * (k as i64)).sum();
            assert_eq!(norm as u64, m.lambda);
        }
        // non-decreasing
        for w in b.modes().windows(2) {
            assert!(w[0].lambda <= w[1].lambda);
        }
    }

    #[test]
    fn decay_examples() {
        let b = torus_basis(3, 7).unwrap();
        let beta = decay_eval(&DecaySchedule::PowerLaw { s: 1.0 }, &b).unwrap();
        assert_eq!(beta[0], 1.0);
        assert_eq!(beta[17], 0.5);
        let beta_h = decay_eval(&DecaySchedule::HeatKernel { t: 1.0 }, &b).unwrap();
        assert!((beta_h[0] - (-1f64).exp()).abs() < 1e-15);
        // constant within eigenspaces
        assert_eq!(beta[0], beta[5]);
        assert_eq!(beta[6], beta[17]);
    }

    #[test]
    fn decay_rejects_bad_parameters() {
        let b = torus_basis(3, 1).unwrap();
        assert!(decay_eval(&DecaySchedule::PowerLaw { s: 0.0 }, &b).is_err());
        assert!(decay_eval(&DecaySchedule::HeatKernel { t: -1.0 }, &b).is_err());
    }

    #[test]
    fn regularity_floor_values() {
        assert_eq!(regularity_floor(0, 3), 0.75);
        assert_eq!(regularity_floor(2, 3), 1.75);
        assert_eq!(regularity_floor(0, 4), 1.0);
    }
}

//! The two distances from the reference metric to a sampled metric.
//!
//! `Omega_2^2 = int_M sum_i b_i(x)^2 dv` by exact grid quadrature (the
//! integrand is a trigonometric polynomial below the Nyquist bound, so the
//! nodal sum *is* the integral), and the Lipschitz distance
//! `rho = 2 sup_{i,x} |b_i(x)|` by node supremum.

use crate::error::Result;
use crate::fields::{GridSpec, MetricField, RadialField};
use crate::linalg::spd_eigen;
use crate::real::Real;
use std::io::Write;

/// Squared L2 distance of the sampled metric from the reference, by grid
/// quadrature of `sum_i b_i^2`.
pub fn omega2_sq<T: Real>(field: &RadialField<T>) -> T {
    let w = T::lit(field.grid.weight());
    field.b.iter().fold(T::zero(), |acc, &x| acc + x * x) * w
}

/// The same quantity in coefficient space: with `c_j = beta_j pi_n(xi_j)`,
/// orthonormality collapses the integral to `sum_j |c_j|^2`.
pub fn omega2_sq_from_coefficients<T: Real>(coeffs: &[T]) -> T {
    coeffs.iter().fold(T::zero(), |acc, &x| acc + x * x)
}

/// Lipschitz distance estimate `2 max_{i,x} |b_i(x)|` over the grid nodes;
/// a lower bound on the continuum supremum.
pub fn lipschitz_rho<T: Real>(field: &RadialField<T>) -> T {
    let two = T::lit(2.0);
    two * field.b.iter().fold(T::zero(), |acc, &x| acc.max(x.abs()))
}

/// Pointwise fiber distance `d_x(g0, g1)` at every node, computed from the
/// eigenvalues of the assembled metric (conjugation by the angular rotation
/// leaves the spectrum alone, so this equals `|b(x)|`).
pub fn fiberwise_distance_field<T: Real>(metric: &MetricField<T>) -> Result<Vec<T>> {
    let _n = metric.grid.n;
    let nodes = metric.grid.num_nodes();
    let quarter = T::lit(0.25);
    let mut out = Vec::with_capacity(nodes);
    for node in 0..nodes {
        let m = metric.node_matrix(node);
        let (mu, _) = spd_eigen(&m)?;
        let mut s = T::zero();
        for &v in &mu {
            let lg = v.ln();
            s += lg * lg;
        }
        out.push((s * quarter).sqrt());
    }
    Ok(out)
}

/// Integrate a squared nodal field against the quadrature weight.
pub fn integrate_sq<T: Real>(values: &[T], grid: &GridSpec) -> T {
    let w = T::lit(grid.weight());
    values.iter().fold(T::zero(), |acc, &x| acc + x * x) * w
}

/// Per-sample distance summary, as emitted to CSV.
#[derive(Debug, Clone, Copy)]
pub struct DistanceRecord {
    pub seed: u64,
    pub omega2_sq: f64,
    pub rho: f64,
}

pub const DISTANCE_CSV_SCHEMA: &str = "# metv distance records, schema v1";

/// One row per sample: `seed,omega2_sq,rho`, schema versioned in a leading
/// comment line.
pub fn write_distance_csv(
    records: &[DistanceRecord],
    context: &str,
    out: &mut impl Write,
) -> Result<()> {
    writeln!(out, "{DISTANCE_CSV_SCHEMA} ({context})")?;
    writeln!(out, "seed,omega2_sq,rho")?;
    for r in records {
        writeln!(out, "{},{:.17e},{:.17e}", r.seed, r.omega2_sq, r.rho)?;
    }
    Ok(())
}

//! Discrete-geometry checks: flat diameter against the closed form,
//! conformal scaling, the discrete dispersion symbol and its multiplicity,
//! sandwich inequalities on sampled metrics, distance averages, and the
//! certificate series against direct summation.

use metv_core::fields::{assemble_metric, sample_angular, sample_radial, GridSpec};
use metv_core::geomlab::{
    diameter_of_graph, discrete_diameter, discrete_spectrum, distance_average, flat_symbol,
    integrability_certificate, sandwich_check_diam, sandwich_check_eig, CertKind, GridGraph,
    MetricGrid,
};
use metv_core::seeding::sample_seed;
use metv_core::spectrum::{torus_basis, DecaySchedule};

fn power2() -> DecaySchedule<f64> {
    DecaySchedule::PowerLaw { s: 2.0 }
}

#[test]
fn flat_diameter_m16() {
    // straight diagonal moves reach the far corner: pi sqrt(3), exactly on
    // even grids; the assertion brackets the chamfer-metric distortion
    let grid = GridSpec::new(3, 16);
    let mg = MetricGrid::flat(grid);
    let rep = discrete_diameter(&mg);
    assert!(rep.exact, "m=16 must use every source");
    assert!(rep.value >= 5.441 && rep.value <= 5.90, "diameter {}", rep.value);
    assert!((rep.value - std::f64::consts::PI * 3f64.sqrt()).abs() < 1e-12);
}

#[test]
fn conformal_scaling_scales_diameter_exactly() {
    // e^{2c} g scales every edge length by e^c (test-only metric; bypasses
    // the det = 1 invariant on purpose)
    let grid = GridSpec::new(3, 8);
    let flat = MetricGrid::flat(grid);
    let c = 0.4f64;
    let scale = (2.0 * c).exp();
    let scaled_g: Vec<f64> = flat.g.iter().map(|v| v * scale).collect();
    let scaled = MetricGrid::from_matrices(grid, scaled_g).unwrap();
    let d0 = discrete_diameter(&flat).value;
    let d1 = discrete_diameter(&scaled).value;
    assert!((d1 - c.exp() * d0).abs() < 1e-12 * d1);
}

#[test]
fn identical_fields_identical_diameters() {
    let basis = torus_basis(3, 30).unwrap();
    let grid = GridSpec::new(3, 8);
    let r1 = sample_radial(&basis, &power2(), grid, 5).unwrap();
    let r2 = sample_radial(&basis, &power2(), grid, 5).unwrap();
    let m1 = assemble_metric(&r1, None).unwrap();
    let m2 = assemble_metric(&r2, None).unwrap();
    let d1 = discrete_diameter(&MetricGrid::from_field(&m1).unwrap()).value;
    let d2 = discrete_diameter(&MetricGrid::from_field(&m2).unwrap()).value;
    assert_eq!(d1, d2);
}

#[test]
fn sampled_source_mode_above_threshold() {
    // m = 18 has 5832 nodes > 5000: the report must flag the estimate
    let grid = GridSpec::new(3, 18);
    let mg = MetricGrid::flat(grid);
    let rep = discrete_diameter(&mg);
    assert!(!rep.exact);
    // still the exact flat value here: the far corner is seen from any source
    assert!((rep.value - std::f64::consts::PI * 3f64.sqrt()).abs() < 1e-12);
}

#[test]
fn dispersion_symbol_and_multiplicity_m16() {
    let grid = GridSpec::new(3, 16);
    let mg = MetricGrid::flat(grid);
    let rep = discrete_spectrum(&mg, 7).unwrap();
    let m = 16.0f64;
    let want = (m / std::f64::consts::PI * (std::f64::consts::PI / m).sin()).powi(2);
    // lambda_1 matches the 1-D stencil symbol
    assert!((rep.eigenvalues[0] - want).abs() <= 1e-6, "{} vs {want}", rep.eigenvalues[0]);
    // multiplicity six: three axes times two branches
    for j in 0..6 {
        assert!(
            (rep.eigenvalues[j] - rep.eigenvalues[0]).abs() <= 1e-8,
            "eigenvalue {j} breaks the multiplicity: {:?}",
            &rep.eigenvalues[..6]
        );
    }
    // the seventh belongs to the lambda = 2 shell
    let want2 = flat_symbol(&grid, &[1, 1, 0]);
    assert!((rep.eigenvalues[6] - want2).abs() <= 1e-6);
}

#[test]
fn spectrum_input_gates() {
    let grid = GridSpec::new(3, 6);
    let mg = MetricGrid::flat(grid);
    assert!(discrete_spectrum(&mg, 0).is_err());
    assert!(discrete_spectrum(&mg, 3).is_err()); // m < 8
}

#[test]
fn sandwich_trivial_identity_metric() {
    // g1 = g0: ratio exactly 1, rho_hat = 0
    let basis = torus_basis(3, 6).unwrap();
    let grid = GridSpec::new(3, 8);
    let sampler = metv_core::fields::FieldSampler::<f64>::new(&basis, grid).unwrap();
    let zero = sampler.radial_from_coefficients(&vec![0.0; basis.len() * 3], 0, "zero");
    let metric = assemble_metric(&zero, None).unwrap();
    let flat = MetricGrid::flat(grid);
    let flat_diam = discrete_diameter(&flat).value;
    let flat_eigs = discrete_spectrum(&flat, 3).unwrap().eigenvalues;
    let diam = sandwich_check_diam(&metric, flat_diam).unwrap();
    assert_eq!(diam.rho_hat, 0.0);
    assert_eq!(diam.ratio, 1.0);
    assert!(diam.pass);
    let eig = sandwich_check_eig(&metric, &flat_eigs, 3).unwrap();
    assert!(eig.pass);
    for r in &eig.ratios {
        assert!((r - 1.0).abs() < 1e-9);
    }
}

#[test]
fn sandwich_checks_pass_on_samples() {
    let basis = torus_basis(3, 30).unwrap();
    let grid = GridSpec::new(3, 8);
    let flat = MetricGrid::flat(grid);
    let flat_diam = discrete_diameter(&flat).value;
    let flat_eigs = discrete_spectrum(&flat, 4).unwrap().eigenvalues;
    for i in 0..10 {
        let seed = sample_seed(2712, i);
        let radial = sample_radial(&basis, &power2(), grid, seed).unwrap();
        let angular = sample_angular(&basis, &power2(), grid, seed).unwrap();
        let metric = assemble_metric(&radial, Some(&angular)).unwrap();
        let diam = sandwich_check_diam(&metric, flat_diam).unwrap();
        assert!(diam.pass, "diameter sandwich failed: {diam:?}");
        let eig = sandwich_check_eig(&metric, &flat_eigs, 4).unwrap();
        assert!(eig.pass, "eigenvalue sandwich failed: {eig:?}");
    }
}

#[test]
fn constant_conformal_field_ratios() {
    // b = (c, -c, 0) constant: eigenvalue ratios land inside [e^{-2c}, e^{2c}]
    let grid = GridSpec::new(3, 8);
    let flat = MetricGrid::flat(grid);
    let flat_eigs = discrete_spectrum(&flat, 3).unwrap().eigenvalues;
    let c = 0.3f64;
    let nodes = grid.num_nodes();
    let mut g = vec![0.0; nodes * 9];
    for node in 0..nodes {
        g[node * 9] = (2.0 * c).exp();
        g[node * 9 + 4] = (-2.0 * c).exp();
        g[node * 9 + 8] = 1.0;
    }
    let mg = MetricGrid::from_matrices(grid, g).unwrap();
    let eigs = discrete_spectrum(&mg, 3).unwrap().eigenvalues;
    let rho = 2.0 * c;
    for (a, b) in eigs.iter().zip(flat_eigs.iter()) {
        let ratio = a / b;
        assert!(ratio >= (-2.0 * rho).exp() - 1e-9 && ratio <= (2.0 * rho).exp() + 1e-9);
    }
}

#[test]
fn distance_average_flat_self_consistency() {
    let grid = GridSpec::new(3, 16);
    let mg = MetricGrid::flat(grid);
    // two disjoint deterministic source sets agree within 5% (flat torus is
    // homogeneous, so the agreement is in fact exact up to rounding)
    let e1 = distance_average(&mg, 1.0, 64, 1);
    let e2 = distance_average(&mg, 1.0, 64, 2);
    assert!((e1 - e2).abs() <= 0.05 * e1.max(e2));
}

#[test]
fn distance_average_t0_gives_volume_squared() {
    let grid = GridSpec::new(3, 8);
    let mg = MetricGrid::flat(grid);
    let e0 = distance_average(&mg, 0.0, 512, 3);
    // 0^0 = 1 for the diagonal terms under powf? no: 0f64.powf(0.0) = 1,
    // so the t = 0 extension counts every pair, giving vol^2
    let want = (2.0 * std::f64::consts::PI).powi(6);
    assert!((e0 - want).abs() <= 1e-9 * want, "{e0} vs {want}");
}

#[test]
fn distance_average_monotone_in_t_when_distances_exceed_one() {
    // scale the flat metric so every nonzero distance is >= 1
    let grid = GridSpec::new(3, 8);
    let flat = MetricGrid::flat(grid);
    let h = grid.spacing();
    let factor: f64 = 1.5 / h; // min edge length becomes 1.5
    let g: Vec<f64> = flat.g.iter().map(|v| v * factor * factor).collect();
    let mg = MetricGrid::from_matrices(grid, g).unwrap();
    let e1 = distance_average(&mg, 1.0, 64, 4);
    let e2 = distance_average(&mg, 2.0, 64, 4);
    assert!(e1 <= e2, "{e1} > {e2}");
}

#[test]
fn certificate_against_direct_summation() {
    // sigma^2 = 1, alpha = 1, n = 3, c = 0.1, N = 10
    let cert =
        integrability_certificate(0.1, 1.0, 1.0, 3, CertKind::Diameter, 10).unwrap();
    assert!(cert.converges);
    let direct: f64 = (10u64..4000)
        .map(|k| {
            let kf = k as f64;
            6.0 * (0.1 * kf * kf + 0.5 * (kf - 1.0) - (kf - 1.0) * (kf - 1.0) / 8.0).exp()
        })
        .sum();
    let bound = cert.tail_bound.unwrap();
    assert!(
        (bound - direct).abs() <= 1e-9 * direct.max(1.0),
        "{bound} vs direct {direct}"
    );
    assert!(cert.remainder.unwrap() < 1e-12);
}

#[test]
fn certificate_eigenvalue_shift() {
    let grid = GridSpec::new(3, 8);
    let flat = MetricGrid::flat(grid);
    let l1 = discrete_spectrum(&flat, 1).unwrap().eigenvalues[0];
    let beta = l1.ln() / 2.0;
    let cert =
        integrability_certificate(0.05, 1.0, 1.0, 3, CertKind::Eigenvalue { beta }, 5).unwrap();
    assert!(cert.converges);
    let direct: f64 = (5u64..4000)
        .map(|k| {
            let kf = k as f64;
            6.0 * (0.05 * (kf + beta) * (kf + beta) + 0.5 * (kf - 1.0)
                - (kf - 1.0) * (kf - 1.0) / 8.0)
                .exp()
        })
        .sum();
    assert!((cert.tail_bound.unwrap() - direct).abs() <= 1e-9 * direct.max(1.0));
}

#[test]
fn certificate_rejects_bad_parameters() {
    assert!(integrability_certificate(0.1, 0.0, 1.0, 3, CertKind::Diameter, 1).is_err());
    assert!(integrability_certificate(-0.1, 1.0, 1.0, 3, CertKind::Diameter, 1).is_err());
}

#[test]
fn divergence_witness_when_over_threshold() {
    let cert = integrability_certificate(0.2, 1.0, 1.0, 3, CertKind::Diameter, 5).unwrap();
    assert!(!cert.converges);
    let (k, term) = cert.divergence_witness.unwrap();
    assert!(term >= 1.0);
    assert!(k >= 5);
}

#[test]
fn diameter_growth_functional_stabilizes() {
    // Monte Carlo E[h(diam(g1))] with h(u) = exp(c ln^2 u) and c below the
    // integrability threshold: finite, and the running mean settles. Small
    // grid so that 1e4 samples stay cheap.
    use metv_core::fields::sigma_sup;
    let basis = torus_basis(3, 18).unwrap();
    let grid = GridSpec::new(3, 5);
    let schedule = power2();
    let sigma_sq = sigma_sup(&schedule, &basis, &grid).unwrap();
    let c = 0.5 / (8.0 * sigma_sq);
    let n = 10_000usize;
    let mut running = 0.0f64;
    let mut half_mean = 0.0f64;
    for i in 0..n {
        let radial = sample_radial(&basis, &schedule, grid, sample_seed(606, i as u64)).unwrap();
        let metric = assemble_metric(&radial, None).unwrap();
        let d = discrete_diameter(&MetricGrid::from_field(&metric).unwrap()).value;
        let h = (c * d.ln() * d.ln()).exp();
        assert!(h.is_finite());
        running += h;
        if i + 1 == n / 2 {
            half_mean = running / (n / 2) as f64;
        }
    }
    let full_mean = running / n as f64;
    assert!(full_mean.is_finite());
    assert!(
        (half_mean - full_mean).abs() <= 0.05 * full_mean,
        "running mean has not stabilized: {half_mean} vs {full_mean}"
    );
}

#[test]
fn graph_reuse_matches_one_shot() {
    let grid = GridSpec::new(3, 8);
    let mg = MetricGrid::flat(grid);
    let graph = GridGraph::build(&mg);
    let a = diameter_of_graph(&graph);
    let b = discrete_diameter(&mg);
    assert_eq!(a.value, b.value);
}

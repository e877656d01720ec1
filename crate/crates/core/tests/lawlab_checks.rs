//! Law checks at desk scale: Monte Carlo agreement of the MGF and the
//! characteristic function, the tail bound sandwich over oracle draws, the
//! Lipschitz tail bound dominance, and CDF inversion against the empirical
//! CDF.

use metv_core::lawlab::{gil_pelaez_cdf, law_constants, rho_tail_upper, LawConstants};
use metv_core::seeding::rng_from;
use metv_core::spectrum::{decay_eval, torus_basis, DecaySchedule};
use metv_core::stats;

fn small_constants() -> LawConstants {
    // basis through lambda = 4, power law s = 2
    let basis = torus_basis(3, 34).unwrap();
    law_constants(&DecaySchedule::PowerLaw { s: 2.0 }, &basis, 3).unwrap()
}

#[test]
fn law_constants_from_schedule() {
    let basis = torus_basis(3, 6).unwrap();
    let c = law_constants(&DecaySchedule::PowerLaw { s: 2.0 }, &basis, 3).unwrap();
    assert_eq!(c.betas.len(), 6);
    assert_eq!(c.a_sq, 12.0); // 2 * 6 * 1
    assert_eq!(c.a_inf, 1.0);
    assert_eq!(c.groups, vec![(1.0, 6)]);
}

#[test]
fn mgf_and_charfn_against_monte_carlo() {
    let c = small_constants();
    let n = 100_000usize;
    let mut rng = rng_from(2001);
    let ws: Vec<f64> = (0..n).map(|_| c.oracle_sample(&mut rng)).collect();
    for frac in [0.05, 0.1, 0.2] {
        let t = frac / c.a_inf;
        let analytic = c.mgf(t).unwrap();
        let vals: Vec<f64> = ws.iter().map(|&w| (t * w).exp()).collect();
        let mc = stats::mean(&vals);
        let se = (stats::variance(&vals) / n as f64).sqrt();
        assert!((mc - analytic).abs() <= 3.0 * se, "t={t}: {mc} vs {analytic} (se {se})");
    }
    for t in [0.1, 1.0, 5.0] {
        let phi = c.charfn(t);
        let re: Vec<f64> = ws.iter().map(|&w| (t * w).cos()).collect();
        let im: Vec<f64> = ws.iter().map(|&w| (t * w).sin()).collect();
        let se_re = (stats::variance(&re) / n as f64).sqrt();
        let se_im = (stats::variance(&im) / n as f64).sqrt();
        assert!((stats::mean(&re) - phi.re).abs() <= 3.0 * se_re, "re at t={t}");
        assert!((stats::mean(&im) - phi.im).abs() <= 3.0 * se_im, "im at t={t}");
    }
}

#[test]
fn tail_bounds_bracket_the_empirical_tail() {
    let c = small_constants();
    let n = 100_000usize;
    let mut rng = rng_from(2002);
    let mut ws: Vec<f64> = (0..n).map(|_| c.oracle_sample(&mut rng)).collect();
    ws.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let a = c.a_sq.sqrt();
    let hi = ws[(0.9999 * n as f64) as usize].sqrt();
    for i in 0..25 {
        let r = a + (hi - a) * i as f64 / 24.0;
        let k = (n - ws.partition_point(|&v| v <= r * r)) as u64;
        let emp = k as f64 / n as f64;
        let hw = stats::wilson_halfwidth(k, n as u64, 1.0);
        let upper = c.tail_upper_lm(r).unwrap();
        let lower = c.tail_lower_exact(r);
        assert!(lower - 3.0 * hw <= emp, "lower {lower} vs emp {emp} at R={r}");
        assert!(emp <= upper + 3.0 * hw, "upper {upper} vs emp {emp} at R={r}");
    }
}

#[test]
fn lm_exponent_asymptote() {
    // x(R)^2 ~ R^2 / (2 beta_1^2) as R grows
    let c = small_constants();
    let r = 1e6;
    let x = c.x_of_r(r).unwrap();
    let want = r * r / (2.0 * c.a_inf);
    assert!((x * x / want - 1.0).abs() < 1e-2);
}

#[test]
fn gil_pelaez_matches_empirical_cdf() {
    let c = small_constants();
    let n = 200_000usize;
    let mut rng = rng_from(2003);
    let mut ws: Vec<f64> = (0..n).map(|_| c.oracle_sample(&mut rng)).collect();
    ws.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let hi = ws[n - 1] * 1.05;
    let grid: Vec<f64> = (1..=256).map(|i| hi * i as f64 / 256.0).collect();
    let sup = stats::sup_norm_cdf_on_grid(&ws, |u| gil_pelaez_cdf(&c, u), &grid);
    // KS-type noise at 2e5 samples is ~0.003; stay inside 0.01
    assert!(sup < 0.01, "sup norm {sup}");
}

#[test]
fn rho_bound_dominates_small_scale() {
    // basis through lambda = 4 on a Nyquist-minimal grid
    use metv_core::fields::{sigma_sup, FieldSampler, GridSpec};
    let basis = torus_basis(3, 34).unwrap();
    let grid = GridSpec::new(3, 5);
    let schedule = DecaySchedule::PowerLaw { s: 2.0 };
    let sampler = FieldSampler::<f64>::new(&basis, grid).unwrap();
    let betas = decay_eval(&schedule, &basis).unwrap();
    let sigma_sq = sigma_sup(&schedule, &basis, &grid).unwrap();
    let n = 20_000usize;
    let mut scratch = Vec::new();
    let mut rhos: Vec<f64> = (0..n)
        .map(|i| {
            let coeffs =
                sampler.radial_coefficients(&betas, metv_core::seeding::sample_seed(88, i as u64));
            2.0 * sampler.radial_sup_abs(&coeffs, &mut scratch)
        })
        .collect();
    rhos.sort_by(|a, b| a.partial_cmp(b).unwrap());
    // fit alpha on the tail grid, then check dominance wherever at least
    // 100 exceedances exist
    let q999 = rhos[(0.999 * n as f64) as usize];
    let lo = rhos[n / 2];
    let r100 = rhos[n - 100];
    let tail = |r: f64| -> (u64, f64) {
        let k = (n - rhos.partition_point(|&v| v <= r)) as u64;
        (k, k as f64 / n as f64)
    };
    let mut alpha = 0.0f64;
    for i in 0..24 {
        let r = lo + (q999 - lo) * i as f64 / 23.0;
        let (k, p) = tail(r);
        if k == 0 || r <= 0.0 {
            continue;
        }
        let need = 2.0 * (p.ln() - 6.0f64.ln() + r * r / (8.0 * sigma_sq)) / r;
        alpha = alpha.max(need);
    }
    alpha = alpha.max(0.0) + 1e-12;
    for i in 0..24 {
        let r = lo + (r100 - lo) * i as f64 / 23.0;
        let (k, p) = tail(r);
        if k < 100 {
            continue;
        }
        let bound = rho_tail_upper(sigma_sq, alpha, 3, r).unwrap();
        assert!(bound >= p - 1e-12, "bound {bound} below empirical {p} at R={r}");
    }
}

#[test]
fn oracle_seeded_determinism() {
    let c = small_constants();
    let a = metv_core::lawlab::oracle_sample_law(&c, 777);
    let b = metv_core::lawlab::oracle_sample_law(&c, 777);
    assert_eq!(a, b);
    assert_ne!(a, metv_core::lawlab::oracle_sample_law(&c, 778));
}

//! Property suite for the fiber kernels: exp/log round trips, determinant
//! preservation, invariance of the fiber distance, triangle inequality and
//! Cartan reconstruction, at the scales the kernels are contracted for.

use metv_core::linalg::{Mat, SkewMatrix, SymMatrix};
use metv_core::seeding::rng_from;
use metv_core::symspace::{
    cartan_decompose, congruence_act, fiber_distance, spd_exp, spd_log, SpdDetOne, TracelessDiag,
};
use metv_core::Real;
use proptest::prelude::*;
use rand::Rng;

type Rng8 = rand_chacha::ChaCha8Rng;

fn random_traceless_sym(rng: &mut Rng8, scale: f64) -> SymMatrix<f64> {
    let mut m = SymMatrix::zeros(3);
    for i in 0..3 {
        for j in i..3 {
            m.set(i, j, f64::standard_normal(rng));
        }
    }
    let tr = m.trace() / 3.0;
    for i in 0..3 {
        m.set(i, i, m.get(i, i) - tr);
    }
    let norm = m.frob_norm();
    if norm > 0.0 {
        let target = rng.gen_range(0.0..scale).max(1e-3);
        let f = target / norm;
        let mut out = SymMatrix::zeros(3);
        for i in 0..3 {
            for j in i..3 {
                out.set(i, j, m.get(i, j) * f);
            }
        }
        return out;
    }
    m
}

fn random_so3(rng: &mut Rng8) -> Mat<f64> {
    let mut u = SkewMatrix::zeros(3);
    u.set_upper(0, 1, f64::standard_normal(rng));
    u.set_upper(0, 2, f64::standard_normal(rng));
    u.set_upper(1, 2, f64::standard_normal(rng));
    metv_core::linalg::expm_skew(&u)
}

fn random_sl3(rng: &mut Rng8) -> Mat<f64> {
    loop {
        let mut h = Mat::zeros(3);
        for i in 0..3 {
            for j in 0..3 {
                h[(i, j)] = f64::standard_normal(rng);
            }
        }
        let det = h.det();
        if det.abs() < 0.05 {
            continue;
        }
        if det < 0.0 {
            for i in 0..3 {
                h[(i, 0)] = -h[(i, 0)];
            }
        }
        let f = h.det().powf(-1.0 / 3.0);
        return h.scale(f);
    }
}

fn random_point(rng: &mut Rng8, scale: f64) -> SpdDetOne<f64> {
    spd_exp(&random_traceless_sym(rng, scale)).unwrap()
}

#[test]
fn round_trip_and_determinant_10k() {
    let mut rng = rng_from(101);
    for _ in 0..10_000 {
        let x = random_traceless_sym(&mut rng, 10.0);
        let p = spd_exp(&x).unwrap();
        assert!((p.det() - 1.0).abs() <= 1e-10, "det {}", p.det());
        let back = spd_log(&p).unwrap();
        let err = back.to_mat().sub(&x.to_mat()).frob_norm();
        assert!(err <= 1e-8, "round trip error {err} at |X| = {}", x.frob_norm());
        assert!(back.trace().abs() <= 1e-9);
    }
}

#[test]
fn round_trip_at_contract_edge() {
    // |X|_F up to 20. An f64 matrix with eigenvalue spread e^{2s} carries
    // its small eigenvalues only to relative accuracy ~eps * e^{2s}; at
    // s = 28 that floor is ~4e-4, so full 1e-9 recovery is possible only
    // while the spread stays under ~e^16. Assert 1e-9 below that spread
    // and the information-floor bound beyond.
    let mut rng = rng_from(102);
    for _ in 0..500 {
        let x = random_traceless_sym(&mut rng, 20.0);
        let p = spd_exp(&x).unwrap();
        let back = spd_log(&p).unwrap();
        let err = back.to_mat().sub(&x.to_mat()).frob_norm();
        let (w, _) = metv_core::linalg::sym_eigen(&x);
        let spread = w[0] - w[2];
        if spread <= 16.0 {
            assert!(err <= 1e-9 * x.frob_norm().max(1.0), "round trip error {err}");
        } else {
            let floor = f64::EPSILON * spread.exp();
            assert!(err <= 100.0 * floor + 1e-9, "error {err} above floor {floor}");
        }
    }
}

#[test]
fn exp_matches_power_series() {
    // independent oracle: plain truncated series sum X^m / m!
    let mut rng = rng_from(103);
    for _ in 0..100 {
        let x = random_traceless_sym(&mut rng, 3.0);
        let xm = x.to_mat();
        let mut series = Mat::identity(3);
        let mut term = Mat::identity(3);
        for m in 1..=40 {
            term = term.mul(&xm).scale(1.0 / m as f64);
            series = series.add(&term);
        }
        let p = spd_exp(&x).unwrap();
        let err = p.as_mat().sub(&series).frob_norm() / series.frob_norm();
        assert!(err < 1e-12, "series mismatch {err}");
    }
}

#[test]
fn log_conjugation_oracle() {
    // P = k diag(e, e^-1, 1) k^T must log to k diag(1, -1, 0) k^T
    let mut rng = rng_from(104);
    for _ in 0..100 {
        let k = random_so3(&mut rng);
        let d = Mat::from_rows(
            3,
            &[&[1f64.exp(), 0.0, 0.0], &[0.0, (-1f64).exp(), 0.0], &[0.0, 0.0, 1.0]],
        );
        let p = SpdDetOne::try_new(k.mul(&d).mul(&k.transpose())).unwrap();
        let want = {
            let l = Mat::from_rows(3, &[&[1.0, 0.0, 0.0], &[0.0, -1.0, 0.0], &[0.0, 0.0, 0.0]]);
            k.mul(&l).mul(&k.transpose())
        };
        let got = spd_log(&p).unwrap();
        assert!(got.to_mat().sub(&want).frob_norm() < 1e-11);
    }
}

#[test]
fn cartan_construct_then_recover_10k() {
    let mut rng = rng_from(105);
    for _ in 0..10_000 {
        let k0 = random_so3(&mut rng);
        let mut b0: Vec<f64> = (0..3).map(|_| f64::standard_normal(&mut rng)).collect();
        let mean = b0.iter().sum::<f64>() / 3.0;
        b0.iter_mut().for_each(|v| *v -= mean);
        let b = TracelessDiag::new(b0.clone()).unwrap();
        let p = SpdDetOne::from_cartan(&k0, &b);
        let cf = cartan_decompose(&p).unwrap();
        // recovered b is the descending sort of b0
        let mut sorted = b0.clone();
        sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());
        for (got, want) in cf.b.as_slice().iter().zip(sorted.iter()) {
            assert!((got - want).abs() < 1e-9, "{got} vs {want}");
        }
        // reconstruction (relative Frobenius; matrix scale varies over
        // orders of magnitude with the draw) and distance consistency
        let rec = SpdDetOne::from_cartan(&cf.k, &cf.b);
        let rel = rec.as_mat().sub(p.as_mat()).frob_norm() / p.as_mat().frob_norm();
        assert!(rel < 1e-9, "reconstruction error {rel}");
        let d = fiber_distance(&SpdDetOne::identity(3), &p).unwrap();
        assert!((d - cf.b.norm()).abs() < 1e-9);
    }
}

#[test]
fn sl_invariance_of_distance_10k() {
    let mut rng = rng_from(106);
    for _ in 0..10_000 {
        let p = random_point(&mut rng, 3.0);
        let q = random_point(&mut rng, 3.0);
        let h = random_sl3(&mut rng);
        let d = fiber_distance(&p, &q).unwrap();
        let d2 = fiber_distance(
            &congruence_act(&h, &p).unwrap(),
            &congruence_act(&h, &q).unwrap(),
        )
        .unwrap();
        assert!((d - d2).abs() <= 1e-8 * d.max(1.0), "{d} vs {d2}");
    }
}

#[test]
fn triangle_inequality_10k() {
    let mut rng = rng_from(107);
    for _ in 0..10_000 {
        let p = random_point(&mut rng, 2.0);
        let q = random_point(&mut rng, 2.0);
        let r = random_point(&mut rng, 2.0);
        let pq = fiber_distance(&p, &q).unwrap();
        let qr = fiber_distance(&q, &r).unwrap();
        let pr = fiber_distance(&p, &r).unwrap();
        assert!(pr <= pq + qr + 1e-9, "{pr} > {pq} + {qr}");
    }
}

#[test]
fn distance_symmetry() {
    let mut rng = rng_from(108);
    for _ in 0..1000 {
        let p = random_point(&mut rng, 2.5);
        let q = random_point(&mut rng, 2.5);
        let d = fiber_distance(&p, &q).unwrap();
        let d2 = fiber_distance(&q, &p).unwrap();
        assert!((d - d2).abs() <= 1e-12, "{d} vs {d2}");
    }
}

#[test]
fn stabilizer_fixes_identity() {
    let mut rng = rng_from(109);
    let i3 = SpdDetOne::identity(3);
    for _ in 0..100 {
        let k = random_so3(&mut rng);
        let acted = congruence_act(&k, &i3).unwrap();
        assert!(acted.as_mat().sub(&Mat::identity(3)).frob_norm() < 1e-12);
    }
}

#[test]
fn fiber_distance_from_cartan_parametrization() {
    // d(I, k e^{2b} k^T) = |b| for b = (1, -1, 0)
    let mut rng = rng_from(110);
    let b = TracelessDiag::new(vec![1.0, -1.0, 0.0]).unwrap();
    for _ in 0..50 {
        let k = random_so3(&mut rng);
        let p = SpdDetOne::from_cartan(&k, &b);
        let d = fiber_distance(&SpdDetOne::identity(3), &p).unwrap();
        assert!((d - 2f64.sqrt()).abs() < 1e-10);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn projection_is_idempotent_and_contracts(v in prop::collection::vec(-50f64..50.0, 3..6)) {
        let p = TracelessDiag::project(&v);
        let p2 = TracelessDiag::project(p.as_slice());
        for (a, b) in p.as_slice().iter().zip(p2.as_slice().iter()) {
            prop_assert!((a - b).abs() < 1e-12);
        }
        let vn = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        prop_assert!(p.norm() <= vn + 1e-12);
        let sum: f64 = p.as_slice().iter().sum();
        prop_assert!(sum.abs() < 1e-12);
    }

    #[test]
    fn exp_log_round_trip_small(seed in 0u64..1_000_000) {
        let mut rng = rng_from(seed);
        let x = random_traceless_sym(&mut rng, 5.0);
        let p = spd_exp(&x).unwrap();
        let back = spd_log(&p).unwrap();
        prop_assert!(back.to_mat().sub(&x.to_mat()).frob_norm() < 1e-9);
    }
}

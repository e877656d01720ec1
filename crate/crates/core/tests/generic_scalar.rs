//! The geometry and sampling kernels are generic over the scalar; exercise
//! the f32 instantiation at tolerances f32 can hold.

use metv_core::fields::{sample_radial, GridSpec};
use metv_core::linalg::SymMatrix;
use metv_core::spectrum::{torus_basis, DecaySchedule};
use metv_core::symspace::{cartan_decompose, fiber_distance, spd_exp, spd_log, SpdDetOne};
use metv_core::{SpdDetOne32, TracelessDiag32};

#[test]
fn f32_round_trip() {
    let mut x = SymMatrix::<f32>::zeros(3);
    x.set(0, 0, 0.8);
    x.set(1, 1, -0.5);
    x.set(2, 2, -0.3);
    x.set(0, 1, 0.2);
    x.set(1, 2, -0.1);
    let p: SpdDetOne32 = spd_exp(&x).unwrap();
    assert!((p.det() - 1.0).abs() < 1e-5);
    let back = spd_log(&p).unwrap();
    assert!(back.to_mat().sub(&x.to_mat()).frob_norm() < 1e-5);
}

#[test]
fn f32_cartan_and_distance() {
    let b = TracelessDiag32::new(vec![0.5, -0.5, 0.0]).unwrap();
    let p = SpdDetOne::from_cartan(&metv_core::Mat32::identity(3), &b);
    let cf = cartan_decompose(&p).unwrap();
    assert!((cf.b.as_slice()[0] - 0.5).abs() < 1e-6);
    let d = fiber_distance(&SpdDetOne::<f32>::identity(3), &p).unwrap();
    assert!((d - 0.5f32 * 2f32.sqrt()).abs() < 1e-6);
}

#[test]
fn f32_field_sampling() {
    let basis = torus_basis(3, 6).unwrap();
    let grid = GridSpec::new(3, 5);
    let field =
        sample_radial::<f32>(&basis, &DecaySchedule::PowerLaw { s: 2.0 }, grid, 7).unwrap();
    // trace-zero within f32 rounding
    for node in 0..grid.num_nodes() {
        let s: f32 = field.b[node * 3..node * 3 + 3].iter().sum();
        assert!(s.abs() < 1e-5);
    }
    // same seed, same bits
    let again =
        sample_radial::<f32>(&basis, &DecaySchedule::PowerLaw { s: 2.0 }, grid, 7).unwrap();
    assert_eq!(field.b, again.b);
}

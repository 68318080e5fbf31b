use qfim_core::bounds::{crb_covariance, weight_from_real, wmse_bound_right, wmse_bound_right_real, wmse_bound_symmetric};
use qfim_core::complex_map::{from_complex, to_complex};
use qfim_core::linalg::c64;
use qfim_core::models::{builtin_qubit_model, DensityModel, QubitSpec, RandomDensityModel};
use qfim_core::param::{identity_jacobian, real_jacobian, wirtinger_jacobian, FdPolicy};
use qfim_core::qfim::{complex_from_real, rqfim_complex, rqfim_real, sqfim_complex, sqfim_real};
use qfim_core::testing::{random_real_symmetric, rng};
use qfim_core::{CMatrix, NumericPolicy, ParamPoint};

fn qubit() -> impl DensityModel {
    builtin_qubit_model(QubitSpec {
        offset: [0.1, 0.0, 0.2],
        columns: vec![[0.3, 0.0, 0.1], [0.0, 0.25, -0.1]],
    })
    .unwrap()
}

#[test]
fn qubit_symmetric_bound_matches_real_route() {
    let p = NumericPolicy::default();
    let m = qubit();
    let q = ParamPoint::scalar(c64(0.4, -0.3)).unwrap();
    let bar = sqfim_real(&m, &q, &p).unwrap();
    let real_bound = bar.inverse().unwrap();
    let c = sqfim_complex(&m, &q, &p).unwrap();
    let bound = crb_covariance(&c, &identity_jacobian(1), &p).unwrap().matrix.unwrap();
    assert!(bound.distance(&to_complex(&real_bound).unwrap()) <= 1e-8);
}

#[test]
fn transformed_parameter_bound_matches_real_route() {
    let p = NumericPolicy::default();
    let m = qubit();
    let q = ParamPoint::scalar(c64(0.2, 0.1)).unwrap();
    let fd = FdPolicy::default();
    let g = |x: &ParamPoint| {
        let z = x.theta()[0];
        Ok(vec![z * z + z.conj(), z.exp()])
    };
    let d = wirtinger_jacobian(g, &q, &fd).unwrap();
    let d_real = real_jacobian(g, &q, &fd).unwrap();
    let bar = sqfim_real(&m, &q, &p).unwrap();
    let real_bound = &d_real * bar.inverse().unwrap() * d_real.transpose();
    let c = sqfim_complex(&m, &q, &p).unwrap();
    let bound = crb_covariance(&c, &d, &p).unwrap().matrix.unwrap();
    assert!(bound.relative_distance(&to_complex(&real_bound).unwrap()) <= 1e-7);
}

#[test]
fn right_weighted_bound_agrees_across_routes() {
    let p = NumericPolicy::default();
    let mut r = rng(41);
    for _ in 0..5 {
        let m = RandomDensityModel::new(&mut r, 3, 2, 0.3);
        let q = ParamPoint::new(vec![c64(0.1, -0.2), c64(0.05, 0.3)]).unwrap();
        let w_real = {
            let a = random_real_symmetric(&mut r, 4);
            &a * &a + CMatrix::identity(4)
        };
        let w = weight_from_real(&w_real, &p).unwrap();
        let jr = rqfim_real(&m, &q, &p).unwrap();
        let r_real = jr.inverse().unwrap();
        let r_complex = rqfim_complex(&m, &q, &p).unwrap().full().inverse().unwrap();
        assert!(from_complex(&r_complex).unwrap().distance(&r_real) <= 1e-8);
        let a = wmse_bound_right(&w, &r_complex, &p).unwrap();
        let b = wmse_bound_right_real(&w_real, &r_real, &p).unwrap();
        assert!((a - b).abs() <= 1e-8 * a.abs().max(1.0), "{a} vs {b}");

        let js = sqfim_complex(&m, &q, &p).unwrap();
        let ws = wmse_bound_symmetric(&w, &js, &p).unwrap();
        let ws_real = (&w_real * sqfim_real(&m, &q, &p).unwrap().inverse().unwrap()).trace().re;
        assert!((ws.trace_form - ws_real).abs() <= 1e-8 * ws_real.abs().max(1.0));
        assert!((ws.trace_form - ws.block_form).abs() <= 1e-9 * ws_real.abs().max(1.0));
        assert!(complex_from_real(&jr).unwrap().distance(&rqfim_complex(&m, &q, &p).unwrap().full()) <= 1e-8);
    }
}

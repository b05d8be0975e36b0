mod common;

use common::{c, dist, loop_generator, random_point, random_unitary, rng, transport_ode};
use holonomy_core::connection::{ConnectionField, Frame, DEFAULT_FD_STEP};
use holonomy_core::fock::ModeSpace;
use holonomy_core::holonomy::{
    apply_gate, det_phase_integral, holonomy, holonomy_gate, plaquette_holonomy, plaquette_loop, LoopPath, Segment,
};
use holonomy_core::linalg::{self, CMatrix};
use holonomy_core::optics::{ModelKind, ModelSpec, ParamPoint};
use holonomy_core::Error;

fn two_qubit(cutoff: usize) -> ConnectionField {
    ConnectionField::new(&ModelSpec::new(ModelKind::TwoQubit, cutoff).unwrap()).unwrap()
}

fn alpha1_circle(radius: f64) -> LoopPath {
    LoopPath::circle(&ParamPoint::origin(ModelKind::TwoQubit), (0, 1), radius).unwrap()
}

/// A circle through the origin in the `(p, q)` plane.
fn circle_through_origin(p: usize, q: usize, radius: f64) -> LoopPath {
    let center = ParamPoint::origin(ModelKind::TwoQubit).shifted(p, -radius);
    LoopPath::circle(&center, (p, q), radius).unwrap()
}

#[test]
fn product_matches_ode_transport() {
    let field = two_qubit(12);
    let path = alpha1_circle(0.2);
    let (gate, used) = holonomy_gate(&field, &path, 1024).unwrap();
    assert_eq!(used, 1024);
    let ode = transport_ode(|t| loop_generator(&field, &path, t), linalg::identity(4), 0.0, 1.0, 1e-11, 1e-13);
    assert!(dist(&gate, &ode) < 5e-6, "{:e}", dist(&gate, &ode));
    assert!(linalg::unitarity_defect(&ode) < 1e-8);
}

#[test]
fn abelian_frame_gives_area_phase() {
    // frame {|0⟩}: A = i(x dy − y dx), so Γ = exp(2iπr²)
    let spec = ModelSpec::new(ModelKind::SingleMode, 32).unwrap();
    let space: ModeSpace = spec.space();
    let mut v = CMatrix::zeros(space.dim(), 1);
    v[(0, 0)] = c(1.0, 0.0);
    let field = ConnectionField::with_frame(&spec, Frame::new(space, v).unwrap()).unwrap();
    let r = 0.3;
    let center = ParamPoint::from_coords(ModelKind::SingleMode, vec![0.1, -0.05]).unwrap();
    let path = LoopPath::circle(&center, (0, 1), r).unwrap();
    let (gate, _) = holonomy_gate(&field, &path, 512).unwrap();
    let expect = c(0.0, 2.0 * std::f64::consts::PI * r * r).exp();
    assert!((gate[(0, 0)] - expect).norm() < 1e-5);
}

#[test]
fn reversed_loop_inverts_gate() {
    let field = two_qubit(10);
    let path = circle_through_origin(0, 8, 0.15).then(&circle_through_origin(2, 5, 0.1)).unwrap();
    let (g, _) = holonomy_gate(&field, &path, 512).unwrap();
    let (h, _) = holonomy_gate(&field, &path.reversed(), 512).unwrap();
    assert!(dist(&(g * h), &linalg::identity(4)) < 1e-10);
}

#[test]
fn concatenation_multiplies_gates_in_path_order() {
    let field = two_qubit(10);
    let a = circle_through_origin(0, 1, 0.15);
    let b = circle_through_origin(6, 9, 0.12);
    let n = 2048;
    let (ga, _) = holonomy_gate(&field, &a, n).unwrap();
    let (gb, _) = holonomy_gate(&field, &b, n).unwrap();
    let (gab, _) = holonomy_gate(&field, &a.then(&b).unwrap(), 2 * n).unwrap();
    assert!(dist(&gab, &(&ga * &gb)) < 1e-6);
    // and the opposite order is measurably different
    assert!(dist(&gab, &(&gb * &ga)) > 1e-4);
}

#[test]
fn determinant_phase_matches_trace_integral() {
    let field = two_qubit(10);
    let path = circle_through_origin(0, 1, 0.2);
    let report = holonomy(&field, &path, 256).unwrap();
    let integral = det_phase_integral(&field, &path, 256).unwrap();
    assert!((report.trace_integral - integral).abs() < 1e-14);
    assert!(linalg::wrap_angle(report.det_phase - integral).abs() < 1e-10);
    assert!(report.unitarity_defect < 1e-12);
    assert_eq!(report.segments_used, 256);
    let (k, d) = report.discretization_history[1];
    assert_eq!(k, 256);
    // midpoint rule: doubling shrinks the error about fourfold
    let ratio = report.discretization_history[0].1 / d;
    assert!((3.5..4.5).contains(&ratio), "ratio {ratio}");
}

#[test]
fn constant_loop_is_identity() {
    let field = two_qubit(8);
    let mut g = rng(1);
    let path = LoopPath::constant(&random_point(ModelKind::TwoQubit, 0.3, &mut g));
    let (gate, _) = holonomy_gate(&field, &path, 64).unwrap();
    assert!(dist(&gate, &linalg::identity(4)) < 1e-15);
}

#[test]
fn frame_rotation_conjugates_gate() {
    let spec = ModelSpec::new(ModelKind::TwoQubit, 10).unwrap();
    let plain = ConnectionField::new(&spec).unwrap();
    let mut g = rng(21);
    let u = random_unitary(4, &mut g);
    let rotated = ConnectionField::with_frame(&spec, plain.frame().rotated(&u).unwrap()).unwrap();
    let path = circle_through_origin(2, 7, 0.2);
    let (a, _) = holonomy_gate(&plain, &path, 256).unwrap();
    let (b, _) = holonomy_gate(&rotated, &path, 256).unwrap();
    assert!(dist(&b, &(u.adjoint() * a * &u)) < 1e-12);
}

#[test]
fn plaquette_approaches_curvature() {
    let field = two_qubit(10);
    let mut g = rng(17);
    let p = random_point(ModelKind::TwoQubit, 0.2, &mut g);
    let f = field.curvature_at(&p, 1, 6, DEFAULT_FD_STEP).unwrap().value;
    let err = |eps: f64| {
        let gate = plaquette_holonomy(&field, &p, 1, 6, eps).unwrap();
        linalg::frobenius(&((gate - linalg::identity(4)) / c(eps * eps, 0.0) - &f))
    };
    let (e1, e2, e3) = (err(0.08), err(0.04), err(0.02));
    assert!(e2 <= 0.5 * e1 && e3 <= 0.5 * e2, "{e1:e} {e2:e} {e3:e}");
}

#[test]
fn plaquette_loop_shape() {
    let p = ParamPoint::origin(ModelKind::TwoQubit);
    let path = plaquette_loop(&p, 0, 3, 0.1).unwrap();
    assert_eq!(path.segments().len(), 6);
    assert_eq!(path.base_point(), p.coords().to_vec());
    assert!((path.length() - (0.4 + 0.1 * 2f64.sqrt())).abs() < 1e-12);
    let field = two_qubit(6);
    assert!(matches!(plaquette_holonomy(&field, &p, 2, 2, 0.1), Err(Error::DegeneratePair(2))));
    assert!(plaquette_holonomy(&field, &p, 0, 1, -0.1).is_err());
}

#[test]
fn gate_application() {
    let field = two_qubit(8);
    let (gate, _) = holonomy_gate(&field, &alpha1_circle(0.1), 64).unwrap();
    let x = nalgebra::DVector::from_vec(vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 1.0), c(0.0, 0.0)]);
    let y = apply_gate(&gate, &x).unwrap();
    assert!((y.norm() - x.norm()).abs() < 1e-12);
    assert!(apply_gate(&gate, &nalgebra::DVector::from_element(3, c(1.0, 0.0))).is_err());
}

#[test]
fn malformed_loops_are_rejected() {
    let m = ModelKind::TwoQubit;
    let at = |k: usize, v: f64| {
        let mut x = vec![0.0; 12];
        x[k] = v;
        x
    };
    let open = LoopPath::new(m, vec![Segment::Line { from: at(0, 0.0), to: at(0, 0.1) }]);
    assert!(matches!(open, Err(Error::OpenLoop { .. })));
    let broken = LoopPath::new(
        m,
        vec![
            Segment::Line { from: at(0, 0.0), to: at(0, 0.1) },
            Segment::Line { from: at(0, 0.2), to: at(0, 0.0) },
        ],
    );
    assert!(matches!(broken, Err(Error::Discontinuous { segment: 0, next: 1, .. })));
    assert!(LoopPath::new(m, vec![Segment::Line { from: vec![0.0; 3], to: vec![0.0; 3] }]).is_err());

    let field = ConnectionField::new(&ModelSpec::new(m, 8).unwrap().with_param_limit(0.5)).unwrap();
    let big = LoopPath::circle(&ParamPoint::origin(m), (0, 1), 0.6).unwrap();
    assert_eq!(holonomy_gate(&field, &big, 64).unwrap_err().exit_code(), 4);
    assert_eq!(holonomy(&field, &alpha1_circle(0.1), 4).unwrap_err().exit_code(), 2);
    let other = LoopPath::constant(&ParamPoint::origin(ModelKind::SingleMode));
    assert!(matches!(holonomy_gate(&field, &other, 64), Err(Error::ModelMismatch { .. })));
}

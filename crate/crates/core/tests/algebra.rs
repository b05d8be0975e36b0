use holonomy_core::fock::{
    annihilator, commutator, creator, number_op, protected_projector, schwinger_su11, schwinger_su2,
    total_occupation_projector, weyl_generator, algebra_metric, Algebra, ModeSpace, Op, StateVector,
};
use holonomy_core::linalg::C64;

const TOL: f64 = 1e-12;

fn r(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// Max entry of `(lhs − rhs)·P`: the relation restricted to protected states.
fn defect_on(p: &Op, lhs: &Op, rhs: &Op) -> f64 {
    lhs.sub(rhs).unwrap().compose(p).unwrap().max_abs()
}

#[test]
fn canonical_commutator_on_protected_states() {
    for n in 1..=3 {
        let space = ModeSpace::new(n, 16).unwrap();
        let p = protected_projector(space, 1).unwrap();
        let id = Op::identity(space);
        for k in 1..=n {
            let c = commutator(&annihilator(space, k).unwrap(), &creator(space, k).unwrap()).unwrap();
            assert!(defect_on(&p, &c, &id) < TOL, "n={n} mode {k}");
            for l in (1..=n).filter(|&l| l != k) {
                let c = commutator(&annihilator(space, k).unwrap(), &creator(space, l).unwrap()).unwrap();
                assert!(c.compose(&p).unwrap().max_abs() < TOL);
            }
        }
    }
}

#[test]
fn truncation_breaks_canonical_commutator_at_top_level() {
    let space = ModeSpace::new(1, 6).unwrap();
    let c = commutator(&annihilator(space, 1).unwrap(), &creator(space, 1).unwrap()).unwrap();
    // ⟨5|[a,a†]|5⟩ = −5 in a cutoff-6 space
    assert!((c.element(&[5], &[5]).unwrap() - r(-5.0)).norm() < TOL);
    assert!((c.element(&[4], &[4]).unwrap() - r(1.0)).norm() < TOL);
}

#[test]
fn number_operator_matches_ladder_product() {
    let space = ModeSpace::new(2, 16).unwrap();
    for k in 1..=2 {
        let n = number_op(space, k).unwrap();
        let ada = creator(space, k).unwrap().compose(&annihilator(space, k).unwrap()).unwrap();
        assert!(n.sub(&ada).unwrap().max_abs() < TOL);
        assert!(n.is_diagonal());
    }
}

#[test]
fn schwinger_su2_relations() {
    for n in 2..=3 {
        let space = ModeSpace::new(n, 16).unwrap();
        let p = protected_projector(space, 2).unwrap();
        for i in 1..=n {
            for j in (1..=n).filter(|&j| j != i) {
                let [jp, jm, j3] = schwinger_su2(space, i, j).unwrap();
                assert!(defect_on(&p, &commutator(&j3, &jp).unwrap(), &jp) < TOL);
                assert!(defect_on(&p, &commutator(&j3, &jm).unwrap(), &jm.scale(r(-1.0))) < TOL);
                assert!(defect_on(&p, &commutator(&jp, &jm).unwrap(), &j3.scale(r(2.0))) < TOL);
            }
        }
    }
}

#[test]
fn schwinger_su11_relations() {
    for n in 2..=3 {
        let space = ModeSpace::new(n, 16).unwrap();
        let p = protected_projector(space, 2).unwrap();
        for i in 1..=n {
            for j in (1..=n).filter(|&j| j != i) {
                let [kp, km, k3] = schwinger_su11(space, i, j).unwrap();
                assert!(defect_on(&p, &commutator(&k3, &kp).unwrap(), &kp) < TOL);
                assert!(defect_on(&p, &commutator(&k3, &km).unwrap(), &km.scale(r(-1.0))) < TOL);
                assert!(defect_on(&p, &commutator(&kp, &km).unwrap(), &k3.scale(r(-2.0))) < TOL);
            }
        }
    }
}

/// `[E_ij, E_kl] = η_jk E_il − η_li E_kj` for every index quadruple.
fn weyl_relations(n: usize, alg: Algebra) -> f64 {
    let space = ModeSpace::new(n, 16).unwrap();
    let p = protected_projector(space, 2).unwrap();
    let e: Vec<Vec<Op>> = (1..=n)
        .map(|i| (1..=n).map(|j| weyl_generator(space, i, j, alg).unwrap()).collect())
        .collect();
    let eta = |a: usize, b: usize| algebra_metric(alg, n, a + 1, b + 1);
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    let lhs = commutator(&e[i][j], &e[k][l]).unwrap();
                    let rhs = e[i][l]
                        .scale(r(eta(j, k)))
                        .sub(&e[k][j].scale(r(eta(l, i))))
                        .unwrap();
                    worst = worst.max(defect_on(&p, &lhs, &rhs));
                }
            }
        }
    }
    worst
}

#[test]
fn unitary_weyl_relations() {
    for n in 1..=3 {
        assert!(weyl_relations(n, Algebra::Un) < TOL, "u({n})");
    }
}

#[test]
fn pseudo_unitary_weyl_relations() {
    for n in 2..=3 {
        assert!(weyl_relations(n, Algebra::Un11) < TOL, "u({},1)", n - 1);
    }
}

#[test]
fn pseudo_unitary_generators_have_expected_adjoints() {
    let space = ModeSpace::new(3, 8).unwrap();
    let e13 = weyl_generator(space, 1, 3, Algebra::Un11).unwrap();
    let e31 = weyl_generator(space, 3, 1, Algebra::Un11).unwrap();
    assert!(e13.adjoint().sub(&e31).unwrap().max_abs() < TOL);
    let e33 = weyl_generator(space, 3, 3, Algebra::Un11).unwrap();
    assert!((e33.element(&[0, 0, 0], &[0, 0, 0]).unwrap() - r(1.0)).norm() < TOL);
}

#[test]
fn basis_states_and_projectors() {
    let space = ModeSpace::new(2, 4).unwrap();
    assert_eq!(space.dim(), 16);
    assert_eq!(space.index_of(&[1, 2]).unwrap(), 6);
    assert_eq!(space.occupations(6), vec![1, 2]);
    assert!(space.index_of(&[4, 0]).is_err());

    let s = StateVector::basis(space, &[1, 0]).unwrap();
    let raised = creator(space, 1).unwrap().apply(&s).unwrap();
    assert!((raised.amplitude(&[2, 0]).unwrap() - r(2f64.sqrt())).norm() < TOL);

    let p = total_occupation_projector(space, 1);
    let kept = (0..space.dim()).filter(|&k| p.get(k, k).re == 1.0).count();
    assert_eq!(kept, 3);
    assert!(protected_projector(space, 4).is_err());
}

#[test]
fn dimension_budget_is_enforced() {
    let err = ModeSpace::with_budget(3, 32, 4096).unwrap_err();
    assert_eq!(err.exit_code(), 4);
    assert!(ModeSpace::new(0, 4).is_err());
    assert!(ModeSpace::new(2, 1).is_err());
}

//! Closed-form examples over their parameter grids: the product of spheres,
//! its hypersurface view and `E(kappa, tau)` in a complex space form.

use metallic_core::compat::{
    full_verdict, projector_ranks, rank_conditions, Target, FACTOR_PAIRING,
};
use metallic_core::examples::{
    build_ekt_immersion, build_sphere_product, build_sphere_product_hypersurface, ekt_grid,
    EktExample, SphereProductExample,
};
use metallic_core::structures::metallic_mean;
use metallic_core::submanifold::{
    check_derivative_relations, check_hypersurface_relations, StructureParams,
};
use metallic_core::tensor::CurvatureConvention;
use nalgebra as na;

const PQ: [(f64, f64); 3] = [(1.0, 1.0), (2.0, 1.0), (1.0, 3.0)];
const DIMS: [(usize, usize); 2] = [(2, 2), (3, 2)];
const CURVATURES: [f64; 2] = [1.0, 0.25];

fn sphere_grid() -> Vec<SphereProductExample<f64>> {
    let mut out = Vec::new();
    for (p, q) in PQ {
        for (n1, n2) in DIMS {
            for c1 in CURVATURES {
                for c2 in CURVATURES {
                    out.push(
                        SphereProductExample::new(n1, n2, c1, c2, metallic_mean(p, q).unwrap())
                            .unwrap(),
                    );
                }
            }
        }
    }
    out
}

#[test]
fn sphere_product_grid_passes() {
    for ex in sphere_grid() {
        let rec = build_sphere_product(&ex).unwrap();
        let rep = full_verdict(&rec);
        assert!(rep.verdict(), "{:?}:\n{rep}", ex.params);
        assert!(rep.get("gauss").unwrap() < 1e-9);
        assert_eq!(rec.der.b.coeffs().iter().map(|x| x.abs()).sum::<f64>(), 0.0);
        assert_eq!(rec.ops.q().mat().amax(), 0.0, "Q must vanish exactly");
        assert_eq!(rec.ops.r().mat().amax(), 0.0, "R must vanish exactly");
        let rank = rank_conditions(&rec).unwrap();
        assert!(rank.verdict(), "{rank}");
        let Target::Product(pp) = rec.target else {
            panic!("product target expected")
        };
        assert_eq!(
            projector_ranks(&rec.ops).unwrap(),
            FACTOR_PAIRING.expected_ranks(pp.n1, pp.n2)
        );
    }
}

#[test]
fn sphere_product_grid_with_skewed_frames_passes() {
    for (k, ex) in sphere_grid().into_iter().enumerate() {
        let rec = build_sphere_product(&ex.with_frame_seed(k as u64)).unwrap();
        let rep = full_verdict(&rec);
        assert!(rep.verdict(), "frame seed {k}:\n{rep}");
    }
}

#[test]
fn sphere_product_hypersurface_grid_passes() {
    for ex in sphere_grid() {
        let (n1, n2) = (ex.params.n1, ex.params.n2);
        let (h, rec) = build_sphere_product_hypersurface(&ex).unwrap();
        let rel = check_hypersurface_relations(&h, StructureParams::Metallic(ex.mp)).unwrap();
        assert!(rel.verdict(), "{:?}:\n{rel}", ex.params);
        let a = h.a.mat();
        assert!(
            a.columns(0, n1).amax() < 1e-12,
            "A on the first factor:\n{a}"
        );
        let second =
            a.view((n1, n1), (n2, n2)) - na::DMatrix::identity(n2, n2) * ex.params.c2.sqrt();
        assert!(
            second.amax() < 1e-12 && a.view((0, n1), (n1, n2)).amax() < 1e-12,
            "A on the second factor:\n{a}"
        );
        let Target::Product(pp) = rec.target else {
            panic!("product target expected")
        };
        assert_eq!((pp.c1, pp.c2), (ex.params.c1, 0.0));
        let rep = full_verdict(&rec);
        assert!(rep.verdict(), "{:?}:\n{rep}", ex.params);
        assert!(rep.get("gauss").unwrap() < 1e-9);
    }
}

#[test]
fn ekt_grid_passes() {
    let grid = ekt_grid::<f64>();
    assert_eq!(grid.len(), 45);
    for ex in grid {
        let rec = build_ekt_immersion(&ex).unwrap();
        let rel =
            check_hypersurface_relations(&ex.hypersurface().unwrap(), rec.ops.params()).unwrap();
        assert!(rel.max_residual() < 1e-10, "{ex:?}:\n{rel}");
        let der = check_derivative_relations(&rec.ops, &rec.der).unwrap();
        assert!(der.max_residual() < 1e-10, "{ex:?}:\n{der}");
        let rep = full_verdict(&rec);
        assert!(rep.verdict(), "{ex:?}:\n{rep}");
        for name in ["gauss", "codazzi", "ricci"] {
            assert!(rep.get(name).unwrap() < 1e-10, "{name}: {rep}");
        }
    }
}

#[test]
fn ekt_gauss_form_is_the_intrinsic_curvature() {
    for ex in ekt_grid::<f64>() {
        let rec = build_ekt_immersion(&ex).unwrap();
        let form = ex.gauss_form().to_convention(CurvatureConvention::Standard);
        let diff = (form.coeffs() - rec.r_tm.coeffs())
            .iter()
            .fold(0.0f64, |m, x| m.max(x.abs()));
        assert!(diff < 1e-10, "{ex:?}: {diff:e}");
    }
}

#[test]
fn ekt_codazzi_from_christoffels() {
    let e = |i: usize| na::DVector::from_fn(3, |k, _| if k == i { 1.0 } else { 0.0 });
    for ex in ekt_grid::<f64>() {
        let d = ex.d_nabla_a();
        for i in 0..3 {
            for j in 0..3 {
                let independent = na::DVector::from_fn(3, |k, _| d[[i, j, k]]);
                let closed = ex.d_nabla_a_closed_form(&e(i), &e(j));
                assert!((&independent - &closed).amax() < 1e-10, "{ex:?} ({i},{j})");
                let printed = ex.d_nabla_a_printed(&e(i), &e(j));
                assert!(
                    (&independent + &printed).amax() < 1e-10,
                    "{ex:?} ({i},{j}) printed sign"
                );
            }
        }
    }
}

#[test]
fn ekt_degenerate_flat_target() {
    for tau in [0.5, 1.0, 2.0] {
        let ex = EktExample::<f64>::new(4.0 * tau * tau, tau, 1.0, 1.0).unwrap();
        let a = ex.shape();
        assert!(
            (&a - na::DMatrix::identity(3, 3) * tau).amax() < 1e-12,
            "tau = {tau}:\n{a}"
        );
        assert!(ex.d_nabla_a().iter().all(|x| x.abs() < 1e-12));
        let e = |i: usize| na::DVector::from_fn(3, |k, _| if k == i { 1.0 } else { 0.0 });
        for i in 0..3 {
            for j in 0..3 {
                assert!(ex.d_nabla_a_closed_form(&e(i), &e(j)).amax() < 1e-12);
            }
        }
        let rep = full_verdict(&build_ekt_immersion(&ex).unwrap());
        assert!(rep.verdict(), "{rep}");
    }
}

#[test]
fn ekt_rejects_zero_tau() {
    let err = EktExample::<f64>::new(1.0, 0.0, 1.0, 1.0).unwrap_err();
    assert!(err.to_string().contains("tau must be nonzero"));
}

//! The eight operators of a metallic split: round trip, algebraic and
//! derivative identities, and the rewritten Gauss, Codazzi and Ricci forms.

use metallic_core::compat::{
    complex_quad_identities, derive_complex_quad, derive_eight_operators, eight_operator_forms,
    eight_operator_identities, PointRecord, Target,
};
use metallic_core::examples::random::{
    gaussian_matrix, random_cms_instance, random_metallic_instance,
};
use metallic_core::examples::{
    build_sphere_product, build_sphere_product_hypersurface, SphereProductExample,
};
use metallic_core::model_spaces::ProductSpaceParams;
use metallic_core::structures::{metallic_mean, ComplexMetallicParams};
use metallic_core::submanifold::{DerivativeData, InducedOperators};
use metallic_core::tensor::{residual_norm, BilinearForm, CurvatureConvention, CurvatureTensor};
use nalgebra as na;
use proptest::prelude::*;

fn dims(seed: u64) -> (usize, usize) {
    let total = 2 + (seed as usize % 7);
    let n = 1 + (seed as usize / 7) % (total - 1);
    (n, total - n)
}

fn metallic(seed: u64) -> InducedOperators<f64> {
    let mp = metallic_mean(1.0 + (seed % 3) as f64, 1.0 + (seed % 4) as f64).unwrap();
    random_metallic_instance(dims(seed), mp, seed)
}

/// A record with a random symmetric second fundamental form, matching shape
/// operators and arbitrary curvature data, over a product target of the right dimension.
fn random_record(seed: u64) -> PointRecord<f64> {
    let ops = metallic(seed);
    let (n, m) = (ops.tangent_dim(), ops.normal_dim());
    let raw = gaussian_matrix::<f64>(n * n, m, seed ^ 0xb);
    let b = BilinearForm::from_fn(n, m, |i, j| {
        (raw.row(i * n + j) + raw.row(j * n + i)).transpose()
    });
    let shape = (0..m)
        .map(|a| {
            let ge_b = na::DMatrix::from_fn(n, n, |i, j| (ops.ge().gram() * b.at(i, j))[a]);
            ops.g().inverse() * ge_b
        })
        .collect();
    let der = DerivativeData {
        b,
        shape,
        ..DerivativeData::zeros(n, m)
    };
    let total = n + m;
    let n1 = 1 + seed as usize % (total - 1);
    let target = ProductSpaceParams::new(n1, total - n1, 1.0, 0.25).unwrap();
    PointRecord::new(
        ops,
        der,
        CurvatureTensor::zeros(n, n, CurvatureConvention::Standard),
        Target::Product(target),
    )
    .unwrap()
}

fn sphere_records() -> Vec<PointRecord<f64>> {
    let mut out = Vec::new();
    for (p, q) in [(1.0, 1.0), (2.0, 1.0), (1.0, 3.0)] {
        for (n1, n2) in [(2, 2), (3, 2)] {
            for (c1, c2) in [(1.0, 1.0), (1.0, 0.25), (0.25, 1.0)] {
                let ex = SphereProductExample::new(n1, n2, c1, c2, metallic_mean(p, q).unwrap())
                    .unwrap()
                    .with_frame_seed(n1 as u64);
                out.push(build_sphere_product(&ex).unwrap());
                out.push(build_sphere_product_hypersurface(&ex).unwrap().1);
            }
        }
    }
    out
}

#[test]
fn round_trip_is_exact() {
    for seed in 0..100u64 {
        let ops = metallic(seed);
        let back = derive_eight_operators(&ops).unwrap().recover().unwrap();
        for (name, a, b) in [
            ("P", back.p().mat(), ops.p().mat()),
            ("Q", back.q().mat(), ops.q().mat()),
            ("R", back.r().mat(), ops.r().mat()),
            ("S", back.s().mat(), ops.s().mat()),
        ] {
            let r = residual_norm(a, b).unwrap();
            assert!(r < 1e-12, "seed {seed}, {name}: {r:e}");
        }
    }
}

#[test]
fn identities_hold_on_random_splits() {
    for seed in 0..100u64 {
        let ops = metallic(seed);
        let der = DerivativeData::zeros(ops.tangent_dim(), ops.normal_dim());
        let rep = eight_operator_identities(&derive_eight_operators(&ops).unwrap(), &der).unwrap();
        assert!(rep.max_residual() < 1e-10, "seed {seed}:\n{rep}");
    }
}

#[test]
fn identities_hold_on_sphere_records() {
    for rec in sphere_records() {
        let rep = eight_operator_identities(&derive_eight_operators(&rec.ops).unwrap(), &rec.der)
            .unwrap();
        assert!(rep.max_residual() < 1e-10, "{:?}:\n{rep}", rec.target);
    }
}

#[test]
fn derivative_identities_detect_bad_nabla_p() {
    let ex = SphereProductExample::new(2, 2, 1.0, 0.25, metallic_mean(1.0, 1.0).unwrap()).unwrap();
    let mut rec = build_sphere_product_hypersurface(&ex).unwrap().1;
    rec.der.nabla_p[[0, 1, 0]] += 1e-3;
    let rep =
        eight_operator_identities(&derive_eight_operators(&rec.ops).unwrap(), &rec.der).unwrap();
    assert!(
        rep.get("nabla-f[1]").unwrap() > 1e-4 && rep.get("nabla-f[2]").unwrap() > 1e-4,
        "{rep}"
    );
}

#[test]
fn rewritten_forms_match_on_valid_data() {
    for rec in sphere_records() {
        let rep = eight_operator_forms(&rec).unwrap();
        assert!(rep.max_residual() < 1e-12, "{:?}:\n{rep}", rec.target);
    }
}

#[test]
fn rewritten_forms_match_on_random_data() {
    for seed in 0..100u64 {
        let rep = eight_operator_forms(&random_record(seed)).unwrap();
        assert!(rep.max_residual() < 1e-12, "seed {seed}:\n{rep}");
    }
}

#[test]
fn complex_quads_square_to_minus_identity() {
    for seed in 0..100u64 {
        let total = 2 * (1 + seed as usize % 4);
        let n = 1 + (seed as usize / 4) % (total - 1);
        let cp = ComplexMetallicParams::new(
            [1.0, 2.0, 0.5][seed as usize % 3],
            [1.0, 2.0, 5.0][seed as usize % 3],
        )
        .unwrap();
        let ops = random_cms_instance((n, total - n), cp, seed).unwrap();
        let rep = complex_quad_identities(&derive_complex_quad(&ops).unwrap());
        assert!(rep.max_residual() < 1e-10, "seed {seed}:\n{rep}");
    }
}

#[test]
fn complex_params_have_no_eight_operators() {
    let ops =
        random_cms_instance((2, 2), ComplexMetallicParams::new(1.0, 1.0).unwrap(), 1).unwrap();
    assert!(derive_eight_operators(&ops).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn round_trip_for_any_parameters(seed in any::<u64>(), p in 0.2f64..4.0, q in 0.2f64..4.0) {
        let ops = random_metallic_instance(dims(seed % 997), metallic_mean(p, q).unwrap(), seed);
        let back = derive_eight_operators(&ops).unwrap().recover().unwrap();
        prop_assert!(residual_norm(back.p().mat(), ops.p().mat()).unwrap() < 1e-12);
        prop_assert!(residual_norm(back.s().mat(), ops.s().mat()).unwrap() < 1e-12);
        prop_assert!(residual_norm(back.q().mat(), ops.q().mat()).unwrap() < 1e-12);
        prop_assert!(residual_norm(back.r().mat(), ops.r().mat()).unwrap() < 1e-12);
    }

    #[test]
    fn forms_match_for_any_record(seed in any::<u64>()) {
        let rep = eight_operator_forms(&random_record(seed % 10_000)).unwrap();
        prop_assert!(rep.max_residual() < 1e-12, "{}", rep);
    }
}

//! Acceptance gate: one pass/fail line per criterion, non-zero exit if any fails.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use metallic_cli::dataset;
use metallic_core::compat::{
    derive_eight_operators, eight_operator_forms, eight_operator_identities, full_verdict,
    projector_ranks, rank_conditions, Target, FACTOR_PAIRING,
};
use metallic_core::examples::random::{
    gaussian_matrix, random_cms_instance, random_cms_structure, random_hypersurface,
    random_invariant_cms_instance, random_metallic_instance, random_metallic_structure,
    HypersurfaceKind,
};
use metallic_core::examples::{
    build_ekt_immersion, build_sphere_product, build_sphere_product_hypersurface, ekt_grid,
    fd_connection_oracle, sphere_product_chart, EktExample, SphereProductExample,
};
use metallic_core::family::{
    default_thetas, deform, flat_torus_base, verify_family, SurfaceRecord,
};
use metallic_core::model_spaces::{
    csf_curvature_complex, csf_curvature_metallic, ekt_connection, ekt_curvature_tensor,
    product_curvature, ComplexSpaceFormParams, EktParams, ProductSpaceParams,
};
use metallic_core::structures::{
    cms_to_complex, complex_to_cms, metallic_mean, metallic_projections, metallic_to_product,
    product_to_metallic, structure_residual, ComplexMetallicParams,
};
use metallic_core::submanifold::{
    check_algebraic_relations, check_complex_corollary, check_hypersurface_relations, divergence,
    invariant_minimality_check, minimality_criterion, shape_from_jnu_tangent, shape_from_jv_normal,
    DerivativeData, InducedOperators, StructureParams,
};
use metallic_core::tensor::{
    frame_coordinates, frobenius, residual_norm, BilinearForm, CurvatureConvention,
};
use metallic_core::{ResidualReport64, DEFAULT_TOL};
use nalgebra as na;
use ndarray::Array3;
use serde_json::Value;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

/// Fails with `what` unless `value < bound`; otherwise returns the running maximum.
fn below(
    worst: &mut f64,
    value: f64,
    bound: f64,
    what: impl FnOnce() -> String,
) -> Result<(), String> {
    if !(value < bound) {
        return Err(format!("{} = {value:e} (bound {bound:e})", what()));
    }
    *worst = worst.max(value);
    Ok(())
}

fn dims(seed: u64) -> (usize, usize) {
    let total = 2 + (seed as usize % 7);
    let n = 1 + (seed as usize / 7) % (total - 1);
    (n, total - n)
}

fn even_dims(seed: u64) -> (usize, usize) {
    let total = 2 * (1 + seed as usize % 4);
    let n = 1 + (seed as usize / 4) % (total - 1);
    (n, total - n)
}

fn cms_params(seed: u64) -> ComplexMetallicParams<f64> {
    let (a, b) = [(1.0, 1.0), (2.0, 2.0), (1.0, 5.0), (0.5, 3.0)][seed as usize % 4];
    ComplexMetallicParams::new(a, b).unwrap()
}

fn metallic_params(seed: u64) -> metallic_core::structures::MetallicParams<f64> {
    metallic_mean(1.0 + (seed % 3) as f64, 1.0 + (seed % 4) as f64).unwrap()
}

fn structure_algebra() -> Outcome {
    let mut worst = 0.0;
    for seed in 0..100u64 {
        let n = 2 + seed as usize % 7;
        let mp = metallic_params(seed);
        let (j, g) = random_metallic_structure(n, mp, seed);
        below(
            &mut worst,
            structure_residual(&j, &g).max_residual(),
            1e-10,
            || format!("metallic seed {seed}"),
        )?;
        let (f, _) = metallic_to_product(&j).map_err(|e| e.to_string())?;
        below(
            &mut worst,
            structure_residual(&f, &g).max_residual(),
            1e-10,
            || format!("product seed {seed}"),
        )?;
        let back = product_to_metallic(&f, mp).map_err(|e| e.to_string())?.0;
        below(
            &mut worst,
            residual_norm(back.mat(), j.mat()).unwrap(),
            1e-10,
            || format!("product round trip seed {seed}"),
        )?;
        let (p1, p2) = metallic_projections(&j).map_err(|e| e.to_string())?;
        let (a, b) = (p1.op.mat(), p2.op.mat());
        let id = na::DMatrix::<f64>::identity(n, n);
        for (lhs, rhs) in [
            (a * a, a.clone()),
            (b * b, b.clone()),
            (a + b, id.clone()),
            (a * b, id.clone() * 0.0),
        ] {
            below(
                &mut worst,
                residual_norm(&lhs, &rhs).unwrap(),
                1e-10,
                || format!("projector seed {seed}"),
            )?;
        }

        let cn = 2 * (1 + seed as usize % 4);
        let cp = cms_params(seed);
        let (j, g) = random_cms_structure(cn, cp, seed).map_err(|e| e.to_string())?;
        below(
            &mut worst,
            structure_residual(&j, &g).max_residual(),
            1e-10,
            || format!("complex metallic seed {seed}"),
        )?;
        let (jc, _) = cms_to_complex(&j).map_err(|e| e.to_string())?;
        below(
            &mut worst,
            structure_residual(&jc, &g).max_residual(),
            1e-10,
            || format!("complex seed {seed}"),
        )?;
        let back = complex_to_cms(&jc, cp).map_err(|e| e.to_string())?.0;
        below(
            &mut worst,
            residual_norm(back.mat(), j.mat()).unwrap(),
            1e-10,
            || format!("complex round trip seed {seed}"),
        )?;
    }
    Ok(format!("200 instances, max residual {worst:.1e}"))
}

fn suites(ops: &InducedOperators<f64>) -> ResidualReport64 {
    let mut rep = check_algebraic_relations(ops);
    if let StructureParams::ComplexMetallic(_) = ops.params() {
        rep.extend(&check_complex_corollary(ops).unwrap());
    }
    rep
}

fn relation_suites() -> Outcome {
    let mut worst = 0.0;
    let mut weakest = f64::INFINITY;
    let mut perturbed = 0usize;
    for seed in 0..100u64 {
        let instances = [
            random_metallic_instance(dims(seed), metallic_params(seed), seed),
            random_cms_instance(even_dims(seed), cms_params(seed), seed)
                .map_err(|e| e.to_string())?,
        ];
        for ops in &instances {
            below(&mut worst, suites(ops).max_residual(), 1e-10, || {
                format!("seed {seed}")
            })?;
            let blocks = [
                ops.p().mat().clone(),
                ops.q().mat().clone(),
                ops.r().mat().clone(),
                ops.s().mat().clone(),
            ];
            for b in 0..4 {
                for i in 0..blocks[b].nrows() {
                    for j in 0..blocks[b].ncols() {
                        let mut mats = blocks.clone();
                        mats[b][(i, j)] += 1e-3;
                        let [p, q, r, s] = mats;
                        let rep = suites(&ops.with_blocks(p, q, r, s).map_err(|e| e.to_string())?);
                        let Some((_, r)) = rep.first_failure() else {
                            return Err(format!("seed {seed}: perturbation of block {b} entry ({i},{j}) went unnoticed"));
                        };
                        let largest = rep.max_residual();
                        if largest < 1e-4 {
                            return Err(format!(
                                "seed {seed}: perturbation residual {r:e} below 1e-4"
                            ));
                        }
                        weakest = weakest.min(largest);
                        perturbed += 1;
                    }
                }
            }
        }
    }
    Ok(format!("200 splits, max residual {worst:.1e}; {perturbed} perturbations named, weakest {weakest:.1e}"))
}

fn sphere_grid() -> Vec<SphereProductExample<f64>> {
    let mut out = Vec::new();
    for (p, q) in [(1.0, 1.0), (2.0, 1.0), (1.0, 3.0)] {
        for (n1, n2) in [(2, 2), (3, 2)] {
            for c1 in [1.0, 0.25] {
                for c2 in [1.0, 0.25] {
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

fn sphere_product() -> Outcome {
    let mut worst = 0.0;
    let grid = sphere_grid();
    for ex in &grid {
        let rec = build_sphere_product(ex).map_err(|e| e.to_string())?;
        let rep = full_verdict(&rec);
        if !rep.verdict() {
            return Err(format!("{:?}: {:?}", ex.params, rep.first_failure()));
        }
        worst = f64::max(worst, rep.max_residual());
        if rec.ops.q().mat().amax() != 0.0 || rec.ops.r().mat().amax() != 0.0 {
            return Err(format!("{:?}: Q or R is not exactly zero", ex.params));
        }
        if frobenius(rec.der.b.coeffs()) != 0.0 {
            return Err("B is not zero".into());
        }
        if !rank_conditions(&rec).map_err(|e| e.to_string())?.verdict() {
            return Err(format!("{:?}: rank conditions fail", ex.params));
        }
        let Target::Product(pp) = rec.target else {
            return Err("product target expected".into());
        };
        let ranks = projector_ranks(&rec.ops).map_err(|e| e.to_string())?;
        if ranks != FACTOR_PAIRING.expected_ranks(pp.n1, pp.n2) {
            return Err(format!("{:?}: projector ranks {ranks:?}", ex.params));
        }
    }
    Ok(format!(
        "{} grid points, max residual {worst:.1e}",
        grid.len()
    ))
}

fn sphere_hypersurface() -> Outcome {
    let mut worst = 0.0;
    for ex in sphere_grid() {
        let (n1, n2) = (ex.params.n1, ex.params.n2);
        let (h, rec) = build_sphere_product_hypersurface(&ex).map_err(|e| e.to_string())?;
        let rel = check_hypersurface_relations(&h, StructureParams::Metallic(ex.mp))
            .map_err(|e| e.to_string())?;
        below(&mut worst, rel.max_residual(), 1e-9, || {
            format!("{:?} hypersurface relations", ex.params)
        })?;
        let a = h.a.mat();
        below(&mut worst, a.columns(0, n1).amax(), 1e-12, || {
            "A on the first factor".into()
        })?;
        let second =
            a.view((n1, n1), (n2, n2)) - na::DMatrix::identity(n2, n2) * ex.params.c2.sqrt();
        below(&mut worst, second.amax(), 1e-12, || {
            "A - sqrt(c2) id on the second factor".into()
        })?;
        let Target::Product(pp) = rec.target else {
            return Err("product target expected".into());
        };
        if (pp.c1, pp.c2) != (ex.params.c1, 0.0) {
            return Err(format!("target curvatures {:?}", (pp.c1, pp.c2)));
        }
        let rep = full_verdict(&rec);
        below(
            &mut worst,
            rep.get("gauss").unwrap_or(f64::NAN),
            1e-9,
            || "gauss".into(),
        )?;
        if !rep.verdict() {
            return Err(format!("{:?}: {:?}", ex.params, rep.first_failure()));
        }
    }
    Ok(format!("24 grid points, max residual {worst:.1e}"))
}

fn ekt() -> Outcome {
    let mut worst = 0.0;
    let e = |i: usize| na::DVector::from_fn(3, |k, _| if k == i { 1.0 } else { 0.0 });
    for ex in ekt_grid::<f64>() {
        let rec = build_ekt_immersion(&ex).map_err(|e| e.to_string())?;
        let rel = check_hypersurface_relations(
            &ex.hypersurface().map_err(|e| e.to_string())?,
            rec.ops.params(),
        )
        .map_err(|e| e.to_string())?;
        below(&mut worst, rel.max_residual(), 1e-10, || {
            format!("{ex:?} relation suite")
        })?;
        let rep = full_verdict(&rec);
        for name in ["gauss", "codazzi"] {
            below(&mut worst, rep.get(name).unwrap_or(f64::NAN), 1e-10, || {
                format!("{ex:?} {name}")
            })?;
        }
        if !rep.verdict() {
            return Err(format!("{ex:?}: {:?}", rep.first_failure()));
        }
        let d = ex.d_nabla_a();
        for i in 0..3 {
            for j in 0..3 {
                let independent = na::DVector::from_fn(3, |k, _| d[[i, j, k]]);
                below(
                    &mut worst,
                    (&independent - ex.d_nabla_a_closed_form(&e(i), &e(j))).amax(),
                    1e-10,
                    || "codazzi closed form".into(),
                )?;
            }
        }
    }
    for tau in [0.5, 1.0, 2.0] {
        let ex = EktExample::new(4.0 * tau * tau, tau, 1.0, 1.0).map_err(|e| e.to_string())?;
        below(
            &mut worst,
            (ex.shape() - na::DMatrix::identity(3, 3) * tau).amax(),
            1e-12,
            || "degenerate A".into(),
        )?;
        below(
            &mut worst,
            ex.d_nabla_a().iter().fold(0.0f64, |m, x| m.max(x.abs())),
            1e-12,
            || "degenerate Codazzi".into(),
        )?;
    }
    Ok(format!(
        "45 grid points and 3 degenerate points, max residual {worst:.1e}"
    ))
}

fn chart_jacobian(
    chart: &impl Fn(&na::DVector<f64>) -> na::DVector<f64>,
    u: &na::DVector<f64>,
    h: f64,
) -> na::DMatrix<f64> {
    let cols: Vec<na::DVector<f64>> = (0..u.len())
        .map(|k| {
            let at = |s: f64| {
                let mut w = u.clone();
                w[k] += s * h;
                chart(&w)
            };
            (at(-2.0) - at(2.0) + (at(1.0) - at(-1.0)) * 8.0) / (12.0 * h)
        })
        .collect();
    na::DMatrix::from_columns(&cols)
}

fn curvature_oracles() -> Outcome {
    let (mut ekt_worst, mut fd_worst, mut csf_worst) = (0.0, 0.0, 0.0);
    for kappa in [-4.0, -1.0, 0.0, 1.0, 4.0] {
        for tau in [0.5, 1.0, 2.0] {
            let params = EktParams::new(kappa, tau).map_err(|e| e.to_string())?;
            let closed = ekt_curvature_tensor(&params).to_convention(CurvatureConvention::Standard);
            let comm = ekt_connection(&params).curvature();
            let d = (closed.coeffs() - comm.coeffs())
                .iter()
                .fold(0.0f64, |m: f64, x: &f64| m.max(x.abs()));
            below(&mut ekt_worst, d, 1e-12, || {
                format!("E({kappa},{tau}) curvature")
            })?;
        }
    }
    for (n1, n2, c1, c2) in [
        (2usize, 2usize, 1.0, 1.0),
        (2, 1, 0.25, 1.0),
        (3, 2, 0.25, 0.25),
    ] {
        let chart = sphere_product_chart::<f64>(n1, n2, c1, c2);
        let n = n1 + n2;
        let u = na::DVector::from_fn(n, |k, _| 0.7 + 0.13 * k as f64);
        let (_, fd) = fd_connection_oracle(&chart, &u, 1e-3).map_err(|e| e.to_string())?;
        let jac = chart_jacobian(&chart, &u, 1e-4);
        let params = ProductSpaceParams::new(n1 + 1, n2 + 1, c1, c2).map_err(|e| e.to_string())?;
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    let (x, y, z) = (
                        jac.column(a).into_owned(),
                        jac.column(b).into_owned(),
                        jac.column(c).into_owned(),
                    );
                    let exact = frame_coordinates(
                        &jac,
                        &product_curvature(&params, &x, &y, &z).map_err(|e| e.to_string())?,
                    );
                    below(&mut fd_worst, (fd.at(a, b, c) - exact).amax(), 1e-5, || {
                        "finite-difference curvature".into()
                    })?;
                }
            }
        }
    }
    for seed in 0..100u64 {
        let n = 2 * (1 + seed as usize % 4);
        let cp = cms_params(seed / 4);
        let (j, g) = random_cms_structure(n, cp, seed).map_err(|e| e.to_string())?;
        let (jc, _) = cms_to_complex(&j).map_err(|e| e.to_string())?;
        let params = ComplexSpaceFormParams::new(n / 2, [-1.0, 0.5, 2.0][seed as usize % 3])
            .map_err(|e| e.to_string())?;
        let v = gaussian_matrix::<f64>(n, 3, seed ^ 0x5eed);
        let (x, y, z) = (
            v.column(0).into_owned(),
            v.column(1).into_owned(),
            v.column(2).into_owned(),
        );
        let lhs = csf_curvature_metallic(&params, &cp, j.mat(), &g, &x, &y, &z);
        let rhs = csf_curvature_complex(&params, jc.mat(), &g, &x, &y, &z);
        below(
            &mut csf_worst,
            (lhs - &rhs).norm() / rhs.norm().max(1.0),
            1e-12,
            || format!("complex space form probe {seed}"),
        )?;
    }
    Ok(format!("E(kappa,tau) {ekt_worst:.1e}, finite differences {fd_worst:.1e}, complex space form {csf_worst:.1e}"))
}

fn eight_operators() -> Outcome {
    let mut worst = 0.0;
    for seed in 0..100u64 {
        let ops = random_metallic_instance(dims(seed), metallic_params(seed), seed);
        let e8 = derive_eight_operators(&ops).map_err(|e| e.to_string())?;
        let back = e8.recover().map_err(|e| e.to_string())?;
        for (a, b) in [
            (back.p(), ops.p()),
            (back.q(), ops.q()),
            (back.r(), ops.r()),
            (back.s(), ops.s()),
        ] {
            below(
                &mut worst,
                residual_norm(a.mat(), b.mat()).unwrap(),
                1e-12,
                || format!("round trip seed {seed}"),
            )?;
        }
        let der = DerivativeData::zeros(ops.tangent_dim(), ops.normal_dim());
        let rep = eight_operator_identities(&e8, &der).map_err(|e| e.to_string())?;
        below(&mut worst, rep.max_residual(), 1e-10, || {
            format!("identities seed {seed}")
        })?;
    }
    for ex in sphere_grid() {
        for rec in [
            build_sphere_product(&ex.clone().with_frame_seed(3)).map_err(|e| e.to_string())?,
            build_sphere_product_hypersurface(&ex)
                .map_err(|e| e.to_string())?
                .1,
        ] {
            let e8 = derive_eight_operators(&rec.ops).map_err(|e| e.to_string())?;
            let ids = eight_operator_identities(&e8, &rec.der).map_err(|e| e.to_string())?;
            below(&mut worst, ids.max_residual(), 1e-10, || {
                format!("{:?} identities", ex.params)
            })?;
            let forms = eight_operator_forms(&rec).map_err(|e| e.to_string())?;
            below(&mut worst, forms.max_residual(), 1e-12, || {
                format!("{:?} rewritten forms", ex.params)
            })?;
        }
    }
    Ok(format!(
        "100 round trips and 48 records, max residual {worst:.1e}"
    ))
}

fn shape_operators() -> Outcome {
    let (mut worst, mut crit_worst) = (0.0, 0.0);
    for seed in 0..100u64 {
        let n = 2 + seed as usize % 5;
        let mp = metallic_params(seed);
        for kind in [HypersurfaceKind::JvNormal, HypersurfaceKind::JnuTangent] {
            let h = random_hypersurface(n, mp, kind, seed);
            let (a, _) = match kind {
                HypersurfaceKind::JvNormal => {
                    shape_from_jv_normal(&h.p, &h.v, &h.nabla_v, mp, h.g())
                }
                HypersurfaceKind::JnuTangent => {
                    shape_from_jnu_tangent(&h.p, &h.v, &h.nabla_v, mp, h.g())
                }
            }
            .map_err(|e| e.to_string())?;
            below(&mut worst, (a.mat() * &h.v).norm(), 1e-12, || {
                format!("A(V) seed {seed} {kind:?}")
            })?;
            below(
                &mut worst,
                a.mat().clone().determinant().abs(),
                1e-12,
                || format!("det A seed {seed} {kind:?}"),
            )?;
        }
        let h = random_hypersurface(n, mp, HypersurfaceKind::JvNormal, seed);
        let g = h.g();
        let crit = minimality_criterion(&h.p, &divergence(&h.nabla_p, g), &h.v, g)
            .map_err(|e| e.to_string())?;
        let oracle = mp.q() * h.a.mat().trace();
        below(
            &mut crit_worst,
            (crit - oracle).abs() / oracle.abs().max(1.0),
            1e-10,
            || format!("minimality seed {seed}"),
        )?;
    }
    Ok(format!("200 shape operators, max |A(V)|, |det A| {worst:.1e}; minimality criterion {crit_worst:.1e}"))
}

fn invariant_minimality() -> Outcome {
    let mut worst = 0.0;
    for seed in 0..100u64 {
        let n = 2 * (1 + seed as usize % 3);
        let m = 2 * (1 + (seed as usize / 3) % 2);
        let (ops, b) = random_invariant_cms_instance((n, m), cms_params(seed), seed)
            .map_err(|e| e.to_string())?;
        let rep = invariant_minimality_check(&ops, &b).map_err(|e| e.to_string())?;
        below(
            &mut worst,
            rep.get("trace-B").unwrap_or(f64::NAN),
            1e-10,
            || format!("trace B seed {seed}"),
        )?;
        below(
            &mut worst,
            rep.get("frame-orthonormal").unwrap_or(f64::NAN),
            1e-10,
            || format!("adapted frame seed {seed}"),
        )?;
    }
    Ok(format!("100 instances, max residual {worst:.1e}"))
}

fn associated_family() -> Outcome {
    let mut worst = 0.0;
    let base =
        flat_torus_base(metallic_mean(1.0, 1.0).unwrap(), 1.0, 0.25).map_err(|e| e.to_string())?;
    let mut b = Array3::zeros((2, 2, 2));
    for (a, (x, y)) in [(0.4, -0.2), (0.1, 0.9)].into_iter().enumerate() {
        b[[0, 0, a]] = x;
        b[[1, 1, a]] = -x;
        b[[0, 1, a]] = y;
        b[[1, 0, a]] = y;
    }
    let mut rec = base.record.clone();
    rec.der.b = BilinearForm::new(b).map_err(|e| e.to_string())?;
    let rec = SurfaceRecord::new(rec).map_err(|e| e.to_string())?;
    let norm = frobenius(rec.record.der.b.coeffs());
    for (t1, t2) in [(0.3, 0.5), (1.0, 2.5), (-0.7, 0.2)] {
        let twice = deform(&deform(&rec, t1).map_err(|e| e.to_string())?.record, t2)
            .map_err(|e| e.to_string())?;
        let once = deform(&rec, t1 + t2).map_err(|e| e.to_string())?;
        let r = residual_norm(
            twice.record.record.der.b.coeffs(),
            once.record.record.der.b.coeffs(),
        )
        .unwrap();
        below(&mut worst, r, 1e-12, || {
            format!("group action ({t1}, {t2})")
        })?;
    }
    let thetas: Vec<f64> = default_thetas(24);
    for &t in &thetas {
        let d = deform(&rec, t).map_err(|e| e.to_string())?;
        below(
            &mut worst,
            (frobenius(d.record.record.der.b.coeffs()) - norm).abs(),
            1e-12,
            || format!("norm at {t}"),
        )?;
        below(&mut worst, d.record.trace_b().norm(), 1e-12, || {
            format!("trace at {t}")
        })?;
    }
    let fam = verify_family(&base, &thetas, DEFAULT_TOL).map_err(|e| e.to_string())?;
    if !fam.verdict() {
        return Err(format!(
            "family of the totally geodesic base fails: {:?}",
            fam.combined.first_failure()
        ));
    }
    Ok(format!(
        "24 angles, max residual {worst:.1e}, family verdict PASS"
    ))
}

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_metallic-geo")
}

fn run(args: &[&str]) -> Output {
    Command::new(bin())
        .args(args)
        .env_remove("METALLIC_GEO_SEED")
        .output()
        .expect("binary runs")
}

fn expect_code(args: &[&str], code: i32) -> Result<Output, String> {
    let out = run(args);
    match out.status.code() {
        Some(c) if c == code => Ok(out),
        other => Err(format!(
            "`{}` exited with {other:?}, expected {code}; stderr: {}",
            args.join(" "),
            String::from_utf8_lossy(&out.stderr).trim()
        )),
    }
}

fn scratch(name: &str) -> PathBuf {
    Path::new(env!("CARGO_TARGET_TMPDIR")).join(format!("acceptance-{}-{name}", std::process::id()))
}

fn path_str(p: &Path) -> &str {
    p.to_str().expect("utf-8 path")
}

fn cli() -> Outcome {
    expect_code(
        &[
            "verify", "builtin", "ekt", "--kappa", "0", "--tau", "1", "--a", "2", "--b", "2",
        ],
        0,
    )?;
    expect_code(
        &[
            "verify",
            "builtin",
            "sphere-product",
            "--p",
            "1",
            "--q",
            "1",
            "--n1",
            "2",
            "--n2",
            "2",
            "--c1",
            "1",
            "--c2",
            "1",
        ],
        0,
    )?;
    expect_code(
        &[
            "verify",
            "builtin",
            "sphere-product-hypersurface",
            "--n1",
            "3",
            "--c2",
            "0.25",
        ],
        0,
    )?;
    let out = expect_code(&["verify", "builtin", "ekt", "--tau", "0"], 2)?;
    if !String::from_utf8_lossy(&out.stderr).contains("tau must be nonzero") {
        return Err("missing \"tau must be nonzero\" message".into());
    }

    let exported = scratch("sphere.json");
    expect_code(
        &[
            "export",
            "sphere-product",
            "--p",
            "2",
            "--n1",
            "3",
            "--c2",
            "0.25",
            "--out",
            path_str(&exported),
        ],
        0,
    )?;
    expect_code(&["verify", "dataset", path_str(&exported)], 0)?;

    let text = std::fs::read_to_string(&exported).map_err(|e| e.to_string())?;
    let records = dataset::from_json(&text).map_err(|e| e.to_string())?;
    if dataset::to_json(&records) != text {
        return Err("re-serialized dataset differs from the exported file".into());
    }
    let mut originals = Vec::new();
    for (seed, ex) in sphere_grid().into_iter().enumerate() {
        originals.push(
            build_sphere_product(&ex.clone().with_frame_seed(seed as u64))
                .map_err(|e| e.to_string())?,
        );
        originals.push(
            build_sphere_product_hypersurface(&ex)
                .map_err(|e| e.to_string())?
                .1,
        );
    }
    for ex in ekt_grid::<f64>() {
        originals.push(build_ekt_immersion(&ex).map_err(|e| e.to_string())?);
    }
    let back = dataset::from_json(&dataset::to_json(&originals)).map_err(|e| e.to_string())?;
    if back != originals {
        return Err("dataset round trip is not bit-exact".into());
    }

    let mut doc: Value = serde_json::from_str(&text).map_err(|e| e.to_string())?;
    let entry = &mut doc["records"][0]["P"]["data"][0][0];
    let x: f64 = entry.as_str().unwrap().parse().unwrap();
    *entry = Value::String(format!("{:.16e}", x + 1e-3));
    let perturbed = scratch("perturbed.json");
    std::fs::write(&perturbed, doc.to_string()).map_err(|e| e.to_string())?;
    let out = expect_code(&["verify", "dataset", path_str(&perturbed)], 1)?;
    if !String::from_utf8_lossy(&out.stdout).contains("failed P2+RQ") {
        return Err("perturbed dataset does not name the failing identity".into());
    }

    let mut doc: Value = serde_json::from_str(&text).map_err(|e| e.to_string())?;
    doc["records"][0]["P"]["data"][1]
        .as_array_mut()
        .unwrap()
        .pop();
    let malformed = scratch("malformed.json");
    std::fs::write(&malformed, doc.to_string()).map_err(|e| e.to_string())?;
    let out = expect_code(&["verify", "dataset", path_str(&malformed)], 2)?;
    if !String::from_utf8_lossy(&out.stderr).contains("$.records[0].P.data[1]") {
        return Err("malformed dataset diagnostic does not name the field".into());
    }

    expect_code(&["family-sweep", "flat-torus", "--thetas", "24"], 0)?;
    let torus = scratch("torus.json");
    expect_code(
        &[
            "export",
            "flat-torus",
            "--c2",
            "0.25",
            "--out",
            path_str(&torus),
        ],
        0,
    )?;
    let (sweep_report, dataset_report) =
        (scratch("sweep-report.json"), scratch("dataset-report.json"));
    expect_code(
        &[
            "family-sweep",
            path_str(&torus),
            "--thetas",
            "1",
            "--out",
            path_str(&sweep_report),
        ],
        0,
    )?;
    expect_code(
        &[
            "verify",
            "dataset",
            path_str(&torus),
            "--out",
            path_str(&dataset_report),
        ],
        0,
    )?;
    let entries = |p: &Path| -> Result<Value, String> {
        let v: Value =
            serde_json::from_str(&std::fs::read_to_string(p).map_err(|e| e.to_string())?)
                .map_err(|e| e.to_string())?;
        Ok(v["records"][0]["entries"].clone())
    };
    if entries(&sweep_report)? != entries(&dataset_report)? {
        return Err("single-angle sweep differs from verifying the base".into());
    }

    let curved = scratch("curved.json");
    expect_code(
        &[
            "export",
            "sphere-product-hypersurface",
            "--n1",
            "1",
            "--n2",
            "1",
            "--out",
            path_str(&curved),
        ],
        0,
    )?;
    let out = expect_code(&["family-sweep", path_str(&curved)], 2)?;
    if !String::from_utf8_lossy(&out.stderr).contains("not minimal") {
        return Err("non-minimal base is not reported".into());
    }
    for p in [
        exported,
        perturbed,
        malformed,
        torus,
        sweep_report,
        dataset_report,
        curved,
    ] {
        let _ = std::fs::remove_file(p);
    }
    Ok(format!(
        "14 invocations with documented exit codes, {} records round-trip bit-exactly",
        originals.len()
    ))
}

fn main() {
    let criteria: [Criterion; 11] = [
        ("structure algebra", structure_algebra),
        ("submanifold relation suites", relation_suites),
        ("sphere product", sphere_product),
        ("sphere product hypersurface", sphere_hypersurface),
        ("E(kappa,tau) in a complex space form", ekt),
        ("curvature oracles", curvature_oracles),
        ("eight operators", eight_operators),
        ("shape operator propositions", shape_operators),
        ("invariant minimality", invariant_minimality),
        ("associated family", associated_family),
        ("command line", cli),
    ];
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail}", k + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {why}", k + 1);
            }
        }
    }
    println!(
        "{} of {} criteria pass",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}

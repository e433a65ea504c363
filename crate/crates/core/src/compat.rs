//! Compatibility equations at a point: Gauss, Codazzi and Ricci residuals for
//! product and complex space form targets, the projector form of the
//! metallic blocks, rank conditions and whole-record verdicts.

use nalgebra::{DMatrix, DVector};
use ndarray::Array4;
use rayon::prelude::*;

pub use crate::model_spaces::{FactorPairing, FACTOR_PAIRING};

use crate::model_spaces::{product_curvature_metallic, ComplexSpaceFormParams, ProductSpaceParams};
use crate::report::ResidualReport;
use crate::structures::{ComplexMetallicParams, MetallicParams};
use crate::submanifold::{
    check_algebraic_relations, check_complex_corollary, check_derivative_consistency,
    check_derivative_relations, DerivativeData, InducedOperators, StructureParams,
};
use crate::tensor::{
    rank_with_tol, residual_norm, CurvatureConvention, CurvatureTensor, Metric, OperatorBlock,
};
use crate::{Error, Real, Result, DEFAULT_TOL};

/// Relative singular value threshold used by [`rank_conditions`].
pub const RANK_TOL: f64 = 1e-8;

/// Ambient model space of a compatibility system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Target<T: Real> {
    Product(ProductSpaceParams<T>),
    ComplexSpaceForm(ComplexSpaceFormParams<T>),
}

impl<T: Real> Target<T> {
    pub fn ambient_dim(&self) -> usize {
        match self {
            Target::Product(pp) => pp.dim(),
            Target::ComplexSpaceForm(cp) => cp.real_dim(),
        }
    }
}

/// Everything the compatibility equations need at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct PointRecord<T: Real> {
    pub ops: InducedOperators<T>,
    pub der: DerivativeData<T>,
    /// Intrinsic curvature of `TM`, always stored in the standard convention
    /// (as is the normal curvature inside `der`).
    pub r_tm: CurvatureTensor<T>,
    pub target: Target<T>,
}

impl<T: Real> PointRecord<T> {
    /// Validates array shapes and that the structure kind matches the target.
    pub fn new(
        ops: InducedOperators<T>,
        der: DerivativeData<T>,
        r_tm: CurvatureTensor<T>,
        target: Target<T>,
    ) -> Result<Self> {
        let (n, m) = (ops.tangent_dim(), ops.normal_dim());
        der.validate(n, m)?;
        if r_tm.dim() != n || r_tm.fiber_dim() != n {
            return Err(Error::dims(
                "intrinsic curvature",
                format!("{n}x{n}x{n}x{n}"),
                format!("{:?}", r_tm.coeffs().shape()),
            ));
        }
        match (&target, ops.params()) {
            (Target::Product(_), StructureParams::Metallic(_))
            | (Target::ComplexSpaceForm(_), StructureParams::ComplexMetallic(_)) => {}
            _ => {
                return Err(Error::Precondition(
                    "structure kind does not match the target".into(),
                ))
            }
        }
        let r_tm = r_tm.to_convention(CurvatureConvention::Standard);
        let mut der = der;
        der.rperp = der.rperp.to_convention(CurvatureConvention::Standard);
        Ok(Self {
            ops,
            der,
            r_tm,
            target,
        })
    }

    pub fn g(&self) -> &Metric<T> {
        self.ops.g()
    }

    pub fn ge(&self) -> &Metric<T> {
        self.ops.ge()
    }

    pub fn tangent_dim(&self) -> usize {
        self.ops.tangent_dim()
    }

    pub fn normal_dim(&self) -> usize {
        self.ops.normal_dim()
    }

    fn metallic(&self) -> Result<(ProductSpaceParams<T>, MetallicParams<T>)> {
        match (self.target, self.ops.params()) {
            (Target::Product(pp), StructureParams::Metallic(mp)) => Ok((pp, mp)),
            _ => Err(Error::Precondition("product target required".into())),
        }
    }

    fn complex(&self) -> Result<(ComplexSpaceFormParams<T>, ComplexMetallicParams<T>)> {
        match (self.target, self.ops.params()) {
            (Target::ComplexSpaceForm(cs), StructureParams::ComplexMetallic(cp)) => Ok((cs, cp)),
            _ => Err(Error::Precondition(
                "complex space form target required".into(),
            )),
        }
    }
}

fn unit<T: Real>(n: usize, i: usize) -> DVector<T> {
    let mut v = DVector::zeros(n);
    v[i] = T::one();
    v
}

fn array4_from_fn<T: Real>(
    n: usize,
    k: usize,
    fib: usize,
    f: impl Fn(usize, usize, usize) -> DVector<T>,
) -> Array4<T> {
    let mut out = Array4::zeros((n, n, k, fib));
    for i in 0..n {
        for j in 0..n {
            for c in 0..k {
                let v = f(i, j, c);
                for l in 0..fib {
                    out[[i, j, c, l]] = v[l];
                }
            }
        }
    }
    out
}

fn single<T: Real>(name: &str, r: Result<T>) -> ResidualReport<T> {
    let mut rep = ResidualReport::new(T::lit(DEFAULT_TOL));
    rep.push(name, r.unwrap_or(T::nan()));
    rep
}

/// `A_{B(e_j, e_k)} e_i - A_{B(e_i, e_k)} e_j`.
fn gauss_shape_terms<T: Real>(rec: &PointRecord<T>, i: usize, j: usize, k: usize) -> DVector<T> {
    let n = rec.tangent_dim();
    let der = &rec.der;
    der.shape_op(&der.b.at(j, k)) * unit::<T>(n, i)
        - der.shape_op(&der.b.at(i, k)) * unit::<T>(n, j)
}

/// `B(A_nu e_j, e_i) - B(A_nu e_i, e_j)` for the normal frame vector `nu = n_a`.
fn ricci_shape_terms<T: Real>(rec: &PointRecord<T>, i: usize, j: usize, a: usize) -> DVector<T> {
    let n = rec.tangent_dim();
    let der = &rec.der;
    let sa = &der.shape[a];
    der.b.eval(&(sa * unit::<T>(n, j)), &unit(n, i))
        - der.b.eval(&(sa * unit::<T>(n, i)), &unit(n, j))
}

fn lhs_gauss<T: Real>(rec: &PointRecord<T>) -> Array4<T> {
    let n = rec.tangent_dim();
    array4_from_fn(n, n, n, |i, j, k| rec.r_tm.at(i, j, k))
}

fn lhs_codazzi<T: Real>(rec: &PointRecord<T>) -> Array4<T> {
    let (n, m) = (rec.tangent_dim(), rec.normal_dim());
    codazzi_array(n, m, |i, j, k| {
        rec.der.nabla_b_at(i, j, k) - rec.der.nabla_b_at(j, i, k)
    })
}

fn lhs_ricci<T: Real>(rec: &PointRecord<T>) -> Array4<T> {
    let (n, m) = (rec.tangent_dim(), rec.normal_dim());
    ricci_array(n, m, |i, j, a| rec.der.rperp.at(i, j, a))
}

fn codazzi_array<T: Real>(
    n: usize,
    m: usize,
    f: impl Fn(usize, usize, usize) -> DVector<T>,
) -> Array4<T> {
    let mut out = Array4::zeros((n, n, n, m));
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let v = f(i, j, k);
                for a in 0..m {
                    out[[i, j, k, a]] = v[a];
                }
            }
        }
    }
    out
}

fn ricci_array<T: Real>(
    n: usize,
    m: usize,
    f: impl Fn(usize, usize, usize) -> DVector<T>,
) -> Array4<T> {
    let mut out = Array4::zeros((n, n, m, m));
    for i in 0..n {
        for j in 0..n {
            for a in 0..m {
                let v = f(i, j, a);
                for b in 0..m {
                    out[[i, j, a, b]] = v[b];
                }
            }
        }
    }
    out
}

fn gauss_rhs_product<T: Real>(rec: &PointRecord<T>) -> Result<Array4<T>> {
    let (pp, mp) = rec.metallic()?;
    let n = rec.tangent_dim();
    let p = rec.ops.p().mat();
    Ok(array4_from_fn(n, n, n, |i, j, k| {
        product_curvature_metallic(&pp, &mp, p, rec.g(), &unit(n, i), &unit(n, j), &unit(n, k))
            + gauss_shape_terms(rec, i, j, k)
    }))
}

fn codazzi_rhs_product<T: Real>(rec: &PointRecord<T>) -> Result<Array4<T>> {
    let (pp, mp) = rec.metallic()?;
    let (n, m) = (rec.tangent_dim(), rec.normal_dim());
    let (k1, k2) = FACTOR_PAIRING.coefficients(pp.c1, pp.c2);
    let (s, d) = (mp.sigma(), mp.gap());
    let sp = s - mp.p();
    let (p, q, g) = (rec.ops.p().mat(), rec.ops.q().mat(), rec.g());
    Ok(codazzi_array(n, m, |i, j, k| {
        let (x, y, z) = (unit::<T>(n, i), unit::<T>(n, j), unit::<T>(n, k));
        let (qx, qy) = (q * &x, q * &y);
        let pterm = &qx * g.inner(&(p * &y), &z) - &qy * g.inner(&(p * &x), &z);
        let plain = &qx * g.inner(&y, &z) - &qy * g.inner(&x, &z);
        ((&pterm - &plain * s) * k1 + (&pterm + &plain * sp) * k2) / (d * d)
    }))
}

fn ricci_rhs_product<T: Real>(rec: &PointRecord<T>) -> Result<Array4<T>> {
    let (pp, mp) = rec.metallic()?;
    let (n, m) = (rec.tangent_dim(), rec.normal_dim());
    let d = mp.gap();
    let coef = (pp.c1 + pp.c2) / (d * d);
    let (q, ge) = (rec.ops.q().mat(), rec.ge());
    Ok(ricci_array(n, m, |i, j, a| {
        let (qx, qy, nu) = (
            q.column(i).into_owned(),
            q.column(j).into_owned(),
            unit::<T>(m, a),
        );
        (&qx * ge.inner(&qy, &nu) - &qy * ge.inner(&qx, &nu)) * coef
            + ricci_shape_terms(rec, i, j, a)
    }))
}

fn residual_report<T: Real>(
    name: &str,
    lhs: Array4<T>,
    rhs: Result<Array4<T>>,
) -> ResidualReport<T> {
    single(name, rhs.and_then(|r| residual_norm(&lhs, &r)))
}

/// Gauss equation against a product target on every frame triple.
pub fn gauss_residual_product<T: Real>(rec: &PointRecord<T>) -> ResidualReport<T> {
    residual_report("gauss", lhs_gauss(rec), gauss_rhs_product(rec))
}

/// Codazzi equation against a product target on every frame triple.
pub fn codazzi_residual_product<T: Real>(rec: &PointRecord<T>) -> ResidualReport<T> {
    residual_report("codazzi", lhs_codazzi(rec), codazzi_rhs_product(rec))
}

/// Ricci equation against a product target on every frame triple.
pub fn ricci_residual_product<T: Real>(rec: &PointRecord<T>) -> ResidualReport<T> {
    residual_report("ricci", lhs_ricci(rec), ricci_rhs_product(rec))
}

/// Coefficients `(c(1 + a^2/delta^2), 2ac/delta^2, 4c/delta^2, 2ca^2/delta^2, 4ac/delta^2, 8c/delta^2)`.
fn csf_coefficients<T: Real>(c: T, cp: &ComplexMetallicParams<T>) -> [T; 6] {
    let (a, d2) = (cp.a(), cp.delta() * cp.delta());
    [
        c * (T::one() + a * a / d2),
        T::lit(2.0) * a * c / d2,
        T::lit(4.0) * c / d2,
        T::lit(2.0) * c * a * a / d2,
        T::lit(4.0) * a * c / d2,
        T::lit(8.0) * c / d2,
    ]
}

fn gauss_rhs_csf<T: Real>(rec: &PointRecord<T>) -> Result<Array4<T>> {
    let (cs, cp) = rec.complex()?;
    let n = rec.tangent_dim();
    let [k0, k1, k2, k3, k4, k5] = csf_coefficients(cs.c, &cp);
    let (p, g) = (rec.ops.p().mat(), rec.g());
    Ok(array4_from_fn(n, n, n, |i, j, k| {
        let (x, y, z) = (unit::<T>(n, i), unit::<T>(n, j), unit::<T>(n, k));
        let (px, py, pz) = (p * &x, p * &y, p * &z);
        let (yz, xz, xy) = (g.inner(&y, &z), g.inner(&x, &z), g.inner(&x, &y));
        let (pyz, pxz, xpy) = (g.inner(&py, &z), g.inner(&px, &z), g.inner(&x, &py));
        (&x * yz - &y * xz) * k0
            + (&px * yz - &py * xz) * k1
            + (&x * pyz - &y * pxz) * k1
            + (&px * pyz - &py * pxz) * k2
            + &z * (k3 * xy)
            + (&pz * xy + &z * xpy) * k4
            + &pz * (k5 * xpy)
            + gauss_shape_terms(rec, i, j, k)
    }))
}

fn codazzi_rhs_csf<T: Real>(rec: &PointRecord<T>) -> Result<Array4<T>> {
    let (cs, cp) = rec.complex()?;
    let (n, m) = (rec.tangent_dim(), rec.normal_dim());
    let [_, k1, k2, _, k4, k5] = csf_coefficients(cs.c, &cp);
    let (p, q, g) = (rec.ops.p().mat(), rec.ops.q().mat(), rec.g());
    Ok(codazzi_array(n, m, |i, j, k| {
        let (x, y, z) = (unit::<T>(n, i), unit::<T>(n, j), unit::<T>(n, k));
        let (qx, qy, qz) = (q * &x, q * &y, q * &z);
        (&qx * g.inner(&y, &z) - &qy * g.inner(&x, &z)) * k1
            + (&qx * g.inner(&(p * &y), &z) - &qy * g.inner(&(p * &x), &z)) * k2
            + &qz * (k4 * g.inner(&x, &y))
            + &qz * (k5 * g.inner(&x, &(p * &y)))
    }))
}

fn ricci_rhs_csf<T: Real>(rec: &PointRecord<T>) -> Result<Array4<T>> {
    let (cs, cp) = rec.complex()?;
    let (n, m) = (rec.tangent_dim(), rec.normal_dim());
    let [_, _, k2, k3, k4, k5] = csf_coefficients(cs.c, &cp);
    let (p, q, s, g, ge) = (
        rec.ops.p().mat(),
        rec.ops.q().mat(),
        rec.ops.s().mat(),
        rec.g(),
        rec.ge(),
    );
    Ok(ricci_array(n, m, |i, j, a| {
        let (x, y, nu) = (unit::<T>(n, i), unit::<T>(n, j), unit::<T>(m, a));
        let (qx, qy) = (q * &x, q * &y);
        let snu = s * &nu;
        let (xy, xpy) = (g.inner(&x, &y), g.inner(&x, &(p * &y)));
        (&qx * ge.inner(&qy, &nu) - &qy * ge.inner(&qx, &nu)) * k2
            + &nu * (k3 * xy)
            + (&snu * xy + &nu * xpy) * k4
            + &snu * (k5 * xpy)
            + ricci_shape_terms(rec, i, j, a)
    }))
}

/// Gauss equation against a complex space form.
pub fn gauss_residual_csf<T: Real>(rec: &PointRecord<T>) -> ResidualReport<T> {
    residual_report("gauss", lhs_gauss(rec), gauss_rhs_csf(rec))
}

/// Codazzi equation against a complex space form.
pub fn codazzi_residual_csf<T: Real>(rec: &PointRecord<T>) -> ResidualReport<T> {
    residual_report("codazzi", lhs_codazzi(rec), codazzi_rhs_csf(rec))
}

/// Ricci equation against a complex space form.
pub fn ricci_residual_csf<T: Real>(rec: &PointRecord<T>) -> ResidualReport<T> {
    residual_report("ricci", lhs_ricci(rec), ricci_rhs_csf(rec))
}

/// Right-hand side of the Gauss equation without the shape operator terms,
/// i.e. the tangent part of the ambient curvature, on every frame triple.
pub fn ambient_tangent_curvature<T: Real>(rec: &PointRecord<T>) -> Result<Array4<T>> {
    let n = rec.tangent_dim();
    let full = match rec.target {
        Target::Product(_) => gauss_rhs_product(rec)?,
        Target::ComplexSpaceForm(_) => gauss_rhs_csf(rec)?,
    };
    let shape = array4_from_fn(n, n, n, |i, j, k| gauss_shape_terms(rec, i, j, k));
    Ok(full - shape)
}

/// Ranks of `(sigma id - J)/(2sigma - p)` and `((sigma - p) id + J)/(2sigma - p)`
/// with `J = [[P, R], [Q, S]]` on `TM ⊕ E`.
pub fn projector_ranks<T: Real>(ops: &InducedOperators<T>) -> Result<(usize, usize)> {
    let StructureParams::Metallic(mp) = ops.params() else {
        return Err(Error::Precondition(
            "rank conditions need metallic params".into(),
        ));
    };
    let j = ops.block_matrix();
    let [m1, m2] = crate::structures::eigenprojector_matrices(&j, &mp);
    let tol = T::lit(RANK_TOL);
    Ok((rank_with_tol(&m1, tol), rank_with_tol(&m2, tol)))
}

/// Compares [`projector_ranks`] with the factor dimensions placed by [`FACTOR_PAIRING`].
pub fn rank_conditions<T: Real>(rec: &PointRecord<T>) -> Result<ResidualReport<T>> {
    let (pp, _) = rec.metallic()?;
    let (r1, r2) = projector_ranks(&rec.ops)?;
    let (e1, e2) = FACTOR_PAIRING.expected_ranks(pp.n1, pp.n2);
    let diff = |a: usize, b: usize| T::from_usize(a.abs_diff(b)).unwrap();
    let mut rep = ResidualReport::new(T::lit(DEFAULT_TOL));
    rep.push("rank-1", diff(r1, e1));
    rep.push("rank-2", diff(r2, e2));
    Ok(rep)
}

/// Runs every suite in order and aggregates the residuals by name.
pub fn full_verdict<T: Real>(rec: &PointRecord<T>) -> ResidualReport<T> {
    full_verdict_with_tol(rec, T::lit(DEFAULT_TOL))
}

/// [`full_verdict`] with an explicit tolerance.
pub fn full_verdict_with_tol<T: Real>(rec: &PointRecord<T>, tol: T) -> ResidualReport<T> {
    let mut rep = ResidualReport::new(tol);
    let dims = rec.tangent_dim() + rec.normal_dim();
    rep.push(
        "dims",
        T::from_usize(dims.abs_diff(rec.target.ambient_dim())).unwrap(),
    );
    rep.extend(&check_algebraic_relations(&rec.ops));
    if let Target::ComplexSpaceForm(_) = rec.target {
        match check_complex_corollary(&rec.ops) {
            Ok(r) => rep.extend(&r),
            Err(_) => rep.push("corollary", T::nan()),
        }
    }
    match check_derivative_relations(&rec.ops, &rec.der) {
        Ok(r) => rep.extend(&r),
        Err(_) => rep.push("derivative", T::nan()),
    }
    match rec.target {
        Target::Product(_) => {
            match rank_conditions(rec) {
                Ok(r) => rep.extend(&r),
                Err(_) => rep.push("rank", T::nan()),
            }
            match check_derivative_consistency(&rec.ops, &rec.der) {
                Ok(r) => rep.extend(&r),
                Err(_) => rep.push("consistency", T::nan()),
            }
            rep.extend(&gauss_residual_product(rec));
            rep.extend(&codazzi_residual_product(rec));
            rep.extend(&ricci_residual_product(rec));
        }
        Target::ComplexSpaceForm(_) => {
            match check_derivative_consistency(&rec.ops, &rec.der) {
                Ok(r) => rep.extend(&r),
                Err(_) => rep.push("consistency", T::nan()),
            }
            rep.extend(&gauss_residual_csf(rec));
            rep.extend(&codazzi_residual_csf(rec));
            rep.extend(&ricci_residual_csf(rec));
        }
    }
    rep
}

/// [`full_verdict_with_tol`] over many records in parallel, results in input order.
pub fn verify_batch<T: Real>(records: &[PointRecord<T>], tol: T) -> Vec<ResidualReport<T>> {
    records
        .par_iter()
        .map(|r| full_verdict_with_tol(r, tol))
        .collect()
}

/// Blocks of the two eigenprojectors of a metallic structure on `TM ⊕ E`.
#[derive(Debug, Clone, PartialEq)]
pub struct EightOperators<T: Real> {
    pub f1: OperatorBlock<T>,
    pub f2: OperatorBlock<T>,
    pub h1: OperatorBlock<T>,
    pub h2: OperatorBlock<T>,
    pub s1: OperatorBlock<T>,
    pub s2: OperatorBlock<T>,
    pub t1: OperatorBlock<T>,
    pub t2: OperatorBlock<T>,
    pub mp: MetallicParams<T>,
}

impl<T: Real> EightOperators<T> {
    pub fn f(&self, i: usize) -> &OperatorBlock<T> {
        if i == 1 {
            &self.f1
        } else {
            &self.f2
        }
    }
    pub fn h(&self, i: usize) -> &OperatorBlock<T> {
        if i == 1 {
            &self.h1
        } else {
            &self.h2
        }
    }
    pub fn s(&self, i: usize) -> &OperatorBlock<T> {
        if i == 1 {
            &self.s1
        } else {
            &self.s2
        }
    }
    pub fn t(&self, i: usize) -> &OperatorBlock<T> {
        if i == 1 {
            &self.t1
        } else {
            &self.t2
        }
    }

    /// Recovers `P = sigma f2 - (sigma - p) f1`, `Q = (2sigma - p) h2`,
    /// `R = (2sigma - p) s2`, `S = sigma t2 - (sigma - p) t1`.
    pub fn recover(&self) -> Result<InducedOperators<T>> {
        let (s, sp, d) = (
            self.mp.sigma(),
            self.mp.sigma() - self.mp.p(),
            self.mp.gap(),
        );
        InducedOperators::from_matrices(
            self.f2.mat() * s - self.f1.mat() * sp,
            self.h2.mat() * d,
            self.s2.mat() * d,
            self.t2.mat() * s - self.t1.mat() * sp,
            self.f1.domain().clone(),
            self.t1.domain().clone(),
            StructureParams::Metallic(self.mp),
        )
    }
}

/// `f1 = (sigma - P)/d`, `f2 = ((sigma - p) + P)/d`, `h1 = -h2 = -Q/d`,
/// `s1 = -s2 = -R/d`, `t1 = (sigma - S)/d`, `t2 = ((sigma - p) + S)/d` with `d = 2sigma - p`.
pub fn derive_eight_operators<T: Real>(ops: &InducedOperators<T>) -> Result<EightOperators<T>> {
    let StructureParams::Metallic(mp) = ops.params() else {
        return Err(Error::Precondition(
            "eight operators need metallic params".into(),
        ));
    };
    let [f1, f2] = crate::structures::eigenprojector_matrices(ops.p().mat(), &mp);
    let [t1, t2] = crate::structures::eigenprojector_matrices(ops.s().mat(), &mp);
    let d = mp.gap();
    let h2 = ops.q().mat() / d;
    let s2 = ops.r().mat() / d;
    Ok(EightOperators {
        f1: ops.p().with_mat(f1)?,
        f2: ops.p().with_mat(f2)?,
        h1: ops.q().with_mat(-&h2)?,
        h2: ops.q().with_mat(h2)?,
        s1: ops.r().with_mat(-&s2)?,
        s2: ops.r().with_mat(s2)?,
        t1: ops.s().with_mat(t1)?,
        t2: ops.s().with_mat(t2)?,
        mp,
    })
}

fn rel<T: Real>(a: &DMatrix<T>, b: &DMatrix<T>) -> T {
    residual_norm(a, b).unwrap_or(T::nan())
}

/// Sums, the four algebraic families for `i, j in {1, 2}` and the four
/// derivative families for `i in {1, 2}`.
pub fn eight_operator_identities<T: Real>(
    e8: &EightOperators<T>,
    der: &DerivativeData<T>,
) -> Result<ResidualReport<T>> {
    let (n, m) = (e8.f1.mat().nrows(), e8.t1.mat().nrows());
    der.validate(n, m)?;
    let idn = DMatrix::<T>::identity(n, n);
    let idm = DMatrix::<T>::identity(m, m);
    let mut rep = ResidualReport::new(T::lit(DEFAULT_TOL));
    rep.push("f1+f2", rel(&(e8.f1.mat() + e8.f2.mat()), &idn));
    rep.push(
        "h1+h2",
        rel(&(e8.h1.mat() + e8.h2.mat()), &DMatrix::zeros(m, n)),
    );
    rep.push(
        "s1+s2",
        rel(&(e8.s1.mat() + e8.s2.mat()), &DMatrix::zeros(n, m)),
    );
    rep.push("t1+t2", rel(&(e8.t1.mat() + e8.t2.mat()), &idm));
    for i in 1..=2 {
        for j in 1..=2 {
            let kd = |x: &DMatrix<T>| {
                if i == j {
                    x.clone()
                } else {
                    DMatrix::zeros(x.nrows(), x.ncols())
                }
            };
            let (fi, hi, si, ti) = (e8.f(i).mat(), e8.h(i).mat(), e8.s(i).mat(), e8.t(i).mat());
            let (fj, hj, sj, tj) = (e8.f(j).mat(), e8.h(j).mat(), e8.s(j).mat(), e8.t(j).mat());
            rep.push(format!("ff+sh[{i}{j}]"), rel(&(fi * fj + si * hj), &kd(fi)));
            rep.push(format!("tt+hs[{i}{j}]"), rel(&(ti * tj + hi * sj), &kd(ti)));
            rep.push(format!("fs+st[{i}{j}]"), rel(&(fi * sj + si * tj), &kd(si)));
            rep.push(format!("hf+th[{i}{j}]"), rel(&(hi * fj + ti * hj), &kd(hi)));
        }
    }
    let d = e8.mp.gap();
    for i in 1..=2 {
        let eps = if i == 1 { -T::one() / d } else { T::one() / d };
        let (fi, hi, si, ti) = (e8.f(i).mat(), e8.h(i).mat(), e8.s(i).mat(), e8.t(i).mat());
        let a_of = |nu: &DVector<T>| der.shape_op(nu);
        let lhs_f = der.nabla_p.mapv(|x| x * eps);
        let rhs_f = crate::submanifold::array3_from_fn(n, n, n, |a, b| {
            a_of(&hi.column(b).into_owned()) * unit::<T>(n, a) + si * der.b.at(a, b)
        });
        rep.push(format!("nabla-f[{i}]"), residual_norm(&lhs_f, &rhs_f)?);
        let lhs_h = der.nabla_q.mapv(|x| x * eps);
        let rhs_h = crate::submanifold::array3_from_fn(n, n, m, |a, b| {
            ti * der.b.at(a, b) - der.b.eval(&unit(n, a), &fi.column(b).into_owned())
        });
        rep.push(format!("nabla-h[{i}]"), residual_norm(&lhs_h, &rhs_h)?);
        let lhs_t = der.nabla_s.mapv(|x| x * eps);
        let rhs_t = crate::submanifold::array3_from_fn(n, m, m, |a, c| {
            let x = unit::<T>(n, a);
            -der.b.eval(&si.column(c).into_owned(), &x) - hi * (&der.shape[c] * &x)
        });
        rep.push(format!("nabla-t[{i}]"), residual_norm(&lhs_t, &rhs_t)?);
        let lhs_s = der.nabla_r.mapv(|x| x * eps);
        let rhs_s = crate::submanifold::array3_from_fn(n, m, n, |a, c| {
            let x = unit::<T>(n, a);
            -(fi * (&der.shape[c] * &x)) + a_of(&ti.column(c).into_owned()) * &x
        });
        rep.push(format!("nabla-s[{i}]"), residual_norm(&lhs_s, &rhs_s)?);
    }
    Ok(rep)
}

/// Compares the Gauss, Codazzi and Ricci right-hand sides written with
/// `f_i, h_i` against the expansions in `P, Q`.
pub fn eight_operator_forms<T: Real>(rec: &PointRecord<T>) -> Result<ResidualReport<T>> {
    let (pp, _) = rec.metallic()?;
    let e8 = derive_eight_operators(&rec.ops)?;
    let (n, m) = (rec.tangent_dim(), rec.normal_dim());
    let (k1, k2) = FACTOR_PAIRING.coefficients(pp.c1, pp.c2);
    let (g, ge) = (rec.g(), rec.ge());
    let coef = [(k1, 1usize), (k2, 2usize)];
    let gauss = array4_from_fn(n, n, n, |i, j, k| {
        let (x, y, z) = (unit::<T>(n, i), unit::<T>(n, j), unit::<T>(n, k));
        let mut out = gauss_shape_terms(rec, i, j, k);
        for (c, idx) in coef {
            let f = e8.f(idx).mat();
            out += (f * &x * g.inner(&(f * &y), &z) - f * &y * g.inner(&(f * &x), &z)) * c;
        }
        out
    });
    let codazzi = codazzi_array(n, m, |i, j, k| {
        let (x, y, z) = (unit::<T>(n, i), unit::<T>(n, j), unit::<T>(n, k));
        let mut out = DVector::zeros(m);
        for (c, idx) in coef {
            let (f, h) = (e8.f(idx).mat(), e8.h(idx).mat());
            out += (h * &x * g.inner(&(f * &y), &z) - h * &y * g.inner(&(f * &x), &z)) * c;
        }
        out
    });
    let ricci = ricci_array(n, m, |i, j, a| {
        let (x, y, nu) = (unit::<T>(n, i), unit::<T>(n, j), unit::<T>(m, a));
        let mut out = ricci_shape_terms(rec, i, j, a);
        for (c, idx) in coef {
            let h = e8.h(idx).mat();
            out += (h * &x * ge.inner(&(h * &y), &nu) - h * &y * ge.inner(&(h * &x), &nu)) * c;
        }
        out
    });
    let mut rep = ResidualReport::new(T::lit(DEFAULT_TOL));
    rep.push(
        "gauss-form",
        residual_norm(&gauss, &gauss_rhs_product(rec)?)?,
    );
    rep.push(
        "codazzi-form",
        residual_norm(&codazzi, &codazzi_rhs_product(rec)?)?,
    );
    rep.push(
        "ricci-form",
        residual_norm(&ricci, &ricci_rhs_product(rec)?)?,
    );
    Ok(rep)
}

/// Blocks of the complex structure `(2/delta) J + (a/delta) id` on `TM ⊕ E`.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexQuad<T: Real> {
    pub j: OperatorBlock<T>,
    pub h: OperatorBlock<T>,
    pub s: OperatorBlock<T>,
    pub t: OperatorBlock<T>,
}

/// `j = (2/delta) P + (a/delta) id`, `h = (2/delta) Q`, `s = (2/delta) R`, `t = (2/delta) S + (a/delta) id`.
pub fn derive_complex_quad<T: Real>(ops: &InducedOperators<T>) -> Result<ComplexQuad<T>> {
    let StructureParams::ComplexMetallic(cp) = ops.params() else {
        return Err(Error::Precondition(
            "complex quad needs complex metallic params".into(),
        ));
    };
    let (n, m) = (ops.tangent_dim(), ops.normal_dim());
    let k = T::lit(2.0) / cp.delta();
    let shift = cp.a() / cp.delta();
    Ok(ComplexQuad {
        j: ops
            .p()
            .with_mat(ops.p().mat() * k + DMatrix::<T>::identity(n, n) * shift)?,
        h: ops.q().with_mat(ops.q().mat() * k)?,
        s: ops.r().with_mat(ops.r().mat() * k)?,
        t: ops
            .s()
            .with_mat(ops.s().mat() * k + DMatrix::<T>::identity(m, m) * shift)?,
    })
}

/// The blocks of `Jc^2 = -id`.
pub fn complex_quad_identities<T: Real>(quad: &ComplexQuad<T>) -> ResidualReport<T> {
    let (j, h, s, t) = (quad.j.mat(), quad.h.mat(), quad.s.mat(), quad.t.mat());
    let (n, m) = (j.nrows(), t.nrows());
    let mut rep = ResidualReport::new(T::lit(DEFAULT_TOL));
    rep.push(
        "jj+sh",
        rel(&(j * j + s * h), &(-DMatrix::<T>::identity(n, n))),
    );
    rep.push("hj+th", rel(&(h * j + t * h), &DMatrix::zeros(m, n)));
    rep.push("js+st", rel(&(j * s + s * t), &DMatrix::zeros(n, m)));
    rep.push(
        "tt+hs",
        rel(&(t * t + h * s), &(-DMatrix::<T>::identity(m, m))),
    );
    rep
}

//! Induced operators of a submanifold and the relation suites they satisfy.
//!
//! Conventions: `nabla-bar_X Y = nabla_X Y + B(X, Y)` and
//! `nabla-bar_X nu = nabla-perp_X nu - A_nu X`, with
//! `<A_nu X, Y> = <B(X, Y), nu>`. Derivative arrays put the differentiation
//! direction first: `nabla_p[[i, j, k]]` is the `k`-th component of
//! `(nabla_{e_i} P) e_j`.

use nalgebra::{DMatrix, DVector};
use ndarray::{Array3, Array4};

use crate::report::ResidualReport;
use crate::structures::{
    equation_residual, ComplexMetallicParams, MetallicParams, StructureKind, StructureOperator,
};
use crate::tensor::{
    frobenius, residual_norm, BilinearForm, CurvatureConvention, CurvatureTensor, Metric,
    OperatorBlock,
};
use crate::{Error, Real, Result, DEFAULT_TOL};

/// Parameters of the ambient structure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StructureParams<T: Real> {
    Metallic(MetallicParams<T>),
    ComplexMetallic(ComplexMetallicParams<T>),
}

impl<T: Real> StructureParams<T> {
    pub fn kind(&self) -> StructureKind<T> {
        match *self {
            StructureParams::Metallic(mp) => StructureKind::Metallic(mp),
            StructureParams::ComplexMetallic(cp) => StructureKind::ComplexMetallic(cp),
        }
    }
}

/// The blocks `P, Q, R, S` of an ambient structure along `TM ⊕ E`.
#[derive(Debug, Clone, PartialEq)]
pub struct InducedOperators<T: Real> {
    p: OperatorBlock<T>,
    q: OperatorBlock<T>,
    r: OperatorBlock<T>,
    s: OperatorBlock<T>,
    params: StructureParams<T>,
}

impl<T: Real> InducedOperators<T> {
    /// Checks that the four blocks share the metrics `g` on `TM` and `gE` on `E`.
    pub fn new(
        p: OperatorBlock<T>,
        q: OperatorBlock<T>,
        r: OperatorBlock<T>,
        s: OperatorBlock<T>,
        params: StructureParams<T>,
    ) -> Result<Self> {
        let g = p.domain();
        let ge = s.domain();
        let ok = p.codomain().same_as(g)
            && q.domain().same_as(g)
            && q.codomain().same_as(ge)
            && r.domain().same_as(ge)
            && r.codomain().same_as(g)
            && s.codomain().same_as(ge);
        if !ok {
            return Err(Error::MetricMismatch("induced operators".into()));
        }
        Ok(Self { p, q, r, s, params })
    }

    /// Builds the blocks from raw matrices.
    pub fn from_matrices(
        p: DMatrix<T>,
        q: DMatrix<T>,
        r: DMatrix<T>,
        s: DMatrix<T>,
        g: Metric<T>,
        ge: Metric<T>,
        params: StructureParams<T>,
    ) -> Result<Self> {
        Self::new(
            OperatorBlock::new(p, g.clone(), g.clone())?,
            OperatorBlock::new(q, g.clone(), ge.clone())?,
            OperatorBlock::new(r, ge.clone(), g.clone())?,
            OperatorBlock::new(s, ge.clone(), ge)?,
            params,
        )
    }

    pub fn p(&self) -> &OperatorBlock<T> {
        &self.p
    }
    pub fn q(&self) -> &OperatorBlock<T> {
        &self.q
    }
    pub fn r(&self) -> &OperatorBlock<T> {
        &self.r
    }
    pub fn s(&self) -> &OperatorBlock<T> {
        &self.s
    }
    pub fn g(&self) -> &Metric<T> {
        self.p.domain()
    }
    pub fn ge(&self) -> &Metric<T> {
        self.s.domain()
    }
    pub fn params(&self) -> StructureParams<T> {
        self.params
    }
    pub fn tangent_dim(&self) -> usize {
        self.g().dim()
    }
    pub fn normal_dim(&self) -> usize {
        self.ge().dim()
    }

    /// The endomorphism `[[P, R], [Q, S]]` of `TM ⊕ E`.
    pub fn block_matrix(&self) -> DMatrix<T> {
        let (n, m) = (self.tangent_dim(), self.normal_dim());
        let mut out = DMatrix::zeros(n + m, n + m);
        out.view_mut((0, 0), (n, n)).copy_from(self.p.mat());
        out.view_mut((0, n), (n, m)).copy_from(self.r.mat());
        out.view_mut((n, 0), (m, n)).copy_from(self.q.mat());
        out.view_mut((n, n), (m, m)).copy_from(self.s.mat());
        out
    }

    /// Same metrics and params, new block matrices.
    pub fn with_blocks(
        &self,
        p: DMatrix<T>,
        q: DMatrix<T>,
        r: DMatrix<T>,
        s: DMatrix<T>,
    ) -> Result<Self> {
        Self::from_matrices(p, q, r, s, self.g().clone(), self.ge().clone(), self.params)
    }
}

/// Splits an ambient structure along the tangent and normal frames (given as
/// matrix columns in ambient coordinates).
pub fn split_structure<T: Real>(
    j: &StructureOperator<T>,
    tangent: &DMatrix<T>,
    normal: &DMatrix<T>,
    g_ambient: &Metric<T>,
) -> Result<InducedOperators<T>> {
    let params = match j.kind() {
        StructureKind::Metallic(mp) => StructureParams::Metallic(mp),
        StructureKind::ComplexMetallic(cp) => StructureParams::ComplexMetallic(cp),
        other => {
            return Err(Error::Precondition(format!(
                "cannot split a {} structure",
                other.name()
            )))
        }
    };
    let big = g_ambient.dim();
    let (n, m) = (tangent.ncols(), normal.ncols());
    if j.mat().nrows() != big || tangent.nrows() != big || normal.nrows() != big || n + m != big {
        return Err(Error::dims(
            "split frames",
            format!("{big} ambient vectors"),
            format!("{n}+{m} of length {}", tangent.nrows()),
        ));
    }
    let gram = g_ambient.gram();
    let cross = tangent.transpose() * gram * normal;
    let scale = frobenius(tangent).max(T::one()) * frobenius(normal).max(T::one());
    if frobenius(&cross) / scale > T::lit(1e-10) {
        return Err(Error::Precondition(
            "tangent and normal frames are not orthogonal".into(),
        ));
    }
    let mut frame = DMatrix::zeros(big, big);
    frame.view_mut((0, 0), (big, n)).copy_from(tangent);
    frame.view_mut((0, n), (big, m)).copy_from(normal);
    if crate::tensor::rank_with_tol(&frame, T::lit(1e-12)) < big {
        return Err(Error::Precondition("frames are rank deficient".into()));
    }
    let adapted = frame
        .clone()
        .lu()
        .solve(&(j.mat() * &frame))
        .ok_or_else(|| Error::Precondition("frames are rank deficient".into()))?;
    let g = Metric::new(tangent.transpose() * gram * tangent)?;
    let ge = Metric::new(normal.transpose() * gram * normal)?;
    InducedOperators::from_matrices(
        adapted.view((0, 0), (n, n)).into_owned(),
        adapted.view((n, 0), (m, n)).into_owned(),
        adapted.view((0, n), (n, m)).into_owned(),
        adapted.view((n, n), (m, m)).into_owned(),
        g,
        ge,
        params,
    )
}

fn rel<T: Real>(a: &DMatrix<T>, b: &DMatrix<T>) -> T {
    residual_norm(a, b).unwrap_or(T::max_value().unwrap_or(T::one()))
}

fn scalar_rel<T: Real>(a: T, b: T) -> T {
    (a - b).abs() / a.abs().max(T::one())
}

/// The four composition identities and three metric identities of the blocks.
pub fn check_algebraic_relations<T: Real>(ops: &InducedOperators<T>) -> ResidualReport<T> {
    let (p, q, r, s) = (ops.p.mat(), ops.q.mat(), ops.r.mat(), ops.s.mat());
    let (n, m) = (ops.tangent_dim(), ops.normal_dim());
    let idn = DMatrix::<T>::identity(n, n);
    let idm = DMatrix::<T>::identity(m, m);
    let p_adj = ops.p.adjoint();
    let q_adj = ops.q.adjoint();
    let s_adj = ops.s.adjoint();
    let mut rep = ResidualReport::new(T::lit(DEFAULT_TOL));
    match ops.params {
        StructureParams::Metallic(mp) => {
            let (pp, qq) = (mp.p(), mp.q());
            rep.push("P2+RQ", rel(&(p * p + r * q), &(p * pp + &idn * qq)));
            rep.push("QP+SQ", rel(&(q * p + s * q), &(q * pp)));
            rep.push("PR+RS", rel(&(p * r + r * s), &(r * pp)));
            rep.push("S2+QR", rel(&(s * s + q * r), &(s * pp + &idm * qq)));
            rep.push("P-adjoint", rel(p, p_adj.mat()));
            rep.push("QR-duality", rel(r, q_adj.mat()));
            rep.push("S-adjoint", rel(s, s_adj.mat()));
        }
        StructureParams::ComplexMetallic(cp) => {
            let (a, b) = (cp.a(), cp.b());
            rep.push("P2+RQ", rel(&(p * p + r * q), &(-(p * a) - &idn * b)));
            rep.push("QP+SQ", rel(&(q * p + s * q), &(-(q * a))));
            rep.push("PR+RS", rel(&(p * r + r * s), &(-(r * a))));
            rep.push("S2+QR", rel(&(s * s + q * r), &(-(s * a) - &idm * b)));
            rep.push("P-adjoint", rel(p_adj.mat(), &(-p - &idn * a)));
            rep.push("QR-duality", rel(r, &(-q_adj.mat())));
            rep.push("S-adjoint", rel(s_adj.mat(), &(-s - &idm * a)));
        }
    }
    rep
}

/// The three metric identities satisfied by the blocks of a Riemannian
/// complex metallic structure: `J^* J = b id` written blockwise.
pub fn check_complex_corollary<T: Real>(ops: &InducedOperators<T>) -> Result<ResidualReport<T>> {
    let StructureParams::ComplexMetallic(cp) = ops.params else {
        return Err(Error::Precondition(
            "corollary identities need complex metallic params".into(),
        ));
    };
    let (p, q, r, s) = (ops.p.mat(), ops.q.mat(), ops.r.mat(), ops.s.mat());
    let (g, ge) = (ops.g().gram(), ops.ge().gram());
    let mut rep = ResidualReport::new(T::lit(DEFAULT_TOL));
    rep.push(
        "cor-tangent",
        rel(
            &(p.transpose() * g * p + q.transpose() * ge * q),
            &(g * cp.b()),
        ),
    );
    rep.push(
        "cor-normal",
        rel(
            &(s.transpose() * ge * s + r.transpose() * g * r),
            &(ge * cp.b()),
        ),
    );
    let mixed = p.transpose() * g * r + q.transpose() * ge * s;
    rep.push(
        "cor-mixed",
        rel(&mixed, &DMatrix::zeros(mixed.nrows(), mixed.ncols())),
    );
    Ok(rep)
}

/// Residuals `||Q||`, `||R||` and the structure equations of `P` on `TM` and `S` on `E`.
pub fn check_invariant<T: Real>(ops: &InducedOperators<T>) -> ResidualReport<T> {
    let mut rep = ResidualReport::new(T::lit(DEFAULT_TOL));
    let zq = DMatrix::zeros(ops.q.mat().nrows(), ops.q.mat().ncols());
    let zr = DMatrix::zeros(ops.r.mat().nrows(), ops.r.mat().ncols());
    rep.push("Q", rel(ops.q.mat(), &zq));
    rep.push("R", rel(ops.r.mat(), &zr));
    let kind = ops.params.kind();
    rep.push("P-structure", equation_residual(ops.p.mat(), &kind));
    rep.push("S-structure", equation_residual(ops.s.mat(), &kind));
    rep
}

/// Frame-level derivative data of an immersion at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct DerivativeData<T: Real> {
    /// `(nabla_{e_i} P) e_j`, shape `n x n x n`.
    pub nabla_p: Array3<T>,
    /// `(nabla_{e_i} Q) e_j`, shape `n x n x m`.
    pub nabla_q: Array3<T>,
    /// `(nabla_{e_i} R) n_a`, shape `n x m x n`.
    pub nabla_r: Array3<T>,
    /// `(nabla_{e_i} S) n_a`, shape `n x m x m`.
    pub nabla_s: Array3<T>,
    /// Second fundamental form.
    pub b: BilinearForm<T>,
    /// `(nabla_{e_i} B)(e_j, e_k)`, shape `n x n x n x m`.
    pub nabla_b: Array4<T>,
    /// Shape operators `A_{n_a}` as `n x n` matrices, one per normal frame vector.
    pub shape: Vec<DMatrix<T>>,
    /// Normal curvature `R-perp(e_i, e_j) n_a`.
    pub rperp: CurvatureTensor<T>,
}

impl<T: Real> DerivativeData<T> {
    /// Validates every array shape against `(n, m)`.
    pub fn validate(&self, n: usize, m: usize) -> Result<()> {
        let check = |name: &str, got: &[usize], want: &[usize]| {
            if got != want {
                Err(Error::dims(name, format!("{want:?}"), format!("{got:?}")))
            } else {
                Ok(())
            }
        };
        check("nablaP", self.nabla_p.shape(), &[n, n, n])?;
        check("nablaQ", self.nabla_q.shape(), &[n, n, m])?;
        check("nablaR", self.nabla_r.shape(), &[n, m, n])?;
        check("nablaS", self.nabla_s.shape(), &[n, m, m])?;
        check("B", self.b.coeffs().shape(), &[n, n, m])?;
        check("nablaB", self.nabla_b.shape(), &[n, n, n, m])?;
        check("Rperp", self.rperp.coeffs().shape(), &[n, n, m, m])?;
        if self.shape.len() != m {
            return Err(Error::dims("A", m, self.shape.len()));
        }
        for a in &self.shape {
            check("A", &[a.nrows(), a.ncols()], &[n, n])?;
        }
        Ok(())
    }

    /// All-zero data: a totally geodesic point with parallel blocks and flat normal bundle.
    pub fn zeros(n: usize, m: usize) -> Self {
        Self {
            nabla_p: Array3::zeros((n, n, n)),
            nabla_q: Array3::zeros((n, n, m)),
            nabla_r: Array3::zeros((n, m, n)),
            nabla_s: Array3::zeros((n, m, m)),
            b: BilinearForm::zeros(n, m),
            nabla_b: Array4::zeros((n, n, n, m)),
            shape: vec![DMatrix::zeros(n, n); m],
            rperp: CurvatureTensor::zeros(n, m, CurvatureConvention::Standard),
        }
    }

    pub fn tangent_dim(&self) -> usize {
        self.nabla_p.shape()[0]
    }

    pub fn normal_dim(&self) -> usize {
        self.shape.len()
    }

    /// `A_nu` for `nu` given in normal frame coordinates.
    pub fn shape_op(&self, nu: &DVector<T>) -> DMatrix<T> {
        let n = self.tangent_dim();
        self.shape
            .iter()
            .zip(nu.iter())
            .fold(DMatrix::zeros(n, n), |acc, (a, &c)| acc + a * c)
    }

    /// `(nabla_{e_i} B)(e_j, e_k)`.
    pub fn nabla_b_at(&self, i: usize, j: usize, k: usize) -> DVector<T> {
        let m = self.normal_dim();
        DVector::from_iterator(m, (0..m).map(|a| self.nabla_b[[i, j, k, a]]))
    }
}

/// Last-axis fibre of a three-index array.
pub fn fiber3<T: Real>(arr: &Array3<T>, i: usize, j: usize) -> DVector<T> {
    let k = arr.shape()[2];
    DVector::from_iterator(k, (0..k).map(|l| arr[[i, j, l]]))
}

/// Builds a three-index array from its last-axis fibres.
pub fn array3_from_fn<T: Real>(
    d0: usize,
    d1: usize,
    d2: usize,
    f: impl Fn(usize, usize) -> DVector<T>,
) -> Array3<T> {
    let mut out = Array3::zeros((d0, d1, d2));
    for i in 0..d0 {
        for j in 0..d1 {
            let v = f(i, j);
            for k in 0..d2 {
                out[[i, j, k]] = v[k];
            }
        }
    }
    out
}

fn arr_rel<T: Real>(a: &Array3<T>, b: &Array3<T>) -> T {
    residual_norm(a, b).unwrap_or(T::max_value().unwrap_or(T::one()))
}

fn unit<T: Real>(n: usize, i: usize) -> DVector<T> {
    let mut v = DVector::zeros(n);
    v[i] = T::one();
    v
}

/// The four derivative identities, evaluated on every frame pair.
pub fn check_derivative_relations<T: Real>(
    ops: &InducedOperators<T>,
    der: &DerivativeData<T>,
) -> Result<ResidualReport<T>> {
    let (n, m) = (ops.tangent_dim(), ops.normal_dim());
    der.validate(n, m)?;
    let (p, q, r, s) = (ops.p.mat(), ops.q.mat(), ops.r.mat(), ops.s.mat());
    let mut rep = ResidualReport::new(T::lit(DEFAULT_TOL));

    let rhs1 = array3_from_fn(n, n, n, |i, j| {
        let ei = unit::<T>(n, i);
        der.shape_op(&q.column(j).into_owned()) * &ei + r * der.b.at(i, j)
    });
    rep.push("nablaP", arr_rel(&der.nabla_p, &rhs1));

    let rhs2 = array3_from_fn(n, n, m, |i, j| {
        s * der.b.at(i, j) - der.b.eval(&unit(n, i), &p.column(j).into_owned())
    });
    rep.push("nablaQ", arr_rel(&der.nabla_q, &rhs2));

    let rhs3 = array3_from_fn(n, m, m, |i, a| {
        let ei = unit::<T>(n, i);
        -der.b.eval(&r.column(a).into_owned(), &ei) - q * (&der.shape[a] * &ei)
    });
    rep.push("nablaS", arr_rel(&der.nabla_s, &rhs3));

    let rhs4 = array3_from_fn(n, m, n, |i, a| {
        let ei = unit::<T>(n, i);
        -(p * (&der.shape[a] * &ei)) + der.shape_op(&s.column(a).into_owned()) * &ei
    });
    rep.push("nablaR", arr_rel(&der.nabla_r, &rhs4));
    Ok(rep)
}

/// Internal consistency of derivative data: symmetry of `B` and `nabla B`,
/// self-adjointness of each `A_nu`, the duality `<A_nu X, Y> = <B(X, Y), nu>`,
/// and antisymmetry of the normal curvature.
pub fn check_derivative_consistency<T: Real>(
    ops: &InducedOperators<T>,
    der: &DerivativeData<T>,
) -> Result<ResidualReport<T>> {
    let (n, m) = (ops.tangent_dim(), ops.normal_dim());
    der.validate(n, m)?;
    let (g, ge) = (ops.g(), ops.ge());
    let mut rep = ResidualReport::new(T::lit(DEFAULT_TOL));
    rep.push("B-symmetric", der.b.symmetry_residual());
    let mut worst_adj = T::zero();
    let mut worst_dual = T::zero();
    for a in 0..m {
        let sa = &der.shape[a];
        let adj = g.inverse() * sa.transpose() * g.gram();
        worst_adj = worst_adj.max(rel(sa, &adj));
        let lhs = sa.transpose() * g.gram();
        let rhs = DMatrix::from_fn(n, n, |i, j| {
            (0..m).fold(T::zero(), |acc, c| {
                acc + der.b.coeffs()[[i, j, c]] * ge.gram()[(c, a)]
            })
        });
        worst_dual = worst_dual.max(rel(&lhs, &rhs));
    }
    rep.push("A-adjoint", worst_adj);
    rep.push("A-B-duality", worst_dual);
    let swapped = der
        .nabla_b
        .clone()
        .permuted_axes([0, 2, 1, 3])
        .as_standard_layout()
        .to_owned();
    rep.push("nablaB-symmetric", residual_norm(&der.nabla_b, &swapped)?);
    rep.push("Rperp-antisymmetric", der.rperp.antisymmetry_residual());
    Ok(rep)
}

/// Data of a hypersurface with unit normal `nu`: `J X = P X + <X, V> nu`
/// (metallic) or `J X = P X - <X, V> nu` (complex metallic), `J nu = V + f nu`.
#[derive(Debug, Clone, PartialEq)]
pub struct HypersurfaceData<T: Real> {
    pub p: OperatorBlock<T>,
    pub v: DVector<T>,
    pub f: T,
    pub a: OperatorBlock<T>,
    /// `(nabla_{e_i} P) e_j`.
    pub nabla_p: Array3<T>,
    /// Column `i` is `nabla_{e_i} V`.
    pub nabla_v: OperatorBlock<T>,
    /// `df(e_i)`.
    pub df: DVector<T>,
}

impl<T: Real> HypersurfaceData<T> {
    pub fn g(&self) -> &Metric<T> {
        self.p.domain()
    }

    pub fn dim(&self) -> usize {
        self.g().dim()
    }

    /// Reads the hypersurface view off rank-one normal bundle data.
    pub fn from_point_data(ops: &InducedOperators<T>, der: &DerivativeData<T>) -> Result<Self> {
        if ops.normal_dim() != 1 {
            return Err(Error::Precondition(
                "hypersurface view needs a rank one normal bundle".into(),
            ));
        }
        let n = ops.tangent_dim();
        der.validate(n, 1)?;
        let scale = ops.ge().gram()[(0, 0)].sqrt();
        let v = ops.r.mat().column(0) / scale;
        let f = ops.s.mat()[(0, 0)];
        let a = &der.shape[0] / scale;
        let nabla_v = DMatrix::from_fn(n, n, |k, i| der.nabla_r[[i, 0, k]] / scale);
        let df = DVector::from_fn(n, |i, _| der.nabla_s[[i, 0, 0]]);
        let g = ops.g().clone();
        Ok(Self {
            p: ops.p.clone(),
            v,
            f,
            a: OperatorBlock::new(a, g.clone(), g.clone())?,
            nabla_p: der.nabla_p.clone(),
            nabla_v: OperatorBlock::new(nabla_v, g.clone(), g)?,
            df,
        })
    }
}

/// The hypersurface specialisations of the algebraic and derivative identities.
pub fn check_hypersurface_relations<T: Real>(
    h: &HypersurfaceData<T>,
    params: StructureParams<T>,
) -> Result<ResidualReport<T>> {
    let n = h.dim();
    if h.v.len() != n || h.df.len() != n || h.nabla_p.shape() != [n, n, n] || h.a.mat().nrows() != n
    {
        return Err(Error::dims("hypersurface data", n, "inconsistent sizes"));
    }
    let g = h.g();
    let (p, a, v) = (h.p.mat(), h.a.mat(), &h.v);
    let idn = DMatrix::<T>::identity(n, n);
    let vv = v * (v.transpose() * g.gram());
    let norm_v = g.norm_squared(v);
    let av_dual = |i: usize| g.inner(&a.column(i).into_owned(), v);
    let mut rep = ResidualReport::new(T::lit(DEFAULT_TOL));
    let col = |x: &DVector<T>| DMatrix::from_column_slice(x.len(), 1, x.as_slice());
    match params {
        StructureParams::Metallic(mp) => {
            let (pp, qq, f) = (mp.p(), mp.q(), h.f);
            rep.push("P2+VV", rel(&(p * p + &vv), &(p * pp + &idn * qq)));
            rep.push("PV+fV", rel(&col(&(p * v + v * f)), &col(&(v * pp))));
            rep.push("f2+V2", scalar_rel(f * f + norm_v, pp * f + qq));
            rep.push("P-adjoint", rel(p, h.p.adjoint().mat()));
            let rhs = array3_from_fn(n, n, n, |i, j| {
                a.column(i) * g.inner(v, &unit(n, j))
                    + v * g.inner(&a.column(i).into_owned(), &unit(n, j))
            });
            rep.push("nablaP", arr_rel(&h.nabla_p, &rhs));
            rep.push("nablaV", rel(h.nabla_v.mat(), &(-(p * a) + a * f)));
            let df_rhs = DVector::from_fn(n, |i, _| -T::lit(2.0) * av_dual(i));
            rep.push("df", rel(&col(&h.df), &col(&df_rhs)));
        }
        StructureParams::ComplexMetallic(cp) => {
            let (aa, bb) = (cp.a(), cp.b());
            let half_a = aa / T::lit(2.0);
            rep.push("P2-VV", rel(&(p * p - &vv), &(-(p * aa) - &idn * bb)));
            rep.push("PV", rel(&col(&(p * v)), &col(&(v * -half_a))));
            rep.push(
                "V2",
                scalar_rel(norm_v, cp.delta() * cp.delta() / T::lit(4.0)),
            );
            rep.push("f", scalar_rel(h.f, -half_a));
            rep.push("P-adjoint", rel(h.p.adjoint().mat(), &(-p - &idn * aa)));
            let rhs = array3_from_fn(n, n, n, |i, j| {
                -(a.column(i) * g.inner(v, &unit(n, j)))
                    + v * g.inner(&a.column(i).into_owned(), &unit(n, j))
            });
            rep.push("nablaP", arr_rel(&h.nabla_p, &rhs));
            rep.push("nablaV", rel(h.nabla_v.mat(), &(-(p * a) - a * half_a)));
            rep.push("df", rel(&col(&h.df), &DMatrix::zeros(n, 1)));
        }
    }
    rep.push("A-adjoint", rel(a, h.a.adjoint().mat()));
    Ok(rep)
}

#[allow(clippy::too_many_arguments)]
fn shape_from_hypersurface_field<T: Real>(
    p: &OperatorBlock<T>,
    v: &DVector<T>,
    nabla_v: &OperatorBlock<T>,
    q: T,
    g: &Metric<T>,
    numerator: DMatrix<T>,
    constraint_name: &str,
    constraint: T,
) -> Result<(OperatorBlock<T>, ResidualReport<T>)> {
    let n = g.dim();
    if v.len() != n || p.mat().nrows() != n || nabla_v.mat().nrows() != n {
        return Err(Error::dims("shape operator inputs", n, v.len()));
    }
    let tol = T::lit(DEFAULT_TOL);
    let norm_v = g.norm_squared(v);
    if !(norm_v.sqrt() > tol) {
        return Err(Error::Precondition("V vanishes".into()));
    }
    if !(constraint <= tol) {
        return Err(Error::Precondition(format!(
            "{constraint_name} constraint violated (residual {:e})",
            constraint.to_f64_lossy()
        )));
    }
    let norm_res = scalar_rel(norm_v, q);
    if !(norm_res <= tol) {
        return Err(Error::Precondition(format!(
            "norm constraint violated: |V|^2 = {norm_v}, expected {q}"
        )));
    }
    let a = numerator / (-norm_v);
    let a_op = OperatorBlock::new(a.clone(), g.clone(), g.clone())?;
    let mut rep = ResidualReport::new(tol);
    rep.push(constraint_name, constraint);
    rep.push("norm", norm_res);
    let av = &a * v;
    rep.push("A(V)", frobenius(&av) / frobenius(v).max(T::one()));
    rep.push("det", a.clone().determinant().abs());
    rep.push("A-adjoint", rel(&a, a_op.adjoint().mat()));
    Ok((a_op, rep))
}

/// Shape operator when `J V` is normal: `A X = -P(nabla_X V) / |V|^2`.
pub fn shape_from_jv_normal<T: Real>(
    p: &OperatorBlock<T>,
    v: &DVector<T>,
    nabla_v: &OperatorBlock<T>,
    mp: MetallicParams<T>,
    g: &Metric<T>,
) -> Result<(OperatorBlock<T>, ResidualReport<T>)> {
    let pv = p.mat() * v;
    let constraint = frobenius(&pv) / frobenius(v).max(T::one());
    let numerator = p.mat() * nabla_v.mat();
    shape_from_hypersurface_field(p, v, nabla_v, mp.q(), g, numerator, "PV", constraint)
}

/// Shape operator when `J nu` is tangent: `A X = -(P(nabla_X V) - p nabla_X V) / |V|^2`.
pub fn shape_from_jnu_tangent<T: Real>(
    p: &OperatorBlock<T>,
    v: &DVector<T>,
    nabla_v: &OperatorBlock<T>,
    mp: MetallicParams<T>,
    g: &Metric<T>,
) -> Result<(OperatorBlock<T>, ResidualReport<T>)> {
    let n = g.dim();
    let pv = p.mat() * v - v * mp.p();
    let constraint = frobenius(&pv) / frobenius(v).max(T::one());
    let numerator = (p.mat() - DMatrix::<T>::identity(n, n) * mp.p()) * nabla_v.mat();
    shape_from_hypersurface_field(p, v, nabla_v, mp.q(), g, numerator, "PV-pV", constraint)
}

/// `div P = sum_{ij} g^{ij} (nabla_{e_i} P) e_j`.
pub fn divergence<T: Real>(nabla_p: &Array3<T>, g: &Metric<T>) -> DVector<T> {
    let n = g.dim();
    let mut out = DVector::zeros(n);
    for i in 0..n {
        for j in 0..n {
            out += fiber3(nabla_p, i, j) * g.inverse()[(i, j)];
        }
    }
    out
}

/// `<div P, V>`, which vanishes exactly at minimal points under the
/// hypotheses `J V` normal and `|V|^2 = q`.
pub fn minimality_criterion<T: Real>(
    p: &OperatorBlock<T>,
    div_p: &DVector<T>,
    v: &DVector<T>,
    g: &Metric<T>,
) -> Result<T> {
    let n = g.dim();
    if p.mat().nrows() != n || div_p.len() != n || v.len() != n {
        return Err(Error::dims("minimality criterion", n, div_p.len()));
    }
    Ok(g.inner(div_p, v))
}

/// `(1/n) trace_g B`.
pub fn mean_curvature<T: Real>(b: &BilinearForm<T>, g: &Metric<T>) -> DVector<T> {
    let n = g.dim();
    let m = b.fiber_dim();
    if n == 0 {
        return DVector::zeros(m);
    }
    let mut out = DVector::zeros(m);
    for i in 0..n {
        for j in 0..n {
            out += b.at(i, j) * g.inverse()[(i, j)];
        }
    }
    out / T::from_usize(n).unwrap()
}

/// Orthonormal frame `{e_1, j e_1, e_3, j e_3, ...}` built by Gram-Schmidt.
pub fn adapted_frame<T: Real>(j: &DMatrix<T>, g: &Metric<T>) -> Result<DMatrix<T>> {
    let n = g.dim();
    let mut frame: Vec<DVector<T>> = Vec::with_capacity(n);
    let orthonormalize = |frame: &[DVector<T>], mut v: DVector<T>| -> Option<DVector<T>> {
        for u in frame {
            v -= u * g.inner(u, &v);
        }
        let norm = g.norm_squared(&v).sqrt();
        (norm > T::lit(1e-8)).then(|| v / norm)
    };
    for k in 0..n {
        if frame.len() >= n {
            break;
        }
        if let Some(u) = orthonormalize(&frame, unit(n, k)) {
            let ju = j * &u;
            frame.push(u);
            let w = orthonormalize(&frame, ju)
                .ok_or_else(|| Error::Precondition("j has a real eigenvector".into()))?;
            frame.push(w);
        }
    }
    if frame.len() != n {
        return Err(Error::Precondition(
            "could not complete the adapted frame".into(),
        ));
    }
    Ok(DMatrix::from_columns(&frame))
}

/// Checks that an invariant submanifold of a complex metallic manifold is minimal.
pub fn invariant_minimality_check<T: Real>(
    ops: &InducedOperators<T>,
    b: &BilinearForm<T>,
) -> Result<ResidualReport<T>> {
    let StructureParams::ComplexMetallic(cp) = ops.params else {
        return Err(Error::Precondition(
            "invariant minimality needs complex metallic params".into(),
        ));
    };
    let (n, m) = (ops.tangent_dim(), ops.normal_dim());
    if n % 2 == 1 {
        return Err(Error::Precondition(format!(
            "invariant submanifolds are even-dimensional, got dimension {n}"
        )));
    }
    if b.dim() != n || b.fiber_dim() != m {
        return Err(Error::dims(
            "second fundamental form",
            format!("{n}x{n}x{m}"),
            format!("{:?}", b.coeffs().shape()),
        ));
    }
    let tol = T::lit(DEFAULT_TOL);
    let inv = check_invariant(ops);
    if !inv.verdict() {
        let (name, r) = inv.first_failure().unwrap();
        return Err(Error::Precondition(format!(
            "submanifold is not invariant ({name} residual {:e})",
            r.to_f64_lossy()
        )));
    }
    let (p, s) = (ops.p.mat(), ops.s.mat());
    let lhs = array3_from_fn(n, n, m, |i, k| s * b.at(i, k));
    let rhs = array3_from_fn(n, n, m, |i, k| {
        b.eval(&unit(n, i), &p.column(k).into_owned())
    });
    let sb = arr_rel(&lhs, &rhs);
    if !(sb <= tol) {
        return Err(Error::Precondition(format!(
            "S(B(X,Y)) = B(X,PY) violated (residual {:e})",
            sb.to_f64_lossy()
        )));
    }
    let g = ops.g();
    let j = p * (T::lit(2.0) / cp.delta()) + DMatrix::<T>::identity(n, n) * (cp.a() / cp.delta());
    let j_adj = g.inverse() * j.transpose() * g.gram();
    let mut rep = ResidualReport::new(tol);
    rep.push("SB=B(.,P.)", sb);
    rep.push("j-skew", rel(&j_adj, &(-&j)));
    rep.push(
        "j-orthogonal",
        rel(&(j.transpose() * g.gram() * &j), g.gram()),
    );
    let frame = adapted_frame(&j, g)?;
    rep.push(
        "frame-orthonormal",
        rel(
            &(frame.transpose() * g.gram() * &frame),
            &DMatrix::identity(n, n),
        ),
    );
    let mut adapted = T::zero();
    for k in (0..n).step_by(2) {
        let d = &j * frame.column(k) - frame.column(k + 1);
        adapted = adapted.max(frobenius(&d.into_owned()));
    }
    rep.push("frame-adapted", adapted);
    let trace = (0..n).fold(DVector::zeros(m), |acc, k| {
        let e = frame.column(k).into_owned();
        acc + b.eval(&e, &e)
    });
    rep.push("trace-B", ops.ge().norm_squared(&trace).sqrt());
    Ok(rep)
}

/// Outcome of the totally geodesic implications on one hypersurface point.
#[derive(Debug, Clone, PartialEq)]
pub struct TotallyGeodesicReport<T: Real> {
    pub norm_a: T,
    pub norm_nabla_p: T,
    pub norm_nabla_v: T,
    pub norm_av: T,
    /// `||A - (tr A / n) id||`; zero exactly at umbilical points.
    pub umbilicity: T,
    /// Residuals of the two implications; an implication whose hypothesis
    /// fails contributes zero.
    pub report: ResidualReport<T>,
}

/// Evaluates `A = 0 ⇒ (nabla P = 0 and nabla V = 0)` and
/// `(nabla P = 0 and A V = 0) ⇒ A = 0` on the supplied data.
pub fn totally_geodesic_check<T: Real>(h: &HypersurfaceData<T>) -> TotallyGeodesicReport<T> {
    let tol = T::lit(DEFAULT_TOL);
    let n = h.dim();
    let norm_a = frobenius(h.a.mat());
    let norm_nabla_p = frobenius(&h.nabla_p);
    let norm_nabla_v = frobenius(h.nabla_v.mat());
    let norm_av = frobenius(&(h.a.mat() * &h.v));
    let umbilicity = if n == 0 {
        T::zero()
    } else {
        let mean = h.a.mat().trace() / T::from_usize(n).unwrap();
        frobenius(&(h.a.mat() - DMatrix::<T>::identity(n, n) * mean))
    };
    let mut report = ResidualReport::new(tol);
    let forward = if norm_a <= tol {
        norm_nabla_p.max(norm_nabla_v)
    } else {
        T::zero()
    };
    let backward = if norm_nabla_p <= tol && norm_av <= tol {
        norm_a
    } else {
        T::zero()
    };
    report.push("A=0 => nablaP=0,nablaV=0", forward);
    report.push("nablaP=0,AV=0 => A=0", backward);
    TotallyGeodesicReport {
        norm_a,
        norm_nabla_p,
        norm_nabla_v,
        norm_av,
        umbilicity,
        report,
    }
}

//! Metallic means and the dictionaries between product, metallic, complex
//! and complex metallic structures on a single inner product space.

use nalgebra::DMatrix;

use crate::report::ResidualReport;
use crate::tensor::{residual_norm, Metric, OperatorBlock};
use crate::{Error, Real, Result};

/// Relative tolerance used when validating a [`StructureOperator`] at construction.
pub const STRUCTURE_TOL: f64 = 1e-9;

/// The pair `(p, q)` together with its metallic mean `sigma`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetallicParams<T: Real> {
    p: T,
    q: T,
    sigma: T,
}

impl<T: Real> MetallicParams<T> {
    /// Builds the parameters; equivalent to [`metallic_mean`].
    pub fn new(p: T, q: T) -> Result<Self> {
        if !(p > T::zero()) || !(q > T::zero()) {
            return Err(Error::InvalidParams(format!(
                "p and q must be positive (p = {p}, q = {q})"
            )));
        }
        let sigma = (p + (p * p + T::lit(4.0) * q).sqrt()) / T::lit(2.0);
        Ok(Self { p, q, sigma })
    }

    pub fn p(&self) -> T {
        self.p
    }

    pub fn q(&self) -> T {
        self.q
    }

    /// The positive root of `x^2 - p x - q`.
    pub fn sigma(&self) -> T {
        self.sigma
    }

    /// The other root `p - sigma`.
    pub fn conjugate(&self) -> T {
        self.p - self.sigma
    }

    /// `2 sigma - p = sqrt(p^2 + 4q)`.
    pub fn gap(&self) -> T {
        T::lit(2.0) * self.sigma - self.p
    }
}

/// The positive root of `x^2 - p x - q = 0`.
pub fn metallic_mean<T: Real>(p: T, q: T) -> Result<MetallicParams<T>> {
    MetallicParams::new(p, q)
}

/// The pair `(a, b)` of a complex metallic structure together with `delta = sqrt(4b - a^2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexMetallicParams<T: Real> {
    a: T,
    b: T,
    delta: T,
}

impl<T: Real> ComplexMetallicParams<T> {
    /// Requires `a >= 0`, `b > 0` and `a < 2 sqrt(b)`.
    pub fn new(a: T, b: T) -> Result<Self> {
        if !(b > T::zero()) || !(a >= T::zero()) {
            return Err(Error::InvalidParams(format!(
                "need a >= 0 and b > 0 (a = {a}, b = {b})"
            )));
        }
        if !(a < T::lit(2.0) * b.sqrt()) {
            return Err(Error::InvalidParams(format!(
                "need a < 2 sqrt(b) (a = {a}, b = {b})"
            )));
        }
        let delta = (T::lit(4.0) * b - a * a).sqrt();
        Ok(Self { a, b, delta })
    }

    pub fn a(&self) -> T {
        self.a
    }

    pub fn b(&self) -> T {
        self.b
    }

    pub fn delta(&self) -> T {
        self.delta
    }
}

/// Which polynomial identity a structure operator satisfies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StructureKind<T: Real> {
    /// `F^2 = id`.
    Product,
    /// `J^2 = pJ + q id`.
    Metallic(MetallicParams<T>),
    /// `J^2 = -id`.
    Complex,
    /// `J^2 + aJ + b id = 0`.
    ComplexMetallic(ComplexMetallicParams<T>),
}

impl<T: Real> StructureKind<T> {
    pub fn name(&self) -> &'static str {
        match self {
            StructureKind::Product => "product",
            StructureKind::Metallic(_) => "metallic",
            StructureKind::Complex => "complex",
            StructureKind::ComplexMetallic(_) => "complex metallic",
        }
    }
}

/// A square operator tagged with the structure equation it satisfies.
#[derive(Debug, Clone, PartialEq)]
pub struct StructureOperator<T: Real> {
    op: OperatorBlock<T>,
    kind: StructureKind<T>,
}

/// Residual of the structure equation of `kind` for the square matrix `m`.
pub fn equation_residual<T: Real>(m: &DMatrix<T>, kind: &StructureKind<T>) -> T {
    let n = m.nrows();
    let id = DMatrix::<T>::identity(n, n);
    let sq = m * m;
    let rhs = match kind {
        StructureKind::Product => id,
        StructureKind::Metallic(mp) => m * mp.p() + id * mp.q(),
        StructureKind::Complex => -id,
        StructureKind::ComplexMetallic(cp) => -(m * cp.a()) - id * cp.b(),
    };
    residual_norm(&sq, &rhs).unwrap_or(T::max_value().unwrap_or(T::one()))
}

impl<T: Real> StructureOperator<T> {
    /// Validates squareness and the structure equation to relative `1e-9`.
    pub fn new(op: OperatorBlock<T>, kind: StructureKind<T>) -> Result<Self> {
        let s = Self::new_unchecked(op, kind)?;
        let r = s.equation_residual();
        if !(r <= T::lit(STRUCTURE_TOL)) {
            return Err(Error::StructureViolation {
                kind: kind.name().into(),
                residual: r.to_f64_lossy(),
            });
        }
        Ok(s)
    }

    /// Skips the structure equation check; only squareness is enforced.
    pub fn new_unchecked(op: OperatorBlock<T>, kind: StructureKind<T>) -> Result<Self> {
        if !op.is_endomorphism() {
            return Err(Error::MetricMismatch(
                "structure operator must be an endomorphism".into(),
            ));
        }
        Ok(Self { op, kind })
    }

    /// Convenience constructor on a Euclidean frame.
    pub fn from_matrix(m: DMatrix<T>, kind: StructureKind<T>) -> Result<Self> {
        let metric = Metric::euclidean(m.nrows());
        Self::new(OperatorBlock::new(m, metric.clone(), metric)?, kind)
    }

    pub fn op(&self) -> &OperatorBlock<T> {
        &self.op
    }

    pub fn mat(&self) -> &DMatrix<T> {
        self.op.mat()
    }

    pub fn kind(&self) -> StructureKind<T> {
        self.kind
    }

    pub fn metric(&self) -> &Metric<T> {
        self.op.domain()
    }

    pub fn equation_residual(&self) -> T {
        equation_residual(self.op.mat(), &self.kind)
    }

    fn rebuild(&self, mat: DMatrix<T>, kind: StructureKind<T>) -> Result<Self> {
        Self::new(self.op.with_mat(mat)?, kind)
    }
}

/// The two metallic structures `J_{1,2} = (p/2) id ± ((2 sigma - p)/2) F` of a product structure.
pub fn product_to_metallic<T: Real>(
    f: &StructureOperator<T>,
    params: MetallicParams<T>,
) -> Result<(StructureOperator<T>, StructureOperator<T>)> {
    if f.kind() != StructureKind::Product {
        return Err(Error::Precondition("expected a product structure".into()));
    }
    let n = f.mat().nrows();
    let half = T::lit(0.5);
    let base = DMatrix::<T>::identity(n, n) * (params.p() * half);
    let scaled = f.mat() * (params.gap() * half);
    let kind = StructureKind::Metallic(params);
    Ok((
        f.rebuild(&base + &scaled, kind)?,
        f.rebuild(&base - &scaled, kind)?,
    ))
}

/// The two product structures `F_± = ±((2/(2 sigma - p)) J - (p/(2 sigma - p)) id)`.
pub fn metallic_to_product<T: Real>(
    j: &StructureOperator<T>,
) -> Result<(StructureOperator<T>, StructureOperator<T>)> {
    let StructureKind::Metallic(mp) = j.kind() else {
        return Err(Error::Precondition("expected a metallic structure".into()));
    };
    let n = j.mat().nrows();
    let d = mp.gap();
    let plus = j.mat() * (T::lit(2.0) / d) - DMatrix::<T>::identity(n, n) * (mp.p() / d);
    let minus = -plus.clone();
    Ok((
        j.rebuild(plus, StructureKind::Product)?,
        j.rebuild(minus, StructureKind::Product)?,
    ))
}

/// A projector together with the eigenvalue of the structure on its image.
#[derive(Debug, Clone, PartialEq)]
pub struct Projector<T: Real> {
    pub op: OperatorBlock<T>,
    pub eigenvalue: T,
}

/// `pi_1 = (sigma/(2sigma-p)) id - J/(2sigma-p)` and
/// `pi_2 = ((sigma-p)/(2sigma-p)) id + J/(2sigma-p)`.
///
/// `pi_1` projects onto the `(p - sigma)`-eigenspace and `pi_2` onto the
/// `sigma`-eigenspace; the tags record this.
pub fn metallic_projections<T: Real>(
    j: &StructureOperator<T>,
) -> Result<(Projector<T>, Projector<T>)> {
    let StructureKind::Metallic(mp) = j.kind() else {
        return Err(Error::Precondition("expected a metallic structure".into()));
    };
    let r = j.equation_residual();
    if !(r <= T::lit(STRUCTURE_TOL)) {
        return Err(Error::StructureViolation {
            kind: "metallic".into(),
            residual: r.to_f64_lossy(),
        });
    }
    let [m1, m2] = eigenprojector_matrices(j.mat(), &mp);
    Ok((
        Projector {
            op: j.op.with_mat(m1)?,
            eigenvalue: mp.conjugate(),
        },
        Projector {
            op: j.op.with_mat(m2)?,
            eigenvalue: mp.sigma(),
        },
    ))
}

/// The two matrices `sigma/(2sigma-p) - M/(2sigma-p)` and `(sigma-p)/(2sigma-p) + M/(2sigma-p)`.
pub fn eigenprojector_matrices<T: Real>(m: &DMatrix<T>, mp: &MetallicParams<T>) -> [DMatrix<T>; 2] {
    let n = m.nrows();
    let d = mp.gap();
    let id = DMatrix::<T>::identity(n, n);
    [
        &id * (mp.sigma() / d) - m / d,
        &id * ((mp.sigma() - mp.p()) / d) + m / d,
    ]
}

/// `J_± = -(a/2) id ± (delta/2) Jc`.
pub fn complex_to_cms<T: Real>(
    jc: &StructureOperator<T>,
    params: ComplexMetallicParams<T>,
) -> Result<(StructureOperator<T>, StructureOperator<T>)> {
    if jc.kind() != StructureKind::Complex {
        return Err(Error::Precondition("expected a complex structure".into()));
    }
    let n = jc.mat().nrows();
    let half = T::lit(0.5);
    let base = DMatrix::<T>::identity(n, n) * (-params.a() * half);
    let scaled = jc.mat() * (params.delta() * half);
    let kind = StructureKind::ComplexMetallic(params);
    Ok((
        jc.rebuild(&base + &scaled, kind)?,
        jc.rebuild(&base - &scaled, kind)?,
    ))
}

/// `Jc_± = ±((2/delta) J + (a/delta) id)`.
pub fn cms_to_complex<T: Real>(
    j: &StructureOperator<T>,
) -> Result<(StructureOperator<T>, StructureOperator<T>)> {
    let StructureKind::ComplexMetallic(cp) = j.kind() else {
        return Err(Error::Precondition(
            "expected a complex metallic structure".into(),
        ));
    };
    let n = j.mat().nrows();
    let plus =
        j.mat() * (T::lit(2.0) / cp.delta()) + DMatrix::<T>::identity(n, n) * (cp.a() / cp.delta());
    let minus = -plus.clone();
    Ok((
        j.rebuild(plus, StructureKind::Complex)?,
        j.rebuild(minus, StructureKind::Complex)?,
    ))
}

/// Residual of metric compatibility for a square matrix `m` on metric `g`:
/// self-adjointness for product and metallic structures, skew-adjointness for
/// complex structures and `J^* = -J - a id` for complex metallic ones.
pub fn compatibility_residual<T: Real>(
    m: &DMatrix<T>,
    g: &Metric<T>,
    kind: &StructureKind<T>,
) -> T {
    let adj = g.inverse() * m.transpose() * g.gram();
    let n = m.nrows();
    let target = match kind {
        StructureKind::Product | StructureKind::Metallic(_) => m.clone(),
        StructureKind::Complex => -m,
        StructureKind::ComplexMetallic(cp) => -m - DMatrix::<T>::identity(n, n) * cp.a(),
    };
    residual_norm(&adj, &target).unwrap_or(T::max_value().unwrap_or(T::one()))
}

/// Structure equation residual and metric compatibility residual.
pub fn structure_residual<T: Real>(s: &StructureOperator<T>, g: &Metric<T>) -> ResidualReport<T> {
    let mut rep = ResidualReport::new(T::lit(STRUCTURE_TOL));
    rep.push("equation", s.equation_residual());
    if g.dim() == s.mat().nrows() {
        rep.push("metric", compatibility_residual(s.mat(), g, &s.kind()));
    } else {
        rep.push("metric", T::max_value().unwrap_or(T::one()));
    }
    rep
}

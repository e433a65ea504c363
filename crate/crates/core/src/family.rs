//! Associated families of minimal surfaces: rotating the second fundamental
//! form of a trace-free surface record by `R_theta = cos(theta) id + sin(theta) Jrot`.

use nalgebra::{DMatrix, DVector};
use ndarray::{Array3, Array4};
use rayon::prelude::*;

use crate::compat::{full_verdict_with_tol, PointRecord};
use crate::examples::sphere::{build_sphere_product, SphereProductExample};
use crate::structures::MetallicParams;
use crate::submanifold::{array3_from_fn, fiber3, mean_curvature, DerivativeData};
use crate::tensor::{frobenius, BilinearForm, OperatorBlock};
use crate::{Error, Real, ResidualReport, Result};

/// Relative tolerance on `trace_g B` below which a record counts as minimal.
pub const TRACE_FREE_TOL: f64 = 1e-9;

/// Default number of equally spaced samples on `[0, 2 pi)`.
pub const DEFAULT_THETA_COUNT: usize = 24;

/// A point record of a surface together with the rotation by `pi/2` of its
/// oriented tangent plane.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceRecord<T: Real> {
    pub record: PointRecord<T>,
    jrot: DMatrix<T>,
}

impl<T: Real> SurfaceRecord<T> {
    /// `Jrot = sqrt(det G) G^{-1} [[0, -1], [1, 0]]`, which sends the first
    /// frame vector to the positively oriented unit normal within the plane.
    pub fn new(record: PointRecord<T>) -> Result<Self> {
        if record.tangent_dim() != 2 {
            return Err(Error::dims("surface record", 2, record.tangent_dim()));
        }
        let g = record.g();
        let omega = DMatrix::from_row_slice(2, 2, &[T::zero(), -T::one(), T::one(), T::zero()]);
        let jrot = g.inverse() * omega * g.gram().determinant().sqrt();
        Ok(Self { record, jrot })
    }

    pub fn jrot(&self) -> &DMatrix<T> {
        &self.jrot
    }

    /// `cos(theta) id + sin(theta) Jrot`.
    pub fn rotation(&self, theta: T) -> OperatorBlock<T> {
        rotation_operator(&self.jrot, self.record.g(), theta)
    }

    /// `trace_g B`.
    pub fn trace_b(&self) -> DVector<T> {
        mean_curvature(&self.record.der.b, self.record.g()) * T::lit(2.0)
    }

    /// Whether `|trace_g B| <= 1e-9 |B|`.
    pub fn is_trace_free(&self) -> bool {
        let tr = self.record.ge().norm_squared(&self.trace_b()).sqrt();
        tr <= T::lit(TRACE_FREE_TOL) * frobenius(self.record.der.b.coeffs())
    }
}

/// `cos(theta) id + sin(theta) jrot` on the tangent plane with metric `g`.
pub fn rotation_operator<T: Real>(
    jrot: &DMatrix<T>,
    g: &crate::tensor::Metric<T>,
    theta: T,
) -> OperatorBlock<T> {
    let mat = DMatrix::<T>::identity(2, 2) * theta.cos() + jrot * theta.sin();
    OperatorBlock::new(mat, g.clone(), g.clone()).expect("2x2 rotation")
}

/// A member of the associated family.
#[derive(Debug, Clone, PartialEq)]
pub struct DeformedRecord<T: Real> {
    pub theta: T,
    pub record: SurfaceRecord<T>,
}

/// `B_theta(X, Y) = B(X, R^{-1} Y)`, `P_theta = R P R^{-1}`, `Q_theta = Q R^{-1}`,
/// `Rop_theta = R Rop`, `S_theta = S`, with the derivative data transported
/// by the same rules and the curvatures unchanged.
pub fn deform<T: Real>(rec: &SurfaceRecord<T>, theta: T) -> Result<DeformedRecord<T>> {
    if !rec.is_trace_free() {
        let tr = rec.record.ge().norm_squared(&rec.trace_b()).sqrt();
        return Err(Error::Precondition(format!(
            "second fundamental form is not trace-free (|trace B| = {:e})",
            tr.to_f64_lossy()
        )));
    }
    let base = &rec.record;
    let r = rec.rotation(theta).mat().clone();
    let rinv = rec.rotation(-theta).mat().clone();
    let (n, m) = (base.tangent_dim(), base.normal_dim());
    let ops = base.ops.with_blocks(
        &r * base.ops.p().mat() * &rinv,
        base.ops.q().mat() * &rinv,
        &r * base.ops.r().mat(),
        base.ops.s().mat().clone(),
    )?;
    let der = &base.der;
    let as_mat = |arr: &Array3<T>, i: usize, rows: usize, cols: usize| {
        DMatrix::from_fn(rows, cols, |k, j| arr[[i, j, k]])
    };
    let transport = |arr: &Array3<T>,
                     rows: usize,
                     cols: usize,
                     f: &dyn Fn(DMatrix<T>) -> DMatrix<T>|
     -> Array3<T> {
        let mats: Vec<DMatrix<T>> = (0..n).map(|i| f(as_mat(arr, i, rows, cols))).collect();
        array3_from_fn(n, cols, rows, |i, j| mats[i].column(j).into_owned())
    };
    let nabla_p = transport(&der.nabla_p, n, n, &|mi| &r * mi * &rinv);
    let nabla_q = transport(&der.nabla_q, m, n, &|mi| mi * &rinv);
    let nabla_r = transport(&der.nabla_r, n, m, &|mi| &r * mi);
    let b = BilinearForm::new_unchecked(Array3::from_shape_fn((n, n, m), |(i, j, a)| {
        (0..n).fold(T::zero(), |acc, l| {
            acc + rinv[(l, j)] * der.b.coeffs()[[i, l, a]]
        })
    }))?;
    let nabla_b = Array4::from_shape_fn((n, n, n, m), |(i, j, k, a)| {
        (0..n).fold(T::zero(), |acc, l| {
            acc + rinv[(l, k)] * der.nabla_b[[i, j, l, a]]
        })
    });
    let new_der = DerivativeData {
        nabla_p,
        nabla_q,
        nabla_r,
        nabla_s: der.nabla_s.clone(),
        b,
        nabla_b,
        shape: der.shape.iter().map(|a| &r * a).collect(),
        rperp: der.rperp.clone(),
    };
    let record = PointRecord::new(ops, new_der, base.r_tm.clone(), base.target)?;
    Ok(DeformedRecord {
        theta,
        record: SurfaceRecord {
            record,
            jrot: rec.jrot.clone(),
        },
    })
}

/// `count` equally spaced angles on `[0, 2 pi)`.
pub fn default_thetas<T: Real>(count: usize) -> Vec<T> {
    let step = T::two_pi() / T::from_usize(count.max(1)).unwrap();
    (0..count)
        .map(|k| step * T::from_usize(k).unwrap())
        .collect()
}

/// Residuals of every family member and the continuity constant.
#[derive(Debug, Clone, PartialEq)]
pub struct FamilyReport<T: Real> {
    pub thetas: Vec<T>,
    /// One full verdict per angle, in the order of `thetas`.
    pub reports: Vec<ResidualReport<T>>,
    /// All entries, prefixed with `theta[k]:`.
    pub combined: ResidualReport<T>,
    /// `max |residual(theta_{k+1}) - residual(theta_k)| / (theta_{k+1} - theta_k)` over names.
    pub continuity: T,
}

impl<T: Real> FamilyReport<T> {
    pub fn verdict(&self) -> bool {
        self.combined.verdict()
    }
}

/// Deforms and verifies the record at every angle, in parallel.
pub fn verify_family<T: Real>(
    rec: &SurfaceRecord<T>,
    thetas: &[T],
    tol: T,
) -> Result<FamilyReport<T>> {
    let base = full_verdict_with_tol(&rec.record, tol);
    if !base.verdict() {
        let (name, r) = base.first_failure().unwrap();
        return Err(Error::Precondition(format!(
            "base record fails {name} (residual {:e})",
            r.to_f64_lossy()
        )));
    }
    let reports = thetas
        .par_iter()
        .map(|&t| deform(rec, t).map(|d| full_verdict_with_tol(&d.record.record, tol)))
        .collect::<Result<Vec<_>>>()?;
    let mut combined = ResidualReport::new(tol);
    for (k, r) in reports.iter().enumerate() {
        combined.extend_prefixed(&format!("theta[{k}]:"), r);
    }
    let mut continuity = T::zero();
    for k in 1..reports.len() {
        let dt = (thetas[k] - thetas[k - 1]).abs();
        if dt == T::zero() {
            continue;
        }
        for ((_, a), (_, b)) in reports[k].entries().iter().zip(reports[k - 1].entries()) {
            continuity = continuity.max((*a - *b).abs() / dt);
        }
    }
    Ok(FamilyReport {
        thetas: thetas.to_vec(),
        reports,
        combined,
        continuity,
    })
}

/// The flat torus `S^1(c1) x S^1(c2)` inside `S^2(c1) x S^2(c2)`: a totally
/// geodesic, hence minimal, surface record.
pub fn flat_torus_base<T: Real>(mp: MetallicParams<T>, c1: T, c2: T) -> Result<SurfaceRecord<T>> {
    let ex = SphereProductExample::new(1, 1, c1, c2, mp)?;
    SurfaceRecord::new(build_sphere_product(&ex)?)
}

/// Helper for tests: the second fundamental form at `(i, j)`.
pub fn b_at<T: Real>(rec: &SurfaceRecord<T>, i: usize, j: usize) -> DVector<T> {
    fiber3(rec.record.der.b.coeffs(), i, j)
}

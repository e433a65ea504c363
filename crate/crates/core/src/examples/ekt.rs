//! `E(kappa, tau)` as a hypersurface of the complex space form of holomorphic
//! curvature `kappa - 4 tau^2`, evaluated in the canonical frame.

use nalgebra::{DMatrix, DVector};
use ndarray::{Array3, Array4};

use crate::compat::{PointRecord, Target};
use crate::model_spaces::{
    canonical_sasakian, ekt_christoffel, ekt_connection, ekt_curvature_tensor,
    ComplexSpaceFormParams, EktFrame, EktParams,
};
use crate::structures::ComplexMetallicParams;
use crate::submanifold::{
    array3_from_fn, DerivativeData, HypersurfaceData, InducedOperators, StructureParams,
};
use crate::tensor::{BilinearForm, CurvatureConvention, CurvatureTensor, Metric};
use crate::{Real, Result};

/// Parameters of the `E(kappa, tau)` example.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EktExample<T: Real> {
    pub ekt: EktParams<T>,
    pub cms: ComplexMetallicParams<T>,
}

impl<T: Real> EktExample<T> {
    pub fn new(kappa: T, tau: T, a: T, b: T) -> Result<Self> {
        Ok(Self {
            ekt: EktParams::new(kappa, tau)?,
            cms: ComplexMetallicParams::new(a, b)?,
        })
    }

    /// `P = (delta/2) phi - (a/2) id`.
    pub fn p(&self) -> DMatrix<T> {
        let two = T::lit(2.0);
        canonical_sasakian(&self.ekt).mat() * (self.cms.delta() / two)
            - DMatrix::<T>::identity(3, 3) * (self.cms.a() / two)
    }

    /// `V = (delta/2) xi`.
    pub fn v(&self) -> DVector<T> {
        EktFrame::<T>::canonical().eta * (self.cms.delta() / T::lit(2.0))
    }

    /// `f = -a/2`.
    pub fn f(&self) -> T {
        -self.cms.a() / T::lit(2.0)
    }

    /// `A X = tau X + ((4 tau^2 - kappa)/(tau delta^2)) <X, V> V`.
    pub fn shape(&self) -> DMatrix<T> {
        let (k, t) = (self.ekt.kappa(), self.ekt.tau());
        let d2 = self.cms.delta() * self.cms.delta();
        let v = self.v();
        DMatrix::<T>::identity(3, 3) * t
            + &v * v.transpose() * ((T::lit(4.0) * t * t - k) / (t * d2))
    }

    /// Holomorphic curvature parameter of the target.
    pub fn target(&self) -> Result<ComplexSpaceFormParams<T>> {
        ComplexSpaceFormParams::new(2, self.ekt.target_c())
    }

    /// `(nabla_{e_i} A)` as matrices, from the connection of the canonical frame.
    pub fn nabla_shape(&self) -> Vec<DMatrix<T>> {
        let conn = ekt_connection(&self.ekt);
        let a = self.shape();
        (0..3)
            .map(|i| conn.omega(i) * &a - &a * conn.omega(i))
            .collect()
    }

    /// `d A(e_i, e_j) = (nabla_{e_i} A) e_j - (nabla_{e_j} A) e_i`, computed from the Christoffel symbols.
    pub fn d_nabla_a(&self) -> Array3<T> {
        let na = self.nabla_shape();
        array3_from_fn(3, 3, 3, |i, j| na[i].column(j) - na[j].column(i))
    }

    /// Closed form of `d A(X, Y)`:
    /// `-c[(4/delta^2)(<V,X> PY - <V,Y> PX) + (2a/delta^2)(<V,X> Y - <V,Y> X)]
    /// - (4c/delta^2)(2 <X, PY> + a <X, Y>) V` with `c = (kappa - 4 tau^2)/4`.
    pub fn d_nabla_a_closed_form(&self, x: &DVector<T>, y: &DVector<T>) -> DVector<T> {
        let (c, a) = (self.ekt.target_c(), self.cms.a());
        let d2 = self.cms.delta() * self.cms.delta();
        let (p, v) = (self.p(), self.v());
        let (vx, vy) = (v.dot(x), v.dot(y));
        let first = ((&p * y) * vx - (&p * x) * vy) * (T::lit(4.0) / d2)
            + (y * vx - x * vy) * (T::lit(2.0) * a / d2);
        let second =
            &v * ((T::lit(2.0) * x.dot(&(&p * y)) + a * x.dot(y)) * (T::lit(4.0) * c / d2));
        -(first * c) - second
    }

    /// The expression displayed for `d A(X, Y)`, which carries the opposite overall sign.
    pub fn d_nabla_a_printed(&self, x: &DVector<T>, y: &DVector<T>) -> DVector<T> {
        let (c, a) = (self.ekt.target_c(), self.cms.a());
        let d2 = self.cms.delta() * self.cms.delta();
        let (p, v) = (self.p(), self.v());
        let (vx, vy) = (v.dot(x), v.dot(y));
        let k = self.ekt.kappa() - T::lit(4.0) * self.ekt.tau() * self.ekt.tau();
        let first = ((&p * y) * vx - (&p * x) * vy) * (T::lit(4.0) / d2)
            + (y * vx - x * vy) * (T::lit(2.0) * a / d2);
        let second = &v * ((T::lit(2.0) * (&p * x).dot(y) + a * x.dot(y)) * (k / d2));
        first * c - second
    }

    /// Curvature assembled from `P` and `A` in the opposite convention
    /// `R0(X, Y) Z = <X, Z> Y - <Y, Z> X`, with `c = kappa/4 - tau^2`.
    pub fn gauss_form(&self) -> CurvatureTensor<T> {
        let (c, a) = (self.ekt.target_c(), self.cms.a());
        let d2 = self.cms.delta() * self.cms.delta();
        let (p, sh) = (self.p(), self.shape());
        let r0 = |x: &DVector<T>, y: &DVector<T>, z: &DVector<T>| y * x.dot(z) - x * y.dot(z);
        let e = |i: usize| {
            let mut v = DVector::zeros(3);
            v[i] = T::one();
            v
        };
        let two = T::lit(2.0);
        CurvatureTensor::from_fn(3, 3, CurvatureConvention::Opposite, |i, j, k| {
            let (x, y, z) = (e(i), e(j), e(k));
            let (px, py, pz) = (&p * &x, &p * &y, &p * &z);
            let xpy = x.dot(&py);
            let xy = x.dot(&y);
            r0(&x, &y, &z) * (c * (T::one() + a * a / d2))
                + r0(&px, &py, &z) * (T::lit(4.0) * c / d2)
                + (r0(&x, &py, &z) + r0(&px, &y, &z)) * (two * a * c / d2)
                - (&pz * (T::lit(4.0) / d2 * xpy)
                    + &z * (two * a / d2 * xpy)
                    + &pz * (two * a / d2 * xy)
                    + &z * (a * a / d2 * xy))
                    * (two * c)
                + r0(&(&sh * &x), &(&sh * &y), &z)
        })
    }

    /// Hypersurface view `(P, V, f, A)` with derivative data.
    pub fn hypersurface(&self) -> Result<HypersurfaceData<T>> {
        let rec = build_ekt_immersion(self)?;
        HypersurfaceData::from_point_data(&rec.ops, &rec.der)
    }
}

/// Point record of `E(kappa, tau)` in `M_C((kappa - 4 tau^2)/4)`: `J X = P X - <X, V> nu`,
/// `J nu = V + f nu`, `B(X, Y) = <A X, Y> nu`, flat normal bundle.
pub fn build_ekt_immersion<T: Real>(ex: &EktExample<T>) -> Result<PointRecord<T>> {
    let g = Metric::euclidean(3);
    let ge = Metric::euclidean(1);
    let (p, v) = (ex.p(), ex.v());
    let q = DMatrix::from_rows(&[-v.transpose()]);
    let r = DMatrix::from_columns(std::slice::from_ref(&v));
    let s = DMatrix::from_element(1, 1, ex.f());
    let ops = InducedOperators::from_matrices(
        p.clone(),
        q.clone(),
        r.clone(),
        s,
        g,
        ge,
        StructureParams::ComplexMetallic(ex.cms),
    )?;
    let conn = ekt_connection(&ex.ekt);
    let omegas: Vec<DMatrix<T>> = (0..3).map(|i| conn.omega(i)).collect();
    let a = ex.shape();
    let nabla_p = array3_from_fn(3, 3, 3, |i, j| {
        (&omegas[i] * &p - &p * &omegas[i]).column(j).into_owned()
    });
    let nabla_q = array3_from_fn(3, 3, 1, |i, j| {
        DVector::from_column_slice((-(&q * &omegas[i])).column(j).as_slice())
    });
    let nabla_r = array3_from_fn(3, 1, 3, |i, _| &omegas[i] * &v);
    let gamma = ekt_christoffel(&ex.ekt);
    let nabla_b = Array4::from_shape_fn((3, 3, 3, 1), |(i, j, k, _)| {
        let mut acc = T::zero();
        for l in 0..3 {
            acc -= gamma[[i, j, l]] * a[(l, k)] + gamma[[i, k, l]] * a[(j, l)];
        }
        acc
    });
    let der = DerivativeData {
        nabla_p,
        nabla_q,
        nabla_r,
        b: BilinearForm::from_fn(3, 1, |i, j| DVector::from_element(1, a[(i, j)])),
        nabla_b,
        shape: vec![a],
        ..DerivativeData::zeros(3, 1)
    };
    PointRecord::new(
        ops,
        der,
        ekt_curvature_tensor(&ex.ekt),
        Target::ComplexSpaceForm(ex.target()?),
    )
}

/// The grid of parameters used by the acceptance sweep, skipping `a >= 2 sqrt(b)`.
pub fn ekt_grid<T: Real>() -> Vec<EktExample<T>> {
    let mut out = Vec::new();
    for kappa in [-4.0, -1.0, 0.0, 1.0, 4.0] {
        for tau in [0.5, 1.0, 2.0] {
            for (a, b) in [(1.0, 1.0), (2.0, 2.0), (1.0, 5.0)] {
                if let Ok(ex) = EktExample::new(T::lit(kappa), T::lit(tau), T::lit(a), T::lit(b)) {
                    out.push(ex);
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compat::full_verdict;
    use crate::tensor::residual_norm;

    fn e(i: usize) -> DVector<f64> {
        let mut v = DVector::zeros(3);
        v[i] = 1.0;
        v
    }

    #[test]
    fn shape_operator_values() {
        let ex = EktExample::new(0.0, 1.0, 2.0, 2.0).unwrap();
        let a = ex.shape();
        assert!((&a * e(0) - e(0)).norm() < 1e-14);
        assert!((&a * e(2) - e(2) * 2.0).norm() < 1e-14);
        assert!((ex.v().norm_squared() - 1.0).abs() < 1e-14);
        let flat = EktExample::new(4.0, 1.0, 1.0, 1.0).unwrap();
        assert!((flat.shape() - DMatrix::identity(3, 3)).norm() < 1e-14);
        assert_eq!(flat.ekt.target_c(), 0.0);
    }

    #[test]
    fn records_on_the_grid_pass() {
        for ex in ekt_grid::<f64>() {
            let rec = build_ekt_immersion(&ex).unwrap();
            let rep = full_verdict(&rec);
            assert!(rep.verdict(), "{ex:?}\n{rep}");
        }
    }

    #[test]
    fn codazzi_closed_form_and_printed_sign() {
        for ex in ekt_grid::<f64>() {
            let d = ex.d_nabla_a();
            let closed = array3_from_fn(3, 3, 3, |i, j| ex.d_nabla_a_closed_form(&e(i), &e(j)));
            let printed = array3_from_fn(3, 3, 3, |i, j| -ex.d_nabla_a_printed(&e(i), &e(j)));
            assert!(residual_norm(&d, &closed).unwrap() < 1e-10);
            assert!(residual_norm(&d, &printed).unwrap() < 1e-10);
        }
    }

    #[test]
    fn gauss_form_matches_curvature() {
        for ex in ekt_grid::<f64>() {
            let lhs = ex.gauss_form();
            let rhs = ekt_curvature_tensor(&ex.ekt);
            assert!(residual_norm(lhs.coeffs(), rhs.coeffs()).unwrap() < 1e-10);
        }
    }

    #[test]
    fn flat_target_has_parallel_shape_operator() {
        let ex = EktExample::new(1.0, 0.5, 1.0, 1.0).unwrap();
        assert!(ex.nabla_shape().iter().all(|m| m.norm() < 1e-14));
        assert!(ex.d_nabla_a().iter().all(|x: &f64| x.abs() < 1e-14));
    }
}

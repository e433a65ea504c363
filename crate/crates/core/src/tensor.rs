//! Frame-level tensors: metrics, operators between inner product spaces,
//! vector valued bilinear forms and curvature tensors.
//!
//! All objects live in a fixed frame. A vector is its coordinate column and
//! the inner product is `x^T G y` for the frame's Gram matrix `G`.

use nalgebra::{DMatrix, DVector};
use ndarray::{Array3, Array4};

use crate::{Error, Real, Result};

/// Relative tolerance used when validating symmetries at construction time.
pub const CONSTRUCTION_TOL: f64 = 1e-12;

/// Smallest admissible Cholesky pivot of a Gram matrix.
pub const PIVOT_THRESHOLD: f64 = 1e-12;

/// Inner product on a frame, stored as its Gram matrix and inverse.
#[derive(Debug, Clone, PartialEq)]
pub struct Metric<T: Real> {
    gram: DMatrix<T>,
    inverse: DMatrix<T>,
}

impl<T: Real> Metric<T> {
    /// Validates symmetry and positive definiteness of `gram`.
    pub fn new(gram: DMatrix<T>) -> Result<Self> {
        if !gram.is_square() {
            return Err(Error::dims(
                "metric",
                "square matrix",
                format!("{}x{}", gram.nrows(), gram.ncols()),
            ));
        }
        let n = gram.nrows();
        if n == 0 {
            return Ok(Self {
                gram,
                inverse: DMatrix::zeros(0, 0),
            });
        }
        let asym = residual_norm(&gram, &gram.transpose())?;
        if asym > T::lit(CONSTRUCTION_TOL) {
            return Err(Error::NotSymmetric(asym.to_f64_lossy()));
        }
        let sym = (&gram + gram.transpose()) * T::lit(0.5);
        let chol =
            nalgebra::Cholesky::new(sym.clone()).ok_or(Error::NotPositiveDefinite(f64::NAN))?;
        let l = chol.l();
        let min_pivot = (0..n)
            .map(|i| l[(i, i)] * l[(i, i)])
            .fold(T::max_value().unwrap(), |a, b| a.min(b));
        if min_pivot < T::lit(PIVOT_THRESHOLD) {
            return Err(Error::NotPositiveDefinite(min_pivot.to_f64_lossy()));
        }
        let inverse = chol.inverse();
        Ok(Self { gram: sym, inverse })
    }

    /// The standard inner product on `R^n`.
    pub fn euclidean(n: usize) -> Self {
        Self {
            gram: DMatrix::identity(n, n),
            inverse: DMatrix::identity(n, n),
        }
    }

    pub fn dim(&self) -> usize {
        self.gram.nrows()
    }

    pub fn gram(&self) -> &DMatrix<T> {
        &self.gram
    }

    pub fn inverse(&self) -> &DMatrix<T> {
        &self.inverse
    }

    pub fn inner(&self, x: &DVector<T>, y: &DVector<T>) -> T {
        (x.transpose() * &self.gram * y)[(0, 0)]
    }

    pub fn norm_squared(&self, x: &DVector<T>) -> T {
        self.inner(x, x)
    }

    /// Raises the first index of a covector: returns `G^{-1} w`.
    pub fn sharp(&self, w: &DVector<T>) -> DVector<T> {
        &self.inverse * w
    }

    /// True when both Gram matrices agree entrywise up to relative `1e-12`.
    pub fn same_as(&self, other: &Self) -> bool {
        self.dim() == other.dim()
            && residual_norm(&self.gram, &other.gram)
                .map(|r| r <= T::lit(CONSTRUCTION_TOL))
                .unwrap_or(false)
    }
}

/// Linear map between two frames, each carrying its metric.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorBlock<T: Real> {
    mat: DMatrix<T>,
    domain: Metric<T>,
    codomain: Metric<T>,
}

impl<T: Real> OperatorBlock<T> {
    /// `mat` has one row per codomain basis vector and one column per domain basis vector.
    pub fn new(mat: DMatrix<T>, domain: Metric<T>, codomain: Metric<T>) -> Result<Self> {
        if mat.nrows() != codomain.dim() || mat.ncols() != domain.dim() {
            return Err(Error::dims(
                "operator block",
                format!("{}x{}", codomain.dim(), domain.dim()),
                format!("{}x{}", mat.nrows(), mat.ncols()),
            ));
        }
        Ok(Self {
            mat,
            domain,
            codomain,
        })
    }

    pub fn identity(metric: &Metric<T>) -> Self {
        let n = metric.dim();
        Self {
            mat: DMatrix::identity(n, n),
            domain: metric.clone(),
            codomain: metric.clone(),
        }
    }

    pub fn zeros(domain: &Metric<T>, codomain: &Metric<T>) -> Self {
        Self {
            mat: DMatrix::zeros(codomain.dim(), domain.dim()),
            domain: domain.clone(),
            codomain: codomain.clone(),
        }
    }

    pub fn mat(&self) -> &DMatrix<T> {
        &self.mat
    }

    pub fn domain(&self) -> &Metric<T> {
        &self.domain
    }

    pub fn codomain(&self) -> &Metric<T> {
        &self.codomain
    }

    pub fn is_endomorphism(&self) -> bool {
        self.domain.same_as(&self.codomain)
    }

    /// Metric adjoint `G_dom^{-1} M^T G_cod`.
    pub fn adjoint(&self) -> Self {
        let mat = self.domain.inverse() * self.mat.transpose() * self.codomain.gram();
        Self {
            mat,
            domain: self.codomain.clone(),
            codomain: self.domain.clone(),
        }
    }

    /// The composition `self ∘ other`.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        if !other.codomain.same_as(&self.domain) {
            return Err(Error::MetricMismatch("composition".into()));
        }
        Ok(Self {
            mat: &self.mat * &other.mat,
            domain: other.domain.clone(),
            codomain: self.codomain.clone(),
        })
    }

    pub fn apply(&self, v: &DVector<T>) -> Result<DVector<T>> {
        if v.len() != self.domain.dim() {
            return Err(Error::dims(
                "operator application",
                self.domain.dim(),
                v.len(),
            ));
        }
        Ok(&self.mat * v)
    }

    /// Same metrics, new matrix.
    pub fn with_mat(&self, mat: DMatrix<T>) -> Result<Self> {
        Self::new(mat, self.domain.clone(), self.codomain.clone())
    }
}

/// Numerical rank: the number of singular values above `tol * sigma_max`.
pub fn rank_with_tol<T: Real>(mat: &DMatrix<T>, tol: T) -> usize {
    if mat.nrows() == 0 || mat.ncols() == 0 {
        return 0;
    }
    let sv = mat.clone().singular_values();
    let smax = sv.iter().fold(T::zero(), |a, &b| a.max(b));
    if smax <= T::zero() {
        return 0;
    }
    sv.iter().filter(|&&s| s > tol * smax).count()
}

/// Array-like data that can be compared entrywise.
pub trait Shaped<T> {
    fn shape_vec(&self) -> Vec<usize>;
    fn entries(&self) -> Vec<T>;
}

impl<T: Real> Shaped<T> for DMatrix<T> {
    fn shape_vec(&self) -> Vec<usize> {
        vec![self.nrows(), self.ncols()]
    }
    fn entries(&self) -> Vec<T> {
        self.iter().copied().collect()
    }
}

impl<T: Real> Shaped<T> for DVector<T> {
    fn shape_vec(&self) -> Vec<usize> {
        vec![self.len()]
    }
    fn entries(&self) -> Vec<T> {
        self.iter().copied().collect()
    }
}

impl<T: Real, D: ndarray::Dimension> Shaped<T> for ndarray::Array<T, D> {
    fn shape_vec(&self) -> Vec<usize> {
        self.shape().to_vec()
    }
    fn entries(&self) -> Vec<T> {
        self.iter().copied().collect()
    }
}

/// `||a - b||_F / max(1, ||a||_F)`.
pub fn residual_norm<T: Real, A: Shaped<T> + ?Sized>(a: &A, b: &A) -> Result<T> {
    let (sa, sb) = (a.shape_vec(), b.shape_vec());
    if sa != sb {
        return Err(Error::dims(
            "residual",
            format!("{sa:?}"),
            format!("{sb:?}"),
        ));
    }
    let (ea, eb) = (a.entries(), b.entries());
    let mut diff = T::zero();
    let mut norm = T::zero();
    for (x, y) in ea.iter().zip(eb.iter()) {
        diff += (*x - *y) * (*x - *y);
        norm += *x * *x;
    }
    Ok(diff.sqrt() / norm.sqrt().max(T::one()))
}

/// Frobenius norm of any shaped array.
pub fn frobenius<T: Real, A: Shaped<T> + ?Sized>(a: &A) -> T {
    a.entries().iter().fold(T::zero(), |s, &x| s + x * x).sqrt()
}

/// Vector valued symmetric bilinear form `B(e_i, e_j) = sum_a coeffs[i, j, a] n_a`.
#[derive(Debug, Clone, PartialEq)]
pub struct BilinearForm<T: Real> {
    coeffs: Array3<T>,
}

impl<T: Real> BilinearForm<T> {
    /// Rejects forms whose asymmetry exceeds relative `1e-12`.
    pub fn new(coeffs: Array3<T>) -> Result<Self> {
        let form = Self::new_unchecked(coeffs)?;
        let r = form.symmetry_residual();
        if r > T::lit(CONSTRUCTION_TOL) {
            return Err(Error::SymmetryViolation(format!(
                "bilinear form asymmetry {:e}",
                r.to_f64_lossy()
            )));
        }
        Ok(form)
    }

    /// Only checks that the two argument slots have equal size.
    pub fn new_unchecked(coeffs: Array3<T>) -> Result<Self> {
        let s = coeffs.shape();
        if s[0] != s[1] {
            return Err(Error::dims("bilinear form", "n x n x m", format!("{s:?}")));
        }
        Ok(Self { coeffs })
    }

    pub fn zeros(n: usize, m: usize) -> Self {
        Self {
            coeffs: Array3::zeros((n, n, m)),
        }
    }

    pub fn from_fn(n: usize, m: usize, f: impl Fn(usize, usize) -> DVector<T>) -> Self {
        let mut coeffs = Array3::zeros((n, n, m));
        for i in 0..n {
            for j in 0..n {
                let v = f(i, j);
                for a in 0..m {
                    coeffs[[i, j, a]] = v[a];
                }
            }
        }
        Self { coeffs }
    }

    pub fn dim(&self) -> usize {
        self.coeffs.shape()[0]
    }

    pub fn fiber_dim(&self) -> usize {
        self.coeffs.shape()[2]
    }

    pub fn coeffs(&self) -> &Array3<T> {
        &self.coeffs
    }

    /// `B(e_i, e_j)`.
    pub fn at(&self, i: usize, j: usize) -> DVector<T> {
        DVector::from_iterator(
            self.fiber_dim(),
            (0..self.fiber_dim()).map(|a| self.coeffs[[i, j, a]]),
        )
    }

    pub fn eval(&self, x: &DVector<T>, y: &DVector<T>) -> DVector<T> {
        let n = self.dim();
        let mut out = DVector::zeros(self.fiber_dim());
        for i in 0..n {
            for j in 0..n {
                let w = x[i] * y[j];
                if w != T::zero() {
                    for a in 0..self.fiber_dim() {
                        out[a] += w * self.coeffs[[i, j, a]];
                    }
                }
            }
        }
        out
    }

    pub fn symmetry_residual(&self) -> T {
        let t = self
            .coeffs
            .clone()
            .permuted_axes([1, 0, 2])
            .as_standard_layout()
            .to_owned();
        residual_norm(&self.coeffs, &t).unwrap_or(T::zero())
    }
}

/// Sign convention of a curvature tensor.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CurvatureConvention {
    /// `R(X,Y) = [nabla_X, nabla_Y] - nabla_[X,Y]`.
    Standard,
    /// The negative of [`CurvatureConvention::Standard`].
    Opposite,
}

/// Curvature of a connection on a bundle over a frame of size `n`.
///
/// `coeffs[i, j, k, l]` is the `l`-th fibre component of `R(e_i, e_j) f_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureTensor<T: Real> {
    coeffs: Array4<T>,
    convention: CurvatureConvention,
}

impl<T: Real> CurvatureTensor<T> {
    /// Rejects tensors that are not antisymmetric in the first two slots.
    pub fn new(coeffs: Array4<T>, convention: CurvatureConvention) -> Result<Self> {
        let t = Self::new_unchecked(coeffs, convention)?;
        let r = t.antisymmetry_residual();
        if r > T::lit(CONSTRUCTION_TOL) {
            return Err(Error::SymmetryViolation(format!(
                "curvature antisymmetry {:e}",
                r.to_f64_lossy()
            )));
        }
        Ok(t)
    }

    pub fn new_unchecked(coeffs: Array4<T>, convention: CurvatureConvention) -> Result<Self> {
        let s = coeffs.shape();
        if s[0] != s[1] || s[2] != s[3] {
            return Err(Error::dims(
                "curvature tensor",
                "n x n x f x f",
                format!("{s:?}"),
            ));
        }
        Ok(Self { coeffs, convention })
    }

    pub fn zeros(n: usize, fiber: usize, convention: CurvatureConvention) -> Self {
        Self {
            coeffs: Array4::zeros((n, n, fiber, fiber)),
            convention,
        }
    }

    /// Builds the tensor from `f(i, j, k) = R(e_i, e_j) f_k`.
    pub fn from_fn(
        n: usize,
        fiber: usize,
        convention: CurvatureConvention,
        f: impl Fn(usize, usize, usize) -> DVector<T>,
    ) -> Self {
        let mut coeffs = Array4::zeros((n, n, fiber, fiber));
        for i in 0..n {
            for j in 0..n {
                for k in 0..fiber {
                    let v = f(i, j, k);
                    for l in 0..fiber {
                        coeffs[[i, j, k, l]] = v[l];
                    }
                }
            }
        }
        Self { coeffs, convention }
    }

    pub fn dim(&self) -> usize {
        self.coeffs.shape()[0]
    }

    pub fn fiber_dim(&self) -> usize {
        self.coeffs.shape()[2]
    }

    pub fn coeffs(&self) -> &Array4<T> {
        &self.coeffs
    }

    pub fn convention(&self) -> CurvatureConvention {
        self.convention
    }

    /// The same tensor expressed in `convention`.
    pub fn to_convention(&self, convention: CurvatureConvention) -> Self {
        if convention == self.convention {
            return self.clone();
        }
        Self {
            coeffs: self.coeffs.mapv(|x| -x),
            convention,
        }
    }

    /// `R(e_i, e_j) f_k`.
    pub fn at(&self, i: usize, j: usize, k: usize) -> DVector<T> {
        DVector::from_iterator(
            self.fiber_dim(),
            (0..self.fiber_dim()).map(|l| self.coeffs[[i, j, k, l]]),
        )
    }

    pub fn eval(&self, x: &DVector<T>, y: &DVector<T>, z: &DVector<T>) -> DVector<T> {
        let (n, f) = (self.dim(), self.fiber_dim());
        let mut out = DVector::zeros(f);
        for i in 0..n {
            for j in 0..n {
                for k in 0..f {
                    let w = x[i] * y[j] * z[k];
                    if w != T::zero() {
                        for l in 0..f {
                            out[l] += w * self.coeffs[[i, j, k, l]];
                        }
                    }
                }
            }
        }
        out
    }

    pub fn antisymmetry_residual(&self) -> T {
        let t = self.coeffs.clone().permuted_axes([1, 0, 2, 3]).mapv(|x| -x);
        residual_norm(&self.coeffs, &t).unwrap_or(T::zero())
    }
}

/// Coordinates of an ambient vector `v` in the frame whose columns are `frame`,
/// assuming `v` lies in their span: solves `(F^T F) c = F^T v`.
pub fn frame_coordinates<T: Real>(frame: &DMatrix<T>, v: &DVector<T>) -> DVector<T> {
    let gram = frame.transpose() * frame;
    let rhs = frame.transpose() * v;
    gram.lu()
        .solve(&rhs)
        .unwrap_or_else(|| DVector::zeros(frame.ncols()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spd(n: usize, seed: u64) -> DMatrix<f64> {
        let a = crate::examples::random::gaussian_matrix::<f64>(n, n, seed);
        &a * a.transpose() + DMatrix::identity(n, n)
    }

    #[test]
    fn metric_rejects_asymmetric_gram() {
        let g = DMatrix::from_row_slice(2, 2, &[1.0, 0.1, 0.0, 1.0]);
        assert!(matches!(Metric::new(g), Err(Error::NotSymmetric(_))));
    }

    #[test]
    fn metric_rejects_indefinite_gram() {
        let g = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(matches!(Metric::new(g), Err(Error::NotPositiveDefinite(_))));
    }

    #[test]
    fn metric_rejects_nearly_singular_gram() {
        let g = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 1e-14]);
        assert!(matches!(Metric::new(g), Err(Error::NotPositiveDefinite(_))));
    }

    #[test]
    fn adjoint_is_involutive_and_metric_compatible() {
        let gd = Metric::new(spd(3, 1)).unwrap();
        let gc = Metric::new(spd(4, 2)).unwrap();
        let m = crate::examples::random::gaussian_matrix::<f64>(4, 3, 3);
        let op = OperatorBlock::new(m, gd.clone(), gc.clone()).unwrap();
        let adj = op.adjoint();
        assert!(residual_norm(op.mat(), adj.adjoint().mat()).unwrap() < 1e-12);
        let x = DVector::from_vec(vec![0.3, -1.0, 2.0]);
        let y = DVector::from_vec(vec![1.0, 0.5, -0.25, 0.7]);
        let lhs = gc.inner(&op.apply(&x).unwrap(), &y);
        let rhs = gd.inner(&x, &adj.apply(&y).unwrap());
        assert!((lhs - rhs).abs() < 1e-12);
    }

    #[test]
    fn composition_requires_matching_metrics() {
        let a = OperatorBlock::identity(&Metric::<f64>::euclidean(2));
        let b = OperatorBlock::identity(&Metric::new(spd(2, 5)).unwrap());
        assert!(matches!(a.compose(&b), Err(Error::MetricMismatch(_))));
        let c = OperatorBlock::zeros(&Metric::<f64>::euclidean(3), &Metric::euclidean(2));
        assert!(a.compose(&c).is_ok());
    }

    #[test]
    fn operator_shape_is_checked() {
        let r = OperatorBlock::new(
            DMatrix::<f64>::zeros(2, 3),
            Metric::euclidean(2),
            Metric::euclidean(2),
        );
        assert!(matches!(r, Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn rank_of_projector_and_zero() {
        let mut m = DMatrix::<f64>::zeros(4, 4);
        m[(0, 0)] = 1.0;
        m[(2, 2)] = 1.0;
        assert_eq!(rank_with_tol(&m, 1e-9), 2);
        assert_eq!(rank_with_tol(&DMatrix::<f64>::zeros(3, 3), 1e-9), 0);
        assert_eq!(rank_with_tol(&DMatrix::<f64>::zeros(0, 3), 1e-9), 0);
    }

    #[test]
    fn residual_norm_scaling() {
        let a = DMatrix::from_element(2, 2, 10.0_f64);
        let b = DMatrix::from_element(2, 2, 10.5);
        assert!((residual_norm(&a, &b).unwrap() - 0.05).abs() < 1e-15);
        let small = DMatrix::from_element(1, 1, 0.0_f64);
        let off = DMatrix::from_element(1, 1, 1e-3);
        assert!((residual_norm(&small, &off).unwrap() - 1e-3).abs() < 1e-18);
        assert!(residual_norm(&a, &DMatrix::zeros(3, 2)).is_err());
    }

    #[test]
    fn bilinear_form_symmetry() {
        let mut c = Array3::<f64>::zeros((2, 2, 1));
        c[[0, 1, 0]] = 1.0;
        assert!(BilinearForm::new(c.clone()).is_err());
        c[[1, 0, 0]] = 1.0;
        let b = BilinearForm::new(c).unwrap();
        let x = DVector::from_vec(vec![1.0, 2.0]);
        let y = DVector::from_vec(vec![3.0, -1.0]);
        assert_eq!(b.eval(&x, &y)[0], -1.0 + 2.0 * 3.0);
    }

    #[test]
    fn curvature_antisymmetry_and_convention() {
        let mut c = Array4::<f64>::zeros((2, 2, 2, 2));
        c[[0, 1, 1, 0]] = 1.0;
        assert!(CurvatureTensor::new(c.clone(), CurvatureConvention::Standard).is_err());
        c[[1, 0, 1, 0]] = -1.0;
        let r = CurvatureTensor::new(c, CurvatureConvention::Standard).unwrap();
        let o = r.to_convention(CurvatureConvention::Opposite);
        assert_eq!(o.at(0, 1, 1)[0], -1.0);
        assert_eq!(o.to_convention(CurvatureConvention::Standard), r);
    }
}

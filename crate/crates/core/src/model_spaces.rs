//! Closed-form geometry of the ambient spaces: products of space forms,
//! complex space forms and the homogeneous 3-manifolds `E(kappa, tau)`.

use nalgebra::{DMatrix, DVector};
use ndarray::Array3;

use crate::structures::{ComplexMetallicParams, MetallicParams};
use crate::tensor::{CurvatureConvention, CurvatureTensor, Metric, OperatorBlock};
use crate::{Error, Real, Result};

/// `M^{n1}(c1) x M^{n2}(c2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProductSpaceParams<T: Real> {
    pub n1: usize,
    pub n2: usize,
    pub c1: T,
    pub c2: T,
}

impl<T: Real> ProductSpaceParams<T> {
    pub fn new(n1: usize, n2: usize, c1: T, c2: T) -> Result<Self> {
        if n1 == 0 || n2 == 0 {
            return Err(Error::InvalidParams(format!(
                "factor dimensions must be positive (n1 = {n1}, n2 = {n2})"
            )));
        }
        if !c1.is_finite() || !c2.is_finite() {
            return Err(Error::InvalidParams("curvatures must be finite".into()));
        }
        Ok(Self { n1, n2, c1, c2 })
    }

    pub fn dim(&self) -> usize {
        self.n1 + self.n2
    }
}

/// Complex space form of constant holomorphic sectional curvature `4c`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexSpaceFormParams<T: Real> {
    pub complex_dim: usize,
    pub c: T,
}

impl<T: Real> ComplexSpaceFormParams<T> {
    pub fn new(complex_dim: usize, c: T) -> Result<Self> {
        if complex_dim == 0 {
            return Err(Error::InvalidParams(
                "complex dimension must be positive".into(),
            ));
        }
        Ok(Self { complex_dim, c })
    }

    pub fn real_dim(&self) -> usize {
        2 * self.complex_dim
    }
}

/// Which eigenspace of the ambient metallic structure carries `c1`.
///
/// The curvature expansions in terms of `P` group the `c1` terms with
/// `sigma id - P`, which vanishes on the `sigma`-eigenspace. In the product
/// `M^{n1}(c1) x M^{n2}(c2)` with `J = sigma` on the first factor the first
/// factor is the `sigma`-eigenspace, so `c1` must multiply the group built
/// from `(sigma - p) id + P` instead.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FactorPairing {
    /// `c1` multiplies the `sigma id - P` group.
    AsPrinted,
    /// `c1` multiplies the `(sigma - p) id + P` group.
    Swapped,
}

/// The pairing that reproduces the product curvature on the sphere-product example.
pub const FACTOR_PAIRING: FactorPairing = FactorPairing::Swapped;

impl FactorPairing {
    /// Coefficients of the `sigma id - P` group and of the `(sigma - p) id + P` group.
    pub fn coefficients<T: Real>(self, c1: T, c2: T) -> (T, T) {
        match self {
            FactorPairing::AsPrinted => (c1, c2),
            FactorPairing::Swapped => (c2, c1),
        }
    }

    /// Expected ranks of `(sigma id - J)/(2sigma - p)` and `((sigma - p) id + J)/(2sigma - p)`.
    pub fn expected_ranks(self, n1: usize, n2: usize) -> (usize, usize) {
        match self {
            FactorPairing::AsPrinted => (n1, n2),
            FactorPairing::Swapped => (n2, n1),
        }
    }
}

fn block_projection<T: Real>(v: &DVector<T>, start: usize, len: usize) -> DVector<T> {
    let mut out = DVector::zeros(v.len());
    out.rows_mut(start, len).copy_from(&v.rows(start, len));
    out
}

/// Curvature of a product of two space forms on Euclidean coordinates, the
/// first `split` coordinates spanning the first factor.
pub fn product_curvature_split<T: Real>(
    c1: T,
    c2: T,
    split: usize,
    x: &DVector<T>,
    y: &DVector<T>,
    z: &DVector<T>,
) -> DVector<T> {
    let n = x.len();
    let mut out = DVector::zeros(n);
    for (c, start, len) in [(c1, 0, split), (c2, split, n - split)] {
        let (xi, yi, zi) = (
            block_projection(x, start, len),
            block_projection(y, start, len),
            block_projection(z, start, len),
        );
        out += (&xi * yi.dot(&zi) - &yi * xi.dot(&zi)) * c;
    }
    out
}

/// `sum_i c_i [<pi_i Y, pi_i Z> pi_i X - <pi_i X, pi_i Z> pi_i Y]` on `R^{n1+n2}`.
pub fn product_curvature<T: Real>(
    params: &ProductSpaceParams<T>,
    x: &DVector<T>,
    y: &DVector<T>,
    z: &DVector<T>,
) -> Result<DVector<T>> {
    let n = params.dim();
    if x.len() != n || y.len() != n || z.len() != n {
        return Err(Error::dims("product curvature", n, x.len()));
    }
    Ok(product_curvature_split(
        params.c1, params.c2, params.n1, x, y, z,
    ))
}

/// The eight-term expansion of the product curvature in terms of a
/// metallic operator `p_op` (the ambient structure or its tangent block),
/// with the coefficients placed by `pairing`.
#[allow(clippy::too_many_arguments)]
pub fn product_curvature_metallic_with<T: Real>(
    params: &ProductSpaceParams<T>,
    mp: &MetallicParams<T>,
    pairing: FactorPairing,
    p_op: &DMatrix<T>,
    g: &Metric<T>,
    x: &DVector<T>,
    y: &DVector<T>,
    z: &DVector<T>,
) -> DVector<T> {
    let (k1, k2) = pairing.coefficients(params.c1, params.c2);
    let (s, d) = (mp.sigma(), mp.gap());
    let sp = s - mp.p();
    let (px, py) = (p_op * x, p_op * y);
    let yz = g.inner(y, z);
    let xz = g.inner(x, z);
    let pyz = g.inner(&py, z);
    let pxz = g.inner(&px, z);
    let base = x * yz - y * xz;
    let pbase = &px * yz - &py * xz;
    let pp = &px * pyz - &py * pxz;
    let mixed = x * pyz - y * pxz;
    let first = &base * (s * s) - &pbase * s + &pp - &mixed * s;
    let second = &base * (sp * sp) + &pbase * sp + &pp + &mixed * sp;
    (first * k1 + second * k2) / (d * d)
}

/// [`product_curvature_metallic_with`] using [`FACTOR_PAIRING`].
pub fn product_curvature_metallic<T: Real>(
    params: &ProductSpaceParams<T>,
    mp: &MetallicParams<T>,
    p_op: &DMatrix<T>,
    g: &Metric<T>,
    x: &DVector<T>,
    y: &DVector<T>,
    z: &DVector<T>,
) -> DVector<T> {
    product_curvature_metallic_with(params, mp, FACTOR_PAIRING, p_op, g, x, y, z)
}

/// `c[<Y,Z>X - <X,Z>Y + <JY,Z>JX - <JX,Z>JY + 2<X,JY>JZ]`.
pub fn csf_curvature_complex<T: Real>(
    params: &ComplexSpaceFormParams<T>,
    jc: &DMatrix<T>,
    g: &Metric<T>,
    x: &DVector<T>,
    y: &DVector<T>,
    z: &DVector<T>,
) -> DVector<T> {
    let (jx, jy, jz) = (jc * x, jc * y, jc * z);
    let out = x * g.inner(y, z) - y * g.inner(x, z) + &jx * g.inner(&jy, z) - &jy * g.inner(&jx, z)
        + jz * (T::lit(2.0) * g.inner(x, &jy));
    out * params.c
}

/// The seven-group expansion of the complex space form curvature in terms of
/// the complex metallic structure `pt = (delta/2) J - (a/2) id`.
pub fn csf_curvature_metallic<T: Real>(
    params: &ComplexSpaceFormParams<T>,
    cp: &ComplexMetallicParams<T>,
    pt: &DMatrix<T>,
    g: &Metric<T>,
    x: &DVector<T>,
    y: &DVector<T>,
    z: &DVector<T>,
) -> DVector<T> {
    let c = params.c;
    let (a, d2) = (cp.a(), cp.delta() * cp.delta());
    let two = T::lit(2.0);
    let four = T::lit(4.0);
    let (px, py, pz) = (pt * x, pt * y, pt * z);
    let (yz, xz, xy) = (g.inner(y, z), g.inner(x, z), g.inner(x, y));
    let (pyz, pxz, xpy) = (g.inner(&py, z), g.inner(&px, z), g.inner(x, &py));
    let mut out = (x * yz - y * xz) * (c * (T::one() + a * a / d2));
    out += (&px * yz - &py * xz) * (two * a * c / d2);
    out += (x * pyz - y * pxz) * (two * a * c / d2);
    out += (&px * pyz - &py * pxz) * (four * c / d2);
    out += z * (two * c * a * a / d2 * xy);
    out += (&pz * xy + z * xpy) * (four * a * c / d2);
    out += pz * (T::lit(8.0) * c / d2 * xpy);
    out
}

/// Parameters of `E(kappa, tau)` with `tau != 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EktParams<T: Real> {
    kappa: T,
    tau: T,
    sigma_ekt: T,
}

impl<T: Real> EktParams<T> {
    pub fn new(kappa: T, tau: T) -> Result<Self> {
        if tau == T::zero() || !tau.is_finite() {
            return Err(Error::InvalidParams("tau must be nonzero".into()));
        }
        if !kappa.is_finite() {
            return Err(Error::InvalidParams("kappa must be finite".into()));
        }
        Ok(Self {
            kappa,
            tau,
            sigma_ekt: kappa / (T::lit(2.0) * tau),
        })
    }

    pub fn kappa(&self) -> T {
        self.kappa
    }

    pub fn tau(&self) -> T {
        self.tau
    }

    /// `kappa / (2 tau)`.
    pub fn sigma_ekt(&self) -> T {
        self.sigma_ekt
    }

    /// Holomorphic curvature parameter `(kappa - 4 tau^2)/4` of the target complex space form.
    pub fn target_c(&self) -> T {
        (self.kappa - T::lit(4.0) * self.tau * self.tau) / T::lit(4.0)
    }
}

/// Indices of the canonical frame `{e1, e2, xi}` and the covector `eta` dual to `xi`.
#[derive(Debug, Clone, PartialEq)]
pub struct EktFrame<T: Real> {
    pub e1: usize,
    pub e2: usize,
    pub xi: usize,
    pub eta: DVector<T>,
}

impl<T: Real> EktFrame<T> {
    pub fn canonical() -> Self {
        Self {
            e1: 0,
            e2: 1,
            xi: 2,
            eta: DVector::from_vec(vec![T::zero(), T::zero(), T::one()]),
        }
    }

    /// `<X ^ Y, Z> = det(X, Y, Z)` in the canonical frame.
    pub fn wedge(x: &DVector<T>, y: &DVector<T>) -> DVector<T> {
        DVector::from_vec(vec![
            x[1] * y[2] - x[2] * y[1],
            x[2] * y[0] - x[0] * y[2],
            x[0] * y[1] - x[1] * y[0],
        ])
    }
}

/// Levi-Civita connection of a left-invariant orthonormal frame, stored as
/// `gamma[[i, j, k]] = <nabla_{e_i} e_j, e_k>`.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameConnection<T: Real> {
    gamma: Array3<T>,
}

impl<T: Real> FrameConnection<T> {
    pub fn new(gamma: Array3<T>) -> Result<Self> {
        let s = gamma.shape();
        if s[0] != s[1] || s[1] != s[2] {
            return Err(Error::dims(
                "connection coefficients",
                "n x n x n",
                format!("{s:?}"),
            ));
        }
        Ok(Self { gamma })
    }

    pub fn dim(&self) -> usize {
        self.gamma.shape()[0]
    }

    pub fn gamma(&self) -> &Array3<T> {
        &self.gamma
    }

    /// Matrix of `nabla_{e_i}` acting on frame coordinates.
    pub fn omega(&self, i: usize) -> DMatrix<T> {
        let n = self.dim();
        DMatrix::from_fn(n, n, |k, l| self.gamma[[i, l, k]])
    }

    /// `nabla_X Y` for constant-coefficient fields.
    pub fn nabla(&self, x: &DVector<T>, y: &DVector<T>) -> DVector<T> {
        let n = self.dim();
        (0..n).fold(DVector::zeros(n), |acc, i| acc + self.omega(i) * y * x[i])
    }

    /// `[e_i, e_j] = nabla_{e_i} e_j - nabla_{e_j} e_i`.
    pub fn bracket(&self, i: usize, j: usize) -> DVector<T> {
        let n = self.dim();
        DVector::from_fn(n, |k, _| self.gamma[[i, j, k]] - self.gamma[[j, i, k]])
    }

    /// Curvature in the standard convention,
    /// `R(e_i, e_j) = [omega_i, omega_j] - sum_k [e_i, e_j]^k omega_k`.
    pub fn curvature(&self) -> CurvatureTensor<T> {
        let n = self.dim();
        let omegas: Vec<DMatrix<T>> = (0..n).map(|i| self.omega(i)).collect();
        let mats: Vec<Vec<DMatrix<T>>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        let br = self.bracket(i, j);
                        let mut r = &omegas[i] * &omegas[j] - &omegas[j] * &omegas[i];
                        for k in 0..n {
                            r -= &omegas[k] * br[k];
                        }
                        r
                    })
                    .collect()
            })
            .collect();
        CurvatureTensor::from_fn(n, n, CurvatureConvention::Standard, |i, j, k| {
            mats[i][j].column(k).into_owned()
        })
    }
}

/// Christoffel symbols of the canonical frame, `gamma[[i, j, k]] = <nabla_{e_i} e_j, e_k>`.
pub fn ekt_christoffel<T: Real>(params: &EktParams<T>) -> Array3<T> {
    let tau = params.tau();
    let ts = tau - params.sigma_ekt();
    let mut g = Array3::zeros((3, 3, 3));
    g[[0, 1, 2]] = tau;
    g[[1, 2, 0]] = tau;
    g[[1, 0, 2]] = -tau;
    g[[0, 2, 1]] = -tau;
    g[[2, 1, 0]] = ts;
    g[[2, 0, 1]] = -ts;
    g
}

/// Levi-Civita connection of `E(kappa, tau)` in the canonical frame.
pub fn ekt_connection<T: Real>(params: &EktParams<T>) -> FrameConnection<T> {
    FrameConnection {
        gamma: ekt_christoffel(params),
    }
}

/// `nabla_X Y` for constant-coefficient fields in the canonical frame.
pub fn ekt_nabla<T: Real>(
    params: &EktParams<T>,
    x: &DVector<T>,
    y: &DVector<T>,
) -> Result<DVector<T>> {
    if x.len() != 3 || y.len() != 3 {
        return Err(Error::dims("E(kappa,tau) vectors", 3, x.len().max(y.len())));
    }
    Ok(ekt_connection(params).nabla(x, y))
}

/// Curvature of `E(kappa, tau)` in the opposite convention:
/// `(kappa - 3tau^2)(<X,Z>Y - <Y,Z>X) + (kappa - 4tau^2)(<Y,xi><Z,xi>X
/// + <Y,Z><X,xi>xi - <X,xi><Z,xi>Y - <X,Z><Y,xi>xi)`.
pub fn ekt_curvature<T: Real>(
    params: &EktParams<T>,
    x: &DVector<T>,
    y: &DVector<T>,
    z: &DVector<T>,
) -> DVector<T> {
    let k = params.kappa();
    let t2 = params.tau() * params.tau();
    let xi = EktFrame::<T>::canonical().eta;
    let (xx, yx, zx) = (x.dot(&xi), y.dot(&xi), z.dot(&xi));
    let (xz, yz) = (x.dot(z), y.dot(z));
    let first = (y * xz - x * yz) * (k - T::lit(3.0) * t2);
    let second = (x * (yx * zx) + &xi * (yz * xx) - y * (xx * zx) - &xi * (xz * yx))
        * (k - T::lit(4.0) * t2);
    first + second
}

/// [`ekt_curvature`] on every frame triple, tagged with the opposite convention.
pub fn ekt_curvature_tensor<T: Real>(params: &EktParams<T>) -> CurvatureTensor<T> {
    let e = |i: usize| {
        let mut v = DVector::zeros(3);
        v[i] = T::one();
        v
    };
    CurvatureTensor::from_fn(3, 3, CurvatureConvention::Opposite, |i, j, k| {
        ekt_curvature(params, &e(i), &e(j), &e(k))
    })
}

/// The normalised contact tensor `phi` with `phi e1 = e2`, `phi e2 = -e1`, `phi xi = 0`.
pub fn canonical_sasakian<T: Real>(_params: &EktParams<T>) -> OperatorBlock<T> {
    let mut m = DMatrix::zeros(3, 3);
    m[(1, 0)] = T::one();
    m[(0, 1)] = -T::one();
    let g = Metric::euclidean(3);
    OperatorBlock::new(m, g.clone(), g).expect("3x3 operator")
}

/// The endomorphism `X -> nabla_X xi = tau X ^ xi = -tau phi X`.
pub fn ekt_nabla_xi<T: Real>(params: &EktParams<T>) -> DMatrix<T> {
    canonical_sasakian(params).mat() * (-params.tau())
}

//! The product of two round spheres `S^{n1}(c1) x S^{n2}(c2)` inside
//! `R^{n1+1} x R^{n2+1}`, as a point record for two different targets.

use nalgebra::{DMatrix, DVector};
use ndarray::Array3;

use super::random::{orthogonal_complement, rng};
use crate::compat::{PointRecord, Target};
use crate::model_spaces::{product_curvature_split, ProductSpaceParams};
use crate::structures::{MetallicParams, StructureKind, StructureOperator};
use crate::submanifold::{
    array3_from_fn, split_structure, DerivativeData, HypersurfaceData, InducedOperators,
    StructureParams,
};
use crate::tensor::{
    frame_coordinates, BilinearForm, CurvatureConvention, CurvatureTensor, Metric, OperatorBlock,
};
use crate::{Error, Real, Result};

/// A point `(x, y)` on `S^{n1}(c1) x S^{n2}(c2)` with `|x| = 1/sqrt(c1)`, `|y| = 1/sqrt(c2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SphereProductExample<T: Real> {
    /// Sphere dimensions and curvatures.
    pub params: ProductSpaceParams<T>,
    pub x: DVector<T>,
    pub y: DVector<T>,
    pub mp: MetallicParams<T>,
    /// When set, the tangent frame is mixed by a seeded invertible matrix so
    /// the record is expressed in a non-orthonormal frame.
    pub frame_seed: Option<u64>,
}

impl<T: Real> SphereProductExample<T> {
    /// The example at `(r1, 0, .., 0, r2, 0, .., 0)`.
    pub fn new(n1: usize, n2: usize, c1: T, c2: T, mp: MetallicParams<T>) -> Result<Self> {
        if !(c1 > T::zero() && c2 > T::zero()) {
            return Err(Error::InvalidParams(
                "sphere curvatures must be positive".into(),
            ));
        }
        let params = ProductSpaceParams::new(n1, n2, c1, c2)?;
        let mut x = DVector::zeros(n1 + 1);
        let mut y = DVector::zeros(n2 + 1);
        x[0] = T::one() / c1.sqrt();
        y[0] = T::one() / c2.sqrt();
        Ok(Self {
            params,
            x,
            y,
            mp,
            frame_seed: None,
        })
    }

    /// Moves the point; both pieces must lie on their spheres to `1e-12`.
    pub fn with_point(mut self, x: DVector<T>, y: DVector<T>) -> Result<Self> {
        if x.len() != self.params.n1 + 1 || y.len() != self.params.n2 + 1 {
            return Err(Error::dims(
                "sphere point",
                format!("{} + {}", self.params.n1 + 1, self.params.n2 + 1),
                format!("{} + {}", x.len(), y.len()),
            ));
        }
        let off = |v: &DVector<T>, r: T| (v.norm() - r).abs() / r;
        if off(&x, self.r1()) > T::lit(1e-12) || off(&y, self.r2()) > T::lit(1e-12) {
            return Err(Error::Precondition(
                "point is not on the product of spheres".into(),
            ));
        }
        self.x = x;
        self.y = y;
        Ok(self)
    }

    pub fn with_frame_seed(mut self, seed: u64) -> Self {
        self.frame_seed = Some(seed);
        self
    }

    pub fn r1(&self) -> T {
        T::one() / self.params.c1.sqrt()
    }

    pub fn r2(&self) -> T {
        T::one() / self.params.c2.sqrt()
    }

    fn split(&self) -> usize {
        self.params.n1 + 1
    }

    pub fn ambient_dim(&self) -> usize {
        self.params.n1 + self.params.n2 + 2
    }

    /// `N1 = (x, 0)/r1`.
    pub fn n1_vec(&self) -> DVector<T> {
        let mut v = DVector::zeros(self.ambient_dim());
        v.rows_mut(0, self.split())
            .copy_from(&(&self.x / self.r1()));
        v
    }

    /// `N2 = (0, y)/r2`.
    pub fn n2_vec(&self) -> DVector<T> {
        let mut v = DVector::zeros(self.ambient_dim());
        v.rows_mut(self.split(), self.params.n2 + 1)
            .copy_from(&(&self.y / self.r2()));
        v
    }

    /// `sigma` on the first block, `p - sigma` on the second.
    pub fn ambient_structure(&self) -> DMatrix<T> {
        let k = self.split();
        DMatrix::from_diagonal(&DVector::from_fn(self.ambient_dim(), |i, _| {
            if i < k {
                self.mp.sigma()
            } else {
                self.mp.conjugate()
            }
        }))
    }

    /// Tangent frame as ambient columns: orthonormal complements of `x` and
    /// `y` in their blocks, optionally mixed by the seeded frame change.
    pub fn tangent_frame(&self) -> DMatrix<T> {
        let (n1, n2) = (self.params.n1, self.params.n2);
        let big = self.ambient_dim();
        let cx = orthogonal_complement(&DMatrix::from_columns(std::slice::from_ref(&self.x)));
        let cy = orthogonal_complement(&DMatrix::from_columns(std::slice::from_ref(&self.y)));
        let mut t = DMatrix::zeros(big, n1 + n2);
        t.view_mut((0, 0), (n1 + 1, n1)).copy_from(&cx);
        t.view_mut((n1 + 1, n1), (n2 + 1, n2)).copy_from(&cy);
        match self.frame_seed {
            None => t,
            Some(seed) => {
                let n = n1 + n2;
                let g = super::random::gaussian_matrix::<T>(n, n, rng_seed(seed));
                t * (DMatrix::<T>::identity(n, n) + g * T::lit(0.2))
            }
        }
    }

    fn structure(&self) -> Result<StructureOperator<T>> {
        let big = self.ambient_dim();
        StructureOperator::new(
            OperatorBlock::new(
                self.ambient_structure(),
                Metric::euclidean(big),
                Metric::euclidean(big),
            )?,
            StructureKind::Metallic(self.mp),
        )
    }

    /// Intrinsic curvature of the product in the given tangent frame.
    pub fn intrinsic_curvature(&self, tangent: &DMatrix<T>) -> CurvatureTensor<T> {
        let n = tangent.ncols();
        let (c1, c2, k) = (self.params.c1, self.params.c2, self.split());
        CurvatureTensor::from_fn(n, n, CurvatureConvention::Standard, |i, j, l| {
            let v = product_curvature_split(
                c1,
                c2,
                k,
                &tangent.column(i).into_owned(),
                &tangent.column(j).into_owned(),
                &tangent.column(l).into_owned(),
            );
            frame_coordinates(tangent, &v)
        })
    }

    /// `D_X N1` and `D_X N2` as linear maps of ambient `X`.
    fn normal_derivatives(&self) -> Vec<(DVector<T>, DMatrix<T>)> {
        let big = self.ambient_dim();
        let k = self.split();
        let l1 = DMatrix::from_diagonal(&DVector::from_fn(big, |i, _| {
            if i < k {
                T::one() / self.r1()
            } else {
                T::zero()
            }
        }));
        let l2 = DMatrix::from_diagonal(&DVector::from_fn(big, |i, _| {
            if i >= k {
                T::one() / self.r2()
            } else {
                T::zero()
            }
        }));
        vec![(self.n1_vec(), l1), (self.n2_vec(), l2)]
    }
}

fn rng_seed(seed: u64) -> u64 {
    use rand::RngCore;
    rng(seed).next_u64()
}

/// Derivatives of the blocks `Pi_U J Pi_V` of a parallel ambient structure on
/// Euclidean space along a submanifold whose unit normals `N_a` satisfy
/// `D_X N_a = L_a X`, with the block of `E` spanned by the orthonormal
/// columns of `normal` (a subspace of the span of the `N_a`).
///
/// Returns `(nablaP, nablaQ, nablaR, nablaS)` in frame coordinates.
pub fn flat_trick_derivatives<T: Real>(
    j: &DMatrix<T>,
    tangent: &DMatrix<T>,
    normal: &DMatrix<T>,
    sphere_normals: &[(DVector<T>, DMatrix<T>)],
) -> (Array3<T>, Array3<T>, Array3<T>, Array3<T>) {
    let big = j.nrows();
    let (n, m) = (tangent.ncols(), normal.ncols());
    let mut pi_n_all = DMatrix::<T>::zeros(big, big);
    for (nv, _) in sphere_normals {
        pi_n_all += nv * nv.transpose();
    }
    let pi_t = DMatrix::<T>::identity(big, big) - &pi_n_all;
    let pi_e = normal * normal.transpose();
    let d_pi = |x: &DVector<T>| -> (DMatrix<T>, DMatrix<T>) {
        let mut d_all = DMatrix::zeros(big, big);
        for (nv, l) in sphere_normals {
            let dn = l * x;
            d_all += &dn * nv.transpose() + nv * dn.transpose();
        }
        let mut d_e = DMatrix::zeros(big, big);
        for b in 0..m {
            let nu = normal.column(b).into_owned();
            let dnu = sphere_normals
                .iter()
                .fold(DVector::zeros(big), |acc, (nv, l)| {
                    acc + l * x * nv.dot(&nu)
                });
            d_e += &dnu * nu.transpose() + &nu * dnu.transpose();
        }
        (-d_all, d_e)
    };
    let block =
        |pu: &DMatrix<T>, dpu: &DMatrix<T>, pv: &DMatrix<T>, dpv: &DMatrix<T>| -> DMatrix<T> {
            pu * (dpu * j * pv + pu * j * dpv)
        };
    let derivs: Vec<[DMatrix<T>; 4]> = (0..n)
        .map(|i| {
            let (dt, de) = d_pi(&tangent.column(i).into_owned());
            [
                block(&pi_t, &dt, &pi_t, &dt),
                block(&pi_e, &de, &pi_t, &dt),
                block(&pi_t, &dt, &pi_e, &de),
                block(&pi_e, &de, &pi_e, &de),
            ]
        })
        .collect();
    let col = |f: &DMatrix<T>, k: usize| f.column(k).into_owned();
    let nabla_p = array3_from_fn(n, n, n, |i, k| {
        frame_coordinates(tangent, &(&derivs[i][0] * col(tangent, k)))
    });
    let nabla_q = array3_from_fn(n, n, m, |i, k| {
        frame_coordinates(normal, &(&derivs[i][1] * col(tangent, k)))
    });
    let nabla_r = array3_from_fn(n, m, n, |i, a| {
        frame_coordinates(tangent, &(&derivs[i][2] * col(normal, a)))
    });
    let nabla_s = array3_from_fn(n, m, m, |i, a| {
        frame_coordinates(normal, &(&derivs[i][3] * col(normal, a)))
    });
    (nabla_p, nabla_q, nabla_r, nabla_s)
}

/// Totally geodesic immersion into `S^{n1+1}(c1) x S^{n2+1}(c2)` with normal
/// bundle spanned by `N1, N2`, `B = 0` and flat normal connection.
pub fn build_sphere_product<T: Real>(ex: &SphereProductExample<T>) -> Result<PointRecord<T>> {
    let ex = ex.clone().with_point(ex.x.clone(), ex.y.clone())?;
    let tangent = ex.tangent_frame();
    let normal = DMatrix::from_columns(&[ex.n1_vec(), ex.n2_vec()]);
    let big = ex.ambient_dim();
    let ops = split_structure(&ex.structure()?, &tangent, &normal, &Metric::euclidean(big))?;
    let n = tangent.ncols();
    let (nabla_p, nabla_q, nabla_r, nabla_s) = flat_trick_derivatives(
        &ex.ambient_structure(),
        &tangent,
        &normal,
        &ex.normal_derivatives(),
    );
    let der = DerivativeData {
        nabla_p,
        nabla_q,
        nabla_r,
        nabla_s,
        ..DerivativeData::zeros(n, 2)
    };
    let target = ProductSpaceParams::new(
        ex.params.n1 + 1,
        ex.params.n2 + 1,
        ex.params.c1,
        ex.params.c2,
    )?;
    PointRecord::new(
        ops,
        der,
        ex.intrinsic_curvature(&tangent),
        Target::Product(target),
    )
}

/// Hypersurface immersion into `S^{n1}(c1) x R^{n2+1}` with unit normal
/// `nu = -N2`, `V = 0`, `f = p - sigma` and `A = sqrt(c2) (sigma - P)/(2sigma - p)`.
pub fn build_sphere_product_hypersurface<T: Real>(
    ex: &SphereProductExample<T>,
) -> Result<(HypersurfaceData<T>, PointRecord<T>)> {
    let ex = ex.clone().with_point(ex.x.clone(), ex.y.clone())?;
    let tangent = ex.tangent_frame();
    let nu = -ex.n2_vec();
    let big = ex.ambient_dim();
    let full = split_structure(
        &ex.structure()?,
        &tangent,
        &DMatrix::from_columns(&[nu.clone(), ex.n1_vec()]),
        &Metric::euclidean(big),
    )?;
    let n = tangent.ncols();
    let ge = Metric::euclidean(1);
    let ops = InducedOperators::from_matrices(
        full.p().mat().clone(),
        full.q().mat().rows(0, 1).into_owned(),
        full.r().mat().columns(0, 1).into_owned(),
        full.s().mat().view((0, 0), (1, 1)).into_owned(),
        full.g().clone(),
        ge,
        StructureParams::Metallic(ex.mp),
    )?;
    let (mp, d) = (ex.mp, ex.mp.gap());
    let a = (DMatrix::<T>::identity(n, n) * mp.sigma() - ops.p().mat()) * (ex.params.c2.sqrt() / d);
    let ga = ops.g().gram() * &a;
    let b = BilinearForm::from_fn(n, 1, |i, j| DVector::from_element(1, ga[(j, i)]));
    let normal = DMatrix::from_columns(&[nu]);
    let (nabla_p, nabla_q, nabla_r, nabla_s) = flat_trick_derivatives(
        &ex.ambient_structure(),
        &tangent,
        &normal,
        &ex.normal_derivatives(),
    );
    let der = DerivativeData {
        nabla_p,
        nabla_q,
        nabla_r,
        nabla_s,
        b,
        shape: vec![a],
        ..DerivativeData::zeros(n, 1)
    };
    let target = ProductSpaceParams::new(ex.params.n1, ex.params.n2 + 1, ex.params.c1, T::zero())?;
    let rec = PointRecord::new(
        ops,
        der,
        ex.intrinsic_curvature(&tangent),
        Target::Product(target),
    )?;
    let h = HypersurfaceData::from_point_data(&rec.ops, &rec.der)?;
    Ok((h, rec))
}

/// Hyperspherical chart of `S^{n1}(c1) x S^{n2}(c2)` on angle parameters,
/// first `n1` angles for the first factor.
pub fn sphere_product_chart<T: Real>(
    n1: usize,
    n2: usize,
    c1: T,
    c2: T,
) -> impl Fn(&DVector<T>) -> DVector<T> + Sync {
    let sphere = |angles: &[T], r: T| -> Vec<T> {
        let mut out = Vec::with_capacity(angles.len() + 1);
        let mut prod = r;
        for &a in angles {
            out.push(prod * a.cos());
            prod *= a.sin();
        }
        out.push(prod);
        out
    };
    move |u: &DVector<T>| {
        let mut v = sphere(&u.as_slice()[..n1], T::one() / c1.sqrt());
        v.extend(sphere(&u.as_slice()[n1..n1 + n2], T::one() / c2.sqrt()));
        DVector::from_vec(v)
    }
}

//! Finite-difference Levi-Civita connection and curvature of a parametrised
//! submanifold of Euclidean space.

use nalgebra::{DMatrix, DVector};
use ndarray::Array3;
use rayon::prelude::*;

use crate::tensor::{CurvatureConvention, CurvatureTensor, Metric};
use crate::{Error, Real, Result};

/// Five-point central difference of `f` along coordinate `k`.
fn d5<T: Real>(
    f: &(dyn Fn(&DVector<T>) -> DVector<T> + Sync),
    u: &DVector<T>,
    k: usize,
    h: T,
) -> DVector<T> {
    let shifted = |s: T| {
        let mut w = u.clone();
        w[k] += s * h;
        f(&w)
    };
    let (two, eight, twelve) = (T::lit(2.0), T::lit(8.0), T::lit(12.0));
    (shifted(-two) - shifted(two) + (shifted(T::one()) - shifted(-T::one())) * eight) / (twelve * h)
}

fn jacobian<T: Real>(
    chart: &(dyn Fn(&DVector<T>) -> DVector<T> + Sync),
    u: &DVector<T>,
    h: T,
) -> DMatrix<T> {
    let cols: Vec<DVector<T>> = (0..u.len()).map(|k| d5(chart, u, k, h)).collect();
    DMatrix::from_columns(&cols)
}

/// Christoffel symbols `gamma[[i, j, k]] = Gamma^k_ij` and the curvature
/// (standard convention, `R(d_i, d_j) d_k` in coordinates) of the metric
/// induced by `chart` at `point`, from nested five-point differences with step `h`.
pub fn fd_connection_oracle<T, F>(
    chart: &F,
    point: &DVector<T>,
    h: T,
) -> Result<(Array3<T>, CurvatureTensor<T>)>
where
    T: Real,
    F: Fn(&DVector<T>) -> DVector<T> + Sync,
{
    if !(h >= T::lit(1e-6) && h <= T::lit(1e-3)) {
        return Err(Error::InvalidParams(format!(
            "step must lie in [1e-6, 1e-3], got {h}"
        )));
    }
    let n = point.len();
    let chart_dyn: &(dyn Fn(&DVector<T>) -> DVector<T> + Sync) = chart;
    let metric_flat = move |u: &DVector<T>| -> DVector<T> {
        let j = jacobian(chart_dyn, u, h);
        let g = j.transpose() * j;
        DVector::from_iterator(n * n, g.iter().copied())
    };
    let base = metric_flat(point);
    Metric::new(DMatrix::from_column_slice(n, n, base.as_slice()))?;
    let gamma_flat = move |u: &DVector<T>| -> DVector<T> {
        let g = DMatrix::from_column_slice(n, n, metric_flat(u).as_slice());
        let ginv = g
            .clone()
            .try_inverse()
            .unwrap_or_else(|| DMatrix::from_element(n, n, T::nan()));
        let dg: Vec<DMatrix<T>> = (0..n)
            .map(|k| DMatrix::from_column_slice(n, n, d5(&metric_flat, u, k, h).as_slice()))
            .collect();
        let mut out = DVector::zeros(n * n * n);
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let mut acc = T::zero();
                    for l in 0..n {
                        acc += ginv[(k, l)] * (dg[i][(j, l)] + dg[j][(i, l)] - dg[l][(i, j)]);
                    }
                    out[(i * n + j) * n + k] = acc / T::lit(2.0);
                }
            }
        }
        out
    };
    let gamma = gamma_flat(point);
    let dgamma: Vec<DVector<T>> = (0..n)
        .into_par_iter()
        .map(|l| d5(&gamma_flat, point, l, h))
        .collect();
    let at = |v: &DVector<T>, i: usize, j: usize, k: usize| v[(i * n + j) * n + k];
    let christoffel = Array3::from_shape_fn((n, n, n), |(i, j, k)| at(&gamma, i, j, k));
    let curvature = CurvatureTensor::from_fn(n, n, CurvatureConvention::Standard, |i, j, k| {
        DVector::from_fn(n, |l, _| {
            let mut r = at(&dgamma[i], j, k, l) - at(&dgamma[j], i, k, l);
            for m in 0..n {
                r += at(&gamma, j, k, m) * at(&gamma, i, m, l)
                    - at(&gamma, i, k, m) * at(&gamma, j, m, l);
            }
            r
        })
    });
    Ok((christoffel, curvature))
}

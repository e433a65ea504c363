//! Seeded random instances for tests and sweeps.
//!
//! Every generator draws from a ChaCha stream keyed by the seed, so a fixed
//! seed reproduces bit-identical output.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::structures::{ComplexMetallicParams, MetallicParams, StructureKind, StructureOperator};
use crate::submanifold::{split_structure, HypersurfaceData, InducedOperators, StructureParams};
use crate::tensor::{BilinearForm, Metric, OperatorBlock};
use crate::{Error, Real, Result};

/// Environment variable that fixes the seed of every randomised run.
pub const SEED_ENV: &str = "METALLIC_GEO_SEED";

/// Seed from [`SEED_ENV`], or `default` when unset or unparsable.
pub fn seed_from_env(default: u64) -> u64 {
    std::env::var(SEED_ENV)
        .ok()
        .and_then(|s| s.trim().parse().ok())
        .unwrap_or(default)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn normal_matrix<T: Real>(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DMatrix<T> {
    DMatrix::from_fn(rows, cols, |_, _| {
        T::lit(rng.sample::<f64, _>(StandardNormal))
    })
}

/// Matrix with independent standard normal entries.
pub fn gaussian_matrix<T: Real>(rows: usize, cols: usize, seed: u64) -> DMatrix<T> {
    normal_matrix(&mut rng(seed), rows, cols)
}

fn orthogonal_from<T: Real>(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<T> {
    if n == 0 {
        return DMatrix::zeros(0, 0);
    }
    let qr = normal_matrix::<T>(rng, n, n).qr();
    let (mut q, r) = (qr.q(), qr.r());
    for k in 0..n {
        if r[(k, k)] < T::zero() {
            q.column_mut(k).neg_mut();
        }
    }
    q
}

/// Haar-distributed orthogonal matrix.
pub fn random_orthogonal<T: Real>(n: usize, seed: u64) -> DMatrix<T> {
    orthogonal_from(&mut rng(seed), n)
}

/// Random symmetric positive definite Gram matrix with eigenvalues in `[0.5, 2.5]`.
pub fn random_metric<T: Real>(n: usize, seed: u64) -> Metric<T> {
    let mut r = rng(seed);
    let o = orthogonal_from::<T>(&mut r, n);
    let d = DVector::from_fn(n, |_, _| T::lit(r.random_range(0.5..2.5)));
    let gram = &o * DMatrix::from_diagonal(&d) * o.transpose();
    Metric::new((&gram + gram.transpose()) * T::lit(0.5))
        .expect("positive definite by construction")
}

fn standard_complex<T: Real>(n: usize) -> DMatrix<T> {
    let mut j = DMatrix::zeros(n, n);
    for k in (0..n).step_by(2) {
        j[(k + 1, k)] = T::one();
        j[(k, k + 1)] = -T::one();
    }
    j
}

fn complex_from<T: Real>(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<T> {
    let o = orthogonal_from::<T>(rng, n);
    &o * standard_complex::<T>(n) * o.transpose()
}

/// Euclidean-orthogonal complex structure on `R^n`; `n` must be even.
pub fn orthogonal_complex_structure<T: Real>(n: usize, seed: u64) -> DMatrix<T> {
    assert!(
        n.is_multiple_of(2),
        "complex structures need even dimension"
    );
    complex_from(&mut rng(seed), n)
}

/// Upper triangular matrix with diagonal in `[0.6, 1.4]` and small off-diagonal entries.
fn frame_change<T: Real>(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<T> {
    DMatrix::from_fn(n, n, |i, j| match i.cmp(&j) {
        std::cmp::Ordering::Equal => T::lit(rng.random_range(0.6..1.4)),
        std::cmp::Ordering::Less => T::lit(0.3 * rng.sample::<f64, _>(StandardNormal)),
        std::cmp::Ordering::Greater => T::zero(),
    })
}

/// Splits `j` along a random orthogonal `(n, m)` decomposition of `R^{n+m}`,
/// using non-orthonormal frames of both pieces.
fn random_split<T: Real>(
    rng: &mut ChaCha8Rng,
    j: StructureOperator<T>,
    n: usize,
    m: usize,
) -> Result<InducedOperators<T>> {
    let u = orthogonal_from::<T>(rng, n + m);
    let tangent = u.columns(0, n) * frame_change::<T>(rng, n);
    let normal = u.columns(n, m) * frame_change::<T>(rng, m);
    split_structure(&j, &tangent, &normal, &Metric::euclidean(n + m))
}

fn random_involution<T: Real>(rng: &mut ChaCha8Rng, dim: usize) -> DMatrix<T> {
    let plus = rng.random_range(0..=dim);
    let o = orthogonal_from::<T>(rng, dim);
    let d = DVector::from_fn(dim, |k, _| if k < plus { T::one() } else { -T::one() });
    &o * DMatrix::from_diagonal(&d) * o.transpose()
}

/// `J = (p/2) id + ((2sigma - p)/2) F` for a random orthogonal involution `F`,
/// split along a random decomposition.
pub fn random_metallic_instance<T: Real>(
    dims: (usize, usize),
    mp: MetallicParams<T>,
    seed: u64,
) -> InducedOperators<T> {
    let (n, m) = dims;
    let mut r = rng(seed);
    let f = random_involution::<T>(&mut r, n + m);
    let j = metallic_from_involution(&f, &mp);
    let s = StructureOperator::new_unchecked(
        OperatorBlock::new(j, Metric::euclidean(n + m), Metric::euclidean(n + m)).expect("square"),
        StructureKind::Metallic(mp),
    )
    .expect("structure");
    random_split(&mut r, s, n, m).expect("generic frames split")
}

/// `U^{-1} m U` for the Cholesky factor `g = U^T U`: turns a Euclidean
/// self-adjoint (or skew-adjoint) matrix into a `g`-self-adjoint (or skew-adjoint) one.
fn conjugate_to_metric<T: Real>(m: &DMatrix<T>, g: &Metric<T>) -> DMatrix<T> {
    let u = g
        .gram()
        .clone()
        .cholesky()
        .expect("metric is positive definite")
        .l()
        .transpose();
    let u_inv = u
        .clone()
        .try_inverse()
        .expect("triangular factor is invertible");
    u_inv * m * u
}

/// Metallic structure on `R^n`, self-adjoint for a random metric, together with that metric.
pub fn random_metallic_structure<T: Real>(
    n: usize,
    mp: MetallicParams<T>,
    seed: u64,
) -> (StructureOperator<T>, Metric<T>) {
    let mut r = rng(seed);
    let g = random_metric::<T>(n, r.random());
    let j = conjugate_to_metric(
        &metallic_from_involution(&random_involution::<T>(&mut r, n), &mp),
        &g,
    );
    let op = OperatorBlock::new(j, g.clone(), g.clone()).expect("square");
    (
        StructureOperator::new_unchecked(op, StructureKind::Metallic(mp)).expect("endomorphism"),
        g,
    )
}

/// Complex metallic structure on `R^n` (`n` even), compatible with a random metric,
/// together with that metric.
pub fn random_cms_structure<T: Real>(
    n: usize,
    cp: ComplexMetallicParams<T>,
    seed: u64,
) -> Result<(StructureOperator<T>, Metric<T>)> {
    if n % 2 == 1 {
        return Err(Error::InvalidParams(format!(
            "complex metallic structures need even dimension, got {n}"
        )));
    }
    let mut r = rng(seed);
    let g = random_metric::<T>(n, r.random());
    let j = conjugate_to_metric(&cms_from_complex(&complex_from::<T>(&mut r, n), &cp), &g);
    let op = OperatorBlock::new(j, g.clone(), g.clone())?;
    Ok((
        StructureOperator::new_unchecked(op, StructureKind::ComplexMetallic(cp))?,
        g,
    ))
}

/// `(p/2) id + ((2sigma - p)/2) F`.
pub fn metallic_from_involution<T: Real>(f: &DMatrix<T>, mp: &MetallicParams<T>) -> DMatrix<T> {
    let n = f.nrows();
    DMatrix::<T>::identity(n, n) * (mp.p() / T::lit(2.0)) + f * (mp.gap() / T::lit(2.0))
}

/// `-(a/2) id + (delta/2) Jc` for a complex structure `Jc`.
pub fn cms_from_complex<T: Real>(jc: &DMatrix<T>, cp: &ComplexMetallicParams<T>) -> DMatrix<T> {
    let n = jc.nrows();
    DMatrix::<T>::identity(n, n) * (-cp.a() / T::lit(2.0)) + jc * (cp.delta() / T::lit(2.0))
}

/// Complex metallic analogue of [`random_metallic_instance`].
pub fn random_cms_instance<T: Real>(
    dims: (usize, usize),
    cp: ComplexMetallicParams<T>,
    seed: u64,
) -> Result<InducedOperators<T>> {
    let (n, m) = dims;
    if (n + m) % 2 == 1 {
        return Err(Error::InvalidParams(format!(
            "complex metallic structures need even dimension, got {}",
            n + m
        )));
    }
    let mut r = rng(seed);
    let jc = complex_from::<T>(&mut r, n + m);
    let j = cms_from_complex(&jc, &cp);
    let s = StructureOperator::new_unchecked(
        OperatorBlock::new(j, Metric::euclidean(n + m), Metric::euclidean(n + m))?,
        StructureKind::ComplexMetallic(cp),
    )?;
    random_split(&mut r, s, n, m)
}

/// Orthonormal basis (as columns) of the orthogonal complement of the columns of `a`.
pub fn orthogonal_complement<T: Real>(a: &DMatrix<T>) -> DMatrix<T> {
    let (big, k) = a.shape();
    let mut basis: Vec<DVector<T>> = Vec::new();
    let mut span: Vec<DVector<T>> = Vec::new();
    let candidates = a
        .column_iter()
        .map(|c| c.into_owned())
        .chain((0..big).map(|i| {
            let mut e = DVector::zeros(big);
            e[i] = T::one();
            e
        }));
    for (idx, mut v) in candidates.enumerate() {
        for _ in 0..2 {
            for u in &span {
                let c = u.dot(&v);
                v -= u * c;
            }
        }
        let norm = v.norm();
        if norm > T::lit(1e-8) {
            let u = v / norm;
            if idx >= k {
                basis.push(u.clone());
            }
            span.push(u);
        }
        if span.len() == big {
            break;
        }
    }
    DMatrix::from_columns(&basis)
}

/// Invariant even-dimensional submanifold of a complex metallic `R^{n+m}`
/// with a second fundamental form projected onto `B(X, PY) = S B(X, Y)`.
pub fn random_invariant_cms_instance<T: Real>(
    dims: (usize, usize),
    cp: ComplexMetallicParams<T>,
    seed: u64,
) -> Result<(InducedOperators<T>, BilinearForm<T>)> {
    let (n, m) = dims;
    if n % 2 == 1 || m % 2 == 1 {
        return Err(Error::InvalidParams(format!(
            "invariant instances need even tangent and normal dimensions, got ({n}, {m})"
        )));
    }
    let mut r = rng(seed);
    let p = cms_from_complex(&complex_from::<T>(&mut r, n), &cp);
    let s = cms_from_complex(&complex_from::<T>(&mut r, m), &cp);
    let ops = InducedOperators::from_matrices(
        p.clone(),
        DMatrix::zeros(m, n),
        DMatrix::zeros(n, m),
        s.clone(),
        Metric::euclidean(n),
        Metric::euclidean(m),
        StructureParams::ComplexMetallic(cp),
    )?;
    let raw = BilinearForm::from_fn(n, m, |_, _| DVector::zeros(m));
    let mut coeffs = raw.coeffs().clone();
    for i in 0..n {
        for j in i..n {
            for a in 0..m {
                let x = T::lit(r.sample::<f64, _>(StandardNormal));
                coeffs[[i, j, a]] = x;
                coeffs[[j, i, a]] = x;
            }
        }
    }
    let b = project_invariant_form(&coeffs, &p, &s);
    Ok((ops, BilinearForm::new_unchecked(b)?))
}

/// Orthogonal projection of a symmetric form onto `{B : B(X, PY) = S B(X, Y)}`.
fn project_invariant_form<T: Real>(
    b: &ndarray::Array3<T>,
    p: &DMatrix<T>,
    s: &DMatrix<T>,
) -> ndarray::Array3<T> {
    let (n, m) = (p.nrows(), s.nrows());
    let idx = |i: usize, j: usize, a: usize| (i * n + j) * m + a;
    let len = n * n * m;
    // Rows: symmetry constraints, then the invariance constraints.
    let mut rows: Vec<DVector<T>> = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            for a in 0..m {
                let mut row = DVector::zeros(len);
                row[idx(i, j, a)] = T::one();
                row[idx(j, i, a)] = -T::one();
                rows.push(row);
            }
        }
    }
    for i in 0..n {
        for k in 0..n {
            for a in 0..m {
                let mut row = DVector::zeros(len);
                for j in 0..n {
                    row[idx(i, j, a)] += p[(j, k)];
                }
                for c in 0..m {
                    row[idx(i, k, c)] -= s[(a, c)];
                }
                rows.push(row);
            }
        }
    }
    let c = DMatrix::from_rows(&rows.iter().map(|r| r.transpose()).collect::<Vec<_>>());
    let v = DVector::from_iterator(
        len,
        (0..n)
            .flat_map(|i| (0..n).flat_map(move |j| (0..m).map(move |a| (i, j, a))))
            .map(|(i, j, a)| b[[i, j, a]]),
    );
    // Null space of C from the eigenvectors of C^T C with negligible eigenvalues.
    let eig = (c.transpose() * &c).symmetric_eigen();
    let cutoff = eig.eigenvalues.amax().max(T::one()) * T::lit(1e-10);
    let mut projected = DVector::zeros(len);
    for k in 0..len {
        if eig.eigenvalues[k].abs() <= cutoff {
            let u = eig.eigenvectors.column(k);
            projected += u * u.dot(&v);
        }
    }
    ndarray::Array3::from_shape_fn((n, n, m), |(i, j, a)| projected[idx(i, j, a)])
}

/// Which hypersurface configuration [`random_hypersurface`] builds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HypersurfaceKind {
    /// `J V` normal, equivalently `f = p`.
    JvNormal,
    /// `J nu` tangent, equivalently `f = 0`.
    JnuTangent,
}

/// Hypersurface data of a metallic `R^{n+1}` satisfying every hypersurface
/// relation: unit normal with prescribed `f`, a symmetric `A` with `A V = 0`,
/// `nabla V = (f - P) A` and `(nabla_X P) Y = <Y, V> A X + <A X, Y> V`.
pub fn random_hypersurface<T: Real>(
    n: usize,
    mp: MetallicParams<T>,
    kind: HypersurfaceKind,
    seed: u64,
) -> HypersurfaceData<T> {
    let mut r = rng(seed);
    let big = n + 1;
    let f_amb = random_involution_with_both_signs::<T>(&mut r, big);
    let j = metallic_from_involution(&f_amb, &mp);
    let target_f = match kind {
        HypersurfaceKind::JvNormal => mp.p(),
        HypersurfaceKind::JnuTangent => T::zero(),
    };
    // <F nu, nu> = cos(2 alpha) must equal (2 f - p)/(2 sigma - p).
    let cos2a = (T::lit(2.0) * target_f - mp.p()) / mp.gap();
    let alpha = cos2a.acos() / T::lit(2.0);
    let eig = f_amb.clone().symmetric_eigen();
    let pick = |sign: T, r: &mut ChaCha8Rng| -> DVector<T> {
        let cols: Vec<usize> = (0..big)
            .filter(|&k| (eig.eigenvalues[k] - sign).abs() < T::lit(1e-6))
            .collect();
        let mut v = DVector::zeros(big);
        for &k in &cols {
            v += eig.eigenvectors.column(k) * T::lit(r.sample::<f64, _>(StandardNormal));
        }
        let norm = v.norm();
        v / norm
    };
    let nu = pick(T::one(), &mut r) * alpha.cos() + pick(-T::one(), &mut r) * alpha.sin();
    let tangent = orthogonal_complement(&DMatrix::from_columns(std::slice::from_ref(&nu)));
    let g = Metric::euclidean(n);
    let p = tangent.transpose() * &j * &tangent;
    let v = tangent.transpose() * (&j * &nu);
    let f = nu.dot(&(&j * &nu));
    let a0 = normal_matrix::<T>(&mut r, n, n);
    let proj = DMatrix::<T>::identity(n, n) - &v * v.transpose() / v.norm_squared();
    let a = &proj * (&a0 + a0.transpose()) * &proj * T::lit(0.5);
    let nabla_v = (DMatrix::<T>::identity(n, n) * f - &p) * &a;
    let nabla_p =
        crate::submanifold::array3_from_fn(n, n, n, |i, k| a.column(i) * v[k] + &v * a[(i, k)]);
    HypersurfaceData {
        p: OperatorBlock::new(p, g.clone(), g.clone()).expect("square"),
        v,
        f,
        a: OperatorBlock::new(a, g.clone(), g.clone()).expect("square"),
        nabla_p,
        nabla_v: OperatorBlock::new(nabla_v, g.clone(), g).expect("square"),
        df: DVector::zeros(n),
    }
}

fn random_involution_with_both_signs<T: Real>(rng: &mut ChaCha8Rng, dim: usize) -> DMatrix<T> {
    let plus = rng.random_range(1..dim.max(2));
    let o = orthogonal_from::<T>(rng, dim);
    let d = DVector::from_fn(dim, |k, _| if k < plus { T::one() } else { -T::one() });
    &o * DMatrix::from_diagonal(&d) * o.transpose()
}

//! JSON dataset of point records.
//!
//! Every tensor is stored as `{"shape": [...], "data": nested arrays}` in
//! row-major order. Scalars are written as decimal strings with 17
//! significant digits so that an export followed by an import reproduces
//! every `f64` bit for bit. On input, plain JSON numbers are accepted too.

use metallic_core::compat::{PointRecord, Target};
use metallic_core::model_spaces::{ComplexSpaceFormParams, ProductSpaceParams};
use metallic_core::structures::{ComplexMetallicParams, MetallicParams};
use metallic_core::submanifold::{DerivativeData, InducedOperators, StructureParams};
use metallic_core::tensor::{BilinearForm, CurvatureConvention, CurvatureTensor, Metric};
use nalgebra as na;
use ndarray::{Array3, Array4};
use serde_json::{json, Map, Value};
use thiserror::Error;

/// Dataset format version written by [`to_json`] and accepted by [`from_json`].
pub const FORMAT_VERSION: &str = "1";

/// Parse or schema error, located by line (syntax) or field path (schema).
#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("invalid JSON at line {line}, column {column}: {msg}")]
    Syntax {
        line: usize,
        column: usize,
        msg: String,
    },
    #[error("{path}: {msg}")]
    Schema { path: String, msg: String },
}

fn schema(path: &str, msg: impl Into<String>) -> DatasetError {
    DatasetError::Schema {
        path: path.to_string(),
        msg: msg.into(),
    }
}

/// A dense tensor in row-major order.
#[derive(Debug, Clone, PartialEq)]
struct Dense {
    shape: Vec<usize>,
    data: Vec<f64>,
}

fn fmt_scalar(x: f64) -> Value {
    Value::String(format!("{x:.16e}"))
}

fn nest(shape: &[usize], data: &[f64]) -> Value {
    match shape {
        [] => fmt_scalar(data[0]),
        [_] => Value::Array(data.iter().map(|&x| fmt_scalar(x)).collect()),
        [n, rest @ ..] => {
            let stride: usize = rest.iter().product();
            Value::Array(
                (0..*n)
                    .map(|i| nest(rest, &data[i * stride..(i + 1) * stride]))
                    .collect(),
            )
        }
    }
}

fn tensor_value(shape: &[usize], data: Vec<f64>) -> Value {
    json!({ "shape": shape, "data": nest(shape, &data) })
}

fn matrix_value(m: &na::DMatrix<f64>) -> Value {
    let data = (0..m.nrows())
        .flat_map(|i| (0..m.ncols()).map(move |j| m[(i, j)]))
        .collect();
    tensor_value(&[m.nrows(), m.ncols()], data)
}

fn array_value<D: ndarray::Dimension>(a: &ndarray::Array<f64, D>) -> Value {
    tensor_value(a.shape(), a.iter().copied().collect())
}

fn scalar(v: &Value, path: &str) -> Result<f64, DatasetError> {
    match v {
        Value::Number(n) => n
            .as_f64()
            .ok_or_else(|| schema(path, "number out of range")),
        Value::String(s) => s
            .trim()
            .parse::<f64>()
            .map_err(|_| schema(path, format!("not a decimal number: {s:?}"))),
        _ => Err(schema(path, "expected a number or a decimal string")),
    }
}

fn count(v: &Value, path: &str) -> Result<usize, DatasetError> {
    v.as_u64()
        .map(|n| n as usize)
        .ok_or_else(|| schema(path, "expected a non-negative integer"))
}

fn field<'a>(obj: &'a Value, key: &str, path: &str) -> Result<&'a Value, DatasetError> {
    obj.get(key)
        .ok_or_else(|| schema(path, format!("missing field \"{key}\"")))
}

fn flatten(v: &Value, shape: &[usize], path: &str, out: &mut Vec<f64>) -> Result<(), DatasetError> {
    match shape {
        [] => {
            out.push(scalar(v, path)?);
            Ok(())
        }
        [n, rest @ ..] => {
            let arr = v
                .as_array()
                .ok_or_else(|| schema(path, "expected an array"))?;
            if arr.len() != *n {
                return Err(schema(
                    path,
                    format!("length {} does not match shape entry {n}", arr.len()),
                ));
            }
            for (i, x) in arr.iter().enumerate() {
                flatten(x, rest, &format!("{path}[{i}]"), out)?;
            }
            Ok(())
        }
    }
}

fn dense(rec: &Value, key: &str, path: &str, want: &[usize]) -> Result<Dense, DatasetError> {
    let path = format!("{path}.{key}");
    let t = field(rec, key, &path)?;
    let shape_path = format!("{path}.shape");
    let shape = field(t, "shape", &path)?
        .as_array()
        .ok_or_else(|| schema(&shape_path, "expected an array"))?
        .iter()
        .enumerate()
        .map(|(i, s)| count(s, &format!("{shape_path}[{i}]")))
        .collect::<Result<Vec<_>, _>>()?;
    if shape != want {
        return Err(schema(
            &shape_path,
            format!("expected {want:?}, found {shape:?}"),
        ));
    }
    let mut data = Vec::with_capacity(shape.iter().product());
    flatten(
        field(t, "data", &path)?,
        &shape,
        &format!("{path}.data"),
        &mut data,
    )?;
    Ok(Dense { shape, data })
}

fn matrix(
    rec: &Value,
    key: &str,
    path: &str,
    rows: usize,
    cols: usize,
) -> Result<na::DMatrix<f64>, DatasetError> {
    let d = dense(rec, key, path, &[rows, cols])?;
    Ok(na::DMatrix::from_row_slice(rows, cols, &d.data))
}

fn array3(
    rec: &Value,
    key: &str,
    path: &str,
    shape: [usize; 3],
) -> Result<Array3<f64>, DatasetError> {
    let d = dense(rec, key, path, &shape)?;
    Ok(Array3::from_shape_vec(shape, d.data).expect("shape checked"))
}

fn array4(
    rec: &Value,
    key: &str,
    path: &str,
    shape: [usize; 4],
) -> Result<Array4<f64>, DatasetError> {
    let d = dense(rec, key, path, &shape)?;
    Ok(Array4::from_shape_vec(shape, d.data).expect("shape checked"))
}

fn core_err(path: &str) -> impl Fn(metallic_core::Error) -> DatasetError + '_ {
    move |e| schema(path, e.to_string())
}

/// Serializes one record. The intrinsic curvature is written in the standard convention.
pub fn record_to_value(rec: &PointRecord<f64>) -> Value {
    let (n, m) = (rec.tangent_dim(), rec.normal_dim());
    let mut obj = Map::new();
    let target = match rec.target {
        Target::Product(pp) => json!({
            "kind": "product",
            "params": { "n1": pp.n1, "n2": pp.n2, "c1": fmt_scalar(pp.c1), "c2": fmt_scalar(pp.c2) }
        }),
        Target::ComplexSpaceForm(cs) => json!({
            "kind": "complex-space-form",
            "params": { "complex_dim": cs.complex_dim, "c": fmt_scalar(cs.c) }
        }),
    };
    obj.insert("target".into(), target);
    match rec.ops.params() {
        StructureParams::Metallic(mp) => {
            obj.insert(
                "metallic".into(),
                json!({ "p": fmt_scalar(mp.p()), "q": fmt_scalar(mp.q()) }),
            );
        }
        StructureParams::ComplexMetallic(cp) => {
            obj.insert(
                "complex_metallic".into(),
                json!({ "a": fmt_scalar(cp.a()), "b": fmt_scalar(cp.b()) }),
            );
        }
    }
    obj.insert(
        "frames".into(),
        json!({ "tangent_dim": n, "normal_dim": m }),
    );
    obj.insert("g".into(), matrix_value(rec.g().gram()));
    obj.insert("gE".into(), matrix_value(rec.ge().gram()));
    obj.insert("P".into(), matrix_value(rec.ops.p().mat()));
    obj.insert("Q".into(), matrix_value(rec.ops.q().mat()));
    obj.insert("R".into(), matrix_value(rec.ops.r().mat()));
    obj.insert("S".into(), matrix_value(rec.ops.s().mat()));
    let der = &rec.der;
    obj.insert("B".into(), array_value(der.b.coeffs()));
    obj.insert("nablaP".into(), array_value(&der.nabla_p));
    obj.insert("nablaQ".into(), array_value(&der.nabla_q));
    obj.insert("nablaR".into(), array_value(&der.nabla_r));
    obj.insert("nablaS".into(), array_value(&der.nabla_s));
    obj.insert("nablaB".into(), array_value(&der.nabla_b));
    let shape_data = der
        .shape
        .iter()
        .flat_map(|a| (0..n).flat_map(move |i| (0..n).map(move |j| a[(i, j)])))
        .collect();
    obj.insert("A".into(), tensor_value(&[m, n, n], shape_data));
    obj.insert(
        "Rperp".into(),
        array_value(
            der.rperp
                .to_convention(CurvatureConvention::Standard)
                .coeffs(),
        ),
    );
    obj.insert("R_tm".into(), array_value(rec.r_tm.coeffs()));
    Value::Object(obj)
}

/// Parses one record; `path` prefixes every diagnostic.
pub fn record_from_value(rec: &Value, path: &str) -> Result<PointRecord<f64>, DatasetError> {
    if !rec.is_object() {
        return Err(schema(path, "expected an object"));
    }
    let frames_path = format!("{path}.frames");
    let frames = field(rec, "frames", path)?;
    let n = count(
        field(frames, "tangent_dim", &frames_path)?,
        &format!("{frames_path}.tangent_dim"),
    )?;
    let m = count(
        field(frames, "normal_dim", &frames_path)?,
        &format!("{frames_path}.normal_dim"),
    )?;
    if n == 0 {
        return Err(schema(&frames_path, "tangent_dim must be positive"));
    }

    let params = match (rec.get("metallic"), rec.get("complex_metallic")) {
        (Some(mp), None) => {
            let p0 = format!("{path}.metallic");
            let p = scalar(field(mp, "p", &p0)?, &format!("{p0}.p"))?;
            let q = scalar(field(mp, "q", &p0)?, &format!("{p0}.q"))?;
            StructureParams::Metallic(MetallicParams::new(p, q).map_err(core_err(&p0))?)
        }
        (None, Some(cp)) => {
            let p0 = format!("{path}.complex_metallic");
            let a = scalar(field(cp, "a", &p0)?, &format!("{p0}.a"))?;
            let b = scalar(field(cp, "b", &p0)?, &format!("{p0}.b"))?;
            StructureParams::ComplexMetallic(
                ComplexMetallicParams::new(a, b).map_err(core_err(&p0))?,
            )
        }
        _ => {
            return Err(schema(
                path,
                "exactly one of \"metallic\" and \"complex_metallic\" is required",
            ))
        }
    };

    let tpath = format!("{path}.target");
    let target = field(rec, "target", path)?;
    let kind = field(target, "kind", &tpath)?
        .as_str()
        .ok_or_else(|| schema(&format!("{tpath}.kind"), "expected a string"))?;
    let pp = format!("{tpath}.params");
    let tp = field(target, "params", &tpath)?;
    let target = match kind {
        "product" => {
            let n1 = count(field(tp, "n1", &pp)?, &format!("{pp}.n1"))?;
            let n2 = count(field(tp, "n2", &pp)?, &format!("{pp}.n2"))?;
            let c1 = scalar(field(tp, "c1", &pp)?, &format!("{pp}.c1"))?;
            let c2 = scalar(field(tp, "c2", &pp)?, &format!("{pp}.c2"))?;
            Target::Product(ProductSpaceParams::new(n1, n2, c1, c2).map_err(core_err(&pp))?)
        }
        "complex-space-form" => {
            let k = count(field(tp, "complex_dim", &pp)?, &format!("{pp}.complex_dim"))?;
            let c = scalar(field(tp, "c", &pp)?, &format!("{pp}.c"))?;
            Target::ComplexSpaceForm(ComplexSpaceFormParams::new(k, c).map_err(core_err(&pp))?)
        }
        other => {
            return Err(schema(
                &format!("{tpath}.kind"),
                format!("unknown target kind {other:?}"),
            ))
        }
    };

    let g = Metric::new(matrix(rec, "g", path, n, n)?).map_err(core_err(&format!("{path}.g")))?;
    let ge =
        Metric::new(matrix(rec, "gE", path, m, m)?).map_err(core_err(&format!("{path}.gE")))?;
    let ops = InducedOperators::from_matrices(
        matrix(rec, "P", path, n, n)?,
        matrix(rec, "Q", path, m, n)?,
        matrix(rec, "R", path, n, m)?,
        matrix(rec, "S", path, m, m)?,
        g,
        ge,
        params,
    )
    .map_err(core_err(path))?;

    let a = dense(rec, "A", path, &[m, n, n])?;
    let shape = (0..m)
        .map(|k| na::DMatrix::from_row_slice(n, n, &a.data[k * n * n..(k + 1) * n * n]))
        .collect();
    let der = DerivativeData {
        nabla_p: array3(rec, "nablaP", path, [n, n, n])?,
        nabla_q: array3(rec, "nablaQ", path, [n, n, m])?,
        nabla_r: array3(rec, "nablaR", path, [n, m, n])?,
        nabla_s: array3(rec, "nablaS", path, [n, m, m])?,
        b: BilinearForm::new_unchecked(array3(rec, "B", path, [n, n, m])?)
            .map_err(core_err(&format!("{path}.B")))?,
        nabla_b: array4(rec, "nablaB", path, [n, n, n, m])?,
        shape,
        rperp: CurvatureTensor::new_unchecked(
            array4(rec, "Rperp", path, [n, n, m, m])?,
            CurvatureConvention::Standard,
        )
        .map_err(core_err(&format!("{path}.Rperp")))?,
    };
    let r_tm = CurvatureTensor::new_unchecked(
        array4(rec, "R_tm", path, [n, n, n, n])?,
        CurvatureConvention::Standard,
    )
    .map_err(core_err(&format!("{path}.R_tm")))?;
    PointRecord::new(ops, der, r_tm, target).map_err(core_err(path))
}

/// Serializes a dataset as pretty-printed JSON.
pub fn to_json(records: &[PointRecord<f64>]) -> String {
    let doc = json!({
        "version": FORMAT_VERSION,
        "records": records.iter().map(record_to_value).collect::<Vec<_>>(),
    });
    serde_json::to_string_pretty(&doc).expect("JSON values always serialize")
}

/// Parses a dataset document.
pub fn from_json(text: &str) -> Result<Vec<PointRecord<f64>>, DatasetError> {
    let doc: Value = serde_json::from_str(text).map_err(|e| DatasetError::Syntax {
        line: e.line(),
        column: e.column(),
        msg: e.to_string(),
    })?;
    let version = field(&doc, "version", "$")?;
    let version = match version {
        Value::String(s) => s.clone(),
        Value::Number(n) => n.to_string(),
        _ => return Err(schema("$.version", "expected a string")),
    };
    if version != FORMAT_VERSION {
        return Err(schema(
            "$.version",
            format!("unsupported version {version:?} (expected {FORMAT_VERSION:?})"),
        ));
    }
    let records = field(&doc, "records", "$")?
        .as_array()
        .ok_or_else(|| schema("$.records", "expected an array"))?;
    records
        .iter()
        .enumerate()
        .map(|(i, r)| record_from_value(r, &format!("$.records[{i}]")))
        .collect()
}

//! JSON documents for ensembles, signals, measurements and results.
//!
//! Matrices are row-major nested arrays. Real entries are numbers; complex
//! entries are `[re, im]`. An ensemble document is
//! `{"field": "R"|"C", "d": int, "matrices": [...], "meta": {...}}`.
//! Parse errors name the JSON path of the offending value.

use nalgebra::{DMatrix, DVector};
use serde_json::{json, Map, Value};

use crate::bilinear::BilinearForm;
use crate::certify::Certificate;
use crate::recover::RecoveryReport;
use crate::{
    AnyEnsemble, AnySignal, Ensemble, EnsembleMeta, Error, Field, Hermitian, MeasurementVector,
    Result, Scalar, Signal,
};

fn bad(path: &str, msg: impl std::fmt::Display) -> Error {
    Error::Format(format!("{path}: {msg}"))
}

fn number(v: &Value, path: &str) -> Result<f64> {
    let x = v.as_f64().ok_or_else(|| bad(path, "expected a number"))?;
    if !x.is_finite() {
        return Err(bad(path, "non-finite number"));
    }
    Ok(x)
}

fn entry<T: Scalar>(v: &Value, path: &str) -> Result<T> {
    match v {
        Value::Number(_) => Ok(T::from_real(number(v, path)?)),
        Value::Array(parts) if T::FIELD == Field::Complex => match parts.as_slice() {
            [re, im] => Ok(T::from_parts(
                number(re, &format!("{path}[0]"))?,
                number(im, &format!("{path}[1]"))?,
            )),
            _ => Err(bad(path, "complex entries are [re, im]")),
        },
        Value::Array(_) => Err(bad(path, "real documents take plain numbers")),
        _ => Err(bad(
            path,
            if T::FIELD == Field::Complex {
                "expected a number or [re, im]"
            } else {
                "expected a number"
            },
        )),
    }
}

fn array<'a>(v: &'a Value, path: &str) -> Result<&'a Vec<Value>> {
    v.as_array().ok_or_else(|| bad(path, "expected an array"))
}

fn matrix<T: Scalar>(v: &Value, d: usize, path: &str) -> Result<DMatrix<T>> {
    let rows = array(v, path)?;
    if rows.len() != d {
        return Err(bad(path, format!("expected {d} rows, found {}", rows.len())));
    }
    let mut m = DMatrix::<T>::zeros(d, d);
    for (i, row) in rows.iter().enumerate() {
        let rpath = format!("{path}[{i}]");
        let cols = array(row, &rpath)?;
        if cols.len() != d {
            return Err(bad(&rpath, format!("expected {d} entries, found {}", cols.len())));
        }
        for (j, e) in cols.iter().enumerate() {
            m[(i, j)] = entry(e, &format!("{rpath}[{j}]"))?;
        }
    }
    Ok(m)
}

fn scalar_json<T: Scalar>(z: T) -> Value {
    match T::FIELD {
        Field::Real => json!(z.re()),
        Field::Complex => json!([z.re(), z.im()]),
    }
}

pub fn matrix_json<T: Scalar>(m: &DMatrix<T>) -> Value {
    Value::Array(
        (0..m.nrows())
            .map(|i| Value::Array((0..m.ncols()).map(|j| scalar_json(m[(i, j)])).collect()))
            .collect(),
    )
}

pub fn vector_json<T: Scalar>(v: &DVector<T>) -> Value {
    Value::Array(v.iter().map(|&z| scalar_json(z)).collect())
}

pub fn ensemble_json<T: Scalar>(e: &Ensemble<T>) -> Value {
    json!({
        "field": T::FIELD.to_string(),
        "d": e.dim(),
        "matrices": e.iter().map(|a| matrix_json(a.matrix())).collect::<Vec<_>>(),
        "meta": e.meta(),
    })
}

pub fn any_ensemble_json(e: &AnyEnsemble) -> Value {
    match e {
        AnyEnsemble::Real(e) => ensemble_json(e),
        AnyEnsemble::Complex(e) => ensemble_json(e),
    }
}

fn typed_ensemble<T: Scalar>(obj: &Map<String, Value>, d: usize) -> Result<Ensemble<T>> {
    let mats = obj.get("matrices").ok_or_else(|| bad("$", "missing \"matrices\""))?;
    let mats = array(mats, "$.matrices")?;
    let mut out = Vec::with_capacity(mats.len());
    for (j, m) in mats.iter().enumerate() {
        let path = format!("$.matrices[{j}]");
        let h = Hermitian::new(matrix::<T>(m, d, &path)?).map_err(|e| bad(&path, e))?;
        out.push(h);
    }
    let meta: EnsembleMeta = match obj.get("meta") {
        None | Some(Value::Null) => EnsembleMeta::default(),
        Some(v) => serde_json::from_value(v.clone()).map_err(|e| bad("$.meta", e))?,
    };
    Ensemble::with_meta(out, meta).map_err(|e| bad("$", e))
}

pub fn ensemble_from_json(v: &Value) -> Result<AnyEnsemble> {
    let obj = v.as_object().ok_or_else(|| bad("$", "expected an object"))?;
    let field: Field = obj
        .get("field")
        .and_then(Value::as_str)
        .ok_or_else(|| bad("$.field", "expected \"R\" or \"C\""))?
        .parse()
        .map_err(|e| bad("$.field", e))?;
    let d = obj
        .get("d")
        .and_then(Value::as_u64)
        .filter(|&d| d >= 1)
        .ok_or_else(|| bad("$.d", "expected a positive integer"))? as usize;
    Ok(match field {
        Field::Real => AnyEnsemble::Real(typed_ensemble(obj, d)?),
        Field::Complex => AnyEnsemble::Complex(typed_ensemble(obj, d)?),
    })
}

pub fn parse_ensemble(text: &str) -> Result<AnyEnsemble> {
    ensemble_from_json(&serde_json::from_str(text)?)
}

/// A bare array, or an object with a `"values"` array.
fn values(v: &Value) -> Result<(&Vec<Value>, &'static str)> {
    match v {
        Value::Array(a) => Ok((a, "$")),
        Value::Object(o) => o
            .get("values")
            .and_then(Value::as_array)
            .map(|a| (a, "$.values"))
            .ok_or_else(|| bad("$.values", "expected an array")),
        _ => Err(bad("$", "expected an array or {\"values\": [...]}")),
    }
}

pub fn signal_from_json(v: &Value, field: Field) -> Result<AnySignal> {
    let (items, path) = values(v)?;
    fn typed<T: Scalar>(items: &[Value], path: &str) -> Result<Signal<T>> {
        let xs = items
            .iter()
            .enumerate()
            .map(|(i, e)| entry::<T>(e, &format!("{path}[{i}]")))
            .collect::<Result<Vec<T>>>()?;
        Signal::from_slice(&xs).map_err(|e| bad(path, e))
    }
    Ok(match field {
        Field::Real => AnySignal::Real(typed(items, path)?),
        Field::Complex => AnySignal::Complex(typed(items, path)?),
    })
}

pub fn measurements_from_json(v: &Value) -> Result<MeasurementVector> {
    let (items, path) = values(v)?;
    let xs = items
        .iter()
        .enumerate()
        .map(|(i, e)| number(e, &format!("{path}[{i}]")))
        .collect::<Result<Vec<f64>>>()?;
    if xs.is_empty() {
        return Err(bad(path, "empty measurement vector"));
    }
    Ok(MeasurementVector::from(xs))
}

pub fn measurements_json(b: &MeasurementVector) -> Value {
    json!({ "values": b.as_slice() })
}

pub fn signal_json<T: Scalar>(x: &Signal<T>) -> Value {
    vector_json(x.vector())
}

pub fn certificate_json<T: Scalar>(c: &Certificate<T>) -> Value {
    let witness = c.witness.as_ref().map(|(x, y)| {
        json!({ "x": signal_json(x), "y": signal_json(y) })
    });
    json!({
        "field": T::FIELD.to_string(),
        "verdict": c.verdict,
        "decided_by": c.decided_by,
        "witness": witness,
        "witness_q": c.witness_q.as_ref().map(|q| matrix_json(q.matrix())),
        "witness_absent": c.witness_absent,
        "evidence": c.evidence,
        "config": c.config,
        "seed": c.config.seed,
    })
}

pub fn recovery_json<T: Scalar>(r: &RecoveryReport<T>) -> Value {
    json!({
        "field": T::FIELD.to_string(),
        "estimate": signal_json(&r.estimate),
        "residual": r.residual,
        "lifted_rank_gap": r.lifted_rank_gap,
        "iterations": r.iterations,
        "converged": r.converged,
        "degenerate_init": r.degenerate_init,
        "start": r.start,
        "non_unique": r.non_unique,
    })
}

pub fn bilinear_json(f: &BilinearForm) -> Value {
    let (p, q, n) = f.size();
    json!({
        "p": p,
        "q": q,
        "n": n,
        "matrices": f.matrices().iter().map(matrix_json::<f64>).collect::<Vec<_>>(),
    })
}

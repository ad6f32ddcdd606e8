//! JSON text format for potentials, scattering data and triplets.
//!
//! Every file is one object with a `schema` tag. Complex arrays are stored as parallel `re` and
//! `im` arrays; NaN (used at singular spectral points) is written as `null`. Floats are written
//! in shortest round-trip form, so parsing returns bit-identical values.

use num_complex::Complex64 as C64;
use serde_json::{json, Map, Value};

use super::{
    into_result, BoundState, BoundStateTriplets, PotentialPair, ScatteringMatrixData, SpatialGrid, SpectralAxis,
    SpectralGrid, Variant,
};
use crate::error::{Error, Result};

pub const POTENTIAL_SCHEMA: &str = "potential-pair/1";
pub const SCATTERING_SCHEMA: &str = "scattering-data/1";
pub const TRIPLETS_SCHEMA: &str = "triplets/1";

#[derive(Debug, Clone, PartialEq)]
pub enum Document {
    Potential(PotentialPair),
    Scattering(ScatteringMatrixData),
    /// Triplets tagged with the system whose kernel they describe.
    Triplets(Variant, BoundStateTriplets),
}

fn num(x: f64) -> Value {
    serde_json::Number::from_f64(x).map(Value::Number).unwrap_or(Value::Null)
}

fn complex_array(v: &[C64]) -> Value {
    json!({
        "re": v.iter().map(|z| num(z.re)).collect::<Vec<_>>(),
        "im": v.iter().map(|z| num(z.im)).collect::<Vec<_>>(),
    })
}

fn complex_scalar(z: C64) -> Value {
    json!({ "re": num(z.re), "im": num(z.im) })
}

fn matrix(m: &nalgebra::DMatrix<C64>) -> Value {
    let flat: Vec<C64> = (0..m.nrows())
        .flat_map(|i| (0..m.ncols()).map(move |j| m[(i, j)]))
        .collect();
    let mut v = complex_array(&flat);
    v["rows"] = json!(m.nrows());
    v["cols"] = json!(m.ncols());
    v
}

fn states_value(states: &[BoundState]) -> Value {
    Value::Array(
        states
            .iter()
            .map(|s| json!({ "lambda": complex_scalar(s.lambda), "norming": complex_array(&s.norming) }))
            .collect(),
    )
}

pub fn to_value(doc: &Document) -> Value {
    match doc {
        Document::Potential(p) => json!({
            "schema": POTENTIAL_SCHEMA,
            "variant": p.variant.tag(),
            "grid": { "x_min": num(p.grid.x_min()), "x_max": num(p.grid.x_max()), "n_points": p.grid.len() },
            "decay_tol": num(p.decay_tol),
            "first": complex_array(&p.first),
            "second": complex_array(&p.second),
        }),
        Document::Scattering(d) => json!({
            "schema": SCATTERING_SCHEMA,
            "variant": d.variant.tag(),
            "grid": { "axis": d.grid.axis().tag(), "values": d.grid.values().iter().map(|&v| num(v)).collect::<Vec<_>>() },
            "T": complex_array(&d.t),
            "R": complex_array(&d.r),
            "L": complex_array(&d.l),
            "T_bar": complex_array(&d.t_bar),
            "R_bar": complex_array(&d.r_bar),
            "L_bar": complex_array(&d.l_bar),
            "phase": d.phase.map(complex_scalar).unwrap_or(Value::Null),
            "singular": d.singular,
            "relation_tol": num(d.relation_tol),
        }),
        Document::Triplets(variant, t) => json!({
            "schema": TRIPLETS_SCHEMA,
            "variant": variant.tag(),
            "states": states_value(t.states()),
            "barred": states_value(t.barred()),
            "A": matrix(t.a()),
            "B": complex_array(t.b().as_slice()),
            "C": matrix(t.c()),
            "A_bar": matrix(t.a_bar()),
            "B_bar": complex_array(t.b_bar().as_slice()),
            "C_bar": matrix(t.c_bar()),
        }),
    }
}

pub fn to_string(doc: &Document) -> String {
    let mut s = serde_json::to_string_pretty(&to_value(doc)).expect("json values always serialize");
    s.push('\n');
    s
}

fn field<'a>(obj: &'a Map<String, Value>, path: &str, key: &str) -> Result<&'a Value> {
    obj.get(key).ok_or_else(|| Error::parse(join(path, key), "missing"))
}

fn join(path: &str, key: &str) -> String {
    if path.is_empty() {
        key.to_string()
    } else {
        format!("{path}.{key}")
    }
}

fn object<'a>(v: &'a Value, path: &str) -> Result<&'a Map<String, Value>> {
    v.as_object().ok_or_else(|| Error::parse(path, "expected an object"))
}

fn float(v: &Value, path: &str) -> Result<f64> {
    match v {
        Value::Null => Ok(f64::NAN),
        Value::Number(n) => n.as_f64().ok_or_else(|| Error::parse(path, "not representable as f64")),
        _ => Err(Error::parse(path, "expected a number")),
    }
}

fn uint(v: &Value, path: &str) -> Result<usize> {
    v.as_u64()
        .map(|u| u as usize)
        .ok_or_else(|| Error::parse(path, "expected a non-negative integer"))
}

fn string<'a>(v: &'a Value, path: &str) -> Result<&'a str> {
    v.as_str().ok_or_else(|| Error::parse(path, "expected a string"))
}

fn float_array(v: &Value, path: &str) -> Result<Vec<f64>> {
    let arr = v.as_array().ok_or_else(|| Error::parse(path, "expected an array"))?;
    arr.iter()
        .enumerate()
        .map(|(i, x)| float(x, &format!("{path}[{i}]")))
        .collect()
}

fn parse_complex_array(v: &Value, path: &str) -> Result<Vec<C64>> {
    let o = object(v, path)?;
    let re = float_array(field(o, path, "re")?, &join(path, "re"))?;
    let im = float_array(field(o, path, "im")?, &join(path, "im"))?;
    if re.len() != im.len() {
        return Err(Error::parse(
            join(path, "im"),
            format!("length {} differs from re length {}", im.len(), re.len()),
        ));
    }
    Ok(re.into_iter().zip(im).map(|(a, b)| C64::new(a, b)).collect())
}

fn parse_complex(v: &Value, path: &str) -> Result<C64> {
    let o = object(v, path)?;
    Ok(C64::new(
        float(field(o, path, "re")?, &join(path, "re"))?,
        float(field(o, path, "im")?, &join(path, "im"))?,
    ))
}

fn parse_variant(o: &Map<String, Value>) -> Result<Variant> {
    let s = string(field(o, "", "variant")?, "variant")?;
    Variant::from_tag(s).ok_or_else(|| Error::parse("variant", format!("unknown variant `{s}`")))
}

fn parse_states(v: &Value, path: &str) -> Result<Vec<BoundState>> {
    let arr = v.as_array().ok_or_else(|| Error::parse(path, "expected an array"))?;
    arr.iter()
        .enumerate()
        .map(|(i, s)| {
            let p = format!("{path}[{i}]");
            let o = object(s, &p)?;
            Ok(BoundState {
                lambda: parse_complex(field(o, &p, "lambda")?, &join(&p, "lambda"))?,
                norming: parse_complex_array(field(o, &p, "norming")?, &join(&p, "norming"))?,
            })
        })
        .collect()
}

fn check_matrix(o: &Map<String, Value>, key: &str, want: &nalgebra::DMatrix<C64>) -> Result<()> {
    let Some(v) = o.get(key) else { return Ok(()) };
    let mo = object(v, key)?;
    let rows = uint(field(mo, key, "rows")?, &join(key, "rows"))?;
    let cols = uint(field(mo, key, "cols")?, &join(key, "cols"))?;
    let data = parse_complex_array(v, key)?;
    let same = rows == want.nrows()
        && cols == want.ncols()
        && data.len() == rows * cols
        && (0..rows).all(|i| (0..cols).all(|j| data[i * cols + j] == want[(i, j)]));
    if same {
        Ok(())
    } else {
        Err(Error::parse(key, "does not match the matrix assembled from the bound states"))
    }
}

fn check_vector(o: &Map<String, Value>, key: &str, want: &[C64]) -> Result<()> {
    let Some(v) = o.get(key) else { return Ok(()) };
    if parse_complex_array(v, key)? == want {
        Ok(())
    } else {
        Err(Error::parse(key, "does not match the vector assembled from the bound states"))
    }
}

pub fn from_value(v: &Value) -> Result<Document> {
    let o = object(v, "")?;
    let schema = string(field(o, "", "schema")?, "schema")?;
    match schema {
        POTENTIAL_SCHEMA => {
            let variant = parse_variant(o)?;
            let g = object(field(o, "", "grid")?, "grid")?;
            let grid = SpatialGrid::new(
                float(field(g, "grid", "x_min")?, "grid.x_min")?,
                float(field(g, "grid", "x_max")?, "grid.x_max")?,
                uint(field(g, "grid", "n_points")?, "grid.n_points")?,
            )
            .map_err(|e| Error::parse("grid", e.to_string()))?;
            let decay_tol = match o.get("decay_tol") {
                Some(x) => float(x, "decay_tol")?,
                None => super::DEFAULT_DECAY_TOL,
            };
            let first = parse_complex_array(field(o, "", "first")?, "first")?;
            let second = parse_complex_array(field(o, "", "second")?, "second")?;
            Ok(Document::Potential(PotentialPair::with_decay_tol(
                grid, first, second, variant, decay_tol,
            )?))
        }
        SCATTERING_SCHEMA => {
            let variant = parse_variant(o)?;
            let g = object(field(o, "", "grid")?, "grid")?;
            let axis_tag = string(field(g, "grid", "axis")?, "grid.axis")?;
            let axis = SpectralAxis::from_tag(axis_tag)
                .ok_or_else(|| Error::parse("grid.axis", format!("unknown axis `{axis_tag}`")))?;
            let values = float_array(field(g, "grid", "values")?, "grid.values")?;
            let grid = SpectralGrid::new(values, axis).map_err(|e| Error::parse("grid.values", e.to_string()))?;
            let arr = |k: &str| parse_complex_array(field(o, "", k)?, k);
            let phase = match o.get("phase") {
                None | Some(Value::Null) => None,
                Some(p) => Some(parse_complex(p, "phase")?),
            };
            let singular = match o.get("singular") {
                None => Vec::new(),
                Some(s) => s
                    .as_array()
                    .ok_or_else(|| Error::parse("singular", "expected an array"))?
                    .iter()
                    .enumerate()
                    .map(|(i, x)| uint(x, &format!("singular[{i}]")))
                    .collect::<Result<_>>()?,
            };
            let relation_tol = match o.get("relation_tol") {
                Some(x) => float(x, "relation_tol")?,
                None => super::DEFAULT_RELATION_TOL,
            };
            let data = ScatteringMatrixData {
                grid,
                t: arr("T")?,
                r: arr("R")?,
                l: arr("L")?,
                t_bar: arr("T_bar")?,
                r_bar: arr("R_bar")?,
                l_bar: arr("L_bar")?,
                variant,
                phase,
                singular,
                relation_tol,
            };
            Ok(Document::Scattering(into_result(data)?))
        }
        TRIPLETS_SCHEMA => {
            let variant = parse_variant(o)?;
            let states = parse_states(field(o, "", "states")?, "states")?;
            let barred = match o.get("barred") {
                Some(b) => parse_states(b, "barred")?,
                None => Vec::new(),
            };
            let t = BoundStateTriplets::assemble(states, barred);
            check_matrix(o, "A", t.a())?;
            check_vector(o, "B", t.b().as_slice())?;
            check_matrix(o, "C", t.c())?;
            check_matrix(o, "A_bar", t.a_bar())?;
            check_vector(o, "B_bar", t.b_bar().as_slice())?;
            check_matrix(o, "C_bar", t.c_bar())?;
            Ok(Document::Triplets(variant, into_result(t)?))
        }
        other => Err(Error::parse("schema", format!("unknown schema `{other}`"))),
    }
}

pub fn from_str(s: &str) -> Result<Document> {
    let v: Value = serde_json::from_str(s).map_err(|e| {
        Error::parse(
            "<document>",
            format!("malformed JSON at line {} column {}: {e}", e.line(), e.column()),
        )
    })?;
    from_value(&v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::DEFAULT_DECAY_TOL;

    fn gaussian() -> PotentialPair {
        let g = SpatialGrid::new(-8.0, 8.0, 81).unwrap();
        PotentialPair::from_fn(
            g,
            Variant::EnergyDependent,
            |x| C64::new((-x * x).exp(), 0.1 * x * (-x * x).exp()),
            |x| C64::new(0.5 * (-x * x).exp(), 0.0),
        )
        .unwrap()
    }

    #[test]
    fn potential_round_trip() {
        let p = gaussian();
        let doc = Document::Potential(p);
        let back = from_str(&to_string(&doc)).unwrap();
        assert_eq!(back, doc);
    }

    #[test]
    fn truncated_file_is_parse_error() {
        let s = to_string(&Document::Potential(gaussian()));
        let cut = &s[..s.len() / 2];
        assert!(matches!(from_str(cut), Err(Error::Parse { .. })));
    }

    #[test]
    fn missing_field_is_named() {
        let mut v = to_value(&Document::Potential(gaussian()));
        v["first"].as_object_mut().unwrap().remove("im");
        match from_value(&v) {
            Err(Error::Parse { field, .. }) => assert_eq!(field, "first.im"),
            other => panic!("{other:?}"),
        }
        let mut v = to_value(&Document::Potential(gaussian()));
        v["second"]["re"][3] = json!("x");
        match from_value(&v) {
            Err(Error::Parse { field, .. }) => assert_eq!(field, "second.re[3]"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn scattering_length_mismatch_is_violation() {
        let g = SpectralGrid::uniform(-2.0, 2.0, 6, SpectralAxis::Lambda).unwrap();
        let mut d = ScatteringMatrixData::free(g, Variant::Uv);
        d.r.pop();
        d.r.push(C64::new(0.0, 0.0));
        let mut v = to_value(&Document::Scattering(d));
        v["R"]["re"].as_array_mut().unwrap().pop();
        v["R"]["im"].as_array_mut().unwrap().pop();
        assert!(matches!(from_value(&v), Err(Error::Validation(_))));
    }

    #[test]
    fn scattering_with_nan_and_phase() {
        let g = SpectralGrid::uniform(-2.0, 2.0, 6, SpectralAxis::Lambda).unwrap();
        let mut d = ScatteringMatrixData::free(g, Variant::EnergyDependent);
        d.phase = Some(C64::new(0.3f64.cos(), 0.3f64.sin()));
        d.singular = vec![2];
        d.t[2] = C64::new(f64::NAN, f64::NAN);
        let s = to_string(&Document::Scattering(d.clone()));
        let Document::Scattering(back) = from_str(&s).unwrap() else { panic!() };
        assert!(back.t[2].re.is_nan());
        assert_eq!(back.phase, d.phase);
        assert_eq!(back.r, d.r);
    }

    #[test]
    fn triplets_round_trip_and_tamper() {
        let t = super::super::build_triplets(
            &[BoundState {
                lambda: C64::new(0.2, 1.0),
                norming: vec![C64::new(1.0, 0.0), C64::new(3.0, -1.0)],
            }],
            &[BoundState::simple(C64::new(0.0, -2.0), C64::new(-0.5, 0.0))],
        )
        .unwrap();
        let doc = Document::Triplets(Variant::Uv, t);
        let s = to_string(&doc);
        assert_eq!(from_str(&s).unwrap(), doc);
        let mut v = to_value(&doc);
        v["A"]["re"][1] = json!(5.0);
        match from_value(&v) {
            Err(Error::Parse { field, .. }) => assert_eq!(field, "A"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn default_decay_tol_when_absent() {
        let mut v = to_value(&Document::Potential(gaussian()));
        v.as_object_mut().unwrap().remove("decay_tol");
        let Document::Potential(p) = from_value(&v).unwrap() else { panic!() };
        assert_eq!(p.decay_tol, DEFAULT_DECAY_TOL);
    }
}

//! Deterministic JSON and CSV emission.
//!
//! Objects have sorted keys, floats print with 17 significant digits, exact
//! rationals are `"p/q"` strings and complex numbers are `{re, im}`.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_complex::Complex64;
use serde::Serialize;

use moyal_core::conventions::CONVENTIONS;
use moyal_core::poly::{PolySymbol, Var};
use moyal_core::scalar::format_rational;
use moyal_core::{ComplexRational, HbarSeries, Rational};

#[derive(Clone, Debug, PartialEq)]
pub enum Json {
    Null,
    Bool(bool),
    Int(i64),
    Float(f64),
    Str(String),
    Arr(Vec<Json>),
    Obj(BTreeMap<String, Json>),
}

impl Json {
    pub fn obj<K: Into<String>>(entries: impl IntoIterator<Item = (K, Json)>) -> Json {
        Json::Obj(entries.into_iter().map(|(k, v)| (k.into(), v)).collect())
    }

    pub fn str(s: impl Into<String>) -> Json {
        Json::Str(s.into())
    }

    pub fn float(v: f64) -> Json {
        Json::Float(v)
    }

    pub fn floats(vs: &[f64]) -> Json {
        Json::Arr(vs.iter().copied().map(Json::Float).collect())
    }

    pub fn opt_float(v: Option<f64>) -> Json {
        v.map_or(Json::Null, Json::Float)
    }

    pub fn rational(r: &Rational) -> Json {
        Json::Str(format_rational(r))
    }

    pub fn exact_complex(c: &ComplexRational) -> Json {
        Json::obj([("re", Json::rational(&c.re)), ("im", Json::rational(&c.im))])
    }

    pub fn complex(c: Complex64) -> Json {
        Json::obj([("re", Json::Float(c.re)), ("im", Json::Float(c.im))])
    }

    /// Any serde value, keeping float bit patterns.
    pub fn of<T: Serialize>(value: &T) -> Json {
        Json::from_value(serde_json::to_value(value).expect("in-memory serialization"))
    }

    fn from_value(v: serde_json::Value) -> Json {
        use serde_json::Value;
        match v {
            Value::Null => Json::Null,
            Value::Bool(b) => Json::Bool(b),
            Value::Number(n) => match n.as_i64() {
                Some(i) if !n.is_f64() => Json::Int(i),
                _ => Json::Float(n.as_f64().unwrap_or(f64::NAN)),
            },
            Value::String(s) => Json::Str(s),
            Value::Array(a) => Json::Arr(a.into_iter().map(Json::from_value).collect()),
            Value::Object(o) => Json::Obj(o.into_iter().map(|(k, v)| (k, Json::from_value(v))).collect()),
        }
    }

    /// Insert into an object; panics on other variants.
    pub fn with(mut self, key: &str, value: Json) -> Json {
        match &mut self {
            Json::Obj(m) => {
                m.insert(key.to_string(), value);
            }
            _ => panic!("with() on a non-object"),
        }
        self
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        self.write(&mut s, 0);
        s.push('\n');
        s
    }

    fn write(&self, out: &mut String, indent: usize) {
        let pad = |n: usize| "  ".repeat(n);
        match self {
            Json::Null => out.push_str("null"),
            Json::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
            Json::Int(i) => write!(out, "{i}").unwrap(),
            Json::Float(v) => out.push_str(&format_float(*v)),
            Json::Str(s) => out.push_str(&serde_json::to_string(s).expect("string escape")),
            Json::Arr(a) if a.is_empty() => out.push_str("[]"),
            Json::Arr(a) => {
                out.push_str("[\n");
                for (k, v) in a.iter().enumerate() {
                    out.push_str(&pad(indent + 1));
                    v.write(out, indent + 1);
                    out.push_str(if k + 1 < a.len() { ",\n" } else { "\n" });
                }
                out.push_str(&pad(indent));
                out.push(']');
            }
            Json::Obj(m) if m.is_empty() => out.push_str("{}"),
            Json::Obj(m) => {
                out.push_str("{\n");
                for (k, (key, v)) in m.iter().enumerate() {
                    out.push_str(&pad(indent + 1));
                    out.push_str(&serde_json::to_string(key).expect("string escape"));
                    out.push_str(": ");
                    v.write(out, indent + 1);
                    out.push_str(if k + 1 < m.len() { ",\n" } else { "\n" });
                }
                out.push_str(&pad(indent));
                out.push('}');
            }
        }
    }
}

/// 17 significant digits in scientific notation; non-finite values are `null`.
pub fn format_float(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        "null".to_string()
    }
}

/// `{text, terms}`; each term carries the exponents of every active block.
pub fn poly_json(p: &PolySymbol) -> Json {
    let shape = p.shape();
    let d = shape.dim;
    let terms = p
        .terms()
        .map(|(e, c)| {
            let mut alpha = vec![0i64; d];
            let mut beta = vec![0i64; d];
            let mut y = vec![0i64; d];
            let mut eta = vec![0i64; d];
            let mut hbar = 0i64;
            for (i, &k) in e.entries().iter().enumerate() {
                let k = k as i64;
                match shape.var_at(i) {
                    Var::X(a) => alpha[a] = k,
                    Var::Xi(a) => beta[a] = k,
                    Var::Y(a) => y[a] = k,
                    Var::Eta(a) => eta[a] = k,
                    Var::Hbar => hbar = k,
                }
            }
            let ints = |v: Vec<i64>| Json::Arr(v.into_iter().map(Json::Int).collect());
            let mut t = Json::obj([
                ("alpha", ints(alpha)),
                ("beta", ints(beta)),
                ("re", Json::rational(&c.re)),
                ("im", Json::rational(&c.im)),
            ]);
            if shape.test_point {
                t = t.with("y", ints(y)).with("eta", ints(eta));
            }
            if shape.hbar {
                t = t.with("hbar", Json::Int(hbar));
            }
            t
        })
        .collect();
    Json::obj([("text", Json::str(p.to_string())), ("terms", Json::Arr(terms))])
}

/// Coefficients of each power of `ħ` and the collected polynomial.
pub fn series_json(s: &HbarSeries) -> Json {
    let coeffs = s
        .coefficients()
        .filter(|(_, c)| !c.is_zero())
        .map(|(j, c)| Json::obj([("hbar_power", Json::Int(j as i64)), ("coefficient", poly_json(c))]))
        .collect();
    Json::obj([("by_order", Json::Arr(coeffs)), ("collected", poly_json(&s.to_poly()))])
}

/// Top-level document: the command name, its result and the convention table.
pub fn document(command: &str, result: Json) -> Json {
    Json::obj([("command", Json::str(command)), ("conventions", Json::of(&CONVENTIONS)), ("result", result)])
}

/// Header and rows, comma-separated, with [`format_float`] for numbers.
pub fn csv(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut s = header.join(",");
    s.push('\n');
    for r in rows {
        s.push_str(&r.join(","));
        s.push('\n');
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use moyal_core::poly::Shape;
    use moyal_core::scalar::crat;

    #[test]
    fn floats_and_keys_are_canonical() {
        let j = Json::obj([("b", Json::float(0.1)), ("a", Json::float(f64::NAN)), ("c", Json::Int(3))]);
        assert_eq!(j.render(), "{\n  \"a\": null,\n  \"b\": 1.0000000000000001e-1,\n  \"c\": 3\n}\n");
        let v: serde_json::Value = serde_json::from_str(&j.render()).unwrap();
        assert_eq!(v["b"].as_f64(), Some(0.1));
    }

    #[test]
    fn polynomials_are_lossless() {
        let s = Shape::phase(1).with_test_point().with_hbar();
        let p = PolySymbol::monomial_in(s, &[(Var::X(0), 2), (Var::Eta(0), 1), (Var::Hbar, 1)], crat(-3, 2)).unwrap();
        let j = poly_json(&p);
        let Json::Obj(m) = &j else { panic!() };
        let Json::Arr(terms) = &m["terms"] else { panic!() };
        let Json::Obj(t) = &terms[0] else { panic!() };
        assert_eq!(t["re"], Json::str("-3/2"));
        assert_eq!(t["alpha"], Json::Arr(vec![Json::Int(2)]));
        assert_eq!(t["eta"], Json::Arr(vec![Json::Int(1)]));
        assert_eq!(t["hbar"], Json::Int(1));
    }

    #[test]
    fn serde_values_keep_float_bits() {
        let v = 1.0f64 / 3.0;
        let j = Json::of(&[v]);
        assert_eq!(j, Json::Arr(vec![Json::Float(v)]));
        assert!(Json::of(&CONVENTIONS).render().contains("poisson_bracket"));
    }
}

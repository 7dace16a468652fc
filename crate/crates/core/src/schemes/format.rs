//! Scheme files: TOML with a `name`, an optional `claimed_order`, and an
//! ordered `[[factors]]` array.
//!
//! ```toml
//! name = "strang"
//! claimed_order = 2
//!
//! [[factors]]
//! kind = "A"
//! a = "1/2"
//!
//! [[factors]]
//! kind = "B"
//! b = "1"
//!
//! [[factors]]
//! kind = "A"
//! a = "1/2"
//! ```
//!
//! Coefficients are strings `"p/q"` or integers for exact values, bare TOML
//! floats otherwise. B factors take an optional `c` and an optional
//! `placement` (`"combined"` by default, or `"separate"`).

use serde::Deserialize;
use toml::Spanned;

use super::{Coefficient, Factor, Placement, Scheme, SchemeError};

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScheme {
    name: String,
    claimed_order: Option<u32>,
    #[serde(default)]
    factors: Vec<Spanned<RawFactor>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFactor {
    kind: String,
    a: Option<RawCoefficient>,
    b: Option<RawCoefficient>,
    c: Option<RawCoefficient>,
    placement: Option<String>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawCoefficient {
    Text(String),
    Integer(i64),
    Float(f64),
}

impl RawCoefficient {
    fn resolve(&self) -> Result<Coefficient, String> {
        match self {
            RawCoefficient::Text(t) => Coefficient::parse(t),
            RawCoefficient::Integer(n) => Ok(Coefficient::integer(*n)),
            RawCoefficient::Float(x) => Ok(Coefficient::Float(*x)),
        }
    }
}

fn line_column(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rfind('\n').map_or(before.len(), |i| before.len() - i - 1) + 1;
    (line, column)
}

/// Parses and validates a scheme document.
pub fn parse_scheme(text: &str) -> Result<Scheme, SchemeError> {
    let raw: RawScheme = toml::from_str(text).map_err(|e| {
        let (line, column) = e
            .span()
            .map(|s| line_column(text, s.start))
            .unwrap_or((1, 1));
        SchemeError::Syntax {
            line,
            column,
            message: e.message().trim().to_string(),
        }
    })?;

    let mut factors = Vec::with_capacity(raw.factors.len());
    for spanned in &raw.factors {
        let (line, _) = line_column(text, spanned.span().start);
        let invalid = |message: String| SchemeError::Invalid { line, message };
        let f = spanned.get_ref();
        let coef = |c: &Option<RawCoefficient>, field: &str| -> Result<Coefficient, SchemeError> {
            match c {
                Some(c) => c.resolve().map_err(|m| invalid(format!("field {field}: {m}"))),
                None => Err(invalid(format!("{} factor is missing field {field}", f.kind))),
            }
        };
        let factor = match f.kind.as_str() {
            "A" => {
                for (present, field) in [(f.b.is_some(), "b"), (f.c.is_some(), "c")] {
                    if present {
                        return Err(invalid(format!(
                            "A factors carry only a; field {field} belongs to B factors"
                        )));
                    }
                }
                if f.placement.is_some() {
                    return Err(invalid(
                        "placement applies only to B factors with a commutator term".into(),
                    ));
                }
                Factor::a(coef(&f.a, "a")?)
            }
            "B" => {
                if f.a.is_some() {
                    return Err(invalid("B factors carry b and c; field a belongs to A factors".into()));
                }
                let c = match &f.c {
                    Some(_) => coef(&f.c, "c")?,
                    None => Coefficient::zero(),
                };
                let placement = match f.placement.as_deref() {
                    None | Some("combined") => Placement::Combined,
                    Some("separate") => Placement::Separate,
                    Some(other) => {
                        return Err(invalid(format!(
                            "placement must be \"combined\" or \"separate\", got {other:?}"
                        )))
                    }
                };
                Factor::b_generalized(coef(&f.b, "b")?, c, placement)
            }
            other => {
                return Err(invalid(format!("factor kind must be \"A\" or \"B\", got {other:?}")))
            }
        };
        factors.push(factor);
    }
    Scheme::new(raw.name, factors, raw.claimed_order)
}

fn render_coefficient(c: &Coefficient) -> String {
    match c {
        Coefficient::Exact(_) => format!("\"{c}\""),
        Coefficient::Float(_) => c.to_string(),
    }
}

/// Canonical text form; `parse_scheme(serialize_scheme(s)) == s`.
pub fn serialize_scheme(scheme: &Scheme) -> String {
    let mut out = format!("name = {}\n", toml_string(scheme.name()));
    if let Some(p) = scheme.claimed_order() {
        out.push_str(&format!("claimed_order = {p}\n"));
    }
    for f in scheme.factors() {
        out.push_str("\n[[factors]]\n");
        match f {
            Factor::A { a } => {
                out.push_str("kind = \"A\"\n");
                out.push_str(&format!("a = {}\n", render_coefficient(a)));
            }
            Factor::B { b, c, placement } => {
                out.push_str("kind = \"B\"\n");
                out.push_str(&format!("b = {}\n", render_coefficient(b)));
                if !c.is_zero() {
                    out.push_str(&format!("c = {}\n", render_coefficient(c)));
                }
                if *placement == Placement::Separate {
                    out.push_str("placement = \"separate\"\n");
                }
            }
        }
    }
    out
}

fn toml_string(s: &str) -> String {
    toml::Value::String(s.to_string()).to_string()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schemes::{catalog_get, CATALOG};

    const STRANG: &str = r#"
name = "strang"
claimed_order = 2

[[factors]]
kind = "A"
a = "1/2"

[[factors]]
kind = "B"
b = 1

[[factors]]
kind = "A"
a = "1/2"
"#;

    #[test]
    fn handwritten_strang_matches_catalog() {
        assert_eq!(parse_scheme(STRANG).unwrap(), catalog_get("strang").unwrap());
    }

    #[test]
    fn catalog_round_trips_byte_exact() {
        for name in CATALOG {
            let s = catalog_get(name).unwrap();
            let text = serialize_scheme(&s);
            let back = parse_scheme(&text).unwrap();
            assert_eq!(back, s);
            assert_eq!(serialize_scheme(&back), text);
        }
    }

    #[test]
    fn chin_text_form() {
        let text = serialize_scheme(&catalog_get("chin").unwrap());
        assert!(text.contains("b = \"2/3\"\nc = \"-1/72\"\n"));
        assert!(!text.contains("placement"));
    }

    #[test]
    fn c_on_a_factor_is_rejected() {
        let doc = "name = \"x\"\n\n[[factors]]\nkind = \"A\"\na = \"1\"\nc = \"1/2\"\n";
        match parse_scheme(doc) {
            Err(SchemeError::Invalid { line, message }) => {
                assert_eq!(line, 3);
                assert!(message.contains("field c"), "{message}");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn syntax_error_reports_position() {
        let doc = "name = \"x\"\nclaimed_order = \n";
        match parse_scheme(doc) {
            Err(SchemeError::Syntax { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unknown_fields_and_kinds() {
        let doc = "name = \"x\"\n[[factors]]\nkind = \"C\"\na = 1\n";
        assert!(matches!(parse_scheme(doc), Err(SchemeError::Invalid { line: 2, .. })));
        let doc = "name = \"x\"\n[[factors]]\nkind = \"A\"\na = 1\nweight = 2\n";
        assert!(matches!(parse_scheme(doc), Err(SchemeError::Syntax { .. })));
        let doc = "name = \"x\"\n[[factors]]\nkind = \"B\"\nb = 1\nplacement = \"left\"\n";
        assert!(matches!(parse_scheme(doc), Err(SchemeError::Invalid { .. })));
    }

    #[test]
    fn floats_and_separate_placement() {
        let doc = "name = \"f\"\n[[factors]]\nkind = \"B\"\nb = 0.5\nc = \"1/8\"\nplacement = \"separate\"\n\n[[factors]]\nkind = \"A\"\na = 1.0\n";
        let s = parse_scheme(doc).unwrap();
        assert_eq!(
            s.factors()[0],
            Factor::b_generalized(Coefficient::Float(0.5), Coefficient::ratio(1, 8), Placement::Separate)
        );
        assert_eq!(s.factors()[1], Factor::a(Coefficient::Float(1.0)));
        assert_eq!(parse_scheme(&serialize_scheme(&s)).unwrap(), s);
    }

    #[test]
    fn inconsistent_claim_in_file() {
        let doc = "name = \"x\"\nclaimed_order = 2\n[[factors]]\nkind = \"A\"\na = \"1/2\"\n";
        assert!(matches!(parse_scheme(doc), Err(SchemeError::Inconsistent { .. })));
    }
}

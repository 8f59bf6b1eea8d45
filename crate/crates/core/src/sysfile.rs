//! Self-describing JSON system files with exact rational entries.
//!
//! Matrix entries are strings holding rational expressions over the named
//! parameters (`+ - * / ^`, parentheses, integer or decimal literals), so
//! that no floating-point value ever enters the rank tests.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kalman::{SystemSpec, MAX_DIMENSION};
use crate::polymat::{format_rational, parse_rational, Rational, RatMatrix};

/// An algebraic identity between parameters whose validity switches a
/// cancellation on.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CancellationCondition {
    /// Equation `lhs = rhs`, e.g. `"a^2 = 1"`.
    pub condition: String,
    pub note: String,
}

/// Optional analysis settings stored alongside a system.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnalysisOptions {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kmax: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub xi_min_exp: Option<i32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub xi_max_exp: Option<i32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps_max: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps_min: Option<u32>,
}

impl AnalysisOptions {
    pub fn is_empty(&self) -> bool {
        *self == AnalysisOptions::default()
    }
}

/// On-disk description of a system `(A, Bᵃ, Bˢ)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemFile {
    pub name: String,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub description: String,
    pub n: usize,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub parameters: BTreeMap<String, String>,
    #[serde(rename = "A")]
    pub a: Vec<Vec<String>>,
    #[serde(rename = "Ba")]
    pub ba: Vec<Vec<String>>,
    #[serde(rename = "Bs")]
    pub bs: Vec<Vec<String>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub cancellations: Vec<CancellationCondition>,
    #[serde(default, skip_serializing_if = "AnalysisOptions::is_empty")]
    pub options: AnalysisOptions,
}

impl SystemFile {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("line {}, column {}: {e}", e.line(), e.column())))
    }

    /// Pretty JSON with one matrix row per line, newline-terminated.
    pub fn to_json(&self) -> String {
        let mut out = String::from("{\n");
        let q = |s: &str| serde_json::to_string(s).expect("string serialization");
        let mut fields: Vec<String> = vec![format!("  \"name\": {}", q(&self.name))];
        if !self.description.is_empty() {
            fields.push(format!("  \"description\": {}", q(&self.description)));
        }
        fields.push(format!("  \"n\": {}", self.n));
        if !self.parameters.is_empty() {
            let items: Vec<String> = self.parameters.iter().map(|(k, v)| format!("{}: {}", q(k), q(v))).collect();
            fields.push(format!("  \"parameters\": {{{}}}", items.join(", ")));
        }
        for (key, m) in [("A", &self.a), ("Ba", &self.ba), ("Bs", &self.bs)] {
            let rows: Vec<String> =
                m.iter().map(|r| format!("    [{}]", r.iter().map(|e| q(e)).collect::<Vec<_>>().join(", "))).collect();
            fields.push(format!("  \"{key}\": [\n{}\n  ]", rows.join(",\n")));
        }
        if !self.cancellations.is_empty() {
            let items: Vec<String> = self
                .cancellations
                .iter()
                .map(|c| format!("    {{\"condition\": {}, \"note\": {}}}", q(&c.condition), q(&c.note)))
                .collect();
            fields.push(format!("  \"cancellations\": [\n{}\n  ]", items.join(",\n")));
        }
        if !self.options.is_empty() {
            let v = serde_json::to_string(&self.options).expect("options serialization");
            fields.push(format!("  \"options\": {}", v.replace(',', ", ").replace(':', ": ")));
        }
        let _ = write!(out, "{}\n}}\n", fields.join(",\n"));
        out
    }

    /// Replaces the value of an existing parameter.
    pub fn set_parameter(&mut self, name: &str, value: &str) -> Result<()> {
        match self.parameters.get_mut(name) {
            Some(v) => {
                *v = value.trim().to_string();
                Ok(())
            }
            None => Err(Error::Parse(format!("unknown parameter '{name}'"))),
        }
    }

    /// Evaluated parameters; a parameter may refer to others as long as
    /// there is no cycle.
    pub fn parameter_values(&self) -> Result<BTreeMap<String, Rational>> {
        let mut values: BTreeMap<String, Rational> = BTreeMap::new();
        let mut pending: Vec<(&String, &String)> = self.parameters.iter().collect();
        while !pending.is_empty() {
            let before = pending.len();
            pending.retain(|(k, v)| match eval_expr(v, &values) {
                Ok(x) => {
                    values.insert((*k).clone(), x);
                    false
                }
                Err(_) => true,
            });
            if pending.len() == before {
                let (k, v) = pending[0];
                let err = eval_expr(v, &values).unwrap_err();
                return Err(Error::Parse(format!("parameter '{k}': {err}")));
            }
        }
        Ok(values)
    }

    fn matrix(&self, key: &str, rows: &[Vec<String>], env: &BTreeMap<String, Rational>) -> Result<RatMatrix> {
        if rows.len() != self.n {
            return Err(Error::Parse(format!("{key}: expected {} rows, found {}", self.n, rows.len())));
        }
        let mut out = Vec::with_capacity(self.n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != self.n {
                return Err(Error::Parse(format!("{key}[{i}]: expected {} entries, found {}", self.n, row.len())));
            }
            let mut r = Vec::with_capacity(self.n);
            for (j, e) in row.iter().enumerate() {
                r.push(eval_expr(e, env).map_err(|m| Error::Parse(format!("{key}[{i}][{j}] = {e:?}: {m}")))?);
            }
            out.push(r);
        }
        Ok(RatMatrix::from_rows(out))
    }

    /// Evaluates the entries and validates the structure, naming the first
    /// offending entry on failure.
    pub fn to_system(&self) -> Result<SystemSpec> {
        if self.n == 0 || self.n > MAX_DIMENSION {
            return Err(Error::InvalidSystem(format!("dimension {} outside 1..={MAX_DIMENSION}", self.n)));
        }
        let env = self.parameter_values()?;
        let a = self.matrix("A", &self.a, &env)?;
        let ba = self.matrix("Ba", &self.ba, &env)?;
        let bs = self.matrix("Bs", &self.bs, &env)?;
        SystemSpec::new(self.name.clone(), a, ba, bs)
    }

    /// Cancellation conditions that hold exactly at the current parameters.
    pub fn active_cancellations(&self) -> Result<Vec<&CancellationCondition>> {
        let env = self.parameter_values()?;
        let mut out = Vec::new();
        for c in &self.cancellations {
            let (l, r) = c
                .condition
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("condition {:?} has no '='", c.condition)))?;
            let lv = eval_expr(l, &env).map_err(|m| Error::Parse(format!("condition {:?}: {m}", c.condition)))?;
            let rv = eval_expr(r, &env).map_err(|m| Error::Parse(format!("condition {:?}: {m}", c.condition)))?;
            if lv == rv {
                out.push(c);
            }
        }
        Ok(out)
    }

    /// Builds a file from numeric matrices, writing entries in lowest terms.
    pub fn from_system(sys: &SystemSpec) -> Self {
        let rows = |m: &RatMatrix| -> Vec<Vec<String>> {
            (0..m.rows()).map(|i| m.row(i).iter().map(format_rational).collect()).collect()
        };
        SystemFile {
            name: sys.label.clone(),
            description: String::new(),
            n: sys.n,
            parameters: BTreeMap::new(),
            a: rows(&sys.a),
            ba: rows(&sys.ba),
            bs: rows(&sys.bs),
            cancellations: Vec::new(),
            options: AnalysisOptions::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Token {
    Num(Rational),
    Ident(String),
    Op(char),
}

fn tokenize(s: &str) -> std::result::Result<Vec<Token>, String> {
    let chars: Vec<char> = s.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            let lit: String = chars[start..i].iter().collect();
            out.push(Token::Num(parse_rational(&lit).map_err(|e| e.0)?));
        } else if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push(Token::Ident(chars[start..i].iter().collect()));
        } else if "+-*/^()".contains(c) {
            out.push(Token::Op(c));
            i += 1;
        } else {
            return Err(format!("unexpected character '{c}'"));
        }
    }
    Ok(out)
}

struct Parser<'a> {
    tokens: Vec<Token>,
    pos: usize,
    env: &'a BTreeMap<String, Rational>,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn eat(&mut self, op: char) -> bool {
        if self.peek() == Some(&Token::Op(op)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> std::result::Result<Rational, String> {
        let mut v = self.term()?;
        loop {
            if self.eat('+') {
                v += self.term()?;
            } else if self.eat('-') {
                v -= self.term()?;
            } else {
                return Ok(v);
            }
        }
    }

    fn term(&mut self) -> std::result::Result<Rational, String> {
        let mut v = self.unary()?;
        loop {
            if self.eat('*') {
                v *= self.unary()?;
            } else if self.eat('/') {
                let d = self.unary()?;
                if d.is_zero() {
                    return Err("division by zero".into());
                }
                v /= d;
            } else {
                return Ok(v);
            }
        }
    }

    fn unary(&mut self) -> std::result::Result<Rational, String> {
        if self.eat('-') {
            return Ok(-self.unary()?);
        }
        if self.eat('+') {
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> std::result::Result<Rational, String> {
        let base = self.atom()?;
        if !self.eat('^') {
            return Ok(base);
        }
        let e = self.unary()?;
        if !e.is_integer() || e.abs() > Rational::from_integer(64.into()) {
            return Err(format!("exponent {} must be an integer of size at most 64", format_rational(&e)));
        }
        let k: i32 = e.to_integer().try_into().map_err(|_| "exponent out of range".to_string())?;
        if k < 0 && base.is_zero() {
            return Err("division by zero".into());
        }
        let mut out = Rational::one();
        for _ in 0..k.unsigned_abs() {
            out *= &base;
        }
        Ok(if k < 0 { out.recip() } else { out })
    }

    fn atom(&mut self) -> std::result::Result<Rational, String> {
        match self.tokens.get(self.pos).cloned() {
            Some(Token::Num(v)) => {
                self.pos += 1;
                Ok(v)
            }
            Some(Token::Ident(name)) => {
                self.pos += 1;
                self.env.get(&name).cloned().ok_or_else(|| format!("unknown parameter '{name}'"))
            }
            Some(Token::Op('(')) => {
                self.pos += 1;
                let v = self.expr()?;
                if !self.eat(')') {
                    return Err("missing ')'".into());
                }
                Ok(v)
            }
            Some(t) => Err(format!("unexpected token {t:?}")),
            None => Err("unexpected end of expression".into()),
        }
    }
}

/// Evaluates a rational expression over named parameters exactly.
pub fn eval_expr(s: &str, env: &BTreeMap<String, Rational>) -> std::result::Result<Rational, String> {
    let tokens = tokenize(s)?;
    if tokens.is_empty() {
        return Err("empty expression".into());
    }
    let mut p = Parser { tokens, pos: 0, env };
    let v = p.expr()?;
    if p.pos != p.tokens.len() {
        return Err(format!("trailing input after position {}", p.pos));
    }
    Ok(v)
}

/// Parses `name=value` overrides as given on the command line.
pub fn parse_override(s: &str) -> Result<(String, String)> {
    let (k, v) = s.split_once('=').ok_or_else(|| Error::Parse(format!("expected name=value, got {s:?}")))?;
    let k = k.trim();
    if k.is_empty() {
        return Err(Error::Parse(format!("empty parameter name in {s:?}")));
    }
    eval_expr(v, &BTreeMap::new()).map_err(|m| Error::Parse(format!("{k}: {m}")))?;
    Ok((k.to_string(), v.trim().to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polymat::{int, rat};

    fn env(pairs: &[(&str, Rational)]) -> BTreeMap<String, Rational> {
        pairs.iter().map(|(k, v)| (k.to_string(), v.clone())).collect()
    }

    #[test]
    fn expressions_are_exact() {
        let e = env(&[("a", rat(3, 5)), ("b", int(2))]);
        assert_eq!(eval_expr("a^2 + (4/5)^2", &e).unwrap(), int(1));
        assert_eq!(eval_expr("-a*b", &e).unwrap(), rat(-6, 5));
        assert_eq!(eval_expr("1/b^2", &e).unwrap(), rat(1, 4));
        assert_eq!(eval_expr("0.25", &e).unwrap(), rat(1, 4));
        assert_eq!(eval_expr("2^-2", &e).unwrap(), rat(1, 4));
        assert_eq!(eval_expr("-2^2", &e).unwrap(), int(-4));
    }

    #[test]
    fn malformed_expressions_are_rejected() {
        let e = env(&[]);
        for bad in ["", "1/0", "x", "(1", "1 2", "2^(1/2)", "3 $ 4"] {
            assert!(eval_expr(bad, &e).is_err(), "{bad}");
        }
    }

    fn file(a01: &str) -> SystemFile {
        SystemFile {
            name: "t".into(),
            description: String::new(),
            n: 2,
            parameters: [("k".to_string(), "1".to_string())].into_iter().collect(),
            a: vec![vec!["0".into(), a01.into()], vec!["k".into(), "0".into()]],
            ba: vec![vec!["0".into(), "0".into()], vec!["0".into(), "0".into()]],
            bs: vec![vec!["1".into(), "0".into()], vec!["0".into(), "0".into()]],
            cancellations: vec![CancellationCondition { condition: "k^2 = 1".into(), note: "unit".into() }],
            options: AnalysisOptions::default(),
        }
    }

    #[test]
    fn load_errors_name_the_entry() {
        let err = file("2").to_system().unwrap_err().to_string();
        assert!(err.contains("A[0][1]"), "{err}");
        let err = file("q").to_system().unwrap_err().to_string();
        assert!(err.contains("A[0][1]") && err.contains("unknown parameter"), "{err}");
        assert!(file("k").to_system().is_ok());
    }

    #[test]
    fn json_round_trip_is_byte_identical() {
        let f = file("k");
        let text = f.to_json();
        let back = SystemFile::from_json(&text).unwrap();
        assert_eq!(back, f);
        assert_eq!(back.to_json(), text);
    }

    #[test]
    fn overrides_and_conditions() {
        let mut f = file("k");
        assert_eq!(f.active_cancellations().unwrap().len(), 1);
        f.set_parameter("k", "2").unwrap();
        assert!(f.active_cancellations().unwrap().is_empty());
        assert!(f.set_parameter("z", "1").is_err());
        assert_eq!(parse_override("a = 3/5").unwrap(), ("a".into(), "3/5".into()));
        assert!(parse_override("a").is_err());
    }
}

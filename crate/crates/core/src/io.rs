//! Reading arc-set instances, points and cuts from JSON or plain text.
//!
//! The text instance format is one field per line, `#` starting a comment:
//!
//! ```text
//! demands 11 15 24 50
//! capacities 100
//! existing 0
//! x 0.3 0.5 0.9 0.1
//! y 0.38
//! ```
//!
//! Cuts are written as linear inequalities such as `x1 + x4 <= y` or `(1/3) x1 + x2 <= 3 y2 - 1`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::arcset::{ArcSetInstance, CutInequality, FracPoint};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub struct ParseError {
    pub line: Option<usize>,
    pub field: Option<String>,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(line) = self.line {
            write!(f, "line {line}: ")?;
        }
        if let Some(field) = &self.field {
            write!(f, "field `{field}`: ")?;
        }
        f.write_str(&self.message)
    }
}

impl ParseError {
    fn new(line: Option<usize>, field: Option<&str>, message: impl Into<String>) -> Self {
        Self { line, field: field.map(str::to_string), message: message.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointSpec {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

/// The on-disk shape of an instance file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArcSetFile {
    pub demands: Vec<i64>,
    pub capacities: Vec<i64>,
    pub existing: i64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub point: Option<PointSpec>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParsedInstance {
    pub instance: ArcSetInstance,
    pub point: Option<FracPoint>,
}

fn json_error(e: serde_json::Error) -> ParseError {
    ParseError::new(Some(e.line()), None, format!("column {}: {e}", e.column()))
}

/// Parses either format; JSON is recognized by a leading `{`.
pub fn parse_instance(text: &str) -> Result<ParsedInstance, ParseError> {
    let file = if text.trim_start().starts_with('{') {
        serde_json::from_str::<ArcSetFile>(text).map_err(json_error)?
    } else {
        parse_text_instance(text)?
    };
    let instance = ArcSetInstance::new(file.demands, file.capacities, file.existing)
        .map_err(|e| ParseError::new(None, None, e.to_string()))?;
    let point = match file.point {
        Some(p) => {
            let p = FracPoint::new(p.x, p.y);
            p.check_dims(&instance).map_err(|e| ParseError::new(None, Some("point"), e.to_string()))?;
            Some(p)
        }
        None => None,
    };
    Ok(ParsedInstance { instance, point })
}

fn parse_text_instance(text: &str) -> Result<ArcSetFile, ParseError> {
    let mut demands = None;
    let mut capacities = None;
    let mut existing = None;
    let mut x = None;
    let mut y = None;
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, rest) = content.split_once(|c: char| c.is_whitespace() || c == ':' || c == '=').unwrap_or((content, ""));
        let values: Vec<&str> =
            rest.split(|c: char| c.is_whitespace() || c == ',').filter(|s| !s.is_empty() && *s != ":" && *s != "=").collect();
        let ints = |field: &str| -> Result<Vec<i64>, ParseError> {
            values
                .iter()
                .map(|v| v.parse::<i64>().map_err(|_| ParseError::new(Some(line), Some(field), format!("`{v}` is not an integer"))))
                .collect()
        };
        let reals = |field: &str| -> Result<Vec<f64>, ParseError> {
            values
                .iter()
                .map(|v| match v.parse::<f64>() {
                    Ok(f) if f.is_finite() => Ok(f),
                    _ => Err(ParseError::new(Some(line), Some(field), format!("`{v}` is not a finite number"))),
                })
                .collect()
        };
        match key {
            "demands" => demands = Some(ints(key)?),
            "capacities" => capacities = Some(ints(key)?),
            "existing" => {
                let v = ints(key)?;
                if v.len() != 1 {
                    return Err(ParseError::new(Some(line), Some(key), "expected exactly one integer"));
                }
                existing = Some(v[0]);
            }
            "x" => x = Some(reals(key)?),
            "y" => y = Some(reals(key)?),
            other => return Err(ParseError::new(Some(line), Some(other), "unknown field")),
        }
    }
    let missing = |f: &str| ParseError::new(None, Some(f), "missing");
    let point = match (x, y) {
        (Some(x), Some(y)) => Some(PointSpec { x, y }),
        (None, None) => None,
        (Some(_), None) => return Err(missing("y")),
        (None, Some(_)) => return Err(missing("x")),
    };
    Ok(ArcSetFile {
        demands: demands.ok_or_else(|| missing("demands"))?,
        capacities: capacities.ok_or_else(|| missing("capacities"))?,
        existing: existing.unwrap_or(0),
        point,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CutFile {
    alpha: Vec<f64>,
    beta: Vec<f64>,
    gamma: f64,
}

/// Parses a cut as JSON `{alpha, beta, gamma}` or as an inequality over `x1..` and `y1..`.
pub fn parse_cut(text: &str, commodities: usize, facilities: usize) -> Result<CutInequality, ParseError> {
    let trimmed = text.trim();
    if trimmed.starts_with('{') {
        let f: CutFile = serde_json::from_str(trimmed).map_err(json_error)?;
        if f.alpha.len() != commodities {
            return Err(ParseError::new(None, Some("alpha"), format!("expected {commodities} entries")));
        }
        if f.beta.len() != facilities {
            return Err(ParseError::new(None, Some("beta"), format!("expected {facilities} entries")));
        }
        return Ok(CutInequality::new(f.alpha, f.beta, f.gamma));
    }
    let (op_at, op_len, flip) = ["<=", "=<", "≤", ">=", "=>", "≥"]
        .iter()
        .find_map(|op| trimmed.find(op).map(|i| (i, op.len(), op.contains('>') || *op == "≥")))
        .ok_or_else(|| ParseError::new(None, None, "expected `<=` or `>=`"))?;
    let left = linear(&trimmed[..op_at], commodities, facilities)?;
    let right = linear(&trimmed[op_at + op_len..], commodities, facilities)?;
    // left - right <= 0, or >= 0 when flipped
    let sign = if flip { -1.0 } else { 1.0 };
    let diff = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(l, r)| sign * (l - r)).collect::<Vec<f64>>();
    let alpha = diff(&left.x, &right.x);
    let beta: Vec<f64> = diff(&left.y, &right.y).into_iter().map(|v| -v).collect();
    let gamma = -sign * (left.constant - right.constant);
    // adding zero turns -0.0 into 0.0
    let plain = |v: Vec<f64>| v.into_iter().map(|c| c + 0.0).collect();
    Ok(CutInequality::new(plain(alpha), plain(beta), gamma + 0.0))
}

struct Linear {
    x: Vec<f64>,
    y: Vec<f64>,
    constant: f64,
}

fn linear(side: &str, nq: usize, nt: usize) -> Result<Linear, ParseError> {
    let err = |m: String| ParseError::new(None, None, m);
    let mut out = Linear { x: vec![0.0; nq], y: vec![0.0; nt], constant: 0.0 };
    let chars: Vec<char> = side.chars().filter(|c| !c.is_whitespace() && *c != '*').collect();
    let mut i = 0;
    let mut any = false;
    while i < chars.len() {
        let mut sign = 1.0;
        while i < chars.len() && (chars[i] == '+' || chars[i] == '-') {
            if chars[i] == '-' {
                sign = -sign;
            }
            i += 1;
        }
        let number = |i: &mut usize| -> Option<f64> {
            let start = *i;
            while *i < chars.len() && (chars[*i].is_ascii_digit() || chars[*i] == '.') {
                *i += 1;
            }
            (start < *i).then(|| chars[start..*i].iter().collect::<String>().parse().ok()).flatten()
        };
        let fraction = |i: &mut usize| -> Result<Option<f64>, ParseError> {
            let Some(p) = number(i) else { return Ok(None) };
            if *i < chars.len() && chars[*i] == '/' {
                *i += 1;
                let q = number(i).ok_or_else(|| err("expected a denominator".into()))?;
                if q == 0.0 {
                    return Err(err("zero denominator".into()));
                }
                return Ok(Some(p / q));
            }
            Ok(Some(p))
        };
        let coef = if i < chars.len() && chars[i] == '(' {
            i += 1;
            let v = fraction(&mut i)?.ok_or_else(|| err("expected a number after `(`".into()))?;
            if i >= chars.len() || chars[i] != ')' {
                return Err(err("missing `)`".into()));
            }
            i += 1;
            Some(v)
        } else {
            fraction(&mut i)?
        };
        let var = if i < chars.len() && (chars[i] == 'x' || chars[i] == 'y') {
            let kind = chars[i];
            i += 1;
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let digits: String = chars[start..i].iter().collect();
            let index = if digits.is_empty() {
                if kind == 'y' && nt == 1 {
                    0
                } else {
                    return Err(err(format!("`{kind}` needs an index")));
                }
            } else {
                let k: usize = digits.parse().map_err(|_| err(format!("bad index `{digits}`")))?;
                if k == 0 {
                    return Err(err("indices start at 1".into()));
                }
                k - 1
            };
            Some((kind, index))
        } else {
            None
        };
        if coef.is_none() && var.is_none() {
            let rest: String = chars[i..].iter().collect();
            return Err(err(format!("unexpected `{rest}`")));
        }
        let value = sign * coef.unwrap_or(1.0);
        match var {
            Some(('x', k)) if k < nq => out.x[k] += value,
            Some(('y', k)) if k < nt => out.y[k] += value,
            Some((kind, k)) => return Err(err(format!("`{kind}{}` is out of range", k + 1))),
            None => out.constant += value,
        }
        any = true;
        if i < chars.len() && chars[i] != '+' && chars[i] != '-' {
            let rest: String = chars[i..].iter().collect();
            return Err(err(format!("unexpected `{rest}`")));
        }
    }
    if !any {
        return Err(err("empty side".into()));
    }
    Ok(out)
}

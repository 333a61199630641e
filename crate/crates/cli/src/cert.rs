//! Line-oriented certificates.
//!
//! ```text
//! sumsetlab-certificate 1
//! command: ip-extract
//! tool-version: 0.1.0
//! inputs-digest: <sha256 of the command, input.* and param.* lines>
//! input.window: 0 100000
//! input.set: 0..100000/5
//! param.depth: 12
//! status: success
//! verified: true
//! result.base: 5 10 15
//! ```
//!
//! Element lists are written as space-separated tokens, where `a..b/s` is the
//! progression `a, a+s, …, b` and `a..b` abbreviates step 1.

use std::fmt::Display;

use sha2::{Digest, Sha256};
use thiserror::Error;

pub const HEADER: &str = "sumsetlab-certificate 1";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CertError {
    #[error("schema mismatch: expected `{HEADER}`, found `{0}`")]
    SchemaMismatch(String),
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("missing field `{0}`")]
    Missing(String),
    #[error("field `{key}`: {message}")]
    BadField { key: String, message: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Certificate {
    fields: Vec<(String, String)>,
}

impl Certificate {
    pub fn new(command: &str) -> Self {
        Self {
            fields: vec![
                ("command".into(), command.into()),
                ("tool-version".into(), TOOL_VERSION.into()),
            ],
        }
    }

    pub fn push(&mut self, key: impl Into<String>, value: impl Display) -> &mut Self {
        self.fields.push((key.into(), value.to_string()));
        self
    }

    pub fn input(&mut self, key: &str, value: impl Display) -> &mut Self {
        self.push(format!("input.{key}"), value)
    }

    pub fn param(&mut self, key: &str, value: impl Display) -> &mut Self {
        self.push(format!("param.{key}"), value)
    }

    pub fn result(&mut self, key: &str, value: impl Display) -> &mut Self {
        self.push(format!("result.{key}"), value)
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.fields.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn require(&self, key: &str) -> Result<&str, CertError> {
        self.get(key).ok_or_else(|| CertError::Missing(key.to_string()))
    }

    pub fn parse_field<T: std::str::FromStr>(&self, key: &str) -> Result<T, CertError> {
        let raw = self.require(key)?;
        raw.parse().map_err(|_| CertError::BadField {
            key: key.to_string(),
            message: format!("cannot parse `{raw}`"),
        })
    }

    pub fn elems(&self, key: &str) -> Result<Vec<i64>, CertError> {
        parse_elems(self.require(key)?).map_err(|message| CertError::BadField {
            key: key.to_string(),
            message,
        })
    }

    /// Fields whose key starts with `prefix`, in order.
    pub fn with_prefix<'a>(&'a self, prefix: &'a str) -> impl Iterator<Item = (&'a str, &'a str)> + 'a {
        self.fields
            .iter()
            .filter(move |(k, _)| k.starts_with(prefix))
            .map(|(k, v)| (k.as_str(), v.as_str()))
    }

    /// SHA-256 over the command and every `input.*` / `param.*` line.
    pub fn compute_digest(&self) -> String {
        let mut h = Sha256::new();
        for (k, v) in &self.fields {
            if k == "command" || k.starts_with("input.") || k.starts_with("param.") {
                h.update(format!("{k}: {v}\n").as_bytes());
            }
        }
        hex::encode(h.finalize())
    }

    /// Inserts `inputs-digest` after `tool-version`; call once all inputs and
    /// parameters are in place.
    pub fn seal(&mut self) {
        let digest = self.compute_digest();
        self.fields.retain(|(k, _)| k != "inputs-digest");
        self.fields.insert(2, ("inputs-digest".into(), digest));
    }

    pub fn render(&self) -> String {
        let mut out = String::from(HEADER);
        out.push('\n');
        for (k, v) in &self.fields {
            out.push_str(k);
            out.push_str(": ");
            out.push_str(v);
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self, CertError> {
        let mut lines = text.lines().enumerate();
        let first = lines.next().map(|(_, l)| l.trim_end()).unwrap_or("");
        if first != HEADER {
            return Err(CertError::SchemaMismatch(first.to_string()));
        }
        let mut fields = Vec::new();
        for (i, line) in lines {
            if line.trim().is_empty() {
                continue;
            }
            let (k, v) = line.split_once(": ").or_else(|| line.strip_suffix(':').map(|k| (k, ""))).ok_or_else(|| {
                CertError::Malformed {
                    line: i + 1,
                    message: format!("expected `key: value`, found `{line}`"),
                }
            })?;
            fields.push((k.to_string(), v.to_string()));
        }
        let cert = Self { fields };
        cert.require("command")?;
        Ok(cert)
    }
}

/// Compresses a sorted list into runs; progressions of three or more terms
/// become `a..b/s`.
pub fn fmt_elems(v: &[i64]) -> String {
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < v.len() {
        if i + 2 < v.len() {
            let step = v[i + 1] - v[i];
            let mut j = i + 1;
            while j + 1 < v.len() && v[j + 1] - v[j] == step {
                j += 1;
            }
            if j >= i + 2 && step > 0 {
                tokens.push(if step == 1 {
                    format!("{}..{}", v[i], v[j])
                } else {
                    format!("{}..{}/{step}", v[i], v[j])
                });
                i = j + 1;
                continue;
            }
        }
        tokens.push(v[i].to_string());
        i += 1;
    }
    tokens.join(" ")
}

/// Lists in selection order, never compressed.
pub fn fmt_list<E: Display>(elems: &[E]) -> String {
    elems.iter().map(|e| e.to_string()).collect::<Vec<_>>().join(" ")
}

pub fn parse_elems(text: &str) -> Result<Vec<i64>, String> {
    let mut out = Vec::new();
    for tok in text.split_whitespace() {
        let bad = || format!("bad element token `{tok}`");
        match tok.split_once("..") {
            Some((a, rest)) => {
                let (b, s) = rest.split_once('/').unwrap_or((rest, "1"));
                let a: i64 = a.parse().map_err(|_| bad())?;
                let b: i64 = b.parse().map_err(|_| bad())?;
                let s: i64 = s.parse().map_err(|_| bad())?;
                if s <= 0 || b < a || (b - a) % s != 0 {
                    return Err(bad());
                }
                out.extend((a..=b).step_by(s as usize));
            }
            None => out.push(tok.parse().map_err(|_| bad())?),
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn element_runs_round_trip() {
        let v: Vec<i64> = vec![-3, 0, 5, 10, 15, 16, 17, 18, 40, 42];
        let s = fmt_elems(&v);
        assert_eq!(s, "-3 0..15/5 16..18 40 42");
        assert_eq!(parse_elems(&s).unwrap(), v);
        assert_eq!(fmt_elems(&[]), "");
        assert!(parse_elems("3..1").is_err());
        assert!(parse_elems("0..5/2").is_err());
    }

    #[test]
    fn render_parse_round_trip() {
        let mut c = Certificate::new("ladder");
        c.param("exact-bound", 40).result("value", 8);
        c.seal();
        let text = c.render();
        let back = Certificate::parse(&text).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.compute_digest(), back.require("inputs-digest").unwrap());
        assert!(matches!(Certificate::parse("other 2\n"), Err(CertError::SchemaMismatch(_))));
    }
}

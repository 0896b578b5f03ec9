//! Plain-text `key = value` reports with stable number formatting.

use std::fmt::Write;

use crate::witness::{Scope, SubgradientWitness, Verification};

/// Shortest round-trip decimal; `inf`, `-inf` and `nan` for the rest.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x == f64::INFINITY {
        "inf".into()
    } else if x == f64::NEG_INFINITY {
        "-inf".into()
    } else if x == 0.0 {
        "0".into()
    } else {
        format!("{x:?}")
    }
}

pub fn fmt_point(p: &[f64]) -> String {
    let parts: Vec<String> = p.iter().map(|&x| fmt_f64(x)).collect();
    format!("[{}]", parts.join(", "))
}

/// Ordered sections of ordered fields.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Report {
    sections: Vec<(String, Vec<(String, String)>)>,
}

impl Report {
    pub fn new() -> Self {
        Self::default()
    }

    /// Starts a new section; later fields go into it.
    pub fn section(&mut self, name: &str) -> &mut Self {
        self.sections.push((name.to_string(), Vec::new()));
        self
    }

    fn current(&mut self) -> &mut Vec<(String, String)> {
        if self.sections.is_empty() {
            self.sections.push((String::new(), Vec::new()));
        }
        &mut self.sections.last_mut().unwrap().1
    }

    pub fn text(&mut self, key: &str, value: impl std::fmt::Display) -> &mut Self {
        self.current().push((key.to_string(), value.to_string()));
        self
    }

    pub fn num(&mut self, key: &str, value: f64) -> &mut Self {
        self.text(key, fmt_f64(value))
    }

    pub fn point(&mut self, key: &str, value: &[f64]) -> &mut Self {
        self.text(key, fmt_point(value))
    }

    /// Fields of a witness, each key prefixed with `prefix`.
    pub fn witness(&mut self, prefix: &str, w: &SubgradientWitness) -> &mut Self {
        let k = |s: &str| format!("{prefix}{s}");
        self.point(&k("point"), &w.point[..w.dim]);
        self.num(&k("a"), w.a);
        self.point(&k("v"), w.v_slice());
        self.num(&k("eps"), w.eps);
        let scope = match w.scope {
            Scope::Global => "global".to_string(),
            Scope::Local(r) => format!("local({})", fmt_f64(r)),
        };
        self.text(&k("scope"), scope);
        let status = match w.status {
            Verification::Unverified => "unverified",
            Verification::VerifiedOnGrid => "verified_on_grid",
            Verification::Refuted { .. } => "refuted",
        };
        self.text(&k("status"), status);
        let node = w.worst_node.map_or("none".to_string(), |n| n.to_string());
        self.text(&k("worst_violation_node"), node);
        self.num(&k("worst_violation_amount"), w.worst_amount)
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for (i, (name, fields)) in self.sections.iter().enumerate() {
            if !name.is_empty() {
                if i > 0 {
                    out.push('\n');
                }
                let _ = writeln!(out, "[{name}]");
            }
            for (k, v) in fields {
                let _ = writeln!(out, "{k} = {v}");
            }
        }
        out
    }
}

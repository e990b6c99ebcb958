//! Command reports: deterministic JSON and a plain-text rendering.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::{Error, ErrorKind};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ok,
    Error,
}

/// Exit codes shared by every command.
pub mod exit {
    pub const SUCCESS: i32 = 0;
    /// A verdict was reached and it is negative.
    pub const NEGATIVE: i32 = 1;
    pub const INPUT: i32 = 2;
    pub const MATH: i32 = 3;
    pub const NUMERICAL: i32 = 4;
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema: String,
    pub command: String,
    pub problem: String,
    pub seed: Option<u64>,
    pub status: Status,
    pub exit_code: i32,
    pub verdict: String,
    pub details: Value,
}

pub fn exit_code_for(e: &Error) -> i32 {
    match e.kind() {
        ErrorKind::Input => exit::INPUT,
        ErrorKind::Math => exit::MATH,
        ErrorKind::Numerical => exit::NUMERICAL,
    }
}

pub fn kind_name(e: &Error) -> &'static str {
    match e.kind() {
        ErrorKind::Input => "input",
        ErrorKind::Math => "math",
        ErrorKind::Numerical => "numerical",
    }
}

impl Report {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports serialize");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> crate::Result<Report> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "varseq {} [{}]", self.command, self.problem);
        let _ = writeln!(out, "verdict: {}", self.verdict);
        let _ = writeln!(out, "exit code: {}", self.exit_code);
        if let Some(seed) = self.seed {
            let _ = writeln!(out, "seed: {seed}");
        }
        render(&self.details, 0, &mut out);
        out
    }
}

fn scalar(v: &Value) -> Option<String> {
    match v {
        Value::Null => Some("-".into()),
        Value::Bool(b) => Some(if *b { "yes" } else { "no" }.into()),
        Value::Number(n) => Some(n.to_string()),
        Value::String(s) => Some(s.clone()),
        _ => None,
    }
}

fn render(v: &Value, depth: usize, out: &mut String) {
    let pad = "  ".repeat(depth);
    match v {
        Value::Object(map) => {
            for (k, v) in map {
                match scalar(v) {
                    Some(s) => {
                        let _ = writeln!(out, "{pad}{k}: {s}");
                    }
                    None if v.as_array().is_some_and(|a| a.is_empty()) => {
                        let _ = writeln!(out, "{pad}{k}: (none)");
                    }
                    None => {
                        let _ = writeln!(out, "{pad}{k}:");
                        render(v, depth + 1, out);
                    }
                }
            }
        }
        Value::Array(items) => {
            for item in items {
                match scalar(item) {
                    Some(s) => {
                        let _ = writeln!(out, "{pad}- {s}");
                    }
                    None => {
                        let _ = writeln!(out, "{pad}-");
                        render(item, depth + 1, out);
                    }
                }
            }
        }
        other => {
            let _ = writeln!(out, "{pad}{}", scalar(other).unwrap_or_default());
        }
    }
}

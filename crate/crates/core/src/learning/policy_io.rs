//! Text format for learned policies.
//!
//! ```text
//! # balkq policy v1
//! # model=il-o tables=5
//! il-o 0 E1:6:0 -2.70370370e0 -2.66296296e1
//! ```
//!
//! One record per state: model tag, table index (the robot for independent
//! learners, always 0 for the team learner), canonical state key, `q_join`,
//! `q_balk`. Values carry 9 significant digits. Records are sorted by table
//! then key so files diff cleanly.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::agent::QPolicy;
use super::qtable::QTable;
use super::state::{ModelKind, StateKey};
use crate::error::{Error, Result};

const HEADER: &str = "# balkq policy v1";

pub fn format_value(v: f64) -> String {
    format!("{v:.8e}")
}

pub fn policy_to_string(policy: &QPolicy) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{HEADER}");
    let _ = writeln!(out, "# model={} tables={}", policy.model, policy.tables.len());
    for (idx, table) in policy.tables.iter().enumerate() {
        for (key, [j, b]) in table.sorted() {
            let _ = writeln!(
                out,
                "{} {} {} {} {}",
                policy.model,
                idx,
                key,
                format_value(*j),
                format_value(*b)
            );
        }
    }
    out
}

pub fn parse_policy(text: &str, path: &Path) -> Result<QPolicy> {
    let err = |line: usize, reason: String| Error::PolicyFormat {
        path: path.to_path_buf(),
        line,
        reason,
    };
    let mut model: Option<ModelKind> = None;
    let mut n_tables: Option<usize> = None;
    let mut records = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let lineno = i + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            for field in comment.split_whitespace() {
                if let Some(m) = field.strip_prefix("model=") {
                    model = Some(m.parse().map_err(|e: Error| err(lineno, e.to_string()))?);
                } else if let Some(n) = field.strip_prefix("tables=") {
                    n_tables = Some(n.parse().map_err(|_| err(lineno, format!("bad table count `{n}`")))?);
                }
            }
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        let [tag, idx, key, j, b] = fields[..] else {
            return Err(err(lineno, format!("expected 5 fields, found {}", fields.len())));
        };
        let m: ModelKind = tag.parse().map_err(|e: Error| err(lineno, e.to_string()))?;
        match model {
            Some(prev) if prev != m => {
                return Err(err(lineno, format!("model {m} in a {prev} policy")));
            }
            _ => model = Some(m),
        }
        let idx: usize = idx.parse().map_err(|_| err(lineno, format!("bad table index `{idx}`")))?;
        let key = StateKey::parse(m, key).map_err(|e| err(lineno, e))?;
        let parse_q = |s: &str| {
            s.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| err(lineno, format!("bad value `{s}`")))
        };
        records.push((idx, key, [parse_q(j)?, parse_q(b)?]));
    }
    let model = model.ok_or_else(|| err(0, "no model tag found".into()))?;
    let needed = records.iter().map(|r| r.0 + 1).max().unwrap_or(0);
    let n = n_tables.unwrap_or(needed);
    if needed > n {
        return Err(err(0, format!("table index {} exceeds declared {n} tables", needed - 1)));
    }
    let mut tables = vec![QTable::new(); n];
    for (idx, key, values) in records {
        tables[idx].insert(key, values);
    }
    Ok(QPolicy { model, tables })
}

pub fn write_policy(policy: &QPolicy, path: &Path) -> Result<()> {
    fs::write(path, policy_to_string(policy)).map_err(|e| Error::io(path, e))
}

pub fn read_policy(path: &Path) -> Result<QPolicy> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_policy(&text, path)
}

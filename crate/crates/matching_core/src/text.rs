//! Line-oriented text format for the base market.
//!
//! ```text
//! students: a1 a2
//! schools: b1/1 b2/2
//! pref a1: b2 b1 @
//! pref b1: a1 @ a2
//! ```
//!
//! `@` marks the outside option. Agents left out of a list are appended after
//! the outside option in id order. Lines this module does not understand are
//! handed back to the caller so that extensions can interpret them.

use std::collections::HashMap;
use std::fmt::Write as _;

use thiserror::Error;

use crate::instance::{Instance, Partner};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct ParseError {
    /// 1-based line number, 0 when the problem is the input as a whole.
    pub line: usize,
    pub message: String,
}

impl ParseError {
    pub fn new(line: usize, message: impl Into<String>) -> Self {
        ParseError { line, message: message.into() }
    }
}

/// A parsed market plus the lines left for extensions, as (line number, trimmed text).
#[derive(Debug, Clone)]
pub struct BaseParse {
    pub instance: Instance,
    pub extra: Vec<(usize, String)>,
}

fn strip_comment(line: &str) -> &str {
    match line.find('#') {
        Some(i) => &line[..i],
        None => line,
    }
    .trim()
}

pub fn parse_base(text: &str) -> Result<BaseParse, ParseError> {
    let mut students: Option<(usize, Vec<String>)> = None;
    let mut schools: Option<(usize, Vec<(String, usize)>)> = None;
    let mut prefs: Vec<(usize, String, Vec<String>)> = Vec::new();
    let mut extra = Vec::new();

    for (i, raw) in text.lines().enumerate() {
        let ln = i + 1;
        let line = strip_comment(raw);
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix("students:") {
            if students.is_some() {
                return Err(ParseError::new(ln, "duplicate `students:` header"));
            }
            students = Some((ln, rest.split_whitespace().map(str::to_string).collect()));
        } else if let Some(rest) = line.strip_prefix("schools:") {
            if schools.is_some() {
                return Err(ParseError::new(ln, "duplicate `schools:` header"));
            }
            let mut list = Vec::new();
            for tok in rest.split_whitespace() {
                let (id, q) = match tok.split_once('/') {
                    Some((id, q)) => {
                        let q: usize = q.parse().map_err(|_| ParseError::new(ln, format!("bad quota in `{tok}`")))?;
                        (id, q)
                    }
                    None => (tok, 1),
                };
                if id.is_empty() {
                    return Err(ParseError::new(ln, format!("empty school id in `{tok}`")));
                }
                list.push((id.to_string(), q));
            }
            schools = Some((ln, list));
        } else if let Some(rest) = line.strip_prefix("pref ") {
            let Some((agent, list)) = rest.split_once(':') else {
                return Err(ParseError::new(ln, "expected `pref <agent>: ...`"));
            };
            prefs.push((ln, agent.trim().to_string(), list.split_whitespace().map(str::to_string).collect()));
        } else {
            extra.push((ln, line.to_string()));
        }
    }

    let (_, students) = students.ok_or_else(|| ParseError::new(0, "missing `students:` header"))?;
    let (sch_line, schools) = schools.ok_or_else(|| ParseError::new(0, "missing `schools:` header"))?;

    let mut sid = HashMap::new();
    for (a, s) in students.iter().enumerate() {
        if sid.insert(s.as_str(), a).is_some() {
            return Err(ParseError::new(0, format!("duplicate student id `{s}`")));
        }
    }
    let mut bid = HashMap::new();
    for (b, (s, _)) in schools.iter().enumerate() {
        if bid.insert(s.as_str(), b).is_some() {
            return Err(ParseError::new(sch_line, format!("duplicate school id `{s}`")));
        }
        if sid.contains_key(s.as_str()) {
            return Err(ParseError::new(sch_line, format!("id `{s}` used for both a student and a school")));
        }
    }

    let mut student_pref: Vec<Option<Vec<Partner>>> = vec![None; students.len()];
    let mut school_pref: Vec<Option<Vec<Partner>>> = vec![None; schools.len()];
    for (ln, agent, list) in prefs {
        let (slot, lookup, others) = if let Some(&a) = sid.get(agent.as_str()) {
            (&mut student_pref[a], &bid, schools.len())
        } else if let Some(&b) = bid.get(agent.as_str()) {
            (&mut school_pref[b], &sid, students.len())
        } else {
            return Err(ParseError::new(ln, format!("unknown agent `{agent}`")));
        };
        if slot.is_some() {
            return Err(ParseError::new(ln, format!("second preference line for `{agent}`")));
        }
        let mut seen = vec![false; others + 1];
        let mut out = Vec::with_capacity(others + 1);
        for tok in &list {
            let p = if tok == "@" {
                None
            } else {
                Some(
                    *lookup
                        .get(tok.as_str())
                        .ok_or_else(|| ParseError::new(ln, format!("unknown id `{tok}` in the list of `{agent}`")))?,
                )
            };
            let k = p.unwrap_or(others);
            if seen[k] {
                return Err(ParseError::new(ln, format!("`{tok}` listed twice by `{agent}`")));
            }
            seen[k] = true;
            out.push(p);
        }
        if !seen[others] {
            return Err(ParseError::new(ln, format!("missing outside marker `@` in the list of `{agent}`")));
        }
        for (x, s) in seen.iter().enumerate().take(others) {
            if !s {
                out.push(Some(x));
            }
        }
        *slot = Some(out);
    }

    let student_pref = student_pref
        .into_iter()
        .enumerate()
        .map(|(a, p)| p.ok_or_else(|| ParseError::new(0, format!("no preference line for student `{}`", students[a]))))
        .collect::<Result<Vec<_>, _>>()?;
    let school_pref = school_pref
        .into_iter()
        .enumerate()
        .map(|(b, p)| p.ok_or_else(|| ParseError::new(0, format!("no preference line for school `{}`", schools[b].0))))
        .collect::<Result<Vec<_>, _>>()?;

    let quota = schools.iter().map(|s| s.1).collect();
    let names = schools.into_iter().map(|s| s.0).collect();
    let instance = Instance::new(students, names, quota, student_pref, school_pref)
        .map_err(|e| ParseError::new(sch_line, e.to_string()))?;
    Ok(BaseParse { instance, extra })
}

/// Canonical text of the base market: every list is written in full.
pub fn write_base(inst: &Instance) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "students: {}", inst.students().join(" "));
    let schools: Vec<String> =
        (0..inst.num_schools()).map(|b| format!("{}/{}", inst.school_name(b), inst.quota(b))).collect();
    let _ = writeln!(s, "schools: {}", schools.join(" "));
    for a in 0..inst.num_students() {
        let list: Vec<&str> = inst.student_pref(a).iter().map(|p| p.map_or("@", |b| inst.school_name(b))).collect();
        let _ = writeln!(s, "pref {}: {}", inst.student_name(a), list.join(" "));
    }
    for b in 0..inst.num_schools() {
        let list: Vec<&str> = inst.school_pref(b).iter().map(|p| p.map_or("@", |a| inst.student_name(a))).collect();
        let _ = writeln!(s, "pref {}: {}", inst.school_name(b), list.join(" "));
    }
    s
}

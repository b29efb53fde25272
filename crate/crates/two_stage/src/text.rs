//! Scenario lines on top of the base market format.
//!
//! ```text
//! first
//! keep-students a1 a2
//! scenario J1 p=1/2
//! keep-students a1
//! keep-schools b1 b2
//! quota b2 1
//! depart-prob 1/4 seed 7
//! ```
//!
//! `first` and each `scenario` open a block that the following `keep-*` and
//! `quota` lines refine. A block without `keep-students` (or
//! `keep-schools`) keeps every student (or school). Without a `first` block
//! the first stage is the whole market. `depart-prob` replaces the explicit
//! scenarios by independent departures of every agent.

use std::fmt::Write as _;

use matching_core::{parse_base, write_base, Instance, ParseError};
use mincut_framework::Rational;

use crate::market::SubSpec;
use crate::TwoStageError;

#[derive(Debug, Clone, PartialEq)]
pub enum ScenarioSource {
    None,
    Explicit(Vec<(String, Rational, SubSpec)>),
    Departure { p: Rational, seed: u64 },
}

#[derive(Debug, Clone)]
pub struct TwoStageText {
    pub instance: Instance,
    pub first: SubSpec,
    pub source: ScenarioSource,
    pub extra: Vec<(usize, String)>,
}

#[derive(Default)]
struct Block {
    students: Option<Vec<usize>>,
    schools: Option<Vec<usize>>,
    quotas: Vec<(usize, usize)>,
}

impl Block {
    fn spec(self, inst: &Instance) -> SubSpec {
        SubSpec::new(
            self.students.unwrap_or_else(|| (0..inst.num_students()).collect()),
            self.schools.unwrap_or_else(|| (0..inst.num_schools()).collect()),
            self.quotas,
        )
    }
}

fn parse_prob(ln: usize, tok: &str) -> Result<Rational, ParseError> {
    let p: Rational = tok.parse().map_err(|_| ParseError::new(ln, format!("`{tok}` is not a rational")))?;
    if p < Rational::from_integer(0.into()) || p > Rational::from_integer(1.into()) {
        return Err(ParseError::new(ln, format!("`{tok}` is not a probability")));
    }
    Ok(p)
}

pub fn parse_two_stage_text(text: &str) -> Result<TwoStageText, TwoStageError> {
    let parsed = parse_base(text)?;
    let lines = parse_scenario_lines(&parsed.instance, parsed.extra)?;
    Ok(TwoStageText { instance: parsed.instance, first: lines.first, source: lines.source, extra: lines.rest })
}

/// The two-stage part of a file.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioLines {
    pub first: SubSpec,
    pub source: ScenarioSource,
    /// Lines that are not two-stage lines.
    pub rest: Vec<(usize, String)>,
}

/// Reads the two-stage lines among `lines` and hands back the rest.
pub fn parse_scenario_lines(inst: &Instance, lines: Vec<(usize, String)>) -> Result<ScenarioLines, TwoStageError> {
    let mut first: Option<Block> = None;
    let mut scenarios: Vec<(String, Rational, Block)> = Vec::new();
    let mut departure = None;
    // Which block the next refinement line belongs to: None, first, or a scenario.
    let mut current: Option<Option<usize>> = None;
    let mut extra = Vec::new();
    for (ln, line) in lines {
        let words: Vec<&str> = line.split_whitespace().collect();
        match words[0] {
            "first" => {
                if words.len() != 1 || first.is_some() {
                    return Err(ParseError::new(ln, "expected one bare `first` line").into());
                }
                first = Some(Block::default());
                current = Some(None);
            }
            "scenario" => {
                let [_, name, p] = words[..] else {
                    return Err(ParseError::new(ln, "expected `scenario <name> p=<rational>`").into());
                };
                let p = p.strip_prefix("p=").ok_or_else(|| ParseError::new(ln, "expected `p=<rational>`"))?;
                if scenarios.iter().any(|s| s.0 == name) {
                    return Err(ParseError::new(ln, format!("duplicate scenario `{name}`")).into());
                }
                scenarios.push((name.to_string(), parse_prob(ln, p)?, Block::default()));
                current = Some(Some(scenarios.len() - 1));
            }
            "depart-prob" => {
                let [_, p, "seed", s] = words[..] else {
                    return Err(ParseError::new(ln, "expected `depart-prob <p> seed <s>`").into());
                };
                let seed = s.parse().map_err(|_| ParseError::new(ln, format!("bad seed `{s}`")))?;
                if departure.is_some() {
                    return Err(ParseError::new(ln, "second `depart-prob` line").into());
                }
                departure = Some((ln, parse_prob(ln, p)?, seed));
            }
            "keep-students" | "keep-schools" | "quota" => {
                let block = match current {
                    None => return Err(ParseError::new(ln, format!("`{}` outside a block", words[0])).into()),
                    Some(None) => first.as_mut().unwrap(),
                    Some(Some(i)) => &mut scenarios[i].2,
                };
                match words[0] {
                    "keep-students" => {
                        let ids = words[1..]
                            .iter()
                            .map(|id| {
                                inst.student_index(id)
                                    .ok_or_else(|| ParseError::new(ln, format!("unknown student `{id}`")))
                            })
                            .collect::<Result<Vec<_>, _>>()?;
                        if block.students.replace(ids).is_some() {
                            return Err(ParseError::new(ln, "second `keep-students` line in a block").into());
                        }
                    }
                    "keep-schools" => {
                        let ids = words[1..]
                            .iter()
                            .map(|id| {
                                inst.school_index(id)
                                    .ok_or_else(|| ParseError::new(ln, format!("unknown school `{id}`")))
                            })
                            .collect::<Result<Vec<_>, _>>()?;
                        if block.schools.replace(ids).is_some() {
                            return Err(ParseError::new(ln, "second `keep-schools` line in a block").into());
                        }
                    }
                    _ => {
                        let [_, b, q] = words[..] else {
                            return Err(ParseError::new(ln, "expected `quota <school> <q>`").into());
                        };
                        let b =
                            inst.school_index(b).ok_or_else(|| ParseError::new(ln, format!("unknown school `{b}`")))?;
                        let q: usize = q.parse().map_err(|_| ParseError::new(ln, format!("bad quota `{q}`")))?;
                        if q == 0 {
                            return Err(ParseError::new(ln, "quota must be positive").into());
                        }
                        block.quotas.push((b, q));
                    }
                }
            }
            _ => extra.push((ln, line)),
        }
    }
    for block in scenarios.iter().map(|s| &s.2).chain(&first) {
        if let Some(schools) = &block.schools {
            if let Some(&(b, _)) = block.quotas.iter().find(|(b, _)| !schools.contains(b)) {
                return Err(
                    ParseError::new(0, format!("quota for `{}` which the block drops", inst.school_name(b))).into()
                );
            }
        }
    }
    let source = match (departure, scenarios.is_empty()) {
        (Some((ln, _, _)), false) => {
            return Err(ParseError::new(ln, "`depart-prob` cannot be combined with scenarios").into())
        }
        (Some((_, p, seed)), true) => ScenarioSource::Departure { p, seed },
        (None, true) => ScenarioSource::None,
        (None, false) => {
            ScenarioSource::Explicit(scenarios.into_iter().map(|(n, p, b)| (n, p, b.spec(inst))).collect())
        }
    };
    let first = first.map_or_else(|| SubSpec::full(inst), |b| b.spec(inst));
    Ok(ScenarioLines { first, source, rest: extra })
}

fn write_block(s: &mut String, inst: &Instance, spec: &SubSpec) {
    if spec.students.len() != inst.num_students() {
        let ids: Vec<&str> = spec.students.iter().map(|&a| inst.student_name(a)).collect();
        let _ = writeln!(s, "keep-students {}", ids.join(" "));
    }
    if spec.schools.len() != inst.num_schools() {
        let ids: Vec<&str> = spec.schools.iter().map(|&b| inst.school_name(b)).collect();
        let _ = writeln!(s, "keep-schools {}", ids.join(" "));
    }
    for &(b, q) in &spec.quotas {
        let _ = writeln!(s, "quota {} {q}", inst.school_name(b));
    }
}

/// Canonical text: the base market, then the first block when it is not the
/// whole market, then the scenarios or the departure line.
pub fn write_two_stage_text(t: &TwoStageText) -> String {
    let mut s = write_base(&t.instance);
    s.push_str(&write_scenario_lines(&t.instance, &t.first, &t.source));
    s
}

/// The two-stage lines alone, in the order [`write_two_stage_text`] uses.
pub fn write_scenario_lines(inst: &Instance, first: &SubSpec, source: &ScenarioSource) -> String {
    let mut s = String::new();
    if *first != SubSpec::full(inst) {
        s.push_str("first\n");
        write_block(&mut s, inst, first);
    }
    match source {
        ScenarioSource::None => {}
        ScenarioSource::Explicit(list) => {
            for (name, p, spec) in list {
                let _ = writeln!(s, "scenario {name} p={p}");
                write_block(&mut s, inst, spec);
            }
        }
        ScenarioSource::Departure { p, seed } => {
            let _ = writeln!(s, "depart-prob {p} seed {seed}");
        }
    }
    s
}

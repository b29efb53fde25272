//! The full instance file: the base market, sibling pairs, activities and
//! two-stage blocks.
//!
//! ```text
//! students: a1 a2
//! schools: b1/1 b2/2
//! pref a1: b1 b2 @
//! pref a2: b2 @ b1
//! pref b1: a2 a1 @
//! pref b2: a1 a2 @
//! pair a1 a2
//! activity art: b1
//! activity music: b2
//! scenario J1 p=1
//! keep-students a1
//! ```
//!
//! `serialize` writes the sections in that order, so its output is the
//! canonical form of any file that parses.

use std::fmt::Write as _;

use matching_core::{write_base, Instance, ParseError};
use siblings_apps::{parse_sibling_text, ActivityStructure, SiblingInstance};
use two_stage::{parse_scenario_lines, write_scenario_lines, ScenarioSource, Scenarios, SubSpec, TwoStageInstance};

use crate::IoError;

#[derive(Debug, Clone)]
pub struct InstanceFile {
    pub instance: Instance,
    pub pairs: Vec<(usize, usize)>,
    pub activities: Option<ActivityStructure>,
    pub first: SubSpec,
    pub scenarios: ScenarioSource,
}

impl InstanceFile {
    pub fn new(instance: Instance) -> Self {
        let first = SubSpec::full(&instance);
        InstanceFile { instance, pairs: Vec::new(), activities: None, first, scenarios: ScenarioSource::None }
    }

    pub fn siblings(&self) -> Result<SiblingInstance, IoError> {
        Ok(SiblingInstance::new(self.instance.clone(), self.pairs.clone())?)
    }

    /// The two-stage instance with zero costs and unit penalty; `None` when
    /// the file has no scenario lines.
    pub fn two_stage(&self) -> Result<Option<TwoStageInstance>, IoError> {
        let agg = self.instance.clone();
        let scenarios = match &self.scenarios {
            ScenarioSource::None => return Ok(None),
            ScenarioSource::Explicit(list) => TwoStageInstance::explicit(&agg, list.clone())?,
            ScenarioSource::Departure { p, .. } => {
                let p = num_traits::ToPrimitive::to_f64(p).unwrap_or(0.0);
                Scenarios::Sampler(two_stage::departure_sampler(&agg, p)?)
            }
        };
        Ok(Some(TwoStageInstance::new(agg, self.first.clone(), scenarios)?))
    }
}

pub fn parse_instance(text: &str) -> Result<InstanceFile, IoError> {
    let sib = parse_sibling_text(text)?;
    let instance = sib.instance.base;
    let lines = parse_scenario_lines(&instance, sib.extra)?;
    if let Some((ln, line)) = lines.rest.first() {
        let word = line.split_whitespace().next().unwrap_or_default();
        return Err(ParseError::new(*ln, format!("unknown line kind `{word}`")).into());
    }
    Ok(InstanceFile {
        instance,
        pairs: sib.instance.pairs,
        activities: sib.activities,
        first: lines.first,
        scenarios: lines.source,
    })
}

pub fn serialize(file: &InstanceFile) -> String {
    let inst = &file.instance;
    let mut s = write_base(inst);
    for &(a, b) in &file.pairs {
        let _ = writeln!(s, "pair {} {}", inst.student_name(a), inst.student_name(b));
    }
    if let Some(acts) = &file.activities {
        for (name, classes) in acts.names.iter().zip(&acts.classes) {
            let ids: Vec<&str> = classes.iter().map(|&b| inst.school_name(b)).collect();
            let _ = writeln!(s, "activity {name}: {}", ids.join(" "));
        }
    }
    s.push_str(&write_scenario_lines(inst, &file.first, &file.scenarios));
    s
}

//! Seeded random markets for tests and experiments.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::instance::{Instance, Partner};

#[derive(Debug, Clone, Copy)]
pub struct MarketShape {
    pub students: usize,
    pub schools: usize,
    /// Quotas are drawn uniformly from 1..=max_quota, clamped to the student count.
    pub max_quota: usize,
    /// Probability that an agent finds a given partner acceptable.
    pub accept: f64,
}

fn random_list<R: Rng + ?Sized>(rng: &mut R, others: usize, accept: f64) -> Vec<Partner> {
    let mut order: Vec<usize> = (0..others).collect();
    order.shuffle(rng);
    let (mut above, mut below): (Vec<usize>, Vec<usize>) = order.into_iter().partition(|_| rng.gen_bool(accept));
    below.sort_unstable();
    let mut list: Vec<Partner> = above.drain(..).map(Some).collect();
    list.push(None);
    list.extend(below.into_iter().map(Some));
    list
}

/// Agents are named `a1..` and `b1..`.
pub fn random_instance<R: Rng + ?Sized>(rng: &mut R, shape: MarketShape) -> Instance {
    let students: Vec<String> = (1..=shape.students).map(|i| format!("a{i}")).collect();
    let schools: Vec<String> = (1..=shape.schools).map(|i| format!("b{i}")).collect();
    let cap = shape.max_quota.min(shape.students.max(1)).max(1);
    let quota = (0..shape.schools).map(|_| rng.gen_range(1..=cap)).collect();
    let student_pref = (0..shape.students).map(|_| random_list(rng, shape.schools, shape.accept)).collect();
    let school_pref = (0..shape.schools).map(|_| random_list(rng, shape.students, shape.accept)).collect();
    Instance::new(students, schools, quota, student_pref, school_pref).expect("generated instance is valid")
}

/// A market built around cyclic, mutually opposed preferences (student `a`
/// starts its list at school `a`, school `b` starts at student `b + 1`),
/// perturbed by `swaps` random adjacent transpositions per list. Such markets
/// tend to have many stable matchings. Every partner is acceptable.
pub fn random_cyclic_instance<R: Rng + ?Sized>(rng: &mut R, shape: MarketShape, swaps: usize) -> Instance {
    let (ns, nb) = (shape.students, shape.schools);
    let perturb = |rng: &mut R, mut order: Vec<usize>| {
        if order.len() > 1 {
            for _ in 0..swaps {
                let i = rng.gen_range(0..order.len() - 1);
                order.swap(i, i + 1);
            }
        }
        let mut list: Vec<Partner> = order.into_iter().map(Some).collect();
        list.push(None);
        list
    };
    let students: Vec<String> = (1..=ns).map(|i| format!("a{i}")).collect();
    let schools: Vec<String> = (1..=nb).map(|i| format!("b{i}")).collect();
    let cap = shape.max_quota.min(ns.max(1)).max(1);
    let quota = (0..nb).map(|_| rng.gen_range(1..=cap)).collect();
    let student_pref = (0..ns).map(|a| perturb(rng, (0..nb).map(|k| (a + k) % nb.max(1)).collect())).collect();
    let school_pref = (0..nb).map(|b| perturb(rng, (0..ns).map(|k| (b + 1 + k) % ns.max(1)).collect())).collect();
    Instance::new(students, schools, quota, student_pref, school_pref).expect("generated instance is valid")
}

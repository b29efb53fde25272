//! Compares first-stage matchings on random markets where every agent leaves
//! independently before the second stage.
//!
//! Each trial draws a market and two independent scenario sets from the
//! departure sampler: `samples` draws that stand in for the distribution, and
//! one realized draw. For every penalty coefficient λ the trial emits one row:
//!
//! | column | meaning |
//! |---|---|
//! | `val_star` | optimum of the expected cost over the sampled set, attained by `M*` |
//! | `val_m0`, `val_mz` | expected cost over the sampled set of the student- and school-optimal first stages |
//! | `val_off` | optimum against the realized draw alone, attained by the hindsight first stage `M^off` |
//! | `realized_star`, `realized_m0`, `realized_mz` | cost of `M*`, `M_0` and `M_z` against the realized draw |
//!
//! Every row satisfies `val_star <= min(val_m0, val_mz)` and
//! `val_off <= min(realized_star, realized_m0, realized_mz)`. Values are exact
//! rationals; the `*_dec` columns repeat them as decimals.

use std::io::Write;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use matching_core::Instance;
use mincut_framework::{ratio, Rational};
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use two_stage::{
    departure_sampler, disjoint_union, draw_samples, empirical, solve_exp_2sto_on, FirstStageEvaluator, PairCosts,
    Scenarios, SubSpec, TwoStageInstance,
};

use crate::generate::{generate_random, QuotaMode};
use crate::IoError;

type TrialResult = Result<Vec<ExperimentRow>, IoError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CostMode {
    /// `c(ab)` is the mean of the two 1-based ranks.
    #[default]
    Egalitarian,
    Zero,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub n: usize,
    pub quota: QuotaMode,
    /// Departure probability of every agent.
    pub p: Rational,
    pub lambdas: Vec<Rational>,
    pub costs: CostMode,
    pub trials: usize,
    /// Sampler draws per trial that form the expected-cost scenario set.
    pub samples: usize,
    pub seed: u64,
    /// Worker threads; 0 picks the available parallelism.
    pub threads: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            n: 50,
            quota: QuotaMode::Unit,
            p: ratio(1, 4),
            lambdas: (1..=20).map(|k| ratio(k, 10)).collect(),
            costs: CostMode::Egalitarian,
            trials: 20,
            samples: 20,
            seed: 0,
            threads: 0,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), IoError> {
        let zero = Rational::from_integer(0.into());
        let one = Rational::from_integer(1.into());
        if self.n == 0 {
            return Err(IoError::Config("the market needs at least one agent per side".into()));
        }
        if self.p < zero || self.p > one {
            return Err(IoError::Config(format!("departure probability {} is outside [0, 1]", self.p)));
        }
        if self.lambdas.is_empty() {
            return Err(IoError::Config("the penalty grid is empty".into()));
        }
        if let Some(l) = self.lambdas.iter().find(|l| **l < zero) {
            return Err(IoError::Config(format!("penalty coefficient {l} is negative")));
        }
        if self.samples == 0 {
            return Err(IoError::Config("at least one sample per trial is needed".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentRow {
    pub trial: usize,
    pub lambda: Rational,
    pub val_star: Rational,
    pub val_m0: Rational,
    pub val_mz: Rational,
    pub val_off: Rational,
    pub realized_star: Rational,
    pub realized_m0: Rational,
    pub realized_mz: Rational,
    /// Distinct markets in the sampled set.
    pub distinct: usize,
}

impl ExperimentRow {
    pub fn relations_hold(&self) -> bool {
        self.val_star <= self.val_m0
            && self.val_star <= self.val_mz
            && self.val_off <= self.realized_star
            && self.val_off <= self.realized_m0
            && self.val_off <= self.realized_mz
    }
}

pub const CSV_HEADER: [&str; 17] = [
    "trial",
    "lambda",
    "distinct",
    "val_star",
    "val_m0",
    "val_mz",
    "val_off",
    "realized_star",
    "realized_m0",
    "realized_mz",
    "val_star_dec",
    "val_m0_dec",
    "val_mz_dec",
    "val_off_dec",
    "realized_star_dec",
    "realized_m0_dec",
    "realized_mz_dec",
];

fn dec(x: &Rational) -> String {
    format!("{:.6}", x.to_f64().unwrap_or(f64::NAN))
}

pub fn write_csv<W: Write>(rows: &[ExperimentRow], out: W) -> Result<(), IoError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in rows {
        let vals = [&r.val_star, &r.val_m0, &r.val_mz, &r.val_off, &r.realized_star, &r.realized_m0, &r.realized_mz];
        let mut rec = vec![r.trial.to_string(), r.lambda.to_string(), r.distinct.to_string()];
        rec.extend(vals.iter().map(|v| v.to_string()));
        rec.extend(vals.iter().map(|v| dec(v)));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// Market seed, sample seed and realization seed of a trial.
fn trial_seeds(seed: u64, trial: usize) -> [u64; 3] {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64);
    [rng.gen(), rng.gen(), rng.gen()]
}

fn costs(mode: CostMode, inst: &Instance) -> PairCosts {
    match mode {
        CostMode::Egalitarian => PairCosts::egalitarian(inst),
        CostMode::Zero => PairCosts::zero(inst),
    }
}

fn run_trial(cfg: &ExperimentConfig, trial: usize) -> Result<Vec<ExperimentRow>, IoError> {
    let [market_seed, sample_seed, real_seed] = trial_seeds(cfg.seed, trial);
    let agg = generate_random(cfg.n, market_seed, cfg.quota);
    let p = cfg.p.to_f64().unwrap_or(0.0);
    let c = costs(cfg.costs, &agg);
    let base =
        TwoStageInstance::new(agg.clone(), SubSpec::full(&agg), Scenarios::Sampler(departure_sampler(&agg, p)?))?
            .with_costs(c.clone(), c);
    let sampled = empirical(&base, &draw_samples(&base, cfg.samples as u64, sample_seed)?)?;
    let realized = empirical(&base, &draw_samples(&base, 1, real_seed)?)?;
    let sampled = base.with_scenarios(sampled);
    let realized = base.with_scenarios(realized);
    let distinct = sampled.explicit_scenarios()?.len();

    let u_sampled = disjoint_union(&sampled, sampled.explicit_scenarios()?);
    let u_realized = disjoint_union(&realized, realized.explicit_scenarios()?);
    let (m0, mz) = (u_sampled.orders[0].m0.clone(), u_sampled.orders[0].mz.clone());

    let mut rows = Vec::with_capacity(cfg.lambdas.len());
    for lambda in &cfg.lambdas {
        let ts = sampled.clone().with_lambda(lambda.clone())?;
        let tr = realized.clone().with_lambda(lambda.clone())?;
        let star = solve_exp_2sto_on(&ts, &u_sampled)?;
        let off = solve_exp_2sto_on(&tr, &u_realized)?;
        let ev = FirstStageEvaluator::with_orders(&ts, u_sampled.orders[1..].to_vec())?;
        let er = FirstStageEvaluator::with_orders(&tr, u_realized.orders[1..].to_vec())?;
        let row = ExperimentRow {
            trial,
            lambda: lambda.clone(),
            val_m0: ev.value(&m0)?,
            val_mz: ev.value(&mz)?,
            realized_star: er.value(&star.first)?,
            realized_m0: er.value(&m0)?,
            realized_mz: er.value(&mz)?,
            val_star: star.value,
            val_off: off.value,
            distinct,
        };
        if !row.relations_hold() {
            return Err(IoError::Relation { trial, lambda: lambda.to_string() });
        }
        rows.push(row);
    }
    Ok(rows)
}

/// Runs every trial, in parallel across trials, and returns the rows ordered
/// by trial and then by the position of λ in the grid.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<ExperimentRow>, IoError> {
    cfg.validate()?;
    let threads = match cfg.threads {
        0 => std::thread::available_parallelism().map_or(1, |n| n.get()),
        t => t,
    }
    .min(cfg.trials.max(1));
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Option<TrialResult>>> = Mutex::new((0..cfg.trials).map(|_| None).collect());
    std::thread::scope(|scope| {
        for _ in 0..threads {
            scope.spawn(|| loop {
                let t = next.fetch_add(1, Ordering::Relaxed);
                if t >= cfg.trials {
                    break;
                }
                let r = run_trial(cfg, t);
                results.lock().expect("no worker panics while holding the lock")[t] = Some(r);
            });
        }
    });
    let mut rows = Vec::new();
    for r in results.into_inner().expect("workers have finished") {
        rows.extend(r.expect("every trial ran")?);
    }
    Ok(rows)
}

/// Whether `val_m0 - val_star` shrinks as λ decreases, per trial. Reported,
/// not enforced.
#[derive(Debug, Clone, PartialEq)]
pub struct GapTrend {
    pub trials: usize,
    pub monotone: usize,
    /// Mean of `(min(val_m0, val_mz) - val_star) / min(val_m0, val_mz)` over
    /// rows with a positive denominator.
    pub mean_relative_gain: f64,
}

pub fn gap_trend(rows: &[ExperimentRow]) -> GapTrend {
    let mut trials: Vec<usize> = rows.iter().map(|r| r.trial).collect();
    trials.dedup();
    let mut monotone = 0;
    for &t in &trials {
        let mut pts: Vec<(&Rational, Rational)> =
            rows.iter().filter(|r| r.trial == t).map(|r| (&r.lambda, &r.val_m0 - &r.val_star)).collect();
        pts.sort_by(|x, y| x.0.cmp(y.0));
        if pts.windows(2).all(|w| w[0].1 <= w[1].1) {
            monotone += 1;
        }
    }
    let gains: Vec<f64> = rows
        .iter()
        .filter_map(|r| {
            let best = if r.val_m0 < r.val_mz { &r.val_m0 } else { &r.val_mz };
            let b = best.to_f64()?;
            (b > 0.0).then(|| (best - &r.val_star).to_f64().unwrap_or(0.0) / b)
        })
        .collect();
    let mean = if gains.is_empty() { 0.0 } else { gains.iter().sum::<f64>() / gains.len() as f64 };
    GapTrend { trials: trials.len(), monotone, mean_relative_gain: mean }
}

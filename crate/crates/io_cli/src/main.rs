//! `rotcut`: stable matching optimization through rotation cuts.
//!
//! Exit codes: 0 success, 1 other failure, 2 invalid input, 3 infeasible,
//! 4 not minimum cut representable.

use std::fs;
use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use io_cli::{
    dump_digraph, dump_rotations, gap_trend, generate_random, parse_instance, parse_rational, run_experiment,
    serialize, write_csv, CostMode, ExperimentConfig, InstanceFile, IoError, QuotaMode,
};
use matching_core::{Instance, Matching, ParseError};
use mincut_framework::{
    build_cut_digraph, check_representability, differentials, int, Certificate, CheckMode, CutBundle, Family,
    FrameworkError, LinearWeights, MetaRotations, Objective, Rational, Verdict, DEFAULT_CAP,
};
use rotation_lattice::{rotation_order, RotationOrder, UpSet};
use serde_json::{json, Value};
use siblings_apps::{
    activity_mismatch_objective, activity_stable_family, separated_pairs, solve_msdp_bruteforce, solve_mssp,
    solve_msss, ActivityStructure, SiblingError,
};
use two_stage::{
    departure_sampler, minimize_linear, parse_scenario_lines, solve_exp_2sto, solve_saa, two_stage_digraph, PairCosts,
    ScenarioSource, Scenarios, TwoStageError, TwoStageInstance,
};

/// Caps the number of sampled scenarios in `solve-2sto`.
const BUDGET_VAR: &str = "ROTCUT_BUDGET";

#[derive(Parser)]
#[command(name = "rotcut", version, about = "Optimization over stable matchings by minimum cuts on rotations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Weights {
    /// Mean of the two 1-based ranks of each pair.
    Egalitarian,
    /// 1-based rank of the school on the student's list.
    StudentRank,
    /// 1-based rank of the student on the school's list.
    SchoolRank,
}

#[derive(Clone, Copy, ValueEnum)]
enum CertObjective {
    Egalitarian,
    SeparatedPairs,
    ActivityMismatch,
}

#[derive(Clone, Copy, ValueEnum)]
enum CertFamily {
    All,
    ActivityStable,
}

#[derive(Clone, Copy, ValueEnum)]
enum Costs {
    Zero,
    Egalitarian,
}

#[derive(Clone, Copy, ValueEnum)]
enum DigraphObjective {
    Egalitarian,
    SeparatedPairs,
    ActivityMismatch,
    TwoStage,
}

#[derive(Subcommand)]
enum Command {
    /// Minimum weight stable matching.
    SolveMwsm {
        file: PathBuf,
        #[arg(long, value_enum, default_value = "egalitarian")]
        weights: Weights,
    },
    /// Decide whether an objective over a family of stable matchings has a
    /// cut representation; prints a JSON verdict.
    Certify {
        file: PathBuf,
        #[arg(long, value_enum, default_value = "egalitarian")]
        objective: CertObjective,
        #[arg(long, value_enum, default_value = "all")]
        family: CertFamily,
        /// Largest family enumerated exactly.
        #[arg(long, default_value_t = DEFAULT_CAP)]
        cap: usize,
        /// Check this many random members instead of enumerating.
        #[arg(long)]
        sample: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Stable matching separating the fewest sibling pairs.
    SolveMsss { file: PathBuf },
    /// Stable matching placing every sibling pair in a common activity.
    SolveMssp { file: PathBuf },
    /// Activity-stable matching by exhaustive search.
    SolveMsdpBf {
        file: PathBuf,
        /// Most stable matchings searched.
        #[arg(long, default_value_t = 1_000_000)]
        limit: usize,
    },
    /// Two-stage problem over explicit scenarios, or its sample average
    /// version for the departure sampler.
    #[command(name = "solve-2sto")]
    Solve2sto {
        file: PathBuf,
        /// Scenario lines over the agents of FILE; defaults to those in FILE.
        #[arg(long, conflicts_with = "sampler")]
        scenarios: Option<PathBuf>,
        /// `depart-prob=P`: every agent leaves independently with probability P.
        #[arg(long)]
        sampler: Option<String>,
        #[arg(long)]
        eps: Option<String>,
        #[arg(long)]
        alpha: Option<String>,
        #[arg(long, default_value = "1")]
        lambda: String,
        #[arg(long, value_enum, default_value = "zero")]
        costs: Costs,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Random complete market with unit or random quotas.
    Generate {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Draw quotas from 1..=MAX_QUOTA instead of using 1.
        #[arg(long)]
        max_quota: Option<usize>,
    },
    /// First-stage comparison on random markets; writes CSV.
    Experiment {
        #[arg(long, default_value_t = 50)]
        n: usize,
        #[arg(long, default_value = "1/4")]
        p: String,
        /// Comma-separated penalty grid; defaults to 0.1, 0.2, ..., 2.
        #[arg(long, value_delimiter = ',')]
        lambdas: Option<Vec<String>>,
        #[arg(long, default_value_t = 20)]
        trials: usize,
        #[arg(long, default_value_t = 20)]
        samples: usize,
        #[arg(long, value_enum, default_value = "egalitarian")]
        costs: Costs,
        #[arg(long)]
        max_quota: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Worker threads; 0 uses every core.
        #[arg(long, default_value_t = 0)]
        threads: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Rotations and their cover relation.
    DumpRotations { file: PathBuf },
    /// Arcs of a cut digraph as `tail head capacity` lines.
    DumpDigraph {
        file: PathBuf,
        #[arg(long, value_enum, default_value = "egalitarian")]
        objective: DigraphObjective,
        #[arg(long, default_value = "1")]
        lambda: String,
        #[arg(long)]
        gamma: Option<String>,
        /// Sum parallel arcs and drop zero arcs.
        #[arg(long)]
        merge: bool,
    },
    /// Parse a file and print it in canonical form.
    Canon { file: PathBuf },
}

fn read(path: &PathBuf) -> Result<String, IoError> {
    fs::read_to_string(path).map_err(|e| IoError::Config(format!("cannot read {}: {e}", path.display())))
}

fn load(path: &PathBuf) -> Result<InstanceFile, IoError> {
    parse_instance(&read(path)?)
}

fn partner_name(inst: &Instance, p: Option<usize>) -> &str {
    p.map_or("@", |b| inst.school_name(b))
}

fn print_matching(out: &mut String, inst: &Instance, m: &Matching) {
    for a in 0..inst.num_students() {
        out.push_str(&format!("match {} {}\n", inst.student_name(a), partner_name(inst, m.partner(a))));
    }
}

fn linear_weights(inst: &Instance, kind: Weights) -> LinearWeights {
    let mut w = LinearWeights::zero(inst.num_students(), inst.num_schools());
    for a in 0..inst.num_students() {
        for b in 0..inst.num_schools() {
            let ra = int(inst.student_pos(a, Some(b)) as i64 + 1);
            let rb = int(inst.school_pos(b, Some(a)) as i64 + 1);
            let x = match kind {
                Weights::Egalitarian => (ra + rb) / int(2),
                Weights::StudentRank => ra,
                Weights::SchoolRank => rb,
            };
            w.set(a, Some(b), x);
        }
    }
    w
}

fn activities(f: &InstanceFile) -> Result<&ActivityStructure, IoError> {
    f.activities.as_ref().ok_or_else(|| IoError::Config("the file declares no activities".into()))
}

fn ids(u: &UpSet) -> Value {
    json!(u.ids().collect::<Vec<_>>())
}

fn certificate_json(c: &Certificate) -> Value {
    let mut v = match c {
        Certificate::NotSublattice(x) | Certificate::MinimaNotSublattice(x) => json!({
            "kind": if matches!(c, Certificate::NotSublattice(_)) { "family-not-sublattice" } else { "minima-not-sublattice" },
            "operation": format!("{:?}", x.op).to_lowercase(),
            "first": ids(&x.first),
            "second": ids(&x.second),
            "result": ids(&x.result),
        }),
        Certificate::NegativeSecond { i, j, rotations, value } => json!({
            "kind": "negative-second-differential",
            "classes": [i, j],
            "rotations": [rotations.0, rotations.1],
            "value": value.to_string(),
        }),
        Certificate::Mismatch { upset, f, f_aprx } => json!({
            "kind": "expansion-mismatch",
            "upset": ids(upset),
            "f": f.to_string(),
            "f_aprx": f_aprx.to_string(),
        }),
    };
    v["condition"] = json!(c.condition());
    v["message"] = json!(c.to_string());
    v
}

fn objective(f: &InstanceFile, kind: CertObjective) -> Result<Objective, IoError> {
    Ok(match kind {
        CertObjective::Egalitarian => Objective::Linear(linear_weights(&f.instance, Weights::Egalitarian)),
        CertObjective::SeparatedPairs => {
            let pairs = f.pairs.clone();
            Objective::oracle(move |m| int(separated_pairs(m, &pairs) as i64))
        }
        CertObjective::ActivityMismatch => activity_mismatch_objective(activities(f)?, &f.pairs),
    })
}

fn verdict(
    f: &InstanceFile,
    order: &RotationOrder,
    obj: CertObjective,
    fam: CertFamily,
    mode: CheckMode,
) -> Result<Verdict, IoError> {
    let family = match fam {
        CertFamily::All => Family::All,
        CertFamily::ActivityStable => activity_stable_family(order, activities(f)?, &f.pairs),
    };
    Ok(check_representability(order, &family, &objective(f, obj)?, mode)?)
}

fn sampler_prob(spec: &str) -> Result<Rational, IoError> {
    let p = spec
        .strip_prefix("depart-prob=")
        .ok_or_else(|| IoError::Config(format!("unknown sampler `{spec}`; expected depart-prob=P")))?;
    parse_rational(p)
}

fn budget() -> Result<Option<u64>, IoError> {
    match std::env::var(BUDGET_VAR) {
        Ok(v) => v.trim().parse().map(Some).map_err(|_| IoError::Config(format!("{BUDGET_VAR}=`{v}` is not a count"))),
        Err(_) => Ok(None),
    }
}

fn costs(inst: &Instance, c: Costs) -> PairCosts {
    match c {
        Costs::Zero => PairCosts::zero(inst),
        Costs::Egalitarian => PairCosts::egalitarian(inst),
    }
}

fn two_stage_of(
    f: &InstanceFile,
    source: &ScenarioSource,
    lambda: &Rational,
    c: Costs,
) -> Result<TwoStageInstance, IoError> {
    let agg = f.instance.clone();
    let scenarios = match source {
        ScenarioSource::None => return Err(TwoStageError::NoScenarios.into()),
        ScenarioSource::Explicit(list) => TwoStageInstance::explicit(&agg, list.clone())?,
        ScenarioSource::Departure { p, .. } => {
            Scenarios::Sampler(departure_sampler(&agg, num_traits::ToPrimitive::to_f64(p).unwrap_or(0.0))?)
        }
    };
    let cs = costs(&agg, c);
    Ok(TwoStageInstance::new(agg, f.first.clone(), scenarios)?
        .with_costs(cs.clone(), cs)
        .with_lambda(lambda.clone())?)
}

/// Standard output and exit code of a command that ran to completion.
fn run(cmd: Command) -> Result<(String, u8), IoError> {
    let mut out = String::new();
    match cmd {
        Command::SolveMwsm { file, weights } => {
            let f = load(&file)?;
            let order = rotation_order(&f.instance);
            let (m, v) = minimize_linear(&order, linear_weights(&f.instance, weights))?;
            print_matching(&mut out, &f.instance, &m);
            out.push_str(&format!("value {v}\n"));
        }
        Command::Certify { file, objective, family, cap, sample, seed } => {
            let f = load(&file)?;
            let order = rotation_order(&f.instance);
            let mode = match sample {
                Some(k) => CheckMode::Sampled { k, seed },
                None => CheckMode::Exact { cap },
            };
            let v = verdict(&f, &order, objective, family, mode)?;
            let record = match &v {
                Verdict::Representable(b) => json!({"verdict": "representable", "constant": b.constant.to_string()}),
                Verdict::Consistent { bundle, downgraded } => json!({
                    "verdict": "consistent",
                    "downgraded": downgraded,
                    "constant": bundle.constant.to_string(),
                }),
                Verdict::NotRepresentable(c) => {
                    json!({"verdict": "not-representable", "certificate": certificate_json(c)})
                }
            };
            out.push_str(&serde_json::to_string_pretty(&record).expect("json values serialize"));
            out.push('\n');
            if matches!(v, Verdict::NotRepresentable(_)) {
                return Ok((out, 4));
            }
        }
        Command::SolveMsss { file } => {
            let f = load(&file)?;
            let sol = solve_msss(&f.siblings()?)?;
            print_matching(&mut out, &f.instance, &sol.matching);
            out.push_str(&format!("separated {}\n", sol.separated));
        }
        Command::SolveMssp { file } => {
            let f = load(&file)?;
            match solve_mssp(&f.instance, activities(&f)?, &f.pairs)? {
                Some(m) => print_matching(&mut out, &f.instance, &m),
                None => return Err(FrameworkError::Infeasible.into()),
            }
        }
        Command::SolveMsdpBf { file, limit } => {
            let f = load(&file)?;
            match solve_msdp_bruteforce(&f.instance, activities(&f)?, &f.pairs, limit)? {
                Some(m) => print_matching(&mut out, &f.instance, &m),
                None => return Err(FrameworkError::Infeasible.into()),
            }
        }
        Command::Solve2sto { file, scenarios, sampler, eps, alpha, lambda, costs, seed } => {
            let f = load(&file)?;
            let lambda = parse_rational(&lambda)?;
            let source = match (&scenarios, &sampler) {
                (Some(path), _) => {
                    let text = read(path)?;
                    let lines: Vec<(usize, String)> = text
                        .lines()
                        .enumerate()
                        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or_default().trim().to_string()))
                        .filter(|(_, l)| !l.is_empty())
                        .collect();
                    let parsed = parse_scenario_lines(&f.instance, lines)?;
                    if let Some((ln, _)) = parsed.rest.first() {
                        return Err(ParseError::new(*ln, "not a scenario line").into());
                    }
                    parsed.source
                }
                (None, Some(spec)) => ScenarioSource::Departure { p: sampler_prob(spec)?, seed: seed.unwrap_or(0) },
                (None, None) => f.scenarios.clone(),
            };
            let ts = two_stage_of(&f, &source, &lambda, costs)?;
            match source {
                ScenarioSource::Departure { seed: file_seed, .. } => {
                    let need = |x: &Option<String>, name: &str| {
                        x.as_deref()
                            .ok_or_else(|| IoError::Config(format!("the sampler needs --{name}")))
                            .and_then(parse_rational)
                    };
                    let (eps, alpha) = (need(&eps, "eps")?, need(&alpha, "alpha")?);
                    let sol = solve_saa(&ts, &eps, &alpha, seed.unwrap_or(file_seed), budget()?)?;
                    print_first(&mut out, &ts, &sol.first);
                    out.push_str(&format!(
                        "samples {} of {}{}\ndistinct {}\nestimate {}\n",
                        sol.samples.used,
                        sol.samples.required,
                        if sol.samples.capped { " (capped by budget)" } else { "" },
                        sol.distinct,
                        sol.estimate
                    ));
                }
                _ => {
                    let sol = solve_exp_2sto(&ts)?;
                    print_first(&mut out, &ts, &sol.first);
                    for (s, m) in ts.explicit_scenarios()?.iter().zip(&sol.scenarios) {
                        for (a, b) in s.market.aggregate_pairs(m) {
                            out.push_str(&format!(
                                "scenario {} {} {}\n",
                                s.name,
                                f.instance.student_name(a),
                                f.instance.school_name(b)
                            ));
                        }
                    }
                    out.push_str(&format!("value {}\n", sol.value));
                }
            }
        }
        Command::Generate { n, seed, max_quota } => {
            if n == 0 {
                return Err(IoError::Config("--n must be at least 1".into()));
            }
            let quota = max_quota.map_or(QuotaMode::Unit, |max| QuotaMode::Random { max });
            out.push_str(&serialize(&InstanceFile::new(generate_random(n, seed, quota))));
        }
        Command::Experiment { n, p, lambdas, trials, samples, costs, max_quota, seed, threads, out: path } => {
            let mut cfg = ExperimentConfig {
                n,
                p: parse_rational(&p)?,
                trials,
                samples,
                seed,
                threads,
                quota: max_quota.map_or(QuotaMode::Unit, |max| QuotaMode::Random { max }),
                costs: match costs {
                    Costs::Zero => CostMode::Zero,
                    Costs::Egalitarian => CostMode::Egalitarian,
                },
                ..Default::default()
            };
            if let Some(ls) = lambdas {
                cfg.lambdas = ls.iter().map(|l| parse_rational(l)).collect::<Result<_, _>>()?;
            }
            cfg.validate()?;
            let rows = run_experiment(&cfg)?;
            let trend = gap_trend(&rows);
            eprintln!(
                "{} rows; gap to M_0 shrinks with the penalty on {}/{} trials; mean relative gain {:.4}",
                rows.len(),
                trend.monotone,
                trend.trials,
                trend.mean_relative_gain
            );
            match path {
                Some(p) => write_csv(&rows, fs::File::create(p)?)?,
                None => {
                    let mut buf = Vec::new();
                    write_csv(&rows, &mut buf)?;
                    out.push_str(&String::from_utf8(buf).expect("csv output is utf-8"));
                }
            }
        }
        Command::DumpRotations { file } => {
            let f = load(&file)?;
            out.push_str(&dump_rotations(&f.instance, &rotation_order(&f.instance)));
        }
        Command::DumpDigraph { file, objective, lambda, gamma, merge } => {
            let f = load(&file)?;
            let gamma = gamma.as_deref().map(parse_rational).transpose()?;
            let bundle: CutBundle = match objective {
                DigraphObjective::TwoStage => {
                    let ts = two_stage_of(&f, &f.scenarios, &parse_rational(&lambda)?, Costs::Zero)?;
                    two_stage_digraph(&ts, gamma)?.1
                }
                DigraphObjective::Egalitarian => {
                    let order = rotation_order(&f.instance);
                    let meta = MetaRotations::all(&order);
                    let obj = Objective::Linear(linear_weights(&f.instance, Weights::Egalitarian));
                    build_cut_digraph(&meta, &differentials(&order, &meta, &obj)?, gamma)?
                }
                DigraphObjective::SeparatedPairs | DigraphObjective::ActivityMismatch => {
                    let order = rotation_order(&f.instance);
                    let obj = if matches!(objective, DigraphObjective::SeparatedPairs) {
                        CertObjective::SeparatedPairs
                    } else {
                        CertObjective::ActivityMismatch
                    };
                    match verdict(&f, &order, obj, CertFamily::All, CheckMode::default())? {
                        Verdict::NotRepresentable(c) => {
                            return Err(FrameworkError::NotRepresentable(Box::new(c)).into())
                        }
                        v => v.bundle().expect("representable verdicts carry a digraph").clone(),
                    }
                }
            };
            out.push_str(&dump_digraph(&bundle, merge));
        }
        Command::Canon { file } => out.push_str(&serialize(&load(&file)?)),
    }
    Ok((out, 0))
}

fn print_first(out: &mut String, ts: &TwoStageInstance, m: &Matching) {
    let agg = &ts.aggregate;
    for (a, b) in ts.first.aggregate_pairs(m) {
        out.push_str(&format!("first {} {}\n", agg.student_name(a), agg.school_name(b)));
    }
}

fn exit_code(e: &IoError) -> u8 {
    match e {
        IoError::Parse(_) | IoError::Instance(_) | IoError::Config(_) => 2,
        IoError::Sibling(SiblingError::Framework(f))
        | IoError::TwoStage(TwoStageError::Framework(f))
        | IoError::Framework(f) => match f {
            FrameworkError::NotRepresentable(_) => 4,
            FrameworkError::Infeasible | FrameworkError::EmptyFamily => 3,
            _ => 1,
        },
        IoError::Sibling(
            SiblingError::Parse(_)
            | SiblingError::SamePair { .. }
            | SiblingError::UnknownStudent { .. }
            | SiblingError::Uncovered(_)
            | SiblingError::Overlap(_)
            | SiblingError::TwoClasses { .. }
            | SiblingError::OrderMismatch(_),
        ) => 2,
        IoError::TwoStage(
            TwoStageError::Parse(_)
            | TwoStageError::Instance(_)
            | TwoStageError::UnknownStudent(_)
            | TwoStageError::UnknownSchool(_)
            | TwoStageError::BadQuota { .. }
            | TwoStageError::ProbabilitySum(_)
            | TwoStageError::BadProbability(_)
            | TwoStageError::NegativeLambda
            | TwoStageError::NoScenarios
            | TwoStageError::BadEpsilon(_)
            | TwoStageError::BadAlpha(_),
        ) => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok((out, code)) => {
            let mut stdout = std::io::stdout().lock();
            if stdout.write_all(out.as_bytes()).is_err() {
                return ExitCode::from(1);
            }
            ExitCode::from(code)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

use matching_core::{
    enumerate_stable_bruteforce, is_stable, random_cyclic_instance, random_instance, Instance, LatticeOp, MarketShape,
    Matching,
};
use mincut_framework::{
    check_representability, differentials, int, Certificate, CheckMode, Family, MetaRotations, Objective, Verdict,
};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rotation_lattice::{enumerate_upsets, matching_of, rotation_order, UpSet};
use siblings_apps::{
    activity_mismatch_objective, activity_stable_family, irp_digraph, is_activity_stable, mssp_pair_family,
    mssp_pair_objective, msss_tables, normalize_msss, parse_sibling_text, rho_in_out, separated_pairs,
    solve_msdp_bruteforce, solve_mssp, solve_msss, ActivityStructure, IrpEnd, IrpSpec, PairFamily, SiblingError,
    SiblingInstance, SiblingText,
};

fn fixture(name: &str) -> SiblingText {
    let text = match name {
        "fig1" => include_str!("../../../fixtures/fig1.txt"),
        "fig2" => include_str!("../../../fixtures/fig2.txt"),
        "fig5" => include_str!("../../../fixtures/fig5.txt"),
        "fig6" => include_str!("../../../fixtures/fig6.txt"),
        _ => unreachable!(),
    };
    parse_sibling_text(text).unwrap()
}

fn stable_all(inst: &Instance) -> Vec<Matching> {
    enumerate_stable_bruteforce(inst, 1_000_000).unwrap()
}

fn together(m: &Matching, a: usize, b: usize) -> bool {
    m.partner(a).is_some() && m.partner(a) == m.partner(b)
}

fn market(rng: &mut ChaCha8Rng, n: usize) -> Instance {
    let shape = MarketShape { students: n, schools: n, max_quota: 2, accept: 0.9 };
    if rng.gen_bool(0.7) {
        let swaps = rng.gen_range(0..3);
        random_cyclic_instance(rng, shape, swaps)
    } else {
        random_instance(rng, shape)
    }
}

/// A market whose pairs have near-identical preferences, so that siblings
/// often compete for the same schools.
fn sibling_market(rng: &mut ChaCha8Rng, n: usize, count: usize) -> (Instance, Vec<(usize, usize)>) {
    let shape = MarketShape { students: n, schools: n - 1, max_quota: 3, accept: 1.0 };
    let swaps = rng.gen_range(0..3);
    let base = random_cyclic_instance(rng, shape, swaps);
    let pairs = random_pairs(rng, n, count);
    let mut sp: Vec<Vec<Option<usize>>> = (0..n).map(|a| base.student_pref(a).to_vec()).collect();
    for &(a, abar) in &pairs {
        let mut l = sp[a].clone();
        if rng.gen_bool(0.5) {
            let i = rng.gen_range(0..n - 2);
            l.swap(i, i + 1);
        }
        sp[abar] = l;
    }
    let bp = (0..n - 1).map(|b| base.school_pref(b).to_vec()).collect();
    let inst =
        Instance::new(base.students().to_vec(), base.schools().to_vec(), base.quotas().to_vec(), sp, bp).unwrap();
    (inst, pairs)
}

/// Random disjoint pairs of distinct students.
fn random_pairs(rng: &mut ChaCha8Rng, n: usize, count: usize) -> Vec<(usize, usize)> {
    let mut ids: Vec<usize> = (0..n).collect();
    ids.shuffle(rng);
    ids.chunks_exact(2).take(count).map(|c| (c[0], c[1])).collect()
}

fn min_separated(inst: &Instance, pairs: &[(usize, usize)]) -> usize {
    stable_all(inst).iter().map(|m| separated_pairs(m, pairs)).min().unwrap()
}

#[test]
fn normalization_is_identity_when_pairs_are_apart_at_both_ends() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut seen = 0;
    for _ in 0..200 {
        let inst = market(&mut rng, 5);
        let pairs = random_pairs(&mut rng, 5, 2);
        let order = rotation_order(&inst);
        if pairs.iter().any(|&(a, b)| together(&order.m0, a, b) || together(&order.mz, a, b)) {
            continue;
        }
        let si = SiblingInstance::new(inst.clone(), pairs).unwrap();
        let n = normalize_msss(&si);
        assert!(n.is_identity());
        assert_eq!(n.instance.base, inst);
        seen += 1;
    }
    assert!(seen > 20);
}

#[test]
fn normalization_preserves_the_best_count_and_maps_stable_matchings() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut changed = 0;
    for _ in 0..150 {
        let (inst, pairs) = sibling_market(&mut rng, 5, 2);
        let si = SiblingInstance::new(inst.clone(), pairs.clone()).unwrap();
        let n = normalize_msss(&si);
        let new = &n.instance.base;
        let order = rotation_order(new);
        for &(a, b) in &pairs {
            assert!(!together(&order.m0, a, b));
        }
        assert_eq!(min_separated(&inst, &pairs), min_separated(new, &pairs));
        for m in stable_all(new) {
            let back = n.backward(&m);
            assert!(is_stable(&inst, &back).unwrap().is_stable());
            for &(a, b) in &pairs {
                assert!(!together(&m, a, b) || together(&back, a, b));
            }
        }
        for m in stable_all(&inst) {
            assert!(is_stable(new, &n.forward(&m)).unwrap().is_stable());
        }
        if !n.is_identity() {
            changed += 1;
        }
    }
    assert!(changed > 20, "only {changed} instances needed dummies");
}

#[test]
fn entry_and_exit_rotations_describe_colocation_exactly() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut found = 0;
    for _ in 0..150 {
        let (inst, pairs) = sibling_market(&mut rng, 6, 3);
        let n = normalize_msss(&SiblingInstance::new(inst, pairs.clone()).unwrap());
        let order = rotation_order(&n.instance.base);
        let upsets = enumerate_upsets(&order, 1_000_000).unwrap();
        let ms: Vec<Matching> = upsets.iter().map(|r| matching_of(&order, r).unwrap()).collect();
        for &(a, abar) in &pairs {
            if together(&order.mz, a, abar) {
                assert!(rho_in_out(&order, a, abar, 0).is_err());
                continue;
            }
            for b in 0..n.instance.base.num_schools() {
                let at_b: Vec<bool> =
                    ms.iter().map(|m| m.partner(a) == Some(b) && m.partner(abar) == Some(b)).collect();
                match rho_in_out(&order, a, abar, b).unwrap() {
                    None => assert!(at_b.iter().all(|x| !x)),
                    Some(io) => {
                        found += 1;
                        let out = io.rho_out.unwrap();
                        assert!(order.gt(io.rho_in, out));
                        for (r, &x) in upsets.iter().zip(&at_b) {
                            assert_eq!(x, r.contains(io.rho_in) && !r.contains(out));
                        }
                    }
                }
            }
        }
    }
    assert!(found > 20, "only {found} co-locations");
}

#[test]
fn entry_exit_requires_separated_extremes() {
    let t = fixture("fig1");
    let order = rotation_order(&t.instance.base);
    let (x, y) = (order.m0.partner(0), order.m0.partner(1));
    assert_ne!(x, y);
    // A school with quota at least two shared in the optimal matching is an error.
    let inst = parse_sibling_text("students: x y\nschools: u/2\npref x: u @\npref y: u @\npref u: x y @\n").unwrap();
    let order = rotation_order(&inst.instance.base);
    assert_eq!(rho_in_out(&order, 0, 1, 0), Err(SiblingError::AssumptionViolated { a: 0, b: 1 }));
}

#[test]
fn separation_closed_form_matches_direct_differentials() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut nonzero = 0;
    for _ in 0..100 {
        let n = rng.gen_range(4..=6);
        let (inst, pairs) = sibling_market(&mut rng, n, 1);
        let norm = normalize_msss(&SiblingInstance::new(inst, pairs.clone()).unwrap());
        let order = rotation_order(&norm.instance.base);
        let meta = MetaRotations::all(&order);
        let (a, abar) = pairs[0];
        let oracle = Objective::oracle(move |m: &Matching| int(if together(m, a, abar) { 0 } else { 1 }));
        let direct = differentials(&order, &meta, &oracle).unwrap();
        let closed = msss_tables(&order, a, abar).unwrap();
        assert_eq!(direct, closed);
        if closed.first.iter().any(|x| *x != int(0)) {
            nonzero += 1;
        }
    }
    assert!(nonzero > 10);
}

#[test]
fn msss_matches_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut hist = [0usize; 3];
    for _ in 0..150 {
        let (inst, pairs) = sibling_market(&mut rng, 5, 2);
        let sol = solve_msss(&SiblingInstance::new(inst.clone(), pairs.clone()).unwrap()).unwrap();
        assert!(is_stable(&inst, &sol.matching).unwrap().is_stable());
        assert_eq!(sol.separated, separated_pairs(&sol.matching, &pairs));
        assert_eq!(sol.separated, min_separated(&inst, &pairs));
        hist[sol.separated] += 1;
    }
    assert!(hist.iter().all(|&c| c > 5), "{hist:?}");
}

#[test]
fn msss_on_the_five_student_market() {
    let t = fixture("fig1");
    let inst = t.instance.base;
    let (a1, a2) = (inst.student_index("a1").unwrap(), inst.student_index("a2").unwrap());
    let sol = solve_msss(&SiblingInstance::new(inst.clone(), vec![(a1, a2)]).unwrap()).unwrap();
    assert_eq!(sol.separated, min_separated(&inst, &[(a1, a2)]));
    // Unit quotas: siblings can never share a school.
    assert_eq!(sol.separated, 1);
}

#[test]
fn msss_pairs_together_in_the_optimal_matching_cost_nothing() {
    let inst = parse_sibling_text(
        "students: x y z\nschools: u/2 v/1\npref x: u v @\npref y: u v @\npref z: v u @\npref u: x y z @\npref v: z x y @\n",
    )
    .unwrap()
    .instance;
    let sol = solve_msss(&SiblingInstance::new(inst.base.clone(), vec![(0, 1)]).unwrap()).unwrap();
    assert_eq!(sol.separated, 0);
    assert_eq!(sol.matching, rotation_order(&inst.base).m0);
}

#[test]
fn msss_count_grows_with_pairs() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut grew = 0;
    for _ in 0..80 {
        let (inst, pairs) = sibling_market(&mut rng, 6, 3);
        let mut last = 0;
        for k in 1..=3 {
            let s = solve_msss(&SiblingInstance::new(inst.clone(), pairs[..k].to_vec()).unwrap()).unwrap();
            assert!(s.separated >= last);
            if s.separated > last && k > 1 {
                grew += 1;
            }
            last = s.separated;
        }
    }
    assert!(grew > 5);
}

/// Two copies of a cyclic market, class `j` of each copy in activity `j`.
/// Student `i` of either copy lists the activities cyclically from `i`, and
/// pair `(i, i')` joins student `i` of both copies, so that siblings share
/// an activity order. School lists and student lists get random adjacent
/// swaps (the same ones for both siblings) and some lists are cut short.
fn activity_market(rng: &mut ChaCha8Rng) -> (Instance, ActivityStructure, Vec<(usize, usize)>) {
    let k = rng.gen_range(3..=4);
    let perturb = |rng: &mut ChaCha8Rng, l: &mut Vec<usize>| {
        for _ in 0..rng.gen_range(0..2) {
            let i = rng.gen_range(0..l.len() - 1);
            l.swap(i, i + 1);
        }
    };
    let mut sp: Vec<Vec<Option<usize>>> = vec![Vec::new(); 2 * k];
    for i in 0..k {
        let mut order: Vec<usize> = (0..k).map(|j| (i + j) % k).collect();
        perturb(rng, &mut order);
        if rng.gen_bool(0.15) {
            order.pop();
        }
        for copy in 0..2 {
            let mut l: Vec<Option<usize>> = order.iter().map(|&j| Some(copy * k + j)).collect();
            if copy == 1 && rng.gen_bool(0.15) {
                l.pop();
            }
            l.push(None);
            let rest: Vec<Option<usize>> = (0..2 * k).map(Some).filter(|b| !l.contains(b)).collect();
            l.extend(rest);
            sp[copy * k + i] = l;
        }
    }
    let mut bp = Vec::new();
    for copy in 0..2 {
        for j in 0..k {
            let mut order: Vec<usize> = (0..k).map(|t| (j + 1 + t) % k).collect();
            perturb(rng, &mut order);
            let mut l: Vec<Option<usize>> = order.iter().map(|&i| Some(copy * k + i)).collect();
            l.push(None);
            let rest: Vec<Option<usize>> = (0..2 * k).map(Some).filter(|a| !l.contains(a)).collect();
            l.extend(rest);
            bp.push(l);
        }
    }
    let students = (0..2 * k).map(|i| format!("s{i}")).collect();
    let schools = (0..2 * k).map(|b| format!("c{}_{}", b % k, b / k)).collect();
    let inst = Instance::new(students, schools, vec![1; 2 * k], sp, bp).unwrap();
    let mut ids: Vec<usize> = (0..k).collect();
    ids.shuffle(rng);
    let pairs = ids[..rng.gen_range(1..=2)].iter().map(|&i| (i, k + i)).collect();
    let groups = (0..k).map(|j| (format!("c{j}"), vec![j, k + j])).collect();
    let acts = ActivityStructure::new(&inst, groups).unwrap();
    (inst, acts, pairs)
}

fn same_activity(acts: &ActivityStructure, m: &Matching, a: usize, b: usize) -> bool {
    is_activity_stable(acts, m, &[(a, b)])
}

#[test]
fn pair_objectives_vanish_exactly_on_same_activity_matchings() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (mut irp, mut linear, mut mixed) = (0, 0, 0);
    for _ in 0..300 {
        let (inst, acts, pairs) = activity_market(&mut rng);
        if acts.check_same_order(&inst, &pairs).is_err() {
            continue;
        }
        let order = rotation_order(&inst);
        let upsets = enumerate_upsets(&order, 1_000_000).unwrap();
        for &(a, abar) in &pairs {
            match mssp_pair_family(&inst, &order, &acts, a, abar) {
                PairFamily::Irp(specs) => {
                    assert!(specs.len() <= acts.len() + 1);
                    irp += 1;
                }
                PairFamily::Linear(_) => linear += 1,
            }
            let bundle = mssp_pair_objective(&inst, &order, &acts, a, abar).unwrap();
            let mut zero = (false, false);
            for r in &upsets {
                let m = matching_of(&order, r).unwrap();
                let v = bundle.value_at(r).expect("upsets have finite cuts");
                let ok = same_activity(&acts, &m, a, abar);
                assert_eq!(v == int(0), ok);
                if ok {
                    zero.0 = true
                } else {
                    zero.1 = true
                }
            }
            if zero.0 && zero.1 {
                mixed += 1;
            }
        }
    }
    assert!(irp > 50 && linear > 5 && mixed > 20, "irp {irp}, linear {linear}, mixed {mixed}");
}

#[test]
fn mssp_agrees_with_brute_force_and_exhaustive_search() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let (mut yes, mut no) = (0, 0);
    for _ in 0..300 {
        let (inst, acts, pairs) = activity_market(&mut rng);
        if acts.check_same_order(&inst, &pairs).is_err() {
            continue;
        }
        let exists = stable_all(&inst).iter().any(|m| is_activity_stable(&acts, m, &pairs));
        let got = solve_mssp(&inst, &acts, &pairs).unwrap();
        let brute = solve_msdp_bruteforce(&inst, &acts, &pairs, 1_000_000).unwrap();
        assert_eq!(got.is_some(), exists);
        assert_eq!(brute.is_some(), exists);
        if let Some(m) = got {
            assert!(is_stable(&inst, &m).unwrap().is_stable());
            assert!(is_activity_stable(&acts, &m, &pairs));
            yes += 1;
        } else {
            no += 1;
        }
    }
    assert!(yes > 20 && no > 20, "yes {yes}, no {no}");
}

#[test]
fn irp_digraph_charges_one_per_violated_constraint() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut comparable = 0;
    for _ in 0..30 {
        let inst =
            random_cyclic_instance(&mut rng, MarketShape { students: 5, schools: 5, max_quota: 1, accept: 1.0 }, 1);
        let order = rotation_order(&inst);
        let upsets = enumerate_upsets(&order, 1_000_000).unwrap();
        for x in 0..order.len() {
            for y in 0..order.len() {
                if x < y && order.geq(x, y) {
                    comparable += 1;
                }
                let cases = [
                    (IrpSpec { theta: IrpEnd::Rotation(x), theta_bar: IrpEnd::Rotation(y) }, None),
                    (IrpSpec { theta: IrpEnd::Empty, theta_bar: IrpEnd::Rotation(y) }, Some(true)),
                    (IrpSpec { theta: IrpEnd::Infinity, theta_bar: IrpEnd::Rotation(y) }, Some(false)),
                ];
                for (spec, want) in cases {
                    let b = irp_digraph(&order, spec).unwrap();
                    for r in &upsets {
                        let ok = match want {
                            None => r.contains(x) == r.contains(y),
                            Some(w) => r.contains(y) == w,
                        };
                        assert_eq!(b.value_at(r), Some(int(if ok { 0 } else { 1 })));
                    }
                }
            }
        }
    }
    assert!(comparable > 10);
    let order = rotation_order(&fixture("fig2").instance.base);
    let spec = IrpSpec { theta: IrpEnd::Empty, theta_bar: IrpEnd::Infinity };
    assert!(matches!(irp_digraph(&order, spec), Err(SiblingError::BothSentinels)));
}

#[test]
fn fig2_family_is_satisfied_by_the_two_extremes_only() {
    let t = fixture("fig2");
    let (inst, acts) = (&t.instance.base, t.activities.as_ref().unwrap());
    let (a, abar) = t.instance.pairs[0];
    let order = rotation_order(inst);
    assert!(matches!(mssp_pair_family(inst, &order, acts, a, abar), PairFamily::Irp(_)));
    let bundle = mssp_pair_objective(inst, &order, acts, a, abar).unwrap();
    let zero: Vec<Matching> = enumerate_upsets(&order, 100)
        .unwrap()
        .iter()
        .filter(|r| bundle.value_at(r) == Some(int(0)))
        .map(|r| matching_of(&order, r).unwrap())
        .collect();
    assert_eq!(zero, vec![order.m0.clone(), order.mz.clone()]);
    assert_eq!(solve_mssp(inst, acts, &t.instance.pairs).unwrap(), Some(order.m0.clone()));
}

#[test]
fn siblings_without_a_common_activity_are_infeasible() {
    let t = parse_sibling_text(
        "students: x y\nschools: u v\npref x: u @ v\npref y: v @ u\npref u: x y @\npref v: y x @\n\
         pair x y\nactivity p: u\nactivity q: v\n",
    )
    .unwrap();
    let (inst, acts, pairs) = (&t.instance.base, t.activities.as_ref().unwrap(), &t.instance.pairs);
    let order = rotation_order(inst);
    assert!(matches!(mssp_pair_family(inst, &order, acts, 0, 1), PairFamily::Linear(_)));
    assert_eq!(solve_mssp(inst, acts, pairs).unwrap(), None);
    assert_eq!(solve_msdp_bruteforce(inst, acts, pairs, 10).unwrap(), None);
}

#[test]
fn mssp_rejects_differing_orders() {
    let t = fixture("fig6");
    let (inst, acts) = (&t.instance.base, t.activities.as_ref().unwrap());
    assert_eq!(solve_mssp(inst, acts, &t.instance.pairs), Err(SiblingError::OrderMismatch(0)));
}

#[test]
fn fig6_has_activity_stable_matchings_that_do_not_form_a_sublattice() {
    let t = fixture("fig6");
    let (inst, acts, pairs) = (t.instance.base.clone(), t.activities.clone().unwrap(), t.instance.pairs.clone());
    let m = solve_msdp_bruteforce(&inst, &acts, &pairs, 100).unwrap().expect("an activity-stable matching exists");
    assert!(is_activity_stable(&acts, &m, &pairs));
    let order = rotation_order(&inst);
    let stable: Vec<Matching> =
        stable_all(&inst).into_iter().filter(|m| is_activity_stable(&acts, m, &pairs)).collect();
    assert!(stable.len() >= 2);
    let ord = order.clone();
    let pred = move |r: &UpSet| is_activity_stable(&acts, &matching_of(&ord, r).unwrap(), &pairs);
    let verdict = check_representability(
        &order,
        &Family::Predicate(std::sync::Arc::new(pred)),
        &Objective::constant(int(0)),
        CheckMode::Exact { cap: 1000 },
    )
    .unwrap();
    let Some(Certificate::NotSublattice(v)) = verdict.certificate() else { panic!("expected a lattice certificate") };
    assert_eq!(v.op, LatticeOp::Join);
    let name = |m: &Matching| {
        let mut v: Vec<String> =
            m.pairs().iter().map(|&(a, b)| format!("{}-{}", inst.student_name(a), inst.school_name(b))).collect();
        v.sort();
        v.join(" ")
    };
    let first = matching_of(&order, &v.first).unwrap();
    let second = matching_of(&order, &v.second).unwrap();
    let want: Vec<String> = stable.iter().map(name).collect();
    assert!(want.contains(&name(&first)) && want.contains(&name(&second)));
    let join = matching_of(&order, &v.result).unwrap();
    assert!(!is_activity_stable(t.activities.as_ref().unwrap(), &join, &t.instance.pairs));
    assert!(!matches!(verdict, Verdict::Representable(_)));
}

#[test]
fn fixture_certificates_through_the_library_constructors() {
    let t = fixture("fig5");
    let (inst, acts, pairs) = (&t.instance.base, t.activities.as_ref().unwrap(), &t.instance.pairs);
    let order = rotation_order(inst);
    let f = activity_mismatch_objective(acts, pairs);
    let verdict = check_representability(&order, &Family::All, &f, CheckMode::Exact { cap: 1000 }).unwrap();
    let Some(Certificate::NegativeSecond { value, .. }) = verdict.certificate() else { panic!("{verdict:?}") };
    assert_eq!((verdict.certificate().unwrap().condition(), value.clone()), ("ii", int(-3)));

    let t = fixture("fig6");
    let (inst, acts, pairs) = (&t.instance.base, t.activities.as_ref().unwrap(), &t.instance.pairs);
    let order = rotation_order(inst);
    let fam = activity_stable_family(&order, acts, pairs);
    let verdict =
        check_representability(&order, &fam, &Objective::constant(int(0)), CheckMode::Exact { cap: 1000 }).unwrap();
    assert!(matches!(verdict.certificate(), Some(Certificate::NotSublattice(v)) if v.op == LatticeOp::Join));
}

use flow_solver::{cut_value, solve_min_cut, Capacity, FlowNetwork, Vertex};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn q(n: i64, d: i64) -> Capacity {
    Capacity::Finite(BigRational::new(n.into(), d.into()))
}

fn side_of(mask: u32, nodes: usize) -> Vec<Vertex> {
    let mut side = vec![Vertex::Source];
    side.extend((0..nodes).filter(|i| mask >> i & 1 == 1).map(Vertex::Node));
    side
}

fn less(a: &Capacity, b: &Capacity) -> bool {
    match (a, b) {
        (Capacity::Finite(x), Capacity::Finite(y)) => x < y,
        (Capacity::Finite(_), Capacity::Infinite) => true,
        _ => false,
    }
}

#[test]
fn caption_network_cut_is_four() {
    let (r1, r2, r3, r1p) = (Vertex::Node(0), Vertex::Node(1), Vertex::Node(2), Vertex::Node(3));
    let mut net = FlowNetwork::new(4);
    for v in [r1, r2, r3, r1p] {
        net.add(Vertex::Source, v, q(1, 1));
    }
    net.add(r3, r2, Capacity::Infinite);
    net.add(r2, r1, Capacity::Infinite);
    net.add(r3, Vertex::Sink, q(1, 2));
    net.add(r3, r1p, q(1, 2));
    net.add(r1p, r3, q(1, 2));
    net.add(r1p, Vertex::Sink, q(3, 2));
    assert_eq!(cut_value(&net, &[Vertex::Source, r1, r1p]), q(4, 1));
    assert_eq!(cut_value(&net, &[Vertex::Source, r3]), Capacity::Infinite);
    let best = solve_min_cut(&net).unwrap();
    assert_eq!(best.value, q(2, 1));
    assert_eq!(best.source_side, vec![Vertex::Source, r1, r2]);
}

fn random_network(rng: &mut ChaCha8Rng, nodes: usize, big: bool) -> FlowNetwork {
    let mut net = FlowNetwork::new(nodes);
    let mut verts: Vec<Vertex> = (0..nodes).map(Vertex::Node).collect();
    verts.push(Vertex::Source);
    verts.push(Vertex::Sink);
    let arcs = rng.gen_range(0..=3 * nodes + 2);
    for _ in 0..arcs {
        let tail = verts[rng.gen_range(0..verts.len())];
        let head = verts[rng.gen_range(0..verts.len())];
        if tail == Vertex::Sink || head == Vertex::Source {
            continue;
        }
        let cap = if rng.gen_bool(0.15) {
            Capacity::Infinite
        } else if big {
            let n: BigInt = BigInt::from(rng.gen_range(0..1000u64)) * BigInt::from(u64::MAX) * BigInt::from(u64::MAX);
            let d: BigInt = BigInt::from(rng.gen_range(1..1000u64)) * BigInt::from(u64::MAX);
            Capacity::Finite(BigRational::new(n, d + 1))
        } else {
            q(rng.gen_range(0..12), rng.gen_range(1..5))
        };
        net.add(tail, head, cap);
    }
    net
}

fn check(net: &FlowNetwork) {
    let res = solve_min_cut(net).unwrap();
    let nodes = net.nodes;
    let mut best = Capacity::Infinite;
    let mut minimal_sides = Vec::new();
    for mask in 0..1u32 << nodes {
        let v = cut_value(net, &side_of(mask, nodes));
        if less(&v, &best) {
            best = v;
            minimal_sides = vec![mask];
        } else if v == best {
            minimal_sides.push(mask);
        }
    }
    assert_eq!(res.value, best);
    assert_eq!(cut_value(net, &res.source_side), res.value.clone());
    if let Capacity::Finite(val) = &res.value {
        // The canonical side is the intersection of all minimum source sides.
        let canon = minimal_sides.iter().fold(u32::MAX >> (32 - nodes.max(1)), |acc, m| acc & m);
        let canon = if nodes == 0 { 0 } else { canon };
        assert_eq!(res.source_side, side_of(canon, nodes));

        // Flow feasibility, conservation and value.
        let mut excess = vec![BigRational::zero(); nodes + 2];
        let idx = |v: Vertex| match v {
            Vertex::Source => 0,
            Vertex::Sink => 1,
            Vertex::Node(i) => i + 2,
        };
        for (arc, f) in net.arcs.iter().zip(&res.flow) {
            assert!(f >= &BigRational::zero());
            if let Capacity::Finite(c) = &arc.cap {
                assert!(f <= c);
            }
            excess[idx(arc.tail)] -= f;
            excess[idx(arc.head)] += f;
        }
        assert!(excess[2..].iter().all(|e| e.is_zero()));
        assert_eq!(&excess[1], val);
    }
}

#[test]
fn matches_exhaustive_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for round in 0..400 {
        let nodes = round % 9;
        check(&random_network(&mut rng, nodes, false));
    }
    for _ in 0..10 {
        check(&random_network(&mut rng, 12, false));
    }
}

#[test]
fn large_rationals_use_the_wide_path() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for round in 0..60 {
        check(&random_network(&mut rng, round % 7, true));
    }
}

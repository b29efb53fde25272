//! Plain-text dumps of rotation orders and cut digraphs.

use std::fmt::Write as _;

use flow_solver::merge_parallel_arcs;
use matching_core::{Instance, Matching};
use mincut_framework::CutBundle;
use rotation_lattice::RotationOrder;

fn pairs(inst: &Instance, m: &Matching) -> String {
    let v: Vec<String> =
        m.pairs().iter().map(|&(a, b)| format!("{}-{}", inst.student_name(a), inst.school_name(b))).collect();
    v.join(" ")
}

/// `m0`/`mz` lines, one `rotation` line per rotation listing each student
/// with the school it leaves and the school it moves to, then one `cover i j`
/// line per Hasse edge (`i` must be eliminated before `j`).
pub fn dump_rotations(inst: &Instance, order: &RotationOrder) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "m0 {}", pairs(inst, &order.m0));
    let _ = writeln!(s, "mz {}", pairs(inst, &order.mz));
    for (i, r) in order.rotations.iter().enumerate() {
        let moves: Vec<String> = r
            .plus
            .iter()
            .map(|&(a, b)| {
                let to = r.minus_of(a).expect("every student of a rotation moves");
                format!("{} {} {}", inst.student_name(a), inst.school_name(b), inst.school_name(to))
            })
            .collect();
        let _ = writeln!(s, "rotation {i}: {}", moves.join(", "));
    }
    for &(i, j) in order.hasse() {
        let _ = writeln!(s, "cover {i} {j}");
    }
    s
}

/// A `# constant c gamma g` line, then one `tail head capacity` line per arc.
/// With `merge`, parallel arcs are summed and zero arcs dropped.
pub fn dump_digraph(bundle: &CutBundle, merge: bool) -> String {
    let net = if merge { merge_parallel_arcs(&bundle.network).prune_zero() } else { bundle.network.clone() };
    let mut s = String::new();
    let _ = writeln!(s, "# constant {} gamma {}", bundle.constant, bundle.gamma);
    for arc in &net.arcs {
        let _ = writeln!(s, "{} {} {}", arc.tail, arc.head, arc.cap);
    }
    s
}

//! Minimal witness replayer.
//!
//! Everything here works by following individual candidate points along the
//! witness, one origin at a time. None of the automaton code is reused, so a
//! replay confirms a verdict from an independent route.

use std::collections::HashSet;

use crate::expansivity::TupleWitness;
use crate::multiplicity::{LassoWitness, TwoSidedCountWitness, UniqueHFailure};
use crate::shadowing::{ShadowingKind, Witness};
use crate::system::{FiniteSystem, PointId};
use crate::threshold::Threshold;

pub type Replay = std::result::Result<(), String>;

fn near(sys: &FiniteSystem, t: &Threshold, a: usize, b: usize) -> bool {
    t.admits(sys.sq(a, b))
}

fn f(sys: &FiniteSystem, x: usize) -> usize {
    sys.map_table()[x]
}

fn ids(v: &[PointId]) -> Vec<usize> {
    v.iter().map(|p| p.0).collect()
}

fn check_ids(sys: &FiniteSystem, v: &[usize]) -> Replay {
    match v.iter().find(|&&i| i >= sys.len()) {
        Some(i) => Err(format!("point {i} out of range")),
        None => Ok(()),
    }
}

/// Consecutive nodes satisfy `d(f(x_i), x_{i+1}) < delta`.
pub fn check_pseudo_orbit(sys: &FiniteSystem, delta: &Threshold, nodes: &[usize]) -> Replay {
    check_ids(sys, nodes)?;
    for (i, w) in nodes.windows(2).enumerate() {
        if !near(sys, delta, f(sys, w[0]), w[1]) {
            return Err(format!("step {i} is not a delta-jump"));
        }
    }
    Ok(())
}

/// `d(f^i(z), x_i) < eps` for every index of the finite sequence.
fn tracks(sys: &FiniteSystem, eps: &Threshold, z: usize, nodes: &[usize]) -> bool {
    let mut p = z;
    for (i, &x) in nodes.iter().enumerate() {
        if i > 0 {
            p = f(sys, p);
        }
        if !near(sys, eps, p, x) {
            return false;
        }
    }
    true
}

/// Position of `z` after `nodes.len() - 1` steps.
fn endpoint(sys: &FiniteSystem, z: usize, steps: usize) -> usize {
    (0..steps).fold(z, |p, _| f(sys, p))
}

fn is_periodic(sys: &FiniteSystem, z: usize) -> bool {
    let mut p = z;
    for _ in 0..sys.len() {
        p = f(sys, p);
        if p == z {
            return true;
        }
    }
    false
}

/// Some backward walk of length `|X|` ends at `x`; by pigeonhole it repeats a
/// node, so it extends to a left-infinite pseudo-orbit.
fn has_long_past(sys: &FiniteSystem, delta: &Threshold, x: usize) -> bool {
    let n = sys.len();
    let mut layer = vec![false; n];
    layer[x] = true;
    for _ in 0..n {
        let next: Vec<bool> = (0..n)
            .map(|u| (0..n).any(|v| layer[v] && near(sys, delta, f(sys, u), v)))
            .collect();
        layer = next;
        if !layer.iter().any(|&b| b) {
            return false;
        }
    }
    true
}

/// Does `z`, tracking `prefix`, then asymptotically coincide with the true
/// orbit continuing from the last prefix node?
fn asymptotic_tracker(sys: &FiniteSystem, eps: &Threshold, z: usize, prefix: &[usize]) -> bool {
    if !tracks(sys, eps, z, prefix) {
        return false;
    }
    let mut x = *prefix.last().expect("nonempty prefix");
    let mut p = endpoint(sys, z, prefix.len() - 1);
    let mut seen = HashSet::new();
    loop {
        if !near(sys, eps, p, x) {
            return false;
        }
        if p == x {
            return true;
        }
        if !seen.insert((x, p)) {
            return false;
        }
        x = f(sys, x);
        p = f(sys, p);
    }
}

/// Confirms a failure witness for the two-sided s-limit reduction.
pub fn replay_two_sided_s_limit(sys: &FiniteSystem, eps: &Threshold, delta: &Threshold, w: &Witness) -> Replay {
    let nodes = ids(&w.nodes);
    if nodes.is_empty() {
        return Err("empty witness".into());
    }
    check_pseudo_orbit(sys, delta, &nodes)?;
    if !has_long_past(sys, delta, nodes[0]) {
        return Err("witness does not start at a left-extendable node".into());
    }
    match (0..sys.len()).find(|&z| is_periodic(sys, z) && asymptotic_tracker(sys, eps, z, &nodes)) {
        Some(z) => Err(format!("point {} shadows the witness", sys.label(PointId(z)))),
        None => Ok(()),
    }
}

/// Confirms that a shadowing witness demonstrates failure at `(eps, delta)`.
pub fn replay_shadowing(sys: &FiniteSystem, kind: ShadowingKind, eps: &Threshold, delta: &Threshold, w: &Witness) -> Replay {
    let nodes = ids(&w.nodes);
    if nodes.is_empty() {
        return Err("empty witness".into());
    }
    check_pseudo_orbit(sys, delta, &nodes)?;
    let last = *nodes.last().unwrap();
    let steps = nodes.len() - 1;
    let all = 0..sys.len();
    let found = match kind {
        ShadowingKind::Forward => all.clone().find(|&z| tracks(sys, eps, z, &nodes)),
        ShadowingKind::Backward | ShadowingKind::TwoSided => {
            if !has_long_past(sys, delta, nodes[0]) {
                return Err("witness does not start at a left-extendable node".into());
            }
            let core_only = kind == ShadowingKind::TwoSided;
            all.clone()
                .filter(|&z| !core_only || is_periodic(sys, z))
                .find(|&z| tracks(sys, eps, z, &nodes))
        }
        ShadowingKind::H => all
            .clone()
            .find(|&z| tracks(sys, eps, z, &nodes) && endpoint(sys, z, steps) == last),
        ShadowingKind::SLimit => all.clone().find(|&z| asymptotic_tracker(sys, eps, z, &nodes)),
    };
    match found {
        Some(z) => Err(format!("point {} shadows the witness", sys.label(PointId(z)))),
        None => Ok(()),
    }
}

/// Follows `z` along `stem · cycle^∞` until (cycle phase, position) repeats.
fn tracks_lasso(sys: &FiniteSystem, eps: &Threshold, z: usize, stem: &[usize], cycle: &[usize]) -> bool {
    let mut p = z;
    let mut first = true;
    for &x in stem {
        if !first {
            p = f(sys, p);
        }
        first = false;
        if !near(sys, eps, p, x) {
            return false;
        }
    }
    let mut seen = HashSet::new();
    let mut phase = 0;
    loop {
        if !first {
            p = f(sys, p);
        }
        first = false;
        if !near(sys, eps, p, cycle[phase]) {
            return false;
        }
        if !seen.insert((phase, p)) {
            return true;
        }
        phase = (phase + 1) % cycle.len();
    }
}

fn distinct(v: &[usize]) -> bool {
    v.iter().collect::<HashSet<_>>().len() == v.len()
}

/// Confirms that at least `m` distinct origins track the lasso forever.
pub fn replay_lasso(sys: &FiniteSystem, eps: &Threshold, delta: &Threshold, m: usize, w: &LassoWitness) -> Replay {
    let stem = ids(&w.stem);
    let cycle = ids(&w.cycle);
    let origins = ids(&w.origins);
    if cycle.is_empty() {
        return Err("empty cycle".into());
    }
    check_ids(sys, &origins)?;
    let mut path = stem.clone();
    path.extend(&cycle);
    path.push(cycle[0]);
    check_pseudo_orbit(sys, delta, &path)?;
    if origins.len() < m || !distinct(&origins) {
        return Err(format!("need {m} distinct origins"));
    }
    for &z in &origins {
        if !tracks_lasso(sys, eps, z, &stem, &cycle) {
            return Err(format!("origin {} does not track the lasso", sys.label(PointId(z))));
        }
    }
    Ok(())
}

pub fn replay_unique_h(sys: &FiniteSystem, eps: &Threshold, delta: &Threshold, w: &UniqueHFailure) -> Replay {
    match w {
        UniqueHFailure::NoExactHit(w) => replay_shadowing(sys, ShadowingKind::H, eps, delta, w),
        UniqueHFailure::TwoShadowers { nodes, origins } => {
            let nodes = ids(nodes);
            let origins = ids(origins);
            if nodes.is_empty() {
                return Err("empty witness".into());
            }
            check_ids(sys, &origins)?;
            check_pseudo_orbit(sys, delta, &nodes)?;
            if origins[0] == origins[1] {
                return Err("origins coincide".into());
            }
            let last = *nodes.last().unwrap();
            for &z in &origins {
                if !tracks(sys, eps, z, &nodes) || endpoint(sys, z, nodes.len() - 1) != last {
                    return Err(format!("{} is not an exact-hit shadower", sys.label(PointId(z))));
                }
            }
            Ok(())
        }
    }
}

/// Confirms `m` distinct periodic origins track the periodic pseudo-orbit
/// `cycle^Z`. Periodic points and a periodic pseudo-orbit make the joint
/// motion periodic, so one full joint period covers negative time as well.
pub fn replay_two_sided_count(sys: &FiniteSystem, eps: &Threshold, delta: &Threshold, m: usize, w: &TwoSidedCountWitness) -> Replay {
    let cycle = ids(&w.cycle);
    let origins = ids(&w.origins);
    if cycle.is_empty() {
        return Err("empty cycle".into());
    }
    check_ids(sys, &origins)?;
    let mut path = cycle.clone();
    path.push(cycle[0]);
    check_pseudo_orbit(sys, delta, &path)?;
    if origins.len() < m || !distinct(&origins) {
        return Err(format!("need {m} distinct origins"));
    }
    for &z in &origins {
        if !is_periodic(sys, z) {
            return Err(format!("{} has no two-sided orbit", sys.label(PointId(z))));
        }
        if !tracks_lasso(sys, eps, z, &[], &cycle) {
            return Err(format!("{} does not track the cycle", sys.label(PointId(z))));
        }
    }
    Ok(())
}

/// Confirms a two-sided expansivity violation: a cycle of tuples under the
/// coordinatewise map, each frame holding `n + 1` distinct points within `r`
/// of its centre.
pub fn replay_tuple(sys: &FiniteSystem, n: usize, r: &Threshold, w: &TupleWitness) -> Replay {
    if w.frames.is_empty() {
        return Err("empty witness".into());
    }
    for (i, (a, bs)) in w.frames.iter().enumerate() {
        let bs = ids(bs);
        check_ids(sys, &bs)?;
        check_ids(sys, &[a.0])?;
        if bs.len() != n + 1 || !distinct(&bs) {
            return Err(format!("frame {i} does not hold {} distinct points", n + 1));
        }
        if let Some(b) = bs.iter().find(|&&b| !near(sys, r, a.0, b)) {
            return Err(format!("frame {i}: {} is too far", sys.label(PointId(*b))));
        }
        let (na, nb) = &w.frames[(i + 1) % w.frames.len()];
        let mut img: Vec<usize> = bs.iter().map(|&b| f(sys, b)).collect();
        img.sort_unstable();
        let mut next = ids(nb);
        next.sort_unstable();
        if f(sys, a.0) != na.0 || img != next {
            return Err(format!("frame {i} does not map onto the next frame"));
        }
    }
    Ok(())
}

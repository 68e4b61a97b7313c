//! Counting shadowers with tuple automata.

use std::collections::{HashMap, VecDeque};

use serde::Serialize;
use serde_json::json;

use crate::error::{Error, Result};
use crate::expansivity::surjective_core;
use crate::lattice::{edge_lattice, monotone_sweep};
use crate::pointset::PointSet;
use crate::shadowing::{decide_forward, decide_h, left_extendable, pseudo_graph, Budget, Verdict, Witness};
use crate::system::{FiniteSystem, PointId};
use crate::threshold::Threshold;

/// A pseudo-orbit node together with the sorted positions of trackers whose
/// origins were pairwise distinct.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TupleState {
    pub node: usize,
    pub positions: Vec<usize>,
}

/// A lasso `stem · cycle^∞` and the distinct origins that track it forever.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LassoWitness {
    pub stem: Vec<PointId>,
    pub cycle: Vec<PointId>,
    pub origins: Vec<PointId>,
}

impl LassoWitness {
    pub fn to_json(&self, sys: &FiniteSystem) -> serde_json::Value {
        json!({
            "stem": sys.labels_of(&self.stem),
            "cycle": sys.labels_of(&self.cycle),
            "origins": sys.labels_of(&self.origins),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum MaxCount {
    Exact(usize),
    AtLeast(usize),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CountReport {
    pub epsilon: Threshold,
    pub delta: Threshold,
    pub max_count: MaxCount,
    pub witness: Option<LassoWitness>,
}

impl CountReport {
    pub fn to_json(&self, sys: &FiniteSystem) -> serde_json::Value {
        let count = match self.max_count {
            MaxCount::Exact(k) => json!(k),
            MaxCount::AtLeast(c) => json!({ "at_least": c }),
        };
        json!({
            "epsilon": self.epsilon.to_string(),
            "delta": self.delta.to_string(),
            "max_count": count,
            "witness": self.witness.as_ref().map(|w| w.to_json(sys)),
        })
    }

    /// The count as a lower bound.
    pub fn at_least(&self) -> usize {
        match self.max_count {
            MaxCount::Exact(k) | MaxCount::AtLeast(k) => k,
        }
    }
}

fn check_args(n: usize, eps: &Threshold, delta: &Threshold) -> Result<()> {
    if n == 0 {
        return Err(Error::Degenerate("n must be at least 1".into()));
    }
    if eps.is_zero() || delta.is_zero() {
        return Err(Error::Degenerate("epsilon and delta must be positive".into()));
    }
    Ok(())
}

fn subsets(items: &[usize], k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(items: &[usize], k: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..items.len() {
            if items.len() - i < k - cur.len() {
                break;
            }
            cur.push(items[i]);
            rec(items, k, i + 1, cur, out);
            cur.pop();
        }
    }
    rec(items, k, 0, &mut cur, &mut out);
    out
}

/// Explicit tuple graph: states, their successors, and BFS parents.
struct TupleGraph {
    states: Vec<TupleState>,
    succ: Vec<Vec<usize>>,
    parent: Vec<Option<usize>>,
}

impl TupleGraph {
    /// Breadth-first exploration from `initials`; successors follow each
    /// `delta`-edge in PointId order and map every position through `f`.
    fn explore(
        sys: &FiniteSystem,
        delta: &Threshold,
        balls: &[PointSet],
        initials: Vec<TupleState>,
        budget: Budget,
    ) -> Result<TupleGraph> {
        let graph = pseudo_graph(sys, delta)?;
        let map = sys.map_table();
        let mut index: HashMap<TupleState, usize> = HashMap::new();
        let mut g = TupleGraph {
            states: Vec::new(),
            succ: Vec::new(),
            parent: Vec::new(),
        };
        let mut queue = VecDeque::new();
        fn add(
            g: &mut TupleGraph,
            index: &mut HashMap<TupleState, usize>,
            queue: &mut VecDeque<usize>,
            budget: Budget,
            s: TupleState,
            parent: Option<usize>,
        ) -> Result<usize> {
            if let Some(&i) = index.get(&s) {
                return Ok(i);
            }
            if g.states.len() >= budget.0 {
                return Err(Error::BudgetExceeded { limit: budget.0 });
            }
            let i = g.states.len();
            index.insert(s.clone(), i);
            g.states.push(s);
            g.succ.push(Vec::new());
            g.parent.push(parent);
            queue.push_back(i);
            Ok(i)
        }
        for s in initials {
            add(&mut g, &mut index, &mut queue, budget, s, None)?;
        }
        while let Some(i) = queue.pop_front() {
            let mut img: Vec<usize> = g.states[i].positions.iter().map(|&p| map[p]).collect();
            img.sort_unstable();
            let x = g.states[i].node;
            for y in graph.successors(x) {
                if img.iter().all(|&p| balls[y].contains(p)) {
                    let j = add(
                        &mut g,
                        &mut index,
                        &mut queue,
                        budget,
                        TupleState {
                            node: y,
                            positions: img.clone(),
                        },
                        Some(i),
                    )?;
                    if !g.succ[i].contains(&j) {
                        g.succ[i].push(j);
                    }
                }
            }
        }
        Ok(g)
    }

    /// States with an infinite forward path: repeatedly drop states whose
    /// successors have all been dropped.
    fn forward_infinite(&self) -> Vec<bool> {
        let n = self.states.len();
        let mut pred: Vec<Vec<usize>> = vec![Vec::new(); n];
        let mut out: Vec<usize> = self.succ.iter().map(Vec::len).collect();
        for (i, s) in self.succ.iter().enumerate() {
            for &j in s {
                pred[j].push(i);
            }
        }
        let mut alive = vec![true; n];
        let mut stack: Vec<usize> = (0..n).filter(|&i| out[i] == 0).collect();
        while let Some(i) = stack.pop() {
            if !alive[i] {
                continue;
            }
            alive[i] = false;
            for &p in &pred[i] {
                out[p] -= 1;
                if out[p] == 0 && alive[p] {
                    stack.push(p);
                }
            }
        }
        alive
    }

    /// States with an infinite backward path inside the graph.
    fn backward_infinite(&self) -> Vec<bool> {
        let n = self.states.len();
        let mut indeg = vec![0usize; n];
        for s in &self.succ {
            for &j in s {
                indeg[j] += 1;
            }
        }
        let mut alive = vec![true; n];
        let mut stack: Vec<usize> = (0..n).filter(|&i| indeg[i] == 0).collect();
        while let Some(i) = stack.pop() {
            if !alive[i] {
                continue;
            }
            alive[i] = false;
            for &j in &self.succ[i] {
                indeg[j] -= 1;
                if indeg[j] == 0 {
                    stack.push(j);
                }
            }
        }
        alive
    }

    fn stem_to(&self, mut i: usize) -> Vec<usize> {
        let mut path = vec![i];
        while let Some(p) = self.parent[i] {
            path.push(p);
            i = p;
        }
        path.reverse();
        path
    }

    /// From `start`, follow the first live successor until a state repeats.
    /// Returns (path before the loop, loop).
    fn lasso_from(&self, start: usize, alive: &[bool]) -> (Vec<usize>, Vec<usize>) {
        let mut seen: HashMap<usize, usize> = HashMap::new();
        let mut walk = Vec::new();
        let mut cur = start;
        loop {
            if let Some(&k) = seen.get(&cur) {
                let cycle = walk.split_off(k);
                return (walk, cycle);
            }
            seen.insert(cur, walk.len());
            walk.push(cur);
            cur = *self.succ[cur]
                .iter()
                .find(|&&j| alive[j])
                .expect("live state has a live successor");
        }
    }

    fn nodes(&self, idx: &[usize]) -> Vec<PointId> {
        idx.iter().map(|&i| PointId(self.states[i].node)).collect()
    }
}

/// Lasso witnessing `m` distinct origins that track one infinite pseudo-orbit.
fn tracked_lasso(sys: &FiniteSystem, m: usize, eps: &Threshold, delta: &Threshold, budget: Budget) -> Result<Option<LassoWitness>> {
    let balls = sys.closeness(eps);
    let mut initials = Vec::new();
    for x in 0..sys.len() {
        for ps in subsets(&balls[x].to_vec(), m) {
            initials.push(TupleState { node: x, positions: ps });
        }
    }
    let g = TupleGraph::explore(sys, delta, &balls, initials, budget)?;
    let alive = g.forward_infinite();
    // BFS order makes the first live state one with a shortest stem
    let Some(first) = (0..g.states.len()).find(|&i| alive[i]) else {
        return Ok(None);
    };
    let mut stem = g.stem_to(first);
    let origins = g.states[stem[0]].positions.iter().map(|&p| PointId(p)).collect();
    stem.pop();
    let (walk, cycle) = g.lasso_from(first, &alive);
    stem.extend(walk);
    Ok(Some(LassoWitness {
        stem: g.nodes(&stem),
        cycle: g.nodes(&cycle),
        origins,
    }))
}

/// No infinite `delta`-pseudo-orbit is `eps`-shadowed by `n + 1` distinct points.
pub fn count_at_most(sys: &FiniteSystem, n: usize, eps: &Threshold, delta: &Threshold, budget: Budget) -> Result<Verdict<LassoWitness>> {
    check_args(n, eps, delta)?;
    Ok(match tracked_lasso(sys, n + 1, eps, delta, budget)? {
        None => Verdict::Holds,
        Some(w) => Verdict::Fails(w),
    })
}

/// Largest `m <= cap` such that some infinite pseudo-orbit has `m` eternal
/// shadowers, scanning `m = 2, 3, ...` upward.
pub fn max_shadower_count(sys: &FiniteSystem, eps: &Threshold, delta: &Threshold, cap: usize, budget: Budget) -> Result<CountReport> {
    if cap == 0 {
        return Err(Error::Degenerate("cap must be at least 1".into()));
    }
    check_args(1, eps, delta)?;
    let mut witness = tracked_lasso(sys, 1, eps, delta, budget)?;
    if witness.is_none() {
        return Err(Error::Internal("true orbits must shadow themselves".into()));
    }
    let mut best = 1;
    for m in 2..=cap {
        match tracked_lasso(sys, m, eps, delta, budget)? {
            Some(w) => {
                witness = Some(w);
                best = m;
            }
            None => {
                return Ok(CountReport {
                    epsilon: eps.clone(),
                    delta: delta.clone(),
                    max_count: MaxCount::Exact(best),
                    witness,
                })
            }
        }
    }
    Ok(CountReport {
        epsilon: eps.clone(),
        delta: delta.clone(),
        max_count: MaxCount::AtLeast(cap),
        witness,
    })
}

/// `sup { delta : forward shadowing and at most n shadowers }`.
pub fn n_shadow_modulus(sys: &FiniteSystem, n: usize, eps: &Threshold, budget: Budget) -> Result<Threshold> {
    check_args(n, eps, &Threshold::Unbounded)?;
    monotone_sweep(&edge_lattice(sys), |d| {
        Ok(decide_forward(sys, eps, d, budget)?.holds() && count_at_most(sys, n, eps, d, budget)?.holds())
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum UniqueHFailure {
    /// Some finite pseudo-orbit has no exact-hit shadower.
    NoExactHit(Witness),
    /// A finite pseudo-orbit with two distinct exact-hit shadowers.
    TwoShadowers { nodes: Vec<PointId>, origins: [PointId; 2] },
}

/// Every finite pseudo-orbit has exactly one exact-hit shadower.
pub fn decide_unique_h(sys: &FiniteSystem, eps: &Threshold, delta: &Threshold, budget: Budget) -> Result<Verdict<UniqueHFailure>> {
    check_args(1, eps, delta)?;
    if let Verdict::Fails(w) = decide_h(sys, eps, delta, budget)? {
        return Ok(Verdict::Fails(UniqueHFailure::NoExactHit(w)));
    }
    let graph = pseudo_graph(sys, delta)?;
    let balls = sys.closeness(eps);
    let map = sys.map_table();
    let mut index: HashMap<(usize, usize, usize), usize> = HashMap::new();
    let mut states: Vec<(usize, usize, usize)> = Vec::new();
    let mut parent: Vec<Option<usize>> = Vec::new();
    let mut queue = VecDeque::new();
    for x in 0..sys.len() {
        let ball = balls[x].to_vec();
        for (i, &p) in ball.iter().enumerate() {
            for &q in &ball[i + 1..] {
                index.insert((x, p, q), states.len());
                states.push((x, p, q));
                parent.push(None);
                queue.push_back(states.len() - 1);
            }
        }
    }
    let trace = |states: &[(usize, usize, usize)], parent: &[Option<usize>], mut i: usize| {
        let mut nodes = vec![PointId(states[i].0)];
        while let Some(p) = parent[i] {
            nodes.push(PointId(states[p].0));
            i = p;
        }
        nodes.reverse();
        let (_, a, b) = states[i];
        (nodes, [PointId(a), PointId(b)])
    };
    while let Some(i) = queue.pop_front() {
        let (x, p, q) = states[i];
        if p == x && q == x {
            let (nodes, origins) = trace(&states, &parent, i);
            return Ok(Verdict::Fails(UniqueHFailure::TwoShadowers { nodes, origins }));
        }
        let (fp, fq) = {
            let (a, b) = (map[p], map[q]);
            (a.min(b), a.max(b))
        };
        for y in graph.successors(x) {
            if !(balls[y].contains(fp) && balls[y].contains(fq)) {
                continue;
            }
            let key = (y, fp, fq);
            if index.contains_key(&key) {
                continue;
            }
            if states.len() >= budget.0 {
                return Err(Error::BudgetExceeded { limit: budget.0 });
            }
            index.insert(key, states.len());
            states.push(key);
            parent.push(Some(i));
            queue.push_back(states.len() - 1);
        }
    }
    Ok(Verdict::Holds)
}

/// A periodic pseudo-orbit `cycle^Z` tracked by `n + 1` distinct two-sided
/// orbits through `origins` at the first cycle position.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TwoSidedCountWitness {
    pub cycle: Vec<PointId>,
    pub origins: Vec<PointId>,
}

impl TwoSidedCountWitness {
    pub fn to_json(&self, sys: &FiniteSystem) -> serde_json::Value {
        json!({
            "cycle": sys.labels_of(&self.cycle),
            "origins": sys.labels_of(&self.origins),
        })
    }
}

/// No two-sided `delta`-pseudo-orbit is tracked by `n + 1` distinct two-sided
/// orbits. Two-sided orbits live in the surjective core, where `f` is a
/// bijection, so tracker positions stay distinct. A bi-infinite allowed path
/// exists iff the tuple graph restricted to states that are both backward-
/// and forward-extendable is nonempty.
pub fn two_sided_count_at_most(
    sys: &FiniteSystem,
    n: usize,
    eps: &Threshold,
    delta: &Threshold,
    budget: Budget,
) -> Result<Verdict<TwoSidedCountWitness>> {
    check_args(n, eps, delta)?;
    let core = surjective_core(sys).core_set(sys.len());
    let le = left_extendable(&pseudo_graph(sys, delta)?);
    let balls = sys.closeness(eps);
    let mut initials = Vec::new();
    for x in le.iter() {
        let mut b = balls[x].clone();
        b.intersect_with(&core);
        for ps in subsets(&b.to_vec(), n + 1) {
            initials.push(TupleState { node: x, positions: ps });
        }
    }
    let g = TupleGraph::explore(sys, delta, &balls, initials, budget)?;
    let fwd = g.forward_infinite();
    let bwd = g.backward_infinite();
    let live: Vec<bool> = fwd.iter().zip(&bwd).map(|(a, b)| *a && *b).collect();
    let Some(first) = (0..g.states.len()).find(|&i| live[i]) else {
        return Ok(Verdict::Holds);
    };
    // live states with a live successor exist by the two peelings, so the
    // walk closes into a cycle of live states
    let (_, cycle) = g.lasso_from(first, &live);
    let origins = g.states[cycle[0]].positions.iter().map(|&p| PointId(p)).collect();
    Ok(Verdict::Fails(TwoSidedCountWitness {
        cycle: g.nodes(&cycle),
        origins,
    }))
}

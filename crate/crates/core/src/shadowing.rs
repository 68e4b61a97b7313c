//! Shadowing deciders built on the survivor subset automaton.
//!
//! A state `(x, S)` pairs the current pseudo-orbit point `x` with the set `S`
//! of current positions of every candidate shadower that has stayed within
//! `eps` so far. Following a `delta`-edge `x -> x'` moves the state to
//! `(x', f(S) ∩ ball(x', eps))`. Each decider searches breadth-first for a
//! reachable "bad" state; bad-ness is antitone in `S`, so a state is skipped
//! when an earlier state at the same node has a subset of its survivors.

use std::collections::VecDeque;

use serde::Serialize;
use serde_json::json;

use crate::error::{Error, Result};
use crate::expansivity;
use crate::lattice::{edge_lattice, monotone_sweep};
use crate::pointset::PointSet;
use crate::system::{FiniteSystem, PointId};
use crate::threshold::Threshold;

/// Cap on explored automaton states.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Budget(pub usize);

impl Default for Budget {
    fn default() -> Self {
        Budget(5_000_000)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict<W> {
    Holds,
    Fails(W),
}

impl<W> Verdict<W> {
    pub fn holds(&self) -> bool {
        matches!(self, Verdict::Holds)
    }

    pub fn witness(&self) -> Option<&W> {
        match self {
            Verdict::Holds => None,
            Verdict::Fails(w) => Some(w),
        }
    }
}

/// A finite pseudo-orbit certifying failure. For s-limit failures the
/// pseudo-orbit continues along the true orbit of the last node.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Witness {
    pub nodes: Vec<PointId>,
}

pub type ShadowVerdict = Verdict<Witness>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ShadowingKind {
    Forward,
    Backward,
    #[serde(rename = "twosided")]
    TwoSided,
    H,
    #[serde(rename = "slimit")]
    SLimit,
}

impl ShadowingKind {
    pub const ALL: [ShadowingKind; 5] = [
        ShadowingKind::Forward,
        ShadowingKind::Backward,
        ShadowingKind::TwoSided,
        ShadowingKind::H,
        ShadowingKind::SLimit,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ShadowingKind::Forward => "forward",
            ShadowingKind::Backward => "backward",
            ShadowingKind::TwoSided => "twosided",
            ShadowingKind::H => "h",
            ShadowingKind::SLimit => "slimit",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        ShadowingKind::ALL.into_iter().find(|k| k.name() == s)
    }
}

/// The `delta`-pseudo-orbit graph: `x -> y` iff `d(f(x), y) < delta`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PseudoOrbitGraph {
    pub delta: Threshold,
    pub adjacency: Vec<PointSet>,
}

impl PseudoOrbitGraph {
    pub fn successors(&self, x: usize) -> impl Iterator<Item = usize> + '_ {
        self.adjacency[x].iter()
    }

    pub fn has_edge(&self, x: usize, y: usize) -> bool {
        self.adjacency[x].contains(y)
    }

    pub fn len(&self) -> usize {
        self.adjacency.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adjacency.is_empty()
    }
}

pub fn pseudo_graph(sys: &FiniteSystem, delta: &Threshold) -> Result<PseudoOrbitGraph> {
    if delta.is_zero() {
        return Err(Error::Degenerate("delta must be positive".into()));
    }
    let rows = sys.closeness(delta);
    Ok(PseudoOrbitGraph {
        delta: delta.clone(),
        adjacency: sys.map_table().iter().map(|&fx| rows[fx].clone()).collect(),
    })
}

/// Nodes through which some left-infinite walk passes, i.e. nodes reachable
/// from a directed cycle. Computed by repeatedly deleting nodes without
/// remaining predecessors.
pub fn left_extendable(graph: &PseudoOrbitGraph) -> PointSet {
    let n = graph.len();
    let mut indeg = vec![0usize; n];
    for x in 0..n {
        for y in graph.successors(x) {
            indeg[y] += 1;
        }
    }
    let mut alive = PointSet::full(n);
    let mut stack: Vec<usize> = (0..n).filter(|&x| indeg[x] == 0).collect();
    while let Some(x) = stack.pop() {
        alive.remove(x);
        for y in graph.successors(x) {
            indeg[y] -= 1;
            if indeg[y] == 0 {
                stack.push(y);
            }
        }
    }
    alive
}

fn check_positive(eps: &Threshold, delta: &Threshold) -> Result<()> {
    if eps.is_zero() {
        return Err(Error::Degenerate("epsilon must be positive".into()));
    }
    if delta.is_zero() {
        return Err(Error::Degenerate("delta must be positive".into()));
    }
    Ok(())
}

pub(crate) fn image_set(sys: &FiniteSystem, s: &PointSet) -> PointSet {
    let mut out = PointSet::empty(sys.len());
    for p in s.iter() {
        out.insert(sys.map_table()[p]);
    }
    out
}

struct Automaton<'a> {
    sys: &'a FiniteSystem,
    graph: &'a PseudoOrbitGraph,
    balls: &'a [PointSet],
    /// Restricts tracker positions (used for the core-restricted route).
    filter: Option<&'a PointSet>,
    budget: Budget,
}

/// Explored states with per-node antichains of minimal survivor sets.
struct Store {
    nodes: Vec<usize>,
    sets: Vec<PointSet>,
    parent: Vec<usize>,
    minimal: Vec<Vec<usize>>,
    queue: VecDeque<usize>,
    budget: Budget,
}

impl Store {
    fn new(n: usize, budget: Budget) -> Self {
        Store {
            nodes: Vec::new(),
            sets: Vec::new(),
            parent: Vec::new(),
            minimal: vec![Vec::new(); n],
            queue: VecDeque::new(),
            budget,
        }
    }

    fn admit(&mut self, node: usize, set: PointSet, from: usize) -> Result<()> {
        let sets = &self.sets;
        if self.minimal[node].iter().any(|&i| sets[i].is_subset(&set)) {
            return Ok(());
        }
        self.minimal[node].retain(|&i| !set.is_subset(&sets[i]));
        if self.sets.len() >= self.budget.0 {
            return Err(Error::BudgetExceeded {
                limit: self.budget.0,
            });
        }
        let idx = self.sets.len();
        self.nodes.push(node);
        self.sets.push(set);
        self.parent.push(from);
        self.minimal[node].push(idx);
        self.queue.push_back(idx);
        Ok(())
    }

    fn path_to(&self, mut i: usize, last: usize) -> Vec<usize> {
        let mut path = vec![last];
        loop {
            path.push(self.nodes[i]);
            if self.parent[i] == usize::MAX {
                break;
            }
            i = self.parent[i];
        }
        path.reverse();
        path
    }
}

impl Automaton<'_> {
    /// Breadth-first search for a bad state; returns the node path to the
    /// first one found.
    fn search<B>(&self, initials: impl Iterator<Item = usize>, bad: B) -> Result<Option<Vec<usize>>>
    where
        B: Fn(usize, &PointSet) -> bool,
    {
        let mut store = Store::new(self.sys.len(), self.budget);
        for x in initials {
            let mut s = self.balls[x].clone();
            if let Some(f) = self.filter {
                s.intersect_with(f);
            }
            if bad(x, &s) {
                return Ok(Some(vec![x]));
            }
            store.admit(x, s, usize::MAX)?;
        }
        while let Some(i) = store.queue.pop_front() {
            let x = store.nodes[i];
            let mut img = image_set(self.sys, &store.sets[i]);
            if let Some(f) = self.filter {
                img.intersect_with(f);
            }
            for y in self.graph.successors(x) {
                let mut s = img.clone();
                s.intersect_with(&self.balls[y]);
                if bad(y, &s) {
                    return Ok(Some(store.path_to(i, y)));
                }
                store.admit(y, s, i)?;
            }
        }
        Ok(None)
    }
}

fn to_verdict(path: Option<Vec<usize>>) -> ShadowVerdict {
    match path {
        None => Verdict::Holds,
        Some(p) => Verdict::Fails(Witness {
            nodes: p.into_iter().map(PointId).collect(),
        }),
    }
}

struct Setup {
    graph: PseudoOrbitGraph,
    balls: Vec<PointSet>,
}

fn setup(sys: &FiniteSystem, eps: &Threshold, delta: &Threshold) -> Result<Setup> {
    check_positive(eps, delta)?;
    Ok(Setup {
        graph: pseudo_graph(sys, delta)?,
        balls: sys.closeness(eps),
    })
}

/// Every infinite `delta`-pseudo-orbit is `eps`-shadowed.
pub fn decide_forward(sys: &FiniteSystem, eps: &Threshold, delta: &Threshold, budget: Budget) -> Result<ShadowVerdict> {
    let st = setup(sys, eps, delta)?;
    let a = Automaton {
        sys,
        graph: &st.graph,
        balls: &st.balls,
        filter: None,
        budget,
    };
    Ok(to_verdict(a.search(0..sys.len(), |_, s| s.is_empty())?))
}

fn backward_route(sys: &FiniteSystem, st: &Setup, budget: Budget) -> Result<ShadowVerdict> {
    let le = left_extendable(&st.graph);
    let a = Automaton {
        sys,
        graph: &st.graph,
        balls: &st.balls,
        filter: None,
        budget,
    };
    Ok(to_verdict(a.search(le.iter(), |_, s| s.is_empty())?))
}

/// Trackers confined to the surjective core from the outset; equivalent to
/// the full-ball route because every tracker started far enough back lands
/// in the core.
fn core_route(sys: &FiniteSystem, st: &Setup, budget: Budget) -> Result<ShadowVerdict> {
    let le = left_extendable(&st.graph);
    let core = expansivity::surjective_core(sys).core_set(sys.len());
    let a = Automaton {
        sys,
        graph: &st.graph,
        balls: &st.balls,
        filter: Some(&core),
        budget,
    };
    Ok(to_verdict(a.search(le.iter(), |_, s| s.is_empty())?))
}

fn cross_checked(sys: &FiniteSystem, eps: &Threshold, delta: &Threshold, budget: Budget) -> Result<(ShadowVerdict, ShadowVerdict)> {
    let st = setup(sys, eps, delta)?;
    let back = backward_route(sys, &st, budget)?;
    let two = core_route(sys, &st, budget)?;
    if back.holds() != two.holds() {
        return Err(Error::Internal(format!(
            "backward and two-sided verdicts disagree at eps={eps}, delta={delta}"
        )));
    }
    Ok((back, two))
}

/// Every backwards `delta`-pseudo-orbit is `eps`-shadowed by a backwards orbit.
pub fn decide_backward(sys: &FiniteSystem, eps: &Threshold, delta: &Threshold, budget: Budget) -> Result<ShadowVerdict> {
    Ok(cross_checked(sys, eps, delta, budget)?.0)
}

/// Every two-sided `delta`-pseudo-orbit is `eps`-shadowed by a two-sided orbit.
pub fn decide_two_sided(sys: &FiniteSystem, eps: &Threshold, delta: &Threshold, budget: Budget) -> Result<ShadowVerdict> {
    Ok(cross_checked(sys, eps, delta, budget)?.1)
}

/// Shadowing with exact terminal hit.
pub fn decide_h(sys: &FiniteSystem, eps: &Threshold, delta: &Threshold, budget: Budget) -> Result<ShadowVerdict> {
    let st = setup(sys, eps, delta)?;
    let a = Automaton {
        sys,
        graph: &st.graph,
        balls: &st.balls,
        filter: None,
        budget,
    };
    Ok(to_verdict(a.search(0..sys.len(), |x, s| !s.contains(x))?))
}

/// Whether continuing `(x, S)` along the true orbit of `x` ever puts the
/// current point among the survivors.
fn eventually_hits(sys: &FiniteSystem, balls: &[PointSet], x: usize, s: &PointSet) -> bool {
    let mut seen = std::collections::HashSet::new();
    let mut p = x;
    let mut s = s.clone();
    loop {
        if s.contains(p) {
            return true;
        }
        if s.is_empty() || !seen.insert((p, s.clone())) {
            return false;
        }
        p = sys.map_table()[p];
        s = image_set(sys, &s);
        s.intersect_with(&balls[p]);
    }
}

/// Asymptotic pseudo-orbits are asymptotically shadowed. On a finite space
/// an asymptotic pseudo-orbit is eventually a true orbit and asymptotic
/// shadowing means eventual coincidence.
pub fn decide_s_limit(sys: &FiniteSystem, eps: &Threshold, delta: &Threshold, budget: Budget) -> Result<ShadowVerdict> {
    let st = setup(sys, eps, delta)?;
    let a = Automaton {
        sys,
        graph: &st.graph,
        balls: &st.balls,
        filter: None,
        budget,
    };
    let balls = &st.balls;
    Ok(to_verdict(
        a.search(0..sys.len(), |x, s| !eventually_hits(sys, balls, x, s))?,
    ))
}

/// The two-sided s-limit property reduced to a finite space: pseudo-orbits
/// start at left-extendable nodes and shadowing orbits live in the core.
pub fn decide_two_sided_s_limit(sys: &FiniteSystem, eps: &Threshold, delta: &Threshold, budget: Budget) -> Result<ShadowVerdict> {
    let st = setup(sys, eps, delta)?;
    let le = left_extendable(&st.graph);
    let core = expansivity::surjective_core(sys).core_set(sys.len());
    let a = Automaton {
        sys,
        graph: &st.graph,
        balls: &st.balls,
        filter: Some(&core),
        budget,
    };
    let balls = &st.balls;
    Ok(to_verdict(
        a.search(le.iter(), |x, s| !eventually_hits(sys, balls, x, s))?,
    ))
}

pub fn decide(sys: &FiniteSystem, kind: ShadowingKind, eps: &Threshold, delta: &Threshold, budget: Budget) -> Result<ShadowVerdict> {
    match kind {
        ShadowingKind::Forward => decide_forward(sys, eps, delta, budget),
        ShadowingKind::Backward => decide_backward(sys, eps, delta, budget),
        ShadowingKind::TwoSided => decide_two_sided(sys, eps, delta, budget),
        ShadowingKind::H => decide_h(sys, eps, delta, budget),
        ShadowingKind::SLimit => decide_s_limit(sys, eps, delta, budget),
    }
}

/// The optimal `delta` for a given `eps`, with a failure witness just above it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModulusReport {
    pub kind: ShadowingKind,
    pub epsilon: Threshold,
    pub modulus: Threshold,
    /// The `delta` at which `witness` fails (next lattice value above the modulus).
    pub witness_delta: Option<Threshold>,
    pub witness: Option<Witness>,
}

impl ModulusReport {
    pub fn to_json(&self, sys: &FiniteSystem) -> serde_json::Value {
        json!({
            "kind": self.kind.name(),
            "epsilon": self.epsilon.to_string(),
            "modulus": self.modulus.to_string(),
            "witness": self.witness.as_ref().map(|w| sys.labels_of(&w.nodes)),
        })
    }
}

pub fn modulus(sys: &FiniteSystem, kind: ShadowingKind, eps: &Threshold, budget: Budget) -> Result<ModulusReport> {
    if eps.is_zero() {
        return Err(Error::Degenerate("epsilon must be positive".into()));
    }
    let lattice = edge_lattice(sys);
    let m = monotone_sweep(&lattice, |d| Ok(decide(sys, kind, eps, d, budget)?.holds()))?;
    let (witness_delta, witness) = if m.is_unbounded() {
        (None, None)
    } else {
        let above = lattice.next_above(&m);
        match decide(sys, kind, eps, &above, budget)? {
            Verdict::Fails(w) => (Some(above), Some(w)),
            Verdict::Holds => {
                return Err(Error::Internal(format!(
                    "{} sweep returned {m} but the property holds at {above}",
                    kind.name()
                )))
            }
        }
    };
    Ok(ModulusReport {
        kind,
        epsilon: eps.clone(),
        modulus: m,
        witness_delta,
        witness,
    })
}

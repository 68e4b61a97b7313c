//! Expansivity: Γ-sets, expansivity radii, the surjective core and related
//! finite-space characterizations.

use std::collections::{HashMap, HashSet};

use serde::Serialize;
use serde_json::json;

use crate::error::{Error, Result};
use crate::lattice::{monotone_sweep, pair_lattice};
use crate::pointset::PointSet;
use crate::shadowing::{image_set, Budget, Verdict};
use crate::system::{FiniteSystem, Metric, PointId, PointRecord, RawSystem};
use crate::threshold::Threshold;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GammaMode {
    Positive,
    TwoSided,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GammaSet {
    pub center: PointId,
    pub radius: Threshold,
    pub members: Vec<PointId>,
    pub mode: GammaMode,
}

impl GammaSet {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn to_json(&self, sys: &FiniteSystem) -> serde_json::Value {
        json!({
            "center": sys.label(self.center),
            "radius": self.radius.to_string(),
            "mode": self.mode,
            "members": sys.labels_of(&self.members),
        })
    }
}

/// Whether `d(f^k x, f^k y)` has rank below `bound` for every `k >= 0`.
/// Iterates the pair orbit until it repeats.
pub(crate) fn pair_stays_within(sys: &FiniteSystem, x: usize, y: usize, bound: u32) -> bool {
    let map = sys.map_table();
    let mut seen = HashSet::new();
    let (mut a, mut b) = (x, y);
    loop {
        if sys.rank(a, b) >= bound {
            return false;
        }
        if !seen.insert((a, b)) {
            return true;
        }
        a = map[a];
        b = map[b];
    }
}

fn check_radius(r: &Threshold) -> Result<()> {
    if r.is_zero() {
        return Err(Error::Degenerate("radius must be positive".into()));
    }
    Ok(())
}

/// `Γ₊(x, r) = { y : d(f^k x, f^k y) < r for all k >= 0 }`.
pub fn gamma_plus(sys: &FiniteSystem, x: PointId, r: &Threshold) -> Result<GammaSet> {
    sys.check_id(x)?;
    check_radius(r)?;
    let bound = sys.rank_bound(r);
    let members = (0..sys.len())
        .filter(|&y| pair_stays_within(sys, x.0, y, bound))
        .map(PointId)
        .collect();
    Ok(GammaSet {
        center: x,
        radius: r.clone(),
        members,
        mode: GammaMode::Positive,
    })
}

pub fn max_gamma_plus(sys: &FiniteSystem, r: &Threshold) -> Result<usize> {
    let mut best = 0;
    for x in sys.ids() {
        best = best.max(gamma_plus(sys, x, r)?.len());
    }
    Ok(best)
}

/// `∀x |Γ₊(x, r)| <= n`.
pub fn is_positively_n_expansive_at(sys: &FiniteSystem, n: usize, r: &Threshold) -> Result<bool> {
    Ok(max_gamma_plus(sys, r)? <= n)
}

fn check_n(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::Degenerate("n must be at least 1".into()));
    }
    Ok(())
}

/// Supremum of radii `r` for which every `Γ₊(x, r)` has at most `n` points.
pub fn positive_expansivity_radius(sys: &FiniteSystem, n: usize) -> Result<Threshold> {
    check_n(n)?;
    monotone_sweep(&pair_lattice(sys), |r| is_positively_n_expansive_at(sys, n, r))
}

/// For every ordered pair, the largest squared distance attained along the
/// synchronized forward orbit. `y ∈ Γ₊(x, r)` iff this value is `< r^2`.
pub fn pair_orbit_sup(sys: &FiniteSystem) -> Vec<Vec<crate::rational::ExactRational>> {
    let n = sys.len();
    let map = sys.map_table();
    let mut out = vec![vec![crate::rational::ExactRational::zero(); n]; n];
    for (x, row) in out.iter_mut().enumerate() {
        for (y, cell) in row.iter_mut().enumerate() {
            let mut seen = HashSet::new();
            let (mut a, mut b) = (x, y);
            let mut best = 0u32;
            while seen.insert((a, b)) {
                best = best.max(sys.rank(a, b));
                a = map[a];
                b = map[b];
            }
            *cell = sys.distinct_squares()[best as usize].clone();
        }
    }
    out
}

/// Closed form of [`positive_expansivity_radius`]: the minimum over `x` of
/// the `(n+1)`-th smallest orbit supremum from `x`.
pub fn positive_expansivity_radius_closed_form(sys: &FiniteSystem, n: usize) -> Result<Threshold> {
    check_n(n)?;
    let sup = pair_orbit_sup(sys);
    let mut best = Threshold::Unbounded;
    for row in &sup {
        let mut vals = row.clone();
        vals.sort();
        if let Some(v) = vals.get(n) {
            best = best.min(Threshold::from_square(v.clone()));
        }
    }
    Ok(best)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CoreReport {
    pub core: Vec<PointId>,
    pub stabilization_index: usize,
}

impl CoreReport {
    pub fn core_set(&self, universe: usize) -> PointSet {
        PointSet::from_ids(universe, self.core.iter().map(|p| p.0))
    }

    pub fn to_json(&self, sys: &FiniteSystem) -> serde_json::Value {
        json!({
            "core": sys.labels_of(&self.core),
            "stabilization_index": self.stabilization_index,
        })
    }
}

/// `K_f = ∩ f^n(X)`, found by iterating images to a fixpoint.
pub fn surjective_core(sys: &FiniteSystem) -> CoreReport {
    let mut cur = PointSet::full(sys.len());
    let mut index = 0;
    loop {
        let next = image_set(sys, &cur);
        if next == cur {
            break;
        }
        cur = next;
        index += 1;
    }
    CoreReport {
        core: cur.iter().map(PointId).collect(),
        stabilization_index: index,
    }
}

/// The induced core system, with labels, metric and order preserved.
pub fn restrict_to_core(sys: &FiniteSystem) -> Result<FiniteSystem> {
    let core: Vec<usize> = surjective_core(sys).core.iter().map(|p| p.0).collect();
    let new_index: HashMap<usize, usize> = core.iter().enumerate().map(|(i, &p)| (p, i)).collect();
    let raw = sys.raw();
    let points: Vec<PointRecord> = core.iter().map(|&p| raw.points[p].clone()).collect();
    let metric = match &raw.metric {
        Metric::Euclidean => Metric::Euclidean,
        Metric::Matrix(m) => Metric::Matrix(
            core.iter()
                .map(|&i| core.iter().map(|&j| m[i][j].clone()).collect())
                .collect(),
        ),
    };
    let map = core.iter().map(|&p| new_index[&raw.map[p]]).collect();
    let mut meta = raw.meta.clone();
    meta.insert("restricted".into(), "surjective_core".into());
    FiniteSystem::new(RawSystem {
        points,
        metric,
        map,
        meta,
    })
}

/// Periodic points, computed from orbit profiles.
pub fn periodic_points(sys: &FiniteSystem) -> PointSet {
    let mut s = PointSet::empty(sys.len());
    for x in sys.ids() {
        let p = sys.orbit_profile(x).expect("valid id");
        if p.preperiod == 0 {
            s.insert(x.0);
        }
    }
    s
}

/// Distinct pairs whose orbits eventually coincide.
pub fn asymptotic_pairs(sys: &FiniteSystem) -> Vec<(PointId, PointId)> {
    let n = sys.len();
    let mut out = Vec::new();
    for x in 0..n {
        for y in (x + 1)..n {
            let (mut a, mut b) = (x, y);
            for _ in 0..n {
                a = sys.map_table()[a];
                b = sys.map_table()[b];
                if a == b {
                    out.push((PointId(x), PointId(y)));
                    break;
                }
            }
        }
    }
    out
}

/// The open-set definition on the discrete space reduces to singletons:
/// every `y` is hit by `f^k(x)` for some `k >= 1`.
fn transitive_by_definition(sys: &FiniteSystem) -> bool {
    let n = sys.len();
    (0..n).all(|x| {
        let mut hit = PointSet::empty(n);
        let mut p = x;
        for _ in 0..n {
            p = sys.map_table()[p];
            hit.insert(p);
        }
        hit.len() == n
    })
}

fn is_single_cycle(sys: &FiniteSystem) -> bool {
    sys.is_injective() && sys.orbit_profile(PointId(0)).map(|p| p.period == sys.len() && p.preperiod == 0).unwrap_or(false)
}

pub fn is_transitive(sys: &FiniteSystem) -> Result<bool> {
    let a = transitive_by_definition(sys);
    let b = is_single_cycle(sys);
    if a != b {
        return Err(Error::Internal("transitivity characterizations disagree".into()));
    }
    Ok(a)
}

/// Mixing on singletons: `f^k(x) = y` for all large `k`. After `n` steps
/// every orbit is inside its cycle, so a window of `n` further steps decides.
fn mixing_by_definition(sys: &FiniteSystem) -> bool {
    let n = sys.len();
    (0..n).all(|x| {
        let start = sys.iterate(PointId(x), n).0;
        let mut p = start;
        (0..n).all(|_| {
            let ok = (0..n).all(|y| y == p);
            p = sys.map_table()[p];
            ok
        })
    })
}

pub fn is_mixing(sys: &FiniteSystem) -> Result<bool> {
    let a = mixing_by_definition(sys);
    let b = sys.len() == 1;
    if a != b {
        return Err(Error::Internal("mixing characterizations disagree".into()));
    }
    Ok(a)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LimitShadowingReport {
    pub limit_shadowing: bool,
    pub unique_limit: bool,
    pub injective: bool,
    pub asymptotic_pair_count: usize,
}

/// Every finite system has limit shadowing: an asymptotic pseudo-orbit is
/// eventually a true orbit and that orbit's point shadows it asymptotically.
/// Unique limit shadowing is then the absence of asymptotic pairs, which on a
/// finite space is injectivity.
pub fn limit_shadowing_report(sys: &FiniteSystem) -> Result<LimitShadowingReport> {
    let pairs = asymptotic_pairs(sys).len();
    let report = LimitShadowingReport {
        limit_shadowing: true,
        unique_limit: pairs == 0,
        injective: sys.is_injective(),
        asymptotic_pair_count: pairs,
    };
    if report.unique_limit != report.injective {
        return Err(Error::Internal(
            "unique limit shadowing disagrees with injectivity".into(),
        ));
    }
    Ok(report)
}

/// A tuple `(a; b_0..b_n)` on a cycle of the coordinatewise map whose
/// members stay within `r` of `a` along the whole two-sided orbit.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TupleWitness {
    /// Frames `(a, {b_i})` in forward time; `frames[0]` is the image of the
    /// last frame, and the last frame is the violating tuple.
    pub frames: Vec<(PointId, Vec<PointId>)>,
}

impl TupleWitness {
    pub fn tuple(&self) -> &(PointId, Vec<PointId>) {
        self.frames.last().expect("nonempty witness")
    }
}

fn combinations(items: &[usize], k: usize, out: &mut Vec<Vec<usize>>) {
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
    rec(items, k, 0, &mut Vec::new(), out);
}

/// Two-sided `n`-expansivity at radius `r`.
///
/// Enumerates allowed tuples `(a, B)` with `B` a sorted set of `n + 1`
/// distinct points within `r` of `a`, all inside the surjective core (points
/// outside it have no two-sided orbit). The coordinatewise map is a function
/// on tuples, so a tuple has an infinite allowed backward history iff it lies
/// on a cycle; cycles are found by stripping tuples of in-degree zero.
pub fn is_n_expansive_at(sys: &FiniteSystem, n: usize, r: &Threshold, budget: Budget) -> Result<Verdict<TupleWitness>> {
    check_n(n)?;
    check_radius(r)?;
    let bound = sys.rank_bound(r);
    let core = surjective_core(sys).core_set(sys.len());
    let map = sys.map_table();

    let mut tuples: Vec<(usize, Vec<usize>)> = Vec::new();
    let mut index: HashMap<(usize, Vec<usize>), usize> = HashMap::new();
    for a in core.iter() {
        let near: Vec<usize> = core.iter().filter(|&b| sys.rank(a, b) < bound).collect();
        let mut combos = Vec::new();
        combinations(&near, n + 1, &mut combos);
        for bs in combos {
            if tuples.len() >= budget.0 {
                return Err(Error::BudgetExceeded { limit: budget.0 });
            }
            index.insert((a, bs.clone()), tuples.len());
            tuples.push((a, bs));
        }
    }

    let succ: Vec<Option<usize>> = tuples
        .iter()
        .map(|(a, bs)| {
            let mut img: Vec<usize> = bs.iter().map(|&b| map[b]).collect();
            img.sort_unstable();
            img.dedup();
            if img.len() != bs.len() {
                return None;
            }
            index.get(&(map[*a], img)).copied()
        })
        .collect();
    let mut indeg = vec![0usize; tuples.len()];
    for s in succ.iter().flatten() {
        indeg[*s] += 1;
    }
    let mut alive = vec![true; tuples.len()];
    let mut stack: Vec<usize> = (0..tuples.len()).filter(|&i| indeg[i] == 0).collect();
    while let Some(i) = stack.pop() {
        alive[i] = false;
        if let Some(s) = succ[i] {
            indeg[s] -= 1;
            if indeg[s] == 0 {
                stack.push(s);
            }
        }
    }

    for t in (0..tuples.len()).filter(|&i| alive[i]) {
        let (a, bs) = &tuples[t];
        if !bs.iter().all(|&b| pair_stays_within(sys, *a, b, bound)) {
            continue;
        }
        // walk the cycle forward from t back to t
        let mut frames = Vec::new();
        let mut cur = succ[t].ok_or_else(|| Error::Internal("cycle tuple without successor".into()))?;
        loop {
            let (ca, cb) = &tuples[cur];
            frames.push((PointId(*ca), cb.iter().map(|&b| PointId(b)).collect()));
            if cur == t {
                break;
            }
            cur = succ[cur].ok_or_else(|| Error::Internal("cycle tuple without successor".into()))?;
        }
        return Ok(Verdict::Fails(TupleWitness { frames }));
    }
    Ok(Verdict::Holds)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ExpansivityRadius {
    pub n: usize,
    pub radius: Threshold,
    /// Set when the surjective core is a single point, so that no two
    /// distinct points have two-sided orbits and every radius works.
    pub vacuous: bool,
}

pub fn n_expansivity_radius(sys: &FiniteSystem, n: usize, budget: Budget) -> Result<ExpansivityRadius> {
    check_n(n)?;
    let radius = monotone_sweep(&pair_lattice(sys), |r| Ok(is_n_expansive_at(sys, n, r, budget)?.holds()))?;
    Ok(ExpansivityRadius {
        n,
        radius,
        vacuous: surjective_core(sys).core.len() == 1,
    })
}

/// Points `y` admitting two-sided orbits that stay within `r` of some
/// two-sided orbit of `x`. Empty when `x` is outside the surjective core.
pub fn gamma_two_sided(sys: &FiniteSystem, x: PointId, r: &Threshold) -> Result<GammaSet> {
    sys.check_id(x)?;
    let members = match is_pair_cycle_set(sys, x.0, r)? {
        Some(m) => m,
        None => Vec::new(),
    };
    Ok(GammaSet {
        center: x,
        radius: r.clone(),
        members,
        mode: GammaMode::TwoSided,
    })
}

fn is_pair_cycle_set(sys: &FiniteSystem, x: usize, r: &Threshold) -> Result<Option<Vec<PointId>>> {
    check_radius(r)?;
    let bound = sys.rank_bound(r);
    let core = surjective_core(sys).core_set(sys.len());
    if !core.contains(x) {
        return Ok(None);
    }
    let map = sys.map_table();
    let members = core
        .iter()
        .filter(|&y| sys.rank(x, y) < bound)
        .filter(|&y| {
            // (x, y) must return to itself under the pair map with every
            // frame allowed
            let (mut a, mut b) = (x, y);
            for _ in 0..=sys.len() * sys.len() {
                if sys.rank(a, b) >= bound {
                    return false;
                }
                a = map[a];
                b = map[b];
                if (a, b) == (x, y) {
                    return true;
                }
            }
            false
        })
        .map(PointId)
        .collect();
    Ok(Some(members))
}

//! Verification suites over systems and corpora.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::document::fingerprint;
use crate::error::{Error, Result};
use crate::expansivity::{
    asymptotic_pairs, gamma_plus, is_positively_n_expansive_at, limit_shadowing_report, positive_expansivity_radius,
    positive_expansivity_radius_closed_form,
};
use crate::lattice::{edge_lattice, pair_lattice};
use crate::multiplicity::{count_at_most, decide_unique_h, max_shadower_count, two_sided_count_at_most};
use crate::replay::{replay_lasso, replay_shadowing, replay_two_sided_count, replay_two_sided_s_limit, replay_unique_h};
use crate::shadowing::{decide, decide_two_sided_s_limit, modulus, Budget, ModulusReport, ShadowingKind, Verdict};
use crate::system::FiniteSystem;
use crate::threshold::Threshold;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Suite {
    Hierarchy,
    NShadow,
    TwoSidedN,
    Uniqueness,
    Fiber,
}

impl Suite {
    pub const ALL: [Suite; 5] = [Suite::Hierarchy, Suite::NShadow, Suite::TwoSidedN, Suite::Uniqueness, Suite::Fiber];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Hierarchy => "hierarchy",
            Suite::NShadow => "nshadow",
            Suite::TwoSidedN => "twosided-n",
            Suite::Uniqueness => "uniqueness",
            Suite::Fiber => "fiber",
        }
    }

    /// Parses one suite name, or `all`.
    pub fn parse_list(s: &str) -> Result<Vec<Suite>> {
        if s == "all" {
            return Ok(Suite::ALL.to_vec());
        }
        Suite::ALL
            .iter()
            .find(|x| x.name() == s)
            .map(|x| vec![*x])
            .ok_or_else(|| Error::UnknownSuite(s.to_string()))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "UPPERCASE")]
pub enum CheckVerdict {
    Pass,
    Fail,
    Skipped { reason: String },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub id: String,
    pub params: BTreeMap<String, String>,
    pub verdict: CheckVerdict,
    pub evidence: Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_time_us: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub suite: String,
    pub fingerprint: String,
    pub checks: Vec<CheckRecord>,
}

impl VerificationReport {
    pub fn count(&self, pred: impl Fn(&CheckVerdict) -> bool) -> usize {
        self.checks.iter().filter(|c| pred(&c.verdict)).count()
    }

    pub fn failures(&self) -> Vec<&CheckRecord> {
        self.checks.iter().filter(|c| c.verdict == CheckVerdict::Fail).collect()
    }

    pub fn all_passed(&self) -> bool {
        self.failures().is_empty()
    }

    pub fn any_skipped(&self) -> bool {
        self.count(|v| matches!(v, CheckVerdict::Skipped { .. })) > 0
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EpsPolicy {
    /// Pair-lattice values, thinned evenly to at most `cap` entries.
    Lattice { cap: usize },
    Explicit(Vec<Threshold>),
}

impl Default for EpsPolicy {
    fn default() -> Self {
        EpsPolicy::Lattice { cap: 32 }
    }
}

impl EpsPolicy {
    pub fn values(&self, sys: &FiniteSystem) -> Vec<Threshold> {
        match self {
            EpsPolicy::Explicit(v) => v.clone(),
            EpsPolicy::Lattice { cap } => {
                let all: Vec<Threshold> = pair_lattice(sys).positive().cloned().collect();
                if all.len() <= *cap || *cap == 0 {
                    return all;
                }
                if *cap == 1 {
                    return vec![all[0].clone()];
                }
                let mut picked: Vec<Threshold> = (0..*cap)
                    .map(|i| all[i * (all.len() - 1) / (cap - 1)].clone())
                    .collect();
                picked.dedup();
                picked
            }
        }
    }
}

#[derive(Clone, Debug)]
pub struct HarnessOptions {
    pub eps: EpsPolicy,
    pub n_list: Vec<usize>,
    pub budget: Budget,
    /// Record wall time per check. Off by default so reports stay byte-stable.
    pub timings: bool,
}

impl Default for HarnessOptions {
    fn default() -> Self {
        HarnessOptions {
            eps: EpsPolicy::default(),
            n_list: vec![1, 2],
            budget: Budget::default(),
            timings: false,
        }
    }
}

struct Outcome {
    verdict: CheckVerdict,
    evidence: Value,
}

impl Outcome {
    fn pass(evidence: Value) -> Self {
        Outcome {
            verdict: CheckVerdict::Pass,
            evidence,
        }
    }

    fn fail(evidence: Value) -> Self {
        Outcome {
            verdict: CheckVerdict::Fail,
            evidence,
        }
    }

    fn judge(ok: bool, evidence: Value) -> Self {
        if ok {
            Self::pass(evidence)
        } else {
            Self::fail(evidence)
        }
    }

    fn skip(reason: impl Into<String>) -> Self {
        Outcome {
            verdict: CheckVerdict::Skipped { reason: reason.into() },
            evidence: Value::Null,
        }
    }
}

struct Runner<'a> {
    sys: &'a FiniteSystem,
    opts: &'a HarnessOptions,
    checks: Vec<CheckRecord>,
}

impl Runner<'_> {
    fn run(&mut self, id: &str, params: &[(&str, String)], body: impl FnOnce() -> Result<Outcome>) -> Result<()> {
        let start = Instant::now();
        let outcome = match body() {
            Ok(o) => o,
            Err(Error::BudgetExceeded { limit }) => Outcome::skip(format!("state budget of {limit} exceeded")),
            Err(Error::Internal(msg)) => Outcome::fail(json!({ "internal": msg })),
            Err(e) => return Err(e),
        };
        self.checks.push(CheckRecord {
            id: id.to_string(),
            params: params.iter().map(|(k, v)| ((*k).to_string(), v.clone())).collect(),
            verdict: outcome.verdict,
            evidence: outcome.evidence,
            wall_time_us: self.opts.timings.then(|| start.elapsed().as_micros() as u64),
        });
        Ok(())
    }
}

fn deltas(sys: &FiniteSystem) -> Vec<Threshold> {
    let mut v: Vec<Threshold> = edge_lattice(sys).positive().cloned().collect();
    v.push(Threshold::Unbounded);
    v
}

fn min_edge(sys: &FiniteSystem) -> Option<Threshold> {
    edge_lattice(sys).min_positive().cloned()
}

fn replay_modulus(sys: &FiniteSystem, m: &ModulusReport) -> std::result::Result<(), String> {
    match (&m.witness, &m.witness_delta) {
        (Some(w), Some(d)) => replay_shadowing(sys, m.kind, &m.epsilon, d, w),
        (None, None) if m.modulus.is_unbounded() => Ok(()),
        _ => Err("bounded modulus without a witness".into()),
    }
}

fn modulus_json(sys: &FiniteSystem, m: &ModulusReport) -> Value {
    let mut j = m.to_json(sys);
    j["witness_delta"] = json!(m.witness_delta.as_ref().map(ToString::to_string));
    j
}

fn hierarchy(r: &mut Runner, eps_list: &[Threshold]) -> Result<()> {
    let sys = r.sys;
    let budget = r.opts.budget;
    for eps in eps_list {
        let p = [("eps", eps.to_string())];
        let moduli = (|| -> Result<BTreeMap<ShadowingKind, ModulusReport>> {
            let mut out = BTreeMap::new();
            for k in ShadowingKind::ALL {
                out.insert(k, modulus(sys, k, eps, budget)?);
            }
            Ok(out)
        })();
        let moduli = match moduli {
            Ok(m) => Some(m),
            Err(Error::BudgetExceeded { .. }) => None,
            Err(e) => return Err(e),
        };
        let half = match modulus(sys, ShadowingKind::Forward, &eps.half(), budget) {
            Ok(m) => Some(m),
            Err(Error::BudgetExceeded { .. }) => None,
            Err(e) => return Err(e),
        };
        let (Some(ms), Some(half)) = (moduli, half) else {
            r.run("hierarchy.moduli", &p, || Err(Error::BudgetExceeded { limit: budget.0 }))?;
            continue;
        };
        let m = |k: ShadowingKind| ms[&k].modulus.clone();
        let fwd = m(ShadowingKind::Forward);
        let ts = m(ShadowingKind::TwoSided);
        let evidence = json!({
            "forward": fwd.to_string(),
            "backward": m(ShadowingKind::Backward).to_string(),
            "two_sided": ts.to_string(),
            "h": m(ShadowingKind::H).to_string(),
            "s_limit": m(ShadowingKind::SLimit).to_string(),
            "forward_half_eps": half.modulus.to_string(),
        });

        r.run("hierarchy.two_sided_ge_forward_ge_half_eps", &p, || {
            Ok(Outcome::judge(ts >= fwd && fwd >= half.modulus, evidence.clone()))
        })?;
        r.run("hierarchy.exact_hit_and_asymptotic_below_forward", &p, || {
            Ok(Outcome::judge(
                m(ShadowingKind::H) <= fwd && m(ShadowingKind::SLimit) <= fwd,
                evidence.clone(),
            ))
        })?;
        r.run("hierarchy.moduli_positive", &p, || {
            Ok(Outcome::judge(ms.values().all(|x| x.modulus.is_positive()), evidence.clone()))
        })?;
        r.run("hierarchy.onto_backward_implies_forward", &p, || {
            if !sys.is_surjective() {
                return Ok(Outcome::skip("vacuous: map is not surjective"));
            }
            let b = m(ShadowingKind::Backward);
            Ok(Outcome::judge(!b.is_positive() || fwd.is_positive(), evidence.clone()))
        })?;
        r.run("hierarchy.witness_replay", &p, || {
            let mut bad = Vec::new();
            for rep in ms.values().chain(std::iter::once(&half)) {
                if let Err(e) = replay_modulus(sys, rep) {
                    bad.push(json!({ "kind": rep.kind.name(), "epsilon": rep.epsilon.to_string(), "error": e }));
                }
            }
            let witnesses: Vec<Value> = ms.values().map(|x| modulus_json(sys, x)).collect();
            Ok(Outcome::judge(bad.is_empty(), json!({ "moduli": witnesses, "replay_errors": bad })))
        })?;

        r.run("hierarchy.backward_iff_two_sided", &p, || {
            let mut mismatches = Vec::new();
            let mut trace = Vec::new();
            let (mut prev_f, mut prev_t) = (true, true);
            let mut antitone = true;
            for d in deltas(sys) {
                let b = decide(sys, ShadowingKind::Backward, eps, &d, budget)?;
                let t = decide(sys, ShadowingKind::TwoSided, eps, &d, budget)?;
                let f = decide(sys, ShadowingKind::Forward, eps, &d, budget)?;
                for (kind, v) in [(ShadowingKind::Backward, &b), (ShadowingKind::TwoSided, &t), (ShadowingKind::Forward, &f)] {
                    if let Verdict::Fails(w) = v {
                        if let Err(e) = replay_shadowing(sys, kind, eps, &d, w) {
                            mismatches.push(json!({ "delta": d.to_string(), "kind": kind.name(), "replay": e }));
                        }
                    }
                }
                if b.holds() != t.holds() || (f.holds() && !t.holds()) {
                    mismatches.push(json!({ "delta": d.to_string(), "backward": b.holds(), "two_sided": t.holds(), "forward": f.holds() }));
                }
                // verdicts are listed by increasing delta, so holds may only turn off
                antitone &= (prev_f || !f.holds()) && (prev_t || !t.holds());
                prev_f = f.holds();
                prev_t = t.holds();
                trace.push(json!([d.to_string(), f.holds(), b.holds(), t.holds()]));
            }
            Ok(Outcome::judge(
                mismatches.is_empty() && antitone,
                json!({ "delta_forward_backward_two_sided": trace, "mismatches": mismatches, "antitone": antitone }),
            ))
        })?;

        r.run("hierarchy.two_sided_s_limit_reduction", &p, || {
            let mut trace = Vec::new();
            let mut bad = Vec::new();
            let mut prev = true;
            for d in deltas(sys) {
                let v = decide_two_sided_s_limit(sys, eps, &d, budget)?;
                if let Verdict::Fails(w) = &v {
                    if let Err(e) = replay_two_sided_s_limit(sys, eps, &d, w) {
                        bad.push(json!({ "delta": d.to_string(), "replay": e }));
                    }
                }
                if v.holds() && !prev {
                    bad.push(json!({ "delta": d.to_string(), "antitone": false }));
                }
                prev = v.holds();
                trace.push(json!([d.to_string(), v.holds()]));
            }
            Ok(Outcome::judge(bad.is_empty(), json!({ "delta_holds": trace, "violations": bad })))
        })?;
    }
    Ok(())
}

fn gamma_max(sys: &FiniteSystem, eps: &Threshold) -> Result<usize> {
    let mut g = 0;
    for x in sys.ids() {
        g = g.max(gamma_plus(sys, x, eps)?.len());
    }
    Ok(g)
}

fn nshadow(r: &mut Runner, eps_list: &[Threshold]) -> Result<()> {
    let sys = r.sys;
    let budget = r.opts.budget;
    let mut radii = Vec::new();
    for &n in &r.opts.n_list {
        let rad = positive_expansivity_radius(sys, n)?;
        let closed = positive_expansivity_radius_closed_form(sys, n)?;
        radii.push((n, rad.clone()));
        let np = [("n", n.to_string())];
        r.run("nshadow.radius_routes_agree", &np, || {
            Ok(Outcome::judge(
                rad == closed,
                json!({ "sweep": rad.to_string(), "closed_form": closed.to_string() }),
            ))
        })?;
        let qualifying: Vec<&Threshold> = eps_list.iter().filter(|e| e.double() < rad).collect();
        if qualifying.is_empty() {
            r.run("nshadow.forward_direction", &np, || {
                Ok(Outcome::skip("vacuous: no lattice epsilon with 2*eps below the radius"))
            })?;
        }
        for eps in qualifying {
            let p = [("n", n.to_string()), ("eps", eps.to_string())];
            r.run("nshadow.forward_direction", &p, || {
                let m = modulus(sys, ShadowingKind::Forward, eps, budget)?;
                let v = count_at_most(sys, n, eps, &m.modulus, budget)?;
                let mut ev = json!({ "radius": rad.to_string(), "delta": m.modulus.to_string() });
                Ok(match v {
                    Verdict::Holds => Outcome::pass(ev),
                    Verdict::Fails(w) => {
                        ev["witness"] = w.to_json(sys);
                        ev["replay"] = json!(replay_lasso(sys, eps, &m.modulus, n + 1, &w).err());
                        Outcome::fail(ev)
                    }
                })
            })?;
        }
    }
    r.run("nshadow.radius_nondecreasing", &[], || {
        let mut sorted = radii.clone();
        sorted.sort_by_key(|(n, _)| *n);
        let ok = sorted.windows(2).all(|w| w[0].1 <= w[1].1);
        let ev: Vec<Value> = sorted.iter().map(|(n, t)| json!([n, t.to_string()])).collect();
        Ok(Outcome::judge(ok, json!({ "radii": ev })))
    })?;

    let Some(dmin) = min_edge(sys) else {
        r.run("nshadow.converse_gamma_bound", &[], || Ok(Outcome::skip("vacuous: single point")))?;
        return Ok(());
    };
    for eps in eps_list {
        let p = [("eps", eps.to_string()), ("delta", dmin.to_string())];
        r.run("nshadow.converse_gamma_bound", &p, || {
            let g = gamma_max(sys, eps)?;
            let rep = max_shadower_count(sys, eps, &dmin, g + 1, budget)?;
            let w = rep.witness.as_ref().ok_or_else(|| Error::Internal("count report without witness".into()))?;
            let replay = replay_lasso(sys, eps, &dmin, rep.at_least(), w);
            Ok(Outcome::judge(
                rep.at_least() >= g && replay.is_ok(),
                json!({ "gamma_max": g, "count": rep.to_json(sys), "replay": replay.err() }),
            ))
        })?;
    }
    // below the smallest pairwise distance balls are singletons
    let eta = pair_lattice(sys).min_positive().cloned();
    if let Some(eta) = eta {
        r.run("nshadow.trivial_eta", &[("eta", eta.to_string())], || {
            let mut counts = Vec::new();
            for d in deltas(sys) {
                counts.push(json!([d.to_string(), count_at_most(sys, 1, &eta, &d, budget)?.holds()]));
            }
            let ok = counts.iter().all(|c| c[1] == json!(true));
            Ok(Outcome::judge(ok, json!({ "eta": eta.to_string(), "at_most_one": counts })))
        })?;
    }
    Ok(())
}

fn two_sided_n(r: &mut Runner, eps_list: &[Threshold]) -> Result<()> {
    let sys = r.sys;
    let budget = r.opts.budget;
    for &n in &r.opts.n_list {
        for eps in eps_list {
            let p = [("n", n.to_string()), ("eps", eps.to_string())];
            r.run("twosided_n.forward_implies_two_sided", &p, || {
                let mut bad = Vec::new();
                for d in deltas(sys) {
                    let c = count_at_most(sys, n, eps, &d, budget)?;
                    let f = decide(sys, ShadowingKind::Forward, eps, &d, budget)?.holds();
                    let tc = two_sided_count_at_most(sys, n, eps, &d, budget)?;
                    let ts = decide(sys, ShadowingKind::TwoSided, eps, &d, budget)?.holds();
                    if let Verdict::Fails(w) = &tc {
                        if let Err(e) = replay_two_sided_count(sys, eps, &d, n + 1, w) {
                            bad.push(json!({ "delta": d.to_string(), "replay": e }));
                        }
                    }
                    if let Verdict::Fails(w) = &c {
                        if let Err(e) = replay_lasso(sys, eps, &d, n + 1, w) {
                            bad.push(json!({ "delta": d.to_string(), "replay": e }));
                        }
                    }
                    if c.holds() && !tc.holds() {
                        bad.push(json!({ "delta": d.to_string(), "count": true, "two_sided_count": false }));
                    }
                    if c.holds() && f && !(tc.holds() && ts) {
                        bad.push(json!({ "delta": d.to_string(), "n_shadowing": true, "two_sided_n_shadowing": false }));
                    }
                }
                Ok(Outcome::judge(bad.is_empty(), json!({ "violations": bad })))
            })?;
        }
    }
    Ok(())
}

fn uniqueness(r: &mut Runner, eps_list: &[Threshold]) -> Result<()> {
    let sys = r.sys;
    let budget = r.opts.budget;
    for eps in eps_list {
        let p = [("eps", eps.to_string())];
        r.run("uniqueness.unique_implies_unique_h", &p, || {
            let mut bad = Vec::new();
            for d in deltas(sys) {
                let c = count_at_most(sys, 1, eps, &d, budget)?;
                let h = decide(sys, ShadowingKind::H, eps, &d, budget)?.holds();
                let u = decide_unique_h(sys, eps, &d, budget)?;
                if let Verdict::Fails(w) = &u {
                    if let Err(e) = replay_unique_h(sys, eps, &d, w) {
                        bad.push(json!({ "delta": d.to_string(), "replay": e }));
                    }
                }
                if let Verdict::Fails(w) = &c {
                    if let Err(e) = replay_lasso(sys, eps, &d, 2, w) {
                        bad.push(json!({ "delta": d.to_string(), "replay": e }));
                    }
                }
                if c.holds() && h && !u.holds() {
                    bad.push(json!({ "delta": d.to_string(), "unique": true, "h": true, "unique_h": false }));
                }
            }
            Ok(Outcome::judge(bad.is_empty(), json!({ "violations": bad })))
        })?;
    }

    r.run("uniqueness.limit_characterization", &[], || {
        let rep = limit_shadowing_report(sys)?;
        let none = asymptotic_pairs(sys).is_empty();
        Ok(Outcome::judge(
            rep.limit_shadowing && rep.unique_limit == rep.injective && rep.injective == none,
            serde_json::to_value(&rep).expect("report serializes"),
        ))
    })?;

    r.run("uniqueness.identity_pattern", &[], || {
        if sys.map_table().iter().enumerate().any(|(i, &j)| i != j) {
            return Ok(Outcome::skip("vacuous: map is not the identity"));
        }
        let (Some(dmin), Some(gap)) = (min_edge(sys), pair_lattice(sys).min_positive().cloned()) else {
            return Ok(Outcome::skip("vacuous: single point"));
        };
        let mut rows = Vec::new();
        let mut ok = true;
        for eps in eps_list {
            let h = decide(sys, ShadowingKind::H, eps, &dmin, budget)?.holds();
            let c = count_at_most(sys, 1, eps, &dmin, budget)?;
            let mut replay = None;
            if let Verdict::Fails(w) = &c {
                replay = replay_lasso(sys, eps, &dmin, 2, w).err();
            }
            let expect_fail = *eps > gap;
            ok &= h && (c.holds() != expect_fail) && replay.is_none();
            rows.push(json!({
                "eps": eps.to_string(),
                "h": h,
                "at_most_one": c.holds(),
                "witness": c.witness().map(|w| w.to_json(sys)),
                "replay": replay,
            }));
        }
        Ok(Outcome::judge(ok, json!({ "delta": dmin.to_string(), "min_gap": gap.to_string(), "rows": rows })))
    })?;
    Ok(())
}

/// Largest subset of `fiber` with pairwise distances below `r`.
fn largest_close_subset(sys: &FiniteSystem, fiber: &[usize], r: &Threshold) -> Vec<usize> {
    let k = fiber.len().min(16);
    let mut best: Vec<usize> = Vec::new();
    for mask in 1u32..(1u32 << k) {
        if (mask.count_ones() as usize) <= best.len() {
            continue;
        }
        let pick: Vec<usize> = (0..k).filter(|i| mask & (1 << i) != 0).map(|i| fiber[i]).collect();
        let ok = pick.iter().enumerate().all(|(i, &a)| pick[i + 1..].iter().all(|&b| r.admits(sys.sq(a, b))));
        if ok {
            best = pick;
        }
    }
    best
}

fn fiber(r: &mut Runner) -> Result<()> {
    let sys = r.sys;
    let fibers = sys.fibers();
    for rad in pair_lattice(sys).positive().cloned().chain(std::iter::once(Threshold::Unbounded)) {
        r.run("fiber.bound", &[("r", rad.to_string())], || {
            let mut rows = Vec::new();
            let mut ok = true;
            for (y, fib) in fibers.iter().enumerate() {
                let close = largest_close_subset(sys, fib, &rad);
                if close.len() < 2 {
                    continue;
                }
                for n in 1..close.len() {
                    let holds = is_positively_n_expansive_at(sys, n, &rad)?;
                    ok &= !holds;
                    rows.push(json!({
                        "image": sys.label(crate::system::PointId(y)),
                        "close_preimages": close.iter().map(|&i| sys.label(crate::system::PointId(i))).collect::<Vec<_>>(),
                        "n": n,
                        "positively_n_expansive": holds,
                    }));
                }
            }
            Ok(Outcome::judge(ok, json!({ "vacuous": rows.is_empty(), "rows": rows })))
        })?;
    }
    Ok(())
}

/// Runs the requested suites in order and folds their checks into one report.
pub fn run_suite(sys: &FiniteSystem, suites: &[Suite], opts: &HarnessOptions) -> Result<VerificationReport> {
    let eps_list = opts.eps.values(sys);
    if eps_list.iter().any(|e| !e.is_positive()) {
        return Err(Error::Degenerate("epsilon values must be positive".into()));
    }
    let mut runner = Runner {
        sys,
        opts,
        checks: Vec::new(),
    };
    let mut sorted = suites.to_vec();
    sorted.sort();
    sorted.dedup();
    for s in &sorted {
        match s {
            Suite::Hierarchy => hierarchy(&mut runner, &eps_list)?,
            Suite::NShadow => nshadow(&mut runner, &eps_list)?,
            Suite::TwoSidedN => two_sided_n(&mut runner, &eps_list)?,
            Suite::Uniqueness => uniqueness(&mut runner, &eps_list)?,
            Suite::Fiber => fiber(&mut runner)?,
        }
    }
    let name = if sorted.len() == Suite::ALL.len() {
        "all".to_string()
    } else {
        sorted.iter().map(|s| s.name()).collect::<Vec<_>>().join("+")
    };
    Ok(VerificationReport {
        suite: name,
        fingerprint: fingerprint(sys),
        checks: runner.checks,
    })
}

pub fn verify_shadowing_hierarchy(sys: &FiniteSystem, eps: EpsPolicy, budget: Budget) -> Result<VerificationReport> {
    let opts = HarnessOptions {
        eps,
        budget,
        ..HarnessOptions::default()
    };
    run_suite(sys, &[Suite::Hierarchy], &opts)
}

pub fn verify_n_shadowing_theorem(sys: &FiniteSystem, n_list: &[usize], budget: Budget) -> Result<VerificationReport> {
    let opts = HarnessOptions {
        n_list: n_list.to_vec(),
        budget,
        eps: EpsPolicy::Lattice { cap: usize::MAX },
        ..HarnessOptions::default()
    };
    run_suite(sys, &[Suite::NShadow], &opts)
}

pub fn verify_two_sided_n(sys: &FiniteSystem, n: usize, eps: EpsPolicy, budget: Budget) -> Result<VerificationReport> {
    let opts = HarnessOptions {
        n_list: vec![n],
        eps,
        budget,
        ..HarnessOptions::default()
    };
    run_suite(sys, &[Suite::TwoSidedN], &opts)
}

pub fn verify_uniqueness_suite(sys: &FiniteSystem, budget: Budget) -> Result<VerificationReport> {
    let opts = HarnessOptions {
        budget,
        eps: EpsPolicy::Lattice { cap: usize::MAX },
        ..HarnessOptions::default()
    };
    run_suite(sys, &[Suite::Uniqueness], &opts)
}

pub fn verify_fiber_bound(sys: &FiniteSystem) -> Result<VerificationReport> {
    run_suite(sys, &[Suite::Fiber], &HarnessOptions::default())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    Markdown,
}

fn md_cell(s: &str) -> String {
    s.replace('|', "\\|")
}

pub fn emit_report(report: &VerificationReport, format: Format) -> String {
    match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(report).expect("report serializes");
            s.push('\n');
            s
        }
        Format::Markdown => {
            let mut s = String::new();
            let pass = report.count(|v| *v == CheckVerdict::Pass);
            let fail = report.count(|v| *v == CheckVerdict::Fail);
            let skip = report.checks.len() - pass - fail;
            let _ = writeln!(s, "# Verification report: {}\n", report.suite);
            let _ = writeln!(s, "- fingerprint: `{}`", report.fingerprint);
            let _ = writeln!(s, "- checks: {} pass, {} fail, {} skipped\n", pass, fail, skip);
            let timed = report.checks.iter().any(|c| c.wall_time_us.is_some());
            if timed {
                s.push_str("| check | params | verdict | evidence | time (us) |\n|---|---|---|---|---|\n");
            } else {
                s.push_str("| check | params | verdict | evidence |\n|---|---|---|---|\n");
            }
            for c in &report.checks {
                let params: Vec<String> = c.params.iter().map(|(k, v)| format!("{k}={v}")).collect();
                let verdict = match &c.verdict {
                    CheckVerdict::Pass => "PASS".to_string(),
                    CheckVerdict::Fail => "FAIL".to_string(),
                    CheckVerdict::Skipped { reason } => format!("SKIPPED ({reason})"),
                };
                let mut ev = serde_json::to_string(&c.evidence).expect("evidence serializes");
                if ev.len() > 160 {
                    let mut cut = 157;
                    while !ev.is_char_boundary(cut) {
                        cut -= 1;
                    }
                    ev.truncate(cut);
                    ev.push_str("...");
                }
                let _ = write!(
                    s,
                    "| {} | {} | {} | `{}` |",
                    c.id,
                    md_cell(&params.join(", ")),
                    md_cell(&verdict),
                    md_cell(&ev)
                );
                if timed {
                    let _ = write!(s, " {} |", c.wall_time_us.unwrap_or(0));
                }
                s.push('\n');
            }
            s
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators;
    use crate::rational::ExactRational;

    fn t(p: i64, q: i64) -> Threshold {
        Threshold::ratio(p, q)
    }

    fn evidence<'a>(rep: &'a VerificationReport, id: &str) -> &'a Value {
        &rep.checks.iter().find(|c| c.id == id).unwrap().evidence
    }

    #[test]
    fn cycle_passes_everything() {
        let c3 = generators::gen_cycle(3);
        let start = Instant::now();
        let rep = run_suite(&c3, &Suite::ALL, &HarnessOptions::default()).unwrap();
        assert!(rep.all_passed(), "{:?}", rep.failures());
        assert!(start.elapsed().as_secs_f64() < 1.0);
        assert_eq!(rep.suite, "all");
    }

    #[test]
    fn hierarchy_examples() {
        let sh = generators::gen_periodic_shift(2, 2, generators::Sided::Two);
        let rep = verify_shadowing_hierarchy(&sh, EpsPolicy::Explicit(vec![t(1, 4)]), Budget::default()).unwrap();
        assert!(rep.all_passed());
        assert_eq!(evidence(&rep, "hierarchy.two_sided_ge_forward_ge_half_eps")["forward"], "1/2");

        let no = generators::gen_not_onto(3);
        let rep = verify_shadowing_hierarchy(&no, EpsPolicy::Explicit(vec![t(1, 3)]), Budget::default()).unwrap();
        assert!(rep.all_passed());
        let ev = evidence(&rep, "hierarchy.two_sided_ge_forward_ge_half_eps");
        assert_eq!(ev["forward"], "1/8");
        assert_eq!(ev["backward"], "1/8");
    }

    #[test]
    fn nshadow_examples() {
        let m = generators::gen_merge();
        let rep = verify_n_shadowing_theorem(&m, &[1], Budget::default()).unwrap();
        assert!(rep.all_passed(), "{:?}", rep.failures());
        let rep = run_suite(
            &m,
            &[Suite::NShadow],
            &HarnessOptions {
                eps: EpsPolicy::Explicit(vec![t(3, 2)]),
                n_list: vec![1],
                ..HarnessOptions::default()
            },
        )
        .unwrap();
        let ev = evidence(&rep, "nshadow.converse_gamma_bound");
        assert_eq!(ev["gamma_max"], 2);
        assert_eq!(ev["count"]["max_count"], 2);

        let ex = generators::gen_n_expansive(2, 3, 1, generators::Boundary::Open);
        let rep = verify_n_shadowing_theorem(&ex, &[2], Budget::default()).unwrap();
        assert!(rep.all_passed(), "{:?}", rep.failures());
    }

    #[test]
    fn two_sided_and_uniqueness_examples() {
        for sys in [generators::gen_two_fixed(ExactRational::one()), generators::gen_merge()] {
            let rep = verify_two_sided_n(&sys, 2, EpsPolicy::default(), Budget::default()).unwrap();
            assert!(rep.all_passed());
        }
        let id = generators::gen_identity_cantor(4);
        let rep = verify_uniqueness_suite(&id, Budget::default()).unwrap();
        assert!(rep.all_passed(), "{:?}", rep.failures());
        let m = generators::gen_merge();
        let rep = verify_uniqueness_suite(&m, Budget::default()).unwrap();
        assert!(rep.all_passed());
        assert_eq!(evidence(&rep, "uniqueness.limit_characterization")["unique_limit"], false);
    }

    #[test]
    fn fiber_examples() {
        let m = generators::gen_merge();
        let rep = verify_fiber_bound(&m).unwrap();
        assert!(rep.all_passed());
        let unb = rep.checks.iter().find(|c| c.params["r"] == "unbounded").unwrap();
        assert_eq!(unb.evidence["rows"].as_array().unwrap().len(), 2);
        let rep = verify_fiber_bound(&generators::gen_cycle(3)).unwrap();
        assert!(rep.checks.iter().all(|c| c.evidence["vacuous"] == true));
    }

    #[test]
    fn reports_round_trip_and_are_stable() {
        let sys = generators::gen_random(7, 8, generators::RandomMode::Plane).unwrap();
        let rep = verify_shadowing_hierarchy(&sys, EpsPolicy::default(), Budget::default()).unwrap();
        assert!(rep.all_passed(), "{:?}", rep.failures());
        let a = emit_report(&rep, Format::Json);
        let back: VerificationReport = serde_json::from_str(&a).unwrap();
        assert_eq!(back, rep);
        let again = verify_shadowing_hierarchy(&sys, EpsPolicy::default(), Budget::default()).unwrap();
        assert_eq!(emit_report(&again, Format::Json), a);
        let md = emit_report(&rep, Format::Markdown);
        assert!(md.starts_with("# Verification report: hierarchy"));
    }

    #[test]
    fn budget_becomes_skip() {
        let sys = generators::gen_cycle(3);
        let opts = HarnessOptions {
            budget: Budget(1),
            ..HarnessOptions::default()
        };
        let rep = run_suite(&sys, &[Suite::Hierarchy], &opts).unwrap();
        assert!(rep.any_skipped());
    }

    #[test]
    fn suite_names() {
        assert_eq!(Suite::parse_list("all").unwrap().len(), 5);
        assert_eq!(Suite::parse_list("twosided-n").unwrap(), vec![Suite::TwoSidedN]);
        assert!(matches!(Suite::parse_list("bogus"), Err(Error::UnknownSuite(_))));
    }

    #[test]
    fn lattice_policy_thins_evenly() {
        let sys = generators::gen_random(3, 8, generators::RandomMode::Plane).unwrap();
        let all = EpsPolicy::Lattice { cap: usize::MAX }.values(&sys);
        let few = EpsPolicy::Lattice { cap: 3 }.values(&sys);
        assert_eq!(few.first(), all.first());
        assert_eq!(few.last(), all.last());
        assert!(few.len() <= 3);
    }
}

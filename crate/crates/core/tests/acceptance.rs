mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use shadowlab::document::{load_system, save_system, to_json_string};
use shadowlab::expansivity::{
    limit_shadowing_report, max_gamma_plus, n_expansivity_radius, positive_expansivity_radius,
    positive_expansivity_radius_closed_form,
};
use shadowlab::generators::{self, Boundary, RandomMode, Sided};
use shadowlab::harness::{emit_report, run_suite, Format, HarnessOptions, Suite};
use shadowlab::lattice::{edge_lattice, pair_lattice};
use shadowlab::multiplicity::{count_at_most, decide_unique_h, max_shadower_count, n_shadow_modulus};
use shadowlab::replay::{replay_lasso, replay_shadowing, replay_unique_h};
use shadowlab::shadowing::{decide_backward, decide_h, decide_two_sided, modulus};
use shadowlab::{Budget, FiniteSystem, ShadowingKind, Threshold, Verdict};

type Outcome = Result<String, String>;

/// FAIL witnesses emitted by criteria 1-5, with their replay results.
#[derive(Default)]
struct Replays {
    checked: usize,
    errors: Vec<String>,
}

impl Replays {
    fn record(&mut self, context: impl FnOnce() -> String, r: Result<(), String>) {
        self.checked += 1;
        if let Err(e) = r {
            self.errors.push(format!("{}: {e}", context()));
        }
    }
}

fn b() -> Budget {
    Budget::default()
}

fn err(e: shadowlab::Error) -> String {
    e.to_string()
}

fn positive_pair(sys: &FiniteSystem) -> Vec<Threshold> {
    pair_lattice(sys).positive().cloned().collect()
}

fn positive_edge(sys: &FiniteSystem) -> Vec<Threshold> {
    edge_lattice(sys).positive().cloned().collect()
}

fn criterion_1(replays: &mut Replays) -> Outcome {
    let eps = Threshold::ratio(1, 3);
    let mut slowest = Duration::ZERO;
    for depth in 1..=8u32 {
        let sys = generators::gen_not_onto(depth);
        let start = Instant::now();
        let m = modulus(&sys, ShadowingKind::Forward, &eps, b()).map_err(err)?;
        let took = start.elapsed();
        slowest = slowest.max(took);
        let expected = Threshold::ratio(1, 1 << depth);
        if m.modulus != expected {
            return Err(format!("N={depth}: modulus {} != {expected}", m.modulus));
        }
        if took >= Duration::from_secs(5) {
            return Err(format!("N={depth}: took {took:?}"));
        }
        let (Some(d), Some(w)) = (&m.witness_delta, &m.witness) else {
            return Err(format!("N={depth}: no failure witness above the modulus"));
        };
        replays.record(|| format!("c1 N={depth}"), replay_shadowing(&sys, ShadowingKind::Forward, &eps, d, w));

        let len = 2 * sys.len();
        if let Some(p) = common::naive_forward_failure(&sys, &eps, &m.modulus, len) {
            return Err(format!("N={depth}: naive oracle finds unshadowed {p:?} at the modulus"));
        }
        match common::naive_forward_failure(&sys, &eps, d, len) {
            Some(p) if common::is_pseudo_orbit(&sys, d, &p) => {}
            _ => return Err(format!("N={depth}: naive oracle finds no failure at delta={d}")),
        }
    }
    Ok(format!("N=1..8 exact 2^-N, naive oracle agrees, slowest {slowest:?}"))
}

fn criterion_2() -> Outcome {
    let r = Threshold::ratio(1, 4);
    let mut slowest = Duration::ZERO;
    for n in [2usize, 3] {
        for depth in [3u32, 4] {
            for copies in [0u32, 1] {
                let tag = format!("n={n} K={depth} M={copies}");
                let start = Instant::now();
                let sys = generators::gen_n_expansive(n, depth, copies, Boundary::Open);
                let g = max_gamma_plus(&sys, &r).map_err(err)?;
                if g != n {
                    return Err(format!("{tag}: max |Γ₊(x,1/4)| = {g}"));
                }
                let rad = positive_expansivity_radius(&sys, n - 1).map_err(err)?;
                let closed = positive_expansivity_radius_closed_form(&sys, n - 1).map_err(err)?;
                if rad != closed {
                    return Err(format!("{tag}: sweep radius {rad} != closed form {closed}"));
                }
                let bound = Threshold::ratio(2, 1 << depth);
                if rad >= bound {
                    return Err(format!("{tag}: radius {rad} not below {bound}"));
                }
                let took = start.elapsed();
                slowest = slowest.max(took);
                if took >= Duration::from_secs(30) {
                    return Err(format!("{tag}: took {took:?}"));
                }
            }
        }
    }
    Ok(format!("8 instances, slowest {slowest:?}"))
}

fn criterion_3(corpus: &[FiniteSystem], replays: &mut Replays) -> Outcome {
    let start = Instant::now();
    let mut forward_checks = 0;
    let mut converse_checks = 0;
    for (i, sys) in corpus.iter().enumerate() {
        let seed = i + 1;
        let pairs = positive_pair(sys);
        for n in [1usize, 2] {
            let rad = positive_expansivity_radius(sys, n).map_err(err)?;
            for eps in pairs.iter().filter(|e| e.double() < rad) {
                let m = modulus(sys, ShadowingKind::Forward, eps, b()).map_err(err)?;
                forward_checks += 1;
                if let Verdict::Fails(w) = count_at_most(sys, n, eps, &m.modulus, b()).map_err(err)? {
                    replays.record(
                        || format!("c3 seed={seed} n={n} eps={eps}"),
                        replay_lasso(sys, eps, &m.modulus, n + 1, &w),
                    );
                    return Err(format!("seed {seed}: count_at_most({n}) fails at eps={eps}, delta={}", m.modulus));
                }
            }
        }
        let dmin = edge_lattice(sys).min_positive().cloned().ok_or("no positive edge value")?;
        for eps in &pairs {
            let g = max_gamma_plus(sys, eps).map_err(err)?;
            let rep = max_shadower_count(sys, eps, &dmin, g.max(1), b()).map_err(err)?;
            converse_checks += 1;
            if rep.at_least() < g {
                return Err(format!("seed {seed}: max shadowers {} < |Γ₊| {g} at eps={eps}", rep.at_least()));
            }
        }
    }
    let took = start.elapsed();
    if took >= Duration::from_secs(600) {
        return Err(format!("took {took:?}"));
    }
    Ok(format!("{forward_checks} forward + {converse_checks} converse checks, 0 violations, {took:?}"))
}

fn criterion_4(corpus: &[FiniteSystem], replays: &mut Replays) -> Outcome {
    let shifts: Vec<FiniteSystem> = (1..=3).map(|p| generators::gen_periodic_shift(2, p, Sided::Two)).collect();
    let mut checks = 0;
    for (i, sys) in corpus.iter().chain(&shifts).enumerate() {
        let tag = if i < corpus.len() {
            format!("seed {}", i + 1)
        } else {
            format!("shift P={}", i + 1 - corpus.len())
        };
        let deltas = positive_edge(sys);
        for eps in positive_pair(sys) {
            let fwd = modulus(sys, ShadowingKind::Forward, &eps, b()).map_err(err)?;
            let two = modulus(sys, ShadowingKind::TwoSided, &eps, b()).map_err(err)?;
            let half = modulus(sys, ShadowingKind::Forward, &eps.half(), b()).map_err(err)?;
            if !(two.modulus >= fwd.modulus && fwd.modulus >= half.modulus) {
                return Err(format!(
                    "{tag} eps={eps}: two-sided {} forward {} forward(eps/2) {}",
                    two.modulus, fwd.modulus, half.modulus
                ));
            }
            for d in &deltas {
                let back = decide_backward(sys, &eps, d, b()).map_err(err)?;
                let ts = decide_two_sided(sys, &eps, d, b()).map_err(err)?;
                checks += 1;
                for (kind, v) in [(ShadowingKind::Backward, &back), (ShadowingKind::TwoSided, &ts)] {
                    if let Verdict::Fails(w) = v {
                        replays.record(
                            || format!("c4 {tag} {} eps={eps} delta={d}", kind.name()),
                            replay_shadowing(sys, kind, &eps, d, w),
                        );
                    }
                }
                if back.holds() != ts.holds() {
                    return Err(format!("{tag} eps={eps} delta={d}: backward {} two-sided {}", back.holds(), ts.holds()));
                }
            }
        }
    }
    Ok(format!("{} systems, {checks} (eps, delta) points, 0 violations", corpus.len() + shifts.len()))
}

fn criterion_5(corpus: &[FiniteSystem], replays: &mut Replays) -> Outcome {
    for depth in 2..=6u32 {
        let sys = generators::gen_identity_cantor(depth);
        let dmin = edge_lattice(&sys).min_positive().cloned().ok_or("no positive edge value")?;
        let gap = Threshold::ratio(1, 1 << depth);
        for eps in positive_pair(&sys) {
            if !decide_h(&sys, &eps, &dmin, b()).map_err(err)?.holds() {
                return Err(format!("N={depth}: h-shadowing fails at eps={eps}"));
            }
            let v = count_at_most(&sys, 1, &eps, &dmin, b()).map_err(err)?;
            match (&v, eps > gap) {
                (Verdict::Fails(w), true) => replays.record(
                    || format!("c5 N={depth} eps={eps}"),
                    replay_lasso(&sys, &eps, &dmin, 2, w),
                ),
                (Verdict::Holds, false) => {}
                _ => return Err(format!("N={depth} eps={eps}: count_at_most(1) holds={}", v.holds())),
            }
        }
    }
    let mut points = 0;
    for (i, sys) in corpus.iter().enumerate() {
        let seed = i + 1;
        for eps in positive_pair(sys) {
            for d in positive_edge(sys) {
                points += 1;
                let unique = count_at_most(sys, 1, &eps, &d, b()).map_err(err)?;
                let h = decide_h(sys, &eps, &d, b()).map_err(err)?;
                let uh = decide_unique_h(sys, &eps, &d, b()).map_err(err)?;
                if let Verdict::Fails(w) = &unique {
                    replays.record(|| format!("c5 seed={seed} count eps={eps} delta={d}"), replay_lasso(sys, &eps, &d, 2, w));
                }
                if let Verdict::Fails(w) = &h {
                    replays.record(
                        || format!("c5 seed={seed} h eps={eps} delta={d}"),
                        replay_shadowing(sys, ShadowingKind::H, &eps, &d, w),
                    );
                }
                if let Verdict::Fails(w) = &uh {
                    replays.record(|| format!("c5 seed={seed} unique-h eps={eps} delta={d}"), replay_unique_h(sys, &eps, &d, w));
                }
                if unique.holds() && h.holds() && !uh.holds() {
                    return Err(format!("seed {seed} eps={eps} delta={d}: unique and h but not unique h"));
                }
            }
        }
        let lim = limit_shadowing_report(sys).map_err(err)?;
        let no_pairs = lim.asymptotic_pair_count == 0;
        if lim.unique_limit != lim.injective || lim.injective != no_pairs {
            return Err(format!(
                "seed {seed}: unique_limit {} injective {} asymptotic pairs {}",
                lim.unique_limit, lim.injective, lim.asymptotic_pair_count
            ));
        }
    }
    Ok(format!("identity N=2..6 pattern holds; {points} corpus lattice points, 0 violations"))
}

fn in_lattice(t: &Threshold, values: &[Threshold]) -> bool {
    t.is_unbounded() || values.contains(t)
}

fn criterion_6(corpus: &[FiniteSystem]) -> Outcome {
    let mut checked = 0;
    for (i, sys) in corpus.iter().enumerate() {
        let seed = i + 1;
        let edge = edge_lattice(sys).values;
        let pair = pair_lattice(sys).values;
        for eps in positive_pair(sys) {
            for kind in ShadowingKind::ALL {
                let m = modulus(sys, kind, &eps, b()).map_err(err)?;
                checked += 1;
                if !in_lattice(&m.modulus, &edge) {
                    return Err(format!("seed {seed}: {} modulus {} outside the edge lattice", kind.name(), m.modulus));
                }
            }
            for n in [1, 2] {
                let m = n_shadow_modulus(sys, n, &eps, b()).map_err(err)?;
                checked += 1;
                if !in_lattice(&m, &edge) {
                    return Err(format!("seed {seed}: {n}-shadow modulus {m} outside the edge lattice"));
                }
            }
        }
        for n in [1, 2, 3] {
            let pos = positive_expansivity_radius(sys, n).map_err(err)?;
            let two = n_expansivity_radius(sys, n, b()).map_err(err)?;
            checked += 2;
            if !in_lattice(&pos, &pair) || !in_lattice(&two.radius, &pair) {
                return Err(format!("seed {seed}: radius {pos} / {} outside the pair lattice", two.radius));
            }
        }
    }

    let opts = HarnessOptions::default();
    let shift = generators::gen_periodic_shift(2, 3, Sided::Two);
    for sys in corpus.iter().take(5).chain([&shift]) {
        let first = emit_report(&run_suite(sys, &Suite::ALL, &opts).map_err(err)?, Format::Json);
        let mut text = Vec::new();
        save_system(sys, &mut text).map_err(err)?;
        let reloaded = load_system(text.as_slice()).map_err(err)?;
        let second = emit_report(&run_suite(&reloaded, &Suite::ALL, &opts).map_err(err)?, Format::Json);
        if first != second {
            return Err("repeated verification reports differ".into());
        }
    }

    for seed in 1..=100u64 {
        let mode = if seed % 2 == 0 { RandomMode::Matrix } else { RandomMode::Plane };
        let npoints = 2 + (seed as usize % 9);
        let sys = generators::gen_random(seed, npoints, mode).map_err(err)?;
        let mut text = Vec::new();
        save_system(&sys, &mut text).map_err(err)?;
        let back = load_system(text.as_slice()).map_err(err)?;
        if back.raw() != sys.raw() || to_json_string(&back).as_bytes() != text.as_slice() {
            return Err(format!("random seed {seed}: save/load is not an identity"));
        }
    }
    Ok(format!("{checked} values in their lattices; reports byte-identical; 100 round-trips"))
}

fn criterion_7(replays: &Replays) -> Outcome {
    if !replays.errors.is_empty() {
        return Err(format!("{} of {} witnesses rejected: {}", replays.errors.len(), replays.checked, replays.errors[0]));
    }
    if replays.checked == 0 {
        return Err("no FAIL witnesses were produced".into());
    }
    Ok(format!("{} FAIL witnesses replayed", replays.checked))
}

fn main() -> ExitCode {
    let corpus = generators::random_corpus();
    let mut replays = Replays::default();
    let results = [
        ("1", criterion_1(&mut replays)),
        ("2", criterion_2()),
        ("3", criterion_3(&corpus, &mut replays)),
        ("4", criterion_4(&corpus, &mut replays)),
        ("5", criterion_5(&corpus, &mut replays)),
        ("6", criterion_6(&corpus)),
    ];
    let seventh = ("7", criterion_7(&replays));
    let mut failed = 0;
    for (id, r) in results.iter().chain(std::iter::once(&seventh)) {
        match r {
            Ok(detail) => println!("criterion {id}: PASS ({detail})"),
            Err(why) => {
                failed += 1;
                println!("criterion {id}: FAIL ({why})");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

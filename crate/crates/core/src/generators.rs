//! Example systems and reference families.

use std::collections::{BTreeMap, HashMap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::ExactRational;
use crate::system::{validate_system, FiniteSystem, Metric, PointRecord, RawSystem};

pub const RANDOM_POINT_CAP: usize = 10;
const REPAIR_ATTEMPTS: usize = 10_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    Open,
    Loop,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sided {
    One,
    Two,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RandomMode {
    Plane,
    Matrix,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum GeneratorSpec {
    NotOnto { depth: u32 },
    NExpansive { n: usize, k: u32, m: u32, boundary: Boundary },
    IdentityCantor { depth: u32 },
    PeriodicShift { alphabet: usize, period: usize, sided: Sided },
    Cycle { k: usize },
    TwoFixed { d: ExactRational },
    Merge,
    Random { seed: u64, points: usize, mode: RandomMode },
}

impl GeneratorSpec {
    pub fn family(&self) -> &'static str {
        match self {
            GeneratorSpec::NotOnto { .. } => "not_onto",
            GeneratorSpec::NExpansive { .. } => "n_expansive",
            GeneratorSpec::IdentityCantor { .. } => "identity_cantor",
            GeneratorSpec::PeriodicShift { .. } => "periodic_shift",
            GeneratorSpec::Cycle { .. } => "cycle",
            GeneratorSpec::TwoFixed { .. } => "two_fixed",
            GeneratorSpec::Merge => "merge",
            GeneratorSpec::Random { .. } => "random",
        }
    }

    fn check(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::Generator(msg.to_string()));
        match self {
            GeneratorSpec::NotOnto { depth } if *depth < 1 || *depth > 60 => bad("not_onto depth must be in 1..=60"),
            GeneratorSpec::NExpansive { n, k, .. } if *n < 2 || *k < 1 || *k > 30 => {
                bad("n_expansive needs n >= 2 and 1 <= K <= 30")
            }
            GeneratorSpec::IdentityCantor { depth } if *depth > 60 => bad("identity_cantor depth must be at most 60"),
            GeneratorSpec::PeriodicShift { alphabet, period, .. } if *alphabet < 2 || *period < 1 => {
                bad("periodic_shift needs alphabet >= 2 and period >= 1")
            }
            GeneratorSpec::PeriodicShift { alphabet, period, .. }
                if (*alphabet as f64).powi(*period as i32) > 4096.0 =>
            {
                bad("periodic_shift instance too large")
            }
            GeneratorSpec::Cycle { k } if *k < 1 => bad("cycle length must be positive"),
            GeneratorSpec::TwoFixed { d } if !d.is_positive() => bad("two_fixed distance must be positive"),
            GeneratorSpec::Random { points, .. } if *points < 1 || *points > RANDOM_POINT_CAP => {
                bad("random point count out of range")
            }
            _ => Ok(()),
        }
    }

    pub fn generate(&self) -> Result<FiniteSystem> {
        self.check()?;
        Ok(match self {
            GeneratorSpec::NotOnto { depth } => gen_not_onto(*depth),
            GeneratorSpec::NExpansive { n, k, m, boundary } => gen_n_expansive(*n, *k, *m, *boundary),
            GeneratorSpec::IdentityCantor { depth } => gen_identity_cantor(*depth),
            GeneratorSpec::PeriodicShift { alphabet, period, sided } => gen_periodic_shift(*alphabet, *period, *sided),
            GeneratorSpec::Cycle { k } => gen_cycle(*k),
            GeneratorSpec::TwoFixed { d } => gen_two_fixed(d.clone()),
            GeneratorSpec::Merge => gen_merge(),
            GeneratorSpec::Random { seed, points, mode } => gen_random(*seed, *points, *mode)?,
        })
    }
}

fn meta(family: &str, params: &[(&str, String)]) -> BTreeMap<String, String> {
    let mut m = BTreeMap::new();
    m.insert("generator".to_string(), family.to_string());
    for (k, v) in params {
        m.insert((*k).to_string(), v.clone());
    }
    m
}

fn build(raw: RawSystem) -> FiniteSystem {
    FiniteSystem::new(raw).expect("generator output validates")
}

fn r(p: i64, q: i64) -> ExactRational {
    ExactRational::new(p, q)
}

fn line_label(x: &ExactRational) -> String {
    x.to_string()
}

fn plane_label(x: &ExactRational, y: &ExactRational) -> String {
    format!("({x},{y})")
}

fn unit_matrix(k: usize) -> Vec<Vec<ExactRational>> {
    (0..k)
        .map(|i| {
            (0..k)
                .map(|j| if i == j { ExactRational::zero() } else { ExactRational::one() })
                .collect()
        })
        .collect()
}

/// `{-1, -1/2, 0} ∪ {2^-k : 0 <= k <= N}` on the line. `-1 ↦ -1/2 ↦ 0`,
/// `0` and `1` fixed, `2^-k ↦ 2^-(k-1)`.
pub fn gen_not_onto(depth: u32) -> FiniteSystem {
    assert!(depth >= 1);
    let mut xs = vec![r(-1, 1), r(-1, 2), r(0, 1)];
    for k in 0..=depth {
        xs.push(ExactRational::pow2_neg(k));
    }
    // indices: 0 → -1, 1 → -1/2, 2 → 0, 3 + k → 2^-k
    let mut map = vec![1, 2, 2, 3];
    for k in 1..=depth as usize {
        map.push(3 + k - 1);
    }
    let points = xs
        .iter()
        .map(|x| PointRecord::with_coords(line_label(x), vec![x.clone()]))
        .collect();
    let mut m = meta("not_onto", &[("N", depth.to_string())]);
    m.insert("f(-1/2)".into(), "0".into());
    m.insert("surjective".into(), "false".into());
    build(RawSystem {
        points,
        metric: Metric::Euclidean,
        map,
        meta: m,
    })
}

/// Truncation of the plane construction with `n`-point levels `Y_1..Y_K`,
/// shifted copies `X_1..X_M`, and the fixed points `(0,0)`, `(3,0)`, `(0,-2)`.
pub fn gen_n_expansive(n: usize, depth: u32, copies: u32, boundary: Boundary) -> FiniteSystem {
    assert!(n >= 2 && depth >= 1);
    let zero = ExactRational::zero();
    // Y levels as first coordinates, each sorted ascending
    let mut levels: Vec<Vec<ExactRational>> = vec![vec![r(3, 1)]];
    for k in 0..depth {
        let x = levels[k as usize][0].clone();
        let right = &x - &ExactRational::pow2_neg(k);
        let left = &right - &ExactRational::pow2_neg(k + 1);
        let gap = &ExactRational::pow2_neg(k + 1) / &ExactRational::from_integer(n as i64 - 1);
        let level: Vec<ExactRational> = (0..n)
            .map(|i| &left + &(&gap * &ExactRational::from_integer(i as i64)))
            .collect();
        levels.push(level);
    }

    // (x, y) coordinates, map targets resolved by coordinate lookup
    let mut coords: Vec<(ExactRational, ExactRational)> = Vec::new();
    let mut targets: Vec<(ExactRational, ExactRational)> = Vec::new();

    let deepest_min = levels[depth as usize][0].clone();
    coords.push((r(3, 1), zero.clone()));
    targets.push((r(3, 1), zero.clone()));
    for j in 1..=depth as usize {
        let min_prev = levels[j - 1][0].clone();
        for x in &levels[j] {
            coords.push((x.clone(), zero.clone()));
            if boundary == Boundary::Loop && *x == deepest_min {
                targets.push((x.clone(), zero.clone()));
            } else {
                targets.push((min_prev.clone(), zero.clone()));
            }
        }
    }
    coords.push((zero.clone(), zero.clone()));
    targets.push((zero.clone(), zero.clone()));

    // X_0 first coordinates in ascending order
    let mut layer: Vec<ExactRational> = std::iter::once(zero.clone())
        .chain(levels.iter().flatten().cloned())
        .collect();
    layer.sort();
    let mut height = zero.clone();
    for k in 0..copies {
        let mut next = layer.clone();
        next.pop();
        let new_height = &height - &ExactRational::pow2_neg(k);
        for (i, x) in next.iter().enumerate() {
            coords.push((x.clone(), new_height.clone()));
            if x.is_zero() {
                targets.push((zero.clone(), height.clone()));
            } else {
                // next point to the right one rung up
                targets.push((layer[i + 1].clone(), height.clone()));
            }
        }
        layer = next;
        height = new_height;
    }
    coords.push((zero.clone(), r(-2, 1)));
    targets.push((zero.clone(), r(-2, 1)));

    let index: HashMap<(ExactRational, ExactRational), usize> =
        coords.iter().cloned().enumerate().map(|(i, c)| (c, i)).collect();
    assert_eq!(index.len(), coords.len(), "distinct construction points");
    let map = targets.iter().map(|t| index[t]).collect();
    let points = coords
        .iter()
        .map(|(x, y)| PointRecord::with_coords(plane_label(x, y), vec![x.clone(), y.clone()]))
        .collect();
    let mut m = meta(
        "n_expansive",
        &[
            ("n", n.to_string()),
            ("K", depth.to_string()),
            ("M", copies.to_string()),
            ("boundary", format!("{boundary:?}").to_lowercase()),
        ],
    );
    let sys = build(RawSystem {
        points,
        metric: Metric::Euclidean,
        map,
        meta: m.clone(),
    });
    m.insert("surjective".into(), sys.is_surjective().to_string());
    let mut raw = sys.into_raw();
    raw.meta = m;
    build(raw)
}

/// `{2^-k : 0 <= k <= N} ∪ {0}` with the identity map.
pub fn gen_identity_cantor(depth: u32) -> FiniteSystem {
    let mut xs: Vec<ExactRational> = (0..=depth).map(ExactRational::pow2_neg).collect();
    xs.push(ExactRational::zero());
    let map = (0..xs.len()).collect();
    let points = xs
        .iter()
        .map(|x| PointRecord::with_coords(line_label(x), vec![x.clone()]))
        .collect();
    build(RawSystem {
        points,
        metric: Metric::Euclidean,
        map,
        meta: meta("identity_cantor", &[("N", depth.to_string())]),
    })
}

fn is_primitive(w: &[usize]) -> bool {
    let q = w.len();
    (1..q).filter(|d| q % d == 0).all(|d| (0..q).any(|i| w[i] != w[i % d]))
}

fn words(alphabet: usize, len: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|w| {
                (0..alphabet).map(move |a| {
                    let mut v = w.clone();
                    v.push(a);
                    v
                })
            })
            .collect();
    }
    out
}

fn symbol(w: &[usize], i: i64) -> usize {
    w[i.rem_euclid(w.len() as i64) as usize]
}

/// Periodic words of least period at most `period` with the shift map. The
/// word `w` stands for the sequence `s_i = w[i mod |w|]`.
pub fn gen_periodic_shift(alphabet: usize, period: usize, sided: Sided) -> FiniteSystem {
    assert!(alphabet >= 2 && period >= 1);
    let mut ws: Vec<Vec<usize>> = Vec::new();
    for q in 1..=period {
        ws.extend(words(alphabet, q).into_iter().filter(|w| is_primitive(w)));
    }
    let n = ws.len();
    let mut sq = vec![vec![ExactRational::zero(); n]; n];
    for a in 0..n {
        for b in 0..n {
            if a == b {
                continue;
            }
            let horizon = (ws[a].len() * ws[b].len()) as i64;
            let first = (0..=horizon)
                .find(|&m| {
                    symbol(&ws[a], m) != symbol(&ws[b], m)
                        || (sided == Sided::Two && symbol(&ws[a], -m) != symbol(&ws[b], -m))
                })
                .expect("distinct periodic words differ within the joint period");
            sq[a][b] = ExactRational::pow2_neg(2 * first as u32);
        }
    }
    let index: HashMap<Vec<usize>, usize> = ws.iter().cloned().enumerate().map(|(i, w)| (w, i)).collect();
    let map = ws
        .iter()
        .map(|w| {
            let mut s = w[1..].to_vec();
            s.push(w[0]);
            index[&s]
        })
        .collect();
    let points = ws
        .iter()
        .map(|w| {
            let s: String = w.iter().map(|a| a.to_string()).collect();
            PointRecord::new(format!("({s})"))
        })
        .collect();
    build(RawSystem {
        points,
        metric: Metric::Matrix(sq),
        map,
        meta: meta(
            "periodic_shift",
            &[
                ("alphabet", alphabet.to_string()),
                ("period", period.to_string()),
                ("sided", format!("{sided:?}").to_lowercase()),
            ],
        ),
    })
}

/// `k` points at unit distance, `i ↦ i + 1 mod k`.
pub fn gen_cycle(k: usize) -> FiniteSystem {
    assert!(k >= 1);
    build(RawSystem {
        points: (0..k).map(|i| PointRecord::new(i.to_string())).collect(),
        metric: Metric::Matrix(unit_matrix(k)),
        map: (0..k).map(|i| (i + 1) % k).collect(),
        meta: meta("cycle", &[("k", k.to_string())]),
    })
}

/// Fixed points `a` and `b` at distance `d`.
pub fn gen_two_fixed(d: ExactRational) -> FiniteSystem {
    assert!(d.is_positive());
    let z = ExactRational::zero();
    let s = d.square();
    build(RawSystem {
        points: vec![PointRecord::new("a"), PointRecord::new("b")],
        metric: Metric::Matrix(vec![vec![z.clone(), s.clone()], vec![s, z]]),
        map: vec![0, 1],
        meta: meta("two_fixed", &[("d", d.to_string())]),
    })
}

/// `p, q, r` with `d(p,q) = 1`, `d(p,r) = d(q,r) = 2`, everything mapped to `r`.
pub fn gen_merge() -> FiniteSystem {
    let e = |v: i64| ExactRational::from_integer(v);
    build(RawSystem {
        points: ["p", "q", "r"].iter().map(|l| PointRecord::new(*l)).collect(),
        metric: Metric::Matrix(vec![
            vec![e(0), e(1), e(4)],
            vec![e(1), e(0), e(4)],
            vec![e(4), e(4), e(0)],
        ]),
        map: vec![2, 2, 2],
        meta: meta("merge", &[]),
    })
}

/// Lowers `sq[i][k]` to `max(sq[i][j], sq[j][k])` wherever the triangle test
/// fails. Entries only decrease within a finite value set, so the loop ends.
fn repair(sq: &mut [Vec<ExactRational>]) -> bool {
    let n = sq.len();
    for _ in 0..REPAIR_ATTEMPTS {
        let mut changed = false;
        for i in 0..n {
            for k in 0..n {
                for j in 0..n {
                    if i == j || j == k || i == k {
                        continue;
                    }
                    let ok = crate::rational::sqrt_sum_cmp(&sq[i][k], &sq[i][j], &sq[j][k]) != std::cmp::Ordering::Greater;
                    if !ok {
                        let v = sq[i][j].clone().max(sq[j][k].clone());
                        sq[i][k] = v.clone();
                        sq[k][i] = v;
                        changed = true;
                    }
                }
            }
        }
        if !changed {
            return true;
        }
    }
    false
}

/// Pseudo-random system: points on the `1/16` grid of the unit square, or a
/// random metric table with entries in `{1/16, ..., 1}` repaired to satisfy
/// the triangle inequality. The map is uniform.
pub fn gen_random(seed: u64, npoints: usize, mode: RandomMode) -> Result<FiniteSystem> {
    GeneratorSpec::Random {
        seed,
        points: npoints,
        mode,
    }
    .check()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (points, metric) = match mode {
        RandomMode::Plane => {
            let mut cells: Vec<(i64, i64)> = Vec::new();
            while cells.len() < npoints {
                let c = (rng.gen_range(0..=16), rng.gen_range(0..=16));
                if !cells.contains(&c) {
                    cells.push(c);
                }
            }
            let pts = cells
                .iter()
                .map(|&(a, b)| {
                    let (x, y) = (r(a, 16), r(b, 16));
                    PointRecord::with_coords(plane_label(&x, &y), vec![x, y])
                })
                .collect();
            (pts, Metric::Euclidean)
        }
        RandomMode::Matrix => {
            let mut sq = vec![vec![ExactRational::zero(); npoints]; npoints];
            for i in 0..npoints {
                for j in (i + 1)..npoints {
                    let v = r(rng.gen_range(1..=16), 16);
                    sq[i][j] = v.clone();
                    sq[j][i] = v;
                }
            }
            if !repair(&mut sq) {
                return Err(Error::Generator(format!("metric repair failed for seed {seed}")));
            }
            let pts = (0..npoints).map(|i| PointRecord::new(format!("m{i}"))).collect();
            (pts, Metric::Matrix(sq))
        }
    };
    let map = (0..npoints).map(|_| rng.gen_range(0..npoints)).collect();
    let raw = RawSystem {
        points,
        metric,
        map,
        meta: meta(
            "random",
            &[
                ("seed", seed.to_string()),
                ("points", npoints.to_string()),
                ("mode", format!("{mode:?}").to_lowercase()),
            ],
        ),
    };
    let violations = validate_system(&raw);
    if !violations.is_empty() {
        return Err(Error::Generator(format!("seed {seed} produced an invalid system")));
    }
    FiniteSystem::new(raw)
}

/// The harness corpus: seeds 1..=50 with 6 to 8 points, alternating modes.
pub fn random_corpus() -> Vec<FiniteSystem> {
    (1..=50u64)
        .map(|seed| {
            let mode = if seed % 2 == 1 { RandomMode::Plane } else { RandomMode::Matrix };
            gen_random(seed, 6 + (seed % 3) as usize, mode).expect("corpus seeds generate")
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::system::PointId;

    #[test]
    fn not_onto_shape() {
        let s = gen_not_onto(3);
        assert_eq!(s.len(), 7);
        let img = |l: &str| s.label(s.image(s.id_of(l).unwrap())).to_string();
        assert_eq!(img("-1"), "-1/2");
        assert_eq!(img("-1/2"), "0");
        assert_eq!(img("0"), "0");
        assert_eq!(img("1"), "1");
        assert_eq!(img("1/2"), "1");
        assert_eq!(img("1/8"), "1/4");
        assert!(!s.is_surjective());
        assert_eq!(gen_not_onto(1).len(), 5);
    }

    #[test]
    fn n_expansive_shape() {
        let s = gen_n_expansive(2, 3, 1, Boundary::Open);
        assert_eq!(s.len(), 16);
        for l in ["(0,0)", "(3,0)", "(0,-2)"] {
            let p = s.id_of(l).unwrap();
            assert_eq!(s.image(p), p);
        }
        assert!(s.id_of("(1/2,0)").is_ok() && s.id_of("(3/8,0)").is_ok());
        let d = s.squared_distance(s.id_of("(1/2,0)").unwrap(), s.id_of("(3/8,0)").unwrap()).unwrap();
        assert_eq!(d, r(1, 64));
        // chain point climbs to the origin
        assert_eq!(s.label(s.image(s.id_of("(0,-1)").unwrap())), "(0,0)");
        assert_eq!(s.meta()["surjective"], "false");
    }

    #[test]
    fn n_expansive_levels_are_equidistant() {
        let s = gen_n_expansive(3, 2, 0, Boundary::Open);
        // Y_2 from min of Y_1 = 3/2: endpoints 1 and 3/4, midpoint 7/8
        for l in ["(1,0)", "(7/8,0)", "(3/4,0)"] {
            assert_eq!(s.label(s.image(s.id_of(l).unwrap())), "(3/2,0)");
        }
    }

    #[test]
    fn n_expansive_loop_boundary() {
        let s = gen_n_expansive(2, 3, 0, Boundary::Loop);
        let p = s.id_of("(3/8,0)").unwrap();
        assert_eq!(s.image(p), p);
        assert_eq!(s.meta()["boundary"], "loop");
    }

    #[test]
    fn n_expansive_copies_shift_right() {
        let s = gen_n_expansive(2, 3, 2, Boundary::Open);
        // X_1 lives at height -1, X_2 at height -3/2
        let p = s.id_of("(3/8,-1)").unwrap();
        assert_eq!(s.label(s.image(p)), "(1/2,0)");
        let q = s.id_of("(0,-3/2)").unwrap();
        assert_eq!(s.label(s.image(q)), "(0,-1)");
        assert_eq!(s.len(), 8 + 7 + 6 + 1);
    }

    #[test]
    fn identity_cantor_shape() {
        let s = gen_identity_cantor(0);
        assert_eq!(s.labels_of(&[PointId(0), PointId(1)]), vec!["1", "0"]);
        let s = gen_identity_cantor(4);
        assert_eq!(s.len(), 6);
        assert!(s.is_injective());
    }

    #[test]
    fn periodic_shift_shape() {
        let s = gen_periodic_shift(2, 2, Sided::Two);
        assert_eq!(s.len(), 4);
        let a = s.id_of("(0)").unwrap();
        let b = s.id_of("(01)").unwrap();
        assert_eq!(s.squared_distance(a, b).unwrap(), r(1, 4));
        assert!(s.is_injective() && s.is_surjective());
        let two = gen_periodic_shift(2, 1, Sided::Two);
        assert_eq!(two.len(), 2);
        assert_eq!(two.sq(0, 1), &ExactRational::one());
        assert_eq!(gen_periodic_shift(3, 1, Sided::One).len(), 3);
        assert_eq!(gen_periodic_shift(2, 3, Sided::Two).len(), 2 + 2 + 6);
    }

    #[test]
    fn one_sided_shift_metric() {
        let s = gen_periodic_shift(2, 2, Sided::One);
        let a = s.id_of("(0)").unwrap();
        let b = s.id_of("(01)").unwrap();
        // (01) starts with 0, so the first disagreement is at index 1
        assert_eq!(s.squared_distance(a, b).unwrap(), r(1, 4));
        let c = s.id_of("(10)").unwrap();
        assert_eq!(s.squared_distance(a, c).unwrap(), ExactRational::one());
    }

    #[test]
    fn random_is_deterministic_and_valid() {
        for seed in 0..40 {
            for mode in [RandomMode::Plane, RandomMode::Matrix] {
                let a = gen_random(seed, 8, mode).unwrap();
                let b = gen_random(seed, 8, mode).unwrap();
                assert_eq!(a, b);
                assert!(validate_system(a.raw()).is_empty());
            }
        }
        let one = gen_random(1, 1, RandomMode::Plane).unwrap();
        assert_eq!(one.map_table(), &[0]);
        assert!(gen_random(1, RANDOM_POINT_CAP + 1, RandomMode::Plane).is_err());
    }

    #[test]
    fn spec_generation_checks_ranges() {
        assert!(GeneratorSpec::NExpansive { n: 1, k: 3, m: 0, boundary: Boundary::Open }.generate().is_err());
        let s = GeneratorSpec::Merge.generate().unwrap();
        assert_eq!(s.meta()["generator"], "merge");
        let j = serde_json::to_string(&GeneratorSpec::Cycle { k: 3 }).unwrap();
        assert_eq!(j, r#"{"family":"cycle","k":3}"#);
    }
}

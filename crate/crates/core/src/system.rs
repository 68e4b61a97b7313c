//! The finite metric dynamical system and its validation.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pointset::PointSet;
use crate::rational::{sqrt_sum_cmp, ExactRational};
use crate::threshold::Threshold;

/// Index into a system's point table.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PointId(pub usize);

impl PointId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl From<usize> for PointId {
    fn from(i: usize) -> Self {
        PointId(i)
    }
}

impl fmt::Display for PointId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PointRecord {
    pub label: String,
    pub coords: Option<Vec<ExactRational>>,
}

impl PointRecord {
    pub fn new(label: impl Into<String>) -> Self {
        PointRecord {
            label: label.into(),
            coords: None,
        }
    }

    pub fn with_coords(label: impl Into<String>, coords: Vec<ExactRational>) -> Self {
        PointRecord {
            label: label.into(),
            coords: Some(coords),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Metric {
    /// Squared distances derived from the point coordinates.
    Euclidean,
    /// Explicit table of squared distances.
    Matrix(Vec<Vec<ExactRational>>),
}

/// An unvalidated system as read from a document or assembled by a generator.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RawSystem {
    pub points: Vec<PointRecord>,
    pub metric: Metric,
    pub map: Vec<usize>,
    pub meta: BTreeMap<String, String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    Empty,
    DuplicateLabel { first: usize, second: usize },
    MissingCoords { point: usize },
    DimensionMismatch { point: usize, expected: usize, found: usize },
    MatrixShape { row: Option<usize> },
    Asymmetry { i: usize, j: usize },
    NonzeroDiagonal { i: usize },
    NonPositive { i: usize, j: usize },
    Triangle { i: usize, j: usize, k: usize },
    MapLength { expected: usize, found: usize },
    MapOutOfRange { point: usize, image: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Empty => write!(f, "system has no points"),
            Violation::DuplicateLabel { first, second } => {
                write!(f, "duplicate label at ({first},{second})")
            }
            Violation::MissingCoords { point } => write!(f, "missing coordinates at ({point})"),
            Violation::DimensionMismatch {
                point,
                expected,
                found,
            } => write!(
                f,
                "dimension mismatch at ({point}): expected {expected}, found {found}"
            ),
            Violation::MatrixShape { row: Some(r) } => write!(f, "matrix row ({r}) has wrong length"),
            Violation::MatrixShape { row: None } => write!(f, "matrix has wrong number of rows"),
            Violation::Asymmetry { i, j } => write!(f, "asymmetry at ({i},{j})"),
            Violation::NonzeroDiagonal { i } => write!(f, "nonzero diagonal at ({i},{i})"),
            Violation::NonPositive { i, j } => write!(f, "non-positive distance at ({i},{j})"),
            Violation::Triangle { i, j, k } => write!(f, "triangle inequality fails at ({i},{j},{k})"),
            Violation::MapLength { expected, found } => {
                write!(f, "map has {found} entries, expected {expected}")
            }
            Violation::MapOutOfRange { point, image } => {
                write!(f, "map entry out of range at ({point}): {image}")
            }
        }
    }
}

fn euclidean_sq(a: &[ExactRational], b: &[ExactRational]) -> ExactRational {
    a.iter()
        .zip(b)
        .fold(ExactRational::zero(), |acc, (x, y)| acc + (x - y).square())
}

/// Returns every invariant violation of `raw`; an empty result means valid.
pub fn validate_system(raw: &RawSystem) -> Vec<Violation> {
    let n = raw.points.len();
    let mut out = Vec::new();
    if n == 0 {
        out.push(Violation::Empty);
        return out;
    }
    let mut seen: HashMap<&str, usize> = HashMap::new();
    for (i, p) in raw.points.iter().enumerate() {
        if let Some(&first) = seen.get(p.label.as_str()) {
            out.push(Violation::DuplicateLabel { first, second: i });
        } else {
            seen.insert(&p.label, i);
        }
    }
    let dim = raw.points.iter().find_map(|p| p.coords.as_ref().map(Vec::len));
    for (i, p) in raw.points.iter().enumerate() {
        match (&p.coords, dim) {
            (Some(c), Some(d)) if c.len() != d => out.push(Violation::DimensionMismatch {
                point: i,
                expected: d,
                found: c.len(),
            }),
            (None, _) if raw.metric == Metric::Euclidean => {
                out.push(Violation::MissingCoords { point: i })
            }
            _ => {}
        }
    }
    if raw.map.len() != n {
        out.push(Violation::MapLength {
            expected: n,
            found: raw.map.len(),
        });
    }
    for (i, &img) in raw.map.iter().enumerate() {
        if img >= n {
            out.push(Violation::MapOutOfRange {
                point: i,
                image: img,
            });
        }
    }
    if !out.is_empty() {
        return out;
    }
    let sq = match &raw.metric {
        Metric::Euclidean => {
            let c: Vec<&Vec<ExactRational>> =
                raw.points.iter().map(|p| p.coords.as_ref().unwrap()).collect();
            (0..n)
                .map(|i| (0..n).map(|j| euclidean_sq(c[i], c[j])).collect())
                .collect::<Vec<Vec<_>>>()
        }
        Metric::Matrix(m) => {
            if m.len() != n {
                out.push(Violation::MatrixShape { row: None });
                return out;
            }
            for (r, row) in m.iter().enumerate() {
                if row.len() != n {
                    out.push(Violation::MatrixShape { row: Some(r) });
                }
            }
            if !out.is_empty() {
                return out;
            }
            m.clone()
        }
    };
    check_metric(&sq, &mut out);
    out
}

fn check_metric(sq: &[Vec<ExactRational>], out: &mut Vec<Violation>) {
    let n = sq.len();
    let mut sound = true;
    for i in 0..n {
        if !sq[i][i].is_zero() {
            out.push(Violation::NonzeroDiagonal { i });
            sound = false;
        }
        for j in (i + 1)..n {
            if sq[i][j] != sq[j][i] {
                out.push(Violation::Asymmetry { i, j });
                sound = false;
            }
            if !sq[i][j].is_positive() || !sq[j][i].is_positive() {
                out.push(Violation::NonPositive { i, j });
                sound = false;
            }
        }
    }
    if !sound {
        return;
    }
    for i in 0..n {
        for k in (i + 1)..n {
            for j in 0..n {
                if j == i || j == k {
                    continue;
                }
                if sqrt_sum_cmp(&sq[i][k], &sq[i][j], &sq[j][k]) == std::cmp::Ordering::Greater {
                    out.push(Violation::Triangle { i, j, k });
                }
            }
        }
    }
}

/// A validated finite system `(X, f)`. Immutable; all analyses borrow it.
#[derive(Clone, Debug)]
pub struct FiniteSystem {
    raw: RawSystem,
    sq: Vec<Vec<ExactRational>>,
    /// Distinct squared distances in increasing order (starts with 0).
    distinct_sq: Vec<ExactRational>,
    /// `rank[i][j]` is the index of `sq[i][j]` in `distinct_sq`.
    rank: Vec<Vec<u32>>,
    labels: HashMap<String, usize>,
}

impl PartialEq for FiniteSystem {
    fn eq(&self, other: &Self) -> bool {
        self.raw == other.raw
    }
}

impl Eq for FiniteSystem {}

impl FiniteSystem {
    pub fn new(raw: RawSystem) -> Result<Self> {
        let violations = validate_system(&raw);
        if !violations.is_empty() {
            return Err(Error::Validation(violations));
        }
        let n = raw.points.len();
        let sq: Vec<Vec<ExactRational>> = match &raw.metric {
            Metric::Euclidean => (0..n)
                .map(|i| {
                    (0..n)
                        .map(|j| {
                            euclidean_sq(
                                raw.points[i].coords.as_ref().unwrap(),
                                raw.points[j].coords.as_ref().unwrap(),
                            )
                        })
                        .collect()
                })
                .collect(),
            Metric::Matrix(m) => m.clone(),
        };
        let mut distinct_sq: Vec<ExactRational> = sq.iter().flatten().cloned().collect();
        distinct_sq.sort();
        distinct_sq.dedup();
        let rank = sq
            .iter()
            .map(|row| {
                row.iter()
                    .map(|v| distinct_sq.binary_search(v).unwrap() as u32)
                    .collect()
            })
            .collect();
        let labels = raw
            .points
            .iter()
            .enumerate()
            .map(|(i, p)| (p.label.clone(), i))
            .collect();
        Ok(FiniteSystem {
            raw,
            sq,
            distinct_sq,
            rank,
            labels,
        })
    }

    pub fn raw(&self) -> &RawSystem {
        &self.raw
    }

    pub fn into_raw(self) -> RawSystem {
        self.raw
    }

    pub fn len(&self) -> usize {
        self.raw.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.raw.points.is_empty()
    }

    pub fn ids(&self) -> impl Iterator<Item = PointId> {
        (0..self.len()).map(PointId)
    }

    pub fn label(&self, id: PointId) -> &str {
        &self.raw.points[id.0].label
    }

    pub fn labels_of(&self, ids: &[PointId]) -> Vec<String> {
        ids.iter().map(|&i| self.label(i).to_string()).collect()
    }

    pub fn id_of(&self, label: &str) -> Result<PointId> {
        self.labels
            .get(label)
            .map(|&i| PointId(i))
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    pub fn meta(&self) -> &BTreeMap<String, String> {
        &self.raw.meta
    }

    pub fn check_id(&self, id: PointId) -> Result<()> {
        if id.0 < self.len() {
            Ok(())
        } else {
            Err(Error::PointOutOfRange {
                id: id.0,
                len: self.len(),
            })
        }
    }

    pub fn image(&self, id: PointId) -> PointId {
        PointId(self.raw.map[id.0])
    }

    /// The raw map table `i -> f(i)`.
    pub fn map_table(&self) -> &[usize] {
        &self.raw.map
    }

    pub fn iterate(&self, id: PointId, k: usize) -> PointId {
        let mut x = id.0;
        for _ in 0..k {
            x = self.raw.map[x];
        }
        PointId(x)
    }

    pub fn squared_distance(&self, a: PointId, b: PointId) -> Result<ExactRational> {
        self.check_id(a)?;
        self.check_id(b)?;
        Ok(self.sq[a.0][b.0].clone())
    }

    /// Unchecked squared distance by raw index.
    pub fn sq(&self, a: usize, b: usize) -> &ExactRational {
        &self.sq[a][b]
    }

    /// Distinct squared distances in increasing order, including 0.
    pub fn distinct_squares(&self) -> &[ExactRational] {
        &self.distinct_sq
    }

    /// Number of distinct squared distances strictly below `t^2`; a pair is
    /// within `t` iff its rank is below this bound.
    pub fn rank_bound(&self, t: &Threshold) -> u32 {
        match t.square() {
            None => u32::MAX,
            Some(s) => self.distinct_sq.partition_point(|v| v < s) as u32,
        }
    }

    pub fn rank(&self, a: usize, b: usize) -> u32 {
        self.rank[a][b]
    }

    /// Row `i` holds `{j : d(i,j) < t}`.
    pub fn closeness(&self, t: &Threshold) -> Vec<PointSet> {
        let bound = self.rank_bound(t);
        let n = self.len();
        (0..n)
            .map(|i| PointSet::from_ids(n, (0..n).filter(|&j| self.rank[i][j] < bound)))
            .collect()
    }

    /// `{y : d(center, y) < radius}`.
    pub fn ball(&self, center: PointId, radius: &Threshold) -> Result<PointSet> {
        self.check_id(center)?;
        let bound = self.rank_bound(radius);
        let n = self.len();
        Ok(PointSet::from_ids(
            n,
            (0..n).filter(|&j| self.rank[center.0][j] < bound),
        ))
    }

    /// Maximum squared distance over all pairs.
    pub fn diameter_sq(&self) -> &ExactRational {
        self.distinct_sq.last().unwrap()
    }

    pub fn is_surjective(&self) -> bool {
        let mut hit = vec![false; self.len()];
        for &y in &self.raw.map {
            hit[y] = true;
        }
        hit.into_iter().all(|h| h)
    }

    pub fn is_injective(&self) -> bool {
        let mut hit = vec![false; self.len()];
        for &y in &self.raw.map {
            if std::mem::replace(&mut hit[y], true) {
                return false;
            }
        }
        true
    }

    /// Preimage list of every point.
    pub fn fibers(&self) -> Vec<Vec<usize>> {
        let mut fib = vec![Vec::new(); self.len()];
        for (x, &y) in self.raw.map.iter().enumerate() {
            fib[y].push(x);
        }
        fib
    }

    pub fn orbit_profile(&self, x: PointId) -> Result<OrbitProfile> {
        self.check_id(x)?;
        let mut first_seen = vec![usize::MAX; self.len()];
        let mut orbit = Vec::new();
        let mut cur = x.0;
        while first_seen[cur] == usize::MAX {
            first_seen[cur] = orbit.len();
            orbit.push(PointId(cur));
            cur = self.raw.map[cur];
        }
        let preperiod = first_seen[cur];
        let period = orbit.len() - preperiod;
        Ok(OrbitProfile {
            preperiod,
            period,
            orbit,
        })
    }
}

/// The rho-shape of a forward orbit: `orbit` lists the distinct points
/// `x, f(x), ...` and `f^(preperiod + period)(x) = f^preperiod(x)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OrbitProfile {
    pub preperiod: usize,
    pub period: usize,
    pub orbit: Vec<PointId>,
}

//! Realized-distance lattices and the monotone threshold sweep.
//!
//! Every property decided here compares distances against a threshold with
//! strict `<`, so its truth value can only change just above a realized
//! distance. For `t` in `(v_prev, v]` the admitted pairs are exactly those
//! with distance `<= v_prev`, hence evaluating at lattice values (plus the
//! unbounded threshold) determines the property everywhere.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::system::FiniteSystem;
use crate::threshold::Threshold;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum LatticeKind {
    /// Values of `d(f(x), y)` over all `x, y`.
    Edge,
    /// Values of `d(x, y)` over all `x != y`.
    Pair,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ValueLattice {
    pub kind: LatticeKind,
    pub values: Vec<Threshold>,
}

impl ValueLattice {
    fn from_squares(kind: LatticeKind, mut sq: Vec<crate::rational::ExactRational>) -> Self {
        sq.sort();
        sq.dedup();
        ValueLattice {
            kind,
            values: sq.into_iter().map(Threshold::from_square).collect(),
        }
    }

    /// Strictly positive lattice values in increasing order.
    pub fn positive(&self) -> impl DoubleEndedIterator<Item = &Threshold> {
        self.values.iter().filter(|t| t.is_positive())
    }

    pub fn contains(&self, t: &Threshold) -> bool {
        self.values.binary_search(t).is_ok()
    }

    /// Smallest positive value.
    pub fn min_positive(&self) -> Option<&Threshold> {
        self.positive().next()
    }

    /// The next evaluation point strictly above `t`: a lattice value, or
    /// `Unbounded` past the top.
    pub fn next_above(&self, t: &Threshold) -> Threshold {
        self.values
            .iter()
            .find(|v| *v > t)
            .cloned()
            .unwrap_or(Threshold::Unbounded)
    }
}

pub fn edge_lattice(sys: &FiniteSystem) -> ValueLattice {
    let n = sys.len();
    let mut sq = Vec::with_capacity(n * n);
    for x in 0..n {
        let fx = sys.map_table()[x];
        for y in 0..n {
            sq.push(sys.sq(fx, y).clone());
        }
    }
    ValueLattice::from_squares(LatticeKind::Edge, sq)
}

pub fn pair_lattice(sys: &FiniteSystem) -> ValueLattice {
    let n = sys.len();
    let mut sq = Vec::new();
    for x in 0..n {
        for y in (x + 1)..n {
            sq.push(sys.sq(x, y).clone());
        }
    }
    ValueLattice::from_squares(LatticeKind::Pair, sq)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SweepMode {
    /// Descend from the unbounded threshold and stop at the first success.
    EarlyExit,
    /// Evaluate everywhere and verify antitonicity.
    Exhaustive,
}

/// `sup { t : predicate(t) }` for a predicate antitone in `t`.
///
/// Returns `Unbounded` when the predicate holds at the unbounded threshold,
/// the largest positive lattice value where it holds otherwise, or 0 when
/// it fails at every positive value.
pub fn monotone_sweep<P>(lattice: &ValueLattice, mut predicate: P) -> Result<Threshold>
where
    P: FnMut(&Threshold) -> Result<bool>,
{
    sweep_with_mode(lattice, SweepMode::EarlyExit, &mut predicate)
}

pub fn sweep_with_mode<P>(lattice: &ValueLattice, mode: SweepMode, predicate: &mut P) -> Result<Threshold>
where
    P: FnMut(&Threshold) -> Result<bool>,
{
    let mut points: Vec<Threshold> = vec![Threshold::Unbounded];
    points.extend(lattice.positive().rev().cloned());
    let mut best: Option<Threshold> = None;
    for t in points {
        let ok = predicate(&t)?;
        match (ok, &best) {
            (true, None) => {
                best = Some(t);
                if mode == SweepMode::EarlyExit {
                    break;
                }
            }
            (false, Some(b)) => {
                return Err(Error::Internal(format!(
                    "non-monotone predicate: holds at {b} but fails at {t}"
                )))
            }
            _ => {}
        }
    }
    Ok(best.unwrap_or_else(Threshold::zero))
}

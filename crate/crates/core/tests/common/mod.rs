#![allow(dead_code)]

use shadowlab::{FiniteSystem, Threshold};

/// Brute-force forward shadowing: walks every `delta`-pseudo-orbit with up to
/// `len` nodes and tracks each candidate origin by iterating the map from
/// scratch. Returns the first pseudo-orbit left without a shadower.
pub fn naive_forward_failure(sys: &FiniteSystem, eps: &Threshold, delta: &Threshold, len: usize) -> Option<Vec<usize>> {
    let n = sys.len();
    let f = sys.map_table();
    let iterate = |z: usize, k: usize| (0..k).fold(z, |p, _| f[p]);
    fn walk(
        sys: &FiniteSystem,
        eps: &Threshold,
        delta: &Threshold,
        len: usize,
        path: &mut Vec<usize>,
        origins: &[usize],
        iterate: &dyn Fn(usize, usize) -> usize,
    ) -> Option<Vec<usize>> {
        let k = path.len() - 1;
        let x = path[k];
        let alive: Vec<usize> = origins
            .iter()
            .copied()
            .filter(|&z| eps.admits(sys.sq(iterate(z, k), x)))
            .collect();
        if alive.is_empty() {
            return Some(path.clone());
        }
        if path.len() == len {
            return None;
        }
        let fx = sys.map_table()[x];
        for y in 0..sys.len() {
            if delta.admits(sys.sq(fx, y)) {
                path.push(y);
                if let Some(w) = walk(sys, eps, delta, len, path, &alive, iterate) {
                    return Some(w);
                }
                path.pop();
            }
        }
        None
    }
    let origins: Vec<usize> = (0..n).collect();
    (0..n).find_map(|x| walk(sys, eps, delta, len, &mut vec![x], &origins, &iterate))
}

/// Direct check that `nodes` is a `delta`-pseudo-orbit.
pub fn is_pseudo_orbit(sys: &FiniteSystem, delta: &Threshold, nodes: &[usize]) -> bool {
    nodes
        .windows(2)
        .all(|w| delta.admits(sys.sq(sys.map_table()[w[0]], w[1])))
}

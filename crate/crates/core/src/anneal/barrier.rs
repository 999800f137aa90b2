//! Minimum energy barrier over single-flip paths.
//!
//! For a path `v_1..v_m` the barrier is the largest positive single-flip
//! energy increase along it. The search is a bottleneck Dijkstra over nodes
//! `(state, last flipped spin, path length)`, which respects the length bound
//! and the no-immediate-backtrack rule exactly. It is exhaustive, so it is
//! capped at [`MAX_BARRIER_VARS`] spins.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::error::{QamaError, Result};
use crate::ising::IsingProblem;
use crate::types::SpinState;

pub const MAX_BARRIER_VARS: usize = 12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BarrierReport {
    pub b_min: f64,
    /// Spins flipped in order, from `start` to `ground`.
    pub witness_path: Vec<usize>,
    /// Sum of the positive steps along the witness path.
    pub b_u: f64,
    pub flips: usize,
}

#[derive(Clone, Copy)]
struct Entry {
    barrier: f64,
    depth: usize,
    node: usize,
}

impl PartialEq for Entry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Entry {}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Entry {
    // reversed: BinaryHeap is a max-heap
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .barrier
            .total_cmp(&self.barrier)
            .then(other.depth.cmp(&self.depth))
            .then(other.node.cmp(&self.node))
    }
}

fn encode(spins: &[i8]) -> usize {
    spins
        .iter()
        .enumerate()
        .filter(|(_, &s)| s > 0)
        .fold(0, |acc, (p, _)| acc | 1 << p)
}

/// Minimum over single-flip paths from `start` to `ground` (length at most
/// `max_len`, default `2n`) of the largest positive step.
pub fn min_barrier(
    problem: &IsingProblem,
    start: &SpinState,
    ground: &SpinState,
    max_len: Option<usize>,
) -> Result<BarrierReport> {
    let n = problem.n();
    if n > MAX_BARRIER_VARS {
        return Err(QamaError::Capacity {
            n,
            cap: MAX_BARRIER_VARS,
        });
    }
    if start.len() != n || ground.len() != n {
        return Err(QamaError::Shape(format!(
            "start has {} and ground has {} spins for {} variables",
            start.len(),
            ground.len(),
            n
        )));
    }
    let max_len = max_len.unwrap_or(2 * n);
    let states = 1usize << n;
    let energies: Vec<f64> = (0..states)
        .map(|code| {
            let spins: Vec<i8> = (0..n)
                .map(|p| if code >> p & 1 == 1 { 1 } else { -1 })
                .collect();
            problem.energy_raw(&spins)
        })
        .collect();

    // node = (state * (n + 1) + last) * (max_len + 1) + depth; last == n means none
    let lasts = n + 1;
    let depths = max_len + 1;
    let node_of = |state: usize, last: usize, depth: usize| (state * lasts + last) * depths + depth;
    let total = states * lasts * depths;
    let mut best = vec![f64::INFINITY; total];
    let mut pred = vec![usize::MAX; total];
    let mut done = vec![false; total];

    let source = node_of(encode(start.spins()), n, 0);
    let target = encode(ground.spins());
    best[source] = 0.0;
    let mut heap = BinaryHeap::new();
    heap.push(Entry {
        barrier: 0.0,
        depth: 0,
        node: source,
    });

    while let Some(Entry {
        barrier,
        depth,
        node,
    }) = heap.pop()
    {
        if done[node] {
            continue;
        }
        done[node] = true;
        let state = node / depths / lasts;
        let last = node / depths % lasts;
        if state == target {
            return Ok(report(node, barrier, &pred, &energies, n, depths, lasts));
        }
        if depth == max_len {
            continue;
        }
        for k in (0..n).filter(|&k| k != last) {
            let next_state = state ^ (1 << k);
            let step = energies[next_state] - energies[state];
            let next_barrier = barrier.max(step.max(0.0));
            let next = node_of(next_state, k, depth + 1);
            if !done[next] && next_barrier < best[next] {
                best[next] = next_barrier;
                pred[next] = node;
                heap.push(Entry {
                    barrier: next_barrier,
                    depth: depth + 1,
                    node: next,
                });
            }
        }
    }
    Err(QamaError::Unreachable { max_len })
}

fn report(
    end: usize,
    b_min: f64,
    pred: &[usize],
    energies: &[f64],
    n: usize,
    depths: usize,
    lasts: usize,
) -> BarrierReport {
    let mut path = Vec::new();
    let mut node = end;
    while pred[node] != usize::MAX {
        let last = node / depths % lasts;
        debug_assert!(last < n);
        path.push(last);
        node = pred[node];
    }
    path.reverse();

    let mut state = node / depths / lasts;
    let mut b_u = 0.0;
    for &k in &path {
        let next = state ^ (1 << k);
        b_u += (energies[next] - energies[state]).max(0.0);
        state = next;
    }
    BarrierReport {
        b_min,
        flips: path.len(),
        witness_path: path,
        b_u,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spins(v: &[i8]) -> SpinState {
        SpinState::from_spins(v.to_vec()).unwrap()
    }

    #[test]
    fn start_equals_ground() {
        let p = IsingProblem::new(2, [((0, 1), 1.0)], vec![0.0; 2], 0.0).unwrap();
        let r = min_barrier(&p, &spins(&[1, 1]), &spins(&[1, 1]), None).unwrap();
        assert_eq!(r.b_min, 0.0);
        assert!(r.witness_path.is_empty());
        assert_eq!(r.flips, 0);
    }

    #[test]
    fn downhill_single_flip() {
        let p = IsingProblem::new(1, [], vec![1.0], 0.0).unwrap();
        let r = min_barrier(&p, &spins(&[-1]), &spins(&[1]), None).unwrap();
        assert_eq!(r.b_min, 0.0);
        assert_eq!(r.witness_path, vec![0]);
    }

    #[test]
    fn double_well_barrier() {
        let p = IsingProblem::new(2, [((0, 1), 1.0)], vec![0.0; 2], 0.0).unwrap();
        let r = min_barrier(&p, &spins(&[-1, -1]), &spins(&[1, 1]), None).unwrap();
        assert_eq!(r.b_min, 2.0);
        assert_eq!(r.b_u, 2.0);
        assert_eq!(r.flips, 2);
    }

    #[test]
    fn length_bound_can_make_target_unreachable() {
        let p = IsingProblem::new(3, [], vec![0.0; 3], 0.0).unwrap();
        let err = min_barrier(&p, &spins(&[-1, -1, -1]), &spins(&[1, 1, 1]), Some(2)).unwrap_err();
        assert_eq!(err, QamaError::Unreachable { max_len: 2 });
    }

    #[test]
    fn capacity_enforced() {
        let p = IsingProblem::new(13, [], vec![0.0; 13], 0.0).unwrap();
        let s = spins(&[1; 13]);
        assert!(matches!(
            min_barrier(&p, &s, &s, None),
            Err(QamaError::Capacity { .. })
        ));
    }
}

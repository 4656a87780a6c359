//! Dijkstra over an 8-connected weighted grid.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct CostGrid {
    pub rows: usize,
    pub cols: usize,
    /// Row-major positive weights.
    pub weights: Vec<f64>,
}

impl CostGrid {
    pub fn weight(&self, (r, c): (usize, usize)) -> f64 {
        self.weights[r * self.cols + c]
    }

    /// 8-connected neighbors with their step factor (1 or sqrt 2).
    pub fn neighbors(&self, (r, c): (usize, usize)) -> impl Iterator<Item = ((usize, usize), f64)> + '_ {
        const STEPS: [(isize, isize); 8] = [(-1, -1), (-1, 0), (-1, 1), (0, -1), (0, 1), (1, -1), (1, 0), (1, 1)];
        STEPS.iter().filter_map(move |&(dr, dc)| {
            let nr = r as isize + dr;
            let nc = c as isize + dc;
            if nr < 0 || nc < 0 || nr >= self.rows as isize || nc >= self.cols as isize {
                return None;
            }
            let f = if dr != 0 && dc != 0 { std::f64::consts::SQRT_2 } else { 1.0 };
            Some(((nr as usize, nc as usize), f))
        })
    }

    /// Cost of stepping into `to`.
    pub fn edge_cost(&self, to: (usize, usize), factor: f64) -> f64 {
        self.weight(to) * factor
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Path {
    pub cells: Vec<(usize, usize)>,
    pub cost: f64,
}

#[derive(PartialEq)]
struct Entry {
    dist: f64,
    cell: (usize, usize),
}

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        // min-heap on distance, then on cell
        other
            .dist
            .total_cmp(&self.dist)
            .then_with(|| other.cell.cmp(&self.cell))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Minimum-cost path from `src` to `dst`. Among equal-cost predecessors the
/// lexicographically smallest `(row, col)` wins. `Ok(None)` when `dst`
/// cannot be reached (only possible with non-finite weights).
pub fn plan(cost: &CostGrid, src: (usize, usize), dst: (usize, usize)) -> Result<Option<Path>> {
    let n = cost.rows * cost.cols;
    if cost.weights.len() != n {
        return Err(Error::ShapeMismatch("cost grid size".into()));
    }
    for (r, c) in [src, dst] {
        if r >= cost.rows || c >= cost.cols {
            return Err(Error::InvalidArgument(format!("cell ({r}, {c}) outside the grid")));
        }
    }
    if cost.weights.iter().any(|w| !(*w > 0.0)) {
        return Err(Error::InvalidArgument("cost weights must be positive".into()));
    }
    let idx = |(r, c): (usize, usize)| r * cost.cols + c;
    let mut dist = vec![f64::INFINITY; n];
    let mut pred: Vec<Option<(usize, usize)>> = vec![None; n];
    let mut done = vec![false; n];
    let mut heap = BinaryHeap::new();
    dist[idx(src)] = 0.0;
    heap.push(Entry { dist: 0.0, cell: src });
    while let Some(Entry { dist: d, cell }) = heap.pop() {
        let i = idx(cell);
        if done[i] {
            continue;
        }
        done[i] = true;
        if cell == dst {
            break;
        }
        for (nb, f) in cost.neighbors(cell) {
            let j = idx(nb);
            if done[j] {
                continue;
            }
            let nd = d + cost.edge_cost(nb, f);
            let better = nd < dist[j] || (nd == dist[j] && pred[j].is_some_and(|p| cell < p));
            if better {
                dist[j] = nd;
                pred[j] = Some(cell);
                heap.push(Entry { dist: nd, cell: nb });
            }
        }
    }
    if !dist[idx(dst)].is_finite() {
        return Ok(None);
    }
    let mut cells = vec![dst];
    let mut cur = dst;
    while cur != src {
        cur = pred[idx(cur)].expect("reached cells have predecessors");
        cells.push(cur);
    }
    cells.reverse();
    Ok(Some(Path { cells, cost: dist[idx(dst)] }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn straight_corridor() {
        let g = CostGrid { rows: 1, cols: 6, weights: vec![3.0; 6] };
        let p = plan(&g, (0, 0), (0, 5)).unwrap().unwrap();
        assert_eq!(p.cells.len(), 6);
        assert_eq!(p.cost, 15.0);
    }

    #[test]
    fn src_equals_dst() {
        let g = CostGrid { rows: 2, cols: 2, weights: vec![1.0; 4] };
        let p = plan(&g, (1, 1), (1, 1)).unwrap().unwrap();
        assert_eq!(p.cells, vec![(1, 1)]);
        assert_eq!(p.cost, 0.0);
    }

    #[test]
    fn bad_inputs() {
        let g = CostGrid { rows: 2, cols: 2, weights: vec![1.0, 0.0, 1.0, 1.0] };
        assert!(plan(&g, (0, 0), (1, 1)).is_err());
        let g = CostGrid { rows: 2, cols: 2, weights: vec![1.0; 4] };
        assert!(plan(&g, (0, 0), (2, 1)).is_err());
    }
}

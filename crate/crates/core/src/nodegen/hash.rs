//! Uniform-cell spatial hash for proximity tests during generation.

use std::collections::HashMap;

use crate::geometry::{dist, Point};

pub(crate) struct SpatialHash {
    cell: f64,
    dim: usize,
    cells: HashMap<[i64; 3], Vec<usize>>,
    points: Vec<Point>,
}

impl SpatialHash {
    pub(crate) fn new(cell: f64, dim: usize) -> Self {
        Self { cell, dim, cells: HashMap::new(), points: Vec::new() }
    }

    fn key(&self, p: Point) -> [i64; 3] {
        let mut k = [0i64; 3];
        for (a, x) in k.iter_mut().zip(p).take(self.dim) {
            *a = (x / self.cell).floor() as i64;
        }
        k
    }

    pub(crate) fn insert(&mut self, p: Point) -> usize {
        let i = self.points.len();
        self.points.push(p);
        let k = self.key(p);
        self.cells.entry(k).or_default().push(i);
        i
    }

    /// Whether some stored point lies strictly closer than `r` to `p`.
    pub(crate) fn any_within(&self, p: Point, r: f64) -> bool {
        let reach = (r / self.cell).ceil() as i64;
        let c = self.key(p);
        let span = |k: usize| if k < self.dim { -reach..=reach } else { 0..=0 };
        for dx in span(0) {
            for dy in span(1) {
                for dz in span(2) {
                    if let Some(ids) = self.cells.get(&[c[0] + dx, c[1] + dy, c[2] + dz]) {
                        if ids.iter().any(|&i| dist(self.points[i], p) < r) {
                            return true;
                        }
                    }
                }
            }
        }
        false
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn proximity_across_cells() {
        let mut h = SpatialHash::new(0.1, 2);
        h.insert([0.099, 0.0, 0.0]);
        assert!(h.any_within([0.101, 0.0, 0.0], 0.01));
        assert!(!h.any_within([0.3, 0.0, 0.0], 0.1));
        assert!(h.any_within([-0.05, 0.0, 0.0], 0.15));
    }
}

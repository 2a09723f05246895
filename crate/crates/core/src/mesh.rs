//! Uniform Cartesian meshes in one or two dimensions and upwind sweep orderings.

use crate::error::{Error, Result};
use crate::quadrature::AngularQuadrature;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::sync::Arc;

/// Axis-aligned box `[lower, upper]`; the second axis is ignored in 1D.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AxisBox {
    pub lower: [f64; 2],
    pub upper: [f64; 2],
}

impl AxisBox {
    pub fn new(lower: [f64; 2], upper: [f64; 2]) -> Self {
        Self { lower, upper }
    }

    pub fn interval(a: f64, b: f64) -> Self {
        Self {
            lower: [a, 0.0],
            upper: [b, 1.0],
        }
    }

    pub fn contains(&self, x: [f64; 2], dim: usize) -> bool {
        (0..dim).all(|a| x[a] >= self.lower[a] && x[a] <= self.upper[a])
    }
}

/// Uniform Cartesian partition. Elements are numbered `i + nx * j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpatialMesh {
    dim: usize,
    lower: [f64; 2],
    upper: [f64; 2],
    cells: [usize; 2],
}

impl SpatialMesh {
    pub fn interval(a: f64, b: f64, nx: usize) -> Result<Self> {
        Self::new(1, [a, 0.0], [b, 1.0], [nx, 1])
    }

    pub fn rectangle(lower: [f64; 2], upper: [f64; 2], nx: usize, ny: usize) -> Result<Self> {
        Self::new(2, lower, upper, [nx, ny])
    }

    fn new(dim: usize, lower: [f64; 2], upper: [f64; 2], cells: [usize; 2]) -> Result<Self> {
        for a in 0..dim {
            if cells[a] == 0 {
                return Err(Error::InvalidMesh(format!("axis {a} has no elements")));
            }
            if !(upper[a] > lower[a]) || !lower[a].is_finite() || !upper[a].is_finite() {
                return Err(Error::InvalidMesh(format!(
                    "axis {a} bounds [{}, {}] are not a positive interval",
                    lower[a], upper[a]
                )));
            }
        }
        Ok(Self {
            dim,
            lower,
            upper,
            cells,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn lower(&self) -> [f64; 2] {
        self.lower
    }

    pub fn upper(&self) -> [f64; 2] {
        self.upper
    }

    pub fn cells(&self) -> [usize; 2] {
        self.cells
    }

    pub fn n_elements(&self) -> usize {
        self.cells[0] * self.cells[1]
    }

    /// Element width along `axis`; 1 on the unused second axis in 1D.
    pub fn h(&self, axis: usize) -> f64 {
        (self.upper[axis] - self.lower[axis]) / self.cells[axis] as f64
    }

    /// Element measure (length in 1D, area in 2D).
    pub fn element_measure(&self) -> f64 {
        if self.dim == 1 {
            self.h(0)
        } else {
            self.h(0) * self.h(1)
        }
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        i + self.cells[0] * j
    }

    pub fn ij(&self, e: usize) -> (usize, usize) {
        (e % self.cells[0], e / self.cells[0])
    }

    pub fn element_box(&self, e: usize) -> AxisBox {
        let (i, j) = self.ij(e);
        let idx = [i, j];
        let mut lo = [0.0; 2];
        let mut hi = [0.0; 2];
        for a in 0..2 {
            lo[a] = self.lower[a] + idx[a] as f64 * self.h(a);
            hi[a] = if idx[a] + 1 == self.cells[a] {
                self.upper[a]
            } else {
                self.lower[a] + (idx[a] + 1) as f64 * self.h(a)
            };
        }
        AxisBox::new(lo, hi)
    }

    pub fn element_center(&self, e: usize) -> [f64; 2] {
        let b = self.element_box(e);
        [
            0.5 * (b.lower[0] + b.upper[0]),
            0.5 * (b.lower[1] + b.upper[1]),
        ]
    }

    /// Neighbor across the face of `e` on `axis`, on the low (`forward = false`) or
    /// high side.
    pub fn neighbor(&self, e: usize, axis: usize, forward: bool) -> Option<usize> {
        let (i, j) = self.ij(e);
        let mut idx = [i, j];
        if forward {
            if idx[axis] + 1 >= self.cells[axis] {
                return None;
            }
            idx[axis] += 1;
        } else {
            if idx[axis] == 0 {
                return None;
            }
            idx[axis] -= 1;
        }
        Some(self.index(idx[0], idx[1]))
    }

    /// Element containing `x`; points on interior faces go to the higher element.
    pub fn locate(&self, x: [f64; 2]) -> Option<usize> {
        let mut idx = [0usize; 2];
        for a in 0..self.dim {
            if !(x[a] >= self.lower[a] && x[a] <= self.upper[a]) {
                return None;
            }
            let t = ((x[a] - self.lower[a]) / self.h(a)).floor() as usize;
            idx[a] = t.min(self.cells[a] - 1);
        }
        Some(self.index(idx[0], idx[1]))
    }

    /// Neighbor on the upwind side along `axis` for a direction whose component on
    /// that axis has the given sign (zero counts as positive).
    pub fn upwind_neighbor(&self, e: usize, axis: usize, positive: bool) -> Option<usize> {
        self.neighbor(e, axis, !positive)
    }
}

/// Element visiting order for one direction.
#[derive(Debug, Clone)]
pub struct SweepOrdering {
    pub direction: usize,
    pub positive: [bool; 2],
    pub order: Arc<[usize]>,
}

fn component_positive(v: f64) -> bool {
    v >= 0.0
}

/// One ordering per direction; directions in the same octant share storage.
pub fn build_sweep_orderings(mesh: &SpatialMesh, quad: &AngularQuadrature) -> Vec<SweepOrdering> {
    let mut cache: HashMap<[bool; 2], Arc<[usize]>> = HashMap::new();
    let [nx, ny] = mesh.cells();
    (0..quad.len())
        .map(|j| {
            let v = quad.node(j);
            let positive = [
                component_positive(v[0]),
                mesh.dim() < 2 || component_positive(v[1]),
            ];
            let order = cache
                .entry(positive)
                .or_insert_with(|| {
                    let mut ord = Vec::with_capacity(nx * ny);
                    for jj in 0..ny {
                        let y = if positive[1] { jj } else { ny - 1 - jj };
                        for ii in 0..nx {
                            let x = if positive[0] { ii } else { nx - 1 - ii };
                            ord.push(mesh.index(x, y));
                        }
                    }
                    ord.into()
                })
                .clone();
            SweepOrdering {
                direction: j,
                positive,
                order,
            }
        })
        .collect()
}

/// True when every upwind neighbor of every element is visited before it.
pub fn is_valid_sweep(mesh: &SpatialMesh, positive: [bool; 2], order: &[usize]) -> bool {
    let n = mesh.n_elements();
    if order.len() != n {
        return false;
    }
    let mut position = vec![usize::MAX; n];
    for (p, &e) in order.iter().enumerate() {
        if e >= n || position[e] != usize::MAX {
            return false;
        }
        position[e] = p;
    }
    (0..n).all(|e| {
        (0..mesh.dim()).all(|a| match mesh.upwind_neighbor(e, a, positive[a]) {
            Some(u) => position[u] < position[e],
            None => true,
        })
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::{chebyshev_legendre_sphere, gauss_legendre_slab};

    #[test]
    fn locate_points() {
        let m = SpatialMesh::rectangle([0.0, 0.0], [2.0, 1.0], 4, 2).unwrap();
        assert_eq!(m.locate([0.1, 0.1]), Some(0));
        assert_eq!(m.locate([1.9, 0.9]), Some(7));
        assert_eq!(m.locate([2.0, 1.0]), Some(7));
        assert_eq!(m.locate([0.5, 0.5]), Some(5));
        assert_eq!(m.locate([2.1, 0.5]), None);
    }

    #[test]
    fn slab_orders() {
        let mesh = SpatialMesh::interval(0.0, 1.0, 5).unwrap();
        let q = gauss_legendre_slab(2).unwrap();
        let o = build_sweep_orderings(&mesh, &q);
        assert_eq!(&*o[1].order, &[0, 1, 2, 3, 4]);
        assert_eq!(&*o[0].order, &[4, 3, 2, 1, 0]);
    }

    /// Brute-force check: an ordering is valid iff it is a topological order of the
    /// graph with edges from each element to its downwind neighbors.
    fn brute_force_valid(nx: usize, ny: usize, sx: i64, sy: i64, order: &[usize]) -> bool {
        let pos: HashMap<usize, usize> = order.iter().enumerate().map(|(p, &e)| (e, p)).collect();
        for j in 0..ny as i64 {
            for i in 0..nx as i64 {
                let e = (i + nx as i64 * j) as usize;
                for (di, dj) in [(-sx, 0), (0, -sy)] {
                    let (ui, uj) = (i + di, j + dj);
                    if ui >= 0 && uj >= 0 && ui < nx as i64 && uj < ny as i64 {
                        let u = (ui + nx as i64 * uj) as usize;
                        if pos[&u] > pos[&e] {
                            return false;
                        }
                    }
                }
            }
        }
        true
    }

    #[test]
    fn two_d_orderings_valid() {
        let mesh = SpatialMesh::rectangle([0.0, 0.0], [1.0, 1.0], 3, 3).unwrap();
        let q = chebyshev_legendre_sphere(8, 2).unwrap();
        for o in build_sweep_orderings(&mesh, &q) {
            let v = q.node(o.direction);
            let sx = if v[0] >= 0.0 { 1 } else { -1 };
            let sy = if v[1] >= 0.0 { 1 } else { -1 };
            assert!(brute_force_valid(3, 3, sx, sy, &o.order));
            assert!(is_valid_sweep(&mesh, o.positive, &o.order));
        }
    }

    #[test]
    fn invalid_order_detected() {
        let mesh = SpatialMesh::rectangle([0.0, 0.0], [1.0, 1.0], 3, 3).unwrap();
        let mut order: Vec<usize> = (0..9).collect();
        order.swap(0, 1);
        assert!(!is_valid_sweep(&mesh, [true, true], &order));
    }

    #[test]
    fn element_geometry() {
        let mesh = SpatialMesh::rectangle([-1.0, -1.0], [1.0, 1.0], 4, 2).unwrap();
        assert_eq!(mesh.n_elements(), 8);
        let b = mesh.element_box(mesh.index(3, 1));
        assert_eq!(b.upper, [1.0, 1.0]);
        assert!((b.lower[0] - 0.5).abs() < 1e-15);
        assert!((mesh.element_measure() - 0.5).abs() < 1e-15);
        assert!(SpatialMesh::interval(1.0, 0.0, 3).is_err());
        assert!(SpatialMesh::interval(0.0, 1.0, 0).is_err());
    }
}

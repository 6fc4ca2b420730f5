use std::ops::{Index, IndexMut};

use serde::{Deserialize, Serialize};

use super::spec::{BoxBounds, DomainSpec};
use super::DomainError;
use crate::qalgebra::{inner, CQuaternion, Quaternion};

const EXTERIOR: usize = usize::MAX;

/// Uniform tensor grid over a box with an interior mask.
///
/// `n[k]` counts nodes along axis `k`, including the boundary layer, so
/// `h[k] = L[k] / (n[k] - 1)`. Nodes on the box faces are always exterior.
/// A periodic grid has `h[k] = L[k] / n[k]`, no boundary layer, and wraps
/// stencil taps.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Grid {
    n: [usize; 3],
    h: [f64; 3],
    origin: [f64; 3],
    periodic: bool,
    mask: Vec<bool>,
    interior: Vec<usize>,
    slot: Vec<usize>,
}

impl Grid {
    /// Builds the grid for `domain` with `n` nodes per axis.
    pub fn build(domain: &DomainSpec, n: [usize; 3]) -> Result<Self, DomainError> {
        domain.validate()?;
        if n.iter().any(|&k| k < 3) {
            return Err(DomainError::Resolution(n));
        }
        let b = domain.bounds;
        let h = std::array::from_fn(|k| b.lengths[k] / (n[k] - 1) as f64);
        let mut g = Self::empty(n, h, b.origin, false);
        for node in 0..g.len_nodes() {
            let [i, j, k] = g.ijk(node);
            let on_face = [i, j, k]
                .iter()
                .zip(n.iter())
                .any(|(&idx, &nk)| idx == 0 || idx == nk - 1);
            g.mask[node] = !on_face && domain.contains(g.position(node));
        }
        g.finish()
    }

    /// Fully periodic box, every node interior.
    pub fn periodic(bounds: BoxBounds, n: [usize; 3]) -> Result<Self, DomainError> {
        DomainSpec::boxed(bounds).validate()?;
        if n.iter().any(|&k| k < 3) {
            return Err(DomainError::Resolution(n));
        }
        let h = std::array::from_fn(|k| bounds.lengths[k] / n[k] as f64);
        let mut g = Self::empty(n, h, bounds.origin, true);
        g.mask.iter_mut().for_each(|m| *m = true);
        g.finish()
    }

    fn empty(n: [usize; 3], h: [f64; 3], origin: [f64; 3], periodic: bool) -> Self {
        let total = n[0] * n[1] * n[2];
        Self {
            n,
            h,
            origin,
            periodic,
            mask: vec![false; total],
            interior: Vec::new(),
            slot: vec![EXTERIOR; total],
        }
    }

    fn finish(mut self) -> Result<Self, DomainError> {
        for node in 0..self.mask.len() {
            if self.mask[node] {
                self.slot[node] = self.interior.len();
                self.interior.push(node);
            }
        }
        if self.interior.is_empty() {
            return Err(DomainError::DegenerateGrid);
        }
        Ok(self)
    }

    #[inline]
    pub fn n(&self) -> [usize; 3] {
        self.n
    }

    #[inline]
    pub fn h(&self) -> [f64; 3] {
        self.h
    }

    #[inline]
    pub fn origin(&self) -> [f64; 3] {
        self.origin
    }

    #[inline]
    pub fn is_periodic(&self) -> bool {
        self.periodic
    }

    /// Volume element `h1 h2 h3`.
    #[inline]
    pub fn cell_volume(&self) -> f64 {
        self.h[0] * self.h[1] * self.h[2]
    }

    pub fn h_max(&self) -> f64 {
        self.h.iter().copied().fold(0.0, f64::max)
    }

    #[inline]
    pub fn len_nodes(&self) -> usize {
        self.mask.len()
    }

    /// Number of interior nodes `N`.
    #[inline]
    pub fn len(&self) -> usize {
        self.interior.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.interior.is_empty()
    }

    #[inline]
    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    /// Node index of each interior slot.
    #[inline]
    pub fn interior(&self) -> &[usize] {
        &self.interior
    }

    /// Interior slot of a node, `None` if exterior.
    #[inline]
    pub fn slot(&self, node: usize) -> Option<usize> {
        let s = self.slot[node];
        (s != EXTERIOR).then_some(s)
    }

    #[inline]
    pub fn node(&self, ijk: [usize; 3]) -> usize {
        ijk[0] + self.n[0] * (ijk[1] + self.n[1] * ijk[2])
    }

    #[inline]
    pub fn ijk(&self, node: usize) -> [usize; 3] {
        let i = node % self.n[0];
        let r = node / self.n[0];
        [i, r % self.n[1], r / self.n[1]]
    }

    pub fn position(&self, node: usize) -> [f64; 3] {
        let idx = self.ijk(node);
        std::array::from_fn(|k| self.origin[k] + idx[k] as f64 * self.h[k])
    }

    pub fn slot_position(&self, slot: usize) -> [f64; 3] {
        self.position(self.interior[slot])
    }

    /// The node `offset` steps from `node` along `axis`, if it is on the grid.
    #[inline]
    pub fn shift(&self, node: usize, axis: usize, offset: isize) -> Option<usize> {
        let mut idx = self.ijk(node);
        let nk = self.n[axis] as isize;
        let moved = idx[axis] as isize + offset;
        let moved = if self.periodic {
            moved.rem_euclid(nk)
        } else if (0..nk).contains(&moved) {
            moved
        } else {
            return None;
        };
        idx[axis] = moved as usize;
        Some(self.node(idx))
    }

    /// Interior slot reached from interior `slot` by `offset` along `axis`.
    #[inline]
    pub fn neighbor(&self, slot: usize, axis: usize, offset: isize) -> Option<usize> {
        self.shift(self.interior[slot], axis, offset)
            .and_then(|n| self.slot(n))
    }
}

/// A grid function stored on interior slots; exterior values are zero by
/// construction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridFunction {
    data: Vec<CQuaternion>,
}

impl GridFunction {
    pub fn zeros(n: usize) -> Self {
        Self {
            data: vec![CQuaternion::ZERO; n],
        }
    }

    pub fn from_vec(data: Vec<CQuaternion>) -> Self {
        Self { data }
    }

    /// Samples `f` at every interior node.
    pub fn from_fn(grid: &Grid, f: impl Fn([f64; 3]) -> CQuaternion) -> Self {
        Self {
            data: (0..grid.len()).map(|s| f(grid.slot_position(s))).collect(),
        }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.data.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn as_slice(&self) -> &[CQuaternion] {
        &self.data
    }

    #[inline]
    pub fn as_mut_slice(&mut self) -> &mut [CQuaternion] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<CQuaternion> {
        self.data
    }

    /// Value at any grid node, zero outside the interior.
    pub fn at_node(&self, grid: &Grid, node: usize) -> CQuaternion {
        grid.slot(node).map_or(CQuaternion::ZERO, |s| self.data[s])
    }

    /// Values on every node of the grid (exterior zero).
    pub fn to_nodes(&self, grid: &Grid) -> Vec<CQuaternion> {
        (0..grid.len_nodes())
            .map(|n| self.at_node(grid, n))
            .collect()
    }

    /// Pointwise right multiplication `u(x) q`.
    pub fn right_mul(&self, q: Quaternion) -> Self {
        Self {
            data: self.data.iter().map(|u| u.right_mul(q)).collect(),
        }
    }

    pub fn scale(&self, a: f64) -> Self {
        Self {
            data: self.data.iter().map(|u| u.scale(a)).collect(),
        }
    }

    /// Euclidean norm of the `8N` real components.
    pub fn norm(&self) -> f64 {
        crate::vecops::norm(&self.data)
    }

    /// Discrete `L^2` inner product `sum <u, v> h1 h2 h3`.
    pub fn l2_inner(&self, other: &Self, grid: &Grid) -> Quaternion {
        let sum = self
            .data
            .iter()
            .zip(&other.data)
            .fold(Quaternion::ZERO, |acc, (a, b)| acc + inner(*a, *b));
        sum.scale(grid.cell_volume())
    }

    pub fn l2_norm(&self, grid: &Grid) -> f64 {
        self.norm() * grid.cell_volume().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|u| u.is_finite())
    }
}

impl Index<usize> for GridFunction {
    type Output = CQuaternion;
    fn index(&self, i: usize) -> &CQuaternion {
        &self.data[i]
    }
}

impl IndexMut<usize> for GridFunction {
    fn index_mut(&mut self, i: usize) -> &mut CQuaternion {
        &mut self.data[i]
    }
}

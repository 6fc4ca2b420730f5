//! Block-sparse right-linear operators on grid functions.
//!
//! Every block of `T`, `T^2` and `Q_s(T)` is left multiplication by a single
//! element of `C (x) H`, so blocks are stored as one [`CQuaternion`] each;
//! the 8x8 real block is materialized on demand by
//! [`QOperator::block_matrix`]. Left multiplications commute with pointwise
//! right multiplication by quaternions, which is what makes every assembled
//! operator right-linear.

mod assemble;

use std::io::{self, Write};

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use assemble::{assemble_qs, assemble_t, fd_derivative, scalar_surrogate};

use crate::domain::GridFunction;
use crate::qalgebra::{cqmul, CQuaternion, Quaternion};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OperatorError {
    #[error("grid axis {axis} has {nodes} nodes, stencil needs at least {needed}")]
    GridTooSmall {
        axis: usize,
        nodes: usize,
        needed: usize,
    },
    #[error("operator has dimension {expected}, input has {got}")]
    Shape { expected: usize, got: usize },
    #[error("expected an operator labelled {expected:?}, got {got:?}")]
    Label {
        expected: OperatorLabel,
        got: OperatorLabel,
    },
    #[error("coefficient field has derivatives to order {have}, operator order {need} requested")]
    Order { have: usize, need: usize },
    #[error("operator order must be at least 1")]
    ZeroOrder,
    #[error(transparent)]
    Stencil(#[from] crate::stencil::StencilError),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OperatorLabel {
    T,
    Qs,
    Identity,
    Other,
}

/// Compressed-row block matrix over the interior slots of a grid.
#[derive(Clone, Debug, PartialEq)]
pub struct QOperator {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<CQuaternion>,
    label: OperatorLabel,
    order: usize,
    shift: Option<Quaternion>,
}

impl QOperator {
    /// Builds from per-row `(col, value)` lists; duplicate columns are summed.
    pub fn from_rows(
        n: usize,
        rows: Vec<Vec<(usize, CQuaternion)>>,
        label: OperatorLabel,
        order: usize,
    ) -> Self {
        assert_eq!(rows.len(), n);
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for mut row in rows {
            row.sort_by_key(|e| e.0);
            let mut last: Option<usize> = None;
            for (c, v) in row {
                assert!(c < n, "column {c} out of range");
                if last == Some(c) {
                    *vals.last_mut().expect("nonempty") += v;
                } else {
                    cols.push(c);
                    vals.push(v);
                    last = Some(c);
                }
            }
            row_ptr.push(cols.len());
        }
        Self {
            n,
            row_ptr,
            cols,
            vals,
            label,
            order,
            shift: None,
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::scaled_identity(n, CQuaternion::ONE, OperatorLabel::Identity)
    }

    pub fn scaled_identity(n: usize, c: CQuaternion, label: OperatorLabel) -> Self {
        Self {
            n,
            row_ptr: (0..=n).collect(),
            cols: (0..n).collect(),
            vals: vec![c; n],
            label,
            order: 0,
            shift: None,
        }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn nnz_blocks(&self) -> usize {
        self.vals.len()
    }

    #[inline]
    pub fn label(&self) -> OperatorLabel {
        self.label
    }

    #[inline]
    pub fn order(&self) -> usize {
        self.order
    }

    /// The quaternion `s` a `Qs` operator was built for.
    pub fn shift(&self) -> Option<Quaternion> {
        self.shift
    }

    pub(crate) fn with_meta(
        mut self,
        label: OperatorLabel,
        order: usize,
        shift: Option<Quaternion>,
    ) -> Self {
        self.label = label;
        self.order = order;
        self.shift = shift;
        self
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, CQuaternion)> + '_ {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        self.cols[span.clone()]
            .iter()
            .copied()
            .zip(self.vals[span].iter().copied())
    }

    pub fn block(&self, r: usize, c: usize) -> Option<CQuaternion> {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        self.cols[span.clone()]
            .binary_search(&c)
            .ok()
            .map(|k| self.vals[span.start + k])
    }

    /// The 8x8 real block at `(r, c)`; zero if absent.
    pub fn block_matrix(&self, r: usize, c: usize) -> [[f64; 8]; 8] {
        self.block(r, c).map_or([[0.0; 8]; 8], |v| v.left_matrix())
    }

    /// `y = A x` on raw slices.
    pub fn apply_into(&self, x: &[CQuaternion], y: &mut [CQuaternion]) {
        assert_eq!(x.len(), self.n);
        assert_eq!(y.len(), self.n);
        let body = |(r, yr): (usize, &mut CQuaternion)| {
            let mut acc = CQuaternion::ZERO;
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += cqmul(self.vals[k], x[self.cols[k]]);
            }
            *yr = acc;
        };
        if self.n >= 4096 {
            y.par_iter_mut().enumerate().for_each(body);
        } else {
            y.iter_mut().enumerate().for_each(body);
        }
    }

    pub fn apply_slice(&self, x: &[CQuaternion]) -> Vec<CQuaternion> {
        let mut y = vec![CQuaternion::ZERO; self.n];
        self.apply_into(x, &mut y);
        y
    }

    pub fn apply(&self, u: &GridFunction) -> Result<GridFunction, OperatorError> {
        if u.len() != self.n {
            return Err(OperatorError::Shape {
                expected: self.n,
                got: u.len(),
            });
        }
        Ok(GridFunction::from_vec(self.apply_slice(u.as_slice())))
    }

    /// Transpose as a real `8N x 8N` matrix: block `(c, r)` becomes
    /// `star(A_rc)`.
    pub fn transpose(&self) -> Self {
        let mut rows: Vec<Vec<(usize, CQuaternion)>> = vec![Vec::new(); self.n];
        for r in 0..self.n {
            for (c, v) in self.row(r) {
                rows[c].push((r, v.star()));
            }
        }
        Self::from_rows(self.n, rows, OperatorLabel::Other, self.order)
    }

    /// Product `self * other` (apply `other` first).
    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n);
        let rows: Vec<Vec<(usize, CQuaternion)>> = (0..self.n)
            .into_par_iter()
            .map(|r| {
                let mut acc: Vec<(usize, CQuaternion)> = Vec::new();
                for (k, a) in self.row(r) {
                    for (c, b) in other.row(k) {
                        acc.push((c, cqmul(a, b)));
                    }
                }
                acc
            })
            .collect();
        Self::from_rows(self.n, rows, OperatorLabel::Other, self.order + other.order)
    }

    /// `alpha * self + beta * other`.
    pub fn lincomb(&self, alpha: f64, other: &Self, beta: f64) -> Self {
        assert_eq!(self.n, other.n);
        let rows = (0..self.n)
            .map(|r| {
                self.row(r)
                    .map(|(c, v)| (c, v.scale(alpha)))
                    .chain(other.row(r).map(|(c, v)| (c, v.scale(beta))))
                    .collect()
            })
            .collect();
        Self::from_rows(
            self.n,
            rows,
            OperatorLabel::Other,
            self.order.max(other.order),
        )
    }

    pub fn scale(&self, a: f64) -> Self {
        let mut out = self.clone();
        out.vals.iter_mut().for_each(|v| *v *= a);
        out
    }

    /// Upper bound on the spectral norm: `sqrt(||A||_1 ||A||_inf)` with block
    /// norms bounded by `|q1| + |q2|`.
    pub fn norm_bound(&self) -> f64 {
        let bn = |v: &CQuaternion| v.q1.norm() + v.q2.norm();
        let mut col_sums = vec![0.0; self.n];
        let mut row_max: f64 = 0.0;
        for r in 0..self.n {
            let mut s = 0.0;
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                let b = bn(&self.vals[k]);
                s += b;
                col_sums[self.cols[k]] += b;
            }
            row_max = row_max.max(s);
        }
        let col_max = col_sums.into_iter().fold(0.0, f64::max);
        (row_max * col_max).sqrt()
    }

    /// Dense `8N x 8N` real matrix.
    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(8 * self.n, 8 * self.n);
        for r in 0..self.n {
            for (c, v) in self.row(r) {
                let b = v.left_matrix();
                for (i, row) in b.iter().enumerate() {
                    for (j, x) in row.iter().enumerate() {
                        m[(8 * r + i, 8 * c + j)] = *x;
                    }
                }
            }
        }
        m
    }

    /// Coordinate export: one line per block, `row col` then the 64 entries
    /// of the real block in row-major order.
    pub fn write_coo<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(
            w,
            "# blocks {} dim {} label {:?}",
            self.nnz_blocks(),
            self.n,
            self.label
        )?;
        for r in 0..self.n {
            for (c, v) in self.row(r) {
                write!(w, "{r} {c}")?;
                for row in v.left_matrix() {
                    for x in row {
                        write!(w, " {x:.16e}")?;
                    }
                }
                writeln!(w)?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> QOperator {
        let a = CQuaternion::from_array([1.0, 2.0, 0.0, -1.0, 0.5, 0.0, 0.3, 0.0]);
        let b = CQuaternion::from_array([0.0, 0.0, 1.0, 0.0, 0.0, -2.0, 0.0, 1.0]);
        QOperator::from_rows(
            2,
            vec![vec![(1, a), (0, b), (1, b)], vec![(0, a)]],
            OperatorLabel::Other,
            1,
        )
    }

    #[test]
    fn duplicates_merge_and_sort() {
        let op = sample();
        assert_eq!(op.nnz_blocks(), 3);
        let cols: Vec<usize> = op.row(0).map(|e| e.0).collect();
        assert_eq!(cols, vec![0, 1]);
    }

    #[test]
    fn dense_transpose_agrees() {
        let op = sample();
        let d = op.to_dense();
        let dt = op.transpose().to_dense();
        assert!((d.transpose() - dt).abs().max() < 1e-15);
    }

    #[test]
    fn dense_product_agrees() {
        let op = sample();
        let p = op.matmul(&op.transpose());
        let d = op.to_dense() * op.to_dense().transpose();
        assert!((p.to_dense() - d).abs().max() < 1e-13);
    }

    #[test]
    fn identity_is_bitwise() {
        let id = QOperator::identity(3);
        let u = GridFunction::from_vec(vec![
            CQuaternion::from_array([
                0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8
            ]);
            3
        ]);
        assert_eq!(id.apply(&u).unwrap(), u);
        assert!(matches!(
            id.apply(&GridFunction::zeros(2)),
            Err(OperatorError::Shape { .. })
        ));
    }

    #[test]
    fn norm_bound_dominates_dense_norm() {
        let op = sample();
        let d = op.to_dense();
        let sv = d.singular_values();
        assert!(sv.max() <= op.norm_bound() * (1.0 + 1e-12));
    }

    #[test]
    fn coo_export_lists_blocks() {
        let mut buf = Vec::new();
        sample().write_coo(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 4);
        assert_eq!(text.lines().nth(1).unwrap().split_whitespace().count(), 66);
    }
}

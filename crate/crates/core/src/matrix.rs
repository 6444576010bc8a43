//! Matrix storage shared by assembly, the block solver, and the file formats.
//!
//! Desk-scale systems are held dense; anything larger goes into
//! coordinate-list triplets. Both storages answer the same structural
//! questions (see [`crate::assembly::is_centrosymmetric`]) with identical
//! verdicts.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};

/// Coordinate-list (triplet) sparse storage, row-major insertion order.
#[derive(Debug, Clone, PartialEq)]
pub struct CooMatrix {
    nrows: usize,
    ncols: usize,
    triplets: Vec<(usize, usize, f64)>,
}

impl CooMatrix {
    pub fn new(nrows: usize, ncols: usize) -> Self {
        CooMatrix {
            nrows,
            ncols,
            triplets: Vec::new(),
        }
    }

    pub fn push(&mut self, row: usize, col: usize, value: f64) {
        debug_assert!(row < self.nrows && col < self.ncols);
        self.triplets.push((row, col, value));
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.triplets.len()
    }

    pub fn triplets(&self) -> &[(usize, usize, f64)] {
        &self.triplets
    }

    /// Entry map with duplicate triplets summed.
    pub fn entry_map(&self) -> BTreeMap<(usize, usize), f64> {
        let mut map = BTreeMap::new();
        for &(r, c, v) in &self.triplets {
            *map.entry((r, c)).or_insert(0.0) += v;
        }
        map
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut dense = DMatrix::zeros(self.nrows, self.ncols);
        for &(r, c, v) in &self.triplets {
            dense[(r, c)] += v;
        }
        dense
    }

    /// Triplets of all nonzero entries of a dense matrix, row-major.
    pub fn from_dense(dense: &DMatrix<f64>) -> Self {
        let mut coo = CooMatrix::new(dense.nrows(), dense.ncols());
        for r in 0..dense.nrows() {
            for c in 0..dense.ncols() {
                let v = dense[(r, c)];
                if v != 0.0 {
                    coo.push(r, c, v);
                }
            }
        }
        coo
    }
}

/// Either dense or coordinate-list storage for a system matrix.
#[derive(Debug, Clone, PartialEq)]
pub enum SystemMatrix {
    Dense(DMatrix<f64>),
    Coo(CooMatrix),
}

impl SystemMatrix {
    pub fn nrows(&self) -> usize {
        match self {
            SystemMatrix::Dense(m) => m.nrows(),
            SystemMatrix::Coo(m) => m.nrows(),
        }
    }

    pub fn ncols(&self) -> usize {
        match self {
            SystemMatrix::Dense(m) => m.ncols(),
            SystemMatrix::Coo(m) => m.ncols(),
        }
    }

    pub fn is_square(&self) -> bool {
        self.nrows() == self.ncols()
    }

    /// Entry lookup. Linear in nnz for triplet storage; meant for tests and
    /// small matrices, not inner loops.
    pub fn get(&self, row: usize, col: usize) -> f64 {
        match self {
            SystemMatrix::Dense(m) => m[(row, col)],
            SystemMatrix::Coo(m) => m
                .triplets()
                .iter()
                .filter(|&&(r, c, _)| r == row && c == col)
                .map(|&(_, _, v)| v)
                .sum(),
        }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        match self {
            SystemMatrix::Dense(m) => m.clone(),
            SystemMatrix::Coo(m) => m.to_dense(),
        }
    }

    pub fn to_coo(&self) -> CooMatrix {
        match self {
            SystemMatrix::Dense(m) => CooMatrix::from_dense(m),
            SystemMatrix::Coo(m) => m.clone(),
        }
    }

    /// Matrix-vector product.
    pub fn mul_vec(&self, x: &DVector<f64>) -> DVector<f64> {
        assert_eq!(self.ncols(), x.len(), "matrix-vector dimension mismatch");
        match self {
            SystemMatrix::Dense(m) => m * x,
            SystemMatrix::Coo(m) => {
                let mut y = DVector::zeros(m.nrows());
                for &(r, c, v) in m.triplets() {
                    y[r] += v * x[c];
                }
                y
            }
        }
    }

    /// Largest absolute entry (0 for an empty matrix).
    pub fn max_abs(&self) -> f64 {
        match self {
            SystemMatrix::Dense(m) => m.iter().fold(0.0, |acc: f64, &v| acc.max(v.abs())),
            SystemMatrix::Coo(m) => m
                .entry_map()
                .values()
                .fold(0.0, |acc: f64, &v| acc.max(v.abs())),
        }
    }
}

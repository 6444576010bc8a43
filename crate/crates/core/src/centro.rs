//! Centrosymmetric block algebra.
//!
//! A rank-2N centrosymmetric matrix decomposes into two rank-N blocks,
//!
//! ```text
//! A = | B   CJ |          A⁻¹ = | D   EJ |
//!     | JC  JBJ|                | JE  JDJ|
//! ```
//!
//! with J the anti-diagonal identity. The inverse blocks are
//! `D = ((B+C)⁻¹ + (B−C)⁻¹)/2` and `E = ((B+C)⁻¹ − (B−C)⁻¹)/2`, so both the
//! inverse and any solve cost two rank-N factorizations instead of one
//! rank-2N factorization, and the inverse stores 2N² scalars instead of 4N².
//!
//! The split solve follows directly: with `b = (b₁, b₂)` and `x = (x₁, x₂)`,
//! `u = x₁ + Jx₂` solves `(B+C)u = b₁ + Jb₂` and `v = x₁ − Jx₂` solves
//! `(B−C)v = b₁ − Jb₂`.

use nalgebra::linalg::LU;
use nalgebra::{DMatrix, DVector, Dyn};

use crate::assembly::is_centrosymmetric;
use crate::error::{Error, Result};
use crate::matrix::SystemMatrix;

/// Condition estimates beyond this trigger a warning in solve reports.
pub const CONDITION_WARNING_THRESHOLD: f64 = 1e12;

/// Applies the exchange matrix J (anti-diagonal identity) to a vector:
/// index order is reversed. J is never materialized.
pub fn exchange(x: &DVector<f64>) -> DVector<f64> {
    DVector::from_iterator(x.len(), x.iter().rev().copied())
}

/// Right-multiplication by J: reverses column order.
fn reverse_columns(m: &DMatrix<f64>) -> DMatrix<f64> {
    let n = m.ncols();
    DMatrix::from_fn(m.nrows(), n, |r, c| m[(r, n - 1 - c)])
}

/// Left-multiplication by J: reverses row order.
fn reverse_rows(m: &DMatrix<f64>) -> DMatrix<f64> {
    let n = m.nrows();
    DMatrix::from_fn(n, m.ncols(), |r, c| m[(n - 1 - r, c)])
}

/// The (B, C) block pair of a centrosymmetric matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CentroBlocks {
    b: DMatrix<f64>,
    c: DMatrix<f64>,
}

impl CentroBlocks {
    /// Extracts the blocks of a centrosymmetric matrix.
    ///
    /// The input must pass [`is_centrosymmetric`] within `tol`; the first
    /// violation is carried in the error otherwise. The extraction itself is
    /// exact (pure copies and index reversals), so
    /// [`CentroBlocks::reconstruct`] reproduces the input bit for bit.
    pub fn split(matrix: &SystemMatrix, tol: f64) -> Result<Self> {
        let check = is_centrosymmetric(matrix, tol)?;
        if let Some(violation) = check.first_violation {
            return Err(Error::NotCentrosymmetric(violation));
        }
        let dense = matrix.to_dense();
        let n = dense.nrows() / 2;
        let b = dense.view((0, 0), (n, n)).into_owned();
        let c = reverse_columns(&dense.view((0, n), (n, n)).into_owned());
        Ok(CentroBlocks { b, c })
    }

    /// Wraps an explicit block pair (both rank-N square).
    pub fn from_parts(b: DMatrix<f64>, c: DMatrix<f64>) -> Result<Self> {
        if !b.is_square() || b.shape() != c.shape() {
            return Err(Error::DimensionMismatch(format!(
                "blocks must be square and equally sized, got {}x{} and {}x{}",
                b.nrows(),
                b.ncols(),
                c.nrows(),
                c.ncols()
            )));
        }
        Ok(CentroBlocks { b, c })
    }

    pub fn half_rank(&self) -> usize {
        self.b.nrows()
    }

    pub fn b(&self) -> &DMatrix<f64> {
        &self.b
    }

    pub fn c(&self) -> &DMatrix<f64> {
        &self.c
    }

    /// Rebuilds the full rank-2N matrix `[[B, CJ], [JC, JBJ]]`.
    pub fn reconstruct(&self) -> DMatrix<f64> {
        let n = self.half_rank();
        let mut full = DMatrix::zeros(2 * n, 2 * n);
        let cj = reverse_columns(&self.c);
        let jc = reverse_rows(&self.c);
        let jbj = reverse_rows(&reverse_columns(&self.b));
        full.view_mut((0, 0), (n, n)).copy_from(&self.b);
        full.view_mut((0, n), (n, n)).copy_from(&cj);
        full.view_mut((n, 0), (n, n)).copy_from(&jc);
        full.view_mut((n, n), (n, n)).copy_from(&jbj);
        full
    }

    /// Scalars held by the pair: 2N².
    pub fn scalar_count(&self) -> usize {
        2 * self.half_rank() * self.half_rank()
    }

    pub fn sum(&self) -> DMatrix<f64> {
        &self.b + &self.c
    }

    pub fn difference(&self) -> DMatrix<f64> {
        &self.b - &self.c
    }
}

fn factor_half(
    matrix: DMatrix<f64>,
    label: &'static str,
    warnings: &mut Vec<String>,
) -> Result<LU<f64, Dyn, Dyn>> {
    let n = matrix.nrows();
    let lu = LU::new(matrix);
    let diag = lu.u().diagonal();
    let mut max_pivot = 0.0_f64;
    let mut min_pivot = f64::INFINITY;
    for &d in diag.iter() {
        max_pivot = max_pivot.max(d.abs());
        min_pivot = min_pivot.min(d.abs());
    }
    if max_pivot == 0.0 || min_pivot <= max_pivot * f64::EPSILON * n as f64 {
        return Err(Error::SingularFactor { factor: label });
    }
    // Pivot-ratio estimate only; cheap, and a lower bound on the true
    // condition number.
    let estimate = max_pivot / min_pivot;
    if estimate > CONDITION_WARNING_THRESHOLD {
        warnings.push(format!(
            "{label} condition estimate {estimate:.3e} exceeds {CONDITION_WARNING_THRESHOLD:.0e}; \
             solutions may lose accuracy"
        ));
    }
    Ok(lu)
}

/// Retained LU factors of (B+C) and (B−C); solve any number of right-hand
/// sides against the same matrix without refactoring.
pub struct CentroFactors {
    n: usize,
    plus: LU<f64, Dyn, Dyn>,
    minus: LU<f64, Dyn, Dyn>,
    warnings: Vec<String>,
}

impl CentroFactors {
    /// Factors (B+C) and (B−C) with partial-pivoted LU. Exactly two rank-N
    /// factorizations; no rank-2N work anywhere.
    pub fn new(blocks: &CentroBlocks) -> Result<Self> {
        let mut warnings = Vec::new();
        let plus = factor_half(blocks.sum(), "B+C", &mut warnings)?;
        let minus = factor_half(blocks.difference(), "B-C", &mut warnings)?;
        Ok(CentroFactors {
            n: blocks.half_rank(),
            plus,
            minus,
            warnings,
        })
    }

    pub fn half_rank(&self) -> usize {
        self.n
    }

    /// Scalars held by the two factors: 2N².
    pub fn scalar_count(&self) -> usize {
        2 * self.n * self.n
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    /// Solves `A·x = rhs` through the two half-size systems.
    pub fn solve(&self, rhs: &DVector<f64>) -> Result<DVector<f64>> {
        let n = self.n;
        if rhs.len() != 2 * n {
            return Err(Error::DimensionMismatch(format!(
                "right-hand side has length {}, expected {}",
                rhs.len(),
                2 * n
            )));
        }
        let b1 = rhs.rows(0, n).into_owned();
        let jb2 = exchange(&rhs.rows(n, n).into_owned());
        let u = self
            .plus
            .solve(&(&b1 + &jb2))
            .ok_or(Error::SingularFactor { factor: "B+C" })?;
        let v = self
            .minus
            .solve(&(&b1 - &jb2))
            .ok_or(Error::SingularFactor { factor: "B-C" })?;
        let x1 = (&u + &v) / 2.0;
        let x2 = exchange(&((&u - &v) / 2.0));
        Ok(DVector::from_fn(2 * n, |i, _| {
            if i < n {
                x1[i]
            } else {
                x2[i - n]
            }
        }))
    }
}

/// One-shot split solve: factor both half matrices once and solve.
pub fn centro_solve(blocks: &CentroBlocks, rhs: &DVector<f64>) -> Result<DVector<f64>> {
    CentroFactors::new(blocks)?.solve(rhs)
}

/// The (D, E) block pair of the inverse of a centrosymmetric matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CentroInverse {
    d: DMatrix<f64>,
    e: DMatrix<f64>,
}

/// Inverts through the block formulas: `D = ((B+C)⁻¹ + (B−C)⁻¹)/2`,
/// `E = ((B+C)⁻¹ − (B−C)⁻¹)/2`.
pub fn centro_inverse(blocks: &CentroBlocks) -> Result<CentroInverse> {
    let mut warnings = Vec::new();
    let plus = factor_half(blocks.sum(), "B+C", &mut warnings)?
        .try_inverse()
        .ok_or(Error::SingularFactor { factor: "B+C" })?;
    let minus = factor_half(blocks.difference(), "B-C", &mut warnings)?
        .try_inverse()
        .ok_or(Error::SingularFactor { factor: "B-C" })?;
    Ok(CentroInverse {
        d: (&plus + &minus) / 2.0,
        e: (&plus - &minus) / 2.0,
    })
}

impl CentroInverse {
    pub fn half_rank(&self) -> usize {
        self.d.nrows()
    }

    pub fn d(&self) -> &DMatrix<f64> {
        &self.d
    }

    pub fn e(&self) -> &DMatrix<f64> {
        &self.e
    }

    /// Rebuilds the full inverse `[[D, EJ], [JE, JDJ]]`.
    pub fn reconstruct(&self) -> DMatrix<f64> {
        CentroBlocks {
            b: self.d.clone(),
            c: self.e.clone(),
        }
        .reconstruct()
    }

    /// Applies the inverse to a vector without materializing the full 2N×2N
    /// matrix: `x₁ = D·b₁ + E·(Jb₂)`, `x₂ = J(E·b₁ + D·(Jb₂))`.
    pub fn apply(&self, rhs: &DVector<f64>) -> Result<DVector<f64>> {
        let n = self.half_rank();
        if rhs.len() != 2 * n {
            return Err(Error::DimensionMismatch(format!(
                "right-hand side has length {}, expected {}",
                rhs.len(),
                2 * n
            )));
        }
        let b1 = rhs.rows(0, n).into_owned();
        let jb2 = exchange(&rhs.rows(n, n).into_owned());
        let x1 = &self.d * &b1 + &self.e * &jb2;
        let x2 = exchange(&(&self.e * &b1 + &self.d * &jb2));
        Ok(DVector::from_fn(2 * n, |i, _| {
            if i < n {
                x1[i]
            } else {
                x2[i - n]
            }
        }))
    }

    /// Scalars held by the pair: 2N², against 4N² for the dense inverse.
    pub fn scalar_count(&self) -> usize {
        2 * self.half_rank() * self.half_rank()
    }
}

/// Scalars a dense rank-n inverse would store; for storage-ratio reporting.
pub fn dense_inverse_scalar_count(rank: usize) -> usize {
    rank * rank
}

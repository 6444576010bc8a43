//! Brute-force reference implementations used to validate every structured
//! fast path.
//!
//! The dense LU here is deliberately naive — plain loops over flat row-major
//! storage, no blocking, no symmetry exploitation — so that it stays
//! auditable and shares no code with the block solver it cross-checks.

use std::sync::Arc;
use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::assembly::{
    self, BcSpec, BcType, BcValue, Face, FaceBc, LinearSystem, RowKind, SourceField,
};
use crate::error::{Error, Result};
use crate::matrix::SystemMatrix;
use crate::mesh::{GridSpec, Numbering, Scheme};

/// Outcome of one solve: accuracy, phase timings, and storage footprint.
#[derive(Debug, Clone, Serialize)]
pub struct SolveReport {
    pub method: String,
    pub rank: usize,
    /// ‖Ax − b‖₂ / ‖b‖₂ (absolute residual when b = 0).
    pub relative_residual: f64,
    pub factor_seconds: f64,
    pub solve_seconds: f64,
    /// Scalars held by the factorization (n² for dense LU, 2·(n/2)² for the
    /// split factors).
    pub factor_scalar_count: usize,
    pub warnings: Vec<String>,
}

/// Row-major partial-pivoted LU factors.
struct DenseLu {
    n: usize,
    data: Vec<f64>,
    pivots: Vec<usize>,
    warnings: Vec<String>,
}

fn naive_lu_factor(a: &DMatrix<f64>) -> Result<DenseLu> {
    let n = a.nrows();
    let mut data = vec![0.0; n * n];
    let mut scale = 0.0_f64;
    for r in 0..n {
        for c in 0..n {
            data[r * n + c] = a[(r, c)];
            scale = scale.max(a[(r, c)].abs());
        }
    }
    let mut pivots = vec![0usize; n];
    for k in 0..n {
        let mut p = k;
        let mut best = data[k * n + k].abs();
        for r in (k + 1)..n {
            let v = data[r * n + k].abs();
            if v > best {
                best = v;
                p = r;
            }
        }
        if best <= scale * f64::EPSILON * n as f64 {
            return Err(Error::Singular(format!(
                "pivot {best:e} at elimination step {k} (matrix scale {scale:e})"
            )));
        }
        pivots[k] = p;
        if p != k {
            for c in 0..n {
                data.swap(k * n + c, p * n + c);
            }
        }
        let pivot = data[k * n + k];
        for r in (k + 1)..n {
            let factor = data[r * n + k] / pivot;
            data[r * n + k] = factor;
            for c in (k + 1)..n {
                data[r * n + c] -= factor * data[k * n + c];
            }
        }
    }
    let mut warnings = Vec::new();
    let mut dmax = 0.0_f64;
    let mut dmin = f64::INFINITY;
    for k in 0..n {
        let d = data[k * n + k].abs();
        dmax = dmax.max(d);
        dmin = dmin.min(d);
    }
    if dmin > 0.0 && dmax / dmin > crate::centro::CONDITION_WARNING_THRESHOLD {
        warnings.push(format!(
            "condition estimate {:.3e} exceeds {:.0e}; solutions may lose accuracy",
            dmax / dmin,
            crate::centro::CONDITION_WARNING_THRESHOLD
        ));
    }
    Ok(DenseLu {
        n,
        data,
        pivots,
        warnings,
    })
}

impl DenseLu {
    #[allow(clippy::needless_range_loop)] // plain index loops keep the oracle auditable
    fn solve(&self, b: &DVector<f64>) -> DVector<f64> {
        let n = self.n;
        let mut x: Vec<f64> = b.iter().copied().collect();
        // The stored L carries every row interchange, so the right-hand side
        // must be fully permuted before the forward sweep.
        for k in 0..n {
            x.swap(k, self.pivots[k]);
        }
        for r in 1..n {
            let mut sum = x[r];
            for c in 0..r {
                sum -= self.data[r * n + c] * x[c];
            }
            x[r] = sum;
        }
        for r in (0..n).rev() {
            let mut sum = x[r];
            for c in (r + 1)..n {
                sum -= self.data[r * n + c] * x[c];
            }
            x[r] = sum / self.data[r * n + r];
        }
        DVector::from_vec(x)
    }
}

/// Relative L2 residual of a candidate solution (absolute when ‖b‖ = 0).
pub fn relative_residual(matrix: &SystemMatrix, x: &DVector<f64>, b: &DVector<f64>) -> f64 {
    let residual = (matrix.mul_vec(x) - b).norm();
    let scale = b.norm();
    if scale > 0.0 {
        residual / scale
    } else {
        residual
    }
}

/// Solves `A·x = b` with plain partial-pivoted LU. Makes no structural
/// assumptions about `A`.
pub fn dense_solve(a: &DMatrix<f64>, b: &DVector<f64>) -> Result<(DVector<f64>, SolveReport)> {
    if !a.is_square() {
        return Err(Error::NotSquare {
            nrows: a.nrows(),
            ncols: a.ncols(),
        });
    }
    if a.nrows() != b.len() {
        return Err(Error::DimensionMismatch(format!(
            "matrix rank {} but right-hand side length {}",
            a.nrows(),
            b.len()
        )));
    }
    let t0 = Instant::now();
    let lu = naive_lu_factor(a)?;
    let factor_seconds = t0.elapsed().as_secs_f64();
    let t1 = Instant::now();
    let x = lu.solve(b);
    let solve_seconds = t1.elapsed().as_secs_f64();
    let report = SolveReport {
        method: "dense-lu".to_string(),
        rank: a.nrows(),
        relative_residual: relative_residual(&SystemMatrix::Dense(a.clone()), &x, b),
        factor_seconds,
        solve_seconds,
        factor_scalar_count: a.nrows() * a.nrows(),
        warnings: lu.warnings.clone(),
    };
    Ok((x, report))
}

/// Inverts `A` column by column through the naive LU.
pub fn dense_inverse(a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if !a.is_square() {
        return Err(Error::NotSquare {
            nrows: a.nrows(),
            ncols: a.ncols(),
        });
    }
    let n = a.nrows();
    let lu = naive_lu_factor(a)?;
    let mut inverse = DMatrix::zeros(n, n);
    let mut unit = DVector::zeros(n);
    for c in 0..n {
        unit[c] = 1.0;
        let col = lu.solve(&unit);
        inverse.set_column(c, &col);
        unit[c] = 0.0;
    }
    Ok(inverse)
}

/// Solves an assembled system by conjugate gradient on the reduced
/// symmetrized form; the path convergence studies take when the system is
/// too large to hold dense.
///
/// Dirichlet unknowns are eliminated (their rows are identity rows, so their
/// values are read straight from `b`), and every stencil row is scaled by
/// `2^-folds`. That scaling makes the reduced matrix exactly symmetric: a
/// ghost fold doubles one neighbour coefficient, and halving the row undoes
/// the doubling seen from the other side. Negating then yields a positive
/// definite system whenever at least one face is Dirichlet.
pub(crate) fn reduced_cg_solve(
    system: &LinearSystem,
    tol: f64,
    max_iterations: usize,
) -> Result<DVector<f64>> {
    let n = system.rank();
    let mut reduced_index = vec![usize::MAX; n];
    let mut unknowns = Vec::new();
    for (idx, kind) in system.row_kinds.iter().enumerate() {
        if matches!(kind, RowKind::Stencil { .. }) {
            reduced_index[idx] = unknowns.len();
            unknowns.push(idx);
        }
    }
    if unknowns.is_empty() {
        // Every row is an identity row.
        return Ok(system.rhs.clone());
    }
    if unknowns.len() == n {
        return Err(Error::Singular(
            "no Dirichlet rows: the reduced operator is singular (all-Neumann configuration)"
                .to_string(),
        ));
    }
    let m = unknowns.len();
    let scale: Vec<f64> = unknowns
        .iter()
        .map(|&u| match system.row_kinds[u] {
            RowKind::Stencil { folds } => 0.5_f64.powi(folds as i32),
            RowKind::Dirichlet => unreachable!(),
        })
        .collect();

    // Reduced right-hand side: -s_u * (b_u - sum over Dirichlet columns).
    let mut rhs = vec![0.0; m];
    for (r, &u) in unknowns.iter().enumerate() {
        rhs[r] = -scale[r] * system.rhs[u];
    }

    // CSR of the reduced, scaled, negated matrix.
    let triplets = system.matrix.to_coo();
    let mut counts = vec![0usize; m];
    for &(r, c, _) in triplets.triplets() {
        if reduced_index[r] != usize::MAX && reduced_index[c] != usize::MAX {
            counts[reduced_index[r]] += 1;
        }
    }
    let mut row_ptr = vec![0usize; m + 1];
    for r in 0..m {
        row_ptr[r + 1] = row_ptr[r] + counts[r];
    }
    let nnz = row_ptr[m];
    let mut cols = vec![0usize; nnz];
    let mut vals = vec![0.0; nnz];
    let mut fill = row_ptr.clone();
    for &(r, c, v) in triplets.triplets() {
        let rr = reduced_index[r];
        if rr == usize::MAX {
            continue;
        }
        let cc = reduced_index[c];
        if cc == usize::MAX {
            // Dirichlet column: moves to the right-hand side.
            rhs[rr] += scale[rr] * v * system.rhs[c];
            continue;
        }
        cols[fill[rr]] = cc;
        vals[fill[rr]] = -scale[rr] * v;
        fill[rr] += 1;
    }

    let rhs = DVector::from_vec(rhs);
    let spmv = |x: &DVector<f64>| -> DVector<f64> {
        let mut y = DVector::zeros(m);
        for r in 0..m {
            let mut acc = 0.0;
            for idx in row_ptr[r]..row_ptr[r + 1] {
                acc += vals[idx] * x[cols[idx]];
            }
            y[r] = acc;
        }
        y
    };

    let mut x = DVector::zeros(m);
    let mut r = rhs.clone();
    let mut p = r.clone();
    let mut rs = r.dot(&r);
    let target = tol * rhs.norm();
    let mut converged = rs.sqrt() <= target;
    for _ in 0..max_iterations {
        if converged {
            break;
        }
        let ap = spmv(&p);
        let denom = p.dot(&ap);
        if denom <= 0.0 {
            return Err(Error::Singular(format!(
                "conjugate gradient hit a non-positive curvature {denom:e}; the reduced operator \
                 is not positive definite"
            )));
        }
        let alpha = rs / denom;
        x.axpy(alpha, &p, 1.0);
        r.axpy(-alpha, &ap, 1.0);
        let rs_next = r.dot(&r);
        if rs_next.sqrt() <= target {
            converged = true;
        }
        p = &r + &p * (rs_next / rs);
        rs = rs_next;
    }
    if !converged {
        return Err(Error::NonConvergence(format!(
            "conjugate gradient: residual {:e} above target {:e} after {max_iterations} iterations",
            rs.sqrt(),
            target
        )));
    }

    let mut full = system.rhs.clone();
    for (rr, &u) in unknowns.iter().enumerate() {
        full[u] = x[rr];
    }
    Ok(full)
}

/// An exact solution with its Laplacian and gradient, for discretization
/// checks: the source term and all boundary values are derived from it.
#[derive(Clone)]
pub struct ManufacturedSolution {
    value: Arc<dyn Fn(f64, f64, f64) -> f64 + Send + Sync>,
    laplacian: Arc<dyn Fn(f64, f64, f64) -> f64 + Send + Sync>,
    gradient: Arc<dyn Fn(f64, f64, f64) -> [f64; 3] + Send + Sync>,
}

impl ManufacturedSolution {
    pub fn new<F, L, G>(value: F, laplacian: L, gradient: G) -> Self
    where
        F: Fn(f64, f64, f64) -> f64 + Send + Sync + 'static,
        L: Fn(f64, f64, f64) -> f64 + Send + Sync + 'static,
        G: Fn(f64, f64, f64) -> [f64; 3] + Send + Sync + 'static,
    {
        ManufacturedSolution {
            value: Arc::new(value),
            laplacian: Arc::new(laplacian),
            gradient: Arc::new(gradient),
        }
    }

    /// f = sin(πx)·sin(πy)·sin(πz); the classic smooth benchmark.
    pub fn product_of_sines() -> Self {
        use std::f64::consts::PI;
        ManufacturedSolution::new(
            |x, y, z| (PI * x).sin() * (PI * y).sin() * (PI * z).sin(),
            |x, y, z| -3.0 * PI * PI * (PI * x).sin() * (PI * y).sin() * (PI * z).sin(),
            |x, y, z| {
                [
                    PI * (PI * x).cos() * (PI * y).sin() * (PI * z).sin(),
                    PI * (PI * x).sin() * (PI * y).cos() * (PI * z).sin(),
                    PI * (PI * x).sin() * (PI * y).sin() * (PI * z).cos(),
                ]
            },
        )
    }

    /// f = x² + y² + z²; the 3-point stencil is exact on it.
    pub fn quadratic() -> Self {
        ManufacturedSolution::new(
            |x, y, z| x * x + y * y + z * z,
            |_, _, _| 6.0,
            |x, y, z| [2.0 * x, 2.0 * y, 2.0 * z],
        )
    }

    pub fn constant(c: f64) -> Self {
        ManufacturedSolution::new(move |_, _, _| c, |_, _, _| 0.0, |_, _, _| [0.0; 3])
    }

    pub fn value_at(&self, x: f64, y: f64, z: f64) -> f64 {
        (self.value)(x, y, z)
    }

    pub fn laplacian_at(&self, x: f64, y: f64, z: f64) -> f64 {
        (self.laplacian)(x, y, z)
    }

    pub fn gradient_at(&self, x: f64, y: f64, z: f64) -> [f64; 3] {
        (self.gradient)(x, y, z)
    }

    /// Boundary conditions of the requested types with values sampled from
    /// this solution. Neumann faces get the derivative along the inward
    /// normal, matching the assembly convention.
    pub fn boundary_conditions(&self, grid: &GridSpec, types: &[BcType; 6]) -> Result<BcSpec> {
        let mut faces = Vec::with_capacity(6);
        for (face, &kind) in Face::ALL.into_iter().zip(types.iter()) {
            let mut table = std::collections::HashMap::new();
            for node in face.nodes(grid) {
                let [x, y, z] = grid.position(node);
                let v = match kind {
                    BcType::Dirichlet => self.value_at(x, y, z),
                    BcType::Neumann => {
                        let g = self.gradient_at(x, y, z);
                        match face {
                            Face::XMin => g[0],
                            Face::XMax => -g[0],
                            Face::YMin => g[1],
                            Face::YMax => -g[1],
                            Face::ZMin => g[2],
                            Face::ZMax => -g[2],
                        }
                    }
                };
                table.insert(node, v);
            }
            faces.push(FaceBc {
                kind,
                value: BcValue::Table(table),
            });
        }
        let [x_min, x_max, y_min, y_max, z_min, z_max]: [FaceBc; 6] =
            faces.try_into().expect("six faces");
        BcSpec::new(x_min, x_max, y_min, y_max, z_min, z_max)
    }
}

impl std::fmt::Debug for ManufacturedSolution {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "ManufacturedSolution(..)")
    }
}

/// Error of one refinement level.
#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceLevel {
    pub node_count: usize,
    pub max_spacing: f64,
    /// Max-norm nodal error against the exact solution.
    pub max_error: f64,
}

/// Errors per level plus the observed orders between consecutive levels.
#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceReport {
    pub levels: Vec<ConvergenceLevel>,
    /// `log2(e_h / e_{h/2})` between consecutive levels; assumes each level
    /// halves the spacings of the one before.
    pub observed_orders: Vec<f64>,
}

impl ConvergenceReport {
    /// Order between the two finest levels.
    pub fn finest_order(&self) -> Option<f64> {
        self.observed_orders.last().copied()
    }
}

/// Runs the discretization-order study: assemble and solve each level with
/// data manufactured from `solution`, and measure the max-norm nodal error.
///
/// Levels small enough for dense storage go through the naive LU oracle;
/// larger levels through the reduced conjugate gradient. Either way the
/// algebraic error is driven far below the discretization error being
/// measured.
pub fn convergence_study(
    solution: &ManufacturedSolution,
    bc_types: &[BcType; 6],
    levels: &[GridSpec],
) -> Result<ConvergenceReport> {
    let mut out = Vec::with_capacity(levels.len());
    for grid in levels {
        let numbering = Numbering::build(grid, Scheme::Classical);
        let bc = solution.boundary_conditions(grid, bc_types)?;
        let lap = solution.clone();
        let rho = SourceField::evaluator(move |x, y, z| lap.laplacian_at(x, y, z));
        let system = assembly::assemble(grid, &numbering, &bc, &rho)?;
        let x = match &system.matrix {
            SystemMatrix::Dense(a) => dense_solve(a, &system.rhs)?.0,
            SystemMatrix::Coo(_) => reduced_cg_solve(&system, 1e-11, 50_000)?,
        };
        let mut max_error = 0.0_f64;
        for node in grid.nodes() {
            let [px, py, pz] = grid.position(node);
            let exact = solution.value_at(px, py, pz);
            max_error = max_error.max((x[numbering.index_of(node)] - exact).abs());
        }
        out.push(ConvergenceLevel {
            node_count: grid.node_count(),
            max_spacing: grid.hx().max(grid.hy()).max(grid.hz()),
            max_error,
        });
    }
    let observed_orders = out
        .windows(2)
        .map(|w| (w[0].max_error / w[1].max_error).log2())
        .collect();
    Ok(ConvergenceReport {
        levels: out,
        observed_orders,
    })
}

//! Finite-difference assembly of `A·x = b` for the Poisson problem
//! `Δf = ρ` on a structured grid with per-face Dirichlet/Neumann
//! boundary conditions.
//!
//! Row recipes:
//!
//! * interior node: seven-point stencil, off-diagonals `1/h²` per axis and
//!   diagonal `-2(hx⁻² + hy⁻² + hz⁻²)`, right-hand side `ρ`;
//! * node on a Dirichlet face: identity row, right-hand side the prescribed
//!   value (Dirichlet wins over Neumann wherever faces meet);
//! * node on Neumann faces only: the ghost value one spacing outside the
//!   domain is eliminated through the second-order relation
//!   `f_inside - f_ghost = 2h·q`, which doubles the interior neighbour's
//!   coefficient and adds `2q/h` to the right-hand side. `q` is the
//!   derivative of `f` along the inward normal. Edges and corners apply the
//!   elimination once per Neumann face.
//!
//! All matrix coefficients depend on the mesh geometry alone. Boundary
//! *values* and `ρ` only ever reach `b` — that is what makes the
//! centrosymmetric numbering produce a centrosymmetric matrix for arbitrary
//! (asymmetric) data, as long as the face *types* respect the symmetry
//! plane.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::matrix::{CooMatrix, SystemMatrix};
use crate::mesh::{GridSpec, NodeId, Numbering};

/// Systems up to this rank are stored dense; larger ones as triplets.
pub const DENSE_STORAGE_LIMIT: usize = 4096;

/// One face of the box domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Face {
    XMin,
    XMax,
    YMin,
    YMax,
    ZMin,
    ZMax,
}

impl Face {
    /// Fixed face order, also the precedence order when several Dirichlet
    /// faces meet at a node. The order is mirror-invariant: reflection across
    /// the symmetry plane swaps only `ZMin`/`ZMax`, which carry equal types
    /// by construction.
    pub const ALL: [Face; 6] = [
        Face::XMin,
        Face::XMax,
        Face::YMin,
        Face::YMax,
        Face::ZMin,
        Face::ZMax,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Face::XMin => "x_min",
            Face::XMax => "x_max",
            Face::YMin => "y_min",
            Face::YMax => "y_max",
            Face::ZMin => "z_min",
            Face::ZMax => "z_max",
        }
    }

    pub fn contains(self, grid: &GridSpec, node: NodeId) -> bool {
        match self {
            Face::XMin => node.i == 0,
            Face::XMax => node.i == grid.nx() - 1,
            Face::YMin => node.j == 0,
            Face::YMax => node.j == grid.ny() - 1,
            Face::ZMin => node.k == 0,
            Face::ZMax => node.k == grid.nz() - 1,
        }
    }

    /// Nodes of the face in classical order.
    pub fn nodes(self, grid: &GridSpec) -> impl Iterator<Item = NodeId> + '_ {
        grid.nodes().filter(move |&n| self.contains(grid, n))
    }
}

impl std::fmt::Display for Face {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Boundary-condition type of one face.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BcType {
    Dirichlet,
    Neumann,
}

impl std::fmt::Display for BcType {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            BcType::Dirichlet => write!(f, "Dirichlet"),
            BcType::Neumann => write!(f, "Neumann"),
        }
    }
}

/// Value source for a face: a single constant or a per-node table.
#[derive(Debug, Clone)]
pub enum BcValue {
    Constant(f64),
    Table(HashMap<NodeId, f64>),
}

impl BcValue {
    fn at(&self, face: Face, node: NodeId) -> Result<f64> {
        match self {
            BcValue::Constant(c) => Ok(*c),
            BcValue::Table(table) => table
                .get(&node)
                .copied()
                .ok_or_else(|| Error::Config(format!("{face} table has no value for node {node}"))),
        }
    }
}

/// Boundary condition of one face: type plus value source.
///
/// Dirichlet values are the prescribed function values; Neumann values are
/// the prescribed derivative of `f` along the *inward* normal of the face
/// (the outward flux with opposite sign).
#[derive(Debug, Clone)]
pub struct FaceBc {
    pub kind: BcType,
    pub value: BcValue,
}

impl FaceBc {
    pub fn dirichlet(value: BcValue) -> Self {
        FaceBc {
            kind: BcType::Dirichlet,
            value,
        }
    }

    pub fn neumann(value: BcValue) -> Self {
        FaceBc {
            kind: BcType::Neumann,
            value,
        }
    }
}

/// Per-face boundary conditions for the whole box.
///
/// The only structural invariant is that the two faces pierced by the
/// symmetry axis carry the same *type*; their values are free.
#[derive(Debug, Clone)]
pub struct BcSpec {
    faces: [FaceBc; 6],
}

impl BcSpec {
    pub fn new(
        x_min: FaceBc,
        x_max: FaceBc,
        y_min: FaceBc,
        y_max: FaceBc,
        z_min: FaceBc,
        z_max: FaceBc,
    ) -> Result<Self> {
        if z_min.kind != z_max.kind {
            return Err(Error::Config(format!(
                "boundary types must match across the symmetry plane: z_min is {} but z_max is {}",
                z_min.kind, z_max.kind
            )));
        }
        Ok(BcSpec {
            faces: [x_min, x_max, y_min, y_max, z_min, z_max],
        })
    }

    /// Same type and constant value on all six faces.
    pub fn uniform(kind: BcType, value: f64) -> Self {
        let mk = || FaceBc {
            kind,
            value: BcValue::Constant(value),
        };
        BcSpec {
            faces: [mk(), mk(), mk(), mk(), mk(), mk()],
        }
    }

    pub fn face(&self, face: Face) -> &FaceBc {
        let idx = Face::ALL.iter().position(|&f| f == face).unwrap();
        &self.faces[idx]
    }

    pub fn all_neumann(&self) -> bool {
        self.faces.iter().all(|f| f.kind == BcType::Neumann)
    }

    pub fn value_at(&self, face: Face, node: NodeId) -> Result<f64> {
        self.face(face).value.at(face, node)
    }
}

/// Source term `ρ`, defined at every grid node.
#[derive(Clone)]
pub enum SourceField {
    Constant(f64),
    PerNode(HashMap<NodeId, f64>),
    /// Evaluated at the node's physical position.
    Positional(Arc<dyn Fn(f64, f64, f64) -> f64 + Send + Sync>),
}

impl SourceField {
    pub fn evaluator<F>(f: F) -> Self
    where
        F: Fn(f64, f64, f64) -> f64 + Send + Sync + 'static,
    {
        SourceField::Positional(Arc::new(f))
    }

    pub fn value(&self, grid: &GridSpec, node: NodeId) -> Result<f64> {
        match self {
            SourceField::Constant(c) => Ok(*c),
            SourceField::PerNode(table) => table
                .get(&node)
                .copied()
                .ok_or_else(|| Error::Config(format!("source table has no value for node {node}"))),
            SourceField::Positional(f) => {
                let [x, y, z] = grid.position(node);
                Ok(f(x, y, z))
            }
        }
    }
}

impl std::fmt::Debug for SourceField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SourceField::Constant(c) => write!(f, "SourceField::Constant({c})"),
            SourceField::PerNode(t) => write!(f, "SourceField::PerNode({} entries)", t.len()),
            SourceField::Positional(_) => write!(f, "SourceField::Positional(..)"),
        }
    }
}

/// What kind of equation a row encodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowKind {
    /// Identity row pinning a prescribed value.
    Dirichlet,
    /// Stencil row; `folds` counts the ghost eliminations applied (0 for a
    /// true interior node, up to 3 at a corner of three Neumann faces).
    Stencil { folds: u8 },
}

/// The assembled equation at one non-Dirichlet node, before it lands in
/// matrix storage.
#[derive(Debug, Clone, PartialEq)]
pub struct StencilRow {
    pub node: NodeId,
    /// Always `-2(hx⁻² + hy⁻² + hz⁻²)`.
    pub diagonal: f64,
    /// Neighbor coefficients in x−, x+, y−, y+, z−, z+ order; a ghost fold
    /// merges into the opposite neighbor, so there are up to six entries
    /// and a doubled coefficient marks an eliminated ghost.
    pub neighbors: Vec<(NodeId, f64)>,
    /// `ρ` plus the flux terms moved over by ghost elimination.
    pub rhs: f64,
    pub folds: u8,
}

/// Builds the stencil row for a node that is not pinned by any Dirichlet
/// face: the seven-point stencil with ghosts eliminated through the Neumann
/// relations face by face.
pub fn stencil_row(
    grid: &GridSpec,
    bc: &BcSpec,
    rho: &SourceField,
    node: NodeId,
) -> Result<StencilRow> {
    let spacings = [grid.hx(), grid.hy(), grid.hz()];
    let inv_sq = spacings.map(|h| 1.0 / (h * h));
    let mut neighbors: Vec<(NodeId, f64)> = Vec::with_capacity(6);
    let mut add = |n: NodeId, coeff: f64| match neighbors.iter_mut().find(|(m, _)| *m == n) {
        Some((_, c)) => *c += coeff,
        None => neighbors.push((n, coeff)),
    };
    let mut rhs = rho.value(grid, node)?;
    let mut folds = 0u8;
    let coords = [node.i, node.j, node.k];
    let extents = [grid.nx(), grid.ny(), grid.nz()];
    for axis in 0..3 {
        for step_down in [true, false] {
            let exists = if step_down {
                coords[axis] > 0
            } else {
                coords[axis] + 1 < extents[axis]
            };
            if exists {
                add(offset_node(node, axis, step_down), inv_sq[axis]);
            } else {
                // The missing neighbor is a ghost outside the face we are
                // sitting on; that face is Neumann, otherwise the caller
                // would have produced a Dirichlet row.
                let face = face_of(axis, step_down);
                debug_assert_eq!(bc.face(face).kind, BcType::Neumann);
                let inward_exists = if step_down {
                    coords[axis] + 1 < extents[axis]
                } else {
                    coords[axis] > 0
                };
                if !inward_exists {
                    return Err(Error::Config(format!(
                        "Neumann condition on {face} needs at least 2 nodes along its axis \
                         to eliminate the ghost value (axis extent is {})",
                        extents[axis]
                    )));
                }
                add(offset_node(node, axis, !step_down), inv_sq[axis]);
                let q = bc.value_at(face, node)?;
                rhs += 2.0 * q / spacings[axis];
                folds += 1;
            }
        }
    }
    Ok(StencilRow {
        node,
        diagonal: -2.0 * (inv_sq[0] + inv_sq[1] + inv_sq[2]),
        neighbors,
        rhs,
        folds,
    })
}

/// Assembled linear system `A·x = b` plus per-row structure.
#[derive(Debug, Clone)]
pub struct LinearSystem {
    pub matrix: SystemMatrix,
    pub rhs: DVector<f64>,
    pub row_kinds: Vec<RowKind>,
    pub warnings: Vec<String>,
}

impl LinearSystem {
    pub fn rank(&self) -> usize {
        self.rhs.len()
    }
}

/// Assembles the system for `Δf = ρ` under the given numbering.
///
/// Deterministic: nodes are visited in classical order and each row's
/// entries are emitted in ascending column order, so two runs produce
/// byte-identical storage.
pub fn assemble(
    grid: &GridSpec,
    numbering: &Numbering,
    bc: &BcSpec,
    rho: &SourceField,
) -> Result<LinearSystem> {
    assemble_with_dense_limit(grid, numbering, bc, rho, DENSE_STORAGE_LIMIT)
}

/// [`assemble`] with an explicit dense/triplet threshold. Both storages hold
/// the same entries; the threshold only picks the representation.
pub fn assemble_with_dense_limit(
    grid: &GridSpec,
    numbering: &Numbering,
    bc: &BcSpec,
    rho: &SourceField,
    dense_limit: usize,
) -> Result<LinearSystem> {
    if numbering.grid() != grid {
        return Err(Error::DimensionMismatch(format!(
            "numbering was built for a {}x{}x{} grid, not {}x{}x{}",
            numbering.grid().nx(),
            numbering.grid().ny(),
            numbering.grid().nz(),
            grid.nx(),
            grid.ny(),
            grid.nz()
        )));
    }
    let n_total = grid.node_count();
    let mut rhs = DVector::zeros(n_total);
    let mut row_kinds = vec![RowKind::Dirichlet; n_total];
    let dense = n_total <= dense_limit;
    let mut dense_matrix = if dense {
        Some(DMatrix::zeros(n_total, n_total))
    } else {
        None
    };
    let mut coo_matrix = if dense {
        None
    } else {
        Some(CooMatrix::new(n_total, n_total))
    };

    for node in grid.nodes() {
        let row = numbering.index_of(node);
        let dirichlet_face = Face::ALL
            .into_iter()
            .find(|f| f.contains(grid, node) && bc.face(*f).kind == BcType::Dirichlet);

        let mut coeffs: BTreeMap<usize, f64> = BTreeMap::new();
        if let Some(face) = dirichlet_face {
            coeffs.insert(row, 1.0);
            rhs[row] = bc.value_at(face, node)?;
            row_kinds[row] = RowKind::Dirichlet;
        } else {
            let stencil = stencil_row(grid, bc, rho, node)?;
            for (neighbor, coeff) in &stencil.neighbors {
                *coeffs.entry(numbering.index_of(*neighbor)).or_insert(0.0) += coeff;
            }
            *coeffs.entry(row).or_insert(0.0) += stencil.diagonal;
            rhs[row] = stencil.rhs;
            row_kinds[row] = RowKind::Stencil {
                folds: stencil.folds,
            };
        }

        if let Some(m) = dense_matrix.as_mut() {
            for (&col, &v) in &coeffs {
                m[(row, col)] = v;
            }
        } else if let Some(m) = coo_matrix.as_mut() {
            for (&col, &v) in &coeffs {
                m.push(row, col, v);
            }
        }
    }

    let mut warnings = Vec::new();
    if bc.all_neumann() {
        warnings.push(
            "all six faces are Neumann: constant fields are in the operator's null space, \
             so the assembled system is singular and direct solves will fail"
                .to_string(),
        );
    }

    let matrix = match (dense_matrix, coo_matrix) {
        (Some(m), _) => SystemMatrix::Dense(m),
        (_, Some(m)) => SystemMatrix::Coo(m),
        _ => unreachable!(),
    };
    Ok(LinearSystem {
        matrix,
        rhs,
        row_kinds,
        warnings,
    })
}

fn offset_node(node: NodeId, axis: usize, step_down: bool) -> NodeId {
    let mut coords = [node.i, node.j, node.k];
    if step_down {
        coords[axis] -= 1;
    } else {
        coords[axis] += 1;
    }
    NodeId::new(coords[0], coords[1], coords[2])
}

fn face_of(axis: usize, min_side: bool) -> Face {
    match (axis, min_side) {
        (0, true) => Face::XMin,
        (0, false) => Face::XMax,
        (1, true) => Face::YMin,
        (1, false) => Face::YMax,
        (2, true) => Face::ZMin,
        (2, false) => Face::ZMax,
        _ => unreachable!(),
    }
}

/// A witnessed breach of the centrosymmetry condition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CentroViolation {
    pub row: usize,
    pub col: usize,
    /// `a[row, col]`.
    pub value: f64,
    /// `a[n-1-row, n-1-col]`.
    pub mirrored: f64,
}

impl std::fmt::Display for CentroViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "a[{}, {}] = {} but its mirror entry is {} (|difference| = {:e})",
            self.row,
            self.col,
            self.value,
            self.mirrored,
            (self.value - self.mirrored).abs()
        )
    }
}

/// Verdict of a centrosymmetry check.
#[derive(Debug, Clone, PartialEq)]
pub struct CentroCheck {
    pub centrosymmetric: bool,
    /// Largest `|a[r,c] - a[n-1-r, n-1-c]|` over the whole matrix.
    pub max_deviation: f64,
    /// First violating entry in row-major order, if any.
    pub first_violation: Option<CentroViolation>,
}

/// Checks `a[r,c] = a[n-1-r, n-1-c]` for all entries, within `tol`.
///
/// Dense and triplet storages give identical verdicts; the reported first
/// violation is the row-major smallest offending entry in both cases.
pub fn is_centrosymmetric(matrix: &SystemMatrix, tol: f64) -> Result<CentroCheck> {
    if tol.is_nan() || tol < 0.0 {
        return Err(Error::Config(format!(
            "centrosymmetry tolerance must be non-negative, got {tol}"
        )));
    }
    if !matrix.is_square() {
        return Err(Error::NotSquare {
            nrows: matrix.nrows(),
            ncols: matrix.ncols(),
        });
    }
    let n = matrix.nrows();
    if !n.is_multiple_of(2) {
        return Err(Error::OddRank(n));
    }

    let mut max_deviation = 0.0_f64;
    let mut first_violation = None;
    let mut consider = |r: usize, c: usize, value: f64, mirrored: f64| {
        let deviation = (value - mirrored).abs();
        max_deviation = max_deviation.max(deviation);
        if deviation > tol && first_violation.is_none() {
            first_violation = Some(CentroViolation {
                row: r,
                col: c,
                value,
                mirrored,
            });
        }
    };

    match matrix {
        SystemMatrix::Dense(m) => {
            for r in 0..n {
                for c in 0..n {
                    consider(r, c, m[(r, c)], m[(n - 1 - r, n - 1 - c)]);
                }
            }
        }
        SystemMatrix::Coo(m) => {
            let entries = m.entry_map();
            // Visit every position that is nonzero on either end of a pair,
            // in row-major order, to mirror the dense scan exactly.
            let mut positions: BTreeSet<(usize, usize)> = BTreeSet::new();
            for &(r, c) in entries.keys() {
                positions.insert((r, c));
                positions.insert((n - 1 - r, n - 1 - c));
            }
            for (r, c) in positions {
                let value = entries.get(&(r, c)).copied().unwrap_or(0.0);
                let mirrored = entries.get(&(n - 1 - r, n - 1 - c)).copied().unwrap_or(0.0);
                consider(r, c, value, mirrored);
            }
        }
    }

    Ok(CentroCheck {
        centrosymmetric: first_violation.is_none(),
        max_deviation,
        first_violation,
    })
}

/// Reflects a per-node field (indexed by classical offset) across the
/// symmetry plane: `out(v) = in(mirror(v))`.
pub fn reflect_field(grid: &GridSpec, field: &[f64]) -> Result<Vec<f64>> {
    if field.len() != grid.node_count() {
        return Err(Error::DimensionMismatch(format!(
            "field has {} values but the grid has {} nodes",
            field.len(),
            grid.node_count()
        )));
    }
    let mut out = vec![0.0; field.len()];
    for node in grid.nodes() {
        let image = grid.mirror(node)?;
        out[grid.classical_offset(node)] = field[grid.classical_offset(image)];
    }
    Ok(out)
}

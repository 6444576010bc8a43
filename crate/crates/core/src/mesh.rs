//! Structured box grids with a planar symmetry, and the node numberings
//! built on top of them.
//!
//! The symmetry plane is perpendicular to the z axis and sits exactly halfway
//! between the two middle node layers, so `nz` must be even: no node may lie
//! on the plane itself. Reflecting a node across the plane is then a pure
//! index operation, `(i, j, k) -> (i, j, nz-1-k)`.

use crate::error::{Error, Result};

/// Grid coordinates of one mesh node, zero-based along each axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId {
    pub i: usize,
    pub j: usize,
    pub k: usize,
}

impl NodeId {
    pub fn new(i: usize, j: usize, k: usize) -> Self {
        NodeId { i, j, k }
    }
}

impl std::fmt::Display for NodeId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({}, {}, {})", self.i, self.j, self.k)
    }
}

/// Axis-aligned structured grid over a rectangular box.
///
/// Node `(i, j, k)` sits at `(i*hx, j*hy, k*hz)`. Constructed only through
/// [`GridSpec::new`], which enforces the symmetry requirements (`nz` even,
/// positive spacings), so a value of this type is always a valid grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    nx: usize,
    ny: usize,
    nz: usize,
    hx: f64,
    hy: f64,
    hz: f64,
}

impl GridSpec {
    /// Builds a grid, rejecting geometries that break the planar symmetry.
    ///
    /// `nz` odd is rejected outright rather than rounded: an odd layer count
    /// would put a node layer on the symmetry plane.
    pub fn new(nx: usize, ny: usize, nz: usize, hx: f64, hy: f64, hz: f64) -> Result<Self> {
        if nx < 1 || ny < 1 {
            return Err(Error::InvalidGrid(format!(
                "node counts must be at least 1 along x and y (got nx={nx}, ny={ny})"
            )));
        }
        if nz < 2 {
            return Err(Error::InvalidGrid(format!(
                "nz={nz}, but at least one node layer is needed on each side of the symmetry plane"
            )));
        }
        if !nz.is_multiple_of(2) {
            return Err(Error::InvalidGrid(format!(
                "nz={nz} is odd; the symmetry plane must fall between two node layers, so nz must be even"
            )));
        }
        for (h, axis) in [(hx, "hx"), (hy, "hy"), (hz, "hz")] {
            if !h.is_finite() || h <= 0.0 {
                return Err(Error::InvalidGrid(format!(
                    "{axis}={h} must be a positive finite spacing"
                )));
            }
        }
        Ok(GridSpec {
            nx,
            ny,
            nz,
            hx,
            hy,
            hz,
        })
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn nz(&self) -> usize {
        self.nz
    }

    pub fn hx(&self) -> f64 {
        self.hx
    }

    pub fn hy(&self) -> f64 {
        self.hy
    }

    pub fn hz(&self) -> f64 {
        self.hz
    }

    /// Total node count N' = nx*ny*nz. Always even.
    pub fn node_count(&self) -> usize {
        self.nx * self.ny * self.nz
    }

    /// Node count on one side of the symmetry plane, N = N'/2.
    pub fn half_count(&self) -> usize {
        self.node_count() / 2
    }

    pub fn contains(&self, node: NodeId) -> bool {
        node.i < self.nx && node.j < self.ny && node.k < self.nz
    }

    /// Physical position of a node.
    pub fn position(&self, node: NodeId) -> [f64; 3] {
        [
            node.i as f64 * self.hx,
            node.j as f64 * self.hy,
            node.k as f64 * self.hz,
        ]
    }

    /// z coordinate of the symmetry plane: (nz-1)*hz/2, between layers
    /// nz/2 - 1 and nz/2.
    pub fn symmetry_plane_z(&self) -> f64 {
        (self.nz - 1) as f64 * self.hz / 2.0
    }

    /// Reflects a node across the symmetry plane.
    ///
    /// An involution with no fixed points: `nz` even guarantees the image is
    /// always a different node.
    pub fn mirror(&self, node: NodeId) -> Result<NodeId> {
        if !self.contains(node) {
            return Err(Error::NodeOutOfRange {
                i: node.i,
                j: node.j,
                k: node.k,
                nx: self.nx,
                ny: self.ny,
                nz: self.nz,
            });
        }
        Ok(NodeId::new(node.i, node.j, self.nz - 1 - node.k))
    }

    /// Iterates all nodes in classical order: i fastest, then j, then k.
    pub fn nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        let (nx, ny, nz) = (self.nx, self.ny, self.nz);
        (0..nz).flat_map(move |k| {
            (0..ny).flat_map(move |j| (0..nx).map(move |i| NodeId::new(i, j, k)))
        })
    }

    /// Lexicographic offset i + j*nx + k*nx*ny; the classical index.
    pub fn classical_offset(&self, node: NodeId) -> usize {
        debug_assert!(self.contains(node));
        node.i + node.j * self.nx + node.k * self.nx * self.ny
    }
}

/// Node numbering scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    /// Lexicographic, layer by layer.
    Classical,
    /// Lower half lexicographic; each upper-half node gets the index
    /// complementary to its mirror image, so mirrored nodes always sum to
    /// N' - 1.
    Centrosymmetric,
}

impl std::fmt::Display for Scheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Scheme::Classical => write!(f, "classical"),
            Scheme::Centrosymmetric => write!(f, "centrosymmetric"),
        }
    }
}

/// Bijection between grid nodes and linear indices `0..node_count`.
#[derive(Debug, Clone)]
pub struct Numbering {
    scheme: Scheme,
    grid: GridSpec,
    forward: Vec<usize>,
    inverse: Vec<NodeId>,
}

impl Numbering {
    /// Builds the numbering for a grid.
    ///
    /// Both schemes agree on the lower half of the grid (k < nz/2), which
    /// occupies indices 0..N under either one.
    pub fn build(grid: &GridSpec, scheme: Scheme) -> Numbering {
        let n_total = grid.node_count();
        let half_layers = grid.nz() / 2;
        let mut forward = vec![usize::MAX; n_total];
        let mut inverse = vec![NodeId::new(0, 0, 0); n_total];
        for node in grid.nodes() {
            let offset = grid.classical_offset(node);
            let index = match scheme {
                Scheme::Classical => offset,
                Scheme::Centrosymmetric => {
                    if node.k < half_layers {
                        offset
                    } else {
                        let image = grid.mirror(node).expect("node comes from grid iteration");
                        n_total - 1 - grid.classical_offset(image)
                    }
                }
            };
            forward[offset] = index;
            inverse[index] = node;
        }
        debug_assert!(forward.iter().all(|&n| n < n_total));
        Numbering {
            scheme,
            grid: *grid,
            forward,
            inverse,
        }
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    /// Total index count N'.
    pub fn len(&self) -> usize {
        self.forward.len()
    }

    pub fn is_empty(&self) -> bool {
        self.forward.is_empty()
    }

    pub fn half_len(&self) -> usize {
        self.len() / 2
    }

    /// Linear index of a node. The node must belong to the grid.
    pub fn index_of(&self, node: NodeId) -> usize {
        debug_assert!(self.grid.contains(node));
        self.forward[self.grid.classical_offset(node)]
    }

    /// Node carrying a linear index.
    pub fn node_at(&self, index: usize) -> NodeId {
        self.inverse[index]
    }
}

/// Builds a roughly cubic grid with exactly `node_count` nodes and unit
/// spacings; used to size benchmark systems from a target N'.
///
/// Searches the factorizations `nx*ny*nz = node_count` with `nz` even and
/// picks the one with the smallest aspect ratio (ties broken toward small
/// `nz`). Odd counts are rejected since `nz` even forces N' even.
pub fn grid_for_node_count(node_count: usize) -> Result<GridSpec> {
    if node_count < 2 || !node_count.is_multiple_of(2) {
        return Err(Error::InvalidGrid(format!(
            "cannot build a symmetric grid with {node_count} nodes; the count must be even and at least 2"
        )));
    }
    let mut best: Option<(f64, usize, usize, usize)> = None;
    let mut nz = 2;
    while nz <= node_count {
        if node_count.is_multiple_of(nz) {
            let rest = node_count / nz;
            let mut nx = 1;
            while nx * nx <= rest {
                if rest.is_multiple_of(nx) {
                    let ny = rest / nx;
                    let hi = nx.max(ny).max(nz) as f64;
                    let lo = nx.min(ny).min(nz) as f64;
                    let score = hi / lo;
                    let candidate = (score, nz, nx, ny);
                    let better = match best {
                        None => true,
                        Some((s, z, _, _)) => score < s || (score == s && nz < z),
                    };
                    if better {
                        best = Some(candidate);
                    }
                }
                nx += 1;
            }
        }
        nz += 2;
    }
    let (_, nz, nx, ny) = best.expect("even counts always admit nz = 2");
    GridSpec::new(nx, ny, nz, 1.0, 1.0, 1.0)
}

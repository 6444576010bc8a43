//! Benchmark fixtures: seeded random systems in the mixed boundary layout
//! (Neumann on x_min and y_min, Dirichlet elsewhere), assembled under the
//! centrosymmetric numbering so both solver paths run on the same matrix.

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use centromesh::{
    assemble, grid_for_node_count, BcSpec, BcValue, CentroBlocks, Face, FaceBc, Numbering, Scheme,
    SourceField,
};

pub struct BenchSystem {
    pub dense: DMatrix<f64>,
    pub rhs: DVector<f64>,
    pub blocks: CentroBlocks,
}

impl BenchSystem {
    /// Builds a rank-`n_prime` system with seeded random boundary values and
    /// source term. `n_prime` must be even (the grid needs a symmetry plane).
    pub fn seeded(n_prime: usize, seed: u64) -> Self {
        let grid = grid_for_node_count(n_prime).expect("even benchmark size");
        let numbering = Numbering::build(&grid, Scheme::Centrosymmetric);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);

        let mut face_table = |face: Face| {
            let mut table = HashMap::new();
            for node in face.nodes(&grid) {
                table.insert(node, rng.random_range(-1.0..1.0));
            }
            BcValue::Table(table)
        };
        let bc = BcSpec::new(
            FaceBc::neumann(face_table(Face::XMin)),
            FaceBc::dirichlet(face_table(Face::XMax)),
            FaceBc::neumann(face_table(Face::YMin)),
            FaceBc::dirichlet(face_table(Face::YMax)),
            FaceBc::dirichlet(face_table(Face::ZMin)),
            FaceBc::dirichlet(face_table(Face::ZMax)),
        )
        .expect("mixed layout is symmetric");

        let mut rho_table = HashMap::new();
        for node in grid.nodes() {
            rho_table.insert(node, rng.random_range(-1.0..1.0));
        }
        let system = assemble(&grid, &numbering, &bc, &SourceField::PerNode(rho_table))
            .expect("benchmark grid assembles");
        let blocks =
            CentroBlocks::split(&system.matrix, 0.0).expect("assembled matrix is centrosymmetric");
        BenchSystem {
            dense: system.matrix.to_dense(),
            rhs: system.rhs,
            blocks,
        }
    }
}

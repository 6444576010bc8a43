//! Acceptance suite: every headline claim of the toolkit, run at its stated
//! tolerance, one PASS/FAIL line per criterion.
//!
//! Runs under `cargo test` as a plain binary (no harness) so the lines are
//! always printed; exits nonzero if any criterion fails.

use std::collections::HashMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use centromesh::*;
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type CriterionResult = std::result::Result<String, String>;
type Criterion = (&'static str, Box<dyn Fn() -> CriterionResult>);

fn main() {
    let criteria: Vec<Criterion> = vec![
        (
            "1 paper-example matrix is centrosymmetric only under the paired numbering",
            Box::new(paper_example_structure),
        ),
        (
            "2 interior stencil carries the integer coefficients",
            Box::new(interior_stencil_values),
        ),
        (
            "3 block inverse reaches 1e-10 and stays centrosymmetric",
            Box::new(block_inverse_accuracy),
        ),
        (
            "4 split solve matches the dense oracle on 100 random systems",
            Box::new(split_solve_equivalence),
        ),
        (
            "5 inverse storage is 2N^2 against 4N^2 dense (ratio 2.0)",
            Box::new(storage_ratio),
        ),
        (
            "6 split solve takes at most half the dense time at rank 1024",
            Box::new(runtime_ratio),
        ),
        (
            "7 discretization shows second-order convergence",
            Box::new(discretization_order),
        ),
        (
            "8 mirror-symmetric data yields a mirror-symmetric solution",
            Box::new(symmetric_solution),
        ),
    ];

    let mut failures = 0usize;
    for (name, run) in &criteria {
        match catch_unwind(AssertUnwindSafe(run)) {
            Ok(Ok(detail)) => println!("[PASS] {name}: {detail}"),
            Ok(Err(reason)) => {
                failures += 1;
                println!("[FAIL] {name}: {reason}");
            }
            Err(panic) => {
                failures += 1;
                let msg = panic
                    .downcast_ref::<String>()
                    .cloned()
                    .or_else(|| panic.downcast_ref::<&str>().map(|s| s.to_string()))
                    .unwrap_or_else(|| "panic".to_string());
                println!("[FAIL] {name}: panicked: {msg}");
            }
        }
    }
    println!(
        "acceptance: {}/{} criteria passed",
        criteria.len() - failures,
        criteria.len()
    );
    std::process::exit(if failures == 0 { 0 } else { 1 });
}

fn example_grid() -> GridSpec {
    GridSpec::new(3, 3, 4, 0.5, 1.0 / 3.0, 0.25).unwrap()
}

/// Neumann on x_min and y_min, Dirichlet on the other four faces.
fn mixed_types() -> [BcType; 6] {
    [
        BcType::Neumann,
        BcType::Dirichlet,
        BcType::Neumann,
        BcType::Dirichlet,
        BcType::Dirichlet,
        BcType::Dirichlet,
    ]
}

fn zero_bc(types: &[BcType; 6]) -> BcSpec {
    let f = |kind: BcType| FaceBc {
        kind,
        value: BcValue::Constant(0.0),
    };
    BcSpec::new(
        f(types[0]),
        f(types[1]),
        f(types[2]),
        f(types[3]),
        f(types[4]),
        f(types[5]),
    )
    .expect("type layout is symmetric")
}

fn random_face_tables(grid: &GridSpec, types: &[BcType; 6], rng: &mut ChaCha8Rng) -> BcSpec {
    let mut faces = Vec::with_capacity(6);
    for (face, &kind) in Face::ALL.into_iter().zip(types.iter()) {
        let mut table = HashMap::new();
        for node in face.nodes(grid) {
            table.insert(node, rng.random_range(-3.0..3.0));
        }
        faces.push(FaceBc {
            kind,
            value: BcValue::Table(table),
        });
    }
    let [a, b, c, d, e, f]: [FaceBc; 6] = faces.try_into().unwrap();
    BcSpec::new(a, b, c, d, e, f).expect("type layout is symmetric")
}

fn random_rho(grid: &GridSpec, rng: &mut ChaCha8Rng) -> SourceField {
    let mut table = HashMap::new();
    for node in grid.nodes() {
        table.insert(node, rng.random_range(-3.0..3.0));
    }
    SourceField::PerNode(table)
}

fn min_seconds<F: FnMut()>(runs: usize, mut f: F) -> f64 {
    let mut best = f64::INFINITY;
    for _ in 0..runs {
        let t = Instant::now();
        f();
        best = best.min(t.elapsed().as_secs_f64());
    }
    best
}

// Criterion 1: runtime < 1 s; centro numbering passes at tol 0, classical fails.
fn paper_example_structure() -> CriterionResult {
    let start = Instant::now();
    let grid = example_grid();
    if grid.node_count() != 36 || grid.half_count() != 18 {
        return Err("expected N' = 36, N = 18".to_string());
    }
    let bc = zero_bc(&mixed_types());
    let rho = SourceField::Constant(0.0);
    let centro = assemble(
        &grid,
        &Numbering::build(&grid, Scheme::Centrosymmetric),
        &bc,
        &rho,
    )
    .map_err(|e| e.to_string())?;
    let classical = assemble(
        &grid,
        &Numbering::build(&grid, Scheme::Classical),
        &bc,
        &rho,
    )
    .map_err(|e| e.to_string())?;
    let centro_check = is_centrosymmetric(&centro.matrix, 0.0).map_err(|e| e.to_string())?;
    let classical_check = is_centrosymmetric(&classical.matrix, 0.0).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed().as_secs_f64();
    if !centro_check.centrosymmetric {
        return Err(format!(
            "centrosymmetric numbering failed the exact check: {:?}",
            centro_check.first_violation
        ));
    }
    if classical_check.centrosymmetric {
        return Err("classical numbering unexpectedly passed the check".to_string());
    }
    if elapsed >= 1.0 {
        return Err(format!("took {elapsed:.3} s, budget is 1 s"));
    }
    let v = classical_check.first_violation.unwrap();
    Ok(format!(
        "centro exact at tol 0; classical violates at a[{}, {}]; {:.1} ms",
        v.row,
        v.col,
        elapsed * 1e3
    ))
}

// Criterion 2: off-diagonals {4, 4, 9, 9, 16, 16}, diagonal -58, exact.
fn interior_stencil_values() -> CriterionResult {
    let grid = example_grid();
    let numbering = Numbering::build(&grid, Scheme::Centrosymmetric);
    let system = assemble(
        &grid,
        &numbering,
        &zero_bc(&mixed_types()),
        &SourceField::Constant(0.0),
    )
    .map_err(|e| e.to_string())?;
    let a = system.matrix.to_dense();
    let mut interior_rows = 0;
    for (row, kind) in system.row_kinds.iter().enumerate() {
        if *kind != (RowKind::Stencil { folds: 0 }) {
            continue;
        }
        interior_rows += 1;
        if a[(row, row)] != -58.0 {
            return Err(format!(
                "row {row} diagonal is {}, expected -58",
                a[(row, row)]
            ));
        }
        let mut off: Vec<f64> = (0..a.ncols())
            .filter(|&c| c != row && a[(row, c)] != 0.0)
            .map(|c| a[(row, c)])
            .collect();
        off.sort_by(|x, y| x.partial_cmp(y).unwrap());
        if off != [4.0, 4.0, 9.0, 9.0, 16.0, 16.0] {
            return Err(format!("row {row} off-diagonals are {off:?}"));
        }
    }
    if interior_rows == 0 {
        return Err("no interior rows found".to_string());
    }
    Ok(format!(
        "{interior_rows} interior rows carry {{4, 4, 9, 9, 16, 16}} and -58 exactly"
    ))
}

fn check_inverse(label: &str, full: &DMatrix<f64>) -> std::result::Result<f64, String> {
    let blocks = CentroBlocks::split(&SystemMatrix::Dense(full.clone()), 1e-12)
        .map_err(|e| format!("{label}: {e}"))?;
    let inverse = centro_inverse(&blocks).map_err(|e| format!("{label}: {e}"))?;
    let reconstructed = inverse.reconstruct();
    let n = full.nrows();
    let product_error = (full * &reconstructed - DMatrix::identity(n, n))
        .iter()
        .fold(0.0_f64, |m, &v| m.max(v.abs()));
    if product_error > 1e-10 {
        return Err(format!("{label}: ||A*Ainv - I||_max = {product_error:e}"));
    }
    let max_abs = reconstructed.iter().fold(0.0_f64, |m, &v| m.max(v.abs()));
    let check = is_centrosymmetric(&SystemMatrix::Dense(reconstructed), 1e-10 * max_abs)
        .map_err(|e| format!("{label}: {e}"))?;
    if !check.centrosymmetric {
        return Err(format!(
            "{label}: inverse breaks centrosymmetry, deviation {:e}",
            check.max_deviation
        ));
    }
    Ok(product_error)
}

// Criterion 3: the worked-example A plus 50 random well-conditioned centrosymmetric
// matrices of rank <= 200.
fn block_inverse_accuracy() -> CriterionResult {
    let grid = example_grid();
    let numbering = Numbering::build(&grid, Scheme::Centrosymmetric);
    let system = assemble(
        &grid,
        &numbering,
        &zero_bc(&mixed_types()),
        &SourceField::Constant(0.0),
    )
    .map_err(|e| e.to_string())?;
    let mut worst_product = check_inverse("worked-example A", &system.matrix.to_dense())?;

    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for instance in 0..50 {
        let n = rng.random_range(1..=100usize);
        let mut b = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
        let c = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
        for i in 0..n {
            b[(i, i)] += 2.0 * n as f64 + 2.0;
        }
        let full = CentroBlocks::from_parts(b, c)
            .map_err(|e| e.to_string())?
            .reconstruct();
        let p = check_inverse(
            &format!("random instance {instance} (rank {})", 2 * n),
            &full,
        )?;
        worst_product = worst_product.max(p);
    }
    Ok(format!(
        "51 inverses within tolerance; worst ||A*Ainv - I||_max = {worst_product:.2e}"
    ))
}

// Criterion 4: 100 seeded random systems, rank <= 400, asymmetric data;
// split solve within 1e-10 relative of the dense oracle.
fn split_solve_equivalence() -> CriterionResult {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst = 0.0_f64;
    let mut largest_rank = 0;
    for instance in 0..100 {
        let (grid, types) = loop {
            let nx = rng.random_range(1..=7usize);
            let ny = rng.random_range(1..=7usize);
            let nz = 2 * rng.random_range(1..=4usize);
            if nx * ny * nz > 400 {
                continue;
            }
            let mut draw = |allowed: bool| {
                if allowed && rng.random_bool(0.5) {
                    BcType::Neumann
                } else {
                    BcType::Dirichlet
                }
            };
            let x_min = draw(nx >= 2);
            let x_max = draw(nx >= 2);
            let y_min = draw(ny >= 2);
            let y_max = draw(ny >= 2);
            let z_pair = draw(true);
            let mut types = [x_min, x_max, y_min, y_max, z_pair, z_pair];
            if types.iter().all(|&t| t == BcType::Neumann) {
                types[4] = BcType::Dirichlet;
                types[5] = BcType::Dirichlet;
            }
            let grid = GridSpec::new(
                nx,
                ny,
                nz,
                rng.random_range(0.2..1.0),
                rng.random_range(0.2..1.0),
                rng.random_range(0.2..1.0),
            )
            .expect("valid draw");
            break (grid, types);
        };
        let numbering = Numbering::build(&grid, Scheme::Centrosymmetric);
        let bc = random_face_tables(&grid, &types, &mut rng);
        let rho = random_rho(&grid, &mut rng);
        let system = assemble(&grid, &numbering, &bc, &rho).map_err(|e| e.to_string())?;
        largest_rank = largest_rank.max(system.rank());

        let (dense_x, _) =
            dense_solve(&system.matrix.to_dense(), &system.rhs).map_err(|e| e.to_string())?;
        let blocks = CentroBlocks::split(&system.matrix, 0.0)
            .map_err(|e| format!("instance {instance}: {e}"))?;
        let split_x =
            centro_solve(&blocks, &system.rhs).map_err(|e| format!("instance {instance}: {e}"))?;
        let rel = (&split_x - &dense_x).norm() / dense_x.norm();
        if rel > 1e-10 {
            return Err(format!(
                "instance {instance} (rank {}): relative difference {rel:e}",
                system.rank()
            ));
        }
        worst = worst.max(rel);
    }
    Ok(format!(
        "100 systems up to rank {largest_rank}; worst relative difference {worst:.2e}"
    ))
}

// Criterion 5: 2N^2 scalars for the block inverse, 4N^2 dense, ratio 2.0.
fn storage_ratio() -> CriterionResult {
    let grid = example_grid();
    let numbering = Numbering::build(&grid, Scheme::Centrosymmetric);
    let system = assemble(
        &grid,
        &numbering,
        &zero_bc(&mixed_types()),
        &SourceField::Constant(0.0),
    )
    .map_err(|e| e.to_string())?;
    let blocks = CentroBlocks::split(&system.matrix, 0.0).map_err(|e| e.to_string())?;
    let inverse = centro_inverse(&blocks).map_err(|e| e.to_string())?;
    let half = grid.half_count();
    let centro_scalars = inverse.scalar_count();
    let dense_scalars = dense_inverse_scalar_count(grid.node_count());
    if centro_scalars != 2 * half * half {
        return Err(format!(
            "block inverse holds {centro_scalars} scalars, expected 2N^2"
        ));
    }
    if dense_scalars != 4 * half * half {
        return Err(format!(
            "dense inverse holds {dense_scalars} scalars, expected 4N^2"
        ));
    }
    let ratio = dense_scalars as f64 / centro_scalars as f64;
    if ratio != 2.0 {
        return Err(format!("storage ratio is {ratio}, expected exactly 2.0"));
    }
    Ok(format!(
        "{dense_scalars} dense vs {centro_scalars} block scalars, ratio exactly 2.0"
    ))
}

// Criterion 6: at N' = 1024, split solve in at most half the dense time.
fn runtime_ratio() -> CriterionResult {
    let start = Instant::now();
    let grid = grid_for_node_count(1024).map_err(|e| e.to_string())?;
    let numbering = Numbering::build(&grid, Scheme::Centrosymmetric);
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let bc = random_face_tables(&grid, &mixed_types(), &mut rng);
    let rho = random_rho(&grid, &mut rng);
    let system = assemble(&grid, &numbering, &bc, &rho).map_err(|e| e.to_string())?;
    let dense = system.matrix.to_dense();

    let mut dense_seconds = f64::INFINITY;
    for _ in 0..3 {
        let (_, report) = dense_solve(&dense, &system.rhs).map_err(|e| e.to_string())?;
        dense_seconds = dense_seconds.min(report.factor_seconds + report.solve_seconds);
    }
    let centro_seconds = min_seconds(3, || {
        let blocks = CentroBlocks::split(&system.matrix, 0.0).expect("mixed layout");
        let factors = CentroFactors::new(&blocks).expect("nonsingular");
        factors.solve(&system.rhs).expect("solvable");
    });
    let total = start.elapsed().as_secs_f64();
    if total >= 30.0 {
        return Err(format!("criterion took {total:.1} s, budget is 30 s"));
    }
    let ratio = centro_seconds / dense_seconds;
    if ratio > 0.5 {
        return Err(format!(
            "split/dense time ratio {ratio:.3} exceeds 0.5 ({centro_seconds:.4} s vs {dense_seconds:.4} s)"
        ));
    }
    Ok(format!(
        "split {centro_seconds:.4} s vs dense {dense_seconds:.4} s (ratio {ratio:.3})"
    ))
}

// Criterion 7: order 2.0 +/- 0.3 between the two finest of three levels,
// coarsest about 9^3 nodes, mixed worked-example boundary layout.
fn discretization_order() -> CriterionResult {
    let levels = [
        GridSpec::new(9, 9, 10, 1.0 / 8.0, 1.0 / 8.0, 1.0 / 9.0).map_err(|e| e.to_string())?,
        GridSpec::new(17, 17, 20, 1.0 / 16.0, 1.0 / 16.0, 1.0 / 18.0).map_err(|e| e.to_string())?,
        GridSpec::new(33, 33, 40, 1.0 / 32.0, 1.0 / 32.0, 1.0 / 36.0).map_err(|e| e.to_string())?,
    ];
    let report = convergence_study(
        &ManufacturedSolution::product_of_sines(),
        &mixed_types(),
        &levels,
    )
    .map_err(|e| e.to_string())?;
    let order = report
        .finest_order()
        .ok_or_else(|| "need at least two levels".to_string())?;
    if (order - 2.0).abs() > 0.3 {
        return Err(format!(
            "observed order {order:.3} outside 2.0 +/- 0.3; errors {:?}",
            report
                .levels
                .iter()
                .map(|l| l.max_error)
                .collect::<Vec<_>>()
        ));
    }
    let errors: Vec<String> = report
        .levels
        .iter()
        .map(|l| format!("{:.3e}", l.max_error))
        .collect();
    Ok(format!(
        "errors [{}], finest-pair order {order:.3}",
        errors.join(", ")
    ))
}

// Criterion 8: mirror-symmetric data, mirror-symmetric solution.
fn symmetric_solution() -> CriterionResult {
    let grid = GridSpec::new(5, 4, 6, 0.3, 0.25, 0.2).map_err(|e| e.to_string())?;
    let numbering = Numbering::build(&grid, Scheme::Centrosymmetric);
    let plane_z = grid.symmetry_plane_z();
    // Values depend on z only through (z - plane)^2: invariant under the
    // mirror, deliberately not constant.
    let symmetric =
        move |x: f64, y: f64, z: f64| 1.5 + x + 2.0 * y * y + (z - plane_z) * (z - plane_z);
    let types = mixed_types();
    let mut faces = Vec::with_capacity(6);
    for (face, &kind) in Face::ALL.into_iter().zip(types.iter()) {
        let mut table = HashMap::new();
        for node in face.nodes(&grid) {
            let [x, y, z] = grid.position(node);
            table.insert(node, symmetric(x, y, z));
        }
        faces.push(FaceBc {
            kind,
            value: BcValue::Table(table),
        });
    }
    let [a, b, c, d, e, f]: [FaceBc; 6] = faces.try_into().unwrap();
    let bc = BcSpec::new(a, b, c, d, e, f).map_err(|e| e.to_string())?;
    let rho = SourceField::evaluator(symmetric);
    let system = assemble(&grid, &numbering, &bc, &rho).map_err(|e| e.to_string())?;
    let blocks = CentroBlocks::split(&system.matrix, 0.0).map_err(|e| e.to_string())?;
    let x = centro_solve(&blocks, &system.rhs).map_err(|e| e.to_string())?;
    let n = x.len();
    let max_abs = x.iter().fold(0.0_f64, |m, &v| m.max(v.abs()));
    let mut worst = 0.0_f64;
    for i in 0..n {
        worst = worst.max((x[i] - x[n - 1 - i]).abs());
    }
    if worst > 1e-9 * max_abs {
        return Err(format!(
            "max |x_n - x_(N'-1-n)| = {worst:e} exceeds 1e-9 * max|x| = {:e}",
            1e-9 * max_abs
        ));
    }
    Ok(format!(
        "max pairing defect {worst:.2e} against bound {:.2e}",
        1e-9 * max_abs
    ))
}

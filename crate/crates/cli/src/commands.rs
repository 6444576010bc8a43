//! The five subcommands. Each returns the process exit code: 0 success,
//! 1 verification failure, 2 configuration error (raised as `CliError`),
//! 3 numerical failure.

use std::collections::HashMap;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use nalgebra::DVector;
use rand::Rng;
use serde::Serialize;

use centromesh::{
    assemble, centro_inverse, dense_inverse_scalar_count, dense_solve, grid_for_node_count, io,
    is_centrosymmetric, relative_residual, BcSpec, BcValue, CentroBlocks, CentroCheck,
    CentroFactors, Face, FaceBc, GridSpec, LinearSystem, Numbering, RowKind, Scheme, SourceField,
    SystemMatrix, DENSE_STORAGE_LIMIT,
};

use crate::config::{ResolvedRun, SolverChoice};
use crate::{CliError, DumpRows};

#[derive(Serialize)]
struct GridJson {
    nx: usize,
    ny: usize,
    nz: usize,
    hx: f64,
    hy: f64,
    hz: f64,
}

impl GridJson {
    fn from(grid: &GridSpec) -> Self {
        GridJson {
            nx: grid.nx(),
            ny: grid.ny(),
            nz: grid.nz(),
            hx: grid.hx(),
            hy: grid.hy(),
            hz: grid.hz(),
        }
    }
}

#[derive(Serialize)]
struct ViolationJson {
    row: usize,
    col: usize,
    value: f64,
    mirrored: f64,
}

#[derive(Serialize)]
struct VerdictJson {
    centrosymmetric: bool,
    tolerance: f64,
    max_deviation: f64,
    first_violation: Option<ViolationJson>,
}

impl VerdictJson {
    fn from(check: &CentroCheck, tolerance: f64) -> Self {
        VerdictJson {
            centrosymmetric: check.centrosymmetric,
            tolerance,
            max_deviation: check.max_deviation,
            first_violation: check.first_violation.map(|v| ViolationJson {
                row: v.row,
                col: v.col,
                value: v.value,
                mirrored: v.mirrored,
            }),
        }
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut writer = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut writer, value)
        .map_err(|e| CliError::Config(format!("cannot serialize report: {e}")))?;
    writer.write_all(b"\n")?;
    writer.flush()?;
    Ok(())
}

/// The worked example: 3x3x4 grid, spacings 1/2, 1/3, 1/4, Neumann on x_min
/// and y_min, Dirichlet elsewhere. N' = 36, N = 18, integer coefficients.
pub fn paper_example_system(
    scheme: Scheme,
) -> Result<(GridSpec, Numbering, LinearSystem), CliError> {
    let grid = GridSpec::new(3, 3, 4, 0.5, 1.0 / 3.0, 0.25)?;
    let bc = BcSpec::new(
        FaceBc::neumann(BcValue::Constant(0.0)),
        FaceBc::dirichlet(BcValue::Constant(0.0)),
        FaceBc::neumann(BcValue::Constant(0.0)),
        FaceBc::dirichlet(BcValue::Constant(0.0)),
        FaceBc::dirichlet(BcValue::Constant(0.0)),
        FaceBc::dirichlet(BcValue::Constant(0.0)),
    )?;
    let numbering = Numbering::build(&grid, scheme);
    let system = assemble(&grid, &numbering, &bc, &SourceField::Constant(0.0))?;
    Ok((grid, numbering, system))
}

#[derive(Serialize)]
struct PaperExampleReport {
    grid: GridJson,
    n_total: usize,
    n_half: usize,
    classical: VerdictJson,
    centrosymmetric: VerdictJson,
    verdicts_match_expectation: bool,
}

pub fn paper_example(out: &Path, dump: Option<DumpRows>) -> Result<i32, CliError> {
    fs::create_dir_all(out)?;
    let (grid, centro_numbering, centro_system) = paper_example_system(Scheme::Centrosymmetric)?;
    let (_, _, classical_system) = paper_example_system(Scheme::Classical)?;

    io::write_matrix_market_file(&out.join("A_centrosymmetric.mtx"), &centro_system.matrix)?;
    io::write_dense_csv_file(&out.join("A_centrosymmetric.csv"), &centro_system.matrix)?;
    io::write_matrix_market_file(&out.join("A_classical.mtx"), &classical_system.matrix)?;
    io::write_dense_csv_file(&out.join("A_classical.csv"), &classical_system.matrix)?;

    let centro_check = is_centrosymmetric(&centro_system.matrix, 0.0)?;
    let classical_check = is_centrosymmetric(&classical_system.matrix, 0.0)?;
    let as_expected = centro_check.centrosymmetric && !classical_check.centrosymmetric;

    let report = PaperExampleReport {
        grid: GridJson::from(&grid),
        n_total: grid.node_count(),
        n_half: grid.half_count(),
        classical: VerdictJson::from(&classical_check, 0.0),
        centrosymmetric: VerdictJson::from(&centro_check, 0.0),
        verdicts_match_expectation: as_expected,
    };
    write_json(&out.join("verdicts.json"), &report)?;

    println!(
        "grid 3x3x4, spacings (1/2, 1/3, 1/4): N' = {}, N = {}",
        grid.node_count(),
        grid.half_count()
    );
    print_verdict("classical", &classical_check);
    print_verdict("centrosymmetric", &centro_check);
    println!("matrices and verdicts written to {}", out.display());

    if let Some(mode) = dump {
        dump_rows(&grid, &centro_numbering, &centro_system, mode);
    }

    Ok(if as_expected { 0 } else { 1 })
}

fn print_verdict(label: &str, check: &CentroCheck) {
    if check.centrosymmetric {
        println!("{label} numbering: centrosymmetric (tol 0)");
    } else {
        let v = check.first_violation.expect("failed check has a violation");
        println!(
            "{label} numbering: NOT centrosymmetric, first violation a[{}, {}] = {} vs {}",
            v.row, v.col, v.value, v.mirrored
        );
    }
}

fn dump_rows(grid: &GridSpec, numbering: &Numbering, system: &LinearSystem, mode: DumpRows) {
    let dense = system.matrix.to_dense();
    for row in 0..system.rank() {
        let kind = system.row_kinds[row];
        let keep = match mode {
            DumpRows::Interior => kind == RowKind::Stencil { folds: 0 },
            DumpRows::All => true,
        };
        if !keep {
            continue;
        }
        let node = numbering.node_at(row);
        let label = match kind {
            RowKind::Dirichlet => "dirichlet".to_string(),
            RowKind::Stencil { folds } => format!("stencil/{folds} folds"),
        };
        let entries: Vec<String> = (0..grid.node_count())
            .filter(|&c| dense[(row, c)] != 0.0)
            .map(|c| format!("{c}:{}", dense[(row, c)]))
            .collect();
        println!(
            "row {row} node ({}, {}, {}) [{label}]: {} | b = {}",
            node.i,
            node.j,
            node.k,
            entries.join(" "),
            system.rhs[row]
        );
    }
}

#[derive(Serialize)]
struct SolveRunReport {
    command: &'static str,
    solver: &'static str,
    numbering: String,
    grid: GridJson,
    rank: usize,
    seed: u64,
    assemble_seconds: f64,
    split_seconds: Option<f64>,
    factor_seconds: f64,
    solve_seconds: f64,
    relative_residual: f64,
    residual_tolerance: f64,
    factor_scalar_count: usize,
    dense_inverse_scalar_count: usize,
    storage_ratio: f64,
    warnings: Vec<String>,
    pass: bool,
}

pub fn solve(run: &ResolvedRun) -> Result<i32, CliError> {
    let grid = run.grid;
    if grid.node_count() > DENSE_STORAGE_LIMIT {
        return Err(CliError::Config(format!(
            "rank {} exceeds the direct-solver limit of {DENSE_STORAGE_LIMIT}",
            grid.node_count()
        )));
    }
    fs::create_dir_all(&run.out_dir)?;
    let numbering = Numbering::build(&grid, run.scheme);

    let t = Instant::now();
    let system = assemble(&grid, &numbering, &run.bc, &run.rho)?;
    let assemble_seconds = t.elapsed().as_secs_f64();
    let mut warnings = system.warnings.clone();

    let (x, split_seconds, factor_seconds, solve_seconds, factor_scalars) = match run.solver {
        SolverChoice::Dense => {
            let (x, report) = dense_solve(&system.matrix.to_dense(), &system.rhs)?;
            warnings.extend(report.warnings.clone());
            (
                x,
                None,
                report.factor_seconds,
                report.solve_seconds,
                report.factor_scalar_count,
            )
        }
        SolverChoice::Centro => {
            let split_tol = run.tolerances.centrosymmetry * system.matrix.max_abs();
            let t = Instant::now();
            let blocks = CentroBlocks::split(&system.matrix, split_tol)?;
            let split_seconds = t.elapsed().as_secs_f64();
            let t = Instant::now();
            let factors = CentroFactors::new(&blocks)?;
            let factor_seconds = t.elapsed().as_secs_f64();
            warnings.extend(factors.warnings().iter().cloned());
            let t = Instant::now();
            let x = factors.solve(&system.rhs)?;
            let solve_seconds = t.elapsed().as_secs_f64();
            if run.export_blocks {
                let (b_path, c_path) = io::write_centro_blocks(&run.out_dir.join("A"), &blocks)?;
                println!(
                    "blocks written to {} and {}",
                    b_path.display(),
                    c_path.display()
                );
            }
            (
                x,
                Some(split_seconds),
                factor_seconds,
                solve_seconds,
                factors.scalar_count(),
            )
        }
    };

    let residual = relative_residual(&system.matrix, &x, &system.rhs);
    let pass = residual <= run.tolerances.residual;
    let dense_scalars = dense_inverse_scalar_count(system.rank());
    let report = SolveRunReport {
        command: "solve",
        solver: run.solver.name(),
        numbering: run.scheme.to_string(),
        grid: GridJson::from(&grid),
        rank: system.rank(),
        seed: run.seed,
        assemble_seconds,
        split_seconds,
        factor_seconds,
        solve_seconds,
        relative_residual: residual,
        residual_tolerance: run.tolerances.residual,
        factor_scalar_count: factor_scalars,
        dense_inverse_scalar_count: dense_scalars,
        storage_ratio: dense_scalars as f64 / factor_scalars as f64,
        warnings,
        pass,
    };

    io::write_vector_file(&run.out_dir.join("solution.txt"), &x)?;
    write_json(&run.out_dir.join("report.json"), &report)?;

    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    println!(
        "solver {} on rank {}: relative residual {:.3e} (tolerance {:.1e}) -> {}",
        report.solver,
        report.rank,
        residual,
        run.tolerances.residual,
        if pass { "pass" } else { "FAIL" }
    );
    println!("solution and report written to {}", run.out_dir.display());
    Ok(if pass { 0 } else { 1 })
}

pub fn check(matrix_path: &Path, tol: f64) -> Result<i32, CliError> {
    let coo = io::read_matrix_market_file(matrix_path)?;
    let matrix = SystemMatrix::Coo(coo);
    let check = is_centrosymmetric(&matrix, tol)?;
    if check.centrosymmetric {
        println!(
            "{}: centrosymmetric within tol {tol} (max deviation {:e})",
            matrix_path.display(),
            check.max_deviation
        );
        Ok(0)
    } else {
        let v = check.first_violation.expect("failed check has a violation");
        println!(
            "{}: NOT centrosymmetric within tol {tol}; first violation a[{}, {}] = {} vs mirrored {} \
             (max deviation {:e})",
            matrix_path.display(),
            v.row,
            v.col,
            v.value,
            v.mirrored,
            check.max_deviation
        );
        Ok(1)
    }
}

struct BenchRow {
    n_prime: usize,
    nx: usize,
    ny: usize,
    nz: usize,
    seed: u64,
    dense_seconds: f64,
    centro_seconds: f64,
    time_ratio: f64,
    dense_inverse_scalars: usize,
    centro_inverse_scalars: usize,
    storage_ratio: f64,
    dense_residual: f64,
    centro_residual: f64,
}

/// Times the naive dense solver against the split solver on the same
/// assembled system, one row per configured size. Storage ratio must come
/// out as exactly 2.0; the time ratio is reported, not asserted.
pub fn bench(
    sizes: &[usize],
    seed: u64,
    out_dir: &Path,
    rng: &mut rand_chacha::ChaCha8Rng,
) -> Result<i32, CliError> {
    fs::create_dir_all(out_dir)?;
    let mut rows = Vec::new();
    for &n in sizes {
        if n > DENSE_STORAGE_LIMIT {
            return Err(CliError::Config(format!(
                "bench size {n} exceeds the dense limit of {DENSE_STORAGE_LIMIT}"
            )));
        }
        let grid = grid_for_node_count(n)?;
        let numbering = Numbering::build(&grid, Scheme::Centrosymmetric);
        let bc = random_mixed_bc(&grid, rng);
        let rho = random_source(&grid, rng);
        let system = assemble(&grid, &numbering, &bc, &rho)?;
        let dense = system.matrix.to_dense();

        let (dense_x, dense_report) = dense_solve(&dense, &system.rhs)?;
        let dense_seconds = dense_report.factor_seconds + dense_report.solve_seconds;

        let t = Instant::now();
        let blocks = CentroBlocks::split(&system.matrix, 0.0)?;
        let factors = CentroFactors::new(&blocks)?;
        let centro_x = factors.solve(&system.rhs)?;
        let centro_seconds = t.elapsed().as_secs_f64();

        let half = grid.half_count();
        let inverse = centro_inverse(&blocks)?;
        assert_eq!(inverse.scalar_count(), 2 * half * half);
        let dense_scalars = dense_inverse_scalar_count(grid.node_count());
        rows.push(BenchRow {
            n_prime: grid.node_count(),
            nx: grid.nx(),
            ny: grid.ny(),
            nz: grid.nz(),
            seed,
            dense_seconds,
            centro_seconds,
            time_ratio: centro_seconds / dense_seconds,
            dense_inverse_scalars: dense_scalars,
            centro_inverse_scalars: inverse.scalar_count(),
            storage_ratio: dense_scalars as f64 / inverse.scalar_count() as f64,
            dense_residual: relative_residual(&system.matrix, &dense_x, &system.rhs),
            centro_residual: relative_residual(&system.matrix, &centro_x, &system.rhs),
        });
    }

    let csv_path = out_dir.join("bench.csv");
    let mut writer = BufWriter::new(File::create(&csv_path)?);
    write!(
        writer,
        "n_prime,nx,ny,nz,seed,dense_seconds,centro_seconds,time_ratio,\
         dense_inverse_scalars,centro_inverse_scalars,storage_ratio,\
         dense_residual,centro_residual\r\n"
    )?;
    for r in &rows {
        write!(
            writer,
            "{},{},{},{},{},{},{},{},{},{},{},{},{}\r\n",
            r.n_prime,
            r.nx,
            r.ny,
            r.nz,
            r.seed,
            r.dense_seconds,
            r.centro_seconds,
            r.time_ratio,
            r.dense_inverse_scalars,
            r.centro_inverse_scalars,
            r.storage_ratio,
            r.dense_residual,
            r.centro_residual
        )?;
    }
    writer.flush()?;

    println!("seed {seed}");
    println!(
        "{:>7} {:>12} {:>12} {:>11} {:>14}",
        "N'", "dense [s]", "centro [s]", "time ratio", "storage ratio"
    );
    for r in &rows {
        println!(
            "{:>7} {:>12.6} {:>12.6} {:>11.3} {:>14.1}",
            r.n_prime, r.dense_seconds, r.centro_seconds, r.time_ratio, r.storage_ratio
        );
    }
    println!("plot data written to {}", csv_path.display());
    Ok(0)
}

fn random_mixed_bc(grid: &GridSpec, rng: &mut rand_chacha::ChaCha8Rng) -> BcSpec {
    let mut table = |face: Face| {
        let mut t = HashMap::new();
        for node in face.nodes(grid) {
            t.insert(node, rng.random_range(-1.0..1.0));
        }
        BcValue::Table(t)
    };
    let x_min = FaceBc::neumann(table(Face::XMin));
    let x_max = FaceBc::dirichlet(table(Face::XMax));
    let y_min = FaceBc::neumann(table(Face::YMin));
    let y_max = FaceBc::dirichlet(table(Face::YMax));
    let z_min = FaceBc::dirichlet(table(Face::ZMin));
    let z_max = FaceBc::dirichlet(table(Face::ZMax));
    BcSpec::new(x_min, x_max, y_min, y_max, z_min, z_max).expect("mixed layout is symmetric")
}

fn random_source(grid: &GridSpec, rng: &mut rand_chacha::ChaCha8Rng) -> SourceField {
    let mut table = HashMap::new();
    for node in grid.nodes() {
        table.insert(node, rng.random_range(-1.0..1.0));
    }
    SourceField::PerNode(table)
}

/// Writes the node table: index, grid coordinates, position, and the index
/// of the mirrored node, ordered by index.
pub fn mesh_dump(run: &ResolvedRun, out_override: Option<PathBuf>) -> Result<i32, CliError> {
    let out_dir = out_override.unwrap_or_else(|| run.out_dir.clone());
    fs::create_dir_all(&out_dir)?;
    let numbering = Numbering::build(&run.grid, run.scheme);
    let path = out_dir.join("mesh.csv");
    let mut writer = BufWriter::new(File::create(&path)?);
    write!(writer, "index,i,j,k,x,y,z,mirror_index\r\n")?;
    for index in 0..numbering.len() {
        let node = numbering.node_at(index);
        let [x, y, z] = run.grid.position(node);
        let mirror = numbering.index_of(run.grid.mirror(node)?);
        write!(
            writer,
            "{index},{},{},{},{x},{y},{z},{mirror}\r\n",
            node.i, node.j, node.k
        )?;
    }
    writer.flush()?;
    println!(
        "{} nodes ({} numbering) written to {}",
        numbering.len(),
        run.scheme,
        path.display()
    );
    Ok(0)
}

// Solution vectors are only read back in tests; keep the helper close to the
// writer it mirrors.
#[allow(dead_code)]
pub fn read_solution(path: &Path) -> Result<DVector<f64>, CliError> {
    Ok(io::read_vector_file(path)?)
}

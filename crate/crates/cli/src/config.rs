//! JSON run configuration: a single document describing the grid, boundary
//! conditions, source term, solver, and tolerances, so runs are archivable
//! and diffable. Every flag mirrors a config key and flags win.

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

use centromesh::{BcSpec, BcType, BcValue, Face, FaceBc, GridSpec, NodeId, Scheme, SourceField};

use crate::CliError;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub grid: GridConfig,
    #[serde(default)]
    pub numbering: NumberingChoice,
    #[serde(default)]
    pub bc: BcConfig,
    #[serde(default)]
    pub rho: ValueSource,
    #[serde(default)]
    pub solver: SolverChoice,
    #[serde(default = "default_out_dir")]
    pub out_dir: PathBuf,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default = "default_bench_sizes")]
    pub bench_sizes: Vec<usize>,
    #[serde(default)]
    pub export_blocks: bool,
}

fn default_out_dir() -> PathBuf {
    PathBuf::from("out")
}

fn default_bench_sizes() -> Vec<usize> {
    vec![256, 512, 1024]
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub nx: usize,
    pub ny: usize,
    pub nz: usize,
    pub hx: f64,
    pub hy: f64,
    pub hz: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NumberingChoice {
    Classical,
    #[default]
    Centrosymmetric,
}

impl NumberingChoice {
    pub fn scheme(self) -> Scheme {
        match self {
            NumberingChoice::Classical => Scheme::Classical,
            NumberingChoice::Centrosymmetric => Scheme::Centrosymmetric,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverChoice {
    #[default]
    Centro,
    Dense,
}

impl SolverChoice {
    pub fn name(self) -> &'static str {
        match self {
            SolverChoice::Centro => "centro",
            SolverChoice::Dense => "dense",
        }
    }
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    /// Solve passes when the relative residual stays below this.
    #[serde(default = "default_residual_tol")]
    pub residual: f64,
    /// Relative centrosymmetry tolerance (scaled by the largest entry).
    #[serde(default = "default_centro_tol")]
    pub centrosymmetry: f64,
}

fn default_residual_tol() -> f64 {
    1e-10
}

fn default_centro_tol() -> f64 {
    1e-12
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            residual: default_residual_tol(),
            centrosymmetry: default_centro_tol(),
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BcConfig {
    #[serde(default)]
    pub x_min: FaceConfig,
    #[serde(default)]
    pub x_max: FaceConfig,
    #[serde(default)]
    pub y_min: FaceConfig,
    #[serde(default)]
    pub y_max: FaceConfig,
    #[serde(default)]
    pub z_min: FaceConfig,
    #[serde(default)]
    pub z_max: FaceConfig,
}

/// One face entry; defaults to homogeneous Dirichlet.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FaceConfig {
    #[serde(rename = "type", default)]
    pub kind: BcKind,
    #[serde(default)]
    pub value: ValueSource,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BcKind {
    #[default]
    Dirichlet,
    Neumann,
}

impl BcKind {
    fn bc_type(self) -> BcType {
        match self {
            BcKind::Dirichlet => BcType::Dirichlet,
            BcKind::Neumann => BcType::Neumann,
        }
    }
}

/// Where values come from: a constant, an explicit per-node table, or a
/// seeded uniform draw.
#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ValueSource {
    Constant(f64),
    Table(Vec<NodeValue>),
    Random(RandomRange),
}

impl Default for ValueSource {
    fn default() -> Self {
        ValueSource::Constant(0.0)
    }
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeValue {
    pub i: usize,
    pub j: usize,
    pub k: usize,
    pub value: f64,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomRange {
    pub min: f64,
    pub max: f64,
}

impl RandomRange {
    fn validate(&self, what: &str) -> Result<(), CliError> {
        if self.min.is_nan() || self.max.is_nan() || self.min >= self.max {
            return Err(CliError::Config(format!(
                "{what}: random range needs min < max, got [{}, {}]",
                self.min, self.max
            )));
        }
        Ok(())
    }
}

/// A fully resolved run: core types only, every random draw already made.
pub struct ResolvedRun {
    pub grid: GridSpec,
    pub scheme: Scheme,
    pub bc: BcSpec,
    pub rho: SourceField,
    pub solver: SolverChoice,
    pub out_dir: PathBuf,
    pub seed: u64,
    pub tolerances: Tolerances,
    pub export_blocks: bool,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<RunConfig, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    /// Resolves the configuration into core types, drawing any `random`
    /// value sources from a generator seeded with `seed`. Draw order is
    /// fixed (rho first, then faces in x_min, x_max, y_min, y_max, z_min,
    /// z_max order; nodes in classical order), so a seed pins every value.
    pub fn resolve(&self, seed: u64) -> Result<ResolvedRun, CliError> {
        let g = &self.grid;
        let grid = GridSpec::new(g.nx, g.ny, g.nz, g.hx, g.hy, g.hz)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);

        let rho = match &self.rho {
            ValueSource::Constant(c) => SourceField::Constant(*c),
            ValueSource::Table(entries) => {
                SourceField::PerNode(table_from_entries(&grid, entries, "rho")?)
            }
            ValueSource::Random(range) => {
                range.validate("rho")?;
                let mut table = HashMap::new();
                for node in grid.nodes() {
                    table.insert(node, rng.random_range(range.min..range.max));
                }
                SourceField::PerNode(table)
            }
        };

        let face_configs = [
            (Face::XMin, &self.bc.x_min),
            (Face::XMax, &self.bc.x_max),
            (Face::YMin, &self.bc.y_min),
            (Face::YMax, &self.bc.y_max),
            (Face::ZMin, &self.bc.z_min),
            (Face::ZMax, &self.bc.z_max),
        ];
        let mut faces = Vec::with_capacity(6);
        for (face, cfg) in face_configs {
            let value = match &cfg.value {
                ValueSource::Constant(c) => BcValue::Constant(*c),
                ValueSource::Table(entries) => {
                    BcValue::Table(table_from_entries(&grid, entries, face.name())?)
                }
                ValueSource::Random(range) => {
                    range.validate(face.name())?;
                    let mut table = HashMap::new();
                    for node in face.nodes(&grid) {
                        table.insert(node, rng.random_range(range.min..range.max));
                    }
                    BcValue::Table(table)
                }
            };
            faces.push(FaceBc {
                kind: cfg.kind.bc_type(),
                value,
            });
        }
        let [x_min, x_max, y_min, y_max, z_min, z_max]: [FaceBc; 6] =
            faces.try_into().expect("six faces");
        let bc = BcSpec::new(x_min, x_max, y_min, y_max, z_min, z_max)?;

        Ok(ResolvedRun {
            grid,
            scheme: self.numbering.scheme(),
            bc,
            rho,
            solver: self.solver,
            out_dir: self.out_dir.clone(),
            seed,
            tolerances: self.tolerances,
            export_blocks: self.export_blocks,
        })
    }
}

fn table_from_entries(
    grid: &GridSpec,
    entries: &[NodeValue],
    what: &str,
) -> Result<HashMap<NodeId, f64>, CliError> {
    let mut table = HashMap::new();
    for e in entries {
        let node = NodeId::new(e.i, e.j, e.k);
        if !grid.contains(node) {
            return Err(CliError::Config(format!(
                "{what}: table entry {node} is outside the grid"
            )));
        }
        table.insert(node, e.value);
    }
    Ok(table)
}

/// Seed precedence: command-line flag, then CENTROMESH_SEED, then the config.
pub fn resolve_seed(flag: Option<u64>, config_seed: u64) -> Result<u64, CliError> {
    if let Some(seed) = flag {
        return Ok(seed);
    }
    match std::env::var("CENTROMESH_SEED") {
        Ok(text) => text.trim().parse().map_err(|_| {
            CliError::Config(format!(
                "CENTROMESH_SEED must be an unsigned integer, got '{text}'"
            ))
        }),
        Err(std::env::VarError::NotPresent) => Ok(config_seed),
        Err(e) => Err(CliError::Config(format!(
            "cannot read CENTROMESH_SEED: {e}"
        ))),
    }
}

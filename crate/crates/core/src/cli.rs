//! Command-line front end: TOML run configs in, JSON reports and CSV
//! trajectories out.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 bad config, 3 numerical failure.

use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::liouvillian::{build_w, build_w_tensor, spectrum, Branch, EigenClass, Liouvillian};
use crate::matrix::{eigenvalues, spectral_distance, vec_max_diff, ComplexMatrix, CubicMethod};
use crate::model::{AtomModel, DensityMatrix};
use crate::nlevel::{build_nlevel_w, check_conjecture, ConjectureOptions, DissipatorFamily, NLevelModel, Transition};
use crate::numerics::{StateTolerance, DEFAULT_TOL};
use crate::perturbation::exp_coherent;
use crate::special::cross_check_special;
use crate::steady::{
    asymptotic_projector, evolve_with, slowest_rate, steady_vector, EvolveMethod, EvolveOptions, SteadyMethod,
    SteadyOptions,
};

#[derive(Debug, Parser)]
#[command(
    name = "lindblad",
    version,
    about = "Two-level (and n-level) Lindblad master equation toolkit"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Run configuration (TOML).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output file; stdout if omitted.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Evolution method.
    #[arg(long, global = true, value_enum)]
    pub method: Option<MethodArg>,
    /// Residual tolerance for steady-state fixed points.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Final time (evolve) or propagation horizon (steady).
    #[arg(long, global = true)]
    pub t_max: Option<f64>,
    /// Number of time intervals; the grid has steps + 1 points.
    #[arg(long, global = true)]
    pub steps: Option<usize>,
    /// Seed for randomized checks.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Eigenvalues of W with classification.
    Spectrum,
    /// Trajectory as CSV.
    Evolve,
    /// Asymptotic state by every available method.
    Steady,
    /// Limit-matrix pattern report.
    Conjecture,
    /// Randomized cross-check battery.
    Verify,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MethodArg {
    Expm,
    Rk4,
    Perturbative,
}

impl From<MethodArg> for EvolveMethod {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Expm => EvolveMethod::Expm,
            MethodArg::Rk4 => EvolveMethod::Rk4,
            MethodArg::Perturbative => EvolveMethod::Perturbative,
        }
    }
}

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Numerical(String),
    Io(std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Io(_) => 1,
            Self::Config(_) => 2,
            Self::Numerical(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Config(msg) => write!(f, "invalid config: {msg}"),
            Self::Numerical(msg) => write!(f, "numerical failure: {msg}"),
            Self::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::Io(e)
    }
}

fn numerical(e: impl fmt::Display) -> CliError {
    CliError::Numerical(e.to_string())
}

// ---------------------------------------------------------------- config

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Complex {
    pub re: f64,
    pub im: f64,
}

impl From<C64> for Complex {
    fn from(z: C64) -> Self {
        Self {
            re: unsigned_zero(z.re),
            im: unsigned_zero(z.im),
        }
    }
}

/// Maps `-0.0` to `0.0` so reports do not depend on the sign of zero.
fn unsigned_zero(x: f64) -> f64 {
    x + 0.0
}

impl From<Complex> for C64 {
    fn from(z: Complex) -> Self {
        C64::new(z.re, z.im)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<MatrixData>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub evolve: Option<EvolveConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub numerics: Option<NumericsConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub conjecture: Option<ConjectureConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    pub energies: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<FamilyArg>,
    pub transitions: Vec<TransitionConfig>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyArg {
    PerTransition,
    Collective,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransitionConfig {
    pub lower: usize,
    pub upper: usize,
    pub mu: f64,
    pub nu: f64,
    pub gamma: Complex,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixData {
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl MatrixData {
    pub fn from_matrix(m: &ComplexMatrix) -> Self {
        let grab = |f: fn(&C64) -> f64| (0..m.rows()).map(|i| m.row(i).iter().map(f).collect()).collect();
        Self {
            re: grab(|z| unsigned_zero(z.re)),
            im: grab(|z| unsigned_zero(z.im)),
        }
    }

    pub fn from_vectorized(v: &[C64], n: usize) -> Self {
        Self::from_matrix(&ComplexMatrix::from_vec(n, n, v.to_vec()))
    }

    pub fn to_matrix(&self) -> Result<ComplexMatrix, String> {
        let n = self.re.len();
        if self.im.len() != n || self.re.iter().chain(&self.im).any(|r| r.len() != n) {
            return Err("re and im must both be square with the same size".into());
        }
        Ok(ComplexMatrix::from_fn(n, n, |i, j| {
            C64::new(self.re[i][j], self.im[i][j])
        }))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct EvolveConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub method: Option<MethodArg>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rk4_step: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct NumericsConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct ConjectureConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_horizon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
}

/// A validated model: the qubit when there are two levels and one
/// transition, the general form otherwise.
#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    Atom(AtomModel),
    NLevel(NLevelModel),
}

impl Model {
    pub fn liouvillian(&self) -> Liouvillian {
        match self {
            Self::Atom(m) => build_w(m),
            Self::NLevel(m) => build_nlevel_w(m),
        }
    }

    pub fn as_nlevel(&self) -> NLevelModel {
        match self {
            Self::Atom(m) => NLevelModel::from_atom(m),
            Self::NLevel(m) => m.clone(),
        }
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn model(&self) -> Result<Model, CliError> {
        let cfg = &self.model;
        if let Some(n) = cfg.n {
            if n != cfg.energies.len() {
                return Err(CliError::Config(format!(
                    "model.n = {n} but model.energies has {} entries",
                    cfg.energies.len()
                )));
            }
        }
        let transitions = cfg
            .transitions
            .iter()
            .map(|t| Transition {
                lower: t.lower,
                upper: t.upper,
                gamma: t.gamma.into(),
                mu: t.mu,
                nu: t.nu,
            })
            .collect::<Vec<_>>();
        let family = match cfg.family.unwrap_or(FamilyArg::PerTransition) {
            FamilyArg::PerTransition => DissipatorFamily::PerTransition,
            FamilyArg::Collective => DissipatorFamily::Collective,
        };
        let nlevel = NLevelModel::new(cfg.energies.clone(), transitions.clone(), family)
            .map_err(|e| CliError::Config(format!("model: {e}")))?;
        if nlevel.n() == 2 && transitions.len() == 1 {
            let t = transitions[0];
            let atom = AtomModel::new(cfg.energies[0], cfg.energies[1], t.gamma, t.mu, t.nu)
                .map_err(|e| CliError::Config(format!("model: {e}")))?;
            return Ok(Model::Atom(atom));
        }
        Ok(Model::NLevel(nlevel))
    }

    pub fn initial_state(&self, n: usize) -> Result<DensityMatrix, CliError> {
        match &self.initial {
            None => Ok(DensityMatrix::basis(n, 0)),
            Some(data) => {
                let m = data
                    .to_matrix()
                    .map_err(|e| CliError::Config(format!("initial: {e}")))?;
                if m.rows() != n {
                    return Err(CliError::Config(format!(
                        "initial: expected {n}x{n}, got {0}x{0}",
                        m.rows()
                    )));
                }
                DensityMatrix::new(m).map_err(|e| CliError::Config(format!("initial: {e}")))
            }
        }
    }

    fn tol(&self, cli: &Cli) -> Result<f64, CliError> {
        let tol = cli
            .tol
            .or(self.numerics.as_ref().and_then(|n| n.tol))
            .unwrap_or(DEFAULT_TOL);
        if !(tol > 0.0 && tol.is_finite()) {
            return Err(CliError::Config(format!("tol must be positive, got {tol}")));
        }
        Ok(tol)
    }
}

// ---------------------------------------------------------------- reports

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenEntry {
    pub value: Complex,
    pub class: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CubicData {
    /// `[a, b, c]` of `L^3 + a L^2 + b L + c`.
    pub coefficients: [f64; 3],
    pub lambda0_bracket: [f64; 2],
    /// `[L0, L+, L-]`.
    pub shifted_roots: Vec<Complex>,
    pub discriminant: f64,
    pub branch: String,
    pub method: CubicMethod,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumOutput {
    pub n: usize,
    pub eigenvalues: Vec<EigenEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cubic: Option<CubicData>,
}

fn class_name(c: EigenClass) -> &'static str {
    match c {
        EigenClass::TrivialZero => "trivial-zero",
        EigenClass::RealNegative => "real-negative",
        EigenClass::ComplexPairMember => "complex-pair-member",
    }
}

fn branch_name(b: Branch) -> &'static str {
    match b {
        Branch::Real => "real",
        Branch::ComplexPair => "complex-pair",
        Branch::Degenerate => "degenerate",
    }
}

pub fn spectrum_output(model: &Model) -> Result<SpectrumOutput, CliError> {
    let l = model.liouvillian();
    match model {
        Model::Atom(_) => {
            let r = spectrum(&l).map_err(numerical)?;
            Ok(SpectrumOutput {
                n: 2,
                eigenvalues: r
                    .eigenvalues
                    .iter()
                    .map(|e| EigenEntry {
                        value: e.value.into(),
                        class: class_name(e.class).into(),
                    })
                    .collect(),
                cubic: Some(CubicData {
                    coefficients: r.cubic,
                    lambda0_bracket: [r.lambda0_bracket.0, r.lambda0_bracket.1],
                    shifted_roots: r.shifted_roots.iter().map(|&z| z.into()).collect(),
                    discriminant: r.discriminant,
                    branch: branch_name(r.branch).into(),
                    method: r.method,
                }),
            })
        }
        Model::NLevel(_) => {
            let w = l.matrix();
            let scale = w.norm_fro().max(1.0);
            let mut ev = eigenvalues(w).map_err(numerical)?;
            ev.sort_by(|a, b| a.norm().total_cmp(&b.norm()));
            let (zero, rest) = ev.split_at_mut(1);
            rest.sort_by(|a, b| b.re.total_cmp(&a.re).then(b.im.total_cmp(&a.im)));
            let mut entries = vec![EigenEntry {
                value: zero[0].into(),
                class: class_name(EigenClass::TrivialZero).into(),
            }];
            for z in rest.iter() {
                let class = if z.im.abs() <= 1e-10 * scale {
                    EigenClass::RealNegative
                } else {
                    EigenClass::ComplexPairMember
                };
                entries.push(EigenEntry {
                    value: (*z).into(),
                    class: class_name(class).into(),
                });
            }
            Ok(SpectrumOutput {
                n: l.n(),
                eigenvalues: entries,
                cubic: None,
            })
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SteadyEntry {
    pub method: String,
    pub state: MatrixData,
    /// `||W vec(rho)|| / max(1, ||W||)`.
    pub residual: f64,
    pub purity: f64,
    pub max_coherence: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairDeviation {
    pub first: String,
    pub second: String,
    pub max_abs_diff: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CofactorData {
    pub cofactors: Vec<Complex>,
    pub det_o: Complex,
    pub one_relation_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SteadyOutput {
    pub n: usize,
    pub slowest_rate: f64,
    pub t_max: f64,
    pub tol: f64,
    pub methods: Vec<SteadyEntry>,
    pub pairwise: Vec<PairDeviation>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cofactor: Option<CofactorData>,
}

pub fn steady_output(model: &Model, cfg: &RunConfig, cli: &Cli) -> Result<SteadyOutput, CliError> {
    let l = model.liouvillian();
    let n = l.n();
    let tol = cfg.tol(cli)?;
    let rate = slowest_rate(&l).map_err(numerical)?;
    let t_max = cli.t_max.unwrap_or(50.0 / rate);
    let opts = SteadyOptions {
        t_max: Some(t_max),
        initial: Some(cfg.initial_state(n)?),
        tol,
    };
    let mut methods = vec![];
    if matches!(model, Model::Atom(_)) {
        methods.push((SteadyMethod::Cofactor, "cofactor"));
    }
    methods.push((SteadyMethod::NullSpace, "null-space"));
    methods.push((SteadyMethod::Propagate, "propagate"));

    let w = l.matrix();
    let mut entries = vec![];
    let mut vectors = vec![];
    for (method, name) in methods {
        let v = steady_vector(&l, method, &opts).map_err(numerical)?;
        let residual = crate::matrix::vec_norm(&w.mul_vec(&v)) / w.norm_fro().max(1.0);
        if residual > tol {
            return Err(CliError::Numerical(format!(
                "{name}: fixed-point residual {residual:.3e} exceeds {tol:e}"
            )));
        }
        let rho = DensityMatrix::from_vectorized(&v, &StateTolerance::PROPAGATED)
            .map_err(|e| CliError::Numerical(format!("{name}: {e}")))?;
        entries.push(SteadyEntry {
            method: name.into(),
            state: MatrixData::from_matrix(rho.matrix()),
            residual,
            purity: rho.purity(),
            max_coherence: rho.max_coherence(),
        });
        vectors.push(v);
    }
    let mut pairwise = vec![];
    for i in 0..entries.len() {
        for j in i + 1..entries.len() {
            pairwise.push(PairDeviation {
                first: entries[i].method.clone(),
                second: entries[j].method.clone(),
                max_abs_diff: vec_max_diff(&vectors[i], &vectors[j]),
            });
        }
    }
    let cofactor = match model {
        Model::Atom(_) => {
            let p = asymptotic_projector(&l).map_err(numerical)?;
            Some(CofactorData {
                cofactors: p.cofactors.iter().map(|&z| z.into()).collect(),
                det_o: p.det_o.into(),
                one_relation_residual: p.one_relation_residual(),
            })
        }
        Model::NLevel(_) => None,
    };
    Ok(SteadyOutput {
        n,
        slowest_rate: rate,
        t_max,
        tol,
        methods: entries,
        pairwise,
        cofactor,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConjectureOutput {
    pub n: usize,
    pub family: FamilyArg,
    pub t_horizon: f64,
    pub gap: f64,
    pub pattern_pass: bool,
    pub equal_final_states_pass: bool,
    pub max_pattern_violation: f64,
    pub max_state_discrepancy: f64,
    pub projector_discrepancy: f64,
    pub final_state: MatrixData,
    pub limit_matrix: MatrixData,
}

pub fn conjecture_output(model: &Model, cfg: &RunConfig, cli: &Cli) -> Result<ConjectureOutput, CliError> {
    let m = model.as_nlevel();
    let section = cfg.conjecture.clone().unwrap_or_default();
    let defaults = ConjectureOptions::default();
    let opts = ConjectureOptions {
        t_horizon: cli.t_max.or(section.t_horizon),
        tol: cli.tol.or(section.tol).unwrap_or(defaults.tol),
    };
    let r = check_conjecture(&m, &opts).map_err(numerical)?;
    let lm = &r.limit_matrix;
    Ok(ConjectureOutput {
        n: r.n,
        family: match m.family() {
            DissipatorFamily::PerTransition => FamilyArg::PerTransition,
            DissipatorFamily::Collective => FamilyArg::Collective,
        },
        t_horizon: r.t_horizon,
        gap: r.gap,
        pattern_pass: r.pattern_pass,
        equal_final_states_pass: r.equal_final_states_pass,
        max_pattern_violation: r.max_pattern_violation,
        max_state_discrepancy: r.max_state_discrepancy,
        projector_discrepancy: r.projector_discrepancy,
        final_state: MatrixData::from_vectorized(&r.final_state, r.n),
        limit_matrix: MatrixData::from_matrix(lm),
    })
}

/// Sample times `k t_max / steps`, `k = 0..=steps`.
pub fn time_grid(t_max: f64, steps: usize) -> Result<Vec<f64>, CliError> {
    if !(t_max >= 0.0 && t_max.is_finite()) {
        return Err(CliError::Config(format!("t_max must be non-negative, got {t_max}")));
    }
    if steps == 0 {
        return Ok(vec![0.0]);
    }
    if t_max == 0.0 {
        return Err(CliError::Config("t_max must be positive when steps > 0".into()));
    }
    Ok((0..=steps).map(|k| t_max * k as f64 / steps as f64).collect())
}

pub fn csv_header(n: usize) -> Vec<String> {
    let mut h = vec!["t".to_string()];
    if n == 2 {
        for name in ["a", "b", "bbar", "d"] {
            h.push(format!("{name}_re"));
            h.push(format!("{name}_im"));
        }
    } else {
        for i in 0..n {
            for j in 0..n {
                h.push(format!("r{i}{j}_re"));
                h.push(format!("r{i}{j}_im"));
            }
        }
    }
    h
}

pub fn evolve_csv(model: &Model, cfg: &RunConfig, cli: &Cli) -> Result<Vec<u8>, CliError> {
    let l = model.liouvillian();
    let section = cfg.evolve.clone().unwrap_or_default();
    let t_max = cli.t_max.or(section.t_max).unwrap_or(10.0);
    let steps = cli.steps.or(section.steps).unwrap_or(100);
    let method: EvolveMethod = cli.method.or(section.method).unwrap_or(MethodArg::Expm).into();
    if method == EvolveMethod::Perturbative && l.atom().is_none() {
        return Err(CliError::Config("method perturbative needs a two-level model".into()));
    }
    let grid = time_grid(t_max, steps)?;
    let rho0 = cfg.initial_state(l.n())?;
    let opts = EvolveOptions {
        rk4_step: section.rk4_step,
    };
    let traj = evolve_with(&l, &rho0, &grid, method, &opts).map_err(numerical)?;
    traj.check(&StateTolerance::PROPAGATED)
        .map_err(|(k, e)| CliError::Numerical(format!("sample {k} (t = {}): {e}", traj.times[k])))?;

    let mut wtr = csv::Writer::from_writer(vec![]);
    let io = |e: csv::Error| CliError::Io(std::io::Error::other(e));
    wtr.write_record(csv_header(l.n())).map_err(io)?;
    for (t, s) in traj.times.iter().zip(&traj.states) {
        let mut row = vec![t.to_string()];
        for z in s {
            row.push(unsigned_zero(z.re).to_string());
            row.push(unsigned_zero(z.im).to_string());
        }
        wtr.write_record(&row).map_err(io)?;
    }
    wtr.into_inner().map_err(|e| CliError::Io(e.into_error()))
}

// ---------------------------------------------------------------- verify

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub draws: usize,
    pub max_error: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyOutput {
    pub seed: u64,
    pub checks: Vec<CheckResult>,
    pub pass: bool,
}

/// Draw ranges for random two-level models.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DrawRanges {
    pub splitting: (f64, f64),
    pub gamma_abs: (f64, f64),
    pub rate: (f64, f64),
}

impl Default for DrawRanges {
    fn default() -> Self {
        Self {
            splitting: (0.05, 2.0),
            gamma_abs: (0.05, 2.0),
            rate: (0.05, 2.0),
        }
    }
}

/// Random qubit with `e0` in `[-1, 1]` and uniform coupling phase.
pub fn draw_atom<R: Rng>(rng: &mut R, ranges: &DrawRanges) -> AtomModel {
    let e0 = rng.gen_range(-1.0..1.0);
    let split = rng.gen_range(ranges.splitting.0..=ranges.splitting.1);
    let g = C64::from_polar(
        rng.gen_range(ranges.gamma_abs.0..=ranges.gamma_abs.1),
        rng.gen_range(0.0..std::f64::consts::TAU),
    );
    let mu = rng.gen_range(ranges.rate.0..=ranges.rate.1);
    let nu = rng.gen_range(ranges.rate.0..=ranges.rate.1);
    AtomModel::new(e0, e0 + split, g, mu, nu).expect("draw ranges are valid")
}

pub const VERIFY_DRAWS: usize = 200;

pub fn verify_output(seed: u64) -> Result<VerifyOutput, CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ranges = DrawRanges::default();
    let mut checks = vec![];
    let mut record = |name: &str, errors: Vec<f64>, tolerance: f64| {
        let max_error = errors.iter().copied().fold(0.0, f64::max);
        checks.push(CheckResult {
            name: name.into(),
            draws: errors.len(),
            max_error,
            tolerance,
            pass: errors.iter().all(|e| *e <= tolerance),
        });
    };

    let models: Vec<AtomModel> = (0..VERIFY_DRAWS).map(|_| draw_atom(&mut rng, &ranges)).collect();

    record(
        "w-construction",
        models
            .iter()
            .map(|m| build_w(m).matrix().max_abs_diff(&build_w_tensor(m)))
            .collect(),
        1e-14,
    );

    let mut spec_err = vec![];
    let mut steady_err = vec![];
    let mut relation_err = vec![];
    let mut crow_err = vec![];
    for m in &models {
        let l = build_w(m);
        let a = spectrum(&l).map_err(numerical)?.values();
        let b = eigenvalues(l.matrix()).map_err(numerical)?;
        spec_err.push(spectral_distance(&a, &b));

        let opts = SteadyOptions::default();
        let vs: Vec<Vec<C64>> = [SteadyMethod::Cofactor, SteadyMethod::NullSpace, SteadyMethod::Propagate]
            .iter()
            .map(|&k| steady_vector(&l, k, &opts))
            .collect::<Result<_, _>>()
            .map_err(numerical)?;
        steady_err.push(
            vec_max_diff(&vs[0], &vs[1])
                .max(vec_max_diff(&vs[0], &vs[2]))
                .max(vec_max_diff(&vs[1], &vs[2])),
        );
        relation_err.push(asymptotic_projector(&l).map_err(numerical)?.one_relation_residual());

        let t = rng.gen_range(0.0..10.0);
        let sums = exp_coherent(m, t).column_sums();
        let want = [1.0, 0.0, 0.0, 1.0].map(|x| C64::new(x, 0.0));
        crow_err.push(vec_max_diff(&sums, &want));
    }
    record("spectrum-vs-qr", spec_err, 1e-8);
    record("steady-three-ways", steady_err, 1e-7);
    record("one-relation", relation_err, 1e-10);
    record("c-row-identities", crow_err, 1e-12);

    let mut special_err = vec![];
    while special_err.len() < VERIFY_DRAWS {
        let m = draw_atom(&mut rng, &ranges);
        let deg = AtomModel::new(m.e0(), m.e0(), m.gamma(), m.mu(), m.nu()).expect("valid");
        let disc = (0.5 * (deg.mu() + deg.nu())).powi(2) - 16.0 * deg.gamma().norm_sqr();
        if disc.abs() < 1e-3 {
            continue;
        }
        let r = cross_check_special(&deg).map_err(numerical)?;
        let worst = r
            .residuals
            .iter()
            .copied()
            .fold(r.max_eigenvalue_discrepancy.max(r.max_subspace_angle), f64::max);
        special_err.push(worst);
    }
    record("special-case", special_err, 1e-8);

    let pass = checks.iter().all(|c| c.pass);
    Ok(VerifyOutput { seed, checks, pass })
}

// ---------------------------------------------------------------- driver

fn to_json<T: Serialize>(value: &T) -> Vec<u8> {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s.into_bytes()
}

/// Output bytes of one command.
pub fn execute(cli: &Cli) -> Result<Vec<u8>, CliError> {
    if cli.command == Command::Verify {
        let out = verify_output(cli.seed)?;
        let bytes = to_json(&out);
        if !out.pass {
            let failed: Vec<&str> = out.checks.iter().filter(|c| !c.pass).map(|c| c.name.as_str()).collect();
            return Err(CliError::Numerical(format!(
                "checks failed: {}\n{}",
                failed.join(", "),
                String::from_utf8_lossy(&bytes)
            )));
        }
        return Ok(bytes);
    }
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| CliError::Config("--config is required for this command".into()))?;
    let cfg = RunConfig::load(path)?;
    let model = cfg.model()?;
    match cli.command {
        Command::Spectrum => Ok(to_json(&spectrum_output(&model)?)),
        Command::Steady => Ok(to_json(&steady_output(&model, &cfg, cli)?)),
        Command::Conjecture => Ok(to_json(&conjecture_output(&model, &cfg, cli)?)),
        Command::Evolve => evolve_csv(&model, &cfg, cli),
        Command::Verify => unreachable!(),
    }
}

/// Run a command and write its output to `--out` or stdout.
pub fn run(cli: &Cli) -> Result<(), CliError> {
    let bytes = execute(cli)?;
    match &cli.out {
        Some(path) => std::fs::write(path, bytes)?,
        None => std::io::stdout().lock().write_all(&bytes)?,
    }
    Ok(())
}

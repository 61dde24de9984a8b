//! Named experiments built from the solver, diagnostics and norm machinery, and the run
//! driver that writes their tables, snapshots and manifest.

use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bourgain::bilinear::{band_ladder, BilinearConfig};
use crate::bourgain::embedding::{embedding_suite, f_w_scan, intersection_suite, lattice_scan, FieldEnsemble};
use crate::bourgain::kernels::kernel_suite;
use crate::bourgain::linear_estimates::{
    duhamel_scaling, free_evolution_constancy, random_band_limited, DuhamelConfig, FreeEvolutionConfig,
};
use crate::bourgain::membership::{membership_ladder, Datum, MembershipConfig};
use crate::bourgain::nonequivalence::{nonequivalence_demo, NonequivalenceConfig};
use crate::diagnostics::{sobolev_norm, DiagnosticRecord, DriftMonitor, InvariantSet};
use crate::error::{Error, Result};
use crate::grid::{GridSpec, SpectralField};
use crate::io::{read_snapshot, write_csv, write_snapshot, Cell, Table};
use crate::quadrature::{loglog_slope, QuadSpec};
use crate::solver::{picard_iterate, simulate, PicardOptions, StepperConfig};
use crate::systems::{hs_as_kdv, State, SystemSpec};
use crate::transforms::{scale_field, scaling_map, SpaceTimeSource};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Simulate,
    Diagnose,
    LipschitzProbe,
    ScalingProbe,
    PicardStudy,
    ConvergenceStudy,
    BourgainSuite,
    KernelSuite,
    Nonequivalence,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Simulate => "simulate",
            ExperimentKind::Diagnose => "diagnose",
            ExperimentKind::LipschitzProbe => "lipschitz_probe",
            ExperimentKind::ScalingProbe => "scaling_probe",
            ExperimentKind::PicardStudy => "picard_study",
            ExperimentKind::ConvergenceStudy => "convergence_study",
            ExperimentKind::BourgainSuite => "bourgain_suite",
            ExperimentKind::KernelSuite => "kernel_suite",
            ExperimentKind::Nonequivalence => "nonequivalence",
        }
    }
}

/// Spatial profile of one initial component.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Profile {
    Zero,
    /// `A e^{−(x−c)²/w²}`.
    Gaussian {
        amplitude: f64,
        width: f64,
        center: f64,
    },
    /// `A (1 − 2(x/w)²) e^{−(x/w)²}`, whose transform vanishes to second order at zero.
    MexicanHat {
        amplitude: f64,
        width: f64,
    },
    /// `A sech²((x−c)/w)`.
    Sech2 {
        amplitude: f64,
        width: f64,
        center: f64,
    },
    /// One-soliton of `w_t + w_xxx + 6ww_x = 0` at `t = 0`: `(c/2) sech²(√c (x − x₀)/2)`.
    KdvSoliton {
        speed: f64,
        center: f64,
    },
    /// `A sin(kx)`; `k` must be a lattice wavenumber.
    Sine {
        amplitude: f64,
        wavenumber: f64,
    },
}

impl Profile {
    pub fn validate(&self, grid: &GridSpec) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        match *self {
            Profile::Gaussian { width, .. } | Profile::MexicanHat { width, .. } | Profile::Sech2 { width, .. }
                if !(width > 0.0) =>
            {
                bad(format!("profile width must be positive, got {width}"))
            }
            Profile::KdvSoliton { speed, .. } if !(speed > 0.0) => {
                bad(format!("soliton speed must be positive, got {speed}"))
            }
            Profile::Sine { wavenumber, .. } => {
                let m = wavenumber * grid.period() / (2.0 * PI);
                if (m - m.round()).abs() > 1e-9 {
                    bad(format!(
                        "wavenumber {wavenumber} is not periodic on period {}",
                        grid.period()
                    ))
                } else {
                    Ok(())
                }
            }
            _ => Ok(()),
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            Profile::Zero => 0.0,
            Profile::Gaussian {
                amplitude,
                width,
                center,
            } => amplitude * (-((x - center) / width).powi(2)).exp(),
            Profile::MexicanHat { amplitude, width } => {
                let r = (x / width).powi(2);
                amplitude * (1.0 - 2.0 * r) * (-r).exp()
            }
            Profile::Sech2 {
                amplitude,
                width,
                center,
            } => amplitude / ((x - center) / width).cosh().powi(2),
            Profile::KdvSoliton { speed, center } => 0.5 * speed / (0.5 * speed.sqrt() * (x - center)).cosh().powi(2),
            Profile::Sine { amplitude, wavenumber } => amplitude * (wavenumber * x).sin(),
        }
    }

    pub fn sample(&self, grid: &GridSpec) -> SpectralField {
        SpectralField::from_fn(grid, |x| self.eval(x))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialData {
    pub u: Profile,
    pub v: Profile,
}

impl Default for InitialData {
    fn default() -> Self {
        let w = 2f64.sqrt();
        Self {
            u: Profile::Gaussian {
                amplitude: 1.0,
                width: w,
                center: 0.0,
            },
            v: Profile::Gaussian {
                amplitude: 0.5,
                width: w,
                center: 1.0,
            },
        }
    }
}

impl InitialData {
    pub fn state(&self, grid: &GridSpec, scale: f64) -> Result<State> {
        self.u.validate(grid)?;
        self.v.validate(grid)?;
        Ok(State {
            u: self.u.sample(grid).scale(scale),
            v: self.v.sample(grid).scale(scale),
            t: 0.0,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub n: usize,
    pub period: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self { n: 512, period: 40.0 }
    }
}

impl GridConfig {
    pub fn build(&self) -> Result<GridSpec> {
        if self.n > 1 << 20 {
            return Err(Error::Config(format!("grid size {} is beyond desk scale", self.n)));
        }
        GridSpec::new(self.n, self.period)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimulateKnobs {
    /// Snapshots spread evenly over the stored states, endpoints included.
    pub snapshots: usize,
}

impl Default for SimulateKnobs {
    fn default() -> Self {
        Self { snapshots: 2 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct DiagnoseKnobs {
    /// State to diagnose; the configured initial data when absent.
    pub snapshot: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LipschitzKnobs {
    /// Perturbation sizes relative to the data norm.
    pub deltas: Vec<f64>,
    pub horizons: Vec<f64>,
    /// Frequency band of the random perturbation directions.
    pub direction_band: f64,
    /// Allowed relative change of the ratio between the two smallest perturbations.
    pub tolerance: f64,
}

impl Default for LipschitzKnobs {
    fn default() -> Self {
        Self {
            deltas: vec![1e-1, 1e-2, 1e-3, 1e-4, 1e-5],
            horizons: vec![0.25, 0.5, 1.0],
            direction_band: 2.0,
            tolerance: 0.05,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScalingKnobs {
    pub lambda: f64,
    pub final_time: f64,
    pub tolerance: f64,
    pub datum: Profile,
    pub table_grid: GridConfig,
    pub lambdas: Vec<f64>,
    /// Smallest `λ` entering the exponent fit.
    pub fit_min_lambda: f64,
    pub indices: Vec<f64>,
    /// Indices whose fitted exponent must match `3/2 + s`.
    pub checked_indices: Vec<f64>,
    pub exponent_tolerance: f64,
}

impl Default for ScalingKnobs {
    fn default() -> Self {
        Self {
            lambda: 2.0,
            final_time: 0.25,
            tolerance: 1e-6,
            datum: Profile::MexicanHat {
                amplitude: 1.0,
                width: 1.0,
            },
            table_grid: GridConfig { n: 1024, period: 40.0 },
            lambdas: vec![1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0],
            fit_min_lambda: 8.0,
            indices: vec![-1.5, -1.0, -0.75, 0.0, 1.0],
            checked_indices: vec![-1.5, 1.0],
            exponent_tolerance: 0.05,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PicardKnobs {
    pub grid: GridConfig,
    pub final_time: f64,
    pub iterations: usize,
    pub time_resolution: usize,
    /// Multipliers applied to the initial data.
    pub amplitudes: Vec<f64>,
    pub agreement_tolerance: f64,
    /// Fitted ratios below this count as clearly contracting.
    pub contraction_limit: f64,
    pub cutoff: bool,
}

impl Default for PicardKnobs {
    fn default() -> Self {
        Self {
            grid: GridConfig {
                n: 64,
                period: 8.0 * PI,
            },
            final_time: 1.0,
            iterations: 30,
            time_resolution: 4001,
            amplitudes: vec![0.1, 0.5, 1.0, 2.0, 5.0],
            agreement_tolerance: 1e-6,
            contraction_limit: 0.9,
            cutoff: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolitonKnobs {
    pub enabled: bool,
    pub speed: f64,
    /// Dispersion coefficient of the Hirota–Satsuma system carrying the soliton.
    pub a: f64,
    pub grid: GridConfig,
    pub dt: f64,
    pub tolerance: f64,
}

impl Default for SolitonKnobs {
    fn default() -> Self {
        Self {
            enabled: true,
            speed: 4.0,
            a: 1.0,
            grid: GridConfig { n: 256, period: 40.0 },
            dt: 5e-4,
            tolerance: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConvergenceKnobs {
    pub grid: GridConfig,
    pub final_time: f64,
    pub dts: Vec<f64>,
    pub reference_dt: f64,
    pub order_range: (f64, f64),
    pub soliton: SolitonKnobs,
}

impl Default for ConvergenceKnobs {
    fn default() -> Self {
        Self {
            grid: GridConfig { n: 128, period: 40.0 },
            final_time: 1.0,
            dts: vec![0.02, 0.01, 0.005, 0.0025, 0.00125],
            reference_dt: 2.5e-5,
            order_range: (3.7, 4.3),
            soliton: SolitonKnobs::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EmbeddingKnobs {
    pub x: GridConfig,
    pub t: GridConfig,
    pub band_x: f64,
    pub band_t: f64,
    pub trials: usize,
    /// Target coefficients `a` of the embedding into the pair `(a₀, a₁)`.
    pub targets: Vec<f64>,
    pub pair: (f64, f64),
    pub other_pair: (f64, f64),
    /// `(s, b)` parameter sets.
    pub params: Vec<(f64, f64)>,
    /// Random `(a, a₀, a₁)` triples for the pointwise lattice scan.
    pub lattice_triples: usize,
    pub lattice_n: usize,
    pub lattice_extent: f64,
    pub f_w_points: usize,
}

impl Default for EmbeddingKnobs {
    fn default() -> Self {
        Self {
            x: GridConfig { n: 16, period: 12.0 },
            t: GridConfig { n: 32, period: 8.0 },
            band_x: 3.0,
            band_t: 10.0,
            trials: 1000,
            targets: vec![2.0, 0.5, -3.0],
            pair: (1.0, -1.0),
            other_pair: (2.0, -0.5),
            params: vec![(0.0, 0.6), (-0.5, 0.75)],
            lattice_triples: 5,
            lattice_n: 1001,
            lattice_extent: 50.0,
            f_w_points: 1_000_001,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BilinearKnobs {
    /// `(a_left, a_right, a_out)` sign patterns.
    pub patterns: Vec<(f64, f64, f64)>,
    /// `(s, b, b')` parameter sets.
    pub params: Vec<(f64, f64, f64)>,
    pub bands: Vec<f64>,
    pub trials: usize,
    pub envelope: f64,
    pub dxi: f64,
}

impl Default for BilinearKnobs {
    fn default() -> Self {
        Self {
            patterns: vec![
                (-1.0, -1.0, -1.0),
                (-1.0, -1.0, 1.0),
                (1.0, 1.0, -1.0),
                (1.0, -1.0, 1.0),
                (1.0, -1.0, -1.0),
            ],
            params: vec![(0.0, 0.6, -0.4), (-0.6, 0.6, -0.4)],
            bands: vec![8.0, 16.0, 32.0],
            trials: 64,
            envelope: 1.0,
            dxi: 0.5,
        }
    }
}

/// Sections of the norm-estimate suite. Seeds inside the sections are replaced by values
/// derived from the top-level seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BourgainKnobs {
    pub free: FreeEvolutionConfig,
    pub duhamel: DuhamelConfig,
    pub embedding: EmbeddingKnobs,
    pub membership: MembershipConfig,
    /// Negative control for the membership ladder.
    pub rough_membership: MembershipConfig,
    pub bilinear: BilinearKnobs,
}

impl Default for BourgainKnobs {
    fn default() -> Self {
        Self {
            free: FreeEvolutionConfig::default(),
            duhamel: DuhamelConfig::default(),
            embedding: EmbeddingKnobs::default(),
            membership: MembershipConfig::default(),
            rough_membership: MembershipConfig {
                b: 0.9,
                datum: Datum::Rough { decay: 0.6 },
                ..MembershipConfig::default()
            },
            bilinear: BilinearKnobs::default(),
        }
    }
}

/// A full experiment description; every section has defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    /// Selected by the command when absent.
    pub kind: Option<ExperimentKind>,
    pub system: SystemSpec,
    pub grid: GridConfig,
    pub stepper: StepperConfig,
    pub initial: InitialData,
    pub final_time: f64,
    /// Index of the Sobolev norms in diagnostics and difference norms.
    pub sobolev_index: f64,
    pub seed: u64,
    pub output_dir: Option<PathBuf>,
    pub simulate: SimulateKnobs,
    pub diagnose: DiagnoseKnobs,
    pub lipschitz: LipschitzKnobs,
    pub scaling: ScalingKnobs,
    pub picard: PicardKnobs,
    pub convergence: ConvergenceKnobs,
    pub bourgain: BourgainKnobs,
    pub kernels: QuadSpec,
    pub nonequivalence: NonequivalenceConfig,
    pub nonequivalence_quadrature: QuadSpec,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            kind: None,
            system: SystemSpec::HirotaSatsuma { a: 0.5, b: 1.0 },
            grid: GridConfig::default(),
            stepper: StepperConfig::default(),
            initial: InitialData::default(),
            final_time: 1.0,
            sobolev_index: 1.0,
            seed: 0,
            output_dir: None,
            simulate: SimulateKnobs::default(),
            diagnose: DiagnoseKnobs::default(),
            lipschitz: LipschitzKnobs::default(),
            scaling: ScalingKnobs::default(),
            picard: PicardKnobs::default(),
            convergence: ConvergenceKnobs::default(),
            bourgain: BourgainKnobs::default(),
            kernels: QuadSpec::default(),
            nonequivalence: NonequivalenceConfig::default(),
            nonequivalence_quadrature: QuadSpec::default(),
        }
    }
}

fn positive(name: &str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::Config(format!("{name} must be positive, got {x}")))
    }
}

fn nonempty<T>(name: &str, v: &[T]) -> Result<()> {
    if v.is_empty() {
        Err(Error::Config(format!("{name} must not be empty")))
    } else {
        Ok(())
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    /// Checks the parameters the experiment `kind` uses.
    pub fn validate(&self, kind: ExperimentKind) -> Result<()> {
        let grid = self.grid.build()?;
        self.system.validate()?;
        self.stepper.validate()?;
        self.initial.u.validate(&grid)?;
        self.initial.v.validate(&grid)?;
        if !(self.final_time >= 0.0) || !self.final_time.is_finite() {
            return Err(Error::Config(format!(
                "final_time must be >= 0, got {}",
                self.final_time
            )));
        }
        if !self.sobolev_index.is_finite() {
            return Err(Error::Config("sobolev_index must be finite".into()));
        }
        match kind {
            ExperimentKind::Simulate => {
                if self.simulate.snapshots == 0 {
                    return Err(Error::Config("simulate.snapshots must be at least 1".into()));
                }
            }
            ExperimentKind::Diagnose => {}
            ExperimentKind::LipschitzProbe => {
                let k = &self.lipschitz;
                nonempty("lipschitz.deltas", &k.deltas)?;
                nonempty("lipschitz.horizons", &k.horizons)?;
                if k.deltas.iter().any(|d| !(*d >= 0.0)) {
                    return Err(Error::Config("lipschitz.deltas must be >= 0".into()));
                }
                for &h in &k.horizons {
                    positive("lipschitz.horizons", h)?;
                    if h > self.final_time {
                        return Err(Error::Config(format!(
                            "horizon {h} exceeds final_time {}",
                            self.final_time
                        )));
                    }
                }
                positive("lipschitz.direction_band", k.direction_band)?;
                positive("lipschitz.tolerance", k.tolerance)?;
            }
            ExperimentKind::ScalingProbe => {
                let k = &self.scaling;
                if !matches!(self.system, SystemSpec::HirotaSatsuma { .. } | SystemSpec::Feng { .. }) {
                    return Err(Error::Config("scaling_probe needs a Hirota-Satsuma type system".into()));
                }
                positive("scaling.lambda", k.lambda)?;
                positive("scaling.final_time", k.final_time)?;
                positive("scaling.tolerance", k.tolerance)?;
                k.datum.validate(&k.table_grid.build()?)?;
                nonempty("scaling.lambdas", &k.lambdas)?;
                for &l in &k.lambdas {
                    positive("scaling.lambdas", l)?;
                }
                if k.lambdas.iter().filter(|&&l| l >= k.fit_min_lambda).count() < 2 {
                    return Err(Error::Config(
                        "scaling fit needs two lambdas above fit_min_lambda".into(),
                    ));
                }
                if k.checked_indices.iter().any(|s| !k.indices.contains(s)) {
                    return Err(Error::Config(
                        "scaling.checked_indices must be listed in indices".into(),
                    ));
                }
            }
            ExperimentKind::PicardStudy => {
                let k = &self.picard;
                k.grid.build()?;
                positive("picard.final_time", k.final_time)?;
                if k.time_resolution < 3 || k.iterations < 2 {
                    return Err(Error::Config(
                        "picard needs time_resolution >= 3 and iterations >= 2".into(),
                    ));
                }
                nonempty("picard.amplitudes", &k.amplitudes)?;
                positive("picard.agreement_tolerance", k.agreement_tolerance)?;
            }
            ExperimentKind::ConvergenceStudy => {
                let k = &self.convergence;
                k.grid.build()?;
                positive("convergence.final_time", k.final_time)?;
                if k.dts.len() < 2 {
                    return Err(Error::Config("convergence.dts needs at least two steps".into()));
                }
                for &dt in &k.dts {
                    positive("convergence.dts", dt)?;
                }
                positive("convergence.reference_dt", k.reference_dt)?;
                if k.dts.iter().any(|&dt| dt <= k.reference_dt) {
                    return Err(Error::Config("reference_dt must be below every dt".into()));
                }
                if k.soliton.enabled {
                    k.soliton.grid.build()?;
                    positive("soliton.speed", k.soliton.speed)?;
                    positive("soliton.dt", k.soliton.dt)?;
                    if k.soliton.a == 0.0 {
                        return Err(Error::Config("soliton.a must be nonzero".into()));
                    }
                }
            }
            ExperimentKind::BourgainSuite => {
                let k = &self.bourgain;
                let e = &k.embedding;
                e.x.build()?;
                e.t.build()?;
                if e.trials == 0 || e.lattice_n < 2 || e.f_w_points < 2 {
                    return Err(Error::Config("embedding trials and scan sizes must be positive".into()));
                }
                nonempty("bilinear.bands", &k.bilinear.bands)?;
                if k.bilinear.trials == 0 || k.free.trials == 0 {
                    return Err(Error::Config("trial counts must be positive".into()));
                }
            }
            ExperimentKind::KernelSuite => {}
            ExperimentKind::Nonequivalence => self.nonequivalence.validate()?,
        }
        Ok(())
    }
}

/// One named pass/fail assertion of an experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &str, passed: bool, detail: String) -> Self {
        Self {
            name: name.to_string(),
            passed,
            detail,
        }
    }
}

/// Everything an experiment produces before it is written to disk.
#[derive(Debug, Clone, Default)]
pub struct Outcome {
    pub tables: Vec<(String, Table)>,
    pub snapshots: Vec<(String, State)>,
    pub checks: Vec<Check>,
}

impl Outcome {
    fn table(&mut self, name: &str, table: Table) {
        self.tables.push((name.to_string(), table));
    }

    fn check(&mut self, name: &str, passed: bool, detail: String) {
        self.checks.push(Check::new(name, passed, detail));
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn find_table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|(n, _)| n == name).map(|(_, t)| t)
    }

    pub fn find_check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Completion record written after all other outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub kind: ExperimentKind,
    pub config: ExperimentConfig,
    pub version: String,
    pub wall_time_seconds: f64,
    pub files: Vec<String>,
    pub checks: Vec<Check>,
    pub passed: bool,
    pub error: Option<String>,
}

pub const MANIFEST_NAME: &str = "manifest.json";

fn record_row(rec: &DiagnosticRecord) -> Vec<Cell> {
    rec.values().iter().map(|&x| Cell::from(x)).collect()
}

fn drift_table(monitor: &DriftMonitor) -> Table {
    let mut t = Table::new(&["quantity", "relative_drift"]);
    for (k, name) in DiagnosticRecord::HEADER.iter().enumerate().skip(1).take(6) {
        if let Some(d) = monitor.relative_drift(k) {
            t.push(vec![(*name).into(), d.into()]).expect("two columns");
        }
    }
    t
}

/// Evolves the configured data, recording diagnostics and snapshots.
pub fn run_simulate(cfg: &ExperimentConfig) -> Result<Outcome> {
    let grid = cfg.grid.build()?;
    let initial = cfg.initial.state(&grid, 1.0)?;
    let mut monitor = DriftMonitor::new(&cfg.system, cfg.sobolev_index);
    let traj = simulate(&initial, &cfg.system, cfg.final_time, &cfg.stepper, &mut [&mut monitor])?;
    let mut out = Outcome::default();
    let mut diag = Table::new(&DiagnosticRecord::HEADER);
    for rec in &monitor.records {
        diag.push(record_row(rec))?;
    }
    out.table("diagnostics.csv", diag);
    out.table("drift.csv", drift_table(&monitor));
    let m = traj.states.len();
    let k = cfg.simulate.snapshots.min(m);
    let mut picked: Vec<usize> = (0..k)
        .map(|i| {
            if k == 1 {
                0
            } else {
                (i * (m - 1) + (k - 1) / 2) / (k - 1)
            }
        })
        .collect();
    picked.dedup();
    for (j, &i) in picked.iter().enumerate() {
        out.snapshots
            .push((format!("snapshot_{j:03}.ckdv"), traj.states[i].clone()));
    }
    let valid = monitor.records.iter().all(|r| r.valid);
    let drifts: Vec<String> = drift_table(&monitor)
        .rows
        .iter()
        .map(|r| match (&r[0], &r[1]) {
            (Cell::Text(n), Cell::Float(d)) => format!("{n} {d:.3e}"),
            _ => String::new(),
        })
        .collect();
    out.check(
        "finite_diagnostics",
        valid,
        format!("relative drifts: {}", drifts.join(", ")),
    );
    Ok(out)
}

/// Conserved quantities and norms of a single state.
pub fn run_diagnose(cfg: &ExperimentConfig) -> Result<Outcome> {
    let state = match &cfg.diagnose.snapshot {
        Some(path) => read_snapshot(path)?.to_state()?,
        None => cfg.initial.state(&cfg.grid.build()?, 1.0)?,
    };
    let rec = InvariantSet::for_spec(&cfg.system).record(&state, cfg.sobolev_index)?;
    let mut diag = Table::new(&DiagnosticRecord::HEADER);
    diag.push(record_row(&rec))?;
    let mut out = Outcome::default();
    out.table("diagnostics.csv", diag);
    out.check("finite_diagnostics", rec.valid, format!("t = {}", rec.t));
    Ok(out)
}

fn pair_norm(u: &SpectralField, v: &SpectralField, s: f64) -> f64 {
    sobolev_norm(u, s).hypot(sobolev_norm(v, s))
}

/// Ratios `sup_t ‖Δ(u, v)(t)‖_s / ‖Δ(u₀, v₀)‖_s` over a ladder of perturbation sizes.
pub fn run_lipschitz(cfg: &ExperimentConfig) -> Result<Outcome> {
    let k = &cfg.lipschitz;
    let s = cfg.sobolev_index;
    let grid = cfg.grid.build()?;
    let base = cfg.initial.state(&grid, 1.0)?.dealias();
    let data_norm = pair_norm(&base.u, &base.v, s);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let du = random_band_limited(&grid, k.direction_band, &mut rng)?.dealias();
    let dv = random_band_limited(&grid, k.direction_band, &mut rng)?.dealias();
    let dir_norm = pair_norm(&du, &dv, s);
    if dir_norm == 0.0 {
        return Err(Error::InvalidParameter("perturbation band contains no modes".into()));
    }
    let reference = simulate(&base, &cfg.system, cfg.final_time, &cfg.stepper, &mut [])?;
    let mut table = Table::new(&["delta", "delta_data", "delta_solution", "ratio"]);
    let mut curves: Vec<(f64, Vec<(f64, f64)>)> = Vec::new();
    for &delta in &k.deltas {
        let size = delta * data_norm;
        if size == 0.0 {
            table.push(vec![delta.into(), 0.0.into(), 0.0.into(), 0.0.into()])?;
            continue;
        }
        let c = size / dir_norm;
        let perturbed = State {
            u: base.u.axpy(c, &du),
            v: base.v.axpy(c, &dv),
            t: 0.0,
        };
        let data_diff = pair_norm(&(&perturbed.u - &base.u), &(&perturbed.v - &base.v), s);
        let traj = simulate(&perturbed, &cfg.system, cfg.final_time, &cfg.stepper, &mut [])?;
        let curve: Vec<(f64, f64)> = traj
            .states
            .iter()
            .zip(&reference.states)
            .map(|(a, b)| (a.t, pair_norm(&(&a.u - &b.u), &(&a.v - &b.v), s)))
            .collect();
        let sup = curve.iter().map(|p| p.1).fold(0.0, f64::max);
        table.push(vec![
            delta.into(),
            data_diff.into(),
            sup.into(),
            (sup / data_diff).into(),
        ])?;
        curves.push((data_diff, curve));
    }
    let mut out = Outcome::default();
    let ratios: Vec<f64> = table
        .rows
        .iter()
        .filter_map(|r| match (&r[1], &r[3]) {
            (Cell::Float(d), Cell::Float(x)) if *d > 0.0 => Some(*x),
            _ => None,
        })
        .collect();
    out.table("lipschitz.csv", table);
    if ratios.len() >= 2 {
        let (prev, last) = (ratios[ratios.len() - 2], ratios[ratios.len() - 1]);
        let change = (last - prev).abs() / prev.abs();
        out.check(
            "linearized_limit",
            change < k.tolerance,
            format!("ratio {last:.6} vs {prev:.6}, relative change {change:.3e}"),
        );
    }
    if let Some((data_diff, curve)) = curves.last() {
        let mut horizons = Table::new(&["horizon", "ratio"]);
        let mut values = Vec::new();
        for &h in &k.horizons {
            let tol = 1e-12 * h.max(1.0);
            let sup = curve.iter().filter(|p| p.0 <= h + tol).map(|p| p.1).fold(0.0, f64::max);
            values.push(sup / data_diff);
            horizons.push(vec![h.into(), (sup / data_diff).into()])?;
        }
        out.table("lipschitz_horizons.csv", horizons);
        let monotone = values.windows(2).all(|w| w[1] >= w[0]);
        out.check("nondecreasing_in_horizon", monotone, format!("ratios {values:?}"));
    }
    Ok(out)
}

/// Solution covariance under `u ↦ λ²u(λx, λ³t)` and the `λ`-exponents of `H^s` norms.
pub fn run_scaling(cfg: &ExperimentConfig) -> Result<Outcome> {
    let k = &cfg.scaling;
    let lam = k.lambda;
    let grid = cfg.grid.build()?;
    let base = cfg.initial.state(&grid, 1.0)?.dealias();
    let small = GridSpec::new(grid.n(), grid.period() / lam)?;
    let scaled = State {
        u: scale_field(&base.u, lam, &small)?,
        v: scale_field(&base.v, lam, &small)?,
        t: 0.0,
    }
    .dealias();
    let l3 = lam.powi(3);
    let original_cfg = StepperConfig {
        dt: cfg.stepper.dt * l3,
        sample_interval: cfg.stepper.sample_interval * l3,
        ..cfg.stepper
    };
    let original = simulate(&base, &cfg.system, k.final_time * l3, &original_cfg, &mut [])?;
    let rescaled = simulate(&scaled, &cfg.system, k.final_time, &cfg.stepper, &mut [])?;
    let map = scaling_map(&original, lam)?;
    let xs = small.points();
    let mut cov = Table::new(&["t", "max_error"]);
    let mut worst: f64 = 0.0;
    for st in &rescaled.states {
        let [u, v] = map.eval(&xs, st.t)?;
        let (us, vs) = (st.u.to_samples(), st.v.to_samples());
        let err = u
            .iter()
            .zip(&us)
            .chain(v.iter().zip(&vs))
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        worst = worst.max(err);
        cov.push(vec![st.t.into(), err.into()])?;
    }
    let mut out = Outcome::default();
    out.table("scaling_covariance.csv", cov);
    out.check(
        "covariance",
        worst < k.tolerance,
        format!("lambda {lam}: max error {worst:.3e} over T = {}", k.final_time),
    );

    let tgrid = k.table_grid.build()?;
    let datum = k.datum.sample(&tgrid);
    let mut norms = Table::new(&["s", "lambda", "norm", "ratio"]);
    let mut fits = Table::new(&["s", "fitted_exponent", "expected_exponent"]);
    for &s in &k.indices {
        let unit = sobolev_norm(&datum, s);
        let mut fit_l = Vec::new();
        let mut fit_n = Vec::new();
        for &l in &k.lambdas {
            let g = GridSpec::new(tgrid.n(), tgrid.period() / l)?;
            let nrm = sobolev_norm(&scale_field(&datum, l, &g)?, s);
            norms.push(vec![s.into(), l.into(), nrm.into(), (nrm / unit).into()])?;
            if l >= k.fit_min_lambda {
                fit_l.push(l);
                fit_n.push(nrm);
            }
        }
        let slope = loglog_slope(&fit_l, &fit_n);
        let expected = 1.5 + s;
        fits.push(vec![s.into(), slope.into(), expected.into()])?;
        if k.checked_indices.contains(&s) {
            out.check(
                &format!("exponent_s{s}"),
                (slope - expected).abs() <= k.exponent_tolerance,
                format!("fitted {slope:.4}, expected {expected}"),
            );
        }
    }
    out.table("scaling_norms.csv", norms);
    out.table("scaling_exponents.csv", fits);
    Ok(out)
}

/// Picard iteration across data amplitudes, checked against the stepper.
pub fn run_picard(cfg: &ExperimentConfig) -> Result<Outcome> {
    let k = &cfg.picard;
    let grid = k.grid.build()?;
    let opts = PicardOptions {
        s: cfg.sobolev_index,
        cutoff: k.cutoff,
        ..PicardOptions::default()
    };
    let h = k.final_time / (k.time_resolution - 1) as f64;
    let mut summary = Table::new(&[
        "amplitude",
        "fitted_ratio",
        "iterations",
        "final_difference",
        "stepper_agreement",
    ]);
    let mut diffs = Table::new(&["amplitude", "iteration", "difference"]);
    let mut agreements = Vec::new();
    let mut ratios = Vec::new();
    for &amp in &k.amplitudes {
        let data = cfg.initial.state(&grid, amp)?;
        let rep = picard_iterate(&data, &cfg.system, k.final_time, k.iterations, k.time_resolution, &opts)?;
        for (i, d) in rep.diffs.iter().enumerate() {
            diffs.push(vec![amp.into(), (i + 1).into(), (*d).into()])?;
        }
        let agreement = if rep.fitted_ratio < k.contraction_limit && !k.cutoff {
            let stepper = StepperConfig {
                dt: h,
                sample_interval: h,
                ..cfg.stepper
            };
            let traj = simulate(&data, &cfg.system, k.final_time, &stepper, &mut [])?;
            let worst = rep
                .iterate
                .iter()
                .zip(&traj.states)
                .map(|(a, b)| a.max_abs_diff(b))
                .fold(0.0, f64::max);
            agreements.push((amp, worst));
            Some(worst)
        } else {
            None
        };
        ratios.push((amp, rep.fitted_ratio));
        summary.push(vec![
            amp.into(),
            rep.fitted_ratio.into(),
            rep.diffs.len().into(),
            rep.diffs.last().copied().into(),
            agreement.into(),
        ])?;
    }
    let mut out = Outcome::default();
    out.table("picard.csv", summary);
    out.table("picard_differences.csv", diffs);
    if !k.cutoff {
        let ok = !agreements.is_empty() && agreements.iter().all(|&(_, e)| e < k.agreement_tolerance);
        out.check(
            "stepper_agreement",
            ok,
            format!("(amplitude, max difference): {agreements:?}"),
        );
    }
    let contracting = ratios.iter().any(|&(_, r)| r < 1.0);
    let threshold = ratios.iter().find(|&&(_, r)| !(r < 1.0)).map(|&(a, _)| a);
    out.check(
        "contracts_for_small_data",
        contracting,
        format!("(amplitude, ratio): {ratios:?}"),
    );
    out.check(
        "diverges_beyond_threshold",
        threshold.is_some(),
        match threshold {
            Some(a) => format!("first non-contracting amplitude {a}"),
            None => "every amplitude contracted".into(),
        },
    );
    Ok(out)
}

/// Time-step halving study and the KdV one-soliton oracle.
pub fn run_convergence(cfg: &ExperimentConfig) -> Result<Outcome> {
    let k = &cfg.convergence;
    let grid = k.grid.build()?;
    let data = cfg.initial.state(&grid, 1.0)?;
    let run = |dt: f64| -> Result<State> {
        let sc = StepperConfig {
            dt,
            sample_interval: k.final_time,
            ..cfg.stepper
        };
        let traj = simulate(&data, &cfg.system, k.final_time, &sc, &mut [])?;
        Ok(traj.states.last().expect("nonempty trajectory").clone())
    };
    let reference = run(k.reference_dt)?;
    let mut table = Table::new(&["dt", "error", "observed_order"]);
    let mut errors = Vec::new();
    for &dt in &k.dts {
        let e = run(dt)?.max_abs_diff(&reference);
        let order = errors
            .last()
            .map(|&(pdt, pe): &(f64, f64)| (pe / e).ln() / (pdt / dt).ln());
        table.push(vec![dt.into(), e.into(), order.into()])?;
        errors.push((dt, e));
    }
    let dts: Vec<f64> = errors.iter().map(|p| p.0).collect();
    let errs: Vec<f64> = errors.iter().map(|p| p.1).collect();
    let order = loglog_slope(&dts, &errs);
    let mut out = Outcome::default();
    out.table("convergence.csv", table);
    out.check(
        "observed_order",
        order >= k.order_range.0 && order <= k.order_range.1,
        format!("least-squares order {order:.4}"),
    );
    if k.soliton.enabled {
        let sk = &k.soliton;
        let sg = sk.grid.build()?;
        let (c, l) = (sk.speed, sg.period());
        let exact = move |x: f64, tau: f64| {
            let mut y = x - c * tau;
            y -= l * ((y + 0.5 * l) / l).floor();
            Profile::KdvSoliton { speed: c, center: 0.0 }.eval(y)
        };
        let w0 = sg.forward(&sg.sample(|x| exact(x, 0.0)))?;
        let spec = SystemSpec::HirotaSatsuma { a: sk.a, b: 1.0 };
        // one transit of the periodic box in the KdV time τ = a t
        let horizon = l / (c * sk.a.abs());
        let sc = StepperConfig {
            dt: sk.dt,
            sample_interval: horizon / 20.0,
            ..cfg.stepper
        };
        let traj = simulate(&hs_as_kdv(&w0, sk.a)?, &spec, horizon, &sc, &mut [])?;
        let xs = sg.points();
        let mut table = Table::new(&["t", "max_error"]);
        let mut worst: f64 = 0.0;
        for st in &traj.states {
            let u = st.u.to_samples();
            let err = xs
                .iter()
                .zip(&u)
                .map(|(&x, &val)| (val - exact(-x, sk.a * st.t)).abs())
                .fold(0.0, f64::max);
            worst = worst.max(err);
            table.push(vec![st.t.into(), err.into()])?;
        }
        out.table("soliton.csv", table);
        out.check(
            "kdv_soliton",
            worst < sk.tolerance,
            format!("max error {worst:.3e} over one transit (t = {horizon})"),
        );
    }
    Ok(out)
}

fn random_triples(seed: u64, count: usize) -> Vec<(f64, f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let a = rng.random_range(-4.0..4.0);
            let a0 = rng.random_range(-4.0..4.0);
            let gap = rng.random_range(0.25..4.0);
            let a1 = if rng.random::<bool>() { a0 + gap } else { a0 - gap };
            (a, a0, a1)
        })
        .collect()
}

/// Linear estimates, embeddings, cut-off data membership and bilinear ratios.
pub fn run_bourgain(cfg: &ExperimentConfig) -> Result<Outcome> {
    let k = &cfg.bourgain;
    let mut out = Outcome::default();

    let free_cfg = FreeEvolutionConfig {
        seed: cfg.seed,
        ..k.free.clone()
    };
    let free = free_evolution_constancy(&free_cfg)?;
    let mut t = Table::new(&["trial", "ratio"]);
    for (i, r) in free.ratios.iter().enumerate() {
        t.push(vec![i.into(), (*r).into()])?;
    }
    out.table("free_evolution.csv", t);
    out.check(
        "free_evolution_constancy",
        free.pass,
        format!(
            "cv {:.3e} over {} data, mean {:.6}, continuum constant {:.6}",
            free.coefficient_of_variation,
            free.ratios.len(),
            free.mean,
            free.continuum_constant
        ),
    );

    let duh = duhamel_scaling(&k.duhamel)?;
    let mut t = Table::new(&["scale", "ratio"]);
    for (s, r) in duh.scales.iter().zip(&duh.ratios) {
        t.push(vec![(*s).into(), (*r).into()])?;
    }
    out.table("duhamel.csv", t);
    out.check(
        "duhamel_exponent",
        duh.pass,
        format!(
            "fitted {:.4}, expected {:.4}",
            duh.fitted_exponent, duh.expected_exponent
        ),
    );

    let e = &k.embedding;
    let mut t = Table::new(&["a", "a0", "a1", "points", "max_ratio", "bound", "pass"]);
    let mut all = true;
    for (a, a0, a1) in random_triples(cfg.seed.wrapping_add(1), e.lattice_triples) {
        let scan = lattice_scan(a, a0, a1, e.lattice_n, e.lattice_extent)?;
        all &= scan.pass;
        t.push(vec![
            a.into(),
            a0.into(),
            a1.into(),
            scan.points.into(),
            scan.max_ratio.into(),
            scan.bound.into(),
            scan.pass.into(),
        ])?;
    }
    out.table("pointwise.csv", t);
    out.check("pointwise_inequality", all, format!("{} triples", e.lattice_triples));
    let fmax = f_w_scan(e.f_w_points, 1e3);
    out.check("f_w_maximum", fmax == 0.5, format!("dense-scan maximum {fmax}"));

    let ens = FieldEnsemble {
        x: e.x.build()?,
        t: e.t.build()?,
        band_x: e.band_x,
        band_t: e.band_t,
        trials: e.trials,
        seed: cfg.seed.wrapping_add(2),
    };
    let mut emb = Table::new(&["a", "a0", "a1", "s", "b", "trials", "passed", "worst_margin"]);
    let mut inter = Table::new(&[
        "s",
        "b",
        "trials",
        "min_ratio",
        "max_ratio",
        "lower_bound",
        "upper_bound",
        "pass",
    ]);
    let mut emb_ok = true;
    let mut inter_ok = true;
    for &(s, b) in &e.params {
        for &a in &e.targets {
            let r = embedding_suite(&ens, a, e.pair.0, e.pair.1, s, b)?;
            emb_ok &= r.passed == r.trials;
            emb.push(vec![
                a.into(),
                e.pair.0.into(),
                e.pair.1.into(),
                s.into(),
                b.into(),
                r.trials.into(),
                r.passed.into(),
                r.worst_margin.into(),
            ])?;
        }
        let r = intersection_suite(&ens, e.pair, e.other_pair, s, b)?;
        inter_ok &= r.pass;
        inter.push(vec![
            s.into(),
            b.into(),
            r.trials.into(),
            r.min_ratio.into(),
            r.max_ratio.into(),
            r.lower_bound.into(),
            r.upper_bound.into(),
            r.pass.into(),
        ])?;
    }
    out.table("embedding.csv", emb);
    out.table("intersection.csv", inter);
    out.check("embedding", emb_ok, format!("{} fields per parameter set", e.trials));
    out.check(
        "intersection_equivalence",
        inter_ok,
        "ratios within the two-sided constants".into(),
    );

    let mut t = Table::new(&["datum", "s", "b", "n_x", "max_frequency", "norm_a0", "norm_a1"]);
    let mut ladders = Vec::new();
    for (label, mc) in [("smooth", &k.membership), ("rough", &k.rough_membership)] {
        let lad = membership_ladder(mc)?;
        for r in &lad.rows {
            t.push(vec![
                label.into(),
                mc.s.into(),
                mc.b.into(),
                r.n_x.into(),
                r.max_frequency.into(),
                r.norm_a0.into(),
                r.norm_a1.into(),
            ])?;
        }
        ladders.push(lad);
    }
    out.table("membership.csv", t);
    out.check(
        "membership_smooth_stable",
        ladders[0].stable,
        format!("last relative change {:.3e}", ladders[0].last_change),
    );
    out.check(
        "membership_rough_grows",
        !ladders[1].stable,
        format!("last relative change {:.3e}", ladders[1].last_change),
    );

    let bk = &k.bilinear;
    let mut rows = Table::new(&[
        "a_left",
        "a_right",
        "a_out",
        "s",
        "b",
        "b_prime",
        "band",
        "max",
        "median",
        "p90",
        "admissible",
    ]);
    let mut stab = Table::new(&["a_left", "a_right", "a_out", "s", "b", "b_prime", "spread", "stable"]);
    let mut all_stable = true;
    let mut worst_spread: f64 = 0.0;
    for &(s, b, bp) in &bk.params {
        for &(al, ar, ao) in &bk.patterns {
            let bc = BilinearConfig {
                s,
                b,
                b_prime: bp,
                trials: bk.trials,
                seed: cfg.seed.wrapping_add(3),
                dxi: bk.dxi,
                envelope: bk.envelope,
                ..BilinearConfig::default()
            }
            .with_pattern(al, ar, ao);
            let lad = band_ladder(&bc, &bk.bands)?;
            for r in &lad.reports {
                rows.push(vec![
                    al.into(),
                    ar.into(),
                    ao.into(),
                    s.into(),
                    b.into(),
                    bp.into(),
                    r.band.into(),
                    r.max.into(),
                    r.median.into(),
                    r.p90.into(),
                    r.inadmissible.is_none().into(),
                ])?;
            }
            all_stable &= lad.stable;
            worst_spread = worst_spread.max(lad.spread);
            stab.push(vec![
                al.into(),
                ar.into(),
                ao.into(),
                s.into(),
                b.into(),
                bp.into(),
                lad.spread.into(),
                lad.stable.into(),
            ])?;
        }
    }
    out.table("bilinear.csv", rows);
    out.table("bilinear_stability.csv", stab);
    out.check(
        "bilinear_band_stability",
        all_stable,
        format!("largest spread {worst_spread:.3}"),
    );
    Ok(out)
}

/// Maxima of all kernel bounds and their stability under refinement.
pub fn run_kernels(cfg: &ExperimentConfig) -> Result<Outcome> {
    let reports = kernel_suite(&cfg.kernels)?;
    let mut t = Table::new(&[
        "kernel",
        "s",
        "b",
        "b_prime",
        "max",
        "first_at_max",
        "second_at_max",
        "refined_max",
        "relative_change",
        "stable",
        "converged",
    ]);
    for r in &reports {
        t.push(vec![
            r.kernel.name().into(),
            r.params.s.into(),
            r.params.b.into(),
            r.params.b_prime.into(),
            r.max.into(),
            r.argmax.0.into(),
            r.argmax.1.into(),
            r.refined_max.into(),
            r.relative_change.into(),
            r.stable.into(),
            r.converged.into(),
        ])?;
    }
    let mut out = Outcome::default();
    out.table("kernels.csv", t);
    let unstable: Vec<&str> = reports.iter().filter(|r| !r.stable).map(|r| r.kernel.name()).collect();
    out.check(
        "kernels_refinement_stable",
        unstable.is_empty(),
        if unstable.is_empty() {
            format!("{} kernels", reports.len())
        } else {
            format!("unstable: {}", unstable.join(", "))
        },
    );
    Ok(out)
}

/// Truncated norms of a field in one dispersion space but not the other.
pub fn run_nonequivalence(cfg: &ExperimentConfig) -> Result<Outcome> {
    let table = nonequivalence_demo(&cfg.nonequivalence, &cfg.nonequivalence_quadrature)?;
    let mut t = Table::new(&["radius", "norm_a0", "norm_a1"]);
    for r in &table.rows {
        t.push(vec![r.radius.into(), r.norm_a0.into(), r.norm_a1.into()])?;
    }
    let mut out = Outcome::default();
    out.table("nonequivalence.csv", t);
    out.check(
        "separates",
        table.separates(),
        format!(
            "growth exponent {:.4}, last change of the bounded norm {:.3e}",
            table.growth_exponent, table.a1_last_change
        ),
    );
    Ok(out)
}

/// Runs one experiment without touching the file system.
pub fn execute(cfg: &ExperimentConfig, kind: ExperimentKind) -> Result<Outcome> {
    cfg.validate(kind)?;
    match kind {
        ExperimentKind::Simulate => run_simulate(cfg),
        ExperimentKind::Diagnose => run_diagnose(cfg),
        ExperimentKind::LipschitzProbe => run_lipschitz(cfg),
        ExperimentKind::ScalingProbe => run_scaling(cfg),
        ExperimentKind::PicardStudy => run_picard(cfg),
        ExperimentKind::ConvergenceStudy => run_convergence(cfg),
        ExperimentKind::BourgainSuite => run_bourgain(cfg),
        ExperimentKind::KernelSuite => run_kernels(cfg),
        ExperimentKind::Nonequivalence => run_nonequivalence(cfg),
    }
}

/// Runs an experiment, writes its outputs into `out_dir` and finishes with the manifest.
///
/// Configuration errors are returned before anything is written; errors raised while the
/// experiment runs are recorded in the manifest.
pub fn run(cfg: &ExperimentConfig, kind: ExperimentKind, out_dir: &Path) -> Result<RunManifest> {
    cfg.validate(kind)?;
    let start = Instant::now();
    fs::create_dir_all(out_dir)?;
    let mut files = Vec::new();
    let (checks, error) = match execute(cfg, kind) {
        Ok(outcome) => {
            for (name, table) in &outcome.tables {
                write_csv(&out_dir.join(name), table)?;
                files.push(name.clone());
            }
            for (name, state) in &outcome.snapshots {
                write_snapshot(&out_dir.join(name), state)?;
                files.push(name.clone());
            }
            (outcome.checks, None)
        }
        Err(e) => (Vec::new(), Some(e.to_string())),
    };
    files.push(MANIFEST_NAME.to_string());
    let manifest = RunManifest {
        kind,
        config: cfg.clone(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        wall_time_seconds: start.elapsed().as_secs_f64(),
        passed: error.is_none() && checks.iter().all(|c| c.passed),
        files,
        checks,
        error,
    };
    let tmp = out_dir.join(format!("{MANIFEST_NAME}.tmp"));
    fs::write(&tmp, serde_json::to_vec_pretty(&manifest)?)?;
    fs::rename(&tmp, out_dir.join(MANIFEST_NAME))?;
    Ok(manifest)
}

//! Scenario files and the command drivers behind the `rfterm` binary.
//!
//! A scenario is a TOML document; every section is optional and falls back
//! to the implementation operating point. Relative paths are resolved
//! against the directory holding the scenario file. Field units are carried
//! in the names (`_nm`, `_us`, `_rad`) or, for the level scheme, are 2π×MHz.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::analysis::{fig3_panel, fig3_panels, linspace, logspace, sweep, SweepAxis, SweepTable};
use crate::atomic::{load_species, SpeciesData};
use crate::exec::Exec;
use crate::gate::{
    detuning_for_config, emission_amplitude, evolve, idx, run_gate, Encoding, GateOptions, GateOutcome, JointState,
    Level, LevelScheme, LogicalState, Mode, PlaquetteConfig, PulseSchedule, DIM,
};
use crate::integrate::Tolerance;
use crate::pec::{
    build_basis, cache_key, cartesian_to_spherical, pec_curve, site_shift, write_curve_csv, write_metadata, BasisSpec,
    PecCache, PecCurve, PecModel, PlaquetteGeometry, Point, ShiftMode, SiteShift,
};
use crate::swap::{end_to_end, SwapReport};
use crate::units::nm_to_bohr;
use crate::wavefunctions::{GridSpec, RydbergState};
use crate::{Error, Half, Result};

/// Environment variable holding the default cache directory.
pub const CACHE_ENV: &str = "RFTERM_CACHE_DIR";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default = "default_name")]
    pub name: String,
    /// Species file; the bundled Cs-133 table when absent.
    #[serde(default)]
    pub species_file: Option<PathBuf>,
    #[serde(default)]
    pub geometry: PlaquetteGeometry,
    #[serde(default)]
    pub pec: PecSection,
    #[serde(default = "LevelScheme::implementation")]
    pub scheme: LevelScheme,
    #[serde(default = "default_schedule")]
    pub schedule: PulseSchedule,
    #[serde(default = "default_encoding")]
    pub encoding: Encoding,
    #[serde(default)]
    pub input: InputSpec,
    #[serde(default)]
    pub sweep: Option<SweepSection>,
    #[serde(default)]
    pub swap: Option<SwapSection>,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub cache_dir: Option<PathBuf>,
    #[serde(default)]
    pub mode: Mode,
    /// Relative integration tolerance per step.
    #[serde(default = "default_tol")]
    pub tolerance: f64,
    /// Also dump per-step populations of every branch in `gate`.
    #[serde(default)]
    pub trajectory: bool,
}

fn default_name() -> String {
    "scenario".into()
}

fn default_schedule() -> PulseSchedule {
    PulseSchedule::gaussian(3.5)
}

fn default_encoding() -> Encoding {
    Encoding::FourQubit
}

fn default_tol() -> f64 {
    1e-9
}

impl Default for Scenario {
    fn default() -> Self {
        toml::from_str("").expect("empty scenario uses defaults")
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CenterSpec {
    pub n: u32,
    pub l: u32,
    pub j: Half,
    pub m: Half,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PecSection {
    #[serde(default = "default_center")]
    pub center: CenterSpec,
    #[serde(default = "default_basis")]
    pub basis: BasisSpec,
    #[serde(default)]
    pub grid: GridSpec,
    /// Radial path of one perturber, along the direction `(theta_rad, phi_rad)`.
    #[serde(default = "default_r_min")]
    pub r_min_nm: f64,
    #[serde(default = "default_r_max")]
    pub r_max_nm: f64,
    #[serde(default = "default_points")]
    pub points: usize,
    #[serde(default = "default_theta")]
    pub theta_rad: f64,
    #[serde(default)]
    pub phi_rad: f64,
    /// Point and motionally averaged shifts at the `|0⟩` and `|1⟩` sites.
    #[serde(default = "default_true")]
    pub site_shifts: bool,
    /// Larger basis used to report the convergence of the `|0⟩` site shift.
    #[serde(default)]
    pub convergence_basis: Option<BasisSpec>,
}

fn default_center() -> CenterSpec {
    CenterSpec { n: 45, l: 2, j: Half(5), m: Half(5) }
}

fn default_basis() -> BasisSpec {
    BasisSpec::around_d(45, 3.0)
}

fn default_r_min() -> f64 {
    100.0
}

fn default_r_max() -> f64 {
    250.0
}

fn default_points() -> usize {
    151
}

fn default_theta() -> f64 {
    PI / 2.0
}

fn default_true() -> bool {
    true
}

impl Default for PecSection {
    fn default() -> Self {
        toml::from_str("").expect("empty section uses defaults")
    }
}

impl PecSection {
    pub fn path(&self) -> Result<Vec<Point>> {
        if !(self.r_min_nm > 0.0 && self.r_max_nm > self.r_min_nm) || self.points < 2 {
            return Err(Error::Validation("pec path needs 0 < r_min_nm < r_max_nm and at least 2 points".into()));
        }
        let (st, ct) = self.theta_rad.sin_cos();
        let (sp, cp) = self.phi_rad.sin_cos();
        Ok(linspace(self.r_min_nm, self.r_max_nm, self.points)
            .into_iter()
            .map(|r| {
                let r = nm_to_bohr(r);
                cartesian_to_spherical(r * st * cp, r * st * sp, r * ct)
            })
            .collect())
    }

    pub fn center_state(&self) -> Result<RydbergState> {
        RydbergState::new(self.center.n, self.center.l, self.center.j, self.center.m)
    }
}

/// Exactly one of the three forms.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputSpec {
    /// `0L`, `1L`, `+L` or `-L`.
    #[serde(default)]
    pub logical: Option<String>,
    /// `[[re, im], [re, im]]` for `a₀|0_L⟩ + a₁|1_L⟩`.
    #[serde(default)]
    pub logical_amplitudes: Option<Vec<[f64; 2]>>,
    /// Plaquette configuration label → `[re, im]`.
    #[serde(default)]
    pub configurations: Option<BTreeMap<String, [f64; 2]>>,
}

pub fn parse_logical(label: &str, encoding: Encoding) -> Result<LogicalState> {
    let h = FRAC_1_SQRT_2;
    match label.trim().trim_start_matches('|').trim_end_matches(['⟩', '>']) {
        "0L" | "0" => Ok(LogicalState::zero(encoding)),
        "1L" | "1" => Ok(LogicalState::one(encoding)),
        "+L" | "+" => Ok(LogicalState::plus(encoding)),
        "-L" | "-" => LogicalState::logical(encoding, C64::new(h, 0.0), C64::new(-h, 0.0)),
        other => Err(Error::Validation(format!("unknown logical state `{other}`; use 0L, 1L, +L or -L"))),
    }
}

impl InputSpec {
    pub fn resolve(&self, encoding: Encoding) -> Result<LogicalState> {
        let given = [self.logical.is_some(), self.logical_amplitudes.is_some(), self.configurations.is_some()];
        match given.iter().filter(|&&g| g).count() {
            0 => return Ok(LogicalState::plus(encoding)),
            1 => {}
            _ => return Err(Error::Validation("input: give one of logical, logical_amplitudes, configurations".into())),
        }
        if let Some(l) = &self.logical {
            return parse_logical(l, encoding);
        }
        if let Some(a) = &self.logical_amplitudes {
            if a.len() != 2 {
                return Err(Error::Validation(format!("logical_amplitudes needs 2 entries, got {}", a.len())));
            }
            return LogicalState::logical(encoding, C64::new(a[0][0], a[0][1]), C64::new(a[1][0], a[1][1]));
        }
        let map = self.configurations.as_ref().expect("counted above");
        let amps = map
            .iter()
            .map(|(label, [re, im])| Ok((PlaquetteConfig::parse(encoding, label)?, C64::new(*re, *im))))
            .collect::<Result<Vec<_>>>()?;
        LogicalState::new(encoding, amps)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub axis: String,
    /// Explicit grid; otherwise `start`, `stop`, `points` (and `log`).
    #[serde(default)]
    pub values: Option<Vec<f64>>,
    #[serde(default)]
    pub start: Option<f64>,
    #[serde(default)]
    pub stop: Option<f64>,
    #[serde(default)]
    pub points: Option<usize>,
    #[serde(default)]
    pub log: bool,
}

impl SweepSection {
    pub fn grid(&self) -> Result<Vec<f64>> {
        if let Some(v) = &self.values {
            return Ok(v.clone());
        }
        match (self.start, self.stop, self.points) {
            (Some(a), Some(b), Some(n)) if self.log && !(a > 0.0 && b > 0.0) => {
                let _ = n;
                Err(Error::Validation("a log grid needs positive start and stop".into()))
            }
            (Some(a), Some(b), Some(n)) => Ok(if self.log { logspace(a, b, n) } else { linspace(a, b, n) }),
            _ => Err(Error::Validation("sweep needs `values` or `start`, `stop` and `points`".into())),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JointChoice {
    #[default]
    SignResolved,
    Symmetrized,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SwapSection {
    /// Gate outcome (or bare joint state) JSON of each terminal.
    pub first: PathBuf,
    pub second: PathBuf,
    #[serde(default)]
    pub joint: JointChoice,
}

impl Scenario {
    /// Parses a scenario and resolves its relative paths.
    pub fn load(path: &Path) -> Result<Scenario> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut s: Scenario =
            toml::from_str(&text).map_err(|e| Error::Parse { path: path.to_path_buf(), message: e.to_string() })?;
        let base = path.parent().unwrap_or(Path::new("."));
        s.rebase(base);
        Ok(s)
    }

    fn rebase(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        self.species_file.iter_mut().for_each(fix);
        self.output_dir.iter_mut().for_each(fix);
        self.cache_dir.iter_mut().for_each(fix);
        if let Some(sw) = &mut self.swap {
            fix(&mut sw.first);
            fix(&mut sw.second);
        }
    }

    /// Checks referenced files and parameter ranges without computing anything.
    pub fn validate(&self) -> Result<()> {
        let mut files: Vec<&Path> = self.species_file.iter().map(PathBuf::as_path).collect();
        if let Some(sw) = &self.swap {
            files.extend([sw.first.as_path(), sw.second.as_path()]);
        }
        for f in files {
            if !f.is_file() {
                return Err(Error::Validation(format!("referenced file {} does not exist", f.display())));
            }
        }
        if !(self.tolerance > 0.0 && self.tolerance < 1e-2) {
            return Err(Error::Validation(format!("tolerance {} must lie in (0, 1e-2)", self.tolerance)));
        }
        self.geometry.validate()?;
        self.scheme.validate(self.encoding)?;
        self.schedule.validate()?;
        self.input.resolve(self.encoding)?;
        Ok(())
    }

    pub fn species(&self) -> Result<SpeciesData> {
        match &self.species_file {
            Some(p) => load_species(p),
            None => SpeciesData::bundled("cs133"),
        }
    }

    pub fn gate_options(&self) -> GateOptions {
        GateOptions { mode: self.mode, tol: self.tolerance }
    }

    /// SHA-256 of the canonical JSON form.
    pub fn config_hash(&self) -> String {
        hex::encode(Sha256::digest(serde_json::to_vec(self).expect("scenario serializes")))
    }
}

/// Where a command writes and how it schedules work.
#[derive(Clone, Debug)]
pub struct RunContext {
    pub out_dir: PathBuf,
    pub cache_dir: Option<PathBuf>,
    pub exec: Exec,
    pub workers: usize,
}

impl RunContext {
    /// Output directory from the flag, the scenario or `out`; cache directory
    /// from the flag, the scenario or [`CACHE_ENV`].
    pub fn resolve(scenario: &Scenario, out: Option<PathBuf>, cache: Option<PathBuf>, workers: usize) -> RunContext {
        let out_dir = out.or_else(|| scenario.output_dir.clone()).unwrap_or_else(|| PathBuf::from("out"));
        let cache_dir = cache
            .or_else(|| scenario.cache_dir.clone())
            .or_else(|| std::env::var_os(CACHE_ENV).filter(|v| !v.is_empty()).map(PathBuf::from));
        let exec = if workers == 1 { Exec::Sequential } else { Exec::Parallel };
        RunContext { out_dir, cache_dir, exec, workers }
    }

    fn prepare(&self) -> Result<()> {
        std::fs::create_dir_all(&self.out_dir).map_err(|e| Error::io(&self.out_dir, e))
    }

    fn write(&self, name: &str, body: &[u8], outputs: &mut Vec<String>) -> Result<()> {
        let path = self.out_dir.join(name);
        std::fs::write(&path, body).map_err(|e| Error::io(&path, e))?;
        outputs.push(name.to_string());
        Ok(())
    }
}

/// Written next to every command's outputs as `manifest.json`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Manifest {
    pub command: String,
    pub version: String,
    pub config_sha256: String,
    pub scenario: String,
    pub mode: Mode,
    pub tolerance: f64,
    pub workers: usize,
    pub parallel: bool,
    pub outputs: Vec<String>,
    /// Wall-clock seconds per phase.
    pub timings_s: BTreeMap<String, f64>,
    pub summary: serde_json::Value,
}

struct Clock {
    start: Instant,
    phases: BTreeMap<String, f64>,
}

impl Clock {
    fn new() -> Clock {
        Clock { start: Instant::now(), phases: BTreeMap::new() }
    }

    fn time<R>(&mut self, name: &str, f: impl FnOnce() -> R) -> R {
        let t = Instant::now();
        let r = f();
        self.phases.insert(name.into(), t.elapsed().as_secs_f64());
        r
    }

    fn finish(mut self) -> BTreeMap<String, f64> {
        self.phases.insert("total".into(), self.start.elapsed().as_secs_f64());
        self.phases
    }
}

fn finish(
    command: &str,
    scenario: &Scenario,
    ctx: &RunContext,
    mut outputs: Vec<String>,
    clock: Clock,
    summary: serde_json::Value,
) -> Result<Manifest> {
    outputs.push("manifest.json".into());
    let manifest = Manifest {
        command: command.into(),
        version: env!("CARGO_PKG_VERSION").into(),
        config_sha256: scenario.config_hash(),
        scenario: scenario.name.clone(),
        mode: scenario.mode,
        tolerance: scenario.tolerance,
        workers: ctx.workers,
        parallel: cfg!(feature = "parallel") && ctx.exec == Exec::Parallel,
        outputs,
        timings_s: clock.finish(),
        summary,
    };
    let body = serde_json::to_vec_pretty(&manifest).expect("manifest serializes");
    let path = ctx.out_dir.join("manifest.json");
    std::fs::write(&path, body).map_err(|e| Error::io(&path, e))?;
    Ok(manifest)
}

fn json<T: Serialize>(value: &T) -> Vec<u8> {
    let mut v = serde_json::to_vec_pretty(value).expect("value serializes");
    v.push(b'\n');
    v
}

/// Reads a cached JSON value or computes and atomically stores it.
fn cached<T, F>(dir: Option<&Path>, name: &str, compute: F) -> Result<(T, bool)>
where
    T: Serialize + for<'de> Deserialize<'de>,
    F: FnOnce() -> Result<T>,
{
    let Some(dir) = dir else { return Ok((compute()?, false)) };
    let file = dir.join(name);
    if let Some(v) = std::fs::read(&file).ok().and_then(|b| serde_json::from_slice(&b).ok()) {
        return Ok((v, true));
    }
    let value = compute()?;
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    tmp.write_all(&serde_json::to_vec(&value).expect("value serializes")).map_err(|e| Error::io(tmp.path(), e))?;
    tmp.persist(&file).map_err(|e| Error::io(&file, e.error))?;
    Ok((value, false))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct SiteShifts {
    shifts: Vec<SiteShift>,
    convergence: Option<Convergence>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct Convergence {
    basis: String,
    basis_size: usize,
    point_mhz: f64,
    reference_point_mhz: f64,
    relative_delta: f64,
}

/// Potential curve along the configured path, plus site shifts.
/// Writes `pec.csv`, `pec_meta.json` and the manifest.
pub fn cmd_pec(scenario: &Scenario, ctx: &RunContext) -> Result<Manifest> {
    scenario.validate()?;
    ctx.prepare()?;
    let mut clock = Clock::new();
    let species = scenario.species()?;
    let section = &scenario.pec;
    let center = section.center_state()?;
    let path = section.path()?;
    let model = clock.time("model", || {
        PecModel::new(&species, center, build_basis(&center, &section.basis)?, section.grid, ctx.exec)
    })?;
    let key = cache_key(&model, &path);
    let cache = ctx.cache_dir.as_ref().map(PecCache::new);
    let hit = cache.as_ref().and_then(|c| c.load(&key));
    let curve_hit = hit.is_some();
    let curve: PecCurve = match hit {
        Some(c) => c,
        None => {
            let c = clock.time("curve", || pec_curve(&model, &path, ctx.exec))?;
            if let Some(cache) = &cache {
                cache.store(&key, &c)?;
            }
            c
        }
    };

    let mut shifts_hit = None;
    let shifts = if section.site_shifts {
        let mut material = key.clone();
        material.push_str(&serde_json::to_string(&scenario.geometry).expect("geometry serializes"));
        material.push_str(&serde_json::to_string(&section.convergence_basis).expect("basis serializes"));
        let name = format!("shifts-{}.json", hex::encode(Sha256::digest(material.as_bytes())));
        let (s, hit) = clock.time("site_shifts", || {
            cached(ctx.cache_dir.as_deref(), &name, || site_shifts(&species, &model, scenario, ctx.exec))
        })?;
        shifts_hit = Some(hit);
        Some(s)
    } else {
        None
    };

    let mut outputs = Vec::new();
    write_curve_csv(&curve, &ctx.out_dir.join("pec.csv"))?;
    outputs.push("pec.csv".into());
    let extra = serde_json::json!({ "cache_key": key, "site_shifts": shifts });
    write_metadata(&curve, extra, &ctx.out_dir.join("pec_meta.json"))?;
    outputs.push("pec_meta.json".into());
    let summary = serde_json::json!({
        "basis_size": curve.meta.basis_size,
        "points": curve.path.len(),
        "ties": curve.ties.len(),
        "curve_cache_hit": curve_hit,
        "shifts_cache_hit": shifts_hit,
        "site_shifts": shifts.as_ref().map(|s| &s.shifts),
        "convergence": shifts.as_ref().and_then(|s| s.convergence.as_ref()),
    });
    finish("pec", scenario, ctx, outputs, clock, summary)
}

fn site_shifts(species: &SpeciesData, model: &PecModel, scenario: &Scenario, exec: Exec) -> Result<SiteShifts> {
    let g = &scenario.geometry;
    let mut shifts = Vec::new();
    for q in 0..2 {
        for mode in [ShiftMode::Point, ShiftMode::GaussianAveraged] {
            shifts.push(site_shift(model, g, q, mode, exec)?);
        }
    }
    let convergence = match &scenario.pec.convergence_basis {
        None => None,
        Some(spec) => {
            let basis = build_basis(&model.center, spec)?;
            let (description, size) = (basis.description.clone(), basis.len());
            let big = PecModel::new(species, model.center, basis, model.grid, exec)?;
            let point = site_shift(&big, g, 0, ShiftMode::Point, exec)?.point_mhz;
            let reference = shifts[0].point_mhz;
            Some(Convergence {
                basis: description,
                basis_size: size,
                point_mhz: point,
                reference_point_mhz: reference,
                relative_delta: ((reference - point) / point).abs(),
            })
        }
    };
    Ok(SiteShifts { shifts, convergence })
}

/// Gate on the scenario input. Writes `gate.json` (the full outcome),
/// optionally `trajectory.csv`, and the manifest.
pub fn cmd_gate(scenario: &Scenario, ctx: &RunContext) -> Result<Manifest> {
    scenario.validate()?;
    ctx.prepare()?;
    let mut clock = Clock::new();
    let input = scenario.input.resolve(scenario.encoding)?;
    let outcome = clock.time("gate", || {
        run_gate(&input, &scenario.scheme, &scenario.schedule, &scenario.gate_options(), ctx.exec)
    })?;
    let mut outputs = Vec::new();
    ctx.write("gate.json", &json(&outcome), &mut outputs)?;
    if scenario.trajectory {
        let csv = clock.time("trajectory", || trajectory_csv(scenario, &input))?;
        ctx.write("trajectory.csv", csv.as_bytes(), &mut outputs)?;
    }
    finish("gate", scenario, ctx, outputs, clock, gate_summary(&outcome))
}

/// Headline numbers of a gate run: the heralded fidelity with both detuning
/// conventions, and the per-logical emission probabilities.
pub fn gate_summary(outcome: &GateOutcome) -> serde_json::Value {
    serde_json::json!({
        "fidelity": outcome.sign_resolved.fidelity.raw,
        "fidelity_sign_resolved": outcome.sign_resolved.fidelity,
        "fidelity_symmetrized": outcome.symmetrized.fidelity,
        "unconditional_sign_resolved": outcome.sign_resolved.unconditional,
        "unconditional_symmetrized": outcome.symmetrized.unconditional,
        "p_emit": outcome.sign_resolved.p_emit,
        "logical_populations": outcome.logical_populations,
        "logical_phase": outcome.logical_phase,
        "integration": outcome.integration,
    })
}

const LEVEL_COLUMNS: [(&str, Level, usize); DIM] = [
    ("s0", Level::S, 0),
    ("s1", Level::S, 1),
    ("p0", Level::P, 0),
    ("p1", Level::P, 1),
    ("e0", Level::E, 0),
    ("e1", Level::E, 1),
    ("r0", Level::R, 0),
    ("r1", Level::R, 1),
];

/// Per-step populations and emitted amplitude of every configuration, with
/// sign-resolved detunings and the non-Hermitian propagator.
fn trajectory_csv(scenario: &Scenario, input: &LogicalState) -> Result<String> {
    let schedule = &scenario.schedule;
    let n = schedule.samples_per_window();
    let t_sep = schedule.separation();
    let times: Vec<f64> = (0..=2 * n).map(|i| i as f64 * t_sep / n as f64).collect();
    let mut ground = [C64::default(); DIM];
    ground[idx(Level::S, 0)] = C64::new(1.0, 0.0);
    let mut out = String::from("config,t_us");
    for (name, _, _) in LEVEL_COLUMNS {
        out.push_str(&format!(",pop_{name}"));
    }
    out.push_str(",emission_re,emission_im\n");
    for (config, _) in &input.amplitudes {
        let d = detuning_for_config(&scenario.scheme, config, false);
        let tr = evolve(&scenario.scheme, schedule, &d, ground, &times, times[n], &Tolerance::new(scenario.tolerance))?;
        let amp = emission_amplitude(&tr, &scenario.scheme);
        let label = config.label().trim_start_matches('|').trim_end_matches('⟩').to_string();
        for ((t, psi), a) in tr.times.iter().zip(&tr.states).zip(&amp) {
            out.push_str(&format!("{label},{t:e}"));
            for (_, level, k) in LEVEL_COLUMNS {
                out.push_str(&format!(",{:e}", psi[idx(level, k)].norm_sqr()));
            }
            out.push_str(&format!(",{:e},{:e}\n", a.re, a.im));
        }
    }
    Ok(out)
}

/// One-dimensional sweep. `axis` and `values` override the scenario section.
/// Writes `sweep.csv`, `sweep.json` and the manifest.
pub fn cmd_sweep(scenario: &Scenario, ctx: &RunContext, axis: Option<&str>, values: Option<Vec<f64>>) -> Result<Manifest> {
    scenario.validate()?;
    let axis_name = axis
        .map(str::to_string)
        .or_else(|| scenario.sweep.as_ref().map(|s| s.axis.clone()))
        .ok_or_else(|| Error::Validation("sweep needs an axis (--axis or [sweep].axis)".into()))?;
    let axis = SweepAxis::parse(&axis_name)?;
    let grid = match values {
        Some(v) => v,
        None => scenario
            .sweep
            .as_ref()
            .ok_or_else(|| Error::Validation("sweep needs values (--values or [sweep])".into()))?
            .grid()?,
    };
    ctx.prepare()?;
    let mut clock = Clock::new();
    let input = scenario.input.resolve(scenario.encoding)?;
    let table = clock.time("sweep", || {
        sweep(&input, &scenario.scheme, &scenario.schedule, &scenario.gate_options(), &axis, &grid, ctx.exec)
    })?;
    let mut outputs = Vec::new();
    ctx.write("sweep.csv", table.to_csv().as_bytes(), &mut outputs)?;
    ctx.write("sweep.json", &json(&table), &mut outputs)?;
    let failed = table.rows.iter().filter(|r| r.error.is_some()).count();
    let summary = serde_json::json!({ "axis": axis.name(), "points": grid.len(), "failed_points": failed });
    finish("sweep", scenario, ctx, outputs, clock, summary)
}

/// The three operating-regime panels at the fixed caption baseline.
/// Writes `fig3_a.csv`, `fig3_b.csv`, `fig3_c.csv` and the manifest.
pub fn cmd_fig3(scenario: &Scenario, ctx: &RunContext) -> Result<Manifest> {
    if !(scenario.tolerance > 0.0 && scenario.tolerance < 1e-2) {
        return Err(Error::Validation(format!("tolerance {} must lie in (0, 1e-2)", scenario.tolerance)));
    }
    ctx.prepare()?;
    let mut clock = Clock::new();
    let mut outputs = Vec::new();
    let mut summary = serde_json::Map::new();
    for panel in fig3_panels() {
        let table: SweepTable =
            clock.time(&format!("panel_{}", panel.name), || fig3_panel(&panel, &scenario.gate_options(), ctx.exec))?;
        ctx.write(&format!("fig3_{}.csv", panel.name), table.to_csv().as_bytes(), &mut outputs)?;
        summary.insert(
            panel.name.clone(),
            serde_json::json!({ "axis": panel.axis.name(), "logical": panel.logical, "points": panel.values.len() }),
        );
    }
    finish("fig3", scenario, ctx, outputs, clock, serde_json::Value::Object(summary))
}

/// Reads the joint photon–logical state from a gate outcome record or from a
/// bare joint-state record.
pub fn read_joint(path: &Path, choice: JointChoice) -> Result<JointState> {
    let text = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    let parse = |m: String| Error::Parse { path: path.to_path_buf(), message: m };
    let value: serde_json::Value = serde_json::from_slice(&text).map_err(|e| parse(e.to_string()))?;
    let field = match choice {
        JointChoice::SignResolved => "sign_resolved",
        JointChoice::Symmetrized => "symmetrized",
    };
    let joint = value.get(field).cloned().unwrap_or(value);
    serde_json::from_value(joint).map_err(|e| parse(e.to_string()))
}

/// Entanglement swap of two terminals. `first`/`second` override the
/// scenario section. Writes `swap.json` and the manifest.
pub fn cmd_swap(
    scenario: &Scenario,
    ctx: &RunContext,
    first: Option<PathBuf>,
    second: Option<PathBuf>,
) -> Result<Manifest> {
    let section = scenario.swap.clone();
    let choice = section.as_ref().map(|s| s.joint).unwrap_or_default();
    let first = first.or_else(|| section.as_ref().map(|s| s.first.clone()));
    let second = second.or_else(|| section.as_ref().map(|s| s.second.clone()));
    let (Some(first), Some(second)) = (first, second) else {
        return Err(Error::Validation("swap needs two terminal records (--first/--second or [swap])".into()));
    };
    for f in [&first, &second] {
        if !f.is_file() {
            return Err(Error::Validation(format!("referenced file {} does not exist", f.display())));
        }
    }
    ctx.prepare()?;
    let mut clock = Clock::new();
    let a = read_joint(&first, choice)?;
    let b = read_joint(&second, choice)?;
    let report: SwapReport = clock.time("swap", || end_to_end(&a, &b))?;
    let mut outputs = Vec::new();
    ctx.write("swap.json", &json(&report), &mut outputs)?;
    let summary = serde_json::json!({
        "first": first.display().to_string(),
        "second": second.display().to_string(),
        "joint": choice,
        "outcomes": report.outcomes,
        "total_probability": report.total_probability,
        "mean_fidelity": report.mean_fidelity,
    });
    finish("swap", scenario, ctx, outputs, clock, summary)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_scenario_is_the_implementation_point() {
        let s = Scenario::default();
        assert_eq!(s.scheme, LevelScheme::implementation());
        assert_eq!(s.schedule.sigma_us, 3.5);
        assert_eq!(s.encoding, Encoding::FourQubit);
        assert_eq!(s.pec.basis, BasisSpec::around_d(45, 3.0));
        s.validate().unwrap();
        assert_eq!(s.config_hash(), Scenario::default().config_hash());
    }

    #[test]
    fn inputs_resolve_and_reject_bad_norms() {
        let enc = Encoding::FourQubit;
        let one = InputSpec { logical: Some("1L".into()), ..InputSpec::default() }.resolve(enc).unwrap();
        assert_eq!(one, LogicalState::one(enc));
        let bad = InputSpec { logical_amplitudes: Some(vec![[1.0, 0.0], [1.0, 0.0]]), ..InputSpec::default() };
        let msg = bad.resolve(enc).unwrap_err().to_string();
        assert!(msg.contains("defect"), "{msg}");
        let both = InputSpec { logical: Some("0L".into()), logical_amplitudes: Some(vec![]), configurations: None };
        assert!(both.resolve(enc).is_err());
        let text = "[input.configurations]\n\"0000\" = [0.6, 0.0]\n\"0101\" = [0.0, 0.8]\n";
        let s: Scenario = toml::from_str(text).unwrap();
        assert_eq!(s.input.resolve(enc).unwrap().amplitudes.len(), 2);
    }

    #[test]
    fn unknown_fields_and_missing_files_are_validation_errors() {
        assert!(toml::from_str::<Scenario>("colour = 3").is_err());
        let s = Scenario { species_file: Some("/nonexistent/species.toml".into()), ..Scenario::default() };
        let e = s.validate().unwrap_err();
        assert!(e.is_validation() && e.to_string().contains("/nonexistent/species.toml"));
    }

    #[test]
    fn relative_paths_follow_the_scenario_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.toml");
        std::fs::write(&path, "output_dir = \"results\"\n[swap]\nfirst = \"a.json\"\nsecond = \"/abs/b.json\"\n").unwrap();
        let s = Scenario::load(&path).unwrap();
        assert_eq!(s.output_dir.unwrap(), dir.path().join("results"));
        let sw = s.swap.unwrap();
        assert_eq!(sw.first, dir.path().join("a.json"));
        assert_eq!(sw.second, PathBuf::from("/abs/b.json"));
    }

    #[test]
    fn sweep_grids() {
        let s = SweepSection { axis: "sigma".into(), values: None, start: Some(1.0), stop: Some(100.0), points: Some(3), log: true };
        let g = s.grid().unwrap();
        assert!((g[1] - 10.0).abs() < 1e-12);
        let bad = SweepSection { start: Some(0.0), ..s };
        assert!(bad.grid().is_err());
    }

    #[test]
    fn pec_path_runs_along_the_requested_direction() {
        let p = PecSection { points: 3, theta_rad: 0.0, ..PecSection::default() }.path().unwrap();
        assert!(p.iter().all(|q| q.1.abs() < 1e-12));
        assert!((p[2].0 - nm_to_bohr(250.0)).abs() < 1e-9);
    }
}

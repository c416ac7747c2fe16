//! Canned experiment drivers: a single propagation, a time-step/order sweep,
//! a potential-gradient sweep and a spectral-chirp sweep, each emitting one
//! CSV per parameter point plus a manifest of the fully resolved
//! configuration.
//!
//! Parameter points are independent propagations and run on a worker pool;
//! files are written afterwards by the caller thread, so identical
//! configurations produce bit-identical outputs.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::config::{format_f64, KvMap, KvReader};
use crate::error::{Error, Result};
use crate::grid::{gaussian_packet, SpatialGrid};
use crate::norm::{norm_orders, NormOrderReport};
use crate::propagator::{
    CouplingOperator, LinearPotentialPair, NormSeries, PerturbativeState, StepOperator,
    SystemHamiltonian,
};
use crate::pulse::LaserPulse;

/// Mass fraction in the outermost grid cells above which a run is aborted.
const EDGE_CELL_FRACTION: f64 = 1e-8;
/// Mass fraction in the outer 10% bands above which a warning is emitted.
const BAND_FRACTION: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScenarioKind {
    Single,
    DtKSweep,
    GradientSweep,
    ChirpSweep,
}

impl ScenarioKind {
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "single" => Ok(Self::Single),
            "dt_k_sweep" => Ok(Self::DtKSweep),
            "gradient_sweep" => Ok(Self::GradientSweep),
            "chirp_sweep" => Ok(Self::ChirpSweep),
            other => Err(Error::Config(format!("unknown scenario '{other}'"))),
        }
    }

    pub fn is_sweep(&self) -> bool {
        !matches!(self, Self::Single)
    }
}

impl fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ScenarioKind::Single => "single",
            ScenarioKind::DtKSweep => "dt_k_sweep",
            ScenarioKind::GradientSweep => "gradient_sweep",
            ScenarioKind::ChirpSweep => "chirp_sweep",
        };
        f.write_str(s)
    }
}

/// Fully resolved experiment description.
#[derive(Clone, Debug)]
pub struct ScenarioConfig {
    pub kind: ScenarioKind,
    pub r_min: f64,
    pub r_max: f64,
    pub n_points: usize,
    pub mass: f64,
    pub potentials: LinearPotentialPair,
    pub mu: f64,
    pub field_amplitude: f64,
    pub fwhm: f64,
    pub carrier_frequency: f64,
    pub center_time: f64,
    pub spectral_chirp: f64,
    pub packet_center: f64,
    pub packet_width: f64,
    pub packet_momentum: f64,
    pub packet_state: u8,
    pub dt: f64,
    pub n_steps: usize,
    pub max_order: usize,
    pub report_stride: usize,
    pub dt_list: Vec<f64>,
    pub k_list: Vec<usize>,
    pub gradient_list: Vec<f64>,
    pub chirp_list: Vec<f64>,
    pub jobs: usize,
}

impl ScenarioConfig {
    pub fn from_kv(map: KvMap) -> Result<Self> {
        let mut r = KvReader::new(map);
        let kind = ScenarioKind::from_str(&r.string_default("scenario", "single"))?;
        let cfg = Self {
            kind,
            r_min: r.f64_required("r_min")?,
            r_max: r.f64_required("r_max")?,
            n_points: r.usize_required("n_points")?,
            mass: r.f64_default("mass", 1.0)?,
            potentials: LinearPotentialPair {
                gradient: r.f64_default("gradient", 0.0)?,
                offset0: r.f64_default("offset0", 0.0)?,
                offset1: r.f64_default("offset1", 0.0)?,
            },
            mu: r.f64_required("mu")?,
            field_amplitude: r.f64_required("field_amplitude")?,
            fwhm: r.time_required("fwhm")?,
            carrier_frequency: r.f64_required("carrier_frequency")?,
            center_time: r.time_required("center_time")?,
            spectral_chirp: r.f64_default("spectral_chirp", 0.0)?,
            packet_center: r.f64_required("packet_center")?,
            packet_width: r.f64_required("packet_width")?,
            packet_momentum: r.f64_default("packet_momentum", 0.0)?,
            packet_state: r.usize_default("packet_state", 1)? as u8,
            dt: r.time_required("dt")?,
            n_steps: r.usize_required("n_steps")?,
            max_order: r.usize_required("max_order")?,
            report_stride: r.usize_default("report_stride", 10)?,
            dt_list: r.time_list("dt_list")?,
            k_list: r.usize_list("k_list")?,
            gradient_list: r.f64_list("gradient_list")?,
            chirp_list: r.f64_list("chirp_list")?,
            jobs: r.usize_default("jobs", 0)?,
        };
        r.finish()?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_kv(&self) -> KvMap {
        let mut map = KvMap::new();
        let mut put = |k: &str, v: String| {
            map.insert(k.to_string(), v);
        };
        put("scenario", self.kind.to_string());
        put("r_min", format_f64(self.r_min));
        put("r_max", format_f64(self.r_max));
        put("n_points", self.n_points.to_string());
        put("mass", format_f64(self.mass));
        put("gradient", format_f64(self.potentials.gradient));
        put("offset0", format_f64(self.potentials.offset0));
        put("offset1", format_f64(self.potentials.offset1));
        put("mu", format_f64(self.mu));
        put("field_amplitude", format_f64(self.field_amplitude));
        put("fwhm", format_f64(self.fwhm));
        put("carrier_frequency", format_f64(self.carrier_frequency));
        put("center_time", format_f64(self.center_time));
        put("spectral_chirp", format_f64(self.spectral_chirp));
        put("packet_center", format_f64(self.packet_center));
        put("packet_width", format_f64(self.packet_width));
        put("packet_momentum", format_f64(self.packet_momentum));
        put("packet_state", self.packet_state.to_string());
        put("dt", format_f64(self.dt));
        put("n_steps", self.n_steps.to_string());
        put("max_order", self.max_order.to_string());
        put("report_stride", self.report_stride.to_string());
        if !self.dt_list.is_empty() {
            let list: Vec<String> = self.dt_list.iter().map(|v| format_f64(*v)).collect();
            put("dt_list", list.join(","));
        }
        if !self.k_list.is_empty() {
            let list: Vec<String> = self.k_list.iter().map(|v| v.to_string()).collect();
            put("k_list", list.join(","));
        }
        if !self.gradient_list.is_empty() {
            let list: Vec<String> = self.gradient_list.iter().map(|v| format_f64(*v)).collect();
            put("gradient_list", list.join(","));
        }
        if !self.chirp_list.is_empty() {
            let list: Vec<String> = self.chirp_list.iter().map(|v| format_f64(*v)).collect();
            put("chirp_list", list.join(","));
        }
        put("jobs", self.jobs.to_string());
        map
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.fwhm > 0.0) {
            return Err(Error::Config("fwhm must be > 0".into()));
        }
        if !(self.dt > 0.0) {
            return Err(Error::Config("dt must be > 0".into()));
        }
        if self.n_steps == 0 {
            return Err(Error::Config("n_steps must be >= 1".into()));
        }
        if self.report_stride == 0 {
            return Err(Error::Config("report_stride must be >= 1".into()));
        }
        if !(self.mass > 0.0) {
            return Err(Error::Config("mass must be > 0".into()));
        }
        if !(self.packet_width > 0.0) {
            return Err(Error::Config("packet_width must be > 0".into()));
        }
        let total_time = self.dt * self.n_steps as f64;
        if total_time < self.center_time {
            return Err(Error::Config(format!(
                "run of {total_time} a.u. does not reach the pulse center at {} a.u.",
                self.center_time
            )));
        }
        match self.kind {
            ScenarioKind::DtKSweep => {
                if self.dt_list.is_empty() || self.k_list.is_empty() {
                    return Err(Error::Config(
                        "dt_k_sweep needs non-empty dt_list and k_list".into(),
                    ));
                }
            }
            ScenarioKind::GradientSweep => {
                if self.gradient_list.is_empty() {
                    return Err(Error::Config(
                        "gradient_sweep needs a non-empty gradient_list".into(),
                    ));
                }
            }
            ScenarioKind::ChirpSweep => {
                if self.chirp_list.is_empty() {
                    return Err(Error::Config(
                        "chirp_sweep needs a non-empty chirp_list".into(),
                    ));
                }
            }
            ScenarioKind::Single => {}
        }
        Ok(())
    }

    /// Pulse for a given chirp value, all other parameters from the config.
    pub fn pulse_with_chirp(&self, chirp: f64) -> Result<LaserPulse> {
        LaserPulse::from_fwhm(
            self.field_amplitude,
            self.fwhm,
            self.center_time,
            self.carrier_frequency,
            chirp,
        )
    }

    /// The parameter points this scenario expands into.
    pub fn points(&self) -> Vec<PointParams> {
        match self.kind {
            ScenarioKind::Single => vec![PointParams {
                dt: self.dt,
                k: self.max_order,
                gradient: self.potentials.gradient,
                chirp: self.spectral_chirp,
                label: "run".to_string(),
            }],
            ScenarioKind::DtKSweep => {
                let mut out = Vec::new();
                for &dt in &self.dt_list {
                    for &k in &self.k_list {
                        out.push(PointParams {
                            dt,
                            k,
                            gradient: self.potentials.gradient,
                            chirp: self.spectral_chirp,
                            label: format!("dt{dt:.6e}_k{k}"),
                        });
                    }
                }
                out
            }
            ScenarioKind::GradientSweep => self
                .gradient_list
                .iter()
                .map(|&g| PointParams {
                    dt: self.dt,
                    k: self.max_order,
                    gradient: g,
                    chirp: self.spectral_chirp,
                    label: format!("m0{g:.6e}"),
                })
                .collect(),
            ScenarioKind::ChirpSweep => self
                .chirp_list
                .iter()
                .map(|&b2| PointParams {
                    dt: self.dt,
                    k: self.max_order,
                    gradient: self.potentials.gradient,
                    chirp: b2,
                    label: format!("b2{b2:.6e}"),
                })
                .collect(),
        }
    }
}

/// One parameter point of a sweep.
#[derive(Clone, Debug)]
pub struct PointParams {
    pub dt: f64,
    pub k: usize,
    pub gradient: f64,
    pub chirp: f64,
    pub label: String,
}

/// Result of one propagation: per-report norm decomposition plus any
/// boundary warnings.
#[derive(Clone, Debug)]
pub struct RunResult {
    pub params: PointParams,
    pub reports: Vec<NormOrderReport>,
    pub warnings: Vec<String>,
}

impl RunResult {
    pub fn norm_series(&self) -> NormSeries {
        NormSeries {
            dt: self.params.dt,
            times: self.reports.iter().map(|r| r.time).collect(),
            deviations: self.reports.iter().map(|r| r.deviation()).collect(),
        }
    }

    pub fn final_report(&self) -> &NormOrderReport {
        self.reports.last().expect("at least the t=0 report")
    }
}

/// Propagate one parameter point. The number of steps and the report stride
/// are rescaled so that every point covers the same physical time span and
/// reports at (approximately) the same physical times.
pub fn run_point(cfg: &ScenarioConfig, point: &PointParams) -> Result<RunResult> {
    let grid = SpatialGrid::new(cfg.r_min, cfg.r_max, cfg.n_points)?;
    let potentials = LinearPotentialPair {
        gradient: point.gradient,
        offset0: cfg.potentials.offset0,
        offset1: cfg.potentials.offset1,
    };
    let h = SystemHamiltonian::from_linear(grid.clone(), cfg.mass, &potentials)?;
    let pulse = cfg.pulse_with_chirp(point.chirp)?;
    let coupling = CouplingOperator::new(cfg.mu, pulse);
    let psi0 = gaussian_packet(
        &grid,
        cfg.packet_center,
        cfg.packet_width,
        cfg.packet_momentum,
        cfg.packet_state,
    )?;

    let total_time = cfg.dt * cfg.n_steps as f64;
    let n_steps = ((total_time / point.dt).round() as usize).max(1);
    let report_period = cfg.report_stride as f64 * cfg.dt;
    let stride = ((report_period / point.dt).round() as usize).max(1);

    let mut ps = PerturbativeState::new(psi0, point.k, point.dt)?;
    let step = StepOperator::new(&h, point.dt);
    let mut reports = Vec::with_capacity(n_steps / stride + 2);
    let mut warnings = Vec::new();

    let guard = |ps: &PerturbativeState, warnings: &mut Vec<String>| -> Result<()> {
        let wf = ps.reconstruct();
        let total = wf.norm_sq();
        if total == 0.0 {
            return Ok(());
        }
        let edge = (wf.psi1[0].norm_sqr()
            + wf.psi0[0].norm_sqr()
            + wf.psi1[cfg.n_points - 1].norm_sqr()
            + wf.psi0[cfg.n_points - 1].norm_sqr())
            * grid.dr;
        if edge / total > EDGE_CELL_FRACTION {
            return Err(Error::Guard(format!(
                "packet reached the grid edge at t = {} (edge fraction {:.3e})",
                ps.time(),
                edge / total
            )));
        }
        let band = 0.1 * (cfg.r_max - cfg.r_min);
        let outer = wf.mass_in_range(cfg.r_min, cfg.r_min + band)
            + wf.mass_in_range(cfg.r_max - band, cfg.r_max);
        if outer / total > BAND_FRACTION && warnings.is_empty() {
            warnings.push(format!(
                "packet entered the outer 10% of the grid at t = {} (fraction {:.3e})",
                ps.time(),
                outer / total
            ));
        }
        Ok(())
    };

    guard(&ps, &mut warnings)?;
    reports.push(norm_orders(&ps)?);
    for i in 1..=n_steps {
        ps.advance(&step, &coupling);
        if i % stride == 0 || i == n_steps {
            guard(&ps, &mut warnings)?;
            reports.push(norm_orders(&ps)?);
        }
    }
    Ok(RunResult {
        params: point.clone(),
        reports,
        warnings,
    })
}

/// Run every parameter point of the scenario, in parallel.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<Vec<RunResult>> {
    cfg.validate()?;
    let points = cfg.points();
    let execute = || -> Result<Vec<RunResult>> {
        points
            .par_iter()
            .map(|p| run_point(cfg, p))
            .collect::<Result<Vec<_>>>()
    };
    if cfg.jobs > 0 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.jobs)
            .build()
            .map_err(|e| Error::Usage(format!("cannot build worker pool: {e}")))?;
        pool.install(execute)
    } else {
        execute()
    }
}

/// CSV rendering of one run: `t, total_norm, N_2, N_4, ..., class_1, ...`.
pub fn point_csv(result: &RunResult) -> String {
    let k = result.params.k;
    let mut out = String::new();
    out.push('t');
    out.push_str(",total_norm");
    for m in 1..=k {
        out.push_str(&format!(",N_{}", 2 * m));
    }
    for m in 1..=k {
        out.push_str(&format!(",class_{m}"));
    }
    out.push('\n');
    for report in &result.reports {
        out.push_str(&format!("{:.15e}", report.time));
        out.push_str(&format!(",{:.15e}", report.total_norm));
        for e in &report.entries {
            out.push_str(&format!(",{:.15e}", e.value));
        }
        for e in &report.entries {
            out.push(',');
            out.push_str(e.class.letter());
        }
        out.push('\n');
    }
    out
}

/// Write one CSV per point plus the manifest; returns the written paths
/// (outputs first, manifest last).
pub fn write_outputs(
    cfg: &ScenarioConfig,
    results: &[RunResult],
    out_dir: &Path,
) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(out_dir)
        .map_err(|e| Error::Usage(format!("cannot create {}: {e}", out_dir.display())))?;
    let mut written = Vec::new();
    let mut manifest = String::new();
    manifest.push_str("# resolved scenario configuration; reload with --config\n");
    for result in results {
        let name = format!("{}.csv", result.params.label);
        let path = out_dir.join(&name);
        fs::write(&path, point_csv(result))
            .map_err(|e| Error::Usage(format!("cannot write {}: {e}", path.display())))?;
        manifest.push_str(&format!("# output {name}\n"));
        written.push(path);
    }
    manifest.push_str(&crate::config::format_kv(&cfg.to_kv()));
    let manifest_path = out_dir.join("manifest.cfg");
    fs::write(&manifest_path, manifest)
        .map_err(|e| Error::Usage(format!("cannot write {}: {e}", manifest_path.display())))?;
    written.push(manifest_path);
    Ok(written)
}

//! Study configuration, orchestration and CSV reports.
//!
//! Configuration is a flat TOML document. Recognized keys (all optional):
//!
//! | key | type | default |
//! |---|---|---|
//! | `study` | `"space"`, `"time"`, `"conditioning"`, `"single"` | `"space"` |
//! | `meshes` | list of subdivisions `n` (`dx = 1/n`) | `[2, 4, 8, 16, 32]` |
//! | `dt_list` | list of time steps | `[1e-5]` |
//! | `T` | final time | `1e-3` |
//! | `rho_f`, `rho_s`, `nu_f`, `nu_s`, `lambda` | float | `1.0` |
//! | `lm_coarsening` | integer | `1` |
//! | `solver` | `"cg"`, `"pcg"`, `"direct"` | `"pcg"` |
//! | `rel_tol` | float | `1e-10` |
//! | `max_iter` | integer, `0` = ten times the dimension | `0` |
//! | `fluid_neumann` | list of side names | `["left", "right"]` |
//! | `solid_neumann` | list of side names | `[]` |
//! | `exact_variant` | `"corrected"`, `"printed"` | `"corrected"` |
//! | `eigen_method` | `"auto"`, `"dense"`, `"lanczos"` | `"auto"` |
//! | `output` | path | stdout |
//!
//! A space study runs every mesh with the single time step; a time study runs
//! every time step on the single mesh; a conditioning study covers every
//! (mesh, time step) pair; a single run needs one of each.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::str::FromStr;

use rayon::prelude::*;

use crate::assembly::{BlockOperatorSet, BoundaryLayout, Discretization, PhysicalConstants};
use crate::conditioning::{
    auto_mode, condition_row, fitted_exponent, EigenMode, LanczosOptions, DEFAULT_DENSE_CAP,
};
use crate::coupling::{
    run_transient, step_count, FsiSystem, SchurSolver, StepDiagnostics, TimeState,
};
use crate::error::{FsiError, Result};
use crate::manufactured::{
    compute_error_norms, convergence_rate, DiscreteFields, ErrorNorms, ExactSolution, Variant,
};
use crate::mesh::BoundaryTag;
use crate::sparse::KrylovOptions;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum StudyKind {
    #[default]
    Space,
    Time,
    Conditioning,
    Single,
}

impl StudyKind {
    pub fn as_str(self) -> &'static str {
        match self {
            StudyKind::Space => "space",
            StudyKind::Time => "time",
            StudyKind::Conditioning => "conditioning",
            StudyKind::Single => "single",
        }
    }
}

impl FromStr for StudyKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "space" => Ok(StudyKind::Space),
            "time" => Ok(StudyKind::Time),
            "conditioning" => Ok(StudyKind::Conditioning),
            "single" => Ok(StudyKind::Single),
            _ => Err(format!(
                "expected space, time, conditioning or single; got `{s}`"
            )),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum EigenChoice {
    #[default]
    Auto,
    Dense,
    Lanczos,
}

impl EigenChoice {
    pub fn as_str(self) -> &'static str {
        match self {
            EigenChoice::Auto => "auto",
            EigenChoice::Dense => "dense",
            EigenChoice::Lanczos => "lanczos",
        }
    }

    pub fn mode(self, subdivisions: usize) -> EigenMode {
        match self {
            EigenChoice::Auto => auto_mode(subdivisions),
            EigenChoice::Dense => EigenMode::Dense {
                cap: DEFAULT_DENSE_CAP,
            },
            EigenChoice::Lanczos => EigenMode::Lanczos(LanczosOptions::default()),
        }
    }
}

impl FromStr for EigenChoice {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "auto" => Ok(EigenChoice::Auto),
            "dense" => Ok(EigenChoice::Dense),
            "lanczos" => Ok(EigenChoice::Lanczos),
            _ => Err(format!("expected auto, dense or lanczos; got `{s}`")),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StudyConfig {
    pub study: StudyKind,
    pub meshes: Vec<usize>,
    pub dt_list: Vec<f64>,
    pub t_final: f64,
    pub constants: PhysicalConstants,
    pub lm_coarsening: usize,
    pub solver: SchurSolver,
    pub rel_tol: f64,
    /// 0 selects ten times the Schur dimension
    pub max_iter: usize,
    pub layout: BoundaryLayout,
    pub exact_variant: Variant,
    pub eigen_method: EigenChoice,
    pub output: Option<PathBuf>,
}

impl Default for StudyConfig {
    fn default() -> Self {
        Self {
            study: StudyKind::Space,
            meshes: vec![2, 4, 8, 16, 32],
            dt_list: vec![1e-5],
            t_final: 1e-3,
            constants: PhysicalConstants::default(),
            lm_coarsening: 1,
            solver: SchurSolver::Pcg,
            rel_tol: 1e-10,
            max_iter: 0,
            layout: BoundaryLayout::default(),
            exact_variant: Variant::Corrected,
            eigen_method: EigenChoice::Auto,
            output: None,
        }
    }
}

fn cfg_err(key: &str, message: impl Into<String>) -> FsiError {
    FsiError::Config {
        key: key.to_string(),
        message: message.into(),
    }
}

fn as_float(key: &str, v: &toml::Value) -> Result<f64> {
    match v {
        toml::Value::Float(f) => Ok(*f),
        toml::Value::Integer(i) => Ok(*i as f64),
        other => Err(cfg_err(
            key,
            format!("expected a number, found {}", other.type_str()),
        )),
    }
}

fn as_uint(key: &str, v: &toml::Value) -> Result<usize> {
    match v {
        toml::Value::Integer(i) if *i >= 0 => Ok(*i as usize),
        toml::Value::Integer(i) => Err(cfg_err(
            key,
            format!("expected a non-negative integer, found {i}"),
        )),
        other => Err(cfg_err(
            key,
            format!("expected an integer, found {}", other.type_str()),
        )),
    }
}

fn as_str<'a>(key: &str, v: &'a toml::Value) -> Result<&'a str> {
    v.as_str()
        .ok_or_else(|| cfg_err(key, format!("expected a string, found {}", v.type_str())))
}

fn as_list<'a>(key: &str, v: &'a toml::Value) -> Result<&'a [toml::Value]> {
    v.as_array()
        .map(|a| a.as_slice())
        .ok_or_else(|| cfg_err(key, format!("expected a list, found {}", v.type_str())))
}

fn parse_enum<T: FromStr<Err = String>>(key: &str, v: &toml::Value) -> Result<T> {
    as_str(key, v)?.parse().map_err(|m| cfg_err(key, m))
}

fn parse_tags(key: &str, v: &toml::Value) -> Result<Vec<BoundaryTag>> {
    let mut out = Vec::new();
    for (i, item) in as_list(key, v)?.iter().enumerate() {
        let k = format!("{key}[{i}]");
        let s = as_str(&k, item)?;
        let tag =
            BoundaryTag::parse(s).ok_or_else(|| cfg_err(&k, format!("unknown side `{s}`")))?;
        if tag == BoundaryTag::Interface {
            return Err(cfg_err(&k, "the interface cannot carry Neumann data"));
        }
        if !out.contains(&tag) {
            out.push(tag);
        }
    }
    Ok(out)
}

/// Parses and validates a flat configuration document.
pub fn parse_config(text: &str) -> Result<StudyConfig> {
    let table: toml::Table = text
        .parse()
        .map_err(|e: toml::de::Error| cfg_err("<document>", e.message().to_string()))?;
    let mut c = StudyConfig::default();
    for (key, v) in &table {
        let k = key.as_str();
        match k {
            "study" => c.study = parse_enum(k, v)?,
            "meshes" => {
                c.meshes = as_list(k, v)?
                    .iter()
                    .enumerate()
                    .map(|(i, x)| as_uint(&format!("meshes[{i}]"), x))
                    .collect::<Result<_>>()?
            }
            "dt_list" => {
                c.dt_list = as_list(k, v)?
                    .iter()
                    .enumerate()
                    .map(|(i, x)| as_float(&format!("dt_list[{i}]"), x))
                    .collect::<Result<_>>()?
            }
            "T" => c.t_final = as_float(k, v)?,
            "rho_f" => c.constants.rho_f = as_float(k, v)?,
            "rho_s" => c.constants.rho_s = as_float(k, v)?,
            "nu_f" => c.constants.nu_f = as_float(k, v)?,
            "nu_s" => c.constants.nu_s = as_float(k, v)?,
            "lambda" => c.constants.lambda = as_float(k, v)?,
            "lm_coarsening" => c.lm_coarsening = as_uint(k, v)?,
            "solver" => c.solver = parse_enum(k, v)?,
            "rel_tol" => c.rel_tol = as_float(k, v)?,
            "max_iter" => c.max_iter = as_uint(k, v)?,
            "fluid_neumann" => c.layout.fluid_neumann = parse_tags(k, v)?,
            "solid_neumann" => c.layout.solid_neumann = parse_tags(k, v)?,
            "exact_variant" => c.exact_variant = parse_enum(k, v)?,
            "eigen_method" => c.eigen_method = parse_enum(k, v)?,
            "output" => c.output = Some(PathBuf::from(as_str(k, v)?)),
            _ => return Err(cfg_err(k, "unknown key")),
        }
    }
    c.validate()?;
    Ok(c)
}

impl StudyConfig {
    pub fn validate(&self) -> Result<()> {
        for (key, v) in [
            ("rho_f", self.constants.rho_f),
            ("rho_s", self.constants.rho_s),
            ("nu_f", self.constants.nu_f),
            ("nu_s", self.constants.nu_s),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(cfg_err(key, format!("must be positive, got {v}")));
            }
        }
        if !(self.constants.lambda >= 0.0 && self.constants.lambda.is_finite()) {
            return Err(cfg_err(
                "lambda",
                format!("must be non-negative, got {}", self.constants.lambda),
            ));
        }
        if self.meshes.is_empty() {
            return Err(cfg_err("meshes", "must not be empty"));
        }
        if let Some(i) = self.meshes.iter().position(|&n| n == 0) {
            return Err(cfg_err(
                &format!("meshes[{i}]"),
                "subdivisions must be at least 1",
            ));
        }
        if self.dt_list.is_empty() {
            return Err(cfg_err("dt_list", "must not be empty"));
        }
        if !(self.t_final > 0.0 && self.t_final.is_finite()) {
            return Err(cfg_err(
                "T",
                format!("must be positive, got {}", self.t_final),
            ));
        }
        for (i, &dt) in self.dt_list.iter().enumerate() {
            let key = format!("dt_list[{i}]");
            if !(dt > 0.0 && dt.is_finite()) {
                return Err(cfg_err(&key, format!("must be positive, got {dt}")));
            }
            step_count(self.t_final, dt).map_err(|_| {
                cfg_err(
                    &key,
                    format!("T = {} is not an integer multiple of {dt}", self.t_final),
                )
            })?;
        }
        if self.lm_coarsening == 0 {
            return Err(cfg_err("lm_coarsening", "must be at least 1"));
        }
        for (i, &n) in self.meshes.iter().enumerate() {
            if n % self.lm_coarsening != 0 {
                return Err(cfg_err(
                    &format!("meshes[{i}]"),
                    format!(
                        "{n} subdivisions are not divisible by lm_coarsening = {}",
                        self.lm_coarsening
                    ),
                ));
            }
        }
        if !(self.rel_tol > 0.0 && self.rel_tol < 1.0) {
            return Err(cfg_err(
                "rel_tol",
                format!("must lie in (0, 1), got {}", self.rel_tol),
            ));
        }
        match self.study {
            StudyKind::Space if self.dt_list.len() != 1 => Err(cfg_err(
                "dt_list",
                "a space study takes exactly one time step",
            )),
            StudyKind::Time if self.meshes.len() != 1 => {
                Err(cfg_err("meshes", "a time study takes exactly one mesh"))
            }
            StudyKind::Single if self.meshes.len() != 1 => {
                Err(cfg_err("meshes", "a single run takes exactly one mesh"))
            }
            StudyKind::Single if self.dt_list.len() != 1 => Err(cfg_err(
                "dt_list",
                "a single run takes exactly one time step",
            )),
            _ => Ok(()),
        }
    }

    pub fn krylov_options(&self) -> KrylovOptions {
        KrylovOptions {
            rel_tol: self.rel_tol,
            max_iter: (self.max_iter > 0).then_some(self.max_iter),
        }
    }

    pub fn exact(&self) -> ExactSolution {
        ExactSolution::new(self.constants, self.exact_variant)
    }

    /// The configuration as a TOML document that parses back to `self`.
    pub fn to_toml(&self) -> String {
        let floats = |v: &[f64]| {
            v.iter()
                .map(|x| format!("{x:?}"))
                .collect::<Vec<_>>()
                .join(", ")
        };
        let tags = |v: &[BoundaryTag]| {
            v.iter()
                .map(|t| format!("\"{}\"", t.as_str()))
                .collect::<Vec<_>>()
                .join(", ")
        };
        let meshes = self
            .meshes
            .iter()
            .map(|n| n.to_string())
            .collect::<Vec<_>>()
            .join(", ");
        let c = &self.constants;
        let mut s = String::new();
        let _ = writeln!(s, "study = \"{}\"", self.study.as_str());
        let _ = writeln!(s, "meshes = [{meshes}]");
        let _ = writeln!(s, "dt_list = [{}]", floats(&self.dt_list));
        let _ = writeln!(s, "T = {:?}", self.t_final);
        let _ = writeln!(s, "rho_f = {:?}", c.rho_f);
        let _ = writeln!(s, "rho_s = {:?}", c.rho_s);
        let _ = writeln!(s, "nu_f = {:?}", c.nu_f);
        let _ = writeln!(s, "nu_s = {:?}", c.nu_s);
        let _ = writeln!(s, "lambda = {:?}", c.lambda);
        let _ = writeln!(s, "lm_coarsening = {}", self.lm_coarsening);
        let _ = writeln!(s, "solver = \"{}\"", self.solver.as_str());
        let _ = writeln!(s, "rel_tol = {:?}", self.rel_tol);
        let _ = writeln!(s, "max_iter = {}", self.max_iter);
        let _ = writeln!(s, "fluid_neumann = [{}]", tags(&self.layout.fluid_neumann));
        let _ = writeln!(s, "solid_neumann = [{}]", tags(&self.layout.solid_neumann));
        let _ = writeln!(s, "exact_variant = \"{}\"", self.exact_variant.as_str());
        let _ = writeln!(s, "eigen_method = \"{}\"", self.eigen_method.as_str());
        if let Some(p) = &self.output {
            let _ = writeln!(
                s,
                "output = {}",
                toml::Value::String(p.display().to_string())
            );
        }
        s
    }
}

/// Builds the operators for one (mesh, dt) pair.
pub fn build_system(config: &StudyConfig, n: usize, dt: f64) -> Result<FsiSystem> {
    let disc = Discretization::unit_boxes(n, config.lm_coarsening, config.layout.clone())?;
    let blocks = BlockOperatorSet::assemble(disc, config.constants)?;
    FsiSystem::build(blocks, dt)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceRow {
    pub n: usize,
    pub dx: f64,
    pub dt: f64,
    /// `None` when the run failed; `status` then holds the error
    pub errors: Option<ErrorNorms>,
    pub iters_max: usize,
    pub iters_mean: f64,
    pub status: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConditioningRow {
    pub n: usize,
    pub dx: f64,
    pub dt: f64,
    pub cond_cg: f64,
    pub cond_pcg: f64,
    pub iters_cg: usize,
    pub iters_pcg: usize,
    pub method: &'static str,
    pub status: String,
}

#[derive(Clone, Debug, PartialEq)]
pub enum ReportBody {
    Convergence(Vec<ConvergenceRow>),
    Conditioning(Vec<ConditioningRow>),
    Steps {
        steps: Vec<StepDiagnostics>,
        errors: ErrorNorms,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct StudyReport {
    pub config: StudyConfig,
    pub body: ReportBody,
}

pub const CONVERGENCE_FIELDS: [&str; 6] = ["eta_l2", "eta_h1", "u_l2", "u_h1", "p_l2", "g_l2"];

fn field_values(e: &ErrorNorms) -> [f64; 6] {
    [e.eta_l2, e.eta_h1, e.u_l2, e.u_h1, e.p_l2, e.g_l2]
}

fn convergence_row(config: &StudyConfig, n: usize, dt: f64) -> ConvergenceRow {
    let exact = config.exact();
    let run = || -> Result<(ErrorNorms, Vec<StepDiagnostics>)> {
        let sys = build_system(config, n, dt)?;
        let s0 = TimeState::initial(&sys, &exact, 0.0);
        let (s, diags) = run_transient(
            &sys,
            s0,
            config.t_final,
            &exact,
            config.solver,
            &config.krylov_options(),
        )?;
        let fields = DiscreteFields {
            u: &s.u,
            p: &s.p,
            eta: &s.eta,
            g: &s.g,
        };
        let e = compute_error_norms(&sys.blocks().disc, fields, &exact, s.time)?;
        Ok((e, diags))
    };
    let (errors, iters_max, iters_mean, status) = match run() {
        Ok((e, d)) => {
            let max = d.iter().map(|x| x.schur_iterations).max().unwrap_or(0);
            let mean =
                d.iter().map(|x| x.schur_iterations as f64).sum::<f64>() / d.len().max(1) as f64;
            (Some(e), max, mean, "ok".to_string())
        }
        Err(e) => (None, 0, 0.0, e.kind().to_string()),
    };
    ConvergenceRow {
        n,
        dx: 1.0 / n as f64,
        dt,
        errors,
        iters_max,
        iters_mean,
        status,
    }
}

/// Full transient run per mesh; rates between consecutive meshes.
pub fn run_space_study(config: &StudyConfig) -> Result<StudyReport> {
    let mut c = config.clone();
    c.study = StudyKind::Space;
    c.validate()?;
    let dt = c.dt_list[0];
    let rows = c
        .meshes
        .par_iter()
        .map(|&n| convergence_row(&c, n, dt))
        .collect();
    Ok(StudyReport {
        config: c,
        body: ReportBody::Convergence(rows),
    })
}

/// Full transient run per time step on one mesh.
pub fn run_time_study(config: &StudyConfig) -> Result<StudyReport> {
    let mut c = config.clone();
    c.study = StudyKind::Time;
    c.validate()?;
    let n = c.meshes[0];
    let rows = c
        .dt_list
        .par_iter()
        .map(|&dt| convergence_row(&c, n, dt))
        .collect();
    Ok(StudyReport {
        config: c,
        body: ReportBody::Convergence(rows),
    })
}

/// Condition numbers and first-step iteration counts for every (mesh, dt).
pub fn run_conditioning_study(config: &StudyConfig) -> Result<StudyReport> {
    let mut c = config.clone();
    c.study = StudyKind::Conditioning;
    c.validate()?;
    let pairs: Vec<(usize, f64)> = c
        .meshes
        .iter()
        .flat_map(|&n| c.dt_list.iter().map(move |&dt| (n, dt)))
        .collect();
    let exact = c.exact();
    let rows = pairs
        .par_iter()
        .map(|&(n, dt)| {
            let mode = c.eigen_method.mode(n);
            let res = build_system(&c, n, dt).and_then(|sys| {
                let s0 = TimeState::initial(&sys, &exact, 0.0);
                condition_row(&sys, 1.0 / n as f64, &s0, &exact, &c.krylov_options(), mode)
            });
            match res {
                Ok(r) => ConditioningRow {
                    n,
                    dx: r.dx,
                    dt,
                    cond_cg: r.cond_cg.kappa,
                    cond_pcg: r.cond_pcg.kappa,
                    iters_cg: r.iters_cg,
                    iters_pcg: r.iters_pcg,
                    method: r.cond_cg.method.as_str(),
                    status: if r.cond_cg.converged && r.cond_pcg.converged {
                        "ok".into()
                    } else {
                        "unconverged".into()
                    },
                },
                Err(e) => ConditioningRow {
                    n,
                    dx: 1.0 / n as f64,
                    dt,
                    cond_cg: f64::NAN,
                    cond_pcg: f64::NAN,
                    iters_cg: 0,
                    iters_pcg: 0,
                    method: "none",
                    status: e.kind().into(),
                },
            }
        })
        .collect();
    Ok(StudyReport {
        config: c,
        body: ReportBody::Conditioning(rows),
    })
}

/// One transient run with per-step diagnostics; errors are fatal here.
pub fn run_single(config: &StudyConfig) -> Result<StudyReport> {
    let mut c = config.clone();
    c.study = StudyKind::Single;
    c.validate()?;
    let exact = c.exact();
    let sys = build_system(&c, c.meshes[0], c.dt_list[0])?;
    let s0 = TimeState::initial(&sys, &exact, 0.0);
    let (s, steps) = run_transient(&sys, s0, c.t_final, &exact, c.solver, &c.krylov_options())?;
    let fields = DiscreteFields {
        u: &s.u,
        p: &s.p,
        eta: &s.eta,
        g: &s.g,
    };
    let errors = compute_error_norms(&sys.blocks().disc, fields, &exact, s.time)?;
    Ok(StudyReport {
        config: c,
        body: ReportBody::Steps { steps, errors },
    })
}

pub fn run_study(config: &StudyConfig) -> Result<StudyReport> {
    match config.study {
        StudyKind::Space => run_space_study(config),
        StudyKind::Time => run_time_study(config),
        StudyKind::Conditioning => run_conditioning_study(config),
        StudyKind::Single => run_single(config),
    }
}

fn num(v: f64) -> String {
    format!("{v:e}")
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

impl ConvergenceRow {
    fn values(&self) -> [f64; 6] {
        self.errors
            .as_ref()
            .map(field_values)
            .unwrap_or([f64::NAN; 6])
    }
}

impl StudyReport {
    /// Rates per field between consecutive rows (`None` for the first row).
    pub fn rates(&self) -> Vec<[Option<f64>; 6]> {
        let ReportBody::Convergence(rows) = &self.body else {
            return Vec::new();
        };
        let param: Vec<f64> = match self.config.study {
            StudyKind::Time => rows.iter().map(|r| r.dt).collect(),
            _ => rows.iter().map(|r| r.dx).collect(),
        };
        let mut out = vec![[None; 6]; rows.len()];
        for i in 1..rows.len() {
            let (a, b) = (rows[i - 1].values(), rows[i].values());
            for f in 0..6 {
                out[i][f] = convergence_rate(&[a[f], b[f]], &[param[i - 1], param[i]])
                    .ok()
                    .and_then(|r| r[0]);
            }
        }
        out
    }

    /// Least-squares exponent of `cond_cg` against `1/dx` over successful rows.
    pub fn kappa_exponent(&self) -> Option<f64> {
        let ReportBody::Conditioning(rows) = &self.body else {
            return None;
        };
        let ok: Vec<&ConditioningRow> = rows.iter().filter(|r| r.cond_cg.is_finite()).collect();
        let h: Vec<f64> = ok.iter().map(|r| r.dx).collect();
        let k: Vec<f64> = ok.iter().map(|r| r.cond_cg).collect();
        fitted_exponent(&h, &k).ok()
    }

    /// Header row of the CSV body.
    pub fn columns(&self) -> Vec<String> {
        match &self.body {
            ReportBody::Convergence(_) => {
                let mut c = vec!["dx".to_string(), "dt".to_string()];
                for f in CONVERGENCE_FIELDS {
                    c.push(f.to_string());
                    c.push(format!("rate_{f}"));
                }
                c.extend(["iters_max", "iters_mean", "status"].map(String::from));
                c
            }
            ReportBody::Conditioning(_) => [
                "dx",
                "dt",
                "cond_cg",
                "cond_pcg",
                "iters_cg",
                "iters_pcg",
                "eig_method",
                "status",
            ]
            .map(String::from)
            .to_vec(),
            ReportBody::Steps { .. } => StepDiagnostics::CSV_HEADER
                .split(',')
                .map(String::from)
                .collect(),
        }
    }

    /// Metadata lines (without the leading `# `).
    pub fn metadata(&self) -> Vec<String> {
        let mut m = vec![
            format!("fsi-schur {}", env!("CARGO_PKG_VERSION")),
            format!("study: {}", self.config.study.as_str()),
        ];
        for line in self.config.to_toml().lines() {
            m.push(format!("config: {line}"));
        }
        match &self.body {
            ReportBody::Conditioning(_) => {
                if let Some(e) = self.kappa_exponent() {
                    m.push(format!("kappa_exponent_cg: {}", num(e)));
                }
            }
            ReportBody::Steps { errors, .. } => {
                for (name, v) in CONVERGENCE_FIELDS.iter().zip(field_values(errors)) {
                    m.push(format!("final_{name}: {}", num(v)));
                }
            }
            ReportBody::Convergence(_) => {}
        }
        m
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        for line in self.metadata() {
            let _ = writeln!(s, "# {line}");
        }
        let _ = writeln!(s, "{}", self.columns().join(","));
        match &self.body {
            ReportBody::Convergence(rows) => {
                let rates = self.rates();
                for (r, rate) in rows.iter().zip(&rates) {
                    let mut cells = vec![num(r.dx), num(r.dt)];
                    for (v, rt) in r.values().iter().zip(rate) {
                        cells.push(num(*v));
                        cells.push(opt(*rt));
                    }
                    cells.push(r.iters_max.to_string());
                    cells.push(num(r.iters_mean));
                    cells.push(r.status.clone());
                    let _ = writeln!(s, "{}", cells.join(","));
                }
            }
            ReportBody::Conditioning(rows) => {
                for r in rows {
                    let _ = writeln!(
                        s,
                        "{},{},{},{},{},{},{},{}",
                        num(r.dx),
                        num(r.dt),
                        num(r.cond_cg),
                        num(r.cond_pcg),
                        r.iters_cg,
                        r.iters_pcg,
                        r.method,
                        r.status
                    );
                }
            }
            ReportBody::Steps { steps, .. } => {
                for d in steps {
                    let _ = writeln!(s, "{}", d.csv_row());
                }
            }
        }
        s
    }
}

/// A parsed report CSV: metadata lines, header and raw cells.
#[derive(Clone, Debug, PartialEq)]
pub struct CsvTable {
    pub metadata: Vec<String>,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn parse(text: &str) -> Result<Self> {
        let mut metadata = Vec::new();
        let mut header: Option<Vec<String>> = None;
        let mut rows = Vec::new();
        for (ln, line) in text.lines().enumerate() {
            if let Some(m) = line.strip_prefix('#') {
                metadata.push(m.trim_start().to_string());
            } else if line.trim().is_empty() {
                continue;
            } else {
                let cells: Vec<String> = line.split(',').map(String::from).collect();
                match &header {
                    None => header = Some(cells),
                    Some(h) if h.len() != cells.len() => {
                        return Err(crate::error::invalid(format!(
                            "line {}: {} cells, header has {}",
                            ln + 1,
                            cells.len(),
                            h.len()
                        )))
                    }
                    Some(_) => rows.push(cells),
                }
            }
        }
        let header = header.ok_or_else(|| crate::error::invalid("missing header row"))?;
        Ok(Self {
            metadata,
            header,
            rows,
        })
    }

    pub fn column(&self, name: &str) -> Option<Vec<&str>> {
        let j = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[j].as_str()).collect())
    }

    /// Reassembles the `config:` metadata into a configuration document.
    pub fn config_text(&self) -> String {
        self.metadata
            .iter()
            .filter_map(|m| m.strip_prefix("config: "))
            .map(|l| format!("{l}\n"))
            .collect()
    }
}

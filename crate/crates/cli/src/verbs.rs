//! What each CLI verb computes, independent of argument parsing.

use std::path::PathBuf;

use gvlab_core::calculus::{d, integrate_values, wedge};
use gvlab_core::critical::{
    geometric_el_residuals, lt3_residual, metric_el_residuals, rectifying_plane_check, umbilic_system_residuals,
};
use gvlab_core::geometry::{compatibility_residual, CompatiblePair, Geometry};
use gvlab_core::gv::{deta_frenet_check, eta, gv_direct, gv_reinhart_wood};
use gvlab_core::jacobi::{build_jacobi_field, INTERIOR_MARGIN};
use gvlab_core::scenarios::{catalog, find, Domain, Scenario};
use gvlab_core::{ChartGrid, GvError, ScalarField};

use crate::checks::{find_check, random_spec, run_check, variation_rows, CheckContext, CHECKS};
use crate::probes::{self, KINDS};
use crate::report::{Norms, Num, RunReport};
use crate::sweep::{self, Axis, Quantity, SweepSetup};
use crate::tolerances as tol;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verb {
    Gv,
    Critical,
    Variation,
    Jacobi,
    Frenet,
    Sweep,
    ListScenarios,
}

impl Verb {
    pub fn name(self) -> &'static str {
        match self {
            Verb::Gv => "gv",
            Verb::Critical => "critical",
            Verb::Variation => "variation",
            Verb::Jacobi => "jacobi",
            Verb::Frenet => "frenet",
            Verb::Sweep => "sweep",
            Verb::ListScenarios => "list-scenarios",
        }
    }
}

/// Fully resolved options (file values overlaid by flags, defaults applied).
#[derive(Clone, Debug)]
pub struct Options {
    pub scenario: String,
    pub grid: [usize; 3],
    pub checks: Vec<String>,
    pub tol_scale: f64,
    pub dt: f64,
    pub out: Option<PathBuf>,
    pub no_timestamp: bool,
    pub seed: u64,
    pub axis: Option<String>,
    pub values: Vec<f64>,
    pub quantity: Option<String>,
}

impl Default for Options {
    fn default() -> Self {
        Self {
            scenario: "tilted".into(),
            grid: [64; 3],
            checks: vec![],
            tol_scale: 1.0,
            dt: tol::DT_DEFAULT,
            out: None,
            no_timestamp: false,
            seed: CheckContext::default().seed,
            axis: None,
            values: vec![],
            quantity: None,
        }
    }
}

#[derive(Debug)]
pub enum RunError {
    /// Bad flags, config, names or grid sizes: exit code 1.
    Usage(String),
    /// Anything that went wrong while computing: exit code 3.
    Internal(String),
}

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RunError::Usage(m) => write!(f, "usage error: {m}"),
            RunError::Internal(m) => write!(f, "internal error: {m}"),
        }
    }
}

/// Asking a periodic-only computation of a chart scenario is a usage error;
/// everything else raised while computing is internal.
fn internal(e: GvError) -> RunError {
    match e {
        GvError::NotPeriodic(_) => RunError::Usage(e.to_string()),
        _ => RunError::Internal(e.to_string()),
    }
}

pub enum Output {
    Report(Box<RunReport>),
    Text(String),
}

/// Check names in registry order; `all` selects every check.
pub fn resolve_checks(names: &[String]) -> Result<Vec<&'static str>, RunError> {
    if names.iter().any(|n| n == "all") {
        return Ok(CHECKS.iter().map(|c| c.name).collect());
    }
    for n in names {
        if find_check(n).is_none() {
            let known: Vec<&str> = CHECKS.iter().map(|c| c.name).collect();
            return Err(RunError::Usage(format!("unknown check `{n}` (known: {}, all)", known.join(", "))));
        }
    }
    Ok(CHECKS.iter().map(|c| c.name).filter(|c| names.iter().any(|n| n == c)).collect())
}

fn scenario(opts: &Options) -> Result<&'static Scenario, RunError> {
    let s = find(&opts.scenario).map_err(|e| RunError::Usage(e.to_string()))?;
    s.grid(opts.grid).map_err(|e| RunError::Usage(e.to_string()))?;
    Ok(s)
}

pub fn norms(f: &ScalarField) -> Norms {
    let sq: Vec<f64> = f.values().iter().map(|v| v * v).collect();
    Norms {
        max: Num(f.max_abs()),
        l2: Num(integrate_values(f.grid(), &sq).sqrt()),
    }
}

pub fn run(verb: Verb, opts: &Options, exe: Option<PathBuf>) -> Result<Output, RunError> {
    if !(opts.tol_scale > 0.0) || !(opts.dt > 0.0) {
        return Err(RunError::Usage("tol-scale and dt must be positive".into()));
    }
    let checks = resolve_checks(&opts.checks)?;
    match verb {
        Verb::ListScenarios => return Ok(Output::Text(list_scenarios())),
        Verb::Sweep => return sweep_verb(opts).map(Output::Text),
        _ => {}
    }
    let s = scenario(opts)?;
    let mut report = RunReport::new(verb.name(), s.name, opts.grid);
    match verb {
        Verb::Gv => gv_verb(s, opts, &mut report),
        Verb::Critical => critical_verb(s, opts, &mut report),
        Verb::Variation => variation_verb(s, opts, &mut report),
        Verb::Jacobi => jacobi_verb(opts, &mut report),
        Verb::Frenet => frenet_verb(s, opts, &mut report),
        Verb::Sweep | Verb::ListScenarios => unreachable!(),
    }?;
    let ctx = CheckContext {
        tol_scale: opts.tol_scale,
        dt: opts.dt,
        exe,
        seed: opts.seed,
    };
    for name in checks {
        run_check(find_check(name).expect("resolved"), &ctx, &mut report).map_err(internal)?;
    }
    if !opts.no_timestamp {
        report.timestamp = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .ok()
            .map(|d| d.as_secs());
    }
    Ok(Output::Report(Box::new(report)))
}

fn list_scenarios() -> String {
    let mut out = String::new();
    for s in catalog() {
        let domain = match s.domain {
            Domain::Torus => "torus".to_string(),
            Domain::Chart { lo, hi } => format!("chart [{lo},{hi}]^3"),
        };
        out.push_str(&format!(
            "{}\n  {}\n  domain: {domain}; integrable: {}; amplitude: {}\n  ground truth: {}\n",
            s.name, s.summary, s.integrable, s.amplitude, s.ground_truth
        ));
    }
    out
}

fn compatible(s: &Scenario, opts: &Options) -> Result<CompatiblePair, RunError> {
    s.compatible(opts.grid).map_err(internal)
}

fn gv_verb(s: &Scenario, opts: &Options, report: &mut RunReport) -> Result<(), RunError> {
    let cp = compatible(s, opts)?;
    let pair = cp.pair();
    let w = wedge(pair.omega(), &d(pair.omega()).map_err(internal)?).map_err(internal)?;
    report.residuals.insert("omega_domega".into(), norms(&w.coefficient()));
    report.values.insert("eta_max".into(), Num(eta(pair).max_abs()));
    report.values.insert("compatibility".into(), Num(compatibility_residual(pair, cp.g())));
    if s.is_periodic() {
        let geo = Geometry::new(&cp, None);
        let rw = gv_reinhart_wood(&cp, &geo).map_err(internal)?;
        report.gv_direct = Some(Num(rw.gv_direct));
        report.gv_rw = Some(Num(rw.gv_rw));
        report.values.insert("mask_fraction".into(), Num(rw.mask_fraction));
        report.residuals.insert("rw_pointwise".into(), norms(&rw.pointwise_residual));
    }
    Ok(())
}

fn critical_verb(s: &Scenario, opts: &Options, report: &mut RunReport) -> Result<(), RunError> {
    let cp = compatible(s, opts)?;
    let geo = Geometry::new(&cp, None);
    let l3 = lt3_residual(cp.pair());
    for a in 0..3 {
        report.residuals.insert(format!("lt3_{a}"), norms(&l3.component_field(a)));
    }
    let (g1, g2) = geometric_el_residuals(&cp, &geo);
    report.residuals.insert("geo_1".into(), norms(&g1));
    report.residuals.insert("geo_2".into(), norms(&g2));
    let q = metric_el_residuals(&cp, &geo);
    report.residuals.insert("q1".into(), norms(&q.q1));
    report.residuals.insert("q2".into(), norms(&q.q2));
    report.residuals.insert("q3".into(), norms(&q.q3));
    report.values.insert("mask_fraction".into(), Num(geo.frenet.mask_fraction()));
    let rect = rectifying_plane_check(&cp, &geo, tol::RW_POINTWISE).map_err(internal)?;
    report.residuals.insert("rectifying_gap".into(), norms(&rect.gap));
    report.values.insert("min_tcal".into(), Num(rect.min_tcal));
    match umbilic_system_residuals(&cp, &geo, None, tol::UMBILICITY) {
        Ok(u) => {
            report.residuals.insert("umbilic_1".into(), norms(&u.first));
            report.residuals.insert("umbilic_2".into(), norms(&u.second));
            report.values.insert("umbilicity".into(), Num(u.umbilicity));
        }
        Err(GvError::Constraint { residual, .. }) => {
            report.values.insert("umbilicity".into(), Num(residual));
        }
        Err(e) => return Err(internal(e)),
    }
    if s.is_periodic() {
        report.gv_direct = Some(Num(gv_direct(cp.pair()).map_err(internal)?));
    }
    Ok(())
}

fn variation_verb(s: &Scenario, opts: &Options, report: &mut RunReport) -> Result<(), RunError> {
    if !s.is_periodic() {
        return Err(RunError::Usage(format!("`variation` needs a periodic scenario; `{}` is a chart", s.name)));
    }
    let pair = s.pair(opts.grid).map_err(internal)?;
    report.gv_direct = Some(Num(gv_direct(&pair).map_err(internal)?));
    let mut rng = probes::rng(opts.seed);
    for kind in KINDS {
        let v = probes::random_variation(&mut rng, &pair, kind, 0.2);
        report.variations.extend(variation_rows(&pair, &v, opts.dt).map_err(internal)?);
    }
    Ok(())
}

fn jacobi_verb(opts: &Options, report: &mut RunReport) -> Result<(), RunError> {
    let g = ChartGrid::chart(opts.grid, [-1.0; 3], [1.0; 3]).map_err(|e| RunError::Usage(e.to_string()))?;
    report.scenario = "jacobi-chart".into();
    let f = build_jacobi_field(&random_spec(&mut probes::rng(opts.seed), &g)).map_err(internal)?;
    let r = &f.report;
    for (i, v) in r.coefficient_equations.iter().enumerate() {
        report.values.insert(format!("coefficient_equation_{i}"), Num(*v));
    }
    report.values.insert("p333".into(), Num(r.p333));
    report.values.insert("d_mu_interior".into(), Num(r.d_mu));
    report.values.insert("compatibility".into(), Num(r.compatibility));
    report.values.insert("integrability".into(), Num(r.integrability));
    let dm = gvlab_core::jacobi::jacobi_operator(&f.cp, &f.mu).map_err(internal)?;
    let inner = g.interior_mask(INTERIOR_MARGIN);
    for a in 0..3 {
        let c = dm.component_field(a);
        let masked: Vec<f64> = c.values().iter().zip(&inner).map(|(v, m)| if *m { *v } else { 0.0 }).collect();
        report.residuals.insert(format!("jacobi_{a}"), norms(&ScalarField::new(g, masked).map_err(internal)?));
    }
    Ok(())
}

fn frenet_verb(s: &Scenario, opts: &Options, report: &mut RunReport) -> Result<(), RunError> {
    let cp = compatible(s, opts)?;
    let geo = Geometry::new(&cp, None);
    let fd = &geo.frenet;
    report.values.insert("mask_fraction".into(), Num(fd.mask_fraction()));
    report.values.insert("k_min".into(), Num(fd.k_min));
    report.residuals.insert("k".into(), norms(&fd.k));
    report.residuals.insert("tau".into(), norms(&fd.tau));
    report.residuals.insert("t_k".into(), norms(&fd.tk));
    report.residuals.insert("sigma1".into(), norms(&geo.sff.sigma1));
    report.residuals.insert("tcal".into(), norms(&geo.sff.tcal));
    let r = deta_frenet_check(&cp, &geo);
    report.residuals.insert("deta_nb".into(), norms(&r.nb));
    report.residuals.insert("deta_tb".into(), norms(&r.tb));
    report.residuals.insert("deta_tn".into(), norms(&r.tn));
    report.residuals.insert("eta_kn".into(), norms(&r.eta_kn));
    Ok(())
}

fn sweep_verb(opts: &Options) -> Result<String, RunError> {
    let usage = RunError::Usage;
    let axis: Axis = opts.axis.as_deref().ok_or_else(|| usage("sweep needs --axis".into()))?.parse().map_err(usage)?;
    let q: Quantity = opts
        .quantity
        .as_deref()
        .ok_or_else(|| usage("sweep needs --quantity".into()))?
        .parse()
        .map_err(usage)?;
    if opts.values.len() < 3 {
        return Err(usage(format!("sweep needs at least 3 values, got {}", opts.values.len())));
    }
    if axis == Axis::Grid {
        for v in &opts.values {
            if v.fract() != 0.0 || *v < gvlab_core::grid::MIN_POINTS as f64 {
                return Err(usage(format!("grid sweep values must be integers >= {}, got {v}", gvlab_core::grid::MIN_POINTS)));
            }
        }
    }
    let s = scenario(opts)?;
    let setup = SweepSetup { scenario: s, grid: opts.grid, dt: opts.dt, seed: opts.seed };
    let rows = sweep::sweep(&setup, axis, &opts.values, q).map_err(internal)?;
    Ok(sweep::to_csv(&rows))
}

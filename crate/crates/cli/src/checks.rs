//! The named acceptance checks. Each one builds its own scenarios at pinned
//! grid sizes, so the outcome does not depend on `--scenario` or `--grid`.

use std::path::PathBuf;
use std::process::Command;

use gvlab_core::calculus::{d, integrate, interior, wedge};
use gvlab_core::critical::{
    geometric_el_residuals, lt3_frame_components, lt3_residual, metric_el_residuals, metric_functional,
    metric_gradient_pairing, umbilic_system_residuals, SymmetricField,
};
use gvlab_core::geometry::{
    build_compatible_metric, compatibility_residual, frenet, second_fundamental, CompatiblePair, Geometry, MetricSeed,
};
use gvlab_core::gv::{deta_frenet_check, eta, gv_direct, gv_reinhart_wood, transform_pair, PairChange};
use gvlab_core::jacobi::{
    build_jacobi_field, eigen_branch, eigen_residual, jacobi_operator, JacobiFieldSpec,
    EIGEN_MARGIN, INTERIOR_MARGIN,
};
use gvlab_core::scenarios::{bump, find};
use gvlab_core::variations::{
    finite_difference, finite_difference_variation, first_variation, index_form, second_variation, FdEstimate,
};
use gvlab_core::{ChartGrid, GvError, KForm, Result, ScalarField, VectorField};
use rand::Rng;

use crate::probes::{self, Bump, TrigSum, KINDS};
use crate::report::{CheckOutcome, Measurement, Num, RunReport, VariationRow};
use crate::tolerances as tol;

#[derive(Clone, Debug)]
pub struct CheckContext {
    /// Multiplies upper bounds and divides lower bounds.
    pub tol_scale: f64,
    /// Step of the extrapolated finite differences.
    pub dt: f64,
    /// Binary re-run by the determinism check.
    pub exe: Option<PathBuf>,
    pub seed: u64,
}

impl Default for CheckContext {
    fn default() -> Self {
        Self {
            tol_scale: 1.0,
            dt: tol::DT_DEFAULT,
            exe: None,
            seed: 20240,
        }
    }
}

impl CheckContext {
    fn le(&self, label: impl Into<String>, value: f64, bound: f64) -> Measurement {
        Measurement::at_most(label, value, bound * self.tol_scale)
    }

    fn ge(&self, label: impl Into<String>, value: f64, bound: f64) -> Measurement {
        Measurement::at_least(label, value, bound / self.tol_scale)
    }

    fn rng(&self, salt: u64) -> probes::ProbeRng {
        probes::rng(self.seed.wrapping_mul(1_000_003).wrapping_add(salt))
    }
}

pub type CheckFn = fn(&CheckContext, &mut RunReport) -> Result<CheckOutcome>;

pub struct CheckSpec {
    pub name: &'static str,
    pub criterion: u8,
    pub summary: &'static str,
    pub run: CheckFn,
}

pub static CHECKS: [CheckSpec; 12] = [
    CheckSpec { name: "calculus", criterion: 1, summary: "d∘d, Stokes and dα convergence on 32³→128³; ⋆⋆ = Id", run: calculus },
    CheckSpec { name: "contact", criterion: 2, summary: "contact scenario: η = 0, gv = 0, random first variations vanish", run: contact },
    CheckSpec { name: "eta-metric", criterion: 3, summary: "η agrees for two compatible metrics", run: eta_metric },
    CheckSpec { name: "reinhart-wood", criterion: 4, summary: "η∧dη against −k²(τ − h_BN) dV on the tilted field", run: reinhart_wood },
    CheckSpec { name: "variations", criterion: 5, summary: "first and second variations against Richardson FD", run: variations },
    CheckSpec { name: "rescale", criterion: 6, summary: "gv unchanged by rescalings with T(f) = 0", run: rescale },
    CheckSpec { name: "criticality", criterion: 7, summary: "(L_T)³ω on polynomial charts and its Frenet-frame form", run: criticality },
    CheckSpec { name: "metric-el", criterion: 8, summary: "metric gradient against FD, geodesic Q-norms, non-extremum", run: metric_el },
    CheckSpec { name: "saddle", criterion: 9, summary: "opposite signs of I(η̇, η̇) on the contact chart", run: saddle },
    CheckSpec { name: "jacobi", criterion: 10, summary: "Jacobi fields, negative control, self-adjointness, eigen branches", run: jacobi },
    CheckSpec { name: "products", criterion: 11, summary: "warped and twisted products", run: products },
    CheckSpec { name: "determinism", criterion: 12, summary: "byte-identical reports with 1 and 4 threads", run: determinism },
];

pub fn find_check(name: &str) -> Option<&'static CheckSpec> {
    CHECKS.iter().find(|c| c.name == name)
}

/// Runs one check and records its outcome in the report.
pub fn run_check(spec: &CheckSpec, ctx: &CheckContext, report: &mut RunReport) -> Result<CheckOutcome> {
    let out = (spec.run)(ctx, report)?;
    report.checks.push(out.clone());
    Ok(out)
}

fn outcome(name: &str, criterion: u8, detail: impl Into<String>, m: Vec<Measurement>) -> Result<CheckOutcome> {
    Ok(CheckOutcome::new(name, criterion, detail.into(), m))
}

/// Smallest `log₂` ratio of successive errors on grids refined by 2.
fn halving_order(errors: &[f64]) -> f64 {
    errors
        .windows(2)
        .map(|w| (w[0] / w[1]).log2())
        .fold(f64::INFINITY, f64::min)
}

/// Exact-to-rounding residuals pass outright; otherwise they must converge.
fn floor_or_order(ctx: &CheckContext, label: &str, values: &[f64], scale: f64) -> Measurement {
    let worst = values.iter().fold(0.0f64, |a, v| a.max(*v));
    if worst <= tol::ROUNDING_FLOOR * scale * ctx.tol_scale {
        ctx.le(format!("{label}, max over sweep (rounding floor)"), worst, tol::ROUNDING_FLOOR * scale)
    } else {
        ctx.ge(format!("{label}, observed order"), halving_order(values), tol::CALCULUS_ORDER)
    }
}

fn calculus(ctx: &CheckContext, report: &mut RunReport) -> Result<CheckOutcome> {
    let alpha = |x: [f64; 3]| [(x[1] + x[2]).sin(), (x[0] - 2.0 * x[2]).cos(), (2.0 * x[0] + x[1]).sin()];
    let d_alpha = |x: [f64; 3]| {
        [
            (2.0 * x[0] + x[1]).cos() - 2.0 * (x[0] - 2.0 * x[2]).sin(),
            (x[1] + x[2]).cos() - 2.0 * (2.0 * x[0] + x[1]).cos(),
            -(x[0] - 2.0 * x[2]).sin() - (x[1] + x[2]).cos(),
        ]
    };
    let beta = |x: [f64; 3]| [(x[0] + x[2]).sin(), (x[1] - 2.0 * x[2]).cos(), (2.0 * x[0] + x[2]).sin()];
    let d_beta = |x: [f64; 3]| (x[0] + x[2]).cos() - (x[1] - 2.0 * x[2]).sin() + (2.0 * x[0] + x[2]).cos();
    let (mut dd, mut stokes, mut e1, mut e2) = (vec![], vec![], vec![], vec![]);
    for n in [32, 64, 128] {
        let g = ChartGrid::torus([n; 3])?;
        let a = KForm::from_fn(&g, 1, alpha);
        let da = d(&a)?;
        dd.push(d(&da)?.max_abs());
        e1.push(da.sub(&KForm::from_fn(&g, 2, d_alpha))?.max_abs());
        let db = d(&KForm::from_fn(&g, 2, beta))?;
        stokes.push(integrate(&db)?.abs());
        e2.push((&db.coefficient() - &ScalarField::from_fn(&g, d_beta)).max_abs());
        report.values.insert(format!("calculus.d_alpha_error.{n}"), Num(e1[e1.len() - 1]));
    }
    // ∫ over the torus has volume (2π)³
    let vol = std::f64::consts::TAU.powi(3);
    let mut m = vec![
        floor_or_order(ctx, "max |d(d alpha)|", &dd, 1.0),
        floor_or_order(ctx, "|integral of d beta| on the torus", &stokes, vol),
        ctx.ge("d alpha against closed form, observed order", halving_order(&e1), tol::CALCULUS_ORDER),
        ctx.ge("d beta against closed form, observed order", halving_order(&e2), tol::CALCULUS_ORDER),
    ];
    let cp = find("tilted")?.compatible_with([32; 3], 0.5).and_then(|cp| {
        build_compatible_metric(cp.pair(), MetricSeed::Perturbed { amplitude: tol::ETA_METRIC_AMPLITUDE })
    })?;
    let g = *cp.grid();
    let mut rng = ctx.rng(1);
    let mut worst = 0.0f64;
    for degree in 0..=3u8 {
        let c = [0; 3].map(|_: i32| TrigSum::random(&mut rng, 3, 1.0));
        let form = match degree {
            0 => KForm::function(&c[0].field(&g)),
            3 => KForm::volume(&c[0].field(&g)),
            k => KForm::from_fn(&g, k, |x| [c[0].eval(x), c[1].eval(x), c[2].eval(x)]),
        };
        let back = cp.g().hodge(&cp.g().hodge(&form)?)?;
        worst = worst.max(back.sub(&form)?.max_abs());
    }
    m.push(ctx.le("max |**a - a|, degrees 0-3, perturbed metric", worst, tol::HODGE_INVOLUTION));
    outcome("calculus", 1, "torus 32/64/128; Hodge on tilted pair with perturbed seed 0.2 at 32^3", m)
}

fn contact(ctx: &CheckContext, report: &mut RunReport) -> Result<CheckOutcome> {
    let pair = find("contact")?.pair([64; 3])?;
    let e = eta(&pair).max_abs();
    let gv = gv_direct(&pair)?;
    report.values.insert("contact.gv_direct".into(), Num(gv));
    let mut rng = ctx.rng(2);
    let mut worst = [0.0f64; 3];
    for _ in 0..tol::CONTACT_PROBES {
        for (k, kind) in KINDS.iter().enumerate() {
            let v = probes::random_variation(&mut rng, &pair, kind, 0.3);
            worst[k] = worst[k].max(first_variation(&pair, &v)?.abs());
        }
    }
    let mut m = vec![
        ctx.le("max |eta|", e, tol::CONTACT_ETA),
        ctx.le("|gv_direct|", gv.abs(), tol::CONTACT_GV),
    ];
    for (k, kind) in KINDS.iter().enumerate() {
        m.push(ctx.le(format!("max |first variation|, {} random {kind} probes", tol::CONTACT_PROBES), worst[k], tol::CONTACT_FIRST_VARIATION));
    }
    outcome("contact", 2, "contact scenario at 64^3", m)
}

fn eta_metric(ctx: &CheckContext, report: &mut RunReport) -> Result<CheckOutcome> {
    let pair = find("tilted")?.pair([64; 3])?;
    let flat = build_compatible_metric(&pair, MetricSeed::Euclidean)?;
    let bent = build_compatible_metric(&pair, MetricSeed::Perturbed { amplitude: tol::ETA_METRIC_AMPLITUDE })?;
    let diff = eta(flat.pair()).sub(&eta(bent.pair()))?.max_abs();
    let mut m = vec![
        ctx.le("max |eta(euclidean) - eta(perturbed)|", diff, tol::ETA_METRIC),
        ctx.le("compatibility residual, euclidean seed", compatibility_residual(flat.pair(), flat.g()), tol::COMPATIBILITY),
        ctx.le("compatibility residual, perturbed seed", compatibility_residual(bent.pair(), bent.g()), tol::COMPATIBILITY),
    ];
    for (label, cp) in [("euclidean", &flat), ("perturbed", &bent)] {
        let geo = Geometry::new(cp, None);
        let r = deta_frenet_check(cp, &geo).eta_kn.max_abs();
        report.values.insert(format!("eta-metric.eta_kn.{label}"), Num(r));
        m.push(ctx.le(format!("max |eta - k N-flat| through the {label} frame"), r, tol::ETA_FRAME));
    }
    outcome("eta-metric", 3, "tilted scenario at 64^3, seeds euclidean and perturbed 0.2", m)
}

fn reinhart_wood(ctx: &CheckContext, report: &mut RunReport) -> Result<CheckOutcome> {
    let s = find("tilted")?;
    let mut res = vec![];
    let mut m = vec![];
    let mut gap = (0.0, 0.0);
    for n in [64, 96] {
        let cp = s.compatible([n; 3])?;
        let geo = Geometry::new(&cp, None);
        let rep = gv_reinhart_wood(&cp, &geo)?;
        let r = rep.pointwise_residual.max_abs();
        report.values.insert(format!("reinhart-wood.pointwise.{n}"), Num(r));
        report.values.insert(format!("reinhart-wood.gv_direct.{n}"), Num(rep.gv_direct));
        report.values.insert(format!("reinhart-wood.gv_rw.{n}"), Num(rep.gv_rw));
        m.push(ctx.ge(format!("mask fraction at {n}^3"), rep.mask_fraction, tol::RW_MASK_FRACTION));
        res.push(r);
        gap = ((rep.gv_direct - rep.gv_rw).abs(), rep.gv_direct.abs().max(1.0));
    }
    m.push(ctx.le("pointwise residual at 64^3", res[0], tol::RW_POINTWISE));
    m.push(ctx.ge("observed order 64 -> 96", (res[0] / res[1]).ln() / 1.5f64.ln(), tol::RW_ORDER));
    m.push(ctx.le("|gv_direct - gv_rw| / max(1, |gv|) at 96^3", gap.0 / gap.1, tol::RW_GAP));
    outcome("reinhart-wood", 4, "tilted scenario, euclidean seed, 64^3 and 96^3", m)
}

/// Analytic variations against five-point finite differences of `gv_direct`.
pub fn variation_rows(
    pair: &gvlab_core::geometry::DistributionPair,
    v: &gvlab_core::variations::Variation,
    dt: f64,
) -> Result<[VariationRow; 2]> {
    let a1 = first_variation(pair, v)?;
    let a2 = second_variation(pair, v)?;
    let fd = finite_difference_variation(pair, v, dt, 1)?;
    let coarse = finite_difference_variation(pair, v, tol::DT_ORDER_STEP, 1)?;
    let row = |order: u8, exact: f64| {
        let f = FdEstimate::from_samples(fd.samples, dt, order);
        let c = FdEstimate::from_samples(coarse.samples, tol::DT_ORDER_STEP, order);
        VariationRow {
            kind: v.kind().to_string(),
            order,
            analytic: Num(exact),
            fd_raw: Num(f.raw),
            richardson: Num(f.richardson),
            observed_order: c.observed_order(exact).map(Num),
            dt: Num(dt),
        }
    };
    Ok([row(1, a1), row(2, a2)])
}

fn variations(ctx: &CheckContext, report: &mut RunReport) -> Result<CheckOutcome> {
    let mut rng = ctx.rng(5);
    let mut m = vec![];
    for name in ["contact", "foliation", "tilted"] {
        let pair = find(name)?.pair([64; 3])?;
        for kind in KINDS {
            let v = probes::random_variation(&mut rng, &pair, kind, 0.2);
            for row in variation_rows(&pair, &v, ctx.dt)? {
                let scale = row.analytic.0.abs().max(1.0);
                let bound = if row.order == 1 { tol::FIRST_VARIATION_REL } else { tol::SECOND_VARIATION_REL };
                let tag = format!("{name} {kind} order {}", row.order);
                m.push(ctx.le(format!("{tag}: |analytic - richardson| / scale"), (row.analytic.0 - row.richardson.0).abs() / scale, bound));
                match row.observed_order {
                    Some(o) => m.push(ctx.ge(format!("{tag}: raw dt-order"), o.0, tol::DT_ORDER - tol::DT_ORDER_SLACK)),
                    None => m.push(Measurement::holds(format!("{tag}: raw FD error at rounding floor"), true)),
                }
                report.variations.push(VariationRow { kind: format!("{name}/{}", row.kind), ..row });
            }
        }
    }
    outcome("variations", 5, format!("64^3, Richardson at dt = {:e}, raw order from dt = {:e} vs {:e}", ctx.dt, tol::DT_ORDER_STEP, 2.0 * tol::DT_ORDER_STEP), m)
}

fn rescale(ctx: &CheckContext, report: &mut RunReport) -> Result<CheckOutcome> {
    let mut rng = ctx.rng(6);
    let mut m = vec![];
    for name in ["shear", "rectifying", "foliation"] {
        let pair = find(name)?.pair([64; 3])?;
        let gv0 = gv_direct(&pair)?;
        report.values.insert(format!("rescale.gv.{name}"), Num(gv0));
        let mut worst = 0.0f64;
        for _ in 0..3 {
            let amp = rng.gen_range(0.3..1.0);
            let f = Bump::random(&mut rng, pair.grid()).independent_of(2).field(pair.grid()).scale(amp);
            let new = transform_pair(&pair, &PairChange::Scale(f))?;
            worst = worst.max((gv_direct(&new)? - gv0).abs());
        }
        m.push(ctx.le(format!("{name}: max |gv change|, 3 z-independent bumps"), worst, tol::RESCALE));
    }
    outcome("rescale", 6, "T = d/dz scenarios at 64^3", m)
}

fn criticality(ctx: &CheckContext, report: &mut RunReport) -> Result<CheckOutcome> {
    let quad = find("quadratic-chart")?;
    let cubic = find("cubic-chart")?;
    let q = lt3_residual(&quad.pair([64; 3])?).max_abs();
    let c3 = cubic.amplitude;
    let l3 = lt3_residual(&cubic.pair([64; 3])?);
    let exact = 6.0 * c3;
    let mut rel = 0.0f64;
    for i in 0..l3.grid().len() {
        let v = l3.at3(i);
        let want = [exact, gvlab_core::scenarios::CHART_RATIO * exact, 0.0];
        for a in 0..3 {
            rel = rel.max((v[a] - want[a]).abs() / exact);
        }
    }
    let mut m = vec![
        ctx.le("quadratic chart: max |(L_T)^3 omega| at 64^3", q, tol::LT3_QUADRATIC),
        ctx.le("cubic chart: max |(L_T)^3 omega - 6 c3 (dx1 + r dx2)| / 6 c3", rel, tol::LT3_CUBIC_REL),
    ];
    for (s, grid) in [(cubic, tol::GEOMETRIC_GRID), (quad, [64; 3])] {
        let cp = s.compatible(grid)?;
        let geo = Geometry::new(&cp, None);
        let (l1, l2) = geometric_el_residuals(&cp, &geo);
        let (f1, f2) = lt3_frame_components(cp.pair(), &geo);
        let mask = &geo.frenet.valid;
        let r = (&l1 - &f1).max_abs_where(mask).max((&l2 - &f2).max_abs_where(mask));
        report.values.insert(format!("criticality.geometric.{}", s.name), Num(r));
        m.push(ctx.ge(format!("{}: mask fraction on {grid:?}", s.name), geo.frenet.mask_fraction(), 0.5));
        m.push(ctx.le(format!("{}: frame form against (L_T)^3 omega (N, B) on {grid:?}", s.name), r, tol::GEOMETRIC_FORM));
    }
    outcome("criticality", 7, "polynomial charts on [-1,1]^3, horizontal seed", m)
}

/// `Y = b e_a − T(b) ∂_z` with `e_a = (sin z, cos z, 0)`, so that `ω(Y) = 0` for the contact pair.
fn contact_probes(cp: &CompatiblePair) -> Result<[SymmetricField; 2]> {
    let g = *cp.grid();
    let b = ScalarField::from_fn(&g, |x| bump(&g, x));
    let t = cp.pair().t();
    let tflat = cp.g().flat(t)?;
    let wave = ScalarField::from_fn(&g, |x| 0.5 * (x[0] + x[1]).sin());
    let s1 = SymmetricField::symmetric_product(&tflat, &tflat).scale_by(&(&b * &wave));
    let tb = gvlab_core::calculus::directional(t, &b);
    let y = VectorField::from_fn(&g, |x| [x[2].sin(), x[2].cos(), 0.0]).scale_by(&b).lin_comb(
        1.0,
        &VectorField::coordinate(&g, 2).scale_by(&tb),
        -1.0,
    );
    let s2 = SymmetricField::symmetric_product(&tflat, &cp.g().flat(&y)?).scale_by(&ScalarField::constant(&g, -1.0));
    Ok([s1, s2])
}

fn metric_el(ctx: &CheckContext, report: &mut RunReport) -> Result<CheckOutcome> {
    let cp = find("tilted")?.compatible([tol::METRIC_GRID; 3])?;
    let geo = Geometry::new(&cp, None);
    let q = metric_el_residuals(&cp, &geo);
    let mut rng = ctx.rng(8);
    let mut worst = 0.0f64;
    for p in 0..tol::METRIC_PROBES {
        let s = probes::random_bump_symmetric(&mut rng, cp.grid(), 1.0);
        let fd = finite_difference(|t| metric_functional(&cp, &s, t), ctx.dt, 1)?.richardson;
        let an = metric_gradient_pairing(&cp, &geo, &q, &s);
        let rel = (fd - an).abs() / an.abs();
        report.values.insert(format!("metric-el.probe{p}.analytic"), Num(an));
        report.values.insert(format!("metric-el.probe{p}.fd"), Num(fd));
        worst = worst.max(rel);
    }
    let mut m = vec![ctx.le(
        format!("tilted: max relative |FD - Q pairing|, {} bump probes", tol::METRIC_PROBES),
        worst,
        tol::METRIC_GRADIENT_REL,
    )];
    let cc = find("contact")?.compatible([64; 3])?;
    let cgeo = Geometry::new(&cc, None);
    let cq = metric_el_residuals(&cc, &cgeo);
    for (label, f) in [("Q1", &cq.q1), ("Q2", &cq.q2), ("Q3", &cq.q3)] {
        m.push(ctx.le(format!("contact (geodesic T): max |{label}|"), f.max_abs(), tol::GEODESIC_Q));
    }
    let mut second = vec![];
    for (i, s) in contact_probes(&cc)?.iter().enumerate() {
        let j2 = finite_difference(|t| metric_functional(&cc, s, t), tol::DT_ORDER_STEP, 2)?;
        report.values.insert(format!("metric-el.contact_second_variation.{i}"), Num(j2.richardson));
        second.push(j2);
    }
    let (a, b) = (second[0].richardson, second[1].richardson);
    m.push(Measurement::holds("contact: probe second variations have opposite signs", a * b < 0.0));
    let resolved = second
        .iter()
        .map(|j| j.richardson.abs() / (j.richardson - j.raw).abs().max(f64::MIN_POSITIVE))
        .fold(f64::INFINITY, f64::min);
    m.push(ctx.ge("contact: min |J''| / |richardson - raw|", resolved, tol::SADDLE_MARGIN));
    outcome("metric-el", 8, format!("tilted at {}^3, contact at 64^3", tol::METRIC_GRID), m)
}

fn saddle(ctx: &CheckContext, report: &mut RunReport) -> Result<CheckOutcome> {
    let s = find("contact-chart")?;
    let index = |n: usize, sign: f64| -> Result<f64> {
        let pair = s.pair([n; 3])?;
        let g = *pair.grid();
        let xdot = VectorField::from_fn(&g, |x| {
            let b = bump(&g, x);
            [b, sign * x[2] * b, x[1] * b]
        });
        let eta_dot = interior(&xdot, &d(pair.omega())?)?;
        index_form(&eta_dot, &eta_dot)
    };
    let mut m = vec![];
    let mut fine = vec![];
    for (sign, label) in [(-1.0, "(1, -x3)"), (1.0, "(1, +x3)")] {
        let (i64_, i32_) = (index(64, sign)?, index(32, sign)?);
        report.values.insert(format!("saddle.index{label}.64"), Num(i64_));
        report.values.insert(format!("saddle.index{label}.32"), Num(i32_));
        m.push(ctx.ge(
            format!("{label}: |I| / |I(64^3) - I(32^3)|"),
            i64_.abs() / (i64_ - i32_).abs().max(f64::MIN_POSITIVE),
            tol::SADDLE_MARGIN,
        ));
        fine.push(i64_);
    }
    m.insert(0, Measurement::holds("I(1,-x3) and I(1,+x3) have strictly opposite signs", fine[0] * fine[1] < 0.0));
    outcome("saddle", 9, "contact chart dx3 - x2 dx1 on [-1,1]^3, bump on |x_i| <= 1/2", m)
}

/// Constant background `C₂ⱼ = r C₁ⱼ` and bump-shaped free data independent of `z`.
pub fn random_spec(rng: &mut probes::ProbeRng, g: &ChartGrid) -> JacobiFieldSpec {
    let k = |v: f64| ScalarField::constant(g, v);
    let mut c1 = [0.0; 3];
    for (j, c) in c1.iter_mut().enumerate() {
        let v = rng.gen_range(0.2..1.0);
        *c = if j < 2 && rng.gen_bool(0.5) { -v } else { v };
    }
    let r = rng.gen_range(0.3..1.5);
    let mut plane = || {
        let amp = rng.gen_range(-1.0..1.0);
        Bump::random(rng, g).independent_of(2).field(g).scale(amp)
    };
    let free = [[plane(), plane(), plane()], [plane(), plane(), plane()]];
    let c25 = plane();
    JacobiFieldSpec {
        background: [[k(c1[0]), k(c1[1]), k(c1[2])], [k(r * c1[0]), k(r * c1[1]), k(r * c1[2])]],
        free,
        c25,
    }
}

fn jacobi(ctx: &CheckContext, report: &mut RunReport) -> Result<CheckOutcome> {
    let g = ChartGrid::chart([64; 3], [-1.0; 3], [1.0; 3])?;
    let mut rng = ctx.rng(10);
    let (mut worst, mut coeff, mut p333) = (0.0f64, 0.0f64, 0.0f64);
    let mut first = None;
    for _ in 0..tol::JACOBI_SPECS {
        let f = build_jacobi_field(&random_spec(&mut rng, &g))?;
        worst = worst.max(f.report.d_mu);
        coeff = f.report.coefficient_equations.iter().fold(coeff, |a, v| a.max(*v));
        p333 = p333.max(f.report.p333);
        first.get_or_insert(f);
    }
    report.values.insert("jacobi.max_p333".into(), Num(p333));
    let field = first.expect("at least one spec");
    let mut m = vec![
        ctx.le("five z^i-coefficient equations, max over specs", coeff, gvlab_core::jacobi::RELATION_TOL),
        ctx.le(format!("max |D mu| on the interior, {} random specs", tol::JACOBI_SPECS), worst, tol::JACOBI_KERNEL),
    ];
    let inner = g.interior_mask(INTERIOR_MARGIN);
    let mono = KForm::from_fn(&g, 1, |x| [x[2].powi(6) * bump(&g, [x[0], x[1], 0.0]), 0.0, 0.0]);
    let neg = jacobi_operator(&field.cp, &mono)?.max_abs_where(&inner);
    m.push(ctx.ge("negative control z^6 dx1: max |D mu|", neg, tol::JACOBI_NEGATIVE));

    let cp = &field.cp;
    let b = |x: [f64; 3]| bump(&g, x);
    let mut pairing = [0.0; 2];
    let mu = KForm::from_fn(&g, 1, |x| [b(x) * (3.0 * x[2]).sin(), b(x) * x[0], 0.0]);
    let nu = KForm::from_fn(&g, 1, |x| [b(x) * x[1] * x[2], b(x) * (2.0 * x[0] + x[2]).cos(), 0.0]);
    for (slot, (a, c)) in pairing.iter_mut().zip([(&mu, &nu), (&nu, &mu)]) {
        *slot = integrate(&wedge(&jacobi_operator(cp, a)?, &cp.g().hodge(c)?)?)?;
    }
    report.values.insert("jacobi.pairing".into(), Num(pairing[0]));
    m.push(ctx.le(
        "|<D mu, nu> - <D nu, mu>| / max(1, |<D mu, nu>|)",
        (pairing[0] - pairing[1]).abs() / pairing[0].abs().max(1.0),
        tol::JACOBI_SYMMETRY,
    ));

    let ge = ChartGrid::chart([8, 8, tol::EIGEN_Z_POINTS], [-1.0; 3], [1.0; 3])?;
    let one = ScalarField::constant(&ge, 1.0);
    let nz = tol::EIGEN_Z_POINTS;
    let interior: Vec<bool> = (0..ge.len())
        .map(|i| {
            let k = ge.unravel(i)[2];
            k >= EIGEN_MARGIN && k + EIGEN_MARGIN < nz
        })
        .collect();
    let mut eig = 0.0f64;
    for lambda in [1.0, 8.0] {
        for branch in 0..6 {
            let p = ScalarField::from_fn(&ge, |x| eigen_branch(lambda, branch, x[2]));
            let r = eigen_residual(&p, lambda, &one)?.max_abs();
            let scale = p.max_abs_where(&interior) * lambda * lambda;
            eig = eig.max(r / scale);
        }
    }
    m.push(ctx.le("eigen branches, lambda in {1, 8}: max residual / max |lambda^2 p|", eig, tol::JACOBI_EIGEN_REL));
    outcome("jacobi", 10, "charts [-1,1]^3 at 64^3 (operator) and 8x8x81 (eigen branches)", m)
}

/// Frenet data with the curvature mask `k ≥ rel · max k`.
fn geometry_rel(cp: &CompatiblePair, rel: f64) -> Geometry {
    let conn = cp.g().connection();
    let kmax = frenet(cp, &conn, None).k.max_abs();
    let fd = frenet(cp, &conn, Some(rel * kmax));
    let sff = second_fundamental(cp, &conn, &fd);
    Geometry { conn, frenet: fd, sff }
}

fn products(ctx: &CheckContext, report: &mut RunReport) -> Result<CheckOutcome> {
    let warped = find("warped")?.compatible([64; 3])?;
    let gv = gv_direct(warped.pair())?;
    let geo = geometry_rel(&warped, tol::TWISTED_K_MIN_REL);
    let u = umbilic_system_residuals(&warped, &geo, None, tol::WARPED_UMBILIC * ctx.tol_scale)?;
    let mut m = vec![
        ctx.le("warped: |gv|", gv.abs(), tol::WARPED_GV),
        ctx.le("warped: umbilic residuals (max of both)", u.first.max_abs().max(u.second.max_abs()), tol::WARPED_UMBILIC),
    ];
    let n = tol::TWISTED_GRID;
    let tw = find("twisted")?.compatible([n; 3])?;
    let geo = geometry_rel(&tw, tol::TWISTED_K_MIN_REL);
    let tau = geo.frenet.tau.max_abs_where(&geo.frenet.valid);
    report.values.insert("products.twisted.tau".into(), Num(tau));
    m.push(ctx.ge("twisted (non-factorizable): max |tau| on the mask", tau, tol::TWISTED_SEPARATION * tol::TWISTED_TOL));
    let tf = find("twisted-factorizable")?.compatible([n; 3])?;
    let geo = geometry_rel(&tf, tol::TWISTED_K_MIN_REL);
    let tau = geo.frenet.tau.max_abs_where(&geo.frenet.valid);
    let u = umbilic_system_residuals(&tf, &geo, None, tol::UMBILICITY * ctx.tol_scale)?;
    report.values.insert("products.factorizable.umbilicity".into(), Num(u.umbilicity));
    m.push(ctx.le("factorizable: max |tau| on the mask", tau, tol::TWISTED_TOL));
    m.push(ctx.le("factorizable: first umbilic residual", u.first.max_abs(), tol::TWISTED_TOL));
    m.push(ctx.le("factorizable: second umbilic residual", u.second.max_abs(), tol::TWISTED_TOL));
    outcome(
        "products",
        11,
        format!("warped at 64^3; twisted at {n}^3 with mask k >= {:e} max k", tol::TWISTED_K_MIN_REL),
        m,
    )
}

fn determinism(ctx: &CheckContext, _report: &mut RunReport) -> Result<CheckOutcome> {
    let exe = match &ctx.exe {
        Some(p) => p.clone(),
        None => std::env::current_exe().map_err(|e| GvError::Invalid(format!("cannot locate the gvlab binary: {e}")))?,
    };
    let args = ["gv", "--scenario", "tilted", "--grid", "32,32,32", "--no-timestamp", "--checks", "saddle"];
    let mut outputs = vec![];
    for threads in ["1", "4", "1", "4"] {
        let out = Command::new(&exe)
            .args(args)
            .env("GVLAB_THREADS", threads)
            .output()
            .map_err(|e| GvError::Invalid(format!("cannot run {}: {e}", exe.display())))?;
        if !out.status.success() {
            return Err(GvError::Invalid(format!(
                "{} exited with {}: {}",
                exe.display(),
                out.status,
                String::from_utf8_lossy(&out.stderr)
            )));
        }
        outputs.push(out.stdout);
    }
    let m = vec![
        Measurement::holds("report is non-empty", !outputs[0].is_empty()),
        Measurement::holds("repeated runs byte-identical, GVLAB_THREADS=1", outputs[0] == outputs[2]),
        Measurement::holds("repeated runs byte-identical, GVLAB_THREADS=4", outputs[1] == outputs[3]),
        Measurement::holds("GVLAB_THREADS=1 and 4 byte-identical", outputs[0] == outputs[1]),
    ];
    outcome("determinism", 12, format!("gvlab {}", args.join(" ")), m)
}

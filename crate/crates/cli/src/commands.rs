//! One function per subcommand. Each returns a report; the caller maps it to
//! an exit code.

use holoform::lie::{are_transverse, is_lagrangian, Backend, CatalogSpec};
use holoform::moduli::{ModuliSpace, DEFAULT_SCALE};
use holoform::report::{Check, Report};
use holoform::surface::{moduli_dimension, validate, ColoredPolygon, Labels};
use holoform::symplectic::{
    check_closed, check_groupoid, check_lagrangian_graph, check_nondegenerate, closed_form, invariance_checks, omega_on_basis, sample_composable, ClosedFormKind, GluedSpace, FD_STEP,
};
use holoform::torus_morita::{
    base_poisson_float, brute_force_center, float_cross_check, gamma_spaces, graph_lattice_intersection, integrality_check, lagrangian_graph, morita_surjectivity, poisson_report,
    qt_center, qt_commutator_phase, theta_negation_holds, AbelianModel, HorizontalGroupoid, Mode, SkewTheta, ThetaEntries, GAMMA11_TARGET,
};
use holoform::{exact, linalg, Error};
use serde_json::{json, Value};

use crate::config::ScenarioConfig;
use crate::tolerances::Tolerances;
use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Which {
    Closed,
    Nondegenerate,
    Invariance,
    Lagrangian,
    Groupoid,
}

impl Which {
    fn name(self) -> &'static str {
        match self {
            Which::Closed => "closed",
            Which::Nondegenerate => "nondegenerate",
            Which::Invariance => "invariance",
            Which::Lagrangian => "lagrangian",
            Which::Groupoid => "groupoid",
        }
    }
}

/// Everything a command needs after flags and config are merged.
#[derive(Clone, Debug)]
pub struct Run {
    pub config: ScenarioConfig,
    pub seeds: Vec<u64>,
    pub tol: Tolerances,
    pub mode: Mode,
}

impl Run {
    pub fn new(config: ScenarioConfig, seed: Option<u64>, tol: Tolerances, mode: Option<Mode>) -> Result<Self, CliError> {
        let seeds = match seed {
            Some(s) => vec![s],
            None => config.seeds()?,
        };
        let mode = mode.unwrap_or_else(|| config.mode());
        Ok(Run { config, seeds, tol, mode })
    }

    fn scenario(&self, cmd: &str) -> String {
        self.config.name.clone().unwrap_or_else(|| cmd.to_string())
    }

    fn scale(&self) -> f64 {
        self.config.scale.unwrap_or(DEFAULT_SCALE)
    }

    /// Backend × surface pairs; with more than one pair, pairs whose labels
    /// the backend lacks are skipped and listed.
    fn spaces(&self, report: &mut Report) -> Result<Vec<(Backend, ModuliSpace)>, CliError> {
        let backends = self.config.backends()?;
        let surfaces = self.config.surfaces()?;
        let single = backends.len() * surfaces.len() == 1;
        let mut out = Vec::new();
        let mut skipped = Vec::new();
        for be in &backends {
            for p in &surfaces {
                match ModuliSpace::new(be, p) {
                    Ok(sp) => out.push((be.clone(), sp)),
                    Err(e @ (Error::UnresolvedLabel(_) | Error::Surface(_))) if !single => skipped.push(format!("{}/{}: {e}", be.name(), p.name)),
                    Err(e) => return Err(CliError::Config(e.to_string())),
                }
            }
        }
        if out.is_empty() {
            return Err(CliError::Config("no backend/surface pair resolves".into()));
        }
        if !skipped.is_empty() {
            report.set("skipped", json!(skipped));
        }
        Ok(out)
    }
}

fn tag(be: &Backend, sp: &ModuliSpace) -> String {
    format!("{}/{}", be.name(), sp.polygon().name)
}

fn internal(e: Error) -> CliError {
    CliError::Internal(e.to_string())
}

fn rows(m: &nalgebra::DMatrix<f64>) -> Value {
    json!((0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect::<Vec<f64>>()).collect::<Vec<_>>())
}

pub fn cmd_validate(run: &Run) -> Result<Report, CliError> {
    let mut report = Report::new(run.scenario("validate"));
    let mut details = Vec::new();
    for be in run.config.backends()? {
        for p in run.config.surfaces()? {
            let v = validate(&p, &be).map_err(|e| CliError::Config(e.to_string()))?;
            let t = format!("{}/{}", be.name(), p.name);
            for c in &v.corners {
                report.push(Check::flag(format!("{t} corner {:?} {}|{} transverse", c.vertices, c.colors.0, c.colors.1), c.transverse));
            }
            for a in &v.arcs {
                report.push(Check::flag(format!("{t} arc {} `{}` lagrangian", a.side, a.color), a.lagrangian));
            }
            for c in &v.cuts {
                report.push(Check::flag(format!("{t} cut `{}` paired", c.id), c.consistent));
            }
            report.push(Check::flag(format!("{t} valid"), v.pass));
            details.push(json!({"surface": v.surface, "backend": be.name(), "problems": v.problems}));
        }
    }
    report.set("validation", json!(details));
    Ok(report)
}

fn exact_theta(run: &Run, be: &Backend) -> Result<SkewTheta, CliError> {
    if let Some(t) = run.config.theta(Mode::Exact)? {
        return Ok(t);
    }
    match &be.spec {
        CatalogSpec::AbelianDouble { n, theta: None } => SkewTheta::default_exact(*n).ok_or_else(|| CliError::Config(format!("abelian_double({n}) has no default theta; set `theta`"))),
        CatalogSpec::AbelianDouble { theta: Some(rows), .. } => {
            let m = rows.iter().map(|r| r.iter().map(|&x| exact::from_f64(x)).collect::<holoform::Result<Vec<_>>>()).collect::<holoform::Result<Vec<_>>>().map_err(internal)?;
            SkewTheta::exact(exact::QMatrix::from_rows(&m)).map_err(|e| CliError::Config(e.to_string()))
        }
        _ => Err(CliError::Config(format!("exact mode needs an abelian backend, got {}", be.name()))),
    }
}

pub fn cmd_dim(run: &Run) -> Result<Report, CliError> {
    let mut report = Report::new(run.scenario("dim"));
    let mut dims = Vec::new();
    for (be, sp) in run.spaces(&mut report)? {
        let t = tag(&be, &sp);
        let formula = moduli_dimension(sp.polygon(), &be).map_err(internal)?;
        for &seed in &run.seeds {
            let pt = sp.random_point(seed, run.scale()).map_err(internal)?;
            let tm = sp.tangent_matrix(&pt).map_err(internal)?;
            let rank = linalg::rank(&tm, linalg::RANK_RTOL);
            report.push(Check::within(format!("{t} seed={seed} tangent rank"), formula.abs_diff(rank) as f64, 0.0));
        }
        let mut entry = json!({"space": t, "formula": formula});
        if run.mode == Mode::Exact {
            let theta = exact_theta(run, &be)?;
            let model = AbelianModel::new(&theta, sp.polygon()).map_err(internal)?;
            let exact_dim = model.param_dim() - model.constraint.rank();
            report.push(Check::within(format!("{t} exact kernel dimension"), formula.abs_diff(exact_dim) as f64, 0.0));
            entry["exact"] = json!(exact_dim);
        }
        dims.push(entry);
    }
    report.set("dimensions", json!(dims));
    Ok(report)
}

pub fn cmd_omega(run: &Run) -> Result<Report, CliError> {
    let mut report = Report::new(run.scenario("omega"));
    let tol = run.tol.get("oracle");
    let mut grams = Vec::new();
    for (be, sp) in run.spaces(&mut report)? {
        let t = tag(&be, &sp);
        let kind = ClosedFormKind::detect(sp.polygon());
        for &seed in &run.seeds {
            let pt = sp.random_point(seed, run.scale()).map_err(internal)?;
            let (tm, w) = omega_on_basis(&sp, &pt).map_err(internal)?;
            report.push(Check::within(format!("{t} seed={seed} skew"), linalg::skew_residual(&w), tol));
            let mut entry = json!({"space": t, "seed": seed, "gram": rows(&w)});
            if let Some(k) = kind {
                let c = closed_form(k, &sp, &pt, &tm).map_err(internal)?;
                let delta = linalg::max_abs(&(&w - c));
                report.push(Check::within(format!("{t} seed={seed} oracle"), delta, tol));
                entry["oracle"] = json!(k);
                entry["oracle_delta"] = json!(delta);
            }
            grams.push(entry);
        }
    }
    report.set("omega", json!(grams));
    Ok(report)
}

fn default_gluing(run: &Run, p: &ColoredPolygon) -> Result<(String, Vec<usize>, Vec<usize>), CliError> {
    if let Some(g) = &run.config.gluing {
        return Ok((g.with.clone(), g.seam1.clone(), g.seam2.clone()));
    }
    match p.name.as_str() {
        "square" => Ok(("square".into(), vec![1], vec![3])),
        "gamma11" => Ok(("square".into(), vec![0], vec![2])),
        "gamma00" => Ok(("gamma00".into(), vec![1, 2], vec![4, 5])),
        other => Err(CliError::Config(format!("no default gluing for `{other}`; set `gluing`"))),
    }
}

fn second_seed(seed: u64) -> u64 {
    seed ^ 0x9e37_79b9_7f4a_7c15
}

pub fn cmd_check(run: &Run, which: Which) -> Result<Report, CliError> {
    let mut report = Report::new(run.scenario(&format!("check {}", which.name())));
    if which == Which::Groupoid && run.mode == Mode::Exact {
        return exact_groupoid(run, report);
    }
    let scale = run.scale();
    for (be, sp) in run.spaces(&mut report)? {
        let t = tag(&be, &sp);
        let gluing = match which {
            Which::Lagrangian => {
                let (with, s1, s2) = default_gluing(run, sp.polygon())?;
                let labels = run.config.labels()?;
                let p2 = ColoredPolygon::builtin(&with, &labels).map_err(|e| CliError::Config(e.to_string()))?;
                let sp2 = ModuliSpace::new(&be, &p2).map_err(|e| CliError::Config(e.to_string()))?;
                let gs = GluedSpace::new(&sp, &sp2, &s1, &s2).map_err(|e| CliError::Config(e.to_string()))?;
                Some((sp2, gs))
            }
            _ => None,
        };
        if which == Which::Groupoid && sp.polygon().name != "square" {
            return Err(CliError::Config("the groupoid check runs on the square".into()));
        }
        for &seed in &run.seeds {
            let pt = sp.random_point(seed, scale).map_err(internal)?;
            let n = format!("{t} seed={seed}");
            match which {
                Which::Closed => {
                    let tol = run.tol.get(if sp.algebra().is_abelian() { "closed_abelian" } else { "closed" });
                    let r = check_closed(&sp, &pt, FD_STEP, tol).map_err(internal)?;
                    report.push(Check::within(format!("{n} d_omega"), r.max_residual, tol));
                }
                Which::Nondegenerate => {
                    let r = check_nondegenerate(&sp, &pt).map_err(internal)?;
                    report.push(Check::above(format!("{n} min singular value"), r.min_singular_value, run.tol.get("nondegenerate")));
                }
                Which::Invariance => {
                    let tol = run.tol.get("invariance");
                    let r = invariance_checks(&sp, &pt, seed).map_err(internal)?;
                    report.push(Check::within(format!("{n} rotation"), r.rotation_residual, tol));
                    if let Some(x) = r.recut_residual {
                        report.push(Check::within(format!("{n} recut"), x, tol));
                    }
                    if let Some(x) = r.cut_cancellation_residual {
                        report.push(Check::within(format!("{n} cut cancellation"), x, 0.0));
                    }
                }
                Which::Lagrangian => {
                    let (sp2, gs) = gluing.as_ref().expect("built above");
                    let tol = run.tol.get("isotropy");
                    let pt2 = sample_composable(&sp, &pt, sp2, gs, second_seed(seed), scale).map_err(internal)?;
                    let r = check_lagrangian_graph(&sp, &pt, sp2, &pt2, gs).map_err(internal)?;
                    report.push(Check::within(format!("{n} graph isotropy"), r.isotropy_residual, tol));
                    report.push(Check::within(format!("{n} graph tangency"), r.tangency_residual, tol));
                    report.push(Check::within(format!("{n} graph half dimension"), r.dimension.abs_diff(r.expected_dimension) as f64, 0.0));
                }
                Which::Groupoid => {
                    let r = check_groupoid(&sp, seed, scale).map_err(internal)?;
                    report.push(Check::within(format!("{n} groupoid axioms"), r.max_residual(), run.tol.get("groupoid")));
                }
            }
        }
    }
    Ok(report)
}

fn exact_groupoid(run: &Run, mut report: Report) -> Result<Report, CliError> {
    for be in run.config.backends()? {
        let theta = exact_theta(run, &be)?;
        for p in run.config.surfaces()? {
            let g = match p.name.as_str() {
                "square" => HorizontalGroupoid::square(&theta),
                "gamma00" => HorizontalGroupoid::gamma00(&theta),
                other => return Err(CliError::Config(format!("no exact groupoid on `{other}`"))),
            }
            .map_err(internal)?;
            for &seed in &run.seeds {
                let r = g.check(seed).map_err(internal)?;
                let n = format!("{}/{} seed={seed} exact", be.name(), p.name);
                report.push(Check::flag(format!("{n} associativity"), r.associativity));
                report.push(Check::flag(format!("{n} units"), r.left_unit && r.right_unit));
                report.push(Check::flag(format!("{n} inverses"), r.left_inverse && r.right_inverse));
            }
        }
    }
    Ok(report)
}

pub fn cmd_selftest(run: &Run) -> Result<Report, CliError> {
    let mut report = Report::new(run.scenario("selftest"));
    let tol = run.tol.get("catalog");
    for be in run.config.backends()? {
        let alg = &be.algebra;
        let t = be.name();
        report.push(Check::within(format!("{t} jacobi"), alg.jacobi_residual(), tol));
        report.push(Check::within(format!("{t} metric invariance"), alg.invariance_residual(), tol));
        for h in &be.subalgebras {
            let r = is_lagrangian(alg, h);
            report.push(Check::within(format!("{t} {} isotropic", h.label()), r.isotropy_residual, tol));
            report.push(Check::within(format!("{t} {} closed under bracket", h.label()), r.closure_residual, tol));
            report.push(Check::within(format!("{t} {} half dimension", h.label()), r.rank.abs_diff(r.half_dim) as f64, 0.0));
        }
        for (a, b) in [("r", "b"), ("b", "v")] {
            if let (Some(x), Some(y)) = (be.get(a), be.get(b)) {
                let r = are_transverse(alg, x, y);
                report.push(Check::flag(format!("{t} {a}|{b} transverse"), r.pass));
            }
        }
    }
    Ok(report)
}

/// The Γ pipeline on `theta`; `planck` only feeds the integrality verdicts.
pub fn cmd_torus_morita(run: &Run, theta: &SkewTheta, planck: &str) -> Result<Report, CliError> {
    let mut report = Report::new(run.scenario("torus-morita"));
    let seed = run.seeds[0];
    let bound = run.config.qt_bound.unwrap_or(4);
    qt_section(run, theta, bound, &mut report)?;
    match &theta.entries {
        ThetaEntries::Irrational(_) => return Ok(report),
        ThetaEntries::Float(_) => return float_pipeline(run, theta, seed, report),
        ThetaEntries::Rational(_) => {}
    }
    let planck = exact::parse_rational(planck).map_err(|e| CliError::Config(e.to_string()))?;
    let graph = lagrangian_graph(theta).map_err(internal)?;
    report.push(Check::flag("theta graph lagrangian", graph.lagrangian));
    report.push(Check::flag("theta graph transverse to r", graph.transverse_to_r));
    report.push(Check::flag("theta graph transverse to b", graph.transverse_to_b));
    let lattice = graph_lattice_intersection(theta).map_err(internal)?;
    report.set("graph_lattice", json!(lattice.iter().map(|v| v.iter().map(|x| x.to_string()).collect::<Vec<_>>()).collect::<Vec<_>>()));

    let spaces = gamma_spaces(theta).map_err(|e| match e {
        Error::Singular(_) => CliError::Config(e.to_string()),
        e => internal(e),
    })?;
    let all = [&spaces.g00, &spaces.g01, &spaces.g10, &spaces.g11, &spaces.g11_swapped];
    let ftol = run.tol.get("float_cross");
    let mut verdicts = serde_json::Map::new();
    for g in all {
        report.push(Check::flag(format!("{} nondegenerate", g.name), g.is_nondegenerate()));
        report.push(Check::within(format!("{} float cross-check", g.name), float_cross_check(g, theta, seed).map_err(internal)?, ftol));
        verdicts.insert(g.name.clone(), json!(integrality_check(g, &planck).map_err(internal)?));
    }
    let pr = poisson_report(theta, &spaces).map_err(internal)?;
    report.push(Check::flag("pi_R = eps theta", pr.epsilon_r.is_some()));
    report.push(Check::flag("pi_B = eps theta^-1", pr.epsilon_b.is_some()));
    report.push(Check::flag("shared eps", pr.epsilon.is_some()));
    let mr = morita_surjectivity(&spaces);
    report.push(Check::flag("gamma01 base projection surjective", mr.g01_rank == mr.g01_base_dim));
    report.push(Check::flag("gamma10 base projection surjective", mr.g10_rank == mr.g10_base_dim));
    let g11 = ColoredPolygon::builtin("gamma11", &Labels::default()).map_err(internal)?;
    report.push(Check::flag("theta -> -theta reverses omega", theta_negation_holds(theta, &g11).map_err(internal)?));
    let hg = HorizontalGroupoid::square(theta).map_err(internal)?;
    report.push(Check::flag("exact square groupoid", hg.check(seed).map_err(internal)?.pass));

    report.set("poisson", json!(pr));
    report.set("morita", json!(mr));
    report.set("planck", json!(planck.to_string()));
    report.set("integrality", Value::Object(verdicts));
    Ok(report)
}

fn qt_section(run: &Run, theta: &SkewTheta, bound: i64, report: &mut Report) -> Result<(), CliError> {
    let t = theta.to_f64();
    let tol = run.tol.get("qt");
    for i in 0..theta.n {
        for j in 0..theta.n {
            if i == j {
                continue;
            }
            let z = qt_commutator_phase(i, j, &t).map_err(internal)?;
            let a = 2.0 * std::f64::consts::PI * t[(i, j)];
            report.push(Check::within(format!("qt commutator u{}u{}", i + 1, j + 1), (z.re - a.cos()).hypot(z.im - a.sin()), tol));
        }
    }
    if theta.mode() == Mode::Exact {
        let c = qt_center(theta, bound).map_err(internal)?;
        if let ThetaEntries::Rational(q) = &theta.entries {
            let lattice = graph_lattice_intersection(theta).map_err(internal)?;
            let from_lattice = holoform::torus_morita::lattice_points_in_box(&lattice, theta.n, bound).map_err(internal)?;
            let brute: std::collections::BTreeSet<Vec<i64>> = brute_force_center(&q.to_f64(), bound).map_err(internal)?.into_iter().collect();
            let mut nonzero = from_lattice.clone();
            nonzero.remove(&vec![0; theta.n]);
            report.push(Check::flag(format!("qt center matches search |a| <= {bound}"), nonzero == brute));
        }
        report.set("qt_center", json!(c));
    }
    Ok(())
}

/// Float θ: the same bivectors from the general machinery at one point.
fn float_pipeline(run: &Run, theta: &SkewTheta, seed: u64, mut report: Report) -> Result<Report, CliError> {
    let t = theta.to_f64();
    let tinv = t.clone().try_inverse().ok_or_else(|| CliError::Config("theta must be invertible".into()))?;
    let tol = run.tol.get("poisson_float");
    let be = theta.backend().map_err(internal)?;
    let d = Labels::default();
    let mut signs = Vec::new();
    for (labels, target, name) in [(d.swapped(), &t, "pi_R = eps theta"), (d.clone(), &tinv, "pi_B = eps theta^-1")] {
        let p = ColoredPolygon::builtin("gamma11", &labels).map_err(internal)?;
        let sp = ModuliSpace::new(&be, &p).map_err(internal)?;
        let pt = sp.random_point(seed, run.scale()).map_err(internal)?;
        let pi = base_poisson_float(&sp, &pt, GAMMA11_TARGET).map_err(internal)?;
        let (plus, minus) = (linalg::max_abs(&(&pi - target)), linalg::max_abs(&(&pi + target)));
        signs.push(if plus <= minus { 1 } else { -1 });
        report.push(Check::within(name, plus.min(minus), tol));
    }
    report.push(Check::flag("shared eps", signs[0] == signs[1]));
    Ok(report)
}

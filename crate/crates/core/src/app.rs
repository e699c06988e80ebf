//! Subcommand drivers behind the `inls` binary. Each run writes its artifacts and a
//! `manifest.json` into the output directory and returns a JSON report plus named checks.
//! Output bytes depend only on the configuration (no timestamps, sorted JSON keys,
//! single-threaded linear algebra).

use crate::approx::{build_family, earliest_time, initial_data_wpm, residual_slope, ApproxFamily};
use crate::config::{Config, TimeSpan};
use crate::error::{Error, Result};
use crate::evolution::{blowup_indicator, scattering_indicator, EvolveConfig, Evolver, StopReason};
use crate::field::{grad_norm_sq, RadialField};
use crate::grid::RadialGrid;
use crate::groundstate::GroundState;
use crate::io::{eigen_container, family_container, field_container, Container, EigenCache};
use crate::linalg::least_squares;
use crate::lorentz::{lorentz_norm, lorentz_norm_analytic};
use crate::modulation::{decompose, track, ModulationOptions, ModulationState};
use crate::operators::{kernel_check, quadratic_q};
use crate::params::Params;
use crate::scalar::{ball_volume, C};
use crate::spectral::{compute_eigen, kernel_ode_asymptotics, shooting_e0, spectrum_scan, EigenBundle, EigenOptions, ShootingOptions};
use crate::virial::{a_r_orbit_bound, virial_first_derivative, virial_second_identity, virial_v, VirialConfig};
use serde::Serialize;
use serde_json::{json, Value};
use std::path::{Path, PathBuf};
use std::sync::Arc;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    GroundState,
    Spectrum,
    BuildWa,
    Evolve,
    Modulate,
    Virial,
    Lorentz,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::GroundState => "ground-state",
            Command::Spectrum => "spectrum",
            Command::BuildWa => "build-wa",
            Command::Evolve => "evolve",
            Command::Modulate => "modulate",
            Command::Virial => "virial",
            Command::Lorentz => "lorentz",
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &str, passed: bool, detail: impl Into<String>) -> Check {
    Check { name: name.into(), passed, detail: detail.into() }
}

#[derive(Clone, Debug)]
pub struct Outcome {
    pub report: Value,
    pub checks: Vec<Check>,
    pub files: Vec<PathBuf>,
}

impl Outcome {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

struct Ctx<'a> {
    cfg: &'a Config,
    pr: Params<f64>,
    grid: Arc<RadialGrid<f64>>,
    gs: GroundState<f64>,
    out: &'a Path,
    files: Vec<PathBuf>,
}

impl<'a> Ctx<'a> {
    fn new(cfg: &'a Config, out: &'a Path) -> Result<Self> {
        let pr = cfg.params();
        let grid = cfg.grid()?;
        let gs = GroundState::new(&pr, &grid)?;
        std::fs::create_dir_all(out)?;
        Ok(Ctx { cfg, pr, grid, gs, out, files: vec![] })
    }

    fn write(&mut self, name: &str, text: &str) -> Result<()> {
        let p = self.out.join(name);
        if let Some(parent) = p.parent() {
            std::fs::create_dir_all(parent)?;
        }
        let tmp = p.with_extension("tmp");
        std::fs::write(&tmp, text)?;
        std::fs::rename(&tmp, &p)?;
        self.files.push(p);
        Ok(())
    }

    fn write_container(&mut self, name: &str, c: &Container) -> Result<()> {
        self.write(name, &c.to_text())
    }

    fn eigen(&self) -> Result<EigenBundle> {
        let s = &self.cfg.spectral;
        let opts = EigenOptions { clamp: s.clamp, tol: s.tol, max_refine: s.max_refine };
        match &s.cache_dir {
            Some(dir) => Ok(EigenCache::new(dir).load_or_compute(&self.gs, &opts)?.0),
            None => compute_eigen(&self.gs, &opts),
        }
    }

    fn family(&self, eig: &EigenBundle, sign: f64) -> Result<ApproxFamily> {
        build_family(&self.gs, eig, sign, self.cfg.family.order)
    }
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

fn manifest(cmd: Command, cfg: &Config, grid: &RadialGrid<f64>, files: &[PathBuf], out: &Path) -> Value {
    let names: Vec<String> = files.iter().map(|p| p.strip_prefix(out).unwrap_or(p).to_string_lossy().replace('\\', "/")).collect();
    json!({
        "command": cmd.name(),
        "config": serde_json::to_value(cfg).expect("serializable"),
        "config_hash": cfg.hash(),
        "versions": { "inls": env!("CARGO_PKG_VERSION"), "faer": "0.24", "format": 1 },
        "grid_key": grid.key().tag(),
        "seed": cfg.seed,
        "artifacts": names,
    })
}

/// Runs one subcommand, writing artifacts under `out`.
pub fn run(cmd: Command, cfg: &Config, out: &Path) -> Result<Outcome> {
    let mut ctx = Ctx::new(cfg, out)?;
    let (report, checks) = match cmd {
        Command::GroundState => ground_state(&mut ctx)?,
        Command::Spectrum => spectrum(&mut ctx)?,
        Command::BuildWa => build_wa(&mut ctx)?,
        Command::Evolve => evolve(&mut ctx)?,
        Command::Modulate => modulate(&mut ctx)?,
        Command::Virial => virial(&mut ctx)?,
        Command::Lorentz => lorentz(&mut ctx)?,
    };
    let full = json!({ "report": report, "checks": serde_json::to_value(&checks).expect("serializable") });
    ctx.write("report.json", &pretty(&full))?;
    let m = manifest(cmd, cfg, &ctx.grid, &ctx.files, out);
    ctx.write("manifest.json", &pretty(&m))?;
    Ok(Outcome { report, checks, files: ctx.files })
}

fn ground_state(ctx: &mut Ctx) -> Result<(Value, Vec<Check>)> {
    let gs = &ctx.gs;
    let kc = kernel_check(gs);
    let w2 = RadialField::from_real_fn(&ctx.grid, |r| gs.profile.w(2.0 * r));
    let ratios = [gs.sharp_ratio(&gs.w), gs.sharp_ratio(&w2), gs.sharp_ratio(&gs.w.scale(3.0))];
    let report = json!({
        "d": ctx.pr.d, "b": ctx.pr.b, "alpha": ctx.pr.alpha,
        "grad_norm_sq": gs.grad_norm_sq,
        "potential_integral": gs.potential_integral,
        "energy": gs.energy,
        "pohozhaev_residual": gs.pohozhaev_residual,
        "elliptic_residual": gs.elliptic_residual,
        "kernel": { "minus_l2": kc.minus_l2, "plus_l2": kc.plus_l2, "minus_dual": kc.minus_dual, "plus_dual": kc.plus_dual },
        "sharp_ratio": { "w": ratios[0], "w_of_2r": ratios[1], "three_w": ratios[2] },
    });
    let checks = vec![
        check("pohozhaev", gs.pohozhaev_residual <= 1e-5, format!("{:e} <= 1e-5", gs.pohozhaev_residual)),
        check("sharp_ratio_symmetries", ratios.iter().all(|r| (r - 1.0).abs() <= 1e-6), format!("{ratios:?}")),
        check("kernel_minus", kc.minus_l2 <= 1e-3, format!("{:e}", kc.minus_l2)),
        check("kernel_plus", kc.plus_l2 <= 1e-3, format!("{:e}", kc.plus_l2)),
    ];
    let c = field_container(&gs.w, ctx.pr.b).with_meta("field", "W");
    ctx.write_container("w.csv", &c)?;
    Ok((report, checks))
}

fn spectrum(ctx: &mut Ctx) -> Result<(Value, Vec<Check>)> {
    let e = ctx.eigen()?;
    let gs = &ctx.gs;
    let q = quadratic_q(gs, &e.y)?;
    let h1 = grad_norm_sq(&e.y);
    let mut report = json!({
        "e0": e.e0,
        "e0_unrefined": e.e0_unrefined,
        "residual_plus": e.residual_plus,
        "residual_cross": e.residual_cross,
        "residual_unrefined": e.residual_unrefined,
        "negative_count": e.negative_count,
        "clamped": e.clamped,
        "sign_convention_ok": e.sign_convention_ok,
        "q_of_y": q,
        "h1_norm_sq_of_y": h1,
    });
    let mut checks = vec![
        check("eigen_residual", e.residual_plus <= 1e-6, format!("{:e} <= 1e-6", e.residual_plus)),
        check("single_negative_direction", e.negative_count == 1, format!("{}", e.negative_count)),
        check("sign_convention", e.sign_convention_ok, ""),
        check("q_of_y", q.abs() <= 1e-6 * h1, format!("|{q:e}| <= 1e-6 * {h1:e}")),
    ];
    if ctx.cfg.spectral.scan {
        let s = spectrum_scan(gs, ctx.cfg.spectral.zero_tol)?;
        checks.push(check("scan_e0", (s.e0 - e.e0).abs() <= 1e-3 * e.e0, format!("{} vs {}", s.e0, e.e0)));
        report["scan"] = serde_json::to_value(&s).expect("serializable");
    }
    if ctx.cfg.spectral.shooting {
        let sh = shooting_e0(&ctx.pr, &ShootingOptions::default())?;
        checks.push(check("shooting_e0", (sh.e0 - e.e0).abs() <= 1e-2 * e.e0, format!("{} vs {}", sh.e0, e.e0)));
        report["shooting"] = serde_json::to_value(&sh).expect("serializable");
        let fr = kernel_ode_asymptotics(&ctx.pr)?;
        report["frobenius"] = serde_json::to_value(&fr).expect("serializable");
    }
    let c = eigen_container(gs, &e);
    ctx.write_container("eigen.csv", &c)?;
    Ok((report, checks))
}

fn build_wa(ctx: &mut Ctx) -> Result<(Value, Vec<Check>)> {
    let e = ctx.eigen()?;
    let f = &ctx.cfg.family;
    let fam = ctx.family(&e, f.sign as f64)?;
    // start at the validity edge: later windows run into the round-off floor of the Ḣ¹ residual in d = 5
    let t0 = earliest_time(&fam);
    let mut rows = String::from("k,slope,expected,relative_error\n");
    let mut fits = vec![];
    let mut checks = vec![];
    for k in 1..=fam.order().min(3) {
        let fit = residual_slope(&ctx.gs, &fam, k, t0, f.slope_span, f.slope_points)?;
        rows.push_str(&format!("{},{:?},{:?},{:?}\n", k, fit.slope, fit.expected, fit.relative_error));
        checks.push(check(&format!("slope_k{k}"), fit.relative_error <= 0.07, format!("{:.4} vs {:.4}", fit.slope, fit.expected)));
        fits.push(json!({ "k": k, "slope": fit.slope, "expected": fit.expected, "relative_error": fit.relative_error }));
    }
    let report = json!({
        "e0": fam.e0, "sign": f.sign, "order": fam.order(), "q_radius": fam.q_radius,
        "fit_residuals": fam.fit_residuals, "t0": t0, "slopes": fits,
    });
    let c = family_container(&ctx.gs, &fam);
    ctx.write_container("family.csv", &c)?;
    ctx.write("slopes.csv", &rows)?;
    Ok((report, checks))
}

/// Initial datum, its time label and (for `W±` data) `e₀`.
fn initial_data(ctx: &Ctx) -> Result<(RadialField<f64>, f64, Option<f64>)> {
    let e = &ctx.cfg.evolve;
    match e.data.as_str() {
        "wminus" | "wplus" => {
            let eig = ctx.eigen()?;
            let sign = if e.data == "wplus" { 1.0 } else { -1.0 };
            let fam = ctx.family(&eig, sign)?;
            let t0 = -ctx.cfg.family.q_start.ln() / fam.e0;
            Ok((initial_data_wpm(&ctx.gs, &fam, t0)?, t0, Some(fam.e0)))
        }
        "ground" => Ok((ctx.gs.w.scale(e.amplitude), 0.0, None)),
        "gaussian" => {
            let (a, w) = (e.amplitude, e.width);
            Ok((RadialField::from_real_fn(&ctx.grid, |r| a * (-(r * r) / (w * w)).exp()), 0.0, None))
        }
        _ => {
            let path = e.input.as_ref().expect("validated");
            let c = Container::load(Path::new(path))?;
            let t = c.meta_f64("t").unwrap_or(0.0);
            Ok((c.field(&ctx.grid, 0)?, t, None))
        }
    }
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(|v| format!("{v:?}")).unwrap_or_default()
}

fn evolve(ctx: &mut Ctx) -> Result<(Value, Vec<Check>)> {
    let ec = ctx.cfg.evolve.clone();
    let (u0, t0, e0) = initial_data(ctx)?;
    let (s, e) = TimeSpan::parse(&ec.t_span)?.resolve(e0)?;
    if s < 0.0 || e <= s {
        return Err(Error::Config(format!("evolve.t_span: need 0 <= start < end, got {s}:{e}")));
    }
    let gs = &ctx.gs;
    let ev = Evolver::new(&ctx.pr, &ctx.grid, ec.free).with_reference(gs.w.clone());
    let cfg = EvolveConfig {
        dt: ec.dt,
        t_start: t0,
        t_end: t0 + e,
        sample_every: ec.sample_every,
        free: ec.free,
        blowup_factor: ec.blowup_factor,
        energy_tol: ec.energy_tol,
        local_r0: ec.local_r0,
        sponge: ec.sponge,
        ..Default::default()
    };
    let want_mod = ec.observers.iter().any(|o| o == "modulation");
    let want_vir = ec.observers.iter().any(|o| o == "virial");
    let vc = VirialConfig::new(ctx.cfg.virial.radius)?;
    let vir_ok = 2.0 * vc.radius < ctx.grid.r[ctx.grid.n - 1];
    let mo = ModulationOptions::for_ground_state(gs);
    let mut seed = (0.0, 1.0);
    let mut extra: Vec<(Option<ModulationState<f64>>, Option<f64>, Option<f64>)> = vec![];
    let mut snaps: Vec<(usize, f64, RadialField<f64>)> = vec![];
    let mut idx = 0usize;
    let tr = ev.integrate(&u0, &cfg, false, |smp, u| {
        let m = if want_mod && ctx.gs.distance(u) < mo.delta0 {
            decompose(&ctx.gs, u, seed, &mo).ok()
        } else {
            None
        };
        if let Some(st) = &m {
            seed = (st.theta, st.mu);
        }
        let (v, dv) = if want_vir && vir_ok { (Some(virial_v(u, &vc)), Some(virial_first_derivative(u, &vc))) } else { (None, None) };
        extra.push((m, v, dv));
        if ec.snapshot_every > 0 && idx % ec.snapshot_every == 0 {
            snaps.push((idx, smp.t, u.clone()));
        }
        idx += 1;
        true
    })?;
    let t_from = t0 + s;
    let mut csv = String::from("t,energy,mass,kinetic,d_u,theta,mu,beta,virial_v,virial_dv\n");
    for (smp, (m, v, dv)) in tr.samples.iter().zip(&extra) {
        if smp.t < t_from - 1e-12 {
            continue;
        }
        let d_u = (smp.kinetic - gs.grad_norm_sq).abs();
        csv.push_str(&format!(
            "{:?},{:?},{:?},{:?},{:?},{},{},{},{},{}\n",
            smp.t,
            smp.energy,
            smp.mass,
            smp.kinetic,
            d_u,
            fmt_opt(m.as_ref().map(|x| x.theta)),
            fmt_opt(m.as_ref().map(|x| x.mu)),
            fmt_opt(m.as_ref().map(|x| x.beta)),
            fmt_opt(*v),
            fmt_opt(*dv)
        ));
    }
    ctx.write("trajectory.csv", &csv)?;
    for (i, t, u) in &snaps {
        let c = field_container(u, ctx.pr.b).with_meta("t", format!("{t:?}"));
        ctx.write_container(&format!("snapshots/snap_{i:05}.csv"), &c)?;
    }
    let gs = &ctx.gs;
    let summary = tr.summary();
    let kin: Vec<f64> = tr.samples.iter().map(|x| x.kinetic).collect();
    let ts: Vec<f64> = tr.samples.iter().map(|x| x.t).collect();
    let dist: Vec<f64> = tr.samples.iter().map(|x| x.dist_ref.unwrap_or(f64::NAN)).collect();
    let slope = if ts.len() >= 3 && dist.iter().all(|d| *d > 0.0) {
        let a: Vec<Vec<f64>> = ts.iter().map(|&t| vec![1.0, t]).collect();
        let y: Vec<f64> = dist.iter().map(|d| d.ln()).collect();
        Some(least_squares(&a, &y)?.0[1])
    } else {
        None
    };
    let blow = blowup_indicator(&tr, gs.grad_norm_sq);
    let scat = scattering_indicator(&tr, &ctx.pr);
    let report = json!({
        "data": ec.data, "t0": t0, "e0": e0,
        "summary": serde_json::to_value(&summary).expect("serializable"),
        "log_distance_slope": slope,
        "blowup_indicator": serde_json::to_value(&blow).expect("serializable"),
        "scattering_indicator": serde_json::to_value(&scat).expect("serializable"),
    });
    let mut checks = vec![check("finite", tr.stop != StopReason::NonFinite, format!("{:?}", tr.stop))];
    if tr.stop == StopReason::Completed && !ec.free && ec.sponge == 0.0 {
        let rel = summary.energy_drift / gs.energy.abs().max(1.0);
        checks.push(check("energy_drift", rel <= 1e-6 * (e - s).max(1.0), format!("{rel:e}")));
    }
    match (ec.data.as_str(), e0, slope) {
        ("wminus", Some(e0), Some(sl)) => {
            checks.push(check("approach_rate", ((sl + e0) / e0).abs() <= 0.15, format!("{sl:.4} vs {:.4}", -e0)));
            checks.push(check("kinetic_below", kin.iter().all(|&k| k < gs.grad_norm_sq), ""));
        }
        ("wplus", _, _) => checks.push(check("kinetic_above", kin.iter().all(|&k| k > gs.grad_norm_sq), "")),
        _ => {}
    }
    Ok((report, checks))
}

fn modulate(ctx: &mut Ctx) -> Result<(Value, Vec<Check>)> {
    let inputs = ctx.cfg.modulate.inputs.clone();
    if inputs.is_empty() {
        return Err(Error::Config("modulate.inputs: at least one container file is required".into()));
    }
    let mut snaps = vec![];
    for (i, p) in inputs.iter().enumerate() {
        let c = Container::load(Path::new(p))?;
        let t = c.meta_f64("t").unwrap_or(i as f64);
        snaps.push((t, c.field(&ctx.grid, 0)?));
    }
    let mut mo = ModulationOptions::for_ground_state(&ctx.gs);
    mo.delta0 = ctx.cfg.modulate.delta0_fraction * ctx.gs.grad_norm_sq;
    let trk = track(&ctx.gs, &snaps, &mo);
    ctx.write("modulation.csv", &trk.to_csv())?;
    let report = json!({
        "rows": serde_json::to_value(&trk.rows).expect("serializable"),
        "errors": trk.errors.iter().map(|(t, e)| json!({"t": t, "error": e})).collect::<Vec<_>>(),
        "max_rate_ratio": trk.max_ratio(),
    });
    let checks = vec![
        check("all_decomposed", trk.errors.is_empty(), format!("{} failures", trk.errors.len())),
        check("all_valid", trk.rows.iter().all(|r| r.valid), ""),
    ];
    Ok((report, checks))
}

fn virial(ctx: &mut Ctx) -> Result<(Value, Vec<Check>)> {
    let vcfg = ctx.cfg.virial.clone();
    let ec = ctx.cfg.evolve.clone();
    let (u0, t0, e0) = initial_data(ctx)?;
    let (_, e) = TimeSpan::parse(&ec.t_span)?.resolve(e0)?;
    let gs = &ctx.gs;
    let vc = VirialConfig::new(vcfg.radius)?;
    let ev = Evolver::new(&ctx.pr, &ctx.grid, false);
    let total = (e / ec.dt).round() as usize;
    let stride = (total / vcfg.samples).max(1);
    let cfg = EvolveConfig { dt: ec.dt, t_start: t0, t_end: t0 + e, sample_every: stride, ..Default::default() };
    let tr = ev.integrate(&u0, &cfg, true, |_, _| true)?;
    let mo = ModulationOptions::for_ground_state(gs);
    let mut csv = String::from("t,virial_v,virial_dv,second_diff_dt,second_diff_2dt,lhs_proxy,direct,a_r,err_dt,err_2dt,tolerance,mu,orbit_bound_ratio\n");
    let mut rows = vec![];
    let mut worst: f64 = 0.0;
    let mut bound_ratio: f64 = 0.0;
    let mut seed = (0.0, 1.0);
    for (t, u) in &tr.snapshots {
        let id = virial_second_identity(gs, u, &vc, 1e-12)?;
        let sd = |dt: f64| {
            let m = (vcfg.h / dt).round() as usize;
            let h = m as f64 * dt;
            (virial_v(&ev.advance(u, dt, m), &vc) - 2.0 * virial_v(u, &vc) + virial_v(&ev.advance(u, -dt, m), &vc)) / (h * h)
        };
        let (s1, s2) = (sd(ec.dt), sd(2.0 * ec.dt));
        let tol = vcfg.c_dt * ec.dt * ec.dt + vcfg.floor * vcfg.radius * vcfg.radius;
        let (e1, e2) = (s1 - id.lhs_proxy, s2 - id.lhs_proxy);
        worst = worst.max(e1.abs().max(e2.abs()) / tol);
        let mu = decompose(gs, u, seed, &mo).ok().map(|m| {
            seed = (m.theta, m.mu);
            m.mu
        });
        let br = mu.map(|m| id.a_r.abs() / a_r_orbit_bound(ctx.pr.d, m, vcfg.radius, id.d_u));
        if let (Some(m), Some(b)) = (mu, br) {
            if m * vcfg.radius >= 2.0 {
                bound_ratio = bound_ratio.max(b);
            }
        }
        csv.push_str(&format!(
            "{:?},{:?},{:?},{:?},{:?},{:?},{:?},{:?},{:?},{:?},{:?},{},{}\n",
            t,
            virial_v(u, &vc),
            virial_first_derivative(u, &vc),
            s1,
            s2,
            id.lhs_proxy,
            id.direct,
            id.a_r,
            e1,
            e2,
            tol,
            fmt_opt(mu),
            fmt_opt(br)
        ));
        rows.push(json!({"t": t, "lhs_proxy": id.lhs_proxy, "second_diff": s1, "err": e1, "a_r": id.a_r, "side": id.side}));
    }
    ctx.write("virial.csv", &csv)?;
    let report = json!({ "radius": vcfg.radius, "h": vcfg.h, "rows": rows, "worst_error_over_tolerance": worst, "max_orbit_bound_ratio": bound_ratio });
    let checks = vec![check("identity", worst <= 1.0, format!("worst |err|/tol = {worst:.3}"))];
    Ok((report, checks))
}

fn lorentz(ctx: &mut Ctx) -> Result<(Value, Vec<Check>)> {
    let lc = ctx.cfg.lorentz.clone();
    let f = match &lc.input {
        Some(p) => Container::load(Path::new(p))?.field(&ctx.grid, 0)?,
        None => ctx.gs.w.clone(),
    };
    let mut csv = String::from("r,rho,norm\n");
    let mut strong = vec![];
    for &r in &lc.r {
        for &rho in lc.rho.iter().chain(lc.weak.then_some(&f64::INFINITY)) {
            let v = lorentz_norm(&f, r, rho)?;
            csv.push_str(&format!("{r:?},{},{v:?}\n", if rho.is_infinite() { "inf".to_string() } else { format!("{rho:?}") }));
        }
        let lr = lorentz_norm(&f, r, r)?;
        // cell sum only: the rearrangement does not see the exterior tail
        let vol = f.grid.moment(0.0)?;
        let direct = f.values.iter().zip(&vol).map(|(z, w)| z.norm().powf(r) * w).sum::<f64>().powf(1.0 / r);
        strong.push(((lr - direct).abs() / direct, r));
    }
    ctx.write("lorentz.csv", &csv)?;
    let (d, b) = (ctx.pr.d, ctx.pr.b);
    let v: f64 = ball_volume(d);
    let exact = v.powf(b / d as f64);
    let an = lorentz_norm_analytic(|s: f64| (s / v).powf(-b / d as f64), d as f64 / b, f64::INFINITY, 1e-12, 1e8)?;
    let weight = RadialField::from_fn(&ctx.grid, |r| C::new(r.powf(-b), 0.0));
    let gr = lorentz_norm(&weight, d as f64 / b, f64::INFINITY)?;
    let worst = strong.iter().map(|x| x.0).fold(0.0, f64::max);
    let report = json!({ "weak_norm_exact": exact, "weak_norm_analytic": an, "weak_norm_grid": gr, "strong_diagonal_max_relative_error": worst });
    let checks = vec![
        check("diagonal_is_lebesgue", worst <= 1e-8, format!("{worst:e}")),
        check("weak_norm_analytic", (an - exact).abs() <= 1e-10, format!("{an} vs {exact}")),
        check("weak_norm_grid", (gr - exact).abs() / exact <= 1e-3, format!("{gr} vs {exact}")),
    ];
    Ok((report, checks))
}

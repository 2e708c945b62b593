//! Subcommands.

use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, ensure, Context, Result};
use clap::{Args, Subcommand};
use nlsdelta::fields::TwoComponentField;
use nlsdelta::Grid;
use nlsdelta::jost::{scattering_data, threshold_sweep, JostConfig, JostProblem};
use nlsdelta::modulation::{
    decay_report_with, omega_shift, track_with_reference, DecomposeConfig, ModulationSeries, TrackConfig, REPORTED_R,
};
use nlsdelta::numeric::fit_line;
use nlsdelta::nls::{evolve, virial_check, EvolutionConfig, Perturbation, Shape, Trajectory};
use nlsdelta::operators::build_linearized_discrete;
use nlsdelta::profile::CachedDiscreteProfile;
use nlsdelta::propagator::{
    fit_decay, max_group_speed, DecayNorms, NormKey, Propagator, PropagatorConfig,
};
use nlsdelta::resonance::{
    deepest_minimum, refine, resonance_table, scan, Parity, ShooterConfig, TableConfig,
};
use nlsdelta::soliton::{critical_frequency, mass_derivative, soliton_domega, soliton_mass, soliton_profile};
use nlsdelta::spectrum::{discrete_spectrum, Window};
use num_complex::Complex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{parse_range, stepped, RunConfig};
use crate::output::{read_numeric, sibling, Table};
use crate::table::{compare, Computed, CROSS_TOL, PUBLISHED, REL_TOL};

#[derive(Debug, Clone, PartialEq, Subcommand, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "kebab-case")]
pub enum Command {
    /// Closed-form solitary wave: values, mass and mass derivative.
    Soliton(SolitonArgs),
    /// Critical frequency `Ω(q, p)`.
    OmegaCrit(NoArgs),
    /// Eigenvalues of the discretized linearized operator.
    Spectrum(SpectrumArgs),
    /// Flatness of the threshold problem over a frequency range.
    ResonanceScan(ScanArgs),
    /// Even and odd resonances and `Ω` for a list of powers.
    ResonanceTable(TableArgs),
    /// Jost determinant, transmission, reflection and Wronskian checks.
    Jost(JostArgs),
    /// `|det D(0)|` over a frequency range.
    Threshold(ThresholdArgs),
    /// Decay of the projected linear flow with fitted power laws.
    DispersiveFit(DispersiveArgs),
    /// Full nonlinear evolution from a perturbed solitary wave.
    Evolve(EvolveArgs),
    /// Modulation parameters and radiation of a stored trajectory.
    Modulate(ModulateArgs),
    /// Recomputes the `q = −1` resonance table and compares with the published values.
    ReproduceTable(NoArgs),
}

#[derive(Debug, Clone, Default, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoArgs {}

#[derive(Debug, Clone, Default, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolitonArgs {
    /// Print `Q(x)` and `∂_ωQ(x)` at this point.
    #[arg(long, allow_hyphen_values = true)]
    pub x: Option<f64>,
    /// Print the mass `‖Q‖²`.
    #[arg(long)]
    pub mass: bool,
    /// Print `d‖Q‖²/dω`.
    #[arg(long)]
    pub domega: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpectrumArgs {
    /// Window `re_min,re_max,im_min,im_max`.
    #[arg(long, allow_hyphen_values = true)]
    pub window: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScanArgs {
    #[arg(long, default_value = "even")]
    pub parity: String,
    /// Frequency range `lo:hi`.
    #[arg(long)]
    pub range: String,
    #[arg(long, default_value_t = 200)]
    pub samples: usize,
    /// Refine the deepest minimum.
    #[arg(long)]
    pub refine: bool,
}

impl Default for ScanArgs {
    fn default() -> Self {
        Self { parity: "even".into(), range: "0.6:4".into(), samples: 200, refine: false }
    }
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TableArgs {
    /// Powers `lo:hi:step`.
    #[arg(long, default_value = "4.2:6.2:0.2")]
    pub p_list: String,
    /// Skip the odd resonance.
    #[arg(long)]
    pub even_only: bool,
}

impl Default for TableArgs {
    fn default() -> Self {
        Self { p_list: "4.2:6.2:0.2".into(), even_only: false }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct JostArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub xi: Option<f64>,
    /// Uniform grid `lo:hi:n` of spectral parameters.
    #[arg(long, allow_hyphen_values = true)]
    pub all_xi: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ThresholdArgs {
    /// Frequency range `lo:hi`.
    #[arg(long)]
    pub omega_range: String,
    #[arg(long, default_value_t = 41)]
    pub samples: usize,
}

impl Default for ThresholdArgs {
    fn default() -> Self {
        Self { omega_range: "0.6:4".into(), samples: 41 }
    }
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DispersiveArgs {
    /// Weight exponent of `‖⟨x⟩^{−α}·‖_{L²}`.
    #[arg(long, default_value_t = 1.2)]
    pub alpha: f64,
    /// Exponent of the `L^r` norm.
    #[arg(long, default_value_t = 12.0)]
    pub r: f64,
    #[arg(long, default_value_t = 240.0)]
    pub tmax: f64,
    /// Fit window `a:b`.
    #[arg(long, default_value = "40:160")]
    pub window: String,
    /// Centre of the Gaussian datum.
    #[arg(long, default_value_t = 3.0, allow_hyphen_values = true)]
    pub xc: f64,
    #[arg(long, default_value_t = 1.0)]
    pub width: f64,
    #[arg(long, default_value_t = 50)]
    pub sample_every: usize,
    /// Keep `X` as given instead of enlarging it past the reflection time.
    #[arg(long)]
    pub fixed_box: bool,
    /// Skip the threshold-resonance check.
    #[arg(long)]
    pub no_spectral_check: bool,
}

impl Default for DispersiveArgs {
    fn default() -> Self {
        Self {
            alpha: 1.2,
            r: 12.0,
            tmax: 240.0,
            window: "40:160".into(),
            xc: 3.0,
            width: 1.0,
            sample_every: 50,
            fixed_box: false,
            no_spectral_check: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvolveArgs {
    #[arg(long, default_value_t = 0.0)]
    pub eta: f64,
    #[arg(long, default_value = "even")]
    pub shape: String,
    #[arg(long, default_value_t = 20.0)]
    pub tmax: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub center: f64,
    #[arg(long, default_value_t = 1.0)]
    pub width: f64,
    #[arg(long, default_value_t = 10)]
    pub sample_every: usize,
}

impl Default for EvolveArgs {
    fn default() -> Self {
        Self { eta: 0.0, shape: "even".into(), tmax: 20.0, center: 0.0, width: 1.0, sample_every: 10 }
    }
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModulateArgs {
    /// Trajectory written by `evolve`.
    #[arg(long)]
    pub traj: PathBuf,
    #[arg(long, default_value_t = 1.2)]
    pub alpha: f64,
    #[arg(long, default_value_t = 12.0)]
    pub r: f64,
    /// Perturbation size, for the decay verdict.
    #[arg(long)]
    pub eta: Option<f64>,
    /// Fit window `a:b`; the last three quarters of the run by default.
    #[arg(long)]
    pub window: Option<String>,
    /// Skip the unperturbed reference run used to remove time-stepping bias.
    #[arg(long)]
    pub no_reference: bool,
}

impl Default for ModulateArgs {
    fn default() -> Self {
        Self { traj: PathBuf::new(), alpha: 1.2, r: 12.0, eta: None, window: None, no_reference: false }
    }
}

/// Result of a run: whether every reported check passed.
pub type Verdict = bool;

pub fn run(cfg: &RunConfig) -> Result<Verdict> {
    let cmd = cfg.command.as_ref().ok_or_else(|| anyhow!("no subcommand given"))?;
    let out = cfg.output.out.as_deref();
    match cmd {
        Command::Soliton(a) => soliton(cfg, a, out),
        Command::OmegaCrit(_) => omega_crit(cfg, out),
        Command::Spectrum(a) => spectrum(cfg, a, out),
        Command::ResonanceScan(a) => resonance_scan(cfg, a, out),
        Command::ResonanceTable(a) => table(cfg, a, out),
        Command::Jost(a) => jost(cfg, a, out),
        Command::Threshold(a) => threshold(cfg, a, out),
        Command::DispersiveFit(a) => dispersive(cfg, a, out),
        Command::Evolve(a) => evolve_cmd(cfg, a, out),
        Command::Modulate(a) => modulate(cfg, a, out),
        Command::ReproduceTable(_) => reproduce(cfg, out),
    }
}

fn shooter(cfg: &RunConfig) -> ShooterConfig<f64> {
    ShooterConfig { x0: cfg.numerics.x0, h: cfg.numerics.h, ..Default::default() }
}

fn table_config(cfg: &RunConfig) -> TableConfig<f64> {
    TableConfig { shooter: shooter(cfg), per_decade: cfg.numerics.per_decade, ..Default::default() }
}

fn grid(cfg: &RunConfig) -> Result<Grid> {
    Ok(Grid::with_half_width(cfg.numerics.h, cfg.numerics.x_half)?)
}

fn soliton(cfg: &RunConfig, a: &SolitonArgs, out: Option<&Path>) -> Result<Verdict> {
    let sp = cfg.params()?;
    let (m, dm) = (soliton_mass(&sp), mass_derivative(&sp));
    let printing = a.x.is_some() || a.mass || a.domega;
    if let Some(x) = a.x {
        println!("Q({x}) = {}", soliton_profile(&sp, x));
        println!("dQ/domega({x}) = {}", soliton_domega(&sp, x));
    }
    if a.mass {
        println!("mass = {m}");
    }
    if a.domega {
        println!("mass_derivative = {dm}");
    }
    if out.is_some() || !printing {
        let mut t = Table::create(out, &["p", "q", "omega", "mass", "mass_derivative"])?;
        t.row(&[sp.p, sp.q, sp.omega, m, dm])?;
        t.finish()?;
    }
    Ok(true)
}

fn omega_crit(cfg: &RunConfig, out: Option<&Path>) -> Result<Verdict> {
    let (q, p) = (cfg.physics.q, cfg.physics.p);
    let w = critical_frequency(q, p)?;
    println!("Omega = {w}");
    if out.is_some() {
        let mut t = Table::create(out, &["p", "q", "omega_crit"])?;
        t.row(&[p, q, w])?;
        t.finish()?;
    }
    Ok(true)
}

fn spectrum(cfg: &RunConfig, a: &SpectrumArgs, out: Option<&Path>) -> Result<Verdict> {
    let window = match &a.window {
        None => Window::everything(),
        Some(s) => {
            let v: Vec<f64> = s
                .split(',')
                .map(|t| t.trim().parse::<f64>().with_context(|| format!("bad window entry {t:?}")))
                .collect::<Result<_>>()?;
            ensure!(v.len() == 4, "window needs four numbers re_min,re_max,im_min,im_max");
            Window::new(v[0], v[1], v[2], v[3])
        }
    };
    let lin = build_linearized_discrete(grid(cfg)?, &cfg.params()?)?;
    let rep = discrete_spectrum(&lin.l, window)?;
    let mut t = Table::create(out, &["re_lambda", "im_lambda"])?;
    for z in &rep.eigenvalues {
        t.row(&[z.re, z.im])?;
    }
    t.finish()?;
    eprintln!("kernel:");
    eprintln!("  eigenvalues_in_window = {}", rep.eigenvalues.len());
    eprintln!("  near_zero = {}", rep.near_zero);
    eprintln!("  cluster_radius = {:e}", rep.threshold);
    eprintln!("  cluster_gap = {:e}", rep.cluster_gap);
    Ok(true)
}

fn resonance_scan(cfg: &RunConfig, a: &ScanArgs, out: Option<&Path>) -> Result<Verdict> {
    let parity: Parity = a.parity.parse()?;
    let r = parse_range(&a.range)?;
    let sh = shooter(cfg);
    let base = cfg.params_at(r[1])?;
    let s = scan(&base, parity, r[0], r[1], a.samples, &sh)?;
    let mut t = Table::create(out, &["omega", "flatness"])?;
    for (&w, &f) in s.omegas.iter().zip(&s.flatness) {
        t.row(&[w, f])?;
    }
    t.finish()?;
    for (w, f) in &s.minima {
        eprintln!("minimum omega = {w} flatness = {f:e}");
    }
    if a.refine {
        let (_, _, bracket) = deepest_minimum(&s).ok_or_else(|| anyhow!("no interior flatness minimum"))?;
        eprintln!("refined omega = {}", refine(&base, parity, bracket, 1e-5, &sh)?);
    }
    Ok(true)
}

fn p_list(spec: &str) -> Result<Vec<f64>> {
    let r = parse_range(spec)?;
    match r.len() {
        3 => stepped(r[0], r[1], r[2]),
        _ => Ok(vec![r[0], r[1]]),
    }
}

fn ok_or_nan(r: &nlsdelta::Result<f64>) -> f64 {
    r.as_ref().copied().unwrap_or(f64::NAN)
}

fn table(cfg: &RunConfig, a: &TableArgs, out: Option<&Path>) -> Result<Verdict> {
    let ps = p_list(&a.p_list)?;
    let mut tc = table_config(cfg);
    if a.even_only {
        tc.odd_min_p = f64::INFINITY;
    }
    let q = cfg.physics.q;
    let rows: Vec<_> = ps.par_iter().map(|&p| resonance_table(q, &[p], &tc).remove(0)).collect();
    let mut t = Table::create(out, &["p", "omega1", "M", "omega2", "Omega"])?;
    let mut all_ok = true;
    for r in &rows {
        let w2 = r.omega2.as_ref().map(ok_or_nan).unwrap_or(f64::NAN);
        t.row(&[r.p, ok_or_nan(&r.omega1), ok_or_nan(&r.mass), w2, ok_or_nan(&r.omega_crit)])?;
        for e in [r.omega1.as_ref().err(), r.omega2.as_ref().and_then(|x| x.as_ref().err())].into_iter().flatten() {
            eprintln!("p = {}: {e}", r.p);
            all_ok = false;
        }
    }
    t.finish()?;
    Ok(all_ok)
}

fn jost(cfg: &RunConfig, a: &JostArgs, out: Option<&Path>) -> Result<Verdict> {
    let xis = match (&a.all_xi, a.xi) {
        (Some(s), _) => {
            let r = parse_range(s)?;
            ensure!(r.len() == 3 && r[2] >= 1.0, "--all-xi needs lo:hi:n with n >= 1");
            let n = r[2] as usize;
            if n == 1 {
                vec![r[0]]
            } else {
                (0..n).map(|i| r[0] + (r[1] - r[0]) * i as f64 / (n - 1) as f64).collect()
            }
        }
        (None, Some(x)) => vec![x],
        (None, None) => bail!("give --xi or --all-xi"),
    };
    let problem = JostProblem::new(&cfg.params()?);
    let jc = JostConfig::default();
    let data: Vec<_> = xis.par_iter().map(|&xi| scattering_data(&problem, xi, &jc)).collect::<Result<_, _>>()?;
    let mut t = Table::create(
        out,
        &["xi", "re_detD", "im_detD", "re_T", "im_T", "re_R", "im_R", "w12_err", "w34_err"],
    )?;
    for d in &data {
        let r = d.r_tilde.unwrap_or(Complex::new(f64::NAN, f64::NAN));
        let w12 = (d.wronskians.w12 - Complex::new(0.0, 2.0 * d.xi)).norm() / (2.0 * d.xi.abs()).max(1.0);
        let w34 = (d.wronskians.w34 + Complex::new(2.0 * d.mu, 0.0)).norm() / (2.0 * d.mu);
        t.row(&[d.xi, d.det_d.re, d.det_d.im, d.t_tilde.re, d.t_tilde.im, r.re, r.im, w12, w34])?;
    }
    t.finish()?;
    Ok(true)
}

fn threshold(cfg: &RunConfig, a: &ThresholdArgs, out: Option<&Path>) -> Result<Verdict> {
    let r = parse_range(&a.omega_range)?;
    let n = a.samples.max(2);
    let omegas: Vec<f64> = (0..n).map(|i| r[0] + (r[1] - r[0]) * i as f64 / (n - 1) as f64).collect();
    let base = cfg.params_at(r[1])?;
    let sw = threshold_sweep(&base, &omegas, &JostConfig::default())?;
    let mut t = Table::create(out, &["omega", "abs_detD0"])?;
    for (&w, &d) in sw.omegas.iter().zip(&sw.det_d0) {
        t.row(&[w, d.abs()])?;
    }
    t.finish()?;
    if sw.roots.is_empty() {
        eprintln!("no zero of det D(0) on [{}, {}]", r[0], r[1]);
    }
    for w in &sw.roots {
        eprintln!("det D(0) = 0 at omega = {w}");
    }
    Ok(true)
}

fn dispersive(cfg: &RunConfig, a: &DispersiveArgs, out: Option<&Path>) -> Result<Verdict> {
    let win = parse_range(&a.window)?;
    let sp = cfg.params()?;
    let pc = PropagatorConfig { dt: cfg.numerics.dt, check_spectral: !a.no_spectral_check, ..Default::default() };
    let datum = |g: Grid| {
        let xs = g.points();
        let re: Vec<f64> = xs.iter().map(|&x| (-((x - a.xc) / a.width).powi(2)).exp()).collect();
        TwoComponentField::new(g, re, vec![0.0; xs.len()])
    };
    let mut g = grid(cfg)?;
    let mut prop = Propagator::new(g, &sp, pc)?;
    let vmax = max_group_speed(&prop.project(&datum(g)), 1e-4);
    let needed = 2.0 * vmax * a.tmax;
    if !a.fixed_box && needed > g.half_width() {
        eprintln!("enlarging X from {} to {needed:.1} (group speed {vmax:.3})", g.half_width());
        g = Grid::with_half_width(cfg.numerics.h, needed)?;
        prop = Propagator::new(g, &sp, pc)?;
    }
    let norms = DecayNorms { alpha: a.alpha, r: a.r, ..Default::default() };
    let s = prop.decay_series(&datum(g), a.tmax, a.sample_every, norms)?;
    let mut t = Table::create(out, &["t", "linf", "l2", "l2w", "lr", "linfw"])?;
    for i in 0..s.len() {
        t.row(&[s.times[i], s.linf[i], s.l2[i], s.l2w[i], s.lr[i], s.linfw[i]])?;
    }
    t.finish()?;
    if let Some(d) = prop.threshold_indicator {
        eprintln!("threshold indicator |det D(0)| = {d:e}");
    }
    eprintln!("fit window [{}, {}], X = {}, reflection time {:.1}", win[0], win[1], g.half_width(), g.half_width() / (2.0 * vmax));
    for key in NormKey::ALL {
        match fit_decay(&s, key, (win[0], win[1])) {
            Ok(f) => eprintln!("  slope {key:>5} = {:+.4} ± {:.4}", f.slope, f.slope_halfwidth),
            Err(e) => eprintln!("  slope {key:>5}: {e}"),
        }
    }
    Ok(true)
}

fn evolve_cmd(cfg: &RunConfig, a: &EvolveArgs, out: Option<&Path>) -> Result<Verdict> {
    let out = out.ok_or_else(|| anyhow!("evolve needs --out for the trajectory file"))?;
    let shape: Shape = a.shape.parse()?;
    let mut ec = EvolutionConfig::new(cfg.params()?, grid(cfg)?);
    ec.dt = cfg.numerics.dt;
    ec.t_max = a.tmax;
    ec.sample_every = a.sample_every;
    ec.perturbation = Perturbation { shape, eta: a.eta, center: a.center, width: a.width, ..Default::default() };
    let traj = evolve(&ec)?;
    write_trajectory(&traj, out)?;
    let summary = sibling(out, "summary");
    let mut t = Table::create(Some(&summary), &["t", "mass", "energy", "xmoment"])?;
    for i in 0..traj.len() {
        t.row(&[traj.times[i], traj.mass[i], traj.energy[i], traj.x_moment[i]])?;
    }
    t.finish()?;
    let vr = virial_check(&traj);
    eprintln!("samples = {}", traj.len());
    eprintln!("mass drift = {:e}", traj.mass_drift());
    eprintln!("energy drift = {:e}", traj.energy_drift());
    eprintln!("virial bound holds = {} (min margin {:e})", vr.holds, vr.min_margin);
    eprintln!("summary written to {}", summary.display());
    Ok(vr.holds)
}

fn write_trajectory(traj: &Trajectory<f64>, path: &Path) -> Result<()> {
    let mut t = Table::create(Some(path), &["t", "x", "re_u", "im_u"])?;
    let xs = traj.grid.points();
    for (&time, u) in traj.times.iter().zip(&traj.samples) {
        for (&x, z) in xs.iter().zip(u) {
            t.row(&[time, x, z.re, z.im])?;
        }
    }
    t.finish()
}

/// Rebuilds a trajectory from `t,x,re_u,im_u` rows.
pub fn read_trajectory(path: &Path, cfg: &RunConfig) -> Result<Trajectory<f64>> {
    let (header, rows) = read_numeric(path)?;
    ensure!(header == ["t", "x", "re_u", "im_u"], "{}: expected columns t,x,re_u,im_u", path.display());
    ensure!(!rows.is_empty(), "{}: no samples", path.display());
    let mut times = Vec::new();
    let mut samples: Vec<Vec<Complex<f64>>> = Vec::new();
    let mut xs = Vec::new();
    for r in &rows {
        if times.last() != Some(&r[0]) {
            times.push(r[0]);
            samples.push(Vec::new());
        }
        if times.len() == 1 {
            xs.push(r[1]);
        }
        samples.last_mut().expect("pushed above").push(Complex::new(r[2], r[3]));
    }
    let n = xs.len();
    ensure!(n >= 3 && n % 2 == 1, "{}: need an odd number of nodes, got {n}", path.display());
    ensure!(samples.iter().all(|s| s.len() == n), "{}: samples have unequal lengths", path.display());
    let h = (xs[n - 1] - xs[0]) / (n - 1) as f64;
    let grid = Grid::new(h, (n - 1) / 2)?;
    ensure!((xs[0] + grid.half_width()).abs() < 1e-6 * h, "{}: grid is not symmetric", path.display());
    let dt = if times.len() > 1 { times[1] - times[0] } else { cfg.numerics.dt };
    Ok(Trajectory {
        params: cfg.params()?,
        grid,
        dt,
        times,
        samples,
        mass: Vec::new(),
        energy: Vec::new(),
        x_moment: Vec::new(),
    })
}

fn modulate(cfg: &RunConfig, a: &ModulateArgs, out: Option<&Path>) -> Result<Verdict> {
    let traj = read_trajectory(&a.traj, cfg)?;
    let src = CachedDiscreteProfile::new(traj.grid, traj.params);
    let tc = TrackConfig {
        alpha: a.alpha,
        r: a.r,
        decompose: DecomposeConfig { tol: cfg.numerics.newton_tol, ..Default::default() },
    };
    let reference = if a.no_reference {
        None
    } else {
        let mut ec = EvolutionConfig::new(traj.params, traj.grid);
        ec.dt = cfg.numerics.dt;
        let spacing = traj.dt;
        ec.sample_every = ((spacing / ec.dt).round() as usize).max(1);
        ensure!(
            ((ec.sample_every as f64) * ec.dt - spacing).abs() < 1e-9 * spacing.abs().max(1.0),
            "sample spacing {spacing} is not a multiple of dt = {}; pass the --dt used by evolve",
            ec.dt
        );
        ec.t_max = *traj.times.last().expect("nonempty");
        Some(track_with_reference(&evolve(&ec)?, &src, &tc, None))
    };
    let ms = track_with_reference(&traj, &src, &tc, reference.as_ref());
    write_series(&ms, out)?;
    report(&ms, reference.as_ref(), a)
}

fn write_series(ms: &ModulationSeries<f64>, out: Option<&Path>) -> Result<()> {
    let mut t = Table::create(
        out,
        &["t", "theta", "omega", "thetadot", "omegadot", "v_h1", "v_lr", "v_l2w", "ode_residual"],
    )?;
    for i in 0..ms.len() {
        t.row(&[
            ms.t[i],
            ms.theta[i],
            ms.omega[i],
            ms.thetadot[i],
            ms.omegadot[i],
            ms.v_h1[i],
            ms.v_lr[i],
            ms.v_l2w[i],
            ms.ode_residual[i],
        ])?;
    }
    t.finish()
}

fn report(ms: &ModulationSeries<f64>, reference: Option<&ModulationSeries<f64>>, a: &ModulateArgs) -> Result<Verdict> {
    let mut ok = true;
    let mut line = |name: &str, pass: bool, detail: String| {
        ok &= pass;
        eprintln!("{} {name}: {detail}", if pass { "PASS" } else { "FAIL" });
    };
    if let Some((i, e)) = &ms.failure {
        line("decomposition", false, format!("failed at sample {i}: {e}"));
    }
    let orth = ms.worst_orthogonality();
    line("orthogonality", orth <= 1.0, format!("worst residual / tolerance = {orth:.3e}"));
    let res = ms.max_interior_residual(0.0);
    line("ode residual", res < 0.05, format!("max normalized residual = {res:.3e} (limit 0.05)"));
    if let Some(r) = reference {
        let s = omega_shift(ms, r).unwrap_or(f64::NAN);
        eprintln!("     omega shift = {s:e}");
    }
    if let Some(eta) = a.eta {
        let t_end = *ms.t.last().unwrap_or(&0.0);
        let w = match &a.window {
            Some(s) => {
                let r = parse_range(s)?;
                (r[0], r[1])
            }
            None => (0.25 * t_end, t_end),
        };
        match decay_report_with(ms, a.alpha, a.r, eta, w) {
            Ok(d) => {
                line(
                    "weighted decay",
                    d.l2w_ok,
                    format!("slope {:.3} (expected {:.3} ± 0.3)", d.l2w_fit.slope, d.l2w_expected),
                );
                line("L^r decay", d.lr_ok, format!("slope {:.3} (expected {:.3} ± 0.15)", d.lr_fit.slope, d.lr_expected));
                eprintln!("     sup H1 / eta = {:.3}", d.h1_over_eta);
                for (k, r) in REPORTED_R.into_iter().enumerate() {
                    let (lt, lv): (Vec<f64>, Vec<f64>) = (0..ms.len())
                        .filter(|&i| ms.t[i] >= w.0 && ms.t[i] <= w.1 && ms.t[i] > 0.0)
                        .map(|i| (ms.t[i].ln(), ms.v_lr_reported[k][i].max(f64::MIN_POSITIVE).ln()))
                        .unzip();
                    match fit_line(&lt, &lv) {
                        Ok(f) => eprintln!("     L^{r} slope {:.3} (dispersive rate {:.3})", f.slope, -(0.5 - 1.0 / r)),
                        Err(e) => eprintln!("     L^{r} slope: {e}"),
                    }
                }
            }
            Err(e) => line("decay", false, e.to_string()),
        }
    }
    Ok(ok)
}

fn reproduce(cfg: &RunConfig, out: Option<&Path>) -> Result<Verdict> {
    let q = cfg.physics.q;
    ensure!(q == -1.0, "the published table is for q = -1, got q = {q}");
    let tc = table_config(cfg);
    let jc = JostConfig::default();
    let ps: Vec<f64> = PUBLISHED.iter().map(|r| r.0).collect();
    let rows: Vec<Computed> = ps
        .par_iter()
        .map(|&p| {
            let r = resonance_table(q, &[p], &tc).remove(0);
            let omega1 = ok_or_nan(&r.omega1);
            let det_root = if omega1.is_finite() { det_root_near(q, p, omega1, &jc) } else { f64::NAN };
            Computed {
                p,
                omega1,
                mass: ok_or_nan(&r.mass),
                omega2: r.omega2.as_ref().map(ok_or_nan).unwrap_or(f64::NAN),
                omega_crit: ok_or_nan(&r.omega_crit),
                det_root,
            }
        })
        .collect();
    let mut t = Table::create(out, &["p", "omega1", "M", "omega2", "Omega", "detD0_root"])?;
    for r in &rows {
        t.row(&[r.p, r.omega1, r.mass, r.omega2, r.omega_crit, r.det_root])?;
    }
    t.finish()?;
    let mut ok = true;
    eprintln!("    p   omega1 rel.dev   M rel.dev   |omega1 - detD0_root|");
    for r in &rows {
        let d = compare(r).expect("published row");
        ok &= d.passed();
        eprintln!(
            "{} {:.1}   {:10.3e}   {:10.3e}   {:10.3e}",
            if d.passed() { "PASS" } else { "FAIL" },
            d.p,
            d.omega1_rel,
            d.mass_rel,
            d.cross
        );
    }
    eprintln!("tolerances: {:.0}% relative, {CROSS_TOL:e} cross-oracle", REL_TOL * 100.0);
    Ok(ok)
}

/// Zero of `det D(0)` closest to `omega1`, searched within ±4%.
pub fn det_root_near(q: f64, p: f64, omega1: f64, jc: &JostConfig<f64>) -> f64 {
    let omegas: Vec<f64> = (0..9).map(|i| omega1 * (0.96 + 0.01 * i as f64)).collect();
    let sweep = nlsdelta::SolitonParams::focusing(q, p, omega1).and_then(|b| threshold_sweep(&b, &omegas, jc));
    match sweep {
        Ok(s) => s.roots.into_iter().min_by(|a, b| (a - omega1).abs().total_cmp(&(b - omega1).abs())).unwrap_or(f64::NAN),
        Err(_) => f64::NAN,
    }
}

use std::fmt;

use illpose_core::checks::run_opcheck;
use illpose_core::decomp::{invariant_check, INVARIANT_SLACK};
use illpose_core::experiments::{
    energy_trajectory, growth_scan, illposedness_table, trajectory, uniform_grid, Engine, ScanConfig,
};
use illpose_core::field::l2_norm;
use illpose_core::linear::{integrate_mode, ModeSolution};
use illpose_core::steady::{stability_condition_holds, steady_state, taylor_sign};
use illpose_core::{Error, Field};
use serde_json::json;

use crate::args::{
    Cli, Command, EnergiesArgs, EvolveArgs, FieldStrength, GrowthArgs, IllposeArgs, ModeArgs, OpcheckArgs,
};
use crate::exit;
use crate::output::{emit, render, Cell, Report, Table};

#[derive(Debug)]
pub enum CliError {
    Validation(String),
    Numerical(String),
    Io(String),
}

impl CliError {
    pub fn code(&self) -> u8 {
        match self {
            CliError::Validation(_) => exit::VALIDATION,
            CliError::Numerical(_) | CliError::Io(_) => exit::NUMERICAL,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Validation(m) => write!(f, "invalid input: {m}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
            CliError::Io(m) => write!(f, "i/o failure: {m}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidParameter(_) | Error::SingularPower { .. } => CliError::Validation(e.to_string()),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

type Outcome = Result<(Report, u8), CliError>;

fn finite(name: &str, x: f64) -> Result<f64, CliError> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(CliError::Validation(format!("--{name} must be finite")))
    }
}

fn non_negative(name: &str, x: f64) -> Result<f64, CliError> {
    if finite(name, x)? >= 0.0 {
        Ok(x)
    } else {
        Err(CliError::Validation(format!("--{name} must be non-negative, got {x}")))
    }
}

fn positive(name: &str, x: f64) -> Result<f64, CliError> {
    if finite(name, x)? > 0.0 {
        Ok(x)
    } else {
        Err(CliError::Validation(format!("--{name} must be positive, got {x}")))
    }
}

fn strength_below_one(b: f64) -> Result<f64, CliError> {
    if finite("b", b)?.abs() < 1.0 {
        Ok(b)
    } else {
        Err(CliError::Validation(format!("--b must satisfy |b| < 1, got {b}")))
    }
}

fn mode_index(n: u32) -> Result<u32, CliError> {
    if n >= 2 {
        Ok(n)
    } else {
        Err(CliError::Validation(format!("--n must be at least 2, got {n}")))
    }
}

fn thread_pool() -> Result<rayon::ThreadPool, CliError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(raw) = std::env::var("ILLPOSE_THREADS") {
        let n: usize =
            raw.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
                CliError::Validation(format!("ILLPOSE_THREADS must be a positive integer, got {raw:?}"))
            })?;
        builder = builder.num_threads(n);
    }
    builder.build().map_err(|e| CliError::Numerical(e.to_string()))
}

pub fn execute(cli: Cli) -> Result<u8, CliError> {
    let pool = thread_pool()?;
    let (report, code) = pool.install(|| dispatch(&cli.command))?;
    emit(&render(&report, cli.format)?, cli.output.as_deref())?;
    Ok(code)
}

fn dispatch(command: &Command) -> Outcome {
    match command {
        Command::Steady(a) => steady(a),
        Command::Taylor(a) => taylor(a),
        Command::Mode(a) => mode(a),
        Command::Evolve(a) => evolve(a),
        Command::Energies(a) => energies(a),
        Command::Growth(a) => growth(a),
        Command::Illpose(a) => illpose(a),
        Command::Opcheck(a) => opcheck(a),
    }
}

fn push_field(table: &mut Table, name: &str, f: &Field) {
    for ((j, k), c) in f.terms() {
        table.push(vec![name.into(), j.into(), k.into(), c.re.into(), c.im.into()]);
    }
}

fn steady(a: &FieldStrength) -> Outcome {
    let (b, mu0) = (finite("b", a.b)?, positive("mu0", a.mu0)?);
    let state = steady_state(b, mu0)?;
    let grad_q = state.pressure_gradient();
    let hgradh = state.magnetic_advection()?;
    let residual = state.momentum_residual()?;
    let sign = taylor_sign(b, mu0)?;

    let mut table = Table::new(vec!["quantity", "j", "k", "re", "im"]);
    push_field(&mut table, "q", &state.pressure);
    push_field(&mut table, "grad_q", &grad_q);
    push_field(&mut table, "HgradH", &hgradh);
    table.push(vec!["residual".into(), Cell::Empty, Cell::Empty, residual.into(), 0.0.into()]);
    table.push(vec!["taylor_sign".into(), Cell::Empty, Cell::Empty, sign.into(), 0.0.into()]);
    let json = json!({
        "b": b,
        "mu0": mu0,
        "q": state.pressure,
        "grad_q": grad_q,
        "HgradH": hgradh,
        "residual": residual,
        "taylor_sign": sign,
    });
    Ok((Report { table, json: Some(json) }, exit::OK))
}

fn taylor(a: &FieldStrength) -> Outcome {
    let (b, mu0) = (finite("b", a.b)?, positive("mu0", a.mu0)?);
    let sign = taylor_sign(b, mu0)?;
    let holds = stability_condition_holds(b, mu0)?;
    let mut table = Table::new(vec!["taylor_sign", "stability_condition_holds"]);
    table.push(vec![sign.into(), holds.into()]);
    let json = json!({ "taylor_sign": sign, "stability_condition_holds": holds });
    Ok((Report { table, json: Some(json) }, exit::OK))
}

fn mode(a: &ModeArgs) -> Outcome {
    let n = mode_index(a.n)?;
    let b = strength_below_one(a.b)?;
    let t_end = non_negative("t-end", a.t_end)?;
    let dt = positive("dt", a.dt)?;
    let exact = ModeSolution::new(n, b)?;
    let samples = integrate_mode(n, b, t_end, dt)?;
    let mut table = Table::new(vec!["t", "sigma_re", "sigma_im", "forced_re", "forced_im", "l2_norm", "residual"]);
    for s in &samples {
        let e = exact.sample(s.t);
        let residual = [s.sigma - e.sigma, s.forced - e.forced].iter().map(|d| d.norm()).fold(0.0, f64::max);
        table.push(vec![
            s.t.into(),
            s.sigma.re.into(),
            s.sigma.im.into(),
            s.forced.re.into(),
            s.forced.im.into(),
            l2_norm(&s.displacement(n)).into(),
            residual.into(),
        ]);
    }
    Ok((table.into(), exit::OK))
}

/// Output times for a run of length `t_end`: every step, thinned to at most 201 rows.
fn output_times(t_end: f64, dt: f64) -> Vec<f64> {
    let steps = (t_end / dt).round().clamp(0.0, 200.0) as usize;
    uniform_grid(t_end, steps + 1)
}

fn evolve(a: &EvolveArgs) -> Outcome {
    let n = mode_index(a.n)?;
    let b = strength_below_one(a.b)?;
    let t_end = non_negative("t-end", a.t_end)?;
    let dt = positive("dt", a.dt)?;
    let engine = Engine::from(a.engine);
    let times = output_times(t_end, dt);
    let states = trajectory(n, b, &times, engine, dt)?;
    let mut table = Table::new(vec![
        "t",
        "sigma_re",
        "sigma_im",
        "forced_re",
        "forced_im",
        "l2_norm",
        "velocity_l2_norm",
        "engine",
    ]);
    for s in &states {
        let w = s.displacement();
        let sigma = w.coeff(0, n);
        let forced = w.coeff(1, 0);
        if !w.is_finite() {
            return Err(CliError::Numerical(format!("non-finite state at t = {}", s.t)));
        }
        table.push(vec![
            s.t.into(),
            sigma.re.into(),
            sigma.im.into(),
            forced.re.into(),
            forced.im.into(),
            l2_norm(&w).into(),
            l2_norm(&s.velocity()).into(),
            engine.name().into(),
        ]);
    }
    Ok((table.into(), exit::OK))
}

fn energies(a: &EnergiesArgs) -> Outcome {
    let n = mode_index(a.n)?;
    let b = strength_below_one(a.b)?;
    let mu = non_negative("mu", a.mu)?;
    let t_end = non_negative("t-end", a.t_end)?;
    let dt = positive("dt", a.dt)?;
    let times = output_times(t_end, dt);
    let reports = energy_trajectory(n, b, mu, &times, a.engine.into(), dt)?;
    let mut table = Table::new(vec!["t", "E_plus", "E_minus", "F", "G", "inv1", "inv2", "inv3", "annihilated_mode"]);
    for r in &reports {
        let flags = invariant_check(r, INVARIANT_SLACK)?;
        table.push(vec![
            r.t.into(),
            r.e_plus.into(),
            r.e_minus.into(),
            r.f_sigma.into(),
            r.g_nu.into(),
            flags.plus_dominates_minus.into(),
            flags.controls_remainder.into(),
            flags.controls_low_modes.into(),
            r.annihilated_mode.into(),
        ]);
    }
    Ok((table.into(), exit::OK))
}

fn scan_table() -> Table {
    Table::new(vec!["n", "t", "E_plus", "lower_bound", "init_norm", "fitted_rate", "theorem_rate", "engine"])
}

fn growth(a: &GrowthArgs) -> Outcome {
    let t_end = non_negative("t-end", a.t_end)?;
    if a.samples < 1 {
        return Err(CliError::Validation("--samples must be at least 1".into()));
    }
    let cfg = ScanConfig {
        n_list: a.n_list.clone(),
        b: strength_below_one(a.b)?,
        mu: non_negative("mu", a.mu)?,
        t_grid: uniform_grid(t_end, a.samples),
        engine: a.engine.into(),
        dt: positive("dt", a.dt)?,
    };
    let rows = growth_scan(&cfg)?;
    let mut table = scan_table();
    for r in &rows {
        table.push(vec![
            r.n.into(),
            r.t.into(),
            r.e_plus.into(),
            r.lower_bound.into(),
            r.init_norm.into(),
            r.fitted_rate.into(),
            r.theorem_rate.into(),
            r.engine.name().into(),
        ]);
    }
    Ok((table.into(), exit::OK))
}

fn illpose(a: &IllposeArgs) -> Outcome {
    let b = strength_below_one(a.b)?;
    let mu = non_negative("mu", a.mu)?;
    let t_star = non_negative("t-star", a.t_star)?;
    let result = illposedness_table(&a.n_list, b, mu, t_star)?;
    let mut table = Table::new(vec![
        "n",
        "t",
        "E_plus",
        "lower_bound",
        "init_norm",
        "theorem_rate",
        "initial_energy_formula",
        "initial_energy_quadrature",
        "initial_energy_ratio",
    ]);
    for (r, e) in result.rows.iter().zip(&result.initial_energies) {
        table.push(vec![
            r.n.into(),
            r.t.into(),
            r.e_plus.into(),
            r.lower_bound.into(),
            r.init_norm.into(),
            r.theorem_rate.into(),
            e.formula.into(),
            e.quadrature.into(),
            e.ratio.into(),
        ]);
    }
    eprintln!(
        "note: {}; lower bound strictly increasing from row {}; initial norm strictly decreasing from row {}; \
         initial energy closed form uses 2n+1, quadrature gives 2n+2",
        result.label,
        describe(result.lower_bound_increasing_from),
        describe(result.init_norm_decreasing_from),
    );
    let json = serde_json::to_value(&result).map_err(|e| CliError::Numerical(e.to_string()))?;
    Ok((Report { table, json: Some(json) }, exit::OK))
}

fn describe(index: Option<usize>) -> String {
    index.map_or_else(|| "none".into(), |i| i.to_string())
}

fn opcheck(a: &OpcheckArgs) -> Outcome {
    let outcomes = run_opcheck(a.seed, a.degree)?;
    let mut table = Table::new(vec!["suite", "cases", "worst", "tolerance", "passed"]);
    for o in &outcomes {
        table.push(vec![o.suite.into(), o.cases.into(), o.worst.into(), o.tolerance.into(), o.passed.into()]);
        if !o.passed {
            eprintln!("FAIL {}: worst residual {:e} exceeds {:e}", o.suite, o.worst, o.tolerance);
        }
    }
    let code = if outcomes.iter().all(|o| o.passed) { exit::OK } else { exit::PROPERTY };
    let json = json!({ "seed": a.seed, "degree": a.degree, "suites": table.to_json() });
    Ok((Report { table, json: Some(json) }, code))
}

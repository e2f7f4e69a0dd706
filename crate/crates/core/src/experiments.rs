//! Growth scans and the ill-posedness table, in double precision.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::decomp::{
    a_power, decompose, decompose_at, energies, integrate_decomposed, DecompState, EnergyReport, ForcingPlacement,
    HarmonicGradient,
};
use crate::error::invalid;
use crate::field::l2_inner;
use crate::linear::{evolve_linearized, seed_amplitude, LinState, ModeSolution};
use crate::{Error, Field, Result};

/// How a perturbation is advanced in time.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Engine {
    /// The closed-form mode solution.
    ClosedForm,
    /// RK4 on the linearized equation for the whole displacement.
    Rk4Weta,
    /// RK4 on the split system with the forcing in the remainder equation.
    Rk4Decomposed,
}

impl Engine {
    pub const ALL: [Engine; 3] = [Engine::ClosedForm, Engine::Rk4Weta, Engine::Rk4Decomposed];

    pub fn name(self) -> &'static str {
        match self {
            Engine::ClosedForm => "closed_form",
            Engine::Rk4Weta => "rk4_weta",
            Engine::Rk4Decomposed => "rk4_decomposed",
        }
    }
}

impl fmt::Display for Engine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Engine {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Engine::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown engine {s:?}")))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScanConfig {
    pub n_list: Vec<u32>,
    pub b: f64,
    pub mu: f64,
    pub t_grid: Vec<f64>,
    pub engine: Engine,
    /// Step size for the RK4 engines.
    pub dt: f64,
}

impl ScanConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_list.is_empty() {
            return invalid("n_list is empty");
        }
        if let Some(n) = self.n_list.iter().find(|&&n| n < 2) {
            return invalid(format!("every n must be at least 2, got {n}"));
        }
        if !(self.b.abs() < 1.0) {
            return invalid(format!("|b| must be below 1, got {}", self.b));
        }
        if !(self.mu >= 0.0) || !self.mu.is_finite() {
            return invalid(format!("mu must be non-negative, got {}", self.mu));
        }
        if self.t_grid.is_empty() || self.t_grid[0] < 0.0 || self.t_grid.windows(2).any(|w| !(w[1] > w[0])) {
            return invalid("t_grid must be non-empty, non-negative and strictly increasing");
        }
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return invalid(format!("dt must be positive, got {}", self.dt));
        }
        Ok(())
    }
}

/// `n` equally spaced times from `0` to `t_end` inclusive.
pub fn uniform_grid(t_end: f64, samples: usize) -> Vec<f64> {
    match samples {
        0 => Vec::new(),
        1 => vec![t_end],
        _ => (0..samples).map(|i| t_end * i as f64 / (samples - 1) as f64).collect(),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScanRow {
    pub n: u32,
    pub t: f64,
    #[serde(rename = "E_plus")]
    pub e_plus: f64,
    pub lower_bound: f64,
    pub init_norm: f64,
    pub fitted_rate: Option<f64>,
    pub theorem_rate: f64,
    pub engine: Engine,
}

/// Exponent in the lower bound `E⁺(t) ≥ E⁺(0) e^{√(1-b²) √n t}`.
pub fn theorem_rate(n: u32, b: f64) -> f64 {
    (1.0 - b * b).sqrt() * (n as f64).sqrt()
}

/// Growth rate of `E⁺` along the closed-form mode, `2√((1-b²)(n-1))`.
pub fn mode_energy_rate(n: u32, b: f64) -> f64 {
    2.0 * ((1.0 - b * b) * (n as f64 - 1.0)).sqrt()
}

/// Initial data `(0, e^{-n^{1/4}} z̄^n)` of the seeded mode.
pub fn seeded_velocity(n: u32) -> Field {
    Field::monomial(0, n, Complex::new(seed_amplitude::<f64>(n), 0.0))
}

/// `‖(y, ẏ)‖_μ` of the seeded data, measured with `A^μ`.
pub fn init_norm(n: u32, mu: f64) -> Result<f64> {
    let hg = HarmonicGradient::from_field(&seeded_velocity(n))?;
    crate::decomp::sobolev_norm(mu, &hg)
}

/// The initial energy by the closed formula with `2n+1` and by exact quadrature.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct InitialEnergy {
    pub n: u32,
    pub mu: f64,
    /// `2π (n-1)^{2μ} e^{-2n^{1/4}} / (2n+1)`
    pub formula: f64,
    /// `‖A^μ e^{-n^{1/4}} z̄^n‖²`, which equals the same expression over `2n+2`.
    pub quadrature: f64,
    /// `formula / quadrature`, exactly `(2n+2)/(2n+1)`.
    pub ratio: f64,
}

pub fn initial_energy(n: u32, mu: f64) -> Result<InitialEnergy> {
    if n < 2 {
        return invalid(format!("n must be at least 2, got {n}"));
    }
    let nf = n as f64;
    let k = seed_amplitude::<f64>(n);
    let formula = 2.0 * PI * (nf - 1.0).powf(2.0 * mu) * k * k / (2.0 * nf + 1.0);
    let hg = HarmonicGradient::from_field(&seeded_velocity(n))?;
    let f = a_power(mu, &hg)?.to_field();
    let quadrature = l2_inner(&f, &f).re;
    Ok(InitialEnergy { n, mu, formula, quadrature, ratio: formula / quadrature })
}

/// `2π (n-1)^{2μ} / (2n+1) · e^{√(1-b²) √n t - 2n^{1/4}}`.
pub fn growth_lower_bound(n: u32, b: f64, mu: f64, t: f64) -> f64 {
    let nf = n as f64;
    2.0 * PI * (nf - 1.0).powf(2.0 * mu) / (2.0 * nf + 1.0) * (theorem_rate(n, b) * t - 2.0 * nf.powf(0.25)).exp()
}

/// Least-squares slope of `ln E` over the last half of the samples.
pub fn fitted_rate(times: &[f64], values: &[f64]) -> Option<f64> {
    let start = times.len() / 2;
    let pts: Vec<(f64, f64)> =
        times[start..].iter().zip(&values[start..]).filter(|(_, v)| **v > 0.0).map(|(t, v)| (*t, v.ln())).collect();
    if pts.len() < 2 {
        return None;
    }
    let m = pts.len() as f64;
    let (st, sy) = pts.iter().fold((0.0, 0.0), |(a, b), (t, y)| (a + t, b + y));
    let (tm, ym) = (st / m, sy / m);
    let (num, den) = pts.iter().fold((0.0, 0.0), |(a, b), (t, y)| (a + (t - tm) * (y - ym), b + (t - tm) * (t - tm)));
    (den > 0.0).then(|| num / den)
}

/// Split states of the seeded mode at each time, advanced by `engine`.
pub fn trajectory(n: u32, b: f64, times: &[f64], engine: Engine, dt: f64) -> Result<Vec<DecompState<f64>>> {
    match engine {
        Engine::ClosedForm => {
            let mode = ModeSolution::new(n, b)?;
            times.iter().map(|&t| decompose_at(&mode.displacement(t), &mode.velocity(t), n, t)).collect()
        }
        Engine::Rk4Weta => {
            let init = LinState::new(Field::zero(), seeded_velocity(n), 0.0);
            evolve_linearized(&init, b, times, dt)?.iter().map(|s| decompose_at(&s.w, &s.w_dot, n, s.t)).collect()
        }
        Engine::Rk4Decomposed => {
            let mut state = decompose(&Field::zero(), &seeded_velocity(n), n)?;
            let mut out = Vec::with_capacity(times.len());
            for &t in times {
                if t > state.t {
                    state =
                        integrate_decomposed(&state, b, t, dt, ForcingPlacement::NEquation)?.pop().expect("nonempty");
                }
                out.push(state.clone());
            }
            Ok(out)
        }
    }
}

/// Energies of the seeded mode at each time, with `σ = μ + 1` and `ν = μ`.
pub fn energy_trajectory(
    n: u32,
    b: f64,
    mu: f64,
    times: &[f64],
    engine: Engine,
    dt: f64,
) -> Result<Vec<EnergyReport<f64>>> {
    trajectory(n, b, times, engine, dt)?.iter().map(|s| energies(s, b, mu, mu + 1.0, mu)).collect()
}

fn scan_one(cfg: &ScanConfig, n: u32) -> Result<Vec<ScanRow>> {
    let reports = energy_trajectory(n, cfg.b, cfg.mu, &cfg.t_grid, cfg.engine, cfg.dt)?;
    let e_plus: Vec<f64> = reports.iter().map(|r| r.e_plus).collect();
    if let Some(r) = reports.iter().find(|r| !r.e_plus.is_finite()) {
        return Err(Error::NonFinite { t: r.t });
    }
    let e0 = initial_energy(n, cfg.mu)?.quadrature;
    let norm = init_norm(n, cfg.mu)?;
    let rate = theorem_rate(n, cfg.b);
    let fit = fitted_rate(&cfg.t_grid, &e_plus);
    Ok(cfg
        .t_grid
        .iter()
        .zip(&e_plus)
        .map(|(&t, &e)| ScanRow {
            n,
            t,
            e_plus: e,
            lower_bound: e0 * (rate * t).exp(),
            init_norm: norm,
            fitted_rate: fit,
            theorem_rate: rate,
            engine: cfg.engine,
        })
        .collect())
}

/// Rows for every `(n, t)` pair, ordered by `n` then `t`.
pub fn growth_scan(cfg: &ScanConfig) -> Result<Vec<ScanRow>> {
    cfg.validate()?;
    let per_n: Vec<Vec<ScanRow>> = cfg.n_list.par_iter().map(|&n| scan_one(cfg, n)).collect::<Result<_>>()?;
    Ok(per_n.into_iter().flatten().collect())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IllposednessTable {
    pub label: &'static str,
    pub t_star: f64,
    pub rows: Vec<ScanRow>,
    /// First index from which the lower bound is strictly increasing.
    pub lower_bound_increasing_from: Option<usize>,
    /// First index from which the initial norm is strictly decreasing, if
    /// that happens over at least two rows.
    pub init_norm_decreasing_from: Option<usize>,
    pub initial_energies: Vec<InitialEnergy>,
}

fn monotone_from(values: &[f64], ordered: impl Fn(f64, f64) -> bool) -> Option<usize> {
    if values.len() < 2 {
        return None;
    }
    let mut start = values.len() - 1;
    while start > 0 && ordered(values[start - 1], values[start]) {
        start -= 1;
    }
    (start < values.len() - 1).then_some(start)
}

/// For each `n`: the closed-form `E⁺(t*)`, the lower bound at `t*`
/// and the size of the initial data.
pub fn illposedness_table(n_list: &[u32], b: f64, mu: f64, t_star: f64) -> Result<IllposednessTable> {
    let cfg = ScanConfig {
        n_list: n_list.to_vec(),
        b,
        mu,
        t_grid: vec![t_star.max(0.0)],
        engine: Engine::ClosedForm,
        dt: 1.0,
    };
    cfg.validate()?;
    if !(t_star >= 0.0) {
        return invalid(format!("t_star must be non-negative, got {t_star}"));
    }
    let rows: Vec<ScanRow> = n_list
        .par_iter()
        .map(|&n| -> Result<ScanRow> {
            let report = energy_trajectory(n, b, mu, &[t_star], Engine::ClosedForm, 1.0)?[0];
            Ok(ScanRow {
                n,
                t: t_star,
                e_plus: report.e_plus,
                lower_bound: growth_lower_bound(n, b, mu, t_star),
                init_norm: init_norm(n, mu)?,
                fitted_rate: None,
                theorem_rate: theorem_rate(n, b),
                engine: Engine::ClosedForm,
            })
        })
        .collect::<Result<_>>()?;
    let bounds: Vec<f64> = rows.iter().map(|r| r.lower_bound).collect();
    let norms: Vec<f64> = rows.iter().map(|r| r.init_norm).collect();
    let initial_energies = n_list.iter().map(|&n| initial_energy(n, mu)).collect::<Result<_>>()?;
    Ok(IllposednessTable {
        label: "linearized lower bound",
        t_star,
        lower_bound_increasing_from: monotone_from(&bounds, |a, b| b > a),
        init_norm_decreasing_from: monotone_from(&norms, |a, b| b < a),
        rows,
        initial_energies,
    })
}

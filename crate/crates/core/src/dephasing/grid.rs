//! Decoherence-factor tables over (ω_c·t, N).

use rayon::prelude::*;

use super::{gamma, BathSpectrum, Channel, ControlParams, Regime};
use crate::error::{invalid, Result};
use crate::format::sig;

pub const CSV_HEADER: &str = "omega_c_t,n_cycles,gamma2,decoherence_factor";

#[derive(Clone, Debug, PartialEq)]
pub struct GridOptions {
    /// Largest ω_c·t on the time axis.
    pub t_max_over_tc: f64,
    /// Number of equally spaced time points in (0, t_max].
    pub t_points: usize,
    pub n_list: Vec<usize>,
}

impl Default for GridOptions {
    fn default() -> Self {
        GridOptions { t_max_over_tc: 10.0, t_points: 20, n_list: vec![1, 2, 5, 10, 20, 30] }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Slicing {
    /// Each point holds ω_c·t fixed and splits it into N cycles (Δt = t/3N).
    FixedTime,
    /// One curve with Δt = t_max/(3·N_max); point N sits at t = 3NΔt.
    FixedInterval,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GridCell {
    pub omega_c_t: f64,
    pub n_cycles: usize,
    pub delta_t: f64,
    /// Controlled Γ₂, or the failure message for this cell.
    pub gamma2: std::result::Result<f64, String>,
    /// Reference Γ′₂ at the same (Δt, N).
    pub gamma2_reference: std::result::Result<f64, String>,
    /// Γ₂ for free evolution over the whole time.
    pub gamma2_free_exact: std::result::Result<f64, String>,
}

impl GridCell {
    pub fn factor(&self) -> Option<f64> {
        self.gamma2.as_ref().ok().map(|g| (-g).exp())
    }

    pub fn reference_factor(&self) -> Option<f64> {
        self.gamma2_reference.as_ref().ok().map(|g| (-g).exp())
    }

    pub fn free_exact_factor(&self) -> Option<f64> {
        self.gamma2_free_exact.as_ref().ok().map(|g| (-g).exp())
    }

    pub fn failed(&self) -> bool {
        self.gamma2.is_err() || self.gamma2_reference.is_err() || self.gamma2_free_exact.is_err()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DecoherenceGrid {
    pub spectrum: BathSpectrum,
    pub options: GridOptions,
    /// Outer loop N ascending, inner loop t ascending.
    pub fixed_time: Vec<GridCell>,
    pub fixed_interval: Vec<GridCell>,
}

/// A point where a curve that should be monotone is not.
#[derive(Clone, Debug, PartialEq)]
pub struct MonotonicityBreak {
    pub omega_c_t: f64,
    pub n_cycles: usize,
    pub previous: f64,
    pub current: f64,
}

pub fn decoherence_grid(spectrum: &BathSpectrum, options: &GridOptions) -> Result<DecoherenceGrid> {
    spectrum.validate()?;
    if !(options.t_max_over_tc.is_finite() && options.t_max_over_tc > 0.0) {
        return invalid("t_max_over_tc must be positive");
    }
    if options.t_points == 0 {
        return invalid("t_points must be at least 1");
    }
    let mut n_list = options.n_list.clone();
    n_list.sort_unstable();
    n_list.dedup();
    if n_list.is_empty() || n_list[0] == 0 {
        return invalid("n_list must hold positive cycle counts");
    }
    let options = GridOptions { n_list, ..options.clone() };

    let t_axis: Vec<f64> = (1..=options.t_points)
        .map(|k| options.t_max_over_tc * k as f64 / options.t_points as f64)
        .collect();
    let mut jobs: Vec<(f64, usize, f64)> = Vec::new();
    for &n in &options.n_list {
        for &t in &t_axis {
            jobs.push((t, n, t / (3.0 * n as f64)));
        }
    }
    let split = jobs.len();
    let n_max = *options.n_list.last().expect("non-empty");
    let dt_fixed = options.t_max_over_tc / (3.0 * n_max as f64);
    for n in 1..=n_max {
        jobs.push((3.0 * n as f64 * dt_fixed, n, dt_fixed));
    }

    let omega_c = spectrum.omega_c;
    let mut cells: Vec<GridCell> = jobs
        .par_iter()
        .map(|&(omega_c_t, n, dt)| evaluate_cell(spectrum, omega_c_t, n, dt / omega_c))
        .collect();
    let fixed_interval = cells.split_off(split);
    Ok(DecoherenceGrid { spectrum: *spectrum, options, fixed_time: cells, fixed_interval })
}

fn evaluate_cell(spectrum: &BathSpectrum, omega_c_t: f64, n: usize, delta_t: f64) -> GridCell {
    let run = |regime: Regime| -> std::result::Result<f64, String> {
        let ctrl = ControlParams::new(delta_t, n).map_err(|e| e.to_string())?;
        gamma(regime, Channel::K2, spectrum, &ctrl).map_err(|e| e.to_string())
    };
    GridCell {
        omega_c_t,
        n_cycles: n,
        delta_t,
        gamma2: run(Regime::Controlled),
        gamma2_reference: run(Regime::Uncontrolled),
        gamma2_free_exact: run(Regime::FreeExact),
    }
}

impl DecoherenceGrid {
    pub fn slice(&self, slicing: Slicing) -> &[GridCell] {
        match slicing {
            Slicing::FixedTime => &self.fixed_time,
            Slicing::FixedInterval => &self.fixed_interval,
        }
    }

    pub fn cell(&self, omega_c_t: f64, n_cycles: usize) -> Option<&GridCell> {
        self.fixed_time
            .iter()
            .find(|c| c.n_cycles == n_cycles && (c.omega_c_t - omega_c_t).abs() < 1e-12 * omega_c_t.max(1.0))
    }

    pub fn t_axis(&self) -> Vec<f64> {
        let n0 = self.options.n_list[0];
        self.fixed_time.iter().filter(|c| c.n_cycles == n0).map(|c| c.omega_c_t).collect()
    }

    pub fn failed_cells(&self) -> usize {
        self.fixed_time.iter().chain(&self.fixed_interval).filter(|c| c.failed()).count()
    }

    /// Places where the controlled factor drops as N grows at fixed t.
    pub fn controlled_breaks_in_n(&self) -> Vec<MonotonicityBreak> {
        let mut out = Vec::new();
        for t in self.t_axis() {
            let mut prev: Option<f64> = None;
            for &n in &self.options.n_list {
                let Some(f) = self.cell(t, n).and_then(GridCell::factor) else { continue };
                if let Some(p) = prev {
                    if f < p {
                        out.push(MonotonicityBreak { omega_c_t: t, n_cycles: n, previous: p, current: f });
                    }
                }
                prev = Some(f);
            }
        }
        out
    }

    /// Places where an uncontrolled factor grows with t at fixed N.
    pub fn uncontrolled_breaks_in_t(&self, regime: Regime) -> Vec<MonotonicityBreak> {
        let mut out = Vec::new();
        for &n in &self.options.n_list {
            let mut prev: Option<f64> = None;
            for c in self.fixed_time.iter().filter(|c| c.n_cycles == n) {
                let value = match regime {
                    Regime::Uncontrolled => c.reference_factor(),
                    Regime::FreeExact => c.free_exact_factor(),
                    Regime::Controlled => c.factor(),
                };
                let Some(f) = value else { continue };
                if let Some(p) = prev {
                    if f > p {
                        out.push(MonotonicityBreak { omega_c_t: c.omega_c_t, n_cycles: n, previous: p, current: f });
                    }
                }
                prev = Some(f);
            }
        }
        out
    }

    /// (N, min, max) of the controlled factor along each N column.
    pub fn summary(&self) -> Vec<(usize, f64, f64)> {
        self.options
            .n_list
            .iter()
            .map(|&n| {
                let vals = self.fixed_time.iter().filter(|c| c.n_cycles == n).filter_map(GridCell::factor);
                let (lo, hi) = vals.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
                (n, lo, hi)
            })
            .collect()
    }

    /// CSV body for one slicing and regime, header included.
    pub fn to_csv(&self, slicing: Slicing, regime: Regime) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for c in self.slice(slicing) {
            let g = match regime {
                Regime::Controlled => &c.gamma2,
                Regime::Uncontrolled => &c.gamma2_reference,
                Regime::FreeExact => &c.gamma2_free_exact,
            };
            let (gs, fs) = match g {
                Ok(g) => (sig(*g, 12), sig((-g).exp(), 12)),
                Err(_) => ("nan".to_string(), "nan".to_string()),
            };
            out.push_str(&format!("{},{},{},{}\n", sig(c.omega_c_t, 12), c.n_cycles, gs, fs));
        }
        out
    }
}

//! Observable statistics: per-cell activation probability, mean density of
//! active cells, finite-time averages, the K = 4 closed forms and the
//! bit-reversal time probe.

use std::fmt;

use crate::bitconfig::CellCount;
use crate::error::{QcaError, Result};
use crate::evolution::{EvolutionOperator, StateVector};

/// `P(k) = Σ_i ξ_i(k) |φ_i|^2`
pub fn active_probability(phi: &StateVector, k: u32) -> Result<f64> {
    let cells = phi.cells();
    if k >= cells.get() {
        return Err(QcaError::CellOutOfRange {
            k,
            cells: cells.get(),
        });
    }
    Ok(phi
        .amplitudes()
        .iter()
        .enumerate()
        .filter(|(i, _)| (i >> k) & 1 == 1)
        .map(|(_, a)| a.norm_sqr())
        .sum())
}

/// `P(k)` for every cell, in one pass over the amplitudes.
pub fn active_profile(phi: &StateVector) -> Vec<f64> {
    let n = phi.cells().get() as usize;
    let mut out = vec![0.0; n];
    for (i, a) in phi.amplitudes().iter().enumerate() {
        let p = a.norm_sqr();
        for (k, slot) in out.iter_mut().enumerate() {
            if (i >> k) & 1 == 1 {
                *slot += p;
            }
        }
    }
    out
}

/// `ρ = (1/K) Σ_k P(k) = Σ_i (#i / K) |φ_i|^2`
pub fn mean_density(phi: &StateVector) -> f64 {
    let k = phi.cells().get() as f64;
    phi.amplitudes()
        .iter()
        .enumerate()
        .map(|(i, a)| i.count_ones() as f64 * a.norm_sqr())
        .sum::<f64>()
        / k
}

/// `ρ(t)` for `t = 0..T-1` with its finite-T mean and population standard
/// deviation.
#[derive(Clone, Debug)]
pub struct DensitySeries {
    pub cells: CellCount,
    pub theta: f64,
    pub initial: String,
    pub samples: Vec<f64>,
    pub mean: f64,
    pub sigma: f64,
}

pub fn mean_and_sigma(samples: &[f64]) -> (f64, f64) {
    if samples.is_empty() {
        return (0.0, 0.0);
    }
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

pub fn density_series(
    op: &EvolutionOperator,
    phi0: StateVector,
    steps: usize,
    initial: impl Into<String>,
) -> Result<DensitySeries> {
    let samples: Vec<f64> = op
        .iter_states(phi0)?
        .take(steps)
        .map(|s| mean_density(&s))
        .collect();
    let (mean, sigma) = mean_and_sigma(&samples);
    Ok(DensitySeries {
        cells: op.cells(),
        theta: op.theta().radians(),
        initial: initial.into(),
        samples,
        mean,
        sigma,
    })
}

/// Initial states with known K = 4 closed forms.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum K4Initial {
    /// All cells inactive.
    Zero,
    /// The table labelled `{0,0,1,1}`. Numerically the table coincides with
    /// the exact averages from `δ_2` (and `δ_13`); `δ_3` itself reproduces the
    /// `Zero` pattern moved onto its `3 ↔ 12` cycle.
    Three,
}

impl K4Initial {
    pub fn label(self) -> usize {
        match self {
            K4Initial::Zero => 0,
            K4Initial::Three => 3,
        }
    }
}

impl fmt::Display for K4Initial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "delta_{}", self.label())
    }
}

fn check_open_interval(theta: f64) -> Result<()> {
    if !(theta > 0.0 && theta < std::f64::consts::FRAC_PI_2) {
        return Err(QcaError::AngleOutOfRange {
            theta,
            range: "(0, pi/2)",
        });
    }
    Ok(())
}

/// Closed-form `⟨|φ_i|^2⟩` for K = 4.
pub fn exact_k4_avg_prob(i: usize, theta: f64, initial: K4Initial) -> Result<f64> {
    check_open_interval(theta)?;
    if i >= 16 {
        return Err(QcaError::IndexOutOfRange {
            index: i as u64,
            cells: 4,
        });
    }
    let c4 = (4.0 * theta).cos();
    let c8 = (8.0 * theta).cos();
    let s4 = (4.0 * theta).sin();
    let s2 = (2.0 * theta).sin();
    let flat = 1.0 / 32.0 + s4 * s4 / 128.0;
    let low = s2.powi(4) / 32.0;
    Ok(match initial {
        K4Initial::Zero => match i {
            0 | 15 => 83.0 / 256.0 + 3.0 / 64.0 * c4 + c8 / 256.0,
            1 | 2 | 4 | 7 | 8 | 11 | 13 | 14 => flat,
            _ => low,
        },
        K4Initial::Three => match i {
            0 | 3 | 5 | 6 | 9 | 10 | 12 | 15 => flat,
            1 | 4 | 11 | 14 => low,
            2 | 13 => 51.0 / 256.0 - c4 / 64.0 + c8 / 256.0,
            _ => 35.0 / 256.0 + 3.0 / 64.0 * c4 + c8 / 256.0,
        },
    })
}

/// Closed-form time-averaged standard deviation of `ρ(t)` for K = 4.
pub fn exact_k4_sigma(theta: f64, initial: K4Initial) -> Result<f64> {
    check_open_interval(theta)?;
    let num = 13.0 + 3.0 * (4.0 * theta).cos();
    Ok(match initial {
        K4Initial::Zero => (num / 128.0).sqrt(),
        K4Initial::Three => (num / 512.0).sqrt(),
    })
}

/// First `t <= limit` at which the all-ones configuration is more likely
/// than the all-zeros one, starting from `δ_0`.
pub fn reversal_time(op: &EvolutionOperator, limit: usize) -> Result<usize> {
    check_open_interval(op.theta().radians())?;
    let cells = op.cells();
    let last = cells.mask();
    for (t, s) in op
        .iter_states(StateVector::basis(cells, 0)?)?
        .enumerate()
        .take(limit + 1)
    {
        let a = s.amplitudes();
        if a[last].norm_sqr() > a[0].norm_sqr() {
            return Ok(t);
        }
    }
    Err(QcaError::NotFound { limit })
}

/// First local maximum of `|φ_{N-1}(t)|^2` from `δ_0`: the step at which the
/// transfer onto the all-ones configuration peaks.
pub fn peak_reversal_time(op: &EvolutionOperator, limit: usize) -> Result<usize> {
    check_open_interval(op.theta().radians())?;
    let cells = op.cells();
    let last = cells.mask();
    let mut prev = f64::NEG_INFINITY;
    for (t, s) in op
        .iter_states(StateVector::basis(cells, 0)?)?
        .enumerate()
        .take(limit + 2)
    {
        let p = s.amplitudes()[last].norm_sqr();
        if p < prev && t > 1 {
            return Ok(t - 1);
        }
        prev = p;
    }
    Err(QcaError::NotFound { limit })
}

/// First `T <= limit` at which the running average of `|φ_{N-1}|^2` over
/// `t = 0..T-1` exceeds that of `|φ_0|^2`, starting from `δ_0`.
pub fn averaged_reversal_time(op: &EvolutionOperator, limit: usize) -> Result<usize> {
    check_open_interval(op.theta().radians())?;
    let cells = op.cells();
    let last = cells.mask();
    let mut surplus = 0.0;
    for (t, s) in op
        .iter_states(StateVector::basis(cells, 0)?)?
        .enumerate()
        .take(limit)
    {
        let a = s.amplitudes();
        surplus += a[last].norm_sqr() - a[0].norm_sqr();
        if surplus > 0.0 {
            return Ok(t + 1);
        }
    }
    Err(QcaError::NotFound { limit })
}

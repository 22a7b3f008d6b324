//! Sensitivity functions and frequency-domain robustness metrics.
//!
//! Every metric here is computed numerically from the transfer functions by
//! grid search, golden-section refinement and bisection. The closed-form
//! expressions for the tuned loop live in [`closed_form`] and are only used
//! to cross-check the numerical path.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::loop_analysis::loop_tf;
use crate::model::{PiController, Plant};
use crate::tf::{ComplexValue, RationalTf};

/// Grid density for the peak search, in points per decade.
const POINTS_PER_DECADE: f64 = 2000.0;
const MIN_GRID_POINTS: usize = 2000;
/// Relative frequency tolerance of the golden-section refinement.
const PEAK_FREQ_TOL: f64 = 1e-10;
const CROSSOVER_TOL: f64 = 1e-12;
const PHASE_WALK_PER_DECADE: f64 = 200.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FreqMetrics {
    pub ms: f64,
    pub mt: f64,
    pub pm_deg: f64,
    pub wgc: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FreqSample {
    pub omega: f64,
    pub value: ComplexValue,
}

/// `S = 1 / (1 + L) = den_L / (num_L + den_L)`.
pub fn sensitivity_tf(l: &RationalTf) -> RationalTf {
    RationalTf::new(l.den().clone(), l.num() + l.den()).expect("1 + L has a nonzero denominator")
}

/// `T = L / (1 + L)`.
pub fn comp_sensitivity_tf(l: &RationalTf) -> RationalTf {
    l.unity_feedback()
}

/// `n` logarithmically spaced frequencies from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>> {
    check_range(lo, hi)?;
    if n < 2 {
        return Err(Error::InvalidParameter {
            name: "points",
            requirement: ">= 2",
            value: n as f64,
        });
    }
    let (a, b) = (lo.ln(), hi.ln());
    let step = (b - a) / (n - 1) as f64;
    let mut grid: Vec<f64> = (0..n).map(|k| (a + step * k as f64).exp()).collect();
    grid[0] = lo;
    grid[n - 1] = hi;
    Ok(grid)
}

/// Maximum of `|g(jω)|` over `[omega_lo, omega_hi]` and where it occurs.
///
/// A dense log grid locates the peak, then golden-section search on `ln ω`
/// refines it between the neighbouring grid points. When the grid maximum
/// sits on an end point, the corresponding limit (`ω → 0` or `ω → ∞`) is
/// taken as a candidate too, reported at that end of the grid.
pub fn magnitude_peak(g: &RationalTf, omega_lo: f64, omega_hi: f64) -> Result<(f64, f64)> {
    check_range(omega_lo, omega_hi)?;
    let decades = (omega_hi / omega_lo).log10();
    let n = MIN_GRID_POINTS.max((POINTS_PER_DECADE * decades).ceil() as usize) + 1;
    let grid = log_grid(omega_lo, omega_hi, n)?;
    let mags = grid
        .iter()
        .map(|&w| g.eval(w).map(|v| v.norm()))
        .collect::<Result<Vec<f64>>>()?;
    let (best, _) = mags
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |(bi, bm), (i, &m)| if m > bm { (i, m) } else { (bi, bm) });

    let a = grid[best.saturating_sub(1)].ln();
    let b = grid[(best + 1).min(n - 1)].ln();
    let mag_at = |x: f64| g.eval(x.exp()).map(|v| v.norm()).unwrap_or(f64::NEG_INFINITY);
    let (x, refined) = golden_section_max(mag_at, a, b, PEAK_FREQ_TOL);
    let (mut peak, mut omega_at) = if refined >= mags[best] {
        (refined, x.exp())
    } else {
        (mags[best], grid[best])
    };

    if best == 0 {
        let den0 = g.den().coeffs()[0];
        if den0 != 0.0 {
            let dc = (g.num().coeffs()[0] / den0).abs();
            if dc >= peak {
                peak = dc;
                omega_at = omega_lo;
            }
        }
    } else if best == n - 1 && !g.num().is_zero() && g.num().degree() == g.den().degree() {
        let high = (g.num().leading() / g.den().leading()).abs();
        if high >= peak {
            peak = high;
            omega_at = omega_hi;
        }
    }
    Ok((peak, omega_at))
}

/// Golden-section search for the maximum of a unimodal `f` on `[a, b]`.
pub fn golden_section_max<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let inv_phi = (5.0f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}

/// Frequency where `|l(jω)|` falls through 1, by bisection on `ln ω`.
pub fn gain_crossover(l: &RationalTf, omega_lo: f64, omega_hi: f64) -> Result<f64> {
    check_range(omega_lo, omega_hi)?;
    let mag = |w: f64| l.eval(w).map(|v| v.norm());
    let (mag_lo, mag_hi) = (mag(omega_lo)?, mag(omega_hi)?);
    if !(mag_lo > 1.0 && mag_hi < 1.0) {
        return Err(Error::NotBracketed {
            lo: omega_lo,
            hi: omega_hi,
            mag_lo,
            mag_hi,
        });
    }
    let (mut a, mut b) = (omega_lo.ln(), omega_hi.ln());
    let mut mid = 0.5 * (a + b);
    for _ in 0..200 {
        mid = 0.5 * (a + b);
        let m = mag(mid.exp())?;
        if (m - 1.0).abs() <= CROSSOVER_TOL {
            break;
        }
        if m > 1.0 {
            a = mid;
        } else {
            b = mid;
        }
        if b - a <= 4.0 * f64::EPSILON * a.abs().max(b.abs()).max(1.0) {
            break;
        }
    }
    Ok(mid.exp())
}

/// Search range spanning three decades either side of the loop's nonzero
/// pole and zero magnitudes.
pub fn default_search_range(l: &RationalTf) -> (f64, f64) {
    let mut mags: Vec<f64> = Vec::new();
    for poly in [l.num(), l.den()] {
        if poly.degree() >= 1 {
            if let Ok(roots) = poly.roots() {
                mags.extend(roots.iter().map(|r| r.norm()).filter(|m| *m > 1e-300));
            }
        }
    }
    if mags.is_empty() {
        return (1e-3, 1e3);
    }
    let lo = mags.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = mags.iter().copied().fold(0.0, f64::max);
    (lo * 1e-3, hi * 1e3)
}

/// Phase of `l(jω)` at each grid frequency in radians, continuous along the
/// grid and anchored to the low-frequency asymptote set by the poles and
/// zeros at the origin (−90° per integrator).
pub fn unwrapped_phase(l: &RationalTf, grid: &[f64]) -> Result<Vec<f64>> {
    check_grid(grid)?;
    let origin_order = |c: &[f64]| c.iter().take_while(|x| **x == 0.0).count();
    let (nc, dc) = (l.num().coeffs(), l.den().coeffs());
    let (zi, pi) = (origin_order(nc), origin_order(dc));
    if zi == nc.len() {
        return Ok(vec![0.0; grid.len()]);
    }
    let sign = if nc[zi] / dc[pi] < 0.0 { PI } else { 0.0 };
    let asymptote = (zi as f64 - pi as f64) * PI / 2.0 + sign;

    // Walk in from well below every corner frequency so the anchor is unambiguous.
    let (range_lo, _) = default_search_range(l);
    let start = range_lo.min(grid[0]);
    let steps = ((grid[0] / start).log10() * PHASE_WALK_PER_DECADE).ceil() as usize;
    let mut phase = nearest_branch(l.eval(start)?.arg(), asymptote);
    for k in 1..=steps {
        let w = start * (grid[0] / start).powf(k as f64 / steps as f64);
        phase = nearest_branch(l.eval(w)?.arg(), phase);
    }
    let mut out = Vec::with_capacity(grid.len());
    for &w in grid {
        phase = nearest_branch(l.eval(w)?.arg(), phase);
        out.push(phase);
    }
    Ok(out)
}

fn nearest_branch(principal: f64, reference: f64) -> f64 {
    principal + 2.0 * PI * ((reference - principal) / (2.0 * PI)).round()
}

/// Phase margin in degrees and the crossover frequency, searching `[omega_lo, omega_hi]`.
pub fn phase_margin_in(l: &RationalTf, omega_lo: f64, omega_hi: f64) -> Result<(f64, f64)> {
    let wgc = gain_crossover(l, omega_lo, omega_hi)?;
    let phase = unwrapped_phase(l, &[wgc])?[0];
    Ok((180.0 + phase.to_degrees(), wgc))
}

/// Phase margin in degrees over [`default_search_range`].
pub fn phase_margin(l: &RationalTf) -> Result<f64> {
    let (lo, hi) = default_search_range(l);
    phase_margin_in(l, lo, hi).map(|(pm, _)| pm)
}

pub fn nyquist_points(g: &RationalTf, omega_grid: &[f64]) -> Result<Vec<FreqSample>> {
    check_grid(omega_grid)?;
    omega_grid
        .iter()
        .map(|&omega| Ok(FreqSample { omega, value: g.eval(omega)? }))
        .collect()
}

/// Frequency range used for the robustness metrics: `[1e-3/t2, 1e3/t2]`.
pub fn analysis_range(plant: &Plant) -> (f64, f64) {
    (1e-3 / plant.t2(), 1e3 / plant.t2())
}

pub fn robustness_report(plant: &Plant, ctrl: &PiController) -> Result<FreqMetrics> {
    let l = loop_tf(plant, ctrl);
    let (lo, hi) = analysis_range(plant);
    let (ms, _) = magnitude_peak(&sensitivity_tf(&l), lo, hi)?;
    let (mt, _) = magnitude_peak(&comp_sensitivity_tf(&l), lo, hi)?;
    let (pm_deg, wgc) = phase_margin_in(&l, lo, hi)?;
    Ok(FreqMetrics { ms, mt, pm_deg, wgc })
}

/// One row of a Bode table for a loop: `|L|`, unwrapped phase of `L`, `|S|`, `|T|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BodeRow {
    pub omega: f64,
    pub mag_l: f64,
    pub phase_l_deg: f64,
    pub mag_s: f64,
    pub mag_t: f64,
}

pub fn bode_rows(l: &RationalTf, grid: &[f64]) -> Result<Vec<BodeRow>> {
    let phases = unwrapped_phase(l, grid)?;
    let (s, t) = (sensitivity_tf(l), comp_sensitivity_tf(l));
    grid.iter()
        .zip(phases)
        .map(|(&omega, phase)| {
            Ok(BodeRow {
                omega,
                mag_l: l.eval(omega)?.norm(),
                phase_l_deg: phase.to_degrees(),
                mag_s: s.eval(omega)?.norm(),
                mag_t: t.eval(omega)?.norm(),
            })
        })
        .collect()
}

/// Closed-form expressions for the tuned loop `L = 1 / (4 t2 s (1 + s t2))`,
/// in terms of the normalized frequency `u = ω t2`.
pub mod closed_form {
    /// `|S(ju/t2)| = 4u sqrt(1 + u²) / (1 + 4u²)`.
    pub fn sensitivity_mag(u: f64) -> f64 {
        4.0 * u * (1.0 + u * u).sqrt() / (1.0 + 4.0 * u * u)
    }

    /// Peak of [`sensitivity_mag`], `2/√3`, reached at `u = 1/√2`.
    pub fn max_sensitivity() -> f64 {
        2.0 / 3.0f64.sqrt()
    }

    /// Positive root of `16u²(1 + u²) = 1`.
    pub fn crossover_u() -> f64 {
        ((5.0f64.sqrt() - 2.0) / 4.0).sqrt()
    }

    /// `90° - atan(u_gc)`.
    pub fn phase_margin_deg() -> f64 {
        90.0 - crossover_u().atan().to_degrees()
    }
}

pub fn closed_form_sensitivity_mag(u: f64) -> f64 {
    closed_form::sensitivity_mag(u)
}

fn check_range(lo: f64, hi: f64) -> Result<()> {
    if lo.is_finite() && hi.is_finite() && lo > 0.0 && hi > lo {
        Ok(())
    } else {
        Err(Error::InvalidRange { lo, hi })
    }
}

fn check_grid(grid: &[f64]) -> Result<()> {
    let ok = !grid.is_empty()
        && grid.iter().all(|w| w.is_finite() && *w > 0.0)
        && grid.windows(2).all(|w| w[1] > w[0]);
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidGrid)
    }
}

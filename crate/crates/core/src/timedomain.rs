//! Step-response simulation and time-domain metrics.

use serde::Serialize;

use crate::error::{positive, Error, Result};
use crate::model::Plant;
use crate::tf::RationalTf;

/// Simulation step used for the reference tables, in seconds.
pub const DEFAULT_DT: f64 = 0.005;
/// Settling band used for the reference tables, as a fraction of the final value.
pub const DEFAULT_BAND: f64 = 0.02;
pub const DEFAULT_MONOTONIC_TOL: f64 = 1e-9;

const UNSTABLE_RE: f64 = 1e-12;

/// Unit-step response sampled at `t = k dt`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepResponse {
    dt: f64,
    samples: Vec<f64>,
}

impl StepResponse {
    pub fn new(dt: f64, samples: Vec<f64>) -> Result<Self> {
        let dt = positive("dt", dt)?;
        if samples.is_empty() || samples.iter().any(|y| !y.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "samples",
                requirement: "nonempty and finite",
                value: f64::NAN,
            });
        }
        Ok(Self { dt, samples })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.samples.len()).map(move |k| k as f64 * self.dt)
    }

    /// Mean of the last 1% of samples (at least one).
    pub fn final_value(&self) -> f64 {
        let n = (self.samples.len() / 100).max(1);
        let tail = &self.samples[self.samples.len() - n..];
        tail.iter().sum::<f64>() / n as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StepMetrics {
    pub ts: f64,
    pub po: f64,
    pub monotonic: bool,
}

/// Controllable-canonical realization of a strictly proper transfer function
/// of order at most 3. State derivative: `x'_i = x_{i+1}`,
/// `x'_n = u - sum a_i x_{i+1}`; output `y = sum b_i x_{i+1}`.
struct Realization {
    den: Vec<f64>,
    num: Vec<f64>,
}

impl Realization {
    fn new(g: &RationalTf) -> Result<Self> {
        let (num, den) = (g.num(), g.den());
        if !g.is_strictly_proper() {
            return Err(Error::NotStrictlyProper {
                num: num.degree(),
                den: den.degree(),
            });
        }
        let n = den.degree();
        if n > 3 {
            return Err(Error::RealizationTooLarge(n));
        }
        let lead = den.leading();
        let mut b: Vec<f64> = num.coeffs().iter().map(|c| c / lead).collect();
        b.resize(n, 0.0);
        Ok(Self {
            den: den.coeffs()[..n].iter().map(|c| c / lead).collect(),
            num: b,
        })
    }

    fn order(&self) -> usize {
        self.den.len()
    }

    fn derivative(&self, x: &[f64], u: f64, dx: &mut [f64]) {
        let n = self.order();
        dx[..n - 1].copy_from_slice(&x[1..n]);
        dx[n - 1] = u - self.den.iter().zip(x).map(|(a, xi)| a * xi).sum::<f64>();
    }

    fn output(&self, x: &[f64]) -> f64 {
        self.num.iter().zip(x).map(|(b, xi)| b * xi).sum()
    }
}

/// Unit-step response of `g` by classical fixed-step RK4, sampled every `dt`
/// from `t = 0` up to `horizon`.
pub fn simulate_step(g: &RationalTf, dt: f64, horizon: f64) -> Result<StepResponse> {
    let dt = positive("dt", dt)?;
    let horizon = positive("horizon", horizon)?;
    if horizon < 10.0 * dt {
        return Err(Error::InvalidParameter {
            name: "horizon",
            requirement: ">= 10 dt",
            value: horizon,
        });
    }
    let sys = Realization::new(g)?;
    if g.den().degree() > 0 {
        if let Some(p) = g.poles()?.iter().find(|p| p.re > UNSTABLE_RE) {
            return Err(Error::UnstableSystem(p.re));
        }
    }

    let steps = (horizon / dt).round() as usize;
    let mut samples = Vec::with_capacity(steps + 1);
    let n = sys.order();
    if n == 0 {
        samples.resize(steps + 1, 0.0);
        return StepResponse::new(dt, samples);
    }

    let mut x = vec![0.0; n];
    let (mut k1, mut k2, mut k3, mut k4) = (vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    let mut tmp = vec![0.0; n];
    let u = 1.0;
    samples.push(sys.output(&x));
    for _ in 0..steps {
        sys.derivative(&x, u, &mut k1);
        for i in 0..n {
            tmp[i] = x[i] + 0.5 * dt * k1[i];
        }
        sys.derivative(&tmp, u, &mut k2);
        for i in 0..n {
            tmp[i] = x[i] + 0.5 * dt * k2[i];
        }
        sys.derivative(&tmp, u, &mut k3);
        for i in 0..n {
            tmp[i] = x[i] + dt * k3[i];
        }
        sys.derivative(&tmp, u, &mut k4);
        for i in 0..n {
            x[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        samples.push(sys.output(&x));
    }
    StepResponse::new(dt, samples)
}

/// Closed-form step response of the tuned loop, `1 - e^{-t/(2 t2)} (1 + t/(2 t2))`.
pub fn analytic_step_tuned(t2: f64, t: f64) -> f64 {
    let tau = t / (2.0 * t2);
    1.0 - (-tau).exp() * (1.0 + tau)
}

/// Simulation horizon long enough for any tuned plant to settle.
pub fn default_horizon(plant: &Plant) -> f64 {
    30.0 * plant.t1().max(2.0 * plant.t2())
}

/// First grid time after which every sample stays within `band` of the final value.
pub fn settling_time(r: &StepResponse, band: f64) -> Result<f64> {
    check_band(band)?;
    let y_final = r.final_value();
    let not_settled = Error::NotSettled {
        band,
        final_value: y_final,
    };
    if (y_final - 1.0).abs() > band {
        return Err(not_settled);
    }
    let limit = band * y_final.abs();
    let samples = r.samples();
    match samples.iter().rposition(|y| (y - y_final).abs() > limit) {
        None => Ok(0.0),
        Some(last) if last + 1 == samples.len() => Err(not_settled),
        Some(last) => Ok((last + 1) as f64 * r.dt()),
    }
}

/// Overshoot above the final value, in percent; zero when the peak does not exceed it.
pub fn percent_overshoot(r: &StepResponse) -> f64 {
    let y_final = r.final_value();
    let peak = r.samples().iter().copied().fold(f64::NEG_INFINITY, f64::max);
    ((peak - y_final) / y_final).max(0.0) * 100.0
}

/// True when no sample drops more than `tol` below its predecessor.
pub fn is_monotonic(r: &StepResponse, tol: f64) -> bool {
    r.samples().windows(2).all(|w| w[1] >= w[0] - tol)
}

pub fn step_metrics(r: &StepResponse, band: f64) -> Result<StepMetrics> {
    Ok(StepMetrics {
        ts: settling_time(r, band)?,
        po: percent_overshoot(r),
        monotonic: is_monotonic(r, DEFAULT_MONOTONIC_TOL),
    })
}

/// Normalized settling time `tau*` solving `e^{-tau}(1 + tau) = band`.
/// The tuned loop settles at `2 t2 tau*`.
pub fn settling_constant(band: f64) -> Result<f64> {
    check_band(band)?;
    let f = |tau: f64| (-tau).exp() * (1.0 + tau) - band;
    let (mut lo, mut hi) = (0.0f64, 100.0f64);
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

fn check_band(band: f64) -> Result<()> {
    if band > 0.0 && band < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name: "band",
            requirement: "in (0, 1)",
            value: band,
        })
    }
}

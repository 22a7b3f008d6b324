//! Loop and closed-loop assembly, closed-loop poles, and the coefficient/root
//! consistency checks that expose the pole-zero cancellation.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::Result;
use crate::model::{PiController, Plant};
use crate::tf::{ComplexValue, Polynomial, RationalTf};

/// A closed-loop pole within this relative distance of `-1/ti` counts as cancelled.
pub const CANCELLATION_REL_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClosedLoopReport {
    pub char_poly: Polynomial,
    /// All three roots of `char_poly`, sorted by descending real part.
    pub poles: Vec<ComplexValue>,
    pub cancellation_detected: bool,
    /// Absolute residuals of the sum, pairwise-product sum and product of the poles.
    pub vieta_residuals: [f64; 3],
}

/// Monic closed-loop characteristic polynomial
/// `s^3 + (1/t1 + 1/t2) s^2 + (1 + k kp)/(t1 t2) s + k kp/(t1 t2 ti)`.
pub fn characteristic_poly(plant: &Plant, ctrl: &PiController) -> Polynomial {
    let (t1, t2) = (plant.t1(), plant.t2());
    let gain = ctrl.k() * plant.kp();
    Polynomial::new(vec![
        gain / (t1 * t2 * ctrl.ti()),
        (1.0 + gain) / (t1 * t2),
        1.0 / t1 + 1.0 / t2,
        1.0,
    ])
}

/// `C(s) P(s)` without any simplification.
pub fn loop_tf(plant: &Plant, ctrl: &PiController) -> RationalTf {
    ctrl.transfer_function().series(&plant.transfer_function())
}

/// Unity-feedback closed loop `C P / (1 + C P)`, third order and unreduced.
pub fn closed_loop(plant: &Plant, ctrl: &PiController) -> RationalTf {
    loop_tf(plant, ctrl).unity_feedback()
}

/// The closed loop with the controller zero cancelled against the slow pole.
/// Fails with `NoCommonFactor` unless `ti` actually sits on that pole.
pub fn reduced_closed_loop(plant: &Plant, ctrl: &PiController) -> Result<RationalTf> {
    closed_loop(plant, ctrl).cancel_common_root(-1.0 / ctrl.ti(), CANCELLATION_REL_TOL)
}

pub fn analyze_closed_loop(plant: &Plant, ctrl: &PiController) -> Result<ClosedLoopReport> {
    let char_poly = characteristic_poly(plant, ctrl);
    let poles = char_poly.roots()?;

    let (t1, t2, ti) = (plant.t1(), plant.t2(), ctrl.ti());
    let gain = ctrl.k() * plant.kp();
    let sum: Complex64 = poles.iter().sum();
    let pairs = poles[0] * poles[1] + poles[0] * poles[2] + poles[1] * poles[2];
    let product: Complex64 = poles.iter().product();
    let vieta_residuals = [
        (sum + (1.0 / t1 + 1.0 / t2)).norm(),
        (pairs - (1.0 + gain) / (t1 * t2)).norm(),
        (product + gain / (t1 * t2 * ti)).norm(),
    ];

    let zero = -1.0 / ti;
    let cancellation_detected = poles
        .iter()
        .any(|p| (p - zero).norm() <= CANCELLATION_REL_TOL * zero.abs());

    Ok(ClosedLoopReport {
        char_poly,
        poles,
        cancellation_detected,
        vieta_residuals,
    })
}

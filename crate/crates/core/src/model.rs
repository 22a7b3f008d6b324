//! Plant and controller types and the closed-form tuning rule.

use serde::{Deserialize, Serialize};

use crate::error::{positive, Error, Result};
use crate::tf::{Polynomial, RationalTf};

/// Relative tolerance for `ti == t1` when the reduced second-order model is required.
const CANCELLATION_TOL: f64 = 1e-12;

/// Stable second-order plant `kp / ((1 + s t1)(1 + s t2))` with `t1 >= t2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Plant {
    kp: f64,
    t1: f64,
    t2: f64,
}

impl Plant {
    /// Validates all three parameters and orders the time constants so the
    /// slow one is `t1`.
    pub fn new(kp: f64, t1: f64, t2: f64) -> Result<Self> {
        let kp = positive("kp", kp)?;
        let t1 = positive("t1", t1)?;
        let t2 = positive("t2", t2)?;
        let (t1, t2) = if t1 >= t2 { (t1, t2) } else { (t2, t1) };
        Ok(Self { kp, t1, t2 })
    }

    pub fn kp(&self) -> f64 {
        self.kp
    }

    pub fn t1(&self) -> f64 {
        self.t1
    }

    pub fn t2(&self) -> f64 {
        self.t2
    }

    /// `kp / (t1 t2 s^2 + (t1 + t2) s + 1)`.
    pub fn transfer_function(&self) -> RationalTf {
        RationalTf::new(
            Polynomial::constant(self.kp),
            Polynomial::new(vec![1.0, self.t1 + self.t2, self.t1 * self.t2]),
        )
        .expect("plant denominator has a unit constant term")
    }
}

/// PI controller `k (1 + 1/(s ti))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PiController {
    k: f64,
    ti: f64,
}

impl PiController {
    pub fn new(k: f64, ti: f64) -> Result<Self> {
        Ok(Self {
            k: positive("k", k)?,
            ti: positive("ti", ti)?,
        })
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn ti(&self) -> f64 {
        self.ti
    }

    /// `k (1 + s ti) / (s ti)`.
    pub fn transfer_function(&self) -> RationalTf {
        RationalTf::new(
            Polynomial::new(vec![self.k, self.k * self.ti]),
            Polynomial::new(vec![0.0, self.ti]),
        )
        .expect("ti > 0")
    }

    pub fn with_gain(&self, k: f64) -> Result<Self> {
        Self::new(k, self.ti)
    }
}

/// Damping ratio and natural frequency of the reduced second-order loop.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SecondOrderParams {
    pub zeta: f64,
    pub wn: f64,
}

/// Critically damped tuning: the integral time cancels the slow plant pole and
/// the gain puts both remaining closed-loop poles at `-1/(2 t2)`.
pub fn tune_pi(plant: &Plant) -> PiController {
    PiController {
        k: plant.t1 / (4.0 * plant.kp * plant.t2),
        ti: plant.t1,
    }
}

/// Damping ratio and natural frequency of `k kp / (t1 t2 s^2 + t1 s + k kp)`,
/// the closed loop left after `ti` cancels the slow pole.
pub fn damping_params(plant: &Plant, ctrl: &PiController) -> Result<SecondOrderParams> {
    if (ctrl.ti - plant.t1).abs() > CANCELLATION_TOL * plant.t1 {
        return Err(Error::CancellationRequired {
            ti: ctrl.ti,
            t1: plant.t1,
        });
    }
    let gain = ctrl.k * plant.kp;
    Ok(SecondOrderParams {
        zeta: (plant.t1 * plant.t2).sqrt() / (2.0 * plant.t2 * gain.sqrt()),
        wn: (gain / (plant.t1 * plant.t2)).sqrt(),
    })
}

pub fn plant_tf(plant: &Plant) -> RationalTf {
    plant.transfer_function()
}

pub fn controller_tf(ctrl: &PiController) -> RationalTf {
    ctrl.transfer_function()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn tuning_matches_table_rows() {
        let c = tune_pi(&Plant::new(1.0, 1.0, 0.5).unwrap());
        assert_eq!((c.k(), c.ti()), (0.5, 1.0));
        let c = tune_pi(&Plant::new(1.0, 0.5, 0.1).unwrap());
        assert!((c.k() - 1.25).abs() < 1e-12);
        assert_eq!(c.ti(), 0.5);
        let c = tune_pi(&Plant::new(2.0, 4.0, 1.0).unwrap());
        assert_eq!((c.k(), c.ti()), (0.5, 4.0));
    }

    #[test]
    fn plant_orders_time_constants() {
        let p = Plant::new(1.0, 0.1, 0.5).unwrap();
        assert_eq!((p.t1(), p.t2()), (0.5, 0.1));
        let p = Plant::new(1.0, 0.3, 0.3).unwrap();
        assert_eq!((p.t1(), p.t2()), (0.3, 0.3));
        assert!((tune_pi(&p).k() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn invalid_parameters() {
        let err = Plant::new(1.0, 1.0, 0.0).unwrap_err();
        assert!(err.to_string().starts_with("t2 must be > 0"));
        assert!(Plant::new(-1.0, 1.0, 0.5).is_err());
        assert!(Plant::new(1.0, f64::NAN, 0.5).is_err());
        assert!(Plant::new(1.0, f64::INFINITY, 0.5).is_err());
        assert!(PiController::new(0.0, 1.0).is_err());
        assert!(PiController::new(1.0, -2.0).is_err());
    }

    #[test]
    fn damping_examples() {
        let plant = Plant::new(1.0, 1.0, 0.5).unwrap();
        let d = damping_params(&plant, &tune_pi(&plant)).unwrap();
        assert!((d.zeta - 1.0).abs() < 1e-15);
        assert!((d.wn - 1.0).abs() < 1e-15);

        let d = damping_params(&plant, &PiController::new(1.0, 1.0).unwrap()).unwrap();
        assert!((d.zeta - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);

        for t in [0.01, 0.7, 3.0, 250.0] {
            let plant = Plant::new(1.7, t, t).unwrap();
            let d = damping_params(&plant, &tune_pi(&plant)).unwrap();
            assert!((d.zeta - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn damping_requires_cancellation() {
        let plant = Plant::new(1.0, 1.0, 0.5).unwrap();
        let err = damping_params(&plant, &PiController::new(0.5, 2.0).unwrap()).unwrap_err();
        assert!(matches!(err, Error::CancellationRequired { .. }));
    }

    #[test]
    fn plant_tf_examples() {
        let g = plant_tf(&Plant::new(1.0, 1.0, 0.5).unwrap());
        assert_eq!(g.num().coeffs(), &[1.0]);
        assert_eq!(g.den().coeffs(), &[1.0, 1.5, 0.5]);

        let g = plant_tf(&Plant::new(3.0, 0.4, 0.4).unwrap());
        let expected = &Polynomial::new(vec![1.0, 0.4]) * &Polynomial::new(vec![1.0, 0.4]);
        assert_eq!(g.den(), &expected);
        assert_eq!(g.eval(0.0).unwrap().re, 3.0);
    }

    #[test]
    fn controller_tf_examples() {
        let c = controller_tf(&PiController::new(0.5, 1.0).unwrap());
        assert_eq!(c.num().coeffs(), &[0.5, 0.5]);
        assert_eq!(c.den().coeffs(), &[0.0, 1.0]);

        let c = controller_tf(&PiController::new(1.0, 1.0).unwrap());
        assert_eq!(c.num().coeffs(), &[1.0, 1.0]);

        let zeros = controller_tf(&PiController::new(1.25, 0.5).unwrap()).zeros().unwrap();
        assert_eq!(zeros.len(), 1);
        assert!((zeros[0].re + 2.0).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn tuned_loop_is_critically_damped(
            kp in 0.1f64..10.0, t2 in 0.01f64..10.0, ratio in 1.0f64..100.0
        ) {
            let plant = Plant::new(kp, ratio * t2, t2).unwrap();
            let d = damping_params(&plant, &tune_pi(&plant)).unwrap();
            prop_assert!((d.zeta - 1.0).abs() <= 1e-12);
            let wn = 1.0 / (2.0 * plant.t2());
            prop_assert!((d.wn - wn).abs() <= 1e-12 * wn);
        }

        #[test]
        fn tuning_scales_inversely_with_gain(
            kp in 0.1f64..10.0, t1 in 0.01f64..10.0, t2 in 0.01f64..10.0, c in 0.1f64..10.0
        ) {
            let a = tune_pi(&Plant::new(kp, t1, t2).unwrap());
            let b = tune_pi(&Plant::new(c * kp, t1, t2).unwrap());
            prop_assert!((b.k() - a.k() / c).abs() <= 1e-12 * a.k() / c);
            prop_assert_eq!(a.ti(), b.ti());
        }

        #[test]
        fn plant_poles_are_reciprocal_time_constants(
            kp in 0.1f64..10.0, t1 in 0.01f64..10.0, t2 in 0.01f64..10.0
        ) {
            let plant = Plant::new(kp, t1, t2).unwrap();
            let mut poles: Vec<f64> = plant_tf(&plant).poles().unwrap().iter().map(|p| p.re).collect();
            poles.sort_by(f64::total_cmp);
            let slow = -1.0 / plant.t1();
            let fast = -1.0 / plant.t2();
            prop_assert!((poles[0] - fast).abs() <= 1e-9 * fast.abs());
            prop_assert!((poles[1] - slow).abs() <= 1e-9 * slow.abs());
        }
    }
}

//! Reference plants and their published controller, pole and performance values.

use crate::model::Plant;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceCase {
    pub id: usize,
    pub label: &'static str,
    pub kp: f64,
    pub t1: f64,
    pub t2: f64,
    pub k: f64,
    pub ti: f64,
    /// Slow closed-loop pole, `-1/t1`.
    pub p1: f64,
    /// Repeated closed-loop pole, `-1/(2 t2)`.
    pub p23: f64,
    /// Settling time at dt = 0.005 s with a 2% band.
    pub ts: f64,
    pub po: f64,
    pub mt: f64,
    pub ms: f64,
    pub pm_deg: f64,
}

impl ReferenceCase {
    pub fn plant(&self) -> Plant {
        Plant::new(self.kp, self.t1, self.t2).expect("reference plants are valid")
    }
}

#[allow(clippy::too_many_arguments)]
const fn case(id: usize, label: &'static str, t1: f64, t2: f64, k: f64, p1: f64, p23: f64, ts: f64) -> ReferenceCase {
    ReferenceCase {
        id,
        label,
        kp: 1.0,
        t1,
        t2,
        k,
        ti: t1,
        p1,
        p23,
        ts,
        po: 0.0,
        mt: 1.0,
        ms: 1.155,
        pm_deg: 76.35,
    }
}

/// The six benchmark plants. Row 2 uses `t2 = 1/3` exactly, matching its
/// transfer function `1/((1+s)(1+s/3))`.
pub const CASES: [ReferenceCase; 6] = [
    case(1, "1/((1+s)(1+0.5s))", 1.0, 0.5, 0.50, -1.0, -1.00, 5.835),
    case(2, "1/((1+s)(1+s/3))", 1.0, 1.0 / 3.0, 0.75, -1.0, -1.50, 3.890),
    case(3, "1/((1+s)(1+0.2s))", 1.0, 0.2, 1.25, -1.0, -2.50, 2.335),
    case(4, "1/((1+s)(1+0.1s))", 1.0, 0.1, 2.50, -1.0, -5.00, 1.170),
    case(5, "1/((1+s)(1+0.05s))", 1.0, 0.05, 5.00, -1.0, -10.00, 0.585),
    case(6, "1/((1+0.5s)(1+0.1s))", 0.5, 0.1, 1.25, -2.0, -5.00, 1.170),
];

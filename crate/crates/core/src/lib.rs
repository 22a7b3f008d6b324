//! Closed-form PI tuning for stable second-order plants `kp / ((1 + s t1)(1 + s t2))`.
//!
//! The tuning `K = t1 / (4 kp t2)`, `Ti = t1` cancels the slow plant pole with
//! the controller zero and places the remaining two closed-loop poles at
//! `-1/(2 t2)`. The result is the fastest step response that never overshoots,
//! with robustness margins that do not depend on the plant:
//! `Mt = 1`, `Ms = 2/√3` and a phase margin of about 76.35°.
//!
//! ```
//! use pitune::{tune_pi, Plant};
//!
//! let plant = Plant::new(1.0, 1.0, 0.5).unwrap();
//! let ctrl = tune_pi(&plant);
//! assert_eq!((ctrl.k(), ctrl.ti()), (0.5, 1.0));
//! ```

pub mod cli;
pub mod error;
pub mod freqdomain;
pub mod loop_analysis;
pub mod model;
pub mod reference;
pub mod tf;
pub mod timedomain;
pub mod verify;

pub use error::{Error, Result};
pub use freqdomain::{robustness_report, FreqMetrics};
pub use loop_analysis::{analyze_closed_loop, closed_loop, loop_tf, ClosedLoopReport};
pub use model::{damping_params, tune_pi, PiController, Plant, SecondOrderParams};
pub use tf::{ComplexValue, Polynomial, RationalTf};
pub use timedomain::{simulate_step, StepMetrics, StepResponse};

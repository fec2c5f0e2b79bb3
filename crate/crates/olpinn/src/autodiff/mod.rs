//! Scalar reverse-mode automatic differentiation.
//!
//! Gradients with respect to network parameters come from a single reverse
//! sweep over an `f64` tape. First and second derivatives with respect to
//! network inputs (needed by PDE residuals such as u_xx) come from the same
//! machinery instantiated over dual numbers.

mod dual;
mod scalar;
mod tape;

pub use dual::Dual;
pub use scalar::Scalar;
pub use tape::{input_derivative, record, DerivOrder, NodeId, Tape};

/// Counters used by efficiency assertions: every evaluation of a network's
/// input derivatives at a point increments the derivative-evaluation count,
/// whether it runs through the tape or the batched trainer.
pub mod counters {
    use std::sync::atomic::{AtomicU64, Ordering};

    static DERIV_EVALS: AtomicU64 = AtomicU64::new(0);

    pub fn count_derivative_evals(n: u64) {
        DERIV_EVALS.fetch_add(n, Ordering::Relaxed);
    }

    pub fn derivative_evals() -> u64 {
        DERIV_EVALS.load(Ordering::Relaxed)
    }

    pub fn reset_derivative_evals() {
        DERIV_EVALS.store(0, Ordering::Relaxed);
    }
}

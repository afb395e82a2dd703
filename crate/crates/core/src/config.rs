//! Tolerance bands and solver knobs.
//!
//! Every check in the crate is relative: an absolute threshold is obtained by
//! scaling with the spectral norm of the matrix under test. Three bands are
//! distinguished:
//!
//! * `psd` — positivity and conditioning floors (matrix inverses, square
//!   roots, Heisenberg checks),
//! * `alg` — residuals of algebraic identities (Williamson round trips,
//!   mean identities, symplectic invariance),
//! * `verdict` — decision margins; anything closer to a boundary than this
//!   band is reported as inconclusive rather than guessed.

use crate::scalar::{lit, Scalar};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances<T: Scalar> {
    /// Relative positivity/conditioning floor. Default `1e-9`.
    pub psd: T,
    /// Relative band for algebraic identity residuals. Default `1e-8`.
    pub alg: T,
    /// Relative band for verdict margins. Default `1e-7`.
    pub verdict: T,
}

impl<T: Scalar> Default for Tolerances<T> {
    fn default() -> Self {
        Tolerances {
            psd: lit(1e-9),
            alg: lit(1e-8),
            verdict: lit(1e-7),
        }
    }
}

impl<T: Scalar> Tolerances<T> {
    pub fn with_psd(mut self, psd: T) -> Self {
        self.psd = psd;
        self
    }

    pub fn with_alg(mut self, alg: T) -> Self {
        self.alg = alg;
        self
    }

    pub fn with_verdict(mut self, verdict: T) -> Self {
        self.verdict = verdict;
        self
    }
}

/// Configuration of the feasibility engine behind the general separability
/// decision.
#[derive(Debug, Clone, Copy)]
pub struct SolverConfig<T: Scalar> {
    /// Projection-iteration cap per bisection level. Default `5000`.
    pub max_iterations: usize,
    /// Cap on the number of feasibility levels probed. Default `40`.
    pub bisection_depth: usize,
    /// Regularization added to `V_B - i\u{3a9}_B` before inversion. `None`
    /// means start at zero and escalate only on conditioning failures.
    pub epsilon: Option<T>,
    pub tol: Tolerances<T>,
}

impl<T: Scalar> Default for SolverConfig<T> {
    fn default() -> Self {
        SolverConfig {
            max_iterations: 5_000,
            bisection_depth: 40,
            epsilon: None,
            tol: Tolerances::default(),
        }
    }
}

impl<T: Scalar> SolverConfig<T> {
    pub fn with_tol(mut self, tol: Tolerances<T>) -> Self {
        self.tol = tol;
        self
    }
}

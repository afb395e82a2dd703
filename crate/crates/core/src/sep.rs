//! Separability decisions with constructive certificates.
//!
//! The criterion: an `m + n`-mode QCM is separable iff there is a real
//! symmetric `gamma_A` with `i Omega_A <= gamma_A <= N` where
//! `N = V_A - X (V_B - i Omega_B)^{-1} X^T`. For `m = 1` the interval
//! feasibility question is settled in closed form (a 2x2 Hermitian interval
//! contains a real point iff `M <= N, N*`); in general it is decided by a
//! feasibility-margin formulation: maximize `t` with
//! `gamma_A - i Omega_A >= t` and `N - gamma_A >= t` over real symmetric
//! (block-diagonal, in the multipartite case) `gamma_A`, solved by cyclic
//! Dykstra projections in the realified space with a bisection wrapper on
//! `t`.
//!
//! Verdicts are never guessed at the boundary: a margin smaller than the
//! verdict band is reported as inconclusive.

use nalgebra::DMatrix;

use crate::analysis::{schur_complement, BlockPartition};
use crate::config::{SolverConfig, Tolerances};
use crate::error::{Error, Result};
use crate::linalg::{
    fro_norm, max_abs_entry, min_eig_sym, neg_part, psd_part, spectral_norm_sym, sym_eigen,
    symmetrize, Herm,
};
use crate::scalar::{lit, Scalar};
use crate::symplectic::{direct_sum_mat, is_ppt, is_qcm, CoordOrdering, ModeLayout, Qcm};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Separable,
    Entangled,
    Inconclusive,
}

/// Which decision path produced a certificate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Route {
    OneVsN,
    General,
    PtInvariant,
    MonoSymmetric,
    Isotropic,
    Multipartite,
    Trivial,
}

impl Route {
    pub fn as_str(&self) -> &'static str {
        match self {
            Route::OneVsN => "one_vs_n",
            Route::General => "general",
            Route::PtInvariant => "pt_invariant",
            Route::MonoSymmetric => "mono_symmetric",
            Route::Isotropic => "isotropic",
            Route::Multipartite => "multipartite",
            Route::Trivial => "trivial",
        }
    }
}

/// Self-contained separating functional certifying interval infeasibility.
///
/// `v1 <= 0`, `v2 >= 0` are realified symmetric matrices with
/// `<v1, l1> + <v2, u2> + ||P_sub(v1 + v2)||_F * B_G < 0`, where `l1, u2`
/// are the constraint shifts at `level` (rebuilt from the state and `eps`)
/// and `B_G` bounds the Frobenius norm of any feasible point.
#[derive(Debug, Clone)]
pub struct DualFunctional<T: Scalar> {
    pub v1: DMatrix<T>,
    pub v2: DMatrix<T>,
    pub level: T,
    /// Regularization used when the upper bound was formed.
    pub eps: T,
}

#[derive(Debug, Clone)]
pub enum Witness<T: Scalar> {
    /// Marginal QCMs, one per group, in party-local mode-wise coordinates;
    /// `V >= gamma_1 (+) ... (+) gamma_k`.
    Product { gammas: Vec<DMatrix<T>> },
    /// Smallest symplectic eigenvalue of the partial transpose (< 1).
    /// `cut` names the violating group for multipartite inputs.
    PptViolation { min_symplectic_eig: T, cut: Option<usize> },
    /// Solver separating-functional certificate of interval infeasibility
    /// (candidate bound entanglement; PPT holds).
    DualInfeasibility {
        value: T,
        functional: Box<DualFunctional<T>>,
    },
    /// Verified feasibility-margin bracket (inconclusive verdicts).
    Margin { lower: T, upper: T },
}

#[derive(Debug, Clone)]
pub struct SeparabilityCert<T: Scalar> {
    pub verdict: Verdict,
    pub witness: Witness<T>,
    pub route: Route,
    /// Mode counts per group (two entries for bipartite splits).
    pub groups: Vec<usize>,
    /// Best verified feasibility slack, in units of `||V||`.
    pub margin: Option<T>,
    /// Set on entangled verdicts: PPT violation implies distillability,
    /// solver-route entanglement is bound (non-distillable).
    pub distillable: Option<bool>,
}

/// Result of re-checking a product witness independently of any solver.
#[derive(Debug, Clone)]
pub struct WitnessCheck<T: Scalar> {
    pub ok: bool,
    /// `min eig(V - (+)_i gamma_i)`, to be compared with `-tol.verdict*||V||`.
    pub min_eig: T,
    pub gammas_valid: Vec<bool>,
}

/// Validate `V >= gamma_1 (+) ... (+) gamma_k` and that every block is a
/// QCM. `groups` are mode counts; `v` and the blocks must be mode-wise.
pub fn validate_product_witness<T: Scalar>(
    v: &Qcm<T>,
    gammas: &[DMatrix<T>],
    groups: &[usize],
    tol: &Tolerances<T>,
) -> Result<WitnessCheck<T>> {
    let v = v.to_ordering(CoordOrdering::ModeWise);
    if gammas.len() != groups.len() {
        return Err(Error::DimensionMismatch {
            expected: groups.len(),
            got: gammas.len(),
        });
    }
    let mut stacked: Option<DMatrix<T>> = None;
    let mut gammas_valid = Vec::with_capacity(gammas.len());
    for (g, &modes) in gammas.iter().zip(groups) {
        if g.nrows() != 2 * modes {
            return Err(Error::DimensionMismatch {
                expected: 2 * modes,
                got: g.nrows(),
            });
        }
        let layout = ModeLayout::single(modes, CoordOrdering::ModeWise)?;
        gammas_valid.push(is_qcm(g, &layout, tol)?.valid);
        stacked = Some(match stacked {
            None => g.clone(),
            Some(acc) => direct_sum_mat(&acc, g),
        });
    }
    let stacked = stacked.ok_or_else(|| Error::domain("no witness blocks"))?;
    if stacked.nrows() != v.dim() {
        return Err(Error::DimensionMismatch {
            expected: v.dim(),
            got: stacked.nrows(),
        });
    }
    let min_eig = min_eig_sym(&(v.mat() - &stacked));
    let ok = gammas_valid.iter().all(|&b| b) && min_eig >= -tol.verdict * v.scale();
    Ok(WitnessCheck {
        ok,
        min_eig,
        gammas_valid,
    })
}

/// `N = V_A - X (V_B + eps - i Omega_B)^{-1} X^T` as a Hermitian matrix.
///
/// A singular `V_B - i Omega_B` with `eps = 0` is a conditioning error; the
/// caller is expected to retry with a positive `eps`.
pub fn upper_bound<T: Scalar>(v: &Qcm<T>, eps: T, tol: &Tolerances<T>) -> Result<Herm<T>> {
    let v = v.to_ordering(CoordOrdering::ModeWise);
    let layout = *v.layout();
    let va = v.block_a();
    if layout.n == 0 {
        return Ok(Herm::from_real(va));
    }
    let x = v.block_x();
    if max_abs_entry(&x) == T::zero() {
        return Ok(Herm::from_real(va));
    }
    let mut vb = v.block_b();
    for i in 0..vb.nrows() {
        vb[(i, i)] += eps;
    }
    let omega_b: DMatrix<T> = layout.omega_b();
    let w = Herm::new(vb, -omega_b);
    let r = w.realify();
    let w_scale = spectral_norm_sym(&r);
    let w_min = min_eig_sym(&r);
    if w_min < tol.psd * w_scale {
        return Err(Error::Conditioning {
            what: "upper_bound: V_B - i Omega_B is singular within the psd band",
            min_eig: w_min.to_f64().unwrap_or(f64::NAN),
        });
    }
    let w_inv = w.inverse(T::zero(), "upper_bound inverse")?;
    Ok(Herm::from_real(va).sub(&w_inv.congruence(&x)))
}

/// [`upper_bound`] with the escalation ladder `eps = psd*||V||, x10, x10`.
pub(crate) fn upper_bound_with_retries<T: Scalar>(
    v: &Qcm<T>,
    cfg: &SolverConfig<T>,
) -> Result<(Herm<T>, T)> {
    let tol = &cfg.tol;
    let scale = v.scale();
    let mut eps = cfg.epsilon.unwrap_or_else(T::zero);
    let mut last: Option<Error> = None;
    for _ in 0..4 {
        match upper_bound(v, eps, tol) {
            Ok(n) => return Ok((n, eps)),
            Err(e @ Error::Conditioning { .. }) => {
                last = Some(e);
                eps = if eps == T::zero() {
                    tol.psd * scale.max(T::one())
                } else {
                    eps * lit(10.0)
                };
            }
            Err(e) => return Err(e),
        }
    }
    Err(last.expect("retries exhausted"))
}

/// Hermitian interval `[lower, upper]` in the Loewner order.
#[derive(Debug, Clone)]
pub struct MatrixInterval<T: Scalar> {
    pub lower: Herm<T>,
    pub upper: Herm<T>,
}

#[derive(Debug, Clone)]
pub enum IntervalFeasibility<T: Scalar> {
    /// Real symmetric `R` with `M <= R <= N`.
    Feasible { witness: DMatrix<T> },
    /// Most negative eigenvalue among `N - M` and `N* - M`.
    Infeasible { min_eig: T },
}

/// Closed-form real-interval feasibility for 2x2 Hermitian `M <= R <= N`:
/// feasible iff `M <= N` and `M <= N*`; the witness is the convex
/// combination `R = p M + (1-p) N` whose off-diagonal imaginary part
/// cancels.
pub fn interval_feasibility_2x2<T: Scalar>(
    m: &Herm<T>,
    n: &Herm<T>,
    tol: &Tolerances<T>,
) -> Result<IntervalFeasibility<T>> {
    if m.dim() != 2 || n.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: m.dim().max(n.dim()),
        });
    }
    let scale = m.spectral_norm().max(n.spectral_norm()).max(T::one());
    let band = tol.verdict * scale;
    let d1 = n.sub(m).min_eig();
    let d2 = n.conj().sub(m).min_eig();
    let worst = d1.min(d2);
    if worst < -band {
        return Ok(IntervalFeasibility::Infeasible { min_eig: worst });
    }
    // Orient so that Im M_12 >= 0 >= Im N_12 (conjugating either endpoint
    // changes neither condition, and a real R compares equally to a matrix
    // and its conjugate).
    let mut mm = m.clone();
    let mut mi = m.im()[(0, 1)];
    if mi < T::zero() {
        mm = mm.conj();
        mi = -mi;
    }
    let mut nn = n.clone();
    let mut ni = n.im()[(0, 1)];
    if ni > T::zero() {
        nn = nn.conj();
        ni = -ni;
    }
    let denom = ni - mi;
    let p = if denom == T::zero() {
        T::one()
    } else {
        ni / denom
    };
    let r = mm.scale(p).add(&nn.scale(T::one() - p));
    let witness = r.re().clone();
    // Verify the sandwich within the verdict band.
    let rh = Herm::from_real(witness.clone());
    let lo = rh.sub(m).min_eig();
    let hi = n.sub(&rh).min_eig();
    if lo < -band || hi < -band {
        return Ok(IntervalFeasibility::Infeasible { min_eig: lo.min(hi) });
    }
    Ok(IntervalFeasibility::Feasible { witness })
}

// ---------------------------------------------------------------------------
// Projection engine for the general interval problem.
// ---------------------------------------------------------------------------

/// Feasibility engine for `exists gamma (block-diag real symmetric):
/// l <= realify(gamma) - shift and gamma <= N`, written as two spectrahedra
/// and one subspace in the realified symmetric space.
pub(crate) struct IntervalEngine<T: Scalar> {
    /// `realify(N)`.
    rn: DMatrix<T>,
    /// `realify(-i Omega_A)`.
    r_mi: DMatrix<T>,
    /// Per-group gamma block dimensions (each `2 * modes`).
    group_dims: Vec<usize>,
    /// Reference scale (`||V||`).
    scale: T,
    cfg: SolverConfig<T>,
}

pub(crate) enum EngineDecision<T: Scalar> {
    /// Verified feasible point with its slack (`>= 0` means separable).
    Feasible { gamma: DMatrix<T>, slack: T },
    /// Rigorous separating-functional certificate of infeasibility at
    /// `t = -verdict_band`; `value` is the certified bound (positive).
    InfeasibleCertified {
        value: T,
        functional: DualFunctional<T>,
    },
    /// Sign undecided within the verdict band.
    Boundary { lower: T, upper: T },
    /// Iteration caps exhausted without a decision.
    Exhausted { lower: T, upper: T },
}

enum LevelOutcome<T: Scalar> {
    Feasible { gamma: DMatrix<T>, slack: T },
    Exhausted { best_gamma: DMatrix<T>, best_slack: T },
}

impl<T: Scalar> IntervalEngine<T> {
    pub(crate) fn new(
        n: &Herm<T>,
        omega_a: &DMatrix<T>,
        group_dims: Vec<usize>,
        scale: T,
        cfg: SolverConfig<T>,
    ) -> Self {
        let d = n.dim();
        debug_assert_eq!(group_dims.iter().sum::<usize>(), d);
        let mut r_mi = DMatrix::zeros(2 * d, 2 * d);
        r_mi.view_mut((0, d), (d, d)).copy_from(omega_a);
        r_mi.view_mut((d, 0), (d, d)).copy_from(&(-omega_a.clone()));
        IntervalEngine {
            rn: n.realify(),
            r_mi,
            group_dims,
            scale: scale.max(T::one()),
            cfg,
        }
    }

    fn dim(&self) -> usize {
        self.group_dims.iter().sum()
    }

    /// Orthogonal projection onto block-diagonal symmetric matrices.
    fn block_project(&self, g: &DMatrix<T>) -> DMatrix<T> {
        let s = symmetrize(g);
        let mut out = DMatrix::zeros(s.nrows(), s.ncols());
        let mut off = 0usize;
        for &bd in &self.group_dims {
            out.view_mut((off, off), (bd, bd))
                .copy_from(&s.view((off, off), (bd, bd)));
            off += bd;
        }
        out
    }

    fn realify_gamma(&self, gamma: &DMatrix<T>) -> DMatrix<T> {
        let d = self.dim();
        let mut out = DMatrix::zeros(2 * d, 2 * d);
        out.view_mut((0, 0), (d, d)).copy_from(gamma);
        out.view_mut((d, d), (d, d)).copy_from(gamma);
        out
    }

    /// Verified slack of a candidate: `min` of the two constraint margins.
    /// Feasible at level `t` iff `slack(gamma) >= t`.
    pub(crate) fn slack(&self, gamma: &DMatrix<T>) -> T {
        let rg = self.realify_gamma(gamma);
        let lower = min_eig_sym(&(&rg + &self.r_mi));
        let upper = min_eig_sym(&(&self.rn - &rg));
        lower.min(upper)
    }

    /// Starting point: the structural projection of `Re N`.
    fn start(&self) -> DMatrix<T> {
        let d = self.dim();
        let re = Herm::from_realified(&self.rn);
        let half = self.block_project(re.re());
        let _ = d;
        half
    }

    /// One Dykstra run at level `t`. Accepts as soon as the structured
    /// iterate's verified slack reaches `t` (minus a small acceptance slop).
    fn dykstra_level(&self, t: T, start: &DMatrix<T>) -> LevelOutcome<T> {
        let d = self.dim();
        let dd = 2 * d;
        let slop = lit::<T>(0.05) * self.cfg.tol.verdict * self.scale;
        let l1 = DMatrix::<T>::identity(dd, dd) * t - &self.r_mi;
        let u2 = &self.rn - DMatrix::<T>::identity(dd, dd) * t;
        let mut x = self.realify_gamma(start);
        let mut p1 = DMatrix::<T>::zeros(dd, dd);
        let mut p2 = DMatrix::<T>::zeros(dd, dd);
        let mut p3 = DMatrix::<T>::zeros(dd, dd);
        let mut best_gamma = start.clone();
        let mut best_slack = self.slack(start);
        if best_slack >= t - slop {
            return LevelOutcome::Feasible {
                gamma: best_gamma,
                slack: best_slack,
            };
        }
        for _ in 0..self.cfg.max_iterations {
            let y1 = &x + &p1;
            let proj1 = &l1 + psd_part(&(&y1 - &l1));
            p1 = y1 - &proj1;

            let y2 = &proj1 + &p2;
            let proj2 = &u2 - psd_part(&(&u2 - &y2));
            p2 = y2 - &proj2;

            let y3 = &proj2 + &p3;
            let gamma = {
                let half: T = lit(0.5);
                let main = (y3.view((0, 0), (d, d)) + y3.view((d, d), (d, d))) * half;
                self.block_project(&main)
            };
            let proj3 = self.realify_gamma(&gamma);
            p3 = y3 - &proj3;
            x = proj3;

            let s = self.slack(&gamma);
            if s > best_slack {
                best_slack = s;
                best_gamma = gamma.clone();
            }
            if s >= t - slop {
                return LevelOutcome::Feasible { gamma, slack: s };
            }
        }
        LevelOutcome::Exhausted {
            best_gamma,
            best_slack,
        }
    }

    /// Separating-functional infeasibility certificate at level `t`, from
    /// the fixed point of averaged projections in the product space. Returns
    /// the certified positive gap together with the functional, or `None`
    /// when certification fails.
    fn dual_certificate(&self, t: T) -> Option<(T, DualFunctional<T>)> {
        let d = self.dim();
        let dd = 2 * d;
        let l1 = DMatrix::<T>::identity(dd, dd) * t - &self.r_mi;
        let u2 = &self.rn - DMatrix::<T>::identity(dd, dd) * t;
        let third: T = lit(1.0 / 3.0);
        let mut b = self.realify_gamma(&self.start());
        let iters = self.cfg.max_iterations.max(200);
        for _ in 0..iters {
            let proj1 = &l1 + psd_part(&(&b - &l1));
            let proj2 = &u2 - psd_part(&(&u2 - &b));
            let gamma = {
                let half: T = lit(0.5);
                let main = (b.view((0, 0), (d, d)) + b.view((d, d), (d, d))) * half;
                self.block_project(&main)
            };
            let proj3 = self.realify_gamma(&gamma);
            let next = (proj1 + proj2 + proj3) * third;
            let step = fro_norm(&(&next - &b));
            b = next;
            if step < lit::<T>(1e-14) * self.scale {
                break;
            }
        }
        // Gap components: v1 = -negpart(b - l1) <= 0 and
        // v2 = negpart(u2 - b) >= 0. On the structural subspace the third
        // component drops out, so any feasible point G would satisfy
        // <v1 + v2, G> = <P_sub(v1 + v2), G> while the cone supports bound
        // the same quantity by <v1, l1> + <v2, u2>; a gap certifies
        // emptiness (finite-iteration error enters through the rigorous
        // bound ||P_sub(v1 + v2)||_F * B_G).
        let v1 = -neg_part(&(&b - &l1));
        let v2 = neg_part(&(&u2 - &b));
        let value = certified_gap(&v1, &v2, &l1, &u2, |s| {
            let half: T = lit(0.5);
            let main = (s.view((0, 0), (d, d)) + s.view((d, d), (d, d))) * half;
            self.realify_gamma(&self.block_project(&main))
        })?;
        let safety = lit::<T>(1e-3) * self.cfg.tol.verdict * self.scale;
        if value > safety {
            Some((
                value,
                DualFunctional {
                    v1,
                    v2,
                    level: t,
                    eps: T::zero(),
                },
            ))
        } else {
            None
        }
    }

    /// Decide the sign of the maximal feasibility margin.
    pub(crate) fn decide(&self) -> EngineDecision<T> {
        let band = self.cfg.tol.verdict * self.scale;
        // Necessary condition: summing the two constraints forces
        // N - i Omega >= 2t, a rigorous upper bound for the margin. A
        // violating eigenvector is itself a separating functional.
        let sum_eig = sym_eigen(&(&self.rn + &self.r_mi));
        let t_hi0 = sum_eig.values[0] * lit::<T>(0.5);
        if t_hi0 < -band {
            let e = sum_eig.vectors.column(0).into_owned();
            let ee = symmetrize(&(&e * e.transpose()));
            return EngineDecision::InfeasibleCertified {
                value: lit::<T>(2.0) * (-band - t_hi0),
                functional: DualFunctional {
                    v1: -ee.clone(),
                    v2: ee,
                    level: -band,
                    eps: T::zero(),
                },
            };
        }
        let start = self.start();
        let s0 = self.slack(&start);
        if s0 >= T::zero() {
            return EngineDecision::Feasible {
                gamma: start,
                slack: s0,
            };
        }
        let mut warm = start;
        let mut lower = s0; // verified feasible level
        let mut upper = t_hi0; // empirical/necessary upper bound
        let mut levels = 0usize;
        // Probe just above zero: success proves separability.
        if levels < self.cfg.bisection_depth {
            levels += 1;
            match self.dykstra_level(band, &warm) {
                LevelOutcome::Feasible { gamma, slack } => {
                    return EngineDecision::Feasible { gamma, slack };
                }
                LevelOutcome::Exhausted {
                    best_gamma,
                    best_slack,
                } => {
                    warm = best_gamma;
                    lower = lower.max(best_slack);
                    upper = upper.min(band);
                }
            }
        }
        // Probe just below zero: success pins the margin inside the band.
        if levels < self.cfg.bisection_depth {
            match self.dykstra_level(-band, &warm) {
                LevelOutcome::Feasible { gamma, slack } => {
                    if slack >= T::zero() {
                        return EngineDecision::Feasible { gamma, slack };
                    }
                    lower = lower.max(slack).max(-band);
                    return EngineDecision::Boundary { lower, upper };
                }
                LevelOutcome::Exhausted { best_slack, .. } => {
                    lower = lower.max(best_slack);
                    upper = upper.min(-band);
                }
            }
        }
        // Both probes failed: candidate infeasibility. Attempt the
        // separating-functional certificate at the relaxed level.
        if let Some((value, functional)) = self.dual_certificate(-band) {
            return EngineDecision::InfeasibleCertified { value, functional };
        }
        EngineDecision::Exhausted { lower, upper }
    }
}

/// Certified gap of a separating functional: `-(C + ||P_sub(v1+v2)|| B_G)`
/// when positive and the cone orientations hold, else `None`.
/// `project_sub` is the orthogonal projection onto the structural subspace.
fn certified_gap<T: Scalar>(
    v1: &DMatrix<T>,
    v2: &DMatrix<T>,
    l1: &DMatrix<T>,
    u2: &DMatrix<T>,
    project_sub: impl Fn(&DMatrix<T>) -> DMatrix<T>,
) -> Option<T> {
    let dd = l1.nrows();
    let fn_scale = fro_norm(v1).max(fro_norm(v2)).max(T::one());
    // Cone membership within eigensolver noise.
    let e1 = sym_eigen(v1).values;
    let e2 = sym_eigen(v2).values;
    let noise = lit::<T>(1e-12) * fn_scale;
    if e1[dd - 1] > noise || e2[0] < -noise {
        return None;
    }
    let c = (v1.transpose() * l1).trace() + (v2.transpose() * u2).trace();
    let r_sub = project_sub(&(v1 + v2));
    let eig_l = sym_eigen(l1).values;
    let eig_u = sym_eigen(u2).values;
    let bound_g = lit::<T>((dd as f64).sqrt())
        * eig_l[0].abs().max(eig_u[dd - 1].abs()).max(T::zero());
    let certified = c + fro_norm(&r_sub) * bound_g;
    if certified < T::zero() {
        Some(-certified)
    } else {
        None
    }
}

/// Re-verify a stored separating functional against the state alone (no
/// solver): rebuilds the interval data from `V` and checks the support
/// inequality. `groups` are the mode counts of the original certificate.
pub fn validate_dual_functional<T: Scalar>(
    v: &Qcm<T>,
    groups: &[usize],
    f: &DualFunctional<T>,
    tol: &Tolerances<T>,
) -> Result<bool> {
    let v = v.to_ordering(CoordOrdering::ModeWise);
    let m_first: usize = groups.iter().take(groups.len() - 1).sum();
    let last = groups[groups.len() - 1];
    let split = v.with_split(m_first, last)?;
    let n_bound = upper_bound(&split, f.eps, tol)?;
    let d = 2 * m_first;
    let dd = 2 * d;
    if f.v1.nrows() != dd || f.v2.nrows() != dd {
        return Err(Error::DimensionMismatch {
            expected: dd,
            got: f.v1.nrows(),
        });
    }
    let layout_a = ModeLayout::single(m_first, CoordOrdering::ModeWise)?;
    let omega_a: DMatrix<T> = layout_a.omega();
    let mut r_mi = DMatrix::<T>::zeros(dd, dd);
    r_mi.view_mut((0, d), (d, d)).copy_from(&omega_a);
    r_mi.view_mut((d, 0), (d, d)).copy_from(&(-omega_a));
    let l1 = DMatrix::<T>::identity(dd, dd) * f.level - &r_mi;
    let u2 = n_bound.realify() - DMatrix::<T>::identity(dd, dd) * f.level;
    let group_dims: Vec<usize> = groups.iter().take(groups.len() - 1).map(|&g| 2 * g).collect();
    let project = |s: &DMatrix<T>| -> DMatrix<T> {
        let half: T = lit(0.5);
        let main = symmetrize(&((s.view((0, 0), (d, d)) + s.view((d, d), (d, d))) * half));
        let mut blocks = DMatrix::<T>::zeros(d, d);
        let mut off = 0usize;
        for &bd in &group_dims {
            blocks
                .view_mut((off, off), (bd, bd))
                .copy_from(&main.view((off, off), (bd, bd)));
            off += bd;
        }
        let mut out = DMatrix::<T>::zeros(dd, dd);
        out.view_mut((0, 0), (d, d)).copy_from(&blocks);
        out.view_mut((d, d), (d, d)).copy_from(&blocks);
        out
    };
    Ok(certified_gap(&f.v1, &f.v2, &l1, &u2, project).is_some())
}

// ---------------------------------------------------------------------------
// Gamma-B recovery and certificate assembly.
// ---------------------------------------------------------------------------

/// Recover the complementary witness as the Schur supremum
/// `(V - gamma_A (+) 0) / (V_A - gamma_A)`, floored to a valid QCM.
fn recover_gamma_b<T: Scalar>(
    v: &Qcm<T>,
    gamma_a: &DMatrix<T>,
    tol: &Tolerances<T>,
) -> Result<DMatrix<T>> {
    let v = v.to_ordering(CoordOrdering::ModeWise);
    let layout = *v.layout();
    let d = v.dim();
    let da = 2 * layout.m;
    let mut diff = v.mat().clone();
    diff.view_mut((0, 0), (da, da)).copy_from(&(v.block_a() - gamma_a));
    let partition = BlockPartition::new(da, d)?;
    let scale = v.scale().max(T::one());
    let mut eps = T::zero();
    let mut gamma_b: Option<DMatrix<T>> = None;
    for _ in 0..4 {
        match schur_complement(&diff, partition, eps) {
            Ok(g) => {
                gamma_b = Some(g);
                break;
            }
            Err(Error::Conditioning { .. }) => {
                eps = if eps == T::zero() {
                    tol.psd * scale
                } else {
                    eps * lit(10.0)
                };
            }
            Err(e) => return Err(e),
        }
    }
    let mut gamma_b = gamma_b.ok_or(Error::Conditioning {
        what: "gamma_B recovery",
        min_eig: f64::NAN,
    })?;
    // Floor within the psd band to a valid QCM if rounding pushed the
    // Heisenberg check marginally negative.
    let lb = ModeLayout::single(layout.n, CoordOrdering::ModeWise)?;
    let validity = is_qcm(&gamma_b, &lb, tol)?;
    if !validity.valid {
        let bump = -validity.min_eig + tol.psd * spectral_norm_sym(&gamma_b).max(T::one());
        if bump > T::zero() && bump <= tol.verdict * scale {
            for i in 0..gamma_b.nrows() {
                gamma_b[(i, i)] += bump;
            }
        }
    }
    Ok(gamma_b)
}

/// Package a separable verdict after independent validation; degrades to
/// inconclusive if the witness does not re-validate.
pub(crate) fn certify_separable<T: Scalar>(
    v: &Qcm<T>,
    gammas: Vec<DMatrix<T>>,
    groups: Vec<usize>,
    route: Route,
    margin: Option<T>,
    tol: &Tolerances<T>,
) -> Result<SeparabilityCert<T>> {
    let check = validate_product_witness(v, &gammas, &groups, tol)?;
    if check.ok {
        Ok(SeparabilityCert {
            verdict: Verdict::Separable,
            witness: Witness::Product { gammas },
            route,
            groups,
            margin,
            distillable: Some(false),
        })
    } else {
        Ok(SeparabilityCert {
            verdict: Verdict::Inconclusive,
            witness: Witness::Margin {
                lower: check.min_eig,
                upper: T::zero(),
            },
            route,
            groups,
            margin,
            distillable: None,
        })
    }
}

fn entangled_by_ppt<T: Scalar>(
    min_nu: T,
    cut: Option<usize>,
    route: Route,
    groups: Vec<usize>,
) -> SeparabilityCert<T> {
    SeparabilityCert {
        verdict: Verdict::Entangled,
        witness: Witness::PptViolation {
            min_symplectic_eig: min_nu,
            cut,
        },
        route,
        groups,
        margin: None,
        distillable: Some(true),
    }
}

fn require_valid<T: Scalar>(v: &Qcm<T>, tol: &Tolerances<T>) -> Result<()> {
    let validity = v.validity(tol);
    if !validity.valid {
        return Err(Error::InvalidQcm(
            validity.min_eig.to_f64().unwrap_or(f64::NAN),
        ));
    }
    Ok(())
}

/// Trivial certificate for single-party inputs: validity is separability.
fn trivial_cert<T: Scalar>(v: &Qcm<T>, tol: &Tolerances<T>) -> Result<SeparabilityCert<T>> {
    let v = v.to_ordering(CoordOrdering::ModeWise);
    require_valid(&v, tol)?;
    let groups = vec![v.layout().modes()];
    certify_separable(&v, vec![v.mat().clone()], groups, Route::Trivial, None, tol)
}

/// Constructive separability for `1` vs `n` (or `n` vs `1`) states: PPT is
/// decisive, and PPT states receive a witness from the closed-form 2x2
/// interval construction.
pub fn separability_1vn<T: Scalar>(
    v: &Qcm<T>,
    cfg: &SolverConfig<T>,
) -> Result<SeparabilityCert<T>> {
    let tol = &cfg.tol;
    let v = v.to_ordering(CoordOrdering::ModeWise);
    let layout = *v.layout();
    if layout.m == 0 || layout.n == 0 {
        return trivial_cert(&v, tol);
    }
    if layout.m != 1 {
        if layout.n == 1 {
            let swapped = v.swap_parties();
            let mut cert = separability_1vn(&swapped, cfg)?;
            if let Witness::Product { gammas } = &mut cert.witness {
                gammas.reverse();
            }
            cert.groups.reverse();
            return Ok(cert);
        }
        return Err(Error::domain(format!(
            "one-vs-n route requires m = 1 or n = 1, got {} vs {}",
            layout.m, layout.n
        )));
    }
    require_valid(&v, tol)?;
    let groups = vec![layout.m, layout.n];
    let ppt = is_ppt(&v, tol)?;
    if !ppt.ppt {
        return Ok(entangled_by_ppt(
            ppt.min_pt_symplectic_eig,
            None,
            Route::OneVsN,
            groups,
        ));
    }
    let (n_minus, _eps) = upper_bound_with_retries(&v, cfg)?;
    // Lemma-5 endpoints: M = i Omega_A, N = the +iOmega_B bound, so that
    // N* is the -iOmega_B side appearing in the separability condition.
    let omega_a: DMatrix<T> = layout.omega_a();
    let m_end = Herm::new(DMatrix::zeros(2, 2), omega_a);
    let n_plus = n_minus.conj();
    match interval_feasibility_2x2(&m_end, &n_plus, tol)? {
        IntervalFeasibility::Feasible { witness } => {
            let slack = Herm::from_real(witness.clone()).sub(&m_end).min_eig();
            let gamma_b = recover_gamma_b(&v, &witness, tol)?;
            certify_separable(
                &v,
                vec![witness, gamma_b],
                groups,
                Route::OneVsN,
                Some(slack),
                tol,
            )
        }
        IntervalFeasibility::Infeasible { min_eig } => Ok(SeparabilityCert {
            verdict: Verdict::Inconclusive,
            witness: Witness::Margin {
                lower: min_eig,
                upper: T::zero(),
            },
            route: Route::OneVsN,
            groups,
            margin: Some(min_eig),
            distillable: None,
        }),
    }
}

/// General `m` vs `n` separability through the feasibility-margin engine.
/// Entangled verdicts prefer the PPT witness; the solver-infeasibility route
/// only fires with a verified separating functional (candidate bound
/// entanglement), and everything else inside the band is inconclusive.
pub fn separability_general<T: Scalar>(
    v: &Qcm<T>,
    cfg: &SolverConfig<T>,
) -> Result<SeparabilityCert<T>> {
    let tol = &cfg.tol;
    let v = v.to_ordering(CoordOrdering::ModeWise);
    let layout = *v.layout();
    if layout.m == 0 || layout.n == 0 {
        return trivial_cert(&v, tol);
    }
    require_valid(&v, tol)?;
    let groups = vec![layout.m, layout.n];
    let ppt = is_ppt(&v, tol)?;
    if !ppt.ppt {
        return Ok(entangled_by_ppt(
            ppt.min_pt_symplectic_eig,
            None,
            Route::General,
            groups,
        ));
    }
    let (n_bound, eps_used) = upper_bound_with_retries(&v, cfg)?;
    let omega_a: DMatrix<T> = layout.omega_a();
    let engine = IntervalEngine::new(
        &n_bound,
        &omega_a,
        vec![2 * layout.m],
        v.scale(),
        *cfg,
    );
    finish_from_engine(&v, engine, groups, Route::General, cfg, eps_used)
}

fn finish_from_engine<T: Scalar>(
    v: &Qcm<T>,
    engine: IntervalEngine<T>,
    groups: Vec<usize>,
    route: Route,
    cfg: &SolverConfig<T>,
    eps: T,
) -> Result<SeparabilityCert<T>> {
    let tol = &cfg.tol;
    match engine.decide() {
        EngineDecision::Feasible { gamma, slack } => {
            // Split the block-diagonal gamma into per-group blocks, recover
            // the last-party block, validate everything.
            let mut gammas: Vec<DMatrix<T>> = Vec::with_capacity(groups.len());
            let mut off = 0usize;
            for &modes in groups.iter().take(groups.len() - 1) {
                let bd = 2 * modes;
                gammas.push(gamma.view((off, off), (bd, bd)).into_owned());
                off += bd;
            }
            let m_first: usize = groups.iter().take(groups.len() - 1).sum();
            let split = v.with_split(m_first, groups[groups.len() - 1])?;
            let gamma_b = recover_gamma_b(&split, &gamma, tol)?;
            gammas.push(gamma_b);
            certify_separable(v, gammas, groups, route, Some(slack), tol)
        }
        EngineDecision::InfeasibleCertified {
            value,
            mut functional,
        } => {
            functional.eps = eps;
            Ok(SeparabilityCert {
                verdict: Verdict::Entangled,
                witness: Witness::DualInfeasibility {
                    value,
                    functional: Box::new(functional),
                },
                route,
                groups,
                margin: None,
                distillable: Some(false),
            })
        }
        EngineDecision::Boundary { lower, upper } | EngineDecision::Exhausted { lower, upper } => {
            Ok(SeparabilityCert {
                verdict: Verdict::Inconclusive,
                witness: Witness::Margin { lower, upper },
                route,
                groups,
                margin: Some(lower),
                distillable: None,
            })
        }
    }
}

/// Full (k-partite) separability: the same engine with a block-diagonal
/// variable over the first `k - 1` groups; the subspace projection zeroes
/// cross-group blocks. PPT across every single-group cut is checked first.
pub fn full_separability<T: Scalar>(
    v: &Qcm<T>,
    groups: &[usize],
    cfg: &SolverConfig<T>,
) -> Result<SeparabilityCert<T>> {
    let tol = &cfg.tol;
    let v = v.to_ordering(CoordOrdering::ModeWise);
    let modes = v.layout().modes();
    if groups.len() < 2 || groups.iter().any(|&g| g == 0) || groups.iter().sum::<usize>() != modes
    {
        return Err(Error::BadGroups {
            groups: groups.to_vec(),
            modes,
        });
    }
    if groups.len() == 2 {
        let split = v.with_split(groups[0], groups[1])?;
        let mut cert = separability_general(&split, cfg)?;
        cert.route = Route::Multipartite;
        return Ok(cert);
    }
    require_valid(&v, tol)?;
    // Necessary: PPT across each single-group-vs-rest cut.
    let mut offset = 0usize;
    for (idx, &g) in groups.iter().enumerate() {
        let moved = move_modes_first(&v, offset, g)?;
        let split = moved.with_split(g, modes - g)?;
        let pt = split.partial_transpose().symplectic_spectrum(tol)?;
        let min_nu = *pt.last().expect("modes >= 1");
        if min_nu < T::one() - tol.verdict {
            return Ok(entangled_by_ppt(
                min_nu,
                Some(idx),
                Route::Multipartite,
                groups.to_vec(),
            ));
        }
        offset += g;
    }
    // Engine over gamma_{A_1} (+) ... (+) gamma_{A_{k-1}}.
    let m_first: usize = groups.iter().take(groups.len() - 1).sum();
    let split = v.with_split(m_first, groups[groups.len() - 1])?;
    let (n_bound, eps_used) = upper_bound_with_retries(&split, cfg)?;
    let layout_a = ModeLayout::single(m_first, CoordOrdering::ModeWise)?;
    let omega_a: DMatrix<T> = layout_a.omega();
    let engine = IntervalEngine::new(
        &n_bound,
        &omega_a,
        groups
            .iter()
            .take(groups.len() - 1)
            .map(|&g| 2 * g)
            .collect(),
        v.scale(),
        *cfg,
    );
    finish_from_engine(&v, engine, groups.to_vec(), Route::Multipartite, cfg, eps_used)
}

/// Congruence by the mode permutation moving `count` modes starting at
/// `offset` to the front (a symplectic, orthogonal reshuffle).
fn move_modes_first<T: Scalar>(v: &Qcm<T>, offset: usize, count: usize) -> Result<Qcm<T>> {
    let v = v.to_ordering(CoordOrdering::ModeWise);
    let modes = v.layout().modes();
    let mut order: Vec<usize> = (offset..offset + count).collect();
    order.extend((0..modes).filter(|j| *j < offset || *j >= offset + count));
    let idx: Vec<usize> = order.iter().flat_map(|&j| [2 * j, 2 * j + 1]).collect();
    let d = v.dim();
    let mat = DMatrix::from_fn(d, d, |i, j| v.mat()[(idx[i], idx[j])]);
    Qcm::new(
        ModeLayout::mode_wise(count, modes - count)?,
        mat,
        &Tolerances::default(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symplectic::{direct_sum, random_qcm, thermal, tmsv, Purity};
    use nalgebra::DVector;

    type M = DMatrix<f64>;

    fn tol() -> Tolerances<f64> {
        Tolerances::default()
    }

    fn cfg() -> SolverConfig<f64> {
        SolverConfig::default()
    }

    #[test]
    fn upper_bound_without_coupling_is_va() {
        let ga = thermal(1.5f64, 1).unwrap();
        let gb = thermal(2.5f64, 2).unwrap();
        let v = direct_sum(&ga, &gb, &tol()).unwrap();
        let n = upper_bound(&v, 0.0, &tol()).unwrap();
        assert_eq!(n.re(), ga.mat());
        assert_eq!(n.im(), &M::zeros(2, 2));
    }

    #[test]
    fn upper_bound_of_tmsv_is_i_omega() {
        // N^- = c - s^2 zeta (c - i omega)^{-1} zeta = i omega exactly,
        // because c^2 - 1 = s^2.
        for r in [0.3f64, 0.9, 1.4] {
            let v = tmsv(r);
            let n = upper_bound(&v, 0.0, &tol()).unwrap();
            let omega = M::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]);
            assert!(n.re().norm() < 1e-10, "r={r}: re = {}", n.re());
            assert!((n.im() - omega).norm() < 1e-10, "r={r}");
        }
        // r = 0: X = 0 shortcut gives V_A = I exactly
        let n0 = upper_bound(&tmsv(0.0f64), 0.0, &tol()).unwrap();
        assert_eq!(n0.re(), &M::identity(2, 2));
    }

    #[test]
    fn upper_bound_pt_invariant_is_real() {
        // X = diag(x, 0) with diagonal V_B is invariant under partial
        // transposition, so the bound must come out real.
        let mut mat = M::identity(4, 4) * 1.6;
        mat[(0, 2)] = 0.5;
        mat[(2, 0)] = 0.5;
        let v = Qcm::new(ModeLayout::mode_wise(1, 1).unwrap(), mat, &tol()).unwrap();
        let n = upper_bound(&v, 0.0, &tol()).unwrap();
        assert!(n.max_im_entry() < 1e-12);
    }

    #[test]
    fn interval_feasibility_examples() {
        let t = tol();
        let omega = M::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]);
        let m_end = Herm::new(M::zeros(2, 2), omega.clone());
        // N = 2I: p = 0, R = 2I
        let n = Herm::from_real(M::identity(2, 2) * 2.0);
        match interval_feasibility_2x2(&m_end, &n, &t).unwrap() {
            IntervalFeasibility::Feasible { witness } => {
                assert!((witness - M::identity(2, 2) * 2.0).norm() < 1e-12);
            }
            _ => panic!("expected feasible"),
        }
        // M = N real symmetric: R = M
        let real = Herm::from_real(M::from_row_slice(2, 2, &[1.0, 0.2, 0.2, 2.0]));
        match interval_feasibility_2x2(&real, &real, &t).unwrap() {
            IntervalFeasibility::Feasible { witness } => {
                assert!((witness - real.re()).norm() < 1e-12);
            }
            _ => panic!("expected feasible"),
        }
        // N = 0.5 I: infeasible, eigenvalues of N - M are 0.5 -+ 1
        let n_small = Herm::from_real(M::identity(2, 2) * 0.5);
        match interval_feasibility_2x2(&m_end, &n_small, &t).unwrap() {
            IntervalFeasibility::Infeasible { min_eig } => {
                assert!((min_eig + 0.5).abs() < 1e-12);
            }
            _ => panic!("expected infeasible"),
        }
    }

    #[test]
    fn one_vs_n_flags_tmsv_entangled() {
        let cert = separability_1vn(&tmsv(0.3f64), &cfg()).unwrap();
        assert_eq!(cert.verdict, Verdict::Entangled);
        assert_eq!(cert.distillable, Some(true));
        match cert.witness {
            Witness::PptViolation {
                min_symplectic_eig, ..
            } => {
                assert!((min_symplectic_eig - (-0.6f64).exp()).abs() < 1e-9);
            }
            _ => panic!("expected PPT witness"),
        }
    }

    #[test]
    fn one_vs_n_certifies_constructed_separable() {
        for seed in 0..10u64 {
            let ga = random_qcm::<f64>(
                seed,
                ModeLayout::single(1, CoordOrdering::ModeWise).unwrap(),
                Purity::Mixed { nu_max: 2.0 },
                0.8,
            );
            let gb = random_qcm::<f64>(
                1000 + seed,
                ModeLayout::single(2, CoordOrdering::ModeWise).unwrap(),
                Purity::Mixed { nu_max: 2.0 },
                0.8,
            );
            let mut v = direct_sum(&ga, &gb, &tol()).unwrap();
            let mat = v.mat() + M::identity(6, 6) * 0.1;
            v = Qcm::new(*v.layout(), mat, &tol()).unwrap();
            let cert = separability_1vn(&v, &cfg()).unwrap();
            assert_eq!(cert.verdict, Verdict::Separable, "seed {seed}");
            match &cert.witness {
                Witness::Product { gammas } => {
                    let check =
                        validate_product_witness(&v, gammas, &cert.groups, &tol()).unwrap();
                    assert!(check.ok, "seed {seed}: witness failed revalidation");
                }
                _ => panic!("expected product witness"),
            }
        }
    }

    #[test]
    fn one_vs_n_classically_correlated() {
        // V = I4 + 0.5 v v^T with v = (1, 0, 1, 0): PPT (no momentum
        // components) and separable.
        let vvec = DVector::from_vec(vec![1.0, 0.0, 1.0, 0.0]);
        let mat = M::identity(4, 4) + (&vvec * vvec.transpose()) * 0.5;
        let v = Qcm::new(ModeLayout::mode_wise(1, 1).unwrap(), mat, &tol()).unwrap();
        let pt = v.partial_transpose().symplectic_spectrum(&tol()).unwrap();
        assert!(pt.last().unwrap() >= &(1.0 - 1e-9));
        let cert = separability_1vn(&v, &cfg()).unwrap();
        assert_eq!(cert.verdict, Verdict::Separable);
    }

    #[test]
    fn one_vs_n_handles_swapped_roles() {
        // 2 vs 1 with the single mode on the B side
        let ga = random_qcm::<f64>(
            3,
            ModeLayout::single(2, CoordOrdering::ModeWise).unwrap(),
            Purity::Mixed { nu_max: 2.0 },
            0.5,
        );
        let gb = thermal(1.2f64, 1).unwrap();
        let v = direct_sum(&ga, &gb, &tol()).unwrap();
        let cert = separability_1vn(&v, &cfg()).unwrap();
        assert_eq!(cert.verdict, Verdict::Separable);
        assert_eq!(cert.groups, vec![2, 1]);
        match &cert.witness {
            Witness::Product { gammas } => {
                assert_eq!(gammas[0].nrows(), 4);
                assert_eq!(gammas[1].nrows(), 2);
            }
            _ => panic!("expected product witness"),
        }
    }

    #[test]
    fn general_engine_agrees_with_one_vs_n() {
        let layout = ModeLayout::mode_wise(1, 2).unwrap();
        let mut checked = 0usize;
        for seed in 0..40u64 {
            let v = random_qcm::<f64>(seed, layout, Purity::Mixed { nu_max: 3.0 }, 1.0);
            let fast = separability_1vn(&v, &cfg()).unwrap();
            let gen = separability_general(&v, &cfg()).unwrap();
            if fast.verdict == Verdict::Inconclusive || gen.verdict == Verdict::Inconclusive {
                continue;
            }
            assert_eq!(fast.verdict, gen.verdict, "seed {seed}");
            checked += 1;
        }
        assert!(checked >= 35, "too many inconclusives: {checked}");
    }

    #[test]
    fn general_engine_on_direct_sums() {
        for (ma, mb, seed) in [(1usize, 1usize, 1u64), (2, 2, 2), (2, 3, 3)] {
            let ga = random_qcm::<f64>(
                seed,
                ModeLayout::single(ma, CoordOrdering::ModeWise).unwrap(),
                Purity::Mixed { nu_max: 2.0 },
                0.7,
            );
            let gb = random_qcm::<f64>(
                500 + seed,
                ModeLayout::single(mb, CoordOrdering::ModeWise).unwrap(),
                Purity::Mixed { nu_max: 2.0 },
                0.7,
            );
            let v = direct_sum(&ga, &gb, &tol()).unwrap();
            let cert = separability_general(&v, &cfg()).unwrap();
            assert_eq!(cert.verdict, Verdict::Separable, "{ma} vs {mb}");
        }
    }

    #[test]
    fn monotone_under_local_noise() {
        // separable-certified V stays separable-certified after adding
        // block-diagonal PSD noise
        let layout = ModeLayout::mode_wise(1, 1).unwrap();
        let v = random_qcm::<f64>(8, layout, Purity::Mixed { nu_max: 2.0 }, 0.3);
        let cert = separability_general(&v, &cfg()).unwrap();
        if cert.verdict != Verdict::Separable {
            return; // state happened to be entangled; covered elsewhere
        }
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(77);
        use rand::Rng;
        use rand::SeedableRng;
        let ga = M::from_fn(2, 2, |_, _| rng.random_range(-0.5..0.5));
        let gb = M::from_fn(2, 2, |_, _| rng.random_range(-0.5..0.5));
        let noise = direct_sum_mat(
            &symmetrize(&(&ga * ga.transpose())),
            &symmetrize(&(&gb * gb.transpose())),
        );
        let v2 = Qcm::new(*v.layout(), v.mat() + noise, &tol()).unwrap();
        let cert2 = separability_general(&v2, &cfg()).unwrap();
        assert_eq!(cert2.verdict, Verdict::Separable);
    }

    #[test]
    fn engine_certifies_synthetic_infeasibility() {
        // gamma >= i omega forces gamma >= 0; an upper bound far below zero
        // is infeasible. The necessary-condition shortcut must certify it.
        let layout = ModeLayout::single(1, CoordOrdering::ModeWise).unwrap();
        let omega: M = layout.omega();
        let n = Herm::from_real(M::identity(2, 2) * -1.0);
        let engine = IntervalEngine::new(&n, &omega, vec![2], 1.0, cfg());
        match engine.decide() {
            EngineDecision::InfeasibleCertified { value, functional } => {
                assert!(value > 0.1);
                // the eigenvector functional must satisfy its own checks
                assert!(max_abs_entry(&(&functional.v1 + &functional.v2)) < 1e-12);
            }
            _ => panic!("expected certified infeasibility"),
        }
    }

    #[test]
    fn dual_certificate_on_gap_instance() {
        // Synthetic instance dodging the necessary-condition shortcut:
        // force a contradiction between the real-part constraints through
        // the subspace while N - i Omega stays PSD is impossible in 2x2, so
        // exercise the dual machinery directly at a level above the margin.
        let layout = ModeLayout::single(1, CoordOrdering::ModeWise).unwrap();
        let omega: M = layout.omega();
        let n = Herm::from_real(M::identity(2, 2) * 0.5);
        // margin t* = some negative value; at t = 0.2 the problem is
        // infeasible (gamma <= 0.5 - 0.2 while gamma - i omega >= 0.2 forces
        // min eig(gamma) >= ... > 0.3 is fine; actually check the engine's
        // certificate fires at a level above t_hi).
        let engine = IntervalEngine::new(&n, &omega, vec![2], 1.0, cfg());
        // t_hi = 0.5 * min_eig(N - i omega) = 0.5 * (0.5 - 1) = -0.25;
        // dual certificate at t = 0 must verify infeasibility.
        let value = engine.dual_certificate(0.0);
        assert!(value.is_some(), "dual certificate failed to verify");
        // and at a clearly feasible level it must NOT certify
        let value_feasible = engine.dual_certificate(-3.0);
        assert!(value_feasible.is_none());
    }

    #[test]
    fn full_separability_reduces_and_detects() {
        // (+) of three 1-mode QCMs is fully separable
        let a = thermal(1.4f64, 1).unwrap();
        let b = thermal(1.1f64, 1).unwrap();
        let c = thermal(2.0f64, 1).unwrap();
        let ab = direct_sum(&a, &b, &tol()).unwrap();
        let abc = direct_sum(&ab, &c, &tol()).unwrap();
        let cert = full_separability(&abc, &[1, 1, 1], &cfg()).unwrap();
        assert_eq!(cert.verdict, Verdict::Separable);

        // tmsv(1) (+) vacuum grouped (1|1|1): the (A|BC) cut is non-PPT
        let vac = thermal(1.0f64, 1).unwrap();
        let v = direct_sum(&tmsv(1.0f64), &vac, &tol()).unwrap();
        let cert = full_separability(&v, &[1, 1, 1], &cfg()).unwrap();
        assert_eq!(cert.verdict, Verdict::Entangled);
        match cert.witness {
            Witness::PptViolation { cut, .. } => assert_eq!(cut, Some(0)),
            _ => panic!("expected PPT witness"),
        }

        // k = 2 delegates to the bipartite engine
        let two = full_separability(&abc, &[2, 1], &cfg()).unwrap();
        assert_eq!(two.verdict, Verdict::Separable);
        assert_eq!(two.route, Route::Multipartite);
    }

    #[test]
    fn full_separability_rejects_bad_groups() {
        let v = direct_sum(
            &thermal(1.0f64, 1).unwrap(),
            &thermal(1.0f64, 1).unwrap(),
            &tol(),
        )
        .unwrap();
        assert!(full_separability(&v, &[1], &cfg()).is_err());
        assert!(full_separability(&v, &[1, 2], &cfg()).is_err());
        assert!(full_separability(&v, &[1, 0, 1], &cfg()).is_err());
    }

    #[test]
    fn single_party_input_is_trivially_separable() {
        let v = thermal(2.0f64, 1).unwrap();
        let cert = separability_general(&v, &cfg()).unwrap();
        assert_eq!(cert.verdict, Verdict::Separable);
        assert_eq!(cert.route, Route::Trivial);
    }
}

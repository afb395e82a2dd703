//! Passive (orthogonal-symplectic) transformations and absolute separability.
//!
//! A passive transformation is parametrized by an `n x n` unitary `U` through
//! `K = W^dag (U (+) U^*) W` in position-momentum ordering, which works out to
//! the real matrix `[[Re U, -Im U], [Im U, Re U]]`. Externally everything is
//! expressed in mode-wise ordering.

use nalgebra::{Complex, DMatrix, DVector};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::linalg::{fro_norm, min_eig_sym, sym_eigen, symmetrize};
use crate::scalar::{lit, Scalar};
use crate::symplectic::{is_qcm, symplectic_spectrum, CoordOrdering, ModeLayout, Qcm};

/// Haar-random unitary via QR of a complex Ginibre matrix with the phases of
/// the R diagonal fixed. Sampling happens at f64 precision.
pub(crate) fn haar_unitary_f64(
    rng: &mut ChaCha8Rng,
    n: usize,
) -> (DMatrix<f64>, DMatrix<f64>) {
    let g = DMatrix::<Complex<f64>>::from_fn(n, n, |_, _| {
        let re: f64 = rng.sample(rand_distr::StandardNormal);
        let im: f64 = rng.sample(rand_distr::StandardNormal);
        Complex::new(re, im)
    });
    let qr = g.qr();
    let q = qr.q();
    let r = qr.r();
    let mut u = q;
    for j in 0..n {
        let d = r[(j, j)];
        let m = d.norm();
        let phase = if m > 0.0 { d / Complex::new(m, 0.0) } else { Complex::new(1.0, 0.0) };
        for i in 0..n {
            u[(i, j)] *= phase;
        }
    }
    let re = DMatrix::from_fn(n, n, |i, j| u[(i, j)].re);
    let im = DMatrix::from_fn(n, n, |i, j| u[(i, j)].im);
    (re, im)
}

/// Mode-wise `2n x 2n` passive matrix from the real/imaginary parts of `U`.
fn passive_k_mode_wise<T: Scalar>(u_re: &DMatrix<T>, u_im: &DMatrix<T>) -> DMatrix<T> {
    let n = u_re.nrows();
    let mut k_pm = DMatrix::<T>::zeros(2 * n, 2 * n);
    k_pm.view_mut((0, 0), (n, n)).copy_from(u_re);
    k_pm.view_mut((n, n), (n, n)).copy_from(u_re);
    k_pm.view_mut((0, n), (n, n)).copy_from(&(-u_im.clone()));
    k_pm.view_mut((n, 0), (n, n)).copy_from(u_im);
    let layout = ModeLayout::single(n, CoordOrdering::PositionMomentum).expect("n >= 1");
    let perm = layout.conversion_from(CoordOrdering::ModeWise);
    DMatrix::from_fn(2 * n, 2 * n, |i, j| k_pm[(perm[i], perm[j])])
}

/// Sample a Haar passive matrix directly (used by the random-state
/// generator).
pub(crate) fn haar_passive_mode_wise<T: Scalar>(
    rng: &mut ChaCha8Rng,
    n: usize,
) -> DMatrix<T> {
    let (re, im) = haar_unitary_f64(rng, n);
    let re_t = re.map(|x| lit::<T>(x));
    let im_t = im.map(|x| lit::<T>(x));
    passive_k_mode_wise(&re_t, &im_t)
}

/// An orthogonal-symplectic matrix together with the unitary it came from.
#[derive(Debug, Clone)]
pub struct PassiveTransform<T: Scalar> {
    u_re: DMatrix<T>,
    u_im: DMatrix<T>,
    /// Mode-wise `2n x 2n` orthogonal-symplectic matrix.
    k: DMatrix<T>,
}

impl<T: Scalar> PassiveTransform<T> {
    pub fn modes(&self) -> usize {
        self.u_re.nrows()
    }

    pub fn k(&self) -> &DMatrix<T> {
        &self.k
    }

    pub fn u_re(&self) -> &DMatrix<T> {
        &self.u_re
    }

    pub fn u_im(&self) -> &DMatrix<T> {
        &self.u_im
    }

    /// `K V K^T`, preserving the layout of `v`.
    pub fn apply(&self, v: &Qcm<T>) -> Result<Qcm<T>> {
        if v.layout().modes() != self.modes() {
            return Err(Error::DimensionMismatch {
                expected: 2 * self.modes(),
                got: v.dim(),
            });
        }
        let mw = v.to_ordering(CoordOrdering::ModeWise);
        let mat = symmetrize(&(&self.k * mw.mat() * self.k.transpose()));
        let out = Qcm::new(*mw.layout(), mat, &Tolerances::default())
            .expect("orthogonal congruence preserves positivity");
        Ok(out.to_ordering(v.layout().ordering))
    }
}

/// Build a passive transformation from a unitary given as (re, im) parts.
pub fn passive_from_unitary<T: Scalar>(
    u_re: &DMatrix<T>,
    u_im: &DMatrix<T>,
    tol: &Tolerances<T>,
) -> Result<PassiveTransform<T>> {
    let n = u_re.nrows();
    if u_re.ncols() != n || u_im.nrows() != n || u_im.ncols() != n {
        return Err(Error::NotSquare(u_re.nrows(), u_re.ncols()));
    }
    // U^dag U = (re^T re + im^T im) + i (re^T im - im^T re)
    let re_part = u_re.transpose() * u_re + u_im.transpose() * u_im;
    let im_part = u_re.transpose() * u_im - u_im.transpose() * u_re;
    let dev_re = fro_norm(&(re_part - DMatrix::<T>::identity(n, n)));
    let dev_im = fro_norm(&im_part);
    let dev = (dev_re * dev_re + dev_im * dev_im).sqrt();
    if dev > tol.alg * lit::<T>(n as f64).sqrt().max(T::one()) {
        return Err(Error::NotUnitary(dev.to_f64().unwrap_or(f64::NAN)));
    }
    Ok(PassiveTransform {
        u_re: u_re.clone(),
        u_im: u_im.clone(),
        k: passive_k_mode_wise(u_re, u_im),
    })
}

/// Deterministic Haar-random passive transformation on `n` modes.
pub fn random_passive<T: Scalar>(seed: u64, n: usize) -> PassiveTransform<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (re, im) = haar_unitary_f64(&mut rng, n);
    let u_re = re.map(|x| lit::<T>(x));
    let u_im = im.map(|x| lit::<T>(x));
    let k = passive_k_mode_wise(&u_re, &u_im);
    PassiveTransform { u_re, u_im, k }
}

/// Both sides of the eigenvalue inequality `nu_1^2 >= lambda_1 lambda_2`
/// (smallest symplectic eigenvalue squared vs product of the two smallest
/// ordinary eigenvalues).
pub fn sympl_vs_ordinary_check<T: Scalar>(
    mat: &DMatrix<T>,
    layout: &ModeLayout,
    tol: &Tolerances<T>,
) -> Result<(T, T)> {
    let nus = symplectic_spectrum(mat, layout, tol)?;
    let nu_min = *nus.last().expect("at least one mode");
    let eig = sym_eigen(mat);
    Ok((nu_min * nu_min, eig.values[0] * eig.values[1]))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AbsSepVerdict {
    AbsolutelySeparable,
    NotAbsolute,
}

/// Constructive data of the rank-one certificate (issued when
/// `lambda_1 < 1`).
#[derive(Debug, Clone)]
pub struct RankOneData<T: Scalar> {
    pub k: T,
    pub x: DVector<T>,
    pub y: DVector<T>,
    pub z: DVector<T>,
    pub p: T,
}

/// Verdict and witness of the passive-proof separability test.
#[derive(Debug, Clone)]
pub struct AbsSepCert<T: Scalar> {
    pub lambda1: T,
    pub lambda2: T,
    pub verdict: AbsSepVerdict,
    /// Marginal witnesses, present for absolutely separable verdicts.
    pub gamma_a: Option<DMatrix<T>>,
    pub gamma_b: Option<DMatrix<T>>,
    pub rank_one: Option<RankOneData<T>>,
}

fn rank_one_gamma<T: Scalar>(k: T, y: &DVector<T>) -> DMatrix<T> {
    let d = y.len();
    let yy = y * y.transpose();
    let id = DMatrix::<T>::identity(d, d);
    symmetrize(&(&yy * k + (id - &yy) * (T::one() / k)))
}

/// Decide absolute (passive-proof) separability: the verdict is
/// `lambda_1 lambda_2 >= 1` on the two smallest ordinary eigenvalues, and
/// absolutely separable outputs carry validated marginal witnesses (given in
/// party-local mode-wise coordinates).
pub fn absolute_separability<T: Scalar>(
    v: &Qcm<T>,
    tol: &Tolerances<T>,
) -> Result<AbsSepCert<T>> {
    let validity = v.validity(tol);
    if !validity.valid {
        return Err(Error::InvalidQcm(
            validity.min_eig.to_f64().unwrap_or(f64::NAN),
        ));
    }
    let v = v.to_ordering(CoordOrdering::ModeWise);
    let eig = sym_eigen(v.mat());
    let lambda1 = eig.values[0];
    let lambda2 = eig.values[1];
    let scale = v.scale();
    if lambda1 * lambda2 < T::one() - tol.verdict {
        return Ok(AbsSepCert {
            lambda1,
            lambda2,
            verdict: AbsSepVerdict::NotAbsolute,
            gamma_a: None,
            gamma_b: None,
            rank_one: None,
        });
    }
    let layout = *v.layout();
    let (da, db) = (2 * layout.m, 2 * layout.n);
    if lambda1 >= T::one() {
        // V >= 1 = 1_A (+) 1_B
        return Ok(AbsSepCert {
            lambda1,
            lambda2,
            verdict: AbsSepVerdict::AbsolutelySeparable,
            gamma_a: Some(DMatrix::identity(da, da)),
            gamma_b: Some(DMatrix::identity(db, db)),
            rank_one: None,
        });
    }
    // k = lambda1 < 1: build the rank-one certificate from the minimal
    // eigenvector |x> = (sqrt(p)|y>, sqrt(1-p)|z>).
    let k = lambda1;
    let x = eig.vectors.column(0).into_owned();
    let xa = DVector::from_fn(da, |i, _| x[i]);
    let xb = DVector::from_fn(db, |i, _| x[da + i]);
    let p = xa.norm_squared();
    let y = if xa.norm() > T::zero() {
        xa.clone() / xa.norm()
    } else {
        let mut e = DVector::zeros(da.max(1));
        e[0] = T::one();
        e
    };
    let z = if xb.norm() > T::zero() {
        xb.clone() / xb.norm()
    } else {
        let mut e = DVector::zeros(db.max(1));
        e[0] = T::one();
        e
    };
    let gamma_a = rank_one_gamma(k, &y);
    let gamma_b = rank_one_gamma(k, &z);

    // Re-verify the algebraic identity behind the certificate:
    // V_low - gamma_A (+) gamma_B = (1/k - k) w w^T with
    // w = (sqrt(1-p)|y>, -sqrt(p)|z>) and V_low = k|x><x| + (1/k)(1-|x><x|).
    let d = v.dim();
    let xx = &x * x.transpose();
    let v_low = symmetrize(
        &(&xx * k + (DMatrix::<T>::identity(d, d) - &xx) * (T::one() / k)),
    );
    let mut w = DVector::<T>::zeros(d);
    let wa = (T::one() - p).max(T::zero()).sqrt();
    let wp = p.max(T::zero()).sqrt();
    for i in 0..da {
        w[i] = wa * y[i];
    }
    for i in 0..db {
        w[da + i] = -wp * z[i];
    }
    let gsum = crate::symplectic::direct_sum_mat(&gamma_a, &gamma_b);
    let gram = &w * w.transpose() * (T::one() / k - k);
    let identity_resid = fro_norm(&(&v_low - &gsum - gram));
    if identity_resid > tol.alg * scale.max(T::one()) {
        return Err(Error::domain(format!(
            "rank-one certificate identity failed (residual {:.3e})",
            identity_resid.to_f64().unwrap_or(f64::NAN)
        )));
    }
    // Validate the witness inequalities against V itself.
    let diff_min = min_eig_sym(&(v.mat() - &gsum));
    let ga_ok = layout.m == 0 || {
        let la = ModeLayout::single(layout.m, CoordOrdering::ModeWise)?;
        is_qcm(&gamma_a, &la, tol)?.valid
    };
    let gb_ok = layout.n == 0 || {
        let lb = ModeLayout::single(layout.n, CoordOrdering::ModeWise)?;
        is_qcm(&gamma_b, &lb, tol)?.valid
    };
    if diff_min < -tol.verdict * scale || !ga_ok || !gb_ok {
        return Err(Error::domain(format!(
            "absolute-separability witness failed validation (min eig {:.3e})",
            diff_min.to_f64().unwrap_or(f64::NAN)
        )));
    }
    Ok(AbsSepCert {
        lambda1,
        lambda2,
        verdict: AbsSepVerdict::AbsolutelySeparable,
        gamma_a: Some(gamma_a),
        gamma_b: Some(gamma_b),
        rank_one: Some(RankOneData { k, x, y, z, p }),
    })
}

/// Report of a random sweep over the passive orbit of a state.
#[derive(Debug, Clone)]
pub struct OrbitReport<T: Scalar> {
    pub trials: usize,
    /// Trials whose transformed state violated PPT.
    pub non_ppt_trials: Vec<usize>,
    /// Smallest partial-transpose symplectic eigenvalue seen over the orbit.
    pub min_pt_symplectic_eig: T,
    /// Whether the input satisfies the absolute-separability inequality.
    pub absolutely_separable: bool,
    /// Certificate validation failures (must stay zero).
    pub certificate_failures: usize,
}

/// Sample random passive congruences of `v`, checking PPT along the orbit
/// and, when the absolute-separability inequality holds, validating the
/// constructive certificate on every sampled point. Finding no PPT violation
/// is reported, never converted into a separability claim.
pub fn passive_orbit_check<T: Scalar>(
    v: &Qcm<T>,
    trials: usize,
    seed: u64,
    tol: &Tolerances<T>,
) -> Result<OrbitReport<T>> {
    let validity = v.validity(tol);
    if !validity.valid {
        return Err(Error::InvalidQcm(
            validity.min_eig.to_f64().unwrap_or(f64::NAN),
        ));
    }
    let n = v.layout().modes();
    let eig = sym_eigen(v.mat());
    let abs_sep = eig.values[0] * eig.values[1] >= T::one() - tol.verdict;
    let mut non_ppt = Vec::new();
    let mut cert_failures = 0usize;
    let mut min_nu = T::max_value().unwrap_or_else(T::one);
    for trial in 0..trials {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(trial as u64 + 1);
        let k = {
            let (re, im) = haar_unitary_f64(&mut rng, n);
            let u_re = re.map(|x| lit::<T>(x));
            let u_im = im.map(|x| lit::<T>(x));
            PassiveTransform {
                k: passive_k_mode_wise(&u_re, &u_im),
                u_re,
                u_im,
            }
        };
        let w = k.apply(v)?;
        let pt = w.partial_transpose();
        let nus = pt.symplectic_spectrum(tol)?;
        let nu_min = *nus.last().expect("modes >= 1");
        if nu_min < min_nu {
            min_nu = nu_min;
        }
        if nu_min < T::one() - tol.verdict {
            non_ppt.push(trial);
        }
        if abs_sep && absolute_separability(&w, tol).is_err() {
            cert_failures += 1;
        }
    }
    Ok(OrbitReport {
        trials,
        non_ppt_trials: non_ppt,
        min_pt_symplectic_eig: min_nu,
        absolutely_separable: abs_sep,
        certificate_failures: cert_failures,
    })
}

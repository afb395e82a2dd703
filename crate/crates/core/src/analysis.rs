//! Schur complements and matrix means on real symmetric matrices.
//!
//! Hermitian inputs are handled by callers through realification (see
//! [`crate::linalg::Herm`]); realification commutes with inverses, square
//! roots and therefore with every mean computed here, so the real symmetric
//! case is the only one needed.

use nalgebra::DMatrix;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::linalg::{
    fro_norm, min_eig_sym, spectral_norm_sym, sym_inverse, sym_pow, symmetrize,
};
use crate::scalar::{lit, Scalar};

/// Split index dividing a square matrix into blocks `[[A, X], [X^T, B]]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BlockPartition {
    pub d_a: usize,
}

impl BlockPartition {
    pub fn new(d_a: usize, dim: usize) -> Result<Self> {
        if d_a == 0 || d_a >= dim {
            return Err(Error::domain(format!(
                "split index {d_a} must satisfy 1 <= d_a < {dim}"
            )));
        }
        Ok(BlockPartition { d_a })
    }
}

/// Schur complement `M/A = B - X^T (A + eps I)^{-1} X` of a symmetric matrix.
///
/// A leading block that is singular within the `psd` band (relative to the
/// whole matrix) is a conditioning error when `eps == 0`; callers retry with
/// a positive regularization.
pub fn schur_complement<T: Scalar>(
    m: &DMatrix<T>,
    partition: BlockPartition,
    eps: T,
    tol: &Tolerances<T>,
) -> Result<DMatrix<T>> {
    let dim = m.nrows();
    if dim != m.ncols() {
        return Err(Error::NotSquare(dim, m.ncols()));
    }
    BlockPartition::new(partition.d_a, dim)?;
    let da = partition.d_a;
    let db = dim - da;
    let m = symmetrize(m);
    let mut a = m.view((0, 0), (da, da)).into_owned();
    for i in 0..da {
        a[(i, i)] += eps;
    }
    let x = m.view((0, da), (da, db)).into_owned();
    let b = m.view((da, da), (db, db)).into_owned();
    // Inverting eigenvalues below the psd band of the whole matrix
    // amplifies rounding noise (the block was formed at the scale of `m`);
    // demand a retry with regularization instead.
    let a_eigs = crate::linalg::sym_eigen(&a).values;
    let floor = tol.psd * spectral_norm_sym(&m);
    if a_eigs.iter().any(|l| l.abs() < floor) {
        return Err(Error::Conditioning {
            what: "schur_complement: leading block singular within the psd band",
            min_eig: a_eigs[0].to_f64().unwrap_or(f64::NAN),
        });
    }
    let a_inv = sym_inverse(&a, T::zero(), "schur_complement leading block")?.mat;
    Ok(symmetrize(&(b - x.transpose() * a_inv * x)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Positivity {
    PositiveDefinite,
    PositiveSemidefinite,
    Indefinite,
}

/// Classify a symmetric matrix through its Schur complement: `H > 0` iff
/// `A > 0` and `H/A > 0`; semidefiniteness via the epsilon-regularized
/// complement evaluated at `eps = psd_band * ||H||`.
pub fn positivity_via_schur<T: Scalar>(
    h: &DMatrix<T>,
    partition: BlockPartition,
    tol: &Tolerances<T>,
) -> Result<Positivity> {
    let dim = h.nrows();
    BlockPartition::new(partition.d_a, dim)?;
    let h = symmetrize(h);
    let scale = spectral_norm_sym(&h).max(T::one());
    let band = tol.psd * scale;
    let da = partition.d_a;
    let a = h.view((0, 0), (da, da)).into_owned();
    let a_min = min_eig_sym(&a);
    if a_min > band {
        if let Ok(s) = schur_complement(&h, partition, T::zero()) {
            if min_eig_sym(&s) > band {
                return Ok(Positivity::PositiveDefinite);
            }
        }
    }
    if a_min >= -band {
        let s_eps = schur_complement(&h, partition, band)?;
        if min_eig_sym(&s_eps) >= -band {
            return Ok(Positivity::PositiveSemidefinite);
        }
    }
    Ok(Positivity::Indefinite)
}

/// `(A + B) / 2`.
pub fn arithmetic_mean<T: Scalar>(a: &DMatrix<T>, b: &DMatrix<T>) -> DMatrix<T> {
    symmetrize(&((a + b) * lit::<T>(0.5)))
}

fn require_positive<T: Scalar>(m: &DMatrix<T>, tol: &Tolerances<T>, who: &str) -> Result<()> {
    let scale = spectral_norm_sym(m).max(T::one());
    let min = min_eig_sym(m);
    if min < -tol.psd * scale {
        return Err(Error::domain(format!(
            "{who}: input is not positive (min eigenvalue {:.3e})",
            min.to_f64().unwrap_or(f64::NAN)
        )));
    }
    Ok(())
}

/// Harmonic mean `A ! B = ((A^{-1} + B^{-1}) / 2)^{-1}`. Inputs within the
/// `psd` band of singular are floored before inversion.
pub fn harmonic_mean<T: Scalar>(
    a: &DMatrix<T>,
    b: &DMatrix<T>,
    tol: &Tolerances<T>,
) -> Result<DMatrix<T>> {
    require_positive(a, tol, "harmonic_mean")?;
    require_positive(b, tol, "harmonic_mean")?;
    let ai = sym_inverse(a, tol.psd, "harmonic_mean inverse")?.mat;
    let bi = sym_inverse(b, tol.psd, "harmonic_mean inverse")?.mat;
    let avg = arithmetic_mean(&ai, &bi);
    Ok(symmetrize(
        &sym_inverse(&avg, tol.psd, "harmonic_mean outer inverse")?.mat,
    ))
}

/// Geometric mean `A # B = A^{1/2} (A^{-1/2} B A^{-1/2})^{1/2} A^{1/2}`.
pub fn geometric_mean<T: Scalar>(
    a: &DMatrix<T>,
    b: &DMatrix<T>,
    tol: &Tolerances<T>,
) -> Result<DMatrix<T>> {
    require_positive(a, tol, "geometric_mean")?;
    require_positive(b, tol, "geometric_mean")?;
    let sq = sym_pow(a, 0.5, tol.psd, "geometric_mean sqrt")?.mat;
    let isq = sym_pow(a, -0.5, tol.psd, "geometric_mean inverse sqrt")?.mat;
    let inner = symmetrize(&(&isq * b * &isq));
    let mid = sym_pow(&inner, 0.5, tol.psd, "geometric_mean inner sqrt")?.mat;
    Ok(symmetrize(&(&sq * mid * &sq)))
}

/// Frobenius residual of the identity `A # B = ((A+B)/2) # (A ! B)`.
pub fn mean_identity_check<T: Scalar>(
    a: &DMatrix<T>,
    b: &DMatrix<T>,
    tol: &Tolerances<T>,
) -> Result<T> {
    let g = geometric_mean(a, b, tol)?;
    let lhs = arithmetic_mean(a, b);
    let rhs = harmonic_mean(a, b, tol)?;
    let g2 = geometric_mean(&lhs, &rhs, tol)?;
    Ok(fro_norm(&(g - g2)))
}

/// Property-test utility for the variational characterization of the Schur
/// complement: `H/A` is the supremum of all `B~` with `H > 0 (+) B~`.
///
/// For `trials` random draws it checks that matrices strictly below the
/// complement are admissible and matrices strictly above are not. Returns
/// whether every trial passed.
pub fn schur_is_supremum_check<T: Scalar>(
    h: &DMatrix<T>,
    partition: BlockPartition,
    trials: usize,
    seed: u64,
    tol: &Tolerances<T>,
) -> Result<bool> {
    let dim = h.nrows();
    let da = partition.d_a;
    let db = dim - da;
    let h = symmetrize(h);
    let scale = spectral_norm_sym(&h).max(T::one());
    if min_eig_sym(&h.view((0, 0), (da, da)).into_owned()) <= tol.psd * scale {
        return Err(Error::domain(
            "schur_is_supremum_check: leading block must be positive definite",
        ));
    }
    let s = schur_complement(&h, partition, T::zero())?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let delta = lit::<T>(1e-3) * scale;
    let embed = |btilde: &DMatrix<T>| {
        let mut full = DMatrix::<T>::zeros(dim, dim);
        full.view_mut((da, da), (db, db)).copy_from(btilde);
        full
    };
    for _ in 0..trials {
        let g = DMatrix::<T>::from_fn(db, db, |_, _| lit(rng.random_range(-1.0..1.0)));
        let psd = symmetrize(&(&g * g.transpose()));
        let norm = spectral_norm_sym(&psd).max(lit(1e-12));
        let p = psd / norm;

        let below = &s - DMatrix::<T>::identity(db, db) * delta - &p * delta;
        let ok_below = min_eig_sym(&(&h - embed(&below))) > T::zero();
        let above = &s + &p * delta;
        let ok_above = min_eig_sym(&(&h - embed(&above))) < tol.psd * scale;
        if !(ok_below && ok_above) {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::sym_eigen;

    type M = DMatrix<f64>;

    fn tol() -> Tolerances<f64> {
        Tolerances::default()
    }

    fn part(d_a: usize) -> BlockPartition {
        BlockPartition { d_a }
    }

    fn random_spd(rng: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64) -> M {
        // Q diag(u) Q^T with u in [lo, hi]
        let g = M::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
        let q = g.qr().q();
        let d = M::from_diagonal(&nalgebra::DVector::from_fn(n, |_, _| {
            rng.random_range(lo..hi)
        }));
        symmetrize(&(&q * d * q.transpose()))
    }

    #[test]
    fn schur_basic_examples() {
        let m = M::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 1.0]);
        let s = schur_complement(&m, part(1), 0.0).unwrap();
        assert!((s[(0, 0)] - 0.5).abs() < 1e-14);

        // block diagonal: M/A = B exactly
        let bd = M::from_row_slice(4, 4, &[
            2.0, 0.3, 0.0, 0.0, //
            0.3, 1.0, 0.0, 0.0, //
            0.0, 0.0, 3.0, 0.1, //
            0.0, 0.0, 0.1, 1.5,
        ]);
        let s = schur_complement(&bd, part(2), 0.0).unwrap();
        assert!((s - bd.view((2, 2), (2, 2)).into_owned()).norm() < 1e-14);
    }

    #[test]
    fn schur_singular_block_errors_then_eps_succeeds() {
        let m = M::from_row_slice(2, 2, &[0.0, 0.0, 0.0, 1.0]);
        assert!(schur_complement(&m, part(1), 0.0).is_err());
        let s = schur_complement(&m, part(1), 1e-6).unwrap();
        assert!((s[(0, 0)] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn harmonic_mean_is_schur_of_stacked_block() {
        // The parallel sum A - A(A+B)^{-1}A = [[A, A], [A, A+B]] / (A+B) is
        // half the harmonic mean of Eq-(7) normalization; checked on random
        // SPD pairs.
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..20 {
            let n = 3;
            let a = random_spd(&mut rng, n, 0.2, 3.0);
            let b = random_spd(&mut rng, n, 0.2, 3.0);
            let mut stacked = M::zeros(2 * n, 2 * n);
            stacked.view_mut((0, 0), (n, n)).copy_from(&a);
            stacked.view_mut((0, n), (n, n)).copy_from(&a);
            stacked.view_mut((n, 0), (n, n)).copy_from(&a);
            stacked.view_mut((n, n), (n, n)).copy_from(&(&a + &b));
            // reorder so that the (A+B) block leads, then take the complement
            let perm: Vec<usize> = (n..2 * n).chain(0..n).collect();
            let re = M::from_fn(2 * n, 2 * n, |i, j| stacked[(perm[i], perm[j])]);
            let viaschur = schur_complement(&re, part(n), 0.0).unwrap();
            let hm = harmonic_mean(&a, &b, &tol()).unwrap();
            assert!((viaschur * 2.0 - hm).norm() < 1e-10);
        }
    }

    #[test]
    fn positivity_classification_examples() {
        assert_eq!(
            positivity_via_schur(&M::identity(2, 2), part(1), &tol()).unwrap(),
            Positivity::PositiveDefinite
        );
        let rank1 = M::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        assert_eq!(
            positivity_via_schur(&rank1, part(1), &tol()).unwrap(),
            Positivity::PositiveSemidefinite
        );
        let indef = M::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert_eq!(
            positivity_via_schur(&indef, part(1), &tol()).unwrap(),
            Positivity::Indefinite
        );
    }

    #[test]
    fn means_scalar_and_commuting_cases() {
        let a = M::identity(2, 2);
        let b = M::identity(2, 2) * 3.0;
        let h = harmonic_mean(&a, &b, &tol()).unwrap();
        assert!((h - M::identity(2, 2) * 1.5).norm() < 1e-12);

        let d1 = M::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, 4.0]));
        let d2 = M::from_diagonal(&nalgebra::DVector::from_vec(vec![4.0, 1.0]));
        let g = geometric_mean(&d1, &d2, &tol()).unwrap();
        assert!((g - M::identity(2, 2) * 2.0).norm() < 1e-10);
    }

    #[test]
    fn geometric_mean_of_inverse_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a = random_spd(&mut rng, 4, 0.3, 4.0);
        let ai = sym_inverse(&a, 0.0, "test").unwrap().mat;
        let g = geometric_mean(&a, &ai, &tol()).unwrap();
        assert!((g - M::identity(4, 4)).norm() < 1e-9);
    }

    #[test]
    fn geometric_mean_riccati_property() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..10 {
            let a = random_spd(&mut rng, 3, 0.2, 3.0);
            let b = random_spd(&mut rng, 3, 0.2, 3.0);
            let g = geometric_mean(&a, &b, &tol()).unwrap();
            let bi = sym_inverse(&b, 0.0, "test").unwrap().mat;
            let resid = (&g * bi * &g - &a).norm();
            assert!(resid < 1e-9 * a.norm().max(1.0), "residual {resid:.3e}");
        }
    }

    #[test]
    fn mean_ordering_chain() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let a = random_spd(&mut rng, 4, 0.2, 4.0);
            let b = random_spd(&mut rng, 4, 0.2, 4.0);
            let s = spectral_norm_sym(&a) + spectral_norm_sym(&b);
            let h = harmonic_mean(&a, &b, &tol()).unwrap();
            let g = geometric_mean(&a, &b, &tol()).unwrap();
            let m = arithmetic_mean(&a, &b);
            assert!(min_eig_sym(&(&g - &h)) > -1e-8 * s);
            assert!(min_eig_sym(&(&m - &g)) > -1e-8 * s);
        }
    }

    #[test]
    fn mean_identity_scalar_and_matrix() {
        // scalars: sqrt(1*4) = 2 = sqrt(2.5 * 1.6)
        let a = M::from_element(1, 1, 1.0);
        let b = M::from_element(1, 1, 4.0);
        let resid = mean_identity_check(&a, &b, &tol()).unwrap();
        assert!(resid < 1e-12);
        let g = geometric_mean(&a, &b, &tol()).unwrap();
        assert!((g[(0, 0)] - 2.0).abs() < 1e-12);

        let id = M::identity(3, 3);
        assert!(mean_identity_check(&id, &id, &tol()).unwrap() < 1e-13);

        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..20 {
            let a = random_spd(&mut rng, 5, 0.1, 5.0);
            let b = random_spd(&mut rng, 5, 0.1, 5.0);
            let g = geometric_mean(&a, &b, &tol()).unwrap();
            let resid = mean_identity_check(&a, &b, &tol()).unwrap();
            assert!(resid < 1e-8 * g.norm(), "residual {resid:.3e}");
        }
    }

    #[test]
    fn congruence_covariance_of_geometric_mean() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10 {
            let a = random_spd(&mut rng, 3, 0.2, 3.0);
            let b = random_spd(&mut rng, 3, 0.2, 3.0);
            let mmat = M::from_fn(3, 3, |_, _| rng.random_range(-1.0..1.0))
                + M::identity(3, 3) * 1.5;
            let lhs = &mmat * geometric_mean(&a, &b, &tol()).unwrap() * mmat.transpose();
            let rhs = geometric_mean(
                &symmetrize(&(&mmat * &a * mmat.transpose())),
                &symmetrize(&(&mmat * &b * mmat.transpose())),
                &tol(),
            )
            .unwrap();
            let scale = lhs.norm().max(1.0);
            assert!((lhs - rhs).norm() < 1e-8 * scale);
        }
    }

    #[test]
    fn supremum_check_runs() {
        let h = M::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 1.0]);
        assert!(schur_is_supremum_check(&h, part(1), 50, 9, &tol()).unwrap());
        // spec boundary example: H - 0 (+) 0.5 is singular PSD
        let shifted = &h - M::from_diagonal(&nalgebra::DVector::from_vec(vec![0.0, 0.5]));
        let eig = sym_eigen(&shifted);
        assert!(eig.values[0].abs() < 1e-12);
        assert!(eig.values[1] > 0.0);

        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for _ in 0..5 {
            let h = random_spd(&mut rng, 4, 0.3, 3.0);
            assert!(schur_is_supremum_check(&h, part(2), 20, 11, &tol()).unwrap());
        }
    }

    #[test]
    fn means_reject_non_positive() {
        let indef = M::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(harmonic_mean(&indef, &M::identity(2, 2), &tol()).is_err());
        assert!(geometric_mean(&M::identity(2, 2), &indef, &tol()).is_err());
    }
}

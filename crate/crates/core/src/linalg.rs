//! Real symmetric eigen-helpers and realified Hermitian matrices.
//!
//! The whole crate runs on real symmetric eigendecompositions. A complex
//! Hermitian matrix `H = Re + i*Im` is handled through its realification
//! `[[Re, -Im], [Im, Re]]`, a real symmetric matrix of twice the dimension
//! whose spectrum repeats each eigenvalue of `H` twice. Realification is an
//! algebra homomorphism, so inverses and matrix functions commute with it.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::scalar::{lit, Scalar};

/// `(M + M^T) / 2`.
pub fn symmetrize<T: Scalar>(m: &DMatrix<T>) -> DMatrix<T> {
    let half: T = lit(0.5);
    let mut out = m.transpose();
    out += m;
    out *= half;
    out
}

/// `(M - M^T) / 2`.
pub fn antisymmetrize<T: Scalar>(m: &DMatrix<T>) -> DMatrix<T> {
    let half: T = lit(0.5);
    let mut out = m.clone();
    out -= m.transpose();
    out *= half;
    out
}

pub fn max_abs_entry<T: Scalar>(m: &DMatrix<T>) -> T {
    m.iter().fold(T::zero(), |acc, &x| acc.max(x.abs()))
}

pub fn symmetry_deviation<T: Scalar>(m: &DMatrix<T>) -> T {
    max_abs_entry(&(m - m.transpose()))
}

/// Eigendecomposition of a symmetric matrix, eigenvalues ascending.
pub struct SymEigen<T: Scalar> {
    pub values: DVector<T>,
    /// Column `j` is the unit eigenvector of `values[j]`.
    pub vectors: DMatrix<T>,
}

pub fn sym_eigen<T: Scalar>(m: &DMatrix<T>) -> SymEigen<T> {
    let n = m.nrows();
    let se = symmetrize(m).symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        se.eigenvalues[a]
            .partial_cmp(&se.eigenvalues[b])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let values = DVector::from_fn(n, |i, _| se.eigenvalues[order[i]]);
    let mut vectors = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &se.eigenvectors.column(src));
    }
    SymEigen { values, vectors }
}

/// Spectral norm of a symmetric matrix (max |eigenvalue|).
pub fn spectral_norm_sym<T: Scalar>(m: &DMatrix<T>) -> T {
    if m.nrows() == 0 {
        return T::zero();
    }
    let eig = sym_eigen(m);
    eig.values[0]
        .abs()
        .max(eig.values[m.nrows() - 1].abs())
}

pub fn min_eig_sym<T: Scalar>(m: &DMatrix<T>) -> T {
    if m.nrows() == 0 {
        return T::zero();
    }
    sym_eigen(m).values[0]
}

pub fn fro_norm<T: Scalar>(m: &DMatrix<T>) -> T {
    m.iter()
        .fold(T::zero(), |acc, &x| acc + x * x)
        .sqrt()
}

/// Rebuild `sum f(lambda_j) v_j v_j^T` from an eigendecomposition.
fn apply_spectral<T: Scalar>(eig: &SymEigen<T>, f: impl Fn(T) -> T) -> DMatrix<T> {
    let n = eig.values.len();
    let scaled = DMatrix::from_fn(n, n, |i, j| eig.vectors[(i, j)] * f(eig.values[j]));
    let out = &scaled * eig.vectors.transpose();
    symmetrize(&out)
}

/// Projection onto the PSD cone: negative eigenvalues clamped to zero.
pub fn psd_part<T: Scalar>(m: &DMatrix<T>) -> DMatrix<T> {
    let eig = sym_eigen(m);
    if eig.values[0] >= T::zero() {
        return symmetrize(m);
    }
    apply_spectral(&eig, |l| l.max(T::zero()))
}

/// `psd_part(M) - M`; positive semidefinite, zero iff `M` is PSD.
pub fn neg_part<T: Scalar>(m: &DMatrix<T>) -> DMatrix<T> {
    let eig = sym_eigen(m);
    apply_spectral(&eig, |l| (-l).max(T::zero()))
}

/// Outcome of a spectral matrix function with an eigenvalue floor.
pub struct SymFnOutcome<T: Scalar> {
    pub mat: DMatrix<T>,
    /// Number of eigenvalues that were raised to the floor.
    pub floored: usize,
}

/// `M^p` for symmetric `M` via eigendecomposition, flooring eigenvalues at
/// `rel_floor * ||M||` first. With `rel_floor == 0` a non-positive eigenvalue
/// is a conditioning error for non-integer or negative powers.
pub fn sym_pow<T: Scalar>(
    m: &DMatrix<T>,
    p: f64,
    rel_floor: T,
    what: &'static str,
) -> Result<SymFnOutcome<T>> {
    let eig = sym_eigen(m);
    let n = eig.values.len();
    let scale = if n == 0 {
        T::zero()
    } else {
        eig.values[0].abs().max(eig.values[n - 1].abs())
    };
    let floor = rel_floor * scale;
    // Inverses and fractional powers need strictly positive eigenvalues.
    let needs_floor = p < 0.0 || p.fract() != 0.0;
    let mut floored = 0usize;
    let mut vals = eig.values.clone();
    for v in vals.iter_mut() {
        if needs_floor && (*v < floor || *v <= T::zero()) {
            if floor > T::zero() {
                *v = floor;
                floored += 1;
            } else {
                return Err(Error::Conditioning {
                    what,
                    min_eig: v.to_f64().unwrap_or(f64::NAN),
                });
            }
        }
    }
    let pt: T = lit(p);
    let fixed = SymEigen {
        values: vals,
        vectors: eig.vectors,
    };
    let mat = apply_spectral(&fixed, |l| l.powf(pt));
    Ok(SymFnOutcome { mat, floored })
}

pub fn sym_inverse<T: Scalar>(
    m: &DMatrix<T>,
    rel_floor: T,
    what: &'static str,
) -> Result<SymFnOutcome<T>> {
    sym_pow(m, -1.0, rel_floor, what)
}

pub fn sym_sqrt<T: Scalar>(
    m: &DMatrix<T>,
    rel_floor: T,
    what: &'static str,
) -> Result<SymFnOutcome<T>> {
    sym_pow(m, 0.5, rel_floor, what)
}

/// Hermitian matrix stored as a (real, imaginary) pair.
///
/// `re` is kept symmetric and `im` antisymmetric; `H = re + i*im`.
#[derive(Debug, Clone, PartialEq)]
pub struct Herm<T: Scalar> {
    re: DMatrix<T>,
    im: DMatrix<T>,
}

impl<T: Scalar> Herm<T> {
    pub fn new(re: DMatrix<T>, im: DMatrix<T>) -> Self {
        assert_eq!(re.nrows(), re.ncols());
        assert_eq!(re.nrows(), im.nrows());
        assert_eq!(im.nrows(), im.ncols());
        Herm {
            re: symmetrize(&re),
            im: antisymmetrize(&im),
        }
    }

    pub fn from_real(re: DMatrix<T>) -> Self {
        let n = re.nrows();
        Herm::new(re, DMatrix::zeros(n, n))
    }

    pub fn zeros(n: usize) -> Self {
        Herm {
            re: DMatrix::zeros(n, n),
            im: DMatrix::zeros(n, n),
        }
    }

    pub fn dim(&self) -> usize {
        self.re.nrows()
    }

    pub fn re(&self) -> &DMatrix<T> {
        &self.re
    }

    pub fn im(&self) -> &DMatrix<T> {
        &self.im
    }

    /// Complex conjugate: `im -> -im`.
    pub fn conj(&self) -> Self {
        Herm {
            re: self.re.clone(),
            im: -self.im.clone(),
        }
    }

    pub fn max_im_entry(&self) -> T {
        max_abs_entry(&self.im)
    }

    /// `[[re, -im], [im, re]]`, real symmetric of twice the dimension.
    pub fn realify(&self) -> DMatrix<T> {
        let d = self.dim();
        let mut out = DMatrix::zeros(2 * d, 2 * d);
        out.view_mut((0, 0), (d, d)).copy_from(&self.re);
        out.view_mut((d, d), (d, d)).copy_from(&self.re);
        out.view_mut((0, d), (d, d)).copy_from(&(-self.im.clone()));
        out.view_mut((d, 0), (d, d)).copy_from(&self.im);
        out
    }

    /// Inverse of the map [`Herm::realify`]; averages the redundant blocks.
    pub fn from_realified(r: &DMatrix<T>) -> Self {
        let d = r.nrows() / 2;
        let half: T = lit(0.5);
        let re = (r.view((0, 0), (d, d)) + r.view((d, d), (d, d))) * half;
        let im = (r.view((d, 0), (d, d)) - r.view((0, d), (d, d))) * half;
        Herm::new(re, im)
    }

    pub fn min_eig(&self) -> T {
        min_eig_sym(&self.realify())
    }

    pub fn spectral_norm(&self) -> T {
        spectral_norm_sym(&self.realify())
    }

    /// `H^{-1}` through the realified inverse.
    pub fn inverse(&self, rel_floor: T, what: &'static str) -> Result<Herm<T>> {
        let inv = sym_inverse(&self.realify(), rel_floor, what)?;
        Ok(Herm::from_realified(&inv.mat))
    }

    /// Congruence `X H X^T` by a real (possibly rectangular) matrix.
    pub fn congruence(&self, x: &DMatrix<T>) -> Herm<T> {
        let re = x * &self.re * x.transpose();
        let im = x * &self.im * x.transpose();
        Herm::new(re, im)
    }

    pub fn add(&self, other: &Herm<T>) -> Herm<T> {
        Herm {
            re: &self.re + &other.re,
            im: &self.im + &other.im,
        }
    }

    pub fn sub(&self, other: &Herm<T>) -> Herm<T> {
        Herm {
            re: &self.re - &other.re,
            im: &self.im - &other.im,
        }
    }

    pub fn scale(&self, s: T) -> Herm<T> {
        Herm {
            re: self.re.clone() * s,
            im: self.im.clone() * s,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    type M = DMatrix<f64>;

    #[test]
    fn eigen_sorted_and_reconstructs() {
        let m = M::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        let eig = sym_eigen(&m);
        assert!((eig.values[0] + 1.0).abs() < 1e-12);
        assert!((eig.values[1] - 3.0).abs() < 1e-12);
        let rebuilt = apply_spectral(&eig, |l| l);
        assert!(fro_norm(&(rebuilt - m)) < 1e-12);
    }

    #[test]
    fn psd_part_clamps() {
        let m = M::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        let p = psd_part(&m);
        assert!(min_eig_sym(&p) > -1e-13);
        // psd_part(m) - m is PSD as well
        assert!(min_eig_sym(&(p - m)) > -1e-13);
    }

    #[test]
    fn inverse_errors_on_singular_without_floor() {
        let m = M::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]);
        assert!(sym_inverse(&m, 0.0, "test").is_err());
        let floored = sym_inverse(&m, 1e-9, "test").unwrap();
        assert_eq!(floored.floored, 1);
    }

    #[test]
    fn realified_hermitian_spectrum_doubles() {
        // H = [[1, i], [-i, 1]] has eigenvalues {0, 2}
        let re = M::identity(2, 2);
        let im = M::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]);
        let h = Herm::new(re, im);
        let eig = sym_eigen(&h.realify());
        for (i, want) in [(0, 0.0), (1, 0.0), (2, 2.0), (3, 2.0)] {
            assert!((eig.values[i] - want).abs() < 1e-12);
        }
    }

    #[test]
    fn herm_inverse_round_trip() {
        let re = M::from_row_slice(2, 2, &[2.0, 0.3, 0.3, 1.5]);
        let im = M::from_row_slice(2, 2, &[0.0, 0.4, -0.4, 0.0]);
        let h = Herm::new(re, im);
        let hinv = h.inverse(0.0, "test").unwrap();
        // realify(h) * realify(hinv) = identity
        let prod = h.realify() * hinv.realify();
        assert!(fro_norm(&(prod - M::identity(4, 4))) < 1e-12);
    }
}

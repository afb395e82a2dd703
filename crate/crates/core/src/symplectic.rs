//! Canonical-operator bookkeeping: mode layouts, symplectic forms, quantum
//! covariance matrices (QCMs), Williamson decompositions, symplectic spectra,
//! partial transposition and state constructors.
//!
//! The canonical internal ordering is mode-wise, `(x1, p1, x2, p2, ...)`,
//! with party A occupying the first `m` modes. The alternative
//! position-momentum ordering `(x1, ..., xN, p1, ..., pN)` is supported for
//! interchange and for the algorithms that are naturally expressed in it.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::linalg::{
    antisymmetrize, min_eig_sym, spectral_norm_sym, sym_eigen, sym_pow, symmetrize,
    symmetry_deviation, Herm,
};
use crate::scalar::{lit, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CoordOrdering {
    /// `(x1, p1, x2, p2, ...)`
    ModeWise,
    /// `(x1, ..., xN, p1, ..., pN)`
    PositionMomentum,
}

/// Mode partition of a bipartite system: party A holds the first `m` modes,
/// party B the remaining `n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ModeLayout {
    pub m: usize,
    pub n: usize,
    pub ordering: CoordOrdering,
}

impl ModeLayout {
    pub fn new(m: usize, n: usize, ordering: CoordOrdering) -> Result<Self> {
        if m + n == 0 {
            return Err(Error::EmptyLayout);
        }
        Ok(ModeLayout { m, n, ordering })
    }

    pub fn mode_wise(m: usize, n: usize) -> Result<Self> {
        ModeLayout::new(m, n, CoordOrdering::ModeWise)
    }

    /// Single-party layout (no B side).
    pub fn single(modes: usize, ordering: CoordOrdering) -> Result<Self> {
        ModeLayout::new(modes, 0, ordering)
    }

    pub fn modes(&self) -> usize {
        self.m + self.n
    }

    pub fn dim(&self) -> usize {
        2 * self.modes()
    }

    pub fn with_ordering(&self, ordering: CoordOrdering) -> ModeLayout {
        ModeLayout { ordering, ..*self }
    }

    pub fn with_split(&self, m: usize, n: usize) -> Result<ModeLayout> {
        if m + n != self.modes() {
            return Err(Error::DimensionMismatch {
                expected: self.modes(),
                got: m + n,
            });
        }
        ModeLayout::new(m, n, self.ordering)
    }

    /// Coordinate indices of party A in this ordering.
    pub fn a_indices(&self) -> Vec<usize> {
        let nt = self.modes();
        match self.ordering {
            CoordOrdering::ModeWise => (0..2 * self.m).collect(),
            CoordOrdering::PositionMomentum => {
                (0..self.m).chain(nt..nt + self.m).collect()
            }
        }
    }

    pub fn b_indices(&self) -> Vec<usize> {
        let nt = self.modes();
        match self.ordering {
            CoordOrdering::ModeWise => (2 * self.m..2 * nt).collect(),
            CoordOrdering::PositionMomentum => {
                (self.m..nt).chain(nt + self.m..2 * nt).collect()
            }
        }
    }

    /// Gather map for converting a vector indexed in this ordering to
    /// `target`: entry `i` of the converted object comes from `perm[i]`.
    pub fn conversion_from(&self, target: CoordOrdering) -> Vec<usize> {
        let nt = self.modes();
        if self.ordering == target {
            return (0..2 * nt).collect();
        }
        match target {
            // self is PositionMomentum, target ModeWise
            CoordOrdering::ModeWise => (0..2 * nt)
                .map(|i| if i % 2 == 0 { i / 2 } else { nt + i / 2 })
                .collect(),
            // self is ModeWise, target PositionMomentum
            CoordOrdering::PositionMomentum => (0..2 * nt)
                .map(|i| if i < nt { 2 * i } else { 2 * (i - nt) + 1 })
                .collect(),
        }
    }

    /// The symplectic form for this layout's ordering.
    pub fn omega<T: Scalar>(&self) -> DMatrix<T> {
        let nt = self.modes();
        let d = 2 * nt;
        let one = T::one();
        let mut out = DMatrix::zeros(d, d);
        match self.ordering {
            CoordOrdering::ModeWise => {
                for j in 0..nt {
                    out[(2 * j, 2 * j + 1)] = one;
                    out[(2 * j + 1, 2 * j)] = -one;
                }
            }
            CoordOrdering::PositionMomentum => {
                for j in 0..nt {
                    out[(j, nt + j)] = one;
                    out[(nt + j, j)] = -one;
                }
            }
        }
        out
    }

    /// Party A's symplectic form, in this ordering restricted to A.
    pub fn omega_a<T: Scalar>(&self) -> DMatrix<T> {
        ModeLayout {
            m: self.m,
            n: 0,
            ordering: self.ordering,
        }
        .omega()
    }

    pub fn omega_b<T: Scalar>(&self) -> DMatrix<T> {
        ModeLayout {
            m: self.n,
            n: 0,
            ordering: self.ordering,
        }
        .omega()
    }
}

/// Single-mode momentum flip `diag(1, -1)` (mode-wise coordinates).
pub fn zeta<T: Scalar>() -> DMatrix<T> {
    DMatrix::from_diagonal(&DVector::from_vec(vec![T::one(), -T::one()]))
}

/// The diagonal +-1 mask implementing partial transposition on party B.
#[derive(Debug, Clone)]
pub struct PartialTransposeMask<T: Scalar> {
    pub layout: ModeLayout,
    signs: DVector<T>,
}

impl<T: Scalar> PartialTransposeMask<T> {
    pub fn new(layout: ModeLayout) -> Self {
        let nt = layout.modes();
        let one = T::one();
        let signs = DVector::from_fn(2 * nt, |i, _| {
            let (mode, is_momentum) = match layout.ordering {
                CoordOrdering::ModeWise => (i / 2, i % 2 == 1),
                CoordOrdering::PositionMomentum => (i % nt, i >= nt),
            };
            if is_momentum && mode >= layout.m {
                -one
            } else {
                one
            }
        });
        PartialTransposeMask { layout, signs }
    }

    pub fn matrix(&self) -> DMatrix<T> {
        DMatrix::from_diagonal(&self.signs)
    }

    /// `Theta_B M Theta_B`; exact (sign flips only).
    pub fn apply(&self, m: &DMatrix<T>) -> DMatrix<T> {
        DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| {
            m[(i, j)] * self.signs[i] * self.signs[j]
        })
    }
}

/// Outcome of the Heisenberg validity check `V + i*Omega >= 0`.
#[derive(Debug, Clone, Copy)]
pub struct Validity<T: Scalar> {
    pub valid: bool,
    /// Minimum eigenvalue of the realified `V + i*Omega`.
    pub min_eig: T,
}

/// Check whether a real symmetric matrix is a valid quantum covariance
/// matrix for the given layout. Non-symmetric input is rejected.
pub fn is_qcm<T: Scalar>(
    mat: &DMatrix<T>,
    layout: &ModeLayout,
    tol: &Tolerances<T>,
) -> Result<Validity<T>> {
    if mat.nrows() != mat.ncols() {
        return Err(Error::NotSquare(mat.nrows(), mat.ncols()));
    }
    if mat.nrows() != layout.dim() {
        return Err(Error::DimensionMismatch {
            expected: layout.dim(),
            got: mat.nrows(),
        });
    }
    let scale = spectral_norm_sym(mat);
    let dev = symmetry_deviation(mat);
    if dev > tol.alg * scale.max(T::one()) {
        return Err(Error::NotSymmetric(dev.to_f64().unwrap_or(f64::NAN)));
    }
    let h = Herm::new(mat.clone(), layout.omega());
    let min_eig = h.min_eig();
    Ok(Validity {
        valid: min_eig >= -tol.psd * scale,
        min_eig,
    })
}

/// A quantum covariance matrix with a declared mode partition.
///
/// Construction symmetrizes the matrix and requires positive definiteness
/// within the `psd` band; it does not force the Heisenberg relation, which
/// is checked separately by [`Qcm::validity`].
#[derive(Debug, Clone, PartialEq)]
pub struct Qcm<T: Scalar> {
    layout: ModeLayout,
    mat: DMatrix<T>,
}

impl<T: Scalar> Qcm<T> {
    pub fn new(layout: ModeLayout, mat: DMatrix<T>, tol: &Tolerances<T>) -> Result<Self> {
        if mat.nrows() != mat.ncols() {
            return Err(Error::NotSquare(mat.nrows(), mat.ncols()));
        }
        if mat.nrows() != layout.dim() {
            return Err(Error::DimensionMismatch {
                expected: layout.dim(),
                got: mat.nrows(),
            });
        }
        let mat = symmetrize(&mat);
        let scale = spectral_norm_sym(&mat);
        let min_eig = min_eig_sym(&mat);
        if min_eig < -tol.psd * scale {
            return Err(Error::NotPositive(min_eig.to_f64().unwrap_or(f64::NAN)));
        }
        Ok(Qcm { layout, mat })
    }

    pub fn layout(&self) -> &ModeLayout {
        &self.layout
    }

    pub fn mat(&self) -> &DMatrix<T> {
        &self.mat
    }

    pub fn dim(&self) -> usize {
        self.layout.dim()
    }

    /// Spectral norm of the matrix; the reference scale for relative bands.
    pub fn scale(&self) -> T {
        spectral_norm_sym(&self.mat)
    }

    /// Re-partition the same matrix into `m` vs `n` modes.
    pub fn with_split(&self, m: usize, n: usize) -> Result<Qcm<T>> {
        Ok(Qcm {
            layout: self.layout.with_split(m, n)?,
            mat: self.mat.clone(),
        })
    }

    /// Convert to the target ordering by the exact conversion permutation.
    /// Round trips are bit-exact.
    pub fn to_ordering(&self, target: CoordOrdering) -> Qcm<T> {
        if self.layout.ordering == target {
            return self.clone();
        }
        let perm = self.layout.conversion_from(target);
        let d = self.dim();
        let mat = DMatrix::from_fn(d, d, |i, j| self.mat[(perm[i], perm[j])]);
        Qcm {
            layout: self.layout.with_ordering(target),
            mat,
        }
    }

    fn gather(&self, rows: &[usize], cols: &[usize]) -> DMatrix<T> {
        DMatrix::from_fn(rows.len(), cols.len(), |i, j| self.mat[(rows[i], cols[j])])
    }

    /// Party A's marginal block `V_A`.
    pub fn block_a(&self) -> DMatrix<T> {
        let idx = self.layout.a_indices();
        self.gather(&idx, &idx)
    }

    pub fn block_b(&self) -> DMatrix<T> {
        let idx = self.layout.b_indices();
        self.gather(&idx, &idx)
    }

    /// Off-diagonal coupling block `X` (A rows, B columns).
    pub fn block_x(&self) -> DMatrix<T> {
        self.gather(&self.layout.a_indices(), &self.layout.b_indices())
    }

    pub fn validity(&self, tol: &Tolerances<T>) -> Validity<T> {
        is_qcm(&self.mat, &self.layout, tol).expect("stored matrix is symmetric")
    }

    /// Swap the two parties; B's modes come first in the result.
    pub fn swap_parties(&self) -> Qcm<T> {
        let mw = self.to_ordering(CoordOrdering::ModeWise);
        let idx: Vec<usize> = mw
            .layout
            .b_indices()
            .into_iter()
            .chain(mw.layout.a_indices())
            .collect();
        let d = mw.dim();
        let mat = DMatrix::from_fn(d, d, |i, j| mw.mat[(idx[i], idx[j])]);
        let layout = ModeLayout {
            m: self.layout.n,
            n: self.layout.m,
            ordering: CoordOrdering::ModeWise,
        };
        Qcm { layout, mat }
        .to_ordering(self.layout.ordering)
    }

    pub fn partial_transpose(&self) -> Qcm<T> {
        let mask = PartialTransposeMask::new(self.layout);
        Qcm {
            layout: self.layout,
            mat: mask.apply(&self.mat),
        }
    }

    pub fn is_ppt(&self, tol: &Tolerances<T>) -> Result<PptVerdict<T>> {
        is_ppt(self, tol)
    }

    pub fn symplectic_spectrum(&self, tol: &Tolerances<T>) -> Result<Vec<T>> {
        symplectic_spectrum(&self.mat, &self.layout, tol)
    }

    pub fn williamson(&self, tol: &Tolerances<T>) -> Result<WilliamsonDecomposition<T>> {
        let mw = self.to_ordering(CoordOrdering::ModeWise);
        williamson(&mw.mat, tol)
    }
}

/// Direct sum of two QCMs; the left operand becomes party A.
pub fn direct_sum<T: Scalar>(a: &Qcm<T>, b: &Qcm<T>, tol: &Tolerances<T>) -> Result<Qcm<T>> {
    let a = a.to_ordering(CoordOrdering::ModeWise);
    let b = b.to_ordering(CoordOrdering::ModeWise);
    let layout = ModeLayout::mode_wise(a.layout().modes(), b.layout().modes())?;
    let mat = direct_sum_mat(a.mat(), b.mat());
    Qcm::new(layout, mat, tol)
}

pub fn direct_sum_mat<T: Scalar>(a: &DMatrix<T>, b: &DMatrix<T>) -> DMatrix<T> {
    let (da, db) = (a.nrows(), b.nrows());
    let mut out = DMatrix::zeros(da + db, da + db);
    out.view_mut((0, 0), (da, da)).copy_from(a);
    out.view_mut((da, da), (db, db)).copy_from(b);
    out
}

/// Symplectic spectrum of a positive matrix: the moduli of the paired
/// eigenvalues of `i * Omega * V`, each distinct pair reported once, in
/// non-increasing order.
pub fn symplectic_spectrum<T: Scalar>(
    mat: &DMatrix<T>,
    layout: &ModeLayout,
    tol: &Tolerances<T>,
) -> Result<Vec<T>> {
    let scale = spectral_norm_sym(mat);
    let min_eig = min_eig_sym(mat);
    if min_eig <= tol.psd * scale {
        return Err(Error::NotPositive(min_eig.to_f64().unwrap_or(f64::NAN)));
    }
    let sqrt = sym_pow(mat, 0.5, T::zero(), "symplectic_spectrum sqrt")?.mat;
    let omega: DMatrix<T> = layout.omega();
    let a = antisymmetrize(&(&sqrt * omega * &sqrt));
    // -A^2 is PSD with eigenvalues nu_j^2, each doubled.
    let m2 = symmetrize(&(a.transpose() * &a));
    let eig = sym_eigen(&m2);
    let k = layout.modes();
    let half: T = lit(0.5);
    let mut nus: Vec<T> = (0..k)
        .map(|i| ((eig.values[2 * i] + eig.values[2 * i + 1]) * half).max(T::zero()).sqrt())
        .collect();
    nus.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    Ok(nus)
}

/// Williamson normal form: a symplectic `S` and symplectic eigenvalues `nu`
/// (non-increasing) with `S V S^T = diag(nu_1, nu_1, ..., nu_k, nu_k)` in
/// mode-wise ordering and `S Omega S^T = Omega`.
#[derive(Debug, Clone)]
pub struct WilliamsonDecomposition<T: Scalar> {
    pub s: DMatrix<T>,
    pub nu: Vec<T>,
}

impl<T: Scalar> WilliamsonDecomposition<T> {
    /// `diag(nu_1, nu_1, ..., nu_k, nu_k)`.
    pub fn normal_form(&self) -> DMatrix<T> {
        let k = self.nu.len();
        DMatrix::from_diagonal(&DVector::from_fn(2 * k, |i, _| self.nu[i / 2]))
    }
}

/// Compute the Williamson decomposition of a positive matrix given in
/// mode-wise ordering, via the antisymmetric eigenproblem of
/// `V^{-1/2} Omega V^{-1/2}`.
pub fn williamson<T: Scalar>(
    mat: &DMatrix<T>,
    tol: &Tolerances<T>,
) -> Result<WilliamsonDecomposition<T>> {
    let d = mat.nrows();
    if d != mat.ncols() {
        return Err(Error::NotSquare(d, mat.ncols()));
    }
    if d % 2 != 0 {
        return Err(Error::Domain(format!("odd dimension {d}")));
    }
    let k = d / 2;
    let layout = ModeLayout::single(k, CoordOrdering::ModeWise)?;
    let scale = spectral_norm_sym(mat);
    let min_eig = min_eig_sym(mat);
    if min_eig < tol.psd * scale {
        return Err(Error::Conditioning {
            what: "williamson",
            min_eig: min_eig.to_f64().unwrap_or(f64::NAN),
        });
    }
    let isqrt = sym_pow(mat, -0.5, T::zero(), "williamson inverse sqrt")?.mat;
    let omega: DMatrix<T> = layout.omega();
    // Antisymmetric M with eigenvalues +-i/nu_j.
    let m_anti = antisymmetrize(&(&isqrt * &omega * &isqrt));
    let m2 = symmetrize(&(m_anti.transpose() * &m_anti));
    let eig = sym_eigen(&m2);

    // Group (approximately) degenerate eigenvalues; each group has even size
    // and is M-invariant. Pairs are extracted inside each group so that
    // degenerate subspaces are orthonormalized consistently.
    let m2_scale = eig.values[d - 1].abs().max(T::zero());
    let gap: T = lit::<T>(1e-6) * m2_scale.max(T::one() * lit(1e-300));
    let mut groups: Vec<(usize, usize)> = Vec::new(); // [start, end)
    let mut start = 0usize;
    for i in 1..d {
        if eig.values[i] - eig.values[i - 1] > gap && (i - start) % 2 == 0 {
            groups.push((start, i));
            start = i;
        }
    }
    groups.push((start, d));

    let mut q = DMatrix::<T>::zeros(d, d);
    let mut mus: Vec<T> = Vec::with_capacity(k);
    let mut col = 0usize;
    for &(lo, hi) in &groups {
        let size = hi - lo;
        debug_assert!(size % 2 == 0);
        // Orthonormal basis of the group subspace.
        let mut basis = DMatrix::<T>::zeros(d, size);
        for (j, idx) in (lo..hi).enumerate() {
            basis.set_column(j, &eig.vectors.column(idx));
        }
        // M restricted to the subspace, in basis coordinates.
        let m_local = antisymmetrize(&(basis.transpose() * &m_anti * &basis));
        let mut taken: Vec<DVector<T>> = Vec::with_capacity(size);
        while taken.len() < size {
            // Deterministic seed: the basis vector least represented so far.
            let mut best = 0usize;
            let mut best_norm = -T::one();
            for cand in 0..size {
                let mut v = DVector::<T>::zeros(size);
                v[cand] = T::one();
                for t in &taken {
                    let c = t.dot(&v);
                    v -= t * c;
                }
                let n = v.norm();
                if n > best_norm {
                    best_norm = n;
                    best = cand;
                }
            }
            let mut u = DVector::<T>::zeros(size);
            u[best] = T::one();
            for t in &taken {
                let c = t.dot(&u);
                u -= t * c;
            }
            u /= u.norm();
            let mut w = &m_local * &u;
            for t in &taken {
                let c = t.dot(&w);
                w -= t * c;
            }
            let c = u.dot(&w);
            w -= &u * c;
            let mu = w.norm();
            if mu <= T::zero() {
                return Err(Error::Conditioning {
                    what: "williamson pairing",
                    min_eig: mu.to_f64().unwrap_or(f64::NAN),
                });
            }
            w /= mu;
            // Column order (w, u) yields the block [[0, mu], [-mu, 0]].
            let wg = &basis * &w;
            let ug = &basis * &u;
            q.set_column(col, &wg);
            q.set_column(col + 1, &ug);
            col += 2;
            mus.push(mu);
            taken.push(w);
            taken.push(u);
        }
    }

    // nu = 1/mu; groups were scanned in ascending mu order, so nu comes out
    // non-increasing, but re-sort pairs to be safe.
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| mus[a].partial_cmp(&mus[b]).unwrap_or(std::cmp::Ordering::Equal));
    let mut q_sorted = DMatrix::<T>::zeros(d, d);
    let mut nu: Vec<T> = Vec::with_capacity(k);
    for (dst, &srcm) in order.iter().enumerate() {
        nu.push(T::one() / mus[srcm]);
        q_sorted.set_column(2 * dst, &q.column(2 * srcm));
        q_sorted.set_column(2 * dst + 1, &q.column(2 * srcm + 1));
    }

    let dhalf = DMatrix::from_diagonal(&DVector::from_fn(d, |i, _| nu[i / 2].sqrt()));
    let s = &dhalf * q_sorted.transpose() * &isqrt;
    Ok(WilliamsonDecomposition { s, nu })
}

/// Outcome of the PPT test.
#[derive(Debug, Clone, Copy)]
pub struct PptVerdict<T: Scalar> {
    pub ppt: bool,
    /// Smallest symplectic eigenvalue of the partial transpose.
    pub min_pt_symplectic_eig: T,
    /// For Gaussian states, distillability is exactly PPT violation.
    pub distillable: bool,
}

/// PPT iff the partial transpose satisfies the Heisenberg relation, i.e.
/// its smallest symplectic eigenvalue is at least one (within the verdict
/// band). Invalid states are rejected.
pub fn is_ppt<T: Scalar>(v: &Qcm<T>, tol: &Tolerances<T>) -> Result<PptVerdict<T>> {
    let validity = v.validity(tol);
    if !validity.valid {
        return Err(Error::InvalidQcm(
            validity.min_eig.to_f64().unwrap_or(f64::NAN),
        ));
    }
    let spec = v.partial_transpose().symplectic_spectrum(tol)?;
    let min_nu = *spec.last().expect("at least one mode");
    let ppt = min_nu >= T::one() - tol.verdict;
    Ok(PptVerdict {
        ppt,
        min_pt_symplectic_eig: min_nu,
        distillable: !ppt,
    })
}

/// Squeezing parameters of a two-mode squeezed vacuum state.
#[derive(Debug, Clone, Copy)]
pub struct TmsvParams<T: Scalar> {
    pub r: T,
    pub c: T,
    pub s: T,
}

impl<T: Scalar> TmsvParams<T> {
    pub fn from_r(r: T) -> Self {
        let two: T = lit(2.0);
        TmsvParams {
            r,
            c: (two * r).cosh(),
            s: (two * r).sinh(),
        }
    }
}

/// Two-mode squeezed vacuum QCM `[[c I, s zeta], [s zeta, c I]]` in
/// mode-wise ordering (1 vs 1 modes).
pub fn tmsv<T: Scalar>(r: T) -> Qcm<T> {
    let p = TmsvParams::from_r(r);
    let layout = ModeLayout::mode_wise(1, 1).expect("1+1 modes");
    let mut mat = DMatrix::zeros(4, 4);
    for i in 0..4 {
        mat[(i, i)] = p.c;
    }
    mat[(0, 2)] = p.s;
    mat[(2, 0)] = p.s;
    mat[(1, 3)] = -p.s;
    mat[(3, 1)] = -p.s;
    Qcm { layout, mat }
}

/// Thermal state `nu * I` on `modes` modes (single-party layout; use
/// [`Qcm::with_split`] to declare a bipartition).
pub fn thermal<T: Scalar>(nu: T, modes: usize) -> Result<Qcm<T>> {
    if nu < T::one() {
        return Err(Error::domain(format!(
            "thermal symplectic eigenvalue must be >= 1, got {:?}",
            nu.to_f64()
        )));
    }
    let layout = ModeLayout::single(modes, CoordOrdering::ModeWise)?;
    Ok(Qcm {
        layout,
        mat: DMatrix::identity(2 * modes, 2 * modes) * nu,
    })
}

/// Purity selector for [`random_qcm`].
#[derive(Debug, Clone, Copy)]
pub enum Purity<T: Scalar> {
    Pure,
    Mixed { nu_max: T },
}

/// Deterministic random QCM: a Williamson form with symplectic spectrum
/// drawn in `[1, nu_max]` conjugated by an Euler-style symplectic
/// `K1 * diag(squeezers) * K2` built from Haar-random passive
/// transformations.
pub fn random_qcm<T: Scalar>(
    seed: u64,
    layout: ModeLayout,
    purity: Purity<T>,
    squeeze_max: f64,
) -> Qcm<T> {
    assert!(squeeze_max >= 0.0, "squeeze_max must be non-negative");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nt = layout.modes();
    let d = 2 * nt;
    let nu: Vec<f64> = (0..nt)
        .map(|_| match purity {
            Purity::Pure => 1.0,
            Purity::Mixed { nu_max } => {
                let hi = nu_max.to_f64().unwrap_or(1.0).max(1.0);
                rng.random_range(1.0..=hi)
            }
        })
        .collect();
    let r: Vec<f64> = (0..nt)
        .map(|_| {
            if squeeze_max == 0.0 {
                0.0
            } else {
                rng.random_range(-squeeze_max..=squeeze_max)
            }
        })
        .collect();
    let k1 = crate::passive::haar_passive_mode_wise::<T>(&mut rng, nt);
    let k2 = crate::passive::haar_passive_mode_wise::<T>(&mut rng, nt);
    let z = DMatrix::<T>::from_diagonal(&DVector::from_fn(d, |i, _| {
        let rj = r[i / 2];
        lit(if i % 2 == 0 { rj.exp() } else { (-rj).exp() })
    }));
    let n_form = DMatrix::<T>::from_diagonal(&DVector::from_fn(d, |i, _| lit(nu[i / 2])));
    let s = &k1 * z * k2;
    let mat = symmetrize(&(&s * n_form * s.transpose()));
    Qcm {
        layout: layout.with_ordering(CoordOrdering::ModeWise),
        mat,
    }
    .to_ordering(layout.ordering)
}

#[cfg(test)]
mod tests {
    use super::*;

    type M = DMatrix<f64>;
    const TOL: f64 = 1e-12;

    fn tol() -> Tolerances<f64> {
        Tolerances::default()
    }

    #[test]
    fn omega_single_mode() {
        let l = ModeLayout::mode_wise(1, 0).unwrap();
        let w: M = l.omega();
        assert_eq!(w, M::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]));
        // single mode: orderings coincide
        let lpm = ModeLayout::new(0, 1, CoordOrdering::PositionMomentum).unwrap();
        let wpm: M = lpm.omega();
        assert_eq!(wpm, M::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]));
    }

    #[test]
    fn omega_pm_block_form() {
        let l = ModeLayout::new(1, 1, CoordOrdering::PositionMomentum).unwrap();
        let w: M = l.omega();
        let want = M::from_row_slice(
            4,
            4,
            &[
                0.0, 0.0, 1.0, 0.0, //
                0.0, 0.0, 0.0, 1.0, //
                -1.0, 0.0, 0.0, 0.0, //
                0.0, -1.0, 0.0, 0.0,
            ],
        );
        assert_eq!(w, want);
    }

    #[test]
    fn omega_properties() {
        for (m, n, ord) in [
            (2, 1, CoordOrdering::ModeWise),
            (2, 3, CoordOrdering::PositionMomentum),
        ] {
            let l = ModeLayout::new(m, n, ord).unwrap();
            let w: M = l.omega();
            assert!((w.transpose() + &w).norm() < TOL);
            let w2 = &w * &w;
            assert!((w2 + M::identity(l.dim(), l.dim())).norm() < TOL);
        }
    }

    #[test]
    fn omega_consistent_under_reorder() {
        let l = ModeLayout::mode_wise(2, 1).unwrap();
        let w_mw: M = l.omega();
        let perm = l.conversion_from(CoordOrdering::PositionMomentum);
        let d = l.dim();
        let permuted = M::from_fn(d, d, |i, j| w_mw[(perm[i], perm[j])]);
        let w_pm: M = l.with_ordering(CoordOrdering::PositionMomentum).omega();
        assert_eq!(permuted, w_pm);
    }

    #[test]
    fn reorder_round_trip_bit_exact() {
        let v = random_qcm::<f64>(
            11,
            ModeLayout::mode_wise(2, 2).unwrap(),
            Purity::Mixed { nu_max: 2.0 },
            0.7,
        );
        let back = v
            .to_ordering(CoordOrdering::PositionMomentum)
            .to_ordering(CoordOrdering::ModeWise);
        assert_eq!(v.mat(), back.mat());
        let id = Qcm::new(
            ModeLayout::mode_wise(1, 1).unwrap(),
            M::identity(4, 4),
            &tol(),
        )
        .unwrap();
        assert_eq!(
            id.to_ordering(CoordOrdering::PositionMomentum).mat(),
            &M::identity(4, 4)
        );
    }

    #[test]
    fn reorder_preserves_symplectic_spectrum() {
        let v = tmsv(1.0f64);
        let s_mw = v.symplectic_spectrum(&tol()).unwrap();
        let s_pm = v
            .to_ordering(CoordOrdering::PositionMomentum)
            .symplectic_spectrum(&tol())
            .unwrap();
        for (a, b) in s_mw.iter().zip(&s_pm) {
            assert!((a - b).abs() < 1e-10);
            assert!((a - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn is_qcm_identity_valid() {
        let l = ModeLayout::mode_wise(1, 1).unwrap();
        let v = is_qcm(&M::identity(4, 4), &l, &tol()).unwrap();
        assert!(v.valid);
        assert!(v.min_eig.abs() < 1e-12);
        let bad = is_qcm(&(M::identity(4, 4) * 0.5), &l, &tol()).unwrap();
        assert!(!bad.valid);
        assert!((bad.min_eig + 0.5).abs() < 1e-12);
    }

    #[test]
    fn is_qcm_rejects_non_symmetric() {
        let l = ModeLayout::mode_wise(1, 0).unwrap();
        let m = M::from_row_slice(2, 2, &[1.0, 0.5, 0.0, 1.0]);
        assert!(matches!(is_qcm(&m, &l, &tol()), Err(Error::NotSymmetric(_))));
    }

    #[test]
    fn tmsv_is_valid_and_pure() {
        let v = tmsv(1.0f64);
        assert!(v.validity(&tol()).valid);
        let spec = v.symplectic_spectrum(&tol()).unwrap();
        assert_eq!(spec.len(), 2);
        for nu in spec {
            assert!((nu - 1.0).abs() < 1e-10);
        }
        // tmsv(0) = identity
        let v0 = tmsv(0.0f64);
        assert!((v0.mat() - M::identity(4, 4)).norm() < TOL);
        // block pattern at r = 0.5: c = cosh 1, s = sinh 1
        let v5 = tmsv(0.5f64);
        let c = 1.0f64.cosh();
        let s = 1.0f64.sinh();
        assert!((v5.mat()[(0, 0)] - c).abs() < TOL);
        assert!((v5.mat()[(0, 2)] - s).abs() < TOL);
        assert!((v5.mat()[(1, 3)] + s).abs() < TOL);
    }

    #[test]
    fn thermal_is_diagonal() {
        let v = thermal(2.0f64, 1).unwrap();
        assert_eq!(v.mat(), &(M::identity(2, 2) * 2.0));
        assert!(thermal(0.5f64, 1).is_err());
    }

    #[test]
    fn spectrum_of_scaled_identity() {
        let l = ModeLayout::mode_wise(2, 1).unwrap();
        let spec = symplectic_spectrum(&(M::identity(6, 6) * 1.7), &l, &tol()).unwrap();
        assert_eq!(spec.len(), 3);
        for nu in spec {
            assert!((nu - 1.7).abs() < 1e-12);
        }
    }

    #[test]
    fn spectrum_of_transposed_tmsv() {
        let v = tmsv(1.0f64).partial_transpose();
        let spec = v.symplectic_spectrum(&tol()).unwrap();
        assert!((spec[0] - (2.0f64).exp()).abs() < 1e-10);
        assert!((spec[1] - (-2.0f64).exp()).abs() < 1e-10);
    }

    #[test]
    fn spectrum_rejects_non_positive() {
        let l = ModeLayout::mode_wise(1, 0).unwrap();
        let m = M::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -0.5]);
        assert!(symplectic_spectrum(&m, &l, &tol()).is_err());
    }

    #[test]
    fn partial_transpose_patterns() {
        let v = tmsv(0.8f64);
        let p = TmsvParams::from_r(0.8f64);
        let pt = v.partial_transpose();
        // off-diagonal block becomes s * I
        assert!((pt.mat()[(0, 2)] - p.s).abs() < TOL);
        assert!((pt.mat()[(1, 3)] - p.s).abs() < TOL);
        // involution, bit exact
        assert_eq!(pt.partial_transpose().mat(), v.mat());
        // ordinary spectrum preserved
        let e1 = sym_eigen(v.mat()).values;
        let e2 = sym_eigen(pt.mat()).values;
        assert!((e1 - e2).norm() < 1e-12);
    }

    #[test]
    fn ppt_verdicts() {
        let ga = thermal(1.5f64, 1).unwrap();
        let gb = thermal(2.0f64, 2).unwrap();
        let v = direct_sum(&ga, &gb, &tol()).unwrap();
        let verdict = v.is_ppt(&tol()).unwrap();
        assert!(verdict.ppt);
        assert!(!verdict.distillable);

        let t = tmsv(1.0f64).is_ppt(&tol()).unwrap();
        assert!(!t.ppt);
        assert!(t.distillable);
        assert!((t.min_pt_symplectic_eig - (-2.0f64).exp()).abs() < 1e-10);

        // tmsv(0) = identity: PPT
        assert!(tmsv(0.0f64).is_ppt(&tol()).unwrap().ppt);

        // invalid inputs rejected
        let bad = Qcm::new(
            ModeLayout::mode_wise(1, 1).unwrap(),
            M::identity(4, 4) * 0.5,
            &tol(),
        )
        .unwrap();
        assert!(matches!(bad.is_ppt(&tol()), Err(Error::InvalidQcm(_))));
    }

    #[test]
    fn partial_transpose_fixes_diagonal_product() {
        let ga = thermal(1.5f64, 1).unwrap();
        let gb = thermal(2.0f64, 1).unwrap();
        let v = direct_sum(&ga, &gb, &tol()).unwrap();
        assert_eq!(v.partial_transpose().mat(), v.mat());
    }

    #[test]
    fn williamson_identity_and_diagonal() {
        let w = williamson(&M::identity(4, 4), &tol()).unwrap();
        assert_eq!(w.nu.len(), 2);
        for nu in &w.nu {
            assert!((nu - 1.0).abs() < 1e-10);
        }
        // S must be orthogonal-symplectic here
        let prod = &w.s * w.s.transpose();
        assert!((prod - M::identity(4, 4)).norm() < 1e-10);

        let w4 = williamson(&(M::identity(2, 2) * 4.0), &tol()).unwrap();
        assert!((w4.nu[0] - 4.0).abs() < 1e-10);
        let v = M::identity(2, 2) * 4.0;
        let rebuilt = &w4.s * &v * w4.s.transpose();
        assert!((rebuilt - w4.normal_form()).norm() < 1e-9);
    }

    #[test]
    fn williamson_round_trip_random() {
        let layout = ModeLayout::mode_wise(2, 1).unwrap();
        for seed in 0..20u64 {
            let v = random_qcm::<f64>(seed, layout, Purity::Mixed { nu_max: 3.0 }, 1.0);
            let scale = v.scale();
            let w = v.williamson(&tol()).unwrap();
            let omega: M = layout.omega();
            let r1 = (&w.s * &omega * w.s.transpose() - &omega).norm();
            let r2 = (&w.s * v.mat() * w.s.transpose() - w.normal_form()).norm();
            assert!(r1 < 1e-8 * scale, "seed {seed}: symplectic residual {r1:.3e}");
            assert!(r2 < 1e-8 * scale, "seed {seed}: normal-form residual {r2:.3e}");
            for nu in &w.nu {
                assert!(*nu >= 1.0 - 1e-8);
            }
        }
    }

    #[test]
    fn williamson_recovers_planted_spectrum() {
        // V = S0 diag(2,2,3,3)^(mode-wise: 3,3,2,2 sorted desc) S0^T
        let layout = ModeLayout::mode_wise(1, 1).unwrap();
        let pure = random_qcm::<f64>(99, layout, Purity::Pure, 0.8);
        // pure QCM = S S^T for some symplectic S; conjugating the normal form
        // by it plants the spectrum
        let n_form = M::from_diagonal(&nalgebra::DVector::from_vec(vec![3.0, 3.0, 2.0, 2.0]));
        let half = sym_pow(pure.mat(), 0.5, 0.0, "test").unwrap().mat;
        // half is symmetric positive; is it symplectic? (S S^T)^{1/2} is
        // symplectic because pure QCMs are symplectic and the square root of
        // a symplectic positive matrix is symplectic.
        let v = symmetrize(&(&half * &n_form * half.transpose()));
        let w = williamson(&v, &tol()).unwrap();
        assert!((w.nu[0] - 3.0).abs() < 1e-8, "nu = {:?}", w.nu);
        assert!((w.nu[1] - 2.0).abs() < 1e-8);
    }

    #[test]
    fn williamson_rejects_singular() {
        let m = M::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 1e-12]);
        assert!(matches!(
            williamson(&m, &tol()),
            Err(Error::Conditioning { .. })
        ));
    }

    #[test]
    fn williamson_handles_degenerate_spectrum() {
        // thermal state with fully degenerate nu = 2 on 3 modes
        let v = thermal(2.0f64, 3).unwrap();
        let w = v.williamson(&tol()).unwrap();
        for nu in &w.nu {
            assert!((nu - 2.0).abs() < 1e-10);
        }
        let omega: M = v.layout().omega();
        assert!((&w.s * &omega * w.s.transpose() - &omega).norm() < 1e-9);
        assert!((&w.s * v.mat() * w.s.transpose() - w.normal_form()).norm() < 1e-9);
    }

    #[test]
    fn random_qcm_is_deterministic_and_valid() {
        let layout = ModeLayout::mode_wise(1, 2).unwrap();
        let a = random_qcm::<f64>(7, layout, Purity::Mixed { nu_max: 3.0 }, 1.5);
        let b = random_qcm::<f64>(7, layout, Purity::Mixed { nu_max: 3.0 }, 1.5);
        assert_eq!(a.mat(), b.mat());
        assert!(a.validity(&tol()).valid);
        // squeeze_max = 0, nu_max = 1: spectrum is all ones
        let c = random_qcm::<f64>(3, layout, Purity::Mixed { nu_max: 1.0 }, 0.0);
        for nu in c.symplectic_spectrum(&tol()).unwrap() {
            assert!((nu - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn pure_random_qcm_satisfies_vovo() {
        let layout = ModeLayout::mode_wise(1, 1).unwrap();
        for seed in 0..10u64 {
            let v = random_qcm::<f64>(seed, layout, Purity::Pure, 1.2);
            let omega: M = layout.omega();
            let prod = v.mat() * &omega * v.mat() * &omega;
            let resid = (prod + M::identity(4, 4)).norm();
            assert!(resid < 1e-8 * v.scale().powi(2), "seed {seed}: {resid:.3e}");
        }
    }

    #[test]
    fn swap_parties_round_trip() {
        let v = random_qcm::<f64>(
            5,
            ModeLayout::mode_wise(1, 2).unwrap(),
            Purity::Mixed { nu_max: 2.0 },
            1.0,
        );
        let sw = v.swap_parties();
        assert_eq!(sw.layout().m, 2);
        assert_eq!(sw.layout().n, 1);
        assert_eq!(sw.swap_parties().mat(), v.mat());
        let s1 = v.symplectic_spectrum(&tol()).unwrap();
        let s2 = sw.symplectic_spectrum(&tol()).unwrap();
        for (a, b) in s1.iter().zip(&s2) {
            assert!((a - b).abs() < 1e-10);
        }
    }
}

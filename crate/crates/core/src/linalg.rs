//! Dense eigenvalue helpers and a small real polynomial type.

use nalgebra::linalg::balancing::balance_parlett_reinsch;
use nalgebra::{ComplexField, DMatrix, DVector, Schur};

use crate::scalar::{cr, Cplx, Real};

const SCHUR_MAX_ITER: usize = 10_000;

/// Eigenvalues of a real square matrix, balanced before the QR sweep.
///
/// Returns `None` when the Schur iteration does not converge.
pub fn real_eigenvalues<T: Real>(m: &DMatrix<T>) -> Option<Vec<Cplx<T>>> {
    let n = m.nrows();
    if n == 0 {
        return Some(Vec::new());
    }
    if n == 1 {
        return Some(vec![cr(m[(0, 0)])]);
    }
    let mut a = m.clone();
    balance_parlett_reinsch(&mut a);
    // Balancing occasionally steers the double-shift sweep into a cycle that
    // the raw matrix avoids.
    for candidate in [&a, m] {
        if let Some(schur) = Schur::try_new(candidate.clone(), T::eps(), SCHUR_MAX_ITER) {
            return Some(schur.complex_eigenvalues().iter().copied().collect());
        }
    }
    // Unshifted-symmetric matrices can make the QR iteration cycle. A fixed
    // Householder similarity breaks the symmetry without moving eigenvalues.
    for attempt in 1..=3 {
        let v = DVector::from_fn(n, |i, _| {
            T::lit((1.3 * i as f64 + 0.7 * attempt as f64).sin() + 1.5)
        });
        let h = DMatrix::identity(n, n) - (&v * v.transpose()) * (T::lit(2.0) / v.norm_squared());
        let b = &h * &a * &h;
        if let Some(schur) = Schur::try_new(b, T::eps(), SCHUR_MAX_ITER) {
            return Some(schur.complex_eigenvalues().iter().copied().collect());
        }
    }
    // Last resort: the single-shift complex iteration, with conjugate pairs
    // made exact afterwards. Hamiltonian quartets ±λ, ±λ̄ can stall it too;
    // a complex diagonal shift breaks that symmetry.
    for candidate in [&a, m] {
        if let Some(ev) = complex_eigenvalues(&candidate.map(cr)) {
            return Some(conjugate_pairs(ev));
        }
    }
    None
}

/// Pairs each eigenvalue of a real matrix with its nearest conjugate and
/// replaces both by their exact conjugate average.
fn conjugate_pairs<T: Real>(mut ev: Vec<Cplx<T>>) -> Vec<Cplx<T>> {
    let scale = ev.iter().fold(T::one(), |s, z| s.max(z.modulus()));
    let mut done = vec![false; ev.len()];
    for i in 0..ev.len() {
        if done[i] {
            continue;
        }
        done[i] = true;
        if ev[i].im.abs() <= T::lit(1e-12) * scale {
            ev[i].im = T::zero();
            continue;
        }
        let target = ev[i].conj();
        let partner = (0..ev.len()).filter(|&j| !done[j]).min_by(|&x, &y| {
            (ev[x] - target)
                .modulus()
                .partial_cmp(&(ev[y] - target).modulus())
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        if let Some(j) = partner {
            done[j] = true;
            let z = (ev[i] + ev[j].conj()) * cr(T::lit(0.5));
            ev[i] = z;
            ev[j] = z.conj();
        }
    }
    ev
}

/// Eigenvalues of a complex square matrix.
///
/// The single-shift sweep can stall on spectra symmetric about the origin,
/// so failed attempts are retried on `M + σI` with a complex `σ`.
pub fn complex_eigenvalues<T: Real>(m: &DMatrix<Cplx<T>>) -> Option<Vec<Cplx<T>>> {
    let n = m.nrows();
    if n == 0 {
        return Some(Vec::new());
    }
    let scale = m
        .iter()
        .fold(T::zero(), |s, x| s.max(x.modulus()))
        .max(T::eps());
    for attempt in 0..=4 {
        let t = T::lit(0.1 * attempt as f64) * scale;
        let sigma = Cplx::new(t, T::lit(0.5) * t);
        let shifted = m + DMatrix::identity(n, n) * sigma;
        if let Some(schur) = Schur::try_new(shifted, T::eps(), SCHUR_MAX_ITER) {
            let (_, t) = schur.unpack();
            return Some((0..n).map(|i| t[(i, i)] - sigma).collect());
        }
    }
    None
}

const SVD_MAX_ITER: usize = 10_000;

/// Orthonormal basis of the numerical null space of `m`.
///
/// Singular values below `rel_tol * max(1, sigma_max)` count as zero.
/// Returns `None` when no decomposition converges.
pub fn null_space<T: Real>(m: &DMatrix<Cplx<T>>, rel_tol: T) -> Option<Vec<DVector<Cplx<T>>>> {
    let n = m.ncols();
    if n == 0 {
        return Some(Vec::new());
    }
    // Pad to square so the SVD returns a full right basis.
    let mut sq = DMatrix::<Cplx<T>>::zeros(n.max(m.nrows()), n);
    sq.view_mut((0, 0), (m.nrows(), n)).copy_from(m);
    if let Some(basis) = svd_null_space(sq.clone(), rel_tol) {
        return Some(basis);
    }
    // The implicit-shift sweep occasionally cycles. With H a Householder
    // reflector, null(m H) = H null(m), so retry on a rotated problem.
    for attempt in 1..=3 {
        let v = DVector::from_fn(n, |i, _| {
            cr(T::lit((0.9 * i as f64 + 1.1 * attempt as f64).cos() + 1.5))
        });
        let h = DMatrix::identity(n, n) - (&v * v.adjoint()) * cr(T::lit(2.0) / v.norm_squared());
        if let Some(basis) = svd_null_space(&sq * &h, rel_tol) {
            return Some(basis.into_iter().map(|x| &h * x).collect());
        }
    }
    None
}

fn svd_null_space<T: Real>(sq: DMatrix<Cplx<T>>, rel_tol: T) -> Option<Vec<DVector<Cplx<T>>>> {
    let svd = nalgebra::SVD::try_new(sq, false, true, T::eps(), SVD_MAX_ITER)?;
    let vt = svd.v_t?;
    let smax = svd
        .singular_values
        .iter()
        .copied()
        .fold(T::zero(), |a, b| a.max(b));
    let cut = rel_tol * smax.max(T::one());
    Some(
        svd.singular_values
            .iter()
            .enumerate()
            .filter(|(_, s)| **s <= cut)
            .map(|(i, _)| vt.row(i).adjoint())
            .collect(),
    )
}

/// Real polynomial with coefficients in ascending powers.
#[derive(Debug, Clone, PartialEq)]
pub struct Poly<T: Real> {
    coef: Vec<T>,
}

impl<T: Real> Poly<T> {
    /// Builds a polynomial from ascending coefficients, trimming zero leading terms.
    pub fn new(mut coef: Vec<T>) -> Self {
        while coef.len() > 1 && coef.last().is_some_and(|c| c.is_zero()) {
            coef.pop();
        }
        if coef.is_empty() {
            coef.push(T::zero());
        }
        Self { coef }
    }

    /// The constant polynomial `a`.
    pub fn constant(a: T) -> Self {
        Self::new(vec![a])
    }

    /// The monic quadratic `(x - a)^2 - b`.
    pub fn shifted_square(a: T, b: T) -> Self {
        Self::new(vec![a * a - b, -(a + a), T::one()])
    }

    /// Ascending coefficients.
    pub fn coefficients(&self) -> &[T] {
        &self.coef
    }

    /// Degree (zero for constants, including the zero polynomial).
    pub fn degree(&self) -> usize {
        self.coef.len() - 1
    }

    /// Product of two polynomials.
    pub fn mul(&self, other: &Self) -> Self {
        let mut out = vec![T::zero(); self.coef.len() + other.coef.len() - 1];
        for (i, a) in self.coef.iter().enumerate() {
            for (j, b) in other.coef.iter().enumerate() {
                out[i + j] += *a * *b;
            }
        }
        Self::new(out)
    }

    /// Sum of two polynomials.
    pub fn add(&self, other: &Self) -> Self {
        let n = self.coef.len().max(other.coef.len());
        let out = (0..n)
            .map(|i| {
                self.coef.get(i).copied().unwrap_or_else(T::zero)
                    + other.coef.get(i).copied().unwrap_or_else(T::zero)
            })
            .collect();
        Self::new(out)
    }

    /// Multiplies every coefficient by `s`.
    pub fn scale(&self, s: T) -> Self {
        Self::new(self.coef.iter().map(|a| *a * s).collect())
    }

    /// Horner evaluation at a complex point.
    pub fn eval(&self, z: Cplx<T>) -> Cplx<T> {
        self.coef
            .iter()
            .rev()
            .fold(cr(T::zero()), |acc, a| acc * z + cr(*a))
    }

    /// All complex roots, from the eigenvalues of the balanced companion matrix.
    pub fn roots(&self) -> Option<Vec<Cplx<T>>> {
        let n = self.degree();
        if n == 0 {
            return Some(Vec::new());
        }
        let lead = self.coef[n];
        let mut comp = DMatrix::<T>::zeros(n, n);
        for i in 1..n {
            comp[(i, i - 1)] = T::one();
        }
        for i in 0..n {
            comp[(i, n - 1)] = -self.coef[i] / lead;
        }
        real_eigenvalues(&comp)
    }
}

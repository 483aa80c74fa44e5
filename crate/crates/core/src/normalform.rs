//! Quadratic Hamiltonian of a multi-fluid mode and its symplectic normal form.
//!
//! Each species contributes two canonical pairs. With coordinates
//! `z = (q, p)` the Hamiltonian is `½ (qᵀ V q + pᵀ M p)` and the flow is
//! `ż = J A z` with `A = diag(V, M)` and `J = [[0, I], [-I, 0]]`. A neutral
//! frequency `ω > 0` with eigenvector `a + i b` of `J A` has the Kreĭn
//! signature `sign(aᵀ J b)`.

use nalgebra::ComplexField as _;
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dispersion::{Coupling, MultiFluidEquilibrium};
use crate::linalg::{null_space, real_eigenvalues};
use crate::scalar::{c, cr, Cplx, Real};
use crate::tolerance::Tolerances;

/// Errors raised while building or reducing a block.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum NormalFormError {
    #[error("wavenumber must be finite and positive, got {0}")]
    InvalidWavenumber(f64),
    #[error("eigenvalue iteration did not converge")]
    EigenFailure,
}

/// The `(V, M)` pair of one Fourier block.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticBlock<T: Real> {
    pub k: T,
    /// Coefficient matrix of the momenta.
    pub momentum: DMatrix<T>,
    /// Coefficient matrix of the positions.
    pub position: DMatrix<T>,
}

impl<T: Real> QuadraticBlock<T> {
    /// Number of degrees of freedom.
    pub fn dof(&self) -> usize {
        self.momentum.nrows()
    }

    /// `A = diag(V, M)`.
    pub fn hessian(&self) -> DMatrix<T> {
        let n = self.dof();
        let mut a = DMatrix::zeros(2 * n, 2 * n);
        a.view_mut((0, 0), (n, n)).copy_from(&self.position);
        a.view_mut((n, n), (n, n)).copy_from(&self.momentum);
        a
    }

    /// `J A`.
    pub fn flow(&self) -> DMatrix<T> {
        symplectic_form::<T>(self.dof()) * self.hessian()
    }
}

/// `J = [[0, I], [-I, 0]]` of size `2n`.
pub fn symplectic_form<T: Real>(n: usize) -> DMatrix<T> {
    let mut j = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        j[(i, n + i)] = T::one();
        j[(n + i, i)] = -T::one();
    }
    j
}

fn field_coefficient<T: Real>(coupling: Coupling, k: T) -> T {
    let k2 = k * k;
    match coupling {
        Coupling::PlasmaShielded => T::one() / (T::one() + k2),
        Coupling::Electrostatic => T::one() / k2,
        Coupling::GravitationalJeans => -T::one() / k2,
        Coupling::Uncoupled => T::zero(),
    }
}

/// Builds the quadratic block at wavenumber `k`.
///
/// Species `α` owns positions `(q_{2α}, q_{2α+1})` and momenta likewise,
/// scaled by `s_α = sqrt(u_α² + |c_α²|)` so that both members of a pair
/// carry comparable weight.
pub fn build_block<T: Real>(
    eq: &MultiFluidEquilibrium<T>,
    k: T,
) -> Result<QuadraticBlock<T>, NormalFormError> {
    if !(k.is_finite() && k > T::zero()) {
        return Err(NormalFormError::InvalidWavenumber(k.to_f64()));
    }
    let sp = eq.species();
    let n = 2 * sp.len();
    let kappa = field_coefficient(eq.coupling(), k);
    let k2 = k * k;
    let scale: Vec<T> = sp
        .iter()
        .map(|s| {
            let v = (s.u * s.u + s.c2.abs()).sqrt();
            if v > T::zero() {
                v
            } else {
                T::one()
            }
        })
        .collect();
    let mut m = DMatrix::zeros(n, n);
    let mut v = DMatrix::zeros(n, n);
    for (a, s) in sp.iter().enumerate() {
        let (i1, i2) = (2 * a, 2 * a + 1);
        let sa = scale[a];
        let stiff = (s.c2 / s.rho + kappa) * sa * k2;
        m[(i1, i1)] = s.rho / sa;
        m[(i1, i2)] = s.u * k;
        m[(i2, i1)] = s.u * k;
        m[(i2, i2)] = stiff;
        v[(i1, i1)] = stiff;
        v[(i1, i2)] = s.u * k;
        v[(i2, i1)] = s.u * k;
        v[(i2, i2)] = s.rho / sa;
        for b in 0..sp.len() {
            if b != a {
                let cross = kappa * k2 * (sa * scale[b]).sqrt();
                m[(i2, 2 * b + 1)] = cross;
                v[(i1, 2 * b)] = cross;
            }
        }
    }
    Ok(QuadraticBlock {
        k,
        momentum: m,
        position: v,
    })
}

/// Overall verdict of a normal-form reduction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NormalFormClass {
    /// All frequencies real and the block diagonalizes symplectically.
    AllStable,
    /// Growing modes are present; `count` eigenvalues have positive real part.
    UnstablePairs { count: usize },
    /// Zero frequency, a Jordan block or a collision of opposite signatures.
    Degenerate,
}

/// One normal-mode degree of freedom.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalMode<T> {
    /// Frequency `ω = iλ`; non-negative real part for neutral modes.
    pub omega: Cplx<T>,
    /// `+1` or `-1` for neutral modes, `0` otherwise.
    pub sigma: i8,
}

/// Result of [`normal_form`].
#[derive(Debug, Clone, PartialEq)]
pub struct NormalFormReport<T: Real> {
    pub k: T,
    pub modes: Vec<NormalMode<T>>,
    pub classification: NormalFormClass,
    /// Columns `(e_Q, e_P)`, present when the block is `AllStable`.
    pub transform: Option<DMatrix<T>>,
    /// `max(|SᵀJS - J|, |SᵀAS - D|)` for the transform.
    pub reconstruction_error: Option<T>,
}

impl<T: Real> NormalFormReport<T> {
    /// Distinct neutral frequencies with signature and multiplicity.
    pub fn grouped(&self, tol: T) -> Vec<(T, i8, usize)> {
        let mut out: Vec<(T, i8, usize)> = Vec::new();
        for m in &self.modes {
            if m.omega.im != T::zero() {
                continue;
            }
            match out
                .iter_mut()
                .find(|g| g.1 == m.sigma && (g.0 - m.omega.re).abs() <= tol)
            {
                Some(g) => g.2 += 1,
                None => out.push((m.omega.re, m.sigma, 1)),
            }
        }
        out
    }
}

/// Groups indices of nearby eigenvalues.
fn clusters<T: Real>(ev: &[Cplx<T>], tol: T) -> Vec<Vec<usize>> {
    let mut group: Vec<usize> = (0..ev.len()).collect();
    fn root(g: &mut [usize], mut i: usize) -> usize {
        while g[i] != i {
            g[i] = g[g[i]];
            i = g[i];
        }
        i
    }
    for i in 0..ev.len() {
        for j in i + 1..ev.len() {
            if (ev[i] - ev[j]).modulus() <= tol * ev[i].modulus().max(T::one()) {
                let (a, b) = (root(&mut group, i), root(&mut group, j));
                group[a] = b;
            }
        }
    }
    let mut out: Vec<Vec<usize>> = Vec::new();
    let mut seen: Vec<usize> = Vec::new();
    for i in 0..ev.len() {
        let r = root(&mut group, i);
        match seen.iter().position(|s| *s == r) {
            Some(p) => out[p].push(i),
            None => {
                seen.push(r);
                out.push(vec![i]);
            }
        }
    }
    out
}

/// Eigenvalues `λ` of `J A`, sorted by imaginary then real part. Neutral
/// modes sit at `λ = ±iω`.
pub fn symplectic_spectrum<T: Real>(
    block: &QuadraticBlock<T>,
) -> Result<Vec<Cplx<T>>, NormalFormError> {
    let mut ev = real_eigenvalues(&block.flow()).ok_or(NormalFormError::EigenFailure)?;
    ev.sort_by(|x, y| {
        x.im.partial_cmp(&y.im)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(x.re.partial_cmp(&y.re).unwrap_or(std::cmp::Ordering::Equal))
    });
    Ok(ev)
}

/// Normal form of a block with default tolerances.
pub fn normal_form<T: Real>(
    block: &QuadraticBlock<T>,
) -> Result<NormalFormReport<T>, NormalFormError> {
    normal_form_with(block, &Tolerances::default())
}

/// Symplectic spectrum, signatures and, when stable, the normalizing transform.
///
/// Eigenvalues are grouped into clusters. For each neutral cluster the
/// eigenspace comes from the null space of `JA - λI`, and the Hermitian form
/// `-i xᴴ J y` is diagonalized on it. A definite form gives the same
/// signature to every member, so genuine multiplicities (several species
/// sharing a frequency) are handled without being mistaken for collisions.
pub fn normal_form_with<T: Real>(
    block: &QuadraticBlock<T>,
    tol: &Tolerances,
) -> Result<NormalFormReport<T>, NormalFormError> {
    let n = block.dof();
    let flow = block.flow();
    let ev = real_eigenvalues(&flow).ok_or(NormalFormError::EigenFailure)?;
    let norm = flow
        .iter()
        .fold(T::zero(), |a, x| a.max(x.abs()))
        .max(T::one());
    let groups = clusters(&ev, T::lit(tol.degenerate));
    let departure = T::lit(tol.departure);
    let zero_tol = T::lit(tol.collision) * norm;

    let j = symplectic_form::<T>(n);
    let jc: DMatrix<Cplx<T>> = j.map(cr);
    let flow_c: DMatrix<Cplx<T>> = flow.map(cr);

    let mut modes = Vec::new();
    let mut growing = 0usize;
    let mut has_zero = false;
    let mut degenerate = false;
    let mut cols_q: Vec<DVector<T>> = Vec::new();
    let mut cols_p: Vec<DVector<T>> = Vec::new();
    let mut diag: Vec<T> = Vec::new();

    for g in &groups {
        let mean = g.iter().fold(cr(T::zero()), |a, i| a + ev[*i]) / cr(T::from_count(g.len()));
        if mean.modulus() <= zero_tol {
            has_zero = true;
            continue;
        }
        if mean.re.abs() > departure * mean.modulus().max(T::one()) {
            if mean.re > T::zero() {
                growing += g.len();
            }
            // Report each growing or decaying eigenvalue with positive frequency part.
            if mean.im >= T::zero() {
                for i in g {
                    modes.push(NormalMode {
                        omega: c(-ev[*i].im, ev[*i].re),
                        sigma: 0,
                    });
                }
            }
            continue;
        }
        if mean.im < T::zero() {
            continue;
        }
        let omega = mean.im;
        let lam = c(T::zero(), omega);
        let shifted = &flow_c - DMatrix::from_diagonal_element(2 * n, 2 * n, lam);
        let basis = null_space(&shifted, T::lit(tol.rank)).ok_or(NormalFormError::EigenFailure)?;
        if basis.len() < g.len() {
            degenerate = true;
            for _ in g {
                modes.push(NormalMode {
                    omega: cr(omega),
                    sigma: 0,
                });
            }
            continue;
        }
        // Hermitian form G = -i Vᴴ J V on the eigenspace.
        let vmat = DMatrix::from_columns(&basis);
        let gform = (vmat.adjoint() * &jc * &vmat) * c(T::zero(), -T::one());
        let herm = (&gform + gform.adjoint()) * cr(T::lit(0.5));
        let eig = herm
            .try_symmetric_eigen(T::eps(), 10_000)
            .ok_or(NormalFormError::EigenFailure)?;
        let gscale = eig
            .eigenvalues
            .iter()
            .fold(T::zero(), |a, x| a.max(x.abs()));
        let signs: Vec<i8> = eig
            .eigenvalues
            .iter()
            .map(|x| {
                if x.abs() <= T::lit(1e-8) * gscale.max(T::eps()) {
                    0
                } else if *x > T::zero() {
                    1
                } else {
                    -1
                }
            })
            .collect();
        let definite = signs.iter().all(|s| *s == signs[0]) && signs[0] != 0;
        if !definite {
            degenerate = true;
        }
        for (idx, s) in signs.iter().enumerate() {
            modes.push(NormalMode {
                omega: cr(omega),
                sigma: if definite { *s } else { 0 },
            });
            if definite {
                let w = &vmat * eig.eigenvectors.column(idx);
                let g_ww = eig.eigenvalues[idx].abs();
                // G(w, w) = 2 aᵀJb; scale so that |aᵀJb| = 1.
                let w = w * cr((T::lit(2.0) / g_ww).sqrt());
                let a = w.map(|z| z.re);
                let b = w.map(|z| z.im);
                diag.push(if *s > 0 { omega } else { -omega });
                if *s > 0 {
                    cols_q.push(a);
                    cols_p.push(b);
                } else {
                    cols_q.push(b);
                    cols_p.push(a);
                }
            }
        }
    }

    modes.sort_by(|x, y| {
        x.omega
            .re
            .partial_cmp(&y.omega.re)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(
                x.omega
                    .im
                    .partial_cmp(&y.omega.im)
                    .unwrap_or(std::cmp::Ordering::Equal),
            )
    });

    let classification = if has_zero {
        NormalFormClass::Degenerate
    } else if growing > 0 {
        NormalFormClass::UnstablePairs { count: growing }
    } else if degenerate {
        NormalFormClass::Degenerate
    } else {
        NormalFormClass::AllStable
    };

    let (transform, reconstruction_error) =
        if classification == NormalFormClass::AllStable && cols_q.len() == n {
            let mut cols = cols_q.clone();
            cols.extend(cols_p.iter().cloned());
            let s = DMatrix::from_columns(&cols);
            let sym_err = (s.transpose() * &j * &s - &j).amax();
            // Sᵀ A S should be diag(σω, σω).
            let mut d = DMatrix::zeros(2 * n, 2 * n);
            for (i, v) in diag.iter().enumerate() {
                d[(i, i)] = *v;
                d[(n + i, n + i)] = *v;
            }
            let sas = s.transpose() * block.hessian() * &s;
            let en_err = (sas - &d).amax();
            (Some(s), Some(sym_err.max(en_err)))
        } else {
            (None, None)
        };

    Ok(NormalFormReport {
        k: block.k,
        modes,
        classification,
        transform,
        reconstruction_error,
    })
}

/// Reads the report in a frame moving at phase `ω*`: every frequency drops by `ω*`.
///
/// Signatures are unchanged. A mode brought to zero frequency makes the
/// shifted report `Degenerate`.
pub fn galilean_shift<T: Real>(
    report: &NormalFormReport<T>,
    omega_star: T,
    tol: &Tolerances,
) -> NormalFormReport<T> {
    let modes: Vec<NormalMode<T>> = report
        .modes
        .iter()
        .map(|m| NormalMode {
            omega: m.omega - cr(omega_star),
            sigma: m.sigma,
        })
        .collect();
    let hits_zero = modes
        .iter()
        .any(|m| m.omega.modulus() <= T::lit(tol.collision));
    let classification = if hits_zero {
        NormalFormClass::Degenerate
    } else {
        report.classification
    };
    NormalFormReport {
        k: report.k,
        modes,
        classification,
        transform: report.transform.clone(),
        reconstruction_error: report.reconstruction_error,
    }
}

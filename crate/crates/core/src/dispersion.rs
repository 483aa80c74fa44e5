//! Dielectric functions of multi-fluid and waterbag equilibria, their
//! discrete roots and the Kreĭn signature of neutral modes.
//!
//! Frequencies follow the `exp(i k x - i ω t)` convention, so a mode with
//! `Im ω > 0` grows.

use nalgebra::ComplexField as _;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{real_eigenvalues, Poly};
use crate::scalar::{c, cr, Cplx, Real};
use crate::tolerance::Tolerances;
use crate::waterbag::WaterbagEquilibrium;
use nalgebra::DMatrix;

/// How the species talk to each other through the mean field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Coupling {
    /// Repulsive electrostatic coupling with a unit shielding length.
    PlasmaShielded,
    /// Repulsive electrostatic coupling without shielding.
    Electrostatic,
    /// Attractive gravitational coupling (Jeans swindle).
    GravitationalJeans,
    /// No mean-field coupling; each species carries plain sound waves.
    Uncoupled,
}

/// One fluid species.
///
/// `c2` is the squared sound speed. It may be negative, which models an
/// exotic fluid with imaginary sound speed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Species<T> {
    pub rho: T,
    pub u: T,
    pub c2: T,
}

impl<T: Real> Species<T> {
    pub fn new(rho: T, u: T, c2: T) -> Self {
        Self { rho, u, c2 }
    }
}

/// A homogeneous multi-fluid equilibrium.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiFluidEquilibrium<T> {
    species: Vec<Species<T>>,
    coupling: Coupling,
}

/// Errors raised by dispersion evaluation and root finding.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum DispersionError {
    #[error("invalid equilibrium: {0}")]
    InvalidEquilibrium(String),
    #[error("wavenumber must be finite and positive, got {0}")]
    InvalidWavenumber(f64),
    #[error("frequency {re}{im:+}i lies on a pole of the dielectric")]
    PoleEvaluation { re: f64, im: f64 },
    #[error("eigenvalue iteration did not converge")]
    EigenFailure,
    #[error("frequency is not a root: residual {residual:e}")]
    NotARoot { residual: f64 },
    #[error("the cleared dispersion polynomial vanishes identically")]
    DegenerateSystem,
}

impl<T: Real> MultiFluidEquilibrium<T> {
    /// Validates and builds an equilibrium.
    pub fn new(species: Vec<Species<T>>, coupling: Coupling) -> Result<Self, DispersionError> {
        if species.is_empty() {
            return Err(DispersionError::InvalidEquilibrium("no species".into()));
        }
        for (i, s) in species.iter().enumerate() {
            let finite = s.rho.is_finite() && s.u.is_finite() && s.c2.is_finite();
            if !finite || s.rho <= T::zero() {
                return Err(DispersionError::InvalidEquilibrium(format!(
                    "species {i} needs finite values and positive density"
                )));
            }
        }
        Ok(Self { species, coupling })
    }

    /// Symmetric counter-streaming cold plasma: two half-density beams at `±u_e`.
    pub fn counterstream(u_e: T) -> Self {
        let half = T::lit(0.5);
        Self {
            species: vec![
                Species::new(half, u_e, T::zero()),
                Species::new(half, -u_e, T::zero()),
            ],
            coupling: Coupling::PlasmaShielded,
        }
    }

    /// Two gravitating streams in the scaled Jeans units.
    ///
    /// The first fluid has unit sound speed, half density and velocity
    /// `u_plus`. The second has density `beta / 2`, velocity `-c * u_minus`
    /// and sound speed `c`, so the dispersion relation reads
    /// `1 + 1/(2((ω-k u+)² - k²)) + β/(2((ω+k c u-)² - k² c²)) = 0`.
    pub fn jeans_scaled(
        u_plus: T,
        u_minus: T,
        beta: T,
        c_ratio: T,
    ) -> Result<Self, DispersionError> {
        let half = T::lit(0.5);
        Self::new(
            vec![
                Species::new(half, u_plus, T::one()),
                Species::new(half * beta, -c_ratio * u_minus, c_ratio * c_ratio),
            ],
            Coupling::GravitationalJeans,
        )
    }

    /// A single uncoupled fluid at rest with sound speed `c_s`.
    pub fn sound(rho: T, c_s: T) -> Result<Self, DispersionError> {
        Self::new(
            vec![Species::new(rho, T::zero(), c_s * c_s)],
            Coupling::Uncoupled,
        )
    }

    pub fn species(&self) -> &[Species<T>] {
        &self.species
    }

    pub fn coupling(&self) -> Coupling {
        self.coupling
    }

    /// Mutable access for parameter sweeps. Callers must keep densities positive.
    pub fn species_mut(&mut self) -> &mut [Species<T>] {
        &mut self.species
    }

    /// Shielding term and sign of the coupling sum.
    fn field(&self, k: T) -> (T, T) {
        match self.coupling {
            Coupling::PlasmaShielded => (T::one() / (k * k), -T::one()),
            Coupling::Electrostatic => (T::zero(), -T::one()),
            Coupling::GravitationalJeans => (T::zero(), T::one()),
            Coupling::Uncoupled => (T::zero(), T::zero()),
        }
    }
}

/// A dielectric family: either fluid species or a waterbag.
#[derive(Debug, Clone, PartialEq)]
pub enum DispersionFamily<T: Real> {
    MultiFluid(MultiFluidEquilibrium<T>),
    Waterbag(WaterbagEquilibrium<T>),
}

impl<T: Real> From<MultiFluidEquilibrium<T>> for DispersionFamily<T> {
    fn from(e: MultiFluidEquilibrium<T>) -> Self {
        Self::MultiFluid(e)
    }
}

impl<T: Real> From<WaterbagEquilibrium<T>> for DispersionFamily<T> {
    fn from(e: WaterbagEquilibrium<T>) -> Self {
        Self::Waterbag(e)
    }
}

/// Kreĭn signature of a neutral mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Signature {
    Positive,
    Negative,
    Marginal,
}

impl Signature {
    /// Signature from a mode energy with a marginal band.
    pub fn from_energy<T: Real>(energy: T, marginal: T) -> Self {
        if energy.abs() < marginal {
            Self::Marginal
        } else if energy > T::zero() {
            Self::Positive
        } else {
            Self::Negative
        }
    }

    /// `+1`, `-1` or `0`.
    pub fn as_i8(self) -> i8 {
        match self {
            Self::Positive => 1,
            Self::Negative => -1,
            Self::Marginal => 0,
        }
    }
}

/// Complex frequency `ω_R + iγ`.
pub type ComplexFrequency<T> = Cplx<T>;

/// A discrete root of the dielectric.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeRecord<T: Real> {
    pub k: T,
    pub omega: ComplexFrequency<T>,
    /// Kreĭn signature; `Marginal` for complex roots and roots on a pole.
    pub signature: Signature,
    /// Wave energy `±ω ∂ε/∂ω` for neutral modes away from poles (see
    /// [`mode_energy_derivative`]).
    pub energy: Option<T>,
    /// `|ε(ω)|` after polishing, or the numerator backward error for roots on a pole.
    pub residual: T,
    /// The root coincides with a pole: it belongs to a decoupled factor.
    pub near_pole: bool,
}

impl<T: Real> ModeRecord<T> {
    /// Whether the mode sits on the real axis.
    pub fn is_neutral(&self) -> bool {
        self.omega.im == T::zero()
    }
}

fn check_k<T: Real>(k: T) -> Result<(), DispersionError> {
    if k.is_finite() && k > T::zero() {
        Ok(())
    } else {
        Err(DispersionError::InvalidWavenumber(k.to_f64()))
    }
}

/// Poles of the dielectric in the complex frequency plane.
pub fn poles<T: Real>(family: &DispersionFamily<T>, k: T) -> Vec<Cplx<T>> {
    match family {
        DispersionFamily::MultiFluid(eq) => {
            let mut out = Vec::new();
            for s in &eq.species {
                let d = k * s.u;
                if eq.coupling == Coupling::Uncoupled {
                    out.push(cr(d));
                } else if s.c2 >= T::zero() {
                    let w = k * s.c2.sqrt();
                    out.push(cr(d - w));
                    out.push(cr(d + w));
                } else {
                    let w = k * (-s.c2).sqrt();
                    out.push(c(d, -w));
                    out.push(c(d, w));
                }
            }
            out
        }
        DispersionFamily::Waterbag(wb) => wb.contours().iter().map(|p| cr(k * *p)).collect(),
    }
}

fn pole_guard<T: Real>(
    family: &DispersionFamily<T>,
    k: T,
    omega: Cplx<T>,
    tol: T,
) -> Result<(), DispersionError> {
    for p in poles(family, k) {
        if (omega - p).modulus() <= tol * p.modulus().max(T::one()) {
            return Err(DispersionError::PoleEvaluation {
                re: omega.re.to_f64(),
                im: omega.im.to_f64(),
            });
        }
    }
    Ok(())
}

/// Value and frequency derivative of the dielectric, without pole checks.
fn eval_raw<T: Real>(family: &DispersionFamily<T>, k: T, w: Cplx<T>) -> (Cplx<T>, Cplx<T>) {
    let one = cr(T::one());
    let two = T::lit(2.0);
    match family {
        DispersionFamily::MultiFluid(eq) if eq.coupling == Coupling::Uncoupled => {
            // ε = Π F_a with F_a = 1 - k² c² / (ω - k u)².
            let mut val = one;
            let mut logd = cr(T::zero());
            for s in &eq.species {
                let x = w - cr(k * s.u);
                let kc2 = k * k * s.c2;
                let f = one - cr(kc2) / (x * x);
                let df = cr(two * kc2) / (x * x * x);
                val *= f;
                logd += df / f;
            }
            (val, val * logd)
        }
        DispersionFamily::MultiFluid(eq) => {
            let (shield, sign) = eq.field(k);
            let mut val = cr(T::one() + shield);
            let mut der = cr(T::zero());
            for s in &eq.species {
                let x = w - cr(k * s.u);
                let d = x * x - cr(k * k * s.c2);
                val += cr(sign * s.rho) / d;
                der -= cr(sign * s.rho * two) * x / (d * d);
            }
            (val, der)
        }
        DispersionFamily::Waterbag(wb) => {
            // ε = 1 - (1/k) Σ Δf / (ω - k p).
            let mut val = one;
            let mut der = cr(T::zero());
            for (p, df) in wb.contours().iter().zip(wb.jumps()) {
                let x = w - cr(k * *p);
                val -= cr(*df / k) / x;
                der += cr(*df / k) / (x * x);
            }
            (val, der)
        }
    }
}

/// Evaluates `ε(k, ω)`.
pub fn eval_dispersion<T: Real>(
    family: &DispersionFamily<T>,
    k: T,
    omega: Cplx<T>,
) -> Result<Cplx<T>, DispersionError> {
    check_k(k)?;
    pole_guard(family, k, omega, T::lit(Tolerances::default().pole_guard))?;
    Ok(eval_raw(family, k, omega).0)
}

/// Evaluates `∂ε/∂ω` at `(k, ω)`.
pub fn dispersion_derivative<T: Real>(
    family: &DispersionFamily<T>,
    k: T,
    omega: Cplx<T>,
) -> Result<Cplx<T>, DispersionError> {
    check_k(k)?;
    pole_guard(family, k, omega, T::lit(Tolerances::default().pole_guard))?;
    Ok(eval_raw(family, k, omega).1)
}

/// Cleared numerator of a multi-fluid dielectric, of degree `2M`.
pub fn multifluid_numerator<T: Real>(eq: &MultiFluidEquilibrium<T>, k: T) -> Poly<T> {
    let dens: Vec<Poly<T>> = eq
        .species
        .iter()
        .map(|s| Poly::shifted_square(k * s.u, k * k * s.c2))
        .collect();
    let full = dens
        .iter()
        .fold(Poly::constant(T::one()), |acc, d| acc.mul(d));
    if eq.coupling == Coupling::Uncoupled {
        return full;
    }
    let (shield, sign) = eq.field(k);
    let mut num = full.scale(T::one() + shield);
    for (a, s) in eq.species.iter().enumerate() {
        let others = dens
            .iter()
            .enumerate()
            .filter(|(b, _)| *b != a)
            .fold(Poly::constant(T::one()), |acc, (_, d)| acc.mul(d));
        num = num.add(&others.scale(sign * s.rho));
    }
    num
}

/// Raw roots of the cleared numerator.
fn numerator_roots<T: Real>(
    family: &DispersionFamily<T>,
    k: T,
) -> Result<Vec<Cplx<T>>, DispersionError> {
    match family {
        DispersionFamily::MultiFluid(eq) if eq.coupling != Coupling::Uncoupled => {
            // Linearized fluid equations in (n_s, w_s):
            //   ω n = k u n + k w,   ω w = k u w + k c² n + g ρ N / k,
            // with N = Σ n and g = -sign / (1 + shield). Its characteristic
            // polynomial is the cleared numerator, but the matrix avoids the
            // monomial expansion that loses roots for many species.
            let (shield, sign) = eq.field(k);
            let g = -sign / (T::one() + shield);
            let n = eq.species.len();
            let mut a = DMatrix::<T>::zeros(2 * n, 2 * n);
            for (i, s) in eq.species.iter().enumerate() {
                let (ni, wi) = (2 * i, 2 * i + 1);
                a[(ni, ni)] = k * s.u;
                a[(ni, wi)] = k;
                a[(wi, wi)] = k * s.u;
                a[(wi, ni)] = k * s.c2;
                for j in 0..n {
                    a[(wi, 2 * j)] += g * s.rho / k;
                }
            }
            real_eigenvalues(&a).ok_or(DispersionError::EigenFailure)
        }
        DispersionFamily::MultiFluid(eq) => {
            let num = multifluid_numerator(eq, k);
            if num.coefficients().iter().all(|c| c.is_zero()) {
                return Err(DispersionError::DegenerateSystem);
            }
            num.roots().ok_or(DispersionError::EigenFailure)
        }
        DispersionFamily::Waterbag(wb) => {
            // Companion matrix in the pole basis: det(ωI - C) is the cleared
            // numerator, and C stays well conditioned for many contours.
            let m = wb.len();
            let mut comp = DMatrix::<T>::zeros(m, m);
            for (i, p) in wb.contours().iter().enumerate() {
                comp[(i, i)] = k * *p;
            }
            for j in 0..m {
                let w = wb.jumps()[j] / k;
                for i in 0..m {
                    comp[(i, j)] += w;
                }
            }
            real_eigenvalues(&comp).ok_or(DispersionError::EigenFailure)
        }
    }
}

fn numerator_backward_error<T: Real>(family: &DispersionFamily<T>, k: T, w: Cplx<T>) -> T {
    match family {
        DispersionFamily::MultiFluid(eq) => {
            let p = multifluid_numerator(eq, k);
            let scale = p
                .coefficients()
                .iter()
                .rev()
                .fold(T::zero(), |acc, a| acc * w.modulus() + a.abs());
            p.eval(w).modulus() / scale.max(T::lit(f64::MIN_POSITIVE))
        }
        DispersionFamily::Waterbag(wb) => {
            // Compare 1 - Σ against its largest term, which is what a
            // perturbed root would leave behind.
            let mut sum = cr(T::zero());
            let mut big = T::one();
            for (p, df) in wb.contours().iter().zip(wb.jumps()) {
                let x = w - cr(k * *p);
                sum += cr(*df / k) / x;
                if x.modulus() > T::zero() {
                    big = big.max((*df / k).abs() / x.modulus());
                }
            }
            (cr(T::one()) - sum).modulus() / big
        }
    }
}

/// Newton polish on ε, keeping the best iterate.
fn polish<T: Real>(
    family: &DispersionFamily<T>,
    k: T,
    w0: Cplx<T>,
    real_axis: bool,
) -> (Cplx<T>, T) {
    let mut w = w0;
    let (mut f, mut d) = eval_raw(family, k, w);
    let mut best = (w, f.modulus());
    for _ in 0..8 {
        if !f.modulus().is_finite() || d.modulus() == T::zero() {
            break;
        }
        let mut step = f / d;
        if real_axis {
            step.im = T::zero();
        }
        w -= step;
        let r = eval_raw(family, k, w);
        f = r.0;
        d = r.1;
        let res = f.modulus();
        if res.is_finite() && res < best.1 {
            best = (w, res);
        } else {
            break;
        }
        if step.modulus() <= T::eps() * T::lit(4.0) * w.modulus().max(T::one()) {
            break;
        }
    }
    best
}

/// Discrete roots of `ε(k, ω) = 0` with default tolerances.
pub fn find_discrete_modes<T: Real>(
    family: &DispersionFamily<T>,
    k: T,
) -> Result<Vec<ModeRecord<T>>, DispersionError> {
    find_discrete_modes_with(family, k, &Tolerances::default())
}

/// Discrete roots of `ε(k, ω) = 0`.
///
/// Roots come from a companion eigenvalue problem, are polished by Newton
/// iteration on ε itself, snapped to the real axis when their imaginary part
/// is negligible and paired into exact complex-conjugate pairs. Roots that
/// coincide with a pole are kept and flagged.
pub fn find_discrete_modes_with<T: Real>(
    family: &DispersionFamily<T>,
    k: T,
    tol: &Tolerances,
) -> Result<Vec<ModeRecord<T>>, DispersionError> {
    check_k(k)?;
    let raw = numerator_roots(family, k)?;
    let pole_list = poles(family, k);
    let near = T::lit(tol.near_pole);
    let snap = T::lit(tol.conjugate_pairing);

    let mut roots: Vec<(Cplx<T>, bool)> = Vec::with_capacity(raw.len());
    for r in raw {
        let on_pole = pole_list
            .iter()
            .any(|p| (r - *p).modulus() <= near * p.modulus().max(T::one()));
        if on_pole {
            roots.push((r, true));
            continue;
        }
        let mut w = r;
        if w.im.abs() <= snap * w.modulus().max(T::one()) {
            w.im = T::zero();
            w = polish(family, k, w, true).0;
        } else {
            w = polish(family, k, w, false).0;
            if w.im.abs() <= snap * w.modulus().max(T::one()) {
                w.im = T::zero();
                w = polish(family, k, w, true).0;
            }
        }
        let still_on_pole = pole_list
            .iter()
            .any(|p| (w - *p).modulus() <= near * p.modulus().max(T::one()));
        roots.push((w, still_on_pole));
    }

    enforce_conjugate_pairs(&mut roots);
    roots.sort_by(|a, b| {
        a.0.re
            .partial_cmp(&b.0.re)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(
                a.0.im
                    .partial_cmp(&b.0.im)
                    .unwrap_or(std::cmp::Ordering::Equal),
            )
    });

    let marginal = T::lit(tol.marginal_energy);
    Ok(roots
        .into_iter()
        .map(|(w, on_pole)| {
            if on_pole {
                return ModeRecord {
                    k,
                    omega: w,
                    signature: Signature::Marginal,
                    energy: None,
                    residual: numerator_backward_error(family, k, w),
                    near_pole: true,
                };
            }
            let (f, d) = eval_raw(family, k, w);
            let (signature, energy) = if w.im == T::zero() {
                let e = neutral_energy(family, k, w.re, d.re);
                (Signature::from_energy(e, marginal), Some(e))
            } else {
                (Signature::Marginal, None)
            };
            ModeRecord {
                k,
                omega: w,
                signature,
                energy,
                residual: f.modulus(),
                near_pole: false,
            }
        })
        .collect())
}

/// Replaces each lower-half-plane root by the exact conjugate of its partner.
fn enforce_conjugate_pairs<T: Real>(roots: &mut [(Cplx<T>, bool)]) {
    let upper: Vec<usize> = (0..roots.len())
        .filter(|&i| roots[i].0.im > T::zero())
        .collect();
    let mut taken = vec![false; roots.len()];
    for i in upper {
        let target = roots[i].0.conj();
        let partner = (0..roots.len())
            .filter(|&j| !taken[j] && roots[j].0.im < T::zero())
            .min_by(|&a, &b| {
                (roots[a].0 - target)
                    .modulus()
                    .partial_cmp(&(roots[b].0 - target).modulus())
                    .unwrap_or(std::cmp::Ordering::Equal)
            });
        if let Some(j) = partner {
            taken[j] = true;
            roots[j].0 = target;
        }
    }
}

/// Energy of a neutral mode: `ω ∂ε/∂ω`, or for uncoupled fluids the same
/// quantity for the factor that owns the root. Attractive coupling enters
/// the Hamiltonian with a negative field energy, which flips the sign.
fn neutral_energy<T: Real>(family: &DispersionFamily<T>, k: T, w: T, deps: T) -> T {
    match family {
        DispersionFamily::MultiFluid(eq) if eq.coupling == Coupling::Uncoupled => {
            let two = T::lit(2.0);
            let owner = eq
                .species
                .iter()
                .map(|s| {
                    let x = w - k * s.u;
                    let f = T::one() - k * k * s.c2 / (x * x);
                    (f.abs(), s)
                })
                .min_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal));
            match owner {
                Some((_, s)) => {
                    let x = w - k * s.u;
                    w * two * k * k * s.c2 / (x * x * x)
                }
                None => T::zero(),
            }
        }
        DispersionFamily::MultiFluid(eq) if eq.coupling == Coupling::GravitationalJeans => {
            -w * deps
        }
        _ => w * deps,
    }
}

/// Wave energy of a neutral root.
///
/// This is `ω ∂ε/∂ω` for repulsive coupling and waterbags, and `-ω ∂ε/∂ω`
/// for gravitating fluids, so that its sign is the Kreĭn signature.
pub fn mode_energy_derivative<T: Real>(
    family: &DispersionFamily<T>,
    k: T,
    omega: T,
) -> Result<T, DispersionError> {
    check_k(k)?;
    let w = cr(omega);
    pole_guard(family, k, w, T::lit(Tolerances::default().pole_guard))?;
    let (_, d) = eval_raw(family, k, w);
    Ok(neutral_energy(family, k, omega, d.re))
}

/// Kreĭn signature and energy of a neutral root, with default tolerances.
pub fn mode_signature<T: Real>(
    family: &DispersionFamily<T>,
    k: T,
    omega: T,
) -> Result<(Signature, T), DispersionError> {
    mode_signature_with(family, k, omega, &Tolerances::default())
}

/// Kreĭn signature and wave energy of a neutral root.
///
/// The residual test is scaled by `max(1, |ω ε'|)`, the size of ε's
/// variation over one relative unit of frequency.
pub fn mode_signature_with<T: Real>(
    family: &DispersionFamily<T>,
    k: T,
    omega: T,
    tol: &Tolerances,
) -> Result<(Signature, T), DispersionError> {
    check_k(k)?;
    let w = cr(omega);
    pole_guard(family, k, w, T::lit(tol.pole_guard))?;
    let (f, d) = eval_raw(family, k, w);
    let scale = (w * d).modulus().max(T::one());
    if f.modulus() > T::lit(tol.root_residual) * scale {
        return Err(DispersionError::NotARoot {
            residual: f.modulus().to_f64(),
        });
    }
    let e = neutral_energy(family, k, omega, d.re);
    Ok((Signature::from_energy(e, T::lit(tol.marginal_energy)), e))
}

/// The slow counter-streaming branch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SlowBranch<T> {
    /// Real slow frequency.
    Stable(T),
    /// Purely growing mode with this growth rate.
    Unstable(T),
}

/// Closed-form frequencies of the shielded counterstream.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CounterstreamFrequencies<T> {
    pub omega_plus: T,
    pub omega_minus: SlowBranch<T>,
}

/// Closed-form counterstream frequencies.
///
/// With `b = 1 + k²`, `ω±² = k² (2 b u² + 1 ± sqrt(1 + 8 b u²)) / (2 b)`.
/// The slow branch turns into a growing mode when `u_e² < 1 / b`.
pub fn counterstream_frequencies<T: Real>(
    u_e: T,
    k: T,
) -> Result<CounterstreamFrequencies<T>, DispersionError> {
    check_k(k)?;
    let one = T::one();
    let two = T::lit(2.0);
    let b = one + k * k;
    let u2 = u_e * u_e;
    let root = (one + T::lit(8.0) * b * u2).sqrt();
    let base = two * b * u2 + one;
    let plus = k * k * (base + root) / (two * b);
    // base - root loses digits near onset; use the product form instead.
    let prod = T::lit(4.0) * b * u2 * (b * u2 - one);
    let minus = k * k * prod / (two * b * (base + root));
    let omega_minus = if minus >= T::zero() {
        SlowBranch::Stable(minus.sqrt())
    } else {
        SlowBranch::Unstable((-minus).sqrt())
    };
    Ok(CounterstreamFrequencies {
        omega_plus: plus.sqrt(),
        omega_minus,
    })
}

/// The Hamiltonian spectrum at `±k`: the roots together with their mirror images `-ω̄`.
///
/// For a non-symmetric equilibrium the roots at a single `k` are only closed
/// under conjugation; the full quartet structure appears once the `-k`
/// branch is added, and that branch is `-ω̄(k)` for every root.
pub fn hamiltonian_spectrum<T: Real>(modes: &[ModeRecord<T>]) -> Vec<Cplx<T>> {
    let mut out: Vec<Cplx<T>> = modes.iter().map(|m| m.omega).collect();
    out.extend(modes.iter().map(|m| -m.omega.conj()));
    out
}

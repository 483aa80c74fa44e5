//! Multi-contour waterbag equilibria.
//!
//! A waterbag is a piecewise-constant distribution. Contour `α` sits at
//! `p_α` and carries the jump `Δf_α = f_below - f_above`, the level just
//! below the contour minus the level just above it. In the phase velocity
//! `u = ω / k` the dielectric reads `ε = 1 - (1/k²) Σ Δf_α / (u - p_α)`.

use nalgebra::ComplexField as _;
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dispersion::{Coupling, DispersionError, MultiFluidEquilibrium, Species};
use crate::linalg::complex_eigenvalues;
use crate::profile::Profile;
use crate::scalar::{c, cr, sgn, Cplx, Real};
use crate::search::{bisect, chebyshev_points, golden_min};
use crate::tolerance::Tolerances;

/// Errors raised by waterbag construction and analysis.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum WaterbagError {
    #[error("a waterbag needs at least two contours")]
    TooFewContours,
    #[error("contour positions must be finite and strictly increasing")]
    NonIncreasingContours,
    #[error("expected {expected} levels, got {got}")]
    LevelCount { expected: usize, got: usize },
    #[error("outer levels must vanish")]
    NonZeroOuterLevel,
    #[error("levels must be finite and non-negative")]
    NegativeLevel,
    #[error("contour {index} carries no jump")]
    ZeroJump { index: usize },
    #[error("layer {layer} is empty (f = 0) and has no fluid description")]
    ZeroLevelLayer { layer: usize },
    #[error("profile cannot be resolved: {0}")]
    NonResolvableProfile(String),
    #[error("wavenumber must be finite and positive, got {0}")]
    InvalidWavenumber(f64),
    #[error("phase velocity lies on contour {index}")]
    PoleEvaluation { index: usize },
    #[error(transparent)]
    Dispersion(#[from] DispersionError),
}

/// A validated waterbag equilibrium.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ContourPairs<T>", into = "ContourPairs<T>")]
#[serde(bound(
    serialize = "T: Real + Serialize",
    deserialize = "T: Real + Deserialize<'de>"
))]
pub struct WaterbagEquilibrium<T: Real> {
    contours: Vec<T>,
    levels: Vec<T>,
    jumps: Vec<T>,
}

/// Serialized form: `(p, Δf)` pairs in increasing `p`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ContourPairs<T> {
    pub pairs: Vec<(T, T)>,
}

impl<T: Real> TryFrom<ContourPairs<T>> for WaterbagEquilibrium<T> {
    type Error = WaterbagError;
    fn try_from(c: ContourPairs<T>) -> Result<Self, WaterbagError> {
        Self::from_jumps(&c.pairs)
    }
}

impl<T: Real> From<WaterbagEquilibrium<T>> for ContourPairs<T> {
    fn from(w: WaterbagEquilibrium<T>) -> Self {
        ContourPairs { pairs: w.pairs() }
    }
}

impl<T: Real> WaterbagEquilibrium<T> {
    /// Builds a waterbag from contour positions and the `M + 1` levels between them.
    pub fn new(contours: Vec<T>, levels: Vec<T>) -> Result<Self, WaterbagError> {
        let m = contours.len();
        if m < 2 {
            return Err(WaterbagError::TooFewContours);
        }
        if contours.iter().any(|p| !p.is_finite()) || contours.windows(2).any(|w| w[1] <= w[0]) {
            return Err(WaterbagError::NonIncreasingContours);
        }
        if levels.len() != m + 1 {
            return Err(WaterbagError::LevelCount {
                expected: m + 1,
                got: levels.len(),
            });
        }
        if levels.iter().any(|f| !f.is_finite() || *f < T::zero()) {
            return Err(WaterbagError::NegativeLevel);
        }
        if !levels[0].is_zero() || !levels[m].is_zero() {
            return Err(WaterbagError::NonZeroOuterLevel);
        }
        let jumps: Vec<T> = levels.windows(2).map(|w| w[0] - w[1]).collect();
        if let Some(index) = jumps.iter().position(|d| d.is_zero()) {
            return Err(WaterbagError::ZeroJump { index });
        }
        Ok(Self {
            contours,
            levels,
            jumps,
        })
    }

    /// Builds a waterbag from `(p, Δf)` pairs sorted by position.
    ///
    /// Levels are accumulated from zero. A small final imbalance relative to
    /// the largest jump is rounded away.
    pub fn from_jumps(pairs: &[(T, T)]) -> Result<Self, WaterbagError> {
        let mut levels = Vec::with_capacity(pairs.len() + 1);
        let mut f = T::zero();
        levels.push(f);
        for (_, df) in pairs {
            f -= *df;
            levels.push(f);
        }
        let big = pairs.iter().fold(T::zero(), |a, (_, d)| a.max(d.abs()));
        let slack = T::lit(64.0) * T::eps() * big * T::from_count(pairs.len().max(1));
        for l in levels.iter_mut() {
            if l.abs() <= slack {
                *l = T::zero();
            }
        }
        Self::new(pairs.iter().map(|(p, _)| *p).collect(), levels)
    }

    /// Like [`Self::from_jumps`] but sorts the pairs, merges coincident
    /// contours by adding their jumps and drops contours left without a jump.
    pub fn from_jumps_merged(pairs: &[(T, T)]) -> Result<Self, WaterbagError> {
        let mut sorted = pairs.to_vec();
        sorted.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal));
        let mut merged: Vec<(T, T)> = Vec::with_capacity(sorted.len());
        for (p, d) in sorted {
            match merged.last_mut() {
                Some(last) if last.0 == p => last.1 += d,
                _ => merged.push((p, d)),
            }
        }
        let big = merged.iter().fold(T::zero(), |a, (_, d)| a.max(d.abs()));
        merged.retain(|(_, d)| d.abs() > T::lit(16.0) * T::eps() * big);
        Self::from_jumps(&merged)
    }

    /// Contour positions `p_α`.
    pub fn contours(&self) -> &[T] {
        &self.contours
    }

    /// Levels `f_0 = 0, f_1, …, f_M = 0`; `f_i` lies between contours `i - 1` and `i`.
    pub fn levels(&self) -> &[T] {
        &self.levels
    }

    /// Jumps `Δf_α = f_below - f_above`.
    pub fn jumps(&self) -> &[T] {
        &self.jumps
    }

    /// Number of contours.
    pub fn len(&self) -> usize {
        self.contours.len()
    }

    /// Always false: construction requires two contours.
    pub fn is_empty(&self) -> bool {
        self.contours.is_empty()
    }

    /// `(p, Δf)` pairs.
    pub fn pairs(&self) -> Vec<(T, T)> {
        self.contours
            .iter()
            .copied()
            .zip(self.jumps.iter().copied())
            .collect()
    }

    /// Same levels with the given contour positions.
    pub fn with_contours(&self, contours: Vec<T>) -> Result<Self, WaterbagError> {
        Self::new(contours, self.levels.clone())
    }

    /// Total density `Σ f_i (p_i - p_{i-1})`.
    pub fn density(&self) -> T {
        (1..self.len())
            .map(|i| self.levels[i] * (self.contours[i] - self.contours[i - 1]))
            .fold(T::zero(), |a, b| a + b)
    }
}

fn check_k<T: Real>(k: T) -> Result<(), WaterbagError> {
    if k.is_finite() && k > T::zero() {
        Ok(())
    } else {
        Err(WaterbagError::InvalidWavenumber(k.to_f64()))
    }
}

/// `ε(k, u) = 1 - (1/k²) Σ Δf_α / (u - p_α)` at a complex phase velocity.
pub fn waterbag_dispersion<T: Real>(
    wb: &WaterbagEquilibrium<T>,
    k: T,
    u: Cplx<T>,
) -> Result<Cplx<T>, WaterbagError> {
    check_k(k)?;
    let inv_k2 = T::one() / (k * k);
    let mut eps = cr(T::one());
    for (i, (p, df)) in wb.contours.iter().zip(&wb.jumps).enumerate() {
        let x = u - cr(*p);
        if x.modulus() <= T::eps() * p.abs().max(T::one()) {
            return Err(WaterbagError::PoleEvaluation { index: i });
        }
        eps -= cr(*df * inv_k2) / x;
    }
    Ok(eps)
}

fn eps_real<T: Real>(wb: &WaterbagEquilibrium<T>, k: T, u: T) -> (T, T) {
    let inv_k2 = T::one() / (k * k);
    let mut e = T::one();
    let mut d = T::zero();
    for (p, df) in wb.contours.iter().zip(&wb.jumps) {
        let x = u - *p;
        e -= *df * inv_k2 / x;
        d += *df * inv_k2 / (x * x);
    }
    (e, d)
}

/// Matrix of the linearized contour dynamics at wavenumber `k`.
///
/// For contour displacements `p_α(t) e^{ikx}` the evolution is
/// `dp_α/dt = -i k p_α⁰ p_α - (i/k) Σ_β Δf_β p_β`, so eigenvalues are
/// `λ = -i k u` for every root `u` of the dielectric.
pub fn linear_evolution_matrix<T: Real>(
    wb: &WaterbagEquilibrium<T>,
    k: T,
) -> Result<DMatrix<Cplx<T>>, WaterbagError> {
    check_k(k)?;
    let m = wb.len();
    let mut a = DMatrix::from_element(m, m, cr(T::zero()));
    for (j, df) in wb.jumps.iter().enumerate() {
        let v = c(T::zero(), -*df / k);
        for i in 0..m {
            a[(i, j)] = v;
        }
    }
    for (i, p) in wb.contours.iter().enumerate() {
        a[(i, i)] += c(T::zero(), -k * *p);
    }
    Ok(a)
}

/// Eigenvalues of [`linear_evolution_matrix`].
pub fn evolution_eigenvalues<T: Real>(
    wb: &WaterbagEquilibrium<T>,
    k: T,
) -> Result<Vec<Cplx<T>>, WaterbagError> {
    let a = linear_evolution_matrix(wb, k)?;
    complex_eigenvalues(&a).ok_or(WaterbagError::Dispersion(DispersionError::EigenFailure))
}

/// Second variation of the free energy for the normalized mode at real `u`.
///
/// The mode is scaled so that its potential has amplitude `1/k`. The
/// contour displacements are then `1/(k(u - p_α))` and the energy splits
/// into the contour sum `(1/k²) Σ Δf_α p_α / (u - p_α)²` and a unit field
/// term. At a root this equals `u ∂ε/∂u`, but it is evaluated here from the
/// contour sum alone. Fails with `NotARoot` when `u` is not a root.
pub fn mode_energy<T: Real>(wb: &WaterbagEquilibrium<T>, k: T, u: T) -> Result<T, WaterbagError> {
    mode_energy_with(wb, k, u, &Tolerances::default())
}

/// [`mode_energy`] with explicit tolerances.
pub fn mode_energy_with<T: Real>(
    wb: &WaterbagEquilibrium<T>,
    k: T,
    u: T,
    tol: &Tolerances,
) -> Result<T, WaterbagError> {
    check_k(k)?;
    if let Some(index) = wb
        .contours
        .iter()
        .position(|p| (u - *p).abs() <= T::eps() * p.abs().max(T::one()))
    {
        return Err(WaterbagError::PoleEvaluation { index });
    }
    let (e, d) = eps_real(wb, k, u);
    if e.abs() > T::lit(tol.root_residual) * (u * d).abs().max(T::one()) {
        return Err(DispersionError::NotARoot {
            residual: e.to_f64(),
        }
        .into());
    }
    let inv_k2 = T::one() / (k * k);
    let mut sum = T::zero();
    for (i, (p, df)) in wb.contours.iter().zip(&wb.jumps).enumerate() {
        let x = u - *p;
        if x.abs() <= T::eps() * p.abs().max(T::one()) {
            return Err(WaterbagError::PoleEvaluation { index: i });
        }
        sum += *df * *p / (x * x);
    }
    Ok(sum * inv_k2 + T::one())
}

/// `u ∂ε/∂u` at real `u`.
pub fn energy_derivative_form<T: Real>(
    wb: &WaterbagEquilibrium<T>,
    k: T,
    u: T,
) -> Result<T, WaterbagError> {
    check_k(k)?;
    if let Some(index) = wb
        .contours
        .iter()
        .position(|p| (u - *p).abs() <= T::eps() * p.abs().max(T::one()))
    {
        return Err(WaterbagError::PoleEvaluation { index });
    }
    Ok(u * eps_real(wb, k, u).1)
}

/// Real roots found between two consecutive contours (or beyond the outermost ones).
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalRoots<T> {
    /// Interval `i` lies between contours `i - 1` and `i`.
    pub index: usize,
    pub lower: Option<T>,
    pub upper: Option<T>,
    /// Real roots in increasing order.
    pub roots: Vec<T>,
    /// ε has opposite signs at the two ends, so the root count is odd.
    /// Between contours this is the case when the bracketing jumps share a sign.
    pub odd_parity_expected: bool,
    /// The root count has the expected parity.
    pub parity_ok: bool,
}

/// Real roots of the waterbag dielectric, interval by interval.
///
/// Each interval is scanned with the pole factors removed, so the scanned
/// function stays finite at the contours. Sign changes are bisected, and
/// local extrema that approach zero without crossing are probed with a
/// golden-section search so that nearly touching root pairs are not missed.
pub fn locate_interval_roots<T: Real>(
    wb: &WaterbagEquilibrium<T>,
    k: T,
) -> Result<Vec<IntervalRoots<T>>, WaterbagError> {
    check_k(k)?;
    let m = wb.len();
    let p = &wb.contours;
    let reach = wb.jumps.iter().fold(T::zero(), |a, d| a + d.abs()) / (k * k) * T::lit(1.01)
        + T::lit(1e-12);
    let mut out = Vec::with_capacity(m + 1);
    for i in 0..=m {
        let lower = (i > 0).then(|| p[i - 1]);
        let upper = (i < m).then(|| p[i]);
        let (a, b) = (
            lower.unwrap_or_else(|| p[0] - reach),
            upper.unwrap_or_else(|| p[m - 1] + reach),
        );
        // Limits of ε at the ends of the interval.
        let s_lo = match lower {
            Some(_) => -sgn(wb.jumps[i - 1]),
            None => 1,
        };
        let s_hi = match upper {
            Some(_) => sgn(wb.jumps[i]),
            None => 1,
        };
        // ε times the positive factors that cancel the bracketing poles.
        let g = |u: T| {
            let mut f = eps_real(wb, k, u).0;
            if lower.is_some() {
                f *= u - a;
            }
            if upper.is_some() {
                f *= b - u;
            }
            f
        };
        let roots = scan_interval(g, a, b);
        let odd = s_lo != s_hi;
        let parity_ok = (roots.len() % 2 == 1) == odd;
        out.push(IntervalRoots {
            index: i,
            lower,
            upper,
            roots,
            odd_parity_expected: odd,
            parity_ok,
        });
    }
    Ok(out)
}

fn scan_interval<T: Real>(g: impl Fn(T) -> T, a: T, b: T) -> Vec<T> {
    let n = 129;
    let xs = chebyshev_points(a, b, n);
    let ys: Vec<T> = xs.iter().map(|x| g(*x)).collect();
    let mut roots = Vec::new();
    for j in 0..n - 1 {
        let (y0, y1) = (ys[j], ys[j + 1]);
        if y0.is_zero() && j > 0 {
            roots.push(xs[j]);
            continue;
        }
        if (y0 > T::zero() && y1 < T::zero()) || (y0 < T::zero() && y1 > T::zero()) {
            if let Some(r) = bisect(&g, xs[j], xs[j + 1]) {
                roots.push(r);
            }
        }
    }
    // Local extrema that head toward zero without a sampled sign change.
    for j in 1..n - 1 {
        let (y0, y1, y2) = (ys[j - 1], ys[j], ys[j + 1]);
        let same = sgn(y0) == sgn(y1) && sgn(y1) == sgn(y2) && sgn(y1) != 0;
        if !same || y1.abs() > y0.abs() || y1.abs() > y2.abs() {
            continue;
        }
        let s = if y1 > T::zero() { T::one() } else { -T::one() };
        let (xm, ym) = golden_min(|x| s * g(x), xs[j - 1], xs[j + 1], 120);
        if ym < T::zero() {
            if let Some(r) = bisect(&g, xs[j - 1], xm) {
                roots.push(r);
            }
            if let Some(r) = bisect(&g, xm, xs[j + 1]) {
                roots.push(r);
            }
        }
    }
    roots.sort_by(|x, y| x.partial_cmp(y).unwrap_or(std::cmp::Ordering::Equal));
    roots.dedup_by(|x, y| (*x - *y).abs() <= T::lit(8.0) * T::eps() * x.abs().max(T::one()));
    roots
}

/// Signature predicted from the profile slope for a lone root in an interval
/// whose two bracketing jumps share a sign.
///
/// The upward step `f_above - f_below` across a contour is the discrete slope
/// of the distribution, and the predicted signature is `-sgn(u · step)`:
/// positive where the distribution falls off away from the origin, negative
/// where it rises. Returns `None` for intervals without such a structure.
pub fn predicted_signature<T: Real>(
    wb: &WaterbagEquilibrium<T>,
    interval: &IntervalRoots<T>,
) -> Option<i8> {
    let (i, m) = (interval.index, wb.len());
    if i == 0 || i == m || interval.roots.len() != 1 {
        return None;
    }
    let (d0, d1) = (wb.jumps[i - 1], wb.jumps[i]);
    if sgn(d0) != sgn(d1) {
        return None;
    }
    let step = -d0;
    let s = sgn(interval.roots[0]) * sgn(step);
    (s != 0).then_some(-s)
}

/// One layer of a waterbag seen as a warm fluid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FluidLayer<T> {
    /// Index of the level, `1..M`.
    pub layer: usize,
    /// Layer density `f · w`.
    pub rho: T,
    /// Layer mean velocity (center of the layer).
    pub u: T,
    /// Pressure `ρ³ / (12 f²)`.
    pub pressure: T,
    /// Thermal speed `ρ / (2 f)`, half the layer width.
    pub u_theta: T,
}

/// Fluid description of a single layer.
pub fn layer_fluid<T: Real>(
    wb: &WaterbagEquilibrium<T>,
    layer: usize,
) -> Result<FluidLayer<T>, WaterbagError> {
    if layer == 0 || layer >= wb.len() {
        return Err(WaterbagError::ZeroLevelLayer { layer });
    }
    let f = wb.levels[layer];
    if f.is_zero() {
        return Err(WaterbagError::ZeroLevelLayer { layer });
    }
    let (a, b) = (wb.contours[layer - 1], wb.contours[layer]);
    let rho = f * (b - a);
    let half = T::lit(0.5);
    Ok(FluidLayer {
        layer,
        rho,
        u: (a + b) * half,
        pressure: rho * rho * rho / (T::lit(12.0) * f * f),
        u_theta: rho / (T::lit(2.0) * f),
    })
}

/// The multi-fluid reading of a waterbag.
#[derive(Debug, Clone, PartialEq)]
pub struct WaterbagFluidView<T> {
    pub layers: Vec<FluidLayer<T>>,
    /// Empty layers between bags, which carry no fluid.
    pub skipped: Vec<usize>,
}

impl<T: Real> WaterbagFluidView<T> {
    /// Equivalent unshielded electrostatic multi-fluid equilibrium.
    ///
    /// Each layer becomes a species with sound speed equal to its thermal speed.
    pub fn equilibrium(&self) -> Result<MultiFluidEquilibrium<T>, DispersionError> {
        MultiFluidEquilibrium::new(
            self.layers
                .iter()
                .map(|l| Species::new(l.rho, l.u, l.u_theta * l.u_theta))
                .collect(),
            Coupling::Electrostatic,
        )
    }
}

/// Splits a waterbag into its layers, skipping empty gaps.
pub fn to_multifluid<T: Real>(wb: &WaterbagEquilibrium<T>) -> WaterbagFluidView<T> {
    let mut layers = Vec::new();
    let mut skipped = Vec::new();
    for layer in 1..wb.len() {
        match layer_fluid(wb, layer) {
            Ok(l) => layers.push(l),
            Err(_) => skipped.push(layer),
        }
    }
    WaterbagFluidView { layers, skipped }
}

/// Onion discretization of a smooth profile into a waterbag with `m` contours per hump side.
///
/// The profile range `[0, max f0]` is cut into `m / 2` equal slabs and each
/// slab midlevel is traced on every monotone piece of the profile. A
/// single-humped profile thus gives exactly `m` contours; profiles with more
/// humps give more.
pub fn discretize_distribution<T: Real>(
    profile: &Profile<T>,
    m: usize,
    p_range: (T, T),
) -> Result<WaterbagEquilibrium<T>, WaterbagError> {
    if m < 2 || m % 2 == 1 {
        return Err(WaterbagError::NonResolvableProfile(format!(
            "contour count must be even and at least 2, got {m}"
        )));
    }
    let (lo, hi) = p_range;
    if !(lo.is_finite() && hi.is_finite() && hi > lo) {
        return Err(WaterbagError::NonResolvableProfile(
            "empty momentum range".into(),
        ));
    }
    let n = 4001;
    let h = (hi - lo) / T::from_count(n - 1);
    let xs: Vec<T> = (0..n).map(|i| lo + h * T::from_count(i)).collect();
    let fs: Vec<T> = xs.iter().map(|x| profile.value(*x)).collect();

    // Break points at local extrema of the sampled profile, refined on f0'.
    let mut breaks = vec![lo];
    for j in 1..n - 1 {
        let rising = fs[j] > fs[j - 1];
        let next_rising = fs[j + 1] > fs[j];
        if rising != next_rising {
            let x = bisect(|x| profile.derivative(x), xs[j - 1], xs[j + 1]).unwrap_or(xs[j]);
            if x > *breaks.last().unwrap_or(&lo) {
                breaks.push(x);
            }
        }
    }
    breaks.push(hi);

    let fmax = breaks
        .iter()
        .fold(T::zero(), |a, x| a.max(profile.value(*x)));
    if !fmax.is_finite() || fmax <= T::zero() {
        return Err(WaterbagError::NonResolvableProfile(
            "profile vanishes on the range".into(),
        ));
    }
    let slabs = m / 2;
    let dlev = fmax / T::from_count(slabs);
    let lowest = dlev * T::lit(0.5);
    if profile.value(lo) >= lowest || profile.value(hi) >= lowest {
        return Err(WaterbagError::NonResolvableProfile(
            "profile does not fall below the lowest level inside the range".into(),
        ));
    }
    let mut pairs = Vec::new();
    for seg in breaks.windows(2) {
        let (a, b) = (seg[0], seg[1]);
        let (fa, fb) = (profile.value(a), profile.value(b));
        if fa == fb {
            continue;
        }
        let jump = if fb > fa { -dlev } else { dlev };
        for j in 0..slabs {
            let level = dlev * (T::from_count(j) + T::lit(0.5));
            if (fa - level) * (fb - level) < T::zero() {
                if let Some(x) = bisect(|x| profile.value(x) - level, a, b) {
                    pairs.push((x, jump));
                }
            }
        }
    }
    WaterbagEquilibrium::from_jumps_merged(&pairs)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bag() -> WaterbagEquilibrium<f64> {
        WaterbagEquilibrium::new(vec![-1.0, 1.0], vec![0.0, 0.5, 0.0]).unwrap()
    }

    #[test]
    fn validation() {
        assert_eq!(
            WaterbagEquilibrium::new(vec![1.0, -1.0], vec![0.0, 1.0, 0.0]),
            Err(WaterbagError::NonIncreasingContours)
        );
        assert_eq!(
            WaterbagEquilibrium::new(vec![-1.0, 0.0, 1.0], vec![0.0, 1.0, 1.0, 0.0]),
            Err(WaterbagError::ZeroJump { index: 1 })
        );
        assert_eq!(
            WaterbagEquilibrium::new(vec![-1.0, 1.0], vec![0.1, 1.0, 0.0]),
            Err(WaterbagError::NonZeroOuterLevel)
        );
        assert!(WaterbagEquilibrium::<f64>::from_jumps(&[(0.0, -1.0)]).is_err());
        let merged = WaterbagEquilibrium::from_jumps_merged(&[
            (1.0, 1.0),
            (-1.0, -1.0),
            (0.0, -0.5),
            (0.0, 0.5),
        ])
        .unwrap();
        assert_eq!(merged.contours(), &[-1.0, 1.0]);
    }

    #[test]
    fn single_bag_dispersion_closed_form() {
        // ε = 1 - 2 h a / (k² (u² - a²)) for a bag of height h on [-a, a].
        let wb = bag();
        let k = 0.7;
        let u = Cplx::new(0.3, 0.4);
        let e = waterbag_dispersion(&wb, k, u).unwrap();
        let want = Cplx::new(1.0, 0.0)
            - Cplx::new(2.0 * 0.5 * 1.0 / (k * k), 0.0) / (u * u - Cplx::new(1.0, 0.0));
        assert!((e - want).modulus() < 1e-14);
    }

    #[test]
    fn fluid_layer_values() {
        let wb = WaterbagEquilibrium::new(vec![-1.0, 0.0, 2.0, 3.0], vec![0.0, 1.0, 0.0, 2.0, 0.0])
            .unwrap();
        let view = to_multifluid(&wb);
        assert_eq!(view.skipped, vec![2]);
        assert_eq!(view.layers.len(), 2);
        let l = view.layers[1];
        assert_eq!((l.rho, l.u, l.u_theta), (2.0, 2.5, 0.5));
        assert!((l.pressure - 8.0 / 48.0).abs() < 1e-15);
        assert_eq!(
            layer_fluid(&wb, 2),
            Err(WaterbagError::ZeroLevelLayer { layer: 2 })
        );
    }

    #[test]
    fn onion_of_maxwellian_is_symmetric() {
        let wb = discretize_distribution(&Profile::Maxwellian, 8, (-6.0, 6.0)).unwrap();
        assert_eq!(wb.len(), 8);
        for (a, b) in wb.contours().iter().zip(wb.contours().iter().rev()) {
            assert!((a + b).abs() < 1e-12);
        }
        // The staircase stays below the profile peak.
        assert!(wb.levels().iter().all(|f| *f <= 1.0));
        assert!(discretize_distribution(&Profile::Maxwellian, 8, (-0.5, 0.5)).is_err());
        assert!(discretize_distribution(&Profile::Maxwellian, 7, (-6.0, 6.0)).is_err());
    }

    #[test]
    fn interval_scan_sees_bag_modes() {
        let wb = bag();
        let ivs = locate_interval_roots(&wb, 0.5).unwrap();
        assert_eq!(ivs.len(), 3);
        assert!(ivs.iter().all(|iv| iv.parity_ok));
        // u² = a² + 2 h a / k² = 5.
        assert!((ivs[2].roots[0] - 5f64.sqrt()).abs() < 1e-12);
        assert!((ivs[0].roots[0] + 5f64.sqrt()).abs() < 1e-12);
        assert!(ivs[1].roots.is_empty());
    }
}

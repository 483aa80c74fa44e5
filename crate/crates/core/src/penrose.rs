//! Penrose-Nyquist stability of smooth distributions.
//!
//! On the real axis the Landau-continued dielectric is
//! `ε(u) = 1 - (π/k²) H[f0'](u) - i (π/k²) f0'(u)` with
//! `H[g](u) = (1/π) PV ∫ g(p) / (p - u) dp`. The number of unstable modes
//! equals the winding number of `u ↦ ε(u)` around the origin.

use nalgebra::ComplexField as _;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::profile::Profile;
use crate::quadrature::gauss_legendre;
use crate::scalar::{c, cr, Cplx, Real};
use crate::search::bisect;
use crate::tolerance::Tolerances;

/// Errors raised by the Penrose analysis.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum PenroseError {
    #[error("wavenumber must be finite and positive, got {0}")]
    InvalidWavenumber(f64),
    #[error("Hilbert transform tail {tail:e} exceeds tolerance")]
    TruncationError { tail: f64 },
    #[error("invalid contour grid: {0}")]
    InvalidGrid(String),
    #[error("bracket does not separate stable from unstable profiles")]
    NoSignChange,
}

/// Real-line sampling of the Penrose contour.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContourGrid<T> {
    /// Samples cover `[-half_width, half_width]`; `None` picks a width from the profile.
    pub half_width: Option<T>,
    /// Base sample count before adaptive refinement.
    pub points: usize,
}

impl<T: Real> Default for ContourGrid<T> {
    fn default() -> Self {
        Self {
            half_width: None,
            points: Tolerances::default().contour_points,
        }
    }
}

/// Sampled Penrose contour.
#[derive(Debug, Clone, PartialEq)]
pub struct PenroseContour<T> {
    pub u: Vec<T>,
    pub eps: Vec<Cplx<T>>,
}

/// Stability verdict at one wavenumber.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Classification {
    Stable,
    Unstable {
        count: u32,
    },
    /// The contour passes through the origin within the grazing tolerance.
    Marginal,
}

/// Where the contour meets the real axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxisCrossing<T> {
    /// Phase velocity of the crossing (a zero of `f0'`).
    pub u: T,
    /// `ε` there, which is real.
    pub re_eps: T,
}

/// Result of [`classify_stability`].
#[derive(Debug, Clone, PartialEq)]
pub struct PenroseReport<T> {
    pub classification: Classification,
    pub winding: i32,
    pub crossings: Vec<AxisCrossing<T>>,
    pub contour: PenroseContour<T>,
}

/// Principal-value Hilbert transform of `f0'` by singularity subtraction.
struct Hilbert<T> {
    a: T,
    b: T,
    nodes: Vec<T>,
    weights: Vec<T>,
    g: Vec<T>,
}

impl<T: Real> Hilbert<T> {
    fn new(profile: &Profile<T>, tol: &Tolerances) -> Result<Self, PenroseError> {
        let (a, b) = profile.support();
        let sigma = profile.scale();
        let panels = ((b - a) / (sigma * T::lit(0.5))).ceil().to_f64().max(1.0) as usize;
        let (xg, wg) = gauss_legendre::<T>(16);
        let h = (b - a) / T::from_count(panels);
        let half = h * T::lit(0.5);
        let mut nodes = Vec::with_capacity(panels * 16);
        let mut weights = Vec::with_capacity(panels * 16);
        for j in 0..panels {
            let mid = a + h * (T::from_count(j) + T::lit(0.5));
            for (x, w) in xg.iter().zip(&wg) {
                nodes.push(mid + half * *x);
                weights.push(half * *w);
            }
        }
        let g: Vec<T> = nodes.iter().map(|p| profile.derivative(*p)).collect();
        // Mass of f0' left outside the window, a bound on the dropped integral
        // relative to the distance scale sigma.
        let tail = (profile.value(a) + profile.value(b)) / sigma;
        if tail.to_f64() > tol.hilbert_tail {
            return Err(PenroseError::TruncationError {
                tail: tail.to_f64(),
            });
        }
        Ok(Self {
            a,
            b,
            nodes,
            weights,
            g,
        })
    }

    /// `PV ∫ f0'(p) / (p - u) dp`.
    fn pv(&self, profile: &Profile<T>, u: T) -> T {
        let gu = profile.derivative(u);
        let close = T::lit(1e-7) * profile.scale();
        let mut s = T::zero();
        for ((p, w), g) in self.nodes.iter().zip(&self.weights).zip(&self.g) {
            let d = *p - u;
            let q = if d.abs() < close {
                profile.second_derivative(u)
            } else {
                (*g - gu) / d
            };
            s += *w * q;
        }
        let (da, db) = (self.a - u, self.b - u);
        if !gu.is_zero() && !da.is_zero() && !db.is_zero() {
            s += gu * (db / da).abs().ln();
        }
        s
    }
}

fn check_k<T: Real>(k: T) -> Result<(), PenroseError> {
    if k.is_finite() && k > T::zero() {
        Ok(())
    } else {
        Err(PenroseError::InvalidWavenumber(k.to_f64()))
    }
}

/// `H[f0'](u) = (1/π) PV ∫ f0'(p) / (p - u) dp`.
pub fn hilbert_transform<T: Real>(profile: &Profile<T>, u: T) -> Result<T, PenroseError> {
    let h = Hilbert::new(profile, &Tolerances::default())?;
    Ok(h.pv(profile, u) / T::pi())
}

/// `ε` on the real axis at phase velocity `u`.
pub fn landau_dielectric<T: Real>(
    profile: &Profile<T>,
    k: T,
    u: T,
) -> Result<Cplx<T>, PenroseError> {
    check_k(k)?;
    let h = Hilbert::new(profile, &Tolerances::default())?;
    Ok(eval_on_axis(&h, profile, k, u))
}

fn eval_on_axis<T: Real>(h: &Hilbert<T>, profile: &Profile<T>, k: T, u: T) -> Cplx<T> {
    let inv_k2 = T::one() / (k * k);
    c(
        T::one() - inv_k2 * h.pv(profile, u),
        -T::pi() * inv_k2 * profile.derivative(u),
    )
}

fn default_half_width<T: Real>(profile: &Profile<T>, k: T) -> T {
    let (a, b) = profile.support();
    let edge = a.abs().max(b.abs()) + profile.scale() * T::lit(4.0);
    // Beyond the support ε - 1 decays like n / (k² u²); keep that below 1e-2.
    let far = T::lit(10.0) * profile.density().sqrt() / k;
    edge.max(far)
}

/// Signed angle subtended at the origin by the segment from `a` to `b`.
///
/// Taken from the cross and dot products rather than a difference of
/// arguments, so a segment passing extremely close to the origin keeps the
/// side it passes on even when both arguments round to ±π.
fn turn<T: Real>(a: Cplx<T>, b: Cplx<T>) -> T {
    let cross = a.re * b.im - a.im * b.re;
    let dot = a.re * b.re + a.im * b.im;
    cross.atan2(dot)
}

/// Samples the contour with adaptive refinement where the argument turns
/// quickly or the contour comes close to the origin.
pub fn penrose_contour<T: Real>(
    profile: &Profile<T>,
    k: T,
    grid: &ContourGrid<T>,
) -> Result<PenroseContour<T>, PenroseError> {
    penrose_contour_with(profile, k, grid, &Tolerances::default())
}

/// [`penrose_contour`] with explicit tolerances.
pub fn penrose_contour_with<T: Real>(
    profile: &Profile<T>,
    k: T,
    grid: &ContourGrid<T>,
    tol: &Tolerances,
) -> Result<PenroseContour<T>, PenroseError> {
    check_k(k)?;
    if grid.points < 3 {
        return Err(PenroseError::InvalidGrid("need at least 3 points".into()));
    }
    let l = match grid.half_width {
        Some(l) if l.is_finite() && l > T::zero() => l,
        Some(_) => {
            return Err(PenroseError::InvalidGrid(
                "half width must be positive".into(),
            ))
        }
        None => default_half_width(profile, k),
    };
    let h = Hilbert::new(profile, tol)?;
    let eval = |u: T| eval_on_axis(&h, profile, k, u);
    let n = grid.points;
    let step = (l + l) / T::from_count(n - 1);
    let mut u: Vec<T> = (0..n).map(|i| -l + step * T::from_count(i)).collect();
    let mut eps: Vec<Cplx<T>> = u.iter().map(|x| eval(*x)).collect();

    let max_angle = T::lit(tol.max_angle_step);
    let near = T::lit(10.0 * tol.grazing);
    // A contour through the origin turns by π however finely it is sampled,
    // so refinement stops at a fixed fraction of the base step.
    let min_gap = step * T::lit(1e-6);
    let budget = 200 * n;
    let mut i = 0;
    while i + 1 < u.len() {
        let (e0, e1) = (eps[i], eps[i + 1]);
        let turn = turn(e0, e1).abs();
        let close = e0.modulus().min(e1.modulus()) < near && u[i + 1] - u[i] > step * T::lit(1e-3);
        if (turn > max_angle || close) && u[i + 1] - u[i] > min_gap && u.len() < budget {
            let mid = (u[i] + u[i + 1]) * T::lit(0.5);
            u.insert(i + 1, mid);
            eps.insert(i + 1, eval(mid));
        } else {
            i += 1;
        }
    }
    Ok(PenroseContour { u, eps })
}

/// Winding number of the sampled contour, closed by the segment from the
/// last sample back to the first.
pub fn winding_number<T: Real>(contour: &PenroseContour<T>) -> i32 {
    let e = &contour.eps;
    if e.len() < 2 {
        return 0;
    }
    let mut total = T::zero();
    for w in e.windows(2) {
        total += turn(w[0], w[1]);
    }
    total += turn(e[e.len() - 1], e[0]);
    (total / T::two_pi()).round().to_f64() as i32
}

/// Real-axis crossings of the contour, located at sign changes of `f0'`.
fn crossings<T: Real>(
    profile: &Profile<T>,
    k: T,
    contour: &PenroseContour<T>,
    tol: &Tolerances,
) -> Result<Vec<AxisCrossing<T>>, PenroseError> {
    let h = Hilbert::new(profile, tol)?;
    let mut out = Vec::new();
    let d: Vec<T> = contour.u.iter().map(|u| profile.derivative(*u)).collect();
    // Ignore sign flips of roundoff-sized slopes in the tails.
    let floor = d.iter().fold(T::zero(), |a, x| a.max(x.abs())) * T::lit(1e-12);
    let mut last: Option<(usize, T)> = None;
    for (i, di) in d.iter().enumerate() {
        if di.abs() <= floor {
            continue;
        }
        if let Some((j, dj)) = last {
            if (dj > T::zero()) != (*di > T::zero()) {
                let u = bisect(|x| profile.derivative(x), contour.u[j], contour.u[i])
                    .unwrap_or(contour.u[i]);
                out.push(AxisCrossing {
                    u,
                    re_eps: eval_on_axis(&h, profile, k, u).re,
                });
            }
        }
        last = Some((i, *di));
    }
    Ok(out)
}

/// Classifies stability at `k` from the winding number of the contour.
///
/// The contour can only pass through the origin where it meets the real
/// axis, so closeness to the origin is judged at those crossings.
pub fn classify_stability<T: Real>(
    profile: &Profile<T>,
    k: T,
    grid: &ContourGrid<T>,
) -> Result<PenroseReport<T>, PenroseError> {
    classify_stability_with(profile, k, grid, &Tolerances::default())
}

/// [`classify_stability`] with explicit tolerances.
pub fn classify_stability_with<T: Real>(
    profile: &Profile<T>,
    k: T,
    grid: &ContourGrid<T>,
    tol: &Tolerances,
) -> Result<PenroseReport<T>, PenroseError> {
    let contour = penrose_contour_with(profile, k, grid, tol)?;
    let winding = winding_number(&contour);
    let crossings = crossings(profile, k, &contour, tol)?;
    let grazing = T::lit(tol.grazing);
    let classification = if crossings.iter().any(|x| x.re_eps.abs() < grazing) {
        Classification::Marginal
    } else if winding > 0 {
        Classification::Unstable {
            count: winding as u32,
        }
    } else {
        Classification::Stable
    };
    Ok(PenroseReport {
        classification,
        winding,
        crossings,
        contour,
    })
}

/// Parameter value separating stable from unstable profiles within `bracket`.
///
/// Bisects on the classification. A marginal midpoint is assigned to the
/// unstable side when the closest crossing lies left of the origin.
pub fn critical_parameter<T: Real>(
    family: impl Fn(T) -> Profile<T>,
    k: T,
    bracket: (T, T),
    tol: T,
    grid: &ContourGrid<T>,
) -> Result<T, PenroseError> {
    let unstable = |x: T| -> Result<bool, PenroseError> {
        let r = classify_stability(&family(x), k, grid)?;
        Ok(match r.classification {
            Classification::Stable => false,
            Classification::Unstable { .. } => true,
            Classification::Marginal => r
                .crossings
                .iter()
                .min_by(|a, b| {
                    a.re_eps
                        .abs()
                        .partial_cmp(&b.re_eps.abs())
                        .unwrap_or(std::cmp::Ordering::Equal)
                })
                .is_some_and(|x| x.re_eps < T::zero()),
        })
    };
    let (mut a, mut b) = bracket;
    let ua = unstable(a)?;
    if ua == unstable(b)? {
        return Err(PenroseError::NoSignChange);
    }
    let half = T::lit(0.5);
    while (b - a).abs() > tol {
        let m = (a + b) * half;
        if unstable(m)? == ua {
            a = m;
        } else {
            b = m;
        }
    }
    Ok((a + b) * half)
}

/// Unstable roots of the dielectric in the upper half plane, by Newton
/// iteration from a grid of seeds.
///
/// Growth rates below `2e-2` (in `u`) are beyond the quadrature used here
/// and are not reported; the winding number still counts them.
pub fn locate_unstable_roots<T: Real>(
    profile: &Profile<T>,
    k: T,
) -> Result<Vec<Cplx<T>>, PenroseError> {
    check_k(k)?;
    let (a, b) = profile.support();
    let sigma = profile.scale();
    let floor = T::lit(2e-2);
    let inv_k2 = T::one() / (k * k);
    // Panels narrow enough for the smallest accepted imaginary part.
    let width = (sigma * T::lit(0.5)).min(floor);
    let panels = ((b - a) / width).ceil().to_f64() as usize;
    let (xg, wg) = gauss_legendre::<T>(16);
    let hstep = (b - a) / T::from_count(panels);
    let half = hstep * T::lit(0.5);
    let mut quad = Vec::with_capacity(panels * 16);
    for j in 0..panels {
        let mid = a + hstep * (T::from_count(j) + T::lit(0.5));
        for (x, w) in xg.iter().zip(&wg) {
            let p = mid + half * *x;
            quad.push((p, half * *w * profile.derivative(p)));
        }
    }
    let eval = |u: Cplx<T>| {
        let mut e = cr(T::one());
        let mut d = cr(T::zero());
        for (p, wg) in &quad {
            let x = cr(*p) - u;
            e -= cr(*wg * inv_k2) / x;
            d -= cr(*wg * inv_k2) / (x * x);
        }
        (e, d)
    };
    let mut found: Vec<Cplx<T>> = Vec::new();
    let re_seeds = 41;
    let im_seeds = [0.05, 0.15, 0.4, 0.8, 1.5, 3.0];
    for i in 0..re_seeds {
        for &g in &im_seeds {
            let mut u = c(
                a + (b - a) * T::from_count(i) / T::from_count(re_seeds - 1),
                T::lit(g),
            );
            let mut ok = false;
            for _ in 0..60 {
                let (e, d) = eval(u);
                if d.modulus() == T::zero() {
                    break;
                }
                let step = e / d;
                u -= step;
                if u.im < floor * T::lit(0.5) || !u.re.is_finite() || u.modulus() > T::lit(1e3) {
                    break;
                }
                if step.modulus() < T::lit(1e-13) * u.modulus().max(T::one()) {
                    ok = eval(u).0.modulus() < T::lit(1e-10);
                    break;
                }
            }
            if ok && u.im >= floor && !found.iter().any(|f| (*f - u).modulus() < T::lit(1e-7)) {
                found.push(u);
            }
        }
    }
    found.sort_by(|x, y| x.re.partial_cmp(&y.re).unwrap_or(std::cmp::Ordering::Equal));
    Ok(found)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Trapezoid oracle for the principal value on a symmetric fine grid
    /// that straddles `u`, so the singular terms cancel in pairs.
    fn pv_oracle(profile: &Profile<f64>, u: f64) -> f64 {
        let h = 1e-4;
        let n = 120_000;
        let mut s = 0.0;
        for j in 0..n {
            let d = (j as f64 + 0.5) * h;
            s += (profile.derivative(u + d) - profile.derivative(u - d)) / d;
        }
        s * h
    }

    #[test]
    fn principal_value_matches_oracle() {
        let prof = Profile::BiMaxwellian { c: 1.1 };
        let h = Hilbert::new(&prof, &Tolerances::default()).unwrap();
        for &u in &[-2.3, -0.6, 0.0, 0.41, 1.1, 3.7] {
            let got = h.pv(&prof, u);
            let want = pv_oracle(&prof, u);
            assert!((got - want).abs() < 1e-7, "u={u}: {got} vs {want}");
        }
    }

    #[test]
    fn maxwellian_at_zero_velocity() {
        // PV ∫ -2p e^{-p²} / p dp = -2 sqrt(pi).
        let e = landau_dielectric(&Profile::Maxwellian, 1.0, 0.0).unwrap();
        assert!((e.re - (1.0 + 2.0 * std::f64::consts::PI.sqrt())).abs() < 1e-12);
        assert!(e.im.abs() < 1e-15);
    }

    #[test]
    fn winding_of_unit_circle() {
        let n = 100;
        let eps: Vec<Cplx<f64>> = (0..n)
            .map(|i| {
                let t = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
                Cplx::new(t.cos(), t.sin())
            })
            .collect();
        let u = (0..n).map(|i| i as f64).collect();
        assert_eq!(winding_number(&PenroseContour { u, eps }), 1);
    }
}

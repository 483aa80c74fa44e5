//! Parameter sweeps, mode tracking and classification of stability changes.
//!
//! A sweep solves the dielectric on a grid, tracks modes between grid points
//! by minimum-cost matching, and refines every change in the number of
//! neutral modes by bisection. The modes that leave the real axis are then
//! classified: a collision at zero frequency is steady state, a collision
//! of opposite signatures at non-zero frequency is Hamiltonian Hopf, and a
//! collision of equal signatures would violate Kreĭn's theorem.

use nalgebra::ComplexField as _;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dispersion::{
    find_discrete_modes_with, DispersionError, DispersionFamily, ModeRecord, MultiFluidEquilibrium,
    Signature,
};
use crate::pairing::hungarian;
use crate::scalar::{Cplx, Real};
use crate::tolerance::Tolerances;
use crate::waterbag::{WaterbagEquilibrium, WaterbagError};

/// Errors raised by sweeps and audits.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum BifurcationError {
    #[error("invalid sweep: {0}")]
    InvalidSweep(String),
    #[error("parameter {param} gives an invalid system: {reason}")]
    InvalidParameter { param: f64, reason: String },
    #[error("mode pairing is ambiguous near parameter {param}")]
    PairingAmbiguity { param: f64 },
    #[error("a colliding mode near parameter {param} is already marginal")]
    SignatureUnavailable { param: f64 },
    #[error(transparent)]
    Dispersion(#[from] DispersionError),
}

/// A system that yields a dielectric family and wavenumber for each parameter value.
pub trait ParameterizedSystem<T: Real>: Sync {
    /// Family and wavenumber at `param`.
    fn family_at(&self, param: T) -> Result<(DispersionFamily<T>, T), BifurcationError>;
}

fn invalid<T: Real>(param: T, reason: impl ToString) -> BifurcationError {
    BifurcationError::InvalidParameter {
        param: param.to_f64(),
        reason: reason.to_string(),
    }
}

/// Which multi-fluid parameter a sweep varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MultiFluidControl {
    /// The wavenumber.
    K,
    /// Multiplies every base velocity by the parameter.
    StreamSpeed,
    /// Velocity of one species.
    SpeciesVelocity { species: usize },
    /// Squared sound speed of one species.
    SoundSpeedSq { species: usize },
    /// Density of one species.
    Density { species: usize },
}

/// A multi-fluid equilibrium with one varying parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiFluidSweep<T: Real> {
    pub base: MultiFluidEquilibrium<T>,
    pub k: T,
    pub control: MultiFluidControl,
}

impl<T: Real> ParameterizedSystem<T> for MultiFluidSweep<T> {
    fn family_at(&self, param: T) -> Result<(DispersionFamily<T>, T), BifurcationError> {
        let mut eq = self.base.clone();
        let mut k = self.k;
        let n = eq.species().len();
        let check = |i: usize| {
            if i < n {
                Ok(i)
            } else {
                Err(invalid(param, format!("species {i} does not exist")))
            }
        };
        match self.control {
            MultiFluidControl::K => k = param,
            MultiFluidControl::StreamSpeed => {
                eq.species_mut().iter_mut().for_each(|s| s.u *= param)
            }
            MultiFluidControl::SpeciesVelocity { species } => {
                eq.species_mut()[check(species)?].u = param
            }
            MultiFluidControl::SoundSpeedSq { species } => {
                eq.species_mut()[check(species)?].c2 = param
            }
            MultiFluidControl::Density { species } => {
                let i = check(species)?;
                if !param.is_finite() || param <= T::zero() {
                    return Err(invalid(param, "density must be positive"));
                }
                eq.species_mut()[i].rho = param;
            }
        }
        if !(k.is_finite() && k > T::zero()) {
            return Err(invalid(param, "wavenumber must be positive"));
        }
        Ok((DispersionFamily::MultiFluid(eq), k))
    }
}

/// Which waterbag parameter a sweep varies.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WaterbagControl {
    /// The wavenumber.
    K,
    /// Adds the parameter to the listed contour positions.
    Shift { contours: Vec<usize> },
}

/// A waterbag with one varying parameter.
///
/// Base positions need not be ordered when a shift is applied; ordering is
/// checked for every parameter value.
#[derive(Debug, Clone, PartialEq)]
pub struct WaterbagSweep<T: Real> {
    pub contours: Vec<T>,
    pub levels: Vec<T>,
    pub k: T,
    pub control: WaterbagControl,
}

impl<T: Real> WaterbagSweep<T> {
    /// Sweep over `k` for a fixed waterbag.
    pub fn over_k(wb: &WaterbagEquilibrium<T>) -> Self {
        Self {
            contours: wb.contours().to_vec(),
            levels: wb.levels().to_vec(),
            k: T::one(),
            control: WaterbagControl::K,
        }
    }
}

impl<T: Real> ParameterizedSystem<T> for WaterbagSweep<T> {
    fn family_at(&self, param: T) -> Result<(DispersionFamily<T>, T), BifurcationError> {
        let mut p = self.contours.clone();
        let mut k = self.k;
        match &self.control {
            WaterbagControl::K => k = param,
            WaterbagControl::Shift { contours } => {
                for &i in contours {
                    let slot = p
                        .get_mut(i)
                        .ok_or_else(|| invalid(param, format!("contour {i} does not exist")))?;
                    *slot += param;
                }
            }
        }
        if !(k.is_finite() && k > T::zero()) {
            return Err(invalid(param, "wavenumber must be positive"));
        }
        let wb = WaterbagEquilibrium::new(p, self.levels.clone())
            .map_err(|e: WaterbagError| invalid(param, e))?;
        Ok((DispersionFamily::Waterbag(wb), k))
    }
}

/// A validated parameter grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec<T> {
    grid: Vec<T>,
}

impl<T: Real> SweepSpec<T> {
    /// Accepts at least three finite, strictly monotone values (either direction).
    pub fn new(grid: Vec<T>) -> Result<Self, BifurcationError> {
        if grid.len() < 3 {
            return Err(BifurcationError::InvalidSweep(
                "need at least three grid points".into(),
            ));
        }
        if grid.iter().any(|x| !x.is_finite()) {
            return Err(BifurcationError::InvalidSweep(
                "grid values must be finite".into(),
            ));
        }
        let up = grid.windows(2).all(|w| w[1] > w[0]);
        let down = grid.windows(2).all(|w| w[1] < w[0]);
        if !(up || down) {
            return Err(BifurcationError::InvalidSweep(
                "grid must be strictly monotone".into(),
            ));
        }
        Ok(Self { grid })
    }

    /// `n` equally spaced values from `start` to `stop`.
    pub fn linspace(start: T, stop: T, n: usize) -> Result<Self, BifurcationError> {
        if n < 2 {
            return Err(BifurcationError::InvalidSweep(
                "need at least three grid points".into(),
            ));
        }
        let step = (stop - start) / T::from_count(n - 1);
        Self::new((0..n).map(|i| start + step * T::from_count(i)).collect())
    }

    pub fn values(&self) -> &[T] {
        &self.grid
    }
}

/// Kind of a stability change.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    /// Collision at zero frequency.
    SteadyState,
    /// Collision of opposite signatures at non-zero frequency.
    HamiltonianHopf,
    /// Modes of equal signature left the real axis together, which the
    /// theory forbids; reported for audits.
    AvoidedCrossing,
}

/// Shape of the complex modes just past the event.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PostStructure {
    /// A purely growing/decaying pair.
    Doublet,
    /// Complex frequencies with non-zero real part.
    Quartet,
}

/// Whether modes leave or return to the real axis along the sweep direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Onset,
    Restabilization,
}

/// A refined stability change.
#[derive(Debug, Clone, PartialEq)]
pub struct BifurcationEvent<T: Real> {
    pub param: T,
    pub kind: EventKind,
    pub direction: Direction,
    /// Frequency at which the colliding modes meet.
    pub omega_star: T,
    /// Signatures of the colliding modes on the neutral side.
    pub pre_signatures: Vec<Signature>,
    pub post_structure: PostStructure,
    /// Number of Hamiltonian eigenvalues involved (two per colliding root).
    pub multiplicity: usize,
    /// Growth rate of the new complex pair on the unstable side of the bracket.
    pub growth_rate: T,
}

/// Modes at one grid point, in tracked order.
#[derive(Debug, Clone, PartialEq)]
pub struct LocusPoint<T: Real> {
    pub param: T,
    pub modes: Vec<ModeRecord<T>>,
}

/// Output of [`sweep`].
#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult<T: Real> {
    pub loci: Vec<LocusPoint<T>>,
    /// Steady-state and Hamiltonian-Hopf events.
    pub events: Vec<BifurcationEvent<T>>,
    /// Equal-signature collisions that nevertheless changed the neutral count.
    pub avoided: Vec<BifurcationEvent<T>>,
    /// Non-fatal anomalies, such as ambiguous pairings.
    pub warnings: Vec<BifurcationError>,
}

/// Options for [`sweep`].
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SweepOptions {
    pub tolerances: Tolerances,
    /// Turn pairing ambiguities into errors instead of warnings.
    pub strict: bool,
}

fn solve<T: Real>(
    sys: &dyn ParameterizedSystem<T>,
    param: T,
    tol: &Tolerances,
) -> Result<Vec<ModeRecord<T>>, BifurcationError> {
    let (family, k) = sys.family_at(param)?;
    Ok(find_discrete_modes_with(&family, k, tol)?)
}

fn is_neutral<T: Real>(m: &ModeRecord<T>, tol: &Tolerances) -> bool {
    m.omega.im.abs() <= T::lit(tol.departure) * m.omega.modulus().max(T::one())
}

fn neutral_count<T: Real>(modes: &[ModeRecord<T>], tol: &Tolerances) -> usize {
    modes.iter().filter(|m| is_neutral(m, tol)).count()
}

fn cost_matrix<T: Real>(a: &[Cplx<T>], b: &[Cplx<T>]) -> Vec<Vec<f64>> {
    a.iter()
        .map(|x| b.iter().map(|y| (*x - *y).modulus().to_f64()).collect())
        .collect()
}

/// Reorders `next` so that entry `i` continues entry `i` of `prev`.
///
/// Returns the reordered modes and whether the assignment was ambiguous:
/// some mode moved further than the gap between its two nearest candidates.
fn track<T: Real>(
    prev: &[ModeRecord<T>],
    next: Vec<ModeRecord<T>>,
    tol: &Tolerances,
) -> (Vec<ModeRecord<T>>, bool) {
    if prev.len() != next.len() {
        return (next, true);
    }
    let a: Vec<Cplx<T>> = prev.iter().map(|m| m.omega).collect();
    let b: Vec<Cplx<T>> = next.iter().map(|m| m.omega).collect();
    let cost = cost_matrix(&a, &b);
    let assign = hungarian(&cost);
    let mut ambiguous = false;
    for (i, row) in cost.iter().enumerate() {
        let chosen = row[assign[i]];
        for (j, c) in row.iter().enumerate() {
            if j == assign[i] {
                continue;
            }
            let sep = (b[j] - b[assign[i]]).modulus().to_f64();
            if sep > tol.collision && *c - chosen < 1e-3 * sep && chosen > 0.25 * sep {
                ambiguous = true;
            }
        }
    }
    let out = assign.iter().map(|&j| next[j]).collect();
    (out, ambiguous)
}

/// Runs a sweep and classifies every stability change.
pub fn sweep<T: Real>(
    sys: &dyn ParameterizedSystem<T>,
    spec: &SweepSpec<T>,
    opts: &SweepOptions,
) -> Result<SweepResult<T>, BifurcationError> {
    let tol = &opts.tolerances;
    let solved: Vec<Result<Vec<ModeRecord<T>>, BifurcationError>> =
        spec.grid.par_iter().map(|p| solve(sys, *p, tol)).collect();
    let mut loci: Vec<LocusPoint<T>> = Vec::with_capacity(spec.grid.len());
    let mut warnings = Vec::new();
    for (p, modes) in spec.grid.iter().zip(solved) {
        let modes = modes?;
        let modes = match loci.last() {
            Some(prev) => {
                let (m, amb) = track(&prev.modes, modes, tol);
                if amb {
                    let w = BifurcationError::PairingAmbiguity { param: p.to_f64() };
                    if opts.strict {
                        return Err(w);
                    }
                    warnings.push(w);
                }
                m
            }
            None => modes,
        };
        loci.push(LocusPoint { param: *p, modes });
    }

    let mut events = Vec::new();
    for w in loci.windows(2) {
        let (n0, n1) = (
            neutral_count(&w[0].modes, tol),
            neutral_count(&w[1].modes, tol),
        );
        if n0 != n1 {
            events.extend(refine_transition(
                sys,
                (w[0].param, n0),
                (w[1].param, n1),
                tol,
            )?);
        }
    }
    let (avoided, events) = events
        .into_iter()
        .partition(|e| e.kind == EventKind::AvoidedCrossing);
    Ok(SweepResult {
        loci,
        events,
        avoided,
        warnings,
    })
}

/// Bisects a change in neutral count and classifies the collisions found.
fn refine_transition<T: Real>(
    sys: &dyn ParameterizedSystem<T>,
    left: (T, usize),
    right: (T, usize),
    tol: &Tolerances,
) -> Result<Vec<BifurcationEvent<T>>, BifurcationError> {
    let (mut a, na) = left;
    let (mut b, _) = right;
    let half = T::lit(0.5);
    let width = T::lit(tol.bisection);
    while (b - a).abs() > width {
        let m = (a + b) * half;
        let nm = neutral_count(&solve(sys, m, tol)?, tol);
        if nm == na {
            a = m;
        } else {
            b = m;
        }
    }
    let (ma, mb) = (solve(sys, a, tol)?, solve(sys, b, tol)?);
    let (ca, cb) = (neutral_count(&ma, tol), neutral_count(&mb, tol));
    let direction = if cb < ca {
        Direction::Onset
    } else {
        Direction::Restabilization
    };
    let (neutral_side, unstable_side) = if ca > cb { (&ma, &mb) } else { (&mb, &ma) };
    let param = (a + b) * half;
    collisions(neutral_side, unstable_side, param, direction, tol)
}

fn collisions<T: Real>(
    neutral_side: &[ModeRecord<T>],
    unstable_side: &[ModeRecord<T>],
    param: T,
    direction: Direction,
    tol: &Tolerances,
) -> Result<Vec<BifurcationEvent<T>>, BifurcationError> {
    if neutral_side.len() != unstable_side.len() {
        return Err(BifurcationError::PairingAmbiguity {
            param: param.to_f64(),
        });
    }
    let a: Vec<Cplx<T>> = neutral_side.iter().map(|m| m.omega).collect();
    let b: Vec<Cplx<T>> = unstable_side.iter().map(|m| m.omega).collect();
    let assign = hungarian(&cost_matrix(&a, &b));
    // Neutral modes whose image left the real axis, with that image.
    let mut moved: Vec<(usize, Cplx<T>)> = assign
        .iter()
        .enumerate()
        .filter(|(i, j)| {
            is_neutral(&neutral_side[*i], tol) && !is_neutral(&unstable_side[**j], tol)
        })
        .map(|(i, j)| (i, unstable_side[*j].omega))
        .collect();
    moved.sort_by(|x, y| {
        x.1.re
            .partial_cmp(&y.1.re)
            .unwrap_or(std::cmp::Ordering::Equal)
    });

    // Pair each upper-half-plane image with its conjugate partner.
    let mut used = vec![false; moved.len()];
    let mut events = Vec::new();
    for i in 0..moved.len() {
        if used[i] || moved[i].1.im <= T::zero() {
            continue;
        }
        let target = moved[i].1.conj();
        let partner = (0..moved.len())
            .filter(|&j| !used[j] && j != i && moved[j].1.im < T::zero())
            .min_by(|&x, &y| {
                (moved[x].1 - target)
                    .modulus()
                    .partial_cmp(&(moved[y].1 - target).modulus())
                    .unwrap_or(std::cmp::Ordering::Equal)
            });
        let Some(j) = partner else { continue };
        used[i] = true;
        used[j] = true;
        let pre = [neutral_side[moved[i].0], neutral_side[moved[j].0]];
        let omega_star = (pre[0].omega.re + pre[1].omega.re) * T::lit(0.5);
        let post = [moved[i].1, moved[j].1];
        let (kind, post_structure) = classify_event(&pre, &post, omega_star, param, tol)?;
        events.push(BifurcationEvent {
            param,
            kind,
            direction,
            omega_star,
            pre_signatures: pre.iter().map(|m| m.signature).collect(),
            post_structure,
            multiplicity: 2 * pre.len(),
            growth_rate: moved[i].1.im,
        });
    }
    Ok(events)
}

/// Classifies a collision from the neutral modes before it and the complex
/// modes after it.
pub fn classify_event<T: Real>(
    pre: &[ModeRecord<T>],
    post: &[Cplx<T>],
    omega_star: T,
    param: T,
    tol: &Tolerances,
) -> Result<(EventKind, PostStructure), BifurcationError> {
    let coll = T::lit(tol.collision);
    let structure = if post.iter().any(|w| w.re.abs() > coll) {
        PostStructure::Quartet
    } else {
        PostStructure::Doublet
    };
    if omega_star.abs() < coll {
        return Ok((EventKind::SteadyState, structure));
    }
    let mut signs = Vec::with_capacity(pre.len());
    for m in pre {
        match m.signature {
            Signature::Positive => signs.push(1),
            Signature::Negative => signs.push(-1),
            Signature::Marginal => {
                return Err(BifurcationError::SignatureUnavailable {
                    param: param.to_f64(),
                });
            }
        }
    }
    let opposite = signs.contains(&1) && signs.contains(&-1);
    let kind = if opposite {
        EventKind::HamiltonianHopf
    } else {
        EventKind::AvoidedCrossing
    };
    Ok((kind, structure))
}

/// Outcome of a randomized Kreĭn audit.
#[derive(Debug, Clone, PartialEq)]
pub struct KreinAuditReport<T: Real> {
    pub samples: usize,
    pub events: Vec<BifurcationEvent<T>>,
    /// Events that break the signature rule, or collisions whose signatures
    /// could not be determined.
    pub violations: Vec<String>,
}

impl<T: Real> KreinAuditReport<T> {
    pub fn count(&self, kind: EventKind) -> usize {
        self.events.iter().filter(|e| e.kind == kind).count()
    }
}

/// Draws `samples` parameter values uniformly from `range`, locates every
/// stability change between consecutive draws and checks that each
/// non-zero-frequency onset involves modes of opposite signature.
pub fn krein_audit<T: Real>(
    sys: &dyn ParameterizedSystem<T>,
    range: (T, T),
    samples: usize,
    seed: u64,
    tol: &Tolerances,
) -> Result<KreinAuditReport<T>, BifurcationError> {
    if samples < 2 || !(range.0.is_finite() && range.1.is_finite()) || range.1 <= range.0 {
        return Err(BifurcationError::InvalidSweep(
            "audit needs two samples and a non-empty range".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (lo, hi) = (range.0.to_f64(), range.1.to_f64());
    let mut params: Vec<T> = (0..samples)
        .map(|_| T::lit(rng.random_range(lo..hi)))
        .collect();
    params.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    let counts: Vec<Result<usize, BifurcationError>> = params
        .par_iter()
        .map(|p| solve(sys, *p, tol).map(|m| neutral_count(&m, tol)))
        .collect();
    let counts: Vec<usize> = counts.into_iter().collect::<Result<_, _>>()?;
    let mut events = Vec::new();
    let mut violations = Vec::new();
    for i in 1..params.len() {
        if counts[i] == counts[i - 1] {
            continue;
        }
        match refine_transition(
            sys,
            (params[i - 1], counts[i - 1]),
            (params[i], counts[i]),
            tol,
        ) {
            Ok(evs) => {
                for e in evs {
                    if e.kind == EventKind::AvoidedCrossing {
                        violations.push(format!(
                            "equal signatures collide at parameter {:.9} (omega {:.9})",
                            e.param.to_f64(),
                            e.omega_star.to_f64()
                        ));
                    } else {
                        events.push(e);
                    }
                }
            }
            Err(e @ BifurcationError::SignatureUnavailable { .. }) => {
                violations.push(e.to_string())
            }
            Err(e) => return Err(e),
        }
    }
    Ok(KreinAuditReport {
        samples,
        events,
        violations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_validation() {
        assert!(SweepSpec::new(vec![0.0, 1.0]).is_err());
        assert!(SweepSpec::new(vec![0.0, 2.0, 1.0]).is_err());
        assert!(SweepSpec::new(vec![3.0, 2.0, 1.0]).is_ok());
        assert!(SweepSpec::new(vec![0.0, f64::NAN, 1.0]).is_err());
    }

    #[test]
    fn counterstream_steady_state_onset() {
        let sys = MultiFluidSweep {
            base: MultiFluidEquilibrium::counterstream(1.0),
            k: 1.0,
            control: MultiFluidControl::StreamSpeed,
        };
        let spec = SweepSpec::linspace(1.2, 0.3, 19).unwrap();
        let r = sweep(&sys, &spec, &SweepOptions::default()).unwrap();
        assert_eq!(r.events.len(), 1);
        let e = &r.events[0];
        assert_eq!(e.kind, EventKind::SteadyState);
        assert_eq!(e.direction, Direction::Onset);
        assert_eq!(e.post_structure, PostStructure::Doublet);
        assert_eq!(e.multiplicity, 4);
        assert!((e.param - 0.5f64.sqrt()).abs() < 1e-6);
    }
}

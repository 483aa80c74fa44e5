//! Smooth equilibrium distributions `f0(p)`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Real;

/// Errors raised when building a tabulated profile.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProfileError {
    #[error("tabulated profile needs at least 4 nodes with matching lengths")]
    TooShort,
    #[error("tabulated nodes must be finite and strictly increasing")]
    Unordered,
    #[error("tabulated values must be finite and non-negative")]
    BadValue,
}

/// Distribution known on a grid, interpolated by cubic Hermite pieces.
///
/// Node slopes come from centered differences, one-sided at the ends. The
/// profile vanishes outside the table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Table<T>", into = "Table<T>")]
#[serde(bound(
    serialize = "T: Real + Serialize",
    deserialize = "T: Real + Deserialize<'de>"
))]
pub struct TabulatedProfile<T: Real> {
    p: Vec<T>,
    f: Vec<T>,
    slope: Vec<T>,
}

/// Serialized form of a table: nodes and values only.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct Table<T> {
    p: Vec<T>,
    f: Vec<T>,
}

impl<T: Real> TryFrom<Table<T>> for TabulatedProfile<T> {
    type Error = ProfileError;
    fn try_from(t: Table<T>) -> Result<Self, ProfileError> {
        Self::new(t.p, t.f)
    }
}

impl<T: Real> From<TabulatedProfile<T>> for Table<T> {
    fn from(t: TabulatedProfile<T>) -> Self {
        Table { p: t.p, f: t.f }
    }
}

impl<T: Real> TabulatedProfile<T> {
    pub fn new(p: Vec<T>, f: Vec<T>) -> Result<Self, ProfileError> {
        if p.len() < 4 || p.len() != f.len() {
            return Err(ProfileError::TooShort);
        }
        if p.iter().any(|x| !x.is_finite()) || p.windows(2).any(|w| w[1] <= w[0]) {
            return Err(ProfileError::Unordered);
        }
        if f.iter().any(|x| !x.is_finite() || *x < T::zero()) {
            return Err(ProfileError::BadValue);
        }
        let n = p.len();
        let slope = (0..n)
            .map(|i| {
                let (a, b) = (i.saturating_sub(1), (i + 1).min(n - 1));
                (f[b] - f[a]) / (p[b] - p[a])
            })
            .collect();
        Ok(Self { p, f, slope })
    }

    pub fn nodes(&self) -> &[T] {
        &self.p
    }

    pub fn values(&self) -> &[T] {
        &self.f
    }

    fn locate(&self, x: T) -> Option<usize> {
        let n = self.p.len();
        if x < self.p[0] || x > self.p[n - 1] {
            return None;
        }
        let i = self.p.partition_point(|v| *v <= x);
        Some(i.clamp(1, n - 1) - 1)
    }

    /// Value, first and second derivative of the interpolant.
    fn eval(&self, x: T) -> (T, T, T) {
        let Some(i) = self.locate(x) else {
            return (T::zero(), T::zero(), T::zero());
        };
        let h = self.p[i + 1] - self.p[i];
        let t = (x - self.p[i]) / h;
        let (y0, y1) = (self.f[i], self.f[i + 1]);
        let (m0, m1) = (self.slope[i] * h, self.slope[i + 1] * h);
        let two = T::lit(2.0);
        let three = T::lit(3.0);
        let six = T::lit(6.0);
        let t2 = t * t;
        let t3 = t2 * t;
        let v = (two * t3 - three * t2 + T::one()) * y0
            + (t3 - two * t2 + t) * m0
            + (-two * t3 + three * t2) * y1
            + (t3 - t2) * m1;
        let d = ((six * t2 - six * t) * y0
            + (three * t2 - T::lit(4.0) * t + T::one()) * m0
            + (-six * t2 + six * t) * y1
            + (three * t2 - two * t) * m1)
            / h;
        let dd = ((T::lit(12.0) * t - six) * y0
            + (six * t - T::lit(4.0)) * m0
            + (-T::lit(12.0) * t + six) * y1
            + (six * t - two) * m1)
            / (h * h);
        (v, d, dd)
    }
}

/// A one-dimensional equilibrium distribution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(
    serialize = "T: Real + Serialize",
    deserialize = "T: Real + Deserialize<'de>"
))]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Profile<T: Real> {
    /// `exp(-p²)`.
    Maxwellian,
    /// `exp(-(p + c)²) + exp(-(p - c)²)`.
    BiMaxwellian { c: T },
    /// Interpolated table.
    Tabulated(TabulatedProfile<T>),
}

impl<T: Real> Profile<T> {
    /// `f0(p)`.
    pub fn value(&self, p: T) -> T {
        self.eval(p).0
    }

    /// `f0'(p)`.
    pub fn derivative(&self, p: T) -> T {
        self.eval(p).1
    }

    /// `f0''(p)`.
    pub fn second_derivative(&self, p: T) -> T {
        self.eval(p).2
    }

    fn eval(&self, p: T) -> (T, T, T) {
        let two = T::lit(2.0);
        let gauss = |x: T| {
            let e = (-x * x).exp();
            (e, -two * x * e, (T::lit(4.0) * x * x - two) * e)
        };
        match self {
            Self::Maxwellian => gauss(p),
            Self::BiMaxwellian { c } => {
                let a = gauss(p + *c);
                let b = gauss(p - *c);
                (a.0 + b.0, a.1 + b.1, a.2 + b.2)
            }
            Self::Tabulated(t) => t.eval(p),
        }
    }

    /// Region outside which the profile is negligible (or zero).
    pub fn support(&self) -> (T, T) {
        // exp(-64) is below 1e-27.
        let reach = T::lit(8.0);
        match self {
            Self::Maxwellian => (-reach, reach),
            Self::BiMaxwellian { c } => {
                let c = c.abs();
                (-c - reach, c + reach)
            }
            Self::Tabulated(t) => (t.p[0], t.p[t.p.len() - 1]),
        }
    }

    /// Typical width of the features of `f0`, used to size quadrature panels.
    pub fn scale(&self) -> T {
        match self {
            Self::Maxwellian | Self::BiMaxwellian { .. } => T::lit(std::f64::consts::FRAC_1_SQRT_2),
            Self::Tabulated(t) => {
                let min_h =
                    t.p.windows(2)
                        .map(|w| w[1] - w[0])
                        .fold(T::max_value().unwrap_or_else(T::one), |a, b| a.min(b));
                min_h * T::lit(4.0)
            }
        }
    }

    /// Total density `∫ f0 dp`.
    pub fn density(&self) -> T {
        let sqrt_pi = T::pi().sqrt();
        match self {
            Self::Maxwellian => sqrt_pi,
            Self::BiMaxwellian { .. } => sqrt_pi * T::lit(2.0),
            Self::Tabulated(t) => {
                let (x, w) =
                    crate::quadrature::composite(t.p[0], t.p[t.p.len() - 1], t.p.len() - 1, 4);
                x.iter()
                    .zip(&w)
                    .fold(T::zero(), |acc, (x, w)| acc + *w * t.eval(*x).0)
            }
        }
    }
}

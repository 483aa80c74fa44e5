//! Run configuration: one system, one analysis, output settings and
//! tolerance overrides.

use std::path::PathBuf;

use krein_core::dispersion::{Coupling, Species};
use krein_core::penrose::ContourGrid;
use krein_core::{Distribution, MultiFluid, Tolerances, Waterbag};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// A complete run description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub system: SystemConfig,
    pub analysis: AnalysisConfig,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub tolerances: Tolerances,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum SystemConfig {
    Multifluid {
        species: Vec<Species<f64>>,
        coupling: Coupling,
    },
    Waterbag(WaterbagSpec),
    Distribution {
        profile: Distribution,
    },
}

/// A waterbag given either by contour positions and layer levels or by
/// `(p, Δf)` jump pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
pub enum WaterbagSpec {
    Levels {
        contours: Vec<f64>,
        levels: Vec<f64>,
    },
    Pairs {
        pairs: Vec<(f64, f64)>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum AnalysisConfig {
    /// Discrete spectrum at one wavenumber.
    Modes { k: f64 },
    /// Penrose contour and stability verdict.
    Penrose {
        k: f64,
        #[serde(default)]
        grid: ContourGrid<f64>,
    },
    /// Parameter sweep with bifurcation detection.
    Sweep {
        control: SweepControl,
        grid: SweepGrid,
        /// Fixed wavenumber; not used when the control is `k`.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        k: Option<f64>,
    },
    /// Symplectic normal form of a multi-fluid block.
    Normalform { k: f64 },
    /// Onion-peel waterbag approximation of a distribution.
    Discretize { m: usize, p_range: (f64, f64) },
    /// Real-axis dielectric for a graphical root count.
    DispersionScan {
        k: f64,
        u_range: (f64, f64),
        points: usize,
    },
}

/// Swept parameter. The first group applies to multi-fluid systems,
/// `shift` to waterbags and `k` to both.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SweepControl {
    K,
    StreamSpeed,
    SpeciesVelocity { species: usize },
    SoundSpeedSq { species: usize },
    Density { species: usize },
    Shift { contours: Vec<usize> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
pub enum SweepGrid {
    Linspace {
        start: f64,
        stop: f64,
        points: usize,
    },
    Values {
        values: Vec<f64>,
    },
}

impl SweepGrid {
    pub fn values(&self) -> Vec<f64> {
        match self {
            Self::Linspace {
                start,
                stop,
                points,
            } => {
                let n = *points;
                if n < 2 {
                    return vec![*start; n];
                }
                let step = (stop - start) / (n - 1) as f64;
                (0..n).map(|i| start + step * i as f64).collect()
            }
            Self::Values { values } => values.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub format: Format,
    /// Directory receiving the output files.
    pub path: PathBuf,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            format: Format::Csv,
            path: PathBuf::from("krein-out"),
        }
    }
}

/// A system after validation.
#[derive(Debug, Clone)]
pub enum System {
    MultiFluid(MultiFluid),
    Waterbag(Waterbag),
    Distribution(Distribution),
}

impl SystemConfig {
    fn kind(&self) -> &'static str {
        match self {
            Self::Multifluid { .. } => "multifluid",
            Self::Waterbag(_) => "waterbag",
            Self::Distribution { .. } => "distribution",
        }
    }

    pub fn build(&self) -> Result<System, CliError> {
        Ok(match self {
            Self::Multifluid { species, coupling } => System::MultiFluid(
                MultiFluid::new(species.clone(), *coupling).map_err(CliError::usage)?,
            ),
            Self::Waterbag(WaterbagSpec::Levels { contours, levels }) => System::Waterbag(
                Waterbag::new(contours.clone(), levels.clone()).map_err(CliError::usage)?,
            ),
            Self::Waterbag(WaterbagSpec::Pairs { pairs }) => {
                System::Waterbag(Waterbag::from_jumps(pairs).map_err(CliError::usage)?)
            }
            Self::Distribution { profile } => System::Distribution(profile.clone()),
        })
    }
}

impl AnalysisConfig {
    fn kind(&self) -> &'static str {
        match self {
            Self::Modes { .. } => "modes",
            Self::Penrose { .. } => "penrose",
            Self::Sweep { .. } => "sweep",
            Self::Normalform { .. } => "normalform",
            Self::Discretize { .. } => "discretize",
            Self::DispersionScan { .. } => "dispersion_scan",
        }
    }
}

fn positive(name: &str, x: f64) -> Result<(), CliError> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(CliError::Usage(format!(
            "{name} must be finite and positive, got {x}"
        )))
    }
}

fn range(name: &str, (a, b): (f64, f64)) -> Result<(), CliError> {
    if a.is_finite() && b.is_finite() && b > a {
        Ok(())
    } else {
        Err(CliError::Usage(format!(
            "{name} must be an increasing finite pair, got [{a}, {b}]"
        )))
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Usage(format!("config: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Checks the config without running anything and returns the built system.
    pub fn validate(&self) -> Result<System, CliError> {
        let system = self.system.build()?;
        let illegal = || {
            CliError::Usage(format!(
                "analysis '{}' is not available for a {} system",
                self.analysis.kind(),
                self.system.kind()
            ))
        };
        match (&self.analysis, &system) {
            (AnalysisConfig::Modes { k }, System::MultiFluid(_) | System::Waterbag(_)) => {
                positive("k", *k)?
            }
            (AnalysisConfig::Penrose { k, grid }, System::Distribution(_)) => {
                positive("k", *k)?;
                if grid.points < 3 {
                    return Err(CliError::Usage(
                        "penrose grid needs at least 3 points".into(),
                    ));
                }
                if let Some(l) = grid.half_width {
                    positive("grid.half_width", l)?;
                }
            }
            (
                AnalysisConfig::Sweep { control, grid, k },
                System::MultiFluid(_) | System::Waterbag(_),
            ) => {
                let n = match &system {
                    System::MultiFluid(eq) => eq.species().len(),
                    System::Waterbag(wb) => wb.len(),
                    System::Distribution(_) => unreachable!(),
                };
                let legal = match (control, &system) {
                    (SweepControl::K, _) => true,
                    (SweepControl::Shift { contours }, System::Waterbag(_)) => {
                        if let Some(i) = contours.iter().find(|&&i| i >= n) {
                            return Err(CliError::Usage(format!("contour {i} does not exist")));
                        }
                        !contours.is_empty()
                    }
                    (SweepControl::Shift { .. }, _) => false,
                    (_, System::MultiFluid(_)) => true,
                    _ => false,
                };
                if !legal {
                    return Err(CliError::Usage(format!(
                        "sweep control {control:?} is not available for a {} system",
                        self.system.kind()
                    )));
                }
                if let SweepControl::SpeciesVelocity { species }
                | SweepControl::SoundSpeedSq { species }
                | SweepControl::Density { species } = control
                {
                    if *species >= n {
                        return Err(CliError::Usage(format!("species {species} does not exist")));
                    }
                }
                match (control, k) {
                    (SweepControl::K, _) => {}
                    (_, Some(k)) => positive("k", *k)?,
                    (_, None) => {
                        return Err(CliError::Usage(
                            "sweep needs k unless the control is k".into(),
                        ))
                    }
                }
                krein_core::bifurcation::SweepSpec::new(grid.values()).map_err(CliError::usage)?;
            }
            (AnalysisConfig::Normalform { k }, System::MultiFluid(_)) => positive("k", *k)?,
            (AnalysisConfig::Discretize { m, p_range }, System::Distribution(_)) => {
                range("p_range", *p_range)?;
                if *m < 2 || m % 2 == 1 {
                    return Err(CliError::Usage(format!(
                        "m must be even and at least 2, got {m}"
                    )));
                }
            }
            (
                AnalysisConfig::DispersionScan { k, u_range, points },
                System::MultiFluid(_) | System::Waterbag(_),
            ) => {
                positive("k", *k)?;
                range("u_range", *u_range)?;
                if *points < 2 {
                    return Err(CliError::Usage(
                        "dispersion scan needs at least 2 points".into(),
                    ));
                }
            }
            _ => return Err(illegal()),
        }
        Ok(system)
    }
}

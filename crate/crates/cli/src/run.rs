//! Executes a validated config and collects the result tables.

use krein_core::bifurcation::{
    sweep, BifurcationError, BifurcationEvent, MultiFluidControl, MultiFluidSweep,
    ParameterizedSystem, SweepOptions, SweepSpec, WaterbagControl, WaterbagSweep,
};
use krein_core::dispersion::{eval_dispersion, find_discrete_modes_with, Signature};
use krein_core::normalform::{build_block, normal_form_with, NormalFormClass};
use krein_core::penrose::{classify_stability_with, Classification};
use krein_core::waterbag::{discretize_distribution, waterbag_dispersion};
use krein_core::{Complex64, Family, Tolerances};
use serde_json::json;

use crate::config::{AnalysisConfig, RunConfig, SweepControl, System};
use crate::error::CliError;
use crate::table::{RunOutput, Table};

pub const MODE_COLUMNS: &[&str] = &[
    "k",
    "mode_index",
    "re_omega",
    "im_omega",
    "signature",
    "energy",
    "near_pole",
];
pub const CONTOUR_COLUMNS: &[&str] = &["u", "re_eps", "im_eps"];
pub const CLASSIFICATION_COLUMNS: &[&str] = &[
    "summary",
    "classification",
    "unstable_count",
    "winding",
    "k",
];
pub const CROSSING_COLUMNS: &[&str] = &["u", "re_eps"];
pub const LOCI_COLUMNS: &[&str] = &["param", "mode_index", "re_omega", "im_omega", "signature"];
pub const EVENT_COLUMNS: &[&str] = &[
    "param",
    "kind",
    "direction",
    "omega_star",
    "pre_signatures",
    "post_structure",
    "multiplicity",
    "growth_rate",
];
pub const NORMAL_MODE_COLUMNS: &[&str] = &["mode_index", "re_omega", "im_omega", "sigma"];
pub const NORMAL_FORM_COLUMNS: &[&str] = &[
    "classification",
    "unstable_count",
    "reconstruction_error",
    "k",
];
pub const WATERBAG_COLUMNS: &[&str] = &["contour_index", "p", "delta_f", "level_above"];
pub const SCAN_COLUMNS: &[&str] = &["u", "eps"];

fn signature_name(s: Signature) -> &'static str {
    match s {
        Signature::Positive => "positive",
        Signature::Negative => "negative",
        Signature::Marginal => "marginal",
    }
}

fn snake<T: serde::Serialize>(v: &T) -> String {
    match serde_json::to_value(v) {
        Ok(serde_json::Value::String(s)) => s,
        Ok(other) => other.to_string(),
        Err(_) => String::new(),
    }
}

/// Validates and runs `config`, returning every output in memory.
pub fn run(config: &RunConfig) -> Result<RunOutput, CliError> {
    let system = config.validate()?;
    let tol = &config.tolerances;
    let mut warnings: Vec<String> = Vec::new();
    let tables = match (&config.analysis, &system) {
        (AnalysisConfig::Modes { k }, System::MultiFluid(_) | System::Waterbag(_)) => {
            vec![modes(&family(&system), *k, tol)?]
        }
        (AnalysisConfig::Penrose { k, grid }, System::Distribution(profile)) => {
            let report =
                classify_stability_with(profile, *k, grid, tol).map_err(CliError::numerical)?;
            let mut contour = Table::new("contour", CONTOUR_COLUMNS);
            for (u, e) in report.contour.u.iter().zip(&report.contour.eps) {
                contour.push(vec![(*u).into(), e.re.into(), e.im.into()]);
            }
            let (name, count) = match report.classification {
                Classification::Stable => ("Stable", 0),
                Classification::Unstable { count } => ("Unstable", count),
                Classification::Marginal => ("Marginal", 0),
            };
            let mut class = Table::new("classification", CLASSIFICATION_COLUMNS);
            class.push(vec![
                format!("{name}, winding {}", report.winding).into(),
                name.to_lowercase().into(),
                (count as usize).into(),
                (report.winding as i64).into(),
                (*k).into(),
            ]);
            let mut crossings = Table::new("crossings", CROSSING_COLUMNS);
            for c in &report.crossings {
                crossings.push(vec![c.u.into(), c.re_eps.into()]);
            }
            vec![contour, class, crossings]
        }
        (AnalysisConfig::Sweep { control, grid, k }, _) => {
            let spec = SweepSpec::new(grid.values()).map_err(CliError::usage)?;
            let k = k.unwrap_or(1.0);
            let sys: Box<dyn ParameterizedSystem<f64>> = match (&system, control) {
                (System::MultiFluid(eq), c) => Box::new(MultiFluidSweep {
                    base: eq.clone(),
                    k,
                    control: match c {
                        SweepControl::K => MultiFluidControl::K,
                        SweepControl::StreamSpeed => MultiFluidControl::StreamSpeed,
                        SweepControl::SpeciesVelocity { species } => {
                            MultiFluidControl::SpeciesVelocity { species: *species }
                        }
                        SweepControl::SoundSpeedSq { species } => {
                            MultiFluidControl::SoundSpeedSq { species: *species }
                        }
                        SweepControl::Density { species } => {
                            MultiFluidControl::Density { species: *species }
                        }
                        SweepControl::Shift { .. } => unreachable!("rejected by validation"),
                    },
                }),
                (System::Waterbag(wb), c) => Box::new(WaterbagSweep {
                    contours: wb.contours().to_vec(),
                    levels: wb.levels().to_vec(),
                    k,
                    control: match c {
                        SweepControl::Shift { contours } => WaterbagControl::Shift {
                            contours: contours.clone(),
                        },
                        _ => WaterbagControl::K,
                    },
                }),
                (System::Distribution(_), _) => unreachable!("rejected by validation"),
            };
            let opts = SweepOptions {
                tolerances: *tol,
                strict: false,
            };
            let result = sweep(sys.as_ref(), &spec, &opts).map_err(|e| match e {
                BifurcationError::InvalidParameter { .. } | BifurcationError::InvalidSweep(_) => {
                    CliError::usage(e)
                }
                _ => CliError::numerical(e),
            })?;
            warnings.extend(result.warnings.iter().map(|w| w.to_string()));
            let mut loci = Table::new("loci", LOCI_COLUMNS);
            for point in &result.loci {
                for (i, m) in point.modes.iter().enumerate() {
                    loci.push(vec![
                        point.param.into(),
                        i.into(),
                        m.omega.re.into(),
                        m.omega.im.into(),
                        signature_name(m.signature).into(),
                    ]);
                }
            }
            vec![
                loci,
                events("events", &result.events),
                events("avoided", &result.avoided),
            ]
        }
        (AnalysisConfig::Normalform { k }, System::MultiFluid(eq)) => {
            let block = build_block(eq, *k).map_err(CliError::numerical)?;
            let report = normal_form_with(&block, tol).map_err(CliError::numerical)?;
            let mut modes = Table::new("normal_modes", NORMAL_MODE_COLUMNS);
            for (i, m) in report.modes.iter().enumerate() {
                modes.push(vec![
                    i.into(),
                    m.omega.re.into(),
                    m.omega.im.into(),
                    (m.sigma as i64).into(),
                ]);
            }
            let count = match report.classification {
                NormalFormClass::UnstablePairs { count } => count,
                _ => 0,
            };
            let mut summary = Table::new("normal_form", NORMAL_FORM_COLUMNS);
            summary.push(vec![
                match report.classification {
                    NormalFormClass::AllStable => "all_stable",
                    NormalFormClass::UnstablePairs { .. } => "unstable_pairs",
                    NormalFormClass::Degenerate => "degenerate",
                }
                .into(),
                count.into(),
                report.reconstruction_error.into(),
                (*k).into(),
            ]);
            vec![modes, summary]
        }
        (AnalysisConfig::Discretize { m, p_range }, System::Distribution(profile)) => {
            let wb = discretize_distribution(profile, *m, *p_range).map_err(CliError::numerical)?;
            let mut t = Table::new("waterbag", WATERBAG_COLUMNS);
            for (i, (p, df)) in wb.pairs().into_iter().enumerate() {
                t.push(vec![
                    i.into(),
                    p.into(),
                    df.into(),
                    wb.levels()[i + 1].into(),
                ]);
            }
            vec![t]
        }
        (AnalysisConfig::DispersionScan { k, u_range, points }, _) => {
            let (a, b) = *u_range;
            let step = (b - a) / (*points - 1) as f64;
            let fam = family(&system);
            let mut t = Table::new("scan", SCAN_COLUMNS);
            for i in 0..*points {
                let u = a + step * i as f64;
                // On a contour or pole the dielectric is unbounded; leave the cell empty.
                let eps = match &fam {
                    Family::Waterbag(wb) => {
                        waterbag_dispersion(wb, *k, Complex64::new(u, 0.0)).ok()
                    }
                    _ => eval_dispersion(&fam, *k, Complex64::new(k * u, 0.0)).ok(),
                };
                t.push(vec![u.into(), eps.map(|e| e.re).into()]);
            }
            vec![t]
        }
        _ => unreachable!("rejected by validation"),
    };
    Ok(RunOutput {
        meta: meta(config, warnings),
        tables,
    })
}

fn family(system: &System) -> Family {
    match system {
        System::MultiFluid(eq) => eq.clone().into(),
        System::Waterbag(wb) => wb.clone().into(),
        System::Distribution(_) => unreachable!("no dielectric family for a distribution"),
    }
}

fn modes(fam: &Family, k: f64, tol: &Tolerances) -> Result<Table, CliError> {
    let found = find_discrete_modes_with(fam, k, tol).map_err(CliError::numerical)?;
    let mut t = Table::new("modes", MODE_COLUMNS);
    for (i, m) in found.iter().enumerate() {
        t.push(vec![
            m.k.into(),
            i.into(),
            m.omega.re.into(),
            m.omega.im.into(),
            signature_name(m.signature).into(),
            m.energy.into(),
            m.near_pole.into(),
        ]);
    }
    Ok(t)
}

fn events(name: &'static str, list: &[BifurcationEvent<f64>]) -> Table {
    let mut t = Table::new(name, EVENT_COLUMNS);
    for e in list {
        let pre: Vec<&str> = e
            .pre_signatures
            .iter()
            .map(|s| signature_name(*s))
            .collect();
        t.push(vec![
            e.param.into(),
            snake(&e.kind).into(),
            snake(&e.direction).into(),
            e.omega_star.into(),
            pre.join(";").into(),
            snake(&e.post_structure).into(),
            e.multiplicity.into(),
            e.growth_rate.into(),
        ]);
    }
    t
}

fn meta(config: &RunConfig, warnings: Vec<String>) -> serde_json::Value {
    json!({
        "tool": env!("CARGO_PKG_NAME"),
        "version": env!("CARGO_PKG_VERSION"),
        "config": config,
        "tolerances": config.tolerances,
        "warnings": warnings,
    })
}

/// Schema of the config document, with the tolerance table and its defaults.
pub fn schema() -> serde_json::Value {
    let number = json!({"type": "number"});
    let positive = json!({"type": "number", "exclusiveMinimum": 0});
    let index = json!({"type": "integer", "minimum": 0});
    let pair = json!({"type": "array", "items": number, "minItems": 2, "maxItems": 2});
    let tolerances: serde_json::Map<String, serde_json::Value> =
        match serde_json::to_value(Tolerances::default()) {
            Ok(serde_json::Value::Object(m)) => m
                .into_iter()
                .map(|(name, default)| {
                    let ty = if default.is_u64() {
                        "integer"
                    } else {
                        "number"
                    };
                    (name, json!({"type": ty, "default": default}))
                })
                .collect(),
            _ => serde_json::Map::new(),
        };
    let tagged = |tag: &str, name: &str, props: serde_json::Value, required: &[&str]| {
        let mut p = props.as_object().cloned().unwrap_or_default();
        p.insert(tag.into(), json!({"const": name}));
        let mut req = vec![tag.to_string()];
        req.extend(required.iter().map(|s| s.to_string()));
        json!({"type": "object", "properties": p, "required": req, "additionalProperties": false})
    };
    let species_index = json!({"species": index});
    json!({
        "$schema": "https://json-schema.org/draft/2020-12/schema",
        "title": "krein run config",
        "type": "object",
        "required": ["system", "analysis"],
        "additionalProperties": false,
        "properties": {
            "system": {"oneOf": [
                tagged("type", "multifluid", json!({
                    "species": {"type": "array", "minItems": 1, "items": {
                        "type": "object",
                        "required": ["rho", "u", "c2"],
                        "properties": {"rho": positive, "u": number, "c2": number}
                    }},
                    "coupling": {"enum": ["plasma_shielded", "electrostatic", "gravitational_jeans", "uncoupled"]}
                }), &["species", "coupling"]),
                tagged("type", "waterbag", json!({
                    "contours": {"type": "array", "items": number, "minItems": 2},
                    "levels": {"type": "array", "items": number, "minItems": 3},
                    "pairs": {"type": "array", "items": pair, "minItems": 2}
                }), &[]),
                tagged("type", "distribution", json!({
                    "profile": {"oneOf": [
                        tagged("kind", "maxwellian", json!({}), &[]),
                        tagged("kind", "bi_maxwellian", json!({"c": number}), &["c"]),
                        tagged("kind", "tabulated", json!({
                            "p": {"type": "array", "items": number, "minItems": 4},
                            "f": {"type": "array", "items": number, "minItems": 4}
                        }), &["p", "f"])
                    ]}
                }), &["profile"])
            ]},
            "analysis": {"oneOf": [
                tagged("type", "modes", json!({"k": positive}), &["k"]),
                tagged("type", "penrose", json!({
                    "k": positive,
                    "grid": {"type": "object", "additionalProperties": false, "properties": {
                        "half_width": {"type": ["number", "null"], "exclusiveMinimum": 0},
                        "points": {"type": "integer", "minimum": 3}
                    }}
                }), &["k"]),
                tagged("type", "sweep", json!({
                    "k": positive,
                    "control": {"oneOf": [
                        tagged("kind", "k", json!({}), &[]),
                        tagged("kind", "stream_speed", json!({}), &[]),
                        tagged("kind", "species_velocity", species_index.clone(), &["species"]),
                        tagged("kind", "sound_speed_sq", species_index.clone(), &["species"]),
                        tagged("kind", "density", species_index, &["species"]),
                        tagged("kind", "shift", json!({"contours": {"type": "array", "items": index, "minItems": 1}}), &["contours"])
                    ]},
                    "grid": {"oneOf": [
                        {"type": "object", "required": ["start", "stop", "points"], "additionalProperties": false,
                         "properties": {"start": number, "stop": number, "points": {"type": "integer", "minimum": 3}}},
                        {"type": "object", "required": ["values"], "additionalProperties": false,
                         "properties": {"values": {"type": "array", "items": number, "minItems": 3}}}
                    ]}
                }), &["control", "grid"]),
                tagged("type", "normalform", json!({"k": positive}), &["k"]),
                tagged("type", "discretize", json!({"m": {"type": "integer", "minimum": 2, "multipleOf": 2}, "p_range": pair}), &["m", "p_range"]),
                tagged("type", "dispersion_scan", json!({"k": positive, "u_range": pair, "points": {"type": "integer", "minimum": 2}}), &["k", "u_range", "points"])
            ]},
            "output": {"type": "object", "additionalProperties": false, "properties": {
                "format": {"enum": ["csv", "json"], "default": "csv"},
                "path": {"type": "string", "default": "krein-out"}
            }},
            "tolerances": {"type": "object", "additionalProperties": false, "properties": tolerances}
        }
    })
}

//! Run configuration: TOML with unit-suffixed quantities, validated in full
//! before any computation. Validation messages start with the field path.

use casimir_fp::casimir::{CasimirJob, QuadratureSettings};
use casimir_fp::electrolyte::ScreeningState;
use casimir_fp::equilibrium::{ExternalLoad, ScreeningSpec, BRACKET_LIMITS, DEFAULT_BRACKET};
use casimir_fp::layers::{LayerStack, StackRole};
use casimir_fp::materials::{load_database, log_grid, MaterialsDatabase};
use casimir_fp::optics::{CavityAssembly, Substrate, DEFAULT_FILM_THICKNESS};
use serde::Deserialize;
use std::path::{Path, PathBuf};

/// Environment variable naming the default materials database.
pub const MATERIALS_ENV: &str = "CASIMIR_FP_MATERIALS";

/// A configuration problem, reported with exit code 2.
#[derive(Debug)]
pub struct ValidationError(pub String);

impl std::fmt::Display for ValidationError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ValidationError {}

fn invalid<T>(field: &str, msg: impl std::fmt::Display) -> Result<T, ValidationError> {
    Err(ValidationError(format!("{field}: {msg}")))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dimension {
    Length,
    Temperature,
    Concentration,
    Pressure,
}

impl Dimension {
    /// Unit symbols with the exact divisor to SI; dividing keeps `150 nm` equal to `150e-9`.
    fn units(self) -> &'static [(&'static str, f64)] {
        match self {
            Dimension::Length => &[("nm", 1e9), ("um", 1e6), ("m", 1.0)],
            Dimension::Temperature => &[("K", 1.0)],
            Dimension::Concentration => &[("M", 1.0), ("mM", 1e3), ("uM", 1e6)],
            Dimension::Pressure => &[("Pa", 1.0), ("mPa", 1e3)],
        }
    }
}

/// Parses `"<number> <unit>"` into SI. The unit is mandatory and must belong to `dim`.
pub fn parse_quantity(field: &str, text: &str, dim: Dimension) -> Result<f64, ValidationError> {
    let allowed: Vec<&str> = dim.units().iter().map(|u| u.0).collect();
    let mut parts = text.split_whitespace();
    let (Some(number), Some(unit), None) = (parts.next(), parts.next(), parts.next()) else {
        return invalid(field, format!("expected `<number> <unit>` with unit in {allowed:?}, got {text:?}"));
    };
    let Ok(value) = number.parse::<f64>() else {
        return invalid(field, format!("not a number: {number:?}"));
    };
    if !value.is_finite() {
        return invalid(field, format!("must be finite, got {text:?}"));
    }
    match dim.units().iter().find(|u| u.0 == unit) {
        Some(&(_, divisor)) => Ok(value / divisor),
        None => invalid(field, format!("unit {unit:?} not one of {allowed:?}")),
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    /// Materials database path; falls back to the environment, then the bundled set.
    pub materials: Option<PathBuf>,
    pub liquid: String,
    pub temperature: String,
    pub plate: RawPlate,
    pub coating: Option<RawCoating>,
    #[serde(default)]
    pub substrate: RawSubstrate,
    pub screening: Option<RawScreening>,
    #[serde(default)]
    pub grids: RawGrids,
    pub sweep: Option<RawSweep>,
    #[serde(default)]
    pub equilibrium: RawEquilibrium,
    pub cavity: Option<RawCavity>,
    #[serde(default)]
    pub numerics: RawNumerics,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawPlate {
    pub material: String,
    pub thickness: String,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawCoating {
    pub material: String,
    pub thickness: String,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, tag = "kind", rename_all = "lowercase")]
pub enum RawSubstrate {
    Reflection {
        #[serde(default = "gold")]
        metal: String,
    },
    Transmission {
        #[serde(default = "gold")]
        film: String,
        film_thickness: Option<String>,
        #[serde(default = "silica")]
        backing: String,
    },
}

fn gold() -> String {
    "gold".into()
}

fn silica() -> String {
    "silica".into()
}

impl Default for RawSubstrate {
    fn default() -> Self {
        RawSubstrate::Reflection { metal: gold() }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawScreening {
    pub debye_length: Option<String>,
    pub concentration: Option<String>,
    pub valency: Option<u32>,
}

/// Explicit `values`, or `start`/`stop` with either `step` (linear) or `points`.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawGrid {
    pub values: Option<Vec<String>>,
    pub start: Option<String>,
    pub stop: Option<String>,
    pub step: Option<String>,
    pub points: Option<usize>,
    #[serde(default)]
    pub spacing: Spacing,
}

#[derive(Debug, Clone, Copy, Default, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    #[default]
    Linear,
    Log,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawGrids {
    pub concentration: Option<RawGrid>,
    pub separation: Option<RawGrid>,
    pub wavelength: Option<RawGrid>,
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    DebyeLength,
    Temperature,
    CoatingThickness,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawSweep {
    pub axis: SweepAxis,
    pub grid: RawGrid,
    /// Track this cavity mode at every equilibrium; 0 means the most prominent.
    pub resonance_mode: Option<i32>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawEquilibrium {
    pub bracket: Option<[String; 2]>,
    /// Overrides the load computed from densities.
    pub load: Option<String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawCavity {
    /// A length, or `"equilibrium"` to use the solved `d_e`.
    pub gap: String,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawNumerics {
    pub tolerance: Option<f64>,
    pub max_matsubara: Option<usize>,
    pub max_segments: Option<usize>,
}

/// Where the materials came from, for output headers.
#[derive(Debug, Clone)]
pub enum DatabaseSource {
    Bundled,
    File(PathBuf),
}

impl std::fmt::Display for DatabaseSource {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            DatabaseSource::Bundled => f.write_str("bundled"),
            DatabaseSource::File(p) => write!(f, "{}", p.display()),
        }
    }
}

#[derive(Debug, Clone)]
pub enum Gap {
    Fixed(f64),
    Equilibrium,
}

#[derive(Debug, Clone)]
pub struct Sweep {
    pub axis: SweepAxis,
    pub values: Vec<f64>,
    pub resonance_mode: Option<i32>,
}

/// A configuration checked against the materials database, in SI units.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub db: MaterialsDatabase<f64>,
    pub db_source: DatabaseSource,
    pub liquid: String,
    pub temperature: f64,
    pub plate: (String, f64),
    pub coating: Option<(String, f64)>,
    pub substrate: RawSubstrate,
    pub film_thickness: f64,
    /// `None` leaves the solution unscreened.
    pub screening: Option<ScreeningSpec<f64>>,
    pub valency: u32,
    pub numerics: QuadratureSettings<f64>,
    pub bracket: (f64, f64),
    pub load: ExternalLoad<f64>,
    pub load_override: Option<f64>,
    pub concentration_grid: Option<Vec<f64>>,
    pub separation_grid: Option<Vec<f64>>,
    pub wavelength_grid: Option<Vec<f64>>,
    pub sweep: Option<Sweep>,
    pub gap: Option<Gap>,
}

fn resolve_grid(field: &str, grid: &RawGrid, dim: Dimension) -> Result<Vec<f64>, ValidationError> {
    if let Some(values) = &grid.values {
        if grid.start.is_some() || grid.stop.is_some() || grid.step.is_some() || grid.points.is_some() {
            return invalid(field, "give either `values` or a start/stop range, not both");
        }
        return values
            .iter()
            .enumerate()
            .map(|(i, v)| parse_quantity(&format!("{field}.values[{i}]"), v, dim))
            .collect();
    }
    let (Some(start), Some(stop)) = (&grid.start, &grid.stop) else {
        return invalid(field, "needs `values` or both `start` and `stop`");
    };
    let start = parse_quantity(&format!("{field}.start"), start, dim)?;
    let stop = parse_quantity(&format!("{field}.stop"), stop, dim)?;
    if stop < start {
        return invalid(field, "stop must not be below start");
    }
    match (grid.points, &grid.step, grid.spacing) {
        (Some(_), Some(_), _) => invalid(field, "give either `points` or `step`, not both"),
        (Some(0), None, _) => Ok(Vec::new()),
        (Some(1), None, _) => Ok(vec![start]),
        (Some(n), None, Spacing::Log) => {
            if !(start > 0.0) {
                return invalid(&format!("{field}.start"), "log spacing needs a positive start");
            }
            Ok(log_grid(start, stop, n))
        }
        (Some(n), None, Spacing::Linear) => {
            Ok((0..n).map(|i| start + (stop - start) * i as f64 / (n - 1) as f64).collect())
        }
        (None, Some(step), Spacing::Linear) => {
            let step = parse_quantity(&format!("{field}.step"), step, dim)?;
            if !(step > 0.0) {
                return invalid(&format!("{field}.step"), "must be > 0");
            }
            let n = ((stop - start) / step + 1e-9).floor() as usize;
            Ok((0..=n).map(|i| start + step * i as f64).collect())
        }
        (None, Some(_), Spacing::Log) => invalid(field, "log spacing takes `points`, not `step`"),
        (None, None, _) => invalid(field, "needs `points` or `step`"),
    }
}

fn positive(field: &str, value: f64) -> Result<f64, ValidationError> {
    if value > 0.0 {
        Ok(value)
    } else {
        invalid(field, format!("must be > 0, got {value:e}"))
    }
}

fn material(db: &MaterialsDatabase<f64>, field: &str, name: &str) -> Result<(), ValidationError> {
    if db.contains(name) {
        Ok(())
    } else {
        let known: Vec<&str> = db.names().collect();
        invalid(field, format!("unknown material {name:?}; known: {known:?}"))
    }
}

fn open_database(
    field: Option<&Path>,
    base: &Path,
    env: Option<PathBuf>,
) -> Result<(MaterialsDatabase<f64>, DatabaseSource), ValidationError> {
    let path = match field {
        Some(p) if p.is_relative() => Some(base.join(p)),
        Some(p) => Some(p.to_path_buf()),
        None => env,
    };
    match path {
        None => Ok((MaterialsDatabase::bundled(), DatabaseSource::Bundled)),
        Some(p) => match load_database(&p) {
            Ok(db) => Ok((db, DatabaseSource::File(p))),
            Err(e) => invalid("materials", e),
        },
    }
}

impl RunConfig {
    /// Parses and validates `text`; relative paths resolve against `base`.
    pub fn parse(text: &str, base: &Path, env_materials: Option<PathBuf>) -> Result<Self, ValidationError> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| ValidationError(format!("config: {}", e.message())))?;
        Self::resolve(raw, base, env_materials)
    }

    fn resolve(raw: RawConfig, base: &Path, env_materials: Option<PathBuf>) -> Result<Self, ValidationError> {
        let (db, db_source) = open_database(raw.materials.as_deref(), base, env_materials)?;

        material(&db, "liquid", &raw.liquid)?;
        let liquid_model = db.get(&raw.liquid).map_err(|e| ValidationError(format!("liquid: {e}")))?;
        if liquid_model.is_metal() {
            return invalid("liquid", format!("{:?} is a metal", raw.liquid));
        }
        let temperature = positive("temperature", parse_quantity("temperature", &raw.temperature, Dimension::Temperature)?)?;
        if let Some((lo, hi)) = liquid_model.liquid_range {
            if temperature < lo || temperature > hi {
                return invalid(
                    "temperature",
                    format!("{temperature} K outside the liquid range of {} [{lo}, {hi}] K", raw.liquid),
                );
            }
        }

        material(&db, "plate.material", &raw.plate.material)?;
        let plate_thickness =
            positive("plate.thickness", parse_quantity("plate.thickness", &raw.plate.thickness, Dimension::Length)?)?;

        let coating = match &raw.coating {
            Some(c) => {
                material(&db, "coating.material", &c.material)?;
                let t = positive("coating.thickness", parse_quantity("coating.thickness", &c.thickness, Dimension::Length)?)?;
                Some((c.material.clone(), t))
            }
            None => None,
        };

        let film_thickness = match &raw.substrate {
            RawSubstrate::Reflection { metal } => {
                material(&db, "substrate.metal", metal)?;
                DEFAULT_FILM_THICKNESS
            }
            RawSubstrate::Transmission {
                film,
                film_thickness,
                backing,
            } => {
                material(&db, "substrate.film", film)?;
                material(&db, "substrate.backing", backing)?;
                match film_thickness {
                    Some(t) => positive(
                        "substrate.film_thickness",
                        parse_quantity("substrate.film_thickness", t, Dimension::Length)?,
                    )?,
                    None => DEFAULT_FILM_THICKNESS,
                }
            }
        };

        let valency = raw.screening.as_ref().and_then(|s| s.valency).unwrap_or(1);
        if valency == 0 {
            return invalid("screening.valency", "must be >= 1");
        }
        let screening = match &raw.screening {
            None => None,
            Some(s) => match (&s.debye_length, &s.concentration) {
                (Some(_), Some(_)) => return invalid("screening", "give exactly one of debye_length and concentration"),
                (None, None) => return invalid("screening", "needs debye_length or concentration"),
                (Some(l), None) => {
                    let l = positive(
                        "screening.debye_length",
                        parse_quantity("screening.debye_length", l, Dimension::Length)?,
                    )?;
                    Some(ScreeningSpec::FixedDebyeLength(l))
                }
                (None, Some(c)) => {
                    let c = parse_quantity("screening.concentration", c, Dimension::Concentration)?;
                    if c < 0.0 {
                        return invalid("screening.concentration", format!("must be >= 0 M, got {c:e} M"));
                    }
                    Some(ScreeningSpec::FixedConcentration { molar: c, valency })
                }
            },
        };

        let mut numerics = QuadratureSettings::default();
        if let Some(t) = raw.numerics.tolerance {
            numerics.set_tolerance(t);
        }
        if let Some(n) = raw.numerics.max_matsubara {
            numerics.max_matsubara = n;
        }
        if let Some(n) = raw.numerics.max_segments {
            numerics.max_segments = n;
        }
        numerics.validate().map_err(|e| ValidationError(format!("numerics: {e}")))?;

        let bracket = match &raw.equilibrium.bracket {
            Some([lo, hi]) => (
                parse_quantity("equilibrium.bracket[0]", lo, Dimension::Length)?,
                parse_quantity("equilibrium.bracket[1]", hi, Dimension::Length)?,
            ),
            None => DEFAULT_BRACKET,
        };
        if !(bracket.0 >= BRACKET_LIMITS.0 && bracket.1 <= BRACKET_LIMITS.1 && bracket.0 < bracket.1) {
            return invalid(
                "equilibrium.bracket",
                format!("must satisfy {} nm <= lo < hi <= {} nm", BRACKET_LIMITS.0 * 1e9, BRACKET_LIMITS.1 * 1e9),
            );
        }
        let load = ExternalLoad::from_database(&db, &raw.plate.material, &raw.liquid, plate_thickness)
            .map_err(|e| ValidationError(format!("plate: {e}")))?;
        let load_override = match &raw.equilibrium.load {
            Some(p) => Some(parse_quantity("equilibrium.load", p, Dimension::Pressure)?),
            None => None,
        };

        let concentration_grid = match &raw.grids.concentration {
            Some(g) => {
                let v = resolve_grid("grids.concentration", g, Dimension::Concentration)?;
                if let Some(c) = v.iter().find(|&&c| c < 0.0) {
                    return invalid("grids.concentration", format!("must be >= 0 M, got {c:e} M"));
                }
                Some(v)
            }
            None => None,
        };
        let separation_grid = match &raw.grids.separation {
            Some(g) => {
                let v = resolve_grid("grids.separation", g, Dimension::Length)?;
                if v.iter().any(|&d| !(d > 0.0)) {
                    return invalid("grids.separation", "separations must be > 0");
                }
                Some(v)
            }
            None => None,
        };
        let wavelength_grid = match &raw.grids.wavelength {
            Some(g) => Some(resolve_grid("grids.wavelength", g, Dimension::Length)?),
            None => None,
        };

        let sweep = match &raw.sweep {
            Some(s) => {
                let dim = match s.axis {
                    SweepAxis::Temperature => Dimension::Temperature,
                    _ => Dimension::Length,
                };
                let values = resolve_grid("sweep.grid", &s.grid, dim)?;
                if values.iter().any(|&v| !(v > 0.0)) {
                    return invalid("sweep.grid", "values must be > 0");
                }
                if s.axis == SweepAxis::CoatingThickness && coating.is_none() {
                    return invalid("sweep.axis", "coating_thickness needs a [coating] section");
                }
                Some(Sweep {
                    axis: s.axis,
                    values,
                    resonance_mode: s.resonance_mode,
                })
            }
            None => None,
        };

        let gap = match &raw.cavity {
            Some(c) if c.gap.trim() == "equilibrium" => Some(Gap::Equilibrium),
            Some(c) => Some(Gap::Fixed(positive(
                "cavity.gap",
                parse_quantity("cavity.gap", &c.gap, Dimension::Length)?,
            )?)),
            None => None,
        };

        Ok(RunConfig {
            db,
            db_source,
            liquid: raw.liquid,
            temperature,
            plate: (raw.plate.material, plate_thickness),
            coating,
            substrate: raw.substrate,
            film_thickness,
            screening,
            valency,
            numerics,
            bracket,
            load,
            load_override,
            concentration_grid,
            separation_grid,
            wavelength_grid,
            sweep,
            gap,
        })
    }

    pub fn liquid_static_permittivity(&self) -> f64 {
        self.db.get(&self.liquid).map(|m| m.static_permittivity.value()).unwrap_or(1.0)
    }

    pub fn screening_state(&self, temperature: f64) -> casimir_fp::Result<ScreeningState<f64>> {
        let eps = self.liquid_static_permittivity();
        match &self.screening {
            Some(screening) => screening.state(temperature, eps),
            None => ScreeningState::unscreened(temperature, eps),
        }
    }

    /// Gold plate above, coating and substrate metal below, both in the liquid.
    pub fn job(&self) -> casimir_fp::Result<CasimirJob<f64>> {
        let top = LayerStack::from_names(&self.db, &self.liquid, &[(self.plate.0.as_str(), None)], StackRole::Top)?;
        let metal = match &self.substrate {
            RawSubstrate::Reflection { metal } => metal.as_str(),
            RawSubstrate::Transmission { film, .. } => film.as_str(),
        };
        let mut lower: Vec<(&str, Option<f64>)> = Vec::new();
        if let Some((name, t)) = &self.coating {
            lower.push((name.as_str(), Some(*t)));
        }
        lower.push((metal, None));
        let bottom = LayerStack::from_names(&self.db, &self.liquid, &lower, StackRole::Bottom)?;
        let mut job = CasimirJob::new(top, bottom, self.bracket.0, self.temperature, self.screening_state(self.temperature)?)?;
        job.numerics = self.numerics;
        Ok(job)
    }

    pub fn cavity(&self, gap: f64) -> casimir_fp::Result<CavityAssembly<f64>> {
        let substrate = match &self.substrate {
            RawSubstrate::Reflection { metal } => Substrate::Reflection {
                metal: self.db.get(metal)?,
            },
            RawSubstrate::Transmission { film, backing, .. } => Substrate::Transmission {
                film: self.db.get(film)?,
                film_thickness: self.film_thickness,
                backing: self.db.get(backing)?,
            },
        };
        let coating = match &self.coating {
            Some((name, t)) => Some((self.db.get(name)?, *t)),
            None => None,
        };
        Ok(CavityAssembly {
            ambient: self.db.get(&self.liquid)?,
            plate: self.db.get(&self.plate.0)?,
            plate_thickness: self.plate.1,
            gap,
            coating,
            substrate,
        })
    }
}

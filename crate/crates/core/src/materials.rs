//! Dielectric response of the cavity materials.
//!
//! Every material is described by a [`DielectricModel`]: a sum of Drude and
//! damped Lorentz terms, or a table of values on the imaginary axis. The
//! same parameters give both the imaginary-frequency permittivity used by the
//! Lifshitz sum and the complex permittivity used by the optical solver.
//!
//! The zero-frequency (static) permittivity is carried separately. Liquid
//! oscillator fits describe electronic and vibrational absorption only; the
//! orientational response that lifts water to ε(0) ≈ 78 lives in
//! `static_permittivity` and is used for the n = 0 term and the Debye length.

use crate::error::{domain, Error, Result};
use crate::scalar::{lit, Real};
use num_complex::Complex;
use serde::Deserialize;
use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

/// Current materials-database schema.
pub const SCHEMA_VERSION: u32 = 1;

/// Materials that every database must provide.
pub const REQUIRED_MATERIALS: [&str; 6] = ["gold", "silica", "teflon", "water", "glycerol", "benzene"];

const BUNDLED_DATABASE: &str = include_str!("../data/materials.toml");

/// Functional form of a dielectric model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    DrudeLorentz,
    LorentzOscillators,
    Tabulated,
}

/// Free-electron term `ωp² / (ξ (ξ + γ))` on the imaginary axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DrudeTerm<R> {
    /// Plasma frequency, rad/s.
    pub plasma_frequency: R,
    /// Damping rate, rad/s.
    pub damping: R,
}

/// Damped oscillator `C ω₀² / (ω₀² + ξ² + γ ξ)` on the imaginary axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OscillatorTerm<R> {
    /// Dimensionless strength `C`.
    pub strength: R,
    /// Resonance frequency, rad/s.
    pub resonance: R,
    /// Damping rate, rad/s.
    pub damping: R,
}

/// Static (ξ = 0) permittivity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StaticPermittivity<R> {
    Finite(R),
    /// Metals: unbounded static response, reflection coefficient 1 at n = 0.
    Infinite,
}

impl<R: Real> StaticPermittivity<R> {
    pub fn value(self) -> R {
        match self {
            StaticPermittivity::Finite(v) => v,
            StaticPermittivity::Infinite => R::infinity(),
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, StaticPermittivity::Infinite)
    }
}

/// Parametric permittivity of one material.
#[derive(Debug, Clone, PartialEq)]
pub struct DielectricModel<R> {
    pub name: String,
    pub kind: ModelKind,
    pub drude_terms: Vec<DrudeTerm<R>>,
    pub oscillator_terms: Vec<OscillatorTerm<R>>,
    /// `(ξ [rad/s], ε(iξ))` pairs, ascending in ξ. Only for [`ModelKind::Tabulated`].
    pub table: Vec<(R, R)>,
    pub static_permittivity: StaticPermittivity<R>,
    pub citation: String,
    /// Mass density, kg/m³.
    pub density: Option<R>,
    /// Liquid range `(T_melt, T_boil)` in kelvin, for solvents.
    pub liquid_range: Option<(R, R)>,
    /// Vacuum wavelengths `(min, max)` in metres where the real-axis model is trusted.
    pub optical_window: (R, R),
}

impl<R: Real> DielectricModel<R> {
    /// Lossless or damped oscillator model with a finite static permittivity.
    pub fn oscillators(name: impl Into<String>, terms: Vec<OscillatorTerm<R>>, static_permittivity: R) -> Self {
        Self {
            name: name.into(),
            kind: ModelKind::LorentzOscillators,
            drude_terms: Vec::new(),
            oscillator_terms: terms,
            table: Vec::new(),
            static_permittivity: StaticPermittivity::Finite(static_permittivity),
            citation: String::new(),
            density: None,
            liquid_range: None,
            optical_window: default_optical_window(),
        }
    }

    /// Frequency-independent, lossless medium (ε(iξ) = ε(ω) = ε(0) = `eps`).
    pub fn constant(name: impl Into<String>, eps: R) -> Self {
        let mut model = Self::oscillators(name, Vec::new(), eps);
        if eps > R::one() {
            // a single oscillator far above any frequency of interest
            model.oscillator_terms.push(OscillatorTerm {
                strength: eps - R::one(),
                resonance: lit(1e30),
                damping: R::zero(),
            });
        }
        model
    }

    pub fn is_metal(&self) -> bool {
        self.static_permittivity.is_infinite()
    }

    /// Permittivity at imaginary frequency `iξ`.
    ///
    /// At `ξ = 0` this returns the static permittivity, which is `+∞` for metals.
    pub fn permittivity_imag(&self, xi: R) -> Result<R> {
        if !(xi >= R::zero()) {
            return Err(domain(format!("{}: imaginary frequency must be >= 0, got {xi}", self.name)));
        }
        if xi == R::zero() {
            return Ok(self.static_permittivity.value());
        }
        Ok(self.eval_imag_positive(xi))
    }

    fn eval_imag_positive(&self, xi: R) -> R {
        match self.kind {
            ModelKind::Tabulated => self.eval_table(xi),
            ModelKind::DrudeLorentz | ModelKind::LorentzOscillators => {
                let mut eps = R::one();
                for d in &self.drude_terms {
                    eps += d.plasma_frequency * d.plasma_frequency / (xi * (xi + d.damping));
                }
                for o in &self.oscillator_terms {
                    let w2 = o.resonance * o.resonance;
                    eps += o.strength * w2 / (w2 + xi * xi + o.damping * xi);
                }
                eps
            }
        }
    }

    // log-log interpolation of the susceptibility ε - 1; 1 + A/ξ² above the table
    fn eval_table(&self, xi: R) -> R {
        let first = self.table[0];
        let last = self.table[self.table.len() - 1];
        if xi <= first.0 {
            return first.1;
        }
        if xi >= last.0 {
            let a = (last.1 - R::one()) * last.0 * last.0;
            return R::one() + a / (xi * xi);
        }
        let idx = self.table.partition_point(|&(x, _)| x <= xi);
        let (x0, e0) = self.table[idx - 1];
        let (x1, e1) = self.table[idx];
        let t = (xi.ln() - x0.ln()) / (x1.ln() - x0.ln());
        let (s0, s1) = ((e0 - R::one()).ln(), (e1 - R::one()).ln());
        R::one() + (s0 + t * (s1 - s0)).exp()
    }

    /// Complex permittivity `ε′ + iε″` at real angular frequency `ω`.
    pub fn permittivity_real(&self, omega: R) -> Result<Complex<R>> {
        if !(omega > R::zero()) {
            return Err(domain(format!("{}: real frequency must be > 0, got {omega}", self.name)));
        }
        if self.kind == ModelKind::Tabulated {
            return Err(domain(format!("{}: tabulated model has no real-axis response", self.name)));
        }
        let w = Complex::new(omega, R::zero());
        let i = Complex::new(R::zero(), R::one());
        let mut eps = Complex::new(R::one(), R::zero());
        for d in &self.drude_terms {
            let wp2 = d.plasma_frequency * d.plasma_frequency;
            eps -= Complex::new(wp2, R::zero()) / (w * (w + i * d.damping));
        }
        for o in &self.oscillator_terms {
            let w2 = o.resonance * o.resonance;
            let denom = Complex::new(w2 - omega * omega, -o.damping * omega);
            eps += Complex::new(o.strength * w2, R::zero()) / denom;
        }
        Ok(eps)
    }

    /// Complex refractive index with non-negative imaginary part.
    pub fn refractive_index(&self, omega: R) -> Result<Complex<R>> {
        Ok(principal_sqrt(self.permittivity_real(omega)?))
    }

    /// Checks the model invariants, naming the violated rule on failure.
    pub fn validate(&self) -> Result<()> {
        let fail = |rule: &str| Error::Invariant {
            material: self.name.clone(),
            rule: rule.to_string(),
        };
        match self.kind {
            ModelKind::Tabulated => {
                if self.table.len() < 2 {
                    return Err(fail("tabulated model needs at least two points"));
                }
                if self.table.windows(2).any(|w| !(w[1].0 > w[0].0)) {
                    return Err(fail("tabulated frequencies strictly ascending"));
                }
                if self.table.iter().any(|&(x, e)| !(x > R::zero()) || !(e > R::one())) {
                    return Err(fail("tabulated entries need xi > 0 and eps > 1"));
                }
            }
            ModelKind::DrudeLorentz | ModelKind::LorentzOscillators => {
                if self.kind == ModelKind::LorentzOscillators && !self.drude_terms.is_empty() {
                    return Err(fail("lorentz_oscillators model carries no Drude terms"));
                }
                if self.drude_terms.iter().any(|d| !(d.plasma_frequency > R::zero()) || !(d.damping >= R::zero())) {
                    return Err(fail("Drude plasma frequency > 0 and damping >= 0"));
                }
                if self
                    .oscillator_terms
                    .iter()
                    .any(|o| !(o.strength >= R::zero()) || !(o.resonance > R::zero()) || !(o.damping >= R::zero()))
                {
                    return Err(fail("oscillator strength >= 0, resonance > 0, damping >= 0"));
                }
            }
        }
        if let StaticPermittivity::Finite(s) = self.static_permittivity {
            if !(s >= R::one()) {
                return Err(fail("static permittivity >= 1"));
            }
        } else if self.drude_terms.is_empty() && self.kind != ModelKind::Tabulated {
            return Err(fail("infinite static permittivity requires a Drude term"));
        }

        let grid = log_grid(lit::<R>(1e11), lit::<R>(1e18), 141);
        let mut prev = R::infinity();
        for &xi in &grid {
            let eps = self.eval_imag_positive(xi);
            if !eps.is_finite() || eps < R::one() {
                return Err(fail("eps(i xi) real and >= 1"));
            }
            if eps > prev * (R::one() + lit(1e-12)) {
                return Err(fail("eps(i xi) non-increasing in xi"));
            }
            prev = eps;
        }
        if self.eval_imag_positive(lit(1e20)) - R::one() > lit(1e-3) {
            return Err(fail("eps(i xi) -> 1 as xi -> infinity"));
        }
        if let StaticPermittivity::Finite(s) = self.static_permittivity {
            // the static value may exceed the optical fit (orientational response)
            // but never undercut its low-frequency limit
            let low = self.eval_imag_positive(grid[0]);
            if s < low * lit(0.99) {
                return Err(fail("static permittivity >= low-frequency limit of the oscillator fit"));
            }
        }
        let (lo, hi) = self.optical_window;
        if !(lo > R::zero() && hi > lo) {
            return Err(fail("optical window 0 < min < max"));
        }
        Ok(())
    }
}

pub(crate) fn principal_sqrt<R: Real>(z: Complex<R>) -> Complex<R> {
    let s = z.sqrt();
    if s.im < R::zero() {
        -s
    } else {
        s
    }
}

fn default_optical_window<R: Real>() -> (R, R) {
    (lit(400e-9), lit(1200e-9))
}

/// `n` logarithmically spaced points covering `[lo, hi]`; the endpoints are exact.
pub fn log_grid<R: Real>(lo: R, hi: R, n: usize) -> Vec<R> {
    assert!(n >= 2);
    let ratio = hi / lo;
    let last = n - 1;
    (0..n)
        .map(|i| match i {
            0 => lo,
            i if i == last => hi,
            i => lo * ratio.powf(lit::<R>(i as f64) / lit(last as f64)),
        })
        .collect()
}

/// Validated set of dielectric models keyed by material name.
#[derive(Debug, Clone)]
pub struct MaterialsDatabase<R> {
    pub schema_version: u32,
    /// Free-form data version string, echoed into output headers.
    pub version: String,
    materials: BTreeMap<String, Arc<DielectricModel<R>>>,
}

impl<R: Real> MaterialsDatabase<R> {
    /// The database shipped with the crate.
    pub fn bundled() -> Self {
        Self::from_toml_str(BUNDLED_DATABASE).expect("bundled materials database is valid")
    }

    /// Raw text of the bundled database.
    pub fn bundled_source() -> &'static str {
        BUNDLED_DATABASE
    }

    pub fn get(&self, name: &str) -> Result<Arc<DielectricModel<R>>> {
        self.materials
            .get(name)
            .cloned()
            .ok_or_else(|| Error::UnknownMaterial(name.to_string()))
    }

    pub fn contains(&self, name: &str) -> bool {
        self.materials.contains_key(name)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.materials.keys().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.materials.len()
    }

    pub fn is_empty(&self) -> bool {
        self.materials.is_empty()
    }

    /// Inserts a model after validating it; replaces any model of the same name.
    pub fn insert(&mut self, model: DielectricModel<R>) -> Result<()> {
        model.validate()?;
        self.materials.insert(model.name.clone(), Arc::new(model));
        Ok(())
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let raw: RawDatabase = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        if raw.schema_version != SCHEMA_VERSION {
            return Err(Error::Parse(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                raw.schema_version
            )));
        }
        let mut materials = BTreeMap::new();
        for (name, entry) in raw.materials {
            let model = entry.into_model::<R>(&name)?;
            model.validate()?;
            materials.insert(name, Arc::new(model));
        }
        for required in REQUIRED_MATERIALS {
            if !materials.contains_key(required) {
                return Err(Error::MissingMaterial(required.to_string()));
            }
        }
        Ok(Self {
            schema_version: raw.schema_version,
            version: raw.version,
            materials,
        })
    }
}

/// Reads and validates a materials database file.
pub fn load_database<R: Real>(path: impl AsRef<Path>) -> Result<MaterialsDatabase<R>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    MaterialsDatabase::from_toml_str(&text)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDatabase {
    schema_version: u32,
    version: String,
    materials: BTreeMap<String, RawMaterial>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawStatic {
    Value(f64),
    Flag(String),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMaterial {
    kind: ModelKind,
    citation: String,
    static_permittivity: RawStatic,
    #[serde(default)]
    drude: Vec<RawDrude>,
    #[serde(default)]
    oscillators: Vec<RawOscillator>,
    #[serde(default)]
    table: Vec<[f64; 2]>,
    density: Option<f64>,
    liquid_range: Option<[f64; 2]>,
    optical_window: Option<[f64; 2]>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDrude {
    plasma_frequency: f64,
    damping: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOscillator {
    strength: f64,
    resonance: f64,
    damping: f64,
}

impl RawMaterial {
    fn into_model<R: Real>(self, name: &str) -> Result<DielectricModel<R>> {
        let static_permittivity = match self.static_permittivity {
            RawStatic::Value(v) => StaticPermittivity::Finite(lit(v)),
            RawStatic::Flag(s) if s == "infinite" => StaticPermittivity::Infinite,
            RawStatic::Flag(s) => {
                return Err(Error::Parse(format!(
                    "{name}: static_permittivity must be a number or \"infinite\", got {s:?}"
                )))
            }
        };
        Ok(DielectricModel {
            name: name.to_string(),
            kind: self.kind,
            drude_terms: self
                .drude
                .into_iter()
                .map(|d| DrudeTerm {
                    plasma_frequency: lit(d.plasma_frequency),
                    damping: lit(d.damping),
                })
                .collect(),
            oscillator_terms: self
                .oscillators
                .into_iter()
                .map(|o| OscillatorTerm {
                    strength: lit(o.strength),
                    resonance: lit(o.resonance),
                    damping: lit(o.damping),
                })
                .collect(),
            table: self.table.into_iter().map(|[x, e]| (lit(x), lit(e))).collect(),
            static_permittivity,
            citation: self.citation,
            density: self.density.map(lit),
            liquid_range: self.liquid_range.map(|[a, b]| (lit(a), lit(b))),
            optical_window: self
                .optical_window
                .map(|[a, b]| (lit(a), lit(b)))
                .unwrap_or_else(default_optical_window),
        })
    }
}

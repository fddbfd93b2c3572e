//! Ionic screening of the static field: Debye length from solution composition.

use crate::constants::{AVOGADRO, BOLTZMANN, ELEMENTARY_CHARGE, VACUUM_PERMITTIVITY};
use crate::error::{domain, Result};
use crate::scalar::{lit, Real};

/// Litres per cubic metre.
const LITRE_PER_M3: f64 = 1000.0;

/// `e² / (ε₀ k_B)` in m·K, folded in f64 so single precision never sees `e²`.
const CHARGE_SCALE: f64 = ELEMENTARY_CHARGE * ELEMENTARY_CHARGE / (VACUUM_PERMITTIVITY * BOLTZMANN);

/// Debye length of water open to air (dissolved CO₂, pH ≈ 5.7), metres.
///
/// Exposed as a preset only; no calculation uses it by default.
pub const AMBIENT_CO2_WATER_DEBYE_LENGTH: f64 = 220e-9;

/// One ionic species in solution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IonSpecies<R> {
    /// Number density, m⁻³.
    pub number_density: R,
    /// Absolute charge number, ≥ 1.
    pub valency: u32,
}

/// Molar concentration (mol/L) to number density (m⁻³).
pub fn molar_to_number_density<R: Real>(molar: R) -> R {
    molar * lit(AVOGADRO * LITRE_PER_M3)
}

/// Solution state that fixes the inverse Debye length κ.
///
/// κ is derived in the constructor and cannot be set directly.
#[derive(Debug, Clone, PartialEq)]
pub struct ScreeningState<R> {
    temperature: R,
    ion_species: Vec<IonSpecies<R>>,
    solvent_static_permittivity: R,
    kappa: R,
}

impl<R: Real> ScreeningState<R> {
    pub fn new(temperature: R, solvent_static_permittivity: R, ion_species: Vec<IonSpecies<R>>) -> Result<Self> {
        if !(temperature > R::zero()) {
            return Err(domain(format!("temperature must be > 0 K, got {temperature}")));
        }
        if !(solvent_static_permittivity >= R::one()) || !solvent_static_permittivity.is_finite() {
            return Err(domain(format!(
                "solvent static permittivity must be finite and >= 1, got {solvent_static_permittivity}"
            )));
        }
        for ion in &ion_species {
            if !(ion.number_density >= R::zero()) || !ion.number_density.is_finite() {
                return Err(domain(format!("ion number density must be >= 0, got {}", ion.number_density)));
            }
            if ion.valency == 0 {
                return Err(domain("ion valency must be >= 1"));
            }
        }
        let strength = ionic_sum(&ion_species);
        let kappa = if strength == R::zero() {
            R::zero()
        } else {
            (strength * lit(CHARGE_SCALE) / (solvent_static_permittivity * temperature))
                .sqrt()
        };
        Ok(Self {
            temperature,
            ion_species,
            solvent_static_permittivity,
            kappa,
        })
    }

    /// Pure solvent, no mobile ions (κ = 0).
    pub fn unscreened(temperature: R, solvent_static_permittivity: R) -> Result<Self> {
        Self::new(temperature, solvent_static_permittivity, Vec::new())
    }

    /// Symmetric `v:v` salt at molar concentration `molar` (cation and anion both at `molar`).
    pub fn symmetric_salt(temperature: R, solvent_static_permittivity: R, molar: R, valency: u32) -> Result<Self> {
        if !(molar >= R::zero()) {
            return Err(domain(format!("concentration must be >= 0 M, got {molar}")));
        }
        let n = molar_to_number_density(molar);
        let ion = IonSpecies {
            number_density: n,
            valency,
        };
        Self::new(temperature, solvent_static_permittivity, vec![ion, ion])
    }

    /// Univalent salt that produces the requested Debye length.
    pub fn with_debye_length(temperature: R, solvent_static_permittivity: R, debye_length: R) -> Result<Self> {
        if debye_length.is_infinite() && debye_length > R::zero() {
            return Self::unscreened(temperature, solvent_static_permittivity);
        }
        let c = concentration_for_debye_length(debye_length, solvent_static_permittivity, temperature, 1)?;
        Self::symmetric_salt(temperature, solvent_static_permittivity, c, 1)
    }

    pub fn temperature(&self) -> R {
        self.temperature
    }

    pub fn ion_species(&self) -> &[IonSpecies<R>] {
        &self.ion_species
    }

    pub fn solvent_static_permittivity(&self) -> R {
        self.solvent_static_permittivity
    }

    /// Inverse Debye length, m⁻¹.
    pub fn kappa(&self) -> R {
        self.kappa
    }

    /// Debye length, m; `+∞` without ions.
    pub fn debye_length(&self) -> R {
        debye_length(self)
    }
}

fn ionic_sum<R: Real>(ions: &[IonSpecies<R>]) -> R {
    ions.iter().fold(R::zero(), |acc, ion| {
        let v: R = lit(ion.valency as f64);
        acc + ion.number_density * v * v
    })
}

/// `λ_D = sqrt(ε ε₀ k_B T / (e² Σ n_v v²))`; `+∞` when the solution holds no ions.
pub fn debye_length<R: Real>(state: &ScreeningState<R>) -> R {
    if state.kappa == R::zero() {
        R::infinity()
    } else {
        R::one() / state.kappa
    }
}

/// Molar concentration of a symmetric `valency:valency` salt giving Debye length `target`.
pub fn concentration_for_debye_length<R: Real>(
    target: R,
    solvent_static_permittivity: R,
    temperature: R,
    valency: u32,
) -> Result<R> {
    if !(target > R::zero()) || !target.is_finite() {
        return Err(domain(format!("target Debye length must be finite and > 0, got {target}")));
    }
    if !(temperature > R::zero()) {
        return Err(domain(format!("temperature must be > 0 K, got {temperature}")));
    }
    if !(solvent_static_permittivity >= R::one()) || !solvent_static_permittivity.is_finite() {
        return Err(domain("solvent static permittivity must be finite and >= 1"));
    }
    if valency == 0 {
        return Err(domain("ion valency must be >= 1"));
    }
    let v: R = lit(valency as f64);
    // Σ n v² = 2 n v² for the two ions of a symmetric salt
    let sum_nv2 = solvent_static_permittivity * temperature / (lit::<R>(CHARGE_SCALE) * target * target);
    let n = sum_nv2 / (lit::<R>(2.0) * v * v);
    Ok(n / lit(AVOGADRO * LITRE_PER_M3))
}

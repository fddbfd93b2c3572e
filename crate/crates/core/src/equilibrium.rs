//! Force balance between Casimir repulsion and the buoyancy-corrected weight
//! of a suspended plate.
//!
//! The substrate lies below and the plate floats above it, so the load pulls
//! toward smaller `d`. A root of `p_total(d) - load` is stable when the net
//! pressure falls through zero as `d` grows.

use crate::casimir::{casimir_pressure, quantum_pressure, screened_n0_integral, CasimirJob};
use crate::constants::STANDARD_GRAVITY;
use crate::electrolyte::ScreeningState;
use crate::error::{domain, Error, Result};
use crate::layers::{screened_product, Layer, LayerStack, Thickness};
use crate::materials::MaterialsDatabase;
use crate::scalar::{lit, Real};
use rayon::prelude::*;

/// Separations a bracket may span, m.
pub const BRACKET_LIMITS: (f64, f64) = (5e-9, 2000e-9);

/// Bracket used when none is given, m. Wide enough for every liquid/coating
/// pair of the bundled database at L = 150 nm.
pub const DEFAULT_BRACKET: (f64, f64) = (20e-9, 500e-9);

/// Gravity minus buoyancy on a fully submerged plate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExternalLoad<R> {
    /// m
    pub plate_thickness: R,
    /// kg/m³
    pub plate_density: R,
    /// kg/m³
    pub liquid_density: R,
    /// m/s²
    pub gravity: R,
}

impl<R: Real> ExternalLoad<R> {
    pub fn new(plate_thickness: R, plate_density: R, liquid_density: R, gravity: R) -> Result<Self> {
        let load = Self {
            plate_thickness,
            plate_density,
            liquid_density,
            gravity,
        };
        load.validate()?;
        Ok(load)
    }

    /// Uses the tabulated densities and standard gravity.
    pub fn from_database(db: &MaterialsDatabase<R>, plate: &str, liquid: &str, plate_thickness: R) -> Result<Self> {
        let density = |name: &str| -> Result<R> {
            db.get(name)?
                .density
                .ok_or_else(|| domain(format!("material `{name}` has no density")))
        };
        Self::new(plate_thickness, density(plate)?, density(liquid)?, lit(STANDARD_GRAVITY))
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("plate thickness", self.plate_thickness),
            ("plate density", self.plate_density),
            ("liquid density", self.liquid_density),
            ("gravity", self.gravity),
        ];
        for (what, v) in positive {
            if !(v > R::zero()) || !v.is_finite() {
                return Err(domain(format!("{what} must be finite and > 0, got {v}")));
            }
        }
        if self.plate_density < self.liquid_density {
            return Err(domain("plate is lighter than the liquid and would not sink"));
        }
        Ok(())
    }
}

/// `(ρ_plate - ρ_liquid) g L₀`, Pa.
pub fn load_pressure<R: Real>(load: &ExternalLoad<R>) -> R {
    (load.plate_density - load.liquid_density) * load.gravity * load.plate_thickness
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stability {
    Stable,
    Unstable,
}

/// One zero of `p_total - load`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Root<R> {
    pub separation: R,
    pub stability: Stability,
    /// Scan cell that bracketed the root, m.
    pub bracket: (R, R),
    /// `p_total - load` at the root, Pa.
    pub residual: R,
    /// `d(p_total)/dd` at the root, Pa/m.
    pub slope: R,
}

/// Net pressure `p_total - load` at one scan node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanPoint<R> {
    pub separation: R,
    pub net_pressure: R,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumResult<R> {
    /// Reported equilibrium: the stable root, or an unstable one if no stable root exists.
    pub d_e: Option<R>,
    pub stability: Option<Stability>,
    pub bracket: Option<(R, R)>,
    pub residual: Option<R>,
    /// Every root found, ascending in separation.
    pub roots: Vec<Root<R>>,
    pub scan: Vec<ScanPoint<R>>,
}

impl<R: Real> EquilibriumResult<R> {
    pub fn is_stable(&self) -> bool {
        self.stability == Some(Stability::Stable)
    }

    pub fn stable_roots(&self) -> impl Iterator<Item = &Root<R>> {
        self.roots.iter().filter(|r| r.stability == Stability::Stable)
    }
}

/// Controls for the scan-and-refine root search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverSettings<R> {
    /// Scan spacing, m.
    pub scan_step: R,
    /// Width below which a refined bracket counts as converged, m.
    pub separation_tolerance: R,
    /// Residual below which refinement stops early, Pa.
    pub residual_tolerance: R,
    /// Half-width of the central difference used for the slope, m.
    pub derivative_step: R,
    pub max_iterations: usize,
}

impl<R: Real> Default for SolverSettings<R> {
    fn default() -> Self {
        Self {
            scan_step: lit(1e-9),
            separation_tolerance: lit(1e-15),
            residual_tolerance: lit(1e-9),
            derivative_step: lit(0.1e-9),
            max_iterations: 100,
        }
    }
}

fn check_bracket<R: Real>(bracket: (R, R)) -> Result<()> {
    let (lo, hi) = bracket;
    let slack = lit::<R>(1e-12);
    if !(lo < hi) || lo < lit::<R>(BRACKET_LIMITS.0) - slack || hi > lit::<R>(BRACKET_LIMITS.1) + slack {
        return Err(domain(format!(
            "bracket [{lo}, {hi}] m must satisfy 5 nm <= d_min < d_max <= 2000 nm"
        )));
    }
    Ok(())
}

fn scan_grid<R: Real>(bracket: (R, R), step: R) -> Result<Vec<R>> {
    if !(step > R::zero()) {
        return Err(domain("scan step must be > 0"));
    }
    let (lo, hi) = bracket;
    let n = ((hi - lo) / step).floor().to_usize().unwrap_or(0);
    let mut grid: Vec<R> = (0..=n).map(|i| lo + step * lit(i as f64)).collect();
    if hi - grid[n] > step * lit(1e-6) {
        grid.push(hi);
    }
    Ok(grid)
}

/// Screening-independent part of the pressure on a scan grid.
#[derive(Debug, Clone)]
struct QuantumProfile<R> {
    separation: Vec<R>,
    quantum: Vec<R>,
}

fn quantum_profile<R: Real>(job: &CasimirJob<R>, grid: Vec<R>) -> Result<QuantumProfile<R>> {
    let quantum = grid
        .par_iter()
        .map(|&d| quantum_pressure(&job.with_separation(d)).map(|q| q.value))
        .collect::<Result<Vec<_>>>()?;
    Ok(QuantumProfile {
        separation: grid,
        quantum,
    })
}

fn n0_pressure<R: Real>(job: &CasimirJob<R>, separation: R) -> Result<R> {
    let kappa = job.screening.kappa();
    screened_n0_integral(separation, job.temperature, kappa, &job.numerics, |k| {
        screened_product(&job.top, &job.bottom, k, kappa)
    })
    .map(|t| t.value)
}

/// Brent's method on a sign-changing bracket; returns `(x, f(x))`.
fn brent<R: Real, F: FnMut(R) -> Result<R>>(
    mut f: F,
    mut a: R,
    mut b: R,
    mut fa: R,
    mut fb: R,
    settings: &SolverSettings<R>,
) -> Result<(R, R)> {
    let two: R = lit(2.0);
    if fa.abs() < fb.abs() {
        std::mem::swap(&mut a, &mut b);
        std::mem::swap(&mut fa, &mut fb);
    }
    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut e = d;
    for _ in 0..settings.max_iterations {
        if fb == R::zero() || fb.abs() < settings.residual_tolerance && (b - c).abs() < lit::<R>(1e-10) {
            return Ok((b, fb));
        }
        if (fb > R::zero()) == (fc > R::zero()) {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol = two * R::epsilon() * b.abs() + settings.separation_tolerance / two;
        let m = (c - b) / two;
        if m.abs() <= tol {
            return Ok((b, fb));
        }
        if e.abs() >= tol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q) = if a == c {
                (two * m * s, R::one() - s)
            } else {
                let q = fa / fc;
                let r = fb / fc;
                (
                    s * (two * m * q * (q - r) - (b - a) * (r - R::one())),
                    (q - R::one()) * (r - R::one()) * (s - R::one()),
                )
            };
            if p > R::zero() {
                q = -q;
            } else {
                p = -p;
            }
            if two * p < (lit::<R>(3.0) * m * q - (tol * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = m;
            }
        } else {
            d = m;
            e = m;
        }
        a = b;
        fa = fb;
        b = if d.abs() > tol { b + d } else { b + tol * m.signum() };
        fb = f(b)?;
    }
    Err(Error::NonConvergence {
        what: "equilibrium root refinement".into(),
        partial: b.as_f64(),
        detail: format!("residual {:e} Pa after {} iterations", fb.as_f64(), settings.max_iterations),
    })
}

fn solve_on_profile<R: Real>(
    job: &CasimirJob<R>,
    load: R,
    profile: &QuantumProfile<R>,
    settings: &SolverSettings<R>,
) -> Result<EquilibriumResult<R>> {
    let scan = profile
        .separation
        .iter()
        .zip(&profile.quantum)
        .map(|(&d, &q)| {
            Ok(ScanPoint {
                separation: d,
                net_pressure: q + n0_pressure(job, d)? - load,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let net = |d: R| -> Result<R> { Ok(casimir_pressure(&job.with_separation(d))?.p_total - load) };
    let mut roots = Vec::new();
    for w in scan.windows(2) {
        let (p, q) = (w[0], w[1]);
        if (p.net_pressure > R::zero()) == (q.net_pressure > R::zero()) {
            continue;
        }
        let (d, residual) = brent(net, p.separation, q.separation, p.net_pressure, q.net_pressure, settings)?;
        let h = settings.derivative_step;
        let slope = (net(d + h)? - net(d - h)?) / (lit::<R>(2.0) * h);
        roots.push(Root {
            separation: d,
            stability: if slope < R::zero() {
                Stability::Stable
            } else {
                Stability::Unstable
            },
            bracket: (p.separation, q.separation),
            residual,
            slope,
        });
    }
    // a plate settling from far away stops at the outermost stable root
    let chosen = roots
        .iter()
        .rev()
        .find(|r| r.stability == Stability::Stable)
        .or_else(|| roots.last())
        .copied();
    Ok(EquilibriumResult {
        d_e: chosen.map(|r| r.separation),
        stability: chosen.map(|r| r.stability),
        bracket: chosen.map(|r| r.bracket),
        residual: chosen.map(|r| r.residual),
        roots,
        scan,
    })
}

/// Locates the equilibrium separation on `bracket = (d_min, d_max)`.
///
/// The bracket is scanned on a 1 nm grid; every sign change is refined and
/// classified. `d_e` is `None` when `p_total - load` never changes sign.
pub fn find_equilibrium<R: Real>(job: &CasimirJob<R>, load: &ExternalLoad<R>, bracket: (R, R)) -> Result<EquilibriumResult<R>> {
    find_equilibrium_with(job, load, bracket, &SolverSettings::default())
}

pub fn find_equilibrium_with<R: Real>(
    job: &CasimirJob<R>,
    load: &ExternalLoad<R>,
    bracket: (R, R),
    settings: &SolverSettings<R>,
) -> Result<EquilibriumResult<R>> {
    job.validate()?;
    load.validate()?;
    check_bracket(bracket)?;
    let profile = quantum_profile(job, scan_grid(bracket, settings.scan_step)?)?;
    solve_on_profile(job, load_pressure(load), &profile, settings)
}

/// One sweep point; failures are kept so the sweep can continue.
#[derive(Debug, Clone)]
pub struct SweepPoint<R> {
    pub parameter: R,
    pub outcome: Result<EquilibriumResult<R>>,
}

impl<R: Real> SweepPoint<R> {
    pub fn d_e(&self) -> Option<R> {
        self.outcome.as_ref().ok().and_then(|r| r.d_e)
    }

    /// `d_e` if the reported root is stable.
    pub fn stable_d_e(&self) -> Option<R> {
        self.outcome.as_ref().ok().filter(|r| r.is_stable()).and_then(|r| r.d_e)
    }
}

fn check_ascending<R: Real>(grid: &[R], what: &str) -> Result<()> {
    if grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(domain(format!("{what} grid must be strictly ascending")));
    }
    Ok(())
}

/// Equilibria over a range of Debye lengths (`+∞` allowed).
///
/// The screening-independent part of the pressure is computed once on the
/// scan grid and shared by every point.
pub fn sweep_debye<R: Real>(
    template: &CasimirJob<R>,
    load: &ExternalLoad<R>,
    lambda_grid: &[R],
    bracket: (R, R),
    settings: &SolverSettings<R>,
) -> Result<Vec<SweepPoint<R>>> {
    template.validate()?;
    load.validate()?;
    check_bracket(bracket)?;
    check_ascending(lambda_grid, "Debye length")?;
    if lambda_grid.is_empty() {
        return Ok(Vec::new());
    }
    let profile = quantum_profile(template, scan_grid(bracket, settings.scan_step)?)?;
    let load = load_pressure(load);
    let eps = template.screening.solvent_static_permittivity();
    Ok(lambda_grid
        .par_iter()
        .map(|&lambda| {
            let outcome = ScreeningState::with_debye_length(template.temperature, eps, lambda).and_then(|screening| {
                let job = CasimirJob {
                    screening,
                    ..template.clone()
                };
                solve_on_profile(&job, load, &profile, settings)
            });
            SweepPoint {
                parameter: lambda,
                outcome,
            }
        })
        .collect())
}

/// How the electrolyte is held as the temperature changes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScreeningSpec<R> {
    /// Same Debye length at every temperature.
    FixedDebyeLength(R),
    /// Same symmetric-salt concentration (mol/L); the Debye length follows `sqrt(T)`.
    FixedConcentration { molar: R, valency: u32 },
}

impl<R: Real> ScreeningSpec<R> {
    pub fn state(&self, temperature: R, solvent_static_permittivity: R) -> Result<ScreeningState<R>> {
        match *self {
            Self::FixedDebyeLength(l) => ScreeningState::with_debye_length(temperature, solvent_static_permittivity, l),
            Self::FixedConcentration { molar, valency } => {
                ScreeningState::symmetric_salt(temperature, solvent_static_permittivity, molar, valency)
            }
        }
    }
}

/// Equilibria over temperatures inside the solvent's liquid range.
pub fn sweep_temperature<R: Real>(
    template: &CasimirJob<R>,
    load: &ExternalLoad<R>,
    temperatures: &[R],
    screening: ScreeningSpec<R>,
    bracket: (R, R),
    settings: &SolverSettings<R>,
) -> Result<Vec<SweepPoint<R>>> {
    template.validate()?;
    load.validate()?;
    check_bracket(bracket)?;
    check_ascending(temperatures, "temperature")?;
    let liquid = template.top.ambient();
    if let Some((melt, boil)) = liquid.liquid_range {
        if let Some(t) = temperatures.iter().find(|&&t| t < melt || t > boil) {
            return Err(domain(format!(
                "{t} K is outside the liquid range of {} ({melt}-{boil} K)",
                liquid.name
            )));
        }
    }
    let eps = template.screening.solvent_static_permittivity();
    Ok(temperatures
        .par_iter()
        .map(|&t| {
            let outcome = screening.state(t, eps).and_then(|screening| {
                let job = CasimirJob {
                    temperature: t,
                    screening,
                    ..template.clone()
                };
                find_equilibrium_with(&job, load, bracket, settings)
            });
            SweepPoint {
                parameter: t,
                outcome,
            }
        })
        .collect())
}

/// Equilibria over thicknesses of the outermost substrate layer (the coating).
pub fn sweep_coating_thickness<R: Real>(
    template: &CasimirJob<R>,
    load: &ExternalLoad<R>,
    thicknesses: &[R],
    bracket: (R, R),
    settings: &SolverSettings<R>,
) -> Result<Vec<SweepPoint<R>>> {
    template.validate()?;
    load.validate()?;
    check_bracket(bracket)?;
    check_ascending(thicknesses, "coating thickness")?;
    if !matches!(template.bottom.layers()[0].thickness, Thickness::Finite(_)) {
        return Err(Error::InvalidStack("substrate has no finite coating layer".into()));
    }
    Ok(thicknesses
        .par_iter()
        .map(|&l| {
            let outcome = with_coating_thickness(&template.bottom, l).and_then(|bottom| {
                let job = CasimirJob {
                    bottom,
                    ..template.clone()
                };
                find_equilibrium_with(&job, load, bracket, settings)
            });
            SweepPoint {
                parameter: l,
                outcome,
            }
        })
        .collect())
}

fn with_coating_thickness<R: Real>(stack: &LayerStack<R>, thickness: R) -> Result<LayerStack<R>> {
    let mut layers = stack.layers().to_vec();
    layers[0] = Layer::finite(layers[0].material.clone(), thickness);
    LayerStack::new(stack.ambient().clone(), layers, stack.role())
}

//! The five computations, each producing a table and a completion status.

use crate::config::{Gap, RunConfig, SweepAxis, ValidationError};
use crate::output::{Block, Cell, Table};
use anyhow::{Context, Result};
use casimir_fp::casimir::{casimir_pressure, pressure_n0_analytic};
use casimir_fp::electrolyte::ScreeningState;
use casimir_fp::equilibrium::{
    find_equilibrium_with, load_pressure, sweep_coating_thickness, sweep_debye, sweep_temperature, EquilibriumResult,
    ExternalLoad, ScreeningSpec, SolverSettings, Stability, SweepPoint,
};
use casimir_fp::optics::{default_wavelength_grid, resonance_shift, spectrum, ResonanceKind};
use casimir_fp::Error;

const NM: f64 = 1e-9;

/// How a command finished; decides the exit code once output is written.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Status {
    Ok,
    NoEquilibrium,
    NonConvergence,
    Failed,
}

fn required<'a, T>(value: &'a Option<T>, field: &str, command: &str) -> Result<&'a T> {
    value
        .as_ref()
        .ok_or_else(|| ValidationError(format!("{field}: required by `{command}`")).into())
}

fn stability_name(s: Option<Stability>) -> &'static str {
    match s {
        Some(Stability::Stable) => "stable",
        Some(Stability::Unstable) => "unstable",
        None => "none",
    }
}

/// The configured load, or one rescaled to the overriding pressure.
fn load(cfg: &RunConfig) -> Result<ExternalLoad<f64>> {
    let base = cfg.load;
    match cfg.load_override {
        None => Ok(base),
        // p = Δρ g L, so an effective g carries the override exactly
        Some(p) => {
            let gravity = p / ((base.plate_density - base.liquid_density) * base.plate_thickness);
            ExternalLoad::new(base.plate_thickness, base.plate_density, base.liquid_density, gravity)
                .map_err(|e| ValidationError(format!("equilibrium.load: {e}")).into())
        }
    }
}

fn stable_d_e(result: &EquilibriumResult<f64>) -> Option<f64> {
    result.d_e.filter(|_| result.is_stable())
}

pub fn debye(cfg: &RunConfig) -> Result<(Table, Status)> {
    let grid = required(&cfg.concentration_grid, "grids.concentration", "debye")?;
    let eps = cfg.liquid_static_permittivity();
    let mut table = Table::new(&["concentration_M", "debye_length_nm"]);
    for &c in grid {
        let state = ScreeningState::symmetric_salt(cfg.temperature, eps, c, cfg.valency)?;
        table.push(vec![c.into(), (state.debye_length() / NM).into()]);
    }
    Ok((table, Status::Ok))
}

pub fn pressure(cfg: &RunConfig) -> Result<(Table, Status)> {
    let grid = required(&cfg.separation_grid, "grids.separation", "pressure")?;
    let job = cfg.job()?;
    let mut table = Table::new(&[
        "d_nm",
        "p_n0_Pa",
        "p_quantum_Pa",
        "p_total_Pa",
        "p_n0_ideal_Pa",
        "n_terms",
        "estimated_error_Pa",
    ]);
    for &d in grid {
        let p = casimir_pressure(&job.with_separation(d)).with_context(|| format!("at d = {} nm", d / NM))?;
        table.push(vec![
            (d / NM).into(),
            p.p_n0.into(),
            p.p_quantum.into(),
            p.p_total.into(),
            pressure_n0_analytic(d, cfg.temperature).into(),
            p.n_terms_used.into(),
            p.estimated_error.into(),
        ]);
    }
    Ok((table, Status::Ok))
}

fn solve(cfg: &RunConfig) -> Result<(EquilibriumResult<f64>, f64)> {
    let load = load(cfg)?;
    let result = find_equilibrium_with(&cfg.job()?, &load, cfg.bracket, &SolverSettings::default())?;
    Ok((result, load_pressure(&load)))
}

pub fn equilibrium(cfg: &RunConfig) -> Result<(Table, Status)> {
    let (result, load) = solve(cfg)?;
    let mut table = Table::new(&["d_nm", "stability", "residual_Pa", "slope_Pa_per_nm", "selected"]);
    for root in &result.roots {
        let selected = result.d_e == Some(root.separation);
        table.push(vec![
            (root.separation / NM).into(),
            stability_name(Some(root.stability)).into(),
            root.residual.into(),
            (root.slope * NM).into(),
            (if selected { "yes" } else { "no" }).into(),
        ]);
    }
    table.blocks.push(Block {
        name: "equilibrium".into(),
        columns: vec!["d_e_nm".into(), "stability".into(), "load_mPa".into()],
        rows: vec![vec![
            result.d_e.map(|d| d / NM).into(),
            stability_name(result.stability).into(),
            (load * 1e3).into(),
        ]],
    });
    let status = if stable_d_e(&result).is_some() {
        Status::Ok
    } else {
        Status::NoEquilibrium
    };
    Ok((table, status))
}

fn point_status(point: &SweepPoint<f64>) -> (String, Status) {
    match &point.outcome {
        Ok(r) if stable_d_e(r).is_some() => ("ok".into(), Status::Ok),
        Ok(_) => ("no stable equilibrium".into(), Status::NoEquilibrium),
        Err(e @ Error::NonConvergence { .. }) => (format!("error: {e}"), Status::NonConvergence),
        Err(e) => (format!("error: {e}"), Status::Failed),
    }
}

pub fn sweep(cfg: &RunConfig) -> Result<(Table, Status)> {
    let sweep = required(&cfg.sweep, "sweep", "sweep")?;
    let settings = SolverSettings::default();
    let load = load(cfg)?;
    let template = cfg.job()?;
    let (column, scale) = match sweep.axis {
        SweepAxis::DebyeLength => ("debye_length_nm", NM),
        SweepAxis::Temperature => ("temperature_K", 1.0),
        SweepAxis::CoatingThickness => ("coating_thickness_nm", NM),
    };
    let points = match sweep.axis {
        SweepAxis::DebyeLength => sweep_debye(&template, &load, &sweep.values, cfg.bracket, &settings)?,
        SweepAxis::CoatingThickness => {
            sweep_coating_thickness(&template, &load, &sweep.values, cfg.bracket, &settings)?
        }
        SweepAxis::Temperature => {
            if let Some((lo, hi)) = cfg.db.get(&cfg.liquid)?.liquid_range {
                if let Some(t) = sweep.values.iter().find(|&&t| t < lo || t > hi) {
                    return Err(ValidationError(format!(
                        "sweep.grid: {t} K outside the liquid range of {} [{lo}, {hi}] K",
                        cfg.liquid
                    ))
                    .into());
                }
            }
            let screening = cfg.screening.unwrap_or(ScreeningSpec::FixedDebyeLength(f64::INFINITY));
            sweep_temperature(&template, &load, &sweep.values, screening, cfg.bracket, &settings)?
        }
    };

    let resonances = match sweep.resonance_mode {
        None => None,
        Some(mode) => {
            let gaps: Vec<f64> = points.iter().filter_map(|p| p.stable_d_e()).collect();
            let grid = cfg.wavelength_grid.clone().unwrap_or_else(default_wavelength_grid);
            let tracked = if gaps.is_empty() {
                Vec::new()
            } else {
                resonance_shift(&cfg.cavity(gaps[0])?, &gaps, &grid, (mode > 0).then_some(mode))?
            };
            Some(tracked)
        }
    };

    let mut columns = vec![column, "d_e_nm", "stability", "residual_Pa", "status"];
    if resonances.is_some() {
        columns.extend(["resonance_nm", "mode_order"]);
    }
    let mut table = Table::new(&columns);
    let mut status = Status::Ok;
    let mut tracked = resonances.as_ref().map(|r| r.iter());
    for point in &points {
        let (text, s) = point_status(point);
        status = status.max(s);
        let result = point.outcome.as_ref().ok();
        let mut row: Vec<Cell> = vec![
            (point.parameter / scale).into(),
            point.d_e().map(|d| d / NM).into(),
            stability_name(result.and_then(|r| r.stability)).into(),
            result.and_then(|r| r.residual).into(),
            text.into(),
        ];
        if let Some(iter) = tracked.as_mut() {
            match point.stable_d_e().and_then(|_| iter.next()) {
                Some(shift) => row.extend([shift.wavelength.map(|w| w / NM).into(), Cell::Int(shift.mode_order as i64)]),
                None => row.extend([Cell::Empty, Cell::Empty]),
            }
        }
        table.push(row);
    }
    Ok((table, status))
}

pub fn spectrum_cmd(cfg: &RunConfig) -> Result<(Table, Status)> {
    let gap = required(&cfg.gap, "cavity.gap", "spectrum")?;
    let mut status = Status::Ok;
    let gap = match gap {
        Gap::Fixed(d) => Some(*d),
        Gap::Equilibrium => {
            let (result, _) = solve(cfg)?;
            let d = stable_d_e(&result);
            if d.is_none() {
                status = Status::NoEquilibrium;
            }
            d
        }
    };
    let mut table = Table::new(&["wavelength_nm", "R", "T", "A"]);
    let Some(gap) = gap else {
        return Ok((table, status));
    };
    let grid = cfg.wavelength_grid.clone().unwrap_or_else(default_wavelength_grid);
    let computed = spectrum(&cfg.cavity(gap)?, &grid)?;
    for i in 0..computed.wavelengths.len() {
        table.push(vec![
            (computed.wavelengths[i] / NM).into(),
            computed.reflectance[i].into(),
            computed.transmittance[i].into(),
            computed.absorbance[i].into(),
        ]);
    }
    table.blocks.push(Block {
        name: "cavity".into(),
        columns: vec!["gap_nm".into()],
        rows: vec![vec![(gap / NM).into()]],
    });
    table.blocks.push(Block {
        name: "resonances".into(),
        columns: ["wavelength_nm", "kind", "mode_order", "R", "T", "A", "prominence"]
            .map(String::from)
            .to_vec(),
        rows: computed
            .resonances
            .iter()
            .map(|r| {
                vec![
                    (r.wavelength / NM).into(),
                    (match r.kind {
                        ResonanceKind::DipInReflectance => "dip_in_R",
                        ResonanceKind::PeakInTransmittance => "peak_in_T",
                    })
                    .into(),
                    Cell::Int(r.mode_order as i64),
                    r.reflectance.into(),
                    r.transmittance.into(),
                    r.absorbance.into(),
                    r.prominence.into(),
                ]
            })
            .collect(),
    });
    Ok((table, status))
}

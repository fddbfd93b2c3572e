//! Transfer-matrix optics of the assembled Fabry-Pérot nanocavity.
//!
//! The kernel [`transfer_matrix`] works on complex vertical wavevectors, so
//! the same code serves real-frequency spectra (`k_z = n ω / c`) and the
//! imaginary axis (`k_z = i sqrt(k_par² + ε ξ²/c²)`).

use crate::constants::SPEED_OF_LIGHT;
use crate::error::{domain, Error, Result};
use crate::layers::Polarization;
use crate::materials::{principal_sqrt, DielectricModel};
use crate::scalar::{lit, Real};
use num_complex::Complex;
use std::sync::Arc;

/// One medium as seen by the transfer-matrix kernel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Medium<R> {
    pub eps: Complex<R>,
    /// Vertical wavevector (`Im ≥ 0` for decaying/absorbing media).
    pub kz: Complex<R>,
    /// Thickness; ignored for the two outer media.
    pub thickness: R,
}

/// Interface amplitudes `(r, t)` from medium `a` into medium `b`.
fn interface<R: Real>(a: &Medium<R>, b: &Medium<R>, pol: Polarization) -> (Complex<R>, Complex<R>) {
    let two = Complex::new(lit::<R>(2.0), R::zero());
    match pol {
        Polarization::TE => {
            let sum = a.kz + b.kz;
            ((a.kz - b.kz) / sum, two * a.kz / sum)
        }
        Polarization::TM => {
            let p = b.eps * a.kz;
            let q = a.eps * b.kz;
            ((p - q) / (p + q), two * p / (p + q))
        }
    }
}

/// Complex reflection and transmission amplitudes of a stratified stack.
///
/// `media[0]` is the incidence half-space and the last entry the exit
/// half-space. Propagation matrices are normalised by `e^{i k_z d}` so that
/// evanescent or lossy layers never overflow; the factor is restored in `t`.
pub fn transfer_matrix<R: Real>(media: &[Medium<R>], pol: Polarization) -> (Complex<R>, Complex<R>) {
    assert!(media.len() >= 2, "need at least two media");
    let one = Complex::new(R::one(), R::zero());
    let zero = Complex::new(R::zero(), R::zero());
    let i = Complex::new(R::zero(), R::one());
    // running product [[m11, m12], [m21, m22]]
    let (r01, t01) = interface(&media[0], &media[1], pol);
    let mut m = [[one / t01, r01 / t01], [r01 / t01, one / t01]];
    let mut phase_t = one;
    for j in 1..media.len() - 1 {
        let phase = (i * media[j].kz * media[j].thickness).exp();
        let p = [[one, zero], [zero, phase * phase]];
        phase_t *= phase;
        let (r, t) = interface(&media[j], &media[j + 1], pol);
        let d = [[one / t, r / t], [r / t, one / t]];
        m = mul(&mul(&m, &p), &d);
    }
    (m[1][0] / m[0][0], phase_t / m[0][0])
}

fn mul<R: Real>(a: &[[Complex<R>; 2]; 2], b: &[[Complex<R>; 2]; 2]) -> [[Complex<R>; 2]; 2] {
    [
        [
            a[0][0] * b[0][0] + a[0][1] * b[1][0],
            a[0][0] * b[0][1] + a[0][1] * b[1][1],
        ],
        [
            a[1][0] * b[0][0] + a[1][1] * b[1][0],
            a[1][0] * b[0][1] + a[1][1] * b[1][1],
        ],
    ]
}

/// Media for the imaginary-frequency problem at `(k_par, ξ)`.
///
/// `eps[0]` is the ambient, `thickness[j]` belongs to `eps[j + 1]`.
pub fn imaginary_axis_media<R: Real>(eps: &[R], thickness: &[R], k_par: R, xi: R) -> Vec<Medium<R>> {
    let q2 = xi * xi / lit::<R>(SPEED_OF_LIGHT * SPEED_OF_LIGHT);
    eps.iter()
        .enumerate()
        .map(|(j, &e)| {
            let kappa = (k_par * k_par + e * q2).sqrt();
            Medium {
                eps: Complex::new(e, R::zero()),
                kz: Complex::new(R::zero(), kappa),
                thickness: if j == 0 { R::zero() } else { thickness.get(j - 1).copied().unwrap_or(R::zero()) },
            }
        })
        .collect()
}

/// Which mirror terminates the cavity.
#[derive(Debug, Clone)]
pub enum Substrate<R> {
    /// Opaque metal half-space.
    Reflection { metal: Arc<DielectricModel<R>> },
    /// Metal film on a transparent backing half-space.
    Transmission {
        film: Arc<DielectricModel<R>>,
        film_thickness: R,
        backing: Arc<DielectricModel<R>>,
    },
}

/// Full optical stack from the incidence side to the exit side:
/// ambient liquid | plate | liquid gap | coating | substrate.
#[derive(Debug, Clone)]
pub struct CavityAssembly<R> {
    pub ambient: Arc<DielectricModel<R>>,
    pub plate: Arc<DielectricModel<R>>,
    pub plate_thickness: R,
    pub gap: R,
    pub coating: Option<(Arc<DielectricModel<R>>, R)>,
    pub substrate: Substrate<R>,
}

impl<R: Real> CavityAssembly<R> {
    pub fn validate(&self) -> Result<()> {
        if !(self.gap > R::zero()) {
            return Err(domain(format!("cavity gap must be > 0, got {}", self.gap)));
        }
        if !(self.plate_thickness > R::zero()) {
            return Err(domain("plate thickness must be > 0"));
        }
        if let Some((_, l)) = &self.coating {
            if !(*l >= R::zero()) {
                return Err(domain("coating thickness must be >= 0"));
            }
        }
        if let Substrate::Transmission { film_thickness, .. } = &self.substrate {
            if !(*film_thickness > R::zero()) {
                return Err(domain("substrate film thickness must be > 0"));
            }
        }
        Ok(())
    }

    pub fn with_gap(&self, gap: R) -> Self {
        Self { gap, ..self.clone() }
    }

    pub fn is_transmission_type(&self) -> bool {
        matches!(self.substrate, Substrate::Transmission { .. })
    }

    /// `(material, thickness)` from incidence to exit; outer media carry `None`.
    pub fn sequence(&self) -> Vec<(Arc<DielectricModel<R>>, Option<R>)> {
        let mut seq = vec![
            (self.ambient.clone(), None),
            (self.plate.clone(), Some(self.plate_thickness)),
            (self.ambient.clone(), Some(self.gap)),
        ];
        if let Some((m, l)) = &self.coating {
            seq.push((m.clone(), Some(*l)));
        }
        match &self.substrate {
            Substrate::Reflection { metal } => seq.push((metal.clone(), None)),
            Substrate::Transmission {
                film,
                film_thickness,
                backing,
            } => {
                seq.push((film.clone(), Some(*film_thickness)));
                seq.push((backing.clone(), None));
            }
        }
        seq
    }

    /// Index of the gap medium in [`Self::sequence`].
    const GAP_INDEX: usize = 2;
}

fn omega_of<R: Real>(wavelength: R) -> R {
    lit::<R>(2.0 * SPEED_OF_LIGHT) * R::PI() / wavelength
}

fn normal_media<R: Real>(seq: &[(Arc<DielectricModel<R>>, Option<R>)], wavelength: R) -> Result<Vec<Medium<R>>> {
    let omega = omega_of(wavelength);
    let k0 = omega / lit(SPEED_OF_LIGHT);
    seq.iter()
        .map(|(m, t)| {
            let (lo, hi) = m.optical_window;
            if wavelength < lo * lit(1.0 - 1e-9) || wavelength > hi * lit(1.0 + 1e-9) {
                return Err(domain(format!(
                    "wavelength {:.1} nm outside the optical window of {} ({:.0}-{:.0} nm)",
                    wavelength.as_f64() * 1e9,
                    m.name,
                    lo.as_f64() * 1e9,
                    hi.as_f64() * 1e9
                )));
            }
            let eps = m.permittivity_real(omega)?;
            Ok(Medium {
                eps,
                kz: principal_sqrt(eps) * k0,
                thickness: t.unwrap_or(R::zero()),
            })
        })
        .collect()
}

/// Normal-incidence amplitudes `(r, t)` of the assembled cavity.
pub fn transfer_matrix_rt<R: Real>(assembly: &CavityAssembly<R>, wavelength: R) -> Result<(Complex<R>, Complex<R>)> {
    assembly.validate()?;
    let media = normal_media(&assembly.sequence(), wavelength)?;
    Ok(transfer_matrix(&media, Polarization::TE))
}

/// Reflectance, transmittance and absorbance at normal incidence.
///
/// Power entering an absorbing exit half-space never re-emerges and is
/// booked as absorbance.
pub fn power_coefficients<R: Real>(media: &[Medium<R>]) -> (R, R, R) {
    let (r, t) = transfer_matrix(media, Polarization::TE);
    let first = media[0];
    let last = media[media.len() - 1];
    let reflectance = r.norm_sqr();
    let transmittance = if last.eps.im > lit(1e-9) {
        R::zero()
    } else {
        last.kz.re / first.kz.re * t.norm_sqr()
    };
    (reflectance, transmittance, R::one() - reflectance - transmittance)
}

/// Spectral feature used to locate a cavity resonance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResonanceKind {
    DipInReflectance,
    PeakInTransmittance,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Resonance<R> {
    /// Interpolated vacuum wavelength, m.
    pub wavelength: R,
    pub kind: ResonanceKind,
    /// Longitudinal mode order from the round-trip phase condition.
    pub mode_order: i32,
    pub prominence: R,
    pub reflectance: R,
    pub transmittance: R,
    pub absorbance: R,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum<R> {
    pub wavelengths: Vec<R>,
    pub reflectance: Vec<R>,
    pub transmittance: Vec<R>,
    pub absorbance: Vec<R>,
    pub resonances: Vec<Resonance<R>>,
}

/// Gold film under a transmission-type cavity, m.
pub const DEFAULT_FILM_THICKNESS: f64 = 40e-9;

/// Minimum prominence for a spectral extremum to count as a resonance.
pub const RESONANCE_PROMINENCE: f64 = 0.05;

/// Wavelength grid `[start, stop]` with a fixed step.
pub fn wavelength_grid<R: Real>(start: R, stop: R, step: R) -> Vec<R> {
    let n = ((stop - start) / step + lit(1e-9)).floor().to_usize().unwrap_or(0);
    (0..=n).map(|i| start + step * lit(i as f64)).collect()
}

/// The default 400-1200 nm grid with 1 nm spacing.
pub fn default_wavelength_grid<R: Real>() -> Vec<R> {
    wavelength_grid(lit(400e-9), lit(1200e-9), lit(1e-9))
}

/// Computes the spectrum on `grid` and extracts resonances.
pub fn spectrum<R: Real>(assembly: &CavityAssembly<R>, grid: &[R]) -> Result<Spectrum<R>> {
    use rayon::prelude::*;
    assembly.validate()?;
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(domain("wavelength grid must be strictly ascending"));
    }
    let seq = assembly.sequence();
    let points = grid
        .par_iter()
        .map(|&wl| normal_media(&seq, wl).map(|m| power_coefficients(&m)))
        .collect::<Result<Vec<_>>>()?;
    let reflectance: Vec<R> = points.iter().map(|p| p.0).collect();
    let transmittance: Vec<R> = points.iter().map(|p| p.1).collect();
    let absorbance: Vec<R> = points.iter().map(|p| p.2).collect();

    let (kind, signal): (ResonanceKind, Vec<R>) = if assembly.is_transmission_type() {
        (ResonanceKind::PeakInTransmittance, transmittance.iter().map(|&t| -t).collect())
    } else {
        (ResonanceKind::DipInReflectance, reflectance.clone())
    };
    let mut resonances = Vec::new();
    for (idx, prominence) in find_minima(&signal, lit(RESONANCE_PROMINENCE)) {
        let wavelength = parabolic_vertex(grid, &signal, idx);
        let media = normal_media(&seq, wavelength)?;
        let (r, t, a) = power_coefficients(&media);
        resonances.push(Resonance {
            wavelength,
            kind,
            mode_order: mode_order(&seq, wavelength)?,
            prominence,
            reflectance: r,
            transmittance: t,
            absorbance: a,
        });
    }
    Ok(Spectrum {
        wavelengths: grid.to_vec(),
        reflectance,
        transmittance,
        absorbance,
        resonances,
    })
}

/// Interior local minima whose topographic prominence reaches `threshold`.
pub(crate) fn find_minima<R: Real>(y: &[R], threshold: R) -> Vec<(usize, R)> {
    let mut out = Vec::new();
    if y.len() < 3 {
        return out;
    }
    for i in 1..y.len() - 1 {
        if !(y[i] < y[i - 1] && y[i] <= y[i + 1]) {
            continue;
        }
        let mut left = y[i];
        for &v in y[..i].iter().rev() {
            if v < y[i] {
                break;
            }
            left = left.max(v);
        }
        let mut right = y[i];
        for &v in &y[i + 1..] {
            if v < y[i] {
                break;
            }
            right = right.max(v);
        }
        let prominence = left.min(right) - y[i];
        if prominence >= threshold {
            out.push((i, prominence));
        }
    }
    out
}

fn parabolic_vertex<R: Real>(x: &[R], y: &[R], i: usize) -> R {
    let (x0, x1, x2) = (x[i - 1], x[i], x[i + 1]);
    let (y0, y1, y2) = (y[i - 1], y[i], y[i + 1]);
    let num = (x1 - x0) * (x1 - x0) * (y1 - y2) - (x1 - x2) * (x1 - x2) * (y1 - y0);
    let den = (x1 - x0) * (y1 - y2) - (x1 - x2) * (y1 - y0);
    if den == R::zero() {
        return x1;
    }
    let v = x1 - lit::<R>(0.5) * num / den;
    v.max(x0).min(x2)
}

/// Mode order `m` from `2δ + φ_top + φ_bottom = 2π(m + 1)` with reflection
/// phases in `(0, 2π]`; ideal mirrors (`φ = π`) give the half-wave mode `m = 1`.
fn mode_order<R: Real>(seq: &[(Arc<DielectricModel<R>>, Option<R>)], wavelength: R) -> Result<i32> {
    let media = normal_media(seq, wavelength)?;
    let gap = CavityAssembly::<R>::GAP_INDEX;
    // the cavity spans the liquid gap and any dielectric layers before the substrate metal
    let mut inner_end = gap;
    while inner_end + 1 < media.len() - 1 && !seq[inner_end + 1].0.is_metal() {
        inner_end += 1;
    }
    let mut delta = R::zero();
    for m in &media[gap..=inner_end] {
        delta += m.kz.re * m.thickness;
    }
    // upward mirror: gap -> plate -> ambient
    let mut up: Vec<Medium<R>> = media[..=gap].iter().rev().copied().collect();
    up[0].thickness = R::zero();
    let (r_top, _) = transfer_matrix(&up, Polarization::TE);
    let down: Vec<Medium<R>> = media[inner_end..].to_vec();
    let (r_bottom, _) = transfer_matrix(&down, Polarization::TE);
    let two_pi = lit::<R>(2.0) * R::PI();
    let wrap = |phi: R| if phi <= R::zero() { phi + two_pi } else { phi };
    let total = lit::<R>(2.0) * delta + wrap(r_top.arg()) + wrap(r_bottom.arg());
    Ok(((total / two_pi).round() - R::one()).to_i32().unwrap_or(0))
}

/// One tracked point of a resonance-shift scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShiftPoint<R> {
    pub gap: R,
    /// `None` when the tracked mode left the grid.
    pub wavelength: Option<R>,
    pub mode_order: i32,
}

/// Tracks one resonance across gaps.
///
/// With `mode = None` the most prominent resonance at the first gap picks
/// the mode order that is followed.
pub fn resonance_shift<R: Real>(
    template: &CavityAssembly<R>,
    gaps: &[R],
    grid: &[R],
    mode: Option<i32>,
) -> Result<Vec<ShiftPoint<R>>> {
    if gaps.iter().any(|&d| !(d > R::zero())) {
        return Err(domain("gap values must be > 0"));
    }
    let mut tracked = mode;
    let mut out = Vec::with_capacity(gaps.len());
    for &gap in gaps {
        let computed = spectrum(&template.with_gap(gap), grid)?;
        let order = match tracked {
            Some(m) => m,
            None => {
                let best = computed
                    .resonances
                    .iter()
                    .max_by(|a, b| a.prominence.partial_cmp(&b.prominence).unwrap_or(std::cmp::Ordering::Equal))
                    .ok_or_else(|| Error::Domain(format!("no resonance on the grid at gap {gap}")))?;
                tracked = Some(best.mode_order);
                best.mode_order
            }
        };
        let wavelength = computed
            .resonances
            .iter()
            .filter(|r| r.mode_order == order)
            .max_by(|a, b| a.prominence.partial_cmp(&b.prominence).unwrap_or(std::cmp::Ordering::Equal))
            .map(|r| r.wavelength);
        out.push(ShiftPoint {
            gap,
            wavelength,
            mode_order: order,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::materials::MaterialsDatabase;

    fn lossless(eps: f64, d: f64, k0: f64) -> Medium<f64> {
        Medium {
            eps: Complex::new(eps, 0.0),
            kz: Complex::new(eps.sqrt() * k0, 0.0),
            thickness: d,
        }
    }

    #[test]
    fn homogeneous_medium_is_transparent() {
        let k0 = 2.0 * std::f64::consts::PI / 600e-9;
        let m = [lossless(1.77, 0.0, k0), lossless(1.77, 200e-9, k0), lossless(1.77, 0.0, k0)];
        let (r, t) = transfer_matrix(&m, Polarization::TE);
        assert!(r.norm() < 1e-15);
        assert!((t.norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn quarter_wave_coating_matches_closed_form() {
        // n1 = sqrt(n0 n2) quarter-wave layer is a perfect anti-reflection coating
        let k0 = 2.0 * std::f64::consts::PI / 550e-9;
        let n2: f64 = 1.5;
        let n1 = n2.sqrt();
        let d = 550e-9 / (4.0 * n1);
        let m = [lossless(1.0, 0.0, k0), lossless(n1 * n1, d, k0), lossless(n2 * n2, 0.0, k0)];
        let (r, _) = transfer_matrix(&m, Polarization::TE);
        assert!(r.norm() < 1e-12);
    }

    #[test]
    fn lossless_stack_conserves_energy() {
        let k0 = 2.0 * std::f64::consts::PI / 700e-9;
        let m = [
            lossless(1.77, 0.0, k0),
            lossless(2.1, 90e-9, k0),
            lossless(1.7, 150e-9, k0),
            lossless(2.4, 33e-9, k0),
            lossless(2.1, 0.0, k0),
        ];
        let (r, t, a) = power_coefficients(&m);
        assert!((r + t - 1.0).abs() < 1e-12);
        assert!(a.abs() < 1e-12);
    }

    #[test]
    fn prominence_filter() {
        let y = [1.0f64, 0.9, 0.5, 0.9, 0.88, 0.86, 0.9, 1.0];
        let found = find_minima(&y, 0.05);
        assert_eq!(found.len(), 1);
        assert_eq!(found[0].0, 2);
        assert!((found[0].1 - 0.5).abs() < 1e-12);
    }

    #[test]
    fn parabola_vertex_is_exact_for_quadratics() {
        let x = [1.0, 2.0, 3.0];
        let y: Vec<f64> = x.iter().map(|v| (v - 2.3f64).powi(2)).collect();
        assert!((parabolic_vertex(&x, &y, 1) - 2.3).abs() < 1e-12);
    }

    #[test]
    fn out_of_window_wavelength_is_rejected() {
        let db = MaterialsDatabase::<f64>::bundled();
        let asm = CavityAssembly {
            ambient: db.get("water").unwrap(),
            plate: db.get("gold").unwrap(),
            plate_thickness: 40e-9,
            gap: 100e-9,
            coating: Some((db.get("teflon").unwrap(), 150e-9)),
            substrate: Substrate::Reflection {
                metal: db.get("gold").unwrap(),
            },
        };
        assert!(matches!(transfer_matrix_rt(&asm, 300e-9), Err(Error::Domain(_))));
        assert!(transfer_matrix_rt(&asm, 600e-9).is_ok());
    }

    #[test]
    fn default_grid_shape() {
        let g = default_wavelength_grid::<f64>();
        assert_eq!(g.len(), 801);
        assert!((g[800] - 1200e-9).abs() < 1e-18);
    }
}

//! Layered mirrors and their reflection amplitudes at imaginary frequency.
//!
//! A [`LayerStack`] lists the layers seen from the intervening liquid
//! inward, terminated by a half-space. Amplitudes use the vertical
//! wavevector `k_jz = sqrt(k_par² + ε_j ξ² / c²)` and are purely real.

use crate::constants::SPEED_OF_LIGHT;
use crate::error::{domain, Error, Result};
use crate::materials::{DielectricModel, MaterialsDatabase};
use crate::scalar::{lit, Real};
use std::sync::Arc;

/// Field polarization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Polarization {
    TE,
    TM,
}

impl Polarization {
    pub const BOTH: [Polarization; 2] = [Polarization::TE, Polarization::TM];
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Thickness<R> {
    Finite(R),
    HalfSpace,
}

#[derive(Debug, Clone)]
pub struct Layer<R> {
    pub material: Arc<DielectricModel<R>>,
    pub thickness: Thickness<R>,
}

impl<R: Real> Layer<R> {
    pub fn finite(material: Arc<DielectricModel<R>>, thickness: R) -> Self {
        Self {
            material,
            thickness: Thickness::Finite(thickness),
        }
    }

    pub fn half_space(material: Arc<DielectricModel<R>>) -> Self {
        Self {
            material,
            thickness: Thickness::HalfSpace,
        }
    }
}

/// Which mirror of the cavity a stack describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StackRole {
    /// Suspended nanoplate.
    Top,
    /// Coated substrate.
    Bottom,
}

/// One mirror: the liquid it faces plus its layers, outermost first.
#[derive(Debug, Clone)]
pub struct LayerStack<R> {
    ambient: Arc<DielectricModel<R>>,
    layers: Vec<Layer<R>>,
    role: StackRole,
}

impl<R: Real> LayerStack<R> {
    pub fn new(ambient: Arc<DielectricModel<R>>, layers: Vec<Layer<R>>, role: StackRole) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::InvalidStack("stack has no layers".into()));
        }
        let last = layers.len() - 1;
        for (i, layer) in layers.iter().enumerate() {
            match layer.thickness {
                Thickness::HalfSpace if i != last => {
                    return Err(Error::InvalidStack(format!(
                        "layer {i} ({}) is a half-space but is not the last layer",
                        layer.material.name
                    )))
                }
                Thickness::Finite(_) if i == last => {
                    return Err(Error::InvalidStack(format!(
                        "last layer ({}) must be a half-space",
                        layer.material.name
                    )))
                }
                Thickness::Finite(t) if !(t >= R::zero()) || !t.is_finite() => {
                    return Err(Error::InvalidStack(format!(
                        "layer {i} ({}) has invalid thickness {t}",
                        layer.material.name
                    )))
                }
                _ => {}
            }
        }
        Ok(Self { ambient, layers, role })
    }

    /// Builds a stack from material names: `layers` are `(name, Some(thickness))`
    /// for finite layers and `(name, None)` for the terminating half-space.
    pub fn from_names(
        db: &MaterialsDatabase<R>,
        ambient: &str,
        layers: &[(&str, Option<R>)],
        role: StackRole,
    ) -> Result<Self> {
        let ambient = db.get(ambient)?;
        let layers = layers
            .iter()
            .map(|&(name, t)| {
                let material = db.get(name)?;
                Ok(match t {
                    Some(t) => Layer::finite(material, t),
                    None => Layer::half_space(material),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(ambient, layers, role)
    }

    pub fn ambient(&self) -> &Arc<DielectricModel<R>> {
        &self.ambient
    }

    pub fn layers(&self) -> &[Layer<R>] {
        &self.layers
    }

    pub fn role(&self) -> StackRole {
        self.role
    }

    /// Finite thicknesses of all layers except the terminator.
    pub fn thicknesses(&self) -> Vec<R> {
        self.layers
            .iter()
            .filter_map(|l| match l.thickness {
                Thickness::Finite(t) => Some(t),
                Thickness::HalfSpace => None,
            })
            .collect()
    }

    /// Evaluates all permittivities at `iξ`.
    pub fn at_frequency(&self, xi: R) -> Result<ResolvedStack<R>> {
        let mut eps = Vec::with_capacity(self.layers.len() + 1);
        eps.push(self.ambient.permittivity_imag(xi)?);
        for layer in &self.layers {
            eps.push(layer.material.permittivity_imag(xi)?);
        }
        Ok(ResolvedStack {
            eps,
            thickness: self.thicknesses(),
            xi,
        })
    }
}

/// A stack with permittivities fixed at one imaginary frequency.
///
/// `eps[0]` is the ambient liquid, `thickness[j]` belongs to `eps[j + 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedStack<R> {
    pub eps: Vec<R>,
    pub thickness: Vec<R>,
    pub xi: R,
}

impl<R: Real> ResolvedStack<R> {
    /// Reflection amplitude seen from the ambient medium.
    ///
    /// Recursion from the innermost interface outward; each step applies the
    /// single-film formula with the already-reduced amplitude behind it.
    pub fn reflection(&self, k_par: R, pol: Polarization) -> Result<R> {
        if k_par == R::zero() && self.xi == R::zero() {
            return Err(Error::DegenerateWavevector);
        }
        let q2 = self.xi * self.xi / lit::<R>(SPEED_OF_LIGHT * SPEED_OF_LIGHT);
        let kz = |eps: R| -> R {
            if self.xi == R::zero() {
                k_par
            } else {
                (k_par * k_par + eps * q2).sqrt()
            }
        };
        let n = self.eps.len();
        let mut k_inner = kz(self.eps[n - 1]);
        let mut r = R::zero();
        for j in (0..n - 1).rev() {
            let k_outer = kz(self.eps[j]);
            let r_face = interface(self.eps[j], self.eps[j + 1], k_outer, k_inner, self.xi, pol);
            r = if j == n - 2 {
                r_face
            } else {
                let x = decay(k_inner, self.thickness[j]);
                combine(r_face, r, x)
            };
            k_inner = k_outer;
        }
        Ok(r)
    }
}

#[inline]
pub(crate) fn decay<R: Real>(kz: R, thickness: R) -> R {
    let exponent = lit::<R>(-2.0) * kz * thickness;
    if exponent < lit(-700.0) {
        R::zero()
    } else {
        exponent.exp()
    }
}

/// Film formula `(r₁ + r₂ x) / (1 + r₁ r₂ x)`.
#[inline]
pub(crate) fn combine<R: Real>(r_face: R, r_behind: R, x: R) -> R {
    let rx = r_behind * x;
    (r_face + rx) / (R::one() + r_face * rx)
}

// single interface with precomputed vertical wavevectors
#[inline]
fn interface<R: Real>(eps1: R, eps2: R, k1: R, k2: R, xi: R, pol: Polarization) -> R {
    match pol {
        Polarization::TE => {
            if xi == R::zero() {
                R::zero()
            } else {
                (k1 - k2) / (k1 + k2)
            }
        }
        Polarization::TM => {
            if xi == R::zero() {
                static_tm(eps1, eps2)
            } else {
                (eps2 * k1 - eps1 * k2) / (eps2 * k1 + eps1 * k2)
            }
        }
    }
}

/// `(ε₂ - ε₁)/(ε₂ + ε₁)` with the metal sentinel `ε = ∞` mapped to the limit.
fn static_tm<R: Real>(eps1: R, eps2: R) -> R {
    match (eps1.is_infinite(), eps2.is_infinite()) {
        (false, false) => (eps2 - eps1) / (eps2 + eps1),
        (false, true) => R::one(),
        (true, false) => -R::one(),
        (true, true) => R::zero(),
    }
}

/// Reflection amplitude of a single interface from medium 1 into medium 2.
pub fn fresnel_interface<R: Real>(eps1: R, eps2: R, k_par: R, xi: R, pol: Polarization) -> Result<R> {
    if !(k_par >= R::zero()) || !(xi >= R::zero()) {
        return Err(domain(format!("k_par and xi must be >= 0 (got {k_par}, {xi})")));
    }
    if k_par == R::zero() && xi == R::zero() {
        return Err(Error::DegenerateWavevector);
    }
    if xi > R::zero() && !(eps1.is_finite() && eps2.is_finite()) {
        return Err(domain("infinite permittivity is only meaningful at xi = 0"));
    }
    if !(eps1 >= R::one()) || !(eps2 >= R::one()) {
        return Err(domain(format!("permittivities must be >= 1 (got {eps1}, {eps2})")));
    }
    if eps1 == eps2 {
        return Ok(R::zero());
    }
    let q2 = xi * xi / lit::<R>(SPEED_OF_LIGHT * SPEED_OF_LIGHT);
    let k1 = (k_par * k_par + eps1 * q2).sqrt();
    let k2 = (k_par * k_par + eps2 * q2).sqrt();
    Ok(interface(eps1, eps2, k1, k2, xi, pol))
}

/// Reflection amplitude of a liquid | film | half-space mirror.
pub fn slab_reflection<R: Real>(stack: &LayerStack<R>, k_par: R, xi: R, pol: Polarization) -> Result<R> {
    if stack.layers().len() != 2 {
        return Err(Error::InvalidStack(format!(
            "slab geometry needs exactly one film and one half-space, got {} layers",
            stack.layers().len()
        )));
    }
    let resolved = stack.at_frequency(xi)?;
    let (e1, e2, e3) = (resolved.eps[0], resolved.eps[1], resolved.eps[2]);
    let thickness = resolved.thickness[0];
    let r12 = fresnel_interface(e1, e2, k_par, xi, pol)?;
    let r23 = fresnel_interface(e2, e3, k_par, xi, pol)?;
    let k2z = if xi == R::zero() {
        k_par
    } else {
        (k_par * k_par + e2 * xi * xi / lit::<R>(SPEED_OF_LIGHT * SPEED_OF_LIGHT)).sqrt()
    };
    let x = decay(k2z, thickness);
    Ok((r12 + r23 * x) / (R::one() + r12 * r23 * x))
}

/// Reflection amplitude of an arbitrary stack.
pub fn stack_reflection<R: Real>(stack: &LayerStack<R>, k_par: R, xi: R, pol: Polarization) -> Result<R> {
    if !(k_par >= R::zero()) || !(xi >= R::zero()) {
        return Err(domain(format!("k_par and xi must be >= 0 (got {k_par}, {xi})")));
    }
    stack.at_frequency(xi)?.reflection(k_par, pol)
}

/// Static-limit TM amplitude with ionic screening in the ambient liquid.
///
/// Supported mirrors: a metal facing the liquid (amplitude 1), or one
/// dielectric film on a metal. Static permittivities are used throughout and
/// only the liquid carries the screened wavevector `sqrt(k_par² + κ²)`.
pub fn screened_reflection_n0<R: Real>(stack: &LayerStack<R>, k_par: R, kappa: R) -> Result<R> {
    if !(k_par >= R::zero()) || !(kappa >= R::zero()) {
        return Err(domain(format!("k_par and kappa must be >= 0 (got {k_par}, {kappa})")));
    }
    let layers = stack.layers();
    if layers[0].material.is_metal() {
        return Ok(R::one());
    }
    let coated_metal = layers.len() >= 2
        && matches!(layers[0].thickness, Thickness::Finite(_))
        && layers[1].material.is_metal();
    if !coated_metal {
        let names: Vec<&str> = layers.iter().map(|l| l.material.name.as_str()).collect();
        return Err(Error::UnsupportedTopology(format!(
            "expected metal or dielectric-on-metal, got {}",
            names.join(" | ")
        )));
    }
    let eps1 = stack.ambient().static_permittivity.value();
    let eps2 = layers[0].material.static_permittivity.value();
    let thickness = match layers[0].thickness {
        Thickness::Finite(t) => t,
        Thickness::HalfSpace => unreachable!(),
    };
    let k1 = (k_par * k_par + kappa * kappa).sqrt();
    let r12 = if k1 == R::zero() {
        static_tm(eps1, eps2)
    } else {
        (eps2 * k1 - eps1 * k_par) / (eps2 * k1 + eps1 * k_par)
    };
    let x = decay(k_par, thickness);
    Ok((r12 + x) / (R::one() + r12 * x))
}

/// Product `r̄_t r̄_b` of the screened static amplitudes of two mirrors.
pub(crate) fn screened_product<R: Real>(
    top: &LayerStack<R>,
    bottom: &LayerStack<R>,
    k_par: R,
    kappa: R,
) -> Result<R> {
    Ok(screened_reflection_n0(top, k_par, kappa)? * screened_reflection_n0(bottom, k_par, kappa)?)
}

//! Globally adaptive Gauss-Kronrod (7/15) quadrature on finite intervals.

// nodes and weights at the precision they are tabulated; f64 rounds them
#![allow(clippy::excessive_precision)]

use crate::scalar::{lit, Real};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.000_000_000_000_000_000_000_000_000_000_000,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature<R> {
    pub value: R,
    /// Estimated absolute error.
    pub abs_error: R,
    /// Number of integrand evaluations.
    pub evaluations: usize,
    pub converged: bool,
}

struct Segment<R> {
    a: R,
    b: R,
    value: R,
    error: R,
    magnitude: R,
}

/// Returns the Kronrod value, the Kronrod-Gauss difference and the Kronrod
/// estimate of `∫|f|`, which sets the round-off floor.
fn kronrod15<R: Real, F: FnMut(R) -> R>(f: &mut F, a: R, b: R) -> (R, R, R) {
    let half: R = lit(0.5);
    let center = half * (a + b);
    let half_len = half * (b - a);
    let fc = f(center);
    let mut gauss = fc * lit(WG[3]);
    let mut kronrod = fc * lit(WGK[7]);
    let mut magnitude = fc.abs() * lit(WGK[7]);
    for j in 0..7 {
        let dx = half_len * lit(XGK[j]);
        let (fl, fr) = (f(center - dx), f(center + dx));
        let sum = fl + fr;
        kronrod += sum * lit(WGK[j]);
        magnitude += (fl.abs() + fr.abs()) * lit(WGK[j]);
        if j % 2 == 1 {
            gauss += sum * lit(WG[j / 2]);
        }
    }
    let value = kronrod * half_len;
    let error = ((kronrod - gauss) * half_len).abs();
    (value, error, magnitude * half_len.abs())
}

/// Integrates `f` over `[a, b]`, bisecting the worst segment until the summed
/// error estimate falls below `max(abs_tol, rel_tol * |I|, 50 ε ∫|f|)` or
/// `max_segments` is reached. The last term is the round-off floor: when `f`
/// cancels, `|I|` can sit below what the arithmetic resolves. The interval is first split into `initial_segments` equal parts.
pub fn integrate<R: Real, F: FnMut(R) -> R>(
    mut f: F,
    a: R,
    b: R,
    rel_tol: R,
    abs_tol: R,
    initial_segments: usize,
    max_segments: usize,
) -> Quadrature<R> {
    let initial = initial_segments.max(1);
    let width = (b - a) / lit(initial as f64);
    let mut segments: Vec<Segment<R>> = (0..initial)
        .map(|i| {
            let lo = a + width * lit(i as f64);
            let hi = if i + 1 == initial { b } else { lo + width };
            let (value, error, magnitude) = kronrod15(&mut f, lo, hi);
            Segment { a: lo, b: hi, value, error, magnitude }
        })
        .collect();
    let mut evaluations = 15 * initial;

    loop {
        let (value, error, magnitude) = segments
            .iter()
            .fold((R::zero(), R::zero(), R::zero()), |(v, e, m), s| (v + s.value, e + s.error, m + s.magnitude));
        let target = abs_tol.max(rel_tol * value.abs()).max(lit::<R>(50.0) * R::epsilon() * magnitude);
        if error <= target || segments.len() >= max_segments.max(initial) {
            return Quadrature {
                value,
                abs_error: error,
                evaluations,
                converged: error <= target,
            };
        }
        let worst = segments
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.partial_cmp(&y.1.error).unwrap_or(std::cmp::Ordering::Equal))
            .map(|(i, _)| i)
            .unwrap_or(0);
        let seg = segments.swap_remove(worst);
        let mid = lit::<R>(0.5) * (seg.a + seg.b);
        let (v1, e1, m1) = kronrod15(&mut f, seg.a, mid);
        let (v2, e2, m2) = kronrod15(&mut f, mid, seg.b);
        evaluations += 30;
        segments.push(Segment { a: seg.a, b: mid, value: v1, error: e1, magnitude: m1 });
        segments.push(Segment { a: mid, b: seg.b, value: v2, error: e2, magnitude: m2 });
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_is_exact() {
        let q = integrate(|x: f64| x.powi(5) - 3.0 * x * x, 0.0, 2.0, 1e-12, 0.0, 1, 10);
        assert!((q.value - (64.0 / 6.0 - 8.0)).abs() < 1e-13);
        assert!(q.converged);
    }

    #[test]
    fn exponential_moment() {
        // ∫₀^50 y² e^{-y} dy = 2 - e^{-50}(2 + 100 + 2500)
        let exact = 2.0 - (-50f64).exp() * 2602.0;
        let q = integrate(|y: f64| y * y * (-y).exp(), 0.0, 50.0, 1e-12, 0.0, 4, 200);
        assert!((q.value - exact).abs() < 1e-12, "{}", q.value - exact);
        assert!(q.abs_error < 1e-11);
    }

    #[test]
    fn cancelling_integrand_stops_at_round_off() {
        // ∫₀^{2π} sin x dx = 0: no relative target is reachable
        let q = integrate(|x: f32| x.sin(), 0.0, 2.0 * std::f32::consts::PI, 1e-6, 0.0, 2, 200);
        assert!(q.converged);
        assert!(q.value.abs() < 1e-5);
    }

    #[test]
    fn reports_non_convergence() {
        let q = integrate(|x: f64| (1.0 / x).sin(), 1e-6, 1.0, 1e-14, 0.0, 1, 3);
        assert!(!q.converged);
    }
}

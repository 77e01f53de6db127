//! Deterministic test functions and sample streams.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::function::{AtomSum, Chart, FiberFactor, PointEvaluator, RadialFactor, SupportBox, TensorAtom, C64};
use crate::group::{CaseKind, CaseTag};

/// RNG for one named check, derived from the run seed.
pub fn rng_for(seed: u64, tag: &str) -> ChaCha8Rng {
    // FNV-1a over the tag keeps streams independent across checks
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in tag.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    ChaCha8Rng::seed_from_u64(seed ^ h)
}

/// `i`-th point of the golden-ratio sequence, mapped into `(0, 1]`.
pub fn golden_point(i: usize) -> f64 {
    let phi_inv = 0.618_033_988_749_894_9;
    1.0 - (0.5 + i as f64 * phi_inv).fract()
}

/// Smooth compactly supported bump `exp(-1/(1-d²))` on a disk, modulated by a
/// plane wave, on the given Cartesian chart.
pub fn planar_bump(chart: Chart, center: (f64, f64), radius: f64, wave: (f64, f64), amp: C64) -> PointEvaluator {
    let (cx, cy) = center;
    PointEvaluator::new(chart, SupportBox::new((cx - radius, cx + radius), (cy - radius, cy + radius)), move |x1, x2| {
        let d = ((x1 - cx) / radius).powi(2) + ((x2 - cy) / radius).powi(2);
        if d >= 1.0 {
            return C64::new(0.0, 0.0);
        }
        let phase = crate::function::cis_turns(wave.0 * x1 + wave.1 * x2);
        amp * phase * (-1.0 / (1.0 - d)).exp()
    })
    .with_freq(wave.0.abs() + 2.0 / radius, wave.1.abs() + 2.0 / radius)
}

/// Three bumps per planar case, placed inside the case's domain
/// (`x₁ > 0` for I, II; the plane for III; the cone `x₁ > |x₂|` for IV).
pub fn native_test_functions(case: &CaseTag) -> Vec<PointEvaluator> {
    let (chart, centers): (Chart, [(f64, f64, f64); 3]) = match case.kind {
        CaseKind::III => (Chart::Plane, [(0.6, 0.5, 0.35), (-0.4, -0.3, 0.3), (0.1, 0.9, 0.4)]),
        CaseKind::IV => (Chart::Cone, [(1.0, 0.2, 0.35), (1.6, -0.5, 0.4), (0.8, 0.0, 0.3)]),
        _ => (Chart::HalfPlane, [(1.0, 0.1, 0.4), (0.5, -0.6, 0.3), (1.7, 1.2, 0.5)]),
    };
    centers
        .iter()
        .enumerate()
        .map(|(i, &(cx, cy, r))| {
            let wave = (0.7 * i as f64 - 0.4, 1.1 - 0.5 * i as f64);
            planar_bump(chart, (cx, cy), r, wave, C64::new(1.0, 0.3 * i as f64))
        })
        .collect()
}

/// Random phase-free atom sum on `ℝ₊ × ℝ` with radial support in `(0.05, 2.5]`.
pub fn random_phase_free_atoms(rng: &mut ChaCha8Rng, n: usize) -> AtomSum {
    (0..n)
        .map(|_| {
            let a = rng.gen_range(0.05..2.0);
            let b = rng.gen_range(a + 0.05..2.5);
            let p = [0.0, 0.5, 1.0, -0.25][rng.gen_range(0..4)];
            TensorAtom::new(
                C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
                RadialFactor::indicator(a, b).with_power(p),
                FiberFactor::cell(rng.gen_range(-1..=1), rng.gen_range(-2..=2)),
            )
        })
        .collect()
}

/// As [`random_phase_free_atoms`], with a random linear phase on each atom and
/// powers in `{0, 1}` so that pairs keep closed-form inner products.
pub fn random_lin_phase_atoms(rng: &mut ChaCha8Rng, n: usize) -> AtomSum {
    let mut f = random_phase_free_atoms(rng, n);
    for a in &mut f.atoms {
        a.radial = a.radial.with_power(rng.gen_range(0..2) as f64).with_lin(rng.gen_range(-3.0..3.0));
    }
    f
}

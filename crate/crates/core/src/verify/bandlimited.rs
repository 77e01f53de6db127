//! Band-limited sampling identity `∫₀^{2^{-k}} f ḡ = 2ᵏ Σ_m f̂(2ᵏm) conj ĝ(2ᵏm)`
//! for closed-form radial functions supported in `[0, 2^{-k}]`, with a rigorous tail bound.

use std::f64::consts::PI;
use std::time::Instant;

use serde_json::json;

use crate::error::{Error, Result};
use crate::function::{cis_turns, inner_product_exact, radial_integral, AtomSum, FiberFactor, RadialFactor, RadialWeight, TensorAtom, C64};

use super::report::{check_tol, par_map, Defect, Report};

/// Smallest and largest truncation `M` tried; `M` doubles in between.
pub const M_START: i64 = 1 << 14;
pub const M_MAX: i64 = 1 << 26;
const CHUNK: i64 = 1 << 14;

/// Radial-only closed-form atoms with nonnegative power and no quadratic phase.
fn check_atoms(f: &AtomSum, k: i64) -> Result<()> {
    f.validate()?;
    let top = 2f64.powi(-(k as i32));
    for a in &f.atoms {
        if a.fiber != FiberFactor::Trivial {
            return Err(Error::InvalidFunction("band-limited identity takes functions on the half line".into()));
        }
        if a.radial.quad != 0.0 || a.radial.power < 0.0 {
            return Err(Error::InvalidFunction(format!(
                "atom {:?} needs power >= 0 and no quadratic phase for the tail bound",
                a.radial
            )));
        }
        if a.radial.hi > top {
            return Err(Error::SupportViolation(format!(
                "support ({}, {}] is not inside [0, 2^-{k}]",
                a.radial.lo, a.radial.hi
            )));
        }
    }
    Ok(())
}

/// `f̂(ω) = ∫ f(x) e^{-2πiωx} dx`, in closed form.
pub fn fourier(f: &AtomSum, omega: f64) -> Result<C64> {
    let mut acc = C64::new(0.0, 0.0);
    for a in &f.atoms {
        let r = &a.radial;
        let du = r.lin - omega;
        let v = if r.power == 0.0 && 2.0 * PI * du.abs() * r.hi > 1.0 {
            // the general path's antiderivative, specialised to r^0
            (cis_turns(du * r.hi) - cis_turns(du * r.lo)) / C64::new(0.0, 2.0 * PI * du)
        } else {
            radial_integral(r.power, r.lo, r.hi, du, 0.0)?
        };
        acc += a.coeff * v;
    }
    Ok(acc)
}

/// `(J, U)` with `|f̂(ω)| ≤ J / (2π(|ω| − U))` for `|ω| > U`: integrating by parts,
/// each atom contributes its two endpoint jumps plus the variation of `r^p`, at most `2|c| b^p`.
fn decay_constants(f: &AtomSum) -> (f64, f64) {
    f.atoms.iter().fold((0.0, 0.0), |(j, u), a| {
        (j + 2.0 * a.coeff.norm() * a.radial.hi.powf(a.radial.power), u.max(a.radial.lin.abs()))
    })
}

/// Bound on `2ᵏ Σ_{|m|>M} |f̂(2ᵏm) ĝ(2ᵏm)|`, or `∞` when `2ᵏM ≤ U`.
pub fn tail_bound(f: &AtomSum, g: &AtomSum, k: i64, m: i64) -> f64 {
    let (jf, uf) = decay_constants(f);
    let (jg, ug) = decay_constants(g);
    let gap = 2f64.powi(k as i32) * m as f64 - uf.max(ug);
    if gap <= 0.0 {
        return f64::INFINITY;
    }
    // Σ_{m>M} (2ᵏm − U)^{-2} ≤ ∫_M^∞, both signs of m, times 2ᵏ
    jf * jg / (2.0 * PI * PI * gap)
}

/// Neumaier-compensated sum of complex values, in order.
fn neumaier(values: impl IntoIterator<Item = C64>) -> C64 {
    let (mut s, mut c) = (C64::new(0.0, 0.0), C64::new(0.0, 0.0));
    for x in values {
        let t = s + x;
        let fix = |s: f64, x: f64, t: f64| if s.abs() >= x.abs() { (s - t) + x } else { (x - t) + s };
        c += C64::new(fix(s.re, x.re, t.re), fix(s.im, x.im, t.im));
        s = t;
    }
    s + c
}

/// `2ᵏ Σ_{|m|≤M} f̂(2ᵏm) conj ĝ(2ᵏm)`, summed in fixed chunks so the result does
/// not depend on the worker count.
pub fn sampled_sum(f: &AtomSum, g: &AtomSum, k: i64, m_max: i64) -> Result<C64> {
    let step = 2f64.powi(k as i32);
    let same = f == g;
    let starts: Vec<i64> = (-m_max..=m_max).step_by(CHUNK as usize).collect();
    let parts = par_map(&starts, |&s| -> Result<C64> {
        let end = (s + CHUNK - 1).min(m_max);
        let mut terms = Vec::with_capacity(CHUNK as usize);
        for m in s..=end {
            let w = step * m as f64;
            let fh = fourier(f, w)?;
            let gh = if same { fh } else { fourier(g, w)? };
            terms.push(fh * gh.conj());
        }
        Ok(neumaier(terms))
    });
    Ok(neumaier(parts.into_iter().collect::<Result<Vec<_>>>()?) * step)
}

/// Defect `|⟨f,g⟩ − 2ᵏ Σ_{|m|≤M} …|`, with `M` the first doubling whose tail bound is at most `tol/2`.
pub fn bandlimited_identity_defect(f: &AtomSum, g: &AtomSum, k: i64, tol: f64) -> Result<Report> {
    check_tol(tol)?;
    check_atoms(f, k)?;
    check_atoms(g, k)?;
    let started = Instant::now();
    let mut m = M_START;
    while tail_bound(f, g, k, m) > tol / 2.0 && m < M_MAX {
        m *= 2;
    }
    let bound = tail_bound(f, g, k, m);
    if bound > tol / 2.0 {
        return Err(Error::TailBoundExceedsTol { bound, tol: tol / 2.0 });
    }
    let exact = inner_product_exact(f, g, RadialWeight::LEBESGUE)?;
    let sum = sampled_sum(f, g, k, m)?;
    let d = Defect::from_values([(exact - sum).norm()]);
    Ok(Report::new(
        "bandlimited",
        "L",
        json!({"k": k, "mMax": m, "tailBound": bound, "exact": [exact.re, exact.im], "sampled": [sum.re, sum.im]}),
        &d,
        tol,
        started,
    )
    .with_notes(format!("truncated at |m| <= {m}; rigorous tail bound {bound:.3e}")))
}

fn ind(lo: f64, hi: f64, lin: f64) -> AtomSum {
    AtomSum::new(vec![TensorAtom::radial_only(C64::new(1.0, 0.0), RadialFactor::indicator(lo, hi).with_lin(lin))])
}

/// The three standard pairs `(f, g, k)` with `L = 2^{-k}`: equal indicators at `k = 0`,
/// nested indicators at `k = 1`, and a modulated half-indicator against an offset one at `k = 2`.
pub fn default_pairs() -> Vec<(AtomSum, AtomSum, i64)> {
    let l = |k: i32| 2f64.powi(-k);
    vec![
        (ind(0.0, l(0), 0.0), ind(0.0, l(0), 0.0), 0),
        (ind(0.0, l(1) / 2.0, 0.0), ind(0.0, l(1), 0.0), 1),
        (ind(0.0, l(2) / 2.0, 0.3), ind(l(2) / 4.0, l(2), 0.0), 2),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equal_indicators_have_one_sample() {
        let f = ind(0.0, 0.5, 0.0);
        for m in 1..20 {
            assert!(fourier(&f, 2.0 * m as f64).unwrap().norm() < 1e-16);
        }
        assert!((sampled_sum(&f, &f, 1, 100).unwrap() - C64::new(0.5, 0.0)).norm() < 1e-16);
    }

    #[test]
    fn tail_bound_dominates_actual_tail() {
        let (f, g, k) = default_pairs().swap_remove(1);
        let full = sampled_sum(&f, &g, k, 1 << 16).unwrap();
        for m in [64, 256, 1024] {
            let part = sampled_sum(&f, &g, k, m).unwrap();
            assert!((full - part).norm() <= tail_bound(&f, &g, k, m));
        }
    }

    #[test]
    fn nested_indicators_pass() {
        let (f, g, k) = default_pairs().swap_remove(1);
        let r = bandlimited_identity_defect(&f, &g, k, 1e-8).unwrap();
        assert!(r.pass, "{}", r.summary_line());
        assert!((inner_product_exact(&f, &g, RadialWeight::LEBESGUE).unwrap().re - 0.25).abs() < 1e-16);
    }

    #[test]
    fn errors() {
        let f = ind(0.0, 1.0, 0.0);
        assert!(matches!(bandlimited_identity_defect(&f, &f, 1, 1e-8), Err(Error::SupportViolation(_))));
        assert!(matches!(
            bandlimited_identity_defect(&f, &f, 0, 1e-14),
            Err(Error::TailBoundExceedsTol { .. })
        ));
    }

    #[test]
    fn sum_is_chunk_order_stable() {
        let (f, g, k) = default_pairs().swap_remove(2);
        let a = sampled_sum(&f, &g, k, 3 * CHUNK + 17).unwrap();
        let b = sampled_sum(&f, &g, k, 3 * CHUNK + 17).unwrap();
        assert_eq!(a, b);
    }
}

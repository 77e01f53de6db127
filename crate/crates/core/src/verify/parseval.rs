//! Discrete Parseval identity for the l-side lattice system
//! `{μ_{(2ᵏm, 2ᵏ)} ψ}`: `Σ |⟨f, μ_λ ψ⟩|² = ‖f‖²`, with exact coefficients.

use std::collections::BTreeSet;
use std::f64::consts::PI;
use std::time::Instant;

use serde_json::json;

use crate::error::{Error, Result};
use crate::function::{inner_product_exact, norm_exact, AtomSum, FiberFactor, RadialWeight, TensorAtom, C64};
use crate::group::{act_atoms, lattice_element, CaseTag};
use crate::shannon::{FiberIndex, LazyShannonLift};

use super::gram::LatticeBox;
use super::report::{check_tol, try_par_map, Defect, Report};

/// Bands `j` (`(2^{-j}, 2^{-j+1}]`, any sign of `j`) meeting `(lo, hi]`.
fn bands_meeting(lo: f64, hi: f64) -> Result<(i64, i64)> {
    if !(lo > 0.0) || !hi.is_finite() {
        return Err(Error::TruncationTooSmall(format!(
            "radial support ({lo}, {hi}] meets infinitely many bands"
        )));
    }
    let edge = |j: i64| 2f64.powi(-(j as i32));
    let mut jmin = (-hi.log2()).floor() as i64 + 1;
    while edge(jmin - 1) < hi {
        jmin -= 1;
    }
    while edge(jmin) >= hi {
        jmin += 1;
    }
    let mut jmax = (1.0 - lo.log2()).ceil() as i64 - 1;
    while 2.0 * edge(jmax + 1) > lo {
        jmax += 1;
    }
    while 2.0 * edge(jmax) <= lo {
        jmax -= 1;
    }
    Ok((jmin, jmax))
}

/// The fiber basis index of an atom, when its fiber is exactly one basis element.
fn basis_index(fiber: &FiberFactor) -> Result<FiberIndex> {
    match *fiber {
        FiberFactor::Circle { freq } => Ok(FiberIndex::Circle(freq)),
        FiberFactor::Line { lo, hi, freq }
            if lo.fract() == 0.0 && hi == lo + 1.0 && freq.fract() == 0.0 && lo.abs() < 1e15 && freq.abs() < 1e15 =>
        {
            Ok(FiberIndex::Line(lo as i64, freq as i64))
        }
        other => Err(Error::TruncationTooSmall(format!(
            "fiber {other:?} is not a single basis element, so infinitely many bands contribute"
        ))),
    }
}

/// Band indices `n` and scales `k` with a possibly nonzero coefficient `⟨f, μ_{(k,·)} ψ⟩`.
fn support_plan(f: &AtomSum, lift: &LazyShannonLift) -> Result<(BTreeSet<u64>, BTreeSet<i64>)> {
    let mut bands = BTreeSet::new();
    let mut scales = BTreeSet::new();
    for a in &f.atoms {
        let n = lift.bijection().index(basis_index(&a.fiber)?)?;
        let (j0, j1) = bands_meeting(a.radial.lo, a.radial.hi)?;
        bands.insert(n);
        // ψ(2ᵏξ) sits on band n exactly when ξ is on band n + k
        scales.extend((j0..=j1).map(|j| j - n as i64));
    }
    Ok((bands, scales))
}

/// Scales `k` at which `f` can have nonzero coefficients.
pub fn needed_scales(f: &AtomSum, lift: &LazyShannonLift) -> Result<BTreeSet<i64>> {
    f.validate()?;
    Ok(support_plan(f, lift)?.1)
}

/// Exact coefficients `⟨f, μ_{(2ᵏm, 2ᵏ)} ψ⟩` for every lattice point in the box,
/// in `(k, m)` order. Errors with `TruncationTooSmall` when `f` has nonzero
/// coefficients at scales outside the box.
pub fn l_coefficients(f: &AtomSum, lift: &LazyShannonLift, lattice: &LatticeBox) -> Result<Vec<((i64, i64), C64)>> {
    f.validate()?;
    let (bands, scales) = support_plan(f, lift)?;
    if let Some(k) = scales.iter().find(|&&k| k < lattice.k.0 || k > lattice.k.1) {
        return Err(Error::TruncationTooSmall(format!(
            "function has coefficients at scale k={k}, outside {:?}",
            lattice.k
        )));
    }
    // only bands whose fiber matches an atom's fiber can contribute
    let psi = bands
        .iter()
        .map(|&n| lift.band_term(n))
        .collect::<Result<Vec<TensorAtom>>>()
        .map(AtomSum::new)?;
    let l = CaseTag::l();
    try_par_map(&lattice.indices(), |&(k, m)| {
        if !scales.contains(&k) {
            return Ok(((k, m), C64::new(0.0, 0.0)));
        }
        let e = act_atoms(&l, &lattice_element(&l, k, m), &psi)?;
        Ok(((k, m), inner_product_exact(f, &e, RadialWeight::LEBESGUE)?))
    })
}

/// `Σ |c|²` over a coefficient list.
pub fn coefficient_energy(coeffs: &[((i64, i64), C64)]) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for (_, c) in coeffs {
        // Neumaier summation keeps the energy independent of term order at this scale
        let x = c.norm_sqr();
        let t = sum + x;
        comp += if sum >= x { (sum - t) + x } else { (x - t) + sum };
        sum = t;
    }
    sum + comp
}

/// Partial Bessel sum for `1_(1/2,1] ⊗ e₀₀` over `|m| ≤ M`:
/// `1/4 + 2 Σ_{odd m ≤ M} 1/(π² m²)`; it increases to `1/2`.
pub fn bessel_partial(m_max: i64) -> f64 {
    let odd: f64 = (1..=m_max.max(0)).filter(|m| m % 2 == 1).map(|m| 1.0 / (PI * PI * (m * m) as f64)).sum();
    0.25 + 2.0 * odd
}

/// `|Σ_λ |⟨f, μ_λ ψ⟩|² − ‖f‖²|` over the lattice box.
pub fn parseval_defect(f: &AtomSum, lift: &LazyShannonLift, lattice: &LatticeBox, tol: f64) -> Result<Report> {
    check_tol(tol)?;
    let started = Instant::now();
    let coeffs = l_coefficients(f, lift, lattice)?;
    let energy = coefficient_energy(&coeffs);
    let norm2 = norm_exact(f, RadialWeight::LEBESGUE)?.powi(2);
    let d = Defect::from_values([(energy - norm2).abs()]);
    Ok(Report::new(
        "parseval",
        "L",
        json!({"kRange": [lattice.k.0, lattice.k.1], "mRange": [lattice.m.0, lattice.m.1], "atoms": f.len(), "normSquared": norm2, "coefficientEnergy": energy}),
        &d,
        tol,
        started,
    )
    .with_notes(format!("{} exact coefficients", coeffs.len())))
}

/// The Bessel defects of `1_(1/2,1] ⊗ e₀₀` over nested boxes `|m| ≤ M_i`,
/// each checked against the closed form `1/2 − bessel_partial(M_i)`.
pub fn bessel_sequence(lift: &LazyShannonLift, m_bounds: &[i64], tol: f64) -> Result<(Report, Vec<f64>)> {
    check_tol(tol)?;
    let started = Instant::now();
    let f = AtomSum::new(vec![TensorAtom::new(
        C64::new(1.0, 0.0),
        crate::function::RadialFactor::indicator(0.5, 1.0),
        FiberFactor::cell(0, 0),
    )]);
    let mut defects = Vec::new();
    let mut d = Defect::default();
    for &m in m_bounds {
        let lattice = LatticeBox::new((-1, 1), (-m, m))?;
        let energy = coefficient_energy(&l_coefficients(&f, lift, &lattice)?);
        defects.push(0.5 - energy);
        d.push((energy - bessel_partial(m)).abs());
    }
    let monotone = defects.windows(2).all(|w| w[1] <= w[0]);
    if !monotone {
        d.push(f64::NAN);
    }
    let report = Report::new("parseval_bessel", "L", json!({"mBounds": m_bounds, "defects": defects}), &d, tol, started)
        .with_notes(format!("defect vs closed-form Bessel sum; monotone decrease: {monotone}"));
    Ok((report, defects))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::function::RadialFactor;
    use crate::verify::gram::l_system;

    fn f1() -> AtomSum {
        AtomSum::new(vec![TensorAtom::new(C64::new(1.0, 0.0), RadialFactor::indicator(0.5, 1.0), FiberFactor::cell(0, 0))])
    }

    #[test]
    fn band_ranges() {
        assert_eq!(bands_meeting(0.5, 1.0).unwrap(), (1, 1));
        assert_eq!(bands_meeting(0.25, 1.0).unwrap(), (1, 2));
        assert_eq!(bands_meeting(0.3, 1.5).unwrap(), (0, 2));
        assert_eq!(bands_meeting(1.0, 2.0).unwrap(), (0, 0));
        assert!(matches!(bands_meeting(0.0, 1.0), Err(Error::TruncationTooSmall(_))));
    }

    #[test]
    fn indicator_matches_bessel_oracle() {
        let lift = LazyShannonLift::line();
        for m in [0, 1, 4, 9] {
            let c = l_coefficients(&f1(), &lift, &LatticeBox::new((0, 0), (-m, m)).unwrap()).unwrap();
            assert!((coefficient_energy(&c) - bessel_partial(m)).abs() < 1e-15);
        }
        let (r, d) = bessel_sequence(&lift, &[1, 3, 7, 15, 31], 1e-14).unwrap();
        assert!(r.pass, "{}", r.summary_line());
        assert!(d.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn indicator_is_far_from_parseval_in_a_finite_box() {
        // the tail Σ_{|m|>M} is about 2/(π² M), nowhere near 1e-12
        let r = parseval_defect(&f1(), &LazyShannonLift::line(), &LatticeBox::new((-2, 2), (-8, 8)).unwrap(), 1e-12).unwrap();
        assert!(!r.pass && r.max_defect > 1e-2);
    }

    #[test]
    fn truncated_system_elements() {
        let lift = LazyShannonLift::line();
        let lat = LatticeBox::new((-1, 1), (-2, 2)).unwrap();
        let sys = l_system(&lift, 41, &lat).unwrap();
        let mut f = sys[3].scaled(C64::new(0.6, 0.0));
        f.extend(&sys[11].scaled(C64::new(0.8, 0.0)));
        let wide = LatticeBox::new((-45, 45), (-4, 4)).unwrap();
        let r = parseval_defect(&f, &lift, &wide, 1e-12).unwrap();
        assert!(r.pass, "{}", r.summary_line());
    }

    #[test]
    fn zero_function_and_errors() {
        let lift = LazyShannonLift::line();
        let lat = LatticeBox::new((0, 0), (-1, 1)).unwrap();
        let r = parseval_defect(&AtomSum::zero(), &lift, &lat, 1e-12).unwrap();
        assert_eq!(r.max_defect, 0.0);
        let narrow = LatticeBox::new((3, 4), (-1, 1)).unwrap();
        assert!(matches!(l_coefficients(&f1(), &lift, &narrow), Err(Error::TruncationTooSmall(_))));
        let odd = AtomSum::new(vec![TensorAtom::new(
            C64::new(1.0, 0.0),
            RadialFactor::indicator(0.5, 1.0),
            FiberFactor::Line { lo: 0.0, hi: 0.5, freq: 0.0 },
        )]);
        assert!(matches!(l_coefficients(&odd, &lift, &lat), Err(Error::TruncationTooSmall(_))));
    }
}

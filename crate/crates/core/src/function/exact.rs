//! Closed-form weighted inner products between atoms.

use std::f64::consts::PI;

use super::atom::{cis_turns, AtomSum, RadialFactor, RadialWeight, TensorAtom, C64};
use crate::error::{Error, Result};

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// `∫_lo^hi r^q e^{2πi(du·r + dv·r²/2)} dr` when a closed form is available.
pub fn radial_integral(q: f64, lo: f64, hi: f64, du: f64, dv: f64) -> Result<C64> {
    if lo >= hi {
        return Ok(ZERO);
    }
    if dv != 0.0 {
        return Err(Error::NonExactPair(format!(
            "quadratic phase difference {dv} has no elementary antiderivative"
        )));
    }
    if du == 0.0 {
        return power_integral(q, lo, hi).map(|v| C64::new(v, 0.0));
    }
    if !hi.is_finite() {
        return Err(Error::NonExactPair("oscillatory integrand on an unbounded interval".into()));
    }
    if q < 0.0 || q.fract() != 0.0 || q > 64.0 {
        return Err(Error::NonExactPair(format!(
            "oscillatory integrand with non-integer or negative exponent {q}"
        )));
    }
    let n = q as u32;
    let omega = 2.0 * PI * du;
    if omega.abs() * hi <= 1.0 {
        Ok(series_moment(n, lo, hi, omega))
    } else {
        Ok(antiderivative(n, hi, du) - antiderivative(n, lo, du))
    }
}

fn power_integral(q: f64, lo: f64, hi: f64) -> Result<f64> {
    if q == -1.0 {
        if lo == 0.0 || !hi.is_finite() {
            return Err(Error::InvalidFunction(format!(
                "∫ dr/r diverges on ({lo}, {hi}]"
            )));
        }
        return Ok((hi / lo).ln());
    }
    if q < -1.0 && lo == 0.0 {
        return Err(Error::InvalidFunction(format!("∫ r^{q} dr diverges at 0")));
    }
    if q > -1.0 && !hi.is_finite() {
        return Err(Error::InvalidFunction(format!("∫ r^{q} dr diverges at ∞")));
    }
    let e = q + 1.0;
    let top = if hi.is_finite() { hi.powf(e) } else { 0.0 };
    let bottom = if lo == 0.0 { 0.0 } else { lo.powf(e) };
    Ok((top - bottom) / e)
}

/// `e^{iωr} Σ_j (-1)^j n!/(n-j)! r^{n-j} / (iω)^{j+1}`, with `ω = 2π du`.
fn antiderivative(n: u32, r: f64, du: f64) -> C64 {
    let iw = C64::new(0.0, 2.0 * PI * du);
    let mut sum = ZERO;
    let mut falling = 1.0;
    let mut denom = iw;
    for j in 0..=n {
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        sum += sign * falling * r.powi((n - j) as i32) / denom;
        falling *= (n - j) as f64;
        denom *= iw;
    }
    cis_turns(du * r) * sum
}

/// Taylor expansion of `e^{iωr}`, used when `|ω|·hi ≤ 1`.
fn series_moment(n: u32, lo: f64, hi: f64, omega: f64) -> C64 {
    let mut sum = ZERO;
    let mut coeff = C64::new(1.0, 0.0);
    for j in 0..60u32 {
        let p = (n + j + 1) as i32;
        let term = coeff * ((hi.powi(p) - lo.powi(p)) / p as f64);
        sum += term;
        if term.norm() <= 1e-18 * sum.norm() && j > 2 {
            break;
        }
        coeff *= C64::new(0.0, omega) / (j + 1) as f64;
    }
    sum
}

/// Weighted inner product of two atoms, `∫∫ a · conj(b) r^w dr dκ(y)`.
pub fn atom_inner_exact(a: &TensorAtom, b: &TensorAtom, weight: RadialWeight) -> Result<C64> {
    let fiber = a.fiber.inner(&b.fiber)?;
    if fiber == ZERO {
        return Ok(ZERO);
    }
    let (ra, rb): (&RadialFactor, &RadialFactor) = (&a.radial, &b.radial);
    let lo = ra.lo.max(rb.lo);
    let hi = ra.hi.min(rb.hi);
    if lo >= hi {
        return Ok(ZERO);
    }
    let q = ra.power + rb.power + weight.exponent();
    let radial = radial_integral(q, lo, hi, ra.lin - rb.lin, ra.quad - rb.quad)?;
    Ok(a.coeff * b.coeff.conj() * radial * fiber)
}

/// `⟨f, g⟩` under `r^w dr ⊗ κ`, summed over atom pairs.
pub fn inner_product_exact(f: &AtomSum, g: &AtomSum, weight: RadialWeight) -> Result<C64> {
    let mut acc = ZERO;
    for a in &f.atoms {
        for b in &g.atoms {
            acc += atom_inner_exact(a, b, weight)?;
        }
    }
    Ok(acc)
}

/// `‖f‖` on the exact path; rejects a non-negligible imaginary part.
pub fn norm_exact(f: &AtomSum, weight: RadialWeight) -> Result<f64> {
    real_norm(inner_product_exact(f, f, weight)?)
}

pub(crate) fn real_norm(v: C64) -> Result<f64> {
    if v.im.abs() > 1e-13 * v.re.abs().max(1.0) {
        return Err(Error::ComplexNorm(v.im));
    }
    Ok(v.re.max(0.0).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::function::atom::FiberFactor;

    fn one() -> C64 {
        C64::new(1.0, 0.0)
    }

    #[test]
    fn half_band_norm() {
        let a = TensorAtom::new(one(), RadialFactor::indicator(0.5, 1.0), FiberFactor::cell(0, 0));
        let f = AtomSum::new(vec![a]);
        let v = inner_product_exact(&f, &f, RadialWeight::LEBESGUE).unwrap();
        assert_eq!(v, C64::new(0.5, 0.0));
    }

    #[test]
    fn dyadic_band_norm_is_log2() {
        for m in 1..=20 {
            let lo = 2f64.powi(-m);
            let a = TensorAtom::radial_only(one(), RadialFactor::indicator(lo, 2.0 * lo));
            let n = norm_exact(&AtomSum::new(vec![a]), RadialWeight::HAAR_L).unwrap();
            assert!((n * n - std::f64::consts::LN_2).abs() <= 1e-14);
        }
    }

    #[test]
    fn shifted_phase_closed_form() {
        let a = TensorAtom::radial_only(one(), RadialFactor::indicator(1.0, 2.0).with_lin(0.3));
        let b = TensorAtom::radial_only(one(), RadialFactor::indicator(1.0, 2.0));
        let v = atom_inner_exact(&a, &b, RadialWeight::LEBESGUE).unwrap();
        // direct evaluation of (e^{1.2πi} − e^{0.6πi}) / (0.6πi)
        let expect = (C64::new(0.0, 1.2 * PI).exp() - C64::new(0.0, 0.6 * PI).exp())
            / C64::new(0.0, 0.6 * PI);
        assert!((v - expect).norm() < 1e-15);
    }

    #[test]
    fn polynomial_moments_both_branches() {
        // ∫_0^1 r² e^{2πi u r} dr against a simple midpoint-free reference:
        // the antiderivative branch and the series branch must agree near the switch.
        for &du in &[0.15, 0.159, 0.16, 0.2] {
            let s = series_moment(2, 0.25, 1.0, 2.0 * PI * du);
            let a = antiderivative(2, 1.0, du) - antiderivative(2, 0.25, du);
            assert!((s - a).norm() < 1e-13, "du={du}: {s} vs {a}");
        }
    }

    #[test]
    fn non_exact_pairs_are_flagged() {
        let a = TensorAtom::radial_only(one(), RadialFactor::indicator(0.0, 1.0).with_quad(1.0));
        let b = TensorAtom::radial_only(one(), RadialFactor::indicator(0.0, 1.0));
        assert!(matches!(
            atom_inner_exact(&a, &b, RadialWeight::LEBESGUE),
            Err(Error::NonExactPair(_))
        ));
        let c = TensorAtom::radial_only(
            one(),
            RadialFactor::indicator(0.5, 1.0).with_lin(1.0).with_power(0.5),
        );
        assert!(matches!(
            atom_inner_exact(&c, &b, RadialWeight::LEBESGUE),
            Err(Error::NonExactPair(_))
        ));
        // same phase, arbitrary exponent is fine
        assert!(atom_inner_exact(&c, &c, RadialWeight(-1.7)).is_ok());
    }

    #[test]
    fn disjoint_supports_are_exact_zero() {
        let a = TensorAtom::new(one(), RadialFactor::indicator(0.0, 1.0), FiberFactor::cell(0, 0));
        let b = TensorAtom::new(one(), RadialFactor::indicator(1.0, 2.0), FiberFactor::cell(0, 0));
        let c = TensorAtom::new(one(), RadialFactor::indicator(0.0, 1.0), FiberFactor::cell(1, 0));
        assert_eq!(atom_inner_exact(&a, &b, RadialWeight(-2.5)).unwrap(), ZERO);
        assert_eq!(atom_inner_exact(&a, &c, RadialWeight::LEBESGUE).unwrap(), ZERO);
    }
}

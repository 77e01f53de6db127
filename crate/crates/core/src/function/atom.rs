//! Closed-form tensor atoms `c · r^p · 1_(a,b](r) · e^{2πi u r} · e^{πi v r²} ⊗ fiber(y)`
//! and the transformations that keep them inside the atom algebra.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// `e^{2πi x}`, with `x` reduced to the nearest quarter turn first so that
/// integer and quarter-integer turn counts come out exact.
pub fn cis_turns(x: f64) -> C64 {
    if !x.is_finite() {
        return C64::new(f64::NAN, f64::NAN);
    }
    let q = (4.0 * x).round();
    let g = x - q / 4.0;
    let (s, c) = if g == 0.0 {
        (0.0, 1.0)
    } else {
        (2.0 * std::f64::consts::PI * g).sin_cos()
    };
    match (q as i64).rem_euclid(4) {
        0 => C64::new(c, s),
        1 => C64::new(-s, c),
        2 => C64::new(-c, -s),
        _ => C64::new(s, -c),
    }
}

/// Fiber measure space: the real line or the circle `[0,1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FiberDomain {
    Line,
    Circle,
}

/// Measure `r^w dr` on the half line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialWeight(pub f64);

impl RadialWeight {
    pub const LEBESGUE: RadialWeight = RadialWeight(0.0);
    /// `ds/s`
    pub const HAAR_L: RadialWeight = RadialWeight(-1.0);
    /// `dr/r²`
    pub const HAAR_Q: RadialWeight = RadialWeight(-2.0);

    /// Codomain weight `r^{(1-α)/α} dr` of the case-I kernel operator.
    pub fn case_one(alpha: f64) -> Self {
        RadialWeight((1.0 - alpha) / alpha)
    }

    pub fn exponent(self) -> f64 {
        self.0
    }

    pub fn density(self, r: f64) -> f64 {
        if self.0 == 0.0 {
            1.0
        } else {
            r.powf(self.0)
        }
    }
}

/// Radial part `r^p · 1_(lo,hi](r) · e^{2πi(lin·r + quad·r²/2)}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialFactor {
    pub power: f64,
    pub lo: f64,
    pub hi: f64,
    pub lin: f64,
    pub quad: f64,
}

impl RadialFactor {
    pub fn indicator(lo: f64, hi: f64) -> Self {
        RadialFactor {
            power: 0.0,
            lo,
            hi,
            lin: 0.0,
            quad: 0.0,
        }
    }

    pub fn with_lin(mut self, lin: f64) -> Self {
        self.lin = lin;
        self
    }

    pub fn with_quad(mut self, quad: f64) -> Self {
        self.quad = quad;
        self
    }

    pub fn with_power(mut self, power: f64) -> Self {
        self.power = power;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let finite = self.power.is_finite()
            && self.lo.is_finite()
            && self.lin.is_finite()
            && self.quad.is_finite()
            && !self.hi.is_nan();
        if !finite {
            return Err(Error::InvalidFunction(format!("non-finite radial field in {self:?}")));
        }
        if self.lo < 0.0 || self.lo >= self.hi {
            return Err(Error::InvalidFunction(format!(
                "radial interval ({}, {}] must satisfy 0 <= a < b",
                self.lo, self.hi
            )));
        }
        if self.hi.is_infinite() && self.power >= -0.5 {
            return Err(Error::InvalidFunction(format!(
                "unbounded radial interval needs power < -1/2, got {}",
                self.power
            )));
        }
        Ok(())
    }

    #[inline]
    pub fn contains(&self, r: f64) -> bool {
        r > self.lo && r <= self.hi
    }

    #[inline]
    pub fn eval(&self, r: f64) -> C64 {
        if !self.contains(r) {
            return C64::new(0.0, 0.0);
        }
        let amp = if self.power == 0.0 { 1.0 } else { r.powf(self.power) };
        let turns = self.lin * r + 0.5 * self.quad * r * r;
        if turns == 0.0 {
            C64::new(amp, 0.0)
        } else {
            cis_turns(turns) * amp
        }
    }

    pub fn conj(&self) -> Self {
        RadialFactor {
            lin: -self.lin,
            quad: -self.quad,
            ..*self
        }
    }

    /// Highest local oscillation frequency (cycles per unit r) on the support.
    pub fn max_frequency(&self) -> f64 {
        let top = if self.hi.is_finite() { self.hi } else { self.lo.max(1.0) };
        self.lin.abs() + self.quad.abs() * top
    }
}

/// Fiber part of an atom.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FiberFactor {
    /// Radial-only atom (function on the half line).
    Trivial,
    /// `1_(lo,hi](y) e^{2πi freq y}` on the line.
    Line { lo: f64, hi: f64, freq: f64 },
    /// `e^{2πi freq y}` on the circle `[0,1)`.
    Circle { freq: i64 },
}

impl FiberFactor {
    /// `e_{k,l}(y) = 1_(k,k+1](y) e^{2πi l y}`.
    pub fn cell(k: i64, l: i64) -> Self {
        FiberFactor::Line {
            lo: k as f64,
            hi: (k + 1) as f64,
            freq: l as f64,
        }
    }

    pub fn domain(&self) -> Option<FiberDomain> {
        match self {
            FiberFactor::Trivial => None,
            FiberFactor::Line { .. } => Some(FiberDomain::Line),
            FiberFactor::Circle { .. } => Some(FiberDomain::Circle),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            FiberFactor::Line { lo, hi, freq } => {
                if !(lo.is_finite() && hi.is_finite() && freq.is_finite()) || lo >= hi {
                    return Err(Error::InvalidFunction(format!(
                        "fiber interval ({lo}, {hi}] with freq {freq} is invalid"
                    )));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    #[inline]
    pub fn eval(&self, y: f64) -> C64 {
        match *self {
            FiberFactor::Trivial => C64::new(1.0, 0.0),
            FiberFactor::Line { lo, hi, freq } => {
                if y > lo && y <= hi {
                    cis_turns(freq * y)
                } else {
                    C64::new(0.0, 0.0)
                }
            }
            FiberFactor::Circle { freq } => cis_turns(freq as f64 * y.rem_euclid(1.0)),
        }
    }

    pub fn conj(&self) -> Self {
        match *self {
            FiberFactor::Trivial => FiberFactor::Trivial,
            FiberFactor::Line { lo, hi, freq } => FiberFactor::Line { lo, hi, freq: -freq },
            FiberFactor::Circle { freq } => FiberFactor::Circle { freq: -freq },
        }
    }

    pub fn frequency(&self) -> f64 {
        match *self {
            FiberFactor::Trivial => 0.0,
            FiberFactor::Line { freq, .. } => freq.abs(),
            FiberFactor::Circle { freq } => freq.unsigned_abs() as f64,
        }
    }

    /// `∫ self · conj(other)` over the fiber measure, in closed form.
    pub fn inner(&self, other: &FiberFactor) -> Result<C64> {
        match (*self, *other) {
            (FiberFactor::Trivial, FiberFactor::Trivial) => Ok(C64::new(1.0, 0.0)),
            (FiberFactor::Circle { freq: a }, FiberFactor::Circle { freq: b }) => {
                Ok(if a == b { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) })
            }
            (
                FiberFactor::Line { lo: a0, hi: a1, freq: fa },
                FiberFactor::Line { lo: b0, hi: b1, freq: fb },
            ) => {
                let lo = a0.max(b0);
                let hi = a1.min(b1);
                if lo >= hi {
                    return Ok(C64::new(0.0, 0.0));
                }
                let df = fa - fb;
                if df == 0.0 {
                    return Ok(C64::new(hi - lo, 0.0));
                }
                let num = cis_turns(df * hi) - cis_turns(df * lo);
                Ok(num / C64::new(0.0, 2.0 * std::f64::consts::PI * df))
            }
            (a, b) => Err(Error::CaseMismatch(format!(
                "fiber factors live on different domains: {:?} vs {:?}",
                a.domain(),
                b.domain()
            ))),
        }
    }
}

/// One closed-form term.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TensorAtom {
    pub coeff: C64,
    pub radial: RadialFactor,
    pub fiber: FiberFactor,
}

/// Transformations of a single atom.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AtomAction {
    Identity,
    /// `f ↦ s^{1/2} f(s·r, y)`
    Dilate(f64),
    /// multiply by `e^{2πi u r}`
    LinPhase(f64),
    /// multiply by `e^{πi v r²}`
    QuadPhase(f64),
    /// multiply by `r^q`
    MulPower(f64),
    /// `f ↦ (2r)^{1/2} f(r², y)`
    SquareLift,
    /// `f ↦ (2 r^{1/2})^{-1/2} f(r^{1/2}, y)`
    SqrtLift,
    /// `f ↦ f(r, y + c·r)`; no atom represents the result.
    FiberShear(f64),
}

impl TensorAtom {
    pub fn new(coeff: C64, radial: RadialFactor, fiber: FiberFactor) -> Self {
        TensorAtom { coeff, radial, fiber }
    }

    pub fn radial_only(coeff: C64, radial: RadialFactor) -> Self {
        TensorAtom {
            coeff,
            radial,
            fiber: FiberFactor::Trivial,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.coeff.re.is_finite() && self.coeff.im.is_finite()) {
            return Err(Error::InvalidFunction("non-finite coefficient".into()));
        }
        self.radial.validate()?;
        self.fiber.validate()
    }

    pub fn fiber_domain(&self) -> Option<FiberDomain> {
        self.fiber.domain()
    }

    #[inline]
    pub fn eval(&self, r: f64, y: f64) -> C64 {
        if !self.radial.contains(r) {
            return C64::new(0.0, 0.0);
        }
        let f = self.fiber.eval(y);
        if f == C64::new(0.0, 0.0) {
            return f;
        }
        self.coeff * self.radial.eval(r) * f
    }

    pub fn conj(&self) -> Self {
        TensorAtom {
            coeff: self.coeff.conj(),
            radial: self.radial.conj(),
            fiber: self.fiber.conj(),
        }
    }

    pub fn scaled(&self, c: C64) -> Self {
        TensorAtom {
            coeff: self.coeff * c,
            ..*self
        }
    }

    pub fn transform(&self, action: AtomAction) -> Result<TensorAtom> {
        let mut out = *self;
        let rad = &mut out.radial;
        match action {
            AtomAction::Identity => {}
            AtomAction::Dilate(s) => {
                if !(s > 0.0 && s.is_finite()) {
                    return Err(Error::UnsupportedAction(format!("dilation by {s}")));
                }
                out.coeff *= s.powf(rad.power + 0.5);
                rad.lo /= s;
                rad.hi /= s;
                rad.lin *= s;
                rad.quad *= s * s;
            }
            AtomAction::LinPhase(u) => rad.lin += u,
            AtomAction::QuadPhase(v) => rad.quad += v,
            AtomAction::MulPower(q) => rad.power += q,
            AtomAction::SquareLift => {
                if rad.quad != 0.0 {
                    return Err(Error::UnsupportedAction(
                        "quadratic phase becomes quartic under r ↦ r²".into(),
                    ));
                }
                out.coeff *= std::f64::consts::SQRT_2;
                rad.power = 2.0 * rad.power + 0.5;
                rad.lo = rad.lo.sqrt();
                rad.hi = rad.hi.sqrt();
                rad.quad = 2.0 * rad.lin;
                rad.lin = 0.0;
            }
            AtomAction::SqrtLift => {
                if rad.lin != 0.0 {
                    return Err(Error::UnsupportedAction(
                        "linear phase becomes e^{2πi u ξ^{1/2}} under ξ ↦ ξ^{1/2}".into(),
                    ));
                }
                out.coeff *= std::f64::consts::FRAC_1_SQRT_2;
                rad.power = 0.5 * rad.power - 0.25;
                rad.lo *= rad.lo;
                rad.hi *= rad.hi;
                rad.lin = 0.5 * rad.quad;
                rad.quad = 0.0;
            }
            AtomAction::FiberShear(c) => {
                return Err(Error::UnsupportedAction(format!("fiber shear y ↦ y + {c}·r")));
            }
        }
        Ok(out)
    }
}

/// Finite linear combination of atoms.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct AtomSum {
    pub atoms: Vec<TensorAtom>,
}

impl AtomSum {
    pub fn new(atoms: Vec<TensorAtom>) -> Self {
        AtomSum { atoms }
    }

    pub fn zero() -> Self {
        AtomSum { atoms: Vec::new() }
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn push(&mut self, atom: TensorAtom) {
        self.atoms.push(atom);
    }

    pub fn validate(&self) -> Result<()> {
        let mut domain = None;
        for a in &self.atoms {
            a.validate()?;
            let d = a.fiber_domain();
            match domain {
                None => domain = Some(d),
                Some(prev) if prev != d => {
                    return Err(Error::InvalidFunction("atoms mix fiber domains".into()))
                }
                _ => {}
            }
        }
        Ok(())
    }

    pub fn fiber_domain(&self) -> Option<FiberDomain> {
        self.atoms.first().and_then(|a| a.fiber_domain())
    }

    pub fn eval(&self, r: f64, y: f64) -> C64 {
        self.atoms.iter().map(|a| a.eval(r, y)).sum()
    }

    pub fn scaled(&self, c: C64) -> AtomSum {
        AtomSum::new(self.atoms.iter().map(|a| a.scaled(c)).collect())
    }

    pub fn extend(&mut self, other: &AtomSum) {
        self.atoms.extend_from_slice(&other.atoms);
    }

    pub fn transform(&self, action: AtomAction) -> Result<AtomSum> {
        self.atoms
            .iter()
            .map(|a| a.transform(action))
            .collect::<Result<Vec<_>>>()
            .map(AtomSum::new)
    }
}

impl FromIterator<TensorAtom> for AtomSum {
    fn from_iter<I: IntoIterator<Item = TensorAtom>>(iter: I) -> Self {
        AtomSum::new(iter.into_iter().collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_cell_atom(lo: f64, hi: f64) -> TensorAtom {
        TensorAtom::new(
            C64::new(1.0, 0.0),
            RadialFactor::indicator(lo, hi),
            FiberFactor::cell(0, 0),
        )
    }

    #[test]
    fn cis_turns_exact_on_quarters() {
        assert_eq!(cis_turns(0.0), C64::new(1.0, 0.0));
        assert_eq!(cis_turns(0.5), C64::new(-1.0, 0.0));
        assert_eq!(cis_turns(0.25), C64::new(0.0, 1.0));
        assert_eq!(cis_turns(-3.75), C64::new(0.0, 1.0));
        assert_eq!(cis_turns(12.0), C64::new(1.0, 0.0));
        let z = cis_turns(0.1);
        let theta = 0.2 * std::f64::consts::PI;
        assert!((z - C64::new(theta.cos(), theta.sin())).norm() < 1e-16);
    }

    #[test]
    fn eval_indicator_and_phase() {
        let a = unit_cell_atom(1.0, 2.0);
        assert_eq!(a.eval(1.5, 0.5), C64::new(1.0, 0.0));
        assert_eq!(a.eval(2.5, 0.5), C64::new(0.0, 0.0));
        // half-open: left excluded, right included
        assert_eq!(a.eval(1.0, 0.5), C64::new(0.0, 0.0));
        assert_eq!(a.eval(2.0, 1.0), C64::new(1.0, 0.0));
        let phased = TensorAtom::new(
            C64::new(1.0, 0.0),
            RadialFactor::indicator(1.0, 3.0).with_lin(0.25),
            FiberFactor::cell(0, 0),
        );
        assert_eq!(phased.eval(2.0, 0.5), C64::new(-1.0, 0.0));
    }

    #[test]
    fn dilation_matches_substitution() {
        let a = TensorAtom::radial_only(C64::new(1.0, 0.0), RadialFactor::indicator(1.0, 2.0));
        let d = a.transform(AtomAction::Dilate(4.0)).unwrap();
        assert_eq!(d.coeff, C64::new(2.0, 0.0));
        assert_eq!((d.radial.lo, d.radial.hi), (0.25, 0.5));
        assert_eq!(a.transform(AtomAction::Identity).unwrap(), a);
    }

    #[test]
    fn dilation_round_trip() {
        let a = TensorAtom::new(
            C64::new(0.3, -0.7),
            RadialFactor::indicator(0.3, 1.7).with_lin(2.5).with_quad(-1.25).with_power(1.0),
            FiberFactor::cell(2, -1),
        );
        for s in [0.125, 0.3, 1.0, 3.7, 64.0] {
            let b = a
                .transform(AtomAction::Dilate(s))
                .unwrap()
                .transform(AtomAction::Dilate(1.0 / s))
                .unwrap();
            assert!((b.coeff - a.coeff).norm() <= 1e-15);
            assert!((b.radial.lo - a.radial.lo).abs() <= 1e-15);
            assert!((b.radial.hi - a.radial.hi).abs() <= 1e-15);
            assert!((b.radial.lin - a.radial.lin).abs() <= 1e-15 * a.radial.lin.abs());
            assert!((b.radial.quad - a.radial.quad).abs() <= 1e-15 * a.radial.quad.abs());
        }
    }

    #[test]
    fn square_lift_rejects_quad_phase() {
        let a = TensorAtom::radial_only(
            C64::new(1.0, 0.0),
            RadialFactor::indicator(1.0, 2.0).with_quad(1.0),
        );
        assert!(matches!(
            a.transform(AtomAction::SquareLift),
            Err(Error::UnsupportedAction(_))
        ));
        let b = TensorAtom::radial_only(
            C64::new(1.0, 0.0),
            RadialFactor::indicator(1.0, 2.0).with_lin(1.0),
        );
        assert!(matches!(
            b.transform(AtomAction::SqrtLift),
            Err(Error::UnsupportedAction(_))
        ));
        assert!(matches!(
            b.transform(AtomAction::FiberShear(1.0)),
            Err(Error::UnsupportedAction(_))
        ));
    }

    #[test]
    fn circle_fiber_wraps() {
        let f = FiberFactor::Circle { freq: 3 };
        assert!((f.eval(0.2) - f.eval(1.2)).norm() < 1e-14);
        assert!((f.eval(-0.8) - f.eval(0.2)).norm() < 1e-14);
    }

    #[test]
    fn validation_rules() {
        assert!(RadialFactor::indicator(1.0, 1.0).validate().is_err());
        assert!(RadialFactor::indicator(-1.0, 1.0).validate().is_err());
        assert!(RadialFactor::indicator(1.0, f64::INFINITY).validate().is_err());
        assert!(RadialFactor::indicator(1.0, f64::INFINITY)
            .with_power(-1.0)
            .validate()
            .is_ok());
        let mixed = AtomSum::new(vec![
            unit_cell_atom(0.0, 1.0),
            TensorAtom::new(
                C64::new(1.0, 0.0),
                RadialFactor::indicator(0.0, 1.0),
                FiberFactor::Circle { freq: 0 },
            ),
        ]);
        assert!(mixed.validate().is_err());
    }
}

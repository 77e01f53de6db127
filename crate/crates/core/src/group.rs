//! The six parameter groups, their actions, Haar densities and lattices.

use std::f64::consts::{LN_2, PI};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::function::{cis_turns, AtomAction, AtomSum, Chart, PointEvaluator, SupportBox, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CaseKind {
    L,
    Q,
    I,
    II,
    III,
    IV,
}

impl CaseKind {
    pub const ALL: [CaseKind; 6] = [CaseKind::L, CaseKind::Q, CaseKind::I, CaseKind::II, CaseKind::III, CaseKind::IV];

    pub fn as_str(self) -> &'static str {
        match self {
            CaseKind::L => "L",
            CaseKind::Q => "Q",
            CaseKind::I => "I",
            CaseKind::II => "II",
            CaseKind::III => "III",
            CaseKind::IV => "IV",
        }
    }

    /// Cases acting on the plane (as opposed to the two one-dimensional wavelet actions).
    pub fn is_planar(self) -> bool {
        matches!(self, CaseKind::I | CaseKind::II | CaseKind::III | CaseKind::IV)
    }
}

impl fmt::Display for CaseKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CaseKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        CaseKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::InvalidCase(format!("unknown case tag {s:?} (expected one of L, Q, I, II, III, IV)")))
    }
}

/// A case together with its parameter α where one is required.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CaseTag {
    pub kind: CaseKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
}

fn fmt_alpha(a: f64) -> String {
    if a == 0.0 {
        "0".into()
    } else {
        format!("{a}")
    }
}

impl CaseTag {
    pub fn new(kind: CaseKind, alpha: Option<f64>) -> Result<Self> {
        match kind {
            CaseKind::L | CaseKind::Q | CaseKind::II => {
                if let Some(a) = alpha {
                    return Err(Error::InvalidCase(format!("case {kind} takes no alpha, got alpha={a}")));
                }
            }
            CaseKind::I => {
                let a = alpha.ok_or_else(|| Error::InvalidCase("case I requires alpha in [-1,0)".into()))?;
                if !(a >= -1.0 && a < 0.0) {
                    return Err(Error::InvalidCase(format!("alpha={} invalid for case I", fmt_alpha(a))));
                }
            }
            CaseKind::III | CaseKind::IV => {
                let a = alpha.ok_or_else(|| Error::InvalidCase(format!("case {kind} requires alpha >= 0")))?;
                if !(a >= 0.0 && a.is_finite()) {
                    return Err(Error::InvalidCase(format!("alpha={} invalid for case {kind}", fmt_alpha(a))));
                }
            }
        }
        Ok(CaseTag { kind, alpha })
    }

    pub fn l() -> Self {
        CaseTag { kind: CaseKind::L, alpha: None }
    }

    pub fn q() -> Self {
        CaseTag { kind: CaseKind::Q, alpha: None }
    }

    pub fn one(alpha: f64) -> Result<Self> {
        CaseTag::new(CaseKind::I, Some(alpha))
    }

    pub fn two() -> Self {
        CaseTag { kind: CaseKind::II, alpha: None }
    }

    pub fn three(alpha: f64) -> Result<Self> {
        CaseTag::new(CaseKind::III, Some(alpha))
    }

    pub fn four(alpha: f64) -> Result<Self> {
        CaseTag::new(CaseKind::IV, Some(alpha))
    }

    /// α, or 0 for cases without one.
    pub fn alpha_or_zero(&self) -> f64 {
        self.alpha.unwrap_or(0.0)
    }

    pub fn label(&self) -> String {
        match self.alpha {
            Some(a) => format!("{}(alpha={})", self.kind, fmt_alpha(a)),
            None => self.kind.to_string(),
        }
    }

    pub fn identity(&self) -> GroupElement {
        match self.kind {
            CaseKind::L | CaseKind::Q => GroupElement::new(0.0, 1.0),
            _ => GroupElement::new(0.0, 0.0),
        }
    }

    fn check(&self, g: &GroupElement) -> Result<()> {
        if !(g.u.is_finite() && g.t.is_finite()) {
            return Err(Error::CaseMismatch(format!("non-finite element ({}, {})", g.u, g.t)));
        }
        if matches!(self.kind, CaseKind::L | CaseKind::Q) && g.t <= 0.0 {
            return Err(Error::CaseMismatch(format!(
                "element ({}, {}) needs a positive dilation for case {}",
                g.u, g.t, self.kind
            )));
        }
        Ok(())
    }
}

/// `(u, t)`; for L and Q, `t` is the multiplicative dilation `s` or `t > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroupElement {
    pub u: f64,
    pub t: f64,
}

impl GroupElement {
    pub fn new(u: f64, t: f64) -> Self {
        GroupElement { u, t }
    }
}

/// `g2 ∘ g1` under the case's group law.
pub fn compose(case: &CaseTag, g2: &GroupElement, g1: &GroupElement) -> Result<GroupElement> {
    case.check(g2)?;
    case.check(g1)?;
    let (u2, t2, u1, t1) = (g2.u, g2.t, g1.u, g1.t);
    Ok(match case.kind {
        CaseKind::L => GroupElement::new(t2 * u1 + u2, t2 * t1),
        CaseKind::Q => GroupElement::new(t2 * t2 * u1 + u2, t2 * t1),
        CaseKind::I => GroupElement::new(u2 + (-2.0 * case.alpha_or_zero() * t2).exp() * u1, t2 + t1),
        _ => GroupElement::new(u2 + (-2.0 * t2).exp() * u1, t2 + t1),
    })
}

pub fn inverse(case: &CaseTag, g: &GroupElement) -> Result<GroupElement> {
    case.check(g)?;
    Ok(match case.kind {
        CaseKind::L => GroupElement::new(-g.u / g.t, 1.0 / g.t),
        CaseKind::Q => GroupElement::new(-g.u / (g.t * g.t), 1.0 / g.t),
        CaseKind::I => GroupElement::new(-(2.0 * case.alpha_or_zero() * g.t).exp() * g.u, -g.t),
        _ => GroupElement::new(-(2.0 * g.t).exp() * g.u, -g.t),
    })
}

/// Density of the left Haar measure with respect to `du dt`.
pub fn haar_density(case: &CaseTag, g: &GroupElement) -> Result<f64> {
    case.check(g)?;
    Ok(match case.kind {
        CaseKind::L => 1.0 / (g.t * g.t),
        CaseKind::Q => 1.0 / (g.t * g.t * g.t),
        CaseKind::I => {
            let a = case.alpha_or_zero();
            -a * (2.0 * a * g.t).exp()
        }
        _ => (2.0 * g.t).exp(),
    })
}

/// `2^{k/2}`, exact for even `k`.
pub fn half_power_of_two(k: i64) -> f64 {
    let base = 2f64.powi((k.div_euclid(2)) as i32);
    if k.rem_euclid(2) == 0 {
        base
    } else {
        base * std::f64::consts::SQRT_2
    }
}

pub fn lattice_element(case: &CaseTag, k: i64, m: i64) -> GroupElement {
    let two_k = 2f64.powi(k as i32);
    match case.kind {
        CaseKind::L => GroupElement::new(two_k * m as f64, two_k),
        CaseKind::Q => GroupElement::new(2.0 * two_k * m as f64, half_power_of_two(k)),
        CaseKind::I => GroupElement::new(2.0 * two_k * m as f64, -LN_2 * k as f64 / (2.0 * case.alpha_or_zero())),
        _ => GroupElement::new(2.0 * two_k * m as f64, -LN_2 * k as f64 / 2.0),
    }
}

/// Lattice of a case, indexed by `(k, m) ∈ ℤ²`.
#[derive(Debug, Clone, Copy)]
pub struct Lattice {
    pub case: CaseTag,
}

impl Lattice {
    pub fn new(case: CaseTag) -> Self {
        Lattice { case }
    }

    pub fn element(&self, k: i64, m: i64) -> GroupElement {
        lattice_element(&self.case, k, m)
    }
}

/// Parameter map into the quadratic-phase group: `(u, s) ↦ (2u, √s)` for L,
/// `(u, t) ↦ (u, e^{-αt})` for I and `(u, t) ↦ (u, e^{-t})` for II–IV.
pub fn to_q_parameters(case: &CaseTag, g: &GroupElement) -> Result<GroupElement> {
    case.check(g)?;
    Ok(match case.kind {
        CaseKind::L => GroupElement::new(2.0 * g.u, g.t.sqrt()),
        CaseKind::Q => *g,
        CaseKind::I => GroupElement::new(g.u, (-case.alpha_or_zero() * g.t).exp()),
        _ => GroupElement::new(g.u, (-g.t).exp()),
    })
}

/// `R_θ` rotating by `+θ` turns.
pub fn rotation(theta: f64) -> [[f64; 2]; 2] {
    let (s, c) = (2.0 * PI * theta).sin_cos();
    [[c, -s], [s, c]]
}

/// Hyperbolic rotation `A_θ`.
pub fn boost(theta: f64) -> [[f64; 2]; 2] {
    let (c, s) = (theta.cosh(), theta.sinh());
    [[c, s], [s, c]]
}

#[inline]
fn apply(m: &[[f64; 2]; 2], x: (f64, f64)) -> (f64, f64) {
    (m[0][0] * x.0 + m[0][1] * x.1, m[1][0] * x.0 + m[1][1] * x.1)
}

fn invert(m: &[[f64; 2]; 2]) -> [[f64; 2]; 2] {
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    [[m[1][1] / det, -m[0][1] / det], [-m[1][0] / det, m[0][0] / det]]
}

fn scale(m: [[f64; 2]; 2], c: f64) -> [[f64; 2]; 2] {
    [[m[0][0] * c, m[0][1] * c], [m[1][0] * c, m[1][1] * c]]
}

/// `μ_g` on a finite atom sum (cases L and Q only).
pub fn act_atoms(case: &CaseTag, g: &GroupElement, f: &AtomSum) -> Result<AtomSum> {
    case.check(g)?;
    let phase = match case.kind {
        CaseKind::L => AtomAction::LinPhase(g.u),
        CaseKind::Q => AtomAction::QuadPhase(g.u),
        k => {
            return Err(Error::CaseMismatch(format!(
                "case {k} acts on planar evaluators, not on atom sums"
            )))
        }
    };
    f.transform(AtomAction::Dilate(g.t))?.transform(phase)
}

/// `μ_g` on a pointwise evaluator.
///
/// L and Q act on the first (radial) coordinate of any radial-first chart.
/// I and II act on Cartesian functions on `x₁ > 0` (chart [`Chart::HalfPlane`]),
/// III on [`Chart::Plane`] and IV on [`Chart::Cone`].
pub fn act_evaluator(case: &CaseTag, g: &GroupElement, f: &PointEvaluator) -> Result<PointEvaluator> {
    case.check(g)?;
    let src = f.clone();
    let (fb, sb) = f.breaks();
    let [f1, f2] = f.freq();
    let sup = f.support();
    match case.kind {
        CaseKind::L | CaseKind::Q => {
            if !f.chart().radial_first() {
                return Err(Error::CaseMismatch(format!(
                    "case {} needs a radial chart, got {:?}",
                    case.kind,
                    f.chart()
                )));
            }
            let (u, s) = (g.u, g.t);
            let quad = case.kind == CaseKind::Q;
            let amp = s.sqrt();
            let support = SupportBox::new((sup.first.0 / s, sup.first.1 / s), sup.second);
            let freq1 = if quad { f1 * s + u.abs() * support.first.1 } else { f1 * s + u.abs() };
            let rule = move |r: f64, y: f64| {
                let inner = src.eval(s * r, y);
                if inner == C64::new(0.0, 0.0) {
                    return inner;
                }
                let turns = if quad { 0.5 * u * r * r } else { u * r };
                inner * cis_turns(turns) * amp
            };
            let range_src = f.clone();
            Ok(PointEvaluator::new(f.chart(), support, rule)
                .with_breaks(fb.iter().map(|b| b / s).collect(), sb.to_vec())
                .with_freq(freq1, f2)
                .with_fiber_range(move |r| range_src.fiber_range(s * r)))
        }
        CaseKind::III | CaseKind::IV if matches!(f.chart(), Chart::Polar | Chart::Hyperbolic) => {
            act_polar(case, g, f)
        }
        _ => {
            let expected = match case.kind {
                CaseKind::I | CaseKind::II => Chart::HalfPlane,
                CaseKind::III => Chart::Plane,
                _ => Chart::Cone,
            };
            if f.chart() != expected {
                return Err(Error::CaseMismatch(format!(
                    "case {} acts on {:?} functions, got {:?}",
                    case.kind,
                    expected,
                    f.chart()
                )));
            }
            let a = case.alpha_or_zero();
            let t = g.t;
            let u = g.u;
            // forward map z = P x, and the amplitude
            let (p, amp): ([[f64; 2]; 2], f64) = match case.kind {
                CaseKind::I => ([[(-a * t).exp(), 0.0], [0.0, (-(a + 1.0) * t).exp()]], (-(2.0 * a + 1.0) * t / 2.0).exp()),
                CaseKind::II => (scale([[1.0, 0.0], [-t, 1.0]], (-t).exp()), (-t).exp()),
                CaseKind::III => (scale(rotation(-a * t), (-t).exp()), (-t).exp()),
                _ => (scale(boost(-a * t), (-t).exp()), (-t).exp()),
            };
            let m = invert(&p);
            // support box of the image: hull of the mapped corners
            let corners = [
                (sup.first.0, sup.second.0),
                (sup.first.0, sup.second.1),
                (sup.first.1, sup.second.0),
                (sup.first.1, sup.second.1),
            ];
            let mut lo = (f64::INFINITY, f64::INFINITY);
            let mut hi = (f64::NEG_INFINITY, f64::NEG_INFINITY);
            for c in corners {
                let x = apply(&m, c);
                lo = (lo.0.min(x.0), lo.1.min(x.1));
                hi = (hi.0.max(x.0), hi.1.max(x.1));
            }
            if case.kind == CaseKind::I || case.kind == CaseKind::II {
                lo.0 = lo.0.max(0.0);
            }
            let support = SupportBox::new((lo.0, hi.0), (lo.1, hi.1));
            let xmax = lo.0.abs().max(hi.0.abs());
            let ymax = lo.1.abs().max(hi.1.abs());
            let freq1 = p[0][0].abs() * f1 + p[1][0].abs() * f2 + u.abs() * xmax;
            let freq2 = p[0][1].abs() * f1 + p[1][1].abs() * f2
                + if matches!(case.kind, CaseKind::III | CaseKind::IV) { u.abs() * ymax } else { 0.0 };
            let kind = case.kind;
            let rule = move |x1: f64, x2: f64| {
                if kind == CaseKind::IV && x1 <= x2.abs() {
                    return C64::new(0.0, 0.0);
                }
                let z = apply(&p, (x1, x2));
                let inner = src.eval(z.0, z.1);
                if inner == C64::new(0.0, 0.0) {
                    return inner;
                }
                let form = match kind {
                    CaseKind::I | CaseKind::II => x1 * x1,
                    CaseKind::III => x1 * x1 + x2 * x2,
                    _ => (x1 - x2) * (x1 + x2),
                };
                inner * cis_turns(0.5 * u * form) * amp
            };
            let ev = PointEvaluator::new(f.chart(), support, rule).with_freq(freq1, freq2);
            let range_src = f.clone();
            Ok(match kind {
                CaseKind::I => {
                    let (p00, p11) = (p[0][0], p[1][1]);
                    ev.with_breaks(fb.iter().map(|b| b * m[0][0]).collect(), sb.iter().map(|b| b * m[1][1]).collect())
                        .with_fiber_range(move |x1| {
                            let (c, d) = range_src.fiber_range(p00 * x1);
                            (c / p11, d / p11)
                        })
                }
                CaseKind::II => {
                    let e = t.exp();
                    ev.with_breaks(fb.iter().map(|b| b * e).collect(), Vec::new()).with_fiber_range(move |x1| {
                        let (c, d) = range_src.fiber_range(x1 / e);
                        (e * c + t * x1, e * d + t * x1)
                    })
                }
                _ => ev,
            })
        }
    }
}

/// Cases III and IV on their polar-type charts:
/// `(r, θ) ↦ e^{-t} f(e^{-t} r, θ - αt) e^{πi u r²}`.
fn act_polar(case: &CaseTag, g: &GroupElement, f: &PointEvaluator) -> Result<PointEvaluator> {
    let want = if case.kind == CaseKind::III { Chart::Polar } else { Chart::Hyperbolic };
    if f.chart() != want {
        return Err(Error::CaseMismatch(format!("case {} acts on {:?} functions, got {:?}", case.kind, want, f.chart())));
    }
    let (u, t) = (g.u, g.t);
    let shift = case.alpha_or_zero() * t;
    let (e, amp) = (t.exp(), (-t).exp());
    let sup = f.support();
    let second = if want == Chart::Polar { sup.second } else { (sup.second.0 + shift, sup.second.1 + shift) };
    let support = SupportBox::new((sup.first.0 * e, sup.first.1 * e), second);
    let (fb, _) = f.breaks();
    let [f1, f2] = f.freq();
    let src = f.clone();
    let range_src = f.clone();
    let rule = move |r: f64, th: f64| {
        let inner = src.eval(r / e, th - shift);
        if inner == C64::new(0.0, 0.0) {
            return inner;
        }
        inner * cis_turns(0.5 * u * r * r) * amp
    };
    Ok(PointEvaluator::new(want, support, rule)
        .with_breaks(fb.iter().map(|b| b * e).collect(), Vec::new())
        .with_freq(f1 * amp + u.abs() * support.first.1, f2)
        .with_fiber_range(move |r| {
            let (c, d) = range_src.fiber_range(r / e);
            (c + shift, d + shift)
        }))
}

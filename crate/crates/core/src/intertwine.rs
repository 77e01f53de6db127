//! The unitary maps `U` and `U^𝒥`, the straightening charts, and the
//! polar / hyperbolic-polar transfers.

use std::f64::consts::{PI, SQRT_2};

use crate::error::{Error, Result};
use crate::function::{AtomAction, AtomSum, Chart, PointEvaluator, SupportBox, C64};
use crate::group::{CaseKind, CaseTag};

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// `Uf(r,y) = (2r)^{1/2} f(r², y)`.
///
/// Linear phases `e^{2πiuξ}` become quadratic phases `e^{πi(2u)r²}`; atoms
/// that already carry a quadratic phase would become quartic and are rejected.
pub fn apply_u(f: &AtomSum) -> Result<AtomSum> {
    f.transform(AtomAction::SquareLift)
}

/// `U⁻¹h(ξ,y) = (2ξ^{1/2})^{-1/2} h(ξ^{1/2}, y)`; rejects atoms with a linear phase.
pub fn apply_u_inv(f: &AtomSum) -> Result<AtomSum> {
    f.transform(AtomAction::SqrtLift)
}

/// `U` on an arbitrary radial-first evaluator.
pub fn apply_u_evaluator(f: &PointEvaluator) -> Result<PointEvaluator> {
    require_radial(f)?;
    let src = f.clone();
    let sup = f.support();
    let (rb, yb) = f.breaks();
    let [f1, f2] = f.freq();
    let hi = sup.first.1.sqrt();
    Ok(PointEvaluator::new(f.chart(), SupportBox::new((sup.first.0.sqrt(), hi), sup.second), move |r, y| {
        if r <= 0.0 {
            return ZERO;
        }
        let v = src.eval(r * r, y);
        if v == ZERO {
            v
        } else {
            v * (2.0 * r).sqrt()
        }
    })
    .with_breaks(rb.iter().map(|b| b.sqrt()).collect(), yb.to_vec())
    .with_freq(2.0 * f1 * hi, f2))
}

/// `U⁻¹` on an arbitrary radial-first evaluator.
pub fn apply_u_inv_evaluator(f: &PointEvaluator) -> Result<PointEvaluator> {
    require_radial(f)?;
    let src = f.clone();
    let sup = f.support();
    let (rb, yb) = f.breaks();
    let [f1, f2] = f.freq();
    let lo = sup.first.0 * sup.first.0;
    Ok(PointEvaluator::new(
        f.chart(),
        SupportBox::new((lo, sup.first.1 * sup.first.1), sup.second),
        move |xi, y| {
            if xi <= 0.0 {
                return ZERO;
            }
            let r = xi.sqrt();
            let v = src.eval(r, y);
            if v == ZERO {
                v
            } else {
                v / (2.0 * r).sqrt()
            }
        },
    )
    .with_breaks(rb.iter().map(|b| b * b).collect(), yb.to_vec())
    .with_freq(f1 / (2.0 * lo.sqrt().max(1e-3)), f2))
}

fn require_radial(f: &PointEvaluator) -> Result<()> {
    if !f.chart().radial_first() {
        return Err(Error::CaseMismatch(format!("radial chart required, got {:?}", f.chart())));
    }
    Ok(())
}

/// The straightening chart of a planar case, mapping the case's native
/// coordinates (Cartesian for I, II; polar for III; hyperbolic polar for IV)
/// to coordinates in which the dilation flow acts on the first entry only.
#[derive(Debug, Clone, Copy)]
pub struct CoordChart {
    pub case: CaseTag,
}

impl CoordChart {
    pub fn new(case: CaseTag) -> Result<Self> {
        if !case.kind.is_planar() {
            return Err(Error::CaseMismatch(format!("case {} has no straightening chart", case.kind)));
        }
        Ok(CoordChart { case })
    }

    fn alpha(&self) -> f64 {
        self.case.alpha_or_zero()
    }

    /// `(α+1)/α` for case I.
    pub fn beta(&self) -> f64 {
        let a = self.alpha();
        (a + 1.0) / a
    }

    fn check(&self, first: f64) -> Result<()> {
        if first > 0.0 && first.is_finite() {
            Ok(())
        } else {
            let name = if matches!(self.case.kind, CaseKind::I | CaseKind::II) { "x1" } else { "r" };
            Err(Error::DomainError(format!("{name}={first} must be positive for case {}", self.case.kind)))
        }
    }

    pub fn forward(&self, p: (f64, f64)) -> Result<(f64, f64)> {
        let (x1, x2) = p;
        self.check(x1)?;
        Ok(match self.case.kind {
            CaseKind::I => (x1, x1.powf(-self.beta()) * x2),
            CaseKind::II => (x1, (x2 - x1 * x1.ln()) / x1),
            CaseKind::III => (x1, (x2 - self.alpha() * x1.ln()).rem_euclid(1.0)),
            _ => (x1, x2 - self.alpha() * x1.ln()),
        })
    }

    pub fn backward(&self, q: (f64, f64)) -> Result<(f64, f64)> {
        let (y1, y2) = q;
        self.check(y1)?;
        Ok(match self.case.kind {
            CaseKind::I => (y1, y1.powf(self.beta()) * y2),
            CaseKind::II => (y1, y1 * y2 + y1 * y1.ln()),
            CaseKind::III => (y1, (y2 + self.alpha() * y1.ln()).rem_euclid(1.0)),
            _ => (y1, y2 + self.alpha() * y1.ln()),
        })
    }

    /// Jacobian determinant of [`CoordChart::backward`] at `q`.
    pub fn jacobian(&self, q: (f64, f64)) -> Result<f64> {
        let y1 = q.0;
        self.check(y1)?;
        Ok(match self.case.kind {
            CaseKind::I => y1.powf(self.beta()),
            CaseKind::II => y1,
            _ => 1.0,
        })
    }

    /// Exponent `e` in the weight `y₁^e` of `U^𝒥` (excluding the `2π` of case III).
    fn weight_exponent(&self) -> f64 {
        match self.case.kind {
            CaseKind::I => self.beta() / 2.0,
            _ => 0.5,
        }
    }

    /// Chart in which the case's native functions live.
    pub fn native_chart(&self) -> Chart {
        match self.case.kind {
            CaseKind::I | CaseKind::II => Chart::HalfPlane,
            CaseKind::III => Chart::Polar,
            _ => Chart::Hyperbolic,
        }
    }

    /// Chart of the straightened side.
    pub fn straight_chart(&self) -> Chart {
        match self.case.kind {
            CaseKind::III => Chart::Cylinder,
            _ => Chart::HalfPlane,
        }
    }
}

/// Polar-type chart kinds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PolarChart {
    /// `x = (r cos 2πθ, r sin 2πθ)`, θ ∈ [0,1).
    Standard,
    /// `x = (r cosh θ, r sinh θ)` on the cone `x₁ > |x₂|`.
    Hyperbolic,
}

impl PolarChart {
    pub fn to_cartesian(self, r: f64, theta: f64) -> (f64, f64) {
        match self {
            PolarChart::Standard => {
                let (s, c) = (2.0 * PI * theta).sin_cos();
                (r * c, r * s)
            }
            PolarChart::Hyperbolic => (r * theta.cosh(), r * theta.sinh()),
        }
    }

    pub fn from_cartesian(self, x1: f64, x2: f64) -> Result<(f64, f64)> {
        match self {
            PolarChart::Standard => {
                let r = x1.hypot(x2);
                if r == 0.0 {
                    return Err(Error::DomainError("origin has no polar angle".into()));
                }
                Ok((r, (x2.atan2(x1) / (2.0 * PI)).rem_euclid(1.0)))
            }
            PolarChart::Hyperbolic => {
                if x1 <= x2.abs() {
                    return Err(Error::DomainError(format!("({x1}, {x2}) lies outside the cone x1 > |x2|")));
                }
                Ok((((x1 - x2) * (x1 + x2)).sqrt(), (x2 / x1).atanh()))
            }
        }
    }

    /// Density of `dx₁dx₂` in `(r, θ)`.
    pub fn measure_density(self, r: f64) -> f64 {
        match self {
            PolarChart::Standard => 2.0 * PI * r,
            PolarChart::Hyperbolic => r,
        }
    }
}

/// `f_p(r,θ) = f(r cos 2πθ, r sin 2πθ)`.
pub fn to_polar(f: &PointEvaluator) -> Result<PointEvaluator> {
    if f.chart() != Chart::Plane {
        return Err(Error::CaseMismatch(format!("to_polar needs a Plane evaluator, got {:?}", f.chart())));
    }
    let s = f.support();
    let corners = [(s.first.0, s.second.0), (s.first.0, s.second.1), (s.first.1, s.second.0), (s.first.1, s.second.1)];
    let r_hi = corners.iter().map(|c| c.0.hypot(c.1)).fold(0.0, f64::max);
    let dx = if s.first.0 > 0.0 { s.first.0 } else if s.first.1 < 0.0 { -s.first.1 } else { 0.0 };
    let dy = if s.second.0 > 0.0 { s.second.0 } else if s.second.1 < 0.0 { -s.second.1 } else { 0.0 };
    let [f1, f2] = f.freq();
    let src = f.clone();
    Ok(PointEvaluator::new(Chart::Polar, SupportBox::new((dx.hypot(dy), r_hi), (0.0, 1.0)), move |r, t| {
        let (x1, x2) = PolarChart::Standard.to_cartesian(r, t);
        src.eval(x1, x2)
    })
    .with_freq(f1.max(f2) * SQRT_2, 2.0 * PI * r_hi * f1.max(f2) * SQRT_2))
}

/// `f_h(r,θ) = f(r cosh θ, r sinh θ)`.
pub fn to_hyperbolic(f: &PointEvaluator) -> Result<PointEvaluator> {
    if !matches!(f.chart(), Chart::Cone | Chart::Plane) {
        return Err(Error::CaseMismatch(format!("to_hyperbolic needs a Cartesian evaluator, got {:?}", f.chart())));
    }
    let s = f.support();
    let (a, b) = (s.first.0.max(0.0), s.first.1);
    let (c, d) = s.second;
    let m = c.abs().max(d.abs());
    let r_lo = (a * a - m * m).max(0.0).sqrt();
    let min_sq = if c <= 0.0 && d >= 0.0 { 0.0 } else { (c * c).min(d * d) };
    let r_hi = (b * b - min_sq).max(0.0).sqrt();
    let ratio_lo = if c < 0.0 { c / a } else { c / b };
    let ratio_hi = if d > 0.0 { d / a } else { d / b };
    let th = |q: f64| {
        if q <= -1.0 || q.is_nan() && c < 0.0 {
            f64::NEG_INFINITY
        } else if q >= 1.0 || q.is_nan() {
            f64::INFINITY
        } else {
            q.atanh()
        }
    };
    let (t_lo, t_hi) = (
        if ratio_lo >= 1.0 { f64::INFINITY } else { th(ratio_lo) },
        if ratio_hi <= -1.0 { f64::NEG_INFINITY } else { th(ratio_hi) },
    );
    let [f1, f2] = f.freq();
    let src = f.clone();
    Ok(PointEvaluator::new(Chart::Hyperbolic, SupportBox::new((r_lo, r_hi), (t_lo, t_hi)), move |r, t| {
        if r <= 0.0 {
            return ZERO;
        }
        let (x1, x2) = PolarChart::Hyperbolic.to_cartesian(r, t);
        src.eval(x1, x2)
    })
    .with_freq(f1 + f2, (f1 + f2) * b))
}

/// Cartesian evaluator of a standard-polar one.
pub fn from_polar(fp: &PointEvaluator) -> Result<PointEvaluator> {
    if fp.chart() != Chart::Polar {
        return Err(Error::CaseMismatch(format!("from_polar needs a Polar evaluator, got {:?}", fp.chart())));
    }
    let r = fp.support().first.1;
    let src = fp.clone();
    Ok(PointEvaluator::new(Chart::Plane, SupportBox::new((-r, r), (-r, r)), move |x1, x2| {
        match PolarChart::Standard.from_cartesian(x1, x2) {
            Ok((r, t)) => src.eval(r, t),
            Err(_) => ZERO,
        }
    }))
}

/// Cone evaluator of a hyperbolic-polar one.
pub fn from_hyperbolic(fh: &PointEvaluator) -> Result<PointEvaluator> {
    if fh.chart() != Chart::Hyperbolic {
        return Err(Error::CaseMismatch(format!("from_hyperbolic needs a Hyperbolic evaluator, got {:?}", fh.chart())));
    }
    let s = fh.support();
    let (r, t) = (s.first.1, s.second.0.abs().max(s.second.1.abs()));
    let src = fh.clone();
    Ok(PointEvaluator::new(Chart::Cone, SupportBox::new((0.0, r * t.cosh()), (-r * t.sinh(), r * t.sinh())), move |x1, x2| {
        match PolarChart::Hyperbolic.from_cartesian(x1, x2) {
            Ok((r, t)) => src.eval(r, t),
            Err(_) => ZERO,
        }
    }))
}

fn hull(points: impl IntoIterator<Item = f64>) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for p in points {
        if p.is_nan() {
            return (f64::NEG_INFINITY, f64::INFINITY);
        }
        lo = lo.min(p);
        hi = hi.max(p);
    }
    (lo, hi)
}

/// Brings a case's input to its native chart (polar for III, hyperbolic polar for IV).
fn to_native(chart: &CoordChart, f: &PointEvaluator) -> Result<PointEvaluator> {
    let native = chart.native_chart();
    if f.chart() == native {
        return Ok(f.clone());
    }
    match (chart.case.kind, f.chart()) {
        (CaseKind::III, Chart::Plane) => to_polar(f),
        (CaseKind::IV, Chart::Cone) => to_hyperbolic(f),
        (k, c) => Err(Error::CaseMismatch(format!("case {k} cannot take a {c:?} evaluator"))),
    }
}

/// `U^𝒥 f(y₁,y₂) = w(y₁) f_c(y₁,y₂)`, with `f_c` the pullback through the chart's
/// backward map and `w = y₁^{β/2}` (I), `y₁^{1/2}` (II, IV), `(2π y₁)^{1/2}` (III).
pub fn apply_u_j(case: &CaseTag, f: &PointEvaluator) -> Result<PointEvaluator> {
    let chart = CoordChart::new(*case)?;
    let native = to_native(&chart, f)?;
    let s = native.support();
    let (a, b) = (s.first.0.max(0.0), s.first.1);
    let alpha = case.alpha_or_zero();
    let second = match case.kind {
        CaseKind::I => {
            let e = -chart.beta();
            hull([a, b].iter().flat_map(|&x| [x.powf(e) * s.second.0, x.powf(e) * s.second.1]))
        }
        CaseKind::II => {
            let (lo, hi) = hull([a, b].iter().flat_map(|&x| [s.second.0 / x, s.second.1 / x]));
            (lo - b.ln(), hi - a.ln())
        }
        CaseKind::III => (0.0, 1.0),
        _ => (s.second.0 - alpha * b.ln(), s.second.1 - alpha * a.ln()),
    };
    let e = chart.weight_exponent();
    let c = if case.kind == CaseKind::III { (2.0 * PI).sqrt() } else { 1.0 };
    let [f1, f2] = native.freq();
    let src = native.clone();
    let rule = move |y1: f64, y2: f64| {
        let Ok(p) = chart.backward((y1, y2)) else { return ZERO };
        let v = src.eval(p.0, p.1);
        if v == ZERO {
            v
        } else {
            v * (c * y1.powf(e))
        }
    };
    let (rb, _) = native.breaks();
    let kind = case.kind;
    let beta = if kind == CaseKind::I { chart.beta() } else { 0.0 };
    let range_src = native.clone();
    Ok(PointEvaluator::new(chart.straight_chart(), SupportBox::new((a, b), second), rule)
        .with_breaks(rb.to_vec(), Vec::new())
        .with_freq(f1 + f2 * (1.0 + alpha.abs()), f2 * b.max(1.0))
        .with_fiber_range(move |y1| {
            let (c, d) = range_src.fiber_range(y1);
            match kind {
                CaseKind::I => {
                    let w = y1.powf(-beta);
                    (w * c, w * d)
                }
                CaseKind::II => {
                    let shift = y1.ln();
                    (c / y1 - shift, d / y1 - shift)
                }
                _ => (c - alpha * y1.ln(), d - alpha * y1.ln()),
            }
        }))
}

/// Inverse of [`apply_u_j`]; returns the native-chart evaluator
/// (Cartesian half plane for I, II; polar for III; hyperbolic polar for IV).
pub fn apply_u_j_inv(case: &CaseTag, h: &PointEvaluator) -> Result<PointEvaluator> {
    let chart = CoordChart::new(*case)?;
    if h.chart() != chart.straight_chart() {
        return Err(Error::CaseMismatch(format!(
            "case {} expects a {:?} evaluator, got {:?}",
            case.kind,
            chart.straight_chart(),
            h.chart()
        )));
    }
    let s = h.support();
    let (a, b) = (s.first.0.max(0.0), s.first.1);
    let alpha = case.alpha_or_zero();
    let second = match case.kind {
        CaseKind::I => {
            let e = chart.beta();
            hull([a, b].iter().flat_map(|&x| [x.powf(e) * s.second.0, x.powf(e) * s.second.1]))
        }
        CaseKind::II => {
            let (lo, hi) = hull([a, b].iter().flat_map(|&x| [x * s.second.0, x * s.second.1]));
            let xl = |x: f64| if x > 0.0 { x * x.ln() } else { 0.0 };
            let (mn, mx) = hull([xl(a), xl(b)]);
            let mn = if a < (-1f64).exp() && b > (-1f64).exp() { -(-1f64).exp() } else { mn };
            (lo + mn, hi + mx)
        }
        CaseKind::III => (0.0, 1.0),
        _ => hull([a, b].iter().flat_map(|&x| [s.second.0 + alpha * x.ln(), s.second.1 + alpha * x.ln()])),
    };
    let e = chart.weight_exponent();
    let c = if case.kind == CaseKind::III { (2.0 * PI).sqrt() } else { 1.0 };
    let src = h.clone();
    let [f1, f2] = h.freq();
    let rule = move |x1: f64, x2: f64| {
        let Ok(q) = chart.forward((x1, x2)) else { return ZERO };
        let v = src.eval(q.0, q.1);
        if v == ZERO {
            v
        } else {
            v / (c * x1.powf(e))
        }
    };
    let (rb, _) = h.breaks();
    let kind = case.kind;
    let beta = if kind == CaseKind::I { chart.beta() } else { 0.0 };
    let range_src = h.clone();
    Ok(PointEvaluator::new(chart.native_chart(), SupportBox::new((a, b), second), rule)
        .with_breaks(rb.to_vec(), Vec::new())
        .with_freq(f1 + f2 * (1.0 + alpha.abs()), f2)
        .with_fiber_range(move |x1| {
            let (c, d) = range_src.fiber_range(x1);
            match kind {
                CaseKind::I => {
                    let w = x1.powf(beta);
                    (w * c, w * d)
                }
                CaseKind::II => {
                    let shift = x1 * x1.ln();
                    (x1 * c + shift, x1 * d + shift)
                }
                _ => (c + alpha * x1.ln(), d + alpha * x1.ln()),
            }
        }))
}

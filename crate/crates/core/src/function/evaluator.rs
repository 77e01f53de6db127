use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use super::atom::{AtomSum, FiberDomain, RadialWeight, C64};
use super::exact::real_norm;
use super::quadrature::{integrate, integrate_2d, Axis, QuadOptions};
use crate::error::{Error, Result};

/// Coordinate system a [`PointEvaluator`] is written in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Chart {
    /// `r > 0`, no fiber.
    Radial,
    /// `(r, y) ∈ ℝ₊ × ℝ`.
    HalfPlane,
    /// `(r, θ) ∈ ℝ₊ × [0,1)`.
    Cylinder,
    /// Cartesian `(x₁, x₂) ∈ ℝ²`.
    Plane,
    /// Cartesian, restricted to the cone `x₁ > |x₂|`.
    Cone,
    /// Standard polar `(r, θ)`, θ in turns.
    Polar,
    /// Hyperbolic polar `(r, θ)` over the cone.
    Hyperbolic,
}

impl Chart {
    /// Second coordinate lives on the circle `[0,1)`.
    pub fn periodic_second(self) -> bool {
        matches!(self, Chart::Cylinder | Chart::Polar)
    }

    /// First coordinate is a radius, so a radial weight applies.
    pub fn radial_first(self) -> bool {
        !matches!(self, Chart::Plane | Chart::Cone)
    }
}

/// Closed box `[first.0, first.1] × [second.0, second.1]` containing the essential support.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SupportBox {
    pub first: (f64, f64),
    pub second: (f64, f64),
}

impl SupportBox {
    pub fn new(first: (f64, f64), second: (f64, f64)) -> Self {
        SupportBox { first, second }
    }

    pub fn is_bounded(&self) -> bool {
        self.first.0.is_finite() && self.first.1.is_finite() && self.second.0.is_finite() && self.second.1.is_finite()
    }

    pub fn intersect(&self, other: &SupportBox) -> Option<SupportBox> {
        let first = (self.first.0.max(other.first.0), self.first.1.min(other.first.1));
        let second = (self.second.0.max(other.second.0), self.second.1.min(other.second.1));
        if first.0 >= first.1 || second.0 > second.1 {
            return None;
        }
        Some(SupportBox { first, second })
    }

    #[inline]
    pub fn contains(&self, p: f64, q: f64) -> bool {
        p >= self.first.0 && p <= self.first.1 && q >= self.second.0 && q <= self.second.1
    }
}

pub type Rule = Arc<dyn Fn(f64, f64) -> C64 + Send + Sync>;
/// Range of the second coordinate containing the support at a given first coordinate.
pub type FiberRange = Arc<dyn Fn(f64) -> (f64, f64) + Send + Sync>;

/// A pointwise-evaluable complex function with declared support and
/// quadrature hints (breakpoints and oscillation frequencies per axis).
#[derive(Clone)]
pub struct PointEvaluator {
    chart: Chart,
    support: SupportBox,
    breaks_first: Vec<f64>,
    breaks_second: Vec<f64>,
    freq: [f64; 2],
    rule: Rule,
    fiber_range: Option<FiberRange>,
}

impl fmt::Debug for PointEvaluator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PointEvaluator")
            .field("chart", &self.chart)
            .field("support", &self.support)
            .field("freq", &self.freq)
            .finish_non_exhaustive()
    }
}

impl PointEvaluator {
    pub fn new<F>(chart: Chart, support: SupportBox, rule: F) -> Self
    where
        F: Fn(f64, f64) -> C64 + Send + Sync + 'static,
    {
        let support = if chart.periodic_second() {
            SupportBox::new(support.first, (0.0, 1.0))
        } else {
            support
        };
        PointEvaluator {
            chart,
            support,
            breaks_first: Vec::new(),
            breaks_second: Vec::new(),
            freq: [0.0, 0.0],
            rule: Arc::new(rule),
            fiber_range: None,
        }
    }

    pub fn with_breaks(mut self, first: Vec<f64>, second: Vec<f64>) -> Self {
        self.breaks_first = first;
        self.breaks_second = second;
        self
    }

    pub fn with_freq(mut self, first: f64, second: f64) -> Self {
        self.freq = [first.abs(), second.abs()];
        self
    }

    /// Declares a tighter, first-coordinate dependent range for the second coordinate.
    pub fn with_fiber_range<F>(mut self, range: F) -> Self
    where
        F: Fn(f64) -> (f64, f64) + Send + Sync + 'static,
    {
        if !self.chart.periodic_second() {
            self.fiber_range = Some(Arc::new(range));
        }
        self
    }

    /// Second-coordinate range at `p`, clipped to the support box.
    pub fn fiber_range(&self, p: f64) -> (f64, f64) {
        let (lo, hi) = self.support.second;
        match &self.fiber_range {
            Some(f) => {
                let (a, b) = f(p);
                (a.max(lo), b.min(hi))
            }
            None => (lo, hi),
        }
    }

    pub fn chart(&self) -> Chart {
        self.chart
    }

    pub fn support(&self) -> SupportBox {
        self.support
    }

    pub fn breaks(&self) -> (&[f64], &[f64]) {
        (&self.breaks_first, &self.breaks_second)
    }

    pub fn freq(&self) -> [f64; 2] {
        self.freq
    }

    pub fn rule(&self) -> Rule {
        Arc::clone(&self.rule)
    }

    /// Evaluates at a chart point; periodic second coordinates are reduced mod 1
    /// and points outside the support box evaluate to zero.
    #[inline]
    pub fn eval(&self, p: f64, q: f64) -> C64 {
        let q = if self.chart.periodic_second() { q.rem_euclid(1.0) } else { q };
        if !self.support.contains(p, q) {
            return C64::new(0.0, 0.0);
        }
        (self.rule)(p, q)
    }

    /// Evaluator of a finite atom sum, on [`Chart::Radial`], [`Chart::HalfPlane`]
    /// or [`Chart::Cylinder`] according to the fiber domain.
    pub fn from_atoms(f: &AtomSum) -> Result<PointEvaluator> {
        f.validate()?;
        let chart = match f.fiber_domain() {
            None => Chart::Radial,
            Some(FiberDomain::Line) => Chart::HalfPlane,
            Some(FiberDomain::Circle) => Chart::Cylinder,
        };
        let mut r_lo = f64::INFINITY;
        let mut r_hi: f64 = 0.0;
        let mut y_lo = f64::INFINITY;
        let mut y_hi = f64::NEG_INFINITY;
        let mut rb = Vec::new();
        let mut yb = Vec::new();
        let mut fr: f64 = 0.0;
        let mut fy: f64 = 0.0;
        for a in &f.atoms {
            r_lo = r_lo.min(a.radial.lo);
            r_hi = r_hi.max(a.radial.hi);
            rb.push(a.radial.lo);
            if a.radial.hi.is_finite() {
                rb.push(a.radial.hi);
            }
            fr = fr.max(a.radial.max_frequency());
            fy = fy.max(a.fiber.frequency());
            if let crate::function::atom::FiberFactor::Line { lo, hi, .. } = a.fiber {
                y_lo = y_lo.min(lo);
                y_hi = y_hi.max(hi);
                yb.push(lo);
                yb.push(hi);
            }
        }
        if f.atoms.is_empty() {
            r_lo = 0.0;
        }
        let second = match chart {
            Chart::HalfPlane => (y_lo, y_hi),
            Chart::Cylinder => (0.0, 1.0),
            _ => (0.0, 0.0),
        };
        rb.sort_by(f64::total_cmp);
        rb.dedup();
        yb.sort_by(f64::total_cmp);
        yb.dedup();
        let sum = f.clone();
        Ok(PointEvaluator::new(chart, SupportBox::new((r_lo, r_hi), second), move |r, y| sum.eval(r, y))
            .with_breaks(rb, yb)
            .with_freq(fr, fy))
    }
}

fn merged_breaks(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut v: Vec<f64> = a.iter().chain(b).copied().collect();
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}

/// `⟨f, g⟩ = ∫∫ f · conj(g) · r^w` by adaptive nested quadrature over the
/// intersected support boxes. The radial weight is applied only on charts
/// whose first coordinate is a radius.
pub fn inner_product_quadrature(
    f: &PointEvaluator,
    g: &PointEvaluator,
    weight: RadialWeight,
    tol: f64,
) -> Result<(C64, f64)> {
    if f.chart != g.chart {
        return Err(Error::CaseMismatch(format!(
            "evaluators on different charts: {:?} vs {:?}",
            f.chart, g.chart
        )));
    }
    if !(tol > 0.0) {
        return Err(Error::Config(format!("quadrature tolerance must be positive, got {tol}")));
    }
    if !f.support.is_bounded() || !g.support.is_bounded() {
        let bad = if f.support.first.1.is_finite() && g.support.first.1.is_finite() { "y" } else { "r" };
        return Err(Error::UnboundedSupport(bad));
    }
    let Some(bx) = f.support.intersect(&g.support) else {
        return Ok((C64::new(0.0, 0.0), 0.0));
    };
    let w = if f.chart.radial_first() { weight } else { RadialWeight::LEBESGUE };
    let opts = QuadOptions::with_tol(tol);
    let outer = Axis::new(bx.first.0, bx.first.1)
        .with_breaks(merged_breaks(&f.breaks_first, &g.breaks_first))
        .with_freq(f.freq[0] + g.freq[0]);
    if f.chart == Chart::Radial {
        return integrate(
            |r| f.eval(r, 0.0) * g.eval(r, 0.0).conj() * w.density(r),
            outer.lo,
            outer.hi,
            &outer.breaks,
            outer.freq,
            &opts,
        );
    }
    if bx.second.0 >= bx.second.1 {
        return Ok((C64::new(0.0, 0.0), 0.0));
    }
    let mut second_breaks = merged_breaks(&f.breaks_second, &g.breaks_second);
    if f.chart.periodic_second() {
        // a support may wrap around θ = 0; seed the circle with a fixed grid
        second_breaks = merged_breaks(&second_breaks, &(1..16).map(|j| j as f64 / 16.0).collect::<Vec<_>>());
    }
    let second_freq = f.freq[1] + g.freq[1];
    let inner = |r: f64| {
        let (a0, b0) = f.fiber_range(r);
        let (a1, b1) = g.fiber_range(r);
        let (lo, hi) = (a0.max(a1).max(bx.second.0), b0.min(b1).min(bx.second.1));
        let (lo, hi) = if lo < hi { (lo, hi) } else { (0.0, 0.0) };
        Axis::new(lo, hi)
            .with_breaks(second_breaks.clone())
            .with_freq(second_freq)
    };
    let h = |r: f64, y: f64, out: &mut [C64]| {
        let a = f.eval(r, y);
        out[0] = if a == C64::new(0.0, 0.0) {
            a
        } else {
            a * g.eval(r, y).conj() * w.density(r)
        };
    };
    let res = integrate_2d(&h, 1, &outer, &inner, bx.second.1 - bx.second.0, &opts)?;
    Ok((res.value[0], res.error))
}

pub fn norm_quadrature(f: &PointEvaluator, weight: RadialWeight, tol: f64) -> Result<f64> {
    let (v, _) = inner_product_quadrature(f, f, weight, tol)?;
    real_norm(v)
}

//! Kernel tables for the planar cases: the integral operator
//! `g ↦ (r ↦ ∫ conj K(r,y) g(y) dy)` with kernels
//! `ψ^I(r, r^β y)`, `ψ^II(r, ry + r ln r)`, `ψ_p(r, y + α ln r)`, `ψ_h(r, y + α ln r)`,
//! has, on the fiber basis and under the codomain weight `r^{(1−α)/α}` (I) or `r^{-1}` (II–IV),
//! the Gram `κ · G^q` of the q-side operator, with `κ = 1/(2π)` for III and `1` otherwise.

use std::cell::Cell;
use std::f64::consts::PI;
use std::time::Instant;

use serde_json::json;

use crate::error::{Error, Result};
use crate::function::quadrature::{integrate_vec, QuadOptions};
use crate::function::{FiberDomain, PointEvaluator, C64};
use crate::group::{CaseKind, CaseTag};
use crate::intertwine::CoordChart;
use crate::shannon::{fiber_box, generator_j, FiberIndex, LazyShannonLift};

use super::gram::Gram;
use super::isometry::{isometry_defect_continuous, Generator, Rep};
use super::report::{check_tol, try_par_map, Defect, Report};

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// The chain constant relating the planar Gram to the q-side Gram.
pub fn chain_constant(case: &CaseTag) -> f64 {
    if case.kind == CaseKind::III {
        1.0 / (2.0 * PI)
    } else {
        1.0
    }
}

/// Exponent of the codomain weight `r^w`.
pub fn codomain_exponent(case: &CaseTag) -> f64 {
    match case.kind {
        CaseKind::I => {
            let a = case.alpha_or_zero();
            (1.0 - a) / a
        }
        _ => -1.0,
    }
}

struct Kernel {
    case: CaseTag,
    psi: PointEvaluator,
    beta: f64,
    half_weight: f64,
}

impl Kernel {
    fn new(case: CaseTag, lift: &LazyShannonLift, depth: u64) -> Result<Self> {
        let beta = if case.kind == CaseKind::I { CoordChart::new(case)?.beta() } else { 0.0 };
        Ok(Kernel { case, psi: generator_j(&case, lift, Some(depth))?, beta, half_weight: codomain_exponent(&case) / 2.0 })
    }

    /// `K(r, y) · r^{w/2}`, so the codomain weight is carried by the kernel.
    fn eval(&self, r: f64, y: f64) -> C64 {
        let a = self.case.alpha_or_zero();
        let v = match self.case.kind {
            CaseKind::I => self.psi.eval(r, r.powf(self.beta) * y),
            CaseKind::II => self.psi.eval(r, r * y + r * r.ln()),
            CaseKind::III => self.psi.eval(r, (y + a * r.ln()).rem_euclid(1.0)),
            _ => self.psi.eval(r, y + a * r.ln()),
        };
        if v == ZERO {
            v
        } else {
            v * r.powf(self.half_weight)
        }
    }
}

/// Gram of the planar kernel operator on the fiber basis box, by nested quadrature
/// band by band (`r² ∈ (2^{-n}, 2^{-n+1}]`, `n ≤` the truncation depth).
pub fn kernel_gram(case: &CaseTag, lift: &LazyShannonLift, fiber_bound: i64, tol: f64) -> Result<Gram> {
    let domain = if case.kind == CaseKind::III { FiberDomain::Circle } else { FiberDomain::Line };
    if lift.domain() != domain {
        return Err(Error::CaseMismatch(format!("case {} needs a {domain:?} fiber lift", case.kind)));
    }
    let basis = fiber_box(domain, (-fiber_bound, fiber_bound), (-fiber_bound, fiber_bound));
    let factors: Vec<_> = basis.iter().map(|i| i.factor()).collect();
    let depth = lift.depth_for(&basis)?;
    let kernel = Kernel::new(*case, lift, depth)?;
    let dim = basis.len();
    let (ylo, yhi, ybreaks): (f64, f64, Vec<f64>) = match domain {
        FiberDomain::Line => {
            let b = fiber_bound as f64;
            (-b, b + 1.0, (-fiber_bound..=fiber_bound + 1).map(|k| k as f64).collect())
        }
        FiberDomain::Circle => (0.0, 1.0, Vec::new()),
    };
    let bands: Vec<u64> = (1..=depth).collect();
    let parts = try_par_map(&bands, |&n| -> Result<Vec<C64>> {
        let fiber_freq = match lift.bijection().fiber_of(n)? {
            FiberIndex::Line(_, l) | FiberIndex::Circle(l) => l.unsigned_abs() as f64,
        };
        let freq = fiber_freq + fiber_bound as f64 + 1.0;
        let (rlo, rhi) = (2f64.powf(-(n as f64) / 2.0), 2f64.powf(-(n as f64 - 1.0) / 2.0));
        // inner values scale like (2/r)^{1/2}, and a relative error ε there moves the Gram by about 2ε
        let inner_opts = QuadOptions::with_tol(tol * 0.1 * (2.0 / rlo).sqrt());
        let outer_opts = QuadOptions::with_tol(tol * 0.1);
        let failure: Cell<Option<Error>> = Cell::new(None);
        let outer = |r: f64, out: &mut [C64]| {
            let inner = |y: f64, o: &mut [C64]| {
                let kv = kernel.eval(r, y).conj();
                for (slot, e) in o.iter_mut().zip(&factors) {
                    *slot = if kv == ZERO { ZERO } else { kv * e.eval(y) };
                }
            };
            match integrate_vec(&inner, dim, ylo, yhi, &ybreaks, freq, &inner_opts) {
                Ok(v) => {
                    for i in 0..dim {
                        for j in 0..dim {
                            out[i * dim + j] = v.value[i] * v.value[j].conj();
                        }
                    }
                }
                Err(e) => {
                    out.iter_mut().for_each(|z| *z = ZERO);
                    let prev = failure.take();
                    failure.set(prev.or(Some(e)));
                }
            }
        };
        let res = integrate_vec(&outer, dim * dim, rlo, rhi, &[], 0.0, &outer_opts);
        if let Some(e) = failure.take() {
            return Err(e);
        }
        Ok(res?.value)
    })?;
    let mut entries = vec![ZERO; dim * dim];
    for p in parts {
        for (e, v) in entries.iter_mut().zip(p) {
            *e += v;
        }
    }
    Ok(Gram { n: dim, entries })
}

/// `max |G^𝒥 − κ G^q|` entrywise, with `G^q` the exact q-side operator Gram.
pub fn kernel_isometry_defect(case: &CaseTag, lift: &LazyShannonLift, fiber_bound: i64, tol: f64) -> Result<Report> {
    check_tol(tol)?;
    let started = Instant::now();
    let kappa = chain_constant(case);
    let gj = kernel_gram(case, lift, fiber_bound, tol)?;
    let (_, gq) = isometry_defect_continuous(&Generator::Lift(lift.clone()), Rep::Q, fiber_bound, tol)?;
    let mut d = Defect::default();
    for (a, b) in gj.entries.iter().zip(&gq.entries) {
        d.push((a - b * kappa).norm());
    }
    Ok(Report::new(
        "kernel",
        &case.label(),
        json!({"fiberBox": fiber_bound, "basis": gj.n, "codomainExponent": codomain_exponent(case), "chainConstant": kappa}),
        &d,
        tol,
        started,
    )
    .with_notes("planar kernel Gram by nested quadrature vs chain constant times exact q-side Gram"))
}

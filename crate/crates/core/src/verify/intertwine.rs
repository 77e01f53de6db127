//! Intertwining, unitarity, chart and dilation-invariance checks.

use std::time::Instant;

use rand::Rng;
use serde_json::json;

use crate::error::Result;
use crate::function::{
    cis_turns, inner_product_exact, inner_product_quadrature, PointEvaluator, RadialWeight,
};
use crate::group::{act_atoms, act_evaluator, to_q_parameters, CaseKind, CaseTag, GroupElement};
use crate::intertwine::{apply_u, apply_u_inv, apply_u_j, CoordChart, PolarChart};

use super::report::{check_tol, try_par_map, Defect, Report};
use super::testfns::{native_test_functions, random_lin_phase_atoms, random_phase_free_atoms, rng_for};

fn circular(d: f64) -> f64 {
    (d - d.round()).abs()
}

/// `U μ⁽ˡ⁾_{(u,s)} f = μ⁽q⁾_{(2u,√s)} U f`, pointwise, on phase-free atom sums.
///
/// Three evaluations are compared at every point: the atom path on the
/// q-side, the atom path pulled back to the l-side through `U⁻¹`, and a direct
/// closed-form evaluation of `μ⁽q⁾ U f` from `f`.
pub fn line_intertwine_defect(seed: u64, elements: usize, points: usize, tol: f64) -> Result<Report> {
    check_tol(tol)?;
    let started = Instant::now();
    let mut rng = rng_for(seed, "line_intertwine");
    let f = random_phase_free_atoms(&mut rng, 4);
    let uf = apply_u(&f)?;
    let l = CaseTag::l();
    let q = CaseTag::q();
    let mut work = Vec::with_capacity(elements);
    for _ in 0..elements {
        let g = GroupElement::new(rng.gen_range(-3.0..3.0), rng.gen_range(0.25..4.0));
        let pts: Vec<(f64, f64)> = (0..points)
            .map(|_| (rng.gen_range(0.05 / g.t..2.5 / g.t), rng.gen_range(-1.5..2.0)))
            .collect();
        work.push((g, pts));
    }
    let per = try_par_map(&work, |(g, pts)| {
        let gq = to_q_parameters(&l, g)?;
        let lhs_q = apply_u(&act_atoms(&l, g, &f)?)?;
        let rhs_q = act_atoms(&q, &gq, &uf)?;
        let rhs_l = apply_u_inv(&rhs_q)?;
        let lhs_l = act_atoms(&l, g, &f)?;
        let (v, t) = (gq.u, gq.t);
        let mut d = Defect::default();
        for &(xi, y) in pts {
            let r = xi.sqrt();
            let direct = f.eval((t * r) * (t * r), y) * (t.sqrt() * (2.0 * t * r).sqrt()) * cis_turns(0.5 * v * r * r);
            let a = lhs_q.eval(r, y);
            d.push((a - rhs_q.eval(r, y)).norm());
            d.push((a - direct).norm());
            d.push((lhs_l.eval(xi, y) - rhs_l.eval(xi, y)).norm());
        }
        Ok(d)
    })?;
    let mut d = Defect::default();
    per.iter().for_each(|x| d.merge(x));
    Ok(Report::new("line_intertwine", "L->Q", json!({"elements": elements, "points": points, "seed": seed}), &d, tol, started)
        .with_notes("U mu_l(u,s) f = mu_q(2u, sqrt s) U f on phase-free atoms; atom, pulled-back and direct evaluations"))
}

/// `‖Uf‖ = ‖f‖` and `⟨Uf, Ug⟩ = ⟨f, g⟩`: exact l-side values against q-side quadrature.
pub fn unitarity_u_defect(seed: u64, functions: usize, tol: f64) -> Result<Report> {
    check_tol(tol)?;
    let started = Instant::now();
    let mut rng = rng_for(seed, "unitarity_u");
    let fs: Vec<_> = (0..functions)
        .map(|i| if i % 2 == 0 { random_phase_free_atoms(&mut rng, 3) } else { random_lin_phase_atoms(&mut rng, 3) })
        .collect();
    // cross pairs stay within one family of test functions so every pair has a closed form
    let pairs: Vec<(usize, usize)> = (0..functions).map(|i| (i, i)).chain((2..functions).map(|i| (i - 2, i))).collect();
    let quad_tol = tol * 0.1;
    let per = try_par_map(&pairs, |&(i, j)| {
        let exact = inner_product_exact(&fs[i], &fs[j], RadialWeight::LEBESGUE)?;
        let ui = PointEvaluator::from_atoms(&apply_u(&fs[i])?)?;
        let uj = PointEvaluator::from_atoms(&apply_u(&fs[j])?)?;
        let (q, _) = inner_product_quadrature(&ui, &uj, RadialWeight::LEBESGUE, quad_tol)?;
        Ok((exact - q).norm())
    })?;
    let d = Defect::from_values(per);
    Ok(Report::new("unitarity_u", "L->Q", json!({"functions": functions, "seed": seed}), &d, tol, started)
        .with_notes("exact l-side inner products vs adaptive quadrature of U-images"))
}

/// Sample a straight-side point inside the support of `μ^𝒥_g f`.
fn straight_point(case: &CaseTag, chart: &CoordChart, img: &PointEvaluator, rng: &mut impl Rng) -> Option<(f64, f64)> {
    let s = img.support();
    for _ in 0..64 {
        let x1 = rng.gen_range(s.first.0..s.first.1);
        let x2 = rng.gen_range(s.second.0..s.second.1);
        let native = match case.kind {
            CaseKind::III => PolarChart::Standard.from_cartesian(x1, x2).ok(),
            CaseKind::IV => PolarChart::Hyperbolic.from_cartesian(x1, x2).ok(),
            _ => (x1 > 0.0).then_some((x1, x2)),
        };
        if let Some(p) = native {
            if let Ok(y) = chart.forward(p) {
                return Some(y);
            }
        }
    }
    None
}

/// `U^𝒥 μ^𝒥_{(u,t)} f = μ⁽q⁾_{τ(u,t)} U^𝒥 f`, pointwise on smooth bumps.
pub fn planar_intertwine_defect(case: &CaseTag, seed: u64, elements: usize, points: usize, tol: f64) -> Result<Report> {
    check_tol(tol)?;
    let started = Instant::now();
    let chart = CoordChart::new(*case)?;
    let mut rng = rng_for(seed, &format!("planar_intertwine/{}", case.label()));
    let fs = native_test_functions(case);
    let q = CaseTag::q();
    let mut work = Vec::with_capacity(elements);
    for e in 0..elements {
        let g = GroupElement::new(rng.gen_range(-2.0..2.0), rng.gen_range(-1.0..1.0));
        let f = &fs[e % fs.len()];
        let img = act_evaluator(case, &g, f)?;
        let pts: Vec<(f64, f64)> = (0..points).filter_map(|_| straight_point(case, &chart, &img, &mut rng)).collect();
        work.push((g, e % fs.len(), img, pts));
    }
    let mut nonzero = 0usize;
    let per = try_par_map(&work, |(g, fi, img, pts)| {
        let lhs = apply_u_j(case, img)?;
        let rhs = act_evaluator(&q, &to_q_parameters(case, g)?, &apply_u_j(case, &fs[*fi])?)?;
        let mut d = Defect::default();
        let mut nz = 0usize;
        for &(y1, y2) in pts {
            let a = lhs.eval(y1, y2);
            let b = rhs.eval(y1, y2);
            if a.norm() > 0.0 || b.norm() > 0.0 {
                nz += 1;
            }
            d.push((a - b).norm());
        }
        Ok((d, nz))
    })?;
    let mut d = Defect::default();
    for (x, nz) in &per {
        d.merge(x);
        nonzero += nz;
    }
    Ok(Report::new(
        "planar_intertwine",
        &case.label(),
        json!({"case": case, "elements": elements, "points": points, "seed": seed}),
        &d,
        tol,
        started,
    )
    .with_notes(format!("{nonzero} of {} sampled points inside the support", d.count)))
}

fn native_sample(case: &CaseTag, rng: &mut impl Rng) -> (f64, f64) {
    let first = rng.gen_range(0.01..4.0);
    let second = match case.kind {
        CaseKind::III => rng.gen_range(0.0..1.0),
        _ => rng.gen_range(-3.0..3.0),
    };
    (first, second)
}

fn point_defect(case: &CaseTag, a: (f64, f64), b: (f64, f64)) -> f64 {
    let d1 = (a.0 - b.0).abs() / b.0.abs().max(1.0);
    let d2 = if case.kind == CaseKind::III { circular(a.1 - b.1) } else { (a.1 - b.1).abs() / b.1.abs().max(1.0) };
    d1.max(d2)
}

/// `backward ∘ forward = id` and `forward ∘ backward = id` on random chart points.
pub fn chart_roundtrip_defect(case: &CaseTag, seed: u64, points: usize, tol: f64) -> Result<Report> {
    check_tol(tol)?;
    let started = Instant::now();
    let chart = CoordChart::new(*case)?;
    let mut rng = rng_for(seed, &format!("charts/{}", case.label()));
    let pts: Vec<(f64, f64)> = (0..points).map(|_| native_sample(case, &mut rng)).collect();
    let per = try_par_map(&pts, |&p| {
        let back = chart.backward(chart.forward(p)?)?;
        let fwd = chart.forward(chart.backward(p)?)?;
        Ok(point_defect(case, back, p).max(point_defect(case, fwd, p)))
    })?;
    let d = Defect::from_values(per);
    Ok(Report::new("chart_roundtrip", &case.label(), json!({"case": case, "points": points, "seed": seed}), &d, tol, started)
        .with_notes("relative to max(1,|coordinate|); circular distance for the angle of case III"))
}

/// Analytic Jacobian of the backward chart map against central differences.
pub fn jacobian_defect(case: &CaseTag, seed: u64, points: usize, step: f64, tol: f64) -> Result<Report> {
    check_tol(tol)?;
    let started = Instant::now();
    let chart = CoordChart::new(*case)?;
    let mut rng = rng_for(seed, &format!("jacobian/{}", case.label()));
    let pts: Vec<(f64, f64)> =
        (0..points).map(|_| (rng.gen_range(0.2..3.0), rng.gen_range(-2.0..2.0))).collect();
    let periodic = case.kind == CaseKind::III;
    let per = try_par_map(&pts, |&(y1, y2)| {
        let diff = |a: (f64, f64), b: (f64, f64)| {
            let d2 = a.1 - b.1;
            (a.0 - b.0, if periodic { d2 - d2.round() } else { d2 })
        };
        let d_1 = diff(chart.backward((y1 + step, y2))?, chart.backward((y1 - step, y2))?);
        let d_2 = diff(chart.backward((y1, y2 + step))?, chart.backward((y1, y2 - step))?);
        let h2 = 2.0 * step;
        let fd = (d_1.0 / h2) * (d_2.1 / h2) - (d_2.0 / h2) * (d_1.1 / h2);
        let exact = chart.jacobian((y1, y2))?;
        Ok((fd - exact).abs() / exact.abs())
    })?;
    let d = Defect::from_values(per);
    Ok(Report::new(
        "chart_jacobian",
        &case.label(),
        json!({"case": case, "points": points, "step": step, "seed": seed}),
        &d,
        tol,
        started,
    )
    .with_notes("relative error of the Jacobian determinant"))
}

/// Dilation invariance of the second straightened coordinate: the chart
/// identity at the flowed point, and the closed-form identity with `s`.
pub fn dilation_invariance_defect(case: &CaseTag, seed: u64, points: usize, tol: f64) -> Result<Report> {
    check_tol(tol)?;
    let started = Instant::now();
    let chart = CoordChart::new(*case)?;
    let a = case.alpha_or_zero();
    let mut rng = rng_for(seed, &format!("dilation_invariance/{}", case.label()));
    let pts: Vec<((f64, f64), f64)> =
        (0..points).map(|_| (native_sample(case, &mut rng), rng.gen_range(-2.0..2.0))).collect();
    let kind = case.kind;
    let rel = |x: f64, y: f64| {
        if kind == CaseKind::III {
            circular(x - y)
        } else {
            (x - y).abs() / y.abs().max(1.0)
        }
    };
    let per = try_par_map(&pts, |&((x1, x2), t)| {
        let want = chart.forward((x1, x2))?.1;
        // flowed point and the closed-form left-hand side
        let (flowed, closed) = match kind {
            CaseKind::I => {
                let s = t.exp();
                let b = chart.beta();
                let p = (s.powf(-a) * x1, s.powf(-(a + 1.0)) * x2);
                (p, (s.powf(-a) * x1).powf(-b) * s.powf(-(a + 1.0)) * x2)
            }
            CaseKind::II => {
                let s = (-t).exp();
                let p = (s * x1, s * x2 + s * x1 * s.ln());
                (p, (s * x2 + s * x1 * s.ln() - s * x1 * (s * x1).ln()) / (s * x1))
            }
            _ => {
                let s = (-t).exp();
                let p = (s * x1, x2 + a * s.ln());
                (p, x2 + a * s.ln() - a * (s * x1).ln())
            }
        };
        let got = chart.forward(flowed)?.1;
        Ok(rel(got, want).max(rel(closed, want)))
    })?;
    let d = Defect::from_values(per);
    Ok(Report::new("dilation_invariance", &case.label(), json!({"case": case, "points": points, "seed": seed}), &d, tol, started)
        .with_notes("second straightened coordinate is invariant under the dilation flow"))
}

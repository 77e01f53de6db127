//! Discrete isometry: `⟨f, g⟩ = Σ_k A_k(f) · conj(A_k(g))` for almost every `ξ`,
//! with `A_k(f) = ∫ ψ̄(2ᵏξ, y) f(y) dy` (l-side), its q-side analogue
//! `(2r)^{-1} Σ_k 2^{-k/2} …` at `ρ = 2^{k/2} r`, and the planar kernels.

use std::f64::consts::PI;
use std::time::Instant;

use rand::Rng;
use serde_json::json;

use crate::error::{Error, Result};
use crate::function::quadrature::{integrate_vec, QuadOptions};
use crate::function::{AtomSum, FiberDomain, FiberFactor, PointEvaluator, C64};
use crate::group::{half_power_of_two, CaseKind, CaseTag};
use crate::intertwine::CoordChart;
use crate::shannon::{band_factor, generator_j, FiberIndex, LazyShannonLift};

use super::isometry::Generator;
use super::report::{check_tol, try_par_map, Defect, Report};
use super::testfns::{golden_point, rng_for};

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// Finite combination `Σ c_i e_i` of fiber basis elements.
#[derive(Debug, Clone, PartialEq)]
pub struct FiberVector {
    pub terms: Vec<(FiberIndex, C64)>,
}

impl FiberVector {
    pub fn basis(i: FiberIndex) -> Self {
        FiberVector { terms: vec![(i, C64::new(1.0, 0.0))] }
    }

    pub fn domain(&self) -> Option<FiberDomain> {
        self.terms.first().map(|(i, _)| i.domain())
    }

    pub fn eval(&self, y: f64) -> C64 {
        self.terms.iter().map(|(i, c)| c * i.factor().eval(y)).sum()
    }

    /// `⟨self, φ⟩ = ∫ self · conj(φ)`, closed form.
    pub fn inner_factor(&self, phi: &FiberFactor) -> Result<C64> {
        let mut acc = ZERO;
        for (i, c) in &self.terms {
            acc += c * i.factor().inner(phi)?;
        }
        Ok(acc)
    }

    /// `⟨self, other⟩` from orthonormality of the basis.
    pub fn inner(&self, other: &FiberVector) -> C64 {
        let mut acc = ZERO;
        for (i, a) in &self.terms {
            for (j, b) in &other.terms {
                if i == j {
                    acc += a * b.conj();
                }
            }
        }
        acc
    }

    /// Random combination over the box `|k|,|l| ≤ bound`.
    pub fn random(rng: &mut impl Rng, domain: FiberDomain, bound: i64, terms: usize) -> Self {
        let terms = (0..terms)
            .map(|_| {
                let l = rng.gen_range(-bound..=bound);
                let idx = match domain {
                    FiberDomain::Line => FiberIndex::Line(rng.gen_range(-bound..=bound), l),
                    FiberDomain::Circle => FiberIndex::Circle(l),
                };
                (idx, C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            })
            .collect();
        FiberVector { terms }
    }

    /// Integration breakpoints covering the support.
    fn breaks(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self
            .terms
            .iter()
            .flat_map(|(i, _)| match i {
                FiberIndex::Line(k, _) => vec![*k as f64, *k as f64 + 1.0],
                FiberIndex::Circle(_) => vec![0.0, 1.0],
            })
            .collect();
        v.sort_by(f64::total_cmp);
        v.dedup();
        v
    }

    fn max_freq(&self) -> f64 {
        self.terms.iter().map(|(i, _)| i.factor().frequency()).fold(0.0, f64::max)
    }
}

/// The side on which the isometry is evaluated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Side {
    L,
    Q,
    J(CaseTag),
}

impl Side {
    pub fn label(&self) -> String {
        match self {
            Side::L => "L".into(),
            Side::Q => "Q".into(),
            Side::J(c) => c.label(),
        }
    }
}

/// Sample points: the golden-ratio sequence (skipping the dyadic `ξ = 1/2`) plus every band midpoint up to `bands`.
pub fn xi_samples(count: usize, bands: u64) -> Vec<f64> {
    (1..=count).map(golden_point).chain((1..=bands).map(|n| 0.75 * 2f64.powi(1 - n as i32))).collect()
}

fn nmax(lift: &LazyShannonLift, fs: &[&FiberVector]) -> Result<u64> {
    let idx: Vec<FiberIndex> = fs.iter().flat_map(|f| f.terms.iter().map(|(i, _)| *i)).collect();
    lift.depth_for(&idx)
}

/// `ψ^𝒥` kernel at `(ρ, y)` expressed through the native chart, with its `k`-weight
/// and the radial prefactor; see the module docs.
struct JKernel {
    case: CaseTag,
    psi: PointEvaluator,
    beta: f64,
}

impl JKernel {
    fn new(case: CaseTag, lift: &LazyShannonLift) -> Result<Self> {
        let beta = if case.kind == CaseKind::I { CoordChart::new(case)?.beta() } else { 0.0 };
        Ok(JKernel { case, psi: generator_j(&case, lift, None)?, beta })
    }

    /// `2^{-1/2} r^{1/(2α)} ψ^I(ρ, ρ^β y)`, `2^{-1/2} ψ^II(ρ, ρy + ρ ln ρ)`,
    /// `2^{-1/2} ψ_p(ρ, y + α ln ρ)`, `2^{-1/2} ψ_h(ρ, y + α ln ρ)`.
    fn eval(&self, r: f64, rho: f64, y: f64) -> C64 {
        let a = self.case.alpha_or_zero();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        match self.case.kind {
            CaseKind::I => self.psi.eval(rho, rho.powf(self.beta) * y) * (s * r.powf(1.0 / (2.0 * a))),
            CaseKind::II => self.psi.eval(rho, rho * y + rho * rho.ln()) * s,
            _ => self.psi.eval(rho, y + a * rho.ln()) * s,
        }
    }

    fn weight(&self, k: i64) -> f64 {
        match self.case.kind {
            CaseKind::I => 2f64.powf(k as f64 / (2.0 * self.case.alpha_or_zero())),
            _ => 1.0,
        }
    }

    /// The k-sum equals `κ ⟨f, g⟩`.
    fn chain_constant(&self) -> f64 {
        if self.case.kind == CaseKind::III {
            1.0 / (2.0 * PI)
        } else {
            1.0
        }
    }
}

fn check_support(psi: &Generator) -> Result<()> {
    if let Generator::Atoms(a) = psi {
        for t in &a.atoms {
            if t.radial.hi > 1.0 {
                return Err(Error::SupportViolation(format!(
                    "atom supported on ({}, {}] reaches beyond 1",
                    t.radial.lo, t.radial.hi
                )));
            }
        }
    }
    Ok(())
}

/// Pairs `A_k(f)·conj(A_k(g))` summed over `k`, for one sample `ξ`.
fn l_sum(psi: &Generator, xi: f64, ks: (i64, i64), f: &FiberVector, g: &FiberVector) -> Result<C64> {
    let mut acc = ZERO;
    for k in ks.0..=ks.1 {
        let x = 2f64.powi(k as i32) * xi;
        let terms: Vec<_> = match psi {
            Generator::Lift(lift) => lift.term_at(x)?.into_iter().collect(),
            Generator::Atoms(a) => a.atoms.iter().filter(|t| t.radial.contains(x)).copied().collect(),
        };
        let (mut af, mut ag) = (ZERO, ZERO);
        for t in &terms {
            let v = (t.coeff * t.radial.eval(x)).conj();
            af += v * f.inner_factor(&t.fiber)?;
            ag += v * g.inner_factor(&t.fiber)?;
        }
        acc += af * ag.conj();
    }
    Ok(acc)
}

fn q_sum(lift: &LazyShannonLift, xi: f64, ks: (i64, i64), f: &FiberVector, g: &FiberVector) -> Result<C64> {
    let q = lift.lifted_q();
    let r = xi.sqrt();
    let mut acc = ZERO;
    for k in ks.0..=ks.1 {
        let rho = half_power_of_two(k) * r;
        let Some(t) = q.term_at(rho)? else { continue };
        let v = (t.coeff * t.radial.eval(rho)).conj();
        let af = v * f.inner_factor(&t.fiber)?;
        let ag = v * g.inner_factor(&t.fiber)?;
        acc += af * ag.conj() * half_power_of_two(-k);
    }
    Ok(acc / (2.0 * r))
}

fn j_sum(kernel: &JKernel, xi: f64, ks: (i64, i64), f: &FiberVector, g: &FiberVector, tol: f64) -> Result<C64> {
    let r = xi.sqrt();
    let mut breaks = f.breaks();
    breaks.extend(g.breaks());
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    let (lo, hi) = (breaks[0], *breaks.last().expect("non-empty"));
    let freq = f.max_freq() + g.max_freq() + 1.0;
    let opts = QuadOptions::with_tol(tol);
    let mut acc = ZERO;
    for k in ks.0..=ks.1 {
        let rho = half_power_of_two(k) * r;
        if rho > 1.0 {
            continue;
        }
        // the k-weight is split over both factors so each integral stays O(1)
        let w = kernel.weight(k).sqrt();
        let integrand = |y: f64, out: &mut [C64]| {
            let kv = kernel.eval(r, rho, y).conj() * w;
            out[0] = kv * f.eval(y);
            out[1] = kv * g.eval(y);
        };
        let res = integrate_vec(&integrand, 2, lo, hi, &breaks, freq, &opts)?;
        acc += res.value[0] * res.value[1].conj();
    }
    Ok(acc)
}

/// Discrete isometry defect `max_ξ |κ⟨f,g⟩ − Σ_k …|` over the sample set and all `(f, g)` pairs.
pub fn discrete_isometry_defect(
    psi: &Generator,
    side: Side,
    pairs: &[(FiberVector, FiberVector)],
    xi_count: usize,
    tol: f64,
) -> Result<Report> {
    check_tol(tol)?;
    check_support(psi)?;
    let started = Instant::now();
    let lift = match (psi, side) {
        (Generator::Lift(l), _) => Some(l),
        (Generator::Atoms(_), Side::L) => None,
        _ => return Err(Error::Config("q-side and planar discrete checks need a Shannon lift generator".into())),
    };
    let fs: Vec<&FiberVector> = pairs.iter().flat_map(|(f, g)| [f, g]).collect();
    let top = match lift {
        Some(l) => nmax(l, &fs)?,
        None => match psi {
            Generator::Atoms(a) => a
                .atoms
                .iter()
                .map(|t| if t.radial.lo > 0.0 { (-t.radial.lo.log2()).ceil() as u64 + 1 } else { 60 })
                .max()
                .unwrap_or(1),
            Generator::Lift(_) => unreachable!(),
        },
    };
    let ks = (-(top as i64 + 2), 60);
    let samples = xi_samples(xi_count, top + 1);
    let kernel = match side {
        Side::J(case) => Some(JKernel::new(case, lift.expect("lift checked above"))?),
        _ => None,
    };
    let kappa = kernel.as_ref().map_or(1.0, |k| k.chain_constant());
    let work: Vec<(usize, f64)> = (0..pairs.len()).flat_map(|p| samples.iter().map(move |&x| (p, x))).collect();
    let per = try_par_map(&work, |&(p, xi)| {
        let (f, g) = &pairs[p];
        let want = f.inner(g) * kappa;
        let got = match side {
            Side::L => l_sum(psi, xi, ks, f, g)?,
            Side::Q => q_sum(lift.expect("lift"), xi, ks, f, g)?,
            Side::J(_) => j_sum(kernel.as_ref().expect("kernel"), xi, ks, f, g, tol * 1e-2)?,
        };
        Ok((want - got).norm())
    })?;
    let d = Defect::from_values(per);
    let case = side.label();
    Ok(Report::new(
        "discrete_isometry",
        &case,
        json!({"side": case, "pairs": pairs.len(), "xiSamples": samples.len(), "kRange": [ks.0, ks.1], "chainConstant": kappa}),
        &d,
        tol,
        started,
    )
    .with_notes(format!("golden-ratio samples plus band midpoints up to band {}", top + 1)))
}

/// Default `(f, g)` pairs: `e₀₀` with itself, an orthogonal pair, and random combinations.
pub fn default_pairs(domain: FiberDomain, seed: u64, bound: i64, random: usize) -> Vec<(FiberVector, FiberVector)> {
    let (e0, e1) = match domain {
        FiberDomain::Line => (FiberIndex::Line(0, 0), FiberIndex::Line(1, 0)),
        FiberDomain::Circle => (FiberIndex::Circle(0), FiberIndex::Circle(1)),
    };
    let mut rng = rng_for(seed, "discrete_pairs");
    let mut out = vec![
        (FiberVector::basis(e0), FiberVector::basis(e0)),
        (FiberVector::basis(e0), FiberVector::basis(e1)),
    ];
    for _ in 0..random {
        out.push((FiberVector::random(&mut rng, domain, bound, 4), FiberVector::random(&mut rng, domain, bound, 4)));
    }
    out
}

/// An atom sum with one band term per `n ≤ depth` (exposed for the support-violation path).
pub fn shifted_generator(depth: u64, shift: f64) -> AtomSum {
    (1..=depth)
        .map(|n| {
            let f = band_factor(n);
            crate::function::TensorAtom::new(
                C64::new(1.0, 0.0),
                crate::function::RadialFactor::indicator(f.lo * shift, f.hi * shift),
                FiberFactor::cell(0, 0),
            )
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn l_side_exact() {
        let psi = Generator::Lift(LazyShannonLift::line());
        let pairs = default_pairs(FiberDomain::Line, 1, 2, 2);
        let r = discrete_isometry_defect(&psi, Side::L, &pairs, 64, 1e-12).unwrap();
        assert!(r.pass, "{}", r.summary_line());
    }

    #[test]
    fn orthogonal_pair_sums_to_zero() {
        let psi = Generator::Lift(LazyShannonLift::line());
        let f = FiberVector::basis(FiberIndex::Line(0, 0));
        let g = FiberVector::basis(FiberIndex::Line(0, 1));
        let s = l_sum(&psi, 0.3, (-5, 60), &f, &g).unwrap();
        assert_eq!(s, ZERO);
        let s = l_sum(&psi, 0.3, (-5, 60), &f, &f).unwrap();
        assert!((s - C64::new(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn q_side_matches() {
        let psi = Generator::Lift(LazyShannonLift::circle());
        let pairs = default_pairs(FiberDomain::Circle, 1, 3, 2);
        let r = discrete_isometry_defect(&psi, Side::Q, &pairs, 64, 1e-10).unwrap();
        assert!(r.pass, "{}", r.summary_line());
    }

    #[test]
    fn planar_kernels() {
        let line = Generator::Lift(LazyShannonLift::line());
        for case in [CaseTag::one(-0.5).unwrap(), CaseTag::two(), CaseTag::four(0.7).unwrap()] {
            let pairs = default_pairs(FiberDomain::Line, 2, 1, 1);
            let r = discrete_isometry_defect(&line, Side::J(case), &pairs, 16, 1e-10).unwrap();
            assert!(r.pass, "{}", r.summary_line());
        }
        let circle = Generator::Lift(LazyShannonLift::circle());
        let pairs = default_pairs(FiberDomain::Circle, 2, 2, 1);
        let r = discrete_isometry_defect(&circle, Side::J(CaseTag::three(0.7).unwrap()), &pairs, 16, 1e-10).unwrap();
        assert!(r.pass, "{}", r.summary_line());
    }

    #[test]
    fn support_violation_is_reported() {
        let psi = Generator::Atoms(shifted_generator(4, 1.5));
        let pairs = default_pairs(FiberDomain::Line, 1, 0, 0);
        assert!(matches!(
            discrete_isometry_defect(&psi, Side::L, &pairs, 8, 1e-12),
            Err(Error::SupportViolation(_))
        ));
        // the unshifted finite generator satisfies the hypothesis but misses bands, so the sum falls short
        let r = discrete_isometry_defect(&Generator::Atoms(shifted_generator(4, 1.0)), Side::L, &pairs, 8, 1e-12).unwrap();
        assert!(r.max_defect > 0.5 && !r.pass);
    }
}

//! Gram matrices of the lattice systems generated by Shannon lifts.
//!
//! The generator is truncated at band depth `N = max D(k,l)` over the fiber
//! box; every Gram entry then differs from its untruncated value by at most
//! the discarded band mass `2^{-N}`.

use std::f64::consts::PI;
use std::time::Instant;

use rand::Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{Error, Result};
use crate::function::{inner_product_exact, inner_product_quadrature, AtomSum, PointEvaluator, RadialWeight, C64};
use crate::group::{act_atoms, act_evaluator, lattice_element, to_q_parameters, CaseKind, CaseTag};
use crate::intertwine::{apply_u, apply_u_inv};
use crate::shannon::{fiber_box, generator_j, LazyShannonLift};

use super::report::{check_tol, try_par_map, Defect, Report};
use super::testfns::rng_for;

/// Inclusive lattice index box.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatticeBox {
    pub k: (i64, i64),
    pub m: (i64, i64),
}

impl LatticeBox {
    pub fn new(k: (i64, i64), m: (i64, i64)) -> Result<Self> {
        if k.0 > k.1 || m.0 > m.1 {
            return Err(Error::Config(format!("empty lattice box k={k:?} m={m:?}")));
        }
        Ok(LatticeBox { k, m })
    }

    pub fn indices(&self) -> Vec<(i64, i64)> {
        (self.k.0..=self.k.1).flat_map(|k| (self.m.0..=self.m.1).map(move |m| (k, m))).collect()
    }
}

/// Band depth needed for a fiber box `|k|,|l| ≤ b` (line) or `|l| ≤ b` (circle).
pub fn truncation_depth(lift: &LazyShannonLift, fiber_bound: i64) -> Result<u64> {
    lift.depth_for(&fiber_box(lift.domain(), (-fiber_bound, fiber_bound), (-fiber_bound, fiber_bound)))
}

/// Dense Hermitian matrix in row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct Gram {
    pub n: usize,
    pub entries: Vec<C64>,
}

impl Gram {
    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.entries[i * self.n + j]
    }

    /// `max |G - c·I|`.
    pub fn identity_defect(&self, c: f64) -> Defect {
        Defect::from_values((0..self.n * self.n).map(|p| {
            let (i, j) = (p / self.n, p % self.n);
            let target = if i == j { c } else { 0.0 };
            (self.entries[p] - C64::new(target, 0.0)).norm()
        }))
    }

    /// `max |G - c·H|` entrywise.
    pub fn distance(&self, other: &Gram, c: f64) -> Result<Defect> {
        if self.n != other.n {
            return Err(Error::Config(format!("Gram sizes differ: {} vs {}", self.n, other.n)));
        }
        Ok(Defect::from_values(self.entries.iter().zip(&other.entries).map(|(a, b)| (a - b * c).norm())))
    }
}

/// Gram matrix of a finite family under exact weighted inner products.
pub fn exact_gram(family: &[AtomSum], weight: RadialWeight) -> Result<Gram> {
    let n = family.len();
    let rows = try_par_map(&(0..n).collect::<Vec<_>>(), |&i| {
        (i..n).map(|j| inner_product_exact(&family[i], &family[j], weight)).collect::<Result<Vec<_>>>()
    })?;
    let mut entries = vec![C64::new(0.0, 0.0); n * n];
    for (i, row) in rows.into_iter().enumerate() {
        for (off, v) in row.into_iter().enumerate() {
            let j = i + off;
            entries[i * n + j] = v;
            entries[j * n + i] = v.conj();
        }
    }
    Ok(Gram { n, entries })
}

/// `{μ⁽ˡ⁾_λ ψ_N}` over the box, `ψ_N` the depth-`N` truncation.
pub fn l_system(lift: &LazyShannonLift, depth: u64, lattice: &LatticeBox) -> Result<Vec<AtomSum>> {
    let psi = lift.band_truncation(depth)?;
    let l = CaseTag::l();
    lattice.indices().iter().map(|&(k, m)| act_atoms(&l, &lattice_element(&l, k, m), &psi)).collect()
}

/// `{μ⁽q⁾_{τ(λ)} Uψ_N}` for the lattice of `case` (Q itself, or a planar case through `τ`).
pub fn q_system(lift: &LazyShannonLift, depth: u64, lattice: &LatticeBox, case: &CaseTag) -> Result<Vec<AtomSum>> {
    let upsi = apply_u(&lift.band_truncation(depth)?)?;
    let q = CaseTag::q();
    lattice
        .indices()
        .iter()
        .map(|&(k, m)| {
            let g = match case.kind {
                CaseKind::Q => lattice_element(&q, k, m),
                _ => to_q_parameters(case, &lattice_element(case, k, m))?,
            };
            act_atoms(&q, &g, &upsi)
        })
        .collect()
}

fn params(lift: &LazyShannonLift, lattice: &LatticeBox, fiber_bound: i64, depth: u64) -> serde_json::Value {
    json!({
        "generator": if lift.domain() == crate::function::FiberDomain::Line { "DR" } else { "DT" },
        "k": [lattice.k.0, lattice.k.1],
        "m": [lattice.m.0, lattice.m.1],
        "fiberBox": fiber_bound,
        "depth": depth,
    })
}

/// Gram of `{μ⁽ˡ⁾_λ ψ^D}` against the identity, exact inner products.
pub fn gram_l(lift: &LazyShannonLift, lattice: &LatticeBox, fiber_bound: i64, tol: f64) -> Result<(Report, Gram)> {
    check_tol(tol)?;
    let started = Instant::now();
    let depth = truncation_depth(lift, fiber_bound)?;
    let gram = exact_gram(&l_system(lift, depth, lattice)?, RadialWeight::LEBESGUE)?;
    let d = gram.identity_defect(1.0);
    let report = Report::new("gram", "L", params(lift, lattice, fiber_bound, depth), &d, tol, started)
        .with_notes(format!("exact inner products; generator truncated at band {depth}, tail mass 2^-{depth}"));
    Ok((report, gram))
}

/// q-side Gram through the `U` transfer, compared entrywise with the l-side Gram.
pub fn gram_q_transfer(lift: &LazyShannonLift, lattice: &LatticeBox, fiber_bound: i64, tol: f64) -> Result<(Report, Gram, Vec<AtomSum>)> {
    check_tol(tol)?;
    let started = Instant::now();
    let depth = truncation_depth(lift, fiber_bound)?;
    let q_family = q_system(lift, depth, lattice, &CaseTag::q())?;
    let pulled = q_family.iter().map(apply_u_inv).collect::<Result<Vec<_>>>()?;
    let gq = exact_gram(&pulled, RadialWeight::LEBESGUE)?;
    let gl = exact_gram(&l_system(lift, depth, lattice)?, RadialWeight::LEBESGUE)?;
    let d = gq.distance(&gl, 1.0)?;
    let report = Report::new("gram_q_transfer", "Q", params(lift, lattice, fiber_bound, depth), &d, tol, started)
        .with_notes("q-side elements pulled back through U^-1; compared entrywise with the l-side Gram");
    Ok((report, gq, q_family))
}

/// Quadrature spot checks of q-side Gram entries against the l-side Gram.
pub fn gram_q_spot_checks(
    lift: &LazyShannonLift,
    lattice: &LatticeBox,
    fiber_bound: i64,
    checks: usize,
    seed: u64,
    tol: f64,
) -> Result<Report> {
    check_tol(tol)?;
    let started = Instant::now();
    let depth = truncation_depth(lift, fiber_bound)?;
    let q_family = q_system(lift, depth, lattice, &CaseTag::q())?;
    let l_family = l_system(lift, depth, lattice)?;
    let n = q_family.len();
    let mut rng = rng_for(seed, "gram_q_spot");
    let mut picks: Vec<(usize, usize)> = vec![(0, 0)];
    while picks.len() < checks.max(1) {
        let i = rng.gen_range(0..n);
        // half the picks on nearby indices, where off-diagonal overlaps are largest
        let j = if picks.len() % 2 == 0 { rng.gen_range(0..n) } else { (i + 1).min(n - 1) };
        picks.push((i.min(j), i.max(j)));
    }
    picks.truncate(checks);
    let per = try_par_map(&picks, |&(i, j)| {
        let a = PointEvaluator::from_atoms(&q_family[i])?;
        let b = PointEvaluator::from_atoms(&q_family[j])?;
        let (v, _) = inner_product_quadrature(&a, &b, RadialWeight::LEBESGUE, tol * 1e-2)?;
        let exact = inner_product_exact(&l_family[i], &l_family[j], RadialWeight::LEBESGUE)?;
        Ok((v - exact).norm())
    })?;
    let d = Defect::from_values(per);
    Ok(Report::new(
        "gram_q_spot",
        "Q",
        json!({"checks": picks.len(), "pairs": picks, "fiberBox": fiber_bound, "depth": depth, "seed": seed}),
        &d,
        tol,
        started,
    )
    .with_notes("adaptive quadrature of q-side inner products vs exact l-side entries"))
}

/// 𝒥-side Gram: `τ(Λ^𝒥)` elements on the q-side compared with the q-lattice Gram,
/// plus native-coordinate quadrature spot checks of `⟨μ^𝒥_λ ψ^{𝒥,D}, μ^𝒥_λ' ψ^{𝒥,D}⟩`.
#[allow(clippy::too_many_arguments)]
pub fn gram_j(
    case: &CaseTag,
    lift: &LazyShannonLift,
    lattice: &LatticeBox,
    fiber_bound: i64,
    checks: usize,
    seed: u64,
    transfer_tol: f64,
    spot_tol: f64,
) -> Result<(Report, Report)> {
    check_tol(transfer_tol)?;
    check_tol(spot_tol)?;
    if !case.kind.is_planar() {
        return Err(Error::CaseMismatch(format!("gram_j needs a planar case, got {}", case.kind)));
    }
    let started = Instant::now();
    let depth = truncation_depth(lift, fiber_bound)?;
    let qj = q_system(lift, depth, lattice, case)?;
    let qq = q_system(lift, depth, lattice, &CaseTag::q())?;
    let pull = |fam: &[AtomSum]| fam.iter().map(apply_u_inv).collect::<Result<Vec<_>>>();
    let gj = exact_gram(&pull(&qj)?, RadialWeight::LEBESGUE)?;
    let gq = exact_gram(&pull(&qq)?, RadialWeight::LEBESGUE)?;
    let d = gj.distance(&gq, 1.0)?;
    let mut p = params(lift, lattice, fiber_bound, depth);
    p["case"] = json!(case);
    let transfer = Report::new("gram_j_transfer", &case.label(), p.clone(), &d, transfer_tol, started)
        .with_notes("tau(lattice) elements on the q-side vs the q-lattice Gram");

    let started = Instant::now();
    let psi = generator_j(case, lift, Some(depth))?;
    let idx = lattice.indices();
    let mut rng = rng_for(seed, &format!("gram_j_spot/{}", case.label()));
    let picks: Vec<(usize, usize)> = (0..checks)
        .map(|c| {
            let i = rng.gen_range(0..idx.len());
            let j = if c % 2 == 0 { i } else { rng.gen_range(0..idx.len()) };
            (i.min(j), i.max(j))
        })
        .collect();
    // polar measure 2πr dr dθ (θ in turns), hyperbolic r dr dθ, Cartesian otherwise
    let (weight, scale) = match case.kind {
        CaseKind::III => (RadialWeight(1.0), 2.0 * PI),
        CaseKind::IV => (RadialWeight(1.0), 1.0),
        _ => (RadialWeight::LEBESGUE, 1.0),
    };
    let per = try_par_map(&picks, |&(i, j)| {
        let (ki, mi) = idx[i];
        let (kj, mj) = idx[j];
        let a = act_evaluator(case, &lattice_element(case, ki, mi), &psi)?;
        let b = act_evaluator(case, &lattice_element(case, kj, mj), &psi)?;
        let (v, _) = inner_product_quadrature(&a, &b, weight, spot_tol * 1e-2)?;
        Ok((v * scale - gq.get(i, j)).norm())
    })?;
    let spot = Report::new("gram_j_spot", &case.label(), json!({"case": case, "pairs": picks, "depth": depth, "seed": seed}), &Defect::from_values(per), spot_tol, started)
        .with_notes("native-coordinate quadrature of the case's own lattice system vs the q-side Gram");
    Ok((transfer, spot))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::function::{RadialFactor, TensorAtom};

    #[test]
    fn orthonormal_basis_small_box() {
        let lift = LazyShannonLift::line();
        let b = LatticeBox::new((-1, 1), (-2, 2)).unwrap();
        // fiber box |.| <= 1 needs bands up to D(-1,-1) = 13; the tail mass 2^-13 is the only deviation
        let depth = truncation_depth(&lift, 1).unwrap();
        assert_eq!(depth, 13);
        let tail = 2f64.powi(-(depth as i32));
        let (r, g) = gram_l(&lift, &b, 1, tail * (1.0 + 1e-9)).unwrap();
        assert!(r.pass, "{}", r.summary_line());
        assert_eq!(g.n, 15);
        assert!((g.get(0, 0).re - (1.0 - tail)).abs() < 1e-15);
    }

    #[test]
    fn shallow_truncation_shows_its_tail() {
        // depth 1 keeps only f_1 ⊗ e_{0,0}: norms are exactly 1/2
        let lift = LazyShannonLift::line();
        let b = LatticeBox::new((0, 0), (0, 0)).unwrap();
        let g = exact_gram(&l_system(&lift, 1, &b).unwrap(), RadialWeight::LEBESGUE).unwrap();
        assert!((g.get(0, 0).re - 0.5).abs() < 1e-16);
    }

    #[test]
    fn trivial_system() {
        let a = AtomSum::new(vec![TensorAtom::radial_only(C64::new(1.0, 0.0), RadialFactor::indicator(1.0, 2.0))]);
        let g = exact_gram(&[a], RadialWeight::LEBESGUE).unwrap();
        assert_eq!(g.identity_defect(1.0).max, 0.0);
    }

    #[test]
    fn q_transfer_matches_l_side() {
        let lift = LazyShannonLift::circle();
        let b = LatticeBox::new((-1, 1), (-2, 2)).unwrap();
        let (r, _, _) = gram_q_transfer(&lift, &b, 2, 1e-12).unwrap();
        assert!(r.pass, "{}", r.summary_line());
        let s = gram_q_spot_checks(&lift, &b, 1, 3, 9, 1e-8).unwrap();
        assert!(s.pass, "{}", s.summary_line());
    }

    #[test]
    fn j_side_case_two() {
        let lift = LazyShannonLift::line();
        let b = LatticeBox::new((0, 1), (-1, 1)).unwrap();
        let (t, s) = gram_j(&CaseTag::two(), &lift, &b, 0, 2, 4, 1e-10, 1e-8).unwrap();
        assert!(t.pass, "{}", t.summary_line());
        assert!(s.pass, "{}", s.summary_line());
    }
}

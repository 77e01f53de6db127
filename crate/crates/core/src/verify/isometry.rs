//! Continuous isometry criterion: the operator `g ↦ (s ↦ ∫ ψ̄(s,y) g(y) dκ(y))`
//! has Gram `c_f²·I = (ln 2)·I` on the fiber basis under the codomain weight.

use std::f64::consts::LN_2;
use std::time::Instant;

use serde_json::json;

use crate::error::{Error, Result};
use crate::function::{AtomSum, FiberDomain, RadialWeight, TensorAtom, C64};
use crate::intertwine::apply_u;
use crate::shannon::{fiber_box, FiberIndex, LazyShannonLift};

use super::gram::{exact_gram, Gram};
use super::report::{check_tol, Report};

/// Which one-dimensional representation the generator lives on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rep {
    L,
    Q,
}

impl Rep {
    pub fn weight(self) -> RadialWeight {
        match self {
            Rep::L => RadialWeight::HAAR_L,
            Rep::Q => RadialWeight::HAAR_Q,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Rep::L => "L",
            Rep::Q => "Q",
        }
    }
}

/// A generating function: a Shannon lift (transported by `U` on the q-side)
/// or an explicit finite atom sum on the representation's own side.
#[derive(Debug, Clone)]
pub enum Generator {
    Lift(LazyShannonLift),
    Atoms(AtomSum),
}

impl Generator {
    pub fn domain(&self) -> Option<FiberDomain> {
        match self {
            Generator::Lift(l) => Some(l.domain()),
            Generator::Atoms(a) => a.fiber_domain(),
        }
    }

    /// Terms whose fibers can meet the given basis elements.
    fn terms(&self, rep: Rep, basis: &[FiberIndex]) -> Result<Vec<TensorAtom>> {
        match self {
            Generator::Atoms(a) => Ok(a.atoms.clone()),
            Generator::Lift(lift) => {
                // distinct basis cells are orthogonal, so bands beyond max D(basis) cannot contribute
                let depth = lift.depth_for(basis)?;
                let psi = lift.band_truncation(depth)?;
                Ok(match rep {
                    Rep::L => psi.atoms,
                    Rep::Q => apply_u(&psi)?.atoms,
                })
            }
        }
    }
}

/// `T e_i` as radial-only atom sums, one per basis element.
pub fn operator_images(psi: &Generator, rep: Rep, basis: &[FiberIndex]) -> Result<Vec<AtomSum>> {
    let terms = psi.terms(rep, basis)?;
    basis
        .iter()
        .map(|&i| {
            let e = i.factor();
            let mut out = AtomSum::zero();
            for t in &terms {
                let c = e.inner(&t.fiber)?;
                if c != C64::new(0.0, 0.0) {
                    let conj = t.conj();
                    out.push(TensorAtom::radial_only(conj.coeff * c, conj.radial));
                }
            }
            Ok(out)
        })
        .collect()
}

/// Gram of the operator on the fiber basis box `|k|,|l| ≤ b` (or `|l| ≤ b`), against `ln 2 · I`.
pub fn isometry_defect_continuous(psi: &Generator, rep: Rep, fiber_bound: i64, tol: f64) -> Result<(Report, Gram)> {
    check_tol(tol)?;
    let started = Instant::now();
    let domain = psi
        .domain()
        .ok_or_else(|| Error::InvalidFunction("generator has no fiber variable".into()))?;
    let basis = fiber_box(domain, (-fiber_bound, fiber_bound), (-fiber_bound, fiber_bound));
    let images = operator_images(psi, rep, &basis)?;
    let gram = exact_gram(&images, rep.weight())?;
    let d = gram.identity_defect(LN_2);
    let report = Report::new(
        "isometry",
        rep.label(),
        json!({"rep": rep.label(), "fiberBox": fiber_bound, "basis": basis.len(), "weight": rep.weight().exponent()}),
        &d,
        tol,
        started,
    )
    .with_notes("operator Gram on the fiber basis vs (ln 2) I, exact inner products");
    Ok((report, gram))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::function::{FiberFactor, RadialFactor};

    #[test]
    fn lift_l_side() {
        let (r, g) = isometry_defect_continuous(&Generator::Lift(LazyShannonLift::line()), Rep::L, 3, 1e-12).unwrap();
        assert!(r.pass, "{}", r.summary_line());
        assert_eq!(g.n, 49);
    }

    #[test]
    fn lift_q_side_matches_l_side() {
        let psi = Generator::Lift(LazyShannonLift::line());
        let (rq, gq) = isometry_defect_continuous(&psi, Rep::Q, 2, 1e-12).unwrap();
        let (_, gl) = isometry_defect_continuous(&psi, Rep::L, 2, 1e-12).unwrap();
        assert!(rq.pass, "{}", rq.summary_line());
        assert!(gq.distance(&gl, 1.0).unwrap().max <= 1e-14);
        let c = isometry_defect_continuous(&Generator::Lift(LazyShannonLift::circle()), Rep::Q, 3, 1e-12).unwrap();
        assert!(c.0.pass);
    }

    #[test]
    fn single_atom_is_rank_one() {
        let a = AtomSum::new(vec![TensorAtom::new(C64::new(1.0, 0.0), RadialFactor::indicator(0.5, 1.0), FiberFactor::cell(0, 0))]);
        let (r, g) = isometry_defect_continuous(&Generator::Atoms(a), Rep::L, 1, 1e-12).unwrap();
        let center = 4; // index of e_{0,0} in the 3x3 box
        for i in 0..g.n {
            for j in 0..g.n {
                let want = if i == center && j == center { LN_2 } else { 0.0 };
                assert!((g.get(i, j) - C64::new(want, 0.0)).norm() < 1e-15);
            }
        }
        // far from (ln 2) I, so the report fails honestly
        assert!(!r.pass);
    }
}

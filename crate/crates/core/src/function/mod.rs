//! Functions on `ℝ₊ × Y` (Y a line or a circle): closed-form atoms, pointwise
//! evaluators, and their weighted inner products.

mod atom;
mod evaluator;
mod exact;
pub mod json;
pub mod quadrature;

pub use atom::{
    cis_turns, AtomAction, AtomSum, FiberDomain, FiberFactor, RadialFactor, RadialWeight, TensorAtom, C64,
};
pub use evaluator::{inner_product_quadrature, norm_quadrature, Chart, PointEvaluator, Rule, SupportBox};
pub use exact::{atom_inner_exact, inner_product_exact, norm_exact, radial_integral};

/// Applies a single action to every atom.
pub fn transform_atom(atom: &TensorAtom, action: AtomAction) -> crate::Result<TensorAtom> {
    atom.transform(action)
}

/// `eval_atom(atom, (r, y))`.
pub fn eval_atom(atom: &TensorAtom, r: f64, y: f64) -> C64 {
    atom.eval(r, y)
}

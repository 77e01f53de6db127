//! Shannon system, fiber bases, band indicators and the lifted generating
//! functions `ψ^D = Σ_n f_n ⊗ e_{D⁻¹(n)}`.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::sync::Arc;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::function::{
    AtomAction, AtomSum, Chart, FiberDomain, FiberFactor, PointEvaluator, RadialFactor, SupportBox, TensorAtom, C64,
};
use crate::group::{half_power_of_two, CaseKind, CaseTag};
use crate::intertwine::{apply_u, apply_u_j_inv};

/// `0, 1, -1, 2, -2, … ↦ 0, 1, 2, 3, 4, …`
pub fn zig(k: i64) -> u64 {
    if k > 0 {
        2 * k as u64 - 1
    } else {
        2 * k.unsigned_abs()
    }
}

pub fn unzig(n: u64) -> i64 {
    if n % 2 == 1 {
        n.div_ceil(2) as i64
    } else {
        -((n / 2) as i64)
    }
}

pub fn cantor_pair(a: u64, b: u64) -> u64 {
    (a + b) * (a + b + 1) / 2 + b
}

pub fn cantor_unpair(z: u64) -> (u64, u64) {
    let mut w = (((8.0 * z as f64 + 1.0).sqrt() - 1.0) / 2.0).floor() as u64;
    while w * (w + 1) / 2 > z {
        w -= 1;
    }
    while (w + 1) * (w + 2) / 2 <= z {
        w += 1;
    }
    let b = z - w * (w + 1) / 2;
    (w - b, b)
}

pub fn canonical_d_r(k: i64, l: i64) -> u64 {
    cantor_pair(zig(k), zig(l)) + 1
}

pub fn canonical_d_r_inv(n: u64) -> Result<(i64, i64)> {
    if n < 1 {
        return Err(Error::RangeError(format!("band index n={n} must be >= 1")));
    }
    let (a, b) = cantor_unpair(n - 1);
    Ok((unzig(a), unzig(b)))
}

pub fn canonical_d_t(l: i64) -> u64 {
    zig(l) + 1
}

pub fn canonical_d_t_inv(n: u64) -> Result<i64> {
    if n < 1 {
        return Err(Error::RangeError(format!("band index n={n} must be >= 1")));
    }
    Ok(unzig(n - 1))
}

/// Index of a fiber basis element: `e_{k,l}` on the line or `e_{0,l}` on the circle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FiberIndex {
    Line(i64, i64),
    Circle(i64),
}

impl FiberIndex {
    pub fn factor(self) -> FiberFactor {
        match self {
            FiberIndex::Line(k, l) => FiberFactor::cell(k, l),
            FiberIndex::Circle(l) => FiberFactor::Circle { freq: l },
        }
    }

    pub fn domain(self) -> FiberDomain {
        match self {
            FiberIndex::Line(..) => FiberDomain::Line,
            FiberIndex::Circle(_) => FiberDomain::Circle,
        }
    }

    /// The basis element as a radial-free atom factor paired with `coeff`.
    pub fn element(self) -> FiberFactor {
        self.factor()
    }
}

impl fmt::Display for FiberIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FiberIndex::Line(k, l) => write!(f, "({k},{l})"),
            FiberIndex::Circle(l) => write!(f, "({l})"),
        }
    }
}

/// Fiber indices in a box: `|k| ∈ k_range, l ∈ l_range` on the line, `l ∈ l_range` on the circle.
pub fn fiber_box(domain: FiberDomain, k_range: (i64, i64), l_range: (i64, i64)) -> Vec<FiberIndex> {
    match domain {
        FiberDomain::Line => (k_range.0..=k_range.1)
            .flat_map(|k| (l_range.0..=l_range.1).map(move |l| FiberIndex::Line(k, l)))
            .collect(),
        FiberDomain::Circle => (l_range.0..=l_range.1).map(FiberIndex::Circle).collect(),
    }
}

/// A bijection between fiber basis indices and band indices `n ≥ 1`.
pub trait Bijection: Send + Sync + fmt::Debug {
    fn domain(&self) -> FiberDomain;
    fn index(&self, idx: FiberIndex) -> Result<u64>;
    fn fiber_of(&self, n: u64) -> Result<FiberIndex>;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct CanonicalDR;

#[derive(Debug, Clone, Copy, Default)]
pub struct CanonicalDT;

impl Bijection for CanonicalDR {
    fn domain(&self) -> FiberDomain {
        FiberDomain::Line
    }
    fn index(&self, idx: FiberIndex) -> Result<u64> {
        match idx {
            FiberIndex::Line(k, l) => Ok(canonical_d_r(k, l)),
            other => Err(Error::CaseMismatch(format!("line bijection given circle index {other}"))),
        }
    }
    fn fiber_of(&self, n: u64) -> Result<FiberIndex> {
        canonical_d_r_inv(n).map(|(k, l)| FiberIndex::Line(k, l))
    }
}

impl Bijection for CanonicalDT {
    fn domain(&self) -> FiberDomain {
        FiberDomain::Circle
    }
    fn index(&self, idx: FiberIndex) -> Result<u64> {
        match idx {
            FiberIndex::Circle(l) => Ok(canonical_d_t(l)),
            other => Err(Error::CaseMismatch(format!("circle bijection given line index {other}"))),
        }
    }
    fn fiber_of(&self, n: u64) -> Result<FiberIndex> {
        canonical_d_t_inv(n).map(FiberIndex::Circle)
    }
}

/// User-supplied bijection restricted to a declared box.
#[derive(Debug, Clone)]
pub struct TableBijection {
    domain: FiberDomain,
    forward: BTreeMap<FiberIndex, u64>,
    backward: BTreeMap<u64, FiberIndex>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct BijectionFile {
    #[serde(rename = "schemaVersion")]
    schema_version: u32,
    #[serde(rename = "box")]
    bx: BoxSpec,
    pairs: Vec<(Vec<i64>, u64)>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct BoxSpec {
    #[serde(default)]
    k: Option<(i64, i64)>,
    l: (i64, i64),
}

impl TableBijection {
    /// Parses `{"schemaVersion":1,"box":{"k":[a,b],"l":[c,d]},"pairs":[[[k,l],n],…]}`;
    /// omit `k` (and give `[l]` keys) for the circle.
    pub fn parse(text: &str) -> Result<Self> {
        let file: BijectionFile = serde_json::from_str(text)?;
        if file.schema_version != 1 {
            return Err(Error::Config(format!("bijection schemaVersion {} unsupported", file.schema_version)));
        }
        let domain = if file.bx.k.is_some() { FiberDomain::Line } else { FiberDomain::Circle };
        let expected: HashSet<FiberIndex> =
            fiber_box(domain, file.bx.k.unwrap_or((0, 0)), file.bx.l).into_iter().collect();
        let mut forward = BTreeMap::new();
        let mut backward = BTreeMap::new();
        for (i, (key, n)) in file.pairs.iter().enumerate() {
            let idx = match (domain, key.as_slice()) {
                (FiberDomain::Line, [k, l]) => FiberIndex::Line(*k, *l),
                (FiberDomain::Circle, [l]) => FiberIndex::Circle(*l),
                _ => return Err(Error::Config(format!("pairs[{i}]: key {key:?} does not match the box"))),
            };
            if *n < 1 {
                return Err(Error::Config(format!("pairs[{i}]: n must be >= 1")));
            }
            if !expected.contains(&idx) {
                return Err(Error::Config(format!("pairs[{i}]: {idx} lies outside the declared box")));
            }
            if forward.insert(idx, *n).is_some() {
                return Err(Error::Config(format!("pairs[{i}]: {idx} listed twice")));
            }
            if let Some(prev) = backward.insert(*n, idx) {
                return Err(Error::Config(format!("pairs[{i}]: n={n} already used by {prev}; map is not injective")));
            }
        }
        if forward.len() != expected.len() {
            return Err(Error::Config(format!(
                "bijection covers {} of {} box entries",
                forward.len(),
                expected.len()
            )));
        }
        Ok(TableBijection { domain, forward, backward })
    }
}

impl Bijection for TableBijection {
    fn domain(&self) -> FiberDomain {
        self.domain
    }
    fn index(&self, idx: FiberIndex) -> Result<u64> {
        self.forward
            .get(&idx)
            .copied()
            .ok_or_else(|| Error::RangeError(format!("{idx} outside the bijection table")))
    }
    fn fiber_of(&self, n: u64) -> Result<FiberIndex> {
        self.backward
            .get(&n)
            .copied()
            .ok_or_else(|| Error::RangeError(format!("n={n} outside the bijection table")))
    }
}

/// `ψ^S_{(k,m)}(ξ) = 2^{k/2} 1_(1,2](2^k ξ) e^{2πi 2^k m ξ}`.
pub fn shannon_atom(k: i64, m: i64) -> TensorAtom {
    let two_k = 2f64.powi(k as i32);
    TensorAtom::radial_only(
        C64::new(half_power_of_two(k), 0.0),
        RadialFactor::indicator(1.0 / two_k, 2.0 / two_k).with_lin(two_k * m as f64),
    )
}

/// `f_n = 1_(2^{-n}, 2^{-n+1}]`.
pub fn band_factor(n: u64) -> RadialFactor {
    let lo = 2f64.powi(-(n as i32));
    RadialFactor::indicator(lo, 2.0 * lo)
}

/// The `n ≥ 1` with `ξ ∈ (2^{-n}, 2^{-n+1}]`, or `None` when `ξ ∉ (0,1]`.
pub fn band_index(xi: f64) -> Option<u64> {
    if !(xi > 0.0 && xi <= 1.0) {
        return None;
    }
    let mut n = (-xi.log2()).ceil().max(1.0) as i32;
    while 2f64.powi(-n) >= xi {
        n += 1;
    }
    while n > 1 && 2f64.powi(1 - n) < xi {
        n -= 1;
    }
    Some(n as u64)
}

/// `ψ^D`, indexed lazily: exactly one term per dyadic band of `(0,1]`.
#[derive(Debug, Clone)]
pub struct LazyShannonLift {
    bijection: Arc<dyn Bijection>,
}

impl LazyShannonLift {
    pub fn new(bijection: Arc<dyn Bijection>) -> Self {
        LazyShannonLift { bijection }
    }

    /// `ψ^{D_ℝ}` with the canonical bijection.
    pub fn line() -> Self {
        LazyShannonLift::new(Arc::new(CanonicalDR))
    }

    /// `ψ^{D_𝕋}` with the canonical bijection.
    pub fn circle() -> Self {
        LazyShannonLift::new(Arc::new(CanonicalDT))
    }

    pub fn domain(&self) -> FiberDomain {
        self.bijection.domain()
    }

    pub fn bijection(&self) -> &dyn Bijection {
        self.bijection.as_ref()
    }

    /// `f_n ⊗ e_{D⁻¹(n)}`.
    pub fn band_term(&self, n: u64) -> Result<TensorAtom> {
        let idx = self.bijection.fiber_of(n)?;
        Ok(TensorAtom::new(C64::new(1.0, 0.0), band_factor(n), idx.factor()))
    }

    /// The unique term covering `ξ`, or `None` outside `(0,1]`.
    pub fn term_at(&self, xi: f64) -> Result<Option<TensorAtom>> {
        match band_index(xi) {
            Some(n) => self.band_term(n).map(Some),
            None => Ok(None),
        }
    }

    pub fn eval(&self, xi: f64, y: f64) -> C64 {
        match self.term_at(xi) {
            Ok(Some(a)) => a.eval(xi, y),
            _ => C64::new(0.0, 0.0),
        }
    }

    /// `S_N = Σ_{|k|,|l| ≤ N} f_{D(k,l)} ⊗ e_{k,l}` (line) or `Σ_{|l| ≤ N}` (circle).
    pub fn partial_sum(&self, big_n: i64) -> Result<AtomSum> {
        let idx = fiber_box(self.domain(), (-big_n, big_n), (-big_n, big_n));
        idx.into_iter()
            .map(|i| {
                let n = self.bijection.index(i)?;
                Ok(TensorAtom::new(C64::new(1.0, 0.0), band_factor(n), i.factor()))
            })
            .collect::<Result<Vec<_>>>()
            .map(AtomSum::new)
    }

    /// All terms with band index `n ≤ depth`.
    pub fn band_truncation(&self, depth: u64) -> Result<AtomSum> {
        (1..=depth).map(|n| self.band_term(n)).collect::<Result<Vec<_>>>().map(AtomSum::new)
    }

    /// Largest band index used by the fiber indices in `idx`.
    pub fn depth_for(&self, idx: &[FiberIndex]) -> Result<u64> {
        idx.iter().map(|&i| self.bijection.index(i)).try_fold(0, |m, n| n.map(|n| m.max(n)))
    }

    /// `Uψ^D`.
    pub fn lifted_q(&self) -> LazyQLift {
        LazyQLift { lift: self.clone() }
    }
}

/// `Uψ^D`, with unique-term lookup at `r` through `r² ∈ (2^{-n}, 2^{-n+1}]`.
#[derive(Debug, Clone)]
pub struct LazyQLift {
    lift: LazyShannonLift,
}

impl LazyQLift {
    pub fn source(&self) -> &LazyShannonLift {
        &self.lift
    }

    pub fn band_term(&self, n: u64) -> Result<TensorAtom> {
        self.lift.band_term(n)?.transform(AtomAction::SquareLift)
    }

    pub fn term_at(&self, r: f64) -> Result<Option<TensorAtom>> {
        let Some(n) = band_index(r * r) else {
            return Ok(None);
        };
        // the squared radius can sit an ulp across a band edge; settle on the
        // neighbour whose transformed interval actually contains r
        for cand in [n, n + 1, n.saturating_sub(1)] {
            if cand == 0 {
                continue;
            }
            let a = self.band_term(cand)?;
            if a.radial.contains(r) {
                return Ok(Some(a));
            }
        }
        Ok(None)
    }

    pub fn eval(&self, r: f64, y: f64) -> C64 {
        match self.term_at(r) {
            Ok(Some(a)) => a.eval(r, y),
            _ => C64::new(0.0, 0.0),
        }
    }

    pub fn band_truncation(&self, depth: u64) -> Result<AtomSum> {
        apply_u(&self.lift.band_truncation(depth)?)
    }

    /// Pointwise evaluator; with `depth`, only bands `n ≤ depth` are kept and the
    /// support box is bounded.
    pub fn evaluator(&self, depth: Option<u64>) -> Result<PointEvaluator> {
        let chart = match self.lift.domain() {
            FiberDomain::Line => Chart::HalfPlane,
            FiberDomain::Circle => Chart::Cylinder,
        };
        let (r_lo, second, rb, yb) = match depth {
            Some(d) => {
                let mut ylo = f64::INFINITY;
                let mut yhi = f64::NEG_INFINITY;
                let mut yb = Vec::new();
                for n in 1..=d {
                    if let FiberIndex::Line(k, _) = self.lift.bijection.fiber_of(n)? {
                        ylo = ylo.min(k as f64);
                        yhi = yhi.max(k as f64 + 1.0);
                        yb.push(k as f64);
                        yb.push(k as f64 + 1.0);
                    }
                }
                yb.sort_by(f64::total_cmp);
                yb.dedup();
                let rb: Vec<f64> = (0..=d).map(|n| band_factor(n.max(1)).lo.sqrt()).chain([1.0]).collect();
                let lo = band_factor(d).lo.sqrt();
                (lo, (ylo, yhi), rb, yb)
            }
            None => (0.0, (f64::NEG_INFINITY, f64::INFINITY), Vec::new(), Vec::new()),
        };
        let q = self.clone();
        let cut = r_lo;
        Ok(PointEvaluator::new(chart, SupportBox::new((r_lo, 1.0), second), move |r, y| {
            if r <= cut {
                return C64::new(0.0, 0.0);
            }
            q.eval(r, y)
        })
        .with_breaks(rb, yb))
    }
}

/// `ψ^{𝒥,D} = (U^𝒥)⁻¹ U ψ^D`, as an evaluator in the case's native chart.
pub fn generator_j(case: &CaseTag, lift: &LazyShannonLift, depth: Option<u64>) -> Result<PointEvaluator> {
    if !case.kind.is_planar() {
        return Err(Error::CaseMismatch(format!("case {} has no lifted generator", case.kind)));
    }
    let want = if case.kind == CaseKind::III { FiberDomain::Circle } else { FiberDomain::Line };
    if lift.domain() != want {
        return Err(Error::CaseMismatch(format!(
            "case {} needs a {:?} fiber, lift has {:?}",
            case.kind,
            want,
            lift.domain()
        )));
    }
    apply_u_j_inv(case, &lift.lifted_q().evaluator(depth)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::function::{inner_product_exact, RadialWeight};
    use crate::intertwine::CoordChart;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn bijection_examples() {
        assert_eq!(canonical_d_r(0, 0), 1);
        assert_eq!(canonical_d_r(1, 0), 2);
        assert_eq!(canonical_d_r_inv(2).unwrap(), (1, 0));
        assert!(matches!(canonical_d_r_inv(0), Err(Error::RangeError(_))));
        assert_eq!(canonical_d_t(0), 1);
        assert_eq!(canonical_d_t(-1), 3);
        assert_eq!(canonical_d_r(-2, -2), 85 - 44);
    }

    #[test]
    fn bijectivity() {
        let mut seen = HashSet::new();
        for k in -50..=50 {
            for l in -50..=50 {
                let n = canonical_d_r(k, l);
                assert!(seen.insert(n));
                assert_eq!(canonical_d_r_inv(n).unwrap(), (k, l));
            }
        }
        for n in 1..=10201u64 {
            let (k, l) = canonical_d_r_inv(n).unwrap();
            assert_eq!(canonical_d_r(k, l), n);
        }
        for n in 1..=1000u64 {
            assert_eq!(canonical_d_t(canonical_d_t_inv(n).unwrap()), n);
        }
    }

    #[test]
    fn shannon_atoms() {
        let a = shannon_atom(0, 0);
        assert_eq!((a.radial.lo, a.radial.hi, a.coeff.re), (1.0, 2.0, 1.0));
        let b = shannon_atom(1, 0);
        assert_eq!((b.radial.lo, b.radial.hi), (0.5, 1.0));
        assert_eq!(b.coeff.re, std::f64::consts::SQRT_2);
        for k in -3..=3 {
            for m in -3..=3 {
                for mp in -3..=3 {
                    let v = inner_product_exact(
                        &AtomSum::new(vec![shannon_atom(k, m)]),
                        &AtomSum::new(vec![shannon_atom(k, mp)]),
                        RadialWeight::LEBESGUE,
                    )
                    .unwrap();
                    let expect = if m == mp { 1.0 } else { 0.0 };
                    assert!((v - C64::new(expect, 0.0)).norm() < 1e-15, "{k} {m} {mp}: {v}");
                }
            }
        }
    }

    #[test]
    fn term_lookup_examples() {
        let lift = LazyShannonLift::line();
        let t = lift.term_at(0.75).unwrap().unwrap();
        assert_eq!((t.radial.lo, t.radial.hi), (0.5, 1.0));
        assert_eq!(t.fiber, FiberFactor::cell(0, 0));
        let t = lift.term_at(0.3).unwrap().unwrap();
        assert_eq!((t.radial.lo, t.radial.hi), (0.25, 0.5));
        assert_eq!(t.fiber, FiberFactor::cell(1, 0));
        assert!(lift.term_at(1.5).unwrap().is_none());
        assert_eq!(band_index(1.0), Some(1));
        assert_eq!(band_index(0.5), Some(2));
        assert_eq!(band_index(2f64.powi(-30)), Some(31));
    }

    #[test]
    fn support_in_unit_interval() {
        let lift = LazyShannonLift::line();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..1000 {
            let xi = 1.0 + rng.gen_range(1e-12..100.0);
            assert!(lift.term_at(xi).unwrap().is_none());
        }
    }

    #[test]
    fn single_term_consistency() {
        let lift = LazyShannonLift::line();
        let big_n = 6;
        let s = lift.partial_sum(big_n).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut checked = 0;
        for _ in 0..1000 {
            let xi: f64 = rng.gen_range(1e-9..1.0);
            let t = lift.term_at(xi).unwrap().unwrap();
            let FiberFactor::Line { lo, freq, .. } = t.fiber else { panic!() };
            if lo.abs() > big_n as f64 || freq.abs() > big_n as f64 {
                continue;
            }
            checked += 1;
            for y in [lo + 0.25, lo + 0.5, lo + 0.9] {
                assert!((s.eval(xi, y) - t.eval(xi, y)).norm() < 1e-15);
            }
        }
        assert!(checked > 100);
    }

    #[test]
    fn norm_telescoping() {
        for lift in [LazyShannonLift::line(), LazyShannonLift::circle()] {
            for big_n in 0..=3 {
                let s = lift.partial_sum(big_n).unwrap();
                let got = inner_product_exact(&s, &s, RadialWeight::LEBESGUE).unwrap();
                let expect: f64 = fiber_box(lift.domain(), (-big_n, big_n), (-big_n, big_n))
                    .iter()
                    .map(|&i| 2f64.powi(-(lift.bijection().index(i).unwrap() as i32)))
                    .sum();
                assert!((got.re - expect).abs() <= 1e-15 && got.im == 0.0);
            }
        }
        let s0 = LazyShannonLift::line().partial_sum(0).unwrap();
        assert_eq!(s0.len(), 1);
        assert_eq!(inner_product_exact(&s0, &s0, RadialWeight::LEBESGUE).unwrap().re, 0.5);
        let c1 = LazyShannonLift::circle().partial_sum(1).unwrap();
        assert_eq!(c1.len(), 3);
        // D_T(−1), D_T(0), D_T(1) = 3, 1, 2
        let v = inner_product_exact(&c1, &c1, RadialWeight::LEBESGUE).unwrap().re;
        assert!((v - (0.125 + 0.5 + 0.25)).abs() < 1e-16);
    }

    #[test]
    fn q_lift_lookup() {
        let q = LazyShannonLift::line().lifted_q();
        let t = q.term_at(0.9).unwrap().unwrap();
        assert_eq!(t.radial.hi, 1.0);
        assert!((t.radial.lo - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-16);
        assert_eq!(t.radial.power, 0.5);
        assert!((t.eval(0.9, 0.5).re - (2.0 * 0.9f64).sqrt()).abs() < 1e-15);
        assert!(q.term_at(1.1).unwrap().is_none());
        let s = q.band_truncation(20).unwrap();
        let n = inner_product_exact(&s, &s, RadialWeight::LEBESGUE).unwrap().re;
        assert!((n - (1.0 - 2f64.powi(-20))).abs() < 1e-15);
    }

    #[test]
    fn generator_examples() {
        let lift = LazyShannonLift::line();
        let q = lift.lifted_q();
        let one = generator_j(&CaseTag::one(-1.0).unwrap(), &lift, None).unwrap();
        for (r, y) in [(0.9, 0.3), (0.6, 1.4), (0.2, -0.7), (0.05, 2.5)] {
            assert_eq!(one.eval(r, y), q.eval(r, y));
        }
        let two = generator_j(&CaseTag::two(), &lift, None).unwrap();
        let chart = CoordChart::new(CaseTag::two()).unwrap();
        let (y1, y2) = chart.forward((0.9, 0.0)).unwrap();
        assert!((y2 + 0.9f64.ln()).abs() < 1e-16);
        let expect = q.eval(y1, y2) / 0.9f64.sqrt();
        assert!((two.eval(0.9, 0.0) - expect).norm() < 1e-15);
        assert!(expect.norm() > 0.0);
        for case in [CaseTag::one(-0.5).unwrap(), CaseTag::two(), CaseTag::four(0.7).unwrap()] {
            let g = generator_j(&case, &lift, None).unwrap();
            for y in [-1.0, 0.0, 0.5, 3.0] {
                assert_eq!(g.eval(1.2, y), C64::new(0.0, 0.0));
            }
        }
        let g = generator_j(&CaseTag::three(0.7).unwrap(), &LazyShannonLift::circle(), None).unwrap();
        assert_eq!(g.eval(1.01, 0.3), C64::new(0.0, 0.0));
        assert!(generator_j(&CaseTag::three(0.7).unwrap(), &lift, None).is_err());
    }

    #[test]
    fn table_bijection() {
        let text = r#"{"schemaVersion":1,"box":{"k":[0,0],"l":[0,1]},"pairs":[[[0,0],2],[[0,1],1]]}"#;
        let b = TableBijection::parse(text).unwrap();
        assert_eq!(b.index(FiberIndex::Line(0, 1)).unwrap(), 1);
        assert_eq!(b.fiber_of(2).unwrap(), FiberIndex::Line(0, 0));
        assert!(b.fiber_of(3).is_err());
        let dup = r#"{"schemaVersion":1,"box":{"k":[0,0],"l":[0,1]},"pairs":[[[0,0],1],[[0,1],1]]}"#;
        assert!(TableBijection::parse(dup).is_err());
        let partial = r#"{"schemaVersion":1,"box":{"k":[0,0],"l":[0,1]},"pairs":[[[0,0],1]]}"#;
        assert!(TableBijection::parse(partial).is_err());
        let circle = r#"{"schemaVersion":1,"box":{"l":[-1,1]},"pairs":[[[-1],1],[[0],2],[[1],3]]}"#;
        assert_eq!(TableBijection::parse(circle).unwrap().domain(), FiberDomain::Circle);
    }
}

//! Adaptive Gauss–Kronrod (10/21) quadrature for complex, vector-valued integrands.

use std::cell::Cell;
use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::atom::C64;
use crate::error::{Error, Result};

/// Kronrod abscissae on [-1,1]; odd indices are the 10-point Gauss nodes.
const XGK: [f64; 11] = [
    0.995657163025808080735527280689003,
    0.973906528517171720077964012084452,
    0.930157491355708226001207180059508,
    0.865063366688984510732096688423493,
    0.780817726586416897063717578345042,
    0.679409568299024406234327365114874,
    0.562757134668604683339000099272694,
    0.433395394129247190799265943165784,
    0.294392862701460198131126603103866,
    0.148874338981631210884826001129720,
    0.000000000000000000000000000000000,
];

const WGK: [f64; 11] = [
    0.011694638867371874278064396062192,
    0.032558162307964727478818972459390,
    0.054755896574351996031381300244580,
    0.075039674810919952767043140916190,
    0.093125454583697605535065465083366,
    0.109387158802297641899210590325805,
    0.123491976262065851077208980029264,
    0.134709217311473325928054001771707,
    0.142775938577060080797094273138717,
    0.147739104901338491374841515972068,
    0.149445554002916905664936468389821,
];

/// Gauss weights for `XGK[1], XGK[3], …, XGK[9]`.
const WG: [f64; 5] = [
    0.066671344308688137593568809893332,
    0.149451349150580593145776339657697,
    0.219086362515982043995534934228163,
    0.269266719309996355091226921569469,
    0.295524224714752870173892994651338,
];

const NODES_PER_PANEL: f64 = 21.0;

#[derive(Debug, Clone, Copy)]
pub struct QuadOptions {
    /// Absolute tolerance on the reported error estimate.
    pub tol: f64,
    pub max_panels: usize,
    /// Minimum quadrature nodes per period of the fastest declared oscillation.
    pub nodes_per_period: f64,
}

impl Default for QuadOptions {
    fn default() -> Self {
        QuadOptions {
            tol: 1e-10,
            max_panels: 1 << 16,
            nodes_per_period: 8.0,
        }
    }
}

impl QuadOptions {
    pub fn with_tol(tol: f64) -> Self {
        QuadOptions {
            tol,
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone)]
pub struct QuadResult {
    pub value: Vec<C64>,
    pub error: f64,
    pub panels: usize,
}

struct Panel {
    a: f64,
    b: f64,
    value: Vec<C64>,
    err: f64,
    seq: usize,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err
            .total_cmp(&other.err)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

/// One GK21 application; returns the Kronrod values and a QUADPACK-style error.
fn gk21<F>(f: &F, dim: usize, a: f64, b: f64, buf: &mut [Vec<C64>; 21]) -> (Vec<C64>, f64)
where
    F: Fn(f64, &mut [C64]),
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    // buf[0..10] = left nodes, buf[10..20] = right nodes, buf[20] = center
    for j in 0..10 {
        let dx = half * XGK[j];
        buf[j].iter_mut().for_each(|z| *z = C64::new(0.0, 0.0));
        buf[10 + j].iter_mut().for_each(|z| *z = C64::new(0.0, 0.0));
        f(center - dx, &mut buf[j]);
        f(center + dx, &mut buf[10 + j]);
    }
    buf[20].iter_mut().for_each(|z| *z = C64::new(0.0, 0.0));
    f(center, &mut buf[20]);

    let mut value = vec![C64::new(0.0, 0.0); dim];
    let mut err_max: f64 = 0.0;
    for c in 0..dim {
        let fc = buf[20][c];
        let mut resk = fc * WGK[10];
        let mut resg = C64::new(0.0, 0.0);
        let mut resabs = fc.norm() * WGK[10];
        for j in 0..10 {
            let (l, r) = (buf[j][c], buf[10 + j][c]);
            resk += (l + r) * WGK[j];
            resabs += (l.norm() + r.norm()) * WGK[j];
            if j % 2 == 1 {
                resg += (l + r) * WG[j / 2];
            }
        }
        let mean = resk * 0.5;
        let mut resasc = (fc - mean).norm() * WGK[10];
        for j in 0..10 {
            resasc += ((buf[j][c] - mean).norm() + (buf[10 + j][c] - mean).norm()) * WGK[j];
        }
        let habs = half.abs();
        let resabs = resabs * habs;
        let resasc = resasc * habs;
        let mut err = ((resk - resg) * half).norm();
        if resasc != 0.0 && err != 0.0 {
            err = resasc * (200.0 * err / resasc).powf(1.5).min(1.0);
        }
        if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
            err = err.max(50.0 * f64::EPSILON * resabs);
        }
        value[c] = resk * half;
        err_max = err_max.max(err);
    }
    (value, err_max)
}

/// Splits `[a,b]` at the interior breakpoints, then refines each piece so the
/// fastest oscillation gets at least `nodes_per_period` nodes per period.
fn initial_partition(a: f64, b: f64, breaks: &[f64], freq: f64, opts: &QuadOptions) -> Result<Vec<(f64, f64)>> {
    let mut pts: Vec<f64> = Vec::with_capacity(breaks.len() + 2);
    pts.push(a);
    pts.extend(breaks.iter().copied().filter(|&x| x > a && x < b));
    pts.push(b);
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let periods_per_panel = NODES_PER_PANEL / opts.nodes_per_period.max(1.0);
    let mut out = Vec::new();
    for w in pts.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        let pieces = ((hi - lo) * freq.abs() / periods_per_panel).ceil().max(1.0);
        if pieces > opts.max_panels as f64 || out.len() + pieces as usize > opts.max_panels {
            return Err(Error::MaxSubdivision {
                panels: opts.max_panels,
                estimate: f64::INFINITY,
            });
        }
        let n = pieces as usize;
        let step = (hi - lo) / n as f64;
        for i in 0..n {
            let x0 = if i == 0 { lo } else { lo + step * i as f64 };
            let x1 = if i + 1 == n { hi } else { lo + step * (i + 1) as f64 };
            out.push((x0, x1));
        }
    }
    Ok(out)
}

/// Integrates a `dim`-component integrand over `[a,b]`.
///
/// `f(x, out)` adds nothing: it must overwrite `out` with the integrand at `x`.
pub fn integrate_vec<F>(
    f: &F,
    dim: usize,
    a: f64,
    b: f64,
    breaks: &[f64],
    freq: f64,
    opts: &QuadOptions,
) -> Result<QuadResult>
where
    F: Fn(f64, &mut [C64]),
{
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::UnboundedSupport("r"));
    }
    if a >= b || dim == 0 {
        return Ok(QuadResult {
            value: vec![C64::new(0.0, 0.0); dim],
            error: 0.0,
            panels: 0,
        });
    }
    let mut buf: [Vec<C64>; 21] = std::array::from_fn(|_| vec![C64::new(0.0, 0.0); dim]);
    let mut heap = BinaryHeap::new();
    let mut done: Vec<Panel> = Vec::new();
    let mut seq = 0usize;
    let mut total_err = 0.0;
    for (lo, hi) in initial_partition(a, b, breaks, freq, opts)? {
        let (value, err) = gk21(f, dim, lo, hi, &mut buf);
        total_err += err;
        heap.push(Panel { a: lo, b: hi, value, err, seq });
        seq += 1;
    }
    let mut count = heap.len();
    while total_err > opts.tol {
        let Some(worst) = heap.pop() else { break };
        let mid = 0.5 * (worst.a + worst.b);
        let tiny = (worst.b - worst.a) <= 8.0 * f64::EPSILON * worst.a.abs().max(worst.b.abs());
        if tiny || !(mid > worst.a && mid < worst.b) {
            done.push(worst);
            continue;
        }
        if count + 1 > opts.max_panels {
            heap.push(worst);
            break;
        }
        let (lv, le) = gk21(f, dim, worst.a, mid, &mut buf);
        let (rv, re) = gk21(f, dim, mid, worst.b, &mut buf);
        total_err += le + re - worst.err;
        heap.push(Panel { a: worst.a, b: mid, value: lv, err: le, seq });
        heap.push(Panel { a: mid, b: worst.b, value: rv, err: re, seq: seq + 1 });
        seq += 2;
        count += 1;
        if total_err <= opts.tol {
            // guard against drift in the running sum
            total_err = heap.iter().chain(done.iter()).map(|p| p.err).sum();
        }
    }
    let mut panels: Vec<Panel> = heap.into_vec();
    panels.extend(done);
    panels.sort_by(|p, q| p.a.total_cmp(&q.a));
    let error: f64 = panels.iter().map(|p| p.err).sum();
    if error > opts.tol {
        return Err(Error::MaxSubdivision {
            panels: panels.len(),
            estimate: error,
        });
    }
    let mut value = vec![C64::new(0.0, 0.0); dim];
    for p in &panels {
        for (v, x) in value.iter_mut().zip(&p.value) {
            *v += *x;
        }
    }
    Ok(QuadResult {
        value,
        error,
        panels: panels.len(),
    })
}

/// Scalar convenience wrapper around [`integrate_vec`].
pub fn integrate<F>(f: F, a: f64, b: f64, breaks: &[f64], freq: f64, opts: &QuadOptions) -> Result<(C64, f64)>
where
    F: Fn(f64) -> C64,
{
    let g = |x: f64, out: &mut [C64]| out[0] = f(x);
    let res = integrate_vec(&g, 1, a, b, breaks, freq, opts)?;
    Ok((res.value[0], res.error))
}

/// Axis description for nested integration.
#[derive(Debug, Clone, Default)]
pub struct Axis {
    pub lo: f64,
    pub hi: f64,
    pub breaks: Vec<f64>,
    pub freq: f64,
}

impl Axis {
    pub fn new(lo: f64, hi: f64) -> Self {
        Axis {
            lo,
            hi,
            breaks: Vec::new(),
            freq: 0.0,
        }
    }

    pub fn with_breaks(mut self, breaks: Vec<f64>) -> Self {
        self.breaks = breaks;
        self
    }

    pub fn with_freq(mut self, freq: f64) -> Self {
        self.freq = freq;
        self
    }

    pub fn len(&self) -> f64 {
        self.hi - self.lo
    }
}

/// Nested integration: outer variable `r`, inner variable `y` over `inner(r)`.
/// The reported error adds the outer estimate and the worst inner estimate
/// scaled by the outer length. `inner_len` bounds the inner interval lengths.
pub fn integrate_2d<F, I>(
    f: &F,
    dim: usize,
    outer: &Axis,
    inner: &I,
    inner_len: f64,
    opts: &QuadOptions,
) -> Result<QuadResult>
where
    F: Fn(f64, f64, &mut [C64]),
    I: Fn(f64) -> Axis,
{
    if !(outer.lo.is_finite() && outer.hi.is_finite()) {
        return Err(Error::UnboundedSupport("r"));
    }
    if !inner_len.is_finite() {
        return Err(Error::UnboundedSupport("y"));
    }
    let inner_tol = opts.tol / (4.0 * (1.0 + outer.len().abs()));
    let inner_opts = QuadOptions {
        tol: inner_tol,
        ..*opts
    };
    let outer_opts = QuadOptions {
        tol: opts.tol / 2.0,
        ..*opts
    };
    let worst_inner = Cell::new(0.0f64);
    let failure: Cell<Option<Error>> = Cell::new(None);
    let g = |r: f64, out: &mut [C64]| {
        let h = |y: f64, o: &mut [C64]| f(r, y, o);
        let ax = inner(r);
        match integrate_vec(&h, dim, ax.lo, ax.hi, &ax.breaks, ax.freq, &inner_opts) {
            Ok(res) => {
                out.copy_from_slice(&res.value);
                worst_inner.set(worst_inner.get().max(res.error));
            }
            Err(e) => {
                out.iter_mut().for_each(|z| *z = C64::new(0.0, 0.0));
                let prev = failure.take();
                failure.set(prev.or(Some(e)));
            }
        }
    };
    let res = integrate_vec(&g, dim, outer.lo, outer.hi, &outer.breaks, outer.freq, &outer_opts);
    if let Some(e) = failure.take() {
        return Err(e);
    }
    let mut res = res?;
    res.error += outer.len().abs() * worst_inner.get();
    Ok(res)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn opts(tol: f64) -> QuadOptions {
        QuadOptions::with_tol(tol)
    }

    #[test]
    fn weights_sum_to_two() {
        let k: f64 = 2.0 * WGK[..10].iter().sum::<f64>() + WGK[10];
        let g: f64 = 2.0 * WG.iter().sum::<f64>();
        assert!((k - 2.0).abs() < 1e-15);
        assert!((g - 2.0).abs() < 1e-15);
    }

    #[test]
    fn polynomial_exactness() {
        // single panel, no refinement: Kronrod exact to degree 31, Gauss to 19
        let mut buf: [Vec<C64>; 21] = std::array::from_fn(|_| vec![C64::new(0.0, 0.0); 2]);
        for deg in 0..=31i32 {
            let f = |x: f64, out: &mut [C64]| {
                out[0] = C64::new(x.powi(deg), 0.0);
                out[1] = C64::new(0.0, x.powi(deg));
            };
            let (v, _) = gk21(&f, 2, 0.0, 1.0, &mut buf);
            let exact = 1.0 / (deg + 1) as f64;
            assert!((v[0].re - exact).abs() < 1e-15, "degree {deg}");
            assert!((v[1].im - exact).abs() < 1e-15, "degree {deg}");
        }
        // Gauss part: degree 19 exact means the error estimate collapses to roundoff
        let f = |x: f64, out: &mut [C64]| out[0] = C64::new(x.powi(19), 0.0);
        let (_, e) = gk21(&f, 1, 0.0, 1.0, &mut buf);
        assert!(e < 1e-14);
        let f = |x: f64, out: &mut [C64]| out[0] = C64::new(x.sqrt(), 0.0);
        let (_, e) = gk21(&f, 1, 0.0, 1.0, &mut buf);
        assert!(e > 1e-10);
    }

    #[test]
    fn area_of_unit_square() {
        let f = |r: f64, y: f64, o: &mut [C64]| {
            o[0] = if r > 1.0 && r <= 2.0 && y > 0.0 && y <= 1.0 {
                C64::new(1.0, 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        };
        let res = integrate_2d(&f, 1, &Axis::new(1.0, 2.0), &|_| Axis::new(0.0, 1.0), 1.0, &opts(1e-10)).unwrap();
        assert!((res.value[0] - C64::new(1.0, 0.0)).norm() <= 1e-10);
    }

    #[test]
    fn fresnel_against_power_series() {
        // ∫_0^1 e^{πi r²} dr = Σ_n (πi)^n / (n! (2n+1))
        let mut series = C64::new(0.0, 0.0);
        let mut term = C64::new(1.0, 0.0);
        for n in 0..60 {
            series += term / (2 * n + 1) as f64;
            term *= C64::new(0.0, std::f64::consts::PI) / (n + 1) as f64;
        }
        let (v, err) = integrate(
            |r| crate::function::atom::cis_turns(0.5 * r * r),
            0.0,
            1.0,
            &[],
            1.0,
            &opts(1e-13),
        )
        .unwrap();
        assert!(err <= 1e-13);
        assert!((v - series).norm() < 1e-12, "{v} vs {series}");
    }

    #[test]
    fn strong_oscillation_exceeds_budget() {
        let o = QuadOptions {
            tol: 1e-12,
            max_panels: 64,
            nodes_per_period: 8.0,
        };
        let r = integrate(
            |x| crate::function::atom::cis_turns(1e6 * x * x),
            0.0,
            1.0,
            &[],
            2e6,
            &o,
        );
        assert!(matches!(r, Err(Error::MaxSubdivision { .. })));
    }

    #[test]
    fn unbounded_is_rejected() {
        let r = integrate(|_| C64::new(1.0, 0.0), 0.0, f64::INFINITY, &[], 0.0, &opts(1e-8));
        assert!(matches!(r, Err(Error::UnboundedSupport(_))));
    }
}

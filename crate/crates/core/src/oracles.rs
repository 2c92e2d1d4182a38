//! Numerical reference values used to validate the asymptotic formulas: adaptive
//! Gauss-Kronrod quadrature of scale-mixture tails, ratio-limit trends, a grid search for
//! `eta` and the bivariate normal survival function.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{domain, Error, Result};
use crate::marginals::{Family, MarginalModel};
use crate::special::{normal_ln_pdf, normal_ln_sf, normal_sf};
use crate::weights::{Coupling, WeightKind, WeightModel};

/// Default relative tolerance of [`scale_mixture_tail`].
pub const DEFAULT_REL_TOL: f64 = 1e-9;

const MAX_SEGMENTS: usize = 4000;
const INITIAL_PIECES: usize = 16;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639,
    0.949_107_912_342_758_525,
    0.864_864_423_359_769_073,
    0.741_531_185_599_394_440,
    0.586_087_235_467_691_130,
    0.405_845_151_377_397_167,
    0.207_784_955_007_898_468,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_225,
    0.063_092_092_629_978_553,
    0.104_790_010_322_250_184,
    0.140_653_259_715_525_919,
    0.169_004_726_639_267_903,
    0.190_350_578_064_785_410,
    0.204_432_940_075_298_892,
    0.209_482_141_084_727_828,
];
// Gauss weights for the nodes XGK[1], XGK[3], XGK[5], XGK[7]
const WG: [f64; 4] = [0.129_484_966_168_869_693, 0.279_705_391_489_276_668, 0.381_830_050_505_118_945, 0.417_959_183_673_469_388];

fn gk15(f: &mut dyn FnMut(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        k += WGK[j] * s;
        if j % 2 == 1 {
            g += WG[j / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.err.total_cmp(&other.err) == Ordering::Equal
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.total_cmp(&other.err)
    }
}

/// Globally adaptive G7/K15 quadrature over `[knots[0], knots.last()]`, splitting the
/// worst segment until the summed error estimate is below `rel_tol * |value|` (or
/// `abs_tol`). Returns `(value, error estimate)`.
pub(crate) fn integrate(f: &mut dyn FnMut(f64) -> f64, knots: &[f64], rel_tol: f64, abs_tol: f64, what: &str) -> Result<(f64, f64)> {
    let mut heap = BinaryHeap::new();
    for w in knots.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        if !(hi > lo) {
            continue;
        }
        let step = (hi - lo) / INITIAL_PIECES as f64;
        for i in 0..INITIAL_PIECES {
            let a = lo + step * i as f64;
            let b = if i + 1 == INITIAL_PIECES { hi } else { a + step };
            let (value, err) = gk15(f, a, b);
            heap.push(Segment { a, b, value, err });
        }
    }
    let totals = |heap: &BinaryHeap<Segment>| heap.iter().fold((0.0, 0.0), |(v, e), s| (v + s.value, e + s.err));
    let (mut value, mut err) = totals(&heap);
    let mut since_resum = 0;
    while err > (rel_tol * value.abs()).max(abs_tol) {
        if heap.len() >= MAX_SEGMENTS {
            let (v, e) = totals(&heap);
            if e <= (rel_tol * v.abs()).max(abs_tol) {
                return Ok((v, e));
            }
            return Err(Error::Numeric { what: what.to_string(), achieved: e / v.abs() });
        }
        let worst = heap.pop().expect("heap is never empty here");
        let mid = 0.5 * (worst.a + worst.b);
        if !(mid > worst.a && mid < worst.b) {
            // segment cannot be split further in double precision
            heap.push(worst);
            let (v, e) = totals(&heap);
            return Err(Error::Numeric { what: what.to_string(), achieved: e / v.abs() });
        }
        let (v1, e1) = gk15(f, worst.a, mid);
        let (v2, e2) = gk15(f, mid, worst.b);
        value += v1 + v2 - worst.value;
        err += e1 + e2 - worst.err;
        heap.push(Segment { a: worst.a, b: mid, value: v1, err: e1 });
        heap.push(Segment { a: mid, b: worst.b, value: v2, err: e2 });
        since_resum += 1;
        if since_resum == 64 {
            // incremental sums drift; refresh them now and then
            (value, err) = totals(&heap);
            since_resum = 0;
        }
    }
    Ok(totals(&heap))
}

/// A quadrature result with its log value and estimated relative error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadEstimate {
    pub value: f64,
    pub ln_value: f64,
    pub rel_error: f64,
}

impl QuadEstimate {
    fn from_ln(ln_value: f64, rel_error: f64) -> Self {
        Self { value: ln_value.exp(), ln_value, rel_error }
    }
}

fn log_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let m = a.max(b);
    m + ((a - m).exp() + (b - m).exp()).ln()
}

/// Integrates `exp(ln_g(c(v)) - m - v)` over `v` in `[0, v_max]`, where `c(v)` is the
/// point with survival probability `e^{-v}`, then extends `v_max` until the neglected
/// remainder (at most `e^{-v_max}` in normalised units) is below the tolerance.
fn v_space_integral(
    c_of_s: &dyn Fn(f64) -> f64,
    ln_g: &dyn Fn(f64) -> f64,
    m: f64,
    breaks: &[f64],
    fixed_end: Option<f64>,
    rel_tol: f64,
    what: &str,
) -> Result<(f64, f64)> {
    let mut f = |v: f64| {
        let lg = ln_g(c_of_s((-v).exp()));
        if lg == f64::NEG_INFINITY {
            0.0
        } else {
            (lg - m - v).exp()
        }
    };
    let mut v_max = fixed_end.unwrap_or(40.0f64.max(breaks.iter().copied().fold(0.0, f64::max) * 1.5));
    loop {
        let mut knots: Vec<f64> = std::iter::once(0.0).chain(breaks.iter().copied().filter(|&b| b > 0.0 && b < v_max)).collect();
        knots.push(v_max);
        knots.sort_by(f64::total_cmp);
        knots.dedup();
        let (value, err) = integrate(&mut f, &knots, 0.5 * rel_tol, 1e-300, what)?;
        let remainder = if fixed_end.is_some() { 0.0 } else { (-v_max).exp() };
        if fixed_end.is_some() || remainder <= 0.1 * rel_tol * value || v_max >= 740.0 {
            let rel = if value > 0.0 { (err + remainder) / value } else { 0.0 };
            return Ok((value, rel));
        }
        v_max = (v_max * 2.0).max((10.0 / (rel_tol * value.max(1e-300))).ln()).min(740.0);
    }
}

/// `ln E[g(C)]` for a weight law, given `ln g`, nondecreasing in `c`. Atoms are handled
/// exactly; `kinks` are points where `g` is not smooth.
pub(crate) fn weight_expectation_ln(w: &WeightModel, ln_g: &dyn Fn(f64) -> f64, kinks: &[f64], rel_tol: f64) -> Result<(f64, f64)> {
    match w.kind() {
        WeightKind::Degenerate { c } => Ok((ln_g(*c), 0.0)),
        WeightKind::ModelA { omega, p, sub, .. } => {
            let top = p.ln() + ln_g(*omega);
            if *p == 1.0 {
                return Ok((top, 0.0));
            }
            let (rest, rel) = weight_expectation_ln(sub, ln_g, kinks, rel_tol)?;
            let rest = (1.0 - p).ln() + rest;
            let total = log_add(top, rest);
            Ok((total, rel * (rest - total).exp()))
        }
        WeightKind::Uniform { .. } | WeightKind::Beta { .. } => {
            let omega = w.endpoint();
            let m = ln_g(omega);
            if m == f64::NEG_INFINITY {
                return Ok((m, 0.0));
            }
            let c_of_s = |s: f64| omega - w.survival_quantile_gap(s);
            let breaks: Vec<f64> = kinks
                .iter()
                .filter(|&&c| c > 0.0 && c < omega)
                .map(|&c| -w.near_endpoint_tail(omega - c).map(f64::ln).unwrap_or(0.0))
                .collect();
            let (value, rel) = v_space_integral(&c_of_s, ln_g, m, &breaks, None, rel_tol, &format!("expectation over {}", w.name()))?;
            Ok((m + value.ln(), rel))
        }
    }
}

fn check_t(t: f64) -> Result<()> {
    if !(t > 0.0 && t.is_finite()) {
        return domain(format!("threshold must be positive and finite, got {t}"));
    }
    Ok(())
}

fn tail_kinks(marginal: &MarginalModel, t: f64) -> Vec<f64> {
    match marginal.family() {
        Family::Pareto { scale, .. } => vec![t / scale],
        _ => Vec::new(),
    }
}

/// `P(C X > t)` for independent `C` and `X`, by quadrature to relative tolerance 1e-9.
pub fn scale_mixture_tail(weight: &WeightModel, marginal: &MarginalModel, t: f64) -> Result<f64> {
    Ok(scale_mixture_tail_with(weight, marginal, t, DEFAULT_REL_TOL)?.value)
}

pub fn scale_mixture_tail_with(weight: &WeightModel, marginal: &MarginalModel, t: f64, rel_tol: f64) -> Result<QuadEstimate> {
    check_t(t)?;
    let ln_g = |c: f64| if c > 0.0 { marginal.ln_tail(t / c) } else { f64::NEG_INFINITY };
    let (ln_value, rel) = weight_expectation_ln(weight, &ln_g, &tail_kinks(marginal, t), rel_tol)?;
    Ok(QuadEstimate::from_ln(ln_value, rel))
}

/// The `s` with `P(C X > s) = q`, found by bisection in `ln s` on the quadrature value.
pub fn scale_mixture_quantile(weight: &WeightModel, marginal: &MarginalModel, q: f64) -> Result<f64> {
    if !(q > 0.0 && q < 1.0) {
        return domain(format!("tail probability must lie in (0, 1), got {q}"));
    }
    let target = q.ln();
    let omega = weight.endpoint();
    // P(CX > s) <= P(X > s / omega), so the root lies below omega * tail-quantile(q)
    let mut hi = (omega * marginal.tail_quantile(q)?).ln();
    let mut lo = hi - 1.0;
    while scale_mixture_tail_with(weight, marginal, lo.exp(), 1e-12)?.ln_value < target {
        lo -= 2.0 * (hi - lo);
    }
    while hi - lo > 1e-13 * hi.abs().max(1.0) {
        let mid = 0.5 * (lo + hi);
        if scale_mixture_tail_with(weight, marginal, mid.exp(), 1e-12)?.ln_value > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((0.5 * (lo + hi)).exp())
}

/// Law of `max(C_i)` over a subset of weight components.
#[derive(Debug, Clone)]
pub struct MaxLaw<'a> {
    components: Vec<&'a WeightModel>,
    coupling: Coupling,
}

impl<'a> MaxLaw<'a> {
    pub fn new(components: Vec<&'a WeightModel>, coupling: Coupling) -> Result<Self> {
        if components.is_empty() {
            return domain("the maximum of no weights is undefined");
        }
        Ok(Self { components, coupling })
    }

    pub fn endpoint(&self) -> f64 {
        self.components.iter().map(|w| w.endpoint()).fold(0.0, f64::max)
    }

    pub fn survival(&self, c: f64) -> f64 {
        match self.coupling {
            Coupling::Independent => 1.0 - self.components.iter().map(|w| w.cdf(c)).product::<f64>(),
            Coupling::Comonotone => self.components.iter().map(|w| w.survival(c)).fold(0.0, f64::max),
        }
    }

    /// `P(max = endpoint)`.
    pub fn top_atom(&self) -> f64 {
        let top = self.endpoint();
        let atom = |w: &&WeightModel| if w.endpoint() == top { w.upper_atom() } else { 0.0 };
        match self.coupling {
            Coupling::Independent => 1.0 - self.components.iter().map(|w| 1.0 - atom(w)).product::<f64>(),
            Coupling::Comonotone => self.components.iter().map(atom).fold(0.0, f64::max),
        }
    }

    fn atom_locations(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for w in &self.components {
            match w.kind() {
                WeightKind::Degenerate { c } => out.push(*c),
                WeightKind::ModelA { omega, sub, .. } => {
                    out.push(*omega);
                    if let WeightKind::Degenerate { c } = sub.kind() {
                        out.push(*c);
                    }
                }
                _ => {}
            }
        }
        out
    }

    /// Smallest `c` with `P(max > c) <= s`.
    fn survival_quantile(&self, s: f64) -> f64 {
        let (mut lo, mut hi) = (0.0, self.endpoint());
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if self.survival(mid) > s {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        hi
    }
}

/// `ln E[g(max C_i)]` for `ln g` nondecreasing in `c`.
pub(crate) fn max_expectation_ln(law: &MaxLaw<'_>, ln_g: &dyn Fn(f64) -> f64, kinks: &[f64], rel_tol: f64) -> Result<(f64, f64)> {
    if law.components.len() == 1 {
        return weight_expectation_ln(law.components[0], ln_g, kinks, rel_tol);
    }
    let omega = law.endpoint();
    let m = ln_g(omega);
    if m == f64::NEG_INFINITY {
        return Ok((m, 0.0));
    }
    let p_top = law.top_atom();
    let v_top = if p_top > 0.0 { Some(-p_top.ln()) } else { None };
    let mut breaks = Vec::new();
    for c in kinks.iter().copied().chain(law.atom_locations()) {
        if c > 0.0 && c < omega {
            breaks.push(-law.survival(c).ln());
            breaks.push(-law.survival(c * (1.0 - 1e-12)).ln());
        }
    }
    breaks.retain(|b| b.is_finite());
    let c_of_s = |s: f64| law.survival_quantile(s);
    let mut value = 0.0;
    let mut rel = 0.0;
    if v_top != Some(0.0) {
        (value, rel) = v_space_integral(&c_of_s, ln_g, m, &breaks, v_top, rel_tol, "expectation over a weight maximum")?;
    }
    // the atom at the endpoint contributes exactly p_top * g(omega)
    let total = value + p_top;
    Ok((m + total.ln(), rel * value / total))
}

/// Ratios `f(t)/g(t)` along a grid, with a verdict on their approach to 1.
#[derive(Debug, Clone, PartialEq)]
pub struct RatioTrend {
    pub t: Vec<f64>,
    pub ratios: Vec<f64>,
    /// `|ratio - 1|` never increases along the grid.
    pub monotone: bool,
    /// The last ratio is at least as close to 1 as the first.
    pub improves: bool,
    pub final_ratio: f64,
}

impl RatioTrend {
    pub fn from_values(t: &[f64], f: &[f64], g: &[f64]) -> Result<Self> {
        if t.is_empty() || t.len() != f.len() || t.len() != g.len() {
            return domain("ratio trend needs equally long, nonempty sequences");
        }
        if let Some(i) = (0..t.len()).find(|&i| !(f[i] > 0.0 && g[i] > 0.0)) {
            return domain(format!("ratio trend needs positive values, got f={} g={} at t={}", f[i], g[i], t[i]));
        }
        let ratios: Vec<f64> = f.iter().zip(g).map(|(a, b)| a / b).collect();
        let dist: Vec<f64> = ratios.iter().map(|r| (r - 1.0).abs()).collect();
        let monotone = dist.windows(2).all(|w| w[1] <= w[0] + 1e-12);
        let improves = dist[dist.len() - 1] <= dist[0] + 1e-12;
        Ok(Self { t: t.to_vec(), final_ratio: ratios[ratios.len() - 1], ratios, monotone, improves })
    }

    pub fn first_ratio(&self) -> f64 {
        self.ratios[0]
    }
}

pub fn ratio_limit(f: impl Fn(f64) -> f64, g: impl Fn(f64) -> f64, t_grid: &[f64]) -> Result<RatioTrend> {
    let fv: Vec<f64> = t_grid.iter().map(|&t| f(t)).collect();
    let gv: Vec<f64> = t_grid.iter().map(|&t| g(t)).collect();
    RatioTrend::from_values(t_grid, &fv, &gv)
}

/// `max over theta of min(sin theta, rho sin theta + sqrt(1 - rho^2) cos theta)` by
/// repeated 10^4-point grid searches, each zooming into the best cell of the last.
pub fn grid_max_min(rho: f64) -> Result<f64> {
    if !(rho.abs() < 1.0) {
        return domain(format!("correlation must lie in (-1, 1), got {rho}"));
    }
    const N: usize = 10_000;
    let r = (1.0 - rho * rho).sqrt();
    let f = |th: f64| th.sin().min(rho * th.sin() + r * th.cos());
    let (mut lo, mut hi) = (0.0, std::f64::consts::TAU);
    let mut best = f64::NEG_INFINITY;
    for _ in 0..4 {
        let h = (hi - lo) / N as f64;
        let mut arg = lo;
        for i in 0..=N {
            let th = lo + h * i as f64;
            let v = f(th);
            if v > best {
                best = v;
                arg = th;
            }
        }
        (lo, hi) = (arg - h, arg + h);
    }
    Ok(best)
}

/// `P(Z1 > a, Z2 > b)` for standard normals with correlation `rho`.
pub fn bivariate_normal_sf(a: f64, b: f64, rho: f64) -> Result<f64> {
    Ok(bivariate_normal_ln_sf(a, b, rho)?.exp())
}

pub fn bivariate_normal_ln_sf(a: f64, b: f64, rho: f64) -> Result<f64> {
    if !(rho.abs() < 1.0) {
        return domain(format!("correlation must lie in (-1, 1), got {rho}"));
    }
    if rho == 0.0 {
        return Ok(normal_ln_sf(a) + normal_ln_sf(b));
    }
    if a < 0.0 && b >= 0.0 {
        return bivariate_normal_ln_sf(b, a, rho);
    }
    if a < 0.0 {
        // P(Z1 > a, Z2 > b) = P(Z2 > b) - P(-Z1 > -a, Z2 > b)
        let rest = bivariate_normal_ln_sf(-a, b, -rho)?.exp();
        return Ok((normal_sf(b) - rest).max(0.0).ln());
    }
    // a >= 0: integrate over x = a + u, u >= 0, relative to phi(a)
    let r = (1.0 - rho * rho).sqrt();
    let ln_f = |u: f64| -a * u - 0.5 * u * u + normal_ln_sf((b - rho * (a + u)) / r);
    let base = ln_f(0.0);
    let span = -a + (a * a + 2.0 * (80.0 - base.min(0.0))).sqrt();
    let scan = 400;
    let (peak_u, peak) = (0..=scan)
        .map(|i| span * i as f64 / scan as f64)
        .map(|u| (u, ln_f(u)))
        .fold((0.0, f64::NEG_INFINITY), |acc, x| if x.1 > acc.1 { x } else { acc });
    let mut knots = vec![0.0, span];
    let cross = b / rho - a;
    if cross > 0.0 && cross < span {
        knots.push(cross);
    }
    if peak_u > 0.0 && peak_u < span {
        knots.push(peak_u);
    }
    knots.sort_by(f64::total_cmp);
    knots.dedup();
    let mut f = |u: f64| (ln_f(u) - peak).exp();
    let (value, _) = integrate(&mut f, &knots, 1e-11, 1e-300, "bivariate normal survival")?;
    Ok(normal_ln_pdf(a) + peak + value.ln())
}

//! Special functions and one-dimensional solvers.
//!
//! Everything here is a pure function of its arguments. The incomplete gamma
//! pair uses the series expansion below `x < shape + 1` and a Lentz continued
//! fraction above it, so the smaller of the two tails is always computed
//! directly and keeps full relative precision.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

const EPS: f64 = 1e-16;
const TINY: f64 = 1e-300;
const SERIES_MAX_ITER: usize = 100_000;

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ToleranceSpec {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_iter: usize,
}

impl ToleranceSpec {
    pub fn new(rel_tol: f64, abs_tol: f64, max_iter: usize) -> Result<Self> {
        if !(rel_tol > 0.0) || !(abs_tol > 0.0) || max_iter == 0 {
            return Err(Error::config(format!(
                "tolerance needs rel_tol > 0, abs_tol > 0, max_iter >= 1 (got {rel_tol}, {abs_tol}, {max_iter})"
            )));
        }
        Ok(Self {
            rel_tol,
            abs_tol,
            max_iter,
        })
    }
}

impl Default for ToleranceSpec {
    fn default() -> Self {
        Self {
            rel_tol: 1e-12,
            abs_tol: 1e-12,
            max_iter: 200,
        }
    }
}

/// `ln Γ(x)` for `x > 0` (Lanczos, g = 7).
pub fn ln_gamma(x: f64) -> f64 {
    const G: f64 = 7.0;
    const COEF: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        // reflection
        return (PI / (PI * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = COEF[0];
    for (i, c) in COEF.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + G + 0.5;
    0.5 * (2.0 * PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

pub fn gamma(x: f64) -> f64 {
    ln_gamma(x).exp()
}

fn check_gamma_args(function: &'static str, shape: f64, x: f64) -> Result<()> {
    if !(shape > 0.0) {
        return Err(Error::Domain {
            function,
            value: shape,
            expected: "shape > 0",
        });
    }
    if !(x >= 0.0) {
        return Err(Error::Domain {
            function,
            value: x,
            expected: "x >= 0",
        });
    }
    Ok(())
}

/// `x^a e^{-x} / Γ(a)`, the common prefactor of both gamma tails.
fn gamma_prefactor(shape: f64, x: f64) -> f64 {
    (shape * x.ln() - x - ln_gamma(shape)).exp()
}

fn lower_series(shape: f64, x: f64) -> f64 {
    let mut term = 1.0 / shape;
    let mut sum = term;
    let mut a = shape;
    for _ in 0..SERIES_MAX_ITER {
        a += 1.0;
        term *= x / a;
        sum += term;
        if term.abs() < sum.abs() * EPS {
            break;
        }
    }
    sum * gamma_prefactor(shape, x)
}

fn upper_continued_fraction(shape: f64, x: f64) -> f64 {
    let mut b = x + 1.0 - shape;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..SERIES_MAX_ITER {
        let an = -(i as f64) * (i as f64 - shape);
        b += 2.0;
        d = an * d + b;
        if d.abs() < TINY {
            d = TINY;
        }
        c = b + an / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < EPS {
            break;
        }
    }
    h * gamma_prefactor(shape, x)
}

/// Regularized lower incomplete gamma `γ(shape, x) / Γ(shape)`.
pub fn reg_lower_gamma(shape: f64, x: f64) -> Result<f64> {
    check_gamma_args("reg_lower_gamma", shape, x)?;
    if x == 0.0 {
        return Ok(0.0);
    }
    if x.is_infinite() {
        return Ok(1.0);
    }
    if x < shape + 1.0 {
        Ok(lower_series(shape, x).min(1.0))
    } else {
        Ok((1.0 - upper_continued_fraction(shape, x)).clamp(0.0, 1.0))
    }
}

/// Regularized upper incomplete gamma `Γ(shape, x) / Γ(shape)`.
pub fn reg_upper_gamma(shape: f64, x: f64) -> Result<f64> {
    check_gamma_args("reg_upper_gamma", shape, x)?;
    if x == 0.0 {
        return Ok(1.0);
    }
    if x.is_infinite() {
        return Ok(0.0);
    }
    if x < shape + 1.0 {
        Ok((1.0 - lower_series(shape, x)).clamp(0.0, 1.0))
    } else {
        Ok(upper_continued_fraction(shape, x).min(1.0))
    }
}

/// Density of Gamma(shape, 1) at `x`.
pub fn gamma_density(shape: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return if shape == 1.0 && x == 0.0 { 1.0 } else { 0.0 };
    }
    ((shape - 1.0) * x.ln() - x - ln_gamma(shape)).exp()
}

/// Inverse of the regularized lower incomplete gamma: the `y` with
/// `reg_lower_gamma(shape, y) = p`.
///
/// Newton in `ln y` on whichever tail is smaller, safeguarded by bisection,
/// so probabilities down to ~1e-300 invert accurately.
pub fn gamma_p_inverse(shape: f64, p: f64) -> Result<f64> {
    if !(shape > 0.0) {
        return Err(Error::Domain {
            function: "gamma_p_inverse",
            value: shape,
            expected: "shape > 0",
        });
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Domain {
            function: "gamma_p_inverse",
            value: p,
            expected: "0 <= p <= 1",
        });
    }
    if p == 0.0 {
        return Ok(0.0);
    }
    if p == 1.0 {
        return Ok(f64::INFINITY);
    }
    let use_lower = p <= 0.5;
    let target = if use_lower { p.ln() } else { (1.0 - p).ln() };
    // residual in t = ln y; increasing in t on the lower tail, decreasing on the upper
    let residual = |t: f64| -> (f64, f64) {
        let y = t.exp();
        let log_density_term = shape * t - y - ln_gamma(shape);
        if use_lower {
            let lp = lower_tail(shape, y).ln();
            (lp - target, (log_density_term - lp).exp())
        } else {
            let lq = upper_tail(shape, y).ln();
            (lq - target, -(log_density_term - lq).exp())
        }
    };
    let sign = if use_lower { 1.0 } else { -1.0 };

    let mut lo = f64::NEG_INFINITY;
    let mut hi = f64::INFINITY;
    let mut t = if use_lower {
        // leading term of the series: P ≈ y^a / Γ(a+1)
        ((p.ln() + ln_gamma(shape + 1.0)) / shape).min(shape.max(1.0).ln())
    } else {
        shape.max(1e-3).ln()
    };
    for _ in 0..400 {
        let (r, dr) = residual(t);
        if r == 0.0 {
            return Ok(t.exp());
        }
        if sign * r < 0.0 {
            lo = lo.max(t);
        } else {
            hi = hi.min(t);
        }
        let mut next = t - r / dr;
        if !next.is_finite() || next <= lo || next >= hi {
            next = match (lo.is_finite(), hi.is_finite()) {
                (true, true) => 0.5 * (lo + hi),
                (true, false) => t + 1.0,
                (false, true) => t - 1.0,
                (false, false) => unreachable!(),
            };
        }
        if (next - t).abs() <= 1e-14 * (1.0 + t.abs()) {
            return Ok(next.exp());
        }
        t = next;
    }
    Err(Error::NoConvergence {
        function: "gamma_p_inverse",
        iterations: 400,
    })
}

fn lower_tail(shape: f64, x: f64) -> f64 {
    if x < shape + 1.0 {
        lower_series(shape, x)
    } else {
        1.0 - upper_continued_fraction(shape, x)
    }
}

fn upper_tail(shape: f64, x: f64) -> f64 {
    if x < shape + 1.0 {
        1.0 - lower_series(shape, x)
    } else {
        upper_continued_fraction(shape, x)
    }
}

/// Principal branch of the Lambert W function on `x >= 0`.
pub fn lambert_w(x: f64) -> Result<f64> {
    lambert_w_with(x, &ToleranceSpec::default())
}

pub fn lambert_w_with(x: f64, tol: &ToleranceSpec) -> Result<f64> {
    if !(x >= 0.0) {
        return Err(Error::Domain {
            function: "lambert_w",
            value: x,
            expected: "x >= 0",
        });
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    if x.is_infinite() {
        return Ok(f64::INFINITY);
    }
    let mut w = if x < std::f64::consts::E {
        x.ln_1p() * (1.0 - 0.3 * x.ln_1p() / (1.0 + x.ln_1p()))
    } else {
        let l1 = x.ln();
        let l2 = l1.ln();
        l1 - l2 + l2 / l1
    };
    for _ in 0..tol.max_iter {
        // Halley on w·e^w − x, scaled by e^{-w} to stay finite for large x
        let f = w - x * (-w).exp();
        let wp1 = w + 1.0;
        let step = f / (wp1 - (w + 2.0) * f / (2.0 * wp1));
        w -= step;
        if step.abs() <= tol.rel_tol * w.abs() + f64::MIN_POSITIVE {
            return Ok(w);
        }
    }
    Ok(w)
}

/// Exponential integral `E1(x) = ∫_x^∞ e^{-t}/t dt` for `x > 0`.
pub fn exp_integral_e1(x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::Domain {
            function: "exp_integral_e1",
            value: x,
            expected: "x > 0",
        });
    }
    if x.is_infinite() {
        return Ok(0.0);
    }
    if x <= 1.0 {
        let mut sum = 0.0;
        let mut term = 1.0;
        for k in 1..SERIES_MAX_ITER {
            let kf = k as f64;
            term *= -x / kf;
            let add = -term / kf;
            sum += add;
            if add.abs() < sum.abs() * EPS {
                break;
            }
        }
        Ok(-EULER_GAMMA - x.ln() + sum)
    } else {
        let mut b = x + 1.0;
        let mut c = 1.0 / TINY;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..SERIES_MAX_ITER {
            let an = -((i * i) as f64);
            b += 2.0;
            d = 1.0 / (an * d + b);
            c = b + an / c;
            let del = c * d;
            h *= del;
            if (del - 1.0).abs() < EPS {
                break;
            }
        }
        Ok(h * (-x).exp())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaximizeOptions {
    /// Points in the initial uniform scan, endpoints included.
    pub grid_points: usize,
    pub tol: ToleranceSpec,
    /// Also search the cell next to an endpoint that wins the scan. Off, an
    /// endpoint maximum is accepted at grid resolution.
    pub refine_endpoints: bool,
}

impl Default for MaximizeOptions {
    fn default() -> Self {
        Self {
            grid_points: 41,
            tol: ToleranceSpec::new(1e-9, 1e-12, 200).unwrap(),
            refine_endpoints: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Maximum {
    pub argmax: f64,
    pub max: f64,
    /// The maximum is an endpoint of the interval.
    pub boundary: bool,
    pub evaluations: usize,
}

/// Grid scan followed by golden-section refinement.
///
/// An interior scan maximum is refined between its grid neighbours. An
/// endpoint maximum is returned as is (flagged `boundary`), unless
/// `refine_endpoints` is set: then the adjacent cell is searched and the
/// endpoint stands only if no strictly larger value turns up. Non-finite
/// values rank below every finite one.
pub fn maximize_1d<F>(mut f: F, lo: f64, hi: f64, opts: &MaximizeOptions) -> Maximum
where
    F: FnMut(f64) -> f64,
{
    assert!(lo < hi, "maximize_1d needs lo < hi");
    let n = opts.grid_points.max(2);
    let step = (hi - lo) / (n - 1) as f64;
    let values: Vec<f64> = (0..n)
        .map(|i| f(if i == n - 1 { hi } else { lo + i as f64 * step }))
        .collect();
    maximize_prescanned(f, lo, hi, &values, opts)
}

/// [`maximize_1d`] with the scan already done: `values[i]` is `f` at the
/// `i`-th of `values.len()` uniform points on `[lo, hi]`.
pub fn maximize_prescanned<F>(mut f: F, lo: f64, hi: f64, values: &[f64], opts: &MaximizeOptions) -> Maximum
where
    F: FnMut(f64) -> f64,
{
    let n = values.len();
    assert!(
        n >= 2 && lo < hi,
        "maximize_prescanned needs two grid points and lo < hi"
    );
    let step = (hi - lo) / (n - 1) as f64;
    let clean = |v: f64| if v.is_nan() { f64::NEG_INFINITY } else { v };
    let mut best_i = 0;
    let mut best_v = f64::NEG_INFINITY;
    for (i, &v) in values.iter().enumerate() {
        let v = clean(v);
        if v > best_v {
            best_v = v;
            best_i = i;
        }
    }
    let grid_x = |i: usize| if i == n - 1 { hi } else { lo + i as f64 * step };
    let mut evaluations = n;
    let at_end = best_i == 0 || best_i == n - 1;
    if at_end && !opts.refine_endpoints {
        return Maximum {
            argmax: grid_x(best_i),
            max: best_v,
            boundary: true,
            evaluations,
        };
    }
    let (a, b) = (grid_x(best_i.saturating_sub(1)), grid_x((best_i + 1).min(n - 1)));
    let (x, v, used) = golden_section(&mut f, a, b, &opts.tol);
    evaluations += used;
    let v = clean(v);
    if v > best_v || (v == best_v && !at_end) {
        Maximum {
            argmax: x,
            max: v,
            boundary: false,
            evaluations,
        }
    } else {
        Maximum {
            argmax: grid_x(best_i),
            max: best_v,
            boundary: at_end,
            evaluations,
        }
    }
}

/// Golden-section search for a maximum on `[a, b]`; returns `(x, f(x), evaluations)`.
pub fn golden_section<F>(f: &mut F, mut a: f64, mut b: f64, tol: &ToleranceSpec) -> (f64, f64, usize)
where
    F: FnMut(f64) -> f64,
{
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    let mut evals = 2;
    for _ in 0..tol.max_iter {
        if (b - a).abs() <= tol.rel_tol * (a.abs() + b.abs()) + tol.abs_tol {
            break;
        }
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
        evals += 1;
    }
    if fc >= fd {
        (c, fc, evals)
    } else {
        (d, fd, evals)
    }
}

/// Brent's method for a root of `f` on `[lo, hi]`.
pub fn find_root<F>(mut f: F, lo: f64, hi: f64, tol: &ToleranceSpec) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    let (mut a, mut b) = (lo, hi);
    let (mut fa, mut fb) = (f(a), f(b));
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if !(fa * fb < 0.0) {
        return Err(Error::NoRoot { lo, hi });
    }
    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut e = d;
    for _ in 0..tol.max_iter {
        if fb * fc > 0.0 {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol1 = 2.0 * EPS * b.abs() + 0.5 * (tol.rel_tol * b.abs() + tol.abs_tol);
        let xm = 0.5 * (c - b);
        if xm.abs() <= tol1 || fb == 0.0 {
            return Ok(b);
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                let qa = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * xm * qa * (qa - r) - (b - a) * (r - 1.0));
                q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            }
            p = p.abs();
            let min1 = 3.0 * xm * q - (tol1 * q).abs();
            let min2 = (e * q).abs();
            if 2.0 * p < min1.min(min2) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol1 { d } else { tol1.copysign(xm) };
        fb = f(b);
    }
    Err(Error::NoConvergence {
        function: "find_root",
        iterations: tol.max_iter,
    })
}

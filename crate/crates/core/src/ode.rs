//! Adaptive Dormand–Prince 5(4) integrator with continuous (dense) output.
//!
//! States are fixed-size real arrays; complex systems are packed as
//! interleaved (re, im) pairs by the caller. Integration towards smaller
//! `x` is performed by integrating `-f(-s, y)` in `s = -x`.

use crate::error::{Error, Result};

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

// Difference between the 5th and embedded 4th order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

// Shampine's dense output coefficients.
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Options {
    pub rtol: f64,
    pub atol: f64,
    /// Upper bound on |h|; infinite by default.
    pub h_max: f64,
    pub max_steps: usize,
}

impl Default for Options {
    fn default() -> Self {
        Self {
            rtol: 1e-8,
            atol: 1e-10,
            h_max: f64::INFINITY,
            max_steps: 200_000,
        }
    }
}

impl Options {
    pub fn with_tol(rtol: f64, atol: f64) -> Self {
        Self {
            rtol,
            atol,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct Stats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

impl std::ops::AddAssign for Stats {
    fn add_assign(&mut self, o: Self) {
        self.accepted += o.accepted;
        self.rejected += o.rejected;
        self.evaluations += o.evaluations;
    }
}

/// One accepted step, stored in the internal (possibly reflected) variable.
#[derive(Debug, Clone)]
struct Segment<const N: usize> {
    s0: f64,
    h: f64,
    rcont: [[f64; N]; 5],
}

/// Piecewise quintic-accurate interpolant over an integration run.
#[derive(Debug, Clone)]
pub struct DenseSolution<const N: usize> {
    sign: f64,
    x0: f64,
    x1: f64,
    segments: Vec<Segment<N>>,
    pub stats: Stats,
}

impl<const N: usize> DenseSolution<N> {
    pub fn x_start(&self) -> f64 {
        self.x0
    }

    pub fn x_end(&self) -> f64 {
        self.x1
    }

    pub fn contains(&self, x: f64) -> bool {
        let (lo, hi) = if self.x0 <= self.x1 { (self.x0, self.x1) } else { (self.x1, self.x0) };
        x >= lo && x <= hi
    }

    /// Interpolated state at `x`; `None` outside the integrated range.
    pub fn eval(&self, x: f64) -> Option<[f64; N]> {
        if !self.contains(x) || self.segments.is_empty() {
            return None;
        }
        let s = self.sign * x;
        let idx = self
            .segments
            .partition_point(|seg| seg.s0 + seg.h < s)
            .min(self.segments.len() - 1);
        let seg = &self.segments[idx];
        let theta = ((s - seg.s0) / seg.h).clamp(0.0, 1.0);
        let theta1 = 1.0 - theta;
        let r = &seg.rcont;
        let mut out = [0.0; N];
        for i in 0..N {
            out[i] = r[0][i]
                + theta * (r[1][i] + theta1 * (r[2][i] + theta * (r[3][i] + theta1 * r[4][i])));
        }
        Some(out)
    }
}

fn axpy<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for i in 0..N {
        let mut acc = 0.0;
        for (c, k) in terms {
            acc += c * k[i];
        }
        out[i] += h * acc;
    }
    out
}

fn err_norm<const N: usize>(e: &[f64; N], y0: &[f64; N], y1: &[f64; N], o: &Options) -> f64 {
    let mut acc = 0.0;
    for i in 0..N {
        let sc = o.atol + o.rtol * y0[i].abs().max(y1[i].abs());
        let r = e[i] / sc;
        acc += r * r;
    }
    (acc / N as f64).sqrt()
}

fn is_finite<const N: usize>(y: &[f64; N]) -> bool {
    y.iter().all(|v| v.is_finite())
}

/// Hairer's starting step heuristic.
fn initial_step<const N: usize, F>(f: &mut F, s0: f64, y0: &[f64; N], k0: &[f64; N], o: &Options, span: f64) -> f64
where
    F: FnMut(f64, &[f64; N]) -> [f64; N],
{
    let sc = |i: usize| o.atol + o.rtol * y0[i].abs();
    let d0 = (0..N).map(|i| (y0[i] / sc(i)).powi(2)).sum::<f64>().sqrt() / (N as f64).sqrt();
    let d1 = (0..N).map(|i| (k0[i] / sc(i)).powi(2)).sum::<f64>().sqrt() / (N as f64).sqrt();
    let mut h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    h0 = h0.min(span).min(o.h_max);
    let y1 = axpy(y0, h0, &[(1.0, k0)]);
    let k1 = f(s0 + h0, &y1);
    let d2 = (0..N).map(|i| ((k1[i] - k0[i]) / sc(i)).powi(2)).sum::<f64>().sqrt() / (N as f64).sqrt() / h0;
    let m = d1.max(d2);
    let h1 = if m <= 1e-15 { (h0 * 1e-3).max(1e-6) } else { (0.01 / m).powf(0.2) };
    (100.0 * h0).min(h1).min(span).min(o.h_max)
}

fn run<const N: usize, F>(mut f: F, x0: f64, y0: [f64; N], x1: f64, o: &Options, keep: bool) -> Result<([f64; N], DenseSolution<N>)>
where
    F: FnMut(f64, &[f64; N]) -> [f64; N],
{
    if !(o.rtol > 0.0 && o.atol >= 0.0) {
        return Err(crate::error::domain("integrator tolerances must be positive"));
    }
    if !x0.is_finite() || !x1.is_finite() || !is_finite(&y0) {
        return Err(Error::Integrator { x: x0, reason: "non-finite initial data".into() });
    }
    let sign = if x1 >= x0 { 1.0 } else { -1.0 };
    let mut g = |s: f64, y: &[f64; N]| -> [f64; N] {
        let mut d = f(sign * s, y);
        if sign < 0.0 {
            d.iter_mut().for_each(|v| *v = -*v);
        }
        d
    };
    let (s0, s1) = (sign * x0, sign * x1);
    let mut dense = DenseSolution { sign, x0, x1, segments: Vec::new(), stats: Stats::default() };
    if s1 == s0 {
        dense.segments.push(Segment { s0, h: 0.0, rcont: [y0, [0.0; N], [0.0; N], [0.0; N], [0.0; N]] });
        return Ok((y0, dense));
    }
    let span = s1 - s0;
    let mut s = s0;
    let mut y = y0;
    let mut k1 = g(s, &y);
    let mut stats = Stats { evaluations: 1, ..Stats::default() };
    let mut h = initial_step(&mut g, s, &y, &k1, o, span);
    stats.evaluations += 1;
    let h_min_rel = 16.0 * f64::EPSILON;
    let mut last_reject = false;
    let mut err_old: f64 = 1e-4;

    while s < s1 {
        if stats.accepted + stats.rejected >= o.max_steps {
            return Err(Error::Integrator { x: sign * s, reason: format!("step budget {} exhausted", o.max_steps) });
        }
        if h <= h_min_rel * s.abs().max(1.0) {
            return Err(Error::Integrator { x: sign * s, reason: format!("step size underflow (h = {h:e})") });
        }
        let last = s + h >= s1 - h_min_rel * s1.abs().max(1.0);
        if last {
            h = s1 - s;
        }
        let k2 = g(s + C2 * h, &axpy(&y, h, &[(A21, &k1)]));
        let k3 = g(s + C3 * h, &axpy(&y, h, &[(A31, &k1), (A32, &k2)]));
        let k4 = g(s + C4 * h, &axpy(&y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]));
        let k5 = g(s + C5 * h, &axpy(&y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]));
        let k6 = g(s + h, &axpy(&y, h, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]));
        let y_new = axpy(&y, h, &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
        let s_new = if last { s1 } else { s + h };
        let k7 = g(s_new, &y_new);
        stats.evaluations += 6;

        let mut e = [0.0; N];
        for i in 0..N {
            e[i] = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
        }
        let err = err_norm(&e, &y, &y_new, o);
        if !err.is_finite() || !is_finite(&y_new) {
            stats.rejected += 1;
            last_reject = true;
            h *= 0.1;
            continue;
        }
        if err <= 1.0 {
            if keep {
                let mut rcont = [[0.0; N]; 5];
                for i in 0..N {
                    let dy = y_new[i] - y[i];
                    let bspl = h * k1[i] - dy;
                    rcont[0][i] = y[i];
                    rcont[1][i] = dy;
                    rcont[2][i] = bspl;
                    rcont[3][i] = dy - h * k7[i] - bspl;
                    rcont[4][i] = h
                        * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i]);
                }
                dense.segments.push(Segment { s0: s, h, rcont });
            }
            stats.accepted += 1;
            s = s_new;
            y = y_new;
            k1 = k7;
            // PI step-size control (beta = 0.04 as in Hairer's DOPRI5).
            let mut fac = 0.9 * err.max(1e-10).powf(-0.2) * err_old.powf(0.04);
            fac = fac.clamp(0.2, 10.0);
            if last_reject {
                fac = fac.min(1.0);
            }
            err_old = err.max(1e-4);
            h = (h * fac).min(o.h_max);
            last_reject = false;
        } else {
            stats.rejected += 1;
            last_reject = true;
            h *= (0.9 * err.powf(-0.2)).max(0.2);
        }
    }
    dense.stats = stats;
    Ok((y, dense))
}

/// Integrate `y' = f(x, y)` from `x0` to `x1` (either direction) and return the final state.
pub fn integrate<const N: usize, F>(f: F, x0: f64, y0: [f64; N], x1: f64, o: &Options) -> Result<([f64; N], Stats)>
where
    F: FnMut(f64, &[f64; N]) -> [f64; N],
{
    let (y, d) = run(f, x0, y0, x1, o, false)?;
    Ok((y, d.stats))
}

/// Integrate and keep a dense interpolant of the whole trajectory.
pub fn integrate_dense<const N: usize, F>(f: F, x0: f64, y0: [f64; N], x1: f64, o: &Options) -> Result<DenseSolution<N>>
where
    F: FnMut(f64, &[f64; N]) -> [f64; N],
{
    run(f, x0, y0, x1, o, true).map(|(_, d)| d)
}

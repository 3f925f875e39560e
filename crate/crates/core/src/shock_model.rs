//! Shock parameters, the Rankine–Hugoniot constant, Mach number and the
//! viscous profile `v' = H(v) = v (v − 1 + a (v^−γ − 1))`.
//!
//! The profile is integrated outward from `x = 0` in the logarithms of the
//! deviations `u = v − v₊` (right) and `w = 1 − v` (left), so both tails keep
//! full relative accuracy even for `v₊` as small as `1e−6`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::error::domain as domain_error;
use crate::ode::{self, DenseSolution, Options};

/// Series branch of `a` is used when `1 − v₊` is below this.
const WEAK_SHOCK_EPS: f64 = 1e-8;

/// Endpoint residual accepted by [`solve_profile`] unless a tighter `tol` is asked for.
pub const DEFAULT_ENDPOINT_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShockParams {
    pub gamma: f64,
    pub v_plus: f64,
    pub a: f64,
    pub mach: f64,
}

fn check_gamma(gamma: f64) -> Result<()> {
    if gamma.is_finite() && gamma >= 1.0 {
        Ok(())
    } else {
        Err(domain_error(format!("gamma must be >= 1, got {gamma}")))
    }
}

fn check_v_plus(v_plus: f64) -> Result<()> {
    if v_plus.is_finite() && v_plus > 0.0 && v_plus <= 1.0 {
        Ok(())
    } else {
        Err(domain_error(format!("v_plus must lie in (0, 1], got {v_plus}")))
    }
}

/// `(1 − v₊)/(1 − v₊^γ)`, with its limit `1/γ` at `v₊ = 1`.
fn c_ratio(gamma: f64, v_plus: f64) -> f64 {
    let eps = 1.0 - v_plus;
    if gamma == 1.0 {
        return 1.0;
    }
    if eps < WEAK_SHOCK_EPS {
        return (1.0 + 0.5 * (gamma - 1.0) * eps) / gamma;
    }
    eps / -(gamma * v_plus.ln()).exp_m1()
}

/// Pressure constant `a = v₊^γ (1 − v₊)/(1 − v₊^γ)` fixed by the jump conditions.
pub fn rankine_hugoniot_a(gamma: f64, v_plus: f64) -> Result<f64> {
    check_gamma(gamma)?;
    check_v_plus(v_plus)?;
    if gamma == 1.0 {
        return Ok(v_plus);
    }
    let eps = 1.0 - v_plus;
    if eps < WEAK_SHOCK_EPS {
        return Ok((1.0 - 0.5 * (gamma + 1.0) * eps) / gamma);
    }
    Ok((gamma * v_plus.ln()).exp() * c_ratio(gamma, v_plus))
}

/// `M = (γ a)^(−1/2)`.
pub fn mach_number(gamma: f64, a: f64) -> Result<f64> {
    check_gamma(gamma)?;
    if !(a.is_finite() && a > 0.0) {
        return Err(domain_error(format!("pressure constant must be positive, got {a}")));
    }
    Ok((gamma * a).sqrt().recip())
}

impl ShockParams {
    pub fn new(gamma: f64, v_plus: f64) -> Result<Self> {
        let a = rankine_hugoniot_a(gamma, v_plus)?;
        let mach = mach_number(gamma, a)?;
        Ok(Self { gamma, v_plus, a, mach })
    }

    /// `(1 − v₊)/(1 − v₊^γ) = a v₊^−γ`; also the supremum of `h(v)/(γ v^γ)`.
    pub fn c_ratio(&self) -> f64 {
        c_ratio(self.gamma, self.v_plus)
    }
}

/// The two profile equations handled by the crate: finite Mach number, and
/// the pressureless `v₊ → 0` limit `v' = v (v − 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Model {
    FiniteMach(ShockParams),
    Limiting,
}

impl From<ShockParams> for Model {
    fn from(p: ShockParams) -> Self {
        Model::FiniteMach(p)
    }
}

impl Model {
    pub fn v_plus(&self) -> f64 {
        match self {
            Model::FiniteMach(p) => p.v_plus,
            Model::Limiting => 0.0,
        }
    }

    pub fn params(&self) -> Option<&ShockParams> {
        match self {
            Model::FiniteMach(p) => Some(p),
            Model::Limiting => None,
        }
    }

    /// `H` written in `u = v − v₊`; exact zero at `u = 0`.
    pub(crate) fn rhs_u(&self, u: f64) -> f64 {
        match self {
            Model::FiniteMach(p) => {
                let v = p.v_plus + u;
                v * (u + p.c_ratio() * (-p.gamma * (u / p.v_plus).ln_1p()).exp_m1())
            }
            Model::Limiting => u * (u - 1.0),
        }
    }

    /// `H` written in `w = 1 − v`; exact zero at `w = 0`.
    pub(crate) fn h_from_w(&self, w: f64) -> f64 {
        match self {
            Model::FiniteMach(p) => (1.0 - w) * (-w + p.a * (-p.gamma * (-w).ln_1p()).exp_m1()),
            Model::Limiting => -(1.0 - w) * w,
        }
    }

    /// `(ln u)' = H(v₊ + u)/u`, regular as `u → 0`.
    pub(crate) fn log_rate_u(&self, u: f64) -> f64 {
        match self {
            Model::FiniteMach(p) => {
                let v = p.v_plus + u;
                v * (1.0 + p.c_ratio() * (-p.gamma * (u / p.v_plus).ln_1p()).exp_m1() / u)
            }
            Model::Limiting => u - 1.0,
        }
    }

    /// `(ln w)' = −H(1 − w)/w`, regular as `w → 0`.
    pub(crate) fn log_rate_w(&self, w: f64) -> f64 {
        match self {
            Model::FiniteMach(p) => (1.0 - w) * (1.0 - p.a * (-p.gamma * (-w).ln_1p()).exp_m1() / w),
            Model::Limiting => 1.0 - w,
        }
    }

    /// Profile slope `H(v)`, evaluated in whichever deviation variable is accurate.
    pub fn rhs(&self, v: f64) -> Result<f64> {
        if !(v.is_finite() && v > 0.0) {
            return Err(domain_error(format!("volume must be positive, got {v}")));
        }
        let vp = self.v_plus();
        if v >= 0.5 * (1.0 + vp) {
            Ok(self.h_from_w(1.0 - v))
        } else {
            Ok(self.rhs_u(v - vp))
        }
    }
}

/// `H(v, v₊) = v (v − 1 + a (v^−γ − 1))`; zero at both endstates.
pub fn profile_rhs(v: f64, params: &ShockParams) -> Result<f64> {
    Model::FiniteMach(*params).rhs(v)
}

/// Closed-form limiting profile `(1 − tanh(x/2))/2`.
pub fn limiting_profile(x: f64) -> f64 {
    0.5 * (1.0 - (0.5 * x).tanh())
}

/// `1 − v̂₀(x)`, accurate for `x → −∞`.
pub fn limiting_profile_complement(x: f64) -> f64 {
    0.5 * (1.0 + (0.5 * x).tanh())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Centering {
    /// `v̂(0) = (1 + v₊)/2`, aligned with the limiting profile.
    #[default]
    Midpoint,
    /// `v̂(0) = v₊ + 1/12`, the normalization under which the exponential envelopes are stated.
    #[serde(alias = "paper_decay")]
    Decay,
}

impl Centering {
    pub fn value(&self, v_plus: f64) -> f64 {
        match self {
            Centering::Midpoint => 0.5 * (1.0 + v_plus),
            Centering::Decay => v_plus + 1.0 / 12.0,
        }
    }
}

impl std::str::FromStr for Centering {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "midpoint" => Ok(Centering::Midpoint),
            "decay" | "paper_decay" => Ok(Centering::Decay),
            _ => Err(domain_error(format!("unknown centering '{s}'"))),
        }
    }
}

/// Truncated line `[−L₋, L₊]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Domain {
    pub l_minus: f64,
    pub l_plus: f64,
}

impl Default for Domain {
    fn default() -> Self {
        Self { l_minus: 20.0, l_plus: 20.0 }
    }
}

impl Domain {
    pub fn symmetric(l: f64) -> Self {
        Self { l_minus: l, l_plus: l }
    }

    pub fn validate(&self) -> Result<()> {
        if self.l_minus.is_finite() && self.l_plus.is_finite() && self.l_minus > 0.0 && self.l_plus > 0.0 {
            Ok(())
        } else {
            Err(domain_error(format!("truncation lengths must be positive, got {self:?}")))
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= -self.l_minus && x <= self.l_plus
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileOptions {
    pub tol: f64,
    /// Largest accepted `|v̂(±L) − v∓|`.
    pub endpoint_tol: f64,
}

impl ProfileOptions {
    pub fn new(tol: f64) -> Self {
        Self { tol, endpoint_tol: tol.max(DEFAULT_ENDPOINT_TOL) }
    }
}

/// Monotone profile on a truncated domain; immutable and thread-safe.
#[derive(Debug, Clone)]
pub struct ProfileSolution {
    pub model: Model,
    pub centering: Centering,
    pub domain: Domain,
    pub tol: f64,
    right: DenseSolution<1>,
    left: DenseSolution<1>,
}

/// Integrate the profile equation outward from the centering point.
pub fn solve_profile(model: impl Into<Model>, centering: Centering, domain: Domain, tol: f64) -> Result<ProfileSolution> {
    solve_profile_with(model, centering, domain, &ProfileOptions::new(tol))
}

pub fn solve_profile_with(
    model: impl Into<Model>,
    centering: Centering,
    domain: Domain,
    opts: &ProfileOptions,
) -> Result<ProfileSolution> {
    let model = model.into();
    domain.validate()?;
    let tol = opts.tol;
    if !(tol.is_finite() && tol > 0.0) {
        return Err(domain_err_tol(tol));
    }
    let vp = model.v_plus();
    let v0 = centering.value(vp);
    if !(v0 > vp && v0 < 1.0) {
        return Err(domain_error(format!("centering value {v0} lies outside ({vp}, 1)")));
    }
    // Tails are integrated in ln u and ln w so that both keep relative accuracy.
    let o = Options::with_tol(1e-2 * tol, 1e-2 * tol);
    let right = ode::integrate_dense(|_, y: &[f64; 1]| [model.log_rate_u(y[0].exp())], 0.0, [(v0 - vp).ln()], domain.l_plus, &o)?;
    let left = ode::integrate_dense(|_, y: &[f64; 1]| [model.log_rate_w(y[0].exp())], 0.0, [(1.0 - v0).ln()], -domain.l_minus, &o)?;
    let sol = ProfileSolution { model, centering, domain, tol, right, left };
    let (u_end, w_end) = (sol.u_end(), sol.w_end());
    if !(u_end.abs() <= opts.endpoint_tol && w_end.abs() <= opts.endpoint_tol) {
        return Err(domain_error(format!(
            "domain {:?} too short: endpoint residuals {u_end:e} (right), {w_end:e} (left) exceed {:e}",
            domain, opts.endpoint_tol
        )));
    }
    Ok(sol)
}

fn domain_err_tol(tol: f64) -> Error {
    domain_error(format!("tolerance must be positive, got {tol}"))
}

impl ProfileSolution {
    fn check(&self, x: f64) -> Result<()> {
        if self.domain.contains(x) {
            Ok(())
        } else {
            Err(domain_error(format!("x = {x} outside profile domain {:?}", self.domain)))
        }
    }

    /// `v̂(x)`.
    pub fn eval(&self, x: f64) -> Result<f64> {
        self.check(x)?;
        Ok(if x >= 0.0 { self.model.v_plus() + self.u(x) } else { 1.0 - self.w(x) })
    }

    /// `v̂(x) − v₊`, accurate in the right tail.
    pub fn deviation_plus(&self, x: f64) -> Result<f64> {
        self.check(x)?;
        Ok(if x >= 0.0 { self.u(x) } else { 1.0 - self.model.v_plus() - self.w(x) })
    }

    /// `1 − v̂(x)`, accurate in the left tail.
    pub fn deviation_minus(&self, x: f64) -> Result<f64> {
        self.check(x)?;
        Ok(if x < 0.0 { self.w(x) } else { 1.0 - self.model.v_plus() - self.u(x) })
    }

    /// `v̂'(x) = H(v̂(x))`.
    pub fn slope(&self, x: f64) -> Result<f64> {
        self.check(x)?;
        Ok(if x >= 0.0 { self.model.rhs_u(self.u(x)) } else { self.model.h_from_w(self.w(x)) })
    }

    fn u(&self, x: f64) -> f64 {
        self.right.eval(x).expect("checked domain")[0].exp()
    }

    fn w(&self, x: f64) -> f64 {
        self.left.eval(x).expect("checked domain")[0].exp()
    }

    /// `ln(v̂(L₊) − v₊)`, the seed of the adjoined profile in the adjoint sweep.
    pub fn log_u_end(&self) -> f64 {
        self.right.eval(self.domain.l_plus).expect("endpoint")[0]
    }

    /// `ln(1 − v̂(−L₋))`, the seed of the adjoined profile in the forward sweep.
    pub fn log_w_end(&self) -> f64 {
        self.left.eval(-self.domain.l_minus).expect("endpoint")[0]
    }

    /// `v̂(L₊) − v₊`.
    pub fn u_end(&self) -> f64 {
        self.u(self.domain.l_plus)
    }

    /// `1 − v̂(−L₋)`.
    pub fn w_end(&self) -> f64 {
        self.w(-self.domain.l_minus)
    }

    pub fn record(&self, n_samples: usize) -> ProfileRecord {
        let (lo, hi) = (-self.domain.l_minus, self.domain.l_plus);
        let n = n_samples.max(2);
        let samples = (0..n)
            .map(|k| {
                let x = if k + 1 == n { hi } else { lo + (hi - lo) * k as f64 / (n - 1) as f64 };
                [x, self.eval(x).expect("grid inside domain")]
            })
            .collect();
        ProfileRecord {
            schema_version: ProfileRecord::SCHEMA_VERSION,
            model: self.model,
            centering: self.centering,
            domain: self.domain,
            tol: self.tol,
            samples,
        }
    }
}

/// Versioned, serializable snapshot of a profile on a uniform grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileRecord {
    pub schema_version: u32,
    pub model: Model,
    pub centering: Centering,
    pub domain: Domain,
    pub tol: f64,
    /// `(x, v̂(x))` pairs.
    pub samples: Vec<[f64; 2]>,
}

impl ProfileRecord {
    pub const SCHEMA_VERSION: u32 = 1;
}

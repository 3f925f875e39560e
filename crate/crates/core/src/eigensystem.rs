//! Coefficient matrices of the integrated eigenvalue problem, their limits
//! at `x = ±∞`, and the asymptotic mode data used to start the shooting.
//!
//! `A(x, λ)` has rows `(0, λ, 1)`, `(0, 0, 1)`, `(λv̂, λv̂, f(v̂) − λ)`; the
//! limiting system replaces `v̂` by `v̂₀` and `f` by `2v̂₀ − 1`.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::linalg::{self, Mat3, Vec3};
use crate::shock_model::{limiting_profile, Model, ProfileSolution, ShockParams};

/// Default relative splitting tolerance between the tracked eigenvalue and its neighbour.
pub const DEFAULT_SPLIT_TOL: f64 = 1e-9;

/// Cap on the static triangularization fixed-point iteration.
pub const MAX_FIXED_POINT_ITERATIONS: usize = 100;

fn check_volume(v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(domain(format!("volume must be positive, got {v}")))
    }
}

/// `h(v) = −v^(γ+1) + a(γ−1) + (a+1) v^γ`.
pub fn h_of_v(v: f64, p: &ShockParams) -> Result<f64> {
    check_volume(v)?;
    let vg = v.powf(p.gamma);
    Ok(-vg * v + p.a * (p.gamma - 1.0) + (p.a + 1.0) * vg)
}

/// `f(v) = v − v^−γ h(v) = 2v − a(γ−1) v^−γ − (a+1)`.
pub fn f_of_v(v: f64, p: &ShockParams) -> Result<f64> {
    check_volume(v)?;
    Ok(f_raw(v, p))
}

fn f_raw(v: f64, p: &ShockParams) -> f64 {
    2.0 * v - p.a * (p.gamma - 1.0) * v.powf(-p.gamma) - (p.a + 1.0)
}

/// The same coefficient written through `v₊` and `γ` only:
/// `2v − (γ−1) c (v₊/v)^γ − c v₊^γ − 1` with `c = (1−v₊)/(1−v₊^γ)`.
pub fn f_of_v_expanded(v: f64, p: &ShockParams) -> Result<f64> {
    check_volume(v)?;
    let c = p.c_ratio();
    Ok(2.0 * v - (p.gamma - 1.0) * c * (p.v_plus / v).powf(p.gamma) - c * p.v_plus.powf(p.gamma) - 1.0)
}

/// Radius `(√γ + 1/2)²` of the wedge containing every nonstable eigenvalue.
pub fn wedge_bound(gamma: f64) -> Result<f64> {
    if !(gamma.is_finite() && gamma >= 1.0) {
        return Err(domain(format!("gamma must be >= 1, got {gamma}")));
    }
    Ok((gamma.sqrt() + 0.5).powi(2))
}

fn stencil(lambda: C64, v: f64, f: f64) -> Mat3 {
    let z = C64::new(0.0, 0.0);
    let one = C64::new(1.0, 0.0);
    Mat3([[z, lambda, one], [z, z, one], [lambda * v, lambda * v, f - lambda]])
}

/// `A(x, λ)` along a computed profile.
pub fn matrix_a(x: f64, lambda: C64, profile: &ProfileSolution) -> Result<Mat3> {
    let v = profile.eval(x)?;
    Ok(EigenSystem::new(profile.model).generator(v, lambda))
}

/// `A⁰(x, λ)` along the closed-form limiting profile.
pub fn matrix_a0(x: f64, lambda: C64) -> Mat3 {
    EigenSystem::limiting().generator(limiting_profile(x), lambda)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SystemKind {
    FiniteMach,
    Limiting,
}

/// Spectral parameter restricted to the closed right half plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralPoint(C64);

impl SpectralPoint {
    pub fn new(lambda: C64) -> Result<Self> {
        if lambda.re >= 0.0 && lambda.is_finite() {
            Ok(Self(lambda))
        } else {
            Err(domain(format!("spectral parameter {lambda} lies outside Re λ >= 0")))
        }
    }

    pub fn lambda(&self) -> C64 {
        self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigenSystem {
    pub model: Model,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mode {
    pub mu: C64,
    pub vector: Vec3,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticData {
    pub lambda: C64,
    pub a_minus: Mat3,
    pub a_plus: Mat3,
    /// Unique unstable mode of `A₋` (dominant entry normalized to 1).
    pub unstable_minus: Mode,
    /// Modes of `A₊` spanning the decaying subspace, slow mode first.
    pub stable_plus: [Mode; 2],
    /// Mode of `−A₊*` decaying at `+∞`; `mu` is its rate.
    pub adjoint_decaying_plus: Mode,
}

impl AsymptoticData {
    pub fn mu_unstable_minus(&self) -> C64 {
        self.unstable_minus.mu
    }
}

/// Sort eigenvalues by decreasing real part and check the top one is split off.
fn split_top(lambda: C64, mut ev: [C64; 3], tol: f64) -> Result<[C64; 3]> {
    ev.sort_by(|a, b| b.re.total_cmp(&a.re));
    let gap = ev[0].re - ev[1].re;
    let thresh = tol * (ev[0].norm() + ev[1].norm());
    if !(gap > thresh && ev[0].re > tol * ev[0].norm()) {
        return Err(Error::DegenerateSpectrum { lambda, gap, tol: thresh });
    }
    Ok(ev)
}

/// Normalize so that entry `k` equals 1, falling back to the dominant entry when it is negligible.
pub fn normalize_reference(v: &Vec3, k: usize) -> Vec3 {
    let n = linalg::norm(v);
    if v[k].norm() > 1e-3 * n {
        let mut out = linalg::scale(v, v[k].inv());
        out[k] = C64::new(1.0, 0.0);
        out
    } else {
        linalg::normalize_max_entry(v)
    }
}

/// `Ṽ₁ = (0, 1, 1/(1+λ̄))`.
pub fn limiting_adjoint_vector(lambda: C64) -> Vec3 {
    [C64::new(0.0, 0.0), C64::new(1.0, 0.0), (1.0 + lambda.conj()).inv()]
}

/// Unstable root `(1 + √(1+4λ))/2` of `A⁰₋` and its eigenvector `((λ+μ)/μ, 1, μ)`.
pub fn limiting_unstable_minus(lambda: C64) -> Mode {
    let mu = 0.5 * (1.0 + (1.0 + 4.0 * lambda).sqrt());
    Mode { mu, vector: [(lambda + mu) / mu, C64::new(1.0, 0.0), mu] }
}

impl EigenSystem {
    pub fn new(model: Model) -> Self {
        Self { model }
    }

    pub fn finite(params: ShockParams) -> Self {
        Self { model: Model::FiniteMach(params) }
    }

    pub fn limiting() -> Self {
        Self { model: Model::Limiting }
    }

    pub fn kind(&self) -> SystemKind {
        match self.model {
            Model::FiniteMach(_) => SystemKind::FiniteMach,
            Model::Limiting => SystemKind::Limiting,
        }
    }

    /// `f(v)` for this system (`2v − 1` in the limit).
    pub fn coefficient_f(&self, v: f64) -> f64 {
        match &self.model {
            Model::FiniteMach(p) => f_raw(v, p),
            Model::Limiting => 2.0 * v - 1.0,
        }
    }

    /// Matrix at a given profile value.
    pub fn generator(&self, v: f64, lambda: C64) -> Mat3 {
        stencil(lambda, v, self.coefficient_f(v))
    }

    pub fn a_minus(&self, lambda: C64) -> Mat3 {
        self.generator(1.0, lambda)
    }

    pub fn a_plus(&self, lambda: C64) -> Mat3 {
        self.generator(self.model.v_plus(), lambda)
    }

    /// Classified eigen-decompositions at both ends.
    pub fn asymptotic_modes(&self, lambda: C64, split_tol: f64) -> Result<AsymptoticData> {
        if !lambda.is_finite() {
            return Err(domain(format!("non-finite spectral parameter {lambda}")));
        }
        let a_minus = self.a_minus(lambda);
        let a_plus = self.a_plus(lambda);
        let ev_m = split_top(lambda, linalg::eigenvalues(&a_minus), split_tol)?;
        let unstable_minus = match self.model {
            Model::Limiting => {
                let m = limiting_unstable_minus(lambda);
                Mode { mu: m.mu, vector: linalg::normalize_max_entry(&m.vector) }
            }
            Model::FiniteMach(_) => Mode {
                mu: ev_m[0],
                vector: linalg::normalize_max_entry(&linalg::eigenvector(&a_minus, ev_m[0])),
            },
        };
        let zero = C64::new(0.0, 0.0);
        let one = C64::new(1.0, 0.0);
        let (stable_plus, adjoint_decaying_plus) = match self.model {
            Model::Limiting => {
                let a = -1.0 - lambda;
                let v2 = Mode { mu: zero, vector: [one, zero, zero] };
                let v3 = Mode { mu: a, vector: [(lambda / a + 1.0) / a, a.inv(), one] };
                ([v2, v3], Mode { mu: zero, vector: limiting_adjoint_vector(lambda) })
            }
            Model::FiniteMach(_) => {
                let ev = split_top(lambda, linalg::eigenvalues(&a_plus), split_tol)?;
                let mode = |mu: C64| Mode { mu, vector: linalg::normalize_max_entry(&linalg::eigenvector(&a_plus, mu)) };
                // The slow stable root is the one closer to the origin.
                let (s, f) = if ev[1].norm() <= ev[2].norm() { (ev[1], ev[2]) } else { (ev[2], ev[1]) };
                let l = linalg::left_eigenvector(&a_plus, ev[0]);
                let adj = Mode { mu: -ev[0].conj(), vector: normalize_reference(&linalg::conj(&l), 1) };
                ([mode(s), mode(f)], adj)
            }
        };
        Ok(AsymptoticData { lambda, a_minus, a_plus, unstable_minus, stable_plus, adjoint_decaying_plus })
    }
}

/// Outcome of the static block-triangularization of `A₊`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Triangularization {
    /// Row vector `θ₊`.
    pub theta: [C64; 2],
    /// Size of the last fixed-point update.
    pub residual: f64,
    /// Norm of the (2,1) block of `L₊ A₊ R₊`.
    pub block_norm: f64,
    pub iterations: usize,
}

/// Solve `θ (aI − λJ) = −𝟙ᵀ + λ v₊ (θ𝟙) θ`, `a = f(v₊) − λ`, by fixed-point iteration.
///
/// With `R₊ = [[I, 0], [λv₊θ, 1]]` and `L₊ = R₊⁻¹`, the lower-left block of
/// `L₊ A₊ R₊` vanishes at the fixed point.
pub fn triangularize_plus(params: &ShockParams, lambda: C64, tol: f64) -> Result<Triangularization> {
    if !(tol > 0.0) {
        return Err(domain(format!("tolerance must be positive, got {tol}")));
    }
    if lambda.re < 0.0 {
        return Err(domain(format!("spectral parameter {lambda} lies outside Re λ >= 0")));
    }
    let sys = EigenSystem::finite(*params);
    let a = sys.coefficient_f(params.v_plus) - lambda;
    let k = lambda * params.v_plus;
    // Row vector times (aI − λJ)⁻¹ = [[1/a, λ/a²], [0, 1/a]].
    let solve = |x: [C64; 2]| [x[0] / a, x[0] * lambda / (a * a) + x[1] / a];
    let step = |t: [C64; 2]| {
        let s = k * (t[0] + t[1]);
        solve([-1.0 + s * t[0], -1.0 + s * t[1]])
    };
    let mut theta = solve([C64::new(-1.0, 0.0), C64::new(-1.0, 0.0)]);
    let mut residual = f64::INFINITY;
    let mut iterations = 0;
    while iterations < MAX_FIXED_POINT_ITERATIONS {
        let next = step(theta);
        iterations += 1;
        residual = ((next[0] - theta[0]).norm_sqr() + (next[1] - theta[1]).norm_sqr()).sqrt();
        theta = next;
        if !residual.is_finite() {
            break;
        }
        let scale = 1.0 + (theta[0].norm_sqr() + theta[1].norm_sqr()).sqrt();
        if residual <= tol * scale {
            break;
        }
    }
    let scale = 1.0 + (theta[0].norm_sqr() + theta[1].norm_sqr()).sqrt();
    if !(residual <= tol * scale) {
        return Err(Error::NonContraction { lambda, iterations, last_step: residual });
    }
    let block_norm = lower_left_block(&sys.a_plus(lambda), lambda, params.v_plus, theta);
    Ok(Triangularization { theta, residual, block_norm, iterations })
}

/// Norm of the (2,1) block of `L₊ A₊ R₊` computed by explicit 3×3 products.
pub fn lower_left_block(a_plus: &Mat3, lambda: C64, v_plus: f64, theta: [C64; 2]) -> f64 {
    let t = [lambda * v_plus * theta[0], lambda * v_plus * theta[1]];
    let mut r = Mat3::identity();
    r.0[2][0] = t[0];
    r.0[2][1] = t[1];
    let mut l = Mat3::identity();
    l.0[2][0] = -t[0];
    l.0[2][1] = -t[1];
    let m = l.mul(a_plus).mul(&r);
    (m.0[2][0].norm_sqr() + m.0[2][1].norm_sqr()).sqrt()
}

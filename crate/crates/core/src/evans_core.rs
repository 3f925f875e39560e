//! Evans function evaluation by adjoint shooting.
//!
//! The forward solution `W = e^{μ₋x} Y` is started on the unstable mode of
//! `A₋` at `x = −L₋`, the adjoint `W̃ = e^{νx} Z` on the decaying mode of
//! `−A₊*` at `x = L₊`, and `D(λ) = ⟨W̃, W⟩` is read off at the meeting point.
//! The profile ODE rides along as a seventh real state component (the log of
//! its deviation from the nearer endstate).

use std::sync::Arc;

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::contour_stability::Contour;
use crate::eigensystem::{self, EigenSystem, Mode, DEFAULT_SPLIT_TOL};
use crate::error::{domain, Error, Result};
use crate::linalg::{self, Vec3};
use crate::ode::{self, Options};
use crate::shock_model::{self, Centering, Domain, Model, ProfileSolution};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    /// Unstable mode of `A₋`, used at `x = −L₋`.
    Minus,
    /// Decaying mode of `−A₊*`, used at `x = +L₊`.
    PlusAdjoint,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrackScheme {
    KatoContinuation,
    PointwiseEigenvector,
}

impl std::str::FromStr for TrackScheme {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "kato_continuation" | "kato" => Ok(TrackScheme::KatoContinuation),
            "pointwise_eigenvector" | "pointwise" => Ok(TrackScheme::PointwiseEigenvector),
            _ => Err(domain(format!("unknown tracking scheme '{s}'"))),
        }
    }
}

/// Initial directions for one side of the shooting problem, one per contour sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeTrack {
    pub side: Side,
    pub scheme: TrackScheme,
    pub contour: Vec<C64>,
    pub vectors: Vec<Vec3>,
    /// Growth rate removed during integration (`μ₋` or `ν`).
    pub rates: Vec<C64>,
}

impl ModeTrack {
    pub fn mode(&self, k: usize) -> Mode {
        Mode { mu: self.rates[k], vector: self.vectors[k] }
    }
}

/// Tracked eigenvalue, normalized right eigenvector, and bilinear left eigenvector.
fn tracked(system: &EigenSystem, lambda: C64, side: Side, split_tol: f64) -> Result<(C64, Vec3, Vec3)> {
    let data = system.asymptotic_modes(lambda, split_tol)?;
    let (m, mode) = match side {
        Side::Minus => (data.a_minus, data.unstable_minus),
        Side::PlusAdjoint => (data.a_plus.adjoint().scale(C64::new(-1.0, 0.0)), data.adjoint_decaying_plus),
    };
    let l = linalg::left_eigenvector(&m, mode.mu);
    Ok((mode.mu, mode.vector, l))
}

/// One step of the Kato transport for a simple eigenvalue.
///
/// `r` is the current vector and `l_prev` the left eigenvector at its
/// sample; `e`, `l` are right and left eigenvectors at the next sample.
/// Returns `None` on a branch flip (`Re⟨r, r_next⟩ ≤ 0`) or overflow.
pub fn kato_step(r: &Vec3, l_prev: &Vec3, e: &Vec3, l: &Vec3) -> Option<Vec3> {
    let p_r = linalg::scale(e, linalg::dot(l, r) / linalg::dot(l, e));
    let s = (linalg::dot(l_prev, r) / linalg::dot(l_prev, &p_r)).sqrt();
    let next = linalg::scale(&p_r, s);
    (linalg::inner(r, &next).re > 0.0 && next.iter().all(|z| z.is_finite())).then_some(next)
}

/// Initialize a mode along an ordered contour.
///
/// Kato continuation applies the spectral projector of the next sample to
/// the current vector and rescales by `sqrt(l_kᵀr_k / l_kᵀP_{k+1}r_k)`, a
/// symmetric (second-order) discretization of Kato's transport equation.
/// On the shock stencils the step happens to reproduce the transport
/// solution exactly, independent of the sampling.
/// The limiting adjoint direction is known in closed form and used as is.
pub fn continue_modes(contour: &[C64], system: &EigenSystem, side: Side, scheme: TrackScheme, split_tol: f64) -> Result<ModeTrack> {
    let mut track = ModeTrack { side, scheme, contour: contour.to_vec(), vectors: Vec::new(), rates: Vec::new() };
    if contour.is_empty() {
        return Ok(track);
    }
    let closed_form = side == Side::PlusAdjoint && system.kind() == eigensystem::SystemKind::Limiting;
    let mut prev: Option<(Vec3, Vec3)> = None;
    for (k, &lambda) in contour.iter().enumerate() {
        let (mu, e, l) = tracked(system, lambda, side, split_tol)?;
        let v = match (scheme, prev) {
            (TrackScheme::KatoContinuation, Some((r, l_prev))) if !closed_form => {
                kato_step(&r, &l_prev, &e, &l).ok_or(Error::BranchFlip { index: k - 1, lambda })?
            }
            _ => e,
        };
        prev = Some((v, l));
        track.vectors.push(v);
        track.rates.push(mu);
    }
    Ok(track)
}

/// Track a contour, exploiting its conjugate symmetry when it has one: the
/// upper half is continued from the real-axis seed and the lower half is
/// obtained by conjugation, so `D(λ̄) = conj D(λ)` holds exactly.
pub fn track_contour(contour: &Contour, system: &EigenSystem, side: Side, scheme: TrackScheme, split_tol: f64) -> Result<ModeTrack> {
    let samples = contour.samples();
    let Some(plan) = contour.mirror_plan() else {
        return continue_modes(samples, system, side, scheme, split_tol);
    };
    let path: Vec<C64> = plan.path.iter().map(|&i| samples[i]).collect();
    let sub = continue_modes(&path, system, side, scheme, split_tol).map_err(|e| match e {
        Error::BranchFlip { index, lambda } => Error::BranchFlip { index: plan.path[index], lambda },
        e => e,
    })?;
    let n = samples.len();
    let mut vectors = vec![None; n];
    let mut rates = vec![C64::new(0.0, 0.0); n];
    for (k, &i) in plan.path.iter().enumerate() {
        vectors[i] = Some(sub.vectors[k]);
        rates[i] = sub.rates[k];
    }
    for i in 0..n {
        if vectors[i].is_none() {
            let j = plan.mirror[i];
            let v = vectors[j].expect("mirror lies on the tracked path");
            vectors[i] = Some(linalg::conj(&v));
            rates[i] = rates[j].conj();
        }
    }
    Ok(ModeTrack {
        side,
        scheme,
        contour: samples.to_vec(),
        vectors: vectors.into_iter().map(|v| v.expect("filled")).collect(),
        rates,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvansConfig {
    pub domain: Domain,
    pub rtol: f64,
    pub atol: f64,
    pub profile_tol: f64,
    pub centering: Centering,
    pub meeting_point: f64,
    /// Offset at which the pairing is re-evaluated to measure conservation.
    pub defect_offset: f64,
    pub split_tol: f64,
    pub minus_scheme: TrackScheme,
    pub plus_scheme: TrackScheme,
    pub max_steps: usize,
}

impl Default for EvansConfig {
    fn default() -> Self {
        Self {
            domain: Domain::default(),
            rtol: 1e-8,
            atol: 1e-10,
            profile_tol: 1e-10,
            centering: Centering::Midpoint,
            meeting_point: 0.0,
            defect_offset: 1.0,
            split_tol: DEFAULT_SPLIT_TOL,
            minus_scheme: TrackScheme::KatoContinuation,
            plus_scheme: TrackScheme::PointwiseEigenvector,
            max_steps: 200_000,
        }
    }
}

impl EvansConfig {
    fn options(&self) -> Options {
        Options { rtol: self.rtol, atol: self.atol, max_steps: self.max_steps, ..Options::default() }
    }
}

/// System plus (for finite Mach number) its precomputed profile.
#[derive(Debug, Clone)]
pub enum EvansModel {
    FiniteMach(Arc<ProfileSolution>),
    Limiting,
}

impl EvansModel {
    /// Solve the profile on `cfg.domain` when needed.
    pub fn build(model: Model, cfg: &EvansConfig) -> Result<Self> {
        match model {
            Model::Limiting => Ok(EvansModel::Limiting),
            Model::FiniteMach(_) => Ok(EvansModel::FiniteMach(Arc::new(shock_model::solve_profile(
                model,
                cfg.centering,
                cfg.domain,
                cfg.profile_tol,
            )?))),
        }
    }

    pub fn system(&self) -> EigenSystem {
        match self {
            EvansModel::FiniteMach(p) => EigenSystem::new(p.model),
            EvansModel::Limiting => EigenSystem::limiting(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvansValue {
    pub lambda: C64,
    pub d: C64,
    pub meeting_point: f64,
    pub conservation_defect: f64,
    pub steps_forward: usize,
    pub steps_adjoint: usize,
    pub rtol: f64,
    pub atol: f64,
}

fn pack(v: &Vec3, extra: f64) -> [f64; 7] {
    [v[0].re, v[0].im, v[1].re, v[1].im, v[2].re, v[2].im, extra]
}

fn unpack(y: &[f64; 7]) -> Vec3 {
    [C64::new(y[0], y[1]), C64::new(y[2], y[3]), C64::new(y[4], y[5])]
}

fn finite(y: &[f64; 7]) -> bool {
    y.iter().all(|v| v.is_finite())
}

/// Evaluate `D(λ)` (or `D⁰(λ)`) from given initial modes.
pub fn evans_at(lambda: C64, model: &EvansModel, init_minus: &Mode, init_plus: &Mode, cfg: &EvansConfig) -> Result<EvansValue> {
    if !(lambda.re >= 0.0) {
        return Err(domain(format!("spectral parameter {lambda} lies outside Re λ >= 0")));
    }
    let dom = match model {
        EvansModel::FiniteMach(p) => p.domain,
        EvansModel::Limiting => cfg.domain,
    };
    dom.validate()?;
    let m = cfg.meeting_point;
    let delta = cfg.defect_offset.abs();
    if !(dom.contains(m - delta) && dom.contains(m + delta)) || m - delta <= -dom.l_minus || m + delta >= dom.l_plus {
        return Err(domain(format!("meeting point {m} ± {delta} must lie inside {dom:?}")));
    }
    let system = model.system();
    let opts = cfg.options();
    let mu = init_minus.mu;
    let nu = init_plus.mu;
    let lc = lambda.conj();

    // Profile value from the adjoined component (finite) or the closed form (limiting).
    let (w0, u0, model_eq) = match model {
        EvansModel::FiniteMach(p) => (p.log_w_end(), p.log_u_end(), Some(p.model)),
        EvansModel::Limiting => (0.0, 0.0, None),
    };
    let v_plus = system.model.v_plus();

    let forward = |x: f64, y: &[f64; 7]| -> [f64; 7] {
        let (v, dw) = match model_eq {
            Some(me) => {
                let w = y[6].exp();
                (1.0 - w, me.log_rate_w(w))
            }
            None => (shock_model::limiting_profile(x), 0.0),
        };
        let f = system.coefficient_f(v);
        let z = unpack(y);
        let lv = lambda * v;
        let d1 = lambda * z[1] + z[2] - mu * z[0];
        let d2 = z[2] - mu * z[1];
        let d3 = lv * (z[0] + z[1]) + (f - lambda - mu) * z[2];
        pack(&[d1, d2, d3], dw)
    };
    let adjoint = |x: f64, y: &[f64; 7]| -> [f64; 7] {
        let (v, du) = match model_eq {
            Some(me) => {
                let u = y[6].exp();
                (v_plus + u, me.log_rate_u(u))
            }
            None => (shock_model::limiting_profile(x), 0.0),
        };
        let f = system.coefficient_f(v);
        let z = unpack(y);
        let lv = lc * v;
        let d1 = -lv * z[2] - nu * z[0];
        let d2 = -lc * z[0] - lv * z[2] - nu * z[1];
        let d3 = -z[0] - z[1] - (f - lc + nu) * z[2];
        pack(&[d1, d2, d3], du)
    };

    let nonfinite = |x: f64| Error::NonFinite { x, lambda };

    let mut ys = [[0.0; 7]; 3];
    let mut y = pack(&init_minus.vector, w0);
    let mut x = -dom.l_minus;
    let mut steps_forward = 0;
    for (k, target) in [m - delta, m, m + delta].into_iter().enumerate() {
        let (y1, st) = ode::integrate(forward, x, y, target, &opts)?;
        if !finite(&y1) {
            return Err(nonfinite(target));
        }
        steps_forward += st.accepted;
        ys[k] = y1;
        y = y1;
        x = target;
    }
    let mut zs = [[0.0; 7]; 3];
    let mut z = pack(&init_plus.vector, u0);
    let mut x = dom.l_plus;
    let mut steps_adjoint = 0;
    for (k, target) in [m + delta, m, m - delta].into_iter().enumerate() {
        let (z1, st) = ode::integrate(adjoint, x, z, target, &opts)?;
        if !finite(&z1) {
            return Err(nonfinite(target));
        }
        steps_adjoint += st.accepted;
        zs[2 - k] = z1;
        z = z1;
        x = target;
    }
    let pairing = |k: usize, x: f64| (x * (nu.conj() + mu)).exp() * linalg::inner(&unpack(&zs[k]), &unpack(&ys[k]));
    let d = pairing(1, m);
    if !d.is_finite() {
        return Err(nonfinite(m));
    }
    let d_lo = pairing(0, m - delta);
    let d_hi = pairing(2, m + delta);
    let conservation_defect = (d_lo - d).norm().max((d_hi - d).norm()) / d.norm();
    Ok(EvansValue {
        lambda,
        d,
        meeting_point: m,
        conservation_defect,
        steps_forward,
        steps_adjoint,
        rtol: cfg.rtol,
        atol: cfg.atol,
    })
}

/// Evaluate along a contour: sequential mode tracking, then parallel shooting.
///
/// Results are returned in contour order; failures are collected with their indices.
pub fn evans_on_contour(contour: &Contour, model: &EvansModel, cfg: &EvansConfig) -> Result<Vec<EvansValue>> {
    if contour.samples().is_empty() {
        return Ok(Vec::new());
    }
    let system = model.system();
    let minus = track_contour(contour, &system, Side::Minus, cfg.minus_scheme, cfg.split_tol)?;
    let plus = track_contour(contour, &system, Side::PlusAdjoint, cfg.plus_scheme, cfg.split_tol)?;
    let results: Vec<Result<EvansValue>> = contour
        .samples()
        .par_iter()
        .enumerate()
        .map(|(k, &lambda)| evans_at(lambda, model, &minus.mode(k), &plus.mode(k), cfg))
        .collect();
    let mut values = Vec::with_capacity(results.len());
    let mut failures = Vec::new();
    for (k, r) in results.into_iter().enumerate() {
        match r {
            Ok(v) => values.push(v),
            Err(e) => failures.push((k, Box::new(e))),
        }
    }
    if failures.is_empty() {
        Ok(values)
    } else {
        Err(Error::Contour { failures })
    }
}

/// Single-point convenience wrapper using pointwise initialization.
pub fn evans_point(lambda: C64, model: &EvansModel, cfg: &EvansConfig) -> Result<EvansValue> {
    let system = model.system();
    let minus = continue_modes(&[lambda], &system, Side::Minus, TrackScheme::PointwiseEigenvector, cfg.split_tol)?;
    let plus = continue_modes(&[lambda], &system, Side::PlusAdjoint, TrackScheme::PointwiseEigenvector, cfg.split_tol)?;
    evans_at(lambda, model, &minus.mode(0), &plus.mode(0), cfg)
}

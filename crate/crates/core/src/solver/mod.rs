//! Pseudo-spectral incompressible Navier-Stokes integrator on the torus.
//!
//! The velocity is advanced in Fourier space in rotational form,
//!
//! ```text
//! d/dt u_k = P_k F[u x omega]_k - nu |k|^2 u_k,
//! ```
//!
//! where `P_k = I - k k^T / |k|^2` removes the pressure (and the gradient of
//! the kinetic energy density). Products are formed in real space and
//! truncated with the two-thirds rule. Time stepping is classical RK4 with an
//! integrating factor for the viscous term; an explicit-viscous variant is
//! kept for convergence studies.

mod initial;
mod run;

use std::path::PathBuf;
use std::sync::atomic::{AtomicU64, Ordering};

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fft::{self, Fft3};
use crate::field::{SpectralVectorField, VectorField};
use crate::grid::Grid;
use crate::operators::{curl_spectral, dealias, leray_project};

pub use initial::{init_kida, init_lowfreq_noise, lowfreq_noise_spectrum, taylor_green};
pub use run::{run, Trajectory, TrajectoryRow, TRAJECTORY_FILE};

#[derive(Debug, Clone, PartialEq)]
pub enum InitialCondition {
    Kida,
    LowFreqNoise { seed: u64, k_max: usize, amplitude: f64 },
    File(PathBuf),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TimeStep {
    Fixed(f64),
    /// Target Courant number `dt * max|u| / spacing`.
    Cfl(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ViscousTreatment {
    IntegratingFactor,
    Explicit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub grid: Grid,
    pub nu: f64,
    pub time_step: TimeStep,
    pub t_end: f64,
    pub snapshot_every: usize,
    pub ic: InitialCondition,
    pub dealias: bool,
    pub viscous: ViscousTreatment,
}

impl SolverConfig {
    pub fn new(grid: Grid, nu: f64, dt: f64, t_end: f64) -> Self {
        Self {
            grid,
            nu,
            time_step: TimeStep::Fixed(dt),
            t_end,
            snapshot_every: 10,
            ic: InitialCondition::Kida,
            dealias: true,
            viscous: ViscousTreatment::IntegratingFactor,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &'static str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidParameter { name, reason: format!("{v} must be positive") })
            }
        };
        positive("nu", self.nu)?;
        match self.time_step {
            TimeStep::Fixed(dt) => positive("dt", dt)?,
            TimeStep::Cfl(c) => {
                if !(c > 0.0 && c < 1.0) {
                    return Err(Error::InvalidParameter {
                        name: "cfl",
                        reason: format!("{c} outside (0, 1)"),
                    });
                }
            }
        }
        if !(self.t_end.is_finite() && self.t_end >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "t_end",
                reason: format!("{} must be nonnegative", self.t_end),
            });
        }
        if self.snapshot_every == 0 {
            return Err(Error::InvalidParameter {
                name: "snapshot_every",
                reason: "must be at least 1".into(),
            });
        }
        Ok(())
    }
}

/// Velocity in Fourier space at time `t`, with cached diagnostics.
#[derive(Debug, Clone)]
pub struct FlowState {
    pub t: f64,
    u_hat: SpectralVectorField,
    /// Kinetic energy `||u||_2^2 / 2`.
    pub energy: f64,
    /// Component-max norm of the vorticity.
    pub omega_inf: f64,
    /// Identifies the state for the solver's first-stage cache.
    stamp: u64,
}

fn fresh_stamp() -> u64 {
    static NEXT: AtomicU64 = AtomicU64::new(0);
    NEXT.fetch_add(1, Ordering::Relaxed)
}

impl FlowState {
    /// Builds a state from a spectrum, which is taken as given (no projection).
    pub fn from_spectral(t: f64, u_hat: SpectralVectorField) -> Result<Self> {
        let energy = 0.5 * u_hat.l2_norm_sqr();
        let omega = curl_spectral(&u_hat).inverse()?;
        let omega_inf = crate::operators::max_norm(&omega);
        if !energy.is_finite() {
            return Err(Error::NonFinite { what: "flow state energy", index: 0 });
        }
        Ok(Self { t, u_hat, energy, omega_inf, stamp: fresh_stamp() })
    }

    /// Projects a real-space velocity onto divergence-free (and, if
    /// requested, dealiased) modes.
    pub fn from_velocity(t: f64, u: &VectorField, dealiased: bool) -> Result<Self> {
        let mut spec = SpectralVectorField::forward(u);
        leray_project(&mut spec);
        if dealiased {
            dealias(&mut spec);
        }
        Self::from_spectral(t, spec)
    }

    pub fn u_hat(&self) -> &SpectralVectorField {
        &self.u_hat
    }

    pub fn velocity(&self) -> Result<VectorField> {
        self.u_hat.inverse()
    }

    pub fn vorticity(&self) -> Result<VectorField> {
        curl_spectral(&self.u_hat).inverse()
    }
}

type Modes = [Vec<Complex64>; 3];

fn zeros(len: usize) -> Modes {
    [
        vec![Complex64::new(0.0, 0.0); len],
        vec![Complex64::new(0.0, 0.0); len],
        vec![Complex64::new(0.0, 0.0); len],
    ]
}

/// Wavenumber tables and FFT plan; immutable for the solver's lifetime.
struct Tables {
    plan: std::sync::Arc<Fft3>,
    len: usize,
    volume: f64,
    /// `|k|^2` per mode.
    k2: Vec<f64>,
    /// Flat indices of the retained modes; every other mode stays zero.
    active: Vec<usize>,
    /// Derivative wavevector per active mode.
    active_k: Vec<[f64; 3]>,
    band: Option<i64>,
}

/// Reused buffers. Spectral buffers are only ever written on active modes,
/// so their inactive entries remain zero.
struct Scratch {
    w: Modes,
    work: Vec<Complex64>,
    real: [Vec<f64>; 6],
    prod: [Vec<f64>; 3],
}

impl Scratch {
    fn new(len: usize) -> Self {
        Self {
            w: zeros(len),
            work: vec![Complex64::new(0.0, 0.0); len],
            real: std::array::from_fn(|_| vec![0.0; len]),
            prod: std::array::from_fn(|_| vec![0.0; len]),
        }
    }
}

#[inline]
fn i_times(z: Complex64) -> Complex64 {
    Complex64::new(-z.im, z.re)
}

impl Tables {
    fn curl_into(&self, u: &Modes, w: &mut Modes) {
        for (&idx, k) in self.active.iter().zip(&self.active_k) {
            w[0][idx] = i_times(u[2][idx] * k[1] - u[1][idx] * k[2]);
            w[1][idx] = i_times(u[0][idx] * k[2] - u[2][idx] * k[0]);
            w[2][idx] = i_times(u[1][idx] * k[0] - u[0][idx] * k[1]);
        }
    }

    /// Projected, dealiased nonlinear term `P F[u x omega]` written to `out`;
    /// returns the component-max of `u` in real space.
    fn nonlinear(&self, u: &Modes, sc: &mut Scratch, out: &mut Modes) -> f64 {
        self.curl_into(u, &mut sc.w);
        let p = &self.plan;
        let band = self.band;
        let [r0, r1, r2, r3, r4, r5] = &mut sc.real;
        p.inverse_real_pair_into(&u[0], &u[1], band, &mut sc.work, r0, r1);
        p.inverse_real_pair_into(&u[2], &sc.w[0], band, &mut sc.work, r2, r3);
        p.inverse_real_pair_into(&sc.w[1], &sc.w[2], band, &mut sc.work, r4, r5);
        let (ux, uy, uz, wx, wy, wz) = (&*r0, &*r1, &*r2, &*r3, &*r4, &*r5);
        let [px, py, pz] = &mut sc.prod;
        let mut umax: f64 = 0.0;
        for i in 0..self.len {
            px[i] = uy[i] * wz[i] - uz[i] * wy[i];
            py[i] = uz[i] * wx[i] - ux[i] * wz[i];
            pz[i] = ux[i] * wy[i] - uy[i] * wx[i];
            umax = umax.max(ux[i].abs()).max(uy[i].abs()).max(uz[i].abs());
        }
        let [o0, o1, o2] = out;
        p.forward_real_pair_into(px, py, band, &mut sc.work, o0, o1);
        p.forward_real_into(pz, band, o2);
        // Leray projection on the retained modes.
        for (&idx, k) in self.active.iter().zip(&self.active_k) {
            let k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
            if k2 == 0.0 {
                out[0][idx] = Complex64::new(0.0, 0.0);
                out[1][idx] = Complex64::new(0.0, 0.0);
                out[2][idx] = Complex64::new(0.0, 0.0);
                continue;
            }
            let dot = out[0][idx] * k[0] + out[1][idx] * k[1] + out[2][idx] * k[2];
            let scale = dot / k2;
            for j in 0..3 {
                out[j][idx] -= scale * k[j];
            }
        }
        umax
    }

    fn explicit_rhs(&self, nu: f64, u: &Modes, sc: &mut Scratch, out: &mut Modes) -> f64 {
        let umax = self.nonlinear(u, sc, out);
        self.add_viscous(nu, u, out);
        umax
    }

    fn add_viscous(&self, nu: f64, u: &Modes, out: &mut Modes) {
        for j in 0..3 {
            for &i in &self.active {
                out[j][i] -= u[j][i] * (nu * self.k2[i]);
            }
        }
    }

    /// Kinetic energy of active-mode velocity `u`.
    fn energy(&self, u: &Modes) -> f64 {
        let norm = 1.0 / self.len as f64;
        let mut sum = 0.0;
        for &i in &self.active {
            for m in u {
                sum += (m[i] * norm).norm_sqr();
            }
        }
        0.5 * self.volume * sum
    }

    /// Vorticity max of the field last passed to [`Tables::nonlinear`].
    fn omega_inf(sc: &Scratch) -> f64 {
        sc.real[3..].iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

/// Integrator for one configuration: precomputed tables plus reusable
/// stage buffers.
pub struct Solver {
    config: SolverConfig,
    tables: Tables,
    scratch: Scratch,
    stages: [Modes; 5],
    spare: Option<Modes>,
    factors: Option<(f64, Vec<f64>, Vec<f64>)>,
    /// Stamp and velocity max of the state whose nonlinear term is held in
    /// the first stage buffer.
    carried: Option<(u64, f64)>,
    step_index: usize,
}

impl Solver {
    pub fn new(config: SolverConfig) -> Result<Self> {
        config.validate()?;
        let g = config.grid;
        let n = g.n();
        let k = g.wavenumbers();
        let mut k2 = Vec::with_capacity(g.len());
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    k2.push(k[a] * k[a] + k[b] * k[b] + k[c] * k[c]);
                }
            }
        }
        let kd = g.derivative_wavenumbers();
        let mut active = Vec::new();
        let mut active_k = Vec::new();
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    if !config.dealias || g.keeps_mode(a, b, c) {
                        active.push(g.index(a, b, c));
                        active_k.push([kd[a], kd[b], kd[c]]);
                    }
                }
            }
        }
        let tables = Tables {
            plan: fft::plan(&g),
            len: g.len(),
            volume: g.volume(),
            k2,
            active,
            active_k,
            band: config.dealias.then(|| g.dealias_cutoff()),
        };
        Ok(Self {
            tables,
            scratch: Scratch::new(g.len()),
            stages: std::array::from_fn(|_| zeros(g.len())),
            spare: None,
            factors: None,
            carried: None,
            step_index: 0,
            config,
        })
    }

    pub fn config(&self) -> &SolverConfig {
        &self.config
    }

    /// Initial state from the configured initial condition.
    pub fn initial_state(&self) -> Result<FlowState> {
        let g = &self.config.grid;
        match &self.config.ic {
            InitialCondition::Kida => FlowState::from_velocity(0.0, &init_kida(g), self.config.dealias),
            InitialCondition::LowFreqNoise { seed, k_max, amplitude } => {
                let mut spec = lowfreq_noise_spectrum(g, *seed, *k_max, *amplitude)?;
                if self.config.dealias {
                    dealias(&mut spec);
                }
                FlowState::from_spectral(0.0, spec)
            }
            InitialCondition::File(path) => {
                let snap = crate::snapshot::Snapshot::read(path)?;
                g.check_same(snap.grid())?;
                FlowState::from_velocity(snap.t, &snap.velocity, self.config.dealias)
            }
        }
    }

    fn pick_dt(config: &SolverConfig, umax: f64) -> f64 {
        match config.time_step {
            TimeStep::Fixed(dt) => dt,
            TimeStep::Cfl(c) => {
                let h = config.grid.spacing();
                if umax > 0.0 {
                    c * h / umax
                } else {
                    // At rest only viscosity acts; any step is exact.
                    c * h
                }
            }
        }
    }

    /// Hands the buffers of a state that is no longer needed back to the
    /// solver for reuse.
    pub fn recycle(&mut self, state: FlowState) {
        if state.u_hat.grid() == &self.config.grid {
            self.spare = Some(state.u_hat.into_modes());
        }
    }

    /// One RK4 step with the configured step size, capped by `max_dt`.
    pub fn step(&mut self, state: &FlowState, max_dt: f64) -> Result<FlowState> {
        self.config.grid.check_same(state.u_hat.grid())?;
        let tables = &self.tables;
        let [u, a, b, c, d] = &mut self.stages;
        // Restrict the input to the active modes.
        for j in 0..3 {
            let src = state.u_hat.component(j);
            for &i in &tables.active {
                u[j][i] = src[i];
            }
        }
        let nu = self.config.nu;
        let umax = match self.carried.take() {
            // The nonlinear term of this state was evaluated with its diagnostics.
            Some((stamp, umax)) if stamp == state.stamp => {
                if self.config.viscous == ViscousTreatment::Explicit {
                    tables.add_viscous(nu, u, a);
                }
                umax
            }
            _ => match self.config.viscous {
                ViscousTreatment::IntegratingFactor => tables.nonlinear(u, &mut self.scratch, a),
                ViscousTreatment::Explicit => tables.explicit_rhs(nu, u, &mut self.scratch, a),
            },
        };
        let dt = Self::pick_dt(&self.config, umax).min(max_dt);
        let mut next = match self.spare.take() {
            Some(mut m) => {
                // Inactive entries of a recycled state may be nonzero.
                if tables.active.len() != tables.len {
                    for comp in m.iter_mut() {
                        comp.fill(Complex64::new(0.0, 0.0));
                    }
                }
                m
            }
            None => zeros(tables.len),
        };
        match self.config.viscous {
            ViscousTreatment::IntegratingFactor => {
                let stale = !matches!(&self.factors, Some((d_, _, _)) if *d_ == dt);
                if stale {
                    let k2 = tables.active.iter().map(|&i| tables.k2[i]);
                    let e1 = k2.clone().map(|k2| (-nu * k2 * dt).exp()).collect();
                    let e2 = k2.map(|k2| (-0.5 * nu * k2 * dt).exp()).collect();
                    self.factors = Some((dt, e1, e2));
                }
                let (_, e1, e2) = self.factors.as_ref().expect("factors computed");
                rk4_integrating_factor(tables, &mut self.scratch, [u, a, b, c, d], &mut next, e1, e2, dt);
            }
            ViscousTreatment::Explicit => {
                rk4_explicit(tables, nu, &mut self.scratch, [u, a, b, c, d], &mut next, dt);
            }
        }
        self.step_index += 1;
        let t = state.t + dt;
        let blow_up = Error::BlowUp { step: self.step_index, t };
        let energy = tables.energy(&next);
        let umax = tables.nonlinear(&next, &mut self.scratch, a);
        let omega_inf = Tables::omega_inf(&self.scratch);
        if !energy.is_finite() || !omega_inf.is_finite() {
            return Err(blow_up);
        }
        let stamp = fresh_stamp();
        self.carried = Some((stamp, umax));
        let u_hat = SpectralVectorField::new(self.config.grid, next)?;
        Ok(FlowState { t, u_hat, energy, omega_inf, stamp })
    }

    /// Advances to `t_end` without persisting anything; returns the final state.
    pub fn advance_to(&mut self, mut state: FlowState, t_end: f64) -> Result<FlowState> {
        while t_end - state.t > 1e-12 * t_end.max(1.0) {
            let next = self.step(&state, t_end - state.t)?;
            self.recycle(std::mem::replace(&mut state, next));
        }
        Ok(state)
    }
}

/// Integrating-factor RK4: with `v = exp(nu |k|^2 t) u` the viscous term is
/// integrated exactly and classical RK4 is applied to the nonlinear term.
fn rk4_integrating_factor(
    tables: &Tables,
    sc: &mut Scratch,
    [u, a, b, c, d]: [&mut Modes; 5],
    out: &mut Modes,
    e1: &[f64],
    e2: &[f64],
    dt: f64,
) {
    let h = 0.5 * dt;
    let act = &tables.active;
    // `out` doubles as the stage input buffer.
    for j in 0..3 {
        for (m, &i) in act.iter().enumerate() {
            out[j][i] = (u[j][i] + a[j][i] * h) * e2[m];
        }
    }
    tables.nonlinear(out, sc, b);
    for j in 0..3 {
        for (m, &i) in act.iter().enumerate() {
            out[j][i] = u[j][i] * e2[m] + b[j][i] * h;
        }
    }
    tables.nonlinear(out, sc, c);
    for j in 0..3 {
        for (m, &i) in act.iter().enumerate() {
            out[j][i] = u[j][i] * e1[m] + c[j][i] * (dt * e2[m]);
        }
    }
    tables.nonlinear(out, sc, d);
    let sixth = dt / 6.0;
    for j in 0..3 {
        for (m, &i) in act.iter().enumerate() {
            out[j][i] = u[j][i] * e1[m]
                + (a[j][i] * e1[m] + (b[j][i] + c[j][i]) * (2.0 * e2[m]) + d[j][i]) * sixth;
        }
    }
}

fn rk4_explicit(
    tables: &Tables,
    nu: f64,
    sc: &mut Scratch,
    [u, a, b, c, d]: [&mut Modes; 5],
    out: &mut Modes,
    dt: f64,
) {
    let act = &tables.active;
    let stage = |out: &mut Modes, w: f64, k: &Modes| {
        for j in 0..3 {
            for &i in act {
                out[j][i] = u[j][i] + k[j][i] * w;
            }
        }
    };
    stage(out, 0.5 * dt, a);
    tables.explicit_rhs(nu, out, sc, b);
    stage(out, 0.5 * dt, b);
    tables.explicit_rhs(nu, out, sc, c);
    stage(out, dt, c);
    tables.explicit_rhs(nu, out, sc, d);
    let sixth = dt / 6.0;
    for j in 0..3 {
        for &i in act {
            out[j][i] = u[j][i] + (a[j][i] + (b[j][i] + c[j][i]) * 2.0 + d[j][i]) * sixth;
        }
    }
}

/// One step of the configured scheme from `state`.
pub fn step(state: &FlowState, config: &SolverConfig) -> Result<FlowState> {
    Solver::new(config.clone())?.step(state, f64::INFINITY)
}

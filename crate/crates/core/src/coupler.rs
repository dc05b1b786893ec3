//! Outer iteration between the front law and the temperature problem,
//! wrapped in a continuation on the truncated kinetics `K_n = max{K, 1/n}`.
//!
//! For a fixed `n` a damped Picard alternation is used: the trace `θ` gives
//! the forcing `H = R·K_n(θ)`, the front relaxation gives `(c*, ψ*)`, and
//! the temperature is re-solved behind the damped front. The continuation
//! doubles `n` from `n₀`, warm-starting each stage from the last.

use alloc::format;
use alloc::string::ToString;
use alloc::vec::Vec;

use log::{debug, info, warn};

use crate::diagnostics::{run_all, DiagnosticsReport};
use crate::error::{config, domain, Error, Result};
use crate::front::{front_residual, relax_front, Forcing, FrontParams, FrontProfile};
use crate::kinetics::{CombustionRate, KineticsModel};
use crate::temperature::{solve_temperature, StripGrid, TemperatureField, MAX_PECLET};

/// Far-field decay `c_lb·L` targeted by the automatic strip length.
pub const AUTO_DECAY: f64 = 10.0;

/// Retries of a failed stage, each with half the previous damping.
pub const DAMPING_RETRIES: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GridLength {
    Fixed(f64),
    /// `L = min(10/c_lb, N_x/c_M)`: ten decay lengths at the slowest
    /// admissible speed, capped so that the cell Péclet number stays ≤ 1.
    Auto,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub nx: usize,
    pub ny: usize,
    pub length: GridLength,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Initialization {
    /// `ψ₀ ≡ 0`.
    Flat,
    /// `ψ₀ = a·(1 − cos 2πy)`, for probing initialization sensitivity.
    Cosine { amplitude: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub kinetics: KineticsModel,
    pub rate: CombustionRate,
    pub grid: GridSpec,
    /// Damping `ω ∈ (0, 1]` of the front update.
    pub damping: f64,
    /// Tolerance `ε_out` of the Picard iteration and of the continuation.
    pub outer_tol: f64,
    pub max_outer_iter: usize,
    pub front: FrontParams,
    pub n0: u64,
    pub max_stages: usize,
    pub init: Initialization,
    /// Attach a diagnostics report to the result.
    pub diagnostics: bool,
}

impl SolverConfig {
    pub fn new(kinetics: KineticsModel, rate: CombustionRate, grid: GridSpec) -> Self {
        Self {
            kinetics,
            rate,
            grid,
            damping: 1.0,
            outer_tol: 1e-6,
            max_outer_iter: 200,
            front: FrontParams::default(),
            n0: 1,
            max_stages: 24,
            init: Initialization::Flat,
            diagnostics: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return Err(config(
                "solver.damping",
                format!("must lie in (0, 1], got {}", self.damping),
            ));
        }
        if !(self.outer_tol > 0.0 && self.outer_tol.is_finite()) {
            return Err(config("solver.outer_tol", "must be positive"));
        }
        if self.max_outer_iter == 0 {
            return Err(config("solver.max_outer_iter", "must be at least 1"));
        }
        if self.n0 == 0 {
            return Err(config("solver.n0", "must be at least 1"));
        }
        if self.max_stages == 0 {
            return Err(config("solver.max_stages", "must be at least 1"));
        }
        if !(self.front.tol > 0.0) || self.front.max_iter == 0 {
            return Err(config(
                "solver.front_tol",
                "front tolerance and iteration cap must be positive",
            ));
        }
        if !(self.front.cfl > 0.0 && self.front.cfl <= 0.5) {
            return Err(config("solver.front_cfl", "must lie in (0, 0.5]"));
        }
        if let Initialization::Cosine { amplitude } = self.init {
            if !amplitude.is_finite() {
                return Err(config("solver.init", "amplitude must be finite"));
            }
        }
        let GridSpec { nx, ny, length } = self.grid;
        if nx < 16 {
            return Err(config(
                "grid.nx",
                format!("need at least 16 cells, got {nx}"),
            ));
        }
        if ny < 8 || !ny.is_power_of_two() {
            return Err(config(
                "grid.ny",
                format!("must be a power of two >= 8, got {ny}"),
            ));
        }
        if let GridLength::Fixed(l) = length {
            if !(l > 0.0 && l.is_finite()) {
                return Err(config("grid.l", format!("must be positive, got {l}")));
            }
        }
        if !self.rate.is_aligned(ny) {
            return Err(config(
                "rate.edges",
                format!("striation edges must fall on grid nodes j/{ny}"),
            ));
        }
        let l = self.resolved_length();
        let peclet = self.speed_cap() * l / nx as f64;
        if peclet > MAX_PECLET {
            return Err(config(
                "grid.nx",
                format!("cell Péclet number up to {peclet:.3} exceeds 2; use more X cells or a shorter strip"),
            ));
        }
        Ok(())
    }

    /// Lower speed bound `R_m ∫₀¹ K` of the untruncated problem.
    pub fn speed_floor(&self) -> f64 {
        self.rate.bounds().0 * self.kinetics.base().integral()
    }

    /// Upper bound `R_M · sup K_n` on the speed over every stage.
    pub fn speed_cap(&self) -> f64 {
        let floor = 1.0 / self.n0.max(1) as f64;
        self.rate.bounds().1 * self.kinetics.sup().max(floor)
    }

    /// The strip length `L`, resolving [`GridLength::Auto`].
    pub fn resolved_length(&self) -> f64 {
        match self.grid.length {
            GridLength::Fixed(l) => l,
            GridLength::Auto => {
                let decay = AUTO_DECAY / self.speed_floor();
                decay.min(self.grid.nx as f64 / self.speed_cap())
            }
        }
    }

    pub fn strip_grid(&self) -> Result<StripGrid> {
        StripGrid::new(self.grid.nx, self.grid.ny, self.resolved_length())
    }

    fn initial_front(&self) -> Result<FrontProfile> {
        match self.init {
            Initialization::Flat => FrontProfile::flat(self.grid.ny),
            Initialization::Cosine { amplitude } => FrontProfile::from_fn(self.grid.ny, |y| {
                amplitude * (1.0 - libm::cos(2.0 * core::f64::consts::PI * y))
            })
            .map(|p| p.normalized()),
        }
    }
}

/// Iterate `(c, ψ, θ)` of the Picard alternation.
#[derive(Debug, Clone, PartialEq)]
pub struct PicardState {
    pub c: f64,
    pub psi: FrontProfile,
    pub theta: Vec<f64>,
}

impl PicardState {
    /// `ψ ≡ ψ₀`, `c = R_M·K_M`, `θ ≡ 1`.
    pub fn initial(config: &SolverConfig, kinetics: &KineticsModel) -> Result<Self> {
        Ok(Self {
            c: config.rate.bounds().1 * kinetics.sup(),
            psi: config.initial_front()?,
            theta: alloc::vec![1.0; config.grid.ny],
        })
    }

    fn of(wave: &TravelingWave) -> Self {
        Self {
            c: wave.c,
            psi: wave.psi.clone(),
            theta: wave.theta.clone(),
        }
    }

    /// `‖ψ − ψ'‖∞ + |c − c'| + ‖θ − θ'‖∞`.
    pub fn distance(&self, other: &Self) -> f64 {
        let sup = |a: &[f64], b: &[f64]| {
            a.iter()
                .zip(b)
                .fold(0.0f64, |m, (x, y)| m.max(libm::fabs(x - y)))
        };
        sup(self.psi.values(), other.psi.values())
            + libm::fabs(self.c - other.c)
            + sup(&self.theta, &other.theta)
    }
}

/// `H_j = R_j·K(θ_j)`. Traces are clamped at 0 against round-off.
pub fn forcing_from_trace(
    kinetics: &KineticsModel,
    rate_samples: &[f64],
    theta: &[f64],
) -> Result<Forcing> {
    if rate_samples.len() != theta.len() {
        return Err(Error::SizeMismatch {
            expected: rate_samples.len(),
            found: theta.len(),
        });
    }
    let values = rate_samples
        .iter()
        .zip(theta)
        .map(|(r, t)| kinetics.eval(t.max(0.0)).map(|k| r * k))
        .collect::<Result<Vec<_>>>()?;
    Forcing::new(values)
}

/// One damped sweep: forcing from `θ`, front relaxation, damped front
/// update and a temperature solve behind the new front.
pub fn picard_step(
    state: &PicardState,
    kinetics: &KineticsModel,
    rate: &CombustionRate,
    grid: &StripGrid,
    omega: f64,
    front: &FrontParams,
) -> Result<(PicardState, TemperatureField)> {
    if !(omega > 0.0 && omega <= 1.0) {
        return Err(domain(format!("damping must lie in (0, 1], got {omega}")));
    }
    let forcing = forcing_from_trace(kinetics, &rate.grid_samples(grid.ny), &state.theta)?;
    let (c, target) = relax_front(&forcing, &state.psi, front)?;
    let psi = state.psi.blend(&target, omega)?.normalized();
    let field = solve_temperature(&psi, c, grid)?;
    let theta = field.trace().to_vec();
    Ok((PicardState { c, psi, theta }, field))
}

/// Summary of one continuation stage.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct StageRecord {
    pub n: u64,
    pub c: f64,
    pub iterations: usize,
    pub damping: f64,
    /// Last Picard change.
    pub delta: f64,
    pub front_residual: f64,
    pub linear_residual: f64,
    pub trace_deviation: f64,
    /// `min_j K(θ_j)` for the untruncated law.
    pub min_kinetics: f64,
    pub floor_active: bool,
}

/// A computed wave `(c, ψ, u)` together with its residuals and history.
#[derive(Debug, Clone, PartialEq)]
pub struct TravelingWave {
    pub c: f64,
    pub psi: FrontProfile,
    pub field: TemperatureField,
    pub theta: Vec<f64>,
    pub forcing: Forcing,
    /// The truncated law `K_n` the wave solves.
    pub kinetics: KineticsModel,
    pub truncation: u64,
    pub front_residual: f64,
    pub linear_residual: f64,
    /// `∫θ dy − 1`.
    pub trace_deviation: f64,
    pub min_kinetics: f64,
    pub floor_active: bool,
    pub history: Vec<StageRecord>,
    pub converged: bool,
}

impl TravelingWave {
    /// Rebuilds a wave from stored parts, recomputing the forcing and the
    /// residuals. `kinetics` is the untruncated law.
    pub fn from_parts(
        c: f64,
        psi: FrontProfile,
        field: TemperatureField,
        theta: Vec<f64>,
        kinetics: &KineticsModel,
        truncation: u64,
        rate: &CombustionRate,
    ) -> Result<Self> {
        if field.grid().ny != psi.len() {
            return Err(Error::SizeMismatch {
                expected: psi.len(),
                found: field.grid().ny,
            });
        }
        let kn = kinetics.base().truncate(truncation)?;
        let forcing = forcing_from_trace(&kn, &rate.grid_samples(psi.len()), &theta)?;
        let residual = front_residual(&psi, c, &forcing)?;
        let (min_kinetics, floor_active) = floor_state(kinetics, &theta, truncation)?;
        Ok(Self {
            c,
            front_residual: sup(&residual),
            linear_residual: field.linear_residual,
            trace_deviation: mean(&theta) - 1.0,
            psi,
            field,
            theta,
            forcing,
            kinetics: kn,
            truncation,
            min_kinetics,
            floor_active,
            history: Vec::new(),
            converged: true,
        })
    }

    fn record(&self, iterations: usize, damping: f64, delta: f64) -> StageRecord {
        StageRecord {
            n: self.truncation,
            c: self.c,
            iterations,
            damping,
            delta,
            front_residual: self.front_residual,
            linear_residual: self.linear_residual,
            trace_deviation: self.trace_deviation,
            min_kinetics: self.min_kinetics,
            floor_active: self.floor_active,
        }
    }
}

fn sup(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(libm::fabs(*x)))
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn floor_state(kinetics: &KineticsModel, theta: &[f64], n: u64) -> Result<(f64, bool)> {
    let base = kinetics.base();
    let mut min = f64::INFINITY;
    for t in theta {
        min = min.min(base.eval(t.max(0.0))?);
    }
    Ok((min, min < 1.0 / n as f64))
}

/// Iterates [`picard_step`] with `K_n` until the change falls below
/// `ε_out`, then relaxes the front once more against the final trace so
/// that `H = R·K_n(θ)` holds exactly.
pub fn solve_at_truncation(
    config: &SolverConfig,
    n: u64,
    warm: Option<&TravelingWave>,
) -> Result<TravelingWave> {
    config.validate()?;
    let grid = config.strip_grid()?;
    let kn = config.kinetics.base().truncate(n)?;
    let mut state = match warm {
        Some(w) => PicardState::of(w),
        None => PicardState::initial(config, &kn)?,
    };
    let mut visited = Vec::new();
    let mut delta = f64::INFINITY;
    for it in 1..=config.max_outer_iter {
        let (next, field) = picard_step(
            &state,
            &kn,
            &config.rate,
            &grid,
            config.damping,
            &config.front,
        )?;
        delta = state.distance(&next);
        visited.push(next.c);
        debug!("n = {n} step {it}: c = {:.12}, change {delta:.3e}", next.c);
        if !delta.is_finite() {
            break;
        }
        state = next;
        if delta < config.outer_tol {
            let samples = config.rate.grid_samples(grid.ny);
            let forcing = forcing_from_trace(&kn, &samples, &state.theta)?;
            let (c, psi) = relax_front(&forcing, &state.psi, &config.front)?;
            let residual = front_residual(&psi, c, &forcing)?;
            let (min_kinetics, floor_active) = floor_state(&config.kinetics, &state.theta, n)?;
            let mut wave = TravelingWave {
                c,
                psi,
                linear_residual: field.linear_residual,
                field,
                trace_deviation: mean(&state.theta) - 1.0,
                theta: state.theta,
                forcing,
                kinetics: kn,
                truncation: n,
                front_residual: sup(&residual),
                min_kinetics,
                floor_active,
                history: Vec::new(),
                converged: true,
            };
            let record = wave.record(it, config.damping, delta);
            wave.history.push(record);
            return Ok(wave);
        }
    }
    Err(Error::PicardNotConverged {
        n,
        iterations: visited.len(),
        delta,
        visited,
    })
}

/// A continuation result with its optional diagnostics report.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveOutcome {
    pub wave: TravelingWave,
    pub report: Option<DiagnosticsReport>,
}

/// Runs the continuation `n = n₀, 2n₀, …`. It stops once consecutive
/// speeds differ by less than `ε_out`, or at the first stage if the floor
/// `1/n₀` is never reached by `K(θ)` there.
pub fn solve_traveling_wave(config: &SolverConfig) -> Result<SolveOutcome> {
    config.validate()?;
    let length = config.resolved_length();
    let c_lb = config.speed_floor();
    if c_lb * length < AUTO_DECAY {
        warn!(
            "strip length L = {length:.4} gives c_lb·L = {:.3} < {AUTO_DECAY}",
            c_lb * length
        );
    }
    info!(
        "strip length L = {length:.6}, speed bracket [{c_lb:.6}, {:.6}]",
        config.speed_cap()
    );
    let mut history: Vec<StageRecord> = Vec::new();
    let mut current: Option<TravelingWave> = None;
    let mut n = config.n0;
    for stage in 0..config.max_stages {
        let mut wave = run_stage(config, n, current.as_ref(), &history)?;
        let record = wave.history[0].clone();
        info!(
            "stage n = {n}: c = {:.12}, {} iterations, min K(θ) = {:.4e}, floor {}",
            record.c,
            record.iterations,
            record.min_kinetics,
            if record.floor_active {
                "active"
            } else {
                "inactive"
            }
        );
        let settled = history
            .last()
            .is_some_and(|p| libm::fabs(record.c - p.c) < config.outer_tol);
        let inactive_at_start = stage == 0 && !record.floor_active;
        history.push(record);
        if settled || inactive_at_start {
            wave.history = history;
            let report = config
                .diagnostics
                .then(|| run_all(&wave, &wave.kinetics, &config.rate));
            return Ok(SolveOutcome { wave, report });
        }
        current = Some(wave);
        n = n.checked_mul(2).ok_or_else(|| Error::NonConvergence {
            n,
            reason: "truncation index overflow".to_string(),
            history: history.clone(),
        })?;
    }
    Err(Error::NonConvergence {
        n,
        reason: format!("speed not settled after {} stages", config.max_stages),
        history: history.to_vec(),
    })
}

fn run_stage(
    config: &SolverConfig,
    n: u64,
    warm: Option<&TravelingWave>,
    history: &[StageRecord],
) -> Result<TravelingWave> {
    let mut attempt = config.clone();
    let mut last = None;
    for retry in 0..=DAMPING_RETRIES {
        match solve_at_truncation(&attempt, n, warm) {
            Ok(wave) => return Ok(wave),
            Err(e @ (Error::Config { .. } | Error::Peclet { .. })) => return Err(e),
            Err(e) => {
                warn!("stage n = {n} failed with damping {}: {e}", attempt.damping);
                if retry < DAMPING_RETRIES {
                    attempt.damping *= 0.5;
                }
                last = Some(e);
            }
        }
    }
    let reason = match last {
        Some(Error::PicardNotConverged { visited, delta, .. }) => {
            let tail: Vec<_> = visited
                .iter()
                .rev()
                .take(8)
                .rev()
                .map(|c| format!("{c:.8}"))
                .collect();
            format!(
                "Picard change {delta:.3e}; last speeds visited [{}]",
                tail.join(", ")
            )
        }
        Some(e) => e.to_string(),
        None => "unknown".to_string(),
    };
    Err(Error::NonConvergence {
        n,
        reason,
        history: history.to_vec(),
    })
}

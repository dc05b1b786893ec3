//! Kinetic laws `K(u)` and periodic combustion rates `R(y)`.
//!
//! Both are validated at construction: `K` is continuous, nondecreasing and
//! bounded by a cached supremum `K_M`; `R` is 1-periodic with cached bounds
//! `0 < R_m ≤ R(y) ≤ R_M`.

use alloc::boxed::Box;
use alloc::format;
use alloc::vec::Vec;

use crate::error::{config, domain, Result};
use crate::quadrature;

/// Relative tolerance of [`KineticsModel::integral`] for non-polynomial laws.
pub const INTEGRAL_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub enum KineticLaw {
    /// `K(u) = A exp(−B/u)`, extended by continuity with `K(0) = 0`.
    Arrhenius {
        a: f64,
        b: f64,
    },
    Constant {
        k: f64,
    },
    /// Piecewise-linear through `(u, K)` breakpoints, constant outside them.
    Tabulated {
        points: Vec<(f64, f64)>,
    },
    /// `max{K_base(u), floor}`.
    Truncated {
        base: Box<KineticsModel>,
        floor: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct KineticsModel {
    law: KineticLaw,
    sup: f64,
}

impl KineticsModel {
    pub fn arrhenius(a: f64, b: f64) -> Result<Self> {
        if !(a > 0.0 && a.is_finite()) {
            return Err(config(
                "kinetics.a",
                format!("must be positive and finite, got {a}"),
            ));
        }
        if !(b > 0.0 && b.is_finite()) {
            return Err(config(
                "kinetics.b",
                format!("must be positive and finite, got {b}"),
            ));
        }
        Ok(Self {
            law: KineticLaw::Arrhenius { a, b },
            sup: a,
        })
    }

    pub fn constant(k: f64) -> Result<Self> {
        if !(k > 0.0 && k.is_finite()) {
            return Err(config(
                "kinetics.k",
                format!("must be positive and finite, got {k}"),
            ));
        }
        Ok(Self {
            law: KineticLaw::Constant { k },
            sup: k,
        })
    }

    /// Breakpoints must have strictly increasing `u ≥ 0`, nondecreasing
    /// values `K ≥ 0`, and a positive last value.
    pub fn tabulated(points: Vec<(f64, f64)>) -> Result<Self> {
        if points.is_empty() {
            return Err(config(
                "kinetics.points",
                "at least one breakpoint is required",
            ));
        }
        for (k, &(u, v)) in points.iter().enumerate() {
            if !(u >= 0.0 && u.is_finite() && v >= 0.0 && v.is_finite()) {
                return Err(config(
                    "kinetics.points",
                    format!("breakpoint {k} = ({u}, {v}) must be finite with u >= 0 and K >= 0"),
                ));
            }
            if k > 0 {
                let (pu, pv) = points[k - 1];
                if u <= pu {
                    return Err(config(
                        "kinetics.points",
                        "breakpoint abscissae must be strictly increasing",
                    ));
                }
                if v < pv {
                    return Err(config(
                        "kinetics.points",
                        "breakpoint values must be nondecreasing",
                    ));
                }
            }
        }
        let sup = points[points.len() - 1].1;
        if sup <= 0.0 {
            return Err(config(
                "kinetics.points",
                "the last breakpoint value must be positive",
            ));
        }
        Ok(Self {
            law: KineticLaw::Tabulated { points },
            sup,
        })
    }

    pub fn law(&self) -> &KineticLaw {
        &self.law
    }

    /// The cached supremum `K_M`.
    pub fn sup(&self) -> f64 {
        self.sup
    }

    /// Truncation floor, if this is a truncated law.
    pub fn floor(&self) -> Option<f64> {
        match &self.law {
            KineticLaw::Truncated { floor, .. } => Some(*floor),
            _ => None,
        }
    }

    /// The untruncated law underneath any truncation.
    pub fn base(&self) -> &KineticsModel {
        match &self.law {
            KineticLaw::Truncated { base, .. } => base,
            _ => self,
        }
    }

    /// Evaluates `K(u)` for `u ≥ 0`.
    pub fn eval(&self, u: f64) -> Result<f64> {
        if !(u >= 0.0) {
            return Err(domain(format!(
                "kinetics evaluated at negative or NaN temperature {u}"
            )));
        }
        Ok(self.value(u))
    }

    fn value(&self, u: f64) -> f64 {
        match &self.law {
            KineticLaw::Arrhenius { a, b } => {
                if u <= 0.0 {
                    0.0
                } else {
                    a * libm::exp(-b / u)
                }
            }
            KineticLaw::Constant { k } => *k,
            KineticLaw::Tabulated { points } => interpolate(points, u),
            KineticLaw::Truncated { base, floor } => base.value(u).max(*floor),
        }
    }

    /// The truncated law `K_n = max{K, 1/n}`. Re-truncating keeps the
    /// larger of the two floors.
    pub fn truncate(&self, n: u64) -> Result<Self> {
        if n < 1 {
            return Err(domain("truncation index n must be at least 1"));
        }
        Ok(self.with_floor(1.0 / n as f64))
    }

    pub(crate) fn with_floor(&self, floor: f64) -> Self {
        let (base, floor) = match &self.law {
            KineticLaw::Truncated { base, floor: old } => (base.clone(), old.max(floor)),
            _ => (Box::new(self.clone()), floor),
        };
        let sup = base.sup.max(floor);
        Self {
            law: KineticLaw::Truncated { base, floor },
            sup,
        }
    }

    /// `∫₀¹ K(s) ds`: closed form for constant and tabulated laws, adaptive
    /// quadrature to relative tolerance [`INTEGRAL_TOL`] otherwise.
    pub fn integral(&self) -> f64 {
        match &self.law {
            KineticLaw::Truncated { base, floor } => truncated_integral(base, *floor),
            _ => integral_from(self, 0.0),
        }
    }
}

fn interpolate(points: &[(f64, f64)], u: f64) -> f64 {
    let (u0, v0) = points[0];
    if u <= u0 {
        return v0;
    }
    let (ul, vl) = points[points.len() - 1];
    if u >= ul {
        return vl;
    }
    let k = points.partition_point(|p| p.0 <= u);
    let (ua, va) = points[k - 1];
    let (ub, vb) = points[k];
    va + (vb - va) * (u - ua) / (ub - ua)
}

/// `∫_{lo}^{1} K(s) ds` for an untruncated law.
fn integral_from(model: &KineticsModel, lo: f64) -> f64 {
    if lo >= 1.0 {
        return 0.0;
    }
    match &model.law {
        KineticLaw::Constant { k } => k * (1.0 - lo),
        KineticLaw::Tabulated { points } => {
            // Exact for piecewise-linear integrands: trapezoid on the breakpoints
            // clipped to [lo, 1].
            let mut knots: Vec<f64> = alloc::vec![lo];
            knots.extend(points.iter().map(|p| p.0).filter(|&u| u > lo && u < 1.0));
            knots.push(1.0);
            knots
                .windows(2)
                .map(|w| {
                    0.5 * (w[1] - w[0]) * (interpolate(points, w[0]) + interpolate(points, w[1]))
                })
                .sum()
        }
        KineticLaw::Arrhenius { .. } => {
            let f = |s: f64| model.value(s);
            quadrature::integrate(f, lo, 1.0, INTEGRAL_TOL * 1e-2, 1e-300).0
        }
        KineticLaw::Truncated { base, floor } => truncated_integral(base, *floor),
    }
}

fn truncated_integral(base: &KineticsModel, floor: f64) -> f64 {
    match &base.law {
        KineticLaw::Arrhenius { a, b } => {
            // The crossing A e^{−B/s} = floor is explicit.
            let cross = if *a > floor {
                b / libm::log(a / floor)
            } else {
                f64::INFINITY
            };
            let cross = cross.min(1.0);
            floor * cross + integral_from(base, cross)
        }
        KineticLaw::Constant { k } => k.max(floor),
        KineticLaw::Tabulated { points } => {
            // Split each linear piece where it crosses the floor.
            let mut knots: Vec<f64> = alloc::vec![0.0];
            knots.extend(points.iter().map(|p| p.0).filter(|&u| u > 0.0 && u < 1.0));
            knots.push(1.0);
            let g = |u: f64| interpolate(points, u).max(floor);
            let mut total = 0.0;
            for w in knots.windows(2) {
                let (ua, ub) = (w[0], w[1]);
                let (va, vb) = (interpolate(points, ua), interpolate(points, ub));
                if va < floor && vb > floor {
                    let uc = ua + (floor - va) * (ub - ua) / (vb - va);
                    total += floor * (uc - ua) + 0.5 * (ub - uc) * (floor + vb);
                } else {
                    total += 0.5 * (ub - ua) * (g(ua) + g(ub));
                }
            }
            total
        }
        KineticLaw::Truncated { base, floor: inner } => truncated_integral(base, floor.max(*inner)),
    }
}

/// Shape of a periodic combustion rate.
#[derive(Debug, Clone, PartialEq)]
pub enum RateProfile {
    /// Cell `k` spans `[edges[k], edges[k+1])`; the last cell wraps around
    /// to `edges[0] + 1`.
    PiecewiseConstant { edges: Vec<f64>, values: Vec<f64> },
    /// `mean + Σ_k cos[k]·cos(2π(k+1)y) + sin[k]·sin(2π(k+1)y)`.
    Smooth {
        mean: f64,
        cos: Vec<f64>,
        sin: Vec<f64>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct CombustionRate {
    profile: RateProfile,
    min: f64,
    max: f64,
}

impl CombustionRate {
    pub fn constant(r: f64) -> Result<Self> {
        Self::piecewise_constant(alloc::vec![0.0], alloc::vec![r])
    }

    pub fn piecewise_constant(edges: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if edges.is_empty() || edges.len() != values.len() {
            return Err(config(
                "rate.edges",
                format!(
                    "need one edge per value ({} edges, {} values)",
                    edges.len(),
                    values.len()
                ),
            ));
        }
        if edges.iter().any(|e| !(*e >= 0.0 && *e < 1.0)) {
            return Err(config("rate.edges", "edges must lie in [0, 1)"));
        }
        if edges.windows(2).any(|w| w[1] <= w[0]) {
            return Err(config("rate.edges", "edges must be strictly increasing"));
        }
        if values.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
            return Err(config(
                "rate.values",
                "rate values must be positive and finite",
            ));
        }
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        let max = values.iter().copied().fold(0.0, f64::max);
        Ok(Self {
            profile: RateProfile::PiecewiseConstant { edges, values },
            min,
            max,
        })
    }

    /// Trigonometric rate; the constructor locates the extrema and rejects
    /// series whose minimum is not positive.
    pub fn smooth(mean: f64, cos: Vec<f64>, sin: Vec<f64>) -> Result<Self> {
        if !mean.is_finite() || cos.iter().chain(sin.iter()).any(|v| !v.is_finite()) {
            return Err(config("rate.coefficients", "coefficients must be finite"));
        }
        let profile = RateProfile::Smooth { mean, cos, sin };
        let (min, max) = smooth_extrema(&profile);
        if !(min > 0.0) {
            return Err(config(
                "rate",
                format!("smooth rate has non-positive minimum {min:.6}"),
            ));
        }
        Ok(Self { profile, min, max })
    }

    pub fn profile(&self) -> &RateProfile {
        &self.profile
    }

    /// `R(y mod 1)`.
    pub fn eval(&self, y: f64) -> f64 {
        let y = y - libm::floor(y);
        match &self.profile {
            RateProfile::PiecewiseConstant { edges, values } => {
                let k = edges.partition_point(|&e| e <= y);
                if k == 0 {
                    values[values.len() - 1]
                } else {
                    values[k - 1]
                }
            }
            RateProfile::Smooth { .. } => eval_series(&self.profile, y),
        }
    }

    /// `(R_m, R_M)`.
    pub fn bounds(&self) -> (f64, f64) {
        (self.min, self.max)
    }

    /// Striation edges, empty for smooth or single-cell rates.
    pub fn edges(&self) -> &[f64] {
        match &self.profile {
            RateProfile::PiecewiseConstant { edges, values } if values.len() > 1 => edges,
            _ => &[],
        }
    }

    /// Whether every striation edge falls on a node `j/ny`.
    pub fn is_aligned(&self, ny: usize) -> bool {
        self.edges().iter().all(|e| {
            let s = e * ny as f64;
            libm::fabs(s - libm::round(s)) < 1e-9
        })
    }

    /// Values of `R` on the front grid `y_j = j/ny`. Piecewise-constant
    /// rates are averaged over the dual cell `[y_j − h/2, y_j + h/2]`, which
    /// is exact away from edges and symmetric at an aligned edge.
    pub fn grid_samples(&self, ny: usize) -> Vec<f64> {
        let h = 1.0 / ny as f64;
        (0..ny)
            .map(|j| {
                let y = j as f64 * h;
                match &self.profile {
                    RateProfile::PiecewiseConstant { .. } => {
                        (self.primitive(y + 0.5 * h) - self.primitive(y - 0.5 * h)) / h
                    }
                    RateProfile::Smooth { .. } => eval_series(&self.profile, y),
                }
            })
            .collect()
    }

    // ∫₀^y R for piecewise-constant rates, any real y.
    fn primitive(&self, y: f64) -> f64 {
        let RateProfile::PiecewiseConstant { edges, values } = &self.profile else {
            unreachable!("primitive is only used for piecewise-constant rates")
        };
        let periods = libm::floor(y);
        let t = y - periods;
        let m = values.len();
        let wrap = values[m - 1];
        // Length-weighted sum of the cells restricted to [0, t).
        let mut acc = wrap * edges[0].min(t);
        let mut mean = wrap * edges[0];
        for k in 0..m {
            let lo = edges[k];
            let hi = if k + 1 < m { edges[k + 1] } else { 1.0 };
            mean += values[k] * (hi - lo);
            if t > lo {
                acc += values[k] * (t.min(hi) - lo);
            }
        }
        periods * mean + acc
    }
}

fn eval_series(profile: &RateProfile, y: f64) -> f64 {
    let RateProfile::Smooth { mean, cos, sin } = profile else {
        unreachable!()
    };
    let w = 2.0 * core::f64::consts::PI * y;
    let mut v = *mean;
    for (k, a) in cos.iter().enumerate() {
        v += a * libm::cos((k + 1) as f64 * w);
    }
    for (k, b) in sin.iter().enumerate() {
        v += b * libm::sin((k + 1) as f64 * w);
    }
    v
}

fn smooth_extrema(profile: &RateProfile) -> (f64, f64) {
    let RateProfile::Smooth { cos, sin, .. } = profile else {
        unreachable!()
    };
    let modes = cos.len().max(sin.len()).max(1);
    let samples = 1024 * modes;
    let h = 1.0 / samples as f64;
    let values: Vec<f64> = (0..samples)
        .map(|j| eval_series(profile, j as f64 * h))
        .collect();
    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    for j in 0..samples {
        let prev = values[(j + samples - 1) % samples];
        let next = values[(j + 1) % samples];
        let v = values[j];
        if v <= prev && v <= next {
            let y = golden(
                |y| eval_series(profile, y),
                (j as f64 - 1.0) * h,
                (j as f64 + 1.0) * h,
            );
            min = min.min(eval_series(profile, y)).min(v);
        }
        if v >= prev && v >= next {
            let y = golden(
                |y| -eval_series(profile, y),
                (j as f64 - 1.0) * h,
                (j as f64 + 1.0) * h,
            );
            max = max.max(eval_series(profile, y)).max(v);
        }
    }
    (min, max)
}

// Golden-section minimization on a bracket.
fn golden<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64) -> f64 {
    let r = 0.5 * (libm::sqrt(5.0) - 1.0);
    let mut x1 = b - r * (b - a);
    let mut x2 = a + r * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..80 {
        if f1 < f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - r * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + r * (b - a);
            f2 = f(x2);
        }
    }
    0.5 * (a + b)
}

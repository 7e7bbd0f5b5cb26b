//! Continuous-time generator of the iterates and its flow.
//!
//! Row 1 of `ln M` holds the Taylor coefficients of a vector field `G` with
//! `d/dt f^t(x) = G(f^t(x))`. The same field follows from the chart as
//! `G = Log λ · u / u'`, which [`build_field`] uses as a cross-check.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::carleman::CarlemanMatrix;
use crate::error::{Error, Result};
use crate::iterate::SchroederChart;
use crate::series::PowerSeries;

/// Relative tolerance for the coefficient cross-check in [`build_field`].
const TOL_FIELD: f64 = 1e-7;

#[derive(Debug, Clone, PartialEq)]
pub struct FlowField {
    g: PowerSeries,
    chart: SchroederChart,
    lambda: Complex64,
}

/// Take `G` from row 1 of `log` (expanded about `x*`) and check it against
/// `Log λ · u/u'` on the leading half of the coefficients.
pub fn build_field(log: &CarlemanMatrix, chart: &SchroederChart) -> Result<FlowField> {
    let x_star = chart.x_star();
    let mut g = PowerSeries::new(log.center(), log.row(1))?;
    if log.center() != x_star {
        g = g.recenter(x_star);
    }
    let u = chart.u().clone();
    let oracle = u.div(&u.derivative())?.scale(chart.branch().log_lambda);
    let window = (g.order().min(oracle.order()) / 2).max(2);
    let deviation = (0..window)
        .map(|k| (g.coeff(k) - oracle.coeff(k)).norm() / oracle.coeff(k).norm().max(1.0))
        .fold(0.0, f64::max);
    if deviation > TOL_FIELD {
        return Err(Error::BranchMismatch { deviation });
    }
    Ok(FlowField {
        g,
        chart: chart.clone(),
        lambda: chart.lambda(),
    })
}

impl FlowField {
    /// Taylor coefficients of `G` about `x*`.
    pub fn coeffs(&self) -> &PowerSeries {
        &self.g
    }

    pub fn chart(&self) -> &SchroederChart {
        &self.chart
    }

    pub fn lambda(&self) -> Complex64 {
        self.lambda
    }

    pub fn x_star(&self) -> Complex64 {
        self.chart.x_star()
    }

    /// `G(x)` from the coefficient series.
    pub fn evaluate(&self, x: Complex64) -> Result<Complex64> {
        let out = || Error::OutOfChart {
            point: x,
            radius: self.chart.radius(),
        };
        if (x - self.x_star()).norm() > self.chart.radius() {
            return Err(out());
        }
        let sum = self.g.evaluate_sum(x);
        if !sum.converged(self.chart.tail_tol()) {
            return Err(out());
        }
        Ok(sum.value)
    }

    /// `G(x) = Log λ · u(x)/u'(x)` from the chart.
    pub fn evaluate_via_chart(&self, x: Complex64) -> Result<Complex64> {
        let u = self.chart.chart(x)?;
        let du = self.chart.u().derivative().evaluate(x);
        Ok(self.chart.branch().log_lambda * u / du)
    }
}

/// Points `(t, x(t))` of an integrated trajectory.
pub type Trajectory = Vec<(f64, Complex64)>;

/// Classical fourth-order Runge–Kutta for `dx/dt = G(x)` from `x0` to
/// `t_end` with step `dt` (the last step is shortened to land on `t_end`).
///
/// Leaving the field's disc aborts with `ChartEscape`, which carries the
/// trajectory computed so far.
pub fn integrate_flow(field: &FlowField, x0: Complex64, t_end: f64, dt: f64) -> Result<Trajectory> {
    if !(dt > 0.0) || !t_end.is_finite() {
        return Err(Error::Domain(format!("need dt > 0 and finite t_end, got dt={dt}, t_end={t_end}")));
    }
    let steps = (t_end.abs() / dt).ceil() as usize;
    let h = if steps == 0 { 0.0 } else { t_end / steps as f64 };
    let mut traj = Vec::with_capacity(steps + 1);
    let mut x = x0;
    traj.push((0.0, x));
    field.evaluate(x).map_err(|_| Error::ChartEscape {
        t_reached: 0.0,
        partial: traj.clone(),
    })?;
    for i in 0..steps {
        let t = i as f64 * h;
        let stage = |y: Complex64| field.evaluate(y);
        let step = (|| {
            let k1 = stage(x)?;
            let k2 = stage(x + 0.5 * h * k1)?;
            let k3 = stage(x + 0.5 * h * k2)?;
            let k4 = stage(x + h * k3)?;
            Ok::<_, Error>(x + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4))
        })();
        match step {
            Ok(next) => {
                x = next;
                traj.push(((i + 1) as f64 * h, x));
            }
            Err(_) => {
                return Err(Error::ChartEscape {
                    t_reached: t,
                    partial: traj,
                })
            }
        }
    }
    Ok(traj)
}

/// Largest `t` for which the principal generator of the μ = 4 logistic
/// iterates still describes `d/dt f^t(x)`: `ln(π / arccos(1 - 2x)) / ln 2`.
pub fn validity_window(x: f64) -> Result<f64> {
    if !(x > 0.0 && x <= 1.0) {
        return Err(Error::Domain(format!("validity window needs x in (0, 1], got {x}")));
    }
    Ok((PI / (1.0 - 2.0 * x).acos()).ln() / std::f64::consts::LN_2)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LyapunovEstimate {
    pub n: usize,
    pub x0: f64,
    pub sigma_hat: f64,
    /// Set when the orbit hit `x = ½` exactly and was nudged by `1e-12`.
    pub perturbed: bool,
}

/// Chain-rule estimate `(1/n) Σ ln|f'(x_m)|` of the Lyapunov exponent of
/// `x ↦ 4x(1 - x)` along the orbit of `x0`.
pub fn lyapunov_logistic(n: usize, x0: f64) -> Result<LyapunovEstimate> {
    if n < 1000 {
        return Err(Error::Domain(format!("need at least 1000 iterates, got {n}")));
    }
    if !(x0 > 0.0 && x0 < 1.0) {
        return Err(Error::DegenerateOrbit(format!("x0 = {x0} is not in (0, 1)")));
    }
    let mut x = x0;
    let mut sum = 0.0;
    let mut perturbed = false;
    for m in 0..n {
        if x == 0.5 {
            x += 1e-12;
            perturbed = true;
        }
        if x == 0.0 || x == 0.75 || x == 1.0 {
            return Err(Error::DegenerateOrbit(format!("orbit reached {x} at step {m}")));
        }
        sum += (4.0 - 8.0 * x).abs().ln();
        x = 4.0 * x * (1.0 - x);
    }
    Ok(LyapunovEstimate {
        n,
        x0,
        sigma_hat: sum / n as f64,
        perturbed,
    })
}

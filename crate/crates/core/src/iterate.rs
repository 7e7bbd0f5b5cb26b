//! Continuous iterates `f^t` near a fixed point.
//!
//! Two evaluation routes are offered and cross-checked in the tests:
//!
//! * the chart route, `f^t(x) = u^{-1}(λ^t u(x))`, with `u` the linearizing
//!   (Schröder) chart read off row 1 of `V`;
//! * the matrix route, `f^t(x) = Σ_k λ^{kt} φ_k(x)`, where
//!   `φ_k(x) = Σ_l V^{-1}_{1k} V_{kl} (x - x*)^l` and `φ_0 = x*`.
//!
//! Both are local: they are trusted inside a disc of radius `r_eval` about
//! `x*` and refuse points outside it. [`SchroederChart::evaluate_extended`]
//! reaches further by transporting the point into the disc with the map
//! itself (its local inverse branch when `|λ| > 1`), using the functional
//! equation `u(f(x)) = λ u(x)`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::series::{FixedPointFrame, PowerSeries};
use crate::spectral::{Branch, SpectralFactorization};
use crate::tol;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Linearizing chart `u` about a fixed point, normalized to `u'(x*) = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct SchroederChart {
    lambda: Complex64,
    branch: Branch,
    u: PowerSeries,
    u_inv: PowerSeries,
    frame: FixedPointFrame,
    radius: f64,
    tail_tol: f64,
}

/// Build the chart from row 1 of `V`.
///
/// `u_inv` is taken from row 1 of `V^{-1}` (shifted by `x*`), which is the
/// reversion of `u` but keeps full relative accuracy in coefficients that
/// decay faster than geometrically; reverting the truncated `u` directly
/// leaves an absolute error near `1e-16` in every coefficient.
pub fn build_chart(s: &SpectralFactorization, frame: &FixedPointFrame) -> Result<SchroederChart> {
    let u = s.chart_series();
    if u.coeff(1) == ZERO {
        return Err(Error::ZeroLinearTerm { linear: u.coeff(1) });
    }
    let mut inv: Vec<Complex64> = s.v_inv().row(1).iter().copied().collect();
    inv[0] = frame.x_star;
    let u_inv = PowerSeries::new(ZERO, inv)?;
    Ok(SchroederChart {
        lambda: s.lambda(),
        branch: s.branch(),
        u,
        u_inv,
        frame: frame.clone(),
        radius: frame.default_radius(),
        tail_tol: tol::TAIL_TOL,
    })
}

impl SchroederChart {
    pub fn with_radius(mut self, radius: f64) -> Self {
        self.radius = radius;
        self
    }

    pub fn with_tail_tol(mut self, tail_tol: f64) -> Self {
        self.tail_tol = tail_tol;
        self
    }

    pub fn lambda(&self) -> Complex64 {
        self.lambda
    }

    pub fn branch(&self) -> Branch {
        self.branch
    }

    pub fn x_star(&self) -> Complex64 {
        self.frame.x_star
    }

    pub fn frame(&self) -> &FixedPointFrame {
        &self.frame
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn tail_tol(&self) -> f64 {
        self.tail_tol
    }

    /// `u` as a series about `x*`.
    pub fn u(&self) -> &PowerSeries {
        &self.u
    }

    /// `u^{-1}` as a series about 0 (constant term `x*`).
    pub fn u_inv(&self) -> &PowerSeries {
        &self.u_inv
    }

    /// Replace `u` by `c·u` (and `u^{-1}` by `w ↦ u^{-1}(w/c)`).
    pub fn rescaled(&self, c: Complex64) -> Result<Self> {
        if c == ZERO {
            return Err(Error::Domain("chart scale must be nonzero".into()));
        }
        let inv = c.inv();
        let mut p = Complex64::new(1.0, 0.0);
        let coeffs = self
            .u_inv
            .coeffs()
            .iter()
            .map(|&a| {
                let out = a * p;
                p *= inv;
                out
            })
            .collect();
        Ok(Self {
            u: self.u.scale(c),
            u_inv: PowerSeries::new(ZERO, coeffs)?,
            ..self.clone()
        })
    }

    fn check_radius(&self, x: Complex64) -> Result<()> {
        if (x - self.frame.x_star).norm() > self.radius {
            return Err(Error::OutOfChart {
                point: x,
                radius: self.radius,
            });
        }
        Ok(())
    }

    /// `u(x)` for `|x - x*| ≤ r_eval`.
    pub fn chart(&self, x: Complex64) -> Result<Complex64> {
        self.check_radius(x)?;
        let sum = self.u.evaluate_sum(x);
        if !sum.converged(self.tail_tol) {
            return Err(Error::OutOfChart {
                point: x,
                radius: self.radius,
            });
        }
        Ok(sum.value)
    }

    /// `u^{-1}(w)`, refused when the truncated series has not converged at `w`.
    pub fn inverse_chart(&self, w: Complex64) -> Result<Complex64> {
        let sum = self.u_inv.evaluate_sum(w);
        if !sum.converged(self.tail_tol) {
            return Err(Error::OutOfChart {
                point: w,
                radius: root_test_radius(&self.u_inv),
            });
        }
        Ok(sum.value)
    }

    /// `f^t(x) = u^{-1}(λ^t u(x))` with the principal branch of `λ^t`.
    pub fn evaluate(&self, t: f64, x: Complex64) -> Result<Complex64> {
        let w = self.branch.pow(t) * self.chart(x)?;
        self.inverse_chart(w)
    }

    /// As [`Self::evaluate`], but points outside the disc are first carried
    /// into it along the orbit of the map, and large chart values are
    /// brought back with the map.
    ///
    /// With `|λ| > 1` the pull-back uses the inverse branch of `f` that fixes
    /// `x*`, continued along the straight segment from `x*`; with `|λ| < 1`
    /// the roles of `f` and its inverse branch swap. The result is the
    /// analytic continuation of the local iterate along that path, which
    /// need not be the only one.
    pub fn evaluate_extended(&self, t: f64, x: Complex64) -> Result<Complex64> {
        let (z, shift) = self.pull_into_disc(x)?;
        let u = self.chart(z)?;
        let w = self.branch.pow(t) * self.lambda.powi(shift) * u;
        self.push_out_of_disc(w)
    }

    fn repelling(&self) -> bool {
        self.lambda.norm() > 1.0
    }

    /// Returns `(z, k)` with `|z - x*| ≤ r_eval` and `u(x) = λ^k u(z)`.
    fn pull_into_disc(&self, x: Complex64) -> Result<(Complex64, i32)> {
        let x_star = self.frame.x_star;
        let f = &self.frame.map;
        let inside = |z: Complex64| (z - x_star).norm() <= self.radius;
        let mut z = x;
        let mut k = 0i32;
        while !inside(z) {
            if k.unsigned_abs() as usize >= MAX_TRANSPORT {
                return Err(Error::OutOfChart {
                    point: x,
                    radius: self.radius,
                });
            }
            if self.repelling() {
                z = local_inverse(f, x_star, z).ok_or(Error::OutOfChart {
                    point: x,
                    radius: self.radius,
                })?;
                k += 1;
            } else {
                z = f.evaluate(z);
                k -= 1;
            }
            if !z.is_finite() {
                return Err(Error::OutOfChart {
                    point: x,
                    radius: self.radius,
                });
            }
        }
        Ok((z, k))
    }

    /// `u^{-1}(w)` for any `w`, via `u^{-1}(λ w) = f(u^{-1}(w))`.
    fn push_out_of_disc(&self, w: Complex64) -> Result<Complex64> {
        let x_star = self.frame.x_star;
        let f = &self.frame.map;
        let mut w = w;
        let mut m = 0usize;
        while w.norm() > self.radius {
            if m >= MAX_TRANSPORT {
                return Err(Error::OutOfChart {
                    point: w,
                    radius: self.radius,
                });
            }
            w = if self.repelling() { w / self.lambda } else { w * self.lambda };
            m += 1;
        }
        let mut x = self.inverse_chart(w)?;
        for _ in 0..m {
            x = if self.repelling() {
                f.evaluate(x)
            } else {
                local_inverse(f, x_star, x).ok_or(Error::OutOfChart {
                    point: x,
                    radius: self.radius,
                })?
            };
        }
        Ok(x)
    }

    /// `|u(f(x)) - λ u(x)|`.
    pub fn schroeder_residual(&self, x: Complex64) -> Result<f64> {
        let fx = self.frame.map.evaluate(x);
        Ok((self.chart(fx)? - self.lambda * self.chart(x)?).norm())
    }

    /// Largest `|u(x_{m+1}) - λ u(x_m)|` along `x_0 = x0, …, x_n`.
    pub fn verify_linearization(&self, x0: Complex64, n: usize) -> Result<f64> {
        let f = &self.frame.map;
        let mut x = x0;
        let mut u_prev = self.chart(x).map_err(|_| Error::OrbitEscaped { step: 0 })?;
        let mut worst = 0.0_f64;
        for step in 1..=n {
            x = f.evaluate(x);
            let u_next = self.chart(x).map_err(|_| Error::OrbitEscaped { step })?;
            worst = worst.max((u_next - self.lambda * u_prev).norm());
            u_prev = u_next;
        }
        Ok(worst)
    }
}

const MAX_TRANSPORT: usize = 4096;

/// Crude convergence radius from the trailing coefficients.
fn root_test_radius(s: &PowerSeries) -> f64 {
    let n = s.order();
    (n / 2..n)
        .filter(|&k| k > 0 && s.coeff(k).norm() > 0.0)
        .map(|k| s.coeff(k).norm().powf(-1.0 / k as f64))
        .fold(f64::INFINITY, f64::min)
}

/// Solve `f(z) = target` on the branch with `z = x*` at `target = x*`, by
/// Newton continuation along the segment from `x*` to `target`.
fn local_inverse(f: &PowerSeries, x_star: Complex64, target: Complex64) -> Option<Complex64> {
    let df = f.derivative();
    let mut z = x_star;
    let mut s = 0.0_f64;
    let mut ds = 1.0 / 16.0;
    while s < 1.0 {
        let s_next = (s + ds).min(1.0);
        let y = x_star + (target - x_star) * s_next;
        match newton_solve(f, &df, y, z) {
            Some(z_next) if (z_next - z).norm() <= 0.25 * (1.0 + z.norm()) => {
                z = z_next;
                s = s_next;
                ds = (ds * 2.0).min(0.25);
            }
            _ => {
                ds /= 2.0;
                if ds < 1e-9 {
                    return None;
                }
            }
        }
    }
    Some(z)
}

fn newton_solve(f: &PowerSeries, df: &PowerSeries, y: Complex64, start: Complex64) -> Option<Complex64> {
    let mut z = start;
    for _ in 0..tol::MAX_NEWTON {
        let d = df.evaluate(z);
        if d == ZERO {
            return None;
        }
        let step = (f.evaluate(z) - y) / d;
        z -= step;
        if !z.is_finite() {
            return None;
        }
        if step.norm() <= 4.0 * f64::EPSILON * (1.0 + z.norm()) {
            return Some(z);
        }
    }
    let residual = (f.evaluate(z) - y).norm();
    (residual <= 1e-13 * (1.0 + y.norm())).then_some(z)
}

/// The functions `φ_k` of the matrix route.
#[derive(Debug, Clone, PartialEq)]
pub struct IterateExpansion {
    phi: Vec<PowerSeries>,
    lambda: Complex64,
    branch: Branch,
    x_star: Complex64,
    radius: f64,
    tail_tol: f64,
}

/// Matrix-route evaluation at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpansionSum {
    pub value: Complex64,
    /// `|λ^{k_max t} φ_{k_max}(x)|`.
    pub last_term: f64,
    pub converged: bool,
}

/// `φ_k` for `k = 0..=k_max`; `k_max` must be below the matrix dimension.
pub fn build_expansion(
    s: &SpectralFactorization,
    frame: &FixedPointFrame,
    k_max: usize,
) -> Result<IterateExpansion> {
    let n = s.dim();
    if k_max >= n {
        return Err(Error::DimensionMismatch {
            expected: n - 1,
            found: k_max,
        });
    }
    let x_star = frame.x_star;
    let mut phi = Vec::with_capacity(k_max + 1);
    phi.push(PowerSeries::constant(x_star, x_star, n));
    for k in 1..=k_max {
        let weight = s.v_inv()[(1, k)];
        let coeffs = (0..n).map(|l| weight * s.v()[(k, l)]).collect();
        phi.push(PowerSeries::new(x_star, coeffs)?);
    }
    Ok(IterateExpansion {
        phi,
        lambda: s.lambda(),
        branch: s.branch(),
        x_star,
        radius: frame.default_radius(),
        tail_tol: tol::TAIL_TOL,
    })
}

impl IterateExpansion {
    pub fn with_radius(mut self, radius: f64) -> Self {
        self.radius = radius;
        self
    }

    pub fn with_tail_tol(mut self, tail_tol: f64) -> Self {
        self.tail_tol = tail_tol;
        self
    }

    pub fn phi(&self) -> &[PowerSeries] {
        &self.phi
    }

    pub fn lambda(&self) -> Complex64 {
        self.lambda
    }

    pub fn x_star(&self) -> Complex64 {
        self.x_star
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// The partial sum and its tail diagnostic, without failing on
    /// non-convergence.
    pub fn sum(&self, t: f64, x: Complex64) -> Result<ExpansionSum> {
        if (x - self.x_star).norm() > self.radius {
            return Err(Error::OutOfChart {
                point: x,
                radius: self.radius,
            });
        }
        let mut value = ZERO;
        let mut last = ZERO;
        for (k, phi) in self.phi.iter().enumerate() {
            last = self.branch.pow(t * k as f64) * phi.evaluate(x);
            value += last;
        }
        let last_term = if self.phi.len() > 1 { last.norm() } else { 0.0 };
        Ok(ExpansionSum {
            value,
            last_term,
            converged: last_term <= self.tail_tol * value.norm().max(f64::MIN_POSITIVE),
        })
    }

    /// `Σ_k λ^{kt} φ_k(x)`, failing with `NonConvergent` when the last term
    /// is not negligible.
    pub fn evaluate(&self, t: f64, x: Complex64) -> Result<Complex64> {
        let s = self.sum(t, x)?;
        if !s.converged {
            return Err(Error::NonConvergent {
                last_term: s.last_term,
                sum: s.value.norm(),
            });
        }
        Ok(s.value)
    }
}

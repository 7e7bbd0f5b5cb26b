//! Truncated power series over `Complex64`.
//!
//! A [`PowerSeries`] stores `N` coefficients of an expansion in powers of
//! `(x - base_point)`. Binary operations truncate to the shorter operand.
//! Composition and reversion follow the usual formal-series rules: a
//! composition `outer ∘ inner` is exact up to the truncation order when the
//! value of `inner` at its own base point coincides with the base point of
//! `outer`.

use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::io;
use crate::tol;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Debug, Clone, PartialEq)]
pub struct PowerSeries {
    base_point: Complex64,
    coeffs: Vec<Complex64>,
}

/// Outcome of [`PowerSeries::compose`].
#[derive(Debug, Clone, PartialEq)]
pub struct Composition {
    pub series: PowerSeries,
    /// Set when the inner constant term is offset from the outer base point
    /// and the outer series fills its whole truncation window, so the
    /// neglected tail of `outer` could contribute to every coefficient.
    pub approximate: bool,
}

impl Composition {
    pub fn into_series(self) -> PowerSeries {
        self.series
    }
}

/// Partial sum of a series at a point together with convergence diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesSum {
    pub value: Complex64,
    /// Largest `|c_k (x - b)^k|` among the trailing terms.
    pub tail: f64,
    /// Largest `|c_k (x - b)^k|` over all terms.
    pub max_term: f64,
}

impl SeriesSum {
    /// True when the trailing terms are negligible against the largest term.
    pub fn converged(&self, tail_tol: f64) -> bool {
        self.tail <= tail_tol * self.max_term.max(self.value.norm())
    }
}

impl PowerSeries {
    pub fn new(base_point: Complex64, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::EmptySeries);
        }
        Ok(Self { base_point, coeffs })
    }

    /// Series about the origin.
    pub fn from_coeffs(coeffs: Vec<Complex64>) -> Result<Self> {
        Self::new(ZERO, coeffs)
    }

    pub fn from_real(coeffs: &[f64]) -> Result<Self> {
        Self::from_coeffs(coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect())
    }

    pub fn zeros(base_point: Complex64, order: usize) -> Self {
        Self {
            base_point,
            coeffs: vec![ZERO; order.max(1)],
        }
    }

    pub fn constant(base_point: Complex64, value: Complex64, order: usize) -> Self {
        let mut s = Self::zeros(base_point, order);
        s.coeffs[0] = value;
        s
    }

    /// The identity map `x ↦ x` expanded about `base_point`.
    pub fn identity(base_point: Complex64, order: usize) -> Self {
        let mut s = Self::constant(base_point, base_point, order.max(2));
        s.coeffs[1] = ONE;
        s
    }

    pub fn base_point(&self) -> Complex64 {
        self.base_point
    }

    pub fn order(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    /// Coefficient `k`, zero beyond the truncation order.
    pub fn coeff(&self, k: usize) -> Complex64 {
        self.coeffs.get(k).copied().unwrap_or(ZERO)
    }

    /// Index of the last nonzero coefficient (0 for the zero series).
    pub fn degree(&self) -> usize {
        self.coeffs.iter().rposition(|c| *c != ZERO).unwrap_or(0)
    }

    /// Same coefficients, truncated or zero-padded to `order`.
    pub fn with_order(&self, order: usize) -> Self {
        let mut coeffs = self.coeffs.clone();
        coeffs.resize(order.max(1), ZERO);
        Self {
            base_point: self.base_point,
            coeffs,
        }
    }

    /// Same coefficients reinterpreted about another base point.
    pub fn with_base(&self, base_point: Complex64) -> Self {
        Self {
            base_point,
            coeffs: self.coeffs.clone(),
        }
    }

    pub fn evaluate(&self, x: Complex64) -> Complex64 {
        let z = x - self.base_point;
        self.coeffs.iter().rev().fold(ZERO, |acc, &c| acc * z + c)
    }

    /// Horner evaluation plus term-size diagnostics for divergence checks.
    pub fn evaluate_sum(&self, x: Complex64) -> SeriesSum {
        let z = x - self.base_point;
        let r = z.norm();
        let n = self.coeffs.len();
        let tail_start = n - (n / 8).max(2).min(n);
        let mut max_term = 0.0_f64;
        let mut tail = 0.0_f64;
        let mut rk = 1.0_f64;
        for (k, c) in self.coeffs.iter().enumerate() {
            let term = c.norm() * rk;
            max_term = max_term.max(term);
            if k >= tail_start && k > 0 {
                tail = tail.max(term);
            }
            rk *= r;
        }
        SeriesSum {
            value: self.evaluate(x),
            tail,
            max_term,
        }
    }

    pub fn derivative(&self) -> Self {
        let n = self.coeffs.len();
        let mut coeffs: Vec<Complex64> = (1..n).map(|k| self.coeffs[k] * k as f64).collect();
        coeffs.push(ZERO);
        Self {
            base_point: self.base_point,
            coeffs,
        }
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Self {
            base_point: self.base_point,
            coeffs: self.coeffs.iter().map(|&c| c * factor).collect(),
        }
    }

    fn check_base(&self, other: &Self) -> Result<()> {
        if self.base_point != other.base_point {
            return Err(Error::BaseMismatch {
                left: self.base_point,
                right: other.base_point,
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_base(other)?;
        let n = self.order().min(other.order());
        Ok(Self {
            base_point: self.base_point,
            coeffs: (0..n).map(|k| self.coeffs[k] + other.coeffs[k]).collect(),
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_base(other)?;
        let n = self.order().min(other.order());
        Ok(Self {
            base_point: self.base_point,
            coeffs: (0..n).map(|k| self.coeffs[k] - other.coeffs[k]).collect(),
        })
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_base(other)?;
        let n = self.order().min(other.order());
        Ok(Self {
            base_point: self.base_point,
            coeffs: convolve(&self.coeffs, &other.coeffs, n),
        })
    }

    /// Multiplicative inverse; requires a nonzero constant term.
    pub fn reciprocal(&self) -> Result<Self> {
        let a0 = self.coeffs[0];
        if a0 == ZERO {
            return Err(Error::Domain("reciprocal of a series with zero constant term".into()));
        }
        let n = self.order();
        let inv0 = a0.inv();
        let mut out = vec![ZERO; n];
        out[0] = inv0;
        for m in 1..n {
            let acc: Complex64 = (1..=m).map(|k| self.coeffs[k] * out[m - k]).sum();
            out[m] = -acc * inv0;
        }
        Ok(Self {
            base_point: self.base_point,
            coeffs: out,
        })
    }

    pub fn div(&self, other: &Self) -> Result<Self> {
        self.mul(&other.reciprocal()?)
    }

    /// `self^power` truncated to the current order.
    pub fn pow(&self, power: usize) -> Self {
        let n = self.order();
        let mut acc = vec![ZERO; n];
        acc[0] = ONE;
        let mut base = self.coeffs.clone();
        let mut e = power;
        while e > 0 {
            if e & 1 == 1 {
                acc = convolve(&acc, &base, n);
            }
            e >>= 1;
            if e > 0 {
                base = convolve(&base, &base, n);
            }
        }
        Self {
            base_point: self.base_point,
            coeffs: acc,
        }
    }

    /// Re-expand the truncated polynomial about `new_base` (Taylor shift).
    ///
    /// The truncated coefficients are treated as an exact polynomial, so
    /// the result represents the same function at every point.
    pub fn recenter(&self, new_base: Complex64) -> Self {
        let shift = new_base - self.base_point;
        let mut c = self.coeffs.clone();
        let n = c.len();
        // repeated synthetic division by (z - shift)
        for i in 0..n {
            for k in (i..n - 1).rev() {
                let next = c[k + 1];
                c[k] += shift * next;
            }
        }
        Self {
            base_point: new_base,
            coeffs: c,
        }
    }

    /// `outer ∘ inner`, expanded about `inner`'s base point.
    pub fn compose(outer: &Self, inner: &Self) -> Result<Composition> {
        let n = outer.order().min(inner.order());
        let mut w = inner.with_order(n);
        w.coeffs[0] -= outer.base_point;
        let offset = w.coeffs[0];
        let mut acc = vec![ZERO; n];
        for &a in outer.coeffs[..n].iter().rev() {
            acc = convolve(&acc, &w.coeffs, n);
            acc[0] += a;
        }
        let approximate = offset != ZERO && outer.coeffs[outer.order() - 1] != ZERO;
        Ok(Composition {
            series: Self {
                base_point: inner.base_point,
                coeffs: acc,
            },
            approximate,
        })
    }

    /// Compositional inverse.
    ///
    /// `self` must vanish at its base point `b` and have a nonzero linear
    /// coefficient. The result `r` is expanded about 0 with `r(0) = b`, so
    /// `compose(self, r)` is the identity about 0 and `compose(r, self)` is
    /// the identity about `b`. Computed by series Newton iteration with
    /// precision doubling.
    pub fn revert(&self) -> Result<Self> {
        let n = self.order();
        let s1 = self.coeff(1);
        if s1 == ZERO || !s1.inv().is_finite() {
            return Err(Error::ZeroLinearTerm { linear: s1 });
        }
        let s0 = self.coeffs[0];
        if s0.norm() > 1e-12 * (1.0 + s1.norm()) {
            return Err(Error::NonZeroConstant { constant: s0 });
        }
        // Work in the local variable z = x - b: find rho with S(rho(w)) = w.
        let mut local = self.with_base(ZERO);
        local.coeffs[0] = ZERO;
        let d_local = local.derivative();

        let mut rho = vec![ZERO; n.max(2)];
        rho[1] = s1.inv();
        let mut prec = 2usize;
        while prec < n {
            prec = (2 * prec).min(n);
            let r = Self {
                base_point: ZERO,
                coeffs: rho[..prec].to_vec(),
            };
            let sr = Self::compose(&local.with_order(prec), &r)?.series;
            let dsr = Self::compose(&d_local.with_order(prec), &r)?.series;
            let mut residual = sr;
            residual.coeffs[1] -= ONE;
            let correction = residual.mul(&dsr.reciprocal()?)?;
            for k in 0..prec {
                rho[k] -= correction.coeffs[k];
            }
            rho[0] = ZERO;
        }
        rho.truncate(n);
        rho[0] = self.base_point;
        Ok(Self {
            base_point: ZERO,
            coeffs: rho,
        })
    }

    /// Roots of the truncated polynomial (Durand–Kerner). Trailing
    /// coefficients below `1e-14` of the largest are ignored.
    pub fn polynomial_roots(&self) -> Vec<Complex64> {
        let scale = self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
        if scale == 0.0 {
            return Vec::new();
        }
        let Some(deg) = self.coeffs.iter().rposition(|c| c.norm() > 1e-14 * scale) else {
            return Vec::new();
        };
        if deg == 0 {
            return Vec::new();
        }
        let lead = self.coeffs[deg];
        let monic: Vec<Complex64> = self.coeffs[..=deg].iter().map(|c| c / lead).collect();
        let bound = 1.0 + monic[..deg].iter().map(|c| c.norm()).fold(0.0, f64::max);
        let mut roots: Vec<Complex64> = (0..deg)
            .map(|i| {
                let angle = std::f64::consts::TAU * i as f64 / deg as f64 + 0.4;
                Complex64::from_polar(0.5 * bound, angle)
            })
            .collect();
        let eval = |z: Complex64| monic.iter().rev().fold(ZERO, |acc, &c| acc * z + c);
        for _ in 0..1000 {
            let mut delta = 0.0_f64;
            for i in 0..deg {
                let zi = roots[i];
                let denom: Complex64 = roots
                    .iter()
                    .enumerate()
                    .filter(|&(j, _)| j != i)
                    .map(|(_, &zj)| zi - zj)
                    .product();
                if denom == ZERO {
                    continue;
                }
                let step = eval(zi) / denom;
                roots[i] = zi - step;
                delta = delta.max(step.norm());
            }
            if delta <= 1e-15 * bound {
                break;
            }
        }
        roots.iter_mut().for_each(|z| *z += self.base_point);
        roots
    }
}

impl fmt::Display for PowerSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.coeffs.iter().map(|&c| io::format_complex(c)).collect();
        write!(f, "{}", parts.join(","))
    }
}

/// Truncated Cauchy product of two coefficient slices.
pub(crate) fn convolve(a: &[Complex64], b: &[Complex64], n: usize) -> Vec<Complex64> {
    let mut out = vec![ZERO; n];
    for (i, &ai) in a.iter().enumerate().take(n) {
        if ai == ZERO {
            continue;
        }
        for (j, &bj) in b.iter().enumerate().take(n - i) {
            out[i + j] += ai * bj;
        }
    }
    out
}

/// A fixed point `x*` of a map together with the map re-expressed in the
/// local coordinate `y = x - x*`.
#[derive(Debug, Clone, PartialEq)]
pub struct FixedPointFrame {
    pub x_star: Complex64,
    /// `f'(x*)`.
    pub multiplier: Complex64,
    /// `g(y) = f(y + x*) - x*`, a series in `y` about 0 with `g(0) = 0`.
    pub shifted_map: PowerSeries,
    /// The original map.
    pub map: PowerSeries,
    /// `|f(x*) - x*|` at convergence.
    pub residual: f64,
    /// Distance from `x*` to the nearest other root of `f(x) - x`, if any.
    pub nearest_other: Option<f64>,
}

impl FixedPointFrame {
    /// Default chart radius: a tenth of the distance to the nearest other
    /// fixed point, unbounded when there is none.
    pub fn default_radius(&self) -> f64 {
        self.nearest_other
            .map(|d| tol::RADIUS_FRACTION * d)
            .unwrap_or(f64::INFINITY)
    }

    /// `h(x) = x - x*` as a series about the origin.
    pub fn shift(&self, order: usize) -> PowerSeries {
        let mut s = PowerSeries::identity(ZERO, order);
        s.coeffs[0] = -self.x_star;
        s
    }

    /// `h^{-1}(y) = y + x*` as a series about the origin.
    pub fn unshift(&self, order: usize) -> PowerSeries {
        let mut s = PowerSeries::identity(ZERO, order);
        s.coeffs[0] = self.x_star;
        s
    }
}

/// Locate a fixed point of `f` by Newton iteration on `f(x) - x`.
///
/// Fails when Newton does not converge within [`tol::MAX_NEWTON`] steps, or
/// when the multiplier is zero or a root of unity of order below the
/// series order (the diagonalization would divide by zero).
pub fn find_fixed_point(f: &PowerSeries, guess: Complex64) -> Result<FixedPointFrame> {
    let df = f.derivative();
    let mut x = guess;
    let mut converged = false;
    for _ in 0..tol::MAX_NEWTON {
        let phi = f.evaluate(x) - x;
        if phi == ZERO {
            converged = true;
            break;
        }
        let dphi = df.evaluate(x) - ONE;
        if dphi == ZERO {
            break;
        }
        let step = phi / dphi;
        x -= step;
        if step.norm() <= 4.0 * f64::EPSILON * (1.0 + x.norm())
            && (f.evaluate(x) - x).norm() <= tol::TOL_FIX
        {
            converged = true;
            break;
        }
    }
    let residual = (f.evaluate(x) - x).norm();
    if !converged || !residual.is_finite() || residual > tol::TOL_FIX {
        return Err(Error::FixedPointNotFound { last: x, residual });
    }

    let multiplier = df.evaluate(x);
    check_restrictive(multiplier, f.order())?;

    let mut shifted = f.recenter(x).with_base(ZERO);
    shifted.coeffs[0] = ZERO;
    if shifted.order() < 2 {
        shifted = shifted.with_order(2);
    }
    shifted.coeffs[1] = multiplier;

    let mut fixed_poly = f.clone();
    fixed_poly.coeffs.resize(fixed_poly.order().max(2), ZERO);
    fixed_poly.coeffs[1] -= ONE;
    if f.base_point != ZERO {
        fixed_poly.coeffs[0] -= f.base_point;
    }
    let nearest_other = fixed_poly
        .polynomial_roots()
        .into_iter()
        .map(|r| (r - x).norm())
        .filter(|d| *d > 1e-8 * (1.0 + x.norm()))
        .fold(None, |acc: Option<f64>, d| Some(acc.map_or(d, |a| a.min(d))));

    Ok(FixedPointFrame {
        x_star: x,
        multiplier,
        shifted_map: shifted,
        map: f.clone(),
        residual,
        nearest_other,
    })
}

fn check_restrictive(lambda: Complex64, order: usize) -> Result<()> {
    if lambda.norm() <= tol::TOL_RES {
        return Err(Error::RestrictiveConditionViolated {
            multiplier: lambda,
            reason: "multiplier vanishes (superattracting fixed point)".into(),
        });
    }
    let mut p = ONE;
    for n in 1..order.max(2) {
        p *= lambda;
        if (p - ONE).norm() <= tol::TOL_RES {
            return Err(Error::RestrictiveConditionViolated {
                multiplier: lambda,
                reason: format!("multiplier is a root of unity of order {n}"),
            });
        }
    }
    Ok(())
}

/// Map input shared by the library and the CLI: an explicit coefficient
/// list (lowest degree first) or a named preset.
#[derive(Debug, Clone, PartialEq)]
pub enum MapSpec {
    Coefficients(Vec<Complex64>),
    /// `x ↦ mu x (1 - x)`.
    Logistic(f64),
}

impl MapSpec {
    /// Parse a preset of the form `logistic:<mu>`.
    pub fn parse_preset(s: &str) -> Result<Self> {
        let (name, param) = s
            .split_once(':')
            .ok_or_else(|| Error::Parse(format!("preset '{s}' must be name:parameter")))?;
        match name.trim() {
            "logistic" => {
                let mu: f64 = param
                    .trim()
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad logistic parameter '{param}'")))?;
                Ok(MapSpec::Logistic(mu))
            }
            other => Err(Error::Parse(format!("unknown preset '{other}'"))),
        }
    }

    /// Parse a comma-separated coefficient list such as `0,4,-4` or `0,1+2i`.
    pub fn parse_coeffs(s: &str) -> Result<Self> {
        let coeffs = s
            .split(',')
            .map(|t| io::parse_complex(t.trim()))
            .collect::<Result<Vec<_>>>()?;
        if coeffs.is_empty() {
            return Err(Error::EmptySeries);
        }
        Ok(MapSpec::Coefficients(coeffs))
    }

    pub fn coefficients(&self) -> Vec<Complex64> {
        match self {
            MapSpec::Coefficients(c) => c.clone(),
            MapSpec::Logistic(mu) => vec![
                ZERO,
                Complex64::new(*mu, 0.0),
                Complex64::new(-*mu, 0.0),
            ],
        }
    }

    /// The map as a series about 0, padded or truncated to `order`.
    pub fn to_series(&self, order: usize) -> Result<PowerSeries> {
        Ok(PowerSeries::from_coeffs(self.coefficients())?.with_order(order))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn assert_coeffs(s: &PowerSeries, expected: &[f64], tol: f64) {
        for (k, &e) in expected.iter().enumerate() {
            let d = (s.coeff(k) - c(e)).norm();
            assert!(d <= tol, "coeff {k}: {} vs {e}", s.coeff(k));
        }
    }

    #[test]
    fn evaluation_at_base_returns_constant() {
        let s = PowerSeries::new(c(0.3), vec![c(1.5), c(2.0), c(-7.0)]).unwrap();
        assert_eq!(s.evaluate(c(0.3)), c(1.5));
    }

    #[test]
    fn empty_series_rejected() {
        assert!(matches!(PowerSeries::from_coeffs(vec![]), Err(Error::EmptySeries)));
    }

    #[test]
    fn compose_with_identity_is_neutral() {
        let f = PowerSeries::from_real(&[0.0, 4.0, -4.0, 0.0, 0.0]).unwrap();
        let id = PowerSeries::identity(ZERO, 5);
        let r = PowerSeries::compose(&f, &id).unwrap();
        assert!(!r.approximate);
        assert_eq!(r.series, f);
    }

    #[test]
    fn logistic_composed_with_itself() {
        let f = PowerSeries::from_real(&[0.0, 4.0, -4.0, 0.0, 0.0, 0.0]).unwrap();
        let ff = PowerSeries::compose(&f, &f).unwrap().series;
        assert_coeffs(&ff, &[0.0, 16.0, -80.0, 128.0, -64.0, 0.0], 0.0);
    }

    #[test]
    fn shift_and_unshift_compose_to_identity() {
        let xs = c(0.75);
        let h = PowerSeries::from_coeffs(vec![-xs, c(1.0), c(0.0)]).unwrap();
        let hinv = PowerSeries::from_coeffs(vec![xs, c(1.0), c(0.0)]).unwrap();
        let r = PowerSeries::compose(&h, &hinv).unwrap().series;
        assert_coeffs(&r, &[0.0, 1.0, 0.0], 0.0);
    }

    #[test]
    fn offset_composition_with_full_outer_is_flagged() {
        let outer = PowerSeries::from_real(&[1.0, 1.0, 0.5]).unwrap();
        let inner = PowerSeries::from_real(&[0.1, 1.0, 0.0]).unwrap();
        assert!(PowerSeries::compose(&outer, &inner).unwrap().approximate);
        let poly = PowerSeries::from_real(&[1.0, 1.0, 0.0]).unwrap();
        assert!(!PowerSeries::compose(&poly, &inner).unwrap().approximate);
    }

    #[test]
    fn revert_identity() {
        let id = PowerSeries::identity(ZERO, 6);
        assert_coeffs(&id.revert().unwrap(), &[0.0, 1.0, 0.0, 0.0, 0.0, 0.0], 1e-15);
    }

    #[test]
    fn revert_logistic4_chart_prefix() {
        let s = PowerSeries::from_real(&[0.0, 1.0, 1.0 / 3.0, 8.0 / 45.0]).unwrap();
        assert_coeffs(&s.revert().unwrap(), &[0.0, 1.0, -1.0 / 3.0, 2.0 / 45.0], 1e-15);
    }

    #[test]
    fn revert_logistic2_chart_prefix() {
        let s = PowerSeries::from_real(&[0.0, 1.0, 1.0, 4.0 / 3.0]).unwrap();
        assert_coeffs(&s.revert().unwrap(), &[0.0, 1.0, -1.0, 2.0 / 3.0], 1e-15);
    }

    #[test]
    fn revert_rejects_zero_linear_term() {
        let s = PowerSeries::from_real(&[0.0, 0.0, 1.0]).unwrap();
        assert!(matches!(s.revert(), Err(Error::ZeroLinearTerm { .. })));
    }

    #[test]
    fn revert_about_nonzero_base() {
        let s = PowerSeries::new(c(0.75), vec![c(0.0), c(2.0), c(1.0), c(0.0), c(0.0)]).unwrap();
        let r = s.revert().unwrap();
        assert_eq!(r.coeff(0), c(0.75));
        let back = PowerSeries::compose(&s, &r).unwrap().series;
        assert_coeffs(&back, &[0.0, 1.0, 0.0, 0.0, 0.0], 1e-14);
        let forth = PowerSeries::compose(&r, &s).unwrap().series;
        assert_eq!(forth.base_point(), c(0.75));
        assert_coeffs(&forth, &[0.75, 1.0, 0.0, 0.0, 0.0], 1e-14);
    }

    #[test]
    fn recenter_preserves_values() {
        let f = PowerSeries::from_real(&[0.0, 4.0, -4.0]).unwrap();
        let g = f.recenter(c(0.75));
        assert_coeffs(&g, &[0.75, -2.0, -4.0], 1e-15);
        for x in [0.1, 0.5, 0.9] {
            assert!((f.evaluate(c(x)) - g.evaluate(c(x))).norm() < 1e-15);
        }
    }

    #[test]
    fn reciprocal_of_geometric() {
        let s = PowerSeries::from_real(&[1.0, -1.0, 0.0, 0.0]).unwrap();
        assert_coeffs(&s.reciprocal().unwrap(), &[1.0, 1.0, 1.0, 1.0], 0.0);
    }

    #[test]
    fn pow_matches_repeated_mul() {
        let s = PowerSeries::from_real(&[0.5, 1.0, -2.0, 0.25, 1.0]).unwrap();
        let mut acc = PowerSeries::constant(ZERO, c(1.0), 5);
        for _ in 0..5 {
            acc = acc.mul(&s).unwrap();
        }
        let p = s.pow(5);
        for k in 0..5 {
            assert!((p.coeff(k) - acc.coeff(k)).norm() < 1e-12);
        }
    }

    #[test]
    fn base_mismatch_rejected() {
        let a = PowerSeries::from_real(&[1.0]).unwrap();
        let b = PowerSeries::new(c(1.0), vec![c(1.0)]).unwrap();
        assert!(matches!(a.add(&b), Err(Error::BaseMismatch { .. })));
    }

    #[test]
    fn fixed_points_of_logistic4() {
        let f = PowerSeries::from_real(&[0.0, 4.0, -4.0]).unwrap().with_order(8);
        let origin = find_fixed_point(&f, c(0.1)).unwrap();
        assert!(origin.x_star.norm() < 1e-12);
        assert!((origin.multiplier - c(4.0)).norm() < 1e-12);
        assert!((origin.nearest_other.unwrap() - 0.75).abs() < 1e-10);
        assert!((origin.default_radius() - 0.075).abs() < 1e-10);

        let other = find_fixed_point(&f, c(0.7)).unwrap();
        assert!((other.x_star - c(0.75)).norm() < 1e-12);
        assert!((other.multiplier - c(-2.0)).norm() < 1e-12);
        assert_eq!(other.shifted_map.coeff(0), ZERO);
        assert_eq!(other.shifted_map.coeff(1), other.multiplier);
        assert!((other.shifted_map.coeff(2) - c(-4.0)).norm() < 1e-12);
    }

    #[test]
    fn fixed_point_of_logistic2() {
        let f = PowerSeries::from_real(&[0.0, 2.0, -2.0]).unwrap();
        let fr = find_fixed_point(&f, c(0.1)).unwrap();
        assert!(fr.x_star.norm() < 1e-12);
        assert!((fr.multiplier - c(2.0)).norm() < 1e-12);
    }

    #[test]
    fn superattracting_fixed_point_rejected() {
        // logistic mu = 2 at x* = 1/2 has f'(x*) = 0
        let f = PowerSeries::from_real(&[0.0, 2.0, -2.0]).unwrap();
        let err = find_fixed_point(&f, c(0.45)).unwrap_err();
        assert!(matches!(err, Error::RestrictiveConditionViolated { .. }));
    }

    #[test]
    fn root_of_unity_multiplier_rejected() {
        let f = PowerSeries::from_real(&[0.0, -1.0, 1.0]).unwrap().with_order(6);
        let err = find_fixed_point(&f, c(0.01)).unwrap_err();
        assert!(matches!(err, Error::RestrictiveConditionViolated { .. }));
    }

    #[test]
    fn newton_failure_reports_last_iterate() {
        // x^2 + 1 = x has no real solution; a real start stays real
        let f = PowerSeries::from_real(&[1.0, 0.0, 1.0]).unwrap();
        assert!(matches!(
            find_fixed_point(&f, c(0.5)),
            Err(Error::FixedPointNotFound { .. })
        ));
    }

    #[test]
    fn map_spec_parsing() {
        let p = MapSpec::parse_preset("logistic:4").unwrap();
        assert_eq!(p.coefficients(), vec![c(0.0), c(4.0), c(-4.0)]);
        let q = MapSpec::parse_coeffs("0, 1+2i, -3").unwrap();
        assert_eq!(
            q.coefficients(),
            vec![c(0.0), Complex64::new(1.0, 2.0), c(-3.0)]
        );
        assert!(MapSpec::parse_preset("henon:1").is_err());
        assert!(MapSpec::parse_coeffs("0,abc").is_err());
    }

    #[test]
    fn polynomial_roots_of_quadratic() {
        let p = PowerSeries::from_real(&[0.0, 3.0, -4.0, 0.0]).unwrap();
        let mut roots: Vec<f64> = p.polynomial_roots().iter().map(|r| r.re).collect();
        roots.sort_by(f64::total_cmp);
        assert!(roots[0].abs() < 1e-12 && (roots[1] - 0.75).abs() < 1e-12);
    }
}

//! Diagonalization of upper-triangular Carleman matrices and the matrix
//! functions built on it.
//!
//! For a map with a fixed point `x*` and multiplier `λ = f'(x*)`, the
//! matrix `M(g)` of the shifted map is upper triangular with diagonal
//! `λ^j`. When those powers are pairwise distinct it factors as
//! `M(g) = V^{-1} Λ V` with unitriangular `V`, computed column by column
//! from the triangular eigen-relations (no general eigensolver involved).
//! Row 1 of `V` is the left eigenvector `ψ` with `ψ M(g) = λ ψ`; it holds the
//! Taylor coefficients of the linearizing chart.
//!
//! Non-integer powers use the principal logarithm, `λ^t = exp(t Log λ)`
//! with `arg λ ∈ (-π, π]`.

use std::fmt::Write as _;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::carleman::{build_matrix, CarlemanMatrix, ShiftTransform};
use crate::error::{Error, Result};
use crate::io;
use crate::series::{FixedPointFrame, PowerSeries};
use crate::tol;

const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Branch used for `λ^t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Branch {
    /// Principal logarithm of the multiplier.
    pub log_lambda: Complex64,
    /// `arg λ`, in `(-π, π]`.
    pub arg: f64,
}

impl Branch {
    pub fn principal(lambda: Complex64) -> Self {
        let log_lambda = lambda.ln();
        Self {
            log_lambda,
            arg: log_lambda.im,
        }
    }

    /// `λ^t` on this branch.
    pub fn pow(&self, t: f64) -> Complex64 {
        (self.log_lambda * t).exp()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralFactorization {
    lambda: Complex64,
    v: DMatrix<Complex64>,
    v_inv: DMatrix<Complex64>,
    shift: ShiftTransform,
    /// Base point of the original map (the frame `fractional_power` returns to).
    origin: Complex64,
    branch: Branch,
}

/// Diagonalize the upper-triangular matrix `mg = M(g)` of the map shifted to
/// `frame.x_star`.
pub fn diagonalize(mg: &CarlemanMatrix, frame: &FixedPointFrame) -> Result<SpectralFactorization> {
    let n = mg.dim();
    let m = mg.entries();
    let lambda = frame.multiplier;

    let deviation = (1..n)
        .map(|j| {
            let scale = (0..n).map(|k| m[(j, k)].norm()).fold(1.0, f64::max);
            (0..j).map(|k| m[(j, k)].norm()).fold(0.0, f64::max) / scale
        })
        .fold(0.0, f64::max);
    if deviation > tol::TOL_TRI {
        return Err(Error::NotUpperTriangular { deviation });
    }
    if lambda.norm() < tol::TOL_RES {
        return Err(Error::Superattracting {
            modulus: lambda.norm(),
        });
    }
    if (m[(1, 1)] - lambda).norm() > 1e-10 * lambda.norm().max(1.0) {
        return Err(Error::Domain(format!(
            "matrix diagonal {} does not match multiplier {lambda}",
            m[(1, 1)]
        )));
    }

    let mut powers = Vec::with_capacity(n);
    let mut p = ONE;
    for _ in 0..n {
        powers.push(p);
        p *= lambda;
    }
    for k in 1..n {
        for j in 0..k {
            let gap = (powers[j] - powers[k]).norm();
            if gap < tol::TOL_RES * powers[j].norm().max(powers[k].norm()) {
                return Err(Error::ResonantEigenvalues { j, k });
            }
        }
    }

    // V M(g) = Λ V: V_jk (λ^j - λ^k) = Σ_{l=j}^{k-1} V_jl M_lk, by increasing k then j.
    let mut v = DMatrix::<Complex64>::identity(n, n);
    for k in 1..n {
        for j in 0..k {
            let acc: Complex64 = (j..k).map(|l| v[(j, l)] * m[(l, k)]).sum();
            v[(j, k)] = acc / (powers[j] - powers[k]);
        }
    }
    // M(g) V^{-1} = V^{-1} Λ: W_jk (λ^k - λ^j) = Σ_{l=j+1}^{k} M_jl W_lk, by decreasing j.
    let mut w = DMatrix::<Complex64>::identity(n, n);
    for k in 1..n {
        for j in (0..k).rev() {
            let acc: Complex64 = (j + 1..=k).map(|l| m[(j, l)] * w[(l, k)]).sum();
            w[(j, k)] = acc / (powers[k] - powers[j]);
        }
    }

    let origin = frame.map.base_point();
    Ok(SpectralFactorization {
        lambda,
        v,
        v_inv: w,
        shift: ShiftTransform::new(frame.x_star - origin, n),
        origin,
        branch: Branch::principal(lambda),
    })
}

impl SpectralFactorization {
    /// Shift `f` to its fixed point, build `M(g)` and diagonalize it.
    pub fn from_frame(frame: &FixedPointFrame, dim: usize) -> Result<Self> {
        let mg = build_matrix(&frame.shifted_map, dim)?;
        diagonalize(&mg, frame)
    }

    pub fn lambda(&self) -> Complex64 {
        self.lambda
    }

    pub fn branch(&self) -> Branch {
        self.branch
    }

    pub fn dim(&self) -> usize {
        self.v.nrows()
    }

    pub fn x_star(&self) -> Complex64 {
        self.origin + self.shift.x_star
    }

    pub fn v(&self) -> &DMatrix<Complex64> {
        &self.v
    }

    pub fn v_inv(&self) -> &DMatrix<Complex64> {
        &self.v_inv
    }

    pub fn shift(&self) -> &ShiftTransform {
        &self.shift
    }

    /// `(λ^0, λ^1, …, λ^{N-1})`, the diagonal of `Λ`.
    pub fn eigenvalues(&self) -> Vec<Complex64> {
        let mut p = ONE;
        (0..self.dim())
            .map(|_| {
                let out = p;
                p *= self.lambda;
                out
            })
            .collect()
    }

    /// Row 1 of `V`: the left eigenvector `ψ` with `ψ M(g) = λ ψ`.
    pub fn left_eigenrow(&self) -> Vec<Complex64> {
        self.v.row(1).iter().copied().collect()
    }

    /// `V^{-1} D V` for a diagonal given by its entries.
    fn conjugate_diagonal(&self, diag: &[Complex64]) -> DMatrix<Complex64> {
        let n = self.dim();
        let mut dv = self.v.clone();
        for j in 0..n {
            for k in 0..n {
                dv[(j, k)] *= diag[j];
            }
        }
        &self.v_inv * dv
    }

    fn to_origin(&self, local: DMatrix<Complex64>) -> CarlemanMatrix {
        let entries = if self.shift.is_trivial() {
            local
        } else {
            &self.shift.inverse * local * &self.shift.forward
        };
        CarlemanMatrix::from_entries(entries, None, self.origin).expect("square")
    }

    /// `M(g)^t = V^{-1} Λ^t V`, in the coordinate centred at `x*`.
    pub fn power_local(&self, t: f64) -> CarlemanMatrix {
        let diag: Vec<Complex64> = (0..self.dim())
            .map(|j| self.branch.pow(t * j as f64))
            .collect();
        CarlemanMatrix::from_entries(self.conjugate_diagonal(&diag), None, self.x_star())
            .expect("square")
    }

    /// `M(f)^t = T^{-1} V^{-1} Λ^t V T` in the original coordinate.
    ///
    /// For `x* ≠ 0` the outer conjugation re-expands about the original base
    /// point, which is only meaningful where the iterate is analytic there;
    /// prefer [`Self::power_local`] for work near the fixed point.
    pub fn fractional_power(&self, t: f64) -> CarlemanMatrix {
        self.to_origin(self.power_local(t).into_entries())
    }

    /// `ln M(g) = V^{-1} (ln Λ) V` with `(ln Λ)_jj = j Log λ`.
    pub fn log_local(&self) -> CarlemanMatrix {
        let diag: Vec<Complex64> = (0..self.dim())
            .map(|j| self.branch.log_lambda * j as f64)
            .collect();
        CarlemanMatrix::from_entries(self.conjugate_diagonal(&diag), None, self.x_star())
            .expect("square")
    }

    /// `ln M(f) = T^{-1} V^{-1} (ln Λ) V T` in the original coordinate.
    pub fn matrix_log(&self) -> CarlemanMatrix {
        self.to_origin(self.log_local().into_entries())
    }

    /// The linearizing chart `v` (row 1 of `V`) as a series about `x*`.
    pub fn chart_series(&self) -> PowerSeries {
        PowerSeries::new(self.x_star(), self.left_eigenrow()).expect("dim >= 2")
    }

    /// Three blocks (`V`, `V_inv`, `diag`), each headed by
    /// `factorization <block> dim=N lambda=<λ>`.
    pub fn to_csv(&self) -> String {
        let n = self.dim();
        let lam = io::format_complex(self.lambda);
        let mut out = String::new();
        let _ = writeln!(out, "factorization V dim={n} lambda={lam}");
        io::write_block(&mut out, &self.v);
        let _ = writeln!(out, "factorization V_inv dim={n} lambda={lam}");
        io::write_block(&mut out, &self.v_inv);
        let _ = writeln!(out, "factorization diag dim={n} lambda={lam}");
        let _ = writeln!(out, "{}", io::format_row(self.eigenvalues().iter()));
        out
    }
}

/// Parsed factorization dump.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorizationDump {
    pub lambda: Complex64,
    pub v: DMatrix<Complex64>,
    pub v_inv: DMatrix<Complex64>,
    pub diag: Vec<Complex64>,
}

impl FactorizationDump {
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let (n, lambda) = block_header(&mut lines, "V")?;
        let v = io::parse_block(&mut lines, n, n)?;
        block_header(&mut lines, "V_inv")?;
        let v_inv = io::parse_block(&mut lines, n, n)?;
        block_header(&mut lines, "diag")?;
        let diag = io::parse_block(&mut lines, 1, n)?;
        Ok(Self {
            lambda,
            v,
            v_inv,
            diag: diag.iter().copied().collect(),
        })
    }
}

fn block_header<'a>(
    lines: &mut impl Iterator<Item = &'a str>,
    block: &str,
) -> Result<(usize, Complex64)> {
    let h = lines
        .next()
        .ok_or_else(|| Error::Parse(format!("missing {block} header")))?;
    let expected = format!("factorization {block} ");
    if !h.starts_with(&expected) {
        return Err(Error::Parse(format!("expected '{expected}', found '{h}'")));
    }
    let dim = io::header_field(h, "dim")
        .and_then(|d| d.parse().ok())
        .ok_or_else(|| Error::Parse("header lacks dim=N".into()))?;
    let lambda = io::parse_complex(
        io::header_field(h, "lambda").ok_or_else(|| Error::Parse("header lacks lambda".into()))?,
    )?;
    Ok((dim, lambda))
}

#[cfg(test)]
mod tests {
    use super::*;
    const ZERO: Complex64 = Complex64::new(0.0, 0.0);
    use crate::carleman::{exact_rows, max_abs_deviation, row_scaled_deviation};
    use crate::series::{convolve, find_fixed_point};

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn logistic_factorization(mu: f64, guess: f64, n: usize) -> (FixedPointFrame, SpectralFactorization) {
        let f = PowerSeries::from_real(&[0.0, mu, -mu]).unwrap().with_order(n);
        let frame = find_fixed_point(&f, c(guess)).unwrap();
        let s = SpectralFactorization::from_frame(&frame, n).unwrap();
        (frame, s)
    }

    #[test]
    fn logistic4_chart_entries() {
        let (_, s) = logistic_factorization(4.0, 0.1, 8);
        assert!((s.v()[(1, 2)] - c(1.0 / 3.0)).norm() < 1e-15);
        assert!((s.v()[(1, 3)] - c(8.0 / 45.0)).norm() < 1e-15);
        assert!((s.v_inv()[(1, 2)] - c(-1.0 / 3.0)).norm() < 1e-15);
    }

    #[test]
    fn diagonal_input_gives_identity_factors() {
        let f = PowerSeries::from_real(&[0.0, 2.0]).unwrap().with_order(4);
        let frame = find_fixed_point(&f, c(0.3)).unwrap();
        let mg = build_matrix(&f, 4).unwrap();
        let s = diagonalize(&mg, &frame).unwrap();
        assert_eq!(s.v(), &DMatrix::identity(4, 4));
        assert_eq!(s.v_inv(), &DMatrix::identity(4, 4));
        let l = s.matrix_log();
        let ln2 = 2.0_f64.ln();
        for j in 0..4 {
            for k in 0..4 {
                let expected = if j == k { c(j as f64 * ln2) } else { ZERO };
                assert!((l.get(j, k) - expected).norm() < 1e-15);
            }
        }
        assert_eq!(s.left_eigenrow(), vec![ZERO, c(1.0), ZERO, ZERO]);
    }

    #[test]
    fn logistic2_eigenrow() {
        let (_, s) = logistic_factorization(2.0, 0.1, 8);
        let row = s.left_eigenrow();
        let expected = [0.0, 1.0, 1.0, 4.0 / 3.0];
        for k in 0..4 {
            assert!((row[k] - c(expected[k])).norm() < 1e-14);
        }
    }

    #[test]
    fn eigenrow_is_left_eigenvector() {
        let n = 16;
        let (frame, s) = logistic_factorization(4.0, 0.1, n);
        let mg = build_matrix(&frame.shifted_map, n).unwrap();
        let psi = s.left_eigenrow();
        for k in 0..n {
            let lhs: Complex64 = (0..n).map(|l| psi[l] * mg.get(l, k)).sum();
            assert!((lhs - s.lambda() * psi[k]).norm() < 1e-9, "column {k}");
        }
    }

    /// Largest `|(Π A_i - C)_jk| / (Π |A_i|)_jk`, the error relative to the
    /// rounding a product of these magnitudes can incur.
    fn componentwise_error(factors: &[&DMatrix<Complex64>], target: &DMatrix<Complex64>) -> f64 {
        let mut product = factors[0].clone();
        let mut bound = factors[0].map(|z| z.norm());
        for f in &factors[1..] {
            product *= *f;
            bound *= f.map(|z| z.norm());
        }
        (product - target)
            .iter()
            .zip(bound.iter())
            .map(|(d, m)| if *m == 0.0 { d.norm() } else { d.norm() / m })
            .fold(0.0, f64::max)
    }

    #[test]
    fn factor_invariants_absolute_at_origin() {
        let n = 16;
        let (frame, s) = logistic_factorization(4.0, 0.1, n);
        let id = DMatrix::<Complex64>::identity(n, n);
        assert!(max_abs_deviation(&(s.v() * s.v_inv()), &id, n) < 1e-10);
        let mg = build_matrix(&frame.shifted_map, n).unwrap();
        let lam = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(s.eigenvalues()));
        assert!(row_scaled_deviation(&(s.v() * mg.entries() * s.v_inv()), &lam, n) < 1e-9);
    }

    #[test]
    fn factor_invariants() {
        let n = 24;
        for (mu, guess) in [(4.0, 0.1), (4.0, 0.7), (2.0, 0.1)] {
            let (frame, s) = logistic_factorization(mu, guess, n);
            let id = DMatrix::<Complex64>::identity(n, n);
            assert!(componentwise_error(&[s.v(), s.v_inv()], &id) < 1e-13);
            for j in 0..n {
                assert_eq!(s.v()[(j, j)], ONE);
                assert_eq!(s.v_inv()[(j, j)], ONE);
            }
            let mg = build_matrix(&frame.shifted_map, n).unwrap();
            let lam = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(s.eigenvalues()));
            assert!(componentwise_error(&[s.v(), mg.entries(), s.v_inv()], &lam) < 1e-13, "mu={mu} x*={}", frame.x_star);
            // rows of V are convolution powers of row 1
            let psi = s.left_eigenrow();
            let mut row = vec![ZERO; n];
            row[0] = ONE;
            for j in 1..n {
                row = convolve(&row, &psi, n);
                let scale = row.iter().map(|z| z.norm()).fold(1.0, f64::max);
                for k in 0..n {
                    assert!((s.v()[(j, k)] - row[k]).norm() / scale < 1e-9);
                }
            }
        }
    }

    #[test]
    fn power_at_zero_and_one() {
        let n = 10;
        let (frame, s) = logistic_factorization(4.0, 0.1, n);
        let p0 = s.fractional_power(0.0);
        assert!(max_abs_deviation(p0.entries(), &DMatrix::identity(n, n), n) < 1e-12);
        let p1 = s.fractional_power(1.0);
        let m = build_matrix(&frame.map, n).unwrap();
        assert!(row_scaled_deviation(p1.entries(), m.entries(), n) < 1e-9);
    }

    #[test]
    fn power_two_row1_is_double_iterate() {
        let n = 10;
        let (_, s) = logistic_factorization(4.0, 0.1, n);
        let p2 = s.fractional_power(2.0);
        let expected = [0.0, 16.0, -80.0, 128.0, -64.0, 0.0, 0.0, 0.0, 0.0, 0.0];
        for k in 0..n {
            assert!((p2.get(1, k) - c(expected[k])).norm() < 1e-9, "k={k}: {}", p2.get(1, k));
        }
    }

    #[test]
    fn power_semigroup_in_t() {
        let n = 12;
        let (_, s) = logistic_factorization(4.0, 0.1, n);
        for (a, b) in [(0.3, 0.7), (0.5, 0.5), (1.2, -0.2)] {
            let lhs = s.fractional_power(a + b);
            let rhs = s.fractional_power(a).matmul(&s.fractional_power(b)).unwrap();
            assert!(row_scaled_deviation(lhs.entries(), rhs.entries(), n) < 1e-8);
        }
    }

    #[test]
    fn integer_power_matches_matrix_power_on_window_at_three_quarters() {
        let n = 12;
        let (frame, s) = logistic_factorization(4.0, 0.7, n);
        let m = build_matrix(&frame.map, n).unwrap();
        let m2 = m.matmul(&m).unwrap();
        let p2 = s.fractional_power(2.0);
        let w = exact_rows(n, 2, 2);
        assert!(row_scaled_deviation(p2.entries(), m2.entries(), w) < 1e-8);
    }

    #[test]
    fn carleman_structure_is_preserved() {
        let n = 12;
        let (_, s) = logistic_factorization(4.0, 0.1, n);
        for p in [s.fractional_power(0.5), s.fractional_power(1.5)] {
            assert_eq!(p.row(0)[0], ONE);
            assert!(p.row(0)[1..].iter().all(|z| z.norm() < 1e-12));
            let row1 = p.row(1);
            let mut row = vec![ZERO; n];
            row[0] = ONE;
            for j in 1..n {
                row = convolve(&row, &row1, n);
                let scale = row.iter().map(|z| z.norm()).fold(1.0, f64::max);
                for k in 0..n {
                    assert!((p.get(j, k) - row[k]).norm() / scale < 1e-9);
                }
            }
        }
        let l = s.matrix_log();
        assert!(l.row(0).iter().all(|z| z.norm() < 1e-12));
    }

    #[test]
    fn log_coefficients_logistic4() {
        let (_, s) = logistic_factorization(4.0, 0.1, 16);
        let l = s.matrix_log();
        let ln2 = 2.0_f64.ln();
        assert!((l.get(1, 1) - c(4.0_f64.ln())).norm() < 1e-9);
        assert!((l.get(1, 2) - c(-2.0 / 3.0 * ln2)).norm() < 1e-9);
        assert!((l.get(1, 3) - c(-4.0 / 15.0 * ln2)).norm() < 1e-9);
    }

    #[test]
    fn log_is_derivative_of_power_at_zero() {
        let n = 10;
        let (_, s) = logistic_factorization(4.0, 0.1, n);
        let h = 1e-4;
        let plus = s.fractional_power(h);
        let minus = s.fractional_power(-h);
        let fd = (plus.entries() - minus.entries()) / Complex64::new(2.0 * h, 0.0);
        let l = s.matrix_log();
        let w = 6;
        assert!(row_scaled_deviation(&fd, l.entries(), w) < 1e-6);
    }

    #[test]
    fn negative_multiplier_uses_principal_branch() {
        let (_, s) = logistic_factorization(4.0, 0.7, 8);
        let b = s.branch();
        assert!((b.arg - std::f64::consts::PI).abs() < 1e-15);
        let half = b.pow(0.5);
        assert!((half - Complex64::new(0.0, 2.0_f64.sqrt())).norm() < 1e-14);
    }

    #[test]
    fn resonance_and_superattraction_rejected() {
        let f = PowerSeries::from_real(&[0.0, -1.0, 1.0]).unwrap();
        let frame = FixedPointFrame {
            x_star: ZERO,
            multiplier: c(-1.0),
            shifted_map: f.clone(),
            map: f.clone(),
            residual: 0.0,
            nearest_other: None,
        };
        let mg = build_matrix(&f, 6).unwrap();
        assert!(matches!(
            diagonalize(&mg, &frame),
            Err(Error::ResonantEigenvalues { j: 0, k: 2 })
        ));

        let sq = PowerSeries::from_real(&[0.0, 0.0, 1.0]).unwrap();
        let frame = FixedPointFrame {
            multiplier: ZERO,
            shifted_map: sq.clone(),
            map: sq.clone(),
            ..frame
        };
        let mg = build_matrix(&sq, 6).unwrap();
        assert!(matches!(diagonalize(&mg, &frame), Err(Error::Superattracting { .. })));
    }

    #[test]
    fn non_triangular_input_rejected() {
        let f = PowerSeries::from_real(&[0.1, 2.0, -2.0]).unwrap();
        let frame = FixedPointFrame {
            x_star: ZERO,
            multiplier: c(2.0),
            shifted_map: f.clone(),
            map: f.clone(),
            residual: 0.0,
            nearest_other: None,
        };
        let mg = build_matrix(&f, 6).unwrap();
        assert!(matches!(diagonalize(&mg, &frame), Err(Error::NotUpperTriangular { .. })));
    }

    #[test]
    fn dump_round_trip() {
        let (_, s) = logistic_factorization(4.0, 0.7, 5);
        let text = s.to_csv();
        assert!(text.starts_with("factorization V dim=5 lambda=-2+0i\n"));
        let d = FactorizationDump::parse(&text).unwrap();
        assert_eq!(&d.v, s.v());
        assert_eq!(&d.v_inv, s.v_inv());
        assert_eq!(d.diag, s.eigenvalues());
        assert_eq!(d.lambda, c(-2.0));
    }
}

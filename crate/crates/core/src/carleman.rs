//! Truncated Carleman embedding matrices.
//!
//! For a map `f(z) = Σ f_k z^k` the Carleman matrix satisfies
//! `f(z)^j = Σ_k M_jk z^k`. Row 0 is `e_0`, row 1 is the coefficient list of
//! `f`, and row `j` is the `j`-fold Cauchy power of row 1. Composition of
//! maps becomes matrix multiplication, `M(f ∘ g) = M(f) M(g)`.
//!
//! Truncating to `N × N` keeps that identity exact only when the right
//! factor is upper triangular, i.e. when `g(0) = 0`. Otherwise row `j` of a
//! product is trustworthy only while `deg(f) · j < N`; see [`exact_rows`].

use std::f64::consts::TAU;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::io;
use crate::series::{convolve, FixedPointFrame, PowerSeries};
use crate::tol;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Debug, Clone, PartialEq)]
pub struct CarlemanMatrix {
    entries: DMatrix<Complex64>,
    /// Map the matrix was built from; `None` for derived matrices such as
    /// fractional powers and logarithms.
    source: Option<PowerSeries>,
    /// Point of the phase space that the local coordinate `z = 0` sits at.
    center: Complex64,
}

impl CarlemanMatrix {
    pub fn from_entries(
        entries: DMatrix<Complex64>,
        source: Option<PowerSeries>,
        center: Complex64,
    ) -> Result<Self> {
        if entries.nrows() != entries.ncols() {
            return Err(Error::DimensionMismatch {
                expected: entries.nrows(),
                found: entries.ncols(),
            });
        }
        Ok(Self {
            entries,
            source,
            center,
        })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            entries: DMatrix::identity(dim, dim),
            source: Some(PowerSeries::identity(ZERO, dim)),
            center: ZERO,
        }
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    pub fn into_entries(self) -> DMatrix<Complex64> {
        self.entries
    }

    pub fn source(&self) -> Option<&PowerSeries> {
        self.source.as_ref()
    }

    pub fn center(&self) -> Complex64 {
        self.center
    }

    pub fn get(&self, j: usize, k: usize) -> Complex64 {
        self.entries[(j, k)]
    }

    pub fn row(&self, j: usize) -> Vec<Complex64> {
        (0..self.dim()).map(|k| self.entries[(j, k)]).collect()
    }

    /// Row 1 as a series about `center`: the represented map itself.
    pub fn row1_series(&self) -> PowerSeries {
        PowerSeries::new(self.center, self.row(1)).expect("dim >= 2")
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(Self {
            entries: &self.entries * &other.entries,
            source: None,
            center: self.center,
        })
    }

    /// Largest `|M_jk|` strictly below the diagonal.
    pub fn max_sub_diagonal(&self) -> f64 {
        let n = self.dim();
        (0..n)
            .flat_map(|j| (0..j).map(move |k| (j, k)))
            .map(|(j, k)| self.entries[(j, k)].norm())
            .fold(0.0, f64::max)
    }

    pub fn is_upper_triangular(&self) -> bool {
        self.max_sub_diagonal() == 0.0
    }

    /// Matrix dump: header `carleman dim=N map=<coefficients>` followed by
    /// `N` rows of `re+imi` entries.
    pub fn to_csv(&self) -> String {
        let map = match &self.source {
            Some(s) => s.to_string(),
            None => io::format_row(self.row(1).iter()),
        };
        let mut out = format!("carleman dim={} map={map}\n", self.dim());
        io::write_block(&mut out, &self.entries);
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty matrix dump".into()))?;
        if !header.starts_with("carleman ") {
            return Err(Error::Parse(format!("unexpected header '{header}'")));
        }
        let dim: usize = io::header_field(header, "dim")
            .and_then(|d| d.parse().ok())
            .ok_or_else(|| Error::Parse("header lacks dim=N".into()))?;
        let source = match io::header_field(header, "map") {
            Some(m) => Some(PowerSeries::from_coeffs(
                m.split(',').map(io::parse_complex).collect::<Result<Vec<_>>>()?,
            )?),
            None => None,
        };
        let entries = io::parse_block(&mut lines, dim, dim)?;
        Self::from_entries(entries, source, ZERO)
    }
}

/// Row-convolution construction: row `j` = row `j-1` ⊛ row 1, truncated.
///
/// The coefficients of `f` are read as a self-map of the local coordinate
/// `z = x - f.base_point()`.
pub fn build_matrix(f: &PowerSeries, dim: usize) -> Result<CarlemanMatrix> {
    if dim < 2 {
        return Err(Error::Domain(format!("Carleman dimension must be >= 2, got {dim}")));
    }
    let row1: Vec<Complex64> = (0..dim).map(|k| f.coeff(k)).collect();
    let mut entries = DMatrix::zeros(dim, dim);
    entries[(0, 0)] = ONE;
    let mut row = vec![ZERO; dim];
    row[0] = ONE;
    for j in 1..dim {
        row = convolve(&row, &row1, dim);
        for (k, &v) in row.iter().enumerate() {
            entries[(j, k)] = v;
        }
    }
    Ok(CarlemanMatrix {
        entries,
        source: Some(f.clone()),
        center: f.base_point(),
    })
}

/// Matrix assembled by the trapezoid rule on the unit circle, together with
/// the node-count diagnostics.
#[derive(Debug, Clone)]
pub struct QuadratureBuild {
    pub matrix: CarlemanMatrix,
    pub nodes: usize,
    /// `N·d + N + 1` for a degree-`d` map.
    pub exactness_bound: usize,
    /// Set when `nodes < exactness_bound`; aliasing may then corrupt entries.
    pub underresolved: bool,
}

/// Default node count `4·N·deg(f)` (at least the exactness bound).
pub fn default_nodes(f: &PowerSeries, dim: usize) -> usize {
    let d = f.degree().max(1);
    (4 * dim * d).max(dim * d + dim + 1)
}

/// `M_jk = (1/2π) ∫ e^{ikφ} f(e^{-iφ})^j dφ` by the `nodes`-point trapezoid
/// rule, which is exact (up to rounding) for polynomial maps once
/// `nodes ≥ N·deg(f) + N + 1`.
pub fn build_matrix_quadrature(f: &PowerSeries, dim: usize, nodes: usize) -> Result<QuadratureBuild> {
    if dim < 2 {
        return Err(Error::Domain(format!("Carleman dimension must be >= 2, got {dim}")));
    }
    if nodes == 0 {
        return Err(Error::Domain("quadrature needs at least one node".into()));
    }
    let local = f.with_base(ZERO);
    let d = f.degree().max(1);
    let exactness_bound = dim * d + dim + 1;
    let mut entries = DMatrix::zeros(dim, dim);
    let weight = 1.0 / nodes as f64;
    for q in 0..nodes {
        let phi = TAU * q as f64 / nodes as f64;
        let z = Complex64::from_polar(1.0, -phi);
        let fz = local.evaluate(z);
        let twiddle = Complex64::from_polar(1.0, phi);
        let mut power = ONE;
        for j in 0..dim {
            let mut w = power * weight;
            for k in 0..dim {
                entries[(j, k)] += w;
                w *= twiddle;
            }
            power *= fz;
        }
    }
    Ok(QuadratureBuild {
        matrix: CarlemanMatrix {
            entries,
            source: Some(f.clone()),
            center: f.base_point(),
        },
        nodes,
        exactness_bound,
        underresolved: nodes < exactness_bound,
    })
}

/// Pascal triangle up to `n - 1`.
pub(crate) fn binomials(n: usize) -> Vec<Vec<f64>> {
    let mut c = vec![vec![0.0; n]; n];
    for j in 0..n {
        c[j][0] = 1.0;
        for k in 1..=j {
            c[j][k] = c[j - 1][k - 1] + if k < j { c[j - 1][k] } else { 0.0 };
        }
    }
    c
}

/// `T = M(x - x*)` and its inverse `M(x + x*)`, both lower triangular.
#[derive(Debug, Clone, PartialEq)]
pub struct ShiftTransform {
    pub x_star: Complex64,
    pub forward: DMatrix<Complex64>,
    pub inverse: DMatrix<Complex64>,
}

impl ShiftTransform {
    pub fn new(x_star: Complex64, dim: usize) -> Self {
        let c = binomials(dim);
        let mut forward = DMatrix::zeros(dim, dim);
        let mut inverse = DMatrix::zeros(dim, dim);
        for j in 0..dim {
            for k in 0..=j {
                let p = (j - k) as i32;
                forward[(j, k)] = (-x_star).powi(p) * c[j][k];
                inverse[(j, k)] = x_star.powi(p) * c[j][k];
            }
        }
        Self {
            x_star,
            forward,
            inverse,
        }
    }

    pub fn dim(&self) -> usize {
        self.forward.nrows()
    }

    pub fn is_trivial(&self) -> bool {
        self.x_star == ZERO
    }
}

/// Rows `j` for which truncated products involving a degree-`degree` map
/// raised to `power` are free of truncation error: `degree · power · j < dim`.
pub fn exact_rows(dim: usize, degree: usize, power: usize) -> usize {
    let step = (degree * power).max(1);
    ((dim - 1) / step + 1).min(dim)
}

/// `M(g) = T M(f) T^{-1}`, the Carleman matrix of `f` in the coordinate
/// `y = x - x*`.
///
/// Only the leading [`exact_rows`] rows are free of truncation error; on
/// those rows the strictly lower part must vanish to [`tol::TOL_TRI`]
/// relative to `|T||M||T^{-1}|`, otherwise the frame does not belong to the
/// matrix.
pub fn shift_conjugate(m: &CarlemanMatrix, frame: &FixedPointFrame) -> Result<CarlemanMatrix> {
    let n = m.dim();
    let shift = ShiftTransform::new(frame.x_star - m.center, n);
    let product = &shift.forward * &m.entries * &shift.inverse;

    let abs = |a: &DMatrix<Complex64>| a.map(|z| z.norm());
    let scale = abs(&shift.forward) * abs(&m.entries) * abs(&shift.inverse);
    let degree = m.source.as_ref().map_or(n - 1, |s| s.degree().max(1));
    let rows = exact_rows(n, degree, 1);
    let mut deviation = 0.0_f64;
    for j in 0..rows {
        for k in 0..j {
            let s = scale[(j, k)];
            if s > 0.0 {
                deviation = deviation.max(product[(j, k)].norm() / s);
            }
        }
    }
    if deviation > tol::TOL_TRI {
        return Err(Error::ShiftInconsistent { deviation });
    }
    Ok(CarlemanMatrix {
        entries: product,
        source: None,
        center: frame.x_star,
    })
}

/// `max |M(f∘g) - M(f) M(g)|` over the full `N × N` window.
///
/// Requires `g(0) = 0`, which makes `M(g)` upper triangular and the
/// truncated product exact.
pub fn verify_semigroup(f: &PowerSeries, g: &PowerSeries, dim: usize) -> Result<f64> {
    if g.coeff(0) != ZERO {
        return Err(Error::Domain("semigroup check needs g(0) = 0".into()));
    }
    let f = f.with_order(dim).with_base(ZERO);
    let g = g.with_order(dim).with_base(ZERO);
    let fg = PowerSeries::compose(&f, &g)?.series;
    let lhs = build_matrix(&fg, dim)?;
    let rhs = build_matrix(&f, dim)?.matmul(&build_matrix(&g, dim)?)?;
    Ok(max_abs_deviation(lhs.entries(), rhs.entries(), dim))
}

/// `max |a_jk - b_jk|` over the leading `window × window` block.
pub fn max_abs_deviation(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>, window: usize) -> f64 {
    let w = window.min(a.nrows()).min(b.nrows());
    (0..w)
        .flat_map(|j| (0..w).map(move |k| (j, k)))
        .map(|(j, k)| (a[(j, k)] - b[(j, k)]).norm())
        .fold(0.0, f64::max)
}

/// `max_jk |a_jk - b_jk| / max(1, max_k |b_jk|)` over the leading window.
///
/// Carleman rows grow geometrically with `j`, so deviations are compared
/// against the magnitude of their own row.
pub fn row_scaled_deviation(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>, window: usize) -> f64 {
    let w = window.min(a.nrows()).min(b.nrows());
    (0..w)
        .map(|j| {
            let scale = (0..w).map(|k| b[(j, k)].norm()).fold(1.0, f64::max);
            (0..w).map(|k| (a[(j, k)] - b[(j, k)]).norm()).fold(0.0, f64::max) / scale
        })
        .fold(0.0, f64::max)
}

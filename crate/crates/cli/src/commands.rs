use carleman::carleman::{default_nodes, max_abs_deviation, row_scaled_deviation};
use carleman::io::parse_complex;
use carleman::verify::{run_suite, Report, Suite, SuiteOptions};
use carleman::{
    build_chart, build_expansion, build_field, build_matrix, build_matrix_quadrature, closed_form,
    find_fixed_point, integrate_flow, lyapunov_logistic, Error, FixedPointFrame, FlowField,
    IterateExpansion, MapSpec, PowerSeries, SchroederChart, SpectralFactorization,
};
use num_complex::Complex64;
use serde::Serialize;
use serde_json::json;

use crate::output::{emit, json_string, Cell, Failure, Table, EXIT_VERIFY};
use crate::{
    ChartArgs, Command, DimArgs, FieldArgs, Format, IntegrateArgs, IterateArgs, LocalArgs,
    LyapunovArgs, MapArgs, MatrixArgs, OutputArgs, SuiteName, VerifyArgs,
};

pub fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::Matrix(a) => matrix(a),
        Command::Iterate(a) => iterate(a),
        Command::Chart(a) => chart(a),
        Command::Field(a) => field(a),
        Command::Integrate(a) => integrate(a),
        Command::Lyapunov(a) => lyapunov(a),
        Command::Verify(a) => verify(a),
    }
}

fn map_spec(m: &MapArgs) -> Result<MapSpec, Error> {
    match (&m.preset, &m.coeffs) {
        (Some(p), None) => MapSpec::parse_preset(p),
        (None, Some(c)) => MapSpec::parse_coeffs(c),
        _ => Err(Error::Parse("exactly one of --preset and --coeffs is required".into())),
    }
}

fn pair(z: Complex64) -> [f64; 2] {
    [z.re + 0.0, z.im + 0.0]
}

fn pairs(v: &[Complex64]) -> Vec<[f64; 2]> {
    v.iter().copied().map(pair).collect()
}

fn write(out: &OutputArgs, default: Format, csv: impl FnOnce() -> String, json: impl FnOnce() -> String) -> Result<(), Failure> {
    let text = match out.format.unwrap_or(default) {
        Format::Csv => csv(),
        Format::Json => json(),
    };
    emit(&text, out.output.as_ref())
}

fn write_table(out: &OutputArgs, table: &Table) -> Result<(), Failure> {
    write(out, Format::Csv, || table.render(Format::Csv), || table.render(Format::Json))
}

/// Everything attached to one fixed point: frame, factorization, chart and
/// the matrix-route expansion.
struct Local {
    spec: MapSpec,
    frame: FixedPointFrame,
    factorization: SpectralFactorization,
    chart: SchroederChart,
    expansion: IterateExpansion,
}

impl Local {
    fn build(map: &MapArgs, dim: &DimArgs, local: &LocalArgs) -> Result<Self, Error> {
        let spec = map_spec(map)?;
        let n = dim.dim as usize;
        let f: PowerSeries = spec.to_series(n)?;
        let frame = find_fixed_point(&f, parse_complex(&local.guess)?)?;
        let factorization = SpectralFactorization::from_frame(&frame, n)?;
        let mut chart = build_chart(&factorization, &frame)?;
        let mut expansion = build_expansion(&factorization, &frame, n - 1)?;
        if let Some(r) = local.radius {
            if !(r > 0.0 && r.is_finite()) {
                return Err(Error::Domain(format!("radius must be positive, got {r}")));
            }
            chart = chart.with_radius(r);
            expansion = expansion.with_radius(r);
        }
        if let Some(tol) = local.tol {
            if !(tol > 0.0 && tol.is_finite()) {
                return Err(Error::Domain(format!("tol must be positive, got {tol}")));
            }
            chart = chart.with_tail_tol(tol);
            expansion = expansion.with_tail_tol(tol);
        }
        Ok(Self {
            spec,
            frame,
            factorization,
            chart,
            expansion,
        })
    }

    /// Whether the map is the logistic preset with parameter `mu`, expanded
    /// about the fixed point `x_star`.
    fn logistic_at(&self, mu: f64, x_star: f64) -> bool {
        matches!(self.spec, MapSpec::Logistic(m) if m == mu)
            && (self.frame.x_star - Complex64::new(x_star, 0.0)).norm() < 1e-12
    }

    fn reference_iterate(&self, t: f64, x: Complex64) -> Option<Complex64> {
        if self.logistic_at(4.0, 0.0) {
            Some(closed_form::logistic4_iterate(t, x))
        } else if self.logistic_at(4.0, 0.75) {
            Some(closed_form::logistic4_iterate_three_quarters(t, x))
        } else if self.logistic_at(2.0, 0.0) {
            Some(closed_form::logistic2_iterate(t, x))
        } else {
            None
        }
    }

    fn reference_field(&self, x: Complex64) -> Option<Complex64> {
        if self.logistic_at(4.0, 0.0) {
            Some(closed_form::logistic4_field(x))
        } else if self.logistic_at(2.0, 0.0) {
            Some(closed_form::logistic2_field(x))
        } else {
            None
        }
    }

    fn field(&self) -> Result<FlowField, Error> {
        build_field(&self.factorization.log_local(), &self.chart)
    }
}

fn value_row(lead: Vec<Cell>, value: Result<Complex64, Error>, route: &str) -> Vec<Cell> {
    let (z, ok) = match value {
        Ok(z) if z.is_finite() => (z, true),
        _ => (Complex64::new(f64::NAN, f64::NAN), false),
    };
    let mut row = lead;
    row.extend([Cell::Num(z.re), Cell::Num(z.im), Cell::Text(route.into()), Cell::Bool(ok)]);
    row
}

fn matrix(a: MatrixArgs) -> Result<(), Failure> {
    let n = a.dim as usize;
    let f = map_spec(&a.map)?.to_series(n)?;
    let m = build_matrix(&f, n)?;
    let quad = if a.check_quadrature {
        let nodes = a.nodes.unwrap_or_else(|| default_nodes(&f, n));
        let q = build_matrix_quadrature(&f, n, nodes)?;
        let abs = max_abs_deviation(m.entries(), q.matrix.entries(), n);
        let rel = row_scaled_deviation(q.matrix.entries(), m.entries(), n);
        Some((q.nodes, q.exactness_bound, q.underresolved, abs, rel))
    } else {
        None
    };
    write(
        &a.out,
        Format::Csv,
        || {
            let mut text = m.to_csv();
            if let Some((nodes, bound, under, abs, rel)) = quad {
                text.push_str(&format!(
                    "quadrature nodes={nodes} exactness_bound={bound} underresolved={under} \
                     max_abs_deviation={abs:e} row_relative_deviation={rel:e}\n"
                ));
            }
            text
        },
        || {
            let entries: Vec<Vec<[f64; 2]>> = (0..n).map(|j| pairs(&m.row(j))).collect();
            let mut doc = json!({
                "dim": n,
                "map": pairs(f.coeffs()),
                "entries": entries,
            });
            if let Some((nodes, bound, under, abs, rel)) = quad {
                doc["quadrature"] = json!({
                    "nodes": nodes,
                    "exactness_bound": bound,
                    "underresolved": under,
                    "max_abs_deviation": abs,
                    "row_relative_deviation": rel,
                });
            }
            json_string(&doc)
        },
    )
}

fn iterate(a: IterateArgs) -> Result<(), Failure> {
    let l = Local::build(&a.map, &a.dim, &a.local)?;
    let mut table = Table::new(&["t", "x", "re", "im", "route", "converged"]);
    for &t in &a.t {
        for &x in &a.x {
            let z = Complex64::new(x, 0.0);
            let lead = || vec![Cell::Num(t), Cell::Num(x)];
            let (chart_value, chart_route) = if a.extend {
                (l.chart.evaluate_extended(t, z), "chart-extended")
            } else {
                (l.chart.evaluate(t, z), "chart")
            };
            table.push(value_row(lead(), chart_value, chart_route));
            table.push(value_row(lead(), l.expansion.evaluate(t, z), "matrix"));
            if let Some(r) = l.reference_iterate(t, z) {
                table.push(value_row(lead(), Ok(r), "reference"));
            }
        }
    }
    write_table(&a.out, &table)
}

fn chart(a: ChartArgs) -> Result<(), Failure> {
    let l = Local::build(&a.map, &a.dim, &a.local)?;
    if a.factorization {
        let s = &l.factorization;
        let n = s.dim();
        let square = |get: &dyn Fn(usize, usize) -> Complex64| -> Vec<Vec<[f64; 2]>> {
            (0..n).map(|j| (0..n).map(|k| pair(get(j, k))).collect()).collect()
        };
        return write(
            &a.out,
            Format::Csv,
            || s.to_csv(),
            || {
                json_string(&json!({
                    "dim": s.dim(),
                    "x_star": pair(s.x_star()),
                    "lambda": pair(s.lambda()),
                    "v": square(&|j, k| s.v()[(j, k)]),
                    "v_inv": square(&|j, k| s.v_inv()[(j, k)]),
                    "diag": pairs(&s.eigenvalues()),
                }))
            },
        );
    }
    let mut table = Table::new(&["k", "u_re", "u_im", "u_inv_re", "u_inv_im"]);
    let (u, u_inv) = (l.chart.u(), l.chart.u_inv());
    for k in 0..u.order().max(u_inv.order()) {
        let (p, q) = (u.coeff(k), u_inv.coeff(k));
        table.push(vec![Cell::Int(k), Cell::Num(p.re), Cell::Num(p.im), Cell::Num(q.re), Cell::Num(q.im)]);
    }
    write(
        &a.out,
        Format::Csv,
        || table.render(Format::Csv),
        || {
            let rows: serde_json::Value = serde_json::from_str(&table.render(Format::Json)).expect("own output");
            json_string(&json!({
                "x_star": pair(l.chart.x_star()),
                "lambda": pair(l.chart.lambda()),
                "radius": l.chart.radius(),
                "coefficients": rows,
            }))
        },
    )
}

fn field(a: FieldArgs) -> Result<(), Failure> {
    let l = Local::build(&a.map, &a.dim, &a.local)?;
    let g = l.field()?;
    if a.x.is_empty() {
        let mut table = Table::new(&["k", "re", "im"]);
        for (k, z) in g.coeffs().coeffs().iter().enumerate() {
            table.push(vec![Cell::Int(k), Cell::Num(z.re), Cell::Num(z.im)]);
        }
        return write_table(&a.out, &table);
    }
    let mut table = Table::new(&["x", "re", "im", "route", "converged"]);
    for &x in &a.x {
        let z = Complex64::new(x, 0.0);
        table.push(value_row(vec![Cell::Num(x)], g.evaluate(z), "series"));
        table.push(value_row(vec![Cell::Num(x)], g.evaluate_via_chart(z), "chart"));
        if let Some(r) = l.reference_field(z) {
            table.push(value_row(vec![Cell::Num(x)], Ok(r), "reference"));
        }
    }
    write_table(&a.out, &table)
}

fn trajectory_table(points: &[(f64, Complex64)]) -> Table {
    let mut table = Table::new(&["t", "re", "im"]);
    for &(t, z) in points {
        table.push(vec![Cell::Num(t), Cell::Num(z.re), Cell::Num(z.im)]);
    }
    table
}

fn integrate(a: IntegrateArgs) -> Result<(), Failure> {
    let l = Local::build(&a.map, &a.dim, &a.local)?;
    let g = l.field()?;
    let x0 = parse_complex(&a.x0)?;
    match integrate_flow(&g, x0, a.t_end, a.dt) {
        Ok(points) => write_table(&a.out, &trajectory_table(&points)),
        Err(Error::ChartEscape { t_reached, partial }) => {
            write_table(&a.out, &trajectory_table(&partial))?;
            Err(Error::ChartEscape { t_reached, partial }.into())
        }
        Err(e) => Err(e.into()),
    }
}

#[derive(Serialize)]
struct LyapunovReport {
    n: usize,
    x0: f64,
    sigma_hat: f64,
    reference: f64,
    perturbed: bool,
}

fn lyapunov(a: LyapunovArgs) -> Result<(), Failure> {
    let est = lyapunov_logistic(a.n, a.x0)?;
    let report = LyapunovReport {
        n: est.n,
        x0: est.x0,
        sigma_hat: est.sigma_hat,
        reference: std::f64::consts::LN_2,
        perturbed: est.perturbed,
    };
    write(
        &a.out,
        Format::Json,
        || {
            let mut table = Table::new(&["n", "x0", "sigma_hat", "reference", "perturbed"]);
            table.push(vec![
                Cell::Int(report.n),
                Cell::Num(report.x0),
                Cell::Num(report.sigma_hat),
                Cell::Num(report.reference),
                Cell::Bool(report.perturbed),
            ]);
            table.render(Format::Csv)
        },
        || json_string(&report),
    )
}

fn report_table(report: &Report) -> Table {
    let mut table = Table::new(&["id", "name", "measured", "tolerance", "passed", "detail"]);
    for c in &report.checks {
        table.push(vec![
            Cell::Text(c.id.clone()),
            Cell::Text(c.name.clone()),
            Cell::Num(c.measured),
            Cell::Num(c.tolerance),
            Cell::Bool(c.passed),
            Cell::Text(c.detail.clone()),
        ]);
    }
    table
}

fn verify(a: VerifyArgs) -> Result<(), Failure> {
    let suite = match a.suite {
        SuiteName::Logistic4 => Suite::Logistic4,
        SuiteName::Mu2 => Suite::Mu2,
        SuiteName::Semigroup => Suite::Semigroup,
        SuiteName::Lyapunov => Suite::Lyapunov,
        SuiteName::All => Suite::All,
    };
    let opts = SuiteOptions {
        dim: a.dim as usize,
        lyapunov_steps: a.n,
    };
    let report = run_suite(suite, opts)?;
    write(&a.out, Format::Json, || report_table(&report).render(Format::Csv), || json_string(&report))?;
    verdict(&report)
}

fn verdict(report: &Report) -> Result<(), Failure> {
    if report.passed {
        return Ok(());
    }
    let failed: Vec<&str> = report.checks.iter().filter(|c| !c.passed).map(|c| c.id.as_str()).collect();
    Err(Failure {
        kind: "verification_failed",
        message: format!("failed checks: {}", failed.join(",")),
        code: EXIT_VERIFY,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use carleman::verify::Check;

    fn check(id: &str, passed: bool) -> Check {
        Check {
            id: id.into(),
            name: "probe".into(),
            measured: if passed { 0.0 } else { 1.0 },
            tolerance: 0.5,
            passed,
            detail: String::new(),
        }
    }

    #[test]
    fn failed_checks_exit_with_verify_code() {
        let report = Report {
            suite: Suite::All,
            checks: vec![check("1", true), check("4", false), check("9", false)],
            passed: false,
        };
        let f = verdict(&report).unwrap_err();
        assert_eq!((f.kind, f.code), ("verification_failed", EXIT_VERIFY));
        assert_eq!(f.message, "failed checks: 4,9");
        assert_eq!(report_table(&report).rows[1][4], Cell::Bool(false));
    }

    #[test]
    fn passing_report_exits_cleanly() {
        let report = Report {
            suite: Suite::Mu2,
            checks: vec![check("5", true)],
            passed: true,
        };
        assert!(verdict(&report).is_ok());
    }
}

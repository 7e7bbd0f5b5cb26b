use carleman::carleman::{build_matrix, max_abs_deviation};
use carleman::{
    build_chart, build_expansion, find_fixed_point, CarlemanMatrix, PowerSeries, SchroederChart,
    SpectralFactorization,
};
use num_complex::Complex64;
use proptest::prelude::*;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Series about 0 with zero constant term and linear term bounded away from 0.
fn series_through_origin(order: usize) -> impl Strategy<Value = PowerSeries> {
    (
        prop_oneof![0.5f64..2.0, -2.0f64..-0.5],
        proptest::collection::vec(-1.0f64..1.0, order - 2),
    )
        .prop_map(|(linear, rest)| {
            let mut coeffs = vec![0.0, linear];
            coeffs.extend(rest);
            PowerSeries::from_real(&coeffs).unwrap()
        })
}

fn close(a: &PowerSeries, b: &PowerSeries, tol: f64) -> bool {
    a.coeffs()
        .iter()
        .zip(b.coeffs())
        .all(|(x, y)| (x - y).norm() <= tol * (1.0 + x.norm().max(y.norm())))
}

fn logistic_chart(guess: f64, n: usize, radius: f64) -> SchroederChart {
    let f = PowerSeries::from_real(&[0.0, 4.0, -4.0]).unwrap().with_order(n);
    let frame = find_fixed_point(&f, c(guess)).unwrap();
    let s = SpectralFactorization::from_frame(&frame, n).unwrap();
    build_chart(&s, &frame).unwrap().with_radius(radius)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn composition_is_associative(
        a in series_through_origin(8),
        b in series_through_origin(8),
        d in series_through_origin(8),
    ) {
        let ab = PowerSeries::compose(&a, &b).unwrap().series;
        let left = PowerSeries::compose(&ab, &d).unwrap().series;
        let bd = PowerSeries::compose(&b, &d).unwrap().series;
        let right = PowerSeries::compose(&a, &bd).unwrap().series;
        prop_assert!(close(&left, &right, 1e-10));
    }

    #[test]
    fn reversion_is_a_two_sided_inverse(s in series_through_origin(10)) {
        let r = s.revert().unwrap();
        let id = PowerSeries::identity(Complex64::new(0.0, 0.0), 10);
        let sr = PowerSeries::compose(&s, &r).unwrap().series;
        let rs = PowerSeries::compose(&r, &s).unwrap().series;
        prop_assert!(close(&sr, &id, 1e-8));
        prop_assert!(close(&rs, &id, 1e-8));
    }

    #[test]
    fn carleman_matrix_is_a_homomorphism(f in series_through_origin(5), g in series_through_origin(5)) {
        let n = 8;
        let fg = PowerSeries::compose(&f.with_order(n), &g.with_order(n)).unwrap().series;
        let lhs = build_matrix(&fg, n).unwrap();
        let rhs = build_matrix(&f, n).unwrap().matmul(&build_matrix(&g, n).unwrap()).unwrap();
        let scale = rhs.entries().iter().map(|z| z.norm()).fold(1.0, f64::max);
        prop_assert!(max_abs_deviation(lhs.entries(), rhs.entries(), n) <= 1e-12 * scale);
    }

    #[test]
    fn chart_semigroup(s in 0.0f64..1.0, t in 0.0f64..1.0, x in -0.02f64..0.02) {
        let chart = logistic_chart(0.0, 32, 0.2);
        let lhs = chart.evaluate(s + t, c(x)).unwrap();
        let rhs = chart.evaluate(s, chart.evaluate(t, c(x)).unwrap()).unwrap();
        prop_assert!((lhs - rhs).norm() <= 1e-7);
    }

    #[test]
    fn chart_and_matrix_routes_agree(t in 0.0f64..2.0, r in 0.0f64..0.05, angle in 0.0f64..std::f64::consts::TAU) {
        let n = 32;
        let f = PowerSeries::from_real(&[0.0, 4.0, -4.0]).unwrap().with_order(n);
        let frame = find_fixed_point(&f, c(0.0)).unwrap();
        let s = SpectralFactorization::from_frame(&frame, n).unwrap();
        let chart = build_chart(&s, &frame).unwrap();
        let e = build_expansion(&s, &frame, n - 1).unwrap();
        let x = Complex64::from_polar(r, angle);
        prop_assert!((chart.evaluate(t, x).unwrap() - e.evaluate(t, x).unwrap()).norm() <= 1e-7);
    }

    #[test]
    fn fractional_powers_keep_carleman_structure(t in -1.0f64..2.0) {
        let n = 12;
        let f = PowerSeries::from_real(&[0.0, 4.0, -4.0]).unwrap().with_order(n);
        let frame = find_fixed_point(&f, c(0.0)).unwrap();
        let s = SpectralFactorization::from_frame(&frame, n).unwrap();
        let p = s.fractional_power(t);
        let rebuilt = build_matrix(&p.row1_series(), n).unwrap();
        for j in 0..n {
            let scale = (0..n).map(|k| rebuilt.get(j, k).norm()).fold(1.0, f64::max);
            for k in 0..n {
                prop_assert!((p.get(j, k) - rebuilt.get(j, k)).norm() <= 1e-9 * scale);
            }
        }
    }

    #[test]
    fn schroeder_equation_holds_near_three_quarters(dx in -0.02f64..0.02) {
        let chart = logistic_chart(0.7, 32, 0.075);
        prop_assert!(chart.schroeder_residual(c(0.75 + dx)).unwrap() <= 1e-8);
    }
}

#[test]
fn public_types_are_thread_safe() {
    fn check<T: Send + Sync>() {}
    check::<PowerSeries>();
    check::<CarlemanMatrix>();
    check::<SpectralFactorization>();
    check::<SchroederChart>();
    check::<carleman::IterateExpansion>();
    check::<carleman::FlowField>();
    check::<carleman::Error>();
}

use proptest::prelude::*;
use singauss::{parse, Vars};

fn vars() -> Vars {
    Vars::new(&["u", "v"])
}

/// Random expression text over `u, v` whose functions stay finite on `[-1, 1]^2`.
fn expression() -> impl Strategy<Value = String> {
    let leaf = prop_oneof![
        Just("u".to_string()),
        Just("v".to_string()),
        (-3.0f64..3.0).prop_map(|c| format!("{c:.3}")),
    ];
    leaf.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a}) + ({b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a}) - ({b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a})*({b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a})/(2 + sin({b}))")),
            (inner.clone(), 1u32..4).prop_map(|(a, n)| format!("({a})^{n}")),
            inner.clone().prop_map(|a| format!("sin({a})")),
            inner.clone().prop_map(|a| format!("cos({a})")),
            inner.clone().prop_map(|a| format!("atan({a})")),
            inner.clone().prop_map(|a| format!("exp(0.3*sin({a}))")),
            inner.clone().prop_map(|a| format!("sqrt(1 + ({a})^2)")),
            inner.prop_map(|a| format!("log(2 + cos({a}))")),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    /// Central differences of the value converge to the symbolic derivative at order two.
    #[test]
    fn symbolic_derivative_matches_finite_differences(text in expression(), u in -1.0f64..1.0, v in -1.0f64..1.0, var in 0usize..2) {
        let e = parse(&text, &vars()).unwrap();
        let d = e.differentiate(var);
        let exact = d.eval(&[u, v]).unwrap();
        let shifted = |h: f64| {
            let mut p = [u, v];
            p[var] += h;
            e.eval(&p).unwrap()
        };
        let central = |h: f64| (shifted(h) - shifted(-h)) / (2.0 * h);
        let (h1, h2) = (2e-2, 1e-2);
        let (e1, e2) = ((central(h1) - exact).abs(), (central(h2) - exact).abs());
        let scale = 1.0 + exact.abs();
        // Below this the difference quotient is exact up to roundoff.
        prop_assume!(e1 > 1e-9 * scale);
        let order = (e1 / e2).log2();
        prop_assert!(order >= 1.9, "order {order} for {text} at ({u}, {v}): errors {e1:e}, {e2:e}");
    }

    /// Printing and reparsing gives an expression with the same values and the same text.
    #[test]
    fn display_round_trips(text in expression(), u in -1.0f64..1.0, v in -1.0f64..1.0) {
        let e = parse(&text, &vars()).unwrap();
        let printed = e.to_string();
        let again = parse(&printed, &vars()).unwrap();
        let (a, b) = (e.eval(&[u, v]).unwrap(), again.eval(&[u, v]).unwrap());
        prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()), "{text} -> {printed}: {a} vs {b}");
        prop_assert_eq!(again.to_string(), printed);
    }

    #[test]
    fn derivative_of_sum_is_sum_of_derivatives(a in expression(), b in expression(), u in -1.0f64..1.0, v in -1.0f64..1.0) {
        let sum = parse(&format!("({a}) + ({b})"), &vars()).unwrap();
        let (ea, eb) = (parse(&a, &vars()).unwrap(), parse(&b, &vars()).unwrap());
        let p = [u, v];
        let lhs = sum.differentiate(0).eval(&p).unwrap();
        let rhs = ea.differentiate(0).eval(&p).unwrap() + eb.differentiate(0).eval(&p).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-9 * (1.0 + rhs.abs()));
    }
}

#[test]
fn unknown_identifiers_are_rejected() {
    assert!(parse("u + w", &vars()).is_err());
    assert!(parse("sinh(u)", &vars()).is_err());
    assert!(parse("u +", &vars()).is_err());
}

#[test]
fn constants_and_precedence() {
    let e = parse("-u^2 + 2*pi*v/4", &vars()).unwrap();
    let got = e.eval(&[3.0, 1.0]).unwrap();
    assert!((got - (-9.0 + std::f64::consts::FRAC_PI_2)).abs() < 1e-14);
}

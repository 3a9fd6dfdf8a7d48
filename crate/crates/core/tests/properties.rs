use proptest::prelude::*;

use omin_core::abel::AbelFunction;
use omin_core::census::{build_system, count_nonsingular_zeros, Params};
use omin_core::census::SquareSystem;
use omin_core::interval::{krawczyk_test, Verdict};
use omin_core::term::{
    eval, evaluate, fcpx, gradient, growth_exponent, interval_eval, parse_term, RaCatalog, Restricted, TermNode,
};
use omin_core::{Interval, IntervalBox};
use std::sync::OnceLock;

fn abel() -> &'static AbelFunction {
    static A: OnceLock<AbelFunction> = OnceLock::new();
    A.get_or_init(AbelFunction::default_build)
}

fn ra(name: &str, a: TermNode) -> TermNode {
    TermNode::ra(RaCatalog::default().lookup(name).unwrap(), a)
}

const VARS: [&str; 2] = ["x", "y"];

// Terms over two variables that stay defined and moderate on [-1, 1]^2.
fn term() -> impl Strategy<Value = TermNode> {
    let leaf = prop_oneof![
        (0usize..2).prop_map(TermNode::var),
        (-2.0f64..2.0).prop_map(|c| TermNode::cst((c * 100.0).round() / 100.0)),
    ];
    leaf.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| TermNode::add(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| TermNode::mul(a, b)),
            inner.clone().prop_map(TermNode::neg),
            inner.clone().prop_map(|a| TermNode::exp(ra("atan", a))),
            inner.clone().prop_map(|a| TermNode::log(TermNode::add(TermNode::cst(2.0), ra("atan", a)))),
            inner.clone().prop_map(TermNode::phi),
            inner.clone().prop_map(|a| ra("sin", ra("atan", a))),
        ]
    })
}

// Arbitrary trees for syntax-only properties; values may be undefined.
fn deep_term() -> impl Strategy<Value = TermNode> {
    let leaf = prop_oneof![
        (0usize..2).prop_map(TermNode::var),
        (-1e6f64..1e6).prop_map(TermNode::cst),
        (-1.0f64..1.0).prop_map(TermNode::cst),
    ];
    leaf.prop_recursive(8, 64, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| TermNode::add(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| TermNode::mul(a, b)),
            inner.clone().prop_map(TermNode::neg),
            inner.clone().prop_map(TermNode::exp),
            inner.clone().prop_map(TermNode::log),
            inner.clone().prop_map(TermNode::phi),
            inner.clone().prop_map(TermNode::dphi),
            inner.clone().prop_map(|a| ra("cos", a)),
        ]
    })
}

fn unit_box() -> impl Strategy<Value = (f64, f64, f64, f64)> {
    (-1.0f64..1.0, 0.0f64..0.5, -1.0f64..1.0, 0.0f64..0.5)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn printed_terms_parse_back(t in term(), x in -1.0f64..1.0, y in -1.0f64..1.0) {
        let text = t.display_with(&VARS.map(String::from)).to_string();
        let back = parse_term(&text, &VARS).unwrap();
        let (a, b) = (eval(&t, &[x, y], abel()).unwrap(), eval(&back, &[x, y], abel()).unwrap());
        prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()), "{text}: {a} vs {b}");
    }

    #[test]
    fn print_parse_is_structural_identity(t in deep_term()) {
        let text = t.display_with(&VARS.map(String::from)).to_string();
        prop_assert_eq!(parse_term(&text, &VARS).unwrap(), t);
    }

    #[test]
    fn fcpx_ignores_reassociation(a in deep_term(), b in deep_term(), c in deep_term()) {
        let left = TermNode::add(TermNode::add(a.clone(), b.clone()), c.clone());
        let right = TermNode::add(a.clone(), TermNode::add(b.clone(), c.clone()));
        prop_assert_eq!(fcpx(&left), fcpx(&right));
        let left = TermNode::mul(TermNode::mul(a.clone(), b.clone()), c.clone());
        let right = TermNode::mul(a, TermNode::mul(b, c));
        prop_assert_eq!(fcpx(&left), fcpx(&right));
    }

    #[test]
    fn growth_exponent_bounds_values(t in term(), r in 0.0f64..20.0, angle in 0.0f64..std::f64::consts::TAU) {
        let (x, y) = (r * angle.cos(), r * angle.sin());
        // Terms with no certified exponent, or a bound beyond f64, say nothing here.
        let Ok(s) = growth_exponent(&t) else { return Ok(()) };
        let bound = s.bound(x.hypot(y));
        // The bound covers the term's domain; restricted primitives leave it at large radii.
        if let (true, Ok(v)) = (bound.is_finite(), eval(&t, &[x, y], abel())) {
            prop_assert!(v.abs() <= bound, "{t}: |{v}| > {bound}");
        }
    }

    #[test]
    fn gradient_matches_central_differences(t in term(), x in -0.9f64..0.9, y in -0.9f64..0.9) {
        let g = gradient(&t, &[x, y], abel()).unwrap();
        let h = 1e-6;
        for i in 0..2 {
            let mut p = [x, y];
            let mut q = [x, y];
            p[i] += h;
            q[i] -= h;
            let fd = (eval(&t, &p, abel()).unwrap() - eval(&t, &q, abel()).unwrap()) / (2.0 * h);
            let scale = 1.0 + g[i].abs() + fd.abs();
            prop_assert!((g[i] - fd).abs() <= 1e-4 * scale, "d/d{i}: {} vs {fd}", g[i]);
        }
    }

    #[test]
    fn restricted_log_encloses_defined_points(lo in -2.0f64..1.0, w in 0.01f64..3.0, u in 0.0f64..=1.0) {
        let t = TermNode::log(TermNode::var(0));
        let x = Interval::new(lo, lo + w);
        let r = evaluate(&t, &[Restricted(x)], abel());
        let p = lo + u * w;
        match r {
            Ok(iv) if p > 0.0 => prop_assert!(iv.0.contains(p.ln())),
            Ok(_) => {}
            Err(e) => prop_assert!(e.is_total_domain() && lo + w <= 0.0),
        }
    }

    #[test]
    fn abel_equation_holds(x in -5.0f64..5.0) {
        let a = abel();
        let r = a.eval(x.exp()).unwrap() - a.eval(x).unwrap() - 1.0;
        prop_assert!(r.abs() <= 1e-8);
    }

    #[test]
    fn phi_is_increasing(x in -30.0f64..1e3, d in 1e-4f64..10.0) {
        let a = abel();
        let (p, q) = (a.eval(x).unwrap(), a.eval(x + d).unwrap());
        prop_assert!(p < q, "{x}: {p} !< {q}");
    }
}

fn parabola() -> SquareSystem {
    build_system(&["x"], &["x*x - 0.5"], &Params::zeros(1)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn krawczyk_verdicts_agree_with_roots(lo in -2.0f64..2.0, w in 1e-3f64..2.0) {
        let root = 0.5f64.sqrt();
        let bx = IntervalBox::from_bounds(&[(lo, lo + w)]);
        let inside = [-root, root].iter().filter(|r| bx.0[0].contains(**r)).count();
        let k = krawczyk_test(&parabola(), &bx, abel()).unwrap();
        match k.verdict {
            Verdict::NoZero => prop_assert_eq!(inside, 0),
            Verdict::UniqueZero => {
                prop_assert_eq!(inside, 1);
                let c = k.contracted.unwrap();
                prop_assert!(c.0[0].contains(root) || c.0[0].contains(-root));
            }
            Verdict::Unknown => {}
        }
    }

    #[test]
    fn shrinking_keeps_no_zero(lo in -2.0f64..2.0, w in 1e-3f64..2.0, a in 0.0f64..1.0, b in 0.0f64..1.0) {
        let bx = IntervalBox::from_bounds(&[(lo, lo + w)]);
        let (p, q) = (lo + w * a.min(b), lo + w * a.max(b));
        if q <= p || krawczyk_test(&parabola(), &bx, abel()).unwrap().verdict != Verdict::NoZero {
            return Ok(());
        }
        let sub = IntervalBox::from_bounds(&[(p, q)]);
        prop_assert_eq!(krawczyk_test(&parabola(), &sub, abel()).unwrap().verdict, Verdict::NoZero);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100_000))]

    #[test]
    fn enclosures_contain_point_values(t in term(), (x0, wx, y0, wy) in unit_box(), u in 0.0f64..=1.0, v in 0.0f64..=1.0) {
        let bx = IntervalBox::from_bounds(&[(x0, x0 + wx), (y0, y0 + wy)]);
        let iv = interval_eval(&t, &bx, abel()).unwrap();
        let val = eval(&t, &[x0 + u * wx, y0 + v * wy], abel()).unwrap();
        prop_assert!(iv.contains(val), "{val} outside {iv}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn counts_grow_with_radius(r1 in -1.5f64..1.5, gap in 0.05f64..1.0, small in 0.1f64..3.0, extra in 0.0f64..2.0) {
        let s = build_system(&["x"], &[format!("(x - {r1:e}) * (x - {:e})", r1 + gap).as_str()], &Params::zeros(1)).unwrap();
        let a = count_nonsingular_zeros(&s, small, 40, abel()).unwrap();
        let b = count_nonsingular_zeros(&s, small + extra, 40, abel()).unwrap();
        if a.exact && b.exact {
            prop_assert!(a.certified_count <= b.certified_count);
        }
    }

    #[test]
    fn quadratic_roots_are_counted(r1 in -1.5f64..1.5, gap in 0.05f64..1.0) {
        // (x - r1)(x - r1 - gap)
        let r2 = r1 + gap;
        let text = format!("(x - {r1:e}) * (x - {r2:e})");
        let s = build_system(&["x"], &[text.as_str()], &Params::zeros(1)).unwrap();
        let c = count_nonsingular_zeros(&s, 3.0, 40, abel()).unwrap();
        prop_assert!(c.exact);
        prop_assert_eq!(c.certified_count, 2);
        for z in &c.zeros {
            prop_assert!(z.0[0].contains(r1) || z.0[0].contains(r2), "{z:?}");
        }
    }
}

// Fixed corpus with phi-monomials; 100 interior points per term.
const GRADIENT_CORPUS: [&str; 20] = [
    "x*y",
    "exp(x) + y",
    "log(2 + x*x + y*y)",
    "sin(x) * cos(y)",
    "atan(x*y)",
    "phi(x)",
    "phi(x*x + y)",
    "phi(exp(x)) * y",
    "dphi(x + 3)",
    "phi(phi(x + 2) + y)",
    "x*x*x - 3*x*y",
    "exp(-x*x - y*y)",
    "log(3 + sin(x))",
    "phi(log(2 + y*y))",
    "dphi(2 + x*x) * exp(y)",
    "phi(x) + phi(y)",
    "phi(x*y + 5)",
    "atan(phi(x)) - y",
    "exp(phi(x) * y)",
    "phi(exp(exp(x)))",
];

#[test]
fn gradients_match_differences_on_corpus() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(20);
    for text in GRADIENT_CORPUS {
        let t = parse_term(text, &VARS).unwrap();
        for _ in 0..100 {
            let p = [rng.gen_range(-0.9..0.9), rng.gen_range(-0.9..0.9)];
            let g = gradient(&t, &p, abel()).unwrap();
            let h = 1e-6;
            for i in 0..2 {
                let (mut a, mut b) = (p, p);
                a[i] += h;
                b[i] -= h;
                let fd = (eval(&t, &a, abel()).unwrap() - eval(&t, &b, abel()).unwrap()) / (2.0 * h);
                let rel = (g[i] - fd).abs() / g[i].abs().max(1.0);
                assert!(rel <= 1e-5, "{text} at {p:?}, d{i}: {} vs {fd}", g[i]);
            }
        }
    }
}

use nalgebra::DMatrix;
use omin_core::abel::AbelFunction;
use omin_core::census::count_nonsingular_zeros;
use omin_core::morse::*;
use omin_core::term::{parse_term, TermNode};

fn formula(vars: &[&str], eq: &str) -> QFFormula {
    let t = parse_term(eq, vars).unwrap();
    normalize(&Formula::atom(t, Rel::Eq), vars.len())
}

fn bound(q: &QFFormula, radius: f64) -> ComponentReport {
    let abel = AbelFunction::default_build();
    let opts = PipelineOptions {
        oracle: true,
        ..Default::default()
    };
    let s = MilnorSchedule::for_radius(radius).unwrap();
    component_bound(q, &AffineSubspace::full(q.dim), radius, &s, 11, &opts, &abel).unwrap()
}

#[test]
fn circle_bound() {
    let r = bound(&formula(&["x", "y"], "x*x + y*y - 1"), 2.0);
    assert_eq!(r.critical_count, 4);
    assert_eq!(r.component_bound, 2);
    assert_eq!(r.oracle_components, Some(1));
    assert_eq!(r.component_bound, r.critical_count.div_ceil(2));
}

#[test]
fn same_seed_same_report() {
    let q = formula(&["x", "y"], "x*x + y*y - 1");
    let (a, b) = (bound(&q, 2.0), bound(&q, 2.0));
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
}

#[test]
fn two_points_tight() {
    let r = bound(&formula(&["x"], "x*x - 1"), 2.0);
    assert_eq!(r.critical_count, 4);
    assert_eq!(r.component_bound, 2);
    assert_eq!(r.oracle_components, Some(2));
}

#[test]
fn empty_set() {
    let r = bound(&formula(&["x", "y"], "x*x + y*y + 1"), 2.0);
    assert_eq!((r.critical_count, r.component_bound, r.oracle_components), (0, 0, Some(0)));
}

#[test]
fn rotation_does_not_change_count() {
    let abel = AbelFunction::default_build();
    let f = parse_term("x*x + y*y - 1", &["x", "y"]).unwrap();
    let (eps, delta) = (0.0025, 0.1);
    let plain = critical_system(&f, 2, eps, delta, &DMatrix::identity(2, 2)).unwrap();
    let q = DMatrix::from_row_slice(2, 2, &[0.6, -0.8, 0.8, 0.6]);
    let turned = critical_system(&f, 2, eps, delta, &q).unwrap();
    let a = count_nonsingular_zeros(&plain, 2.1, 40, &abel).unwrap();
    let b = count_nonsingular_zeros(&turned, 2.1, 40, &abel).unwrap();
    assert!(a.exact && b.exact);
    assert_eq!(a.certified_count, 4);
    assert_eq!(b.certified_count, 4);
}

#[test]
fn tube_is_compact() {
    let abel = AbelFunction::default_build();
    let f = parse_term("x*x + y*y - 1", &["x", "y"]).unwrap();
    let (eps, delta) = (0.0025, 0.1);
    let t = milnor_tube(&f, 2, eps, delta).unwrap();
    let r = delta / eps.sqrt() + 1e-9;
    let outside = [
        omin_core::IntervalBox::from_bounds(&[(r, 10.0), (-10.0, 10.0)]),
        omin_core::IntervalBox::from_bounds(&[(-10.0, -r), (-10.0, 10.0)]),
        omin_core::IntervalBox::from_bounds(&[(-10.0, 10.0), (r, 10.0)]),
    ];
    for b in outside {
        let v = omin_core::term::interval_eval(&t, &b, &abel).unwrap();
        assert!(v.lo > 0.0, "{b:?}: {v:?}");
    }
}

#[test]
fn schedule_nests() {
    let abel = AbelFunction::default_build();
    let f = parse_term("x*x + y*y - 1", &["x", "y"]).unwrap();
    let s = MilnorSchedule::for_radius(2.0).unwrap();
    assert_eq!(s.nesting_violations(&TermNode::square(f), 2, 10_000, 5, &abel).unwrap(), 0);
}

#[test]
fn gamma_on_circle_and_plane() {
    let abel = AbelFunction::default_build();
    let opts = PipelineOptions::default();
    let circle = formula(&["x", "y"], "x*x + y*y - 1");
    let g = gamma_estimate(&circle, 50, 2.0, 7, &opts, &abel).unwrap();
    assert_eq!(g.estimate, 2);
    assert!(g.within_bounds);
    let plane = formula(&["x", "y"], "0");
    let p = gamma_estimate(&plane, 20, 2.0, 7, &opts, &abel).unwrap();
    assert_eq!(p.estimate, 1);
    assert!(p.within_bounds);
}

use morrey_micropolar::bootstrap::{
    bootstrap_chain, ckn_monitor, exact_chain_length, hypothesis_check, omega_window, sigma, TheoremCylinders,
};
use morrey_micropolar::field::{Grid, SpaceTimeField};
use morrey_micropolar::morrey::{Cylinder, CylinderSamplingPlan, Event};
use morrey_micropolar::scalar::{decimal_rational, ExponentScalar};
use morrey_micropolar::solver::{simulate, SolverConfig};
use morrey_micropolar::Exact;
use std::f64::consts::PI;

fn r(n: i64, d: i64) -> Exact {
    Exact::ratio(n, d)
}

#[test]
fn chain_from_three_six_takes_twenty_one_steps() {
    let chain = bootstrap_chain(r(3, 1), r(6, 1)).unwrap();
    assert_eq!(chain.len(), 21);
    assert_eq!(chain.states[0].nu, r(29, 30));
    assert_eq!(chain.terminal().p, r(6, 1));
    // float oracle: smallest n with 3 (30/29)^n >= 6
    let n = (2f64.ln() / (30.0f64 / 29.0).ln()).ceil() as usize;
    assert_eq!(n, 21);
    assert!(3.0 * (30.0f64 / 29.0).powi(20) < 6.0);
    // strictly increasing, clamped only at the end
    for w in chain.states.windows(2) {
        assert!(w[0].p < w[1].p);
    }
    assert!(chain.states[20].p < r(6, 1));
    assert_eq!(chain.states[1].p, r(90, 29));
    assert_eq!(chain.states[1].p, sigma(&r(3, 1), &r(6, 1)));
}

#[test]
fn short_and_empty_chains() {
    let p0 = decimal_rational(5.9).unwrap();
    let chain = bootstrap_chain(p0, r(6, 1)).unwrap();
    assert_eq!(chain.len(), 1);
    assert!((5.9f64 * 30.0 / 29.0 - 6.103).abs() < 1e-3);
    let chain = bootstrap_chain(r(6, 1), r(6, 1)).unwrap();
    assert!(chain.is_empty());
    let chain = bootstrap_chain(5.5f64, 5.5).unwrap();
    assert!(chain.is_empty());
}

#[test]
fn domain_violations_name_the_bound() {
    let msg = |p: f64, q: f64| bootstrap_chain(p, q).unwrap_err().to_string();
    assert!(msg(2.0, 6.0).contains("2 < p0"));
    assert!(msg(4.5, 5.0).contains("5 < q0"));
    assert!(msg(6.5, 6.0).contains("p0 <= q0"));
    assert!(msg(3.0, 6.5).contains("q0 <= 6"));
}

#[test]
fn microrotation_window_values() {
    let w = omega_window(r(6, 1)).unwrap();
    assert_eq!(w.q1, r(15, 7));
    assert_eq!(w.i2.nu, r(1, 7));
    assert_eq!(w.i2.target, r(15, 1));
    assert_eq!(w.window, (r(10, 3), r(15, 4)));
    let w = omega_window(r(11, 2)).unwrap();
    assert_eq!(w.q1, r(110, 53));
    assert!((w.q1.to_f64_value() - 2.0755).abs() < 1e-4);
    // q0 -> 5+: 1/5 + 3/10 = 1/2
    let w = omega_window(5.0 + 1e-9).unwrap();
    assert!(w.q1 > 2.0 && w.q1 - 2.0 < 1e-8);
    assert!(omega_window(5.0f64).is_err());
    assert!(omega_window(6.5f64).is_err());
}

fn grid() -> Grid {
    Grid::new(2.0 * PI, 32, 1.0, 101).unwrap()
}

fn wide_cylinders() -> TheoremCylinders {
    TheoremCylinders {
        q: Cylinder::new(0.05, 0.95, [PI; 3], 3.0).unwrap(),
        q1: Cylinder::new(0.2, 0.8, [PI; 3], 2.0).unwrap(),
        q2: Cylinder::new(0.3, 0.7, [PI; 3], 1.5).unwrap(),
    }
}

fn plan(r_max: f64) -> CylinderSamplingPlan {
    CylinderSamplingPlan {
        r_min: r_max,
        r_max,
        stride_x: 2,
        stride_t: 5,
    }
}

#[test]
fn hypothesis_of_zero_fields_is_zero() {
    let g = grid();
    let z = SpaceTimeField::zeros(g, 3);
    let rep = hypothesis_check(&z, &z, &wide_cylinders(), 3.0, 6.0, &plan(0.6)).unwrap();
    assert_eq!(rep.hypothesis_norm, 0.0);
    assert_eq!(rep.velocity_conclusion, 0.0);
    assert_eq!(rep.rotation_conclusion, 0.0);
    assert!(rep.all_finite);
}

#[test]
fn hypothesis_of_constant_fields_matches_hand_quadrature() {
    let g = grid();
    let u = SpaceTimeField::from_fn(g, 3, |_, _| [1.0, 2.0, 2.0]);
    let w = SpaceTimeField::from_fn(g, 3, |_, _| [0.0, 0.5, 0.0]);
    let cyl = wide_cylinders();
    let rep = hypothesis_check(&u, &w, &cyl, 3.0, 6.0, &plan(0.6)).unwrap();
    let vol = |c: &Cylinder| (c.t_end - c.t_start) * 4.0 / 3.0 * PI * c.radius.powi(3);
    // |u| = 3; every plan cylinder of radius 0.6 centred deep in Q lies inside it
    let want = 3.0 * (8.0 * PI / 3.0).powf(1.0 / 3.0) * 0.6f64.powf(5.0 / 6.0);
    assert!((rep.hypothesis_norm / want - 1.0).abs() < 0.02, "{} vs {want}", rep.hypothesis_norm);
    let want = 3.0 * vol(&cyl.q1).powf(1.0 / 6.0);
    assert!((rep.velocity_conclusion / want - 1.0).abs() < 0.02);
    let want = 0.5 * vol(&cyl.q2).powf(1.0 / 6.0);
    assert!((rep.rotation_conclusion / want - 1.0).abs() < 0.02);
    let want = 0.5 * vol(&cyl.q2).powf(4.0 / 15.0);
    assert!((rep.rotation_window_norm / want - 1.0).abs() < 0.02);
}

#[test]
fn broken_nesting_is_rejected() {
    let g = Grid::new(2.0 * PI, 16, 1.0, 11).unwrap();
    let z = SpaceTimeField::zeros(g, 3);
    let mut cyl = wide_cylinders();
    cyl.q2.radius = 2.5;
    assert!(hypothesis_check(&z, &z, &cyl, 3.0, 6.0, &plan(0.6)).is_err());
    let mut cyl = wide_cylinders();
    cyl.q.t_start = 0.0;
    assert!(cyl.validate(g.l).is_err());
    assert!(TheoremCylinders::default_for(g.l).validate(g.l).is_ok());
}

#[test]
fn monitor_of_zero_fields_is_zero() {
    let g = Grid::new(2.0 * PI, 16, 1.0, 11).unwrap();
    let z = SpaceTimeField::zeros(g, 3);
    let s = ckn_monitor(&z, &z, Event { t: 0.5, x: [PI; 3] }, &[0.3, 0.5]).unwrap();
    assert!(s.entries.iter().all(|e| e.value == 0.0));
    assert_eq!(s.entries[0].r, 0.5);
    assert!(s.slope.is_none());
}

#[test]
fn monitor_of_single_mode_is_exact() {
    let g = Grid::new(2.0 * PI, 16, 1.0, 11).unwrap();
    let u = SpaceTimeField::from_fn(g, 3, |_, x| [0.0, 0.0, x[0].sin()]);
    let z = SpaceTimeField::zeros(g, 3);
    let radii = [0.7, 0.4, 0.1, 0.05];
    let s = ckn_monitor(&u, &z, Event { t: 0.5, x: [0.0; 3] }, &radii).unwrap();
    for e in &s.entries {
        let rad = e.r;
        // |grad u|^2 = cos^2 x; integrate over the ball by disk slices x = const
        let m = 20000;
        let h = 2.0 * rad / m as f64;
        let ball: f64 = (0..m)
            .map(|i| {
                let x = -rad + (i as f64 + 0.5) * h;
                x.cos().powi(2) * PI * (rad * rad - x * x) * h
            })
            .sum();
        let want = 2.0 * rad * rad * ball / rad;
        assert!((e.value / want - 1.0).abs() < 1e-6, "r = {rad}: {} vs {want}", e.value);
    }
    // constant gradient limit (8 pi / 3) |G|^2 r^4 with |G| = 1 at the origin
    let small = s.entries.last().unwrap();
    assert!((small.value / (8.0 * PI / 3.0 * small.r.powi(4)) - 1.0).abs() < 1e-2);
    let slope = s.slope.unwrap();
    assert!((slope - 4.0).abs() < 0.05, "{slope}");
    assert_eq!(s.crossing(f64::INFINITY), Some(0.7));
    assert_eq!(s.crossing(0.0), None);
}

#[test]
fn monitor_rejects_radii_outside_history() {
    let g = Grid::new(2.0 * PI, 16, 1.0, 11).unwrap();
    let z = SpaceTimeField::zeros(g, 3);
    assert!(ckn_monitor(&z, &z, Event { t: 0.1, x: [PI; 3] }, &[0.5]).is_err());
    assert!(ckn_monitor(&z, &z, Event { t: 0.5, x: [PI; 3] }, &[-0.5]).is_err());
    assert!(ckn_monitor(&z, &z, Event { t: 0.5, x: [PI; 3] }, &[]).is_err());
}

#[test]
fn monitor_slope_for_simulated_solution() {
    let cfg = SolverConfig {
        grid: Grid::new(2.0 * PI, 16, 1.0, 33).unwrap(),
        ..SolverConfig::default()
    };
    let h = simulate(&cfg).unwrap().history.unwrap();
    let s = ckn_monitor(&h.u, &h.omega, Event { t: 0.5, x: [PI; 3] }, &[0.6, 0.45, 0.3, 0.2, 0.15]).unwrap();
    let slope = s.slope.unwrap();
    assert!((3.5..=4.5).contains(&slope), "{slope}");
    for w in s.entries.windows(2) {
        assert!(w[0].r > w[1].r);
    }
}

mod properties {
    use super::*;
    use morrey_micropolar::riesz::exponents::gain_factor;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn chain_length_matches_closed_form(pn in 21i64..60, qn in 51i64..=60) {
            prop_assume!(pn <= qn);
            let (p0, q0) = (r(pn, 10), r(qn, 10));
            let chain = bootstrap_chain(p0.clone(), q0.clone()).unwrap();
            prop_assert_eq!(chain.len() as u64, exact_chain_length(&p0, &q0));
            let f = ((q0.to_f64_value() / p0.to_f64_value()).ln() / (1.0 / gain_factor(&q0).to_f64_value()).ln()).ceil();
            prop_assert_eq!(chain.len(), f.max(0.0) as usize);
            for w in chain.states.windows(2) {
                prop_assert!(w[0].p < w[1].p);
            }
        }

        #[test]
        fn gain_factor_and_sigma(qn in 5001i64..=6000, pn in 2001i64..6000) {
            let q = r(qn, 1000);
            let p = r(pn, 1000);
            let nu = gain_factor(&q);
            prop_assert!(nu > r(0, 1) && nu < r(1, 1));
            if p < q {
                prop_assert!(sigma(&p, &q) > p);
            }
        }

        #[test]
        fn window_q1_range(qn in 5001i64..=6000) {
            let w = omega_window(r(qn, 1000)).unwrap();
            prop_assert!(w.q1 > r(2, 1) && w.q1 <= r(15, 7));
        }
    }
}

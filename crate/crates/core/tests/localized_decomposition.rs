use morrey_micropolar::field::random::SmoothRandomField;
use morrey_micropolar::field::{FieldHistory, FrozenField, Grid, SpaceTimeField, SpectralContext, SpectralSnapshot};
use morrey_micropolar::localize::{
    assemble_r, check_omega_window, convective_q1, decompose_u, decompose_w, duhamel, evolution_residual,
    expand_u1_terms, expand_w1a_terms, expand_w1b_terms, expand_w1c_terms, make_bumps, verify_convective_identity,
    verify_rot_identity, BumpFamily, Deriv, DuhamelStepper, ExpansionOptions, FlowFields, Modulated,
    NestedCylinders, RGroup, DEFAULT_ORDER,
};
use morrey_micropolar::morrey::{Cylinder, CylinderSamplingPlan, MorreyParams};
use morrey_micropolar::Error;
use num_complex::Complex64;
use std::f64::consts::PI;

const L: f64 = 2.0 * PI;

fn grid(nx: usize, nt: usize) -> Grid {
    Grid::new(L, nx, 1.0, nt).unwrap()
}

fn velocity_bumps() -> BumpFamily {
    make_bumps(&NestedCylinders::velocity_default(L), DEFAULT_ORDER).unwrap()
}

fn rotation_bumps() -> BumpFamily {
    make_bumps(&NestedCylinders::rotation_default(L), DEFAULT_ORDER).unwrap()
}

fn random(g: &Grid, solenoidal: bool, seed: u64) -> SpaceTimeField {
    SmoothRandomField::new(g, 3, 4, solenoidal, seed).sample(g)
}

#[test]
fn bump_plateaus_supports_and_product() {
    let b = velocity_bumps();
    let g = grid(16, 33);
    assert_eq!(b.product_defect(&g), 0.0);
    let c = [L / 2.0; 3];
    // inside Q_1: phi = 1; outside Q: psi = 0
    assert_eq!(b.small.value(0.5, [c[0] + 0.44, c[1], c[2]], L), 1.0);
    assert_eq!(b.big.value(0.5, [c[0] + 0.76, c[1], c[2]], L), 0.0);
    assert_eq!(b.big.value(0.099, c, L), 0.0);
    for i in (0..g.points()).step_by(5) {
        assert_eq!(b.big.value(0.0, g.position(i), L), 0.0);
    }
    let w = rotation_bumps();
    assert_eq!(w.product_defect(&g), 0.0);
    b.check_grid(&g).unwrap();
}

#[test]
fn bump_nesting_is_enforced() {
    let mut spec = NestedCylinders::velocity_default(L);
    spec.mid.radius = spec.outer.radius;
    assert!(matches!(make_bumps(&spec, 3), Err(Error::Geometry(_))));
    let mut spec = NestedCylinders::velocity_default(L);
    spec.outer.t_start = 0.0;
    assert!(matches!(make_bumps(&spec, 3), Err(Error::Geometry(_))));
    let mut spec = NestedCylinders::velocity_default(L);
    spec.inner.center[0] += 0.01;
    assert!(make_bumps(&spec, 3).is_err());
    assert!(make_bumps(&NestedCylinders::velocity_default(L), 1).is_err());
}

#[test]
fn cutoff_second_differences_are_bounded() {
    let b = velocity_bumps();
    let c = L / 2.0;
    let h = 1e-3;
    let mut worst: f64 = 0.0;
    for k in 0..400 {
        let x = c + 0.4 + 0.4 * k as f64 / 400.0;
        let f = |x: f64| b.big.value(0.5, [x, c, c], L);
        worst = worst.max(((f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h)).abs());
    }
    assert!(worst.is_finite() && worst < 1e3);
}

/// Band-limited mode `sin(k.x + t)` in each component, evaluated anywhere.
fn mode_value(x: [f64; 3], t: f64) -> [f64; 3] {
    let a = 2.0 * x[0] - x[1] + 3.0 * x[2] + t;
    let b = x[0] + 2.0 * x[1] - x[2];
    [a.sin(), b.cos(), (a - b).sin()]
}

#[test]
fn modulated_derivatives_match_finite_differences() {
    let g = grid(32, 9);
    let b = velocity_bumps();
    let ctx = SpectralContext::get(g.nx, g.l);
    let n = 4;
    let t = g.time(n);
    let real = SpaceTimeField::from_fn(g, 3, |t, x| mode_value(x, t));
    let f = SpectralSnapshot::from_real(&ctx, 3, real.slice(n));
    let sampler = b.big.sampler(&g);
    let product = |x: [f64; 3]| {
        let v = mode_value(x, t);
        let psi = b.big.value(t, x, L);
        [psi * v[0], psi * v[1], psi * v[2]]
    };
    let eps = 1e-5;
    let d = |x: [f64; 3], axis: usize, comp: usize| {
        let mut p = x;
        let mut m = x;
        p[axis] += eps;
        m[axis] -= eps;
        (product(p)[comp] - product(m)[comp]) / (2.0 * eps)
    };
    let curl = Modulated::new(f.clone()).curl().unwrap().materialize(&sampler, n).unwrap();
    let div = Modulated::new(f.clone()).divergence().unwrap().materialize(&sampler, n).unwrap();
    let lap = Modulated::new(f).laplacian().unwrap().materialize(&sampler, n).unwrap();
    let p = g.points();
    let mut checked = 0;
    for i in 0..p {
        let x = g.position(i);
        let r = b.big.value(t, x, L);
        if r == 0.0 || r == 1.0 {
            continue;
        }
        let want_curl = [d(x, 1, 2) - d(x, 2, 1), d(x, 2, 0) - d(x, 0, 2), d(x, 0, 1) - d(x, 1, 0)];
        for c in 0..3 {
            assert!((curl[c * p + i] - want_curl[c]).abs() < 1e-5, "curl at {i}");
        }
        let want_div = d(x, 0, 0) + d(x, 1, 1) + d(x, 2, 2);
        assert!((div[i] - want_div).abs() < 1e-5);
        let e2 = 1e-3;
        for c in 0..3 {
            let mut want = 0.0;
            for a in 0..3 {
                let (mut xp, mut xm) = (x, x);
                xp[a] += e2;
                xm[a] -= e2;
                want += (product(xp)[c] - 2.0 * product(x)[c] + product(xm)[c]) / (e2 * e2);
            }
            assert!((lap[c * p + i] - want).abs() < 1e-2 * (1.0 + want.abs()), "lap {c} at {i}");
        }
        checked += 1;
    }
    assert!(checked > 10);
    let too_deep = Modulated::with_deriv(Deriv::space([2, 1, 0]), SpectralSnapshot::zeros(&ctx, 3));
    assert!(matches!(too_deep.partial(0).and_then(|m| m.partial(0)), Err(Error::CutoffOrder(_))));
}

fn single_mode(ctx: &std::sync::Arc<SpectralContext>, c: Complex64) -> SpectralSnapshot {
    let mut s = SpectralSnapshot::zeros(ctx, 1);
    // mode k = (1, 2, 0)
    let n = ctx.n();
    s.coefficients_mut()[2 * n + 1] = c;
    s
}

#[test]
fn duhamel_of_constant_mode_matches_closed_form() {
    let g = grid(8, 41);
    let ctx = SpectralContext::get(g.nx, g.l);
    let c = Complex64::new(0.7, -0.2);
    let sources = vec![single_mode(&ctx, c); g.nt];
    let out = duhamel(&sources, g.dt(), 1.0).unwrap();
    let k2 = 5.0;
    let n = ctx.n();
    for (i, d) in out.iter().enumerate() {
        let t = g.time(i);
        let want = c * (1.0 - (-k2 * t).exp()) / k2;
        assert!((d.coefficients()[2 * n + 1] - want).norm() < 1e-6);
    }
    // zero source
    let z = duhamel(&vec![SpectralSnapshot::zeros(&ctx, 1); 5], 0.1, 2.0).unwrap();
    assert!(z.iter().all(|s| s.coefficients().iter().all(|v| v.norm() == 0.0)));
}

#[test]
fn duhamel_converges_at_second_order() {
    let ctx = SpectralContext::get(8, L);
    let k2 = 5.0;
    let lam = 2.0 * k2;
    let exact = |t: f64| (lam * (3.0 * t).sin() - 3.0 * (3.0 * t).cos() + 3.0 * (-lam * t).exp()) / (lam * lam + 9.0);
    let error = |nt: usize| {
        let g = grid(8, nt);
        let mut st = DuhamelStepper::new(&ctx, g.dt(), 2.0).unwrap();
        let mut worst: f64 = 0.0;
        for i in 0..nt {
            let t = g.time(i);
            let d = st.push(single_mode(&ctx, Complex64::new((3.0 * t).sin(), 0.0))).unwrap();
            worst = worst.max((d.coefficients()[2 * 8 + 1].re - exact(t)).abs());
        }
        worst
    };
    let (e1, e2) = (error(11), error(21));
    assert!(e1 / e2 >= 3.5, "ratio {}", e1 / e2);
    assert!(DuhamelStepper::new(&ctx, -0.1, 1.0).is_err());
}

#[test]
fn rotational_identity_holds() {
    let g = grid(16, 9);
    let b = velocity_bumps();
    let zero = SpaceTimeField::zeros(g, 3);
    assert_eq!(verify_rot_identity(&zero, &b).unwrap().max_abs, 0.0);
    for seed in 0..3 {
        let u = random(&g, true, seed);
        let r = verify_rot_identity(&u, &b).unwrap();
        assert!(r.relative <= 1e-8, "seed {seed}: {r:?}");
        assert!(r.scale > 0.0);
    }
    // a pure gradient activates the grad-div term
    let ctx = SpectralContext::get(g.nx, g.l);
    let pot = SmoothRandomField::new(&g, 1, 4, false, 9);
    let grad = SpaceTimeField::from_slices(g, 3, |n| pot.at(g.time(n)).gradient().unwrap().to_real());
    assert!(SpectralSnapshot::from_real(&ctx, 3, grad.slice(4)).max_divergence().unwrap() > 1e-3);
    let r = verify_rot_identity(&grad, &b).unwrap();
    assert!(r.relative <= 1e-8, "{r:?}");
}

#[test]
fn convective_identity_holds() {
    let g = grid(16, 5);
    let b = velocity_bumps();
    let zero = SpaceTimeField::zeros(g, 3);
    assert_eq!(verify_convective_identity(&zero, &zero, &b.big).unwrap().max_abs, 0.0);
    for seed in 0..3 {
        let u = random(&g, true, 10 + seed);
        let v = random(&g, true, 20 + seed);
        let r = verify_convective_identity(&u, &v, &b.big).unwrap();
        assert!(r.relative <= 1e-8, "{r:?}");
    }
    let bad = random(&g, false, 4);
    assert!(matches!(
        verify_convective_identity(&bad, &zero, &b.big),
        Err(Error::NotSolenoidal { .. })
    ));
}

#[test]
fn convective_identity_on_plateau_is_the_plain_curl() {
    // a wide cutoff equal to one on the whole box
    let g = Grid::new(1.0, 8, 1.0, 3).unwrap();
    let wide = Cylinder::new(0.0, 2.0, [0.5; 3], 1.0).unwrap();
    let wider = Cylinder::new(-1.0, 3.0, [0.5; 3], 2.0).unwrap();
    let psi = morrey_micropolar::localize::Cutoff::between(&wide, &wider, 3).unwrap();
    let u = random(&g, true, 1);
    let r = verify_convective_identity(&u, &u, &psi).unwrap();
    assert!(r.relative <= 1e-8);
}

#[test]
fn velocity_split_is_resolution_limited() {
    let b = velocity_bumps();
    let g = grid(16, 5);
    let zero = decompose_u(&SpaceTimeField::zeros(g, 3), &b).unwrap();
    assert!(zero.u1.is_zero() && zero.u2.is_zero() && zero.u3.is_zero() && zero.u_local.is_zero());

    // the split reproduces phi u up to the torus mean and aliasing of the
    // non-band-limited product; both shrink as the grid is refined
    let corrected = |nx: usize| {
        let g = grid(nx, 5);
        let u = SmoothRandomField::new(&g, 3, 3, true, 5).sample(&g);
        let d = decompose_u(&u, &b).unwrap();
        assert!(d.summary.residual.relative.is_finite());
        d.summary.mean_corrected.relative
    };
    let coarse = corrected(16);
    let fine = corrected(32);
    assert!(fine < coarse, "{fine} vs {coarse}");
}

#[test]
fn velocity_split_vanishes_away_from_the_cylinder() {
    let b = velocity_bumps();
    let g = grid(16, 9);
    // support in the corner of the box, far from the centred cylinders
    let u = SpaceTimeField::from_fn(g, 3, |_, x| {
        let d = (x[0] - 0.5).powi(2) + (x[1] - 0.5).powi(2) + (x[2] - 0.5).powi(2);
        let v = if d < 0.25 { (0.25 - d).powi(4) } else { 0.0 };
        [v, -v, 0.0]
    });
    let d = decompose_u(&u, &b).unwrap();
    // U = phi u vanishes; the parts carrying derivatives of phi vanish too
    assert!(d.u_local.is_zero());
    assert!(d.u2.is_zero() && d.u3.is_zero(), "{} {}", d.u2.max_abs(), d.u3.max_abs());
}

struct Flow {
    u: SpaceTimeField,
    omega: SpaceTimeField,
    a: FrozenField,
    f: SpaceTimeField,
}

impl Flow {
    fn fields(&self) -> FlowFields<'_> {
        FlowFields {
            u: &self.u,
            omega: &self.omega,
            a: &self.a,
            f: &self.f,
        }
    }
}

/// Manufactured solution: `f` is chosen so that `u`, `omega` satisfy the
/// velocity equation exactly at every slice.
fn manufactured(g: &Grid, with_drift: bool) -> Flow {
    let ctx = SpectralContext::get(g.nx, g.l);
    let u = SmoothRandomField::new(g, 3, 3, true, 31);
    let omega = SmoothRandomField::new(g, 3, 3, false, 32);
    let a_snap = SmoothRandomField::new(g, 3, 3, true, 33).at(0.3);
    let a_snap = if with_drift { a_snap } else { SpectralSnapshot::zeros(&ctx, 3) };
    let f = SpaceTimeField::from_slices(*g, 3, |n| {
        let t = g.time(n);
        let s = u.at(t);
        let mut rhs = u.time_derivative(t);
        rhs.add_scaled(&s.laplacian(), -1.0);
        rhs.add_scaled(&SpectralSnapshot::convect(&s, &s), 1.0);
        rhs.add_scaled(&omega.at(t).curl().unwrap(), -0.5);
        rhs.add_scaled(&SpectralSnapshot::convect(&a_snap, &s), -1.0);
        rhs.add_scaled(&SpectralSnapshot::convect(&s, &a_snap), -1.0);
        rhs.leray_project().unwrap().to_real()
    });
    Flow {
        u: u.sample(g),
        omega: omega.sample(g),
        a: FrozenField::new(*g, 3, a_snap.to_real()),
        f,
    }
}

#[test]
fn evolution_residual_is_second_order() {
    let b = velocity_bumps();
    let coarse = manufactured(&grid(12, 129), true);
    let fine = manufactured(&grid(12, 257), true);
    let rc = evolution_residual(&coarse.fields(), &b).unwrap();
    let rf = evolution_residual(&fine.fields(), &b).unwrap();
    assert!(rc.max_abs / rf.max_abs >= 3.5, "{} / {}", rc.max_abs, rf.max_abs);
}

#[test]
fn r_groups_vanish_with_their_factors() {
    let b = velocity_bumps();
    let g = grid(12, 17);
    let flow = manufactured(&g, false);
    for (group, field) in assemble_r(&flow.fields(), &b).unwrap() {
        match group {
            RGroup::DriftVelocity | RGroup::VelocityDrift => assert!(field.is_zero()),
            _ => assert!(!field.is_zero(), "{group:?}"),
        }
    }
    let z = SpaceTimeField::zeros(g, 3);
    let za = FrozenField::zeros(g, 3);
    let zero = FlowFields { u: &z, omega: &z, a: &za, f: &z };
    assert!(assemble_r(&zero, &b).unwrap().iter().all(|(_, f)| f.is_zero()));
    let bad = random(&g, false, 3);
    let broken = FlowFields { u: &bad, omega: &z, a: &za, f: &z };
    assert!(matches!(assemble_r(&broken, &b), Err(Error::NotSolenoidal { .. })));
}

fn options(p: f64, q: f64, g: &Grid) -> ExpansionOptions {
    ExpansionOptions {
        norm: Some((MorreyParams::new(p, q).unwrap(), CylinderSamplingPlan::default_for(g))),
        keep_fields: false,
    }
}

#[test]
fn sixteen_terms_sum_to_the_direct_pipeline() {
    let b = velocity_bumps();
    let g = grid(12, 33);
    let flow = manufactured(&g, true);
    let rep = expand_u1_terms(&flow.fields(), &b, &options(90.0 / 29.0, 6.0, &g)).unwrap();
    assert_eq!(rep.terms.len(), 16);
    assert!(rep.relative_residual <= 1e-7, "{}", rep.relative_residual);
    assert!(rep.all_finite());
    assert!(rep.terms.iter().all(|t| t.morrey_norm.unwrap() > 0.0));

    let no_drift = manufactured(&g, false);
    let rep = expand_u1_terms(&no_drift.fields(), &b, &ExpansionOptions::default()).unwrap();
    for t in &rep.terms {
        assert_eq!(t.max_abs == 0.0, t.index >= 9, "term {}", t.index);
    }
    assert!(rep.relative_residual <= 1e-7);
}

#[test]
fn sixteen_terms_vanish_on_zero_input() {
    let b = velocity_bumps();
    let g = grid(8, 9);
    let z = SpaceTimeField::zeros(g, 3);
    let za = FrozenField::zeros(g, 3);
    let rep = expand_u1_terms(&FlowFields { u: &z, omega: &z, a: &za, f: &z }, &b, &ExpansionOptions::default())
        .unwrap();
    assert!(rep.terms.iter().all(|t| t.max_abs == 0.0));
    assert_eq!(rep.relative_residual, 0.0);
}

#[test]
fn rotation_split_identities() {
    let b = rotation_bumps();
    let g = grid(24, 33);
    let omega = random(&g, false, 41);
    let d = decompose_w(&omega, &b).unwrap();
    assert!(d.split.relative <= 1e-8, "{:?}", d.split);
    assert!(d.reconstruction.mean_corrected.relative.is_finite());
    // curl-free omega: the rotational part vanishes
    let pot = SmoothRandomField::new(&g, 1, 4, false, 42);
    let grad = SpaceTimeField::from_slices(g, 3, |n| pot.at(g.time(n)).gradient().unwrap().to_real());
    let d = decompose_w(&grad, &b).unwrap();
    assert!(d.w1a.max_abs() <= 1e-10 * d.w1.max_abs(), "{} vs {}", d.w1a.max_abs(), d.w1.max_abs());
    assert!(d.split.relative <= 1e-8);
    let zero = decompose_w(&SpaceTimeField::zeros(g, 3), &b).unwrap();
    assert!(zero.w1.is_zero() && zero.w1a.is_zero() && zero.w_local.is_zero());
}

#[test]
fn rotation_expansions_sum_to_their_pipelines() {
    // the rotation cutoffs have radii below 0.5 and need h < 0.3
    let b = rotation_bumps();
    let g = grid(24, 33);
    let flow = manufactured(&g, false);
    let opts = options(3.75, 3.75, &g);
    let a = expand_w1a_terms(&flow.u, &flow.omega, &b, &opts).unwrap();
    assert_eq!(a.terms.len(), 8);
    assert!(a.relative_residual <= 1e-7, "{}", a.relative_residual);
    assert!(a.all_finite());
    let bb = expand_w1b_terms(&flow.u, &flow.omega, &b, &opts).unwrap();
    assert!(bb.relative_residual <= 1e-7, "{}", bb.relative_residual);
    assert!(bb.all_finite());
    let c = expand_w1c_terms(&flow.omega, &b, &opts).unwrap();
    assert!(c.relative_residual <= 1e-8, "{}", c.relative_residual);

    // no velocity: the convective pieces vanish
    let z = SpaceTimeField::zeros(g, 3);
    let bb = expand_w1b_terms(&z, &flow.omega, &b, &ExpansionOptions::default()).unwrap();
    for t in &bb.terms {
        assert_eq!(t.max_abs == 0.0, t.index >= 3, "term {}", t.index);
    }
    let a = expand_w1a_terms(&z, &z, &b, &ExpansionOptions::default()).unwrap();
    assert!(a.terms.iter().all(|t| t.max_abs == 0.0));
}

#[test]
fn commutator_split_of_constant_omega() {
    let b = rotation_bumps();
    let g = grid(24, 17);
    let omega = SpaceTimeField::from_fn(g, 3, |_, _| [0.3, -1.0, 2.0]);
    let c = expand_w1c_terms(&omega, &b, &ExpansionOptions::default()).unwrap();
    // div omega = 0, so the two pieces cancel exactly
    assert!(c.direct_max_abs <= 1e-12 * c.terms[0].max_abs);
    assert!(c.terms[0].max_abs > 0.0);
    assert!(c.sum_max_abs <= 1e-10 * c.terms[0].max_abs, "{}", c.sum_max_abs);
}

#[test]
fn rotation_window_and_product_exponent() {
    assert!(check_omega_window(3.5, 3.75).is_ok());
    assert!(check_omega_window(3.3, 3.75).is_err());
    assert!(check_omega_window(3.5, 4.0).is_err());
    let q1 = convective_q1(6.0);
    assert!((q1 - 15.0 / 7.0).abs() < 1e-14);
    let nu1 = 1.0 - 2.0 * q1 / 5.0;
    assert!((nu1 - 1.0 / 7.0).abs() < 1e-14);
    assert!((q1 / nu1 - 15.0).abs() < 1e-12);
    let b = rotation_bumps();
    let g = grid(8, 9);
    let z = SpaceTimeField::zeros(g, 3);
    let bad = expand_w1a_terms(&z, &z, &b, &options(3.0, 3.5, &g));
    assert!(matches!(bad, Err(Error::Exponent(_))));
}

#[test]
fn flow_fields_check_grids() {
    let g = grid(8, 5);
    let z = SpaceTimeField::zeros(g, 3);
    let other = SpaceTimeField::zeros(grid(8, 7), 3);
    let za = FrozenField::zeros(g, 3);
    let flow = FlowFields { u: &z, omega: &other, a: &za, f: &z };
    assert!(matches!(flow.validate(), Err(Error::Shape(_))));
    let _ = z.spectral_slice(0);
}

mod properties {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(8))]

        #[test]
        fn identities_hold_for_any_seed(seed in 0u64..10_000) {
            let g = grid(12, 5);
            let b = velocity_bumps();
            let u = random(&g, true, seed);
            let v = random(&g, true, seed + 1);
            prop_assert!(verify_rot_identity(&u, &b).unwrap().relative <= 1e-8);
            prop_assert!(verify_convective_identity(&u, &v, &b.big).unwrap().relative <= 1e-8);
        }

        #[test]
        fn cutoff_products_are_exact(dr in 0.01f64..0.3, dt in 0.01f64..0.05) {
            let l = L;
            let c = [l / 2.0; 3];
            let spec = NestedCylinders {
                outer: Cylinder::new(0.1, 0.9, c, 0.5 + 2.0 * dr).unwrap(),
                mid: Cylinder::new(0.1 + dt, 0.9 - dt, c, 0.5 + dr).unwrap(),
                inner: Cylinder::new(0.1 + 2.0 * dt, 0.9 - 2.0 * dt, c, 0.5).unwrap(),
            };
            let b = make_bumps(&spec, DEFAULT_ORDER).unwrap();
            prop_assert_eq!(b.product_defect(&grid(16, 17)), 0.0);
        }
    }
}

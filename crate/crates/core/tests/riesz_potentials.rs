use morrey_micropolar::field::{Grid, SpaceTimeField};
use morrey_micropolar::morrey::{
    morrey_norm, parabolic_rescale, quasi_distance, CylinderSamplingPlan, Event, MorreyParams, ParabolicCylinder,
};
use morrey_micropolar::riesz::{
    adams_hedberg_check, adams_hedberg_ratio, corollary_i1_exponents, corollary_i2_exponents, gain_factor,
    riesz_apply, riesz_apply_masked, RieszOrder,
};
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

fn grid() -> Grid {
    Grid::new(2.0 * PI, 16, 1.0, 17).unwrap()
}

fn bump(grid: Grid, center: [f64; 3], t0: f64, rad: f64, tau: f64, amp: f64) -> SpaceTimeField {
    SpaceTimeField::from_fn(grid, 1, move |t, x| {
        let d2: f64 = (0..3).map(|i| (x[i] - center[i]).powi(2)).sum::<f64>() / (rad * rad)
            + ((t - t0) / tau).powi(2);
        let v = if d2 < 1.0 { amp * (1.0 - d2).powi(3) } else { 0.0 };
        [v, 0.0, 0.0]
    })
}

#[test]
fn impulse_response_is_the_kernel() {
    let g = grid();
    let mut f = SpaceTimeField::zeros(g, 1);
    f.slice_mut(0)[0] = 1.0;
    let out = riesz_apply(&f, RieszOrder::new(1.0).unwrap()).unwrap();
    let origin = Event { t: 0.0, x: [0.0; 3] };
    let mut checked = 0;
    for n in 0..g.nt {
        for idx in (0..g.points()).step_by(37) {
            if n == 0 && idx == 0 {
                continue;
            }
            let e = Event { t: g.time(n), x: g.position(idx) };
            let want = quasi_distance(&e, &origin, g.l).powi(-4) * g.cell_measure();
            let got = out.at(n, 0, idx);
            assert!((got / want - 1.0).abs() < 1e-6, "event ({n}, {idx}): {got} vs {want}");
            checked += 1;
        }
    }
    assert!(checked > 1000);
    // the singular cell holds the cell average, which exceeds every neighbour
    assert!(out.at(0, 0, 0) > out.at(0, 0, 1));
}

#[test]
fn matches_naive_double_sum() {
    let g = Grid::new(2.0, 8, 0.5, 6).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut f = SpaceTimeField::zeros(g, 1);
    let mut support = Vec::new();
    for _ in 0..12 {
        let (n, i) = (rng.gen_range(0..g.nt), rng.gen_range(0..g.points()));
        f.slice_mut(n)[i] = rng.gen_range(-1.0..1.0);
        support.push((n, i));
    }
    let a = 0.7;
    let out = riesz_apply(&f, RieszOrder::new(a).unwrap()).unwrap();
    for n in 0..g.nt {
        for i in 0..g.points() {
            if support.contains(&(n, i)) {
                continue;
            }
            let e = Event { t: g.time(n), x: g.position(i) };
            let mut want = 0.0;
            for m in 0..g.nt {
                for j in 0..g.points() {
                    let v = f.at(m, 0, j);
                    if v != 0.0 {
                        let s = Event { t: g.time(m), x: g.position(j) };
                        want += v * quasi_distance(&e, &s, g.l).powf(a - 5.0) * g.cell_measure();
                    }
                }
            }
            let got = out.at(n, 0, i);
            assert!((got - want).abs() <= 1e-12 * want.abs().max(1.0), "{got} vs {want}");
        }
    }
}

#[test]
fn linear_and_positive() {
    let g = grid();
    let f = bump(g, [3.0; 3], 0.5, 1.0, 0.25, 1.0);
    let order = RieszOrder::new(1.5).unwrap();
    let a = riesz_apply(&f, order).unwrap();
    let b = riesz_apply(&f.scaled(2.0), order).unwrap();
    assert_eq!(a.scaled(2.0), b);
    assert!(a.values().iter().all(|v| *v > 0.0));
    assert!(riesz_apply(&f, RieszOrder { a: 5.0 }).is_err());
}

#[test]
fn spatial_translation_is_exact() {
    let g = grid();
    let f = bump(g, [3.0, 2.0, 4.0], 0.5, 1.0, 0.25, 1.0);
    let order = RieszOrder::new(1.0).unwrap();
    let n = g.nx;
    let roll = |v: &SpaceTimeField| {
        SpaceTimeField::from_slices(g, 1, |t| {
            let s = v.slice(t);
            (0..g.points())
                .map(|idx| {
                    let (x, y, z) = (idx % n, (idx / n) % n, idx / (n * n));
                    s[g.index((x + n - 3) % n, (y + n - 5) % n, z)]
                })
                .collect()
        })
    };
    let a = roll(&riesz_apply(&f, order).unwrap());
    let b = riesz_apply(&roll(&f), order).unwrap();
    assert!(a.max_abs_diff(&b).unwrap() <= 1e-12 * a.max_abs());
}

#[test]
fn mask_restricts_evaluation() {
    let g = grid();
    let f = bump(g, [3.0; 3], 0.5, 1.0, 0.25, 1.0);
    let order = RieszOrder::new(1.0).unwrap();
    let full = riesz_apply(&f, order).unwrap();
    let mask: Vec<bool> = (0..g.points() * g.nt).map(|e| e % 3 == 0).collect();
    let part = riesz_apply_masked(&f, order, Some(&mask)).unwrap();
    for (e, m) in mask.iter().enumerate() {
        let (got, want) = (part.values()[e], full.values()[e]);
        assert_eq!(got, if *m { want } else { 0.0 });
    }
}

#[test]
fn dilation_covariance() {
    let g = grid();
    let f = bump(g, [3.0; 3], 0.5, 1.0, 0.25, 1.0);
    for a in [0.5, 1.0] {
        let order = RieszOrder::new(a).unwrap();
        let base = riesz_apply(&f, order).unwrap();
        for lambda in [0.5, 0.25] {
            let lhs = riesz_apply(&parabolic_rescale(&f, lambda).unwrap(), order).unwrap();
            let rhs = parabolic_rescale(&base, lambda).unwrap().scaled(lambda.powf(-a));
            let err = lhs.max_abs_diff(&rhs).unwrap() / rhs.max_abs();
            assert!(err < 0.05, "a {a} lambda {lambda}: {err}");
        }
    }
}

#[test]
fn adams_hedberg_zero_field_is_empty() {
    let g = grid();
    let plan = CylinderSamplingPlan::default_for(&g);
    let rep = adams_hedberg_check(&SpaceTimeField::zeros(g, 1), 2.0, 5.5, 0.5, &plan).unwrap();
    assert!(rep.report.ratio.is_empty());
    assert!(rep.scale_invariant);
    assert!(adams_hedberg_check(&SpaceTimeField::zeros(g, 1), 2.0, 5.5, 1.0, &plan).is_err());
}

#[test]
fn adams_hedberg_ratio_is_scale_invariant() {
    let g = grid();
    let f = bump(g, [3.0; 3], 0.5, 1.0, 0.25, 1.0);
    let plan = CylinderSamplingPlan::default_for(&g);
    let rep = adams_hedberg_check(&f, 2.0, 5.5, 0.5, &plan).unwrap();
    let rho = rep.report.ratio.value().unwrap();
    assert!(rho.is_finite() && rho > 0.0);
    assert_eq!(rep.rescaled.len(), 2);
    assert!(rep.scale_spread.unwrap() <= 0.10, "{:?}", rep.scale_spread);
    assert!(rep.scale_invariant);
    assert!((rep.nu - 0.45).abs() < 1e-15);
}

#[test]
fn adams_hedberg_ratio_has_order_one_spread() {
    let g = grid();
    let plan = CylinderSamplingPlan::default_for(&g);
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    let mut ratios = Vec::new();
    for _ in 0..20 {
        let c = [rng.gen_range(1.5..4.5), rng.gen_range(1.5..4.5), rng.gen_range(1.5..4.5)];
        let f = bump(
            g,
            c,
            rng.gen_range(0.4..0.6),
            rng.gen_range(0.7..1.3),
            rng.gen_range(0.15..0.35),
            rng.gen_range(0.5..2.0),
        );
        let r = adams_hedberg_ratio(&f, 2.0, 5.5, 0.5, &plan).unwrap();
        ratios.push(r.ratio.value().unwrap());
    }
    let max = ratios.iter().cloned().fold(0.0, f64::max);
    let min = ratios.iter().cloned().fold(f64::MAX, f64::min);
    assert!(max / min <= 20.0, "spread {}", max / min);
}

#[test]
fn second_corollary_norm_is_finite() {
    let g = grid();
    let f = bump(g, [3.0; 3], 0.5, 1.2, 0.3, 1.0);
    let q = ParabolicCylinder::new(0.5, [3.0; 3], 1.0).unwrap();
    let ind = q.to_cylinder().indicator(&g);
    let inner = f.multiply_scalar(&ind).unwrap();
    let pot = riesz_apply(&inner, RieszOrder::new(2.0).unwrap()).unwrap();
    let local = pot.multiply_scalar(&ind).unwrap();
    let (_, sigma) = corollary_i2_exponents(3.0, 6.0).unwrap();
    let n = morrey_norm(&local, MorreyParams::new(sigma, 6.0).unwrap(), &CylinderSamplingPlan::default_for(&g))
        .unwrap();
    assert!(n.norm.is_finite() && n.norm > 0.0);
}

#[test]
fn first_corollary_boundary_limit() {
    let nu = gain_factor(&(5.0 + 1e-9));
    assert!((nu - 1.0).abs() < 1e-9);
    let e = corollary_i1_exponents(BigRational::new(3.into(), 1.into()), BigRational::new(6.into(), 1.into())).unwrap();
    assert_eq!(e.nu, BigRational::new(29.into(), 30.into()));
    assert!((corollary_i1_exponents(3.0, 6.0).unwrap().sigma - 90.0 / 29.0).abs() < 1e-14);
}

mod properties {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn gain_factor_in_unit_interval(q in 5.0001f64..6.0) {
            let nu = gain_factor(&q);
            prop_assert!(nu > 0.0 && nu < 1.0);
        }

        #[test]
        fn sigma_strictly_gains_below_q(p in 2.01f64..6.0, q in 5.01f64..6.0) {
            prop_assume!(p < q);
            let e = corollary_i1_exponents(p, q).unwrap();
            prop_assert!(e.sigma > p);
            prop_assert!(e.sigma <= q);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(6))]

        #[test]
        fn potential_is_monotone(amp in 0.1f64..2.0, extra in 0.0f64..1.0, a in 0.3f64..3.0) {
            let g = Grid::new(2.0 * PI, 8, 1.0, 5).unwrap();
            let f = bump(g, [3.0; 3], 0.5, 1.5, 0.5, amp);
            let h = bump(g, [2.5; 3], 0.4, 1.2, 0.4, extra);
            let mut sum = f.clone();
            sum.add_scaled(&h, 1.0).unwrap();
            let order = RieszOrder::new(a).unwrap();
            let lo = riesz_apply(&f, order).unwrap();
            let hi = riesz_apply(&sum, order).unwrap();
            for (l, u) in lo.values().iter().zip(hi.values()) {
                prop_assert!(*l <= *u * (1.0 + 1e-14));
            }
        }
    }
}

//! Micro-rotation side: `W = varpi omega` with the big cutoff `phi` and the
//! small one `varpi`, the split of `W_1` into rotational, gradient and
//! commutator parts, and the Duhamel expansions of each part.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::field::{FieldHistory, Grid, SpaceTimeField, SpectralContext, SpectralSnapshot};

use super::bumps::BumpFamily;
use super::cutoff::{CutoffSampler, Deriv};
use super::inputs::{check_solenoidal, convective_pieces, gradient_commutator, heat_commutator};
use super::modulated::Modulated;
use super::passes::{inverse_laplacian_real, run_pass};
use super::report::{Accumulator, ExpansionOptions, ExpansionReport, IdentityResidual, TermDef};
use super::u_side::{multiply_samples, three_part_split, ReconstructionSummary};

#[derive(Clone, Debug)]
pub struct WDecomposition {
    pub w_local: SpaceTimeField,
    pub w1: SpaceTimeField,
    pub w2: SpaceTimeField,
    pub w3: SpaceTimeField,
    pub w1a: SpaceTimeField,
    pub w1b: SpaceTimeField,
    pub w1c: SpaceTimeField,
    /// `W_1 - W_2 + W_3` against `varpi omega`.
    pub reconstruction: ReconstructionSummary,
    /// `W_1` against `-W_1a + W_1b - W_1c`.
    pub split: IdentityResidual,
}

/// `phi lap^{-1}` of real samples, mean-projected.
fn big_inverse(ctx: &Arc<SpectralContext>, big: &CutoffSampler, n: usize, real: &[f64]) -> Result<(Vec<f64>, f64)> {
    let (mut vals, mean) = inverse_laplacian_real(ctx, 3, real)?;
    big.multiply(n, &mut vals);
    Ok((vals, mean))
}

/// `sum_j (d_j varpi) e_j D` for a scalar `D`.
fn gradient_weighted(d: &SpectralSnapshot) -> Result<Modulated> {
    let mut m = Modulated::empty(3);
    for j in 0..3 {
        m.add_scaled(&Modulated::with_deriv(Deriv::axis(j), SpectralSnapshot::unit_embed(d, j)), 1.0)?;
    }
    Ok(m)
}

pub fn decompose_w(omega: &dyn FieldHistory, bumps: &BumpFamily) -> Result<WDecomposition> {
    let (w_local, [w1, w2, w3], reconstruction) = three_part_split(omega, bumps)?;
    let grid = *omega.grid();
    let ctx = SpectralContext::get(grid.nx, grid.l);
    let (big, small) = bumps.samplers(&grid);
    let parts = run_pass(
        &grid,
        3,
        3,
        None,
        |n| {
            if !small.is_active(n) {
                return Ok(vec![SpectralSnapshot::zeros(&ctx, 3); 3]);
            }
            let s = omega.spectral_slice(n);
            let rot = Modulated::new(s.curl()?).curl()?.materialize(&big, n)?;
            let rot = multiply_samples(&rot, &small.slice(Deriv::ZERO, n)?);
            let div = s.divergence()?;
            let grad = Modulated::new(div.clone()).gradient()?.to_spectral(&small, n)?;
            let comm = gradient_weighted(&div)?.to_spectral(&small, n)?;
            Ok(vec![SpectralSnapshot::from_real(&ctx, 3, &rot), grad, comm])
        },
        |_, n, s| {
            if !small.is_active(n) {
                return Ok((vec![0.0; 3 * grid.points()], 0.0));
            }
            big_inverse(&ctx, &big, n, &s.to_real())
        },
    )?;
    let [w1a, w1b, w1c]: [SpaceTimeField; 3] = parts
        .fields
        .try_into()
        .map_err(|_| Error::Shape("split pass returned the wrong number of fields".into()))?;
    let mut combined = w1b.clone();
    combined.add_scaled(&w1a, -1.0)?;
    combined.add_scaled(&w1c, -1.0)?;
    let split = IdentityResidual::between(&w1, &combined)?;
    Ok(WDecomposition {
        w_local,
        w1,
        w2,
        w3,
        w1a,
        w1b,
        w1c,
        reconstruction,
        split,
    })
}

/// `q_1` with `1/q_1 = 1/q_0 + 3/10`, the exponent of the `u ⊗ omega`
/// products when `u` sits in `M^{10/3}` and `omega` in `M^{q_0}`.
pub fn convective_q1(q0: f64) -> f64 {
    1.0 / (1.0 / q0 + 0.3)
}

/// Checks the exponent window `10/3 < p <= q <= 15/4`.
pub fn check_omega_window(p: f64, q: f64) -> Result<()> {
    if !(p > 10.0 / 3.0 && p <= q && q <= 3.75) {
        return Err(Error::Exponent(format!(
            "the micro-rotation window needs 10/3 < p <= q <= 15/4, got p = {p}, q = {q}"
        )));
    }
    Ok(())
}

pub const W1A_TERMS: [TermDef; 8] = [
    TermDef { index: 1, label: "(d_t phi + lap phi) curl omega", sign: 1.0 },
    TermDef { index: 2, label: "sum_j d_j((d_j phi) curl omega)", sign: -2.0 },
    TermDef { index: 3, label: "phi curl omega", sign: -1.0 },
    TermDef { index: 4, label: "curl sum_j d_j(phi P(u_j omega))", sign: -1.0 },
    TermDef { index: 5, label: "curl sum_j (d_j phi) P(u_j omega)", sign: 1.0 },
    TermDef { index: 6, label: "sum_j d_j(grad phi x P(u_j omega))", sign: 1.0 },
    TermDef { index: 7, label: "sum_j (grad d_j phi) x P(u_j omega)", sign: -1.0 },
    TermDef { index: 8, label: "phi curl curl u", sign: 0.5 },
];

pub const W1B_TERMS: [TermDef; 6] = [
    TermDef { index: 1, label: "(d_t varpi + 2 lap varpi - varpi) div omega", sign: 1.0 },
    TermDef { index: 2, label: "sum_j d_j((d_j varpi) div omega)", sign: -4.0 },
    TermDef { index: 3, label: "sum_ij d_i d_j(varpi F_ij)", sign: -1.0 },
    TermDef { index: 4, label: "sum_ij d_i((d_j varpi) F_ij)", sign: 1.0 },
    TermDef { index: 5, label: "sum_ij d_j((d_i varpi) F_ij)", sign: 1.0 },
    TermDef { index: 6, label: "sum_ij (d_i d_j varpi) F_ij", sign: -1.0 },
];

pub const W1C_TERMS: [TermDef; 2] = [
    TermDef { index: 1, label: "phi lap^{-1} sum_k d_k((d_j varpi) omega_k)", sign: 1.0 },
    TermDef { index: 2, label: "phi lap^{-1} sum_k (d_k d_j varpi) omega_k", sign: -1.0 },
];

/// Velocity and micro-rotation slices; `u` must be solenoidal.
fn load(u: &dyn FieldHistory, omega: &dyn FieldHistory, n: usize) -> (SpectralSnapshot, SpectralSnapshot) {
    (u.spectral_slice(n), omega.spectral_slice(n))
}

fn check_pair(u: &dyn FieldHistory, omega: &dyn FieldHistory) -> Result<Grid> {
    if u.grid() != omega.grid() || u.components() != 3 || omega.components() != 3 {
        return Err(Error::Shape("u and omega must be vector fields on one grid".into()));
    }
    check_solenoidal(u, "u")?;
    Ok(*u.grid())
}

fn w1a_sources(u: &SpectralSnapshot, omega: &SpectralSnapshot, group: usize) -> Result<Vec<Modulated>> {
    let cw = omega.curl()?;
    match group {
        0 => Ok(vec![
            heat_commutator(&cw, 1.0, 1.0),
            gradient_commutator(&cw)?,
            Modulated::new(cw),
            Modulated::new(u.curl()?.curl()?),
        ]),
        _ => Ok(convective_pieces(&SpectralSnapshot::outer(u, omega))?.to_vec()),
    }
}

fn w1a_direct(u: &SpectralSnapshot, omega: &SpectralSnapshot) -> Result<Modulated> {
    let cw = omega.curl()?;
    let mut m = heat_commutator(&cw, 1.0, 1.0);
    m.add_scaled(&gradient_commutator(&cw)?, -2.0)?;
    m.add_scaled(&Modulated::new(cw), -1.0)?;
    m.add_scaled(&Modulated::new(u.curl()?.curl()?), 0.5)?;
    m.add_scaled(&Modulated::new(SpectralSnapshot::convect(u, omega).curl()?), -1.0)?;
    Ok(m)
}

fn materialize_or_zero(m: &Modulated, s: &CutoffSampler, n: usize, ctx: &Arc<SpectralContext>) -> Result<SpectralSnapshot> {
    if !s.is_active(n) {
        return Ok(SpectralSnapshot::zeros(ctx, m.comps()));
    }
    m.to_spectral(s, n)
}

/// `phi lap^{-1}(varpi curl D)`.
fn rot_post(ctx: &Arc<SpectralContext>, big: &CutoffSampler, small: &CutoffSampler, n: usize, d: SpectralSnapshot) -> Result<(Vec<f64>, f64)> {
    if !small.is_active(n) {
        return Ok((vec![0.0; 3 * ctx.points()], 0.0));
    }
    let mut c = d.curl()?.to_real();
    small.multiply(n, &mut c);
    big_inverse(ctx, big, n, &c)
}

/// The eight terms `phi lap^{-1}(varpi curl Duhamel(R_i))` for the variable
/// `phi curl omega`.
pub fn expand_w1a_terms(
    u: &dyn FieldHistory,
    omega: &dyn FieldHistory,
    bumps: &BumpFamily,
    options: &ExpansionOptions,
) -> Result<ExpansionReport> {
    if let Some((params, _)) = &options.norm {
        check_omega_window(params.p, params.q)?;
    }
    let grid = check_pair(u, omega)?;
    let ctx = SpectralContext::get(grid.nx, grid.l);
    let (big, small) = bumps.samplers(&grid);
    let mut acc = Accumulator::new(options);
    let groups: [&[usize]; 2] = [&[0, 1, 2, 7], &[3, 4, 5, 6]];
    for (group, slots) in groups.iter().enumerate() {
        let out = run_pass(
            &grid,
            4,
            3,
            Some(1.0),
            |n| {
                if !big.is_active(n) {
                    return Ok(vec![SpectralSnapshot::zeros(&ctx, 3); 4]);
                }
                let (su, sw) = load(u, omega, n);
                w1a_sources(&su, &sw, group)?
                    .iter()
                    .map(|m| materialize_or_zero(m, &big, n, &ctx))
                    .collect()
            },
            |_, n, d| rot_post(&ctx, &big, &small, n, d),
        )?;
        acc.note_mean(out.mean_removed);
        for (slot, field) in slots.iter().zip(out.fields) {
            acc.add(W1A_TERMS[*slot], field)?;
        }
    }
    let direct = run_pass(
        &grid,
        1,
        3,
        Some(1.0),
        |n| {
            let (su, sw) = load(u, omega, n);
            Ok(vec![materialize_or_zero(&w1a_direct(&su, &sw)?, &big, n, &ctx)?])
        },
        |_, n, d| rot_post(&ctx, &big, &small, n, d),
    )?;
    acc.note_mean(direct.mean_removed);
    let mut rep = acc.finish("W1a", direct.fields.into_iter().next().expect("one field"))?;
    rep.notes.push("term 7 enters with -1, as the four-term convective rewriting requires".into());
    Ok(rep)
}

fn w1b_sources(u: &SpectralSnapshot, omega: &SpectralSnapshot) -> Result<Vec<Modulated>> {
    let d = omega.divergence()?;
    let mut first = heat_commutator(&d, 1.0, 2.0);
    first.add_scaled(&Modulated::new(d.clone()), -1.0)?;
    let k = SpectralSnapshot::outer(u, omega);
    let mut a = Modulated::empty(1);
    let mut b = Modulated::empty(1);
    let mut c = Modulated::empty(1);
    let mut e = Modulated::empty(1);
    for (j, kj) in k.iter().enumerate() {
        a.add_scaled(&Modulated::new(kj.clone()).partial(j)?.divergence()?, 1.0)?;
        b.add_scaled(&Modulated::with_deriv(Deriv::axis(j), kj.clone()).divergence()?, 1.0)?;
        for i in 0..3 {
            let fij = kj.component(i);
            c.add_scaled(&Modulated::with_deriv(Deriv::axis(i), fij.clone()).partial(j)?, 1.0)?;
            e.add_scaled(&Modulated::with_deriv(Deriv::axis(i).plus(j), fij), 1.0)?;
        }
    }
    Ok(vec![first, gradient_commutator(&d)?, a, b, c, e])
}

fn w1b_direct(u: &SpectralSnapshot, omega: &SpectralSnapshot) -> Result<Modulated> {
    let d = omega.divergence()?;
    let mut m = heat_commutator(&d, 1.0, 2.0);
    m.add_scaled(&Modulated::new(d.clone()), -1.0)?;
    m.add_scaled(&gradient_commutator(&d)?, -4.0)?;
    m.add_scaled(&Modulated::new(SpectralSnapshot::convect(u, omega).divergence()?), -1.0)?;
    Ok(m)
}

/// `phi lap^{-1} grad D`, all spectral before the cutoff.
fn grad_post(big: &CutoffSampler, n: usize, d: SpectralSnapshot) -> Result<(Vec<f64>, f64)> {
    if !big.is_active(n) {
        return Ok((vec![0.0; 3 * big.grid().points()], 0.0));
    }
    let (inv, means) = d.gradient()?.inverse_laplacian(true)?;
    let mut vals = inv.to_real();
    big.multiply(n, &mut vals);
    Ok((vals, means.iter().fold(0.0, |m, v| m.max(v.abs()))))
}

/// The terms of `phi lap^{-1} grad Duhamel_2(S_i)` for the variable
/// `varpi div omega`, whose heat semigroup has diffusivity 2.
pub fn expand_w1b_terms(
    u: &dyn FieldHistory,
    omega: &dyn FieldHistory,
    bumps: &BumpFamily,
    options: &ExpansionOptions,
) -> Result<ExpansionReport> {
    let grid = check_pair(u, omega)?;
    let ctx = SpectralContext::get(grid.nx, grid.l);
    let (big, small) = bumps.samplers(&grid);
    let mut acc = Accumulator::new(options);
    let out = run_pass(
        &grid,
        6,
        3,
        Some(2.0),
        |n| {
            if !small.is_active(n) {
                return Ok(vec![SpectralSnapshot::zeros(&ctx, 1); 6]);
            }
            let (su, sw) = load(u, omega, n);
            w1b_sources(&su, &sw)?.iter().map(|m| m.to_spectral(&small, n)).collect()
        },
        |_, n, d| grad_post(&big, n, d),
    )?;
    acc.note_mean(out.mean_removed);
    for (def, field) in W1B_TERMS.iter().zip(out.fields) {
        acc.add(*def, field)?;
    }
    let direct = run_pass(
        &grid,
        1,
        3,
        Some(2.0),
        |n| {
            let (su, sw) = load(u, omega, n);
            Ok(vec![materialize_or_zero(&w1b_direct(&su, &sw)?, &small, n, &ctx)?])
        },
        |_, n, d| grad_post(&big, n, d),
    )?;
    acc.note_mean(direct.mean_removed);
    let mut rep = acc.finish("W1b", direct.fields.into_iter().next().expect("one field"))?;
    rep.notes.push(
        "terms 3 to 6 rewrite varpi div P((u.grad)omega); the last piece (d_i d_j varpi) F_ij enters \
         the rewriting with +1, so with -1 in the sum"
            .into(),
    );
    Ok(rep)
}

/// The two pieces of `W_1c = phi lap^{-1}((grad varpi) div omega)`.
pub fn expand_w1c_terms(omega: &dyn FieldHistory, bumps: &BumpFamily, options: &ExpansionOptions) -> Result<ExpansionReport> {
    if omega.components() != 3 {
        return Err(Error::Shape("omega must be a vector field".into()));
    }
    let grid = *omega.grid();
    let ctx = SpectralContext::get(grid.nx, grid.l);
    let (big, small) = bumps.samplers(&grid);
    let out = run_pass(
        &grid,
        3,
        3,
        None,
        |n| {
            if !small.is_active(n) {
                return Ok(vec![SpectralSnapshot::zeros(&ctx, 3); 3]);
            }
            let s = omega.spectral_slice(n);
            let mut a = Modulated::empty(3);
            let mut b = Modulated::empty(3);
            for j in 0..3 {
                for k in 0..3 {
                    let wk = SpectralSnapshot::unit_embed(&s.component(k), j);
                    a.add_scaled(&Modulated::with_deriv(Deriv::axis(j), wk.clone()).partial(k)?, 1.0)?;
                    b.add_scaled(&Modulated::with_deriv(Deriv::axis(j).plus(k), wk), 1.0)?;
                }
            }
            let direct = gradient_weighted(&s.divergence()?)?;
            [a, b, direct].iter().map(|m| m.to_spectral(&small, n)).collect()
        },
        |_, n, s| {
            if !small.is_active(n) {
                return Ok((vec![0.0; 3 * grid.points()], 0.0));
            }
            big_inverse(&ctx, &big, n, &s.to_real())
        },
    )?;
    let mut acc = Accumulator::new(options);
    acc.note_mean(out.mean_removed);
    let mut fields = out.fields.into_iter();
    for def in W1C_TERMS {
        acc.add(def, fields.next().expect("three fields"))?;
    }
    acc.finish("W1c", fields.next().expect("three fields"))
}

//! Direct numerical checks of the two vector identities behind the
//! decompositions.

use crate::error::{Error, Result};
use crate::field::{FieldHistory, SpaceTimeField, SpectralContext, SpectralSnapshot};

use super::bumps::BumpFamily;
use super::cutoff::{Cutoff, Deriv};
use super::inputs::{check_solenoidal, convective_pieces};
use super::modulated::Modulated;
use super::passes::{inverse_laplacian_real, run_pass};
use super::report::IdentityResidual;
use super::u_side::multiply_samples;

/// Checks `psi lap^{-1}(phi lap u) = -psi lap^{-1}(phi curl[psi curl u]) + psi lap^{-1}(phi grad div u)`.
pub fn verify_rot_identity(u: &dyn FieldHistory, bumps: &BumpFamily) -> Result<IdentityResidual> {
    if u.components() != 3 {
        return Err(Error::Shape("the rotational identity needs a vector field".into()));
    }
    let grid = *u.grid();
    let ctx = SpectralContext::get(grid.nx, grid.l);
    let (big, small) = bumps.samplers(&grid);
    let out = run_pass(
        &grid,
        2,
        3,
        None,
        |n| {
            let s = u.spectral_slice(n);
            let phi = small.slice(Deriv::ZERO, n)?;
            let lhs = multiply_samples(&s.laplacian().to_real(), &phi);
            let curl_part = Modulated::new(s.curl()?).curl()?.materialize(&big, n)?;
            let grad_div = s.divergence()?.gradient()?.to_real();
            let rhs: Vec<f64> = curl_part
                .iter()
                .zip(&grad_div)
                .map(|(c, g)| -c + g)
                .collect();
            let rhs = multiply_samples(&rhs, &phi);
            Ok(vec![
                SpectralSnapshot::from_real(&ctx, 3, &lhs),
                SpectralSnapshot::from_real(&ctx, 3, &rhs),
            ])
        },
        |_, n, s| {
            let (mut vals, mean) = inverse_laplacian_real(&ctx, 3, &s.to_real())?;
            big.multiply(n, &mut vals);
            Ok((vals, mean))
        },
    )?;
    IdentityResidual::between(&out.fields[0], &out.fields[1])
}

/// Checks `psi curl P((b.grad)c) = A - B - C + D` with the pieces of
/// [`convective_pieces`] built from `F_j = P(b_j c)`. Needs `div b = div c = 0`.
pub fn verify_convective_identity(
    b: &dyn FieldHistory,
    c: &dyn FieldHistory,
    psi: &Cutoff,
) -> Result<IdentityResidual> {
    if b.components() != 3 || c.components() != 3 || b.grid() != c.grid() {
        return Err(Error::Shape("the convective identity needs two vector fields on one grid".into()));
    }
    check_solenoidal(b, "b")?;
    check_solenoidal(c, "c")?;
    let grid = *b.grid();
    let sampler = psi.sampler(&grid);
    let mut lhs = SpaceTimeField::zeros(grid, 3);
    let mut rhs = SpaceTimeField::zeros(grid, 3);
    for n in 0..grid.nt {
        let (sb, sc) = (b.spectral_slice(n), c.spectral_slice(n));
        let mut l = SpectralSnapshot::convect(&sb, &sc).curl()?.to_real();
        sampler.multiply(n, &mut l);
        let [pa, pb, pc, pd] = convective_pieces(&SpectralSnapshot::outer(&sb, &sc))?;
        let mut total = pa;
        total.add_scaled(&pb, -1.0)?;
        total.add_scaled(&pc, -1.0)?;
        total.add_scaled(&pd, 1.0)?;
        lhs.set_slice(n, &l);
        rhs.set_slice(n, &total.materialize(&sampler, n)?);
    }
    IdentityResidual::between(&lhs, &rhs)
}

//! Wishart and multivariate-normal variate generation and log densities.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal};

use super::matrix::SymMatrix;
use super::rng::RngStream;
use crate::error::Error;
use crate::Result;

/// Draws from the Wishart distribution with density proportional to
/// `det(W)^{(dof-n-1)/2} * exp(-tr(scale_param * W) / 2)`.
///
/// `scale_param` is the *parametric (inverse-scale) matrix*: posterior
/// updates are additive in it and the distribution mean is
/// `dof * scale_param^{-1}`. Requires `dof > n - 1` and SPD `scale_param`.
///
/// Uses the Bartlett decomposition: a standard Wishart factor `A` (chi-square
/// diagonal, standard-normal subdiagonal) mapped through any `B` with
/// `B B^T = scale_param^{-1}`.
pub fn sample_wishart(rng: &mut RngStream, dof: f64, scale_param: &SymMatrix) -> Result<SymMatrix> {
    let n = scale_param.order();
    if dof <= n as f64 - 1.0 {
        return Err(Error::Domain(format!(
            "wishart dof {dof} must exceed n - 1 = {}",
            n - 1
        )));
    }
    let chol = scale_param.cholesky()?;
    // B = M^{-T} where scale_param = M M^T, so B B^T = scale_param^{-1}.
    let b = chol
        .l()
        .transpose()
        .solve_upper_triangular(&DMatrix::identity(n, n))
        .ok_or_else(|| Error::NotPositiveDefinite("singular Cholesky factor".into()))?;

    let mut a = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..i {
            a[(i, j)] = StandardNormal.sample(rng);
        }
        let chi = ChiSquared::new(dof - i as f64)
            .map_err(|e| Error::Domain(format!("chi-squared: {e}")))?;
        a[(i, i)] = chi.sample(rng).sqrt();
    }
    let ba = b * a;
    let w = &ba * ba.transpose();
    Ok(SymMatrix::symmetrize(w))
}

/// Draws `mean + L * xi` where `covariance = L L^T` and `xi` is a vector of
/// independent standard normals.
pub fn sample_mvn(
    rng: &mut RngStream,
    mean: &DVector<f64>,
    covariance: &SymMatrix,
) -> Result<DVector<f64>> {
    let n = covariance.order();
    if mean.len() != n {
        return Err(Error::Dimension(format!(
            "mean length {} vs covariance order {n}",
            mean.len()
        )));
    }
    let chol = covariance.cholesky()?;
    let xi = DVector::from_fn(n, |_, _| rng.sample(StandardNormal));
    Ok(mean + chol.l() * xi)
}

/// Log density of the `n`-variate normal at `x`, computed via Cholesky solves.
pub fn logdensity_mvn(x: &DVector<f64>, mean: &DVector<f64>, covariance: &SymMatrix) -> Result<f64> {
    let n = covariance.order();
    if x.len() != n || mean.len() != n {
        return Err(Error::Dimension(format!(
            "x ({}) / mean ({}) vs covariance order {n}",
            x.len(),
            mean.len()
        )));
    }
    let logdet = covariance.chol_logdet()?;
    let diff = x - mean;
    let quad = covariance.inv_quadform(&diff)?;
    Ok(-0.5 * (n as f64) * (2.0 * std::f64::consts::PI).ln() - 0.5 * logdet - 0.5 * quad)
}

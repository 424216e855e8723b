//! Special functions used by the marginal-likelihood formulas.

use statrs::function::gamma::ln_gamma;

use crate::error::Error;
use crate::Result;

/// Log of the `n`-dimensional multivariate gamma function,
///
/// `ln Gamma_n(a) = n(n-1)/4 * ln(pi) + sum_{j=1..n} ln Gamma(a + (1-j)/2)`,
///
/// defined for `a > (n-1)/2`.
pub fn log_multigamma(n: usize, a: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::Domain("multigamma order must be positive".into()));
    }
    if a <= (n as f64 - 1.0) / 2.0 {
        return Err(Error::Domain(format!(
            "multigamma argument {a} must exceed (n-1)/2 = {}",
            (n as f64 - 1.0) / 2.0
        )));
    }
    let mut s = (n * (n - 1)) as f64 / 4.0 * std::f64::consts::PI.ln();
    for j in 1..=n {
        s += ln_gamma(a + (1.0 - j as f64) / 2.0);
    }
    Ok(s)
}

/// `ln(sum_i exp(x_i))` with the usual max-shift guard. Returns `-inf` for an
/// empty slice or all `-inf` entries.
pub fn logsumexp(xs: &[f64]) -> f64 {
    let m = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return m;
    }
    m + xs.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

use crate::error::{Error, Result};
use crate::mcmc::{mean, sample_variance};

/// Gelman-Rubin potential scale reduction
/// `R̂ = sqrt(((n−1)/n · W + B/n) / W)`, with `W` the mean within-chain
/// variance and `B = n ·` the variance of the chain means.
///
/// A zero within-chain variance is reported as [`Error::Degenerate`].
pub fn gelman_rubin<C: AsRef<[f64]>>(chains: &[C]) -> Result<f64> {
    if chains.len() < 2 {
        return Err(Error::InvalidParams("R-hat needs at least two chains".into()));
    }
    let n = chains[0].as_ref().len();
    if n < 2 || chains.iter().any(|c| c.as_ref().len() != n) {
        return Err(Error::InvalidParams("R-hat needs equal-length chains of at least two draws".into()));
    }
    // Tested on the values: rounding in the mean can leave a constant chain
    // with a tiny positive variance.
    let constant = |c: &[f64]| c.iter().all(|&v| v == c[0]);
    if chains.iter().all(|c| constant(c.as_ref())) {
        return Err(Error::Degenerate("zero within-chain variance".into()));
    }
    let means: Vec<f64> = chains.iter().map(|c| mean(c.as_ref())).collect();
    let w = mean(&chains.iter().map(|c| sample_variance(c.as_ref())).collect::<Vec<_>>());
    if w == 0.0 {
        return Err(Error::Degenerate("zero within-chain variance".into()));
    }
    let nf = n as f64;
    let b = nf * sample_variance(&means);
    Ok((((nf - 1.0) / nf * w + b / nf) / w).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form() {
        let r = gelman_rubin(&[vec![1.0, 2.0, 3.0], vec![1.0, 2.0, 3.0]]).unwrap();
        assert!((r - (2.0f64 / 3.0).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn identical_chains_fall_below_one() {
        let c: Vec<f64> = (0..10).map(|k| (k as f64).sin()).collect();
        let r = gelman_rubin(&[c.clone(), c]).unwrap();
        assert!((r - (9.0f64 / 10.0).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn separated_chains_blow_up() {
        let r = gelman_rubin(&[vec![0.0, 1.0, 0.0, 1.0], vec![10.0, 11.0, 10.0, 11.0]]).unwrap();
        assert!(r > 5.0);
    }

    #[test]
    fn degenerate_and_invalid() {
        assert!(matches!(
            gelman_rubin(&[vec![0.0; 3], vec![10.0; 3]]),
            Err(Error::Degenerate(_))
        ));
        assert!(gelman_rubin(&[vec![1.0, 2.0]]).is_err());
        assert!(gelman_rubin(&[vec![1.0, 2.0], vec![1.0]]).is_err());
    }
}

use ordinal_bayes::grm::{self, covariate_effects, rank_discrimination, GrmPrior, ParamKind};
use ordinal_bayes::mcmc::McmcConfig;
use ordinal_bayes::simulate::{gen_grm, CovariateDist, GrmSimSpec, SimCovariate, SimItem};
use ordinal_bayes::survey::CovariateMatrix;

fn spec(seed: u64, n: usize, gammas: &[f64], covariates: Vec<(&str, CovariateDist, f64)>) -> GrmSimSpec {
    let m = gammas.len();
    GrmSimSpec {
        seed,
        n,
        n_categories: 4,
        items: gammas
            .iter()
            .enumerate()
            .map(|(j, &gamma)| SimItem {
                name: format!("I{}", j + 1),
                beta: -1.5 + 1.5 * j as f64 / (m.max(2) - 1) as f64,
                gamma,
            })
            .collect(),
        delta: vec![0.0, 1.2, 2.4],
        alpha: covariates.iter().map(|c| c.2).collect(),
        covariates: covariates
            .into_iter()
            .map(|(name, dist, _)| SimCovariate { name: name.into(), dist })
            .collect(),
    }
}

fn short(seed: u64) -> McmcConfig {
    McmcConfig {
        iterations: 4000,
        burn_in: 1500,
        thin: 5,
        chains: 2,
        seed,
    }
}

fn corr(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let (ma, mb) = (a.iter().sum::<f64>() / n, b.iter().sum::<f64>() / n);
    let cov: f64 = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let va: f64 = a.iter().map(|x| (x - ma).powi(2)).sum();
    let vb: f64 = b.iter().map(|y| (y - mb).powi(2)).sum();
    cov / (va * vb).sqrt()
}

#[test]
fn recovers_traits_and_covariate_signs() {
    let bern = CovariateDist::Bernoulli { p: 0.5 };
    let s = spec(
        21,
        500,
        &[0.8, 1.0, 1.2, 1.5, 1.8, 0.9, 1.1, 1.4, 1.6, 2.0],
        vec![("G", bern.clone(), 1.0), ("J", bern, -0.5)],
    );
    let sim = gen_grm(&s).unwrap();
    let data = sim.dataset.item_matrix().unwrap();
    let post = grm::fit(&data, &sim.design, &GrmPrior::default(), &short(5)).unwrap();
    let means: Vec<f64> = post.of_kind(ParamKind::Theta).map(|s| s.mean).collect();
    let r = corr(&means, &sim.truth.theta);
    let effects = covariate_effects(&post);
    eprintln!("corr {r}, max rhat {:?}, effects {effects:?}", post.max_rhat());
    assert!(r >= 0.85);
    assert!(effects[0].mean > 0.0 && effects[0].prob_direction() >= 0.9);
    assert!(effects[1].mean < 0.0 && effects[1].prob_direction() >= 0.9);
}

#[test]
fn discrimination_order_is_recovered() {
    let s = spec(4, 1000, &[2.0, 0.5, 1.0], vec![]);
    let sim = gen_grm(&s).unwrap();
    let data = sim.dataset.item_matrix().unwrap();
    let post = grm::fit(&data, &CovariateMatrix::empty(1000), &GrmPrior::default(), &short(8)).unwrap();
    let order: Vec<String> = rank_discrimination(&post).into_iter().map(|r| r.item).collect();
    assert_eq!(order, ["I1", "I3", "I2"]);
}

#[test]
fn equal_discriminations_overlap() {
    let s = spec(6, 1000, &[1.2, 1.2, 1.2], vec![]);
    let sim = gen_grm(&s).unwrap();
    let data = sim.dataset.item_matrix().unwrap();
    let post = grm::fit(&data, &CovariateMatrix::empty(1000), &GrmPrior::default(), &short(2)).unwrap();
    let ranks = rank_discrimination(&post);
    let lo = ranks.iter().map(|r| r.gamma_ci_high).fold(f64::INFINITY, f64::min);
    let hi = ranks.iter().map(|r| r.gamma_ci_low).fold(f64::NEG_INFINITY, f64::max);
    assert!(hi <= lo, "intervals {ranks:?}");
}

#[test]
fn without_data_the_regression_weights_follow_the_prior() {
    use ordinal_bayes::survey::OrdinalMatrix;
    let data = OrdinalMatrix::from_rows(vec![4; 3], &[]).unwrap();
    let x = CovariateMatrix::new(vec!["x".into()], 0, vec![]).unwrap();
    let cfg = McmcConfig {
        iterations: 60_000,
        burn_in: 2000,
        thin: 1,
        chains: 2,
        seed: 1,
    };
    let post = grm::fit(&data, &x, &GrmPrior::default(), &cfg).unwrap();
    let a = post.summary("alpha[x]").unwrap();
    assert!(a.mean.abs() < 1.0, "{a:?}");
    assert!((a.sd - 10.0).abs() < 1.0, "{a:?}");
}

#[test]
fn all_zero_covariate_stays_near_zero() {
    let s = spec(12, 300, &[1.0, 1.3, 0.8, 1.6], vec![("Z", CovariateDist::Fixed { value: 0.0 }, 0.0)]);
    let sim = gen_grm(&s).unwrap();
    let data = sim.dataset.item_matrix().unwrap();
    let post = grm::fit(&data, &sim.design, &GrmPrior::default(), &short(3)).unwrap();
    let a = post.summary("alpha[Z]").unwrap();
    assert!(a.mean.abs() <= 2.0 * a.sd, "{a:?}");
}

#[test]
fn positive_effect_is_detected() {
    let s = spec(13, 500, &[1.0, 1.3, 0.8, 1.6, 1.2], vec![("G", CovariateDist::Bernoulli { p: 0.5 }, 1.0)]);
    let sim = gen_grm(&s).unwrap();
    let data = sim.dataset.item_matrix().unwrap();
    let post = grm::fit(&data, &sim.design, &GrmPrior::default(), &short(4)).unwrap();
    assert!(covariate_effects(&post)[0].prob_positive >= 0.95);
}

#[test]
fn null_effect_interval_coverage() {
    let covered = (0..20u64)
        .filter(|&rep| {
            let s = spec(
                100 + rep,
                300,
                &[1.0, 1.3, 0.8, 1.6, 1.2],
                vec![("G", CovariateDist::Bernoulli { p: 0.5 }, 0.0)],
            );
            let sim = gen_grm(&s).unwrap();
            let data = sim.dataset.item_matrix().unwrap();
            let cfg = McmcConfig {
                iterations: 2000,
                burn_in: 800,
                thin: 4,
                chains: 1,
                seed: rep,
            };
            let post = grm::fit(&data, &sim.design, &GrmPrior::default(), &cfg).unwrap();
            !covariate_effects(&post)[0].interval_excludes_zero()
        })
        .count();
    assert!(covered >= 18, "{covered} of 20 intervals cover zero");
}

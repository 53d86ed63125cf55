use ordinal_bayes::mcmc::McmcConfig;
use ordinal_bayes::mrf::{self, MrfPrior, MrfState};
use ordinal_bayes::simulate::gen_mrf;

fn config(seed: u64) -> McmcConfig {
    McmcConfig {
        iterations: 4000,
        burn_in: 1000,
        thin: 1,
        chains: 1,
        seed,
    }
}

fn state(p: usize, n_categories: usize, edges: &[(usize, usize, f64)]) -> MrfState {
    let mut s = MrfState::new(vec![n_categories; p]).unwrap();
    for i in 0..p {
        let mu: Vec<f64> = (1..n_categories).map(|c| 0.4 * c as f64 - 0.15 * (c * c) as f64).collect();
        s.set_thresholds(i, mu).unwrap();
    }
    for &(a, b, t) in edges {
        s.set_edge(a, b, t);
    }
    s
}

#[test]
fn independent_variables_are_mostly_excluded() {
    let data = gen_mrf(&state(5, 4, &[]), 1000, 31).unwrap();
    let post = mrf::fit(&data, &MrfPrior::default(), &config(1)).unwrap();
    let crossing = post.edges().iter().filter(|e| e.inclusion_prob > 0.5).count();
    assert_eq!(post.edges().len(), 10);
    assert!(crossing < 2, "{:?}", post.inclusion_matrix());
}

#[test]
fn single_strong_edge_is_found() {
    let data = gen_mrf(&state(4, 2, &[(0, 1, 1.5)]), 1000, 32).unwrap();
    let post = mrf::fit(&data, &MrfPrior::default(), &config(2)).unwrap();
    for e in post.edges() {
        if (e.a, e.b) == (0, 1) {
            assert!(e.inclusion_prob > 0.9, "{e:?}");
        } else {
            assert!(e.inclusion_prob < 0.5, "{e:?}");
        }
    }
}

#[test]
fn excluded_edges_have_zero_weight_in_every_draw() {
    let data = gen_mrf(&state(4, 3, &[(0, 2, 0.6)]), 300, 33).unwrap();
    let post = mrf::fit(&data, &MrfPrior::default(), &config(3)).unwrap();
    for d in post.draws() {
        for (t, &inc) in d.theta.iter().zip(&d.included) {
            assert!(inc || *t == 0.0);
        }
    }
    for e in post.edges() {
        if e.inclusion_prob > 0.0 {
            assert!(e.ci_low <= e.theta_mean && e.theta_mean <= e.ci_high);
        }
    }
}

#[test]
fn inclusion_is_label_invariant_in_expectation() {
    let truth = state(4, 3, &[(0, 1, 0.5), (2, 3, -0.35), (1, 3, 0.25)]);
    let perm = [2usize, 0, 3, 1];
    let seeds = 0..5u64;
    let mut direct = vec![vec![0.0; 4]; 4];
    let mut permuted = vec![vec![0.0; 4]; 4];
    for seed in seeds.clone() {
        let data = gen_mrf(&truth, 400, 100 + seed).unwrap();
        let a = mrf::fit(&data, &MrfPrior::default(), &config(seed)).unwrap().inclusion_matrix();
        let b = mrf::fit(&data.select_columns(&perm), &MrfPrior::default(), &config(50 + seed))
            .unwrap()
            .inclusion_matrix();
        for i in 0..4 {
            for j in 0..4 {
                direct[perm[i]][perm[j]] += a[perm[i]][perm[j]] / 5.0;
                permuted[perm[i]][perm[j]] += b[i][j] / 5.0;
            }
        }
    }
    for i in 0..4 {
        for j in 0..4 {
            assert!((direct[i][j] - permuted[i][j]).abs() <= 0.1, "{direct:?} vs {permuted:?}");
        }
    }
}

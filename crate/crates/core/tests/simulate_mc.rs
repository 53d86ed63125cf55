use ordinal_bayes::grm::{category_prob, GrmParams};
use ordinal_bayes::mrf::MrfState;
use ordinal_bayes::rng;
use ordinal_bayes::simulate::{enumerate_mrf_joint, gen_grm_responses, gen_mrf, gen_mrf_with, GibbsSettings};

const N: usize = 100_000;

fn softmax(mu: &[f64]) -> Vec<f64> {
    let e: Vec<f64> = std::iter::once(0.0).chain(mu.iter().copied()).map(f64::exp).collect();
    let z: f64 = e.iter().sum();
    e.into_iter().map(|v| v / z).collect()
}

fn frequencies(values: impl Iterator<Item = u8>, k: usize) -> Vec<f64> {
    let mut counts = vec![0usize; k];
    let mut n = 0;
    for v in values {
        counts[v as usize] += 1;
        n += 1;
    }
    counts.into_iter().map(|c| c as f64 / n as f64).collect()
}

#[test]
fn grm_frequencies_match_category_probabilities() {
    let theta = 0.4;
    let params = GrmParams {
        theta: vec![theta; N],
        beta: vec![-0.3, 0.8],
        log_gamma: [0.2f64, 1.4].iter().map(|g| g.ln()).collect(),
        delta: vec![0.0, 0.9, 2.1],
        alpha: vec![],
    };
    let rows = gen_grm_responses(&params, &mut rng::stream(77, 0)).unwrap();
    for j in 0..2 {
        let freq = frequencies(rows.iter().map(|r| r[j]), 4);
        for h in 1..=4 {
            let p = category_prob(theta, params.gamma(j), params.beta[j], &params.delta, h).unwrap();
            assert!((freq[h - 1] - p).abs() < 0.01, "item {j} category {h}: {} vs {p}", freq[h - 1]);
        }
    }
    let again = gen_grm_responses(&params, &mut rng::stream(77, 0)).unwrap();
    assert_eq!(rows, again);
}

fn independent(p: usize, mus: &[Vec<f64>]) -> MrfState {
    let mut s = MrfState::new(mus.iter().map(|m| m.len() + 1).cycle().take(p).collect()).unwrap();
    for i in 0..p {
        s.set_thresholds(i, mus[i % mus.len()].clone()).unwrap();
    }
    s
}

#[test]
fn independent_mrf_marginals_exact_path() {
    let mus = vec![vec![0.5, -0.2, -1.0], vec![-0.8], vec![0.3, 0.6]];
    let s = independent(3, &mus);
    let data = gen_mrf(&s, N, 5).unwrap();
    for i in 0..3 {
        let target = softmax(&mus[i]);
        let freq = frequencies(data.column(i), target.len());
        for (f, t) in freq.iter().zip(&target) {
            assert!((f - t).abs() < 0.01, "{freq:?} vs {target:?}");
        }
    }
    assert_eq!(data, gen_mrf(&s, N, 5).unwrap());
}

#[test]
fn independent_mrf_marginals_gibbs_path() {
    let mus = vec![vec![0.5, -0.2, -1.0], vec![-0.4, 0.1, 0.3]];
    // 4^12 configurations forces the Gibbs sampler
    let s = independent(12, &mus);
    let data = gen_mrf_with(&s, 30_000, 6, GibbsSettings { burn_in: 100, spacing: 1 }).unwrap();
    for i in [0, 1, 11] {
        let target = softmax(&mus[i % 2]);
        let freq = frequencies(data.column(i), 4);
        for (f, t) in freq.iter().zip(&target) {
            assert!((f - t).abs() < 0.015, "{freq:?} vs {target:?}");
        }
    }
}

#[test]
fn coupled_gibbs_pairs_match_enumeration() {
    // Enough variables to force the Gibbs path, coupled in one pair only so
    // the pair's exact table can be enumerated on its own.
    let mut big = MrfState::new(vec![3; 11]).unwrap();
    big.set_thresholds(0, vec![0.2, -0.5]).unwrap();
    big.set_thresholds(1, vec![-0.3, -0.1]).unwrap();
    big.set_edge(0, 1, 0.7);
    let data = gen_mrf(&big, 20_000, 8).unwrap();
    let mut pair = MrfState::new(vec![3, 3]).unwrap();
    pair.set_thresholds(0, vec![0.2, -0.5]).unwrap();
    pair.set_thresholds(1, vec![-0.3, -0.1]).unwrap();
    pair.set_edge(0, 1, 0.7);
    let exact = enumerate_mrf_joint(&pair).unwrap();
    let mut tv = 0.0;
    for a in 0..3u8 {
        for b in 0..3u8 {
            let f = data.rows().filter(|r| r[0] == a && r[1] == b).count() as f64 / 20_000.0;
            tv += (f - exact.prob(&[a, b])).abs() / 2.0;
        }
    }
    assert!(tv < 0.02, "total variation {tv}");
}

#[test]
fn pair_frequencies_match_exact_joint() {
    let mut s = MrfState::new(vec![3, 4]).unwrap();
    s.set_thresholds(0, vec![0.2, -0.5]).unwrap();
    s.set_thresholds(1, vec![-0.3, -0.1, -1.2]).unwrap();
    s.set_edge(0, 1, 0.45);
    let table = enumerate_mrf_joint(&s).unwrap();
    let data = gen_mrf(&s, N, 9).unwrap();
    let mut tv = 0.0;
    for k in 0..table.len() {
        let x = table.configuration(k);
        let f = data.rows().filter(|r| *r == &x[..]).count() as f64 / N as f64;
        tv += (f - table.probs()[k]).abs() / 2.0;
    }
    assert!(tv < 0.01, "total variation {tv}");
}

#[test]
fn exact_joint_is_permutation_symmetric() {
    let mut s = MrfState::new(vec![2, 3, 4]).unwrap();
    s.set_thresholds(0, vec![0.4]).unwrap();
    s.set_thresholds(1, vec![-0.2, 0.3]).unwrap();
    s.set_thresholds(2, vec![0.1, -0.6, 0.2]).unwrap();
    s.set_edge(0, 1, 0.8);
    s.set_edge(1, 2, -0.4);
    s.set_edge(0, 2, 0.25);
    // order (2, 0, 1)
    let perm = [2usize, 0, 1];
    let mut t = MrfState::new(perm.iter().map(|&i| s.n_categories()[i]).collect()).unwrap();
    for (new, &old) in perm.iter().enumerate() {
        t.set_thresholds(new, s.thresholds(old).to_vec()).unwrap();
    }
    for a in 0..3 {
        for b in a + 1..3 {
            let w = s.theta(perm[a], perm[b]);
            if w != 0.0 {
                t.set_edge(a, b, w);
            }
        }
    }
    let (js, jt) = (enumerate_mrf_joint(&s).unwrap(), enumerate_mrf_joint(&t).unwrap());
    assert!((js.probs().iter().sum::<f64>() - 1.0).abs() < 1e-12);
    for k in 0..js.len() {
        let x = js.configuration(k);
        let y: Vec<u8> = perm.iter().map(|&i| x[i]).collect();
        assert!((js.probs()[k] - jt.prob(&y)).abs() < 1e-14);
    }
}

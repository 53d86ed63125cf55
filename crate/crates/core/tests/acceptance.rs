//! Acceptance suite: one PASS/FAIL line per criterion. Run with
//! `cargo test -p ordinal-bayes --test acceptance`.

use std::fs;
use std::path::Path;
use std::time::Instant;

use ordinal_bayes::explore::{mood_median_test, significance_stars, Stars};
use ordinal_bayes::grm::{self, category_prob, covariate_effects, gelman_rubin, GrmPrior, ParamKind};
use ordinal_bayes::mcmc::McmcConfig;
use ordinal_bayes::mrf::{
    self, conditional_logprob, inclusion_bf10, inclusion_bf10_counts, median_probability_graph, MrfPrior, MrfState,
};
use ordinal_bayes::simulate::{enumerate_mrf_joint, gen_grm, gen_mrf, CovariateDist, GrmSimSpec, SimCovariate, SimItem};
use ordinal_bayes::survey::{clean, load_csv, CleaningPolicy, Codebook};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn grm_normalization() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha20Rng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let n_cat = rng.random_range(2..=7);
        let mut delta = vec![0.0];
        for _ in 1..n_cat - 1 {
            let last = *delta.last().unwrap();
            delta.push(last + rng.random_range(0.01..2.0));
        }
        let theta = rng.random_range(-5.0..5.0);
        let gamma = rng.random_range(-2.0f64..2.0).exp();
        let beta = rng.random_range(-3.0..3.0);
        let total: f64 = (1..=n_cat).map(|h| category_prob(theta, gamma, beta, &delta, h).unwrap()).sum();
        worst = worst.max((total - 1.0).abs());
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(worst <= 1e-12 && secs < 1.0, format!("max |sum - 1| = {worst:.2e}, {secs:.3} s"))
}

fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let (ma, mb) = (a.iter().sum::<f64>() / n, b.iter().sum::<f64>() / n);
    let cov: f64 = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let va: f64 = a.iter().map(|x| (x - ma).powi(2)).sum();
    let vb: f64 = b.iter().map(|y| (y - mb).powi(2)).sum();
    cov / (va * vb).sqrt()
}

fn grm_recovery() -> Outcome {
    let start = Instant::now();
    let gammas = [0.8, 1.0, 1.2, 1.5, 1.8, 0.9, 1.1, 1.4, 1.6, 2.0];
    let bern = CovariateDist::Bernoulli { p: 0.5 };
    let spec = GrmSimSpec {
        seed: 2024,
        n: 500,
        n_categories: 4,
        items: gammas
            .iter()
            .enumerate()
            .map(|(j, &gamma)| SimItem {
                name: format!("I{}", j + 1),
                beta: -1.5 + 1.5 * j as f64 / 9.0,
                gamma,
            })
            .collect(),
        delta: vec![0.0, 1.2, 2.4],
        covariates: vec![
            SimCovariate { name: "X1".into(), dist: bern.clone() },
            SimCovariate { name: "X2".into(), dist: bern },
        ],
        alpha: vec![1.0, -0.5],
    };
    let sim = gen_grm(&spec).unwrap();
    let data = sim.dataset.item_matrix().unwrap();
    let post = grm::fit(&data, &sim.design, &GrmPrior::default(), &McmcConfig::grm_default()).unwrap();
    let means: Vec<f64> = post.of_kind(ParamKind::Theta).map(|s| s.mean).collect();
    let r = pearson(&means, &sim.truth.theta);
    let effects = covariate_effects(&post);
    let signs = effects[0].mean > 0.0 && effects[1].mean < 0.0;
    let directions = effects.iter().all(|e| e.prob_direction() >= 0.9);
    let rhat = post.max_rhat().unwrap_or(f64::INFINITY);
    outcome(
        r >= 0.85 && signs && directions && rhat <= 1.1,
        format!(
            "corr = {r:.4}, alpha = ({:.3}, {:.3}), Pr(direction) = ({:.3}, {:.3}), max R-hat = {rhat:.4}, {:.1} s",
            effects[0].mean,
            effects[1].mean,
            effects[0].prob_direction(),
            effects[1].prob_direction(),
            start.elapsed().as_secs_f64()
        ),
    )
}

fn gelman_rubin_closed_form() -> Outcome {
    let r = gelman_rubin(&[vec![1.0, 2.0, 3.0], vec![1.0, 2.0, 3.0]]).unwrap();
    let err = (r - (2.0f64 / 3.0).sqrt()).abs();
    outcome(err <= 1e-12, format!("R-hat = {r}, |error| = {err:.2e}"))
}

fn mrf_oracle() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha20Rng::seed_from_u64(3);
    let mut worst: f64 = 0.0;
    let mut checked = 0;
    for _ in 0..20 {
        let mut s = MrfState::new(vec![4; 3]).unwrap();
        for i in 0..3 {
            s.set_thresholds(i, (0..3).map(|_| rng.random_range(-2.0..2.0)).collect()).unwrap();
        }
        for (i, j) in [(0, 1), (0, 2), (1, 2)] {
            s.set_edge(i, j, rng.random_range(-1.0..1.0));
        }
        let table = enumerate_mrf_joint(&s).unwrap();
        for k in 0..table.len() {
            let x = table.configuration(k);
            for i in 0..3 {
                for (c, p) in table.conditional(&x, i).into_iter().enumerate() {
                    let lp = conditional_logprob(&s, &x, i, c).unwrap();
                    worst = worst.max((p.ln() - lp).abs());
                    checked += 1;
                }
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        worst <= 1e-10 && secs < 1.0,
        format!("{checked} conditionals, max |error| = {worst:.2e}, {secs:.3} s"),
    )
}

fn auc(scores: &[f64], truth: &[bool]) -> f64 {
    let (mut wins, mut pairs) = (0.0, 0.0);
    for (s1, _) in scores.iter().zip(truth).filter(|(_, &t)| t) {
        for (s0, _) in scores.iter().zip(truth).filter(|(_, &t)| !t) {
            pairs += 1.0;
            wins += if s1 > s0 {
                1.0
            } else if s1 == s0 {
                0.5
            } else {
                0.0
            };
        }
    }
    wins / pairs
}

fn mrf_structure_recovery() -> Outcome {
    let start = Instant::now();
    let true_edges = [(0, 1, 1.2), (1, 2, -0.9), (3, 4, 1.5), (5, 6, -1.1), (7, 8, 0.8)];
    let mut s = MrfState::new(vec![3; 10]).unwrap();
    for i in 0..10 {
        s.set_thresholds(i, vec![0.3, -0.6]).unwrap();
    }
    for &(a, b, t) in &true_edges {
        s.set_edge(a, b, t);
    }
    let data = gen_mrf(&s, 1000, 77).unwrap();
    let post = mrf::fit(&data, &MrfPrior::default(), &McmcConfig::mrf_default()).unwrap();
    let scores: Vec<f64> = post.edges().iter().map(|e| e.inclusion_prob).collect();
    let truth: Vec<bool> = post
        .edges()
        .iter()
        .map(|e| true_edges.iter().any(|&(a, b, _)| (a, b) == (e.a, e.b)))
        .collect();
    let area = auc(&scores, &truth);
    let graph = median_probability_graph(&post, mrf::DEFAULT_BF_THRESHOLD).unwrap();
    let found = true_edges.iter().filter(|&&(a, b, _)| graph.contains(a, b)).count();
    outcome(
        area >= 0.9 && found >= 4,
        format!(
            "AUC = {area:.4}, {found}/5 true edges in the median probability graph ({} edges total), {:.1} s",
            graph.edges.len(),
            start.elapsed().as_secs_f64()
        ),
    )
}

fn bayes_factor_identity() -> Outcome {
    let counted = inclusion_bf10_counts(10, 11, 0.5).unwrap();
    let direct = inclusion_bf10(10.0 / 11.0, 0.5).unwrap();
    let mut rng = ChaCha20Rng::seed_from_u64(4);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let q: f64 = rng.random_range(0.001..0.999);
        let r: f64 = rng.random_range(0.001..0.999);
        let bf10 = inclusion_bf10(q, r).unwrap();
        let bf01 = ((1.0 - q) / q) / ((1.0 - r) / r);
        worst = worst.max((bf01 * bf10 - 1.0).abs());
    }
    outcome(
        counted == 10.0 && worst <= 1e-12,
        format!(
            "BF10 from 10 of 11 draws = {counted:?} (f64 input 10/11 gives {direct:?}), max |BF01*BF10 - 1| = {worst:.2e}"
        ),
    )
}

/// Independent 2 x k Pearson computation: median by sorting the integer
/// scores, expected counts from the margins.
fn oracle_chi_square(scores: &[u8], groups: &[usize], k: usize) -> f64 {
    let mut sorted = scores.to_vec();
    sorted.sort_unstable();
    let n = sorted.len();
    // twice the median keeps everything in integers
    let twice_median = if n % 2 == 1 {
        2 * sorted[n / 2] as u32
    } else {
        sorted[n / 2 - 1] as u32 + sorted[n / 2] as u32
    };
    let mut table = vec![[0.0f64; 2]; k];
    for (&s, &g) in scores.iter().zip(groups) {
        let above = 2 * s as u32 > twice_median;
        table[g][above as usize] += 1.0;
    }
    let row: [f64; 2] = [table.iter().map(|t| t[0]).sum(), table.iter().map(|t| t[1]).sum()];
    let mut chi = 0.0;
    for t in &table {
        let col = t[0] + t[1];
        for side in 0..2 {
            let e = row[side] * col / n as f64;
            if e > 0.0 {
                chi += (t[side] - e).powi(2) / e;
            }
        }
    }
    chi
}

fn mood_oracle() -> Outcome {
    let mut rng = ChaCha20Rng::seed_from_u64(5);
    let mut worst: f64 = 0.0;
    let mut datasets = 0;
    while datasets < 50 {
        let k = rng.random_range(2..=4);
        let n = rng.random_range(k * 2..40);
        let groups: Vec<usize> = (0..n).map(|i| if i < k { i } else { rng.random_range(0..k) }).collect();
        let scores: Vec<u8> = (0..n).map(|_| rng.random_range(1..=4)).collect();
        let result = mood_median_test(&scores.iter().map(|&s| Some(s as f64)).collect::<Vec<_>>(), &groups).unwrap();
        if result.degenerate {
            continue;
        }
        worst = worst.max((result.chi_square - oracle_chi_square(&scores, &groups, k)).abs());
        datasets += 1;
    }
    let cuts = [
        (0.0009999, Stars::Three),
        (0.001, Stars::Two),
        (0.0099999, Stars::Two),
        (0.01, Stars::One),
        (0.0499999, Stars::One),
        (0.05, Stars::None),
        (0.5, Stars::None),
    ];
    let stars_ok = cuts.iter().all(|&(p, s)| significance_stars(p).unwrap() == s);
    outcome(
        worst <= 1e-10 && stars_ok,
        format!("{datasets} datasets, max |chi-square error| = {worst:.2e}, star cut-points exact: {stars_ok}"),
    )
}

fn cli(args: &[&str]) -> i32 {
    let argv = std::iter::once("ordinal-bayes").chain(args.iter().copied());
    ordinal_bayes::cli::run(argv)
}

fn artifacts(manifest: &Path) -> Vec<(String, Vec<u8>)> {
    let m: serde_json::Value = serde_json::from_slice(&fs::read(manifest).unwrap()).unwrap();
    let dir = manifest.parent().unwrap();
    m["artifacts"]
        .as_array()
        .unwrap()
        .iter()
        .map(|a| a.as_str().unwrap().to_string())
        .map(|a| {
            let bytes = fs::read(dir.join(&a)).unwrap();
            (a, bytes)
        })
        .collect()
}

fn determinism() -> Outcome {
    let tmp = tempfile::tempdir().unwrap();
    let root = tmp.path();
    let data_dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("data");
    let s = |p: &Path| p.to_str().unwrap().to_string();
    let grm_spec = root.join("grm_spec.json");
    fs::write(
        &grm_spec,
        r#"{"seed": 8, "n": 120, "n_categories": 4,
            "items": [{"name": "A", "beta": -0.5, "gamma": 1.2}, {"name": "B", "beta": 0.0, "gamma": 0.8},
                      {"name": "C", "beta": 0.4, "gamma": 1.6}],
            "delta": [0.0, 1.0, 2.0],
            "covariates": [{"name": "G", "type": "bernoulli", "p": 0.5}],
            "alpha": [0.7]}"#,
    )
    .unwrap();
    let demo = s(&data_dir.join("demo_survey.csv"));
    let runs: Vec<(&str, Vec<String>, std::path::PathBuf)> = vec![
        (
            "simulate grm",
            vec!["simulate", "--model", "grm", "--spec", &s(&grm_spec), "--out", &s(&root.join("g.csv"))]
                .into_iter()
                .map(String::from)
                .collect(),
            root.join("g.manifest.json"),
        ),
        (
            "simulate mrf",
            vec![
                "simulate",
                "--model",
                "mrf",
                "--spec",
                &s(&data_dir.join("demo_mrf_spec.json")),
                "--codebook",
                &s(&data_dir.join("demo_codebook.json")),
                "--out",
                &s(&root.join("m.csv")),
            ]
            .into_iter()
            .map(String::from)
            .collect(),
            root.join("m.manifest.json"),
        ),
        (
            "fit-mrf",
            vec![
                "fit-mrf", "--data", &demo, "--items", "MRC,CHI,MNF,PrM,AIR", "--covariates", "G", "--iterations", "1000",
                "--burnin", "300", "--chains", "2", "--seed", "9", "--draws", "--out", &s(&root.join("mrf")),
            ]
            .into_iter()
            .map(String::from)
            .collect(),
            root.join("mrf").join("manifest.json"),
        ),
        (
            "fit-grm",
            vec![
                "fit-grm", "--data", &s(&root.join("g.csv")), "--codebook", &s(&root.join("g.codebook.json")),
                "--covariates", "G", "--iterations", "600", "--burnin", "200", "--thin", "2", "--seed", "9",
                "--draws", "--out", &s(&root.join("grm")),
            ]
            .into_iter()
            .map(String::from)
            .collect(),
            root.join("grm").join("manifest.json"),
        ),
    ];
    let mut failures = Vec::new();
    let mut compared = 0;
    for (label, args, manifest) in &runs {
        let argv: Vec<&str> = args.iter().map(String::as_str).collect();
        if cli(&argv) != 0 {
            failures.push(format!("{label}: initial run failed"));
            continue;
        }
        let target = if label.starts_with("simulate") {
            root.join(format!("{}-again.csv", label.replace(' ', "-")))
        } else {
            root.join(format!("{label}-again"))
        };
        if cli(&["rerun", "--manifest", &s(manifest), "--out", &s(&target)]) != 0 {
            failures.push(format!("{label}: rerun failed"));
            continue;
        }
        let again_manifest = if label.starts_with("simulate") {
            target.with_extension("manifest.json")
        } else {
            target.join("manifest.json")
        };
        let (a, b) = (artifacts(manifest), artifacts(&again_manifest));
        if a.len() != b.len() {
            failures.push(format!("{label}: artifact lists differ"));
            continue;
        }
        for ((name, x), (_, y)) in a.iter().zip(&b) {
            compared += 1;
            if x != y {
                failures.push(format!("{label}: {name} differs"));
            }
        }
    }
    outcome(
        failures.is_empty(),
        if failures.is_empty() {
            format!("{} runs replayed, {compared} artifacts byte-identical", runs.len())
        } else {
            failures.join("; ")
        },
    )
}

fn cleaning_arithmetic() -> Outcome {
    let cb = Codebook::demo();
    let mut rng = ChaCha20Rng::seed_from_u64(6);
    let header = cb.columns().join(",");
    let mut lines = vec![header];
    let violators: Vec<usize> = {
        let mut v = Vec::new();
        while v.len() < 24 {
            let r = rng.random_range(0..1419);
            if !v.contains(&r) {
                v.push(r);
            }
        }
        v
    };
    let covariates = "female,13-15,HIGH,MAND,employed,unemployed";
    for r in 0..1419 {
        let items: Vec<String> = match violators.iter().position(|&v| v == r) {
            // eight rows with nothing answered
            Some(k) if k < 8 => vec![String::new(); 16],
            // eight rows with one unanswered item
            Some(k) if k < 16 => (0..16).map(|j| if j == k { String::new() } else { "2".into() }).collect(),
            // eight straight-liners
            Some(_) => vec!["3".to_string(); 16],
            None => {
                let mut v: Vec<String> = (0..16).map(|_| rng.random_range(1..=4).to_string()).collect();
                v[0] = "1".into();
                v[1] = "4".into();
                v
            }
        };
        lines.push(format!("{},{covariates}", items.join(",")));
    }
    let tmp = tempfile::tempdir().unwrap();
    let path = tmp.path().join("survey.csv");
    fs::write(&path, lines.join("\n") + "\n").unwrap();
    let ds = load_csv(&path, &cb).unwrap();
    let policy = CleaningPolicy {
        max_straightline: Some(1.0),
        ..CleaningPolicy::default()
    };
    let (cleaned, report) = clean(&ds, &policy).unwrap();
    outcome(
        ds.n_rows() == 1419 && cleaned.n_rows() == 1395 && report.removed() == 24,
        format!(
            "{} -> {} rows (all-missing {}, missing {}, straight-lining {})",
            report.input_rows, report.output_rows, report.all_missing, report.missing, report.straightline
        ),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("GRM probability normalization", grm_normalization),
        ("GRM parameter recovery", grm_recovery),
        ("Gelman-Rubin closed form", gelman_rubin_closed_form),
        ("MRF oracle equivalence", mrf_oracle),
        ("MRF structure recovery", mrf_structure_recovery),
        ("Bayes factor identity", bayes_factor_identity),
        ("Mood's median test oracle", mood_oracle),
        ("Determinism", determinism),
        ("Cleaning arithmetic", cleaning_arithmetic),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let result = check();
        let tag = if result.pass { "PASS" } else { "FAIL" };
        println!("{tag} {name}: {}", result.detail);
        failed += !result.pass as usize;
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}

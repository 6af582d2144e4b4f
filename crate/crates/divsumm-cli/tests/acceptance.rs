//! Acceptance suite: one test per criterion, each printing a pass/fail line.
//!
//! Run with `cargo test -p divsumm-cli --test acceptance -- --nocapture` to
//! see every line. Criteria 7b and 8 need externally obtained datasets and
//! print SKIP when the corresponding environment variables are unset:
//!
//! - `DIVSUMM_TWITTERAAE_POOL`: annotated pool JSONL (dialect required)
//! - `DIVSUMM_TWITTER_W2V`: pretrained Twitter word vectors, text format
//! - `DIVSUMM_CLARITIN_CORPUS`: corpus JSONL with `group` labels
//! - `DIVSUMM_CLARITIN_REFERENCES`: comma-separated reference summary files
//! - `DIVSUMM_CLARITIN_CONTROL`: control-set JSONL

use std::collections::HashSet;
use std::io::Cursor;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use divsumm::diversify::{DsMatrix, ScoreSource};
use divsumm::evaluation::LabelKey;
use divsumm::summarizers::ScoreVector;
use divsumm::{
    balanced_pipeline, diversify_select, pagerank, rouge1, rouge_l,
    select_control_set, select_top_m, ControlSet, Corpus, EmbeddingStore, LabeledPool, Post,
    Scorer, Summary,
};
use rand::prelude::IndexedRandom;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn check(number: u32, name: &str, body: impl FnOnce() -> Result<(), String>) {
    match body() {
        Ok(()) => println!("criterion {number:02} ({name}): PASS"),
        Err(msg) => {
            println!("criterion {number:02} ({name}): FAIL - {msg}");
            panic!("criterion {number:02} ({name}) failed: {msg}");
        }
    }
}

fn skip(number: u32, name: &str, why: &str) {
    println!("criterion {number:02} ({name}): SKIP - {why}");
}

// ── Synthetic data builders ─────────────────────────────────────────────

/// A random corpus plus embeddings over its vocabulary and a balanced
/// two-label control set.
fn random_instance(
    rng: &mut ChaCha8Rng,
    n_posts: usize,
    vocab: usize,
    dim: usize,
) -> (Corpus, EmbeddingStore, ControlSet) {
    let tokens: Vec<String> = (0..vocab).map(|i| format!("w{i}")).collect();
    let mut lines = vec![format!("{} {dim}", vocab)];
    for tok in &tokens {
        let comps: Vec<String> = (0..dim)
            .map(|_| format!("{:.4}", rng.random_range(-1.0..1.0)))
            .collect();
        lines.push(format!("{tok} {}", comps.join(" ")));
    }
    let store = EmbeddingStore::from_text(Cursor::new(lines.join("\n"))).unwrap();

    let mut posts = Vec::with_capacity(n_posts);
    for i in 0..n_posts {
        let len = rng.random_range(3..=8);
        let text: Vec<&str> = (0..len)
            .map(|_| tokens.choose(rng).unwrap().as_str())
            .collect();
        posts.push(Post::new(i.to_string(), text.join(" "), None, None));
    }
    let corpus = Corpus::from_posts(posts).unwrap();

    let entries = (0..6)
        .map(|i| {
            let text = tokens.choose(rng).unwrap().clone();
            let label = if i % 2 == 0 { "left" } else { "right" };
            (
                Post::new(format!("ctl{i}"), text, Some(label.to_string()), None),
                label.to_string(),
            )
        })
        .collect();
    let control = ControlSet::new("random-control", entries).unwrap();
    (corpus, store, control)
}

fn summary_id_set(summary: &Summary) -> HashSet<String> {
    summary.entries.iter().map(|e| e.id.clone()).collect()
}

// ── Criterion 1: degeneracy equivalence at alpha = 0 ────────────────────

#[test]
fn criterion_01_degeneracy_equivalence() {
    check(1, "alpha=0 equals top-m for every scorer", || {
        let mut rng = ChaCha8Rng::seed_from_u64(101);
        for case in 0..50 {
            let started = Instant::now();
            let (corpus, store, control) = random_instance(&mut rng, 100, 60, 8);
            let external = {
                let scores: Vec<f64> = (0..corpus.n()).map(|_| rng.random_range(0.0..1.0)).collect();
                ScoreVector::new(scores, "external").unwrap()
            };
            let mut cases: Vec<(String, ScoreSource, ScoreVector)> = Scorer::ALL
                .iter()
                .map(|s| {
                    (
                        s.name().to_string(),
                        ScoreSource::Builtin(*s),
                        s.score(&corpus, Some(&store)).unwrap(),
                    )
                })
                .collect();
            cases.push(("external".into(), ScoreSource::External(&external), external.clone()));

            for (name, source, raw) in &cases {
                let balanced = balanced_pipeline(&corpus, &store, *source, &control, 0.0, 10)
                    .map_err(|e| format!("case {case} {name}: {e}"))?;
                let top = select_top_m(raw, &corpus, 10);
                if summary_id_set(&balanced) != summary_id_set(&top) {
                    return Err(format!(
                        "case {case} scorer {name}: sets differ: {:?} vs {:?}",
                        balanced.ids(),
                        top.ids()
                    ));
                }
            }
            let elapsed = started.elapsed();
            if elapsed > Duration::from_secs(1) {
                return Err(format!("case {case} took {elapsed:?} (budget 1 s)"));
            }
        }
        Ok(())
    });
}

// ── Criterion 2: brute-force round-robin oracle ─────────────────────────

/// Independent simulation of the selection rule: no sorting or cursors,
/// every column pick is a fresh scan.
#[allow(clippy::needless_range_loop)]
fn oracle_round_robin(ids: &[String], values: &[Vec<f64>], m: usize) -> Vec<(String, f64)> {
    let n = ids.len();
    let t = values.first().map_or(0, Vec::len);
    let target = m.min(n);
    let mut committed: HashSet<usize> = HashSet::new();
    let mut out: Vec<(String, f64)> = Vec::new();

    while out.len() < target {
        let mut round: Vec<(usize, f64)> = Vec::new();
        for z in 0..t {
            let mut best: Option<usize> = None;
            for p in 0..n {
                if committed.contains(&p) || round.iter().any(|&(q, _)| q == p) {
                    continue;
                }
                best = match best {
                    None => Some(p),
                    Some(b) => {
                        if values[p][z] > values[b][z]
                            || (values[p][z] == values[b][z] && ids[p] < ids[b])
                        {
                            Some(p)
                        } else {
                            Some(b)
                        }
                    }
                };
            }
            if let Some(b) = best {
                round.push((b, values[b][z]));
            }
        }
        if round.is_empty() {
            break;
        }
        let budget = target - out.len();
        if round.len() <= budget {
            for &(p, s) in &round {
                committed.insert(p);
                out.push((ids[p].clone(), s));
            }
        } else {
            let mut order: Vec<usize> = (0..round.len()).collect();
            order.sort_by(|&a, &b| {
                round[b]
                    .1
                    .partial_cmp(&round[a].1)
                    .unwrap()
                    .then(ids[round[a].0].cmp(&ids[round[b].0]))
            });
            let keep: HashSet<usize> = order[..budget].iter().copied().collect();
            for (pos, &(p, s)) in round.iter().enumerate() {
                if keep.contains(&pos) {
                    committed.insert(p);
                    out.push((ids[p].clone(), s));
                }
            }
        }
    }
    out
}

#[test]
fn criterion_02_selector_matches_bruteforce_oracle() {
    check(2, "round-robin selector vs exhaustive oracle", || {
        let mut rng = ChaCha8Rng::seed_from_u64(202);
        for case in 0..200 {
            let n = rng.random_range(1..=12usize);
            let t = rng.random_range(1..=3usize);
            let m = rng.random_range(1..=6usize);
            let quantized = case % 4 == 0;
            let ids: Vec<String> = (0..n).map(|i| i.to_string()).collect();
            let values: Vec<Vec<f64>> = (0..n)
                .map(|_| {
                    (0..t)
                        .map(|_| {
                            if quantized {
                                // Coarse grid forces ties through both code paths.
                                rng.random_range(0..5) as f64 * 0.25
                            } else {
                                rng.random_range(0.0..1.0)
                            }
                        })
                        .collect()
                })
                .collect();

            let ds = DsMatrix::from_values(ids.clone(), values.clone(), 0.5, "t", "c").unwrap();
            let got: Vec<(String, f64)> = diversify_select(&ds, m)
                .entries
                .into_iter()
                .map(|e| (e.id, e.score))
                .collect();
            let want = oracle_round_robin(&ids, &values, m);
            if got != want {
                return Err(format!(
                    "case {case} (n={n}, t={t}, m={m}, quantized={quantized}): \
                     got {got:?}, want {want:?}"
                ));
            }
        }
        Ok(())
    });
}

// ── Criterion 3: PageRank oracle ────────────────────────────────────────

/// Power iteration over the explicit column-stochastic transition matrix.
fn oracle_pagerank(weights: &[Vec<f64>], damping: f64, tol: f64, max_iter: usize) -> Vec<f64> {
    let n = weights.len();
    let nf = n as f64;
    let mut transition = vec![vec![0.0; n]; n];
    for i in 0..n {
        let total: f64 = weights[i].iter().sum();
        for j in 0..n {
            transition[j][i] = if total > 0.0 {
                weights[i][j] / total
            } else {
                1.0 / nf
            };
        }
    }
    let mut x = vec![1.0 / nf; n];
    for _ in 0..max_iter {
        let mut next = vec![0.0; n];
        for j in 0..n {
            let mut acc = 0.0;
            for i in 0..n {
                acc += transition[j][i] * x[i];
            }
            next[j] = (1.0 - damping) / nf + damping * acc;
        }
        let delta: f64 = x.iter().zip(&next).map(|(a, b)| (a - b).abs()).sum();
        x = next;
        if delta < tol {
            break;
        }
    }
    let total: f64 = x.iter().sum();
    for v in &mut x {
        *v /= total;
    }
    x
}

fn linf(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

#[test]
fn criterion_03_pagerank_oracle() {
    check(3, "graph scorers vs independent power iteration", || {
        let mut rng = ChaCha8Rng::seed_from_u64(303);
        for case in 0..100 {
            let weights: Vec<Vec<f64>> = (0..10)
                .map(|_| (0..10).map(|_| rng.random_range(0.0..3.0)).collect())
                .collect();
            let got = pagerank(&weights, 0.85, 1e-12, 20_000).map_err(|e| e.to_string())?;
            let want = oracle_pagerank(&weights, 0.85, 1e-12, 20_000);
            let err = linf(&got, &want);
            if err > 1e-6 {
                return Err(format!("case {case}: L-inf {err}"));
            }
        }

        // The full graph scorers against the oracle over independently
        // rebuilt weight matrices.
        for seed in 0..10u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
            let (corpus, _, _) = random_instance(&mut rng, 10, 12, 4);
            let n = corpus.n();

            // LexRank weights: cosine of tf-idf bags, recounted from posts.
            let word_sets: Vec<Vec<&str>> =
                corpus.posts().iter().map(|p| p.word_set()).collect();
            let df = |w: &str| word_sets.iter().filter(|s| s.contains(&w)).count() as f64;
            let tfidf_vec = |p: &Post| -> Vec<(String, f64)> {
                let mut out = Vec::new();
                for w in p.word_set() {
                    let tf = p.tokens.iter().filter(|t| t.as_str() == w).count() as f64;
                    out.push((w.to_string(), tf * (n as f64 / df(w)).ln()));
                }
                out
            };
            let vecs: Vec<Vec<(String, f64)>> = corpus.posts().iter().map(tfidf_vec).collect();
            let cos = |a: &[(String, f64)], b: &[(String, f64)]| -> f64 {
                let dot: f64 = a
                    .iter()
                    .map(|(w, x)| {
                        x * b
                            .iter()
                            .find(|(v, _)| v == w)
                            .map(|(_, y)| *y)
                            .unwrap_or(0.0)
                    })
                    .sum();
                let na: f64 = a.iter().map(|(_, x)| x * x).sum::<f64>().sqrt();
                let nb: f64 = b.iter().map(|(_, x)| x * x).sum::<f64>().sqrt();
                if na == 0.0 || nb == 0.0 {
                    0.0
                } else {
                    dot / (na * nb)
                }
            };
            let mut lex_weights = vec![vec![0.0; n]; n];
            for i in 0..n {
                for j in 0..n {
                    if i != j {
                        lex_weights[i][j] = cos(&vecs[i], &vecs[j]).clamp(0.0, 1.0);
                    }
                }
            }
            let want = oracle_pagerank(&lex_weights, 0.85, 1e-12, 20_000);
            let got = divsumm::score_lexrank(&corpus);
            let err = linf(got.scores(), &want);
            if err > 1e-6 {
                return Err(format!("lexrank seed {seed}: L-inf {err}"));
            }

            // TextRank weights: word overlap over log-length sum, floor 1.
            let mut text_weights = vec![vec![0.0; n]; n];
            for i in 0..n {
                for j in 0..n {
                    if i == j {
                        continue;
                    }
                    let inter = word_sets[i]
                        .iter()
                        .filter(|w| word_sets[j].contains(w))
                        .count() as f64;
                    let denom = (word_sets[i].len().max(1) as f64).ln()
                        + (word_sets[j].len().max(1) as f64).ln();
                    text_weights[i][j] = inter / denom.max(1.0);
                }
            }
            let want = oracle_pagerank(&text_weights, 0.85, 1e-12, 20_000);
            let got = divsumm::score_textrank(&corpus);
            let err = linf(got.scores(), &want);
            if err > 1e-6 {
                return Err(format!("textrank seed {seed}: L-inf {err}"));
            }
        }
        Ok(())
    });
}

// ── Criterion 4: ROUGE oracles ──────────────────────────────────────────

fn oracle_lcs(a: &[String], b: &[String], i: usize, j: usize, memo: &mut Vec<Vec<i64>>) -> usize {
    if i == a.len() || j == b.len() {
        return 0;
    }
    if memo[i][j] >= 0 {
        return memo[i][j] as usize;
    }
    let v = if a[i] == b[j] {
        1 + oracle_lcs(a, b, i + 1, j + 1, memo)
    } else {
        oracle_lcs(a, b, i + 1, j, memo).max(oracle_lcs(a, b, i, j + 1, memo))
    };
    memo[i][j] = v as i64;
    v
}

#[test]
fn criterion_04_rouge_oracles() {
    check(4, "rouge-1/rouge-L vs independent oracles", || {
        // Frozen worked examples first.
        let c: Vec<String> = ["a", "b", "c"].iter().map(|s| s.to_string()).collect();
        let r: Vec<String> = ["a", "d"].iter().map(|s| s.to_string()).collect();
        let s = rouge1(&c, &r);
        if (s.f - 0.4).abs() > 1e-12 {
            return Err(format!("worked rouge-1 example: f = {}", s.f));
        }
        let c: Vec<String> = ["a", "b", "c", "d"].iter().map(|s| s.to_string()).collect();
        let r: Vec<String> = ["a", "c", "d", "b"].iter().map(|s| s.to_string()).collect();
        let s = rouge_l(&c, &r);
        if (s.recall - 0.75).abs() > 1e-15 || (s.precision - 0.75).abs() > 1e-15 {
            return Err(format!("worked rouge-L example: {s:?}"));
        }

        let mut rng = ChaCha8Rng::seed_from_u64(404);
        let alphabet = ["a", "b", "c", "d", "e", "f"];
        for case in 0..100 {
            let len_c = rng.random_range(0..=30usize);
            let len_r = rng.random_range(0..=30usize);
            let c: Vec<String> = (0..len_c)
                .map(|_| alphabet.choose(&mut rng).unwrap().to_string())
                .collect();
            let r: Vec<String> = (0..len_r)
                .map(|_| alphabet.choose(&mut rng).unwrap().to_string())
                .collect();

            // Unigram oracle: direct per-type counting.
            let mut overlap = 0usize;
            for tok in alphabet {
                let in_c = c.iter().filter(|t| t.as_str() == tok).count();
                let in_r = r.iter().filter(|t| t.as_str() == tok).count();
                overlap += in_c.min(in_r);
            }
            let want_recall = if r.is_empty() { 0.0 } else { overlap as f64 / r.len() as f64 };
            let want_precision = if c.is_empty() { 0.0 } else { overlap as f64 / c.len() as f64 };
            let want_f = if want_recall + want_precision == 0.0 {
                0.0
            } else {
                2.0 * want_recall * want_precision / (want_recall + want_precision)
            };
            let got = rouge1(&c, &r);
            if got.recall != want_recall || got.precision != want_precision || got.f != want_f {
                return Err(format!("case {case}: rouge-1 {got:?} vs ({want_recall}, {want_precision}, {want_f})"));
            }

            // LCS oracle: memoized recursion.
            let mut memo = vec![vec![-1i64; r.len().max(1)]; c.len().max(1)];
            let lcs = if c.is_empty() || r.is_empty() {
                0
            } else {
                oracle_lcs(&c, &r, 0, 0, &mut memo)
            };
            let want_recall = if r.is_empty() { 0.0 } else { lcs as f64 / r.len() as f64 };
            let want_precision = if c.is_empty() { 0.0 } else { lcs as f64 / c.len() as f64 };
            let got = rouge_l(&c, &r);
            if got.recall != want_recall || got.precision != want_precision {
                return Err(format!("case {case}: rouge-L {got:?} vs ({want_recall}, {want_precision})"));
            }
        }
        Ok(())
    });
}

// ── Criteria 5 and 6: synthetic diversity fixture ───────────────────────

/// 150 majority posts clustered along one axis, 50 minority posts along an
/// orthogonal axis, plus a balanced 6-item control set.
fn diversity_fixture() -> (Corpus, EmbeddingStore, ControlSet) {
    let majority = 150;
    let minority = 50;
    let mut lines = vec![format!("{} 4", majority + minority + 6)];
    let mut posts = Vec::new();
    let jitter = |i: usize| 0.02 * ((i * 37 % 101) as f64 / 101.0);
    for i in 0..majority {
        lines.push(format!("maj{i} 1 {:.6} 0 0", jitter(i)));
        posts.push(Post::new(
            format!("m{i:03}"),
            format!("maj{i}"),
            Some("majority".into()),
            None,
        ));
    }
    for i in 0..minority {
        lines.push(format!("min{i} 0 0 1 {:.6}", jitter(i)));
        posts.push(Post::new(
            format!("n{i:03}"),
            format!("min{i}"),
            Some("minority".into()),
            None,
        ));
    }
    let mut entries = Vec::new();
    for k in 0..3 {
        lines.push(format!("cmaj{k} 1 {:.6} 0 0", 0.01 * k as f64));
        lines.push(format!("cmin{k} 0 0 1 {:.6}", 0.01 * k as f64));
        entries.push((
            Post::new(format!("cm{k}"), format!("cmaj{k}"), Some("majority".into()), None),
            "majority".to_string(),
        ));
        entries.push((
            Post::new(format!("cn{k}"), format!("cmin{k}"), Some("minority".into()), None),
            "minority".to_string(),
        ));
    }
    let corpus = Corpus::from_posts(posts).unwrap();
    let store = EmbeddingStore::from_text(Cursor::new(lines.join("\n"))).unwrap();
    let control = ControlSet::new("fixture-control", entries).unwrap();
    (corpus, store, control)
}

fn minority_fraction(summary: &Summary, corpus: &Corpus) -> f64 {
    divsumm::dialect_fraction(summary, corpus, LabelKey::Dialect)
        .unwrap()
        .fractions
        .get("minority")
        .copied()
        .unwrap_or(0.0)
}

#[test]
fn criterion_05_synthetic_diversity_improvement() {
    check(5, "balanced beats blackbox by >= 0.15 minority fraction", || {
        let (corpus, store, control) = diversity_fixture();
        let m = 20;
        let raw = Scorer::Centroid.score(&corpus, Some(&store)).unwrap();
        let blackbox = select_top_m(&raw, &corpus, m);
        let f_blackbox = minority_fraction(&blackbox, &corpus);
        // The fixture only makes sense if the scorer prefers the majority.
        if f_blackbox > 0.1 {
            return Err(format!("fixture broke: blackbox minority fraction {f_blackbox}"));
        }
        let balanced = balanced_pipeline(
            &corpus,
            &store,
            ScoreSource::Builtin(Scorer::Centroid),
            &control,
            0.5,
            m,
        )
        .map_err(|e| e.to_string())?;
        let f_balanced = minority_fraction(&balanced, &corpus);
        if f_balanced - f_blackbox < 0.15 {
            return Err(format!(
                "improvement {:.3} (balanced {f_balanced:.3}, blackbox {f_blackbox:.3})",
                f_balanced - f_blackbox
            ));
        }
        Ok(())
    });
}

#[test]
fn criterion_06_alpha_monotone_trend() {
    check(6, "minority fraction non-decreasing in alpha", || {
        let (corpus, store, control) = diversity_fixture();
        let mut fractions = Vec::new();
        for alpha in [0.0, 0.25, 0.5, 0.75, 1.0] {
            let summary = balanced_pipeline(
                &corpus,
                &store,
                ScoreSource::Builtin(Scorer::Centroid),
                &control,
                alpha,
                20,
            )
            .map_err(|e| e.to_string())?;
            fractions.push(minority_fraction(&summary, &corpus));
        }
        let mut inversions = 0;
        for w in fractions.windows(2) {
            if w[1] < w[0] - 1e-12 {
                inversions += 1;
                if w[0] - w[1] > 0.02 {
                    return Err(format!("inversion of {:.3} in {fractions:?}", w[0] - w[1]));
                }
            }
        }
        if inversions > 1 {
            return Err(format!("{inversions} inversions in {fractions:?}"));
        }
        Ok(())
    });
}

// ── Criterion 7: control-set selection ──────────────────────────────────

fn orthogonal_pool(per_label: usize) -> (Vec<Post>, EmbeddingStore) {
    let mut lines = vec![format!("{} 4", 2 * per_label)];
    let mut posts = Vec::new();
    let jitter = |i: usize| 0.02 * ((i * 53 % 97) as f64 / 97.0);
    for i in 0..per_label {
        lines.push(format!("p{i} 1 {:.6} 0 0", jitter(i)));
        posts.push(Post::new(format!("p{i:03}"), format!("p{i}"), Some("one".into()), None));
    }
    for i in 0..per_label {
        lines.push(format!("q{i} 0 0 1 {:.6}", jitter(i)));
        posts.push(Post::new(format!("q{i:03}"), format!("q{i}"), Some("two".into()), None));
    }
    let store = EmbeddingStore::from_text(Cursor::new(lines.join("\n"))).unwrap();
    (posts, store)
}

#[test]
fn criterion_07_control_set_selection() {
    check(7, "separable pool AUC >= 0.95, shuffled pool ~ 0.5", || {
        let (posts, store) = orthogonal_pool(50);
        let pool = LabeledPool::new(posts.clone()).map_err(|e| e.to_string())?;
        let report =
            select_control_set(&pool, 10, 5, 50, &store, 707).map_err(|e| e.to_string())?;
        if report.auc < 0.95 {
            return Err(format!("separable pool mean AUC {}", report.auc));
        }
        if !report.candidate.is_balanced() {
            return Err("chosen set is not balanced".into());
        }

        // Shuffling labels breaks the geometry/label link.
        let mut rng = ChaCha8Rng::seed_from_u64(708);
        let mut labels: Vec<Option<String>> = posts.iter().map(|p| p.dialect.clone()).collect();
        labels.shuffle(&mut rng);
        let shuffled: Vec<Post> = posts
            .iter()
            .zip(labels)
            .map(|(p, dialect)| Post::new(p.id.clone(), p.raw_text.clone(), dialect, None))
            .collect();
        let pool = LabeledPool::new(shuffled).map_err(|e| e.to_string())?;
        let report =
            select_control_set(&pool, 10, 5, 50, &store, 707).map_err(|e| e.to_string())?;
        if !(0.4..=0.6).contains(&report.auc) {
            return Err(format!("shuffled pool mean AUC {}", report.auc));
        }
        Ok(())
    });

    // Optional real-data reproduction over an annotated pool.
    match (
        std::env::var("DIVSUMM_TWITTERAAE_POOL"),
        std::env::var("DIVSUMM_TWITTER_W2V"),
    ) {
        (Ok(pool_path), Ok(vec_path)) => {
            check(7, "annotated-pool AUC (optional, tolerance 0.1)", || {
                let corpus = Corpus::from_jsonl(std::io::BufReader::new(
                    std::fs::File::open(&pool_path).map_err(|e| e.to_string())?,
                ))
                .map_err(|e| e.to_string())?;
                let pool = LabeledPool::from_corpus(&corpus).map_err(|e| e.to_string())?;
                let store = EmbeddingStore::from_text(std::io::BufReader::new(
                    std::fs::File::open(&vec_path).map_err(|e| e.to_string())?,
                ))
                .map_err(|e| e.to_string())?;
                let report =
                    select_control_set(&pool, 28, 5, 50, &store, 0).map_err(|e| e.to_string())?;
                let max_auc = report
                    .fold_scores
                    .iter()
                    .map(|f| f.max_auc)
                    .fold(f64::NEG_INFINITY, f64::max);
                if max_auc < 0.8 - 0.1 {
                    return Err(format!("max AUC {max_auc}"));
                }
                if report.auc < 0.65 - 0.1 {
                    return Err(format!("mean AUC {}", report.auc));
                }
                Ok(())
            });
        }
        _ => skip(
            7,
            "annotated-pool AUC (optional)",
            "set DIVSUMM_TWITTERAAE_POOL and DIVSUMM_TWITTER_W2V to enable",
        ),
    }
}

// ── Criterion 8: optional dataset reproduction ──────────────────────────

#[test]
fn criterion_08_optional_dataset_reproduction() {
    let vars = (
        std::env::var("DIVSUMM_CLARITIN_CORPUS"),
        std::env::var("DIVSUMM_CLARITIN_REFERENCES"),
        std::env::var("DIVSUMM_CLARITIN_CONTROL"),
        std::env::var("DIVSUMM_TWITTER_W2V"),
    );
    let (corpus_path, refs, control_path, vec_path) = match vars {
        (Ok(a), Ok(b), Ok(c), Ok(d)) => (a, b, c, d),
        _ => {
            skip(
                8,
                "dataset reproduction (optional, non-blocking)",
                "set DIVSUMM_CLARITIN_CORPUS/REFERENCES/CONTROL and DIVSUMM_TWITTER_W2V to enable",
            );
            return;
        }
    };
    check(8, "centroid-balanced m=100 on external data", || {
        let open = |p: &str| {
            std::fs::File::open(p)
                .map(std::io::BufReader::new)
                .map_err(|e| format!("{p}: {e}"))
        };
        let corpus = Corpus::from_jsonl(open(&corpus_path)?).map_err(|e| e.to_string())?;
        let store = EmbeddingStore::from_text(open(&vec_path)?).map_err(|e| e.to_string())?;
        let control =
            ControlSet::from_jsonl("claritin", open(&control_path)?).map_err(|e| e.to_string())?;
        let summary = balanced_pipeline(
            &corpus,
            &store,
            ScoreSource::Builtin(Scorer::Centroid),
            &control,
            0.5,
            100,
        )
        .map_err(|e| e.to_string())?;

        let report = divsumm::dialect_fraction(&summary, &corpus, LabelKey::Group)
            .map_err(|e| e.to_string())?;
        let men = report.fractions.get("m").or(report.fractions.get("male")).copied().unwrap_or(0.0);
        if (men - 0.44).abs() > 0.08 {
            return Err(format!("fraction of posts by men {men:.3}, expected 0.44 +/- 0.08"));
        }

        let candidate = summary.tokens(&corpus).map_err(|e| e.to_string())?;
        let mut references = Vec::new();
        for path in refs.split(',') {
            use std::io::BufRead;
            let mut tokens = Vec::new();
            for line in open(path.trim())?.lines() {
                let line = line.map_err(|e| e.to_string())?;
                tokens.extend(divsumm::tokenize(&divsumm::normalize_post(&line)));
            }
            references.push(tokens);
        }
        let scores = divsumm::rouge_multi(&candidate, &references).map_err(|e| e.to_string())?;
        if (scores.r1_recall - 0.58).abs() > 0.10 {
            return Err(format!("rouge-1 recall {:.3}, expected 0.58 +/- 0.10", scores.r1_recall));
        }
        Ok(())
    });
}

// ── Criterion 9: CLI determinism ────────────────────────────────────────

fn run_cli(args: &[&str], dir: &Path) -> (Vec<u8>, i32) {
    let out = Command::new(env!("CARGO_BIN_EXE_divsumm"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs");
    (out.stdout, out.status.code().unwrap_or(-1))
}

#[test]
fn criterion_09_cli_determinism() {
    check(9, "fixed seed gives byte-identical CLI output", || {
        let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
        let dir = dir.path();

        // Fixtures: a labeled corpus, vocabulary vectors, a control set.
        let mut corpus = String::new();
        let mut vecs = vec![format!("{} 4", 40)];
        for i in 0..20 {
            corpus.push_str(&format!(
                "{{\"id\":\"a{i:02}\",\"text\":\"alpha{i} common\",\"dialect\":\"d1\"}}\n"
            ));
            vecs.push(format!("alpha{i} 1 {:.4} 0 0", 0.01 * i as f64));
        }
        for i in 0..20 {
            corpus.push_str(&format!(
                "{{\"id\":\"b{i:02}\",\"text\":\"beta{i} common\",\"dialect\":\"d2\"}}\n"
            ));
            vecs.push(format!("beta{i} 0 0 1 {:.4}", 0.01 * i as f64));
        }
        std::fs::write(dir.join("corpus.jsonl"), &corpus).map_err(|e| e.to_string())?;
        std::fs::write(dir.join("vecs.txt"), vecs.join("\n")).map_err(|e| e.to_string())?;
        std::fs::write(
            dir.join("cs.jsonl"),
            "{\"id\":\"c1\",\"text\":\"alpha0\",\"dialect\":\"d1\"}\n\
             {\"id\":\"c2\",\"text\":\"beta0\",\"dialect\":\"d2\"}\n",
        )
        .map_err(|e| e.to_string())?;
        std::fs::write(dir.join("ref.txt"), "alpha0 common\nbeta3 common\n")
            .map_err(|e| e.to_string())?;

        let commands: Vec<Vec<&str>> = vec![
            vec![
                "summarize", "--corpus", "corpus.jsonl", "--algorithm", "centroid",
                "--size", "8", "--embeddings", "vecs.txt", "--control-set", "cs.jsonl",
                "--alpha", "0.5", "--seed", "123", "--output", "summ.json",
            ],
            vec![
                "evaluate", "--summary", "summ.json", "--reference", "ref.txt",
                "--corpus", "corpus.jsonl", "--seed", "123",
            ],
            vec![
                "select-control-set", "--pool", "corpus.jsonl", "--embeddings", "vecs.txt",
                "--control-size", "4", "--folds", "3", "--trials", "5", "--seed", "123",
                "--control-set-out", "chosen.jsonl", "--output", "report.json",
            ],
            vec![
                "experiment", "--corpus", "corpus.jsonl", "--embeddings", "vecs.txt",
                "--control-set", "cs.jsonl", "--minority-label", "d2",
                "--collection-size", "20", "--repetitions", "3", "--sizes", "5,10",
                "--alphas", "0.0,0.5", "--compositions", "0.25,0.5", "--seed", "123",
                "--output", "exp.csv",
            ],
        ];
        let outputs = ["summ.json", "report.json", "chosen.jsonl", "exp.csv"];

        let mut first_stdout: Vec<Vec<u8>> = Vec::new();
        let mut first_files: Vec<Vec<u8>> = Vec::new();
        for round in 0..2 {
            for (k, cmd) in commands.iter().enumerate() {
                let (stdout, code) = run_cli(cmd, dir);
                if code != 0 {
                    return Err(format!("command {k} exited {code}"));
                }
                if round == 0 {
                    first_stdout.push(stdout);
                } else if first_stdout[k] != stdout {
                    return Err(format!("command {k}: stdout differs between runs"));
                }
            }
            for (k, name) in outputs.iter().enumerate() {
                let bytes = std::fs::read(dir.join(name)).map_err(|e| e.to_string())?;
                if round == 0 {
                    first_files.push(bytes);
                } else if first_files[k] != bytes {
                    return Err(format!("output file {name} differs between runs"));
                }
            }
        }
        Ok(())
    });
}

// ── Criterion 10: selection-time scaling ────────────────────────────────

fn synthetic_ds(n: usize, t: usize, seed: u64) -> DsMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ids: Vec<String> = (0..n).map(|i| format!("{i:07}")).collect();
    let values: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..t).map(|_| rng.random_range(0.0..1.0)).collect())
        .collect();
    DsMatrix::from_values(ids, values, 0.5, "timing", "timing").unwrap()
}

fn min_selection_time(ds: &DsMatrix, m: usize, runs: usize) -> Duration {
    let mut best = Duration::MAX;
    for _ in 0..runs {
        let started = Instant::now();
        let summary = diversify_select(ds, m);
        let elapsed = started.elapsed();
        assert_eq!(summary.entries.len(), m);
        best = best.min(elapsed);
    }
    best
}

#[test]
fn criterion_10_complexity_contract() {
    check(10, "selection time scales ~ |S| log |S|", || {
        let (t, m) = (8, 50);
        let base = synthetic_ds(50_000, t, 1010);
        let double = synthetic_ds(100_000, t, 1011);
        let quad = synthetic_ds(200_000, t, 1012);

        // Warm-up, then min-of-5 to suppress scheduler noise.
        let _ = min_selection_time(&base, m, 1);
        let t_base = min_selection_time(&base, m, 5);
        let t_double = min_selection_time(&double, m, 5);
        let t_quad = min_selection_time(&quad, m, 5);

        let r2 = t_double.as_secs_f64() / t_base.as_secs_f64();
        let r4 = t_quad.as_secs_f64() / t_base.as_secs_f64();
        println!(
            "  selection times: |S|=50k {t_base:?}, 100k {t_double:?} (x{r2:.2}), \
             200k {t_quad:?} (x{r4:.2})"
        );
        if r4 > 5.0 {
            return Err(format!("quadrupling |S| scaled time by {r4:.2} (> 5)"));
        }
        if r2 > 2.4 {
            return Err(format!("doubling |S| scaled time by {r2:.2} (> 2.4)"));
        }
        Ok(())
    });
}

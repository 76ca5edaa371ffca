use proptest::prelude::*;

use revkit_core::metrics::bleu::sentence_bleu;
use revkit_core::metrics::distance::{edit_distance, levenshtein, DistanceUnit};
use revkit_core::metrics::entity_grid::{build_grid, entity_grid_score};
use revkit_core::metrics::fkgl::{fkgl, fkgl_from_counts, readability_counts};
use revkit_core::metrics::lm::{LanguageModel, NgramLm, DEFAULT_DISCOUNT};
use revkit_core::metrics::rouge::rouge;
use revkit_core::metrics::sari::sari_tokens;
use revkit_core::metrics::slor::slor_tokens;
use revkit_core::metrics::{chrf, delta_report, evaluate_item, EvalOptions, Metric};

// ---- brute-force n-gram helpers -------------------------------------------

fn grams(t: &[&str], n: usize) -> Vec<Vec<String>> {
    let mut out = Vec::new();
    let mut i = 0;
    while i + n <= t.len() {
        out.push(t[i..i + n].iter().map(|s| s.to_string()).collect());
        i += 1;
    }
    out
}

fn count(list: &[Vec<String>], g: &[String]) -> usize {
    list.iter().filter(|x| x.as_slice() == g).count()
}

fn distinct(lists: &[&[Vec<String>]]) -> Vec<Vec<String>> {
    let mut out: Vec<Vec<String>> = Vec::new();
    for l in lists {
        for g in l.iter() {
            if !out.contains(g) {
                out.push(g.clone());
            }
        }
    }
    out
}

fn div(a: f64, b: f64) -> f64 {
    if b == 0.0 {
        0.0
    } else {
        a / b
    }
}

fn harmonic(p: f64, r: f64) -> f64 {
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

/// SARI by enumerating every distinct n-gram of source, prediction and references.
fn sari_oracle(src: &[&str], pred: &[&str], refs: &[Vec<&str>]) -> (f64, f64, f64, f64) {
    let nr = refs.len();
    let (mut keep, mut del, mut add) = (0.0, 0.0, 0.0);
    for n in 1..=4 {
        let s = grams(src, n);
        let c = grams(pred, n);
        let r: Vec<Vec<String>> = refs.iter().flat_map(|x| grams(x, n)).collect();
        let universe = distinct(&[&s, &c, &r]);
        let (mut kp, mut kpn, mut kr, mut krn, mut dp, mut dpn) = (0.0, 0, 0.0, 0, 0.0, 0);
        let (mut added, mut wanted, mut good_add) = (0, 0, 0);
        for g in &universe {
            let (sc, cc, rc) = (count(&s, g) * nr, count(&c, g) * nr, count(&r, g));
            let kept = sc.min(cc);
            let kept_good = kept.min(rc);
            let keep_all = sc.min(rc);
            if kept > 0 {
                kp += kept_good as f64 / kept as f64;
                kpn += 1;
            }
            if keep_all > 0 {
                kr += kept_good as f64 / keep_all as f64;
                krn += 1;
            }
            let deleted = sc.saturating_sub(cc);
            if deleted > 0 {
                let del_all = sc.saturating_sub(rc);
                dp += deleted.min(del_all) as f64 / deleted as f64;
                dpn += 1;
            }
            if sc == 0 && cc > 0 {
                added += 1;
                if rc > 0 {
                    good_add += 1;
                }
            }
            if sc == 0 && rc > 0 {
                wanted += 1;
            }
        }
        keep += harmonic(div(kp, kpn as f64), div(kr, krn as f64));
        del += div(dp, dpn as f64);
        add += harmonic(div(good_add as f64, added as f64), div(good_add as f64, wanted as f64));
    }
    let (k, d, a) = (25.0 * keep, 25.0 * del, 25.0 * add);
    ((k + d + a) / 3.0, a, d, k)
}

fn words() -> impl Strategy<Value = Vec<&'static str>> {
    prop::collection::vec(prop::sample::select(vec!["a", "b", "c", "d", "e"]), 0..=8)
}

proptest! {
    #[test]
    fn sari_matches_enumeration(src in words(), pred in words(), refs in prop::collection::vec(words(), 1..=3)) {
        let got = sari_tokens(&src, &pred, &refs).unwrap();
        let (s, a, d, k) = sari_oracle(&src, &pred, &refs);
        prop_assert!((got.sari - s).abs() < 1e-9);
        prop_assert!((got.add - a).abs() < 1e-9);
        prop_assert!((got.del - d).abs() < 1e-9);
        prop_assert!((got.keep - k).abs() < 1e-9);
        prop_assert!((got.sari - (got.add + got.del + got.keep) / 3.0).abs() < 1e-9);
        for v in [got.sari, got.add, got.del, got.keep] {
            prop_assert!((0.0..=100.0).contains(&v));
        }
        let mut rev = refs.clone();
        rev.reverse();
        prop_assert!((sari_tokens(&src, &pred, &rev).unwrap().sari - got.sari).abs() < 1e-9);
    }
}

#[test]
fn no_edit_baseline_has_zero_add_and_delete() {
    let src = ["the", "old", "house", "was", "very", "big"];
    let refs = vec![vec!["the", "house", "was", "big"]];
    let s = sari_tokens(&src, &src, &refs).unwrap();
    assert_eq!((s.add, s.del), (0.0, 0.0));
    assert!(s.keep < 100.0);
}

#[test]
fn prediction_equal_to_reference() {
    let src = ["a", "b", "c", "d", "e", "f", "g", "h"];
    let reference = vec!["a", "x", "c", "d", "y", "f", "g", "h"];
    let s = sari_tokens(&src, &reference, &[reference.clone()]).unwrap();
    assert_eq!(s.add, 100.0);
    assert_eq!(s.del, 100.0);
    let (o, _, _, _) = sari_oracle(&src, &reference, &[reference.clone()]);
    assert!((s.sari - o).abs() < 1e-9);
}

// ---- BLEU -------------------------------------------------------------------

fn bleu_oracle(hyp: &[&str], reference: &[&str]) -> f64 {
    let mut log_sum = 0.0;
    for n in 1..=4 {
        let h = grams(hyp, n);
        let r = grams(reference, n);
        let mut matched = 0;
        for g in distinct(&[&h]) {
            matched += count(&h, &g).min(count(&r, &g));
        }
        let (m, t) = if n == 1 { (matched, h.len()) } else { (matched + 1, h.len() + 1) };
        if m == 0 {
            return 0.0;
        }
        log_sum += (m as f64 / t as f64).ln();
    }
    let bp = if hyp.len() < reference.len() {
        (1.0 - reference.len() as f64 / hyp.len() as f64).exp()
    } else {
        1.0
    };
    100.0 * bp * (log_sum / 4.0).exp()
}

#[test]
fn bleu_examples() {
    assert!((sentence_bleu("the cat sat on the mat", &["the cat sat on the mat"]).unwrap() - 100.0).abs() < 1e-9);
    assert_eq!(sentence_bleu("a b c", &["x y z"]).unwrap(), 0.0);
    let hyp = ["the", "cat", "sat", "on", "the", "mat"];
    let reference = ["the", "cat", "sat", "on", "a", "mat"];
    let got = sentence_bleu(&hyp.join(" "), &[&reference.join(" ")]).unwrap();
    // p1 = 5/6, p2 = 4/6, p3 = 3/5, p4 = 2/4 after +1 smoothing
    let expected = 100.0 * ((5.0f64 / 6.0) * (4.0 / 6.0) * (3.0 / 5.0) * (2.0 / 4.0)).powf(0.25);
    assert!((got - expected).abs() < 1e-9);
    assert!((got - bleu_oracle(&hyp, &reference)).abs() < 1e-9);
}

proptest! {
    #[test]
    fn bleu_matches_oracle(h in words(), r in words()) {
        prop_assume!(!h.is_empty());
        let got = sentence_bleu(&h.join(" "), &[&r.join(" ")]).unwrap();
        prop_assert!((got - bleu_oracle(&h, &r)).abs() < 1e-9);
        prop_assert!((0.0..=100.0 + 1e-9).contains(&got));
    }

    #[test]
    fn bleu_and_rouge_ignore_reference_order(h in words(), a in words(), b in words()) {
        prop_assume!(!h.is_empty());
        let (h, a, b) = (h.join(" "), a.join(" "), b.join(" "));
        let x = sentence_bleu(&h, &[&a, &b]).unwrap();
        let y = sentence_bleu(&h, &[&b, &a]).unwrap();
        prop_assert!((x - y).abs() < 1e-9);
        let opts = EvalOptions { metrics: vec![Metric::Rouge], ..Default::default() };
        let r1 = evaluate_item("", &h, &[&a, &b], &opts).unwrap();
        let r2 = evaluate_item("", &h, &[&b, &a], &opts).unwrap();
        prop_assert_eq!(r1.rouge_l, r2.rouge_l);
    }
}

// ---- ROUGE ------------------------------------------------------------------

fn lcs_table(a: &[&str], b: &[&str]) -> usize {
    let mut t = vec![vec![0; b.len() + 1]; a.len() + 1];
    for i in 1..=a.len() {
        for j in 1..=b.len() {
            t[i][j] = if a[i - 1] == b[j - 1] { t[i - 1][j - 1] + 1 } else { t[i - 1][j].max(t[i][j - 1]) };
        }
    }
    t[a.len()][b.len()]
}

#[test]
fn rouge_examples() {
    let s = rouge("a b c d", "a b c d");
    assert_eq!((s.r1, s.r2, s.rl), (100.0, 100.0, 100.0));
    let s = rouge("a b", "c d");
    assert_eq!((s.r1, s.r2, s.rl), (0.0, 0.0, 0.0));
    assert!((rouge("a b c d", "a c d b").rl - 75.0).abs() < 1e-9);
}

proptest! {
    #[test]
    fn rouge_l_matches_lcs_table(a in words(), b in words()) {
        prop_assume!(!a.is_empty() && !b.is_empty());
        let l = lcs_table(&a, &b) as f64;
        let expected = if l == 0.0 { 0.0 } else {
            let (p, r) = (l / a.len() as f64, l / b.len() as f64);
            100.0 * 2.0 * p * r / (p + r)
        };
        let got = rouge(&a.join(" "), &b.join(" "));
        prop_assert!((got.rl - expected).abs() < 1e-9);
        for v in [got.r1, got.r2, got.rl] {
            prop_assert!((0.0..=100.0 + 1e-9).contains(&v));
        }
    }
}

// ---- edit distance ----------------------------------------------------------

fn lev_oracle(a: &[char], b: &[char]) -> usize {
    if a.is_empty() {
        return b.len();
    }
    if b.is_empty() {
        return a.len();
    }
    let sub = lev_oracle(&a[1..], &b[1..]) + usize::from(a[0] != b[0]);
    sub.min(lev_oracle(&a[1..], b) + 1).min(lev_oracle(a, &b[1..]) + 1)
}

#[test]
fn kitten_sitting() {
    assert_eq!(edit_distance("kitten", "sitting", DistanceUnit::Char), 3);
    assert_eq!(edit_distance("same words", "same words", DistanceUnit::Token), 0);
}

fn short() -> impl Strategy<Value = String> {
    "[abc]{0,6}"
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn distance_is_a_metric(a in short(), b in short(), c in short()) {
        let d = |x: &str, y: &str| edit_distance(x, y, DistanceUnit::Char);
        prop_assert_eq!(d(&a, &b), d(&b, &a));
        prop_assert!(d(&a, &c) <= d(&a, &b) + d(&b, &c));
        let (ac, bc): (Vec<char>, Vec<char>) = (a.chars().collect(), b.chars().collect());
        prop_assert_eq!(levenshtein(&ac, &bc), lev_oracle(&ac, &bc));
    }
}

// ---- language model and SLOR --------------------------------------------------

fn toy_corpus() -> Vec<Vec<String>> {
    ["x y", "x x", "y x", "x", "y y"]
        .iter()
        .map(|s| s.split(' ').map(String::from).collect())
        .collect()
}

#[test]
fn conditional_distributions_sum_to_one() {
    use rand::{Rng, SeedableRng};
    let text = "The cat sat on the mat. A dog sat on a log. The dog saw the cat. Cats and dogs sat.";
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
    for order in 1..=5 {
        let lm = NgramLm::train([text], order).unwrap();
        let vocab = lm.vocabulary();
        for _ in 0..100 {
            let len = rng.random_range(0..5);
            let ctx: Vec<String> = (0..len)
                .map(|_| {
                    if rng.random_bool(0.1) {
                        "unseen".to_string()
                    } else {
                        vocab[rng.random_range(0..vocab.len())].clone()
                    }
                })
                .collect();
            let total: f64 = vocab.iter().map(|w| lm.prob(&ctx, w)).sum();
            assert!((total - 1.0).abs() < 1e-6, "order {order} ctx {ctx:?}: {total}");
        }
    }
}

#[test]
fn unigram_slor_is_zero() {
    let lm = NgramLm::train_tokens(toy_corpus(), 1, DEFAULT_DISCOUNT).unwrap();
    for s in ["x y x", "y", "z x"] {
        let toks: Vec<String> = s.split(' ').map(String::from).collect();
        assert_eq!(slor_tokens(&toks, &lm).unwrap(), 0.0);
    }
}

#[test]
fn bigram_slor_matches_hand_arithmetic() {
    let lm = NgramLm::train_tokens(toy_corpus(), 2, DEFAULT_DISCOUNT).unwrap();
    // unigram: x 5, y 4 of 9 tokens; 2 seen types; vocabulary {<unk>, x, y}
    let p1_x: f64 = (5.0 - 0.75) / 9.0 + 0.75 * 2.0 / 9.0 / 3.0;
    // after <s>: x 3, y 2; after x: x 1, y 1
    let p_x_start: f64 = (3.0 - 0.75) / 5.0 + 0.75 * 2.0 / 5.0 * p1_x;
    let p_x_x: f64 = (1.0 - 0.75) / 2.0 + 0.75 * 2.0 / 2.0 * p1_x;
    let expected_xx = (p_x_start.ln() + p_x_x.ln() - 2.0 * p1_x.ln()) / 2.0;
    let expected_x = p_x_start.ln() - p1_x.ln();
    let xx: Vec<String> = vec!["x".into(), "x".into()];
    assert!((slor_tokens(&xx, &lm).unwrap() - expected_xx).abs() < 1e-12);
    assert!((slor_tokens(&xx[..1], &lm).unwrap() - expected_x).abs() < 1e-12);
    assert!(slor_tokens(&[], &lm).is_err());
}

// ---- entity grid ------------------------------------------------------------

#[test]
fn hand_built_grid() {
    let doc = "Alice met Bob. Then Alice left. Bob stayed home.";
    let g = build_grid(doc);
    assert_eq!(g.entities, vec!["alice", "bob"]);
    assert_eq!(g.cells, vec![vec![true, true], vec![true, false], vec![false, true]]);
    // transitions: XX 1, X- 2, -X 1 → exp((ln .25 + 2 ln .5 + ln .25) / 4)
    let expected = (((0.25f64).ln() + 2.0 * (0.5f64).ln() + (0.25f64).ln()) / 4.0).exp();
    assert!((entity_grid_score(doc).score - expected).abs() < 1e-12);
    assert!((expected - (0.125f64).sqrt()).abs() < 1e-12);
}

// ---- FKGL and deltas ----------------------------------------------------------

#[test]
fn doubling_sentences_halves_first_term() {
    let mut c = readability_counts("One two three four. Five six seven eight.");
    let a = fkgl_from_counts(c);
    c.sentences *= 2;
    let b = fkgl_from_counts(c);
    let first = 0.39 * c.words as f64 / (c.sentences / 2) as f64;
    assert!(((a - b) - first / 2.0).abs() < 1e-9);
}

#[test]
fn deltas_vanish_on_identity() {
    let lm = NgramLm::train(["The cat sat. The dog ran away from the cat."], 2).unwrap();
    let doc = "The cat sat on the mat. The dog ran away.";
    let d = delta_report(doc, doc, Some(&lm)).unwrap();
    assert_eq!((d.delta_slor, d.delta_eg, d.delta_fkgl), (Some(0.0), 0.0, 0.0));
    assert_eq!(d.content_preservation, 100.0);
    assert_eq!(chrf(doc, doc), 100.0);
}

#[test]
fn merging_sentences_raises_fkgl() {
    let original = "The cat sat on the mat. The dog ran away.";
    let merged = "The cat sat on the mat and the dog ran away.";
    let d = delta_report(original, merged, None).unwrap();
    assert!(d.delta_fkgl > 0.0);
    assert!(fkgl(merged).unwrap() > fkgl(original).unwrap());
}

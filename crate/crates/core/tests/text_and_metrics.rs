use proptest::prelude::*;
use qvuln_core::embedding::VectorTable;
use qvuln_core::metrics::{scores, ConfusionMatrix};
use qvuln_core::text::{balance, encode_and_pad, tokenize, LabeledCorpus, Sample, Split, Vocabulary};

fn code_like() -> impl Strategy<Value = String> {
    let pieces = prop::sample::select(vec![
        "if", "(", ")", "x", "==", "10", "{", "}", "buf[i]", "=", "'c'", "\"str\"", "a<=b", "p->q",
        "// c\n", "/* blk */", "strcpy", ";", "3.14", "i++", "\\n", " ", "\t", "std::x", "<<", "#",
    ]);
    prop::collection::vec(pieces, 0..40).prop_map(|v| v.join(""))
}

proptest! {
    #[test]
    fn tokenize_is_idempotent_on_canonical_form(code in code_like()) {
        let once = tokenize(&code);
        let again = tokenize(&once.join(" "));
        prop_assert_eq!(once, again);
    }

    #[test]
    fn encoding_invariants(code in code_like(), max_len in 1usize..30) {
        let toks = tokenize(&code);
        let vocab = Vocabulary::build([toks.iter()], 10).unwrap();
        let e = encode_and_pad(&toks, &vocab, max_len).unwrap();
        prop_assert_eq!(e.indices.len(), max_len);
        prop_assert!(e.indices[e.true_length..].iter().all(|&i| i == 0));
        prop_assert_eq!(e.true_length, toks.len().min(max_len));
        // Real indices map back to the tokens they came from.
        let kept = &toks[toks.len() - e.true_length..];
        for (&i, t) in e.indices.iter().zip(kept) {
            if i >= 2 {
                prop_assert_eq!(vocab.token(i), Some(t.as_str()));
            }
        }
    }

    #[test]
    fn balance_invariants(labels in prop::collection::vec(0i64..2, 2..60), seed in any::<u64>()) {
        prop_assume!(labels.contains(&0) && labels.contains(&1));
        let samples: Vec<Sample> = labels.iter().enumerate()
            .map(|(k, &l)| Sample::new(format!("s{k}"), l).unwrap())
            .collect();
        let corpus = LabeledCorpus::new(Split::Train, samples);
        let b = balance(&corpus, seed).unwrap();
        let (n, p) = b.class_counts();
        prop_assert_eq!(n, p);
        let mut seen = std::collections::HashSet::new();
        for s in &b.samples {
            prop_assert!(corpus.samples.contains(s));
            prop_assert!(seen.insert(s.code.clone()));
        }
        prop_assert_eq!(b, balance(&corpus, seed).unwrap());
    }

    #[test]
    fn vector_table_reserializes(rows in prop::collection::btree_map("[a-z]{1,6}", prop::collection::vec(-10.0..10.0f64, 3), 1..10)) {
        let text: String = rows.iter()
            .map(|(t, v)| format!("{t} {} {} {}\n", v[0], v[1], v[2]))
            .collect();
        let table = VectorTable::parse(&text).unwrap();
        let again = VectorTable::parse(&table.to_text()).unwrap();
        prop_assert_eq!(&table, &again);
        for (t, v) in &rows {
            prop_assert_eq!(table.get(t), Some(v.as_slice()));
        }
    }
}

#[test]
fn vocabulary_indices_are_contiguous() {
    let docs: Vec<Vec<String>> = ["a b c a", "c d e", "a"].iter().map(|s| tokenize(s)).collect();
    let v = Vocabulary::build(docs.iter(), 100).unwrap();
    let mut idx: Vec<u32> = v.tokens().iter().map(|t| v.index_of(t)).collect();
    idx.sort();
    assert_eq!(idx, (2..2 + v.len() as u32).collect::<Vec<_>>());
}

/// Independent brute force: rationals as integer pairs, then the same
/// divisions the definitions prescribe.
fn brute(tp: u64, fp: u64, tn: u64, fn_: u64) -> (f64, f64, f64, f64) {
    let div = |n: u64, d: u64| if d == 0 { 0.0 } else { n as f64 / d as f64 };
    let p = div(tp, tp + fp);
    let r = div(tp, tp + fn_);
    let f1 = if p + r == 0.0 { 0.0 } else { 2.0 * p * r / (p + r) };
    (div(tp + tn, tp + fp + tn + fn_), p, r, f1)
}

#[test]
fn metrics_agree_with_brute_force_exhaustively() {
    let mut cases = 0;
    for tp in 0..=5 {
        for fp in 0..=5 {
            for tn in 0..=5 {
                for fn_ in 0..=5 {
                    let s = scores(&ConfusionMatrix::new(tp, fp, tn, fn_));
                    let (a, p, r, f1) = brute(tp, fp, tn, fn_);
                    assert_eq!((s.accuracy, s.precision, s.recall, s.f1), (a, p, r, f1));
                    if tp > 0 {
                        let exact = 2.0 * tp as f64 / (2 * tp + fp + fn_) as f64;
                        assert!((s.f1 - exact).abs() < 1e-15);
                    }
                    cases += 1;
                }
            }
        }
    }
    assert_eq!(cases, 1296);
}

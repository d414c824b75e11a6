//! Checks the sampler against an exact posterior computed by brute force.

mod support;

use koslinker::{Language, ModelState};
use support::oracle::*;

#[test]
fn conditional_agrees_with_joint_ratios() {
    let corpus = tiny_corpus();
    let hyper = hyper();
    let mut state = ModelState::initialize(&corpus, &hyper).unwrap();
    for _ in 0..5 {
        state.sweep();
        let z = flatten(&state);
        let mut offset = 0;
        for (d, doc) in corpus.documents.iter().enumerate() {
            for lang in Language::ALL {
                for pos in 0..doc.tokens(lang).len() {
                    let got = state.conditional_distribution(d, lang, pos);
                    let mut w: Vec<f64> = doc
                        .labels
                        .iter()
                        .map(|&k| {
                            let mut alt = z.clone();
                            alt[offset + pos] = k;
                            joint(&corpus, &hyper, &alt)
                        })
                        .collect();
                    let s: f64 = w.iter().sum();
                    w.iter_mut().for_each(|x| *x /= s);
                    for (a, b) in got.iter().zip(&w) {
                        assert!((a - b).abs() < 1e-12, "{got:?} vs {w:?}");
                    }
                }
                offset += doc.tokens(lang).len();
            }
        }
    }
}

#[test]
fn log_likelihood_matches_oracle_joint() {
    let corpus = tiny_corpus();
    let hyper = hyper();
    let mut state = ModelState::initialize(&corpus, &hyper).unwrap();
    for _ in 0..10 {
        state.sweep();
        let oracle = joint(&corpus, &hyper, &flatten(&state)).ln();
        assert!((state.log_likelihood() - oracle).abs() < 1e-10);
    }
}

#[test]
fn exact_posterior_is_normalized() {
    let exact = exact_posterior(&tiny_corpus(), &hyper());
    assert!((exact.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    assert_eq!(exact.len(), 256);
}

#[test]
fn gibbs_samples_match_exact_posterior() {
    let tv = sampled_tv(1_000, 50_000);
    println!("total variation distance: {tv:.4}");
    assert!(tv <= 0.05, "total variation {tv}");
}

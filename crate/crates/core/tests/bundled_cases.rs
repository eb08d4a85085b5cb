//! The shipped mini case set and training corpus must stay self-consistent:
//! every correct program parses, passes its own tests under the reference
//! interpreter, and is large enough for chunked edit dispersion.

use std::path::{Path, PathBuf};

use lecforge_core::corpus::{ingest_corpus, CorpusFilter};
use lecforge_core::injector::{load_cases, TestSpec};
use lecforge_core::mini;
use lecforge_core::profile::load_profile;
use lecforge_core::tokenizer::tokenize;

fn cases_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../cases/mini")
}

fn corpus_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../cases/corpus")
}

const STEP_BUDGET: u64 = 1_000_000;

#[test]
fn ten_cases_load_in_sorted_order() {
    let cases = load_cases(&cases_root()).unwrap();
    let names: Vec<&str> = cases.iter().map(|c| c.name.as_str()).collect();
    assert_eq!(
        names,
        vec![
            "collatz_steps",
            "countdown",
            "digit_sum",
            "factorial",
            "fib",
            "gcd_pair",
            "is_prime",
            "max3",
            "power",
            "sum_split",
        ]
    );
    for case in &cases {
        assert_eq!(case.profile_name, "mini", "case {}", case.name);
        assert!(case.tests.len() >= 3, "case {} has too few tests", case.name);
    }
}

#[test]
fn every_correct_program_parses() {
    for case in load_cases(&cases_root()).unwrap() {
        if let Err(e) = mini::check(&case.correct_source) {
            panic!("case {} does not parse: {e}", case.name);
        }
    }
}

#[test]
fn every_correct_program_passes_its_own_tests() {
    for case in load_cases(&cases_root()).unwrap() {
        for (i, test) in case.tests.iter().enumerate() {
            let TestSpec::Io { input, expected } = test else {
                panic!("case {} test {i} is not an io test", case.name);
            };
            let got = mini::run(&case.correct_source, input, Some(STEP_BUDGET))
                .unwrap_or_else(|e| panic!("case {} test {i} crashed: {e}", case.name));
            assert_eq!(
                got.trim_end_matches('\n'),
                expected.trim_end_matches('\n'),
                "case {} test {i} output mismatch",
                case.name
            );
        }
    }
}

#[test]
fn every_case_is_long_enough_for_dispersed_edits() {
    // With the default chunk size of 20, injection needs at least one chunk
    // that is neither first nor last, i.e. at least 60 tokens (41 suffices
    // for three chunks, but a comfortable middle keeps variants plentiful).
    let profile = load_profile("mini").unwrap();
    for case in load_cases(&cases_root()).unwrap() {
        let stream = tokenize(&case.correct_source, &profile);
        assert!(
            stream.len() >= 60,
            "case {} has only {} tokens",
            case.name,
            stream.len()
        );
    }
}

#[test]
fn training_corpus_is_accepted_in_full() {
    let profile = load_profile("mini").unwrap();
    let corpus = ingest_corpus(&[corpus_root()], &CorpusFilter::default(), &profile).unwrap();
    assert_eq!(corpus.rejected_count(), 0, "rejects: {:?}", corpus.rejected);
    assert_eq!(corpus.accepted_count(), 16);
    assert!(corpus.total_tokens() > 500);
    for file in &corpus.files {
        let text = std::fs::read_to_string(&file.path).unwrap();
        if let Err(e) = mini::check(&text) {
            panic!("corpus file {} does not parse: {e}", file.path.display());
        }
    }
}

#[test]
fn rare_sentinel_tokens_appear_exactly_once() {
    // The localization oracle plants these as artificially rare replacements;
    // each must be in the corpus vocabulary, but only just.
    let profile = load_profile("mini").unwrap();
    let corpus = ingest_corpus(&[corpus_root()], &CorpusFilter::default(), &profile).unwrap();
    for rare in ["997", "8191", "733"] {
        let count: usize = corpus
            .files
            .iter()
            .flat_map(|f| f.stream.tokens())
            .filter(|t| t.text == rare)
            .count();
        assert_eq!(count, 1, "token {rare} should be a corpus singleton");
    }
}

//! End-to-end statistical pipeline over real data: train an n-gram on the
//! bundled corpus, plant a rare token into a known-good program, and check
//! that localization flags it and the repair loop restores the original.

use std::path::{Path, PathBuf};

use lecforge_core::corpus::{ingest_corpus, CorpusFilter};
use lecforge_core::injector::load_cases;
use lecforge_core::localizer;
use lecforge_core::ngram::{train_ngram, NGramConfig, NGramModel};
use lecforge_core::profile::{load_profile, LexProfile};
use lecforge_core::repairer::{mask_tokens, repair_autoregressive};
use lecforge_core::tokenizer::{tokenize, TokenStream};

fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn trained_model() -> (NGramModel, LexProfile) {
    let profile = load_profile("mini").unwrap();
    let corpus = ingest_corpus(
        &[root().join("cases/corpus")],
        &CorpusFilter::default(),
        &profile,
    )
    .unwrap();
    let model = train_ngram(&corpus, NGramConfig::default()).unwrap();
    (model, profile)
}

fn countdown_stream(profile: &LexProfile) -> TokenStream {
    let cases = load_cases(&root().join("cases/mini")).unwrap();
    let case = cases.iter().find(|c| c.name == "countdown").unwrap();
    tokenize(&case.correct_source, profile)
}

/// Index of the right-hand `total` in `let total = total + i`.
fn accumulator_site(stream: &TokenStream) -> usize {
    let texts = stream.texts();
    (2..texts.len())
        .find(|&i| texts[i] == "total" && texts[i - 1] == "=" && texts[i - 2] == "total")
        .expect("countdown contains an accumulator line")
}

#[test]
fn planted_rare_token_is_flagged() {
    let (model, profile) = trained_model();
    let mut stream = countdown_stream(&profile);
    let site = accumulator_site(&stream);
    stream.replace_text(site, "997");

    let scored = localizer::score_program(&model, &stream).unwrap();
    let (flagged, stats) = localizer::flag_tokens(&scored, 1.5, &profile).unwrap();
    assert!(
        flagged.contains(&site),
        "planted site {site} not in flags {flagged:?} (tau {})",
        stats.tau
    );
}

#[test]
fn masking_the_planted_site_restores_the_original() {
    let (model, profile) = trained_model();
    let original = countdown_stream(&profile);
    let mut corrupted = original.clone();
    let site = accumulator_site(&corrupted);
    corrupted.replace_text(site, "997");

    let masked = mask_tokens(&corrupted, &[site]).unwrap();
    let repaired = repair_autoregressive(&model, &masked, 5, 64).unwrap();
    assert_eq!(repaired.filled_choices, vec!["total".to_string()]);
    assert_eq!(repaired.repaired_stream.texts(), original.texts());
}

#[test]
fn planted_line_is_flagged_at_line_level() {
    let (model, profile) = trained_model();
    let mut stream = countdown_stream(&profile);
    let site = accumulator_site(&stream);
    let line = stream.token(site).line;
    stream.replace_text(site, "997");

    let report = localizer::localize(&model, &stream, 1.5, &profile).unwrap();
    assert!(
        report.flagged_line_indices.contains(&line),
        "line {line} not in {:?}",
        report.flagged_line_indices
    );
}

#[test]
fn pristine_programs_score_finite_and_mostly_quiet() {
    let (model, profile) = trained_model();
    let cases = load_cases(&root().join("cases/mini")).unwrap();
    for case in &cases {
        let stream = tokenize(&case.correct_source, &profile);
        let scored = localizer::score_program(&model, &stream).unwrap();
        for (i, lp) in scored.logprobs.iter().enumerate() {
            if !scored.unscored[i] {
                assert!(lp.is_finite() && *lp <= 0.0, "case {} token {i}", case.name);
            }
        }
        let (flagged, _) = localizer::flag_tokens(&scored, 1.5, &profile).unwrap();
        let scored_count = scored.unscored.iter().filter(|u| !**u).count();
        assert!(
            flagged.len() * 4 <= scored_count,
            "case {}: {} of {} scored tokens flagged",
            case.name,
            flagged.len(),
            scored_count
        );
    }
}

//! Rule checker: re-derives a sample's output from its stored inputs.
//!
//! The check is written against the rules directly (threshold tests, argmax
//! over overlaps, window slices, blank resolution, rhyme membership), not
//! against the generators, so it doubles as an independent oracle. No-rule
//! samples are checked against the rule of the template whose layout they
//! borrow, which is how they are expected to fail.

use crate::token_space::{overlap, TokenSequence};

use super::generators::{count_occurrences, find_occurrence, matching_label};
use super::{FieldValue, Sample, TemplateError, TemplateId};

/// True iff the sample's output is exactly what the template rule dictates
/// given its inputs.
pub fn verify_sample(sample: &Sample, params: &super::TemplateParams) -> Result<bool, TemplateError> {
    match sample.generator.layout() {
        TemplateId::Matching => verify_matching(sample, params.noise),
        TemplateId::MultiChoiceQa => verify_overlap_argmax(sample, "question"),
        TemplateId::DocumentQa => verify_document_qa(sample, params.answer_window),
        TemplateId::EntityDisambiguation => verify_entity_disambiguation(sample),
        TemplateId::CommonsenseSelect => verify_overlap_argmax(sample, "sentence"),
        TemplateId::TokenRetrieval => verify_token_retrieval(sample),
        TemplateId::Poetry => verify_poetry(sample, params),
    }
}

fn verify_matching(sample: &Sample, noise: f64) -> Result<bool, TemplateError> {
    let e1 = sample.input_tokens("entity_a")?;
    let e2 = sample.input_tokens("entity_b")?;
    let expected = matching_label(e1, e2, noise);
    Ok(sample.output == FieldValue::Text(expected.to_string()))
}

/// Shared rule for multi-choice QA and commonsense selection: the output is
/// the unique choice with maximal distinct-token overlap with the reference.
fn verify_overlap_argmax(sample: &Sample, reference: &'static str) -> Result<bool, TemplateError> {
    let reference = sample.input_tokens(reference)?;
    let choices = sample.input_token_lists("choices")?;
    Ok(expected_argmax(reference, choices)
        .is_some_and(|winner| sample.output == FieldValue::Tokens(choices[winner].clone())))
}

fn verify_token_retrieval(sample: &Sample) -> Result<bool, TemplateError> {
    let question = sample.input_tokens("question")?;
    let documents = sample.input_token_lists("documents")?;
    Ok(expected_argmax(question, documents)
        .is_some_and(|winner| sample.output == FieldValue::Tokens(documents[winner].clone())))
}

fn expected_argmax(reference: &TokenSequence, candidates: &[TokenSequence]) -> Option<usize> {
    let scores: Vec<usize> = candidates.iter().map(|c| overlap(reference, c)).collect();
    let max = *scores.iter().max()?;
    let mut at_max = scores.iter().enumerate().filter(|(_, &s)| s == max);
    let winner = at_max.next()?.0;
    at_max.next().is_none().then_some(winner)
}

fn verify_document_qa(sample: &Sample, window: usize) -> Result<bool, TemplateError> {
    let document = sample.input_tokens("document")?;
    let question = sample.input_tokens("question")?;
    if count_occurrences(document.ids(), question.ids()) != 1 {
        return Ok(false);
    }
    let start = find_occurrence(document.ids(), question.ids()).expect("occurrence counted above");
    let a_start = start.saturating_sub(window);
    let a_end = usize::min(document.len(), start + question.len() + window);
    let expected = document.slice(a_start, a_end);
    Ok(sample.output == FieldValue::Tokens(expected))
}

fn verify_entity_disambiguation(sample: &Sample) -> Result<bool, TemplateError> {
    let sentence = sample.input_tokens("sentence")?;
    let support = sample.input_tokens("support")?;
    let choices = sample.input_token_lists("choices")?;
    if count_occurrences(sentence.ids(), support.ids()) != 1 {
        return Ok(false);
    }
    let pos = find_occurrence(sentence.ids(), support.ids()).expect("occurrence counted above");
    if pos == 0 {
        return Ok(false); // no token precedes the support
    }
    let expected = TokenSequence::new(vec![sentence.ids()[pos - 1]]);
    let is_choice = choices.contains(&expected);
    Ok(is_choice && sample.output == FieldValue::Tokens(expected))
}

fn verify_poetry(sample: &Sample, params: &super::TemplateParams) -> Result<bool, TemplateError> {
    let topic = sample.input_text("topic")?;
    let poem = match &sample.output {
        FieldValue::Text(s) => s,
        _ => return Err(TemplateError::MalformedSample("output")),
    };
    let lines: Vec<&str> = poem.lines().collect();
    if lines.len() != 5 {
        return Ok(false);
    }
    if !lines.iter().all(|l| l.contains(topic)) {
        return Ok(false);
    }
    let finals: Vec<&str> = match lines
        .iter()
        .map(|l| l.split_whitespace().last())
        .collect::<Option<Vec<_>>>()
    {
        Some(f) => f,
        None => return Ok(false),
    };
    // ABABA: one group covers lines 0, 2, 4 and a different group covers
    // lines 1, 3.
    let groups = params.rhyme_dict.groups();
    let covering = |words: &[&str]| -> Vec<usize> {
        groups
            .iter()
            .enumerate()
            .filter(|(_, g)| words.iter().all(|w| g.iter().any(|gw| gw == w)))
            .map(|(i, _)| i)
            .collect()
    };
    let a_groups = covering(&[finals[0], finals[2], finals[4]]);
    let b_groups = covering(&[finals[1], finals[3]]);
    Ok(a_groups
        .iter()
        .any(|a| b_groups.iter().any(|b| a != b)))
}

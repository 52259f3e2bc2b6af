//! The template generators and their no-rule ablations.
//!
//! When a template's rule presumes a unique answer (overlap argmax, span
//! location), the whole sample is regenerated from the next stream draws
//! until the answer is unique, bounded at [`MAX_TIE_RETRIES`] attempts.

use std::collections::BTreeMap;

use crate::token_space::{get_span, overlap, replace, sample_tokens, shuffle, Rng, TokenSequence, Vocabulary};

use super::format::{self, instruction_for};
use super::{FieldValue, GeneratorId, SampleBody, TemplateError, TemplateId, TemplateParams};

pub(crate) const MAX_TIE_RETRIES: usize = 100;

pub(crate) fn generate(
    generator: GeneratorId,
    vocab: &Vocabulary,
    params: &TemplateParams,
    rng: &mut Rng,
) -> Result<SampleBody, TemplateError> {
    match generator {
        GeneratorId::Template(t) => match t {
            TemplateId::Matching => gen_matching(vocab, params, rng),
            TemplateId::MultiChoiceQa => gen_multi_choice_qa(vocab, params, rng),
            TemplateId::DocumentQa => gen_document_qa(vocab, params, rng),
            TemplateId::EntityDisambiguation => gen_entity_disambiguation(vocab, params, rng),
            TemplateId::CommonsenseSelect => gen_commonsense_select(vocab, params, rng),
            TemplateId::TokenRetrieval => gen_token_retrieval(vocab, params, rng),
            TemplateId::Poetry => gen_poetry(vocab, params, rng),
        },
        GeneratorId::NoRule(t) => gen_norule(t, vocab, params, rng),
    }
}

fn retrying<T>(
    rng: &mut Rng,
    mut attempt: impl FnMut(&mut Rng) -> Result<Option<T>, TemplateError>,
) -> Result<T, TemplateError> {
    for _ in 0..MAX_TIE_RETRIES {
        if let Some(v) = attempt(rng)? {
            return Ok(v);
        }
    }
    Err(TemplateError::TieRetriesExhausted(MAX_TIE_RETRIES))
}

fn unique_argmax(scores: &[usize]) -> Option<usize> {
    let max = *scores.iter().max()?;
    let mut at_max = scores.iter().enumerate().filter(|(_, &s)| s == max);
    let winner = at_max.next()?.0;
    at_max.next().is_none().then_some(winner)
}

pub(crate) fn count_occurrences(haystack: &[u32], needle: &[u32]) -> usize {
    if needle.is_empty() || needle.len() > haystack.len() {
        return 0;
    }
    haystack.windows(needle.len()).filter(|w| *w == needle).count()
}

pub(crate) fn find_occurrence(haystack: &[u32], needle: &[u32]) -> Option<usize> {
    if needle.is_empty() || needle.len() > haystack.len() {
        return None;
    }
    haystack.windows(needle.len()).position(|w| w == needle)
}

fn body(
    template: TemplateId,
    inputs: BTreeMap<String, FieldValue>,
    output: FieldValue,
    vocab: &Vocabulary,
) -> Result<SampleBody, TemplateError> {
    let instruction = instruction_for(template).to_string();
    let text = format::render(template, &instruction, &inputs, &output, vocab)?;
    Ok(SampleBody {
        instruction,
        inputs,
        output,
        text,
    })
}

/// Pair of entities; near-duplicate with probability one half, labeled by a
/// distinct-token overlap threshold.
fn gen_matching(
    vocab: &Vocabulary,
    params: &TemplateParams,
    rng: &mut Rng,
) -> Result<SampleBody, TemplateError> {
    let len = params.parent_len.draw(rng);
    let e1 = sample_tokens(vocab, len, rng)?;
    let near_duplicate = rng.next_bool();
    let e2 = if near_duplicate {
        replace(&e1, params.noise, vocab, rng)?
    } else {
        sample_tokens(vocab, len, rng)?
    };
    let label = matching_label(&e1, &e2, params.noise);
    let inputs = BTreeMap::from([
        ("entity_a".to_string(), FieldValue::Tokens(e1)),
        ("entity_b".to_string(), FieldValue::Tokens(e2)),
    ]);
    body(
        TemplateId::Matching,
        inputs,
        FieldValue::Text(label.to_string()),
        vocab,
    )
}

/// The matching rule: yes iff the distinct shared tokens exceed
/// `(1 - noise) * len(e1)`, strict comparison.
pub(crate) fn matching_label(e1: &TokenSequence, e2: &TokenSequence, noise: f64) -> &'static str {
    if (overlap(e1, e2) as f64) > (1.0 - noise) * e1.len() as f64 {
        "yes"
    } else {
        "no"
    }
}

/// Question with five choices; one choice is seeded with tokens sampled from
/// the question and the answer is the overlap argmax.
fn gen_multi_choice_qa(
    vocab: &Vocabulary,
    params: &TemplateParams,
    rng: &mut Rng,
) -> Result<SampleBody, TemplateError> {
    let (question, choices, winner) = retrying(rng, |rng| {
        let qlen = params.parent_len.draw(rng);
        let question = sample_tokens(vocab, qlen, rng)?;
        let mut choices = Vec::with_capacity(5);
        for _ in 0..5 {
            let blen = params.child_len.draw(rng);
            choices.push(sample_tokens(vocab, blen, rng)?);
        }
        // Seed the last choice: planted question tokens, then the original
        // choice truncated by the same amount.
        let planted = question.sample_from(params.overlap_len, rng);
        let base = &choices[4];
        choices[4] = planted.concat(&base.slice(0, base.len() - params.overlap_len));
        shuffle(&mut choices, rng);
        let overlaps: Vec<usize> = choices.iter().map(|c| overlap(&question, c)).collect();
        Ok(unique_argmax(&overlaps).map(|w| (question, choices, w)))
    })?;
    let output = FieldValue::Tokens(choices[winner].clone());
    let inputs = BTreeMap::from([
        ("question".to_string(), FieldValue::Tokens(question)),
        ("choices".to_string(), FieldValue::TokenLists(choices)),
    ]);
    body(TemplateId::MultiChoiceQa, inputs, output, vocab)
}

/// Random document; the question is a contiguous span and the answer is the
/// span widened by `answer_window` on each side, clipped at the document
/// boundaries. The span is regenerated until it occurs exactly once so the
/// rule can be re-derived from the inputs alone.
fn gen_document_qa(
    vocab: &Vocabulary,
    params: &TemplateParams,
    rng: &mut Rng,
) -> Result<SampleBody, TemplateError> {
    let k = params.answer_window;
    let (document, question, answer) = retrying(rng, |rng| {
        let dlen = params.parent_len.draw(rng);
        let document = sample_tokens(vocab, dlen, rng)?;
        let span_len = rng.range_inclusive(params.min_slen as u64, params.max_slen as u64) as usize;
        let (question, start) = get_span(&document, span_len, rng)?;
        if count_occurrences(document.ids(), question.ids()) != 1 {
            return Ok(None);
        }
        let a_start = start.saturating_sub(k);
        let a_end = usize::min(document.len(), start + span_len + k);
        let answer = document.slice(a_start, a_end);
        Ok(Some((document, question, answer)))
    })?;
    let inputs = BTreeMap::from([
        ("document".to_string(), FieldValue::Tokens(document)),
        ("question".to_string(), FieldValue::Tokens(question)),
    ]);
    body(
        TemplateId::DocumentQa,
        inputs,
        FieldValue::Tokens(answer),
        vocab,
    )
}

/// Two entity spans are cut from a sentence; a second sentence repeats one
/// span's tail after a blank, and the answer is the entity that started the
/// repeated span.
fn gen_entity_disambiguation(
    vocab: &Vocabulary,
    params: &TemplateParams,
    rng: &mut Rng,
) -> Result<SampleBody, TemplateError> {
    let span = params.e_span_len;
    let (sentence, prefix, support, e1, e2, answer) = retrying(rng, |rng| {
        let slen = params.parent_len.draw(rng);
        let sentence = sample_tokens(vocab, slen, rng)?;
        let positions = (slen - span + 1) as u64;
        let start1 = rng.below(positions) as usize;
        let start2 = rng.below(positions) as usize;
        if start1.abs_diff(start2) < span {
            return Ok(None); // overlapping spans
        }
        let s1 = sentence.slice(start1, start1 + span);
        let s2 = sentence.slice(start2, start2 + span);
        let (e1, e2) = (s1.ids()[0], s2.ids()[0]);
        if e1 == e2 {
            return Ok(None); // indistinguishable choices
        }
        let prefix = sample_tokens(vocab, params.child_len.draw(rng), rng)?;
        let use_first = rng.next_bool();
        let support = if use_first {
            s1.slice(1, span)
        } else {
            s2.slice(1, span)
        };
        if count_occurrences(sentence.ids(), support.ids()) != 1 {
            return Ok(None);
        }
        let answer = if use_first { e1 } else { e2 };
        Ok(Some((sentence, prefix, support, e1, e2, answer)))
    })?;
    let inputs = BTreeMap::from([
        ("sentence".to_string(), FieldValue::Tokens(sentence)),
        ("prefix".to_string(), FieldValue::Tokens(prefix)),
        ("support".to_string(), FieldValue::Tokens(support)),
        (
            "choices".to_string(),
            FieldValue::TokenLists(vec![
                TokenSequence::new(vec![e1]),
                TokenSequence::new(vec![e2]),
            ]),
        ),
    ]);
    body(
        TemplateId::EntityDisambiguation,
        inputs,
        FieldValue::Tokens(TokenSequence::new(vec![answer])),
        vocab,
    )
}

/// Sentence with two choices sharing a common base; one choice is extended
/// with tokens sampled from the sentence, the other with fresh tokens. The
/// answer is the overlap argmax.
fn gen_commonsense_select(
    vocab: &Vocabulary,
    params: &TemplateParams,
    rng: &mut Rng,
) -> Result<SampleBody, TemplateError> {
    let (sentence, choices, winner) = retrying(rng, |rng| {
        let slen = params.parent_len.draw(rng);
        let sentence = sample_tokens(vocab, slen, rng)?;
        let base = sample_tokens(vocab, params.child_len.draw(rng), rng)?;
        let planted = sentence.sample_from(params.overlap_len, rng);
        let fresh = sample_tokens(vocab, params.overlap_len, rng)?;
        let mut choices = vec![base.concat(&planted), base.concat(&fresh)];
        shuffle(&mut choices, rng);
        let overlaps: Vec<usize> = choices.iter().map(|c| overlap(&sentence, c)).collect();
        Ok(unique_argmax(&overlaps).map(|w| (sentence, choices, w)))
    })?;
    let output = FieldValue::Tokens(choices[winner].clone());
    let inputs = BTreeMap::from([
        ("sentence".to_string(), FieldValue::Tokens(sentence)),
        ("choices".to_string(), FieldValue::TokenLists(choices)),
    ]);
    body(TemplateId::CommonsenseSelect, inputs, output, vocab)
}

/// A batch of documents; the question samples tokens from one of them and the
/// answer is the document with the greatest overlap.
fn gen_token_retrieval(
    vocab: &Vocabulary,
    params: &TemplateParams,
    rng: &mut Rng,
) -> Result<SampleBody, TemplateError> {
    let (documents, question, winner) = retrying(rng, |rng| {
        let mut documents = Vec::with_capacity(params.num_docs);
        for _ in 0..params.num_docs {
            let dlen = params.parent_len.draw(rng);
            documents.push(sample_tokens(vocab, dlen, rng)?);
        }
        let idx = rng.below(params.num_docs as u64) as usize;
        let question = documents[idx].sample_from(params.overlap_len, rng);
        let overlaps: Vec<usize> = documents.iter().map(|d| overlap(&question, d)).collect();
        Ok(unique_argmax(&overlaps).map(|w| (documents, question, w)))
    })?;
    let output = FieldValue::Tokens(documents[winner].clone());
    let inputs = BTreeMap::from([
        ("documents".to_string(), FieldValue::TokenLists(documents)),
        ("question".to_string(), FieldValue::Tokens(question)),
    ]);
    body(TemplateId::TokenRetrieval, inputs, output, vocab)
}

/// Five lines about a topic token with an ABABA rhyme scheme: even lines end
/// with words from one rhyme group, odd lines from another.
fn gen_poetry(
    vocab: &Vocabulary,
    params: &TemplateParams,
    rng: &mut Rng,
) -> Result<SampleBody, TemplateError> {
    let groups = params.rhyme_dict.groups();
    if groups.len() < 2 {
        return Err(TemplateError::RhymeDictTooSmall);
    }
    let topic_seq = sample_tokens(vocab, 1, rng)?;
    let topic = vocab.render(&topic_seq);
    // Two distinct groups drawn without replacement.
    let a = rng.below(groups.len() as u64) as usize;
    let mut b = rng.below(groups.len() as u64 - 1) as usize;
    if b >= a {
        b += 1;
    }
    let mut lines = Vec::with_capacity(5);
    for idx in 0..5 {
        let group = &groups[if idx % 2 == 0 { a } else { b }];
        let line_len = params.line_len.draw(rng);
        let line = sample_tokens(vocab, line_len, rng)?;
        let insert_at = rng.below(line_len as u64 + 1) as usize;
        let rhyme = &group[rng.below(group.len() as u64) as usize];
        let mut words: Vec<&str> = line
            .ids()
            .iter()
            .map(|&id| vocab.token(id).unwrap_or(""))
            .collect();
        words.insert(insert_at, &topic);
        words.push(rhyme);
        lines.push(words.join(" "));
    }
    let inputs = BTreeMap::from([("topic".to_string(), FieldValue::Text(topic))]);
    body(
        TemplateId::Poetry,
        inputs,
        FieldValue::Text(lines.join("\n")),
        vocab,
    )
}

/// Layout-preserving ablation: every field keeps its shape and length
/// distribution, but inputs and output are drawn independently. Labels for
/// yes/no and choice tasks are uniform.
fn gen_norule(
    template: TemplateId,
    vocab: &Vocabulary,
    params: &TemplateParams,
    rng: &mut Rng,
) -> Result<SampleBody, TemplateError> {
    match template {
        TemplateId::Matching => {
            let len = params.parent_len.draw(rng);
            let e1 = sample_tokens(vocab, len, rng)?;
            let e2 = sample_tokens(vocab, len, rng)?;
            let label = if rng.next_bool() { "yes" } else { "no" };
            let inputs = BTreeMap::from([
                ("entity_a".to_string(), FieldValue::Tokens(e1)),
                ("entity_b".to_string(), FieldValue::Tokens(e2)),
            ]);
            body(template, inputs, FieldValue::Text(label.to_string()), vocab)
        }
        TemplateId::MultiChoiceQa => {
            let question = sample_tokens(vocab, params.parent_len.draw(rng), rng)?;
            let mut choices = Vec::with_capacity(5);
            for _ in 0..5 {
                choices.push(sample_tokens(vocab, params.child_len.draw(rng), rng)?);
            }
            let pick = rng.below(5) as usize;
            let output = FieldValue::Tokens(choices[pick].clone());
            let inputs = BTreeMap::from([
                ("question".to_string(), FieldValue::Tokens(question)),
                ("choices".to_string(), FieldValue::TokenLists(choices)),
            ]);
            body(template, inputs, output, vocab)
        }
        TemplateId::DocumentQa => {
            let document = sample_tokens(vocab, params.parent_len.draw(rng), rng)?;
            let span_len =
                rng.range_inclusive(params.min_slen as u64, params.max_slen as u64) as usize;
            let question = sample_tokens(vocab, span_len, rng)?;
            let answer = sample_tokens(vocab, span_len + 2 * params.answer_window, rng)?;
            let inputs = BTreeMap::from([
                ("document".to_string(), FieldValue::Tokens(document)),
                ("question".to_string(), FieldValue::Tokens(question)),
            ]);
            body(template, inputs, FieldValue::Tokens(answer), vocab)
        }
        TemplateId::EntityDisambiguation => {
            let sentence = sample_tokens(vocab, params.parent_len.draw(rng), rng)?;
            let prefix = sample_tokens(vocab, params.child_len.draw(rng), rng)?;
            let support = sample_tokens(vocab, params.e_span_len - 1, rng)?;
            let e1 = sample_tokens(vocab, 1, rng)?;
            let e2 = sample_tokens(vocab, 1, rng)?;
            let answer = if rng.next_bool() { e1.clone() } else { e2.clone() };
            let inputs = BTreeMap::from([
                ("sentence".to_string(), FieldValue::Tokens(sentence)),
                ("prefix".to_string(), FieldValue::Tokens(prefix)),
                ("support".to_string(), FieldValue::Tokens(support)),
                ("choices".to_string(), FieldValue::TokenLists(vec![e1, e2])),
            ]);
            body(template, inputs, FieldValue::Tokens(answer), vocab)
        }
        TemplateId::CommonsenseSelect => {
            let sentence = sample_tokens(vocab, params.parent_len.draw(rng), rng)?;
            let base = sample_tokens(vocab, params.child_len.draw(rng), rng)?;
            let mut choices = vec![
                base.concat(&sample_tokens(vocab, params.overlap_len, rng)?),
                base.concat(&sample_tokens(vocab, params.overlap_len, rng)?),
            ];
            shuffle(&mut choices, rng);
            let pick = rng.below(2) as usize;
            let output = FieldValue::Tokens(choices[pick].clone());
            let inputs = BTreeMap::from([
                ("sentence".to_string(), FieldValue::Tokens(sentence)),
                ("choices".to_string(), FieldValue::TokenLists(choices)),
            ]);
            body(template, inputs, output, vocab)
        }
        TemplateId::TokenRetrieval => {
            let mut documents = Vec::with_capacity(params.num_docs);
            for _ in 0..params.num_docs {
                documents.push(sample_tokens(vocab, params.parent_len.draw(rng), rng)?);
            }
            let question = sample_tokens(vocab, params.overlap_len, rng)?;
            let pick = rng.below(params.num_docs as u64) as usize;
            let output = FieldValue::Tokens(documents[pick].clone());
            let inputs = BTreeMap::from([
                ("documents".to_string(), FieldValue::TokenLists(documents)),
                ("question".to_string(), FieldValue::Tokens(question)),
            ]);
            body(template, inputs, output, vocab)
        }
        TemplateId::Poetry => Err(TemplateError::UnsupportedTemplate(
            "poetry has no no-rule variant".to_string(),
        )),
    }
}

//! Task formatters: instruction + inputs + output -> training text.
//!
//! Layouts follow each template's sample data point; the no-rule variants
//! reuse the same formatter so the two differ only in content.

use std::collections::BTreeMap;

use crate::token_space::{TokenSequence, Vocabulary};

use super::{FieldValue, TemplateError, TemplateId};

pub(crate) const INSTRUCTION_MATCHING: &str =
    "Determine whether product A and product B are the same";
pub(crate) const INSTRUCTION_MULTI_CHOICE_QA: &str = "Answer the question.";
pub(crate) const INSTRUCTION_DOCUMENT_QA: &str =
    "Use the document to answer the following question.";
pub(crate) const INSTRUCTION_ENTITY_DISAMBIGUATION: &str =
    "Select the phrase which best fills in the <BLANK>.";
pub(crate) const INSTRUCTION_COMMONSENSE_SELECT: &str =
    "Select the choice which best completes the sentence.";
pub(crate) const INSTRUCTION_TOKEN_RETRIEVAL: &str = "Use the documents to answer the question.";
pub(crate) const INSTRUCTION_POETRY: &str =
    "Write a five line poem with an ABABA rhyme scheme about";

pub(crate) const BLANK_MARKER: &str = "<BLANK>";

pub(crate) fn instruction_for(template: TemplateId) -> &'static str {
    match template {
        TemplateId::Matching => INSTRUCTION_MATCHING,
        TemplateId::MultiChoiceQa => INSTRUCTION_MULTI_CHOICE_QA,
        TemplateId::DocumentQa => INSTRUCTION_DOCUMENT_QA,
        TemplateId::EntityDisambiguation => INSTRUCTION_ENTITY_DISAMBIGUATION,
        TemplateId::CommonsenseSelect => INSTRUCTION_COMMONSENSE_SELECT,
        TemplateId::TokenRetrieval => INSTRUCTION_TOKEN_RETRIEVAL,
        TemplateId::Poetry => INSTRUCTION_POETRY,
    }
}

fn field<'a>(
    inputs: &'a BTreeMap<String, FieldValue>,
    name: &'static str,
) -> Result<&'a FieldValue, TemplateError> {
    inputs.get(name).ok_or(TemplateError::MalformedSample(name))
}

fn tokens<'a>(
    inputs: &'a BTreeMap<String, FieldValue>,
    name: &'static str,
) -> Result<&'a TokenSequence, TemplateError> {
    field(inputs, name)?
        .as_tokens()
        .ok_or(TemplateError::MalformedSample(name))
}

fn token_lists<'a>(
    inputs: &'a BTreeMap<String, FieldValue>,
    name: &'static str,
) -> Result<&'a [TokenSequence], TemplateError> {
    field(inputs, name)?
        .as_token_lists()
        .ok_or(TemplateError::MalformedSample(name))
}

fn render_output(output: &FieldValue, vocab: &Vocabulary) -> String {
    match output {
        FieldValue::Text(s) => s.clone(),
        FieldValue::Tokens(t) => vocab.render(t),
        FieldValue::TokenLists(ls) => ls
            .iter()
            .map(|t| vocab.render(t))
            .collect::<Vec<_>>()
            .join(" "),
    }
}

pub(crate) fn render(
    template: TemplateId,
    instruction: &str,
    inputs: &BTreeMap<String, FieldValue>,
    output: &FieldValue,
    vocab: &Vocabulary,
) -> Result<String, TemplateError> {
    let answer = render_output(output, vocab);
    let text = match template {
        TemplateId::Matching => {
            let a = vocab.render(tokens(inputs, "entity_a")?);
            let b = vocab.render(tokens(inputs, "entity_b")?);
            format!(
                "{instruction}\n\
                 Product A: {a}\n\
                 Product B: {b}\n\
                 Question: Are Product A and Product B the same?\n\
                 Answer: {answer}"
            )
        }
        TemplateId::MultiChoiceQa => {
            let question = vocab.render(tokens(inputs, "question")?);
            let choices = token_lists(inputs, "choices")?;
            let mut text = format!("{instruction}\n{question}?\nChoices:\n");
            for choice in choices {
                text.push_str("- ");
                text.push_str(&vocab.render(choice));
                text.push('\n');
            }
            text.push_str("Answer: ");
            text.push_str(&answer);
            text
        }
        TemplateId::DocumentQa => {
            let document = vocab.render(tokens(inputs, "document")?);
            let question = vocab.render(tokens(inputs, "question")?);
            format!(
                "{instruction}\n\
                 Document: {document}\n\
                 \n\
                 Question: {question}\n\
                 Answer: {answer}"
            )
        }
        TemplateId::EntityDisambiguation => {
            let sentence = vocab.render(tokens(inputs, "sentence")?);
            let prefix = vocab.render(tokens(inputs, "prefix")?);
            let support = vocab.render(tokens(inputs, "support")?);
            let choices = token_lists(inputs, "choices")?;
            let mut text = format!(
                "{instruction}\n\
                 Sentence: {sentence}. {prefix} {BLANK_MARKER} {support}\n\
                 Choices:\n"
            );
            for choice in choices {
                text.push_str("- ");
                text.push_str(&vocab.render(choice));
                text.push('\n');
            }
            text.push_str("Answer: ");
            text.push_str(&answer);
            text
        }
        TemplateId::CommonsenseSelect => {
            let sentence = vocab.render(tokens(inputs, "sentence")?);
            let choices = token_lists(inputs, "choices")?;
            let mut text = format!("{instruction}\n{sentence}\nChoices:\n");
            for choice in choices {
                text.push_str("- ");
                text.push_str(&vocab.render(choice));
                text.push('\n');
            }
            text.push_str("Answer: ");
            text.push_str(&answer);
            text
        }
        TemplateId::TokenRetrieval => {
            let documents = token_lists(inputs, "documents")?;
            let question = vocab.render(tokens(inputs, "question")?);
            let mut text = format!("{instruction}\n");
            for (i, doc) in documents.iter().enumerate() {
                text.push_str(&format!("Document {i}: {}\n", vocab.render(doc)));
            }
            text.push_str(&format!("\nQuestion: {question}\nAnswer: {answer}"));
            text
        }
        TemplateId::Poetry => {
            let topic = field(inputs, "topic")?
                .as_text()
                .ok_or(TemplateError::MalformedSample("topic"))?;
            format!("{instruction} {topic}\n{answer}")
        }
    };
    Ok(text)
}

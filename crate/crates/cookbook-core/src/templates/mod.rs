//! Data-generating templates.
//!
//! Each template emits `(instruction, inputs, output)` triples whose output
//! follows an explicit pattern rule over random tokens: token overlap between
//! a question and candidate answers, a span window inside a document, and so
//! on. Generators are pure functions of `(vocab, params, rng stream)`, so
//! batches can be produced in parallel and remain byte-reproducible.
//!
//! `verify` re-derives each template's rule from a sample's stored inputs,
//! independently of the generator that produced it; the no-rule variants keep
//! a template's layout while severing the input-output relationship.

mod format;
mod generators;
mod verify;

pub use verify::verify_sample;

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::token_space::{Rng, TokenSequence, TokenSpaceError, Vocabulary};

#[derive(Debug, Error)]
pub enum TemplateError {
    #[error("invalid template parameters: {0}")]
    InvalidParams(String),
    #[error("document range [{lo}, {hi}] cannot hold a span of {need} tokens")]
    DocumentTooShort { lo: usize, hi: usize, need: usize },
    #[error("sentence range [{lo}, {hi}] cannot hold two entity spans of {span} tokens")]
    SentenceTooShort { lo: usize, hi: usize, span: usize },
    #[error("rhyme dictionary needs at least two groups")]
    RhymeDictTooSmall,
    #[error("rhyme group {0} has fewer than two words")]
    RhymeGroupTooSmall(usize),
    #[error("template {0} is not supported by this operation")]
    UnsupportedTemplate(String),
    #[error("could not produce a unique answer after {0} attempts")]
    TieRetriesExhausted(usize),
    #[error("sample is missing or mistypes field {0:?}")]
    MalformedSample(&'static str),
    #[error(transparent)]
    TokenSpace(#[from] TokenSpaceError),
}

/// The seven rule-based templates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TemplateId {
    Matching,
    MultiChoiceQa,
    DocumentQa,
    EntityDisambiguation,
    CommonsenseSelect,
    TokenRetrieval,
    Poetry,
}

impl TemplateId {
    pub const ALL: [TemplateId; 7] = [
        TemplateId::Matching,
        TemplateId::MultiChoiceQa,
        TemplateId::DocumentQa,
        TemplateId::EntityDisambiguation,
        TemplateId::CommonsenseSelect,
        TemplateId::TokenRetrieval,
        TemplateId::Poetry,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TemplateId::Matching => "matching",
            TemplateId::MultiChoiceQa => "multi_choice_qa",
            TemplateId::DocumentQa => "document_qa",
            TemplateId::EntityDisambiguation => "entity_disambiguation",
            TemplateId::CommonsenseSelect => "commonsense_select",
            TemplateId::TokenRetrieval => "token_retrieval",
            TemplateId::Poetry => "poetry",
        }
    }

    fn code(self) -> u64 {
        match self {
            TemplateId::Matching => 0,
            TemplateId::MultiChoiceQa => 1,
            TemplateId::DocumentQa => 2,
            TemplateId::EntityDisambiguation => 3,
            TemplateId::CommonsenseSelect => 4,
            TemplateId::TokenRetrieval => 5,
            TemplateId::Poetry => 6,
        }
    }
}

impl FromStr for TemplateId {
    type Err = TemplateError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        TemplateId::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| TemplateError::UnsupportedTemplate(s.to_string()))
    }
}

impl fmt::Display for TemplateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A generator is either a rule-based template or its no-rule ablation,
/// which keeps the layout but draws every field independently.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GeneratorId {
    Template(TemplateId),
    NoRule(TemplateId),
}

impl GeneratorId {
    /// Template whose layout (formatter, field names) this generator uses.
    pub fn layout(self) -> TemplateId {
        match self {
            GeneratorId::Template(t) | GeneratorId::NoRule(t) => t,
        }
    }

    pub fn is_norule(self) -> bool {
        matches!(self, GeneratorId::NoRule(_))
    }

    /// Stable numeric code used to key RNG streams.
    pub fn code(self) -> u64 {
        match self {
            GeneratorId::Template(t) => t.code(),
            GeneratorId::NoRule(t) => 8 + t.code(),
        }
    }

    pub fn name(self) -> String {
        match self {
            GeneratorId::Template(t) => t.name().to_string(),
            GeneratorId::NoRule(t) => format!("{}_norule", t.name()),
        }
    }
}

impl FromStr for GeneratorId {
    type Err = TemplateError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if let Some(base) = s.strip_suffix("_norule") {
            Ok(GeneratorId::NoRule(base.parse()?))
        } else {
            Ok(GeneratorId::Template(s.parse()?))
        }
    }
}

impl fmt::Display for GeneratorId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl Serialize for GeneratorId {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.name())
    }
}

impl<'de> Deserialize<'de> for GeneratorId {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Inclusive length range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LenRange {
    pub lo: usize,
    pub hi: usize,
}

impl LenRange {
    pub fn new(lo: usize, hi: usize) -> Self {
        LenRange { lo, hi }
    }

    pub fn draw(&self, rng: &mut Rng) -> usize {
        rng.range_inclusive(self.lo as u64, self.hi as u64) as usize
    }
}

/// Word lists whose members mutually rhyme, one list per group.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RhymeDictionary {
    groups: Vec<Vec<String>>,
}

impl RhymeDictionary {
    pub fn new(groups: Vec<Vec<String>>) -> Result<Self, TemplateError> {
        for (i, group) in groups.iter().enumerate() {
            if group.len() < 2 || group.iter().any(String::is_empty) {
                return Err(TemplateError::RhymeGroupTooSmall(i));
            }
        }
        Ok(RhymeDictionary { groups })
    }

    /// One rhyme group per line, words space-separated.
    pub fn from_file(path: &Path) -> Result<Self, std::io::Error> {
        let text = std::fs::read_to_string(path)?;
        RhymeDictionary::from_text(&text)
            .map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, e.to_string()))
    }

    pub fn from_text(text: &str) -> Result<Self, TemplateError> {
        let groups = text
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(|l| l.split_whitespace().map(str::to_string).collect())
            .collect();
        RhymeDictionary::new(groups)
    }

    pub fn groups(&self) -> &[Vec<String>] {
        &self.groups
    }

    pub fn len(&self) -> usize {
        self.groups.len()
    }

    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }
}

impl Default for RhymeDictionary {
    fn default() -> Self {
        let groups = [
            "day way play stay gray bay clay spray",
            "light night bright sight flight height",
            "trend bend send lend mend blend",
            "sea free tree bee key glee",
            "moon soon tune noon spoon dune",
            "rain plain chain brain gain grain",
            "glow flow snow grow slow crow",
            "stream dream beam gleam theme seam",
        ];
        RhymeDictionary::from_text(&groups.join("\n")).expect("built-in rhyme groups are valid")
    }
}

/// Knobs shared by the generators. Defaults are per-template; see
/// [`TemplateParams::defaults`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TemplateParams {
    /// Replacement probability for the matching near-duplicate branch; also
    /// sets the yes/no overlap threshold.
    pub noise: f64,
    /// Tokens shared between a question/sentence and the planted answer.
    pub overlap_len: usize,
    /// Question span bounds for document QA.
    pub min_slen: usize,
    pub max_slen: usize,
    /// Entity span length for entity disambiguation.
    pub e_span_len: usize,
    /// Tokens kept on each side of the question span in the answer.
    pub answer_window: usize,
    /// Parent input length (document, sentence, entity).
    pub parent_len: LenRange,
    /// Child input length (choice bases, second-sentence prefix).
    pub child_len: LenRange,
    /// Poetry line length, excluding topic and rhyme word.
    pub line_len: LenRange,
    /// Document count for token retrieval.
    pub num_docs: usize,
    pub rhyme_dict: RhymeDictionary,
}

impl TemplateParams {
    /// Per-template defaults, sized like the sample data points each
    /// template is modeled on.
    pub fn defaults(template: TemplateId) -> Self {
        let parent_len = match template {
            TemplateId::Matching => LenRange::new(4, 12),
            TemplateId::MultiChoiceQa | TemplateId::CommonsenseSelect => LenRange::new(5, 15),
            TemplateId::DocumentQa | TemplateId::TokenRetrieval => LenRange::new(64, 256),
            TemplateId::EntityDisambiguation => LenRange::new(10, 20),
            TemplateId::Poetry => LenRange::new(6, 12),
        };
        TemplateParams {
            noise: 0.1,
            overlap_len: 3,
            min_slen: 3,
            max_slen: 8,
            e_span_len: 3,
            answer_window: 3,
            parent_len,
            child_len: LenRange::new(5, 15),
            line_len: LenRange::new(6, 12),
            num_docs: 10,
            rhyme_dict: RhymeDictionary::default(),
        }
    }

    /// Validates the parameter set for one template.
    pub fn validate(&self, template: TemplateId) -> Result<(), TemplateError> {
        if self.parent_len.lo == 0 || self.parent_len.lo > self.parent_len.hi {
            return Err(TemplateError::InvalidParams(format!(
                "parent length range [{}, {}]",
                self.parent_len.lo, self.parent_len.hi
            )));
        }
        if self.child_len.lo == 0 || self.child_len.lo > self.child_len.hi {
            return Err(TemplateError::InvalidParams(format!(
                "child length range [{}, {}]",
                self.child_len.lo, self.child_len.hi
            )));
        }
        match template {
            TemplateId::Matching => {
                if !(0.0..=1.0).contains(&self.noise) || self.noise.is_nan() {
                    return Err(TemplateError::InvalidParams(format!(
                        "noise {} outside [0, 1]",
                        self.noise
                    )));
                }
            }
            TemplateId::MultiChoiceQa | TemplateId::CommonsenseSelect => {
                if self.overlap_len == 0 || self.overlap_len >= self.child_len.lo {
                    return Err(TemplateError::InvalidParams(format!(
                        "overlap_len {} must be in [1, {})",
                        self.overlap_len, self.child_len.lo
                    )));
                }
            }
            TemplateId::TokenRetrieval => {
                if self.overlap_len == 0 {
                    return Err(TemplateError::InvalidParams("overlap_len 0".into()));
                }
                if self.num_docs < 2 {
                    return Err(TemplateError::InvalidParams(format!(
                        "num_docs {} < 2",
                        self.num_docs
                    )));
                }
            }
            TemplateId::DocumentQa => {
                if self.min_slen == 0 || self.min_slen > self.max_slen {
                    return Err(TemplateError::InvalidParams(format!(
                        "span range [{}, {}]",
                        self.min_slen, self.max_slen
                    )));
                }
                let need = self.max_slen + 2 * self.answer_window;
                if self.parent_len.lo < need {
                    return Err(TemplateError::DocumentTooShort {
                        lo: self.parent_len.lo,
                        hi: self.parent_len.hi,
                        need,
                    });
                }
            }
            TemplateId::EntityDisambiguation => {
                if self.e_span_len < 2 {
                    return Err(TemplateError::InvalidParams(format!(
                        "e_span_len {} < 2",
                        self.e_span_len
                    )));
                }
                if self.parent_len.lo < 2 * self.e_span_len + 2 {
                    return Err(TemplateError::SentenceTooShort {
                        lo: self.parent_len.lo,
                        hi: self.parent_len.hi,
                        span: self.e_span_len,
                    });
                }
            }
            TemplateId::Poetry => {
                if self.rhyme_dict.len() < 2 {
                    return Err(TemplateError::RhymeDictTooSmall);
                }
                // Re-check group invariants: dictionaries arriving through
                // deserialization bypass the constructor.
                for (i, group) in self.rhyme_dict.groups().iter().enumerate() {
                    if group.len() < 2 || group.iter().any(String::is_empty) {
                        return Err(TemplateError::RhymeGroupTooSmall(i));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Optional per-field overrides applied over [`TemplateParams::defaults`],
/// the form parameters take in plan files.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsPatch {
    pub noise: Option<f64>,
    pub overlap_len: Option<usize>,
    pub min_slen: Option<usize>,
    pub max_slen: Option<usize>,
    pub e_span_len: Option<usize>,
    pub answer_window: Option<usize>,
    pub parent_len: Option<LenRange>,
    pub child_len: Option<LenRange>,
    pub line_len: Option<LenRange>,
    pub num_docs: Option<usize>,
    /// Inline rhyme groups, e.g. `[["day", "way"], ["light", "night"]]`.
    pub rhyme_dict: Option<RhymeDictionary>,
}

impl ParamsPatch {
    pub fn apply(&self, mut params: TemplateParams) -> TemplateParams {
        macro_rules! patch {
            ($($field:ident),*) => {
                $(if let Some(v) = self.$field { params.$field = v; })*
            };
        }
        patch!(
            noise,
            overlap_len,
            min_slen,
            max_slen,
            e_span_len,
            answer_window,
            parent_len,
            child_len,
            line_len,
            num_docs
        );
        if let Some(dict) = &self.rhyme_dict {
            params.rhyme_dict = dict.clone();
        }
        params
    }
}

/// One named input of a sample: rendered text, a token sequence, or a list
/// of token sequences (answer choices, retrieval documents).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FieldValue {
    Text(String),
    Tokens(TokenSequence),
    TokenLists(Vec<TokenSequence>),
}

impl FieldValue {
    pub fn as_text(&self) -> Option<&str> {
        match self {
            FieldValue::Text(s) => Some(s),
            _ => None,
        }
    }

    pub fn as_tokens(&self) -> Option<&TokenSequence> {
        match self {
            FieldValue::Tokens(t) => Some(t),
            _ => None,
        }
    }

    pub fn as_token_lists(&self) -> Option<&[TokenSequence]> {
        match self {
            FieldValue::TokenLists(ls) => Some(ls),
            _ => None,
        }
    }
}

/// One generated training example.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub generator: GeneratorId,
    pub instruction: String,
    pub inputs: BTreeMap<String, FieldValue>,
    pub output: FieldValue,
    /// The full formatted training text; a pure function of
    /// `(instruction, inputs, output)` given the vocabulary.
    pub text: String,
    pub master_seed: u64,
    pub sample_index: u64,
}

impl Sample {
    pub fn input(&self, name: &'static str) -> Result<&FieldValue, TemplateError> {
        self.inputs
            .get(name)
            .ok_or(TemplateError::MalformedSample(name))
    }

    pub fn input_tokens(&self, name: &'static str) -> Result<&TokenSequence, TemplateError> {
        self.input(name)?
            .as_tokens()
            .ok_or(TemplateError::MalformedSample(name))
    }

    pub fn input_token_lists(&self, name: &'static str) -> Result<&[TokenSequence], TemplateError> {
        self.input(name)?
            .as_token_lists()
            .ok_or(TemplateError::MalformedSample(name))
    }

    pub fn input_text(&self, name: &'static str) -> Result<&str, TemplateError> {
        self.input(name)?
            .as_text()
            .ok_or(TemplateError::MalformedSample(name))
    }
}

/// Generates one sample on the stream keyed by
/// `(master_seed, generator, sample_index)`.
pub fn generate_sample(
    generator: GeneratorId,
    vocab: &Vocabulary,
    params: &TemplateParams,
    master_seed: u64,
    sample_index: u64,
) -> Result<Sample, TemplateError> {
    params.validate(generator.layout())?;
    let mut rng = Rng::for_stream(master_seed, generator.code(), sample_index);
    let body = generators::generate(generator, vocab, params, &mut rng)?;
    Ok(Sample {
        generator,
        instruction: body.instruction,
        inputs: body.inputs,
        output: body.output,
        text: body.text,
        master_seed,
        sample_index,
    })
}

/// Recomputes the formatted text of a sample from its parts; used to check
/// that `text` really is a pure function of the sample contents.
pub fn render_sample_text(
    generator: GeneratorId,
    instruction: &str,
    inputs: &BTreeMap<String, FieldValue>,
    output: &FieldValue,
    vocab: &Vocabulary,
) -> Result<String, TemplateError> {
    format::render(generator.layout(), instruction, inputs, output, vocab)
}

pub(crate) struct SampleBody {
    pub instruction: String,
    pub inputs: BTreeMap<String, FieldValue>,
    pub output: FieldValue,
    pub text: String,
}

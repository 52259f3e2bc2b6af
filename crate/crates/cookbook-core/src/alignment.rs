//! Template-rule adherence of natural-language samples.
//!
//! Per-task scorers map a sample's input-output relationship to `[0, 1]`:
//! question-word proximity to the located answer (document QA), the distance
//! gap between the two choices' unique words and the sentence (commonsense
//! selection), and entity word overlap (matching).
//!
//! Scores are collected separately for samples a tuned model newly gets right
//! (`D+`) versus still gets wrong (`D-`, base model wrong in both), and the
//! two empirical CDFs are compared with the exact two-sample
//! Kolmogorov–Smirnov sup-difference plus its asymptotic p-value.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum AlignmentError {
    #[error("gold answer not found in document")]
    AnswerNotInDocument,
    #[error("entity field is empty")]
    EmptyEntity,
    #[error("both score sets must be non-empty")]
    EmptySampleSet,
    #[error("example {index}: missing or empty field {field:?} for task {task}")]
    MissingField {
        index: usize,
        field: &'static str,
        task: &'static str,
    },
    #[error("embedding table: {0}")]
    BadEmbeddingTable(String),
    #[error("examples JSONL line {0}: {1}")]
    BadExample(usize, String),
}

/// Task kinds with alignment scorers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskKind {
    DocumentQa,
    CommonsenseSelect,
    Matching,
}

impl TaskKind {
    fn name(self) -> &'static str {
        match self {
            TaskKind::DocumentQa => "document_qa",
            TaskKind::CommonsenseSelect => "commonsense_select",
            TaskKind::Matching => "matching",
        }
    }
}

/// One natural-language evaluation sample with both models' predictions.
/// Task-specific fields are optional in the wire format; [`NLExample::validate`]
/// checks the ones a task requires.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct NLExample {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub document: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub question: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sentence: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub choice_a: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub choice_b: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub entity_a: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub entity_b: Option<String>,
    pub gold: String,
    pub pred_base: String,
    pub pred_tuned: String,
}

impl NLExample {
    fn required(task: TaskKind) -> &'static [&'static str] {
        match task {
            TaskKind::DocumentQa => &["document", "question"],
            TaskKind::CommonsenseSelect => &["sentence", "choice_a", "choice_b"],
            TaskKind::Matching => &["entity_a", "entity_b"],
        }
    }

    fn get(&self, field: &str) -> Option<&str> {
        let v = match field {
            "document" => &self.document,
            "question" => &self.question,
            "sentence" => &self.sentence,
            "choice_a" => &self.choice_a,
            "choice_b" => &self.choice_b,
            "entity_a" => &self.entity_a,
            "entity_b" => &self.entity_b,
            _ => &None,
        };
        v.as_deref()
    }

    pub fn validate(&self, task: TaskKind, index: usize) -> Result<(), AlignmentError> {
        for &field in Self::required(task) {
            if self.get(field).is_none_or(str::is_empty) {
                return Err(AlignmentError::MissingField {
                    index,
                    field,
                    task: task.name(),
                });
            }
        }
        if self.gold.is_empty() {
            return Err(AlignmentError::MissingField {
                index,
                field: "gold",
                task: task.name(),
            });
        }
        Ok(())
    }
}

/// Parses one example per JSONL line.
pub fn read_examples(text: &str, task: TaskKind) -> Result<Vec<NLExample>, AlignmentError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let ex: NLExample = serde_json::from_str(line)
            .map_err(|e| AlignmentError::BadExample(i + 1, e.to_string()))?;
        ex.validate(task, i + 1)?;
        out.push(ex);
    }
    Ok(out)
}

fn words(text: &str) -> Vec<&str> {
    text.split_whitespace().collect()
}

/// Word-level distance in `[0, 1]` used by the commonsense scorer.
#[derive(Debug, Clone)]
pub enum WordDistance {
    /// 0 for identical words, 1 otherwise.
    HammingIdentity,
    /// Cosine distance `(1 - cos) / 2` over an embedding table; word pairs
    /// with a missing embedding score the maximum distance 1.
    EmbeddingCosine(EmbeddingTable),
}

impl WordDistance {
    fn distance(&self, a: &str, b: &str) -> f64 {
        match self {
            WordDistance::HammingIdentity => {
                if a == b {
                    0.0
                } else {
                    1.0
                }
            }
            WordDistance::EmbeddingCosine(table) => match (table.get(a), table.get(b)) {
                (Some(u), Some(v)) => {
                    let dot: f64 = u.iter().zip(v).map(|(x, y)| x * y).sum();
                    let nu: f64 = u.iter().map(|x| x * x).sum::<f64>().sqrt();
                    let nv: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                    if nu == 0.0 || nv == 0.0 {
                        1.0
                    } else {
                        ((1.0 - dot / (nu * nv)) / 2.0).clamp(0.0, 1.0)
                    }
                }
                _ => 1.0,
            },
        }
    }
}

/// Word-to-vector map loaded from a text file: one word per line followed by
/// its space-separated coordinates.
#[derive(Debug, Clone, Default)]
pub struct EmbeddingTable {
    vectors: HashMap<String, Vec<f64>>,
}

impl EmbeddingTable {
    pub fn new(vectors: HashMap<String, Vec<f64>>) -> Self {
        EmbeddingTable { vectors }
    }

    pub fn from_file(path: &Path) -> Result<Self, std::io::Error> {
        let text = std::fs::read_to_string(path)?;
        EmbeddingTable::from_text(&text)
            .map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, e.to_string()))
    }

    pub fn from_text(text: &str) -> Result<Self, AlignmentError> {
        let mut vectors = HashMap::new();
        let mut dim = None;
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let mut parts = line.split_whitespace();
            let word = parts
                .next()
                .ok_or_else(|| AlignmentError::BadEmbeddingTable(format!("line {}", i + 1)))?;
            let vec: Result<Vec<f64>, _> = parts.map(str::parse::<f64>).collect();
            let vec = vec.map_err(|e| {
                AlignmentError::BadEmbeddingTable(format!("line {}: {e}", i + 1))
            })?;
            if vec.is_empty() {
                return Err(AlignmentError::BadEmbeddingTable(format!(
                    "line {}: no coordinates",
                    i + 1
                )));
            }
            if *dim.get_or_insert(vec.len()) != vec.len() {
                return Err(AlignmentError::BadEmbeddingTable(format!(
                    "line {}: dimension {} != {}",
                    i + 1,
                    vec.len(),
                    dim.unwrap()
                )));
            }
            vectors.insert(word.to_string(), vec);
        }
        Ok(EmbeddingTable { vectors })
    }

    fn get(&self, word: &str) -> Option<&Vec<f64>> {
        self.vectors.get(word)
    }
}

/// Fraction of question words appearing within `window` words of the located
/// gold answer. The answer is located at its first word-level occurrence in
/// the document.
pub fn score_document_qa(ex: &NLExample, window: usize) -> Result<f64, AlignmentError> {
    let doc = words(ex.document.as_deref().unwrap_or_default());
    let question = words(ex.question.as_deref().unwrap_or_default());
    let answer = words(&ex.gold);
    if answer.is_empty() || question.is_empty() {
        return Err(AlignmentError::AnswerNotInDocument);
    }
    let start = doc
        .windows(answer.len())
        .position(|w| w == answer.as_slice())
        .ok_or(AlignmentError::AnswerNotInDocument)?;
    let lo = start.saturating_sub(window);
    let hi = usize::min(doc.len(), start + answer.len() + window);
    let near: HashSet<&str> = doc[lo..hi].iter().copied().collect();
    let hits = question.iter().filter(|w| near.contains(*w)).count();
    Ok(hits as f64 / question.len() as f64)
}

/// Commonsense score plus the degenerate-choice flag.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CommonsenseScore {
    pub score: f64,
    /// Set when a choice has no unique words, in which case the score is 0.
    pub no_unique_words: bool,
}

/// Absolute gap between the two choices' minimum word distance to the
/// sentence, computed over words unique to each choice.
pub fn score_commonsense(ex: &NLExample, dist: &WordDistance) -> CommonsenseScore {
    let sentence = words(ex.sentence.as_deref().unwrap_or_default());
    let a: HashSet<&str> = words(ex.choice_a.as_deref().unwrap_or_default())
        .into_iter()
        .collect();
    let b: HashSet<&str> = words(ex.choice_b.as_deref().unwrap_or_default())
        .into_iter()
        .collect();
    let unique_a: Vec<&str> = a.difference(&b).copied().collect();
    let unique_b: Vec<&str> = b.difference(&a).copied().collect();
    if unique_a.is_empty() || unique_b.is_empty() || sentence.is_empty() {
        return CommonsenseScore {
            score: 0.0,
            no_unique_words: true,
        };
    }
    let min_dist = |unique: &[&str]| {
        unique
            .iter()
            .flat_map(|u| sentence.iter().map(|s| dist.distance(u, s)))
            .fold(f64::INFINITY, f64::min)
    };
    CommonsenseScore {
        score: (min_dist(&unique_a) - min_dist(&unique_b)).abs(),
        no_unique_words: false,
    }
}

/// Distinct-word overlap between the two entities, normalized by the smaller
/// distinct-word count.
pub fn score_matching(ex: &NLExample) -> Result<f64, AlignmentError> {
    let a: HashSet<&str> = words(ex.entity_a.as_deref().unwrap_or_default())
        .into_iter()
        .collect();
    let b: HashSet<&str> = words(ex.entity_b.as_deref().unwrap_or_default())
        .into_iter()
        .collect();
    if a.is_empty() || b.is_empty() {
        return Err(AlignmentError::EmptyEntity);
    }
    let shared = a.intersection(&b).count();
    Ok(shared as f64 / usize::min(a.len(), b.len()) as f64)
}

/// Normalization applied before exact-match correctness.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MatchConfig {
    pub lowercase: bool,
    pub squeeze_whitespace: bool,
    pub strip_punctuation: bool,
}

impl Default for MatchConfig {
    fn default() -> Self {
        MatchConfig {
            lowercase: true,
            squeeze_whitespace: true,
            strip_punctuation: true,
        }
    }
}

impl MatchConfig {
    pub fn normalize(&self, text: &str) -> String {
        let mut s: String = if self.strip_punctuation {
            text.chars().filter(|c| !c.is_ascii_punctuation()).collect()
        } else {
            text.to_string()
        };
        if self.lowercase {
            s = s.to_lowercase();
        }
        if self.squeeze_whitespace {
            s = s.split_whitespace().collect::<Vec<_>>().join(" ");
        }
        s
    }

    pub fn is_correct(&self, pred: &str, gold: &str) -> bool {
        self.normalize(pred) == self.normalize(gold)
    }
}

/// Splits base-model-incorrect examples by whether the tuned model answers
/// them correctly: `D+` = base wrong & tuned right, `D-` = both wrong.
/// Returns indices into `examples`.
pub fn split_correct_sets(examples: &[NLExample], matcher: &MatchConfig) -> (Vec<usize>, Vec<usize>) {
    let mut plus = Vec::new();
    let mut minus = Vec::new();
    for (i, ex) in examples.iter().enumerate() {
        if matcher.is_correct(&ex.pred_base, &ex.gold) {
            continue;
        }
        if matcher.is_correct(&ex.pred_tuned, &ex.gold) {
            plus.push(i);
        } else {
            minus.push(i);
        }
    }
    (plus, minus)
}

/// Two-sided asymptotic Kolmogorov distribution
/// `Q(lambda) = 2 * sum_{k>=1} (-1)^{k-1} exp(-2 k^2 lambda^2)`, truncated
/// once terms drop below 1e-12. Returns 1 when the series has not yet
/// converged (tiny lambda), matching the exact limit Q(0+) = 1.
fn kolmogorov_q(lambda: f64) -> f64 {
    let mut sum = 0.0;
    let mut sign = 1.0;
    for k in 1..=200u32 {
        let term = (-2.0 * f64::from(k * k) * lambda * lambda).exp();
        sum += sign * term;
        if term < 1e-12 {
            return (2.0 * sum).clamp(0.0, 1.0);
        }
        sign = -sign;
    }
    1.0
}

/// Exact two-sample KS statistic (sup of the ECDF difference over the merged
/// score grid) and its asymptotic p-value with the finite-sample correction
/// `lambda = (sqrt(ne) + 0.12 + 0.11 / sqrt(ne)) * D`, `ne = n1 n2 / (n1 + n2)`.
///
/// The ECDF difference at a grid point is the rational
/// `(i * n2 - j * n1) / (n1 * n2)`; the sup is taken over exact integer
/// numerators and divided once, so the result is the correctly rounded value
/// of the true rational statistic.
pub fn ks_statistic(s_plus: &[f64], s_minus: &[f64]) -> Result<(f64, f64), AlignmentError> {
    if s_plus.is_empty() || s_minus.is_empty() {
        return Err(AlignmentError::EmptySampleSet);
    }
    let mut a = s_plus.to_vec();
    let mut b = s_minus.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (n1, n2) = (a.len() as u64, b.len() as u64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut max_num: u64 = 0;
    while i < a.len() || j < b.len() {
        let v = match (a.get(i), b.get(j)) {
            (Some(&x), Some(&y)) => x.min(y),
            (Some(&x), None) => x,
            (None, Some(&y)) => y,
            (None, None) => unreachable!("loop condition"),
        };
        while i < a.len() && a[i] <= v {
            i += 1;
        }
        while j < b.len() && b[j] <= v {
            j += 1;
        }
        let num = (i as u64 * n2).abs_diff(j as u64 * n1);
        if num > max_num {
            max_num = num;
        }
    }
    let d = max_num as f64 / (n1 * n2) as f64;
    let (n1, n2) = (n1 as f64, n2 as f64);
    let ne = n1 * n2 / (n1 + n2);
    let sqrt_ne = ne.sqrt();
    let lambda = (sqrt_ne + 0.12 + 0.11 / sqrt_ne) * d;
    Ok((d, kolmogorov_q(lambda)))
}

/// Outcome of an alignment run over one task's examples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlignmentReport {
    pub task: TaskKind,
    pub scores_plus: Vec<f64>,
    pub scores_minus: Vec<f64>,
    /// Sup-difference of the two empirical CDFs; absent when either side is
    /// empty.
    pub statistic: Option<f64>,
    pub p_value: Option<f64>,
    pub status: ReportStatus,
    pub excluded: ExcludedCounts,
    /// Distinct score values appearing in both sets (ties across sides).
    pub tied_scores: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportStatus {
    Ok,
    EmptyPlus,
    EmptyMinus,
    EmptyBoth,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExcludedCounts {
    pub answer_not_in_document: usize,
    pub no_unique_words: usize,
}

/// Scorer configuration for [`align_examples`].
#[derive(Debug, Clone)]
pub struct AlignmentOptions {
    /// Proximity window for the document-QA scorer.
    pub window: usize,
    pub distance: WordDistance,
    pub matcher: MatchConfig,
}

impl Default for AlignmentOptions {
    fn default() -> Self {
        AlignmentOptions {
            window: 10,
            distance: WordDistance::HammingIdentity,
            matcher: MatchConfig::default(),
        }
    }
}

/// Full pipeline: split into `D+`/`D-`, score each side, compute the
/// statistic when both sides are non-empty.
pub fn align_examples(
    examples: &[NLExample],
    task: TaskKind,
    options: &AlignmentOptions,
) -> Result<AlignmentReport, AlignmentError> {
    let (plus_idx, minus_idx) = split_correct_sets(examples, &options.matcher);
    let mut excluded = ExcludedCounts::default();
    let mut score_side = |indices: &[usize]| -> Result<Vec<f64>, AlignmentError> {
        let mut scores = Vec::with_capacity(indices.len());
        for &i in indices {
            let ex = &examples[i];
            match task {
                TaskKind::DocumentQa => match score_document_qa(ex, options.window) {
                    Ok(s) => scores.push(s),
                    Err(AlignmentError::AnswerNotInDocument) => {
                        excluded.answer_not_in_document += 1;
                    }
                    Err(e) => return Err(e),
                },
                TaskKind::CommonsenseSelect => {
                    let outcome = score_commonsense(ex, &options.distance);
                    if outcome.no_unique_words {
                        excluded.no_unique_words += 1;
                    }
                    scores.push(outcome.score);
                }
                TaskKind::Matching => scores.push(score_matching(ex)?),
            }
        }
        Ok(scores)
    };
    let scores_plus = score_side(&plus_idx)?;
    let scores_minus = score_side(&minus_idx)?;
    let status = match (scores_plus.is_empty(), scores_minus.is_empty()) {
        (false, false) => ReportStatus::Ok,
        (true, false) => ReportStatus::EmptyPlus,
        (false, true) => ReportStatus::EmptyMinus,
        (true, true) => ReportStatus::EmptyBoth,
    };
    let (statistic, p_value) = if status == ReportStatus::Ok {
        let (d, p) = ks_statistic(&scores_plus, &scores_minus)?;
        (Some(d), Some(p))
    } else {
        (None, None)
    };
    let set_plus: BTreeSet<u64> = scores_plus.iter().map(|s| s.to_bits()).collect();
    let set_minus: BTreeSet<u64> = scores_minus.iter().map(|s| s.to_bits()).collect();
    let tied_scores = set_plus.intersection(&set_minus).count();
    Ok(AlignmentReport {
        task,
        scores_plus,
        scores_minus,
        statistic,
        p_value,
        status,
        excluded,
        tied_scores,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn doc_qa_example(document: &str, question: &str, gold: &str) -> NLExample {
        NLExample {
            document: Some(document.to_string()),
            question: Some(question.to_string()),
            gold: gold.to_string(),
            pred_base: String::new(),
            pred_tuned: String::new(),
            ..Default::default()
        }
    }

    #[test]
    fn doc_qa_question_inside_answer_scores_one() {
        let ex = doc_qa_example("a b c d e f g h", "d e", "c d e f");
        assert_eq!(score_document_qa(&ex, 0).unwrap(), 1.0);
    }

    #[test]
    fn doc_qa_far_question_scores_zero() {
        // 20 words; answer at 10..13, question words at the far end.
        let doc: Vec<String> = (1..=20).map(|i| format!("w{i}")).collect();
        let ex = doc_qa_example(&doc.join(" "), "w20", "w10 w11 w12");
        assert_eq!(score_document_qa(&ex, 3).unwrap(), 0.0);
    }

    #[test]
    fn doc_qa_hand_enumerated_half() {
        // doc w1..w20, answer w10 w11 w12 (0-based start 9), window 3 covers
        // w7..w15; question {w9, w18} -> 1 of 2 inside.
        let doc: Vec<String> = (1..=20).map(|i| format!("w{i}")).collect();
        let ex = doc_qa_example(&doc.join(" "), "w9 w18", "w10 w11 w12");
        assert_eq!(score_document_qa(&ex, 3).unwrap(), 0.5);
    }

    #[test]
    fn doc_qa_missing_answer_is_excluded() {
        let ex = doc_qa_example("a b c", "a", "z q");
        assert_eq!(
            score_document_qa(&ex, 3).unwrap_err(),
            AlignmentError::AnswerNotInDocument
        );
    }

    fn commonsense_example(sentence: &str, a: &str, b: &str) -> NLExample {
        NLExample {
            sentence: Some(sentence.to_string()),
            choice_a: Some(a.to_string()),
            choice_b: Some(b.to_string()),
            gold: "x".to_string(),
            ..Default::default()
        }
    }

    #[test]
    fn commonsense_identical_choices_flagged_zero() {
        let ex = commonsense_example("the sky is blue", "same words", "same words");
        let out = score_commonsense(&ex, &WordDistance::HammingIdentity);
        assert_eq!(out.score, 0.0);
        assert!(out.no_unique_words);
    }

    #[test]
    fn commonsense_hamming_full_separation() {
        // choice_a shares "sky" with the sentence, choice_b shares nothing.
        let ex = commonsense_example("the sky is blue", "bright sky", "bright mud");
        let out = score_commonsense(&ex, &WordDistance::HammingIdentity);
        assert_eq!(out.score, 1.0);
        assert!(!out.no_unique_words);
    }

    #[test]
    fn commonsense_embedding_matches_exhaustive_enumeration() {
        // Three-word sentence with a tiny 2-D table; expected value computed
        // by enumerating all unique-word/sentence-word pairs by hand.
        let table = EmbeddingTable::from_text(
            "sun 1 0\nmoon 0 1\nstar 1 1\nrock -1 0\ndust 0 -1\n",
        )
        .unwrap();
        let dist = WordDistance::EmbeddingCosine(table);
        let ex = commonsense_example("sun moon star", "bright rock", "bright dust");
        // unique_a = {rock}: distances to sun, moon, star =
        //   (1-(-1))/2 = 1, (1-0)/2 = 0.5, (1-(-1/sqrt2... )) -> cos(rock,star)
        //   = -1/sqrt(2) -> (1 + 0.7071)/2 = 0.8536; min = 0.5
        // unique_b = {dust}: same by symmetry (moon <-> sun roles) = 0.5
        // score = |0.5 - 0.5| = 0
        let out = score_commonsense(&ex, &dist);
        assert!((out.score - 0.0).abs() < 1e-12);

        // Non-symmetric case: choice_b's unique word matches a sentence word
        // exactly (distance 0), choice_a stays at 0.5.
        let ex2 = commonsense_example("sun moon star", "bright rock", "bright sun");
        let dist2 = match &dist {
            WordDistance::EmbeddingCosine(t) => WordDistance::EmbeddingCosine(t.clone()),
            _ => unreachable!(),
        };
        let out2 = score_commonsense(&ex2, &dist2);
        assert!((out2.score - 0.5).abs() < 1e-12);
    }

    #[test]
    fn matching_identical_and_disjoint() {
        let ex = NLExample {
            entity_a: Some("alpha beta gamma".into()),
            entity_b: Some("alpha beta gamma".into()),
            gold: "yes".into(),
            ..Default::default()
        };
        assert_eq!(score_matching(&ex).unwrap(), 1.0);
        let ex2 = NLExample {
            entity_a: Some("alpha beta".into()),
            entity_b: Some("gamma delta".into()),
            gold: "no".into(),
            ..Default::default()
        };
        assert_eq!(score_matching(&ex2).unwrap(), 0.0);
        let ex3 = NLExample {
            entity_a: Some("".into()),
            entity_b: Some("x".into()),
            gold: "no".into(),
            ..Default::default()
        };
        assert_eq!(score_matching(&ex3).unwrap_err(), AlignmentError::EmptyEntity);
    }

    fn pred_example(gold: &str, base: &str, tuned: &str) -> NLExample {
        NLExample {
            gold: gold.into(),
            pred_base: base.into(),
            pred_tuned: tuned.into(),
            ..Default::default()
        }
    }

    #[test]
    fn split_sets_truth_table() {
        // Six examples enumerating (base right/wrong) x (tuned right/wrong).
        let examples = vec![
            pred_example("a", "a", "a"), // base right -> dropped
            pred_example("a", "a", "b"), // base right -> dropped
            pred_example("a", "b", "a"), // D+
            pred_example("a", "b", "b"), // D-
            pred_example("a", "c", "A"), // D+ (case-normalized match)
            pred_example("a", "c", "d"), // D-
        ];
        let (plus, minus) = split_correct_sets(&examples, &MatchConfig::default());
        assert_eq!(plus, vec![2, 4]);
        assert_eq!(minus, vec![3, 5]);
    }

    #[test]
    fn split_sets_degenerate_cases() {
        let all_plus = vec![pred_example("a", "x", "a"), pred_example("b", "x", "b")];
        let (plus, minus) = split_correct_sets(&all_plus, &MatchConfig::default());
        assert_eq!(plus.len(), 2);
        assert!(minus.is_empty());

        let base_right = vec![pred_example("a", "a", "a")];
        let (plus, minus) = split_correct_sets(&base_right, &MatchConfig::default());
        assert!(plus.is_empty() && minus.is_empty());
    }

    #[test]
    fn matcher_normalization() {
        let m = MatchConfig::default();
        assert!(m.is_correct("  The Answer. ", "the answer"));
        let strict = MatchConfig {
            lowercase: false,
            squeeze_whitespace: false,
            strip_punctuation: false,
        };
        assert!(!strict.is_correct("The Answer", "the answer"));
    }

    #[test]
    fn ks_identical_multisets() {
        let s = [0.2, 0.4, 0.4, 0.9];
        let (d, p) = ks_statistic(&s, &s).unwrap();
        assert_eq!(d, 0.0);
        assert_eq!(p, 1.0);
    }

    #[test]
    fn ks_fully_separated() {
        let (d, _) = ks_statistic(&[0.8, 0.9], &[0.1, 0.2]).unwrap();
        assert_eq!(d, 1.0);
    }

    #[test]
    fn ks_worked_example_exact_third() {
        let (d, _) = ks_statistic(&[0.1, 0.5, 0.9], &[0.2, 0.6]).unwrap();
        assert_eq!(d, 1.0 / 3.0);
    }

    #[test]
    fn ks_empty_side_errors() {
        assert_eq!(
            ks_statistic(&[], &[0.5]).unwrap_err(),
            AlignmentError::EmptySampleSet
        );
    }

    #[test]
    fn ks_symmetric_and_monotone_invariant() {
        let a = [0.1, 0.3, 0.3, 0.8];
        let b = [0.2, 0.5, 0.9];
        let (d1, p1) = ks_statistic(&a, &b).unwrap();
        let (d2, p2) = ks_statistic(&b, &a).unwrap();
        assert_eq!(d1, d2);
        assert_eq!(p1, p2);
        // Strictly monotone rescaling x -> x^3 preserves order, hence D.
        let a3: Vec<f64> = a.iter().map(|x| x.powi(3)).collect();
        let b3: Vec<f64> = b.iter().map(|x| x.powi(3)).collect();
        let (d3, _) = ks_statistic(&a3, &b3).unwrap();
        assert_eq!(d1, d3);
    }

    #[test]
    fn report_handles_empty_minus() {
        let examples = vec![
            NLExample {
                entity_a: Some("a b".into()),
                entity_b: Some("a b".into()),
                gold: "yes".into(),
                pred_base: "no".into(),
                pred_tuned: "yes".into(),
                ..Default::default()
            },
        ];
        let report =
            align_examples(&examples, TaskKind::Matching, &AlignmentOptions::default()).unwrap();
        assert_eq!(report.status, ReportStatus::EmptyMinus);
        assert!(report.statistic.is_none());
        assert!(report.p_value.is_none());
        assert_eq!(report.scores_plus.len(), 1);
    }

    #[test]
    fn examples_jsonl_parsing_and_validation() {
        let good = r#"{"document": "a b c", "question": "b", "gold": "b", "pred_base": "x", "pred_tuned": "b"}"#;
        let examples = read_examples(good, TaskKind::DocumentQa).unwrap();
        assert_eq!(examples.len(), 1);
        let missing = r#"{"question": "b", "gold": "b", "pred_base": "x", "pred_tuned": "b"}"#;
        assert!(matches!(
            read_examples(missing, TaskKind::DocumentQa),
            Err(AlignmentError::MissingField { field: "document", .. })
        ));
    }
}

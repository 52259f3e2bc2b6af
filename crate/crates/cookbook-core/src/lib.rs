//! Programmatic instruction-tuning data, built from patterns over random tokens.
//!
//! The crate has four pillars:
//!
//! * [`token_space`] — vocabularies, seeded counter-based RNG streams, and the
//!   five list operators (sample, span, replace, shuffle, concatenation) that
//!   every template is composed from.
//! * [`templates`] — the data-generating templates themselves (matching,
//!   multi-choice QA, document QA, entity disambiguation, commonsense
//!   selection, token retrieval, poetry), their no-rule ablations, and a rule
//!   checker that re-derives each template's output from its inputs.
//! * [`mixer`] and [`weak_supervision`] — entropy-regularized mixture
//!   proportions over templates, with voter-agreement accuracy estimation for
//!   the case where evaluation data has no gold labels.
//! * [`alignment`] — scorers that measure how much a natural-language sample
//!   follows a template's rule, and the two-sample Kolmogorov–Smirnov
//!   statistic over improved/non-improved prediction sets.
//!
//! [`dataset`] ties generation together behind a streaming, byte-reproducible
//! JSONL writer; [`autogen`] assembles the few-shot prompt used to draft new
//! templates with an external chat model.

pub mod alignment;
pub mod autogen;
pub mod dataset;
pub mod mixer;
pub mod templates;
pub mod token_space;
pub mod weak_supervision;

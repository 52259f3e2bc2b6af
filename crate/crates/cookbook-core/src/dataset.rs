//! Dataset generation: plans, streaming JSONL output, and manifests.
//!
//! A plan pins everything that determines the output bytes: the master seed,
//! the vocabulary source, the template list with parameter overrides, and the
//! allocation (proportions or explicit counts). Samples from different
//! templates are interleaved in a seed-derived order, and each sample is
//! produced on its own RNG stream, so the emitted file is byte-identical
//! across runs and thread counts. Generation streams in fixed-size batches;
//! only per-sample template tags are held for the whole run.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::mixer::{allocate_counts, MixerError, MixtureProportions};
use crate::templates::{
    generate_sample, FieldValue, GeneratorId, ParamsPatch, Sample, TemplateError, TemplateParams,
};
use crate::token_space::{Rng, TokenSpaceError, Vocabulary};

/// Environment variable consulted for a default master seed.
pub const SEED_ENV_VAR: &str = "COOKBOOK_SEED";

/// Reserved stream code for the interleaving shuffle; generator codes stay
/// well below this.
const INTERLEAVE_CODE: u64 = 1 << 32;

const BATCH_SIZE: usize = 512;

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("invalid plan: {0}")]
    PlanInvalid(String),
    #[error(transparent)]
    Template(#[from] TemplateError),
    #[error(transparent)]
    Mixer(#[from] MixerError),
    #[error(transparent)]
    TokenSpace(#[from] TokenSpaceError),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// Where token surfaces come from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VocabSource {
    /// Built-in `tok0000..` vocabulary of the given size.
    Synthetic(usize),
    /// UTF-8 file, one token per line, line `i` is id `i`.
    File(PathBuf),
}

impl VocabSource {
    pub fn load(&self) -> Result<Vocabulary, DatasetError> {
        match self {
            VocabSource::Synthetic(size) => Ok(Vocabulary::synthetic(*size)?),
            VocabSource::File(path) => Vocabulary::from_file(path).map_err(|source| {
                DatasetError::Io {
                    path: path.clone(),
                    source,
                }
            }),
        }
    }
}

/// One template entry in a plan: the generator plus parameter overrides on
/// top of that template's defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanTemplate {
    pub generator: GeneratorId,
    #[serde(default)]
    pub params: ParamsPatch,
}

/// How the total sample budget is split across templates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Allocation {
    /// Fractions summing to 1; counts follow by largest-remainder rounding.
    Proportions(Vec<f64>),
    /// Explicit per-template counts; must sum to `n`.
    Counts(Vec<u64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationPlan {
    pub n: u64,
    pub master_seed: u64,
    pub vocab: VocabSource,
    pub templates: Vec<PlanTemplate>,
    pub allocation: Allocation,
    pub output: PathBuf,
}

impl GenerationPlan {
    /// Resolves the allocation into exact per-template counts.
    pub fn counts(&self) -> Result<Vec<u64>, DatasetError> {
        let counts = match &self.allocation {
            Allocation::Counts(c) => c.clone(),
            Allocation::Proportions(p) => {
                let p = MixtureProportions::new(p.clone(), 1.0)?;
                allocate_counts(&p, self.n)
            }
        };
        if counts.len() != self.templates.len() {
            return Err(DatasetError::PlanInvalid(format!(
                "{} allocation entries for {} templates",
                counts.len(),
                self.templates.len()
            )));
        }
        if counts.iter().sum::<u64>() != self.n {
            return Err(DatasetError::PlanInvalid(format!(
                "counts sum to {}, plan n is {}",
                counts.iter().sum::<u64>(),
                self.n
            )));
        }
        Ok(counts)
    }

    pub fn validate(&self) -> Result<(), DatasetError> {
        if self.templates.is_empty() {
            return Err(DatasetError::PlanInvalid("no templates".into()));
        }
        let mut seen = std::collections::BTreeSet::new();
        for t in &self.templates {
            if !seen.insert(t.generator) {
                return Err(DatasetError::PlanInvalid(format!(
                    "duplicate template {}",
                    t.generator
                )));
            }
        }
        self.counts()?;
        for t in &self.templates {
            let params = self.params_for(t);
            params.validate(t.generator.layout())?;
        }
        Ok(())
    }

    fn params_for(&self, t: &PlanTemplate) -> TemplateParams {
        t.params.apply(TemplateParams::defaults(t.generator.layout()))
    }

    pub fn from_json(text: &str) -> Result<Self, DatasetError> {
        Ok(serde_json::from_str(text)?)
    }
}

/// The wire form of one dataset line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetRecord {
    pub id: u64,
    pub template: String,
    pub seed_index: u64,
    pub instruction: String,
    pub input: BTreeMap<String, FieldValue>,
    pub output: FieldValue,
    pub text: String,
}

impl DatasetRecord {
    pub fn from_sample(sample: &Sample, id: u64) -> Self {
        DatasetRecord {
            id,
            template: sample.generator.name(),
            seed_index: sample.sample_index,
            instruction: sample.instruction.clone(),
            input: sample.inputs.clone(),
            output: sample.output.clone(),
            text: sample.text.clone(),
        }
    }

    /// Reconstructs the in-memory sample; the master seed comes from the
    /// manifest rather than the line itself.
    pub fn into_sample(self, master_seed: u64) -> Result<Sample, TemplateError> {
        Ok(Sample {
            generator: self.template.parse()?,
            instruction: self.instruction,
            inputs: self.input,
            output: self.output,
            text: self.text,
            master_seed,
            sample_index: self.seed_index,
        })
    }
}

/// Provenance record emitted next to the dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool_version: String,
    pub plan: GenerationPlan,
    pub counts: BTreeMap<String, u64>,
    pub total: u64,
    /// SHA-256 of the emitted JSONL bytes, hex-encoded.
    pub sha256: String,
}

/// Conventional manifest path: `<output>.manifest.json`.
pub fn manifest_path(output: &Path) -> PathBuf {
    let mut name = output.file_name().unwrap_or_default().to_os_string();
    name.push(".manifest.json");
    output.with_file_name(name)
}

/// Seed-derived interleaving: per-template tags shuffled once, with each
/// template's own samples kept in stream order. The subsequence of any one
/// template therefore equals that template generated alone.
fn interleave_tags(counts: &[u64], master_seed: u64) -> Vec<u16> {
    let total: u64 = counts.iter().sum();
    let mut tags = Vec::with_capacity(total as usize);
    for (slot, &count) in counts.iter().enumerate() {
        tags.extend(std::iter::repeat_n(slot as u16, count as usize));
    }
    let mut rng = Rng::for_stream(master_seed, INTERLEAVE_CODE, 0);
    crate::token_space::shuffle(&mut tags, &mut rng);
    tags
}

struct Job {
    id: u64,
    generator: GeneratorId,
    params_slot: usize,
    seed_index: u64,
}

fn render_job(
    job: &Job,
    vocab: &Vocabulary,
    params: &[TemplateParams],
    master_seed: u64,
) -> Result<String, DatasetError> {
    let sample = generate_sample(
        job.generator,
        vocab,
        &params[job.params_slot],
        master_seed,
        job.seed_index,
    )?;
    let record = DatasetRecord::from_sample(&sample, job.id);
    Ok(serde_json::to_string(&record)?)
}

#[cfg(feature = "parallel")]
fn render_batch(
    jobs: &[Job],
    vocab: &Vocabulary,
    params: &[TemplateParams],
    master_seed: u64,
) -> Result<Vec<String>, DatasetError> {
    jobs.par_iter()
        .map(|job| render_job(job, vocab, params, master_seed))
        .collect()
}

#[cfg(not(feature = "parallel"))]
fn render_batch(
    jobs: &[Job],
    vocab: &Vocabulary,
    params: &[TemplateParams],
    master_seed: u64,
) -> Result<Vec<String>, DatasetError> {
    jobs.iter()
        .map(|job| render_job(job, vocab, params, master_seed))
        .collect()
}

/// Generates the dataset described by `plan`, writing the JSONL file and its
/// manifest, and returns the manifest.
pub fn generate_dataset(plan: &GenerationPlan) -> Result<Manifest, DatasetError> {
    plan.validate()?;
    let vocab = plan.vocab.load()?;
    let counts = plan.counts()?;
    let params: Vec<TemplateParams> = plan.templates.iter().map(|t| plan.params_for(t)).collect();
    let tags = interleave_tags(&counts, plan.master_seed);

    let io_err = |source: std::io::Error| DatasetError::Io {
        path: plan.output.clone(),
        source,
    };
    let file = File::create(&plan.output).map_err(io_err)?;
    let mut writer = BufWriter::new(file);
    let mut hasher = Sha256::new();

    let mut next_index: Vec<u64> = vec![0; plan.templates.len()];
    let mut emitted: BTreeMap<String, u64> = plan
        .templates
        .iter()
        .map(|t| (t.generator.name(), 0u64))
        .collect();

    let mut id: u64 = 0;
    for chunk in tags.chunks(BATCH_SIZE) {
        let jobs: Vec<Job> = chunk
            .iter()
            .map(|&slot| {
                let slot = slot as usize;
                let job = Job {
                    id,
                    generator: plan.templates[slot].generator,
                    params_slot: slot,
                    seed_index: next_index[slot],
                };
                next_index[slot] += 1;
                id += 1;
                job
            })
            .collect();
        let lines = render_batch(&jobs, &vocab, &params, plan.master_seed)?;
        for (line, job) in lines.iter().zip(&jobs) {
            writer.write_all(line.as_bytes()).map_err(io_err)?;
            writer.write_all(b"\n").map_err(io_err)?;
            hasher.update(line.as_bytes());
            hasher.update(b"\n");
            *emitted
                .get_mut(&job.generator.name())
                .expect("initialized above") += 1;
        }
    }
    writer.flush().map_err(io_err)?;

    let manifest = Manifest {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        plan: plan.clone(),
        counts: emitted,
        total: plan.n,
        sha256: format!("{:x}", hasher.finalize()),
    };
    let manifest_out = manifest_path(&plan.output);
    let text = serde_json::to_string_pretty(&manifest)?;
    std::fs::write(&manifest_out, text).map_err(|source| DatasetError::Io {
        path: manifest_out.clone(),
        source,
    })?;
    Ok(manifest)
}

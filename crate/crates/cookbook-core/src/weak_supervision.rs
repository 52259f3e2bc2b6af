//! Voter-accuracy estimation from unlabeled agreement.
//!
//! Several models vote on the same unlabeled examples. Under conditional
//! independence given the true label, the pairwise second moments of the
//! sign-encoded votes factor as `E[s_i s_j] = c_i c_j` with `c_i = 2 a_i - 1`,
//! so per-voter accuracies are recoverable from agreement alone:
//!
//! 1. `|c_i|` from the triplet closed form
//!    `sqrt(|M_ij * M_ik / M_jk|)`, averaged over all usable triplets;
//! 2. signs from each voter's correlation with the majority vote;
//! 3. a least-squares gradient-descent refinement over the full moment
//!    system (fixed step, fixed iteration count, fully deterministic).

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::mixer::{AccuracyMatrix, MixerError};

#[derive(Debug, Error, PartialEq)]
pub enum WsError {
    #[error("votes dataset needs at least 3 voters, got {0}")]
    TooFewVoters(usize),
    #[error("votes dataset needs at least 1 example")]
    NoExamples,
    #[error("row {0} has {1} votes, expected {2}")]
    RaggedRow(usize, usize, usize),
    #[error("label set is not binary: {0:?}")]
    NonBinaryLabels(Vec<String>),
    #[error("voter {0:?} casts a single distinct label")]
    DegenerateVoter(String),
    #[error("voter {0:?} has no usable triplet (all pair moments below 1e-6)")]
    Unidentifiable(String),
    #[error("class balance must lie strictly inside (0, 1), got {0}")]
    InvalidClassBalance(f64),
    #[error("voter sets differ across tasks: {0:?} vs {1:?}")]
    VoterMismatch(Vec<String>, Vec<String>),
    #[error("label sign map must assign exactly one +1 and one -1 label")]
    InvalidSignMap,
    #[error("votes CSV: {0}")]
    Csv(String),
    #[error(transparent)]
    Matrix(#[from] MixerError),
}

/// Raw discrete predictions: one row per example, one column per voter.
#[derive(Debug, Clone, PartialEq)]
pub struct VotesDataset {
    voter_names: Vec<String>,
    votes: Vec<Vec<String>>,
}

impl VotesDataset {
    pub fn new(voter_names: Vec<String>, votes: Vec<Vec<String>>) -> Result<Self, WsError> {
        if voter_names.len() < 3 {
            return Err(WsError::TooFewVoters(voter_names.len()));
        }
        if votes.is_empty() {
            return Err(WsError::NoExamples);
        }
        for (i, row) in votes.iter().enumerate() {
            if row.len() != voter_names.len() {
                return Err(WsError::RaggedRow(i, row.len(), voter_names.len()));
            }
        }
        Ok(VotesDataset { voter_names, votes })
    }

    /// Parses the votes CSV: header `example_id,<voter1>,...,<voterl>`, one
    /// row per evaluation example, cells are raw label strings.
    pub fn from_csv(text: &str) -> Result<Self, WsError> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or(WsError::NoExamples)?;
        let mut cols = header.split(',');
        let first = cols.next().unwrap_or_default();
        if first != "example_id" {
            return Err(WsError::Csv(format!(
                "header must start with \"example_id\", got {first:?}"
            )));
        }
        let voter_names: Vec<String> = cols.map(str::to_string).collect();
        let mut votes = Vec::new();
        for line in lines {
            let cells: Vec<&str> = line.split(',').collect();
            if cells.len() != voter_names.len() + 1 {
                return Err(WsError::Csv(format!(
                    "row {:?} has {} cells, expected {}",
                    cells.first().copied().unwrap_or(""),
                    cells.len(),
                    voter_names.len() + 1
                )));
            }
            votes.push(cells[1..].iter().map(|c| c.trim().to_string()).collect());
        }
        VotesDataset::new(voter_names, votes)
    }

    pub fn voter_names(&self) -> &[String] {
        &self.voter_names
    }

    pub fn num_examples(&self) -> usize {
        self.votes.len()
    }

    pub fn num_voters(&self) -> usize {
        self.voter_names.len()
    }

    pub fn distinct_labels(&self) -> BTreeSet<String> {
        self.votes.iter().flatten().cloned().collect()
    }
}

/// Explicit label-to-sign map for binary tasks.
#[derive(Debug, Clone, PartialEq)]
pub struct SignMap {
    positive: String,
    negative: String,
}

impl SignMap {
    pub fn new(positive: impl Into<String>, negative: impl Into<String>) -> Self {
        SignMap {
            positive: positive.into(),
            negative: negative.into(),
        }
    }

    /// Accepts a JSON object such as `{"yes": 1, "no": -1}`.
    pub fn from_json(text: &str) -> Result<Self, WsError> {
        let map: BTreeMap<String, i8> =
            serde_json::from_str(text).map_err(|_| WsError::InvalidSignMap)?;
        let mut positive = None;
        let mut negative = None;
        for (label, sign) in map {
            match sign {
                1 => positive = positive.xor(Some(label)),
                -1 => negative = negative.xor(Some(label)),
                _ => return Err(WsError::InvalidSignMap),
            }
        }
        match (positive, negative) {
            (Some(p), Some(n)) => Ok(SignMap::new(p, n)),
            _ => Err(WsError::InvalidSignMap),
        }
    }

    fn sign_of(&self, label: &str) -> Option<i8> {
        if label == self.positive {
            Some(1)
        } else if label == self.negative {
            Some(-1)
        } else {
            None
        }
    }
}

/// Sign-encoded votes in `{-1, +1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct SignedVotes {
    voter_names: Vec<String>,
    signs: Vec<Vec<i8>>,
}

impl SignedVotes {
    pub fn new(voter_names: Vec<String>, signs: Vec<Vec<i8>>) -> Result<Self, WsError> {
        if voter_names.len() < 3 {
            return Err(WsError::TooFewVoters(voter_names.len()));
        }
        if signs.is_empty() {
            return Err(WsError::NoExamples);
        }
        for (i, row) in signs.iter().enumerate() {
            if row.len() != voter_names.len() {
                return Err(WsError::RaggedRow(i, row.len(), voter_names.len()));
            }
        }
        Ok(SignedVotes { voter_names, signs })
    }

    pub fn voter_names(&self) -> &[String] {
        &self.voter_names
    }

    pub fn num_examples(&self) -> usize {
        self.signs.len()
    }

    pub fn num_voters(&self) -> usize {
        self.voter_names.len()
    }
}

/// Deterministic sign encoding of binary votes. A constant column is
/// rejected because its agreement carries no accuracy signal.
pub fn encode_votes(votes: &VotesDataset, signs: &SignMap) -> Result<SignedVotes, WsError> {
    let labels = votes.distinct_labels();
    if labels.len() > 2 || labels.iter().any(|l| signs.sign_of(l).is_none()) {
        return Err(WsError::NonBinaryLabels(labels.into_iter().collect()));
    }
    let encoded: Vec<Vec<i8>> = votes
        .votes
        .iter()
        .map(|row| {
            row.iter()
                .map(|label| signs.sign_of(label).expect("label checked above"))
                .collect()
        })
        .collect();
    for (v, name) in votes.voter_names.iter().enumerate() {
        let first = encoded[0][v];
        if encoded.iter().all(|row| row[v] == first) {
            return Err(WsError::DegenerateVoter(name.clone()));
        }
    }
    SignedVotes::new(votes.voter_names.clone(), encoded)
}

/// One-vs-rest reduction for multi-class votes: one binary encoding per
/// distinct label, `+1` for membership in that class.
pub fn encode_one_vs_rest(votes: &VotesDataset) -> Vec<(String, SignedVotes)> {
    votes
        .distinct_labels()
        .into_iter()
        .map(|class| {
            let signs: Vec<Vec<i8>> = votes
                .votes
                .iter()
                .map(|row| {
                    row.iter()
                        .map(|label| if *label == class { 1 } else { -1 })
                        .collect()
                })
                .collect();
            let encoded = SignedVotes {
                voter_names: votes.voter_names.clone(),
                signs,
            };
            (class, encoded)
        })
        .collect()
}

/// Settings for the least-squares refinement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimatorConfig {
    pub step_size: f64,
    pub iterations: usize,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        EstimatorConfig {
            step_size: 1e-3,
            iterations: 5000,
        }
    }
}

/// Estimated per-voter accuracies, each in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct AccuracyEstimates {
    voter_names: Vec<String>,
    a_hat: Vec<f64>,
}

impl AccuracyEstimates {
    pub fn voter_names(&self) -> &[String] {
        &self.voter_names
    }

    pub fn values(&self) -> &[f64] {
        &self.a_hat
    }
}

const MOMENT_FLOOR: f64 = 1e-6;

/// Estimates voter accuracies from signed votes under conditional
/// independence. `class_balance` is a prior on the positive class used to
/// break majority-vote ties; it must lie strictly inside `(0, 1)`.
pub fn estimate_accuracies(
    votes: &SignedVotes,
    class_balance: f64,
    config: &EstimatorConfig,
) -> Result<AccuracyEstimates, WsError> {
    if votes.num_voters() < 3 {
        return Err(WsError::TooFewVoters(votes.num_voters()));
    }
    if !(0.0..=1.0).contains(&class_balance) || class_balance == 0.0 || class_balance == 1.0 {
        return Err(WsError::InvalidClassBalance(class_balance));
    }
    let l = votes.num_voters();
    let n = votes.num_examples() as f64;

    // Pairwise second moments M[i][j] = mean of s_i * s_j.
    #[allow(clippy::needless_range_loop)] // symmetric-matrix indexing
    let moments = {
        let mut moments = vec![vec![0.0f64; l]; l];
        for row in &votes.signs {
            for i in 0..l {
                for j in (i + 1)..l {
                    moments[i][j] += f64::from(row[i] * row[j]);
                }
            }
        }
        for i in 0..l {
            for j in (i + 1)..l {
                moments[i][j] /= n;
                moments[j][i] = moments[i][j];
            }
        }
        moments
    };

    // Triplet closed form for |c_i|, averaged over usable (j, k) pairs.
    let mut magnitude = vec![0.0f64; l];
    for i in 0..l {
        let mut sum = 0.0;
        let mut used = 0usize;
        for j in 0..l {
            for k in (j + 1)..l {
                if j == i || k == i || moments[j][k].abs() < MOMENT_FLOOR {
                    continue;
                }
                sum += (moments[i][j] * moments[i][k] / moments[j][k]).abs().sqrt();
                used += 1;
            }
        }
        if used == 0 {
            return Err(WsError::Unidentifiable(votes.voter_names[i].clone()));
        }
        magnitude[i] = (sum / used as f64).min(1.0);
    }

    // Majority-vote correlation fixes each voter's sign; ties in the
    // majority go to the prior class.
    let tie_sign: i8 = if class_balance >= 0.5 { 1 } else { -1 };
    let mut correlation = vec![0.0f64; l];
    for row in &votes.signs {
        let total: i32 = row.iter().map(|&s| i32::from(s)).sum();
        let mv = match total.cmp(&0) {
            std::cmp::Ordering::Greater => 1i8,
            std::cmp::Ordering::Less => -1i8,
            std::cmp::Ordering::Equal => tie_sign,
        };
        for i in 0..l {
            correlation[i] += f64::from(row[i] * mv);
        }
    }
    let mut c: Vec<f64> = (0..l)
        .map(|i| {
            if correlation[i] >= 0.0 {
                magnitude[i]
            } else {
                -magnitude[i]
            }
        })
        .collect();

    // Least-squares refinement of sum_{i<j} (c_i c_j - M_ij)^2, full-batch
    // gradient descent at a fixed step.
    for _ in 0..config.iterations {
        let mut grad = vec![0.0f64; l];
        for i in 0..l {
            for j in (i + 1)..l {
                let resid = c[i] * c[j] - moments[i][j];
                grad[i] += 2.0 * resid * c[j];
                grad[j] += 2.0 * resid * c[i];
            }
        }
        for i in 0..l {
            c[i] = (c[i] - config.step_size * grad[i]).clamp(-1.0, 1.0);
        }
    }

    // The moment system is invariant under a global sign flip; re-anchor on
    // the majority correlation.
    let anchor: f64 = c.iter().zip(&correlation).map(|(ci, co)| ci * co).sum();
    if anchor < 0.0 {
        for ci in &mut c {
            *ci = -*ci;
        }
    }

    let a_hat = c.iter().map(|ci| ((ci + 1.0) / 2.0).clamp(0.0, 1.0)).collect();
    Ok(AccuracyEstimates {
        voter_names: votes.voter_names.clone(),
        a_hat,
    })
}

/// Votes and label signs for one downstream task.
#[derive(Debug, Clone)]
pub struct TaskVotes {
    pub task_name: String,
    pub votes: VotesDataset,
    pub signs: SignMap,
}

/// Runs the estimator once per task and assembles the voter-by-task accuracy
/// matrix consumed by the mixer. Voter order must agree across tasks.
pub fn estimate_accuracy_matrix(
    tasks: &[TaskVotes],
    class_balance: f64,
    config: &EstimatorConfig,
) -> Result<AccuracyMatrix, WsError> {
    let first = tasks.first().ok_or(WsError::NoExamples)?;
    let voters = first.votes.voter_names().to_vec();
    let mut columns = Vec::with_capacity(tasks.len());
    for task in tasks {
        if task.votes.voter_names() != voters.as_slice() {
            return Err(WsError::VoterMismatch(
                voters,
                task.votes.voter_names().to_vec(),
            ));
        }
        let signed = encode_votes(&task.votes, &task.signs)?;
        let estimates = estimate_accuracies(&signed, class_balance, config)?;
        columns.push(estimates.a_hat);
    }
    let rows: Vec<Vec<f64>> = (0..voters.len())
        .map(|i| columns.iter().map(|col| col[i]).collect())
        .collect();
    let task_names = tasks.iter().map(|t| t.task_name.clone()).collect();
    Ok(AccuracyMatrix::new(voters, task_names, rows)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::token_space::Rng;

    /// Conditionally independent synthetic votes with known accuracies.
    pub(crate) fn synthetic_votes(
        true_accs: &[f64],
        n: usize,
        balance: f64,
        seed: u64,
    ) -> SignedVotes {
        let mut rng = Rng::new(seed);
        let signs = (0..n)
            .map(|_| {
                let y: i8 = if rng.next_f64() < balance { 1 } else { -1 };
                true_accs
                    .iter()
                    .map(|&a| if rng.next_f64() < a { y } else { -y })
                    .collect()
            })
            .collect();
        let names = (0..true_accs.len()).map(|i| format!("voter{i}")).collect();
        SignedVotes::new(names, signs).unwrap()
    }

    #[test]
    fn perfect_voters_estimate_to_one() {
        let mut rng = Rng::new(5);
        let signs: Vec<Vec<i8>> = (0..200)
            .map(|_| {
                let y: i8 = if rng.next_bool() { 1 } else { -1 };
                vec![y, y, y]
            })
            .collect();
        let votes = SignedVotes::new(
            vec!["a".into(), "b".into(), "c".into()],
            signs,
        )
        .unwrap();
        let est = estimate_accuracies(&votes, 0.5, &EstimatorConfig::default()).unwrap();
        for &a in est.values() {
            assert!((a - 1.0).abs() < 1e-9, "estimate {a}");
        }
    }

    #[test]
    fn recovers_known_accuracies_at_50k() {
        let truth = [0.9, 0.8, 0.7];
        let votes = synthetic_votes(&truth, 50_000, 0.5, 271828);
        let est = estimate_accuracies(&votes, 0.5, &EstimatorConfig::default()).unwrap();
        for (a_hat, a) in est.values().iter().zip(truth) {
            assert!(
                (a_hat - a).abs() <= 0.03,
                "estimate {a_hat} vs truth {a}"
            );
        }
    }

    #[test]
    fn permutation_equivariance() {
        let votes = synthetic_votes(&[0.9, 0.75, 0.6, 0.85], 20_000, 0.5, 99);
        let est = estimate_accuracies(&votes, 0.5, &EstimatorConfig::default()).unwrap();
        // Reverse voter order.
        let reversed_names: Vec<String> = votes.voter_names.iter().rev().cloned().collect();
        let reversed_rows: Vec<Vec<i8>> = votes
            .signs
            .iter()
            .map(|row| row.iter().rev().copied().collect())
            .collect();
        let reversed = SignedVotes::new(reversed_names, reversed_rows).unwrap();
        let est_rev = estimate_accuracies(&reversed, 0.5, &EstimatorConfig::default()).unwrap();
        for (x, y) in est.values().iter().zip(est_rev.values().iter().rev()) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn dependent_voters_run_but_carry_no_guarantee() {
        // One voter duplicated breaks conditional independence; the run must
        // still terminate with estimates in range, and the duplicated pair's
        // estimates drift upward (their agreement moment is 1, which the
        // factored moment model can only explain with near-perfect voters).
        let base = synthetic_votes(&[0.8, 0.7, 0.6], 10_000, 0.5, 3);
        let signs: Vec<Vec<i8>> = base
            .signs
            .iter()
            .map(|row| vec![row[0], row[0], row[1]])
            .collect();
        let votes =
            SignedVotes::new(vec!["dup1".into(), "dup2".into(), "ind".into()], signs).unwrap();
        let est = estimate_accuracies(&votes, 0.5, &EstimatorConfig::default()).unwrap();
        for &a in est.values() {
            assert!((0.0..=1.0).contains(&a) && a.is_finite());
        }
        assert!(est.values()[0] > 0.9, "duplicated voter did not drift");
        assert!(est.values()[1] > 0.9, "duplicated voter did not drift");
    }

    #[test]
    fn estimates_always_in_unit_interval() {
        for seed in 0..10 {
            let votes = synthetic_votes(&[0.55, 0.5, 0.45, 0.6], 500, 0.5, seed);
            if let Ok(est) = estimate_accuracies(&votes, 0.5, &EstimatorConfig::default()) {
                for &a in est.values() {
                    assert!((0.0..=1.0).contains(&a));
                }
            }
        }
    }

    #[test]
    fn too_few_voters_rejected() {
        assert_eq!(
            SignedVotes::new(vec!["a".into(), "b".into()], vec![vec![1, -1]]).unwrap_err(),
            WsError::TooFewVoters(2)
        );
    }

    #[test]
    fn encode_votes_signs_and_degeneracy() {
        let votes = VotesDataset::new(
            vec!["v1".into(), "v2".into(), "v3".into()],
            vec![
                vec!["yes".into(), "no".into(), "yes".into()],
                vec!["no".into(), "no".into(), "yes".into()],
            ],
        )
        .unwrap();
        let signs = SignMap::new("yes", "no");
        // v2 and v3 are constant columns.
        assert!(matches!(
            encode_votes(&votes, &signs),
            Err(WsError::DegenerateVoter(_))
        ));

        let ok = VotesDataset::new(
            vec!["v1".into(), "v2".into(), "v3".into()],
            vec![
                vec!["yes".into(), "no".into(), "yes".into()],
                vec!["no".into(), "yes".into(), "no".into()],
            ],
        )
        .unwrap();
        let encoded = encode_votes(&ok, &signs).unwrap();
        assert_eq!(encoded.signs[0], vec![1, -1, 1]);
        assert_eq!(encoded.signs[1], vec![-1, 1, -1]);
    }

    #[test]
    fn encode_votes_rejects_nonbinary() {
        let votes = VotesDataset::new(
            vec!["v1".into(), "v2".into(), "v3".into()],
            vec![vec!["a".into(), "b".into(), "c".into()]],
        )
        .unwrap();
        assert!(matches!(
            encode_votes(&votes, &SignMap::new("a", "b")),
            Err(WsError::NonBinaryLabels(_))
        ));
    }

    #[test]
    fn one_vs_rest_produces_membership_encodings() {
        let votes = VotesDataset::new(
            vec!["v1".into(), "v2".into(), "v3".into()],
            vec![
                vec!["a".into(), "b".into(), "c".into()],
                vec!["d".into(), "a".into(), "a".into()],
            ],
        )
        .unwrap();
        let encodings = encode_one_vs_rest(&votes);
        assert_eq!(encodings.len(), 4);
        // Per-class membership oracle: recompute signs by direct comparison.
        for (class, signed) in &encodings {
            for (row, raw) in signed.signs.iter().zip(&votes.votes) {
                for (s, label) in row.iter().zip(raw) {
                    assert_eq!(*s == 1, label == class);
                }
            }
        }
    }

    #[test]
    fn sign_map_from_json() {
        let m = SignMap::from_json(r#"{"yes": 1, "no": -1}"#).unwrap();
        assert_eq!(m.sign_of("yes"), Some(1));
        assert_eq!(m.sign_of("no"), Some(-1));
        assert_eq!(m.sign_of("maybe"), None);
        assert!(SignMap::from_json(r#"{"yes": 1}"#).is_err());
        assert!(SignMap::from_json(r#"{"yes": 1, "no": 2}"#).is_err());
    }

    #[test]
    fn votes_csv_round_trip() {
        let csv = "example_id,m1,m2,m3\n0,yes,no,yes\n1,no,no,yes\n";
        let votes = VotesDataset::from_csv(csv).unwrap();
        assert_eq!(votes.num_examples(), 2);
        assert_eq!(votes.voter_names(), ["m1", "m2", "m3"]);
        assert_eq!(votes.votes[1], vec!["no", "no", "yes"]);
    }

    #[test]
    fn matrix_requires_consistent_voters() {
        let t1 = TaskVotes {
            task_name: "t1".into(),
            votes: VotesDataset::from_csv("example_id,a,b,c\n0,y,n,y\n1,n,y,n\n").unwrap(),
            signs: SignMap::new("y", "n"),
        };
        let mut t2 = t1.clone();
        t2.task_name = "t2".into();
        t2.votes = VotesDataset::from_csv("example_id,a,c,b\n0,y,n,y\n1,n,y,n\n").unwrap();
        let err = estimate_accuracy_matrix(&[t1, t2], 0.5, &EstimatorConfig::default());
        assert!(matches!(err, Err(WsError::VoterMismatch(_, _))));
    }

    #[test]
    fn matrix_recovery_and_downstream_softmax() {
        // 4 voters x 3 tasks with known accuracies: matrix entries land
        // within 0.03 of truth, and the mixing proportions computed from the
        // estimated matrix match those from the true matrix within 0.02 per
        // coordinate.
        let truth: [[f64; 3]; 4] = [
            [0.92, 0.88, 0.90],
            [0.85, 0.80, 0.83],
            [0.74, 0.78, 0.70],
            [0.65, 0.71, 0.68],
        ];
        let tasks: Vec<TaskVotes> = (0..3)
            .map(|j| {
                let accs: Vec<f64> = truth.iter().map(|row| row[j]).collect();
                let signed = synthetic_votes(&accs, 50_000, 0.5, 7_700 + j as u64);
                let raw: Vec<Vec<String>> = signed
                    .signs
                    .iter()
                    .map(|row| {
                        row.iter()
                            .map(|&s| if s == 1 { "yes".into() } else { "no".into() })
                            .collect()
                    })
                    .collect();
                TaskVotes {
                    task_name: format!("task{j}"),
                    votes: VotesDataset::new(signed.voter_names().to_vec(), raw).unwrap(),
                    signs: SignMap::new("yes", "no"),
                }
            })
            .collect();
        let estimated =
            estimate_accuracy_matrix(&tasks, 0.5, &EstimatorConfig::default()).unwrap();
        for (i, row) in estimated.rows().iter().enumerate() {
            for (j, value) in row.iter().enumerate() {
                assert!(
                    (value - truth[i][j]).abs() <= 0.03,
                    "entry ({i}, {j}): {value} vs {}",
                    truth[i][j]
                );
            }
        }

        let true_matrix = AccuracyMatrix::new(
            estimated.template_names().to_vec(),
            estimated.task_names().to_vec(),
            truth.iter().map(|r| r.to_vec()).collect(),
        )
        .unwrap();
        let p_est = crate::mixer::optimal_proportions(&estimated, 1.0).unwrap();
        let p_true = crate::mixer::optimal_proportions(&true_matrix, 1.0).unwrap();
        for (a, b) in p_est.proportions().iter().zip(p_true.proportions()) {
            assert!((a - b).abs() <= 0.02, "proportion {a} vs {b}");
        }
    }

    #[test]
    fn single_task_matrix_equals_estimates() {
        let votes = synthetic_votes(&[0.9, 0.8, 0.7], 20_000, 0.5, 11);
        let est = estimate_accuracies(&votes, 0.5, &EstimatorConfig::default()).unwrap();

        // Rebuild the same data as raw labels and run the matrix path.
        let raw: Vec<Vec<String>> = votes
            .signs
            .iter()
            .map(|row| {
                row.iter()
                    .map(|&s| if s == 1 { "yes".into() } else { "no".into() })
                    .collect()
            })
            .collect();
        let task = TaskVotes {
            task_name: "only".into(),
            votes: VotesDataset::new(votes.voter_names().to_vec(), raw).unwrap(),
            signs: SignMap::new("yes", "no"),
        };
        let matrix = estimate_accuracy_matrix(&[task], 0.5, &EstimatorConfig::default()).unwrap();
        assert_eq!(matrix.num_tasks(), 1);
        for (row, expected) in matrix.rows().iter().zip(est.values()) {
            assert!((row[0] - expected).abs() < 1e-12);
        }
    }
}

//! Language-task specifications and extensional datasets.
//!
//! A task maps an input space to an output space, with at least one side
//! carrying natural language, subject to a prose task description. The
//! mapping itself may be given intensionally as an executable oracle, or
//! only extensionally through a dataset of `(input, output)` pairs with a
//! loss function for comparing outputs.
//!
//! Tasks without an oracle support only the extensional operations here;
//! verification requires the oracle.

use std::fmt;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::record::{ModalRecord, RecordError, RecordSchema};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TaskError {
    #[error("task declares no language-tagged field on either side")]
    NoLanguageField,
    #[error("task has no oracle configured")]
    NoOracle,
    #[error("input record rejected: {0}")]
    InputSchema(RecordError),
    #[error("output record rejected: {0}")]
    OutputSchema(RecordError),
    #[error("oracle failed: {0}")]
    OracleFailure(String),
    #[error("train fraction must lie strictly between 0 and 1, got {0}")]
    InvalidFraction(f64),
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("predictor failed on pair {index}: {message}")]
    PredictorFailure { index: usize, message: String },
    #[error("dataset line {line}: {message}")]
    DatasetParse { line: usize, message: String },
}

type OracleFn = Arc<dyn Fn(&ModalRecord) -> Result<ModalRecord, TaskError> + Send + Sync>;

/// Executable task mapping: a named pure function from inputs to outputs.
#[derive(Clone)]
pub struct Oracle {
    name: String,
    func: OracleFn,
}

impl Oracle {
    pub fn new(
        name: impl Into<String>,
        func: impl Fn(&ModalRecord) -> Result<ModalRecord, TaskError> + Send + Sync + 'static,
    ) -> Self {
        Oracle {
            name: name.into(),
            func: Arc::new(func),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn apply(&self, x: &ModalRecord) -> Result<ModalRecord, TaskError> {
        (self.func)(x)
    }
}

impl fmt::Debug for Oracle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Oracle").field("name", &self.name).finish_non_exhaustive()
    }
}

type LossFn = Arc<dyn Fn(&ModalRecord, &ModalRecord) -> f64 + Send + Sync>;

/// Comparison function on output pairs, valued in [0, 1].
#[derive(Clone)]
pub struct Loss {
    name: String,
    func: LossFn,
}

impl Loss {
    pub fn new(
        name: impl Into<String>,
        func: impl Fn(&ModalRecord, &ModalRecord) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Loss {
            name: name.into(),
            func: Arc::new(func),
        }
    }

    /// 0 when the records are equal, 1 otherwise.
    pub fn exact_match() -> Self {
        Loss::new("exact-match", |a, b| if a == b { 0.0 } else { 1.0 })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn compare(&self, a: &ModalRecord, b: &ModalRecord) -> f64 {
        (self.func)(a, b)
    }
}

impl fmt::Debug for Loss {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Loss").field("name", &self.name).finish_non_exhaustive()
    }
}

impl Default for Loss {
    fn default() -> Self {
        Loss::exact_match()
    }
}

/// A language task: input and output space schemas, an optional oracle, and
/// a prose description.
///
/// At least one of the two schemas must declare a language-tagged field.
#[derive(Debug, Clone)]
pub struct TaskSpec {
    name: String,
    description: String,
    input_schema: RecordSchema,
    output_schema: RecordSchema,
    oracle: Option<Oracle>,
}

impl TaskSpec {
    pub fn new(
        name: impl Into<String>,
        description: impl Into<String>,
        input_schema: RecordSchema,
        output_schema: RecordSchema,
        oracle: Option<Oracle>,
    ) -> Result<Self, TaskError> {
        if !input_schema.has_language() && !output_schema.has_language() {
            return Err(TaskError::NoLanguageField);
        }
        Ok(TaskSpec {
            name: name.into(),
            description: description.into(),
            input_schema,
            output_schema,
            oracle,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn description(&self) -> &str {
        &self.description
    }

    pub fn input_schema(&self) -> &RecordSchema {
        &self.input_schema
    }

    pub fn output_schema(&self) -> &RecordSchema {
        &self.output_schema
    }

    pub fn oracle(&self) -> Option<&Oracle> {
        self.oracle.as_ref()
    }

    /// Applies the oracle to an input after checking it against the input
    /// schema.
    pub fn apply_oracle(&self, x: &ModalRecord) -> Result<ModalRecord, TaskError> {
        let oracle = self.oracle.as_ref().ok_or(TaskError::NoOracle)?;
        self.input_schema.check(x).map_err(TaskError::InputSchema)?;
        oracle.apply(x)
    }

    /// Taxonomy flags derived purely from the modality tags of the two
    /// space schemas:
    ///
    /// - interpretation: the input space contains language;
    /// - generation: the output space contains language;
    /// - reference: language on at least one side together with
    ///   non-language material somewhere;
    /// - inference: language on both sides.
    pub fn classify(&self) -> TaxonomyFlags {
        let in_lang = self.input_schema.has_language();
        let out_lang = self.output_schema.has_language();
        let any_other = self.input_schema.has_other() || self.output_schema.has_other();
        TaxonomyFlags {
            interpretation: in_lang,
            generation: out_lang,
            reference: (in_lang || out_lang) && any_other,
            inference: in_lang && out_lang,
        }
    }
}

/// Decidable task-taxonomy flags. Sensitivity to language *meaning* is not
/// among them: it has no operational definition, so no flag is computed
/// for it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaxonomyFlags {
    pub interpretation: bool,
    pub generation: bool,
    pub reference: bool,
    pub inference: bool,
}

/// Extensional task description: ordered `(input, output)` pairs plus a
/// loss function on outputs. The default loss is exact match.
#[derive(Debug, Clone)]
pub struct Dataset {
    pairs: Vec<(ModalRecord, ModalRecord)>,
    loss: Loss,
}

impl Dataset {
    pub fn new(pairs: Vec<(ModalRecord, ModalRecord)>) -> Self {
        Dataset {
            pairs,
            loss: Loss::exact_match(),
        }
    }

    pub fn with_loss(mut self, loss: Loss) -> Self {
        self.loss = loss;
        self
    }

    pub fn pairs(&self) -> &[(ModalRecord, ModalRecord)] {
        &self.pairs
    }

    pub fn loss(&self) -> &Loss {
        &self.loss
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Parses the newline-delimited pair format: one JSON object per line,
    /// `{"x": {...}, "y": {...}}`, where every leaf field carries a value
    /// and a modality tag.
    pub fn from_ndjson(text: &str) -> Result<Self, TaskError> {
        let mut pairs = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let pair: PairLine =
                serde_json::from_str(line).map_err(|e| TaskError::DatasetParse {
                    line: i + 1,
                    message: e.to_string(),
                })?;
            pairs.push((pair.x, pair.y));
        }
        Ok(Dataset::new(pairs))
    }

    /// Serializes to the newline-delimited pair format.
    pub fn to_ndjson(&self) -> String {
        let mut out = String::new();
        for (x, y) in &self.pairs {
            let line = PairLine {
                x: x.clone(),
                y: y.clone(),
            };
            out.push_str(&serde_json::to_string(&line).expect("pair serialization cannot fail"));
            out.push('\n');
        }
        out
    }
}

#[derive(Serialize, Deserialize)]
struct PairLine {
    x: ModalRecord,
    y: ModalRecord,
}

/// Verdict for one dataset pair. Indices are 1-based, matching report
/// output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairVerdict {
    pub index: usize,
    pub pass: bool,
    pub loss: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

/// Result of checking every dataset pair against the task's oracle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub verdicts: Vec<PairVerdict>,
    pub pass_rate: f64,
}

impl VerificationReport {
    /// 1-based indices of failing pairs.
    pub fn failing_indices(&self) -> Vec<usize> {
        self.verdicts.iter().filter(|v| !v.pass).map(|v| v.index).collect()
    }

    pub fn all_pass(&self) -> bool {
        self.verdicts.iter().all(|v| v.pass)
    }
}

/// Checks that each provided pair is judged correct by the task's oracle:
/// pair `i` passes iff `loss(y_i, oracle(x_i)) = 0`.
///
/// A pair whose input fails the input schema (or whose output fails the
/// output schema) fails with an explanatory note. Requires an oracle.
pub fn verify_dataset(task: &TaskSpec, data: &Dataset) -> Result<VerificationReport, TaskError> {
    if task.oracle().is_none() {
        return Err(TaskError::NoOracle);
    }
    let mut verdicts = Vec::with_capacity(data.len());
    for (i, (x, y)) in data.pairs().iter().enumerate() {
        let index = i + 1;
        let verdict = match task.apply_oracle(x) {
            Ok(expected) => {
                if let Err(e) = task.output_schema().check(y) {
                    PairVerdict {
                        index,
                        pass: false,
                        loss: 1.0,
                        note: Some(format!("output rejected: {e}")),
                    }
                } else {
                    let loss = data.loss().compare(y, &expected);
                    PairVerdict {
                        index,
                        pass: loss == 0.0,
                        loss,
                        note: None,
                    }
                }
            }
            Err(e) => PairVerdict {
                index,
                pass: false,
                loss: 1.0,
                note: Some(e.to_string()),
            },
        };
        verdicts.push(verdict);
    }
    let pass_rate = if verdicts.is_empty() {
        1.0
    } else {
        verdicts.iter().filter(|v| v.pass).count() as f64 / verdicts.len() as f64
    };
    Ok(VerificationReport { verdicts, pass_rate })
}

/// Splits a dataset into train and test parts.
///
/// The split is a true partition — disjoint, with the concatenation a
/// permutation of the original — and is deterministic given the seed. The
/// train size is `m * fraction` rounded to nearest.
pub fn split_dataset(
    data: &Dataset,
    train_fraction: f64,
    seed: u64,
) -> Result<(Dataset, Dataset), TaskError> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(TaskError::InvalidFraction(train_fraction));
    }
    if data.is_empty() {
        return Err(TaskError::EmptyDataset);
    }
    let m = data.len();
    let train_size = (m as f64 * train_fraction).round() as usize;
    let mut indices: Vec<usize> = (0..m).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    indices.shuffle(&mut rng);
    let mut train = Vec::with_capacity(train_size);
    let mut test = Vec::with_capacity(m - train_size);
    for (pos, &i) in indices.iter().enumerate() {
        let pair = data.pairs()[i].clone();
        if pos < train_size {
            train.push(pair);
        } else {
            test.push(pair);
        }
    }
    Ok((
        Dataset::new(train).with_loss(data.loss().clone()),
        Dataset::new(test).with_loss(data.loss().clone()),
    ))
}

/// Anything that maps task inputs to outputs.
pub trait Predictor {
    fn predict(&self, x: &ModalRecord) -> Result<ModalRecord, String>;
}

impl<F> Predictor for F
where
    F: Fn(&ModalRecord) -> Result<ModalRecord, String>,
{
    fn predict(&self, x: &ModalRecord) -> Result<ModalRecord, String> {
        self(x)
    }
}

/// Scores a predictor on a test set: the mean over pairs of
/// `1 - loss(prediction, y)`. A predictor failure is propagated with the
/// failing pair's 1-based index.
pub fn evaluate_predictor<P: Predictor + ?Sized>(
    predictor: &P,
    test: &Dataset,
) -> Result<f64, TaskError> {
    if test.is_empty() {
        return Err(TaskError::EmptyDataset);
    }
    let mut total = 0.0;
    for (i, (x, y)) in test.pairs().iter().enumerate() {
        let prediction = predictor
            .predict(x)
            .map_err(|message| TaskError::PredictorFailure { index: i + 1, message })?;
        total += 1.0 - test.loss().compare(&prediction, y);
    }
    Ok(total / test.len() as f64)
}

/// The identity task on a single language field: output equals input.
pub fn echo_oracle() -> Oracle {
    Oracle::new("echo", |x: &ModalRecord| Ok(x.clone()))
}

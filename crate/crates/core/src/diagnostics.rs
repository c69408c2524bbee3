//! Dataset-validity evidence and capability-set bookkeeping.
//!
//! The deprivation ("blindfold") test checks whether a dataset can be
//! solved without the input fields the task description deems essential.
//! The stand-in model is deliberately the weakest sufficient predictor, a
//! conditional-majority baseline: if even that beats the global majority
//! after being deprived of a field, the dataset leaks the label through
//! the remaining fields.
//!
//! Capability sets record which capabilities a task is claimed to demand
//! (C_T) relative to a reference inventory (C_L). Separability and
//! exhaustivity are stored claims with provenance notes; nothing here
//! verifies them.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::record::ModalRecord;
use crate::tasks::{evaluate_predictor, split_dataset, Dataset, Predictor, TaskError, TaskSpec};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DiagnosticsError {
    #[error("training set is empty")]
    EmptyTrainingSet,
    #[error("field {0:?} is not part of the task's input schema")]
    UnknownField(String),
    #[error("depriving every input field leaves no predictor input; that is the majority baseline itself")]
    DeprivesAllFields,
    #[error("capability sets reference different inventories: {0:?} vs {1:?}")]
    InventoryMismatch(String, String),
    #[error("capability set {0:?} does not declare a parent inventory")]
    MissingInventory(String),
    #[error("task error: {0}")]
    Task(#[from] TaskError),
}

// ---------------------------------------------------------------------------
// Conditional-majority baseline
// ---------------------------------------------------------------------------

/// Majority-vote predictor conditioned on a projection of the input.
///
/// For an input `x`, predicts the most frequent training label among pairs
/// that agree with `x` on the kept fields; an unseen projection falls back
/// to the global majority label. Ties break by the fixed total order on
/// canonical label encodings, so the fit is order-independent and fully
/// deterministic.
#[derive(Debug, Clone)]
pub struct MajorityPredictor {
    keep: BTreeSet<String>,
    table: BTreeMap<String, ModalRecord>,
    global: ModalRecord,
}

impl MajorityPredictor {
    pub fn kept_fields(&self) -> &BTreeSet<String> {
        &self.keep
    }

    pub fn global_majority(&self) -> &ModalRecord {
        &self.global
    }
}

impl Predictor for MajorityPredictor {
    fn predict(&self, x: &ModalRecord) -> Result<ModalRecord, String> {
        let key = x.project(self.keep.iter().map(|s| s.as_str())).canonical_json();
        Ok(self.table.get(&key).cloned().unwrap_or_else(|| self.global.clone()))
    }
}

fn majority<'a>(counts: impl Iterator<Item = (&'a String, &'a (u64, ModalRecord))>) -> ModalRecord {
    let mut best: Option<(&String, u64, &ModalRecord)> = None;
    for (label_key, (count, label)) in counts {
        let better = match best {
            None => true,
            // ties break toward the smaller canonical label encoding
            Some((best_key, best_count, _)) => {
                *count > best_count || (*count == best_count && label_key < best_key)
            }
        };
        if better {
            best = Some((label_key, *count, label));
        }
    }
    best.map(|(_, _, label)| label.clone()).unwrap_or_default()
}

/// Fits the conditional-majority baseline on a training set.
///
/// `keep_fields` must be a subset of the task input fields; keeping no
/// fields yields the constant global-majority predictor.
pub fn conditional_majority_fit(
    task: &TaskSpec,
    train: &Dataset,
    keep_fields: &BTreeSet<String>,
) -> Result<MajorityPredictor, DiagnosticsError> {
    if train.is_empty() {
        return Err(DiagnosticsError::EmptyTrainingSet);
    }
    for field in keep_fields {
        if !task.input_schema().contains_field(field) {
            return Err(DiagnosticsError::UnknownField(field.clone()));
        }
    }
    // per-projection and global label counts, keyed by canonical encodings
    let mut by_projection: BTreeMap<String, BTreeMap<String, (u64, ModalRecord)>> = BTreeMap::new();
    let mut global: BTreeMap<String, (u64, ModalRecord)> = BTreeMap::new();
    for (x, y) in train.pairs() {
        let proj = x.project(keep_fields.iter().map(|s| s.as_str())).canonical_json();
        let label_key = y.canonical_json();
        by_projection
            .entry(proj)
            .or_default()
            .entry(label_key.clone())
            .or_insert_with(|| (0, y.clone()))
            .0 += 1;
        global.entry(label_key).or_insert_with(|| (0, y.clone())).0 += 1;
    }
    let table = by_projection
        .into_iter()
        .map(|(proj, counts)| (proj, majority(counts.iter())))
        .collect();
    Ok(MajorityPredictor {
        keep: keep_fields.clone(),
        table,
        global: majority(global.iter()),
    })
}

// ---------------------------------------------------------------------------
// Deprivation test
// ---------------------------------------------------------------------------

/// Evidence from one deprivation run. The bias flag is recomputable from
/// the report's own numbers: flagged iff
/// `deprived_accuracy - majority_accuracy > margin`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BiasReport {
    pub deprived_fields: BTreeSet<String>,
    pub deprived_accuracy: f64,
    pub majority_accuracy: f64,
    pub reference_accuracy: f64,
    pub margin: f64,
    pub flagged: bool,
    /// True when nothing was deprived: the report then only restates the
    /// full-input reference and carries no bias evidence.
    pub non_informative: bool,
    pub train_size: usize,
    pub test_size: usize,
}

impl BiasReport {
    pub fn recompute_flag(&self) -> bool {
        self.deprived_accuracy - self.majority_accuracy > self.margin
    }
}

pub const DEFAULT_BIAS_MARGIN: f64 = 0.1;

/// Runs the deprivation challenge on a dataset.
///
/// Splits 80/20 with the given seed, fits the conditional-majority
/// baseline on the retained input fields, and compares its test accuracy
/// against the global-majority baseline on the same split. The dataset is
/// flagged as biased when the deprived predictor beats the majority
/// baseline by more than the margin: the label is then recoverable without
/// the deprived fields.
pub fn deprivation_test(
    task: &TaskSpec,
    data: &Dataset,
    deprive_fields: &BTreeSet<String>,
    margin: f64,
    split_seed: u64,
) -> Result<BiasReport, DiagnosticsError> {
    let input_fields: BTreeSet<String> = task.input_schema().field_names().cloned().collect();
    for field in deprive_fields {
        if !input_fields.contains(field) {
            return Err(DiagnosticsError::UnknownField(field.clone()));
        }
    }
    if deprive_fields.len() == input_fields.len() {
        return Err(DiagnosticsError::DeprivesAllFields);
    }
    let keep: BTreeSet<String> = input_fields.difference(deprive_fields).cloned().collect();

    let (train, test) = split_dataset(data, 0.8, split_seed)?;
    let deprived = conditional_majority_fit(task, &train, &keep)?;
    let majority = conditional_majority_fit(task, &train, &BTreeSet::new())?;
    let reference = conditional_majority_fit(task, &train, &input_fields)?;

    let deprived_accuracy = evaluate_predictor(&deprived, &test)?;
    let majority_accuracy = evaluate_predictor(&majority, &test)?;
    let reference_accuracy = evaluate_predictor(&reference, &test)?;

    let non_informative = deprive_fields.is_empty();
    let flagged = !non_informative && deprived_accuracy - majority_accuracy > margin;
    Ok(BiasReport {
        deprived_fields: deprive_fields.clone(),
        deprived_accuracy,
        majority_accuracy,
        reference_accuracy,
        margin,
        flagged,
        non_informative,
        train_size: train.len(),
        test_size: test.len(),
    })
}

// ---------------------------------------------------------------------------
// Capability sets
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CapabilityRole {
    /// The capabilities a task is claimed to demand (a C_T).
    Task,
    /// A reference inventory of a competent language user's capabilities
    /// (a C_L).
    Inventory,
}

/// Declared (never verified) claims about a task capability set.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct CapabilityClaims {
    /// Claim that C_T is fully separated from the rest of the inventory.
    #[serde(default)]
    pub separability: Option<bool>,
    /// Per-capability claim that the task brings out all there is to it.
    #[serde(default)]
    pub exhaustivity: BTreeMap<String, bool>,
    #[serde(default)]
    pub notes: String,
}

/// Named capability tags with prose definitions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapabilitySet {
    pub name: String,
    pub role: CapabilityRole,
    /// Parent inventory name; an inventory is its own parent.
    pub inventory: String,
    /// tag -> prose definition
    pub capabilities: BTreeMap<String, String>,
    #[serde(default)]
    pub claims: CapabilityClaims,
}

impl CapabilitySet {
    pub fn inventory(name: impl Into<String>, capabilities: BTreeMap<String, String>) -> Self {
        let name = name.into();
        CapabilitySet {
            inventory: name.clone(),
            name,
            role: CapabilityRole::Inventory,
            capabilities,
            claims: CapabilityClaims::default(),
        }
    }

    pub fn for_task(
        name: impl Into<String>,
        inventory: impl Into<String>,
        capabilities: BTreeMap<String, String>,
    ) -> Self {
        CapabilitySet {
            name: name.into(),
            role: CapabilityRole::Task,
            inventory: inventory.into(),
            capabilities,
            claims: CapabilityClaims::default(),
        }
    }

    pub fn tags(&self) -> BTreeSet<&String> {
        self.capabilities.keys().collect()
    }
}

/// Set-algebraic relation between two capability sets over the same
/// inventory. Claims are echoed verbatim, not endorsed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapabilityComparison {
    pub inventory: String,
    pub shared: BTreeSet<String>,
    /// In `b` but not in `a`.
    pub added: BTreeSet<String>,
    /// In `a` but not in `b`.
    pub dropped: BTreeSet<String>,
    pub coverage_a: f64,
    pub coverage_b: f64,
    pub claims_a: CapabilityClaims,
    pub claims_b: CapabilityClaims,
}

/// Relates two capability sets: shared, added, and dropped tags, plus each
/// set's coverage fraction of the reference inventory.
pub fn compare_capabilities(
    a: &CapabilitySet,
    b: &CapabilitySet,
    inventory: &CapabilitySet,
) -> Result<CapabilityComparison, DiagnosticsError> {
    if inventory.role != CapabilityRole::Inventory {
        return Err(DiagnosticsError::MissingInventory(inventory.name.clone()));
    }
    for set in [a, b] {
        if set.inventory != inventory.name {
            return Err(DiagnosticsError::InventoryMismatch(
                set.inventory.clone(),
                inventory.name.clone(),
            ));
        }
    }
    let tags_a: BTreeSet<String> = a.capabilities.keys().cloned().collect();
    let tags_b: BTreeSet<String> = b.capabilities.keys().cloned().collect();
    let inventory_tags: BTreeSet<String> = inventory.capabilities.keys().cloned().collect();
    let coverage = |tags: &BTreeSet<String>| {
        if inventory_tags.is_empty() {
            0.0
        } else {
            tags.intersection(&inventory_tags).count() as f64 / inventory_tags.len() as f64
        }
    };
    Ok(CapabilityComparison {
        inventory: inventory.name.clone(),
        shared: tags_a.intersection(&tags_b).cloned().collect(),
        added: tags_b.difference(&tags_a).cloned().collect(),
        dropped: tags_a.difference(&tags_b).cloned().collect(),
        coverage_a: coverage(&tags_a),
        coverage_b: coverage(&tags_b),
        claims_a: a.claims.clone(),
        claims_b: b.claims.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::action::PayloadSchema;
    use crate::record::{FieldSchema, ModalField, RecordSchema};
    use rand::seq::SliceRandom;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use serde_json::json;

    fn qa_like_task() -> TaskSpec {
        let input = RecordSchema::new()
            .with("question", FieldSchema::language(PayloadSchema::AnyString))
            .with("image", FieldSchema::other(PayloadSchema::Any));
        let output =
            RecordSchema::new().with("answer", FieldSchema::language(PayloadSchema::AnyString));
        TaskSpec::new("qa-like", "", input, output, None).unwrap()
    }

    fn pair(question: &str, image: u64, answer: &str) -> (ModalRecord, ModalRecord) {
        (
            ModalRecord::new()
                .with("question", ModalField::language(question))
                .with("image", ModalField::other(json!(image))),
            ModalRecord::new().with("answer", ModalField::language(answer)),
        )
    }

    fn fields(names: &[&str]) -> BTreeSet<String> {
        names.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn keeping_all_fields_memorizes_the_training_set() {
        let task = qa_like_task();
        let train = Dataset::new(vec![
            pair("q1", 1, "yes"),
            pair("q2", 2, "no"),
            pair("q3", 3, "yes"),
        ]);
        let predictor =
            conditional_majority_fit(&task, &train, &fields(&["question", "image"])).unwrap();
        assert_eq!(evaluate_predictor(&predictor, &train).unwrap(), 1.0);
    }

    #[test]
    fn keeping_no_fields_gives_the_global_majority() {
        let task = qa_like_task();
        let train = Dataset::new(vec![
            pair("q1", 1, "yes"),
            pair("q2", 2, "yes"),
            pair("q3", 3, "no"),
        ]);
        let predictor = conditional_majority_fit(&task, &train, &BTreeSet::new()).unwrap();
        let out = predictor
            .predict(&pair("anything", 99, "x").0)
            .unwrap();
        assert_eq!(out.value("answer").unwrap(), &json!("yes"));
    }

    #[test]
    fn functional_dependence_on_kept_field_is_learned() {
        // answer = f(question); questions repeat across train and test
        let task = qa_like_task();
        let mut pairs = Vec::new();
        for i in 0..100u64 {
            let q = format!("q{}", i % 10);
            let answer = if i % 10 < 5 { "yes" } else { "no" };
            pairs.push(pair(&q, i, answer));
        }
        let data = Dataset::new(pairs);
        let (train, test) = split_dataset(&data, 0.8, 3).unwrap();
        let predictor = conditional_majority_fit(&task, &train, &fields(&["question"])).unwrap();
        assert_eq!(evaluate_predictor(&predictor, &test).unwrap(), 1.0);
    }

    #[test]
    fn fit_is_permutation_invariant() {
        let task = qa_like_task();
        let mut pairs = vec![
            pair("q1", 1, "yes"),
            pair("q1", 2, "yes"),
            pair("q1", 3, "no"),
            pair("q2", 4, "no"),
            pair("q2", 5, "no"),
            pair("q2", 6, "yes"),
        ];
        let keep = fields(&["question"]);
        let reference = conditional_majority_fit(&task, &Dataset::new(pairs.clone()), &keep).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            pairs.shuffle(&mut rng);
            let fitted = conditional_majority_fit(&task, &Dataset::new(pairs.clone()), &keep).unwrap();
            for x in [&pair("q1", 0, "").0, &pair("q2", 0, "").0, &pair("q9", 0, "").0] {
                assert_eq!(fitted.predict(x).unwrap(), reference.predict(x).unwrap());
            }
        }
    }

    #[test]
    fn ties_break_by_label_order() {
        let task = qa_like_task();
        // exactly balanced labels: tie broken by canonical encoding order,
        // which puts "no" before "yes"
        let train = Dataset::new(vec![pair("q", 1, "yes"), pair("q", 2, "no")]);
        let predictor = conditional_majority_fit(&task, &train, &fields(&["question"])).unwrap();
        let out = predictor.predict(&pair("q", 3, "").0).unwrap();
        assert_eq!(out.value("answer").unwrap(), &json!("no"));
    }

    #[test]
    fn empty_training_set_is_rejected() {
        let task = qa_like_task();
        assert!(matches!(
            conditional_majority_fit(&task, &Dataset::new(vec![]), &BTreeSet::new()),
            Err(DiagnosticsError::EmptyTrainingSet)
        ));
    }

    #[test]
    fn depriving_everything_is_rejected() {
        let task = qa_like_task();
        let data = Dataset::new((0..20).map(|i| pair(&format!("q{i}"), i, "yes")).collect());
        assert!(matches!(
            deprivation_test(&task, &data, &fields(&["question", "image"]), 0.1, 0),
            Err(DiagnosticsError::DeprivesAllFields)
        ));
        assert!(matches!(
            deprivation_test(&task, &data, &fields(&["nope"]), 0.1, 0),
            Err(DiagnosticsError::UnknownField(_))
        ));
    }

    #[test]
    fn depriving_nothing_is_non_informative() {
        let task = qa_like_task();
        let data = Dataset::new(
            (0..50)
                .map(|i| pair(&format!("q{}", i % 5), i, if i % 2 == 0 { "yes" } else { "no" }))
                .collect(),
        );
        let report = deprivation_test(&task, &data, &BTreeSet::new(), 0.1, 7).unwrap();
        assert!(report.non_informative);
        assert!(!report.flagged);
        assert_eq!(report.deprived_accuracy, report.reference_accuracy);
    }

    #[test]
    fn label_leak_through_question_is_flagged() {
        // y depends only on whether the question mentions the keyword;
        // images are noise. Depriving the image changes nothing.
        let task = qa_like_task();
        let mut pairs = Vec::new();
        for i in 0..200u64 {
            let mentions = i % 2 == 0;
            let q = if mentions {
                format!("is there a giraffe in scene {}?", i % 10)
            } else {
                format!("is there a tree in scene {}?", i % 10)
            };
            pairs.push(pair(&q, i, if mentions { "yes" } else { "no" }));
        }
        let report =
            deprivation_test(&task, &Dataset::new(pairs), &fields(&["image"]), 0.1, 5).unwrap();
        assert!(report.deprived_accuracy > 0.9);
        assert!(report.flagged);
        assert_eq!(report.flagged, report.recompute_flag());
    }

    #[test]
    fn shuffled_labels_are_not_flagged() {
        // labels independent of every field: deprived accuracy stays within
        // 3 sigma of the majority baseline (binomial on the test size)
        let task = qa_like_task();
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let mut labels: Vec<&str> =
            (0..1000).map(|i| if i % 2 == 0 { "yes" } else { "no" }).collect();
        labels.shuffle(&mut rng);
        let pairs: Vec<_> = labels
            .iter()
            .enumerate()
            .map(|(i, label)| pair(&format!("q{}", i % 10), i as u64, label))
            .collect();
        let report =
            deprivation_test(&task, &Dataset::new(pairs), &fields(&["image"]), 0.1, 13).unwrap();
        let sigma = 0.5 / (report.test_size as f64).sqrt();
        assert!(
            (report.deprived_accuracy - report.majority_accuracy).abs() <= 3.0 * sigma,
            "deprived {} vs majority {} (sigma {sigma})",
            report.deprived_accuracy,
            report.majority_accuracy
        );
        assert!(!report.flagged);
    }

    fn caps(tags: &[&str]) -> BTreeMap<String, String> {
        tags.iter().map(|t| (t.to_string(), format!("definition of {t}"))).collect()
    }

    #[test]
    fn capability_set_algebra() {
        let inventory = CapabilitySet::inventory("cl", caps(&["c1", "c2", "c3", "c4"]));
        let a = CapabilitySet::for_task("t", "cl", caps(&["c1", "c2"]));
        let b = CapabilitySet::for_task("t2", "cl", caps(&["c2", "c3"]));
        let cmp = compare_capabilities(&a, &b, &inventory).unwrap();
        assert_eq!(cmp.shared, fields(&["c2"]));
        assert_eq!(cmp.added, fields(&["c3"]));
        assert_eq!(cmp.dropped, fields(&["c1"]));
        assert_eq!(cmp.coverage_a, 0.5);
        // |shared| + |added| = |b|, |shared| + |dropped| = |a|
        assert_eq!(cmp.shared.len() + cmp.added.len(), b.capabilities.len());
        assert_eq!(cmp.shared.len() + cmp.dropped.len(), a.capabilities.len());
    }

    #[test]
    fn full_coverage_when_task_equals_inventory() {
        let inventory = CapabilitySet::inventory("cl", caps(&["c1", "c2"]));
        let t = CapabilitySet::for_task("t", "cl", caps(&["c1", "c2"]));
        let cmp = compare_capabilities(&t, &inventory, &inventory).unwrap();
        assert_eq!(cmp.coverage_a, 1.0);
        assert_eq!(cmp.coverage_b, 1.0);
        assert!(cmp.added.is_empty() && cmp.dropped.is_empty());
    }

    #[test]
    fn disjoint_sets_share_nothing() {
        let inventory = CapabilitySet::inventory("cl", caps(&["c1", "c2", "c3", "c4"]));
        let a = CapabilitySet::for_task("a", "cl", caps(&["c1"]));
        let b = CapabilitySet::for_task("b", "cl", caps(&["c2"]));
        let cmp = compare_capabilities(&a, &b, &inventory).unwrap();
        assert!(cmp.shared.is_empty());
    }

    #[test]
    fn mismatched_inventories_are_rejected() {
        let inventory = CapabilitySet::inventory("cl", caps(&["c1"]));
        let a = CapabilitySet::for_task("a", "other", caps(&["c1"]));
        let b = CapabilitySet::for_task("b", "cl", caps(&["c1"]));
        assert!(matches!(
            compare_capabilities(&a, &b, &inventory),
            Err(DiagnosticsError::InventoryMismatch(_, _))
        ));
    }
}

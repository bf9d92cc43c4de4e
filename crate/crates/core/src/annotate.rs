//! Two-analyst annotation rounds.
//!
//! A round splits its (shuffled) review ids into four contiguous quarters.
//! Quarters are worked one at a time: the labeler proposes a label for every
//! review, the validator agrees or disputes each proposal, and disputes are
//! settled by a negotiated resolution. Only then does the next quarter open.
//!
//! Every accepted operation is an [`RoundEvent`]; [`AnnotationRound::replay`]
//! rebuilds the state from the event list by running the same transitions.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{check_label, Label, LabeledExample, Provenance, Resolution};
use crate::seed::{derive_seed, rng};
use crate::taxonomy::{compute_frequencies, Category, TaxonomyStats};

pub const N_INCREMENTS: usize = 4;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IncrementStatus {
    /// Not opened yet.
    #[default]
    Pending,
    Labeling,
    Validating,
    Resolving,
    Complete,
}

impl std::fmt::Display for IncrementStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            IncrementStatus::Pending => "pending",
            IncrementStatus::Labeling => "labeling",
            IncrementStatus::Validating => "validating",
            IncrementStatus::Resolving => "resolving",
            IncrementStatus::Complete => "complete",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Validation {
    Pending,
    Agreed,
    Disputed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Agree,
    Dispute,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Proposal {
    pub label: Label,
    #[serde(default)]
    pub categories: BTreeSet<Category>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NegotiatedResolution {
    pub label: Label,
    pub categories: BTreeSet<Category>,
    /// Always `"negotiated"`.
    pub method: String,
    pub note: String,
    pub resolved_by: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelRecord {
    pub review_id: String,
    /// 1-based quarter index.
    pub increment: u8,
    pub proposed: Proposal,
    pub proposed_by: String,
    pub validation: Validation,
    pub validated_by: Option<String>,
    pub counter_proposal: Option<Proposal>,
    pub resolution: Option<NegotiatedResolution>,
}

impl LabelRecord {
    /// Agreed records and resolved disputes are final.
    pub fn is_final(&self) -> bool {
        match self.validation {
            Validation::Agreed => true,
            Validation::Disputed => self.resolution.is_some(),
            Validation::Pending => false,
        }
    }

    pub fn final_label(&self) -> (Label, &BTreeSet<Category>) {
        match &self.resolution {
            Some(r) => (r.label, &r.categories),
            None => (self.proposed.label, &self.proposed.categories),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Increment {
    pub index: u8,
    pub review_ids: Vec<String>,
    pub validator_id: String,
    pub status: IncrementStatus,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundSpec {
    pub round_id: String,
    pub review_ids: Vec<String>,
    pub labeler_id: String,
    pub validator_id: String,
    /// Validator per 1-based increment, replacing `validator_id` there.
    #[serde(default)]
    pub validator_overrides: BTreeMap<u8, String>,
    #[serde(default)]
    pub shuffle_seed: u64,
    /// Hide proposals from the validator until they submit a verdict.
    #[serde(default)]
    pub blind: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum RoundEvent {
    RoundCreated {
        spec: RoundSpec,
    },
    LabelSubmitted {
        analyst_id: String,
        review_id: String,
        label: Label,
        categories: BTreeSet<Category>,
    },
    ValidationSubmitted {
        analyst_id: String,
        review_id: String,
        verdict: Verdict,
        counter_proposal: Option<Proposal>,
    },
    DisputeResolved {
        analyst_id: String,
        review_id: String,
        label: Label,
        categories: BTreeSet<Category>,
        note: String,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    NotFound,
    Conflict,
    Invalid,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AnnotateError {
    #[error("round has no reviews")]
    EmptySubset,
    #[error("labeler and validator must be different analysts ({0:?})")]
    SameAnalyst(String),
    #[error("duplicate review id {0:?} in round")]
    DuplicateReview(String),
    #[error("validator override for increment {0} outside 1..=4")]
    BadOverride(u8),
    #[error("review {0:?} is not part of this round")]
    UnknownReview(String),
    #[error("analyst {0:?} is not part of this round")]
    NotInRound(String),
    #[error("analyst {analyst:?} is not the {role} for increment {increment}")]
    Role { analyst: String, role: &'static str, increment: u8 },
    #[error("increment {increment} is {status}, expected {expected}")]
    Phase { increment: u8, status: IncrementStatus, expected: IncrementStatus },
    #[error("review {review_id:?}: {message}")]
    State { review_id: String, message: String },
    #[error("{0}")]
    Label(String),
    #[error("dispute on {0:?} needs a counter-proposal")]
    MissingCounter(String),
    #[error("round incomplete: increments {0:?} not complete")]
    Incomplete(Vec<u8>),
    #[error("event log: {0}")]
    Replay(String),
}

impl AnnotateError {
    pub fn kind(&self) -> ErrorKind {
        use AnnotateError::*;
        match self {
            UnknownReview(_) => ErrorKind::NotFound,
            NotInRound(_) | Role { .. } | Phase { .. } | State { .. } | Incomplete(_) => ErrorKind::Conflict,
            EmptySubset | SameAnalyst(_) | DuplicateReview(_) | BadOverride(_) | Label(_) | MissingCounter(_)
            | Replay(_) => ErrorKind::Invalid,
        }
    }

    /// Stable machine-readable code.
    pub fn code(&self) -> &'static str {
        use AnnotateError::*;
        match self {
            EmptySubset => "empty_subset",
            SameAnalyst(_) => "same_analyst",
            DuplicateReview(_) => "duplicate_review",
            BadOverride(_) => "bad_override",
            UnknownReview(_) => "unknown_review",
            NotInRound(_) => "not_in_round",
            Role { .. } => "role",
            Phase { .. } => "phase",
            State { .. } => "state",
            Label(_) => "label_invariant",
            MissingCounter(_) => "missing_counter_proposal",
            Incomplete(_) => "incomplete",
            Replay(_) => "replay",
        }
    }
}

/// Quarter sizes for `n` ids: the first `n % 4` quarters take one extra.
pub fn quarter_sizes(n: usize) -> [usize; N_INCREMENTS] {
    let base = n / N_INCREMENTS;
    std::array::from_fn(|i| base + usize::from(i < n % N_INCREMENTS))
}

/// `ids` shuffled under `seed`.
pub fn shuffle_ids(ids: &[String], seed: u64) -> Vec<String> {
    let mut out = ids.to_vec();
    out.shuffle(&mut rng(derive_seed(seed, "annotation-round", 0)));
    out
}

/// Serialized as a snapshot; rebuild state with [`AnnotationRound::replay`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnnotationRound {
    pub round_id: String,
    /// Shuffled order; quarters are contiguous slices of it.
    pub review_ids: Vec<String>,
    pub labeler_id: String,
    pub validator_id: String,
    pub blind: bool,
    pub shuffle_seed: u64,
    pub increments: Vec<Increment>,
    pub records: BTreeMap<String, LabelRecord>,
    #[serde(skip)]
    position: BTreeMap<String, u8>,
}

impl AnnotationRound {
    /// Validates `spec`, shuffles its ids and opens increment 1. Returns the
    /// round and the creation event (whose spec holds the shuffled order).
    pub fn create(spec: RoundSpec) -> Result<(Self, RoundEvent), AnnotateError> {
        let shuffled = RoundSpec {
            review_ids: shuffle_ids(&spec.review_ids, spec.shuffle_seed),
            ..spec
        };
        let round = Self::from_spec(&shuffled)?;
        Ok((round, RoundEvent::RoundCreated { spec: shuffled }))
    }

    /// Builds a round from a spec whose ids are already in final order.
    fn from_spec(spec: &RoundSpec) -> Result<Self, AnnotateError> {
        if spec.review_ids.is_empty() {
            return Err(AnnotateError::EmptySubset);
        }
        let mut seen = BTreeSet::new();
        for id in &spec.review_ids {
            if !seen.insert(id.as_str()) {
                return Err(AnnotateError::DuplicateReview(id.clone()));
            }
        }
        if spec.labeler_id == spec.validator_id {
            return Err(AnnotateError::SameAnalyst(spec.labeler_id.clone()));
        }
        for (&i, v) in &spec.validator_overrides {
            if !(1..=N_INCREMENTS as u8).contains(&i) {
                return Err(AnnotateError::BadOverride(i));
            }
            if *v == spec.labeler_id {
                return Err(AnnotateError::SameAnalyst(v.clone()));
            }
        }
        let mut increments = Vec::with_capacity(N_INCREMENTS);
        let mut position = BTreeMap::new();
        let mut start = 0;
        for (i, size) in quarter_sizes(spec.review_ids.len()).into_iter().enumerate() {
            let index = i as u8 + 1;
            let ids = spec.review_ids[start..start + size].to_vec();
            start += size;
            for id in &ids {
                position.insert(id.clone(), index);
            }
            increments.push(Increment {
                index,
                review_ids: ids,
                validator_id: spec
                    .validator_overrides
                    .get(&index)
                    .cloned()
                    .unwrap_or_else(|| spec.validator_id.clone()),
                status: IncrementStatus::Pending,
            });
        }
        let mut round = Self {
            round_id: spec.round_id.clone(),
            review_ids: spec.review_ids.clone(),
            labeler_id: spec.labeler_id.clone(),
            validator_id: spec.validator_id.clone(),
            blind: spec.blind,
            shuffle_seed: spec.shuffle_seed,
            increments,
            records: BTreeMap::new(),
            position,
        };
        round.open_from(0);
        Ok(round)
    }

    /// Opens increment `i` for labeling, completing empty quarters on the way.
    fn open_from(&mut self, mut i: usize) {
        while i < self.increments.len() {
            if self.increments[i].review_ids.is_empty() {
                self.increments[i].status = IncrementStatus::Complete;
                i += 1;
            } else {
                self.increments[i].status = IncrementStatus::Labeling;
                return;
            }
        }
    }

    pub fn replay(events: &[RoundEvent]) -> Result<Self, AnnotateError> {
        let Some((RoundEvent::RoundCreated { spec }, rest)) = events.split_first() else {
            return Err(AnnotateError::Replay("log does not start with round_created".into()));
        };
        let mut round = Self::from_spec(spec)?;
        for ev in rest {
            round.apply(ev)?;
        }
        Ok(round)
    }

    /// Applies one mutation event. On error the round is unchanged.
    pub fn apply(&mut self, event: &RoundEvent) -> Result<LabelRecord, AnnotateError> {
        match event {
            RoundEvent::RoundCreated { .. } => Err(AnnotateError::Replay("round_created after start".into())),
            RoundEvent::LabelSubmitted {
                analyst_id,
                review_id,
                label,
                categories,
            } => self.do_label(analyst_id, review_id, *label, categories),
            RoundEvent::ValidationSubmitted {
                analyst_id,
                review_id,
                verdict,
                counter_proposal,
            } => self.do_validate(analyst_id, review_id, *verdict, counter_proposal.as_ref()),
            RoundEvent::DisputeResolved {
                analyst_id,
                review_id,
                label,
                categories,
                note,
            } => self.do_resolve(analyst_id, review_id, *label, categories, note),
        }
    }

    pub fn spec(&self) -> RoundSpec {
        let validator_overrides = self
            .increments
            .iter()
            .filter(|inc| inc.validator_id != self.validator_id)
            .map(|inc| (inc.index, inc.validator_id.clone()))
            .collect();
        RoundSpec {
            round_id: self.round_id.clone(),
            review_ids: self.review_ids.clone(),
            labeler_id: self.labeler_id.clone(),
            validator_id: self.validator_id.clone(),
            validator_overrides,
            shuffle_seed: self.shuffle_seed,
            blind: self.blind,
        }
    }

    /// The single increment that is not complete, if any.
    pub fn active(&self) -> Option<&Increment> {
        self.increments.iter().find(|i| i.status != IncrementStatus::Complete)
    }

    pub fn is_complete(&self) -> bool {
        self.active().is_none()
    }

    /// Overall status: the active increment's status, or complete.
    pub fn status(&self) -> IncrementStatus {
        self.active().map_or(IncrementStatus::Complete, |i| i.status)
    }

    pub fn contains(&self, review_id: &str) -> bool {
        self.position.contains_key(review_id)
    }

    pub fn is_member(&self, analyst: &str) -> bool {
        analyst == self.labeler_id || self.increments.iter().any(|i| i.validator_id == analyst)
    }

    /// Whether `analyst` may see the proposal on `record`.
    pub fn proposal_visible(&self, record: &LabelRecord, analyst: &str) -> bool {
        !(self.blind && record.validation == Validation::Pending && analyst != record.proposed_by)
    }

    pub fn next_item(&self, analyst: &str) -> Result<Option<String>, AnnotateError> {
        if !self.is_member(analyst) {
            return Err(AnnotateError::NotInRound(analyst.to_string()));
        }
        let Some(inc) = self.active() else {
            return Ok(None);
        };
        let next = match inc.status {
            IncrementStatus::Labeling if analyst == self.labeler_id => {
                inc.review_ids.iter().find(|id| !self.records.contains_key(*id))
            }
            IncrementStatus::Validating if analyst == inc.validator_id => inc
                .review_ids
                .iter()
                .find(|id| self.records.get(*id).is_some_and(|r| r.validation == Validation::Pending)),
            _ => None,
        };
        Ok(next.cloned())
    }

    fn locate(&self, review_id: &str) -> Result<usize, AnnotateError> {
        self.position
            .get(review_id)
            .map(|&i| usize::from(i) - 1)
            .ok_or_else(|| AnnotateError::UnknownReview(review_id.to_string()))
    }

    fn expect_phase(&self, i: usize, expected: IncrementStatus) -> Result<(), AnnotateError> {
        let inc = &self.increments[i];
        if inc.status != expected {
            return Err(AnnotateError::Phase {
                increment: inc.index,
                status: inc.status,
                expected,
            });
        }
        Ok(())
    }

    fn label_check(review_id: &str, label: Label, categories: &BTreeSet<Category>) -> Result<(), AnnotateError> {
        check_label(review_id, label, categories).map_err(|e| AnnotateError::Label(e.to_string()))
    }

    fn do_label(
        &mut self,
        analyst: &str,
        review_id: &str,
        label: Label,
        categories: &BTreeSet<Category>,
    ) -> Result<LabelRecord, AnnotateError> {
        if !self.is_member(analyst) {
            return Err(AnnotateError::NotInRound(analyst.to_string()));
        }
        let i = self.locate(review_id)?;
        if analyst != self.labeler_id {
            return Err(AnnotateError::Role {
                analyst: analyst.to_string(),
                role: "labeler",
                increment: self.increments[i].index,
            });
        }
        if self.records.contains_key(review_id) {
            return Err(AnnotateError::State {
                review_id: review_id.to_string(),
                message: "already proposed".into(),
            });
        }
        self.expect_phase(i, IncrementStatus::Labeling)?;
        Self::label_check(review_id, label, categories)?;
        let record = LabelRecord {
            review_id: review_id.to_string(),
            increment: self.increments[i].index,
            proposed: Proposal {
                label,
                categories: categories.clone(),
            },
            proposed_by: analyst.to_string(),
            validation: Validation::Pending,
            validated_by: None,
            counter_proposal: None,
            resolution: None,
        };
        self.records.insert(review_id.to_string(), record.clone());
        let inc = &self.increments[i];
        if inc.review_ids.iter().all(|id| self.records.contains_key(id)) {
            self.increments[i].status = IncrementStatus::Validating;
        }
        Ok(record)
    }

    fn do_validate(
        &mut self,
        analyst: &str,
        review_id: &str,
        verdict: Verdict,
        counter: Option<&Proposal>,
    ) -> Result<LabelRecord, AnnotateError> {
        if !self.is_member(analyst) {
            return Err(AnnotateError::NotInRound(analyst.to_string()));
        }
        let i = self.locate(review_id)?;
        if analyst != self.increments[i].validator_id {
            return Err(AnnotateError::Role {
                analyst: analyst.to_string(),
                role: "validator",
                increment: self.increments[i].index,
            });
        }
        self.expect_phase(i, IncrementStatus::Validating)?;
        let record = &self.records[review_id];
        if record.validation != Validation::Pending {
            return Err(AnnotateError::State {
                review_id: review_id.to_string(),
                message: "already validated".into(),
            });
        }
        if verdict == Verdict::Dispute {
            let c = counter.ok_or_else(|| AnnotateError::MissingCounter(review_id.to_string()))?;
            Self::label_check(review_id, c.label, &c.categories)?;
        }
        let record = self.records.get_mut(review_id).expect("located");
        record.validated_by = Some(analyst.to_string());
        match verdict {
            Verdict::Agree => record.validation = Validation::Agreed,
            Verdict::Dispute => {
                record.validation = Validation::Disputed;
                record.counter_proposal = counter.cloned();
            }
        }
        let out = record.clone();
        self.settle(i);
        Ok(out)
    }

    fn do_resolve(
        &mut self,
        analyst: &str,
        review_id: &str,
        label: Label,
        categories: &BTreeSet<Category>,
        note: &str,
    ) -> Result<LabelRecord, AnnotateError> {
        if !self.is_member(analyst) {
            return Err(AnnotateError::NotInRound(analyst.to_string()));
        }
        let i = self.locate(review_id)?;
        let inc = &self.increments[i];
        if analyst != self.labeler_id && analyst != inc.validator_id {
            return Err(AnnotateError::Role {
                analyst: analyst.to_string(),
                role: "labeler or validator",
                increment: inc.index,
            });
        }
        let disputed = self
            .records
            .get(review_id)
            .is_some_and(|r| r.validation == Validation::Disputed && r.resolution.is_none());
        if !disputed {
            return Err(AnnotateError::State {
                review_id: review_id.to_string(),
                message: "no open dispute".into(),
            });
        }
        self.expect_phase(i, IncrementStatus::Resolving)?;
        Self::label_check(review_id, label, categories)?;
        let record = self.records.get_mut(review_id).expect("located");
        record.resolution = Some(NegotiatedResolution {
            label,
            categories: categories.clone(),
            method: "negotiated".into(),
            note: note.to_string(),
            resolved_by: analyst.to_string(),
        });
        let out = record.clone();
        self.settle(i);
        Ok(out)
    }

    /// Moves increment `i` forward once no validation is pending.
    fn settle(&mut self, i: usize) {
        let recs: Vec<&LabelRecord> = self.increments[i].review_ids.iter().map(|id| &self.records[id]).collect();
        if recs.iter().any(|r| r.validation == Validation::Pending) {
            return;
        }
        if recs.iter().all(|r| r.is_final()) {
            self.increments[i].status = IncrementStatus::Complete;
            self.open_from(i + 1);
        } else {
            self.increments[i].status = IncrementStatus::Resolving;
        }
    }

    fn example(&self, r: &LabelRecord) -> LabeledExample {
        let (label, categories) = r.final_label();
        LabeledExample {
            review_id: r.review_id.clone(),
            label,
            categories: categories.clone(),
            provenance: Provenance {
                labeler_id: r.proposed_by.clone(),
                validator_id: r.validated_by.clone(),
                resolution: if r.resolution.is_some() {
                    Resolution::Negotiated
                } else {
                    Resolution::Agreed
                },
                round_increment: r.increment,
            },
        }
    }

    /// Final labels in round order. Fails while any increment is open.
    pub fn export(&self) -> Result<Vec<LabeledExample>, AnnotateError> {
        let open: Vec<u8> = self
            .increments
            .iter()
            .filter(|i| i.status != IncrementStatus::Complete)
            .map(|i| i.index)
            .collect();
        if !open.is_empty() {
            return Err(AnnotateError::Incomplete(open));
        }
        Ok(self.review_ids.iter().map(|id| self.example(&self.records[id])).collect())
    }

    pub fn stats(&self) -> RoundStats {
        let increments: Vec<IncrementStats> = self
            .increments
            .iter()
            .map(|inc| {
                let mut s = IncrementStats {
                    index: inc.index,
                    status: inc.status,
                    validator_id: inc.validator_id.clone(),
                    size: inc.review_ids.len(),
                    ..IncrementStats::default()
                };
                for r in inc.review_ids.iter().filter_map(|id| self.records.get(id)) {
                    s.proposed += 1;
                    match r.validation {
                        Validation::Pending => {}
                        Validation::Agreed => s.agreed += 1,
                        Validation::Disputed => s.disputed += 1,
                    }
                    if r.resolution.is_some() {
                        s.resolved += 1;
                    }
                }
                s.validated = s.agreed + s.disputed;
                s.agreement_rate = agreement(s.agreed, s.validated);
                s
            })
            .collect();
        let agreed = increments.iter().map(|s| s.agreed).sum();
        let validated = increments.iter().map(|s| s.validated).sum();
        let finals: Vec<LabeledExample> = self
            .review_ids
            .iter()
            .filter_map(|id| self.records.get(id))
            .filter(|r| r.is_final())
            .map(|r| self.example(r))
            .collect();
        RoundStats {
            round_id: self.round_id.clone(),
            status: self.status(),
            total: self.review_ids.len(),
            finalized: finals.len(),
            agreement_rate: agreement(agreed, validated),
            increments,
            categories: compute_frequencies(&finals).expect("final labels satisfy label invariants"),
        }
    }
}

impl AnnotationRound {
    pub fn submit_label(
        &mut self,
        analyst: &str,
        review_id: &str,
        label: Label,
        categories: BTreeSet<Category>,
    ) -> Result<(LabelRecord, RoundEvent), AnnotateError> {
        let ev = RoundEvent::LabelSubmitted {
            analyst_id: analyst.to_string(),
            review_id: review_id.to_string(),
            label,
            categories,
        };
        Ok((self.apply(&ev)?, ev))
    }

    pub fn submit_validation(
        &mut self,
        analyst: &str,
        review_id: &str,
        verdict: Verdict,
        counter_proposal: Option<Proposal>,
    ) -> Result<(LabelRecord, RoundEvent), AnnotateError> {
        let ev = RoundEvent::ValidationSubmitted {
            analyst_id: analyst.to_string(),
            review_id: review_id.to_string(),
            verdict,
            counter_proposal,
        };
        Ok((self.apply(&ev)?, ev))
    }

    pub fn resolve_dispute(
        &mut self,
        analyst: &str,
        review_id: &str,
        label: Label,
        categories: BTreeSet<Category>,
        note: &str,
    ) -> Result<(LabelRecord, RoundEvent), AnnotateError> {
        let ev = RoundEvent::DisputeResolved {
            analyst_id: analyst.to_string(),
            review_id: review_id.to_string(),
            label,
            categories,
            note: note.to_string(),
        };
        Ok((self.apply(&ev)?, ev))
    }
}

fn agreement(agreed: usize, validated: usize) -> Option<f64> {
    (validated > 0).then(|| agreed as f64 / validated as f64)
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct IncrementStats {
    pub index: u8,
    pub status: IncrementStatus,
    pub validator_id: String,
    pub size: usize,
    pub proposed: usize,
    pub validated: usize,
    pub agreed: usize,
    pub disputed: usize,
    pub resolved: usize,
    /// Agreed over validated; absent before the first verdict.
    pub agreement_rate: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundStats {
    pub round_id: String,
    pub status: IncrementStatus,
    pub total: usize,
    pub finalized: usize,
    pub agreement_rate: Option<f64>,
    pub increments: Vec<IncrementStats>,
    /// Category frequencies over finalized violation labels.
    pub categories: TaxonomyStats,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ids(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("r{i}")).collect()
    }

    fn spec(n: usize) -> RoundSpec {
        RoundSpec {
            round_id: "t".into(),
            review_ids: ids(n),
            labeler_id: "ana".into(),
            validator_id: "vic".into(),
            validator_overrides: BTreeMap::new(),
            shuffle_seed: 1,
            blind: false,
        }
    }

    #[test]
    fn quarter_sizes_examples() {
        assert_eq!(quarter_sizes(8), [2, 2, 2, 2]);
        assert_eq!(quarter_sizes(10), [3, 3, 2, 2]);
        assert_eq!(quarter_sizes(4885), [1222, 1221, 1221, 1221]);
        assert_eq!(quarter_sizes(1), [1, 0, 0, 0]);
    }

    #[test]
    fn create_rejects_bad_specs() {
        let mut s = spec(0);
        assert_eq!(AnnotationRound::create(s.clone()).unwrap_err(), AnnotateError::EmptySubset);
        s = spec(4);
        s.validator_id = "ana".into();
        assert!(matches!(AnnotationRound::create(s).unwrap_err(), AnnotateError::SameAnalyst(_)));
    }

    #[test]
    fn tiny_round_skips_empty_quarters() {
        let (mut r, _) = AnnotationRound::create(spec(1)).unwrap();
        let id = r.next_item("ana").unwrap().unwrap();
        r.do_label("ana", &id, Label::NonViolation, &BTreeSet::new()).unwrap();
        r.do_validate("vic", &id, Verdict::Agree, None).unwrap();
        assert!(r.is_complete());
        assert_eq!(r.export().unwrap().len(), 1);
    }

    #[test]
    fn failed_operation_leaves_state_unchanged() {
        let (mut r, _) = AnnotationRound::create(spec(4)).unwrap();
        let before = r.clone();
        let id = r.review_ids[0].clone();
        let cats: BTreeSet<Category> = [Category::ALL[0]].into();
        assert!(r.do_label("ana", &id, Label::NonViolation, &cats).is_err());
        assert_eq!(r, before);
    }
}

//! HTTP front end for annotation rounds.
//!
//! Every mutating request becomes one [`RoundEvent`], applied under the
//! round's own lock and appended to `<round>.events.jsonl` before the new
//! state becomes visible. Restarting on the same directory replays the logs.
//! Analysts identify themselves with the `X-Analyst-Id` header.

mod error;
mod store;

use std::collections::{BTreeMap, BTreeSet};
use std::net::SocketAddr;
use std::path::Path;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path as UrlPath, Query, State};
use axum::http::{header, HeaderMap, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use candor_core::annotate::{AnnotationRound, LabelRecord, Proposal, RoundEvent, RoundSpec, Verdict};
use candor_core::corpus::{labeled_to_jsonl, Label};
use candor_core::taxonomy::{default_definitions, Category, CategoryDefinition};
use candor_core::ReviewCorpus;
use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::{json, Value};
use tokio::sync::{Mutex, RwLock};

pub use error::{ErrorBody, ServiceError};
pub use store::RoundStore;

pub const ANALYST_HEADER: &str = "x-analyst-id";

type RoundHandle = Arc<Mutex<AnnotationRound>>;

pub struct AppState {
    store: Option<RoundStore>,
    corpus: Option<ReviewCorpus>,
    definitions: Vec<CategoryDefinition>,
    rounds: RwLock<BTreeMap<String, RoundHandle>>,
}

impl AppState {
    /// In-memory state; nothing survives the process.
    pub fn ephemeral(corpus: Option<ReviewCorpus>) -> Self {
        Self {
            store: None,
            corpus,
            definitions: default_definitions(),
            rounds: RwLock::new(BTreeMap::new()),
        }
    }

    /// State backed by `dir`, replaying any logs found there.
    pub fn open(dir: &Path, corpus: Option<ReviewCorpus>) -> Result<Self, ServiceError> {
        let store = RoundStore::open(dir)?;
        let rounds = store
            .load_all()?
            .into_iter()
            .map(|r| (r.round_id.clone(), Arc::new(Mutex::new(r))))
            .collect();
        Ok(Self {
            store: Some(store),
            corpus,
            definitions: default_definitions(),
            rounds: RwLock::new(rounds),
        })
    }

    pub fn with_definitions(mut self, definitions: Vec<CategoryDefinition>) -> Self {
        self.definitions = definitions;
        self
    }

    async fn round(&self, id: &str) -> Result<RoundHandle, ServiceError> {
        self.rounds
            .read()
            .await
            .get(id)
            .cloned()
            .ok_or_else(|| ServiceError::UnknownRound(id.to_string()))
    }

    pub async fn create_round(&self, spec: RoundSpec) -> Result<AnnotationRound, ServiceError> {
        if !valid_round_id(&spec.round_id) {
            return Err(ServiceError::BadRoundId(spec.round_id));
        }
        if let Some(c) = &self.corpus {
            let missing: Vec<String> = spec.review_ids.iter().filter(|id| c.get(id).is_none()).cloned().collect();
            if !missing.is_empty() {
                return Err(ServiceError::NotInCorpus(missing));
            }
        }
        let mut rounds = self.rounds.write().await;
        if rounds.contains_key(&spec.round_id) {
            return Err(ServiceError::RoundExists(spec.round_id));
        }
        let (round, event) = AnnotationRound::create(spec)?;
        if let Some(store) = &self.store {
            store.append(&round.round_id, &event)?;
            store.write_snapshot(&round)?;
        }
        rounds.insert(round.round_id.clone(), Arc::new(Mutex::new(round.clone())));
        Ok(round)
    }

    /// Applies `event` to round `id`. The event is logged before the new
    /// state replaces the old one, so a failed write leaves nothing behind.
    pub async fn apply(&self, id: &str, event: RoundEvent) -> Result<LabelRecord, ServiceError> {
        let handle = self.round(id).await?;
        let mut round = handle.lock().await;
        let mut next = round.clone();
        let record = next.apply(&event)?;
        if let Some(store) = &self.store {
            store.append(id, &event)?;
            store.write_snapshot(&next)?;
        }
        *round = next;
        Ok(record)
    }

    /// Copy of the current state of round `id`.
    pub async fn snapshot(&self, id: &str) -> Result<AnnotationRound, ServiceError> {
        Ok(self.round(id).await?.lock().await.clone())
    }

    pub async fn round_ids(&self) -> Vec<String> {
        self.rounds.read().await.keys().cloned().collect()
    }
}

fn valid_round_id(id: &str) -> bool {
    (1..=64).contains(&id.len()) && id.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
}

fn parse_body<T: DeserializeOwned>(body: &Bytes) -> Result<T, ServiceError> {
    serde_json::from_slice(body).map_err(|e| ServiceError::Body(e.to_string()))
}

fn analyst(headers: &HeaderMap) -> Result<String, ServiceError> {
    headers
        .get(ANALYST_HEADER)
        .and_then(|v| v.to_str().ok())
        .map(str::trim)
        .filter(|v| !v.is_empty())
        .map(str::to_string)
        .ok_or(ServiceError::MissingAnalyst)
}

/// Round state as seen by `viewer`: in blind mode, proposals still awaiting
/// validation are blanked for everyone but their author.
fn round_view(round: &AnnotationRound, viewer: Option<&str>) -> Value {
    let mut v = serde_json::to_value(round).expect("round serialize");
    if round.blind {
        for (id, rec) in &round.records {
            if !round.proposal_visible(rec, viewer.unwrap_or("")) {
                v["records"][id]["proposed"] = Value::Null;
            }
        }
    }
    v["status"] = json!(round.status());
    v["active_increment"] = json!(round.active().map(|i| i.index));
    v
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/rounds", post(create_round).get(list_rounds))
        .route("/rounds/{id}", get(get_round))
        .route("/rounds/{id}/next", get(next_item))
        .route("/rounds/{id}/labels", post(submit_label))
        .route("/rounds/{id}/validations", post(submit_validation))
        .route("/rounds/{id}/resolutions", post(resolve_dispute))
        .route("/rounds/{id}/export", get(export))
        .route("/rounds/{id}/stats", get(stats))
        .route("/reviews/{id}", get(get_review))
        .route("/taxonomy", get(taxonomy))
        .with_state(state)
}

/// Binds `addr` and serves until the process is stopped.
pub async fn serve(addr: SocketAddr, state: Arc<AppState>) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    axum::serve(listener, router(state)).await
}

type Shared = State<Arc<AppState>>;

async fn create_round(State(s): Shared, body: Bytes) -> Result<Response, ServiceError> {
    let spec: RoundSpec = parse_body(&body)?;
    let round = s.create_round(spec).await?;
    Ok((StatusCode::CREATED, Json(round_view(&round, None))).into_response())
}

async fn list_rounds(State(s): Shared) -> Json<Vec<String>> {
    Json(s.round_ids().await)
}

#[derive(Deserialize)]
struct AnalystQuery {
    analyst: Option<String>,
}

async fn get_round(
    State(s): Shared,
    UrlPath(id): UrlPath<String>,
    Query(q): Query<AnalystQuery>,
    headers: HeaderMap,
) -> Result<Json<Value>, ServiceError> {
    let viewer = q.analyst.or_else(|| analyst(&headers).ok());
    let round = s.snapshot(&id).await?;
    Ok(Json(round_view(&round, viewer.as_deref())))
}

async fn next_item(
    State(s): Shared,
    UrlPath(id): UrlPath<String>,
    Query(q): Query<AnalystQuery>,
    headers: HeaderMap,
) -> Result<Json<Value>, ServiceError> {
    let who = match q.analyst {
        Some(a) => a,
        None => analyst(&headers)?,
    };
    let round = s.snapshot(&id).await?;
    let next = round.next_item(&who)?;
    let review = next.as_ref().and_then(|r| s.corpus.as_ref()?.get(r).cloned());
    let record = next.as_ref().and_then(|r| round.records.get(r));
    let proposed = record.filter(|rec| round.proposal_visible(rec, &who)).map(|rec| &rec.proposed);
    Ok(Json(json!({
        "review_id": next,
        "increment": round.active().map(|i| i.index),
        "status": round.status(),
        "review": review,
        "proposed": proposed,
    })))
}

#[derive(Deserialize)]
struct LabelBody {
    review_id: String,
    label: Label,
    #[serde(default)]
    categories: BTreeSet<Category>,
}

#[derive(Deserialize)]
struct ValidationBody {
    review_id: String,
    verdict: Verdict,
    #[serde(default)]
    counter_proposal: Option<Proposal>,
}

#[derive(Deserialize)]
struct ResolutionBody {
    review_id: String,
    label: Label,
    #[serde(default)]
    categories: BTreeSet<Category>,
    #[serde(default)]
    note: String,
}

async fn submit_label(
    State(s): Shared,
    UrlPath(id): UrlPath<String>,
    headers: HeaderMap,
    body: Bytes,
) -> Result<Json<LabelRecord>, ServiceError> {
    let who = analyst(&headers)?;
    let b: LabelBody = parse_body(&body)?;
    let ev = RoundEvent::LabelSubmitted {
        analyst_id: who,
        review_id: b.review_id,
        label: b.label,
        categories: b.categories,
    };
    Ok(Json(s.apply(&id, ev).await?))
}

async fn submit_validation(
    State(s): Shared,
    UrlPath(id): UrlPath<String>,
    headers: HeaderMap,
    body: Bytes,
) -> Result<Json<LabelRecord>, ServiceError> {
    let who = analyst(&headers)?;
    let b: ValidationBody = parse_body(&body)?;
    let ev = RoundEvent::ValidationSubmitted {
        analyst_id: who,
        review_id: b.review_id,
        verdict: b.verdict,
        counter_proposal: b.counter_proposal,
    };
    Ok(Json(s.apply(&id, ev).await?))
}

async fn resolve_dispute(
    State(s): Shared,
    UrlPath(id): UrlPath<String>,
    headers: HeaderMap,
    body: Bytes,
) -> Result<Json<LabelRecord>, ServiceError> {
    let who = analyst(&headers)?;
    let b: ResolutionBody = parse_body(&body)?;
    let ev = RoundEvent::DisputeResolved {
        analyst_id: who,
        review_id: b.review_id,
        label: b.label,
        categories: b.categories,
        note: b.note,
    };
    Ok(Json(s.apply(&id, ev).await?))
}

async fn export(State(s): Shared, UrlPath(id): UrlPath<String>) -> Result<Response, ServiceError> {
    let examples = s.snapshot(&id).await?.export()?;
    Ok(([(header::CONTENT_TYPE, "application/x-ndjson")], labeled_to_jsonl(&examples)).into_response())
}

async fn stats(State(s): Shared, UrlPath(id): UrlPath<String>) -> Result<Response, ServiceError> {
    let round = s.snapshot(&id).await?;
    Ok(Json(round.stats()).into_response())
}

async fn get_review(State(s): Shared, UrlPath(id): UrlPath<String>) -> Result<Response, ServiceError> {
    let review = s
        .corpus
        .as_ref()
        .and_then(|c| c.get(&id))
        .ok_or(ServiceError::UnknownReview(id))?;
    Ok(Json(review).into_response())
}

async fn taxonomy(State(s): Shared) -> Json<Vec<CategoryDefinition>> {
    Json(s.definitions.clone())
}

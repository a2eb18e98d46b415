use icdoc_core::{Digest, DocId, Manifest};
use reqwest::blocking::{Client, Response};
use reqwest::StatusCode;
use serde::de::DeserializeOwned;
use serde_json::json;
use thiserror::Error;

use crate::server::{DocumentView, PublishResponse};
use crate::{DocumentRecord, StatusChange, TrackerEvent};

#[derive(Debug, Error)]
pub enum ClientError {
    #[error("cannot reach tracker: {0}")]
    Transport(String),
    #[error("tracker rejected the request ({status}): {message}")]
    Rejected { status: u16, message: String },
    #[error("unexpected tracker response: {0}")]
    Decode(String),
}

impl ClientError {
    pub fn status(&self) -> Option<u16> {
        match self {
            ClientError::Rejected { status, .. } => Some(*status),
            _ => None,
        }
    }
}

/// Blocking HTTP client for the tracker API.
#[derive(Debug, Clone)]
pub struct TrackerClient {
    base: String,
    http: Client,
}

fn transport(e: reqwest::Error) -> ClientError {
    ClientError::Transport(e.to_string())
}

fn decode<T: DeserializeOwned>(resp: Response) -> Result<T, ClientError> {
    let status = resp.status();
    let text = resp.text().map_err(transport)?;
    if !status.is_success() {
        let message = serde_json::from_str::<serde_json::Value>(&text)
            .ok()
            .and_then(|v| v.get("error").and_then(|e| e.as_str()).map(str::to_string))
            .unwrap_or(text);
        return Err(ClientError::Rejected {
            status: status.as_u16(),
            message,
        });
    }
    serde_json::from_str(&text).map_err(|e| ClientError::Decode(e.to_string()))
}

impl TrackerClient {
    pub fn new(base_url: &str) -> Self {
        TrackerClient {
            base: base_url.trim_end_matches('/').to_string(),
            http: Client::new(),
        }
    }

    fn url(&self, path: &str) -> String {
        format!("{}{path}", self.base)
    }

    fn post<T: DeserializeOwned>(
        &self,
        path: &str,
        body: &serde_json::Value,
    ) -> Result<T, ClientError> {
        let resp = self
            .http
            .post(self.url(path))
            .json(body)
            .send()
            .map_err(transport)?;
        decode(resp)
    }

    /// Register `doc_id`. Returns `false` when it was already registered.
    pub fn ensure_registered(&self, doc_id: &DocId) -> Result<bool, ClientError> {
        match self.post::<DocumentRecord>("/documents", &json!({ "doc_id": doc_id })) {
            Ok(_) => Ok(true),
            Err(ClientError::Rejected { status: 409, .. }) => Ok(false),
            Err(e) => Err(e),
        }
    }

    pub fn register(&self, doc_id: &DocId) -> Result<DocumentRecord, ClientError> {
        self.post("/documents", &json!({ "doc_id": doc_id }))
    }

    pub fn publish(&self, manifest: &Manifest) -> Result<Vec<StatusChange>, ClientError> {
        let body = serde_json::to_value(manifest).expect("manifest serializes");
        let resp: PublishResponse =
            self.post(&format!("/documents/{}/versions", manifest.doc_id), &body)?;
        Ok(resp.changed)
    }

    pub fn build_failure(
        &self,
        doc_id: &DocId,
        summary: &str,
    ) -> Result<DocumentRecord, ClientError> {
        self.post(
            &format!("/documents/{doc_id}/build-failures"),
            &json!({ "summary": summary }),
        )
    }

    pub fn check_failure(
        &self,
        doc_id: &DocId,
        path: &str,
        expected: &Digest,
        actual: &Digest,
        reporter: &str,
    ) -> Result<TrackerEvent, ClientError> {
        self.post(
            &format!("/documents/{doc_id}/check-failures"),
            &json!({ "path": path, "expected": expected, "actual": actual, "reporter": reporter }),
        )
    }

    pub fn list(&self) -> Result<Vec<DocumentRecord>, ClientError> {
        decode(
            self.http
                .get(self.url("/documents"))
                .send()
                .map_err(transport)?,
        )
    }

    /// `None` when the document is not registered.
    pub fn get(&self, doc_id: &DocId) -> Result<Option<DocumentView>, ClientError> {
        let resp = self
            .http
            .get(self.url(&format!("/documents/{doc_id}")))
            .send()
            .map_err(transport)?;
        if resp.status() == StatusCode::NOT_FOUND {
            return Ok(None);
        }
        decode(resp).map(Some)
    }
}

//! Adapter that asks an external text model for layout proposals.
//!
//! Every request renders [`PROMPT_TEMPLATE`] with the current planning state
//! (including the latest SVG plan) and expects a single JSON object back.
//! Transport failures fall back to [`HeuristicBackend`] with a warning;
//! malformed replies count as rejected proposals.

use std::sync::Mutex;
use std::time::Duration;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::{FacilityProposal, HeuristicBackend, PlannerBackend, Rule, SplitProposal};
use crate::error::{Error, Result};
use crate::geom::Rect;
use crate::rng::SeedStream;

pub const ENV_URL: &str = "MARKETGEN_REMOTE_URL";
pub const ENV_KEY: &str = "MARKETGEN_REMOTE_KEY";
pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(30);

pub const PROMPT_TEMPLATE: &str = "\
You are the layout designer for a supermarket floor plan.
Task: {task}
Current plan (SVG, 1 px = 5 cm):
{svg}
State:
{state}
Answer with exactly one JSON object and nothing else, in this form:
{format}
";

/// Moves a prompt to a model endpoint and returns its text completion.
pub trait Transport: Send + Sync {
    fn complete(&self, prompt: &str) -> Result<String>;
}

pub struct RemoteBackend {
    transport: Box<dyn Transport>,
    fallback: HeuristicBackend,
    svg: Mutex<String>,
}

#[derive(Serialize)]
struct SplitState<'a> {
    region: &'a Rect,
    fractions: &'a [f64],
    attempt: u32,
}

#[derive(Serialize)]
struct OrderState<'a> {
    labels: &'a [String],
    rules: &'a [Rule],
}

#[derive(Serialize)]
struct FacilityState<'a> {
    label: &'a str,
    width: f64,
    depth: f64,
    attempt: u32,
}

#[derive(Deserialize)]
struct OrderReply {
    order: Vec<String>,
}

/// Extracts the outermost JSON object from a completion.
fn parse_reply<T: DeserializeOwned>(text: &str) -> Result<T> {
    let (Some(a), Some(b)) = (text.find('{'), text.rfind('}')) else {
        return Err(Error::Remote("reply contains no JSON object".into()));
    };
    if b < a {
        return Err(Error::Remote("reply contains no JSON object".into()));
    }
    serde_json::from_str(&text[a..=b]).map_err(|e| Error::Remote(format!("unparseable reply: {e}")))
}

impl RemoteBackend {
    pub fn new(transport: Box<dyn Transport>) -> Self {
        RemoteBackend {
            transport,
            fallback: HeuristicBackend,
            svg: Mutex::new(String::new()),
        }
    }

    /// Builds an HTTP-backed adapter from the environment, if configured.
    pub fn from_env(timeout: Duration) -> Result<Option<Self>> {
        let Ok(url) = std::env::var(ENV_URL) else {
            return Ok(None);
        };
        let key = std::env::var(ENV_KEY).unwrap_or_default();
        http_transport(url, key, timeout).map(|t| Some(RemoteBackend::new(t)))
    }

    pub fn render_prompt(&self, task: &str, state: &impl Serialize, format: &str) -> String {
        let svg = self.svg.lock().map(|s| s.clone()).unwrap_or_default();
        let state = serde_json::to_string_pretty(state).unwrap_or_default();
        PROMPT_TEMPLATE
            .replace("{task}", task)
            .replace("{svg}", if svg.is_empty() { "(none yet)" } else { &svg })
            .replace("{state}", &state)
            .replace("{format}", format)
    }

    /// `Ok(None)` means the transport failed and the caller should fall back.
    fn ask<T: DeserializeOwned>(&self, prompt: &str) -> Result<Option<T>> {
        match self.transport.complete(prompt) {
            Ok(text) => parse_reply(&text).map(Some),
            Err(e) => {
                log::warn!("remote planner unreachable ({e}); falling back to heuristic backend");
                Ok(None)
            }
        }
    }
}

impl PlannerBackend for RemoteBackend {
    fn name(&self) -> &str {
        "remote"
    }

    fn propose_split(
        &self,
        region: &Rect,
        fractions: &[f64],
        seeds: &SeedStream,
        attempt: u32,
    ) -> Result<SplitProposal> {
        let prompt = self.render_prompt(
            "choose the axis and ratio for the next binary split of the region between the listed zone area fractions",
            &SplitState {
                region,
                fractions,
                attempt,
            },
            r#"{"axis": "x" | "y", "ratio": number strictly between 0 and 1}"#,
        );
        match self.ask(&prompt)? {
            Some(p) => Ok(p),
            None => self.fallback.propose_split(region, fractions, seeds, attempt),
        }
    }

    fn propose_zone_order(&self, labels: &[String], rules: &[Rule]) -> Result<Vec<String>> {
        let prompt = self.render_prompt(
            "order the zone labels by placement priority",
            &OrderState { labels, rules },
            r#"{"order": [label, ...]}"#,
        );
        match self.ask::<OrderReply>(&prompt)? {
            Some(r) => Ok(r.order),
            None => self.fallback.propose_zone_order(labels, rules),
        }
    }

    fn propose_facility(&self, label: &str, region: &Rect, attempt: u32) -> Result<FacilityProposal> {
        let prompt = self.render_prompt(
            "choose the facility kind and shelf parameters for the zone",
            &FacilityState {
                label,
                width: region.width(),
                depth: region.height(),
                attempt,
            },
            r#"{"kind": "shelf" | "refrigerator" | "checkout-counter" | "bin", "params": {"unit_type": "gondola" | "wall-unit" | "end-cap", "double_sided": bool, "tiers": int, "tier_spacing": m, "length": m, "depth": m, "base_height": m, "board_thickness": m, "material_tag": string} | null, "end_caps": bool, "wall_units": bool}"#,
        );
        match self.ask(&prompt)? {
            Some(p) => Ok(p),
            None => self.fallback.propose_facility(label, region, attempt),
        }
    }

    fn observe_layout(&self, svg: &str) {
        if let Ok(mut s) = self.svg.lock() {
            *s = svg.to_string();
        }
    }
}

#[cfg(feature = "remote")]
fn http_transport(url: String, key: String, timeout: Duration) -> Result<Box<dyn Transport>> {
    Ok(Box::new(http::HttpTransport::new(url, key, timeout)))
}

#[cfg(not(feature = "remote"))]
fn http_transport(_url: String, _key: String, _timeout: Duration) -> Result<Box<dyn Transport>> {
    Err(Error::Remote(format!(
        "{ENV_URL} is set but this build lacks the `remote` feature"
    )))
}

#[cfg(feature = "remote")]
mod http {
    use std::time::Duration;

    use super::Transport;
    use crate::error::{Error, Result};

    /// POSTs `{"prompt": ...}` and reads `{"completion": ...}`.
    pub struct HttpTransport {
        url: String,
        key: String,
        agent: ureq::Agent,
    }

    impl HttpTransport {
        pub fn new(url: String, key: String, timeout: Duration) -> Self {
            let agent = ureq::Agent::config_builder()
                .timeout_global(Some(timeout))
                .build()
                .into();
            HttpTransport { url, key, agent }
        }
    }

    impl Transport for HttpTransport {
        fn complete(&self, prompt: &str) -> Result<String> {
            let body = serde_json::json!({ "prompt": prompt }).to_string();
            let mut resp = self
                .agent
                .post(&self.url)
                .header("Authorization", &format!("Bearer {}", self.key))
                .content_type("application/json")
                .send(body)
                .map_err(|e| Error::Remote(e.to_string()))?;
            let text = resp
                .body_mut()
                .read_to_string()
                .map_err(|e| Error::Remote(e.to_string()))?;
            let v: serde_json::Value = serde_json::from_str(&text).map_err(|e| Error::Remote(e.to_string()))?;
            v.get("completion")
                .and_then(|c| c.as_str())
                .map(str::to_string)
                .ok_or_else(|| Error::Remote("response lacks a completion field".into()))
        }
    }
}

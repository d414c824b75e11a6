//! Read-only HTTP service: the link tree, descriptor suggestions and the
//! explorer's static files.

use std::collections::HashMap;
use std::path::Path;
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use axum::extract::{Query, State};
use axum::http::{header, StatusCode};
use axum::response::{Html, IntoResponse, Response};
use axum::routing::get;
use axum::{Json, Router};
use koslinker::kos::ClassificationSystem;
use koslinker::links::{suggest_descriptors, LinkTree, TreeDescriptor, DEFAULT_TOP_K};
use koslinker::model::TrainedModel;
use serde::Serialize;
use tower_http::services::{ServeDir, ServeFile};

use crate::commands::{load_classification, load_model};
use crate::config::ServeArgs;

/// Largest `k` accepted by `/api/suggest`.
pub const MAX_SUGGEST_K: usize = 100;

const PLACEHOLDER_INDEX: &str = "<!doctype html>
<html>
<head><meta charset=\"utf-8\"><title>koslinker</title></head>
<body>
<h1>koslinker</h1>
<p>No explorer assets configured. Start the service with <code>--assets DIR</code>.</p>
<ul>
<li><a href=\"/api/tree\">/api/tree</a></li>
<li><code>/api/suggest?classes=CODE,CODE&amp;k=5</code></li>
</ul>
</body>
</html>
";

struct Suggester {
    model: TrainedModel,
    classification: ClassificationSystem,
}

#[derive(Clone)]
pub struct AppState {
    /// The tree file, served byte for byte.
    tree: Arc<Vec<u8>>,
    suggester: Option<Arc<Suggester>>,
}

impl AppState {
    /// Validates the tree document; suggestions need both model and
    /// classification, with matching topic counts.
    pub fn new(
        tree: Vec<u8>,
        model: Option<TrainedModel>,
        classification: Option<ClassificationSystem>,
    ) -> Result<Self> {
        let text = std::str::from_utf8(&tree).context("tree is not UTF-8")?;
        LinkTree::from_json(text)?;
        let suggester = match (model, classification) {
            (Some(model), Some(classification)) => {
                if model.num_topics != classification.len() {
                    bail!(
                        "model has {} topics but the classification has {} classes",
                        model.num_topics,
                        classification.len()
                    );
                }
                Some(Arc::new(Suggester {
                    model,
                    classification,
                }))
            }
            (None, None) => None,
            _ => bail!("suggestions need both a model and a classification"),
        };
        Ok(AppState {
            tree: Arc::new(tree),
            suggester,
        })
    }

    pub fn load(args: &ServeArgs) -> Result<Self> {
        let tree = std::fs::read(&args.tree)
            .with_context(|| format!("cannot read {}", args.tree.display()))?;
        let model = args.model.as_deref().map(load_model).transpose()?;
        let cs = args
            .classification
            .as_deref()
            .map(|p| load_classification(p, args.max_level))
            .transpose()?;
        Self::new(tree, model, cs).with_context(|| format!("{}", args.tree.display()))
    }
}

pub fn router(state: AppState, assets: Option<&Path>) -> Router {
    let api = Router::new()
        .route("/api/tree", get(tree_handler))
        .route("/api/suggest", get(suggest_handler))
        .with_state(state);
    match assets {
        Some(dir) => {
            let files = ServeDir::new(dir)
                .append_index_html_on_directories(true)
                .fallback(ServeFile::new(dir.join("index.html")));
            api.fallback_service(files)
        }
        None => api.route("/", get(|| async { Html(PLACEHOLDER_INDEX) })),
    }
}

async fn tree_handler(State(state): State<AppState>) -> Response {
    (
        [(header::CONTENT_TYPE, "application/json")],
        state.tree.as_ref().clone(),
    )
        .into_response()
}

#[derive(Serialize)]
struct ErrorBody {
    error: String,
}

fn error(status: StatusCode, message: impl Into<String>) -> Response {
    (
        status,
        Json(ErrorBody {
            error: message.into(),
        }),
    )
        .into_response()
}

#[derive(Serialize)]
struct SuggestBody {
    descriptors: Vec<TreeDescriptor>,
}

async fn suggest_handler(
    State(state): State<AppState>,
    Query(params): Query<HashMap<String, String>>,
) -> Response {
    let Some(s) = state.suggester.as_deref() else {
        return error(
            StatusCode::NOT_FOUND,
            "suggestions are disabled; start the service with --model and --classification",
        );
    };
    let k = match params.get("k") {
        None => DEFAULT_TOP_K,
        Some(raw) => match raw.parse::<usize>() {
            Ok(k) if (1..=MAX_SUGGEST_K).contains(&k) => k,
            _ => {
                return error(
                    StatusCode::BAD_REQUEST,
                    format!("k must be an integer in 1..={MAX_SUGGEST_K}, got {raw:?}"),
                )
            }
        },
    };
    let codes: Vec<&str> = params
        .get("classes")
        .map(|c| {
            c.split(',')
                .map(str::trim)
                .filter(|c| !c.is_empty())
                .collect()
        })
        .unwrap_or_default();
    if codes.is_empty() {
        return error(
            StatusCode::BAD_REQUEST,
            "classes must list at least one class code",
        );
    }
    let mut topics = Vec::with_capacity(codes.len());
    for code in codes {
        match s.classification.topic_of(code) {
            Some(t) => topics.push(t),
            None => {
                return error(
                    StatusCode::BAD_REQUEST,
                    format!("unknown class code {code:?}"),
                )
            }
        }
    }
    match suggest_descriptors(&s.model, &topics, k) {
        Ok(ranked) => Json(SuggestBody {
            descriptors: ranked
                .into_iter()
                .map(|d| TreeDescriptor {
                    label: d.label,
                    p: d.p,
                })
                .collect(),
        })
        .into_response(),
        Err(e) => error(StatusCode::BAD_REQUEST, e.to_string()),
    }
}

pub async fn serve(args: &ServeArgs) -> Result<()> {
    let state = AppState::load(args)?;
    if let Some(dir) = &args.assets {
        if !dir.is_dir() {
            bail!("assets directory {} does not exist", dir.display());
        }
    }
    let addr = format!("{}:{}", args.address, args.port);
    let listener = bind(&addr).await?;
    let app = router(state, args.assets.as_deref());
    eprintln!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, app).await.context("server failed")
}

pub async fn bind(addr: &str) -> Result<tokio::net::TcpListener> {
    tokio::net::TcpListener::bind(addr).await.map_err(|e| {
        if e.kind() == std::io::ErrorKind::AddrInUse {
            anyhow::anyhow!("address {addr} is already in use")
        } else {
            anyhow::Error::new(e).context(format!("cannot listen on {addr}"))
        }
    })
}

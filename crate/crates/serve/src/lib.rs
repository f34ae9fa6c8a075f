//! Session service behind the interactive Smith chart. All RF evaluation
//! happens here; responses carry complete state so clients only draw.

pub mod api;
mod error;
pub mod session;

use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;
use std::time::Duration;

use axum::body::Bytes;
use axum::extract::rejection::{BytesRejection, QueryRejection};
use axum::extract::{DefaultBodyLimit, Path, Query, State};
use axum::http::{HeaderValue, StatusCode};
use axum::routing::{delete, get, post};
use axum::{Json, Router};
use serde::de::DeserializeOwned;
use tower_http::cors::{Any, CorsLayer};

use leafrf_core::discrete::{optimize_discrete, ESeries, SearchOptions, SearchReport, DEFAULT_RUNNER_UPS};
use leafrf_core::ladder::{
    find_dip, gamma_at, input_impedance, load_impedance, ComponentKind, LadderElement, LoadProfile,
    MatchingNetwork, Placement, SweepSpec,
};
use leafrf_core::rfcore::{floor_db, reflection_coefficient, s11_db, Frequency, ReferenceImpedance, ReflectionCoefficient};
use leafrf_core::synth::{network_arcs, suggest_extension, MatchSolution, SmithArc, DEFAULT_ARC_STEPS};
use leafrf_core::touchstone::parse_touchstone;
use leafrf_core::units;

pub use error::ApiError;
use api::*;
use session::{Session, Store, StoreConfig};

/// Largest accepted Touchstone upload, bytes of file text.
pub const MAX_UPLOAD: usize = 1 << 20;
/// Request bodies above this are refused before parsing (JSON escaping
/// can inflate an allowed upload).
const BODY_LIMIT: usize = 4 * MAX_UPLOAD;
const MAX_SWEEP_POINTS: usize = 100_001;
const MAX_K: usize = 10;
const MAX_TOLERANCE_SAMPLES: usize = 100_000;
/// Constant-r / constant-g check on arcs before a state is returned.
const ARC_LAW_TOL: f64 = 1e-7;

#[derive(Debug, Clone)]
pub struct ServeConfig {
    pub addr: SocketAddr,
    pub ttl: Duration,
    pub journal: Option<PathBuf>,
    /// `None` allows any origin.
    pub cors_origin: Option<String>,
    pub arc_steps: usize,
}

impl Default for ServeConfig {
    fn default() -> Self {
        ServeConfig {
            addr: SocketAddr::from(([127, 0, 0, 1], 8080)),
            ttl: session::DEFAULT_TTL,
            journal: None,
            cors_origin: None,
            arc_steps: DEFAULT_ARC_STEPS,
        }
    }
}

pub struct App {
    pub store: Store,
    arc_steps: usize,
}

impl App {
    pub fn new(store: Store) -> Self {
        App { store, arc_steps: DEFAULT_ARC_STEPS }
    }

    pub fn with_arc_steps(mut self, steps: usize) -> Self {
        self.arc_steps = steps.max(2);
        self
    }
}

type AppState = State<Arc<App>>;

pub fn router(app: Arc<App>, cors_origin: Option<&str>) -> Router {
    let cors = match cors_origin.and_then(|o| HeaderValue::from_str(o).ok()) {
        Some(origin) => CorsLayer::new().allow_origin(origin),
        None => CorsLayer::new().allow_origin(Any),
    }
    .allow_methods(Any)
    .allow_headers(Any);
    Router::new()
        .route("/health", get(|| async { "ok" }))
        .route("/sessions", post(create))
        .route("/sessions/{id}", get(read).delete(drop_session))
        .route("/sessions/{id}/elements", post(push).put(replace))
        .route("/sessions/{id}/elements/last", delete(pop))
        .route("/sessions/{id}/suggest", get(suggest))
        .route("/sessions/{id}/sweep", get(sweep))
        .route("/sessions/{id}/discretize", post(discretize))
        .fallback(|| async { ApiError::new(StatusCode::NOT_FOUND, "not_found", "no such route") })
        .layer(DefaultBodyLimit::max(BODY_LIMIT))
        .layer(cors)
        .with_state(app)
}

/// Binds and serves until the process exits. Expired sessions are swept
/// once a minute.
pub async fn serve(config: ServeConfig) -> std::io::Result<()> {
    let store = StoreConfig { ttl: config.ttl, journal: config.journal.clone() }.open()?;
    let app = Arc::new(App::new(store).with_arc_steps(config.arc_steps));
    let sweeper = app.clone();
    tokio::spawn(async move {
        let mut tick = tokio::time::interval(Duration::from_secs(60));
        loop {
            tick.tick().await;
            sweeper.store.evict_expired();
        }
    });
    let listener = tokio::net::TcpListener::bind(config.addr).await?;
    axum::serve(listener, router(app, config.cors_origin.as_deref())).await
}

fn parse_body<T: DeserializeOwned>(body: Result<Bytes, BytesRejection>) -> Result<T, ApiError> {
    let bytes = body.map_err(|r| {
        if r.status() == StatusCode::PAYLOAD_TOO_LARGE {
            ApiError::too_large(MAX_UPLOAD)
        } else {
            ApiError::bad_request(r.body_text())
        }
    })?;
    serde_json::from_slice(&bytes).map_err(|e| ApiError::bad_request(format!("malformed body: {e}")))
}

fn quantity(q: &Quantity, parse: fn(&str) -> Result<f64, units::UnitError>) -> Result<f64, ApiError> {
    match q {
        Quantity::Number(v) => Ok(*v),
        Quantity::Text(t) => Ok(parse(t)?),
    }
}

fn load_profile(spec: LoadSpec) -> Result<LoadProfile, ApiError> {
    let p = match spec {
        LoadSpec::Constant { resistance, reactance } => {
            LoadProfile::Constant(leafrf_core::rfcore::Impedance::new(resistance, reactance))
        }
        LoadSpec::Resonator { r_series, l, c } => LoadProfile::Resonator {
            r_series: quantity(&r_series, units::parse_resistance)?,
            l: quantity(&l, units::parse_inductance)?,
            c: quantity(&c, units::parse_capacitance)?,
        },
        LoadSpec::S1p { text } => {
            if text.len() > MAX_UPLOAD {
                return Err(ApiError::too_large(MAX_UPLOAD));
            }
            LoadProfile::measured(parse_touchstone(&text)?)
        }
    };
    p.validate().map_err(error::invalid_element)?;
    Ok(p)
}

fn element(body: PushElement) -> Result<LadderElement, ApiError> {
    let kind = match body.kind.to_ascii_lowercase().as_str() {
        "inductor" | "l" => ComponentKind::Inductor(quantity(&body.value, units::parse_inductance)?),
        "capacitor" | "c" => ComponentKind::Capacitor(quantity(&body.value, units::parse_capacitance)?),
        "resistor" | "r" => ComponentKind::Resistor(quantity(&body.value, units::parse_resistance)?),
        other => return Err(ApiError::bad_request(format!("unknown element kind {other:?}"))),
    };
    let e = LadderElement::new(kind, body.placement).map_err(error::invalid_element)?;
    match body.q {
        Some(q) => e.with_quality_factor(q).map_err(error::invalid_element),
        None => Ok(e),
    }
}

fn load_kind(p: &LoadProfile) -> &'static str {
    match p {
        LoadProfile::Constant(_) => "constant",
        LoadProfile::Resonator { .. } => "resonator",
        LoadProfile::Measured { .. } => "measured",
    }
}

fn normalized_r(g: ReflectionCoefficient) -> f64 {
    (1.0 - g.re * g.re - g.im * g.im) / ((1.0 - g.re).powi(2) + g.im * g.im)
}

fn normalized_g(g: ReflectionCoefficient) -> f64 {
    (1.0 - g.re * g.re - g.im * g.im) / ((1.0 + g.re).powi(2) + g.im * g.im)
}

/// Arcs must chain exactly from the load to the reported Γ, and a lossless
/// element must stay on its constant-r (series) or constant-g (shunt) circle.
pub fn check_arcs(
    arcs: &[SmithArc],
    elements: &MatchingNetwork,
    start: ReflectionCoefficient,
    end: ReflectionCoefficient,
) -> Result<(), String> {
    let mut at = start;
    for (i, (arc, e)) in arcs.iter().zip(elements.elements()).enumerate() {
        let (first, last) = match (arc.points.first(), arc.points.last()) {
            (Some(f), Some(l)) => (*f, *l),
            _ => return Err(format!("arc {i} is empty")),
        };
        if first != at {
            return Err(format!("arc {i} does not start where arc {} ended", i.wrapping_sub(1)));
        }
        let lossless = e.quality_factor().is_none() && !matches!(e.kind(), ComponentKind::Resistor(_));
        if lossless {
            let law = match e.placement() {
                Placement::Series => normalized_r,
                Placement::Shunt => normalized_g,
            };
            let base = law(first);
            if arc.points.iter().any(|p| (law(*p) - base).abs() > ARC_LAW_TOL * base.abs().max(1.0)) {
                return Err(format!("arc {i} leaves its constant-{} circle", if e.placement() == Placement::Series { "r" } else { "g" }));
            }
        }
        at = last;
    }
    if arcs.len() != elements.len() || at != end {
        return Err("arcs do not end at the reported reflection coefficient".into());
    }
    Ok(())
}

/// Full state for `s`, or an error if the stack cannot be evaluated.
pub fn evaluate(s: &Session, arc_steps: usize) -> Result<SessionState, ApiError> {
    let load = load_impedance(&s.load, s.f0).map_err(error::computation)?;
    let start_gamma = reflection_coefficient(load, s.z0).map_err(error::computation)?;
    let zin = input_impedance(&s.elements, &s.load, s.f0).map_err(error::computation)?;
    let gamma = gamma_at(&s.elements, &s.load, s.z0, s.f0).map_err(error::computation)?;
    let arcs = network_arcs(&s.elements, &s.load, s.z0, s.f0, arc_steps).map_err(error::synth)?;
    check_arcs(&arcs, &s.elements, start_gamma, gamma).map_err(ApiError::internal)?;
    let suggestions: Vec<MatchSolution> = suggest_extension(&s.elements, &s.load, s.z0, s.f0).unwrap_or_default();
    Ok(SessionState {
        id: s.id.clone(),
        z0: s.z0.ohms(),
        f0: s.f0.hertz(),
        load_kind: load_kind(&s.load).to_string(),
        load_impedance: load,
        start_gamma,
        topology_label: s.elements.topology_label(),
        elements: s.elements.clone(),
        input_impedance: zin,
        gamma,
        s11_db: floor_db(s11_db(gamma)),
        arcs,
        suggestions,
        created: s.created,
        updated: s.updated,
    })
}

fn entry(app: &App, id: &str) -> Result<Arc<session::Entry>, ApiError> {
    app.store.get(id).ok_or_else(|| ApiError::not_found(id))
}

async fn create(
    State(app): AppState,
    body: Result<Bytes, BytesRejection>,
) -> Result<(StatusCode, Json<Created>), ApiError> {
    let req: CreateSession = parse_body(body)?;
    let z0 = ReferenceImpedance::new(req.z0.unwrap_or(leafrf_core::rfcore::DEFAULT_Z0_OHMS))?;
    let f0 = Frequency::new(quantity(&req.f0, units::parse_frequency_hz)?)?;
    let load = load_profile(req.load)?;
    let s = Session::new(z0, f0, load);
    // the load must be evaluable at f0 before the session exists
    let state = evaluate(&s, app.arc_steps).map_err(|e| ApiError { status: StatusCode::BAD_REQUEST, code: "bad_request", ..e })?;
    app.store.insert(s);
    Ok((StatusCode::CREATED, Json(Created { id: state.id.clone(), state })))
}

async fn read(State(app): AppState, Path(id): Path<String>) -> Result<Json<SessionState>, ApiError> {
    let e = entry(&app, &id)?;
    let s = e.session.read().await;
    Ok(Json(evaluate(&s, app.arc_steps)?))
}

async fn drop_session(State(app): AppState, Path(id): Path<String>) -> Result<StatusCode, ApiError> {
    if app.store.remove(&id) {
        Ok(StatusCode::NO_CONTENT)
    } else {
        Err(ApiError::not_found(&id))
    }
}

/// Applies `change` to a copy of the stack and commits only if the result
/// evaluates and passes the arc checks. Holding the write lock across the
/// whole step serializes mutations per session in arrival order.
async fn mutate(
    app: &App,
    id: &str,
    change: impl FnOnce(&mut MatchingNetwork) -> Result<(), ApiError>,
) -> Result<Json<SessionState>, ApiError> {
    let e = entry(app, id)?;
    let mut s = e.session.write().await;
    let mut next = s.clone();
    change(&mut next.elements)?;
    next.touch();
    let state = evaluate(&next, app.arc_steps)?;
    *s = next;
    app.store.record(&s);
    Ok(Json(state))
}

async fn push(
    State(app): AppState,
    Path(id): Path<String>,
    body: Result<Bytes, BytesRejection>,
) -> Result<Json<SessionState>, ApiError> {
    let e = element(parse_body(body)?)?;
    mutate(&app, &id, |stack| stack.push(e).map_err(error::invalid_element)).await
}

async fn replace(
    State(app): AppState,
    Path(id): Path<String>,
    body: Result<Bytes, BytesRejection>,
) -> Result<Json<SessionState>, ApiError> {
    let n: MatchingNetwork = parse_body(body)?;
    mutate(&app, &id, |stack| {
        *stack = n;
        Ok(())
    })
    .await
}

async fn pop(State(app): AppState, Path(id): Path<String>) -> Result<Json<SessionState>, ApiError> {
    mutate(&app, &id, |stack| {
        stack.pop().map(|_| ()).ok_or_else(|| ApiError::bad_request("element stack is already empty"))
    })
    .await
}

async fn suggest(State(app): AppState, Path(id): Path<String>) -> Result<Json<Vec<MatchSolution>>, ApiError> {
    let e = entry(&app, &id)?;
    let s = e.session.read().await;
    Ok(Json(suggest_extension(&s.elements, &s.load, s.z0, s.f0).map_err(error::synth)?))
}

async fn sweep(
    State(app): AppState,
    Path(id): Path<String>,
    query: Result<Query<SweepQuery>, QueryRejection>,
) -> Result<Json<SweepResponse>, ApiError> {
    let Query(q) = query.map_err(|r| ApiError::bad_request(r.body_text()))?;
    let mut spec = SweepSpec::default();
    if let Some(f) = &q.from {
        spec.start = Frequency::new(units::parse_frequency_hz(f)?)?;
    }
    if let Some(t) = &q.to {
        spec.stop = Frequency::new(units::parse_frequency_hz(t)?)?;
    }
    if let Some(n) = q.points {
        if n > MAX_SWEEP_POINTS {
            return Err(ApiError::bad_request(format!("at most {MAX_SWEEP_POINTS} points")));
        }
        spec.points = n;
    }
    let e = entry(&app, &id)?;
    let (n, p, z0) = {
        let s = e.session.read().await;
        (s.elements.clone(), s.load.clone(), s.z0)
    };
    spec.frequencies().map_err(|e| ApiError::bad_request(e.to_string()))?;
    let result = tokio::task::spawn_blocking(move || leafrf_core::ladder::sweep_s11(&n, &p, z0, spec))
        .await
        .map_err(|e| ApiError::internal(e.to_string()))?
        .map_err(error::computation)?;
    let dip = find_dip(&result).map_err(error::computation)?;
    Ok(Json(SweepResponse { points: result.points, dip }))
}

async fn discretize(
    State(app): AppState,
    Path(id): Path<String>,
    body: Result<Bytes, BytesRejection>,
) -> Result<Json<SearchReport>, ApiError> {
    let req: Discretize = parse_body(body)?;
    let series = match &req.series {
        Some(s) => s.parse::<ESeries>().map_err(error::discrete)?,
        None => ESeries::default(),
    };
    let k = req.k.unwrap_or(2);
    if k > MAX_K {
        return Err(ApiError::bad_request(format!("k must be at most {MAX_K}")));
    }
    if req.tolerance.is_some_and(|t| t.samples > MAX_TOLERANCE_SAMPLES) {
        return Err(ApiError::bad_request(format!("at most {MAX_TOLERANCE_SAMPLES} tolerance samples")));
    }
    let opts = SearchOptions { series, k, runner_ups: req.runner_ups.unwrap_or(DEFAULT_RUNNER_UPS).min(100), tolerance: req.tolerance };
    let e = entry(&app, &id)?;
    let (n, p, z0, f0) = {
        let s = e.session.read().await;
        (s.elements.clone(), s.load.clone(), s.z0, s.f0)
    };
    if n.is_empty() {
        return Err(ApiError::unprocessable("element stack is empty; nothing to discretize"));
    }
    let report = tokio::task::spawn_blocking(move || optimize_discrete(&n, &p, z0, f0, opts))
        .await
        .map_err(|e| ApiError::internal(e.to_string()))?
        .map_err(error::discrete)?;
    Ok(Json(report))
}

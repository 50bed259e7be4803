//! Network topology, flows, interference model and simulation configuration.
//!
//! Models are immutable after [`load_model`] and safe to share read-only
//! across concurrent simulation runs.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type NodeId = usize;
pub type LinkId = usize;
pub type FlowId = usize;

/// A directed link with a constant nominal capacity (packets/slot).
///
/// In the base node-exclusive model every capacity is 1; arbitrary
/// capacities are only exercised by the general-interference variant.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Link {
    pub from: NodeId,
    pub to: NodeId,
    pub capacity: u32,
}

/// Packet arrival process at the transport layer of one flow.
#[derive(Debug, Clone, PartialEq)]
pub enum ArrivalProcess {
    /// Transport layer always has packets to send.
    Backlogged,
    /// I.i.d. Poisson arrivals per slot, truncated at `mu_m`.
    Poisson { rate: f64 },
    /// Deterministic per-slot arrival counts; repeats cyclically.
    Trace { arrivals: Vec<u32> },
}

/// One flow with its QoS parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowSpec {
    pub source: NodeId,
    pub destination: NodeId,
    /// Minimum required data rate a_c (packets/slot).
    pub min_rate: f64,
    /// Average end-to-end delay threshold rho_c (slots).
    pub delay_threshold: f64,
    pub arrival: ArrivalProcess,
}

#[derive(Debug, Clone, PartialEq)]
pub enum InterferenceKind {
    /// Each node takes part in at most one active link per slot; feasible
    /// activations are matchings of the topology.
    NodeExclusive,
    /// Explicit conflict pairs over links; feasible activations are
    /// independent sets of the conflict graph.
    ConflictGraph { conflicts: Vec<(LinkId, LinkId)> },
}

/// Per-link fading: a finite list of capacity states, drawn i.i.d. uniformly
/// each slot, independently across links.
#[derive(Debug, Clone, PartialEq)]
pub struct FadingProcess {
    /// `states[l]` is the capacity state set of link `l` (non-empty).
    pub states: Vec<Vec<u32>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InterferenceModel {
    pub kind: InterferenceKind,
    pub channel: Option<FadingProcess>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NetworkModel {
    pub node_names: Vec<String>,
    pub links: Vec<Link>,
    pub flows: Vec<FlowSpec>,
    pub interference: InterferenceModel,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    Backlogged,
    ArbitraryArrivals,
    DelayedInfo,
    GeneralInterference,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheduler {
    ExactMwm,
    Gmm,
    GreedyMwis,
}

/// Control parameters of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    /// Queue length control parameter q_M (packets).
    pub q_m: u32,
    /// Admission cap mu_M (packets/slot).
    pub mu_m: u32,
    /// Throughput control weight V.
    pub v: f64,
    /// Weight of the auxiliary Y queue (arbitrary-arrivals variant).
    pub eta: f64,
    /// Queue-information feedback delay T (slots, delayed-info variant).
    pub feedback_delay: u32,
    /// Transport-layer buffer size L_M (packets, arbitrary-arrivals variant).
    pub transport_buffer: u32,
    pub horizon: u64,
    pub seed: u64,
    pub variant: Variant,
    pub scheduler: Scheduler,
}

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("failed to read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("failed to parse {path}: {source}")]
    Parse {
        path: String,
        source: Box<toml::de::Error>,
    },
    #[error("invalid model in {path}: {message}")]
    Invalid { path: String, message: String },
    #[error("model validation failed:\n{0}")]
    Validation(String),
}

// ---------------------------------------------------------------------------
// Interference helpers
// ---------------------------------------------------------------------------

impl NetworkModel {
    pub fn n_nodes(&self) -> usize {
        self.node_names.len()
    }

    pub fn n_links(&self) -> usize {
        self.links.len()
    }

    pub fn n_flows(&self) -> usize {
        self.flows.len()
    }

    pub fn node_index(&self, name: &str) -> Option<NodeId> {
        self.node_names.iter().position(|n| n == name)
    }

    pub fn link_label(&self, l: LinkId) -> String {
        format!(
            "{}->{}",
            self.node_names[self.links[l].from], self.node_names[self.links[l].to]
        )
    }

    /// Whether two links conflict under the configured interference model.
    pub fn links_conflict(&self, a: LinkId, b: LinkId) -> bool {
        if a == b {
            return false;
        }
        match &self.interference.kind {
            InterferenceKind::NodeExclusive => {
                let (la, lb) = (&self.links[a], &self.links[b]);
                la.from == lb.from || la.from == lb.to || la.to == lb.from || la.to == lb.to
            }
            InterferenceKind::ConflictGraph { conflicts } => conflicts
                .iter()
                .any(|&(x, y)| (x, y) == (a, b) || (x, y) == (b, a)),
        }
    }

    /// Conflict adjacency over links, usable for either interference kind.
    pub fn conflict_adjacency(&self) -> Vec<Vec<LinkId>> {
        let n = self.n_links();
        let mut adj = vec![Vec::new(); n];
        for a in 0..n {
            for b in (a + 1)..n {
                if self.links_conflict(a, b) {
                    adj[a].push(b);
                    adj[b].push(a);
                }
            }
        }
        adj
    }

    /// Whether a set of links (given as a bitmask) is a feasible activation.
    pub fn activation_feasible(&self, mask: u64) -> bool {
        let n = self.n_links();
        for a in 0..n {
            if mask & (1 << a) == 0 {
                continue;
            }
            for b in (a + 1)..n {
                if mask & (1 << b) != 0 && self.links_conflict(a, b) {
                    return false;
                }
            }
        }
        true
    }

    /// All feasible activations as bitmasks. Only valid for small link sets;
    /// used by tests and the capacity oracle.
    pub fn enumerate_activations(&self) -> Vec<u64> {
        let n = self.n_links();
        assert!(n <= 24, "activation enumeration limited to 24 links");
        (0u64..(1 << n))
            .filter(|&m| self.activation_feasible(m))
            .collect()
    }

    /// Maximal feasible activations (no feasible superset), as bitmasks.
    pub fn maximal_activations(&self) -> Vec<u64> {
        let all = self.enumerate_activations();
        let n = self.n_links();
        all.iter()
            .copied()
            .filter(|&m| {
                (0..n).all(|l| m & (1 << l) != 0 || !self.activation_feasible(m | (1 << l)))
            })
            .collect()
    }

    /// An explicit conflict-graph encoding of this model's interference.
    pub fn to_conflict_graph(&self) -> InterferenceModel {
        let mut conflicts = Vec::new();
        for a in 0..self.n_links() {
            for b in (a + 1)..self.n_links() {
                if self.links_conflict(a, b) {
                    conflicts.push((a, b));
                }
            }
        }
        InterferenceModel {
            kind: InterferenceKind::ConflictGraph { conflicts },
            channel: self.interference.channel.clone(),
        }
    }

    /// Maximum capacity state of a link across the fading process (its
    /// nominal capacity when no fading is configured).
    pub fn max_capacity(&self, l: LinkId) -> u32 {
        match &self.interference.channel {
            Some(f) => f.states[l].iter().copied().max().unwrap_or(0),
            None => self.links[l].capacity,
        }
    }

    /// Worst-case inbound service rate `l_n` per node: the maximum over
    /// feasible activations (and channel states) of the total capacity
    /// entering the node.
    pub fn max_inbound(&self) -> Vec<u64> {
        let caps: Vec<u64> = (0..self.n_links())
            .map(|l| self.max_capacity(l) as u64)
            .collect();
        let mut out = vec![0u64; self.n_nodes()];
        for mask in self.enumerate_activations() {
            let mut per_node = vec![0u64; self.n_nodes()];
            for (l, link) in self.links.iter().enumerate() {
                if mask & (1 << l) != 0 {
                    per_node[link.to] += caps[l];
                }
            }
            for (n, v) in per_node.into_iter().enumerate() {
                out[n] = out[n].max(v);
            }
        }
        out
    }
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

/// Outcome of the structural checks plus, optionally, the admissibility
/// conditions on (q_M, rho_c).
#[derive(Debug, Clone)]
pub struct ValidationReport {
    pub violations: Vec<String>,
    pub condition: Option<ConditionCheck>,
}

/// Evaluation of `q_M > (2N-1+mu_M^2)/(2*eps) + mu_M` and, when an oracle
/// rate vector is available, `rho_c > N*q_M / r*_{eps,c}` per flow.
#[derive(Debug, Clone)]
pub struct ConditionCheck {
    pub epsilon: f64,
    pub q_m_bound: f64,
    pub q_m_ok: bool,
    /// Per flow: (required lower bound on rho_c, satisfied).
    pub rho: Option<Vec<(f64, bool)>>,
}

impl ConditionCheck {
    pub fn holds(&self) -> bool {
        self.q_m_ok
            && self
                .rho
                .as_ref()
                .map(|v| v.iter().all(|&(_, ok)| ok))
                .unwrap_or(false)
    }
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            writeln!(f, "model: ok")?;
        } else {
            for v in &self.violations {
                writeln!(f, "violation: {v}")?;
            }
        }
        if let Some(c) = &self.condition {
            writeln!(
                f,
                "condition q_M > (2N-1+mu_M^2)/(2*eps)+mu_M at eps={}: bound {:.4}, {}",
                c.epsilon,
                c.q_m_bound,
                if c.q_m_ok { "holds" } else { "violated" }
            )?;
            match &c.rho {
                Some(rows) => {
                    for (i, (bound, ok)) in rows.iter().enumerate() {
                        writeln!(
                            f,
                            "condition rho_{} > N*q_M/r*: bound {:.4}, {}",
                            i,
                            bound,
                            if *ok { "holds" } else { "violated" }
                        )?;
                    }
                }
                None => writeln!(f, "condition on rho_c: no oracle rate vector supplied")?,
            }
        }
        Ok(())
    }
}

/// Checks every structural invariant of the model/config pair and reports
/// violations. With `epsilon` supplied also evaluates the q_M condition;
/// with `oracle_rates` supplied evaluates the per-flow rho_c condition.
pub fn validate(
    model: &NetworkModel,
    config: &SimConfig,
    epsilon: Option<f64>,
    oracle_rates: Option<&[f64]>,
) -> ValidationReport {
    let mut violations = Vec::new();
    let n_nodes = model.n_nodes();

    for (i, link) in model.links.iter().enumerate() {
        if link.from >= n_nodes || link.to >= n_nodes {
            violations.push(format!("link {i}: endpoint out of range"));
        } else if link.from == link.to {
            violations.push(format!("link {i}: endpoints must be distinct"));
        }
    }
    {
        let mut seen = BTreeMap::new();
        for (i, link) in model.links.iter().enumerate() {
            if let Some(prev) = seen.insert((link.from, link.to), i) {
                violations.push(format!("link {i}: duplicates link {prev}"));
            }
        }
    }
    for (c, flow) in model.flows.iter().enumerate() {
        if flow.source >= n_nodes || flow.destination >= n_nodes {
            violations.push(format!("flow {c}: endpoint out of range"));
        } else if flow.source == flow.destination {
            violations.push(format!("flow {c}: source and destination must differ"));
        }
        if flow.min_rate < 0.0 {
            violations.push(format!("flow {c}: a_c >= 0 required"));
        }
        if flow.delay_threshold <= 0.0 {
            violations.push(format!("flow {c}: rho_c > 0 required"));
        }
        match &flow.arrival {
            ArrivalProcess::Poisson { rate } if *rate < 0.0 => {
                violations.push(format!("flow {c}: poisson rate >= 0 required"));
            }
            ArrivalProcess::Trace { arrivals } => {
                if arrivals.is_empty() {
                    violations.push(format!("flow {c}: arrival trace must be non-empty"));
                }
                if arrivals.iter().any(|&a| a > config.mu_m) {
                    violations.push(format!("flow {c}: trace arrivals must not exceed mu_M"));
                }
            }
            _ => {}
        }
    }
    if config.mu_m < 1 {
        violations.push("mu_M >= 1 required".into());
    }
    if config.q_m < config.mu_m {
        violations.push("q_M >= mu_M required".into());
    }
    if config.v <= 0.0 {
        violations.push("V > 0 required".into());
    }
    if config.variant == Variant::ArbitraryArrivals && config.eta <= 0.0 {
        violations.push("eta > 0 required for the arbitrary-arrivals variant".into());
    }
    if let InterferenceKind::ConflictGraph { conflicts } = &model.interference.kind {
        for &(a, b) in conflicts {
            if a >= model.n_links() || b >= model.n_links() {
                violations.push(format!("conflict pair ({a},{b}): link index out of range"));
            }
        }
    }
    if let Some(fading) = &model.interference.channel {
        if fading.states.len() != model.n_links() {
            violations.push("fading process must list states for every link".into());
        } else if fading.states.iter().any(|s| s.is_empty()) {
            violations.push("every link needs at least one fading state".into());
        }
    }

    match config.variant {
        Variant::GeneralInterference => {
            if model.n_links() <= 24 {
                let l_n = model.max_inbound();
                let max_l = l_n.iter().copied().max().unwrap_or(0);
                if (config.q_m as u64) < max_l.max(config.mu_m as u64) {
                    violations.push(format!(
                        "general interference requires q_M >= max(max_n l_n, mu_M) = {}",
                        max_l.max(config.mu_m as u64)
                    ));
                }
            }
        }
        _ => {
            // The base model assumes unit link capacities and no fading; a
            // conflict-graph encoding is fine as long as no node can receive
            // more than one packet per slot (otherwise the backlog bound
            // argument needs the l_n-adjusted weights of the general variant).
            if model.links.iter().any(|l| l.capacity != 1) {
                violations.push(
                    "non-unit link capacities require the general-interference variant".into(),
                );
            }
            if model.interference.channel.is_some() {
                violations.push("fading requires the general-interference variant".into());
            }
            if matches!(
                model.interference.kind,
                InterferenceKind::ConflictGraph { .. }
            ) && model.n_links() <= 24
                && model.max_inbound().iter().any(|&l| l > 1)
            {
                violations.push(
                    "conflict graph admits more than one inbound packet per node per slot; \
                     use the general-interference variant"
                        .into(),
                );
            }
        }
    }
    match config.scheduler {
        Scheduler::ExactMwm | Scheduler::Gmm if config.variant != Variant::GeneralInterference => {
            if !matches!(model.interference.kind, InterferenceKind::NodeExclusive) {
                violations.push(format!(
                    "{:?} scheduler requires the node-exclusive interference model",
                    config.scheduler
                ));
            }
        }
        Scheduler::Gmm if config.variant == Variant::GeneralInterference => {
            violations.push("GMM is not defined for the general-interference variant".into());
        }
        _ => {}
    }

    let condition = epsilon.map(|eps| {
        let n = n_nodes as f64;
        let mu = config.mu_m as f64;
        let q_m_bound = (2.0 * n - 1.0 + mu * mu) / (2.0 * eps) + mu;
        let q_m_ok = (config.q_m as f64) > q_m_bound;
        let rho = oracle_rates.map(|rates| {
            model
                .flows
                .iter()
                .zip(rates)
                .map(|(flow, &r)| {
                    let bound = if r > 0.0 {
                        n * config.q_m as f64 / r
                    } else {
                        f64::INFINITY
                    };
                    (bound, flow.delay_threshold > bound)
                })
                .collect()
        });
        ConditionCheck {
            epsilon: eps,
            q_m_bound,
            q_m_ok,
            rho,
        }
    });

    ValidationReport {
        violations,
        condition,
    }
}

// ---------------------------------------------------------------------------
// Config file schema
// ---------------------------------------------------------------------------

#[derive(Debug, Serialize, Deserialize)]
struct ModelFile {
    nodes: NodesSection,
    links: LinksSection,
    flows: Vec<FlowSection>,
    interference: InterferenceSection,
    control: ControlSection,
}

#[derive(Debug, Serialize, Deserialize)]
struct NodesSection {
    names: Vec<String>,
}

#[derive(Debug, Serialize, Deserialize)]
struct LinksSection {
    /// Directed links "A->B".
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    directed: Vec<String>,
    /// Undirected shorthand "A-B", expanded to both directions.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    undirected: Vec<String>,
    /// Per-link capacity overrides, keyed "A->B"; default 1.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    capacities: BTreeMap<String, u32>,
}

#[derive(Debug, Serialize, Deserialize)]
struct FlowSection {
    source: String,
    destination: String,
    min_rate: f64,
    delay_threshold: f64,
    arrival: ArrivalFile,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum ArrivalFile {
    Kind(String),
    Poisson { poisson: f64 },
    Trace { trace: Vec<u32> },
}

#[derive(Debug, Serialize, Deserialize)]
struct InterferenceSection {
    kind: String,
    /// Conflict pairs over link labels, for kind = "conflict-graph".
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    conflicts: Vec<(String, String)>,
    /// Per-link fading capacity states, keyed by link label.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    fading: BTreeMap<String, Vec<u32>>,
}

#[derive(Debug, Serialize, Deserialize)]
struct ControlSection {
    q_m: u32,
    mu_m: u32,
    v: f64,
    #[serde(default = "default_eta")]
    eta: f64,
    #[serde(default)]
    feedback_delay: u32,
    #[serde(default)]
    transport_buffer: u32,
    horizon: u64,
    #[serde(default)]
    seed: u64,
    variant: Variant,
    scheduler: Scheduler,
}

fn default_eta() -> f64 {
    1.0
}

fn parse_link_label(label: &str, sep: &str) -> Option<(String, String)> {
    let mut it = label.splitn(2, sep);
    let a = it.next()?.trim();
    let b = it.next()?.trim();
    if a.is_empty() || b.is_empty() {
        None
    } else {
        Some((a.to_string(), b.to_string()))
    }
}

fn build_model(file: ModelFile, path: &str) -> Result<(NetworkModel, SimConfig), ModelError> {
    let invalid = |message: String| ModelError::Invalid {
        path: path.to_string(),
        message,
    };

    let node_names = file.nodes.names.clone();
    let node_index = |name: &str| -> Result<NodeId, ModelError> {
        node_names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| invalid(format!("unknown node {name:?}")))
    };

    let mut links: Vec<Link> = Vec::new();
    let mut push_link = |from: NodeId, to: NodeId| {
        if !links.iter().any(|l| l.from == from && l.to == to) {
            links.push(Link {
                from,
                to,
                capacity: 1,
            });
        }
    };
    for label in &file.links.directed {
        let (a, b) = parse_link_label(label, "->")
            .ok_or_else(|| invalid(format!("bad directed link label {label:?}")))?;
        push_link(node_index(&a)?, node_index(&b)?);
    }
    for label in &file.links.undirected {
        let (a, b) = parse_link_label(label, "-")
            .ok_or_else(|| invalid(format!("bad undirected link label {label:?}")))?;
        let (a, b) = (node_index(&a)?, node_index(&b)?);
        push_link(a, b);
        push_link(b, a);
    }
    if links.is_empty() {
        return Err(invalid("no links defined".into()));
    }

    let find_link = {
        let links = links.clone();
        let node_index = &node_index;
        move |label: &str| -> Result<LinkId, ModelError> {
            let (a, b) = parse_link_label(label, "->")
                .ok_or_else(|| invalid(format!("bad link label {label:?}")))?;
            let (a, b) = (node_index(&a)?, node_index(&b)?);
            links
                .iter()
                .position(|l| l.from == a && l.to == b)
                .ok_or_else(|| invalid(format!("unknown link {label:?}")))
        }
    };
    for (label, cap) in &file.links.capacities {
        let id = find_link(label)?;
        links[id].capacity = *cap;
    }

    let mut flows = Vec::new();
    for f in &file.flows {
        let arrival = match &f.arrival {
            ArrivalFile::Kind(k) if k == "backlogged" => ArrivalProcess::Backlogged,
            ArrivalFile::Kind(k) => {
                return Err(invalid(format!("unknown arrival kind {k:?}")));
            }
            ArrivalFile::Poisson { poisson } => ArrivalProcess::Poisson { rate: *poisson },
            ArrivalFile::Trace { trace } => ArrivalProcess::Trace {
                arrivals: trace.clone(),
            },
        };
        flows.push(FlowSpec {
            source: node_index(&f.source)?,
            destination: node_index(&f.destination)?,
            min_rate: f.min_rate,
            delay_threshold: f.delay_threshold,
            arrival,
        });
    }

    let kind = match file.interference.kind.as_str() {
        "node-exclusive" => InterferenceKind::NodeExclusive,
        "conflict-graph" => {
            let mut conflicts = Vec::new();
            for (a, b) in &file.interference.conflicts {
                conflicts.push((find_link(a)?, find_link(b)?));
            }
            InterferenceKind::ConflictGraph { conflicts }
        }
        other => return Err(invalid(format!("unknown interference kind {other:?}"))),
    };
    let channel = if file.interference.fading.is_empty() {
        None
    } else {
        let mut states = vec![Vec::new(); links.len()];
        for (label, caps) in &file.interference.fading {
            states[find_link(label)?] = caps.clone();
        }
        for (l, s) in states.iter_mut().enumerate() {
            if s.is_empty() {
                // Links without listed states keep their nominal capacity.
                *s = vec![links[l].capacity];
            }
        }
        Some(FadingProcess { states })
    };

    let model = NetworkModel {
        node_names,
        links,
        flows,
        interference: InterferenceModel { kind, channel },
    };
    let c = &file.control;
    let config = SimConfig {
        q_m: c.q_m,
        mu_m: c.mu_m,
        v: c.v,
        eta: c.eta,
        feedback_delay: c.feedback_delay,
        transport_buffer: c.transport_buffer,
        horizon: c.horizon,
        seed: c.seed,
        variant: c.variant,
        scheduler: c.scheduler,
    };
    Ok((model, config))
}

fn to_file(model: &NetworkModel, config: &SimConfig) -> ModelFile {
    let label = |l: &Link| format!("{}->{}", model.node_names[l.from], model.node_names[l.to]);
    ModelFile {
        nodes: NodesSection {
            names: model.node_names.clone(),
        },
        links: LinksSection {
            directed: model.links.iter().map(label).collect(),
            undirected: Vec::new(),
            capacities: model
                .links
                .iter()
                .filter(|l| l.capacity != 1)
                .map(|l| (label(l), l.capacity))
                .collect(),
        },
        flows: model
            .flows
            .iter()
            .map(|f| FlowSection {
                source: model.node_names[f.source].clone(),
                destination: model.node_names[f.destination].clone(),
                min_rate: f.min_rate,
                delay_threshold: f.delay_threshold,
                arrival: match &f.arrival {
                    ArrivalProcess::Backlogged => ArrivalFile::Kind("backlogged".into()),
                    ArrivalProcess::Poisson { rate } => ArrivalFile::Poisson { poisson: *rate },
                    ArrivalProcess::Trace { arrivals } => ArrivalFile::Trace {
                        trace: arrivals.clone(),
                    },
                },
            })
            .collect(),
        interference: InterferenceSection {
            kind: match &model.interference.kind {
                InterferenceKind::NodeExclusive => "node-exclusive".into(),
                InterferenceKind::ConflictGraph { .. } => "conflict-graph".into(),
            },
            conflicts: match &model.interference.kind {
                InterferenceKind::NodeExclusive => Vec::new(),
                InterferenceKind::ConflictGraph { conflicts } => conflicts
                    .iter()
                    .map(|&(a, b)| (label(&model.links[a]), label(&model.links[b])))
                    .collect(),
            },
            fading: match &model.interference.channel {
                None => BTreeMap::new(),
                Some(f) => f
                    .states
                    .iter()
                    .enumerate()
                    .map(|(l, s)| (label(&model.links[l]), s.clone()))
                    .collect(),
            },
        },
        control: ControlSection {
            q_m: config.q_m,
            mu_m: config.mu_m,
            v: config.v,
            eta: config.eta,
            feedback_delay: config.feedback_delay,
            transport_buffer: config.transport_buffer,
            horizon: config.horizon,
            seed: config.seed,
            variant: config.variant,
            scheduler: config.scheduler,
        },
    }
}

/// Serializes a model/config pair back to the config file format.
pub fn serialize_model(model: &NetworkModel, config: &SimConfig) -> String {
    toml::to_string_pretty(&to_file(model, config)).expect("model serialization cannot fail")
}

/// Parses a config string (see the repository README for the schema) into a
/// validated model. Validation failures abort the load.
pub fn parse_model(text: &str, origin: &str) -> Result<(NetworkModel, SimConfig), ModelError> {
    let file: ModelFile = toml::from_str(text).map_err(|e| ModelError::Parse {
        path: origin.to_string(),
        source: Box::new(e),
    })?;
    let (model, config) = build_model(file, origin)?;
    let report = validate(&model, &config, None, None);
    if !report.is_valid() {
        return Err(ModelError::Validation(report.violations.join("\n")));
    }
    Ok((model, config))
}

/// Loads and validates a model/config file.
pub fn load_model(path: impl AsRef<Path>) -> Result<(NetworkModel, SimConfig), ModelError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| ModelError::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    parse_model(&text, &path.display().to_string())
}

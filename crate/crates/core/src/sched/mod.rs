//! Per-slot weight assignment and the scheduling solvers.
//!
//! Real-link weights are the product of the (possibly delayed) transport
//! virtual backlog and the actual back-pressure,
//! `w_mn^c = (U_s/q_M) (U_m^c - U_n^c)`; the admission pseudo-link of flow c
//! carries `(U_s/q_M) (q_M - mu_M - U_b^c)`. All weights are handled scaled
//! by q_M so they stay exact integers; scaling by a common positive factor
//! does not change any argmax.

pub mod blossom;

use thiserror::Error;

use crate::model::{NetworkModel, SimConfig, Variant};
use crate::queues::{FlowVirtualQueues, PacketQueues};

/// Per-slot weights over real links and per-flow admission pseudo-links,
/// scaled by q_M (exact integers).
#[derive(Debug, Clone)]
pub struct WeightTable {
    pub q_m: u32,
    /// Raw scaled per-flow weights, `per_flow[link][flow]`; flows barred
    /// from a link (it enters their source) carry 0.
    pub per_flow: Vec<Vec<i64>>,
    /// Per link: the argmax flow and its scaled weight, kept only when
    /// strictly positive (zero-weight links carry zero rate). Ties go to
    /// the lowest flow index.
    pub best: Vec<Option<(usize, i64)>>,
    /// Per flow: scaled weight of the admission pseudo-link (signed).
    pub admit: Vec<i64>,
}

impl WeightTable {
    /// Clipped link weight `[max_c w_mn^c]^+` in real (unscaled) units.
    pub fn weight(&self, link: usize) -> f64 {
        self.best[link].map_or(0.0, |(_, w)| w as f64 / self.q_m as f64)
    }

    /// Raw per-flow weight in real units.
    pub fn raw(&self, link: usize, flow: usize) -> f64 {
        self.per_flow[link][flow] as f64 / self.q_m as f64
    }

    /// Admission-link weight in real units.
    pub fn admit_weight(&self, flow: usize) -> f64 {
        self.admit[flow] as f64 / self.q_m as f64
    }
}

/// One slot's rate assignment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScheduleDecision {
    /// Per real link: the served flow and its rate, or `None`.
    pub real: Vec<Option<(usize, u32)>>,
    /// Per flow: admitted rate on the (s(c), b(c)) pseudo-link.
    pub admit: Vec<u32>,
}

impl ScheduleDecision {
    /// Scheduled real-link objective, in scaled weight units.
    pub fn objective(&self, wt: &WeightTable) -> i64 {
        self.real
            .iter()
            .enumerate()
            .filter_map(|(l, e)| e.map(|(_, rate)| rate as i64 * wt.best[l].map_or(0, |(_, w)| w)))
            .sum()
    }
}

#[derive(Debug, Error)]
pub enum SchedError {
    #[error(
        "exact activation enumeration supports at most 20 links ({0} present); \
         use the greedy-mwis scheduler instead"
    )]
    TooLargeForExact(usize),
}

fn scaled(u_s: f64) -> i64 {
    // Virtual backlogs are integer-valued under every shipped controller
    // (R, admissions and arrivals are integers); rounding guards against
    // representation noise only.
    u_s.round() as i64
}

/// Computes the weight table for the configured variant. `max_inbound`
/// supplies the per-node l_n constants and is required exactly for the
/// general-interference variant.
pub fn assign_weights(
    queues: &PacketQueues,
    vq: &[FlowVirtualQueues],
    model: &NetworkModel,
    cfg: &SimConfig,
    max_inbound: Option<&[u64]>,
) -> WeightTable {
    debug_assert_eq!(
        max_inbound.is_some(),
        cfg.variant == Variant::GeneralInterference
    );
    let n_flows = model.n_flows();
    let mut per_flow = vec![vec![0i64; n_flows]; model.n_links()];
    let mut best = vec![None; model.n_links()];
    for (l, link) in model.links.iter().enumerate() {
        let penalty = max_inbound.map_or(0, |l_n| l_n[link.to] as i64);
        let mut top: Option<(usize, i64)> = None;
        for (c, flow) in model.flows.iter().enumerate() {
            if link.to == flow.source {
                continue; // no looping back to the source
            }
            let u_front = match cfg.variant {
                Variant::DelayedInfo => scaled(vq[c].delayed(cfg.feedback_delay).0),
                _ => scaled(vq[c].u_s),
            };
            let diff =
                queues.backlog(link.from, c) as i64 - queues.backlog(link.to, c) as i64 - penalty;
            let w = u_front * diff;
            per_flow[l][c] = w;
            if w > top.map_or(0, |(_, tw)| tw) {
                top = Some((c, w));
            }
        }
        best[l] = top;
    }
    let admit = model
        .flows
        .iter()
        .enumerate()
        .map(|(c, flow)| {
            let headroom = cfg.q_m as i64 - cfg.mu_m as i64 - queues.backlog(flow.source, c) as i64;
            scaled(vq[c].u_s) * headroom
        })
        .collect();
    WeightTable {
        q_m: cfg.q_m,
        per_flow,
        best,
        admit,
    }
}

/// Classic back-pressure weights `w_mn = [max_c (U_m^c - U_n^c)]^+` for the
/// BP baseline (same source-protection rule, no virtual-queue factor).
pub fn assign_weights_bp(queues: &PacketQueues, model: &NetworkModel, q_m: u32) -> WeightTable {
    let n_flows = model.n_flows();
    let mut per_flow = vec![vec![0i64; n_flows]; model.n_links()];
    let mut best = vec![None; model.n_links()];
    for (l, link) in model.links.iter().enumerate() {
        let mut top: Option<(usize, i64)> = None;
        for (c, flow) in model.flows.iter().enumerate() {
            if link.to == flow.source {
                continue;
            }
            let w = queues.backlog(link.from, c) as i64 - queues.backlog(link.to, c) as i64;
            per_flow[l][c] = w;
            if w > top.map_or(0, |(_, tw)| tw) {
                top = Some((c, w));
            }
        }
        best[l] = top;
    }
    WeightTable {
        q_m,
        per_flow,
        best,
        admit: vec![0; n_flows],
    }
}

fn admissions(wt: &WeightTable, admit_caps: &[u32]) -> Vec<u32> {
    // Admission pseudo-links do not contend with real links; each is taken
    // at its cap exactly when its weight is strictly positive.
    wt.admit
        .iter()
        .zip(admit_caps)
        .map(|(&w, &cap)| if w > 0 { cap } else { 0 })
        .collect()
}

/// Exact maximum-weight-matching schedule under node-exclusive interference
/// (unit link capacities). The returned real-link weight equals the true
/// maximum over all matchings.
pub fn solve_exact_mwm(
    wt: &WeightTable,
    model: &NetworkModel,
    admit_caps: &[u32],
) -> ScheduleDecision {
    // Collapse parallel directed links between the same node pair: at most
    // one can be matched, so keep the heavier (ties: lower link id).
    let mut by_pair: Vec<(usize, usize, usize, i64)> = Vec::new(); // (u, v, link, w)
    for (l, link) in model.links.iter().enumerate() {
        let Some((_, w)) = wt.best[l] else { continue };
        let (u, v) = (link.from.min(link.to), link.from.max(link.to));
        match by_pair.iter_mut().find(|e| e.0 == u && e.1 == v) {
            Some(e) if w > e.3 => {
                e.2 = l;
                e.3 = w;
            }
            Some(_) => {}
            None => by_pair.push((u, v, l, w)),
        }
    }
    let edges: Vec<(usize, usize, i64)> = by_pair.iter().map(|&(u, v, _, w)| (u, v, w)).collect();
    let mate = blossom::max_weight_matching(model.n_nodes(), &edges);
    let mut real = vec![None; model.n_links()];
    for &(u, v, l, _) in &by_pair {
        if mate[u] == Some(v) {
            let (c, _) = wt.best[l].unwrap();
            real[l] = Some((c, model.links[l].capacity));
        }
    }
    ScheduleDecision {
        real,
        admit: admissions(wt, admit_caps),
    }
}

/// Greedy maximal matching: repeatedly pick the heaviest remaining feasible
/// link (ties: lowest link id). Achieves at least half the exact objective.
pub fn solve_gmm(wt: &WeightTable, model: &NetworkModel, admit_caps: &[u32]) -> ScheduleDecision {
    let mut order: Vec<(usize, i64)> = wt
        .best
        .iter()
        .enumerate()
        .filter_map(|(l, e)| e.map(|(_, w)| (l, w)))
        .collect();
    order.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    let mut used = vec![false; model.n_nodes()];
    let mut real = vec![None; model.n_links()];
    for (l, _) in order {
        let link = &model.links[l];
        if !used[link.from] && !used[link.to] {
            used[link.from] = true;
            used[link.to] = true;
            let (c, _) = wt.best[l].unwrap();
            real[l] = Some((c, model.links[l].capacity));
        }
    }
    ScheduleDecision {
        real,
        admit: admissions(wt, admit_caps),
    }
}

/// GWMIN greedy on the conflict graph: repeatedly select the remaining link
/// maximizing value/(degree+1) (exact rational comparison, ties to the
/// lowest link id) and delete its closed neighborhood. Guarantees a `1/Δ`
/// fraction of the exact optimum.
pub fn solve_greedy_mwis(
    wt: &WeightTable,
    model: &NetworkModel,
    admit_caps: &[u32],
    caps: &[u32],
) -> ScheduleDecision {
    let adj = model.conflict_adjacency();
    let mut alive: Vec<bool> = (0..model.n_links())
        .map(|l| wt.best[l].is_some() && caps[l] > 0)
        .collect();
    let value = |l: usize| -> i64 { wt.best[l].map_or(0, |(_, w)| w) * caps[l] as i64 };
    let mut real = vec![None; model.n_links()];
    loop {
        let mut pick: Option<(usize, i64, usize)> = None; // (link, value, deg+1)
        for l in 0..model.n_links() {
            if !alive[l] {
                continue;
            }
            let deg = adj[l].iter().filter(|&&m| alive[m]).count() + 1;
            let v = value(l);
            let better = match pick {
                None => true,
                // v/deg > pv/pdeg  <=>  v*pdeg > pv*deg (all nonnegative)
                Some((_, pv, pdeg)) => (v as i128) * (pdeg as i128) > (pv as i128) * (deg as i128),
            };
            if better {
                pick = Some((l, v, deg));
            }
        }
        let Some((l, _, _)) = pick else { break };
        let (c, _) = wt.best[l].unwrap();
        real[l] = Some((c, caps[l]));
        alive[l] = false;
        for &m in &adj[l] {
            alive[m] = false;
        }
    }
    ScheduleDecision {
        real,
        admit: admissions(wt, admit_caps),
    }
}

/// General-interference schedule: maximizes the capacity-weighted objective
/// over feasible activations. Exact mode enumerates activations (gated to 20
/// links); otherwise callers should use [`solve_greedy_mwis`].
pub fn solve_general(
    wt: &WeightTable,
    model: &NetworkModel,
    admit_caps: &[u32],
    caps: &[u32],
) -> Result<ScheduleDecision, SchedError> {
    if model.n_links() > 20 {
        return Err(SchedError::TooLargeForExact(model.n_links()));
    }
    let cand: Vec<usize> = (0..model.n_links())
        .filter(|&l| wt.best[l].is_some() && caps[l] > 0)
        .collect();
    let m = cand.len();
    // Conflict bitmasks over candidate indices.
    let conf: Vec<u64> = cand
        .iter()
        .map(|&a| {
            cand.iter()
                .enumerate()
                .filter(|&(_, &b)| model.links_conflict(a, b))
                .fold(0u64, |acc, (j, _)| acc | (1 << j))
        })
        .collect();
    let values: Vec<i64> = cand
        .iter()
        .map(|&l| wt.best[l].map_or(0, |(_, w)| w) * caps[l] as i64)
        .collect();
    // DP over subsets: feasibility and value build from the lowest set bit;
    // ties keep the first (lowest-mask) maximizer.
    let mut best_mask = 0u64;
    let mut best_val = 0i64;
    let mut feasible = vec![true; 1usize << m];
    let mut val = vec![0i64; 1usize << m];
    for mask in 1u64..(1 << m) {
        let low = mask.trailing_zeros() as usize;
        let rest = mask & (mask - 1);
        let ok = feasible[rest as usize] && conf[low] & rest == 0;
        feasible[mask as usize] = ok;
        if ok {
            let v = val[rest as usize] + values[low];
            val[mask as usize] = v;
            if v > best_val {
                best_val = v;
                best_mask = mask;
            }
        }
    }
    let mut real = vec![None; model.n_links()];
    for (j, &l) in cand.iter().enumerate() {
        if best_mask & (1 << j) != 0 {
            let (c, _) = wt.best[l].unwrap();
            real[l] = Some((c, caps[l]));
        }
    }
    Ok(ScheduleDecision {
        real,
        admit: admissions(wt, admit_caps),
    })
}

/// Independent feasibility check applied to every decision before the queue
/// update: interference constraints, capacity bounds and source protection.
pub fn check_decision(
    decision: &ScheduleDecision,
    model: &NetworkModel,
    caps: &[u32],
    admit_caps: &[u32],
) -> Result<(), String> {
    let active: Vec<usize> = decision
        .real
        .iter()
        .enumerate()
        .filter_map(|(l, e)| e.map(|_| l))
        .collect();
    for &l in &active {
        let (flow, rate) = decision.real[l].unwrap();
        if flow >= model.n_flows() {
            return Err(format!("link {l}: unknown flow {flow}"));
        }
        if rate == 0 || rate > caps[l] {
            return Err(format!("link {l}: rate {rate} outside (0, {}]", caps[l]));
        }
        if model.links[l].to == model.flows[flow].source {
            return Err(format!("link {l}: routes flow {flow} into its source"));
        }
    }
    for (i, &a) in active.iter().enumerate() {
        for &b in &active[i + 1..] {
            if model.links_conflict(a, b) {
                return Err(format!("links {a} and {b} conflict"));
            }
        }
    }
    for (c, (&adm, &cap)) in decision.admit.iter().zip(admit_caps).enumerate() {
        if adm > cap {
            return Err(format!("flow {c}: admission {adm} exceeds cap {cap}"));
        }
    }
    Ok(())
}

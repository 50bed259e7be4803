//! Per-slot queue state: packet-level actual queues and the scalar virtual
//! queues, with the update equations applied exactly once per slot.
//!
//! Within a slot, departures are computed against pre-slot backlogs and
//! arrivals are appended afterwards, matching the `[U - out]^+ + in` shape
//! of the queue dynamics.

use std::collections::VecDeque;

use thiserror::Error;

use crate::model::{FlowSpec, NetworkModel, SimConfig, Variant};
use crate::sched::ScheduleDecision;

/// Packet queues per (node, flow). Packets carry only their admission slot;
/// FIFO order per queue makes per-packet delay well defined.
#[derive(Debug, Clone)]
pub struct PacketQueues {
    n_nodes: usize,
    n_flows: usize,
    /// Backlog bound q_M, or `None` for infinite buffers (BP baseline).
    cap: Option<u32>,
    queues: Vec<VecDeque<u64>>,
    flow_totals: Vec<u64>,
    max_seen: u32,
}

/// Packets delivered to their destinations in one slot.
#[derive(Debug, Clone, Default)]
pub struct Delivered {
    pub count: Vec<u64>,
    pub delay_sum: Vec<u128>,
}

#[derive(Debug, Error)]
#[error(
    "backlog bound breached at slot {slot}: U[node {node}][flow {flow}] = {backlog} > q_M = {cap}"
)]
pub struct BacklogBreach {
    pub slot: u64,
    pub node: usize,
    pub flow: usize,
    pub backlog: u32,
    pub cap: u32,
}

impl PacketQueues {
    pub fn new(n_nodes: usize, n_flows: usize, cap: Option<u32>) -> Self {
        PacketQueues {
            n_nodes,
            n_flows,
            cap,
            queues: vec![VecDeque::new(); n_nodes * n_flows],
            flow_totals: vec![0; n_flows],
            max_seen: 0,
        }
    }

    #[inline]
    fn idx(&self, node: usize, flow: usize) -> usize {
        node * self.n_flows + flow
    }

    /// U_n^c: current backlog of flow `flow` at node `node`.
    pub fn backlog(&self, node: usize, flow: usize) -> u32 {
        self.queues[self.idx(node, flow)].len() as u32
    }

    /// Sum over nodes of U_n^c for one flow.
    pub fn flow_total(&self, flow: usize) -> u64 {
        self.flow_totals[flow]
    }

    pub fn total(&self) -> u64 {
        self.flow_totals.iter().sum()
    }

    /// Largest backlog observed in any queue at any slot boundary so far.
    pub fn max_seen(&self) -> u32 {
        self.max_seen
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    /// Applies one slot of transfers: scheduled departures drawn from
    /// pre-slot backlogs, then admissions of newly stamped packets, then
    /// deposits at downstream nodes. Packets reaching their destination are
    /// absorbed and returned with delay = `slot - admit_slot + 1`.
    pub fn step(
        &mut self,
        model: &NetworkModel,
        decision: &ScheduleDecision,
        slot: u64,
    ) -> Result<Delivered, BacklogBreach> {
        let mut delivered = Delivered {
            count: vec![0; self.n_flows],
            delay_sum: vec![0; self.n_flows],
        };

        // Departures, in link-index order; each queue may feed several links
        // under general interference, later links see the drained backlog.
        let mut in_flight: Vec<(usize, usize, u64)> = Vec::new();
        for (l, entry) in decision.real.iter().enumerate() {
            let &Some((flow, rate)) = entry else { continue };
            let link = &model.links[l];
            debug_assert!(
                link.to != model.flows[flow].source,
                "decision routes flow {flow} into its source"
            );
            let qi = self.idx(link.from, flow);
            let take = (rate as usize).min(self.queues[qi].len());
            for _ in 0..take {
                let admit = self.queues[qi].pop_front().expect("backlog accounted");
                in_flight.push((link.to, flow, admit));
            }
            self.flow_totals[flow] -= take as u64;
        }

        // Admissions create packets stamped with the current slot (moved
        // from the transport layer; its scalar accounting lives in the
        // virtual queue update).
        for (flow, &rate) in decision.admit.iter().enumerate() {
            let src = model.flows[flow].source;
            let qi = self.idx(src, flow);
            for _ in 0..rate {
                self.queues[qi].push_back(slot);
            }
            self.flow_totals[flow] += rate as u64;
        }

        // Deposits; destination absorbs.
        for (node, flow, admit) in in_flight {
            if node == model.flows[flow].destination {
                delivered.count[flow] += 1;
                delivered.delay_sum[flow] += (slot - admit + 1) as u128;
            } else {
                let qi = self.idx(node, flow);
                self.queues[qi].push_back(admit);
                self.flow_totals[flow] += 1;
            }
        }

        // Deterministic worst-case backlog bound, asserted online.
        let mut max_now = 0u32;
        for q in &self.queues {
            max_now = max_now.max(q.len() as u32);
        }
        self.max_seen = self.max_seen.max(max_now);
        if let Some(cap) = self.cap {
            if max_now > cap {
                let (node, flow) = self
                    .queues
                    .iter()
                    .enumerate()
                    .find(|(_, q)| q.len() as u32 == max_now)
                    .map(|(i, _)| (i / self.n_flows, i % self.n_flows))
                    .unwrap();
                return Err(BacklogBreach {
                    slot,
                    node,
                    flow,
                    backlog: max_now,
                    cap,
                });
            }
        }
        Ok(delivered)
    }

    /// Formatted snapshot for diagnostics.
    pub fn snapshot(&self, model: &NetworkModel) -> String {
        let mut out = String::new();
        for n in 0..self.n_nodes {
            for c in 0..self.n_flows {
                let b = self.backlog(n, c);
                if b > 0 {
                    out.push_str(&format!("U[{}][flow {}] = {}\n", model.node_names[n], c, b));
                }
            }
        }
        out
    }
}

/// Scalar virtual queues of one flow, plus the (U_s, X) history ring used by
/// the delayed-information variant.
#[derive(Debug, Clone)]
pub struct FlowVirtualQueues {
    /// Transport-layer virtual backlog U_{s(c)}^c.
    pub u_s: f64,
    /// Virtual service queue Z_c (minimum-rate constraint).
    pub z: f64,
    /// Virtual delay queue X_c.
    pub x: f64,
    /// Auxiliary queue Y_c (arbitrary-arrivals variant).
    pub y: f64,
    /// Transport-layer data backlog L_c (arbitrary-arrivals variant).
    pub l: f64,
    history: VecDeque<(f64, f64)>,
}

/// Per-slot inputs to the virtual queue update of one flow.
#[derive(Debug, Clone, Copy)]
pub struct VirtualStepInputs {
    /// Virtual input rate R_c(t) chosen by the congestion controller.
    pub r: u32,
    /// Auxiliary rate v_c(t) (arbitrary-arrivals variant, else 0).
    pub v: u32,
    /// Admitted rate mu_{s(c)b(c)}(t) from the schedule.
    pub admitted: u32,
    /// Transport arrivals A_c(t) (arbitrary-arrivals variant, else 0).
    pub arrivals: u32,
    /// Slot-start total backlog of this flow, sum over nodes of U_n^c(t).
    pub slot_start_backlog: u64,
}

impl FlowVirtualQueues {
    pub fn new() -> Self {
        FlowVirtualQueues {
            u_s: 0.0,
            z: 0.0,
            x: 0.0,
            y: 0.0,
            l: 0.0,
            history: VecDeque::from([(0.0, 0.0)]),
        }
    }

    /// (U_s, X) as seen T slots ago; zeros before the history starts.
    pub fn delayed(&self, t_delay: u32) -> (f64, f64) {
        let depth = t_delay as usize + 1;
        if self.history.len() >= depth {
            self.history[self.history.len() - depth]
        } else {
            (0.0, 0.0)
        }
    }

    /// Applies the per-slot updates:
    /// `u_s <- [u_s - admitted]^+ + R`, `z <- [z - R]^+ + a_c`,
    /// `x <- [x - rho_c R]^+ + sum_n U_n^c(t)`, and for the
    /// arbitrary-arrivals variant `y <- [y - R]^+ + v` and
    /// `l <- min([l + A - admitted]^+, L_M)`.
    pub fn step(&mut self, inputs: VirtualStepInputs, flow: &FlowSpec, cfg: &SimConfig) {
        debug_assert!(inputs.r <= cfg.mu_m && inputs.v <= cfg.mu_m);
        let r = inputs.r as f64;
        self.u_s = pos(self.u_s - inputs.admitted as f64) + r;
        self.z = pos(self.z - r) + flow.min_rate;
        self.x = pos(self.x - flow.delay_threshold * r) + inputs.slot_start_backlog as f64;
        if cfg.variant == Variant::ArbitraryArrivals {
            self.y = pos(self.y - r) + inputs.v as f64;
            self.l = pos(self.l + inputs.arrivals as f64 - inputs.admitted as f64)
                .min(cfg.transport_buffer as f64);
        }
        debug_assert!(
            self.u_s >= 0.0 && self.z >= 0.0 && self.x >= 0.0 && self.y >= 0.0 && self.l >= 0.0
        );
        self.history.push_back((self.u_s, self.x));
        while self.history.len() > cfg.feedback_delay as usize + 1 {
            self.history.pop_front();
        }
    }

    /// Sum of the stabilized virtual backlogs U_s + X + Z (+ Y under the
    /// arbitrary-arrivals variant).
    pub fn stability_sum(&self, variant: Variant) -> f64 {
        let base = self.u_s + self.x + self.z;
        if variant == Variant::ArbitraryArrivals {
            base + self.y
        } else {
            base
        }
    }
}

impl Default for FlowVirtualQueues {
    fn default() -> Self {
        Self::new()
    }
}

#[inline]
fn pos(v: f64) -> f64 {
    v.max(0.0)
}

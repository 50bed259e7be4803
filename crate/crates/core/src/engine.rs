//! Per-slot simulation loop: arrivals, congestion control, weight
//! assignment, scheduling, queue updates and metric accumulation.
//!
//! Runs are deterministic: one seeded stream per run, drawn in fixed stage
//! order (per-flow arrivals, then per-link fading states). Two runs with
//! identical (model, config, seed) produce bit-identical reports.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use thiserror::Error;

use crate::control::{control_arbitrary, control_backlogged, control_delayed, ControlDecision};
use crate::metrics::{stability_sum, MetricsAccumulator, MetricsReport, SlotRecord};
use crate::model::{ArrivalProcess, NetworkModel, Scheduler, SimConfig, Variant};
use crate::queues::{FlowVirtualQueues, PacketQueues, VirtualStepInputs};
use crate::sched::{
    assign_weights, assign_weights_bp, check_decision, solve_exact_mwm, solve_general, solve_gmm,
    solve_greedy_mwis,
};

/// The algorithm driving a run: the cross-layer controller in one of its
/// variants, or the back-pressure comparator with a linear-utility
/// congestion controller and infinite buffers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algorithm {
    Alg(Variant),
    BpBaseline,
}

impl Algorithm {
    pub fn label(&self) -> String {
        match self {
            Algorithm::Alg(Variant::Backlogged) => "alg".into(),
            Algorithm::Alg(Variant::ArbitraryArrivals) => "alg-arb".into(),
            Algorithm::Alg(Variant::DelayedInfo) => "alg-delayed".into(),
            Algorithm::Alg(Variant::GeneralInterference) => "alg-general".into(),
            Algorithm::BpBaseline => "bp".into(),
        }
    }
}

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("validation failed:\n{0}")]
    Validation(String),
    #[error("invariant breach at slot {slot}: {message}\n{snapshot}")]
    InvariantBreach {
        slot: u64,
        message: String,
        snapshot: String,
    },
    #[error("scheduling failed: {0}")]
    Sched(#[from] crate::sched::SchedError),
}

#[derive(Debug, Clone, Copy, Default)]
pub struct RunOptions {
    /// Keep per-slot state records (needed for `--trace` and equality
    /// checks between runs).
    pub record_slots: bool,
}

/// Runs `algorithm` on the model for `horizon` slots (overriding the
/// config's horizon) and returns the metrics report.
pub fn run(
    model: &NetworkModel,
    config: &SimConfig,
    algorithm: Algorithm,
    horizon: u64,
) -> Result<MetricsReport, EngineError> {
    run_with_options(model, config, algorithm, horizon, RunOptions::default())
}

/// The throughput-optimal back-pressure comparator: admit mu_M packets iff
/// U_b(c) <= V, schedule by exact MWM over classic back-pressure weights,
/// infinite buffers.
pub fn run_bp_baseline(
    model: &NetworkModel,
    config: &SimConfig,
    horizon: u64,
) -> Result<MetricsReport, EngineError> {
    run(model, config, Algorithm::BpBaseline, horizon)
}

pub fn run_with_options(
    model: &NetworkModel,
    config: &SimConfig,
    algorithm: Algorithm,
    horizon: u64,
    options: RunOptions,
) -> Result<MetricsReport, EngineError> {
    let mut config = config.clone();
    config.horizon = horizon;
    if let Algorithm::Alg(variant) = algorithm {
        config.variant = variant;
    }
    // The comparator ignores the queue cap and admits on a bare threshold
    // (V = 0 is a legitimate degenerate setting for it), so its runs are
    // validated against a sanitized config: only structural model
    // invariants can reject a BP run.
    let checked = if algorithm == Algorithm::BpBaseline {
        let mut sanitized = config.clone();
        sanitized.mu_m = sanitized.mu_m.max(1);
        sanitized.q_m = sanitized.q_m.max(sanitized.mu_m);
        sanitized.v = 1.0;
        sanitized.variant = Variant::Backlogged;
        sanitized.scheduler = Scheduler::ExactMwm;
        crate::model::validate(model, &sanitized, None, None)
    } else {
        crate::model::validate(model, &config, None, None)
    };
    if !checked.is_valid() {
        return Err(EngineError::Validation(checked.violations.join("\n")));
    }
    Simulation::new(model, config, algorithm, options)?.run()
}

struct Simulation<'m> {
    model: &'m NetworkModel,
    config: SimConfig,
    algorithm: Algorithm,
    queues: PacketQueues,
    vq: Vec<FlowVirtualQueues>,
    rng: ChaCha8Rng,
    poisson: Vec<Option<Poisson<f64>>>,
    /// Per-node worst-case inbound rate l_n (general variant).
    max_inbound: Option<Vec<u64>>,
    /// Static per-link capacities, replaced per slot under fading.
    static_caps: Vec<u32>,
    accum: MetricsAccumulator,
    admitted_cum: u64,
    delivered_cum: u64,
}

impl<'m> Simulation<'m> {
    fn new(
        model: &'m NetworkModel,
        config: SimConfig,
        algorithm: Algorithm,
        options: RunOptions,
    ) -> Result<Self, EngineError> {
        let cap = match algorithm {
            Algorithm::BpBaseline => None,
            Algorithm::Alg(_) => Some(config.q_m),
        };
        let is_alg = algorithm != Algorithm::BpBaseline;
        let poisson = model
            .flows
            .iter()
            .map(|f| match &f.arrival {
                ArrivalProcess::Poisson { rate } if *rate > 0.0 => {
                    Some(Poisson::new(*rate).expect("positive rate"))
                }
                _ => None,
            })
            .collect();
        let max_inbound =
            (config.variant == Variant::GeneralInterference && is_alg).then(|| model.max_inbound());
        Ok(Simulation {
            queues: PacketQueues::new(model.n_nodes(), model.n_flows(), cap),
            vq: vec![FlowVirtualQueues::new(); model.n_flows()],
            rng: ChaCha8Rng::seed_from_u64(config.seed),
            poisson,
            max_inbound,
            static_caps: model.links.iter().map(|l| l.capacity).collect(),
            accum: MetricsAccumulator::new(
                config.horizon,
                model.n_flows(),
                options.record_slots,
                is_alg,
            ),
            model,
            config,
            algorithm,
            admitted_cum: 0,
            delivered_cum: 0,
        })
    }

    fn draw_arrivals(&mut self, slot: u64) -> Vec<u32> {
        let mu_m = self.config.mu_m;
        let mut out = Vec::with_capacity(self.model.n_flows());
        for (c, flow) in self.model.flows.iter().enumerate() {
            let a = match &flow.arrival {
                ArrivalProcess::Backlogged => mu_m,
                ArrivalProcess::Poisson { .. } => match &self.poisson[c] {
                    Some(p) => (p.sample(&mut self.rng) as u64).min(mu_m as u64) as u32,
                    None => 0,
                },
                ArrivalProcess::Trace { arrivals } => {
                    arrivals[(slot % arrivals.len() as u64) as usize].min(mu_m)
                }
            };
            out.push(a);
        }
        out
    }

    fn draw_caps(&mut self) -> Vec<u32> {
        match &self.model.interference.channel {
            None => self.static_caps.clone(),
            Some(fading) => fading
                .states
                .iter()
                .map(|states| states[self.rng.gen_range(0..states.len())])
                .collect(),
        }
    }

    /// L(Q(t)) from the slot-start state.
    fn lyapunov(&self) -> f64 {
        let q = self.config.q_m as f64;
        let mu = self.config.mu_m as f64;
        let mut total = 0.0;
        for (c, vq) in self.vq.iter().enumerate() {
            total += (q - mu) / q * vq.u_s * vq.u_s + vq.x * vq.x + vq.z * vq.z;
            let mut u2 = 0.0;
            for n in 0..self.model.n_nodes() {
                let u = self.queues.backlog(n, c) as f64;
                u2 += u * u;
            }
            total += u2 * vq.u_s / q;
        }
        let mut l = 0.5 * total;
        if self.config.variant == Variant::ArbitraryArrivals {
            l += 0.5 * self.config.eta * self.vq.iter().map(|v| v.y * v.y).sum::<f64>();
        }
        l
    }

    fn breach(&self, slot: u64, message: String) -> EngineError {
        let mut snapshot = self.queues.snapshot(self.model);
        for (c, vq) in self.vq.iter().enumerate() {
            snapshot.push_str(&format!(
                "vq[{c}]: u_s={} z={} x={} y={} l={}\n",
                vq.u_s, vq.z, vq.x, vq.y, vq.l
            ));
        }
        EngineError::InvariantBreach {
            slot,
            message,
            snapshot,
        }
    }

    fn run(mut self) -> Result<MetricsReport, EngineError> {
        let horizon = self.config.horizon;
        for slot in 0..horizon {
            self.step(slot)?;
        }
        let residual =
            self.admitted_cum as i64 - self.delivered_cum as i64 - self.queues.total() as i64;
        let max_backlog = self.queues.max_seen();
        Ok(self.accum.finish(
            self.model,
            self.algorithm.label(),
            self.config.seed,
            max_backlog,
            residual,
        ))
    }

    fn step(&mut self, slot: u64) -> Result<(), EngineError> {
        let model = self.model;
        let is_alg = self.algorithm != Algorithm::BpBaseline;

        // (1) transport arrivals, then per-slot channel states; fixed order
        // keeps runs reproducible.
        let arrivals = if self.config.variant == Variant::ArbitraryArrivals && is_alg {
            self.draw_arrivals(slot)
        } else {
            vec![0; model.n_flows()]
        };
        let caps = if self.config.variant == Variant::GeneralInterference && is_alg {
            self.draw_caps()
        } else {
            self.static_caps.clone()
        };
        let cfg = &self.config;

        // (2) congestion control.
        let ctrl = if is_alg {
            match cfg.variant {
                Variant::Backlogged | Variant::GeneralInterference => {
                    control_backlogged(&self.vq, model, cfg)
                }
                Variant::ArbitraryArrivals => control_arbitrary(&self.vq, &arrivals, model, cfg),
                Variant::DelayedInfo => control_delayed(&self.vq, model, cfg),
            }
        } else {
            ControlDecision {
                r: vec![0; model.n_flows()],
                v: vec![0; model.n_flows()],
            }
        };

        // Admission caps: mu_M, tightened to the transport backlog under
        // arbitrary arrivals.
        let admit_caps: Vec<u32> = if cfg.variant == Variant::ArbitraryArrivals && is_alg {
            self.vq
                .iter()
                .zip(&arrivals)
                .map(|(q, &a)| (q.l as u64 + a as u64).min(cfg.mu_m as u64) as u32)
                .collect()
        } else {
            vec![cfg.mu_m; model.n_flows()]
        };

        // (3) + (4) weights and the scheduling solve.
        let decision = if is_alg {
            let wt = assign_weights(
                &self.queues,
                &self.vq,
                model,
                cfg,
                self.max_inbound.as_deref(),
            );
            match cfg.variant {
                Variant::GeneralInterference => match cfg.scheduler {
                    Scheduler::ExactMwm => solve_general(&wt, model, &admit_caps, &caps)?,
                    _ => solve_greedy_mwis(&wt, model, &admit_caps, &caps),
                },
                _ => match cfg.scheduler {
                    Scheduler::ExactMwm => solve_exact_mwm(&wt, model, &admit_caps),
                    Scheduler::Gmm => solve_gmm(&wt, model, &admit_caps),
                    Scheduler::GreedyMwis => solve_greedy_mwis(&wt, model, &admit_caps, &caps),
                },
            }
        } else {
            // BP baseline: classic weights, exact MWM, threshold admission.
            let wt = assign_weights_bp(&self.queues, model, cfg.q_m);
            let mut d = solve_exact_mwm(&wt, model, &admit_caps);
            for (c, flow) in model.flows.iter().enumerate() {
                d.admit[c] = if (self.queues.backlog(flow.source, c) as f64) <= cfg.v {
                    cfg.mu_m
                } else {
                    0
                };
            }
            d
        };

        // Independent feasibility check before any state changes.
        if let Err(msg) = check_decision(&decision, model, &caps, &admit_caps) {
            return Err(self.breach(slot, format!("infeasible decision: {msg}")));
        }

        // Slot-start observations (the X update and the Lyapunov function
        // are defined on pre-transfer state).
        let flow_backlogs: Vec<u64> = (0..model.n_flows())
            .map(|c| self.queues.flow_total(c))
            .collect();
        let vq_sum = if is_alg {
            stability_sum(&self.vq, cfg.variant)
        } else {
            0.0
        };
        let lyap = is_alg.then(|| self.lyapunov());
        self.accum.observe_state(slot, &flow_backlogs, vq_sum, lyap);
        if self.accum.recording() {
            let mut backlogs = Vec::with_capacity(model.n_nodes() * model.n_flows());
            for n in 0..model.n_nodes() {
                for c in 0..model.n_flows() {
                    backlogs.push(self.queues.backlog(n, c));
                }
            }
            self.accum.push_slot_record(SlotRecord {
                slot,
                backlogs,
                vq: self
                    .vq
                    .iter()
                    .map(|q| (q.u_s, q.z, q.x, q.y, q.l))
                    .collect(),
                r: ctrl.r.clone(),
                v_aux: ctrl.v.clone(),
                admitted: decision.admit.clone(),
            });
        }

        // (5) actual queues.
        let delivered = self
            .queues
            .step(model, &decision, slot)
            .map_err(|e| self.breach(slot, e.to_string()))?;

        // (6) virtual queues (X uses the slot-start backlog sum).
        if is_alg {
            for c in 0..model.n_flows() {
                let inputs = VirtualStepInputs {
                    r: ctrl.r[c],
                    v: ctrl.v[c],
                    admitted: decision.admit[c],
                    arrivals: arrivals[c],
                    slot_start_backlog: flow_backlogs[c],
                };
                self.vq[c].step(inputs, &model.flows[c], cfg);
            }
        }

        // (7) metrics and conservation.
        self.admitted_cum += decision.admit.iter().map(|&a| a as u64).sum::<u64>();
        self.delivered_cum += delivered.count.iter().sum::<u64>();
        if self.admitted_cum != self.delivered_cum + self.queues.total() {
            return Err(self.breach(
                slot,
                format!(
                    "conservation violated: admitted {} != delivered {} + in-flight {}",
                    self.admitted_cum,
                    self.delivered_cum,
                    self.queues.total()
                ),
            ));
        }
        self.accum.observe_actions(
            slot,
            &ctrl.r,
            &decision.admit,
            &delivered.count,
            &delivered.delay_sum,
        );
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::render_report;

    fn scenario(name: &str) -> (NetworkModel, SimConfig) {
        let path = format!("{}/../../scenarios/{name}.toml", env!("CARGO_MANIFEST_DIR"));
        crate::model::load_model(path).unwrap()
    }

    #[test]
    fn zero_horizon_gives_zero_report() {
        let (model, config) = scenario("single_link");
        let report = run(&model, &config, Algorithm::Alg(Variant::Backlogged), 0).unwrap();
        assert_eq!(report.throughput, 0.0);
        assert_eq!(report.max_backlog, 0);
        assert_eq!(report.flows[0].delivered, 0);
    }

    #[test]
    fn single_link_throughput_approaches_capacity() {
        // 1 link, q_M = 5, mu_M = 1, V = 100: long-run admitted rate -> 1,
        // the LP capacity of the single link.
        let (model, mut config) = scenario("single_link");
        config.v = 100.0;
        let report = run(&model, &config, Algorithm::Alg(Variant::Backlogged), 20_000).unwrap();
        assert!(
            (report.throughput - 1.0).abs() < 0.01,
            "throughput = {}",
            report.throughput
        );
        let lp = crate::oracle::solve_capacity_lp(&model, &[0.0], 0.0).unwrap();
        assert!(report.throughput <= lp.total + 0.01);
    }

    #[test]
    fn shared_relay_respects_lp_capacity() {
        let (model, config) = scenario("shared_relay");
        let report = run(&model, &config, Algorithm::Alg(Variant::Backlogged), 30_000).unwrap();
        let lp = crate::oracle::solve_capacity_lp(&model, &[0.1, 0.1], 0.0).unwrap();
        assert!(
            report.throughput <= lp.total + 0.02,
            "throughput {} exceeds LP capacity {}",
            report.throughput,
            lp.total
        );
        assert!(report.throughput > lp.total - 0.08);
    }

    #[test]
    fn bp_single_link_throughput_near_capacity() {
        let (model, mut config) = scenario("single_link");
        config.v = 10_000.0;
        config.mu_m = 2;
        let report = run_bp_baseline(&model, &config, 30_000).unwrap();
        // BP's admitted rate is inflated while its unbounded source queue
        // fills toward V; the delivered rate is the honest throughput.
        assert!(
            (report.delivered_throughput - 1.0).abs() < 0.01,
            "delivered = {}",
            report.delivered_throughput
        );
        assert!(report.throughput >= report.delivered_throughput);
    }

    #[test]
    fn bp_degenerate_threshold_admits_in_bursts() {
        // V = 0 with mu_M = 2 on a single link: the queue drains to zero
        // every third slot, giving a periodic orbit with rate 2/3 (hand
        // trace: admit 2, serve 1, serve 1).
        let (model, mut config) = scenario("single_link");
        config.v = 0.0;
        config.mu_m = 2;
        let report = run_bp_baseline(&model, &config, 30_000).unwrap();
        assert!(
            (report.throughput - 2.0 / 3.0).abs() < 0.005,
            "throughput = {}",
            report.throughput
        );
    }

    #[test]
    fn identical_seeds_give_bit_identical_reports() {
        let (model, config) = scenario("fig1like_arrivals");
        let opts = RunOptions { record_slots: true };
        let a = run_with_options(
            &model,
            &config,
            Algorithm::Alg(Variant::ArbitraryArrivals),
            3_000,
            opts,
        )
        .unwrap();
        let b = run_with_options(
            &model,
            &config,
            Algorithm::Alg(Variant::ArbitraryArrivals),
            3_000,
            opts,
        )
        .unwrap();
        assert_eq!(a, b);
        assert_eq!(render_report(&a, None), render_report(&b, None));
        let mut other = config.clone();
        other.seed = config.seed + 1;
        let c = run_with_options(
            &model,
            &other,
            Algorithm::Alg(Variant::ArbitraryArrivals),
            3_000,
            opts,
        )
        .unwrap();
        assert_ne!(a, c, "different seeds should differ somewhere");
    }

    #[test]
    fn fading_runs_are_seed_deterministic() {
        let (model, config) = scenario("general_fading");
        let opts = RunOptions { record_slots: true };
        let algo = Algorithm::Alg(Variant::GeneralInterference);
        let a = run_with_options(&model, &config, algo, 3_000, opts).unwrap();
        let b = run_with_options(&model, &config, algo, 3_000, opts).unwrap();
        assert_eq!(a, b);
        let mut other = config.clone();
        other.seed += 1;
        let c = run_with_options(&model, &other, algo, 3_000, opts).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn delay_queue_identity_bounds_average_backlog() {
        // X telescopes: sum_t sum_n U_n^c(t) <= rho_c sum_t R_c(t) + X(T),
        // the discrete form of the delay-queue stability argument.
        for name in ["fig1like", "chain", "two_flow_link"] {
            let (model, config) = scenario(name);
            let horizon = 20_000u64;
            let report = run_with_options(
                &model,
                &config,
                Algorithm::Alg(config.variant),
                horizon,
                RunOptions { record_slots: true },
            )
            .unwrap();
            let last = report.slot_records.as_ref().unwrap().last().unwrap();
            for (c, f) in report.flows.iter().enumerate() {
                // The record holds slot-start state, so the final slot's
                // backlog term is not yet folded into x; cover it exactly.
                let x_final = last.vq[c].2;
                let last_backlog: u32 = (0..model.n_nodes())
                    .map(|n| last.backlogs[n * model.n_flows() + c])
                    .sum();
                let bound = f.delay_threshold * f.virtual_rate
                    + (x_final + last_backlog as f64) / horizon as f64
                    + 1e-9;
                assert!(
                    f.avg_backlog <= bound,
                    "{name} flow {c}: avg backlog {} vs bound {}",
                    f.avg_backlog,
                    bound
                );
            }
        }
    }

    #[test]
    fn conservation_residual_is_zero() {
        for name in ["fig1like", "fig1like_gmm", "general_fading"] {
            let (model, config) = scenario(name);
            let algo = Algorithm::Alg(config.variant);
            let report = run(&model, &config, algo, 5_000).unwrap();
            assert_eq!(report.conservation_residual, 0, "scenario {name}");
        }
    }

    #[test]
    fn lyapunov_starts_at_zero_and_matches_hand_value() {
        let (model, config) = scenario("single_link");
        let report = run(&model, &config, Algorithm::Alg(Variant::Backlogged), 100).unwrap();
        assert_eq!(report.lyapunov_trace()[0], 0.0);

        // Hand value: u_s = 2, q_M = 4, mu_M = 2, one queue U = 3, x = z = 0
        // -> L = 0.5 * ((2/4) * 4 + 9 * 2 / 4) = 3.25.
        let (model2, mut cfg2) = scenario("single_link");
        cfg2.q_m = 4;
        cfg2.mu_m = 2;
        let mut sim = Simulation::new(
            &model2,
            cfg2,
            Algorithm::Alg(Variant::Backlogged),
            RunOptions::default(),
        )
        .unwrap();
        sim.vq[0].u_s = 2.0;
        let d = crate::sched::ScheduleDecision {
            real: vec![None],
            admit: vec![3],
        };
        sim.queues.step(&model2, &d, 0).unwrap();
        assert_eq!(sim.queues.backlog(0, 0), 3);
        assert!((sim.lyapunov() - 3.25).abs() < 1e-12);
    }

    #[test]
    fn z_growth_appears_in_lyapunov() {
        // One slot with R = 0 leaves only z = a_c: L = 0.5 a^2.
        let (mut model, config) = scenario("single_link");
        model.flows[0].min_rate = 0.3;
        let mut sim = Simulation::new(
            &model,
            config,
            Algorithm::Alg(Variant::Backlogged),
            RunOptions::default(),
        )
        .unwrap();
        sim.vq[0].step(
            VirtualStepInputs {
                r: 0,
                v: 0,
                admitted: 0,
                arrivals: 0,
                slot_start_backlog: 0,
            },
            &model.flows[0],
            &sim.config,
        );
        assert!((sim.lyapunov() - 0.5 * 0.3 * 0.3).abs() < 1e-12);
    }

    #[test]
    fn general_variant_runs_with_fading() {
        let (model, config) = scenario("general_fading");
        let report = run(
            &model,
            &config,
            Algorithm::Alg(Variant::GeneralInterference),
            5_000,
        )
        .unwrap();
        assert!(report.max_backlog <= config.q_m);
        assert!(report.throughput > 0.0);
    }

    #[test]
    fn delayed_t0_is_bit_identical_to_base() {
        let (model, mut config) = scenario("fig1like");
        config.feedback_delay = 0;
        let opts = RunOptions { record_slots: true };
        let base = run_with_options(
            &model,
            &config,
            Algorithm::Alg(Variant::Backlogged),
            2_000,
            opts,
        )
        .unwrap();
        let delayed = run_with_options(
            &model,
            &config,
            Algorithm::Alg(Variant::DelayedInfo),
            2_000,
            opts,
        )
        .unwrap();
        assert_eq!(base.slot_records, delayed.slot_records);
        assert_eq!(base.throughput, delayed.throughput);
    }

    #[test]
    fn min_rate_queue_identity_holds_over_empty_windows() {
        // Whenever Z is (near) zero at both ends of a window, the average R
        // over the window is at least a_c - z(end)/len.
        let (model, config) = scenario("fig1like");
        let opts = RunOptions { record_slots: true };
        let report = run_with_options(
            &model,
            &config,
            Algorithm::Alg(Variant::Backlogged),
            20_000,
            opts,
        )
        .unwrap();
        let records = report.slot_records.as_ref().unwrap();
        let a_c = model.flows[0].min_rate;
        // Z re-adds a_c every slot, so its floor is a_c, not zero.
        let floor = a_c + 1e-9;
        let lows: Vec<usize> = records
            .iter()
            .enumerate()
            .filter(|(_, r)| r.vq[0].1 <= floor)
            .map(|(i, _)| i)
            .collect();
        assert!(
            lows.len() >= 2,
            "Z never returns to its floor; weak scenario"
        );
        let (start, end) = (lows[0], *lows.last().unwrap());
        let window = (end - start) as f64;
        assert!(window >= 100.0, "window too short to be meaningful");
        let r_avg: f64 = records[start..end]
            .iter()
            .map(|r| r.r[0] as f64)
            .sum::<f64>()
            / window;
        assert!(
            r_avg >= a_c - (a_c + 1.0) / window - 1e-9,
            "avg R {} below a_c {}",
            r_avg,
            a_c
        );
    }

    #[test]
    fn admitted_rate_dominates_virtual_rate_minus_residual() {
        // u_s telescopes: sum(mu) >= sum(R) - u_s(final), so the admitted
        // rate trails the virtual rate by at most u_s(final)/horizon.
        for name in ["fig1like", "chain", "shared_relay"] {
            let (model, config) = scenario(name);
            let horizon = 20_000;
            let report = run_with_options(
                &model,
                &config,
                Algorithm::Alg(config.variant),
                horizon,
                RunOptions { record_slots: true },
            )
            .unwrap();
            let last = report.slot_records.as_ref().unwrap().last().unwrap();
            for (c, f) in report.flows.iter().enumerate() {
                let u_s_final = last.vq[c].0;
                assert!(
                    f.admitted_rate >= f.virtual_rate - u_s_final / horizon as f64 - 1e-9,
                    "{name} flow {c}: mu {} vs r {} (u_s {})",
                    f.admitted_rate,
                    f.virtual_rate,
                    u_s_final
                );
            }
        }
    }

    #[test]
    fn bp_rejects_structurally_broken_models() {
        // Config-scale checks are waived for the comparator, model
        // structure is not.
        let (mut model, config) = scenario("fig1like");
        model.flows[0].destination = model.flows[0].source;
        let err = run_bp_baseline(&model, &config, 10).unwrap_err();
        assert!(matches!(err, EngineError::Validation(_)));
        // V = 0 stays runnable for BP.
        let (model, mut config) = scenario("single_link");
        config.v = 0.0;
        assert!(run_bp_baseline(&model, &config, 100).is_ok());
    }

    #[test]
    fn invalid_combination_is_rejected() {
        let (model, mut config) = scenario("fig1like");
        config.q_m = 1;
        config.mu_m = 2;
        let err = run(&model, &config, Algorithm::Alg(Variant::Backlogged), 10).unwrap_err();
        assert!(matches!(err, EngineError::Validation(_)));
    }
}

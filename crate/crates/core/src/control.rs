//! Congestion controllers choosing the virtual input rates R_c(t) (and
//! v_c(t) under arbitrary arrivals) from virtual-queue state.
//!
//! All controllers are bang-bang threshold rules: the linear objective in
//! R_c is minimized at an endpoint of its feasible interval. Boundary
//! handling follows the respective update rules literally: the backlogged
//! controller zeroes R_c only on a strictly positive expression, the
//! arbitrary-arrivals controller zeroes on `>= 0`.

use crate::model::{NetworkModel, SimConfig};
use crate::queues::FlowVirtualQueues;

/// Per-flow rate choices for one slot.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ControlDecision {
    /// Virtual input rate R_c(t).
    pub r: Vec<u32>,
    /// Auxiliary rate v_c(t); zero outside the arbitrary-arrivals variant.
    pub v: Vec<u32>,
}

fn threshold(u_s: f64, x: f64, z: f64, flow_delay: f64, cfg: &SimConfig) -> f64 {
    let q = cfg.q_m as f64;
    (q - cfg.mu_m as f64) / q * u_s - x * flow_delay - z
}

/// Backlogged sources: R_c = 0 iff
/// `((q_M - mu_M)/q_M) U_s - X rho_c - Z - V > 0`, else mu_M.
pub fn control_backlogged(
    vq: &[FlowVirtualQueues],
    model: &NetworkModel,
    cfg: &SimConfig,
) -> ControlDecision {
    let r = vq
        .iter()
        .zip(&model.flows)
        .map(|(q, flow)| {
            if threshold(q.u_s, q.x, q.z, flow.delay_threshold, cfg) - cfg.v > 0.0 {
                0
            } else {
                cfg.mu_m
            }
        })
        .collect();
    ControlDecision {
        r,
        v: vec![0; vq.len()],
    }
}

/// Arbitrary arrivals: v_c = 0 iff `eta Y - V >= 0`, else mu_M;
/// R_c = 0 iff `((q_M - mu_M)/q_M) U_s - eta Y - X rho_c - Z >= 0`, else
/// `min(L_c + A_c, mu_M)`.
pub fn control_arbitrary(
    vq: &[FlowVirtualQueues],
    arrivals: &[u32],
    model: &NetworkModel,
    cfg: &SimConfig,
) -> ControlDecision {
    let mut r = Vec::with_capacity(vq.len());
    let mut v = Vec::with_capacity(vq.len());
    for ((q, flow), &a) in vq.iter().zip(&model.flows).zip(arrivals) {
        v.push(if cfg.eta * q.y - cfg.v >= 0.0 {
            0
        } else {
            cfg.mu_m
        });
        let expr = threshold(q.u_s, q.x, q.z, flow.delay_threshold, cfg) - cfg.eta * q.y;
        r.push(if expr >= 0.0 {
            0
        } else {
            (q.l as u64 + a as u64).min(cfg.mu_m as u64) as u32
        });
    }
    ControlDecision { r, v }
}

/// Delayed queue information: identical to the backlogged controller with
/// X_c replaced by its T-slots-old value; U_s stays current, as in the
/// displayed update (its delayed counterpart appears only in link weights).
pub fn control_delayed(
    vq: &[FlowVirtualQueues],
    model: &NetworkModel,
    cfg: &SimConfig,
) -> ControlDecision {
    let r = vq
        .iter()
        .zip(&model.flows)
        .map(|(q, flow)| {
            let (_, x_delayed) = q.delayed(cfg.feedback_delay);
            if threshold(q.u_s, x_delayed, q.z, flow.delay_threshold, cfg) - cfg.v > 0.0 {
                0
            } else {
                cfg.mu_m
            }
        })
        .collect();
    ControlDecision {
        r,
        v: vec![0; vq.len()],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{
        ArrivalProcess, FlowSpec, InterferenceKind, InterferenceModel, Link, Scheduler, Variant,
    };
    use crate::queues::VirtualStepInputs;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn model_with_rho(rho: f64) -> NetworkModel {
        NetworkModel {
            node_names: vec!["a".into(), "b".into()],
            links: vec![Link {
                from: 0,
                to: 1,
                capacity: 1,
            }],
            flows: vec![FlowSpec {
                source: 0,
                destination: 1,
                min_rate: 0.1,
                delay_threshold: rho,
                arrival: ArrivalProcess::Backlogged,
            }],
            interference: InterferenceModel {
                kind: InterferenceKind::NodeExclusive,
                channel: None,
            },
        }
    }

    fn cfg(q_m: u32, mu_m: u32, v: f64, variant: Variant) -> SimConfig {
        SimConfig {
            q_m,
            mu_m,
            v,
            eta: 1.0,
            feedback_delay: 0,
            transport_buffer: 0,
            horizon: 0,
            seed: 0,
            variant,
            scheduler: Scheduler::ExactMwm,
        }
    }

    fn vq(u_s: f64, x: f64, z: f64) -> FlowVirtualQueues {
        let mut q = FlowVirtualQueues::new();
        q.u_s = u_s;
        q.x = x;
        q.z = z;
        q
    }

    #[test]
    fn zero_state_admits() {
        let model = model_with_rho(50.0);
        let d = control_backlogged(
            &[vq(0.0, 0.0, 0.0)],
            &model,
            &cfg(5, 2, 1000.0, Variant::Backlogged),
        );
        assert_eq!(d.r, vec![2]);
    }

    #[test]
    fn large_backlog_blocks() {
        // (3/5) * 10000 - 1000 = 5000 > 0 -> R = 0
        let model = model_with_rho(50.0);
        let d = control_backlogged(
            &[vq(10000.0, 0.0, 0.0)],
            &model,
            &cfg(5, 2, 1000.0, Variant::Backlogged),
        );
        assert_eq!(d.r, vec![0]);
    }

    #[test]
    fn exact_tie_admits() {
        // ((q_M-mu_M)/q_M) u_s == x rho + z + V exactly: strict > 0 fails.
        let model = model_with_rho(1.0);
        let cfg = cfg(4, 2, 10.0, Variant::Backlogged);
        // (2/4) u_s = 0.5 u_s; choose u_s = 24, x = 1, z = 1: 12 - 1 - 1 - 10 = 0.
        let d = control_backlogged(&[vq(24.0, 1.0, 1.0)], &model, &cfg);
        assert_eq!(d.r, vec![2]);
    }

    #[test]
    fn arbitrary_zero_state_fills_v() {
        let model = model_with_rho(50.0);
        let d = control_arbitrary(
            &[vq(0.0, 0.0, 0.0)],
            &[0],
            &model,
            &cfg(5, 2, 1000.0, Variant::ArbitraryArrivals),
        );
        assert_eq!(d.v, vec![2]);
    }

    #[test]
    fn arbitrary_r_capped_by_transport_backlog() {
        let model = model_with_rho(50.0);
        let cfg = cfg(5, 2, 1000.0, Variant::ArbitraryArrivals);
        let mut q = vq(0.0, 0.0, 0.0);
        q.y = 5.0; // expression = -5 < 0 -> admit min(L + A, mu_M)
        let d = control_arbitrary(&[q.clone()], &[1], &model, &cfg);
        assert_eq!(d.r, vec![1]);
        q.l = 3.0;
        let d = control_arbitrary(&[q], &[1], &model, &cfg);
        assert_eq!(d.r, vec![2]);
    }

    #[test]
    fn arbitrary_v_zero_on_exact_tie() {
        // eta * y = V exactly -> v = 0 (the >= 0 branch).
        let model = model_with_rho(50.0);
        let mut cfg = cfg(5, 2, 1000.0, Variant::ArbitraryArrivals);
        cfg.eta = 2.0;
        let mut q = vq(0.0, 0.0, 0.0);
        q.y = 500.0;
        let d = control_arbitrary(&[q], &[0], &model, &cfg);
        assert_eq!(d.v, vec![0]);
    }

    #[test]
    fn delayed_uses_old_x() {
        let model = model_with_rho(1.0);
        let mut cfg = cfg(5, 2, 1.0, Variant::DelayedInfo);
        cfg.feedback_delay = 2;
        let flow = model.flows[0].clone();
        let mut q = FlowVirtualQueues::new();
        // Build history x: 0 -> 7 -> 16 via backlogs 7 and 9, keeping R = 0.
        for backlog in [7, 9] {
            q.step(
                VirtualStepInputs {
                    r: 0,
                    v: 0,
                    admitted: 0,
                    arrivals: 0,
                    slot_start_backlog: backlog,
                },
                &flow,
                &cfg,
            );
        }
        // With u_s = 20: against the 2-slot-old x = 0 the expression is
        // 0.6*20 - 1 = 11 > 0 (block); against the current x = 16 it is
        // 12 - 16 - 1 < 0 (admit). The delayed controller must block.
        q.u_s = 20.0;
        let delayed = control_delayed(&[q.clone()], &model, &cfg);
        assert_eq!(delayed.r, vec![0]);
        let current = control_backlogged(&[q], &model, &cfg);
        assert_eq!(current.r, vec![2]);
    }

    #[test]
    fn delayed_t0_matches_backlogged_on_random_traces() {
        let model = model_with_rho(3.0);
        let cfg = cfg(6, 2, 25.0, Variant::DelayedInfo);
        let flow = model.flows[0].clone();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut q = FlowVirtualQueues::new();
        for _ in 0..500 {
            let delayed = control_delayed(std::slice::from_ref(&q), &model, &cfg);
            let base = control_backlogged(std::slice::from_ref(&q), &model, &cfg);
            assert_eq!(delayed, base);
            q.step(
                VirtualStepInputs {
                    r: rng.gen_range(0..=2),
                    v: 0,
                    admitted: rng.gen_range(0..=2),
                    arrivals: 0,
                    slot_start_backlog: rng.gen_range(0..8),
                },
                &flow,
                &cfg,
            );
        }
    }

    #[test]
    fn thresholds_are_monotone_in_us() {
        // Raising u_s (other state fixed) may only switch mu_M -> 0.
        let model = model_with_rho(2.0);
        let cfg = cfg(7, 2, 40.0, Variant::Backlogged);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..2000 {
            let x = rng.gen_range(0.0..30.0);
            let z = rng.gen_range(0.0..30.0);
            let lo = rng.gen_range(0.0..200.0);
            let hi = lo + rng.gen_range(0.0..200.0);
            let r_lo = control_backlogged(&[vq(lo, x, z)], &model, &cfg).r[0];
            let r_hi = control_backlogged(&[vq(hi, x, z)], &model, &cfg).r[0];
            assert!(r_hi <= r_lo, "admission must not resume as u_s grows");
        }
    }

    #[test]
    fn decisions_are_bang_bang() {
        let model = model_with_rho(2.0);
        let cfg_b = cfg(7, 2, 40.0, Variant::Backlogged);
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..2000 {
            let q = vq(
                rng.gen_range(0.0..500.0),
                rng.gen_range(0.0..50.0),
                rng.gen_range(0.0..50.0),
            );
            let r = control_backlogged(std::slice::from_ref(&q), &model, &cfg_b).r[0];
            assert!(r == 0 || r == cfg_b.mu_m);
        }
    }

    #[test]
    fn flow_evaluation_order_is_immaterial() {
        // Controllers are per-flow pure functions; evaluating a reversed
        // flow list yields the reversed decisions.
        let mut model = model_with_rho(2.0);
        model.flows.push(FlowSpec {
            source: 1,
            destination: 0,
            min_rate: 0.2,
            delay_threshold: 9.0,
            arrival: ArrivalProcess::Backlogged,
        });
        let cfg = cfg(7, 2, 40.0, Variant::Backlogged);
        let qs = vec![vq(100.0, 3.0, 1.0), vq(7.0, 0.5, 2.0)];
        let fwd = control_backlogged(&qs, &model, &cfg);
        let mut rev_model = model.clone();
        rev_model.flows.reverse();
        let rev_qs: Vec<_> = qs.iter().rev().cloned().collect();
        let rev = control_backlogged(&rev_qs, &rev_model, &cfg);
        assert_eq!(fwd.r, rev.r.iter().rev().copied().collect::<Vec<_>>());
    }
}

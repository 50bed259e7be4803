//! Ground-truth quantities on small instances: the exact capacity-region
//! LP (time-sharing over enumerated feasible activations), brute-force
//! matching enumeration, and the constants of the drift and stability bounds.

pub mod simplex;

use thiserror::Error;

use crate::model::{NetworkModel, SimConfig};
use simplex::{Lp, LpResult, Rel};

/// Hard size gates for exact enumeration.
const MAX_LINKS: usize = 20;
const MAX_JOINT_STATES: usize = 4096;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("instance too large for exact enumeration: {0}")]
    TooLarge(String),
    #[error("infeasible: the requested rates (plus epsilon) lie outside the capacity region")]
    Infeasible,
    #[error("LP is unbounded; the model admits unlimited rates (missing capacity constraints?)")]
    Unbounded,
}

/// Solution of the epsilon-interior throughput optimization.
#[derive(Debug, Clone)]
pub struct CapacityResult {
    /// Optimal per-flow rates r*_{eps,c}.
    pub rates: Vec<f64>,
    /// Optimal objective, sum of the rates.
    pub total: f64,
    pub epsilon: f64,
}

/// Maximize sum of flow rates such that every flow can additionally carry
/// `epsilon` (the epsilon-interior encoding) and `r_c >= min_rates[c]`, over
/// flows routed through time-shared feasible activations.
///
/// Among the throughput-optimal rate vectors, the one maximizing the
/// worst-case slack min_c (r_c - a_c) is returned (a second LP phase): the
/// stability analysis assumes an optimal point with strictly positive
/// slack whenever one exists, and an arbitrary vertex of a degenerate
/// optimal face would report slack 0.
///
/// Exact on instances where all feasible activations (and joint channel
/// states) are enumerable; errors out above the size gates.
pub fn solve_capacity_lp(
    model: &NetworkModel,
    min_rates: &[f64],
    epsilon: f64,
) -> Result<CapacityResult, OracleError> {
    assert_eq!(min_rates.len(), model.n_flows());
    let n_links = model.n_links();
    if n_links > MAX_LINKS {
        return Err(OracleError::TooLarge(format!(
            "{n_links} links exceed the {MAX_LINKS}-link activation enumeration gate"
        )));
    }

    // Joint channel states with probabilities (a single sure state without
    // fading), each with per-link capacities and maximal activations.
    let states = enumerate_joint_states(model)?;
    let activations = model.maximal_activations();
    let n_flows = model.n_flows();

    // Phase A: maximize the sum of rates.
    let mut lp = build_capacity_lp(model, min_rates, epsilon, &states, &activations, false);
    for c in 0..n_flows {
        lp.objective[c] = 1.0;
    }
    let optimum = match lp.solve() {
        LpResult::Optimal { value, .. } => value,
        LpResult::Infeasible => return Err(OracleError::Infeasible),
        LpResult::Unbounded => return Err(OracleError::Unbounded),
    };

    // Phase B: pin the optimum, maximize the worst-case slack s with
    // r_c >= a_c + s (the slack variable is the last one).
    let mut lp = build_capacity_lp(model, min_rates, epsilon, &states, &activations, true);
    let slack_var = lp.n_vars - 1;
    lp.objective[slack_var] = 1.0;
    lp.constrain(
        (0..n_flows).map(|c| (c, 1.0)).collect(),
        Rel::Ge,
        optimum - 1e-7,
    );
    match lp.solve() {
        LpResult::Optimal { x, .. } => {
            let rates: Vec<f64> = (0..n_flows).map(|c| x[c]).collect();
            let total = rates.iter().sum();
            Ok(CapacityResult {
                rates,
                total,
                epsilon,
            })
        }
        LpResult::Infeasible => Err(OracleError::Infeasible),
        LpResult::Unbounded => Err(OracleError::Unbounded),
    }
}

/// Shared constraint set of the capacity LP. Variable layout: rates (one
/// per flow) | flow-link variables (where allowed) | activation time shares
/// | optionally one slack variable.
fn build_capacity_lp(
    model: &NetworkModel,
    min_rates: &[f64],
    epsilon: f64,
    states: &[JointState],
    activations: &[u64],
    with_slack: bool,
) -> Lp {
    let n_links = model.n_links();
    let n_flows = model.n_flows();
    let rate_var = |c: usize| c;
    let mut flow_link: Vec<Vec<Option<usize>>> = vec![vec![None; n_links]; n_flows];
    let mut next = n_flows;
    for (c, flow) in model.flows.iter().enumerate() {
        for (l, link) in model.links.iter().enumerate() {
            // No routing into a flow's source, no departures from its
            // destination (it absorbs).
            if link.to == flow.source || link.from == flow.destination {
                continue;
            }
            flow_link[c][l] = Some(next);
            next += 1;
        }
    }
    let alpha_base = next;
    let n_alpha = states.len() * activations.len();
    let slack_var = alpha_base + n_alpha;
    let n_vars = slack_var + usize::from(with_slack);
    let alpha_var = |s: usize, i: usize| alpha_base + s * activations.len() + i;

    let mut lp = Lp::new(n_vars);
    for (c, &min_rate) in min_rates.iter().enumerate() {
        let mut coeffs = vec![(rate_var(c), 1.0)];
        if with_slack {
            coeffs.push((slack_var, -1.0));
        }
        lp.constrain(coeffs, Rel::Ge, min_rate);
    }
    // Flow conservation; the source injects r_c + epsilon.
    for (c, flow) in model.flows.iter().enumerate() {
        for n in 0..model.n_nodes() {
            if n == flow.destination {
                continue;
            }
            let mut coeffs: Vec<(usize, f64)> = Vec::new();
            for (l, link) in model.links.iter().enumerate() {
                let Some(var) = flow_link[c][l] else { continue };
                if link.from == n {
                    coeffs.push((var, 1.0));
                } else if link.to == n {
                    coeffs.push((var, -1.0));
                }
            }
            if n == flow.source {
                coeffs.push((rate_var(c), -1.0));
                lp.constrain(coeffs, Rel::Eq, epsilon);
            } else if !coeffs.is_empty() {
                lp.constrain(coeffs, Rel::Eq, 0.0);
            }
        }
    }
    // Link capacity: sum of flow rates <= expected time-shared capacity.
    for l in 0..n_links {
        let mut coeffs: Vec<(usize, f64)> = flow_link
            .iter()
            .filter_map(|links_of_flow| links_of_flow[l].map(|var| (var, 1.0)))
            .collect();
        if coeffs.is_empty() {
            continue;
        }
        for (s, state) in states.iter().enumerate() {
            for (i, &act) in activations.iter().enumerate() {
                if act & (1 << l) != 0 && state.caps[l] > 0 {
                    coeffs.push((alpha_var(s, i), -state.prob * state.caps[l] as f64));
                }
            }
        }
        lp.constrain(coeffs, Rel::Le, 0.0);
    }
    // Per state, activation time shares form a sub-distribution.
    for s in 0..states.len() {
        let coeffs = (0..activations.len())
            .map(|i| (alpha_var(s, i), 1.0))
            .collect();
        lp.constrain(coeffs, Rel::Le, 1.0);
    }
    lp
}

struct JointState {
    prob: f64,
    caps: Vec<u32>,
}

fn enumerate_joint_states(model: &NetworkModel) -> Result<Vec<JointState>, OracleError> {
    match &model.interference.channel {
        None => Ok(vec![JointState {
            prob: 1.0,
            caps: model.links.iter().map(|l| l.capacity).collect(),
        }]),
        Some(fading) => {
            let count: usize = fading.states.iter().map(|s| s.len()).product();
            if count > MAX_JOINT_STATES {
                return Err(OracleError::TooLarge(format!(
                    "{count} joint channel states exceed the {MAX_JOINT_STATES} gate"
                )));
            }
            let mut states = vec![JointState {
                prob: 1.0,
                caps: Vec::new(),
            }];
            for link_states in &fading.states {
                let mut expanded = Vec::with_capacity(states.len() * link_states.len());
                for st in &states {
                    for &cap in link_states {
                        let mut caps = st.caps.clone();
                        caps.push(cap);
                        expanded.push(JointState {
                            prob: st.prob / link_states.len() as f64,
                            caps,
                        });
                    }
                }
                states = expanded;
            }
            Ok(states)
        }
    }
}

/// Exhaustive maximum-weight matching over an explicit edge list: the test
/// oracle for the blossom solver. Gated to 20 edges.
pub fn brute_force_matchings(
    n_vertices: usize,
    edges: &[(usize, usize, i64)],
) -> Result<(i64, Vec<usize>), OracleError> {
    if edges.len() > MAX_LINKS {
        return Err(OracleError::TooLarge(format!(
            "{} edges exceed the {MAX_LINKS}-edge matching enumeration gate",
            edges.len()
        )));
    }
    for &(u, v, _) in edges {
        assert!(u != v && u < n_vertices && v < n_vertices);
    }
    fn recurse(
        edges: &[(usize, usize, i64)],
        idx: usize,
        used: u64,
        weight: i64,
        chosen: &mut Vec<usize>,
        best: &mut (i64, Vec<usize>),
    ) {
        if idx == edges.len() {
            if weight > best.0 {
                *best = (weight, chosen.clone());
            }
            return;
        }
        let (u, v, w) = edges[idx];
        if used & (1 << u) == 0 && used & (1 << v) == 0 {
            chosen.push(idx);
            recurse(
                edges,
                idx + 1,
                used | (1 << u) | (1 << v),
                weight + w,
                chosen,
                best,
            );
            chosen.pop();
        }
        recurse(edges, idx + 1, used, weight, chosen, best);
    }
    let mut best = (0i64, Vec::new());
    let mut chosen = Vec::new();
    recurse(edges, 0, 0, 0, &mut chosen, &mut best);
    Ok(best)
}

/// Constants of the drift and stability bounds, evaluated for a model/config
/// pair, optionally against an oracle rate vector. `gamma` is the
/// suboptimality factor of the scheduler (1 for exact MWM, 1/2 for GMM,
/// 1/Delta for the greedy independent-set heuristic).
#[derive(Debug, Clone)]
pub struct BoundConstants {
    pub epsilon: f64,
    pub gamma: f64,
    /// Drift constant B of the base bound.
    pub b: f64,
    /// Cap on the time-averaged total virtual input, B_R <= K mu_M.
    pub b_r: f64,
    /// B' = B + V B_R (virtual backlog bound numerator, exact scheduler).
    pub b_prime: f64,
    /// B-bar = B + gamma V B_R (suboptimal scheduler).
    pub b_bar: f64,
    /// B_1 = B + K eta mu_M^2 (arbitrary arrivals, throughput bound).
    pub b1: f64,
    /// B_2 = B_1 + V B_R (arbitrary arrivals, backlog bound).
    pub b2: f64,
    /// B_3 = B + K N mu_M T + N q_M T mu_M rho + K rho^2 mu_M^2 T with
    /// rho = max_c rho_c (delayed information, throughput bound).
    pub b3: f64,
    /// B_4 = B_3 + V B_R (delayed information, backlog bound).
    pub b4: f64,
    /// Largest eps_1 allowed by the two drift inequalities (gamma-scaled).
    pub eps1: Option<f64>,
    /// min_c (gamma r*_{eps,c} - a_c); eps' of the base bound at gamma=1,
    /// eps_2 of the suboptimal-scheduler bound otherwise.
    pub eps_slack: Option<f64>,
    /// delta = min(eps1, eps_slack) when both are positive.
    pub delta: Option<f64>,
    /// gamma * sum r*_{eps,c} - B/V.
    pub throughput_floor: Option<f64>,
    /// (B + gamma V B_R) / delta.
    pub vq_ceiling: Option<f64>,
}

pub fn compute_constants(
    model: &NetworkModel,
    config: &SimConfig,
    lp: Option<&CapacityResult>,
    gamma: f64,
) -> BoundConstants {
    let n = model.n_nodes() as f64;
    let k = model.n_flows() as f64;
    let q = config.q_m as f64;
    let mu = config.mu_m as f64;
    let t = config.feedback_delay as f64;
    let sum_rho2: f64 = model
        .flows
        .iter()
        .map(|f| f.delay_threshold * f.delay_threshold)
        .sum();
    let sum_a2: f64 = model.flows.iter().map(|f| f.min_rate * f.min_rate).sum();
    let rho_max = model
        .flows
        .iter()
        .map(|f| f.delay_threshold)
        .fold(0.0, f64::max);

    let b = 0.5 * n * k * q * mu
        + k * (q - mu) / q * mu * mu
        + 0.5 * mu * mu * sum_rho2
        + 0.5 * k * n * n * q * q
        + 0.5 * k * mu * mu
        + 0.5 * k * sum_a2;
    let b_r = k * mu;
    let b1 = b + k * config.eta * mu * mu;
    let b3 = b + k * n * mu * t + n * q * t * mu * rho_max + k * rho_max * rho_max * mu * mu * t;

    let (eps1, eps_slack, epsilon) = match lp {
        None => (None, None, 0.0),
        Some(res) => {
            let rho_term = model
                .flows
                .iter()
                .zip(&res.rates)
                .map(|(f, &r)| gamma * f.delay_threshold * r - n * q)
                .fold(f64::INFINITY, f64::min);
            let us_term = (gamma * res.epsilon * (q - mu) - (2.0 * n - 1.0 + mu * mu) / 2.0) / q;
            let eps1 = rho_term.min(us_term);
            let slack = model
                .flows
                .iter()
                .zip(&res.rates)
                .map(|(f, &r)| gamma * r - f.min_rate)
                .fold(f64::INFINITY, f64::min);
            (
                (eps1 > 0.0).then_some(eps1),
                (slack > 0.0).then_some(slack),
                res.epsilon,
            )
        }
    };
    let delta = match (eps1, eps_slack) {
        (Some(a), Some(b)) => Some(a.min(b)),
        _ => None,
    };
    BoundConstants {
        epsilon,
        gamma,
        b,
        b_r,
        b_prime: b + config.v * b_r,
        b_bar: b + gamma * config.v * b_r,
        b1,
        b2: b1 + config.v * b_r,
        b3,
        b4: b3 + config.v * b_r,
        eps1,
        eps_slack,
        delta,
        throughput_floor: lp.map(|res| gamma * res.total - b / config.v),
        vq_ceiling: delta.map(|d| (b + gamma * config.v * b_r) / d),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{parse_model, Variant};
    use crate::sched::blossom;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn single_link() -> (NetworkModel, SimConfig) {
        parse_model(
            r#"
            [nodes]
            names = ["A", "B"]
            [links]
            directed = ["A->B"]
            [[flows]]
            source = "A"
            destination = "B"
            min_rate = 0.0
            delay_threshold = 20.0
            arrival = "backlogged"
            [interference]
            kind = "node-exclusive"
            [control]
            q_m = 5
            mu_m = 1
            v = 100.0
            horizon = 100
            seed = 1
            variant = "backlogged"
            scheduler = "exact-mwm"
            "#,
            "single",
        )
        .unwrap()
    }

    fn shared_relay() -> NetworkModel {
        let text = std::fs::read_to_string(concat!(
            env!("CARGO_MANIFEST_DIR"),
            "/../../scenarios/shared_relay.toml"
        ))
        .unwrap();
        parse_model(&text, "shared_relay").unwrap().0
    }

    #[test]
    fn single_link_capacity_is_one() {
        let (model, _) = single_link();
        let res = solve_capacity_lp(&model, &[0.0], 0.0).unwrap();
        assert!((res.total - 1.0).abs() < 1e-8);
    }

    #[test]
    fn epsilon_interior_shrinks_capacity() {
        let (model, _) = single_link();
        let r0 = solve_capacity_lp(&model, &[0.0], 0.0).unwrap().total;
        let r2 = solve_capacity_lp(&model, &[0.0], 0.2).unwrap().total;
        let r4 = solve_capacity_lp(&model, &[0.0], 0.4).unwrap().total;
        assert!((r2 - 0.8).abs() < 1e-8);
        assert!((r4 - 0.6).abs() < 1e-8);
        assert!(r0 >= r2 && r2 >= r4);
    }

    #[test]
    fn infeasible_min_rate_is_reported() {
        let (model, _) = single_link();
        let err = solve_capacity_lp(&model, &[1.5], 0.0).unwrap_err();
        assert!(matches!(err, OracleError::Infeasible));
    }

    #[test]
    fn shared_relay_capacity_is_half() {
        // Every delivered packet occupies the relay twice, so the sum
        // capacity is 1/2 (hand time-sharing argument).
        let model = shared_relay();
        let res = solve_capacity_lp(&model, &[0.1, 0.1], 0.0).unwrap();
        assert!((res.total - 0.5).abs() < 1e-8, "total = {}", res.total);
        assert!(res.rates.iter().all(|&r| r >= 0.1 - 1e-9));
    }

    #[test]
    fn edgeless_conflict_graph_gives_min_cut() {
        // 2 nodes, one link of capacity 3, no conflicts: optimum 3.
        let (mut model, _) = single_link();
        model.links[0].capacity = 3;
        model.interference = crate::model::InterferenceModel {
            kind: crate::model::InterferenceKind::ConflictGraph { conflicts: vec![] },
            channel: None,
        };
        let res = solve_capacity_lp(&model, &[0.0], 0.0).unwrap();
        assert!((res.total - 3.0).abs() < 1e-8);
    }

    #[test]
    fn fading_capacity_is_the_mean_state() {
        // Single link alternating capacity {0, 1} uniformly: capacity 1/2.
        let (mut model, _) = single_link();
        model.interference.channel = Some(crate::model::FadingProcess {
            states: vec![vec![0, 1]],
        });
        let res = solve_capacity_lp(&model, &[0.0], 0.0).unwrap();
        assert!((res.total - 0.5).abs() < 1e-8);
    }

    #[test]
    fn fig1like_capacity_matches_bottleneck_argument() {
        // All three flows cross nodes B and C twice each: sum <= 1/2, and
        // time sharing attains it.
        let text = std::fs::read_to_string(concat!(
            env!("CARGO_MANIFEST_DIR"),
            "/../../scenarios/fig1like.toml"
        ))
        .unwrap();
        let (model, _) = parse_model(&text, "fig1like").unwrap();
        let res = solve_capacity_lp(&model, &[0.1, 0.1, 0.1], 0.0).unwrap();
        assert!((res.total - 0.5).abs() < 1e-7, "total = {}", res.total);
    }

    #[test]
    fn brute_force_examples() {
        let (w, set) = brute_force_matchings(2, &[]).unwrap();
        assert_eq!((w, set.len()), (0, 0));
        let (w, set) = brute_force_matchings(2, &[(0, 1, 5)]).unwrap();
        assert_eq!((w, set), (5, vec![0]));
        // Path of 3 links w = (2, 3, 2): ends win with 4.
        let (w, set) = brute_force_matchings(4, &[(0, 1, 2), (1, 2, 3), (2, 3, 2)]).unwrap();
        assert_eq!(w, 4);
        assert_eq!(set, vec![0, 2]);
    }

    #[test]
    fn brute_force_agrees_with_blossom_on_random_graphs() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..300 {
            let n = rng.gen_range(2..9);
            let mut edges = Vec::new();
            for u in 0..n {
                for v in (u + 1)..n {
                    if rng.gen_bool(0.4) && edges.len() < 10 {
                        edges.push((u, v, rng.gen_range(0..50i64)));
                    }
                }
            }
            let (brute, _) = brute_force_matchings(n, &edges).unwrap();
            let mate = blossom::max_weight_matching(n, &edges);
            let exact = blossom::matching_weight(&edges, &mate);
            assert_eq!(brute, exact, "edges: {edges:?}");
        }
    }

    #[test]
    fn constants_match_hand_computation() {
        // N=2, K=1, q_M=4, mu_M=2, rho=10, a=0 -> B = 8+2+200+32+2 = 244.
        let (mut model, mut config) = single_link();
        model.flows[0].delay_threshold = 10.0;
        model.flows[0].min_rate = 0.0;
        config.q_m = 4;
        config.mu_m = 2;
        let c = compute_constants(&model, &config, None, 1.0);
        assert!((c.b - 244.0).abs() < 1e-9, "B = {}", c.b);
    }

    #[test]
    fn delayed_constant_collapses_at_t0() {
        let (model, mut config) = single_link();
        config.feedback_delay = 0;
        let c = compute_constants(&model, &config, None, 1.0);
        assert_eq!(c.b3, c.b);
        config.feedback_delay = 5;
        let c5 = compute_constants(&model, &config, None, 1.0);
        assert!(c5.b3 > c5.b);
    }

    #[test]
    fn gamma_one_makes_suboptimal_bound_exact() {
        let (model, config) = single_link();
        let c = compute_constants(&model, &config, None, 1.0);
        assert_eq!(c.b_bar, c.b_prime);
    }

    #[test]
    fn delta_matches_designed_chain_scenario() {
        // chain_admissible: eps = 0.1, q = 45, rho = 500, r* = 0.4, a = 0.1.
        let text = std::fs::read_to_string(concat!(
            env!("CARGO_MANIFEST_DIR"),
            "/../../scenarios/chain_admissible.toml"
        ))
        .unwrap();
        let (model, config) = parse_model(&text, "chain_admissible").unwrap();
        assert_eq!(config.variant, Variant::Backlogged);
        let lp = solve_capacity_lp(&model, &[0.1], 0.1).unwrap();
        assert!((lp.total - 0.4).abs() < 1e-8);
        let c = compute_constants(&model, &config, Some(&lp), 1.0);
        // eps1 = min(500*0.4 - 180, (0.1*44 - 4)/45) = 0.4/45.
        let eps1 = c.eps1.unwrap();
        assert!((eps1 - 0.4 / 45.0).abs() < 1e-9, "eps1 = {eps1}");
        assert!((c.eps_slack.unwrap() - 0.3).abs() < 1e-8);
        assert!((c.delta.unwrap() - eps1).abs() < 1e-12);
        assert!(c.vq_ceiling.unwrap() > 0.0);
    }
}

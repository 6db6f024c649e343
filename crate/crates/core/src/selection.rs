//! Communication-user selection in an overloaded network that serves
//! communication, target sensing, and wireless power transfer at once.
//!
//! Three selectors share one evaluation pipeline:
//!
//! * [`select_none`] keeps every node active (the overload reference);
//! * [`select_user_centric`] lets each user decide alone from its own
//!   interference-blind SNR;
//! * [`select_topology_aware`] runs a greedy descent that deactivates one
//!   communication user at a time while the scalar objective improves.
//!
//! [`select_brute_force`] enumerates every communication-user activation
//! pattern and serves as the optimality oracle on small instances.
//!
//! Only communication users are selectable; the sensing target and the
//! charging users stay active in every result. A deactivation removes the
//! user's spectral-efficiency term but also removes its load from the
//! serving terminal's power split and its serving terminal's interference
//! footprint, which is what makes selection worthwhile when the network
//! is overloaded.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::channel::{db_to_linear, echo_gain_db_from_distances, linear_to_db, ChannelParams};
use crate::error::{Error, Result};
use crate::scenario::{NodeId, NodeRole};
use crate::topology::{ActivationPattern, EdgeKind, TopologyGraph};

/// Default SNR floor (dB) for the user-centric baseline.
pub const DEFAULT_QOS_FLOOR_DB: f64 = 0.0;

/// Default cap on exhaustive search.
pub const DEFAULT_BRUTE_FORCE_MAX_USERS: usize = 12;

fn default_weight() -> f64 {
    1.0
}

/// Weights of the three normalized objective terms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectiveWeights {
    #[serde(default = "default_weight")]
    pub w_se: f64,
    #[serde(default = "default_weight")]
    pub w_sens: f64,
    #[serde(default = "default_weight")]
    pub w_wpt: f64,
}

impl Default for ObjectiveWeights {
    fn default() -> Self {
        Self { w_se: 1.0, w_sens: 1.0, w_wpt: 1.0 }
    }
}

impl ObjectiveWeights {
    pub fn validate(&self) -> Result<()> {
        if self.w_se < 0.0 || self.w_sens < 0.0 || self.w_wpt < 0.0 {
            return Err(Error::InvalidConfig("objective weights must be >= 0".into()));
        }
        if self.w_se == 0.0 && self.w_sens == 0.0 && self.w_wpt == 0.0 {
            return Err(Error::InvalidConfig("objective weights must not all be zero".into()));
        }
        Ok(())
    }
}

/// Who serves whom, and how each terminal splits its transmit power.
///
/// Every entry references a live connectivity edge. `power_split` maps a
/// terminal to the fraction it allocates to each of its served peers
/// (communication users, charging users, and its sensing duty count
/// equally); per-terminal fractions sum to at most 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ServiceAssignment {
    /// comm user -> serving terminal.
    pub serving: BTreeMap<NodeId, NodeId>,
    pub sensing_tx: Option<NodeId>,
    pub sensing_rx: Vec<NodeId>,
    /// charging user -> terminals delivering power to it.
    pub wpt_sources: BTreeMap<NodeId, Vec<NodeId>>,
    /// terminal -> power fraction per served peer.
    pub power_split: BTreeMap<NodeId, f64>,
}

impl ServiceAssignment {
    fn split_of(&self, emt: NodeId) -> f64 {
        self.power_split.get(&emt).copied().unwrap_or(0.0)
    }
}

/// Best-receiver echo SINR; `outage` marks the no-receiver sentinel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SensingSinr {
    pub db: f64,
    pub outage: bool,
}

/// The three objective metrics of one activation pattern.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub sum_se: f64,
    pub sensing_sinr_db: f64,
    pub sensing_outage: bool,
    pub wpt_energy_j: f64,
}

/// Outcome of one selector: the pattern it chose, the induced assignment,
/// and the metrics recomputed from that pair.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelectionResult {
    pub pattern: ActivationPattern,
    pub assignment: ServiceAssignment,
    pub sum_se: f64,
    pub sensing_sinr_db: f64,
    pub sensing_outage: bool,
    pub wpt_energy_j: f64,
    pub scalar_objective: f64,
    pub n_active_users: usize,
}

/// Select the serving structure induced by an activation pattern:
/// each active communication user attaches to its highest-gain connected
/// active terminal (ties to the lowest terminal id); the sensing
/// transmitter is the active terminal with the highest gain to the target
/// and every other connected active terminal listens; each terminal splits
/// power equally across its served users, the charging users it reaches,
/// and its sensing duty. Users with no connected active terminal stay
/// unserved.
pub fn make_assignment(
    graph: &TopologyGraph,
    pattern: &ActivationPattern,
) -> Result<ServiceAssignment> {
    let live = graph.apply_activation(pattern)?;
    Ok(assignment_on_live(&live))
}

fn assignment_on_live(live: &TopologyGraph) -> ServiceAssignment {
    let mut serving = BTreeMap::new();
    let mut wpt_sources = BTreeMap::new();
    let mut load: BTreeMap<NodeId, usize> = BTreeMap::new();

    for node in live.nodes() {
        if !live.is_active(node.id) {
            continue;
        }
        match node.role {
            NodeRole::CommUser => {
                let mut best: Option<(f64, NodeId)> = None;
                for e in live.live_neighbors(node.id) {
                    if e.kind != EdgeKind::Connectivity {
                        continue;
                    }
                    let peer = e.other(node.id);
                    if !live.node(peer).role.is_emt() {
                        continue;
                    }
                    let better = match best {
                        None => true,
                        Some((g, id)) => e.gain_db > g || (e.gain_db == g && peer < id),
                    };
                    if better {
                        best = Some((e.gain_db, peer));
                    }
                }
                if let Some((_, emt)) = best {
                    serving.insert(node.id, emt);
                    *load.entry(emt).or_insert(0) += 1;
                }
            }
            NodeRole::ChargingUser => {
                let mut sources: Vec<NodeId> = live
                    .live_neighbors(node.id)
                    .filter(|e| e.kind == EdgeKind::Connectivity)
                    .map(|e| e.other(node.id))
                    .filter(|&p| live.node(p).role.is_emt())
                    .collect();
                sources.sort();
                for &src in &sources {
                    *load.entry(src).or_insert(0) += 1;
                }
                if !sources.is_empty() {
                    wpt_sources.insert(node.id, sources);
                }
            }
            _ => {}
        }
    }

    // Sensing roles around the lowest-id active target.
    let mut sensing_tx = None;
    let mut sensing_rx = Vec::new();
    let target = live
        .nodes()
        .iter()
        .find(|n| n.role == NodeRole::SensingTarget && live.is_active(n.id))
        .map(|n| n.id);
    if let Some(target) = target {
        let mut connected: Vec<(f64, NodeId)> = live
            .live_neighbors(target)
            .filter(|e| e.kind == EdgeKind::Connectivity)
            .map(|e| (e.gain_db, e.other(target)))
            .filter(|&(_, p)| live.node(p).role.is_emt())
            .collect();
        // highest gain first, lowest id on ties
        connected.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
        if let Some(&(_, tx)) = connected.first() {
            sensing_tx = Some(tx);
            *load.entry(tx).or_insert(0) += 1;
            sensing_rx = connected[1..].iter().map(|&(_, id)| id).collect();
            sensing_rx.sort();
        }
    }

    let power_split =
        load.into_iter().filter(|&(_, n)| n > 0).map(|(id, n)| (id, 1.0 / n as f64)).collect();

    ServiceAssignment { serving, sensing_tx, sensing_rx, wpt_sources, power_split }
}

/// Number of non-WPT beams a terminal transmits (served comm users plus
/// its sensing duty). WPT power is excluded everywhere interference is
/// accounted, since power transfer does not interfere with other services.
fn interfering_beams(assignment: &ServiceAssignment, emt: NodeId) -> usize {
    let comm = assignment.serving.values().filter(|&&e| e == emt).count();
    let sens = usize::from(assignment.sensing_tx == Some(emt));
    comm + sens
}

fn offbeam_gain_db(edge_gain_db: f64, params: &ChannelParams) -> f64 {
    edge_gain_db - params.mainlobe_gain_db() + params.offbeam_gain_db()
}

/// Strongest live edge gain from each interfering terminal toward a
/// victim node; a pair that carries both a connectivity and an
/// interference edge still counts once.
fn interferer_gains(
    live: &TopologyGraph,
    victim: NodeId,
    exclude: Option<NodeId>,
) -> BTreeMap<NodeId, f64> {
    let mut gains = BTreeMap::new();
    for e in live.live_neighbors(victim) {
        let peer = e.other(victim);
        if Some(peer) == exclude || !live.node(peer).role.is_emt() {
            continue;
        }
        gains
            .entry(peer)
            .and_modify(|g: &mut f64| *g = g.max(e.gain_db))
            .or_insert(e.gain_db);
    }
    gains
}

/// Interference power (mW) received at `victim` from every other active
/// terminal that keeps a live connectivity or interference edge to it,
/// counting only their non-WPT beams at off-beam gain.
fn interference_mw(
    live: &TopologyGraph,
    assignment: &ServiceAssignment,
    victim: NodeId,
    exclude: Option<NodeId>,
    params: &ChannelParams,
) -> f64 {
    let p_mw = db_to_linear(params.tx_power_dbm);
    let mut total = 0.0;
    for (peer, gain_db) in interferer_gains(live, victim, exclude) {
        let beams = interfering_beams(assignment, peer);
        if beams == 0 {
            continue;
        }
        let frac = assignment.split_of(peer);
        total += p_mw * frac * beams as f64 * db_to_linear(offbeam_gain_db(gain_db, params));
    }
    total
}

/// Sum spectral efficiency over served users: `sum log2(1 + SINR)`.
/// `graph` must already carry the activation the assignment was made for.
pub fn sum_spectral_efficiency(
    graph: &TopologyGraph,
    assignment: &ServiceAssignment,
    params: &ChannelParams,
) -> f64 {
    let p_mw = db_to_linear(params.tx_power_dbm);
    let noise = params.noise_mw();
    let mut sum = 0.0;
    for (&user, &emt) in &assignment.serving {
        let Some(edge) = graph.live_neighbors(user).find(|e| e.other(user) == emt && e.kind == EdgeKind::Connectivity) else {
            continue;
        };
        let signal = p_mw * assignment.split_of(emt) * db_to_linear(edge.gain_db);
        let interference = interference_mw(graph, assignment, user, Some(emt), params);
        sum += (1.0 + signal / (noise + interference)).log2();
    }
    sum
}

/// Echo SINR at the best sensing receiver, in dB. Returns the outage
/// sentinel (`-inf`, `outage = true`) when no receiver hears the target.
pub fn sensing_sinr(
    graph: &TopologyGraph,
    assignment: &ServiceAssignment,
    params: &ChannelParams,
) -> SensingSinr {
    let (Some(tx), false) = (assignment.sensing_tx, assignment.sensing_rx.is_empty()) else {
        return SensingSinr { db: f64::NEG_INFINITY, outage: true };
    };
    let target = graph
        .nodes()
        .iter()
        .find(|n| n.role == NodeRole::SensingTarget && graph.is_active(n.id))
        .map(|n| n.id);
    let Some(target) = target else {
        return SensingSinr { db: f64::NEG_INFINITY, outage: true };
    };
    let d_tx = graph.node(tx).pos.distance_to(&graph.node(target).pos);
    let p_mw = db_to_linear(params.tx_power_dbm);
    let noise = params.noise_mw();
    let f_tx = assignment.split_of(tx);

    let mut best = f64::NEG_INFINITY;
    for &rx in &assignment.sensing_rx {
        let d_rx = graph.node(target).pos.distance_to(&graph.node(rx).pos);
        let Ok(echo_db) = echo_gain_db_from_distances(d_tx, d_rx, params) else {
            continue;
        };
        let echo = p_mw * f_tx * db_to_linear(echo_db);
        // comm beams from other terminals leak into the receiver
        let mut interference = 0.0;
        for (peer, gain_db) in interferer_gains(graph, rx, None) {
            let comm_beams = assignment.serving.values().filter(|&&s| s == peer).count();
            if comm_beams == 0 {
                continue;
            }
            interference += p_mw
                * assignment.split_of(peer)
                * comm_beams as f64
                * db_to_linear(offbeam_gain_db(gain_db, params));
        }
        let sinr = echo / (noise + interference);
        best = best.max(linear_to_db(sinr));
    }
    if best.is_finite() {
        SensingSinr { db: best, outage: false }
    } else {
        SensingSinr { db: f64::NEG_INFINITY, outage: true }
    }
}

/// Total energy (J) harvested by charging users this slot:
/// `efficiency * sum over sources of P * fraction * steered gain * slot`.
pub fn wpt_energy(
    graph: &TopologyGraph,
    assignment: &ServiceAssignment,
    params: &ChannelParams,
) -> f64 {
    let p_w = params.tx_power_w();
    let mut received_w = 0.0;
    for (&user, sources) in &assignment.wpt_sources {
        for &src in sources {
            let Some(edge) = graph
                .live_neighbors(user)
                .find(|e| e.other(user) == src && e.kind == EdgeKind::Connectivity)
            else {
                continue;
            };
            received_w += p_w * assignment.split_of(src) * db_to_linear(edge.gain_db);
        }
    }
    params.wpt_efficiency * received_w * params.slot_duration_s
}

/// Evaluate a pattern end to end: activate, assign, and compute all three
/// metrics fresh.
pub fn evaluate_pattern(
    graph: &TopologyGraph,
    pattern: &ActivationPattern,
    params: &ChannelParams,
) -> Result<(ServiceAssignment, Metrics)> {
    let live = graph.apply_activation(pattern)?;
    let assignment = assignment_on_live(&live);
    let sum_se = sum_spectral_efficiency(&live, &assignment, params);
    let sens = sensing_sinr(&live, &assignment, params);
    let wpt = wpt_energy(&live, &assignment, params);
    Ok((
        assignment,
        Metrics {
            sum_se,
            sensing_sinr_db: sens.db,
            sensing_outage: sens.outage,
            wpt_energy_j: wpt,
        },
    ))
}

/// Baseline-normalized weighted sum:
/// `w_se * SE/SE0 + w_sens * SINR_lin/SINR0_lin + w_wpt * E/E0`.
/// A zero normalizer replaces its ratio with the raw metric (linear SINR
/// for the sensing term).
pub fn scalar_objective(metrics: &Metrics, baseline: &Metrics, weights: &ObjectiveWeights) -> f64 {
    let ratio = |value: f64, base: f64| if base > 0.0 { value / base } else { value };
    let sinr_lin = db_to_linear(metrics.sensing_sinr_db);
    let sinr0_lin = db_to_linear(baseline.sensing_sinr_db);
    weights.w_se * ratio(metrics.sum_se, baseline.sum_se)
        + weights.w_sens * ratio(sinr_lin, sinr0_lin)
        + weights.w_wpt * ratio(metrics.wpt_energy_j, baseline.wpt_energy_j)
}

fn result_from(
    graph: &TopologyGraph,
    pattern: ActivationPattern,
    params: &ChannelParams,
    weights: &ObjectiveWeights,
    baseline: &Metrics,
) -> Result<SelectionResult> {
    let (assignment, metrics) = evaluate_pattern(graph, &pattern, params)?;
    let n_active_users = graph
        .nodes()
        .iter()
        .filter(|n| n.role == NodeRole::CommUser && pattern.get(n.id))
        .count();
    Ok(SelectionResult {
        scalar_objective: scalar_objective(&metrics, baseline, weights),
        pattern,
        assignment,
        sum_se: metrics.sum_se,
        sensing_sinr_db: metrics.sensing_sinr_db,
        sensing_outage: metrics.sensing_outage,
        wpt_energy_j: metrics.wpt_energy_j,
        n_active_users,
    })
}

fn baseline_metrics(graph: &TopologyGraph, params: &ChannelParams) -> Result<Metrics> {
    let all = ActivationPattern::all_active(graph.node_count());
    Ok(evaluate_pattern(graph, &all, params)?.1)
}

/// Keep everything active. In an overloaded network this is the reference
/// the other selectors are normalized against.
pub fn select_none(
    graph: &TopologyGraph,
    params: &ChannelParams,
    weights: &ObjectiveWeights,
) -> Result<SelectionResult> {
    weights.validate()?;
    let baseline = baseline_metrics(graph, params)?;
    result_from(graph, ActivationPattern::all_active(graph.node_count()), params, weights, &baseline)
}

/// Each communication user independently stays active iff its own
/// best-link SNR — interference-blind, at full terminal power — reaches
/// `qos_floor_db`. The sensing target and charging users stay active.
pub fn select_user_centric(
    graph: &TopologyGraph,
    params: &ChannelParams,
    weights: &ObjectiveWeights,
    qos_floor_db: f64,
) -> Result<SelectionResult> {
    weights.validate()?;
    let baseline = baseline_metrics(graph, params)?;
    let mut pattern = ActivationPattern::all_active(graph.node_count());
    for node in graph.nodes() {
        if node.role != NodeRole::CommUser {
            continue;
        }
        let best_gain = graph
            .live_neighbors(node.id)
            .filter(|e| e.kind == EdgeKind::Connectivity && graph.node(e.other(node.id)).role.is_emt())
            .map(|e| e.gain_db)
            .fold(f64::NEG_INFINITY, f64::max);
        let snr_db = params.tx_power_dbm + best_gain - params.noise_dbm;
        // an edgeless user has -inf SNR and is deactivated
        if snr_db < qos_floor_db || snr_db.is_nan() {
            pattern.set(node.id, false);
        }
    }
    result_from(graph, pattern, params, weights, &baseline)
}

/// Greedy descent from all-active: repeatedly deactivate the single
/// communication user whose removal improves the scalar objective the
/// most (strict improvement only; ties to the lowest user id), until no
/// single deactivation helps.
pub fn select_topology_aware(
    graph: &TopologyGraph,
    weights: &ObjectiveWeights,
    params: &ChannelParams,
) -> Result<SelectionResult> {
    weights.validate()?;
    let baseline = baseline_metrics(graph, params)?;
    let users: Vec<NodeId> = graph.ids_where(|n| n.role == NodeRole::CommUser);

    let mut pattern = ActivationPattern::all_active(graph.node_count());
    let mut current =
        scalar_objective(&evaluate_pattern(graph, &pattern, params)?.1, &baseline, weights);

    loop {
        let mut best_move: Option<(f64, NodeId)> = None;
        for &u in &users {
            if !pattern.get(u) {
                continue;
            }
            let candidate = pattern.with(u, false);
            let obj =
                scalar_objective(&evaluate_pattern(graph, &candidate, params)?.1, &baseline, weights);
            // strict improvement; ascending id order makes ties keep the
            // lowest user id
            if obj > current && best_move.is_none_or(|(b, _)| obj > b) {
                best_move = Some((obj, u));
            }
        }
        match best_move {
            Some((obj, u)) => {
                pattern.set(u, false);
                current = obj;
            }
            None => break,
        }
    }
    result_from(graph, pattern, params, weights, &baseline)
}

/// Exhaustive oracle over all `2^k` communication-user patterns. Refuses
/// when more than `max_users` users are selectable. Ties go to the
/// pattern that deactivates lower-id users first.
pub fn select_brute_force(
    graph: &TopologyGraph,
    weights: &ObjectiveWeights,
    params: &ChannelParams,
    max_users: usize,
) -> Result<SelectionResult> {
    weights.validate()?;
    let users: Vec<NodeId> = graph.ids_where(|n| n.role == NodeRole::CommUser);
    if users.len() > max_users {
        return Err(Error::TooManyUsers { count: users.len(), max: max_users });
    }
    let baseline = baseline_metrics(graph, params)?;

    let mut best: Option<(f64, Vec<bool>)> = None;
    for mask in 0u64..(1u64 << users.len()) {
        let states: Vec<bool> = (0..users.len()).map(|i| mask & (1 << i) != 0).collect();
        let mut pattern = ActivationPattern::all_active(graph.node_count());
        for (i, &u) in users.iter().enumerate() {
            pattern.set(u, states[i]);
        }
        let obj =
            scalar_objective(&evaluate_pattern(graph, &pattern, params)?.1, &baseline, weights);
        let better = match &best {
            None => true,
            Some((b, b_states)) => obj > *b || (obj == *b && states < *b_states),
        };
        if better {
            best = Some((obj, states));
        }
    }

    let (_, states) = best.expect("at least the empty mask is evaluated");
    let mut pattern = ActivationPattern::all_active(graph.node_count());
    for (i, &u) in users.iter().enumerate() {
        pattern.set(u, states[i]);
    }
    result_from(graph, pattern, params, weights, &baseline)
}

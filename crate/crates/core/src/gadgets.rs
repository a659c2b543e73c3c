//! Generators for the lower-bound network games and their verification.
//!
//! * `pos_linear`: one convex edge that only costs `n - ε` when all `n`
//!   players use it. The unique equilibrium costs `n - ε`, the optimum 1.
//! * `pos_nharmonic`: a spine of `n/2` threshold edges shared by the `A`
//!   players and a constant-cost shortcut that the `B` players never take in
//!   equilibrium. PoS is `(n/2 + 1) H_{n/2} / (1 + ε)`.
//! * `poa_unbounded`: two players and a pair of supermodular edges. Which of
//!   two networks is emitted depends on how the protocol splits the pair cost.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::cost::SetCostFunction;
use crate::equilibrium::{analyze_with, EnumConfig, Ratio};
use crate::error::{Error, Result};
use crate::game::StrategyProfile;
use crate::network::{to_game, Edge, NetworkModel};
use crate::potential::harmonic;
use crate::protocol::{check_share_monotonicity, Protocol, WeightSystem};
use crate::rational::{ceil_to_int, format_rational, int, Rational};
use crate::set::{PlayerSet, MAX_PLAYERS};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GadgetKind {
    PosLinear,
    PosNHarmonic,
    PoaUnbounded,
}

impl GadgetKind {
    pub fn name(self) -> &'static str {
        match self {
            GadgetKind::PosLinear => "pos_linear",
            GadgetKind::PosNHarmonic => "pos_nharmonic",
            GadgetKind::PoaUnbounded => "poa_unbounded",
        }
    }
}

impl fmt::Display for GadgetKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for GadgetKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pos_linear" => Ok(GadgetKind::PosLinear),
            "pos_nharmonic" => Ok(GadgetKind::PosNHarmonic),
            "poa_unbounded" => Ok(GadgetKind::PoaUnbounded),
            other => Err(Error::InvalidGadget(format!("unknown gadget kind `{other}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Metric {
    PriceOfStability,
    PriceOfAnarchy,
}

impl Metric {
    pub fn name(self) -> &'static str {
        match self {
            Metric::PriceOfStability => "pos",
            Metric::PriceOfAnarchy => "poa",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Equal,
    AtLeast,
}

/// What verification must observe on a generated game.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Expectation {
    pub metric: Metric,
    pub relation: Relation,
    pub value: Rational,
    /// The game must have exactly one pure Nash equilibrium.
    pub unique_pne: bool,
    /// No equilibrium may route anyone over this edge.
    pub unused_edge: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Gadget {
    pub kind: GadgetKind,
    pub network: NetworkModel,
    pub expected: Expectation,
}

fn names<const N: usize>(v: [&str; N]) -> Vec<String> {
    v.iter().map(|s| s.to_string()).collect()
}

fn free(n: usize) -> SetCostFunction {
    SetCostFunction::zero(n)
}

fn validate_epsilon(eps: &Rational, upper: &Rational) -> Result<()> {
    if !eps.is_positive() || eps >= upper {
        return Err(Error::InvalidGadget(format!(
            "ε must lie in (0, {}), got {}",
            format_rational(upper),
            format_rational(eps)
        )));
    }
    Ok(())
}

/// Index of the smallest (or largest) share among `users`, lowest player on ties.
fn extreme_share(shares: &[Rational], users: PlayerSet, largest: bool) -> usize {
    let mut best = users.first().expect("non-empty user set");
    for i in users.iter().skip(1) {
        let better = if largest {
            shares[i] > shares[best]
        } else {
            shares[i] < shares[best]
        };
        if better {
            best = i;
        }
    }
    best
}

/// The convex-cost gadget under Shapley sharing; player 0 is the one with
/// the outside option.
pub fn build_pos_linear(n: usize, eps: &Rational) -> Result<Gadget> {
    build_pos_linear_for(n, eps, &Protocol::Shapley)
}

/// The convex-cost gadget for an arbitrary protocol: the player paying the
/// least on the expensive edge when everyone uses it gets the outside option
/// (a private edge costing 1); everyone else must take the shared edge.
pub fn build_pos_linear_for(n: usize, eps: &Rational, protocol: &Protocol) -> Result<Gadget> {
    if !(2..=MAX_PLAYERS).contains(&n) {
        return Err(Error::InvalidGadget(format!("n must be in 2..={MAX_PLAYERS}, got {n}")));
    }
    validate_epsilon(eps, &Rational::one())?;
    let total = int(n as i64) - eps;
    let shared = SetCostFunction::threshold(n, n, total.clone())?;
    let shares = protocol.shares(&shared, PlayerSet::full(n))?;
    let free_player = extreme_share(&shares, PlayerSet::full(n), false);

    let edges = vec![
        Edge::new("e1", "v", "t", shared),
        Edge::new("e2", "s_i", "t", SetCostFunction::linear(n, int(1))?),
        Edge::new("e3", "s_i", "v", free(n)),
        Edge::new("e4", "s", "v", free(n)),
    ];
    let terminals = (0..n)
        .map(|i| {
            let from = if i == free_player { "s_i" } else { "s" };
            (from.to_string(), "t".to_string())
        })
        .collect();
    let mut network = NetworkModel::new(names(["s", "s_i", "v", "t"]), edges, terminals);
    for i in (0..n).filter(|&i| i != free_player) {
        network.force(i, vec![names(["e1", "e4"])]);
    }
    Ok(Gadget {
        kind: GadgetKind::PosLinear,
        network,
        expected: Expectation {
            metric: Metric::PriceOfStability,
            relation: Relation::Equal,
            value: total,
            unique_pne: true,
            unused_edge: None,
        },
    })
}

/// `(n/2 + 1) H_{n/2} / (1 + ε)`.
pub fn nharmonic_pos(n: usize, eps: &Rational) -> Rational {
    let half = (n / 2) as u64;
    Rational::from_integer(BigInt::from(half + 1)) * harmonic(half) / (Rational::one() + eps)
}

/// Name of the constant-cost shortcut edge in the `pos_nharmonic` gadget.
pub fn nharmonic_shortcut(n: usize) -> String {
    format!("e{}", n / 2 + 1)
}

/// The harmonic-spine gadget for the generalized weighted Shapley protocol
/// with weight system `w`.
///
/// Players are ordered by block, heavier first within a block, lowest index
/// on ties; the first half forms `A`, the rest `B`. `B` players are then
/// peeled off the shortcut one at a time: among those still on it, the one
/// paying most gets the highest free slot.
pub fn build_pos_nharmonic(n: usize, eps: &Rational, w: &WeightSystem) -> Result<Gadget> {
    if !(2..=MAX_PLAYERS).contains(&n) || !n.is_multiple_of(2) {
        return Err(Error::InvalidGadget(format!(
            "n must be even and in 2..={MAX_PLAYERS}, got {n}"
        )));
    }
    validate_epsilon(eps, &Rational::new(1.into(), 2.into()))?;
    if w.players() != n {
        return Err(Error::InvalidGadget(format!(
            "weight system covers {} players, gadget has {n}",
            w.players()
        )));
    }
    let protocol = Protocol::WeightedShapley(w.clone());
    let half = n / 2;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        w.block_of(a)
            .cmp(&w.block_of(b))
            .then_with(|| w.weight(b).cmp(w.weight(a)))
            .then_with(|| a.cmp(&b))
    });
    let group_b: PlayerSet = order[half..].iter().copied().collect();

    let shortcut = SetCostFunction::constant(n, Rational::one() + eps)?;
    // The argument that B players leave the shortcut needs shares on it to
    // never drop when a user leaves; checked on the sets that can occur.
    if !check_share_monotonicity(&protocol, &shortcut, group_b)? {
        return Err(Error::NonMonotoneShares);
    }
    let mut slot_of = vec![0usize; n];
    let mut remaining = group_b;
    for slot in (1..=half).rev() {
        let shares = protocol.shares(&shortcut, remaining)?;
        let pick = extreme_share(&shares, remaining, true);
        slot_of[pick] = slot;
        remaining = remaining.without(pick);
    }

    let mut vertices = names(["s_A", "t_A", "lo", "hi"]);
    for j in 1..=half {
        vertices.extend([format!("u{j}"), format!("w{j}"), format!("sB{j}"), format!("tB{j}")]);
    }
    let mut edges = Vec::new();
    for j in 1..=half {
        let cost = SetCostFunction::threshold(n, half + 1, Rational::new(BigInt::from(half + 1), BigInt::from(j)))?;
        edges.push(Edge::new(format!("e{j}"), format!("u{j}"), format!("w{j}"), cost));
    }
    edges.push(Edge::new(nharmonic_shortcut(n), "lo", "hi", shortcut));
    edges.push(Edge::new("sA_u1", "s_A", "u1", free(n)));
    for j in 1..half {
        edges.push(Edge::new(
            format!("w{j}_u{}", j + 1),
            format!("w{j}"),
            format!("u{}", j + 1),
            free(n),
        ));
    }
    edges.push(Edge::new(format!("w{half}_tA"), format!("w{half}"), "t_A", free(n)));
    for j in 1..=half {
        edges.push(Edge::new(
            format!("sB{j}_u{j}"),
            format!("sB{j}"),
            format!("u{j}"),
            free(n),
        ));
        edges.push(Edge::new(format!("sB{j}_lo"), format!("sB{j}"), "lo", free(n)));
        edges.push(Edge::new(
            format!("w{j}_tB{j}"),
            format!("w{j}"),
            format!("tB{j}"),
            free(n),
        ));
        edges.push(Edge::new(format!("hi_tB{j}"), "hi", format!("tB{j}"), free(n)));
    }
    let terminals = (0..n)
        .map(|i| {
            if group_b.contains(i) {
                (format!("sB{}", slot_of[i]), format!("tB{}", slot_of[i]))
            } else {
                ("s_A".to_string(), "t_A".to_string())
            }
        })
        .collect();
    Ok(Gadget {
        kind: GadgetKind::PosNHarmonic,
        network: NetworkModel::new(vertices, edges, terminals),
        expected: Expectation {
            metric: Metric::PriceOfStability,
            relation: Relation::Equal,
            value: nharmonic_pos(n, eps),
            unique_pne: true,
            unused_edge: Some(nharmonic_shortcut(n)),
        },
    })
}

/// `2^20 · a`.
pub fn default_q_probe_max(a: &Rational) -> Rational {
    a * int(1 << 20)
}

/// The two-player pair cost: 1 for a single user, `q` for both.
pub fn pair_cost(q: &Rational) -> Result<SetCostFunction> {
    SetCostFunction::anonymous(vec![Rational::zero(), Rational::one(), q.clone()])
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PoaGadget {
    pub gadget: Gadget,
    /// 1: some probed pair cost makes both shares at least `4a`; 2: fallback.
    pub case: u8,
    pub q: Rational,
    /// Integer bound on the smaller pair share (case 2 only).
    pub z: Option<BigInt>,
    /// `(q, smaller share)` for every probed `q`.
    pub probes: Vec<(Rational, Rational)>,
}

fn min_pair_share(protocol: &Protocol, q: &Rational) -> Result<(Rational, usize)> {
    let shares = protocol.shares(&pair_cost(q)?, PlayerSet::full(2))?;
    let low = extreme_share(&shares, PlayerSet::full(2), false);
    Ok((shares[low].clone(), low))
}

/// Builds a two-player game whose price of anarchy under `protocol` is at
/// least `a`.
///
/// Probes `q = 2, 4, 8, ..` up to `q_probe_max`. If some probe makes the
/// smaller pair share reach `4a`, both players share an `s -> t` diamond
/// with that `q` and a direct arc costing `4a` per user (case 1). Otherwise
/// `z` bounds the smaller share, `q = max(a (z + 1), 2)`, and the player
/// with the smaller share gets a private `z` arc next to the pair edge
/// (case 2). Either way the claim is only trusted after [`verify_gadget`].
pub fn build_poa_unbounded(a: &Rational, protocol: &Protocol, q_probe_max: &Rational) -> Result<PoaGadget> {
    if a < &Rational::one() {
        return Err(Error::InvalidGadget(format!(
            "a must be at least 1, got {}",
            format_rational(a)
        )));
    }
    let two = int(2);
    if q_probe_max < &two {
        return Err(Error::InvalidGadget("q_probe_max must be at least 2".into()));
    }
    let target = a * int(4);
    let mut probes = Vec::new();
    let mut q = two.clone();
    while &q <= q_probe_max {
        let (m, _) = min_pair_share(protocol, &q)?;
        probes.push((q.clone(), m.clone()));
        if m >= target {
            return Ok(PoaGadget {
                gadget: diamond_gadget(a, &q)?,
                case: 1,
                q,
                z: None,
                probes,
            });
        }
        q *= &two;
    }

    let observed = probes
        .iter()
        .map(|(_, m)| m)
        .max()
        .cloned()
        .unwrap_or_else(Rational::zero);
    let mut z = ceil_to_int(&observed).max(BigInt::zero());
    let mut q;
    let mut low;
    let mut rounds = 0;
    loop {
        q = std::cmp::max(a * Rational::from_integer(&z + 1), two.clone());
        let (m, player) = min_pair_share(protocol, &q)?;
        low = player;
        rounds += 1;
        if m <= Rational::from_integer(z.clone()) || rounds == 64 {
            break;
        }
        z = ceil_to_int(&m);
    }
    Ok(PoaGadget {
        gadget: fallback_gadget(a, &q, &z, low)?,
        case: 2,
        q,
        z: Some(z),
        probes,
    })
}

fn diamond_gadget(a: &Rational, q: &Rational) -> Result<Gadget> {
    let pair = pair_cost(q)?;
    let unit = SetCostFunction::linear(2, Rational::one())?;
    let edges = vec![
        Edge::new("e1", "s", "v1", pair.clone()),
        Edge::new("x0", "v1", "v2", free(2)),
        Edge::new("x1", "s", "v2", unit.clone()),
        Edge::new("x2", "v1", "t", unit),
        Edge::new("e2", "v2", "t", pair),
        Edge::new("direct", "s", "t", SetCostFunction::linear(2, a * int(4))?),
    ];
    let terminals = vec![("s".to_string(), "t".to_string()); 2];
    Ok(Gadget {
        kind: GadgetKind::PoaUnbounded,
        network: NetworkModel::new(names(["s", "v1", "v2", "t"]), edges, terminals),
        expected: Expectation {
            metric: Metric::PriceOfAnarchy,
            relation: Relation::AtLeast,
            value: (a * int(4) + int(2)) / int(4),
            unique_pne: false,
            unused_edge: None,
        },
    })
}

fn fallback_gadget(a: &Rational, q: &Rational, z: &BigInt, low: usize) -> Result<Gadget> {
    let edges = vec![
        Edge::new("e1", "s2", "t", pair_cost(q)?),
        Edge::new("x0", "s1", "s2", free(2)),
        Edge::new(
            "direct",
            "s1",
            "t",
            SetCostFunction::linear(2, Rational::from_integer(z.clone()))?,
        ),
    ];
    let terminals = (0..2)
        .map(|i| {
            let from = if i == low { "s1" } else { "s2" };
            (from.to_string(), "t".to_string())
        })
        .collect();
    Ok(Gadget {
        kind: GadgetKind::PoaUnbounded,
        network: NetworkModel::new(names(["s1", "s2", "t"]), edges, terminals),
        expected: Expectation {
            metric: Metric::PriceOfAnarchy,
            relation: Relation::AtLeast,
            value: a.clone(),
            unique_pne: false,
            unused_edge: None,
        },
    })
}

/// Parameters for any of the three generators.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GadgetSpec {
    pub kind: GadgetKind,
    pub n: usize,
    pub eps: Rational,
    pub a: Rational,
    pub protocol: Protocol,
}

/// Builds the gadget described by `spec`. `pos_nharmonic` accepts Shapley
/// (as unit weights) or a weighted Shapley protocol.
pub fn build(spec: &GadgetSpec) -> Result<Gadget> {
    match spec.kind {
        GadgetKind::PosLinear => build_pos_linear_for(spec.n, &spec.eps, &spec.protocol),
        GadgetKind::PosNHarmonic => {
            let w = match &spec.protocol {
                Protocol::Shapley => WeightSystem::unit(spec.n.clamp(1, MAX_PLAYERS)),
                Protocol::WeightedShapley(w) => w.clone(),
                Protocol::Table(_) => {
                    return Err(Error::InvalidGadget(
                        "pos_nharmonic needs a (weighted) Shapley protocol".into(),
                    ))
                }
            };
            build_pos_nharmonic(spec.n, &spec.eps, &w)
        }
        GadgetKind::PoaUnbounded => {
            Ok(build_poa_unbounded(&spec.a, &spec.protocol, &default_q_probe_max(&spec.a))?.gadget)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GadgetReport {
    pub expected: Expectation,
    pub measured: Ratio,
    pub pne: Vec<StrategyProfile>,
    pub pne_costs: Vec<Rational>,
    pub optimum_cost: Rational,
    /// Human-readable reasons the expectation failed; empty when verified.
    pub failures: Vec<String>,
}

impl GadgetReport {
    pub fn verified(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Solves the generated game exhaustively and checks it against `expected`.
pub fn verify_gadget(network: &NetworkModel, expected: &Expectation, protocol: &Protocol) -> Result<GadgetReport> {
    verify_gadget_with(network, expected, protocol, &EnumConfig::default())
}

pub fn verify_gadget_with(
    network: &NetworkModel,
    expected: &Expectation,
    protocol: &Protocol,
    cfg: &EnumConfig,
) -> Result<GadgetReport> {
    let game = to_game(network)?;
    let report = analyze_with(&game, protocol, cfg)?;
    let measured = match expected.metric {
        Metric::PriceOfStability => report.pos.clone(),
        Metric::PriceOfAnarchy => report.poa.clone(),
    };
    let mut failures = Vec::new();
    let holds = match expected.relation {
        Relation::Equal => measured == Ratio::Finite(expected.value.clone()),
        Relation::AtLeast => measured.at_least(&expected.value),
    };
    if !holds {
        let op = match expected.relation {
            Relation::Equal => "=",
            Relation::AtLeast => ">=",
        };
        failures.push(format!(
            "{} = {measured}, expected {op} {}",
            expected.metric.name(),
            format_rational(&expected.value)
        ));
    }
    if expected.unique_pne && report.pne.len() != 1 {
        failures.push(format!("expected a unique equilibrium, found {}", report.pne.len()));
    }
    if let Some(edge) = &expected.unused_edge {
        let r = game.resource_index(edge)?;
        for entry in &report.pne {
            if !game.loads(&entry.profile)[r].is_empty() {
                failures.push(format!("equilibrium {:?} uses `{edge}`", entry.profile.0));
            }
        }
    }
    if !failures.is_empty() {
        let listing: Vec<String> = report
            .pne
            .iter()
            .map(|e| format!("{:?} cost {}", e.profile.0, format_rational(&e.cost)))
            .collect();
        failures.push(format!("equilibria: [{}]", listing.join(", ")));
    }
    Ok(GadgetReport {
        expected: expected.clone(),
        measured,
        pne_costs: report.pne.iter().map(|e| e.cost.clone()).collect(),
        pne: report.pne.into_iter().map(|e| e.profile).collect(),
        optimum_cost: report.optimum_cost,
        failures,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibrium::{
        best_response, best_response_dynamics, enumerate_pne, potential_minimizer, social_optimum,
    };
    use crate::game::social_cost;
    use crate::potential::potential;
    use crate::protocol::private_cost;
    use crate::rational::rat;

    #[test]
    fn pos_linear_small() {
        let g = build_pos_linear(2, &rat(1, 2)).unwrap();
        let game = to_game(&g.network).unwrap();
        // player 0 picks between {e2} and {e1, e3}; player 1 is forced
        assert_eq!(game.strategies(0), &[vec![1], vec![0, 2]]);
        assert_eq!(game.strategies(1), &[vec![0, 3]]);
        let on_e1 = StrategyProfile::new(vec![1, 0]);
        let on_e2 = StrategyProfile::new(vec![0, 0]);
        assert_eq!(social_cost(&game, &on_e1).unwrap(), rat(3, 2));
        assert_eq!(private_cost(&game, &Protocol::Shapley, &on_e1, 0).unwrap(), rat(3, 4));
        assert_eq!(private_cost(&game, &Protocol::Shapley, &on_e1, 1).unwrap(), rat(3, 4));
        assert_eq!(best_response(&game, &Protocol::Shapley, &on_e2, 0).unwrap(), 1);
        let (opt, cost) = social_optimum(&game).unwrap();
        assert_eq!((opt, cost), (on_e2.clone(), int(1)));
        assert_eq!(enumerate_pne(&game, &Protocol::Shapley).unwrap(), vec![on_e1.clone()]);
        let brd = best_response_dynamics(&game, &Protocol::Shapley, &on_e2, 10).unwrap();
        assert!(brd.converged);
        assert_eq!(brd.profile, on_e1);
        assert_eq!(potential(&game, &on_e1).unwrap(), rat(3, 4));
        assert_eq!(potential(&game, &on_e2).unwrap(), int(1));
        assert_eq!(potential_minimizer(&game).unwrap(), on_e1);
        let report = verify_gadget(&g.network, &g.expected, &Protocol::Shapley).unwrap();
        assert!(report.verified(), "{:?}", report.failures);
        assert_eq!(report.measured, Ratio::Finite(rat(3, 2)));
    }

    #[test]
    fn pos_linear_pne_cost() {
        let g = build_pos_linear(4, &rat(1, 4)).unwrap();
        let report = verify_gadget(&g.network, &g.expected, &Protocol::Shapley).unwrap();
        assert_eq!(report.pne_costs, vec![rat(15, 4)]);
        let g3 = build_pos_linear(3, &rat(1, 2)).unwrap();
        assert_eq!(g3.expected.value, rat(5, 2));
        assert!(verify_gadget(&g3.network, &g3.expected, &Protocol::Shapley)
            .unwrap()
            .verified());
    }

    #[test]
    fn pos_linear_cost_classes() {
        let g = build_pos_linear(4, &rat(1, 2)).unwrap();
        let e1 = &g.network.edges[0].cost;
        assert!(e1.is_anonymous());
        assert!(e1.classify().is_supermodular());
    }

    #[test]
    fn pos_linear_parameter_checks() {
        assert!(build_pos_linear(1, &rat(1, 2)).is_err());
        assert!(build_pos_linear(3, &int(1)).is_err());
        assert!(build_pos_linear(3, &int(0)).is_err());
        assert!(build_pos_linear(17, &rat(1, 2)).is_err());
    }

    #[test]
    fn pos_nharmonic_unit_weights() {
        let w = WeightSystem::unit(4);
        let g = build_pos_nharmonic(4, &rat(1, 4), &w).unwrap();
        assert_eq!(g.expected.value, rat(18, 5));
        let game = to_game(&g.network).unwrap();
        for i in 0..4 {
            let expected_paths = if i < 2 { 1 } else { 2 };
            assert_eq!(game.strategies(i).len(), expected_paths, "player {i}");
        }
        let protocol = Protocol::WeightedShapley(w);
        let report = verify_gadget(&g.network, &g.expected, &protocol).unwrap();
        assert!(report.verified(), "{:?}", report.failures);

        let g2 = build_pos_nharmonic(2, &rat(1, 4), &WeightSystem::unit(2)).unwrap();
        assert_eq!(g2.expected.value, rat(8, 5));
        let game2 = to_game(&g2.network).unwrap();
        let (_, opt) = social_optimum(&game2).unwrap();
        assert_eq!(opt, rat(5, 4));
        let r2 = verify_gadget(
            &g2.network,
            &g2.expected,
            &Protocol::WeightedShapley(WeightSystem::unit(2)),
        )
        .unwrap();
        assert!(r2.verified(), "{:?}", r2.failures);
    }

    #[test]
    fn pos_nharmonic_cost_classes() {
        let g = build_pos_nharmonic(4, &rat(1, 4), &WeightSystem::unit(4)).unwrap();
        let shortcut = g.network.edges.iter().find(|e| e.id == "e3").unwrap();
        assert_eq!(
            shortcut.cost.anonymous_values().unwrap(),
            vec![int(0), rat(5, 4), rat(5, 4), rat(5, 4), rat(5, 4)]
        );
    }

    #[test]
    fn pos_nharmonic_weighted_roles() {
        // blocks ({3}, {0, 1, 2}); within the second block heavier players first
        let w = WeightSystem::new(
            vec![int(1), int(3), int(2), int(1)],
            vec![PlayerSet::singleton(3), [0, 1, 2].into_iter().collect()],
        )
        .unwrap();
        let g = build_pos_nharmonic(4, &rat(1, 3), &w).unwrap();
        let t = &g.network.terminals;
        assert_eq!(t[3].0, "s_A");
        assert_eq!(t[1].0, "s_A");
        assert!(t[0].0.starts_with("sB") && t[2].0.starts_with("sB"));
        let report = verify_gadget(&g.network, &g.expected, &Protocol::WeightedShapley(w)).unwrap();
        assert!(report.verified(), "{:?}", report.failures);
    }

    #[test]
    fn pos_nharmonic_parameter_checks() {
        let w = WeightSystem::unit(4);
        assert!(build_pos_nharmonic(3, &rat(1, 4), &WeightSystem::unit(3)).is_err());
        assert!(build_pos_nharmonic(4, &rat(1, 2), &w).is_err());
        assert!(build_pos_nharmonic(4, &rat(1, 4), &WeightSystem::unit(6)).is_err());
    }

    #[test]
    fn poa_shapley_takes_first_case() {
        let a = int(2);
        let g = build_poa_unbounded(&a, &Protocol::Shapley, &default_q_probe_max(&a)).unwrap();
        assert_eq!(g.case, 1);
        assert_eq!(g.q, int(16));
        assert_eq!(g.gadget.expected.value, rat(5, 2));
        let report = verify_gadget(&g.gadget.network, &g.gadget.expected, &Protocol::Shapley).unwrap();
        assert!(report.verified(), "{:?}", report.failures);
        assert!(report.measured.at_least(&a));
        for edge in ["e1", "e2"] {
            let cost = &g.gadget.network.edges.iter().find(|e| e.id == edge).unwrap().cost;
            assert!(cost.classify().is_supermodular());
        }
    }

    #[test]
    fn poa_parameter_checks() {
        assert!(build_poa_unbounded(&rat(1, 2), &Protocol::Shapley, &int(64)).is_err());
        assert!(build_poa_unbounded(&int(2), &Protocol::Shapley, &int(1)).is_err());
        let g = build_poa_unbounded(&int(1), &Protocol::Shapley, &default_q_probe_max(&int(1))).unwrap();
        let report = verify_gadget(&g.gadget.network, &g.gadget.expected, &Protocol::Shapley).unwrap();
        assert!(report.measured.at_least(&int(1)));
    }

    #[test]
    fn poa_ordered_protocol_falls_back() {
        // Earliest block pays the joint dividend; player 0 in the last block pays 1 on the pair.
        let w = WeightSystem::new(
            vec![int(1), int(1)],
            vec![PlayerSet::singleton(1), PlayerSet::singleton(0)],
        )
        .unwrap();
        let protocol = Protocol::WeightedShapley(w);
        let a = int(3);
        let g = build_poa_unbounded(&a, &protocol, &int(256)).unwrap();
        assert_eq!(g.case, 2);
        assert_eq!(g.z, Some(BigInt::from(1)));
        assert_eq!(g.q, int(6));
        assert_eq!(g.gadget.network.terminals[0].0, "s1");
        let report = verify_gadget(&g.gadget.network, &g.gadget.expected, &protocol).unwrap();
        assert!(report.verified(), "{:?}", report.failures);
        assert_eq!(report.measured, Ratio::Finite(int(3)));
    }

    #[test]
    fn verification_reports_mismatch() {
        let g = build_pos_linear(3, &rat(1, 2)).unwrap();
        let mut wrong = g.expected.clone();
        wrong.value = int(3);
        let report = verify_gadget(&g.network, &wrong, &Protocol::Shapley).unwrap();
        assert!(!report.verified());
        assert!(report.failures.last().unwrap().starts_with("equilibria:"));
    }

    #[test]
    fn kinds_parse() {
        for kind in [
            GadgetKind::PosLinear,
            GadgetKind::PosNHarmonic,
            GadgetKind::PoaUnbounded,
        ] {
            assert_eq!(kind.name().parse::<GadgetKind>().unwrap(), kind);
        }
        assert!("nope".parse::<GadgetKind>().is_err());
    }
}

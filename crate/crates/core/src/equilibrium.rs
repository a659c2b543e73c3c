//! Pure Nash equilibria, social optima and the prices of anarchy and stability.
//!
//! Profiles are enumerated in lexicographic order of the choice vectors
//! (player 0 most significant), and every tie is broken toward the
//! lexicographically smallest profile, so results do not depend on the
//! execution mode.

use std::cmp::Ordering;
use std::fmt;
use std::sync::{Arc, OnceLock};

use num_traits::Zero;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::game::{GameModel, StrategyProfile};
use crate::potential::potential_of_loads;
use crate::protocol::Protocol;
use crate::rational::{format_rational, Rational};
use crate::set::PlayerSet;

pub const DEFAULT_MAX_PROFILES: u64 = 10_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EnumConfig {
    /// Largest profile space that exhaustive routines will walk.
    pub max_profiles: u64,
    pub execution: Execution,
}

impl Default for EnumConfig {
    fn default() -> Self {
        EnumConfig {
            max_profiles: DEFAULT_MAX_PROFILES,
            execution: Execution::default(),
        }
    }
}

impl EnumConfig {
    pub fn sequential() -> Self {
        EnumConfig {
            execution: Execution::Sequential,
            ..Self::default()
        }
    }
}

type ShareCell = OnceLock<Arc<[Rational]>>;

/// Mixed-radix indexing of `P_1 × .. × P_n`.
#[derive(Clone, Debug)]
pub struct ProfileSpace {
    radices: Vec<usize>,
    total: usize,
}

impl ProfileSpace {
    pub fn new(model: &GameModel, cap: u64) -> Result<Self> {
        let radices = model.strategy_counts();
        let total = model.profile_count();
        match total {
            Some(t) if t <= cap => Ok(ProfileSpace {
                radices,
                total: t as usize,
            }),
            _ => Err(Error::CapExceeded {
                profiles: total.map_or_else(|| "more than 2^64".to_string(), |t| t.to_string()),
                cap,
            }),
        }
    }

    pub fn len(&self) -> usize {
        self.total
    }

    pub fn is_empty(&self) -> bool {
        self.total == 0
    }

    pub fn decode(&self, mut index: usize) -> StrategyProfile {
        let mut choices = vec![0; self.radices.len()];
        for (slot, &radix) in choices.iter_mut().zip(&self.radices).rev() {
            *slot = index % radix;
            index /= radix;
        }
        StrategyProfile(choices)
    }

    pub fn encode(&self, profile: &StrategyProfile) -> usize {
        profile
            .0
            .iter()
            .zip(&self.radices)
            .fold(0, |acc, (&k, &radix)| acc * radix + k)
    }

    pub fn iter(&self) -> impl Iterator<Item = StrategyProfile> + '_ {
        (0..self.total).map(|i| self.decode(i))
    }
}

/// Protocol shares memoized per `(resource, user set)`. Valid because
/// protocols are uniform: shares depend on nothing else.
pub struct ShareCache<'a> {
    model: &'a GameModel,
    protocol: &'a Protocol,
    cells: Vec<OnceLock<Vec<ShareCell>>>,
}

impl<'a> ShareCache<'a> {
    pub fn new(model: &'a GameModel, protocol: &'a Protocol) -> Self {
        ShareCache {
            model,
            protocol,
            cells: (0..model.resources().len()).map(|_| OnceLock::new()).collect(),
        }
    }

    pub fn model(&self) -> &'a GameModel {
        self.model
    }

    pub fn protocol(&self) -> &'a Protocol {
        self.protocol
    }

    /// All players' shares of resource `r` with user set `users`.
    pub fn shares(&self, r: usize, users: PlayerSet) -> Result<Arc<[Rational]>> {
        let slots =
            self.cells[r].get_or_init(|| (0..1usize << self.model.players()).map(|_| OnceLock::new()).collect());
        let cell = &slots[users.index()];
        if let Some(shares) = cell.get() {
            return Ok(Arc::clone(shares));
        }
        let computed: Arc<[Rational]> = self.protocol.shares(&self.model.resource(r).cost, users)?.into();
        Ok(Arc::clone(cell.get_or_init(|| computed)))
    }

    /// Private cost of player `i` if she plays strategy `k` while everyone
    /// else plays as in `loads`.
    pub fn cost_if(&self, i: usize, k: usize, loads: &[PlayerSet]) -> Result<Rational> {
        let mut total = Rational::zero();
        for &r in self.model.strategy(i, k) {
            total += &self.shares(r, loads[r].with(i))?[i];
        }
        Ok(total)
    }

    /// Whether no player has a strictly improving unilateral deviation.
    pub fn is_pne(&self, profile: &StrategyProfile, loads: &[PlayerSet]) -> Result<bool> {
        for i in 0..self.model.players() {
            let current = profile.choice(i);
            let paid = self.cost_if(i, current, loads)?;
            for k in (0..self.model.strategies(i).len()).filter(|&k| k != current) {
                if self.cost_if(i, k, loads)? < paid {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    /// Cheapest strategy for `i`; keeps the current one on ties, otherwise
    /// the lowest index among the minimizers.
    pub fn best_response(&self, profile: &StrategyProfile, loads: &[PlayerSet], i: usize) -> Result<usize> {
        let current = profile.choice(i);
        let mut best = (self.cost_if(i, current, loads)?, current);
        for k in 0..self.model.strategies(i).len() {
            if k == current {
                continue;
            }
            let cost = self.cost_if(i, k, loads)?;
            if cost < best.0 {
                best = (cost, k);
            }
        }
        Ok(best.1)
    }
}

pub fn best_response(model: &GameModel, protocol: &Protocol, profile: &StrategyProfile, i: usize) -> Result<usize> {
    model.validate_profile(profile)?;
    if i >= model.players() {
        return Err(Error::OutOfRange(format!(
            "player {i} in a {}-player game",
            model.players()
        )));
    }
    ShareCache::new(model, protocol).best_response(profile, &model.loads(profile), i)
}

/// Order in which players get to move within a sweep.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Schedule {
    #[default]
    RoundRobin,
    /// A fresh seeded shuffle of the players for every sweep.
    Shuffled(u64),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BrdStep {
    pub player: usize,
    pub from: usize,
    pub to: usize,
    pub cost_before: Rational,
    pub cost_after: Rational,
    /// Potential after the move; only tracked under the Shapley protocol.
    pub potential: Option<Rational>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BrdOutcome {
    pub profile: StrategyProfile,
    pub converged: bool,
    pub sweeps: usize,
    pub trace: Vec<BrdStep>,
    pub initial_potential: Option<Rational>,
}

/// `10 · Π_i |P_i|`, saturating.
pub fn default_max_steps(model: &GameModel) -> usize {
    model
        .profile_count()
        .and_then(|c| c.checked_mul(10))
        .map_or(usize::MAX, |c| usize::try_from(c).unwrap_or(usize::MAX))
}

pub fn best_response_dynamics(
    model: &GameModel,
    protocol: &Protocol,
    start: &StrategyProfile,
    max_steps: usize,
) -> Result<BrdOutcome> {
    best_response_dynamics_with(model, protocol, start, max_steps, Schedule::RoundRobin)
}

/// Lets players switch to best responses, sweep after sweep, until a full
/// sweep changes nothing (`converged`) or `max_steps` switches were made.
pub fn best_response_dynamics_with(
    model: &GameModel,
    protocol: &Protocol,
    start: &StrategyProfile,
    max_steps: usize,
    schedule: Schedule,
) -> Result<BrdOutcome> {
    model.validate_profile(start)?;
    let cache = ShareCache::new(model, protocol);
    let track = protocol.is_shapley();
    let mut profile = start.clone();
    let mut loads = model.loads(&profile);
    let initial_potential = track.then(|| potential_of_loads(model, &loads));
    let mut trace = Vec::new();
    let mut order: Vec<usize> = (0..model.players()).collect();
    let mut rng = match schedule {
        Schedule::RoundRobin => None,
        Schedule::Shuffled(seed) => Some(ChaCha8Rng::seed_from_u64(seed)),
    };
    let mut sweeps = 0;
    loop {
        if let Some(rng) = rng.as_mut() {
            order.shuffle(rng);
        }
        sweeps += 1;
        let mut changed = false;
        for &i in &order {
            let from = profile.choice(i);
            let to = cache.best_response(&profile, &loads, i)?;
            if to == from {
                continue;
            }
            if trace.len() >= max_steps {
                return Ok(BrdOutcome {
                    profile,
                    converged: false,
                    sweeps,
                    trace,
                    initial_potential,
                });
            }
            let cost_before = cache.cost_if(i, from, &loads)?;
            let cost_after = cache.cost_if(i, to, &loads)?;
            profile.0[i] = to;
            loads = model.loads(&profile);
            trace.push(BrdStep {
                player: i,
                from,
                to,
                cost_before,
                cost_after,
                potential: track.then(|| potential_of_loads(model, &loads)),
            });
            changed = true;
        }
        if !changed {
            return Ok(BrdOutcome {
                profile,
                converged: true,
                sweeps,
                trace,
                initial_potential,
            });
        }
    }
}

pub fn enumerate_pne(model: &GameModel, protocol: &Protocol) -> Result<Vec<StrategyProfile>> {
    enumerate_pne_with(model, protocol, &EnumConfig::default())
}

/// Every pure Nash equilibrium, in lexicographic order.
pub fn enumerate_pne_with(model: &GameModel, protocol: &Protocol, cfg: &EnumConfig) -> Result<Vec<StrategyProfile>> {
    let space = ProfileSpace::new(model, cfg.max_profiles)?;
    let cache = ShareCache::new(model, protocol);
    exec::filter_map_range(cfg.execution, space.len(), |index| {
        let profile = space.decode(index);
        let loads = model.loads(&profile);
        Ok(cache.is_pne(&profile, &loads)?.then_some(profile))
    })
}

pub fn social_optimum(model: &GameModel) -> Result<(StrategyProfile, Rational)> {
    social_optimum_with(model, &EnumConfig::default())
}

/// A profile of minimum social cost, lexicographically first among ties.
pub fn social_optimum_with(model: &GameModel, cfg: &EnumConfig) -> Result<(StrategyProfile, Rational)> {
    let space = ProfileSpace::new(model, cfg.max_profiles)?;
    let (cost, index) = exec::min_by_key_range(cfg.execution, space.len(), |index| {
        Ok(model.cost_of_loads(&model.loads(&space.decode(index))))
    })?
    .expect("profile space is never empty");
    Ok((space.decode(index), cost))
}

pub fn potential_minimizer(model: &GameModel) -> Result<StrategyProfile> {
    potential_minimizer_with(model, &EnumConfig::default())
}

/// Global minimum of the Shapley potential, lexicographically first among ties.
pub fn potential_minimizer_with(model: &GameModel, cfg: &EnumConfig) -> Result<StrategyProfile> {
    let space = ProfileSpace::new(model, cfg.max_profiles)?;
    let (_, index) = exec::min_by_key_range(cfg.execution, space.len(), |index| {
        Ok(potential_of_loads(model, &model.loads(&space.decode(index))))
    })?
    .expect("profile space is never empty");
    Ok(space.decode(index))
}

/// An equilibrium-to-optimum cost ratio.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Ratio {
    Finite(Rational),
    Infinite,
    /// No pure Nash equilibrium exists.
    Undefined,
}

impl Ratio {
    /// `cost / optimum` with `0/0 = 1` and `c/0 = ∞` for `c > 0`.
    pub fn of(cost: &Rational, optimum: &Rational) -> Ratio {
        match (cost.is_zero(), optimum.is_zero()) {
            (true, true) => Ratio::Finite(Rational::from_integer(1.into())),
            (false, true) => Ratio::Infinite,
            _ => Ratio::Finite(cost / optimum),
        }
    }

    pub fn finite(&self) -> Option<&Rational> {
        match self {
            Ratio::Finite(r) => Some(r),
            _ => None,
        }
    }

    /// `self <= bound`; undefined ratios satisfy no bound.
    pub fn at_most(&self, bound: &Rational) -> bool {
        self.finite().is_some_and(|r| r <= bound)
    }

    /// `self >= bound`; an infinite ratio exceeds every bound.
    pub fn at_least(&self, bound: &Rational) -> bool {
        match self {
            Ratio::Finite(r) => r >= bound,
            Ratio::Infinite => true,
            Ratio::Undefined => false,
        }
    }

    fn compare_defined(&self, other: &Ratio) -> Option<Ordering> {
        match (self, other) {
            (Ratio::Finite(a), Ratio::Finite(b)) => Some(a.cmp(b)),
            (Ratio::Infinite, Ratio::Infinite) => Some(Ordering::Equal),
            (Ratio::Infinite, Ratio::Finite(_)) => Some(Ordering::Greater),
            (Ratio::Finite(_), Ratio::Infinite) => Some(Ordering::Less),
            _ => None,
        }
    }
}

impl PartialOrd for Ratio {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.compare_defined(other)
    }
}

impl fmt::Display for Ratio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ratio::Finite(r) => f.write_str(&format_rational(r)),
            Ratio::Infinite => f.write_str("inf"),
            Ratio::Undefined => f.write_str("undefined"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PneEntry {
    pub profile: StrategyProfile,
    pub cost: Rational,
    /// Potential value; only under the Shapley protocol.
    pub potential: Option<Rational>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AnalysisReport {
    pub protocol: String,
    pub pne: Vec<PneEntry>,
    pub optimum: StrategyProfile,
    pub optimum_cost: Rational,
    pub poa: Ratio,
    pub pos: Ratio,
}

impl AnalysisReport {
    pub fn worst_pne_cost(&self) -> Option<&Rational> {
        self.pne.iter().map(|e| &e.cost).max()
    }

    pub fn best_pne_cost(&self) -> Option<&Rational> {
        self.pne.iter().map(|e| &e.cost).min()
    }
}

pub fn analyze(model: &GameModel, protocol: &Protocol) -> Result<AnalysisReport> {
    analyze_with(model, protocol, &EnumConfig::default())
}

/// Equilibria, optimum and both ratios in one pass over the profile space.
pub fn analyze_with(model: &GameModel, protocol: &Protocol, cfg: &EnumConfig) -> Result<AnalysisReport> {
    let pne = enumerate_pne_with(model, protocol, cfg)?;
    let (optimum, optimum_cost) = social_optimum_with(model, cfg)?;
    let track = protocol.is_shapley();
    let pne: Vec<PneEntry> = pne
        .into_iter()
        .map(|profile| {
            let loads = model.loads(&profile);
            PneEntry {
                cost: model.cost_of_loads(&loads),
                potential: track.then(|| potential_of_loads(model, &loads)),
                profile,
            }
        })
        .collect();
    let costs: Vec<&Rational> = pne.iter().map(|e| &e.cost).collect();
    let poa = costs
        .iter()
        .max()
        .map_or(Ratio::Undefined, |c| Ratio::of(c, &optimum_cost));
    let pos = costs
        .iter()
        .min()
        .map_or(Ratio::Undefined, |c| Ratio::of(c, &optimum_cost));
    Ok(AnalysisReport {
        protocol: protocol.name().to_string(),
        pne,
        optimum,
        optimum_cost,
        poa,
        pos,
    })
}

/// Worst equilibrium over optimum.
pub fn price_of_anarchy(model: &GameModel, protocol: &Protocol) -> Result<Ratio> {
    Ok(analyze(model, protocol)?.poa)
}

/// Best equilibrium over optimum.
pub fn price_of_stability(model: &GameModel, protocol: &Protocol) -> Result<Ratio> {
    Ok(analyze(model, protocol)?.pos)
}

//! Resource allocation models and strategy profiles.

use std::collections::HashMap;

use num_traits::Zero;

use crate::cost::SetCostFunction;
use crate::error::{Error, Result};
use crate::rational::Rational;
use crate::set::{PlayerSet, MAX_PLAYERS};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Resource {
    pub id: String,
    pub cost: SetCostFunction,
}

impl Resource {
    pub fn new(id: impl Into<String>, cost: SetCostFunction) -> Self {
        Resource { id: id.into(), cost }
    }
}

/// Players, resources, one strategy set per player and one cost function per
/// resource. Strategies are stored as sorted lists of resource indices.
#[derive(Clone, Debug)]
pub struct GameModel {
    players: usize,
    resources: Vec<Resource>,
    strategies: Vec<Vec<Vec<usize>>>,
    index: HashMap<String, usize>,
}

impl PartialEq for GameModel {
    fn eq(&self, other: &Self) -> bool {
        self.players == other.players && self.resources == other.resources && self.strategies == other.strategies
    }
}

impl Eq for GameModel {}

impl GameModel {
    /// Builds a model with strategies given as resource indices.
    pub fn new(players: usize, resources: Vec<Resource>, strategies: Vec<Vec<Vec<usize>>>) -> Result<Self> {
        if players == 0 || players > MAX_PLAYERS {
            return Err(Error::InvalidModel(format!(
                "player count must be in 1..={MAX_PLAYERS}, got {players}"
            )));
        }
        if strategies.len() != players {
            return Err(Error::InvalidModel(format!(
                "expected strategy sets for {players} players, got {}",
                strategies.len()
            )));
        }
        let mut index = HashMap::with_capacity(resources.len());
        for (r, res) in resources.iter().enumerate() {
            if index.insert(res.id.clone(), r).is_some() {
                return Err(Error::InvalidModel(format!("duplicate resource id `{}`", res.id)));
            }
            if res.cost.arity() != players {
                return Err(Error::ArityMismatch {
                    arity: res.cost.arity(),
                    what: format!("resource `{}` in a {players}-player game", res.id),
                });
            }
        }
        let strategies = strategies
            .into_iter()
            .enumerate()
            .map(|(i, set)| {
                if set.is_empty() {
                    return Err(Error::InvalidModel(format!("player {i} has an empty strategy set")));
                }
                set.into_iter()
                    .map(|mut s| {
                        s.sort_unstable();
                        s.dedup();
                        match s.iter().find(|&&r| r >= resources.len()) {
                            Some(r) => Err(Error::InvalidModel(format!(
                                "player {i} references resource index {r}, only {} declared",
                                resources.len()
                            ))),
                            None => Ok(s),
                        }
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(GameModel {
            players,
            resources,
            strategies,
            index,
        })
    }

    /// Builds a model with strategies given as resource ids.
    pub fn from_ids(players: usize, resources: Vec<Resource>, strategies: Vec<Vec<Vec<String>>>) -> Result<Self> {
        let index: HashMap<&str, usize> = resources
            .iter()
            .enumerate()
            .map(|(r, res)| (res.id.as_str(), r))
            .collect();
        let strategies = strategies
            .into_iter()
            .map(|set| {
                set.into_iter()
                    .map(|s| {
                        s.iter()
                            .map(|id| {
                                index
                                    .get(id.as_str())
                                    .copied()
                                    .ok_or_else(|| Error::UnknownResource(id.clone()))
                            })
                            .collect::<Result<Vec<_>>>()
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(players, resources, strategies)
    }

    pub fn players(&self) -> usize {
        self.players
    }

    pub fn resources(&self) -> &[Resource] {
        &self.resources
    }

    pub fn resource(&self, r: usize) -> &Resource {
        &self.resources[r]
    }

    pub fn resource_index(&self, id: &str) -> Result<usize> {
        self.index
            .get(id)
            .copied()
            .ok_or_else(|| Error::UnknownResource(id.to_string()))
    }

    /// Strategy set of player `i`.
    pub fn strategies(&self, i: usize) -> &[Vec<usize>] {
        &self.strategies[i]
    }

    pub fn strategy(&self, i: usize, k: usize) -> &[usize] {
        &self.strategies[i][k]
    }

    /// Number of strategies per player.
    pub fn strategy_counts(&self) -> Vec<usize> {
        self.strategies.iter().map(Vec::len).collect()
    }

    /// `Π_i |P_i|`, or `None` on `u64` overflow.
    pub fn profile_count(&self) -> Option<u64> {
        self.strategies
            .iter()
            .try_fold(1u64, |acc, s| acc.checked_mul(s.len() as u64))
    }

    pub fn validate_profile(&self, profile: &StrategyProfile) -> Result<()> {
        if profile.0.len() != self.players {
            return Err(Error::InvalidProfile(format!(
                "profile has {} choices for {} players",
                profile.0.len(),
                self.players
            )));
        }
        for (i, &k) in profile.0.iter().enumerate() {
            if k >= self.strategies[i].len() {
                return Err(Error::InvalidProfile(format!(
                    "player {i} chooses strategy {k} of {}",
                    self.strategies[i].len()
                )));
            }
        }
        Ok(())
    }

    /// User set of every resource under `profile`, restricted to `live` players.
    pub fn loads_of_live(&self, profile: &StrategyProfile, live: PlayerSet) -> Vec<PlayerSet> {
        let mut loads = vec![PlayerSet::EMPTY; self.resources.len()];
        for i in live.iter().filter(|&i| i < self.players) {
            for &r in self.strategy(i, profile.0[i]) {
                loads[r] = loads[r].with(i);
            }
        }
        loads
    }

    /// User set `P^r` of every resource under `profile`.
    pub fn loads(&self, profile: &StrategyProfile) -> Vec<PlayerSet> {
        self.loads_of_live(profile, PlayerSet::full(self.players))
    }

    pub fn cost_of_loads(&self, loads: &[PlayerSet]) -> Rational {
        self.resources
            .iter()
            .zip(loads)
            .fold(Rational::zero(), |acc, (res, &users)| acc + res.cost.value(users))
    }
}

/// One strategy index per player.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StrategyProfile(pub Vec<usize>);

impl StrategyProfile {
    pub fn new(choices: Vec<usize>) -> Self {
        StrategyProfile(choices)
    }

    pub fn choices(&self) -> &[usize] {
        &self.0
    }

    pub fn choice(&self, i: usize) -> usize {
        self.0[i]
    }

    #[must_use]
    pub fn with_choice(&self, i: usize, k: usize) -> Self {
        let mut next = self.clone();
        next.0[i] = k;
        next
    }
}

/// The user set `P^r` of resource `id`.
pub fn users_of(model: &GameModel, profile: &StrategyProfile, id: &str) -> Result<PlayerSet> {
    model.validate_profile(profile)?;
    let r = model.resource_index(id)?;
    Ok((0..model.players())
        .filter(|&i| model.strategy(i, profile.choice(i)).contains(&r))
        .collect())
}

/// `Σ_r C^r(P^r)`.
pub fn social_cost(model: &GameModel, profile: &StrategyProfile) -> Result<Rational> {
    model.validate_profile(profile)?;
    Ok(model.cost_of_loads(&model.loads(profile)))
}

/// Social cost counting only the `live` players; the others are removed from the game.
pub fn social_cost_of_live(model: &GameModel, profile: &StrategyProfile, live: PlayerSet) -> Result<Rational> {
    model.validate_profile(profile)?;
    Ok(model.cost_of_loads(&model.loads_of_live(profile, live)))
}

//! JSON file formats: games, weight systems and share tables.
//!
//! Every rational is a `"p/q"` string. Player ids are 0-based indices.

use std::collections::BTreeMap;
use std::path::Path;

use arena_core::network::Edge;
use arena_core::protocol::TableEntry;
use arena_core::rational::{format_rational, parse_rational};
use arena_core::{
    GameModel, NetworkModel, PlayerSet, Protocol, Rational, Resource, SetCostFunction, TableProtocol, WeightSystem,
};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum CostSpec {
    /// Cost by number of users, `v_0 .. v_n`.
    Anonymous(Vec<String>),
    /// Cost per listed user set; unlisted sets cost 0.
    Table(Vec<SetCost>),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SetCost {
    pub set: Vec<usize>,
    pub cost: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResourceSpec {
    pub id: String,
    pub cost: CostSpec,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeSpec {
    pub id: String,
    pub from: String,
    pub to: String,
    /// Omitted for free edges.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cost: Option<CostSpec>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkSpec {
    pub vertices: Vec<String>,
    pub edges: Vec<EdgeSpec>,
    pub terminals: Vec<(String, String)>,
    /// Per player: `null`, or the allowed paths as edge-id lists.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub forced: Option<Vec<Option<Vec<Vec<String>>>>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GameFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub players: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resources: Option<Vec<ResourceSpec>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub strategies: Option<Vec<Vec<Vec<String>>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub network: Option<NetworkSpec>,
}

/// A parsed game file: either an explicit model or a network.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Game {
    Explicit(GameModel),
    Network(NetworkModel),
}

impl Game {
    pub fn model(&self) -> Result<GameModel, CliError> {
        match self {
            Game::Explicit(m) => Ok(m.clone()),
            Game::Network(n) => Ok(arena_core::network::to_game(n)?),
        }
    }

    pub fn players(&self) -> usize {
        match self {
            Game::Explicit(m) => m.players(),
            Game::Network(n) => n.players(),
        }
    }
}

fn rational(text: &str) -> Result<Rational, CliError> {
    parse_rational(text).map_err(|e| CliError::Input(e.to_string()))
}

fn player_set(ids: &[usize], n: usize) -> Result<PlayerSet, CliError> {
    let mut set = PlayerSet::EMPTY;
    for &i in ids {
        if i >= n {
            return Err(CliError::Input(format!("player {i} out of range for {n} players")));
        }
        if set.contains(i) {
            return Err(CliError::Input(format!("player {i} listed twice in a set")));
        }
        set = set.with(i);
    }
    Ok(set)
}

fn members(set: PlayerSet) -> Vec<usize> {
    set.iter().collect()
}

impl CostSpec {
    pub fn to_cost(&self, n: usize) -> Result<SetCostFunction, CliError> {
        match self {
            CostSpec::Anonymous(values) => {
                if values.len() != n + 1 {
                    return Err(CliError::Input(format!(
                        "anonymous cost needs {} values for {n} players, got {}",
                        n + 1,
                        values.len()
                    )));
                }
                let values = values.iter().map(|v| rational(v)).collect::<Result<Vec<_>, _>>()?;
                Ok(SetCostFunction::anonymous(values)?)
            }
            CostSpec::Table(entries) => {
                let mut seen = BTreeMap::new();
                for entry in entries {
                    let set = player_set(&entry.set, n)?;
                    if seen.insert(set, rational(&entry.cost)?).is_some() {
                        return Err(CliError::Input(format!("set {:?} listed twice", entry.set)));
                    }
                }
                Ok(SetCostFunction::from_entries(n, seen)?)
            }
        }
    }

    /// Anonymous when the cost only depends on the number of users, otherwise
    /// a table of the non-zero entries.
    pub fn from_cost(f: &SetCostFunction) -> Self {
        match f.anonymous_values() {
            Some(values) => CostSpec::Anonymous(values.iter().map(format_rational).collect()),
            None => CostSpec::Table(
                PlayerSet::full(f.arity())
                    .subsets()
                    .filter(|&s| *f.value(s) != Rational::from_integer(0.into()))
                    .map(|s| SetCost {
                        set: members(s),
                        cost: format_rational(f.value(s)),
                    })
                    .collect(),
            ),
        }
    }
}

impl GameFile {
    pub fn parse(text: &str) -> Result<Game, CliError> {
        let file: GameFile = serde_json::from_str(text).map_err(|e| CliError::Input(format!("game file: {e}")))?;
        file.into_game()
    }

    pub fn load(path: &Path) -> Result<Game, CliError> {
        Self::parse(&read(path)?)
    }

    pub fn into_game(self) -> Result<Game, CliError> {
        match (self.network, self.players, self.resources, self.strategies) {
            (Some(net), None, None, None) => Ok(Game::Network(network_from_spec(net)?)),
            (None, Some(n), Some(resources), Some(strategies)) => {
                if n == 0 || n > arena_core::MAX_PLAYERS {
                    return Err(CliError::Input(format!(
                        "players must be in 1..={}, got {n}",
                        arena_core::MAX_PLAYERS
                    )));
                }
                let resources = resources
                    .into_iter()
                    .map(|r| Ok(Resource::new(r.id, r.cost.to_cost(n)?)))
                    .collect::<Result<Vec<_>, CliError>>()?;
                Ok(Game::Explicit(GameModel::from_ids(n, resources, strategies)?))
            }
            _ => Err(CliError::Input(
                "game file needs either `network` or all of `players`, `resources`, `strategies`".into(),
            )),
        }
    }

    pub fn from_game(game: &Game) -> Self {
        match game {
            Game::Explicit(m) => GameFile {
                players: Some(m.players()),
                resources: Some(
                    m.resources()
                        .iter()
                        .map(|r| ResourceSpec {
                            id: r.id.clone(),
                            cost: CostSpec::from_cost(&r.cost),
                        })
                        .collect(),
                ),
                strategies: Some(
                    (0..m.players())
                        .map(|i| {
                            m.strategies(i)
                                .iter()
                                .map(|s| s.iter().map(|&r| m.resource(r).id.clone()).collect())
                                .collect()
                        })
                        .collect(),
                ),
                network: None,
            },
            Game::Network(net) => GameFile {
                players: None,
                resources: None,
                strategies: None,
                network: Some(network_to_spec(net)),
            },
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("game file serializes")
    }
}

fn network_from_spec(spec: NetworkSpec) -> Result<NetworkModel, CliError> {
    let n = spec.terminals.len();
    if n == 0 || n > arena_core::MAX_PLAYERS {
        return Err(CliError::Input(format!(
            "network needs 1..={} terminal pairs, got {n}",
            arena_core::MAX_PLAYERS
        )));
    }
    let edges = spec
        .edges
        .into_iter()
        .map(|e| {
            let cost = match e.cost {
                Some(c) => c.to_cost(n)?,
                None => SetCostFunction::zero(n),
            };
            Ok(Edge::new(e.id, e.from, e.to, cost))
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let mut network = NetworkModel::new(spec.vertices, edges, spec.terminals);
    if let Some(forced) = spec.forced {
        if forced.len() != n {
            return Err(CliError::Input(format!(
                "`forced` has {} entries for {n} players",
                forced.len()
            )));
        }
        for (i, f) in forced.into_iter().enumerate() {
            if let Some(paths) = f {
                network.force(i, paths);
            }
        }
    }
    Ok(network)
}

fn network_to_spec(net: &NetworkModel) -> NetworkSpec {
    let zero = SetCostFunction::zero(net.players());
    NetworkSpec {
        vertices: net.vertices.clone(),
        edges: net
            .edges
            .iter()
            .map(|e| EdgeSpec {
                id: e.id.clone(),
                from: e.from.clone(),
                to: e.to.clone(),
                cost: (e.cost != zero).then(|| CostSpec::from_cost(&e.cost)),
            })
            .collect(),
        terminals: net.terminals.clone(),
        forced: net.forced.iter().any(Option::is_some).then(|| net.forced.clone()),
    }
}

/// `{lambda: {"0": "1/1", ..}, blocks: [[0, 1], [2]]}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightFile {
    pub lambda: BTreeMap<String, String>,
    pub blocks: Vec<Vec<usize>>,
}

impl WeightFile {
    pub fn to_weights(&self) -> Result<WeightSystem, CliError> {
        let n = self.lambda.len();
        let mut weights = vec![None; n];
        for (key, value) in &self.lambda {
            let i: usize = key
                .parse()
                .map_err(|_| CliError::Input(format!("weight key `{key}` is not a player index")))?;
            if i >= n {
                return Err(CliError::Input(format!("weights must cover players 0..{n}, found {i}")));
            }
            weights[i] = Some(rational(value)?);
        }
        let weights = weights.into_iter().map(|w| w.expect("keys are distinct")).collect();
        let blocks = self
            .blocks
            .iter()
            .map(|b| player_set(b, n))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(WeightSystem::new(weights, blocks)?)
    }

    pub fn from_weights(w: &WeightSystem) -> Self {
        WeightFile {
            lambda: w
                .weights()
                .iter()
                .enumerate()
                .map(|(i, x)| (i.to_string(), format_rational(x)))
                .collect(),
            blocks: w.blocks().iter().map(|b| members(*b)).collect(),
        }
    }

    pub fn load(path: &Path) -> Result<WeightSystem, CliError> {
        let file: WeightFile =
            serde_json::from_str(&read(path)?).map_err(|e| CliError::Input(format!("weight file: {e}")))?;
        file.to_weights()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShareRow {
    pub set: Vec<usize>,
    /// One share per player.
    pub shares: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableEntrySpec {
    pub cost: CostSpec,
    pub shares: Vec<ShareRow>,
}

/// `{players, entries: [{cost, shares: [{set, shares}]}], fallback}` where
/// `fallback` is a protocol argument such as `"shapley"`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableFile {
    pub players: usize,
    pub entries: Vec<TableEntrySpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fallback: Option<String>,
}

impl TableFile {
    pub fn load(path: &Path) -> Result<Protocol, CliError> {
        let file: TableFile =
            serde_json::from_str(&read(path)?).map_err(|e| CliError::Input(format!("table file: {e}")))?;
        let base = path.parent().unwrap_or(Path::new("."));
        file.to_protocol(base)
    }

    pub fn to_protocol(&self, base: &Path) -> Result<Protocol, CliError> {
        let n = self.players;
        let entries = self
            .entries
            .iter()
            .map(|entry| {
                let cost = entry.cost.to_cost(n)?;
                let mut shares = BTreeMap::new();
                for row in &entry.shares {
                    if row.shares.len() != n {
                        return Err(CliError::Input(format!(
                            "share row for {:?} has {} values for {n} players",
                            row.set,
                            row.shares.len()
                        )));
                    }
                    let values = row.shares.iter().map(|s| rational(s)).collect::<Result<Vec<_>, _>>()?;
                    shares.insert(player_set(&row.set, n)?, values);
                }
                Ok(TableEntry { cost, shares })
            })
            .collect::<Result<Vec<_>, CliError>>()?;
        let fallback = match &self.fallback {
            Some(arg) => Some(ProtocolArg::parse(arg)?.resolve_in(base, n)?),
            None => None,
        };
        Ok(Protocol::Table(TableProtocol::new(entries, fallback)))
    }
}

/// `shapley`, `gws` (unit weights), `gws:<weight file>` or `table:<table file>`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ProtocolArg {
    Shapley,
    UnitWeights,
    Weights(String),
    Table(String),
}

impl ProtocolArg {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        match text.split_once(':') {
            None if text == "shapley" => Ok(ProtocolArg::Shapley),
            None if text == "gws" => Ok(ProtocolArg::UnitWeights),
            Some(("gws", path)) if !path.is_empty() => Ok(ProtocolArg::Weights(path.to_string())),
            Some(("table", path)) if !path.is_empty() => Ok(ProtocolArg::Table(path.to_string())),
            _ => Err(CliError::Input(format!(
                "unknown protocol `{text}`; use shapley, gws, gws:<file> or table:<file>"
            ))),
        }
    }

    pub fn resolve(&self, players: usize) -> Result<Protocol, CliError> {
        self.resolve_in(Path::new("."), players)
    }

    fn resolve_in(&self, base: &Path, players: usize) -> Result<Protocol, CliError> {
        let protocol = match self {
            ProtocolArg::Shapley => Protocol::Shapley,
            ProtocolArg::UnitWeights => Protocol::WeightedShapley(WeightSystem::new(
                vec![Rational::from_integer(1.into()); players],
                vec![PlayerSet::full(players)],
            )?),
            ProtocolArg::Weights(path) => Protocol::WeightedShapley(WeightFile::load(&base.join(path))?),
            ProtocolArg::Table(path) => TableFile::load(&base.join(path))?,
        };
        if let Protocol::WeightedShapley(w) = &protocol {
            if w.players() != players {
                return Err(CliError::Input(format!(
                    "weight system covers {} players, game has {players}",
                    w.players()
                )));
            }
        }
        Ok(protocol)
    }
}

pub(crate) fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

/// Comma-separated strategy indices, one per player.
pub fn parse_profile(text: &str) -> Result<Vec<usize>, CliError> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse()
                .map_err(|_| CliError::Profile(format!("`{text}` is not a comma-separated list of indices")))
        })
        .collect()
}

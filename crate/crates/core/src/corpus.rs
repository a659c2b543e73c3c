//! Seeded random games and the PoS/PoA bound suites run over them.
//!
//! Games have 1 to 4 players, 1 to 4 resources and 1 to 4 distinct strategies
//! per player. Costs come from one of three families: weighted coverage
//! (submodular), weighted "contains a group" terms plus a modular part
//! (supermodular), and monotone random tables (usually neither). Costs of
//! non-empty sets are always positive, so optima are positive too.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::cost::SetCostFunction;
use crate::equilibrium::{analyze_with, EnumConfig, Ratio};
use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::game::{GameModel, Resource, StrategyProfile};
use crate::potential::harmonic;
use crate::protocol::{Protocol, WeightSystem};
use crate::rational::{int, Rational};
use crate::set::PlayerSet;

pub const MAX_CORPUS_PLAYERS: usize = 4;
pub const MAX_CORPUS_RESOURCES: usize = 4;
pub const MAX_CORPUS_STRATEGIES: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CostClass {
    Submodular,
    Supermodular,
    Arbitrary,
}

impl CostClass {
    pub const ALL: [CostClass; 3] = [CostClass::Submodular, CostClass::Supermodular, CostClass::Arbitrary];

    pub fn name(self) -> &'static str {
        match self {
            CostClass::Submodular => "submodular",
            CostClass::Supermodular => "supermodular",
            CostClass::Arbitrary => "arbitrary",
        }
    }
}

impl fmt::Display for CostClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CostClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        CostClass::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::OutOfRange(format!("unknown cost class `{s}`")))
    }
}

fn small_positive(rng: &mut impl Rng) -> Rational {
    Rational::new(rng.gen_range(1..=10).into(), rng.gen_range(1..=4).into())
}

fn random_group(rng: &mut impl Rng, n: usize) -> PlayerSet {
    loop {
        let g = PlayerSet::from_bits(rng.gen_range(1..(1u32 << n)));
        if !g.is_empty() {
            return g;
        }
    }
}

/// `Σ_k w_k [S ∩ G_k ≠ ∅]`, with every player in some group.
pub fn random_coverage(rng: &mut impl Rng, n: usize) -> Result<SetCostFunction> {
    let mut groups: Vec<(PlayerSet, Rational)> = (0..rng.gen_range(1..=3))
        .map(|_| (random_group(rng, n), small_positive(rng)))
        .collect();
    let covered = groups.iter().fold(PlayerSet::EMPTY, |acc, (g, _)| acc.union(*g));
    for i in PlayerSet::full(n).difference(covered).iter() {
        groups.push((PlayerSet::singleton(i), small_positive(rng)));
    }
    let values = PlayerSet::full(n)
        .subsets()
        .map(|s| {
            groups
                .iter()
                .filter(|(g, _)| !g.intersection(s).is_empty())
                .map(|(_, w)| w.clone())
                .sum()
        })
        .collect();
    SetCostFunction::from_table(n, values)
}

/// `Σ_i a_i [i ∈ S] + Σ_k w_k [G_k ⊆ S]`.
pub fn random_complementary(rng: &mut impl Rng, n: usize) -> Result<SetCostFunction> {
    let per_user: Vec<Rational> = (0..n).map(|_| small_positive(rng)).collect();
    let groups: Vec<(PlayerSet, Rational)> = (0..rng.gen_range(1..=3))
        .map(|_| (random_group(rng, n), small_positive(rng)))
        .collect();
    let values = PlayerSet::full(n)
        .subsets()
        .map(|s| {
            let modular: Rational = s.iter().map(|i| per_user[i].clone()).sum();
            let joint: Rational = groups
                .iter()
                .filter(|(g, _)| g.is_subset_of(s))
                .map(|(_, w)| w.clone())
                .sum();
            modular + joint
        })
        .collect();
    SetCostFunction::from_table(n, values)
}

/// A random non-decreasing table: each set costs at least as much as its
/// largest one-smaller subset, plus a random increment.
pub fn random_monotone(rng: &mut impl Rng, n: usize) -> Result<SetCostFunction> {
    let size = 1usize << n;
    let mut values = vec![Rational::from_integer(0.into()); size];
    for bits in 1..size {
        let s = PlayerSet::from_bits(bits as u32);
        let floor = s.iter().map(|i| values[s.without(i).index()].clone()).max().unwrap();
        let lowest = if s.len() == 1 { 1 } else { 0 };
        let step = Rational::new(rng.gen_range(lowest..=6).into(), rng.gen_range(1..=3).into());
        values[bits] = floor + step;
    }
    SetCostFunction::from_table(n, values)
}

pub fn random_cost(rng: &mut impl Rng, n: usize, class: CostClass) -> Result<SetCostFunction> {
    match class {
        CostClass::Submodular => random_coverage(rng, n),
        CostClass::Supermodular => random_complementary(rng, n),
        CostClass::Arbitrary => random_monotone(rng, n),
    }
}

/// Random positive weights and a random ordered partition of `0..n`.
pub fn random_weight_system(rng: &mut impl Rng, n: usize) -> Result<WeightSystem> {
    let weights = (0..n).map(|_| small_positive(rng)).collect();
    let mut players: Vec<usize> = (0..n).collect();
    players.shuffle(rng);
    let mut blocks = Vec::new();
    let mut rest = &players[..];
    while !rest.is_empty() {
        let take = rng.gen_range(1..=rest.len());
        blocks.push(rest[..take].iter().copied().collect());
        rest = &rest[take..];
    }
    WeightSystem::new(weights, blocks)
}

/// A random game whose resource costs all come from `class`.
pub fn random_game(rng: &mut impl Rng, class: CostClass) -> Result<GameModel> {
    let n = rng.gen_range(1..=MAX_CORPUS_PLAYERS);
    let m = rng.gen_range(1..=MAX_CORPUS_RESOURCES);
    let resources = (0..m)
        .map(|r| Ok(Resource::new(format!("r{r}"), random_cost(rng, n, class)?)))
        .collect::<Result<Vec<_>>>()?;
    let mut all: Vec<u32> = (1..(1u32 << m)).collect();
    let strategies = (0..n)
        .map(|_| {
            all.shuffle(rng);
            let k = rng.gen_range(1..=MAX_CORPUS_STRATEGIES.min(all.len()));
            let mut chosen = all[..k].to_vec();
            chosen.sort_unstable();
            chosen
                .into_iter()
                .map(|mask| (0..m).filter(|r| mask & (1 << r) != 0).collect())
                .collect()
        })
        .collect();
    GameModel::new(n, resources, strategies)
}

#[derive(Clone, Debug)]
pub struct CorpusGame {
    pub index: usize,
    pub class: CostClass,
    pub model: GameModel,
}

impl CorpusGame {
    pub fn all_submodular(&self) -> bool {
        self.model.resources().iter().all(|r| r.cost.classify().is_submodular())
    }

    pub fn all_supermodular(&self) -> bool {
        self.model
            .resources()
            .iter()
            .all(|r| r.cost.classify().is_supermodular())
    }
}

fn game_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

/// `count` games cycling through the three cost classes. Game `k` depends
/// only on `seed` and `k`.
pub fn corpus(seed: u64, count: usize) -> Result<Vec<CorpusGame>> {
    (0..count)
        .map(|index| {
            let class = CostClass::ALL[index % 3];
            let model = random_game(&mut game_rng(seed, index), class)?;
            Ok(CorpusGame { index, class, model })
        })
        .collect()
}

/// `count` games of a single cost class.
pub fn corpus_of_class(seed: u64, count: usize, class: CostClass) -> Result<Vec<CorpusGame>> {
    (0..count)
        .map(|index| {
            let model = random_game(&mut game_rng(seed, index), class)?;
            Ok(CorpusGame { index, class, model })
        })
        .collect()
}

/// A uniformly random profile of `model`.
pub fn random_profile(rng: &mut impl Rng, model: &GameModel) -> StrategyProfile {
    StrategyProfile::new(
        model
            .strategy_counts()
            .into_iter()
            .map(|k| rng.gen_range(0..k))
            .collect(),
    )
}

/// The Shapley bounds checked against the corpus.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Suite {
    /// All costs submodular: PoS ≤ H_n.
    PosSubmodular,
    /// All costs supermodular: PoS ≤ n.
    PosSupermodular,
    /// Any non-decreasing costs: PoS ≤ n H_n.
    PosArbitrary,
    /// All costs submodular: PoA ≤ n.
    PoaSubmodular,
}

impl Suite {
    pub const ALL: [Suite; 4] = [
        Suite::PosSubmodular,
        Suite::PosSupermodular,
        Suite::PosArbitrary,
        Suite::PoaSubmodular,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::PosSubmodular => "pos_submodular",
            Suite::PosSupermodular => "pos_supermodular",
            Suite::PosArbitrary => "pos_arbitrary",
            Suite::PoaSubmodular => "poa_submodular",
        }
    }

    /// Suites whose hypothesis is the given generator class.
    pub fn for_class(class: CostClass) -> &'static [Suite] {
        match class {
            CostClass::Submodular => &[Suite::PosSubmodular, Suite::PoaSubmodular],
            CostClass::Supermodular => &[Suite::PosSupermodular],
            CostClass::Arbitrary => &[Suite::PosArbitrary],
        }
    }

    pub fn applies(self, game: &CorpusGame) -> bool {
        match self {
            Suite::PosSubmodular | Suite::PoaSubmodular => game.all_submodular(),
            Suite::PosSupermodular => game.all_supermodular(),
            Suite::PosArbitrary => true,
        }
    }

    pub fn bound(self, n: usize) -> Rational {
        let h = harmonic(n as u64);
        match self {
            Suite::PosSubmodular => h,
            Suite::PosSupermodular | Suite::PoaSubmodular => int(n as i64),
            Suite::PosArbitrary => int(n as i64) * h,
        }
    }

    fn is_poa(self) -> bool {
        self == Suite::PoaSubmodular
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub game: usize,
    pub players: usize,
    pub measured: Ratio,
    pub bound: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SuiteResult {
    pub suite: Suite,
    pub checked: usize,
    pub violations: Vec<Violation>,
}

impl SuiteResult {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Analyzes every game under Shapley and checks each applicable suite.
/// Games are spread over the worker pool in parallel mode; each single
/// analysis then runs sequentially.
pub fn run_bound_suites(games: &[CorpusGame], suites: &[Suite], cfg: &EnumConfig) -> Result<Vec<SuiteResult>> {
    let inner = EnumConfig {
        execution: Execution::Sequential,
        ..*cfg
    };
    let reports = exec::map_slice(cfg.execution, games, |game| {
        if suites.iter().any(|s| s.applies(game)) {
            analyze_with(&game.model, &Protocol::Shapley, &inner).map(Some)
        } else {
            Ok(None)
        }
    });
    let mut results: Vec<SuiteResult> = suites
        .iter()
        .map(|&suite| SuiteResult {
            suite,
            checked: 0,
            violations: Vec::new(),
        })
        .collect();
    for (game, report) in games.iter().zip(reports) {
        let Some(report) = report? else { continue };
        let n = game.model.players();
        for result in results.iter_mut().filter(|r| r.suite.applies(game)) {
            result.checked += 1;
            let measured = if result.suite.is_poa() {
                &report.poa
            } else {
                &report.pos
            };
            let bound = result.suite.bound(n);
            if !measured.at_most(&bound) {
                result.violations.push(Violation {
                    game: game.index,
                    players: n,
                    measured: measured.clone(),
                    bound,
                });
            }
        }
    }
    Ok(results)
}

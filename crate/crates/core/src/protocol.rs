//! Uniform cost-sharing protocols.
//!
//! A protocol splits `C(S)` among the users `S` of a resource. Every rule
//! here reads only the cost function and the user set, so uniformity holds
//! by construction. Budget balance is verified, not assumed: see
//! [`check_budget_balance`].

use std::collections::BTreeMap;
use std::sync::OnceLock;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

use crate::cost::SetCostFunction;
use crate::error::{Error, Result};
use crate::game::{GameModel, StrategyProfile};
use crate::rational::{factorial, format_rational, Rational};
use crate::set::{PlayerSet, MAX_PLAYERS};

/// Largest user set accepted by [`shapley_share_by_permutations`].
pub const PERMUTATION_CAP: usize = 8;

/// Positive player weights `λ` and an ordered partition `(S_1, .., S_m)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightSystem {
    weights: Vec<Rational>,
    blocks: Vec<PlayerSet>,
    block_of: Vec<usize>,
}

impl WeightSystem {
    pub fn new(weights: Vec<Rational>, blocks: Vec<PlayerSet>) -> Result<Self> {
        let n = weights.len();
        if n == 0 || n > MAX_PLAYERS {
            return Err(Error::InvalidWeights(format!("player count {n} out of range")));
        }
        if let Some(i) = weights.iter().position(|w| !w.is_positive()) {
            return Err(Error::InvalidWeights(format!(
                "weight of player {i} must be positive, got {}",
                format_rational(&weights[i])
            )));
        }
        let mut block_of = vec![usize::MAX; n];
        for (k, block) in blocks.iter().enumerate() {
            if block.is_empty() {
                return Err(Error::InvalidWeights(format!("block {k} is empty")));
            }
            for i in block.iter() {
                if i >= n {
                    return Err(Error::InvalidWeights(format!("block {k} names unknown player {i}")));
                }
                if block_of[i] != usize::MAX {
                    return Err(Error::InvalidWeights(format!("player {i} appears in two blocks")));
                }
                block_of[i] = k;
            }
        }
        if let Some(i) = block_of.iter().position(|&k| k == usize::MAX) {
            return Err(Error::InvalidWeights(format!("player {i} is in no block")));
        }
        Ok(WeightSystem {
            weights,
            blocks,
            block_of,
        })
    }

    /// Unit weights and a single block; the protocol then equals Shapley.
    pub fn unit(n: usize) -> Self {
        Self::new(vec![Rational::from_integer(1.into()); n], vec![PlayerSet::full(n)]).expect("unit weight system")
    }

    pub fn players(&self) -> usize {
        self.weights.len()
    }

    pub fn weight(&self, i: usize) -> &Rational {
        &self.weights[i]
    }

    pub fn weights(&self) -> &[Rational] {
        &self.weights
    }

    pub fn blocks(&self) -> &[PlayerSet] {
        &self.blocks
    }

    pub fn block_of(&self, i: usize) -> usize {
        self.block_of[i]
    }

    /// `T̄ = T ∩ S_k` for the first block `S_k` meeting `T`.
    pub fn leading_part(&self, t: PlayerSet) -> PlayerSet {
        self.blocks
            .iter()
            .map(|b| b.intersection(t))
            .find(|part| !part.is_empty())
            .unwrap_or(PlayerSet::EMPTY)
    }
}

/// Explicit shares per `(cost function, user set)`, with an optional fallback
/// protocol for pairs the table does not list.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct TableProtocol {
    pub entries: Vec<TableEntry>,
    pub fallback: Option<Box<Protocol>>,
}

/// Shares for one cost function: user set -> one share per player (length = arity).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TableEntry {
    pub cost: SetCostFunction,
    pub shares: BTreeMap<PlayerSet, Vec<Rational>>,
}

impl TableProtocol {
    pub fn new(entries: Vec<TableEntry>, fallback: Option<Protocol>) -> Self {
        TableProtocol {
            entries,
            fallback: fallback.map(Box::new),
        }
    }

    fn lookup(&self, f: &SetCostFunction, users: PlayerSet) -> Option<&[Rational]> {
        self.entries
            .iter()
            .find(|e| e.cost == *f)
            .and_then(|e| e.shares.get(&users))
            .map(Vec::as_slice)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Protocol {
    Shapley,
    WeightedShapley(WeightSystem),
    Table(TableProtocol),
}

impl Protocol {
    pub fn name(&self) -> &'static str {
        match self {
            Protocol::Shapley => "shapley",
            Protocol::WeightedShapley(_) => "gws",
            Protocol::Table(_) => "table",
        }
    }

    pub fn is_shapley(&self) -> bool {
        matches!(self, Protocol::Shapley)
    }

    /// Share of player `i` in `C(users)`.
    pub fn share(&self, f: &SetCostFunction, users: PlayerSet, i: usize) -> Result<Rational> {
        match self {
            Protocol::Shapley => shapley_share(f, users, i),
            Protocol::WeightedShapley(w) => gws_share(f, users, i, w),
            Protocol::Table(table) => {
                check_arity(f, users, i)?;
                match table.lookup(f, users) {
                    Some(shares) => Ok(shares.get(i).cloned().unwrap_or_else(Rational::zero)),
                    None => match &table.fallback {
                        Some(p) => p.share(f, users, i),
                        None => Err(Error::NoTableEntry(users)),
                    },
                }
            }
        }
    }

    /// Shares of all `arity` players in `C(users)`.
    pub fn shares(&self, f: &SetCostFunction, users: PlayerSet) -> Result<Vec<Rational>> {
        match self {
            Protocol::Shapley => shapley_shares(f, users),
            Protocol::WeightedShapley(w) => gws_shares(f, users, w),
            Protocol::Table(_) => (0..f.arity()).map(|i| self.share(f, users, i)).collect(),
        }
    }
}

fn check_arity(f: &SetCostFunction, users: PlayerSet, i: usize) -> Result<()> {
    if !f.covers(users) {
        return Err(Error::ArityMismatch {
            arity: f.arity(),
            what: format!("user set {users:?}"),
        });
    }
    if i >= f.arity() {
        return Err(Error::ArityMismatch {
            arity: f.arity(),
            what: format!("player {i}"),
        });
    }
    Ok(())
}

/// `shapley_weight(k, t) = t! (k - t - 1)! / k!`, the probability that a given
/// user of a `k`-set arrives right after exactly a given `t`-set.
fn shapley_weight(k: usize, t: usize) -> &'static Rational {
    static TABLE: OnceLock<Vec<Vec<Rational>>> = OnceLock::new();
    let table = TABLE.get_or_init(|| {
        let fact: Vec<BigInt> = (0..=MAX_PLAYERS).map(factorial).collect();
        (0..=MAX_PLAYERS)
            .map(|k| {
                (0..k)
                    .map(|t| Rational::new(&fact[t] * &fact[k - t - 1], fact[k].clone()))
                    .collect()
            })
            .collect()
    });
    &table[k][t]
}

/// Shapley share of `i` in `C(users)`: the marginal cost of `i` averaged
/// over all arrival orders, evaluated as the weighted sum over subsets
/// `T ⊆ users \ {i}`.
pub fn shapley_share(f: &SetCostFunction, users: PlayerSet, i: usize) -> Result<Rational> {
    check_arity(f, users, i)?;
    if !users.contains(i) {
        return Ok(Rational::zero());
    }
    let k = users.len();
    let others = users.without(i);
    let mut total = Rational::zero();
    for t in others.subsets() {
        let marginal = f.value(t.with(i)) - f.value(t);
        if !marginal.is_zero() {
            total += shapley_weight(k, t.len()) * marginal;
        }
    }
    Ok(total)
}

pub fn shapley_shares(f: &SetCostFunction, users: PlayerSet) -> Result<Vec<Rational>> {
    if !f.covers(users) {
        return Err(Error::ArityMismatch {
            arity: f.arity(),
            what: format!("user set {users:?}"),
        });
    }
    (0..f.arity()).map(|i| shapley_share(f, users, i)).collect()
}

/// Shapley share by literal enumeration of all `|users|!` arrival orders.
/// Exponential; meant as an oracle for [`shapley_share`].
pub fn shapley_share_by_permutations(f: &SetCostFunction, users: PlayerSet, i: usize) -> Result<Rational> {
    check_arity(f, users, i)?;
    if users.len() > PERMUTATION_CAP {
        return Err(Error::PermutationCap {
            size: users.len(),
            cap: PERMUTATION_CAP,
        });
    }
    if !users.contains(i) {
        return Ok(Rational::zero());
    }
    let mut order: Vec<usize> = users.iter().collect();
    let mut total = Rational::zero();
    let mut count = 0u64;
    for_each_permutation(&mut order, &mut |perm| {
        let before: PlayerSet = perm.iter().take_while(|&&j| j != i).copied().collect();
        total += f.value(before.with(i)) - f.value(before);
        count += 1;
    });
    Ok(total / Rational::from_integer(count.into()))
}

/// Heap's algorithm.
pub(crate) fn for_each_permutation<F: FnMut(&[usize])>(items: &mut [usize], visit: &mut F) {
    fn recurse<F: FnMut(&[usize])>(k: usize, items: &mut [usize], visit: &mut F) {
        if k <= 1 {
            visit(items);
            return;
        }
        for j in 0..k - 1 {
            recurse(k - 1, items, visit);
            if k.is_multiple_of(2) {
                items.swap(j, k - 1);
            } else {
                items.swap(0, k - 1);
            }
        }
        recurse(k - 1, items, visit);
    }
    let k = items.len();
    recurse(k, items, visit);
}

fn check_weights(f: &SetCostFunction, w: &WeightSystem) -> Result<()> {
    if w.players() != f.arity() {
        return Err(Error::InvalidWeights(format!(
            "weight system covers {} players, cost function has arity {}",
            w.players(),
            f.arity()
        )));
    }
    Ok(())
}

/// Generalized weighted Shapley share: each dividend `d(T)` of the cost
/// function is split among `T̄`, the members of `T` in the earliest block
/// that meets `T`, in proportion to their weights. Empty `T` carries no
/// dividend and is skipped.
pub fn gws_share(f: &SetCostFunction, users: PlayerSet, i: usize, w: &WeightSystem) -> Result<Rational> {
    check_arity(f, users, i)?;
    check_weights(f, w)?;
    if !users.contains(i) {
        return Ok(Rational::zero());
    }
    let dividends = f.dividends();
    let mut total = Rational::zero();
    for rest in users.without(i).subsets() {
        let t = rest.with(i);
        let dividend = &dividends[t.index()];
        if dividend.is_zero() {
            continue;
        }
        let lead = w.leading_part(t);
        if !lead.contains(i) {
            continue;
        }
        let lead_weight: Rational = lead.iter().map(|j| w.weight(j).clone()).sum();
        total += w.weight(i) / lead_weight * dividend;
    }
    Ok(total)
}

pub fn gws_shares(f: &SetCostFunction, users: PlayerSet, w: &WeightSystem) -> Result<Vec<Rational>> {
    if !f.covers(users) {
        return Err(Error::ArityMismatch {
            arity: f.arity(),
            what: format!("user set {users:?}"),
        });
    }
    check_weights(f, w)?;
    let dividends = f.dividends();
    let mut shares = vec![Rational::zero(); f.arity()];
    for t in users.subsets().skip(1) {
        let dividend = &dividends[t.index()];
        if dividend.is_zero() {
            continue;
        }
        let lead = w.leading_part(t);
        let lead_weight: Rational = lead.iter().map(|j| w.weight(j).clone()).sum();
        for j in lead.iter() {
            shares[j] += w.weight(j) / &lead_weight * dividend;
        }
    }
    Ok(shares)
}

/// `C_i(P)`: the sum of `i`'s shares over the resources of her chosen strategy.
pub fn private_cost(model: &GameModel, protocol: &Protocol, profile: &StrategyProfile, i: usize) -> Result<Rational> {
    model.validate_profile(profile)?;
    if i >= model.players() {
        return Err(Error::OutOfRange(format!(
            "player {i} in a {}-player game",
            model.players()
        )));
    }
    let loads = model.loads(profile);
    let mut total = Rational::zero();
    for &r in model.strategy(i, profile.choice(i)) {
        total += protocol.share(&model.resource(r).cost, loads[r], i)?;
    }
    Ok(total)
}

/// Exhaustively checks `Σ_{i ∈ S} share(i, S) = C(S)` and `share(j, S) = 0`
/// for `j ∉ S`, over every user set `S`.
pub fn check_budget_balance(protocol: &Protocol, f: &SetCostFunction) -> Result<bool> {
    for users in PlayerSet::full(f.arity()).subsets() {
        let shares = protocol.shares(f, users)?;
        let mut paid = Rational::zero();
        for (i, share) in shares.iter().enumerate() {
            if users.contains(i) {
                paid += share;
            } else if !share.is_zero() {
                return Ok(false);
            }
        }
        if paid != *f.value(users) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Checks that no user pays less when the cost is split among more users:
/// `share(i, S) <= share(i, S \ {j})` for all `S ⊆ within` and `i != j` in `S`.
pub fn check_share_monotonicity(protocol: &Protocol, f: &SetCostFunction, within: PlayerSet) -> Result<bool> {
    for users in within.subsets() {
        let shares = protocol.shares(f, users)?;
        for j in users.iter() {
            let fewer = protocol.shares(f, users.without(j))?;
            if users.without(j).iter().any(|i| shares[i] > fewer[i]) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::Resource;
    use crate::rational::{int, rat};

    fn set(v: &[usize]) -> PlayerSet {
        v.iter().copied().collect()
    }

    fn table2(v: [i64; 4]) -> SetCostFunction {
        SetCostFunction::from_table(2, v.iter().map(|&x| int(x)).collect()).unwrap()
    }

    #[test]
    fn shapley_examples() {
        let f = table2([0, 1, 3, 4]);
        assert_eq!(shapley_share(&f, set(&[0]), 0).unwrap(), int(1));
        assert_eq!(shapley_share(&f, set(&[0, 1]), 0).unwrap(), int(1));
        assert_eq!(shapley_share(&f, set(&[0, 1]), 1).unwrap(), int(3));
        assert_eq!(shapley_shares(&f, set(&[0, 1])).unwrap(), vec![int(1), int(3)]);
        assert_eq!(shapley_shares(&f, PlayerSet::EMPTY).unwrap(), vec![int(0), int(0)]);
        let anon = SetCostFunction::anonymous(vec![int(0), int(1), int(3)]).unwrap();
        assert_eq!(shapley_shares(&anon, set(&[0, 1])).unwrap(), vec![rat(3, 2), rat(3, 2)]);
        // 0 below 4 users, 4 - 1/2 at 4 users
        let gate = SetCostFunction::threshold(4, 4, rat(7, 2)).unwrap();
        for i in 0..4 {
            assert_eq!(shapley_share(&gate, PlayerSet::full(4), i).unwrap(), rat(7, 8));
        }
        assert!(matches!(
            shapley_share(&f, set(&[2]), 0),
            Err(Error::ArityMismatch { .. })
        ));
        assert!(matches!(
            shapley_share(&f, set(&[0]), 5),
            Err(Error::ArityMismatch { .. })
        ));
    }

    #[test]
    fn permutation_oracle_examples() {
        let f = SetCostFunction::anonymous(vec![int(0), int(6), int(6), int(6)]).unwrap();
        for i in 0..3 {
            assert_eq!(
                shapley_share_by_permutations(&f, PlayerSet::full(3), i).unwrap(),
                int(2)
            );
        }
        let g = table2([0, 1, 3, 4]);
        assert_eq!(shapley_share_by_permutations(&g, set(&[1]), 1).unwrap(), int(3));
        assert_eq!(shapley_share_by_permutations(&g, set(&[1]), 0).unwrap(), int(0));
        let big = SetCostFunction::zero(9);
        assert!(matches!(
            shapley_share_by_permutations(&big, PlayerSet::full(9), 0),
            Err(Error::PermutationCap { .. })
        ));
    }

    #[test]
    fn heap_visits_every_permutation_once() {
        let mut items = vec![0, 1, 2, 3];
        let mut seen = std::collections::BTreeSet::new();
        for_each_permutation(&mut items, &mut |p| {
            seen.insert(p.to_vec());
        });
        assert_eq!(seen.len(), 24);
    }

    #[test]
    fn gws_examples() {
        // singleton blocks: the first block receives every dividend it meets
        let f = table2([0, 1, 3, 6]);
        let w = WeightSystem::new(vec![int(5), int(1)], vec![set(&[0]), set(&[1])]).unwrap();
        assert_eq!(gws_share(&f, set(&[0, 1]), 0, &w).unwrap(), int(3));
        assert_eq!(gws_share(&f, set(&[0, 1]), 1, &w).unwrap(), int(3));
        assert_eq!(gws_shares(&f, set(&[0, 1]), &w).unwrap(), vec![int(3), int(3)]);
        assert_eq!(gws_shares(&f, PlayerSet::EMPTY, &w).unwrap(), vec![int(0), int(0)]);
        // weights split a shared dividend within one block
        let w2 = WeightSystem::new(vec![int(1), int(3)], vec![set(&[0, 1])]).unwrap();
        // d({0})=1, d({1})=3, d({0,1})=2 split 1:3
        assert_eq!(gws_shares(&f, set(&[0, 1]), &w2).unwrap(), vec![rat(3, 2), rat(9, 2)]);
        let bad = WeightSystem::unit(3);
        assert!(matches!(
            gws_share(&f, set(&[0]), 0, &bad),
            Err(Error::InvalidWeights(_))
        ));
    }

    #[test]
    fn weight_system_validation() {
        assert!(WeightSystem::new(vec![int(1), int(0)], vec![set(&[0, 1])]).is_err());
        assert!(WeightSystem::new(vec![int(1), int(1)], vec![set(&[0])]).is_err());
        assert!(WeightSystem::new(vec![int(1), int(1)], vec![set(&[0, 1]), set(&[1])]).is_err());
        assert!(WeightSystem::new(vec![int(1), int(1)], vec![set(&[0, 1]), PlayerSet::EMPTY]).is_err());
        assert!(WeightSystem::new(vec![int(1)], vec![set(&[0, 3])]).is_err());
        let w = WeightSystem::new(vec![int(1), int(2), int(3)], vec![set(&[2]), set(&[0, 1])]).unwrap();
        assert_eq!(w.leading_part(set(&[0, 1])), set(&[0, 1]));
        assert_eq!(w.leading_part(set(&[0, 2])), set(&[2]));
        assert_eq!(w.block_of(0), 1);
    }

    #[test]
    fn budget_balance_checks() {
        let f = table2([0, 1, 3, 6]);
        assert!(check_budget_balance(&Protocol::Shapley, &f).unwrap());
        let w = WeightSystem::new(vec![int(2), int(1)], vec![set(&[1]), set(&[0])]).unwrap();
        assert!(check_budget_balance(&Protocol::WeightedShapley(w), &f).unwrap());

        // everything to player 0, but player 1 is charged while absent
        let mut shares = BTreeMap::new();
        shares.insert(PlayerSet::EMPTY, vec![int(0), int(0)]);
        shares.insert(set(&[0]), vec![int(1), int(1)]);
        shares.insert(set(&[1]), vec![int(0), int(3)]);
        shares.insert(set(&[0, 1]), vec![int(6), int(0)]);
        let bad = Protocol::Table(TableProtocol::new(
            vec![TableEntry {
                cost: f.clone(),
                shares,
            }],
            None,
        ));
        assert!(!check_budget_balance(&bad, &f).unwrap());
        let missing = Protocol::Table(TableProtocol::default());
        assert!(matches!(
            check_budget_balance(&missing, &f),
            Err(Error::NoTableEntry(_))
        ));
    }

    #[test]
    fn table_protocol_falls_back() {
        let f = table2([0, 1, 3, 4]);
        let mut shares = BTreeMap::new();
        shares.insert(set(&[0, 1]), vec![int(4), int(0)]);
        let p = Protocol::Table(TableProtocol::new(
            vec![TableEntry {
                cost: f.clone(),
                shares,
            }],
            Some(Protocol::Shapley),
        ));
        assert_eq!(p.share(&f, set(&[0, 1]), 0).unwrap(), int(4));
        assert_eq!(p.share(&f, set(&[1]), 1).unwrap(), int(3));
        let g = table2([0, 2, 2, 2]);
        assert_eq!(p.shares(&g, set(&[0, 1])).unwrap(), vec![int(1), int(1)]);
    }

    #[test]
    fn constant_cost_shares_are_monotone() {
        let c = SetCostFunction::constant(4, rat(5, 4)).unwrap();
        assert!(check_share_monotonicity(&Protocol::Shapley, &c, PlayerSet::full(4)).unwrap());
        let w = WeightSystem::new(
            vec![int(1), int(2), int(3), int(4)],
            vec![set(&[3]), set(&[0, 2]), set(&[1])],
        )
        .unwrap();
        assert!(check_share_monotonicity(&Protocol::WeightedShapley(w), &c, PlayerSet::full(4)).unwrap());
        // player 0 pays more once player 1 joins (budget-balanced via a negative share)
        let k = SetCostFunction::constant(2, int(1)).unwrap();
        let mut shares = BTreeMap::new();
        shares.insert(PlayerSet::EMPTY, vec![int(0), int(0)]);
        shares.insert(set(&[0]), vec![int(1), int(0)]);
        shares.insert(set(&[1]), vec![int(0), int(1)]);
        shares.insert(set(&[0, 1]), vec![int(2), int(-1)]);
        let p = Protocol::Table(TableProtocol::new(
            vec![TableEntry {
                cost: k.clone(),
                shares,
            }],
            None,
        ));
        assert!(check_budget_balance(&p, &k).unwrap());
        assert!(!check_share_monotonicity(&p, &k, PlayerSet::full(2)).unwrap());
    }

    #[test]
    fn private_cost_sums_shares() {
        let solo = SetCostFunction::from_table(1, vec![int(0), int(5)]).unwrap();
        let g = GameModel::new(1, vec![Resource::new("r", solo)], vec![vec![vec![0]]]).unwrap();
        let p = StrategyProfile::new(vec![0]);
        assert_eq!(private_cost(&g, &Protocol::Shapley, &p, 0).unwrap(), int(5));
        let free = GameModel::new(
            2,
            vec![Resource::new("z", SetCostFunction::zero(2))],
            vec![vec![vec![0]], vec![vec![0]]],
        )
        .unwrap();
        assert_eq!(
            private_cost(&free, &Protocol::Shapley, &StrategyProfile::new(vec![0, 0]), 1).unwrap(),
            int(0)
        );
        assert!(private_cost(&g, &Protocol::Shapley, &p, 3).is_err());
    }
}

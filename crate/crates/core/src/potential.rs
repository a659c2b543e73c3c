//! The exact potential of Shapley cost-sharing games.
//!
//! For a resource with users `S`, `|S| = k`, the potential contribution is
//! `Σ_{∅ ≠ T ⊆ S} α(k, |T|) C(T)` with `α(k, t) = (t-1)! (k-t)! / k!`. The
//! coefficients over all non-empty `T` sum to the harmonic number `H_k`.

use std::sync::OnceLock;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::cost::SetCostFunction;
use crate::error::{Error, Result};
use crate::game::{GameModel, StrategyProfile};
use crate::protocol::{shapley_share_by_permutations, PERMUTATION_CAP};
use crate::rational::{factorial, Rational};
use crate::set::{PlayerSet, MAX_PLAYERS};

/// `α(k, t)` for `0 <= t <= k <= MAX_PLAYERS`, built once.
pub struct AlphaTable {
    rows: Vec<Vec<Rational>>,
}

impl AlphaTable {
    fn build() -> Self {
        let fact: Vec<BigInt> = (0..=MAX_PLAYERS).map(factorial).collect();
        let rows = (0..=MAX_PLAYERS)
            .map(|k| {
                (0..=k)
                    .map(|t| {
                        if t == 0 {
                            Rational::zero()
                        } else {
                            Rational::new(&fact[t - 1] * &fact[k - t], fact[k].clone())
                        }
                    })
                    .collect()
            })
            .collect();
        AlphaTable { rows }
    }

    pub fn global() -> &'static AlphaTable {
        static TABLE: OnceLock<AlphaTable> = OnceLock::new();
        TABLE.get_or_init(AlphaTable::build)
    }

    pub fn get(&self, k: usize, t: usize) -> Result<&Rational> {
        if k == 0 || k > MAX_PLAYERS || t > k {
            return Err(Error::OutOfRange(format!(
                "alpha({k}, {t}) needs 0 <= t <= k and 1 <= k <= {MAX_PLAYERS}"
            )));
        }
        Ok(&self.rows[k][t])
    }

    fn coefficient(&self, k: usize, t: usize) -> &Rational {
        &self.rows[k][t]
    }
}

pub fn alpha(k: usize, t: usize) -> Result<Rational> {
    AlphaTable::global().get(k, t).cloned()
}

/// `H_k = Σ_{l=1}^{k} 1/l`, exact. Summed by binary splitting so the
/// intermediate fractions stay balanced.
pub fn harmonic(k: u64) -> Rational {
    // Returns (p, q) with p/q = Σ_{l=lo}^{hi-1} 1/l, unreduced.
    fn split(lo: u64, hi: u64) -> (BigInt, BigInt) {
        if hi - lo == 1 {
            return (BigInt::one(), BigInt::from(lo));
        }
        let mid = lo + (hi - lo) / 2;
        let (p1, q1) = split(lo, mid);
        let (p2, q2) = split(mid, hi);
        (p1 * &q2 + p2 * &q1, q1 * q2)
    }
    if k == 0 {
        return Rational::zero();
    }
    let (p, q) = split(1, k + 1);
    Rational::new(p, q)
}

/// Potential contribution of one resource with users `users`.
pub fn resource_potential(f: &SetCostFunction, users: PlayerSet) -> Rational {
    let k = users.len();
    let table = AlphaTable::global();
    let mut total = Rational::zero();
    for t in users.subsets().skip(1) {
        let cost = f.value(t);
        if !cost.is_zero() {
            total += table.coefficient(k, t.len()) * cost;
        }
    }
    total
}

/// `Φ(P) = Σ_r Σ_{T ⊆ P^r} α_T C^r(T)`.
pub fn potential(model: &GameModel, profile: &StrategyProfile) -> Result<Rational> {
    potential_of_live(model, profile, PlayerSet::full(model.players()))
}

/// Potential of the partial profile in which only `live` players are present.
pub fn potential_of_live(model: &GameModel, profile: &StrategyProfile, live: PlayerSet) -> Result<Rational> {
    model.validate_profile(profile)?;
    Ok(potential_of_loads(model, &model.loads_of_live(profile, live)))
}

pub fn potential_of_loads(model: &GameModel, loads: &[PlayerSet]) -> Rational {
    model
        .resources()
        .iter()
        .zip(loads)
        .fold(Rational::zero(), |acc, (res, &users)| {
            acc + resource_potential(&res.cost, users)
        })
}

/// The potential as a sum of Shapley shares: players arrive in `order`, and
/// each pays her share among the users of the resource that arrived before
/// her. Shares come from the permutation oracle, so every resource may carry
/// at most [`PERMUTATION_CAP`] users.
pub fn potential_by_permutation(model: &GameModel, profile: &StrategyProfile, order: &[usize]) -> Result<Rational> {
    model.validate_profile(profile)?;
    let n = model.players();
    let mut seen = PlayerSet::EMPTY;
    for &i in order {
        if i >= n || seen.contains(i) {
            return Err(Error::OutOfRange(format!("{order:?} is not a permutation of 0..{n}")));
        }
        seen = seen.with(i);
    }
    if seen.len() != n {
        return Err(Error::OutOfRange(format!("{order:?} is not a permutation of 0..{n}")));
    }
    let loads = model.loads(profile);
    let mut total = Rational::zero();
    for (r, res) in model.resources().iter().enumerate() {
        if loads[r].len() > PERMUTATION_CAP {
            return Err(Error::PermutationCap {
                size: loads[r].len(),
                cap: PERMUTATION_CAP,
            });
        }
        let mut arrived = PlayerSet::EMPTY;
        for &i in order.iter().filter(|&&i| loads[r].contains(i)) {
            arrived = arrived.with(i);
            total += shapley_share_by_permutations(&res.cost, arrived, i)?;
        }
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::Resource;
    use crate::rational::{int, rat};

    #[test]
    fn alpha_examples() {
        assert_eq!(alpha(1, 1).unwrap(), int(1));
        assert_eq!(alpha(3, 2).unwrap(), rat(1, 6));
        assert_eq!(alpha(5, 5).unwrap(), rat(1, 5));
        assert_eq!(alpha(4, 0).unwrap(), int(0));
        assert!(alpha(0, 0).is_err());
        assert!(alpha(3, 4).is_err());
        assert!(alpha(17, 1).is_err());
        for k in 1..=MAX_PLAYERS {
            assert_eq!(alpha(k, k).unwrap(), rat(1, k as i64));
        }
    }

    #[test]
    fn harmonic_examples() {
        assert_eq!(harmonic(0), int(0));
        assert_eq!(harmonic(1), int(1));
        assert_eq!(harmonic(2), rat(3, 2));
        assert_eq!(harmonic(3), rat(11, 6));
        let naive: Rational = (1..=200).map(|l| rat(1, l)).sum();
        assert_eq!(harmonic(200), naive);
    }

    fn single_resource(cost: SetCostFunction) -> GameModel {
        let n = cost.arity();
        GameModel::new(n, vec![Resource::new("r", cost)], vec![vec![vec![0]]; n]).unwrap()
    }

    #[test]
    fn potential_examples() {
        let zero = single_resource(SetCostFunction::zero(3));
        assert_eq!(potential(&zero, &StrategyProfile::new(vec![0; 3])).unwrap(), int(0));

        let constant = single_resource(SetCostFunction::constant(4, rat(5, 2)).unwrap());
        assert_eq!(
            potential(&constant, &StrategyProfile::new(vec![0; 4])).unwrap(),
            rat(5, 2) * harmonic(4)
        );

        let table = SetCostFunction::from_table(2, vec![int(0), int(1), int(3), int(4)]).unwrap();
        let g = single_resource(table);
        let p = StrategyProfile::new(vec![0, 0]);
        assert_eq!(potential(&g, &p).unwrap(), int(4));
        assert_eq!(potential_by_permutation(&g, &p, &[0, 1]).unwrap(), int(4));
        assert_eq!(potential_by_permutation(&g, &p, &[1, 0]).unwrap(), int(4));
        assert!(potential_by_permutation(&g, &p, &[1, 1]).is_err());
        assert!(potential_by_permutation(&g, &p, &[0]).is_err());
        assert_eq!(potential_of_live(&g, &p, PlayerSet::singleton(1)).unwrap(), int(3));
    }

    #[test]
    fn single_player_potential_is_social_cost() {
        let f = SetCostFunction::from_table(1, vec![int(0), rat(7, 3)]).unwrap();
        let g = GameModel::new(
            1,
            vec![Resource::new("a", f.clone()), Resource::new("b", f)],
            vec![vec![vec![0, 1], vec![0]]],
        )
        .unwrap();
        for k in 0..2 {
            let p = StrategyProfile::new(vec![k]);
            let cost = crate::game::social_cost(&g, &p).unwrap();
            assert_eq!(potential(&g, &p).unwrap(), cost);
            assert_eq!(potential_by_permutation(&g, &p, &[0]).unwrap(), cost);
        }
    }

    #[test]
    fn harmonic_identity_over_subsets() {
        for k in 1..=12usize {
            let sum: Rational = PlayerSet::full(k)
                .subsets()
                .skip(1)
                .map(|t| alpha(k, t.len()).unwrap())
                .sum();
            assert_eq!(sum, harmonic(k as u64), "k = {k}");
        }
    }
}

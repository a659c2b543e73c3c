//! Non-decreasing set functions `C: 2^N -> Q>=0` with `C(∅) = 0`.

use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::{Arc, OnceLock};

use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::rational::{format_rational, int, Rational};
use crate::set::{PlayerSet, MAX_PLAYERS};

/// Curvature class of a set function.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Modularity {
    /// Both submodular and supermodular: every marginal is constant.
    Modular,
    Submodular,
    Supermodular,
    Neither,
}

impl Modularity {
    pub fn is_submodular(self) -> bool {
        matches!(self, Modularity::Modular | Modularity::Submodular)
    }

    pub fn is_supermodular(self) -> bool {
        matches!(self, Modularity::Modular | Modularity::Supermodular)
    }
}

/// The cost structure of one resource over `arity` potential users.
///
/// Always stored as an explicit table of `2^arity` values indexed by the
/// subset bitmask; the anonymous constructors expand into that table.
/// Validated on construction, so every value is non-negative, `C(∅) = 0` and
/// `S ⊆ T` implies `C(S) <= C(T)`.
pub struct SetCostFunction {
    arity: usize,
    values: Arc<[Rational]>,
    dividends: OnceLock<Arc<[Rational]>>,
}

impl SetCostFunction {
    /// Builds from a full table indexed by subset bitmask.
    pub fn from_table(arity: usize, values: Vec<Rational>) -> Result<Self> {
        if arity > MAX_PLAYERS {
            return Err(Error::InvalidCost(format!(
                "arity {arity} exceeds the maximum of {MAX_PLAYERS}"
            )));
        }
        if values.len() != 1 << arity {
            return Err(Error::InvalidCost(format!(
                "table for arity {arity} needs {} values, got {}",
                1usize << arity,
                values.len()
            )));
        }
        let f = SetCostFunction {
            arity,
            values: values.into(),
            dividends: OnceLock::new(),
        };
        f.validate()?;
        Ok(f)
    }

    /// Builds from `(set, cost)` pairs. Sets that are not listed cost 0, which
    /// is only accepted if the result is still non-decreasing.
    pub fn from_entries<I>(arity: usize, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (PlayerSet, Rational)>,
    {
        if arity > MAX_PLAYERS {
            return Err(Error::InvalidCost(format!(
                "arity {arity} exceeds the maximum of {MAX_PLAYERS}"
            )));
        }
        let full = PlayerSet::full(arity);
        let mut values = vec![Rational::zero(); 1 << arity];
        let mut seen = vec![false; 1 << arity];
        for (set, cost) in entries {
            if !set.is_subset_of(full) {
                return Err(Error::ArityMismatch {
                    arity,
                    what: format!("table entry for {set:?}"),
                });
            }
            if std::mem::replace(&mut seen[set.index()], true) {
                return Err(Error::InvalidCost(format!("duplicate entry for {set:?}")));
            }
            values[set.index()] = cost;
        }
        Self::from_table(arity, values)
    }

    /// Anonymous cost `C(S) = by_size[|S|]`; the arity is `by_size.len() - 1`.
    pub fn anonymous(by_size: Vec<Rational>) -> Result<Self> {
        let Some(arity) = by_size.len().checked_sub(1) else {
            return Err(Error::InvalidCost("anonymous cost needs at least v[0]".into()));
        };
        if arity > MAX_PLAYERS {
            return Err(Error::InvalidCost(format!(
                "arity {arity} exceeds the maximum of {MAX_PLAYERS}"
            )));
        }
        let values = PlayerSet::full(arity)
            .subsets()
            .map(|s| by_size[s.len()].clone())
            .collect();
        Self::from_table(arity, values)
    }

    pub fn zero(arity: usize) -> Self {
        Self::anonymous(vec![Rational::zero(); arity + 1]).expect("zero cost is valid")
    }

    /// `c` for every non-empty user set.
    pub fn constant(arity: usize, c: Rational) -> Result<Self> {
        Self::anonymous(
            (0..=arity)
                .map(|k| if k == 0 { Rational::zero() } else { c.clone() })
                .collect(),
        )
    }

    /// `per_user * |S|`.
    pub fn linear(arity: usize, per_user: Rational) -> Result<Self> {
        Self::anonymous((0..=arity).map(|k| &per_user * int(k as i64)).collect())
    }

    /// 0 below `k` users and `c` from `k` users on.
    pub fn threshold(arity: usize, k: usize, c: Rational) -> Result<Self> {
        Self::anonymous(
            (0..=arity)
                .map(|m| if m >= k { c.clone() } else { Rational::zero() })
                .collect(),
        )
    }

    fn validate(&self) -> Result<()> {
        if !self.values[0].is_zero() {
            return Err(Error::InvalidCost(format!(
                "C(∅) must be 0, got {}",
                format_rational(&self.values[0])
            )));
        }
        if let Some(pos) = self.values.iter().position(Signed::is_negative) {
            return Err(Error::InvalidCost(format!(
                "negative cost {} for {:?}",
                format_rational(&self.values[pos]),
                PlayerSet::from_bits(pos as u32)
            )));
        }
        let full = PlayerSet::full(self.arity);
        for set in full.subsets() {
            for i in full.difference(set) {
                let larger = set.with(i);
                if self.value(set) > self.value(larger) {
                    return Err(Error::InvalidCost(format!(
                        "not non-decreasing: C({set:?}) = {} > C({larger:?}) = {}",
                        format_rational(self.value(set)),
                        format_rational(self.value(larger))
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    /// The value of `set`. Panics if `set` is not a subset of `{0..arity}`.
    pub fn value(&self, set: PlayerSet) -> &Rational {
        &self.values[set.index()]
    }

    pub fn values(&self) -> &[Rational] {
        &self.values
    }

    /// Whether `set` only contains players below the arity.
    pub fn covers(&self, set: PlayerSet) -> bool {
        set.is_subset_of(PlayerSet::full(self.arity))
    }

    /// True iff `C(X) = C(Y)` whenever `|X| = |Y|`.
    pub fn is_anonymous(&self) -> bool {
        self.anonymous_values().is_some()
    }

    /// The cardinality profile `v[0..=arity]` when the function is anonymous.
    pub fn anonymous_values(&self) -> Option<Vec<Rational>> {
        let mut by_size: Vec<Option<&Rational>> = vec![None; self.arity + 1];
        for set in PlayerSet::full(self.arity).subsets() {
            let v = self.value(set);
            match by_size[set.len()] {
                None => by_size[set.len()] = Some(v),
                Some(seen) if seen != v => return None,
                Some(_) => {}
            }
        }
        Some(
            by_size
                .into_iter()
                .map(|v| v.expect("every size occurs").clone())
                .collect(),
        )
    }

    /// Classifies by second differences `C(X+i) - C(X) - C(X+i+j) + C(X+j)`
    /// over all `X` and `i < j` outside `X`. Non-negative everywhere means
    /// submodular, non-positive everywhere supermodular; these local
    /// conditions are equivalent to the nested-set definitions.
    pub fn classify(&self) -> Modularity {
        let full = PlayerSet::full(self.arity);
        let (mut sub, mut sup) = (true, true);
        'outer: for x in full.subsets() {
            let outside: Vec<usize> = full.difference(x).iter().collect();
            for (a, &i) in outside.iter().enumerate() {
                for &j in &outside[a + 1..] {
                    let delta =
                        self.value(x.with(i)) - self.value(x) - self.value(x.with(i).with(j)) + self.value(x.with(j));
                    if delta.is_negative() {
                        sub = false;
                    } else if delta.is_positive() {
                        sup = false;
                    }
                    if !sub && !sup {
                        break 'outer;
                    }
                }
            }
        }
        match (sub, sup) {
            (true, true) => Modularity::Modular,
            (true, false) => Modularity::Submodular,
            (false, true) => Modularity::Supermodular,
            (false, false) => Modularity::Neither,
        }
    }

    /// Möbius dividends `d(T) = Σ_{U ⊆ T} (-1)^{|T|-|U|} C(U)`, computed once.
    pub fn dividends(&self) -> &[Rational] {
        self.dividends.get_or_init(|| {
            let mut d: Vec<Rational> = self.values.to_vec();
            for i in 0..self.arity {
                let bit = 1usize << i;
                for s in 0..d.len() {
                    if s & bit != 0 {
                        let lower = d[s ^ bit].clone();
                        d[s] -= lower;
                    }
                }
            }
            d.into()
        })
    }
}

impl Clone for SetCostFunction {
    fn clone(&self) -> Self {
        let dividends = OnceLock::new();
        if let Some(d) = self.dividends.get() {
            let _ = dividends.set(Arc::clone(d));
        }
        SetCostFunction {
            arity: self.arity,
            values: Arc::clone(&self.values),
            dividends,
        }
    }
}

impl PartialEq for SetCostFunction {
    fn eq(&self, other: &Self) -> bool {
        self.arity == other.arity && self.values == other.values
    }
}

impl Eq for SetCostFunction {}

impl Hash for SetCostFunction {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.arity.hash(state);
        self.values.hash(state);
    }
}

impl fmt::Debug for SetCostFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(v) = self.anonymous_values() {
            let v: Vec<String> = v.iter().map(format_rational).collect();
            write!(f, "Anonymous{v:?}")
        } else {
            let mut map = f.debug_map();
            for set in PlayerSet::full(self.arity).subsets() {
                map.entry(&set, &format_rational(self.value(set)));
            }
            map.finish()
        }
    }
}

//! Spin spaces, configurations on vertex subsets, and their enumeration.
//!
//! A configuration assigns a spin value to each vertex of its support. The
//! enumeration of all configurations on a support is lexicographic over the
//! breadth-first vertex indexing with the spin-space value order: the vertex
//! with the smallest index is the most significant digit, so index 0 is the
//! all-minimum configuration and the last vertex varies fastest. The
//! index <-> configuration correspondence round-trips exactly and is the
//! layout of every probability table in this crate.

use std::collections::BTreeMap;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{GibbsError, Result};
use crate::topology::VertexId;

/// Default cap on `|Phi|^|A|` for exhaustive enumerations and kernel tables.
pub const DEFAULT_MAX_STATES: u128 = 1 << 26;

/// A finite set of spin values, strictly increasing.
///
/// `[-1, 1]` for the Ising model, `[1, ..., q]` for Potts labels.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct SpinSpace {
    values: Vec<f64>,
}

impl SpinSpace {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(GibbsError::InvalidParameter(
                "spin space must be non-empty".into(),
            ));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(GibbsError::InvalidParameter(
                "spin values must be finite reals".into(),
            ));
        }
        if values.windows(2).any(|w| w[0] >= w[1]) {
            return Err(GibbsError::InvalidParameter(
                "spin values must be strictly increasing".into(),
            ));
        }
        Ok(SpinSpace { values })
    }

    /// The two-point space `{-1, +1}`.
    pub fn ising() -> Self {
        SpinSpace {
            values: vec![-1.0, 1.0],
        }
    }

    /// Potts labels `{1, ..., q}`.
    pub fn potts(q: usize) -> Result<Self> {
        if q == 0 {
            return Err(GibbsError::InvalidParameter(
                "Potts spin count q must be at least 1".into(),
            ));
        }
        SpinSpace::new((1..=q).map(|v| v as f64).collect())
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, index: usize) -> f64 {
        self.values[index]
    }

    /// Index of an exact spin value, if it belongs to the space.
    pub fn index_of(&self, value: f64) -> Option<usize> {
        self.values
            .binary_search_by(|v| v.partial_cmp(&value).expect("finite spin values"))
            .ok()
    }

    pub fn is_binary_pm_one(&self) -> bool {
        self.values == [-1.0, 1.0]
    }
}

impl<'de> Deserialize<'de> for SpinSpace {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let values = Vec::<f64>::deserialize(deserializer)?;
        SpinSpace::new(values).map_err(D::Error::custom)
    }
}

/// A partial spin assignment: a total map from its support to spin values.
#[derive(Debug, Clone, PartialEq)]
pub struct Configuration {
    support: Vec<VertexId>,
    values: Vec<f64>,
}

impl Configuration {
    /// Build from `(vertex, value)` pairs; the support is sorted internally.
    pub fn new(pairs: impl IntoIterator<Item = (VertexId, f64)>) -> Result<Self> {
        let mut pairs: Vec<(VertexId, f64)> = pairs.into_iter().collect();
        pairs.sort_by_key(|&(v, _)| v);
        for w in pairs.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(GibbsError::OverlappingSupports(w[0].0));
            }
        }
        let (support, values) = pairs.into_iter().unzip();
        Ok(Configuration { support, values })
    }

    /// The configuration on the empty support (the single element of `Phi^0`).
    pub fn empty() -> Self {
        Configuration {
            support: Vec::new(),
            values: Vec::new(),
        }
    }

    /// Constant configuration on a support.
    pub fn constant(support: impl IntoIterator<Item = VertexId>, value: f64) -> Result<Self> {
        Configuration::new(support.into_iter().map(|v| (v, value)))
    }

    pub fn support(&self) -> &[VertexId] {
        &self.support
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    pub fn value_at(&self, vertex: VertexId) -> Option<f64> {
        self.support
            .binary_search(&vertex)
            .ok()
            .map(|i| self.values[i])
    }

    /// Iterate `(vertex, value)` pairs in vertex order.
    pub fn iter(&self) -> impl Iterator<Item = (VertexId, f64)> + '_ {
        self.support
            .iter()
            .copied()
            .zip(self.values.iter().copied())
    }

    /// Combine two configurations with disjoint supports.
    pub fn merge(&self, other: &Configuration) -> Result<Configuration> {
        for &v in &other.support {
            if self.support.binary_search(&v).is_ok() {
                return Err(GibbsError::OverlappingSupports(v));
            }
        }
        Configuration::new(self.iter().chain(other.iter()))
    }

    /// Restriction to a subset of the support.
    pub fn restrict(&self, subset: &[VertexId]) -> Result<Configuration> {
        let mut pairs = Vec::with_capacity(subset.len());
        for &v in subset {
            match self.value_at(v) {
                Some(val) => pairs.push((v, val)),
                None => {
                    return Err(GibbsError::SupportMismatch(format!(
                        "vertex {v} is outside the configuration support"
                    )))
                }
            }
        }
        Configuration::new(pairs)
    }

    /// Pointwise partial order: true iff `self(x) <= other(x)` everywhere.
    ///
    /// Requires equal supports.
    pub fn leq(&self, other: &Configuration) -> Result<bool> {
        if self.support != other.support {
            return Err(GibbsError::SupportMismatch(
                "pointwise comparison requires equal supports".into(),
            ));
        }
        Ok(self
            .values
            .iter()
            .zip(other.values.iter())
            .all(|(a, b)| a <= b))
    }

    /// Pointwise supremum of two equal-support configurations.
    pub fn pointwise_sup(&self, other: &Configuration) -> Result<Configuration> {
        if self.support != other.support {
            return Err(GibbsError::SupportMismatch(
                "pointwise supremum requires equal supports".into(),
            ));
        }
        Ok(Configuration {
            support: self.support.clone(),
            values: self
                .values
                .iter()
                .zip(other.values.iter())
                .map(|(a, b)| a.max(*b))
                .collect(),
        })
    }

    /// Negate every value (spin flip for symmetric spaces).
    pub fn negated(&self) -> Configuration {
        Configuration {
            support: self.support.clone(),
            values: self.values.iter().map(|v| -v).collect(),
        }
    }
}

impl Serialize for Configuration {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        // JSON object keyed by the vertex index: {"0": 1.0, "3": -1.0}
        let map: BTreeMap<VertexId, f64> = self.iter().collect();
        let map: BTreeMap<String, f64> = map.into_iter().map(|(k, v)| (k.to_string(), v)).collect();
        map.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Configuration {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let map = BTreeMap::<String, f64>::deserialize(deserializer)?;
        let mut pairs = Vec::with_capacity(map.len());
        for (key, value) in map {
            let vertex: VertexId = key
                .parse()
                .map_err(|_| D::Error::custom(format!("invalid vertex index {key:?}")))?;
            pairs.push((vertex, value));
        }
        Configuration::new(pairs).map_err(D::Error::custom)
    }
}

/// The exhaustively enumerable state space `Phi^A` on a fixed support.
#[derive(Debug, Clone)]
pub struct StateSpace {
    space: SpinSpace,
    support: Vec<VertexId>,
    count: usize,
}

impl StateSpace {
    pub fn new(space: &SpinSpace, support: &[VertexId], max_states: u128) -> Result<Self> {
        let mut support = support.to_vec();
        support.sort_unstable();
        support.dedup();
        let count = state_count(space.len(), support.len(), max_states)?;
        Ok(StateSpace {
            space: space.clone(),
            support,
            count: count as usize,
        })
    }

    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn support(&self) -> &[VertexId] {
        &self.support
    }

    pub fn space(&self) -> &SpinSpace {
        &self.space
    }

    /// Spin-index digits of a state, most significant digit first.
    pub fn digits(&self, index: usize) -> Vec<usize> {
        let q = self.space.len();
        let mut digits = vec![0usize; self.support.len()];
        let mut rest = index;
        for slot in digits.iter_mut().rev() {
            *slot = rest % q;
            rest /= q;
        }
        digits
    }

    pub fn index_to_config(&self, index: usize) -> Configuration {
        let digits = self.digits(index);
        Configuration {
            support: self.support.clone(),
            values: digits.iter().map(|&d| self.space.value(d)).collect(),
        }
    }

    pub fn config_to_index(&self, config: &Configuration) -> Result<usize> {
        if config.support() != self.support.as_slice() {
            return Err(GibbsError::SupportMismatch(
                "configuration support differs from the enumerated support".into(),
            ));
        }
        let q = self.space.len();
        let mut index = 0usize;
        for (_, value) in config.iter() {
            let digit = self
                .space
                .index_of(value)
                .ok_or(GibbsError::FieldValueNotInSpinSpace(value))?;
            index = index * q + digit;
        }
        Ok(index)
    }

    pub fn iter(&self) -> impl Iterator<Item = Configuration> + '_ {
        (0..self.count).map(|i| self.index_to_config(i))
    }
}

/// All configurations of `Phi^A` in enumeration order.
pub fn enumerate_configs(
    space: &SpinSpace,
    support: &[VertexId],
    max_states: u128,
) -> Result<Vec<Configuration>> {
    let states = StateSpace::new(space, support, max_states)?;
    Ok(states.iter().collect())
}

/// `q^n` checked against a cap.
pub fn state_count(q: usize, n: usize, max_states: u128) -> Result<u128> {
    let needed = (q as u128)
        .checked_pow(u32::try_from(n).unwrap_or(u32::MAX))
        .ok_or(GibbsError::Capacity {
            what: format!("state space {q}^{n}"),
            needed: u128::MAX,
            limit: max_states,
        })?;
    if needed > max_states {
        return Err(GibbsError::Capacity {
            what: format!("state space {q}^{n}"),
            needed,
            limit: max_states,
        });
    }
    Ok(needed)
}

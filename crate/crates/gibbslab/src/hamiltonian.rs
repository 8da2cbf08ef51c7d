//! Pair interactions, potentials and finite-volume Hamiltonians.
//!
//! The nearest-neighbor pair potential assigns `-beta * rho(s(x), s(y))` to
//! every tree edge `<x, y>` (oriented parent -> child) and zero to every other
//! finite vertex set. The Hamiltonian of a volume sums the potential over all
//! edges meeting the volume; edges across the cut to the next sphere are
//! evaluated against a boundary configuration when one is supplied and
//! omitted otherwise (free boundary).

use serde::{Deserialize, Serialize};

use crate::error::{GibbsError, Result};
use crate::spins::{enumerate_configs, Configuration, SpinSpace};
use crate::topology::{CayleyTree, VertexId};

/// How `rho(s, h)` extends to a real field argument `h` that is not a spin.
///
/// The edge table only defines `rho` on spin pairs; boundary-field kernels
/// apply `rho` to an arbitrary real field value, so each model declares the
/// extension it means.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldRule {
    /// `rho(s, h) = s * h` (Ising product form).
    Bilinear,
    /// `rho(s, h) = 1` when `s == h`, otherwise `0` (Potts Kronecker form).
    Kronecker,
    /// `rho(s, h)` is the table entry at `h`'s spin index; `h` must be a spin value.
    TableLookup,
}

/// A nearest-neighbor model: spin space, pair table `rho`, coupling `J` and
/// inverse temperature `beta`.
#[derive(Debug, Clone)]
pub struct PairInteraction {
    space: SpinSpace,
    rho: Vec<f64>, // row-major |Phi| x |Phi|
    j: f64,
    beta: f64,
    field_rule: FieldRule,
}

impl PairInteraction {
    pub fn new(
        space: SpinSpace,
        rho_table: Vec<Vec<f64>>,
        j: f64,
        beta: f64,
        field_rule: FieldRule,
    ) -> Result<Self> {
        let q = space.len();
        if rho_table.len() != q || rho_table.iter().any(|row| row.len() != q) {
            return Err(GibbsError::InvalidModel(format!(
                "rho table must be {q} x {q} in the spin order"
            )));
        }
        let rho: Vec<f64> = rho_table.into_iter().flatten().collect();
        if rho.iter().any(|v| !v.is_finite()) {
            return Err(GibbsError::InvalidModel(
                "rho entries must be finite".into(),
            ));
        }
        if !j.is_finite() {
            return Err(GibbsError::InvalidModel("J must be finite".into()));
        }
        if !(beta.is_finite() && beta >= 0.0) {
            return Err(GibbsError::InvalidModel(
                "beta must be a non-negative real".into(),
            ));
        }
        Ok(PairInteraction {
            space,
            rho,
            j,
            beta,
            field_rule,
        })
    }

    /// Ising model: `Phi = {-1, +1}`, `rho(a, b) = a * b`.
    pub fn ising(j: f64, beta: f64) -> Result<Self> {
        let space = SpinSpace::ising();
        let table = product_table(&space);
        PairInteraction::new(space, table, j, beta, FieldRule::Bilinear)
    }

    /// Potts model with `q` labels: `rho` is the Kronecker delta on labels.
    pub fn potts(q: usize, j: f64, beta: f64) -> Result<Self> {
        let space = SpinSpace::potts(q)?;
        let table = kronecker_table(q);
        PairInteraction::new(space, table, j, beta, FieldRule::Kronecker)
    }

    /// Resolve a built-in model name: `ising` or `potts:q`.
    pub fn by_name(name: &str, j: f64, beta: f64) -> Result<Self> {
        if name == "ising" {
            return PairInteraction::ising(j, beta);
        }
        if let Some(q) = name.strip_prefix("potts:") {
            let q: usize = q.parse().map_err(|_| {
                GibbsError::InvalidModel(format!("invalid Potts spin count in {name:?}"))
            })?;
            return PairInteraction::potts(q, j, beta);
        }
        Err(GibbsError::InvalidModel(format!(
            "unknown model {name:?}; expected \"ising\", \"potts:q\" or a model file"
        )))
    }

    /// Build from a parsed model file. Table-backed models restrict field
    /// values to the spin set.
    pub fn from_spec(spec: ModelSpec) -> Result<Self> {
        let space = SpinSpace::new(spec.spins)?;
        PairInteraction::new(space, spec.rho, spec.j, spec.beta, FieldRule::TableLookup)
    }

    pub fn space(&self) -> &SpinSpace {
        &self.space
    }

    pub fn j(&self) -> f64 {
        self.j
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn field_rule(&self) -> FieldRule {
        self.field_rule
    }

    /// Table value `rho` at a pair of spin indices.
    pub fn rho(&self, row: usize, col: usize) -> f64 {
        self.rho[row * self.space.len() + col]
    }

    /// `rho(s_i, h)` for a real field value, per the model's field rule.
    pub fn rho_field(&self, spin_index: usize, h: f64) -> Result<f64> {
        match self.field_rule {
            FieldRule::Bilinear => Ok(self.space.value(spin_index) * h),
            FieldRule::Kronecker => Ok(if self.space.value(spin_index) == h {
                1.0
            } else {
                0.0
            }),
            FieldRule::TableLookup => {
                let col = self
                    .space
                    .index_of(h)
                    .ok_or(GibbsError::FieldValueNotInSpinSpace(h))?;
                Ok(self.rho(spin_index, col))
            }
        }
    }

    /// True for the Ising built-in shape: `{-1, +1}` spins with product rho.
    pub fn is_ising(&self) -> bool {
        self.space.is_binary_pm_one()
            && self.field_rule == FieldRule::Bilinear
            && self.rho == [1.0, -1.0, -1.0, 1.0]
    }

    /// Copy with every rho entry scaled; used to fold `J` into the table for
    /// potential-based (configuration-boundary) workflows.
    pub fn with_rho_scaled(&self, factor: f64) -> Result<Self> {
        let q = self.space.len();
        let table: Vec<Vec<f64>> = (0..q)
            .map(|r| (0..q).map(|c| self.rho(r, c) * factor).collect())
            .collect();
        PairInteraction::new(
            self.space.clone(),
            table,
            self.j,
            self.beta,
            self.field_rule,
        )
    }
}

fn product_table(space: &SpinSpace) -> Vec<Vec<f64>> {
    space
        .values()
        .iter()
        .map(|a| space.values().iter().map(|b| a * b).collect())
        .collect()
}

fn kronecker_table(q: usize) -> Vec<Vec<f64>> {
    (0..q)
        .map(|r| (0..q).map(|c| if r == c { 1.0 } else { 0.0 }).collect())
        .collect()
}

/// On-disk model description.
///
/// `rho` is row-major over the spin order.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelSpec {
    pub spins: Vec<f64>,
    pub rho: Vec<Vec<f64>>,
    #[serde(rename = "J")]
    pub j: f64,
    pub beta: f64,
}

/// A potential: a local energy term per finite vertex set, with a declared
/// range bound. `value` must depend only on the restriction of the
/// configuration to the set and vanish on sets wider than the range.
pub trait Potential {
    /// Spin space the potential acts on.
    fn space(&self) -> &SpinSpace;

    /// Declared range bound `r(P)`.
    fn declared_range(&self) -> usize;

    /// `P_B(sigma)` for a configuration covering `B`.
    fn value(&self, tree: &CayleyTree, set: &[VertexId], config: &Configuration) -> Result<f64>;
}

/// The range-1 potential of a pair interaction:
/// `-beta * rho(s(x), s(y))` on edges, zero elsewhere.
#[derive(Debug, Clone)]
pub struct PairPotential {
    interaction: PairInteraction,
}

impl PairPotential {
    pub fn interaction(&self) -> &PairInteraction {
        &self.interaction
    }
}

/// Build the Boltzmann pair potential of an interaction.
pub fn pair_potential(interaction: &PairInteraction) -> PairPotential {
    PairPotential {
        interaction: interaction.clone(),
    }
}

impl Potential for PairPotential {
    fn space(&self) -> &SpinSpace {
        self.interaction.space()
    }

    fn declared_range(&self) -> usize {
        1
    }

    fn value(&self, tree: &CayleyTree, set: &[VertexId], config: &Configuration) -> Result<f64> {
        if set.len() != 2 {
            return Ok(0.0);
        }
        let (a, b) = (set[0], set[1]);
        // orient parent -> child; non-edges contribute nothing
        let (x, y) = if tree.parent(b)? == Some(a) {
            (a, b)
        } else if tree.parent(a)? == Some(b) {
            (b, a)
        } else {
            return Ok(0.0);
        };
        let space = self.interaction.space();
        let sx = spin_index(space, config, x)?;
        let sy = spin_index(space, config, y)?;
        Ok(-self.interaction.beta() * self.interaction.rho(sx, sy))
    }
}

fn spin_index(space: &SpinSpace, config: &Configuration, vertex: VertexId) -> Result<usize> {
    let value = config.value_at(vertex).ok_or_else(|| {
        GibbsError::SupportMismatch(format!("configuration does not cover vertex {vertex}"))
    })?;
    space
        .index_of(value)
        .ok_or(GibbsError::FieldValueNotInSpinSpace(value))
}

const RANGE_CHECK_SIZE_CAP: usize = 6;
const RANGE_CHECK_SUBSET_LIMIT: usize = 100_000;
const RANGE_CHECK_VERTEX_CAP: usize = 512;

/// Check `P_B = 0` for every connected subset `B` of the truncation with
/// `diam(B) > R`, exhaustively over subsets up to a size cap and over all
/// configurations on each subset.
pub fn is_finite_range(p: &dyn Potential, tree: &CayleyTree, r: usize) -> Result<bool> {
    if tree.vertex_count() > RANGE_CHECK_VERTEX_CAP {
        return Err(GibbsError::Capacity {
            what: "finite-range scan over connected subsets".into(),
            needed: tree.vertex_count() as u128,
            limit: RANGE_CHECK_VERTEX_CAP as u128,
        });
    }
    for subset in connected_subsets(tree, RANGE_CHECK_SIZE_CAP, RANGE_CHECK_SUBSET_LIMIT)? {
        if subset_diameter(tree, &subset)? <= r {
            continue;
        }
        for config in enumerate_configs(p.space(), &subset, 1 << 20)? {
            if p.value(tree, &subset, &config)? != 0.0 {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

fn subset_diameter(tree: &CayleyTree, subset: &[VertexId]) -> Result<usize> {
    let mut diam = 0;
    for (i, &x) in subset.iter().enumerate() {
        for &y in &subset[i + 1..] {
            diam = diam.max(tree.distance(x, y)?);
        }
    }
    Ok(diam)
}

/// All connected subsets with 2..=cap vertices, each sorted, no duplicates.
fn connected_subsets(
    tree: &CayleyTree,
    size_cap: usize,
    limit: usize,
) -> Result<Vec<Vec<VertexId>>> {
    use std::collections::BTreeSet;
    let mut seen: BTreeSet<Vec<VertexId>> = BTreeSet::new();
    let mut queue: Vec<Vec<VertexId>> = (0..tree.vertex_count()).map(|v| vec![v]).collect();
    while let Some(subset) = queue.pop() {
        if subset.len() >= size_cap {
            continue;
        }
        let mut neighbors: BTreeSet<VertexId> = BTreeSet::new();
        for &v in &subset {
            if let Some(parent) = tree.parent(v)? {
                neighbors.insert(parent);
            }
            neighbors.extend(tree.successors(v)?.iter().copied());
        }
        for u in neighbors {
            if subset.binary_search(&u).is_ok() {
                continue;
            }
            let mut next = subset.clone();
            let pos = next.binary_search(&u).unwrap_err();
            next.insert(pos, u);
            if seen.insert(next.clone()) {
                if seen.len() > limit {
                    return Err(GibbsError::Capacity {
                        what: "connected subset enumeration".into(),
                        needed: seen.len() as u128,
                        limit: limit as u128,
                    });
                }
                queue.push(next);
            }
        }
    }
    Ok(seen.into_iter().collect())
}

/// Hamiltonian of the ball `V_n`: the potential summed over every edge
/// meeting `V_n`.
///
/// `sigma` must be total on `V_n`. With a boundary configuration (total on
/// `W_{n+1}`) the cut edges are evaluated on the merged configuration; with
/// none they are omitted.
pub fn hamiltonian_volume(
    p: &dyn Potential,
    tree: &CayleyTree,
    n: usize,
    sigma: &Configuration,
    boundary: Option<&Configuration>,
) -> Result<f64> {
    let ball = tree.ball(n)?;
    if sigma.support() != ball.as_slice() {
        return Err(GibbsError::SupportMismatch(format!(
            "sigma must be total on V_{n} ({} vertices), got {} vertices",
            ball.len(),
            sigma.len()
        )));
    }
    let merged;
    let full = match boundary {
        Some(omega) => {
            if n + 1 > tree.depth() {
                return Err(GibbsError::ShallowTree(format!(
                    "boundary on W_{} requires depth >= {}",
                    n + 1,
                    n + 1
                )));
            }
            let sphere = tree.sphere(n + 1)?;
            if omega.support() != sphere.as_slice() {
                return Err(GibbsError::SupportMismatch(format!(
                    "boundary must be total on W_{} ({} vertices)",
                    n + 1,
                    sphere.len()
                )));
            }
            merged = sigma.merge(omega)?;
            &merged
        }
        None => sigma,
    };

    let mut h = 0.0;
    for (x, y) in tree.interior_edges(n)? {
        h += p.value(tree, &[x, y], full)?;
    }
    if boundary.is_some() {
        for (x, y) in tree.cut_edges(n)? {
            h += p.value(tree, &[x, y], full)?;
        }
    }
    Ok(h)
}

//! Consistent families of finite-volume marginals and their observables.
//!
//! A boundary field induces one field-flavor kernel per ball; the family
//! `{mu_n}` of those tables is the finite-volume shadow of a splitting Gibbs
//! measure. When the field solves the consistency condition, projecting
//! `mu_n` onto the smaller ball reproduces `mu_{n-1}` exactly, which
//! `check_kolmogorov_consistency` certifies level by level.

use crate::boundary_law::BoundaryField;
use crate::error::{GibbsError, Result};
use crate::hamiltonian::PairInteraction;
use crate::numeric::project_blocks;
use crate::specification::{kernel_field_boundary, ConsistencyCertificate, FiniteVolumeKernel};
use crate::spins::state_count;
use crate::topology::{CayleyTree, VertexId};

/// Exact marginal tables `mu_0, ..., mu_{n_max}` for one model and field.
#[derive(Debug, Clone)]
pub struct MarginalFamily {
    interaction: PairInteraction,
    field: BoundaryField,
    levels: Vec<FiniteVolumeKernel>,
}

impl MarginalFamily {
    pub fn interaction(&self) -> &PairInteraction {
        &self.interaction
    }

    pub fn field(&self) -> &BoundaryField {
        &self.field
    }

    /// Marginal tables by level, `levels()[n]` being the table over `V_n`.
    pub fn levels(&self) -> &[FiniteVolumeKernel] {
        &self.levels
    }

    pub fn n_max(&self) -> usize {
        self.levels.len() - 1
    }

    /// Fault-injection helper for negative controls: rescale one entry of one
    /// level and renormalize it.
    pub fn with_level_scaled(&self, n: usize, index: usize, factor: f64) -> Result<MarginalFamily> {
        if n >= self.levels.len() {
            return Err(GibbsError::InvalidParameter(format!(
                "level {n} not present in the family"
            )));
        }
        let mut levels = self.levels.clone();
        levels[n] = levels[n].with_weight_scaled(index, factor)?;
        Ok(MarginalFamily {
            interaction: self.interaction.clone(),
            field: self.field.clone(),
            levels,
        })
    }

    /// Spin expectation at a vertex under the deepest table containing it.
    pub fn magnetization(&self, x: VertexId) -> Result<f64> {
        let deepest = self.levels.last().expect("family has at least one level");
        if x >= deepest.volume_len() {
            return Err(GibbsError::UnknownVertex(x));
        }
        let q = deepest.space().len();
        let stride = state_count(q, deepest.volume_len() - 1 - x, u128::MAX)? as usize;
        let mut distribution = vec![0f64; q];
        for (s, &p) in deepest.probabilities().iter().enumerate() {
            distribution[(s / stride) % q] += p;
        }
        Ok(distribution
            .iter()
            .enumerate()
            .map(|(d, &mass)| deepest.space().value(d) * mass)
            .sum())
    }

    /// Spin expectation at every vertex of the deepest ball, in one pass.
    pub fn magnetizations(&self) -> Vec<f64> {
        let deepest = self.levels.last().expect("family has at least one level");
        let q = deepest.space().len();
        let vol = deepest.volume_len();
        let mut site_mass = vec![0f64; vol * q];
        let mut digits = vec![0usize; vol];
        for &p in deepest.probabilities() {
            for (v, &d) in digits.iter().enumerate() {
                site_mass[v * q + d] += p;
            }
            for pos in (0..vol).rev() {
                digits[pos] += 1;
                if digits[pos] < q {
                    break;
                }
                digits[pos] = 0;
            }
        }
        (0..vol)
            .map(|v| {
                (0..q)
                    .map(|d| deepest.space().value(d) * site_mass[v * q + d])
                    .sum()
            })
            .collect()
    }
}

/// Build the family `mu_0, ..., mu_{n_max}` of field-flavor kernel tables.
pub fn build_marginals(
    interaction: &PairInteraction,
    tree: &CayleyTree,
    field: &BoundaryField,
    n_max: usize,
    max_states: u128,
) -> Result<MarginalFamily> {
    if n_max > tree.depth() {
        return Err(GibbsError::SphereOutOfRange {
            n: n_max,
            depth: tree.depth(),
        });
    }
    let levels = (0..=n_max)
        .map(|n| kernel_field_boundary(interaction, tree, n, field, max_states))
        .collect::<Result<Vec<_>>>()?;
    Ok(MarginalFamily {
        interaction: interaction.clone(),
        field: field.clone(),
        levels,
    })
}

/// Pushforward of a table on `V_n` under restriction to `V_m`, `m < n`:
/// each base probability is the sum over its extensions.
pub fn project(
    table: &[f64],
    tree: &CayleyTree,
    n: usize,
    m: usize,
    space_size: usize,
) -> Result<Vec<f64>> {
    if m >= n {
        return Err(GibbsError::InvalidParameter(format!(
            "projection needs m < n, got m = {m}, n = {n}"
        )));
    }
    let vol_n = tree.ball_size(n)?;
    let vol_m = tree.ball_size(m)?;
    let expected = state_count(space_size, vol_n, u128::MAX)? as usize;
    if table.len() != expected {
        return Err(GibbsError::SupportMismatch(format!(
            "table has {} entries, the configurations of V_{n} number {expected}",
            table.len()
        )));
    }
    let factor = state_count(space_size, vol_n - vol_m, u128::MAX)? as usize;
    Ok(project_blocks(table, factor))
}

/// Compare every adjacent pair of levels: the projection of `mu_n` onto
/// `V_{n-1}` against `mu_{n-1}`, in max norm.
pub fn check_kolmogorov_consistency(
    family: &MarginalFamily,
    tree: &CayleyTree,
    tol: f64,
) -> Result<ConsistencyCertificate> {
    if family.levels.len() < 2 {
        return Err(GibbsError::InvalidParameter(
            "consistency needs a family with at least two levels".into(),
        ));
    }
    let q = family.interaction.space().len();
    let mut residuals = Vec::new();
    for n in 1..family.levels.len() {
        let projected = project(family.levels[n].probabilities(), tree, n, n - 1, q)?;
        let deviation = projected
            .iter()
            .zip(family.levels[n - 1].probabilities().iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        residuals.push(deviation);
    }
    let mut cert = ConsistencyCertificate::from_residuals(residuals, tol);
    for (n, level) in family.levels.iter().enumerate() {
        cert.log_z.insert(format!("V{n}"), level.log_z());
    }
    Ok(cert)
}

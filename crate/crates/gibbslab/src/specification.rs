//! Exact finite-volume Boltzmann kernels and their consistency checks.
//!
//! Two kernel flavors coexist. The configuration-boundary kernel gives each
//! configuration of the ball `V_n` a probability proportional to
//! `exp(-H_n)`, with the Hamiltonian drawn from a potential and a fixed
//! boundary configuration on `W_{n+1}`. The field-boundary kernel replaces
//! the boundary configuration by a real-valued field on the sphere `W_n`,
//! with exponent
//!
//! ```text
//! J beta * sum_{<x,y> in V_n} rho(s(x), s(y)) + sum_{x in W_n} rho(s(x), h(x))
//! ```
//!
//! All weights are computed in the log domain and normalized by a
//! max-shifted exponential sum, so tables stay exact at any temperature.
//!
//! `compose` resamples an inner volume from an outer kernel; families built
//! from a potential satisfy `compose(zeta_m, zeta_n) = zeta_m`, which
//! `check_specification` certifies by enumeration. `check_compatibility_bruteforce`
//! certifies the field-flavor analogue: summing the level-`n` kernel over the
//! outermost sphere reproduces the level-`n-1` kernel.

use std::collections::{BTreeMap, HashMap};

use serde::Serialize;

use crate::boundary_law::BoundaryField;
use crate::error::{GibbsError, Result};
use crate::hamiltonian::{PairInteraction, Potential};
use crate::numeric::{log_add_exp, log_sum_exp};
use crate::spins::{state_count, Configuration, SpinSpace};
use crate::topology::{CayleyTree, VertexId};

/// Boundary datum a kernel was built from.
#[derive(Debug, Clone)]
pub enum KernelFlavor {
    /// Fixed spin configuration on `W_{n+1}`.
    ConfigurationBoundary { omega: Configuration },
    /// Real field on `W_n`, listed in vertex order.
    FieldBoundary { field: Vec<(VertexId, f64)> },
}

/// Exact probability table over the configurations of a ball `V_n`.
///
/// Entries are indexed by the enumeration order of `Phi^{V_n}` (vertex 0 is
/// the most significant digit). Immutable once built.
#[derive(Debug, Clone)]
pub struct FiniteVolumeKernel {
    n: usize,
    flavor: KernelFlavor,
    space: SpinSpace,
    volume_len: usize,
    probabilities: Vec<f64>,
    log_z: f64,
}

impl FiniteVolumeKernel {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn flavor(&self) -> &KernelFlavor {
        &self.flavor
    }

    pub fn space(&self) -> &SpinSpace {
        &self.space
    }

    /// Number of vertices in the volume `V_n`.
    pub fn volume_len(&self) -> usize {
        self.volume_len
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn log_z(&self) -> f64 {
        self.log_z
    }

    /// Probability of a full configuration of `V_n`.
    pub fn probability_of(&self, config: &Configuration) -> Result<f64> {
        let states = crate::spins::StateSpace::new(
            &self.space,
            &(0..self.volume_len).collect::<Vec<_>>(),
            u128::MAX,
        )?;
        Ok(self.probabilities[states.config_to_index(config)?])
    }

    /// Largest entrywise deviation from another kernel on the same volume.
    pub fn max_abs_deviation(&self, other: &FiniteVolumeKernel) -> Result<f64> {
        if self.probabilities.len() != other.probabilities.len() {
            return Err(GibbsError::SupportMismatch(
                "kernels live on different state spaces".into(),
            ));
        }
        Ok(self
            .probabilities
            .iter()
            .zip(other.probabilities.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }

    /// Fault-injection helper for negative controls: scale one weight and
    /// renormalize, producing a valid table that is no longer the Boltzmann
    /// kernel.
    pub fn with_weight_scaled(&self, index: usize, factor: f64) -> Result<FiniteVolumeKernel> {
        if index >= self.probabilities.len() {
            return Err(GibbsError::InvalidParameter(format!(
                "state index {index} out of range"
            )));
        }
        if !(factor.is_finite() && factor > 0.0) {
            return Err(GibbsError::InvalidParameter(
                "scale factor must be positive and finite".into(),
            ));
        }
        let mut probabilities = self.probabilities.clone();
        probabilities[index] *= factor;
        let total: f64 = probabilities.iter().sum();
        for p in probabilities.iter_mut() {
            *p /= total;
        }
        Ok(FiniteVolumeKernel {
            probabilities,
            flavor: self.flavor.clone(),
            space: self.space.clone(),
            ..*self
        })
    }
}

/// Pairwise and per-site exponent terms; the unified input of the state loop.
struct ExponentTerms {
    /// `(x, y, table)` with `table[sx * q + sy]` added for each edge.
    interior: Vec<(VertexId, VertexId, Vec<f64>)>,
    /// `(x, bias)` with `bias[sx]` added for each sphere vertex.
    bias: Vec<(VertexId, Vec<f64>)>,
}

fn run_state_loop(
    space: &SpinSpace,
    volume_len: usize,
    terms: &ExponentTerms,
    max_states: u128,
) -> Result<(Vec<f64>, f64)> {
    let q = space.len();
    let count = state_count(q, volume_len, max_states)? as usize;
    let mut weights = vec![0f64; count];
    let mut digits = vec![0usize; volume_len];
    for slot in weights.iter_mut() {
        let mut acc = 0.0;
        for (x, y, table) in &terms.interior {
            acc += table[digits[*x] * q + digits[*y]];
        }
        for (x, bias) in &terms.bias {
            acc += bias[digits[*x]];
        }
        *slot = acc;
        // odometer: the last vertex varies fastest
        for pos in (0..volume_len).rev() {
            digits[pos] += 1;
            if digits[pos] < q {
                break;
            }
            digits[pos] = 0;
        }
    }
    let log_z = log_sum_exp(&weights);
    for w in weights.iter_mut() {
        *w = (*w - log_z).exp();
    }
    debug_assert!((weights.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    Ok((weights, log_z))
}

/// Exact kernel over `V_n` for a potential and a boundary configuration on
/// `W_{n+1}`: probabilities proportional to `exp(-H_n(sigma omega))`.
pub fn kernel_config_boundary(
    p: &dyn Potential,
    tree: &CayleyTree,
    n: usize,
    omega: &Configuration,
    max_states: u128,
) -> Result<FiniteVolumeKernel> {
    if n + 1 > tree.depth() {
        return Err(GibbsError::ShallowTree(format!(
            "kernel at V_{n} needs a boundary sphere W_{}, tree depth is {}",
            n + 1,
            tree.depth()
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
    let space = p.space().clone();
    let q = space.len();

    // tabulate -P over each edge so the state loop is pure lookups
    let mut interior = Vec::new();
    for (x, y) in tree.interior_edges(n)? {
        let mut table = vec![0f64; q * q];
        for sx in 0..q {
            for sy in 0..q {
                let cfg = Configuration::new([(x, space.value(sx)), (y, space.value(sy))])?;
                table[sx * q + sy] = -p.value(tree, &[x, y], &cfg)?;
            }
        }
        interior.push((x, y, table));
    }
    let mut bias_map: BTreeMap<VertexId, Vec<f64>> = BTreeMap::new();
    for (x, y) in tree.cut_edges(n)? {
        let omega_y = omega.value_at(y).expect("boundary is total on the sphere");
        let bias = bias_map.entry(x).or_insert_with(|| vec![0f64; q]);
        for (sx, slot) in bias.iter_mut().enumerate() {
            let cfg = Configuration::new([(x, space.value(sx)), (y, omega_y)])?;
            *slot += -p.value(tree, &[x, y], &cfg)?;
        }
    }
    let terms = ExponentTerms {
        interior,
        bias: bias_map.into_iter().collect(),
    };

    let volume_len = tree.ball_size(n)?;
    let (probabilities, log_z) = run_state_loop(&space, volume_len, &terms, max_states)?;
    Ok(FiniteVolumeKernel {
        n,
        flavor: KernelFlavor::ConfigurationBoundary {
            omega: omega.clone(),
        },
        space,
        volume_len,
        probabilities,
        log_z,
    })
}

/// Exact kernel over `V_n` for an interaction and a boundary field on `W_n`.
pub fn kernel_field_boundary(
    interaction: &PairInteraction,
    tree: &CayleyTree,
    n: usize,
    field: &BoundaryField,
    max_states: u128,
) -> Result<FiniteVolumeKernel> {
    let space = interaction.space().clone();
    let q = space.len();
    let coupling = interaction.j() * interaction.beta();

    let mut interior = Vec::new();
    for (x, y) in tree.interior_edges(n)? {
        let mut table = vec![0f64; q * q];
        for sx in 0..q {
            for sy in 0..q {
                table[sx * q + sy] = coupling * interaction.rho(sx, sy);
            }
        }
        interior.push((x, y, table));
    }
    let mut bias = Vec::new();
    let mut field_values = Vec::new();
    for x in tree.sphere_range(n)? {
        let h = field.value_at(x)?;
        field_values.push((x, h));
        let mut b = vec![0f64; q];
        for (sx, slot) in b.iter_mut().enumerate() {
            *slot = interaction.rho_field(sx, h)?;
        }
        bias.push((x, b));
    }
    let terms = ExponentTerms { interior, bias };

    let volume_len = tree.ball_size(n)?;
    let (probabilities, log_z) = run_state_loop(&space, volume_len, &terms, max_states)?;
    Ok(FiniteVolumeKernel {
        n,
        flavor: KernelFlavor::FieldBoundary {
            field: field_values,
        },
        space,
        volume_len,
        probabilities,
        log_z,
    })
}

/// Compose an outer kernel at `V_m` with the inner kernel family at `V_n`
/// (`n <= m`): draw from the outer kernel, then resample `V_n` from the inner
/// kernel conditioned on everything outside it.
///
/// Inner kernels are built on demand from the potential, one per boundary
/// configuration on `W_{n+1}` arising from the outer support.
pub fn compose(
    outer: &FiniteVolumeKernel,
    p: &dyn Potential,
    tree: &CayleyTree,
    n: usize,
    max_states: u128,
) -> Result<FiniteVolumeKernel> {
    let m = outer.n();
    if n > m {
        return Err(GibbsError::InvalidParameter(format!(
            "inner volume V_{n} must sit inside the outer volume V_{m}"
        )));
    }
    let q = outer.space().len();
    let vol_m = outer.volume_len();
    let vol_n = tree.ball_size(n)?;
    let vol_n1 = tree.ball_size(n + 1)?;
    let inner_states = state_count(q, vol_n, max_states)? as usize;
    let suffix_block = state_count(q, vol_m - vol_n, max_states)? as usize;

    // marginal of the outer kernel over the V_n digits, per suffix state
    let mut marginal = vec![0f64; suffix_block];
    for (s, prob) in outer.probabilities().iter().enumerate() {
        marginal[s % suffix_block] += prob;
    }

    // boundary index inside the suffix: W_{n+1} holds its leading digits
    let boundary_digits = vol_n1 - vol_n;
    let tail_block = state_count(q, vol_m.saturating_sub(vol_n1), u128::MAX)? as usize;

    let fixed_boundary = if m == n {
        match outer.flavor() {
            KernelFlavor::ConfigurationBoundary { omega } => Some(omega.clone()),
            KernelFlavor::FieldBoundary { .. } => {
                return Err(GibbsError::InvalidParameter(
                    "equal-volume composition needs a configuration-boundary outer kernel".into(),
                ))
            }
        }
    } else {
        if vol_n1 > vol_m {
            return Err(GibbsError::InvalidParameter(format!(
                "outer volume V_{m} does not contain the inner boundary sphere W_{}",
                n + 1
            )));
        }
        None
    };

    // build each needed inner kernel once, keyed by its boundary state
    let mut inner_kernels: HashMap<usize, FiniteVolumeKernel> = HashMap::new();
    for b in 0..suffix_block {
        let c = if fixed_boundary.is_some() {
            0
        } else {
            b / tail_block
        };
        if inner_kernels.contains_key(&c) {
            continue;
        }
        let omega = match &fixed_boundary {
            Some(omega) => omega.clone(),
            None => {
                let mut rest = c;
                let mut pairs = Vec::with_capacity(boundary_digits);
                for i in (0..boundary_digits).rev() {
                    pairs.push((vol_n + i, outer.space().value(rest % q)));
                    rest /= q;
                }
                Configuration::new(pairs)?
            }
        };
        let kernel = kernel_config_boundary(p, tree, n, &omega, max_states)?;
        debug_assert_eq!(kernel.probabilities().len(), inner_states);
        inner_kernels.insert(c, kernel);
    }

    let total = outer.probabilities().len();
    let mut probabilities = vec![0f64; total];
    for (s, slot) in probabilities.iter_mut().enumerate() {
        let a = s / suffix_block;
        let b = s % suffix_block;
        let c = if fixed_boundary.is_some() {
            0
        } else {
            b / tail_block
        };
        *slot = marginal[b] * inner_kernels[&c].probabilities()[a];
    }

    Ok(FiniteVolumeKernel {
        n: m,
        flavor: outer.flavor.clone(),
        space: outer.space.clone(),
        volume_len: vol_m,
        probabilities,
        log_z: outer.log_z,
    })
}

/// Verdict and diagnostics of a consistency check.
#[derive(Debug, Clone, Serialize)]
pub struct ConsistencyCertificate {
    /// Largest deviation observed.
    #[serde(rename = "residual")]
    pub max_residual: f64,
    pub tol: f64,
    pub verdict: bool,
    /// Per-vertex normalizers `a(x) > 0`, where the check defines them.
    #[serde(rename = "a")]
    pub normalizers: BTreeMap<VertexId, f64>,
    /// Log partition functions by volume, e.g. `{"V1": ..., "V2": ...}`.
    #[serde(rename = "logZ")]
    pub log_z: BTreeMap<String, f64>,
    /// Per-check deviations (one per compared object).
    pub residuals: Vec<f64>,
    /// `|log Z_n - log Z_{n-1} - sum_x log a(x)|`, when the check measures it.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub z_recursion_residual: Option<f64>,
    /// Vertices excluded from the check (truncation leaves).
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub excluded: Vec<VertexId>,
}

impl ConsistencyCertificate {
    pub(crate) fn from_residuals(residuals: Vec<f64>, tol: f64) -> Self {
        let max_residual = residuals.iter().cloned().fold(0.0, f64::max);
        ConsistencyCertificate {
            max_residual,
            tol,
            verdict: max_residual <= tol,
            normalizers: BTreeMap::new(),
            log_z: BTreeMap::new(),
            residuals,
            z_recursion_residual: None,
            excluded: Vec::new(),
        }
    }
}

/// Certify `compose(zeta_m, zeta_n) = zeta_m` by exhaustive enumeration.
pub fn check_specification(
    p: &dyn Potential,
    tree: &CayleyTree,
    m: usize,
    n: usize,
    omega: &Configuration,
    tol: f64,
    max_states: u128,
) -> Result<ConsistencyCertificate> {
    if n >= m {
        return Err(GibbsError::InvalidParameter(format!(
            "specification check needs n < m, got n = {n}, m = {m}"
        )));
    }
    if m + 1 > tree.depth() {
        return Err(GibbsError::ShallowTree(format!(
            "outer volume V_{m} needs boundary sphere W_{}, tree depth is {}",
            m + 1,
            tree.depth()
        )));
    }
    let direct = kernel_config_boundary(p, tree, m, omega, max_states)?;
    let composed = compose(&direct, p, tree, n, max_states)?;
    let residual = composed.max_abs_deviation(&direct)?;
    let mut cert = ConsistencyCertificate::from_residuals(vec![residual], tol);
    cert.log_z.insert(format!("V{m}"), direct.log_z());
    Ok(cert)
}

/// Certify the field-flavor consistency by brute force: summing the level-`n`
/// kernel over the configurations of `W_n` must reproduce the level-`n-1`
/// kernel. The certificate carries the measured per-vertex normalizers `a(x)`
/// over `W_{n-1}` and the partition-function recursion
/// `Z_{n-1} * prod_x a(x) = Z_n`.
pub fn check_compatibility_bruteforce(
    interaction: &PairInteraction,
    tree: &CayleyTree,
    n: usize,
    field: &BoundaryField,
    tol: f64,
    max_states: u128,
) -> Result<ConsistencyCertificate> {
    if n == 0 {
        return Err(GibbsError::InvalidParameter(
            "compatibility check needs n >= 1".into(),
        ));
    }
    let kernel_n = kernel_field_boundary(interaction, tree, n, field, max_states)?;
    let kernel_prev = kernel_field_boundary(interaction, tree, n - 1, field, max_states)?;

    let q = interaction.space().len();
    let factor = state_count(
        q,
        kernel_n.volume_len() - kernel_prev.volume_len(),
        max_states,
    )? as usize;
    let projected = crate::numeric::project_blocks(kernel_n.probabilities(), factor);

    let residuals: Vec<f64> = projected
        .iter()
        .zip(kernel_prev.probabilities().iter())
        .map(|(a, b)| (a - b).abs())
        .collect();

    let mut cert = ConsistencyCertificate::from_residuals(residuals, tol);
    let coupling = interaction.j() * interaction.beta();
    let t = q - 1; // canonical spin for the normalizer ratio
    let mut log_a_sum = 0.0;
    for x in tree.sphere_range(n - 1)? {
        let mut log_a = -interaction.rho_field(t, field.value_at(x)?)?;
        for &y in tree.successors(x)? {
            let h_y = field.value_at(y)?;
            let mut bracket = f64::NEG_INFINITY;
            for u in 0..q {
                bracket = log_add_exp(
                    bracket,
                    coupling * interaction.rho(t, u) + interaction.rho_field(u, h_y)?,
                );
            }
            log_a += bracket;
        }
        log_a_sum += log_a;
        cert.normalizers.insert(x, log_a.exp());
    }
    cert.z_recursion_residual = Some((kernel_n.log_z() - kernel_prev.log_z() - log_a_sum).abs());
    cert.log_z
        .insert(format!("V{}", n - 1), kernel_prev.log_z());
    cert.log_z.insert(format!("V{n}"), kernel_n.log_z());
    cert.verdict = cert.max_residual <= tol;
    Ok(cert)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::pair_potential;
    use crate::spins::{StateSpace, DEFAULT_MAX_STATES};
    use approx::assert_abs_diff_eq;

    fn uniform_boundary(tree: &CayleyTree, n: usize, value: f64) -> Configuration {
        Configuration::constant(tree.sphere(n).unwrap(), value).unwrap()
    }

    #[test]
    fn zero_beta_gives_the_uniform_kernel() {
        let tree = CayleyTree::build(2, 2).unwrap();
        let interaction = PairInteraction::ising(1.0, 0.0).unwrap();
        let p = pair_potential(&interaction);
        let omega = uniform_boundary(&tree, 2, 1.0);
        let kernel = kernel_config_boundary(&p, &tree, 1, &omega, DEFAULT_MAX_STATES).unwrap();
        for &prob in kernel.probabilities() {
            assert_abs_diff_eq!(prob, 1.0 / 16.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn root_kernel_two_term_enumeration() {
        // V_0 with all-plus boundary on W_1: P(+) = e^3 / (e^3 + e^-3)
        let tree = CayleyTree::build(2, 1).unwrap();
        let interaction = PairInteraction::ising(1.0, 1.0).unwrap();
        let p = pair_potential(&interaction);
        let omega = uniform_boundary(&tree, 1, 1.0);
        let kernel = kernel_config_boundary(&p, &tree, 0, &omega, DEFAULT_MAX_STATES).unwrap();
        let expected = 3f64.exp() / (3f64.exp() + (-3f64).exp());
        assert_abs_diff_eq!(kernel.probabilities()[1], expected, epsilon = 1e-14);
        assert_abs_diff_eq!(kernel.probabilities()[0], 1.0 - expected, epsilon = 1e-14);
    }

    #[test]
    fn boundary_flip_permutes_the_table() {
        let tree = CayleyTree::build(2, 2).unwrap();
        let interaction = PairInteraction::ising(1.0, 0.8).unwrap();
        let p = pair_potential(&interaction);
        let w2 = tree.sphere(2).unwrap();
        let states = StateSpace::new(&SpinSpace::ising(), &w2, DEFAULT_MAX_STATES).unwrap();
        for omega in states.iter() {
            let plain = kernel_config_boundary(&p, &tree, 1, &omega, DEFAULT_MAX_STATES).unwrap();
            let flipped =
                kernel_config_boundary(&p, &tree, 1, &omega.negated(), DEFAULT_MAX_STATES).unwrap();
            let count = plain.probabilities().len();
            for s in 0..count {
                assert_abs_diff_eq!(
                    plain.probabilities()[s],
                    flipped.probabilities()[count - 1 - s],
                    epsilon = 1e-12
                );
            }
        }
    }

    #[test]
    fn field_kernel_at_the_root() {
        let tree = CayleyTree::build(2, 1).unwrap();
        let interaction = PairInteraction::ising(1.0, 1.0).unwrap();

        let kernel = kernel_field_boundary(
            &interaction,
            &tree,
            0,
            &BoundaryField::Homogeneous(0.0),
            DEFAULT_MAX_STATES,
        )
        .unwrap();
        assert_abs_diff_eq!(kernel.probabilities()[0], 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(kernel.probabilities()[1], 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(kernel.log_z(), 2f64.ln(), epsilon = 1e-15);

        let h = 0.85;
        let kernel = kernel_field_boundary(
            &interaction,
            &tree,
            0,
            &BoundaryField::Homogeneous(h),
            DEFAULT_MAX_STATES,
        )
        .unwrap();
        let expected = h.exp() / (h.exp() + (-h).exp());
        assert_abs_diff_eq!(kernel.probabilities()[1], expected, epsilon = 1e-14);
    }

    #[test]
    fn kernels_normalize_to_one() {
        let tree = CayleyTree::build(2, 3).unwrap();
        for beta in [0.0, 0.3, 1.0, 2.5] {
            let interaction = PairInteraction::ising(1.0, beta).unwrap();
            let p = pair_potential(&interaction);
            let omega = uniform_boundary(&tree, 3, -1.0);
            let kernel = kernel_config_boundary(&p, &tree, 2, &omega, DEFAULT_MAX_STATES).unwrap();
            assert_abs_diff_eq!(
                kernel.probabilities().iter().sum::<f64>(),
                1.0,
                epsilon = 1e-12
            );
            let field_kernel = kernel_field_boundary(
                &interaction,
                &tree,
                2,
                &BoundaryField::Homogeneous(0.4),
                DEFAULT_MAX_STATES,
            )
            .unwrap();
            assert_abs_diff_eq!(
                field_kernel.probabilities().iter().sum::<f64>(),
                1.0,
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn log_z_matches_naive_summation() {
        // direct exp-sum does not overflow at beta <= 2, n <= 2
        let tree = CayleyTree::build(2, 3).unwrap();
        let interaction = PairInteraction::ising(1.0, 2.0).unwrap();
        let p = pair_potential(&interaction);
        let omega = uniform_boundary(&tree, 3, 1.0);
        let kernel = kernel_config_boundary(&p, &tree, 2, &omega, DEFAULT_MAX_STATES).unwrap();

        let ball = tree.ball(2).unwrap();
        let states = StateSpace::new(&SpinSpace::ising(), &ball, DEFAULT_MAX_STATES).unwrap();
        let mut z = 0.0;
        for sigma in states.iter() {
            let h =
                crate::hamiltonian::hamiltonian_volume(&p, &tree, 2, &sigma, Some(&omega)).unwrap();
            z += (-h).exp();
        }
        assert!((kernel.log_z() - z.ln()).abs() / z.ln().abs() < 1e-10);
    }

    #[test]
    fn composing_with_a_zero_beta_inner_uniformizes_the_core() {
        let tree = CayleyTree::build(2, 3).unwrap();
        let outer_interaction = PairInteraction::ising(1.0, 0.7).unwrap();
        let outer_p = pair_potential(&outer_interaction);
        let omega = uniform_boundary(&tree, 3, 1.0);
        let outer = kernel_config_boundary(&outer_p, &tree, 2, &omega, DEFAULT_MAX_STATES).unwrap();

        let flat = PairInteraction::ising(1.0, 0.0).unwrap();
        let flat_p = pair_potential(&flat);
        let composed = compose(&outer, &flat_p, &tree, 1, DEFAULT_MAX_STATES).unwrap();

        // expected: marginal over the suffix digits times the uniform inner
        let q = 2usize;
        let suffix = q.pow(6); // |V_2| - |V_1| = 6
        let inner_states = q.pow(4);
        let mut marginal = vec![0f64; suffix];
        for (s, p) in outer.probabilities().iter().enumerate() {
            marginal[s % suffix] += p;
        }
        for (s, &prob) in composed.probabilities().iter().enumerate() {
            let expected = marginal[s % suffix] / inner_states as f64;
            assert_abs_diff_eq!(prob, expected, epsilon = 1e-14);
        }
    }

    #[test]
    fn composition_reproduces_the_outer_kernel() {
        let tree = CayleyTree::build(2, 3).unwrap();
        let interaction = PairInteraction::ising(1.0, 0.5).unwrap();
        let p = pair_potential(&interaction);
        let omega = Configuration::new(
            tree.sphere(3)
                .unwrap()
                .into_iter()
                .map(|v| (v, if v % 3 == 0 { -1.0 } else { 1.0 })),
        )
        .unwrap();
        let direct = kernel_config_boundary(&p, &tree, 2, &omega, DEFAULT_MAX_STATES).unwrap();
        let composed = compose(&direct, &p, &tree, 1, DEFAULT_MAX_STATES).unwrap();
        assert!(composed.max_abs_deviation(&direct).unwrap() <= 1e-12);
    }

    #[test]
    fn composition_is_idempotent_at_equal_volumes() {
        let tree = CayleyTree::build(2, 2).unwrap();
        let interaction = PairInteraction::ising(1.0, 0.9).unwrap();
        let p = pair_potential(&interaction);
        let omega = uniform_boundary(&tree, 2, -1.0);
        let kernel = kernel_config_boundary(&p, &tree, 1, &omega, DEFAULT_MAX_STATES).unwrap();
        let composed = compose(&kernel, &p, &tree, 1, DEFAULT_MAX_STATES).unwrap();
        assert!(composed.max_abs_deviation(&kernel).unwrap() <= 1e-12);
    }

    #[test]
    fn specification_check_all_boundaries_small_tree() {
        // every boundary configuration on a tree with |V_m| <= 22
        let tree = CayleyTree::build(2, 3).unwrap();
        let interaction = PairInteraction::ising(1.0, 0.7).unwrap();
        let p = pair_potential(&interaction);
        let w3 = tree.sphere(3).unwrap();
        let states = StateSpace::new(&SpinSpace::ising(), &w3, DEFAULT_MAX_STATES).unwrap();
        for omega in states.iter() {
            let cert =
                check_specification(&p, &tree, 2, 1, &omega, 1e-10, DEFAULT_MAX_STATES).unwrap();
            assert!(cert.verdict, "residual {}", cert.max_residual);
        }
    }

    #[test]
    fn specification_check_potts_exhaustive_k1() {
        let tree = CayleyTree::build(1, 3).unwrap();
        let interaction = PairInteraction::potts(3, 1.0, 0.6).unwrap();
        let p = pair_potential(&interaction);
        let w3 = tree.sphere(3).unwrap();
        let states = StateSpace::new(interaction.space(), &w3, DEFAULT_MAX_STATES).unwrap();
        for omega in states.iter() {
            let cert =
                check_specification(&p, &tree, 2, 1, &omega, 1e-10, DEFAULT_MAX_STATES).unwrap();
            assert!(cert.verdict, "residual {}", cert.max_residual);
        }
    }

    #[test]
    fn zero_beta_specification_residual_is_tiny() {
        let tree = CayleyTree::build(2, 3).unwrap();
        let interaction = PairInteraction::ising(1.0, 0.0).unwrap();
        let p = pair_potential(&interaction);
        let omega = uniform_boundary(&tree, 3, 1.0);
        let cert = check_specification(&p, &tree, 2, 1, &omega, 1e-12, DEFAULT_MAX_STATES).unwrap();
        assert!(cert.max_residual <= 1e-15);
    }

    #[test]
    fn corrupted_kernel_is_rejected() {
        let tree = CayleyTree::build(2, 3).unwrap();
        let interaction = PairInteraction::ising(1.0, 0.5).unwrap();
        let p = pair_potential(&interaction);
        let omega = uniform_boundary(&tree, 3, 1.0);
        let direct = kernel_config_boundary(&p, &tree, 2, &omega, DEFAULT_MAX_STATES).unwrap();
        let corrupted = direct.with_weight_scaled(17, 1.1).unwrap();
        let composed = compose(&direct, &p, &tree, 1, DEFAULT_MAX_STATES).unwrap();
        let residual = composed.max_abs_deviation(&corrupted).unwrap();
        assert!(residual > 1e-10, "corruption went unnoticed: {residual}");
        // the corrupted table still sums to one
        assert_abs_diff_eq!(
            corrupted.probabilities().iter().sum::<f64>(),
            1.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn compatibility_holds_for_the_zero_field() {
        let tree = CayleyTree::build(2, 2).unwrap();
        for beta in [0.2, 0.7, 1.3] {
            let interaction = PairInteraction::ising(1.0, beta).unwrap();
            let cert = check_compatibility_bruteforce(
                &interaction,
                &tree,
                2,
                &BoundaryField::Homogeneous(0.0),
                1e-12,
                DEFAULT_MAX_STATES,
            )
            .unwrap();
            assert!(cert.verdict, "residual {}", cert.max_residual);
            assert!(cert.z_recursion_residual.unwrap() <= 1e-10);
            assert!(cert.normalizers.values().all(|&a| a > 0.0));
        }
    }

    #[test]
    fn compatibility_accepts_the_homogeneous_fixed_point_at_level_two() {
        // the level-2 identity probes the W_1 vertices, each with k
        // successors, so the uncorrected homogeneous fixed point passes here
        let theta: f64 = 0.8;
        let interaction = PairInteraction::ising(theta.atanh(), 1.0).unwrap();
        let tree = CayleyTree::build(2, 2).unwrap();
        let h_star = crate::boundary_law::solve_homogeneous(2, theta, 1e-13)
            .unwrap()
            .solutions[2];
        let cert = check_compatibility_bruteforce(
            &interaction,
            &tree,
            2,
            &BoundaryField::Homogeneous(h_star),
            1e-10,
            DEFAULT_MAX_STATES,
        )
        .unwrap();
        assert!(cert.verdict, "residual {}", cert.max_residual);
        assert!(cert.z_recursion_residual.unwrap() <= 1e-10);
    }

    #[test]
    fn compatibility_rejects_an_off_solution_field() {
        let theta: f64 = 0.8;
        let interaction = PairInteraction::ising(theta.atanh(), 1.0).unwrap();
        let tree = CayleyTree::build(2, 2).unwrap();
        let cert = check_compatibility_bruteforce(
            &interaction,
            &tree,
            2,
            &BoundaryField::Homogeneous(1.0),
            1e-10,
            DEFAULT_MAX_STATES,
        )
        .unwrap();
        assert!(!cert.verdict);
        assert!(cert.max_residual > 1e-3);
    }

    #[test]
    fn potts_free_field_is_consistent_and_a_biased_label_is_not() {
        let tree = CayleyTree::build(2, 2).unwrap();
        let interaction = PairInteraction::potts(3, 1.0, 0.6).unwrap();
        let free = check_compatibility_bruteforce(
            &interaction,
            &tree,
            2,
            &BoundaryField::Homogeneous(0.0),
            1e-12,
            DEFAULT_MAX_STATES,
        )
        .unwrap();
        assert!(free.verdict, "residual {}", free.max_residual);
        assert!(free.z_recursion_residual.unwrap() <= 1e-10);

        let biased = check_compatibility_bruteforce(
            &interaction,
            &tree,
            2,
            &BoundaryField::Homogeneous(1.0),
            1e-10,
            DEFAULT_MAX_STATES,
        )
        .unwrap();
        assert!(!biased.verdict);
        assert!(biased.max_residual > 1e-3);
    }

    #[test]
    fn capacity_and_precondition_errors() {
        let tree = CayleyTree::build(2, 2).unwrap();
        let interaction = PairInteraction::ising(1.0, 0.5).unwrap();
        let p = pair_potential(&interaction);
        let omega = uniform_boundary(&tree, 2, 1.0);
        assert!(matches!(
            kernel_config_boundary(&p, &tree, 1, &omega, 8),
            Err(GibbsError::Capacity { .. })
        ));
        // kernel at the full depth has no boundary sphere
        let omega2 = uniform_boundary(&tree, 2, 1.0);
        assert!(matches!(
            kernel_config_boundary(&p, &tree, 2, &omega2, DEFAULT_MAX_STATES),
            Err(GibbsError::ShallowTree(_))
        ));
        assert!(check_specification(&p, &tree, 1, 1, &omega, 1e-10, DEFAULT_MAX_STATES).is_err());
        assert!(check_compatibility_bruteforce(
            &interaction,
            &tree,
            0,
            &BoundaryField::Homogeneous(0.0),
            1e-10,
            DEFAULT_MAX_STATES
        )
        .is_err());
    }

    #[test]
    fn field_kernel_reports_missing_values() {
        let tree = CayleyTree::build(2, 1).unwrap();
        let interaction = PairInteraction::ising(1.0, 0.5).unwrap();
        let sparse = BoundaryField::per_vertex([(1, 0.3)]);
        assert!(matches!(
            kernel_field_boundary(&interaction, &tree, 1, &sparse, DEFAULT_MAX_STATES),
            Err(GibbsError::MissingFieldValue(_))
        ));
    }
}

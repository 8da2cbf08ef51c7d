//! Boundary fields, the analytic consistency condition, and the homogeneous
//! fixed-point equation `h = k * f(h, theta)`.
//!
//! For two-point spins the field-flavor kernels are consistent across levels
//! exactly when, at every vertex `x` with successors,
//!
//! ```text
//! prod_{y in S(x)} [ sum_u exp(J beta rho(1,u) + rho(u,h_y)) ]
//!                  / [ sum_u exp(J beta rho(-1,u) + rho(u,h_y)) ]
//!   = exp( rho(1,h_x) - rho(-1,h_x) )
//! ```
//!
//! For the Ising model the log of the single bracket ratio is `2 f(h_y, theta)`
//! with `theta = tanh(J beta)`, so the condition collapses to the recursion
//! `h_x = sum_{y in S(x)} f(h_y, theta)`. Translation-invariant solutions off
//! the root solve `h = k f(h, theta)`; the root, having `k + 1` successors,
//! carries `(k + 1) f(h, theta)` in an exactly consistent field.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{GibbsError, Result};
use crate::hamiltonian::PairInteraction;
use crate::numeric::log_add_exp;
use crate::specification::ConsistencyCertificate;
use crate::spins::Configuration;
use crate::topology::{CayleyTree, VertexId};

/// A real-valued field over tree vertices: one number everywhere, or an
/// explicit per-vertex table.
#[derive(Debug, Clone, PartialEq)]
pub enum BoundaryField {
    Homogeneous(f64),
    PerVertex(BTreeMap<VertexId, f64>),
}

impl BoundaryField {
    pub fn per_vertex(pairs: impl IntoIterator<Item = (VertexId, f64)>) -> Self {
        BoundaryField::PerVertex(pairs.into_iter().collect())
    }

    pub fn value_at(&self, vertex: VertexId) -> Result<f64> {
        let value = match self {
            BoundaryField::Homogeneous(h) => *h,
            BoundaryField::PerVertex(map) => *map
                .get(&vertex)
                .ok_or(GibbsError::MissingFieldValue(vertex))?,
        };
        if !value.is_finite() {
            return Err(GibbsError::InvalidParameter(format!(
                "field value at vertex {vertex} is not finite"
            )));
        }
        Ok(value)
    }

    pub fn negated(&self) -> BoundaryField {
        match self {
            BoundaryField::Homogeneous(h) => BoundaryField::Homogeneous(-h),
            BoundaryField::PerVertex(map) => {
                BoundaryField::PerVertex(map.iter().map(|(&v, &h)| (v, -h)).collect())
            }
        }
    }

    /// Parse the per-vertex JSON shape `{"vertex_index": value, ...}`.
    pub fn from_json_str(json: &str) -> Result<Self> {
        let map = serde_json::from_str::<BTreeMap<String, f64>>(json)?;
        let mut pairs = BTreeMap::new();
        for (key, value) in map {
            let vertex: VertexId = key.parse().map_err(|_| {
                GibbsError::InvalidParameter(format!("invalid vertex index {key:?} in field file"))
            })?;
            pairs.insert(vertex, value);
        }
        Ok(BoundaryField::PerVertex(pairs))
    }
}

/// Ising coupling constants with the machine-validated `theta = tanh(J beta)`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct IsingParameters {
    j: f64,
    beta: f64,
    theta: f64,
}

impl IsingParameters {
    /// Validates numerically that the single-factor log-ratio of the
    /// consistency condition equals `2 f(h, tanh(J beta))` on a grid of
    /// `(J, beta, h)` before trusting the identity; fails loudly if not.
    pub fn new(j: f64, beta: f64) -> Result<Self> {
        if !j.is_finite() {
            return Err(GibbsError::InvalidParameter("J must be finite".into()));
        }
        if !(beta.is_finite() && beta > 0.0) {
            return Err(GibbsError::InvalidParameter(
                "beta must be a positive real".into(),
            ));
        }
        validate_theta_identity(j, beta)?;
        Ok(IsingParameters {
            j,
            beta,
            theta: (j * beta).tanh(),
        })
    }

    /// Theta-first construction: `J = atanh(theta)`, `beta = 1`.
    pub fn from_theta(theta: f64) -> Result<Self> {
        check_theta(theta)?;
        if theta == 0.0 {
            // atanh(0) = 0 would make J*beta trivially zero; keep beta positive
            return IsingParameters::new(0.0, 1.0);
        }
        IsingParameters::new(theta.atanh(), 1.0)
    }

    pub fn j(&self) -> f64 {
        self.j
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// The matching interaction: product rho on `{-1, +1}`.
    pub fn interaction(&self) -> PairInteraction {
        PairInteraction::ising(self.j, self.beta).expect("validated parameters")
    }
}

fn check_theta(theta: f64) -> Result<()> {
    if !(theta.is_finite() && theta.abs() < 1.0) {
        return Err(GibbsError::InvalidParameter(format!(
            "theta must lie in (-1, 1), got {theta}"
        )));
    }
    Ok(())
}

/// `log( sum_u exp(c u + h u) / sum_u exp(-c u + h u) )` over `u = +/-1`.
fn pm_log_ratio(c: f64, h: f64) -> f64 {
    log_add_exp(c + h, -(c + h)) - log_add_exp(h - c, -(h - c))
}

fn validate_theta_identity(j: f64, beta: f64) -> Result<()> {
    let mut couplings = vec![0.25, 0.9, 2.0, -1.3];
    couplings.push(j * beta);
    for &c in &couplings {
        let theta = c.tanh();
        for &h in &[-3.0, -0.7, 0.0, 0.4, 2.5] {
            let lhs = pm_log_ratio(c, h);
            let rhs = 2.0 * f_signed(h, theta);
            if (lhs - rhs).abs() > 1e-12 {
                return Err(GibbsError::InvalidParameter(format!(
                    "theta = tanh(J beta) identity failed at coupling {c}, field {h}: \
                     log-ratio {lhs} vs 2 f = {rhs}"
                )));
            }
        }
    }
    Ok(())
}

/// The boundary-law transfer function
/// `f(h, theta) = (1/2) ln( ((1+theta) e^{2h} + (1-theta)) / ((1-theta) e^{2h} + (1+theta)) )`,
/// computed in an overflow-free form; for large `|h|` it saturates at
/// `+/- atanh(theta)`.
pub fn ising_f(h: f64, theta: f64) -> Result<f64> {
    check_theta(theta)?;
    if !h.is_finite() {
        return Err(GibbsError::InvalidParameter(
            "field argument must be finite".into(),
        ));
    }
    Ok(f_signed(h, theta))
}

/// Odd-by-construction evaluation: compute at `|h|` and copy the sign, so
/// `f(-h) == -f(h)` holds exactly.
fn f_signed(h: f64, theta: f64) -> f64 {
    let magnitude = f_nonneg(h.abs(), theta);
    if h < 0.0 {
        -magnitude
    } else {
        magnitude
    }
}

fn f_nonneg(h: f64, theta: f64) -> f64 {
    // divide through by e^{2h}: safe for any h >= 0
    let e = (-2.0 * h).exp();
    0.5 * (((1.0 + theta) + (1.0 - theta) * e) / ((1.0 - theta) + (1.0 + theta) * e)).ln()
}

/// `|log LHS - log RHS|` of the consistency condition at one vertex, in the
/// log domain. Requires `Phi = {-1, +1}` and a field value at `x` and each
/// successor.
pub fn functional_equation_residual(
    interaction: &PairInteraction,
    tree: &CayleyTree,
    field: &BoundaryField,
    x: VertexId,
) -> Result<f64> {
    let space = interaction.space();
    if !space.is_binary_pm_one() {
        return Err(GibbsError::NonBinarySpinSpace(space.len()));
    }
    let successors = tree.successors(x)?;
    if successors.is_empty() {
        return Err(GibbsError::LeafVertex { vertex: x });
    }
    let coupling = interaction.j() * interaction.beta();
    let (minus, plus) = (0usize, 1usize);

    let mut log_lhs = 0.0;
    for &y in successors {
        let h_y = field.value_at(y)?;
        let mut top = f64::NEG_INFINITY;
        let mut bottom = f64::NEG_INFINITY;
        for u in 0..space.len() {
            let field_term = interaction.rho_field(u, h_y)?;
            top = log_add_exp(top, coupling * interaction.rho(plus, u) + field_term);
            bottom = log_add_exp(bottom, coupling * interaction.rho(minus, u) + field_term);
        }
        log_lhs += top - bottom;
    }
    let h_x = field.value_at(x)?;
    let log_rhs = interaction.rho_field(plus, h_x)? - interaction.rho_field(minus, h_x)?;
    Ok((log_lhs - log_rhs).abs())
}

/// Evaluate the consistency condition at every non-leaf vertex of the
/// truncation. Leaves have no successors and are recorded as excluded rather
/// than treated as vacuous products.
pub fn check_functional_equation(
    interaction: &PairInteraction,
    tree: &CayleyTree,
    field: &BoundaryField,
    tol: f64,
) -> Result<ConsistencyCertificate> {
    let space = interaction.space();
    if !space.is_binary_pm_one() {
        return Err(GibbsError::NonBinarySpinSpace(space.len()));
    }
    let coupling = interaction.j() * interaction.beta();
    let plus = 1usize;

    let mut residuals = Vec::new();
    let mut excluded = Vec::new();
    let mut normalizers = BTreeMap::new();
    let mut checked_any = false;
    for x in 0..tree.vertex_count() {
        if tree.successors(x)?.is_empty() {
            excluded.push(x);
            continue;
        }
        checked_any = true;
        residuals.push(functional_equation_residual(interaction, tree, field, x)?);
        // per-vertex normalizer of the product representation, at t = +1
        let mut log_a = -interaction.rho_field(plus, field.value_at(x)?)?;
        for &y in tree.successors(x)? {
            let h_y = field.value_at(y)?;
            let mut bracket = f64::NEG_INFINITY;
            for u in 0..space.len() {
                bracket = log_add_exp(
                    bracket,
                    coupling * interaction.rho(plus, u) + interaction.rho_field(u, h_y)?,
                );
            }
            log_a += bracket;
        }
        normalizers.insert(x, log_a.exp());
    }
    if !checked_any {
        return Err(GibbsError::ShallowTree(
            "no non-leaf vertices to check; increase the depth".into(),
        ));
    }
    let mut cert = ConsistencyCertificate::from_residuals(residuals, tol);
    cert.normalizers = normalizers;
    cert.excluded = excluded;
    Ok(cert)
}

/// Stability class of a fixed point under `h -> k f(h, theta)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Stability {
    Stable,
    Unstable,
    Marginal,
}

/// Solution set of the homogeneous fixed-point equation `h = k f(h, theta)`.
#[derive(Debug, Clone, Serialize)]
pub struct FixedPointReport {
    pub k: usize,
    pub theta: f64,
    /// Roots in ascending order, deduplicated within `1e-9`.
    pub solutions: Vec<f64>,
    /// Stability flag per solution, from `|k f'(h)| < 1` by central difference.
    pub stability: Vec<Stability>,
    pub tol: f64,
    /// Set when two roots landed closer than ten grid cells; near the
    /// bifurcation the root pair separates like sqrt(theta - theta_c).
    pub close_roots_warning: bool,
}

const GRID_CELLS: usize = 10_000;
const DEDUPE_RADIUS: f64 = 1e-9;
const DERIVATIVE_STEP: f64 = 1e-6;
const MARGINAL_BAND: f64 = 1e-8;

/// Find every real root of `g(h) = h - k f(h, theta)` in
/// `[-B, B]`, `B = k |atanh(theta)| + 1`, by sign-change bracketing on a
/// 10^4-cell grid refined by bisection to `tol`.
pub fn solve_homogeneous(k: usize, theta: f64, tol: f64) -> Result<FixedPointReport> {
    if k == 0 {
        return Err(GibbsError::InvalidParameter(
            "tree order k must be at least 1".into(),
        ));
    }
    check_theta(theta)?;
    if !(tol.is_finite() && tol > 0.0) {
        return Err(GibbsError::InvalidParameter("tol must be positive".into()));
    }

    let g = |h: f64| h - k as f64 * f_signed(h, theta);
    let bound = k as f64 * theta.atanh().abs() + 1.0;
    let mid = (GRID_CELLS / 2) as f64;
    let step = bound / mid;
    // grid centered so that h = 0 is an exact grid point (g(0) == 0 exactly)
    let grid_point = |i: usize| (i as f64 - mid) * step;

    let mut roots: Vec<f64> = Vec::new();
    let mut previous = g(grid_point(0));
    if previous == 0.0 {
        roots.push(grid_point(0));
    }
    for i in 1..=GRID_CELLS {
        let current = g(grid_point(i));
        if current == 0.0 {
            roots.push(grid_point(i));
        } else if previous != 0.0 && previous.signum() != current.signum() {
            roots.push(bisect(&g, grid_point(i - 1), grid_point(i), tol));
        }
        previous = current;
    }

    roots.sort_by(|a, b| a.partial_cmp(b).expect("finite roots"));
    let mut solutions: Vec<f64> = Vec::new();
    for root in roots {
        let snapped = if root.abs() <= DEDUPE_RADIUS {
            0.0
        } else {
            root
        };
        match solutions.last() {
            Some(&last) if (snapped - last).abs() <= DEDUPE_RADIUS => {}
            _ => solutions.push(snapped),
        }
    }

    let stability = solutions
        .iter()
        .map(|&h| {
            let slope = k as f64
                * (f_signed(h + DERIVATIVE_STEP, theta) - f_signed(h - DERIVATIVE_STEP, theta))
                / (2.0 * DERIVATIVE_STEP);
            if (slope.abs() - 1.0).abs() <= MARGINAL_BAND {
                Stability::Marginal
            } else if slope.abs() < 1.0 {
                Stability::Stable
            } else {
                Stability::Unstable
            }
        })
        .collect();

    let close_roots_warning = solutions
        .windows(2)
        .any(|w| (w[1] - w[0]).abs() < 10.0 * step);

    Ok(FixedPointReport {
        k,
        theta,
        solutions,
        stability,
        tol,
        close_roots_warning,
    })
}

fn bisect(g: &dyn Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let mut g_lo = g(lo);
    for _ in 0..200 {
        if hi - lo <= tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let g_mid = g(mid);
        if g_mid == 0.0 {
            return mid;
        }
        if g_mid.signum() == g_lo.signum() {
            lo = mid;
            g_lo = g_mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Theta at which the homogeneous solution count jumps from 1 to 3:
/// linearizing the recursion at `h = 0` gives slope `k theta`, so the
/// threshold is `1 / k`.
pub fn critical_theta(k: usize) -> Result<f64> {
    if k == 0 {
        return Err(GibbsError::InvalidParameter(
            "tree order k must be at least 1".into(),
        ));
    }
    Ok(1.0 / k as f64)
}

/// The Ising bridge between kernel flavors: `h_x = J sum_{y in S(x)} omega(y)`
/// on the sphere inside the boundary configuration's sphere.
pub fn ising_field_from_boundary(
    interaction: &PairInteraction,
    tree: &CayleyTree,
    omega: &Configuration,
) -> Result<BoundaryField> {
    if !interaction.is_ising() {
        return Err(GibbsError::NotIsing);
    }
    if omega.is_empty() {
        return Err(GibbsError::SupportMismatch(
            "boundary configuration is empty".into(),
        ));
    }
    let generation = tree.generation(omega.support()[0])?;
    if generation == 0 {
        return Err(GibbsError::SupportMismatch(
            "boundary configuration must live on a sphere W_{n+1} with n >= 0".into(),
        ));
    }
    let sphere = tree.sphere(generation)?;
    if omega.support() != sphere.as_slice() {
        return Err(GibbsError::SupportMismatch(format!(
            "boundary configuration must be total on the sphere W_{generation}"
        )));
    }
    let mut pairs = BTreeMap::new();
    for x in tree.sphere_range(generation - 1)? {
        let mut sum = 0.0;
        for &y in tree.successors(x)? {
            sum += omega.value_at(y).expect("total on the sphere");
        }
        pairs.insert(x, interaction.j() * sum);
    }
    Ok(BoundaryField::PerVertex(pairs))
}

/// Extend a homogeneous fixed point `h*` of `h = k f(h, theta)` to the
/// exactly consistent field on the rooted truncation: `h*` off the root and
/// `(k + 1) f(h*, theta)` at the root, which has `k + 1` successors.
pub fn splitting_field(tree: &CayleyTree, h_star: f64, theta: f64) -> Result<BoundaryField> {
    check_theta(theta)?;
    let root_value = (tree.k() as f64 + 1.0) * ising_f(h_star, theta)?;
    let mut pairs = BTreeMap::new();
    pairs.insert(0, root_value);
    for v in 1..tree.vertex_count() {
        pairs.insert(v, h_star);
    }
    Ok(BoundaryField::PerVertex(pairs))
}

//! Entropic correlation functionals built on weak and projective local measurements.
//!
//! All quantities are in bits. A bipartite state has subsystem dimensions
//! `[d_A, d_B]`; the measured side must be a qubit while the other side may
//! be larger (the `A:BC` cut of a three-qubit state is `[2, 4]`).

use serde::Serialize;

use crate::error::{Error, Result};
use crate::measurement::{apply_operators, projectors, weak_pair, Branch, MeasurementDirection, Side, Strength};
use crate::optimizer::{minimize, OptimizerOptions};
use crate::qstate::{partial_trace, von_neumann_entropy, DensityMatrix};

/// Discord values in `[-CLAMP_TOL, 0)` are reported as 0.
pub const CLAMP_TOL: f64 = 1e-9;

/// Optimal value of a measurement-dependent correlation and how it was found.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CorrelationResult {
    pub value: f64,
    pub optimal_direction: MeasurementDirection,
    pub strength: Strength,
    pub measured_side: Side,
    pub evaluations: usize,
    pub converged: bool,
}

fn require_bipartite(rho: &DensityMatrix) -> Result<()> {
    if rho.num_subsystems() != 2 {
        return Err(Error::InvalidArgument(format!(
            "expected a bipartite state, got subsystem dimensions {:?}",
            rho.dims()
        )));
    }
    Ok(())
}

fn marginal(rho: &DensityMatrix, side: Side) -> Result<DensityMatrix> {
    partial_trace(rho, &[if side == Side::A { 0 } else { 1 }])
}

/// `S(A|B) = S(ρ_AB) − S(ρ_B)`.
pub fn conditional_entropy(rho: &DensityMatrix) -> Result<f64> {
    conditional_entropy_given(rho, Side::B)
}

/// Entropy of the unmeasured side conditioned on `given`: `S(ρ) − S(ρ_given)`.
pub fn conditional_entropy_given(rho: &DensityMatrix, given: Side) -> Result<f64> {
    require_bipartite(rho)?;
    Ok(von_neumann_entropy(rho) - von_neumann_entropy(&marginal(rho, given)?))
}

/// `I = S(ρ_A) + S(ρ_B) − S(ρ_AB)`.
pub fn mutual_information(rho: &DensityMatrix) -> Result<f64> {
    require_bipartite(rho)?;
    Ok(von_neumann_entropy(&marginal(rho, Side::A)?) + von_neumann_entropy(&marginal(rho, Side::B)?)
        - von_neumann_entropy(rho))
}

fn measure(
    rho: &DensityMatrix,
    side: Side,
    direction: &MeasurementDirection,
    strength: Strength,
) -> Result<[Branch; 2]> {
    match strength {
        Strength::Projective => {
            let (pi0, pi1) = projectors(direction);
            apply_operators(rho, side, [&pi0, &pi1])
        }
        Strength::Weak(x) => {
            let pair = weak_pair(*direction, x)?;
            apply_operators(rho, side, [&pair.plus, &pair.minus])
        }
    }
}

/// `p₊ S(ρ_{A|P₊}) + p₋ S(ρ_{A|P₋})` for a measurement on B.
pub fn avg_post_entropy(
    rho: &DensityMatrix,
    direction: &MeasurementDirection,
    strength: Strength,
) -> Result<f64> {
    avg_post_entropy_on(rho, Side::B, direction, strength)
}

/// Averaged entropy of the unmeasured side after measuring `side`; zero-probability branches are skipped.
pub fn avg_post_entropy_on(
    rho: &DensityMatrix,
    side: Side,
    direction: &MeasurementDirection,
    strength: Strength,
) -> Result<f64> {
    let branches = measure(rho, side, direction, strength)?;
    Ok(branches
        .iter()
        .filter(|b| b.probability > 0.0)
        .map(|b| b.probability * von_neumann_entropy(&b.state))
        .sum())
}

/// Super discord with the measurement on `measured_side`; `Strength::Projective`
/// gives the normal discord through exact projectors.
pub fn super_discord(
    rho: &DensityMatrix,
    measured_side: Side,
    strength: Strength,
    opts: &OptimizerOptions,
) -> Result<CorrelationResult> {
    require_bipartite(rho)?;
    // Surfaces dimension and strength errors before the optimizer runs.
    measure(rho, measured_side, &MeasurementDirection::canonical(), strength)?;
    let cond = conditional_entropy_given(rho, measured_side)?;

    let min = minimize(
        |theta, phi| {
            let dir = MeasurementDirection { theta, phi };
            avg_post_entropy_on(rho, measured_side, &dir, strength)
        },
        opts,
    )?;
    let value = clamp_discord(min.value - cond)?;
    Ok(CorrelationResult {
        value,
        optimal_direction: min.direction,
        strength,
        measured_side,
        evaluations: min.evaluations,
        converged: min.converged,
    })
}

/// Projective-limit discord with the measurement on `measured_side`.
pub fn normal_discord(
    rho: &DensityMatrix,
    measured_side: Side,
    opts: &OptimizerOptions,
) -> Result<CorrelationResult> {
    super_discord(rho, measured_side, Strength::Projective, opts)
}

/// `C_w = I − D_w` with the measurement on B.
pub fn super_classical_correlation(
    rho: &DensityMatrix,
    strength: Strength,
    opts: &OptimizerOptions,
) -> Result<CorrelationResult> {
    let discord = super_discord(rho, Side::B, strength, opts)?;
    Ok(classical_from_discord(rho, &discord)?)
}

/// Classical counterpart of an already computed discord result.
pub fn classical_from_discord(rho: &DensityMatrix, discord: &CorrelationResult) -> Result<CorrelationResult> {
    let info = mutual_information(rho)?;
    Ok(CorrelationResult {
        value: info - discord.value,
        ..*discord
    })
}

pub(crate) fn clamp_discord(value: f64) -> Result<f64> {
    if value >= 0.0 {
        Ok(value)
    } else if value >= -CLAMP_TOL {
        Ok(0.0)
    } else {
        Err(Error::Consistency(format!("discord evaluated to {value:e} < 0")))
    }
}

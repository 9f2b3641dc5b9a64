//! Discord monogamy scores for three-qubit pure states.
//!
//! Two arrows are supported. `To` ("→") measures qubit A in every term.
//! `From` ("←") measures B in `ρ_AB`, C in `ρ_AC` and the pair BC in
//! `ρ_{A:BC}`. A two-outcome measurement on the four-dimensional BC side is
//! defined on the (at most two-dimensional) support of `ρ_BC`: for a globally
//! pure state that support is mapped isometrically onto an effective qubit,
//! and the orthogonal complement carries no weight, so it does not matter
//! which projector it is assigned to.

use std::fmt;

use serde::Serialize;

use crate::discord::{super_discord, CorrelationResult};
use crate::error::{Error, Result};
use crate::measurement::{MeasurementDirection, Side, Strength};
use crate::optimizer::OptimizerOptions;
use crate::qstate::{eigh_hermitian, partial_trace, ComplexMatrix, DensityMatrix, C64};

/// Purity slack for the three-qubit input, `Tr ρ² ≥ 1 − PURITY_TOL`.
pub const PURITY_TOL: f64 = 1e-10;
/// Second Schmidt weight below which the `A:BC` cut is treated as a product.
pub const SCHMIDT_RANK_TOL: f64 = 1e-12;

/// Which subsystems carry the measurement.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Arrow {
    /// "←": measure B, C and BC.
    From,
    /// "→": measure A.
    To,
}

impl fmt::Display for Arrow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Arrow::From => "from",
            Arrow::To => "to",
        })
    }
}

impl std::str::FromStr for Arrow {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "from" | "<-" | "←" => Ok(Arrow::From),
            "to" | "->" | "→" => Ok(Arrow::To),
            other => Err(Error::Config(format!("unknown direction {other:?}; use 'to' or 'from'"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MonogamyReport {
    pub arrow: Arrow,
    pub strength: Strength,
    pub d_bipartition: f64,
    pub d_ab: f64,
    pub d_ac: f64,
    /// `d_bipartition − d_ab − d_ac`; positive means monogamous.
    pub score: f64,
    pub converged: bool,
}

fn require_three_qubits(rho3: &DensityMatrix) -> Result<()> {
    if rho3.dims() != [2, 2, 2] {
        return Err(Error::InvalidArgument(format!(
            "expected a three-qubit state, got subsystem dimensions {:?}",
            rho3.dims()
        )));
    }
    Ok(())
}

/// Discords of `ρ_AB` and `ρ_AC` with the measurement placed according to `arrow`.
pub fn pairwise_discords(
    rho3: &DensityMatrix,
    arrow: Arrow,
    strength: Strength,
    opts: &OptimizerOptions,
) -> Result<(CorrelationResult, CorrelationResult)> {
    require_three_qubits(rho3)?;
    let side = match arrow {
        Arrow::To => Side::A,
        Arrow::From => Side::B,
    };
    let ab = partial_trace(rho3, &[0, 1])?;
    let ac = partial_trace(rho3, &[0, 2])?;
    let (d_ab, d_ac) = rayon::join(
        || super_discord(&ab, side, strength, opts),
        || super_discord(&ac, side, strength, opts),
    );
    Ok((d_ab?, d_ac?))
}

/// Maps the `A:BC` cut of a pure three-qubit state onto two qubits by
/// restricting BC to the support of `ρ_BC`. `None` when that support is one-dimensional.
pub fn schmidt_reduce(rho3: &DensityMatrix) -> Result<Option<DensityMatrix>> {
    require_three_qubits(rho3)?;
    let bc = partial_trace(rho3, &[1, 2])?;
    let (weights, vectors) = eigh_hermitian(bc.matrix())?;
    if weights[1] < SCHMIDT_RANK_TOL {
        return Ok(None);
    }
    let basis = [&vectors[0], &vectors[1]];
    let m = rho3.matrix();
    let mut eff = ComplexMatrix::zeros(4);
    for a in 0..2 {
        for k in 0..2 {
            for b in 0..2 {
                for l in 0..2 {
                    let mut acc = C64::new(0.0, 0.0);
                    for u in 0..4 {
                        let left = basis[k][u].conj();
                        if left == C64::new(0.0, 0.0) {
                            continue;
                        }
                        for v in 0..4 {
                            acc += left * m[(a * 4 + u, b * 4 + v)] * basis[l][v];
                        }
                    }
                    eff[(a * 2 + k, b * 2 + l)] = acc;
                }
            }
        }
    }
    let eff = eff.hermitian_part();
    let tr = eff.trace().re;
    Ok(Some(DensityMatrix::from_trusted(eff.scale_real(1.0 / tr), vec![2, 2])))
}

fn product_cut(strength: Strength, side: Side) -> CorrelationResult {
    CorrelationResult {
        value: 0.0,
        optimal_direction: MeasurementDirection::canonical(),
        strength,
        measured_side: side,
        evaluations: 0,
        converged: true,
    }
}

/// Discord across the `A:BC` cut of a pure three-qubit state.
pub fn bipartition_discord(
    rho3: &DensityMatrix,
    arrow: Arrow,
    strength: Strength,
    opts: &OptimizerOptions,
) -> Result<CorrelationResult> {
    require_three_qubits(rho3)?;
    let purity = rho3.purity();
    if purity < 1.0 - PURITY_TOL {
        return Err(Error::Precondition(format!(
            "bipartition discord needs a pure three-qubit state, Tr ρ² = {purity}"
        )));
    }
    let reduced = schmidt_reduce(rho3)?;
    match arrow {
        Arrow::To => match reduced {
            None => Ok(product_cut(strength, Side::A)),
            Some(_) => super_discord(&rho3.with_dims(vec![2, 4])?, Side::A, strength, opts),
        },
        Arrow::From => match reduced {
            None => Ok(product_cut(strength, Side::B)),
            Some(eff) => super_discord(&eff, Side::B, strength, opts),
        },
    }
}

/// `ΔD = D(ρ_{A:BC}) − D(ρ_AB) − D(ρ_AC)`.
pub fn monogamy_score(
    rho3: &DensityMatrix,
    arrow: Arrow,
    strength: Strength,
    opts: &OptimizerOptions,
) -> Result<MonogamyReport> {
    let (whole, pairs) = rayon::join(
        || bipartition_discord(rho3, arrow, strength, opts),
        || pairwise_discords(rho3, arrow, strength, opts),
    );
    let whole = whole?;
    let (ab, ac) = pairs?;
    Ok(MonogamyReport {
        arrow,
        strength,
        d_bipartition: whole.value,
        d_ab: ab.value,
        d_ac: ac.value,
        score: whole.value - ab.value - ac.value,
        converged: whole.converged && ab.converged && ac.converged,
    })
}

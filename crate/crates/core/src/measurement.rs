//! Projective qubit measurements and the two-outcome weak measurement built from them.

use std::f64::consts::PI;
use std::fmt;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::qstate::{ComplexMatrix, DensityMatrix, C64};

/// Strengths at or above this use `tanh x = 1` exactly.
pub const TANH_SATURATION: f64 = 20.0;
/// Branches less likely than this are reported with probability zero.
pub const ZERO_BRANCH_PROB: f64 = 1e-14;

/// Measurement axis on the Bloch sphere: `|n> = cos(θ/2)|0> + e^{iφ} sin(θ/2)|1>`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MeasurementDirection {
    pub theta: f64,
    pub phi: f64,
}

impl MeasurementDirection {
    pub fn new(theta: f64, phi: f64) -> Result<Self> {
        if !(0.0..=PI).contains(&theta) {
            return Err(Error::InvalidArgument(format!("theta_m = {theta} outside [0, π]")));
        }
        if !(0.0..2.0 * PI).contains(&phi) {
            return Err(Error::InvalidArgument(format!("phi_m = {phi} outside [0, 2π)")));
        }
        Ok(MeasurementDirection { theta, phi })
    }

    /// Direction from arbitrary angles: θ clamped into `[0, π]`, φ wrapped into `[0, 2π)`.
    pub fn normalized(theta: f64, phi: f64) -> Self {
        let theta = theta.clamp(0.0, PI);
        let mut phi = phi.rem_euclid(2.0 * PI);
        if phi >= 2.0 * PI {
            phi = 0.0;
        }
        MeasurementDirection { theta, phi }
    }

    /// The `σ_z` axis, used as the canonical argmin for degenerate objectives.
    pub fn canonical() -> Self {
        MeasurementDirection { theta: 0.0, phi: 0.0 }
    }

    /// The opposite axis, which swaps `Π₀` and `Π₁`.
    pub fn antipode(&self) -> Self {
        Self::normalized(PI - self.theta, self.phi + PI)
    }

    pub fn bloch_vector(&self) -> [f64; 3] {
        let (st, ct) = self.theta.sin_cos();
        let (sp, cp) = self.phi.sin_cos();
        [st * cp, st * sp, ct]
    }

    fn ket(&self) -> [C64; 2] {
        let (s, c) = (self.theta / 2.0).sin_cos();
        [C64::new(c, 0.0), C64::from_polar(s, self.phi)]
    }
}

/// Projector pair `(Π₀, Π₁)` with `Π₀ = |n><n|` and `Π₁ = I - Π₀`.
pub fn projectors(direction: &MeasurementDirection) -> (ComplexMatrix, ComplexMatrix) {
    let pi0 = ComplexMatrix::outer(&direction.ket());
    let pi1 = &ComplexMatrix::identity(2) - &pi0;
    (pi0, pi1)
}

/// Measurement strength: finite `x ≥ 0` or the exact projective limit.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Strength {
    Weak(f64),
    Projective,
}

impl Strength {
    pub fn weak(x: f64) -> Result<Self> {
        check_strength(x)?;
        Ok(Strength::Weak(x))
    }

    /// `tanh x`, saturated to exactly 1 for `x ≥ 20` and for the projective limit.
    pub fn tanh(&self) -> f64 {
        match *self {
            Strength::Weak(x) if x < TANH_SATURATION => x.tanh(),
            _ => 1.0,
        }
    }

    pub fn is_projective(&self) -> bool {
        matches!(self, Strength::Projective)
    }
}

impl fmt::Display for Strength {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Strength::Weak(x) => write!(f, "{x}"),
            Strength::Projective => f.write_str("inf"),
        }
    }
}

impl std::str::FromStr for Strength {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("inf") || s.eq_ignore_ascii_case("infinity") {
            return Ok(Strength::Projective);
        }
        let x: f64 = s
            .parse()
            .map_err(|_| Error::Config(format!("cannot parse strength {s:?}")))?;
        Strength::weak(x).map_err(|e| Error::Config(e.to_string()))
    }
}

impl Serialize for Strength {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Strength::Weak(x) => serializer.serialize_f64(*x),
            Strength::Projective => serializer.serialize_str("inf"),
        }
    }
}

fn check_strength(x: f64) -> Result<()> {
    if !x.is_finite() || x < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "measurement strength must be finite and non-negative, got {x}"
        )));
    }
    Ok(())
}

/// Weak measurement operators `P₊(x)`, `P₋(x)` along one direction.
#[derive(Clone, Debug)]
pub struct WeakPair {
    pub x: f64,
    pub direction: MeasurementDirection,
    pub plus: ComplexMatrix,
    pub minus: ComplexMatrix,
}

pub fn weak_pair(direction: MeasurementDirection, x: f64) -> Result<WeakPair> {
    check_strength(x)?;
    let t = Strength::Weak(x).tanh();
    let small = ((1.0 - t) / 2.0).sqrt();
    let large = ((1.0 + t) / 2.0).sqrt();
    let (pi0, pi1) = projectors(&direction);
    let plus = &pi0.scale_real(small) + &pi1.scale_real(large);
    let minus = &pi0.scale_real(large) + &pi1.scale_real(small);
    Ok(WeakPair {
        x,
        direction,
        plus,
        minus,
    })
}

/// Which half of a bipartite state a local operation acts on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Side {
    A,
    B,
}

impl Side {
    pub fn other(self) -> Side {
        match self {
            Side::A => Side::B,
            Side::B => Side::A,
        }
    }

    fn index(self) -> usize {
        match self {
            Side::A => 0,
            Side::B => 1,
        }
    }
}

/// One outcome of a local measurement: its probability and the normalized
/// state of the unmeasured side. Zero-probability branches carry a
/// maximally mixed placeholder and must be skipped.
#[derive(Clone, Debug)]
pub struct Branch {
    pub probability: f64,
    pub state: DensityMatrix,
}

/// Applies the Hermitian operators `ops` on the qubit `side` of a bipartite
/// state and returns the conditional states of the other side.
///
/// `Tr_m[(I⊗K) ρ (I⊗K)] = Tr_m[ρ (I⊗K²)]` for Hermitian `K`, so only the
/// effects `K²` enter.
pub fn apply_operators(
    rho: &DensityMatrix,
    side: Side,
    ops: [&ComplexMatrix; 2],
) -> Result<[Branch; 2]> {
    let dims = rho.dims();
    if dims.len() != 2 {
        return Err(Error::InvalidArgument(format!(
            "expected a bipartite state, got subsystem dimensions {dims:?}"
        )));
    }
    if dims[side.index()] != 2 {
        return Err(Error::InvalidArgument(format!(
            "measured subsystem must be a qubit, got dimension {}",
            dims[side.index()]
        )));
    }
    for op in ops {
        if op.dim() != 2 {
            return Err(Error::InvalidArgument("measurement operators must be 2x2".into()));
        }
    }
    let other_dim = dims[side.other().index()];
    let m = rho.matrix();
    let index = |u: usize, k: usize| match side {
        Side::B => u * 2 + k,
        Side::A => k * other_dim + u,
    };

    let branch = |op: &ComplexMatrix| -> Branch {
        let effect = op * op;
        let mut out = ComplexMatrix::zeros(other_dim);
        for i in 0..other_dim {
            for j in 0..other_dim {
                let mut acc = C64::new(0.0, 0.0);
                for k in 0..2 {
                    for l in 0..2 {
                        acc += m[(index(i, k), index(j, l))] * effect[(l, k)];
                    }
                }
                out[(i, j)] = acc;
            }
        }
        let p = out.trace().re;
        if p < ZERO_BRANCH_PROB {
            Branch {
                probability: 0.0,
                state: DensityMatrix::maximally_mixed(vec![other_dim]),
            }
        } else {
            Branch {
                probability: p,
                state: DensityMatrix::from_trusted(out.scale_real(1.0 / p), vec![other_dim]),
            }
        }
    };
    Ok([branch(ops[0]), branch(ops[1])])
}

/// Weak measurement on B; branches are `(p±, ρ_{A|P±})` in `[+, -]` order.
pub fn apply_on_b(rho: &DensityMatrix, pair: &WeakPair) -> Result<[Branch; 2]> {
    apply_operators(rho, Side::B, [&pair.plus, &pair.minus])
}

/// Weak measurement on A; branches are `(p±, ρ_{B|P±})` in `[+, -]` order.
pub fn apply_on_a(rho: &DensityMatrix, pair: &WeakPair) -> Result<[Branch; 2]> {
    apply_operators(rho, Side::A, [&pair.plus, &pair.minus])
}

/// Projective measurement `{Π₀, Π₁}` on the given side.
pub fn apply_projective(
    rho: &DensityMatrix,
    side: Side,
    direction: &MeasurementDirection,
) -> Result<[Branch; 2]> {
    let (pi0, pi1) = projectors(direction);
    apply_operators(rho, side, [&pi0, &pi1])
}

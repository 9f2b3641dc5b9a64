//! State families: Bell-diagonal states with their closed-form correlations,
//! phase damping of Bell-diagonal parameters, and the tripartite pure families.

use std::f64::consts::FRAC_PI_2;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::measurement::Strength;
use crate::qstate::{tensor, ComplexMatrix, DensityMatrix, C64};

/// Slack allowed on each tetrahedron inequality.
pub const TETRAHEDRON_TOL: f64 = 1e-12;
/// Slack allowed on angle and probability ranges of the tripartite families.
const RANGE_TOL: f64 = 1e-12;

/// Correlation-tensor diagonal `(c₁, c₂, c₃)` of a Bell-diagonal state.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BellDiagonalParams {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
}

impl BellDiagonalParams {
    pub fn new(c1: f64, c2: f64, c3: f64) -> Result<Self> {
        let p = BellDiagonalParams { c1, c2, c3 };
        p.check()?;
        Ok(p)
    }

    fn check(&self) -> Result<()> {
        for (name, c) in [("c1", self.c1), ("c2", self.c2), ("c3", self.c3)] {
            if !c.is_finite() || c.abs() > 1.0 + TETRAHEDRON_TOL {
                return Err(Error::Domain(format!("{name} = {c} outside [-1, 1]")));
            }
        }
        let labels = ["1 - c1 - c2 - c3", "1 - c1 + c2 + c3", "1 + c1 - c2 + c3", "1 + c1 + c2 - c3"];
        for (label, v) in labels.iter().zip(self.vertex_weights()) {
            if v < -TETRAHEDRON_TOL {
                return Err(Error::Domain(format!(
                    "{label} = {v} < 0 for (c1, c2, c3) = ({}, {}, {})",
                    self.c1, self.c2, self.c3
                )));
            }
        }
        Ok(())
    }

    /// The four tetrahedron expressions; each is 4× an eigenvalue of the state.
    pub fn vertex_weights(&self) -> [f64; 4] {
        let BellDiagonalParams { c1, c2, c3 } = *self;
        [1.0 - c1 - c2 - c3, 1.0 - c1 + c2 + c3, 1.0 + c1 - c2 + c3, 1.0 + c1 + c2 - c3]
    }

    pub fn eigenvalues(&self) -> [f64; 4] {
        self.vertex_weights().map(|w| w / 4.0)
    }

    /// `c = max |cᵢ|`.
    pub fn max_abs(&self) -> f64 {
        self.c1.abs().max(self.c2.abs()).max(self.c3.abs())
    }

    pub fn is_valid(&self) -> bool {
        self.check().is_ok()
    }
}

/// `ρ = (I⊗I + Σ cᵢ σᵢ⊗σᵢ)/4`.
pub fn bell_diagonal(params: &BellDiagonalParams) -> Result<DensityMatrix> {
    params.check()?;
    let paulis = [ComplexMatrix::pauli_x(), ComplexMatrix::pauli_y(), ComplexMatrix::pauli_z()];
    let mut m = ComplexMatrix::identity(4);
    for (c, s) in [params.c1, params.c2, params.c3].into_iter().zip(&paulis) {
        m = &m + &tensor(s, s).scale_real(c);
    }
    DensityMatrix::new(m.scale_real(0.25), vec![2, 2])
}

/// `v log₂ v` with `0 log 0 = 0`.
fn xlog2x(v: f64) -> f64 {
    if v > 0.0 {
        v * v.log2()
    } else {
        0.0
    }
}

/// `(1−a)/2 log₂(1−a) + (1+a)/2 log₂(1+a)` with `a = c tanh x`.
fn classical_term(c: f64, strength: Strength) -> f64 {
    let a = c * strength.tanh();
    (xlog2x(1.0 - a) + xlog2x(1.0 + a)) / 2.0
}

/// Closed-form super discord of a Bell-diagonal state (measurement on B).
pub fn bd_super_discord(params: &BellDiagonalParams, strength: Strength) -> Result<f64> {
    params.check()?;
    let spectral: f64 = params.vertex_weights().into_iter().map(|w| xlog2x(w) / 4.0).sum();
    Ok(spectral - classical_term(params.max_abs(), strength))
}

/// Closed-form super classical correlation of a Bell-diagonal state.
pub fn bd_super_classical(params: &BellDiagonalParams, strength: Strength) -> Result<f64> {
    params.check()?;
    Ok(classical_term(params.max_abs(), strength))
}

/// Bell-diagonal parameters under identical local phase damping at rate `gamma`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PhaseDampingTrajectory {
    pub initial: BellDiagonalParams,
    pub gamma: f64,
}

impl PhaseDampingTrajectory {
    pub fn new(initial: BellDiagonalParams, gamma: f64) -> Result<Self> {
        initial.check()?;
        if !(gamma >= 0.0) || !gamma.is_finite() {
            return Err(Error::InvalidArgument(format!("damping rate must be >= 0, got {gamma}")));
        }
        Ok(PhaseDampingTrajectory { initial, gamma })
    }
}

/// `(c₁e^{−2γt}, c₂e^{−2γt}, c₃)`.
pub fn phase_damping_at(traj: &PhaseDampingTrajectory, t: f64) -> Result<BellDiagonalParams> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::InvalidArgument(format!("time must be >= 0, got {t}")));
    }
    let decay = (-2.0 * traj.gamma * t).exp();
    BellDiagonalParams::new(traj.initial.c1 * decay, traj.initial.c2 * decay, traj.initial.c3)
}

/// Time at which `max(|c₁(t)|, |c₂(t)|)` falls to `|c₃|`, if it ever does.
pub fn cd_qd_transition_time(traj: &PhaseDampingTrajectory) -> Result<Option<f64>> {
    if !(traj.gamma > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "transition time needs a positive damping rate, got {}",
            traj.gamma
        )));
    }
    let lead = traj.initial.c1.abs().max(traj.initial.c2.abs());
    let c3 = traj.initial.c3.abs();
    if c3 == 0.0 || lead <= c3 {
        return Ok(None);
    }
    Ok(Some((lead / c3).ln() / (2.0 * traj.gamma)))
}

fn check_range(name: &str, v: f64, lo: f64, hi: f64) -> Result<f64> {
    if !v.is_finite() || v < lo - RANGE_TOL || v > hi + RANGE_TOL {
        return Err(Error::InvalidArgument(format!("{name} = {v} outside [{lo}, {hi}]")));
    }
    Ok(v.clamp(lo, hi))
}

fn three_qubit_pure(amplitudes: &[(usize, f64)]) -> Result<DensityMatrix> {
    let mut ket = vec![C64::new(0.0, 0.0); 8];
    for &(idx, a) in amplitudes {
        ket[idx] += C64::new(a, 0.0);
    }
    DensityMatrix::from_pure(&ket, vec![2, 2, 2])
}

/// `cos θ|000> + sin θ|111>`, `θ ∈ [0, π/2]`.
pub fn ghz_state(theta: f64) -> Result<DensityMatrix> {
    let theta = check_range("theta", theta, 0.0, FRAC_PI_2)?;
    three_qubit_pure(&[(0b000, theta.cos()), (0b111, theta.sin())])
}

/// `sin θ cos φ|011> + sin θ sin φ|101> + cos θ|110>`, `θ, φ ∈ [0, π/2]`.
pub fn w_state(theta: f64, phi: f64) -> Result<DensityMatrix> {
    let theta = check_range("theta", theta, 0.0, FRAC_PI_2)?;
    let phi = check_range("phi", phi, 0.0, FRAC_PI_2)?;
    three_qubit_pure(&[
        (0b011, theta.sin() * phi.cos()),
        (0b101, theta.sin() * phi.sin()),
        (0b110, theta.cos()),
    ])
}

/// `√(pε)|000> + √(p(1−ε))|111> + √((1−p)/2)(|101> + |110>)`.
pub fn psi_pe_state(p: f64, eps: f64) -> Result<DensityMatrix> {
    let p = check_range("p", p, 0.0, 1.0)?;
    let eps = check_range("epsilon", eps, 0.0, 1.0)?;
    let side = ((1.0 - p) / 2.0).sqrt();
    three_qubit_pure(&[
        (0b000, (p * eps).sqrt()),
        (0b111, (p * (1.0 - eps)).sqrt()),
        (0b101, side),
        (0b110, side),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qstate::{binary_entropy, eig_hermitian, partial_trace, von_neumann_entropy};
    use std::f64::consts::PI;

    fn bd(c1: f64, c2: f64, c3: f64) -> BellDiagonalParams {
        BellDiagonalParams::new(c1, c2, c3).unwrap()
    }

    #[test]
    fn bell_diagonal_examples() {
        let rho = bell_diagonal(&bd(0.0, 0.0, 0.0)).unwrap();
        assert!(rho.matrix().max_abs_diff(&ComplexMatrix::identity(4).scale_real(0.25)) < 1e-16);

        let rho = bell_diagonal(&bd(1.0, -1.0, 1.0)).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let phi_plus = ComplexMatrix::outer(&[C64::new(s, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(s, 0.0)]);
        assert!(rho.matrix().max_abs_diff(&phi_plus) < 1e-15);

        let ev = eig_hermitian(bell_diagonal(&bd(0.5, -0.5, 0.2)).unwrap().matrix()).unwrap();
        for (got, want) in ev.iter().zip([0.55, 0.2, 0.2, 0.05]) {
            assert!((got - want).abs() < 1e-14);
        }
    }

    #[test]
    fn marginals_are_maximally_mixed() {
        let rho = bell_diagonal(&bd(0.3, -0.2, 0.4)).unwrap();
        for k in 0..2 {
            let m = partial_trace(&rho, &[k]).unwrap();
            assert!(m.matrix().max_abs_diff(&ComplexMatrix::identity(2).scale_real(0.5)) < 1e-15);
        }
    }

    #[test]
    fn invalid_params_name_the_violated_inequality() {
        let err = BellDiagonalParams::new(1.0, 1.0, 1.0).unwrap_err();
        assert!(matches!(&err, Error::Domain(msg) if msg.contains("1 - c1 - c2 - c3")), "{err}");
        let err = BellDiagonalParams::new(0.5, -0.5, -0.2).unwrap_err();
        assert!(matches!(&err, Error::Domain(msg) if msg.contains("1 - c1 + c2 + c3")), "{err}");
        assert!(BellDiagonalParams::new(1.5, 0.0, 0.0).is_err());
    }

    #[test]
    fn closed_form_discord_examples() {
        for s in [Strength::Weak(0.0), Strength::Weak(2.0), Strength::Projective] {
            assert!(bd_super_discord(&bd(0.0, 0.0, 0.0), s).unwrap().abs() < 1e-15);
        }
        let v = bd_super_discord(&bd(1.0, -1.0, 1.0), Strength::Projective).unwrap();
        assert!((v - 1.0).abs() < 1e-15);
        let v = bd_super_discord(&bd(1.0, -1.0, 1.0), Strength::Weak(1.0)).unwrap();
        let want = 2.0 - (1.0 - binary_entropy((1.0 + 1f64.tanh()) / 2.0));
        assert!((v - want).abs() < 1e-14);
        assert!((v - 1.527065).abs() < 1e-6);
    }

    #[test]
    fn closed_form_classical_examples() {
        for s in [Strength::Weak(0.5), Strength::Projective] {
            assert_eq!(bd_super_classical(&bd(0.0, 0.0, 0.0), s).unwrap(), 0.0);
        }
        assert_eq!(bd_super_classical(&bd(1.0, -1.0, 1.0), Strength::Projective).unwrap(), 1.0);
        let v = bd_super_classical(&bd(1.0, -1.0, 1.0), Strength::Weak(1.0)).unwrap();
        assert!((v - (1.0 - binary_entropy(0.5 + 0.5 * 1f64.tanh()))).abs() < 1e-14);
        assert!((v - 0.472935).abs() < 1e-6);
    }

    #[test]
    fn phase_damping_examples() {
        let init = bd(1.0, -0.6, 0.6);
        let traj = PhaseDampingTrajectory::new(init, 1.0).unwrap();
        assert_eq!(phase_damping_at(&traj, 0.0).unwrap(), init);
        let late = phase_damping_at(&traj, 1e3).unwrap();
        assert_eq!((late.c1, late.c2, late.c3), (0.0, -0.0, 0.6));
        let mid = phase_damping_at(&traj, 0.5).unwrap();
        assert!((mid.c1 - 0.367879).abs() < 1e-6);
        assert!((mid.c2 + 0.220728).abs() < 1e-6);
        assert_eq!(mid.c3, 0.6);
        assert!(phase_damping_at(&traj, -1.0).is_err());
        assert!(PhaseDampingTrajectory::new(init, -0.1).is_err());
    }

    #[test]
    fn transition_time_examples() {
        let traj = PhaseDampingTrajectory::new(bd(1.0, -0.6, 0.6), 1.0).unwrap();
        let t = cd_qd_transition_time(&traj).unwrap().unwrap();
        assert!((t - (1.0f64 / 0.6).ln() / 2.0).abs() < 1e-15);
        assert!((t - 0.255413).abs() < 1e-6);
        let traj = PhaseDampingTrajectory::new(bd(0.3, 0.1, 0.5), 1.0).unwrap();
        assert_eq!(cd_qd_transition_time(&traj).unwrap(), None);
        let traj = PhaseDampingTrajectory::new(bd(0.5, 0.5, 0.0), 1.0).unwrap();
        assert_eq!(cd_qd_transition_time(&traj).unwrap(), None);
        let traj = PhaseDampingTrajectory::new(bd(0.5, 0.5, 0.0), 0.0).unwrap();
        assert!(cd_qd_transition_time(&traj).is_err());
    }

    #[test]
    fn ghz_examples() {
        let rho = ghz_state(0.0).unwrap();
        assert!((rho.matrix()[(0, 0)].re - 1.0).abs() < 1e-15);
        let rho = ghz_state(PI / 4.0).unwrap();
        for k in 0..3 {
            let m = partial_trace(&rho, &[k]).unwrap();
            assert!(m.matrix().max_abs_diff(&ComplexMatrix::identity(2).scale_real(0.5)) < 1e-15);
        }
        let a = partial_trace(&ghz_state(PI / 6.0).unwrap(), &[0]).unwrap();
        assert!(a.matrix().max_abs_diff(&ComplexMatrix::from_real_diagonal(&[0.75, 0.25])) < 1e-15);
        assert!(ghz_state(-0.1).is_err());
        assert!(ghz_state(2.0).is_err());
    }

    #[test]
    fn w_examples() {
        let rho = w_state(FRAC_PI_2, 0.0).unwrap();
        assert!((rho.matrix()[(0b011, 0b011)].re - 1.0).abs() < 1e-15);
        let rho = w_state(0.0, 0.3).unwrap();
        assert!((rho.matrix()[(0b110, 0b110)].re - 1.0).abs() < 1e-15);
        let rho = w_state((1.0 / 3f64.sqrt()).acos(), PI / 4.0).unwrap();
        for i in [0b011, 0b101, 0b110] {
            for j in [0b011, 0b101, 0b110] {
                assert!((rho.matrix()[(i, j)].re - 1.0 / 3.0).abs() < 1e-15);
            }
        }
        assert!(w_state(0.2, 1.7).is_err());
    }

    #[test]
    fn psi_examples() {
        let rho = psi_pe_state(1.0, 1.0).unwrap();
        assert!((rho.matrix()[(0, 0)].re - 1.0).abs() < 1e-15);
        let rho = psi_pe_state(0.0, 0.3).unwrap();
        for i in [0b101, 0b110] {
            for j in [0b101, 0b110] {
                assert!((rho.matrix()[(i, j)].re - 0.5).abs() < 1e-15);
            }
        }
        let rho = psi_pe_state(0.5, 0.5).unwrap();
        for i in [0b000, 0b111, 0b101, 0b110] {
            assert!((rho.matrix()[(i, i)].re - 0.25).abs() < 1e-15);
        }
        assert!(psi_pe_state(1.2, 0.5).is_err());
    }

    #[test]
    fn tripartite_states_are_pure() {
        let states = [
            ghz_state(0.3).unwrap(),
            w_state(0.7, 0.2).unwrap(),
            psi_pe_state(0.35, 0.8).unwrap(),
        ];
        for rho in &states {
            assert!(von_neumann_entropy(rho).abs() < 1e-12);
            assert!((rho.matrix().trace().re - 1.0).abs() < 1e-12);
        }
    }
}

//! Time-periodic Lindbladians and the driven dissipative two-level system.
//!
//! Units: energies in the level splitting Δ, times in ħ/Δ.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::c;
use crate::superop::{commutator_superop, lindbladian_matrix, OperatorMatrix, SuperOperator};

/// Parameters of `H(t) = Δ/2 σ_z + E cos(ωt + φ) σ_x`, `A = √γ σ_−`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriveParams {
    /// Driving strength E.
    pub e: f64,
    /// Driving frequency ω.
    pub omega: f64,
    /// Driving phase φ (radians).
    pub phi: f64,
    /// Dissipation strength γ.
    pub gamma: f64,
    /// Level splitting; 1 in natural units.
    pub delta: f64,
}

impl DriveParams {
    pub fn new(e: f64, omega: f64, phi: f64, gamma: f64) -> Result<Self> {
        let p = Self {
            e,
            omega,
            phi,
            gamma,
            delta: 1.0,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.e, self.omega, self.phi, self.gamma, self.delta]
            .iter()
            .all(|x| x.is_finite());
        if !finite {
            return Err(Error::InvalidParams("non-finite parameter".into()));
        }
        if self.omega <= 0.0 {
            return Err(Error::InvalidParams(format!("omega = {} must be positive", self.omega)));
        }
        if self.gamma < 0.0 {
            return Err(Error::InvalidParams(format!(
                "gamma = {} must be non-negative",
                self.gamma
            )));
        }
        if self.e < 0.0 {
            return Err(Error::InvalidParams(format!("E = {} must be non-negative", self.e)));
        }
        Ok(())
    }

    pub fn period(&self) -> f64 {
        2.0 * PI / self.omega
    }
}

/// Time dependence of a Hamiltonian term.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Profile {
    Constant,
    /// `amplitude · cos(omega·t + phase)`
    Cosine {
        amplitude: f64,
        omega: f64,
        phase: f64,
    },
}

impl Profile {
    pub fn at(&self, t: f64) -> f64 {
        match *self {
            Profile::Constant => 1.0,
            Profile::Cosine {
                amplitude,
                omega,
                phase,
            } => amplitude * (omega * t + phase).cos(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct HamiltonianTerm {
    pub operator: OperatorMatrix,
    pub profile: Profile,
}

/// `L(t) = −i[H(t), ·] + D` with `H(t) = Σ_k f_k(t) H_k` and constant jumps.
#[derive(Debug, Clone)]
pub struct TimePeriodicLindbladian {
    hdim: usize,
    terms: Vec<HamiltonianTerm>,
    jumps: Vec<OperatorMatrix>,
    period: f64,
}

/// Split form `L(t) = static + Σ_k f_k(t) C_k` used by the integrator.
#[derive(Debug, Clone)]
pub struct GeneratorParts {
    pub static_part: SuperOperator,
    pub modulated: Vec<(SuperOperator, Profile)>,
}

impl GeneratorParts {
    pub fn at(&self, t: f64) -> SuperOperator {
        let mut l = self.static_part.clone();
        for (cm, prof) in &self.modulated {
            l = &l + &cm.scale(prof.at(t));
        }
        l
    }
}

impl TimePeriodicLindbladian {
    pub fn new(terms: Vec<HamiltonianTerm>, jumps: Vec<OperatorMatrix>, period: f64) -> Result<Self> {
        if !(period > 0.0 && period.is_finite()) {
            return Err(Error::InvalidParams(format!("period {period} must be positive")));
        }
        let hdim = terms
            .first()
            .map(|t| t.operator.dim())
            .or_else(|| jumps.first().map(|a| a.dim()))
            .ok_or_else(|| Error::InvalidParams("no Hamiltonian terms or jumps".into()))?;
        for t in &terms {
            if t.operator.dim() != hdim {
                return Err(Error::DimensionMismatch {
                    expected: hdim,
                    found: t.operator.dim(),
                });
            }
            if !t.operator.is_hermitian(1e-10) {
                return Err(Error::NonHermitianHamiltonian(t.operator.hermiticity_residual()));
            }
        }
        for a in &jumps {
            if a.dim() != hdim {
                return Err(Error::DimensionMismatch {
                    expected: hdim,
                    found: a.dim(),
                });
            }
            if !a.is_traceless(1e-10) {
                return Err(Error::InvalidParams("jump operators must be traceless".into()));
            }
        }
        Ok(Self {
            hdim,
            terms,
            jumps,
            period,
        })
    }

    pub fn hdim(&self) -> usize {
        self.hdim
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn terms(&self) -> &[HamiltonianTerm] {
        &self.terms
    }

    pub fn jumps(&self) -> &[OperatorMatrix] {
        &self.jumps
    }

    pub fn hamiltonian_at(&self, t: f64) -> OperatorMatrix {
        self.terms.iter().fold(OperatorMatrix::zeros(self.hdim), |acc, term| {
            &acc + &term.operator.scale(c(term.profile.at(t), 0.0))
        })
    }

    pub fn generator_at(&self, t: f64) -> SuperOperator {
        lindbladian_matrix(&self.hamiltonian_at(t), &self.jumps).expect("terms validated at construction")
    }

    pub fn parts(&self) -> GeneratorParts {
        let mut static_h = OperatorMatrix::zeros(self.hdim);
        let mut modulated = Vec::new();
        for term in &self.terms {
            match term.profile {
                Profile::Constant => static_h = &static_h + &term.operator,
                prof => modulated.push((commutator_superop(&term.operator).scale_complex(c(0.0, -1.0)), prof)),
            }
        }
        let static_part = lindbladian_matrix(&static_h, &self.jumps).expect("terms validated at construction");
        GeneratorParts { static_part, modulated }
    }
}

pub fn build_two_level_model(p: &DriveParams) -> Result<TimePeriodicLindbladian> {
    p.validate()?;
    let terms = vec![
        HamiltonianTerm {
            operator: OperatorMatrix::pauli_z().scale(c(0.5 * p.delta, 0.0)),
            profile: Profile::Constant,
        },
        HamiltonianTerm {
            operator: OperatorMatrix::pauli_x(),
            profile: Profile::Cosine {
                amplitude: p.e,
                omega: p.omega,
                phase: p.phi,
            },
        },
    ];
    let jumps = vec![OperatorMatrix::sigma_minus().scale(c(p.gamma.sqrt(), 0.0))];
    TimePeriodicLindbladian::new(terms, jumps, p.period())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{hermitian_eigenvalues, C64};
    use crate::superop::{choi, is_ccp, trace_annihilation_residual};

    fn sorted_eigs(s: &SuperOperator) -> Vec<C64> {
        let mut v = crate::linalg::eigen_general(s.matrix(), 1e-8, 1e8).unwrap().values;
        v.sort_by(|a, b| {
            (a.re * 1e9)
                .round()
                .total_cmp(&(b.re * 1e9).round())
                .then(a.im.total_cmp(&b.im))
        });
        v
    }

    #[test]
    fn invalid_params_rejected() {
        assert!(DriveParams::new(1.0, 0.0, 0.0, 0.01).is_err());
        assert!(DriveParams::new(1.0, 1.0, 0.0, -0.01).is_err());
        assert!(DriveParams::new(-1.0, 1.0, 0.0, 0.01).is_err());
        assert!(DriveParams::new(f64::NAN, 1.0, 0.0, 0.01).is_err());
    }

    #[test]
    fn period_from_frequency() {
        let p = DriveParams::new(1.5, 1.5, 0.0, 0.01).unwrap();
        let m = build_two_level_model(&p).unwrap();
        assert!((m.period() - 2.0 * PI / 1.5).abs() < 1e-15);
        assert_eq!(m.hdim(), 2);
    }

    #[test]
    fn undriven_coherent_generator_is_static_commutator() {
        let p = DriveParams::new(0.0, 1.3, 0.4, 0.0).unwrap();
        let m = build_two_level_model(&p).unwrap();
        let expected = commutator_superop(&OperatorMatrix::pauli_z().scale(c(0.5, 0.0))).scale_complex(c(0.0, -1.0));
        for &t in &[0.0, 0.7, 3.1, 10.0] {
            assert!(m.generator_at(t).distance(&expected) < 1e-15);
        }
    }

    #[test]
    fn amplitude_damping_spectrum() {
        let p = DriveParams::new(0.0, 1.0, 0.0, 0.01).unwrap();
        let ev = sorted_eigs(&build_two_level_model(&p).unwrap().generator_at(0.0));
        let expected = [c(-0.01, 0.0), c(-0.005, -1.0), c(-0.005, 1.0), c(0.0, 0.0)];
        for (a, b) in ev.iter().zip(expected.iter()) {
            assert!((a - b).norm() < 1e-12, "{a} vs {b}");
        }
    }

    #[test]
    fn generator_is_periodic_and_lindbladian() {
        let p = DriveParams::new(0.9, 1.7, 0.3, 0.05).unwrap();
        let m = build_two_level_model(&p).unwrap();
        let t_per = m.period();
        for k in 0..100 {
            let t = 0.173 * k as f64;
            let l = m.generator_at(t);
            assert!(l.distance(&m.generator_at(t + t_per)) < 1e-12);
            assert!(trace_annihilation_residual(&l) < 1e-12);
            assert!(is_ccp(&l, 1e-9).unwrap().0);
            assert!(m.parts().at(t).distance(&l) < 1e-13);
        }
    }

    #[test]
    fn quarter_phase_removes_drive_at_origin() {
        let p = DriveParams::new(2.0, 1.0, PI / 2.0, 0.01).unwrap();
        let h0 = build_two_level_model(&p).unwrap().hamiltonian_at(0.0);
        let expected = OperatorMatrix::pauli_z().scale(c(0.5, 0.0));
        assert!(crate::linalg::frob_diff(h0.matrix(), expected.matrix()) < 1e-15);
    }

    #[test]
    fn phase_shift_is_time_shift() {
        let (om, phi) = (1.3, 0.9);
        let shifted = build_two_level_model(&DriveParams::new(1.1, om, phi, 0.02).unwrap()).unwrap();
        let base = build_two_level_model(&DriveParams::new(1.1, om, 0.0, 0.02).unwrap()).unwrap();
        for &t in &[0.0, 0.4, 2.2] {
            assert!(shifted.generator_at(t).distance(&base.generator_at(t + phi / om)) < 1e-12);
        }
    }

    #[test]
    fn coherent_part_has_hermitian_choi() {
        let p = DriveParams::new(0.8, 1.0, 0.0, 0.0).unwrap();
        let l = build_two_level_model(&p).unwrap().generator_at(0.3);
        let cm = choi(&l);
        assert!(cm.hermiticity_residual() < 1e-14);
        // commutator part: Choi eigenvalues are real and sum to zero
        let s: f64 = hermitian_eigenvalues(cm.matrix()).iter().sum();
        assert!(s.abs() < 1e-14);
    }

    #[test]
    fn non_traceless_jump_rejected() {
        let r = TimePeriodicLindbladian::new(vec![], vec![OperatorMatrix::identity(2)], 1.0);
        assert!(r.is_err());
    }
}

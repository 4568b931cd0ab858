//! Detailed JSON record of one point: generator, Hamiltonian, jumps, kernel.

use floquet_core::linalg::{CMat, C64};
use floquet_core::superop::OperatorMatrix;
use serde::Serialize;

use crate::point::PointAnalysis;

/// Complex matrix as separate real and imaginary row lists.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OperatorRecord {
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl OperatorRecord {
    pub fn from_operator(op: &OperatorMatrix) -> Self {
        Self::from_rows(op.matrix())
    }

    fn from_rows(m: &CMat) -> Self {
        let rows = |f: fn(&C64) -> f64| {
            (0..m.nrows())
                .map(|i| (0..m.ncols()).map(|j| f(&m[(i, j)])).collect())
                .collect()
        };
        Self {
            re: rows(|z| z.re),
            im: rows(|z| z.im),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComplexValue {
    pub re: f64,
    pub im: f64,
}

impl From<C64> for ComplexValue {
    fn from(z: C64) -> Self {
        Self { re: z.re, im: z.im }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KernelRecord {
    pub tau_min: f64,
    pub lambda_k: Vec<ComplexValue>,
    pub kernel_generator: OperatorRecord,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointRecord {
    pub omega: f64,
    #[serde(rename = "E")]
    pub e: f64,
    pub gamma: f64,
    pub phi: f64,
    #[serde(rename = "T")]
    pub period: f64,
    pub floquet_eigenvalues: Vec<ComplexValue>,
    pub hermiticity_ok: bool,
    pub exists: bool,
    pub mu_min: f64,
    pub d_rhp: f64,
    pub branch: Option<Vec<i64>>,
    pub bound_exceeded: bool,
    pub floquet_lindbladian: Option<OperatorRecord>,
    pub h_f: Option<OperatorRecord>,
    pub jumps_f: Option<Vec<OperatorRecord>>,
    /// `None` when no kernel was requested or none was found in range.
    pub kernel: Option<KernelRecord>,
}

impl PointRecord {
    pub fn from_analysis(a: &PointAnalysis) -> Self {
        let m = &a.markov;
        let kernel = match &a.kernel {
            Some(Ok(k)) => k.spec_at_tau_min.as_ref().map(|s| KernelRecord {
                tau_min: k.tau_min,
                lambda_k: s.lambda_k.iter().map(|&z| z.into()).collect(),
                kernel_generator: OperatorRecord::from_rows(s.l_k.matrix()),
            }),
            _ => None,
        };
        Self {
            omega: a.params.omega,
            e: a.params.e,
            gamma: a.params.gamma,
            phi: a.params.phi,
            period: a.period,
            floquet_eigenvalues: a.decomposition.eigenvalues().iter().map(|&z| z.into()).collect(),
            hermiticity_ok: m.hermiticity_ok,
            exists: m.exists,
            mu_min: m.mu_min,
            d_rhp: m.d_rhp,
            branch: m.best_branch.as_ref().map(|b| b.x.clone()),
            bound_exceeded: m.bound_exceeded,
            floquet_lindbladian: m
                .floquet_lindbladian
                .as_ref()
                .map(|l| OperatorRecord::from_rows(l.matrix())),
            h_f: m.h_f.as_ref().map(OperatorRecord::from_operator),
            jumps_f: m
                .jumps_f
                .as_ref()
                .map(|js| js.iter().map(OperatorRecord::from_operator).collect()),
            kernel,
        }
    }
}

//! JSON reports written by the subcommands.

use asympdiag::block::PartitionFiltration;
use asympdiag::document::CoefficientEntry;
use asympdiag::oracle::SlopeFit;
use asympdiag::standard::SpectralBound;
use asympdiag::thermo::{Regime, ThermoBranch, ThermoParams};
use asympdiag::C64;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ResidualRow {
    pub rho: f64,
    pub norm: f64,
}

/// Output of `expand`; `verify --expansion` reads it back.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExpandReport {
    pub mode: String,
    pub order: usize,
    pub dim: usize,
    pub variable: String,
    /// `branches[j][k]`: coefficient of `rho^k` in branch `j`.
    pub branches: Vec<Vec<C64>>,
    pub nondegeneracy_order: Option<usize>,
    pub filtration: PartitionFiltration,
    pub empirical_radius: f64,
    pub residuals: Vec<ResidualRow>,
    pub lambda: Vec<CoefficientEntry>,
    pub m: Vec<CoefficientEntry>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ResidualCheck {
    pub samples: Vec<ResidualRow>,
    pub slope: SlopeFit,
    pub passed: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BranchSlope {
    Fitted(f64),
    Exact,
    /// Too few residuals above round-off to fit a slope.
    Unresolved,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BranchCheck {
    pub grid: Vec<f64>,
    /// `residuals[p][j] = |nu_num - nu_exp|` for branch `j` at grid point `p`.
    pub residuals: Vec<Vec<f64>>,
    pub slopes: Vec<BranchSlope>,
    pub passed: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BoundCheck {
    pub points: Vec<SpectralBound>,
    pub passed: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VerifyReport {
    pub order: usize,
    pub mode: String,
    pub grid: Vec<f64>,
    pub empirical_radius: f64,
    pub residual: ResidualCheck,
    pub branches: BranchCheck,
    pub spectral_bound: BoundCheck,
    pub passed: bool,
    pub first_failure: Option<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct IntegrateSummary {
    pub order: usize,
    pub t0: f64,
    pub t_end: f64,
    pub max_relative_error: f64,
    pub det_q_inf: C64,
    pub integral_trace: C64,
    pub liouville_defect: f64,
    pub q_tail_bound: f64,
    pub bound_holds: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ClosedForm {
    pub name: String,
    pub value: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ThermoReport {
    pub regime: Regime,
    pub params: ThermoParams,
    pub order: usize,
    pub nondegeneracy_order: Option<usize>,
    pub branches: Vec<ThermoBranch>,
    pub closed_form: Vec<ClosedForm>,
    pub trace_defect: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SignsReport {
    pub params: ThermoParams,
    pub points: usize,
    pub max_re: f64,
    pub min_gap: f64,
    pub max_det_defect: f64,
    pub all_negative: bool,
    pub violations: Vec<f64>,
}

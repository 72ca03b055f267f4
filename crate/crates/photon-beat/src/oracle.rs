//! The closed-form versus quadrature comparison over the documented grid.

use photon_beat_core::oracle::{check_point, oracle_grid, Formula, OracleCheck, ORACLE_REL_TOL};
use rayon::prelude::*;

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq)]
pub struct FormulaSummary {
    pub formula: &'static str,
    pub configurations: usize,
    pub checks: usize,
    pub failures: Vec<OracleCheck>,
    pub worst_relative_error: f64,
}

impl FormulaSummary {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

pub fn run_formula(formula: Formula) -> CliResult<FormulaSummary> {
    let grid = oracle_grid(formula);
    let checks: Vec<OracleCheck> = grid
        .par_iter()
        .map(check_point)
        .collect::<Result<Vec<_>, _>>()
        .map_err(CliError::Analysis)?
        .into_iter()
        .flatten()
        .collect();
    let worst = checks.iter().filter_map(|c| c.relative_error()).fold(0.0, f64::max);
    Ok(FormulaSummary {
        formula: formula.name(),
        configurations: grid.len(),
        checks: checks.len(),
        failures: checks.iter().filter(|c| !c.passes(ORACLE_REL_TOL)).cloned().collect(),
        worst_relative_error: worst,
    })
}

pub fn run_all() -> CliResult<Vec<FormulaSummary>> {
    Formula::ALL.iter().map(|&f| run_formula(f)).collect()
}

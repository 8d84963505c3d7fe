//! Work limits for the exponential parts of the toolkit.
//!
//! Defaults can be overridden with `TREE_CVRP_BUDGETS`, e.g.
//! `TREE_CVRP_BUDGETS=x_candidates=100000,dp_states=5000000`.

use serde::Serialize;

use crate::error::{Error, Result};

pub const BUDGET_ENV: &str = "TREE_CVRP_BUDGETS";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Budgets {
    /// Candidate X sets enumerated per critical vertex in exhaustive mode.
    pub x_candidates: u64,
    /// Table entries created by one DP run.
    pub dp_states: u64,
    /// Terminal limit of the subset-partition oracle.
    pub partition_terminals: usize,
    /// Table entries created by the configuration oracle.
    pub config_states: u64,
    /// Vertices created by the splittable expansion.
    pub expansion_vertices: u64,
}

impl Default for Budgets {
    fn default() -> Self {
        Self {
            x_candidates: 20_000,
            dp_states: 4_000_000,
            partition_terminals: 15,
            config_states: 4_000_000,
            expansion_vertices: 2_000_000,
        }
    }
}

impl Budgets {
    /// Applies `key=value` pairs separated by commas.
    pub fn with_overrides(mut self, spec: &str) -> Result<Self> {
        for part in spec.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (key, value) = part
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("budget override {part:?} is not key=value")))?;
            let parse =
                || value.trim().parse::<u64>().map_err(|_| Error::Parse(format!("budget {key}: bad value {value:?}")));
            match key.trim() {
                "x_candidates" => self.x_candidates = parse()?,
                "dp_states" => self.dp_states = parse()?,
                "partition_terminals" => self.partition_terminals = parse()? as usize,
                "config_states" => self.config_states = parse()?,
                "expansion_vertices" => self.expansion_vertices = parse()?,
                other => return Err(Error::Parse(format!("unknown budget {other:?}"))),
            }
        }
        Ok(self)
    }

    pub fn from_env() -> Result<Self> {
        match std::env::var(BUDGET_ENV) {
            Ok(spec) => Self::default().with_overrides(&spec),
            Err(_) => Ok(Self::default()),
        }
    }
}

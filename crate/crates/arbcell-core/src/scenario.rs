//! The study scenarios: which model plans the dispatch, how degradation
//! is weighted, and which tester window the cells run in.

use crate::harness::TesterLimits;
use crate::linear::LinearCellParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScenarioKind {
    /// Linear model, revenue only (theta = 1), full voltage range.
    LmRevenue,
    /// Linear model co-optimising revenue and degradation (theta = 0.5)
    /// inside the 10-90% SoC window.
    LmProfit,
    /// Physics-based model co-optimising revenue and degradation
    /// (theta = 0.5), full range.
    PbmProfit,
    /// Physics-based model, revenue only. Not part of the headline
    /// three-scenario study but available from the CLI.
    PbmRevenue,
}

impl ScenarioKind {
    pub const STUDY: [ScenarioKind; 3] = [
        ScenarioKind::LmRevenue,
        ScenarioKind::LmProfit,
        ScenarioKind::PbmProfit,
    ];

    pub fn id(&self) -> &'static str {
        match self {
            ScenarioKind::LmRevenue => "lm-revenue",
            ScenarioKind::LmProfit => "lm-profit",
            ScenarioKind::PbmProfit => "pbm-profit",
            ScenarioKind::PbmRevenue => "pbm-revenue",
        }
    }

    pub fn from_id(id: &str) -> Option<Self> {
        match id {
            "lm-revenue" => Some(ScenarioKind::LmRevenue),
            "lm-profit" => Some(ScenarioKind::LmProfit),
            "pbm-profit" => Some(ScenarioKind::PbmProfit),
            "pbm-revenue" => Some(ScenarioKind::PbmRevenue),
            _ => None,
        }
    }

    pub fn theta(&self) -> f64 {
        match self {
            ScenarioKind::LmRevenue | ScenarioKind::PbmRevenue => 1.0,
            ScenarioKind::LmProfit | ScenarioKind::PbmProfit => 0.5,
        }
    }

    pub fn uses_pbm(&self) -> bool {
        matches!(self, ScenarioKind::PbmProfit | ScenarioKind::PbmRevenue)
    }

    /// Linear-model parameters for the planner: the profit scenario is
    /// confined to the 10-90% SoC window.
    pub fn linear_params(&self, base: &LinearCellParams) -> LinearCellParams {
        match self {
            ScenarioKind::LmProfit => base.clone().with_soc_window(0.1, 0.9),
            _ => base.clone(),
        }
    }

    /// Tester voltage window the cells are cycled in: the narrowed
    /// 3.42-4.08 V range for the profit-maximising linear model, the full
    /// 2.7-4.2 V range otherwise.
    pub fn tester_limits(&self) -> TesterLimits {
        match self {
            ScenarioKind::LmProfit => TesterLimits::reduced_window(),
            _ => TesterLimits::full_range(),
        }
    }
}

//! Error types shared across the crate.

use core::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Electrode {
    Anode,
    Cathode,
}

impl fmt::Display for Electrode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Electrode::Anode => write!(f, "anode"),
            Electrode::Cathode => write!(f, "cathode"),
        }
    }
}

/// Hard faults raised by a cell model during a step. A fault means the
/// commanded profile drove the state out of its physical envelope; callers
/// either reject the candidate (optimiser) or abort with context (tester).
#[derive(Debug, Clone, PartialEq)]
pub enum CellFault {
    /// Shell concentration left [0, c_max]: over/under-charge.
    Saturation {
        electrode: Electrode,
        concentration: f64,
    },
    /// Exchange current density collapsed to zero at a stoichiometry edge.
    KineticsStall { electrode: Electrode },
    /// Terminal voltage left the hard bounds [2.0 V, 4.5 V].
    VoltageBound { voltage: f64 },
    /// Lumped temperature left the guard band [250 K, 350 K].
    ThermalGuard { temperature: f64 },
    /// Linear model: SoC left its configured window by more than 1e-9.
    SocWindow { soc: f64 },
}

impl fmt::Display for CellFault {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CellFault::Saturation {
                electrode,
                concentration,
            } => write!(
                f,
                "{electrode} concentration {concentration:.3} mol/m^3 outside [0, c_max]"
            ),
            CellFault::KineticsStall { electrode } => {
                write!(f, "{electrode} exchange current density is zero")
            }
            CellFault::VoltageBound { voltage } => {
                write!(f, "terminal voltage {voltage:.4} V outside [2.0, 4.5] V")
            }
            CellFault::ThermalGuard { temperature } => {
                write!(f, "temperature {temperature:.2} K outside [250, 350] K")
            }
            CellFault::SocWindow { soc } => {
                write!(f, "state of charge {soc:.6} outside the configured window")
            }
        }
    }
}

/// Price series construction / lookup errors.
#[derive(Debug, Clone, PartialEq)]
pub enum MarketError {
    Empty,
    NonFinitePrice { index: usize },
    OutOfRange { t_s: u64 },
}

impl fmt::Display for MarketError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MarketError::Empty => write!(f, "price series is empty"),
            MarketError::NonFinitePrice { index } => {
                write!(f, "price at row {index} is not finite")
            }
            MarketError::OutOfRange { t_s } => {
                write!(f, "timestamp {t_s} s outside the price series range")
            }
        }
    }
}

/// Optimiser errors.
#[derive(Debug, Clone, PartialEq)]
pub enum OptimizeError {
    /// Horizon extends past the available price data.
    HorizonExceedsPrices,
    /// Schedule and price grids are misaligned.
    GridMismatch,
    /// The LP constraints admit no feasible point.
    Infeasible,
    /// Simplex failed to terminate (should not happen on well-posed input).
    NotConverged,
    /// A window optimisation failed; index identifies the window.
    Window {
        index: usize,
        source: alloc::boxed::Box<OptimizeError>,
    },
    /// The model faulted while rolling committed power forward.
    Rollout { fault: CellFault, t_s: u64 },
}

impl fmt::Display for OptimizeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OptimizeError::HorizonExceedsPrices => {
                write!(f, "optimisation horizon extends past the price data")
            }
            OptimizeError::GridMismatch => {
                write!(f, "schedule and price series are on different step grids")
            }
            OptimizeError::Infeasible => write!(f, "no feasible dispatch exists"),
            OptimizeError::NotConverged => write!(f, "LP did not converge"),
            OptimizeError::Window { index, source } => {
                write!(f, "window {index}: {source}")
            }
            OptimizeError::Rollout { fault, t_s } => {
                write!(f, "model fault at t={t_s} s: {fault}")
            }
        }
    }
}

/// Virtual-tester errors. The ledger accumulated up to the fault is
/// preserved by the caller.
#[derive(Debug, Clone, PartialEq)]
pub enum HarnessError {
    Fault { fault: CellFault, t_s: u64 },
    Market { source: MarketError },
}

impl fmt::Display for HarnessError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HarnessError::Fault { fault, t_s } => write!(f, "cell fault at t={t_s} s: {fault}"),
            HarnessError::Market { source } => write!(f, "{source}"),
        }
    }
}

impl From<MarketError> for HarnessError {
    fn from(source: MarketError) -> Self {
        HarnessError::Market { source }
    }
}

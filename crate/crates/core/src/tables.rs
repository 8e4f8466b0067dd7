//! Standard design grids: every combination of consumer's risk, producer
//! quality ratio and truncation multiplier (and group size for group plans),
//! at producer's risk 0.05 with the consumer's point at `m = m0`.

use serde::{Deserialize, Serialize};

use crate::design::{design_double, design_group, design_single, DesignOutcome, RiskSpec, SearchBounds};
use crate::error::{Error, Result};

pub const BETAS: [f64; 4] = [0.25, 0.10, 0.05, 0.01];
pub const R2_LEVELS: [f64; 5] = [2.0, 3.0, 4.0, 5.0, 6.0];
pub const MULTIPLIERS: [f64; 3] = [0.5, 0.7, 1.0];
pub const GROUP_SIZES: [u32; 2] = [5, 10];
pub const SHAPES: [f64; 2] = [0.75, 1.25];
pub const ALPHA: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PlanKind {
    Single,
    Double,
    Group,
}

impl PlanKind {
    pub fn name(&self) -> &'static str {
        match self {
            PlanKind::Single => "single",
            PlanKind::Double => "double",
            PlanKind::Group => "group",
        }
    }
}

/// The five standard grids.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TableId {
    /// Double plans, γ = 0.75.
    DoubleShape075 = 1,
    /// Double plans, γ = 1.25.
    DoubleShape125 = 2,
    /// Double-plan ASN beside the single-plan size, both shapes.
    SingleVsDouble = 3,
    /// Group plans, γ = 0.75.
    GroupShape075 = 4,
    /// Group plans, γ = 1.25.
    GroupShape125 = 5,
}

impl TableId {
    pub fn from_number(id: u8) -> Result<Self> {
        match id {
            1 => Ok(TableId::DoubleShape075),
            2 => Ok(TableId::DoubleShape125),
            3 => Ok(TableId::SingleVsDouble),
            4 => Ok(TableId::GroupShape075),
            5 => Ok(TableId::GroupShape125),
            _ => Err(Error::Data(format!("unknown table {id}, expected 1-5"))),
        }
    }

    pub fn number(&self) -> u8 {
        *self as u8
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub table: u8,
    pub kind: PlanKind,
    pub beta: f64,
    pub r2: f64,
    pub gamma: f64,
    pub a: f64,
    /// Group size, for group plans.
    pub r: Option<u32>,
    pub outcome: DesignOutcome,
}

/// One design cell of a grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell {
    pub kind: PlanKind,
    pub beta: f64,
    pub r2: f64,
    pub gamma: f64,
    pub a: f64,
    pub r: Option<u32>,
}

impl Cell {
    pub fn spec(&self) -> RiskSpec {
        RiskSpec::at_specified_life(self.beta, ALPHA, self.r2, self.a, self.gamma).expect("grid values are valid")
    }

    pub fn solve(&self, bounds: &SearchBounds) -> Result<DesignOutcome> {
        let spec = self.spec();
        match self.kind {
            PlanKind::Single => design_single(&spec, bounds),
            PlanKind::Double => design_double(&spec, bounds),
            PlanKind::Group => design_group(&spec, self.r.unwrap_or(1), bounds),
        }
    }
}

/// Cells of a grid in row-major order: `β`, then `r2`, then the column
/// groups (`γ` for grid 3, `r` for group grids), then `a`.
pub fn cells(id: TableId) -> Vec<Cell> {
    let mut out = Vec::new();
    for &beta in &BETAS {
        for &r2 in &R2_LEVELS {
            match id {
                TableId::DoubleShape075 | TableId::DoubleShape125 => {
                    let gamma = if id == TableId::DoubleShape075 { SHAPES[0] } else { SHAPES[1] };
                    for &a in &MULTIPLIERS {
                        out.push(Cell { kind: PlanKind::Double, beta, r2, gamma, a, r: None });
                    }
                }
                TableId::SingleVsDouble => {
                    for &gamma in &SHAPES {
                        for &a in &MULTIPLIERS {
                            for kind in [PlanKind::Double, PlanKind::Single] {
                                out.push(Cell { kind, beta, r2, gamma, a, r: None });
                            }
                        }
                    }
                }
                TableId::GroupShape075 | TableId::GroupShape125 => {
                    let gamma = if id == TableId::GroupShape075 { SHAPES[0] } else { SHAPES[1] };
                    for &r in &GROUP_SIZES {
                        for &a in &MULTIPLIERS {
                            out.push(Cell { kind: PlanKind::Group, beta, r2, gamma, a, r: Some(r) });
                        }
                    }
                }
            }
        }
    }
    out
}

/// Solves every cell of the grid.
pub fn generate(id: TableId, bounds: &SearchBounds) -> Result<Vec<TableRow>> {
    cells(id)
        .into_iter()
        .map(|cell| {
            Ok(TableRow {
                table: id.number(),
                kind: cell.kind,
                beta: cell.beta,
                r2: cell.r2,
                gamma: cell.gamma,
                a: cell.a,
                r: cell.r,
                outcome: cell.solve(bounds)?,
            })
        })
        .collect()
}

//! Report records shared by the verifier operations: every check reduces to
//! a left value, a right value, and the slack right − left measured against
//! a tolerance.

/// One verified inequality left ≤ right + tolerance.
#[derive(Debug, Clone)]
pub struct TwoSidedReport {
    pub check: String,
    pub left: f64,
    pub right: f64,
    /// right − left; negative slack beyond the tolerance is a failure.
    pub slack: f64,
    pub tolerance: f64,
}

impl TwoSidedReport {
    pub fn new(check: impl Into<String>, left: f64, right: f64, tolerance: f64) -> Self {
        TwoSidedReport {
            check: check.into(),
            left,
            right,
            slack: right - left,
            tolerance,
        }
    }

    /// Identity check |left − right| ≤ tolerance, encoded with slack
    /// −|left − right| so pass() keeps its one meaning.
    pub fn equality(check: impl Into<String>, left: f64, right: f64, tolerance: f64) -> Self {
        TwoSidedReport {
            check: check.into(),
            left,
            right,
            slack: -(left - right).abs(),
            tolerance,
        }
    }

    pub fn pass(&self) -> bool {
        self.slack >= -self.tolerance
    }

    /// Report row in the delimited format `check,left,right,slack,pass`.
    /// Fixed-precision scientific notation keeps rows byte-deterministic.
    pub fn render_row(&self) -> String {
        format!(
            "{},{:.12e},{:.12e},{:.12e},{}",
            self.check,
            self.left,
            self.right,
            self.slack,
            self.pass()
        )
    }
}

/// Reverse-martingale decomposition: ‖g − Π_T g‖₂² against the sum of the
/// squared increments of successive coordinate integrations.
#[derive(Debug, Clone)]
pub struct MartingaleReport {
    /// ‖g − Π_T g‖₂².
    pub total: f64,
    /// ‖g_{i−1} − g_i‖₂² per integrated coordinate, in integration order.
    pub increments: Vec<f64>,
    /// total − Σ increments.
    pub gap: f64,
    pub tolerance: f64,
}

impl MartingaleReport {
    pub fn pass(&self) -> bool {
        self.gap.abs() <= self.tolerance
    }
}

use super::TdseError;

/// Left end of the segment.
pub const X_MIN: f64 = -1.0;

/// Uniform grid on `[-1, x_max]` with Dirichlet ends. Only interior nodes
/// carry unknowns; `x = 0` is always a node.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    x_max: f64,
    n_points: usize,
    dx: f64,
    nodes_per_unit: usize,
}

impl Grid {
    /// About `n_points` interior nodes with `x_max ≥ min_extent`. The spacing
    /// is `1/m` for the largest integer `m` that still reaches `min_extent`.
    pub fn new(n_points: usize, min_extent: f64) -> Result<Self, TdseError> {
        if !(min_extent.is_finite() && min_extent > 0.0) {
            return Err(TdseError::Domain(format!(
                "grid extent must be positive, got {min_extent}"
            )));
        }
        let m = ((n_points + 1) as f64 / (1.0 + min_extent)).floor() as usize;
        if m < 2 {
            return Err(TdseError::Domain(format!(
                "{n_points} points cannot resolve [-1, {min_extent}]"
            )));
        }
        Ok(Self::from_parts(m, n_points))
    }

    /// Spacing `1/nodes_per_unit`, extended to cover `min_extent`.
    pub fn with_nodes_per_unit(nodes_per_unit: usize, min_extent: f64) -> Result<Self, TdseError> {
        if nodes_per_unit < 2 || !(min_extent.is_finite() && min_extent > 0.0) {
            return Err(TdseError::Domain(format!(
                "invalid grid: {nodes_per_unit} nodes per unit, extent {min_extent}"
            )));
        }
        let cells = ((1.0 + min_extent) * nodes_per_unit as f64).ceil() as usize;
        Ok(Self::from_parts(nodes_per_unit, cells - 1))
    }

    fn from_parts(m: usize, n_points: usize) -> Self {
        let dx = 1.0 / m as f64;
        Self {
            x_max: X_MIN + (n_points + 1) as f64 * dx,
            n_points,
            dx,
            nodes_per_unit: m,
        }
    }

    pub fn x_min(&self) -> f64 {
        X_MIN
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn nodes_per_unit(&self) -> usize {
        self.nodes_per_unit
    }

    /// Position of interior node `i` (0-based).
    pub fn x(&self, i: usize) -> f64 {
        X_MIN + (i + 1) as f64 * self.dx
    }

    /// Index of the node at `x = 0`.
    pub fn zero_index(&self) -> usize {
        self.nodes_per_unit - 1
    }

    pub fn positions(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_points).map(|i| self.x(i))
    }
}

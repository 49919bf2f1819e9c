use super::grid::Grid;
use super::schedule::BarrierMode;
use super::TdseError;

/// Barrier parameters at or above this value split the segment exactly.
pub const ALPHA_SPLIT: f64 = 1.0 - 1e-8;

/// Wall fractions below this pin the last node instead of adding a huge
/// ghost term.
const WALL_PIN_FRACTION: f64 = 1e-10;

/// Finite-difference Hamiltonian `−d²/dx² + V(x)` on the interior nodes.
///
/// Nodes marked as pinned are held at zero: an exact Dirichlet condition at
/// the barrier (`α = 1`) or beyond the moving wall. Couplings that touch a
/// pinned node are zero, so the remaining nodes form independent blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct Hamiltonian {
    diag: Vec<f64>,
    coupling: Vec<f64>,
    pinned: Vec<bool>,
    dx: f64,
}

impl Hamiltonian {
    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    /// `coupling[i]` links nodes `i` and `i + 1`.
    pub fn coupling(&self) -> &[f64] {
        &self.coupling
    }

    pub fn pinned(&self) -> &[bool] {
        &self.pinned
    }

    /// Maximal runs of free nodes as half-open index ranges.
    pub fn blocks(&self) -> Vec<std::ops::Range<usize>> {
        let mut out = Vec::new();
        let mut start = None;
        for i in 0..=self.len() {
            let free = i < self.len() && !self.pinned[i];
            match (free, start) {
                (true, None) => start = Some(i),
                (false, Some(s)) => {
                    out.push(s..i);
                    start = None;
                }
                _ => {}
            }
        }
        out
    }

    /// Dense symmetric matrix over all nodes; pinned rows and columns are zero.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let n = self.len();
        let mut m = vec![vec![0.0; n]; n];
        for i in 0..n {
            if !self.pinned[i] {
                m[i][i] = self.diag[i];
            }
            if i + 1 < n {
                m[i][i + 1] = self.coupling[i];
                m[i + 1][i] = self.coupling[i];
            }
        }
        m
    }

    /// `H v` for real `v`.
    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        let n = self.len();
        (0..n)
            .map(|i| {
                if self.pinned[i] {
                    return 0.0;
                }
                let mut s = self.diag[i] * v[i];
                if i > 0 {
                    s += self.coupling[i - 1] * v[i - 1];
                }
                if i + 1 < n {
                    s += self.coupling[i] * v[i + 1];
                }
                s
            })
            .collect()
    }
}

fn potential(x: f64, dx: f64) -> f64 {
    if x.abs() < 0.5 * dx {
        -0.5
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Hamiltonian with a repulsive barrier of strength `α/(1−α)` at `x = 0`
/// and a hard wall at `x = a`.
pub fn build_hamiltonian(grid: &Grid, a: f64, alpha: f64) -> Result<Hamiltonian, TdseError> {
    build_hamiltonian_with(grid, a, alpha, BarrierMode::Repulsive)
}

/// As [`build_hamiltonian`] with an explicit barrier sign. `BarrierMode::Off`
/// ignores `alpha`.
///
/// The wall sits between grid nodes in general. With `J` the last node left of
/// `a` and `f = (a − x_J)/dx`, the Dirichlet condition at `a` is imposed by a
/// ghost node: a term `(1 − f)/(f dx²)` on node `J`, and all nodes beyond `J`
/// pinned. This is second-order accurate and continuous in `a`.
pub fn build_hamiltonian_with(
    grid: &Grid,
    a: f64,
    alpha: f64,
    mode: BarrierMode,
) -> Result<Hamiltonian, TdseError> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(TdseError::Domain(format!(
            "alpha must lie in [0, 1], got {alpha}"
        )));
    }
    let dx = grid.dx();
    if !(a.is_finite() && a > dx && a <= grid.x_max()) {
        return Err(TdseError::Domain(format!(
            "wall position {a} outside (dx, {}]",
            grid.x_max()
        )));
    }
    let n = grid.n_points();
    let inv = 1.0 / (dx * dx);
    let mut diag: Vec<f64> = grid
        .positions()
        .map(|x| 2.0 * inv + potential(x, dx))
        .collect();
    let mut pinned = vec![false; n];

    let z = grid.zero_index();
    if mode != BarrierMode::Off {
        if alpha >= ALPHA_SPLIT {
            pinned[z] = true;
        } else {
            let g = alpha / (1.0 - alpha);
            let sign = if mode == BarrierMode::Attractive {
                -1.0
            } else {
                1.0
            };
            diag[z] += sign * g / dx;
        }
    }

    // Last node strictly left of the wall.
    let mut j = (((a - grid.x_min()) / dx).ceil() as usize)
        .saturating_sub(2)
        .min(n - 1);
    while j + 1 < n && grid.x(j + 1) < a {
        j += 1;
    }
    while j > 0 && grid.x(j) >= a {
        j -= 1;
    }
    let f = (a - grid.x(j)) / dx;
    for p in pinned.iter_mut().skip(j + 1) {
        *p = true;
    }
    if f < WALL_PIN_FRACTION {
        pinned[j] = true;
    } else {
        diag[j] += (1.0 - f) / f * inv;
    }

    let coupling = (0..n.saturating_sub(1))
        .map(|i| {
            if pinned[i] || pinned[i + 1] {
                0.0
            } else {
                -inv
            }
        })
        .collect();
    Ok(Hamiltonian {
        diag,
        coupling,
        pinned,
        dx,
    })
}

//! Lowest eigenpairs of symmetric tridiagonal matrices by Sturm bisection
//! and inverse iteration.

use super::hamiltonian::Hamiltonian;
use super::TdseError;

/// Lowest `K` instantaneous eigenstates on the full grid, normalized so that
/// `Σ φ² dx = 1`, with the first significant component positive.
#[derive(Debug, Clone, PartialEq)]
pub struct InstantaneousSpectrum {
    pub energies: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub dx: f64,
}

impl InstantaneousSpectrum {
    pub fn len(&self) -> usize {
        self.energies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.energies.is_empty()
    }

    pub fn n_points(&self) -> usize {
        self.states.first().map_or(0, Vec::len)
    }

    /// Largest `|⟨φ_i|φ_j⟩ − δ_ij|`.
    pub fn orthonormality_error(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (i, a) in self.states.iter().enumerate() {
            for (j, b) in self.states.iter().enumerate().skip(i) {
                let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>() * self.dx;
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((dot - target).abs());
            }
        }
        worst
    }
}

/// Lowest `count` eigenpairs of `h`. Each block of free nodes is solved on
/// its own and the results are merged by energy.
pub fn instantaneous_spectrum(
    h: &Hamiltonian,
    count: usize,
) -> Result<InstantaneousSpectrum, TdseError> {
    let n = h.len();
    let mut pairs: Vec<(f64, Vec<f64>)> = Vec::new();
    for block in h.blocks() {
        let d = &h.diag()[block.clone()];
        let e = &h.coupling()[block.start..block.end - 1];
        let want = count.min(d.len());
        let values = lowest_eigenvalues(d, e, want);
        let vectors = eigenvectors(d, e, &values)?;
        for (value, v) in values.into_iter().zip(vectors) {
            let mut full = vec![0.0; n];
            full[block.clone()].copy_from_slice(&v);
            pairs.push((value, full));
        }
    }
    if pairs.len() < count {
        return Err(TdseError::Domain(format!(
            "only {} levels fit on the grid, {count} requested",
            pairs.len()
        )));
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs.truncate(count);
    let scale = 1.0 / h.dx().sqrt();
    let (energies, states) = pairs
        .into_iter()
        .map(|(value, mut v)| {
            let pivot = v.iter().copied().find(|x| x.abs() > 1e-6).unwrap_or(1.0);
            let s = scale * pivot.signum();
            v.iter_mut().for_each(|x| *x *= s);
            (value, v)
        })
        .unzip();
    Ok(InstantaneousSpectrum {
        energies,
        states,
        dx: h.dx(),
    })
}

/// Number of eigenvalues of the tridiagonal `(d, e)` below `x`.
pub fn sturm_count(d: &[f64], e: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut q = 1.0;
    for i in 0..d.len() {
        let e2 = if i == 0 { 0.0 } else { e[i - 1] * e[i - 1] };
        q = d[i] - x - if i == 0 { 0.0 } else { e2 / q };
        if q == 0.0 {
            q = -f64::EPSILON * (d[i].abs() + e2.sqrt() + 1.0);
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// Lowest `count` eigenvalues in ascending order.
pub fn lowest_eigenvalues(d: &[f64], e: &[f64], count: usize) -> Vec<f64> {
    let n = d.len();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let r = if i > 0 { e[i - 1].abs() } else { 0.0 } + if i + 1 < n { e[i].abs() } else { 0.0 };
        lo = lo.min(d[i] - r);
        hi = hi.max(d[i] + r);
    }
    let pad = 1e-12 * (hi - lo).abs().max(1.0);
    let (lo, hi) = (lo - pad, hi + pad);
    (0..count.min(n))
        .map(|k| {
            let (mut a, mut b) = (lo, hi);
            loop {
                let mid = 0.5 * (a + b);
                if mid <= a || mid >= b || b - a <= 4.0 * f64::EPSILON * a.abs().max(b.abs()) {
                    break mid;
                }
                if sturm_count(d, e, mid) > k {
                    b = mid;
                } else {
                    a = mid;
                }
            }
        })
        .collect()
}

/// Unit eigenvectors for the given eigenvalues by inverse iteration.
/// Vectors of close eigenvalues are orthogonalized against each other.
fn eigenvectors(d: &[f64], e: &[f64], values: &[f64]) -> Result<Vec<Vec<f64>>, TdseError> {
    let n = d.len();
    let norm = d.iter().map(|x| x.abs()).fold(0.0, f64::max)
        + 2.0 * e.iter().map(|x| x.abs()).fold(0.0, f64::max);
    let cluster_gap = 1e-6 * norm.max(1.0);
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(values.len());
    for (idx, &lambda) in values.iter().enumerate() {
        let lu = ShiftedLu::new(d, e, lambda, norm);
        // Deterministic start vector that is unlikely to be orthogonal to
        // any eigenvector.
        let mut v: Vec<f64> = (0..n)
            .map(|i| 1.0 + 0.37 * ((i * 7919 + idx * 104_729) % 997) as f64 / 997.0)
            .collect();
        let cluster: Vec<usize> = (0..idx)
            .filter(|&j| (values[j] - lambda).abs() < cluster_gap)
            .collect();
        for _ in 0..4 {
            for &j in &cluster {
                let dot: f64 = out[j].iter().zip(&v).map(|(a, b)| a * b).sum();
                v.iter_mut().zip(&out[j]).for_each(|(x, y)| *x -= dot * y);
            }
            normalize(&mut v)?;
            lu.solve(&mut v);
        }
        for &j in &cluster {
            let dot: f64 = out[j].iter().zip(&v).map(|(a, b)| a * b).sum();
            v.iter_mut().zip(&out[j]).for_each(|(x, y)| *x -= dot * y);
        }
        normalize(&mut v)?;
        out.push(v);
    }
    Ok(out)
}

fn normalize(v: &mut [f64]) -> Result<(), TdseError> {
    let s = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if !(s.is_finite() && s > 0.0) {
        return Err(TdseError::Numerical("inverse iteration collapsed".into()));
    }
    v.iter_mut().for_each(|x| *x /= s);
    Ok(())
}

/// LU factorization with partial pivoting of `T − λ I`.
struct ShiftedLu {
    dl: Vec<f64>,
    d: Vec<f64>,
    du: Vec<f64>,
    du2: Vec<f64>,
    swapped: Vec<bool>,
}

impl ShiftedLu {
    fn new(d: &[f64], e: &[f64], lambda: f64, norm: f64) -> Self {
        let n = d.len();
        let mut dl = e.to_vec();
        let mut du = e.to_vec();
        let mut dd: Vec<f64> = d.iter().map(|x| x - lambda).collect();
        let mut du2 = vec![0.0; n.saturating_sub(2)];
        let mut swapped = vec![false; n.saturating_sub(1)];
        for i in 0..n.saturating_sub(1) {
            if dd[i].abs() >= dl[i].abs() {
                if dd[i] != 0.0 {
                    let fact = dl[i] / dd[i];
                    dl[i] = fact;
                    dd[i + 1] -= fact * du[i];
                }
            } else {
                let fact = dd[i] / dl[i];
                dd[i] = dl[i];
                dl[i] = fact;
                let temp = du[i];
                du[i] = dd[i + 1];
                dd[i + 1] = temp - fact * dd[i + 1];
                if i + 2 < n {
                    du2[i] = du[i + 1];
                    du[i + 1] *= -fact;
                }
                swapped[i] = true;
            }
        }
        let tiny = f64::EPSILON * norm.max(f64::MIN_POSITIVE);
        for x in dd.iter_mut() {
            if x.abs() < tiny {
                *x = if *x < 0.0 { -tiny } else { tiny };
            }
        }
        Self {
            dl,
            d: dd,
            du,
            du2,
            swapped,
        }
    }

    fn solve(&self, b: &mut [f64]) {
        let n = b.len();
        for i in 0..n.saturating_sub(1) {
            if self.swapped[i] {
                let temp = b[i];
                b[i] = b[i + 1];
                b[i + 1] = temp - self.dl[i] * b[i];
            } else {
                b[i + 1] -= self.dl[i] * b[i];
            }
        }
        b[n - 1] /= self.d[n - 1];
        if n > 1 {
            b[n - 2] = (b[n - 2] - self.du[n - 2] * b[n - 1]) / self.d[n - 2];
        }
        for i in (0..n.saturating_sub(2)).rev() {
            b[i] = (b[i] - self.du[i] * b[i + 1] - self.du2[i] * b[i + 2]) / self.d[i];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tdse::{build_hamiltonian, Grid};
    use nalgebra::{DMatrix, SymmetricEigen};

    #[test]
    fn sturm_counts_on_laplacian() {
        // Eigenvalues of tridiag(-1, 2, -1) of size n: 2 - 2cos(kπ/(n+1)).
        let n = 50;
        let d = vec![2.0; n];
        let e = vec![-1.0; n - 1];
        let exact: Vec<f64> = (1..=n)
            .map(|k| 2.0 - 2.0 * (k as f64 * std::f64::consts::PI / (n + 1) as f64).cos())
            .collect();
        let got = lowest_eigenvalues(&d, &e, 10);
        for (g, x) in got.iter().zip(&exact) {
            assert!((g - x).abs() < 1e-13, "{g} vs {x}");
        }
        assert_eq!(sturm_count(&d, &e, exact[4] + 1e-9), 5);
    }

    #[test]
    fn agrees_with_dense_solver() {
        let g = Grid::with_nodes_per_unit(30, 3.1).unwrap();
        for (a, alpha) in [(1.0, 0.0), (2.3, 0.4), (3.0, 1.0), (1.7, 0.999)] {
            let h = build_hamiltonian(&g, a, alpha).unwrap();
            let spec = instantaneous_spectrum(&h, 12).unwrap();
            let n = h.len();
            let dense = h.to_dense();
            let free: Vec<usize> = (0..n).filter(|&i| !h.pinned()[i]).collect();
            let m = DMatrix::from_fn(free.len(), free.len(), |r, c| dense[free[r]][free[c]]);
            let mut oracle: Vec<f64> = SymmetricEigen::new(m).eigenvalues.iter().copied().collect();
            oracle.sort_by(f64::total_cmp);
            for (k, (x, y)) in spec.energies.iter().zip(&oracle).enumerate() {
                assert!(
                    (x - y).abs() < 1e-8 * y.abs().max(1.0),
                    "a={a} alpha={alpha} k={k}: {x} vs {y}"
                );
            }
            assert!(spec.orthonormality_error() < 1e-8);
            for (value, v) in spec.energies.iter().zip(&spec.states) {
                let hv = h.apply(v);
                let res = hv
                    .iter()
                    .zip(v)
                    .map(|(p, q)| (p - value * q).powi(2))
                    .sum::<f64>()
                    .sqrt();
                let size = v.iter().map(|q| q * q).sum::<f64>().sqrt();
                assert!(res < 1e-7 * value.abs().max(1.0) * size, "residual {res}");
            }
        }
    }

    #[test]
    fn degenerate_blocks_stay_orthogonal() {
        // Two identical uncoupled blocks give exactly doubled eigenvalues.
        let d = vec![2.0; 9];
        let mut e = vec![-1.0; 8];
        e[3] = 0.0;
        e[4] = 0.0;
        let mut dd = d.clone();
        dd[4] = 0.0;
        let values = lowest_eigenvalues(&dd, &e, 4);
        let vecs = eigenvectors(&dd, &e, &values).unwrap();
        for i in 0..4 {
            for j in 0..i {
                let dot: f64 = vecs[i].iter().zip(&vecs[j]).map(|(a, b)| a * b).sum();
                assert!(dot.abs() < 1e-10);
            }
        }
    }
}

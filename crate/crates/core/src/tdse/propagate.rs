use num_complex::Complex64;

use super::eigen::InstantaneousSpectrum;
use super::grid::Grid;
use super::hamiltonian::{build_hamiltonian_with, Hamiltonian};
use super::schedule::Schedule;
use super::TdseError;

/// Allowed norm drift per unit of physical time.
pub const NORM_DRIFT_PER_TIME: f64 = 1e-8;

/// Wave function on the interior nodes at physical time `time`.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveState {
    pub psi: Vec<Complex64>,
    pub time: f64,
    pub dx: f64,
}

impl WaveState {
    /// Instantaneous eigenstate `k` (1-based) of `spectrum`.
    pub fn eigenstate(
        spectrum: &InstantaneousSpectrum,
        k: usize,
        time: f64,
    ) -> Result<Self, TdseError> {
        let phi = spectrum.states.get(k.wrapping_sub(1)).ok_or_else(|| {
            TdseError::Domain(format!(
                "level {k} not among {} computed levels",
                spectrum.len()
            ))
        })?;
        Ok(Self {
            psi: phi.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
            time,
            dx: spectrum.dx,
        })
    }

    /// `Σ |ψ|² dx`.
    pub fn norm(&self) -> f64 {
        self.psi.iter().map(|z| z.norm_sqr()).sum::<f64>() * self.dx
    }

    /// `⟨ψ|H|ψ⟩ / ⟨ψ|ψ⟩`.
    pub fn energy(&self, h: &Hamiltonian) -> f64 {
        let re: Vec<f64> = self.psi.iter().map(|z| z.re).collect();
        let im: Vec<f64> = self.psi.iter().map(|z| z.im).collect();
        let (hr, hi) = (h.apply(&re), h.apply(&im));
        let num: f64 = re.iter().zip(&hr).map(|(a, b)| a * b).sum::<f64>()
            + im.iter().zip(&hi).map(|(a, b)| a * b).sum::<f64>();
        num * self.dx / self.norm()
    }
}

/// Populations `I_k = |⟨φ_k|ψ⟩|²` of the instantaneous levels.
pub fn populations(
    state: &WaveState,
    spectrum: &InstantaneousSpectrum,
) -> Result<Vec<f64>, TdseError> {
    if state.psi.len() != spectrum.n_points() || (state.dx - spectrum.dx).abs() > 1e-15 {
        return Err(TdseError::GridMismatch {
            state: state.psi.len(),
            spectrum: spectrum.n_points(),
        });
    }
    Ok(spectrum
        .states
        .iter()
        .map(|phi| {
            let overlap: Complex64 = phi.iter().zip(&state.psi).map(|(&p, z)| z * p).sum();
            (overlap * state.dx).norm_sqr()
        })
        .collect())
}

/// Crank–Nicolson stepper for a schedule on a fixed grid.
#[derive(Debug, Clone)]
pub struct Propagator {
    grid: Grid,
    schedule: Schedule,
    rhs: Vec<Complex64>,
    cprime: Vec<Complex64>,
}

impl Propagator {
    pub fn new(grid: Grid, schedule: Schedule) -> Result<Self, TdseError> {
        schedule.validate()?;
        if schedule.max_a() > grid.x_max() {
            return Err(TdseError::Domain(format!(
                "wall reaches {} beyond grid end {}",
                schedule.max_a(),
                grid.x_max()
            )));
        }
        let n = grid.n_points();
        Ok(Self {
            grid,
            schedule,
            rhs: vec![Complex64::default(); n],
            cprime: vec![Complex64::default(); n],
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn schedule(&self) -> &Schedule {
        &self.schedule
    }

    /// Hamiltonian at physical time `t`.
    pub fn hamiltonian_at(&self, t: f64) -> Result<Hamiltonian, TdseError> {
        let tau = self.schedule.epsilon * t;
        build_hamiltonian_with(
            &self.grid,
            self.schedule.a_of_tau(tau),
            self.schedule.alpha_of_tau(tau),
            self.schedule.barrier,
        )
    }

    /// One step `(1 + i dt H/2) ψ' = (1 − i dt H/2) ψ` with `H` taken at the
    /// midpoint of the step.
    pub fn step(&mut self, state: &mut WaveState, dt: f64) -> Result<(), TdseError> {
        let h = self.hamiltonian_at(state.time + 0.5 * dt)?;
        let n = h.len();
        let half = Complex64::new(0.0, 0.5 * dt);
        let (diag, off, pinned) = (h.diag(), h.coupling(), h.pinned());
        let psi = &mut state.psi;

        for i in 0..n {
            self.rhs[i] = if pinned[i] {
                Complex64::default()
            } else {
                let mut hpsi = psi[i] * diag[i];
                if i > 0 {
                    hpsi += psi[i - 1] * off[i - 1];
                }
                if i + 1 < n {
                    hpsi += psi[i + 1] * off[i];
                }
                psi[i] - half * hpsi
            };
        }

        // Thomas sweep on the tridiagonal (1 + i dt H/2); pinned rows are the
        // identity and their couplings are already zero.
        let one = Complex64::new(1.0, 0.0);
        let a_diag = |i: usize| if pinned[i] { one } else { one + half * diag[i] };
        let a_off = |i: usize| half * off[i];
        let mut inv = one / a_diag(0);
        self.cprime[0] = if n > 1 {
            a_off(0) * inv
        } else {
            Complex64::default()
        };
        psi[0] = self.rhs[0] * inv;
        for i in 1..n {
            let sub = a_off(i - 1);
            inv = one / (a_diag(i) - sub * self.cprime[i - 1]);
            if i + 1 < n {
                self.cprime[i] = a_off(i) * inv;
            }
            psi[i] = (self.rhs[i] - sub * psi[i - 1]) * inv;
        }
        for i in (0..n.saturating_sub(1)).rev() {
            let next = psi[i + 1];
            psi[i] -= self.cprime[i] * next;
        }
        state.time += dt;
        Ok(())
    }

    /// Advance to `t_end` with equal steps no longer than `max_dt`, checking
    /// the norm against [`NORM_DRIFT_PER_TIME`].
    pub fn advance(
        &mut self,
        state: &mut WaveState,
        t_end: f64,
        max_dt: f64,
    ) -> Result<usize, TdseError> {
        let span = t_end - state.time;
        if span <= 0.0 {
            return Ok(0);
        }
        if max_dt.is_nan() || max_dt <= 0.0 {
            return Err(TdseError::Domain(format!(
                "time step must be positive, got {max_dt}"
            )));
        }
        let steps = (span / max_dt).ceil() as usize;
        let dt = span / steps as f64;
        let (t0, n0) = (state.time, state.norm());
        for s in 0..steps {
            self.step(state, dt)?;
            if (s + 1) % 4096 == 0 || s + 1 == steps {
                check_norm(state, n0, state.time - t0)?;
            }
        }
        state.time = t_end;
        Ok(steps)
    }
}

fn check_norm(state: &WaveState, initial: f64, elapsed: f64) -> Result<(), TdseError> {
    let norm = state.norm();
    let drift = (norm - initial).abs();
    if !norm.is_finite() || drift > NORM_DRIFT_PER_TIME * elapsed.max(1.0) {
        return Err(TdseError::NormDrift {
            time: state.time,
            drift,
        });
    }
    Ok(())
}

/// Propagate `state` under `schedule` until physical time `t_end`.
pub fn propagate(
    state: &WaveState,
    grid: &Grid,
    schedule: &Schedule,
    t_end: f64,
    max_dt: f64,
) -> Result<WaveState, TdseError> {
    let mut p = Propagator::new(grid.clone(), *schedule)?;
    let mut out = state.clone();
    p.advance(&mut out, t_end, max_dt)?;
    Ok(out)
}

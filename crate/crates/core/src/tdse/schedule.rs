use std::f64::consts::PI;

use super::TdseError;

/// Sign of the point interaction that realizes the barrier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BarrierMode {
    /// No barrier at all (`α ≡ 0`).
    Off,
    /// `ψ'(+0) − ψ'(−0) = +g ψ(0)`, `g = α/(1−α)`.
    #[default]
    Repulsive,
    /// `ψ'(+0) − ψ'(−0) = −g ψ(0)`.
    Attractive,
}

/// Slow-time protocol of one period.
///
/// The right wall moves from `a1` at `tau1` to `a2` at `tau2` along a cosine
/// ramp and returns to `a1` at `tau1 + period`. The barrier parameter is 1 on
/// `[tau1, tau2]`, ramps up on `[tau1 − alpha_ramp, tau1]`, down on
/// `[tau2, tau2 + alpha_ramp]`, and is 0 elsewhere. Physical time is
/// `t = τ / epsilon`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Schedule {
    pub period: f64,
    pub tau1: f64,
    pub tau2: f64,
    pub a1: f64,
    pub a2: f64,
    pub alpha_ramp: f64,
    pub epsilon: f64,
    pub barrier: BarrierMode,
}

impl Schedule {
    /// Divided-segment protocol with `a(τ₁) = 1`, `a(τ₂) = 3`.
    pub fn toy(epsilon: f64) -> Self {
        Self {
            period: 1.0,
            tau1: 0.25,
            tau2: 0.75,
            a1: 1.0,
            a2: 3.0,
            alpha_ramp: 0.1,
            epsilon,
            barrier: BarrierMode::Repulsive,
        }
    }

    /// Constant wall at `a` and no barrier.
    pub fn identity(a: f64, epsilon: f64) -> Self {
        Self {
            a1: a,
            a2: a,
            barrier: BarrierMode::Off,
            ..Self::toy(epsilon)
        }
    }

    pub fn validate(&self) -> Result<(), TdseError> {
        let bad = |msg: String| Err(TdseError::Domain(msg));
        if !(self.period > 0.0 && self.period.is_finite()) {
            return bad(format!("period must be positive, got {}", self.period));
        }
        if !(0.0 < self.tau1 && self.tau1 < self.tau2 && self.tau2 < self.period) {
            return bad(format!(
                "need 0 < tau1 < tau2 < period, got tau1={} tau2={} period={}",
                self.tau1, self.tau2, self.period
            ));
        }
        if !(self.a1 > 0.0 && self.a2 > 0.0 && self.a1.is_finite() && self.a2.is_finite()) {
            return bad(format!(
                "wall positions must be positive, got {} and {}",
                self.a1, self.a2
            ));
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return bad(format!("epsilon must be positive, got {}", self.epsilon));
        }
        if self.barrier != BarrierMode::Off {
            if self.alpha_ramp.is_nan() || self.alpha_ramp <= 0.0 {
                return bad(format!(
                    "alpha ramp must be positive, got {}",
                    self.alpha_ramp
                ));
            }
            if self.tau1 - self.alpha_ramp < 0.0 || self.tau2 + self.alpha_ramp > self.period {
                return bad("barrier ramps must fit inside one period".into());
            }
        }
        Ok(())
    }

    fn phase(&self, tau: f64) -> f64 {
        tau.rem_euclid(self.period)
    }

    /// Right wall position `a(τ)`.
    pub fn a_of_tau(&self, tau: f64) -> f64 {
        let u = self.phase(tau);
        let ramp = |from: f64, to: f64, s: f64| from + (to - from) * (1.0 - (PI * s).cos()) / 2.0;
        if (self.tau1..=self.tau2).contains(&u) {
            ramp(self.a1, self.a2, (u - self.tau1) / (self.tau2 - self.tau1))
        } else {
            let since = (u - self.tau2).rem_euclid(self.period);
            let span = self.period - (self.tau2 - self.tau1);
            ramp(self.a2, self.a1, since / span)
        }
    }

    /// Barrier parameter `α(τ) ∈ [0, 1]`.
    pub fn alpha_of_tau(&self, tau: f64) -> f64 {
        if self.barrier == BarrierMode::Off {
            return 0.0;
        }
        let u = self.phase(tau);
        let r = self.alpha_ramp;
        if (self.tau1..=self.tau2).contains(&u) {
            1.0
        } else if u >= self.tau1 - r && u < self.tau1 {
            (1.0 - (PI * (u - self.tau1 + r) / r).cos()) / 2.0
        } else if u > self.tau2 && u <= self.tau2 + r {
            (1.0 + (PI * (u - self.tau2) / r).cos()) / 2.0
        } else {
            0.0
        }
    }

    pub fn max_a(&self) -> f64 {
        self.a1.max(self.a2)
    }

    pub fn min_a(&self) -> f64 {
        self.a1.min(self.a2)
    }

    /// Physical duration of one period.
    pub fn period_duration(&self) -> f64 {
        self.period / self.epsilon
    }

    /// Physical time of slow time `tau`.
    pub fn time_of(&self, tau: f64) -> f64 {
        tau / self.epsilon
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toy_profile() {
        let s = Schedule::toy(1e-3);
        s.validate().unwrap();
        assert!((s.a_of_tau(0.25) - 1.0).abs() < 1e-15);
        assert!((s.a_of_tau(0.75) - 3.0).abs() < 1e-15);
        assert!((s.a_of_tau(0.5) - 2.0).abs() < 1e-12);
        assert!((s.a_of_tau(0.0) - 2.0).abs() < 1e-12);
        assert!((s.a_of_tau(1.0) - s.a_of_tau(0.0)).abs() < 1e-12);
        for i in 0..=1000 {
            let tau = i as f64 / 1000.0;
            let a = s.a_of_tau(tau);
            assert!((1.0..=3.0).contains(&a));
            let al = s.alpha_of_tau(tau);
            assert!((0.0..=1.0).contains(&al));
        }
        assert_eq!(s.alpha_of_tau(0.1), 0.0);
        assert_eq!(s.alpha_of_tau(0.15), 0.0);
        assert!((s.alpha_of_tau(0.2) - 0.5).abs() < 1e-12);
        assert_eq!(s.alpha_of_tau(0.5), 1.0);
        assert!((s.alpha_of_tau(0.8) - 0.5).abs() < 1e-12);
        assert_eq!(s.alpha_of_tau(0.9), 0.0);
    }

    #[test]
    fn ramps_are_continuous() {
        let s = Schedule::toy(1e-3);
        let h = 1e-9;
        for tau in [0.15, 0.25, 0.75, 0.85] {
            assert!((s.alpha_of_tau(tau - h) - s.alpha_of_tau(tau + h)).abs() < 1e-6);
            assert!((s.a_of_tau(tau - h) - s.a_of_tau(tau + h)).abs() < 1e-6);
        }
    }

    #[test]
    fn identity_schedule() {
        let s = Schedule::identity(2.0, 1e-2);
        s.validate().unwrap();
        for i in 0..10 {
            let tau = i as f64 / 10.0;
            assert_eq!(s.a_of_tau(tau), 2.0);
            assert_eq!(s.alpha_of_tau(tau), 0.0);
        }
    }

    #[test]
    fn validation() {
        let mut s = Schedule::toy(1e-3);
        s.tau1 = 0.05;
        assert!(s.validate().is_err());
        let mut s = Schedule::toy(1e-3);
        s.epsilon = 0.0;
        assert!(s.validate().is_err());
        let mut s = Schedule::toy(1e-3);
        s.tau2 = 0.2;
        assert!(s.validate().is_err());
    }
}

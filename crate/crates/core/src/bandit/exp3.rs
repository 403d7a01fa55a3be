//! Gain-based Exp3 with uniform exploration, used as the external-regret
//! learner inside the swap-regret composition.

/// One external-regret learner over `n` arms with a fixed planned horizon.
#[derive(Debug, Clone)]
pub struct Exp3 {
    eta: f64,
    explore: f64,
    gains: Vec<f64>,
    probs: Vec<f64>,
}

impl Exp3 {
    /// Learning rate `sqrt(ln n / (T n))`; exploration `min(1, n * eta)`.
    pub fn new(n: usize, budget: u64) -> Self {
        assert!(n > 0, "Exp3 needs at least one arm");
        let (eta, explore) = if n == 1 {
            (0.0, 0.0)
        } else {
            let eta = ((n as f64).ln() / (budget.max(1) as f64 * n as f64)).sqrt();
            (eta, (n as f64 * eta).min(1.0))
        };
        Self {
            eta,
            explore,
            gains: vec![0.0; n],
            probs: vec![1.0 / n as f64; n],
        }
    }

    pub fn arms(&self) -> usize {
        self.gains.len()
    }

    pub fn learning_rate(&self) -> f64 {
        self.eta
    }

    pub fn exploration(&self) -> f64 {
        self.explore
    }

    pub fn distribution(&self) -> &[f64] {
        &self.probs
    }

    /// Adds an already importance-weighted gain estimate to one arm.
    pub fn credit(&mut self, arm: usize, estimate: f64) {
        if estimate == 0.0 || self.gains.len() == 1 {
            return;
        }
        self.gains[arm] += estimate;
        self.refresh();
    }

    pub fn reset(&mut self) {
        let n = self.gains.len();
        self.gains.iter_mut().for_each(|g| *g = 0.0);
        self.probs.iter_mut().for_each(|p| *p = 1.0 / n as f64);
    }

    fn refresh(&mut self) {
        let n = self.gains.len() as f64;
        let top = self.gains.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut total = 0.0;
        for (p, &g) in self.probs.iter_mut().zip(&self.gains) {
            *p = (self.eta * (g - top)).exp();
            total += *p;
        }
        for p in &mut self.probs {
            *p = (1.0 - self.explore) * *p / total + self.explore / n;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parameters_follow_budget() {
        let e = Exp3::new(4, 1000);
        let eta = (4f64.ln() / 4000.0).sqrt();
        assert!((e.learning_rate() - eta).abs() < 1e-15);
        assert!((e.exploration() - 4.0 * eta).abs() < 1e-15);
        assert_eq!(Exp3::new(1, 10).distribution(), &[1.0]);
    }

    #[test]
    fn gains_shift_mass_but_keep_exploration_floor() {
        let mut e = Exp3::new(2, 100);
        for _ in 0..10_000 {
            e.credit(0, 1.0);
        }
        let p = e.distribution();
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(p[0] > 0.9);
        assert!(p[1] >= e.exploration() / 2.0 - 1e-15);
        e.reset();
        assert_eq!(e.distribution(), &[0.5, 0.5]);
    }
}

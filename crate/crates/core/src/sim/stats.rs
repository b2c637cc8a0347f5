/// Counts behind an outage estimate: `n₁` trials, `n₂` of which are
/// excluded because the user does not exist, and `n₃` outages among the
/// remaining ones.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct OutageCount {
    pub total: u64,
    pub excluded: u64,
    pub outages: u64,
}

impl OutageCount {
    pub fn record(&mut self, exists: bool, outage: bool) {
        self.total += 1;
        if !exists {
            self.excluded += 1;
        } else if outage {
            self.outages += 1;
        }
    }

    pub fn merge(&mut self, other: &Self) {
        self.total += other.total;
        self.excluded += other.excluded;
        self.outages += other.outages;
    }

    /// `n₁ − n₂`.
    pub fn eligible(&self) -> u64 {
        self.total - self.excluded
    }

    /// `n₃ / (n₁ − n₂)`: outage given the user exists.
    pub fn conditional(&self) -> f64 {
        match self.eligible() {
            0 => f64::NAN,
            n => self.outages as f64 / n as f64,
        }
    }

    pub fn conditional_stderr(&self) -> f64 {
        let n = self.eligible() as f64;
        let p = self.conditional();
        (p * (1.0 - p) / (n - 1.0).max(1.0)).sqrt()
    }

    /// `(n₂ + n₃)/n₁`: a missing user counts as an outage.
    pub fn unconditional(&self) -> f64 {
        match self.total {
            0 => f64::NAN,
            n => (self.excluded + self.outages) as f64 / n as f64,
        }
    }

    pub fn unconditional_stderr(&self) -> f64 {
        let n = self.total as f64;
        let p = self.unconditional();
        (p * (1.0 - p) / (n - 1.0).max(1.0)).sqrt()
    }
}

/// Streaming mean and variance (Welford), mergeable in a fixed order.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RunningMean {
    count: u64,
    mean: f64,
    m2: f64,
}

impl RunningMean {
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn merge(&mut self, other: &Self) {
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = *other;
            return;
        }
        let n = (self.count + other.count) as f64;
        let delta = other.mean - self.mean;
        self.mean += delta * other.count as f64 / n;
        self.m2 += other.m2 + delta * delta * self.count as f64 * other.count as f64 / n;
        self.count += other.count;
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn mean(&self) -> f64 {
        if self.count == 0 { f64::NAN } else { self.mean }
    }

    pub fn variance(&self) -> f64 {
        if self.count < 2 { 0.0 } else { self.m2 / (self.count - 1) as f64 }
    }

    /// Sample standard deviation over `√n`.
    pub fn stderr(&self) -> f64 {
        if self.count == 0 { f64::NAN } else { (self.variance() / self.count as f64).sqrt() }
    }
}

/// Everything measured at one transmit power.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Aggregate {
    pub trials: u64,
    pub weak: OutageCount,
    pub strong: OutageCount,
    pub weak_oma: OutageCount,
    pub strong_oma: OutageCount,
    pub noma_rate: RunningMean,
    pub oma_rate: RunningMean,
}

impl Aggregate {
    pub fn record(&mut self, outcome: &super::TrialOutcome) {
        self.trials += 1;
        self.weak.record(outcome.weak.exists, outcome.weak.noma_outage);
        self.strong.record(outcome.strong.exists, outcome.strong.noma_outage);
        self.weak_oma.record(outcome.weak.exists, outcome.weak.oma_outage);
        self.strong_oma.record(outcome.strong.exists, outcome.strong.oma_outage);
        self.noma_rate.push(outcome.noma_rate);
        self.oma_rate.push(outcome.oma_rate);
    }

    pub fn merge(&mut self, other: &Self) {
        self.trials += other.trials;
        self.weak.merge(&other.weak);
        self.strong.merge(&other.strong);
        self.weak_oma.merge(&other.weak_oma);
        self.strong_oma.merge(&other.strong_oma);
        self.noma_rate.merge(&other.noma_rate);
        self.oma_rate.merge(&other.oma_rate);
    }
}

//! Benchmark strategies: fixed symmetric quoting, the uniform random
//! policy, and online-learning meta-strategies that pick a fixed-spread
//! expert each period via multiplicative weights or follow-the-leader.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::strategy::{Action, ACTION_COUNT, CLEAR_ACTION};
use crate::types::Units;

/// Quote at a fixed symmetric distance (`theta_ask == theta_bid == theta`)
/// at all times, clearing inventory with a market order when a bound is
/// reached.
#[derive(Debug, Clone, Copy)]
pub struct FixedSpreadPolicy {
    theta: u8,
}

impl FixedSpreadPolicy {
    pub fn new(theta: u8) -> FixedSpreadPolicy {
        assert!((1..=5).contains(&theta), "theta must be in 1..=5");
        FixedSpreadPolicy { theta }
    }

    pub fn theta(&self) -> u8 {
        self.theta
    }

    /// Action for the current step. Symmetric pairs occupy action ids
    /// `theta - 1`.
    pub fn act(&self, inventory: Units, min_inv: Units, max_inv: Units) -> Action {
        if inventory >= max_inv || inventory <= min_inv {
            CLEAR_ACTION
        } else {
            Action::new(self.theta - 1).expect("theta 1..=5 maps into the action table")
        }
    }
}

/// Uniform random action each step, seeded; clears at the bounds like the
/// fixed policies.
#[derive(Debug)]
pub struct RandomPolicy {
    rng: ChaCha8Rng,
}

impl RandomPolicy {
    pub fn new(seed: u64) -> RandomPolicy {
        RandomPolicy { rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    pub fn act(&mut self, inventory: Units, min_inv: Units, max_inv: Units) -> Action {
        if inventory >= max_inv || inventory <= min_inv {
            return CLEAR_ACTION;
        }
        let id = self.rng.gen_range(0..ACTION_COUNT as u8);
        Action::new(id).expect("in range")
    }
}

/// Expert-selection mode for the meta strategy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MetaMode {
    /// Multiplicative weights over per-period payoffs; samples an expert
    /// from the normalised weight vector each period.
    MultiplicativeWeights { learning_rate: f64 },
    /// Deterministic argmax of cumulative payoff, ties to the smaller
    /// spread parameter.
    FollowTheLeader,
}

/// Online-learning meta strategy over a class of fixed-spread experts.
#[derive(Debug)]
pub struct MetaLearner {
    mode: MetaMode,
    thetas: Vec<u8>,
    weights: Vec<f64>,
    cumulative: Vec<f64>,
    /// Running maximum absolute payoff, used to scale MW exponents.
    payoff_scale: f64,
    rng: ChaCha8Rng,
    current: usize,
}

impl MetaLearner {
    /// `thetas` parametrises the expert class (ascending minimum quoted
    /// spread); weights start uniform and the first pick samples them.
    pub fn new(mode: MetaMode, thetas: Vec<u8>, seed: u64) -> MetaLearner {
        assert!(!thetas.is_empty());
        let n = thetas.len();
        let mut learner = MetaLearner {
            mode,
            thetas,
            weights: vec![1.0 / n as f64; n],
            cumulative: vec![0.0; n],
            payoff_scale: 1.0,
            rng: ChaCha8Rng::seed_from_u64(seed),
            current: 0,
        };
        learner.current = learner.pick();
        learner
    }

    pub fn experts(&self) -> &[u8] {
        &self.thetas
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Index of the expert in charge for the current period.
    pub fn current_expert(&self) -> usize {
        self.current
    }

    pub fn current_theta(&self) -> u8 {
        self.thetas[self.current]
    }

    /// Feed the per-expert payoffs for the period that just closed and pick
    /// the expert for the next one. Returns the new expert index.
    pub fn meta_step(&mut self, payoffs: &[f64]) -> usize {
        assert_eq!(payoffs.len(), self.thetas.len());
        assert!(payoffs.iter().all(|p| p.is_finite()), "payoffs must be finite");
        for (c, p) in self.cumulative.iter_mut().zip(payoffs) {
            *c += p;
        }
        if let MetaMode::MultiplicativeWeights { learning_rate } = self.mode {
            for p in payoffs {
                self.payoff_scale = self.payoff_scale.max(p.abs());
            }
            for (w, p) in self.weights.iter_mut().zip(payoffs) {
                *w *= (learning_rate * p / self.payoff_scale).exp();
            }
            let total: f64 = self.weights.iter().sum();
            for w in &mut self.weights {
                *w /= total;
            }
        }
        self.current = self.pick();
        self.current
    }

    fn pick(&mut self) -> usize {
        match self.mode {
            MetaMode::FollowTheLeader => {
                let mut best = 0;
                for (i, &c) in self.cumulative.iter().enumerate() {
                    if c > self.cumulative[best] {
                        best = i;
                    }
                }
                best
            }
            MetaMode::MultiplicativeWeights { .. } => {
                let draw: f64 = self.rng.gen();
                let mut acc = 0.0;
                for (i, &w) in self.weights.iter().enumerate() {
                    acc += w;
                    if draw < acc {
                        return i;
                    }
                }
                self.weights.len() - 1
            }
        }
    }
}

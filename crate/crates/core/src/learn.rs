//! TD control algorithms with eligibility traces, exploration policy and
//! epsilon decay.
//!
//! All algorithms share the trace-based update machinery in [`features`]:
//! the algorithm computes one TD error per transition and the value
//! function applies it through its traces. Off-policy members (Q-learning,
//! R-learning and the double-estimator variants) cut traces after a
//! non-greedy successor action, Watkins style; the on-policy members never
//! cut. The R-learning family is undiscounted: it subtracts a running
//! average-reward estimate from each reward and decays traces by lambda
//! alone. "On-policy R-learning" bootstraps from the successor action taken
//! and updates the average on every step; "Double R-learning" is the
//! double-estimator analogue of R-learning. Neither has a canonical
//! published form; these are the minimal extensions of the named ideas.

use std::io::{self, Read, Write};

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::features::{StateTiles, StateVector, ValueFn};
use crate::strategy::{Action, ACTION_COUNT};

/// Algorithm selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AlgoKind {
    QLearning,
    Sarsa,
    ExpectedSarsa,
    DoubleQ,
    RLearning,
    OnPolicyR,
    DoubleR,
}

impl AlgoKind {
    pub fn is_average_reward(self) -> bool {
        matches!(self, AlgoKind::RLearning | AlgoKind::OnPolicyR | AlgoKind::DoubleR)
    }

    pub fn is_double(self) -> bool {
        matches!(self, AlgoKind::DoubleQ | AlgoKind::DoubleR)
    }

    fn tag(self) -> u8 {
        match self {
            AlgoKind::QLearning => 0,
            AlgoKind::Sarsa => 1,
            AlgoKind::ExpectedSarsa => 2,
            AlgoKind::DoubleQ => 3,
            AlgoKind::RLearning => 4,
            AlgoKind::OnPolicyR => 5,
            AlgoKind::DoubleR => 6,
        }
    }

    fn from_tag(tag: u8) -> io::Result<AlgoKind> {
        Ok(match tag {
            0 => AlgoKind::QLearning,
            1 => AlgoKind::Sarsa,
            2 => AlgoKind::ExpectedSarsa,
            3 => AlgoKind::DoubleQ,
            4 => AlgoKind::RLearning,
            5 => AlgoKind::OnPolicyR,
            6 => AlgoKind::DoubleR,
            other => {
                return Err(io::Error::new(
                    io::ErrorKind::InvalidData,
                    format!("bad algorithm tag {other}"),
                ))
            }
        })
    }
}

/// Learning hyper-parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlgoSpec {
    pub kind: AlgoKind,
    /// Learning rate.
    pub alpha: f64,
    /// Discount factor; ignored by the average-reward family.
    pub gamma: f64,
    /// Trace parameter.
    pub trace_lambda: f64,
    /// Average-reward step size (R-learning family).
    pub beta: f64,
}

impl Default for AlgoSpec {
    fn default() -> Self {
        AlgoSpec {
            kind: AlgoKind::Sarsa,
            alpha: 0.001,
            gamma: 0.97,
            trace_lambda: 0.96,
            beta: 0.005,
        }
    }
}

impl AlgoSpec {
    /// Per-step trace decay factor.
    pub fn trace_decay(&self) -> f64 {
        if self.kind.is_average_reward() {
            self.trace_lambda
        } else {
            self.gamma * self.trace_lambda
        }
    }
}

/// Shape of the epsilon schedule between its endpoints.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecaySchedule {
    Exponential,
    Linear,
}

/// Exploration schedule: epsilon decays from `epsilon0` to `floor` over
/// `horizon` episodes and stays at the floor afterwards.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExplorationSpec {
    pub epsilon0: f64,
    pub floor: f64,
    pub horizon: u32,
    pub schedule: DecaySchedule,
}

impl Default for ExplorationSpec {
    fn default() -> Self {
        ExplorationSpec {
            epsilon0: 0.7,
            floor: 0.0001,
            horizon: 1000,
            schedule: DecaySchedule::Exponential,
        }
    }
}

/// Epsilon for a given training episode index.
pub fn decay_epsilon(episode: u32, spec: &ExplorationSpec) -> f64 {
    debug_assert!(spec.epsilon0 > 0.0 && spec.floor > 0.0 && spec.floor <= spec.epsilon0);
    if episode == 0 {
        return spec.epsilon0;
    }
    if episode >= spec.horizon {
        return spec.floor;
    }
    let frac = episode as f64 / spec.horizon as f64;
    let eps = match spec.schedule {
        DecaySchedule::Exponential => spec.epsilon0 * (spec.floor / spec.epsilon0).powf(frac),
        DecaySchedule::Linear => spec.epsilon0 + (spec.floor - spec.epsilon0) * frac,
    };
    eps.max(spec.floor)
}

/// Indices attaining the maximum value (exact float comparison).
pub fn greedy_set(values: &[f64]) -> Vec<usize> {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    values
        .iter()
        .enumerate()
        .filter(|(_, &v)| v == max)
        .map(|(i, _)| i)
        .collect()
}

/// Epsilon-greedy selection with uniform random tie-breaking.
pub fn select_action(values: &[f64], epsilon: f64, rng: &mut impl Rng) -> usize {
    if epsilon > 0.0 && rng.gen::<f64>() < epsilon {
        return rng.gen_range(0..values.len());
    }
    let greedy = greedy_set(values);
    if greedy.len() == 1 {
        greedy[0]
    } else {
        greedy[rng.gen_range(0..greedy.len())]
    }
}

/// Epsilon-greedy action probabilities (used by Expected SARSA).
fn policy_probs(values: &[f64], epsilon: f64) -> [f64; ACTION_COUNT] {
    let greedy = greedy_set(values);
    let n = values.len() as f64;
    let mut probs = [epsilon / n; ACTION_COUNT];
    let greedy_mass = (1.0 - epsilon) / greedy.len() as f64;
    for g in greedy {
        probs[g] += greedy_mass;
    }
    probs
}

/// A TD learner: value function(s), algorithm state and its own rng.
#[derive(Debug)]
pub struct Learner {
    spec: AlgoSpec,
    value: ValueFn,
    value2: Option<ValueFn>,
    avg_reward: f64,
    rng: ChaCha8Rng,
    /// Test hook: fixes which table a double-estimator update targets.
    forced_table: Option<usize>,
}

impl Learner {
    pub fn new(spec: AlgoSpec, value: ValueFn, seed: u64) -> Learner {
        let value2 = spec.kind.is_double().then(|| value.clone());
        Learner {
            spec,
            value,
            value2,
            avg_reward: 0.0,
            rng: ChaCha8Rng::seed_from_u64(seed),
            forced_table: None,
        }
    }

    pub fn spec(&self) -> &AlgoSpec {
        &self.spec
    }

    pub fn value_fn(&self) -> &ValueFn {
        &self.value
    }

    pub fn avg_reward(&self) -> f64 {
        self.avg_reward
    }

    /// Deterministic table choice for the double-estimator tests.
    pub fn force_double_table(&mut self, table: Option<usize>) {
        self.forced_table = table;
    }

    pub fn code(&self, state: &StateVector) -> StateTiles {
        self.value.code(state)
    }

    /// Behaviour values: the mean of both tables for double estimators.
    pub fn action_values(&self, tiles: &StateTiles) -> [f64; ACTION_COUNT] {
        let mut values = self.value.action_values(tiles);
        if let Some(v2) = &self.value2 {
            let other = v2.action_values(tiles);
            for (v, o) in values.iter_mut().zip(other) {
                *v = 0.5 * (*v + o);
            }
        }
        values
    }

    /// Epsilon-greedy action at a state.
    pub fn select(&mut self, tiles: &StateTiles, epsilon: f64) -> Action {
        let values = self.action_values(tiles);
        let id = select_action(&values, epsilon, &mut self.rng) as u8;
        Action::new(id).expect("selection stays within the action set")
    }

    /// Apply one transition `(s, a, r, s', a')`; `next` is `None` at the end
    /// of an episode (bootstrap of zero). Returns the TD error.
    ///
    /// `epsilon` is the behaviour exploration rate, needed by Expected
    /// SARSA's target policy.
    pub fn step(
        &mut self,
        s_tiles: &StateTiles,
        action: Action,
        reward: f64,
        next: Option<(&StateTiles, Action)>,
        epsilon: f64,
    ) -> f64 {
        let spec = self.spec;
        let a = action.index();
        match spec.kind {
            AlgoKind::Sarsa => {
                let q_sa = self.value.value(s_tiles, a);
                let target = match next {
                    Some((nt, na)) => reward + spec.gamma * self.value.value(nt, na.index()),
                    None => reward,
                };
                let delta = target - q_sa;
                self.value.update(s_tiles, a, delta, spec.alpha, spec.trace_decay(), false);
                delta
            }
            AlgoKind::ExpectedSarsa => {
                let q_sa = self.value.value(s_tiles, a);
                let target = match next {
                    Some((nt, _)) => {
                        let next_values = self.value.action_values(nt);
                        let probs = policy_probs(&next_values, epsilon);
                        let expectation: f64 =
                            next_values.iter().zip(probs).map(|(q, p)| p * q).sum();
                        reward + spec.gamma * expectation
                    }
                    None => reward,
                };
                let delta = target - q_sa;
                self.value.update(s_tiles, a, delta, spec.alpha, spec.trace_decay(), false);
                delta
            }
            AlgoKind::QLearning => {
                let q_sa = self.value.value(s_tiles, a);
                let (target, cut) = match next {
                    Some((nt, na)) => {
                        let next_values = self.value.action_values(nt);
                        let greedy = greedy_set(&next_values);
                        let cut = !greedy.contains(&na.index());
                        (reward + spec.gamma * next_values[greedy[0]], cut)
                    }
                    None => (reward, true),
                };
                let delta = target - q_sa;
                self.value.update(s_tiles, a, delta, spec.alpha, spec.trace_decay(), cut);
                delta
            }
            AlgoKind::DoubleQ => {
                let (updated_is_first, delta, cut) = {
                    let first = self.pick_table();
                    let (upd, other) = self.tables(first);
                    let q_sa = upd.value(s_tiles, a);
                    let (target, cut) = match next {
                        Some((nt, na)) => {
                            let upd_next = upd.action_values(nt);
                            let greedy = greedy_set(&upd_next);
                            let cut = !greedy.contains(&na.index());
                            (reward + spec.gamma * other.value(nt, greedy[0]), cut)
                        }
                        None => (reward, true),
                    };
                    (first, target - q_sa, cut)
                };
                self.update_table(updated_is_first, s_tiles, a, delta, cut);
                delta
            }
            AlgoKind::RLearning => {
                let q_values = self.value.action_values(s_tiles);
                let q_sa = q_values[a];
                let was_greedy = greedy_set(&q_values).contains(&a);
                let (target, cut) = match next {
                    Some((nt, na)) => {
                        let next_values = self.value.action_values(nt);
                        let greedy = greedy_set(&next_values);
                        let cut = !greedy.contains(&na.index());
                        (reward - self.avg_reward + next_values[greedy[0]], cut)
                    }
                    None => (reward - self.avg_reward, true),
                };
                let delta = target - q_sa;
                self.value.update(s_tiles, a, delta, spec.alpha, spec.trace_decay(), cut);
                if was_greedy {
                    self.avg_reward += spec.beta * delta;
                }
                delta
            }
            AlgoKind::OnPolicyR => {
                let q_sa = self.value.value(s_tiles, a);
                let target = match next {
                    Some((nt, na)) => {
                        reward - self.avg_reward + self.value.value(nt, na.index())
                    }
                    None => reward - self.avg_reward,
                };
                let delta = target - q_sa;
                self.value.update(s_tiles, a, delta, spec.alpha, spec.trace_decay(), false);
                self.avg_reward += spec.beta * delta;
                delta
            }
            AlgoKind::DoubleR => {
                let (updated_is_first, delta, cut, was_greedy) = {
                    let first = self.pick_table();
                    let (upd, other) = self.tables(first);
                    let q_values = upd.action_values(s_tiles);
                    let q_sa = q_values[a];
                    let was_greedy = greedy_set(&q_values).contains(&a);
                    let (target, cut) = match next {
                        Some((nt, na)) => {
                            let upd_next = upd.action_values(nt);
                            let greedy = greedy_set(&upd_next);
                            let cut = !greedy.contains(&na.index());
                            (reward - self.avg_reward + other.value(nt, greedy[0]), cut)
                        }
                        None => (reward - self.avg_reward, true),
                    };
                    (first, target - q_sa, cut, was_greedy)
                };
                self.update_table(updated_is_first, s_tiles, a, delta, cut);
                if was_greedy {
                    self.avg_reward += spec.beta * delta;
                }
                delta
            }
        }
    }

    fn pick_table(&mut self) -> usize {
        match self.forced_table {
            Some(t) => t,
            None => usize::from(self.rng.gen::<bool>()),
        }
    }

    fn tables(&self, first: usize) -> (&ValueFn, &ValueFn) {
        let second = self.value2.as_ref().expect("double variant has two tables");
        if first == 0 {
            (&self.value, second)
        } else {
            (second, &self.value)
        }
    }

    fn update_table(&mut self, first: usize, tiles: &StateTiles, a: usize, delta: f64, cut: bool) {
        let spec = self.spec;
        let table = if first == 0 {
            &mut self.value
        } else {
            self.value2.as_mut().expect("double variant has two tables")
        };
        table.update(tiles, a, delta, spec.alpha, spec.trace_decay(), cut);
    }

    /// Clear traces at an episode boundary.
    pub fn end_episode(&mut self) {
        self.value.reset_traces();
        if let Some(v2) = &mut self.value2 {
            v2.reset_traces();
        }
    }

    /// Digest of every weight table (and the average-reward estimate).
    pub fn checksum(&self) -> u64 {
        let mut h = self.value.checksum();
        if let Some(v2) = &self.value2 {
            h ^= v2.checksum().rotate_left(17);
        }
        h ^ self.avg_reward.to_bits()
    }

    /// Serialize the learner state (a learner checkpoint embeds its value
    /// function blobs).
    pub fn write_to(&self, w: &mut impl Write) -> io::Result<()> {
        w.write_all(b"MSLC")?;
        w.write_all(&1u32.to_le_bytes())?;
        w.write_all(&[self.spec.kind.tag()])?;
        w.write_all(&self.avg_reward.to_le_bytes())?;
        w.write_all(&[if self.value2.is_some() { 2 } else { 1 }])?;
        self.value.write_to(w)?;
        if let Some(v2) = &self.value2 {
            v2.write_to(w)?;
        }
        Ok(())
    }

    /// Restore a learner; `spec` supplies the hyper-parameters (the
    /// checkpoint pins the algorithm kind and weights).
    pub fn read_from(r: &mut impl Read, spec: AlgoSpec, seed: u64) -> io::Result<Learner> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != b"MSLC" {
            return Err(io::Error::new(io::ErrorKind::InvalidData, "bad learner magic"));
        }
        let mut version = [0u8; 4];
        r.read_exact(&mut version)?;
        if u32::from_le_bytes(version) != 1 {
            return Err(io::Error::new(io::ErrorKind::InvalidData, "unsupported learner version"));
        }
        let mut tag = [0u8; 1];
        r.read_exact(&mut tag)?;
        let kind = AlgoKind::from_tag(tag[0])?;
        if kind != spec.kind {
            return Err(io::Error::new(
                io::ErrorKind::InvalidData,
                "checkpoint algorithm does not match the configured algorithm",
            ));
        }
        let mut avg = [0u8; 8];
        r.read_exact(&mut avg)?;
        let mut count = [0u8; 1];
        r.read_exact(&mut count)?;
        let value = ValueFn::read_from(r)?;
        let value2 = if count[0] == 2 { Some(ValueFn::read_from(r)?) } else { None };
        Ok(Learner {
            spec,
            value,
            value2,
            avg_reward: f64::from_le_bytes(avg),
            rng: ChaCha8Rng::seed_from_u64(seed),
            forced_table: None,
        })
    }
}

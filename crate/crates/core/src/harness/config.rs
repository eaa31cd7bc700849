//! Experiment configuration: a flat `key=value` text format whose keys
//! follow the hyper-parameter names used throughout the crate
//! (`gamma=0.97`, `trace_lambda=0.96`, `lctc_weights=0.6,0.1,0.3`, ...).
//! Lines starting with `#` are comments. Unknown keys are errors.

use std::fs;
use std::path::{Path, PathBuf};

use crate::exchange::QueueMode;
use crate::features::{FeatureConfig, StateMode, TrackerConfig};
use crate::feed::synth::FlowParams;
use crate::learn::{AlgoKind, AlgoSpec, DecaySchedule, ExplorationSpec};
use crate::reward::{RewardSpec, RewardVariant};
use crate::strategy::InventoryPolicy;
use crate::types::Decimal;

use super::HarnessError;

/// Where the trading days come from.
#[derive(Debug, Clone, PartialEq)]
pub enum DataSpec {
    /// Event CSV files in a directory, split chronologically by file name.
    Files { dir: PathBuf },
    /// Seeded synthetic days.
    Synthetic { params: FlowParams },
}

/// Full experiment description.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub data: DataSpec,
    pub train_days: usize,
    pub test_days: usize,
    pub episodes: u32,
    pub algo: AlgoSpec,
    pub exploration: ExplorationSpec,
    pub reward: RewardSpec,
    pub state_mode: StateMode,
    pub features: FeatureConfig,
    pub tracker: TrackerConfig,
    pub inventory: InventoryPolicy,
    /// Moving-average window for the spread scale factor, in decisions.
    pub theta_window: usize,
    pub queue_mode: QueueMode,
    /// Rolling window for the training-curve statistics, in episodes.
    pub curve_window: usize,
    /// Scale of the monotone value initialisation that seeds fresh weight
    /// tables (action 0 highest, clearing lowest). Zero leaves tables at
    /// zero; positive values allocate dense tables up front.
    pub init_bias: f64,
    /// Fixed-spread expert class for the meta benchmarks.
    pub experts: Vec<u8>,
    pub mw_learning_rate: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            seed: 0,
            data: DataSpec::Synthetic { params: FlowParams::default() },
            train_days: 120,
            test_days: 40,
            episodes: 1000,
            algo: AlgoSpec::default(),
            exploration: ExplorationSpec::default(),
            reward: RewardSpec::default(),
            state_mode: StateMode::Lctc,
            features: FeatureConfig::default(),
            tracker: TrackerConfig::default(),
            inventory: InventoryPolicy::default(),
            theta_window: 1000,
            queue_mode: QueueMode::Expected,
            curve_window: 20,
            init_bias: 0.0,
            experts: vec![1, 2, 3, 4, 5],
            mw_learning_rate: 0.1,
        }
    }
}

impl ExperimentConfig {
    pub fn from_file(path: impl AsRef<Path>) -> Result<ExperimentConfig, HarnessError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| {
            HarnessError::Config(format!("cannot read {}: {e}", path.display()))
        })?;
        Self::from_str_cfg(&text)
    }

    pub fn from_str_cfg(text: &str) -> Result<ExperimentConfig, HarnessError> {
        let mut cfg = ExperimentConfig::default();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                HarnessError::Config(format!("line {}: expected key=value, got {line:?}", idx + 1))
            })?;
            cfg.set(key.trim(), value.trim())
                .map_err(|e| HarnessError::Config(format!("line {}: {e}", idx + 1)))?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Apply one key/value override.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        let norm = key.to_ascii_lowercase().replace(['-', ' '], "_");
        fn synth<'a>(data: &'a mut DataSpec, key: &str) -> Result<&'a mut FlowParams, String> {
            match data {
                DataSpec::Synthetic { params } => Ok(params),
                DataSpec::Files { .. } => {
                    Err(format!("{key} applies to synthetic data, but data_dir is set"))
                }
            }
        }
        match norm.as_str() {
            "seed" => self.seed = parse(value)?,
            "data_dir" => self.data = DataSpec::Files { dir: PathBuf::from(value) },
            "training_sample_size" | "train_days" => self.train_days = parse(value)?,
            "testing_sample_size" | "test_days" => self.test_days = parse(value)?,
            "training_episodes" | "episodes" => self.episodes = parse(value)?,
            "algo" | "algorithm" => self.algo.kind = parse_algo(value)?,
            "learning_rate" | "alpha" => self.algo.alpha = parse(value)?,
            "step_size" | "beta" => self.algo.beta = parse(value)?,
            "discount_factor" | "gamma" => self.algo.gamma = parse(value)?,
            "trace_parameter" | "trace_lambda" | "lambda" => self.algo.trace_lambda = parse(value)?,
            "exploration_rate" | "epsilon" => self.exploration.epsilon0 = parse(value)?,
            "epsilon_floor" => self.exploration.floor = parse(value)?,
            "epsilon_t" => self.exploration.horizon = parse(value)?,
            "epsilon_schedule" => {
                self.exploration.schedule = match value.to_ascii_lowercase().as_str() {
                    "exponential" | "exp" => DecaySchedule::Exponential,
                    "linear" => DecaySchedule::Linear,
                    other => return Err(format!("unknown epsilon schedule {other:?}")),
                }
            }
            "reward" | "reward_function" => self.reward.variant = parse_reward(value)?,
            "eta" | "damping" => self.reward.eta = parse(value)?,
            "state_mode" | "state" => {
                self.state_mode = match value.to_ascii_lowercase().as_str() {
                    "agent" | "agent_state" | "agent-state" => StateMode::AgentState,
                    "full" | "full_state" | "full-state" => StateMode::FullState,
                    "lctc" => StateMode::Lctc,
                    other => return Err(format!("unknown state mode {other:?}")),
                }
            }
            "memory_size" => self.features.table_size = parse(value)?,
            "number_of_tilings" | "num_tilings" | "tilings" | "m" => {
                self.features.num_tilings = parse(value)?
            }
            "tiles_per_dim" => self.features.tiles_per_dim = parse(value)?,
            "hash_seed" => self.features.hash_seed = parse(value)?,
            "lctc_weights" => {
                let parts: Vec<&str> = value.split(',').map(str::trim).collect();
                if parts.len() != 3 {
                    return Err("lctc_weights needs three comma-separated values".into());
                }
                for (slot, part) in self.features.lctc_weights.iter_mut().zip(parts) {
                    *slot = parse(part)?;
                }
            }
            "order_size" | "omega" => self.inventory.order_size = parse(value)?,
            "min_inventory" => self.inventory.min_inventory = parse(value)?,
            "max_inventory" => self.inventory.max_inventory = parse(value)?,
            "clear_fraction" | "clear_alpha" => self.inventory.clear_fraction = parse(value)?,
            "lot" => {
                self.inventory.lot = parse(value)?;
                if let DataSpec::Synthetic { params } = &mut self.data {
                    params.lot = self.inventory.lot;
                }
            }
            "theta_window" | "spread_window" => self.theta_window = parse(value)?,
            "queue_mode" => {
                self.queue_mode = match value.to_ascii_lowercase().as_str() {
                    "expected" => QueueMode::Expected,
                    "sampled" => QueueMode::Sampled { seed: self.seed },
                    other => return Err(format!("unknown queue mode {other:?}")),
                }
            }
            "indicator_window" | "lookback_window" => self.tracker.window = parse(value)?,
            "rsi_period" => self.tracker.rsi_period = parse(value)?,
            "imbalance_levels" => self.tracker.imbalance_levels = parse(value)?,
            "curve_window" => self.curve_window = parse(value)?,
            "init_bias" => self.init_bias = parse(value)?,
            "experts" => {
                self.experts = value
                    .split(',')
                    .map(|s| parse::<u8>(s.trim()))
                    .collect::<Result<_, _>>()?;
            }
            "mw_learning_rate" => self.mw_learning_rate = parse(value)?,
            // Synthetic flow parameters.
            "events_per_day" | "events" => synth(&mut self.data, &norm)?.events = parse(value)?,
            "limit_rate" => synth(&mut self.data, &norm)?.limit_rate = parse(value)?,
            "market_rate" => synth(&mut self.data, &norm)?.market_rate = parse(value)?,
            "cancel_rate" => synth(&mut self.data, &norm)?.cancel_rate = parse(value)?,
            "drift" => synth(&mut self.data, &norm)?.drift = parse(value)?,
            "hidden_refill" => synth(&mut self.data, &norm)?.hidden_refill = parse(value)?,
            "reversion" => synth(&mut self.data, &norm)?.reversion = parse(value)?,
            "wave_amplitude" => synth(&mut self.data, &norm)?.wave_amplitude = parse(value)?,
            "wave_period" => synth(&mut self.data, &norm)?.wave_period = parse(value)?,
            "jump_rate" => synth(&mut self.data, &norm)?.jump_rate = parse(value)?,
            "jump_ticks" => synth(&mut self.data, &norm)?.jump_ticks = parse(value)?,
            "absorption_flip" => synth(&mut self.data, &norm)?.absorption_flip = parse(value)?,
            "level_volume" => synth(&mut self.data, &norm)?.level_volume = parse(value)?,
            "mean_dt_ms" => synth(&mut self.data, &norm)?.mean_dt_ms = parse(value)?,
            "symbol" => synth(&mut self.data, &norm)?.symbol = value.to_string(),
            "tick" => {
                let tick = Decimal::parse(value).map_err(|e| e.to_string())?;
                synth(&mut self.data, &norm)?.tick = tick;
            }
            "start_price" => {
                let params = synth(&mut self.data, &norm)?;
                let inst = crate::types::Instrument::new("cfg", params.tick, params.lot.max(1))
                    .map_err(|e| e.to_string())?;
                params.start_price = inst.ticks_from_str(value).map_err(|e| e.to_string())?;
            }
            other => return Err(format!("unknown config key {other:?}")),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let fail = |msg: String| Err(HarnessError::Config(msg));
        let inv = &self.inventory;
        if inv.lot <= 0 || inv.order_size <= 0 || inv.order_size % inv.lot != 0 {
            return fail(format!(
                "order_size {} must be a positive multiple of lot {}",
                inv.order_size, inv.lot
            ));
        }
        if inv.min_inventory >= inv.max_inventory {
            return fail("min_inventory must be below max_inventory".into());
        }
        if !(inv.clear_fraction > 0.0 && inv.clear_fraction <= 1.0) {
            return fail("clear_fraction must lie in (0, 1]".into());
        }
        if self.train_days == 0 || self.test_days == 0 {
            return fail("train_days and test_days must be positive".into());
        }
        if self.algo.alpha <= 0.0 || self.algo.beta <= 0.0 {
            return fail("alpha and beta must be positive".into());
        }
        if !(0.0..=1.0).contains(&self.algo.gamma) || !(0.0..=1.0).contains(&self.algo.trace_lambda)
        {
            return fail("gamma and trace_lambda must lie in [0, 1]".into());
        }
        if self.reward.eta < 0.0 {
            return fail("eta must be non-negative".into());
        }
        let e = &self.exploration;
        if !(e.floor > 0.0 && e.floor <= e.epsilon0 && e.epsilon0 <= 1.0) {
            return fail("epsilon endpoints must satisfy 0 < floor <= epsilon0 <= 1".into());
        }
        let lsum: f64 = self.features.lctc_weights.iter().sum();
        if self.state_mode == StateMode::Lctc && (lsum - 1.0).abs() > 1e-9 {
            return fail(format!("lctc_weights must sum to one, got {lsum}"));
        }
        if self.experts.is_empty() || self.experts.iter().any(|t| !(1..=5).contains(t)) {
            return fail("experts must be a non-empty list of values in 1..=5".into());
        }
        if self.theta_window == 0 || self.curve_window == 0 {
            return fail("theta_window and curve_window must be positive".into());
        }
        if self.init_bias < 0.0 {
            return fail("init_bias must be non-negative".into());
        }
        Ok(())
    }
}

fn parse<T: std::str::FromStr>(value: &str) -> Result<T, String>
where
    T::Err: std::fmt::Display,
{
    value.parse::<T>().map_err(|e| format!("cannot parse {value:?}: {e}"))
}

fn parse_algo(value: &str) -> Result<AlgoKind, String> {
    let norm = value.to_ascii_lowercase().replace(['-', ' ', '('], "_").replace(')', "");
    Ok(match norm.as_str() {
        "q_learning" | "ql" | "q" => AlgoKind::QLearning,
        "sarsa" => AlgoKind::Sarsa,
        "expected_sarsa" => AlgoKind::ExpectedSarsa,
        "double_q_learning" | "double_q" | "dql" => AlgoKind::DoubleQ,
        "r_learning" | "rl" | "r" => AlgoKind::RLearning,
        "on_policy_r_learning" | "on_policy_r" => AlgoKind::OnPolicyR,
        "double_r_learning" | "double_r" => AlgoKind::DoubleR,
        other => return Err(format!("unknown algorithm {other:?}")),
    })
}

fn parse_reward(value: &str) -> Result<RewardVariant, String> {
    let norm = value.to_ascii_lowercase().replace('.', "").replace(['-', ' '], "_");
    Ok(match norm.as_str() {
        "pnl" => RewardVariant::Pnl,
        "symmetric" | "symmetric_damped" | "symm_damp" | "symm" => RewardVariant::SymmetricDamped,
        "asymmetric" | "asymmetric_damped" | "asymm_damp" | "asymm" => {
            RewardVariant::AsymmetricDamped
        }
        other => return Err(format!("unknown reward variant {other:?}")),
    })
}

//! Experiment orchestration: dataset handling, the per-event episode loop,
//! daily metrics, and the train / eval / bench / sweep drivers.
//!
//! The decision cadence is one action revision per market event. Each
//! event updates the book and queues, collects any fills, computes the
//! step reward from executions relative to the mid plus the inventory
//! mark-to-market, builds the state vector, lets the agent act, and
//! reconciles the agent's resting orders against the plan (cancel-replace
//! only when the target price changes, so unchanged quotes keep their
//! queue position). At the end of a day the remaining fills settle at the
//! closing mid.

pub mod config;
pub mod output;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::bench::{FixedSpreadPolicy, MetaLearner, MetaMode, RandomPolicy};
use crate::exchange::{ExchangeError, ExchangeState};
use crate::features::{
    compute_state, AgentObservation, MarketTracker, StateTiles, StateVector, ValueFn,
};
use crate::feed::synth::generate_synthetic_day;
use crate::feed::{EventKind, FeedError, TradingDay};
use crate::learn::{decay_epsilon, greedy_set, Learner};
use crate::lob::LobError;
use crate::reward::{psi, reward, RewardSpec, StepFills};
use crate::strategy::{constrain, Action, InventoryPolicy, OrderPlan, SpreadScale};
use crate::types::{Aggressor, HalfTicks, Instrument, Side, Ticks, Units};

pub use config::{DataSpec, ExperimentConfig};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Feed(#[from] FeedError),
    #[error(transparent)]
    Exchange(#[from] ExchangeError),
    #[error(transparent)]
    Book(#[from] LobError),
    #[error("day {0} produced no two-sided decisions")]
    DegenerateDay(String),
    #[error("average spread must be positive, got {0}")]
    DegenerateSpread(f64),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

/// The train/test day split, chronologically ordered.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub train: Vec<TradingDay>,
    pub test: Vec<TradingDay>,
}

impl Dataset {
    pub fn instrument(&self) -> &Instrument {
        &self.train.first().or_else(|| self.test.first()).expect("dataset is non-empty").instrument
    }
}

/// Derive an independent stream seed; plain SplitMix64 mixing.
pub fn derive_seed(seed: u64, salt: u64) -> u64 {
    let mut z = seed ^ salt.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Materialise the configured dataset. Synthetic days are generated from
/// seeds derived per day index; file datasets are split by sorted file
/// name, with the test days strictly after the training days.
pub fn load_dataset(cfg: &ExperimentConfig) -> Result<Dataset, HarnessError> {
    let total = cfg.train_days + cfg.test_days;
    let mut days = Vec::with_capacity(total);
    match &cfg.data {
        DataSpec::Synthetic { params } => {
            for i in 0..total {
                let day_seed = derive_seed(cfg.seed, 0xda7a_0000 + i as u64);
                let mut day = generate_synthetic_day(day_seed, params)?;
                day.date = format!("syn-{i:04}");
                days.push(day);
            }
        }
        DataSpec::Files { dir } => {
            let mut paths: Vec<_> = std::fs::read_dir(dir)?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.extension().map_or(false, |x| x == "csv"))
                .collect();
            paths.sort();
            if paths.len() < total {
                return Err(HarnessError::Config(format!(
                    "{} day files in {}, need {total}",
                    paths.len(),
                    dir.display()
                )));
            }
            for path in paths.into_iter().take(total) {
                days.push(crate::feed::load_day(path)?);
            }
        }
    }
    let test = days.split_off(cfg.train_days);
    Ok(Dataset { train: days, test })
}

/// Metrics of one simulated day.
#[derive(Debug, Clone, PartialEq)]
pub struct DailyResult {
    pub date: String,
    /// Exact PnL in unit * half-ticks.
    pub pnl_ht: i64,
    /// PnL in currency.
    pub pnl: f64,
    /// Mean market spread over the day's decisions, in currency.
    pub avg_spread: f64,
    /// PnL divided by the average spread.
    pub nd_pnl: f64,
    /// Mean absolute position over the day's decisions.
    pub map: f64,
    /// Number of fill events.
    pub fills: u64,
    pub final_inventory: Units,
}

/// Daily profit divided by the average market spread: the number of
/// spreads the strategy captured.
pub fn nd_pnl(pnl: f64, avg_spread: f64) -> Result<f64, HarnessError> {
    if avg_spread <= 0.0 {
        return Err(HarnessError::DegenerateSpread(avg_spread));
    }
    Ok(pnl / avg_spread)
}

/// Mean absolute position over an inventory path.
pub fn mean_absolute_position(path: &[Units]) -> f64 {
    if path.is_empty() {
        return 0.0;
    }
    path.iter().map(|y| y.abs() as f64).sum::<f64>() / path.len() as f64
}

/// Dispersion summary over a batch of daily results: mean and population
/// standard deviation for the normalised PnL, mean and mean absolute
/// deviation for the position size.
#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub days: usize,
    pub nd_pnl_mean: f64,
    pub nd_pnl_std: f64,
    pub map_mean: f64,
    pub map_mad: f64,
}

pub fn aggregate(results: &[DailyResult]) -> Summary {
    assert!(!results.is_empty(), "aggregate needs at least one day");
    let n = results.len() as f64;
    let nd_mean = results.iter().map(|r| r.nd_pnl).sum::<f64>() / n;
    let nd_var =
        results.iter().map(|r| (r.nd_pnl - nd_mean).powi(2)).sum::<f64>() / n;
    let map_mean = results.iter().map(|r| r.map).sum::<f64>() / n;
    let map_mad = results.iter().map(|r| (r.map - map_mean).abs()).sum::<f64>() / n;
    Summary {
        days: results.len(),
        nd_pnl_mean: nd_mean,
        nd_pnl_std: nd_var.sqrt(),
        map_mean,
        map_mad,
    }
}

/// Fill record retained by an episode trace: signed direction, price and
/// volume ( positive volume bought, negative sold).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TraceFill {
    pub price: Ticks,
    pub signed_volume: Units,
}

/// Optional per-episode detail for oracle checks.
#[derive(Debug, Clone, Default)]
pub struct EpisodeTrace {
    pub fills: Vec<TraceFill>,
    pub last_mid_ht: i64,
    pub inventory_path: Vec<Units>,
    /// Sum of the execution terms over all steps, unit * half-ticks.
    pub psi_total_ht: i64,
    /// Sum of the inventory mark-to-market terms, unit * half-ticks.
    pub inventory_pnl_ht: i64,
}

/// Outcome of one simulated day.
#[derive(Debug, Clone)]
pub struct EpisodeOutcome {
    pub result: DailyResult,
    /// Sum of the per-step rewards under the configured reward function.
    pub episode_reward: f64,
    pub trace: Option<EpisodeTrace>,
}

/// Anything that can trade through the episode loop.
pub trait MarketAgent {
    fn begin_day(&mut self) {}
    /// Observe the reward earned since the previous decision and choose the
    /// next action given the new state.
    fn decide(&mut self, reward: f64, state: &StateVector, inventory: Units) -> Action;
    /// Settle the final partial step of the day.
    fn end_day(&mut self, _final_reward: f64) {}
}

/// The TD learner as an episode agent.
pub struct RlAgent<'a> {
    learner: &'a mut Learner,
    epsilon: f64,
    train: bool,
    prev: Option<(StateTiles, Action)>,
}

impl<'a> RlAgent<'a> {
    pub fn train(learner: &'a mut Learner, epsilon: f64) -> Self {
        RlAgent { learner, epsilon, train: true, prev: None }
    }

    /// Frozen weights, greedy actions, no rng draws: evaluation mutates
    /// nothing and is idempotent.
    pub fn eval(learner: &'a mut Learner) -> Self {
        RlAgent { learner, epsilon: 0.0, train: false, prev: None }
    }
}

impl MarketAgent for RlAgent<'_> {
    fn begin_day(&mut self) {
        self.prev = None;
    }

    fn decide(&mut self, reward: f64, state: &StateVector, _inventory: Units) -> Action {
        let tiles = self.learner.code(state);
        let action = if self.train {
            let action = self.learner.select(&tiles, self.epsilon);
            if let Some((prev_tiles, prev_action)) = self.prev.take() {
                self.learner.step(
                    &prev_tiles,
                    prev_action,
                    reward,
                    Some((&tiles, action)),
                    self.epsilon,
                );
            }
            action
        } else {
            let values = self.learner.action_values(&tiles);
            let id = greedy_set(&values)[0] as u8;
            Action::new(id).expect("greedy id in range")
        };
        self.prev = Some((tiles, action));
        action
    }

    fn end_day(&mut self, final_reward: f64) {
        if let Some((prev_tiles, prev_action)) = self.prev.take() {
            if self.train {
                self.learner.step(&prev_tiles, prev_action, final_reward, None, self.epsilon);
            }
        }
        if self.train {
            self.learner.end_episode();
        }
    }
}

/// Fixed symmetric quoting with forced clearing at the bounds.
pub struct FixedAgent {
    policy: FixedSpreadPolicy,
    inventory_policy: InventoryPolicy,
}

impl FixedAgent {
    pub fn new(theta: u8, inventory_policy: InventoryPolicy) -> Self {
        FixedAgent { policy: FixedSpreadPolicy::new(theta), inventory_policy }
    }
}

impl MarketAgent for FixedAgent {
    fn decide(&mut self, _r: f64, _s: &StateVector, inventory: Units) -> Action {
        self.policy.act(
            inventory,
            self.inventory_policy.min_inventory,
            self.inventory_policy.max_inventory,
        )
    }
}

/// Uniform random action selection with forced clearing at the bounds.
pub struct RandomAgent {
    policy: RandomPolicy,
    inventory_policy: InventoryPolicy,
}

impl RandomAgent {
    pub fn new(seed: u64, inventory_policy: InventoryPolicy) -> Self {
        RandomAgent { policy: RandomPolicy::new(seed), inventory_policy }
    }
}

impl MarketAgent for RandomAgent {
    fn decide(&mut self, _r: f64, _s: &StateVector, inventory: Units) -> Action {
        self.policy.act(
            inventory,
            self.inventory_policy.min_inventory,
            self.inventory_policy.max_inventory,
        )
    }
}

/// Static parameters of the episode loop, shared by every driver.
#[derive(Debug, Clone)]
pub struct RunParams {
    pub inventory: InventoryPolicy,
    pub tracker: crate::features::TrackerConfig,
    pub reward: RewardSpec,
    pub theta_window: usize,
    pub queue_mode: crate::exchange::QueueMode,
}

impl RunParams {
    pub fn from_config(cfg: &ExperimentConfig) -> RunParams {
        RunParams {
            inventory: cfg.inventory,
            tracker: cfg.tracker,
            reward: cfg.reward,
            theta_window: cfg.theta_window,
            queue_mode: cfg.queue_mode,
        }
    }
}

/// Simulate one trading day with the given agent.
pub fn run_episode(
    params: &RunParams,
    day: &TradingDay,
    agent: &mut dyn MarketAgent,
    record_trace: bool,
) -> Result<EpisodeOutcome, HarnessError> {
    let mut exchange = ExchangeState::new(day.instrument.lot, params.queue_mode);
    let mut tracker = MarketTracker::new(params.tracker);
    let mut spread_scale = SpreadScale::new(params.theta_window);
    let mut trace = record_trace.then(EpisodeTrace::default);

    let mut inventory: Units = 0;
    // Inventory carried into the current step: the position that was
    // actually exposed to this step's mid move. Using it in the
    // mark-to-market term keeps the summed step PnL exactly equal to a
    // cash-ledger valuation at decision mids.
    let mut carried_inventory: Units = 0;
    let mut step_fills = StepFills::default();
    let mut last_mid: Option<HalfTicks> = None;
    let mut pnl_ht: i64 = 0;
    let mut episode_reward = 0.0;
    let mut map_sum = 0.0;
    let mut spread_sum_ticks: i64 = 0;
    let mut decisions: usize = 0;
    let mut fill_count: u64 = 0;

    agent.begin_day();
    for event in &day.events {
        exchange.apply_event(event)?;
        match &event.kind {
            EventKind::Trade { aggressor, volume, .. } => {
                let signed = match aggressor {
                    Aggressor::Buy => *volume,
                    Aggressor::Sell => -*volume,
                };
                tracker.on_event_volume(signed);
            }
            EventKind::DepthUpdate { .. } => tracker.on_event_volume(0),
        }
        collect_fills(&mut exchange, &mut inventory, &mut step_fills, &mut fill_count, &mut trace);

        if !exchange.book().has_both_sides() {
            continue;
        }
        let mid = exchange.book().mid_price()?;
        let spread = exchange.book().market_spread()?;
        tracker.on_mid(mid.0);
        spread_scale.push_spread_ticks(spread);
        let theta = spread_scale.theta();

        let mid_move_ht = last_mid.map_or(0, |prev| mid.0 - prev.0);
        let (psi_a, psi_b) = psi(&step_fills, mid);
        let inventory_pnl = carried_inventory * mid_move_ht;
        pnl_ht += psi_a + psi_b + inventory_pnl;
        let r = reward(&params.reward, (psi_a + psi_b) as f64, inventory_pnl as f64);
        episode_reward += r;

        map_sum += inventory.abs() as f64;
        spread_sum_ticks += spread;
        decisions += 1;
        if let Some(t) = trace.as_mut() {
            t.inventory_path.push(inventory);
            t.psi_total_ht += psi_a + psi_b;
            t.inventory_pnl_ht += inventory_pnl;
        }

        let observation = AgentObservation {
            inventory,
            max_inventory: params.inventory.max_inventory,
            ask_distance_ht: exchange
                .order(Side::Ask)
                .map(|o| o.price.as_half_ticks().0 - mid.0),
            bid_distance_ht: exchange
                .order(Side::Bid)
                .map(|o| mid.0 - o.price.as_half_ticks().0),
            spread_scale_ticks: theta.0,
        };
        let state = compute_state(&tracker, exchange.book(), &observation, &params.tracker);
        let action = agent.decide(r, &state, inventory);
        apply_action(&mut exchange, action, mid, theta, inventory, &params.inventory)?;

        step_fills = StepFills::default();
        last_mid = Some(mid);
        carried_inventory = inventory;
    }

    // Day end: settle remaining fills at the closing mid; inventory is
    // marked there through the last step's mark-to-market term.
    let final_reward = match last_mid {
        Some(mid) => {
            collect_fills(
                &mut exchange,
                &mut inventory,
                &mut step_fills,
                &mut fill_count,
                &mut trace,
            );
            let (psi_a, psi_b) = psi(&step_fills, mid);
            pnl_ht += psi_a + psi_b;
            let r = reward(&params.reward, (psi_a + psi_b) as f64, 0.0);
            episode_reward += r;
            if let Some(t) = trace.as_mut() {
                t.psi_total_ht += psi_a + psi_b;
            }
            r
        }
        None => 0.0,
    };
    agent.end_day(final_reward);

    if decisions == 0 {
        return Err(HarnessError::DegenerateDay(day.date.clone()));
    }
    let inst = &day.instrument;
    let pnl = inst.pnl_to_currency(pnl_ht);
    let avg_spread =
        spread_sum_ticks as f64 / decisions as f64 * inst.tick_value();
    let result = DailyResult {
        date: day.date.clone(),
        pnl_ht,
        pnl,
        avg_spread,
        nd_pnl: nd_pnl(pnl, avg_spread)?,
        map: map_sum / decisions as f64,
        fills: fill_count,
        final_inventory: inventory,
    };
    if let Some(t) = trace.as_mut() {
        t.last_mid_ht = last_mid.map_or(0, |m| m.0);
    }
    Ok(EpisodeOutcome { result, episode_reward, trace })
}

fn collect_fills(
    exchange: &mut ExchangeState,
    inventory: &mut Units,
    step_fills: &mut StepFills,
    fill_count: &mut u64,
    trace: &mut Option<EpisodeTrace>,
) {
    for fill in exchange.drain_fills() {
        let signed = match fill.side {
            Side::Bid => fill.volume,
            Side::Ask => -fill.volume,
        };
        *inventory += signed;
        step_fills.record(fill.side, fill.price, fill.volume);
        *fill_count += 1;
        if let Some(t) = trace.as_mut() {
            t.fills.push(TraceFill { price: fill.price, signed_volume: signed });
        }
    }
}

/// Reconcile the agent's resting orders with the plan for this step.
fn apply_action(
    exchange: &mut ExchangeState,
    action: Action,
    mid: HalfTicks,
    theta: Ticks,
    inventory: Units,
    policy: &InventoryPolicy,
) -> Result<(), HarnessError> {
    let plan: OrderPlan = constrain(action, mid, theta, inventory, policy);

    if let Some(volume) = plan.market {
        for side in [Side::Bid, Side::Ask] {
            if let Some(id) = exchange.order(side).map(|o| o.id) {
                exchange.cancel(id).expect("live order id is valid");
            }
        }
        exchange.execute_market_order(volume);
        return Ok(());
    }

    for (side, desired) in [(Side::Ask, plan.ask), (Side::Bid, plan.bid)] {
        let live = exchange.order(side).map(|o| (o.id, o.price));
        match (desired, live) {
            (None, Some((id, _))) => exchange.cancel(id).expect("live order id is valid"),
            (Some((price, _)), Some((_, live_price))) if live_price == price => {
                // Unchanged price keeps its queue position; a partially
                // filled order keeps its remaining volume.
            }
            (Some((price, volume)), Some((id, _))) => {
                exchange.cancel(id).expect("live order id is valid");
                exchange.place_limit(side, price, volume)?;
            }
            (Some((price, volume)), None) => {
                exchange.place_limit(side, price, volume)?;
            }
            (None, None) => {}
        }
    }
    Ok(())
}

/// Per-episode training statistics.
#[derive(Debug, Clone)]
pub struct EpisodeStat {
    pub episode: u32,
    pub day: String,
    pub epsilon: f64,
    pub reward: f64,
    pub nd_pnl: f64,
    pub map: f64,
}

/// A finished training run.
pub struct TrainRun {
    pub learner: Learner,
    pub episodes: Vec<EpisodeStat>,
}

/// Train a learner: episodes sample training days uniformly with
/// replacement, epsilon decays per episode.
pub fn train(cfg: &ExperimentConfig, dataset: &Dataset) -> Result<TrainRun, HarnessError> {
    let mut value = ValueFn::new(cfg.state_mode, &cfg.features);
    if cfg.init_bias > 0.0 {
        let biases: Vec<f64> = (0..crate::strategy::ACTION_COUNT)
            .map(|a| cfg.init_bias * (crate::strategy::ACTION_COUNT - 1 - a) as f64 / 9.0)
            .collect();
        value.init_action_bias(&biases);
    }
    let learner = Learner::new(cfg.algo, value, derive_seed(cfg.seed, 0x1ea8));
    train_from(cfg, dataset, learner)
}

/// Continue training an existing learner (checkpoint resume).
pub fn train_from(
    cfg: &ExperimentConfig,
    dataset: &Dataset,
    mut learner: Learner,
) -> Result<TrainRun, HarnessError> {
    let params = RunParams::from_config(cfg);
    let mut day_rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, 0xdaee));
    let mut episodes = Vec::with_capacity(cfg.episodes as usize);
    for episode in 0..cfg.episodes {
        let epsilon = decay_epsilon(episode, &cfg.exploration);
        let day = &dataset.train[day_rng.gen_range(0..dataset.train.len())];
        let outcome = {
            let mut agent = RlAgent::train(&mut learner, epsilon);
            run_episode(&params, day, &mut agent, false)?
        };
        episodes.push(EpisodeStat {
            episode,
            day: outcome.result.date.clone(),
            epsilon,
            reward: outcome.episode_reward,
            nd_pnl: outcome.result.nd_pnl,
            map: outcome.result.map,
        });
    }
    Ok(TrainRun { learner, episodes })
}

/// Evaluate a learner on a set of days with frozen weights.
pub fn evaluate(
    cfg: &ExperimentConfig,
    days: &[TradingDay],
    learner: &mut Learner,
) -> Result<Vec<DailyResult>, HarnessError> {
    let params = RunParams::from_config(cfg);
    let mut results = Vec::with_capacity(days.len());
    for day in days {
        let mut agent = RlAgent::eval(learner);
        results.push(run_episode(&params, day, &mut agent, false)?.result);
    }
    Ok(results)
}

/// Benchmark strategy selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BenchStrategy {
    Fixed(u8),
    Random,
    /// Multiplicative-weights meta strategy over the expert class.
    Mmmw,
    /// Follow-the-leader meta strategy over the expert class.
    Ftl,
}

impl std::fmt::Display for BenchStrategy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            BenchStrategy::Fixed(theta) => write!(f, "fixed-{theta}"),
            BenchStrategy::Random => write!(f, "random"),
            BenchStrategy::Mmmw => write!(f, "mmmw"),
            BenchStrategy::Ftl => write!(f, "ftl"),
        }
    }
}

/// Run one benchmark strategy over the test days.
pub fn run_benchmark(
    cfg: &ExperimentConfig,
    dataset: &Dataset,
    strategy: BenchStrategy,
) -> Result<Vec<DailyResult>, HarnessError> {
    let params = RunParams::from_config(cfg);
    match strategy {
        BenchStrategy::Fixed(theta) => {
            let mut agent = FixedAgent::new(theta, cfg.inventory);
            dataset
                .test
                .iter()
                .map(|day| Ok(run_episode(&params, day, &mut agent, false)?.result))
                .collect()
        }
        BenchStrategy::Random => {
            let mut agent = RandomAgent::new(derive_seed(cfg.seed, 0xbe9c), cfg.inventory);
            dataset
                .test
                .iter()
                .map(|day| Ok(run_episode(&params, day, &mut agent, false)?.result))
                .collect()
        }
        BenchStrategy::Mmmw => run_meta(
            cfg,
            dataset,
            MetaMode::MultiplicativeWeights { learning_rate: cfg.mw_learning_rate },
        ),
        BenchStrategy::Ftl => run_meta(cfg, dataset, MetaMode::FollowTheLeader),
    }
}

/// Meta strategy over fixed-spread experts, one period per day. Expert
/// payoffs are computed counterfactually by running all experts on the
/// same day (simulated orders cannot impact the market, so the runs are
/// independent).
fn run_meta(
    cfg: &ExperimentConfig,
    dataset: &Dataset,
    mode: MetaMode,
) -> Result<Vec<DailyResult>, HarnessError> {
    let params = RunParams::from_config(cfg);
    let mut meta = MetaLearner::new(mode, cfg.experts.clone(), derive_seed(cfg.seed, 0x3e7a));
    let mut results = Vec::with_capacity(dataset.test.len());
    for day in &dataset.test {
        let per_expert: Vec<DailyResult> = cfg
            .experts
            .iter()
            .map(|&theta| {
                let mut agent = FixedAgent::new(theta, cfg.inventory);
                Ok(run_episode(&params, day, &mut agent, false)?.result)
            })
            .collect::<Result<_, HarnessError>>()?;
        results.push(per_expert[meta.current_expert()].clone());
        let payoffs: Vec<f64> = per_expert.iter().map(|r| r.pnl).collect();
        meta.meta_step(&payoffs);
    }
    Ok(results)
}

/// One point of a damping-factor sweep.
#[derive(Debug)]
pub struct SweepPoint {
    pub eta: f64,
    pub episodes: Vec<EpisodeStat>,
    pub eval: Vec<DailyResult>,
    pub summary: Summary,
}

/// Train and evaluate one configuration per damping factor, in parallel.
pub fn eta_sweep(cfg: &ExperimentConfig, etas: &[f64]) -> Result<Vec<SweepPoint>, HarnessError> {
    let points: Vec<Result<SweepPoint, HarnessError>> = etas
        .par_iter()
        .map(|&eta| {
            let mut point_cfg = cfg.clone();
            point_cfg.reward.eta = eta;
            let dataset = load_dataset(&point_cfg)?;
            let mut run = train(&point_cfg, &dataset)?;
            let eval = evaluate(&point_cfg, &dataset.test, &mut run.learner)?;
            let summary = aggregate(&eval);
            Ok(SweepPoint { eta, episodes: run.episodes, eval, summary })
        })
        .collect();
    points.into_iter().collect()
}

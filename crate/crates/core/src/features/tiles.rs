//! Hashed tile coding over a bounded continuous space, with per-action
//! weight tables and replacing eligibility traces.
//!
//! Each of the `num_tilings` grids is displaced by `tiling_index / M` of a
//! tile width per dimension, with the usual odd-multiplier asymmetry
//! (1, 3, 5, ...) so the offsets differ across dimensions. Tile coordinates
//! hash into a fixed table; collisions are permitted and deterministic.
//! Weight tables are allocated per action on first write, so policies that
//! never learn cost no memory.

use std::collections::HashMap;

/// Boundaries and resolution of one input dimension.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DimSpec {
    pub low: f64,
    pub high: f64,
    pub tiles: u32,
}

impl DimSpec {
    pub fn new(low: f64, high: f64, tiles: u32) -> DimSpec {
        assert!(high > low && tiles > 0, "invalid dimension spec");
        DimSpec { low, high, tiles }
    }
}

/// Trace entries below this magnitude are dropped.
const TRACE_CUTOFF: f64 = 1e-8;

/// SplitMix64-style mixing; deterministic across platforms and runs.
fn mix(state: u64, value: u64) -> u64 {
    let mut z = state ^ value.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// One hashed tile coding with its weights and traces.
#[derive(Debug, Clone)]
pub struct TileCoding {
    dims: Vec<DimSpec>,
    num_tilings: u32,
    table_size: u32,
    hash_seed: u64,
    weights: Vec<Option<Box<[f64]>>>,
    traces: HashMap<(u8, u32), f64>,
}

impl TileCoding {
    pub fn new(
        dims: Vec<DimSpec>,
        num_tilings: u32,
        table_size: u32,
        hash_seed: u64,
        num_actions: usize,
    ) -> TileCoding {
        assert!(num_tilings > 0 && table_size > 0 && !dims.is_empty());
        assert!(num_actions <= u8::MAX as usize + 1);
        TileCoding {
            dims,
            num_tilings,
            table_size,
            hash_seed,
            weights: (0..num_actions).map(|_| None).collect(),
            traces: HashMap::new(),
        }
    }

    pub fn dims(&self) -> &[DimSpec] {
        &self.dims
    }

    pub fn num_tilings(&self) -> u32 {
        self.num_tilings
    }

    pub fn table_size(&self) -> u32 {
        self.table_size
    }

    pub fn hash_seed(&self) -> u64 {
        self.hash_seed
    }

    pub fn num_actions(&self) -> usize {
        self.weights.len()
    }

    /// Integer tile coordinates per tiling, before hashing. Exposed for
    /// inspection and tests; `active_tiles` is the hashed production path.
    pub fn coordinates(&self, x: &[f64]) -> Vec<Vec<u32>> {
        assert_eq!(x.len(), self.dims.len(), "input dimensionality mismatch");
        let m = self.num_tilings as u64;
        // Quantised position in units of 1/M of a tile, clamped into range.
        let q: Vec<u64> = x
            .iter()
            .zip(&self.dims)
            .map(|(&v, d)| {
                let unit = (v - d.low) / (d.high - d.low) * d.tiles as f64;
                let q = (unit * m as f64).floor() as i64;
                q.clamp(0, (d.tiles as i64) * m as i64 - 1) as u64
            })
            .collect();
        (0..m)
            .map(|tiling| {
                q.iter()
                    .enumerate()
                    .map(|(d, &qd)| ((qd + tiling * (2 * d as u64 + 1)) / m) as u32)
                    .collect()
            })
            .collect()
    }

    /// Hashed indices of the active tiles: exactly one per tiling.
    pub fn active_tiles(&self, x: &[f64]) -> Vec<u32> {
        let coords = self.coordinates(x);
        let indices: Vec<u32> = coords
            .iter()
            .enumerate()
            .map(|(tiling, cs)| {
                let mut h = mix(self.hash_seed, tiling as u64 + 1);
                for &c in cs {
                    h = mix(h, c as u64 + 1);
                }
                (h % self.table_size as u64) as u32
            })
            .collect();
        assert_eq!(indices.len(), self.num_tilings as usize);
        indices
    }

    pub fn weight(&self, action: usize, index: u32) -> f64 {
        self.weights[action].as_ref().map_or(0.0, |t| t[index as usize])
    }

    /// Linear value of the active tiles for one action. Indices repeated by
    /// hash collision contribute once per occurrence.
    pub fn value(&self, active: &[u32], action: usize) -> f64 {
        match &self.weights[action] {
            Some(table) => active.iter().map(|&i| table[i as usize]).sum(),
            None => 0.0,
        }
    }

    /// One trace-based gradient step.
    ///
    /// Traces decay by `decay` (gamma * lambda), the active tiles' traces
    /// are replaced with 1, and every weight moves by
    /// `alpha * delta * trace`. When `cut_after` is set (off-policy trace
    /// cutting on a non-greedy successor action) all traces are cleared
    /// after the weight update.
    pub fn update(
        &mut self,
        active: &[u32],
        action: usize,
        delta: f64,
        alpha: f64,
        decay: f64,
        cut_after: bool,
    ) {
        self.traces.retain(|_, e| {
            *e *= decay;
            e.abs() >= TRACE_CUTOFF
        });
        for &idx in active {
            self.traces.insert((action as u8, idx), 1.0);
        }
        let step = alpha * delta;
        if step != 0.0 {
            let size = self.table_size as usize;
            for (&(a, idx), &e) in self.traces.iter() {
                let table = self.weights[a as usize]
                    .get_or_insert_with(|| vec![0.0; size].into_boxed_slice());
                table[idx as usize] += step * e;
            }
        }
        if cut_after {
            self.traces.clear();
        }
    }

    pub fn reset_traces(&mut self) {
        self.traces.clear();
    }

    pub fn trace_len(&self) -> usize {
        self.traces.len()
    }

    /// Raw table access for serialization; `None` means never written.
    pub fn raw_table(&self, action: usize) -> Option<&[f64]> {
        self.weights[action].as_deref()
    }

    pub fn set_raw_table(&mut self, action: usize, table: Option<Box<[f64]>>) {
        if let Some(t) = &table {
            assert_eq!(t.len(), self.table_size as usize);
        }
        self.weights[action] = table;
    }
}

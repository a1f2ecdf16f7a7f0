//! Random per-eNB cell loads, resampled at every handover decision.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::topology::EnbId;

pub const DEFAULT_CAPACITY: u32 = 500;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case", deny_unknown_fields)]
pub enum LoadModel {
    /// `M ~ U{0..=capacity}` active connections per eNB, load `M / capacity`.
    Uniform { capacity: u32 },
    /// Every eNB carries the same load.
    Fixed { cl: f64 },
}

impl Default for LoadModel {
    fn default() -> Self {
        LoadModel::Uniform {
            capacity: DEFAULT_CAPACITY,
        }
    }
}

impl LoadModel {
    pub fn validate(&self) -> Result<(), String> {
        match *self {
            LoadModel::Uniform { capacity: 0 } => Err("load capacity must be at least 1".into()),
            LoadModel::Fixed { cl } if !(0.0..=1.0).contains(&cl) => {
                Err(format!("fixed load must lie in [0, 1], got {cl}"))
            }
            _ => Ok(()),
        }
    }
}

/// Load of every eNB at one decision epoch, indexed by id.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadState {
    loads: Vec<f64>,
}

impl LoadState {
    pub fn cl(&self, id: EnbId) -> f64 {
        self.loads[id.index()]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.loads
    }
}

/// Loads for `n_enbs` eNBs. Each `(seed, epoch)` pair selects its own
/// ChaCha stream, so a snapshot never depends on how many were drawn before.
pub fn sample_loads(model: &LoadModel, n_enbs: usize, seed: u64, epoch: u64) -> LoadState {
    let loads = match *model {
        LoadModel::Fixed { cl } => vec![cl; n_enbs],
        LoadModel::Uniform { capacity } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(epoch);
            (0..n_enbs)
                .map(|_| rng.gen_range(0..=capacity) as f64 / capacity as f64)
                .collect()
        }
    };
    LoadState { loads }
}

use nalgebra::DMatrix;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::types::{MvnParams, ObservationSet};
use crate::error::{Error, Result};

/// Stream id reserved for the root stream; substreams use every other id.
const ROOT_STREAM: u64 = u64::MAX;

/// Counter-based random stream.
///
/// Backed by ChaCha8 keyed by the seed; `substream(i)` selects ChaCha stream
/// `i` under the same key, so it depends only on `(seed, i)` and never on how
/// much of any other stream has been consumed.
#[derive(Debug, Clone)]
pub struct RandomStream {
    seed: u64,
    rng: ChaCha8Rng,
}

impl RandomStream {
    pub fn new(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(ROOT_STREAM);
        Self { seed, rng }
    }

    /// Independent stream number `index`; `index` must be below `u64::MAX`.
    pub fn substream(&self, index: u64) -> Self {
        assert!(index != ROOT_STREAM, "substream index {index} is reserved");
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(index);
        Self { seed: self.seed, rng }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn standard_normal(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }

    pub fn fill_standard_normal(&mut self, out: &mut [f64]) {
        for v in out {
            *v = self.rng.sample(StandardNormal);
        }
    }
}

impl RngCore for RandomStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}

/// Draws `count` rows `μ + U z` with `z` standard normal.
pub fn sample_mvn(params: &MvnParams, count: usize, stream: &mut RandomStream) -> Result<ObservationSet> {
    if count == 0 {
        return Err(Error::InvalidInput("sample count must be at least 1".into()));
    }
    let d = params.dim();
    let mut data = DMatrix::<f64>::zeros(count, d);
    let mut z = vec![0.0; d];
    let u = params.u();
    for r in 0..count {
        stream.fill_standard_normal(&mut z);
        for i in 0..d {
            let mut s = params.mu()[i];
            for k in i..d {
                s += u[(i, k)] * z[k];
            }
            data[(r, i)] = s;
        }
    }
    ObservationSet::new(data)
}

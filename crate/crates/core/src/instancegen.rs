//! Seeded random instances.
//!
//! Every tensor is drawn from its own ChaCha20 stream (`seed_from_u64(seed)`
//! followed by `set_stream(id)`), and uniforms are `(x >> 11) · 2⁻⁵³` for the
//! raw 64-bit outputs `x`. Given the seed and [`RNG_ALGORITHM`] the instances
//! can be regenerated bit for bit on any platform.
//!
//! Projection queries follow the usual random protocol: `b ~ U(0,1)^S`,
//! `p̄ = u/Σu` with `u ~ U(0,1)^S`, and `β` uniform strictly between
//! `min b + 10⁻⁸` and `p̄ᵀb − 10⁻⁸`.

use rand_chacha::ChaCha20Rng;
use rand_core::{RngCore, SeedableRng};

use crate::error::{Error, Result};
use crate::model::{dot, DivergenceKind, InstanceData, MdpInstance, ProjectionQuery};

/// Identifier recorded next to every seed.
pub const RNG_ALGORITHM: &str = "chacha20-stream-v1";
/// Discount used when none is given.
pub const DEFAULT_DISCOUNT: f64 = 0.95;
/// Accuracy attached to generated projection queries.
pub const DEFAULT_ACCURACY: f64 = 1e-6;
/// Margin kept between β and the ends of its admissible interval.
pub const THRESHOLD_MARGIN: f64 = 1e-8;

const STREAM_COST: u64 = 1;
const STREAM_NOMINAL: u64 = 2;
const STREAM_THRESHOLD: u64 = 3;
const STREAM_REWARD: u64 = 4;
const STREAM_BUDGET: u64 = 5;

struct Uniform(ChaCha20Rng);

impl Uniform {
    fn new(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Uniform(rng)
    }

    /// U[0, 1) with 53 random bits.
    fn next(&mut self) -> f64 {
        (self.0.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    fn vec(&mut self, n: usize) -> Vec<f64> {
        (0..n).map(|_| self.next()).collect()
    }

    fn simplex(&mut self, n: usize) -> Vec<f64> {
        loop {
            let u = self.vec(n);
            let total: f64 = u.iter().sum();
            if total > 0.0 {
                return u.into_iter().map(|x| x / total).collect();
            }
        }
    }
}

/// splitmix64 finalizer; derives independent per-trial seeds.
pub fn mix_seed(seed: u64, a: u64, b: u64) -> u64 {
    let mut z = seed
        .wrapping_add(a.wrapping_mul(0x9E37_79B9_7F4A_7C15))
        .wrapping_add(b.wrapping_mul(0xD1B5_4A32_D192_ED03));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// A random projection query whose threshold never hits the trivial or
/// infeasible branch.
pub fn random_projection_instance(states: usize, seed: u64) -> Result<ProjectionQuery> {
    if states < 2 {
        return Err(Error::InvalidArgument(format!("random projection needs S >= 2, got {states}")));
    }
    let mut costs = Uniform::new(seed, STREAM_COST);
    let mut weights = Uniform::new(seed, STREAM_NOMINAL);
    let mut thresholds = Uniform::new(seed, STREAM_THRESHOLD);
    loop {
        let cost = costs.vec(states);
        let nominal = weights.simplex(states);
        let lo = cost.iter().copied().fold(f64::INFINITY, f64::min) + THRESHOLD_MARGIN;
        let hi = dot(&nominal, &cost) - THRESHOLD_MARGIN;
        if lo < hi {
            let threshold = lo + thresholds.next() * (hi - lo);
            return ProjectionQuery::new(nominal, cost, threshold, DEFAULT_ACCURACY);
        }
    }
}

/// A random RMDP: nominal rows drawn like projection nominals, rewards
/// `U(0,1)` and budget `κ ~ U(0,1)`.
pub fn random_rmdp(states: usize, actions: usize, seed: u64, discount: f64, kind: DivergenceKind) -> Result<MdpInstance> {
    if states < 2 || actions < 1 {
        return Err(Error::InvalidArgument(format!(
            "random RMDP needs S >= 2 and A >= 1, got S = {states}, A = {actions}"
        )));
    }
    let rows = states * actions;
    let mut weights = Uniform::new(seed, STREAM_NOMINAL);
    let nominal: Vec<f64> = (0..rows).flat_map(|_| weights.simplex(states)).collect();
    let rewards = Uniform::new(seed, STREAM_REWARD).vec(rows * states);
    let kappa = Uniform::new(seed, STREAM_BUDGET).next();
    MdpInstance::new(InstanceData {
        states,
        actions,
        discount,
        kappa,
        divergence: kind,
        rewards,
        nominal,
        initial_dist: None,
    })
}

/// One state's Bellman update with cost vectors drawn directly, as in the
/// timing protocol: `b_a ~ U(0,1)^S`, random nominal rows, `κ ~ U(0,1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BellmanStateQuery {
    pub nominal: Vec<Vec<f64>>,
    pub cost: Vec<Vec<f64>>,
    pub kappa: f64,
}

pub fn random_bellman_state(states: usize, actions: usize, seed: u64) -> Result<BellmanStateQuery> {
    if states < 2 || actions < 1 {
        return Err(Error::InvalidArgument(format!(
            "random Bellman state needs S >= 2 and A >= 1, got S = {states}, A = {actions}"
        )));
    }
    let mut weights = Uniform::new(seed, STREAM_NOMINAL);
    let mut costs = Uniform::new(seed, STREAM_COST);
    Ok(BellmanStateQuery {
        nominal: (0..actions).map(|_| weights.simplex(states)).collect(),
        cost: (0..actions).map(|_| costs.vec(states)).collect(),
        kappa: Uniform::new(seed, STREAM_BUDGET).next(),
    })
}

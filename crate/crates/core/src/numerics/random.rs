use super::NumericsError;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// A reproducible random sub-stream identified by `(master_seed, stream_id)`.
///
/// Backed by ChaCha8 with the stream id in the cipher's stream word, so distinct ids
/// give independent sequences from the same key.
#[derive(Debug, Clone)]
pub struct RandomStream {
    master_seed: u64,
    stream_id: u64,
    rng: ChaCha8Rng,
}

impl RandomStream {
    pub fn new(master_seed: u64, stream_id: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
        rng.set_stream(stream_id);
        Self { master_seed, stream_id, rng }
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// Uniform on [0, 1).
    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    pub fn standard_normal(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }
}

/// SplitMix64-style mixing of a seed with a list of words.
pub fn derive_seed(master_seed: u64, parts: &[u64]) -> u64 {
    fn mix(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }
    parts.iter().fold(mix(master_seed), |acc, &p| mix(acc ^ mix(p)))
}

/// Lognormal turbulence fading with `ln u ~ N(-σ²/2, σ²)`, so `E[u] = 1`.
pub fn sample_lognormal_fading(sigma_sq: f64, stream: &mut RandomStream) -> Result<f64, NumericsError> {
    if !(sigma_sq > 0.0) || !sigma_sq.is_finite() {
        return Err(NumericsError::Domain { what: "log-irradiance variance", value: sigma_sq });
    }
    let z = stream.standard_normal();
    Ok((-0.5 * sigma_sq + sigma_sq.sqrt() * z).exp())
}

/// Radial beam displacement with Rayleigh density `(v/σ²)·exp(-v²/2σ²)`, by inverse CDF.
pub fn sample_radial_misalignment(sigma_r: f64, stream: &mut RandomStream) -> Result<f64, NumericsError> {
    if !(sigma_r > 0.0) || !sigma_r.is_finite() {
        return Err(NumericsError::Domain { what: "radial displacement deviation", value: sigma_r });
    }
    let u = stream.uniform();
    Ok(sigma_r * (-2.0 * (1.0 - u).ln()).sqrt())
}

//! Experiment configuration: where the event comes from, the decomposition
//! parameters, the seed and the caps.

use std::path::PathBuf;

use ghz_core::bowtie::{BowTieError, DEFAULT_BOWTIE_CAP};
use ghz_core::decomposition::DecompError;
use ghz_core::f2::F2Error;
use ghz_core::fourier::FourierError;
use ghz_core::games::GameError;
use ghz_core::rat::{rat, Rational};
use ghz_core::BitWord;
use num::{Signed, Zero};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LabError {
    #[error("invalid configuration: {0}")]
    BadConfig(String),
    #[error("event has zero probability on the query support")]
    ZeroAlpha,
    #[error("bad event file: {0}")]
    BadEventFile(String),
    #[error(transparent)]
    F2(#[from] F2Error),
    #[error(transparent)]
    Fourier(#[from] FourierError),
    #[error(transparent)]
    Game(#[from] GameError),
    #[error(transparent)]
    Decomp(#[from] DecompError),
    #[error(transparent)]
    BowTie(#[from] BowTieError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// Where the product event E = E1 x E2 x E3 comes from.
#[derive(Clone, Debug)]
pub enum EventSource {
    /// Each point of each factor kept independently with probability p.
    Density(f64),
    /// E_i = {x : gamma_i . x = 0}, one dual vector per factor.
    Affine([BitWord; 3]),
    /// Explicit member lists from a JSON file.
    File(PathBuf),
}

/// One experiment run. The seed fully determines all randomized behavior.
#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub n: usize,
    pub source: EventSource,
    pub delta: Rational,
    /// Runs whose exact event probability falls below this floor are
    /// flagged in the report.
    pub alpha_floor: Rational,
    pub seed: u64,
    pub cap_bowties: u128,
    /// Number of part draws from the conditioned partition weights.
    pub sample_parts: usize,
    /// Number of bow-tie draws per analyzed part.
    pub sample_bowties: usize,
}

impl ExperimentConfig {
    pub fn new(n: usize) -> ExperimentConfig {
        ExperimentConfig {
            n,
            source: EventSource::Density(1.0),
            delta: rat(3, 10),
            alpha_floor: Rational::zero(),
            seed: 0,
            cap_bowties: DEFAULT_BOWTIE_CAP,
            sample_parts: 8,
            sample_bowties: 64,
        }
    }

    pub fn validate(&self) -> Result<(), LabError> {
        if self.n == 0 {
            return Err(LabError::BadConfig("n must be positive".into()));
        }
        if !self.delta.is_positive() {
            return Err(LabError::BadConfig("delta must be positive".into()));
        }
        if self.cap_bowties == 0 || self.sample_parts == 0 || self.sample_bowties == 0 {
            return Err(LabError::BadConfig("caps must be positive".into()));
        }
        if let EventSource::Density(p) = self.source {
            if !(p > 0.0 && p <= 1.0) {
                return Err(LabError::BadConfig("density must lie in (0, 1]".into()));
            }
        }
        if let EventSource::Affine(gammas) = &self.source {
            if gammas.iter().any(|g| g.n() != self.n) {
                return Err(LabError::BadConfig("affine gammas must have dimension n".into()));
            }
        }
        Ok(())
    }
}

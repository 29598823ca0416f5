use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tunable constants of the detector. Angles are in radians.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlgorithmParams {
    /// Point/line consistency threshold.
    pub theta_con: f64,
    /// Segments closer than this to the zenith direction count as vertical.
    pub theta_ver: f64,
    /// Segments closer than this to a horizon candidate are ignored.
    pub theta_hor: f64,
    /// Minimum separation between selected horizontal VPs.
    pub theta_dist: f64,
    /// Number of horizon candidates.
    pub samples: usize,
    /// Segments sampled per candidate to seed VPs.
    pub subset: usize,
    /// Offset squashing scale as a fraction of image height.
    pub kappa_over_height: f64,
    pub em_iters: usize,
    pub ransac_budget: usize,
    /// Draws used to fit Gaussians to categorical priors.
    pub fit_samples: usize,
}

impl Default for AlgorithmParams {
    fn default() -> Self {
        Self {
            theta_con: 2f64.to_radians(),
            theta_ver: 10f64.to_radians(),
            theta_hor: 1.5f64.to_radians(),
            theta_dist: 33f64.to_radians(),
            samples: 300,
            subset: 20,
            kappa_over_height: 0.2,
            em_iters: 3,
            ransac_budget: 500,
            fit_samples: 5000,
        }
    }
}

impl AlgorithmParams {
    pub fn validate(&self) -> Result<()> {
        let angles = [self.theta_con, self.theta_ver, self.theta_hor, self.theta_dist];
        if angles.iter().any(|a| !(*a > 0.0) || !a.is_finite()) {
            return Err(Error::InvalidArgument("angles must be positive".into()));
        }
        if self.samples == 0 || self.subset == 0 {
            return Err(Error::InvalidArgument("samples and subset must be >= 1".into()));
        }
        if !(self.kappa_over_height > 0.0) || self.fit_samples < 2 {
            return Err(Error::InvalidArgument("bad kappa or fit sample count".into()));
        }
        Ok(())
    }

    pub fn kappa(&self, height: f64) -> f64 {
        self.kappa_over_height * height
    }
}

//! Horizon line parameterization and priors over it.
//!
//! A horizon is stored as a slope `alpha` folded into `[-pi/2, pi/2)` and a
//! *signed* offset along the image-space normal `(-sin alpha, cos alpha)`
//! (pointing down the image for a level horizon). Priors arrive as
//! categorical distributions over `alpha` and the squashed offset
//! `w = atan(o / kappa)` and are approximated by Gaussians for sampling.

use std::f64::consts::{FRAC_PI_2, PI};
use std::path::Path;

use nalgebra::Vector3;
use rand::distr::{weighted::WeightedIndex, Distribution};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Normal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fsio::write_atomic;
use crate::geom::{CameraFrame, ImageLine, SphereLine};

/// Bin count used by the prior file format.
pub const PRIOR_BINS: usize = 500;
pub const DEFAULT_FIT_SAMPLES: usize = 5000;
pub const DEFAULT_KAPPA_OVER_HEIGHT: f64 = 0.2;

pub fn squash(offset: f64, kappa: f64) -> Result<f64> {
    if !(offset >= 0.0) || !(kappa > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "squash needs offset >= 0 and kappa > 0, got {offset}, {kappa}"
        )));
    }
    Ok((offset / kappa).atan())
}

pub fn unsquash(w: f64, kappa: f64) -> Result<f64> {
    if !(0.0..FRAC_PI_2).contains(&w) || !(kappa > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "unsquash needs w in [0, pi/2) and kappa > 0, got {w}, {kappa}"
        )));
    }
    Ok(kappa * w.tan())
}

/// Horizon line as (slope, signed offset in pixels).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HorizonParam {
    pub alpha: f64,
    pub offset: f64,
}

impl HorizonParam {
    /// Folds any `(alpha, offset)` into the canonical range; each half turn
    /// of `alpha` flips the offset sign.
    pub fn new(alpha: f64, offset: f64) -> Self {
        if (-FRAC_PI_2..FRAC_PI_2).contains(&alpha) {
            return Self { alpha, offset };
        }
        let mut a = (alpha + PI).rem_euclid(2.0 * PI) - PI;
        let mut o = offset;
        if a >= FRAC_PI_2 {
            a -= PI;
            o = -o;
        } else if a < -FRAC_PI_2 {
            a += PI;
            o = -o;
        }
        Self { alpha: a, offset: o }
    }

    /// Squashed offset, signed like the offset.
    pub fn w(&self, kappa: f64) -> f64 {
        (self.offset / kappa).atan()
    }

    /// Image-space normal `(-sin alpha, cos alpha)`.
    pub fn normal(&self) -> (f64, f64) {
        (-self.alpha.sin(), self.alpha.cos())
    }

    pub fn to_image_line(&self, frame: &CameraFrame) -> ImageLine {
        let (nx, ny) = self.normal();
        let (cu, cv) = frame.principal_point;
        ImageLine::new(nx, ny, -nx * cu - ny * cv - self.offset)
    }

    pub fn to_sphere_line(&self, frame: &CameraFrame) -> SphereLine {
        let (nx, ny) = self.normal();
        SphereLine::new(Vector3::new(nx, ny, -frame.rho * self.offset))
            .expect("normal has unit length")
            .canonical()
    }

    /// Recovers the parameters of a line that does not pass through the
    /// pole of the sphere.
    pub fn from_sphere_line(frame: &CameraFrame, l: &SphereLine) -> Result<Self> {
        let v = l.coords();
        let planar = (v.x * v.x + v.y * v.y).sqrt();
        if planar < 1e-12 {
            return Err(Error::DegenerateGeometry(
                "line at infinity has no horizon parameters".into(),
            ));
        }
        let (nx, ny) = (v.x / planar, v.y / planar);
        let offset = -v.z / (frame.rho * planar);
        Ok(Self::new((-nx).atan2(ny), offset))
    }
}

fn default_kappa_over_height() -> f64 {
    DEFAULT_KAPPA_OVER_HEIGHT
}

/// Categorical distributions over slope and squashed offset, as written
/// by an external context model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CategoricalPrior {
    pub alpha_bins: Vec<f64>,
    pub w_bins: Vec<f64>,
    pub alpha_domain: [f64; 2],
    /// `[0, pi/2)` for unsigned offsets (side encoded in alpha) or a signed
    /// domain inside `[-pi/2, pi/2)`.
    pub w_domain: [f64; 2],
    #[serde(default = "default_kappa_over_height")]
    pub kappa_over_height: f64,
}

fn check_bins(name: &str, bins: &[f64]) -> Result<()> {
    if bins.is_empty() {
        return Err(Error::InvalidArgument(format!("{name} is empty")));
    }
    if bins.iter().any(|&p| !(p >= 0.0) || !p.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "{name} has negative or non-finite probabilities"
        )));
    }
    let sum: f64 = bins.iter().sum();
    if (sum - 1.0).abs() > 1e-6 {
        return Err(Error::InvalidArgument(format!("{name} sums to {sum}, not 1")));
    }
    Ok(())
}

impl CategoricalPrior {
    pub fn validate(&self) -> Result<()> {
        check_bins("alpha_bins", &self.alpha_bins)?;
        check_bins("w_bins", &self.w_bins)?;
        let [alo, ahi] = self.alpha_domain;
        let [wlo, whi] = self.w_domain;
        if !(alo < ahi) || !(wlo < whi) {
            return Err(Error::InvalidArgument("empty bin domain".into()));
        }
        if wlo < -FRAC_PI_2 - 1e-12 || whi > FRAC_PI_2 + 1e-12 {
            return Err(Error::InvalidArgument(format!(
                "w_domain [{wlo}, {whi}] exceeds [-pi/2, pi/2]"
            )));
        }
        if !(self.kappa_over_height > 0.0) {
            return Err(Error::InvalidArgument("kappa_over_height must be positive".into()));
        }
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let prior: Self = serde_json::from_str(&text).map_err(|e| Error::json(path, e))?;
        prior.validate()?;
        Ok(prior)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let text = serde_json::to_string(self).map_err(|e| Error::json(path, e))?;
        write_atomic(path, text)
    }

    pub fn kappa(&self, height: f64) -> f64 {
        self.kappa_over_height * height
    }

    pub fn alpha_bin_width(&self) -> f64 {
        (self.alpha_domain[1] - self.alpha_domain[0]) / self.alpha_bins.len() as f64
    }

    pub fn w_bin_width(&self) -> f64 {
        (self.w_domain[1] - self.w_domain[0]) / self.w_bins.len() as f64
    }

    pub fn alpha_bin_edges(&self, k: usize) -> (f64, f64) {
        let lo = self.alpha_domain[0] + k as f64 * self.alpha_bin_width();
        (lo, lo + self.alpha_bin_width())
    }

    pub fn w_bin_edges(&self, k: usize) -> (f64, f64) {
        let lo = self.w_domain[0] + k as f64 * self.w_bin_width();
        (lo, lo + self.w_bin_width())
    }

    /// Pixel offset interval covered by w-bin `k`.
    pub fn offset_bin_edges(&self, k: usize, kappa: f64) -> (f64, f64) {
        let (lo, hi) = self.w_bin_edges(k);
        (kappa * lo.tan(), kappa * hi.tan())
    }

    /// Discretizes independent Gaussians over slope and signed offset into
    /// the signed-offset layout (`alpha` in `[-pi/2, pi/2)`, `w` in
    /// `[-pi/2, pi/2)`).
    pub fn from_gaussians(
        alpha_mean: f64,
        alpha_std: f64,
        offset_mean: f64,
        offset_std: f64,
        height: f64,
        bins: usize,
    ) -> Result<Self> {
        if !(alpha_std > 0.0 && offset_std > 0.0 && height > 0.0) || bins == 0 {
            return Err(Error::InvalidArgument("non-positive spread or size".into()));
        }
        let kappa = DEFAULT_KAPPA_OVER_HEIGHT * height;
        let alpha_n = statrs::distribution::Normal::new(alpha_mean, alpha_std)
            .map_err(|e| Error::InvalidArgument(e.to_string()))?;
        let offset_n = statrs::distribution::Normal::new(offset_mean, offset_std)
            .map_err(|e| Error::InvalidArgument(e.to_string()))?;
        use statrs::distribution::ContinuousCDF;
        let discretize = |domain: [f64; 2], cdf: &dyn Fn(f64) -> f64| {
            let width = (domain[1] - domain[0]) / bins as f64;
            let mut p: Vec<f64> = (0..bins)
                .map(|k| {
                    let lo = domain[0] + k as f64 * width;
                    (cdf(lo + width) - cdf(lo)).max(0.0)
                })
                .collect();
            let total: f64 = p.iter().sum();
            p.iter_mut().for_each(|x| *x /= total);
            p
        };
        let alpha_bins = discretize([-FRAC_PI_2, FRAC_PI_2], &|a| alpha_n.cdf(a));
        let w_bins = discretize([-FRAC_PI_2, FRAC_PI_2], &|w| {
            if w <= -FRAC_PI_2 {
                0.0
            } else if w >= FRAC_PI_2 {
                1.0
            } else {
                offset_n.cdf(kappa * w.tan())
            }
        });
        let prior = Self {
            alpha_bins,
            w_bins,
            alpha_domain: [-FRAC_PI_2, FRAC_PI_2],
            w_domain: [-FRAC_PI_2, FRAC_PI_2],
            kappa_over_height: DEFAULT_KAPPA_OVER_HEIGHT,
        };
        prior.validate()?;
        Ok(prior)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OffsetPrior {
    Gaussian { mean: f64, std: f64 },
    Uniform { lo: f64, hi: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PriorSource {
    FileBacked,
    NoContext,
}

/// Continuous prior over horizon lines.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HorizonPrior {
    pub alpha_mean: f64,
    /// Zero for the no-context prior (slope fixed).
    pub alpha_std: f64,
    pub offset: OffsetPrior,
    pub source: PriorSource,
    /// Set when a spread was raised to its one-bin floor.
    pub std_floored: bool,
    /// Mode of the originating categorical, when there was one.
    pub mode: Option<HorizonParam>,
}

impl HorizonPrior {
    pub fn gaussian(alpha_mean: f64, alpha_std: f64, offset_mean: f64, offset_std: f64) -> Result<Self> {
        if !(alpha_std > 0.0 && offset_std > 0.0) {
            return Err(Error::InvalidArgument("prior spreads must be positive".into()));
        }
        let p = HorizonParam::new(alpha_mean, offset_mean);
        Ok(Self {
            alpha_mean: p.alpha,
            alpha_std,
            offset: OffsetPrior::Gaussian {
                mean: p.offset,
                std: offset_std,
            },
            source: PriorSource::FileBacked,
            std_floored: false,
            mode: None,
        })
    }

    pub fn sample_offset<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self.offset {
            OffsetPrior::Gaussian { mean, std } => {
                Normal::new(mean, std).expect("std > 0").sample(rng)
            }
            OffsetPrior::Uniform { lo, hi } => rng.random_range(lo..hi),
        }
    }
}

/// No camera roll, offsets uniform over `[-2H, 2H]`.
pub fn no_context_prior(frame: &CameraFrame) -> HorizonPrior {
    HorizonPrior {
        alpha_mean: 0.0,
        alpha_std: 0.0,
        offset: OffsetPrior::Uniform {
            lo: -2.0 * frame.height,
            hi: 2.0 * frame.height,
        },
        source: PriorSource::NoContext,
        std_floored: false,
        mode: None,
    }
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

fn argmax(xs: impl Iterator<Item = f64>) -> usize {
    let mut best = (0, f64::NEG_INFINITY);
    for (i, x) in xs.enumerate() {
        if x > best.1 {
            best = (i, x);
        }
    }
    best.0
}

/// Mode of the categorical: slope from the heaviest alpha bin, offset from
/// the w-bin with the highest density per pixel of offset.
pub fn categorical_mode(cat: &CategoricalPrior, height: f64) -> HorizonParam {
    let kappa = cat.kappa(height);
    let ka = argmax(cat.alpha_bins.iter().copied());
    let (alo, ahi) = cat.alpha_bin_edges(ka);
    let kw = argmax(cat.w_bins.iter().enumerate().map(|(k, &p)| {
        let (lo, hi) = cat.offset_bin_edges(k, kappa);
        if hi > lo && hi.is_finite() && lo.is_finite() {
            p / (hi - lo)
        } else {
            0.0
        }
    }));
    let (wlo, whi) = cat.w_bin_edges(kw);
    HorizonParam::new(0.5 * (alo + ahi), kappa * (0.5 * (wlo + whi)).tan())
}

/// Moment-matched Gaussian prior from `n_samples` draws of the categorical.
///
/// Each draw picks a bin and a uniform position inside it. Offsets are
/// moment-matched in pixels after unsquashing, and every `(alpha, o)` draw
/// is folded to the signed convention before the moments are taken.
pub fn fit_gaussian(
    cat: &CategoricalPrior,
    height: f64,
    n_samples: usize,
    seed: u64,
) -> Result<HorizonPrior> {
    cat.validate()?;
    if n_samples < 2 {
        return Err(Error::InvalidArgument("fit_gaussian needs at least 2 samples".into()));
    }
    let kappa = cat.kappa(height);
    let alpha_idx = WeightedIndex::new(&cat.alpha_bins)
        .map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let w_idx =
        WeightedIndex::new(&cat.w_bins).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut alphas = Vec::with_capacity(n_samples);
    let mut offsets = Vec::with_capacity(n_samples);
    for _ in 0..n_samples {
        let (alo, ahi) = cat.alpha_bin_edges(alpha_idx.sample(&mut rng));
        let (wlo, whi) = cat.w_bin_edges(w_idx.sample(&mut rng));
        let a = rng.random_range(alo..ahi);
        let w = rng.random_range(wlo..whi).clamp(-FRAC_PI_2 + 1e-9, FRAC_PI_2 - 1e-9);
        let p = HorizonParam::new(a, kappa * w.tan());
        alphas.push(p.alpha);
        offsets.push(p.offset);
    }
    let (alpha_mean, mut alpha_std) = mean_std(&alphas);
    let (o_mean, mut o_std) = mean_std(&offsets);

    let mode = categorical_mode(cat, height);
    let mut floored = false;
    let alpha_floor = cat.alpha_bin_width();
    if alpha_std < alpha_floor {
        alpha_std = alpha_floor;
        floored = true;
    }
    let modal_w = argmax(cat.w_bins.iter().copied());
    let (olo, ohi) = cat.offset_bin_edges(modal_w, kappa);
    let o_floor = (ohi - olo).abs();
    if o_std < o_floor {
        o_std = o_floor;
        floored = true;
    }
    Ok(HorizonPrior {
        alpha_mean,
        alpha_std,
        offset: OffsetPrior::Gaussian {
            mean: o_mean,
            std: o_std,
        },
        source: PriorSource::FileBacked,
        std_floored: floored,
        mode: Some(mode),
    })
}

/// Most likely horizon under a context prior.
pub fn map_estimate(prior: &HorizonPrior) -> Result<HorizonParam> {
    match (prior.source, prior.offset) {
        (PriorSource::NoContext, _) | (_, OffsetPrior::Uniform { .. }) => Err(
            Error::UnsupportedMode("the no-context prior has no MAP horizon".into()),
        ),
        (PriorSource::FileBacked, OffsetPrior::Gaussian { mean, .. }) => Ok(prior
            .mode
            .unwrap_or_else(|| HorizonParam::new(prior.alpha_mean, mean))),
    }
}

/// Slope used to initialize the zenith direction.
pub fn map_alpha(prior: &HorizonPrior) -> f64 {
    prior.mode.map(|m| m.alpha).unwrap_or(prior.alpha_mean)
}

//! Private release of a mean planar shape, and synthetic landmark corpora.

use std::f64::consts::TAU;
use std::str::FromStr;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use geodp::kendall::{CVector, Kendall, Preshape};
use geodp::mechanisms::calibration::PrivacyParams;
use geodp::mechanisms::mcmc::ChainDiagnostics;
use geodp::mechanisms::sample_kng;
use geodp::mechanisms::shape::{pointwise_laplace, smooth_landmarks, CurveTopology};
use geodp::{frechet_mean, ChainConfig, Dataset, GeodesicBall, Manifold, Mechanism};

use crate::bench::{mechanism_stream, ResultRow, Utility, BENCH_SOLVER};
use crate::error::{HarnessError, Result};
use crate::par::{map_jobs, Execution};
use crate::seeds::derive;

/// Smallest ball radius used when every shape coincides.
const MIN_RADIUS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Template {
    Ellipse,
    Blob,
}

impl FromStr for Template {
    type Err = HarnessError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ellipse" => Ok(Template::Ellipse),
            "blob" => Ok(Template::Blob),
            _ => Err(HarnessError::Config(format!("unknown template '{s}' (ellipse, blob)"))),
        }
    }
}

/// `k` points of a closed template curve at equally spaced angles.
pub fn template_curve(t: Template, k: usize) -> CVector {
    CVector::from_fn(k, |j, _| {
        let phi = TAU * j as f64 / k as f64;
        match t {
            Template::Ellipse => Complex64::new(phi.cos(), 0.5 * phi.sin()),
            Template::Blob => {
                let r = 1.0 + 0.25 * (2.0 * phi).cos() + 0.15 * (3.0 * phi).sin();
                Complex64::from_polar(r, phi)
            }
        }
    })
}

/// `count` noisy copies of a template. Each copy gets independent Gaussian
/// landmark noise of standard deviation `noise`, then a random rotation,
/// scale in `[0.5, 2]` and translation.
pub fn gen_synthetic_corpus(t: Template, k: usize, count: usize, noise: f64, seed: u64) -> Result<Vec<CVector>> {
    if k < 8 {
        return Err(HarnessError::Config(format!("corpus needs at least 8 landmarks, got {k}")));
    }
    if !(noise >= 0.0) {
        return Err(HarnessError::Config(format!("noise {noise} must be nonnegative")));
    }
    let base = template_curve(t, k);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..count)
        .map(|_| {
            let rot = Complex64::from_polar(rng.random_range(0.5..2.0), rng.random::<f64>() * TAU);
            let shift = Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal));
            base.map(|z| {
                let e = Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal));
                (z + e * noise) * rot + shift
            })
        })
        .collect())
}

#[derive(Debug, Clone)]
pub struct ShapeOptions {
    pub epsilon: f64,
    pub chain: ChainConfig,
    pub smoothing: Option<f64>,
    pub topology: CurveTopology,
    pub seed: u64,
}

impl ShapeOptions {
    pub fn new(epsilon: f64, seed: u64) -> Self {
        ShapeOptions {
            epsilon,
            chain: ChainConfig::kendall_default(seed),
            smoothing: None,
            topology: CurveTopology::Closed,
            seed,
        }
    }
}

/// Preshapes, their mean and the ball used for calibration.
#[derive(Debug, Clone)]
pub struct ShapeData {
    pub space: Kendall,
    pub data: Dataset<Kendall>,
    pub mean: Preshape,
    /// Largest shape distance from the mean to a data shape. This radius is
    /// computed from the data itself.
    pub radius: f64,
    pub radius_data_dependent: bool,
}

pub fn prepare_shapes(shapes: &[CVector]) -> Result<ShapeData> {
    if shapes.len() < 2 {
        return Err(HarnessError::Data(format!("need at least 2 shapes, got {}", shapes.len())));
    }
    let k = shapes[0].len();
    if shapes.iter().any(|s| s.len() != k) {
        return Err(HarnessError::Data("shapes have different landmark counts".into()));
    }
    let ks = Kendall::new(k).map_err(|e| HarnessError::Data(e.to_string()))?;
    let pre = shapes.iter().map(|s| ks.to_preshape(s)).collect::<geodp::Result<Vec<_>>>()?;
    let limit = ks.descriptor().max_ball_radius();
    // Provisional ball for the solver: the largest admissible one around the first shape.
    let wide = GeodesicBall::new(&ks, pre[0].clone(), limit * (1.0 - 1e-12))?;
    let wide = Dataset::new(&ks, pre.clone(), wide).map_err(|_| {
        HarnessError::Data(format!("shapes are too spread out for a ball of radius {limit}"))
    })?;
    let mean = frechet_mean(&ks, &wide, &BENCH_SOLVER)?.point;
    let mut radius = MIN_RADIUS;
    for p in &pre {
        radius = radius.max(ks.distance(&mean, p)?);
    }
    if radius >= limit {
        return Err(HarnessError::Data(format!("data radius {radius} exceeds the admissible {limit}")));
    }
    let ball = GeodesicBall::new(&ks, mean.clone(), radius)?;
    let data = Dataset::new(&ks, pre, ball)?;
    Ok(ShapeData { space: ks, data, mean, radius, radius_data_dependent: true })
}

#[derive(Debug, Clone)]
pub struct ShapeRelease {
    pub kng: Preshape,
    pub kng_sigma: f64,
    pub kng_diagnostics: Option<ChainDiagnostics>,
    pub pointwise_aligned: CVector,
    pub pointwise_unaligned: CVector,
}

/// One release of all three mechanisms with streams derived from `seed`.
pub fn release_shapes(sd: &ShapeData, opts: &ShapeOptions, replicate: usize) -> Result<ShapeRelease> {
    let ks = &sd.space;
    let n = sd.data.len();
    let stream = |m: Mechanism| derive(opts.seed, &[n as u64, replicate as u64, mechanism_stream(m)]);
    let params = PrivacyParams::new(opts.epsilon, sd.radius, n, &ks.descriptor())?;
    let chain = opts.chain.with_seed(stream(Mechanism::Kng));
    let kng = sample_kng(ks, &sd.data, sd.mean.clone(), &params, &chain)?;

    let mut rng = ChaCha8Rng::seed_from_u64(stream(Mechanism::PointwiseAligned));
    let aligned = pointwise_laplace(ks, sd.data.points(), &sd.mean, opts.epsilon, true, &mut rng)?;
    let mut rng = ChaCha8Rng::seed_from_u64(stream(Mechanism::PointwiseUnaligned));
    let unaligned = pointwise_laplace(ks, sd.data.points(), &sd.mean, opts.epsilon, false, &mut rng)?;

    let mut out = ShapeRelease {
        kng: kng.point,
        kng_sigma: kng.sigma,
        kng_diagnostics: kng.diagnostics,
        pointwise_aligned: aligned,
        pointwise_unaligned: unaligned,
    };
    if let Some(h) = opts.smoothing {
        let sm = |c: &CVector| smooth_landmarks(c, h, opts.topology);
        out.kng = ks.to_preshape(&sm(out.kng.landmarks())?)?;
        out.pointwise_aligned = sm(&out.pointwise_aligned)?;
        out.pointwise_unaligned = sm(&out.pointwise_unaligned)?;
    }
    Ok(out)
}

/// Prepares the data and produces a single release.
pub fn run_shape_pipeline(shapes: &[CVector], opts: &ShapeOptions) -> Result<(ShapeData, ShapeRelease)> {
    let sd = prepare_shapes(shapes)?;
    let rel = release_shapes(&sd, opts, 0)?;
    Ok((sd, rel))
}

fn shape_utility(ks: &Kendall, mean: &Preshape, x: &CVector) -> geodp::Result<(f64, f64)> {
    let p = ks.to_preshape(x)?;
    Ok((ks.utility_distance(mean, &p)?, ks.distance(mean, &p)?))
}

/// `replicates` independent releases; rows follow the result-file layout
/// with `n` the number of shapes.
pub fn run_shape_benchmark(
    sd: &ShapeData,
    opts: &ShapeOptions,
    replicates: usize,
    exec: Execution,
) -> Result<(Vec<ResultRow>, Vec<ShapeRelease>)> {
    if replicates == 0 {
        return Err(HarnessError::Config("replicates must be at least 1".into()));
    }
    let ks = &sd.space;
    let n = sd.data.len();
    let results = map_jobs((0..replicates).collect(), exec, |rep| release_shapes(sd, opts, rep));
    let mut rows = Vec::new();
    let mut releases = Vec::new();
    for (rep, res) in results.into_iter().enumerate() {
        let rel = res?;
        let entries: [(Mechanism, geodp::Result<(f64, f64)>, Option<String>); 3] = [
            (
                Mechanism::Kng,
                shape_utility(ks, &sd.mean, rel.kng.landmarks()),
                rel.kng_diagnostics.as_ref().and_then(|d| d.warning.clone()).map(|w| format!("warning: {w}")),
            ),
            (Mechanism::PointwiseAligned, shape_utility(ks, &sd.mean, &rel.pointwise_aligned), None),
            (Mechanism::PointwiseUnaligned, shape_utility(ks, &sd.mean, &rel.pointwise_unaligned), None),
        ];
        for (mech, u, warning) in entries {
            let (ue, ui, error) = match u {
                Ok((e, i)) => (Some(e), Some(i), warning),
                Err(e) => (None, None, Some(e.to_string())),
            };
            rows.push(ResultRow {
                manifold: "kendall".into(),
                mechanism: mech,
                n,
                replicate: rep,
                utility_euclidean: ue,
                utility_intrinsic: ui,
                seed: derive(opts.seed, &[n as u64, rep as u64, mechanism_stream(mech)]),
                wall_ms: 0,
                error,
            });
        }
        releases.push(rel);
    }
    Ok((rows, releases))
}

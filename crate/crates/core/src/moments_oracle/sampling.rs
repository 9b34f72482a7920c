use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use super::CovarianceSpec;
use crate::error::{Error, Result};
use crate::rational::to_f64;

/// Number of independent streams a Monte Carlo run is split into. Fixed so results do not
/// depend on the thread count.
const STREAMS: u64 = 64;

/// Draws from N(0, I + ((σ²−1)/N)·11ᵀ).
///
/// For σ² ≥ 1 uses N+1 standard normals, X_k = Y_k + √((σ²−1)/N)·Y_0. For σ² < 1 rotates
/// (σY_1, Y_2, …, Y_N) back with the Helmert matrix, whose first row is 1/√N and whose other
/// rows are the Gram–Schmidt completion of the coordinate vectors.
#[derive(Clone, Debug)]
pub struct Sampler {
    n: usize,
    kind: Kind,
}

#[derive(Clone, Debug)]
enum Kind {
    Shift(f64),
    Rotation { sigma: f64, rows: Vec<Vec<f64>> },
}

/// Helmert matrix of order n (rows are orthonormal, row 0 is constant).
fn helmert(n: usize) -> Vec<Vec<f64>> {
    let mut rows = vec![vec![1.0 / (n as f64).sqrt(); n]];
    for k in 1..n {
        let norm = ((k * (k + 1)) as f64).sqrt();
        let mut row = vec![0.0; n];
        row[..k].fill(1.0 / norm);
        row[k] = -(k as f64) / norm;
        rows.push(row);
    }
    rows
}

impl Sampler {
    pub fn new(n: usize, sigma2: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("N must be at least 1".into()));
        }
        if !(sigma2 > 0.0) || !sigma2.is_finite() {
            return Err(Error::Domain(format!("sigma2 must be positive, got {sigma2}")));
        }
        let kind = if sigma2 >= 1.0 {
            Kind::Shift(((sigma2 - 1.0) / n as f64).sqrt())
        } else {
            Kind::Rotation {
                sigma: sigma2.sqrt(),
                rows: helmert(n),
            }
        };
        Ok(Self { n, kind })
    }

    pub fn from_spec(spec: &CovarianceSpec) -> Result<Self> {
        Self::new(spec.n(), to_f64(spec.sigma2()))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Fills `out` (length N) with one draw.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        match &self.kind {
            Kind::Shift(shift) => {
                let y0: f64 = rng.sample(StandardNormal);
                for x in out.iter_mut() {
                    let y: f64 = rng.sample(StandardNormal);
                    *x = y + shift * y0;
                }
            }
            Kind::Rotation { sigma, rows } => {
                out.fill(0.0);
                for (k, row) in rows.iter().enumerate() {
                    let mut y: f64 = rng.sample(StandardNormal);
                    if k == 0 {
                        y *= sigma;
                    }
                    for (x, q) in out.iter_mut().zip(row) {
                        *x += q * y;
                    }
                }
            }
        }
    }
}

/// One draw of (X_1, …, X_N).
pub fn sample_vector<R: Rng + ?Sized>(spec: &CovarianceSpec, rng: &mut R) -> Vec<f64> {
    let sampler = Sampler::from_spec(spec).expect("spec is validated");
    let mut out = vec![0.0; spec.n()];
    sampler.draw(rng, &mut out);
    out
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub samples: u64,
    pub seed: u64,
}

impl McEstimate {
    /// (mean − reference)/stderr.
    pub fn z_score(&self, reference: f64) -> f64 {
        (self.mean - reference) / self.stderr
    }
}

#[derive(Clone, Copy, Default)]
struct Moments {
    count: u64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.count += 1;
        let d = x - self.mean;
        self.mean += d / self.count as f64;
        self.m2 += d * (x - self.mean);
    }

    fn merge(self, other: Moments) -> Moments {
        if self.count == 0 {
            return other;
        }
        if other.count == 0 {
            return self;
        }
        let count = self.count + other.count;
        let d = other.mean - self.mean;
        let w = other.count as f64 / count as f64;
        Moments {
            count,
            mean: self.mean + d * w,
            m2: self.m2 + other.m2 + d * d * self.count as f64 * w,
        }
    }
}

/// Sample mean and standard error of Π_k(X_k² + z²).
///
/// Samples are split over 64 ChaCha8 streams derived from `seed`; the streams run in parallel
/// and are merged in stream order, so the result is a pure function of the arguments.
pub fn mc_expected_polynomial(n: usize, z2: f64, sigma2: f64, samples: u64, seed: u64) -> Result<McEstimate> {
    if samples < 100 {
        return Err(Error::InvalidArgument(format!(
            "need at least 100 samples, got {samples}"
        )));
    }
    let sampler = Sampler::new(n, sigma2)?;
    let per = samples / STREAMS;
    let extra = samples % STREAMS;
    let moments = (0..STREAMS)
        .into_par_iter()
        .map(|stream| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(stream);
            let count = per + u64::from(stream < extra);
            let mut buf = vec![0.0; n];
            let mut m = Moments::default();
            for _ in 0..count {
                sampler.draw(&mut rng, &mut buf);
                m.push(buf.iter().map(|x| x * x + z2).product());
            }
            m
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold(Moments::default(), Moments::merge);
    let var = moments.m2 / (moments.count - 1) as f64;
    Ok(McEstimate {
        mean: moments.mean,
        stderr: (var / moments.count as f64).sqrt(),
        samples,
        seed,
    })
}

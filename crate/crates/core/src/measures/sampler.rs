use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::quadrature::{mix_seed, DEFAULT_GRID};
use super::torus::{MeasureKind, MeasureSpec, TorusPoint};
use crate::error::{Error, Result};

/// Factor applied to the grid supremum of the density.
pub const ENVELOPE_SAFETY: f64 = 1.1;
/// Envelope recomputations allowed before giving up.
pub const MAX_ENVELOPE_RETRIES: u32 = 8;
/// Node budget of the supremum search for ranks above three.
const SUP_NODES: f64 = 2.0e6;

fn sup_grid(n: usize) -> usize {
    if n <= 3 {
        return DEFAULT_GRID;
    }
    let g = SUP_NODES.powf(1.0 / (n - 1) as f64).floor() as usize;
    g.clamp(6, DEFAULT_GRID)
}

/// Supremum of the raw density over the tensor grid.
pub fn grid_supremum(kind: MeasureKind, n: usize) -> f64 {
    let axes = n - 1;
    let g = sup_grid(n);
    let total = g.pow(axes as u32);
    let step = TAU / g as f64;
    (0..total)
        .into_par_iter()
        .map(|mut k| {
            let mut a = Vec::with_capacity(n);
            for _ in 0..axes {
                a.push((k % g) as f64 * step);
                k /= g;
            }
            a.push(-a.iter().sum::<f64>());
            kind.raw_density(&a)
        })
        .reduce(|| 0.0, f64::max)
}

/// Rejection sampler from the uniform distribution on the chart.
#[derive(Clone, Debug)]
pub struct Sampler {
    kind: MeasureKind,
    n: usize,
    envelope: f64,
}

impl Sampler {
    pub fn new(spec: &MeasureSpec) -> Self {
        let env = ENVELOPE_SAFETY * grid_supremum(spec.kind, spec.n);
        Sampler { kind: spec.kind, n: spec.n, envelope: env }
    }

    pub fn with_envelope(spec: &MeasureSpec, envelope: f64) -> Result<Self> {
        if !(envelope > 0.0 && envelope.is_finite()) {
            return Err(Error::invalid("envelope must be positive and finite"));
        }
        Ok(Sampler { kind: spec.kind, n: spec.n, envelope })
    }

    /// Bound on the raw density.
    pub fn envelope(&self) -> f64 {
        self.envelope
    }

    /// One accepted point from stream `index` of generator `key`, with the
    /// number of proposals used.
    pub fn draw(&self, key: u64, index: u64) -> Result<(TorusPoint, u64)> {
        let mut rng = ChaCha8Rng::seed_from_u64(key);
        rng.set_stream(index);
        let mut free = vec![0.0; self.n - 1];
        let mut trials = 0u64;
        loop {
            trials += 1;
            for t in free.iter_mut() {
                *t = TAU * rng.random::<f64>();
            }
            let mut a = free.clone();
            a.push(-free.iter().sum::<f64>());
            let d = self.kind.raw_density(&a);
            if d > self.envelope {
                return Err(Error::Envelope { density: d, envelope: self.envelope });
            }
            if rng.random::<f64>() * self.envelope < d {
                return Ok((TorusPoint::from_chart(&free), trials));
            }
        }
    }

    /// One draw per entry of `streams`, in order.
    pub fn draw_many(&self, key: u64, streams: &[u64]) -> Result<(Vec<TorusPoint>, u64)> {
        let res: Vec<Result<(TorusPoint, u64)>> = streams.par_iter().map(|&i| self.draw(key, i)).collect();
        let mut points = Vec::with_capacity(streams.len());
        let mut trials = 0;
        let mut worst: Option<Error> = None;
        for r in res {
            match r {
                Ok((x, t)) => {
                    points.push(x);
                    trials += t;
                }
                Err(Error::Envelope { density, envelope }) => {
                    let replace = match &worst {
                        Some(Error::Envelope { density: d, .. }) => density > *d,
                        _ => true,
                    };
                    if replace {
                        worst = Some(Error::Envelope { density, envelope });
                    }
                }
                Err(e) => return Err(e),
            }
        }
        match worst {
            Some(e) => Err(e),
            None => Ok((points, trials)),
        }
    }
}

/// Samples together with acceptance statistics.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SampleSet {
    pub points: Vec<TorusPoint>,
    pub proposals: u64,
    pub acceptance_rate: f64,
    pub envelope: f64,
    pub envelope_recomputations: u32,
}

/// `count` independent draws from the measure, reproducible from `seed`.
///
/// An envelope violation restarts the run with the envelope raised above
/// the offending density value.
pub fn sample(spec: &MeasureSpec, count: usize, seed: u64) -> Result<SampleSet> {
    let mut sampler = Sampler::new(spec);
    sample_with(&mut sampler, count, seed)
}

pub fn sample_with(sampler: &mut Sampler, count: usize, seed: u64) -> Result<SampleSet> {
    let streams: Vec<u64> = (0..count as u64).collect();
    sample_streams(sampler, mix_seed(seed, 0x73616d70), &streams)
}

/// Draws for the given streams of generator `key`, raising the envelope and
/// starting over whenever it is violated.
pub fn sample_streams(sampler: &mut Sampler, key: u64, streams: &[u64]) -> Result<SampleSet> {
    let mut recomputations = 0;
    loop {
        match sampler.draw_many(key, streams) {
            Ok((points, proposals)) => {
                let acceptance_rate =
                    if proposals == 0 { 1.0 } else { points.len() as f64 / proposals as f64 };
                return Ok(SampleSet {
                    points,
                    proposals,
                    acceptance_rate,
                    envelope: sampler.envelope,
                    envelope_recomputations: recomputations,
                });
            }
            Err(Error::Envelope { density, envelope }) if recomputations < MAX_ENVELOPE_RETRIES => {
                recomputations += 1;
                sampler.envelope = ENVELOPE_SAFETY * density.max(envelope);
            }
            Err(e) => return Err(e),
        }
    }
}

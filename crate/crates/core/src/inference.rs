//! Full-frame prediction split across worker threads, plus a timing harness.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::network::{predict_span, PREDICT_BLOCK, NetworkParams, Real, Tape};
use crate::spectral::{RgbImage, SpectralCube};

/// Predicts every pixel of `rgb`, assigning each worker a contiguous stripe of
/// rows. The result is bit-identical for every worker count.
pub fn predict_parallel<T: Real>(
    params: &NetworkParams<T>,
    rgb: &RgbImage,
    workers: usize,
) -> Result<SpectralCube> {
    if workers == 0 {
        return Err(Error::param("workers must be >= 1"));
    }
    if params.spec().input_bands != 3 {
        return Err(Error::dim("image prediction needs a 3-channel network"));
    }
    let bands = params.output_bands();
    let (width, height) = (rgb.width(), rgb.height());
    let mut out = vec![0.0f32; width * height * bands];
    let stripe_rows = height.div_ceil(workers).max(1);

    if workers == 1 || height <= 1 {
        let mut tape = Tape::with_capacity(params, PREDICT_BLOCK);
        predict_span(params, rgb.data(), &mut out, &mut tape);
    } else {
        std::thread::scope(|scope| {
            let inputs = rgb.data().chunks(stripe_rows * width * 3);
            let outputs = out.chunks_mut(stripe_rows * width * bands);
            for (src, dst) in inputs.zip(outputs) {
                scope.spawn(move || {
                    let mut tape = Tape::with_capacity(params, PREDICT_BLOCK);
                    predict_span(params, src, dst, &mut tape);
                });
            }
        });
    }
    SpectralCube::from_unclamped(width, height, params.grid().clone(), out)
}

pub const BENCH_HEADER: &str = "width,height,workers,iters,mean_ms,median_ms,p95_ms,fps";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BenchOptions {
    pub width: usize,
    pub height: usize,
    /// Total frames, including the discarded warm-up frame.
    pub iterations: usize,
    pub workers: usize,
    pub seed: u64,
}

impl Default for BenchOptions {
    fn default() -> Self {
        Self {
            width: 256,
            height: 192,
            iterations: 10,
            workers: 1,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchReport {
    pub width: usize,
    pub height: usize,
    pub workers: usize,
    pub iterations: usize,
    /// Wall time of each recorded frame (warm-up excluded).
    pub frame_ms: Vec<f64>,
    pub mean_ms: f64,
    pub median_ms: f64,
    pub p95_ms: f64,
    pub fps: f64,
}

impl BenchReport {
    fn from_samples(opts: &BenchOptions, frame_ms: Vec<f64>) -> Self {
        let mut sorted = frame_ms.clone();
        sorted.sort_by(f64::total_cmp);
        let n = sorted.len();
        let mean_ms = sorted.iter().sum::<f64>() / n as f64;
        let median_ms = if n % 2 == 1 {
            sorted[n / 2]
        } else {
            0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
        };
        // nearest-rank percentile
        let rank = ((0.95 * n as f64).ceil() as usize).clamp(1, n);
        Self {
            width: opts.width,
            height: opts.height,
            workers: opts.workers,
            iterations: opts.iterations,
            frame_ms,
            mean_ms,
            median_ms,
            p95_ms: sorted[rank - 1],
            fps: 1000.0 / mean_ms,
        }
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{:.3},{:.3},{:.3},{:.3}",
            self.width,
            self.height,
            self.workers,
            self.iterations,
            self.mean_ms,
            self.median_ms,
            self.p95_ms,
            self.fps
        )
    }
}

/// Times [`predict_parallel`] on a seeded random frame. The first frame is a
/// warm-up and is not recorded.
pub fn benchmark<T: Real>(params: &NetworkParams<T>, opts: &BenchOptions) -> Result<BenchReport> {
    if opts.iterations < 3 {
        return Err(Error::param("benchmark needs at least 3 iterations"));
    }
    if opts.width == 0 || opts.height == 0 {
        return Err(Error::param("benchmark frame must be non-empty"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let data = (0..opts.width * opts.height * 3)
        .map(|_| rng.random::<f32>())
        .collect();
    let frame = RgbImage::new(opts.width, opts.height, data)?;
    let mut samples = Vec::with_capacity(opts.iterations - 1);
    for k in 0..opts.iterations {
        let start = Instant::now();
        let cube = predict_parallel(params, &frame, opts.workers)?;
        let ms = start.elapsed().as_secs_f64() * 1e3;
        std::hint::black_box(&cube);
        if k > 0 {
            samples.push(ms.max(f64::MIN_POSITIVE));
        }
    }
    Ok(BenchReport::from_samples(opts, samples))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{predict_image, ArchitectureSpec};

    fn random_image(w: usize, h: usize, seed: u64) -> RgbImage {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        RgbImage::new(w, h, (0..w * h * 3).map(|_| rng.random::<f32>()).collect()).unwrap()
    }

    #[test]
    fn single_worker_equals_predict_image() {
        let p = NetworkParams::<f32>::init(ArchitectureSpec::with_width(8), 1).unwrap();
        let img = random_image(9, 7, 2);
        assert_eq!(predict_parallel(&p, &img, 1).unwrap(), predict_image(&p, &img).unwrap());
    }

    #[test]
    fn more_workers_than_rows() {
        let p = NetworkParams::<f32>::init(ArchitectureSpec::with_width(8), 1).unwrap();
        let img = random_image(13, 1, 3);
        assert_eq!(predict_parallel(&p, &img, 8).unwrap(), predict_image(&p, &img).unwrap());
        let img = random_image(5, 3, 4);
        assert_eq!(predict_parallel(&p, &img, 8).unwrap(), predict_image(&p, &img).unwrap());
    }

    #[test]
    fn zero_workers_rejected() {
        let p = NetworkParams::<f32>::zeros(ArchitectureSpec::default()).unwrap();
        assert!(predict_parallel(&p, &random_image(2, 2, 0), 0).is_err());
    }

    #[test]
    fn bench_statistics() {
        let p = NetworkParams::<f32>::init(ArchitectureSpec::with_width(4), 1).unwrap();
        let opts = BenchOptions {
            width: 16,
            height: 8,
            iterations: 5,
            workers: 2,
            seed: 1,
        };
        let r = benchmark(&p, &opts).unwrap();
        assert_eq!(r.frame_ms.len(), 4);
        assert!(r.frame_ms.iter().all(|&t| t > 0.0));
        assert!((r.fps - 1000.0 / r.mean_ms).abs() < 1e-9);
        assert!(r.p95_ms >= r.median_ms);
        assert_eq!(r.csv_row().split(',').count(), BENCH_HEADER.split(',').count());
        assert!(benchmark(&p, &BenchOptions { iterations: 2, ..opts }).is_err());
    }

    #[test]
    fn percentile_nearest_rank() {
        let opts = BenchOptions::default();
        let r = BenchReport::from_samples(&opts, (1..=20).map(f64::from).collect());
        assert_eq!(r.p95_ms, 19.0);
        assert_eq!(r.median_ms, 10.5);
        assert_eq!(r.mean_ms, 10.5);
    }
}

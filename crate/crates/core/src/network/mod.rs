//! The per-pixel spectral upscaling network.
//!
//! An RGB triple is treated as a length-3 signal with one feature. Transposed
//! convolutions along the spectral axis grow it to the output band count, a
//! linear fuse convolution collapses the features into a single low-frequency
//! spectrum `L`, and a residual block of convolutions predicts a correction
//! `H`. The network output is `L + H`. Every pixel is processed independently,
//! so a model trained on single pixels applies unchanged to whole images.

mod arch;
mod block;
mod kernels;
mod model_io;
mod real;

pub use arch::{Activation, ArchitectureSpec, ConvShape, LayerGeom, LayerKind, TransposedShape};
pub use kernels::{spectral_conv, spectral_transposed_conv};
pub use model_io::{decode_model, encode_model, load_model, model_dtype, save_model, MODEL_MAGIC};
pub use real::Real;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::spectral::{RgbImage, SpectralCube, WavelengthGrid};

/// Weights and biases of one layer. Weights are `out x in x kernel_len`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerParams<T> {
    pub weights: Vec<T>,
    pub biases: Vec<T>,
}

impl<T: Real> LayerParams<T> {
    fn zeros(g: &LayerGeom) -> Self {
        Self {
            weights: vec![T::zero(); g.weight_count()],
            biases: vec![T::zero(); g.out_features],
        }
    }
}

/// Architecture plus every learned tensor. The element type is the precision tag.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkParams<T> {
    spec: ArchitectureSpec,
    grid: WavelengthGrid,
    geoms: Vec<LayerGeom>,
    layers: Vec<LayerParams<T>>,
}

/// Grid used when a model is built without one: the default grid for 24
/// bands, otherwise 10 nm steps from 460 nm.
fn default_grid(bands: usize) -> Result<WavelengthGrid> {
    if bands == 24 {
        Ok(WavelengthGrid::msi_default())
    } else {
        WavelengthGrid::uniform(460.0, 10.0, bands)
    }
}

impl<T: Real> NetworkParams<T> {
    pub fn zeros(spec: ArchitectureSpec) -> Result<Self> {
        let geoms = spec.layers()?;
        let grid = default_grid(spec.output_bands)?;
        let layers = geoms.iter().map(LayerParams::zeros).collect();
        Ok(Self {
            spec,
            grid,
            geoms,
            layers,
        })
    }

    /// Zero biases, weights drawn from `N(0, 2 / (in_features * kernel_len))`.
    pub fn init(spec: ArchitectureSpec, seed: u64) -> Result<Self> {
        let mut params = Self::zeros(spec)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for (g, layer) in params.geoms.iter().zip(params.layers.iter_mut()) {
            let std = (2.0 / (g.in_features * g.kernel_len) as f64).sqrt();
            for w in layer.weights.iter_mut() {
                let z: f64 = StandardNormal.sample(&mut rng);
                *w = T::of(z * std);
            }
        }
        Ok(params)
    }

    pub fn from_layers(
        spec: ArchitectureSpec,
        grid: WavelengthGrid,
        layers: Vec<LayerParams<T>>,
    ) -> Result<Self> {
        let geoms = spec.layers()?;
        if grid.len() != spec.output_bands {
            return Err(Error::dim(format!(
                "grid has {} bands, architecture outputs {}",
                grid.len(),
                spec.output_bands
            )));
        }
        if layers.len() != geoms.len() {
            return Err(Error::dim(format!(
                "{} parameter layers for {} architecture layers",
                layers.len(),
                geoms.len()
            )));
        }
        for (n, (g, l)) in geoms.iter().zip(&layers).enumerate() {
            if l.weights.len() != g.weight_count() || l.biases.len() != g.out_features {
                return Err(Error::dim(format!("layer {n} tensors do not match the architecture")));
            }
            if l.weights.iter().chain(&l.biases).any(|v| !v.is_finite()) {
                return Err(Error::param(format!("layer {n} has non-finite parameters")));
            }
        }
        Ok(Self {
            spec,
            grid,
            geoms,
            layers,
        })
    }

    /// Replaces the output wavelength grid attached to the model.
    pub fn with_grid(mut self, grid: WavelengthGrid) -> Result<Self> {
        if grid.len() != self.spec.output_bands {
            return Err(Error::dim(format!(
                "grid has {} bands, architecture outputs {}",
                grid.len(),
                self.spec.output_bands
            )));
        }
        self.grid = grid;
        Ok(self)
    }

    pub fn spec(&self) -> &ArchitectureSpec {
        &self.spec
    }

    pub fn grid(&self) -> &WavelengthGrid {
        &self.grid
    }

    pub fn geoms(&self) -> &[LayerGeom] {
        &self.geoms
    }

    pub fn layers(&self) -> &[LayerParams<T>] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [LayerParams<T>] {
        &mut self.layers
    }

    pub fn output_bands(&self) -> usize {
        self.spec.output_bands
    }

    pub fn param_count(&self) -> usize {
        self.layers.iter().map(|l| l.weights.len() + l.biases.len()).sum()
    }

    /// All parameters in a fixed order: per layer, weights then biases.
    pub fn iter(&self) -> impl Iterator<Item = &T> {
        self.layers.iter().flat_map(|l| l.weights.iter().chain(&l.biases))
    }

    pub fn iter_mut(&mut self) -> impl Iterator<Item = &mut T> {
        self.layers
            .iter_mut()
            .flat_map(|l| l.weights.iter_mut().chain(l.biases.iter_mut()))
    }

    pub fn cast<U: Real>(&self) -> NetworkParams<U> {
        NetworkParams {
            spec: self.spec.clone(),
            grid: self.grid.clone(),
            geoms: self.geoms.clone(),
            layers: self
                .layers
                .iter()
                .map(|l| LayerParams {
                    weights: l.weights.iter().map(|v| U::of(v.as_f64())).collect(),
                    biases: l.biases.iter().map(|v| U::of(v.as_f64())).collect(),
                })
                .collect(),
        }
    }
}

/// Gradients of a scalar loss w.r.t. every parameter, shape-congruent to [`NetworkParams`].
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients<T> {
    pub layers: Vec<LayerParams<T>>,
}

impl<T: Real> Gradients<T> {
    pub fn zeros_like(params: &NetworkParams<T>) -> Self {
        Self {
            layers: params.geoms.iter().map(LayerParams::zeros).collect(),
        }
    }

    pub fn fill_zero(&mut self) {
        for l in &mut self.layers {
            l.weights.fill(T::zero());
            l.biases.fill(T::zero());
        }
    }

    pub fn add_assign(&mut self, other: &Self) {
        for (a, b) in self.iter_mut().zip(other.iter()) {
            *a += *b;
        }
    }

    pub fn scale(&mut self, factor: T) {
        self.iter_mut().for_each(|v| *v *= factor);
    }

    /// Same ordering as [`NetworkParams::iter`].
    pub fn iter(&self) -> impl Iterator<Item = &T> {
        self.layers.iter().flat_map(|l| l.weights.iter().chain(&l.biases))
    }

    pub fn iter_mut(&mut self) -> impl Iterator<Item = &mut T> {
        self.layers
            .iter_mut()
            .flat_map(|l| l.weights.iter_mut().chain(l.biases.iter_mut()))
    }
}

/// Activations cached by a forward pass over a block of pixels.
///
/// `activations(0)` is the input; entry `n + 1` is the (post-activation)
/// output of layer `n`. Each feature occupies one row of `pixels * len`
/// values, so for a single pixel the layout is plain feature-major.
#[derive(Debug, Clone)]
pub struct Tape<T> {
    acts: Vec<Vec<T>>,
    sizes: Vec<usize>,
    output: Vec<T>,
    scratch: Vec<T>,
    capacity: usize,
    pixels: usize,
}

impl<T: Real> Tape<T> {
    pub fn new(params: &NetworkParams<T>) -> Self {
        Self::with_capacity(params, 1)
    }

    /// Buffers for up to `capacity` pixels per pass.
    pub fn with_capacity(params: &NetworkParams<T>, capacity: usize) -> Self {
        let capacity = capacity.max(1);
        let geoms = params.geoms();
        let mut sizes = vec![geoms[0].input_size()];
        sizes.extend(geoms.iter().map(LayerGeom::output_size));
        let scratch = geoms.iter().map(block::scratch_per_pixel).max().unwrap_or(0);
        Self {
            acts: sizes.iter().map(|s| vec![T::zero(); s * capacity]).collect(),
            sizes,
            output: vec![T::zero(); params.output_bands() * capacity],
            scratch: vec![T::zero(); scratch * capacity],
            capacity,
            pixels: 0,
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    /// Pixels held by the last forward pass.
    pub fn pixels(&self) -> usize {
        self.pixels
    }

    /// Network outputs, `B` consecutive values per pixel.
    pub fn output(&self) -> &[T] {
        &self.output[..self.pixels * self.sizes[self.sizes.len() - 1]]
    }

    pub fn activations(&self, n: usize) -> &[T] {
        &self.acts[n][..self.pixels * self.sizes[n]]
    }

    pub fn layer_count(&self) -> usize {
        self.acts.len() - 1
    }

    /// On/off state of every rectified unit, in layer order.
    pub fn relu_pattern(&self, params: &NetworkParams<T>) -> Vec<bool> {
        params
            .geoms()
            .iter()
            .enumerate()
            .filter(|(_, g)| g.relu)
            .flat_map(|(n, _)| self.activations(n + 1).iter().map(|v| *v > T::zero()))
            .collect()
    }
}

/// Runs the network on a block of pixels given as consecutive input vectors.
pub(crate) fn forward_into<T: Real>(params: &NetworkParams<T>, inputs: &[T], tape: &mut Tape<T>) {
    let n = inputs.len() / tape.sizes[0];
    assert!(n <= tape.capacity && n * tape.sizes[0] == inputs.len(), "block does not fit the tape");
    tape.pixels = n;
    tape.acts[0][..inputs.len()].copy_from_slice(inputs);
    for (l, (g, layer)) in params.geoms.iter().zip(&params.layers).enumerate() {
        let (done, rest) = tape.acts.split_at_mut(l + 1);
        block::forward(
            g,
            n,
            &done[l][..n * tape.sizes[l]],
            &layer.weights,
            &layer.biases,
            &mut rest[0][..n * tape.sizes[l + 1]],
            &mut tape.scratch,
        );
    }
    let len = n * params.output_bands();
    let low = &tape.acts[params.spec.fuse_index() + 1][..len];
    let residual = &tape.acts[tape.acts.len() - 1][..len];
    for ((o, &l), &h) in tape.output[..len].iter_mut().zip(low).zip(residual) {
        *o = l + h;
    }
}

/// Scratch buffers for [`backward_into`].
#[derive(Debug, Clone)]
pub(crate) struct Backprop<T> {
    d: Vec<Vec<T>>,
    d_out: Vec<T>,
    scratch: Vec<T>,
    dscratch: Vec<T>,
}

impl<T: Real> Backprop<T> {
    pub(crate) fn new(tape: &Tape<T>) -> Self {
        Self {
            d: tape.acts.iter().map(|a| vec![T::zero(); a.len()]).collect(),
            d_out: vec![T::zero(); tape.output.len()],
            scratch: tape.scratch.clone(),
            dscratch: tape.scratch.clone(),
        }
    }
}

/// Sum over the taped pixels of the per-pixel mean squared error against
/// `targets`; adds the exact parameter gradients of that sum into `grads`.
pub(crate) fn backward_into<T: Real>(
    params: &NetworkParams<T>,
    tape: &Tape<T>,
    targets: &[T],
    grads: &mut Gradients<T>,
    bp: &mut Backprop<T>,
) -> T {
    let n = tape.pixels;
    let bands = params.output_bands();
    let len = n * bands;
    assert_eq!(targets.len(), len, "targets do not match the taped block");
    let scale = T::of(bands as f64);
    let two = T::of(2.0);
    let mut loss = T::zero();
    for ((d, o), t) in bp.d_out[..len]
        .chunks_exact_mut(bands)
        .zip(tape.output[..len].chunks_exact(bands))
        .zip(targets.chunks_exact(bands))
    {
        let mut sq = T::zero();
        for ((d, &o), &t) in d.iter_mut().zip(o).zip(t) {
            let e = o - t;
            sq += e * e;
            *d = two * e / scale;
        }
        loss += sq / scale;
    }

    let n_layers = params.geoms.len();
    let hre_first = params.spec.fuse_index() + 1;
    bp.d[n_layers][..len].copy_from_slice(&bp.d_out[..len]);
    for l in (0..n_layers).rev() {
        let g = &params.geoms[l];
        let (lower, upper) = bp.d.split_at_mut(l + 1);
        let dy = &mut upper[0][..n * tape.sizes[l + 1]];
        if g.relu {
            for (d, a) in dy.iter_mut().zip(&tape.acts[l + 1]) {
                if *a <= T::zero() {
                    *d = T::zero();
                }
            }
        }
        let dx = if l > 0 { Some(&mut lower[l][..n * tape.sizes[l]]) } else { None };
        let gl = &mut grads.layers[l];
        block::backward(
            g,
            n,
            &tape.acts[l][..n * tape.sizes[l]],
            &params.layers[l].weights,
            dy,
            &mut gl.weights,
            &mut gl.biases,
            dx,
            &mut bp.scratch,
            &mut bp.dscratch,
        );
        if l == hre_first {
            // residual skip: the low-frequency estimate also feeds the output directly
            for (d, &o) in bp.d[l][..len].iter_mut().zip(&bp.d_out[..len]) {
                *d += o;
            }
        }
    }
    loss
}

fn check_input<T: Real>(params: &NetworkParams<T>, rgb: &[T]) -> Result<()> {
    if rgb.len() != params.spec.input_bands {
        return Err(Error::dim(format!(
            "network expects {} input channels, got {}",
            params.spec.input_bands,
            rgb.len()
        )));
    }
    if rgb.iter().any(|v| !v.is_finite()) {
        return Err(Error::param("network input must be finite"));
    }
    Ok(())
}

/// Forward pass for one pixel. Returns the unclamped `B`-band output and the
/// activation tape.
pub fn forward_pixel<T: Real>(params: &NetworkParams<T>, rgb: &[T]) -> Result<(Vec<T>, Tape<T>)> {
    check_input(params, rgb)?;
    let mut tape = Tape::new(params);
    forward_into(params, rgb, &mut tape);
    Ok((tape.output().to_vec(), tape))
}

/// Loss `(1/B) * sum_b (out_b - target_b)^2` and its exact gradients.
pub fn backward_pixel<T: Real>(
    params: &NetworkParams<T>,
    rgb: &[T],
    target: &[T],
) -> Result<(T, Gradients<T>)> {
    check_input(params, rgb)?;
    if target.len() != params.output_bands() {
        return Err(Error::dim(format!(
            "target has {} bands, network outputs {}",
            target.len(),
            params.output_bands()
        )));
    }
    let mut tape = Tape::new(params);
    forward_into(params, rgb, &mut tape);
    let mut grads = Gradients::zeros_like(params);
    let mut bp = Backprop::new(&tape);
    let loss = backward_into(params, &tape, target, &mut grads, &mut bp);
    Ok((loss, grads))
}

/// How a network output value is stored in a cube.
#[inline]
pub(crate) fn materialize<T: Real>(v: T) -> f32 {
    v.as_f32().clamp(0.0, 1.0)
}

/// Pixels per forward pass when predicting images.
pub(crate) const PREDICT_BLOCK: usize = 256;

/// Predicts consecutive pixels: `rgb` holds triples, `out` receives `B` values
/// per pixel. Blocks are limited by the tape capacity.
pub(crate) fn predict_span<T: Real>(
    params: &NetworkParams<T>,
    rgb: &[f32],
    out: &mut [f32],
    tape: &mut Tape<T>,
) {
    let bands = params.output_bands();
    let cap = tape.capacity();
    let mut input = vec![T::zero(); 3 * cap];
    for (px, dst) in rgb.chunks(3 * cap).zip(out.chunks_mut(bands * cap)) {
        let input = &mut input[..px.len()];
        for (i, &v) in input.iter_mut().zip(px) {
            *i = T::of_f32(v);
        }
        forward_into(params, input, tape);
        for (d, &v) in dst.iter_mut().zip(tape.output()) {
            *d = materialize(v);
        }
    }
}

/// Applies the per-pixel network to every pixel of `rgb`.
pub fn predict_image<T: Real>(params: &NetworkParams<T>, rgb: &RgbImage) -> Result<SpectralCube> {
    if params.spec.input_bands != 3 {
        return Err(Error::dim("image prediction needs a 3-channel network"));
    }
    let mut out = vec![0.0f32; rgb.pixels() * params.output_bands()];
    let mut tape = Tape::with_capacity(params, PREDICT_BLOCK);
    predict_span(params, rgb.data(), &mut out, &mut tape);
    SpectralCube::from_unclamped(rgb.width(), rgb.height(), params.grid.clone(), out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn random_params(spec: ArchitectureSpec, seed: u64) -> NetworkParams<f64> {
        let mut p = NetworkParams::<f64>::init(spec, seed).unwrap();
        // non-zero biases so their gradients are exercised too
        let mut state = seed.wrapping_add(17);
        for l in p.layers_mut() {
            for b in &mut l.biases {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1);
                *b = ((state >> 33) as f64 / (1u64 << 31) as f64 - 0.5) * 0.2;
            }
        }
        p
    }

    #[test]
    fn zero_network_outputs_zero() {
        let p = NetworkParams::<f64>::zeros(ArchitectureSpec::default()).unwrap();
        let (out, _) = forward_pixel(&p, &[0.3, 0.6, 0.9]).unwrap();
        assert_eq!(out, vec![0.0; 24]);
    }

    #[test]
    fn default_output_has_24_bands() {
        let p = NetworkParams::<f32>::init(ArchitectureSpec::default(), 1).unwrap();
        let (out, tape) = forward_pixel(&p, &[0.2, 0.4, 0.1]).unwrap();
        assert_eq!(out.len(), 24);
        let lens: Vec<usize> = (0..=tape.layer_count()).map(|n| tape.activations(n).len()).collect();
        assert_eq!(lens, vec![3, 32 * 6, 32 * 12, 32 * 24, 24, 32 * 24, 32 * 24, 24]);
    }

    #[test]
    fn wrong_input_length() {
        let p = NetworkParams::<f64>::zeros(ArchitectureSpec::default()).unwrap();
        assert!(matches!(forward_pixel(&p, &[0.1, 0.2]), Err(Error::Dimension(_))));
    }

    #[test]
    fn identity_mode_is_the_assembled_linear_map() {
        let spec = ArchitectureSpec::with_width(6).identity_activation();
        let mut p = random_params(spec, 3);
        for l in p.layers_mut() {
            l.biases.fill(0.0);
        }
        // probe with basis vectors to assemble the B x 3 matrix
        let cols: Vec<Vec<f64>> = (0..3)
            .map(|k| {
                let mut e = [0.0; 3];
                e[k] = 1.0;
                forward_pixel(&p, &e).unwrap().0
            })
            .collect();
        let x = [0.25, -0.5, 0.75];
        let (out, _) = forward_pixel(&p, &x).unwrap();
        for b in 0..24 {
            let want: f64 = (0..3).map(|k| cols[k][b] * x[k]).sum();
            assert!((out[b] - want).abs() < 1e-12);
        }
    }

    #[test]
    fn linear_mode_homogeneity() {
        let spec = ArchitectureSpec::with_width(5).identity_activation();
        let mut p = random_params(spec, 9);
        for l in p.layers_mut() {
            l.biases.fill(0.0);
        }
        let x = [0.3, 0.1, 0.7];
        let (y, _) = forward_pixel(&p, &x).unwrap();
        let (y2, _) = forward_pixel(&p, &x.map(|v| v * 2.5)).unwrap();
        for (a, b) in y.iter().zip(&y2) {
            assert!((2.5 * a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn perfect_prediction_has_zero_loss_and_gradient() {
        let p = random_params(ArchitectureSpec::with_width(4), 5);
        let x = [0.4, 0.5, 0.6];
        let (target, _) = forward_pixel(&p, &x).unwrap();
        let (loss, grads) = backward_pixel(&p, &x, &target).unwrap();
        assert_eq!(loss, 0.0);
        assert!(grads.iter().all(|&g| g == 0.0));
    }

    #[test]
    fn zero_network_loss_and_fuse_bias_gradient() {
        let spec = ArchitectureSpec::default();
        let p = NetworkParams::<f64>::zeros(spec.clone()).unwrap();
        let target: Vec<f64> = (0..24).map(|b| 0.1 + 0.02 * b as f64).collect();
        let (loss, grads) = backward_pixel(&p, &[0.2, 0.3, 0.4], &target).unwrap();
        let norm2: f64 = target.iter().map(|t| t * t).sum();
        assert!((loss - norm2 / 24.0).abs() < 1e-15);
        let mean: f64 = target.iter().sum::<f64>() / 24.0;
        let fuse_bias = grads.layers[spec.fuse_index()].biases[0];
        assert!((fuse_bias + 2.0 * mean).abs() < 1e-14);
        // independent check by central differences on that bias
        let h = 1e-5;
        let loss_at = |delta: f64| {
            let mut q = p.clone();
            q.layers_mut()[spec.fuse_index()].biases[0] += delta;
            backward_pixel(&q, &[0.2, 0.3, 0.4], &target).unwrap().0
        };
        let fd = (loss_at(h) - loss_at(-h)) / (2.0 * h);
        assert!((fd - fuse_bias).abs() < 1e-8);
    }

    #[test]
    fn gradients_match_finite_differences_small_net() {
        let p = random_params(ArchitectureSpec::with_width(3), 11);
        let x = [0.7, 0.2, 0.5];
        let target: Vec<f64> = (0..24).map(|b| (b as f64 * 0.3).sin().abs()).collect();
        let (_, grads) = backward_pixel(&p, &x, &target).unwrap();
        let analytic: Vec<f64> = grads.iter().copied().collect();
        let h = 1e-5;
        for (idx, &a) in analytic.iter().enumerate() {
            let eval = |delta: f64| {
                let mut q = p.clone();
                *q.iter_mut().nth(idx).unwrap() += delta;
                backward_pixel(&q, &x, &target).unwrap().0
            };
            let fd = (eval(h) - eval(-h)) / (2.0 * h);
            let rel = (a - fd).abs() / a.abs().max(fd.abs()).max(1e-4);
            assert!(rel < 1e-4, "param {idx}: analytic {a} vs fd {fd}");
        }
    }

    #[test]
    fn predict_image_single_pixel_matches_forward() {
        let p = NetworkParams::<f32>::init(ArchitectureSpec::default(), 2).unwrap();
        let img = RgbImage::new(1, 1, vec![0.3, 0.5, 0.2]).unwrap();
        let cube = predict_image(&p, &img).unwrap();
        let (out, _) = forward_pixel(&p, &[0.3, 0.5, 0.2]).unwrap();
        let expected: Vec<f32> = out.iter().map(|&v| materialize(v)).collect();
        assert_eq!(cube.pixel_spectrum(0, 0).unwrap(), &expected[..]);
    }

    #[test]
    fn block_prediction_matches_single_pixels_bitwise() {
        let p = NetworkParams::<f32>::init(ArchitectureSpec::default(), 6).unwrap();
        let data: Vec<f32> = (0..3 * 300).map(|k| ((k * 29 + 7) % 101) as f32 / 100.0).collect();
        let img = RgbImage::new(20, 15, data.clone()).unwrap();
        let cube = predict_image(&p, &img).unwrap();
        for (i, px) in data.chunks_exact(3).enumerate() {
            let (out, _) = forward_pixel(&p, px).unwrap();
            let expected: Vec<f32> = out.iter().map(|&v| materialize(v)).collect();
            assert_eq!(cube.pixel_spectrum(i / 20, i % 20).unwrap(), &expected[..]);
        }
    }

    #[test]
    fn block_gradients_are_the_sum_over_pixels() {
        let p = random_params(ArchitectureSpec::with_width(5), 8);
        let n = 7;
        let inputs: Vec<f64> = (0..3 * n).map(|k| ((k * 13 + 2) % 17) as f64 / 16.0).collect();
        let targets: Vec<f64> = (0..24 * n).map(|k| ((k * 7 + 3) % 23) as f64 / 22.0).collect();
        let mut tape = Tape::with_capacity(&p, n);
        forward_into(&p, &inputs, &mut tape);
        let mut grads = Gradients::zeros_like(&p);
        let mut bp = Backprop::new(&tape);
        let loss = backward_into(&p, &tape, &targets, &mut grads, &mut bp);
        let mut want_loss = 0.0;
        let mut want = Gradients::zeros_like(&p);
        for (x, t) in inputs.chunks(3).zip(targets.chunks(24)) {
            let (l, g) = backward_pixel(&p, x, t).unwrap();
            want_loss += l;
            want.add_assign(&g);
        }
        assert!((loss - want_loss).abs() < 1e-12);
        for (a, b) in grads.iter().zip(want.iter()) {
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
    }

    #[test]
    fn init_is_seeded() {
        let a = NetworkParams::<f32>::init(ArchitectureSpec::default(), 4).unwrap();
        let b = NetworkParams::<f32>::init(ArchitectureSpec::default(), 4).unwrap();
        let c = NetworkParams::<f32>::init(ArchitectureSpec::default(), 5).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert!(a.layers().iter().all(|l| l.biases.iter().all(|&b| b == 0.0)));
    }
}

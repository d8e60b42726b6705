//! Predicts a full frame with several workers and checks the result against
//! the single-pixel forward pass.

use rgb2msi::inference::predict_parallel;
use rgb2msi::network::{forward_pixel, predict_image, ArchitectureSpec, NetworkParams};
use rgb2msi::spectral::RgbImage;

fn main() -> rgb2msi::Result<()> {
    let params = NetworkParams::<f32>::init(ArchitectureSpec::default(), 3)?;
    let (w, h) = (64, 48);
    let data: Vec<f32> = (0..w * h * 3).map(|k| ((k * 7919) % 1000) as f32 / 1000.0).collect();
    let rgb = RgbImage::new(w, h, data)?;

    let reference = predict_image(&params, &rgb)?;
    for workers in [1, 2, 4, 8] {
        let cube = predict_parallel(&params, &rgb, workers)?;
        println!("workers {workers}: identical to serial = {}", cube == reference);
    }

    let px = rgb.pixel(17, 33)?;
    let (out, _) = forward_pixel(&params, &px)?;
    let single: Vec<f32> = out.iter().map(|v| v.clamp(0.0, 1.0)).collect();
    println!("pixel (17, 33) matches forward_pixel: {}", reference.pixel_spectrum(17, 33)? == &single[..]);
    Ok(())
}

//! The two spectral-axis convolutions on tiny inputs.

use rgb2msi::network::{spectral_conv, spectral_transposed_conv};

fn main() -> rgb2msi::Result<()> {
    // one feature, length 3 -> length 6 with kernel 4, stride 2, pad 1
    let y = spectral_transposed_conv(&[1.0f64, 0.0, 0.0], 1, &[1.0, 2.0, 3.0, 4.0], &[0.0], 2, 1)?;
    println!("transposed delta response: {y:?}");

    let x = [1.0f64, 2.0, 3.0, 4.0, 5.0];
    println!("box filter:  {:?}", spectral_conv(&x, 1, &[1.0, 1.0, 1.0], &[0.0], 1)?);
    println!("derivative:  {:?}", spectral_conv(&x, 1, &[-0.5, 0.0, 0.5], &[0.0], 1)?);

    // two input features mixed into one output
    let x2 = [1.0f64, 1.0, 1.0, 0.0, 1.0, 0.0];
    let y2 = spectral_conv(&x2, 2, &[0.0, 1.0, 0.0, 0.0, 2.0, 0.0], &[0.5], 1)?;
    println!("two-feature mix: {y2:?}");
    Ok(())
}

//! One forward and backward pass through the default network, with a
//! finite-difference check on a few parameters.

use rgb2msi::network::{backward_pixel, forward_pixel, ArchitectureSpec, NetworkParams};

fn main() -> rgb2msi::Result<()> {
    let params = NetworkParams::<f64>::init(ArchitectureSpec::default(), 42)?;
    println!("parameters: {}", params.param_count());
    let rgb = [0.42, 0.31, 0.18];
    let (out, tape) = forward_pixel(&params, &rgb)?;
    let active = tape.relu_pattern(&params).iter().filter(|&&on| on).count();
    println!("24-band output head: {:.4?}", &out[..6]);
    println!("active rectified units: {active}");

    let target: Vec<f64> = (0..24).map(|b| 0.2 + 0.01 * b as f64).collect();
    let (loss, grads) = backward_pixel(&params, &rgb, &target)?;
    println!("loss {loss:.6}");

    let analytic: Vec<f64> = grads.iter().copied().collect();
    let h = 1e-5;
    for idx in [0, 100, 1000, params.param_count() - 1] {
        let at = |d: f64| {
            let mut p = params.clone();
            *p.iter_mut().nth(idx).unwrap() += d;
            backward_pixel(&p, &rgb, &target).map(|r| r.0)
        };
        let fd = (at(h)? - at(-h)?) / (2.0 * h);
        println!("param {idx:>5}: analytic {:+.6e}  finite difference {fd:+.6e}", analytic[idx]);
    }
    Ok(())
}

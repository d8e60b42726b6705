//! Times 256x192 frame prediction for one and all available workers.

use rgb2msi::inference::{benchmark, BenchOptions, BENCH_HEADER};
use rgb2msi::network::{ArchitectureSpec, NetworkParams};

fn main() -> rgb2msi::Result<()> {
    let params = NetworkParams::<f32>::init(ArchitectureSpec::default(), 0)?;
    let cores = std::thread::available_parallelism().map_or(1, |n| n.get());
    println!("{BENCH_HEADER}");
    let mut fps = Vec::new();
    for workers in [1, cores] {
        let report = benchmark(&params, &BenchOptions { iterations: 5, workers, ..Default::default() })?;
        println!("{}", report.csv_row());
        fps.push(report.fps);
        if cores == 1 {
            break;
        }
    }
    if let [one, all] = fps[..] {
        println!("# speedup with {cores} workers: {:.2}x", all / one);
    }
    println!("# reference GPU timing: ~90 ms per frame (~11 FPS)");
    Ok(())
}

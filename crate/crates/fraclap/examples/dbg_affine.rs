use fraclap::linear::ExteriorDatum;
use fraclap::wos::{wos_estimate, WosConfig};
use fraclap::{FracParams, Point};

fn main() {
    let pr = FracParams::new(1, 0.5).unwrap();
    let g = ExteriorDatum::SigmaKernel { sigma: 0.25 };
    let expect = pr.kernel_const_c();
    for seed in [1u64, 2, 3, 4, 5, 6] {
        let cfg = WosConfig { n_paths: 200_000, seed, ..Default::default() };
        let est = wos_estimate(&pr, &g, &Point::origin(1), &cfg).unwrap();
        println!("seed {seed}: mean {:.6} ± {:.6}  z = {:+.2}", est.mean, est.stderr, (est.mean - expect)/est.stderr);
    }
    println!("expect {expect:.6}");
}

//! Iterations needed as `k` grows, on a synthetic image. Printed, not asserted:
//! the expectation that denser graphs converge faster is empirical.

use lpseg::Threaded;
use lpseg_core::pipeline::segment;
use lpseg_core::seeds::decode_trimap;
use lpseg_core::{Lambda, RgbImage, SegParams};
use rand::{Rng, SeedableRng};

#[test]
fn iterations_by_k_report() {
    let (w, h) = (48, 48);
    let mut rng = rand::rngs::StdRng::seed_from_u64(5);
    // A soft diagonal blend with noise, so color changes gradually.
    let px = (0..w * h)
        .map(|i| {
            let t = ((i % w + i / w) as f64 / (w + h) as f64 + rng.random_range(-0.1..0.1)).clamp(0.0, 1.0);
            [t, 0.3, 1.0 - t]
        })
        .collect();
    let image = RgbImage::new(w, h, px).unwrap();
    let mut trimap = vec![128u8; w * h];
    for s in 0..6 {
        trimap[(s * 5 + 2) * w + s * 3 + 1] = 64;
        trimap[(h - 3 - s * 5) * w + w - 2 - s * 3] = 255;
    }
    let seeds = decode_trimap(w, h, &trimap).unwrap();
    let exec = Threaded::available();
    let mut line = Vec::new();
    for k in [5, 20, 80] {
        let r = segment(&image, &seeds, &SegParams::new(k, Lambda::ones()).unwrap(), &exec).unwrap();
        assert!(r.converged && r.iterations < 10_000);
        line.push(format!("k={k}: {} iterations", r.iterations));
    }
    println!("iterations by k: {}", line.join(", "));
}

use cavityband_core::numerics::Fft;
use cavityband_core::Complex64;
use std::time::Instant;

fn main() {
    for n in [512usize, 2048, 8192, 16384] {
        let plan = Fft::new(n).unwrap();
        let mut data: Vec<Complex64> =
            (0..n).map(|i| Complex64::new((i as f64).sin(), (i as f64).cos())).collect();
        let reps = 200_000_000 / (n * 14);
        let start = Instant::now();
        for _ in 0..reps {
            plan.forward(&mut data);
            plan.inverse(&mut data);
        }
        let per = start.elapsed().as_secs_f64() / (2 * reps) as f64;
        println!("n={n}: {:.1} us per transform ({reps} reps)", per * 1e6);
    }
}

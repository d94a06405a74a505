// Scratch probe; deleted before delivery.
use poprec::analysis::lecam_pair;
use poprec::model::ChannelModel;
use poprec::simharness::{fit_rate_slope, run_weight_experiment, EstimatorKind, SummaryRow};
use std::time::Instant;

fn hellinger_matched_delta(eps: f64, target_h2: f64) -> (f64, usize) {
    // Bisect separation so the constructed pair's Hellinger^2 hits target.
    let (mut lo, mut hi) = (1e-4f64, 0.17f64);
    for _ in 0..40 {
        let mid = 0.5 * (lo + hi);
        let l = (1.0 / mid).ln();
        let d = ((2.0 * eps / (1.0 - eps)) * l * l).ceil().min(200.0) as usize;
        let h2 = lecam_pair(mid, eps, d).unwrap().hellinger_sq;
        if h2 > target_h2 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let delta = 0.5 * (lo + hi);
    let l = (1.0 / delta).ln();
    let d = ((2.0 * eps / (1.0 - eps)) * l * l).ceil().min(200.0) as usize;
    (delta, d)
}

#[test]
fn probe_matched_hellinger_slope() {
    let eps = 0.75;
    let t0 = Instant::now();
    let mut rows = Vec::new();
    for &n in &[1_000u64, 10_000, 100_000, 1_000_000] {
        let (delta_n, d) = hellinger_matched_delta(eps, 0.5 / n as f64);
        let pair = lecam_pair(delta_n, eps, d).unwrap();
        let mut worst = 0.0f64;
        for pi in [&pair.pi, &pair.pi_prime] {
            let res = run_weight_experiment(
                ChannelModel::lossy(eps).unwrap(),
                pi,
                &[n],
                300,
                EstimatorKind::Lp,
                20260810,
            )
            .unwrap();
            worst = worst.max(res.summary[0].mse);
        }
        println!(
            "n={n}: delta_n={delta_n:.5} d={d} h2={:.3e} worst mse={worst:.4e} vs delta^2={:.3e}",
            pair.hellinger_sq,
            delta_n * delta_n
        );
        rows.push(SummaryRow { n, mse: worst, stderr: 0.0, certificate_upper: 0.0 });
    }
    let slope = fit_rate_slope(&rows).unwrap();
    println!("hellinger-matched slope at eps=0.75: {slope:.4} ({:?})", t0.elapsed());
}

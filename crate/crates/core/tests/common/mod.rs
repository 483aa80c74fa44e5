#![allow(dead_code)]

use krein_core::scalar::Cplx;
use krein_core::Waterbag;
use rand::Rng;

/// Random waterbag with `m` contours on `[-3, 3]`.
///
/// Interior levels are drawn from `[0.1, 1]`, with an occasional empty gap,
/// and neighbouring levels always differ by at least 0.05.
pub fn random_waterbag(rng: &mut impl Rng, m: usize) -> Waterbag {
    loop {
        let mut p: Vec<f64> = (0..m).map(|_| rng.random_range(-3.0..3.0)).collect();
        p.sort_by(f64::total_cmp);
        if p.windows(2).any(|w| w[1] - w[0] < 0.05) {
            continue;
        }
        let mut levels: Vec<f64> = vec![0.0];
        for _ in 1..m {
            let f = if rng.random_bool(0.2) {
                0.0
            } else {
                rng.random_range(0.1..1.0)
            };
            levels.push(f);
        }
        levels.push(0.0);
        if levels.windows(2).any(|w| (w[1] - w[0]).abs() < 0.05) {
            continue;
        }
        if let Ok(wb) = Waterbag::new(p, levels) {
            return wb;
        }
    }
}

/// Minimum-cost matching distance between two complex sets of equal size.
pub fn matched_distance(a: &[Cplx<f64>], b: &[Cplx<f64>]) -> f64 {
    assert_eq!(a.len(), b.len());
    let cost: Vec<Vec<f64>> = a
        .iter()
        .map(|x| b.iter().map(|y| (x - y).norm()).collect())
        .collect();
    let assign = krein_core::pairing::hungarian(&cost);
    assign
        .iter()
        .enumerate()
        .map(|(i, j)| cost[i][*j])
        .fold(0.0, f64::max)
}

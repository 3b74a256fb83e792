use crate::rng::CounterRng;

/// `n` Latin-hypercube points in the box `ranges`: each coordinate's `n`
/// strata are each hit exactly once, with a uniform jitter inside the stratum.
///
/// Draw order: for each dimension, a Fisher-Yates shuffle of `0..n`
/// (`n - 1` draws, `j = below(i + 1)` for `i = n-1 .. 1`), then `n` jitters.
pub fn latin_hypercube(n: usize, ranges: &[(f64, f64)], seed: u64) -> Vec<Vec<f64>> {
    let mut rng = CounterRng::new(seed);
    let mut points = vec![vec![0.0; ranges.len()]; n];
    for (d, &(lo, hi)) in ranges.iter().enumerate() {
        let mut strata: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            let j = rng.below(i as u64 + 1) as usize;
            strata.swap(i, j);
        }
        for (point, stratum) in points.iter_mut().zip(strata) {
            let t = (stratum as f64 + rng.next_unit()) / n as f64;
            point[d] = lo + t * (hi - lo);
        }
    }
    points
}

//! Euclidean projection onto the power polytope
//! `{x : x_1 >= x_2 >= ... >= x_K >= 0, Σ β_k x_k <= B}`.
//!
//! For a fixed budget multiplier `λ`, the projection onto the ordered
//! nonnegative cone of `y - λβ` is the clipped antitonic (nonincreasing)
//! regression, computed by pool-adjacent-violators. The multiplier is then
//! found by bisection on the budget.

/// Nonincreasing least-squares fit of `z`, written into `out`.
pub(crate) fn antitonic_regression(z: &[f64], out: &mut [f64]) {
    // blocks of (sum, count)
    let mut blocks: Vec<(f64, usize)> = Vec::with_capacity(z.len());
    for &v in z {
        let mut sum = v;
        let mut count = 1;
        while let Some(&(psum, pcount)) = blocks.last() {
            // merge while the previous block's mean is below the current one
            if psum * (count as f64) < sum * (pcount as f64) {
                sum += psum;
                count += pcount;
                blocks.pop();
            } else {
                break;
            }
        }
        blocks.push((sum, count));
    }
    let mut i = 0;
    for (sum, count) in blocks {
        let mean = sum / count as f64;
        out[i..i + count].fill(mean);
        i += count;
    }
}

fn cone_projection(y: &[f64], beta: &[f64], lambda: f64, out: &mut [f64]) {
    for ((o, &yk), &bk) in out.iter_mut().zip(y).zip(beta) {
        *o = yk - lambda * bk;
    }
    let z = out.to_vec();
    antitonic_regression(&z, out);
    for o in out.iter_mut() {
        *o = o.max(0.0);
    }
}

fn weighted_sum(x: &[f64], beta: &[f64]) -> f64 {
    x.iter().zip(beta).map(|(a, b)| a * b).sum()
}

/// Projects `y` onto the polytope. The result never exceeds the budget.
pub fn project_onto_polytope(y: &[f64], beta: &[f64], budget: f64) -> Vec<f64> {
    let mut x = vec![0.0; y.len()];
    cone_projection(y, beta, 0.0, &mut x);
    if weighted_sum(&x, beta) <= budget {
        return x;
    }
    let mut lo = 0.0;
    let mut hi = y
        .iter()
        .zip(beta)
        .map(|(&v, &b)| v.max(0.0) / b)
        .fold(0.0, f64::max);
    let mut trial = vec![0.0; y.len()];
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        cone_projection(y, beta, mid, &mut trial);
        if weighted_sum(&trial, beta) > budget {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    cone_projection(y, beta, hi, &mut x);
    x
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn pava_pools_violators() {
        let mut out = [0.0; 4];
        antitonic_regression(&[3.0, 1.0, 2.0, 0.0], &mut out);
        assert_eq!(out, [3.0, 1.5, 1.5, 0.0]);
        antitonic_regression(&[-1.0, 2.0, 0.0, 5.0], &mut out);
        assert_eq!(out, [1.5; 4]);
    }

    #[test]
    fn projection_small_cases() {
        assert_eq!(
            project_onto_polytope(&[-1.0, 2.0], &[1.0, 2.0], 10.0),
            vec![0.5, 0.5]
        );
        assert_eq!(
            project_onto_polytope(&[-2.0, 1.0], &[1.0, 2.0], 10.0),
            vec![0.0, 0.0]
        );
        let x = project_onto_polytope(&[5.0, 0.0], &[1.0, 2.0], 1.0);
        assert!((x[0] - 1.0).abs() < 1e-12 && x[1] == 0.0);
    }

    fn feasible(x: &[f64], beta: &[f64], budget: f64) -> bool {
        x.windows(2).all(|w| w[0] >= w[1])
            && x.iter().all(|&v| v >= 0.0)
            && weighted_sum(x, beta) <= budget * (1.0 + 1e-12)
    }

    proptest! {
        // Variational characterization: (y - x)·(z - x) <= 0 for all feasible z.
        #[test]
        fn projection_is_optimal(
            y in proptest::collection::vec(-3.0f64..3.0, 1..6),
            r in 0.1f64..3.0,
            budget in 0.1f64..5.0,
            seeds in proptest::collection::vec(proptest::collection::vec(0.0f64..1.0, 6), 20),
        ) {
            let k = y.len();
            let beta: Vec<f64> = (0..k).map(|i| (1.0 + r).powi(i as i32)).collect();
            let x = project_onto_polytope(&y, &beta, budget);
            prop_assert!(feasible(&x, &beta, budget));
            for seed in seeds {
                // random feasible point: sorted descending, scaled into the budget
                let mut z: Vec<f64> = seed[..k].to_vec();
                z.sort_by(|a, b| b.total_cmp(a));
                let w = weighted_sum(&z, &beta);
                if w > budget {
                    z.iter_mut().for_each(|v| *v *= budget / w);
                }
                let inner: f64 = (0..k).map(|i| (y[i] - x[i]) * (z[i] - x[i])).sum();
                prop_assert!(inner <= 1e-9, "inner product {inner}");
            }
        }
    }
}

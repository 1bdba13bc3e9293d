use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::MlpParams;

const POWER_ITERATIONS: usize = 100;
const POWER_TOL: f64 = 1e-10;
/// Lipschitz constant of the logistic sigmoid.
const SIGMOID_LIP: f64 = 0.25;

/// Largest singular value of `w` by power iteration on `WᵀW` from a fixed
/// pseudo-random start.
pub fn spectral_norm(w: &Array2<f64>) -> f64 {
    if w.is_empty() {
        return 0.0;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut v: Array1<f64> = Array1::from_shape_simple_fn(w.ncols(), || rng.random_range(-1.0..1.0));
    v /= v.dot(&v).sqrt();
    let mut sigma = 0.0;
    for _ in 0..POWER_ITERATIONS {
        let u = w.dot(&v);
        let next = w.t().dot(&u);
        let norm = next.dot(&next).sqrt();
        if norm == 0.0 {
            return 0.0;
        }
        // ‖WᵀWv‖ → σ² as v aligns with the top right singular vector.
        let estimate = norm.sqrt();
        v = next / norm;
        let done = (estimate - sigma).abs() <= POWER_TOL * estimate;
        sigma = estimate;
        if done {
            break;
        }
    }
    sigma
}

/// `K̂ = Π σ_max(W_l) · (1/4)^(hidden layers)`, an upper bound on the
/// Lipschitz constant of `h` with respect to Euclidean norms.
pub fn lipschitz_upper_bound(mlp: &MlpParams) -> f64 {
    let hidden = mlp.num_layers() - 1;
    mlp.weights().iter().map(spectral_norm).product::<f64>() * SIGMOID_LIP.powi(hidden as i32)
}

#[cfg(test)]
mod tests {
    use nalgebra::DMatrix;
    use ndarray::array;

    use super::*;

    #[test]
    fn scaled_identity() {
        let w = Array2::from_diag(&Array1::from_elem(4, 3.0));
        let mlp = MlpParams::from_parts(vec![w.clone()], vec![Array1::zeros(4)]).unwrap();
        assert!((lipschitz_upper_bound(&mlp) - 3.0).abs() < 1e-12);
        let two = MlpParams::from_parts(
            vec![Array2::eye(4), w],
            vec![Array1::zeros(4), Array1::zeros(4)],
        )
        .unwrap();
        assert!((lipschitz_upper_bound(&two) - 0.75).abs() < 1e-12);
    }

    #[test]
    fn power_iteration_matches_svd() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..30 {
            let (r, c) = (rng.random_range(1..40), rng.random_range(1..40));
            let w = Array2::from_shape_simple_fn((r, c), || rng.random_range(-1.0..1.0));
            let svd = DMatrix::from_row_slice(r, c, w.as_slice().unwrap()).singular_values();
            let exact = svd.max();
            let got = spectral_norm(&w);
            assert!((got - exact).abs() <= 1e-6 * exact, "{got} vs {exact}");
        }
        assert_eq!(spectral_norm(&array![[0.0, 0.0]]), 0.0);
    }

    #[test]
    fn bound_dominates_random_slopes() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for seed in 0..3 {
            let mlp = MlpParams::init(&[6, 16, 64, 10], seed).unwrap();
            let k = lipschitz_upper_bound(&mlp);
            for _ in 0..2000 {
                let p: Vec<f64> = (0..6).map(|_| rng.random_range(-2.0..2.0)).collect();
                let q: Vec<f64> = p.iter().map(|x| x + rng.random_range(-0.1..0.1)).collect();
                let (hp, hq) = (mlp.forward(&p).unwrap(), mlp.forward(&q).unwrap());
                let num = hp.iter().zip(&hq).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
                let den = p.iter().zip(&q).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
                assert!(num <= k * den);
            }
        }
    }
}

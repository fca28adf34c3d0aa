//! Simulated binary crossover and polynomial mutation.

use rand::Rng;

/// SBX spread factor for a uniform draw `u ∈ [0, 1)`.
pub fn sbx_beta(u: f64, eta: f64) -> f64 {
    if u < 0.5 {
        (2.0 * u).powf(1.0 / (eta + 1.0))
    } else {
        (1.0 / (2.0 * (1.0 - u))).powf(1.0 / (eta + 1.0))
    }
}

/// Unclipped SBX children of one variable.
pub fn sbx_children(p1: f64, p2: f64, beta: f64) -> (f64, f64) {
    (
        0.5 * ((1.0 + beta) * p1 + (1.0 - beta) * p2),
        0.5 * ((1.0 - beta) * p1 + (1.0 + beta) * p2),
    )
}

/// Crossover of two parents. With probability `prob` the pair is recombined,
/// each variable independently with probability 1/2. Variables on which the
/// parents agree are copied unchanged.
pub fn sbx<R: Rng + ?Sized>(
    p1: &[f64],
    p2: &[f64],
    bounds: &[(f64, f64)],
    prob: f64,
    eta: f64,
    rng: &mut R,
) -> (Vec<f64>, Vec<f64>) {
    let mut c1 = p1.to_vec();
    let mut c2 = p2.to_vec();
    if rng.gen::<f64>() >= prob {
        return (c1, c2);
    }
    for i in 0..p1.len() {
        if rng.gen::<f64>() >= 0.5 {
            continue;
        }
        let beta = sbx_beta(rng.gen::<f64>(), eta);
        if p1[i] == p2[i] {
            continue;
        }
        let (a, b) = sbx_children(p1[i], p2[i], beta);
        let (lo, hi) = bounds[i];
        c1[i] = a.clamp(lo, hi);
        c2[i] = b.clamp(lo, hi);
    }
    (c1, c2)
}

/// Relative PM perturbation for a uniform draw `u ∈ [0, 1)`.
pub fn pm_delta(u: f64, eta: f64) -> f64 {
    if u < 0.5 {
        (2.0 * u).powf(1.0 / (eta + 1.0)) - 1.0
    } else {
        1.0 - (2.0 * (1.0 - u)).powf(1.0 / (eta + 1.0))
    }
}

/// Mutate each variable with probability `prob`.
pub fn pm<R: Rng + ?Sized>(genome: &mut [f64], bounds: &[(f64, f64)], prob: f64, eta: f64, rng: &mut R) {
    for (x, (lo, hi)) in genome.iter_mut().zip(bounds) {
        if rng.gen::<f64>() >= prob {
            continue;
        }
        let delta = pm_delta(rng.gen::<f64>(), eta);
        *x = (*x + delta * (hi - lo)).clamp(*lo, *hi);
    }
}

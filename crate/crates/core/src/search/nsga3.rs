//! Reference-direction survival.

use rand::Rng;

use super::sorting::fast_nondominated_sort;

const SMALL: f64 = 1e-10;

/// Pick `n_survive` indices of `objs` by non-dominated rank, then by niche
/// preservation around `ref_dirs` for the last admitted front.
pub fn survival<R: Rng + ?Sized>(
    objs: &[Vec<f64>],
    ref_dirs: &[Vec<f64>],
    n_survive: usize,
    rng: &mut R,
) -> Vec<usize> {
    let fronts = fast_nondominated_sort(objs);
    let mut chosen: Vec<usize> = Vec::new();
    let mut last: Vec<usize> = Vec::new();
    for f in &fronts {
        if chosen.len() + f.len() <= n_survive {
            chosen.extend(f);
            if chosen.len() == n_survive {
                return chosen;
            }
        } else {
            last = f.clone();
            break;
        }
    }
    if last.is_empty() {
        return chosen;
    }
    let considered: Vec<usize> = chosen.iter().chain(&last).copied().collect();
    let normalized = normalize(objs, &considered, &fronts[0]);
    let (niche, dist): (Vec<usize>, Vec<f64>) = considered
        .iter()
        .map(|i| associate(&normalized[*i], ref_dirs))
        .unzip();
    let mut count = vec![0usize; ref_dirs.len()];
    for k in 0..chosen.len() {
        count[niche[k]] += 1;
    }
    // candidates of the last front: (pool index, niche, distance)
    let mut pending: Vec<(usize, usize, f64)> = (chosen.len()..considered.len())
        .map(|k| (considered[k], niche[k], dist[k]))
        .collect();
    let mut excluded = vec![false; ref_dirs.len()];
    while chosen.len() < n_survive {
        let min = (0..ref_dirs.len())
            .filter(|j| !excluded[*j])
            .map(|j| count[j])
            .min()
            .expect("some niche has pending members");
        let candidates: Vec<usize> = (0..ref_dirs.len())
            .filter(|j| !excluded[*j] && count[*j] == min)
            .collect();
        let j = candidates[rng.gen_range(0..candidates.len())];
        let members: Vec<usize> = (0..pending.len()).filter(|k| pending[*k].1 == j).collect();
        if members.is_empty() {
            excluded[j] = true;
            continue;
        }
        let pick = if count[j] == 0 {
            *members
                .iter()
                .min_by(|a, b| pending[**a].2.total_cmp(&pending[**b].2).then(a.cmp(b)))
                .unwrap()
        } else {
            members[rng.gen_range(0..members.len())]
        };
        chosen.push(pending[pick].0);
        pending.remove(pick);
        count[j] += 1;
    }
    chosen
}

/// Translate by the ideal point and scale by the hyperplane intercepts of the
/// extreme points, falling back to the first-front nadir when the intercepts
/// degenerate. Returns one row per pool index (rows outside `considered` are
/// left empty).
fn normalize(objs: &[Vec<f64>], considered: &[usize], first_front: &[usize]) -> Vec<Vec<f64>> {
    let m = objs[considered[0]].len();
    let ideal: Vec<f64> = (0..m)
        .map(|k| considered.iter().map(|i| objs[*i][k]).fold(f64::INFINITY, f64::min))
        .collect();
    let translated = |i: usize| -> Vec<f64> { (0..m).map(|k| objs[i][k] - ideal[k]).collect() };
    let mut extremes: Vec<Vec<f64>> = Vec::with_capacity(m);
    for axis in 0..m {
        let asf = |v: &[f64]| {
            (0..m)
                .map(|k| v[k] / if k == axis { 1.0 } else { 1e-6 })
                .fold(f64::NEG_INFINITY, f64::max)
        };
        let best = considered
            .iter()
            .copied()
            .min_by(|a, b| asf(&translated(*a)).total_cmp(&asf(&translated(*b))).then(a.cmp(b)))
            .unwrap();
        extremes.push(translated(best));
    }
    let intercepts = hyperplane_intercepts(&extremes).unwrap_or_else(|| {
        (0..m)
            .map(|k| {
                let front_max = first_front.iter().map(|i| objs[*i][k]).fold(f64::NEG_INFINITY, f64::max) - ideal[k];
                if front_max > SMALL {
                    return front_max;
                }
                let all_max = considered.iter().map(|i| objs[*i][k]).fold(f64::NEG_INFINITY, f64::max) - ideal[k];
                if all_max > SMALL {
                    all_max
                } else {
                    1.0
                }
            })
            .collect()
    });
    let mut out = vec![Vec::new(); objs.len()];
    for &i in considered {
        out[i] = translated(i).iter().zip(&intercepts).map(|(v, a)| v / a).collect();
    }
    out
}

/// Intercepts of the hyperplane through `points` (one per axis), or `None`
/// when the system is singular or an intercept is not positive.
fn hyperplane_intercepts(points: &[Vec<f64>]) -> Option<Vec<f64>> {
    let m = points.len();
    // solve points · a = 1; intercept k is 1 / a_k
    let mut aug: Vec<Vec<f64>> = points
        .iter()
        .map(|row| {
            let mut r = row.clone();
            r.push(1.0);
            r
        })
        .collect();
    for col in 0..m {
        let pivot = (col..m).max_by(|a, b| aug[*a][col].abs().total_cmp(&aug[*b][col].abs()))?;
        if aug[pivot][col].abs() < SMALL {
            return None;
        }
        aug.swap(col, pivot);
        for r in 0..m {
            if r != col {
                let f = aug[r][col] / aug[col][col];
                let pivot_row = aug[col].clone();
                for (x, p) in aug[r].iter_mut().zip(&pivot_row).skip(col) {
                    *x -= f * p;
                }
            }
        }
    }
    let mut out = Vec::with_capacity(m);
    for (k, row) in aug.iter().enumerate() {
        let a = row[m] / row[k];
        let intercept = 1.0 / a;
        if !(intercept.is_finite() && intercept > SMALL) {
            return None;
        }
        out.push(intercept);
    }
    Some(out)
}

/// Closest reference direction by perpendicular distance.
fn associate(v: &[f64], ref_dirs: &[Vec<f64>]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (j, w) in ref_dirs.iter().enumerate() {
        let ww: f64 = w.iter().map(|x| x * x).sum();
        let t = v.iter().zip(w).map(|(a, b)| a * b).sum::<f64>() / ww;
        let d = v
            .iter()
            .zip(w)
            .map(|(a, b)| (a - t * b).powi(2))
            .sum::<f64>()
            .sqrt();
        if d < best.1 {
            best = (j, d);
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::super::sorting::das_dennis;
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn intercepts_of_unit_simplex() {
        let pts = vec![vec![2.0, 0.0, 0.0], vec![0.0, 3.0, 0.0], vec![0.0, 0.0, 4.0]];
        let a = hyperplane_intercepts(&pts).unwrap();
        for (x, y) in a.iter().zip([2.0, 3.0, 4.0]) {
            assert!((x - y).abs() < 1e-12);
        }
        assert!(hyperplane_intercepts(&[vec![1.0, 1.0], vec![1.0, 1.0]]).is_none());
    }

    #[test]
    fn association() {
        let refs = das_dennis(2, 1);
        assert_eq!(associate(&[0.9, 0.1], &refs).0, 0);
        assert_eq!(associate(&[0.1, 0.9], &refs).0, 1);
    }

    #[test]
    fn survival_keeps_whole_fronts_first() {
        let objs = vec![vec![0.0, 1.0], vec![1.0, 0.0], vec![2.0, 2.0], vec![3.0, 3.0]];
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let s = survival(&objs, &das_dennis(2, 1), 3, &mut rng);
        assert_eq!(s, vec![0, 1, 2]);
    }

    #[test]
    fn survival_spreads_over_niches() {
        // four mutually non-dominated points, two near each axis
        let objs = vec![vec![0.0, 1.0], vec![0.1, 0.9], vec![0.9, 0.1], vec![1.0, 0.0]];
        let refs = das_dennis(2, 1);
        for seed in 0..20 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut s = survival(&objs, &refs, 2, &mut rng);
            s.sort();
            // one survivor per niche, the one closest to its direction
            assert_eq!(s, vec![0, 3]);
        }
    }

    #[test]
    fn survival_size_and_uniqueness() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let m = rng.gen_range(1..5);
            let n = rng.gen_range(2..30);
            let objs: Vec<Vec<f64>> = (0..n).map(|_| (0..m).map(|_| rng.gen_range(0.0..5.0)).collect()).collect();
            let refs = das_dennis(m, 1);
            let k = rng.gen_range(1..=n);
            let mut s = survival(&objs, &refs, k, &mut rng);
            assert_eq!(s.len(), k);
            s.sort();
            s.dedup();
            assert_eq!(s.len(), k);
        }
    }
}

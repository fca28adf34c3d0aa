//! Non-dominated sorting, crowding distance and reference directions.

/// `a` is no worse than `b` everywhere and strictly better somewhere.
pub fn dominates(a: &[f64], b: &[f64]) -> bool {
    let mut strict = false;
    for (x, y) in a.iter().zip(b) {
        if x > y {
            return false;
        }
        if x < y {
            strict = true;
        }
    }
    strict
}

/// Fronts of indices, best first; indices within a front are ascending.
pub fn fast_nondominated_sort(objs: &[Vec<f64>]) -> Vec<Vec<usize>> {
    let n = objs.len();
    let mut dominated_by: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut count = vec![0usize; n];
    let mut fronts: Vec<Vec<usize>> = Vec::new();
    let mut current = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            if dominates(&objs[i], &objs[j]) {
                dominated_by[i].push(j);
                count[j] += 1;
            } else if dominates(&objs[j], &objs[i]) {
                dominated_by[j].push(i);
                count[i] += 1;
            }
        }
    }
    for (i, c) in count.iter().enumerate() {
        if *c == 0 {
            current.push(i);
        }
    }
    while !current.is_empty() {
        let mut next = Vec::new();
        for &i in &current {
            for &j in &dominated_by[i] {
                count[j] -= 1;
                if count[j] == 0 {
                    next.push(j);
                }
            }
        }
        next.sort_unstable();
        fronts.push(std::mem::replace(&mut current, next));
    }
    fronts
}

/// Crowding distance of each member of a front. Boundary members of every
/// objective get `+∞`; objectives with zero range contribute nothing.
#[allow(clippy::needless_range_loop)]
pub fn crowding_distance(front: &[Vec<f64>]) -> Vec<f64> {
    let n = front.len();
    let mut dist = vec![0.0; n];
    if n <= 2 {
        return vec![f64::INFINITY; n];
    }
    let m = front[0].len();
    let mut order: Vec<usize> = (0..n).collect();
    for k in 0..m {
        order.sort_by(|a, b| front[*a][k].total_cmp(&front[*b][k]).then(a.cmp(b)));
        let lo = front[order[0]][k];
        let hi = front[order[n - 1]][k];
        dist[order[0]] = f64::INFINITY;
        dist[order[n - 1]] = f64::INFINITY;
        let range = hi - lo;
        if range <= 0.0 || !range.is_finite() {
            continue;
        }
        for w in 1..n - 1 {
            let gap = front[order[w + 1]][k] - front[order[w - 1]][k];
            dist[order[w]] += gap / range;
        }
    }
    dist
}

/// Das–Dennis simplex lattice: every vector with coordinates in
/// `{0, 1/p, …, 1}` summing to one, in lexicographically descending order.
pub fn das_dennis(n_dim: usize, n_partitions: usize) -> Vec<Vec<f64>> {
    fn rec(left: usize, dims: usize, p: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<f64>>) {
        if dims == 1 {
            prefix.push(left);
            out.push(prefix.iter().map(|k| *k as f64 / p as f64).collect());
            prefix.pop();
            return;
        }
        for k in (0..=left).rev() {
            prefix.push(k);
            rec(left - k, dims - 1, p, prefix, out);
            prefix.pop();
        }
    }
    assert!(n_dim >= 1 && n_partitions >= 1, "need at least one dimension and one partition");
    let mut out = Vec::new();
    rec(n_partitions, n_dim, n_partitions, &mut Vec::new(), &mut out);
    out
}

//! Exact laws of resampling schemes for small `N`, computed by enumeration.
//! Independent of the library's samplers; used to check conditional schemes.

use std::collections::BTreeMap;

pub type Law = BTreeMap<Vec<usize>, f64>;

fn all_vectors(n: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|v| {
                (0..n).map(move |a| {
                    let mut w = v.clone();
                    w.push(a);
                    w
                })
            })
            .collect();
    }
    out
}

fn normalised(g: &[f64]) -> Vec<f64> {
    let s: f64 = g.iter().sum();
    g.iter().map(|x| x / s).collect()
}

pub fn multinomial(g: &[f64]) -> Law {
    let w = normalised(g);
    all_vectors(g.len())
        .into_iter()
        .map(|a| {
            let p = a.iter().map(|&j| w[j]).product();
            (a, p)
        })
        .collect()
}

pub fn killing(g: &[f64]) -> Law {
    let w = normalised(g);
    let gmax = g.iter().cloned().fold(0.0, f64::max);
    all_vectors(g.len())
        .into_iter()
        .map(|a| {
            let p = a
                .iter()
                .enumerate()
                .map(|(i, &j)| {
                    let keep = g[i] / gmax;
                    (if i == j { keep } else { 0.0 }) + (1.0 - keep) * w[j]
                })
                .product();
            (a, p)
        })
        .collect()
}

/// Systematic resampling of the weights visited in `order` (a permutation
/// given as `order[position] = original index`), mapped back to original
/// indices. The law is exact: the output is piecewise constant in the
/// offset, with breakpoints where a stratum point meets a cumulative sum.
pub fn systematic_in_order(g: &[f64], order: &[usize]) -> Law {
    let n = g.len();
    let w = normalised(g);
    let wp: Vec<f64> = order.iter().map(|&j| w[j]).collect();
    let mut cum = vec![0.0];
    for x in &wp {
        cum.push(cum.last().unwrap() + x);
    }
    let mut cuts = vec![0.0, 1.0];
    for &c in &cum[1..=n] {
        for j in 0..n {
            let u = n as f64 * c - j as f64;
            if u > 0.0 && u < 1.0 {
                cuts.push(u);
            }
        }
    }
    cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut law = Law::new();
    for pair in cuts.windows(2) {
        let len = pair[1] - pair[0];
        if len <= 1e-14 {
            continue;
        }
        let u = 0.5 * (pair[0] + pair[1]);
        let a: Vec<usize> = (0..n)
            .map(|j| {
                let t = (j as f64 + u) / n as f64;
                // F(m-1) < t <= F(m), 1-based m.
                let m = (1..=n).find(|&m| cum[m - 1] < t && t <= cum[m]).unwrap_or(n);
                order[m - 1]
            })
            .collect();
        *law.entry(a).or_insert(0.0) += len;
    }
    law
}

/// Law of the output after a uniformly random cyclic relabelling
/// `A[j] = Ā[(j + C) mod N]`.
pub fn symmetrise(law: &Law, n: usize) -> Law {
    let mut out = Law::new();
    for (a, p) in law {
        for c in 0..n {
            let shifted: Vec<usize> = (0..n).map(|j| a[(j + c) % n]).collect();
            *out.entry(shifted).or_insert(0.0) += p / n as f64;
        }
    }
    out
}

pub fn marginal(law: &Law, i: usize, k: usize) -> f64 {
    law.iter().filter(|(a, _)| a[k] == i).map(|(_, p)| p).sum()
}

pub fn conditional(law: &Law, i: usize, k: usize) -> Law {
    let z = marginal(law, i, k);
    law.iter().filter(|(a, _)| a[k] == i).map(|(a, p)| (a.clone(), p / z)).collect()
}

pub fn total_variation(exact: &Law, counts: &BTreeMap<Vec<usize>, usize>, total: usize) -> f64 {
    let mut keys: Vec<&Vec<usize>> = exact.keys().collect();
    keys.extend(counts.keys());
    keys.sort();
    keys.dedup();
    0.5 * keys
        .into_iter()
        .map(|k| {
            let p = exact.get(k).copied().unwrap_or(0.0);
            let q = counts.get(k).copied().unwrap_or(0) as f64 / total as f64;
            (p - q).abs()
        })
        .sum::<f64>()
}

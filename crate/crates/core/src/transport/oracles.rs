//! Independent reference implementations used to cross-check the exact
//! solver: the 1-D quantile formula, permutation brute force, and an
//! assignment-problem solver for matching costs.

use crate::error::{Error, Result};
use crate::measures::{pow_of_sqdist, DiscreteMeasure, Point};
use crate::scalar::Real;

/// W_p between 1-D measures via the quantile (monotone) coupling:
/// sorts both supports and integrates |F_mu^{-1} - F_nu^{-1}|^p over (0,1).
pub fn wasserstein_1d<T: Real>(
    mu: &DiscreteMeasure<T>,
    nu: &DiscreteMeasure<T>,
    p: T,
) -> Result<T> {
    if mu.dim() != 1 || nu.dim() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            found: mu.dim().max(nu.dim()),
        });
    }
    if p < T::one() {
        return Err(Error::InvalidParameter(format!("order p = {p} < 1")));
    }
    let sorted = |m: &DiscreteMeasure<T>| -> Vec<(T, T)> {
        let mut v: Vec<(T, T)> = m
            .support()
            .iter()
            .zip(m.weights())
            .map(|(pt, &w)| (pt.coords()[0], w))
            .collect();
        v.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        v
    };
    let a = sorted(mu);
    let b = sorted(nu);
    let mut ia = 0;
    let mut ib = 0;
    let mut ra = a[0].1;
    let mut rb = b[0].1;
    let mut acc = T::zero();
    // Sweep both quantile functions in lockstep; each step consumes the
    // smaller remaining mass, so at least one side advances per iteration.
    // Rounding dust left on one side when the other runs out is dropped.
    loop {
        let step = ra.min(rb);
        let d = a[ia].0 - b[ib].0;
        acc += step * pow_of_sqdist(d * d, p);
        ra -= step;
        rb -= step;
        if ra <= T::zero() {
            ia += 1;
            if ia == a.len() {
                break;
            }
            ra = a[ia].1;
        }
        if rb <= T::zero() {
            ib += 1;
            if ib == b.len() {
                break;
            }
            rb = b[ib].1;
        }
    }
    Ok(root_p(acc, p))
}

pub(crate) fn root_p<T: Real>(total: T, p: T) -> T {
    if p == T::one() {
        total
    } else if p == T::from_f64_lossy(2.0) {
        total.sqrt()
    } else {
        total.powf(T::one() / p)
    }
}

/// Exhaustive-permutation W_p for uniform equal-size measures with at most
/// eight atoms. Exists purely as an oracle.
pub fn brute_force_wasserstein<T: Real>(
    mu: &DiscreteMeasure<T>,
    nu: &DiscreteMeasure<T>,
    p: T,
) -> Result<T> {
    if mu.dim() != nu.dim() {
        return Err(Error::DimensionMismatch {
            expected: mu.dim(),
            found: nu.dim(),
        });
    }
    let n = mu.len();
    if nu.len() != n {
        return Err(Error::InvalidParameter(format!(
            "support sizes differ: {n} vs {}",
            nu.len()
        )));
    }
    if n > 8 {
        return Err(Error::InvalidParameter(format!(
            "brute force capped at 8 atoms, got {n}"
        )));
    }
    let uniform = T::one() / T::from_usize(n).unwrap();
    let tol = T::from_f64_lossy(1e-12);
    for m in [mu, nu] {
        if m.weights().iter().any(|&w| (w - uniform).abs() > tol) {
            return Err(Error::InvalidWeights(
                "brute force requires uniform weights".into(),
            ));
        }
    }
    let cost: Vec<Vec<T>> = mu
        .support()
        .iter()
        .map(|x| {
            nu.support()
                .iter()
                .map(|y| pow_of_sqdist(x.sqdist(y), p))
                .collect()
        })
        .collect();
    let mut used = vec![false; n];
    let best = perm_search(&cost, &mut used, 0, T::zero(), T::infinity());
    Ok(root_p(best * uniform, p))
}

fn perm_search<T: Real>(cost: &[Vec<T>], used: &mut [bool], i: usize, acc: T, best: T) -> T {
    if i == cost.len() {
        return acc.min(best);
    }
    let mut best = best;
    for j in 0..used.len() {
        if !used[j] {
            used[j] = true;
            best = perm_search(cost, used, i + 1, acc + cost[i][j], best);
            used[j] = false;
        }
    }
    best
}

/// Optimal bipartite matching cost `n^{-1} Σ ‖x_i − y_{σ(i)}‖^p` over
/// permutations σ, via the O(n³) assignment algorithm with potentials.
pub fn obm_cost<T: Real>(xs: &[Point<T>], ys: &[Point<T>], p: T) -> Result<T> {
    if xs.is_empty() {
        return Err(Error::EmptyInput("matching points"));
    }
    if xs.len() != ys.len() {
        return Err(Error::InvalidParameter(format!(
            "matching needs equal sizes, got {} vs {}",
            xs.len(),
            ys.len()
        )));
    }
    let dim = xs[0].dim();
    for pt in xs.iter().chain(ys.iter()) {
        if pt.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: pt.dim(),
            });
        }
    }
    if p < T::one() {
        return Err(Error::InvalidParameter(format!("order p = {p} < 1")));
    }
    let n = xs.len();
    let cost = |i: usize, j: usize| pow_of_sqdist(xs[i].sqdist(&ys[j]), p);

    // Row-by-row potential update (Jonker-Volgenant style): match_of[j] is
    // the row assigned to column j, column 0 is the virtual start.
    let mut u = vec![T::zero(); n + 1];
    let mut v = vec![T::zero(); n + 1];
    let mut match_of = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    let mut minv = vec![T::zero(); n + 1];
    let mut used = vec![false; n + 1];
    for i in 1..=n {
        match_of[0] = i;
        let mut j0 = 0usize;
        minv.iter_mut().for_each(|x| *x = T::infinity());
        used.iter_mut().for_each(|x| *x = false);
        loop {
            used[j0] = true;
            let i0 = match_of[j0];
            let mut delta = T::infinity();
            let mut j1 = 0usize;
            for j in 1..=n {
                if !used[j] {
                    let cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[match_of[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if match_of[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            match_of[j0] = match_of[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut total = T::zero();
    for j in 1..=n {
        total += cost(match_of[j] - 1, j - 1);
    }
    Ok(total / T::from_usize(n).unwrap())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m1(vals: &[f64]) -> DiscreteMeasure<f64> {
        DiscreteMeasure::empirical(&vals.iter().map(|&v| Point::new(vec![v])).collect::<Vec<_>>())
            .unwrap()
    }

    #[test]
    fn quantile_formula_basics() {
        let mu = m1(&[0.0, 1.0]);
        assert_eq!(wasserstein_1d(&mu, &mu, 2.0).unwrap(), 0.0);
        assert_eq!(
            wasserstein_1d(&m1(&[0.0]), &m1(&[1.0]), 3.0).unwrap(),
            1.0
        );
        // Monotone map sends 0 -> 0 and 1 -> 2.
        let w = wasserstein_1d(&m1(&[0.0, 1.0]), &m1(&[0.0, 2.0]), 2.0).unwrap();
        assert!((w - 0.5f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn quantile_handles_unequal_weights() {
        let mu = DiscreteMeasure::new(
            vec![Point::new(vec![0.0f64]), Point::new(vec![1.0])],
            vec![0.25, 0.75],
        )
        .unwrap();
        let nu = DiscreteMeasure::new(vec![Point::new(vec![0.0])], vec![1.0]).unwrap();
        // Three quarters of the mass moves distance 1.
        let w1 = wasserstein_1d(&mu, &nu, 1.0).unwrap();
        assert!((w1 - 0.75).abs() < 1e-12);
        let w2 = wasserstein_1d(&mu, &nu, 2.0).unwrap();
        assert!((w2 - 0.75f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn brute_force_matches_by_hand() {
        let x = m1(&[0.0]);
        let y = m1(&[3.0]);
        assert_eq!(brute_force_wasserstein(&x, &y, 2.0).unwrap(), 3.0);
        let a = m1(&[0.0, 1.0]);
        let b = m1(&[1.0, 0.0]);
        assert_eq!(brute_force_wasserstein(&a, &b, 2.0).unwrap(), 0.0);
    }

    #[test]
    fn brute_force_rejects_bad_inputs() {
        let a = m1(&[0.0, 1.0]);
        let b = m1(&[0.0]);
        assert!(brute_force_wasserstein(&a, &b, 2.0).is_err());
        let big = m1(&[0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0]);
        assert!(brute_force_wasserstein(&big, &big, 2.0).is_err());
        let skew = DiscreteMeasure::new(
            vec![Point::new(vec![0.0]), Point::new(vec![1.0])],
            vec![0.25, 0.75],
        )
        .unwrap();
        assert!(brute_force_wasserstein(&skew, &a, 2.0).is_err());
    }

    #[test]
    fn matching_agrees_with_brute_force() {
        let xs: Vec<Point<f64>> = (0..6)
            .map(|i| Point::new(vec![(i as f64 * 0.9).sin(), (i as f64 * 1.3).cos()]))
            .collect();
        let ys: Vec<Point<f64>> = (0..6)
            .map(|i| Point::new(vec![(i as f64 * 0.4).cos(), (i as f64 * 0.8).sin()]))
            .collect();
        for &p in &[1.0, 2.0, 2.5] {
            let got = obm_cost(&xs, &ys, p).unwrap();
            let mu = DiscreteMeasure::empirical(&xs).unwrap();
            let nu = DiscreteMeasure::empirical(&ys).unwrap();
            let brute = brute_force_wasserstein(&mu, &nu, p).unwrap();
            let brute_cost = brute.powf(p);
            assert!(
                (got - brute_cost).abs() < 1e-10,
                "p={p}: {got} vs {brute_cost}"
            );
        }
    }

    #[test]
    fn matching_examples() {
        let xs = vec![Point::new(vec![0.0]), Point::new(vec![1.0])];
        assert_eq!(obm_cost(&xs, &xs, 2.0).unwrap(), 0.0);
        let ys = vec![Point::new(vec![2.0]), Point::new(vec![3.0])];
        assert_eq!(obm_cost(&xs, &ys, 2.0).unwrap(), 4.0);
    }
}

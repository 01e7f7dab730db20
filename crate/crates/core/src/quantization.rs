//! Lloyd/k-means quantizers viewed as measure learners.
//!
//! [`lloyd`] runs multi-restart k-means++ followed by Lloyd descent and
//! reports the empirical quantization cost `(1/n) Σ_i d(x_i, S)²`.
//! [`kmeans_measure`] turns the winning codebook into the pushforward of the
//! empirical measure, which is the learned object the rate experiments
//! evaluate. [`estimate_vnp`] estimates the population quantization error of
//! a sampler on a held-out sample, and [`optimal_quantizer_1d_uniform`] is
//! the analytic oracle those estimates are checked against.

use rand::Rng;

use crate::error::{Error, Result};
use crate::measures::{kahan_sum, Codebook, DiscreteMeasure, Point, CENTER_DISTINCT_TOL};
use crate::rng::{mix, stream_rng};
use crate::samplers::Sampler;
use crate::scalar::Real;

/// Stream salt for the k-means++ generator.
const SALT_KMEANSPP: u64 = 0x6b70_70;
/// Seed salt for the training sample of [`estimate_vnp`].
const SALT_TRAIN: u64 = 0x7472_6169_6e;
/// Seed salt for the held-out evaluation sample of [`estimate_vnp`].
const SALT_EVAL: u64 = 0x6576_616c;

/// Restart and stopping policy for [`lloyd`].
#[derive(Clone, Debug)]
pub struct LloydConfig {
    /// Number of centers requested; the result may hold fewer if clusters
    /// empty out or centers collide.
    pub k: usize,
    /// Root seed. Restart `r` derives its own initialization seed as
    /// `mix(seed, r)`, so restarts are independent but reproducible.
    pub seed: u64,
    /// Independent k-means++ initializations; the cheapest final cost wins.
    pub restarts: usize,
    /// Hard cap on Lloyd update steps per restart.
    pub max_iters: usize,
    /// Stop a restart once the relative cost improvement of one update falls
    /// below this threshold.
    pub rel_tol: f64,
}

impl LloydConfig {
    /// Single restart, `max_iters = 200`, `rel_tol = 1e-7`.
    pub fn new(k: usize, seed: u64) -> Self {
        LloydConfig {
            k,
            seed,
            restarts: 1,
            max_iters: 200,
            rel_tol: 1e-7,
        }
    }

    pub fn with_restarts(mut self, restarts: usize) -> Self {
        self.restarts = restarts;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.k < 1 {
            return Err(Error::InvalidParameter("k must be at least 1".into()));
        }
        if self.restarts < 1 {
            return Err(Error::InvalidParameter(
                "restarts must be at least 1".into(),
            ));
        }
        if !(self.rel_tol > 0.0) || !self.rel_tol.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "rel_tol = {} must be positive and finite",
                self.rel_tol
            )));
        }
        Ok(())
    }
}

/// Outcome of the winning restart of [`lloyd`].
#[derive(Clone, Debug)]
pub struct QuantizerResult<T: Real> {
    /// Final centers. At most `k`; unused and coinciding centers are dropped.
    pub codebook: Codebook<T>,
    /// `(1/n) Σ_i d(x_i, codebook)²` over the training sample.
    pub empirical_cost: T,
    /// Lloyd update steps the winning restart performed.
    pub iterations: usize,
    /// Index of the winning restart; ties go to the lowest index.
    pub restart_index: usize,
}

/// Best-of-restarts k-means++ plus Lloyd descent.
///
/// Deterministic given `cfg.seed`. Requires `cfg.k` to not exceed the number
/// of distinct sample points. The empirical cost of the result equals the
/// squared 2-Wasserstein distance between the empirical measure of `sample`
/// and its pushforward onto the returned codebook.
pub fn lloyd<T: Real>(sample: &[Point<T>], cfg: &LloydConfig) -> Result<QuantizerResult<T>> {
    lloyd_with_inits(sample, cfg, &[])
}

/// [`lloyd`] with extra descent starts appended after the seeded restarts.
///
/// Each entry of `extra_inits` is used verbatim as an initial center list
/// (restart indices continue past `cfg.restarts`). The rate-experiment
/// decomposition uses this to warm-start from a population codebook so its
/// comparison terms are ordered by construction rather than by luck.
pub(crate) fn lloyd_with_inits<T: Real>(
    sample: &[Point<T>],
    cfg: &LloydConfig,
    extra_inits: &[Vec<Point<T>>],
) -> Result<QuantizerResult<T>> {
    cfg.validate()?;
    check_sample(sample)?;
    let distinct = distinct_count(sample);
    if cfg.k > distinct {
        return Err(Error::TooManyClusters {
            k: cfg.k,
            distinct,
        });
    }
    let rel_tol = T::from_f64_lossy(cfg.rel_tol);

    let mut best: Option<(T, usize, Vec<Point<T>>, usize, Pass<T>)> = None;
    for r in 0..cfg.restarts + extra_inits.len() {
        let init = if r < cfg.restarts {
            kmeanspp_centers(sample, cfg.k, mix(cfg.seed, r as u64))?
        } else {
            extra_inits[r - cfg.restarts].clone()
        };
        let (centers, iters, pass) = descend(sample, init, cfg.max_iters, rel_tol);
        if best.as_ref().is_none_or(|b| pass.cost < b.0) {
            best = Some((pass.cost, r, centers, iters, pass));
        }
    }
    let (_, restart_index, centers, iterations, pass) = best.expect("restarts >= 1");
    let (codebook, empirical_cost) = finalize(sample, centers, pass)?;
    Ok(QuantizerResult {
        codebook,
        empirical_cost,
        iterations,
        restart_index,
    })
}

/// Distance-squared-proportional seeding.
///
/// Picks the first center uniformly, then each next center with probability
/// proportional to the squared distance from the already chosen set. Chosen
/// centers are pairwise distinct. Deterministic given `seed`.
pub fn kmeanspp_init<T: Real>(sample: &[Point<T>], k: usize, seed: u64) -> Result<Codebook<T>> {
    check_sample(sample)?;
    if k < 1 {
        return Err(Error::InvalidParameter("k must be at least 1".into()));
    }
    let distinct = distinct_count(sample);
    if k > distinct {
        return Err(Error::TooManyClusters { k, distinct });
    }
    Codebook::new(kmeanspp_centers(sample, k, seed)?)
}

/// The measure a k-means learner outputs: the empirical measure of `sample`
/// pushed forward onto the [`lloyd`] codebook. At most `k` atoms, each weight
/// a multiple of `1/n`. With `k` at least the number of distinct points this
/// is the empirical measure itself.
pub fn kmeans_measure<T: Real>(
    sample: &[Point<T>],
    cfg: &LloydConfig,
) -> Result<DiscreteMeasure<T>> {
    let q = lloyd(sample, cfg)?;
    DiscreteMeasure::empirical(sample)?.push_forward(&q.codebook)
}

/// Exact optimal k-point quantizer of the uniform density on `[0, 1]`.
///
/// Centers sit at `(2i - 1) / (2k)` and the mean squared distance to the
/// center set is `1 / (12 k²)`, so `cost · k²` is constant in `k`.
pub fn optimal_quantizer_1d_uniform<T: Real>(k: usize) -> Result<(Codebook<T>, T)> {
    if k < 1 {
        return Err(Error::InvalidParameter("k must be at least 1".into()));
    }
    let denom = 2.0 * k as f64;
    let centers = (1..=k)
        .map(|i| Point::new(vec![T::from_f64_lossy((2 * i - 1) as f64 / denom)]))
        .collect();
    let cost = T::from_f64_lossy(1.0 / (12.0 * (k as f64) * (k as f64)));
    Ok((Codebook::new(centers)?, cost))
}

/// Monte Carlo upper estimate of the optimal k-point quantization error
/// `V_{k,2}(ρ)^{1/2}` of a sampler's population measure.
///
/// Fits a codebook on a size-`n_mc` training sample (multi-restart [`lloyd`]
/// with `cfg`, `k` overriding `cfg.k`), then evaluates the mean squared
/// distance on an independent size-`n_mc` sample and takes the square root.
/// The held-out pass avoids the optimistic bias of in-sample cost. Only
/// `p = 2` is supported; both samples derive deterministically from
/// `cfg.seed`.
pub fn estimate_vnp<T: Real>(
    sampler: &Sampler<T>,
    k: usize,
    p: T,
    n_mc: usize,
    cfg: &LloydConfig,
) -> Result<T> {
    if p != T::from_f64_lossy(2.0) {
        return Err(Error::InvalidParameter(format!(
            "quantizer fitting targets p = 2, got p = {p}"
        )));
    }
    if n_mc < k {
        return Err(Error::InvalidParameter(format!(
            "n_mc = {n_mc} is too small for k = {k} centers"
        )));
    }
    let train = sampler.reseeded(mix(cfg.seed, SALT_TRAIN)).draw(n_mc)?;
    let eval = sampler.reseeded(mix(cfg.seed, SALT_EVAL)).draw(n_mc)?;
    let mut fit_cfg = cfg.clone();
    fit_cfg.k = k;
    let q = lloyd(&train, &fit_cfg)?;
    let mean = DiscreteMeasure::empirical(&eval)?.expected_distance_power(&q.codebook, p)?;
    Ok(mean.sqrt())
}

/// One assignment sweep: per-point nearest distance, per-cluster mass and
/// coordinate sums, and the mean squared distance.
struct Pass<T> {
    cost: T,
    dist2: Vec<T>,
    counts: Vec<usize>,
    sums: Vec<T>,
}

fn assign_pass<T: Real>(sample: &[Point<T>], centers: &[Point<T>]) -> Pass<T> {
    let d = sample[0].dim();
    let mut dist2 = vec![T::zero(); sample.len()];
    let mut counts = vec![0usize; centers.len()];
    let mut sums = vec![T::zero(); centers.len() * d];
    for (i, x) in sample.iter().enumerate() {
        let mut bd = T::infinity();
        let mut bj = 0usize;
        for (j, c) in centers.iter().enumerate() {
            let dd = x.sqdist(c);
            if dd < bd {
                bd = dd;
                bj = j;
            }
        }
        dist2[i] = bd;
        counts[bj] += 1;
        for (s, &v) in sums[bj * d..(bj + 1) * d].iter_mut().zip(x.coords()) {
            *s += v;
        }
    }
    let cost = kahan_sum(dist2.iter().copied()) / T::from_usize(sample.len()).unwrap();
    Pass {
        cost,
        dist2,
        counts,
        sums,
    }
}

/// Lloyd descent from `centers` until the relative improvement drops below
/// `rel_tol` or `max_iters` update steps have run. Returns the final centers,
/// the number of updates, and the assignment sweep against those centers, so
/// the reported cost is exact for the returned configuration.
fn descend<T: Real>(
    sample: &[Point<T>],
    mut centers: Vec<Point<T>>,
    max_iters: usize,
    rel_tol: T,
) -> (Vec<Point<T>>, usize, Pass<T>) {
    let d = sample[0].dim();
    let mut prev = T::infinity();
    let mut iters = 0usize;
    loop {
        let mut pass = assign_pass(sample, &centers);
        if prev.is_finite() {
            // Both the centroid update and the empty-cluster reseed are
            // non-increasing moves, so any real increase is an internal bug.
            assert!(
                pass.cost <= prev * (T::one() + T::from_f64_lossy(1e-10)),
                "quantization cost rose from {prev} to {}",
                pass.cost
            );
        }
        let improved = !prev.is_finite() || (prev - pass.cost) > rel_tol * prev;
        if iters >= max_iters || !improved || pass.cost <= T::zero() {
            return (centers, iters, pass);
        }
        prev = pass.cost;
        for (j, c) in centers.iter_mut().enumerate() {
            if pass.counts[j] == 0 {
                continue;
            }
            let inv = T::one() / T::from_usize(pass.counts[j]).unwrap();
            *c = Point::new(pass.sums[j * d..(j + 1) * d].iter().map(|&s| s * inv).collect());
        }
        // Re-seed each empty center at the point farthest from the chosen
        // set, updating distances incrementally so two empty centers never
        // land on duplicate points.
        for j in 0..centers.len() {
            if pass.counts[j] > 0 {
                continue;
            }
            let far = argmax(&pass.dist2);
            if !(pass.dist2[far] > T::zero()) {
                continue;
            }
            centers[j] = sample[far].clone();
            for (i, x) in sample.iter().enumerate() {
                let dd = x.sqdist(&centers[j]);
                if dd < pass.dist2[i] {
                    pass.dist2[i] = dd;
                }
            }
        }
        iters += 1;
    }
}

/// Drops centers that capture no mass, merges any that coincide within the
/// codebook distinctness tolerance, and reports the exact cost of what is
/// kept.
fn finalize<T: Real>(
    sample: &[Point<T>],
    centers: Vec<Point<T>>,
    pass: Pass<T>,
) -> Result<(Codebook<T>, T)> {
    let tol2 = T::from_f64_lossy(CENTER_DISTINCT_TOL * CENTER_DISTINCT_TOL);
    let mut kept: Vec<Point<T>> = centers
        .iter()
        .zip(&pass.counts)
        .filter(|(_, &cnt)| cnt > 0)
        .map(|(c, _)| c.clone())
        .collect();
    let mut cost = pass.cost;
    loop {
        let mut merged = false;
        let mut out: Vec<Point<T>> = Vec::with_capacity(kept.len());
        for c in kept {
            if out.iter().any(|o| o.sqdist(&c) <= tol2) {
                merged = true;
            } else {
                out.push(c);
            }
        }
        kept = out;
        if !merged {
            break;
        }
        let pass = assign_pass(sample, &kept);
        cost = pass.cost;
        kept = kept
            .into_iter()
            .zip(&pass.counts)
            .filter(|(_, &cnt)| cnt > 0)
            .map(|(c, _)| c)
            .collect();
    }
    Ok((Codebook::new(kept)?, cost))
}

fn kmeanspp_centers<T: Real>(sample: &[Point<T>], k: usize, seed: u64) -> Result<Vec<Point<T>>> {
    let tol2 = T::from_f64_lossy(CENTER_DISTINCT_TOL * CENTER_DISTINCT_TOL);
    let mut rng = stream_rng(seed, SALT_KMEANSPP);
    let mut centers = vec![sample[rng.gen_range(0..sample.len())].clone()];
    let mut dist2: Vec<T> = sample
        .iter()
        .map(|x| {
            let dd = x.sqdist(&centers[0]);
            if dd <= tol2 {
                T::zero()
            } else {
                dd
            }
        })
        .collect();
    while centers.len() < k {
        let total = kahan_sum(dist2.iter().copied());
        if !(total > T::zero()) {
            // Every remaining point coincides with a chosen center, so the
            // sample has fewer usable distinct points than requested.
            return Err(Error::TooManyClusters {
                k,
                distinct: centers.len(),
            });
        }
        let u = T::from_f64_lossy(rng.gen::<f64>()) * total;
        let mut acc = T::zero();
        let mut pick = None;
        let mut last_positive = 0usize;
        for (i, &w) in dist2.iter().enumerate() {
            if w > T::zero() {
                last_positive = i;
                acc += w;
                if u < acc {
                    pick = Some(i);
                    break;
                }
            }
        }
        let pick = pick.unwrap_or(last_positive);
        centers.push(sample[pick].clone());
        let new = centers.last().expect("just pushed");
        for (i, x) in sample.iter().enumerate() {
            if dist2[i] > T::zero() {
                let dd = x.sqdist(new);
                if dd <= tol2 {
                    dist2[i] = T::zero();
                } else if dd < dist2[i] {
                    dist2[i] = dd;
                }
            }
        }
    }
    Ok(centers)
}

/// Non-emptiness, shared dimension, finite coordinates.
fn check_sample<T: Real>(sample: &[Point<T>]) -> Result<usize> {
    if sample.is_empty() {
        return Err(Error::EmptyInput("quantization sample"));
    }
    let d = sample[0].dim();
    for x in sample {
        if x.dim() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: x.dim(),
            });
        }
        if !x.is_finite() {
            return Err(Error::InvalidParameter(
                "non-finite coordinate in sample".into(),
            ));
        }
    }
    Ok(d)
}

/// Number of exactly distinct points, by lexicographic sort.
fn distinct_count<T: Real>(sample: &[Point<T>]) -> usize {
    let mut idx: Vec<u32> = (0..sample.len() as u32).collect();
    let cmp = |a: &Point<T>, b: &Point<T>| {
        for (x, y) in a.coords().iter().zip(b.coords()) {
            match x.partial_cmp(y).expect("finite coordinates compare") {
                std::cmp::Ordering::Equal => continue,
                ord => return ord,
            }
        }
        std::cmp::Ordering::Equal
    };
    idx.sort_unstable_by(|&a, &b| cmp(&sample[a as usize], &sample[b as usize]));
    1 + idx
        .windows(2)
        .filter(|w| cmp(&sample[w[0] as usize], &sample[w[1] as usize]) != std::cmp::Ordering::Equal)
        .count()
}

fn argmax<T: Real>(vals: &[T]) -> usize {
    let mut best = 0usize;
    for i in 1..vals.len() {
        if vals[i] > vals[best] {
            best = i;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transport::wasserstein;

    fn pt(coords: &[f64]) -> Point<f64> {
        Point::from_slice(coords)
    }

    fn random_cloud(n: usize, d: usize, seed: u64) -> Vec<Point<f64>> {
        Sampler::<f64>::uniform_cube(d, seed).unwrap().draw(n).unwrap()
    }

    #[test]
    fn one_center_is_the_mean_with_variance_cost() {
        let sample = random_cloud(500, 3, 11);
        let q = lloyd(&sample, &LloydConfig::new(1, 0)).unwrap();
        assert_eq!(q.codebook.len(), 1);
        let n = sample.len() as f64;
        for (axis, &c) in q.codebook.centers()[0].coords().iter().enumerate() {
            let mean: f64 = sample.iter().map(|x| x.coords()[axis]).sum::<f64>() / n;
            assert!((c - mean).abs() < 1e-12);
        }
        let center = &q.codebook.centers()[0];
        let var: f64 = sample.iter().map(|x| x.sqdist(center)).sum::<f64>() / n;
        assert!((q.empirical_cost - var).abs() <= 1e-12 * var);
    }

    #[test]
    fn k_equals_n_distinct_points_costs_zero() {
        let sample = vec![
            pt(&[0.0, 0.0]),
            pt(&[1.0, 0.0]),
            pt(&[0.0, 1.0]),
            pt(&[1.0, 1.0]),
            pt(&[2.0, 0.5]),
            pt(&[-1.0, 0.25]),
        ];
        let q = lloyd(&sample, &LloydConfig::new(6, 42)).unwrap();
        assert_eq!(q.codebook.len(), 6);
        assert!(q.empirical_cost <= 1e-18);
        let mut got: Vec<_> = q.codebook.centers().to_vec();
        let mut want = sample.clone();
        let key = |p: &Point<f64>| (p.coords()[0], p.coords()[1]);
        got.sort_by(|a, b| key(a).partial_cmp(&key(b)).unwrap());
        want.sort_by(|a, b| key(a).partial_cmp(&key(b)).unwrap());
        assert_eq!(got, want);
    }

    #[test]
    fn two_centers_on_uniform_interval_match_analytic_quantizer() {
        let sample = random_cloud(100_000, 1, 7);
        let cfg = LloydConfig::new(2, 3).with_restarts(10);
        let q = lloyd(&sample, &cfg).unwrap();
        let mut cs: Vec<f64> = q.codebook.centers().iter().map(|c| c.coords()[0]).collect();
        cs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!((cs[0] - 0.25).abs() < 0.02, "low center at {}", cs[0]);
        assert!((cs[1] - 0.75).abs() < 0.02, "high center at {}", cs[1]);
        let analytic = 1.0 / 48.0;
        assert!(
            (q.empirical_cost - analytic).abs() < 0.1 * analytic,
            "cost {} vs {analytic}",
            q.empirical_cost
        );
    }

    #[test]
    fn empirical_cost_equals_squared_distance_to_pushforward() {
        for seed in 0..5u64 {
            let sample = random_cloud(64, 2, 100 + seed);
            let cfg = LloydConfig::new(5, seed).with_restarts(3);
            let q = lloyd(&sample, &cfg).unwrap();
            let rho = DiscreteMeasure::empirical(&sample).unwrap();
            let pushed = rho.push_forward(&q.codebook).unwrap();
            let w = wasserstein(&rho, &pushed, 2.0).unwrap().cost;
            assert!(
                (q.empirical_cost - w * w).abs() <= 1e-9 * q.empirical_cost.max(1.0),
                "seed {seed}: lloyd cost {} vs squared distance {}",
                q.empirical_cost,
                w * w
            );
        }
    }

    #[test]
    fn pushforward_is_the_closest_measure_on_the_codebook() {
        use rand::Rng;
        let sample = random_cloud(40, 2, 9);
        let rho = DiscreteMeasure::empirical(&sample).unwrap();
        let q = lloyd(&sample, &LloydConfig::new(4, 1).with_restarts(2)).unwrap();
        let pushed = rho.push_forward(&q.codebook).unwrap();
        let base = wasserstein(&rho, &pushed, 2.0).unwrap().cost;
        let support = q.codebook.centers().to_vec();
        let mut rng = stream_rng(77, 0);
        for _ in 0..10 {
            let raw: Vec<f64> = (0..support.len()).map(|_| rng.gen::<f64>() + 1e-3).collect();
            let total: f64 = raw.iter().sum();
            let weights: Vec<f64> = raw.iter().map(|w| w / total).collect();
            let mu = DiscreteMeasure::new(support.clone(), weights).unwrap();
            let w = wasserstein(&rho, &mu, 2.0).unwrap().cost;
            assert!(w >= base - 1e-9, "found {w} below projection {base}");
        }
    }

    #[test]
    fn cost_is_monotone_in_k() {
        let sample = random_cloud(400, 2, 21);
        let mut prev = f64::INFINITY;
        for k in 1..=8 {
            let cfg = LloydConfig::new(k, 5).with_restarts(10);
            let cost = lloyd(&sample, &cfg).unwrap().empirical_cost;
            assert!(
                cost <= prev + 1e-9,
                "cost rose from {prev} to {cost} at k = {k}"
            );
            prev = cost;
        }
    }

    #[test]
    fn kmeans_measure_with_full_k_reproduces_the_empirical_measure() {
        let sample = vec![pt(&[0.0]), pt(&[0.5]), pt(&[1.5]), pt(&[-2.0])];
        let mu = kmeans_measure(&sample, &LloydConfig::new(4, 8)).unwrap();
        let rho = DiscreteMeasure::empirical(&sample).unwrap();
        let key = |p: &Point<f64>| p.coords()[0];
        let mut got: Vec<(f64, f64)> = mu
            .support()
            .iter()
            .zip(mu.weights())
            .map(|(p, &w)| (key(p), w))
            .collect();
        got.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut want: Vec<(f64, f64)> = rho
            .support()
            .iter()
            .zip(rho.weights())
            .map(|(p, &w)| (key(p), w))
            .collect();
        want.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(got, want);
    }

    #[test]
    fn kmeans_measure_with_one_center_is_a_point_mass_at_the_mean() {
        let sample = random_cloud(200, 2, 33);
        let mu = kmeans_measure(&sample, &LloydConfig::new(1, 0)).unwrap();
        assert_eq!(mu.len(), 1);
        assert!((mu.weights()[0] - 1.0).abs() < 1e-12);
        let n = sample.len() as f64;
        for (axis, &c) in mu.support()[0].coords().iter().enumerate() {
            let mean: f64 = sample.iter().map(|x| x.coords()[axis]).sum::<f64>() / n;
            assert!((c - mean).abs() < 1e-12);
        }
    }

    #[test]
    fn weights_of_kmeans_measure_are_multiples_of_one_over_n() {
        let sample = random_cloud(60, 2, 51);
        let mu = kmeans_measure(&sample, &LloydConfig::new(5, 2).with_restarts(3)).unwrap();
        assert!(mu.len() <= 5);
        for &w in mu.weights() {
            let scaled = w * 60.0;
            assert!(
                (scaled - scaled.round()).abs() < 1e-9,
                "weight {w} is not a multiple of 1/60"
            );
        }
    }

    #[test]
    fn seeding_is_deterministic_and_spans_the_sample() {
        let sample = random_cloud(50, 2, 13);
        let a = kmeanspp_init(&sample, 7, 99).unwrap();
        let b = kmeanspp_init(&sample, 7, 99).unwrap();
        assert_eq!(a.centers(), b.centers());
        let c = kmeanspp_init(&sample, 7, 100).unwrap();
        assert_ne!(a.centers(), c.centers());

        let single = kmeanspp_init(&sample, 1, 5).unwrap();
        assert!(sample.contains(&single.centers()[0]));

        let full = kmeanspp_init(&sample, 50, 5).unwrap();
        assert_eq!(full.len(), 50);
        for c in full.centers() {
            assert!(sample.contains(c));
        }
    }

    #[test]
    fn analytic_uniform_quantizer_has_inverse_square_cost() {
        let (book, cost) = optimal_quantizer_1d_uniform::<f64>(1).unwrap();
        assert_eq!(book.centers()[0].coords(), &[0.5]);
        assert!((cost - 1.0 / 12.0).abs() < 1e-15);

        let (book, cost) = optimal_quantizer_1d_uniform::<f64>(2).unwrap();
        assert_eq!(book.centers()[0].coords(), &[0.25]);
        assert_eq!(book.centers()[1].coords(), &[0.75]);
        assert!((cost - 1.0 / 48.0).abs() < 1e-15);

        for k in 1..=20 {
            let (_, cost) = optimal_quantizer_1d_uniform::<f64>(k).unwrap();
            let scaled = cost * (k * k) as f64;
            assert!((scaled - 1.0 / 12.0).abs() < 1e-14);
        }
    }

    #[test]
    fn vnp_estimate_matches_the_analytic_oracle() {
        let line = Sampler::<f64>::uniform_cube(1, 4).unwrap();
        let cfg = LloydConfig::new(2, 17).with_restarts(5);
        let est = estimate_vnp(&line, 2, 2.0, 20_000, &cfg).unwrap();
        let oracle = (1.0f64 / 48.0).sqrt();
        assert!(
            (est - oracle).abs() < 0.1 * oracle,
            "estimate {est} vs oracle {oracle}"
        );
    }

    #[test]
    fn vnp_with_one_center_recovers_the_population_spread() {
        let line = Sampler::<f64>::uniform_cube(1, 23).unwrap();
        let cfg = LloydConfig::new(1, 6);
        let est = estimate_vnp(&line, 1, 2.0, 50_000, &cfg).unwrap();
        let std = (1.0f64 / 12.0).sqrt();
        assert!(
            (est - std).abs() < 0.05 * std,
            "estimate {est} vs population spread {std}"
        );
    }

    #[test]
    fn rejects_bad_parameters() {
        let sample = vec![pt(&[0.0]), pt(&[0.0]), pt(&[1.0]), pt(&[1.0])];
        match lloyd(&sample, &LloydConfig::new(3, 0)) {
            Err(Error::TooManyClusters { k: 3, distinct: 2 }) => {}
            other => panic!("expected TooManyClusters, got {other:?}"),
        }
        assert!(lloyd(&sample, &LloydConfig::new(0, 0)).is_err());
        assert!(lloyd::<f64>(&[], &LloydConfig::new(1, 0)).is_err());

        let mut cfg = LloydConfig::new(1, 0);
        cfg.restarts = 0;
        assert!(lloyd(&sample, &cfg).is_err());
        let mut cfg = LloydConfig::new(1, 0);
        cfg.rel_tol = 0.0;
        assert!(lloyd(&sample, &cfg).is_err());

        let line = Sampler::<f64>::uniform_cube(1, 0).unwrap();
        assert!(estimate_vnp(&line, 2, 1.0, 100, &LloydConfig::new(2, 0)).is_err());
        assert!(estimate_vnp(&line, 200, 2.0, 100, &LloydConfig::new(2, 0)).is_err());
        assert!(optimal_quantizer_1d_uniform::<f64>(0).is_err());
    }

    #[test]
    fn empty_cluster_reseeding_keeps_the_requested_size() {
        // Three tight groups and one outlier force k-means++ to sometimes
        // start with two centers in one group; the reseed must still end
        // with four distinct useful centers.
        let mut sample = Vec::new();
        for g in 0..3 {
            for i in 0..20 {
                sample.push(pt(&[g as f64 * 10.0 + (i as f64) * 1e-3, 0.0]));
            }
        }
        sample.push(pt(&[100.0, 0.0]));
        for seed in 0..10u64 {
            let q = lloyd(&sample, &LloydConfig::new(4, seed)).unwrap();
            assert_eq!(q.codebook.len(), 4, "seed {seed} lost a center");
            assert!(q.empirical_cost < 1.0, "seed {seed} missed a group");
        }
    }

    #[test]
    fn warm_start_descent_is_at_least_as_good_as_its_init() {
        let sample = random_cloud(300, 2, 61);
        let cold = lloyd(&sample, &LloydConfig::new(6, 3).with_restarts(2)).unwrap();
        let warm = lloyd_with_inits(
            &sample,
            &LloydConfig::new(6, 3).with_restarts(2),
            &[cold.codebook.centers().to_vec()],
        )
        .unwrap();
        assert!(warm.empirical_cost <= cold.empirical_cost + 1e-12);
    }
}

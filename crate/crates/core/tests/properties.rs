//! Randomized identities tying the measure layer to the exact solver.
//!
//! Instances are small enough that every Wasserstein call here is exact up
//! to floating-point rounding, so the identities are checked tightly.

use approx::{assert_abs_diff_eq, assert_relative_eq};
use proptest::prelude::*;

use wassquant::transport::{brute_force_wasserstein, wasserstein, wasserstein_1d};
use wassquant::{Codebook, DiscreteMeasure, Point};

/// Greedily keeps points at pairwise L-inf separation above 1e-6 so that
/// codebook construction and brute-force uniformity never trip on
/// shrink-induced duplicates. The first point always survives.
fn separated(raw: &[Vec<f64>]) -> Vec<Point<f64>> {
    let mut kept: Vec<Point<f64>> = Vec::new();
    'outer: for coords in raw {
        for q in &kept {
            let close = coords
                .iter()
                .zip(q.coords())
                .all(|(a, b)| (a - b).abs() <= 1e-6);
            if close {
                continue 'outer;
            }
        }
        kept.push(Point::new(coords.clone()));
    }
    kept
}

fn raw_points(d: usize, max_n: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(prop::collection::vec(-4.0f64..4.0, d), 1..=max_n)
}

prop_compose! {
    fn arb_measure(d: usize, max_n: usize)(
        pts in raw_points(d, max_n),
        raw_w in prop::collection::vec(0.05f64..1.0, max_n),
    ) -> DiscreteMeasure<f64> {
        let pts = separated(&pts);
        let total: f64 = raw_w[..pts.len()].iter().sum();
        let w: Vec<f64> = raw_w[..pts.len()].iter().map(|x| x / total).collect();
        DiscreteMeasure::new(pts, w).unwrap()
    }
}

prop_compose! {
    fn arb_codebook(d: usize, max_k: usize)(
        pts in raw_points(d, max_k),
    ) -> Codebook<f64> {
        Codebook::new(separated(&pts)).unwrap()
    }
}

fn measure_and_codebook() -> impl Strategy<Value = (DiscreteMeasure<f64>, Codebook<f64>)> {
    (1usize..=3).prop_flat_map(|d| (arb_measure(d, 10), arb_codebook(d, 5)))
}

fn measure_pair() -> impl Strategy<Value = (DiscreteMeasure<f64>, DiscreteMeasure<f64>)> {
    (1usize..=3).prop_flat_map(|d| (arb_measure(d, 10), arb_measure(d, 10)))
}

fn order() -> impl Strategy<Value = f64> {
    prop_oneof![Just(1.0), Just(2.0)]
}

proptest! {
    /// Mean p-th power distance to a center set equals the p-th power of the
    /// distance to the measure's own pushforward onto that set.
    #[test]
    fn projection_identity((mu, book) in measure_and_codebook(), p in order()) {
        let lhs = mu.expected_distance_power(&book, p).unwrap();
        let pushed = mu.push_forward(&book).unwrap();
        let w = wasserstein(&mu, &pushed, p).unwrap().cost;
        assert_relative_eq!(lhs, w.powf(p), max_relative = 1e-9, epsilon = 1e-12);
    }

    /// Among measures supported on the center set, the pushforward is
    /// closest: any reweighting of the centers is at least as far away.
    #[test]
    fn pushforward_is_closest_on_support(
        (mu, book) in measure_and_codebook(),
        raw_w in prop::collection::vec(0.05f64..1.0, 5),
        p in order(),
    ) {
        let pushed = mu.push_forward(&book).unwrap();
        let best = wasserstein(&mu, &pushed, p).unwrap().cost;

        let total: f64 = raw_w[..book.len()].iter().sum();
        let w: Vec<f64> = raw_w[..book.len()].iter().map(|x| x / total).collect();
        let rival = DiscreteMeasure::new(book.centers().to_vec(), w).unwrap();
        let other = wasserstein(&mu, &rival, p).unwrap().cost;
        prop_assert!(best <= other + 1e-9, "pushforward {best} beaten by {other}");
    }

    /// Projecting the wrong measure onto the set can only hurt.
    #[test]
    fn own_projection_beats_foreign_projection(
        (mu, nu) in measure_pair(),
        raw in raw_points(3, 5),
        p in order(),
    ) {
        let d = mu.dim();
        let trimmed: Vec<Vec<f64>> = raw.iter().map(|c| c[..d].to_vec()).collect();
        let book = Codebook::new(separated(&trimmed)).unwrap();
        let own = wasserstein(&mu, &mu.push_forward(&book).unwrap(), p).unwrap().cost;
        let foreign = wasserstein(&mu, &nu.push_forward(&book).unwrap(), p).unwrap().cost;
        prop_assert!(foreign >= own - 1e-9, "foreign {foreign} beats own {own}");
    }

    /// Returned plans are feasible couplings whose entries price out to the
    /// reported cost, with at most m + n - 1 entries.
    #[test]
    fn plans_are_feasible_and_price_correctly((mu, nu) in measure_pair(), p in order()) {
        let res = wasserstein(&mu, &nu, p).unwrap();
        let plan = &res.plan;
        prop_assert!(plan.num_entries() <= mu.len() + nu.len() - 1);
        for e in plan.entries() {
            prop_assert!(e.mass >= 0.0);
        }
        for (got, want) in plan.row_marginals().iter().zip(mu.weights()) {
            assert_abs_diff_eq!(got, want, epsilon = 1e-9);
        }
        for (got, want) in plan.col_marginals().iter().zip(nu.weights()) {
            assert_abs_diff_eq!(got, want, epsilon = 1e-9);
        }
        let repriced: f64 = plan
            .entries()
            .iter()
            .map(|e| {
                let d2 = mu.support()[e.row].sqdist(&nu.support()[e.col]);
                e.mass * d2.powf(p / 2.0)
            })
            .sum();
        assert_relative_eq!(repriced, res.cost.powf(p), max_relative = 1e-9, epsilon = 1e-12);
    }

    /// Symmetry, self-distance zero, and the triangle inequality on random
    /// triples.
    #[test]
    fn metric_axioms_hold(
        (mu, nu) in measure_pair(),
        raw in raw_points(3, 10),
        raw_w in prop::collection::vec(0.05f64..1.0, 10),
        p in order(),
    ) {
        let d = mu.dim();
        let trimmed: Vec<Vec<f64>> = raw.iter().map(|c| c[..d].to_vec()).collect();
        let pts = separated(&trimmed);
        let total: f64 = raw_w[..pts.len()].iter().sum();
        let w: Vec<f64> = raw_w[..pts.len()].iter().map(|x| x / total).collect();
        let rho = DiscreteMeasure::new(pts, w).unwrap();

        let self_dist = wasserstein(&mu, &mu, p).unwrap().cost;
        prop_assert!(self_dist.abs() <= 1e-12, "self distance {self_dist}");

        let ab = wasserstein(&mu, &nu, p).unwrap().cost;
        let ba = wasserstein(&nu, &mu, p).unwrap().cost;
        assert_relative_eq!(ab, ba, max_relative = 1e-9, epsilon = 1e-12);

        let ac = wasserstein(&mu, &rho, p).unwrap().cost;
        let cb = wasserstein(&rho, &nu, p).unwrap().cost;
        prop_assert!(ab <= ac + cb + 1e-9, "triangle: {ab} > {ac} + {cb}");
    }

    /// The general solver agrees with the closed-form quantile coupling on
    /// the line, including unequal supports and weights.
    #[test]
    fn solver_matches_quantile_oracle_in_1d(
        mu in arb_measure(1, 12),
        nu in arb_measure(1, 12),
        p in prop_oneof![Just(1.0), Just(2.0), Just(3.0)],
    ) {
        let solver = wasserstein(&mu, &nu, p).unwrap().cost;
        let oracle = wasserstein_1d(&mu, &nu, p).unwrap();
        assert_relative_eq!(solver, oracle, max_relative = 1e-9, epsilon = 1e-12);
    }

    /// The solver agrees with exhaustive permutation search on tiny uniform
    /// instances in up to three dimensions.
    #[test]
    fn solver_matches_brute_force_on_tiny_instances(
        d in 1usize..=3,
        xs_raw in prop::collection::vec(prop::collection::vec(-4.0f64..4.0, 3), 1..=5),
        ys_raw in prop::collection::vec(prop::collection::vec(-4.0f64..4.0, 3), 1..=5),
        p in order(),
    ) {
        let xs = separated(&xs_raw.iter().map(|c| c[..d].to_vec()).collect::<Vec<_>>());
        let ys = separated(&ys_raw.iter().map(|c| c[..d].to_vec()).collect::<Vec<_>>());
        let n = xs.len().min(ys.len());
        let mu = DiscreteMeasure::empirical(&xs[..n]).unwrap();
        let nu = DiscreteMeasure::empirical(&ys[..n]).unwrap();
        let solver = wasserstein(&mu, &nu, p).unwrap().cost;
        let brute = brute_force_wasserstein(&mu, &nu, p).unwrap();
        assert_relative_eq!(solver, brute, max_relative = 1e-9, epsilon = 1e-12);
    }
}

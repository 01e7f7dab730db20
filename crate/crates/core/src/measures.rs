//! Discrete measures, nearest-center projection, and pushforward construction.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// A point in D-dimensional real coordinate space.
#[derive(Clone, Debug, PartialEq)]
pub struct Point<T: Real> {
    coords: Vec<T>,
}

impl<T: Real> Point<T> {
    pub fn new(coords: Vec<T>) -> Self {
        Point { coords }
    }

    pub fn from_slice(coords: &[T]) -> Self {
        Point {
            coords: coords.to_vec(),
        }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[T] {
        &self.coords
    }

    /// Squared Euclidean distance to another point of the same dimension.
    pub fn sqdist(&self, other: &Self) -> T {
        debug_assert_eq!(self.dim(), other.dim());
        let mut acc = T::zero();
        for (a, b) in self.coords.iter().zip(other.coords.iter()) {
            let d = *a - *b;
            acc += d * d;
        }
        acc
    }

    pub fn is_finite(&self) -> bool {
        self.coords.iter().all(|c| c.is_finite())
    }

    /// Bit-pattern key used for exact duplicate detection. Collapses -0.0
    /// into +0.0 so coincident atoms always merge.
    fn bit_key(&self) -> Vec<u64> {
        self.coords
            .iter()
            .map(|c| {
                let v = c.to_f64_lossy();
                let v = if v == 0.0 { 0.0 } else { v };
                v.to_bits()
            })
            .collect()
    }
}

/// Compensated (Kahan) sum; keeps weight bookkeeping accurate for large
/// supports.
pub(crate) fn kahan_sum<T: Real, I: IntoIterator<Item = T>>(values: I) -> T {
    let mut sum = T::zero();
    let mut carry = T::zero();
    for v in values {
        let y = v - carry;
        let t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }
    sum
}

/// Tolerance for accepting input weight sums as "one".
const WEIGHT_SUM_INPUT_TOL: f64 = 1e-9;
/// Pairwise distinctness tolerance for codebook centers.
pub(crate) const CENTER_DISTINCT_TOL: f64 = 1e-12;

/// A finitely supported probability measure: distinct atoms with positive
/// weights summing to one.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteMeasure<T: Real> {
    support: Vec<Point<T>>,
    weights: Vec<T>,
}

impl<T: Real> DiscreteMeasure<T> {
    /// Builds a measure from points and weights.
    ///
    /// Weights must be nonnegative and sum to 1 within `1e-9`; the sum is
    /// renormalized exactly afterwards. Duplicate points are merged with
    /// combined mass and zero-weight atoms are dropped.
    pub fn new(points: Vec<Point<T>>, weights: Vec<T>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptyInput("measure support"));
        }
        if points.len() != weights.len() {
            return Err(Error::InvalidWeights(format!(
                "{} points but {} weights",
                points.len(),
                weights.len()
            )));
        }
        let dim = points[0].dim();
        for p in &points {
            if p.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: p.dim(),
                });
            }
            if !p.is_finite() {
                return Err(Error::InvalidParameter(
                    "non-finite coordinate in support point".into(),
                ));
            }
        }
        for w in &weights {
            if !w.is_finite() || *w < T::zero() {
                return Err(Error::InvalidWeights(format!("negative or non-finite weight {w}")));
            }
        }
        let sum_f64 = kahan_sum(weights.iter().map(|w| w.to_f64_lossy()));
        if (sum_f64 - 1.0).abs() > WEIGHT_SUM_INPUT_TOL {
            return Err(Error::InvalidWeights(format!(
                "weights sum to {sum_f64}, expected 1"
            )));
        }
        Ok(Self::merged(points, weights))
    }

    /// Uniform measure on a sample; repeated points get combined mass.
    pub fn empirical(sample: &[Point<T>]) -> Result<Self> {
        if sample.is_empty() {
            return Err(Error::EmptyInput("empirical sample"));
        }
        let w = T::one() / T::from_usize(sample.len()).unwrap();
        Self::new(sample.to_vec(), vec![w; sample.len()])
    }

    /// Merge duplicates, drop zero weights, renormalize. Assumes inputs are
    /// already validated.
    fn merged(points: Vec<Point<T>>, weights: Vec<T>) -> Self {
        let mut index: HashMap<Vec<u64>, usize> = HashMap::with_capacity(points.len());
        let mut support: Vec<Point<T>> = Vec::new();
        let mut mass: Vec<T> = Vec::new();
        for (p, w) in points.into_iter().zip(weights) {
            match index.entry(p.bit_key()) {
                std::collections::hash_map::Entry::Occupied(e) => {
                    mass[*e.get()] += w;
                }
                std::collections::hash_map::Entry::Vacant(e) => {
                    e.insert(support.len());
                    support.push(p);
                    mass.push(w);
                }
            }
        }
        let keep: Vec<usize> = (0..support.len()).filter(|&i| mass[i] > T::zero()).collect();
        let mut support: Vec<Point<T>> = {
            let mut out = Vec::with_capacity(keep.len());
            for &i in &keep {
                out.push(support[i].clone());
            }
            out
        };
        let mut mass: Vec<T> = keep.iter().map(|&i| mass[i]).collect();
        // Renormalize only when measurably off so that an already-normalized
        // measure passes through bit-exactly (pushforward idempotence).
        let sum = kahan_sum(mass.iter().copied());
        let tol = T::from_f64_lossy(32.0) * T::epsilon();
        if (sum - T::one()).abs() > tol {
            for w in &mut mass {
                *w /= sum;
            }
        }
        support.shrink_to_fit();
        DiscreteMeasure {
            support,
            weights: mass,
        }
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.support[0].dim()
    }

    pub fn support(&self) -> &[Point<T>] {
        &self.support
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn total_mass(&self) -> T {
        kahan_sum(self.weights.iter().copied())
    }

    /// Image of the measure under nearest-center projection onto `book`.
    ///
    /// The weight of each center is the total mass of the atoms it captures;
    /// centers capturing nothing do not appear in the result.
    pub fn push_forward(&self, book: &Codebook<T>) -> Result<Self> {
        if self.dim() != book.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: book.dim(),
            });
        }
        let mut mass = vec![T::zero(); book.len()];
        for (p, w) in self.support.iter().zip(&self.weights) {
            mass[book.nearest_index(p)?] += *w;
        }
        let mut support = Vec::new();
        let mut weights = Vec::new();
        for (c, w) in book.centers().iter().zip(mass) {
            if w > T::zero() {
                support.push(c.clone());
                weights.push(w);
            }
        }
        let sum = kahan_sum(weights.iter().copied());
        let tol = T::from_f64_lossy(32.0) * T::epsilon();
        if (sum - T::one()).abs() > tol {
            for w in &mut weights {
                *w /= sum;
            }
        }
        Ok(DiscreteMeasure { support, weights })
    }

    /// Mean `p`-th power distance from the measure to the center set:
    /// `Σ_i w_i · d(x_i, book)^p`.
    pub fn expected_distance_power(&self, book: &Codebook<T>, p: T) -> Result<T> {
        if self.dim() != book.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: book.dim(),
            });
        }
        if p < T::one() {
            return Err(Error::InvalidParameter(format!("order p = {p} < 1")));
        }
        let mut acc = T::zero();
        for (x, w) in self.support.iter().zip(&self.weights) {
            let mut best = T::infinity();
            for c in book.centers() {
                let d2 = x.sqdist(c);
                if d2 < best {
                    best = d2;
                }
            }
            acc += *w * pow_of_sqdist(best, p);
        }
        Ok(acc)
    }
}

/// Raises a squared distance to the power `p/2`, i.e. computes `d^p` from
/// `d²`, with exact fast paths for p = 1 and p = 2.
pub(crate) fn pow_of_sqdist<T: Real>(sq: T, p: T) -> T {
    if p == T::from_f64_lossy(2.0) {
        sq
    } else if p == T::one() {
        sq.sqrt()
    } else {
        sq.powf(p / T::from_f64_lossy(2.0))
    }
}

/// A finite set of pairwise-distinct centers.
#[derive(Clone, Debug, PartialEq)]
pub struct Codebook<T: Real> {
    centers: Vec<Point<T>>,
}

impl<T: Real> Codebook<T> {
    /// Validates non-emptiness, equal dimensions, finiteness, and pairwise
    /// distinctness (Euclidean distance above `1e-12`).
    pub fn new(centers: Vec<Point<T>>) -> Result<Self> {
        if centers.is_empty() {
            return Err(Error::EmptyInput("codebook centers"));
        }
        let dim = centers[0].dim();
        for c in &centers {
            if c.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: c.dim(),
                });
            }
            if !c.is_finite() {
                return Err(Error::InvalidParameter(
                    "non-finite coordinate in center".into(),
                ));
            }
        }
        let tol2 = T::from_f64_lossy(CENTER_DISTINCT_TOL * CENTER_DISTINCT_TOL);
        for i in 0..centers.len() {
            for j in (i + 1)..centers.len() {
                if centers[i].sqdist(&centers[j]) <= tol2 {
                    return Err(Error::InvalidParameter(format!(
                        "centers {i} and {j} coincide within tolerance"
                    )));
                }
            }
        }
        Ok(Codebook { centers })
    }

    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.centers[0].dim()
    }

    pub fn centers(&self) -> &[Point<T>] {
        &self.centers
    }

    /// Index of a nearest center; ties break to the lowest index, so the
    /// induced Voronoi partition is deterministic.
    pub fn nearest_index(&self, x: &Point<T>) -> Result<usize> {
        if x.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: x.dim(),
            });
        }
        let mut best = T::infinity();
        let mut arg = 0usize;
        for (i, c) in self.centers.iter().enumerate() {
            let d2 = x.sqdist(c);
            if d2 < best {
                best = d2;
                arg = i;
            }
        }
        Ok(arg)
    }
}

//! Exact p-Wasserstein distances between discrete measures.
//!
//! [`wasserstein`] routes by instance size: tiny/degenerate cases are solved
//! directly, large 1-D instances use the monotone coupling, moderate
//! instances run the network simplex over all arcs, and very large instances
//! use lazy arc generation: solve a restricted problem, scan all pairs for
//! dual violations, add the offenders, repeat until a full scan certifies
//! optimality. Every route returns an exact optimal vertex of the transport
//! polytope.

mod kdtree;
mod oracles;
pub(crate) mod simplex;

use std::collections::HashSet;

pub use oracles::{brute_force_wasserstein, obm_cost, wasserstein_1d};

use crate::error::{Error, Result};
use crate::measures::{kahan_sum, pow_of_sqdist, DiscreteMeasure};
use crate::rng::stream_rng;
use crate::scalar::Real;
use kdtree::KdTree;
use oracles::root_p;
use simplex::TransportSimplex;

/// One sparse coupling entry: `mass` moves from source atom `row` to target
/// atom `col`.
#[derive(Clone, Debug, PartialEq)]
pub struct PlanEntry<T: Real> {
    pub row: usize,
    pub col: usize,
    pub mass: T,
}

/// Sparse optimal coupling between two discrete measures.
#[derive(Clone, Debug, PartialEq)]
pub struct TransportPlan<T: Real> {
    m: usize,
    n: usize,
    entries: Vec<PlanEntry<T>>,
}

impl<T: Real> TransportPlan<T> {
    pub fn entries(&self) -> &[PlanEntry<T>] {
        &self.entries
    }

    pub fn num_entries(&self) -> usize {
        self.entries.len()
    }

    pub fn source_len(&self) -> usize {
        self.m
    }

    pub fn target_len(&self) -> usize {
        self.n
    }

    pub fn row_marginals(&self) -> Vec<T> {
        let mut out = vec![T::zero(); self.m];
        for e in &self.entries {
            out[e.row] += e.mass;
        }
        out
    }

    pub fn col_marginals(&self) -> Vec<T> {
        let mut out = vec![T::zero(); self.n];
        for e in &self.entries {
            out[e.col] += e.mass;
        }
        out
    }
}

/// A Wasserstein distance together with an optimal plan realizing it.
#[derive(Clone, Debug)]
pub struct OTResult<T: Real> {
    pub cost: T,
    pub plan: TransportPlan<T>,
    pub p: T,
}

/// Tuning knobs for the solver routes; only tests override the defaults.
#[derive(Clone, Debug)]
pub(crate) struct SolveOptions {
    /// Maximum m·n solved with the full arc set.
    pub dense_limit: usize,
    /// Candidate arcs per source point (lazy route).
    pub knn_fwd: usize,
    /// Candidate arcs per target point (lazy route).
    pub knn_rev: usize,
    /// 1-D instances whose larger side reaches this size take the monotone
    /// coupling path.
    pub quantile_min: usize,
    /// Per-row cap on arcs admitted per lazy round.
    pub row_cap: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            dense_limit: 1 << 22,
            knn_fwd: 8,
            knn_rev: 8,
            quantile_min: 257,
            row_cap: 64,
        }
    }
}

/// Exact W_p between two discrete measures on the same ambient space,
/// together with an optimal vertex plan (at most m + n − 1 entries).
pub fn wasserstein<T: Real>(
    mu: &DiscreteMeasure<T>,
    nu: &DiscreteMeasure<T>,
    p: T,
) -> Result<OTResult<T>> {
    wasserstein_with(mu, nu, p, &SolveOptions::default())
}

pub(crate) fn wasserstein_with<T: Real>(
    mu: &DiscreteMeasure<T>,
    nu: &DiscreteMeasure<T>,
    p: T,
    opts: &SolveOptions,
) -> Result<OTResult<T>> {
    if mu.dim() != nu.dim() {
        return Err(Error::DimensionMismatch {
            expected: mu.dim(),
            found: nu.dim(),
        });
    }
    if !(p >= T::one()) || !p.is_finite() {
        return Err(Error::InvalidParameter(format!("order p = {p} must be >= 1")));
    }
    let d = mu.dim();
    let (m, n) = (mu.len(), nu.len());
    let pc = PairCost::new(mu, nu, p);

    let raw: Vec<(u32, u32, T)> = if m == 1 {
        (0..n).map(|j| (0u32, j as u32, nu.weights()[j])).collect()
    } else if n == 1 {
        (0..m).map(|i| (i as u32, 0u32, mu.weights()[i])).collect()
    } else if d == 1 && m.max(n) >= opts.quantile_min {
        monotone_plan(mu, nu)
    } else if m * n <= opts.dense_limit {
        solve_dense(mu, nu, &pc)?
    } else {
        solve_lazy(mu, nu, &pc, opts)?
    };

    finalize(mu, nu, p, &pc, raw)
}

/// Shared cost evaluator over flattened coordinates.
struct PairCost<T: Real> {
    xs: Vec<T>,
    ys: Vec<T>,
    d: usize,
    p: T,
    /// Upper bound on any pairwise cost (from joint bounding box).
    max_cost: T,
}

impl<T: Real> PairCost<T> {
    fn new(mu: &DiscreteMeasure<T>, nu: &DiscreteMeasure<T>, p: T) -> Self {
        let d = mu.dim();
        let flat = |m: &DiscreteMeasure<T>| -> Vec<T> {
            let mut v = Vec::with_capacity(m.len() * d);
            for pt in m.support() {
                v.extend_from_slice(pt.coords());
            }
            v
        };
        let mut xs = flat(mu);
        let mut ys = flat(nu);
        // Pairwise distances only depend on the affine span of the joint
        // point set; data embedded from a lower-dimensional space (or any
        // rank-deficient cloud) gets rotated down to that span first (an
        // exact isometry), which shrinks every later per-coordinate loop.
        let d = if d > 3 && d <= 256 {
            affine_reduce(&mut xs, &mut ys, d)
        } else {
            d
        };
        let mut diam2 = T::zero();
        for a in 0..d {
            let mut lo = T::infinity();
            let mut hi = T::neg_infinity();
            for v in xs.iter().skip(a).step_by(d).chain(ys.iter().skip(a).step_by(d)) {
                lo = lo.min(*v);
                hi = hi.max(*v);
            }
            let w = hi - lo;
            diam2 += w * w;
        }
        let max_cost = pow_of_sqdist(diam2, p).max(T::min_positive_value());
        PairCost { xs, ys, d, p, max_cost }
    }

    #[inline]
    fn sqdist(&self, i: usize, j: usize) -> T {
        let a = &self.xs[i * self.d..(i + 1) * self.d];
        let b = &self.ys[j * self.d..(j + 1) * self.d];
        let mut acc = T::zero();
        for t in 0..self.d {
            let d = a[t] - b[t];
            acc += d * d;
        }
        acc
    }

    #[inline]
    fn cost(&self, i: usize, j: usize) -> T {
        pow_of_sqdist(self.sqdist(i, j), self.p)
    }

    fn eps_pivot(&self) -> T {
        self.max_cost * T::epsilon() * T::from_f64_lossy(64.0)
    }

    fn eps_scan(&self) -> T {
        let rel = T::from_f64_lossy(1e-12).max(T::epsilon() * T::from_f64_lossy(256.0));
        self.max_cost * rel
    }

    fn big(&self) -> T {
        self.max_cost * T::from_f64_lossy(3.0) + T::one()
    }
}

/// Rotates the joint cloud onto the principal axes of its covariance and
/// drops directions with no variance, preserving all pairwise distances.
/// Returns the reduced dimension; `xs`/`ys` are rewritten in place.
fn affine_reduce<T: Real>(xs: &mut Vec<T>, ys: &mut Vec<T>, d: usize) -> usize {
    let total = xs.len() / d + ys.len() / d;
    let rows = |v: &[T]| -> Vec<f64> { v.iter().map(|c| c.to_f64_lossy()).collect() };
    let ax = rows(xs);
    let ay = rows(ys);
    let mut mean = vec![0.0f64; d];
    for row in ax.chunks_exact(d).chain(ay.chunks_exact(d)) {
        for (m, v) in mean.iter_mut().zip(row) {
            *m += v;
        }
    }
    for m in mean.iter_mut() {
        *m /= total as f64;
    }
    let mut cov = vec![0.0f64; d * d];
    let mut centered = vec![0.0f64; d];
    for row in ax.chunks_exact(d).chain(ay.chunks_exact(d)) {
        for (c, (v, m)) in centered.iter_mut().zip(row.iter().zip(&mean)) {
            *c = v - m;
        }
        for a in 0..d {
            for b in a..d {
                cov[a * d + b] += centered[a] * centered[b];
            }
        }
    }
    for a in 0..d {
        for b in 0..a {
            cov[a * d + b] = cov[b * d + a];
        }
    }
    let (eigvals, basis) = sym_eigen_jacobi(&mut cov, d);
    let top = eigvals.iter().cloned().fold(0.0f64, f64::max);
    if top <= 0.0 {
        // All points coincide; one dummy coordinate keeps the shape valid.
        *xs = vec![T::zero(); xs.len() / d];
        *ys = vec![T::zero(); ys.len() / d];
        return 1;
    }
    let keep: Vec<usize> = (0..d).filter(|&i| eigvals[i] > top * 1e-20).collect();
    let r = keep.len().max(1);
    if r >= d {
        return d;
    }
    let project = |rows_f: &[f64], out: &mut Vec<T>| {
        let n = rows_f.len() / d;
        let mut next = Vec::with_capacity(n * r);
        for row in rows_f.chunks_exact(d) {
            for &k in keep.iter().take(r) {
                let mut acc = 0.0;
                for a in 0..d {
                    acc += (row[a] - mean[a]) * basis[a * d + k];
                }
                next.push(T::from_f64_lossy(acc));
            }
        }
        *out = next;
    };
    project(&ax, xs);
    project(&ay, ys);
    r
}

/// Cyclic Jacobi eigendecomposition of a symmetric matrix (row-major,
/// destroyed). Returns eigenvalues and the orthonormal eigenvector matrix
/// with eigenvector `k` in column `k`.
fn sym_eigen_jacobi(a: &mut [f64], n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut v = vec![0.0f64; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    for _sweep in 0..64 {
        let mut off = 0.0;
        for p in 0..n {
            for q in p + 1..n {
                off += a[p * n + q] * a[p * n + q];
            }
        }
        if off.sqrt() <= 1e-14 * (1.0 + a.iter().map(|x| x.abs()).fold(0.0, f64::max)) {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let vals = (0..n).map(|i| a[i * n + i]).collect();
    (vals, v)
}

/// Monotone (quantile) coupling for 1-D inputs: optimal for every convex
/// cost, hence for all p >= 1.
fn monotone_plan<T: Real>(mu: &DiscreteMeasure<T>, nu: &DiscreteMeasure<T>) -> Vec<(u32, u32, T)> {
    let order = |m: &DiscreteMeasure<T>| -> Vec<u32> {
        let mut idx: Vec<u32> = (0..m.len() as u32).collect();
        idx.sort_unstable_by(|&a, &b| {
            let ca = m.support()[a as usize].coords()[0];
            let cb = m.support()[b as usize].coords()[0];
            ca.partial_cmp(&cb).unwrap().then(a.cmp(&b))
        });
        idx
    };
    let oa = order(mu);
    let ob = order(nu);
    let mut entries = Vec::with_capacity(mu.len() + nu.len());
    let mut ia = 0usize;
    let mut ib = 0usize;
    let mut ra = mu.weights()[oa[0] as usize];
    let mut rb = nu.weights()[ob[0] as usize];
    loop {
        let step = ra.min(rb);
        if step > T::zero() {
            entries.push((oa[ia], ob[ib], step));
        }
        ra -= step;
        rb -= step;
        if ra <= T::zero() {
            ia += 1;
            if ia == oa.len() {
                break;
            }
            ra = mu.weights()[oa[ia] as usize];
        }
        if rb <= T::zero() {
            ib += 1;
            if ib == ob.len() {
                break;
            }
            rb = nu.weights()[ob[ib] as usize];
        }
    }
    entries
}

/// Morton (bit-interleaved) orderings of both supports over their joint
/// bounding box. Consecutive atoms along the curve are close in every
/// coordinate, so walks over these orders produce near-local pairings; in
/// one dimension the key degenerates to the plain coordinate order.
fn morton_orders<T: Real>(pc: &PairCost<T>) -> (Vec<u32>, Vec<u32>) {
    let d = pc.d;
    let bits = (63 / d).min(21) as u32;
    let mut lo = vec![T::infinity(); d];
    let mut hi = vec![T::neg_infinity(); d];
    for row in pc.xs.chunks_exact(d).chain(pc.ys.chunks_exact(d)) {
        for t in 0..d {
            lo[t] = lo[t].min(row[t]);
            hi[t] = hi[t].max(row[t]);
        }
    }
    let top = ((1u64 << bits) - 1) as f64;
    let scale: Vec<f64> = (0..d)
        .map(|t| {
            let w = (hi[t] - lo[t]).to_f64_lossy();
            if w > 0.0 { top / w } else { 0.0 }
        })
        .collect();
    let morton = |coords: &[T]| -> Vec<u32> {
        let mut keyed: Vec<(u64, u32)> = coords
            .chunks_exact(d)
            .enumerate()
            .map(|(i, row)| {
                let mut key = 0u64;
                for t in 0..d {
                    let q = ((row[t] - lo[t]).to_f64_lossy() * scale[t]) as u64;
                    for b in 0..bits {
                        key |= ((q >> b) & 1) << (b * d as u32 + t as u32);
                    }
                }
                (key, i as u32)
            })
            .collect();
        keyed.sort_unstable();
        keyed.into_iter().map(|(_, i)| i).collect()
    };
    (morton(&pc.xs), morton(&pc.ys))
}

fn solve_dense<T: Real>(
    mu: &DiscreteMeasure<T>,
    nu: &DiscreteMeasure<T>,
    pc: &PairCost<T>,
) -> Result<Vec<(u32, u32, T)>> {
    let (m, n) = (mu.len(), nu.len());
    let mut s = TransportSimplex::new(mu.weights(), nu.weights(), pc.big(), pc.eps_pivot());
    for i in 0..m {
        for j in 0..n {
            s.add_arc(i as u32, j as u32, pc.cost(i, j));
        }
    }
    s.optimize()?;
    check_artificial(&s)?;
    Ok(s.plan())
}

fn check_artificial<T: Real>(s: &TransportSimplex<T>) -> Result<()> {
    let worst = s.max_artificial_flow();
    if worst > T::from_f64_lossy(1e-9) {
        return Err(Error::SolverStalled(format!(
            "artificial flow {worst} remains at optimum"
        )));
    }
    Ok(())
}

/// Lazy arc generation for instances too large to hold every arc: install
/// the greedy coupling over a geometric candidate pool as the starting
/// basis, then alternate restricted solves with full dual-feasibility
/// scans until a scan finds no violated arc. The final clean scan
/// certifies global optimality.
fn solve_lazy<T: Real>(
    mu: &DiscreteMeasure<T>,
    nu: &DiscreteMeasure<T>,
    pc: &PairCost<T>,
    opts: &SolveOptions,
) -> Result<Vec<(u32, u32, T)>> {
    let (m, n) = (mu.len(), nu.len());
    let d = pc.d;
    let mut s = TransportSimplex::new(mu.weights(), nu.weights(), pc.big(), pc.eps_pivot());
    let mut seen: HashSet<u64> = HashSet::with_capacity(8 * (m + n));
    let key = |i: u32, j: u32| ((i as u64) << 32) | j as u64;

    let (oa, ob) = morton_orders(pc);
    let mut escalated = false;
    {
        let mut admit = |i: u32, j: u32| admit_arc(&mut s, &mut seen, pc, i, j);

        // A staircase walk along the space-filling orders keeps the pool
        // connected end to end.
        coupling_walk(mu.weights(), nu.weights(), &oa, &ob, |i, j, _| admit(i, j));

        // Nearest-neighbor candidates from both sides. When the sides are
        // unbalanced each small-side atom serves about n/m large-side
        // atoms, so the neighbor budget scales with the ratio or the pool
        // starts nowhere near the optimal support.
        let k_fwd = (opts.knn_fwd * n.div_ceil(m)).min(64.max(opts.knn_fwd)).min(n);
        let k_rev = (opts.knn_rev * m.div_ceil(n)).min(64.max(opts.knn_rev)).min(m);
        let mut out = Vec::new();
        let mut heap = Vec::new();
        {
            let tree_y = KdTree::build(&pc.ys, d);
            for i in 0..m {
                tree_y.knn_into(&pc.xs[i * d..(i + 1) * d], k_fwd, &mut out, &mut heap);
                for t in 0..out.len() {
                    admit(i as u32, out[t]);
                }
            }
        }
        {
            let tree_x = KdTree::build(&pc.xs, d);
            for j in 0..n {
                tree_x.knn_into(&pc.ys[j * d..(j + 1) * d], k_rev, &mut out, &mut heap);
                for t in 0..out.len() {
                    admit(out[t], j as u32);
                }
            }
        }

        // In the plane the per-point neighborhoods cannot carry the
        // long-range mass drift an optimal plan needs, and waiting for a
        // flooded scan to prove that wastes a full restricted solve: admit
        // the global coupling walks up front. Higher dimensions keep the
        // lean pool; the in-loop escalation still covers them if a scan
        // floods.
        if d == 2 {
            escalated = true;
            admit_global_walks(pc, mu, nu, &mut admit);
        }
    }

    let debug = std::env::var_os("WASSQUANT_OT_DEBUG").is_some();
    let t_start = std::time::Instant::now();
    let eps = pc.eps_scan();
    // row_best[r] holds this row's most violated candidates.
    let mut row_best: Vec<(T, u32)> = Vec::with_capacity(opts.row_cap);
    let mut qj: Vec<T> = vec![T::zero(); n];
    let mut pending: Vec<(u32, u32)> = Vec::new();
    for round in 0..256 {
        let t_round = std::time::Instant::now();
        let pivots_before = s.pivot_count();
        s.optimize()?;
        if debug {
            let (ev, cyc, sub) = s.stats();
            eprintln!(
                "[ot] round {round}: {} arcs, +{} pivots, solve {:.2?}, total {:.2?}, ev {ev} cyc {cyc} sub {sub}",
                seen.len(),
                s.pivot_count() - pivots_before,
                t_round.elapsed(),
                t_start.elapsed()
            );
        }
        let pi = s.pi();
        // r(i,j) = c(i,j) - pi[i] + pi[m + j]; for p = 2 split the squared
        // distance so the inner loop is a plain dot product.
        let two = T::from_f64_lossy(2.0);
        let is_p2 = pc.p == two;
        if is_p2 {
            for j in 0..n {
                let base = j * d;
                let mut nrm = T::zero();
                for t in 0..d {
                    let v = pc.ys[base + t];
                    nrm += v * v;
                }
                qj[j] = nrm + pi[m + j];
            }
        } else {
            for j in 0..n {
                qj[j] = pi[m + j];
            }
        }
        pending.clear();
        for i in 0..m {
            let xi = &pc.xs[i * d..(i + 1) * d];
            let off = if is_p2 {
                let mut nrm = T::zero();
                for t in 0..d {
                    nrm += xi[t] * xi[t];
                }
                nrm - pi[i]
            } else {
                -pi[i]
            };
            row_best.clear();
            if is_p2 {
                match d {
                    1 => scan_row_p2::<T, 1>(xi, &pc.ys, &qj, off, eps, &mut row_best, opts.row_cap),
                    2 => scan_row_p2::<T, 2>(xi, &pc.ys, &qj, off, eps, &mut row_best, opts.row_cap),
                    3 => scan_row_p2::<T, 3>(xi, &pc.ys, &qj, off, eps, &mut row_best, opts.row_cap),
                    _ => scan_row_p2_gen(xi, &pc.ys, d, &qj, off, eps, &mut row_best, opts.row_cap),
                }
            } else {
                for j in 0..n {
                    let r = pc.cost(i, j) + off + qj[j];
                    if r < -eps {
                        push_candidate(&mut row_best, opts.row_cap, r, j as u32);
                    }
                }
            }
            for &(_, j) in row_best.iter() {
                pending.push((i as u32, j));
            }
        }
        if debug {
            eprintln!(
                "[ot] round {round}: scan found {} violated arcs in {:.2?}",
                pending.len(),
                t_round.elapsed()
            );
        }
        if pending.is_empty() {
            check_artificial(&s)?;
            return Ok(s.plan());
        }
        // A scan this full means whole candidate families are missing, not
        // stray arcs: escalate once with global coupling walks (projections,
        // angular and radial orders about the centroid). These carry the
        // long-range mass drift that per-point neighborhoods cannot.
        if !escalated && pending.len() > (m + n) / 8 {
            escalated = true;
            admit_global_walks(pc, mu, nu, &mut |i, j| admit_arc(&mut s, &mut seen, pc, i, j));
            if debug {
                eprintln!("[ot] round {round}: escalated pool to {} arcs", seen.len());
            }
        }
        let mut grew = false;
        for &(i, j) in &pending {
            if seen.insert(key(i, j)) {
                s.add_arc(i, j, pc.cost(i as usize, j as usize));
                grew = true;
            }
        }
        if !grew {
            return Err(Error::SolverStalled(
                "dual violations persist on admitted arcs".into(),
            ));
        }
    }
    Err(Error::SolverStalled("arc generation did not converge".into()))
}

#[inline]
fn admit_arc<T: Real>(
    s: &mut TransportSimplex<T>,
    seen: &mut HashSet<u64>,
    pc: &PairCost<T>,
    i: u32,
    j: u32,
) {
    if seen.insert(((i as u64) << 32) | j as u64) {
        s.add_arc(i, j, pc.cost(i as usize, j as usize));
    }
}

/// Coupling walks along global orderings: linear projections (fixed axes
/// plus seeded random directions), angle about the joint centroid (two cut
/// origins, so a rotation across either cut is still covered), and radius.
fn admit_global_walks<T: Real>(
    pc: &PairCost<T>,
    mu: &DiscreteMeasure<T>,
    nu: &DiscreteMeasure<T>,
    admit: &mut impl FnMut(u32, u32),
) {
    let d = pc.d;
    if d < 2 {
        return;
    }
    let (m, n) = (mu.len(), nu.len());
    let order_by = |coords: &[T], len: usize, score: &dyn Fn(&[T]) -> f64| -> Vec<u32> {
        let mut keyed: Vec<(f64, u32)> = (0..len)
            .map(|i| (score(&coords[i * d..(i + 1) * d]), i as u32))
            .collect();
        keyed.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
        keyed.into_iter().map(|(_, i)| i).collect()
    };
    let mut walk = |score: &dyn Fn(&[T]) -> f64| {
        let oa = order_by(&pc.xs, m, score);
        let ob = order_by(&pc.ys, n, score);
        coupling_walk(mu.weights(), nu.weights(), &oa, &ob, |i, j, _| admit(i, j));
    };

    let mut dirs: Vec<Vec<f64>> = Vec::new();
    for axis in 1..d.min(3) {
        let mut u = vec![0.0; d];
        u[axis] = 1.0;
        dirs.push(u);
    }
    let mut dir_rng = stream_rng(0xd15e_c7ed, 0);
    for _ in 0..2 {
        let mut u: Vec<f64> = (0..d)
            .map(|_| rand_distr::Distribution::sample(&rand_distr::StandardNormal, &mut dir_rng))
            .collect();
        let nrm: f64 = u.iter().map(|v| v * v).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
        u.iter_mut().for_each(|v| *v /= nrm);
        dirs.push(u);
    }
    for u in &dirs {
        walk(&|row: &[T]| row.iter().zip(u).map(|(c, w)| c.to_f64_lossy() * w).sum());
    }

    let mut mean = vec![0.0f64; d];
    for row in pc.xs.chunks_exact(d).chain(pc.ys.chunks_exact(d)) {
        for (m_axis, c) in mean.iter_mut().zip(row) {
            *m_axis += c.to_f64_lossy();
        }
    }
    mean.iter_mut().for_each(|v| *v /= (m + n) as f64);
    for cut in [0.0f64, 2.0] {
        let mean = mean.clone();
        walk(&move |row: &[T]| {
            let a = (row[1].to_f64_lossy() - mean[1]).atan2(row[0].to_f64_lossy() - mean[0]);
            (a + cut).rem_euclid(std::f64::consts::TAU)
        });
    }
    let mean = mean.clone();
    walk(&move |row: &[T]| {
        row.iter()
            .zip(&mean)
            .map(|(c, mm)| {
                let v = c.to_f64_lossy() - mm;
                v * v
            })
            .sum()
    });
}

/// Greedy mass walk over two orderings of the supports: visits exactly
/// m + n - 1 (row, col) pairs forming a connected feasible skeleton, and
/// reports the mass each pair carries (zero on exact block boundaries).
fn coupling_walk<T: Real>(
    wa: &[T],
    wb: &[T],
    oa: &[u32],
    ob: &[u32],
    mut emit: impl FnMut(u32, u32, T),
) {
    let (m, n) = (oa.len(), ob.len());
    let mut ia = 0usize;
    let mut ib = 0usize;
    let mut ra = wa[oa[0] as usize];
    let mut rb = wb[ob[0] as usize];
    loop {
        let step = ra.min(rb);
        emit(oa[ia], ob[ib], step);
        ra -= step;
        rb -= step;
        if ia == m - 1 && ib == n - 1 {
            break;
        }
        // Advance the exhausted side; a source exhausted together with its
        // sink advances first, so the zero-mass arc that follows enters
        // through the fresh source (the orientation the basis needs). The
        // rails force progress even if rounding leaves a stray remainder.
        if ra <= T::zero() && ia < m - 1 {
            ia += 1;
            ra = wa[oa[ia] as usize];
        } else if ib < n - 1 {
            ib += 1;
            rb = wb[ob[ib] as usize];
        } else {
            ia += 1;
            ra = wa[oa[ia] as usize];
        }
    }
}

/// Keeps the `cap` most negative candidates, most negative first.
#[inline]
fn push_candidate<T: Real>(best: &mut Vec<(T, u32)>, cap: usize, r: T, j: u32) {
    if best.len() < cap {
        best.push((r, j));
        best.sort_unstable_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    } else if r < best[cap - 1].0 {
        best[cap - 1] = (r, j);
        let mut pos = cap - 1;
        while pos > 0 && best[pos].0 < best[pos - 1].0 {
            best.swap(pos, pos - 1);
            pos -= 1;
        }
    }
}

#[inline]
fn scan_row_p2<T: Real, const D: usize>(
    xi: &[T],
    ys: &[T],
    qj: &[T],
    off: T,
    eps: T,
    best: &mut Vec<(T, u32)>,
    cap: usize,
) {
    let two = T::from_f64_lossy(2.0);
    let mut x = [T::zero(); D];
    x.copy_from_slice(&xi[..D]);
    for (j, q) in qj.iter().enumerate() {
        let base = j * D;
        let mut dot = T::zero();
        for t in 0..D {
            dot += x[t] * ys[base + t];
        }
        let r = off + *q - two * dot;
        if r < -eps {
            push_candidate(best, cap, r, j as u32);
        }
    }
}

#[inline]
#[allow(clippy::too_many_arguments)]
fn scan_row_p2_gen<T: Real>(
    xi: &[T],
    ys: &[T],
    d: usize,
    qj: &[T],
    off: T,
    eps: T,
    best: &mut Vec<(T, u32)>,
    cap: usize,
) {
    let two = T::from_f64_lossy(2.0);
    for (j, q) in qj.iter().enumerate() {
        let base = j * d;
        let mut dot = T::zero();
        for t in 0..d {
            dot += xi[t] * ys[base + t];
        }
        let r = off + *q - two * dot;
        if r < -eps {
            push_candidate(best, cap, r, j as u32);
        }
    }
}

/// Sorts entries, recomputes the cost from the plan, and enforces the plan
/// contract (marginals within 1e-9, vertex sparsity).
fn finalize<T: Real>(
    mu: &DiscreteMeasure<T>,
    nu: &DiscreteMeasure<T>,
    p: T,
    pc: &PairCost<T>,
    mut raw: Vec<(u32, u32, T)>,
) -> Result<OTResult<T>> {
    raw.sort_unstable_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
    let entries: Vec<PlanEntry<T>> = raw
        .iter()
        .map(|&(i, j, f)| PlanEntry {
            row: i as usize,
            col: j as usize,
            mass: f,
        })
        .collect();
    let plan = TransportPlan {
        m: mu.len(),
        n: nu.len(),
        entries,
    };
    if plan.num_entries() > mu.len() + nu.len() - 1 {
        return Err(Error::SolverStalled(format!(
            "plan has {} entries for supports {} and {}",
            plan.num_entries(),
            mu.len(),
            nu.len()
        )));
    }
    let tol = T::from_f64_lossy(1e-9).max(T::epsilon() * T::from_f64_lossy(512.0));
    for (got, want) in plan.row_marginals().iter().zip(mu.weights()) {
        if (*got - *want).abs() > tol {
            return Err(Error::SolverStalled("row marginal violation".into()));
        }
    }
    for (got, want) in plan.col_marginals().iter().zip(nu.weights()) {
        if (*got - *want).abs() > tol {
            return Err(Error::SolverStalled("column marginal violation".into()));
        }
    }
    let total = kahan_sum(
        plan.entries
            .iter()
            .map(|e| e.mass * pc.cost(e.row, e.col)),
    );
    Ok(OTResult {
        cost: root_p(total, p),
        plan,
        p,
    })
}

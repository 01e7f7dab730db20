//! Network simplex specialized to the balanced transportation problem.
//!
//! Nodes are the `m` sources, the `n` sinks, and one artificial root. The
//! initial basis is the star of artificial arcs (source -> root -> sink) at a
//! prohibitive cost, which is trivially feasible and strongly feasible; real
//! arcs are added by the caller (all of them, or lazily generated ones).
//!
//! Anti-cycling follows the strongly-feasible-tree discipline: the leaving
//! arc is the last blocking arc encountered when walking the pivot cycle
//! from the apex in the direction of the entering arc. Pricing is block
//! search (most negative reduced cost within a rotating block).

use crate::error::{Error, Result};
use crate::scalar::Real;

const NO_LINK: i32 = -1;

/// Upper bound on remembered pricing candidates; the rotating cursor will
/// rediscover anything trimmed here.
const CAND_CAP: usize = 256;

pub(crate) struct TransportSimplex<T: Real> {
    m: usize,
    n: usize,
    // Arc arrays. Ids 0..m+n are the artificial arcs (i -> root, root -> j).
    tail: Vec<u32>,
    head: Vec<u32>,
    cost: Vec<T>,
    // Rooted spanning tree over nodes 0..=m+n; root = m+n.
    parent: Vec<u32>,
    parent_arc: Vec<u32>,
    // Flow on the arc connecting a node to its parent, keyed by the child.
    flow: Vec<T>,
    pi: Vec<T>,
    depth: Vec<u32>,
    first_child: Vec<i32>,
    next_sib: Vec<i32>,
    prev_sib: Vec<i32>,
    cursor: usize,
    eps: T,
    pivots: u64,
    max_pivots: u64,
    // Violating arcs remembered from the last pricing scan.
    cand: Vec<(T, u32)>,
    // Scratch buffers reused across pivots.
    path_s: Vec<u32>,
    path_t: Vec<u32>,
    stack: Vec<u32>,
    // Work counters (probe): pricing evals, cycle nodes, subtree nodes.
    stat_ev: u64,
    stat_cyc: u64,
    stat_sub: u64,
}

impl<T: Real> TransportSimplex<T> {
    /// Creates the solver with the artificial star basis. `big` must exceed
    /// any real arc cost; `eps` is the entering-arc tolerance.
    pub fn new(supply: &[T], demand: &[T], big: T, eps: T) -> Self {
        let m = supply.len();
        let n = demand.len();
        let v = m + n + 1;
        let root = (m + n) as u32;
        let mut tail = Vec::with_capacity(2 * (m + n));
        let mut head = Vec::with_capacity(2 * (m + n));
        let mut cost = Vec::with_capacity(2 * (m + n));
        for i in 0..m {
            tail.push(i as u32);
            head.push(root);
            cost.push(big);
        }
        for j in 0..n {
            tail.push(root);
            head.push((m + j) as u32);
            cost.push(big);
        }
        let mut parent = vec![root; v];
        parent[root as usize] = root;
        let parent_arc: Vec<u32> = (0..v as u32).collect();
        let mut flow = Vec::with_capacity(v);
        flow.extend_from_slice(supply);
        flow.extend_from_slice(demand);
        flow.push(T::zero());
        let mut pi = vec![T::zero(); v];
        for i in 0..m {
            pi[i] = big;
        }
        for j in 0..n {
            pi[m + j] = -big;
        }
        let mut depth = vec![1u32; v];
        depth[root as usize] = 0;
        let mut first_child = vec![NO_LINK; v];
        let mut next_sib = vec![NO_LINK; v];
        let mut prev_sib = vec![NO_LINK; v];
        for w in (0..m + n).rev() {
            let fc = first_child[root as usize];
            next_sib[w] = fc;
            if fc != NO_LINK {
                prev_sib[fc as usize] = w as i32;
            }
            first_child[root as usize] = w as i32;
        }
        TransportSimplex {
            m,
            n,
            tail,
            head,
            cost,
            parent,
            parent_arc,
            flow,
            pi,
            depth,
            first_child,
            next_sib,
            prev_sib,
            cursor: 0,
            eps,
            pivots: 0,
            max_pivots: 0,
            cand: Vec::new(),
            path_s: Vec::new(),
            path_t: Vec::new(),
            stack: Vec::new(),
            stat_ev: 0,
            stat_cyc: 0,
            stat_sub: 0,
        }
    }

    pub fn stats(&self) -> (u64, u64, u64) {
        (self.stat_ev, self.stat_cyc, self.stat_sub)
    }

    /// Registers a real arc from source `i` to sink `j`.
    pub fn add_arc(&mut self, i: u32, j: u32, c: T) {
        self.tail.push(i);
        self.head.push(self.m as u32 + j);
        self.cost.push(c);
    }

    pub fn pi(&self) -> &[T] {
        &self.pi
    }

    pub fn pivot_count(&self) -> u64 {
        self.pivots
    }

    fn reduced(&self, a: usize) -> T {
        self.cost[a] - self.pi[self.tail[a] as usize] + self.pi[self.head[a] as usize]
    }

    fn points_up(&self, v: u32) -> bool {
        self.tail[self.parent_arc[v as usize] as usize] == v
    }

    /// Block pricing with a candidate list. A fresh scan walks blocks from
    /// the rotating cursor until one contains violating arcs, records them
    /// all, and later calls drain that list (re-pricing on pop, so stale
    /// entries drop out) before paying for another scan. Entering on any
    /// arc with sufficiently negative reduced cost is sound; the
    /// anti-cycling guarantee lives entirely in the leaving-arc rule.
    fn find_entering(&mut self) -> Option<usize> {
        while let Some((_, a)) = self.cand.pop() {
            self.stat_ev += 1;
            if self.reduced(a as usize) < -self.eps {
                return Some(a as usize);
            }
        }
        let first_real = self.m + self.n;
        let num = self.cost.len() - first_real;
        if num == 0 {
            return None;
        }
        let block = ((num as f64).sqrt() as usize) * 2 + 32;
        let mut scanned = 0usize;
        let mut idx = self.cursor.min(num - 1);
        while scanned < num {
            let take = block.min(num - scanned);
            for _ in 0..take {
                let a = first_real + idx;
                let r = self.reduced(a);
                if r < -self.eps {
                    self.cand.push((r, a as u32));
                }
                idx += 1;
                if idx == num {
                    idx = 0;
                }
            }
            scanned += take;
            self.stat_ev += take as u64;
            if !self.cand.is_empty() {
                self.cursor = idx;
                // Most negative last, so pops see the steepest arcs first.
                self.cand
                    .sort_unstable_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
                if self.cand.len() > CAND_CAP {
                    let drop = self.cand.len() - CAND_CAP;
                    self.cand.drain(..drop);
                }
                let (_, a) = self.cand.pop().expect("nonempty candidate list");
                return Some(a as usize);
            }
        }
        self.cursor = idx;
        None
    }

    fn detach(&mut self, v: u32) {
        let p = self.prev_sib[v as usize];
        let nx = self.next_sib[v as usize];
        if p != NO_LINK {
            self.next_sib[p as usize] = nx;
        } else {
            self.first_child[self.parent[v as usize] as usize] = nx;
        }
        if nx != NO_LINK {
            self.prev_sib[nx as usize] = p;
        }
    }

    fn attach(&mut self, v: u32, p: u32) {
        let fc = self.first_child[p as usize];
        self.next_sib[v as usize] = fc;
        self.prev_sib[v as usize] = NO_LINK;
        if fc != NO_LINK {
            self.prev_sib[fc as usize] = v as i32;
        }
        self.first_child[p as usize] = v as i32;
    }

    fn pivot(&mut self, e_arc: usize) -> Result<()> {
        let s = self.tail[e_arc];
        let t = self.head[e_arc];
        // Walk both endpoints to their common ancestor.
        let (mut a, mut b) = (s, t);
        self.path_s.clear();
        self.path_t.clear();
        while self.depth[a as usize] > self.depth[b as usize] {
            self.path_s.push(a);
            a = self.parent[a as usize];
        }
        while self.depth[b as usize] > self.depth[a as usize] {
            self.path_t.push(b);
            b = self.parent[b as usize];
        }
        while a != b {
            self.path_s.push(a);
            a = self.parent[a as usize];
            self.path_t.push(b);
            b = self.parent[b as usize];
        }
        self.stat_cyc += (self.path_s.len() + self.path_t.len()) as u64;
        // Arcs traversed against the push direction bound the step size.
        // Source-side segment is walked apex -> s (parent to child), sink-side
        // segment s -> apex (child to parent).
        let mut delta = T::infinity();
        for &v in &self.path_s {
            if self.points_up(v) {
                let f = self.flow[v as usize];
                if f < delta {
                    delta = f;
                }
            }
        }
        for &v in &self.path_t {
            if !self.points_up(v) {
                let f = self.flow[v as usize];
                if f < delta {
                    delta = f;
                }
            }
        }
        if !delta.is_finite() {
            return Err(Error::SolverStalled(
                "pivot cycle has no bounding arc".into(),
            ));
        }
        // Leaving arc: last blocking arc along apex -> s -> (entering) -> t -> apex.
        let mut leave = u32::MAX;
        let mut leave_on_s_side = false;
        for &v in self.path_s.iter().rev() {
            if self.points_up(v) && self.flow[v as usize] == delta {
                leave = v;
                leave_on_s_side = true;
            }
        }
        for &v in &self.path_t {
            if !self.points_up(v) && self.flow[v as usize] == delta {
                leave = v;
                leave_on_s_side = false;
            }
        }
        if leave == u32::MAX {
            return Err(Error::SolverStalled("no blocking arc in cycle".into()));
        }
        if delta > T::zero() {
            for idx in 0..self.path_s.len() {
                let v = self.path_s[idx] as usize;
                if self.points_up(v as u32) {
                    let f = self.flow[v] - delta;
                    self.flow[v] = if f > T::zero() { f } else { T::zero() };
                } else {
                    self.flow[v] += delta;
                }
            }
            for idx in 0..self.path_t.len() {
                let v = self.path_t[idx] as usize;
                if self.points_up(v as u32) {
                    self.flow[v] += delta;
                } else {
                    let f = self.flow[v] - delta;
                    self.flow[v] = if f > T::zero() { f } else { T::zero() };
                }
            }
        }
        let r_e = self.reduced(e_arc);
        let (q, attach_to, dpi) = if leave_on_s_side {
            (s, t, r_e)
        } else {
            (t, s, -r_e)
        };
        self.reroot(q, leave, attach_to, e_arc as u32, delta, dpi);
        Ok(())
    }

    /// Re-hangs the subtree cut off by removing `z`'s parent arc: reverses the
    /// chain from `q` up to `z`, then attaches `q` under `attach_to` via the
    /// entering arc carrying `flow_e`. Potentials in the moved subtree shift
    /// by `dpi`.
    fn reroot(&mut self, q: u32, z: u32, attach_to: u32, e_arc: u32, flow_e: T, dpi: T) {
        let mut node = q;
        let mut carry_parent = self.parent[q as usize];
        let mut carry_arc = self.parent_arc[q as usize];
        let mut carry_flow = self.flow[q as usize];
        self.detach(q);
        self.parent[q as usize] = attach_to;
        self.parent_arc[q as usize] = e_arc;
        self.flow[q as usize] = flow_e;
        self.attach(q, attach_to);
        while node != z {
            let cur = carry_parent;
            let next_parent = self.parent[cur as usize];
            let next_arc = self.parent_arc[cur as usize];
            let next_flow = self.flow[cur as usize];
            self.detach(cur);
            self.parent[cur as usize] = node;
            self.parent_arc[cur as usize] = carry_arc;
            self.flow[cur as usize] = carry_flow;
            self.attach(cur, node);
            carry_parent = next_parent;
            carry_arc = next_arc;
            carry_flow = next_flow;
            node = cur;
        }
        // Refresh depth and potentials across the moved subtree.
        self.stack.clear();
        self.stack.push(q);
        while let Some(v) = self.stack.pop() {
            self.stat_sub += 1;
            let vp = self.parent[v as usize];
            self.depth[v as usize] = self.depth[vp as usize] + 1;
            self.pi[v as usize] += dpi;
            let mut c = self.first_child[v as usize];
            while c != NO_LINK {
                self.stack.push(c as u32);
                c = self.next_sib[c as usize];
            }
        }
    }

    /// Recomputes potentials and depths exactly from the tree, clearing
    /// accumulated floating-point drift.
    fn refresh_potentials(&mut self) {
        let root = (self.m + self.n) as u32;
        self.pi[root as usize] = T::zero();
        self.stack.clear();
        self.stack.push(root);
        while let Some(v) = self.stack.pop() {
            if v != root {
                let a = self.parent_arc[v as usize] as usize;
                let p = self.parent[v as usize] as usize;
                self.depth[v as usize] = self.depth[p] + 1;
                self.pi[v as usize] = if self.tail[a] == v {
                    self.cost[a] + self.pi[p]
                } else {
                    self.pi[p] - self.cost[a]
                };
            }
            let mut c = self.first_child[v as usize];
            while c != NO_LINK {
                self.stack.push(c as u32);
                c = self.next_sib[c as usize];
            }
        }
    }

    /// Pivots to optimality over the currently registered arcs.
    pub fn optimize(&mut self) -> Result<()> {
        let v = (self.m + self.n + 1) as u64;
        self.max_pivots = 2_000_000u64.max(200 * v);
        let refresh_every = 1u64 << 18;
        let mut next_refresh = self.pivots + refresh_every;
        loop {
            while let Some(a) = self.find_entering() {
                self.pivot(a)?;
                self.pivots += 1;
                if self.pivots > self.max_pivots {
                    return Err(Error::SolverStalled(format!(
                        "pivot budget exhausted ({} pivots)",
                        self.pivots
                    )));
                }
                if self.pivots >= next_refresh {
                    self.refresh_potentials();
                    next_refresh = self.pivots + refresh_every;
                }
            }
            // Re-verify with exact potentials before declaring optimality.
            self.refresh_potentials();
            if self.find_entering().is_none() {
                return Ok(());
            }
        }
    }

    /// Largest flow still resting on an artificial arc (zero at a genuine
    /// optimum, up to rounding dust).
    pub fn max_artificial_flow(&self) -> T {
        let mut worst = T::zero();
        for v in 0..self.m + self.n {
            if (self.parent_arc[v] as usize) < self.m + self.n && self.flow[v] > worst {
                worst = self.flow[v];
            }
        }
        worst
    }

    /// Basic real arcs with positive flow, as (source, sink, mass) triples.
    pub fn plan(&self) -> Vec<(u32, u32, T)> {
        let art = self.m + self.n;
        let mut out = Vec::new();
        for v in 0..art {
            let a = self.parent_arc[v] as usize;
            if a >= art && self.flow[v] > T::zero() {
                out.push((self.tail[a], self.head[a] - self.m as u32, self.flow[v]));
            }
        }
        out
    }
}

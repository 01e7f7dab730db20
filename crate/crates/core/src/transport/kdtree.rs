//! Minimal kd-tree for k-nearest-neighbor queries over flat coordinate
//! arrays. Used to seed the lazy transport solver with promising arcs.

use crate::scalar::Real;

const LEAF_SIZE: usize = 16;

struct Node<T> {
    axis: u32,
    split: T,
    left: i32,
    right: i32,
    start: u32,
    end: u32,
}

pub(crate) struct KdTree<T: Real> {
    coords: Vec<T>,
    dim: usize,
    idx: Vec<u32>,
    nodes: Vec<Node<T>>,
    root: i32,
}

impl<T: Real> KdTree<T> {
    /// Builds over `len` points stored row-major in `coords`.
    pub fn build(coords: &[T], dim: usize) -> Self {
        let len = coords.len() / dim;
        let mut tree = KdTree {
            coords: coords.to_vec(),
            dim,
            idx: (0..len as u32).collect(),
            nodes: Vec::with_capacity(2 * len / LEAF_SIZE + 4),
            root: -1,
        };
        if len > 0 {
            tree.root = tree.split_range(0, len, 0);
        }
        tree
    }

    fn coord(&self, point: u32, axis: usize) -> T {
        self.coords[point as usize * self.dim + axis]
    }

    fn split_range(&mut self, start: usize, end: usize, depth: usize) -> i32 {
        let node_id = self.nodes.len() as i32;
        if end - start <= LEAF_SIZE {
            self.nodes.push(Node {
                axis: 0,
                split: T::zero(),
                left: -1,
                right: -1,
                start: start as u32,
                end: end as u32,
            });
            return node_id;
        }
        let axis = depth % self.dim;
        let mid = (start + end) / 2;
        {
            let coords = &self.coords;
            let dim = self.dim;
            self.idx[start..end].select_nth_unstable_by(mid - start, |&a, &b| {
                let ca = coords[a as usize * dim + axis];
                let cb = coords[b as usize * dim + axis];
                ca.partial_cmp(&cb).unwrap().then(a.cmp(&b))
            });
        }
        let split = self.coord(self.idx[mid], axis);
        self.nodes.push(Node {
            axis: axis as u32,
            split,
            left: -1,
            right: -1,
            start: start as u32,
            end: end as u32,
        });
        let left = self.split_range(start, mid, depth + 1);
        let right = self.split_range(mid, end, depth + 1);
        self.nodes[node_id as usize].left = left;
        self.nodes[node_id as usize].right = right;
        node_id
    }

    /// Writes up to `k` nearest point indices into `out` (unordered by
    /// distance is fine for arc seeding, but they come out sorted).
    pub fn knn_into(&self, query: &[T], k: usize, out: &mut Vec<u32>, heap: &mut Vec<(T, u32)>) {
        out.clear();
        heap.clear();
        if self.root < 0 || k == 0 {
            return;
        }
        self.search(self.root, query, k, heap);
        out.extend(heap.iter().map(|&(_, i)| i));
    }

    fn search(&self, node_id: i32, query: &[T], k: usize, best: &mut Vec<(T, u32)>) {
        let node = &self.nodes[node_id as usize];
        if node.left < 0 {
            for &i in &self.idx[node.start as usize..node.end as usize] {
                let mut d2 = T::zero();
                let base = i as usize * self.dim;
                for a in 0..self.dim {
                    let d = self.coords[base + a] - query[a];
                    d2 += d * d;
                }
                if best.len() < k {
                    best.push((d2, i));
                    if best.len() == k {
                        best.sort_by(|x, y| y.0.partial_cmp(&x.0).unwrap());
                    }
                } else if d2 < best[0].0 {
                    // best[0] holds the current worst; replace and re-sink.
                    best[0] = (d2, i);
                    let mut pos = 0;
                    while pos + 1 < best.len() && best[pos].0 < best[pos + 1].0 {
                        best.swap(pos, pos + 1);
                        pos += 1;
                    }
                }
            }
            return;
        }
        let axis = node.axis as usize;
        let diff = query[axis] - node.split;
        let (near, far) = if diff < T::zero() {
            (node.left, node.right)
        } else {
            (node.right, node.left)
        };
        self.search(near, query, k, best);
        let worst = if best.len() < k {
            T::infinity()
        } else {
            best[0].0
        };
        if diff * diff <= worst {
            self.search(far, query, k, best);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn knn_matches_linear_scan() {
        let mut state = 987654321u64;
        let mut next = move || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        for &dim in &[1usize, 2, 3] {
            let n = 400;
            let coords: Vec<f64> = (0..n * dim).map(|_| next()).collect();
            let tree = KdTree::build(&coords, dim);
            let mut out = Vec::new();
            let mut heap = Vec::new();
            for q in 0..25 {
                let query: Vec<f64> = (0..dim).map(|_| next()).collect();
                let k = 1 + q % 7;
                tree.knn_into(&query, k, &mut out, &mut heap);
                let mut dists: Vec<(f64, u32)> = (0..n)
                    .map(|i| {
                        let d2: f64 = (0..dim)
                            .map(|a| (coords[i * dim + a] - query[a]).powi(2))
                            .sum();
                        (d2, i as u32)
                    })
                    .collect();
                dists.sort_by(|a, b| a.partial_cmp(b).unwrap());
                let expect: std::collections::HashSet<u32> =
                    dists[..k].iter().map(|&(_, i)| i).collect();
                let got: std::collections::HashSet<u32> = out.iter().copied().collect();
                assert_eq!(got, expect);
            }
        }
    }
}

//! Exact m-nearest-neighbour regression on one time slice.
//!
//! Neighbours are ordered by `(squared distance, sample index)`, so the
//! kd-tree and the brute-force scan return the same sets.

use std::cmp::Ordering;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

const LEAF: usize = 8;

fn dist2<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + (x - y) * (x - y))
}

fn cmp_key<T: Scalar>(a: (T, usize), b: (T, usize)) -> Ordering {
    a.0.partial_cmp(&b.0).unwrap_or(Ordering::Equal).then(a.1.cmp(&b.1))
}

/// Bounded sorted list of the best `(d², index)` pairs seen so far.
struct Best<T> {
    m: usize,
    items: Vec<(T, usize)>,
}

impl<T: Scalar> Best<T> {
    fn new(m: usize) -> Self {
        Self { m, items: Vec::with_capacity(m + 1) }
    }

    fn worst(&self) -> Option<T> {
        if self.items.len() < self.m {
            None
        } else {
            Some(self.items[self.m - 1].0)
        }
    }

    fn offer(&mut self, d: T, i: usize) {
        if self.items.len() == self.m && cmp_key((d, i), self.items[self.m - 1]) != Ordering::Less {
            return;
        }
        let pos = self.items.partition_point(|&e| cmp_key(e, (d, i)) == Ordering::Less);
        self.items.insert(pos, (d, i));
        self.items.truncate(self.m);
    }
}

/// Static kd-tree over a flat `[point][dim]` array, stored as a permutation
/// with the splitting point of each range at its midpoint.
#[derive(Debug, Clone)]
pub struct KdTree<'a, T> {
    points: &'a [T],
    dim: usize,
    order: Vec<usize>,
    axis: Vec<u8>,
}

impl<'a, T: Scalar> KdTree<'a, T> {
    pub fn new(points: &'a [T], dim: usize) -> Result<Self> {
        if dim == 0 || points.len() % dim != 0 {
            return Err(Error::invalid("point array length is not a multiple of the dimension"));
        }
        if dim > u8::MAX as usize {
            return Err(Error::invalid("kd-tree dimension too large"));
        }
        let n = points.len() / dim;
        let mut tree = Self { points, dim, order: (0..n).collect(), axis: vec![0; n] };
        tree.build(0, n);
        Ok(tree)
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    fn coord(&self, i: usize, k: usize) -> T {
        self.points[i * self.dim + k]
    }

    fn build(&mut self, lo: usize, hi: usize) {
        if hi - lo <= LEAF {
            return;
        }
        // Split on the coordinate with the widest spread.
        let mut best = (T::zero(), 0);
        for k in 0..self.dim {
            let (mut a, mut b) = (T::infinity(), T::neg_infinity());
            for &i in &self.order[lo..hi] {
                let c = self.coord(i, k);
                a = a.min(c);
                b = b.max(c);
            }
            if b - a > best.0 || k == 0 {
                best = (b - a, k);
            }
        }
        let k = best.1;
        let mid = lo + (hi - lo) / 2;
        let (points, dim) = (self.points, self.dim);
        self.order[lo..hi].select_nth_unstable_by(mid - lo, |&i, &j| {
            points[i * dim + k].partial_cmp(&points[j * dim + k]).unwrap_or(Ordering::Equal)
        });
        self.axis[mid] = k as u8;
        self.build(lo, mid);
        self.build(mid + 1, hi);
    }

    /// Indices of the `m` nearest points, closest first.
    pub fn nearest(&self, query: &[T], m: usize) -> Vec<usize> {
        let mut best = Best::new(m.min(self.len()));
        if best.m > 0 {
            self.search(query, 0, self.len(), &mut best);
        }
        best.items.into_iter().map(|(_, i)| i).collect()
    }

    fn search(&self, q: &[T], lo: usize, hi: usize, best: &mut Best<T>) {
        if hi - lo <= LEAF {
            for &i in &self.order[lo..hi] {
                best.offer(dist2(q, &self.points[i * self.dim..(i + 1) * self.dim]), i);
            }
            return;
        }
        let mid = lo + (hi - lo) / 2;
        let i = self.order[mid];
        let k = self.axis[mid] as usize;
        best.offer(dist2(q, &self.points[i * self.dim..(i + 1) * self.dim]), i);
        let diff = q[k] - self.coord(i, k);
        let (near, far) = if diff < T::zero() { ((lo, mid), (mid + 1, hi)) } else { ((mid + 1, hi), (lo, mid)) };
        self.search(q, near.0, near.1, best);
        if best.worst().is_none_or(|w| diff * diff <= w) {
            self.search(q, far.0, far.1, best);
        }
    }
}

/// Same neighbours as [`KdTree::nearest`] by a full scan.
pub fn nearest_brute_force<T: Scalar>(points: &[T], dim: usize, query: &[T], m: usize) -> Vec<usize> {
    let n = points.len() / dim;
    let mut best = Best::new(m.min(n));
    if best.m > 0 {
        for i in 0..n {
            best.offer(dist2(query, &points[i * dim..(i + 1) * dim]), i);
        }
    }
    best.items.into_iter().map(|(_, i)| i).collect()
}

fn check_inputs<T>(queries: &[T], samples: &[T], dim: usize, responses: &[T], m: usize) -> Result<usize> {
    if dim == 0 || samples.len() % dim != 0 || queries.len() % dim != 0 {
        return Err(Error::invalid("state arrays must be whole points"));
    }
    let n = samples.len() / dim;
    if n == 0 {
        return Err(Error::invalid("no samples"));
    }
    crate::error::check_dim(n, responses.len())?;
    if m == 0 || m > n {
        return Err(Error::invalid(format!("need 1 <= m <= {n} neighbours, got {m}")));
    }
    Ok(n)
}

/// Neighbour lists for every query, `m` indices per query.
pub fn knn_indices<T: Scalar>(queries: &[T], samples: &[T], dim: usize, m: usize) -> Result<Vec<usize>> {
    let dummy = vec![T::zero(); samples.len() / dim.max(1)];
    check_inputs(queries, samples, dim, &dummy, m)?;
    let tree = KdTree::new(samples, dim)?;
    let mut out = vec![0usize; queries.len() / dim * m];
    out.par_chunks_mut(m).zip(queries.par_chunks(dim)).for_each(|(slot, q)| {
        slot.copy_from_slice(&tree.nearest(q, m));
    });
    Ok(out)
}

/// For each query, the mean response over its `m` nearest samples.
pub fn knn_conditional_expectation<T: Scalar>(
    queries: &[T],
    samples: &[T],
    dim: usize,
    responses: &[T],
    m: usize,
) -> Result<Vec<T>> {
    check_inputs(queries, samples, dim, responses, m)?;
    let idx = knn_indices(queries, samples, dim, m)?;
    Ok(average(&idx, responses, m))
}

/// Brute-force reference for [`knn_conditional_expectation`].
pub fn knn_conditional_expectation_brute<T: Scalar>(
    queries: &[T],
    samples: &[T],
    dim: usize,
    responses: &[T],
    m: usize,
) -> Result<Vec<T>> {
    check_inputs(queries, samples, dim, responses, m)?;
    let idx: Vec<usize> = queries.par_chunks(dim).flat_map_iter(|q| nearest_brute_force(samples, dim, q, m)).collect();
    Ok(average(&idx, responses, m))
}

pub(crate) fn average<T: Scalar>(idx: &[usize], responses: &[T], m: usize) -> Vec<T> {
    let inv = T::one() / T::from_usize_lossy(m);
    idx.chunks(m).map(|nb| nb.iter().fold(T::zero(), |a, &i| a + responses[i]) * inv).collect()
}

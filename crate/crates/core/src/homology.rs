//! Reduced simplicial homology of flag complexes over GF(p).
//!
//! The chain complex is augmented: the empty face spans `C_{-1}` and `∂_0`
//! sends every vertex to it, so `dim H̃_r = f_r - rank ∂_r - rank ∂_{r+1}`
//! holds uniformly, the void complex included.
//!
//! Two entry points share the rank kernels: [`reduced_homology_dims`] works on
//! an explicit [`FlagComplex`]; [`mask_homology`] takes a vertex mask of a graph
//! with at most 64 vertices and first strips dominated vertices, which leaves
//! the homotopy type of the clique complex unchanged. The mask path is the one
//! the Hochster sum runs 2^n times.

use std::fmt;

use crate::error::{Error, Result};
use crate::flag_complex::FlagComplex;
use crate::graph::{connected_components, Graph};

/// Dense elimination is used while `rows * cols` stays at or below this many entries.
pub const DENSE_RANK_LIMIT: usize = 1 << 20;

/// Characteristic of a prime field.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize)]
#[serde(transparent)]
pub struct FieldChar(u32);

impl FieldChar {
    pub const TWO: FieldChar = FieldChar(2);

    pub fn new(p: u32) -> Result<Self> {
        let prime = p >= 2 && (2..).take_while(|d| d * d <= p).all(|d| !p.is_multiple_of(d));
        if prime {
            Ok(FieldChar(p))
        } else {
            Err(Error::Parameter(format!("field characteristic {p} is not prime")))
        }
    }

    pub fn get(self) -> u32 {
        self.0
    }

    fn inverse(self, a: u32) -> u32 {
        // Fermat: a^(p-2).
        let p = self.0 as u64;
        let (mut base, mut exp, mut acc) = (a as u64 % p, p - 2, 1u64);
        while exp > 0 {
            if exp & 1 == 1 {
                acc = acc * base % p;
            }
            base = base * base % p;
            exp >>= 1;
        }
        acc as u32
    }

    fn reduce_sign(self, sign: i8) -> u32 {
        if sign >= 0 {
            1
        } else {
            self.0 - 1
        }
    }
}

impl Default for FieldChar {
    fn default() -> Self {
        FieldChar::TWO
    }
}

impl fmt::Display for FieldChar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// A boundary map stored as sparse columns of `(row, ±1)`, rows ascending.
#[derive(Clone, Debug)]
pub struct BoundaryMatrix {
    pub rows: usize,
    pub cols: usize,
    pub field: FieldChar,
    pub columns: Vec<Vec<(usize, i8)>>,
}

impl BoundaryMatrix {
    /// `∂_k : C_k → C_{k-1}` of `c`, for `k >= 0`.
    pub fn of_complex(c: &FlagComplex, k: isize, field: FieldChar) -> Self {
        let lower = c.faces(k - 1);
        let columns = c
            .faces(k)
            .iter()
            .map(|face| {
                let mut col: Vec<(usize, i8)> = (0..face.len())
                    .map(|t| {
                        let mut sub = face.clone();
                        sub.remove(t);
                        let row = lower.binary_search(&sub).expect("complex is closed");
                        (row, if t % 2 == 0 { 1 } else { -1 })
                    })
                    .collect();
                col.sort_unstable();
                col
            })
            .collect();
        BoundaryMatrix {
            rows: lower.len(),
            cols: c.faces(k).len(),
            field,
            columns,
        }
    }

    /// Rank over GF(field): bit-packed elimination for p = 2, dense modular
    /// elimination for odd p, sparse column reduction past [`DENSE_RANK_LIMIT`].
    pub fn rank(&self) -> usize {
        if self.rows == 0 || self.cols == 0 {
            return 0;
        }
        let dense = self.rows.saturating_mul(self.cols) <= DENSE_RANK_LIMIT;
        match (self.field.get(), dense) {
            (2, true) => self.rank_gf2_dense(),
            (_, true) => self.rank_dense(),
            _ => self.rank_sparse(),
        }
    }

    pub(crate) fn rank_gf2_dense(&self) -> usize {
        let words = self.rows.div_ceil(64);
        let mut pivots: Vec<Option<Vec<u64>>> = vec![None; self.rows];
        let mut rank = 0;
        for col in &self.columns {
            let mut v = vec![0u64; words];
            for &(r, _) in col {
                v[r / 64] ^= 1 << (r % 64);
            }
            while let Some(top) = highest_bit(&v) {
                match &pivots[top] {
                    Some(p) => v.iter_mut().zip(p).for_each(|(a, b)| *a ^= b),
                    None => {
                        pivots[top] = Some(v);
                        rank += 1;
                        break;
                    }
                }
            }
        }
        rank
    }

    pub(crate) fn rank_dense(&self) -> usize {
        let p = self.field.get() as u64;
        // Row-major copy of the transpose: one row per column of the map.
        let mut m: Vec<Vec<u32>> = self
            .columns
            .iter()
            .map(|col| {
                let mut row = vec![0u32; self.rows];
                for &(r, s) in col {
                    row[r] = self.field.reduce_sign(s);
                }
                row
            })
            .collect();
        let mut rank = 0;
        for c in 0..self.rows {
            let Some(pr) = (rank..m.len()).find(|&r| m[r][c] != 0) else {
                continue;
            };
            m.swap(rank, pr);
            let inv = self.field.inverse(m[rank][c]) as u64;
            for x in m[rank].iter_mut() {
                *x = (*x as u64 * inv % p) as u32;
            }
            let pivot = m[rank].clone();
            for row in m.iter_mut().skip(rank + 1) {
                let f = row[c] as u64;
                if f != 0 {
                    for (x, &y) in row.iter_mut().zip(&pivot).skip(c) {
                        *x = ((*x as u64 + (p - f) * y as u64) % p) as u32;
                    }
                }
            }
            rank += 1;
            if rank == m.len() {
                break;
            }
        }
        rank
    }

    pub(crate) fn rank_sparse(&self) -> usize {
        let p = self.field.get() as u64;
        let mut pivot_col: Vec<Option<Vec<(usize, u32)>>> = vec![None; self.rows];
        let mut rank = 0;
        for col in &self.columns {
            let mut v: Vec<(usize, u32)> = col.iter().map(|&(r, s)| (r, self.field.reduce_sign(s))).collect();
            while let Some(&(low, val)) = v.last() {
                match &pivot_col[low] {
                    Some(pc) => {
                        // v -= (val / pc[low]) * pc, both sorted by row.
                        let f = val as u64 * self.field.inverse(pc.last().unwrap().1) as u64 % p;
                        v = axpy_sorted(&v, pc, (p - f) % p, p);
                    }
                    None => {
                        pivot_col[low] = Some(v);
                        rank += 1;
                        break;
                    }
                }
            }
        }
        rank
    }
}

fn highest_bit(v: &[u64]) -> Option<usize> {
    v.iter()
        .enumerate()
        .rev()
        .find(|(_, &w)| w != 0)
        .map(|(i, &w)| i * 64 + 63 - w.leading_zeros() as usize)
}

/// `a + f * b` over GF(p) for sorted sparse vectors, dropping zeros.
fn axpy_sorted(a: &[(usize, u32)], b: &[(usize, u32)], f: u64, p: u64) -> Vec<(usize, u32)> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        let take_a = j == b.len() || (i < a.len() && a[i].0 < b[j].0);
        let take_b = i == a.len() || (j < b.len() && b[j].0 < a[i].0);
        if take_a {
            out.push(a[i]);
            i += 1;
        } else if take_b {
            out.push((b[j].0, (f * b[j].1 as u64 % p) as u32));
            j += 1;
        } else {
            let x = (a[i].1 as u64 + f * b[j].1 as u64) % p;
            if x != 0 {
                out.push((a[i].0, x as u32));
            }
            i += 1;
            j += 1;
        }
    }
    out
}

/// `dim H̃_r` for `r = -1 ..= dim`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HomologyProfile {
    dims: Vec<usize>,
    field: FieldChar,
}

impl HomologyProfile {
    pub fn field(&self) -> FieldChar {
        self.field
    }

    pub fn get(&self, r: isize) -> usize {
        usize::try_from(r + 1)
            .ok()
            .and_then(|i| self.dims.get(i))
            .copied()
            .unwrap_or(0)
    }

    /// Pairs `(r, dim H̃_r)` from `r = -1` upward.
    pub fn iter(&self) -> impl Iterator<Item = (isize, usize)> + '_ {
        self.dims.iter().enumerate().map(|(i, &d)| (i as isize - 1, d))
    }

    pub fn is_acyclic(&self) -> bool {
        self.dims.iter().all(|&d| d == 0)
    }
}

pub fn reduced_homology_dims(c: &FlagComplex, field: FieldChar) -> Result<HomologyProfile> {
    if let Some(cap) = c.capped_at() {
        return Err(Error::FacesCapped(cap));
    }
    let top = c.dim();
    // ranks[k] = rank ∂_k for k = 0..=top; ∂_{-1} and ∂_{top+1} vanish.
    let ranks: Vec<usize> = (0..=top)
        .map(|k| BoundaryMatrix::of_complex(c, k, field).rank())
        .collect();
    let rank = |k: isize| usize::try_from(k).ok().and_then(|k| ranks.get(k)).copied().unwrap_or(0);
    let dims = (-1..=top).map(|r| c.faces(r).len() - rank(r) - rank(r + 1)).collect();
    Ok(HomologyProfile { dims, field })
}

/// `dim H̃_0` from the component count alone.
pub fn h0_dim(g: &Graph) -> usize {
    connected_components(g).count.saturating_sub(1)
}

/// Reduced homology of the clique complex induced on `w` (a nonempty mask over
/// `adj`), as `dims[r]` for `r = 0, 1, …`; trailing zeros are trimmed.
pub fn mask_homology(adj: &[u64], w: u64, field: FieldChar) -> Vec<usize> {
    debug_assert!(w != 0);
    let core = strip_dominated(adj, w);
    let mut dims = vec![0usize];
    let mut rest = core;
    while rest != 0 {
        let comp = component_of(adj, core, rest.trailing_zeros() as usize);
        rest &= !comp;
        dims[0] += 1;
        if comp.count_ones() >= 4 {
            for (r, d) in connected_homology(adj, comp, field).into_iter().enumerate().skip(1) {
                if dims.len() <= r {
                    dims.resize(r + 1, 0);
                }
                dims[r] += d;
            }
        }
    }
    dims[0] -= 1;
    while dims.len() > 1 && *dims.last().unwrap() == 0 {
        dims.pop();
    }
    dims
}

/// Repeatedly deletes a vertex whose closed neighbourhood lies inside another's.
pub(crate) fn strip_dominated(adj: &[u64], mut w: u64) -> u64 {
    loop {
        let mut changed = false;
        let mut vs = w;
        while vs != 0 {
            let v = vs.trailing_zeros() as usize;
            vs &= vs - 1;
            let closed_v = (adj[v] & w) | 1 << v;
            let mut others = adj[v] & w;
            while others != 0 {
                let u = others.trailing_zeros() as usize;
                others &= others - 1;
                if closed_v & !((adj[u] & w) | 1 << u) == 0 {
                    w &= !(1 << v);
                    changed = true;
                    break;
                }
            }
        }
        if !changed {
            return w;
        }
    }
}

pub(crate) fn component_of(adj: &[u64], w: u64, start: usize) -> u64 {
    let mut comp = 1u64 << start;
    let mut frontier = comp;
    while frontier != 0 {
        let v = frontier.trailing_zeros() as usize;
        frontier &= frontier - 1;
        let fresh = adj[v] & w & !comp;
        comp |= fresh;
        frontier |= fresh;
    }
    comp
}

/// Cliques of the subgraph induced on `w`, grouped by cardinality, each level sorted.
pub(crate) fn mask_cliques(adj: &[u64], w: u64) -> Vec<Vec<u64>> {
    let mut levels: Vec<Vec<u64>> = Vec::new();
    // (clique, candidates above its largest vertex)
    let mut frontier: Vec<(u64, u64)> = Vec::new();
    let mut vs = w;
    while vs != 0 {
        let v = vs.trailing_zeros() as usize;
        vs &= vs - 1;
        frontier.push((1 << v, adj[v] & w & above(v)));
    }
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for &(c, cand) in &frontier {
            let mut cs = cand;
            while cs != 0 {
                let u = cs.trailing_zeros() as usize;
                cs &= cs - 1;
                next.push((c | 1 << u, cand & adj[u] & above(u)));
            }
        }
        let mut level: Vec<u64> = frontier.into_iter().map(|(c, _)| c).collect();
        level.sort_unstable();
        levels.push(level);
        frontier = next;
    }
    levels
}

#[inline]
fn above(v: usize) -> u64 {
    if v >= 63 {
        0
    } else {
        !0u64 << (v + 1)
    }
}

/// `dims[r]` of a connected induced subcomplex; `dims[0]` is 0.
fn connected_homology(adj: &[u64], w: u64, field: FieldChar) -> Vec<usize> {
    let levels = mask_cliques(adj, w);
    let ranks: Vec<usize> = (1..levels.len())
        .map(|k| mask_boundary(&levels[k - 1], &levels[k], field).rank())
        .collect();
    // levels[k] holds k-dimensional faces; ranks[k-1] = rank ∂_k for k >= 1.
    // rank ∂_0 (onto the empty face) is 1 for a nonempty complex.
    let rank = |k: usize| {
        if k == 0 {
            1
        } else {
            ranks.get(k - 1).copied().unwrap_or(0)
        }
    };
    (0..levels.len())
        .map(|r| levels[r].len() - rank(r) - rank(r + 1))
        .collect()
}

pub(crate) fn mask_boundary(lower: &[u64], upper: &[u64], field: FieldChar) -> BoundaryMatrix {
    let columns = upper
        .iter()
        .map(|&face| {
            let mut col = Vec::with_capacity(face.count_ones() as usize);
            let mut bits = face;
            let mut t = 0;
            while bits != 0 {
                let v = bits.trailing_zeros();
                bits &= bits - 1;
                let row = lower.binary_search(&(face & !(1 << v))).expect("closed");
                col.push((row, if t % 2 == 0 { 1 } else { -1 }));
                t += 1;
            }
            col.sort_unstable();
            col
        })
        .collect();
    BoundaryMatrix {
        rows: lower.len(),
        cols: upper.len(),
        field,
        columns,
    }
}

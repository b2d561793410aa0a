//! Betti tables of `S/I_Δ` via Hochster's formula,
//! `β_{i,j} = Σ_{|W| = j} dim H̃_{j-i-1}(Δ|_W)`, and the invariants read off them.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_bigint::{BigInt, BigUint};
use num_integer::binomial;
use num_rational::Ratio;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{cycle_census, CycleCensus, Graph, VertexSet};
use crate::homology::{component_of, mask_cliques, mask_homology, FieldChar};

/// Hard vertex limit for [`betti_table`].
pub const BETTI_VERTEX_LIMIT: usize = 22;
/// Limit when the caller opts in with [`BettiOptions::allow_large`].
pub const BETTI_OVERRIDE_LIMIT: usize = 26;
/// Largest graph for which `first_row` may enumerate subsets.
pub const FIRST_ROW_ENUMERATION_LIMIT: usize = 24;

#[derive(Clone, Copy, Debug, Default)]
pub struct BettiOptions {
    pub allow_large: bool,
}

/// Sparse graded Betti numbers `β_{i,j}` of `S/I_Δ`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BettiTable {
    n: usize,
    field: FieldChar,
    entries: BTreeMap<(usize, usize), u64>,
}

impl BettiTable {
    /// Builds a table from `(i, j, β)` triples; zero values are dropped.
    pub fn from_entries(n: usize, field: FieldChar, entries: impl IntoIterator<Item = (usize, usize, u64)>) -> Self {
        let entries = entries
            .into_iter()
            .filter(|&(_, _, b)| b != 0)
            .map(|(i, j, b)| ((i, j), b))
            .collect();
        BettiTable { n, field, entries }
    }

    /// Builds a table from rows `k = 0, 1, …`, each listing `β_{i,i+k}` for `i = 0, 1, …`.
    pub fn from_rows(n: usize, field: FieldChar, rows: &[&[u64]]) -> Self {
        Self::from_entries(
            n,
            field,
            rows.iter()
                .enumerate()
                .flat_map(|(k, row)| row.iter().enumerate().map(move |(i, &b)| (i, i + k, b))),
        )
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn field(&self) -> FieldChar {
        self.field
    }

    pub fn get(&self, i: usize, j: usize) -> u64 {
        self.entries.get(&(i, j)).copied().unwrap_or(0)
    }

    /// Nonzero entries `((i, j), β)` in lexicographic order.
    pub fn entries(&self) -> impl Iterator<Item = ((usize, usize), u64)> + '_ {
        self.entries.iter().map(|(&k, &v)| (k, v))
    }

    pub fn pdim(&self) -> usize {
        self.entries.keys().map(|&(i, _)| i).max().unwrap_or(0)
    }

    pub fn reg(&self) -> usize {
        self.entries.keys().map(|&(i, j)| j - i).max().unwrap_or(0)
    }

    /// `β_{i,j} = 0` whenever `j > 2i`.
    pub fn satisfies_koszul_bound(&self) -> bool {
        self.entries.keys().all(|&(i, j)| j <= 2 * i)
    }

    /// `Σ_i (-1)^i β_{i,j}` for each internal degree `j` with a nonzero entry.
    pub fn alternating_sums(&self) -> BTreeMap<usize, i64> {
        let mut sums = BTreeMap::new();
        for (&(i, j), &b) in &self.entries {
            *sums.entry(j).or_insert(0) += if i % 2 == 0 { b as i64 } else { -(b as i64) };
        }
        sums.retain(|_, v| *v != 0);
        sums
    }

    pub fn to_json(&self) -> String {
        let raw = BettiJson {
            n: self.n,
            char: self.field.get(),
            entries: self
                .entries
                .iter()
                .map(|(&(i, j), &b)| [i as u64, j as u64, b])
                .collect(),
        };
        serde_json::to_string(&raw).expect("table serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: BettiJson = serde_json::from_str(text)?;
        Ok(Self::from_entries(
            raw.n,
            FieldChar::new(raw.char)?,
            raw.entries.iter().map(|e| (e[0] as usize, e[1] as usize, e[2])),
        ))
    }

    /// Grid in the Macaulay2 layout: columns are `i`, rows are `k = j - i`,
    /// zeros shown as `.`.
    pub fn to_grid(&self) -> String {
        let (pdim, reg) = (self.pdim(), self.reg());
        let cells: Vec<Vec<String>> = (0..=reg)
            .map(|k| {
                (0..=pdim)
                    .map(|i| match self.get(i, i + k) {
                        0 => ".".to_string(),
                        b => b.to_string(),
                    })
                    .collect()
            })
            .collect();
        let width = cells
            .iter()
            .flatten()
            .map(String::len)
            .chain((0..=pdim).map(|i| i.to_string().len()))
            .max()
            .unwrap_or(1);
        let label = format!("{reg}:").len();
        let mut out = String::new();
        let _ = write!(out, "{:label$}", "");
        for i in 0..=pdim {
            let _ = write!(out, " {i:>width$}");
        }
        out.push('\n');
        for (k, row) in cells.iter().enumerate() {
            let _ = write!(out, "{:>label$}", format!("{k}:"));
            for cell in row {
                let _ = write!(out, " {cell:>width$}");
            }
            out.push('\n');
        }
        out
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BettiJson {
    n: usize,
    char: u32,
    entries: Vec<[u64; 3]>,
}

fn vertex_guard(n: usize, opts: BettiOptions) -> Result<()> {
    let limit = if opts.allow_large {
        BETTI_OVERRIDE_LIMIT
    } else {
        BETTI_VERTEX_LIMIT
    };
    if n > limit {
        return Err(Error::Capacity(format!(
            "Betti table of a {n}-vertex graph exceeds the {limit}-vertex limit"
        )));
    }
    if n > BETTI_VERTEX_LIMIT {
        log::warn!("computing a Betti table on {n} vertices; this enumerates 2^{n} subsets");
    }
    Ok(())
}

pub fn betti_table(g: &Graph, field: FieldChar) -> Result<BettiTable> {
    betti_table_with(g, field, BettiOptions::default())
}

pub fn betti_table_with(g: &Graph, field: FieldChar, opts: BettiOptions) -> Result<BettiTable> {
    let n = g.n();
    vertex_guard(n, opts)?;
    let adj = g.adjacency_masks().expect("guarded below 64 vertices");
    let stride = n + 1;
    let total = 1u64 << n;
    let chunk = 1u64 << n.saturating_sub(8).min(14);
    let chunks = total.div_ceil(chunk);
    // tally[j * stride + i] = β_{i,j}
    let tally = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut local = vec![0u64; stride * stride];
            for w in (c * chunk).max(1)..((c + 1) * chunk).min(total) {
                let j = w.count_ones() as usize;
                for (r, &d) in mask_homology(&adj, w, field).iter().enumerate() {
                    if d != 0 {
                        local[j * stride + (j - r - 1)] += d as u64;
                    }
                }
            }
            local
        })
        .reduce(
            || vec![0u64; stride * stride],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );
    let entries = std::iter::once((0, 0, 1)).chain(tally.iter().enumerate().map(|(k, &b)| (k % stride, k / stride, b)));
    Ok(BettiTable::from_entries(n, field, entries))
}

fn first_row_index_check(n: usize, i: usize) -> Result<()> {
    if i == 0 || i + 1 > n {
        return Err(Error::Parameter(format!(
            "first-row index {i} outside [1, {}]",
            n.saturating_sub(1)
        )));
    }
    Ok(())
}

/// `β_{i,i+1}` for a graph whose components each carry at most one cycle:
/// `i·C(n,i+1) − E·C(n−2,i−1) + Σ_γ C(n−|γ|, i+1−|γ|)`. `None` when the census is not clean.
pub fn first_row_closed_form(g: &Graph, census: &CycleCensus, i: usize) -> Result<Option<BigUint>> {
    let n = g.n();
    first_row_index_check(n, i)?;
    if !census.clean {
        return Ok(None);
    }
    let big = |x: usize| BigInt::from(x);
    let choose = |a: usize, b: usize| -> BigInt {
        if b > a {
            BigInt::zero()
        } else {
            binomial(big(a), big(b))
        }
    };
    let mut value = big(i) * choose(n, i + 1) - big(g.edge_count()) * choose(n - 2, i - 1);
    for cycle in &census.cycles {
        let len = cycle.len();
        if len <= i + 1 {
            value += choose(n - len, i + 1 - len);
        }
    }
    Ok(Some(
        value.to_biguint().expect("first-row Betti numbers are nonnegative"),
    ))
}

/// `β_{i,i+1} = Σ_{|W|=i+1} (components(W) − 1)` by direct enumeration.
pub fn first_row_enumerated(g: &Graph, i: usize) -> Result<BigUint> {
    let n = g.n();
    first_row_index_check(n, i)?;
    if n > FIRST_ROW_ENUMERATION_LIMIT {
        return Err(Error::Capacity(format!(
            "first-row enumeration on {n} vertices exceeds the {FIRST_ROW_ENUMERATION_LIMIT}-vertex limit"
        )));
    }
    let adj = g.adjacency_masks().expect("small graph");
    let k = i + 1;
    let limit = 1u64 << n;
    let mut total = 0u64;
    let mut w = (1u64 << k) - 1;
    while w < limit {
        total += components_in(&adj, w) - 1;
        // Gosper's hack: next mask with the same popcount.
        let c = w & w.wrapping_neg();
        let r = w + c;
        w = (((r ^ w) >> 2) / c) | r;
    }
    Ok(BigUint::from(total))
}

fn components_in(adj: &[u64], w: u64) -> u64 {
    let mut rest = w;
    let mut count = 0;
    while rest != 0 {
        rest &= !component_of(adj, w, rest.trailing_zeros() as usize);
        count += 1;
    }
    count
}

/// Which route produced a first-row value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FirstRowMethod {
    ClosedForm,
    Enumeration,
}

/// `β_{i,i+1}`: closed form when the graph is clean, subset enumeration otherwise.
pub fn first_row(g: &Graph, i: usize) -> Result<(BigUint, FirstRowMethod)> {
    let census = cycle_census(g);
    match first_row_closed_form(g, &census, i)? {
        Some(v) => Ok((v, FirstRowMethod::ClosedForm)),
        None if g.n() <= FIRST_ROW_ENUMERATION_LIMIT => Ok((first_row_enumerated(g, i)?, FirstRowMethod::Enumeration)),
        None => Err(Error::Capacity(format!(
            "graph on {} vertices has a component with two cycles; needs enumeration, too large",
            g.n()
        ))),
    }
}

/// `i ↦ β_{i,i+1}` for `i = 1 ..= n-1`.
pub fn first_row_profile(g: &Graph) -> Result<(Vec<BigUint>, FirstRowMethod)> {
    let n = g.n();
    let census = cycle_census(g);
    if census.clean {
        let values = (1..n)
            .map(|i| first_row_closed_form(g, &census, i).map(|v| v.expect("clean")))
            .collect::<Result<_>>()?;
        return Ok((values, FirstRowMethod::ClosedForm));
    }
    if n > FIRST_ROW_ENUMERATION_LIMIT {
        return Err(Error::Capacity(format!(
            "graph on {n} vertices has a component with two cycles; needs enumeration, too large"
        )));
    }
    let adj = g.adjacency_masks().expect("small graph");
    let mut sums = vec![0u64; n + 1];
    for w in 1..1u64 << n {
        sums[w.count_ones() as usize] += components_in(&adj, w) - 1;
    }
    Ok((
        (1..n).map(|i| BigUint::from(sums[i + 1])).collect(),
        FirstRowMethod::Enumeration,
    ))
}

/// Largest `v` for which [`betti_nonvanishing`] searches.
pub const NONVANISHING_V_LIMIT: usize = 12;

/// Whether `β_{i,v} ≠ 0`, without building the table.
///
/// Deleting a vertex with fewer than `2s` neighbours leaves `H̃_s` unchanged, so
/// `H̃_s(Δ|_W) ≠ 0` forces a connected `C ⊆ W` of minimum degree `2s` (at least
/// `2s+2` vertices and `|C|·s` edges) with `H̃_s(Δ|_C) ≠ 0`. Such `C` are
/// enumerated inside the `2s`-core of `g`, then padded to size `v`.
pub fn betti_nonvanishing(g: &Graph, i: usize, v: usize, field: FieldChar) -> Result<bool> {
    if v > NONVANISHING_V_LIMIT {
        return Err(Error::Capacity(format!(
            "nonvanishing search is limited to v <= {NONVANISHING_V_LIMIT}, got {v}"
        )));
    }
    if v < i + 2 {
        return Err(Error::Parameter(format!(
            "nonvanishing search needs v >= i + 2, got i={i}, v={v}"
        )));
    }
    if v > g.n() || v > 2 * i {
        return Ok(false);
    }
    let s = v - i - 1;
    let core = k_core(g, &VertexSet::full(g.n()), 2 * s);
    let mut found = false;
    for_each_connected_subset(g, &core, v, &mut |c| {
        if c.len() < 2 * s + 2 || found {
            return found;
        }
        let set = VertexSet::from_vertices(g.n(), c.iter().copied());
        if c.iter().any(|&u| g.neighbors(u).intersection(&set).len() < 2 * s) {
            return false;
        }
        if homology_at(g, c, s, field) == 0 {
            return false;
        }
        found = pads_to(g, c, v, s, field);
        found
    });
    Ok(found)
}

/// Vertices of `within` left after repeatedly deleting those of degree `< k` inside it.
fn k_core(g: &Graph, within: &VertexSet, k: usize) -> VertexSet {
    let mut keep = within.clone();
    loop {
        let low: Vec<usize> = keep
            .iter()
            .filter(|&u| g.neighbors(u).intersection(&keep).len() < k)
            .collect();
        if low.is_empty() {
            return keep;
        }
        low.into_iter().for_each(|u| keep.remove(u));
    }
}

/// Calls `visit` on each connected vertex set inside `within` with at most `max`
/// vertices, each exactly once (rooted at its smallest vertex). `visit` returns
/// `true` to stop.
fn for_each_connected_subset(g: &Graph, within: &VertexSet, max: usize, visit: &mut dyn FnMut(&[usize]) -> bool) {
    #[allow(clippy::too_many_arguments)]
    fn extend(
        g: &Graph,
        within: &VertexSet,
        root: usize,
        max: usize,
        sub: &mut Vec<usize>,
        closed: &VertexSet,
        mut ext: Vec<usize>,
        visit: &mut dyn FnMut(&[usize]) -> bool,
    ) -> bool {
        if visit(sub) {
            return true;
        }
        if sub.len() == max {
            return false;
        }
        while let Some(w) = ext.pop() {
            let mut next_ext = ext.clone();
            let mut next_closed = closed.clone();
            for x in g.neighbors(w).iter() {
                if x > root && within.contains(x) && !closed.contains(x) {
                    next_ext.push(x);
                    next_closed.insert(x);
                }
            }
            sub.push(w);
            let stop = extend(g, within, root, max, sub, &next_closed, next_ext, visit);
            sub.pop();
            if stop {
                return true;
            }
        }
        false
    }
    for root in within.iter() {
        let mut closed = g.neighbors(root).intersection(within);
        closed.retain_above(root);
        let ext: Vec<usize> = closed.iter().collect();
        closed.insert(root);
        let mut sub = vec![root];
        if extend(g, within, root, max, &mut sub, &closed, ext, visit) {
            return;
        }
    }
}

fn local_masks(g: &Graph, vertices: &[usize]) -> Vec<u64> {
    vertices
        .iter()
        .map(|&u| {
            vertices
                .iter()
                .enumerate()
                .filter(|&(_, &w)| g.has_edge(u, w))
                .fold(0u64, |m, (k, _)| m | 1 << k)
        })
        .collect()
}

fn homology_at(g: &Graph, vertices: &[usize], s: usize, field: FieldChar) -> usize {
    let adj = local_masks(g, vertices);
    let all = (1u64 << vertices.len()) - 1;
    mask_homology(&adj, all, field).get(s).copied().unwrap_or(0)
}

/// Whether `c` extends to a `v`-set whose clique complex still has `H̃_s ≠ 0`.
fn pads_to(g: &Graph, c: &[usize], v: usize, s: usize, field: FieldChar) -> bool {
    let need = v - c.len();
    if need == 0 {
        return true;
    }
    // Greedy: vertices with fewer than 2s neighbours in the current set are free.
    let mut w = c.to_vec();
    let mut set = VertexSet::from_vertices(g.n(), c.iter().copied());
    let mut grew = true;
    while w.len() < v && grew {
        grew = false;
        for x in 0..g.n() {
            if w.len() < v && !set.contains(x) && g.neighbors(x).intersection(&set).len() < 2 * s {
                set.insert(x);
                w.push(x);
                grew = true;
            }
        }
    }
    if w.len() == v {
        return true;
    }
    let rest: Vec<usize> = (0..g.n()).filter(|x| !c.contains(x)).collect();
    let mut pick = c.to_vec();
    fn rec(
        g: &Graph,
        rest: &[usize],
        from: usize,
        need: usize,
        pick: &mut Vec<usize>,
        s: usize,
        field: FieldChar,
    ) -> bool {
        if need == 0 {
            return homology_at(g, pick, s, field) != 0;
        }
        (from..rest.len()).any(|k| {
            pick.push(rest[k]);
            let hit = rec(g, rest, k + 1, need - 1, pick, s, field);
            pick.pop();
            hit
        })
    }
    rec(g, &rest, 0, need, &mut pick, s, field)
}

/// Fraction of `i ∈ [0, pdim]` with `β_{i,i+k} ≠ 0`.
pub fn rho_k(t: &BettiTable, k: usize) -> Ratio<u64> {
    let pdim = t.pdim();
    let nonzero = (0..=pdim).filter(|&i| t.get(i, i + k) != 0).count();
    Ratio::new(nonzero as u64, pdim as u64 + 1)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct RingInvariants {
    pub pdim: usize,
    pub reg: usize,
    pub depth: usize,
    pub krull_dim: usize,
    pub codim: usize,
    pub is_cm: bool,
}

impl RingInvariants {
    pub fn codim_over_pdim(&self) -> f64 {
        if self.pdim == 0 {
            1.0
        } else {
            self.codim as f64 / self.pdim as f64
        }
    }
}

pub fn ring_invariants(g: &Graph, t: &BettiTable) -> RingInvariants {
    let n = g.n();
    let pdim = t.pdim();
    let krull_dim = g.clique_number();
    let codim = n - krull_dim;
    RingInvariants {
        pdim,
        reg: t.reg(),
        depth: n - pdim,
        krull_dim,
        codim,
        is_cm: pdim == codim,
    }
}

/// Largest graph [`reisner_is_cm`] accepts.
pub const REISNER_VERTEX_LIMIT: usize = 64;

/// Reisner's criterion over every face, the empty face included:
/// `H̃_i(lk f) = 0` for all `i < dim lk f`.
pub fn reisner_is_cm(g: &Graph, field: FieldChar) -> Result<bool> {
    let Some(adj) = g.adjacency_masks() else {
        return Err(Error::Capacity(format!(
            "Reisner check on {} vertices exceeds the {REISNER_VERTEX_LIMIT}-vertex limit",
            g.n()
        )));
    };
    let all = if g.n() == 64 { !0 } else { (1u64 << g.n()) - 1 };
    let faces = std::iter::once(0u64).chain(mask_cliques(&adj, all).into_iter().flatten());
    for face in faces {
        let mut link = all & !face;
        let mut bits = face;
        while bits != 0 {
            let v = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            link &= adj[v];
        }
        if link == 0 {
            continue;
        }
        let link_dim = mask_cliques(&adj, link).len() - 1;
        let dims = mask_homology(&adj, link, field);
        if dims.iter().take(link_dim).any(|&d| d != 0) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `r + 1 <= reg <= 2r`.
pub fn regularity_bounds_check(t: &BettiTable, r: usize) -> bool {
    let reg = t.reg();
    (r + 1..=2 * r).contains(&reg)
}

/// Float view of `numerator / denominator` for big integers.
pub fn big_ratio(numerator: &BigUint, denominator: &BigUint) -> f64 {
    Ratio::new(BigInt::from(numerator.clone()), BigInt::from(denominator.clone()))
        .to_f64()
        .unwrap_or(f64::NAN)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flag_complex::diamond;
    use crate::graph::{sample_graph, SampleParams};

    const F2: FieldChar = FieldChar::TWO;

    fn table(entries: &[(usize, usize, u64)], n: usize) -> BettiTable {
        BettiTable::from_entries(n, F2, entries.iter().copied())
    }

    /// The n = 18 table displayed as a worked example for `Δ(18, 18^{-0.6})`.
    pub(crate) fn example_table_n18() -> BettiTable {
        let row0: &[u64] = &[1];
        let row1: &[u64] = &[
            0, 126, 1203, 5986, 19491, 45278, 78385, 103667, 106356, 85548, 54408, 27541, 11118, 3550, 873, 156, 18, 1,
        ];
        let row2: &[u64] = &[
            0, 0, 1, 24, 233, 1282, 4568, 11261, 19911, 25743, 24538, 17229, 8815, 3204, 786, 117, 8, 0,
        ];
        BettiTable::from_rows(18, F2, &[row0, row1, row2])
    }

    #[test]
    fn known_tables() {
        let c4 = betti_table(&Graph::cycle(4).unwrap(), F2).unwrap();
        assert_eq!(c4, table(&[(0, 0, 1), (1, 2, 2), (2, 4, 1)], 4));
        let p3 = betti_table(&Graph::path(3).unwrap(), F2).unwrap();
        assert_eq!(p3, table(&[(0, 0, 1), (1, 2, 1)], 3));
        let e3 = betti_table(&Graph::empty(3).unwrap(), F2).unwrap();
        assert_eq!(e3, table(&[(0, 0, 1), (1, 2, 3), (2, 3, 2)], 3));
        for n in 0..8 {
            let k = betti_table(&Graph::complete(n).unwrap(), F2).unwrap();
            assert_eq!(k, table(&[(0, 0, 1)], n));
        }
    }

    #[test]
    fn guard() {
        let g = Graph::empty(23).unwrap();
        assert!(matches!(betti_table(&g, F2), Err(Error::Capacity(_))));
        let big = Graph::empty(27).unwrap();
        let opts = BettiOptions { allow_large: true };
        assert!(matches!(betti_table_with(&big, F2, opts), Err(Error::Capacity(_))));
    }

    #[test]
    fn diamond_table_has_top_corner() {
        // Full ♦_s: β_{s+1, 2s+2} = 1, the last entry of row s+1.
        for s in 0..=3 {
            let t = betti_table(&diamond(s), F2).unwrap();
            assert_eq!(t.get(s + 1, 2 * s + 2), 1);
            assert_eq!(t.pdim(), s + 1);
            assert!(t.satisfies_koszul_bound());
        }
    }

    #[test]
    fn first_row_examples() {
        let c4 = Graph::cycle(4).unwrap();
        assert_eq!(first_row(&c4, 1).unwrap().0, BigUint::from(2u32));
        assert_eq!(first_row(&c4, 2).unwrap().0, BigUint::from(0u32));
        assert_eq!(first_row(&c4, 3).unwrap().0, BigUint::from(0u32));
        assert!(first_row(&c4, 0).is_err());
        assert!(first_row(&c4, 4).is_err());
    }

    #[test]
    fn first_row_refuses_large_messy_graphs() {
        let g = Graph::complete(30).unwrap();
        assert!(matches!(first_row(&g, 3), Err(Error::Capacity(_))));
        let (v, m) = first_row(&Graph::complete(10).unwrap(), 3).unwrap();
        assert_eq!((v, m), (BigUint::zero(), FirstRowMethod::Enumeration));
    }

    #[test]
    fn first_row_profile_matches_table() {
        for stream in 0..40 {
            let g = sample_graph(&SampleParams {
                n: 10,
                p: 0.25,
                seed: 12,
                stream,
            })
            .unwrap();
            let t = betti_table(&g, F2).unwrap();
            let (profile, _) = first_row_profile(&g).unwrap();
            for (idx, v) in profile.iter().enumerate() {
                let i = idx + 1;
                assert_eq!(*v, BigUint::from(t.get(i, i + 1)));
                assert_eq!(*v, first_row_enumerated(&g, i).unwrap());
            }
        }
    }

    #[test]
    fn rho_examples() {
        let ex = example_table_n18();
        assert_eq!(ex.pdim(), 17);
        assert_eq!(rho_k(&ex, 1), Ratio::new(17, 18));
        assert_eq!(rho_k(&ex, 2), Ratio::new(15, 18));
        let k = betti_table(&Graph::complete(5).unwrap(), F2).unwrap();
        assert_eq!(rho_k(&k, 1), Ratio::new(0, 1));
    }

    #[test]
    fn invariants_examples() {
        let c4 = Graph::cycle(4).unwrap();
        let inv = ring_invariants(&c4, &betti_table(&c4, F2).unwrap());
        assert_eq!(
            inv,
            RingInvariants {
                pdim: 2,
                reg: 2,
                depth: 2,
                krull_dim: 2,
                codim: 2,
                is_cm: true
            }
        );
        let e3 = Graph::empty(3).unwrap();
        let inv = ring_invariants(&e3, &betti_table(&e3, F2).unwrap());
        assert_eq!(
            inv,
            RingInvariants {
                pdim: 2,
                reg: 1,
                depth: 1,
                krull_dim: 1,
                codim: 2,
                is_cm: true
            }
        );
        let two_edges = Graph::from_edges(4, &[(0, 1), (2, 3)]).unwrap();
        let inv = ring_invariants(&two_edges, &betti_table(&two_edges, F2).unwrap());
        assert!(!inv.is_cm);
        assert!(inv.codim <= inv.pdim);
    }

    #[test]
    fn reisner_examples() {
        assert!(reisner_is_cm(&Graph::complete(4).unwrap(), F2).unwrap());
        assert!(!reisner_is_cm(&Graph::from_edges(4, &[(0, 1), (2, 3)]).unwrap(), F2).unwrap());
        assert!(reisner_is_cm(&Graph::cycle(4).unwrap(), F2).unwrap());
        assert!(reisner_is_cm(&Graph::empty(0).unwrap(), F2).unwrap());
    }

    #[test]
    fn forests_are_cm_exactly_when_edgeless_or_spanning_trees() {
        let cases = [
            (Graph::empty(6).unwrap(), true),
            (Graph::path(6).unwrap(), true),
            (
                Graph::from_edges(6, &[(0, 1), (0, 2), (0, 3), (3, 4), (3, 5)]).unwrap(),
                true,
            ),
            (Graph::from_edges(6, &[(0, 1)]).unwrap(), false),
            (Graph::from_edges(6, &[(0, 1), (1, 2), (3, 4), (4, 5)]).unwrap(), false),
        ];
        for (g, cm) in cases {
            assert_eq!(reisner_is_cm(&g, F2).unwrap(), cm, "{g:?}");
        }
    }

    #[test]
    fn cm_from_pdim_matches_reisner() {
        // All graphs on at most 5 vertices, plus random 6- and 7-vertex graphs.
        for n in 0..=5 {
            for code in 0..1u64 << (n * (n.max(1) - 1) / 2) {
                let g = Graph::from_edge_code(n, code);
                let inv = ring_invariants(&g, &betti_table(&g, F2).unwrap());
                assert_eq!(inv.is_cm, reisner_is_cm(&g, F2).unwrap(), "{g:?}");
            }
        }
        for stream in 0..400 {
            let n = 6 + stream as usize % 2;
            let p = [0.3, 0.5, 0.7][stream as usize % 3];
            let g = sample_graph(&SampleParams { n, p, seed: 31, stream }).unwrap();
            let inv = ring_invariants(&g, &betti_table(&g, F2).unwrap());
            assert_eq!(inv.is_cm, reisner_is_cm(&g, F2).unwrap(), "{g:?}");
            assert_eq!(inv.depth, n - inv.pdim);
            assert!(inv.codim <= inv.pdim);
        }
    }

    #[test]
    fn regularity_bounds_examples() {
        assert!(regularity_bounds_check(&example_table_n18(), 1));
        let c4 = betti_table(&Graph::cycle(4).unwrap(), F2).unwrap();
        assert!(regularity_bounds_check(&c4, 1));
        let k = betti_table(&Graph::complete(4).unwrap(), F2).unwrap();
        assert!(!regularity_bounds_check(&k, 1));
    }

    #[test]
    fn grid_layout() {
        let c4 = betti_table(&Graph::cycle(4).unwrap(), F2).unwrap();
        assert_eq!(c4.to_grid(), "   0 1 2\n0: 1 . .\n1: . 2 .\n2: . . 1\n");
        let k4 = betti_table(&Graph::complete(4).unwrap(), F2).unwrap();
        assert_eq!(k4.to_grid(), "   0\n0: 1\n");
    }

    #[test]
    fn json_layout() {
        let c4 = betti_table(&Graph::cycle(4).unwrap(), F2).unwrap();
        assert_eq!(c4.to_json(), r#"{"n":4,"char":2,"entries":[[0,0,1],[1,2,2],[2,4,1]]}"#);
        assert_eq!(BettiTable::from_json(&c4.to_json()).unwrap(), c4);
    }

    #[test]
    fn nonvanishing_matches_table() {
        for stream in 0..200 {
            let n = 4 + stream as usize % 7;
            let p = [0.3, 0.5, 0.7, 0.85][stream as usize % 4];
            let g = sample_graph(&SampleParams { n, p, seed: 31, stream }).unwrap();
            let t = betti_table(&g, F2).unwrap();
            for i in 1..n {
                for v in i + 2..=n.min(2 * i + 1) {
                    assert_eq!(
                        betti_nonvanishing(&g, i, v, F2).unwrap(),
                        t.get(i, v) != 0,
                        "{g:?} i={i} v={v}"
                    );
                }
            }
        }
    }

    #[test]
    fn nonvanishing_examples() {
        assert!(betti_nonvanishing(&Graph::cycle(4).unwrap(), 2, 4, F2).unwrap());
        assert!(!betti_nonvanishing(&Graph::cycle(5).unwrap(), 2, 4, F2).unwrap());
        assert!(!betti_nonvanishing(&Graph::empty(80).unwrap(), 2, 4, F2).unwrap());
        // ♦_2 plus isolated vertices: β_{3,6} and, padded, β_{4,7}.
        let mut g = Graph::empty(8).unwrap();
        diamond(2).edges().for_each(|(a, b)| g.add_edge(a, b));
        assert!(betti_nonvanishing(&g, 3, 6, F2).unwrap());
        assert!(betti_nonvanishing(&g, 4, 7, F2).unwrap());
        assert!(betti_nonvanishing(&g, 2, 4, F2).unwrap());
        assert!(betti_nonvanishing(&g, 1, 2, F2).is_err());
        assert!(matches!(betti_nonvanishing(&g, 7, 13, F2), Err(Error::Capacity(_))));
    }
}

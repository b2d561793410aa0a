//! Independent checks: Betti numbers from the Taylor resolution, and an
//! exhaustive search over small labeled graphs for the extremal bounds on
//! graphs whose clique complex carries homology in a given degree.

use std::collections::HashSet;

use rayon::prelude::*;
use serde::Serialize;

use crate::betti::{betti_table, BettiTable};
use crate::error::{Error, Result};
use crate::graph::{sample_graph, Graph, SampleParams};
use crate::homology::{mask_homology, BoundaryMatrix, FieldChar};

/// Most non-edges the Taylor oracle accepts.
pub const TAYLOR_GENERATOR_LIMIT: usize = 22;

/// Betti numbers of `S/I_Δ` from the Taylor complex on the non-edge monomials.
///
/// Each multidegree `W` is handled separately. Fixing a generator `m0 = x_a x_b`
/// dividing `x_W`, the subsets `T ∋ m0` with `lcm(T) = x_W` but `lcm(T - m0) ≠ x_W`
/// span a subcomplex with the same homology as the full strand, and only these
/// are built.
pub fn taylor_betti_table(g: &Graph, field: FieldChar) -> Result<BettiTable> {
    let n = g.n();
    let gens = generator_masks(g)?;
    let mut tally = vec![0u64; (gens.len() + 1) * (n + 1)];
    for w in lcm_lattice(&gens) {
        let local: Vec<u64> = gens.iter().copied().filter(|&m| m & !w == 0).collect();
        let cells = critical_cells(&local, w);
        let j = w.count_ones() as usize;
        for (i, d) in strand_homology(&cells, &local, w, field).into_iter().enumerate() {
            tally[i * (n + 1) + j] += d as u64;
        }
    }
    let entries =
        std::iter::once((0, 0, 1)).chain(tally.iter().enumerate().map(|(k, &b)| (k / (n + 1), k % (n + 1), b)));
    Ok(BettiTable::from_entries(n, field, entries))
}

fn generator_masks(g: &Graph) -> Result<Vec<u64>> {
    if g.n() > 64 {
        return Err(Error::Capacity(format!(
            "Taylor oracle needs at most 64 vertices, got {}",
            g.n()
        )));
    }
    let gens: Vec<u64> = g.non_edges().into_iter().map(|(u, v)| 1 << u | 1 << v).collect();
    if gens.len() > TAYLOR_GENERATOR_LIMIT {
        return Err(Error::Capacity(format!(
            "{} non-edges exceed the Taylor limit of {TAYLOR_GENERATOR_LIMIT}",
            gens.len()
        )));
    }
    Ok(gens)
}

/// Every nonempty union of generator supports, ascending.
fn lcm_lattice(gens: &[u64]) -> Vec<u64> {
    let mut seen: HashSet<u64> = HashSet::from([0]);
    for &m in gens {
        let grown: Vec<u64> = seen.iter().map(|&u| u | m).collect();
        seen.extend(grown);
    }
    seen.remove(&0);
    let mut out: Vec<u64> = seen.into_iter().collect();
    out.sort_unstable();
    out
}

fn union_of(local: &[u64], t: u32) -> u64 {
    (0..local.len())
        .filter(|&k| t >> k & 1 == 1)
        .fold(0, |acc, k| acc | local[k])
}

/// Critical subsets (bitmasks over `local`) for the best choice of `m0`, grouped by size.
fn critical_cells(local: &[u64], w: u64) -> Vec<Vec<u32>> {
    let cost = |k: usize| {
        let (a, b) = split_pair(local[k]);
        let avoid_a = local.iter().filter(|&&m| m & a == 0).count();
        let avoid_b = local.iter().filter(|&&m| m & b == 0).count();
        (1u64 << avoid_a) + (1u64 << avoid_b)
    };
    let m0 = (0..local.len())
        .min_by_key(|&k| cost(k))
        .expect("W is a union of generators");
    let (a, b) = split_pair(local[m0]);
    let rest = w & !local[m0];

    let mut cells: Vec<u32> = Vec::new();
    let avoid_a: Vec<usize> = (0..local.len()).filter(|&k| local[k] & a == 0).collect();
    let avoid_b: Vec<usize> = (0..local.len()).filter(|&k| local[k] & b == 0).collect();
    for (pool, other) in [(&avoid_a, 0u64), (&avoid_b, a)] {
        // Subsets of the second pool that also avoid `a` were already taken from the first.
        let mut unions = vec![0u64; 1 << pool.len()];
        for t in 1usize..1 << pool.len() {
            let low = t.trailing_zeros() as usize;
            unions[t] = unions[t & (t - 1)] | local[pool[low]];
            let u = unions[t];
            if u & rest == rest && (other == 0 || u & other != 0) {
                let cell = (0..pool.len())
                    .filter(|&k| t >> k & 1 == 1)
                    .fold(1u32 << m0, |acc, k| acc | 1 << pool[k]);
                cells.push(cell);
            }
        }
    }
    if rest == 0 {
        cells.push(1 << m0);
    }
    group_by_size(cells)
}

fn split_pair(m: u64) -> (u64, u64) {
    let a = m & m.wrapping_neg();
    (a, m & !a)
}

fn group_by_size(cells: Vec<u32>) -> Vec<Vec<u32>> {
    let mut levels: Vec<Vec<u32>> = Vec::new();
    for t in cells {
        let k = t.count_ones() as usize;
        if levels.len() <= k {
            levels.resize(k + 1, Vec::new());
        }
        levels[k].push(t);
    }
    for level in &mut levels {
        level.sort_unstable();
    }
    levels
}

/// `dims[i] = dim H_i` of a multidegree strand whose cells are given by size.
/// A face `T - m` enters the boundary only when it is itself a listed cell.
fn strand_homology(levels: &[Vec<u32>], local: &[u64], w: u64, field: FieldChar) -> Vec<usize> {
    let empty = Vec::new();
    let level = |k: usize| levels.get(k).unwrap_or(&empty);
    let rank = |k: usize| -> usize {
        if k == 0 {
            return 0;
        }
        let (upper, lower) = (level(k), level(k - 1));
        if upper.is_empty() || lower.is_empty() {
            return 0;
        }
        let columns = upper
            .iter()
            .map(|&t| {
                let mut col = Vec::new();
                let mut pos = 0;
                for m in 0..local.len() {
                    if t >> m & 1 == 0 {
                        continue;
                    }
                    let face = t & !(1 << m);
                    if union_of(local, face) == w {
                        if let Ok(row) = lower.binary_search(&face) {
                            col.push((row, if pos % 2 == 0 { 1 } else { -1 }));
                        }
                    }
                    pos += 1;
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
        .rank()
    };
    let ranks: Vec<usize> = (0..=levels.len()).map(rank).collect();
    (0..levels.len())
        .map(|k| levels[k].len() - ranks[k] - ranks[k + 1])
        .collect()
}

/// First disagreement between the Hochster and Taylor computations.
#[derive(Clone, Debug, Serialize)]
pub struct Divergence {
    pub n: usize,
    pub p: f64,
    pub stream: u64,
    pub edges: Vec<(usize, usize)>,
    pub hochster: String,
    pub taylor: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct CrossValidation {
    pub trials: usize,
    pub compared: usize,
    /// Draws with more than [`TAYLOR_GENERATOR_LIMIT`] non-edges, redrawn on a fresh stream.
    pub skipped_over_capacity: usize,
    pub divergence: Option<Divergence>,
}

impl CrossValidation {
    pub fn agrees(&self) -> bool {
        self.divergence.is_none() && self.compared == self.trials
    }
}

const CROSS_VALIDATION_PROBABILITIES: [f64; 3] = [0.2, 0.5, 0.8];
const REDRAWS_PER_TRIAL: u64 = 64;

/// Compares [`betti_table`] with [`taylor_betti_table`] over GF(2) on seeded graphs.
pub fn cross_validate(trials: usize, n_max: usize, seed: u64) -> Result<CrossValidation> {
    cross_validate_with(trials, n_max, seed, FieldChar::TWO)
}

/// The graph compared in trial `t`: `n = 1 + t mod n_max`, `p` cycling through
/// 0.2, 0.5, 0.8, redrawn on the next stream while it has more than
/// [`TAYLOR_GENERATOR_LIMIT`] non-edges. Returns the graph, its `p`, its stream
/// and the number of redraws.
pub fn cross_validation_draw(t: usize, n_max: usize, seed: u64) -> Result<(Graph, f64, u64, usize)> {
    if n_max == 0 {
        return Err(Error::Parameter("n_max must be positive".into()));
    }
    let n = 1 + t % n_max;
    let p = CROSS_VALIDATION_PROBABILITIES[(t / n_max) % 3];
    for attempt in 0..REDRAWS_PER_TRIAL {
        let stream = t as u64 * REDRAWS_PER_TRIAL + attempt;
        let g = sample_graph(&SampleParams { n, p, seed, stream })?;
        if g.non_edges().len() <= TAYLOR_GENERATOR_LIMIT {
            return Ok((g, p, stream, attempt as usize));
        }
    }
    Err(Error::Capacity(format!(
        "no draw for n={n}, p={p} fit the Taylor limit"
    )))
}

pub fn cross_validate_with(trials: usize, n_max: usize, seed: u64, field: FieldChar) -> Result<CrossValidation> {
    let outcomes: Vec<(usize, Option<Divergence>)> = (0..trials)
        .into_par_iter()
        .map(|t| -> Result<(usize, Option<Divergence>)> {
            let (g, p, stream, skipped) = cross_validation_draw(t, n_max, seed)?;
            let taylor = taylor_betti_table(&g, field)?;
            let hochster = betti_table(&g, field)?;
            let divergence = (hochster != taylor).then(|| Divergence {
                n: g.n(),
                p,
                stream,
                edges: g.edges().collect(),
                hochster: hochster.to_json(),
                taylor: taylor.to_json(),
            });
            Ok((skipped, divergence))
        })
        .collect::<Result<_>>()?;
    Ok(CrossValidation {
        trials,
        compared: outcomes.len(),
        skipped_over_capacity: outcomes.iter().map(|o| o.0).sum(),
        divergence: outcomes.into_iter().find_map(|o| o.1),
    })
}

/// Largest vertex count for exhaustive enumeration; the top size is edge-filtered.
pub const EXTREMAL_N_LIMIT: usize = 7;
const FULL_ENUMERATION_LIMIT: usize = 6;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Counterexample {
    pub n: usize,
    pub edges: Vec<(usize, usize)>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ClaimReport {
    pub claim: String,
    pub bound: u64,
    pub witness_count: u64,
    pub counterexample: Option<Counterexample>,
}

/// Outcome of the exhaustive search for graphs with `H̃_r ≠ 0`.
#[derive(Clone, Debug, Serialize)]
pub struct ExtremalReport {
    pub r: usize,
    pub n_max: usize,
    pub field: FieldChar,
    pub graphs_examined: u64,
    /// Whether every graph below `2r+2` vertices was examined.
    pub vertex_claim_exhaustive: bool,
    pub min_vertices: Option<usize>,
    pub min_edges: Option<usize>,
    pub minimizers: u64,
    pub expected_minimizers: u64,
    pub claims: Vec<ClaimReport>,
}

impl ExtremalReport {
    pub fn holds(&self) -> bool {
        self.claims.iter().all(|c| c.counterexample.is_none())
    }

    /// Bounds attained, minimizers all cross-polytopes, and exactly one per labeling.
    pub fn is_sharp(&self) -> bool {
        self.holds()
            && self.min_vertices == Some(2 * self.r + 2)
            && self.min_edges == Some(2 * self.r * (self.r + 1))
            && self.minimizers == self.expected_minimizers
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

#[derive(Clone, Default)]
struct Tally {
    examined: u64,
    nonzero: u64,
    min_vertices: Option<usize>,
    min_edges: Option<usize>,
    at_vertex_bound: u64,
    at_edge_bound: u64,
    minimizers: u64,
    // (n, code) of the first violation of each claim.
    vertex_violation: Option<(usize, u64)>,
    edge_violation: Option<(usize, u64)>,
    shape_violation: Option<(usize, u64)>,
}

fn min_opt<T: Ord>(a: Option<T>, b: Option<T>) -> Option<T> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (x, None) => x,
        (None, y) => y,
    }
}

impl Tally {
    fn merge(self, o: Tally) -> Tally {
        Tally {
            examined: self.examined + o.examined,
            nonzero: self.nonzero + o.nonzero,
            min_vertices: min_opt(self.min_vertices, o.min_vertices),
            min_edges: min_opt(self.min_edges, o.min_edges),
            at_vertex_bound: self.at_vertex_bound + o.at_vertex_bound,
            at_edge_bound: self.at_edge_bound + o.at_edge_bound,
            minimizers: self.minimizers + o.minimizers,
            vertex_violation: min_opt(self.vertex_violation, o.vertex_violation),
            edge_violation: min_opt(self.edge_violation, o.edge_violation),
            shape_violation: min_opt(self.shape_violation, o.shape_violation),
        }
    }
}

fn adjacency_from_code(n: usize, code: u64) -> Vec<u64> {
    let mut adj = vec![0u64; n];
    let mut k = 0;
    for u in 0..n {
        for v in u + 1..n {
            if code >> k & 1 == 1 {
                adj[u] |= 1 << v;
                adj[v] |= 1 << u;
            }
            k += 1;
        }
    }
    adj
}

/// Enumerates labeled graphs on up to `n_max` vertices and checks that
/// `H̃_r ≠ 0` needs at least `2r+2` vertices and `2r(r+1)` edges, with the
/// cross-polytope boundary as the only graph attaining both.
///
/// Sizes up to 6 are exhaustive; at 7 only graphs with at most `2r(r+1)` edges are visited.
pub fn verify_extremal_lemma(r: usize, n_max: usize, field: FieldChar) -> Result<ExtremalReport> {
    if n_max > EXTREMAL_N_LIMIT {
        return Err(Error::Capacity(format!(
            "exhaustive enumeration stops at {EXTREMAL_N_LIMIT} vertices, got {n_max}"
        )));
    }
    let vertex_bound = 2 * r + 2;
    let edge_bound = 2 * r * (r + 1);
    let mut total = Tally::default();
    for n in 1..=n_max {
        let pairs = n * (n - 1) / 2;
        let filtered = n > FULL_ENUMERATION_LIMIT;
        let tally = (0u64..1 << pairs)
            .into_par_iter()
            .filter(|code| !filtered || code.count_ones() as usize <= edge_bound)
            .fold(Tally::default, |mut acc, code| {
                acc.examined += 1;
                let adj = adjacency_from_code(n, code);
                let dims = mask_homology(&adj, (1u64 << n) - 1, field);
                if dims.get(r).copied().unwrap_or(0) == 0 {
                    return acc;
                }
                let e = code.count_ones() as usize;
                acc.nonzero += 1;
                acc.min_vertices = min_opt(acc.min_vertices, Some(n));
                acc.min_edges = min_opt(acc.min_edges, Some(e));
                if n < vertex_bound {
                    acc.vertex_violation = min_opt(acc.vertex_violation, Some((n, code)));
                }
                if e < edge_bound {
                    acc.edge_violation = min_opt(acc.edge_violation, Some((n, code)));
                }
                acc.at_vertex_bound += (n == vertex_bound) as u64;
                acc.at_edge_bound += (e == edge_bound) as u64;
                if n == vertex_bound && e == edge_bound {
                    acc.minimizers += 1;
                    // 2r(r+1) edges with every degree n-2: the complement is a perfect matching.
                    if adj.iter().any(|m| m.count_ones() as usize != n - 2) {
                        acc.shape_violation = min_opt(acc.shape_violation, Some((n, code)));
                    }
                }
                acc
            })
            .reduce(Tally::default, Tally::merge);
        total = total.merge(tally);
    }

    let witness = |v: Option<(usize, u64)>| {
        v.map(|(n, code)| Counterexample {
            n,
            edges: Graph::from_edge_code(n, code).edges().collect(),
        })
    };
    let expected_minimizers = labelings(r);
    Ok(ExtremalReport {
        r,
        n_max,
        field,
        graphs_examined: total.examined,
        vertex_claim_exhaustive: n_max.min(vertex_bound - 1) <= FULL_ENUMERATION_LIMIT,
        min_vertices: total.min_vertices,
        min_edges: total.min_edges,
        minimizers: total.minimizers,
        expected_minimizers,
        claims: vec![
            ClaimReport {
                claim: "min_vertices".into(),
                bound: vertex_bound as u64,
                witness_count: total.at_vertex_bound,
                counterexample: witness(total.vertex_violation),
            },
            ClaimReport {
                claim: "min_edges".into(),
                bound: edge_bound as u64,
                witness_count: total.at_edge_bound,
                counterexample: witness(total.edge_violation),
            },
            ClaimReport {
                claim: "minimizer_is_cross_polytope".into(),
                bound: expected_minimizers,
                witness_count: total.minimizers,
                counterexample: witness(total.shape_violation),
            },
        ],
    })
}

/// `(2r+2)! / (2^{r+1} (r+1)!)`: labeled copies of the cross-polytope on `2r+2` vertices.
pub fn labelings(r: usize) -> u64 {
    let fact = |k: usize| (1..=k as u64).product::<u64>();
    fact(2 * r + 2) / ((1u64 << (r + 1)) * fact(r + 1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flag_complex::diamond;

    /// The whole Taylor complex, no reduction.
    fn full_taylor(g: &Graph, field: FieldChar) -> BettiTable {
        let n = g.n();
        let gens = generator_masks(g).unwrap();
        assert!(gens.len() <= 14);
        let mut entries = vec![(0, 0, 1)];
        for w in lcm_lattice(&gens) {
            let local: Vec<u64> = gens.iter().copied().filter(|&m| m & !w == 0).collect();
            let cells: Vec<u32> = (1u32..1 << local.len()).filter(|&t| union_of(&local, t) == w).collect();
            let levels = group_by_size(cells);
            for (i, d) in strand_homology(&levels, &local, w, field).into_iter().enumerate() {
                entries.push((i, w.count_ones() as usize, d as u64));
            }
        }
        // Repeated (i, j) keys are summed.
        let mut merged = std::collections::BTreeMap::new();
        for (i, j, d) in entries {
            *merged.entry((i, j)).or_insert(0) += d;
        }
        BettiTable::from_entries(n, field, merged.into_iter().map(|((i, j), d)| (i, j, d)))
    }

    #[test]
    fn taylor_known_tables() {
        let f = FieldChar::TWO;
        let c4 = taylor_betti_table(&Graph::cycle(4).unwrap(), f).unwrap();
        assert_eq!(c4, BettiTable::from_rows(4, f, &[&[1], &[0, 2], &[0, 0, 1]]));
        let k3 = taylor_betti_table(&Graph::complete(3).unwrap(), f).unwrap();
        assert_eq!(k3, BettiTable::from_rows(3, f, &[&[1]]));
        let e3 = taylor_betti_table(&Graph::empty(3).unwrap(), f).unwrap();
        assert_eq!(e3, BettiTable::from_rows(3, f, &[&[1], &[0, 3, 2]]));
        let oct = taylor_betti_table(&diamond(2), f).unwrap();
        assert_eq!(oct, betti_table(&diamond(2), f).unwrap());
        assert_eq!(oct.get(3, 6), 1);
    }

    #[test]
    fn reduced_taylor_matches_full_taylor() {
        for stream in 0..150 {
            let n = 3 + stream as usize % 4;
            let p = [0.3, 0.5, 0.7][stream as usize % 3];
            let g = sample_graph(&SampleParams { n, p, seed: 8, stream }).unwrap();
            if g.non_edges().len() > 14 {
                continue;
            }
            for f in [FieldChar::TWO, FieldChar::new(3).unwrap()] {
                assert_eq!(taylor_betti_table(&g, f).unwrap(), full_taylor(&g, f), "{g:?}");
            }
        }
    }

    #[test]
    fn taylor_guard() {
        assert!(matches!(
            taylor_betti_table(&Graph::empty(8).unwrap(), FieldChar::TWO),
            Err(Error::Capacity(_))
        ));
        assert!(taylor_betti_table(&Graph::complete(70).unwrap(), FieldChar::TWO).is_err());
    }

    #[test]
    fn cross_validation_agrees() {
        let report = cross_validate(60, 7, 1).unwrap();
        assert!(report.agrees(), "{report:?}");
        let report = cross_validate_with(30, 6, 4, FieldChar::new(3).unwrap()).unwrap();
        assert!(report.agrees(), "{report:?}");
    }

    #[test]
    fn extremal_small_cases() {
        assert_eq!((labelings(0), labelings(1), labelings(2)), (1, 3, 15));
        for r in 0..=2 {
            let rep = verify_extremal_lemma(r, 6, FieldChar::TWO).unwrap();
            assert!(rep.is_sharp(), "{}", rep.to_json());
        }
        let rep = verify_extremal_lemma(1, 6, FieldChar::new(3).unwrap()).unwrap();
        assert!(rep.is_sharp());
        assert!(verify_extremal_lemma(1, 8, FieldChar::TWO).is_err());
    }

    #[test]
    fn extremal_report_flags_missing_witnesses() {
        // Too few vertices to realise H̃_2 at all.
        let rep = verify_extremal_lemma(2, 5, FieldChar::TWO).unwrap();
        assert!(rep.holds());
        assert!(!rep.is_sharp());
        assert_eq!(rep.min_vertices, None);
    }
}

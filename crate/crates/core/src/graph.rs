//! Labeled simple graphs on `[n]` with per-vertex bitset adjacency.
//!
//! Sampling follows `G(n, p)`: one uniform draw per unordered pair, visited in
//! lexicographic order `(0,1), (0,2), …, (n-2,n-1)`, and the pair becomes an
//! edge when its uniform falls below `p`. The generator for a trial is a ChaCha
//! stream selected by `(seed, stream)`, so every trial is addressable on its own
//! and two probabilities sampled from the same trial give nested graphs.

use std::fmt;

use petgraph::unionfind::UnionFind;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest vertex count a [`Graph`] may hold.
pub const MAX_VERTICES: usize = 4096;

/// A subset of `[n]`, stored as 64-bit words.
#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VertexSet {
    words: Vec<u64>,
}

impl VertexSet {
    pub fn new(n: usize) -> Self {
        VertexSet {
            words: vec![0; n.div_ceil(64)],
        }
    }

    pub fn full(n: usize) -> Self {
        let mut s = Self::new(n);
        for v in 0..n {
            s.insert(v);
        }
        s
    }

    pub fn from_vertices(n: usize, vertices: impl IntoIterator<Item = usize>) -> Self {
        let mut s = Self::new(n);
        for v in vertices {
            s.insert(v);
        }
        s
    }

    /// Builds a set from the low bits of `mask` (for graphs with at most 64 vertices).
    pub fn from_mask(n: usize, mask: u64) -> Self {
        let mut s = Self::new(n.max(1));
        s.words[0] = mask;
        s.words.truncate(n.div_ceil(64));
        s
    }

    /// Low word of the set; exact when the universe has at most 64 elements.
    pub fn to_mask(&self) -> u64 {
        self.words.first().copied().unwrap_or(0)
    }

    #[inline]
    pub fn insert(&mut self, v: usize) {
        let w = v / 64;
        if w >= self.words.len() {
            self.words.resize(w + 1, 0);
        }
        self.words[w] |= 1 << (v % 64);
    }

    #[inline]
    pub fn remove(&mut self, v: usize) {
        if let Some(w) = self.words.get_mut(v / 64) {
            *w &= !(1 << (v % 64));
        }
    }

    #[inline]
    pub fn contains(&self, v: usize) -> bool {
        self.words.get(v / 64).is_some_and(|w| w & (1 << (v % 64)) != 0)
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    /// Members in ascending order.
    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(i, &w)| {
            let mut bits = w;
            std::iter::from_fn(move || {
                if bits == 0 {
                    return None;
                }
                let t = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                Some(i * 64 + t)
            })
        })
    }

    pub fn min(&self) -> Option<usize> {
        self.iter().next()
    }

    pub fn intersection(&self, other: &VertexSet) -> VertexSet {
        VertexSet {
            words: self.words.iter().zip(&other.words).map(|(a, b)| a & b).collect(),
        }
    }

    pub fn intersect_with(&mut self, other: &VertexSet) {
        for (i, w) in self.words.iter_mut().enumerate() {
            *w &= other.words.get(i).copied().unwrap_or(0);
        }
    }

    pub fn union_with(&mut self, other: &VertexSet) {
        if other.words.len() > self.words.len() {
            self.words.resize(other.words.len(), 0);
        }
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a |= b;
        }
    }

    pub fn difference_with(&mut self, other: &VertexSet) {
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a &= !b;
        }
    }

    pub fn is_subset(&self, other: &VertexSet) -> bool {
        self.words
            .iter()
            .enumerate()
            .all(|(i, &w)| w & !other.words.get(i).copied().unwrap_or(0) == 0)
    }

    /// Drops every member `<= v`.
    pub fn retain_above(&mut self, v: usize) {
        let (w, b) = (v / 64, v % 64);
        for (i, word) in self.words.iter_mut().enumerate() {
            if i < w {
                *word = 0;
            } else if i == w {
                *word &= if b == 63 { 0 } else { !0u64 << (b + 1) };
            }
        }
    }
}

impl fmt::Debug for VertexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

/// A labeled simple graph on vertices `0..n`.
#[derive(Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    adj: Vec<VertexSet>,
}

impl Graph {
    /// The edgeless graph on `n` vertices.
    pub fn empty(n: usize) -> Result<Self> {
        if n > MAX_VERTICES {
            return Err(Error::Capacity(format!(
                "graph with {n} vertices exceeds the {MAX_VERTICES}-vertex limit"
            )));
        }
        Ok(Graph {
            n,
            adj: vec![VertexSet::new(n); n],
        })
    }

    pub fn complete(n: usize) -> Result<Self> {
        let mut g = Self::empty(n)?;
        for u in 0..n {
            for v in u + 1..n {
                g.add_edge(u, v);
            }
        }
        Ok(g)
    }

    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut g = Self::empty(n)?;
        for &(u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::Parameter(format!("edge ({u},{v}) outside [0,{n})")));
            }
            if u == v {
                return Err(Error::Parameter(format!("self-loop at vertex {u}")));
            }
            g.add_edge(u, v);
        }
        Ok(g)
    }

    /// The cycle `0-1-…-(n-1)-0`.
    pub fn cycle(n: usize) -> Result<Self> {
        let edges: Vec<_> = (0..n).map(|v| (v, (v + 1) % n)).collect();
        Self::from_edges(n, &edges)
    }

    pub fn path(n: usize) -> Result<Self> {
        let edges: Vec<_> = (1..n).map(|v| (v - 1, v)).collect();
        Self::from_edges(n, &edges)
    }

    /// Builds a graph on `n <= 64` vertices from an edge code whose bit `k`
    /// marks the `k`-th pair in lexicographic order.
    pub fn from_edge_code(n: usize, code: u64) -> Self {
        let mut g = Self::empty(n).expect("small graph");
        let mut k = 0;
        for u in 0..n {
            for v in u + 1..n {
                if code >> k & 1 == 1 {
                    g.add_edge(u, v);
                }
                k += 1;
            }
        }
        g
    }

    pub fn add_edge(&mut self, u: usize, v: usize) {
        debug_assert!(u != v && u < self.n && v < self.n);
        self.adj[u].insert(v);
        self.adj[v].insert(u);
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.n && self.adj[u].contains(v)
    }

    pub fn neighbors(&self, v: usize) -> &VertexSet {
        &self.adj[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(VertexSet::len).sum::<usize>() / 2
    }

    /// Edges `(u, v)` with `u < v` in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n).flat_map(move |u| {
            let mut above = self.adj[u].clone();
            above.retain_above(u);
            above.iter().map(move |v| (u, v)).collect::<Vec<_>>()
        })
    }

    /// Unordered non-adjacent pairs `(u, v)` with `u < v`, lexicographic.
    pub fn non_edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for u in 0..self.n {
            for v in u + 1..self.n {
                if !self.adj[u].contains(v) {
                    out.push((u, v));
                }
            }
        }
        out
    }

    /// Adjacency as one `u64` mask per vertex; `None` past 64 vertices.
    pub fn adjacency_masks(&self) -> Option<Vec<u64>> {
        (self.n <= 64).then(|| self.adj.iter().map(VertexSet::to_mask).collect())
    }

    pub fn is_clique(&self, s: &VertexSet) -> bool {
        s.iter().all(|v| {
            let mut rest = s.clone();
            rest.remove(v);
            rest.is_subset(&self.adj[v])
        })
    }

    /// Clique number; 0 for the 0-vertex graph.
    pub fn clique_number(&self) -> usize {
        fn grow(g: &Graph, size: usize, cand: VertexSet, best: &mut usize) {
            if cand.is_empty() {
                *best = (*best).max(size);
                return;
            }
            if size + cand.len() <= *best {
                return;
            }
            for v in cand.iter().collect::<Vec<_>>() {
                let mut next = cand.intersection(&g.adj[v]);
                next.retain_above(v);
                grow(g, size + 1, next, best);
            }
        }
        let mut best = 0;
        grow(self, 0, VertexSet::full(self.n), &mut best);
        best
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&GraphJson::from(self)).expect("graph serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: GraphJson = serde_json::from_str(text)?;
        let edges: Vec<_> = raw.edges.iter().map(|e| (e[0], e[1])).collect();
        Self::from_edges(raw.n, &edges)
    }

    /// Edge-list text: a `# n=<n>` header, then one `u v` line per edge.
    pub fn to_edge_list(&self) -> String {
        let mut out = format!("# n={}\n", self.n);
        for (u, v) in self.edges() {
            out.push_str(&format!("{u} {v}\n"));
        }
        out
    }

    pub fn from_edge_list(text: &str) -> Result<Self> {
        let mut n = None;
        let mut edges = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                if let Some(value) = rest.trim().strip_prefix("n=") {
                    n = Some(
                        value
                            .trim()
                            .parse::<usize>()
                            .map_err(|e| Error::Parse(format!("line {}: bad vertex count: {e}", lineno + 1)))?,
                    );
                }
                continue;
            }
            let mut parts = line.split_whitespace().map(str::parse::<usize>);
            match (parts.next(), parts.next(), parts.next()) {
                (Some(Ok(u)), Some(Ok(v)), None) => edges.push((u, v)),
                _ => return Err(Error::Parse(format!("line {}: expected `u v`", lineno + 1))),
            }
        }
        let n = n.ok_or_else(|| Error::Parse("missing `# n=<n>` header".into()))?;
        Self::from_edges(n, &edges)
    }
}

impl fmt::Debug for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Graph(n={}, edges={:?})", self.n, self.edges().collect::<Vec<_>>())
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GraphJson {
    n: usize,
    edges: Vec<[usize; 2]>,
}

impl From<&Graph> for GraphJson {
    fn from(g: &Graph) -> Self {
        GraphJson {
            n: g.n,
            edges: g.edges().map(|(u, v)| [u, v]).collect(),
        }
    }
}

/// Everything needed to reproduce one draw from `G(n, p)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SampleParams {
    pub n: usize,
    pub p: f64,
    pub seed: u64,
    pub stream: u64,
}

fn trial_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn check_probability(p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::Parameter(format!("edge probability {p} outside [0, 1]")))
    }
}

pub fn sample_graph(params: &SampleParams) -> Result<Graph> {
    check_probability(params.p)?;
    let mut g = Graph::empty(params.n)?;
    let mut rng = trial_rng(params.seed, params.stream);
    for u in 0..params.n {
        for v in u + 1..params.n {
            if rng.gen::<f64>() < params.p {
                g.add_edge(u, v);
            }
        }
    }
    Ok(g)
}

/// The per-pair uniforms of one trial, kept so that several edge
/// probabilities can be thresholded against the same draws.
#[derive(Clone, Debug)]
pub struct CoupledSample {
    n: usize,
    uniforms: Vec<f64>,
}

impl CoupledSample {
    pub fn draw(n: usize, seed: u64, stream: u64) -> Result<Self> {
        Graph::empty(n)?;
        let mut rng = trial_rng(seed, stream);
        let uniforms = (0..n * n.saturating_sub(1) / 2).map(|_| rng.gen::<f64>()).collect();
        Ok(CoupledSample { n, uniforms })
    }

    /// Identical to `sample_graph` with the same `(n, p, seed, stream)`.
    pub fn graph_at(&self, p: f64) -> Result<Graph> {
        check_probability(p)?;
        let mut g = Graph::empty(self.n)?;
        let mut k = 0;
        for u in 0..self.n {
            for v in u + 1..self.n {
                if self.uniforms[k] < p {
                    g.add_edge(u, v);
                }
                k += 1;
            }
        }
        Ok(g)
    }
}

/// Subgraph induced on `s`, relabeled `0..|s|` in ascending order of the original labels.
pub fn induced_subgraph(g: &Graph, s: &VertexSet) -> Graph {
    let members: Vec<usize> = s.iter().filter(|&v| v < g.n).collect();
    let mut h = Graph::empty(members.len()).expect("subgraph is no larger");
    for (a, &u) in members.iter().enumerate() {
        for (b, &v) in members.iter().enumerate().skip(a + 1) {
            if g.has_edge(u, v) {
                h.add_edge(a, b);
            }
        }
    }
    h
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Components {
    pub count: usize,
    /// Component id per vertex; ids are numbered by smallest member.
    pub labels: Vec<usize>,
}

pub fn connected_components(g: &Graph) -> Components {
    let mut uf = UnionFind::<usize>::new(g.n);
    for (u, v) in g.edges() {
        uf.union(u, v);
    }
    let mut id_of_root = vec![usize::MAX; g.n];
    let mut labels = vec![0; g.n];
    let mut count = 0;
    for (v, label) in labels.iter_mut().enumerate() {
        let root = uf.find_mut(v);
        if id_of_root[root] == usize::MAX {
            id_of_root[root] = count;
            count += 1;
        }
        *label = id_of_root[root];
    }
    Components { count, labels }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CycleCensus {
    /// Vertex set of the cycle of each unicyclic component, ordered by smallest vertex.
    /// Unspecified when `clean` is false.
    pub cycles: Vec<VertexSet>,
    /// Every component has at most one cycle.
    pub clean: bool,
}

pub fn cycle_census(g: &Graph) -> CycleCensus {
    let comps = connected_components(g);
    let mut verts = vec![0usize; comps.count];
    let mut edges = vec![0usize; comps.count];
    for v in 0..g.n {
        verts[comps.labels[v]] += 1;
    }
    for (u, _) in g.edges() {
        edges[comps.labels[u]] += 1;
    }
    if edges.iter().zip(&verts).any(|(e, v)| e > v) {
        return CycleCensus {
            cycles: Vec::new(),
            clean: false,
        };
    }

    // Peel leaves; what survives is the 2-core, which for a unicyclic
    // component is exactly its cycle.
    let mut degree: Vec<usize> = (0..g.n).map(|v| g.degree(v)).collect();
    let mut alive = vec![true; g.n];
    let mut stack: Vec<usize> = (0..g.n).filter(|&v| degree[v] <= 1).collect();
    while let Some(v) = stack.pop() {
        if !alive[v] {
            continue;
        }
        alive[v] = false;
        for w in g.adj[v].iter() {
            if alive[w] {
                degree[w] -= 1;
                if degree[w] == 1 {
                    stack.push(w);
                }
            }
        }
    }
    let mut by_comp: Vec<Option<VertexSet>> = vec![None; comps.count];
    for v in (0..g.n).filter(|&v| alive[v]) {
        by_comp[comps.labels[v]]
            .get_or_insert_with(|| VertexSet::new(g.n))
            .insert(v);
    }
    CycleCensus {
        cycles: by_comp.into_iter().flatten().collect(),
        clean: true,
    }
}

/// Cliques of `g` with cardinality `1..=d+1`; entry `k` holds the `(k+1)`-cliques,
/// each in ascending vertex order, the list sorted lexicographically.
pub fn cliques_up_to(g: &Graph, d: usize) -> Vec<Vec<Vec<usize>>> {
    let mut levels: Vec<Vec<Vec<usize>>> = Vec::new();
    let mut frontier: Vec<(Vec<usize>, VertexSet)> = (0..g.n)
        .map(|v| {
            let mut cand = g.adj[v].clone();
            cand.retain_above(v);
            (vec![v], cand)
        })
        .collect();
    for _ in 0..=d {
        if frontier.is_empty() {
            break;
        }
        let mut next = Vec::new();
        for (clique, cand) in &frontier {
            for w in cand.iter() {
                let mut c = clique.clone();
                c.push(w);
                let mut nc = cand.intersection(&g.adj[w]);
                nc.retain_above(w);
                next.push((c, nc));
            }
        }
        levels.push(frontier.into_iter().map(|(c, _)| c).collect());
        frontier = next;
    }
    levels
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::VecDeque;

    fn bfs_component_count(g: &Graph) -> usize {
        let mut seen = vec![false; g.n()];
        let mut count = 0;
        for s in 0..g.n() {
            if seen[s] {
                continue;
            }
            count += 1;
            seen[s] = true;
            let mut queue = VecDeque::from([s]);
            while let Some(v) = queue.pop_front() {
                for w in g.neighbors(v).iter() {
                    if !seen[w] {
                        seen[w] = true;
                        queue.push_back(w);
                    }
                }
            }
        }
        count
    }

    #[test]
    fn sampling_extremes() {
        let g = sample_graph(&SampleParams {
            n: 5,
            p: 0.0,
            seed: 42,
            stream: 0,
        })
        .unwrap();
        assert_eq!(g.edge_count(), 0);
        let g = sample_graph(&SampleParams {
            n: 5,
            p: 1.0,
            seed: 7,
            stream: 0,
        })
        .unwrap();
        assert_eq!(g.edge_count(), 10);
        assert!(sample_graph(&SampleParams {
            n: 5,
            p: 1.5,
            seed: 0,
            stream: 0
        })
        .is_err());
        assert!(sample_graph(&SampleParams {
            n: 5,
            p: -0.1,
            seed: 0,
            stream: 0
        })
        .is_err());
    }

    #[test]
    fn sampled_edge_count_matches_binomial() {
        let g = sample_graph(&SampleParams {
            n: 1000,
            p: 0.3,
            seed: 1,
            stream: 0,
        })
        .unwrap();
        let sigma = (499_500.0f64 * 0.3 * 0.7).sqrt();
        let dev = (g.edge_count() as f64 - 149_850.0).abs();
        assert!(dev < 4.0 * sigma, "edge count {} off by {dev}", g.edge_count());
    }

    #[test]
    fn sampling_is_deterministic_and_streams_differ() {
        let a = SampleParams {
            n: 30,
            p: 0.4,
            seed: 9,
            stream: 3,
        };
        assert_eq!(sample_graph(&a).unwrap(), sample_graph(&a).unwrap());
        let b = SampleParams { stream: 4, ..a };
        assert_ne!(sample_graph(&a).unwrap(), sample_graph(&b).unwrap());
    }

    #[test]
    fn coupled_sample_matches_direct_sampling_and_nests() {
        let cs = CoupledSample::draw(25, 5, 11).unwrap();
        let lo = cs.graph_at(0.2).unwrap();
        let hi = cs.graph_at(0.5).unwrap();
        assert_eq!(
            lo,
            sample_graph(&SampleParams {
                n: 25,
                p: 0.2,
                seed: 5,
                stream: 11
            })
            .unwrap()
        );
        assert!(lo.edges().all(|(u, v)| hi.has_edge(u, v)));
    }

    #[test]
    fn capacity_guard() {
        assert!(matches!(Graph::empty(MAX_VERTICES + 1), Err(Error::Capacity(_))));
    }

    #[test]
    fn induced_subgraph_examples() {
        let k5 = Graph::complete(5).unwrap();
        let h = induced_subgraph(&k5, &VertexSet::from_vertices(5, [0, 1, 2]));
        assert_eq!(h, Graph::complete(3).unwrap());

        let c4 = Graph::cycle(4).unwrap();
        let h = induced_subgraph(&c4, &VertexSet::from_vertices(4, [0, 1, 2]));
        assert_eq!(h, Graph::path(3).unwrap());

        let h = induced_subgraph(&c4, &VertexSet::new(4));
        assert_eq!(h.n(), 0);
    }

    #[test]
    fn component_examples() {
        assert_eq!(connected_components(&Graph::complete(5).unwrap()).count, 1);
        assert_eq!(connected_components(&Graph::empty(5).unwrap()).count, 5);
        let g = Graph::from_edges(5, &[(0, 1), (2, 3)]).unwrap();
        let c = connected_components(&g);
        assert_eq!(c.count, 3);
        assert_eq!(c.labels, vec![0, 0, 1, 1, 2]);
        assert_eq!(connected_components(&Graph::empty(0).unwrap()).count, 0);
    }

    #[test]
    fn union_find_agrees_with_bfs() {
        for stream in 0..1000 {
            let p = [0.05, 0.1, 0.2, 0.4][stream as usize % 4];
            let g = sample_graph(&SampleParams {
                n: 30,
                p,
                seed: 77,
                stream,
            })
            .unwrap();
            let c = connected_components(&g);
            assert_eq!(c.count, bfs_component_count(&g));
            for (u, v) in g.edges() {
                assert_eq!(c.labels[u], c.labels[v]);
            }
        }
    }

    #[test]
    fn cycle_census_examples() {
        let forest = Graph::from_edges(6, &[(0, 1), (1, 2), (3, 4)]).unwrap();
        assert_eq!(
            cycle_census(&forest),
            CycleCensus {
                cycles: vec![],
                clean: true
            }
        );

        let g = Graph::from_edges(5, &[(0, 1), (1, 2), (2, 3), (3, 0)]).unwrap();
        let c = cycle_census(&g);
        assert!(c.clean);
        assert_eq!(c.cycles, vec![VertexSet::from_vertices(5, [0, 1, 2, 3])]);

        // Pendant trees hanging off a cycle are peeled away.
        let g = Graph::from_edges(7, &[(0, 1), (1, 2), (2, 0), (2, 3), (3, 4), (5, 6)]).unwrap();
        let c = cycle_census(&g);
        assert!(c.clean);
        assert_eq!(c.cycles, vec![VertexSet::from_vertices(7, [0, 1, 2])]);

        assert!(!cycle_census(&Graph::complete(4).unwrap()).clean);
    }

    #[test]
    fn clique_enumeration_examples() {
        let k4 = cliques_up_to(&Graph::complete(4).unwrap(), 3);
        assert_eq!(k4.iter().map(Vec::len).collect::<Vec<_>>(), vec![4, 6, 4, 1]);

        let c4 = cliques_up_to(&Graph::cycle(4).unwrap(), 2);
        assert_eq!(c4.iter().map(Vec::len).collect::<Vec<_>>(), vec![4, 4]);

        // Octahedron: complement of a perfect matching on 6 vertices.
        let mut oct = Graph::complete(6).unwrap();
        oct = Graph::from_edges(
            6,
            &oct.edges()
                .filter(|&(u, v)| !(u % 2 == 0 && v == u + 1))
                .collect::<Vec<_>>(),
        )
        .unwrap();
        let o = cliques_up_to(&oct, 3);
        assert_eq!(o.iter().map(Vec::len).collect::<Vec<_>>(), vec![6, 12, 8]);
    }

    #[test]
    fn cliques_are_sorted_and_closed_under_subsets() {
        for stream in 0..50 {
            let g = sample_graph(&SampleParams {
                n: 12,
                p: 0.5,
                seed: 3,
                stream,
            })
            .unwrap();
            let levels = cliques_up_to(&g, 6);
            for (k, level) in levels.iter().enumerate() {
                assert!(level.windows(2).all(|w| w[0] < w[1]));
                for face in level {
                    assert_eq!(face.len(), k + 1);
                    assert!(face.windows(2).all(|w| w[0] < w[1]));
                    if k > 0 {
                        for skip in 0..face.len() {
                            let sub: Vec<_> = face
                                .iter()
                                .enumerate()
                                .filter(|&(i, _)| i != skip)
                                .map(|(_, &v)| v)
                                .collect();
                            assert!(levels[k - 1].binary_search(&sub).is_ok());
                        }
                    }
                }
            }
            // Brute force over all subsets for the clique counts.
            let mut counts = [0usize; 13];
            for mask in 1u64..1 << 12 {
                let s = VertexSet::from_mask(12, mask);
                if g.is_clique(&s) {
                    counts[s.len()] += 1;
                }
            }
            for (k, level) in levels.iter().enumerate() {
                assert_eq!(level.len(), counts[k + 1]);
            }
            assert_eq!(g.clique_number(), levels.len());
        }
    }

    #[test]
    fn serialization_formats() {
        let g = Graph::from_edges(5, &[(3, 1), (0, 4)]).unwrap();
        assert_eq!(g.to_json(), r#"{"n":5,"edges":[[0,4],[1,3]]}"#);
        assert_eq!(g.to_edge_list(), "# n=5\n0 4\n1 3\n");
        assert_eq!(Graph::from_json(&g.to_json()).unwrap(), g);
        assert_eq!(Graph::from_edge_list(&g.to_edge_list()).unwrap(), g);
        assert!(Graph::from_json(r#"{"n":2,"edges":[[0,2]]}"#).is_err());
        assert!(Graph::from_json(r#"{"n":2,"edges":[],"extra":1}"#).is_err());
        assert!(Graph::from_edge_list("0 1\n").is_err());
    }

    proptest::proptest! {
        #[test]
        fn induced_subgraphs_are_monotone(code in 0u64..(1 << 21), a in 0u64..128, b in 0u64..128) {
            let g = Graph::from_edge_code(7, code);
            let s = VertexSet::from_mask(7, a & b);
            let t = VertexSet::from_mask(7, a);
            let gs = induced_subgraph(&g, &s);
            let gt = induced_subgraph(&g, &t);
            let s_members: Vec<_> = s.iter().collect();
            let t_members: Vec<_> = t.iter().collect();
            for (x, y) in gs.edges() {
                let (u, v) = (s_members[x], s_members[y]);
                let xt = t_members.binary_search(&u).unwrap();
                let yt = t_members.binary_search(&v).unwrap();
                proptest::prop_assert!(gt.has_edge(xt, yt));
            }
        }

        #[test]
        fn edge_list_round_trip(code in 0u64..(1 << 21)) {
            let g = Graph::from_edge_code(7, code);
            proptest::prop_assert_eq!(Graph::from_edge_list(&g.to_edge_list()).unwrap(), g.clone());
            proptest::prop_assert_eq!(Graph::from_json(&g.to_json()).unwrap(), g);
        }
    }
}

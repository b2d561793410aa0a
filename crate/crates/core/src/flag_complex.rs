//! Clique (flag) complexes, vertex and face links, and the cross-polytope
//! boundaries ♦_s.

use crate::error::{Error, Result};
use crate::graph::{cliques_up_to, induced_subgraph, Graph, VertexSet};

/// Past this many vertices the default build caps faces at [`DEFAULT_DIM_CAP`].
pub const UNCAPPED_VERTEX_LIMIT: usize = 24;
pub const DEFAULT_DIM_CAP: usize = 12;

/// The clique complex of a graph. Faces are grouped by dimension starting at
/// the empty face (dimension -1); each face is a sorted vertex list and each
/// dimension's list is sorted lexicographically.
#[derive(Clone, Debug)]
pub struct FlagComplex {
    skeleton: Graph,
    faces: Vec<Vec<Vec<usize>>>,
    capped_at: Option<usize>,
}

impl FlagComplex {
    /// Builds with the default cap policy: exact below [`UNCAPPED_VERTEX_LIMIT`]
    /// vertices, faces up to dimension [`DEFAULT_DIM_CAP`] beyond.
    pub fn new(g: &Graph) -> Self {
        let cap = (g.n() > UNCAPPED_VERTEX_LIMIT).then_some(DEFAULT_DIM_CAP);
        Self::build(g, cap)
    }

    /// Builds with an explicit dimension cap (`None` enumerates every clique).
    pub fn build(g: &Graph, max_dim: Option<usize>) -> Self {
        let mut levels = match max_dim {
            Some(cap) => cliques_up_to(g, cap + 1),
            None => cliques_up_to(g, g.n()),
        };
        let mut capped_at = None;
        if let Some(cap) = max_dim {
            if levels.len() > cap + 1 {
                levels.truncate(cap + 1);
                capped_at = Some(cap);
            }
        }
        let mut faces = Vec::with_capacity(levels.len() + 1);
        faces.push(vec![Vec::new()]);
        faces.extend(levels);
        let c = FlagComplex {
            skeleton: g.clone(),
            faces,
            capped_at,
        };
        #[cfg(debug_assertions)]
        c.check_closed();
        c
    }

    #[cfg(debug_assertions)]
    fn check_closed(&self) {
        for k in 1..self.faces.len() {
            for face in &self.faces[k] {
                for skip in 0..face.len() {
                    let mut sub = face.clone();
                    sub.remove(skip);
                    debug_assert!(self.faces[k - 1].binary_search(&sub).is_ok());
                }
            }
        }
    }

    pub fn skeleton(&self) -> &Graph {
        &self.skeleton
    }

    /// Largest dimension with a face; -1 when only the empty face exists.
    pub fn dim(&self) -> isize {
        self.faces.len() as isize - 2
    }

    pub fn is_capped(&self) -> bool {
        self.capped_at.is_some()
    }

    pub fn capped_at(&self) -> Option<usize> {
        self.capped_at
    }

    /// Faces of dimension `k` (`k >= -1`).
    pub fn faces(&self, k: isize) -> &[Vec<usize>] {
        usize::try_from(k + 1)
            .ok()
            .and_then(|i| self.faces.get(i))
            .map_or(&[], Vec::as_slice)
    }

    /// `f_k` for `k = -1 ..= dim`.
    pub fn f_vector(&self) -> Vec<usize> {
        self.faces.iter().map(Vec::len).collect()
    }
}

/// 1-skeleton of ♦_s: antipodal pairs `{2k, 2k+1}` for `k = 0..=s`, all other pairs joined.
pub fn diamond(s: usize) -> Graph {
    let n = 2 * s + 2;
    let edges: Vec<_> = (0..n)
        .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
        .filter(|&(u, v)| u / 2 != v / 2)
        .collect();
    Graph::from_edges(n, &edges).expect("diamond vertices are in range")
}

/// Link of a vertex: the subgraph induced on its neighbours.
pub fn link(g: &Graph, v: usize) -> Result<Graph> {
    if v >= g.n() {
        return Err(Error::Parameter(format!("vertex {v} outside [0,{})", g.n())));
    }
    Ok(induced_subgraph(g, g.neighbors(v)))
}

/// Link of a face: the subgraph induced on the common neighbourhood of `f`.
pub fn link_of_face(g: &Graph, f: &VertexSet) -> Result<Graph> {
    if f.iter().any(|v| v >= g.n()) {
        return Err(Error::Parameter("face has a vertex outside the graph".into()));
    }
    if !g.is_clique(f) {
        return Err(Error::Parameter(format!("{f:?} is not a clique")));
    }
    let mut common = VertexSet::full(g.n());
    for v in f.iter() {
        common.intersect_with(g.neighbors(v));
    }
    Ok(induced_subgraph(g, &common))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn build_examples() {
        let tri = FlagComplex::new(&Graph::cycle(3).unwrap());
        assert_eq!(tri.f_vector(), vec![1, 3, 3, 1]);
        assert_eq!(tri.dim(), 2);

        let c4 = FlagComplex::new(&Graph::cycle(4).unwrap());
        assert_eq!(c4.dim(), 1);
        assert!(c4.faces(2).is_empty());

        let oct = FlagComplex::new(&diamond(2));
        assert_eq!(oct.f_vector(), vec![1, 6, 12, 8]);
        assert_eq!(oct.dim(), 2);

        let void = FlagComplex::new(&Graph::empty(0).unwrap());
        assert_eq!(void.dim(), -1);
        assert_eq!(void.faces(-1), &[Vec::<usize>::new()]);
        assert_eq!(FlagComplex::new(&Graph::empty(3).unwrap()).dim(), 0);
    }

    #[test]
    fn caps_are_flagged_only_when_binding() {
        let k6 = Graph::complete(6).unwrap();
        let capped = FlagComplex::build(&k6, Some(2));
        assert!(capped.is_capped());
        assert_eq!(capped.dim(), 2);
        let loose = FlagComplex::build(&k6, Some(5));
        assert!(!loose.is_capped());
        assert_eq!(loose.dim(), 5);

        // A 14-clique among 30 vertices trips the default cap.
        let edges: Vec<_> = (0..14).flat_map(|u| (u + 1..14).map(move |v| (u, v))).collect();
        let big = Graph::from_edges(30, &edges).unwrap();
        let c = FlagComplex::new(&big);
        assert_eq!(c.capped_at(), Some(DEFAULT_DIM_CAP));
    }

    #[test]
    fn diamond_examples() {
        assert_eq!((diamond(0).n(), diamond(0).edge_count()), (2, 0));
        assert_eq!(
            diamond(1),
            Graph::from_edges(4, &[(0, 2), (0, 3), (1, 2), (1, 3)]).unwrap()
        );
        assert_eq!(diamond(1).edge_count(), 4);
        assert_eq!((diamond(2).n(), diamond(2).edge_count()), (6, 12));
        for s in 0..6 {
            let d = diamond(s);
            assert_eq!(d.edge_count(), 2 * s * (s + 1));
            assert!((0..d.n()).all(|v| d.degree(v) == 2 * s));
        }
    }

    #[test]
    fn link_examples() {
        let k4 = Graph::complete(4).unwrap();
        assert_eq!(link(&k4, 0).unwrap(), Graph::complete(3).unwrap());
        let oct = diamond(2);
        for v in 0..6 {
            let l = link(&oct, v).unwrap();
            assert_eq!(l.n(), 4);
            assert_eq!(l.edge_count(), 4);
            assert!((0..4).all(|w| l.degree(w) == 2));
        }
        assert_eq!(link(&Graph::empty(3).unwrap(), 1).unwrap().n(), 0);
        assert!(link(&k4, 4).is_err());
    }

    #[test]
    fn face_link_examples() {
        let k4 = Graph::complete(4).unwrap();
        let l = link_of_face(&k4, &VertexSet::from_vertices(4, [0, 1])).unwrap();
        assert_eq!(l, Graph::complete(2).unwrap());

        let c4 = Graph::cycle(4).unwrap();
        let l = link_of_face(&c4, &VertexSet::from_vertices(4, [0])).unwrap();
        assert_eq!(l, Graph::empty(2).unwrap());

        assert_eq!(link_of_face(&c4, &VertexSet::new(4)).unwrap(), c4);
        assert!(link_of_face(&c4, &VertexSet::from_vertices(4, [0, 2])).is_err());
    }
}

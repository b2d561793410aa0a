//! Exact subgraph counters and their closed-form expectations under `G(n, p)`.

use num_bigint::{BigInt, BigUint};
use num_integer::binomial;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::graph::{Graph, VertexSet};

/// Largest subgraph size [`count_dense_subgraphs`] will enumerate.
pub const DENSE_SUBGRAPH_LIMIT: usize = 12;

/// Number of ♦_s configurations: sets of `s+1` disjoint non-adjacent pairs whose
/// cross pairs are all edges.
pub fn count_diamonds(g: &Graph, s: usize) -> u64 {
    fn extend(g: &Graph, pairs_left: usize, cand: &VertexSet) -> u64 {
        if pairs_left == 0 {
            return 1;
        }
        if cand.len() < 2 * pairs_left {
            return 0;
        }
        let mut total = 0;
        // Pairs are listed by their smaller vertex, so later pairs live above `a`.
        for a in cand.iter() {
            let mut above = cand.clone();
            above.retain_above(a);
            let mut partners = above.clone();
            partners.difference_with(g.neighbors(a));
            let common_a = above.intersection(g.neighbors(a));
            for b in partners.iter() {
                total += extend(g, pairs_left - 1, &common_a.intersection(g.neighbors(b)));
            }
        }
        total
    }
    extend(g, s + 1, &VertexSet::full(g.n()))
}

/// `n! / ((n-2s-2)! 2^{s+1} (s+1)!)`: the number of ways to choose `s+1` disjoint unordered pairs.
pub fn diamond_configurations(n: usize, s: usize) -> BigUint {
    let m = 2 * s + 2;
    if n < m {
        return BigUint::zero();
    }
    let falling: BigUint = ((n - m + 1)..=n).map(BigUint::from).product();
    let pairs = BigUint::from(2u32).pow((s + 1) as u32);
    let order: BigUint = (1..=s + 1).map(BigUint::from).product();
    falling / (pairs * order)
}

fn check_rational_probability(p: &BigRational) -> Result<()> {
    if p < &BigRational::zero() || p > &BigRational::one() {
        return Err(Error::Parameter(format!("edge probability {p} outside [0, 1]")));
    }
    Ok(())
}

/// `E[X_s] = #configs · p^{2s(s+1)} (1-p)^{s+1}`, exactly.
pub fn expected_diamond_count(n: usize, p: &BigRational, s: usize) -> Result<BigRational> {
    check_rational_probability(p)?;
    let configs = BigRational::from_integer(BigInt::from(diamond_configurations(n, s)));
    let q = BigRational::one() - p;
    Ok(configs * pow(p, 2 * s * (s + 1)) * pow(&q, s + 1))
}

/// Float form of [`expected_diamond_count`] for probabilities such as `n^{-a}`.
pub fn expected_diamond_count_f64(n: usize, p: f64, s: usize) -> f64 {
    let configs = diamond_configurations(n, s).to_f64().unwrap_or(f64::INFINITY);
    configs * p.powi((2 * s * (s + 1)) as i32) * (1.0 - p).powi((s + 1) as i32)
}

/// `C(n, k) · p^{C(k, 2)}`.
pub fn expected_clique_count(n: usize, p: &BigRational, k: usize) -> Result<BigRational> {
    check_rational_probability(p)?;
    if k == 0 {
        return Err(Error::Parameter("clique size must be at least 1".into()));
    }
    let ways = if k > n {
        BigUint::zero()
    } else {
        binomial(BigUint::from(n), BigUint::from(k))
    };
    Ok(BigRational::from_integer(BigInt::from(ways)) * pow(p, k * (k - 1) / 2))
}

fn pow(x: &BigRational, e: usize) -> BigRational {
    (0..e).fold(BigRational::one(), |acc, _| acc * x)
}

/// Vertex subsets `K` with `2s+2 <= |K| = m <= v` inducing at least `m·s` edges.
pub fn count_dense_subgraphs(g: &Graph, v: usize, s: usize) -> Result<u64> {
    let mut count = 0;
    for_each_dense_subgraph(g, v, s, |_| count += 1)?;
    Ok(count)
}

/// Visits every subset counted by [`count_dense_subgraphs`], smallest vertex first.
pub fn for_each_dense_subgraph(g: &Graph, v: usize, s: usize, mut visit: impl FnMut(&[usize])) -> Result<()> {
    if v > g.n() {
        return Err(Error::Parameter(format!(
            "subgraph size {v} exceeds {} vertices",
            g.n()
        )));
    }
    if v > DENSE_SUBGRAPH_LIMIT {
        return Err(Error::Capacity(format!(
            "dense-subgraph enumeration is limited to {DENSE_SUBGRAPH_LIMIT} vertices, got {v}"
        )));
    }
    let lo = 2 * s + 2;
    if v < lo {
        return Ok(());
    }
    // Degrees capped at v-1, largest first: the best any r new vertices can add.
    let mut caps: Vec<usize> = (0..g.n()).map(|u| g.degree(u).min(v - 1)).collect();
    caps.sort_unstable_by(|a, b| b.cmp(a));
    let mut best_gain = vec![0usize; v + 1];
    for r in 1..=v {
        best_gain[r] = best_gain[r - 1] + caps.get(r - 1).copied().unwrap_or(0);
    }

    struct Search<'a, F> {
        g: &'a Graph,
        v: usize,
        s: usize,
        lo: usize,
        best_gain: Vec<usize>,
        chosen: Vec<usize>,
        visit: F,
    }
    impl<F: FnMut(&[usize])> Search<'_, F> {
        fn feasible(&self, edges: usize) -> bool {
            let size = self.chosen.len();
            (size.max(self.lo)..=self.v).any(|m| edges + self.best_gain[m - size] >= m * self.s)
        }

        fn grow(&mut self, next: usize, edges: usize) {
            let size = self.chosen.len();
            if size >= self.lo && edges >= size * self.s {
                (self.visit)(&self.chosen);
            }
            if size == self.v || !self.feasible(edges) {
                return;
            }
            for u in next..self.g.n() {
                let added = self.chosen.iter().filter(|&&w| self.g.has_edge(u, w)).count();
                self.chosen.push(u);
                self.grow(u + 1, edges + added);
                self.chosen.pop();
            }
        }
    }
    let mut search = Search {
        g,
        v,
        s,
        lo,
        best_gain,
        chosen: Vec::with_capacity(v),
        visit: &mut visit,
    };
    search.grow(0, 0);
    Ok(())
}

/// Sample mean, unbiased variance, and `var / mean²` with a jackknife standard error.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct VarianceRatio {
    pub mean: f64,
    pub variance: f64,
    pub ratio: f64,
    /// `None` when fewer than three samples or a leave-one-out mean vanishes.
    pub ratio_se: Option<f64>,
}

pub fn variance_ratio_estimate(samples: &[f64]) -> Result<VarianceRatio> {
    let m = samples.len();
    if m < 2 {
        return Err(Error::Parameter(format!("need at least 2 samples, got {m}")));
    }
    let mf = m as f64;
    let mean = samples.iter().sum::<f64>() / mf;
    let ss: f64 = samples.iter().map(|x| (x - mean).powi(2)).sum();
    let variance = ss / (mf - 1.0);
    if mean == 0.0 {
        return Err(Error::ZeroMean);
    }
    let ratio = variance / (mean * mean);

    let ratio_se = (m >= 3)
        .then(|| {
            let loo: Option<Vec<f64>> = samples
                .iter()
                .map(|x| {
                    let d = x - mean;
                    let mean_i = mean - d / (mf - 1.0);
                    let var_i = (ss - d * d * mf / (mf - 1.0)) / (mf - 2.0);
                    (mean_i != 0.0).then(|| var_i / (mean_i * mean_i))
                })
                .collect();
            loo.map(|loo| {
                let avg = loo.iter().sum::<f64>() / mf;
                ((mf - 1.0) / mf * loo.iter().map(|t| (t - avg).powi(2)).sum::<f64>()).sqrt()
            })
        })
        .flatten();
    Ok(VarianceRatio {
        mean,
        variance,
        ratio,
        ratio_se,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::betti::betti_table;
    use crate::flag_complex::diamond;
    use crate::graph::{sample_graph, SampleParams};
    use crate::homology::FieldChar;
    use num_traits::FromPrimitive;

    fn rat(a: i64, b: i64) -> BigRational {
        BigRational::new(a.into(), b.into())
    }

    /// Every (2s+2)-subset, every perfect matching on it.
    fn brute_force_diamonds(g: &Graph, s: usize) -> u64 {
        fn matchings(vs: &[usize]) -> Vec<Vec<(usize, usize)>> {
            if vs.is_empty() {
                return vec![vec![]];
            }
            let mut out = Vec::new();
            for k in 1..vs.len() {
                let rest: Vec<_> = vs[1..]
                    .iter()
                    .enumerate()
                    .filter(|&(i, _)| i + 1 != k)
                    .map(|(_, &v)| v)
                    .collect();
                for mut m in matchings(&rest) {
                    m.push((vs[0], vs[k]));
                    out.push(m);
                }
            }
            out
        }
        let n = g.n();
        let m = 2 * s + 2;
        let mut count = 0;
        for mask in 0u64..1 << n {
            if mask.count_ones() as usize != m {
                continue;
            }
            let vs: Vec<usize> = (0..n).filter(|&v| mask >> v & 1 == 1).collect();
            for matching in matchings(&vs) {
                let partner = |v: usize| {
                    matching.iter().find_map(|&(a, b)| {
                        if a == v {
                            Some(b)
                        } else if b == v {
                            Some(a)
                        } else {
                            None
                        }
                    })
                };
                let ok = vs.iter().all(|&u| {
                    vs.iter()
                        .all(|&w| u == w || g.has_edge(u, w) != (partner(u) == Some(w)))
                });
                if ok {
                    count += 1;
                }
            }
        }
        count
    }

    fn brute_force_dense(g: &Graph, v: usize, s: usize) -> u64 {
        let n = g.n();
        (0u64..1 << n)
            .filter(|&mask| {
                let m = mask.count_ones() as usize;
                if m < 2 * s + 2 || m > v {
                    return false;
                }
                let edges = g
                    .edges()
                    .filter(|&(a, b)| mask >> a & 1 == 1 && mask >> b & 1 == 1)
                    .count();
                edges >= m * s
            })
            .count() as u64
    }

    #[test]
    fn diamond_count_examples() {
        assert_eq!(count_diamonds(&Graph::cycle(4).unwrap(), 1), 1);
        assert_eq!(count_diamonds(&diamond(2), 1), 3);
        assert_eq!(count_diamonds(&diamond(2), 2), 1);
        assert_eq!(count_diamonds(&Graph::complete(4).unwrap(), 1), 0);
        for s in 0..=3 {
            assert_eq!(count_diamonds(&diamond(s), s), 1);
        }
        assert_eq!(count_diamonds(&Graph::empty(5).unwrap(), 0), 10);
    }

    #[test]
    fn diamond_count_matches_brute_force() {
        for stream in 0..120 {
            let p = [0.3, 0.5, 0.7, 0.85][stream as usize % 4];
            let g = sample_graph(&SampleParams {
                n: 9,
                p,
                seed: 5,
                stream,
            })
            .unwrap();
            for s in 0..=2 {
                assert_eq!(count_diamonds(&g, s), brute_force_diamonds(&g, s), "s={s} {g:?}");
            }
        }
    }

    #[test]
    fn expected_diamond_examples() {
        assert_eq!(expected_diamond_count(4, &rat(1, 2), 1).unwrap(), rat(3, 64));
        assert_eq!(expected_diamond_count(10, &rat(0, 1), 1).unwrap(), rat(0, 1));
        assert_eq!(expected_diamond_count(3, &rat(1, 3), 1).unwrap(), rat(0, 1));
        assert!(expected_diamond_count(5, &rat(3, 2), 1).is_err());
        assert_eq!(diamond_configurations(6, 2), BigUint::from(15u32));
        assert_eq!(diamond_configurations(4, 1), BigUint::from(3u32));
        let exact = expected_diamond_count(40, &rat(1, 4), 1).unwrap().to_f64().unwrap();
        assert!((exact - expected_diamond_count_f64(40, 0.25, 1)).abs() < 1e-9 * exact);
    }

    #[test]
    fn expected_diamond_count_monte_carlo() {
        // n = 8 so configurations are few and the mean is well resolved.
        let trials = 4000;
        let samples: Vec<f64> = (0..trials)
            .map(|stream| {
                let g = sample_graph(&SampleParams {
                    n: 8,
                    p: 0.5,
                    seed: 2,
                    stream,
                })
                .unwrap();
                count_diamonds(&g, 1) as f64
            })
            .collect();
        let est = variance_ratio_estimate(&samples).unwrap();
        let se = (est.variance / trials as f64).sqrt();
        let expected = expected_diamond_count_f64(8, 0.5, 1);
        assert!((est.mean - expected).abs() < 4.0 * se, "{} vs {expected}", est.mean);
    }

    #[test]
    fn expected_clique_examples() {
        assert_eq!(expected_clique_count(6, &rat(1, 1), 2).unwrap(), rat(15, 1));
        assert_eq!(expected_clique_count(4, &rat(1, 2), 3).unwrap(), rat(1, 2));
        assert_eq!(expected_clique_count(9, &rat(0, 1), 3).unwrap(), rat(0, 1));
        assert!(expected_clique_count(9, &rat(1, 2), 0).is_err());

        let trials = 4000u64;
        let total: usize = (0..trials)
            .map(|stream| {
                let g = sample_graph(&SampleParams {
                    n: 4,
                    p: 0.5,
                    seed: 13,
                    stream,
                })
                .unwrap();
                crate::graph::cliques_up_to(&g, 2).get(2).map_or(0, Vec::len)
            })
            .sum();
        let mean = total as f64 / trials as f64;
        // Triangle count on 4 vertices: variance well under 1, so 0.05 is > 4 SE.
        assert!((mean - 0.5).abs() < 0.05, "{mean}");
    }

    #[test]
    fn dense_subgraph_examples() {
        assert_eq!(count_dense_subgraphs(&Graph::complete(4).unwrap(), 4, 1).unwrap(), 1);
        assert_eq!(count_dense_subgraphs(&Graph::cycle(4).unwrap(), 4, 1).unwrap(), 1);
        assert_eq!(count_dense_subgraphs(&Graph::empty(8).unwrap(), 8, 1).unwrap(), 0);
        assert!(count_dense_subgraphs(&Graph::empty(3).unwrap(), 4, 1).is_err());
        assert!(matches!(
            count_dense_subgraphs(&Graph::empty(14).unwrap(), 13, 1),
            Err(Error::Capacity(_))
        ));
    }

    #[test]
    fn dense_subgraphs_match_brute_force_and_are_monotone() {
        for stream in 0..60 {
            let p = [0.2, 0.4, 0.6][stream as usize % 3];
            let g = sample_graph(&SampleParams {
                n: 11,
                p,
                seed: 17,
                stream,
            })
            .unwrap();
            for s in 1..=2 {
                let mut prev = 0;
                for v in 2 * s + 2..=11 {
                    let c = count_dense_subgraphs(&g, v, s).unwrap();
                    assert_eq!(c, brute_force_dense(&g, v, s));
                    assert!(c >= prev);
                    prev = c;
                }
            }
            for v in 4..=11 {
                assert!(count_dense_subgraphs(&g, v, 1).unwrap() >= count_dense_subgraphs(&g, v, 2).unwrap());
            }
        }
    }

    #[test]
    fn nonzero_betti_forces_dense_subgraph() {
        let field = FieldChar::TWO;
        for stream in 0..150 {
            let n = 5 + stream as usize % 4;
            let p = [0.3, 0.5, 0.7][stream as usize % 3];
            let g = sample_graph(&SampleParams { n, p, seed: 23, stream }).unwrap();
            let t = betti_table(&g, field).unwrap();
            for ((i, v), _) in t.entries() {
                if v >= i + 2 && v <= DENSE_SUBGRAPH_LIMIT {
                    let s = v - i - 1;
                    assert!(count_dense_subgraphs(&g, v, s).unwrap() >= 1, "{g:?} β_{i},{v}");
                }
            }
        }
    }

    #[test]
    fn variance_ratio_examples() {
        let r = variance_ratio_estimate(&[3.0, 3.0, 3.0]).unwrap();
        assert_eq!((r.mean, r.variance, r.ratio), (3.0, 0.0, 0.0));
        let r = variance_ratio_estimate(&[0.0, 2.0]).unwrap();
        assert_eq!((r.mean, r.variance, r.ratio), (1.0, 2.0, 2.0));
        assert!(r.ratio_se.is_none());
        assert!(matches!(variance_ratio_estimate(&[0.0, 0.0]), Err(Error::ZeroMean)));
        assert!(variance_ratio_estimate(&[1.0]).is_err());
    }

    #[test]
    fn jackknife_matches_explicit_leave_one_out() {
        let xs = [1.0, 4.0, 2.0, 7.0, 3.0, 3.0];
        let r = variance_ratio_estimate(&xs).unwrap();
        let loo: Vec<f64> = (0..xs.len())
            .map(|k| {
                let rest: Vec<f64> = xs
                    .iter()
                    .enumerate()
                    .filter(|&(i, _)| i != k)
                    .map(|(_, &x)| x)
                    .collect();
                variance_ratio_estimate(&rest).unwrap().ratio
            })
            .collect();
        let m = xs.len() as f64;
        let avg = loo.iter().sum::<f64>() / m;
        let se = ((m - 1.0) / m * loo.iter().map(|t| (t - avg).powi(2)).sum::<f64>()).sqrt();
        assert!((r.ratio_se.unwrap() - se).abs() < 1e-12);
        assert!(BigRational::from_f64(r.ratio).is_some());
    }
}

use std::collections::HashMap;

use super::Alignment;
use crate::error::{Error, Result};
use crate::hypergraph::{dissimilarity, NodeId, NodeRelabeling, WeightedHypergraph};

pub const DEFAULT_MAX_NODES: usize = 8;

/// Exhaustive minimization of `d(φ(h1), h2)` over all bijections. Among
/// minimizers the lexicographically smallest mapping wins.
pub fn align_exact(h1: &WeightedHypergraph, h2: &WeightedHypergraph, max_nodes: usize) -> Result<Alignment> {
    let v1: Vec<NodeId> = h1.nodes().into_iter().collect();
    let v2: Vec<NodeId> = h2.nodes().into_iter().collect();
    if v1.len() != v2.len() {
        return Err(Error::SizeMismatch(v1.len(), v2.len()));
    }
    let n = v1.len();
    if n > max_nodes {
        return Err(Error::TooLarge(n, max_nodes));
    }
    if n > DEFAULT_MAX_NODES {
        log::warn!("exhaustive alignment over {n}! bijections");
    }

    let index1: HashMap<&NodeId, usize> = v1.iter().enumerate().map(|(i, v)| (v, i)).collect();
    let index2: HashMap<&NodeId, usize> = v2.iter().enumerate().map(|(i, v)| (v, i)).collect();
    let edges1: Vec<(Vec<usize>, f64)> =
        h1.edges().map(|(e, w)| (e.nodes().iter().map(|v| index1[v]).collect(), w)).collect();
    let edges2: HashMap<Vec<usize>, f64> = h2
        .edges()
        .map(|(e, w)| {
            let mut idx: Vec<usize> = e.nodes().iter().map(|v| index2[v]).collect();
            idx.sort_unstable();
            (idx, w)
        })
        .collect();
    let total2: f64 = edges2.values().sum();

    let mut perm: Vec<usize> = (0..n).collect();
    let mut best: Option<(f64, Vec<usize>)> = None;
    let mut scratch = Vec::new();
    loop {
        // Σ_{E1} |w1 − w2| + Σ_{E2 unmatched} w2
        let mut cost = total2;
        for (nodes, w1) in &edges1 {
            scratch.clear();
            scratch.extend(nodes.iter().map(|&i| perm[i]));
            scratch.sort_unstable();
            match edges2.get(&scratch) {
                Some(w2) => cost += (w1 - w2).abs() - w2,
                None => cost += w1,
            }
        }
        if best.as_ref().is_none_or(|(b, _)| cost < b - 1e-12) {
            best = Some((cost, perm.clone()));
        }
        if !next_permutation(&mut perm) {
            break;
        }
    }

    let (_, perm) = best.expect("at least one permutation");
    let mapping = NodeRelabeling::new(perm.iter().enumerate().map(|(i, &j)| (v1[i].clone(), v2[j].clone())))?;
    let cost = dissimilarity(&h1.relabel(&mapping)?, h2);
    Ok(Alignment { mapping, cost })
}

/// Advances to the next permutation in lexicographic order.
fn next_permutation(p: &mut [usize]) -> bool {
    if p.len() < 2 {
        return false;
    }
    let mut i = p.len() - 1;
    while i > 0 && p[i - 1] >= p[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = p.len() - 1;
    while p[j] <= p[i - 1] {
        j -= 1;
    }
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{assign_weights, chain, frucht, star};

    fn relabeling(pairs: &[(usize, usize)]) -> NodeRelabeling {
        NodeRelabeling::new(pairs.iter().map(|&(a, b)| (NodeId::from(a), NodeId::from(b)))).unwrap()
    }

    #[test]
    fn permutations_in_order() {
        let mut p = vec![0, 1, 2];
        let mut seen = vec![p.clone()];
        while next_permutation(&mut p) {
            seen.push(p.clone());
        }
        assert_eq!(seen.len(), 6);
        assert_eq!(seen[1], vec![0, 2, 1]);
        assert_eq!(seen[5], vec![2, 1, 0]);
    }

    #[test]
    fn recovers_a_relabeling() {
        let h1 = assign_weights(&chain(5).unwrap(), 1.0, 10.0, 2).unwrap();
        let phi = relabeling(&[(0, 3), (1, 0), (2, 4), (3, 1), (4, 2)]);
        let h2 = h1.relabel(&phi).unwrap();
        let a = align_exact(&h1, &h2, DEFAULT_MAX_NODES).unwrap();
        assert_eq!(a.cost, 0.0);
        assert_eq!(dissimilarity(&h1.relabel(&a.mapping).unwrap(), &h2), 0.0);
    }

    #[test]
    fn asymmetric_graph_aligns_to_identity() {
        // weighted path with distinct end weights has no automorphism
        let h = WeightedHypergraph::from_edges([
            (crate::Hyperedge::of(&[0, 1]), 0.5),
            (crate::Hyperedge::of(&[1, 2]), 0.3),
            (crate::Hyperedge::of(&[2, 3]), 0.2),
        ])
        .unwrap();
        let a = align_exact(&h, &h, DEFAULT_MAX_NODES).unwrap();
        assert_eq!(a.mapping, NodeRelabeling::identity(h.nodes().iter()));
    }

    #[test]
    fn errors() {
        let a = star(4).unwrap();
        let b = star(5).unwrap();
        assert_eq!(align_exact(&a, &b, 8), Err(Error::SizeMismatch(4, 5)));
        let f = frucht();
        assert_eq!(align_exact(&f, &f, 8), Err(Error::TooLarge(12, 8)));
    }
}

use std::collections::HashMap;

use crate::hypergraph::SimpleGraph;

/// Vertex colouring with dense colour ids `0..k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Coloring {
    colors: Vec<u32>,
}

impl Coloring {
    /// Renumbers arbitrary labels densely in order of first occurrence.
    pub fn from_labels<T: std::hash::Hash + Eq>(labels: impl IntoIterator<Item = T>) -> Self {
        let mut ids: HashMap<T, u32> = HashMap::new();
        let colors = labels
            .into_iter()
            .map(|l| {
                let next = ids.len() as u32;
                *ids.entry(l).or_insert(next)
            })
            .collect();
        Coloring { colors }
    }

    pub fn uniform(n: usize) -> Self {
        Coloring { colors: vec![0; n] }
    }

    pub fn colors(&self) -> &[u32] {
        &self.colors
    }

    pub fn color(&self, v: usize) -> u32 {
        self.colors[v]
    }

    pub fn len(&self) -> usize {
        self.colors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.colors.is_empty()
    }

    pub fn num_classes(&self) -> usize {
        self.colors.iter().map(|&c| c as usize + 1).max().unwrap_or(0)
    }

    /// Vertices of each colour, indexed by colour id.
    pub fn classes(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.num_classes()];
        for (v, &c) in self.colors.iter().enumerate() {
            out[c as usize].push(v);
        }
        out
    }

    pub fn is_discrete(&self) -> bool {
        self.num_classes() == self.colors.len()
    }

    /// Gives `vertices` one new colour shared only among themselves.
    pub(crate) fn individualize(&self, vertices: &[usize]) -> Self {
        let fresh = self.num_classes() as u32;
        let mut colors = self.colors.clone();
        for &v in vertices {
            colors[v] = fresh;
        }
        Coloring::from_labels(colors)
    }
}

/// 1-dimensional Weisfeiler-Lehman refinement to the coarsest stable partition
/// finer than `initial`.
pub fn wl_refine(g: &SimpleGraph, initial: &Coloring) -> Coloring {
    assert_eq!(g.vertex_count(), initial.len(), "one colour per vertex");
    let mut current = Coloring::from_labels(initial.colors.iter().copied());
    loop {
        let signatures = (0..g.vertex_count()).map(|v| {
            let mut nbrs: Vec<u32> = g.neighbors(v).map(|w| current.colors[w]).collect();
            nbrs.sort_unstable();
            (current.colors[v], nbrs)
        });
        let next = Coloring::from_labels(signatures);
        if next.num_classes() == current.num_classes() {
            return next;
        }
        current = next;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{frucht, star};
    use std::collections::BTreeSet;

    fn partition(c: &Coloring, names: &[String]) -> BTreeSet<BTreeSet<String>> {
        c.classes().into_iter().map(|cls| cls.into_iter().map(|v| names[v].clone()).collect()).collect()
    }

    #[test]
    fn star_splits_center_from_leaves() {
        let g = star(6).unwrap().to_simple_graph().unwrap();
        let c = wl_refine(&g, &Coloring::uniform(g.vertex_count()));
        assert_eq!(c.num_classes(), 2);
    }

    #[test]
    fn frucht_is_not_split_from_uniform_start() {
        let g = frucht().to_simple_graph().unwrap();
        let c = wl_refine(&g, &Coloring::uniform(12));
        assert_eq!(c.num_classes(), 1);
    }

    #[test]
    fn frucht_individualized_vertex_goes_discrete() {
        let g = frucht().to_simple_graph().unwrap();
        for v in 0..12 {
            let init = Coloring::uniform(12).individualize(&[v]);
            let c = wl_refine(&g, &init);
            assert!(c.is_discrete(), "vertex {v}");
        }
    }

    #[test]
    fn stable_partition_is_equitable() {
        let g = crate::generators::x_graph(11).unwrap().to_simple_graph().unwrap();
        let c = wl_refine(&g, &Coloring::uniform(g.vertex_count()));
        for cls in c.classes() {
            let profile = |v: usize| {
                let mut x: Vec<u32> = g.neighbors(v).map(|w| c.color(w)).collect();
                x.sort_unstable();
                x
            };
            assert!(cls.iter().all(|&v| profile(v) == profile(cls[0])));
        }
    }

    #[test]
    fn vertex_order_does_not_change_partition() {
        let h = crate::generators::x_graph(11).unwrap();
        let g = h.to_simple_graph().unwrap();
        let c = wl_refine(&g, &Coloring::uniform(g.vertex_count()));
        // same graph, vertices inserted in reverse order
        let mut names: Vec<&str> = g.names().iter().map(String::as_str).collect();
        names.reverse();
        let named = g.named_edges();
        let g2 = SimpleGraph::from_named_edges(
            names.iter().copied(),
            named.iter().map(|(a, b)| (a.as_str(), b.as_str())),
        );
        let c2 = wl_refine(&g2, &Coloring::uniform(g2.vertex_count()));
        assert_eq!(partition(&c, g.names()), partition(&c2, g2.names()));
    }
}

use std::collections::{BTreeMap, BTreeSet};

use proptest::prelude::*;

use hgrec_core::alignment::{
    align_by_hyperedge_ids, align_exact, align_wl_anchored, wl_refine, AnchorSet, Coloring,
};
use hgrec_core::bounds::{lemma_rr_bounds, mm_sample_bounds, BoundsInput};
use hgrec_core::generators::{assign_weights, chain, star, wcgnm, wcgnm_edge_count, x_graph};
use hgrec_core::kg::{
    extract_subgraph, normalized_l1, parse_edgelist, render_edgelist, KnowledgeGraph, SubgraphSpec,
};
use hgrec_core::masking::{build_meta_graph, MaskingStrategy, UniformSingleMask};
use hgrec_core::oracle::{relative_weight, ExactOracle, MmOracle};
use hgrec_core::recovery::{recover_from_oracle, CandidateSet};
use hgrec_core::{dissimilarity, Hyperedge, NodeId, NodeRelabeling, SimpleGraph, WeightedHypergraph};

fn build(edges: BTreeMap<BTreeSet<usize>, f64>) -> WeightedHypergraph {
    WeightedHypergraph::from_edges(
        edges.into_iter().map(|(s, w)| (Hyperedge::of(&s.into_iter().collect::<Vec<_>>()), w)),
    )
    .unwrap()
}

fn hypergraph(nodes: usize, max_edges: usize) -> impl Strategy<Value = WeightedHypergraph> {
    prop::collection::btree_map(prop::collection::btree_set(0..nodes, 2..=3), 0.01f64..10.0, 1..=max_edges)
        .prop_map(build)
}

fn normalized(nodes: usize, max_edges: usize) -> impl Strategy<Value = WeightedHypergraph> {
    hypergraph(nodes, max_edges).prop_map(|h| h.normalize().unwrap())
}

/// Connected simple graph on `n` nodes: a random tree plus extra edges,
/// weights drawn from a small set so ties occur.
fn connected_graph(n: usize) -> impl Strategy<Value = WeightedHypergraph> {
    let parents: Vec<_> = (1..n).map(|i| 0..i).collect();
    (parents, prop::collection::vec((0..n, 0..n), 0..n), prop::collection::vec(1u8..=3, 32)).prop_map(
        move |(parents, extra, weights)| {
            let mut edges = BTreeSet::new();
            for (i, p) in parents.into_iter().enumerate() {
                edges.insert(BTreeSet::from([i + 1, p]));
            }
            for (a, b) in extra {
                if a != b {
                    edges.insert(BTreeSet::from([a, b]));
                }
            }
            let map =
                edges.into_iter().enumerate().map(|(k, e)| (e, weights[k % weights.len()] as f64)).collect();
            build(map).normalize().unwrap()
        },
    )
}

fn permutation(n: usize) -> impl Strategy<Value = Vec<usize>> {
    Just((0..n).collect::<Vec<_>>()).prop_shuffle()
}

fn relabeling(perm: &[usize], prefix: &str) -> NodeRelabeling {
    NodeRelabeling::new(
        perm.iter()
            .enumerate()
            .map(|(i, &j)| (NodeId::from(i), NodeId::new(format!("{prefix}{j}")).unwrap())),
    )
    .unwrap()
}

fn restricted(phi: &NodeRelabeling, nodes: &BTreeSet<NodeId>) -> NodeRelabeling {
    NodeRelabeling::new(phi.pairs().filter(|(a, _)| nodes.contains(*a)).map(|(a, b)| (a.clone(), b.clone())))
        .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn dissimilarity_is_a_metric(a in hypergraph(6, 8), b in hypergraph(6, 8), c in hypergraph(6, 8)) {
        let ab = dissimilarity(&a, &b);
        prop_assert!(ab >= 0.0);
        prop_assert_eq!(ab, dissimilarity(&b, &a));
        prop_assert_eq!(dissimilarity(&a, &a), 0.0);
        if ab == 0.0 {
            prop_assert!(a.approx_eq(&b, 0.0));
        }
        prop_assert!(dissimilarity(&a, &c) <= ab + dissimilarity(&b, &c) + 1e-12);
    }

    #[test]
    fn normalized_dissimilarity_at_most_two(a in normalized(6, 8), b in normalized(6, 8)) {
        let d = dissimilarity(&a, &b);
        prop_assert!((0.0..=2.0 + 1e-12).contains(&d));
    }

    #[test]
    fn relabel_preserves_dissimilarity(a in hypergraph(6, 8), b in hypergraph(6, 8), perm in permutation(6)) {
        let phi = relabeling(&perm, "v");
        let d = dissimilarity(&a.relabel(&restricted(&phi, &a.nodes())).unwrap(),
                              &b.relabel(&restricted(&phi, &b.nodes())).unwrap());
        prop_assert!((d - dissimilarity(&a, &b)).abs() < 1e-12);
    }

    #[test]
    fn range_ratio_at_least_one(a in hypergraph(6, 8)) {
        prop_assert!(a.range_ratio().unwrap() >= 1.0);
        let equal = WeightedHypergraph::unit(a.edge_set()).unwrap();
        prop_assert_eq!(equal.range_ratio(), Some(1.0));
    }

    #[test]
    fn encode_decode_roundtrip(a in hypergraph(8, 10), norm in any::<bool>()) {
        let h = if norm { a.normalize().unwrap() } else { a };
        let back = WeightedHypergraph::decode(&h.encode()).unwrap();
        prop_assert!(back.approx_eq(&h, 0.0));
        prop_assert_eq!(back.is_normalized(), h.is_normalized());
    }

    #[test]
    fn assigned_weights_have_two_level_ratio(n in 3usize..20, seed in any::<u64>()) {
        let h = assign_weights(&chain(n).unwrap(), 1.0, 7.0, seed).unwrap();
        let r = h.range_ratio().unwrap();
        prop_assert!((r - 1.0).abs() < 1e-12 || (r - 7.0).abs() < 1e-9);
        prop_assert!((h.total_weight() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn wcgnm_is_connected_with_exact_edge_count(n in 4usize..25, p in 0.2f64..0.9, seed in any::<u64>()) {
        let m = wcgnm_edge_count(n, p);
        prop_assume!(m >= n - 1);
        let h = wcgnm(n, p, seed).unwrap();
        prop_assert_eq!(h.edge_count(), m);
        prop_assert!(h.to_simple_graph().unwrap().is_connected());
        prop_assert_eq!(&h, &wcgnm(n, p, seed).unwrap());
    }

    #[test]
    fn min_support_prob_is_at_most_uniform(a in hypergraph(7, 8)) {
        let s = UniformSingleMask;
        for (e, _) in a.edges() {
            let support = s.support(e);
            let min = support.iter().map(|(_, p)| *p).fold(f64::INFINITY, f64::min);
            prop_assert!(min <= 1.0 / support.len() as f64 + 1e-15);
        }
    }

    #[test]
    fn meta_graph_is_symmetric_and_line_graph_on_graphs(h in connected_graph(7)) {
        let mg = build_meta_graph(&h, &UniformSingleMask);
        let lg = h.line_graph();
        let m = mg.edges().len();
        for i in 0..m {
            for j in 0..m {
                prop_assert_eq!(mg.adjacent(i, j), mg.adjacent(j, i));
                if i != j {
                    let a = lg.index_of(&mg.edges()[i].key()).unwrap();
                    let b = lg.index_of(&mg.edges()[j].key()).unwrap();
                    prop_assert_eq!(mg.adjacent(i, j), lg.has_edge(a, b));
                }
            }
        }
        prop_assert!(mg.is_connected());
    }

    #[test]
    fn exact_oracle_properties(h in normalized(6, 8)) {
        let s = UniformSingleMask;
        let o = ExactOracle::new(h.clone(), s).unwrap();
        for (e, _) in h.edges() {
            for (m, _) in s.support(e) {
                let q = o.query(&m).unwrap();
                let total: f64 = q.iter().map(|(_, p)| p).sum();
                prop_assert!((total - 1.0).abs() < 1e-12);
                prop_assert!(q.iter().all(|(c, _)| m.is_completed_by(c)));
                for (e2, _) in h.edges() {
                    if s.prob(&m, e2) > 0.0 {
                        let r = relative_weight(&o, e, e2, &m, &s).unwrap();
                        let inv = relative_weight(&o, e2, e, &m, &s).unwrap();
                        prop_assert!((r * inv - 1.0).abs() < 1e-12);
                        let truth = h.weight(e).unwrap() / h.weight(e2).unwrap();
                        prop_assert!((r / truth - 1.0).abs() < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn exact_oracle_identity_on_connected_graphs(h in connected_graph(8)) {
        let o = ExactOracle::new(h.clone(), UniformSingleMask).unwrap();
        let rec = recover_from_oracle(&o, &CandidateSet::all_pairs_from_oracle(&o), &UniformSingleMask).unwrap();
        prop_assert!(rec.meta_connected);
        prop_assert!(dissimilarity(&rec.hypergraph, &h) <= 1e-9);
    }

    #[test]
    fn wl_partition_is_equitable_and_order_free(h in connected_graph(9), perm in permutation(9)) {
        let g = h.to_simple_graph().unwrap();
        let c = wl_refine(&g, &Coloring::uniform(g.vertex_count()));
        for cls in c.classes() {
            let profile = |v: usize| {
                let mut x: Vec<u32> = g.neighbors(v).map(|w| c.color(w)).collect();
                x.sort_unstable();
                x
            };
            prop_assert!(cls.iter().all(|&v| profile(v) == profile(cls[0])));
        }
        let names: Vec<&str> = perm.iter().filter_map(|&i| g.names().get(i).map(String::as_str)).collect();
        let named = g.named_edges();
        let g2 = SimpleGraph::from_named_edges(names, named.iter().map(|(a, b)| (a.as_str(), b.as_str())));
        let c2 = wl_refine(&g2, &Coloring::uniform(g2.vertex_count()));
        let partition = |c: &Coloring, g: &SimpleGraph| -> BTreeSet<BTreeSet<String>> {
            c.classes().into_iter().map(|cls| cls.into_iter().map(|v| g.name(v).to_string()).collect()).collect()
        };
        prop_assert_eq!(partition(&c, &g), partition(&c2, &g2));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn alignment_methods_agree(n in 3usize..=7, h in (3usize..=7).prop_flat_map(connected_graph), perm in permutation(7)) {
        let _ = n;
        let k = h.node_count();
        let perm: Vec<usize> = perm.into_iter().filter(|&j| j < k).collect();
        let phi = relabeling(&perm, "u");
        let h2 = h.relabel(&phi).unwrap();

        let exact = align_exact(&h, &h2, 8).unwrap();
        prop_assert_eq!(exact.cost, 0.0);
        let mapped = h.relabel(&exact.mapping).unwrap();
        prop_assert_eq!(mapped.edge_set(), h2.edge_set());
        prop_assert!(dissimilarity(&mapped, &h2) <= 1e-9);

        // invariant under relabeling the second input
        let psi = relabeling(&perm, "w");
        let h3 = h.relabel(&psi).unwrap();
        prop_assert_eq!(align_exact(&h, &h3, 8).unwrap().cost, exact.cost);

        let pairs: Vec<_> = h.edges().map(|(e, _)| (e.clone(), e.map(&phi).unwrap())).collect();
        let ids = align_by_hyperedge_ids(&h, &h2, &pairs).unwrap();
        prop_assert_eq!(ids.cost, 0.0);
        prop_assert_eq!(dissimilarity(&h.relabel(&ids.mapping).unwrap(), &h2), 0.0);

        let first = NodeId::from(0);
        let anchors = AnchorSet::nodes(vec![(first.clone(), phi.get(&first).unwrap().clone())]).unwrap();
        for anchors in [AnchorSet::default(), anchors] {
            let ir = align_wl_anchored(&h, &h2, &anchors).unwrap();
            prop_assert!(dissimilarity(&h.relabel(&ir.alignment.mapping).unwrap(), &h2) <= 1e-9);
        }
    }

    #[test]
    fn rr_bounds_hold(m0 in 1u64..8, k0 in 1u64..5, draws in prop::collection::vec(any::<bool>(), 8)) {
        let weights: Vec<f64> = draws[..m0 as usize].iter().map(|&b| if b { k0 as f64 } else { 1.0 }).collect();
        let total: f64 = weights.iter().sum();
        let (lo, hi) = lemma_rr_bounds(m0, k0 as f64);
        for w in weights {
            prop_assert!(w / total >= lo - 1e-12);
            prop_assert!(w / total <= hi + 1e-12);
        }
    }

    #[test]
    fn sample_bounds_are_monotone(
        m in 1u64..50, kappa in 1.0f64..20.0, l in 1u64..10, c_pi in 0.05f64..1.0,
        big_c in 1u64..10, eps in 0.01f64..0.5, delta in 0.01f64..0.5,
    ) {
        let b = BoundsInput { m, kappa, l, c_pi, big_c_pi: big_c, epsilon: eps, delta, n: None };
        let base = mm_sample_bounds(&b).unwrap();
        let le = |x: &BoundsInput| {
            let y = mm_sample_bounds(x).unwrap();
            y.k_min >= base.k_min && y.n_min >= base.n_min
        };
        let ge = |x: &BoundsInput| {
            let y = mm_sample_bounds(x).unwrap();
            y.k_min <= base.k_min && y.n_min <= base.n_min
        };
        let grow = [
            BoundsInput { m: m + 1, ..b },
            BoundsInput { kappa: kappa * 1.5, ..b },
            BoundsInput { l: l + 1, ..b },
            BoundsInput { big_c_pi: big_c + 1, ..b },
            BoundsInput { c_pi: c_pi * 0.5, ..b },
        ];
        let shrink = [BoundsInput { epsilon: eps * 1.5, ..b }, BoundsInput { delta: delta * 1.5, ..b }];
        prop_assert!(grow.iter().all(le));
        prop_assert!(shrink.iter().all(ge));
    }

    #[test]
    fn l1_score_properties(
        truth in prop::collection::btree_set((0u8..8, 0u8..8), 1..12),
        extra in (0u8..8, 0u8..8),
    ) {
        let norm = |(a, b): (u8, u8)| (a.min(b).to_string(), a.max(b).to_string());
        let truth: BTreeSet<_> = truth.into_iter().filter(|(a, b)| a != b).map(norm).collect();
        prop_assume!(!truth.is_empty());
        let graph = |e: &BTreeSet<(String, String)>| {
            SimpleGraph::from_named_edges([], e.iter().map(|(a, b)| (a.as_str(), b.as_str())))
        };
        let t = graph(&truth);
        prop_assert_eq!(normalized_l1(&t, &t).unwrap(), 0.0);
        let extra = norm(extra);
        prop_assume!(extra.0 != extra.1 && !truth.contains(&extra));
        let mut more = truth.clone();
        more.insert(extra);
        let score = normalized_l1(&t, &graph(&more)).unwrap();
        prop_assert!((score - 1.0 / truth.len() as f64).abs() < 1e-15);
    }

    #[test]
    fn parser_roundtrip_and_vocabulary(
        pairs in prop::collection::btree_set((0usize..6, 0usize..6), 0..10),
        noise in "[a-z ]{0,20}",
    ) {
        let vocab: Vec<String> = ["table", "ice-cream", "dining room", "chair", "lamp", "sofa"]
            .iter().map(|s| s.to_string()).collect();
        let pairs: BTreeSet<(String, String)> = pairs
            .into_iter()
            .filter(|(a, b)| a != b)
            .map(|(a, b)| {
                let (x, y) = (&vocab[a], &vocab[b]);
                if x < y { (x.clone(), y.clone()) } else { (y.clone(), x.clone()) }
            })
            .collect();
        let parsed = parse_edgelist(&render_edgelist(&pairs), &vocab);
        prop_assert_eq!(&parsed.pairs, &pairs);
        prop_assert!(parsed.unparsed_lines.is_empty());
        let noisy = parse_edgelist(&format!("{noise}\n{}", render_edgelist(&pairs)), &vocab);
        for (a, b) in &noisy.pairs {
            prop_assert!(vocab.contains(a) && vocab.contains(b));
        }
    }

    #[test]
    fn extraction_ignores_line_order(
        edges in prop::collection::vec((0u8..10, 0u8..10, 1u8..5), 1..30),
        seed in any::<u64>(), k in 1usize..4, d in 0usize..4,
    ) {
        let lines: Vec<String> = edges
            .iter()
            .filter(|(a, b, _)| a != b)
            .map(|(a, b, w)| format!("e{a}\te{b}\t{w}"))
            .collect();
        prop_assume!(!lines.is_empty());
        let mut shuffled = lines.clone();
        use rand::seq::SliceRandom;
        shuffled.shuffle(&mut hgrec_core::rng::stream(seed, "test", 0));
        let kg1 = KnowledgeGraph::from_tsv(&lines.join("\n")).unwrap();
        let kg2 = KnowledgeGraph::from_tsv(&shuffled.join("\n")).unwrap();
        let source = lines[0].split('\t').next().unwrap().to_string();
        let spec = SubgraphSpec { source, k, d };
        prop_assert_eq!(extract_subgraph(&kg1, &spec).unwrap(), extract_subgraph(&kg2, &spec).unwrap());
    }
}

#[test]
fn generator_edge_counts() {
    for n in 2..30 {
        assert_eq!(star(n).unwrap().edge_count(), n - 1);
        assert_eq!(chain(n).unwrap().edge_count(), n - 1);
    }
    for n in 5..30 {
        let mut expect = BTreeSet::new();
        for k in 1..=4 {
            expect.insert(Hyperedge::of(&[0, k]));
        }
        for a in 1..n {
            if a + 4 < n {
                expect.insert(Hyperedge::of(&[a, a + 4]));
            }
        }
        assert_eq!(x_graph(n).unwrap().edge_set(), expect);
    }
}

#[test]
fn wcgnm_seeds_differ() {
    let a = wcgnm(20, 0.3, 1).unwrap();
    let b = wcgnm(20, 0.3, 2).unwrap();
    assert_ne!(a.edge_set(), b.edge_set());
}

#[test]
fn seed_edge_invariance_under_exact_oracle() {
    use hgrec_core::recovery::bf_weight_estimation;
    for h in [star(5).unwrap(), chain(5).unwrap(), x_graph(9).unwrap()] {
        let h = assign_weights(&h, 1.0, 4.0, 11).unwrap();
        let o = ExactOracle::new(h.clone(), UniformSingleMask).unwrap();
        let edges: Vec<Hyperedge> = h.edges().map(|(e, _)| e.clone()).collect();
        let mut outputs = Vec::new();
        for root in &edges {
            let mut w = BTreeMap::from([(root.clone(), 1.0)]);
            bf_weight_estimation(root, &edges, &o, &UniformSingleMask, &mut w).unwrap();
            let total: f64 = w.values().sum();
            outputs.push(w.into_iter().map(|(e, x)| (e, x / total)).collect::<Vec<_>>());
        }
        for out in &outputs[1..] {
            for ((e1, a), (e2, b)) in out.iter().zip(&outputs[0]) {
                assert_eq!(e1, e2);
                assert!((a - b).abs() < 1e-12);
            }
        }
    }
}

mod common;

use aspect_hierarchy::{
    build_hierarchy, export_dot, hierarchy_pairs, AspectForest, HierarchyBuilder, RankedPairs,
};
use common::*;
use proptest::prelude::*;

fn phone_forest() -> AspectForest {
    build_hierarchy(&RankedPairs::from_listing(&PHONE_PAIRS).unwrap())
}

#[test]
fn phone_forest_pairs() {
    let pairs = hierarchy_pairs(&phone_forest());
    let want: Vec<(String, String)> = [
        ("battery", "charge"),
        ("headset", "bluetooth"),
        ("phone", "battery"),
        ("phone", "bluetooth"),
        ("phone", "case"),
        ("phone", "headset"),
        ("phone", "price"),
        ("price", "battery"),
    ]
    .iter()
    .map(|(a, b)| (a.to_string(), b.to_string()))
    .collect();
    assert_eq!(pairs.into_iter().collect::<Vec<_>>(), want);
}

#[test]
fn dot_edges_match_forest_edges() {
    let forest = phone_forest();
    let dot = export_dot(&forest, false);
    assert!(dot.starts_with("digraph aspects {"));
    assert_eq!(parse_dot_edges(&dot), hierarchy_pairs(&forest));
    // repeated labels render as separate nodes
    assert_eq!(dot.matches("[label=\"battery\"]").count(), 2);
    assert_eq!(dot.matches("[label=\"bluetooth\"]").count(), 2);

    let annotated = export_dot(&forest, true);
    assert_eq!(parse_dot_edges(&annotated), hierarchy_pairs(&forest));
    let case = forest.canonical("case").unwrap();
    assert!(annotated.contains(&format!("n0 -> n{case} [label=\"9\"];")));
}

#[test]
fn two_roots_stay_apart_in_dot() {
    let forest = build_hierarchy(&RankedPairs::from_listing(&[("a", "b"), ("c", "d")]).unwrap());
    let dot = export_dot(&forest, false);
    assert_eq!(dot.matches(" -> ").count(), 2);
    assert_eq!(forest.roots().len(), 2);
}

#[test]
fn forest_json_round_trip() {
    let forest = phone_forest();
    let back = AspectForest::from_json(&forest.to_json()).unwrap();
    assert_eq!(forest_shape(&back), forest_shape(&forest));
    assert_eq!(hierarchy_pairs(&back), hierarchy_pairs(&forest));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn prefix_then_rest_equals_one_pass(seed in any::<u64>(), cut in 0usize..40) {
        let pairs = random_ranking(&mut rng(seed), 6, 30);
        let cut = cut.min(pairs.len());
        let mut whole = HierarchyBuilder::new();
        let mut head = HierarchyBuilder::new();
        for pair in &pairs {
            whole.insert(pair);
        }
        for pair in &pairs[..cut] {
            head.insert(pair);
        }
        let mut resumed = HierarchyBuilder::from(head.finish());
        for pair in &pairs[cut..] {
            resumed.insert(pair);
        }
        prop_assert_eq!(resumed.finish(), whole.finish());
    }

    /// Folding more pairs never removes or relabels nodes, and never drops an
    /// edge or a skip-log entry.
    #[test]
    fn folding_only_grows(seed in any::<u64>()) {
        let pairs = random_ranking(&mut rng(seed), 6, 30);
        let mut builder = HierarchyBuilder::new();
        let mut prev = builder.forest().clone();
        for pair in &pairs {
            builder.insert(pair);
            let next = builder.forest();
            prop_assert!(next.len() >= prev.len());
            for node in prev.nodes() {
                prop_assert_eq!(&next.node(node.id).label, &node.label);
                for c in &node.children {
                    prop_assert!(next.node(node.id).children.contains(c));
                }
            }
            prop_assert!(hierarchy_pairs(&prev).is_subset(&hierarchy_pairs(next)));
            prop_assert_eq!(&next.skip_log()[..prev.skip_log().len()], prev.skip_log());
            prev = next.clone();
        }
    }
}

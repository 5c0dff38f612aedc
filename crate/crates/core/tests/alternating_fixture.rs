use std::collections::BTreeSet;

use trimoments::trees::{
    enumerate_alternating, is_alternating, AlternationType, LabeledOrderedTree,
};
use trimoments::Limits;

fn fixture() -> Vec<LabeledOrderedTree> {
    let raw = include_str!("fixtures/alternating_trees_4.json");
    serde_json::from_str(raw).expect("fixture parses")
}

// The drawn trees on four vertices ascend from the root, i.e. they are the
// second family; reversing labels gives the first.
#[test]
fn drawn_trees_are_the_ascending_family() {
    let drawn = fixture();
    assert_eq!(drawn.len(), 27);
    let drawn: BTreeSet<_> = drawn.into_iter().collect();
    assert_eq!(drawn.len(), 27, "duplicates in fixture");
    for t in &drawn {
        assert!(is_alternating(t, AlternationType::TypeII), "{t:?}");
    }
    let lim = Limits::default();
    let ii: BTreeSet<_> = enumerate_alternating(3, AlternationType::TypeII, &lim)
        .unwrap()
        .into_iter()
        .collect();
    assert_eq!(drawn, ii);

    let flipped: BTreeSet<_> = drawn.iter().map(|t| t.reversed()).collect();
    let i: BTreeSet<_> = enumerate_alternating(3, AlternationType::TypeI, &lim)
        .unwrap()
        .into_iter()
        .collect();
    assert_eq!(flipped, i);
}

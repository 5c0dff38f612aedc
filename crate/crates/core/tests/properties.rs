use proptest::prelude::*;

use trimoments::moments::{eta_moment, OperatorSpec};
use trimoments::partitions::AdaptMode;
use trimoments::trees::{partition_to_tree, tree_to_partition, OrderedTree};
use trimoments::volumes::{
    count_linear_extensions, count_linear_extensions_brute, region_constraints,
};
use trimoments::word::{StarLetter, StarWord};
use trimoments::Limits;

fn word() -> impl Strategy<Value = StarWord> {
    prop::collection::vec((any::<bool>(), 1u32..=2), 0..=10).prop_map(|ls| {
        StarWord::new(
            ls.into_iter()
                .map(|(s, l)| {
                    if s {
                        StarLetter::star(l)
                    } else {
                        StarLetter::plain(l)
                    }
                })
                .collect(),
        )
    })
}

// random recursive tree: vertex i hangs under some earlier vertex
fn tree() -> impl Strategy<Value = OrderedTree> {
    (1usize..=12)
        .prop_flat_map(|v| {
            (
                Just(v),
                prop::collection::vec(any::<prop::sample::Index>(), v - 1),
            )
        })
        .prop_map(|(v, picks)| {
            let mut children = vec![Vec::new(); v];
            for (i, ix) in picks.into_iter().enumerate() {
                children[ix.index(i + 1)].push(i + 1);
            }
            OrderedTree::from_children(children).unwrap()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn adjoint_word_same_moment(w in word()) {
        let lim = Limits::default();
        let a = eta_moment(&w, &OperatorSpec::Triangular, &lim).unwrap().value;
        let b = eta_moment(&w.adjoint(), &OperatorSpec::Triangular, &lim).unwrap().value;
        prop_assert_eq!(a, b);
    }

    #[test]
    fn extension_count_matches_brute(w in word()) {
        let lim = Limits::default();
        for (p, _) in eta_moment(&w, &OperatorSpec::Triangular, &lim).unwrap().contributions {
            let q = region_constraints(&p, &w, AdaptMode::Eta).unwrap();
            let dp = count_linear_extensions(&q, &lim).unwrap();
            prop_assert_eq!(dp, count_linear_extensions_brute(&q).into());
        }
    }

    #[test]
    fn tree_partition_round_trip(t in tree()) {
        let p = tree_to_partition(&t);
        prop_assert_eq!(p.m(), 2 * (t.vertex_count() - 1));
        prop_assert_eq!(partition_to_tree(&p), t);
    }
}

mod common;

use common::{brute_force, keys, perturbed_simplex};
use proptest::prelude::*;
use reeb4::capacities::{ehz_of_graph, prepare};
use reeb4::num::int;
use reeb4::orbits::{enumerate, SearchQuery};
use reeb4::shapes::twenty_four_cell;

#[test]
fn twenty_four_cell_matches_exhaustion() {
    let g = prepare(&twenty_four_cell(), 1e-9).unwrap().graph;
    let pruned = keys(&enumerate(&g, &SearchQuery::new(Some(int(4)), Some(12))));
    assert_eq!(pruned, brute_force(&g, &int(4), 12));
    assert_eq!(pruned.len(), 8);
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 12, ..ProptestConfig::default() })]

    #[test]
    fn pruned_search_matches_exhaustion(seed in any::<u64>(), six in any::<bool>()) {
        let p = perturbed_simplex(if six { 6 } else { 5 }, seed);
        let g = prepare(&p, 1e-9).unwrap().graph;
        let bound = &ehz_of_graph(&g).unwrap().value * int(2);
        let pruned = keys(&enumerate(&g, &SearchQuery::new(Some(bound.clone()), Some(10))));
        prop_assert_eq!(pruned, brute_force(&g, &bound, 10));
    }
}

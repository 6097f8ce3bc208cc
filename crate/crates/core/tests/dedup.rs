mod common;

use std::collections::BTreeSet;

use flowdse::design_space::{deduplicate, enumerate};
use flowdse::runner::cell_seed;
use flowdse::{evaluator, PlantModel};

#[test]
fn classes_are_the_swap_orbits() {
    let space = common::space();
    let all: Vec<_> = enumerate(&space).collect();
    let classes = deduplicate(&space, all.clone());
    assert_eq!(classes.len(), 288);
    assert_eq!(classes.iter().map(|c| c.multiplicity()).sum::<usize>(), 1152);
    let mut seen = BTreeSet::new();
    for class in &classes {
        let w = common::wiring(&space, &class.representative);
        let t = common::swap_trimmers(&w);
        let orbit: BTreeSet<_> = [w.clone(), t.clone(), common::swap_distributors(&w), common::swap_distributors(&t)]
            .into_iter()
            .collect();
        assert_eq!(orbit.len(), 4);
        let members: BTreeSet<_> = class.members.iter().map(|&i| common::wiring(&space, &all[i])).collect();
        assert_eq!(members, orbit, "class of design {}", class.index);
        assert!(class.members.contains(&class.index));
        assert!(class.members.windows(2).all(|p| p[0] < p[1]));
        for &m in &class.members {
            assert!(seen.insert(m));
            assert!(all[m].encoding() >= class.representative.encoding());
        }
    }
}

#[test]
fn class_members_simulate_identically() {
    let space = common::space();
    let all: Vec<_> = enumerate(&space).collect();
    let classes = deduplicate(&space, all.clone());
    let mut scenarios = common::scenarios();
    for s in &mut scenarios {
        s.horizon_s = 900.0;
    }
    for class in classes.iter().step_by(29) {
        for (si, sc) in scenarios.iter().enumerate() {
            let seed = cell_seed(3, class.index, si, 0);
            let scored: Vec<_> = class
                .members
                .iter()
                .map(|&m| {
                    let out = PlantModel::build(&space, &all[m], sc).unwrap().run(seed, false);
                    let mut r = evaluator::score(&space, sc, &out, m, 0, seed, true);
                    r.design = 0;
                    r
                })
                .collect();
            for r in &scored[1..] {
                assert_eq!(r, &scored[0], "class {} scenario {}", class.index, sc.id);
            }
        }
    }
}

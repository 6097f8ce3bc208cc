mod common;

use std::collections::{BTreeSet, HashSet};

use flowdse::design_space::enumerate;
use flowdse::{DesignConfiguration, DesignSpace};
use proptest::prelude::*;

#[test]
fn case_study_matches_structural_oracle() {
    let space = common::space();
    let got: Vec<_> = enumerate(&space).map(|c| common::wiring(&space, &c)).collect();
    let expected = common::case_study_wirings();
    assert_eq!(got.len(), 1152);
    assert_eq!(expected.len(), 1152);
    let got_set: HashSet<_> = got.iter().cloned().collect();
    assert_eq!(got_set.len(), 1152, "enumeration produced duplicates");
    let expected_set: HashSet<_> = expected.into_iter().map(|x| x.3).collect();
    assert_eq!(got_set, expected_set);
}

#[test]
fn enumeration_order_is_stable() {
    let space = common::space();
    let a: Vec<_> = enumerate(&space).collect();
    let b: Vec<_> = enumerate(&space).collect();
    assert_eq!(a, b);
}

#[test]
fn every_case_study_configuration_is_valid() {
    let space = common::space();
    for c in enumerate(&space) {
        assert!(space.check_configuration(&c).is_empty());
    }
}

/// Random small spaces, built as JSON.
fn arb_space() -> impl Strategy<Value = String> {
    (
        1usize..=2,
        0usize..=2,
        0usize..=2,
        2usize..=3,
        proptest::collection::vec(any::<bool>(), 8),
        proptest::collection::vec(0u8..10, 400),
    )
        .prop_map(|(origins, trimmers, dists, dests, required, coins)| {
            let mut modules = Vec::new();
            let mut outs = Vec::new();
            let mut ins = Vec::new();
            for l in 0..origins {
                modules.push(format!(r#"{{"id": "o{l}", "kind": "origin", "lane": {l}}}"#));
                outs.push((format!("o{l}"), "out"));
            }
            for (t, req) in required.iter().enumerate().take(trimmers) {
                modules.push(format!(r#"{{"id": "t{t}", "kind": "trimming", "required": {req}}}"#));
                outs.push((format!("t{t}"), "out"));
                ins.push((format!("t{t}"), "in"));
            }
            for d in 0..dists {
                modules.push(format!(r#"{{"id": "d{d}", "kind": "distribution", "required": {}}}"#, required[4 + d]));
                outs.push((format!("d{d}"), "out1"));
                outs.push((format!("d{d}"), "out2"));
                ins.push((format!("d{d}"), "in"));
            }
            let tags = ["fillet-strips", "burger", "schnitzel"];
            for (x, tag) in tags.iter().enumerate().take(dests) {
                modules.push(format!(r#"{{"id": "x{x}", "kind": "destination", "tag": "{tag}", "in_ports": ["in1", "in2"]}}"#));
                ins.push((format!("x{x}"), "in1"));
                ins.push((format!("x{x}"), "in2"));
            }
            let mut conns = Vec::new();
            let mut k = 0;
            for (om, op) in &outs {
                for (im, ip) in &ins {
                    let coin = coins[k % coins.len()];
                    k += 1;
                    if om != im && coin < 3 {
                        conns.push(format!(r#"["{om}.{op}", "{im}.{ip}"]"#));
                    }
                }
                // keep every row non-empty
                conns.push(format!(r#"["{om}.{op}", "x0.in{}"]"#, 1 + k % 2));
            }
            format!(
                r#"{{"name": "random", "modules": [{}], "connections": [{}]}}"#,
                modules.join(","),
                conns.join(",")
            )
        })
}

/// Every assignment of each out-port to "open" or one allowed in-port,
/// filtered by the validity predicate.
fn brute_force(space: &DesignSpace) -> Option<BTreeSet<DesignConfiguration>> {
    let rows: Vec<Vec<Option<u32>>> = (0..space.matrix.out_ports.len())
        .map(|i| {
            std::iter::once(None)
                .chain(space.matrix.row(i).iter().map(|&j| Some(j as u32)))
                .collect()
        })
        .collect();
    let total: f64 = rows.iter().map(|r| r.len() as f64).product();
    if total > 300_000.0 {
        return None;
    }
    let mut out = BTreeSet::new();
    let mut idx = vec![0usize; rows.len()];
    loop {
        let c = DesignConfiguration {
            chosen: idx.iter().zip(&rows).map(|(&i, r)| r[i]).collect(),
        };
        if space.check_configuration(&c).is_empty() {
            out.insert(c);
        }
        let mut p = 0;
        loop {
            if p == rows.len() {
                return Some(out);
            }
            idx[p] += 1;
            if idx[p] < rows[p].len() {
                break;
            }
            idx[p] = 0;
            p += 1;
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn enumeration_equals_brute_force(text in arb_space()) {
        let space = DesignSpace::from_json(&text).unwrap();
        let Some(expected) = brute_force(&space) else { return Ok(()); };
        let got: Vec<_> = enumerate(&space).collect();
        let set: BTreeSet<_> = got.iter().cloned().collect();
        prop_assert_eq!(set.len(), got.len(), "duplicates");
        prop_assert_eq!(set, expected);
    }
}

#![allow(dead_code)]

use std::collections::BTreeSet;

use flowdse::{case_study, DesignConfiguration, DesignSpace, Scenario};

pub type Wiring = BTreeSet<(String, String)>;

pub fn space() -> DesignSpace {
    DesignSpace::from_json(case_study::SPACE_JSON).unwrap()
}

pub fn scenarios() -> Vec<Scenario> {
    vec![
        Scenario::from_json(case_study::SCENARIO1_JSON).unwrap(),
        Scenario::from_json(case_study::SCENARIO2_JSON).unwrap(),
    ]
}

pub fn wiring(space: &DesignSpace, c: &DesignConfiguration) -> Wiring {
    space.wiring(c).into_iter().collect()
}

fn e(out: &str, inp: &str) -> (String, String) {
    (out.to_string(), inp.to_string())
}

/// The ordered pairs of {2, 3, 4} minus `skip`, both orders.
fn pairs(skip: usize) -> [(usize, usize); 2] {
    let rest: Vec<usize> = [2, 3, 4].into_iter().filter(|&l| l != skip).collect();
    [(rest[0], rest[1]), (rest[1], rest[0])]
}

/// Every case-study wiring built directly from its three independent
/// choices: trimmer placement (6), extra-distributor placement (6) and the
/// remaining destination wiring (32). Returns (trimmer, distributor, rest, wiring).
pub fn case_study_wirings() -> Vec<(usize, usize, usize, Wiring)> {
    let mut out = Vec::new();
    let mut t_idx = 0;
    for untrimmed in [2, 3, 4] {
        for (a, b) in pairs(untrimmed) {
            let mut d_idx = 0;
            for direct in [2, 3, 4] {
                for (c, d) in pairs(direct) {
                    for rest in 0..32 {
                        let bit = |k: usize| (rest >> k) & 1;
                        let mut w = Wiring::new();
                        for l in 1..=4 {
                            w.insert(e(&format!("origin{l}.out"), &format!("weighing{l}.in")));
                            w.insert(e(&format!("weighing{l}.out"), &format!("assignment{l}.in")));
                            w.insert(e(&format!("distribution{l}.out1"), &format!("fillet_strips.in{l}")));
                        }
                        w.insert(e("assignment1.out", "distribution1.in"));
                        w.insert(e("distribution1.out2", "batching1.in1"));
                        w.insert(e(&format!("assignment{untrimmed}.out"), &format!("distribution{untrimmed}.in")));
                        for (lane, t) in [(a, 1), (b, 2)] {
                            w.insert(e(&format!("assignment{lane}.out"), &format!("trimming{t}.in")));
                            w.insert(e(&format!("trimming{t}.out"), &format!("distribution{lane}.in")));
                            w.insert(e(&format!("trimming{t}.trim"), &format!("trim.in{t}")));
                        }
                        w.insert(e(&format!("distribution{c}.out2"), "distribution5.in"));
                        w.insert(e(&format!("distribution{d}.out2"), "distribution6.in"));
                        let food = ["burger.in", "schnitzel.in"];
                        w.insert(e(&format!("distribution{direct}.out2"), food[bit(0)]));
                        w.insert(e("distribution5.out1", food[bit(1)]));
                        w.insert(e("distribution6.out1", food[bit(2)]));
                        w.insert(e("distribution5.out2", ["batching1.in1", "batching2.in1"][bit(3)]));
                        w.insert(e("distribution6.out2", ["batching1.in2", "batching2.in2"][bit(4)]));
                        out.push((t_idx, d_idx, rest, w));
                    }
                    d_idx += 1;
                }
            }
            t_idx += 1;
        }
    }
    out
}

/// Swaps the two trimmers (and their trim-destination ports).
pub fn swap_trimmers(w: &Wiring) -> Wiring {
    let swap = |s: &str| -> String {
        match s {
            "trim.in1" => "trim.in2".into(),
            "trim.in2" => "trim.in1".into(),
            _ if s.starts_with("trimming1.") => s.replacen("trimming1", "trimming2", 1),
            _ if s.starts_with("trimming2.") => s.replacen("trimming2", "trimming1", 1),
            _ => s.to_string(),
        }
    };
    w.iter().map(|(a, b)| (swap(a), swap(b))).collect()
}

/// Swaps the two free distributors. Their batching out-ports are tied to
/// in1 / in2 respectively, so those ports swap along with them.
pub fn swap_distributors(w: &Wiring) -> Wiring {
    let module = |s: &str| -> String {
        if s.starts_with("distribution5.") {
            s.replacen("distribution5", "distribution6", 1)
        } else if s.starts_with("distribution6.") {
            s.replacen("distribution6", "distribution5", 1)
        } else {
            s.to_string()
        }
    };
    w.iter()
        .map(|(a, b)| {
            let from_free = a.starts_with("distribution5.") || a.starts_with("distribution6.");
            let b = if from_free && b.starts_with("batching") {
                if b.ends_with(".in1") {
                    b.replace(".in1", ".in2")
                } else {
                    b.replace(".in2", ".in1")
                }
            } else {
                module(b)
            };
            (module(a), b)
        })
        .collect()
}

/// A single-lane space: origin, weighing, assignment, an optional trimmer,
/// and a distributor sending strips out1 and `dest` out2.
pub fn single_lane_space(dest: &str, optional_trimmer: bool) -> DesignSpace {
    let trimmer = if optional_trimmer {
        r#"{"id": "trimming", "kind": "trimming", "out_ports": ["out", "trim"]},
           {"id": "trim", "kind": "destination", "tag": "trim"},"#
    } else {
        ""
    };
    let trim_edges = if optional_trimmer {
        r#"["assignment.out", "trimming.in"], ["trimming.out", "distribution.in"], ["trimming.trim", "trim.in"],"#
    } else {
        ""
    };
    let text = format!(
        r#"{{
        "name": "single-lane",
        "default_latency_s": {{"destination": 0}},
        "modules": [
            {{"id": "origin", "kind": "origin", "lane": 0}},
            {{"id": "weighing", "kind": "weighing", "lane": 0}},
            {{"id": "assignment", "kind": "assignment", "lane": 0}},
            {trimmer}
            {{"id": "distribution", "kind": "distribution", "lane": 0}},
            {{"id": "strips", "kind": "destination", "tag": "fillet-strips"}},
            {{"id": "target", "kind": "destination", "tag": "{dest}"}}
        ],
        "connections": [
            ["origin.out", "weighing.in"], ["weighing.out", "assignment.in"],
            ["assignment.out", "distribution.in"], {trim_edges}
            ["distribution.out1", "strips.in"], ["distribution.out2", "target.in"]
        ]
    }}"#
    );
    DesignSpace::from_json(&text).unwrap()
}

/// A one-lane, one-recipe scenario with uniform weights on [lo, hi).
pub fn single_recipe_scenario(
    rate_per_min: f64,
    lo: f64,
    hi: f64,
    band: (f64, f64),
    max_trim: f64,
    target: f64,
    horizon_s: f64,
) -> Scenario {
    Scenario::from_json(&format!(
        r#"{{
        "id": "single",
        "horizon_s": {horizon_s},
        "recipes": [
            {{"recipe": 1, "destination": "batching2", "priority": 1, "target_throughput_per_min": {target},
              "min_fillet_weight_g": {}, "max_fillet_weight_g": {}, "max_trim_weight_g": {max_trim}}},
            {{"recipe": 2, "destination": "fillet-strips", "priority": "*", "target_throughput_per_min": "*",
              "min_fillet_weight_g": 0, "max_fillet_weight_g": 1000, "max_trim_weight_g": 0}}
        ],
        "inflow": [{{"lane": 0, "rate_per_min": {rate_per_min}, "weights": {{"uniform": {{"min_g": {lo}, "max_g": {hi}}}}}}}]
    }}"#,
        band.0, band.1
    ))
    .unwrap()
}

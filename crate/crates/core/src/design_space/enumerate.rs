//! Lazy depth-first enumeration of design configurations.
//!
//! Starting from the origin out-ports, each step picks the lowest-numbered
//! open out-port of a connected module and branches over its allowed
//! in-ports. A module becomes connected when one of its in-ports is chosen,
//! which opens its out-ports in turn. Because the next port to decide is a
//! function of the partial wiring, every configuration is produced exactly
//! once. Branches that merge two flows into a processing module's in-port are
//! cut immediately; the remaining rules are checked on complete wirings.

use super::{DesignConfiguration, DesignSpace};
use crate::plant::ModuleKind;

struct Frame {
    out_port: usize,
    /// Position in the matrix row of the option currently applied.
    option: usize,
    /// Whether applying the option connected a new module.
    opened: bool,
}

pub struct Enumerator<'a> {
    space: &'a DesignSpace,
    chosen: Vec<Option<u32>>,
    reached: Vec<u32>,
    in_use: Vec<u32>,
    stack: Vec<Frame>,
    descend: bool,
    done: bool,
}

/// Streams every valid configuration of `space` in a fixed order.
pub fn enumerate(space: &DesignSpace) -> Enumerator<'_> {
    let mut reached = vec![0; space.modules.len()];
    for &o in &space.origins {
        reached[o] = 1;
    }
    Enumerator {
        space,
        chosen: vec![None; space.matrix.out_ports.len()],
        reached,
        in_use: vec![0; space.matrix.in_ports.len()],
        stack: Vec::new(),
        descend: true,
        done: false,
    }
}

impl Enumerator<'_> {
    fn next_open_port(&self) -> Option<usize> {
        (0..self.chosen.len())
            .find(|&i| self.chosen[i].is_none() && self.reached[self.space.matrix.out_ports[i].module] > 0)
    }

    /// Applies the first usable option at or after `frame.option`.
    fn apply_from(&mut self, top: usize) -> bool {
        let space = self.space;
        let out_port = self.stack[top].out_port;
        let row = space.matrix.row(out_port);
        let mut option = self.stack[top].option;
        while option < row.len() {
            let in_port = row[option];
            let module = space.matrix.in_ports[in_port].module;
            let merges = space.modules[module].kind != ModuleKind::Destination && self.in_use[in_port] > 0;
            if !merges {
                self.chosen[out_port] = Some(in_port as u32);
                self.in_use[in_port] += 1;
                self.reached[module] += 1;
                let frame = &mut self.stack[top];
                frame.option = option;
                frame.opened = self.reached[module] == 1;
                return true;
            }
            option += 1;
        }
        false
    }

    fn undo(&mut self, top: usize) {
        let out_port = self.stack[top].out_port;
        let in_port = self.chosen[out_port].take().expect("applied option") as usize;
        self.in_use[in_port] -= 1;
        self.reached[self.space.matrix.in_ports[in_port].module] -= 1;
    }

    fn snapshot(&self) -> DesignConfiguration {
        DesignConfiguration {
            chosen: self.chosen.clone(),
        }
    }
}

impl Iterator for Enumerator<'_> {
    type Item = DesignConfiguration;

    fn next(&mut self) -> Option<DesignConfiguration> {
        loop {
            if self.done {
                return None;
            }
            if self.descend {
                match self.next_open_port() {
                    None => {
                        self.descend = false;
                        let config = self.snapshot();
                        if self.space.check_configuration(&config).is_empty() {
                            return Some(config);
                        }
                    }
                    Some(out_port) => {
                        self.stack.push(Frame {
                            out_port,
                            option: 0,
                            opened: false,
                        });
                        let top = self.stack.len() - 1;
                        if !self.apply_from(top) {
                            self.stack.pop();
                            self.descend = false;
                        }
                    }
                }
            } else {
                let Some(top) = self.stack.len().checked_sub(1) else {
                    self.done = true;
                    return None;
                };
                self.undo(top);
                self.stack[top].option += 1;
                if self.apply_from(top) {
                    self.descend = true;
                } else {
                    self.stack.pop();
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::test_spaces::*;
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn two_by_two_gives_four() {
        let s = DesignSpace::from_json(TWO_BY_TWO).unwrap();
        let all: Vec<_> = enumerate(&s).collect();
        assert_eq!(all.len(), 4);
        assert_eq!(all.iter().collect::<HashSet<_>>().len(), 4);
    }

    #[test]
    fn single_choice_rows_give_one() {
        let s = DesignSpace::from_json(LINEAR).unwrap();
        assert_eq!(enumerate(&s).count(), 1);
    }

    #[test]
    fn optional_module_yields_with_and_without() {
        // assignment may feed the distributor directly or via a trimmer
        let text = LINEAR
            .replace(
                r#"{"id": "d", "kind""#,
                r#"{"id": "t", "kind": "trimming"}, {"id": "d", "kind""#,
            )
            .replace(
                r#"["a.out", "d.in"],"#,
                r#"["a.out", "d.in"], ["a.out", "t.in"], ["t.out", "d.in"],"#,
            );
        let s = DesignSpace::from_json(&text).unwrap();
        let all: Vec<_> = enumerate(&s).collect();
        assert_eq!(all.len(), 2);
        let with_trimmer = all.iter().filter(|c| s.reached(c)[s.module_index("t").unwrap()]).count();
        assert_eq!(with_trimmer, 1);

        // the same space with the trimmer required keeps only one design
        let s = DesignSpace::from_json(&text.replace(r#""kind": "trimming"}"#, r#""kind": "trimming", "required": true}"#)).unwrap();
        assert_eq!(enumerate(&s).count(), 1);
    }

    #[test]
    fn distributor_loops_are_filtered() {
        let text = r#"{
            "name": "loop",
            "modules": [
                {"id": "o", "kind": "origin", "lane": 0},
                {"id": "d1", "kind": "distribution"},
                {"id": "d2", "kind": "distribution"},
                {"id": "x", "kind": "destination", "tag": "fillet-strips"}
            ],
            "connections": [
                ["o.out", "d1.in"],
                ["d1.out1", "d2.in"], ["d1.out1", "x.in"], ["d1.out2", "x.in"],
                ["d2.out1", "d1.in"], ["d2.out1", "x.in"], ["d2.out2", "x.in"]
            ]
        }"#;
        let s = DesignSpace::from_json(text).unwrap();
        let all: Vec<_> = enumerate(&s).collect();
        // d1.out1 -> x, or d1.out1 -> d2 with d2.out1 -> x (d2.out1 -> d1 merges)
        assert_eq!(all.len(), 2);
        for c in &all {
            assert!(s.check_configuration(c).is_empty());
        }
    }
}

use std::collections::HashMap;

use serde::Serialize;

use crate::corpus::ast::AstNode;
use crate::corpus::dsl::{
    CALL_PREFIX, DEF_PREFIX, ELSE, IF_PREFIX, PROGRAM, REPEAT_PREFIX, THEN, WHILE_PREFIX,
};

pub const DEFAULT_UNROLL_CAP: usize = 100;
pub const DEFAULT_TOTAL_CAP: usize = 10_000;

/// Flattened list of leaf commands issued by a program.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct ActionSequence {
    pub actions: Vec<String>,
}

impl ActionSequence {
    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, serde::Deserialize)]
pub struct ActionCaps {
    pub unroll_cap: usize,
    pub total_cap: usize,
}

impl Default for ActionCaps {
    fn default() -> Self {
        ActionCaps {
            unroll_cap: DEFAULT_UNROLL_CAP,
            total_cap: DEFAULT_TOTAL_CAP,
        }
    }
}

struct Walker<'a> {
    defs: HashMap<&'a str, &'a AstNode>,
    stack: Vec<&'a str>,
    caps: ActionCaps,
    out: Vec<String>,
}

impl<'a> Walker<'a> {
    fn full(&self) -> bool {
        self.out.len() >= self.caps.total_cap
    }

    fn emit(&mut self, action: &str) {
        if !self.full() {
            self.out.push(action.to_string());
        }
    }

    fn body(&mut self, nodes: &'a [AstNode]) {
        for node in nodes {
            if self.full() {
                return;
            }
            self.node(node);
        }
    }

    fn node(&mut self, node: &'a AstNode) {
        let label = node.label.as_str();
        if label.starts_with(DEF_PREFIX) {
            // Bodies run only through calls.
            return;
        }
        if let Some(name) = label.strip_prefix(CALL_PREFIX).filter(|_| node.is_leaf()) {
            match self.defs.get(name) {
                Some(def) if !self.stack.contains(&name) => {
                    self.stack.push(name);
                    self.body(&def.children);
                    self.stack.pop();
                }
                Some(_) => {}
                None => self.emit(label),
            }
            return;
        }
        if let Some(count) = label.strip_prefix(REPEAT_PREFIX).and_then(|c| c.parse::<usize>().ok()) {
            for _ in 0..count.min(self.caps.unroll_cap) {
                if self.full() {
                    return;
                }
                self.body(&node.children);
            }
            return;
        }
        if node.is_leaf() {
            if !is_control(label) {
                self.emit(label);
            }
            return;
        }
        // while / if / then / else / program and foreign inner nodes: one pass.
        self.body(&node.children);
    }
}

fn is_control(label: &str) -> bool {
    label == PROGRAM
        || label == THEN
        || label == ELSE
        || label.starts_with(IF_PREFIX)
        || label.starts_with(WHILE_PREFIX)
}

fn collect_defs<'a>(node: &'a AstNode, defs: &mut HashMap<&'a str, &'a AstNode>) {
    if let Some(name) = node.label.strip_prefix(DEF_PREFIX) {
        defs.entry(name).or_insert(node);
    }
    for child in &node.children {
        collect_defs(child, defs);
    }
}

/// Static left-to-right trace of the commands a program issues.
///
/// `repeat_N` bodies are unrolled `min(N, unroll_cap)` times, loop and branch
/// bodies contribute once, calls are inlined unless the callee is already
/// being expanded, and the output stops at `total_cap` actions. Leaves that
/// are not control-flow markers are emitted verbatim, so trees from other
/// languages yield their leaf labels.
pub fn action_sequence(ast: &AstNode, caps: ActionCaps) -> ActionSequence {
    let mut defs = HashMap::new();
    collect_defs(ast, &mut defs);
    let mut walker = Walker {
        defs,
        stack: Vec::new(),
        caps: ActionCaps {
            unroll_cap: caps.unroll_cap.max(1),
            total_cap: caps.total_cap.max(1),
        },
        out: Vec::new(),
    };
    walker.node(ast);
    ActionSequence { actions: walker.out }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::dsl::parse_robot_program;

    fn actions(src: &str, unroll_cap: usize, total_cap: usize) -> Vec<String> {
        let ast = parse_robot_program(src).unwrap();
        action_sequence(&ast, ActionCaps { unroll_cap, total_cap }).actions
    }

    #[test]
    fn repeat_unrolls() {
        assert_eq!(actions("repeat 3 { move }", 100, 10_000), ["move"; 3]);
    }

    #[test]
    fn while_is_single_pass() {
        let ast = AstNode::new(
            "while_path",
            vec![AstNode::leaf("move"), AstNode::leaf("left")],
        );
        assert_eq!(
            action_sequence(&ast, ActionCaps::default()).actions,
            ["move", "left"]
        );
    }

    #[test]
    fn unroll_cap_applies() {
        assert_eq!(actions("repeat 5 { move }", 2, 10_000), ["move"; 2]);
    }

    #[test]
    fn total_cap_truncates() {
        let out = actions("repeat 100 { repeat 100 { repeat 100 { move left } } }", 100, 10_000);
        assert_eq!(out.len(), 10_000);
        assert_eq!(actions("move left right", 100, 2), ["move", "left"]);
    }

    #[test]
    fn if_else_both_branches_once() {
        assert_eq!(
            actions("if wall { shoot } else { move left }", 100, 100),
            ["shoot", "move", "left"]
        );
    }

    #[test]
    fn calls_inline_and_recursion_is_cut() {
        let src = "def f { move call f left } call f shoot";
        assert_eq!(actions(src, 100, 100), ["move", "left", "shoot"]);
        let src = "def g { right } def f { call g move } call f call f";
        assert_eq!(actions(src, 100, 100), ["right", "move", "right", "move"]);
    }

    #[test]
    fn empty_control_nodes_emit_nothing() {
        assert!(actions("", 100, 100).is_empty());
        assert!(actions("while path { } if wall { } repeat 4 { }", 100, 100).is_empty());
    }

    #[test]
    fn undefined_call_is_opaque() {
        assert_eq!(actions("call nowhere", 100, 100), ["call_nowhere"]);
    }

    #[test]
    fn foreign_trees_emit_leaves() {
        let ast = AstNode::new(
            "for",
            vec![AstNode::leaf("range"), AstNode::new("body", vec![AstNode::leaf("print")])],
        );
        assert_eq!(
            action_sequence(&ast, ActionCaps::default()).actions,
            ["range", "print"]
        );
    }
}

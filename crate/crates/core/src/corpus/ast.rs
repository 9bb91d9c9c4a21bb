use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};

/// Identifier of an item; unique within a corpus.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct ItemId(String);

impl ItemId {
    pub fn new(value: impl Into<String>) -> Result<Self> {
        let value = value.into();
        let valid = !value.is_empty()
            && value
                .bytes()
                .all(|b| b.is_ascii_alphanumeric() || b == b'_' || b == b'-');
        if valid {
            Ok(ItemId(value))
        } else {
            Err(Error::InvalidItemId(value))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl TryFrom<String> for ItemId {
    type Error = Error;

    fn try_from(value: String) -> Result<Self> {
        ItemId::new(value)
    }
}

impl From<ItemId> for String {
    fn from(id: ItemId) -> String {
        id.0
    }
}

impl fmt::Display for ItemId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// A node of a solution's abstract syntax tree. Labels are free-form.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct AstNode {
    pub label: String,
    pub children: Vec<AstNode>,
}

impl AstNode {
    pub fn leaf(label: impl Into<String>) -> Self {
        AstNode {
            label: label.into(),
            children: Vec::new(),
        }
    }

    pub fn new(label: impl Into<String>, children: Vec<AstNode>) -> Self {
        AstNode {
            label: label.into(),
            children,
        }
    }

    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }

    pub fn node_count(&self) -> usize {
        1 + self.children.iter().map(AstNode::node_count).sum::<usize>()
    }

    /// Depth of the deepest node, counting the root as depth 1.
    pub fn max_depth(&self) -> usize {
        1 + self.children.iter().map(AstNode::max_depth).max().unwrap_or(0)
    }

    /// Labels in preorder.
    pub fn preorder(&self) -> Vec<&str> {
        let mut out = Vec::with_capacity(self.node_count());
        let mut stack = vec![self];
        while let Some(node) = stack.pop() {
            out.push(node.label.as_str());
            stack.extend(node.children.iter().rev());
        }
        out
    }

    /// Serialize as a canonical AST document (`{"label":..,"children":[..]}`).
    pub fn to_document(&self) -> String {
        serde_json::to_string(self).expect("AST serialization is infallible")
    }
}

/// Parse a canonical AST document. The only keys allowed are `label` and
/// `children`; labels must be non-empty.
pub fn parse_ast_document(text: &str) -> Result<AstNode> {
    let value: Value =
        serde_json::from_str(text).map_err(|e| Error::AstDocument(format!("malformed JSON: {e}")))?;
    node_from_value(&value, "$")
}

fn node_from_value(value: &Value, path: &str) -> Result<AstNode> {
    let obj = value
        .as_object()
        .ok_or_else(|| Error::AstDocument(format!("{path}: expected an object")))?;
    if let Some(key) = obj.keys().find(|k| *k != "label" && *k != "children") {
        return Err(Error::AstDocument(format!("{path}: unexpected key {key:?}")));
    }
    let label = match obj.get("label") {
        Some(Value::String(s)) if s.is_empty() => {
            return Err(Error::AstDocument(format!("{path}: empty label")))
        }
        Some(Value::String(s)) => s.clone(),
        Some(_) => return Err(Error::AstDocument(format!("{path}: label must be a string"))),
        None => return Err(Error::AstDocument(format!("{path}: missing label"))),
    };
    let children = match obj.get("children") {
        Some(Value::Array(items)) => items
            .iter()
            .enumerate()
            .map(|(i, v)| node_from_value(v, &format!("{path}.children[{i}]")))
            .collect::<Result<Vec<_>>>()?,
        Some(_) => {
            return Err(Error::AstDocument(format!(
                "{path}: children must be a list"
            )))
        }
        None => return Err(Error::AstDocument(format!("{path}: missing children"))),
    };
    Ok(AstNode { label, children })
}

/// Token serialization of a tree used for sequence edit distances.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct TokenSequence {
    pub tokens: Vec<String>,
}

impl TokenSequence {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

pub const OPEN_TOKEN: &str = "(";
pub const CLOSE_TOKEN: &str = ")";

/// Preorder labels with `(` / `)` around the children of every inner node.
pub fn canonize(ast: &AstNode) -> TokenSequence {
    fn walk(node: &AstNode, out: &mut Vec<String>) {
        out.push(node.label.clone());
        if !node.is_leaf() {
            out.push(OPEN_TOKEN.to_string());
            for child in &node.children {
                walk(child, out);
            }
            out.push(CLOSE_TOKEN.to_string());
        }
    }
    let mut tokens = Vec::new();
    walk(ast, &mut tokens);
    TokenSequence { tokens }
}

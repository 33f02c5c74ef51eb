//! Signed rooted trees.
//!
//! A signed rooted tree is a finite tree with a distinguished root and a
//! sign in `{-1, +1}` on every edge *not* adjacent to the root.  These
//! index the front models built in [`crate::fronts`]: vertices label the
//! pieces, the poset order (`alpha <= beta` iff `alpha` lies on the path
//! from `beta` to the root) controls which coordinates a piece depends on,
//! and the edge signs select quadrant models.
//!
//! The JSON interchange format is
//!
//! ```json
//! {"root": "r", "edges": [["r","a"], ["a","b"]], "signs": {"a-b": -1}}
//! ```
//!
//! with each sign keyed by the sorted vertex pair joined by `-`.  Output is
//! canonical (edges and signs sorted naturally), so serialization round
//! trips byte for byte.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::poly::natural_cmp;

/// Errors reported by tree construction and surgery.
#[derive(Debug, Error)]
pub enum TreeError {
    /// A vertex name is empty or contains `-` (reserved for sign keys).
    #[error("invalid vertex name `{0}`")]
    InvalidName(String),
    /// The same edge was listed twice.
    #[error("duplicate edge {0}-{1}")]
    DuplicateEdge(String, String),
    /// The edge list is not a tree on the named vertices.
    #[error("edges do not form a tree rooted at `{0}`")]
    NotATree(String),
    /// An operation referenced a vertex that does not exist.
    #[error("unknown vertex `{0}`")]
    UnknownVertex(String),
    /// A non-root-adjacent edge has no sign.
    #[error("missing sign for edge {0}-{1}")]
    MissingSign(String, String),
    /// A sign was given for a root-adjacent or non-existent edge.
    #[error("unexpected sign for edge key `{0}`")]
    UnexpectedSign(String),
    /// A sign value other than -1 or +1.
    #[error("sign for edge key `{0}` must be -1 or 1, got {1}")]
    BadSignValue(String, i64),
    /// The vertex is not a leaf (or is the root).
    #[error("vertex `{0}` is not a leaf")]
    NotALeaf(String),
    /// Malformed JSON input.
    #[error("tree JSON: {0}")]
    Json(String),
}

/// Sorted vertex pair naming an edge.
fn edge_key(a: &str, b: &str) -> (String, String) {
    if natural_cmp(a, b) == std::cmp::Ordering::Less {
        (a.to_string(), b.to_string())
    } else {
        (b.to_string(), a.to_string())
    }
}

/// A rooted tree with signs on all edges not adjacent to the root.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignedRootedTree {
    root: String,
    parent: BTreeMap<String, String>,
    children: BTreeMap<String, Vec<String>>,
    signs: BTreeMap<(String, String), i8>,
}

impl SignedRootedTree {
    /// Builds and validates a signed rooted tree.
    ///
    /// `signs` must assign -1 or +1 to exactly the edges not adjacent to
    /// the root, keyed by the sorted vertex pair.
    pub fn new(
        root: &str,
        edges: &[(String, String)],
        signs: &BTreeMap<(String, String), i8>,
    ) -> Result<Self, TreeError> {
        let mut vertices: BTreeSet<String> = BTreeSet::new();
        vertices.insert(root.to_string());
        for (a, b) in edges {
            vertices.insert(a.clone());
            vertices.insert(b.clone());
        }
        for v in &vertices {
            if v.is_empty() || v.contains('-') {
                return Err(TreeError::InvalidName(v.clone()));
            }
        }
        let mut adj: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
        let mut seen: BTreeSet<(String, String)> = BTreeSet::new();
        for (a, b) in edges {
            let key = edge_key(a, b);
            if a == b || !seen.insert(key.clone()) {
                return Err(TreeError::DuplicateEdge(key.0, key.1));
            }
            adj.entry(a).or_default().push(b);
            adj.entry(b).or_default().push(a);
        }
        // BFS from the root must reach every vertex along unique paths.
        let mut parent: BTreeMap<String, String> = BTreeMap::new();
        let mut children: BTreeMap<String, Vec<String>> = BTreeMap::new();
        for v in &vertices {
            children.insert(v.clone(), Vec::new());
        }
        let mut visited: BTreeSet<&str> = BTreeSet::new();
        visited.insert(root);
        let mut queue: VecDeque<&str> = VecDeque::new();
        queue.push_back(root);
        while let Some(v) = queue.pop_front() {
            for &w in adj.get(v).into_iter().flatten() {
                if visited.insert(w) {
                    parent.insert(w.to_string(), v.to_string());
                    children.get_mut(v).unwrap().push(w.to_string());
                    queue.push_back(w);
                }
            }
        }
        if visited.len() != vertices.len() || edges.len() + 1 != vertices.len() {
            return Err(TreeError::NotATree(root.to_string()));
        }
        for kids in children.values_mut() {
            kids.sort_by(|a, b| natural_cmp(a, b));
        }
        // Signs live exactly on the edges not adjacent to the root.
        let mut expected: BTreeSet<(String, String)> = BTreeSet::new();
        for (v, p) in &parent {
            if p != root {
                expected.insert(edge_key(v, p));
            }
        }
        for (key, &s) in signs {
            if !expected.contains(key) {
                return Err(TreeError::UnexpectedSign(format!("{}-{}", key.0, key.1)));
            }
            if s != 1 && s != -1 {
                return Err(TreeError::BadSignValue(format!("{}-{}", key.0, key.1), s as i64));
            }
        }
        for key in &expected {
            if !signs.contains_key(key) {
                return Err(TreeError::MissingSign(key.0.clone(), key.1.clone()));
            }
        }
        Ok(SignedRootedTree {
            root: root.to_string(),
            parent,
            children,
            signs: signs.clone(),
        })
    }

    /// The linear tree with vertices `0..=n`, root `0`, and the given signs
    /// on the edges `1-2, ..., (n-1)-n` (so `signs.len() == n - 1` for
    /// `n >= 1`, empty for `n <= 1`).
    pub fn linear(n: usize, signs: &[i8]) -> Result<Self, TreeError> {
        let edges: Vec<(String, String)> =
            (0..n).map(|i| (i.to_string(), (i + 1).to_string())).collect();
        let expected = n.saturating_sub(1);
        assert_eq!(signs.len(), expected, "linear tree on 0..={n} needs {expected} signs");
        let mut map = BTreeMap::new();
        for (i, &s) in signs.iter().enumerate() {
            map.insert(edge_key(&(i + 1).to_string(), &(i + 2).to_string()), s);
        }
        Self::new("0", &edges, &map)
    }

    /// Root vertex name.
    pub fn root(&self) -> &str {
        &self.root
    }

    /// All vertex names in natural order.
    pub fn vertices(&self) -> Vec<String> {
        let mut out: Vec<String> = self.children.keys().cloned().collect();
        out.sort_by(|a, b| natural_cmp(a, b));
        out
    }

    /// Number of vertices.
    pub fn len(&self) -> usize {
        self.children.len()
    }

    /// True for the one-vertex tree.
    pub fn is_empty(&self) -> bool {
        false
    }

    /// Parent of a non-root vertex.
    pub fn parent(&self, v: &str) -> Option<&str> {
        self.parent.get(v).map(|s| s.as_str())
    }

    /// Children of a vertex, in natural order.
    pub fn children(&self, v: &str) -> &[String] {
        self.children.get(v).map(|c| c.as_slice()).unwrap_or(&[])
    }

    /// Sign of a non-root-adjacent edge.
    pub fn sign(&self, a: &str, b: &str) -> Option<i8> {
        self.signs.get(&edge_key(a, b)).copied()
    }

    /// Edge count from the root.
    pub fn depth(&self, v: &str) -> Result<usize, TreeError> {
        if !self.children.contains_key(v) {
            return Err(TreeError::UnknownVertex(v.to_string()));
        }
        let mut d = 0;
        let mut cur = v;
        while let Some(p) = self.parent(cur) {
            cur = p;
            d += 1;
        }
        Ok(d)
    }

    /// Poset order: `a <= b` iff `a` lies on the path from `b` to the root.
    pub fn poset_leq(&self, a: &str, b: &str) -> Result<bool, TreeError> {
        if !self.children.contains_key(a) {
            return Err(TreeError::UnknownVertex(a.to_string()));
        }
        if !self.children.contains_key(b) {
            return Err(TreeError::UnknownVertex(b.to_string()));
        }
        let mut cur = b;
        loop {
            if cur == a {
                return Ok(true);
            }
            match self.parent(cur) {
                Some(p) => cur = p,
                None => return Ok(false),
            }
        }
    }

    /// True for a non-root vertex with no children.
    pub fn is_leaf(&self, v: &str) -> bool {
        v != self.root && self.children(v).is_empty()
    }

    /// All leaves, in natural order.
    pub fn leaves(&self) -> Vec<String> {
        self.vertices().into_iter().filter(|v| self.is_leaf(v)).collect()
    }

    /// Path from the root to a leaf together with the padded sign vector:
    /// the signs of the non-root-adjacent path edges followed by `+1`.
    pub fn leaf_chain(&self, leaf: &str) -> Result<LeafChain, TreeError> {
        if !self.is_leaf(leaf) {
            return Err(TreeError::NotALeaf(leaf.to_string()));
        }
        let mut path = vec![leaf.to_string()];
        let mut cur = leaf;
        while let Some(p) = self.parent(cur) {
            path.push(p.to_string());
            cur = p;
        }
        path.reverse();
        let mut padded_signs = Vec::with_capacity(path.len() - 1);
        for w in path[1..].windows(2) {
            padded_signs.push(self.sign(&w[0], &w[1]).expect("validated sign"));
        }
        padded_signs.push(1);
        Ok(LeafChain { vertices: path, padded_signs })
    }

    /// Removes a leaf, its edge, and its sign (if any).
    pub fn prune_leaf(&self, leaf: &str) -> Result<SignedRootedTree, TreeError> {
        if !self.children.contains_key(leaf) {
            return Err(TreeError::UnknownVertex(leaf.to_string()));
        }
        if !self.is_leaf(leaf) {
            return Err(TreeError::NotALeaf(leaf.to_string()));
        }
        let mut out = self.clone();
        let p = out.parent.remove(leaf).expect("leaf has a parent");
        out.children.remove(leaf);
        out.children.get_mut(&p).unwrap().retain(|c| c != leaf);
        out.signs.remove(&edge_key(leaf, &p));
        Ok(out)
    }

    /// Canonical form: a nested-parenthesis code invariant under
    /// root-and-sign-preserving isomorphism.  Signed child subtrees are
    /// marked `+` or `-`; children of the root carry no mark.
    pub fn canonical_form(&self) -> String {
        self.code_of(&self.root)
    }

    fn code_of(&self, v: &str) -> String {
        let mut items: Vec<String> = self
            .children(v)
            .iter()
            .map(|c| {
                let mark = if v == self.root {
                    String::new()
                } else {
                    match self.sign(v, c).expect("validated sign") {
                        1 => "+".to_string(),
                        _ => "-".to_string(),
                    }
                };
                format!("{mark}{}", self.code_of(c))
            })
            .collect();
        items.sort();
        format!("({})", items.concat())
    }

    /// All root-fixing, sign-preserving automorphisms, as vertex maps.
    pub fn automorphisms(&self) -> Vec<BTreeMap<String, String>> {
        self.isomorphisms_between(&self.root, &self.root)
    }

    /// Group order computed from the child-multiset product formula,
    /// without enumerating the automorphisms.
    pub fn automorphism_order(&self) -> u128 {
        fn factorial(k: u128) -> u128 {
            (1..=k).product::<u128>().max(1)
        }
        fn order_at(t: &SignedRootedTree, v: &str) -> u128 {
            let mut classes: BTreeMap<(String, String), Vec<&String>> = BTreeMap::new();
            for c in t.children(v) {
                let mark = if v == t.root {
                    String::new()
                } else {
                    t.sign(v, c).unwrap().to_string()
                };
                classes.entry((mark, t.code_of(c))).or_default().push(c);
            }
            let mut ord: u128 = 1;
            for members in classes.values() {
                ord *= factorial(members.len() as u128);
                for m in members {
                    ord *= order_at(t, m);
                }
            }
            ord
        }
        order_at(self, &self.root)
    }

    /// All isomorphisms from the subtree at `u` onto the subtree at `v`
    /// matching marks and signs; empty unless the codes agree.
    fn isomorphisms_between(&self, u: &str, v: &str) -> Vec<BTreeMap<String, String>> {
        if self.code_of(u) != self.code_of(v) {
            return Vec::new();
        }
        let class_of = |parent: &str, c: &str| -> (String, String) {
            let mark = if parent == self.root {
                String::new()
            } else {
                self.sign(parent, c).unwrap().to_string()
            };
            (mark, self.code_of(c))
        };
        let mut maps = vec![BTreeMap::from([(u.to_string(), v.to_string())])];
        let mut classes: BTreeMap<(String, String), (Vec<String>, Vec<String>)> = BTreeMap::new();
        for c in self.children(u) {
            classes.entry(class_of(u, c)).or_default().0.push(c.clone());
        }
        for c in self.children(v) {
            classes.entry(class_of(v, c)).or_default().1.push(c.clone());
        }
        for (us, vs) in classes.values() {
            debug_assert_eq!(us.len(), vs.len(), "equal codes imply matching classes");
            let mut arrangements: Vec<Vec<BTreeMap<String, String>>> = Vec::new();
            permute_assignments(us, vs, &mut Vec::new(), &mut |pairs| {
                let mut combos: Vec<BTreeMap<String, String>> = vec![BTreeMap::new()];
                for (a, b) in pairs {
                    let subs = self.isomorphisms_between(a, b);
                    let mut next = Vec::new();
                    for base in &combos {
                        for sub in &subs {
                            let mut m = base.clone();
                            m.extend(sub.clone());
                            next.push(m);
                        }
                    }
                    combos = next;
                }
                arrangements.push(combos);
            });
            let flat: Vec<BTreeMap<String, String>> =
                arrangements.into_iter().flatten().collect();
            let mut next = Vec::new();
            for base in &maps {
                for m in &flat {
                    let mut merged = base.clone();
                    merged.extend(m.clone());
                    next.push(merged);
                }
            }
            maps = next;
        }
        maps
    }

    /// Applies a vertex relabeling; `map` must be a bijection on names.
    pub fn relabeled(&self, map: &BTreeMap<String, String>) -> Result<SignedRootedTree, TreeError> {
        let get = |v: &str| -> Result<String, TreeError> {
            map.get(v).cloned().ok_or_else(|| TreeError::UnknownVertex(v.to_string()))
        };
        let mut edges = Vec::new();
        for (v, p) in &self.parent {
            edges.push((get(p)?, get(v)?));
        }
        let mut signs = BTreeMap::new();
        for ((a, b), &s) in &self.signs {
            signs.insert(edge_key(&get(a)?, &get(b)?), s);
        }
        Self::new(&get(&self.root)?, &edges, &signs)
    }

    /// Uniform-ish random tree for tests: each vertex attaches to an
    /// earlier one, then names are shuffled.
    pub fn random<R: Rng>(rng: &mut R, n_vertices: usize) -> SignedRootedTree {
        assert!(n_vertices >= 1);
        let names: Vec<String> = (0..n_vertices).map(|i| format!("v{i}")).collect();
        let mut edges = Vec::new();
        let mut signs = BTreeMap::new();
        for i in 1..n_vertices {
            let p = rng.gen_range(0..i);
            edges.push((names[p].clone(), names[i].clone()));
            if p != 0 {
                let s = if rng.gen_bool(0.5) { 1 } else { -1 };
                signs.insert(edge_key(&names[p], &names[i]), s);
            }
        }
        Self::new(&names[0], &edges, &signs).expect("construction is valid")
    }

    /// Every parent-pointer tree on `n` vertices (vertex `i` attaching to
    /// some earlier vertex) crossed with every sign assignment, for all
    /// `1 <= n <= max_vertices`.  Covers every isomorphism class.
    pub fn enumerate_all(max_vertices: usize) -> Vec<SignedRootedTree> {
        let mut out = Vec::new();
        for n in 1..=max_vertices {
            let mut parents = vec![0usize; n];
            enumerate_parents(n, 1, &mut parents, &mut out);
        }
        out
    }

    /// Parses the canonical JSON interchange format.
    pub fn from_json(text: &str) -> Result<Self, TreeError> {
        let raw: TreeJson = serde_json::from_str(text).map_err(|e| TreeError::Json(e.to_string()))?;
        let edges: Vec<(String, String)> =
            raw.edges.into_iter().map(|[a, b]| (a, b)).collect();
        let mut signs = BTreeMap::new();
        for (key, s) in raw.signs {
            let (a, b) = key
                .split_once('-')
                .ok_or_else(|| TreeError::Json(format!("bad sign key `{key}`")))?;
            if s != 1 && s != -1 {
                return Err(TreeError::BadSignValue(key.clone(), s));
            }
            signs.insert(edge_key(a, b), s as i8);
        }
        Self::new(&raw.root, &edges, &signs)
    }

    /// Canonical JSON: edges as sorted pairs in natural order, signs keyed
    /// `a-b`.  Re-serializing a parse of this output is byte-identical.
    pub fn to_json(&self) -> String {
        let mut edges: Vec<[String; 2]> = self
            .parent
            .iter()
            .map(|(v, p)| {
                let (a, b) = edge_key(v, p);
                [a, b]
            })
            .collect();
        edges.sort_by(|x, y| {
            natural_cmp(&x[0], &y[0]).then_with(|| natural_cmp(&x[1], &y[1]))
        });
        let signs: BTreeMap<String, i64> = self
            .signs
            .iter()
            .map(|((a, b), &s)| (format!("{a}-{b}"), s as i64))
            .collect();
        let val = TreeJson { root: self.root.clone(), edges, signs };
        serde_json::to_string(&val).expect("tree serializes")
    }
}

/// Root-to-leaf path and its padded sign vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LeafChain {
    /// Vertices from the root (inclusive) down to the leaf.
    pub vertices: Vec<String>,
    /// Signs of the non-root-adjacent path edges, padded with a final `+1`;
    /// the length equals the leaf's depth.
    pub padded_signs: Vec<i8>,
}

#[derive(Serialize, Deserialize)]
struct TreeJson {
    root: String,
    edges: Vec<[String; 2]>,
    signs: BTreeMap<String, i64>,
}

/// Calls `f` with every bijection pairing `us` against `vs`.
fn permute_assignments<'a>(
    us: &'a [String],
    vs: &'a [String],
    acc: &mut Vec<(&'a str, &'a str)>,
    f: &mut impl FnMut(&[(&str, &str)]),
) {
    if acc.len() == us.len() {
        f(acc);
        return;
    }
    let i = acc.len();
    for v in vs {
        if acc.iter().any(|(_, b)| b == v) {
            continue;
        }
        acc.push((&us[i], v));
        permute_assignments(us, vs, acc, f);
        acc.pop();
    }
}

fn enumerate_parents(n: usize, next: usize, parents: &mut Vec<usize>, out: &mut Vec<SignedRootedTree>) {
    if next == n {
        // Attach signs to every non-root-adjacent edge in all ways.
        let signed_edges: Vec<usize> = (1..n).filter(|&i| parents[i] != 0).collect();
        for mask in 0..(1u32 << signed_edges.len()) {
            let mut edges = Vec::new();
            let mut signs = BTreeMap::new();
            for i in 1..n {
                edges.push((parents[i].to_string(), i.to_string()));
            }
            for (bit, &i) in signed_edges.iter().enumerate() {
                let s = if mask >> bit & 1 == 1 { 1 } else { -1 };
                signs.insert(edge_key(&parents[i].to_string(), &i.to_string()), s);
            }
            out.push(SignedRootedTree::new("0", &edges, &signs).expect("valid enumeration"));
        }
        return;
    }
    for p in 0..next {
        parents[next] = p;
        enumerate_parents(n, next + 1, parents, out);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn a4(s12: i8, s23: i8) -> SignedRootedTree {
        SignedRootedTree::linear(3, &[s12, s23]).unwrap()
    }

    #[test]
    fn singleton_tree_is_valid() {
        let t = SignedRootedTree::new("r", &[], &BTreeMap::new()).unwrap();
        assert_eq!(t.len(), 1);
        assert!(t.leaves().is_empty());
        assert_eq!(t.canonical_form(), "()");
    }

    #[test]
    fn linear_tree_canonical_form() {
        // Root 0, chain 0-1-2-3 with signs + on 1-2 and - on 2-3.
        let t = a4(1, -1);
        assert_eq!(t.canonical_form(), "((+(-())))");
        let t = a4(-1, 1);
        assert_eq!(t.canonical_form(), "((-(+())))");
    }

    #[test]
    fn canonical_form_separates_signs() {
        assert_ne!(a4(1, 1).canonical_form(), a4(1, -1).canonical_form());
    }

    #[test]
    fn validation_rejects_missing_and_extra_signs() {
        let edges = vec![("0".into(), "1".into()), ("1".into(), "2".into())];
        match SignedRootedTree::new("0", &edges, &BTreeMap::new()) {
            Err(TreeError::MissingSign(a, b)) => assert_eq!((a.as_str(), b.as_str()), ("1", "2")),
            other => panic!("expected MissingSign, got {other:?}"),
        }
        let bad = BTreeMap::from([(edge_key("0", "1"), 1i8), (edge_key("1", "2"), 1i8)]);
        match SignedRootedTree::new("0", &edges, &bad) {
            Err(TreeError::UnexpectedSign(k)) => assert_eq!(k, "0-1"),
            other => panic!("expected UnexpectedSign, got {other:?}"),
        }
    }

    #[test]
    fn validation_rejects_cycles_and_disconnected() {
        let cyc = vec![
            ("0".into(), "1".into()),
            ("1".into(), "2".into()),
            ("2".into(), "0".into()),
        ];
        assert!(matches!(
            SignedRootedTree::new("0", &cyc, &BTreeMap::new()),
            Err(TreeError::NotATree(_))
        ));
        let disc = vec![("a".into(), "b".into())];
        assert!(matches!(
            SignedRootedTree::new("r", &disc, &BTreeMap::new()),
            Err(TreeError::NotATree(_))
        ));
    }

    #[test]
    fn poset_and_chain() {
        let t = a4(1, -1);
        assert!(t.poset_leq("0", "3").unwrap());
        assert!(t.poset_leq("1", "3").unwrap());
        assert!(!t.poset_leq("3", "1").unwrap());
        let chain = t.leaf_chain("3").unwrap();
        assert_eq!(chain.vertices, vec!["0", "1", "2", "3"]);
        assert_eq!(chain.padded_signs, vec![1, -1, 1]);
    }

    #[test]
    fn chain_of_depth_one_leaf_pads_to_plus_one() {
        let edges = vec![("r".into(), "a".into()), ("r".into(), "b".into())];
        let t = SignedRootedTree::new("r", &edges, &BTreeMap::new()).unwrap();
        let chain = t.leaf_chain("a").unwrap();
        assert_eq!(chain.vertices, vec!["r", "a"]);
        assert_eq!(chain.padded_signs, vec![1]);
    }

    #[test]
    fn prune_removes_leaf_edge_and_sign() {
        let t = a4(1, -1);
        let pruned = t.prune_leaf("3").unwrap();
        assert_eq!(pruned.len(), 3);
        assert_eq!(pruned.sign("2", "3"), None);
        assert_eq!(pruned.canonical_form(), "((+()))");
        assert!(matches!(t.prune_leaf("1"), Err(TreeError::NotALeaf(_))));
        assert!(matches!(t.prune_leaf("0"), Err(TreeError::NotALeaf(_))));
    }

    #[test]
    fn automorphisms_of_star_and_signed_star() {
        // Root with three unsigned children: full symmetric group S3.
        let edges = vec![
            ("r".into(), "a".into()),
            ("r".into(), "b".into()),
            ("r".into(), "c".into()),
        ];
        let t = SignedRootedTree::new("r", &edges, &BTreeMap::new()).unwrap();
        assert_eq!(t.automorphism_order(), 6);
        assert_eq!(t.automorphisms().len(), 6);

        // Depth-two: signs break the symmetry of the grandchildren.
        let edges = vec![
            ("r".into(), "a".into()),
            ("a".into(), "b".into()),
            ("a".into(), "c".into()),
        ];
        let signs = BTreeMap::from([(edge_key("a", "b"), 1i8), (edge_key("a", "c"), -1i8)]);
        let t = SignedRootedTree::new("r", &edges, &signs).unwrap();
        assert_eq!(t.automorphism_order(), 1);
        let same = BTreeMap::from([(edge_key("a", "b"), 1i8), (edge_key("a", "c"), 1i8)]);
        let t = SignedRootedTree::new("r", &edges, &same).unwrap();
        assert_eq!(t.automorphism_order(), 2);
        assert_eq!(t.automorphisms().len(), 2);
    }

    #[test]
    fn automorphisms_preserve_structure() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..40 {
            let t = SignedRootedTree::random(&mut rng, 6);
            for a in t.automorphisms() {
                let relabeled = t.relabeled(&a).unwrap();
                assert_eq!(relabeled, t, "automorphism must fix the tree");
            }
        }
    }

    #[test]
    fn json_round_trip_is_byte_exact() {
        let text = r#"{"root": "r", "edges": [["r","a"], ["a","b"]], "signs": {"a-b": -1}}"#;
        let t = SignedRootedTree::from_json(text).unwrap();
        let canon = t.to_json();
        let t2 = SignedRootedTree::from_json(&canon).unwrap();
        assert_eq!(t2.to_json(), canon);
        assert_eq!(t2, t);
        assert_eq!(
            canon,
            r#"{"root":"r","edges":[["a","b"],["a","r"]],"signs":{"a-b":-1}}"#
        );
    }

    #[test]
    fn json_rejects_bad_signs() {
        let text = r#"{"root": "r", "edges": [["r","a"], ["a","b"]], "signs": {"a-b": 2}}"#;
        assert!(matches!(
            SignedRootedTree::from_json(text),
            Err(TreeError::BadSignValue(_, 2))
        ));
    }

    #[test]
    fn enumeration_counts() {
        // Parent-pointer trees on n vertices: (n-1)! shapes, each crossed
        // with sign choices on non-root-adjacent edges.
        let all = SignedRootedTree::enumerate_all(4);
        let n1 = 1; // ()
        let n2 = 1; // 0-1
        let n3 = 1 + 2; // parents (0,0) and (0,1) with 2 signs
        let n4: usize = 1 + 2 + 2 + 2 + 4 + 4; // six parent arrays
        assert_eq!(all.len(), n1 + n2 + n3 + n4);
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;
        use rand::Rng;

        fn arb_tree() -> impl Strategy<Value = SignedRootedTree> {
            (1usize..=7, any::<u64>()).prop_map(|(n, seed)| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                SignedRootedTree::random(&mut rng, n)
            })
        }

        proptest! {
            #[test]
            fn canonical_form_is_relabeling_invariant(t in arb_tree(), seed in any::<u64>()) {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let mut names = t.vertices();
                let mut shuffled = names.clone();
                for i in (1..shuffled.len()).rev() {
                    let j = rng.gen_range(0..=i);
                    shuffled.swap(i, j);
                }
                for s in shuffled.iter_mut() {
                    *s = format!("w_{s}");
                }
                let map: BTreeMap<String, String> =
                    names.drain(..).zip(shuffled).collect();
                let relabeled = t.relabeled(&map).unwrap();
                prop_assert_eq!(relabeled.canonical_form(), t.canonical_form());
            }

            #[test]
            fn aut_order_matches_enumeration(t in arb_tree()) {
                prop_assert_eq!(t.automorphisms().len() as u128, t.automorphism_order());
            }

            #[test]
            fn prune_then_reattach_is_identity(t in arb_tree()) {
                prop_assume!(t.len() >= 2);
                let leaf = t.leaves()[0].clone();
                let parent = t.parent(&leaf).unwrap().to_string();
                let sign = t.sign(&leaf, &parent);
                let pruned = t.prune_leaf(&leaf).unwrap();
                // Re-attach with the same parent and sign.
                let mut edges: Vec<(String, String)> = pruned
                    .vertices()
                    .iter()
                    .filter_map(|v| pruned.parent(v).map(|p| (p.to_string(), v.clone())))
                    .collect();
                edges.push((parent.clone(), leaf.clone()));
                let mut signs = BTreeMap::new();
                for v in pruned.vertices() {
                    if let Some(p) = pruned.parent(&v) {
                        if let Some(s) = pruned.sign(&v, p) {
                            signs.insert(edge_key(&v, p), s);
                        }
                    }
                }
                if let Some(s) = sign {
                    signs.insert(edge_key(&leaf, &parent), s);
                }
                let rebuilt = SignedRootedTree::new(t.root(), &edges, &signs).unwrap();
                prop_assert_eq!(rebuilt, t);
            }

            #[test]
            fn chain_signs_have_depth_length(t in arb_tree()) {
                for leaf in t.leaves() {
                    let chain = t.leaf_chain(&leaf).unwrap();
                    prop_assert_eq!(chain.padded_signs.len(), t.depth(&leaf).unwrap());
                    prop_assert_eq!(chain.padded_signs.last(), Some(&1i8));
                    prop_assert_eq!(chain.vertices.first().map(|s| s.as_str()), Some(t.root()));
                }
            }
        }
    }
}

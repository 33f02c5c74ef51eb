//! Front models indexed by signed rooted trees.
//!
//! # Construction
//! The generator family is `h_0 = 0`, `h_i = x1 - h_{i-1}(x2..xi)^2`, with
//! shifted members `h_{i,j} = h_{i-j}(x_{j+1}..x_i)`.  A model piece is a
//! graph hypersurface `{x0 = g}` over a quadrant carved out by inequality
//! polynomials, where `g` is a signed square of a generator.  A front for a
//! signed rooted tree places one piece per non-root vertex: the piece for a
//! vertex at depth `m` is the sign model of index `m - 1` written in the
//! coordinates of the vertex's root path, so it only involves coordinates
//! of vertices below it.
//!
//! # Contents
//! - [`HFamily`]: cached generator polynomials.
//! - [`build_gamma`], [`build_gamma_delta`], [`build_gamma_eps`]: the flat,
//!   quadrant, and sign model pieces.
//! - [`build_front`], [`build_extended_front`]: assembly over a tree.
//! - [`sample_mesh`]: exact-grid sampling for OBJ export.
//! - [`build_conormal_model`]: zero section plus positive conormal pieces
//!   with polynomial parametrizations.
//! - [`tilt_map`]: the shear that flattens the first parabolic direction.

use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet};

use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::poly::{format_rat, natural_cmp, Polynomial, Rat, RationalPoint};
use crate::trees::SignedRootedTree;

/// Errors reported by front construction, parsing, and sampling.
#[derive(Debug, Error)]
pub enum FrontError {
    /// A piece index outside `0..=n`.
    #[error("piece index {i} out of range for dimension {n}")]
    IndexOutOfRange { i: usize, n: usize },
    /// A sign vector with too few entries for the requested piece.
    #[error("sign vector has {got} entries, need at least {needed}")]
    SignsTooShort { needed: usize, got: usize },
    /// A point evaluation is missing an ambient coordinate.
    #[error("point does not bind coordinate `{0}`")]
    MissingCoordinate(String),
    /// Mesh export needs ambient dimension at most three.
    #[error("ambient dimension {0} too large for mesh export")]
    AmbientTooLarge(usize),
    /// Malformed front JSON.
    #[error("front JSON: {0}")]
    Json(String),
}

/// The reserved coordinate name `x<k>`.
pub fn xvar(k: usize) -> String {
    format!("x{k}")
}

/// Chart coordinate name `u<k>` for quadrant sampling.
fn uvar(k: usize) -> String {
    format!("u{k}")
}

/// Coordinate name for a tree vertex.
pub fn vertex_coord(vertex: &str) -> String {
    format!("x{vertex}")
}

/// Momentum coordinate paired with a base coordinate.
pub fn momentum_var(x: &str) -> String {
    match x.strip_prefix('x') {
        Some(rest) => format!("p{rest}"),
        None => format!("p_{x}"),
    }
}

fn rat_int(n: i64) -> Rat {
    Rat::from_integer(n.into())
}

/// An ordered list of signs, each `+1` or `-1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignVector {
    entries: Vec<i8>,
}

impl SignVector {
    /// Wraps a sign list, checking every entry is `1` or `-1`.
    pub fn new(entries: Vec<i8>) -> Self {
        assert!(entries.iter().all(|&s| s == 1 || s == -1), "signs must be +1 or -1");
        SignVector { entries }
    }

    /// Number of entries.
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    /// True when empty.
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// The sign at an index.
    pub fn get(&self, k: usize) -> i8 {
        self.entries[k]
    }

    /// All `2^len` sign vectors of a given length, in a fixed order.
    pub fn all(len: usize) -> Vec<SignVector> {
        (0..1u32 << len)
            .map(|mask| {
                SignVector::new(
                    (0..len).map(|k| if mask >> k & 1 == 0 { 1 } else { -1 }).collect(),
                )
            })
            .collect()
    }
}

/// Cache of the generator polynomials `h_i` and their squares.
pub struct HFamily {
    hs: RefCell<BTreeMap<usize, Polynomial>>,
    squares: RefCell<BTreeMap<usize, Polynomial>>,
}

impl Default for HFamily {
    fn default() -> Self {
        Self::new()
    }
}

impl HFamily {
    /// An empty cache; generators are computed on demand.
    pub fn new() -> Self {
        HFamily { hs: RefCell::new(BTreeMap::new()), squares: RefCell::new(BTreeMap::new()) }
    }

    /// Warms the cache for all `h_0..h_n`.
    pub fn with_bound(n: usize) -> Self {
        let fam = Self::new();
        fam.h(n);
        fam
    }

    /// The generator `h_i` in variables `x1..xi` (`h_0 = 0`).
    pub fn h(&self, i: usize) -> Polynomial {
        if let Some(p) = self.hs.borrow().get(&i) {
            return p.clone();
        }
        let result = if i == 0 {
            Polynomial::zero()
        } else {
            let shifted = self.shift(&self.h(i - 1), 1);
            &Polynomial::var("x1") - &(&shifted * &shifted)
        };
        self.hs.borrow_mut().insert(i, result.clone());
        result
    }

    /// The shifted generator `h_{i,j} = h_{i-j}(x_{j+1}..x_i)` for `j <= i`.
    pub fn h_shift(&self, i: usize, j: usize) -> Polynomial {
        assert!(j <= i, "shift index {j} exceeds {i}");
        self.shift(&self.h(i - j), j)
    }

    /// The cached square `h_i^2`.
    pub fn h_squared(&self, i: usize) -> Polynomial {
        if let Some(p) = self.squares.borrow().get(&i) {
            return p.clone();
        }
        let h = self.h(i);
        let result = &h * &h;
        self.squares.borrow_mut().insert(i, result.clone());
        result
    }

    fn shift(&self, p: &Polynomial, offset: usize) -> Polynomial {
        if offset == 0 {
            return p.clone();
        }
        let map: BTreeMap<String, String> = p
            .vars()
            .iter()
            .map(|v| {
                let k: usize = v.strip_prefix('x').and_then(|s| s.parse().ok()).unwrap_or_else(
                    || panic!("generator variable `{v}` is not of the form x<k>"),
                );
                (v.clone(), xvar(k + offset))
            })
            .collect();
        p.rename_vars(&map)
    }
}

/// Builds a generator cache warmed up to dimension `n`.
pub fn build_h_family(n: usize) -> HFamily {
    HFamily::with_bound(n)
}

/// One graph piece of a front: `{graph_coord = graph_eq}` over the region
/// where every inequality polynomial is `<= 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct FrontPiece {
    /// Tree vertex or model index labelling the piece.
    pub label: String,
    /// The coordinate graphed over the rest.
    pub graph_coord: String,
    /// Graph value; never involves `graph_coord`.
    pub graph_eq: Polynomial,
    /// Quadrant constraints, each required `<= 0`.
    pub inequalities: Vec<Polynomial>,
    /// Positive side is increasing `graph_coord`.
    pub coorientation: i8,
    /// Ambient coordinates, including `graph_coord`.
    pub ambient_vars: Vec<String>,
    /// Interior point: satisfies the equation and strict inequalities.
    pub witness: RationalPoint,
    /// Maps each constrained coordinate to its expression in the chart
    /// variables `u1..`, under which inequality `j` becomes `-u_{j+1}`.
    pub quadrant_chart: Vec<(String, Polynomial)>,
}

impl FrontPiece {
    /// The defining polynomial `graph_coord - graph_eq`.
    pub fn equation(&self) -> Polynomial {
        &Polynomial::var(&self.graph_coord) - &self.graph_eq
    }

    /// True when the point lies on the piece (equation and inequalities).
    pub fn contains(&self, point: &RationalPoint) -> Result<bool, FrontError> {
        for v in &self.ambient_vars {
            if !point.contains_key(v) {
                return Err(FrontError::MissingCoordinate(v.clone()));
            }
        }
        let lhs = point.get(&self.graph_coord).expect("bound above");
        let rhs = self.graph_eq.evaluate(point).expect("ambient bound");
        if *lhs != rhs {
            return Ok(false);
        }
        for ineq in &self.inequalities {
            if ineq.evaluate(point).expect("ambient bound").is_positive() {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Base coordinates not pinned by the quadrant chart.
    fn free_vars(&self) -> Vec<String> {
        let charted: BTreeSet<&String> = self.quadrant_chart.iter().map(|(v, _)| v).collect();
        self.ambient_vars
            .iter()
            .filter(|v| **v != self.graph_coord && !charted.contains(v))
            .cloned()
            .collect()
    }

    /// Rewrites the piece in new coordinates and a new ambient list.
    fn renamed(&self, map: &BTreeMap<String, String>, ambient: Vec<String>, label: String) -> FrontPiece {
        let rename = |v: &String| map.get(v).cloned().unwrap_or_else(|| v.clone());
        let graph_coord = rename(&self.graph_coord);
        let graph_eq = self.graph_eq.rename_vars(map);
        let inequalities: Vec<Polynomial> =
            self.inequalities.iter().map(|p| p.rename_vars(map)).collect();
        let quadrant_chart: Vec<(String, Polynomial)> =
            self.quadrant_chart.iter().map(|(v, e)| (rename(v), e.clone())).collect();
        let mut witness: RationalPoint =
            self.witness.iter().map(|(v, c)| (rename(v), c.clone())).collect();
        for v in &ambient {
            witness.entry(v.clone()).or_insert_with(Rat::zero);
        }
        FrontPiece {
            label,
            graph_coord,
            graph_eq,
            inequalities,
            coorientation: self.coorientation,
            ambient_vars: ambient,
            witness,
            quadrant_chart,
        }
    }
}

/// Assembles a piece, deriving its interior witness from the chart at
/// `u = 1` and asserting the defining invariants.
fn finish_piece(
    label: String,
    graph_coord: String,
    graph_eq: Polynomial,
    inequalities: Vec<Polynomial>,
    quadrant_chart: Vec<(String, Polynomial)>,
    ambient_vars: Vec<String>,
) -> FrontPiece {
    assert!(
        !graph_eq.support().contains(&graph_coord),
        "graph value must not involve the graph coordinate"
    );
    let mut ones: RationalPoint = RationalPoint::new();
    for (_, expr) in &quadrant_chart {
        for u in expr.support() {
            ones.insert(u, Rat::from_integer(1.into()));
        }
    }
    let mut witness = RationalPoint::new();
    for (v, expr) in &quadrant_chart {
        witness.insert(v.clone(), expr.evaluate(&ones).expect("chart uses only u variables"));
    }
    for v in &ambient_vars {
        if *v != graph_coord {
            witness.entry(v.clone()).or_insert_with(Rat::zero);
        }
    }
    let value = graph_eq.evaluate(&witness).expect("witness binds the base");
    witness.insert(graph_coord.clone(), value);
    for ineq in &inequalities {
        let val = ineq.evaluate(&witness).expect("witness binds the base");
        assert!(val.is_negative(), "witness must satisfy strict inequalities");
    }
    FrontPiece {
        label,
        graph_coord,
        graph_eq,
        inequalities,
        coorientation: 1,
        ambient_vars,
        witness,
        quadrant_chart,
    }
}

/// The unrestricted graph piece `{x0 = h_i^2}` in ambient `x0..xn`.
pub fn build_gamma(n: usize, i: usize) -> Result<FrontPiece, FrontError> {
    if i > n {
        return Err(FrontError::IndexOutOfRange { i, n });
    }
    let fam = HFamily::new();
    let ambient: Vec<String> = (0..=n).map(xvar).collect();
    Ok(finish_piece(i.to_string(), xvar(0), fam.h_squared(i), Vec::new(), Vec::new(), ambient))
}

/// The quadrant piece `{x0 = d0 h_i^2}` over `d_{j+1} h_{i,j} <= 0`.
pub fn build_gamma_delta(n: usize, i: usize, delta: &SignVector) -> Result<FrontPiece, FrontError> {
    if i > n {
        return Err(FrontError::IndexOutOfRange { i, n });
    }
    if delta.len() < i + 1 {
        return Err(FrontError::SignsTooShort { needed: i + 1, got: delta.len() });
    }
    let fam = HFamily::new();
    let graph_eq = fam.h_squared(i).scale(&rat_int(delta.get(0) as i64));
    let inequalities: Vec<Polynomial> =
        (0..i).map(|j| fam.h_shift(i, j).scale(&rat_int(delta.get(j + 1) as i64))).collect();
    let mut chart = Vec::new();
    for j in 0..i {
        let head = Polynomial::var(&uvar(j + 1)).scale(&rat_int(-(delta.get(j + 1) as i64)));
        let expr = if j + 1 < i {
            &head + &Polynomial::var(&uvar(j + 2)).pow(2)
        } else {
            head
        };
        chart.push((xvar(j + 1), expr));
    }
    let ambient: Vec<String> = (0..=n).map(xvar).collect();
    Ok(finish_piece(i.to_string(), xvar(0), graph_eq, inequalities, chart, ambient))
}

/// The sign-scaled substitution `x_j -> e_j x_j` on `x1..xn`.
pub fn sigma_flips(eps: &SignVector, n: usize) -> BTreeSet<String> {
    (1..=n.min(eps.len().saturating_sub(1))).filter(|&m| eps.get(m) == -1).map(xvar).collect()
}

/// The sign model piece `{x0 = e0 (h_i o sigma)^2}` over the inequalities
/// `e_j e_{j+1} (h_{i,j} o sigma) <= 0`; its data only depends on
/// `e_0..e_{i-1}`.
pub fn build_gamma_eps(n: usize, i: usize, eps: &SignVector) -> Result<FrontPiece, FrontError> {
    if i > n {
        return Err(FrontError::IndexOutOfRange { i, n });
    }
    if eps.len() < i + 1 {
        return Err(FrontError::SignsTooShort { needed: i + 1, got: eps.len() });
    }
    let fam = HFamily::new();
    let flips = sigma_flips(eps, i);
    let twisted = |j: usize| fam.h_shift(i, j).flip_vars(&flips);
    let h0 = twisted(0);
    let graph_eq = (&h0 * &h0).scale(&rat_int(eps.get(0) as i64));
    let inequalities: Vec<Polynomial> = (0..i)
        .map(|j| twisted(j).scale(&rat_int((eps.get(j) * eps.get(j + 1)) as i64)))
        .collect();
    let mut chart = Vec::new();
    for j in 0..i {
        let head = Polynomial::var(&uvar(j + 1)).scale(&rat_int(-(eps.get(j) as i64)));
        let expr = if j + 1 < i {
            &head
                + &Polynomial::var(&uvar(j + 2))
                    .pow(2)
                    .scale(&rat_int(eps.get(j + 1) as i64))
        } else {
            head
        };
        chart.push((xvar(j + 1), expr));
    }
    let ambient: Vec<String> = (0..=n).map(xvar).collect();
    Ok(finish_piece(i.to_string(), xvar(0), graph_eq, inequalities, chart, ambient))
}

/// A finite union of graph pieces indexed by the non-root vertices.
#[derive(Debug, Clone, PartialEq)]
pub struct Front {
    /// The indexing tree.
    pub tree: SignedRootedTree,
    /// Coordinates `x<vertex>` for non-root vertices, in natural order.
    pub ambient_vars: Vec<String>,
    /// One piece per non-root vertex, sorted by vertex.
    pub pieces: Vec<FrontPiece>,
}

impl Front {
    /// The piece labelled by a vertex.
    pub fn piece(&self, vertex: &str) -> Option<&FrontPiece> {
        self.pieces.iter().find(|p| p.label == vertex)
    }

    /// Vertices whose piece contains the point.
    pub fn membership(&self, point: &RationalPoint) -> Result<BTreeSet<String>, FrontError> {
        let mut out = BTreeSet::new();
        for piece in &self.pieces {
            if piece.contains(point)? {
                out.insert(piece.label.clone());
            }
        }
        Ok(out)
    }

    /// Canonical JSON: tree, ambient coordinates, then per-vertex pieces
    /// with polynomial strings and a rational witness.
    pub fn to_json(&self) -> String {
        let pieces: Vec<PieceJson> = self
            .pieces
            .iter()
            .map(|p| PieceJson {
                vertex: p.label.clone(),
                graph_coord: p.graph_coord.clone(),
                graph_eq: p.graph_eq.to_string(),
                inequalities: p.inequalities.iter().map(|q| q.to_string()).collect(),
                witness: p.witness.iter().map(|(v, c)| (v.clone(), format_rat(c))).collect(),
            })
            .collect();
        let tree: serde_json::Value =
            serde_json::from_str(&self.tree.to_json()).expect("tree JSON is valid");
        let val = FrontJson { tree, ambient_vars: self.ambient_vars.clone(), pieces };
        serde_json::to_string_pretty(&val).expect("front serializes")
    }

    /// Parses front JSON by rebuilding from the embedded tree and checking
    /// the listed pieces match the reconstruction exactly.
    pub fn from_json(text: &str) -> Result<Front, FrontError> {
        let raw: FrontJson =
            serde_json::from_str(text).map_err(|e| FrontError::Json(e.to_string()))?;
        let tree = SignedRootedTree::from_json(&raw.tree.to_string())
            .map_err(|e| FrontError::Json(e.to_string()))?;
        let front = build_front(&tree);
        if raw.ambient_vars != front.ambient_vars {
            return Err(FrontError::Json("ambient coordinates do not match the tree".into()));
        }
        for spec in &raw.pieces {
            let piece = front
                .piece(&spec.vertex)
                .ok_or_else(|| FrontError::Json(format!("unknown vertex `{}`", spec.vertex)))?;
            let eq = Polynomial::parse(&spec.graph_eq)
                .map_err(|e| FrontError::Json(e.to_string()))?;
            if eq != piece.graph_eq
                || spec.graph_coord != piece.graph_coord
                || spec.inequalities.len() != piece.inequalities.len()
            {
                return Err(FrontError::Json(format!(
                    "piece `{}` does not match its tree reconstruction",
                    spec.vertex
                )));
            }
            for (text, built) in spec.inequalities.iter().zip(&piece.inequalities) {
                let p =
                    Polynomial::parse(text).map_err(|e| FrontError::Json(e.to_string()))?;
                if p != *built {
                    return Err(FrontError::Json(format!(
                        "inequality of piece `{}` does not match",
                        spec.vertex
                    )));
                }
            }
        }
        Ok(front)
    }
}

#[derive(Serialize, Deserialize)]
struct PieceJson {
    vertex: String,
    graph_coord: String,
    graph_eq: String,
    inequalities: Vec<String>,
    witness: BTreeMap<String, String>,
}

#[derive(Serialize, Deserialize)]
struct FrontJson {
    tree: serde_json::Value,
    ambient_vars: Vec<String>,
    pieces: Vec<PieceJson>,
}

/// Root path of a vertex plus its padded sign vector (path-edge signs with
/// a final `+1`), the data selecting the vertex's local model.
fn padded_path(tree: &SignedRootedTree, vertex: &str) -> (Vec<String>, Vec<i8>) {
    let mut path = vec![vertex.to_string()];
    let mut cur = vertex.to_string();
    while let Some(p) = tree.parent(&cur) {
        path.push(p.to_string());
        cur = p.to_string();
    }
    path.reverse();
    let mut signs = Vec::new();
    for w in path[1..].windows(2) {
        signs.push(tree.sign(&w[0], &w[1]).expect("non-root-adjacent edges are signed"));
    }
    signs.push(1);
    (path, signs)
}

fn assemble(tree: &SignedRootedTree, extended: bool) -> Front {
    let mut vertices: Vec<String> =
        tree.vertices().into_iter().filter(|v| v != tree.root()).collect();
    vertices.sort_by(|a, b| natural_cmp(a, b));
    let mut ambient: Vec<String> = vertices.iter().map(|v| vertex_coord(v)).collect();
    ambient.sort_by(|a, b| natural_cmp(a, b));
    let mut pieces = Vec::new();
    for v in &vertices {
        let (path, signs) = padded_path(tree, v);
        let m = path.len() - 1;
        let local = if extended {
            build_gamma(m - 1, m - 1).expect("index in range")
        } else {
            build_gamma_eps(m - 1, m - 1, &SignVector::new(signs)).expect("padded signs fit")
        };
        let map: BTreeMap<String, String> =
            (0..m).map(|j| (xvar(j), vertex_coord(&path[j + 1]))).collect();
        pieces.push(local.renamed(&map, ambient.clone(), v.clone()));
    }
    Front { tree: tree.clone(), ambient_vars: ambient, pieces }
}

/// The front of a signed rooted tree: for each non-root vertex, the sign
/// model of its root path (padded with a final `+1`), graphed over the
/// coordinate of the path's first non-root vertex.
pub fn build_front(tree: &SignedRootedTree) -> Front {
    assemble(tree, false)
}

/// The extended front: the same assembly with unrestricted graph pieces
/// and no sign twisting (edge signs are ignored).
pub fn build_extended_front(tree: &SignedRootedTree) -> Front {
    assemble(tree, true)
}

/// A named polynomial substitution; unlisted variables pass through.
#[derive(Debug, Clone, PartialEq)]
pub struct CoordMap {
    /// Image polynomial per substituted variable.
    pub bindings: BTreeMap<String, Polynomial>,
}

impl CoordMap {
    /// The identity substitution.
    pub fn identity() -> Self {
        CoordMap { bindings: BTreeMap::new() }
    }

    /// Wraps a binding map.
    pub fn new(bindings: BTreeMap<String, Polynomial>) -> Self {
        CoordMap { bindings }
    }

    /// Applies the substitution to a polynomial.
    pub fn apply(&self, p: &Polynomial) -> Polynomial {
        p.substitute(&self.bindings)
    }

    /// Composition: `a.compose(&b).apply(p) == a.apply(&b.apply(p))`.
    pub fn compose(&self, inner: &CoordMap) -> CoordMap {
        let mut bindings = BTreeMap::new();
        for (v, img) in &inner.bindings {
            bindings.insert(v.clone(), self.apply(img));
        }
        for (v, img) in &self.bindings {
            bindings.entry(v.clone()).or_insert_with(|| img.clone());
        }
        CoordMap { bindings }
    }
}

/// The sign substitution `x0 -> e0 x0, x_j -> e_j x_j` on `x0..xn`.
pub fn sigma_hat_map(eps: &SignVector, n: usize) -> CoordMap {
    let mut bindings = BTreeMap::new();
    for k in 0..=n {
        if k < eps.len() && eps.get(k) == -1 {
            bindings.insert(xvar(k), Polynomial::var(&xvar(k)).scale(&rat_int(-1)));
        }
    }
    CoordMap::new(bindings)
}

/// The shear `(x0, x1) -> (x0 - e0 p1^2/4, x1 + e0 p1/2)` fixing all other
/// coordinates; its inverse is the same map with `-e0`.
pub fn tilt_map(eps0: i8, n: usize) -> CoordMap {
    assert!(n >= 1, "tilt needs at least one base coordinate");
    let p1 = Polynomial::var("p1");
    let quarter = Rat::new((-(eps0 as i64)).into(), 4.into());
    let half = Rat::new((eps0 as i64).into(), 2.into());
    let mut bindings = BTreeMap::new();
    bindings.insert(xvar(0), &Polynomial::var(&xvar(0)) + &(&p1 * &p1).scale(&quarter));
    bindings.insert(xvar(1), &Polynomial::var(&xvar(1)) + &p1.scale(&half));
    CoordMap::new(bindings)
}

/// Whether a Lagrangian piece is the zero section or a conormal sheet.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConormalKind {
    /// The zero section `p = 0`.
    ZeroSection,
    /// The positive conormal of a cooriented graph piece.
    PositiveConormal,
}

/// A parametrized Lagrangian piece in `(x, p)` coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct ConormalPiece {
    /// Vertex label (root for the zero section).
    pub label: String,
    /// Zero section or conormal sheet.
    pub kind: ConormalKind,
    /// Parameter names: base coordinates, plus `lambda` for conormals.
    pub params: Vec<String>,
    /// Target coordinates in order (all `x`, then all `p`), as polynomials
    /// in the parameters.
    pub parametrization: Vec<(String, Polynomial)>,
    /// Parameter-domain constraints, each `<= 0`.
    pub domain: Vec<Polynomial>,
}

impl ConormalPiece {
    /// Coefficients of `sum_v p_v dx_v` pulled back along the
    /// parametrization, one polynomial per parameter; all must vanish.
    pub fn liouville_residuals(&self) -> Vec<Polynomial> {
        let half = self.parametrization.len() / 2;
        let xs = &self.parametrization[..half];
        let ps = &self.parametrization[half..];
        self.params
            .iter()
            .map(|w| {
                let mut acc = Polynomial::zero();
                for ((_, xexpr), (_, pexpr)) in xs.iter().zip(ps) {
                    acc = &acc + &(pexpr * &xexpr.partial(w));
                }
                acc
            })
            .collect()
    }

    /// Rows of the parametrization Jacobian at a parameter point, one
    /// tangent vector per parameter, in the target coordinate order.
    pub fn tangent_frame(&self, point: &RationalPoint) -> Vec<Vec<Rat>> {
        self.params
            .iter()
            .map(|w| {
                self.parametrization
                    .iter()
                    .map(|(_, expr)| {
                        expr.partial(w).evaluate(point).expect("point binds the parameters")
                    })
                    .collect()
            })
            .collect()
    }
}

/// The zero-section piece over an ambient coordinate list.
pub fn zero_section(label: &str, ambient: &[String]) -> ConormalPiece {
    let mut parametrization = Vec::new();
    for v in ambient {
        parametrization.push((v.clone(), Polynomial::var(v)));
    }
    for v in ambient {
        parametrization.push((momentum_var(v), Polynomial::zero()));
    }
    ConormalPiece {
        label: label.to_string(),
        kind: ConormalKind::ZeroSection,
        params: ambient.to_vec(),
        parametrization,
        domain: Vec::new(),
    }
}

/// The positive conormal of a graph piece: `p = lambda d(graph_coord - g)`
/// with `lambda >= 0`, parametrized by the base coordinates and `lambda`.
pub fn conormal_of_piece(piece: &FrontPiece) -> ConormalPiece {
    let lambda = Polynomial::var("lambda");
    let mut params: Vec<String> =
        piece.ambient_vars.iter().filter(|v| **v != piece.graph_coord).cloned().collect();
    params.push("lambda".to_string());
    let mut parametrization = Vec::new();
    for v in &piece.ambient_vars {
        let expr = if *v == piece.graph_coord { piece.graph_eq.clone() } else { Polynomial::var(v) };
        parametrization.push((v.clone(), expr));
    }
    for v in &piece.ambient_vars {
        let expr = if *v == piece.graph_coord {
            lambda.clone()
        } else {
            &lambda * &piece.graph_eq.partial(v).scale(&rat_int(-1))
        };
        parametrization.push((momentum_var(v), expr));
    }
    let mut domain = piece.inequalities.clone();
    domain.push(lambda.scale(&rat_int(-1)));
    ConormalPiece {
        label: piece.label.clone(),
        kind: ConormalKind::PositiveConormal,
        params,
        parametrization,
        domain,
    }
}

/// The Lagrangian model of a tree: the zero section plus the positive
/// conormal of every front piece.
pub fn build_conormal_model(tree: &SignedRootedTree) -> Vec<ConormalPiece> {
    let front = build_front(tree);
    let mut out = vec![zero_section(tree.root(), &front.ambient_vars)];
    for piece in &front.pieces {
        out.push(conormal_of_piece(piece));
    }
    out
}

/// Mesh of one piece: exact-grid samples pushed to floating point.
#[derive(Debug, Clone)]
pub struct PieceMesh {
    /// Object name in the OBJ output.
    pub name: String,
    /// Vertex positions in ambient order, zero-padded to three axes.
    pub vertices: Vec<[f64; 3]>,
    /// Unit normals pointing toward increasing graph coordinate.
    pub normals: Vec<[f64; 3]>,
    /// Quad faces as vertex indices (base dimension two).
    pub faces: Vec<[usize; 4]>,
    /// Polyline segments (base dimension one).
    pub segments: Vec<[usize; 2]>,
}

/// A mesh per piece, exportable as OBJ.
#[derive(Debug, Clone)]
pub struct FrontMesh {
    /// Meshes in piece order.
    pub pieces: Vec<PieceMesh>,
}

impl FrontMesh {
    /// OBJ text: one named object per piece, `v`/`vn` per sample, quad
    /// faces or polylines depending on the base dimension.
    pub fn to_obj(&self) -> String {
        let mut out = String::new();
        let mut offset = 1usize;
        for piece in &self.pieces {
            out.push_str(&format!("o {}\n", piece.name));
            for v in &piece.vertices {
                out.push_str(&format!("v {} {} {}\n", v[0], v[1], v[2]));
            }
            for n in &piece.normals {
                out.push_str(&format!("vn {} {} {}\n", n[0], n[1], n[2]));
            }
            for f in &piece.faces {
                out.push_str(&format!(
                    "f {a}//{a} {b}//{b} {c}//{c} {d}//{d}\n",
                    a = f[0] + offset,
                    b = f[1] + offset,
                    c = f[2] + offset,
                    d = f[3] + offset,
                ));
            }
            for s in &piece.segments {
                out.push_str(&format!("l {} {}\n", s[0] + offset, s[1] + offset));
            }
            offset += piece.vertices.len();
        }
        out
    }
}

/// Samples every piece of a front on an exact rational grid: chart
/// coordinates run over `[0, box]` (so the quadrant inequalities hold by
/// construction and are re-checked exactly) and free coordinates over
/// `[-box, box]`, with `resolution` subdivisions per axis.
pub fn sample_mesh(
    front: &Front,
    box_bound: f64,
    resolution: usize,
) -> Result<FrontMesh, FrontError> {
    let dim = front.ambient_vars.len();
    if dim > 3 {
        return Err(FrontError::AmbientTooLarge(dim));
    }
    assert!(resolution >= 1, "resolution must be positive");
    let bound = Rat::from_float(box_bound).expect("finite box bound");
    let mut pieces = Vec::new();
    for piece in &front.pieces {
        pieces.push(sample_piece(piece, &bound, resolution));
    }
    Ok(FrontMesh { pieces })
}

fn sample_piece(piece: &FrontPiece, bound: &Rat, resolution: usize) -> PieceMesh {
    enum Axis {
        Chart(String),
        Free(String),
    }
    let mut axes: Vec<Axis> = Vec::new();
    let mut chart_us: BTreeSet<String> = BTreeSet::new();
    for (_, expr) in &piece.quadrant_chart {
        for u in expr.support() {
            chart_us.insert(u);
        }
    }
    for u in &chart_us {
        axes.push(Axis::Chart(u.clone()));
    }
    for v in piece.free_vars() {
        axes.push(Axis::Free(v));
    }
    let steps = resolution + 1;
    let mut positions: Vec<Vec<Rat>> = Vec::new();
    for axis in &axes {
        let mut vals = Vec::with_capacity(steps);
        for k in 0..steps {
            let frac = Rat::new((k as i64).into(), (resolution as i64).into());
            let val = match axis {
                Axis::Chart(_) => bound * &frac,
                Axis::Free(_) => &(&(bound * &frac) * &rat_int(2)) - bound,
            };
            vals.push(val);
        }
        positions.push(vals);
    }
    let total: usize = steps.pow(axes.len() as u32);
    let mut vertices = Vec::with_capacity(total);
    let mut normals = Vec::with_capacity(total);
    let gradients: Vec<(String, Polynomial)> = piece
        .ambient_vars
        .iter()
        .filter(|v| **v != piece.graph_coord)
        .map(|v| (v.clone(), piece.graph_eq.partial(v)))
        .collect();
    for flat in 0..total.max(1) {
        let mut rem = flat;
        let mut param = RationalPoint::new();
        for (a, axis) in axes.iter().enumerate() {
            let k = rem % steps;
            rem /= steps;
            let name = match axis {
                Axis::Chart(u) => u.clone(),
                Axis::Free(v) => v.clone(),
            };
            param.insert(name, positions[a][k].clone());
        }
        let mut point = RationalPoint::new();
        for (v, expr) in &piece.quadrant_chart {
            point.insert(v.clone(), expr.evaluate(&param).expect("chart binds u"));
        }
        for axis in &axes {
            if let Axis::Free(v) = axis {
                point.insert(v.clone(), param[v].clone());
            }
        }
        for ineq in &piece.inequalities {
            let val = ineq.evaluate(&point).expect("grid binds the base");
            assert!(!val.is_positive(), "grid point must satisfy the quadrant");
        }
        let graph = piece.graph_eq.evaluate(&point).expect("grid binds the base");
        point.insert(piece.graph_coord.clone(), graph);
        let mut pos = [0.0f64; 3];
        for (c, v) in piece.ambient_vars.iter().enumerate() {
            pos[c] = point[v].to_f64().expect("finite sample");
        }
        vertices.push(pos);
        let mut normal = [0.0f64; 3];
        for (c, v) in piece.ambient_vars.iter().enumerate() {
            if *v == piece.graph_coord {
                normal[c] = 1.0;
            } else {
                let (_, grad) = gradients.iter().find(|(name, _)| name == v).expect("listed");
                normal[c] = -grad.evaluate(&point).expect("grid binds the base").to_f64().unwrap();
            }
        }
        let len = (normal[0] * normal[0] + normal[1] * normal[1] + normal[2] * normal[2]).sqrt();
        for c in &mut normal {
            *c /= len;
        }
        normals.push(normal);
    }
    let mut faces = Vec::new();
    let mut segments = Vec::new();
    match axes.len() {
        2 => {
            for a in 0..resolution {
                for b in 0..resolution {
                    // Flat index is b-major: flat = a*steps + b after the
                    // decomposition order above (axis 0 varies fastest).
                    let id = |i: usize, j: usize| j * steps + i;
                    faces.push([id(a, b), id(a + 1, b), id(a + 1, b + 1), id(a, b + 1)]);
                }
            }
        }
        1 => {
            for a in 0..resolution {
                segments.push([a, a + 1]);
            }
        }
        _ => {}
    }
    PieceMesh {
        name: format!("piece_{}", piece.label),
        vertices,
        normals,
        faces,
        segments,
    }
}

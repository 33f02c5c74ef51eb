//! Symplectic linear algebra over exact rationals.
//!
//! # Setting
//! The ambient space is `R^{2m}` with coordinates `(q_1..q_m, p_1..p_m)`
//! and the standard form `omega((q,p),(q',p')) = q.p' - p.q'`.  Subspaces
//! are given by explicit rational spanning vectors; all ranks, kernels,
//! intersections, and quotients are computed by exact row reduction.
//!
//! # Contents
//! - [`definiteness_order`]: writes the third Lagrangian as a graph over
//!   the first with values in the second and classifies the resulting
//!   quadratic form `q(v) = omega(v, Av)` by exact signature.
//! - [`reduce`]: symplectic reduction of a Lagrangian by a coisotropic
//!   subspace, with a Darboux basis built for the quotient.
//! - [`arboreal_sign`]: the sign attached to a codimension-one clean
//!   intersection of two Lagrangian planes relative to a polarization,
//!   computed in the two-dimensional reduction.
//! - [`model_edge_sign`]: evaluates the above on the conormal model of a
//!   signed rooted tree at a shared-face point of two adjacent pieces.

use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::fronts::{build_conormal_model, build_front, ConormalKind, FrontError};
use crate::poly::{Rat, RationalPoint};
use crate::trees::SignedRootedTree;

/// Errors from frame validation and sign computation.
#[derive(Debug, Error)]
pub enum SymlinError {
    /// Frames live in different ambient spaces.
    #[error("frames belong to different symplectic spaces")]
    MismatchedSpaces,
    /// A claimed Lagrangian frame fails independence or isotropy.
    #[error("not a Lagrangian frame: {0}")]
    NotLagrangian(String),
    /// A claimed coisotropic frame does not contain its omega-orthogonal.
    #[error("span is not coisotropic")]
    NotCoisotropic,
    /// The two Lagrangians do not meet cleanly in codimension one.
    #[error("intersection has dimension {got}, expected {expected}")]
    NotCleanCodimensionOne { expected: usize, got: usize },
    /// Inputs to the definiteness order must be pairwise transverse.
    #[error("frames are not pairwise transverse")]
    NotTransverse,
    /// The reduced polarization line coincides with a reduced Lagrangian.
    #[error("polarization degenerates in the reduction")]
    DegeneratePolarization,
    /// The requested pair of vertices is not a tree edge.
    #[error("`{0}` and `{1}` are not adjacent in the tree")]
    NotAnEdge(String, String),
    /// Propagated front-construction error.
    #[error(transparent)]
    Front(#[from] FrontError),
}

/// The standard symplectic `R^{2m}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SymplecticSpace {
    /// Half the dimension.
    pub m: usize,
}

impl SymplecticSpace {
    /// The space `R^{2m}`.
    pub fn new(m: usize) -> Self {
        SymplecticSpace { m }
    }

    /// Ambient dimension `2m`.
    pub fn dim(&self) -> usize {
        2 * self.m
    }

    /// The standard form on coordinate vectors.
    pub fn omega(&self, v: &[Rat], w: &[Rat]) -> Rat {
        assert_eq!(v.len(), self.dim());
        assert_eq!(w.len(), self.dim());
        let mut acc = Rat::zero();
        for i in 0..self.m {
            acc += &(&v[i] * &w[self.m + i]) - &(&v[self.m + i] * &w[i]);
        }
        acc
    }
}

/// Reduced row echelon form; returns the nonzero rows and pivot columns.
fn rref(rows: &[Vec<Rat>]) -> (Vec<Vec<Rat>>, Vec<usize>) {
    let mut mat: Vec<Vec<Rat>> = rows.to_vec();
    let width = mat.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut r = 0usize;
    for col in 0..width {
        let Some(pivot_row) = (r..mat.len()).find(|&row| !mat[row][col].is_zero()) else {
            continue;
        };
        mat.swap(r, pivot_row);
        let inv = mat[r][col].clone();
        for entry in mat[r].iter_mut() {
            *entry = &*entry / &inv;
        }
        for row in 0..mat.len() {
            if row != r && !mat[row][col].is_zero() {
                let factor = mat[row][col].clone();
                for c in 0..width {
                    let delta = &factor * &mat[r][c];
                    mat[row][c] = &mat[row][c] - &delta;
                }
            }
        }
        pivots.push(col);
        r += 1;
        if r == mat.len() {
            break;
        }
    }
    mat.truncate(r);
    (mat, pivots)
}

/// Rank of a list of vectors.
fn rank(rows: &[Vec<Rat>]) -> usize {
    rref(rows).0.len()
}

/// Reduces `v` against reduced rows; returns the remainder.
fn reduce_against(rrefed: &(Vec<Vec<Rat>>, Vec<usize>), v: &[Rat]) -> Vec<Rat> {
    let mut out = v.to_vec();
    for (row, &col) in rrefed.0.iter().zip(&rrefed.1) {
        if !out[col].is_zero() {
            let factor = out[col].clone();
            for c in 0..out.len() {
                let delta = &factor * &row[c];
                out[c] = &out[c] - &delta;
            }
        }
    }
    out
}

fn in_span(rrefed: &(Vec<Vec<Rat>>, Vec<usize>), v: &[Rat]) -> bool {
    reduce_against(rrefed, v).iter().all(Rat::is_zero)
}

/// Basis of the solution space of the homogeneous system `rows . x = 0`.
fn nullspace(rows: &[Vec<Rat>], width: usize) -> Vec<Vec<Rat>> {
    let (mat, pivots) = rref(rows);
    let mut basis = Vec::new();
    for free in (0..width).filter(|c| !pivots.contains(c)) {
        let mut v = vec![Rat::zero(); width];
        v[free] = Rat::one();
        for (row, &pc) in mat.iter().zip(&pivots) {
            v[pc] = -row[free].clone();
        }
        basis.push(v);
    }
    basis
}

/// Basis of `span(a) ∩ span(b)`.
fn intersect_spans(a: &[Vec<Rat>], b: &[Vec<Rat>], width: usize) -> Vec<Vec<Rat>> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    // Solve sum alpha_i a_i - sum beta_j b_j = 0 columnwise.
    let unknowns = a.len() + b.len();
    let mut rows = Vec::with_capacity(width);
    for c in 0..width {
        let mut row = Vec::with_capacity(unknowns);
        for v in a {
            row.push(v[c].clone());
        }
        for v in b {
            row.push(-v[c].clone());
        }
        rows.push(row);
    }
    let kernel = nullspace(&rows, unknowns);
    let mut vectors = Vec::new();
    for combo in kernel {
        let mut v = vec![Rat::zero(); width];
        for (i, av) in a.iter().enumerate() {
            for c in 0..width {
                let delta = &combo[i] * &av[c];
                v[c] = &v[c] + &delta;
            }
        }
        vectors.push(v);
    }
    rref(&vectors).0
}

/// A Lagrangian subspace given by `m` exact spanning vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct LagrangianFrame {
    pub space: SymplecticSpace,
    pub basis: Vec<Vec<Rat>>,
}

impl LagrangianFrame {
    /// Validates independence and isotropy of the spanning vectors.
    pub fn new(space: SymplecticSpace, basis: Vec<Vec<Rat>>) -> Result<Self, SymlinError> {
        if basis.len() != space.m {
            return Err(SymlinError::NotLagrangian(format!(
                "{} vectors for half-dimension {}",
                basis.len(),
                space.m
            )));
        }
        for v in &basis {
            if v.len() != space.dim() {
                return Err(SymlinError::NotLagrangian("vector length mismatch".into()));
            }
        }
        if rank(&basis) != space.m {
            return Err(SymlinError::NotLagrangian("spanning vectors are dependent".into()));
        }
        for (i, v) in basis.iter().enumerate() {
            for w in &basis[i + 1..] {
                if !space.omega(v, w).is_zero() {
                    return Err(SymlinError::NotLagrangian(
                        "form does not vanish on the span".into(),
                    ));
                }
            }
        }
        Ok(LagrangianFrame { space, basis })
    }

    /// Row-reduced spanning set, for span comparisons.
    pub fn canonical_basis(&self) -> Vec<Vec<Rat>> {
        rref(&self.basis).0
    }
}

/// The zero section `{p = 0}`.
pub fn horizontal_frame(space: SymplecticSpace) -> LagrangianFrame {
    let mut basis = Vec::new();
    for i in 0..space.m {
        let mut v = vec![Rat::zero(); space.dim()];
        v[i] = Rat::one();
        basis.push(v);
    }
    LagrangianFrame { space, basis }
}

/// The vertical fiber `{q = 0}`.
pub fn vertical_frame(space: SymplecticSpace) -> LagrangianFrame {
    let mut basis = Vec::new();
    for i in 0..space.m {
        let mut v = vec![Rat::zero(); space.dim()];
        v[space.m + i] = Rat::one();
        basis.push(v);
    }
    LagrangianFrame { space, basis }
}

/// A coisotropic subspace given by independent spanning vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct CoisotropicFrame {
    pub space: SymplecticSpace,
    pub basis: Vec<Vec<Rat>>,
}

impl CoisotropicFrame {
    /// Row-reduces the span and validates coisotropy (`C^omega ⊆ C`).
    pub fn from_span(space: SymplecticSpace, vectors: &[Vec<Rat>]) -> Result<Self, SymlinError> {
        let basis = rref(vectors).0;
        let perp_rows: Vec<Vec<Rat>> = basis
            .iter()
            .map(|c| {
                // omega(v, c) = v . Jc with Jc = (c_p, -c_q).
                let m = space.m;
                let mut row = Vec::with_capacity(space.dim());
                for i in 0..m {
                    row.push(c[m + i].clone());
                }
                for i in 0..m {
                    row.push(-c[i].clone());
                }
                row
            })
            .collect();
        let perp = nullspace(&perp_rows, space.dim());
        let span = rref(&basis);
        if !perp.iter().all(|v| in_span(&span, v)) {
            return Err(SymlinError::NotCoisotropic);
        }
        Ok(CoisotropicFrame { space, basis })
    }

    /// Basis of `C^omega`, computed inside `C` via the Gram kernel.
    pub fn null_directions(&self) -> Vec<Vec<Rat>> {
        let k = self.basis.len();
        let gram: Vec<Vec<Rat>> = (0..k)
            .map(|a| (0..k).map(|b| self.space.omega(&self.basis[a], &self.basis[b])).collect())
            .collect();
        let kernel = nullspace(&gram, k);
        let combos: Vec<Vec<Rat>> = kernel
            .iter()
            .map(|z| {
                let mut v = vec![Rat::zero(); self.space.dim()];
                for (i, c) in self.basis.iter().enumerate() {
                    for col in 0..v.len() {
                        let delta = &z[i] * &c[col];
                        v[col] = &v[col] + &delta;
                    }
                }
                v
            })
            .collect();
        rref(&combos).0
    }
}

/// `true` when the two Lagrangians meet only at the origin.
pub fn is_transverse(a: &LagrangianFrame, b: &LagrangianFrame) -> Result<bool, SymlinError> {
    if a.space != b.space {
        return Err(SymlinError::MismatchedSpaces);
    }
    let mut stacked = a.basis.clone();
    stacked.extend(b.basis.iter().cloned());
    Ok(rank(&stacked) == a.space.dim())
}

/// Outcome of the definiteness classification of a Lagrangian triple.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DefinitenessOrder {
    /// The graph form is positive definite: `l1 < l2 < l3`.
    Order123,
    /// The graph form is negative definite: `l1 < l3 < l2`.
    Order132,
    /// Mixed or degenerate signature.
    Indefinite,
}

/// Solves the square system with the given columns; `None` if singular.
fn solve_columns(columns: &[Vec<Rat>], rhs: &[Rat]) -> Option<Vec<Rat>> {
    let n = rhs.len();
    assert_eq!(columns.len(), n, "square system expected");
    let mut aug: Vec<Vec<Rat>> = (0..n)
        .map(|r| {
            let mut row: Vec<Rat> = columns.iter().map(|c| c[r].clone()).collect();
            row.push(rhs[r].clone());
            row
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !aug[r][col].is_zero())?;
        aug.swap(col, pivot);
        let inv = aug[col][col].clone();
        for entry in aug[col].iter_mut() {
            *entry = &*entry / &inv;
        }
        for r in 0..n {
            if r != col && !aug[r][col].is_zero() {
                let factor = aug[r][col].clone();
                for c in 0..=n {
                    let delta = &factor * &aug[col][c];
                    aug[r][c] = &aug[r][c] - &delta;
                }
            }
        }
    }
    Some((0..n).map(|r| aug[r][n].clone()).collect())
}

/// Exact signature (positives, negatives, zeros) of a symmetric matrix by
/// congruence diagonalization.
fn signature(mut g: Vec<Vec<Rat>>) -> (usize, usize, usize) {
    let n = g.len();
    let (mut pos, mut neg, mut zero) = (0usize, 0usize, 0usize);
    for i in 0..n {
        if g[i][i].is_zero() {
            if let Some(j) = (i + 1..n).find(|&j| !g[j][j].is_zero()) {
                g.swap(i, j);
                for row in g.iter_mut() {
                    row.swap(i, j);
                }
            } else if let Some(j) = (i + 1..n).find(|&j| !g[i][j].is_zero()) {
                // Add row/col j into i to create a nonzero diagonal.
                for c in 0..n {
                    let add = g[j][c].clone();
                    g[i][c] = &g[i][c] + &add;
                }
                for r in 0..n {
                    let add = g[r][j].clone();
                    g[r][i] = &g[r][i] + &add;
                }
            } else {
                zero += 1;
                continue;
            }
        }
        let d = g[i][i].clone();
        if d.is_positive() {
            pos += 1;
        } else {
            neg += 1;
        }
        for j in i + 1..n {
            if !g[i][j].is_zero() {
                let factor = &g[i][j] / &d;
                for c in 0..n {
                    let delta = &factor * &g[i][c];
                    g[j][c] = &g[j][c] - &delta;
                }
                for r in 0..n {
                    let delta = &factor * &g[r][i];
                    g[r][j] = &g[r][j] - &delta;
                }
            }
        }
    }
    (pos, neg, zero)
}

/// Classifies the triple by the quadratic form `q(v) = omega(v, Av)`,
/// where `v` runs over `l1`, `Av` lies in `l2`, and `v + Av` lies in `l3`.
pub fn definiteness_order(
    l1: &LagrangianFrame,
    l2: &LagrangianFrame,
    l3: &LagrangianFrame,
) -> Result<DefinitenessOrder, SymlinError> {
    if l1.space != l2.space || l1.space != l3.space {
        return Err(SymlinError::MismatchedSpaces);
    }
    if !(is_transverse(l1, l2)? && is_transverse(l1, l3)? && is_transverse(l2, l3)?) {
        return Err(SymlinError::NotTransverse);
    }
    let space = l1.space;
    let m = space.m;
    // Columns of [ l3 | -l2 ]: v = l3.z - l2.y, so Av = l2.y = (v3 - v).
    let mut columns: Vec<Vec<Rat>> = l3.basis.clone();
    for w in &l2.basis {
        columns.push(w.iter().map(|x| -x.clone()).collect());
    }
    let images: Vec<Vec<Rat>> = l1
        .basis
        .iter()
        .map(|v| {
            let coeffs = solve_columns(&columns, v).expect("l2 + l3 spans the space");
            let mut av = vec![Rat::zero(); space.dim()];
            for (j, w) in l2.basis.iter().enumerate() {
                for c in 0..av.len() {
                    let delta = &coeffs[m + j] * &w[c];
                    av[c] = &av[c] + &delta;
                }
            }
            av
        })
        .collect();
    let gram: Vec<Vec<Rat>> = (0..m)
        .map(|a| (0..m).map(|b| space.omega(&l1.basis[a], &images[b])).collect())
        .collect();
    for a in 0..m {
        for b in 0..m {
            assert_eq!(gram[a][b], gram[b][a], "graph form must be symmetric");
        }
    }
    let (pos, neg, zero) = signature(gram);
    Ok(if zero == 0 && neg == 0 {
        DefinitenessOrder::Order123
    } else if zero == 0 && pos == 0 {
        DefinitenessOrder::Order132
    } else {
        DefinitenessOrder::Indefinite
    })
}

/// Symplectic reduction data for a coisotropic subspace: a Darboux basis
/// of the quotient `C/C^omega` represented by lifts in `C`.
#[derive(Debug, Clone)]
pub struct Reduction {
    space: SymplecticSpace,
    null_span: (Vec<Vec<Rat>>, Vec<usize>),
    pairs: Vec<(Vec<Rat>, Vec<Rat>)>,
}

impl Reduction {
    /// Builds the quotient structure of a coisotropic frame.
    pub fn new(c: &CoisotropicFrame) -> Reduction {
        let space = c.space;
        let null = c.null_directions();
        let null_span = rref(&null);
        // Extend the null directions to a basis of C; the extra vectors
        // represent the quotient.
        let mut chosen = null.clone();
        let mut reps: Vec<Vec<Rat>> = Vec::new();
        for v in &c.basis {
            if !in_span(&rref(&chosen), v) {
                chosen.push(v.clone());
                reps.push(v.clone());
            }
        }
        // Symplectic Gram-Schmidt on the representatives.
        let mut pairs = Vec::new();
        let mut pool = reps;
        while !pool.is_empty() {
            let e = pool.remove(0);
            let partner = pool
                .iter()
                .position(|g| !space.omega(&e, g).is_zero())
                .expect("quotient form is nondegenerate");
            let mut f = pool.remove(partner);
            let scale = space.omega(&e, &f);
            for x in f.iter_mut() {
                *x = &*x / &scale;
            }
            for g in pool.iter_mut() {
                let a = space.omega(g, &f);
                let b = space.omega(g, &e);
                for c in 0..g.len() {
                    let d1 = &a * &e[c];
                    let d2 = &b * &f[c];
                    g[c] = &(&g[c] - &d1) + &d2;
                }
            }
            pairs.push((e, f));
        }
        Reduction { space, null_span, pairs }
    }

    /// The quotient symplectic space.
    pub fn quotient_space(&self) -> SymplecticSpace {
        SymplecticSpace::new(self.pairs.len())
    }

    /// Quotient coordinates of an ambient vector lying in `C`.
    fn project(&self, v: &[Rat]) -> Vec<Rat> {
        let r = self.pairs.len();
        let mut out = vec![Rat::zero(); 2 * r];
        for (j, (e, f)) in self.pairs.iter().enumerate() {
            out[j] = self.space.omega(v, f);
            out[r + j] = -self.space.omega(v, e);
        }
        out
    }

    /// True when the vector projects to zero (lies in `C^omega`).
    fn is_null(&self, v: &[Rat]) -> bool {
        in_span(&self.null_span, v)
    }
}

/// The reduction `[l]^C`: the image of `l ∩ C` in `C/C^omega`.  The output
/// spans a Lagrangian of the quotient (possibly the zero space when the
/// quotient is zero-dimensional).
pub fn reduce(l: &LagrangianFrame, c: &CoisotropicFrame) -> Result<LagrangianFrame, SymlinError> {
    if l.space != c.space {
        return Err(SymlinError::MismatchedSpaces);
    }
    let reduction = Reduction::new(c);
    let members = intersect_spans(&l.basis, &c.basis, l.space.dim());
    let images: Vec<Vec<Rat>> = members.iter().map(|v| reduction.project(v)).collect();
    let basis = rref(&images).0;
    LagrangianFrame::new(reduction.quotient_space(), basis)
}

/// The sign of a clean codimension-one pair of Lagrangian planes relative
/// to a polarization line: `+1` when `[l_rho] < [l_alpha] < [eta]` in the
/// two-dimensional reduction by `C = span(l_rho, l_alpha)`, `-1` when
/// `[l_rho] < [eta] < [l_alpha]`.
pub fn arboreal_sign(
    l_rho: &LagrangianFrame,
    l_alpha: &LagrangianFrame,
    eta: &LagrangianFrame,
) -> Result<i8, SymlinError> {
    if l_rho.space != l_alpha.space || l_rho.space != eta.space {
        return Err(SymlinError::MismatchedSpaces);
    }
    let space = l_rho.space;
    let meet = intersect_spans(&l_rho.basis, &l_alpha.basis, space.dim());
    if meet.len() + 1 != space.m {
        return Err(SymlinError::NotCleanCodimensionOne {
            expected: space.m - 1,
            got: meet.len(),
        });
    }
    let mut span = l_rho.basis.clone();
    span.extend(l_alpha.basis.iter().cloned());
    let c = CoisotropicFrame::from_span(space, &span)?;
    let reduction = Reduction::new(&c);
    assert_eq!(reduction.quotient_space().m, 1, "reduction must be a plane");
    let project_line = |frame: &LagrangianFrame| -> Result<Vec<Vec<Rat>>, SymlinError> {
        let members = intersect_spans(&frame.basis, &c.basis, space.dim());
        let images: Vec<Vec<Rat>> =
            members.iter().filter(|v| !reduction.is_null(v)).map(|v| reduction.project(v)).collect();
        let line = rref(&images).0;
        if line.len() != 1 {
            return Err(SymlinError::DegeneratePolarization);
        }
        Ok(line)
    };
    let quotient = reduction.quotient_space();
    let line_rho = LagrangianFrame::new(quotient, project_line(l_rho)?)
        .expect("reduced Lagrangian is a line");
    let line_alpha = LagrangianFrame::new(quotient, project_line(l_alpha)?)
        .expect("reduced Lagrangian is a line");
    let line_eta = LagrangianFrame::new(quotient, project_line(eta)?)
        .expect("reduced polarization is a line");
    match definiteness_order(&line_rho, &line_alpha, &line_eta) {
        Ok(DefinitenessOrder::Order123) => Ok(1),
        Ok(DefinitenessOrder::Order132) => Ok(-1),
        Ok(DefinitenessOrder::Indefinite) => {
            panic!("a nondegenerate form on a line is definite")
        }
        Err(SymlinError::NotTransverse) => Err(SymlinError::DegeneratePolarization),
        Err(e) => Err(e),
    }
}

/// Computes the polarization sign of a tree edge from the conormal model:
/// tangent frames of the two adjacent Lagrangian pieces are taken at an
/// interior point of their shared face (with `lambda = 1`), and the
/// vertical fiber serves as the polarization.  Root-adjacent edges have no
/// sign; there the vertical line coincides with the reduced child piece
/// and the computation reports a degenerate polarization.
pub fn model_edge_sign(
    tree: &SignedRootedTree,
    a: &str,
    b: &str,
) -> Result<i8, SymlinError> {
    let (parent, child) = if tree.parent(b) == Some(a) {
        (a, b)
    } else if tree.parent(a) == Some(b) {
        (b, a)
    } else {
        return Err(SymlinError::NotAnEdge(a.to_string(), b.to_string()));
    };
    let front = build_front(tree);
    let child_piece = front.piece(child).expect("child indexes a piece");
    let m = front.ambient_vars.len();
    let space = SymplecticSpace::new(m);

    // Interior point of the face shared with the parent piece: last chart
    // coordinate zero, earlier ones at one, off-path coordinates zero.
    let mut params = RationalPoint::new();
    let depth = child_piece.quadrant_chart.len();
    for s in 1..=depth {
        let val = if s == depth { Rat::zero() } else { Rat::one() };
        params.insert(format!("u{s}"), val);
    }
    let mut base = RationalPoint::new();
    for (v, expr) in &child_piece.quadrant_chart {
        base.insert(v.clone(), expr.evaluate(&params).expect("chart binds u"));
    }
    for v in &front.ambient_vars {
        base.entry(v.clone()).or_insert_with(Rat::zero);
    }
    base.remove(&child_piece.graph_coord);
    let mut point = base.clone();
    point.insert("lambda".to_string(), Rat::one());

    let conormals = build_conormal_model(tree);
    let frame_of = |vertex: &str| -> LagrangianFrame {
        let cp = conormals
            .iter()
            .find(|c| c.label == vertex)
            .expect("model has a piece per vertex");
        let rows = match cp.kind {
            ConormalKind::ZeroSection => return horizontal_frame(space),
            ConormalKind::PositiveConormal => cp.tangent_frame(&point),
        };
        LagrangianFrame::new(space, rows).expect("conormal tangent frames are Lagrangian")
    };
    let frame_parent = frame_of(parent);
    let frame_child = frame_of(child);

    // Sanity: both pieces pass through the same contact element there.
    if parent != tree.root() {
        let parent_cp = conormals.iter().find(|c| c.label == parent).expect("piece");
        let child_cp = conormals.iter().find(|c| c.label == child).expect("piece");
        for ((va, ea), (vb, eb)) in
            parent_cp.parametrization.iter().zip(child_cp.parametrization.iter())
        {
            assert_eq!(va, vb);
            assert_eq!(
                ea.evaluate(&point).expect("point binds parameters"),
                eb.evaluate(&point).expect("point binds parameters"),
                "pieces must share the face point and its covector"
            );
        }
    }
    arboreal_sign(&frame_parent, &frame_child, &vertical_frame(space))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trees::SignedRootedTree;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::collections::BTreeMap;

    fn v(entries: &[i64]) -> Vec<Rat> {
        entries.iter().map(|&x| Rat::from_integer(x.into())).collect()
    }

    fn lag(m: usize, rows: &[&[i64]]) -> LagrangianFrame {
        LagrangianFrame::new(
            SymplecticSpace::new(m),
            rows.iter().map(|r| v(r)).collect(),
        )
        .unwrap()
    }

    #[test]
    fn transversality_in_the_plane() {
        let q_axis = lag(1, &[&[1, 0]]);
        let p_axis = lag(1, &[&[0, 1]]);
        let diagonal = lag(1, &[&[1, 1]]);
        assert!(is_transverse(&q_axis, &p_axis).unwrap());
        assert!(is_transverse(&q_axis, &diagonal).unwrap());
        assert!(!is_transverse(&q_axis, &q_axis).unwrap());
    }

    #[test]
    fn frame_validation_rejects_bad_input() {
        let space = SymplecticSpace::new(2);
        // Not isotropic: span contains q1 and p1.
        let bad = LagrangianFrame::new(space, vec![v(&[1, 0, 0, 0]), v(&[0, 0, 1, 0])]);
        assert!(matches!(bad, Err(SymlinError::NotLagrangian(_))));
        let dependent =
            LagrangianFrame::new(space, vec![v(&[1, 0, 0, 0]), v(&[2, 0, 0, 0])]);
        assert!(matches!(dependent, Err(SymlinError::NotLagrangian(_))));
    }

    #[test]
    fn definiteness_in_the_plane() {
        let q_axis = lag(1, &[&[1, 0]]);
        let p_axis = lag(1, &[&[0, 1]]);
        let plus = lag(1, &[&[1, 1]]);
        let minus = lag(1, &[&[1, -1]]);
        assert_eq!(
            definiteness_order(&q_axis, &p_axis, &plus).unwrap(),
            DefinitenessOrder::Order123
        );
        assert_eq!(
            definiteness_order(&q_axis, &p_axis, &minus).unwrap(),
            DefinitenessOrder::Order132
        );
        assert!(matches!(
            definiteness_order(&q_axis, &q_axis, &plus),
            Err(SymlinError::NotTransverse)
        ));
    }

    #[test]
    fn split_graph_is_indefinite() {
        let horizontal = lag(2, &[&[1, 0, 0, 0], &[0, 1, 0, 0]]);
        let vertical = lag(2, &[&[0, 0, 1, 0], &[0, 0, 0, 1]]);
        let split = lag(2, &[&[1, 0, 1, 0], &[0, 1, 0, -1]]);
        assert_eq!(
            definiteness_order(&horizontal, &vertical, &split).unwrap(),
            DefinitenessOrder::Indefinite
        );
    }

    #[test]
    fn reduction_by_the_whole_space_changes_nothing() {
        let space = SymplecticSpace::new(2);
        let mut whole = Vec::new();
        for i in 0..4 {
            let mut e = vec![Rat::zero(); 4];
            e[i] = Rat::one();
            whole.push(e);
        }
        let c = CoisotropicFrame::from_span(space, &whole).unwrap();
        let l = lag(2, &[&[1, 0, 0, 0], &[0, 1, 0, 0]]);
        let reduced = reduce(&l, &c).unwrap();
        assert_eq!(reduced.space, space);
        assert_eq!(reduced.canonical_basis(), l.canonical_basis());
    }

    #[test]
    fn reduction_of_horizontal_by_hyperplane() {
        let space = SymplecticSpace::new(2);
        let c = CoisotropicFrame::from_span(
            space,
            &[v(&[1, 0, 0, 0]), v(&[0, 1, 0, 0]), v(&[0, 0, 1, 0])],
        )
        .unwrap();
        assert_eq!(c.null_directions(), vec![v(&[0, 1, 0, 0])]);
        let l = lag(2, &[&[1, 0, 0, 0], &[0, 1, 0, 0]]);
        let reduced = reduce(&l, &c).unwrap();
        assert_eq!(reduced.space.m, 1);
        assert_eq!(reduced.canonical_basis(), vec![v(&[1, 0])]);
    }

    #[test]
    fn reduction_by_a_lagrangian_is_zero_dimensional() {
        let space = SymplecticSpace::new(2);
        let l = lag(2, &[&[1, 0, 0, 0], &[0, 1, 0, 0]]);
        let c = CoisotropicFrame::from_span(space, &l.basis).unwrap();
        let reduced = reduce(&l, &c).unwrap();
        assert_eq!(reduced.space.m, 0);
        assert!(reduced.basis.is_empty());
    }

    #[test]
    fn non_coisotropic_span_is_rejected() {
        let space = SymplecticSpace::new(2);
        // The (q1, p1) symplectic plane is not coisotropic in R^4.
        let bad = CoisotropicFrame::from_span(space, &[v(&[1, 0, 0, 0]), v(&[0, 0, 1, 0])]);
        assert!(matches!(bad, Err(SymlinError::NotCoisotropic)));
    }

    #[test]
    fn path_model_sign_matches_edge_label() {
        for s in [1i8, -1] {
            let tree = SignedRootedTree::linear(2, &[s]).unwrap();
            assert_eq!(model_edge_sign(&tree, "1", "2").unwrap(), s);
            assert_eq!(model_edge_sign(&tree, "2", "1").unwrap(), s);
        }
    }

    #[test]
    fn chain_model_signs_match_at_all_depths() {
        for n in 2..=4usize {
            for mask in 0..1u32 << (n - 1) {
                let signs: Vec<i8> =
                    (0..n - 1).map(|k| if mask >> k & 1 == 0 { 1 } else { -1 }).collect();
                let tree = SignedRootedTree::linear(n, &signs).unwrap();
                for d in 1..n {
                    let a = d.to_string();
                    let b = (d + 1).to_string();
                    let computed = model_edge_sign(&tree, &a, &b).unwrap();
                    assert_eq!(computed, signs[d - 1], "chain n={n} edge {a}-{b}");
                }
            }
        }
    }

    #[test]
    fn branched_model_signs_match_edge_labels() {
        let edges = vec![
            ("r".to_string(), "a".to_string()),
            ("a".to_string(), "b".to_string()),
            ("a".to_string(), "c".to_string()),
            ("b".to_string(), "d".to_string()),
        ];
        let mut signs = BTreeMap::new();
        signs.insert(("a".to_string(), "b".to_string()), 1i8);
        signs.insert(("a".to_string(), "c".to_string()), -1i8);
        signs.insert(("b".to_string(), "d".to_string()), -1i8);
        let tree = SignedRootedTree::new("r", &edges, &signs).unwrap();
        assert_eq!(model_edge_sign(&tree, "a", "b").unwrap(), 1);
        assert_eq!(model_edge_sign(&tree, "a", "c").unwrap(), -1);
        assert_eq!(model_edge_sign(&tree, "b", "d").unwrap(), -1);
    }

    #[test]
    fn root_edge_sign_is_degenerate() {
        let tree = SignedRootedTree::linear(2, &[1]).unwrap();
        assert!(matches!(
            model_edge_sign(&tree, "0", "1"),
            Err(SymlinError::DegeneratePolarization)
        ));
        assert!(matches!(
            model_edge_sign(&tree, "0", "2"),
            Err(SymlinError::NotAnEdge(_, _))
        ));
    }

    /// Applies a chain of random symplectic generators to a vector.
    fn random_symplectomorphism(
        rng: &mut ChaCha8Rng,
        m: usize,
    ) -> impl Fn(&[Rat]) -> Vec<Rat> {
        #[derive(Clone)]
        enum Gen {
            Shear(Vec<Vec<i64>>),
            Gl(Vec<Vec<i64>>),
            Swap,
        }
        let mut gens = Vec::new();
        for _ in 0..3 {
            match rng.gen_range(0..3) {
                0 => {
                    // Symmetric integer matrix S: (q, p) -> (q + S p, p).
                    let mut s = vec![vec![0i64; m]; m];
                    for i in 0..m {
                        for j in i..m {
                            let x = rng.gen_range(-2..=2);
                            s[i][j] = x;
                            s[j][i] = x;
                        }
                    }
                    gens.push(Gen::Shear(s));
                }
                1 => {
                    // Unimodular upper-triangular A: (q, p) -> (A q, A^{-T} p).
                    let mut a = vec![vec![0i64; m]; m];
                    for (i, row) in a.iter_mut().enumerate() {
                        row[i] = 1;
                        for item in row.iter_mut().skip(i + 1) {
                            *item = rng.gen_range(-2..=2);
                        }
                    }
                    gens.push(Gen::Gl(a));
                }
                _ => gens.push(Gen::Swap),
            }
        }
        move |vec: &[Rat]| {
            let mut q: Vec<Rat> = vec[..m].to_vec();
            let mut p: Vec<Rat> = vec[m..].to_vec();
            for g in &gens {
                match g {
                    Gen::Shear(s) => {
                        let mut nq = q.clone();
                        for i in 0..m {
                            for j in 0..m {
                                let delta = &Rat::from_integer(s[i][j].into()) * &p[j];
                                nq[i] = &nq[i] + &delta;
                            }
                        }
                        q = nq;
                    }
                    Gen::Gl(a) => {
                        // q' = A q; p' solves A^T p' = p (A unimodular
                        // upper triangular, so back-substitution is exact).
                        let mut nq = vec![Rat::zero(); m];
                        for i in 0..m {
                            for j in 0..m {
                                let delta = &Rat::from_integer(a[i][j].into()) * &q[j];
                                nq[i] = &nq[i] + &delta;
                            }
                        }
                        // A^T is lower triangular with unit diagonal.
                        let mut np = vec![Rat::zero(); m];
                        for i in 0..m {
                            let mut acc = p[i].clone();
                            for j in 0..i {
                                let delta = &Rat::from_integer(a[j][i].into()) * &np[j];
                                acc = &acc - &delta;
                            }
                            np[i] = acc;
                        }
                        q = nq;
                        p = np;
                    }
                    Gen::Swap => {
                        let (nq, np) = (p.clone(), q.iter().map(|x| -x.clone()).collect());
                        q = nq;
                        p = np;
                    }
                }
            }
            let mut out = q;
            out.extend(p);
            out
        }
    }

    #[test]
    fn definiteness_is_symplectically_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let triples = [
            (lag(1, &[&[1, 0]]), lag(1, &[&[0, 1]]), lag(1, &[&[1, 1]])),
            (lag(1, &[&[1, 0]]), lag(1, &[&[0, 1]]), lag(1, &[&[1, -1]])),
            (
                lag(2, &[&[1, 0, 0, 0], &[0, 1, 0, 0]]),
                lag(2, &[&[0, 0, 1, 0], &[0, 0, 0, 1]]),
                lag(2, &[&[1, 0, 1, 0], &[0, 1, 0, -1]]),
            ),
            (
                lag(2, &[&[1, 0, 0, 0], &[0, 1, 0, 0]]),
                lag(2, &[&[0, 0, 1, 0], &[0, 0, 0, 1]]),
                lag(2, &[&[1, 0, 1, 0], &[0, 1, 0, 1]]),
            ),
        ];
        for (l1, l2, l3) in &triples {
            let expected = definiteness_order(l1, l2, l3).unwrap();
            for _ in 0..20 {
                let phi = random_symplectomorphism(&mut rng, l1.space.m);
                let map = |l: &LagrangianFrame| {
                    LagrangianFrame::new(
                        l.space,
                        l.basis.iter().map(|w| phi(w)).collect(),
                    )
                    .expect("symplectomorphisms preserve Lagrangians")
                };
                assert_eq!(definiteness_order(&map(l1), &map(l2), &map(l3)).unwrap(), expected);
            }
        }
    }

    #[test]
    fn reductions_of_lagrangians_are_lagrangian() {
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        for m in 2..=3usize {
            let space = SymplecticSpace::new(m);
            for k in m..=2 * m {
                for _ in 0..12 {
                    let phi = random_symplectomorphism(&mut rng, m);
                    // Standard coisotropic span(q_1..q_m, p_1..p_{k-m}),
                    // pushed through a random symplectomorphism.
                    let mut vectors = Vec::new();
                    for i in 0..m {
                        let mut e = vec![Rat::zero(); 2 * m];
                        e[i] = Rat::one();
                        vectors.push(phi(&e));
                    }
                    for i in 0..k - m {
                        let mut e = vec![Rat::zero(); 2 * m];
                        e[m + i] = Rat::one();
                        vectors.push(phi(&e));
                    }
                    let c = CoisotropicFrame::from_span(space, &vectors)
                        .expect("symplectic image of a coisotropic is coisotropic");
                    let l = LagrangianFrame::new(
                        space,
                        vertical_frame(space).basis.iter().map(|w| phi(w)).collect(),
                    )
                    .unwrap();
                    // The constructor inside reduce validates the output.
                    let reduced = reduce(&l, &c).unwrap();
                    assert_eq!(reduced.space.m, k - m);
                }
            }
        }
    }
}

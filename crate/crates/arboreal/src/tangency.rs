//! Tangency loci of front model pieces.
//!
//! # Loci
//! Two graph pieces are tangent where their graph values and gradients
//! agree.  For the model pieces `{x0 = h_i^2}` and `{x0 = h_j^2}` (j < i)
//! the tangency locus decomposes into explicit coordinate cells: a primary
//! cell cut out by `h_{i,j} = 0` and, for each `k < j`, a deeper cell cut
//! out by `h_{i,k} = h_{j,k} = 0`.  [`t_locus`] builds the whole union,
//! [`tau_locus`] just the primary cell, and [`numeric_tangency_oracle`]
//! cross-validates them against a brute-force grid search for points with
//! equal values and gradients.
//!
//! # Certificates
//! Set-level identities are certified by exact division (ideal membership
//! of the redundant equation) plus exact rational sampling in both
//! directions; no floating point enters any equality decision.

use std::collections::BTreeMap;

use num_traits::{Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use thiserror::Error;

use crate::fronts::{
    build_gamma_eps, sigma_flips, xvar, FrontError, FrontPiece, HFamily, SignVector,
};
use crate::poly::{Polynomial, Rat, RationalPoint};

/// Errors from locus construction.
#[derive(Debug, Error)]
pub enum TangencyError {
    /// Indices must satisfy `0 <= j < i <= n`.
    #[error("indices (n, i, j) = ({n}, {i}, {j}) violate 0 <= j < i <= n")]
    IndexOutOfRange { n: usize, i: usize, j: usize },
    /// Propagated piece-construction error.
    #[error(transparent)]
    Front(#[from] FrontError),
}

/// One cell: common zero set of `equations` restricted to `inequalities <= 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    /// Polynomials required to vanish.
    pub equations: Vec<Polynomial>,
    /// Polynomials required `<= 0`.
    pub inequalities: Vec<Polynomial>,
}

impl Cell {
    /// A cell with constraint lists sorted by canonical text, deduplicated.
    pub fn new(equations: Vec<Polynomial>, inequalities: Vec<Polynomial>) -> Cell {
        let mut cell = Cell { equations, inequalities };
        cell.equations.sort_by_key(|p| p.to_string());
        cell.equations.dedup();
        cell.inequalities.sort_by_key(|p| p.to_string());
        cell.inequalities.dedup();
        cell
    }

    /// Canonical text key used to order and deduplicate cells.
    fn key(&self) -> String {
        let eqs: Vec<String> = self.equations.iter().map(|p| p.to_string()).collect();
        let ineqs: Vec<String> = self.inequalities.iter().map(|p| p.to_string()).collect();
        format!("{} | {}", eqs.join(", "), ineqs.join(", "))
    }

    /// True when the point satisfies every constraint exactly.
    pub fn contains(&self, point: &RationalPoint) -> bool {
        self.equations.iter().all(|p| p.evaluate(point).map_or(false, |v| v.is_zero()))
            && self
                .inequalities
                .iter()
                .all(|p| p.evaluate(point).map_or(false, |v| !v.is_positive()))
    }

    /// Largest absolute equation value at a point, as a measure of
    /// distance from the cell variety.
    pub fn residual(&self, point: &RationalPoint) -> Rat {
        let mut worst = Rat::zero();
        for eq in &self.equations {
            let v = eq.evaluate(point).expect("point binds the ambient").abs();
            if v > worst {
                worst = v;
            }
        }
        worst
    }
}

/// A finite union of cells in a fixed ambient coordinate list.
#[derive(Debug, Clone, PartialEq)]
pub struct SemiAlgebraicSet {
    /// Ambient coordinates.
    pub ambient_vars: Vec<String>,
    /// Cells in canonical order, duplicates removed.
    pub cells: Vec<Cell>,
}

impl SemiAlgebraicSet {
    /// Canonicalizes cell order and removes duplicates.
    pub fn new(ambient_vars: Vec<String>, cells: Vec<Cell>) -> SemiAlgebraicSet {
        let mut cells = cells;
        cells.sort_by_key(Cell::key);
        cells.dedup();
        SemiAlgebraicSet { ambient_vars, cells }
    }

    /// True when some cell contains the point.
    pub fn contains(&self, point: &RationalPoint) -> bool {
        self.cells.iter().any(|c| c.contains(point))
    }

    /// Smallest cell residual at a point.
    pub fn residual(&self, point: &RationalPoint) -> Rat {
        self.cells
            .iter()
            .map(|c| c.residual(point))
            .min()
            .expect("a semialgebraic set has at least one cell")
    }

    /// Multi-line rendering: one cell per line with canonical polynomials.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for cell in &self.cells {
            let eqs: Vec<String> = cell.equations.iter().map(|p| format!("{p} = 0")).collect();
            let ineqs: Vec<String> =
                cell.inequalities.iter().map(|p| format!("{p} <= 0")).collect();
            let mut parts = eqs;
            parts.extend(ineqs);
            out.push_str(&format!("{{ {} }}\n", parts.join(", ")));
        }
        out
    }
}

fn check_indices(n: usize, i: usize, j: usize) -> Result<(), TangencyError> {
    if j < i && i <= n {
        Ok(())
    } else {
        Err(TangencyError::IndexOutOfRange { n, i, j })
    }
}

fn ambient(n: usize) -> Vec<String> {
    (0..=n).map(xvar).collect()
}

/// The full tangency locus of `{x0 = h_i^2}` and `{x0 = h_j^2}`: the
/// primary cell `{x0 = h_j^2, h_{i,j} = 0}` together with the deeper cells
/// `{x0 = h_j^2, h_{i,k} = 0, h_{j,k} = 0}` for `k < j`.
pub fn t_locus(n: usize, i: usize, j: usize) -> Result<SemiAlgebraicSet, TangencyError> {
    check_indices(n, i, j)?;
    let fam = HFamily::new();
    let graph = &Polynomial::var(&xvar(0)) - &fam.h_squared(j);
    let mut cells = vec![Cell::new(vec![graph.clone(), fam.h_shift(i, j)], Vec::new())];
    for k in 0..j {
        cells.push(Cell::new(
            vec![graph.clone(), fam.h_shift(i, k), fam.h_shift(j, k)],
            Vec::new(),
        ));
    }
    Ok(SemiAlgebraicSet::new(ambient(n), cells))
}

/// The primary tangency: the single cell `{x0 = h_j^2, h_{i,j} = 0}`.
pub fn tau_locus(n: usize, i: usize, j: usize) -> Result<SemiAlgebraicSet, TangencyError> {
    check_indices(n, i, j)?;
    let fam = HFamily::new();
    let graph = &Polynomial::var(&xvar(0)) - &fam.h_squared(j);
    let cell = Cell::new(vec![graph, fam.h_shift(i, j)], Vec::new());
    Ok(SemiAlgebraicSet::new(ambient(n), vec![cell]))
}

/// The common boundary face of the sign-model pieces `i` and `j`: the
/// piece-`i` cell with the extra equation `h_{i,j} o sigma = 0`.
pub fn eps_intersection(
    n: usize,
    i: usize,
    j: usize,
    eps: &SignVector,
) -> Result<SemiAlgebraicSet, TangencyError> {
    check_indices(n, i, j)?;
    let piece = build_gamma_eps(n, i, eps)?;
    let fam = HFamily::new();
    let face = fam.h_shift(i, j).flip_vars(&sigma_flips(eps, i));
    let cell = Cell::new(vec![piece.equation(), face], piece.inequalities.clone());
    Ok(SemiAlgebraicSet::new(ambient(n), vec![cell]))
}

/// Report of the iterated-primary-tangency identity: the primary tangency,
/// computed inside `{x0 = h_k^2}` between the traces of the `n`- and
/// `j`-pieces, equals the intersection of the ambient primary tangencies.
#[derive(Debug, Clone)]
pub struct TauOfTauReport {
    pub n: usize,
    pub j: usize,
    pub k: usize,
    /// Left side: one cell, built from the reduced family inside the slice.
    pub lhs: SemiAlgebraicSet,
    /// Right side: one cell, the intersection of the two primary cells.
    pub rhs: SemiAlgebraicSet,
    /// Every left-side equation appears verbatim on the right.
    pub lhs_equations_in_rhs: bool,
    /// Cofactor `q` with `(x0 - h_j^2) = (x0 - h_k^2) + q * h_{j,k}`,
    /// certifying the right side's extra equation on the left side.
    pub certificate: Option<Polynomial>,
    /// Exact rational points checked against both sides.
    pub samples_checked: usize,
    pub pass: bool,
}

/// Certifies `tau(tau(G_n, G_k), tau(G_j, G_k)) = tau(G_n, G_j) n tau(G_j, G_k)`
/// for `0 <= k < j <= n - 1` by syntactic containment, an exact division
/// certificate for the one non-shared equation, and rational sampling.
pub fn tau_of_tau_check(n: usize, j: usize, k: usize) -> Result<TauOfTauReport, TangencyError> {
    if !(k < j && j + 1 <= n) {
        return Err(TangencyError::IndexOutOfRange { n, i: j, j: k });
    }
    let fam = HFamily::new();
    // Inside {x0 = h_k^2} with base chart (x1..xn), the traces of the two
    // tangencies are graphs over x_{k+2}..: x_{k+1} = h_{j,k+1}^2 (from
    // h_{j,k} = 0) and x_{k+1} = h_{n,k+1}^2.  Running the primary-tangency
    // construction on that reduced family (graph coordinate x_{k+1},
    // generators shifted by k+1) yields the two equations below; the first
    // is literally h_{j,k} and the second literally h_{n,j}.
    let reduced_graph = &Polynomial::var(&xvar(k + 1)) - &fam.h_shift(j, k + 1).pow(2);
    assert_eq!(reduced_graph, fam.h_shift(j, k), "reduced graph equation telescopes");
    let reduced_face = fam.h_shift(n, j);
    let slice = &Polynomial::var(&xvar(0)) - &fam.h_squared(k);
    let lhs_cell = Cell::new(vec![slice.clone(), reduced_graph, reduced_face], Vec::new());
    let lhs = SemiAlgebraicSet::new(ambient(n), vec![lhs_cell.clone()]);

    let tau_nj = tau_locus(n, n, j)?;
    let tau_jk = tau_locus(n, j, k)?;
    let mut rhs_eqs = tau_nj.cells[0].equations.clone();
    rhs_eqs.extend(tau_jk.cells[0].equations.clone());
    let rhs_cell = Cell::new(rhs_eqs, Vec::new());
    let rhs = SemiAlgebraicSet::new(ambient(n), vec![rhs_cell.clone()]);

    let lhs_equations_in_rhs =
        lhs_cell.equations.iter().all(|e| rhs_cell.equations.contains(e));

    // The only right-side equation missing on the left is x0 - h_j^2; it
    // follows from x0 - h_k^2 and h_{j,k} via h_k^2 - h_j^2 = q * h_{j,k}.
    let gap = &fam.h_squared(k) - &fam.h_squared(j);
    let certificate = gap.divide_exact(&fam.h_shift(j, k)).expect("divisor nonzero").quotient();
    if let Some(q) = &certificate {
        let lifted = &slice + &(q * &fam.h_shift(j, k));
        assert_eq!(lifted, &Polynomial::var(&xvar(0)) - &fam.h_squared(j));
    }

    let values = sample_values();
    let points = sample_iterated_tangency(&fam, n, j, k, &values);
    let samples_checked = points.len();
    let mut sampled_ok = true;
    for pt in &points {
        if !lhs.contains(pt) || !rhs.contains(pt) {
            sampled_ok = false;
        }
    }
    let pass = lhs_equations_in_rhs && certificate.is_some() && sampled_ok;
    Ok(TauOfTauReport {
        n,
        j,
        k,
        lhs,
        rhs,
        lhs_equations_in_rhs,
        certificate,
        samples_checked,
        pass,
    })
}

fn sample_values() -> Vec<Rat> {
    [(-1i64, 1i64), (-1, 2), (0, 1), (1, 2), (1, 1)]
        .iter()
        .map(|&(p, q)| Rat::new(p.into(), q.into()))
        .collect()
}

/// All assignments of `values` to `vars` (cartesian product).
fn grid_assign(vars: &[String], values: &[Rat]) -> Vec<RationalPoint> {
    let mut out = vec![RationalPoint::new()];
    for v in vars {
        let mut next = Vec::with_capacity(out.len() * values.len());
        for base in &out {
            for val in values {
                let mut pt = base.clone();
                pt.insert(v.clone(), val.clone());
                next.push(pt);
            }
        }
        out = next;
    }
    out
}

/// Exact points of the variety `{x0 = h_k^2, h_{j,k} = 0, h_{n,j} = 0}`:
/// free coordinates run over the value grid, the pinned coordinates are
/// back-substituted.
fn sample_iterated_tangency(
    fam: &HFamily,
    n: usize,
    j: usize,
    k: usize,
    values: &[Rat],
) -> Vec<RationalPoint> {
    let free: Vec<String> =
        (1..=n).filter(|&s| s != j + 1 && s != k + 1).map(xvar).collect();
    let mut out = Vec::new();
    for mut pt in grid_assign(&free, values) {
        let xj = fam.h_shift(n, j + 1).evaluate(&pt).expect("free coordinates bound");
        pt.insert(xvar(j + 1), &xj * &xj);
        let xk = fam.h_shift(j, k + 1).evaluate(&pt).expect("coordinates bound");
        pt.insert(xvar(k + 1), &xk * &xk);
        let x0 = fam.h_squared(k).evaluate(&pt).expect("base bound");
        pt.insert(xvar(0), x0);
        assert!(fam.h_shift(n, j).evaluate(&pt).unwrap().is_zero());
        assert!(fam.h_shift(j, k).evaluate(&pt).unwrap().is_zero());
        out.push(pt);
    }
    out
}

/// Exact points of the primary cell `{x0 = h_j^2, h_{i,j} = 0}` over a
/// grid of free-coordinate values.
pub fn sample_tau_points(n: usize, i: usize, j: usize, values: &[Rat]) -> Vec<RationalPoint> {
    let fam = HFamily::new();
    let free: Vec<String> = (1..=n).filter(|&s| s != j + 1).map(xvar).collect();
    let mut out = Vec::new();
    for mut pt in grid_assign(&free, values) {
        let xj = fam.h_shift(i, j + 1).evaluate(&pt).expect("free coordinates bound");
        pt.insert(xvar(j + 1), &xj * &xj);
        let x0 = fam.h_squared(j).evaluate(&pt).expect("base bound");
        pt.insert(xvar(0), x0);
        assert!(fam.h_shift(i, j).evaluate(&pt).unwrap().is_zero());
        out.push(pt);
    }
    out
}

/// Exact points of the deeper cell `{x0 = h_j^2, h_{i,k} = 0, h_{j,k} = 0}`.
///
/// The cell's variety splits into back-substitutable branches: for each
/// `m` with `k < m < j` the branch `h_{i,m} + h_{j,m} = 0` (solved by
/// `x_{m+1} = (h_{i,m+1}^2 + h_{j,m+1}^2)/2`), plus the terminal branch
/// `h_{i,j} = 0`; on every branch `x_{k+1} = h_{i,k+1}^2` then pins
/// `h_{i,k}` (and with it `h_{j,k}`) to zero.
pub fn sample_t_cell_points(
    n: usize,
    i: usize,
    j: usize,
    k: usize,
    values: &[Rat],
) -> Vec<RationalPoint> {
    let fam = HFamily::new();
    let mut out = Vec::new();
    let half = Rat::new(1.into(), 2.into());
    for m in k + 1..j {
        let free: Vec<String> =
            (1..=n).filter(|&s| s != m + 1 && s != k + 1).map(xvar).collect();
        for mut pt in grid_assign(&free, values) {
            let a = fam.h_shift(i, m + 1).evaluate(&pt).expect("free bound");
            let b = fam.h_shift(j, m + 1).evaluate(&pt).expect("free bound");
            pt.insert(xvar(m + 1), &(&(&a * &a) + &(&b * &b)) * &half);
            let c = fam.h_shift(i, k + 1).evaluate(&pt).expect("bound");
            pt.insert(xvar(k + 1), &c * &c);
            let x0 = fam.h_squared(j).evaluate(&pt).expect("bound");
            pt.insert(xvar(0), x0);
            assert!(fam.h_shift(i, k).evaluate(&pt).unwrap().is_zero());
            assert!(fam.h_shift(j, k).evaluate(&pt).unwrap().is_zero());
            out.push(pt);
        }
    }
    let free: Vec<String> = (1..=n).filter(|&s| s != j + 1 && s != k + 1).map(xvar).collect();
    for mut pt in grid_assign(&free, values) {
        let a = fam.h_shift(i, j + 1).evaluate(&pt).expect("free bound");
        pt.insert(xvar(j + 1), &a * &a);
        let c = fam.h_shift(i, k + 1).evaluate(&pt).expect("bound");
        pt.insert(xvar(k + 1), &c * &c);
        let x0 = fam.h_squared(j).evaluate(&pt).expect("bound");
        pt.insert(xvar(0), x0);
        assert!(fam.h_shift(i, k).evaluate(&pt).unwrap().is_zero());
        assert!(fam.h_shift(j, k).evaluate(&pt).unwrap().is_zero());
        out.push(pt);
    }
    out
}

/// A polynomial compiled for repeated floating-point evaluation.
struct CompiledPoly {
    terms: Vec<(f64, Vec<(usize, i32)>)>,
}

impl CompiledPoly {
    fn compile(p: &Polynomial, vars: &[String]) -> CompiledPoly {
        let index: BTreeMap<&String, usize> =
            vars.iter().enumerate().map(|(c, v)| (v, c)).collect();
        let own: BTreeMap<usize, usize> = p
            .vars()
            .iter()
            .enumerate()
            .filter_map(|(c, v)| index.get(v).map(|&slot| (c, slot)))
            .collect();
        let terms = p
            .terms()
            .map(|(exps, coeff)| {
                let pows: Vec<(usize, i32)> = exps
                    .iter()
                    .enumerate()
                    .filter(|(_, &e)| e > 0)
                    .map(|(c, &e)| (own[&c], e as i32))
                    .collect();
                (coeff.to_f64().expect("finite coefficient"), pows)
            })
            .collect();
        CompiledPoly { terms }
    }

    fn eval(&self, xs: &[f64]) -> f64 {
        let mut acc = 0.0;
        for (c, pows) in &self.terms {
            let mut t = *c;
            for &(v, e) in pows {
                t *= xs[v].powi(e);
            }
            acc += t;
        }
        acc
    }
}

/// Brute-force tangency search: scans a `samples`-per-axis grid over
/// `[-1, 1]^base` and returns the exact rational grid points where the two
/// graph values and all gradient components agree within `tol`.
pub fn numeric_tangency_oracle(
    piece_a: &FrontPiece,
    piece_b: &FrontPiece,
    samples: usize,
    tol: f64,
) -> Vec<RationalPoint> {
    assert_eq!(piece_a.graph_coord, piece_b.graph_coord, "pieces must share a graph coordinate");
    assert_eq!(piece_a.ambient_vars, piece_b.ambient_vars, "pieces must share an ambient");
    assert!(samples >= 2, "need at least two samples per axis");
    let base: Vec<String> = piece_a
        .ambient_vars
        .iter()
        .filter(|v| **v != piece_a.graph_coord)
        .cloned()
        .collect();
    let diff = &piece_a.graph_eq - &piece_b.graph_eq;
    let mut compiled = vec![CompiledPoly::compile(&diff, &base)];
    for v in &base {
        compiled.push(CompiledPoly::compile(&diff.partial(v), &base));
    }
    let dim = base.len();
    let last = samples - 1;
    let coords: Vec<f64> =
        (0..samples).map(|k| (2 * k) as f64 / last as f64 - 1.0).collect();
    let total = samples.pow(dim as u32);
    let mut survivors: Vec<usize> = (0..total)
        .into_par_iter()
        .filter(|&flat| {
            let mut xs = [0.0f64; 8];
            let mut rem = flat;
            for d in 0..dim {
                xs[d] = coords[rem % samples];
                rem /= samples;
            }
            compiled.iter().all(|p| p.eval(&xs[..dim]).abs() <= tol)
        })
        .collect();
    survivors.sort_unstable();
    survivors
        .into_iter()
        .map(|flat| {
            let mut pt = RationalPoint::new();
            let mut rem = flat;
            for v in base.iter() {
                let k = rem % samples;
                rem /= samples;
                pt.insert(
                    v.clone(),
                    Rat::new(((2 * k) as i64 - last as i64).into(), (last as i64).into()),
                );
            }
            pt
        })
        .collect()
}

/// Agreement statistics for one pair of model pieces.
#[derive(Debug, Clone)]
pub struct PairAgreement {
    pub i: usize,
    pub j: usize,
    /// Grid points passing the numeric tangency test.
    pub survivors: usize,
    /// Worst distance (max equation value at the nearest cell) from a
    /// survivor to the symbolic locus.
    pub max_residual: f64,
    /// Exact cell points checked against the numeric predicate.
    pub cell_samples: usize,
    pub pass: bool,
}

/// Oracle-agreement report over all pairs `0 <= j < i <= n`.
#[derive(Debug, Clone)]
pub struct AgreementReport {
    pub n: usize,
    pub samples: usize,
    pub tol: f64,
    pub pairs: Vec<PairAgreement>,
    pub pass: bool,
}

/// Cross-validates the symbolic loci against the brute-force oracle:
/// every survivor must sit within `tol` of some cell (measured by the
/// largest equation value), and exact samples of every cell must pass the
/// numeric predicate with zero error.
pub fn oracle_agreement(n: usize, samples: usize, tol: f64) -> AgreementReport {
    let fam = HFamily::new();
    let values = sample_values();
    let mut pairs = Vec::new();
    for i in 1..=n {
        let piece_i = crate::fronts::build_gamma(n, i).expect("index in range");
        for j in 0..i {
            let piece_j = crate::fronts::build_gamma(n, j).expect("index in range");
            let found = numeric_tangency_oracle(&piece_i, &piece_j, samples, tol);
            let locus = t_locus(n, i, j).expect("indices valid");
            let mut max_residual = 0.0f64;
            for pt in &found {
                let mut lifted = pt.clone();
                let x0 = fam.h_squared(j).evaluate(pt).expect("base bound");
                lifted.insert(xvar(0), x0);
                let r = locus.residual(&lifted).to_f64().expect("finite residual");
                if r > max_residual {
                    max_residual = r;
                }
            }
            let diff = &piece_i.graph_eq - &piece_j.graph_eq;
            let base: Vec<String> =
                (1..=n).map(xvar).collect();
            let mut cell_samples = 0usize;
            let mut exact = true;
            let mut check_points = sample_tau_points(n, i, j, &values);
            for k in 0..j {
                check_points.extend(sample_t_cell_points(n, i, j, k, &values));
            }
            for pt in &check_points {
                if !locus.contains(pt) {
                    exact = false;
                }
                let base_pt: RationalPoint = pt
                    .iter()
                    .filter(|(v, _)| *v != &xvar(0))
                    .map(|(v, c)| (v.clone(), c.clone()))
                    .collect();
                if !diff.evaluate(&base_pt).expect("base bound").is_zero() {
                    exact = false;
                }
                for v in &base {
                    if !diff.partial(v).evaluate(&base_pt).expect("base bound").is_zero() {
                        exact = false;
                    }
                }
                cell_samples += 1;
            }
            let pass = max_residual <= tol && exact && cell_samples > 0;
            pairs.push(PairAgreement { i, j, survivors: found.len(), max_residual, cell_samples, pass });
        }
    }
    let pass = pairs.iter().all(|p| p.pass);
    AgreementReport { n, samples, tol, pairs, pass }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fronts::build_gamma;

    fn poly(s: &str) -> Polynomial {
        Polynomial::parse(s).unwrap()
    }

    fn pt(pairs: &[(&str, i64)]) -> RationalPoint {
        pairs
            .iter()
            .map(|&(v, c)| (v.to_string(), Rat::from_integer(c.into())))
            .collect()
    }

    #[test]
    fn tangency_locus_of_cusp_and_parabola() {
        let locus = t_locus(2, 2, 1).unwrap();
        let expected = SemiAlgebraicSet::new(
            vec!["x0".into(), "x1".into(), "x2".into()],
            vec![
                Cell::new(vec![poly("x0 - x1^2"), poly("x2")], vec![]),
                Cell::new(vec![poly("x0 - x1^2"), poly("x1 - x2^2"), poly("x1")], vec![]),
            ],
        );
        assert_eq!(locus, expected);
    }

    #[test]
    fn tangency_locus_of_line_and_parabola_is_origin() {
        let locus = t_locus(1, 1, 0).unwrap();
        assert_eq!(locus.cells.len(), 1);
        assert_eq!(
            locus.cells[0],
            Cell::new(vec![poly("x0"), poly("x1")], vec![])
        );
        assert!(t_locus(1, 1, 1).is_err());
        assert!(t_locus(2, 3, 1).is_err());
    }

    #[test]
    fn sample_point_lies_on_tangency_locus() {
        let locus = t_locus(2, 2, 1).unwrap();
        assert!(locus.contains(&pt(&[("x0", 1), ("x1", 1), ("x2", 0)])));
        assert!(!locus.contains(&pt(&[("x0", 1), ("x1", 1), ("x2", 1)])));
    }

    #[test]
    fn primary_tangency_is_first_cell() {
        let tau = tau_locus(2, 2, 1).unwrap();
        assert_eq!(tau.cells.len(), 1);
        assert_eq!(tau.cells[0], Cell::new(vec![poly("x0 - x1^2"), poly("x2")], vec![]));
        for i in 1..=3usize {
            let tau0 = tau_locus(3, i, 0).unwrap();
            let fam = HFamily::new();
            assert_eq!(
                tau0.cells[0],
                Cell::new(vec![poly("x0"), fam.h(i)], vec![])
            );
        }
        let t = t_locus(3, 3, 2).unwrap();
        let tau32 = tau_locus(3, 3, 2).unwrap();
        assert!(t.cells.contains(&tau32.cells[0]));
    }

    #[test]
    fn vanishing_of_both_lower_shifts_forces_the_window() {
        // h_{i,j-1} - h_{j,j-1} = -h_{i,j}^2, so the deeper cell at k = j-1
        // sits inside the primary locus of the next index.
        let fam = HFamily::new();
        for i in 2..=5usize {
            for j in 1..i {
                let lhs = &fam.h_shift(i, j - 1) - &fam.h_shift(j, j - 1);
                let rhs = fam.h_shift(i, j).pow(2).scale(&Rat::from_integer((-1).into()));
                assert_eq!(lhs, rhs);
            }
        }
    }

    #[test]
    fn window_equation_uses_only_middle_variables() {
        let fam = HFamily::new();
        for i in 1..=5usize {
            for j in 0..i {
                let support = fam.h_shift(i, j).support();
                let expected: std::collections::BTreeSet<String> =
                    (j + 1..=i).map(xvar).collect();
                assert_eq!(support, expected);
            }
        }
    }

    #[test]
    fn either_graph_cuts_the_same_locus() {
        // Replacing x0 = h_j^2 by x0 = h_i^2 gives the same set on every
        // cell: the difference of squares is an exact multiple of each
        // cell's defining equations.
        let fam = HFamily::new();
        for n in 1..=4usize {
            for i in 1..=n {
                for j in 0..i {
                    let gap = &fam.h_squared(i) - &fam.h_squared(j);
                    assert!(
                        gap.divide_exact(&fam.h_shift(i, j)).unwrap().quotient().is_some(),
                        "primary cell certificate ({n},{i},{j})"
                    );
                    for k in 0..j {
                        let dk = &fam.h_shift(i, k) - &fam.h_shift(j, k);
                        assert!(
                            gap.divide_exact(&dk).unwrap().quotient().is_some(),
                            "deeper cell certificate ({n},{i},{j},{k})"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn face_cell_of_sign_models() {
        let eps = SignVector::new(vec![1, 1]);
        let face = eps_intersection(1, 1, 0, &eps).unwrap();
        assert_eq!(face.cells.len(), 1);
        assert_eq!(
            face.cells[0],
            Cell::new(vec![poly("x0 - x1^2"), poly("x1")], vec![poly("x1")])
        );
    }

    #[test]
    fn face_points_lie_on_both_sign_pieces() {
        for n in 1..=3usize {
            for i in 1..=n {
                for j in 0..i {
                    for eps in SignVector::all(i + 1) {
                        let piece_i = build_gamma_eps(n, i, &eps).unwrap();
                        let piece_j = build_gamma_eps(n, j, &eps).unwrap();
                        let face = eps_intersection(n, i, j, &eps).unwrap();
                        // Walk the piece-i chart with u_{j+1} = 0 and the
                        // other chart coordinates positive.
                        let mut params = RationalPoint::new();
                        for s in 1..=i {
                            let val = if s == j + 1 { 0 } else { s as i64 };
                            params.insert(format!("u{s}"), Rat::from_integer(val.into()));
                        }
                        let mut point = RationalPoint::new();
                        for (v, expr) in &piece_i.quadrant_chart {
                            point.insert(v.clone(), expr.evaluate(&params).unwrap());
                        }
                        for s in i + 1..=n {
                            point.insert(xvar(s), Rat::from_integer((s as i64).into()));
                        }
                        let x0 = piece_i.graph_eq.evaluate(&point).unwrap();
                        point.insert(xvar(0), x0);
                        assert!(face.contains(&point), "face sample ({n},{i},{j})");
                        assert!(piece_i.contains(&point).unwrap());
                        assert!(piece_j.contains(&point).unwrap(), "shared face ({n},{i},{j})");
                    }
                }
            }
        }
    }

    #[test]
    fn sign_flips_carry_faces_into_primary_tangency() {
        for n in 1..=3usize {
            for i in 1..=n {
                for j in 0..i {
                    for eps in SignVector::all(i + 1) {
                        let piece_i = build_gamma_eps(n, i, &eps).unwrap();
                        let tau = tau_locus(n, i, j).unwrap();
                        let mut params = RationalPoint::new();
                        for s in 1..=i {
                            let val = if s == j + 1 { 0 } else { 1 };
                            params.insert(format!("u{s}"), Rat::from_integer(val.into()));
                        }
                        let mut point = RationalPoint::new();
                        for (v, expr) in &piece_i.quadrant_chart {
                            point.insert(v.clone(), expr.evaluate(&params).unwrap());
                        }
                        for s in i + 1..=n {
                            point.insert(xvar(s), Rat::zero());
                        }
                        let x0 = piece_i.graph_eq.evaluate(&point).unwrap();
                        point.insert(xvar(0), x0);
                        // Map through the coordinate sign flips.
                        let mut flipped = RationalPoint::new();
                        for (v, c) in &point {
                            let k: usize = v.strip_prefix('x').unwrap().parse().unwrap();
                            let s = if k == 0 {
                                eps.get(0)
                            } else if k <= i {
                                eps.get(k)
                            } else {
                                1
                            };
                            let val =
                                if s == -1 { -c.clone() } else { c.clone() };
                            flipped.insert(v.clone(), val);
                        }
                        assert!(tau.contains(&flipped), "flipped face ({n},{i},{j})");
                    }
                }
            }
        }
    }

    #[test]
    fn iterated_primary_tangency_in_the_plane_is_the_origin() {
        let report = tau_of_tau_check(2, 1, 0).unwrap();
        assert!(report.pass);
        assert!(report.lhs_equations_in_rhs);
        let origin = pt(&[("x0", 0), ("x1", 0), ("x2", 0)]);
        assert!(report.lhs.contains(&origin));
        assert!(report.rhs.contains(&origin));
        // Both sides reduce to the origin: every sampled point is it.
        let values = sample_values();
        let fam = HFamily::new();
        for sample in sample_iterated_tangency(&fam, 2, 1, 0, &values) {
            assert_eq!(sample, origin);
        }
    }

    #[test]
    fn iterated_primary_tangency_passes_up_to_dimension_four() {
        for n in 2..=4usize {
            for j in 1..n {
                for k in 0..j {
                    let report = tau_of_tau_check(n, j, k).unwrap();
                    assert!(report.pass, "iterated tangency ({n},{j},{k})");
                    assert!(report.samples_checked > 0);
                    assert!(report.certificate.is_some());
                }
            }
        }
        assert!(tau_of_tau_check(2, 2, 0).is_err());
        assert!(tau_of_tau_check(2, 1, 1).is_err());
    }

    #[test]
    fn oracle_finds_only_the_origin_for_line_and_parabola() {
        let a = build_gamma(1, 1).unwrap();
        let b = build_gamma(1, 0).unwrap();
        let found = numeric_tangency_oracle(&a, &b, 201, 1e-9);
        assert_eq!(found.len(), 1);
        assert!(found[0]["x1"].is_zero());
    }

    #[test]
    fn oracle_reports_nothing_for_disjoint_graphs() {
        let a = build_gamma(1, 1).unwrap();
        let mut b = build_gamma(1, 0).unwrap();
        b.graph_eq = Polynomial::constant(Rat::from_integer(2.into()));
        let found = numeric_tangency_oracle(&a, &b, 201, 1e-9);
        assert!(found.is_empty());
    }

    #[test]
    fn oracle_agreement_in_the_plane() {
        let report = oracle_agreement(2, 201, 1e-9);
        assert!(report.pass);
        assert_eq!(report.pairs.len(), 3);
        for pair in &report.pairs {
            assert!(pair.survivors > 0, "pair ({}, {})", pair.i, pair.j);
            assert_eq!(pair.max_residual, 0.0, "survivors lie exactly on the locus");
            assert!(pair.cell_samples > 0);
        }
    }

    #[test]
    fn cell_samplers_produce_exact_locus_points() {
        let values = sample_values();
        for n in 1..=4usize {
            for i in 1..=n {
                for j in 0..i {
                    let locus = t_locus(n, i, j).unwrap();
                    for p in sample_tau_points(n, i, j, &values) {
                        assert!(locus.contains(&p));
                    }
                    for k in 0..j {
                        for p in sample_t_cell_points(n, i, j, k, &values) {
                            assert!(locus.contains(&p));
                        }
                    }
                }
            }
        }
    }
}

//! Python bindings for the arboreal library.
//!
//! Everything crosses the boundary as plain data: trees and fronts travel
//! as their canonical JSON strings, rationals as `p/q` strings, meshes as
//! OBJ text, and verification reports as JSON.  The functions mirror the
//! command line surface so scripted use needs no subprocess plumbing.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use arboreal::fronts::{build_front as assemble_front, sample_mesh, Front};
use arboreal::poly::{parse_rat, RationalPoint};
use arboreal::symlin::model_edge_sign;
use arboreal::tangency::{t_locus, tau_locus};
use arboreal::trees::SignedRootedTree;
use arboreal::verify::{run_all, run_normalization_flow};

/// Maps any displayable library error to a Python ValueError.
fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn load_tree(tree_json: &str) -> PyResult<SignedRootedTree> {
    SignedRootedTree::from_json(tree_json).map_err(value_err)
}

/// Canonical bracket string of a signed rooted tree; equal strings mean
/// isomorphic trees.
#[pyfunction]
fn canonical_form(tree_json: &str) -> PyResult<String> {
    Ok(load_tree(tree_json)?.canonical_form())
}

/// Order of the root-fixing, sign-preserving automorphism group.
#[pyfunction]
fn automorphism_order(tree_json: &str) -> PyResult<u128> {
    Ok(load_tree(tree_json)?.automorphism_order())
}

/// Removes a leaf and returns the smaller tree as JSON.
#[pyfunction]
fn prune_leaf(tree_json: &str, leaf: &str) -> PyResult<String> {
    Ok(load_tree(tree_json)?.prune_leaf(leaf).map_err(value_err)?.to_json())
}

/// Builds the front model of a tree and returns it as JSON.
#[pyfunction]
fn build_front(tree_json: &str) -> PyResult<String> {
    Ok(assemble_front(&load_tree(tree_json)?).to_json())
}

/// Vertices whose piece contains the point; coordinates are rational
/// strings in the front's ambient order.
#[pyfunction]
fn membership(front_json: &str, point: Vec<String>) -> PyResult<Vec<String>> {
    let front = Front::from_json(front_json).map_err(value_err)?;
    if point.len() != front.ambient_vars.len() {
        return Err(PyValueError::new_err(format!(
            "expected {} coordinates, got {}",
            front.ambient_vars.len(),
            point.len()
        )));
    }
    let mut bound = RationalPoint::new();
    for (var, text) in front.ambient_vars.iter().zip(point.iter()) {
        bound.insert(var.clone(), parse_rat(text).map_err(value_err)?);
    }
    let vertices = front.membership(&bound).map_err(value_err)?;
    Ok(vertices.into_iter().collect())
}

/// Samples the front of a tree on `[-box_bound, box_bound]` and returns
/// OBJ text with one named object per piece.
#[pyfunction]
#[pyo3(signature = (tree_json, box_bound=1.0, resolution=16))]
fn sample_obj(tree_json: &str, box_bound: f64, resolution: usize) -> PyResult<String> {
    let front = assemble_front(&load_tree(tree_json)?);
    let mesh = sample_mesh(&front, box_bound, resolution).map_err(value_err)?;
    Ok(mesh.to_obj())
}

/// Renders the tangency locus of pieces `i` and `j` in dimension `n`;
/// `primary` selects the closure taken in the front models.
#[pyfunction]
#[pyo3(signature = (n, i, j, primary=false))]
fn tangency_locus(n: usize, i: usize, j: usize, primary: bool) -> PyResult<String> {
    let set = if primary { tau_locus(n, i, j) } else { t_locus(n, i, j) };
    Ok(set.map_err(value_err)?.render())
}

/// Metric sign of a non-root edge, computed from the conormal geometry
/// rather than read off the label.
#[pyfunction]
fn edge_sign(tree_json: &str, a: &str, b: &str) -> PyResult<i8> {
    model_edge_sign(&load_tree(tree_json)?, a, b).map_err(value_err)
}

/// Runs every identity suite up to dimension `max_n` and returns the
/// reports as a JSON array.
#[pyfunction]
#[pyo3(signature = (max_n=4))]
fn verify_all(max_n: usize) -> PyResult<String> {
    let reports = run_all(max_n);
    serde_json::to_string_pretty(&reports).map_err(value_err)
}

/// Integrates the plane normalization flow and returns its report as
/// JSON; `beta` is a rational string.
#[pyfunction]
#[pyo3(signature = (beta="1/10", steps=1000, box_bound=0.2))]
fn flow_report(beta: &str, steps: usize, box_bound: f64) -> PyResult<String> {
    let b = parse_rat(beta).map_err(value_err)?;
    let report = run_normalization_flow(2, &b, steps, box_bound).map_err(value_err)?;
    serde_json::to_string_pretty(&report).map_err(value_err)
}

#[pymodule]
fn arboreal_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(canonical_form, m)?)?;
    m.add_function(wrap_pyfunction!(automorphism_order, m)?)?;
    m.add_function(wrap_pyfunction!(prune_leaf, m)?)?;
    m.add_function(wrap_pyfunction!(build_front, m)?)?;
    m.add_function(wrap_pyfunction!(membership, m)?)?;
    m.add_function(wrap_pyfunction!(sample_obj, m)?)?;
    m.add_function(wrap_pyfunction!(tangency_locus, m)?)?;
    m.add_function(wrap_pyfunction!(edge_sign, m)?)?;
    m.add_function(wrap_pyfunction!(verify_all, m)?)?;
    m.add_function(wrap_pyfunction!(flow_report, m)?)?;
    Ok(())
}

//! Python bindings. Vectors travel as 3-element lists, structured results as
//! plain dicts (converted through JSON).

use hfvp_core::eval::Ablation;
use hfvp_core::hvp::{mwis_ring, VpGraph};
use hfvp_core::synth::synthetic_prior;
use hfvp_core::{
    AlgorithmParams, CameraFrame, CategoricalPrior, ImageLine, SceneSpec, SegmentSet, SphereLine, SpherePoint,
};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;
use serde::Serialize;

type Vec3 = [f64; 3];

fn err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn frame(width: f64, height: f64) -> PyResult<CameraFrame> {
    CameraFrame::new(width, height).map_err(err)
}

fn to_py<'py>(py: Python<'py>, value: &impl Serialize) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(err)?;
    py.import("json")?.call_method1("loads", (text,))
}

fn from_py<T: serde::de::DeserializeOwned>(py: Python<'_>, obj: &Bound<'_, PyAny>) -> PyResult<T> {
    let text: String = py.import("json")?.call_method1("dumps", (obj,))?.extract()?;
    serde_json::from_str(&text).map_err(err)
}

/// Lifts pixel (u, v) of a width x height image to the unit sphere.
#[pyfunction]
fn lift_point(width: f64, height: f64, u: f64, v: f64) -> PyResult<Vec3> {
    Ok(hfvp_core::lift_point(&frame(width, height)?, u, v).map_err(err)?.to_array())
}

/// Line through two sphere points.
#[pyfunction]
fn join(p: Vec3, q: Vec3) -> PyResult<Vec3> {
    let p = SpherePoint::from_array(p).map_err(err)?;
    let q = SpherePoint::from_array(q).map_err(err)?;
    Ok(hfvp_core::join(&p, &q).map_err(err)?.to_array())
}

/// Intersection of two sphere lines.
#[pyfunction]
fn meet(l: Vec3, m: Vec3) -> PyResult<Vec3> {
    let l = SphereLine::from_array(l).map_err(err)?;
    let m = SphereLine::from_array(m).map_err(err)?;
    Ok(hfvp_core::meet(&l, &m).map_err(err)?.to_array())
}

/// Angle between the axes of two vectors, radians.
#[pyfunction]
fn angle(x: Vec3, y: Vec3) -> PyResult<f64> {
    let x = SpherePoint::from_array(x).map_err(err)?;
    let y = SpherePoint::from_array(y).map_err(err)?;
    Ok(hfvp_core::angle(x.coords(), y.coords()))
}

#[pyfunction]
#[pyo3(signature = (p, l, theta_con = 2f64.to_radians()))]
fn consistency(p: Vec3, l: Vec3, theta_con: f64) -> PyResult<f64> {
    let p = SpherePoint::from_array(p).map_err(err)?;
    let l = SphereLine::from_array(l).map_err(err)?;
    Ok(hfvp_core::consistency(&p, &l, theta_con))
}

#[pyfunction]
fn squash(offset: f64, kappa: f64) -> PyResult<f64> {
    hfvp_core::squash(offset, kappa).map_err(err)
}

#[pyfunction]
fn unsquash(w: f64, kappa: f64) -> PyResult<f64> {
    hfvp_core::unsquash(w, kappa).map_err(err)
}

/// Horizon error of two pixel lines `[a, b, c]`, normalized by height.
#[pyfunction]
fn horizon_error(detected: Vec3, truth: Vec3, width: f64, height: f64) -> PyResult<f64> {
    Ok(hfvp_core::horizon_error(
        &ImageLine::from_array(detected),
        &ImageLine::from_array(truth),
        &frame(width, height)?,
    ))
}

#[pyfunction]
#[pyo3(signature = (errors, threshold = 0.25))]
fn auc(errors: Vec<f64>, threshold: f64) -> PyResult<f64> {
    hfvp_core::auc(&errors, threshold).map_err(err)
}

/// Maximum-weight independent set of a graph with at most one cycle
/// through every node. Returns (nodes, weight).
#[pyfunction]
fn mwis(weights: Vec<f64>, edges: Vec<(usize, usize)>) -> PyResult<(Vec<usize>, f64)> {
    let g = VpGraph::from_edges(weights, &edges).map_err(err)?;
    let sol = mwis_ring(&g);
    Ok((sol.nodes, sol.weight))
}

/// Synthetic Manhattan scene with a matching `prior`. Camera angles are in
/// degrees; any left unset are drawn from the seed.
#[pyfunction]
#[pyo3(signature = (seed = 0, families = 2, segments_per_family = 32, outlier_fraction = 0.2, noise = 0.5, width = 640.0, height = 480.0, fov = None, pitch = None, roll = None))]
#[allow(clippy::too_many_arguments)]
fn make_scene<'py>(
    py: Python<'py>,
    seed: u64,
    families: usize,
    segments_per_family: usize,
    outlier_fraction: f64,
    noise: f64,
    width: f64,
    height: f64,
    fov: Option<f64>,
    pitch: Option<f64>,
    roll: Option<f64>,
) -> PyResult<Bound<'py, PyDict>> {
    let mut spec = SceneSpec {
        n_families: families,
        segments_per_family,
        outlier_fraction,
        endpoint_noise_px: noise,
        width,
        height,
        seed,
        ..SceneSpec::default()
    }
    .with_random_camera(seed);
    spec.fov = fov.unwrap_or(spec.fov);
    spec.pitch = pitch.unwrap_or(spec.pitch);
    spec.roll = roll.unwrap_or(spec.roll);
    let sc = hfvp_core::make_scene(&spec).map_err(err)?;

    let d = PyDict::new(py);
    d.set_item("width", width)?;
    d.set_item("height", height)?;
    d.set_item("fov", sc.fov)?;
    d.set_item("pitch", sc.pitch)?;
    d.set_item("roll", sc.roll)?;
    let segs: Vec<[f64; 4]> = sc
        .segments
        .segments
        .iter()
        .map(|s| [s.p1.0, s.p1.1, s.p2.0, s.p2.1])
        .collect();
    d.set_item("segments", segs)?;
    d.set_item("horizon", sc.gt_horizon_image.to_array())?;
    d.set_item("zenith", sc.gt_zenith.to_array())?;
    let vps: Vec<Vec3> = sc.horizontal_vps().iter().map(|p| p.to_array()).collect();
    d.set_item("vps", vps)?;
    d.set_item("outlier_ids", sc.outlier_ids.clone())?;
    // a context prior centred near the truth, for the cnn-* modes
    let prior = synthetic_prior(&sc, 5.0, 2f64.to_radians(), seed).map_err(err)?;
    d.set_item("prior", to_py(py, &prior)?)?;
    Ok(d)
}

/// Detects the horizon and vanishing points from segments `[x1, y1, x2, y2]`.
/// `prior` is a categorical prior dict in the `.prior.json` layout; the
/// `cnn-*` modes require it.
#[pyfunction]
#[pyo3(signature = (segments, width, height, mode = "none-full", prior = None, seed = 0))]
fn detect<'py>(
    py: Python<'py>,
    segments: Vec<[f64; 4]>,
    width: f64,
    height: f64,
    mode: &str,
    prior: Option<Bound<'py, PyAny>>,
    seed: u64,
) -> PyResult<Bound<'py, PyAny>> {
    let mode: Ablation = mode.parse().map_err(err)?;
    let set = SegmentSet::from_endpoints(
        frame(width, height)?,
        segments.iter().map(|s| ((s[0], s[1]), (s[2], s[3]))),
    )
    .map_err(err)?;
    let prior: Option<CategoricalPrior> = match prior {
        Some(p) => {
            let p: CategoricalPrior = from_py(py, &p)?;
            p.validate().map_err(err)?;
            Some(p)
        }
        None => None,
    };
    let r = py
        .allow_threads(|| hfvp_core::run_mode(&set, prior.as_ref(), mode, &AlgorithmParams::default(), seed))
        .map_err(err)?;
    to_py(py, &r)
}

#[pymodule]
fn hfvp(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(lift_point, m)?)?;
    m.add_function(wrap_pyfunction!(join, m)?)?;
    m.add_function(wrap_pyfunction!(meet, m)?)?;
    m.add_function(wrap_pyfunction!(angle, m)?)?;
    m.add_function(wrap_pyfunction!(consistency, m)?)?;
    m.add_function(wrap_pyfunction!(squash, m)?)?;
    m.add_function(wrap_pyfunction!(unsquash, m)?)?;
    m.add_function(wrap_pyfunction!(horizon_error, m)?)?;
    m.add_function(wrap_pyfunction!(auc, m)?)?;
    m.add_function(wrap_pyfunction!(mwis, m)?)?;
    m.add_function(wrap_pyfunction!(make_scene, m)?)?;
    m.add_function(wrap_pyfunction!(detect, m)?)?;
    Ok(())
}

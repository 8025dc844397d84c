//! Python bindings: `import camlrp`.

use std::sync::Arc;

use camlrp_core::metrics::{self, MetricConfig};
use camlrp_core::{
    AttributionMap, BenchmarkImage, BinaryMask, Error, Explainer, ExplanationConfig, GradCamConfig, LrpConfig, MapKind,
    Method, MethodExplainer,
};
use pyo3::exceptions::{PyOSError, PyValueError};
use pyo3::prelude::*;

fn to_py(e: Error) -> PyErr {
    if e.is_io() {
        PyOSError::new_err(e.to_string())
    } else {
        PyValueError::new_err(e.to_string())
    }
}

/// Dense f32 tensor: a shape plus row-major values.
#[pyclass(name = "Tensor", frozen, from_py_object, module = "camlrp")]
#[derive(Clone)]
struct PyTensor {
    inner: camlrp_core::Tensor,
}

#[pymethods]
impl PyTensor {
    #[new]
    fn new(shape: Vec<usize>, data: Vec<f32>) -> PyResult<Self> {
        Ok(Self {
            inner: camlrp_core::Tensor::new(shape, data).map_err(to_py)?,
        })
    }

    #[getter]
    fn shape(&self) -> Vec<usize> {
        self.inner.shape().to_vec()
    }

    #[getter]
    fn data(&self) -> Vec<f32> {
        self.inner.data().to_vec()
    }

    fn sum(&self) -> f64 {
        self.inner.sum()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!("Tensor(shape={:?})", self.inner.shape())
    }
}

fn wrap(map: &AttributionMap) -> PyTensor {
    PyTensor {
        inner: map.values().clone(),
    }
}

fn as_map(t: &PyTensor) -> PyResult<AttributionMap> {
    AttributionMap::new(t.inner.clone(), MapKind::Fused).map_err(to_py)
}

fn as_mask(t: &PyTensor) -> PyResult<BinaryMask> {
    let s = t.inner.shape();
    if s.len() != 2 {
        return Err(PyValueError::new_err(format!("mask must be 2-D, got shape {s:?}")));
    }
    BinaryMask::new(s[0], s[1], t.inner.data().iter().map(|&v| v != 0.0).collect()).map_err(to_py)
}

/// Fused explanation and its intermediates, all at input resolution.
#[pyclass(name = "Explanation", frozen, module = "camlrp")]
struct PyExplanation {
    #[pyo3(get)]
    class_index: usize,
    #[pyo3(get)]
    final_map: PyTensor,
    #[pyo3(get)]
    gradcam: PyTensor,
    #[pyo3(get)]
    mask: PyTensor,
    #[pyo3(get)]
    lrp_avg: PyTensor,
    #[pyo3(get)]
    product: PyTensor,
}

#[pyclass(name = "Model", frozen, module = "camlrp")]
struct PyModel {
    inner: Arc<camlrp_core::Model>,
}

#[allow(clippy::too_many_arguments)]
fn pipeline(tau: f32, sigma: f32, alpha: f32, beta: f32, epsilon: f32, layer: Option<String>) -> PyResult<ExplanationConfig> {
    let cfg = ExplanationConfig {
        tau,
        sigma,
        gradcam: GradCamConfig {
            target_layer: layer,
            ..Default::default()
        },
        lrp: LrpConfig { epsilon, alpha, beta },
    };
    cfg.validate().map_err(to_py)?;
    Ok(cfg)
}

impl PyModel {
    fn class_or_predicted(&self, image: &PyTensor, class_index: Option<usize>) -> PyResult<usize> {
        match class_index {
            Some(c) => Ok(c),
            None => Ok(self.inner.logits(&image.inner).map_err(to_py)?.argmax()),
        }
    }

    fn attribute(&self, py: Python<'_>, method: Method, image: &PyTensor, class_index: Option<usize>, cfg: ExplanationConfig) -> PyResult<PyTensor> {
        let class = self.class_or_predicted(image, class_index)?;
        let model = Arc::clone(&self.inner);
        let img = image.inner.clone();
        let map = py
            .detach(move || MethodExplainer::new(&model, method, cfg).attribute(&img, class))
            .map_err(to_py)?;
        Ok(wrap(&map))
    }
}

#[pymethods]
impl PyModel {
    #[getter]
    fn class_count(&self) -> usize {
        self.inner.class_count()
    }

    #[getter]
    fn input_shape(&self) -> Vec<usize> {
        self.inner.input().shape().to_vec()
    }

    #[getter]
    fn layer_names(&self) -> Vec<String> {
        self.inner.layers().iter().map(|l| l.name.clone()).collect()
    }

    fn logits(&self, image: &PyTensor) -> PyResult<Vec<f32>> {
        Ok(self.inner.logits(&image.inner).map_err(to_py)?.into_data())
    }

    fn predict(&self, image: &PyTensor) -> PyResult<usize> {
        self.class_or_predicted(image, None)
    }

    /// Gradient of a class logit with respect to a layer's output ("input" for pixels).
    fn gradient(&self, image: &PyTensor, class_index: usize, layer: &str) -> PyResult<PyTensor> {
        let trace = camlrp_core::forward(&self.inner, &image.inner).map_err(to_py)?;
        let g = camlrp_core::grad_wrt_layer(&self.inner, &trace, class_index, layer).map_err(to_py)?;
        Ok(PyTensor { inner: g })
    }

    #[pyo3(signature = (image, class_index=None, tau=0.25, sigma=2.0, alpha=1.0, beta=0.0, epsilon=1e-6, layer=None))]
    #[allow(clippy::too_many_arguments)]
    fn explain(
        &self,
        py: Python<'_>,
        image: &PyTensor,
        class_index: Option<usize>,
        tau: f32,
        sigma: f32,
        alpha: f32,
        beta: f32,
        epsilon: f32,
        layer: Option<String>,
    ) -> PyResult<PyExplanation> {
        let cfg = pipeline(tau, sigma, alpha, beta, epsilon, layer)?;
        let class = self.class_or_predicted(image, class_index)?;
        let model = Arc::clone(&self.inner);
        let img = image.inner.clone();
        let e = py
            .detach(move || camlrp_core::explain(&model, &img, class, &cfg))
            .map_err(to_py)?;
        Ok(PyExplanation {
            class_index: e.class_index,
            final_map: wrap(&e.final_map),
            gradcam: wrap(&e.gradcam_raw),
            mask: wrap(&e.gradcam_mask),
            lrp_avg: wrap(&e.lrp_avg),
            product: wrap(&e.product),
        })
    }

    /// Upsampled, min-max scaled GradCAM++ map.
    #[pyo3(signature = (image, class_index=None, layer=None))]
    fn gradcam(&self, py: Python<'_>, image: &PyTensor, class_index: Option<usize>, layer: Option<String>) -> PyResult<PyTensor> {
        let cfg = pipeline(0.25, 2.0, 1.0, 0.0, 1e-6, layer)?;
        self.attribute(py, Method::GradCam, image, class_index, cfg)
    }

    /// Channel-averaged composite LRP relevance.
    #[pyo3(signature = (image, class_index=None, alpha=1.0, beta=0.0, epsilon=1e-6))]
    fn lrp(&self, py: Python<'_>, image: &PyTensor, class_index: Option<usize>, alpha: f32, beta: f32, epsilon: f32) -> PyResult<PyTensor> {
        let cfg = pipeline(0.25, 2.0, alpha, beta, epsilon, None)?;
        self.attribute(py, Method::Lrp, image, class_index, cfg)
    }

    /// Benchmark report as `(csv, json)` strings. `masks` may contain `None`.
    #[pyo3(signature = (images, masks=None, methods=None, seed=0, infidelity=false))]
    fn benchmark(
        &self,
        py: Python<'_>,
        images: Vec<PyTensor>,
        masks: Option<Vec<Option<PyTensor>>>,
        methods: Option<Vec<String>>,
        seed: u64,
        infidelity: bool,
    ) -> PyResult<(String, String)> {
        let methods = match methods {
            Some(names) => names.iter().map(|m| m.parse()).collect::<Result<Vec<Method>, _>>().map_err(to_py)?,
            None => Method::ALL.to_vec(),
        };
        let masks = masks.unwrap_or_else(|| vec![None; images.len()]);
        if masks.len() != images.len() {
            return Err(PyValueError::new_err("masks must match images in length"));
        }
        let inputs = images
            .iter()
            .zip(&masks)
            .enumerate()
            .map(|(i, (img, mask))| {
                Ok(BenchmarkImage {
                    id: format!("image{i}"),
                    image: img.inner.clone(),
                    mask: mask.as_ref().map(as_mask).transpose()?,
                    class_index: None,
                })
            })
            .collect::<PyResult<Vec<_>>>()?;
        let model = Arc::clone(&self.inner);
        let report = py
            .detach(move || {
                camlrp_core::benchmark(&model, &inputs, &methods, &ExplanationConfig::default(), &MetricConfig::with_seed(seed), infidelity)
            })
            .map_err(to_py)?;
        Ok((report.to_csv(), report.to_json().map_err(to_py)?))
    }

    fn __repr__(&self) -> String {
        format!(
            "Model(input={:?}, classes={}, layers={})",
            self.inner.input().shape(),
            self.inner.class_count(),
            self.inner.layers().len()
        )
    }
}

/// Load `model.json` and its weight blob (default: same stem, `.bin`).
#[pyfunction]
#[pyo3(signature = (manifest, blob=None))]
fn load_model(manifest: std::path::PathBuf, blob: Option<std::path::PathBuf>) -> PyResult<PyModel> {
    let blob = blob.unwrap_or_else(|| manifest.with_extension("bin"));
    Ok(PyModel {
        inner: Arc::new(camlrp_core::load_model(&manifest, &blob).map_err(to_py)?),
    })
}

/// RGB PNG as a `[3, H, W]` tensor in `[0, 1]`.
#[pyfunction]
fn load_image(path: std::path::PathBuf) -> PyResult<PyTensor> {
    Ok(PyTensor {
        inner: camlrp_core::load_image(path).map_err(to_py)?,
    })
}

/// Grayscale PNG mask as a `[H, W]` tensor of 0/1.
#[pyfunction]
fn load_mask(path: std::path::PathBuf) -> PyResult<PyTensor> {
    let m = camlrp_core::load_mask(path).map_err(to_py)?;
    let data = m.bits().iter().map(|&b| b as u8 as f32).collect();
    Ok(PyTensor {
        inner: camlrp_core::Tensor::new([m.height(), m.width()], data).map_err(to_py)?,
    })
}

#[pyfunction]
fn sparseness(map: &PyTensor) -> PyResult<f64> {
    metrics::sparseness(&as_map(map)?).map_err(to_py)
}

#[pyfunction]
fn relevance_rank_accuracy(map: &PyTensor, mask: &PyTensor) -> PyResult<f64> {
    metrics::relevance_rank_accuracy(&as_map(map)?, &as_mask(mask)?).map_err(to_py)
}

#[pyfunction]
fn threshold_mask(map: &PyTensor, tau: f32) -> PyResult<PyTensor> {
    Ok(wrap(&camlrp_core::threshold_mask(&as_map(map)?, tau).map_err(to_py)?))
}

#[pyfunction]
fn fuse(mask: &PyTensor, lrp_avg: &PyTensor) -> PyResult<PyTensor> {
    Ok(wrap(&camlrp_core::fuse(&as_map(mask)?, &as_map(lrp_avg)?).map_err(to_py)?))
}

#[pyfunction]
fn render_heatmap(map: &PyTensor, path: std::path::PathBuf) -> PyResult<()> {
    camlrp_core::render_heatmap(&as_map(map)?, path).map_err(to_py)
}

#[pymodule]
fn camlrp(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyTensor>()?;
    m.add_class::<PyModel>()?;
    m.add_class::<PyExplanation>()?;
    m.add_function(wrap_pyfunction!(load_model, m)?)?;
    m.add_function(wrap_pyfunction!(load_image, m)?)?;
    m.add_function(wrap_pyfunction!(load_mask, m)?)?;
    m.add_function(wrap_pyfunction!(sparseness, m)?)?;
    m.add_function(wrap_pyfunction!(relevance_rank_accuracy, m)?)?;
    m.add_function(wrap_pyfunction!(threshold_mask, m)?)?;
    m.add_function(wrap_pyfunction!(fuse, m)?)?;
    m.add_function(wrap_pyfunction!(render_heatmap, m)?)?;
    Ok(())
}

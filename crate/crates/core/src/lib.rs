//! Hybrid GradCAM++ x LRP attribution for small sequential CNNs, with an
//! attribution-quality metrics harness.
//!
//! ```no_run
//! use camlrp_core::{explain, load_image, load_model, ExplanationConfig};
//!
//! let model = load_model("model.json", "model.bin")?;
//! let image = load_image("cat.png")?;
//! let class = model.logits(&image)?.argmax();
//! let e = explain(&model, &image, class, &ExplanationConfig::default())?;
//! println!("{:?}", e.final_map.values().shape());
//! # Ok::<(), camlrp_core::Error>(())
//! ```

pub mod attribution;
pub mod container;
pub mod error;
pub mod explainer;
pub mod fusion;
pub mod gradcam;
pub mod imageio;
pub mod lrp;
pub mod metrics;
pub mod model;
pub mod ops;
pub mod render;
pub mod tensor;

pub use attribution::{AttributionMap, MapKind};
pub use container::{load_tensor, save_tensor};
pub use error::{Error, Result};
pub use explainer::{Explainer, Method, MethodExplainer};
pub use fusion::{compose, explain, explain_trace, fuse, threshold_mask, Explanation, ExplanationConfig};
pub use gradcam::{gradcam_pp, GradCamConfig};
pub use imageio::{load_image, load_mask, save_image};
pub use lrp::{channel_average, lrp_composite, LrpConfig};
pub use metrics::{benchmark, BenchmarkImage, BinaryMask, MetricConfig, MetricKind, MetricReport};
pub use model::{forward, grad_wrt_layer, load_model, save_model, ForwardTrace, Model};
pub use render::render_heatmap;
pub use tensor::Tensor;

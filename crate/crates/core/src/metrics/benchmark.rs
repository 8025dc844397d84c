use rayon::prelude::*;

use super::report::{Failure, ImageEntry, MethodRow, MetricKind, MetricReport};
use super::{
    avg_sensitivity_with_rng, cell_rng, faithfulness_correlation_with_rng, infidelity_with_rng,
    random_logit_with_rng, relevance_rank_accuracy, sparseness, BinaryMask, MetricConfig,
};
use crate::error::{Error, Result};
use crate::explainer::{Explainer, Method, MethodExplainer};
use crate::fusion::ExplanationConfig;
use crate::model::Model;
use crate::tensor::Tensor;

/// One benchmark input. `class_index: None` explains the predicted class.
#[derive(Clone, Debug)]
pub struct BenchmarkImage {
    pub id: String,
    pub image: Tensor,
    pub mask: Option<BinaryMask>,
    pub class_index: Option<usize>,
}

/// Every metric for every (image, method) pair, averaged per method.
///
/// Cells run in parallel, each on its own random stream, so the report is
/// identical for any thread count.
pub fn benchmark(
    model: &Model,
    images: &[BenchmarkImage],
    methods: &[Method],
    explanation: &ExplanationConfig,
    cfg: &MetricConfig,
    with_infidelity: bool,
) -> Result<MetricReport> {
    explanation.validate()?;
    cfg.validate()?;
    if images.is_empty() {
        return Err(Error::InvalidArgument("benchmark needs at least one image".into()));
    }
    if methods.is_empty() {
        return Err(Error::InvalidArgument("benchmark needs at least one method".into()));
    }
    let columns = MetricKind::columns(with_infidelity);

    let entries = images
        .iter()
        .map(|img| {
            let class_index = match img.class_index {
                Some(c) => {
                    model.check_class(c)?;
                    c
                }
                None => model.logits(&img.image)?.argmax(),
            };
            Ok(ImageEntry {
                id: img.id.clone(),
                class_index,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let cells: Vec<(usize, usize)> = (0..methods.len())
        .flat_map(|m| (0..images.len()).map(move |i| (m, i)))
        .collect();
    let results: Vec<Vec<std::result::Result<f64, String>>> = cells
        .par_iter()
        .map(|&(m, i)| {
            let explainer = MethodExplainer::new(model, methods[m], explanation.clone());
            evaluate(model, &explainer, &images[i], entries[i].class_index, i, &columns, cfg)
        })
        .collect();

    let mut rows = Vec::with_capacity(methods.len());
    for (m, &method) in methods.iter().enumerate() {
        let mut per_image = Vec::with_capacity(images.len());
        let mut failures = Vec::new();
        for (i, cell) in results[m * images.len()..(m + 1) * images.len()].iter().enumerate() {
            let mut values = Vec::with_capacity(columns.len());
            for (j, r) in cell.iter().enumerate() {
                match r {
                    Ok(v) => values.push(Some(*v)),
                    Err(message) => {
                        values.push(None);
                        failures.push(Failure {
                            image: entries[i].id.clone(),
                            metric: columns[j],
                            message: message.clone(),
                        });
                    }
                }
            }
            per_image.push(values);
        }
        let mean = (0..columns.len())
            .map(|j| {
                let present: Vec<f64> = per_image.iter().filter_map(|v| v[j]).collect();
                (!present.is_empty()).then(|| present.iter().sum::<f64>() / present.len() as f64)
            })
            .collect();
        rows.push(MethodRow {
            method,
            mean,
            per_image,
            failures,
        });
    }
    Ok(MetricReport {
        seed: cfg.seed,
        columns,
        images: entries,
        rows,
    })
}

fn evaluate(
    model: &Model,
    explainer: &MethodExplainer<'_>,
    input: &BenchmarkImage,
    class_index: usize,
    image_idx: usize,
    columns: &[MetricKind],
    cfg: &MetricConfig,
) -> Vec<std::result::Result<f64, String>> {
    let method = explainer.method.id();
    let base = explainer.attribute(&input.image, class_index);
    columns
        .iter()
        .map(|&metric| {
            let mut rng = cell_rng(cfg.seed, image_idx, method, metric.id());
            let phi = base.as_ref().map_err(|e| e.to_string())?;
            let value = match metric {
                MetricKind::Robustness => avg_sensitivity_with_rng(explainer, &input.image, class_index, cfg, &mut rng),
                MetricKind::Faithfulness => faithfulness_correlation_with_rng(model, &input.image, class_index, phi, cfg, &mut rng),
                MetricKind::Localisation => match &input.mask {
                    Some(mask) => relevance_rank_accuracy(phi, mask),
                    None => Err(Error::InvalidArgument("no ground-truth mask".into())),
                },
                MetricKind::Complexity => sparseness(phi),
                MetricKind::Randomisation => random_logit_with_rng(explainer, model, &input.image, class_index, cfg, &mut rng),
                MetricKind::Infidelity => infidelity_with_rng(model, &input.image, class_index, phi, cfg, &mut rng),
            };
            match value {
                Ok(v) if v.is_finite() => Ok(v),
                Ok(v) => Err(format!("non-finite value {v}")),
                Err(e) => Err(e.to_string()),
            }
        })
        .collect()
}

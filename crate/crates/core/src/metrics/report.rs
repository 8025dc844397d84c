use std::fmt::Write as _;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::explainer::Method;

/// Report columns. The first five always appear, in this order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MetricKind {
    Robustness,
    Faithfulness,
    Localisation,
    Complexity,
    Randomisation,
    Infidelity,
}

impl MetricKind {
    pub const STANDARD: [MetricKind; 5] = [
        MetricKind::Robustness,
        MetricKind::Faithfulness,
        MetricKind::Localisation,
        MetricKind::Complexity,
        MetricKind::Randomisation,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MetricKind::Robustness => "robustness",
            MetricKind::Faithfulness => "faithfulness",
            MetricKind::Localisation => "localisation",
            MetricKind::Complexity => "complexity",
            MetricKind::Randomisation => "randomisation",
            MetricKind::Infidelity => "infidelity",
        }
    }

    pub(crate) fn id(self) -> u64 {
        self as u64
    }

    pub fn columns(with_infidelity: bool) -> Vec<MetricKind> {
        let mut c = Self::STANDARD.to_vec();
        if with_infidelity {
            c.push(MetricKind::Infidelity);
        }
        c
    }
}

impl fmt::Display for MetricKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ImageEntry {
    pub id: String,
    pub class_index: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub image: String,
    pub metric: MetricKind,
    pub message: String,
}

/// One method's results; `per_image[i][j]` is image `i`, column `j`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MethodRow {
    pub method: Method,
    pub mean: Vec<Option<f64>>,
    pub per_image: Vec<Vec<Option<f64>>>,
    pub failures: Vec<Failure>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub seed: u64,
    pub columns: Vec<MetricKind>,
    pub images: Vec<ImageEntry>,
    pub rows: Vec<MethodRow>,
}

impl MetricReport {
    pub fn row(&self, method: Method) -> Option<&MethodRow> {
        self.rows.iter().find(|r| r.method == method)
    }

    pub fn column(&self, metric: MetricKind) -> Option<usize> {
        self.columns.iter().position(|&c| c == metric)
    }

    /// Methods x metrics table of means; missing cells are left empty.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("method");
        for c in &self.columns {
            out.push(',');
            out.push_str(c.name());
        }
        out.push('\n');
        for row in &self.rows {
            out.push_str(row.method.name());
            for v in &row.mean {
                out.push(',');
                if let Some(v) = v {
                    out.push_str(&format_sig6(*v));
                }
            }
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self).expect("report values are finite") + "\n")
    }
}

/// Six significant digits, fixed notation for ordinary magnitudes.
pub fn format_sig6(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    let sci = format!("{v:.5e}");
    let exp: i32 = sci[sci.find('e').unwrap() + 1..].parse().unwrap();
    if !(-5..15).contains(&exp) {
        return sci;
    }
    let decimals = (5 - exp).max(0) as usize;
    let mut s = String::new();
    write!(s, "{v:.decimals$}").unwrap();
    s
}

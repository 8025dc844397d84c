use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use camlrp_core::container::save_tensor;
use camlrp_core::metrics::MetricConfig;
use camlrp_core::model::LayerKind;
use camlrp_core::{
    benchmark, explain, load_image, load_mask, load_model, render_heatmap, BenchmarkImage, Error, ExplanationConfig,
    GradCamConfig, LrpConfig, Method, Model,
};
use clap::{Args, Parser, Subcommand};

/// GradCAM++ x LRP attribution maps and attribution-quality benchmarks.
#[derive(Parser, Debug)]
#[command(name = "camlrp", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Explain one image: heatmap PNG plus raw tensor files.
    Explain(ExplainArgs),
    /// Score methods over a directory of images and masks.
    Benchmark(BenchmarkArgs),
}

#[derive(Args, Debug)]
struct ModelArgs {
    /// Model manifest (`model.json`) or a directory holding model.json and model.bin.
    #[arg(long)]
    model: PathBuf,
    /// Weight blob; defaults to the manifest path with a `.bin` extension.
    #[arg(long)]
    blob: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct PipelineArgs {
    /// GradCAM threshold in [0, 1).
    #[arg(long, default_value_t = 0.25, allow_negative_numbers = true)]
    tau: f32,
    /// Gaussian blur sigma (0 disables blurring).
    #[arg(long, default_value_t = 2.0, allow_negative_numbers = true)]
    sigma: f32,
    /// LRP alpha for conv layers.
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    alpha: f32,
    /// LRP beta for conv layers; alpha - beta must be 1.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    beta: f32,
    /// LRP epsilon for dense layers.
    #[arg(long, default_value_t = 1e-6, allow_negative_numbers = true)]
    epsilon: f32,
    /// GradCAM++ target conv layer (default: last conv).
    #[arg(long)]
    layer: Option<String>,
}

#[derive(Args, Debug)]
struct ExplainArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long)]
    image: PathBuf,
    /// Class to explain (default: predicted class).
    #[arg(long)]
    class: Option<usize>,
    #[command(flatten)]
    pipeline: PipelineArgs,
    #[arg(long)]
    out: PathBuf,
    /// Also write GradCAM, mask, averaged LRP and product maps.
    #[arg(long)]
    emit_intermediates: bool,
}

#[derive(Args, Debug)]
struct BenchmarkArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Directory of RGB PNG images.
    #[arg(long)]
    images: PathBuf,
    /// Directory of grayscale masks named like the images.
    #[arg(long)]
    masks: Option<PathBuf>,
    /// Class for every image (default: each image's predicted class).
    #[arg(long)]
    class: Option<usize>,
    /// Comma-separated subset of proposed,gradcam,lrp.
    #[arg(long, value_delimiter = ',', default_value = "proposed,gradcam,lrp")]
    methods: Vec<String>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Add an infidelity column.
    #[arg(long)]
    infidelity: bool,
    #[command(flatten)]
    pipeline: PipelineArgs,
    #[arg(long)]
    out: PathBuf,
}

/// Error tagged with the process exit code it maps to.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: 1,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::Io { .. } | Error::Decode { .. } => 2,
            Error::InvalidArgument(_) | Error::ClassOutOfRange { .. } => 1,
            _ => 3,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

fn io_failure(path: &Path, e: std::io::Error) -> Failure {
    Failure {
        code: 2,
        message: format!("{}: {e}", path.display()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Explain(args) => cmd_explain(args),
        Command::Benchmark(args) => cmd_benchmark(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn open_model(args: &ModelArgs) -> Result<Model, Failure> {
    let manifest = if args.model.is_dir() {
        args.model.join("model.json")
    } else {
        args.model.clone()
    };
    let blob = args.blob.clone().unwrap_or_else(|| manifest.with_extension("bin"));
    Ok(load_model(&manifest, &blob)?)
}

fn pipeline_config(p: &PipelineArgs, model: &Model) -> Result<ExplanationConfig, Failure> {
    if let Some(layer) = &p.layer {
        let idx = model
            .layer_index(layer)
            .map_err(|_| Failure::usage(format!("--layer: model has no layer `{layer}`")))?;
        if !matches!(model.layers()[idx].kind, LayerKind::Conv2d(_)) {
            return Err(Failure::usage(format!("--layer: `{layer}` is not a conv2d layer")));
        }
    }
    let cfg = ExplanationConfig {
        tau: p.tau,
        sigma: p.sigma,
        gradcam: GradCamConfig {
            target_layer: p.layer.clone(),
            ..Default::default()
        },
        lrp: LrpConfig {
            epsilon: p.epsilon,
            alpha: p.alpha,
            beta: p.beta,
        },
    };
    cfg.validate().map_err(|e| Failure::usage(e.to_string()))?;
    Ok(cfg)
}

fn check_class(model: &Model, class: Option<usize>) -> Result<(), Failure> {
    match class {
        Some(c) if c >= model.class_count() => Err(Failure::usage(format!(
            "--class {c} out of range for {} classes",
            model.class_count()
        ))),
        _ => Ok(()),
    }
}

fn check_geometry(model: &Model, image: &camlrp_core::Tensor, path: &Path) -> Result<(), Failure> {
    let want = model.input().shape();
    if image.shape() != want {
        return Err(Failure {
            code: 3,
            message: format!(
                "{}: image shape {:?} does not match model input {:?}",
                path.display(),
                image.shape(),
                want
            ),
        });
    }
    Ok(())
}

fn create_out(dir: &Path) -> Result<(), Failure> {
    fs::create_dir_all(dir).map_err(|e| io_failure(dir, e))
}

fn cmd_explain(args: ExplainArgs) -> Result<(), Failure> {
    let model = open_model(&args.model)?;
    check_class(&model, args.class)?;
    let cfg = pipeline_config(&args.pipeline, &model)?;
    let image = load_image(&args.image)?;
    check_geometry(&model, &image, &args.image)?;

    let logits = model.logits(&image)?;
    let predicted = logits.argmax();
    let class = args.class.unwrap_or(predicted);
    let e = explain(&model, &image, class, &cfg)?;

    create_out(&args.out)?;
    let maps = e.maps();
    let chosen = if args.emit_intermediates { &maps[..] } else { &maps[..1] };
    for (name, map) in chosen {
        render_heatmap(map, args.out.join(format!("{name}.png")))?;
        let kind = serde_json::to_value(map.kind()).expect("kind serializes");
        save_tensor(map.values(), name, kind.as_str(), args.out.join(name))?;
    }
    println!("predicted class {predicted} logit {:.6}", logits.data()[predicted]);
    if class != predicted {
        println!("explained class {class} logit {:.6}", logits.data()[class]);
    }
    Ok(())
}

fn list_pngs(dir: &Path) -> Result<Vec<PathBuf>, Failure> {
    let entries = fs::read_dir(dir).map_err(|e| io_failure(dir, e))?;
    let mut out = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| io_failure(dir, e))?.path();
        if path.extension().is_some_and(|x| x.eq_ignore_ascii_case("png")) {
            out.push(path);
        }
    }
    out.sort();
    if out.is_empty() {
        return Err(Failure {
            code: 2,
            message: format!("{}: no PNG images found", dir.display()),
        });
    }
    Ok(out)
}

fn cmd_benchmark(args: BenchmarkArgs) -> Result<(), Failure> {
    let methods = args
        .methods
        .iter()
        .map(|m| m.parse::<Method>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| Failure::usage(format!("--methods: {e}")))?;
    if methods.is_empty() {
        return Err(Failure::usage("--methods: no methods given"));
    }
    let model = open_model(&args.model)?;
    check_class(&model, args.class)?;
    let cfg = pipeline_config(&args.pipeline, &model)?;
    let metric_cfg = MetricConfig::with_seed(args.seed);

    let mut inputs = Vec::new();
    for path in list_pngs(&args.images)? {
        let image = load_image(&path)?;
        check_geometry(&model, &image, &path)?;
        let mask = match &args.masks {
            Some(dir) => {
                let mp = dir.join(path.file_name().expect("listed files have names"));
                if mp.exists() {
                    Some(load_mask(&mp)?)
                } else {
                    None
                }
            }
            None => None,
        };
        let id = path.file_stem().expect("listed files have names").to_string_lossy().into_owned();
        inputs.push(BenchmarkImage {
            id,
            image,
            mask,
            class_index: args.class,
        });
    }

    let report = benchmark(&model, &inputs, &methods, &cfg, &metric_cfg, args.infidelity)?;
    let csv = report.to_csv();
    let json = report.to_json()?;
    create_out(&args.out)?;
    for (name, body) in [("report.csv", &csv), ("report.json", &json)] {
        let p = args.out.join(name);
        fs::write(&p, body).map_err(|e| io_failure(&p, e))?;
    }
    print!("{csv}");
    for row in &report.rows {
        for f in &row.failures {
            eprintln!("warning: {} {} {}: {}", row.method, f.image, f.metric, f.message);
        }
    }
    Ok(())
}

//! socnav: run social-navigation scenarios, train and evaluate the
//! formation classifier, generate synthetic formation data, and plot runs.

mod svg;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use socnav_core::context::{
    evaluate_classifier, extract_features, generate_formation_samples, load_model,
    parse_samples_csv, predict_svm, samples_to_csv, save_model, train_svm,
    ContextLabel, EvalReport, LinearSvmModel, TrainConfig, DEFAULT_PEOPLE,
};
use socnav_core::geom::{FormationFeatures, Point2D};
use socnav_core::sim::{run_simulation, trace, Mode, SimConfig};
use socnav_core::world::load_scenario;
use socnav_core::{Error, Result};

#[derive(Parser)]
#[command(name = "socnav", version, about = "Socially-aware navigation simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a scenario and write trace, metrics, and an optional plot
    Run(RunArgs),
    /// Train the formation classifier and report split accuracies
    Train(TrainArgs),
    /// Evaluate a saved model against labelled samples
    Eval(EvalArgs),
    /// Classify one group of people given as points
    Classify(ClassifyArgs),
    /// Generate synthetic formation samples
    GenData(GenDataArgs),
    /// Render an SVG plot from saved traces
    Plot(PlotArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum CliMode {
    Social,
    Traditional,
}

impl From<CliMode> for Mode {
    fn from(m: CliMode) -> Mode {
        match m {
            CliMode::Social => Mode::Social,
            CliMode::Traditional => Mode::Traditional,
        }
    }
}

#[derive(Args)]
struct RunArgs {
    /// Scenario JSON file
    scenario: PathBuf,
    #[arg(long, value_enum, default_value = "social")]
    mode: CliMode,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1000)]
    max_ticks: u64,
    /// Trace CSV output path
    #[arg(long, default_value = "trace.csv")]
    out: PathBuf,
    /// Metrics JSON output path
    #[arg(long, default_value = "metrics.json")]
    metrics: PathBuf,
    /// Optional SVG plot output path
    #[arg(long)]
    svg: Option<PathBuf>,
}

#[derive(Args)]
struct TrainArgs {
    /// Labelled samples CSV (circularity,linearity,label)
    #[arg(long, conflicts_with = "synthetic")]
    data: Option<PathBuf>,
    /// Train on generated samples instead of a file
    #[arg(long)]
    synthetic: bool,
    /// Samples per class when --synthetic is used
    #[arg(long, default_value_t = 170)]
    count: usize,
    /// Position jitter sigma for --synthetic, meters
    #[arg(long, default_value_t = 0.05)]
    noise: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "model.txt")]
    out: PathBuf,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    data: PathBuf,
}

#[derive(Args)]
struct ClassifyArgs {
    #[arg(long)]
    model: PathBuf,
    /// People positions as "x1,y1;x2,y2;..."
    #[arg(long)]
    points: String,
}

#[derive(Clone, Copy, ValueEnum)]
enum DataKind {
    Queue,
    Oformation,
    Both,
}

#[derive(Args)]
struct GenDataArgs {
    #[arg(long, value_enum)]
    kind: DataKind,
    /// Samples per requested kind
    #[arg(long)]
    count: usize,
    /// Position jitter sigma, meters
    #[arg(long, default_value_t = 0.05)]
    noise: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "samples.csv")]
    out: PathBuf,
}

#[derive(Args)]
struct PlotArgs {
    #[arg(long)]
    scenario: PathBuf,
    /// Trace CSV; repeat to overlay several runs
    #[arg(long, required = true)]
    trace: Vec<PathBuf>,
    #[arg(long, default_value = "plot.svg")]
    out: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Run(args) => cmd_run(args),
        Command::Train(args) => cmd_train(args),
        Command::Eval(args) => cmd_eval(args),
        Command::Classify(args) => cmd_classify(args),
        Command::GenData(args) => cmd_gen_data(args),
        Command::Plot(args) => cmd_plot(args),
    }
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path)
        .map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text)
        .map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))
}

fn cmd_run(args: RunArgs) -> Result<()> {
    let scenario = load_scenario(&read_text(&args.scenario)?)?;
    let cfg = SimConfig::default();
    let (records, metrics) =
        run_simulation(&scenario, &cfg, args.mode.into(), args.seed, args.max_ticks)?;

    write_text(&args.out, &trace::render_trace(&records))?;
    write_text(&args.metrics, &trace::render_metrics(&metrics))?;
    if let Some(svg_path) = &args.svg {
        let view = svg::run_view_from_records(&records);
        write_text(svg_path, &svg::render_svg(&scenario, &[view]))?;
    }
    println!(
        "{} ticks, success: {}, path length: {:.3} m",
        records.len().saturating_sub(1),
        metrics.success,
        metrics.path_length
    );
    Ok(())
}

fn synthetic_samples(
    count: usize,
    noise: f64,
    seed: u64,
) -> Result<Vec<(FormationFeatures, ContextLabel)>> {
    let mut samples =
        generate_formation_samples(ContextLabel::Queue, count, DEFAULT_PEOPLE, noise, seed)?;
    samples.extend(generate_formation_samples(
        ContextLabel::OFormation,
        count,
        DEFAULT_PEOPLE,
        noise,
        seed.wrapping_add(1),
    )?);
    Ok(samples)
}

fn accuracy(
    model: &LinearSvmModel,
    samples: &[(FormationFeatures, ContextLabel)],
) -> f64 {
    if samples.is_empty() {
        return 0.0;
    }
    let hits = samples
        .iter()
        .filter(|(f, label)| predict_svm(model, f).label == *label)
        .count();
    hits as f64 / samples.len() as f64
}

fn cmd_train(args: TrainArgs) -> Result<()> {
    let mut samples = match (&args.data, args.synthetic) {
        (Some(path), false) => parse_samples_csv(&read_text(path)?)?,
        (None, true) => synthetic_samples(args.count, args.noise, args.seed)?,
        _ => {
            return Err(Error::InvalidInput(
                "pass exactly one of --data or --synthetic".into(),
            ))
        }
    };

    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    samples.shuffle(&mut rng);
    let split = (samples.len() * 4) / 5;
    let (train, test) = samples.split_at(split);

    let features: Vec<FormationFeatures> = train.iter().map(|(f, _)| *f).collect();
    let labels: Vec<ContextLabel> = train.iter().map(|(_, l)| *l).collect();
    let model = train_svm(
        &features,
        &labels,
        &TrainConfig { seed: args.seed, ..TrainConfig::default() },
    )?;

    println!("train samples: {}, test samples: {}", train.len(), test.len());
    println!("train accuracy: {:.6}", accuracy(&model, train));
    println!("test accuracy: {:.6}", accuracy(&model, test));
    write_text(&args.out, &save_model(&model))?;
    println!("wrote {}", args.out.display());
    Ok(())
}

fn print_report(report: &EvalReport) {
    println!("accuracy: {:.6}", report.accuracy());
    for label in ContextLabel::ALL {
        let i = label.index();
        let support: usize = report.confusion[i].iter().sum();
        if support == 0 {
            continue;
        }
        println!(
            "{}: precision {:.4} recall {:.4} f1 {:.4} ({} samples)",
            label.as_str(),
            report.precision[i],
            report.recall[i],
            report.f1[i],
            support
        );
    }
    println!("confusion (rows = truth):");
    for label in ContextLabel::ALL {
        let row = report.confusion[label.index()];
        let cells: Vec<String> = row.iter().map(|c| format!("{c:5}")).collect();
        println!("  {:>16} {}", label.as_str(), cells.join(" "));
    }
}

fn cmd_eval(args: EvalArgs) -> Result<()> {
    let model = load_model(&read_text(&args.model)?)?;
    let samples = parse_samples_csv(&read_text(&args.data)?)?;
    let truth: Vec<ContextLabel> = samples.iter().map(|(_, l)| *l).collect();
    let predicted: Vec<ContextLabel> = samples
        .iter()
        .map(|(f, _)| predict_svm(&model, f).label)
        .collect();
    print_report(&evaluate_classifier(&truth, &predicted)?);
    Ok(())
}

fn parse_points(text: &str) -> Result<Vec<Point2D>> {
    text.split(';')
        .filter(|chunk| !chunk.trim().is_empty())
        .map(|chunk| {
            let parts: Vec<&str> = chunk.split(',').collect();
            if parts.len() != 2 {
                return Err(Error::Parse(format!("point {chunk:?}: expected x,y")));
            }
            let x = parts[0].trim().parse::<f64>();
            let y = parts[1].trim().parse::<f64>();
            match (x, y) {
                (Ok(x), Ok(y)) => Ok(Point2D::new(x, y)),
                _ => Err(Error::Parse(format!("point {chunk:?}: bad number"))),
            }
        })
        .collect()
}

fn cmd_classify(args: ClassifyArgs) -> Result<()> {
    let model = load_model(&read_text(&args.model)?)?;
    let points = parse_points(&args.points)?;
    let features = extract_features(&points)?;
    let estimate = predict_svm(&model, &features);
    println!(
        "{} (confidence {:.4}, circularity {:.4}, linearity {:.4})",
        estimate.label.as_str(),
        estimate.confidence,
        features.circularity,
        features.linearity
    );
    Ok(())
}

fn cmd_gen_data(args: GenDataArgs) -> Result<()> {
    let samples = match args.kind {
        DataKind::Queue => generate_formation_samples(
            ContextLabel::Queue,
            args.count,
            DEFAULT_PEOPLE,
            args.noise,
            args.seed,
        )?,
        DataKind::Oformation => generate_formation_samples(
            ContextLabel::OFormation,
            args.count,
            DEFAULT_PEOPLE,
            args.noise,
            args.seed,
        )?,
        DataKind::Both => synthetic_samples(args.count, args.noise, args.seed)?,
    };
    write_text(&args.out, &samples_to_csv(&samples))?;
    println!("wrote {} samples to {}", samples.len(), args.out.display());
    Ok(())
}

fn cmd_plot(args: PlotArgs) -> Result<()> {
    let scenario = load_scenario(&read_text(&args.scenario)?)?;
    let mut views = Vec::new();
    for path in &args.trace {
        views.push(svg::run_view_from_trace(&read_text(path)?)?);
    }
    write_text(&args.out, &svg::render_svg(&scenario, &views))?;
    println!("wrote {}", args.out.display());
    Ok(())
}

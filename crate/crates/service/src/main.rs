use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use attnlab_core::codecharts::{generate_codechart, generate_validation_chart, render_png, CodeChart};
use attnlab_core::heatmaps::fixation_heatmap;
use attnlab_core::io::{read_fixations_csv, read_grid_csv, save_heatmap};
use attnlab_core::metrics::{
    cc_grids, cost_estimate, element_scores, ioc_cc, ioc_nss, nss_grid, saturation, spearman, Money,
    SaturationParams,
};
use attnlab_core::quality::Interface;
use attnlab_core::{AttentionHeatmap, Grid, Point, Provenance, Stimulus, StimulusKind};
use attnlab_service::{compute_results, compute_verdicts, Cohort, Scenario, ServiceConfig, Store};
use clap::{Args, Parser, Subcommand};
use serde_json::json;

#[derive(Parser)]
#[command(name = "attnlab", version, about = "Attention heatmaps from crowdsourced interaction logs")]
struct Cli {
    /// Service configuration (JSON); defaults apply to missing fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Seed for every randomized step.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Serve the HTTP API over a log store.
    Serve {
        #[arg(long)]
        store: PathBuf,
        /// Create the store from this stimulus list if it does not exist yet.
        #[arg(long)]
        stimuli: Option<PathBuf>,
        #[arg(long, default_value = "127.0.0.1:8080")]
        addr: std::net::SocketAddr,
    },
    /// Run a scenario of synthetic participants into a new store.
    Simulate {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Build a heatmap from a store or from eye-tracking fixations.
    Heatmap(HeatmapArgs),
    /// CC against a reference heatmap and NSS at fixations.
    Metrics {
        #[arg(long)]
        heatmap: PathBuf,
        #[arg(long)]
        reference: Option<PathBuf>,
        #[arg(long)]
        fixations: Option<PathBuf>,
    },
    /// Inter-observer consistency of a fixation set.
    Ioc {
        #[arg(long)]
        fixations: PathBuf,
        #[arg(long)]
        width: u32,
        #[arg(long)]
        height: u32,
        #[arg(long, default_value_t = 10)]
        splits: usize,
    },
    /// Print one verdict per participant as JSON lines; summary on stderr.
    Validate {
        interface: Interface,
        #[arg(long)]
        logs: PathBuf,
    },
    /// Heatmap quality as a function of the number of participants.
    Saturation {
        #[arg(long)]
        store: PathBuf,
        #[arg(long)]
        interface: Interface,
        #[arg(long)]
        stimulus: String,
        /// Heatmap CSV the subsets are scored against with CC.
        #[arg(long)]
        reference: PathBuf,
        #[arg(long, default_value_t = 1)]
        step: usize,
        #[arg(long, default_value_t = 20)]
        resamples: usize,
        #[arg(long, default_value_t = 0.98)]
        fraction: f64,
    },
    /// Score design elements by the heatmap maximum inside each.
    RankElements {
        #[arg(long)]
        heatmap: PathBuf,
        /// JSON list of stimuli, e.g. a store's stimuli.json.
        #[arg(long)]
        stimuli: PathBuf,
        #[arg(long)]
        stimulus: String,
        /// Second heatmap; adds the Spearman correlation of the two rankings.
        #[arg(long)]
        against: Option<PathBuf>,
    },
    /// Generate or render codecharts.
    Codechart {
        #[command(subcommand)]
        action: ChartAction,
    },
    /// Cost of one image's heatmap.
    Cost {
        #[arg(long)]
        participants: u64,
        /// Cost per image per participant, e.g. 0.03 or $0.03.
        #[arg(long)]
        price: Money,
    },
}

#[derive(Args)]
struct HeatmapArgs {
    #[arg(long, conflicts_with = "fixations", requires_all = ["interface", "stimulus"])]
    store: Option<PathBuf>,
    #[arg(long)]
    interface: Option<Interface>,
    #[arg(long)]
    stimulus: Option<String>,
    #[arg(long, requires_all = ["width", "height"])]
    fixations: Option<PathBuf>,
    #[arg(long)]
    width: Option<u32>,
    #[arg(long)]
    height: Option<u32>,
    /// Directory for the CSV and PNG.
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Subcommand)]
enum ChartAction {
    Gen {
        #[arg(long)]
        id: String,
        /// Makes a validation chart with its cue at `x,y` in window pixels.
        #[arg(long, value_parser = parse_point)]
        cue: Option<Point>,
        #[arg(long)]
        radius: Option<f64>,
        /// Defaults to stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    Render {
        #[arg(long)]
        chart: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn parse_point(s: &str) -> Result<Point, String> {
    let (x, y) = s.split_once(',').ok_or("expected x,y")?;
    let x: f64 = x.trim().parse().map_err(|e| format!("x: {e}"))?;
    let y: f64 = y.trim().parse().map_err(|e| format!("y: {e}"))?;
    Ok(Point::new(x, y))
}

fn read_grid(path: &Path) -> Result<Grid> {
    let f = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    Ok(read_grid_csv(BufReader::new(f))?)
}

fn load_stimuli(path: &Path) -> Result<Vec<Stimulus>> {
    let f = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    serde_json::from_reader(BufReader::new(f)).with_context(|| format!("parsing {}", path.display()))
}

fn print_json(value: &impl serde::Serialize) -> Result<()> {
    let mut out = std::io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    Ok(())
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    let cfg = match &cli.config {
        Some(path) => ServiceConfig::load(path)?,
        None => ServiceConfig::default(),
    };
    match cli.command {
        Command::Serve { store, stimuli, addr } => {
            let store = match stimuli {
                Some(list) if !store.join("stimuli.json").exists() => Store::create(&store, &load_stimuli(&list)?)?,
                _ => Store::open(&store).with_context(|| format!("opening store {}", store.display()))?,
            };
            eprintln!("serving {} on http://{addr} (config {})", store.root().display(), cfg.hash());
            let runtime = tokio::runtime::Runtime::new()?;
            runtime.block_on(attnlab_service::http::serve(Arc::new(store), cfg, addr))?;
        }
        Command::Simulate { scenario, out } => {
            let sc = Scenario::load(&scenario)?;
            let base = scenario.parent().unwrap_or(Path::new("."));
            let outcome = sc.run(&cfg, base, &out)?;
            print_json(&outcome)?;
        }
        Command::Heatmap(args) => heatmap(args, &cfg)?,
        Command::Metrics {
            heatmap,
            reference,
            fixations,
        } => {
            if reference.is_none() && fixations.is_none() {
                bail!("give --reference, --fixations or both");
            }
            let map = read_grid(&heatmap)?;
            let mut report = serde_json::Map::new();
            if let Some(r) = reference {
                report.insert("cc".into(), json!(cc_grids(&map, &read_grid(&r)?)?));
            }
            if let Some(f) = fixations {
                let fix = read_fixations_csv(BufReader::new(File::open(&f)?))?;
                report.insert("nss".into(), json!(nss_grid(&map, &fix)?));
            }
            print_json(&report)?;
        }
        Command::Ioc {
            fixations,
            width,
            height,
            splits,
        } => {
            let fix = read_fixations_csv(BufReader::new(File::open(&fixations)?))?;
            let stimulus = Stimulus::new("ioc", width, height, StimulusKind::Natural);
            let sigma = cfg.heatmap.fixation_sigma;
            let split = ioc_cc(&fix, &stimulus, sigma, splits, cli.seed)?;
            print_json(&json!({
                "ioc_cc": split.mean,
                "ioc_cc_standard_error": split.standard_error(),
                "ioc_cc_per_split": split.per_split,
                "ioc_nss": ioc_nss(&fix, &stimulus, sigma)?,
            }))?;
        }
        Command::Validate { interface, logs } => {
            let store = Store::open(&logs).with_context(|| format!("opening store {}", logs.display()))?;
            let verdicts = compute_verdicts(&store, interface, &cfg)?;
            let mut out = BufWriter::new(std::io::stdout().lock());
            for v in &verdicts {
                serde_json::to_writer(&mut out, v)?;
                writeln!(out)?;
            }
            out.flush()?;
            let mut err = std::io::stderr().lock();
            writeln!(err, "{:<16} {:<6} failed rules", "participant", "pass")?;
            for v in &verdicts {
                let failed: Vec<&str> = v.failed_rules();
                writeln!(err, "{:<16} {:<6} {}", v.participant_id, v.passed, failed.join(", "))?;
            }
            let passed = verdicts.iter().filter(|v| v.passed).count();
            writeln!(err, "{passed}/{} participants pass {interface} validation", verdicts.len())?;
        }
        Command::Saturation {
            store,
            interface,
            stimulus,
            reference,
            step,
            resamples,
            fraction,
        } => {
            let store = Store::open(&store)?;
            let reference = read_grid(&reference)?;
            let cohort = Cohort::load(&store, interface, &cfg)?;
            let used = cohort.usable(&stimulus, &cfg)?;
            let params = SaturationParams {
                step,
                resamples,
                seed: cli.seed,
                fraction,
            };
            let (curve, point) = saturation("cc", used.len(), &params, |idx| {
                let subset: Vec<&str> = idx.iter().map(|&i| used[i]).collect();
                let map = cohort
                    .heatmap(&stimulus, &subset, &cfg)
                    .map_err(|e| attnlab_core::Error::Parameter(e.to_string()))?;
                cc_grids(&map.values, &reference)
            })?;
            print_json(&json!({ "curve": curve, "saturation_point": point, "participants": used.len() }))?;
        }
        Command::RankElements {
            heatmap,
            stimuli,
            stimulus,
            against,
        } => {
            let list = load_stimuli(&stimuli)?;
            let st = list
                .iter()
                .find(|s| s.id == stimulus)
                .with_context(|| format!("no stimulus `{stimulus}` in {}", stimuli.display()))?;
            let map = AttentionHeatmap::new(&st.id, Provenance::Synthetic, read_grid(&heatmap)?)?;
            let scores = element_scores(&map, &st.elements)?;
            let mut report = json!({ "scores": scores });
            if let Some(other) = against {
                let other = AttentionHeatmap::new(&st.id, Provenance::Synthetic, read_grid(&other)?)?;
                let other_scores = element_scores(&other, &st.elements)?;
                report["against"] = json!(other_scores);
                report["spearman"] = json!(spearman(&scores, &other_scores)?);
            }
            print_json(&report)?;
        }
        Command::Codechart { action } => match action {
            ChartAction::Gen { id, cue, radius, out } => {
                let chart = match cue {
                    Some(c) => generate_validation_chart(id, c, &cfg.chart, radius, cli.seed)?,
                    None => generate_codechart(id, &cfg.chart, cli.seed)?,
                };
                match out {
                    Some(path) => std::fs::write(&path, serde_json::to_vec_pretty(&chart)?)?,
                    None => print_json(&chart)?,
                }
            }
            ChartAction::Render { chart, out } => {
                let chart: CodeChart = serde_json::from_reader(BufReader::new(File::open(&chart)?))?;
                let mut w = BufWriter::new(File::create(&out)?);
                render_png(&chart, &mut w)?;
                w.flush()?;
            }
        },
        Command::Cost { participants, price } => print_json(&cost_estimate(participants, price)?)?,
    }
    Ok(())
}

fn heatmap(args: HeatmapArgs, cfg: &ServiceConfig) -> Result<()> {
    if let Some(store) = &args.store {
        let store = Store::open(store).with_context(|| format!("opening store {}", store.display()))?;
        let (interface, stimulus) = (args.interface.expect("required by clap"), args.stimulus.expect("required by clap"));
        let report = compute_results(&store, &stimulus, interface, cfg)?;
        let (csv, png) = save_heatmap(&report.heatmap, &args.out)?;
        print_json(&json!({ "summary": report.summary, "csv": csv, "png": png }))?;
        return Ok(());
    }
    let Some(path) = &args.fixations else {
        bail!("give --store or --fixations");
    };
    let fix = read_fixations_csv(BufReader::new(File::open(path)?))?;
    let id = args.stimulus.unwrap_or_else(|| "fixations".into());
    let stimulus = Stimulus::new(id, args.width.expect("required by clap"), args.height.expect("required by clap"), StimulusKind::Natural);
    let map = fixation_heatmap(&fix, &stimulus, cfg.heatmap.fixation_sigma)?;
    let (csv, png) = save_heatmap(&map, &args.out)?;
    print_json(&json!({ "csv": csv, "png": png }))?;
    Ok(())
}

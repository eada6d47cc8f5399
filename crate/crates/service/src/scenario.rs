//! Scenario-driven simulation: synthetic participants complete real
//! assignments and their submissions go through normal ingestion.

use std::collections::{BTreeMap, HashMap};
use std::path::{Path, PathBuf};

use attnlab_core::codecharts::CodeChart;
use attnlab_core::io::read_grid_csv;
use attnlab_core::quality::Interface;
use attnlab_core::simulate::{
    cohort, sim_annotation, sim_bubble, sim_codecharts, sim_zoom, stream_rng, GaussianComponent, GroundTruthDensity,
    SyntheticParticipant,
};
use attnlab_core::{ElementRegion, Point, Rect, Stimulus, StimulusKind};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::assignment::build_assignment;
use crate::config::ServiceConfig;
use crate::error::ServiceError;
use crate::store::Store;
use crate::wire::{BubbleViewPayload, CodeChartsPayload, CodeTrial, ImportAnnotsPayload, Payload, ZoomPayload};

/// Where the simulated attention on a stimulus comes from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum GroundTruthSpec {
    Mixture { components: Vec<GaussianComponent> },
    /// A CSV grid, relative to the scenario file.
    Csv { path: PathBuf },
    Uniform,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioStimulus {
    #[serde(flatten)]
    pub stimulus: Stimulus,
    pub ground_truth: GroundTruthSpec,
    /// Selection probability per element id for ImportAnnots; missing ids use 0.5.
    #[serde(default)]
    pub element_weights: BTreeMap<String, f64>,
}

/// A group of participants sharing one behaviour. `id` and `seed` in the
/// behaviour are ignored.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CohortSpec {
    pub count: usize,
    #[serde(default)]
    pub behavior: SyntheticParticipant,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub seed: u64,
    pub interface: Interface,
    pub cohorts: Vec<CohortSpec>,
    pub stimuli: Vec<ScenarioStimulus>,
    /// Validation stimuli generated for CodeCharts and ImportAnnots.
    #[serde(default = "default_validation_stimuli")]
    pub validation_stimuli: usize,
    /// Overrides `assignment.trials` from the service config.
    #[serde(default)]
    pub trials: Option<usize>,
}

fn default_validation_stimuli() -> usize {
    3
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioOutcome {
    pub store: PathBuf,
    pub interface: Interface,
    pub participants: usize,
    pub submissions: usize,
}

impl Scenario {
    pub fn load(path: &Path) -> Result<Self, ServiceError> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| ServiceError::Config(format!("{}: {e}", path.display())))
    }

    pub fn participants(&self) -> Vec<SyntheticParticipant> {
        let total = self.cohorts.iter().map(|c| c.count).sum();
        let base = cohort(total, &SyntheticParticipant::default(), self.seed);
        let behaviors = self.cohorts.iter().flat_map(|c| std::iter::repeat_n(&c.behavior, c.count));
        base.into_iter()
            .zip(behaviors)
            .map(|(p, b)| SyntheticParticipant {
                id: p.id,
                seed: p.seed,
                ..b.clone()
            })
            .collect()
    }

    /// The scenario stimuli plus generated validation stimuli, each with its density.
    fn stimuli(&self, base_dir: &Path) -> Result<Vec<(Stimulus, GroundTruthDensity)>, ServiceError> {
        let mut out = Vec::new();
        for s in &self.stimuli {
            let st = &s.stimulus;
            let (w, h) = st.dims();
            let gt = match &s.ground_truth {
                GroundTruthSpec::Mixture { components } => GroundTruthDensity::from_mixture(&st.id, w, h, components)?,
                GroundTruthSpec::Csv { path } => {
                    let file = std::fs::File::open(base_dir.join(path))?;
                    GroundTruthDensity::from_grid(&st.id, read_grid_csv(file)?)?
                }
                GroundTruthSpec::Uniform => GroundTruthDensity::uniform(&st.id, w, h)?,
            };
            out.push((st.clone(), gt));
        }
        let needs_validation = matches!(self.interface, Interface::Codecharts | Interface::Importannots);
        if let (true, Some(first)) = (needs_validation, self.stimuli.first()) {
            let (w, h) = (first.stimulus.width_px, first.stimulus.height_px);
            let mut rng = stream_rng(self.seed, "scenario", "validation-stimuli");
            for i in 0..self.validation_stimuli {
                let cue = Point::new(
                    rng.random_range(0.2..0.8) * w as f64,
                    rng.random_range(0.2..0.8) * h as f64,
                );
                let (tw, th) = (w as f64 / 5.0, h as f64 / 5.0);
                let target = Rect::new(
                    (cue.x - tw / 2.0).clamp(0.0, w as f64 - tw),
                    (cue.y - th / 2.0).clamp(0.0, h as f64 - th),
                    tw,
                    th,
                );
                let mut st = Stimulus::new(format!("validation-{i:02}"), w, h, StimulusKind::Validation);
                st.cue = Some(cue);
                st.elements = vec![ElementRegion::rect("target", target)];
                let (px, py) = cue.pixel(w as usize, h as usize);
                let gt = GroundTruthDensity::delta(&st.id, w as usize, h as usize, px, py)?;
                out.push((st, gt));
            }
        }
        Ok(out)
    }

    /// Creates a store at `out` and fills it with every participant's
    /// submissions. Identical inputs produce byte-identical stores.
    pub fn run(&self, cfg: &ServiceConfig, base_dir: &Path, out: &Path) -> Result<ScenarioOutcome, ServiceError> {
        let mut cfg = cfg.clone();
        if self.trials.is_some() {
            cfg.assignment.trials = self.trials;
        }
        cfg.check()?;
        let stimuli = self.stimuli(base_dir)?;
        let defs: Vec<Stimulus> = stimuli.iter().map(|(s, _)| s.clone()).collect();
        let densities: HashMap<&str, &GroundTruthDensity> =
            stimuli.iter().map(|(s, gt)| (s.id.as_str(), gt)).collect();
        let weights: HashMap<&str, &BTreeMap<String, f64>> = self
            .stimuli
            .iter()
            .map(|s| (s.stimulus.id.as_str(), &s.element_weights))
            .collect();
        let store = Store::create(out, &defs)?;
        let participants = self.participants();
        let mut submissions = 0;
        for p in &participants {
            p.validate()?;
            let (assignment, charts) = build_assignment(self.interface, &defs, &cfg, p.seed)?;
            store.register_assignment(&assignment, &charts)?;
            let aid = assignment.assignment_id.as_str();
            let stimulus = |id: &str| store.stimulus(id).ok_or_else(|| ServiceError::not_found("stimulus", id));
            let mut payloads = Vec::new();
            match self.interface {
                Interface::Codecharts => {
                    let by_id: HashMap<&str, &CodeChart> = charts.iter().map(|c| (c.chart_id.as_str(), c)).collect();
                    let mut trials = Vec::new();
                    for t in &assignment.trials {
                        let chart_id = t.params.chart_id.as_deref().unwrap_or_default();
                        let chart = by_id.get(chart_id).ok_or_else(|| ServiceError::not_found("chart", chart_id))?;
                        let st = stimulus(&t.stimulus_id)?;
                        let mapping = st.fit_to_window(chart.window_w, chart.window_h)?;
                        let report = sim_codecharts(densities[st.id.as_str()], chart, &mapping, p)?;
                        trials.push(CodeTrial {
                            stimulus_id: report.stimulus_id,
                            chart_id: report.chart_id,
                            typed_code: report.typed_code,
                            response_t_ms: report.response_t_ms,
                        });
                    }
                    payloads.push(Payload::Codecharts(CodeChartsPayload {
                        assignment_id: aid.into(),
                        participant_id: p.id.clone(),
                        submission_id: format!("{aid}/0"),
                        trials,
                    }));
                }
                Interface::Zoommaps => {
                    for (i, t) in assignment.trials.iter().enumerate() {
                        let st = stimulus(&t.stimulus_id)?;
                        let session = sim_zoom(densities[st.id.as_str()], &st, p)?;
                        payloads.push(Payload::Zoommaps(ZoomPayload::from_session(&session, aid, &format!("{aid}/{i}"))));
                    }
                }
                Interface::Bubbleview => {
                    for (i, t) in assignment.trials.iter().enumerate() {
                        let st = stimulus(&t.stimulus_id)?;
                        let mut who = p.clone();
                        who.bubble_task = t.params.task.unwrap_or(p.bubble_task);
                        let session = sim_bubble(densities[st.id.as_str()], &st, &who)?;
                        payloads.push(Payload::Bubbleview(BubbleViewPayload::from_session(
                            &session,
                            aid,
                            &format!("{aid}/{i}"),
                        )));
                    }
                }
                Interface::Importannots => {
                    for (i, t) in assignment.trials.iter().enumerate() {
                        let st = stimulus(&t.stimulus_id)?;
                        let weighted: Vec<(ElementRegion, f64)> = st
                            .elements
                            .iter()
                            .map(|e| {
                                let w = match st.kind {
                                    StimulusKind::Validation => 1.0,
                                    _ => weights
                                        .get(st.id.as_str())
                                        .and_then(|m| m.get(&e.id))
                                        .copied()
                                        .unwrap_or(0.5),
                                };
                                (e.clone(), w)
                            })
                            .collect();
                        let mask = sim_annotation(&weighted, &st, p)?;
                        payloads.push(Payload::Importannots(ImportAnnotsPayload {
                            assignment_id: aid.into(),
                            participant_id: p.id.clone(),
                            submission_id: format!("{aid}/{i}"),
                            stimulus_id: st.id.clone(),
                            mask_rle: mask.mask.to_rle(),
                            tool: mask.tool,
                        }));
                    }
                }
            }
            for payload in payloads {
                store.ingest(payload, 0)?;
                submissions += 1;
            }
        }
        Ok(ScenarioOutcome {
            store: out.to_path_buf(),
            interface: self.interface,
            participants: participants.len(),
            submissions,
        })
    }
}

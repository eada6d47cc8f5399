use attnlab_core::codecharts::{generate_codechart, generate_validation_chart, CodeChart};
use attnlab_core::heatmaps::BubbleTask;
use attnlab_core::quality::{Interface, TrialRole};
use attnlab_core::{Stimulus, StimulusKind};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::ServiceConfig;
use crate::error::ServiceError;

const SCREENING_NORMAL: usize = 3;
const SCREENING_VALIDATION: usize = 3;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TaskAssignment {
    pub assignment_id: String,
    pub interface: Interface,
    pub seed: u64,
    pub trials: Vec<Trial>,
    pub config_hash: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trial {
    pub stimulus_id: String,
    pub role: TrialRole,
    pub params: TrialParams,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TrialParams {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exposure_ms: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chart_id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chart_exposure_ms: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fixation_cross_ms: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_view_ms: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub task: Option<BubbleTask>,
}

impl TaskAssignment {
    pub fn validation_trials(&self) -> usize {
        self.trials.iter().filter(|t| t.role == TrialRole::Validation).count()
    }
}

/// Builds a seeded trial list, plus the codecharts it refers to.
///
/// CodeCharts assignments open with a shuffled screening block of three
/// regular and three validation trials, followed by `cfg.assignment.trials`
/// trials of which a `validation_rate` share are validation trials. Stimulus
/// pools are reused in order when an assignment needs more trials than there
/// are stimuli.
pub fn build_assignment(
    interface: Interface,
    stimuli: &[Stimulus],
    cfg: &ServiceConfig,
    seed: u64,
) -> Result<(TaskAssignment, Vec<CodeChart>), ServiceError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut regular: Vec<&Stimulus> = stimuli.iter().filter(|s| s.kind != StimulusKind::Validation).collect();
    let mut validation: Vec<&Stimulus> = stimuli.iter().filter(|s| s.kind == StimulusKind::Validation).collect();
    if regular.is_empty() {
        return Err(ServiceError::Config("no regular stimuli to assign".into()));
    }
    regular.shuffle(&mut rng);
    validation.shuffle(&mut rng);

    let config_hash = cfg.hash();
    let assignment_id = assignment_id(interface, seed, &config_hash, stimuli);
    let a = &cfg.assignment;
    let count = a.trials.unwrap_or(regular.len());
    let mut charts = Vec::new();

    let trials = match interface {
        Interface::Zoommaps => cycle(&regular, count)
            .map(|s| regular_trial(s, TrialParams { min_view_ms: Some(a.zoom_min_view_ms), ..Default::default() }))
            .collect(),
        Interface::Bubbleview => cycle(&regular, count)
            .map(|s| {
                regular_trial(
                    s,
                    TrialParams {
                        exposure_ms: Some(a.bubble_view_ms),
                        task: Some(a.bubble_task),
                        ..Default::default()
                    },
                )
            })
            .collect(),
        Interface::Importannots => {
            let designs: Vec<&Stimulus> = validation.iter().copied().filter(|s| !s.elements.is_empty()).collect();
            if designs.len() < a.importannots_validation_designs {
                return Err(ServiceError::Config(format!(
                    "importannots needs {} validation designs with target elements, found {}",
                    a.importannots_validation_designs,
                    designs.len()
                )));
            }
            let mut trials: Vec<Trial> = cycle(&regular, count).map(|s| regular_trial(s, TrialParams::default())).collect();
            for design in &designs[..a.importannots_validation_designs] {
                let at = rng.random_range(0..=trials.len());
                trials.insert(
                    at,
                    Trial {
                        stimulus_id: design.id.clone(),
                        role: TrialRole::Validation,
                        params: TrialParams::default(),
                    },
                );
            }
            trials
        }
        Interface::Codecharts => {
            if validation.is_empty() {
                return Err(ServiceError::Config("codecharts needs at least one validation stimulus".into()));
            }
            let mut screening: Vec<TrialRole> = [TrialRole::Normal; SCREENING_NORMAL]
                .into_iter()
                .chain([TrialRole::Validation; SCREENING_VALIDATION])
                .collect();
            screening.shuffle(&mut rng);
            let n_validation = (a.validation_rate * count as f64).round() as usize;
            let mut main: Vec<TrialRole> = std::iter::repeat_n(TrialRole::Validation, n_validation)
                .chain(std::iter::repeat_n(TrialRole::Normal, count - n_validation))
                .collect();
            main.shuffle(&mut rng);

            let mut regular_pool = cycle(&regular, usize::MAX);
            let mut validation_pool = cycle(&validation, usize::MAX);
            let mut trials = Vec::with_capacity(screening.len() + main.len());
            for (i, role) in screening.into_iter().chain(main).enumerate() {
                let chart_id = format!("{assignment_id}-c{i:03}");
                let chart_seed = rng.random::<u64>();
                let stimulus = match role {
                    TrialRole::Normal => regular_pool.next().expect("endless"),
                    TrialRole::Validation => validation_pool.next().expect("endless"),
                };
                let chart = match role {
                    TrialRole::Normal => generate_codechart(&chart_id, &cfg.chart, chart_seed)?,
                    TrialRole::Validation => {
                        let cue = stimulus
                            .cue
                            .ok_or_else(|| ServiceError::Config(format!("validation stimulus `{}` has no cue", stimulus.id)))?;
                        let mapping = stimulus.fit_to_window(cfg.chart.window_w, cfg.chart.window_h)?;
                        generate_validation_chart(&chart_id, mapping.to_window(cue), &cfg.chart, None, chart_seed)?
                    }
                };
                charts.push(chart);
                trials.push(Trial {
                    stimulus_id: stimulus.id.clone(),
                    role,
                    params: TrialParams {
                        exposure_ms: Some(a.image_exposure_ms),
                        chart_id: Some(chart_id),
                        chart_exposure_ms: Some(a.chart_exposure_ms),
                        fixation_cross_ms: Some(a.fixation_cross_ms),
                        ..Default::default()
                    },
                });
            }
            trials
        }
    };

    Ok((
        TaskAssignment {
            assignment_id,
            interface,
            seed,
            trials,
            config_hash,
        },
        charts,
    ))
}

fn regular_trial(s: &Stimulus, params: TrialParams) -> Trial {
    Trial {
        stimulus_id: s.id.clone(),
        role: TrialRole::Normal,
        params,
    }
}

fn cycle<'a>(pool: &'a [&'a Stimulus], n: usize) -> impl Iterator<Item = &'a Stimulus> + 'a {
    pool.iter().copied().cycle().take(n)
}

fn assignment_id(interface: Interface, seed: u64, config_hash: &str, stimuli: &[Stimulus]) -> String {
    let mut h = Sha256::new();
    h.update(format!("{interface}\n{seed}\n{config_hash}\n").as_bytes());
    for s in stimuli {
        h.update(s.id.as_bytes());
        h.update(b"\n");
    }
    let digest: String = h.finalize().iter().take(8).map(|b| format!("{b:02x}")).collect();
    format!("{interface}-{digest}")
}

#[cfg(test)]
mod tests {
    use super::*;
    use attnlab_core::codecharts::{resolve_report, ReportStatus};
    use attnlab_core::{ElementRegion, Point, Rect};

    pub(crate) fn stimuli(regular: usize, validation: usize) -> Vec<Stimulus> {
        let mut out: Vec<Stimulus> = (0..regular)
            .map(|i| Stimulus::new(format!("img{i:02}"), 1000, 700, StimulusKind::Natural))
            .collect();
        for i in 0..validation {
            let mut s = Stimulus::new(format!("val{i}"), 1000, 700, StimulusKind::Validation);
            let cue = Point::new(200.0 + 250.0 * i as f64, 350.0);
            s.cue = Some(cue);
            s.elements.push(ElementRegion::rect("target", Rect::new(cue.x - 40.0, cue.y - 40.0, 80.0, 80.0)));
            out.push(s);
        }
        out
    }

    fn with_trials(n: usize) -> ServiceConfig {
        let mut cfg = ServiceConfig::default();
        cfg.assignment.trials = Some(n);
        cfg
    }

    #[test]
    fn codecharts_opens_with_screening_block() {
        let (a, charts) = build_assignment(Interface::Codecharts, &stimuli(50, 3), &with_trials(42), 7).unwrap();
        assert_eq!(a.trials.len(), 48);
        let block = &a.trials[..6];
        assert_eq!(block.iter().filter(|t| t.role == TrialRole::Validation).count(), 3);
        assert_eq!(charts.len(), 48);
        for (t, c) in a.trials.iter().zip(&charts) {
            assert_eq!(t.params.chart_id.as_deref(), Some(c.chart_id.as_str()));
            assert_eq!(t.role == TrialRole::Validation, c.is_validation());
            assert_eq!(t.params.chart_exposure_ms, Some(400.0));
        }
    }

    #[test]
    fn validation_rate_sets_the_count_after_screening() {
        let (a, _) = build_assignment(Interface::Codecharts, &stimuli(20, 2), &with_trials(12), 3).unwrap();
        let after: Vec<_> = a.trials[6..].iter().filter(|t| t.role == TrialRole::Validation).collect();
        assert_eq!(after.len(), 3);
        assert_eq!(a.trials.len(), 18);
    }

    #[test]
    fn validation_chart_targets_the_cue() {
        let stim = stimuli(5, 1);
        let (a, charts) = build_assignment(Interface::Codecharts, &stim, &with_trials(4), 1).unwrap();
        let (i, _) = a.trials.iter().enumerate().find(|(_, t)| t.role == TrialRole::Validation).unwrap();
        let target = charts[i].validation.as_ref().unwrap();
        assert_eq!(target.cue_center, Point::new(200.0, 350.0));
        for code in &target.correct_codes {
            assert_eq!(resolve_report(&charts[i], code).status(), ReportStatus::ValidationCorrect);
        }
    }

    #[test]
    fn same_seed_same_assignment() {
        let s = stimuli(10, 2);
        let cfg = with_trials(8);
        assert_eq!(
            build_assignment(Interface::Codecharts, &s, &cfg, 5).unwrap(),
            build_assignment(Interface::Codecharts, &s, &cfg, 5).unwrap()
        );
        let a = build_assignment(Interface::Zoommaps, &s, &cfg, 5).unwrap().0;
        let b = build_assignment(Interface::Zoommaps, &s, &cfg, 6).unwrap().0;
        assert_ne!(a.assignment_id, b.assignment_id);
    }

    #[test]
    fn missing_validation_stimuli_is_a_config_error() {
        assert!(matches!(
            build_assignment(Interface::Codecharts, &stimuli(10, 0), &ServiceConfig::default(), 1),
            Err(ServiceError::Config(_))
        ));
        assert!(matches!(
            build_assignment(Interface::Importannots, &stimuli(10, 2), &ServiceConfig::default(), 1),
            Err(ServiceError::Config(_))
        ));
        assert!(build_assignment(Interface::Zoommaps, &stimuli(10, 0), &ServiceConfig::default(), 1).is_ok());
    }

    #[test]
    fn importannots_mixes_in_designs() {
        let (a, charts) = build_assignment(Interface::Importannots, &stimuli(10, 3), &ServiceConfig::default(), 2).unwrap();
        assert!(charts.is_empty());
        assert_eq!(a.trials.len(), 13);
        assert_eq!(a.validation_trials(), 3);
    }

    #[test]
    fn zoom_uses_every_regular_image_once() {
        let (a, _) = build_assignment(Interface::Zoommaps, &stimuli(10, 2), &ServiceConfig::default(), 2).unwrap();
        let mut ids: Vec<_> = a.trials.iter().map(|t| t.stimulus_id.as_str()).collect();
        ids.sort();
        ids.dedup();
        assert_eq!(ids.len(), 10);
        assert!(a.trials.iter().all(|t| t.params.min_view_ms == Some(10_000.0)));
    }
}

use std::collections::{BTreeMap, HashMap};

use crate::blur::blur_grid;
use crate::codecharts::{resolve_report, CodeChart};
use crate::error::{Error, Result};
use crate::geometry::{Point, WindowMapping};
use crate::grid::Grid;
use crate::heatmap::{AttentionHeatmap, Provenance};
use crate::stimulus::{FixationSet, Stimulus};

use super::{AnnotationMask, ClickSession, CodeReport};

/// Blur for codechart reports: about half the ~100 px triplet spacing.
pub const DEFAULT_CODECHARTS_SIGMA: f64 = 50.0;
/// Blur for click maps when the caller has no dataset-specific value.
pub const DEFAULT_BUBBLE_SIGMA: f64 = 30.0;
/// Blur for eye-tracking fixation maps.
pub const DEFAULT_FIXATION_SIGMA: f64 = 30.0;

/// Finds charts by id.
pub trait ChartLookup {
    fn chart(&self, chart_id: &str) -> Option<&CodeChart>;
}

impl ChartLookup for HashMap<String, CodeChart> {
    fn chart(&self, chart_id: &str) -> Option<&CodeChart> {
        self.get(chart_id)
    }
}

impl ChartLookup for BTreeMap<String, CodeChart> {
    fn chart(&self, chart_id: &str) -> Option<&CodeChart> {
        self.get(chart_id)
    }
}

impl ChartLookup for [CodeChart] {
    fn chart(&self, chart_id: &str) -> Option<&CodeChart> {
        self.iter().find(|c| c.chart_id == chart_id)
    }
}

impl ChartLookup for Vec<CodeChart> {
    fn chart(&self, chart_id: &str) -> Option<&CodeChart> {
        self.as_slice().chart(chart_id)
    }
}

/// Image-space locations of the reports that hit an existing triplet.
///
/// Reports with nonexistent codes and triplets drawn over the window padding
/// produce no location.
pub fn report_locations<L: ChartLookup + ?Sized>(
    reports: &[CodeReport],
    charts: &L,
    mapping: &WindowMapping,
) -> Result<Vec<Option<Point>>> {
    reports
        .iter()
        .map(|r| {
            let chart = charts
                .chart(&r.chart_id)
                .ok_or_else(|| Error::ReferentialIntegrity(r.chart_id.clone()))?;
            Ok(resolve_report(chart, &r.typed_code)
                .center()
                .and_then(|c| mapping.to_image(c)))
        })
        .collect()
}

/// Integer hit counts per pixel. Counts add exactly, so the result does not
/// depend on the order of `points`.
fn impulses(points: impl IntoIterator<Item = Point>, width: usize, height: usize) -> Grid {
    let mut grid = Grid::zeros(width, height);
    for p in points {
        let (x, y) = p.pixel(width, height);
        grid.add(x, y, 1.0);
    }
    grid
}

/// One impulse per located report at the reported triplet's center, blurred.
pub fn codecharts_heatmap<L: ChartLookup + ?Sized>(
    reports: &[CodeReport],
    charts: &L,
    stimulus: &Stimulus,
    mapping: &WindowMapping,
    sigma: f64,
) -> Result<AttentionHeatmap> {
    if let Some(r) = reports.iter().find(|r| r.stimulus_id != stimulus.id) {
        return Err(Error::param(format!(
            "report for {} passed with stimulus {}",
            r.stimulus_id, stimulus.id
        )));
    }
    if (mapping.image_w, mapping.image_h) != (stimulus.width_px, stimulus.height_px) {
        return Err(Error::param("window mapping was built for a different image size"));
    }
    let located = report_locations(reports, charts, mapping)?;
    let (w, h) = stimulus.dims();
    let counts = impulses(located.into_iter().flatten(), w, h);
    AttentionHeatmap::new(&stimulus.id, Provenance::Codecharts, blur_grid(&counts, sigma)?)
}

/// Pixel-wise mean of binary masks.
pub fn importannots_heatmap(masks: &[AnnotationMask]) -> Result<AttentionHeatmap> {
    let first = masks.first().ok_or_else(|| Error::empty("no annotation masks"))?;
    let (w, h) = first.mask.dims();
    let mut counts = Grid::zeros(w, h);
    for m in masks {
        if m.stimulus_id != first.stimulus_id {
            return Err(Error::param("masks belong to different stimuli"));
        }
        first.mask.check_dims(&m.mask)?;
        for (c, &b) in counts.as_mut_slice().iter_mut().zip(m.mask.bits()) {
            if b {
                *c += 1.0;
            }
        }
    }
    let n = masks.len() as f64;
    counts.as_mut_slice().iter_mut().for_each(|c| *c /= n);
    AttentionHeatmap::new(&first.stimulus_id, Provenance::Importannots, counts)
}

/// One impulse per click across every session, blurred.
pub fn bubbleview_heatmap(sessions: &[ClickSession], stimulus: &Stimulus, sigma: f64) -> Result<AttentionHeatmap> {
    if sessions.is_empty() {
        return Err(Error::empty("no click sessions"));
    }
    for s in sessions {
        if s.stimulus_id != stimulus.id {
            return Err(Error::param(format!(
                "session for {} passed with stimulus {}",
                s.stimulus_id, stimulus.id
            )));
        }
        s.validate(stimulus)?;
    }
    let clicks = sessions.iter().flat_map(|s| s.clicks.iter().map(|c| c.point()));
    point_heatmap(clicks, stimulus, sigma, Provenance::Bubbleview)
}

/// Blurred fixation map, the eye-tracking counterpart of the click map.
pub fn fixation_heatmap(fixations: &FixationSet, stimulus: &Stimulus, sigma: f64) -> Result<AttentionHeatmap> {
    fixations.check_bounds(stimulus.width_px, stimulus.height_px)?;
    point_heatmap(fixations.points(), stimulus, sigma, Provenance::Eyetracking)
}

fn point_heatmap(
    points: impl Iterator<Item = Point>,
    stimulus: &Stimulus,
    sigma: f64,
    provenance: Provenance,
) -> Result<AttentionHeatmap> {
    let (w, h) = stimulus.dims();
    let counts = impulses(points, w, h);
    if counts.sum() == 0.0 {
        return Err(Error::empty("no points to blur"));
    }
    AttentionHeatmap::new(&stimulus.id, provenance, blur_grid(&counts, sigma)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codecharts::{generate_codechart, ChartParams};
    use crate::heatmaps::{AnnotationTool, BubbleTask, Click};
    use crate::mask::BinaryMask;
    use crate::stimulus::{Fixation, StimulusKind};

    fn stim(w: u32, h: u32) -> Stimulus {
        Stimulus::new("img", w, h, StimulusKind::Natural)
    }

    fn report(pid: &str, chart: &str, code: &str) -> CodeReport {
        CodeReport {
            participant_id: pid.into(),
            stimulus_id: "img".into(),
            chart_id: chart.into(),
            typed_code: code.into(),
            response_t_ms: 0.0,
        }
    }

    fn chart_with_center_triplet() -> CodeChart {
        let mut chart = generate_codechart("c1", &ChartParams::default(), 1).unwrap();
        // move one triplet exactly to the window center
        chart.placements[0].center = Point::new(500.0, 350.0);
        chart
    }

    #[test]
    fn single_report_peaks_at_triplet() {
        let chart = chart_with_center_triplet();
        let code = chart.placements[0].code.clone();
        let s = stim(1000, 700);
        let map = codecharts_heatmap(
            &[report("p", "c1", &code)],
            &vec![chart],
            &s,
            &WindowMapping::identity(1000, 700),
            50.0,
        )
        .unwrap();
        assert_eq!(map.values.argmax(), (500, 350));
    }

    #[test]
    fn nonexistent_reports_contribute_nothing() {
        let chart = chart_with_center_triplet();
        let code = chart.placements[5].code.clone();
        let charts = vec![chart];
        let s = stim(1000, 700);
        let m = WindowMapping::identity(1000, 700);
        let with_bad =
            codecharts_heatmap(&[report("p", "c1", &code), report("q", "c1", "ZZZ!")], &charts, &s, &m, 50.0).unwrap();
        let without = codecharts_heatmap(&[report("p", "c1", &code)], &charts, &s, &m, 50.0).unwrap();
        assert_eq!(with_bad, without);
    }

    #[test]
    fn repeated_reports_accumulate() {
        let chart = chart_with_center_triplet();
        let code = chart.placements[0].code.clone();
        let reports = [report("p", "c1", &code), report("q", "c1", &code)];
        let located = report_locations(&reports, &vec![chart.clone()], &WindowMapping::identity(1000, 700)).unwrap();
        let counts = impulses(located.into_iter().flatten(), 1000, 700);
        assert_eq!(counts.get(500, 350), 2.0);
        assert_eq!(counts.sum(), 2.0);
        let s = stim(1000, 700);
        let m = WindowMapping::identity(1000, 700);
        let one = codecharts_heatmap(&reports[..1], &vec![chart.clone()], &s, &m, 50.0).unwrap();
        let two = codecharts_heatmap(&reports, &vec![chart], &s, &m, 50.0).unwrap();
        assert_eq!(one.values.argmax(), two.values.argmax());
    }

    #[test]
    fn unknown_chart_is_referential_error() {
        let err = codecharts_heatmap(
            &[report("p", "nope", "ABC")],
            &Vec::<CodeChart>::new(),
            &stim(1000, 700),
            &WindowMapping::identity(1000, 700),
            50.0,
        );
        assert!(matches!(err, Err(Error::ReferentialIntegrity(id)) if id == "nope"));
    }

    #[test]
    fn reports_over_padding_are_dropped() {
        let chart = generate_codechart("c1", &ChartParams::default(), 3).unwrap();
        let s = stim(500, 350);
        let mapping = s.fit_to_window(1000, 700).unwrap();
        let outside: Vec<_> = chart
            .placements
            .iter()
            .filter(|p| mapping.to_image(p.center).is_none())
            .map(|p| report("p", "c1", &p.code))
            .collect();
        assert!(!outside.is_empty());
        let located = report_locations(&outside, &vec![chart], &mapping).unwrap();
        assert!(located.iter().all(Option::is_none));
    }

    fn mask_of(pid: &str, bits: &[u8]) -> AnnotationMask {
        AnnotationMask {
            participant_id: pid.into(),
            stimulus_id: "img".into(),
            tool: AnnotationTool::StrokeFill,
            mask: BinaryMask::from_bits(2, 2, bits.iter().map(|&b| b == 1).collect()).unwrap(),
        }
    }

    #[test]
    fn masks_average() {
        let same = importannots_heatmap(&[mask_of("a", &[1, 0, 0, 1]), mask_of("b", &[1, 0, 0, 1])]).unwrap();
        assert_eq!(same.values.as_slice(), &[1.0, 0.0, 0.0, 1.0]);
        let half = importannots_heatmap(&[mask_of("a", &[1, 0, 0, 0]), mask_of("b", &[0, 0, 0, 0])]).unwrap();
        assert_eq!(half.values.get(0, 0), 0.5);
        let empty = importannots_heatmap(&[mask_of("a", &[0, 0, 0, 0])]).unwrap();
        assert!(empty.values.as_slice().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn mask_dimension_mismatch() {
        let mut odd = mask_of("b", &[0, 0, 0, 0]);
        odd.mask = BinaryMask::empty(3, 1);
        assert!(matches!(
            importannots_heatmap(&[mask_of("a", &[1, 0, 0, 0]), odd]),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(matches!(importannots_heatmap(&[]), Err(Error::EmptyInput(_))));
    }

    fn clicks(pid: &str, pts: &[(f64, f64)]) -> ClickSession {
        ClickSession {
            participant_id: pid.into(),
            stimulus_id: "img".into(),
            clicks: pts
                .iter()
                .enumerate()
                .map(|(i, &(x, y))| Click { t_ms: i as f64, x, y })
                .collect(),
            description: None,
            task: BubbleTask::FreeView,
        }
    }

    #[test]
    fn single_click_peak() {
        let map = bubbleview_heatmap(&[clicks("p", &[(10.0, 10.0)])], &stim(64, 48), 5.0).unwrap();
        assert_eq!(map.values.argmax(), (10, 10));
    }

    #[test]
    fn duplicated_sessions_same_shape() {
        let s = stim(80, 60);
        let a = clicks("a", &[(10.0, 10.0), (50.0, 40.0), (52.3, 41.9)]);
        let once = bubbleview_heatmap(&[a.clone()], &s, 4.0).unwrap().max_normalized();
        let twice = bubbleview_heatmap(&[a.clone(), a], &s, 4.0).unwrap().max_normalized();
        for (x, y) in once.values.as_slice().iter().zip(twice.values.as_slice()) {
            assert!((x - y).abs() < 1e-9);
        }
    }

    #[test]
    fn symmetric_clicks_equal_maxima() {
        let s = stim(200, 100);
        let map = bubbleview_heatmap(
            &[clicks("a", &[(40.0, 50.0), (40.0, 50.0)]), clicks("b", &[(160.0, 50.0), (160.0, 50.0)])],
            &s,
            6.0,
        )
        .unwrap();
        assert!((map.values.get(40, 50) - map.values.get(160, 50)).abs() < 1e-6);
        assert!(map.values.get(40, 50) > map.values.get(100, 50));
    }

    #[test]
    fn click_sessions_must_be_nonempty_and_in_bounds() {
        let s = stim(20, 20);
        assert!(matches!(bubbleview_heatmap(&[], &s, 3.0), Err(Error::EmptyInput(_))));
        assert!(bubbleview_heatmap(&[clicks("a", &[(25.0, 1.0)])], &s, 3.0).is_err());
    }

    #[test]
    fn fixation_maps() {
        let s = stim(120, 90);
        let single = FixationSet::new(vec![Fixation::new("p", 30.2, 40.7)]);
        assert_eq!(fixation_heatmap(&single, &s, 5.0).unwrap().values.argmax(), (30, 40));
        assert!(matches!(
            fixation_heatmap(&FixationSet::default(), &s, 5.0),
            Err(Error::EmptyInput(_))
        ));
        let base = FixationSet::new(vec![
            Fixation::new("p", 40.0, 40.0),
            Fixation::new("p", 44.0, 41.0),
            Fixation::new("q", 47.0, 38.0),
        ]);
        let shifted = FixationSet::new(
            base.entries
                .iter()
                .map(|f| Fixation::new(f.participant_id.clone(), f.x + 13.0, f.y + 7.0))
                .collect(),
        );
        let (ax, ay) = fixation_heatmap(&base, &s, 4.0).unwrap().values.argmax();
        let (bx, by) = fixation_heatmap(&shifted, &s, 4.0).unwrap().values.argmax();
        assert_eq!((bx, by), (ax + 13, ay + 7));
    }
}

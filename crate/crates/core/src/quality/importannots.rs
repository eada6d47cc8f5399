use serde::{Deserialize, Serialize};

use super::config::ImportAnnotsRules;
use super::verdict::{Interface, QualityVerdict, RuleOutcome};
use crate::error::{Error, Result};
use crate::mask::BinaryMask;

/// Intersection over union; 0 when both masks are empty.
pub fn iou(a: &BinaryMask, b: &BinaryMask) -> Result<f64> {
    a.check_dims(b)?;
    let (mut inter, mut union) = (0usize, 0usize);
    for (&x, &y) in a.bits().iter().zip(b.bits()) {
        inter += (x && y) as usize;
        union += (x || y) as usize;
    }
    Ok(if union == 0 { 0.0 } else { inter as f64 / union as f64 })
}

/// A participant's mask on a validation design with its known answer.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidationAnnotation {
    pub stimulus_id: String,
    pub mask: BinaryMask,
    pub truth: BinaryMask,
}

/// `masks` are the participant's annotations on regular images; the
/// validation masks also count toward the empty-image rule.
pub fn validate_importannots(
    participant_id: &str,
    masks: &[BinaryMask],
    validation: &[ValidationAnnotation],
    rules: &ImportAnnotsRules,
) -> Result<QualityVerdict> {
    if validation.is_empty() {
        return Err(Error::param("validation designs with ground-truth masks are required"));
    }
    let empty = masks
        .iter()
        .chain(validation.iter().map(|v| &v.mask))
        .filter(|m| m.is_blank())
        .count();
    let mut reasons = vec![RuleOutcome::at_most(
        "empty_masks",
        empty as f64,
        rules.max_empty_images as f64,
    )];

    let mut passes = 0;
    let mut per_design = Vec::with_capacity(validation.len());
    for v in validation {
        let score = iou(&v.mask, &v.truth)?;
        passes += (score >= rules.min_iou) as usize;
        per_design.push(
            RuleOutcome::at_least(format!("iou[{}]", v.stimulus_id), score, rules.min_iou).informational(),
        );
    }
    reasons.push(
        RuleOutcome::at_least("validation_iou", passes as f64, rules.min_validation_passes as f64)
            .with_note(format!("designs with IoU >= {}", rules.min_iou)),
    );
    reasons.extend(per_design);
    Ok(QualityVerdict::from_rules(participant_id, Interface::Importannots, reasons))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn mask(bits: &[u8]) -> BinaryMask {
        BinaryMask::from_bits(bits.len(), 1, bits.iter().map(|&b| b == 1).collect()).unwrap()
    }

    /// 100-pixel row with a truth of the first `t` pixels and a guess of the
    /// first `g`; IoU = min/max.
    fn design(id: &str, t: usize, g: usize) -> ValidationAnnotation {
        let row = |k: usize| BinaryMask::from_bits(100, 1, (0..100).map(|i| i < k).collect()).unwrap();
        ValidationAnnotation {
            stimulus_id: id.into(),
            mask: row(g),
            truth: row(t),
        }
    }

    #[test]
    fn iou_examples() {
        assert_eq!(iou(&mask(&[1, 1, 0]), &mask(&[1, 1, 0])).unwrap(), 1.0);
        assert_eq!(iou(&mask(&[1, 0, 0]), &mask(&[0, 0, 1])).unwrap(), 0.0);
        assert_eq!(iou(&mask(&[1, 1, 0]), &mask(&[0, 1, 1])).unwrap(), 1.0 / 3.0);
        assert_eq!(iou(&mask(&[0, 0]), &mask(&[0, 0])).unwrap(), 0.0);
        assert!(matches!(
            iou(&mask(&[0, 0]), &mask(&[0, 0, 0])),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn two_of_three_designs_suffice() {
        let designs = [design("a", 100, 56), design("b", 100, 60), design("c", 100, 10)];
        let v = validate_importannots("p", &[], &designs, &ImportAnnotsRules::default()).unwrap();
        assert!(v.passed, "{v:?}");
        assert_eq!(v.rule("validation_iou").unwrap().observed, 2.0);
        assert_eq!(v.rule("iou[a]").unwrap().observed, 0.56);
    }

    #[test]
    fn one_of_three_fails() {
        let designs = [design("a", 100, 54), design("b", 100, 54), design("c", 100, 90)];
        let v = validate_importannots("p", &[], &designs, &ImportAnnotsRules::default()).unwrap();
        assert_eq!(v.failed_rules(), ["validation_iou"]);
    }

    #[test]
    fn iou_threshold_is_inclusive() {
        let designs = [design("a", 100, 55), design("b", 100, 55), design("c", 100, 0)];
        let v = validate_importannots("p", &[], &designs, &ImportAnnotsRules::default()).unwrap();
        assert_eq!(v.rule("validation_iou").unwrap().observed, 2.0);
    }

    #[test]
    fn empty_mask_allowance() {
        let designs = [design("a", 100, 90), design("b", 100, 90), design("c", 100, 90)];
        let full = BinaryMask::full(4, 4);
        let blank = BinaryMask::empty(4, 4);
        let mut images = vec![full.clone(); 5];
        images[0] = blank.clone();
        let v = validate_importannots("p", &images, &designs, &ImportAnnotsRules::default()).unwrap();
        assert!(v.passed);
        images[1] = blank;
        let v = validate_importannots("p", &images, &designs, &ImportAnnotsRules::default()).unwrap();
        assert_eq!(v.failed_rules(), ["empty_masks"]);
    }

    #[test]
    fn missing_truths_rejected() {
        assert!(matches!(
            validate_importannots("p", &[BinaryMask::full(2, 2)], &[], &ImportAnnotsRules::default()),
            Err(Error::Parameter(_))
        ));
    }

    fn masks() -> impl Strategy<Value = (BinaryMask, BinaryMask)> {
        (1usize..8, 1usize..8).prop_flat_map(|(w, h)| {
            let bits = proptest::collection::vec(any::<bool>(), w * h);
            (bits.clone(), bits).prop_map(move |(a, b)| {
                (BinaryMask::from_bits(w, h, a).unwrap(), BinaryMask::from_bits(w, h, b).unwrap())
            })
        })
    }

    proptest! {
        #[test]
        fn iou_symmetric_and_bounded((a, b) in masks()) {
            let ab = iou(&a, &b).unwrap();
            prop_assert_eq!(ab, iou(&b, &a).unwrap());
            prop_assert!((0.0..=1.0).contains(&ab));
            prop_assert_eq!(ab == 1.0, a == b && !a.is_blank());
        }

        #[test]
        fn lowering_thresholds_never_fails_a_pass(
            ious in proptest::collection::vec(0usize..=100, 3),
            empties in 0usize..4,
            min_iou in 0.0f64..1.0,
            relax in 0.0f64..0.5,
        ) {
            let designs: Vec<_> = ious.iter().enumerate().map(|(i, &g)| design(&i.to_string(), 100, g)).collect();
            let mut images = vec![BinaryMask::full(2, 2); 6];
            for m in images.iter_mut().take(empties) {
                *m = BinaryMask::empty(2, 2);
            }
            let strict = ImportAnnotsRules { min_iou, ..Default::default() };
            let loose = ImportAnnotsRules {
                min_iou: (min_iou - relax).max(0.0),
                max_empty_images: strict.max_empty_images + 1,
                min_validation_passes: strict.min_validation_passes - 1,
            };
            let a = validate_importannots("p", &images, &designs, &strict).unwrap();
            let b = validate_importannots("p", &images, &designs, &loose).unwrap();
            prop_assert!(!a.passed || b.passed);
        }
    }
}

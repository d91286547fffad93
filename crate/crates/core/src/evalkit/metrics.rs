use std::str::FromStr;

use crate::error::{Error, Result};
use crate::volume::MAX_CLASS;

/// Number of class ids (0..=8).
pub const NUM_CLASSES: usize = MAX_CLASS as usize + 1;
/// Class left out of the class-average score (epidermis).
pub const EXCLUDED_CLASS: u8 = 7;

/// Per-class score used inside the class average.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum ClassScore {
    /// Correct predictions among the nodes of the class.
    #[default]
    Recall,
    /// One-vs-all accuracy including true negatives: `(TP + TN) / N`.
    OneVsAll,
}

impl ClassScore {
    pub fn as_str(self) -> &'static str {
        match self {
            ClassScore::Recall => "recall",
            ClassScore::OneVsAll => "one-vs-all",
        }
    }
}

impl FromStr for ClassScore {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "recall" => Ok(ClassScore::Recall),
            "one-vs-all" => Ok(ClassScore::OneVsAll),
            _ => Err(Error::Invalid(format!("unknown class score {s}"))),
        }
    }
}

fn check(pred: &[u8], gt: &[u8]) -> Result<()> {
    if pred.len() != gt.len() {
        return Err(Error::Shape(format!("{} predictions for {} labels", pred.len(), gt.len())));
    }
    if pred.is_empty() {
        return Err(Error::Shape("no nodes".into()));
    }
    if let Some(&c) = pred.iter().chain(gt).find(|&&c| c > MAX_CLASS) {
        return Err(Error::InvalidClass(c, MAX_CLASS));
    }
    Ok(())
}

/// Fraction of exact matches.
pub fn top1_accuracy(pred: &[u8], gt: &[u8]) -> Result<f64> {
    check(pred, gt)?;
    let hits = pred.iter().zip(gt).filter(|(p, g)| p == g).count();
    Ok(hits as f64 / gt.len() as f64)
}

/// Scores of one specimen.
#[derive(Clone, Debug, PartialEq)]
pub struct SpecimenScores {
    pub top1: f64,
    /// `None` when the only ground-truth classes are excluded ones.
    pub class_avg: Option<f64>,
    /// Per-class score for classes present in the ground truth (class 7 included for reference).
    pub per_class: [Option<f64>; NUM_CLASSES],
}

pub fn specimen_scores(pred: &[u8], gt: &[u8], score: ClassScore) -> Result<SpecimenScores> {
    let top1 = top1_accuracy(pred, gt)?;
    let mut per_class = [None; NUM_CLASSES];
    for (c, slot) in per_class.iter_mut().enumerate() {
        let c = c as u8;
        let in_class = gt.iter().filter(|&&g| g == c).count();
        if in_class == 0 {
            continue;
        }
        *slot = Some(match score {
            ClassScore::Recall => {
                let tp = pred.iter().zip(gt).filter(|(&p, &g)| g == c && p == c).count();
                tp as f64 / in_class as f64
            }
            ClassScore::OneVsAll => {
                let agree = pred.iter().zip(gt).filter(|(&p, &g)| (p == c) == (g == c)).count();
                agree as f64 / gt.len() as f64
            }
        });
    }
    let counted: Vec<f64> = per_class
        .iter()
        .enumerate()
        .filter(|&(c, _)| c as u8 != EXCLUDED_CLASS)
        .filter_map(|(_, s)| *s)
        .collect();
    let class_avg = (!counted.is_empty()).then(|| counted.iter().sum::<f64>() / counted.len() as f64);
    Ok(SpecimenScores { top1, class_avg, per_class })
}

/// Mean over specimens of the per-specimen class average. Specimens with
/// nothing but excluded classes contribute nothing.
pub fn class_avg_accuracy(specimens: &[(&[u8], &[u8])], score: ClassScore) -> Result<f64> {
    if specimens.is_empty() {
        return Err(Error::Invalid("no specimens".into()));
    }
    let mut vals = Vec::new();
    for (pred, gt) in specimens {
        if let Some(v) = specimen_scores(pred, gt, score)?.class_avg {
            vals.push(v);
        }
    }
    if vals.is_empty() {
        return Err(Error::Invalid("no specimen has a scorable class".into()));
    }
    Ok(vals.iter().sum::<f64>() / vals.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn top1_examples() {
        assert_eq!(top1_accuracy(&[1, 2, 3], &[1, 2, 3]).unwrap(), 1.0);
        assert_eq!(top1_accuracy(&[2, 3, 1], &[1, 2, 3]).unwrap(), 0.0);
        assert!(top1_accuracy(&[1], &[1, 2]).is_err());
        assert!(matches!(top1_accuracy(&[9], &[1]), Err(Error::InvalidClass(9, 8))));
    }

    #[test]
    fn class_avg_examples() {
        // gt (A,A,B,B), pred (A,A,B,A)
        let v = class_avg_accuracy(&[(&[1, 1, 2, 1], &[1, 1, 2, 2])], ClassScore::Recall).unwrap();
        assert_eq!(v, 0.75);
        // a class that is predicted but absent from gt does not count
        let v = class_avg_accuracy(&[(&[1, 3], &[1, 1])], ClassScore::Recall).unwrap();
        assert_eq!(v, 0.5);
        // epidermis is excluded
        let v = class_avg_accuracy(&[(&[1, 1], &[1, 7])], ClassScore::Recall).unwrap();
        assert_eq!(v, 1.0);
        assert!(class_avg_accuracy(&[(&[7], &[7])], ClassScore::Recall).is_err());
    }

    #[test]
    fn one_vs_all_counts_true_negatives() {
        let s = specimen_scores(&[1, 1, 2, 1], &[1, 1, 2, 2], ClassScore::OneVsAll).unwrap();
        assert_eq!(s.per_class[1], Some(0.75));
        assert_eq!(s.per_class[2], Some(0.75));
    }
}

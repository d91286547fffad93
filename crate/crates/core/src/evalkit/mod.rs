//! Accuracy metrics, stage-stratified splits and evaluation reports.

mod metrics;
mod splits;

pub use metrics::{
    class_avg_accuracy, specimen_scores, top1_accuracy, ClassScore, SpecimenScores, EXCLUDED_CLASS, NUM_CLASSES,
};
pub use splits::{make_splits, FoldRoles, Partition, SplitMode, SplitSpec, SPLIT_FORMAT_VERSION, SPLIT_RNG};

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::kv::KvDoc;
use crate::volume::CellClass;

/// Predicted and true labels of one specimen, in bundle node order.
#[derive(Clone, Debug)]
pub struct SpecimenPrediction<'a> {
    pub specimen_id: &'a str,
    pub stage: &'a str,
    pub pred: &'a [u8],
    pub gt: &'a [u8],
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpecimenRow {
    pub specimen_id: String,
    pub stage: String,
    pub partition: Option<Partition>,
    pub scores: SpecimenScores,
}

/// Mean and population standard deviation.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Summary {
    pub mean: f64,
    pub std: f64,
    pub count: usize,
}

impl Summary {
    pub fn of(values: &[f64]) -> Self {
        if values.is_empty() {
            return Self::default();
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        Self {
            mean,
            std: var.sqrt(),
            count: values.len(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GroupSummary {
    pub top1: Summary,
    pub class_avg: Summary,
}

impl GroupSummary {
    fn of<'a>(rows: impl Iterator<Item = &'a SpecimenRow>) -> Self {
        let rows: Vec<_> = rows.collect();
        let top1: Vec<f64> = rows.iter().map(|r| r.scores.top1).collect();
        let ca: Vec<f64> = rows.iter().filter_map(|r| r.scores.class_avg).collect();
        Self {
            top1: Summary::of(&top1),
            class_avg: Summary::of(&ca),
        }
    }
}

/// Per-specimen scores plus aggregates over specimens, classes, stages and folds.
#[derive(Clone, Debug, PartialEq)]
pub struct EvalReport {
    pub class_score: ClassScore,
    pub specimens: Vec<SpecimenRow>,
    /// Over all evaluated specimens (and hence over folds).
    pub overall: GroupSummary,
    /// Mean per-class score over specimens where the class is present.
    pub per_class: [Summary; NUM_CLASSES],
    pub per_stage: BTreeMap<String, GroupSummary>,
    pub per_partition: BTreeMap<Partition, GroupSummary>,
    /// Specimens without a scorable class.
    pub flagged: Vec<String>,
}

/// Scores every specimen; partitions come from `split` when given.
pub fn evaluate(items: &[SpecimenPrediction<'_>], split: Option<&SplitSpec>, class_score: ClassScore) -> Result<EvalReport> {
    if items.is_empty() {
        return Err(Error::Invalid("nothing to evaluate".into()));
    }
    let mut specimens = Vec::with_capacity(items.len());
    let mut flagged = Vec::new();
    for it in items {
        let scores = specimen_scores(it.pred, it.gt, class_score)
            .map_err(|e| Error::Invalid(format!("specimen {}: {e}", it.specimen_id)))?;
        if scores.class_avg.is_none() {
            flagged.push(it.specimen_id.to_string());
        }
        let partition = match split {
            Some(s) => Some(
                s.partition_of(it.specimen_id)
                    .ok_or_else(|| Error::MissingSpecimen(it.specimen_id.to_string()))?,
            ),
            None => None,
        };
        specimens.push(SpecimenRow {
            specimen_id: it.specimen_id.to_string(),
            stage: it.stage.to_string(),
            partition,
            scores,
        });
    }
    let per_class = std::array::from_fn(|c| {
        let v: Vec<f64> = specimens.iter().filter_map(|r| r.scores.per_class[c]).collect();
        Summary::of(&v)
    });
    let mut per_stage = BTreeMap::new();
    for stage in specimens.iter().map(|r| r.stage.clone()).collect::<std::collections::BTreeSet<_>>() {
        let g = GroupSummary::of(specimens.iter().filter(|r| r.stage == stage));
        per_stage.insert(stage, g);
    }
    let mut per_partition = BTreeMap::new();
    for p in specimens.iter().filter_map(|r| r.partition).collect::<std::collections::BTreeSet<_>>() {
        per_partition.insert(p, GroupSummary::of(specimens.iter().filter(|r| r.partition == Some(p))));
    }
    Ok(EvalReport {
        class_score,
        overall: GroupSummary::of(specimens.iter()),
        specimens,
        per_class,
        per_stage,
        per_partition,
        flagged,
    })
}

fn class_name(c: usize) -> &'static str {
    CellClass::from_id(c as u8).map(CellClass::name).unwrap_or("?")
}

impl EvalReport {
    /// Machine-readable `key=value` lines.
    pub fn to_kv(&self) -> KvDoc {
        let mut d = KvDoc::new();
        let sum = |d: &mut KvDoc, prefix: &str, s: &Summary| {
            d.push(format!("{prefix}_mean"), s.mean)
                .push(format!("{prefix}_std"), s.std)
                .push(format!("{prefix}_count"), s.count);
        };
        d.push("class_score", self.class_score.as_str());
        d.push("num_specimens", self.specimens.len());
        sum(&mut d, "top1", &self.overall.top1);
        sum(&mut d, "class_avg", &self.overall.class_avg);
        for (c, s) in self.per_class.iter().enumerate() {
            if s.count > 0 {
                sum(&mut d, &format!("class{c}"), s);
            }
        }
        for (stage, g) in &self.per_stage {
            sum(&mut d, &format!("stage.{stage}.top1"), &g.top1);
            sum(&mut d, &format!("stage.{stage}.class_avg"), &g.class_avg);
        }
        for (p, g) in &self.per_partition {
            sum(&mut d, &format!("{p}.top1"), &g.top1);
            sum(&mut d, &format!("{p}.class_avg"), &g.class_avg);
        }
        for r in &self.specimens {
            let ca = r.scores.class_avg.map(|v| v.to_string()).unwrap_or_else(|| "none".into());
            let part = r.partition.map(|p| p.to_string()).unwrap_or_else(|| "-".into());
            d.push("specimen", format!("{},{},{},{},{}", r.specimen_id, r.stage, part, r.scores.top1, ca));
        }
        for f in &self.flagged {
            d.push("flagged", f);
        }
        d
    }

    /// Human-readable table.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let o = &self.overall;
        let _ = writeln!(s, "specimens: {}", self.specimens.len());
        let _ = writeln!(s, "top-1 accuracy:         {:.4} ± {:.4}", o.top1.mean, o.top1.std);
        let _ = writeln!(
            s,
            "class-average accuracy: {:.4} ± {:.4} ({})",
            o.class_avg.mean,
            o.class_avg.std,
            self.class_score.as_str()
        );
        let _ = writeln!(s, "\nper class:");
        for (c, cs) in self.per_class.iter().enumerate() {
            if cs.count > 0 {
                let note = if c as u8 == EXCLUDED_CLASS { "  (not in class average)" } else { "" };
                let _ = writeln!(s, "  {c} {:<5} {:.4} (n={}){note}", class_name(c), cs.mean, cs.count);
            }
        }
        let _ = writeln!(s, "\nper stage:");
        for (st, g) in &self.per_stage {
            let _ = writeln!(s, "  {st:<6} top-1 {:.4}  class-avg {:.4}  (n={})", g.top1.mean, g.class_avg.mean, g.top1.count);
        }
        if !self.per_partition.is_empty() {
            let _ = writeln!(s, "\nper partition:");
            for (p, g) in &self.per_partition {
                let _ = writeln!(s, "  {p:<6} top-1 {:.4}  class-avg {:.4}  (n={})", g.top1.mean, g.class_avg.mean, g.top1.count);
            }
        }
        if !self.flagged.is_empty() {
            let _ = writeln!(s, "\nno scorable class: {}", self.flagged.join(", "));
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_predictions() {
        let gt = [1u8, 2, 3, 7];
        let items = [
            SpecimenPrediction { specimen_id: "a", stage: "2-IV", pred: &gt, gt: &gt },
            SpecimenPrediction { specimen_id: "b", stage: "3-I", pred: &gt, gt: &gt },
        ];
        let r = evaluate(&items, None, ClassScore::Recall).unwrap();
        assert_eq!(r.overall.top1.mean, 1.0);
        assert_eq!(r.overall.top1.std, 0.0);
        assert_eq!(r.overall.class_avg.mean, 1.0);
        assert_eq!(r.per_stage.len(), 2);
        assert_eq!(r.to_kv().get("class_avg_mean"), Some("1"));
    }

    #[test]
    fn single_specimen_mean_equals_its_scores() {
        let gt = [1u8, 1, 2, 2];
        let pred = [1u8, 1, 2, 1];
        let items = [SpecimenPrediction { specimen_id: "a", stage: "x", pred: &pred, gt: &gt }];
        let r = evaluate(&items, None, ClassScore::Recall).unwrap();
        assert_eq!(r.overall.class_avg.mean, 0.75);
        assert_eq!(r.overall.top1.mean, 0.75);
        assert!(r.to_text().contains("0.7500"));
    }

    #[test]
    fn split_partitions_are_reported() {
        let sp = vec![("a".to_string(), "x".to_string()), ("b".to_string(), "x".to_string())];
        let split = make_splits(&sp, SplitMode::CrossValidation, 2, 0).unwrap();
        let gt = [1u8];
        let items = [
            SpecimenPrediction { specimen_id: "a", stage: "x", pred: &gt, gt: &gt },
            SpecimenPrediction { specimen_id: "c", stage: "x", pred: &gt, gt: &gt },
        ];
        assert!(matches!(evaluate(&items, Some(&split), ClassScore::Recall), Err(Error::MissingSpecimen(_))));
        let r = evaluate(&items[..1], Some(&split), ClassScore::Recall).unwrap();
        assert_eq!(r.per_partition.len(), 1);
    }
}

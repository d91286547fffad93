use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use cellgraph::baseline::{predict, train, write_model, ForwardOptions, GraphData, TrainConfig};
use cellgraph::evalkit::{evaluate, make_splits, ClassScore, Partition, SpecimenPrediction, SplitMode, SplitSpec};
use cellgraph::features::{Entity, FeatureSelection};
use cellgraph::frames::FrameMethod;
use cellgraph::graph::{build_adjacency, CellGraph, DEFAULT_SAMPLES};
use cellgraph::homogenize::{
    fit_dataset_stats, read_bundle, write_bundle, FeatureBundle, NormPolicy, Normalization, StatsScope,
};
use cellgraph::kv::KvDoc;
use cellgraph::pipeline::{bundle_specimen, compute_features, prepare_labels, PipelineOptions};
use cellgraph::synth::{make_shell_organ, ShellSpec};
use cellgraph::volume::{
    read_label_table, read_volume, validate_connectivity, write_label_table, write_volume, CellClass,
    LabelTable, LabeledVolume, STAGES,
};

use crate::config::Settings;
use crate::fail::{CliError, CliResult};

const VOLUME_STEM: &str = "volume";
const LABELS_FILE: &str = "labels.csv";
const GRAPH_FILE: &str = "graph.json";
const SPLIT_FILE: &str = "split.txt";
const PREDICTION_FILE: &str = "labels.u8";

/// Subdirectories of `dir` that contain `marker`, sorted by name.
fn specimen_dirs(dir: &Path, marker: &str) -> CliResult<Vec<PathBuf>> {
    let rd = std::fs::read_dir(dir).map_err(|e| CliError::io(dir, e))?;
    let mut out = Vec::new();
    for entry in rd {
        let p = entry.map_err(|e| CliError::io(dir, e))?.path();
        if p.join(marker).exists() {
            out.push(p);
        }
    }
    out.sort();
    if out.is_empty() {
        return Err(CliError::missing(format!("no specimens with {marker} under {}", dir.display())));
    }
    Ok(out)
}

fn create_dir(p: &Path) -> CliResult<()> {
    std::fs::create_dir_all(p).map_err(|e| CliError::io(p, e))
}

fn check_unique<'a>(ids: impl Iterator<Item = &'a str>) -> CliResult<()> {
    let mut seen = BTreeSet::new();
    for id in ids {
        if !seen.insert(id) {
            return Err(CliError::new("invalid", format!("duplicate specimen id {id}")));
        }
    }
    Ok(())
}

fn merge_map(s: &mut Settings) -> CliResult<BTreeMap<u8, u8>> {
    match s.get_or::<String>("merge", "l5-to-l4")?.as_str() {
        "l5-to-l4" => Ok(CellClass::default_merge()),
        "none" => Ok(BTreeMap::new()),
        other => Err(CliError::config(format!("bad value for merge: {other} (l5-to-l4 | none)"))),
    }
}

/// `entity:block:normalization`, comma separated.
fn norm_policy(s: &mut Settings) -> CliResult<NormPolicy> {
    let mut policy = NormPolicy {
        scope: s.get_or::<StatsScope>("norm_scope", StatsScope::Specimen.as_str())?,
        hop_cap: s.get_or("hop_cap", "3")?,
        ..NormPolicy::default()
    };
    if let Some(raw) = s.raw("norm") {
        for item in raw.split(',').map(str::trim).filter(|i| !i.is_empty()) {
            let parts: Vec<&str> = item.split(':').collect();
            let [entity, block, norm] = parts[..] else {
                return Err(CliError::config(format!("bad norm override {item} (entity:block:normalization)")));
            };
            let entity = match entity {
                "node" => Entity::Node,
                "edge" => Entity::Edge,
                _ => return Err(CliError::config(format!("bad entity {entity} in norm override"))),
            };
            let norm: Normalization = norm.parse().map_err(|_| CliError::config(format!("bad normalization {norm}")))?;
            policy = policy.with(entity, block, norm).map_err(|e| CliError::config(e.to_string()))?;
        }
    }
    Ok(policy)
}

fn read_specimen(dir: &Path) -> CliResult<(LabeledVolume, Option<LabelTable>)> {
    let vol = read_volume(&dir.join(VOLUME_STEM))?;
    let lp = dir.join(LABELS_FILE);
    let labels = if lp.exists() { Some(read_label_table(&lp)?) } else { None };
    Ok((vol, labels))
}

pub fn synth(s: &mut Settings) -> CliResult<String> {
    s.require_explicit(&["seed"])?;
    let out = s.path("out")?;
    let seed: u64 = s.get_or("seed", "0")?;
    let count: usize = s.get_or("count", "10")?;
    let layers: String = s.get_or("layers", "60,30,12,4")?;
    let radius: f64 = s.get_or("radius", "24")?;
    let voxel_size: f64 = s.get_or("voxel_size", "1")?;
    let cells_per_layer: Vec<usize> = layers
        .split(',')
        .map(|v| v.trim().parse())
        .collect::<Result<_, _>>()
        .map_err(|_| CliError::config(format!("bad value for layers: {layers}")))?;
    s.write_resolved(&out)?;
    for i in 0..count {
        let id = format!("shell{i:03}");
        let organ = make_shell_organ(&ShellSpec {
            cells_per_layer: cells_per_layer.clone(),
            radius,
            voxel_size,
            seed: seed.wrapping_add(i as u64),
            specimen_id: id.clone(),
            stage: STAGES[i % STAGES.len()].into(),
            ..ShellSpec::default()
        })?;
        let dir = out.join(&id);
        create_dir(&dir)?;
        write_volume(&organ.volume, &dir.join(VOLUME_STEM))?;
        write_label_table(&organ.labels, &dir.join(LABELS_FILE))?;
    }
    Ok(format!("wrote {count} specimens to {}", out.display()))
}

pub fn ingest(s: &mut Settings) -> CliResult<String> {
    let data = s.input("data_dir")?;
    let out = s.path("out")?;
    let merge = merge_map(s)?;
    s.write_resolved(&out)?;
    let mut report = KvDoc::new();
    let mut failed = Vec::new();
    let dirs = specimen_dirs(&data, &format!("{VOLUME_STEM}.hdr"))?;
    let mut ids = Vec::new();
    for dir in &dirs {
        let (vol, labels) = read_specimen(dir)?;
        let conn = validate_connectivity(&vol);
        let cells = vol.cell_ids();
        let mut problems = Vec::new();
        if !conn.passed() {
            let bad: Vec<String> = conn.failing().map(|(c, n)| format!("{c}:{n}")).collect();
            problems.push(format!("fragmented cells {}", bad.join(" ")));
        }
        if cells.is_empty() {
            problems.push("no cells".to_string());
        }
        let classes = match &labels {
            None => {
                problems.push(format!("missing {LABELS_FILE}"));
                None
            }
            Some(l) => {
                let missing = l.missing(&cells);
                if !missing.is_empty() {
                    problems.push(format!("{} unlabelled cells", missing.len()));
                }
                let merged = cellgraph::volume::merge_labels(l, &merge)?;
                if !merged.is_canonical() {
                    problems.push("class ids outside 0..=8 after merge".to_string());
                }
                Some(merged)
            }
        };
        let status = if problems.is_empty() { "ok" } else { "fail" };
        let mut line = format!(
            "{} stage={} cells={} boundary_background={} status={status}",
            vol.specimen_id,
            vol.stage,
            cells.len(),
            conn.boundary_background
        );
        if let Some(c) = &classes {
            let mut counts = [0usize; 10];
            for (_, k) in c.iter() {
                counts[k as usize] += 1;
            }
            let _ = write!(line, " class_counts={}", counts[..9].iter().map(usize::to_string).collect::<Vec<_>>().join(","));
        }
        if !problems.is_empty() {
            let _ = write!(line, " problems={}", problems.join("; "));
            failed.push(vol.specimen_id.clone());
        }
        report.push("specimen", line);
        ids.push(vol.specimen_id);
    }
    check_unique(ids.iter().map(String::as_str))?;
    report.push("specimens", dirs.len()).push("failed", failed.len());
    let path = out.join("ingest_report.txt");
    report.write(&path)?;
    if failed.is_empty() {
        Ok(format!("{} specimens valid; report at {}", dirs.len(), path.display()))
    } else {
        Err(CliError::new(
            "validation",
            format!("{} specimens failed validation ({}); see {}", failed.len(), failed.join(","), path.display()),
        ))
    }
}

pub fn graph(s: &mut Settings) -> CliResult<String> {
    let data = s.input("data_dir")?;
    let out = s.path("out")?;
    let k: usize = s.get_or("k_samples", &DEFAULT_SAMPLES.to_string())?;
    let merge = merge_map(s)?;
    s.write_resolved(&out)?;
    let dirs = specimen_dirs(&data, &format!("{VOLUME_STEM}.hdr"))?;
    let mut ids = Vec::new();
    for dir in &dirs {
        let (vol, labels) = read_specimen(dir)?;
        let g = build_adjacency::<f64>(&vol, k)?;
        let target = out.join(&g.specimen_id);
        create_dir(&target)?;
        let path = target.join(GRAPH_FILE);
        std::fs::write(&path, serde_json::to_vec(&g)?).map_err(|e| CliError::io(&path, e))?;
        if let Some(l) = labels {
            let merged = cellgraph::volume::merge_labels(&l, &merge)?;
            write_label_table(&merged, &target.join(LABELS_FILE))?;
        }
        ids.push(g.specimen_id);
    }
    check_unique(ids.iter().map(String::as_str))?;
    Ok(format!("wrote {} graphs to {}", ids.len(), out.display()))
}

pub fn features(s: &mut Settings) -> CliResult<String> {
    s.require_explicit(&["frame", "features"])?;
    let graphs = s.input("graph_dir")?;
    let out = s.path("out")?;
    let frame: FrameMethod = s.get_or("frame", FrameMethod::LabelSurf.as_str())?;
    let selection: FeatureSelection = s.get_or("features", "all")?;
    let policy = norm_policy(s)?;
    s.write_resolved(&out)?;
    let mut loaded = Vec::new();
    for dir in specimen_dirs(&graphs, GRAPH_FILE)? {
        let path = dir.join(GRAPH_FILE);
        let bytes = std::fs::read(&path).map_err(|e| CliError::io(&path, e))?;
        let g: CellGraph<f64> = serde_json::from_slice(&bytes)?;
        let lp = dir.join(LABELS_FILE);
        let labels = if lp.exists() { Some(read_label_table(&lp)?) } else { None };
        loaded.push((g, labels));
    }
    check_unique(loaded.iter().map(|(g, _)| g.specimen_id.as_str()))?;
    let k = loaded[0].0.k;
    let opts = PipelineOptions {
        k,
        frame,
        selection,
        policy,
        merge: BTreeMap::new(),
    };
    let mut computed = Vec::new();
    for (g, labels) in &loaded {
        let labels = labels.as_ref().map(|l| prepare_labels(l, &opts)).transpose()?;
        let f = compute_features(g, labels.as_ref(), frame)
            .map_err(|e| CliError::from(e).in_specimen(&g.specimen_id))?;
        computed.push((f, labels));
    }
    let stats = match opts.policy.scope {
        StatsScope::Specimen => None,
        StatsScope::Dataset => {
            let all: Vec<&[_]> = computed.iter().map(|(f, _)| f.blocks.as_slice()).collect();
            Some(fit_dataset_stats(&all, &opts.selection, &opts.policy)?)
        }
    };
    for ((g, _), (f, labels)) in loaded.iter().zip(&computed) {
        let mut o = opts.clone();
        o.k = g.k;
        let b = bundle_specimen(g, f, labels.as_ref(), &o, stats.as_ref())?;
        write_bundle(&b, &out.join(&g.specimen_id))?;
    }
    Ok(format!("wrote {} bundles to {}", loaded.len(), out.display()))
}

fn load_bundles(dir: &Path) -> CliResult<Vec<FeatureBundle>> {
    let bundles = specimen_dirs(dir, "header.txt")?
        .iter()
        .map(|d| read_bundle(d).map_err(CliError::from))
        .collect::<CliResult<Vec<_>>>()?;
    check_unique(bundles.iter().map(|b| b.meta.specimen_id.as_str()))?;
    Ok(bundles)
}

pub fn split(s: &mut Settings) -> CliResult<String> {
    s.require_explicit(&["seed", "k_folds"])?;
    let bundles = s.input("bundle_dir")?;
    let out = s.path("out")?;
    let mode: SplitMode = s.get_or("split_mode", SplitMode::CrossValidation.as_str())?;
    let k: u32 = s.get_or("k_folds", "5")?;
    let seed: u64 = s.get_or("seed", "0")?;
    s.write_resolved(&out)?;
    let specimens: Vec<(String, String)> = load_bundles(&bundles)?
        .into_iter()
        .map(|b| (b.meta.specimen_id, b.meta.stage))
        .collect();
    let spec = make_splits(&specimens, mode, k, seed)?;
    let path = out.join(SPLIT_FILE);
    spec.write(&path)?;
    let warn = if spec.unbalanced { " (some stage has fewer specimens than folds)" } else { "" };
    Ok(format!("wrote {} assignments to {}{warn}", specimens.len(), path.display()))
}

fn split_path(p: PathBuf) -> PathBuf {
    if p.is_dir() {
        p.join(SPLIT_FILE)
    } else {
        p
    }
}

pub fn train_cmd(s: &mut Settings) -> CliResult<String> {
    s.require_explicit(&["seed"])?;
    let bundles = s.input("bundle_dir")?;
    let split = split_path(s.input("split_file")?);
    let out = s.path("out")?;
    let fold: u32 = s.get_or("fold", "0")?;
    let d = TrainConfig::default();
    let cfg = TrainConfig {
        learning_rate: s.get_or("learning_rate", &d.learning_rate.to_string())?,
        weight_decay: s.get_or("weight_decay", &d.weight_decay.to_string())?,
        epochs: s.get_or("epochs", &d.epochs.to_string())?,
        hidden: s.get_or("hidden", &d.hidden.to_string())?,
        dropout: s.get_or("dropout", &d.dropout.to_string())?,
        seed: s.get_or("seed", &d.seed.to_string())?,
        feature_noise: s.get_or("feature_noise", &d.feature_noise.to_string())?,
        edge_dropout: s.get_or("edge_dropout", &d.edge_dropout.to_string())?,
        layer_norm: s.flag("layer_norm", d.layer_norm)?,
        num_classes: d.num_classes,
    };
    cfg.validate().map_err(|e| CliError::config(e.to_string()))?;
    s.write_resolved(&out)?;

    let bundles = load_bundles(&bundles)?;
    if bundles.windows(2).any(|w| !w[0].same_manifest(&w[1])) {
        return Err(CliError::new("invalid", "bundles have different feature manifests"));
    }
    let spec = SplitSpec::read(&split)?;
    let roles = spec.roles(fold)?;
    let by_id: BTreeMap<&str, &FeatureBundle> = bundles.iter().map(|b| (b.meta.specimen_id.as_str(), b)).collect();
    let pick = |ids: &[String]| -> CliResult<Vec<GraphData<f64>>> {
        ids.iter()
            .map(|id| {
                let b = by_id.get(id.as_str()).ok_or_else(|| CliError::missing(format!("no bundle for specimen {id}")))?;
                Ok(GraphData::from_bundle(b)?)
            })
            .collect()
    };
    let train_set = pick(&roles.train)?;
    let val_set = pick(&roles.val)?;
    if train_set.is_empty() {
        return Err(CliError::new("invalid", "empty training set"));
    }
    let outcome = train(&train_set, &val_set, &cfg)?;

    let manifest: Vec<String> = bundles[0]
        .node_manifest
        .iter()
        .map(|m| format!("{}:{}:{}", m.name, m.width, m.normalization))
        .collect();
    write_model(&outcome.params, &cfg, &manifest.join(";"), &out.join("model"))?;
    outcome.history_kv().write(&out.join("history.txt"))?;
    let opts = ForwardOptions {
        layer_norm: cfg.layer_norm,
    };
    for b in &bundles {
        let g = GraphData::<f64>::from_bundle(b)?;
        let pred = predict(&outcome.params, &g, opts)?;
        let dir = out.join("predictions").join(&b.meta.specimen_id);
        create_dir(&dir)?;
        let path = dir.join(PREDICTION_FILE);
        std::fs::write(&path, pred).map_err(|e| CliError::io(&path, e))?;
    }
    Ok(format!(
        "trained fold {fold} on {} specimens ({} validation), best epoch {}; outputs in {}",
        train_set.len(),
        val_set.len(),
        outcome.best_epoch,
        out.display()
    ))
}

pub fn eval(s: &mut Settings) -> CliResult<String> {
    let bundles = s.input("bundle_dir")?;
    let preds = s.input("predictions_dir")?;
    let out = s.path("out")?;
    let class_score: ClassScore = s.get_or("class_score", ClassScore::Recall.as_str())?;
    let split = match s.raw("split_file") {
        Some(p) => {
            let p = split_path(PathBuf::from(p));
            if !p.exists() {
                return Err(CliError::missing(format!("{} does not exist", p.display())));
            }
            Some(SplitSpec::read(&p)?)
        }
        None => None,
    };
    let fold: Option<u32> = s.get_opt("fold")?;
    if fold.is_some() && split.is_none() {
        return Err(CliError::config("--fold needs --split-file"));
    }
    s.write_resolved(&out)?;

    let bundles = load_bundles(&bundles)?;
    let selected: Option<BTreeSet<String>> = match (&split, fold) {
        (Some(sp), Some(f)) => Some(sp.roles(f)?.test.into_iter().collect()),
        _ => None,
    };
    let mut loaded = Vec::new();
    for b in &bundles {
        if selected.as_ref().is_some_and(|sel| !sel.contains(&b.meta.specimen_id)) {
            continue;
        }
        let gt = b
            .labels
            .clone()
            .ok_or_else(|| CliError::missing(format!("bundle {} has no labels", b.meta.specimen_id)))?;
        let path = preds.join(&b.meta.specimen_id).join(PREDICTION_FILE);
        let pred = std::fs::read(&path).map_err(|e| CliError::io(&path, e))?;
        if pred.len() != gt.len() {
            return Err(CliError::new(
                "invalid",
                format!("{}: {} predictions for {} nodes", path.display(), pred.len(), gt.len()),
            ));
        }
        loaded.push((b, pred, gt));
    }
    let items: Vec<SpecimenPrediction> = loaded
        .iter()
        .map(|(b, pred, gt)| SpecimenPrediction {
            specimen_id: &b.meta.specimen_id,
            stage: &b.meta.stage,
            pred,
            gt,
        })
        .collect();
    let report = evaluate(&items, split.as_ref(), class_score)?;
    report.to_kv().write(&out.join("report.kv"))?;
    let text_path = out.join("report.txt");
    std::fs::write(&text_path, report.to_text()).map_err(|e| CliError::io(&text_path, e))?;
    let scope = match fold {
        Some(f) => format!("test partition of {}", Partition::Fold(f)),
        None => "all specimens".to_string(),
    };
    Ok(format!(
        "{} specimens ({scope}): top1 {:.4} class_avg {:.4}",
        items.len(),
        report.overall.top1.mean,
        report.overall.class_avg.mean
    ))
}

impl CliError {
    fn in_specimen(mut self, id: &str) -> Self {
        self.message = format!("specimen {id}: {}", self.message);
        self
    }
}

mod common;

use cellgraph::features::{current_flow_closeness, degree_centrality, FeatureSelection, BlockKind, Entity, DEFAULT_NODE_WIDTH};
use cellgraph::frames::FrameMethod;
use cellgraph::homogenize::{
    assemble, mean_std, normalize_block, read_bundle, rp2_embed, unit_norm, write_bundle, zscore, Normalization,
    NormPolicy,
};
use cellgraph::linalg::Vec3;
use cellgraph::pipeline::{bundle_meta, compute_features, PipelineOptions};
use cellgraph::graph::build_adjacency;
use cellgraph::synth::{make_shell_organ, ShellSpec};
use proptest::prelude::*;
use rand::SeedableRng;

proptest! {
    #[test]
    fn zscore_moments(col in prop::collection::vec(-1e3f64..1e3, 2..200)) {
        let (_, s) = mean_std(&col);
        prop_assume!(s > 1e-3);
        let z = zscore(&col);
        let (m, s) = mean_std(&z);
        prop_assert!(m.abs() < 1e-9);
        prop_assert!((s - 1.0).abs() < 1e-9);
    }

    #[test]
    fn unit_norm_is_unit(v in prop::collection::vec(-10.0f64..10.0, 1..20)) {
        let (u, flagged) = unit_norm(&v);
        if v.iter().all(|&x| x == 0.0) {
            prop_assert!(flagged);
        } else {
            let n = u.iter().map(|x| x * x).sum::<f64>().sqrt();
            prop_assert!((n - 1.0).abs() < 1e-12);
            let (again, _) = unit_norm(&u);
            for (a, b) in again.iter().zip(&u) {
                prop_assert!((a - b).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn rp2_sign_exact(v in prop::array::uniform3(-5.0f64..5.0)) {
        let v = Vec3(v);
        prop_assert_eq!(rp2_embed(v), rp2_embed(-v));
    }

    #[test]
    fn cfc_matches_pseudo_inverse(seed in 0u64..1000, n in 2usize..30) {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let edges = common::random_connected(&mut rng, n, n);
        let t = common::topology(n, &edges, &[0]);
        let got = current_flow_closeness::<f64>(&t).unwrap();
        for (a, b) in got.iter().zip(common::cfc_oracle(n, &edges)) {
            prop_assert!((a - b).abs() < 1e-8);
        }
        let d = degree_centrality::<f64>(&t);
        for i in 0..n {
            prop_assert!((d[i] - t.degree(i) as f64 / (n - 1) as f64).abs() < 1e-15);
        }
    }
}

fn shell_blocks() -> (cellgraph::CellGraph64, cellgraph::pipeline::SpecimenFeatures<f64>, cellgraph::volume::LabelTable) {
    let o = make_shell_organ(&ShellSpec {
        cells_per_layer: vec![30, 10],
        radius: 12.0,
        ..ShellSpec::default()
    })
    .unwrap();
    let g = build_adjacency::<f64>(&o.volume, 100).unwrap();
    let f = compute_features(&g, Some(&o.labels), FrameMethod::Trivial).unwrap();
    (g, f, o.labels)
}

#[test]
fn policies_other_than_zscore_are_idempotent() {
    let (_, f, _) = shell_blocks();
    for b in &f.blocks {
        for norm in [Normalization::None, Normalization::UnitNorm] {
            let once = normalize_block(b, norm, 3, None).unwrap();
            let mut b2 = b.clone();
            b2.values = once.clone();
            let twice = normalize_block(&b2, norm, 3, None).unwrap();
            assert!((once - twice).iter().all(|d| d.abs() < 1e-12), "{} {norm}", b.name);
        }
    }
    let hops = f.blocks.iter().find(|b| b.name == "hops_to_surface").unwrap();
    let once = normalize_block(hops, Normalization::ClipZScore, 1, None).unwrap();
    assert!(once.iter().all(|&v| v == 0.0), "all hops clip to 1 under cap 1");
}

#[test]
fn assemble_serialize_round_trip() {
    let (g, f, labels) = shell_blocks();
    let opts = PipelineOptions {
        frame: FrameMethod::Trivial,
        k: 100,
        ..PipelineOptions::default()
    };
    let node_classes = cellgraph::pipeline::node_labels(&g, &labels).unwrap();
    let b = assemble(
        &f.blocks,
        g.topology(),
        &FeatureSelection::All,
        &NormPolicy::default(),
        None,
        bundle_meta(&g, &opts),
        Some(node_classes),
    )
    .unwrap();
    assert_eq!(b.node_width(), DEFAULT_NODE_WIDTH);
    let d = tempfile::tempdir().unwrap();
    write_bundle(&b, d.path()).unwrap();
    let back = read_bundle(d.path()).unwrap();
    assert_eq!(back, b);
    // every invariant column count is the sum of invariant manifest widths
    let inv: usize = b.node_manifest.iter().filter(|m| m.kind == BlockKind::Invariant).map(|m| m.width).sum();
    assert_eq!(b.node_columns_of(BlockKind::Invariant).len(), inv);
}

#[test]
fn selections_change_only_node_side() {
    let (g, f, _) = shell_blocks();
    let opts = PipelineOptions::default();
    for sel in ["invariant-only", "covariant-only", "degree-profile-only", "volume+cfc_centrality"] {
        let sel: FeatureSelection = sel.parse().unwrap();
        let b = assemble(&f.blocks, g.topology(), &sel, &NormPolicy::default(), None, bundle_meta(&g, &opts), None).unwrap();
        assert_eq!(b.edge_width(), 11);
        let names: Vec<&str> = b.node_manifest.iter().map(|m| m.name.as_str()).collect();
        for spec in sel.node_blocks().unwrap() {
            assert!(names.contains(&spec.name));
        }
    }
    let unknown = NormPolicy::default().with(Entity::Node, "not_a_block", Normalization::None);
    assert!(unknown.is_err());
}

//! Fusion, ROC, voting and cross-validation against reference rules.

mod common;

use common::*;
use convfuse_core::evaluation::*;
use convfuse_core::{ClassLabel, ScorePair};
use proptest::prelude::*;

fn pair() -> impl Strategy<Value = ScorePair> {
    (0.0f64..=1.0).prop_map(sp)
}

fn labelled() -> impl Strategy<Value = Vec<(ScorePair, ClassLabel)>> {
    prop::collection::vec((0.0f64..1.0, any::<bool>()), 2..60).prop_map(|v| {
        let mut items: Vec<_> = v
            .into_iter()
            .map(|(b, p)| (sp(b), if p { ClassLabel::Porn } else { ClassLabel::Benign }))
            .collect();
        // both classes present
        items[0].1 = ClassLabel::Benign;
        items[1].1 = ClassLabel::Porn;
        items
    })
}

#[test]
fn voting_matches_brute_force_on_grid() {
    let grid = [0.1, 0.5, 0.9];
    for n in 1..=8 {
        for seq in grid_sequences(&grid, n) {
            let frames: Vec<_> = seq.iter().map(|&b| sp(b)).collect();
            assert_eq!(
                classify_video(&frames, 50.0).unwrap(),
                brute_force_vote(&seq, 50.0),
                "{seq:?}"
            );
        }
    }
}

#[test]
fn voting_examples() {
    let v = |b: &[f64]| classify_video(&b.iter().map(|&x| sp(x)).collect::<Vec<_>>(), 50.0).unwrap();
    assert_eq!(v(&[0.1, 0.2, 0.9]), ClassLabel::Porn);
    assert_eq!(v(&[0.9, 0.2]), ClassLabel::Benign);
    assert_eq!(v(&[0.6, 0.1]), ClassLabel::Porn);
    assert_eq!(v(&[0.3]), ClassLabel::Porn);
    assert!(classify_video(&[], 50.0).is_err());
}

#[test]
fn fused_scores_are_valid_pairs() {
    let a = sp(0.8);
    let b = sp(0.3);
    let avg = FusionKind::Average.fuse(&a, &b);
    assert!((avg.benign() - 0.55).abs() < 1e-12);
    let max = FusionKind::Max.fuse(&a, &b);
    assert!((max.benign() - 0.8 / 1.5).abs() < 1e-12);
}

#[test]
fn crossval_population_std() {
    let fold = |right: usize| {
        (0..4)
            .map(|i| {
                (
                    ClassLabel::Benign,
                    if i < right {
                        ClassLabel::Benign
                    } else {
                        ClassLabel::Porn
                    },
                )
            })
            .chain([(ClassLabel::Porn, ClassLabel::Porn)])
            .collect::<Vec<_>>()
    };
    let s = crossval_evaluate(&[fold(4), fold(2)]).unwrap();
    assert!((s.mean - 0.875).abs() < 1e-12);
    assert!((s.std - 0.125).abs() < 1e-12);
}

proptest! {
    #[test]
    fn roc_endpoints_and_monotone(items in labelled()) {
        let roc = roc_sweep(&items).unwrap();
        prop_assert_eq!(roc.len(), 101);
        prop_assert_eq!((roc[0].benign_as_benign_rate, roc[0].porn_as_benign_rate), (1.0, 1.0));
        prop_assert_eq!((roc[100].benign_as_benign_rate, roc[100].porn_as_benign_rate), (0.0, 0.0));
        for w in roc.windows(2) {
            prop_assert!(w[1].benign_as_benign_rate <= w[0].benign_as_benign_rate);
            prop_assert!(w[1].porn_as_benign_rate <= w[0].porn_as_benign_rate);
        }
    }

    #[test]
    fn fusion_preserves_sum_to_one(a in pair(), b in pair(), w in 0.0f64..=1.0) {
        for s in [fuse_average(&a, &b, w).unwrap(), fuse_max(&a, &b)] {
            prop_assert!((s.benign() + s.porn() - 1.0).abs() <= 1e-9);
            prop_assert!(s.benign() >= 0.0 && s.porn() >= 0.0);
        }
        prop_assert_eq!(fuse_average(&a, &a, w).unwrap(), a);
        prop_assert_eq!(fuse_max(&a, &a), a);
        prop_assert_eq!(fuse_max(&a, &b), fuse_max(&b, &a));
    }

    #[test]
    fn voting_ignores_frame_order(scores in prop::collection::vec(0.0f64..=1.0, 1..12), seed in any::<u64>()) {
        use rand::seq::SliceRandom;
        let frames: Vec<_> = scores.iter().map(|&b| sp(b)).collect();
        let mut shuffled = frames.clone();
        shuffled.shuffle(&mut rng(seed));
        prop_assert_eq!(classify_video(&frames, 50.0).unwrap(), classify_video(&shuffled, 50.0).unwrap());
    }

    #[test]
    fn grouped_voting_ignores_interleaving(scores in prop::collection::vec((0usize..4, 0.0f64..=1.0), 1..30), seed in any::<u64>()) {
        use rand::seq::SliceRandom;
        let ids = ["a", "b", "c", "d"];
        let frames: Vec<_> = scores.iter().map(|&(v, b)| (ids[v], sp(b), ClassLabel::ALL[v % 2])).collect();
        let mut shuffled = frames.clone();
        shuffled.shuffle(&mut rng(seed));
        prop_assert_eq!(classify_videos(frames, 50.0).unwrap(), classify_videos(shuffled, 50.0).unwrap());
    }
}

mod common;

use proptest::prelude::*;

use common::Grid;
use virtual_eyes::dicom::HuSlice;
use virtual_eyes::lung::morphology::{dilate, disk_area, erode};
use virtual_eyes::lung::{
    detect_lung_slice, filter_components, morph_close, morph_open, BinaryMask, Connectivity,
    LungDetectConfig,
};
use virtual_eyes::synth::PhantomSpec;

fn grid_strategy(max_rows: usize, max_cols: usize) -> impl Strategy<Value = Grid> {
    (1..=max_rows, 1..=max_cols, 0.05f64..0.95).prop_flat_map(|(rows, cols, p)| {
        proptest::collection::vec(proptest::bool::weighted(p), rows * cols)
            .prop_map(move |cells| Grid { rows, cols, cells })
    })
}

fn mask_of(g: &Grid) -> BinaryMask {
    BinaryMask::from_vec(g.rows, g.cols, g.cells.clone())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    // Wide grids span several 64-pixel words per row.
    #[test]
    fn dilate_and_erode_match_brute_force(g in grid_strategy(24, 200), r in 0usize..=7) {
        let m = mask_of(&g);
        prop_assert_eq!(dilate(&m, r).into_vec(), common::dilate(&g, r as i64).cells);
        prop_assert_eq!(erode(&m, r).into_vec(), common::erode(&g, r as i64).cells);
    }

    #[test]
    fn open_close_match_brute_force(g in grid_strategy(40, 140), r in 1usize..=6) {
        let m = mask_of(&g);
        prop_assert_eq!(morph_open(&m, r).into_vec(), common::open(&g, r as i64).cells);
        prop_assert_eq!(morph_close(&m, r).into_vec(), common::close(&g, r as i64).cells);
    }

    #[test]
    fn opening_shrinks_closing_grows(g in grid_strategy(40, 90), r in 1usize..=5) {
        let m = mask_of(&g);
        let opened = morph_open(&m, r);
        let closed = morph_close(&m, r);
        prop_assert!(opened.is_subset_of(&m));
        prop_assert!(m.is_subset_of(&closed));
        prop_assert_eq!(morph_open(&opened, r), opened);
        prop_assert_eq!(morph_close(&closed, r), closed);
    }

    #[test]
    fn component_filter_matches_flood_fill(
        g in grid_strategy(48, 100),
        frac in 0.0f64..0.1,
        eight in any::<bool>(),
    ) {
        let conn = if eight { Connectivity::Eight } else { Connectivity::Four };
        let kept = filter_components(&mask_of(&g), frac, conn);
        prop_assert_eq!(kept.as_slice(), &common::keep_large_components(&g, frac, eight).cells[..]);
        prop_assert!(kept.is_subset_of(&mask_of(&g)));
    }
}

#[test]
fn disk_sizes() {
    assert_eq!(common::disk(2).len(), disk_area(2));
    assert_eq!(common::disk(5).len(), disk_area(5));
    assert_eq!(disk_area(2), 13);
    assert_eq!(disk_area(5), 81);
}

#[test]
fn three_by_three_square_opens_away() {
    let m = BinaryMask::from_fn(20, 20, |r, c| (8..11).contains(&r) && (8..11).contains(&c));
    assert!(!morph_open(&m, 2).any());
}

#[test]
fn closing_two_points_keeps_only_the_points() {
    // A disk centred in the gap always pokes out of the union of the two
    // dilated points (e.g. at dy = 5, dx = 0), so the gap stays open.
    let m = BinaryMask::from_fn(21, 21, |r, c| r == 10 && (c == 8 || c == 12));
    let g = Grid {
        rows: 21,
        cols: 21,
        cells: m.as_slice().to_vec(),
    };
    let closed = morph_close(&m, 5);
    assert_eq!(closed.as_slice(), &common::close(&g, 5).cells[..]);
    assert_eq!(closed, m);
}

#[test]
fn full_and_empty_masks_are_fixed_points() {
    for value in [false, true] {
        let m = BinaryMask::filled(512, 512, value);
        assert_eq!(morph_open(&m, 2), m);
        assert_eq!(morph_close(&m, 5), m);
    }
}

#[test]
fn phantom_area_matches_rasterized_ellipses() {
    let spec = PhantomSpec::new("P", "1.2", 64, Some((0, 63)));
    let stats = detect_lung_slice(&spec.hu_slice(10), &LungDetectConfig::default());
    let truth = spec.lung_fraction();
    assert!(stats.lung_flag);
    assert!(
        (stats.area_ratio - truth).abs() < 0.005,
        "{} vs {truth}",
        stats.area_ratio
    );
}

#[test]
fn detection_is_translation_covariant() {
    let cfg = LungDetectConfig::default();
    let base = PhantomSpec::new("P", "1.2", 64, Some((0, 63)));
    let mut shifted = base.clone();
    for l in &mut shifted.lungs {
        l.center_row += 9.0;
        l.center_col -= 13.0;
    }
    let a = detect_lung_slice(&base.hu_slice(3), &cfg).mask;
    let b = detect_lung_slice(&shifted.hu_slice(3), &cfg).mask;
    let moved = BinaryMask::from_fn(512, 512, |r, c| {
        r >= 9 && c + 13 < 512 && a.get(r - 9, c + 13)
    });
    // Noise differs between the two draws but never crosses the HU band.
    assert_eq!(b, moved);
}

#[test]
fn larger_lungs_never_lose_the_flag() {
    let cfg = LungDetectConfig::default();
    let mut spec = PhantomSpec::new("P", "1.2", 64, Some((0, 63)));
    for l in &mut spec.lungs {
        l.semi_rows = 40.0;
        l.semi_cols = 25.0;
    }
    let mut was_lung = false;
    for step in 0..8 {
        for l in &mut spec.lungs {
            l.semi_rows += 6.0;
            l.semi_cols += 4.0;
        }
        let flag = detect_lung_slice(&spec.hu_slice(0), &cfg).lung_flag;
        assert!(flag || !was_lung, "flag lost at step {step}");
        was_lung |= flag;
    }
    assert!(was_lung);
}

#[test]
fn constant_slices() {
    let cfg = LungDetectConfig::default();
    let lung = detect_lung_slice(&HuSlice::new(512, 512, vec![-800.0; 512 * 512]), &cfg);
    assert_eq!((lung.area_ratio, lung.lung_flag), (1.0, true));
    let tissue = detect_lung_slice(&HuSlice::new(512, 512, vec![40.0; 512 * 512]), &cfg);
    assert_eq!((tissue.area_ratio, tissue.lung_flag), (0.0, false));
}

use std::fs;
use std::path::Path;

use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use virtual_eyes::dicom::{
    assemble_series, build_sorted_series, decode_raw, hu_convert, parse_dicom_file, read_header,
    scan_directory, Orientation, ParsedSlice, PixelRepresentation, EXPLICIT_VR_BIG_ENDIAN,
    IMPLICIT_VR_LITTLE_ENDIAN,
};
use virtual_eyes::synth::{FixtureEncoding, SliceFixture};

fn signed_fixture() -> SliceFixture {
    let raw: [i16; 16] = [
        -1024, -1000, -900, -800, -700, -500, -100, 0, 1, 40, 60, 100, 400, 1000, 2000, 3071,
    ];
    let mut f = SliceFixture::ct("1.2.3.4", "1.2.3.4.1", 4, 4, &[0; 16]);
    f.pixel_representation = 1;
    f.pixels = raw.iter().flat_map(|v| v.to_le_bytes()).collect();
    f.position = Some([-150.0, -170.5, 42.25]);
    f.instance_number = Some(17);
    f.patient_id = Some("100012".into());
    f
}

#[test]
fn explicit_fixture_parses() {
    let f = signed_fixture();
    let bytes = f.to_bytes();
    let (h, payload) = parse_dicom_file(&bytes).unwrap();
    assert_eq!(payload.len(), 32);
    assert_eq!(h.series_uid, "1.2.3.4");
    assert_eq!(h.sop_uid, "1.2.3.4.1");
    assert_eq!(h.patient_id, "100012");
    assert_eq!((h.rows, h.cols, h.bits_allocated), (4, 4, 16));
    assert_eq!(h.pixel_representation, PixelRepresentation::Signed);
    assert_eq!((h.rescale_slope, h.rescale_intercept), (1.0, -1024.0));
    assert_eq!(h.image_position_patient, Some([-150.0, -170.5, 42.25]));
    assert_eq!(
        h.image_orientation_patient,
        Some([1.0, 0.0, 0.0, 0.0, 1.0, 0.0])
    );
    assert_eq!(h.instance_number, Some(17));
    let raw = decode_raw(&h, payload);
    assert_eq!(raw[0], -1024);
    assert_eq!(raw[15], 3071);
}

#[test]
fn implicit_fixture_with_sequence_parses() {
    let mut f = signed_fixture();
    f.encoding = FixtureEncoding::ImplicitLittle;
    f.with_sequence = true;
    let bytes = f.to_bytes();
    let (h, payload) = parse_dicom_file(&bytes).unwrap();
    assert_eq!(h.transfer_syntax_uid, IMPLICIT_VR_LITTLE_ENDIAN);
    assert_eq!(h.instance_number, Some(17));
    assert_eq!(payload, &f.pixels[..]);
}

#[test]
fn missing_magic_is_not_dicom() {
    let mut bytes = signed_fixture().to_bytes();
    bytes[128..132].copy_from_slice(b"DICN");
    assert_eq!(parse_dicom_file(&bytes).unwrap_err().code(), "NOT_DICOM");
    assert_eq!(parse_dicom_file(b"hello").unwrap_err().code(), "NOT_DICOM");
    assert_eq!(parse_dicom_file(&[]).unwrap_err().code(), "NOT_DICOM");
}

#[test]
fn compressed_and_big_endian_are_unsupported() {
    let mut f = signed_fixture();
    f.encoding = FixtureEncoding::JpegBaseline;
    let bytes = f.to_bytes();
    assert_eq!(
        parse_dicom_file(&bytes).unwrap_err().code(),
        "UNSUPPORTED_TRANSFER_SYNTAX"
    );
    // The header alone is still readable, so the series can be reported.
    assert_eq!(read_header(&bytes).unwrap().series_uid, "1.2.3.4");

    let mut f = signed_fixture();
    f.transfer_syntax_override = Some(EXPLICIT_VR_BIG_ENDIAN.into());
    assert_eq!(
        parse_dicom_file(&f.to_bytes()).unwrap_err().code(),
        "UNSUPPORTED_TRANSFER_SYNTAX"
    );
}

#[test]
fn truncation_is_malformed() {
    let bytes = signed_fixture().to_bytes();
    let short = &bytes[..bytes.len() - 2];
    assert_eq!(parse_dicom_file(short).unwrap_err().code(), "MALFORMED");
    let cut = &bytes[..200];
    assert_eq!(parse_dicom_file(cut).unwrap_err().code(), "MALFORMED");
}

#[test]
fn short_pixel_payload_is_malformed() {
    let mut f = signed_fixture();
    f.pixels.truncate(30);
    assert_eq!(
        parse_dicom_file(&f.to_bytes()).unwrap_err().code(),
        "MALFORMED"
    );
}

#[test]
fn defaults_apply_when_tags_absent() {
    let mut f = signed_fixture();
    f.rescale_slope = None;
    f.rescale_intercept = None;
    f.patient_id = None;
    f.position = None;
    f.orientation = None;
    let (h, _) = parse_dicom_file(&f.to_bytes()).unwrap();
    assert_eq!((h.rescale_slope, h.rescale_intercept), (1.0, 0.0));
    assert_eq!(h.patient_id, "");
    assert_eq!(h.image_position_patient, None);
    assert_eq!(h.image_orientation_patient, None);
}

#[test]
fn non_unit_orientation_is_malformed() {
    let mut f = signed_fixture();
    f.orientation = Some([1.0, 0.1, 0.0, 0.0, 1.0, 0.0]);
    assert_eq!(
        parse_dicom_file(&f.to_bytes()).unwrap_err().code(),
        "MALFORMED"
    );
}

#[test]
fn rescale_examples() {
    assert_eq!(hu_convert(&[0], 1.0, -1024.0), [-1024.0]);
    assert_eq!(hu_convert(&[1024], 1.0, -1024.0), [0.0]);
    assert_eq!(hu_convert(&[100], 2.0, -1000.0), [-800.0]);
}

fn pixel_strategy() -> impl Strategy<Value = (u16, u16, u16, bool, Vec<i32>)> {
    (
        1u16..6,
        1u16..6,
        prop_oneof![Just(8u16), Just(16u16)],
        any::<bool>(),
    )
        .prop_flat_map(|(rows, cols, bits, signed)| {
            let (lo, hi) = match (bits, signed) {
                (8, false) => (0, 255),
                (8, true) => (-128, 127),
                (_, false) => (0, 65535),
                (_, true) => (-32768, 32767),
            };
            let n = rows as usize * cols as usize;
            (
                Just(rows),
                Just(cols),
                Just(bits),
                Just(signed),
                proptest::collection::vec(lo..=hi, n),
            )
        })
}

fn encode(values: &[i32], bits: u16) -> Vec<u8> {
    if bits == 8 {
        values.iter().map(|&v| v as u8).collect()
    } else {
        values
            .iter()
            .flat_map(|&v| (v as u16).to_le_bytes())
            .collect()
    }
}

proptest! {
    #[test]
    fn header_round_trip(
        (rows, cols, bits, signed, values) in pixel_strategy(),
        implicit in any::<bool>(),
        with_sequence in any::<bool>(),
        slope in prop_oneof![Just(1.0), Just(2.0), Just(0.5), 0.01f64..4.0],
        intercept in prop_oneof![Just(-1024.0), Just(0.0), -2048.0f64..100.0],
        pos in proptest::array::uniform3(-500.0f64..500.0),
        instance in proptest::option::of(-5i32..5000),
        patient in "[A-Za-z0-9]{0,12}",
    ) {
        let mut f = SliceFixture::ct("1.2.840.99", "1.2.840.99.7", rows, cols, &vec![0; rows as usize * cols as usize]);
        f.encoding = if implicit { FixtureEncoding::ImplicitLittle } else { FixtureEncoding::ExplicitLittle };
        f.with_sequence = with_sequence;
        f.bits_allocated = bits;
        f.pixel_representation = signed as u16;
        f.pixels = encode(&values, bits);
        f.rescale_slope = Some(slope);
        f.rescale_intercept = Some(intercept);
        f.position = Some(pos);
        f.instance_number = instance;
        f.patient_id = Some(patient.clone());

        let bytes = f.to_bytes();
        let (h, payload) = parse_dicom_file(&bytes).unwrap();
        prop_assert_eq!((h.rows, h.cols, h.bits_allocated), (rows, cols, bits));
        prop_assert_eq!(h.pixel_representation == PixelRepresentation::Signed, signed);
        prop_assert_eq!(h.rescale_slope, slope);
        prop_assert_eq!(h.rescale_intercept, intercept);
        prop_assert_eq!(h.image_position_patient, Some(pos));
        prop_assert_eq!(h.instance_number, instance);
        prop_assert_eq!(&h.patient_id, &patient);
        prop_assert_eq!(payload.len(), rows as usize * cols as usize * bits as usize / 8);

        let raw = decode_raw(&h, payload);
        prop_assert_eq!(&raw, &values);
        let hu = hu_convert(&raw, slope, intercept);
        for (v, x) in values.iter().zip(&hu) {
            prop_assert_eq!(*x, (slope * *v as f64 + intercept) as f32);
        }
    }

    #[test]
    fn garbage_never_panics(bytes in proptest::collection::vec(any::<u8>(), 0..600), tail in proptest::collection::vec(any::<u8>(), 0..200)) {
        let _ = parse_dicom_file(&bytes);
        let mut framed = vec![0u8; 128];
        framed.extend_from_slice(b"DICM");
        framed.extend_from_slice(&tail);
        let _ = parse_dicom_file(&framed);
    }
}

fn slice_file(z: Option<f64>, instance: Option<i32>, sop: &str) -> ParsedSlice {
    let mut f = SliceFixture::ct("9.9", sop, 2, 2, &[1024, 1025, 1026, 1027]);
    f.position = z.map(|z| [0.0, 0.0, z]);
    f.instance_number = instance;
    ParsedSlice::from_bytes(&f.to_bytes(), sop).unwrap()
}

#[test]
fn assembly_sorts_by_z_then_instance() {
    let s = build_sorted_series(
        "9.9",
        "P",
        vec![
            slice_file(Some(30.0), Some(1), "a"),
            slice_file(Some(10.0), Some(2), "b"),
            slice_file(Some(20.0), Some(3), "c"),
        ],
    )
    .unwrap();
    assert_eq!(
        s.slices.iter().map(|x| x.z).collect::<Vec<_>>(),
        [10.0, 20.0, 30.0]
    );
    assert_eq!(s.orientation, Orientation::Axial);
    assert_eq!(s.slices[0].data, [0.0, 1.0, 2.0, 3.0]);

    let tie = build_sorted_series(
        "9.9",
        "P",
        vec![
            slice_file(Some(5.0), Some(7), "x"),
            slice_file(Some(5.0), Some(3), "y"),
        ],
    )
    .unwrap();
    assert_eq!(tie.slices[0].instance_number, Some(3));
}

#[test]
fn assembly_geometry_errors() {
    let err = build_sorted_series("9.9", "P", vec![slice_file(None, None, "a")]).unwrap_err();
    assert_eq!(err.code(), "MISSING_GEOMETRY");

    let by_instance = build_sorted_series(
        "9.9",
        "P",
        vec![
            slice_file(None, Some(2), "a"),
            slice_file(None, Some(1), "b"),
        ],
    )
    .unwrap();
    assert_eq!(by_instance.slices[0].instance_number, Some(1));

    let mut big = SliceFixture::ct("9.9", "big", 3, 2, &[0; 6]);
    big.position = Some([0.0, 0.0, 1.0]);
    let big = ParsedSlice::from_bytes(&big.to_bytes(), "big").unwrap();
    let err = build_sorted_series("9.9", "P", vec![slice_file(Some(0.0), Some(1), "a"), big])
        .unwrap_err();
    assert_eq!(err.code(), "MALFORMED_SERIES");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn assembly_ignores_input_order(
        zs in proptest::collection::vec((-20i32..20, proptest::option::of(0i32..4)), 1..12),
        seed in any::<u64>(),
    ) {
        let slices: Vec<ParsedSlice> = zs
            .iter()
            .enumerate()
            .map(|(i, &(z, inst))| slice_file(Some(z as f64), inst, &format!("1.{i}")))
            .collect();
        let mut shuffled = slices.clone();
        shuffled.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let a = build_sorted_series("9.9", "P", slices).unwrap();
        let b = build_sorted_series("9.9", "P", shuffled).unwrap();
        prop_assert_eq!(&a, &b);
        prop_assert!(a.slices.windows(2).all(|w| w[0].z <= w[1].z));
    }
}

fn write(dir: &Path, name: &str, bytes: &[u8]) {
    fs::write(dir.join(name), bytes).unwrap();
}

#[test]
fn scan_groups_and_counts() {
    let tmp = tempfile::tempdir().unwrap();
    let root = tmp.path();
    assert_eq!(scan_directory(root).unwrap().records.len(), 0);
    assert_eq!(scan_directory(root).unwrap().skipped, 0);

    fs::create_dir(root.join("nested")).unwrap();
    for i in 0..3 {
        let mut f = SliceFixture::ct("5.5", &format!("5.5.{i}"), 2, 2, &[0; 4]);
        f.patient_id = Some("B".into());
        write(&root.join("nested"), &format!("s{i}.dcm"), &f.to_bytes());
    }
    let mut other = SliceFixture::ct("4.4", "4.4.1", 2, 2, &[0; 4]);
    other.patient_id = Some("A".into());
    write(root, "other.dcm", &other.to_bytes());
    write(root, "notes.txt", b"not an image");

    let scan = scan_directory(root).unwrap();
    assert_eq!(scan.records.len(), 2);
    assert_eq!(scan.skipped, 1);
    assert_eq!(scan.examined, 5);
    assert_eq!(scan.records[0].patient_id, "A");
    assert_eq!(scan.records[1].series_uid, "5.5");
    assert_eq!(scan.records[1].files.len(), 3);
    let total: usize = scan.records.iter().map(|r| r.files.len()).sum();
    assert_eq!(total + scan.skipped, scan.examined);

    let series = assemble_series(&scan.records[1]).unwrap();
    assert_eq!(series.len(), 3);

    assert_eq!(
        scan_directory(&root.join("missing")).unwrap_err().code(),
        "IO_ERROR"
    );
}

#[test]
fn unreadable_pixels_reject_the_series() {
    let tmp = tempfile::tempdir().unwrap();
    let good = SliceFixture::ct("6.6", "6.6.1", 2, 2, &[0; 4]);
    write(tmp.path(), "a.dcm", &good.to_bytes());
    let mut bad = SliceFixture::ct("6.6", "6.6.2", 2, 2, &[0; 4]);
    bad.pixels.truncate(4);
    write(tmp.path(), "b.dcm", &bad.to_bytes());
    let scan = scan_directory(tmp.path()).unwrap();
    assert_eq!(scan.records[0].files.len(), 2);
    assert_eq!(
        assemble_series(&scan.records[0]).unwrap_err().code(),
        "MALFORMED_SERIES"
    );

    let mut jpeg = SliceFixture::ct("7.7", "7.7.1", 2, 2, &[0; 4]);
    jpeg.encoding = FixtureEncoding::JpegBaseline;
    write(tmp.path(), "c.dcm", &jpeg.to_bytes());
    let scan = scan_directory(tmp.path()).unwrap();
    let rec = scan.records.iter().find(|r| r.series_uid == "7.7").unwrap();
    assert_eq!(
        assemble_series(rec).unwrap_err().code(),
        "UNSUPPORTED_TRANSFER_SYNTAX"
    );
}

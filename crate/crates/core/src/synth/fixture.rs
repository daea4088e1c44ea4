//! Byte-level DICOM Part-10 writer for test fixtures and phantoms.
//!
//! Shares no code with the parser so round trips exercise both sides.

use crate::dicom::{EXPLICIT_VR_LITTLE_ENDIAN, IMPLICIT_VR_LITTLE_ENDIAN, JPEG_BASELINE};

const CT_IMAGE_STORAGE: &str = "1.2.840.10008.5.1.4.1.1.2";

/// How a fixture file encodes its data set.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FixtureEncoding {
    ExplicitLittle,
    ImplicitLittle,
    /// Explicit VR with the pixels wrapped as a single JPEG fragment.
    JpegBaseline,
}

impl FixtureEncoding {
    pub fn transfer_syntax(self) -> &'static str {
        match self {
            FixtureEncoding::ExplicitLittle => EXPLICIT_VR_LITTLE_ENDIAN,
            FixtureEncoding::ImplicitLittle => IMPLICIT_VR_LITTLE_ENDIAN,
            FixtureEncoding::JpegBaseline => JPEG_BASELINE,
        }
    }
}

/// Everything a fixture file may carry. `None` fields are omitted.
#[derive(Clone, Debug, PartialEq)]
pub struct SliceFixture {
    pub encoding: FixtureEncoding,
    /// Overrides the transfer syntax UID written to the file meta.
    pub transfer_syntax_override: Option<String>,
    pub sop_uid: String,
    pub series_uid: Option<String>,
    pub patient_id: Option<String>,
    pub rows: u16,
    pub cols: u16,
    pub bits_allocated: u16,
    pub pixel_representation: u16,
    pub rescale_slope: Option<f64>,
    pub rescale_intercept: Option<f64>,
    pub position: Option<[f64; 3]>,
    pub orientation: Option<[f64; 6]>,
    pub instance_number: Option<i32>,
    /// Native pixel payload, little-endian.
    pub pixels: Vec<u8>,
    /// Adds an undefined-length sequence before the image attributes.
    pub with_sequence: bool,
}

impl SliceFixture {
    /// A 16-bit unsigned axial slice with slope 1 and intercept -1024.
    pub fn ct(series_uid: &str, sop_uid: &str, rows: u16, cols: u16, raw: &[u16]) -> Self {
        assert_eq!(raw.len(), rows as usize * cols as usize);
        SliceFixture {
            encoding: FixtureEncoding::ExplicitLittle,
            transfer_syntax_override: None,
            sop_uid: sop_uid.to_string(),
            series_uid: Some(series_uid.to_string()),
            patient_id: Some("PHANTOM".to_string()),
            rows,
            cols,
            bits_allocated: 16,
            pixel_representation: 0,
            rescale_slope: Some(1.0),
            rescale_intercept: Some(-1024.0),
            position: Some([0.0, 0.0, 0.0]),
            orientation: Some([1.0, 0.0, 0.0, 0.0, 1.0, 0.0]),
            instance_number: Some(1),
            pixels: raw.iter().flat_map(|v| v.to_le_bytes()).collect(),
            with_sequence: false,
        }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let ts = self
            .transfer_syntax_override
            .clone()
            .unwrap_or_else(|| self.encoding.transfer_syntax().to_string());
        let mut out = vec![0u8; 128];
        out.extend_from_slice(b"DICM");

        let mut meta = Vec::new();
        put(&mut meta, true, (0x0002, 0x0001), b"OB", &[0, 1]);
        put(
            &mut meta,
            true,
            (0x0002, 0x0002),
            b"UI",
            &uid(CT_IMAGE_STORAGE),
        );
        put(
            &mut meta,
            true,
            (0x0002, 0x0003),
            b"UI",
            &uid(&self.sop_uid),
        );
        put(&mut meta, true, (0x0002, 0x0010), b"UI", &uid(&ts));
        put(
            &mut out,
            true,
            (0x0002, 0x0000),
            b"UL",
            &(meta.len() as u32).to_le_bytes(),
        );
        out.extend_from_slice(&meta);

        let ex = self.encoding != FixtureEncoding::ImplicitLittle;
        let ds = &mut out;
        put(ds, ex, (0x0008, 0x0016), b"UI", &uid(CT_IMAGE_STORAGE));
        put(ds, ex, (0x0008, 0x0018), b"UI", &uid(&self.sop_uid));
        if self.with_sequence {
            put_sequence(ds, ex);
        }
        if let Some(p) = &self.patient_id {
            put(ds, ex, (0x0010, 0x0020), b"LO", &text(p));
        }
        if let Some(s) = &self.series_uid {
            put(ds, ex, (0x0020, 0x000E), b"UI", &uid(s));
        }
        if let Some(n) = self.instance_number {
            put(ds, ex, (0x0020, 0x0013), b"IS", &text(&n.to_string()));
        }
        if let Some(p) = self.position {
            put(ds, ex, (0x0020, 0x0032), b"DS", &decimals(&p));
        }
        if let Some(o) = self.orientation {
            put(ds, ex, (0x0020, 0x0037), b"DS", &decimals(&o));
        }
        put(ds, ex, (0x0028, 0x0010), b"US", &self.rows.to_le_bytes());
        put(ds, ex, (0x0028, 0x0011), b"US", &self.cols.to_le_bytes());
        put(
            ds,
            ex,
            (0x0028, 0x0100),
            b"US",
            &self.bits_allocated.to_le_bytes(),
        );
        put(
            ds,
            ex,
            (0x0028, 0x0103),
            b"US",
            &self.pixel_representation.to_le_bytes(),
        );
        if let Some(v) = self.rescale_intercept {
            put(ds, ex, (0x0028, 0x1052), b"DS", &decimals(&[v]));
        }
        if let Some(v) = self.rescale_slope {
            put(ds, ex, (0x0028, 0x1053), b"DS", &decimals(&[v]));
        }

        if self.encoding == FixtureEncoding::JpegBaseline {
            put_encapsulated(ds, &[0xFF, 0xD8, 0xFF, 0xE0, 0x00, 0x10, 0xFF, 0xD9]);
        } else {
            let vr = if self.bits_allocated == 8 {
                b"OB"
            } else {
                b"OW"
            };
            let mut px = self.pixels.clone();
            if px.len() % 2 == 1 {
                px.push(0);
            }
            put(ds, ex, (0x7FE0, 0x0010), vr, &px);
        }
        out
    }
}

fn is_long(vr: &[u8; 2]) -> bool {
    matches!(vr, b"OB" | b"OW" | b"SQ" | b"UN" | b"UT")
}

fn put_tag(out: &mut Vec<u8>, (g, e): (u16, u16)) {
    out.extend_from_slice(&g.to_le_bytes());
    out.extend_from_slice(&e.to_le_bytes());
}

fn put_header(out: &mut Vec<u8>, explicit: bool, tag: (u16, u16), vr: &[u8; 2], len: u32) {
    put_tag(out, tag);
    if !explicit {
        out.extend_from_slice(&len.to_le_bytes());
    } else if is_long(vr) {
        out.extend_from_slice(vr);
        out.extend_from_slice(&[0, 0]);
        out.extend_from_slice(&len.to_le_bytes());
    } else {
        out.extend_from_slice(vr);
        out.extend_from_slice(&(len as u16).to_le_bytes());
    }
}

fn put(out: &mut Vec<u8>, explicit: bool, tag: (u16, u16), vr: &[u8; 2], value: &[u8]) {
    assert!(
        value.len().is_multiple_of(2),
        "odd-length value for {tag:04X?}"
    );
    put_header(out, explicit, tag, vr, value.len() as u32);
    out.extend_from_slice(value);
}

/// ReferencedImageSequence with one undefined-length item.
fn put_sequence(out: &mut Vec<u8>, explicit: bool) {
    put_header(out, explicit, (0x0008, 0x1140), b"SQ", u32::MAX);
    put_tag(out, (0xFFFE, 0xE000));
    out.extend_from_slice(&u32::MAX.to_le_bytes());
    put(
        out,
        explicit,
        (0x0008, 0x1150),
        b"UI",
        &uid(CT_IMAGE_STORAGE),
    );
    put(out, explicit, (0x0008, 0x1155), b"UI", &uid("1.2.3.4.5"));
    put_tag(out, (0xFFFE, 0xE00D));
    out.extend_from_slice(&0u32.to_le_bytes());
    put_tag(out, (0xFFFE, 0xE0DD));
    out.extend_from_slice(&0u32.to_le_bytes());
}

fn put_encapsulated(out: &mut Vec<u8>, fragment: &[u8]) {
    put_header(out, true, (0x7FE0, 0x0010), b"OB", u32::MAX);
    put_tag(out, (0xFFFE, 0xE000));
    out.extend_from_slice(&0u32.to_le_bytes());
    put_tag(out, (0xFFFE, 0xE000));
    out.extend_from_slice(&(fragment.len() as u32).to_le_bytes());
    out.extend_from_slice(fragment);
    put_tag(out, (0xFFFE, 0xE0DD));
    out.extend_from_slice(&0u32.to_le_bytes());
}

fn uid(s: &str) -> Vec<u8> {
    let mut v = s.as_bytes().to_vec();
    if v.len() % 2 == 1 {
        v.push(0);
    }
    v
}

fn text(s: &str) -> Vec<u8> {
    let mut v = s.as_bytes().to_vec();
    if v.len() % 2 == 1 {
        v.push(b' ');
    }
    v
}

fn decimals(values: &[f64]) -> Vec<u8> {
    let joined: Vec<String> = values.iter().map(|v| format!("{v}")).collect();
    text(&joined.join("\\"))
}

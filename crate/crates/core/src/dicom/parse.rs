use super::{
    is_supported_transfer_syntax, tags, DicomHeader, PixelRepresentation, Tag,
    DEFLATED_EXPLICIT_VR_LITTLE_ENDIAN, EXPLICIT_VR_BIG_ENDIAN, IMPLICIT_VR_LITTLE_ENDIAN,
};
use crate::error::{Error, Result};

const PREAMBLE_LEN: usize = 128;
const MAGIC: &[u8; 4] = b"DICM";
const UNDEFINED_LENGTH: u32 = 0xFFFF_FFFF;
const MAX_NESTING: usize = 32;

const ITEM: Tag = Tag(0xFFFE, 0xE000);
const ITEM_DELIMITATION: Tag = Tag(0xFFFE, 0xE00D);
const SEQUENCE_DELIMITATION: Tag = Tag(0xFFFE, 0xE0DD);

/// VRs whose explicit encoding carries two reserved bytes and a 32-bit length.
const LONG_VRS: [&[u8; 2]; 13] = [
    b"OB", b"OD", b"OF", b"OL", b"OV", b"OW", b"SQ", b"SV", b"UC", b"UN", b"UR", b"UT", b"UV",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum PixelData {
    Native { offset: usize, len: usize },
    Encapsulated,
    Absent,
}

fn malformed(msg: impl Into<String>) -> Error {
    Error::Malformed(msg.into())
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn new(buf: &'a [u8], pos: usize) -> Self {
        Reader { buf, pos }
    }

    fn remaining(&self) -> usize {
        self.buf.len() - self.pos
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.remaining() < n {
            return Err(malformed(format!(
                "truncated: need {n} bytes at offset {}, {} left",
                self.pos,
                self.remaining()
            )));
        }
        let out = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(out)
    }

    fn u16(&mut self) -> Result<u16> {
        let b = self.take(2)?;
        Ok(u16::from_le_bytes([b[0], b[1]]))
    }

    fn u32(&mut self) -> Result<u32> {
        let b = self.take(4)?;
        Ok(u32::from_le_bytes([b[0], b[1], b[2], b[3]]))
    }

    fn tag(&mut self) -> Result<Tag> {
        Ok(Tag(self.u16()?, self.u16()?))
    }

    fn peek_tag(&self) -> Option<Tag> {
        let b = self.buf.get(self.pos..self.pos + 4)?;
        Some(Tag(
            u16::from_le_bytes([b[0], b[1]]),
            u16::from_le_bytes([b[2], b[3]]),
        ))
    }
}

#[derive(Debug)]
struct ElementHeader {
    tag: Tag,
    vr: Option<[u8; 2]>,
    len: u32,
}

fn read_element_header(r: &mut Reader<'_>, explicit: bool) -> Result<ElementHeader> {
    let tag = r.tag()?;
    // Item and delimiter tags never carry a VR.
    if !explicit || tag.0 == 0xFFFE {
        let len = r.u32()?;
        return Ok(ElementHeader { tag, vr: None, len });
    }
    let vr_bytes = r.take(2)?;
    let vr = [vr_bytes[0], vr_bytes[1]];
    if !vr.iter().all(u8::is_ascii_uppercase) {
        return Err(malformed(format!(
            "invalid VR {:02X}{:02X} for ({:04X},{:04X})",
            vr[0], vr[1], tag.0, tag.1
        )));
    }
    let len = if LONG_VRS.iter().any(|v| **v == vr) {
        r.take(2)?;
        r.u32()?
    } else {
        r.u16()? as u32
    };
    Ok(ElementHeader {
        tag,
        vr: Some(vr),
        len,
    })
}

/// Skips the items of an undefined-length sequence up to and including its
/// sequence delimitation item.
fn skip_sequence(r: &mut Reader<'_>, explicit: bool, depth: usize) -> Result<()> {
    if depth > MAX_NESTING {
        return Err(malformed("sequence nesting too deep"));
    }
    loop {
        let tag = r.tag()?;
        let len = r.u32()?;
        match tag {
            SEQUENCE_DELIMITATION => return Ok(()),
            ITEM if len == UNDEFINED_LENGTH => skip_item(r, explicit, depth + 1)?,
            ITEM => {
                r.take(len as usize)?;
            }
            other => {
                return Err(malformed(format!(
                    "unexpected ({:04X},{:04X}) inside sequence",
                    other.0, other.1
                )))
            }
        }
    }
}

fn skip_item(r: &mut Reader<'_>, explicit: bool, depth: usize) -> Result<()> {
    loop {
        if r.peek_tag() == Some(ITEM_DELIMITATION) {
            r.tag()?;
            r.u32()?;
            return Ok(());
        }
        let h = read_element_header(r, explicit)?;
        if h.len == UNDEFINED_LENGTH {
            // An undefined-length UN is an implicit-VR encoded sequence.
            let nested_explicit = explicit && h.vr != Some(*b"UN");
            skip_sequence(r, nested_explicit, depth + 1)?;
        } else {
            r.take(h.len as usize)?;
        }
    }
}

fn text(value: &[u8]) -> String {
    String::from_utf8_lossy(value)
        .trim_matches(|c: char| c == '\0' || c == ' ')
        .to_string()
}

fn us(tag: Tag, value: &[u8]) -> Result<u16> {
    if value.len() < 2 {
        return Err(malformed(format!(
            "({:04X},{:04X}) too short for US",
            tag.0, tag.1
        )));
    }
    Ok(u16::from_le_bytes([value[0], value[1]]))
}

fn decimal_strings<const N: usize>(tag: Tag, value: &[u8]) -> Result<[f64; N]> {
    let s = text(value);
    let parts: Vec<&str> = s.split('\\').collect();
    if parts.len() != N {
        return Err(malformed(format!(
            "({:04X},{:04X}) expected {N} values, found {}",
            tag.0,
            tag.1,
            parts.len()
        )));
    }
    let mut out = [0.0; N];
    for (slot, part) in out.iter_mut().zip(parts) {
        *slot = parse_ds(tag, part)?;
    }
    Ok(out)
}

fn parse_ds(tag: Tag, s: &str) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| malformed(format!("({:04X},{:04X}) bad decimal {s:?}", tag.0, tag.1)))
}

#[derive(Default)]
struct RawFields<'a> {
    transfer_syntax: Option<String>,
    sop_uid: Option<&'a [u8]>,
    patient_id: Option<&'a [u8]>,
    series_uid: Option<&'a [u8]>,
    instance_number: Option<&'a [u8]>,
    position: Option<&'a [u8]>,
    orientation: Option<&'a [u8]>,
    rows: Option<&'a [u8]>,
    cols: Option<&'a [u8]>,
    bits_allocated: Option<&'a [u8]>,
    pixel_representation: Option<&'a [u8]>,
    intercept: Option<&'a [u8]>,
    slope: Option<&'a [u8]>,
}

impl<'a> RawFields<'a> {
    fn record(&mut self, tag: Tag, value: &'a [u8]) {
        let slot = match tag {
            tags::SOP_INSTANCE_UID => &mut self.sop_uid,
            tags::PATIENT_ID => &mut self.patient_id,
            tags::SERIES_INSTANCE_UID => &mut self.series_uid,
            tags::INSTANCE_NUMBER => &mut self.instance_number,
            tags::IMAGE_POSITION_PATIENT => &mut self.position,
            tags::IMAGE_ORIENTATION_PATIENT => &mut self.orientation,
            tags::ROWS => &mut self.rows,
            tags::COLUMNS => &mut self.cols,
            tags::BITS_ALLOCATED => &mut self.bits_allocated,
            tags::PIXEL_REPRESENTATION => &mut self.pixel_representation,
            tags::RESCALE_INTERCEPT => &mut self.intercept,
            tags::RESCALE_SLOPE => &mut self.slope,
            _ => return,
        };
        *slot = Some(value);
    }

    fn into_header(self) -> Result<DicomHeader> {
        let transfer_syntax_uid = self
            .transfer_syntax
            .ok_or_else(|| malformed("file meta lacks TransferSyntaxUID"))?;
        let series_uid = self
            .series_uid
            .map(text)
            .filter(|s| !s.is_empty())
            .ok_or_else(|| malformed("missing SeriesInstanceUID"))?;
        let rows = us(
            tags::ROWS,
            self.rows.ok_or_else(|| malformed("missing Rows"))?,
        )?;
        let cols = us(
            tags::COLUMNS,
            self.cols.ok_or_else(|| malformed("missing Columns"))?,
        )?;
        if rows == 0 || cols == 0 {
            return Err(malformed(format!("empty matrix {rows}x{cols}")));
        }
        let bits_allocated = us(
            tags::BITS_ALLOCATED,
            self.bits_allocated
                .ok_or_else(|| malformed("missing BitsAllocated"))?,
        )?;
        if bits_allocated != 8 && bits_allocated != 16 {
            return Err(malformed(format!("BitsAllocated {bits_allocated}")));
        }
        let pixel_representation = match self.pixel_representation {
            None => PixelRepresentation::Unsigned,
            Some(v) => match us(tags::PIXEL_REPRESENTATION, v)? {
                0 => PixelRepresentation::Unsigned,
                1 => PixelRepresentation::Signed,
                other => return Err(malformed(format!("PixelRepresentation {other}"))),
            },
        };
        let single_ds = |tag: Tag, v: Option<&[u8]>, default: f64| -> Result<f64> {
            match v.map(text) {
                Some(s) if !s.is_empty() => parse_ds(tag, s.split('\\').next().unwrap_or("")),
                _ => Ok(default),
            }
        };
        let rescale_slope = single_ds(tags::RESCALE_SLOPE, self.slope, 1.0)?;
        let rescale_intercept = single_ds(tags::RESCALE_INTERCEPT, self.intercept, 0.0)?;

        let image_position_patient = self
            .position
            .filter(|v| !text(v).is_empty())
            .map(|v| decimal_strings::<3>(tags::IMAGE_POSITION_PATIENT, v))
            .transpose()?;
        let image_orientation_patient = self
            .orientation
            .filter(|v| !text(v).is_empty())
            .map(|v| decimal_strings::<6>(tags::IMAGE_ORIENTATION_PATIENT, v))
            .transpose()?;
        if let Some(o) = image_orientation_patient {
            for cosines in [&o[..3], &o[3..]] {
                let norm = cosines.iter().map(|c| c * c).sum::<f64>().sqrt();
                if (norm - 1.0).abs() > 1e-3 {
                    return Err(malformed(format!(
                        "orientation cosines not unit length (norm {norm})"
                    )));
                }
            }
        }
        let instance_number = match self.instance_number.map(text) {
            Some(s) if !s.is_empty() => Some(
                s.parse::<i32>()
                    .map_err(|_| malformed(format!("bad InstanceNumber {s:?}")))?,
            ),
            _ => None,
        };

        Ok(DicomHeader {
            series_uid,
            sop_uid: self.sop_uid.map(text).unwrap_or_default(),
            patient_id: self.patient_id.map(text).unwrap_or_default(),
            transfer_syntax_uid,
            rows,
            cols,
            bits_allocated,
            pixel_representation,
            rescale_slope,
            rescale_intercept,
            image_position_patient,
            image_orientation_patient,
            instance_number,
        })
    }
}

fn parse(bytes: &[u8]) -> Result<(DicomHeader, PixelData)> {
    if bytes.len() < PREAMBLE_LEN + MAGIC.len() || &bytes[PREAMBLE_LEN..PREAMBLE_LEN + 4] != MAGIC {
        return Err(Error::NotDicom);
    }
    let mut r = Reader::new(bytes, PREAMBLE_LEN + MAGIC.len());
    let mut fields = RawFields::default();

    // File meta information: always explicit VR little endian, group 0002.
    while r.peek_tag().map(|t| t.0) == Some(0x0002) {
        let h = read_element_header(&mut r, true)?;
        if h.len == UNDEFINED_LENGTH {
            return Err(malformed("undefined length in file meta"));
        }
        let value = r.take(h.len as usize)?;
        if h.tag == tags::TRANSFER_SYNTAX_UID {
            fields.transfer_syntax = Some(text(value));
        }
    }

    let ts = fields
        .transfer_syntax
        .clone()
        .ok_or_else(|| malformed("file meta lacks TransferSyntaxUID"))?;
    if ts == EXPLICIT_VR_BIG_ENDIAN || ts == DEFLATED_EXPLICIT_VR_LITTLE_ENDIAN {
        return Err(Error::UnsupportedTransferSyntax(ts));
    }
    // Every encapsulated syntax shares the explicit little-endian dataset encoding.
    let explicit = ts != IMPLICIT_VR_LITTLE_ENDIAN;

    let mut pixels = PixelData::Absent;
    while r.remaining() > 0 {
        let h = read_element_header(&mut r, explicit)?;
        if h.tag == tags::PIXEL_DATA {
            pixels = if h.len == UNDEFINED_LENGTH {
                PixelData::Encapsulated
            } else {
                let offset = r.pos;
                let len = (h.len as usize).min(r.remaining());
                PixelData::Native { offset, len }
            };
            break;
        }
        if h.len == UNDEFINED_LENGTH {
            let nested_explicit = explicit && h.vr != Some(*b"UN");
            skip_sequence(&mut r, nested_explicit, 0)?;
            continue;
        }
        let value = r.take(h.len as usize)?;
        fields.record(h.tag, value);
    }

    Ok((fields.into_header()?, pixels))
}

/// Decodes the header of a Part-10 file without touching its pixel data.
///
/// Files in encapsulated (compressed) transfer syntaxes still yield a header
/// so they can be grouped and rejected at the series level.
pub fn read_header(bytes: &[u8]) -> Result<DicomHeader> {
    parse(bytes).map(|(header, _)| header)
}

/// Parses a Part-10 file and returns its header together with exactly
/// `rows * cols * bits_allocated / 8` bytes of native pixel data.
pub fn parse_dicom_file(bytes: &[u8]) -> Result<(DicomHeader, &[u8])> {
    let (header, pixels) = parse(bytes)?;
    if !is_supported_transfer_syntax(&header.transfer_syntax_uid) {
        return Err(Error::UnsupportedTransferSyntax(
            header.transfer_syntax_uid.clone(),
        ));
    }
    let expected = header.payload_len();
    match pixels {
        PixelData::Native { offset, len } if len >= expected => {
            Ok((header, &bytes[offset..offset + expected]))
        }
        PixelData::Native { len, .. } => Err(malformed(format!(
            "pixel data holds {len} bytes, header declares {expected}"
        ))),
        PixelData::Encapsulated => Err(malformed(
            "encapsulated pixel data in an uncompressed transfer syntax",
        )),
        PixelData::Absent => Err(malformed("no PixelData element")),
    }
}

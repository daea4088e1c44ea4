use super::{DicomHeader, PixelRepresentation};

/// Widens a native little-endian pixel payload to integers.
///
/// `payload` must hold exactly `header.payload_len()` bytes, as returned by
/// [`parse_dicom_file`](super::parse_dicom_file).
pub fn decode_raw(header: &DicomHeader, payload: &[u8]) -> Vec<i32> {
    debug_assert_eq!(payload.len(), header.payload_len());
    match (header.bits_allocated, header.pixel_representation) {
        (8, PixelRepresentation::Unsigned) => payload.iter().map(|&b| b as i32).collect(),
        (8, PixelRepresentation::Signed) => payload.iter().map(|&b| b as i8 as i32).collect(),
        (_, PixelRepresentation::Unsigned) => payload
            .chunks_exact(2)
            .map(|c| u16::from_le_bytes([c[0], c[1]]) as i32)
            .collect(),
        (_, PixelRepresentation::Signed) => payload
            .chunks_exact(2)
            .map(|c| i16::from_le_bytes([c[0], c[1]]) as i32)
            .collect(),
    }
}

/// Applies the modality rescale `slope * raw + intercept`.
///
/// The affine map is evaluated in double precision and rounded once to f32,
/// so the stored value is the correctly rounded HU for every 16-bit input.
pub fn hu_convert(raw: &[i32], slope: f64, intercept: f64) -> Vec<f32> {
    raw.iter()
        .map(|&v| (slope * v as f64 + intercept) as f32)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rescale_examples() {
        assert_eq!(hu_convert(&[0], 1.0, -1024.0), vec![-1024.0]);
        assert_eq!(hu_convert(&[1024], 1.0, -1024.0), vec![0.0]);
        assert_eq!(hu_convert(&[100], 2.0, -1000.0), vec![-800.0]);
    }

    #[test]
    fn decode_signed_and_unsigned() {
        let mut h = DicomHeader {
            series_uid: "1".into(),
            sop_uid: String::new(),
            patient_id: String::new(),
            transfer_syntax_uid: String::new(),
            rows: 1,
            cols: 2,
            bits_allocated: 16,
            pixel_representation: PixelRepresentation::Signed,
            rescale_slope: 1.0,
            rescale_intercept: 0.0,
            image_position_patient: None,
            image_orientation_patient: None,
            instance_number: None,
        };
        let bytes = [0x18, 0xFC, 0xFF, 0x7F];
        assert_eq!(decode_raw(&h, &bytes), vec![-1000, 32767]);
        h.pixel_representation = PixelRepresentation::Unsigned;
        assert_eq!(decode_raw(&h, &bytes), vec![64536, 32767]);
        h.bits_allocated = 8;
        h.cols = 4;
        assert_eq!(decode_raw(&h, &bytes), vec![0x18, 0xFC, 0xFF, 0x7F]);
        h.pixel_representation = PixelRepresentation::Signed;
        assert_eq!(decode_raw(&h, &bytes), vec![0x18, -4, -1, 0x7F]);
    }
}

//! Just enough of the NPY format for little-endian int16 volumes.

use std::fs::{self, File, OpenOptions};
use std::io::{self, BufWriter, Write};
use std::path::Path;

use super::LungBlock;
use crate::error::{Error, Result};

const MAGIC: &[u8; 6] = b"\x93NUMPY";
const ALIGN: usize = 64;

/// The complete v1.0 preamble: magic, version, length and padded dict.
pub fn npy_header(shape: &[usize]) -> Vec<u8> {
    let dims = match shape {
        [single] => format!("({single},)"),
        _ => format!(
            "({})",
            shape
                .iter()
                .map(usize::to_string)
                .collect::<Vec<_>>()
                .join(", ")
        ),
    };
    let mut dict = format!("{{'descr': '<i2', 'fortran_order': False, 'shape': {dims}, }}");
    // magic + version + u16 length = 10 bytes; pad the dict so the data
    // starts on a 64-byte boundary, newline last.
    let unpadded = MAGIC.len() + 2 + 2 + dict.len() + 1;
    let padding = (ALIGN - unpadded % ALIGN) % ALIGN;
    dict.extend(std::iter::repeat_n(' ', padding));
    dict.push('\n');

    let mut out = Vec::with_capacity(10 + dict.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&[1, 0]);
    out.extend_from_slice(&(dict.len() as u16).to_le_bytes());
    out.extend_from_slice(dict.as_bytes());
    out
}

/// Writes the block as a C-order `<i2` array. Without `overwrite`, an
/// existing file is reported as `DuplicateOutput` and left untouched.
pub fn write_npy_int16(block: &LungBlock, path: &Path, overwrite: bool) -> Result<()> {
    let file = if overwrite {
        File::create(path)
    } else {
        OpenOptions::new().write(true).create_new(true).open(path)
    };
    let file = file.map_err(|e| match e.kind() {
        io::ErrorKind::AlreadyExists => Error::DuplicateOutput(path.to_path_buf()),
        _ => Error::io(path, e),
    })?;

    let mut w = BufWriter::with_capacity(1 << 20, file);
    let write = |w: &mut BufWriter<File>| -> io::Result<()> {
        w.write_all(&npy_header(&block.shape()))?;
        let mut buf = Vec::with_capacity(block.rows * block.cols * 2);
        for d in 0..block.depth {
            buf.clear();
            for v in block.slice(d) {
                buf.extend_from_slice(&v.to_le_bytes());
            }
            w.write_all(&buf)?;
        }
        w.flush()
    };
    write(&mut w).map_err(|e| Error::io(path, e))
}

/// A decoded int16 array of any rank.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NpyVolume {
    pub shape: Vec<usize>,
    pub data: Vec<i16>,
}

fn bad(msg: impl Into<String>) -> Error {
    Error::Schema {
        line: 0,
        message: format!("npy: {}", msg.into()),
    }
}

fn dict_value<'a>(dict: &'a str, key: &str) -> Result<&'a str> {
    let needle = format!("'{key}':");
    let at = dict
        .find(&needle)
        .ok_or_else(|| bad(format!("header lacks {key}")))?;
    Ok(dict[at + needle.len()..].trim_start())
}

/// Reads a v1/v2 `<i2` C-order array.
pub fn read_npy_int16(path: &Path) -> Result<NpyVolume> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    if bytes.len() < 10 || &bytes[..6] != MAGIC {
        return Err(bad("missing magic"));
    }
    let (header_len, start) = match bytes[6] {
        1 => (u16::from_le_bytes([bytes[8], bytes[9]]) as usize, 10),
        2 | 3 if bytes.len() >= 12 => (
            u32::from_le_bytes([bytes[8], bytes[9], bytes[10], bytes[11]]) as usize,
            12,
        ),
        v => return Err(bad(format!("unsupported version {v}"))),
    };
    let dict = bytes
        .get(start..start + header_len)
        .ok_or_else(|| bad("truncated header"))?;
    let dict = std::str::from_utf8(dict).map_err(|_| bad("header is not text"))?;

    let descr = dict_value(dict, "descr")?;
    if !(descr.starts_with("'<i2'") || descr.starts_with("'i2'")) {
        return Err(bad(format!("descr {descr:?} is not little-endian int16")));
    }
    if !dict_value(dict, "fortran_order")?.starts_with("False") {
        return Err(bad("Fortran order not supported"));
    }
    let shape_text = dict_value(dict, "shape")?;
    let close = shape_text
        .find(')')
        .ok_or_else(|| bad("unterminated shape"))?;
    let shape = shape_text[1..close]
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<usize>()
                .map_err(|_| bad(format!("bad dimension {s:?}")))
        })
        .collect::<Result<Vec<_>>>()?;

    let count: usize = shape.iter().product();
    let payload = &bytes[start + header_len..];
    if payload.len() != count * 2 {
        return Err(bad(format!(
            "expected {} data bytes, found {}",
            count * 2,
            payload.len()
        )));
    }
    let data = payload
        .chunks_exact(2)
        .map(|c| i16::from_le_bytes([c[0], c[1]]))
        .collect();
    Ok(NpyVolume { shape, data })
}

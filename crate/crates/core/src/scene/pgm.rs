//! Binary PGM (P5, maxval 255).

use super::{LumaFrame, SceneError};

/// Encode as `P5\n<w> <h>\n255\n` followed by raw row-major pixels.
pub fn encode_frame_pgm(frame: &LumaFrame) -> Vec<u8> {
    let header = format!("P5\n{} {}\n255\n", frame.width, frame.height);
    let mut out = Vec::with_capacity(header.len() + frame.pixels.len());
    out.extend_from_slice(header.as_bytes());
    out.extend_from_slice(&frame.pixels);
    out
}

/// Decode a P5 file with maxval 255. Header tokens may be separated by any
/// whitespace and `#` comments; exactly one whitespace byte precedes the
/// raster.
pub fn decode_frame_pgm(bytes: &[u8]) -> Result<LumaFrame, SceneError> {
    let corrupt = |msg: &str| SceneError::Corrupt(format!("pgm: {msg}"));
    if bytes.len() < 2 || &bytes[..2] != b"P5" {
        return Err(corrupt("missing P5 magic"));
    }
    let mut pos = 2;
    let mut fields = [0usize; 3];
    for field in fields.iter_mut() {
        loop {
            match bytes.get(pos) {
                Some(b) if b.is_ascii_whitespace() => pos += 1,
                Some(b'#') => {
                    while bytes.get(pos).is_some_and(|b| *b != b'\n') {
                        pos += 1;
                    }
                }
                _ => break,
            }
        }
        let start = pos;
        while bytes.get(pos).is_some_and(u8::is_ascii_digit) {
            pos += 1;
        }
        if start == pos {
            return Err(corrupt("malformed header"));
        }
        *field = std::str::from_utf8(&bytes[start..pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| corrupt("header value too large"))?;
    }
    if !bytes.get(pos).is_some_and(u8::is_ascii_whitespace) {
        return Err(corrupt("malformed header"));
    }
    pos += 1;
    let [width, height, maxval] = fields;
    if maxval != 255 {
        return Err(corrupt("only maxval 255 is supported"));
    }
    let raster = &bytes[pos..];
    let expected = width
        .checked_mul(height)
        .ok_or_else(|| corrupt("dimensions overflow"))?;
    if raster.len() != expected {
        return Err(corrupt(&format!(
            "expected {expected} pixel bytes, found {}",
            raster.len()
        )));
    }
    LumaFrame::new(width, height, raster.to_vec())
}

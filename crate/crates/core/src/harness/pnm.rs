//! PGM/PPM frame files, binary (P5/P6) and ASCII (P2/P3), maxval 255.

use std::fs;
use std::io::Cursor;
use std::path::Path;

use image::codecs::pnm::{PnmDecoder, PnmEncoder, PnmSubtype, SampleEncoding};
use image::{ExtendedColorType, ImageDecoder};

use crate::imgcore::Frame;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PnmEncoding {
    Binary,
    Ascii,
}

/// Decodes a grey (P2/P5) or colour (P3/P6) image. `path` is only used in
/// error messages.
pub fn decode_pnm(bytes: &[u8], path: &Path) -> Result<Frame> {
    let fail = |m: String| Error::format(path, m);
    let decoder = PnmDecoder::new(Cursor::new(bytes)).map_err(|e| fail(e.to_string()))?;
    let header = decoder.header();
    let channels = match header.subtype() {
        PnmSubtype::Graymap(_) => 1,
        PnmSubtype::Pixmap(_) => 3,
        other => return Err(fail(format!("unsupported PNM type {other:?}"))),
    };
    if header.maximal_sample() != 255 {
        return Err(fail(format!("unsupported maxval {}", header.maximal_sample())));
    }
    let (w, h) = (header.width() as usize, header.height() as usize);
    let mut data = vec![0u8; decoder.total_bytes() as usize];
    decoder.read_image(&mut data).map_err(|e| fail(e.to_string()))?;
    Frame::new(w, h, channels, data).map_err(|e| fail(e.to_string()))
}

pub fn read_pnm(path: &Path) -> Result<Frame> {
    decode_pnm(&fs::read(path)?, path)
}

pub fn encode_pnm(frame: &Frame, encoding: PnmEncoding) -> Result<Vec<u8>> {
    let sample = match encoding {
        PnmEncoding::Binary => SampleEncoding::Binary,
        PnmEncoding::Ascii => SampleEncoding::Ascii,
    };
    let (subtype, color) = match frame.channels() {
        1 => (PnmSubtype::Graymap(sample), ExtendedColorType::L8),
        3 => (PnmSubtype::Pixmap(sample), ExtendedColorType::Rgb8),
        c => return Err(Error::InvalidFrame(format!("cannot write {c}-channel frame as PNM"))),
    };
    let mut out = Vec::new();
    PnmEncoder::new(&mut out)
        .with_subtype(subtype)
        .encode(frame.data(), frame.width() as u32, frame.height() as u32, color)
        .map_err(|e| Error::InvalidFrame(e.to_string()))?;
    Ok(out)
}

pub fn write_pnm(path: &Path, frame: &Frame, encoding: PnmEncoding) -> Result<()> {
    fs::write(path, encode_pnm(frame, encoding)?)?;
    Ok(())
}

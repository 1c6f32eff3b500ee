//! Binary NetPBM reader and writer (P4 bitmaps, P5 graymaps, P6 pixmaps).
//!
//! Only `maxval = 255` is accepted for P5/P6. P4 rows are packed MSB first and
//! padded to a whole byte. NetPBM stores 1 as black in a bitmap, so a
//! foreground (white) pixel is written as bit 0.

use std::fs;
use std::io;
use std::path::Path;

use thiserror::Error;

use crate::image::{BinaryImage, ColorImage, GrayImage};

#[derive(Debug, Error)]
pub enum PnmError {
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("malformed header: {0}")]
    MalformedHeader(String),
    #[error("unsupported maxval {0} (only 255 is supported)")]
    UnsupportedMaxval(u32),
    #[error("truncated payload: expected {expected} bytes, found {actual}")]
    Truncated { expected: usize, actual: usize },
}

impl PnmError {
    /// True when the failure came from the filesystem rather than file contents.
    pub fn is_io(&self) -> bool {
        matches!(self, PnmError::Io(_))
    }
}

/// A decoded NetPBM image.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PnmImage {
    Binary(BinaryImage),
    Gray(GrayImage),
    Color(ColorImage),
}

impl PnmImage {
    pub fn width(&self) -> usize {
        match self {
            PnmImage::Binary(b) => b.width(),
            PnmImage::Gray(g) => g.width(),
            PnmImage::Color(c) => c.width(),
        }
    }

    pub fn height(&self) -> usize {
        match self {
            PnmImage::Binary(b) => b.height(),
            PnmImage::Gray(g) => g.height(),
            PnmImage::Color(c) => c.height(),
        }
    }

    /// Grayscale view; bitmaps map foreground to 255.
    pub fn to_gray(&self) -> GrayImage {
        match self {
            PnmImage::Binary(b) => b.to_gray(),
            PnmImage::Gray(g) => g.clone(),
            PnmImage::Color(c) => c.to_grayscale(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Bitmap,
    Graymap,
    Pixmap,
}

struct Header {
    kind: Kind,
    width: usize,
    height: usize,
    data_offset: usize,
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Cursor<'_> {
    fn skip_whitespace_and_comments(&mut self) {
        while let Some(&b) = self.bytes.get(self.pos) {
            if b == b'#' {
                while let Some(&c) = self.bytes.get(self.pos) {
                    self.pos += 1;
                    if c == b'\n' || c == b'\r' {
                        break;
                    }
                }
            } else if b.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn number(&mut self, what: &str) -> Result<u32, PnmError> {
        self.skip_whitespace_and_comments();
        let start = self.pos;
        while self.bytes.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(PnmError::MalformedHeader(format!("expected {what}")));
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| PnmError::MalformedHeader(format!("{what} out of range")))
    }
}

fn parse_header(bytes: &[u8]) -> Result<Header, PnmError> {
    let kind = match bytes.get(..2) {
        Some(b"P4") => Kind::Bitmap,
        Some(b"P5") => Kind::Graymap,
        Some(b"P6") => Kind::Pixmap,
        Some(m) => {
            return Err(PnmError::MalformedHeader(format!(
                "unsupported magic {:?}",
                String::from_utf8_lossy(m)
            )))
        }
        None => return Err(PnmError::MalformedHeader("missing magic number".into())),
    };
    let mut cur = Cursor { bytes, pos: 2 };
    if !cur
        .bytes
        .get(cur.pos)
        .is_some_and(|b| b.is_ascii_whitespace() || *b == b'#')
    {
        return Err(PnmError::MalformedHeader(
            "missing whitespace after magic".into(),
        ));
    }
    let width = cur.number("width")? as usize;
    let height = cur.number("height")? as usize;
    if width == 0 || height == 0 {
        return Err(PnmError::MalformedHeader(format!(
            "zero dimension {width}x{height}"
        )));
    }
    if kind != Kind::Bitmap {
        let maxval = cur.number("maxval")?;
        if maxval != 255 {
            return Err(PnmError::UnsupportedMaxval(maxval));
        }
    }
    // Exactly one whitespace byte separates the header from the raster.
    match cur.bytes.get(cur.pos) {
        Some(b) if b.is_ascii_whitespace() => cur.pos += 1,
        Some(_) => {
            return Err(PnmError::MalformedHeader(
                "expected whitespace before raster".into(),
            ))
        }
        None => {
            return Err(PnmError::Truncated {
                expected: 1,
                actual: 0,
            })
        }
    }
    Ok(Header {
        kind,
        width,
        height,
        data_offset: cur.pos,
    })
}

fn bitmap_row_bytes(width: usize) -> usize {
    width.div_ceil(8)
}

/// Decodes a P4, P5 or P6 byte stream.
pub fn decode(bytes: &[u8]) -> Result<PnmImage, PnmError> {
    let header = parse_header(bytes)?;
    let (w, h) = (header.width, header.height);
    let expected = match header.kind {
        Kind::Bitmap => bitmap_row_bytes(w) * h,
        Kind::Graymap => w * h,
        Kind::Pixmap => 3 * w * h,
    };
    let payload = &bytes[header.data_offset..];
    if payload.len() < expected {
        return Err(PnmError::Truncated {
            expected,
            actual: payload.len(),
        });
    }
    let payload = &payload[..expected];
    let image = match header.kind {
        Kind::Bitmap => {
            let row_bytes = bitmap_row_bytes(w);
            let img = BinaryImage::from_fn(w, h, |x, y| {
                let byte = payload[y * row_bytes + x / 8];
                let black = (byte >> (7 - (x % 8))) & 1 == 1;
                !black
            });
            PnmImage::Binary(img)
        }
        Kind::Graymap => PnmImage::Gray(GrayImage::new(w, h, payload.to_vec()).expect("validated")),
        Kind::Pixmap => {
            PnmImage::Color(ColorImage::new(w, h, payload.to_vec()).expect("validated"))
        }
    };
    Ok(image)
}

pub fn encode_gray(img: &GrayImage) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", img.width(), img.height()).into_bytes();
    out.extend_from_slice(img.data());
    out
}

pub fn encode_color(img: &ColorImage) -> Vec<u8> {
    let mut out = format!("P6\n{} {}\n255\n", img.width(), img.height()).into_bytes();
    out.extend_from_slice(img.data());
    out
}

pub fn encode_binary(img: &BinaryImage) -> Vec<u8> {
    let (w, h) = (img.width(), img.height());
    let row_bytes = bitmap_row_bytes(w);
    let mut out = format!("P4\n{w} {h}\n").into_bytes();
    let start = out.len();
    out.resize(start + row_bytes * h, 0);
    for y in 0..h {
        for x in 0..w {
            if !img.get(x, y) {
                out[start + y * row_bytes + x / 8] |= 0x80 >> (x % 8);
            }
        }
    }
    out
}

pub fn read_image(path: impl AsRef<Path>) -> Result<PnmImage, PnmError> {
    decode(&fs::read(path)?)
}

pub fn write_gray(img: &GrayImage, path: impl AsRef<Path>) -> Result<(), PnmError> {
    fs::write(path, encode_gray(img))?;
    Ok(())
}

pub fn write_color(img: &ColorImage, path: impl AsRef<Path>) -> Result<(), PnmError> {
    fs::write(path, encode_color(img))?;
    Ok(())
}

pub fn write_binary(img: &BinaryImage, path: impl AsRef<Path>) -> Result<(), PnmError> {
    fs::write(path, encode_binary(img))?;
    Ok(())
}

//! Synthetic text-on-texture images with exact ground-truth masks.
//!
//! Text is drawn from the embedded 5x7 font scaled by an integer factor, so the
//! ground truth is exactly the set of inked font cells. Noise comes from a
//! 32-bit linear congruential generator
//!
//! ```text
//! state = (1664525 * state + 1013904223) mod 2^32
//! ```
//!
//! seeded with `(seed mod 2^32) xor (seed >> 32)`. Each noisy pixel, in raster
//! order, advances the state once and draws `(state >> 8) mod (2A + 1)` for
//! amplitude `A`.

use std::fmt::{self, Write as _};
use std::str::FromStr;

use thiserror::Error;

use crate::font::{self, GLYPH_HEIGHT, GLYPH_WIDTH};
use crate::image::{BinaryImage, GrayImage};
use crate::kv::{self, KvError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SynthError {
    #[error("text {text:?} at ({x}, {y}) does not fit in a {width}x{height} canvas")]
    GlyphOutsideCanvas {
        text: String,
        x: usize,
        y: usize,
        width: usize,
        height: usize,
    },
    #[error("character {0:?} is not in the font")]
    UnknownGlyph(char),
    #[error("glyph height {0} is not a positive multiple of 7")]
    GlyphHeight(usize),
    #[error("canvas must be non-empty")]
    EmptyCanvas,
    #[error("texture period must be even and at least 2, got {0}")]
    Period(usize),
    #[error("missing key {0}")]
    MissingKey(&'static str),
    #[error(transparent)]
    Parse(#[from] KvError),
}

pub struct Lcg(u32);

impl Lcg {
    pub fn new(seed: u64) -> Self {
        Lcg((seed as u32) ^ ((seed >> 32) as u32))
    }

    pub fn next_u32(&mut self) -> u32 {
        self.0 = self.0.wrapping_mul(1_664_525).wrapping_add(1_013_904_223);
        self.0
    }

    /// Uniform-ish integer in `0..n` from the upper 24 bits.
    pub fn below(&mut self, n: u32) -> u32 {
        (self.next_u32() >> 8) % n
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StripeAngle {
    /// Horizontal bands.
    Deg0,
    Deg45,
    /// Vertical bands.
    Deg90,
}

impl StripeAngle {
    fn degrees(self) -> u32 {
        match self {
            StripeAngle::Deg0 => 0,
            StripeAngle::Deg45 => 45,
            StripeAngle::Deg90 => 90,
        }
    }
}

/// Background texture. `period` is the full repeat length in pixels; each
/// cell or band is `period / 2` wide.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Texture {
    Constant {
        level: u8,
    },
    Checkerboard {
        period: usize,
        low: u8,
        high: u8,
    },
    Stripes {
        period: usize,
        angle: StripeAngle,
        low: u8,
        high: u8,
    },
    Noise {
        level: u8,
        amplitude: u8,
    },
}

impl Texture {
    fn name(&self) -> &'static str {
        match self {
            Texture::Constant { .. } => "constant",
            Texture::Checkerboard { .. } => "checkerboard",
            Texture::Stripes { .. } => "stripes",
            Texture::Noise { .. } => "noise",
        }
    }

    fn validate(&self) -> Result<(), SynthError> {
        match *self {
            Texture::Checkerboard { period, .. } | Texture::Stripes { period, .. }
                if period < 2 || period % 2 != 0 =>
            {
                Err(SynthError::Period(period))
            }
            _ => Ok(()),
        }
    }

    fn render(&self, width: usize, height: usize, seed: u64) -> GrayImage {
        match *self {
            Texture::Constant { level } => GrayImage::filled(width, height, level),
            Texture::Checkerboard { period, low, high } => {
                let cell = period / 2;
                GrayImage::from_fn(width, height, |x, y| {
                    if (x / cell + y / cell) % 2 == 0 {
                        low
                    } else {
                        high
                    }
                })
            }
            Texture::Stripes {
                period,
                angle,
                low,
                high,
            } => {
                let band = period / 2;
                GrayImage::from_fn(width, height, |x, y| {
                    let u = match angle {
                        StripeAngle::Deg0 => y,
                        StripeAngle::Deg45 => x + y,
                        StripeAngle::Deg90 => x,
                    };
                    if (u / band) % 2 == 0 {
                        low
                    } else {
                        high
                    }
                })
            }
            Texture::Noise { level, amplitude } => {
                let mut rng = Lcg::new(seed);
                let spread = 2 * amplitude as u32 + 1;
                GrayImage::from_fn(width, height, |_, _| {
                    let v = level as i32 + rng.below(spread) as i32 - amplitude as i32;
                    v.clamp(0, 255) as u8
                })
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Polarity {
    DarkOnLight,
    LightOnDark,
}

impl fmt::Display for Polarity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Polarity::DarkOnLight => "dark",
            Polarity::LightOnDark => "light",
        })
    }
}

impl FromStr for Polarity {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "dark" => Ok(Polarity::DarkOnLight),
            "light" => Ok(Polarity::LightOnDark),
            other => Err(format!("unknown polarity {other:?}")),
        }
    }
}

/// One line of text; `(x, y)` is the top-left corner of the first glyph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TextItem {
    pub text: String,
    pub x: usize,
    pub y: usize,
    /// Multiple of 7; the font is scaled by `glyph_height / 7`.
    pub glyph_height: usize,
    pub polarity: Polarity,
}

impl TextItem {
    pub fn new(text: &str, x: usize, y: usize, glyph_height: usize, polarity: Polarity) -> Self {
        Self {
            text: text.to_string(),
            x,
            y,
            glyph_height,
            polarity,
        }
    }

    pub fn scale(&self) -> usize {
        self.glyph_height / GLYPH_HEIGHT
    }

    /// Width of the rendered line, excluding the trailing gap.
    pub fn pixel_width(&self) -> usize {
        let n = self.text.chars().count();
        let s = self.scale();
        if n == 0 {
            0
        } else {
            n * (GLYPH_WIDTH + 1) * s - s
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SynthSpec {
    pub width: usize,
    pub height: usize,
    pub texture: Texture,
    pub text: Vec<TextItem>,
    pub seed: u64,
    pub dark_ink: u8,
    pub light_ink: u8,
}

impl SynthSpec {
    pub fn new(width: usize, height: usize, texture: Texture, seed: u64) -> Self {
        Self {
            width,
            height,
            texture,
            text: Vec::new(),
            seed,
            dark_ink: 20,
            light_ink: 235,
        }
    }

    pub fn with_text(mut self, item: TextItem) -> Self {
        self.text.push(item);
        self
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        if self.width == 0 || self.height == 0 {
            return Err(SynthError::EmptyCanvas);
        }
        self.texture.validate()?;
        for item in &self.text {
            if item.glyph_height == 0 || item.glyph_height % GLYPH_HEIGHT != 0 {
                return Err(SynthError::GlyphHeight(item.glyph_height));
            }
            if let Some(c) = item.text.chars().find(|&c| font::glyph(c).is_none()) {
                return Err(SynthError::UnknownGlyph(c));
            }
            if item.x + item.pixel_width() > self.width || item.y + item.glyph_height > self.height
            {
                return Err(SynthError::GlyphOutsideCanvas {
                    text: item.text.clone(),
                    x: item.x,
                    y: item.y,
                    width: self.width,
                    height: self.height,
                });
            }
        }
        Ok(())
    }

    /// Serializes to the `key = value` form read by [`SynthSpec::parse`].
    pub fn to_kv(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "width = {}", self.width);
        let _ = writeln!(s, "height = {}", self.height);
        let _ = writeln!(s, "seed = {}", self.seed);
        let _ = writeln!(s, "texture = {}", self.texture.name());
        match self.texture {
            Texture::Constant { level } => {
                let _ = writeln!(s, "texture_level = {level}");
            }
            Texture::Checkerboard { period, low, high } => {
                let _ = writeln!(s, "texture_period = {period}");
                let _ = writeln!(s, "texture_low = {low}");
                let _ = writeln!(s, "texture_high = {high}");
            }
            Texture::Stripes {
                period,
                angle,
                low,
                high,
            } => {
                let _ = writeln!(s, "texture_period = {period}");
                let _ = writeln!(s, "texture_angle = {}", angle.degrees());
                let _ = writeln!(s, "texture_low = {low}");
                let _ = writeln!(s, "texture_high = {high}");
            }
            Texture::Noise { level, amplitude } => {
                let _ = writeln!(s, "texture_level = {level}");
                let _ = writeln!(s, "texture_amplitude = {amplitude}");
            }
        }
        let _ = writeln!(s, "dark_ink = {}", self.dark_ink);
        let _ = writeln!(s, "light_ink = {}", self.light_ink);
        for t in &self.text {
            let _ = writeln!(
                s,
                "text = {} {} {} {} {}",
                t.x, t.y, t.glyph_height, t.polarity, t.text
            );
        }
        s
    }

    /// Reads a spec. `text = <x> <y> <glyph_height> <dark|light> <string>` may
    /// repeat; every other key appears at most once and unknown keys are errors.
    pub fn parse(input: &str) -> Result<Self, SynthError> {
        let entries = kv::parse(input)?;
        let mut width = None;
        let mut height = None;
        let mut seed = 0u64;
        let mut texture_kind: Option<String> = None;
        let mut period = 4usize;
        let mut angle = StripeAngle::Deg0;
        let (mut low, mut high, mut level, mut amplitude) = (96u8, 160u8, 128u8, 32u8);
        let (mut dark_ink, mut light_ink) = (20u8, 235u8);
        let mut text = Vec::new();
        let mut seen = std::collections::HashSet::new();

        for e in &entries {
            if e.key != "text" && !seen.insert(e.key) {
                return Err(e.error(format!("duplicate key {}", e.key)).into());
            }
            match e.key {
                "width" => width = Some(e.parse()?),
                "height" => height = Some(e.parse()?),
                "seed" => seed = e.parse()?,
                "texture" => {
                    if !["constant", "checkerboard", "stripes", "noise"].contains(&e.value) {
                        return Err(e.error(format!("unknown texture {}", e.value)).into());
                    }
                    texture_kind = Some(e.value.to_string());
                }
                "texture_period" => period = e.parse()?,
                "texture_angle" => {
                    angle = match e.value {
                        "0" => StripeAngle::Deg0,
                        "45" => StripeAngle::Deg45,
                        "90" => StripeAngle::Deg90,
                        _ => return Err(e.error("texture_angle must be 0, 45 or 90").into()),
                    }
                }
                "texture_low" => low = e.parse()?,
                "texture_high" => high = e.parse()?,
                "texture_level" => level = e.parse()?,
                "texture_amplitude" => amplitude = e.parse()?,
                "dark_ink" => dark_ink = e.parse()?,
                "light_ink" => light_ink = e.parse()?,
                "text" => {
                    let mut parts = e.value.splitn(5, ' ');
                    let mut field = |name: &str| {
                        parts
                            .next()
                            .filter(|p| !p.is_empty())
                            .ok_or_else(|| e.error(format!("text is missing {name}")))
                    };
                    let x = field("x")?;
                    let y = field("y")?;
                    let gh = field("glyph height")?;
                    let pol = field("polarity")?;
                    let string = field("string")?;
                    let num = |s: &str| {
                        s.parse::<usize>()
                            .map_err(|_| e.error(format!("invalid number {s:?}")))
                    };
                    text.push(TextItem {
                        x: num(x)?,
                        y: num(y)?,
                        glyph_height: num(gh)?,
                        polarity: pol.parse().map_err(|m: String| e.error(m))?,
                        text: string.to_string(),
                    });
                }
                other => return Err(e.error(format!("unknown key {other}")).into()),
            }
        }

        let texture = match texture_kind.as_deref().unwrap_or("constant") {
            "constant" => Texture::Constant { level },
            "checkerboard" => Texture::Checkerboard { period, low, high },
            "stripes" => Texture::Stripes {
                period,
                angle,
                low,
                high,
            },
            _ => Texture::Noise { level, amplitude },
        };
        let spec = SynthSpec {
            width: width.ok_or(SynthError::MissingKey("width"))?,
            height: height.ok_or(SynthError::MissingKey("height"))?,
            texture,
            text,
            seed,
            dark_ink,
            light_ink,
        };
        spec.validate()?;
        Ok(spec)
    }
}

/// Ground-truth mask of every inked font cell in `spec`.
pub fn text_mask(spec: &SynthSpec) -> Result<BinaryImage, SynthError> {
    Ok(render_layers(spec)?.1)
}

fn render_layers(spec: &SynthSpec) -> Result<(Vec<Option<u8>>, BinaryImage), SynthError> {
    spec.validate()?;
    let (w, h) = (spec.width, spec.height);
    let mut ink: Vec<Option<u8>> = vec![None; w * h];
    for item in &spec.text {
        let level = match item.polarity {
            Polarity::DarkOnLight => spec.dark_ink,
            Polarity::LightOnDark => spec.light_ink,
        };
        let s = item.scale();
        for (i, c) in item.text.chars().enumerate() {
            let rows = font::glyph(c).ok_or(SynthError::UnknownGlyph(c))?;
            let gx = item.x + i * (GLYPH_WIDTH + 1) * s;
            for row in 0..GLYPH_HEIGHT {
                for col in 0..GLYPH_WIDTH {
                    if !font::is_set(rows, col, row) {
                        continue;
                    }
                    for dy in 0..s {
                        for dx in 0..s {
                            let (x, y) = (gx + col * s + dx, item.y + row * s + dy);
                            ink[y * w + x] = Some(level);
                        }
                    }
                }
            }
        }
    }
    let mask = BinaryImage::new(w, h, ink.iter().map(Option::is_some).collect()).expect("dims");
    Ok((ink, mask))
}

/// Renders the image and its ground-truth text mask.
pub fn generate(spec: &SynthSpec) -> Result<(GrayImage, BinaryImage), SynthError> {
    let (ink, mask) = render_layers(spec)?;
    let background = spec.texture.render(spec.width, spec.height, spec.seed);
    let data = background
        .data()
        .iter()
        .zip(&ink)
        .map(|(&bg, &fg)| fg.unwrap_or(bg))
        .collect();
    let image = GrayImage::new(spec.width, spec.height, data).expect("dims");
    Ok((image, mask))
}

//! Label rasters, binary masks and their netpbm encodings.

use std::io::{self, BufRead, Write};

use super::VisionError;

pub const LABEL_BACKGROUND: u8 = 0;
pub const LABEL_TOWER: u8 = 1;
pub const LABEL_NACELLE: u8 = 2;
/// Blade `k` is written as `LABEL_BLADE_BASE + k`.
pub const LABEL_BLADE_BASE: u8 = 10;

/// Kind of turbine component a raster label belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ComponentKind {
    Blade,
    Tower,
    Nacelle,
}

impl ComponentKind {
    pub fn from_label(label: u8) -> Option<Self> {
        match label {
            LABEL_BACKGROUND => None,
            LABEL_TOWER => Some(ComponentKind::Tower),
            LABEL_NACELLE => Some(ComponentKind::Nacelle),
            l if l >= LABEL_BLADE_BASE => Some(ComponentKind::Blade),
            // 3..10 are reserved; treat as generic structure
            _ => Some(ComponentKind::Nacelle),
        }
    }
}

/// Row-major grid of 8-bit labels. Pixel frame: `x` right, `y` down.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Raster {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl Raster {
    pub fn new(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            data: vec![LABEL_BACKGROUND; width * height],
        }
    }

    pub fn from_data(width: usize, height: usize, data: Vec<u8>) -> Result<Self, VisionError> {
        if data.len() != width * height {
            return Err(VisionError::DimensionMismatch {
                expected: (width, height),
                found: (data.len(), 1),
            });
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.data[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, label: u8) {
        self.data[y * self.width + x] = label;
    }

    pub fn count_nonzero(&self) -> usize {
        self.data.iter().filter(|&&v| v != LABEL_BACKGROUND).count()
    }

    /// Binary `P5` graymap, maxval 255, one byte per label.
    pub fn write_pgm<W: Write>(&self, mut out: W) -> io::Result<()> {
        write!(out, "P5\n{} {}\n255\n", self.width, self.height)?;
        out.write_all(&self.data)
    }

    pub fn read_pgm<R: BufRead>(mut input: R) -> Result<Self, VisionError> {
        let header = read_netpbm_header(&mut input, 3)?;
        if header.magic != "P5" {
            return Err(VisionError::Format(format!("expected P5, found {}", header.magic)));
        }
        let (width, height, maxval) = (header.fields[0], header.fields[1], header.fields[2]);
        if maxval == 0 || maxval > 255 {
            return Err(VisionError::Format(format!("unsupported maxval {maxval}")));
        }
        let mut data = vec![0u8; width * height];
        input.read_exact(&mut data)?;
        Raster::from_data(width, height, data)
    }
}

/// One bit per pixel, same frame as the source raster.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryMask {
    width: usize,
    height: usize,
    bits: Vec<bool>,
}

impl BinaryMask {
    pub fn new(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            bits: vec![false; width * height],
        }
    }

    pub fn from_fn(width: usize, height: usize, f: impl Fn(usize, usize) -> bool) -> Self {
        let mut m = Self::new(width, height);
        for y in 0..height {
            for x in 0..width {
                m.bits[y * width + x] = f(x, y);
            }
        }
        m
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn get(&self, x: usize, y: usize) -> bool {
        self.bits[y * self.width + x]
    }

    /// Out-of-frame coordinates read as unset.
    pub fn get_signed(&self, x: i64, y: i64) -> bool {
        x >= 0
            && y >= 0
            && (x as usize) < self.width
            && (y as usize) < self.height
            && self.bits[y as usize * self.width + x as usize]
    }

    pub fn set(&mut self, x: usize, y: usize, value: bool) {
        self.bits[y * self.width + x] = value;
    }

    pub fn count_ones(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.bits.iter().any(|&b| b)
    }

    pub fn iter_set(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.bits
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(move |(i, _)| (i % self.width, i / self.width))
    }

    /// Packed `P4` bitmap, MSB first, rows padded to whole bytes; `1` = set.
    pub fn write_pbm<W: Write>(&self, mut out: W) -> io::Result<()> {
        write!(out, "P4\n{} {}\n", self.width, self.height)?;
        let row_bytes = self.width.div_ceil(8);
        let mut row = vec![0u8; row_bytes];
        for y in 0..self.height {
            row.iter_mut().for_each(|b| *b = 0);
            for x in 0..self.width {
                if self.get(x, y) {
                    row[x / 8] |= 0x80 >> (x % 8);
                }
            }
            out.write_all(&row)?;
        }
        Ok(())
    }

    pub fn read_pbm<R: BufRead>(mut input: R) -> Result<Self, VisionError> {
        let header = read_netpbm_header(&mut input, 2)?;
        if header.magic != "P4" {
            return Err(VisionError::Format(format!("expected P4, found {}", header.magic)));
        }
        let (width, height) = (header.fields[0], header.fields[1]);
        let row_bytes = width.div_ceil(8);
        let mut raw = vec![0u8; row_bytes * height];
        input.read_exact(&mut raw)?;
        Ok(Self::from_fn(width, height, |x, y| {
            raw[y * row_bytes + x / 8] & (0x80 >> (x % 8)) != 0
        }))
    }
}

struct NetpbmHeader {
    magic: String,
    fields: Vec<usize>,
}

/// Reads the magic number and `n` whitespace-separated integers, skipping
/// `#` comments, and consumes exactly one whitespace byte after the last one.
fn read_netpbm_header<R: BufRead>(input: &mut R, n: usize) -> Result<NetpbmHeader, VisionError> {
    let mut tokens: Vec<String> = Vec::with_capacity(n + 1);
    let mut current = String::new();
    let mut in_comment = false;
    let mut byte = [0u8; 1];
    while tokens.len() < n + 1 {
        if input.read(&mut byte)? == 0 {
            return Err(VisionError::Format("truncated netpbm header".into()));
        }
        let c = byte[0] as char;
        if in_comment {
            in_comment = c != '\n';
            continue;
        }
        if c == '#' {
            in_comment = true;
        } else if c.is_ascii_whitespace() {
            if !current.is_empty() {
                tokens.push(std::mem::take(&mut current));
            }
        } else {
            current.push(c);
        }
    }
    let magic = tokens.remove(0);
    let fields = tokens
        .iter()
        .map(|t| {
            t.parse::<usize>()
                .map_err(|_| VisionError::Format(format!("bad header field {t:?}")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(NetpbmHeader { magic, fields })
}

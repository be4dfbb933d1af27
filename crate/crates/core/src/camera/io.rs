//! Image export: 16-bit binary PGM and a plain CSV grid, both carrying the
//! frame metadata in a leading comment so images re-import losslessly.

use std::fmt::Write as _;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use super::{CameraFrame, Plane, SyntheticImage};
use crate::{Error, Result};

const MAX16: f64 = 65535.0;

fn metadata(image: &SyntheticImage, scale: Option<f64>) -> String {
    let f = &image.frame;
    let mut s = format!(
        "dms pitch_um={:?} origin_x_um={:?} origin_y_um={:?} plane={} normalization={:?} fourier_scale={:?}",
        f.pitch_um,
        f.origin_x_um,
        f.origin_y_um,
        image.plane.name(),
        image.normalization,
        f.fourier_scale
    );
    if let Some(scale) = scale {
        let _ = write!(s, " scale={scale:?}");
    }
    s
}

struct Meta {
    pitch_um: f64,
    origin_x_um: f64,
    origin_y_um: f64,
    plane: Plane,
    normalization: f64,
    fourier_scale: f64,
    scale: Option<f64>,
}

fn parse_metadata(line: &str) -> Result<Meta> {
    let body = line.trim_start_matches('#').trim();
    let rest = body
        .strip_prefix("dms")
        .ok_or_else(|| Error::Parse("missing dms metadata comment".into()))?;
    let mut pitch = None;
    let mut ox = None;
    let mut oy = None;
    let mut plane = None;
    let mut norm = None;
    let mut fs = None;
    let mut scale = None;
    for pair in rest.split_whitespace() {
        let (k, v) = pair
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("malformed metadata field `{pair}`")))?;
        let num = || v.parse::<f64>().map_err(|_| Error::Parse(format!("bad value for {k}: `{v}`")));
        match k {
            "pitch_um" => pitch = Some(num()?),
            "origin_x_um" => ox = Some(num()?),
            "origin_y_um" => oy = Some(num()?),
            "normalization" => norm = Some(num()?),
            "fourier_scale" => fs = Some(num()?),
            "scale" => scale = Some(num()?),
            "plane" => plane = Some(Plane::from_name(v)?),
            _ => return Err(Error::Parse(format!("unknown metadata field `{k}`"))),
        }
    }
    let need = |v: Option<f64>, name: &str| v.ok_or_else(|| Error::Parse(format!("metadata lacks {name}")));
    Ok(Meta {
        pitch_um: need(pitch, "pitch_um")?,
        origin_x_um: need(ox, "origin_x_um")?,
        origin_y_um: need(oy, "origin_y_um")?,
        plane: plane.ok_or_else(|| Error::Parse("metadata lacks plane".into()))?,
        normalization: need(norm, "normalization")?,
        fourier_scale: need(fs, "fourier_scale")?,
        scale,
    })
}

fn frame_from(meta: &Meta, width: usize, height: usize) -> Result<CameraFrame> {
    CameraFrame::new(width, height, meta.pitch_um, meta.origin_x_um, meta.origin_y_um)?.with_fourier_scale(meta.fourier_scale)
}

/// Power-of-two quantization step mapping the brightest pixel into 16 bits.
/// A power of two keeps `count * scale` exact on re-import.
pub fn quantization_scale(image: &SyntheticImage) -> f64 {
    let max = image.pixels.iter().cloned().fold(0.0, f64::max);
    if max <= 0.0 {
        return 1.0;
    }
    2f64.powi((max / MAX16).log2().ceil() as i32)
}

/// Writes a binary 16-bit PGM. Negative pixels are stored as zero.
pub fn write_pgm<W: Write>(image: &SyntheticImage, mut out: W) -> Result<()> {
    let scale = quantization_scale(image);
    let f = &image.frame;
    write!(out, "P5\n# {}\n{} {}\n65535\n", metadata(image, Some(scale)), f.width_px, f.height_px)?;
    let mut bytes = Vec::with_capacity(2 * image.pixels.len());
    for &v in &image.pixels {
        let count = (v.max(0.0) / scale).round().min(MAX16) as u16;
        bytes.extend_from_slice(&count.to_be_bytes());
    }
    out.write_all(&bytes)?;
    Ok(())
}

pub fn save_pgm(image: &SyntheticImage, path: &Path) -> Result<()> {
    let file = std::fs::File::create(path)?;
    let mut w = std::io::BufWriter::new(file);
    write_pgm(image, &mut w)?;
    w.flush()?;
    Ok(())
}

fn header_token<R: BufRead>(r: &mut R, comment: &mut Option<String>) -> Result<String> {
    let mut tok = String::new();
    loop {
        let mut byte = [0u8; 1];
        if r.read(&mut byte)? == 0 {
            return Err(Error::Parse("truncated PGM header".into()));
        }
        let c = byte[0] as char;
        if c == '#' && tok.is_empty() {
            let mut line = String::new();
            r.read_line(&mut line)?;
            if comment.is_none() {
                *comment = Some(line.trim().to_string());
            }
        } else if c.is_ascii_whitespace() {
            if !tok.is_empty() {
                return Ok(tok);
            }
        } else {
            tok.push(c);
        }
    }
}

/// Reads a PGM written by [`write_pgm`].
pub fn read_pgm<R: Read>(input: R) -> Result<SyntheticImage> {
    let mut r = BufReader::new(input);
    let mut comment = None;
    let magic = header_token(&mut r, &mut comment)?;
    if magic != "P5" {
        return Err(Error::Parse(format!("expected P5, found `{magic}`")));
    }
    let mut dim = |name: &str| -> Result<usize> {
        let t = header_token(&mut r, &mut comment)?;
        t.parse().map_err(|_| Error::Parse(format!("bad PGM {name} `{t}`")))
    };
    let width = dim("width")?;
    let height = dim("height")?;
    let maxval = dim("maxval")?;
    if maxval != 65535 {
        return Err(Error::Parse(format!("expected 16-bit maxval, found {maxval}")));
    }
    let meta = parse_metadata(comment.as_deref().unwrap_or(""))?;
    let scale = meta.scale.ok_or_else(|| Error::Parse("metadata lacks scale".into()))?;
    let mut bytes = vec![0u8; 2 * width * height];
    r.read_exact(&mut bytes)?;
    let pixels = bytes
        .chunks_exact(2)
        .map(|b| u16::from_be_bytes([b[0], b[1]]) as f64 * scale)
        .collect();
    SyntheticImage::new(frame_from(&meta, width, height)?, pixels, meta.plane, meta.normalization)
}

pub fn load_pgm(path: &Path) -> Result<SyntheticImage> {
    read_pgm(std::fs::File::open(path)?)
}

/// Writes one CSV row per sensor row with round-trip float formatting.
pub fn write_csv_grid<W: Write>(image: &SyntheticImage, mut out: W) -> Result<()> {
    writeln!(out, "# {}", metadata(image, None))?;
    let mut line = String::new();
    for row in image.pixels.chunks(image.frame.width_px) {
        line.clear();
        for (i, v) in row.iter().enumerate() {
            if i > 0 {
                line.push(',');
            }
            let _ = write!(line, "{v:?}");
        }
        line.push('\n');
        out.write_all(line.as_bytes())?;
    }
    Ok(())
}

pub fn save_csv_grid(image: &SyntheticImage, path: &Path) -> Result<()> {
    let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
    write_csv_grid(image, &mut w)?;
    w.flush()?;
    Ok(())
}

pub fn read_csv_grid<R: Read>(input: R) -> Result<SyntheticImage> {
    let mut lines = BufReader::new(input).lines();
    let first = lines.next().ok_or_else(|| Error::Parse("empty CSV grid".into()))??;
    let meta = parse_metadata(&first)?;
    let mut pixels = Vec::new();
    let mut width = None;
    let mut height = 0;
    for (n, line) in lines.enumerate() {
        let line = line?;
        if line.is_empty() {
            continue;
        }
        let before = pixels.len();
        for (c, field) in line.split(',').enumerate() {
            let v = field
                .trim()
                .parse::<f64>()
                .map_err(|_| Error::Parse(format!("line {}, column {}: bad number `{field}`", n + 2, c + 1)))?;
            pixels.push(v);
        }
        let w = pixels.len() - before;
        if *width.get_or_insert(w) != w {
            return Err(Error::Parse(format!("line {}: ragged row", n + 2)));
        }
        height += 1;
    }
    let width = width.ok_or_else(|| Error::Parse("CSV grid has no rows".into()))?;
    SyntheticImage::new(frame_from(&meta, width, height)?, pixels, meta.plane, meta.normalization)
}

pub fn load_csv_grid(path: &Path) -> Result<SyntheticImage> {
    read_csv_grid(std::fs::File::open(path)?)
}

//! Grid-function and cube-list files.
//!
//! Text grid format:
//!
//! ```text
//! dyvar-grid v1
//! d=2 K=1
//! 0 1/2
//! -3 4
//! ```
//!
//! Values are whitespace separated and row-major; exactly `2^{dK}` of them. The JSON form
//! is `{"d": 2, "K": 1, "values": ["0", "1/2", "-3", "4"]}`. Cube lists use the header
//! `dyvar-cubes v1`, the same shape line, then one `level c_1 .. c_d` line per cube.

use std::fs;
use std::path::Path;

use crate::cube::{CubeId, Shape};
use crate::error::{Error, Result};
use crate::exact;
use crate::grid::GridFunction;

pub const GRID_MAGIC: &str = "dyvar-grid v1";
pub const CUBES_MAGIC: &str = "dyvar-cubes v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Text,
    Json,
}

impl Format {
    /// JSON for `.json` paths, text otherwise.
    pub fn for_path(path: &Path) -> Format {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("json") => Format::Json,
            _ => Format::Text,
        }
    }
}

fn parse_shape_line(line: Option<&str>) -> Result<Shape> {
    let line = line.ok_or_else(|| Error::MalformedHeader("missing shape line".into()))?;
    let mut d = None;
    let mut k = None;
    for part in line.split_whitespace() {
        let (key, val) = part
            .split_once('=')
            .ok_or_else(|| Error::MalformedHeader(format!("bad field {part:?}")))?;
        let parsed: u64 = val
            .parse()
            .map_err(|_| Error::MalformedHeader(format!("bad value in {part:?}")))?;
        match key {
            "d" => d = Some(parsed),
            "K" => k = Some(parsed),
            _ => return Err(Error::MalformedHeader(format!("unknown field {key:?}"))),
        }
    }
    match (d, k) {
        (Some(d), Some(k)) => Shape::new(d as usize, k as u32)
            .map_err(|_| Error::MalformedHeader(format!("unsupported shape d={d} K={k}"))),
        _ => Err(Error::MalformedHeader(format!("expected `d=<int> K=<int>`, got {line:?}"))),
    }
}

fn expect_magic(line: Option<&str>, magic: &str) -> Result<()> {
    match line.map(str::trim) {
        Some(l) if l == magic => Ok(()),
        other => Err(Error::MalformedHeader(format!(
            "expected {magic:?}, got {:?}",
            other.unwrap_or("")
        ))),
    }
}

pub fn parse_grid_text(text: &str) -> Result<GridFunction> {
    let mut lines = text.lines();
    expect_magic(lines.next(), GRID_MAGIC)?;
    let shape = parse_shape_line(lines.next())?;
    let values = lines
        .flat_map(str::split_whitespace)
        .map(exact::parse)
        .collect::<Result<Vec<_>>>()?;
    GridFunction::new(shape, values)
}

/// Text form; one line per row of the last axis.
pub fn format_grid_text(f: &GridFunction) -> String {
    let mut out = format!("{GRID_MAGIC}\nd={} K={}\n", f.d(), f.k());
    let row = f.shape().side() as usize;
    for chunk in f.values().chunks(row) {
        let tokens: Vec<String> = chunk.iter().map(exact::format).collect();
        out.push_str(&tokens.join(" "));
        out.push('\n');
    }
    out
}

#[derive(serde::Deserialize)]
struct RawGrid {
    d: usize,
    #[serde(rename = "K")]
    k: u32,
    values: Vec<String>,
}

pub fn parse_grid_json(text: &str) -> Result<GridFunction> {
    let raw: RawGrid =
        serde_json::from_str(text).map_err(|e| Error::MalformedHeader(e.to_string()))?;
    let shape = Shape::new(raw.d, raw.k)?;
    let values = raw
        .values
        .iter()
        .map(|t| exact::parse(t))
        .collect::<Result<Vec<_>>>()?;
    GridFunction::new(shape, values)
}

pub fn format_grid_json(f: &GridFunction) -> String {
    serde_json::to_string(f).expect("grid serializes")
}

pub fn load(path: &Path) -> Result<GridFunction> {
    load_as(path, Format::for_path(path))
}

pub fn load_as(path: &Path, format: Format) -> Result<GridFunction> {
    let text = fs::read_to_string(path)?;
    match format {
        Format::Text => parse_grid_text(&text),
        Format::Json => parse_grid_json(&text),
    }
}

pub fn save(path: &Path, f: &GridFunction) -> Result<()> {
    save_as(path, f, Format::for_path(path))
}

pub fn save_as(path: &Path, f: &GridFunction, format: Format) -> Result<()> {
    let text = match format {
        Format::Text => format_grid_text(f),
        Format::Json => format_grid_json(f),
    };
    fs::write(path, text)?;
    Ok(())
}

pub fn parse_cubes_text(text: &str) -> Result<(Shape, Vec<CubeId>)> {
    let mut lines = text.lines();
    expect_magic(lines.next(), CUBES_MAGIC)?;
    let shape = parse_shape_line(lines.next())?;
    let mut cubes = Vec::new();
    for line in lines.filter(|l| !l.trim().is_empty()) {
        let nums = line
            .split_whitespace()
            .map(|t| {
                t.parse::<u32>()
                    .map_err(|_| Error::MalformedHeader(format!("bad cube line {line:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        if nums.len() != shape.d + 1 {
            return Err(Error::MalformedHeader(format!(
                "cube line {line:?} needs a level and {} coordinates",
                shape.d
            )));
        }
        let cube = CubeId::new(nums[0], nums[1..].to_vec());
        shape.check_cube(&cube)?;
        cubes.push(cube);
    }
    Ok((shape, cubes))
}

pub fn format_cubes_text(shape: Shape, cubes: &[CubeId]) -> String {
    let mut out = format!("{CUBES_MAGIC}\nd={} K={}\n", shape.d, shape.k);
    for q in cubes {
        let mut parts = vec![q.level.to_string()];
        parts.extend(q.corner.iter().map(|c| c.to_string()));
        out.push_str(&parts.join(" "));
        out.push('\n');
    }
    out
}

pub fn load_cubes(path: &Path) -> Result<(Shape, Vec<CubeId>)> {
    parse_cubes_text(&fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::ratio;

    #[test]
    fn text_round_trip() {
        let text = "dyvar-grid v1\nd=1 K=2\n3/4 -1 0 6/8\n";
        let f = parse_grid_text(text).unwrap();
        assert_eq!(f.values()[0], ratio(3, 4));
        assert_eq!(f.values()[3], ratio(3, 4));
        assert_eq!(parse_grid_text(&format_grid_text(&f)).unwrap(), f);
        assert_eq!(parse_grid_json(&format_grid_json(&f)).unwrap(), f);
    }

    #[test]
    fn header_errors() {
        assert!(matches!(
            parse_grid_text("dyvar-grid v2\nd=1 K=1\n0 0"),
            Err(Error::MalformedHeader(_))
        ));
        assert!(matches!(
            parse_grid_text("dyvar-grid v1\nd=1\n0 0"),
            Err(Error::MalformedHeader(_))
        ));
        assert!(matches!(
            parse_grid_text("dyvar-grid v1\nd=1 K=1\n0 x"),
            Err(Error::BadRational { .. })
        ));
        let values = vec!["0"; 63].join(" ");
        assert_eq!(
            parse_grid_text(&format!("dyvar-grid v1\nd=2 K=3\n{values}")),
            Err(Error::LengthMismatch {
                expected: 64,
                found: 63
            })
        );
    }

    #[test]
    fn json_errors() {
        assert!(parse_grid_json(r#"{"d":1,"K":1,"values":["0"]}"#).is_err());
        assert!(parse_grid_json(r#"{"d":1,"K":1,"values":["0","a"]}"#).is_err());
    }

    #[test]
    fn cube_list_round_trip() {
        let shape = Shape::new(2, 2).unwrap();
        let cubes = vec![CubeId::new(1, vec![0, 2]), CubeId::new(0, vec![3, 3])];
        let text = format_cubes_text(shape, &cubes);
        assert_eq!(parse_cubes_text(&text).unwrap(), (shape, cubes));
        assert!(parse_cubes_text("dyvar-cubes v1\nd=2 K=2\n1 1 0\n").is_err());
    }
}

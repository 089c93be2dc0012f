//! Text formats.
//!
//! Point files hold one point per line as comma-separated coordinates with
//! an optional final field `w=<int>` (default weight 1). Update files start
//! with a header `delta=<int> d=<int>` followed by lines `+ x1,...,xd` or
//! `- x1,...,xd`. Assignment files hold one machine index per line. In all
//! formats, blank lines and lines starting with `#` are ignored.

use std::fmt::Write as _;
use std::path::Path;

use crate::dynamic::{Update, UpdateStream};
use crate::error::{Error, Result};
use crate::metric::{Point, WeightedPoint};

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn at_line(line: usize, msg: impl std::fmt::Display) -> Error {
    Error::Input(format!("line {line}: {msg}"))
}

fn parse_coords(line: usize, fields: &[&str]) -> Result<Point> {
    if fields.is_empty() {
        return Err(at_line(line, "no coordinates"));
    }
    fields
        .iter()
        .map(|f| {
            let x: f64 = f
                .trim()
                .parse()
                .map_err(|_| at_line(line, format!("`{}` is not a number", f.trim())))?;
            if x.is_finite() {
                Ok(x)
            } else {
                Err(at_line(
                    line,
                    format!("coordinate `{}` is not finite", f.trim()),
                ))
            }
        })
        .collect::<Result<Vec<f64>>>()
        .map(Point)
}

/// Parses a point file. All points must share one dimension.
pub fn parse_points(text: &str) -> Result<Vec<WeightedPoint>> {
    let mut out: Vec<WeightedPoint> = Vec::new();
    for (line, l) in content_lines(text) {
        let mut fields: Vec<&str> = l.split(',').collect();
        let mut weight = 1;
        if let Some(w) = fields.last().and_then(|f| f.trim().strip_prefix("w=")) {
            weight = w
                .trim()
                .parse()
                .map_err(|_| at_line(line, format!("weight `{w}` is not a positive integer")))?;
            if weight == 0 {
                return Err(at_line(line, "weight must be positive"));
            }
            fields.pop();
        }
        let p = parse_coords(line, &fields)?;
        if let Some(first) = out.first() {
            if first.point.dim() != p.dim() {
                return Err(at_line(
                    line,
                    format!(
                        "expected {} coordinates, found {}",
                        first.point.dim(),
                        p.dim()
                    ),
                ));
            }
        }
        out.push(WeightedPoint::new(p, weight));
    }
    Ok(out)
}

/// Formats points in the point-file format; weight 1 is left implicit.
pub fn format_points(points: &[WeightedPoint]) -> String {
    let mut s = String::new();
    for wp in points {
        let coords: Vec<String> = wp.point.0.iter().map(f64::to_string).collect();
        s.push_str(&coords.join(","));
        if wp.weight != 1 {
            let _ = write!(s, ",w={}", wp.weight);
        }
        s.push('\n');
    }
    s
}

fn header_value(line: usize, field: &str, key: &str) -> Result<u64> {
    field
        .strip_prefix(key)
        .and_then(|v| v.strip_prefix('='))
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| at_line(line, format!("expected `{key}=<int>`, found `{field}`")))
}

/// Parses an update file.
pub fn parse_updates(text: &str) -> Result<UpdateStream> {
    let mut lines = content_lines(text);
    let (hline, header) = lines
        .next()
        .ok_or_else(|| Error::Input("missing `delta=<int> d=<int>` header".into()))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() != 2 {
        return Err(at_line(hline, "header must be `delta=<int> d=<int>`"));
    }
    let delta = header_value(hline, fields[0], "delta")?;
    let dim = header_value(hline, fields[1], "d")? as usize;
    if delta == 0 || dim == 0 {
        return Err(at_line(hline, "delta and d must be positive"));
    }
    let mut updates = Vec::new();
    for (line, l) in lines {
        let (sign, rest) = match l.split_at(1) {
            ("+", rest) => (1, rest),
            ("-", rest) => (-1, rest),
            _ => return Err(at_line(line, "an update must start with `+` or `-`")),
        };
        let fields: Vec<&str> = rest.split(',').collect();
        let point = parse_coords(line, &fields)?;
        if point.dim() != dim {
            return Err(at_line(
                line,
                format!("expected {dim} coordinates, found {}", point.dim()),
            ));
        }
        if let Some(&x) = point
            .0
            .iter()
            .find(|&&x| x.fract() != 0.0 || x < 1.0 || x > delta as f64)
        {
            return Err(at_line(
                line,
                format!("coordinate {x} is not an integer in [1, {delta}]"),
            ));
        }
        updates.push(Update { point, sign });
    }
    Ok(UpdateStream {
        delta,
        dim,
        updates,
    })
}

pub fn format_updates(stream: &UpdateStream) -> String {
    let mut s = format!("delta={} d={}\n", stream.delta, stream.dim);
    for u in &stream.updates {
        let coords: Vec<String> = u.point.0.iter().map(f64::to_string).collect();
        let _ = writeln!(
            s,
            "{} {}",
            if u.sign > 0 { '+' } else { '-' },
            coords.join(",")
        );
    }
    s
}

/// Parses an assignment file: the machine of every point, in order.
pub fn parse_assignment(text: &str) -> Result<Vec<usize>> {
    content_lines(text)
        .map(|(line, l)| {
            l.parse()
                .map_err(|_| at_line(line, format!("`{l}` is not a machine index")))
        })
        .collect()
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Input(format!("{}: {e}", path.display())))
}

pub fn read_points(path: impl AsRef<Path>) -> Result<Vec<WeightedPoint>> {
    let path = path.as_ref();
    parse_points(&read(path)?).map_err(|e| prefix(path, e))
}

pub fn read_updates(path: impl AsRef<Path>) -> Result<UpdateStream> {
    let path = path.as_ref();
    parse_updates(&read(path)?).map_err(|e| prefix(path, e))
}

pub fn read_assignment(path: impl AsRef<Path>) -> Result<Vec<usize>> {
    let path = path.as_ref();
    parse_assignment(&read(path)?).map_err(|e| prefix(path, e))
}

fn prefix(path: &Path, e: Error) -> Error {
    match e {
        Error::Input(m) => Error::Input(format!("{}: {m}", path.display())),
        other => other,
    }
}

pub fn write_text(path: impl AsRef<Path>, text: &str) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, text).map_err(|e| Error::Input(format!("{}: {e}", path.display())))
}

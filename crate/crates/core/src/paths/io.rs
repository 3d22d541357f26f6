use std::fmt::Write as _;

use super::track::{HybridPath, Knot, Track};
use crate::error::{Error, Result};

pub const PATH_CSV_HEADER: &str = "component,time,value,is_jump";

/// One row per knot with its left value, plus an `is_jump = 1` row carrying the
/// post-jump value where the track jumps. Floats use shortest round-trip form.
pub fn path_to_csv(p: &HybridPath) -> String {
    let mut out = String::from(PATH_CSV_HEADER);
    out.push('\n');
    for (name, tr) in [("x", &p.x), ("y", &p.y)] {
        for k in tr.knots() {
            let _ = writeln!(out, "{name},{:?},{:?},0", k.t, k.left);
            if k.value != k.left {
                let _ = writeln!(out, "{name},{:?},{:?},1", k.t, k.value);
            }
        }
    }
    out
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, message: message.into() }
}

pub fn path_from_csv(text: &str) -> Result<HybridPath> {
    let mut knots: [Vec<Knot>; 2] = [Vec::new(), Vec::new()];
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    match lines.next() {
        Some((_, h)) if h.trim() == PATH_CSV_HEADER => {}
        _ => return Err(parse_err(1, "missing header")),
    }
    for (i, line) in lines {
        let ln = i + 1;
        let cols: Vec<&str> = line.split(',').map(str::trim).collect();
        if cols.len() != 4 {
            return Err(parse_err(ln, "expected 4 columns"));
        }
        let c = match cols[0] {
            "x" | "X" => 0,
            "y" | "Y" => 1,
            other => return Err(parse_err(ln, format!("unknown component {other:?}"))),
        };
        let num = |s: &str| s.parse::<f64>().map_err(|e| parse_err(ln, format!("{s:?}: {e}")));
        let (t, v) = (num(cols[1])?, num(cols[2])?);
        match cols[3] {
            "0" => knots[c].push(Knot::cont(t, v)),
            "1" => match knots[c].last_mut() {
                Some(k) if k.t == t && k.value == k.left => k.value = v,
                _ => return Err(parse_err(ln, "jump row without a matching knot row")),
            },
            other => return Err(parse_err(ln, format!("bad is_jump flag {other:?}"))),
        }
    }
    let [kx, ky] = knots;
    Ok(HybridPath { x: Track::new(kx)?, y: Track::new(ky)? })
}

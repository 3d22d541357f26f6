//! SVG drawings of frame CSVs: each alive rectangle in the unit square,
//! coloured by shape.

use std::fmt::Write as _;

use rectfrag_core::simulator::FRAME_CSV_HEADER;
use rectfrag_core::Error;

#[derive(Debug, Clone, PartialEq)]
pub struct FrameRect {
    pub id: String,
    pub left: f64,
    pub bottom: f64,
    pub base: f64,
    pub height: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shape {
    Tall,
    Fat,
    NearSquare,
}

impl Shape {
    pub fn of(base: f64, height: f64, threshold: f64) -> Shape {
        if (base / height).ln().abs() <= threshold {
            Shape::NearSquare
        } else if height > base {
            Shape::Tall
        } else {
            Shape::Fat
        }
    }

    fn fill(self) -> &'static str {
        match self {
            Shape::Tall => "#d62728",
            Shape::Fat => "#2ca02c",
            Shape::NearSquare => "#ffd700",
        }
    }
}

pub fn parse_frame(text: &str) -> Result<Vec<FrameRect>, Error> {
    let parse_err = |line: usize, message: String| Error::Parse { line, message };
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == FRAME_CSV_HEADER => {}
        _ => return Err(parse_err(1, format!("expected header '{FRAME_CSV_HEADER}'"))),
    }
    let mut out = Vec::new();
    for (i, line) in lines {
        let line_no = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 5 {
            return Err(parse_err(line_no, format!("expected 5 columns, found {}", cols.len())));
        }
        let mut v = [0.0; 4];
        for (k, c) in cols[1..].iter().enumerate() {
            v[k] = c.trim().parse().map_err(|_| parse_err(line_no, format!("not a number: '{c}'")))?;
        }
        let [left, bottom, base, height] = v;
        let inside = |lo: f64, len: f64| lo >= -1e-12 && len > 0.0 && lo + len <= 1.0 + 1e-9;
        if !inside(left, base) || !inside(bottom, height) {
            return Err(parse_err(line_no, "rectangle outside the unit square".into()));
        }
        out.push(FrameRect { id: cols[0].to_string(), left, bottom, base, height });
    }
    Ok(out)
}

pub fn to_svg(rects: &[FrameRect], size: f64, threshold: f64) -> String {
    let mut s = String::new();
    let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{size}" height="{size}" viewBox="0 0 {size} {size}">"#
    );
    // Thin strokes so tiny rectangles still show.
    let stroke = (size / 1024.0).max(0.1);
    for r in rects {
        let shape = Shape::of(r.base, r.height, threshold);
        let _ = writeln!(
            s,
            r#"<rect id="{}" x="{:.4}" y="{:.4}" width="{:.4}" height="{:.4}" fill="{}" stroke="black" stroke-width="{stroke}"/>"#,
            r.id,
            r.left * size,
            (1.0 - r.bottom - r.height) * size,
            r.base * size,
            r.height * size,
            shape.fill()
        );
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shapes() {
        assert_eq!(Shape::of(1.0, 1.0, 0.1), Shape::NearSquare);
        assert_eq!(Shape::of(0.3, 0.7, 0.1), Shape::Tall);
        assert_eq!(Shape::of(0.7, 0.3, 0.1), Shape::Fat);
        assert_eq!(Shape::of(1.0, 1.05, 0.1), Shape::NearSquare);
        assert_eq!(Shape::of(1.0, 1.2, 0.1), Shape::Tall);
    }

    #[test]
    fn root_is_one_yellow_square() {
        let rects = parse_frame(&format!("{FRAME_CSV_HEADER}\nr,0.0,0.0,1.0,1.0\n")).unwrap();
        let svg = to_svg(&rects, 100.0, 0.1);
        assert_eq!(svg.matches("<rect").count(), 1);
        assert!(svg.contains(r##"width="100.0000" height="100.0000" fill="#ffd700""##));
    }

    #[test]
    fn vertical_split() {
        let text = format!("{FRAME_CSV_HEADER}\nr1,0.0,0.0,0.3,1.0\nr2,0.3,0.0,0.7,1.0\n");
        let svg = to_svg(&parse_frame(&text).unwrap(), 100.0, 0.1);
        assert!(svg.contains(r#"x="0.0000" y="0.0000" width="30.0000""#));
        assert!(svg.contains(r#"x="30.0000" y="0.0000" width="70.0000""#));
        assert_eq!(svg.matches("#d62728").count(), 2);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let e = parse_frame(&format!("{FRAME_CSV_HEADER}\nr,0,0,1,1\nr2,0,x,1,1\n")).unwrap_err();
        assert_eq!(e, Error::Parse { line: 3, message: "not a number: 'x'".into() });
        assert!(matches!(parse_frame("a,b\n"), Err(Error::Parse { line: 1, .. })));
        let e = parse_frame(&format!("{FRAME_CSV_HEADER}\nr,0,0,1\n")).unwrap_err();
        assert!(matches!(e, Error::Parse { line: 2, .. }));
    }
}

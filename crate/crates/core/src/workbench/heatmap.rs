use crate::indicators::IndicatorField;

/// 8-bit binary PGM of a field, min-max normalized to `0..=255`; row 0 is
/// the top (`y_max`) edge. A constant field maps to all zeros. `comment`
/// lines are written into the header.
pub fn export_heatmap(field: &IndicatorField, comments: &[String]) -> Vec<u8> {
    let g = field.grid();
    let (lo, hi) = (field.min(), field.max());
    let span = hi - lo;
    let mut out = String::from("P5\n");
    for c in comments {
        out.push_str(&format!("# {c}\n"));
    }
    out.push_str(&format!("{} {}\n255\n", g.nx, g.ny));
    let mut bytes = out.into_bytes();
    for iy in (0..g.ny).rev() {
        for ix in 0..g.nx {
            let v = field.value(ix, iy);
            let p = if span > 0.0 {
                (255.0 * (v - lo) / span).round()
            } else {
                0.0
            };
            bytes.push(p.clamp(0.0, 255.0) as u8);
        }
    }
    bytes
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::SamplingGrid;
    use crate::indicators::Method;

    fn pixels(bytes: &[u8], n: usize) -> &[u8] {
        &bytes[bytes.len() - n..]
    }

    #[test]
    fn linear_scaling_and_orientation() {
        let grid = SamplingGrid::new([0.0, 1.0, 0.0, 1.0], 2, 2).unwrap();
        let f = IndicatorField::new(grid, vec![0.0, 1.0, 2.0, 3.0], Method::Dsm, false).unwrap();
        let b = export_heatmap(&f, &[]);
        assert!(b.starts_with(b"P5\n2 2\n255\n"));
        // top row holds the y_max values 2 and 3
        assert_eq!(pixels(&b, 4), &[170, 255, 0, 85]);
    }

    #[test]
    fn constant_field_is_black() {
        let grid = SamplingGrid::new([0.0, 1.0, 0.0, 1.0], 3, 2).unwrap();
        let f = IndicatorField::new(grid, vec![7.0; 6], Method::Lsm, true).unwrap();
        let b = export_heatmap(&f, &["config=abc".into()]);
        assert!(b.starts_with(b"P5\n# config=abc\n3 2\n255\n"));
        assert_eq!(pixels(&b, 6), &[0; 6]);
    }
}

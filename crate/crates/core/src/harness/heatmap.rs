use std::fmt::Write as _;
use std::path::Path;

use crate::harness::sweep::HeatmapCell;
use crate::{Error, Result};

pub const CSV_HEADER: &str = "t_ms,eps,mean_e_corr_mev,std_mev,n_success,discrepancy_pct";

/// Discrepancy (%) at which the colour scale saturates to red.
const RED_AT_PCT: f64 = 50.0;

pub fn to_csv(cells: &[HeatmapCell]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for c in cells {
        w.serialize(c)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

pub fn from_csv(text: &str) -> Result<Vec<HeatmapCell>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    r.deserialize().map(|c| c.map_err(Error::from)).collect()
}

fn sorted_unique(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}

fn colour(c: &HeatmapCell) -> String {
    match c.discrepancy_pct {
        None => "#9e9e9e".into(),
        Some(d) => {
            let hue = 120.0 * (1.0 - (d / RED_AT_PCT).clamp(0.0, 1.0));
            format!("hsl({hue:.0},70%,55%)")
        }
    }
}

/// Standalone SVG: ε along x, T along y (largest on top), one `rect` per cell.
pub fn to_svg(cells: &[HeatmapCell]) -> String {
    let xs = sorted_unique(cells.iter().map(|c| c.eps).collect());
    let mut ys = sorted_unique(cells.iter().map(|c| c.t_ms).collect());
    ys.reverse();
    let (cw, ch, left, top) = (110.0, 60.0, 90.0, 40.0);
    let width = left + cw * xs.len() as f64 + 20.0;
    let height = top + ch * ys.len() as f64 + 50.0;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(s, r#"<text x="{left}" y="20" font-size="13">E_corr discrepancy vs statevector (T rows, ε columns)</text>"#);
    for c in cells {
        let i = xs.iter().position(|&x| x == c.eps).unwrap_or(0) as f64;
        let j = ys.iter().position(|&y| y == c.t_ms).unwrap_or(0) as f64;
        let (x, y) = (left + i * cw, top + j * ch);
        let _ = writeln!(
            s,
            r#"<rect class="cell" x="{x}" y="{y}" width="{cw}" height="{ch}" fill="{}" stroke="white"/>"#,
            colour(c)
        );
        let (l1, l2) = match (c.mean_e_corr_mev, c.std_mev, c.discrepancy_pct) {
            (Some(m), Some(sd), Some(d)) => (format!("{m:.4}±{sd:.4}"), format!("{d:.1}% (n={})", c.n_success)),
            _ => ("failed".to_string(), format!("n={}", c.n_success)),
        };
        let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{l1}</text>"#, x + cw / 2.0, y + ch / 2.0 - 4.0);
        let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{l2}</text>"#, x + cw / 2.0, y + ch / 2.0 + 12.0);
    }
    for (i, e) in xs.iter().enumerate() {
        let x = left + (i as f64 + 0.5) * cw;
        let _ = writeln!(s, r#"<text x="{x}" y="{}" text-anchor="middle">ε={e:e}</text>"#, top + ch * ys.len() as f64 + 18.0);
    }
    for (j, t) in ys.iter().enumerate() {
        let y = top + (j as f64 + 0.5) * ch + 4.0;
        let _ = writeln!(s, r#"<text x="{}" y="{y}" text-anchor="end">T={t} ms</text>"#, left - 6.0);
    }
    s.push_str("</svg>\n");
    s
}

pub fn emit_heatmap(cells: &[HeatmapCell], csv_path: impl AsRef<Path>, svg_path: impl AsRef<Path>) -> Result<()> {
    if cells.is_empty() {
        return Err(Error::Config("no cells to emit".into()));
    }
    std::fs::write(csv_path, to_csv(cells)?)?;
    std::fs::write(svg_path, to_svg(cells))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cell(t: f64, e: f64, m: Option<f64>) -> HeatmapCell {
        HeatmapCell {
            t_ms: t,
            eps: e,
            mean_e_corr_mev: m,
            std_mev: m.map(|_| 0.01),
            n_success: if m.is_some() { 3 } else { 1 },
            discrepancy_pct: m.map(|v| discrepancy(v)),
        }
    }

    fn discrepancy(v: f64) -> f64 {
        (v + 0.2).abs() / 0.2 * 100.0
    }

    #[test]
    fn single_cell_csv() {
        let text = to_csv(&[cell(5.0, 1e-4, Some(-0.19))]).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 2);
        assert_eq!(lines[0], CSV_HEADER);
    }

    #[test]
    fn csv_round_trip_with_failed_cell() {
        let cells = vec![cell(5.0, 1e-4, Some(-0.19)), cell(0.05, 1e-2, None)];
        assert_eq!(from_csv(&to_csv(&cells).unwrap()).unwrap(), cells);
    }

    #[test]
    fn svg_has_one_rect_per_cell() {
        let cells: Vec<HeatmapCell> = [0.05, 5.0]
            .iter()
            .flat_map(|&t| [1e-8, 1e-4, 1e-2].map(|e| cell(t, e, Some(-0.2))))
            .collect();
        let svg = to_svg(&cells);
        assert_eq!(svg.matches("<rect").count(), 6);
    }
}

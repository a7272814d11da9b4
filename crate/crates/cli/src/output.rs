//! CSV and SVG writers.

use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::run::Table;
use crate::CliError;

/// Shortest round-trip decimal: plain notation for moderate magnitudes,
/// exponent notation otherwise.
pub fn number(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || (1e-4..1e16).contains(&a) || !x.is_finite() {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

fn io(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

pub fn write_csv(dir: &Path, table: &Table, metadata: &[String]) -> Result<PathBuf, CliError> {
    let path = dir.join(format!("{}.csv", table.name));
    let file = File::create(&path).map_err(|e| io(&path, e))?;
    let mut out = BufWriter::new(file);
    for line in metadata.iter().chain(&table.notes) {
        writeln!(out, "# {line}").map_err(|e| io(&path, e))?;
    }
    let mut writer = csv::Writer::from_writer(out);
    writer.write_record(&table.header).map_err(|e| io(&path, e))?;
    for row in &table.rows {
        writer
            .write_record(row.iter().map(|&x| number(x)))
            .map_err(|e| io(&path, e))?;
    }
    writer.flush().map_err(|e| io(&path, e))?;
    Ok(path)
}

const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

/// Line plot of every column against the first. Carpets plot a few rows instead.
pub fn write_svg(dir: &Path, table: &Table) -> Result<PathBuf, CliError> {
    let path = dir.join(format!("{}.svg", table.name));
    let (w, h, margin) = (720.0, 440.0, 60.0);
    let carpet = table.name.starts_with("carpet");
    // (label, points)
    let mut series: Vec<(String, Vec<(f64, f64)>)> = Vec::new();
    if carpet {
        let n = table.rows.len();
        let positions: Vec<f64> = (0..table.header.len() - 1)
            .map(|j| j as f64 / (table.header.len() - 1) as f64)
            .collect();
        let mut picks = vec![0, n / 4, n / 2, n - 1];
        picks.dedup();
        for i in picks {
            let row = &table.rows[i];
            series.push((
                format!("t/T_T = {}", number(row[0])),
                positions.iter().copied().zip(row[1..].iter().copied()).collect(),
            ));
        }
    } else {
        for j in 1..table.header.len() {
            series.push((
                table.header[j].clone(),
                table.rows.iter().map(|r| (r[0], r[j])).collect(),
            ));
        }
    }
    let tx = |x: f64| if table.log_x && !carpet { x.log10() } else { x };
    let finite = series
        .iter()
        .flat_map(|(_, p)| p.iter())
        .filter(|(x, y)| tx(*x).is_finite() && y.is_finite());
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in finite {
        x0 = x0.min(tx(x));
        x1 = x1.max(tx(x));
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if !(x1 > x0) {
        x1 = x0 + 1.0;
    }
    if !(y1 > y0) {
        y1 = y0 + 1.0;
    }
    let px = |x: f64| margin + (tx(x) - x0) / (x1 - x0) * (w - 2.0 * margin);
    let py = |y: f64| h - margin - (y - y0) / (y1 - y0) * (h - 2.0 * margin);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#
    );
    let _ = writeln!(
        svg,
        r#"<polyline fill="none" stroke="black" points="{margin},{} {margin},{} {},{}"/>"#,
        margin,
        h - margin,
        w - margin,
        h - margin
    );
    let x_label = if carpet {
        "x / d".to_string()
    } else {
        table.header[0].clone()
    };
    let fmt_x = |v: f64| {
        if table.log_x && !carpet {
            number(10f64.powf(v))
        } else {
            number(v)
        }
    };
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" font-size="12" text-anchor="middle">{x_label}</text>"#,
        w / 2.0,
        h - 15.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="{margin}" y="{}" font-size="11" text-anchor="middle">{}</text>"#,
        h - margin + 16.0,
        fmt_x(x0)
    );
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" font-size="11" text-anchor="middle">{}</text>"#,
        w - margin,
        h - margin + 16.0,
        fmt_x(x1)
    );
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" font-size="11" text-anchor="end">{}</text>"#,
        margin - 4.0,
        h - margin,
        number(y0)
    );
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" font-size="11" text-anchor="end">{}</text>"#,
        margin - 4.0,
        margin + 4.0,
        number(y1)
    );
    for (k, (label, points)) in series.iter().enumerate() {
        let color = COLORS[k % COLORS.len()];
        let coords: Vec<String> = points
            .iter()
            .filter(|(x, y)| tx(*x).is_finite() && y.is_finite())
            .map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y)))
            .collect();
        let _ = writeln!(
            svg,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
            coords.join(" ")
        );
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" font-size="11" fill="{color}">{label}</text>"#,
            w - margin - 150.0,
            margin + 14.0 * k as f64
        );
    }
    svg.push_str("</svg>\n");
    std::fs::write(&path, svg).map_err(|e| io(&path, e))?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip() {
        for x in [
            0.0,
            1.0,
            -2.5,
            1e-25,
            3.0e-4,
            6.02214076e23,
            0.1 + 0.2,
            f64::MIN_POSITIVE,
            12345.678,
        ] {
            let s = number(x);
            assert_eq!(s.parse::<f64>().unwrap(), x, "{s}");
        }
        assert_eq!(number(1e-7), "1e-7");
        assert_eq!(number(0.25), "0.25");
    }
}

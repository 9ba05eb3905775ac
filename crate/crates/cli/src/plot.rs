//! Line plots of sweep CSVs as self-contained SVG.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Read;

use crate::error::CliError;

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 520.0;
const LEFT: f64 = 90.0;
const RIGHT: f64 = 190.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 70.0;
const TICKS: usize = 5;

const COLORS: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf"];
const DASHES: [&str; 4] = ["", "6 4", "2 3", "10 3 2 3"];

/// Unit label of a known column.
pub fn unit_of(column: &str) -> &'static str {
    match column {
        "omega1" | "nu" | "lambda" | "coupling_j" | "omega2" | "energy" | "min_gap" => "energy units",
        "chi" | "xi" | "eta" | "theta" => "rad",
        c if c.ends_with("_numeric") || c.ends_with("_analytic") || c.ends_with("_difference") => "rad",
        _ => "dimensionless",
    }
}

/// One polyline: a y column restricted to one level.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub column: String,
    pub level: Option<String>,
    pub points: Vec<(f64, f64)>,
}

/// Reads the CSV and splits each y column by the `level` column if present.
pub fn collect_series<R: Read>(source: R, x: &str, ys: &[String]) -> Result<Vec<Series>, CliError> {
    let mut reader = csv::Reader::from_reader(source);
    let headers = reader.headers()?.clone();
    let names: Vec<&str> = headers.iter().collect();
    let find = |c: &str| names.iter().position(|h| *h == c);
    let missing: Vec<&str> =
        std::iter::once(x).chain(ys.iter().map(String::as_str)).filter(|c| find(c).is_none()).collect();
    if !missing.is_empty() || ys.is_empty() {
        let what = if ys.is_empty() {
            "no y columns given".to_string()
        } else {
            format!("missing column(s) {}", missing.join(", "))
        };
        return Err(CliError::Config(format!("{what}; available columns: {}", names.join(", "))));
    }
    let xi = find(x).unwrap();
    let level_col = find("level");

    let mut series: BTreeMap<(usize, String), Series> = BTreeMap::new();
    let mut records = 0usize;
    for record in reader.records() {
        let record = record?;
        records += 1;
        let Some(xv) = parse(record.get(xi)) else { continue };
        let level = level_col.and_then(|i| record.get(i)).map(str::to_string);
        for (k, y) in ys.iter().enumerate() {
            let Some(yv) = parse(record.get(find(y).unwrap())) else { continue };
            let key = (k, level.clone().unwrap_or_default());
            series
                .entry(key)
                .or_insert_with(|| Series { column: y.clone(), level: level.clone(), points: Vec::new() })
                .points
                .push((xv, yv));
        }
    }
    if records == 0 {
        return Err(CliError::Config("CSV has a header but no data rows".into()));
    }
    let out: Vec<Series> = series.into_values().filter(|s| !s.points.is_empty()).collect();
    if out.is_empty() {
        return Err(CliError::Config("no plottable values in the requested columns".into()));
    }
    Ok(out)
}

fn parse(cell: Option<&str>) -> Option<f64> {
    cell.filter(|s| !s.is_empty()).and_then(|s| s.parse::<f64>().ok()).filter(|v| v.is_finite())
}

fn range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if hi - lo > 1e-12 * hi.abs().max(1.0) {
        (lo, hi)
    } else {
        (lo - 0.5, hi + 0.5)
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn tick_label(v: f64) -> String {
    if v == 0.0 {
        "0".into()
    } else if v.abs() >= 1e4 || v.abs() < 1e-3 {
        format!("{v:.2e}")
    } else {
        format!("{:.3}", v).trim_end_matches('0').trim_end_matches('.').to_string()
    }
}

/// Renders the series; returns the SVG document.
pub fn render_svg(series: &[Series], x: &str) -> String {
    let (x0, x1) = range(series.iter().flat_map(|s| s.points.iter().map(|p| p.0)));
    let (y0, y1) = range(series.iter().flat_map(|s| s.points.iter().map(|p| p.1)));
    let pw = WIDTH - LEFT - RIGHT;
    let ph = HEIGHT - TOP - BOTTOM;
    let sx = |v: f64| LEFT + (v - x0) / (x1 - x0) * pw;
    let sy = |v: f64| TOP + ph - (v - y0) / (y1 - y0) * ph;

    let mut ycols: Vec<&str> = Vec::new();
    for s in series {
        if !ycols.contains(&s.column.as_str()) {
            ycols.push(&s.column);
        }
    }
    let y_units: Vec<&str> = {
        let mut u: Vec<&str> = ycols.iter().map(|c| unit_of(c)).collect();
        u.dedup();
        u
    };
    let y_label = format!("{} [{}]", ycols.join(", "), y_units.join(", "));
    let x_label = format!("{x} [{}]", unit_of(x));

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(svg, r#"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#);
    for i in 0..=TICKS {
        let t = i as f64 / TICKS as f64;
        let xv = x0 + t * (x1 - x0);
        let yv = y0 + t * (y1 - y0);
        let (px, py) = (sx(xv), sy(yv));
        let _ = writeln!(
            svg,
            r##"<line x1="{px:.2}" y1="{:.2}" x2="{px:.2}" y2="{:.2}" stroke="#ccc"/><text x="{px:.2}" y="{:.2}" text-anchor="middle">{}</text>"##,
            TOP,
            TOP + ph,
            TOP + ph + 18.0,
            tick_label(xv)
        );
        let _ = writeln!(
            svg,
            r##"<line x1="{LEFT}" y1="{py:.2}" x2="{:.2}" y2="{py:.2}" stroke="#ccc"/><text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"##,
            LEFT + pw,
            LEFT - 6.0,
            py + 4.0,
            tick_label(yv)
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        LEFT + pw / 2.0,
        HEIGHT - 25.0,
        escape(&x_label)
    );
    let _ = writeln!(
        svg,
        r#"<text transform="translate(20 {:.2}) rotate(-90)" text-anchor="middle">{}</text>"#,
        TOP + ph / 2.0,
        escape(&y_label)
    );

    for (k, s) in series.iter().enumerate() {
        let color = COLORS[k % COLORS.len()];
        let col_idx = ycols.iter().position(|c| *c == s.column).unwrap_or(0);
        let dash = DASHES[col_idx % DASHES.len()];
        let mut pts = s.points.clone();
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        let path: Vec<String> = pts.iter().map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y))).collect();
        let dash_attr = if dash.is_empty() { String::new() } else { format!(r#" stroke-dasharray="{dash}""#) };
        let name = match &s.level {
            Some(l) => format!("{} level {l}", s.column),
            None => s.column.clone(),
        };
        let _ = writeln!(
            svg,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.5"{dash_attr} points="{}"><title>{}</title></polyline>"#,
            path.join(" "),
            escape(&name)
        );
        let ly = TOP + 14.0 + 18.0 * k as f64;
        let lx = LEFT + pw + 12.0;
        let _ = writeln!(
            svg,
            r#"<line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="2"{dash_attr}/><text x="{:.2}" y="{:.2}">{}</text>"#,
            lx + 24.0,
            lx + 30.0,
            ly + 4.0,
            escape(&name)
        );
    }
    svg.push_str("</svg>\n");
    svg
}

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;

use clap::Args;

use crate::error::CliError;

#[derive(Args, Debug)]
pub struct PlotArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    x: String,
    #[arg(long)]
    y: String,
    /// Columns whose values name a series; defaults to those of task, method
    /// and dim that are present.
    #[arg(long, value_delimiter = ',')]
    group: Option<Vec<String>>,
    #[arg(long)]
    title: Option<String>,
    #[arg(long)]
    out: PathBuf,
}

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 480.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 180.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;
const COLORS: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

type Series = BTreeMap<String, Vec<(f64, f64)>>;

fn column(headers: &csv::StringRecord, name: &str) -> Result<usize, CliError> {
    headers
        .iter()
        .position(|h| h == name)
        .ok_or_else(|| CliError::Usage(format!("no column named {name:?}")))
}

fn read_series(args: &PlotArgs) -> Result<Series, CliError> {
    let mut rdr = csv::Reader::from_path(&args.input)?;
    let headers = rdr.headers()?.clone();
    let xi = column(&headers, &args.x)?;
    let yi = column(&headers, &args.y)?;
    let group: Vec<usize> = match &args.group {
        Some(cols) => cols.iter().map(|c| column(&headers, c)).collect::<Result<_, _>>()?,
        None => ["task", "method", "dim"]
            .iter()
            .filter_map(|c| headers.iter().position(|h| h == *c))
            .filter(|&i| i != xi && i != yi)
            .collect(),
    };
    let mut series = Series::new();
    for (r, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let num = |i: usize| -> Result<f64, CliError> {
            rec[i].trim().parse().map_err(|_| {
                CliError::Library(fastcdf::Error::Parse(format!(
                    "row {}: {:?} is not a number",
                    r + 1,
                    &rec[i]
                )))
            })
        };
        let (x, y) = (num(xi)?, num(yi)?);
        if x > 0.0 && y > 0.0 {
            let key = group
                .iter()
                .map(|&i| format!("{}={}", &headers[i], &rec[i]))
                .collect::<Vec<_>>()
                .join(" ");
            series.entry(key).or_default().push((x, y));
        }
    }
    for pts in series.values_mut() {
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    }
    Ok(series)
}

/// Decade-aligned `[lo, hi]` in log10 units.
fn log_range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
        (lo.min(v.log10()), hi.max(v.log10()))
    });
    let (lo, hi) = (lo.floor(), hi.ceil());
    if hi > lo {
        (lo, hi)
    } else {
        (lo, lo + 1.0)
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Static SVG with logarithmic axes, one polyline per series.
pub fn render(series: &Series, x_label: &str, y_label: &str, title: &str) -> String {
    let all = || series.values().flatten();
    let (x0, x1) = log_range(all().map(|p| p.0));
    let (y0, y1) = log_range(all().map(|p| p.1));
    let pw = WIDTH - LEFT - RIGHT;
    let ph = HEIGHT - TOP - BOTTOM;
    let sx = |x: f64| LEFT + (x.log10() - x0) / (x1 - x0) * pw;
    let sy = |y: f64| TOP + ph - (y.log10() - y0) / (y1 - y0) * ph;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="24" text-anchor="middle" font-size="14">{}</text>"#,
        LEFT + pw / 2.0,
        escape(title)
    );
    for e in x0 as i32..=x1 as i32 {
        let x = LEFT + (e as f64 - x0) / (x1 - x0) * pw;
        let _ = writeln!(
            svg,
            r##"<line x1="{x:.1}" y1="{TOP}" x2="{x:.1}" y2="{:.1}" stroke="#ddd"/><text x="{x:.1}" y="{:.1}" text-anchor="middle">1e{e}</text>"##,
            TOP + ph,
            TOP + ph + 18.0
        );
    }
    for e in y0 as i32..=y1 as i32 {
        let y = TOP + ph - (e as f64 - y0) / (y1 - y0) * ph;
        let _ = writeln!(
            svg,
            r##"<line x1="{LEFT}" y1="{y:.1}" x2="{:.1}" y2="{y:.1}" stroke="#ddd"/><text x="{:.1}" y="{:.1}" text-anchor="end">1e{e}</text>"##,
            LEFT + pw,
            LEFT - 6.0,
            y + 4.0
        );
    }
    let _ = writeln!(
        svg,
        r#"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
    );
    let _ = writeln!(
        svg,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
        LEFT + pw / 2.0,
        HEIGHT - 16.0,
        escape(x_label)
    );
    let _ = writeln!(
        svg,
        r#"<text x="20" y="{:.1}" text-anchor="middle" transform="rotate(-90 20 {:.1})">{}</text>"#,
        TOP + ph / 2.0,
        TOP + ph / 2.0,
        escape(y_label)
    );
    for (i, (name, pts)) in series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let coords: Vec<String> = pts.iter().map(|&(x, y)| format!("{:.1},{:.1}", sx(x), sy(y))).collect();
        let _ = writeln!(
            svg,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="2"/>"#,
            coords.join(" ")
        );
        for &(x, y) in pts {
            let _ = writeln!(svg, r#"<circle cx="{:.1}" cy="{:.1}" r="3" fill="{color}"/>"#, sx(x), sy(y));
        }
        let ly = TOP + 10.0 + 18.0 * i as f64;
        let lx = LEFT + pw + 12.0;
        let _ = writeln!(
            svg,
            r#"<line x1="{lx:.1}" y1="{ly:.1}" x2="{:.1}" y2="{ly:.1}" stroke="{color}" stroke-width="2"/><text x="{:.1}" y="{:.1}">{}</text>"#,
            lx + 20.0,
            lx + 26.0,
            ly + 4.0,
            escape(if name.is_empty() { "series" } else { name })
        );
    }
    svg.push_str("</svg>\n");
    svg
}

pub fn run(args: &PlotArgs) -> Result<(), CliError> {
    let series = read_series(args)?;
    if series.is_empty() {
        return Err(CliError::Usage("no positive data points to plot".into()));
    }
    let title = args.title.clone().unwrap_or_else(|| format!("{} vs {}", args.y, args.x));
    std::fs::write(&args.out, render(&series, &args.x, &args.y, &title))?;
    Ok(())
}

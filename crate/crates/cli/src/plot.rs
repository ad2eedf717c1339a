//! SVG figures. Every plot has a CSV twin, so these stay deliberately plain.

use std::path::Path;

use anyhow::{anyhow, Result};
use plotters::prelude::*;

pub enum Mark {
    Line,
    Dots,
}

pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
    pub mark: Mark,
}

impl Series {
    pub fn line(label: impl Into<String>, points: Vec<(f64, f64)>) -> Self {
        Self { label: label.into(), points, mark: Mark::Line }
    }

    pub fn dots(label: impl Into<String>, points: Vec<(f64, f64)>) -> Self {
        Self { label: label.into(), points, mark: Mark::Dots }
    }
}

const PALETTE: [RGBColor; 8] = [
    RGBColor(31, 119, 180),
    RGBColor(214, 39, 40),
    RGBColor(44, 160, 44),
    RGBColor(148, 103, 189),
    RGBColor(255, 127, 14),
    RGBColor(140, 86, 75),
    RGBColor(227, 119, 194),
    RGBColor(23, 190, 207),
];

fn bounds(series: &[Series]) -> (f64, f64, f64, f64) {
    let mut b = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for s in series {
        for &(x, y) in &s.points {
            if x.is_finite() && y.is_finite() {
                b = (b.0.min(x), b.1.max(x), b.2.min(y), b.3.max(y));
            }
        }
    }
    if !b.0.is_finite() {
        return (0.0, 1.0, 0.0, 1.0);
    }
    let pad = |lo: f64, hi: f64| {
        let w = if hi > lo { 0.04 * (hi - lo) } else { 0.5 };
        (lo - w, hi + w)
    };
    let (x0, x1) = pad(b.0, b.1);
    let (y0, y1) = pad(b.2, b.3);
    (x0, x1, y0, y1)
}

/// Line/scatter plot. With `log_y` the values are plotted as `log10(y)`.
pub fn xy_plot(path: &Path, title: &str, x_label: &str, y_label: &str, series: Vec<Series>, log_y: bool) -> Result<()> {
    let series: Vec<Series> = if log_y {
        series
            .into_iter()
            .map(|s| Series {
                points: s.points.into_iter().filter(|p| p.1 > 0.0).map(|(x, y)| (x, y.log10())).collect(),
                ..s
            })
            .collect()
    } else {
        series
    };
    let y_label = if log_y { format!("log10 {y_label}") } else { y_label.to_string() };
    let (x0, x1, y0, y1) = bounds(&series);
    let root = SVGBackend::new(path, (720, 520)).into_drawing_area();
    root.fill(&WHITE).map_err(|e| anyhow!("{e}"))?;
    let mut chart = ChartBuilder::on(&root)
        .caption(title, ("sans-serif", 18))
        .margin(12)
        .x_label_area_size(40)
        .y_label_area_size(56)
        .build_cartesian_2d(x0..x1, y0..y1)
        .map_err(|e| anyhow!("{e}"))?;
    chart
        .configure_mesh()
        .x_desc(x_label)
        .y_desc(y_label)
        .draw()
        .map_err(|e| anyhow!("{e}"))?;
    for (k, s) in series.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        match s.mark {
            Mark::Line => {
                chart
                    .draw_series(LineSeries::new(s.points.iter().copied(), color.stroke_width(2)))
                    .map_err(|e| anyhow!("{e}"))?
                    .label(s.label.clone())
                    .legend(move |(x, y)| PathElement::new(vec![(x, y), (x + 16, y)], color));
            }
            Mark::Dots => {
                chart
                    .draw_series(s.points.iter().map(|&p| Circle::new(p, 1, color.filled())))
                    .map_err(|e| anyhow!("{e}"))?
                    .label(s.label.clone())
                    .legend(move |(x, y)| Circle::new((x + 8, y), 3, color.filled()));
            }
        }
    }
    if series.iter().any(|s| !s.label.is_empty()) {
        chart
            .configure_series_labels()
            .background_style(WHITE.mix(0.8))
            .border_style(BLACK)
            .draw()
            .map_err(|e| anyhow!("{e}"))?;
    }
    root.present().map_err(|e| anyhow!("{e}"))?;
    Ok(())
}

fn ramp(t: f64) -> RGBColor {
    // dark blue → yellow
    let t = t.clamp(0.0, 1.0);
    let lerp = |a: f64, b: f64| (a + (b - a) * t).round() as u8;
    RGBColor(lerp(40.0, 250.0), lerp(30.0, 220.0), lerp(120.0, 40.0))
}

/// Cell map of `values[i][j]` at `(xs[j], ys[i])`. Censored cells are grey
/// with a cross; `None` cells (failed points) are left white.
pub fn heatmap(
    path: &Path,
    title: &str,
    x_label: &str,
    y_label: &str,
    xs: &[f64],
    ys: &[f64],
    values: &[Vec<Option<f64>>],
    censored: &[Vec<bool>],
) -> Result<()> {
    let (nx, ny) = (xs.len(), ys.len());
    let (lo, hi) = values
        .iter()
        .flatten()
        .flatten()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let span = if hi > lo { hi - lo } else { 1.0 };
    let root = SVGBackend::new(path, (720, 600)).into_drawing_area();
    root.fill(&WHITE).map_err(|e| anyhow!("{e}"))?;
    let mut chart = ChartBuilder::on(&root)
        .caption(title, ("sans-serif", 18))
        .margin(12)
        .x_label_area_size(40)
        .y_label_area_size(56)
        .build_cartesian_2d(0.0..nx as f64, 0.0..ny as f64)
        .map_err(|e| anyhow!("{e}"))?;
    let xs_l = xs.to_vec();
    let ys_l = ys.to_vec();
    chart
        .configure_mesh()
        .disable_mesh()
        .x_desc(x_label)
        .y_desc(y_label)
        .x_labels(nx.min(12))
        .y_labels(ny.min(12))
        .x_label_formatter(&move |v| xs_l.get(v.floor() as usize).map_or(String::new(), |x| format!("{x}")))
        .y_label_formatter(&move |v| ys_l.get(v.floor() as usize).map_or(String::new(), |y| format!("{y}")))
        .draw()
        .map_err(|e| anyhow!("{e}"))?;
    for i in 0..ny {
        for j in 0..nx {
            let (x, y) = (j as f64, i as f64);
            let cell = [(x, y), (x + 1.0, y + 1.0)];
            if censored[i][j] {
                let grey = RGBColor(190, 190, 190);
                chart.draw_series(std::iter::once(Rectangle::new(cell, grey.filled()))).map_err(|e| anyhow!("{e}"))?;
                chart
                    .draw_series([
                        PathElement::new(vec![(x, y), (x + 1.0, y + 1.0)], BLACK),
                        PathElement::new(vec![(x, y + 1.0), (x + 1.0, y)], BLACK),
                    ])
                    .map_err(|e| anyhow!("{e}"))?;
            } else if let Some(v) = values[i][j] {
                let c = ramp((v - lo) / span);
                chart.draw_series(std::iter::once(Rectangle::new(cell, c.filled()))).map_err(|e| anyhow!("{e}"))?;
            }
            if let Some(v) = values[i][j] {
                let label = if censored[i][j] { format!(">{v}") } else { format!("{v}") };
                chart
                    .draw_series(std::iter::once(Text::new(label, (x + 0.2, y + 0.6), ("sans-serif", 12))))
                    .map_err(|e| anyhow!("{e}"))?;
            }
        }
    }
    root.present().map_err(|e| anyhow!("{e}"))?;
    Ok(())
}

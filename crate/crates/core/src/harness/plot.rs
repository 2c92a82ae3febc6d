//! SVG line charts of study results.

use std::path::Path;

use plotters::prelude::*;

use super::results::ResultTable;
use crate::error::{Error, Result};

/// BER values below this are drawn on the floor of the log axis.
pub const BER_FLOOR: f64 = 1e-6;

const COLORS: [RGBColor; 6] = [
    RGBColor(31, 119, 180),
    RGBColor(214, 39, 40),
    RGBColor(44, 160, 44),
    RGBColor(255, 127, 14),
    RGBColor(148, 103, 189),
    RGBColor(140, 86, 75),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    Ber,
    DataRate,
}

fn series_points(table: &ResultTable, metric: Metric) -> Vec<(String, Vec<(f64, f64)>)> {
    table
        .series()
        .into_iter()
        .map(|s| {
            let mut pts: Vec<(f64, f64)> = table
                .rows
                .iter()
                .filter(|r| r.series() == s && r.snr_db.is_finite())
                .map(|r| match metric {
                    Metric::Ber => (r.snr_db, r.ber.max(BER_FLOOR)),
                    Metric::DataRate => (r.snr_db, r.data_rate),
                })
                .collect();
            pts.sort_by(|a, b| a.0.total_cmp(&b.0));
            (s, pts)
        })
        .collect()
}

fn draw_err<E: std::error::Error + Send + Sync + 'static>(path: &Path) -> impl Fn(E) -> Error + '_ {
    move |e| Error::io(path, std::io::Error::other(e.to_string()))
}

/// Draws one metric against SNR, one line per series.
pub fn plot_metric(table: &ResultTable, metric: Metric, title: &str, path: &Path) -> Result<()> {
    let series = series_points(table, metric);
    let xs = series.iter().flat_map(|(_, p)| p.iter().map(|q| q.0));
    let (mut x0, mut x1) = xs.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(x), b.max(x)));
    if !x0.is_finite() {
        (x0, x1) = (0.0, 1.0);
    }
    if x0 == x1 {
        x0 -= 1.0;
        x1 += 1.0;
    }
    let err = draw_err(path);
    let root = SVGBackend::new(path, (720, 480)).into_drawing_area();
    root.fill(&WHITE).map_err(&err)?;

    let mut builder = ChartBuilder::on(&root);
    builder.caption(title, ("sans-serif", 20)).margin(12).x_label_area_size(40).y_label_area_size(60);

    match metric {
        Metric::Ber => {
            let ymax = series
                .iter()
                .flat_map(|(_, p)| p.iter().map(|q| q.1))
                .fold(BER_FLOOR * 10.0, f64::max)
                .min(1.0);
            let mut chart = builder
                .build_cartesian_2d(x0..x1, (BER_FLOOR..ymax * 1.5).log_scale())
                .map_err(&err)?;
            chart
                .configure_mesh()
                .x_desc("SNR (dB)")
                .y_desc("BER")
                .y_label_formatter(&|v| format!("{v:.0e}"))
                .draw()
                .map_err(&err)?;
            for (i, (name, pts)) in series.iter().enumerate() {
                let color = COLORS[i % COLORS.len()];
                chart
                    .draw_series(LineSeries::new(pts.iter().copied(), color.stroke_width(2)))
                    .map_err(&err)?
                    .label(name.as_str())
                    .legend(move |(x, y)| PathElement::new(vec![(x, y), (x + 16, y)], color.stroke_width(2)));
                chart
                    .draw_series(pts.iter().map(|&p| Circle::new(p, 3, color.filled())))
                    .map_err(&err)?;
            }
            chart
                .configure_series_labels()
                .background_style(WHITE.mix(0.8))
                .border_style(BLACK)
                .draw()
                .map_err(&err)?;
        }
        Metric::DataRate => {
            let mut chart = builder.build_cartesian_2d(x0..x1, 0.0..1.0).map_err(&err)?;
            chart
                .configure_mesh()
                .x_desc("SNR (dB)")
                .y_desc("data rate fraction")
                .draw()
                .map_err(&err)?;
            for (i, (name, pts)) in series.iter().enumerate() {
                let color = COLORS[i % COLORS.len()];
                chart
                    .draw_series(LineSeries::new(pts.iter().copied(), color.stroke_width(2)))
                    .map_err(&err)?
                    .label(name.as_str())
                    .legend(move |(x, y)| PathElement::new(vec![(x, y), (x + 16, y)], color.stroke_width(2)));
                chart
                    .draw_series(pts.iter().map(|&p| Circle::new(p, 3, color.filled())))
                    .map_err(&err)?;
            }
            chart
                .configure_series_labels()
                .background_style(WHITE.mix(0.8))
                .border_style(BLACK)
                .draw()
                .map_err(&err)?;
        }
    }
    root.present().map_err(&err)?;
    Ok(())
}

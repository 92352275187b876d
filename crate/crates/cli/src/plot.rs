//! SVG convergence plots: |J error| on a log axis against epochs, with a
//! dashed vertical marker at every sampling event.

use goalpinn_core::adaptive::{Event, Trace};
use plotters::prelude::*;

use crate::{CliError, CliResult};

#[derive(Clone, Debug, PartialEq)]
pub struct Series {
    pub label: String,
    /// `(epoch, |J error|)`, epochs increasing.
    pub points: Vec<(f64, f64)>,
}

/// Means of `|J error|` over consecutive blocks of `window` rows, placed at
/// the last epoch of each block. A trailing partial block is kept.
pub fn block_average(trace: &Trace, window: usize) -> Vec<(f64, f64)> {
    let window = window.max(1);
    trace
        .rows
        .chunks(window)
        .map(|block| {
            let mean = block.iter().map(|r| r.j_error.abs()).sum::<f64>() / block.len() as f64;
            (block[block.len() - 1].epoch as f64, mean)
        })
        .collect()
}

/// Mean `|J error|` over the last `window` rows.
pub fn final_abs_error(trace: &Trace, window: usize) -> Option<f64> {
    let n = trace.rows.len();
    if n == 0 {
        return None;
    }
    let tail = &trace.rows[n - window.clamp(1, n)..];
    Some(tail.iter().map(|r| r.j_error.abs()).sum::<f64>() / tail.len() as f64)
}

/// The sampling strategy a trace was produced with, as far as its event
/// column tells.
pub fn default_label(trace: &Trace) -> String {
    if trace.rows.iter().any(|r| r.event == Event::Refine) {
        "adaptive (dwr-refine)".into()
    } else if trace.rows.iter().any(|r| r.event == Event::Resample) {
        "adaptive (dwr-resample)".into()
    } else {
        "standard (uniform)".into()
    }
}

const COLORS: [RGBColor; 4] = [RGBColor(31, 119, 180), RGBColor(255, 127, 14), RGBColor(44, 160, 44), RGBColor(148, 103, 189)];

/// Renders the series into an SVG document. The output depends only on the
/// arguments.
pub fn render_svg(series: &[Series], events: &[usize], title: &str) -> CliResult<String> {
    let values = series.iter().flat_map(|s| s.points.iter().map(|p| p.1));
    let positive: Vec<f64> = values.filter(|v| *v > 0.0 && v.is_finite()).collect();
    let (mut lo, mut hi) = positive
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    if positive.is_empty() {
        lo = 1e-6;
        hi = 1.0;
    }
    if hi <= lo {
        hi = lo * 10.0;
    }
    let (lo, hi) = (lo / 2.0, hi * 2.0);
    let x_max = series
        .iter()
        .flat_map(|s| s.points.iter().map(|p| p.0))
        .fold(1.0f64, f64::max);

    let mut svg = String::new();
    {
        let backend = SVGBackend::with_string(&mut svg, (960, 540));
        let root = backend.into_drawing_area();
        let draw = |e: DrawingAreaErrorKind<_>| CliError::Other(anyhow::anyhow!("plot: {e}"));
        root.fill(&WHITE).map_err(draw)?;
        let mut chart = ChartBuilder::on(&root)
            .caption(title, ("sans-serif", 22))
            .margin(12)
            .x_label_area_size(40)
            .y_label_area_size(70)
            .build_cartesian_2d(0f64..x_max, (lo..hi).log_scale())
            .map_err(draw)?;
        chart
            .configure_mesh()
            .x_desc("epoch")
            .y_desc("|J(u) - J(u_θ)|")
            .y_label_formatter(&|v| format!("{v:.0e}"))
            .draw()
            .map_err(draw)?;
        for &e in events {
            let x = e as f64;
            chart
                .draw_series(DashedLineSeries::new(vec![(x, lo), (x, hi)], 8, 6, RED.stroke_width(2)))
                .map_err(draw)?;
        }
        for (k, s) in series.iter().enumerate() {
            let color = COLORS[k % COLORS.len()];
            let pts: Vec<(f64, f64)> = s.points.iter().map(|&(x, y)| (x, y.max(lo))).collect();
            chart
                .draw_series(LineSeries::new(pts, color.stroke_width(2)))
                .map_err(draw)?
                .label(s.label.clone())
                .legend(move |(x, y)| PathElement::new(vec![(x, y), (x + 20, y)], color.stroke_width(2)));
        }
        chart
            .configure_series_labels()
            .background_style(WHITE.mix(0.8))
            .border_style(BLACK)
            .position(SeriesLabelPosition::UpperRight)
            .draw()
            .map_err(draw)?;
        root.present().map_err(draw)?;
    }
    Ok(svg)
}

/// Plot of one or more traces, events taken from the traces themselves.
pub fn plot_traces(traces: &[(String, &Trace)], avg_window: usize, title: &str) -> CliResult<String> {
    let series: Vec<Series> = traces
        .iter()
        .map(|(label, t)| Series {
            label: label.clone(),
            points: block_average(t, avg_window),
        })
        .collect();
    let mut events: Vec<usize> = traces.iter().flat_map(|(_, t)| t.event_epochs()).collect();
    events.sort_unstable();
    events.dedup();
    render_svg(&series, &events, title)
}

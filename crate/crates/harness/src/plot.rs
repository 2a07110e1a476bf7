//! Static SVG figures.

use std::path::{Path, PathBuf};

use plotters::prelude::*;
use wevo::metrics::layer_mean_avg_l1;
use wevo::{score_snapshot, DenseStore};
use wevo_nn::checkpoint;

use crate::error::HarnessError;
use crate::run::RunResult;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum PlotKind {
    Convergence,
    AlphaSweep,
    NormHistogram,
}

fn plot_err(e: impl std::fmt::Display) -> HarnessError {
    HarnessError::Plot(e.to_string())
}

fn padded(lo: f64, hi: f64) -> std::ops::Range<f64> {
    let span = (hi - lo).abs().max(1e-6);
    (lo - 0.05 * span)..(hi + 0.05 * span)
}

/// Test accuracy against epoch, one labelled curve per run.
pub fn convergence(results: &[RunResult], out: &Path) -> Result<PathBuf, HarnessError> {
    if results.is_empty() {
        return Err(HarnessError::EmptyResultSet);
    }
    let max_epoch = results.iter().map(|r| r.epochs.len()).max().unwrap_or(1).max(1);
    let accs = results.iter().flat_map(|r| r.epochs.iter().map(|e| 100.0 * f64::from(e.test_acc)));
    let (lo, hi) = accs.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    let root = SVGBackend::new(out, (900, 600)).into_drawing_area();
    root.fill(&WHITE).map_err(plot_err)?;
    let mut chart = ChartBuilder::on(&root)
        .caption("Convergence", ("sans-serif", 24))
        .margin(16)
        .x_label_area_size(40)
        .y_label_area_size(56)
        .build_cartesian_2d(1f64..max_epoch as f64, padded(lo, hi))
        .map_err(plot_err)?;
    chart
        .configure_mesh()
        .x_desc("epoch")
        .y_desc("test accuracy (%)")
        .draw()
        .map_err(plot_err)?;
    for (i, r) in results.iter().enumerate() {
        let colour = Palette99::pick(i).to_rgba();
        let points = r.epochs.iter().map(|e| (e.epoch as f64, 100.0 * f64::from(e.test_acc)));
        chart
            .draw_series(LineSeries::new(points, colour.stroke_width(2)))
            .map_err(plot_err)?
            .label(format!("{} (seed {})", r.label, r.seed))
            .legend(move |(x, y)| PathElement::new(vec![(x, y), (x + 20, y)], colour.stroke_width(2)));
    }
    chart
        .configure_series_labels()
        .background_style(WHITE.mix(0.8))
        .border_style(BLACK)
        .draw()
        .map_err(plot_err)?;
    root.present().map_err(plot_err)?;
    Ok(out.to_path_buf())
}

/// Final test accuracy against fixed α, with the adaptive run drawn as a
/// horizontal reference line.
pub fn alpha_sweep(results: &[RunResult], out: &Path) -> Result<PathBuf, HarnessError> {
    let mut fixed: Vec<(f64, f64)> = results
        .iter()
        .filter_map(|r| r.alpha.parse::<f64>().ok().map(|a| (a, 100.0 * f64::from(r.final_test_acc))))
        .collect();
    fixed.sort_by(|a, b| a.0.total_cmp(&b.0));
    let adaptive = results
        .iter()
        .find(|r| r.alpha == "adaptive")
        .map(|r| 100.0 * f64::from(r.final_test_acc));
    if fixed.is_empty() && adaptive.is_none() {
        return Err(HarnessError::EmptyResultSet);
    }
    let all = fixed.iter().map(|p| p.1).chain(adaptive);
    let (lo, hi) = all.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    let root = SVGBackend::new(out, (900, 600)).into_drawing_area();
    root.fill(&WHITE).map_err(plot_err)?;
    let mut chart = ChartBuilder::on(&root)
        .caption("Coefficient sweep", ("sans-serif", 24))
        .margin(16)
        .x_label_area_size(40)
        .y_label_area_size(56)
        .build_cartesian_2d(-0.05f64..1.05, padded(lo, hi))
        .map_err(plot_err)?;
    chart
        .configure_mesh()
        .x_desc("fixed alpha")
        .y_desc("final test accuracy (%)")
        .draw()
        .map_err(plot_err)?;
    chart
        .draw_series(LineSeries::new(fixed.iter().copied(), BLUE.stroke_width(2)))
        .map_err(plot_err)?
        .label("fixed alpha")
        .legend(|(x, y)| PathElement::new(vec![(x, y), (x + 20, y)], BLUE.stroke_width(2)));
    chart
        .draw_series(fixed.iter().map(|&p| Circle::new(p, 4, BLUE.filled())))
        .map_err(plot_err)?;
    if let Some(a) = adaptive {
        chart
            .draw_series(LineSeries::new(vec![(-0.05, a), (1.05, a)], RED.stroke_width(2)))
            .map_err(plot_err)?
            .label("adaptive")
            .legend(|(x, y)| PathElement::new(vec![(x, y), (x + 20, y)], RED.stroke_width(2)));
        chart
            .draw_series(std::iter::once(TriangleMarker::new((0.5, a), 7, RED.filled())))
            .map_err(plot_err)?;
    }
    chart
        .configure_series_labels()
        .background_style(WHITE.mix(0.8))
        .border_style(BLACK)
        .draw()
        .map_err(plot_err)?;
    root.present().map_err(plot_err)?;
    Ok(out.to_path_buf())
}

/// Per-layer mean of the average ℓ1 norm, recomputed from a checkpoint.
/// Returns `(layer name, value)` in layer order.
pub fn layer_norms(dir: &Path, stem: &str) -> Result<Vec<(String, f64)>, HarnessError> {
    let (manifest, values) = checkpoint::read(dir, stem)?;
    let mut store = DenseStore::<f64>::new();
    for (spec, entry) in manifest.layers.iter().zip(&manifest.params) {
        let slice = values[entry.offset..entry.offset + entry.len].iter().map(|&v| f64::from(v)).collect();
        store.push_spec(spec.clone(), slice)?;
    }
    let scores = score_snapshot(&store)?;
    Ok(layer_mean_avg_l1(&scores)
        .into_iter()
        .map(|(id, mean)| (manifest.layers[id].name.clone(), mean))
        .collect())
}

pub fn norm_histogram(dir: &Path, stem: &str, out: &Path) -> Result<PathBuf, HarnessError> {
    let norms = layer_norms(dir, stem)?;
    if norms.is_empty() {
        return Err(HarnessError::EmptyResultSet);
    }
    let hi = norms.iter().map(|n| n.1).fold(0.0, f64::max).max(1e-12);
    let root = SVGBackend::new(out, (1000, 600)).into_drawing_area();
    root.fill(&WHITE).map_err(plot_err)?;
    let names: Vec<String> = norms.iter().map(|n| n.0.clone()).collect();
    let mut chart = ChartBuilder::on(&root)
        .caption(format!("Mean average l1 norm per layer ({stem})"), ("sans-serif", 24))
        .margin(16)
        .x_label_area_size(40)
        .y_label_area_size(64)
        .build_cartesian_2d(0f64..norms.len() as f64, 0f64..hi * 1.05)
        .map_err(plot_err)?;
    chart
        .configure_mesh()
        .disable_x_mesh()
        .x_desc("layer")
        .y_desc("mean average l1 norm")
        .x_labels(norms.len().min(40))
        .x_label_formatter(&|x| names.get(*x as usize).cloned().unwrap_or_default())
        .draw()
        .map_err(plot_err)?;
    chart
        .draw_series(
            norms
                .iter()
                .enumerate()
                .map(|(i, n)| Rectangle::new([(i as f64 + 0.1, 0.0), (i as f64 + 0.9, n.1)], BLUE.mix(0.7).filled())),
        )
        .map_err(plot_err)?;
    root.present().map_err(plot_err)?;
    Ok(out.to_path_buf())
}

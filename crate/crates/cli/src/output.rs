use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rolldisc_core::analytics::densities::DensityModel;
use rolldisc_core::stats::HistogramReport;
use rolldisc_core::{Error, Result};

/// Seventeen significant digits, enough to round-trip any `f64`.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::InvalidArgument(format!("{}: {e}", path.display())))
}

pub fn histogram_csv(report: &HistogramReport) -> String {
    let mut out = String::from("bin_center,empirical_density,model_density\n");
    let centers = report.centers();
    let empirical = report.empirical_density();
    for ((c, e), m) in centers.iter().zip(&empirical).zip(&report.model_density) {
        let _ = writeln!(out, "{},{},{}", fmt17(*c), fmt17(*e), fmt17(*m));
    }
    out
}

pub fn write_histogram_csv(path: &Path, report: &HistogramReport) -> Result<()> {
    write_file(path, &histogram_csv(report))
}

/// Bars for the empirical density, a curve for the model.
pub fn density_svg(report: &HistogramReport, model: &DensityModel) -> String {
    const W: f64 = 640.0;
    const H: f64 = 400.0;
    const PAD: f64 = 40.0;
    let (lo, hi) = (model.domain.lo, model.domain.hi);
    let empirical = report.empirical_density();
    let curve: Vec<(f64, f64)> = (0..=200)
        .map(|i| {
            let w = lo + (hi - lo) * i as f64 / 200.0;
            (w, model.pdf(w))
        })
        .collect();
    let top = empirical
        .iter()
        .copied()
        .chain(curve.iter().map(|p| p.1))
        .fold(0.0, f64::max)
        .max(1e-12)
        * 1.05;
    let sx = |w: f64| PAD + (w - lo) / (hi - lo) * (W - 2.0 * PAD);
    let sy = |d: f64| H - PAD - d / top * (H - 2.0 * PAD);

    let mut svg = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\">\n"
    );
    let _ = writeln!(
        svg,
        "<rect x=\"0\" y=\"0\" width=\"{W}\" height=\"{H}\" fill=\"white\"/>"
    );
    for (i, d) in empirical.iter().enumerate() {
        let (a, b) = (report.bin_edges[i], report.bin_edges[i + 1]);
        let _ = writeln!(
            svg,
            "<rect x=\"{:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"#9ecae1\"/>",
            sx(a),
            sy(*d),
            sx(b) - sx(a),
            sy(0.0) - sy(*d)
        );
    }
    let points: Vec<String> = curve
        .iter()
        .map(|&(w, d)| format!("{:.2},{:.2}", sx(w), sy(d)))
        .collect();
    let _ = writeln!(
        svg,
        "<polyline points=\"{}\" fill=\"none\" stroke=\"#d62728\" stroke-width=\"2\"/>",
        points.join(" ")
    );
    let _ = writeln!(
        svg,
        "<line x1=\"{PAD}\" y1=\"{0:.2}\" x2=\"{1:.2}\" y2=\"{0:.2}\" stroke=\"black\"/>",
        sy(0.0),
        W - PAD
    );
    let _ = writeln!(
        svg,
        "<text x=\"{PAD}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"12\">omega in [{lo:.4}, {hi:.4}], {} samples, KS {:.4}, model {}</text>",
        PAD * 0.6,
        report.n_samples,
        report.ks_statistic,
        report.reference
    );
    svg.push_str("</svg>\n");
    svg
}

pub fn write_density_svg(path: &Path, report: &HistogramReport, model: &DensityModel) -> Result<()> {
    write_file(path, &density_svg(report, model))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rolldisc_core::analytics::densities::{DensityKind, Domain};

    #[test]
    fn seventeen_digits_round_trip() {
        for x in [0.1, std::f64::consts::PI, -1.0e-300, 123456.789] {
            let s = fmt17(x);
            assert_eq!(s.parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn histogram_csv_has_one_row_per_bin() {
        let model = DensityModel::new(DensityKind::SlideHard, Domain::FULL).unwrap();
        let samples: Vec<f64> = (1..200).map(|i| i as f64 * 0.0157).collect();
        let report = HistogramReport::build(&samples, &model, 12, &[]).unwrap();
        let csv = histogram_csv(&report);
        assert_eq!(csv.lines().count(), 13);
        assert!(density_svg(&report, &model).starts_with("<svg"));
    }
}

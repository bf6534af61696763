use std::collections::BTreeMap;
use std::fs::File;
use std::path::Path;

use plotters::prelude::*;

use super::AggregateRow;
use crate::error::{Error, Result};

pub const CSV_HEADER: [&str; 10] = [
    "algorithm",
    "n",
    "regime",
    "param",
    "trials",
    "mean_tests",
    "std_tests",
    "mean_stages",
    "std_stages",
    "seed",
];

fn write_rows<W: std::io::Write>(rows: &[AggregateRow], sink: W) -> Result<()> {
    if rows.is_empty() {
        return Err(Error::param("no rows to write"));
    }
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(CSV_HEADER)?;
    for r in rows {
        w.write_record([
            r.algorithm.clone(),
            r.n.to_string(),
            r.regime.to_string(),
            r.param.to_string(),
            r.trials.to_string(),
            r.mean_tests.to_string(),
            r.std_tests.to_string(),
            r.mean_stages.to_string(),
            r.std_stages.to_string(),
            r.seed.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::Csv(e.into()))?;
    Ok(())
}

pub fn csv_string(rows: &[AggregateRow]) -> Result<String> {
    let mut buf = Vec::new();
    write_rows(rows, &mut buf)?;
    Ok(String::from_utf8(buf).expect("csv output is utf-8"))
}

pub fn write_csv(rows: &[AggregateRow], path: &Path) -> Result<()> {
    if rows.is_empty() {
        return Err(Error::param("no rows to write"));
    }
    let file = File::create(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    write_rows(rows, file)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    Tests,
    Stages,
}

impl Metric {
    fn of(&self, row: &AggregateRow) -> f64 {
        match self {
            Metric::Tests => row.mean_tests,
            Metric::Stages => row.mean_stages,
        }
    }

    fn label(&self) -> &'static str {
        match self {
            Metric::Tests => "Number of tests",
            Metric::Stages => "Number of stages",
        }
    }
}

const PALETTE: [RGBColor; 6] = [
    RGBColor(31, 119, 180),
    RGBColor(255, 127, 14),
    RGBColor(44, 160, 44),
    RGBColor(214, 39, 40),
    RGBColor(148, 103, 189),
    RGBColor(140, 86, 75),
];

/// SVG line chart of `metric` against the swept parameter, one series per
/// algorithm.
pub fn render_chart(rows: &[AggregateRow], path: &Path, metric: Metric) -> Result<()> {
    if rows.is_empty() {
        return Err(Error::param("no rows to plot"));
    }
    let chart_err = |e: &dyn std::fmt::Display| Error::Chart(e.to_string());
    let mut series: BTreeMap<&str, Vec<(f64, f64)>> = BTreeMap::new();
    for r in rows {
        series.entry(&r.algorithm).or_default().push((r.param, metric.of(r)));
    }
    let (x_lo, x_hi) = rows
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| (lo.min(r.param), hi.max(r.param)));
    let y_hi = rows.iter().map(|r| metric.of(r)).fold(0.0, f64::max) * 1.05 + 1.0;
    let x_hi = if x_hi > x_lo { x_hi } else { x_lo + 1.0 };

    let root = SVGBackend::new(path, (800, 500)).into_drawing_area();
    root.fill(&WHITE).map_err(|e| chart_err(&e))?;
    let caption = format!("n = {}, {}", rows[0].n, rows[0].regime);
    let mut chart = ChartBuilder::on(&root)
        .caption(caption, ("sans-serif", 20))
        .margin(15)
        .x_label_area_size(40)
        .y_label_area_size(60)
        .build_cartesian_2d(x_lo..x_hi, 0.0..y_hi)
        .map_err(|e| chart_err(&e))?;
    chart
        .configure_mesh()
        .x_desc(if rows[0].regime == "comb" { "k" } else { "p" })
        .y_desc(metric.label())
        .draw()
        .map_err(|e| chart_err(&e))?;
    for (i, (name, points)) in series.into_iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        chart
            .draw_series(LineSeries::new(points, color.stroke_width(2)))
            .map_err(|e| chart_err(&e))?
            .label(name)
            .legend(move |(x, y)| PathElement::new(vec![(x, y), (x + 20, y)], color));
    }
    chart
        .configure_series_labels()
        .background_style(WHITE.mix(0.8))
        .border_style(BLACK)
        .draw()
        .map_err(|e| chart_err(&e))?;
    root.present().map_err(|e| chart_err(&e))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(alg: &str, param: f64) -> AggregateRow {
        AggregateRow {
            algorithm: alg.into(),
            n: 16,
            regime: "comb",
            param,
            trials: 10,
            mean_tests: 9.5,
            std_tests: 1.25,
            mean_stages: 3.0,
            std_stages: 0.5,
            seed: 42,
        }
    }

    #[test]
    fn empty_rows_rejected() {
        assert!(csv_string(&[]).is_err());
        let dir = tempfile::tempdir().unwrap();
        assert!(write_csv(&[], &dir.path().join("x.csv")).is_err());
        assert!(render_chart(&[], &dir.path().join("x.svg"), Metric::Tests).is_err());
    }

    #[test]
    fn one_row_two_lines() {
        let text = csv_string(&[row("dsa", 1.0)]).unwrap();
        assert_eq!(
            text,
            "algorithm,n,regime,param,trials,mean_tests,std_tests,mean_stages,std_stages,seed\n\
             dsa,16,comb,1,10,9.5,1.25,3,0.5,42\n"
        );
    }

    #[test]
    fn unwritable_path() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("missing").join("out.csv");
        assert!(matches!(write_csv(&[row("dsa", 1.0)], &path), Err(Error::Io { .. })));
    }

    #[test]
    fn chart_is_written() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("tests.svg");
        let rows = [row("dsa", 1.0), row("dsa", 2.0), row("bsa", 1.0), row("bsa", 2.0)];
        render_chart(&rows, &path, Metric::Stages).unwrap();
        let svg = std::fs::read_to_string(&path).unwrap();
        assert!(svg.starts_with("<svg"));
        assert!(svg.contains("Number of stages"));
    }
}

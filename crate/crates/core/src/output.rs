//! CSV tables, per-variable plot data and SVG line charts.
//!
//! Numbers are written with Rust's shortest round-trip `Display` form:
//! decimal point, no exponent, no grouping. Lines end in `\n`.

use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use crate::engine::RunResult;
use crate::error::{Error, Result};
use crate::policy::{ComparisonReport, REPORT_VARIABLES};
use crate::validation::Finding;

/// Variables charted when comparing scenarios: debt and budget, capacity,
/// ROI, tendency to invest and social acceptance.
pub const PLOT_VARIABLES: [&str; 6] = [
    "budget",
    "suna_debt",
    "installed_capacity",
    "roi",
    "tendency_to_invest",
    "social_acceptance",
];

fn csv_writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(w)
}

/// Writes a run as one row per record. `columns` selects variables (time
/// is always first); empty means every variable in the fixed order: time,
/// stocks, flows, auxiliaries, each group alphabetical.
pub fn write_run_csv<W: Write>(result: &RunResult, columns: &[String], w: W) -> Result<()> {
    let order: Vec<&str> = if columns.is_empty() {
        result.column_order()
    } else {
        let wanted: Vec<&str> = columns.iter().map(String::as_str).collect();
        let mut order: Vec<&str> = result
            .column_order()
            .into_iter()
            .filter(|c| wanted.contains(c))
            .collect();
        if order.first() != Some(&"time") {
            order.insert(0, "time");
        }
        if let Some(missing) = wanted.iter().find(|c| **c != "time" && !order.contains(c)) {
            return Err(Error::UnknownKey(format!("output column `{missing}`")));
        }
        order
    };
    let series: Vec<&[f64]> = order
        .iter()
        .map(|&name| {
            if name == "time" {
                result.times()
            } else {
                result.series(name).unwrap_or(&[])
            }
        })
        .collect();
    let mut out = csv_writer(w);
    out.write_record(&order)?;
    for k in 0..result.len() {
        out.write_record(series.iter().map(|s| s[k].to_string()))?;
    }
    out.flush().map_err(|e| Error::io("<csv>", e))?;
    Ok(())
}

/// Writes `time` plus one column per scenario for `variable`. Scenarios on
/// different clocks leave cells empty where they have no record.
pub fn write_plot_data<W: Write>(report: &ComparisonReport, variable: &str, w: W) -> Result<()> {
    let mut times: Vec<f64> = report
        .rows
        .iter()
        .flat_map(|r| r.result.times().iter().copied())
        .collect();
    times.sort_by(f64::total_cmp);
    times.dedup();
    let mut out = csv_writer(w);
    let mut header = vec!["time".to_string()];
    header.extend(report.rows.iter().map(|r| r.scenario.clone()));
    out.write_record(&header)?;
    let columns: Vec<(&[f64], &[f64])> = report
        .rows
        .iter()
        .map(|r| {
            let s = r
                .result
                .series(variable)
                .ok_or_else(|| Error::UnknownKey(format!("plot variable `{variable}`")))?;
            Ok((r.result.times(), s))
        })
        .collect::<Result<_>>()?;
    let mut cursors = vec![0usize; columns.len()];
    for &t in &times {
        let mut record = vec![t.to_string()];
        for ((ts, vs), k) in columns.iter().zip(cursors.iter_mut()) {
            if *k < ts.len() && ts[*k] == t {
                record.push(vs[*k].to_string());
                *k += 1;
            } else {
                record.push(String::new());
            }
        }
        out.write_record(&record)?;
    }
    out.flush().map_err(|e| Error::io("<csv>", e))?;
    Ok(())
}

/// One row per scenario with its end-of-horizon values.
pub fn write_comparison_csv<W: Write>(report: &ComparisonReport, w: W) -> Result<()> {
    let mut out = csv_writer(w);
    let mut header = vec!["scenario", "policy"];
    header.extend(REPORT_VARIABLES);
    out.write_record(&header)?;
    for r in &report.rows {
        let values = [
            r.installed_capacity,
            r.penetration_rate,
            r.tendency_to_invest,
            r.suna_debt,
            r.delay_in_debt_payment,
        ];
        let mut record = vec![r.scenario.clone(), r.policy.as_str().to_string()];
        record.extend(values.iter().map(f64::to_string));
        out.write_record(&record)?;
    }
    out.flush().map_err(|e| Error::io("<csv>", e))?;
    Ok(())
}

pub fn write_findings_csv<W: Write>(findings: &[Finding], w: W) -> Result<()> {
    let mut out = csv_writer(w);
    out.write_record(["check", "status", "detail"])?;
    for f in findings {
        let status = match f.status {
            crate::validation::Status::Pass => "pass",
            crate::validation::Status::Fail => "fail",
            crate::validation::Status::OutOfBand => "out_of_band",
        };
        out.write_record([f.name.as_str(), status, f.detail.as_str()])?;
    }
    out.flush().map_err(|e| Error::io("<csv>", e))?;
    Ok(())
}

const PALETTE: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
];

/// Round tick step covering `span` in about five intervals.
fn tick_step(span: f64) -> f64 {
    if !(span > 0.0) {
        return 1.0;
    }
    let raw = span / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let norm = raw / mag;
    let nice = if norm <= 1.0 {
        1.0
    } else if norm <= 2.0 {
        2.0
    } else if norm <= 5.0 {
        5.0
    } else {
        10.0
    };
    nice * mag
}

fn label(v: f64) -> String {
    let a = v.abs();
    if a >= 1e6 {
        format!("{:.1}M", v / 1e6)
    } else if a >= 1e4 {
        format!("{:.0}k", v / 1e3)
    } else if a >= 10.0 || v == 0.0 {
        format!("{v:.0}")
    } else {
        format!("{v:.2}")
    }
}

/// A self-contained SVG line chart of `variable`, one line per scenario.
pub fn svg_chart(report: &ComparisonReport, variable: &str) -> Result<String> {
    let (w, h) = (720.0, 420.0);
    let (left, right, top, bottom) = (70.0, 150.0, 40.0, 50.0);
    let lines: Vec<(&str, &[f64], &[f64])> = report
        .rows
        .iter()
        .map(|r| {
            let s = r
                .result
                .series(variable)
                .ok_or_else(|| Error::UnknownKey(format!("plot variable `{variable}`")))?;
            Ok((r.scenario.as_str(), r.result.times(), s))
        })
        .collect::<Result<_>>()?;
    let finite = |v: &&f64| v.is_finite();
    let xs = lines.iter().flat_map(|l| l.1.iter());
    let (x0, x1) = xs
        .filter(finite)
        .fold((f64::INFINITY, f64::NEG_INFINITY), |m, &x| {
            (m.0.min(x), m.1.max(x))
        });
    let ys = lines.iter().flat_map(|l| l.2.iter());
    let (ymin, ymax) = ys
        .filter(finite)
        .fold((0.0f64, f64::NEG_INFINITY), |m, &y| {
            (m.0.min(y), m.1.max(y))
        });
    let ymax = if ymax > ymin { ymax } else { ymin + 1.0 };
    let (x1, x0) = if x1 > x0 { (x1, x0) } else { (x0 + 1.0, x0) };
    let step = tick_step(ymax - ymin);
    let (y0, y1) = ((ymin / step).floor() * step, (ymax / step).ceil() * step);
    let pw = w - left - right;
    let ph = h - top - bottom;
    let px = |x: f64| left + (x - x0) / (x1 - x0) * pw;
    let py = |y: f64| top + (y1 - y) / (y1 - y0) * ph;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="24" font-size="15">{variable}</text>"#,
        left
    );
    let mut y = y0;
    while y <= y1 + step * 1e-9 {
        let yy = py(y);
        let _ = writeln!(
            svg,
            r##"<line x1="{left}" y1="{yy:.2}" x2="{:.2}" y2="{yy:.2}" stroke="#ddd"/><text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"##,
            left + pw,
            left - 6.0,
            yy + 4.0,
            label(y)
        );
        y += step;
    }
    let xstep = tick_step(x1 - x0);
    let mut x = (x0 / xstep).ceil() * xstep;
    while x <= x1 + xstep * 1e-9 {
        let xx = px(x);
        let _ = writeln!(
            svg,
            r##"<line x1="{xx:.2}" y1="{:.2}" x2="{xx:.2}" y2="{:.2}" stroke="#999"/><text x="{xx:.2}" y="{:.2}" text-anchor="middle">{}</text>"##,
            top + ph,
            top + ph + 5.0,
            top + ph + 20.0,
            label(x)
        );
        x += xstep;
    }
    let _ = writeln!(
        svg,
        r##"<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="#333"/>"##
    );
    for (i, (name, ts, vs)) in lines.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let points: Vec<String> = ts
            .iter()
            .zip(vs.iter())
            .filter(|(_, v)| v.is_finite())
            .map(|(&t, &v)| format!("{:.2},{:.2}", px(t), py(v)))
            .collect();
        let _ = writeln!(
            svg,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.8" points="{}"/>"#,
            points.join(" ")
        );
        let ly = top + 16.0 + 18.0 * i as f64;
        let lx = left + pw + 14.0;
        let _ = writeln!(
            svg,
            r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2.5"/><text x="{}" y="{}">{}</text>"#,
            lx + 22.0,
            lx + 28.0,
            ly + 4.0,
            xml_escape(name)
        );
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn create(path: &Path) -> Result<std::io::BufWriter<std::fs::File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    Ok(std::io::BufWriter::new(file))
}

/// Writes the full run to `path` (all variables in the fixed order).
pub fn emit_csv(result: &RunResult, path: &Path) -> Result<()> {
    write_run_csv(result, &[], create(path)?)
}

/// Like [`emit_csv`], restricted to `columns` when non-empty.
pub fn emit_columns(result: &RunResult, columns: &[String], path: &Path) -> Result<()> {
    write_run_csv(result, columns, create(path)?)
}

/// Files written by [`emit_comparison`], relative to the output directory.
pub fn comparison_files(report: &ComparisonReport, svg: bool) -> Vec<String> {
    let mut files = vec!["comparison.csv".to_string(), "findings.csv".to_string()];
    files.extend(
        report
            .rows
            .iter()
            .map(|r| format!("runs/{}.csv", r.scenario)),
    );
    for v in PLOT_VARIABLES {
        files.push(format!("plots/{v}.csv"));
        if svg {
            files.push(format!("plots/{v}.svg"));
        }
    }
    files
}

/// Writes the comparison table, the findings, every run and the plot data
/// (plus SVG charts when `svg` is set) under `dir`.
pub fn emit_comparison(
    report: &ComparisonReport,
    findings: &[Finding],
    dir: &Path,
    svg: bool,
) -> Result<()> {
    write_comparison_csv(report, create(&dir.join("comparison.csv"))?)?;
    write_findings_csv(findings, create(&dir.join("findings.csv"))?)?;
    for r in &report.rows {
        emit_csv(
            &r.result,
            &dir.join("runs").join(format!("{}.csv", r.scenario)),
        )?;
    }
    for v in PLOT_VARIABLES {
        write_plot_data(
            report,
            v,
            create(&dir.join("plots").join(format!("{v}.csv")))?,
        )?;
        if svg {
            let path = dir.join("plots").join(format!("{v}.svg"));
            create(&path)?
                .write_all(svg_chart(report, v)?.as_bytes())
                .map_err(|e| Error::io(&path, e))?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::SimulationClock;
    use crate::policy::{run_scenario_suite, PolicyId};
    use crate::scenario::Scenario;

    fn report(end: f64) -> ComparisonReport {
        let base = crate::config::shipped();
        let clock = SimulationClock::new(2015.0, end, 0.25).unwrap();
        let scenarios: Vec<Scenario> = [PolicyId::Base, PolicyId::P3BudgetAdjustedTax]
            .iter()
            .map(|&p| Scenario::new(p.as_str(), clock, base.control.with_policy(p)))
            .collect();
        run_scenario_suite(&base.parameters, &scenarios).unwrap()
    }

    fn text(f: impl FnOnce(&mut Vec<u8>) -> Result<()>) -> String {
        let mut buf = Vec::new();
        f(&mut buf).unwrap();
        String::from_utf8(buf).unwrap()
    }

    #[test]
    fn run_csv_layout() {
        let r = report(2017.0);
        let result = &r.rows[0].result;
        let csv = text(|b| write_run_csv(result, &[], b));
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 1 + 9);
        assert!(lines[0].starts_with("time,budget,depreciated_capacity,installed_capacity,"));
        assert!(lines[1].starts_with("2015,2"));
        assert!(!csv.contains('\r') && !csv.contains("e-") && !csv.contains("e+"));
        assert_eq!(csv, text(|b| write_run_csv(result, &[], b)));

        let some = text(|b| write_run_csv(result, &["suna_debt".into(), "budget".into()], b));
        assert!(some.starts_with("time,budget,suna_debt\n"));
        assert!(write_run_csv(result, &["nope".into()], Vec::new()).is_err());
    }

    #[test]
    fn plot_data_has_a_column_per_scenario() {
        let r = report(2016.0);
        let csv = text(|b| write_plot_data(&r, "installed_capacity", b));
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "time,base,p3_budget_adjusted_tax");
        assert_eq!(lines.len(), 6);
        assert_eq!(lines[1], "2015,120,120");
    }

    #[test]
    fn plot_data_with_unequal_horizons() {
        let mut r = report(2016.0);
        r.rows[1] = report(2015.5).rows.remove(1);
        let csv = text(|b| write_plot_data(&r, "budget", b));
        assert!(csv.lines().last().unwrap().ends_with(','), "{csv}");
    }

    #[test]
    fn comparison_table() {
        let r = report(2016.0);
        let csv = text(|b| write_comparison_csv(&r, b));
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(
            lines[0],
            "scenario,policy,installed_capacity,penetration_rate,tendency_to_invest,suna_debt,delay_in_debt_payment"
        );
        assert!(lines[1].starts_with("base,base,"));
        assert_eq!(lines.len(), 3);
    }

    #[test]
    fn svg_is_well_formed_enough() {
        let r = report(2020.0);
        let svg = svg_chart(&r, "installed_capacity").unwrap();
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert!(svg_chart(&r, "nope").is_err());
    }

    #[test]
    fn ticks_are_round() {
        assert_eq!(tick_step(10.0), 2.0);
        assert_eq!(tick_step(4500.0), 1000.0);
        assert_eq!(tick_step(0.3), 0.1);
        assert_eq!(tick_step(0.0), 1.0);
    }
}

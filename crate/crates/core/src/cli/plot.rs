//! Plot data: whitespace-separated columns plus a minimal SVG.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::records::ResultRecord;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum PlotKind {
    /// `radius value [oracle]` from `oracle-compare` or `estimate-exit`.
    RadialProfile,
    /// `T p cond3_margin` from `sweep`.
    SweepHeatmap,
    /// `iteration sup_change sup_norm` from `solve`.
    Convergence,
}

impl PlotKind {
    fn name(self) -> &'static str {
        match self {
            PlotKind::RadialProfile => "radial-profile",
            PlotKind::SweepHeatmap => "sweep-heatmap",
            PlotKind::Convergence => "convergence",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlotData {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

fn num(v: &Value) -> Option<f64> {
    v.as_f64()
}

fn norm_of(v: &Value) -> Option<f64> {
    let xs = v.as_array()?;
    let mut s = 0.0;
    for x in xs {
        s += x.as_f64()?.powi(2);
    }
    Some(s.sqrt())
}

fn rows_of(rec: &ResultRecord) -> &[Value] {
    rec.payload.get("rows").and_then(Value::as_array).map(Vec::as_slice).unwrap_or(&[])
}

/// Extracts the columns for `kind` from records sharing one config digest.
pub fn plot_data(records: &[ResultRecord], kind: PlotKind) -> Result<PlotData> {
    let first = records.first().ok_or_else(|| Error::input("no records to plot"))?;
    if let Some(other) = records.iter().find(|r| r.config_digest != first.config_digest) {
        return Err(Error::input(format!("records mix config digests {} and {}", first.config_digest, other.config_digest)));
    }
    let mut data = match kind {
        PlotKind::RadialProfile => {
            let mut rows = Vec::new();
            let mut with_oracle = true;
            for rec in records {
                for row in rows_of(rec) {
                    let radius = row.get("radius").and_then(num).or_else(|| row.get("x").and_then(norm_of));
                    let value = row.get("mc_mean").or_else(|| row.get("estimate").and_then(|e| e.get("mean"))).and_then(num);
                    if let (Some(r), Some(v)) = (radius, value) {
                        let oracle = row.get("oracle").and_then(num);
                        with_oracle &= oracle.is_some();
                        rows.push(vec![r, v, oracle.unwrap_or(f64::NAN)]);
                    }
                }
            }
            let mut columns = vec!["radius".to_string(), "value".to_string()];
            if with_oracle {
                columns.push("oracle".to_string());
            } else {
                rows.iter_mut().for_each(|r| r.truncate(2));
            }
            PlotData { columns, rows }
        }
        PlotKind::SweepHeatmap => {
            let rows = records
                .iter()
                .flat_map(rows_of)
                .filter_map(|row| Some(vec![row.get("outer").and_then(num)?, row.get("p").and_then(num)?, row.get("margins")?.get(2).and_then(num)?]))
                .collect();
            PlotData { columns: vec!["T".into(), "p".into(), "cond3_margin".into()], rows }
        }
        PlotKind::Convergence => {
            let rows = records
                .iter()
                .filter_map(|rec| rec.payload.get("trace")?.get("records")?.as_array())
                .flatten()
                .filter_map(|r| Some(vec![r.get("iteration").and_then(num)?, r.get("sup_change").and_then(num)?, r.get("sup_norm").and_then(num)?]))
                .collect();
            PlotData { columns: vec!["iteration".into(), "sup_change".into(), "sup_norm".into()], rows }
        }
    };
    if data.rows.is_empty() {
        return Err(Error::input(format!("records carry no {} data", kind.name())));
    }
    if kind == PlotKind::RadialProfile {
        data.rows.sort_by(|a, b| a[0].total_cmp(&b[0]));
    }
    Ok(data)
}

fn dat(data: &PlotData) -> String {
    let mut s = format!("# {}\n", data.columns.join(" "));
    for r in &data.rows {
        let cells: Vec<String> = r.iter().map(|v| format!("{v:.17e}")).collect();
        s.push_str(&cells.join(" "));
        s.push('\n');
    }
    s
}

fn svg(data: &PlotData, kind: PlotKind) -> String {
    const W: f64 = 640.0;
    const H: f64 = 400.0;
    const PAD: f64 = 50.0;
    let log_y = kind == PlotKind::Convergence && data.rows.iter().all(|r| r[1] > 0.0);
    let y_of = |v: f64| if log_y { v.log10() } else { v };
    let range = |vals: &mut dyn Iterator<Item = f64>| {
        let (lo, hi) = vals.filter(|v| v.is_finite()).fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
        if hi > lo {
            (lo, hi)
        } else {
            (lo - 0.5, lo + 0.5)
        }
    };
    let (x0, x1) = range(&mut data.rows.iter().map(|r| r[0]));
    let (y0, y1) = match kind {
        PlotKind::SweepHeatmap => range(&mut data.rows.iter().map(|r| r[1])),
        _ => range(&mut data.rows.iter().flat_map(|r| r[1..].iter().copied().map(y_of))),
    };
    let sx = |x: f64| PAD + (x - x0) / (x1 - x0) * (W - 2.0 * PAD);
    let sy = |y: f64| H - PAD - (y - y0) / (y1 - y0) * (H - 2.0 * PAD);

    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#);
    let _ = writeln!(s, r#"<rect x="{PAD}" y="{PAD}" width="{}" height="{}" fill="none" stroke="black"/>"#, W - 2.0 * PAD, H - 2.0 * PAD);
    let _ = writeln!(s, r#"<text x="{}" y="{}" font-size="12" text-anchor="middle">{} [{x0:.3e}, {x1:.3e}]</text>"#, W / 2.0, H - 15.0, data.columns[0]);
    let ylabel = if log_y { "log10 ".to_string() + &data.columns[1] } else { data.columns[1..].join(", ") };
    let _ = writeln!(
        s,
        r#"<text x="15" y="{}" font-size="12" transform="rotate(-90 15 {})" text-anchor="middle">{ylabel} [{y0:.3e}, {y1:.3e}]</text>"#,
        H / 2.0,
        H / 2.0
    );
    match kind {
        PlotKind::SweepHeatmap => {
            for r in &data.rows {
                let colour = if r[2] >= 0.0 { "#2a7" } else { "#c33" };
                let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="6" fill="{colour}"/>"#, sx(r[0]), sy(r[1]));
            }
        }
        _ => {
            for (col, colour) in (1..data.columns.len()).zip(["#1f5fa8", "#c0392b"]) {
                let pts: Vec<String> = data.rows.iter().filter(|r| r[col].is_finite()).map(|r| format!("{:.2},{:.2}", sx(r[0]), sy(y_of(r[col])))).collect();
                let _ = writeln!(s, r#"<polyline fill="none" stroke="{colour}" stroke-width="1.5" points="{}"/>"#, pts.join(" "));
            }
        }
    }
    s.push_str("</svg>\n");
    s
}

/// Writes `<kind>-<digest>.dat` and `<kind>-<digest>.svg` into `dir`.
pub fn emit_plotdata(records: &[ResultRecord], kind: PlotKind, dir: &Path) -> Result<Vec<PathBuf>> {
    let data = plot_data(records, kind)?;
    std::fs::create_dir_all(dir)?;
    let stem = format!("{}-{}", kind.name(), records[0].config_digest);
    let dat_path = dir.join(format!("{stem}.dat"));
    let svg_path = dir.join(format!("{stem}.svg"));
    std::fs::write(&dat_path, dat(&data))?;
    std::fs::write(&svg_path, svg(&data, kind))?;
    Ok(vec![dat_path, svg_path])
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn rec(digest: &str, payload: Value) -> ResultRecord {
        ResultRecord::new(digest, "x", payload)
    }

    #[test]
    fn empty_and_mixed_are_errors() {
        assert!(plot_data(&[], PlotKind::Convergence).is_err());
        let a = rec("a", json!({"rows": []}));
        let b = rec("b", json!({"rows": []}));
        assert!(plot_data(&[a, b], PlotKind::RadialProfile).is_err());
    }

    #[test]
    fn radial_profile_columns() {
        let r = rec(
            "a",
            json!({"rows": [
                {"radius": 1.5, "mc_mean": 0.25, "oracle": 0.25},
                {"radius": 1.2, "mc_mean": 0.2, "oracle": 0.19}
            ]}),
        );
        let d = plot_data(&[r], PlotKind::RadialProfile).unwrap();
        assert_eq!(d.columns, vec!["radius", "value", "oracle"]);
        assert_eq!(d.rows[0], vec![1.2, 0.2, 0.19]);
    }

    #[test]
    fn files_embed_digest_and_kind() {
        let dir = tempfile::tempdir().unwrap();
        let r = rec(
            "feedbeef",
            json!({"trace": {"records": [
                {"iteration": 1, "sup_change": 0.1, "sup_norm": 1.0},
                {"iteration": 2, "sup_change": 0.01, "sup_norm": 1.0}
            ]}}),
        );
        let files = emit_plotdata(&[r], PlotKind::Convergence, dir.path()).unwrap();
        assert!(files[0].ends_with("convergence-feedbeef.dat"));
        let text = std::fs::read_to_string(&files[0]).unwrap();
        assert_eq!(text.lines().count(), 3);
        assert!(std::fs::read_to_string(&files[1]).unwrap().starts_with("<svg"));
    }
}

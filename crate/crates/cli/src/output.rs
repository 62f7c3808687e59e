use std::io::Write;
use std::path::Path;

use anyhow::Result;
use serde_json::{json, Map, Value};

use lindet_core::experiments::{Cell, ResultTable};
use lindet_core::VERSION;

/// Prints `v` with at most nine significant digits.
pub fn format_float(v: f64) -> String {
    if v.is_nan() {
        return "NaN".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return "0".into();
    }
    let rounded: f64 = format!("{v:.8e}").parse().expect("formatted float parses");
    let magnitude = rounded.abs();
    if (1e-4..1e9).contains(&magnitude) {
        rounded.to_string()
    } else {
        let text = format!("{rounded:.8e}");
        let (mantissa, exponent) = text.split_once('e').expect("exponent form");
        let mantissa = mantissa.trim_end_matches('0').trim_end_matches('.');
        format!("{mantissa}e{exponent}")
    }
}

fn cell_text(cell: &Cell) -> String {
    match cell {
        Cell::Int(v) => v.to_string(),
        Cell::Float(v) => format_float(*v),
        Cell::Text(s) => s.clone(),
        Cell::Bool(b) => b.to_string(),
        Cell::Empty => String::new(),
    }
}

fn metadata_pairs(table: &ResultTable) -> Vec<(String, String)> {
    let mut pairs = vec![
        ("experiment".to_owned(), table.experiment.clone()),
        ("seed".to_owned(), table.master_seed.to_string()),
        ("trials".to_owned(), table.trials.to_string()),
        ("snr_convention".to_owned(), table.snr_convention.label().to_owned()),
        ("version".to_owned(), VERSION.to_owned()),
    ];
    pairs.extend(table.parameters.iter().cloned());
    pairs
}

/// Header, one record per row, then a `#` comment line with the run metadata.
pub fn write_csv<W: Write>(table: &ResultTable, out: W) -> Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    writer.write_record(&table.columns)?;
    for row in &table.rows {
        writer.write_record(row.cells.iter().map(cell_text))?;
    }
    writer.flush()?;
    let mut out = writer.into_inner().map_err(|e| e.into_error())?;
    let meta: Vec<String> = metadata_pairs(table)
        .into_iter()
        .map(|(k, v)| format!("{k}={v}"))
        .collect();
    writeln!(out, "# {}", meta.join(" "))?;
    Ok(())
}

fn cell_json(cell: &Cell) -> Value {
    match cell {
        Cell::Int(v) => json!(v),
        Cell::Float(v) if v.is_finite() => json!(v),
        Cell::Float(v) => json!(format_float(*v)),
        Cell::Text(s) => json!(s),
        Cell::Bool(b) => json!(b),
        Cell::Empty => Value::Null,
    }
}

pub fn to_json(table: &ResultTable) -> Value {
    let mut metadata = Map::new();
    for (k, v) in metadata_pairs(table) {
        let value = match k.as_str() {
            "seed" => json!(table.master_seed),
            "trials" => json!(table.trials),
            _ => json!(v),
        };
        metadata.insert(k, value);
    }
    let rows: Vec<Value> = table
        .rows
        .iter()
        .map(|row| {
            let mut obj = Map::new();
            obj.insert("master_seed".into(), json!(row.master_seed));
            obj.insert("trials".into(), json!(row.trials));
            for (name, cell) in table.columns.iter().zip(&row.cells) {
                obj.insert(name.clone(), cell_json(cell));
            }
            Value::Object(obj)
        })
        .collect();
    json!({ "metadata": metadata, "rows": rows })
}

pub fn write_json<W: Write>(table: &ResultTable, mut out: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, &to_json(table))?;
    writeln!(out)?;
    Ok(())
}

fn distinct(table: &ResultTable, column: &str) -> Vec<String> {
    let mut seen: Vec<String> = Vec::new();
    for row in table.rows() {
        let v = row.get(column).map(cell_text).unwrap_or_default();
        if !seen.contains(&v) {
            seen.push(v);
        }
    }
    seen
}

fn series(data: &str, x: &str, y: &str, filter: Option<(&str, &str)>, title: &str) -> String {
    let y_expr = match filter {
        Some((col, value)) => format!("(strcol(\"{col}\") eq \"{value}\" ? column(\"{y}\") : 1/0)"),
        None => format!("\"{y}\""),
    };
    format!("'{data}' using \"{x}\":{y_expr} with linespoints title \"{title}\"")
}

/// gnuplot script that reads the CSV at `data`.
pub fn plot_script(table: &ResultTable, data: &Path) -> String {
    let data = data.display().to_string();
    let mut lines = vec![
        "set datafile separator \",\"".to_owned(),
        "set datafile commentschars \"#\"".to_owned(),
        "set key autotitle columnhead".to_owned(),
        "set grid".to_owned(),
    ];
    let plots: Vec<String> = match table.experiment.as_str() {
        "table1" => {
            lines.push("set xlabel \"N\"\nset ylabel \"mean cond(H)\"".into());
            vec![series(&data, "N", "mean_cond", None, "mean cond(H)")]
        }
        "gain" => {
            lines.push("set xlabel \"receive SNR (dB)\"\nset ylabel \"gain (dB)\"".into());
            distinct(table, "N")
                .iter()
                .map(|n| series(&data, "snr_db", "mean_gain_db", Some(("N", n)), &format!("N = {n}")))
                .collect()
        }
        "cdf" => {
            lines.push("set xlabel \"x\"\nset ylabel \"P[sigma_N < x]\"".into());
            let cdf: Vec<String> = table
                .rows()
                .filter(|r| r.text("statistic") == "cdf")
                .map(|r| r.int("N").to_string())
                .fold(Vec::new(), |mut acc, n| {
                    if !acc.contains(&n) {
                        acc.push(n);
                    }
                    acc
                });
            cdf.iter()
                .map(|n| {
                    format!(
                        "'{data}' using \"x\":(strcol(\"statistic\") eq \"cdf\" && strcol(\"N\") eq \"{n}\" ? column(\"value\") : 1/0) with lines title \"N = {n}\""
                    )
                })
                .collect()
        }
        "ber" => {
            lines.push("set logscale y\nset xlabel \"receive SNR (dB)\"\nset ylabel \"BER\"".into());
            distinct(table, "detector")
                .iter()
                .map(|d| series(&data, "snr_db", "ber", Some(("detector", d)), d))
                .collect()
        }
        _ => {
            lines.push("set xlabel \"sigma_min\"\nset ylabel \"cond(W_mmse) / cond(W_zf)\"".into());
            vec![
                series(&data, "sigma_min", "mean_exact_ratio", None, "exact"),
                series(&data, "sigma_min", "approx_ratio", None, "approximation"),
            ]
        }
    };
    lines.push(format!("plot {}", plots.join(", \\\n     ")));
    lines.push("pause -1".into());
    lines.join("\n") + "\n"
}

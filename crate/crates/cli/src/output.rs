//! CSV output.

use std::io::Write;
use std::path::{Path, PathBuf};

use exchange_core::{Algorithm, ParamPoint};

use crate::harness::{SweepResult, SweepRow};
use crate::HarnessError;

pub const HEADER: [&str; 13] = [
    "algorithm",
    "K",
    "theta_hat",
    "proposal_width",
    "replicate",
    "acceptance_rate",
    "ess",
    "gibbs_updates",
    "exact_samples",
    "wall_time_seconds",
    "seed",
    "prior_rejections",
    "error",
];

/// 17 significant digits, enough to round-trip any `f64`.
pub fn format_real(v: f64) -> String {
    format!("{v:.16e}")
}

/// Vector points are joined with `;`.
fn format_point(p: &ParamPoint) -> String {
    p.values()
        .iter()
        .map(|&v| format_real(v))
        .collect::<Vec<_>>()
        .join(";")
}

fn opt<T>(v: Option<T>, f: impl Fn(T) -> String) -> String {
    v.map(f).unwrap_or_default()
}

fn record(row: &SweepRow) -> [String; 13] {
    [
        row.algorithm.name().to_owned(),
        row.k.to_string(),
        opt(row.theta_hat.as_ref(), format_point),
        opt(row.proposal_width, format_real),
        row.replicate.to_string(),
        opt(row.acceptance_rate, format_real),
        opt(row.ess, format_real),
        row.gibbs_updates.to_string(),
        row.exact_samples.to_string(),
        format_real(row.wall_time_seconds),
        row.seed.to_string(),
        row.prior_rejections.to_string(),
        row.error.clone().unwrap_or_default(),
    ]
}

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> HarnessError + '_ {
    move |e| HarnessError::Csv {
        path: path.to_owned(),
        source: e,
    }
}

pub fn write_csv<W: Write>(result: &SweepResult, out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(HEADER)?;
    for row in &result.rows {
        w.write_record(record(row))?;
    }
    w.flush()?;
    Ok(())
}

pub fn emit_csv(result: &SweepResult, path: &Path) -> Result<(), HarnessError> {
    let file = std::fs::File::create(path).map_err(|source| HarnessError::Io {
        path: path.to_owned(),
        source,
    })?;
    write_csv(result, file).map_err(csv_err(path))
}

/// Per-step traces, one file per row, in `<csv stem>.detail/`.
pub fn emit_detail(result: &SweepResult, csv_path: &Path) -> Result<PathBuf, HarnessError> {
    let dir = csv_path.with_extension("detail");
    let io = |path: &Path| {
        let path = path.to_owned();
        move |source| HarnessError::Io { path, source }
    };
    std::fs::create_dir_all(&dir).map_err(io(&dir))?;
    for (i, (row, trace)) in result.rows.iter().zip(&result.traces).enumerate() {
        let Some(trace) = trace else { continue };
        let path = dir.join(format!(
            "row-{i:05}-{}-K{}-r{}.csv",
            row.algorithm, row.k, row.replicate
        ));
        let mut w = csv::Writer::from_path(&path).map_err(csv_err(&path))?;
        let mut header = vec!["iteration".to_owned(), "accepted".to_owned()];
        header.extend((0..trace.initial.dim()).map(|d| format!("theta_{d}")));
        w.write_record(&header).map_err(csv_err(&path))?;
        for (t, (theta, acc)) in trace
            .theta_samples
            .iter()
            .zip(&trace.accept_flags)
            .enumerate()
        {
            let mut rec = vec![t.to_string(), u8::from(*acc).to_string()];
            rec.extend(theta.values().iter().map(|&v| format_real(v)));
            w.write_record(&rec).map_err(csv_err(&path))?;
        }
        w.flush().map_err(|source| HarnessError::Io {
            path: path.clone(),
            source,
        })?;
    }
    Ok(dir)
}

fn parse_field<T: std::str::FromStr>(field: &str, name: &str) -> Result<T, HarnessError> {
    field
        .parse()
        .map_err(|_| HarnessError::Validation(format!("column {name}: cannot parse {field:?}")))
}

fn parse_opt<T: std::str::FromStr>(field: &str, name: &str) -> Result<Option<T>, HarnessError> {
    if field.is_empty() {
        Ok(None)
    } else {
        parse_field(field, name).map(Some)
    }
}

/// Reads rows written by [`emit_csv`].
pub fn read_csv(path: &Path) -> Result<Vec<SweepRow>, HarnessError> {
    let mut r = csv::Reader::from_path(path).map_err(csv_err(path))?;
    let header = r.headers().map_err(csv_err(path))?.clone();
    if header.iter().ne(HEADER) {
        return Err(HarnessError::Validation(format!(
            "{}: unexpected header",
            path.display()
        )));
    }
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(csv_err(path))?;
        let f = |i: usize| rec.get(i).unwrap_or("");
        let theta_hat = if f(2).is_empty() {
            None
        } else {
            Some(ParamPoint::new(
                f(2).split(';')
                    .map(|v| parse_field(v, HEADER[2]))
                    .collect::<Result<_, _>>()?,
            ))
        };
        rows.push(SweepRow {
            algorithm: f(0)
                .parse::<Algorithm>()
                .map_err(|e| HarnessError::Validation(e.to_string()))?,
            k: parse_field(f(1), HEADER[1])?,
            theta_hat,
            proposal_width: parse_opt(f(3), HEADER[3])?,
            replicate: parse_field(f(4), HEADER[4])?,
            acceptance_rate: parse_opt(f(5), HEADER[5])?,
            ess: parse_opt(f(6), HEADER[6])?,
            gibbs_updates: parse_field(f(7), HEADER[7])?,
            exact_samples: parse_field(f(8), HEADER[8])?,
            wall_time_seconds: parse_field(f(9), HEADER[9])?,
            seed: parse_field(f(10), HEADER[10])?,
            prior_rejections: parse_field(f(11), HEADER[11])?,
            error: Some(f(12).to_owned()).filter(|e| !e.is_empty()),
        });
    }
    Ok(rows)
}

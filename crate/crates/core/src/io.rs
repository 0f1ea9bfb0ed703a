//! CSV import and export. Numbers are written with 17 significant digits so
//! that a write/read cycle is exact; lines starting with `#` carry the
//! invocation and configuration and are skipped on read.

use std::io::{Read, Write};

use num_complex::Complex64;

use crate::entropy::EntropyProfile;
use crate::error::{Error, Result};
use crate::experiments::{Figure2Table, RateRecord, Theorem1Report};
use crate::kernels::DeviationSample;
use crate::measures::MomentSequence;
use crate::opuc::VerblunskyCoefficients;

pub const UNDEFINED: &str = "undefined";

pub const MOMENT_HEADER: [&str; 4] = ["j", "re", "im", "err_estimate"];
pub const VERBLUNSKY_HEADER: [&str; 4] = ["k", "re_a", "im_a", "kappa"];
pub const DEVIATION_HEADER: [&str; 10] = [
    "n", "re_z1", "im_z1", "re_z2", "im_z2", "re_ratio", "im_ratio", "re_universal", "im_universal",
    "deviation",
];
pub const ENTROPY_HEADER: [&str; 5] = ["rho", "one_minus_rho", "entropy", "plain_fit", "log_corrected_fit"];
pub const RATE_HEADER: [&str; 5] = ["n", "x_n", "D", "alphaCand", "CalphaCand"];
pub const FIGURE2_HEADER: [&str; 3] = ["n", "f1", "f2"];
pub const THEOREM1_HEADER: [&str; 5] = ["n", "lhs", "entropy_sup", "rhs_core", "empirical_ratio"];

/// Shortest form is not used on purpose: 17 significant digits everywhere.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn fmt_opt(x: Option<f64>) -> String {
    x.map_or_else(|| UNDEFINED.to_string(), fmt_f64)
}

fn parse_f64(field: &str) -> Result<f64> {
    field
        .trim()
        .parse()
        .map_err(|_| Error::Parse(format!("not a number: {field:?}")))
}

fn parse_opt(field: &str) -> Result<Option<f64>> {
    if field.trim() == UNDEFINED {
        Ok(None)
    } else {
        parse_f64(field).map(Some)
    }
}

fn parse_index(field: &str) -> Result<usize> {
    field
        .trim()
        .parse()
        .map_err(|_| Error::Parse(format!("not an index: {field:?}")))
}

fn csv_err(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Parse(format!("{other:?}")),
    }
}

/// Writes `# comment` lines, the header and the rows.
pub fn write_table<W: Write>(
    mut out: W,
    comments: &[String],
    header: &[&str],
    rows: impl IntoIterator<Item = Vec<String>>,
) -> Result<()> {
    for c in comments {
        for line in c.lines() {
            writeln!(out, "# {line}")?;
        }
    }
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header).map_err(csv_err)?;
    for row in rows {
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a table written by [`write_table`], checking the header.
pub fn read_table<R: Read>(input: R, header: &[&str]) -> Result<Vec<Vec<String>>> {
    let mut r = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(input);
    let found = r.headers().map_err(csv_err)?.clone();
    if found.len() != header.len() || found.iter().zip(header).any(|(a, b)| a != *b) {
        return Err(Error::Parse(format!(
            "expected columns {header:?}, found {:?}",
            found.iter().collect::<Vec<_>>()
        )));
    }
    r.records()
        .map(|rec| {
            rec.map(|r| r.iter().map(str::to_string).collect())
                .map_err(csv_err)
        })
        .collect()
}

pub fn write_moments<W: Write>(out: W, comments: &[String], m: &MomentSequence) -> Result<()> {
    let rows = m.values().iter().zip(m.errors()).enumerate().map(|(j, (c, e))| {
        vec![j.to_string(), fmt_f64(c.re), fmt_f64(c.im), fmt_f64(*e)]
    });
    write_table(out, comments, &MOMENT_HEADER, rows)
}

/// Moments must be listed as `j = 0, 1, 2, …`.
pub fn read_moments<R: Read>(input: R, normalized: bool) -> Result<MomentSequence> {
    let rows = read_table(input, &MOMENT_HEADER)?;
    let mut values = Vec::with_capacity(rows.len());
    let mut errors = Vec::with_capacity(rows.len());
    for (i, row) in rows.iter().enumerate() {
        if parse_index(&row[0])? != i {
            return Err(Error::Parse(format!("moment rows out of order at row {i}")));
        }
        values.push(Complex64::new(parse_f64(&row[1])?, parse_f64(&row[2])?));
        errors.push(parse_f64(&row[3])?);
    }
    MomentSequence::from_values(values, normalized)?.with_errors(errors)
}

/// One row per coefficient `a_k` with `κ_k`; the final `κ_n` follows from
/// the coefficients.
pub fn write_verblunsky<W: Write>(out: W, comments: &[String], v: &VerblunskyCoefficients) -> Result<()> {
    let rows = v.coefficients().iter().enumerate().map(|(k, a)| {
        vec![k.to_string(), fmt_f64(a.re), fmt_f64(a.im), fmt_f64(v.norms()[k])]
    });
    write_table(out, comments, &VERBLUNSKY_HEADER, rows)
}

pub fn read_verblunsky<R: Read>(input: R) -> Result<VerblunskyCoefficients> {
    let rows = read_table(input, &VERBLUNSKY_HEADER)?;
    let mut coefficients = Vec::with_capacity(rows.len());
    let mut kappa0 = None;
    for (i, row) in rows.iter().enumerate() {
        if parse_index(&row[0])? != i {
            return Err(Error::Parse(format!("coefficient rows out of order at row {i}")));
        }
        coefficients.push(Complex64::new(parse_f64(&row[1])?, parse_f64(&row[2])?));
        if i == 0 {
            kappa0 = Some(parse_f64(&row[3])?);
        }
    }
    let kappa0 = kappa0.ok_or_else(|| Error::Parse("empty coefficient file".into()))?;
    VerblunskyCoefficients::new(coefficients, kappa0)
}

pub fn write_deviations<W: Write>(out: W, comments: &[String], samples: &[DeviationSample]) -> Result<()> {
    let rows = samples.iter().map(|s| {
        vec![
            s.n.to_string(),
            fmt_f64(s.z1.re),
            fmt_f64(s.z1.im),
            fmt_f64(s.z2.re),
            fmt_f64(s.z2.im),
            fmt_f64(s.ratio.re),
            fmt_f64(s.ratio.im),
            fmt_f64(s.universal.re),
            fmt_f64(s.universal.im),
            fmt_f64(s.deviation),
        ]
    });
    write_table(out, comments, &DEVIATION_HEADER, rows)
}

pub fn write_entropy_profile<W: Write>(out: W, comments: &[String], p: &EntropyProfile) -> Result<()> {
    let rows = p.rho.iter().zip(&p.values).map(|(rho, k)| {
        let gap = 1.0 - rho;
        vec![
            fmt_f64(*rho),
            fmt_f64(gap),
            fmt_f64(*k),
            fmt_opt(p.plain.map(|f| f.predict(crate::entropy::FitModel::Plain.scale(gap)))),
            fmt_opt(
                p.log_corrected
                    .map(|f| f.predict(crate::entropy::FitModel::LogCorrected.scale(gap))),
            ),
        ]
    });
    write_table(out, comments, &ENTROPY_HEADER, rows)
}

pub fn write_rate<W: Write>(out: W, comments: &[String], records: &[RateRecord]) -> Result<()> {
    let rows = records.iter().map(|r| {
        vec![
            r.n.to_string(),
            fmt_f64(r.x_n),
            fmt_f64(r.d),
            fmt_opt(r.alpha_cand),
            fmt_opt(r.c_alpha_cand),
        ]
    });
    write_table(out, comments, &RATE_HEADER, rows)
}

pub fn read_rate<R: Read>(input: R) -> Result<Vec<RateRecord>> {
    read_table(input, &RATE_HEADER)?
        .iter()
        .map(|row| {
            Ok(RateRecord {
                n: parse_index(&row[0])?,
                x_n: parse_f64(&row[1])?,
                d: parse_f64(&row[2])?,
                alpha_cand: parse_opt(&row[3])?,
                c_alpha_cand: parse_opt(&row[4])?,
            })
        })
        .collect()
}

pub fn write_figure2<W: Write>(out: W, comments: &[String], t: &Figure2Table) -> Result<()> {
    let rows = t
        .rows
        .iter()
        .map(|r| vec![r.n.to_string(), fmt_f64(r.f1), fmt_opt(r.f2)]);
    write_table(out, comments, &FIGURE2_HEADER, rows)
}

pub fn write_theorem1<W: Write>(out: W, comments: &[String], reports: &[Theorem1Report]) -> Result<()> {
    let rows = reports.iter().map(|r| {
        vec![
            r.n.to_string(),
            fmt_f64(r.lhs),
            fmt_f64(r.entropy_sup),
            fmt_f64(r.rhs_core),
            fmt_opt(r.empirical_ratio),
        ]
    });
    write_table(out, comments, &THEOREM1_HEADER, rows)
}

/// Parses `(θ, w)` samples: one pair per line separated by a comma or
/// whitespace, `#` comments, and an optional non-numeric header line.
pub fn parse_samples(text: &str) -> Result<Vec<(f64, f64)>> {
    let mut out = Vec::new();
    let mut seen_data = false;
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|f| !f.is_empty())
            .collect();
        let parsed = match fields.as_slice() {
            [t, w] => crate::parse::parse_angle(t).ok().zip(w.parse::<f64>().ok()),
            _ => None,
        };
        match parsed {
            Some(pair) => {
                out.push(pair);
                seen_data = true;
            }
            None if !seen_data && out.is_empty() => {
                // header line
                seen_data = true;
            }
            None => {
                return Err(Error::Parse(format!(
                    "line {}: expected `theta, w`, got {raw:?}",
                    lineno + 1
                )))
            }
        }
    }
    if out.is_empty() {
        return Err(Error::Parse("no samples found".into()));
    }
    Ok(out)
}

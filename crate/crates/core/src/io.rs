//! CSV serialisation of item banks and Monte Carlo samples.
//!
//! Reals are written with 17 significant digits so files round-trip
//! losslessly. Column orders: `a,b,c,dim` for items (1-based `dim`) and
//! `eta_1..eta_d,y_1..y_m` for samples.

use std::io::{Read, Write};

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::model::{Item, ItemBank, MonteCarloSample};

/// `%.17g`-style formatting.
pub fn fmt_real(x: f64) -> String {
    if x == 0.0 {
        return if x.is_sign_negative() {
            "-0".into()
        } else {
            "0".into()
        };
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{:.16e}", x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    if !(-5..17).contains(&exp) {
        let mantissa = trim_zeros(mantissa);
        return format!(
            "{mantissa}e{}{:02}",
            if exp < 0 { '-' } else { '+' },
            exp.abs()
        );
    }
    let decimals = (16 - exp) as usize;
    trim_zeros(&format!("{:.*}", decimals, x)).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn csv_err(e: impl std::fmt::Display) -> Error {
    Error::Csv(e.to_string())
}

pub fn write_item_bank<W: Write>(w: W, bank: &ItemBank) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["a", "b", "c", "dim"]).map_err(csv_err)?;
    for it in bank.items() {
        out.write_record([
            fmt_real(it.a),
            fmt_real(it.b),
            fmt_real(it.c),
            (it.dim + 1).to_string(),
        ])
        .map_err(csv_err)?;
    }
    out.flush().map_err(csv_err)
}

pub fn read_item_bank<R: Read>(r: R) -> Result<ItemBank> {
    let mut rdr = csv::Reader::from_reader(r);
    let headers = rdr.headers().map_err(csv_err)?.clone();
    if headers.iter().collect::<Vec<_>>() != ["a", "b", "c", "dim"] {
        return Err(Error::Csv(format!(
            "item header must be a,b,c,dim, got {}",
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut items = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(csv_err)?;
        let field = |k: usize| -> Result<f64> {
            rec[k].trim().parse::<f64>().map_err(|e| {
                Error::Csv(format!(
                    "item row {}: column {}: {e}",
                    line + 1,
                    &headers[k]
                ))
            })
        };
        let dim: usize = rec[3]
            .trim()
            .parse()
            .map_err(|e| Error::Csv(format!("item row {}: dim: {e}", line + 1)))?;
        if dim == 0 {
            return Err(Error::Csv(format!("item row {}: dim is 1-based", line + 1)));
        }
        items.push(Item::new(field(0)?, field(1)?, field(2)?, dim - 1)?);
    }
    ItemBank::new(items)
}

pub fn write_sample<W: Write>(w: W, sample: &MonteCarloSample) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    let d = sample.eta.ncols();
    let m = sample.y.ncols();
    let header: Vec<String> = (1..=d)
        .map(|k| format!("eta_{k}"))
        .chain((1..=m).map(|j| format!("y_{j}")))
        .collect();
    out.write_record(&header).map_err(csv_err)?;
    for (eta, y) in sample.eta.rows().into_iter().zip(sample.y.rows()) {
        let rec: Vec<String> = eta
            .iter()
            .map(|v| fmt_real(*v))
            .chain(y.iter().map(|v| v.to_string()))
            .collect();
        out.write_record(&rec).map_err(csv_err)?;
    }
    out.flush().map_err(csv_err)
}

pub fn read_sample<R: Read>(r: R) -> Result<MonteCarloSample> {
    let mut rdr = csv::Reader::from_reader(r);
    let headers = rdr.headers().map_err(csv_err)?.clone();
    let d = headers.iter().take_while(|h| h.starts_with("eta_")).count();
    let m = headers.len() - d;
    for (j, h) in headers.iter().skip(d).enumerate() {
        if h != format!("y_{}", j + 1) {
            return Err(Error::Csv(format!("unexpected sample column {h}")));
        }
    }
    let mut eta = Vec::new();
    let mut y = Vec::new();
    let mut n = 0;
    for rec in rdr.records() {
        let rec = rec.map_err(csv_err)?;
        n += 1;
        for k in 0..d {
            eta.push(
                rec[k]
                    .trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Csv(format!("row {n}: {e}")))?,
            );
        }
        for j in 0..m {
            y.push(
                rec[d + j]
                    .trim()
                    .parse::<u8>()
                    .map_err(|e| Error::Csv(format!("row {n}: {e}")))?,
            );
        }
    }
    let eta = Array2::from_shape_vec((n, d), eta).map_err(csv_err)?;
    let y = Array2::from_shape_vec((n, m), y).map_err(csv_err)?;
    MonteCarloSample::new(eta, y)
}

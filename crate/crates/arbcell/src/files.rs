//! CSV readers and writers for every file the pipeline produces or
//! consumes. Floats are written with Rust's shortest round-trip
//! formatting, so save/load is lossless and output trees are
//! byte-reproducible.

use std::fs;
use std::io::Write;
use std::path::Path;

use arbcell_core::harness::{CheckupRecord, LedgerRow};
use arbcell_core::{PriceSeries, HOUR_S};

use crate::AppError;

fn bad_row(path: &Path, row: usize, what: &str) -> AppError {
    AppError::Data(format!("{}: row {row}: {what}", path.display()))
}

fn write_file(path: &Path, contents: &str) -> Result<(), AppError> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    let mut f = fs::File::create(path)?;
    f.write_all(contents.as_bytes())?;
    Ok(())
}

fn read_lines(path: &Path) -> Result<Vec<String>, AppError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| AppError::Data(format!("cannot read {}: {e}", path.display())))?;
    Ok(text.lines().map(str::to_string).collect())
}

fn expect_header(path: &Path, lines: &[String], header: &str) -> Result<(), AppError> {
    match lines.first() {
        Some(h) if h == header => Ok(()),
        Some(h) => Err(AppError::Data(format!(
            "{}: expected header `{header}`, found `{h}`",
            path.display()
        ))),
        None => Err(AppError::Data(format!("{}: empty file", path.display()))),
    }
}

fn parse_f64(path: &Path, row: usize, field: &str) -> Result<f64, AppError> {
    field
        .trim()
        .parse::<f64>()
        .map_err(|_| bad_row(path, row, &format!("`{field}` is not a number")))
}

fn parse_u64(path: &Path, row: usize, field: &str) -> Result<u64, AppError> {
    field
        .trim()
        .parse::<u64>()
        .map_err(|_| bad_row(path, row, &format!("`{field}` is not a timestamp")))
}

// ---------------------------------------------------------------- prices

pub const PRICES_HEADER: &str = "timestamp,price_eur_mwh";

pub fn write_prices(path: &Path, prices: &PriceSeries) -> Result<(), AppError> {
    let mut out = String::with_capacity(prices.len() * 24);
    out.push_str(PRICES_HEADER);
    out.push('\n');
    for (k, p) in prices.prices().iter().enumerate() {
        let t = prices.start_s() + k as u64 * prices.period_s();
        out.push_str(&format!("{t},{p}\n"));
    }
    write_file(path, &out)
}

/// Loads an hourly price CSV. Rows must be exactly one hour apart:
/// duplicated or missing hours are rejected with the offending row.
pub fn load_prices(path: &Path) -> Result<PriceSeries, AppError> {
    let lines = read_lines(path)?;
    expect_header(path, &lines, PRICES_HEADER)?;
    let mut start_s = 0u64;
    let mut prices = Vec::with_capacity(lines.len().saturating_sub(1));
    for (idx, line) in lines.iter().enumerate().skip(1) {
        let row = idx + 1;
        let Some((ts, price)) = line.split_once(',') else {
            return Err(bad_row(path, row, "expected `timestamp,price`"));
        };
        let t = parse_u64(path, row, ts)?;
        let p = parse_f64(path, row, price)?;
        if !p.is_finite() {
            return Err(bad_row(path, row, "price is not finite"));
        }
        if prices.is_empty() {
            start_s = t;
        } else {
            let expect = start_s + prices.len() as u64 * HOUR_S;
            if t != expect {
                let what = if t < expect {
                    "duplicate or out-of-order hour"
                } else {
                    "missing hour before this row"
                };
                return Err(bad_row(path, row, what));
            }
        }
        prices.push(p);
    }
    PriceSeries::from_hourly(start_s, prices)
        .map_err(|e| AppError::Data(format!("{}: {e}", path.display())))
}

// -------------------------------------------------------------- schedule

pub const SCHEDULE_HEADER: &str = "timestamp,power_w,price_eur_mwh,soc,objective_cum_eur";

pub struct ScheduleRows<'a> {
    pub start_s: u64,
    pub step_s: u64,
    pub power_w: &'a [f64],
    pub prices: &'a [f64],
    pub soc: &'a [f64],
    pub objective_cum_eur: &'a [f64],
}

pub fn write_schedule(path: &Path, rows: &ScheduleRows<'_>) -> Result<(), AppError> {
    let mut out = String::with_capacity(rows.power_w.len() * 48);
    out.push_str(SCHEDULE_HEADER);
    out.push('\n');
    for k in 0..rows.power_w.len() {
        let t = rows.start_s + k as u64 * rows.step_s;
        out.push_str(&format!(
            "{t},{},{},{},{}\n",
            rows.power_w[k], rows.prices[k], rows.soc[k], rows.objective_cum_eur[k]
        ));
    }
    write_file(path, &out)
}

/// Returns (start_s, hourly setpoints).
pub fn load_schedule(path: &Path) -> Result<(u64, Vec<f64>), AppError> {
    let lines = read_lines(path)?;
    expect_header(path, &lines, SCHEDULE_HEADER)?;
    let mut start_s = 0u64;
    let mut powers = Vec::new();
    for (idx, line) in lines.iter().enumerate().skip(1) {
        let row = idx + 1;
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 5 {
            return Err(bad_row(path, row, "expected 5 fields"));
        }
        let t = parse_u64(path, row, fields[0])?;
        if powers.is_empty() {
            start_s = t;
        } else if t != start_s + powers.len() as u64 * HOUR_S {
            return Err(bad_row(path, row, "schedule rows must be hourly"));
        }
        powers.push(parse_f64(path, row, fields[1])?);
    }
    if powers.is_empty() {
        return Err(AppError::Data(format!("{}: no rows", path.display())));
    }
    Ok((start_s, powers))
}

// ---------------------------------------------------------------- ledger

pub const LEDGER_HEADER: &str = "timestamp,power_w,voltage_v,temperature_k,fec_cum,revenue_cum_eur";

pub fn write_ledger(path: &Path, rows: &[LedgerRow]) -> Result<(), AppError> {
    let mut out = String::with_capacity(rows.len() * 64);
    out.push_str(LEDGER_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.t_s, r.power_w, r.voltage_v, r.temperature_k, r.fec_cum, r.revenue_cum_eur
        ));
    }
    write_file(path, &out)
}

pub fn load_ledger(path: &Path) -> Result<Vec<LedgerRow>, AppError> {
    let lines = read_lines(path)?;
    expect_header(path, &lines, LEDGER_HEADER)?;
    let mut rows = Vec::with_capacity(lines.len().saturating_sub(1));
    for (idx, line) in lines.iter().enumerate().skip(1) {
        let row = idx + 1;
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 6 {
            return Err(bad_row(path, row, "expected 6 fields"));
        }
        rows.push(LedgerRow {
            t_s: parse_u64(path, row, fields[0])?,
            power_w: parse_f64(path, row, fields[1])?,
            voltage_v: parse_f64(path, row, fields[2])?,
            temperature_k: parse_f64(path, row, fields[3])?,
            fec_cum: parse_f64(path, row, fields[4])?,
            revenue_cum_eur: parse_f64(path, row, fields[5])?,
            mean_abs_current_a: 0.0,
            soc: f64::NAN,
        });
    }
    Ok(rows)
}

// -------------------------------------------------------------- checkups

pub const CHECKUP_HEADER: &str = "timestamp,capacity_wh";

pub fn write_checkups(path: &Path, checkups: &[CheckupRecord]) -> Result<(), AppError> {
    let mut out = String::new();
    out.push_str(CHECKUP_HEADER);
    out.push('\n');
    for c in checkups {
        out.push_str(&format!("{},{}\n", c.t_s, c.capacity_wh));
    }
    write_file(path, &out)
}

pub fn load_checkups(path: &Path) -> Result<Vec<CheckupRecord>, AppError> {
    let lines = read_lines(path)?;
    expect_header(path, &lines, CHECKUP_HEADER)?;
    let mut out = Vec::new();
    for (idx, line) in lines.iter().enumerate().skip(1) {
        let row = idx + 1;
        let Some((ts, cap)) = line.split_once(',') else {
            return Err(bad_row(path, row, "expected `timestamp,capacity_wh`"));
        };
        out.push(CheckupRecord {
            t_s: parse_u64(path, row, ts)?,
            capacity_wh: parse_f64(path, row, cap)?,
            fec: 0.0,
        });
    }
    Ok(out)
}

// ------------------------------------------------------------- summaries

/// Small key/value CSV used for per-scenario planning summaries.
pub fn write_summary(path: &Path, pairs: &[(&str, String)]) -> Result<(), AppError> {
    let mut out = String::from("key,value\n");
    for (k, v) in pairs {
        out.push_str(&format!("{k},{v}\n"));
    }
    write_file(path, &out)
}

pub fn load_summary(path: &Path) -> Result<std::collections::BTreeMap<String, String>, AppError> {
    let lines = read_lines(path)?;
    expect_header(path, &lines, "key,value")?;
    let mut map = std::collections::BTreeMap::new();
    for (idx, line) in lines.iter().enumerate().skip(1) {
        let Some((k, v)) = line.split_once(',') else {
            return Err(bad_row(path, idx + 1, "expected `key,value`"));
        };
        map.insert(k.to_string(), v.to_string());
    }
    Ok(map)
}

pub fn summary_f64(
    map: &std::collections::BTreeMap<String, String>,
    key: &str,
    path: &Path,
) -> Result<f64, AppError> {
    map.get(key)
        .ok_or_else(|| AppError::Data(format!("{}: missing key `{key}`", path.display())))?
        .parse::<f64>()
        .map_err(|_| AppError::Data(format!("{}: key `{key}` is not a number", path.display())))
}

// ----------------------------------------------------------- OCV tables

/// Two-column CSV `stoichiometry,potential_V`.
pub fn load_ocv_table(path: &Path) -> Result<Vec<(f64, f64)>, AppError> {
    load_two_column_csv(path, "stoichiometry", "potential_V")
}

pub fn load_two_column_csv(
    path: &Path,
    col_a: &str,
    col_b: &str,
) -> Result<Vec<(f64, f64)>, AppError> {
    let lines = read_lines(path)?;
    expect_header(path, &lines, &format!("{col_a},{col_b}"))?;
    let mut out = Vec::new();
    for (idx, line) in lines.iter().enumerate().skip(1) {
        let row = idx + 1;
        let Some((a, b)) = line.split_once(',') else {
            return Err(bad_row(path, row, "expected two fields"));
        };
        out.push((parse_f64(path, row, a)?, parse_f64(path, row, b)?));
    }
    Ok(out)
}

pub fn write_ocv_table(path: &Path, table: &[(f64, f64)]) -> Result<(), AppError> {
    let mut out = String::from("stoichiometry,potential_V\n");
    for (x, u) in table {
        out.push_str(&format!("{x},{u}\n"));
    }
    write_file(path, &out)
}

// ------------------------------------------------------- generic figures

/// Plot-ready two-column CSV.
pub fn write_xy(path: &Path, header: &str, rows: &[(f64, f64)]) -> Result<(), AppError> {
    let mut out = String::with_capacity(rows.len() * 24);
    out.push_str(header);
    out.push('\n');
    for (x, y) in rows {
        out.push_str(&format!("{x},{y}\n"));
    }
    write_file(path, &out)
}

/// Plot-ready CSV with arbitrary string rows (first line is the header).
pub fn write_table(path: &Path, header: &str, rows: &[String]) -> Result<(), AppError> {
    let mut out = String::with_capacity(rows.len() * 48 + header.len() + 1);
    out.push_str(header);
    out.push('\n');
    for r in rows {
        out.push_str(r);
        out.push('\n');
    }
    write_file(path, &out)
}

//! Python-free half of the bindings: parsing inputs and flattening results
//! into TOML values that map one-to-one onto Python objects.

use fracwave::config::SimulationConfig;
use fracwave::solver::{BlowupRecord, SeriesPoint};
use fracwave::Error;
use serde::Serialize;

/// Which Python exception a core error becomes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Value,
    Runtime,
}

pub fn classify(err: &Error) -> ErrorClass {
    match err {
        Error::InvalidParameter { .. } | Error::InvalidGrid(_) | Error::Config(_) => ErrorClass::Value,
        _ => ErrorClass::Runtime,
    }
}

pub fn parse_config(text: &str) -> fracwave::Result<SimulationConfig> {
    SimulationConfig::from_toml_str(text)
}

pub fn to_value<T: Serialize>(value: &T) -> fracwave::Result<toml::Value> {
    toml::Value::try_from(value).map_err(|e| Error::Config(format!("cannot convert result: {e}")))
}

pub fn series_value(series: &[SeriesPoint]) -> toml::Value {
    let column = |f: fn(&SeriesPoint) -> f64| toml::Value::Array(series.iter().map(|s| toml::Value::Float(f(s))).collect());
    let mut table = toml::Table::new();
    table.insert("t".into(), column(|s| s.t));
    table.insert("sup_norm".into(), column(|s| s.sup_norm));
    table.insert("l2_norm".into(), column(|s| s.l2_norm));
    table.insert("I_eps".into(), column(|s| s.i_eps));
    table.insert("A_heat".into(), column(|s| s.a_heat));
    table.insert("dt".into(), column(|s| s.dt));
    toml::Value::Table(table)
}

/// The serialized record plus its functional time series (column-wise).
pub fn record_value(record: &BlowupRecord) -> fracwave::Result<toml::Value> {
    let mut value = to_value(record)?;
    if let toml::Value::Table(t) = &mut value {
        t.insert("series".into(), series_value(&record.functional_series));
    }
    Ok(value)
}

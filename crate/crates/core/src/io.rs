//! File formats: walk traces, batch outputs, plans and fit results.

use serde::de::{MapAccess, Visitor};
use serde::ser::SerializeMap;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::fmt;
use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::experiments::{best_m_table, surface, BatchPlan, BatchResult, BestMRow, CellStats};
use crate::fitting::FitResult;
use crate::walk::WalkResult;
use crate::weights::WeightScheme;

pub fn write_walk_json<W: Write>(result: &WalkResult, mut out: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, result)?;
    out.write_all(b"\n")?;
    out.flush()?;
    Ok(())
}

/// Two columns: `step,probability`.
pub fn write_walk_csv<W: Write>(result: &WalkResult, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["step", "probability"])?;
    for (t, p) in result.probabilities.iter().enumerate() {
        w.write_record([t.to_string(), p.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// Load a batch plan; `.json` files are JSON, anything else is tried as TOML
/// and then JSON.
pub fn load_plan(path: &Path) -> Result<BatchPlan> {
    load_plan_with(path, None)
}

/// As [`load_plan`], filling in `master_seed` from `seed_default` when the
/// file does not set it.
pub fn load_plan_with(path: &Path, seed_default: Option<u64>) -> Result<BatchPlan> {
    let text = fs::read_to_string(path)?;
    let is_json = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
    let mut value: serde_json::Value = if is_json {
        serde_json::from_str(&text)?
    } else {
        match toml::from_str(&text) {
            Ok(v) => v,
            Err(toml_err) => {
                serde_json::from_str(&text).map_err(|_| Error::Parse(format!("{}: {toml_err}", path.display())))?
            }
        }
    };
    if let (Some(seed), Some(table)) = (seed_default, value.as_object_mut()) {
        table.entry("master_seed").or_insert(seed.into());
    }
    let plan: BatchPlan =
        serde_json::from_value(value).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    plan.validate()?;
    Ok(plan)
}

/// Summary of a batch: per-cell statistics keyed `scheme/k/m` plus the
/// best-`m` table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BatchSummary {
    pub plan: BatchPlan,
    #[serde(with = "keyed_cells")]
    pub cells: Vec<CellStats>,
    pub best_m: Vec<BestMRow>,
}

impl BatchSummary {
    pub fn from_result(result: &BatchResult) -> Self {
        let cells: Vec<CellStats> = result.cells.iter().map(|c| c.stats.clone()).collect();
        BatchSummary {
            plan: result.plan.clone(),
            best_m: best_m_table(&cells),
            cells,
        }
    }

    pub fn cell(&self, scheme: &WeightScheme, k: usize, m: usize) -> Option<&CellStats> {
        self.cells.iter().find(|c| c.scheme == *scheme && c.k == k && c.m == m)
    }

    pub fn best(&self, scheme: &WeightScheme, k: usize) -> Option<&BestMRow> {
        self.best_m.iter().find(|r| r.scheme == *scheme && r.k == k)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
    }
}

/// A JSON object whose keys follow the vector's order.
mod keyed_cells {
    use super::*;

    pub fn serialize<S: Serializer>(cells: &[CellStats], s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(cells.len()))?;
        for c in cells {
            map.serialize_entry(&c.key(), c)?;
        }
        map.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<CellStats>, D::Error> {
        struct Cells;
        impl<'de> Visitor<'de> for Cells {
            type Value = Vec<CellStats>;
            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a map of scheme/k/m to cell statistics")
            }
            fn visit_map<A: MapAccess<'de>>(self, mut map: A) -> std::result::Result<Self::Value, A::Error> {
                let mut out = Vec::new();
                while let Some((_, cell)) = map.next_entry::<String, CellStats>()? {
                    out.push(cell);
                }
                Ok(out)
            }
        }
        d.deserialize_map(Cells)
    }
}

/// Long format, one row per `(scheme, k, m, sample)`.
pub fn write_long_csv<W: Write>(result: &BatchResult, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "scheme",
        "k",
        "m",
        "sample",
        "marked",
        "peak_probability",
        "peak_step",
        "first_peak_step",
        "first_peak_probability",
        "error",
    ])?;
    for cell in &result.cells {
        let s = &cell.stats;
        for row in &cell.samples {
            let marked = row
                .marked
                .vertices()
                .iter()
                .map(|v| v.to_string())
                .collect::<Vec<_>>()
                .join(" ");
            w.write_record([
                s.scheme.to_string(),
                s.k.to_string(),
                s.m.to_string(),
                row.sample.to_string(),
                marked,
                row.peak_probability.to_string(),
                row.peak_step.to_string(),
                row.first_peak_step.to_string(),
                row.first_peak_probability.to_string(),
                row.error.clone().unwrap_or_default(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// `k × m` matrix of mean peak probabilities for one scheme; first column is `k`.
pub fn write_surface_csv<W: Write>(result: &BatchResult, scheme: &WeightScheme, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["k".to_string()];
    header.extend(result.plan.m_range.iter().map(|m| format!("m={m}")));
    w.write_record(&header)?;
    for (k, row) in surface(result, scheme) {
        let mut rec = vec![k.to_string()];
        rec.extend(row.iter().map(|p| p.to_string()));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// File-name-safe form of a scheme name.
pub fn scheme_slug(scheme: &WeightScheme) -> String {
    scheme
        .to_string()
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '_' || c == '.' {
                c
            } else {
                '_'
            }
        })
        .collect()
}

pub fn write_fit_json<W: Write>(fit: &FitResult, mut out: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, fit)?;
    out.write_all(b"\n")?;
    out.flush()?;
    Ok(())
}

/// `x,t,t_fit` per fitted point.
pub fn write_fit_csv<W: Write>(fit: &FitResult, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["x", "t", "t_fit"])?;
    for p in &fit.points {
        w.write_record([p.x.to_string(), p.t.to_string(), fit.predict(p.x).to_string()])?;
    }
    w.flush()?;
    Ok(())
}

//! CSV and JSON import/export. Every CSV has a header row whose column names
//! carry their units.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};
use crate::gaopt::GenerationStats;
use crate::harness::{CreCurve, DropRecord};
use crate::hexopt::GridPoint;
use crate::propagation::EmpiricalCdf;
use crate::radio::{linear_to_db, SeReport};
use crate::scenario::{NetworkLayout, NodeType, Point3};

#[derive(Debug, Serialize, Deserialize)]
struct NodeRow {
    node_type: NodeType,
    x_km: f64,
    y_km: f64,
    z_m: f64,
}

pub fn write_layout_csv<W: Write>(layout: &NetworkLayout, w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    let tiers = [
        (NodeType::Mbs, &layout.mbs),
        (NodeType::Uabs, &layout.uabs),
        (NodeType::Ue, &layout.ue),
    ];
    let mut any = false;
    for (node_type, pts) in tiers {
        for p in pts {
            any = true;
            wr.serialize(NodeRow {
                node_type,
                x_km: p.x_km,
                y_km: p.y_km,
                z_m: p.z_m,
            })?;
        }
    }
    if !any {
        wr.write_record(["node_type", "x_km", "y_km", "z_m"])?;
    }
    wr.flush()?;
    Ok(())
}

/// Reads a layout CSV. Effective powers are not stored in the file and are
/// taken from the arguments.
pub fn read_layout_csv<R: Read>(r: R, mbs_eff_power_dbm: f64, uabs_eff_power_dbm: f64) -> Result<NetworkLayout> {
    let mut layout = NetworkLayout {
        mbs: Vec::new(),
        uabs: Vec::new(),
        ue: Vec::new(),
        mbs_eff_power_dbm,
        uabs_eff_power_dbm,
    };
    for row in csv::Reader::from_reader(r).deserialize() {
        let row: NodeRow = row?;
        if !(row.x_km.is_finite() && row.y_km.is_finite() && row.z_m.is_finite()) {
            return Err(SimError::Parse("non-finite coordinate in layout".into()));
        }
        let p = Point3::new(row.x_km, row.y_km, row.z_m);
        match row.node_type {
            NodeType::Mbs => layout.mbs.push(p),
            NodeType::Uabs => layout.uabs.push(p),
            NodeType::Ue => layout.ue.push(p),
        }
    }
    Ok(layout)
}

pub fn write_cdf_csv<W: Write>(cdf: &EmpiricalCdf, w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(["loss_db", "cum_prob"])?;
    for (x, p) in cdf.points() {
        wr.write_record([x.to_string(), p.to_string()])?;
    }
    wr.flush()?;
    Ok(())
}

pub fn write_report_json<W: Write>(report: &SeReport, w: W) -> Result<()> {
    serde_json::to_writer_pretty(w, report)?;
    Ok(())
}

pub fn read_report_json<R: Read>(r: R) -> Result<SeReport> {
    Ok(serde_json::from_reader(r)?)
}

/// One row per UE: class, serving station, effective SIR and SE.
pub fn write_ue_csv<W: Write>(report: &SeReport, w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(["ue_index", "class", "serving_station", "sir_db", "se_bpshz"])?;
    for (a, se) in report.allocations.iter().zip(&report.per_ue_se) {
        wr.write_record([
            a.ue_index.to_string(),
            a.class.as_str().to_string(),
            a.serving.to_string(),
            linear_to_db(a.effective_sir()).to_string(),
            se.to_string(),
        ])?;
    }
    wr.flush()?;
    Ok(())
}

pub fn write_grid_csv<W: Write>(points: &[GridPoint], w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(["tau_db", "alpha", "rho_db", "rho_prime_db", "fifth_pse"])?;
    for p in points {
        wr.write_record([
            p.params.tau_db.to_string(),
            p.params.alpha.to_string(),
            p.params.rho_db.to_string(),
            p.params.rho_prime_db.to_string(),
            p.fifth_pse.to_string(),
        ])?;
    }
    wr.flush()?;
    Ok(())
}

pub fn write_history_csv<W: Write>(history: &[GenerationStats], w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(["generation", "best", "mean"])?;
    for h in history {
        wr.write_record([h.generation.to_string(), h.best.to_string(), h.mean.to_string()])?;
    }
    wr.flush()?;
    Ok(())
}

pub fn read_history_csv<R: Read>(r: R) -> Result<Vec<GenerationStats>> {
    csv::Reader::from_reader(r)
        .deserialize()
        .map(|row| row.map_err(SimError::from))
        .collect()
}

const DROP_HEADER: [&str; 10] = [
    "drop_id",
    "n_uabs",
    "destroy_fraction",
    "mode",
    "tau_db",
    "alpha",
    "rho_db",
    "rho_prime_db",
    "fifth_pse",
    "elapsed_s",
];

pub fn write_drops_csv<W: Write>(drops: &[DropRecord], w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(DROP_HEADER)?;
    for d in drops {
        wr.write_record([
            d.drop_id.to_string(),
            d.n_uabs.to_string(),
            d.destroy_fraction.to_string(),
            d.mode.as_str().to_string(),
            d.tau_db.to_string(),
            d.alpha.to_string(),
            d.rho_db.to_string(),
            d.rho_prime_db.to_string(),
            d.fifth_pse.to_string(),
            d.elapsed_s.to_string(),
        ])?;
    }
    wr.flush()?;
    Ok(())
}

pub fn read_drops_csv<R: Read>(r: R) -> Result<Vec<DropRecord>> {
    let mut rd = csv::Reader::from_reader(r);
    let header = rd.headers()?.clone();
    if header.iter().ne(DROP_HEADER) {
        return Err(SimError::Parse(format!("unexpected drop CSV header {header:?}")));
    }
    let num = |s: &str| -> Result<f64> { s.parse::<f64>().map_err(|e| SimError::Parse(format!("{s:?}: {e}"))) };
    let int = |s: &str| -> Result<usize> { s.parse::<usize>().map_err(|e| SimError::Parse(format!("{s:?}: {e}"))) };
    rd.records()
        .map(|rec| {
            let rec = rec?;
            Ok(DropRecord {
                drop_id: int(&rec[0])?,
                n_uabs: int(&rec[1])?,
                destroy_fraction: num(&rec[2])?,
                mode: rec[3].parse()?,
                tau_db: num(&rec[4])?,
                alpha: num(&rec[5])?,
                rho_db: num(&rec[6])?,
                rho_prime_db: num(&rec[7])?,
                fifth_pse: num(&rec[8])?,
                elapsed_s: num(&rec[9])?,
            })
        })
        .collect()
}

/// Wide CRE-sweep table: one row per τ and one mean/std column pair per
/// (n_uabs, destroy_fraction) curve. All curves must share the τ axis.
pub fn write_sweep_csv<W: Write>(curves: &[CreCurve], w: W) -> Result<()> {
    let first = curves.first().ok_or(SimError::Empty("CRE curves"))?;
    if curves.iter().any(|c| c.tau_db != first.tau_db) {
        return Err(SimError::Parse("curves do not share the same tau axis".into()));
    }
    let mut wr = csv::Writer::from_writer(w);
    let mut header = vec!["tau_db".to_string()];
    for c in curves {
        let tag = format!("u{}_d{}", c.n_uabs, c.destroy_fraction);
        header.push(format!("mean_fifth_pse_bpshz_{tag}"));
        header.push(format!("std_fifth_pse_bpshz_{tag}"));
    }
    wr.write_record(&header)?;
    for (t, tau) in first.tau_db.iter().enumerate() {
        let mut row = vec![tau.to_string()];
        for c in curves {
            row.push(c.mean_fifth_pse[t].to_string());
            row.push(c.std_fifth_pse[t].to_string());
        }
        wr.write_record(&row)?;
    }
    wr.flush()?;
    Ok(())
}

/// Any serializable rows, header taken from the field names.
pub fn write_records_csv<T: Serialize, W: Write>(rows: &[T], w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    for r in rows {
        wr.serialize(r)?;
    }
    wr.flush()?;
    Ok(())
}

pub fn write_json<T: Serialize, W: Write>(value: &T, w: W) -> Result<()> {
    serde_json::to_writer_pretty(w, value)?;
    Ok(())
}

pub fn read_json<T: for<'de> Deserialize<'de>, R: Read>(r: R) -> Result<T> {
    Ok(serde_json::from_reader(r)?)
}

pub fn create(path: &Path) -> Result<File> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    Ok(File::create(path)?)
}

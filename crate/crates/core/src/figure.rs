//! Optimum two-level fidelity against the measurement angle, for channels
//! of fixed entanglement entropy.

use std::io::{self, Write};

use serde::Serialize;

use crate::error::Result;
use crate::format::fmt12;
use crate::formulas::{entropy_to_channel_d2, f_overall_d2, f_theta_opt_d2};

/// Entropies (bits) of the plotted channels.
pub const FIGURE1_ENTROPIES: [f64; 4] = [0.0, 0.19, 0.55, 1.0];
/// `cosθ` grid: `0, 0.01, …, 0.99`.
pub const GRID_STEPS: usize = 100;

pub const CSV_HEADER: &str = "entropy_bits,cos_theta,fidelity_opt,is_arrow_point";

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Figure1Row {
    pub entropy_bits: f64,
    pub cos_theta: f64,
    pub fidelity_opt: f64,
    pub is_arrow_point: bool,
}

/// Rows for one channel. The arrow marks `cosθ = cosθ_c`; it gets its own
/// row when `cosθ_c` is off the grid.
pub fn curve(entropy_bits: f64) -> Result<Vec<Figure1Row>> {
    let ec = entropy_to_channel_d2(entropy_bits)?;
    let cc = ec.cos_theta_c;
    let on_grid = {
        let k = (cc * 100.0).round();
        (cc * 100.0 - k).abs() < 1e-9 && k < GRID_STEPS as f64
    };
    let mut rows = Vec::with_capacity(GRID_STEPS + 1);
    for k in 0..GRID_STEPS {
        let c = k as f64 / 100.0;
        rows.push(Figure1Row {
            entropy_bits,
            cos_theta: c,
            fidelity_opt: f_theta_opt_d2(cc, c)?,
            is_arrow_point: on_grid && (c - cc).abs() < 1e-9,
        });
    }
    if !on_grid {
        let arrow = Figure1Row {
            entropy_bits,
            cos_theta: cc,
            fidelity_opt: f_overall_d2(1.0 - cc.abs())?,
            is_arrow_point: true,
        };
        let at = rows.partition_point(|r| r.cos_theta < cc);
        rows.insert(at, arrow);
    }
    Ok(rows)
}

pub fn figure1() -> Result<Vec<Figure1Row>> {
    let mut rows = Vec::new();
    for s in FIGURE1_ENTROPIES {
        rows.extend(curve(s)?);
    }
    Ok(rows)
}

pub fn write_csv<W: Write>(rows: &[Figure1Row], mut w: W) -> io::Result<()> {
    writeln!(w, "{CSV_HEADER}")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{}",
            fmt12(r.entropy_bits),
            fmt12(r.cos_theta),
            fmt12(r.fidelity_opt),
            r.is_arrow_point as u8
        )?;
    }
    Ok(())
}

pub fn write_jsonl<W: Write>(rows: &[Figure1Row], mut w: W) -> io::Result<()> {
    for r in rows {
        serde_json::to_writer(&mut w, r)?;
        writeln!(w)?;
    }
    Ok(())
}

//! Trace persistence. Traces are CSV with one comment line of provenance,
//! a header row with SI units in the column names, and shortest-round-trip
//! float formatting so identical runs produce identical bytes.

use crate::sim::{JointSample, SimTrace, TraceRow};

#[derive(Debug, thiserror::Error)]
pub enum TraceIoError {
    #[error("trace csv: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("number in trace csv: {0}")]
    Number(#[from] std::num::ParseFloatError),
}

pub fn trace_to_csv(trace: &SimTrace, provenance: &str) -> String {
    let mut out = String::new();
    out.push_str(&format!("# {provenance}\n"));
    out.push_str(&format!(
        "# mode={} n_legs={} dt_s={} stuck={}\n",
        trace.mode_label, trace.n_legs, trace.dt, trace.stuck
    ));
    out.push_str("t_s,x_m,z_m,pitch_rad,roll_rad");
    for j in 0..trace.n_legs {
        out.push_str(&format!(
            ",joint{j}_angle_rad,joint{j}_velocity_rad_per_s,joint{j}_torque_n_m,joint{j}_contact"
        ));
    }
    out.push_str(",cum_work_j,stalled\n");
    for row in &trace.rows {
        out.push_str(&format!("{},{},{},{},{}", row.t, row.x, row.z, row.pitch, row.roll));
        for joint in &row.joints {
            out.push_str(&format!(
                ",{},{},{},{}",
                joint.angle,
                joint.velocity,
                joint.torque,
                u8::from(joint.contact)
            ));
        }
        out.push_str(&format!(",{},{}\n", row.cum_work, u8::from(row.stalled)));
    }
    out
}

pub fn trace_from_csv(text: &str) -> Result<SimTrace, TraceIoError> {
    let mut mode_label = String::from("unknown");
    let mut n_legs = 0usize;
    let mut dt = 0.0;
    let mut stuck = false;
    let mut rows = Vec::new();
    let mut header_seen = false;
    for line in text.lines() {
        if let Some(meta) = line.strip_prefix('#') {
            for field in meta.split_whitespace() {
                if let Some((k, v)) = field.split_once('=') {
                    match k {
                        "mode" => mode_label = v.to_string(),
                        "n_legs" => n_legs = v.parse().unwrap_or(0),
                        "dt_s" => dt = v.parse().unwrap_or(0.0),
                        "stuck" => stuck = v == "true",
                        _ => {}
                    }
                }
            }
            continue;
        }
        if !header_seen {
            if !line.starts_with("t_s,") {
                return Err(TraceIoError::Format("missing header row".into()));
            }
            if n_legs == 0 {
                n_legs = line.matches("_angle_rad").count();
            }
            header_seen = true;
            continue;
        }
        if line.is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').collect();
        let expect = 5 + 4 * n_legs + 2;
        if cells.len() != expect {
            return Err(TraceIoError::Format(format!(
                "row has {} cells, expected {expect}",
                cells.len()
            )));
        }
        let mut joints = Vec::with_capacity(n_legs);
        for j in 0..n_legs {
            let base = 5 + 4 * j;
            joints.push(JointSample {
                angle: cells[base].parse()?,
                velocity: cells[base + 1].parse()?,
                torque: cells[base + 2].parse()?,
                contact: cells[base + 3] == "1",
            });
        }
        rows.push(TraceRow {
            t: cells[0].parse()?,
            x: cells[1].parse()?,
            z: cells[2].parse()?,
            pitch: cells[3].parse()?,
            roll: cells[4].parse()?,
            joints,
            cum_work: cells[5 + 4 * n_legs].parse()?,
            stalled: cells[6 + 4 * n_legs] == "1",
        });
    }
    if !header_seen {
        return Err(TraceIoError::Format("empty trace file".into()));
    }
    Ok(SimTrace { dt, n_legs, mode_label, rows, stuck })
}

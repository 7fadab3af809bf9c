//! Execution traces: sparse JSON (one record per control step) and a dense
//! binary stream (one record per integration substep).
//!
//! Dense layout, little-endian: magic `CGTR`, `u32` version, `u64` record
//! count, then per record a `u32` step followed by 27 `f64`: commanded pose
//! (position, quaternion wxyz), simulated pose (same), twist (6), wrench (6)
//! and the deviation.

use std::io::{self, Read, Write};

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use contact_grasp_core::dynamics::Wrench;
use contact_grasp_core::executive::{Execution, ExecutionRecord, Outcome};
use contact_grasp_core::Twist;
use serde::{Deserialize, Serialize};

use crate::scene_file::PoseDto;

pub const DENSE_MAGIC: &[u8; 4] = b"CGTR";
pub const DENSE_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceRecord {
    pub step: usize,
    pub commanded: PoseDto,
    pub pose: PoseDto,
    pub twist: [f64; 6],
    pub f_ext: [f64; 6],
    pub deviation: f64,
}

impl From<&ExecutionRecord> for TraceRecord {
    fn from(r: &ExecutionRecord) -> Self {
        Self {
            step: r.step,
            commanded: PoseDto::from(&r.commanded),
            pose: PoseDto::from(&r.pose),
            twist: twist_array(&r.twist),
            f_ext: wrench_array(&r.f_ext),
            deviation: r.deviation,
        }
    }
}

fn twist_array(t: &Twist) -> [f64; 6] {
    t.to_vector().into()
}

fn wrench_array(w: &Wrench) -> [f64; 6] {
    w.to_vector().into()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceSummary {
    pub outcome: Outcome,
    pub steps_completed: usize,
    pub final_pose: PoseDto,
    pub max_deviation: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceFile {
    pub records: Vec<TraceRecord>,
    pub summary: TraceSummary,
}

impl TraceFile {
    pub fn from_execution(ex: &Execution) -> Self {
        let records: Vec<TraceRecord> = ex.records.iter().map(TraceRecord::from).collect();
        let max_deviation = records.iter().map(|r| r.deviation).fold(0.0, f64::max);
        Self {
            records,
            summary: TraceSummary {
                outcome: ex.outcome,
                steps_completed: ex.steps_completed,
                final_pose: PoseDto::from(&ex.final_state.pose),
                max_deviation,
            },
        }
    }

    /// Step indices never decrease.
    pub fn is_monotone(&self) -> bool {
        self.records.windows(2).all(|w| w[0].step <= w[1].step)
    }
}

fn write_pose<W: Write>(w: &mut W, p: &PoseDto) -> io::Result<()> {
    for v in p.position.iter().chain(p.quaternion.iter()) {
        w.write_f64::<LittleEndian>(*v)?;
    }
    Ok(())
}

fn read_pose<R: Read>(r: &mut R) -> io::Result<PoseDto> {
    let mut position = [0.0; 3];
    let mut quaternion = [0.0; 4];
    r.read_f64_into::<LittleEndian>(&mut position)?;
    r.read_f64_into::<LittleEndian>(&mut quaternion)?;
    Ok(PoseDto {
        position,
        quaternion,
    })
}

pub fn write_dense<W: Write>(records: &[TraceRecord], mut w: W) -> io::Result<()> {
    w.write_all(DENSE_MAGIC)?;
    w.write_u32::<LittleEndian>(DENSE_VERSION)?;
    w.write_u64::<LittleEndian>(records.len() as u64)?;
    for r in records {
        let step = u32::try_from(r.step)
            .map_err(|_| io::Error::new(io::ErrorKind::InvalidInput, "step index too large"))?;
        w.write_u32::<LittleEndian>(step)?;
        write_pose(&mut w, &r.commanded)?;
        write_pose(&mut w, &r.pose)?;
        for v in r.twist.iter().chain(r.f_ext.iter()) {
            w.write_f64::<LittleEndian>(*v)?;
        }
        w.write_f64::<LittleEndian>(r.deviation)?;
    }
    w.flush()
}

pub fn read_dense<R: Read>(mut r: R) -> io::Result<Vec<TraceRecord>> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != DENSE_MAGIC {
        return Err(io::Error::new(
            io::ErrorKind::InvalidData,
            "not a dense trace",
        ));
    }
    let version = r.read_u32::<LittleEndian>()?;
    if version != DENSE_VERSION {
        return Err(io::Error::new(
            io::ErrorKind::InvalidData,
            format!("unsupported trace version {version}"),
        ));
    }
    let count = r.read_u64::<LittleEndian>()?;
    let mut out = Vec::new();
    for _ in 0..count {
        let step = r.read_u32::<LittleEndian>()? as usize;
        let commanded = read_pose(&mut r)?;
        let pose = read_pose(&mut r)?;
        let mut twist = [0.0; 6];
        let mut f_ext = [0.0; 6];
        r.read_f64_into::<LittleEndian>(&mut twist)?;
        r.read_f64_into::<LittleEndian>(&mut f_ext)?;
        let deviation = r.read_f64::<LittleEndian>()?;
        out.push(TraceRecord {
            step,
            commanded,
            pose,
            twist,
            f_ext,
            deviation,
        });
    }
    Ok(out)
}

//! Level-by-level storage allocation with best-fit rows and lazy resets.

use super::{AreaError, CrossbarLayout};
use crate::lut::LutGraph;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DeviceStatus {
    Free,
    Live,
    Dirty,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum ScheduleEvent {
    /// Dirty devices of a storage wordline returned to the free pool.
    Reset { level: usize, wordline: usize, bits: Vec<usize>, luts: Vec<usize> },
    Allocate { level: usize, lut: usize, wordline: usize, bit: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Placement {
    /// `(wordline, bit)` of every LUT.
    pub device: Vec<(usize, usize)>,
    /// Allocations and resets in program order.
    pub events: Vec<ScheduleEvent>,
    /// Device status after the last level, indexed by storage row `s_i`.
    pub status: Vec<Vec<DeviceStatus>>,
}

/// Assigns every LUT a storage device. Rows are considered in the order
/// `s_0, s_1, ...`; ties go to the earlier row and bits fill lowest first.
pub fn schedule_luts(g: &LutGraph, layout: &CrossbarLayout) -> Result<Placement, AreaError> {
    let t = layout.storage_rows();
    if t == 0 {
        return Err(AreaError::Layout("the area layout needs at least one storage wordline".into()));
    }
    let w_d = layout.w_d;
    let succ = g.successors();
    let is_output: Vec<bool> = {
        let mut v = vec![false; g.len()];
        for &o in &g.outputs {
            v[o] = true;
        }
        v
    };
    let mut status = vec![vec![DeviceStatus::Free; w_d]; t];
    let mut owner: Vec<Vec<Option<usize>>> = vec![vec![None; w_d]; t];
    let mut device = vec![(usize::MAX, usize::MAX); g.len()];
    let mut events = Vec::new();

    for l in 1..=g.depth() {
        // devices whose consumers were all placed in earlier levels
        for r in 0..t {
            for b in 0..w_d {
                if let Some(n) = owner[r][b] {
                    if status[r][b] == DeviceStatus::Live && !is_output[n] && succ[n].iter().all(|&s| g.luts[s].level < l) {
                        status[r][b] = DeviceStatus::Dirty;
                    }
                }
            }
        }
        let mut remaining: Vec<usize> = g.luts.iter().filter(|x| x.level == l).map(|x| x.id).collect();
        while !remaining.is_empty() {
            let free: Vec<usize> = status.iter().map(|row| row.iter().filter(|&&s| s == DeviceStatus::Free).count()).collect();
            if free.iter().all(|&f| f == 0) {
                let dirty: Vec<usize> = status.iter().map(|row| row.iter().filter(|&&s| s == DeviceStatus::Dirty).count()).collect();
                let r = (0..t).max_by_key(|&r| (dirty[r], std::cmp::Reverse(r))).unwrap();
                if dirty[r] == 0 {
                    return Err(AreaError::Infeasible {
                        min_dev: crate::lut::min_dev(g),
                        capacity: t * w_d,
                        s_d: layout.s_d,
                        w_d,
                    });
                }
                let bits: Vec<usize> = (0..w_d).filter(|&b| status[r][b] == DeviceStatus::Dirty).collect();
                let luts = bits.iter().map(|&b| owner[r][b].take().unwrap()).collect();
                for &b in &bits {
                    status[r][b] = DeviceStatus::Free;
                }
                events.push(ScheduleEvent::Reset { level: l, wordline: layout.storage_wordline(r), bits, luts });
                continue;
            }
            let need = remaining.len();
            let row = (0..t)
                .filter(|&r| free[r] >= need)
                .min_by_key(|&r| (free[r], r))
                .unwrap_or_else(|| (0..t).max_by_key(|&r| (free[r], std::cmp::Reverse(r))).unwrap());
            let bits: Vec<usize> = (0..w_d).filter(|&b| status[row][b] == DeviceStatus::Free).collect();
            let take = need.min(bits.len());
            for (n, &b) in remaining.drain(..take).zip(&bits) {
                status[row][b] = DeviceStatus::Live;
                owner[row][b] = Some(n);
                device[n] = (layout.storage_wordline(row), b);
                events.push(ScheduleEvent::Allocate { level: l, lut: n, wordline: device[n].0, bit: b });
            }
        }
    }
    Ok(Placement { device, events, status })
}

/// Replays the events and reports every reset of a device whose LUT still
/// had an unplaced consumer, and every allocation onto an occupied device.
pub fn timeline_violations(g: &LutGraph, placement: &Placement) -> Vec<String> {
    let succ = g.successors();
    let mut placed = vec![false; g.len()];
    let mut holder: std::collections::HashMap<(usize, usize), usize> = Default::default();
    let mut out = Vec::new();
    for e in &placement.events {
        match e {
            ScheduleEvent::Allocate { lut, wordline, bit, .. } => {
                if let Some(prev) = holder.insert((*wordline, *bit), *lut) {
                    out.push(format!("LUT {lut} overwrites LUT {prev} at ({wordline}, {bit})"));
                }
                for &i in &g.luts[*lut].inputs_luts() {
                    if !placed[i] {
                        out.push(format!("LUT {lut} placed before its input {i}"));
                    }
                }
                placed[*lut] = true;
            }
            ScheduleEvent::Reset { wordline, bits, .. } => {
                for b in bits {
                    if let Some(n) = holder.remove(&(*wordline, *b)) {
                        if succ[n].iter().any(|&s| !placed[s]) || g.outputs.contains(&n) {
                            out.push(format!("LUT {n} reset at ({wordline}, {b}) while still needed"));
                        }
                    }
                }
            }
        }
    }
    out
}

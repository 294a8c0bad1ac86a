//! Per-flow mapping statistics, named after the columns of the result tables.

use serde::{Deserialize, Serialize};

/// Cycles a PLiM-style machine spends per majority node.
pub const PLIM_CYCLES_PER_NODE: usize = 9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MappingReport {
    pub flow: String,
    #[serde(rename = "S_D")]
    pub s_d: usize,
    #[serde(rename = "w_D")]
    pub w_d: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(rename = "#N_LUT", skip_serializing_if = "Option::is_none")]
    pub n_lut: Option<usize>,
    #[serde(rename = "#L", skip_serializing_if = "Option::is_none")]
    pub levels: Option<usize>,
    #[serde(rename = "Min_Dev", skip_serializing_if = "Option::is_none")]
    pub min_dev: Option<usize>,
    #[serde(rename = "I_A")]
    pub i_a: usize,
    #[serde(rename = "I_R")]
    pub i_r: usize,
    #[serde(rename = "I_total")]
    pub i_total: usize,
    #[serde(rename = "#B", skip_serializing_if = "Option::is_none")]
    pub blocks: Option<usize>,
    #[serde(rename = "W_Util", skip_serializing_if = "Option::is_none")]
    pub w_util: Option<f64>,
    #[serde(rename = "#C")]
    pub cycles: usize,
    #[serde(rename = "#N", skip_serializing_if = "Option::is_none")]
    pub n_maj: Option<usize>,
    #[serde(rename = "D_P*", skip_serializing_if = "Option::is_none")]
    pub d_p: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub speedup: Option<f64>,
    /// Distinct devices written by the program.
    pub devices_used: usize,
}

impl MappingReport {
    pub fn from_program(flow: &str, program: &crate::isa::Program) -> Self {
        let i_r = program.num_reads();
        let i_a = program.num_applies();
        MappingReport {
            flow: flow.to_string(),
            s_d: program.config.s_d,
            w_d: program.config.w_d,
            k: None,
            n_lut: None,
            levels: None,
            min_dev: None,
            i_a,
            i_r,
            i_total: i_a + i_r,
            blocks: None,
            w_util: None,
            cycles: program.cycles(),
            n_maj: None,
            d_p: None,
            speedup: None,
            devices_used: devices_used(program),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Number of distinct (word, bit) devices targeted by some Apply pair.
pub fn devices_used(program: &crate::isa::Program) -> usize {
    use crate::isa::Instruction;
    let mut seen = std::collections::BTreeSet::new();
    for i in &program.instructions {
        if let Instruction::Apply(a) = i {
            for (j, p) in a.pairs.iter().enumerate() {
                if p.is_some() {
                    seen.insert((a.w, j));
                }
            }
        }
    }
    seen.len()
}

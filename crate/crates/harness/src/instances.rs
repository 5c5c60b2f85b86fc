//! Deterministic problem instances from a master seed.

use ctqw_core::graph::{gen_binomial, gen_regular, Graph};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::{FamilyKind, GraphSpec};
use crate::error::{HarnessError, Result};

/// Seed of instance `index` of size `n`: the first output of a ChaCha stream
/// keyed by the master seed and selected by `(n, index)`.
pub fn derive_seed(master: u64, n: usize, index: usize) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(((n as u64) << 32) | index as u64);
    rng.next_u64()
}

#[derive(Debug, Clone)]
pub struct Instance {
    pub id: String,
    pub index: usize,
    pub graph: Graph,
}

impl Instance {
    pub fn n(&self) -> usize {
        self.graph.n()
    }

    pub fn family(&self) -> String {
        self.graph.family().to_string()
    }
}

pub fn instance_id(spec: &GraphSpec, n: usize, index: usize) -> String {
    match spec.family {
        FamilyKind::Binomial => format!("binomial-n{n}-{index:04}"),
        FamilyKind::Regular => format!("regular{}-n{n}-{index:04}", spec.degree.unwrap_or(0)),
        FamilyKind::Explicit => format!("explicit-n{n}-{index:04}"),
    }
}

/// A lazily generated instance: id and seed are known up front, the graph
/// is built by the worker.
#[derive(Debug, Clone)]
pub struct InstanceSlot {
    pub id: String,
    pub n: usize,
    pub index: usize,
    pub seed: u64,
}

pub fn instance_slots(spec: &GraphSpec, master: u64) -> Vec<InstanceSlot> {
    if spec.family == FamilyKind::Explicit {
        return spec
            .files
            .iter()
            .enumerate()
            .map(|(index, f)| InstanceSlot {
                id: f
                    .file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_else(|| format!("explicit-{index:04}")),
                n: 0,
                index,
                seed: 0,
            })
            .collect();
    }
    let mut out = Vec::new();
    for &n in &spec.sizes {
        for index in spec.offset..spec.offset + spec.instances {
            out.push(InstanceSlot {
                id: instance_id(spec, n, index),
                n,
                index,
                seed: derive_seed(master, n, index),
            });
        }
    }
    out
}

pub fn build_instance(spec: &GraphSpec, slot: &InstanceSlot) -> Result<Instance> {
    let graph = match spec.family {
        FamilyKind::Binomial => gen_binomial(slot.n, spec.p.unwrap_or(0.5), slot.seed)?,
        FamilyKind::Regular => gen_regular(slot.n, spec.degree.unwrap_or(3), slot.seed)?,
        FamilyKind::Explicit => {
            let path = &spec.files[slot.index];
            let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
            Graph::from_json(&text)?
        }
    };
    Ok(Instance {
        id: slot.id.clone(),
        index: slot.index,
        graph,
    })
}

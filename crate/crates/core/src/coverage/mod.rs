//! Neuron activation analysis.
//!
//! Oracles return raw per-layer outputs; [`scale_and_threshold`] is the single
//! place where outputs become activated-neuron sets, so every oracle is judged
//! by the same rule.

mod exec;
mod synthetic;

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use exec::ExecOracle;
pub use synthetic::SyntheticOracle;

pub const DEFAULT_THRESHOLD: f64 = 0.4;

/// `(layer_index, position)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct NeuronId(pub u32, pub u32);

impl NeuronId {
    pub fn layer(self) -> usize {
        self.0 as usize
    }

    pub fn position(self) -> usize {
        self.1 as usize
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NeuronSet(BTreeSet<NeuronId>);

impl NeuronSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, id: NeuronId) -> bool {
        self.0.contains(&id)
    }

    pub fn insert(&mut self, id: NeuronId) -> bool {
        self.0.insert(id)
    }

    pub fn iter(&self) -> impl Iterator<Item = NeuronId> + '_ {
        self.0.iter().copied()
    }

    pub fn union(&self, other: &NeuronSet) -> NeuronSet {
        NeuronSet(self.0.union(&other.0).copied().collect())
    }

    pub fn intersection_len(&self, other: &NeuronSet) -> usize {
        self.0.intersection(&other.0).count()
    }

    pub fn is_subset(&self, other: &NeuronSet) -> bool {
        self.0.is_subset(&other.0)
    }

    pub fn is_disjoint(&self, other: &NeuronSet) -> bool {
        self.0.is_disjoint(&other.0)
    }
}

impl FromIterator<NeuronId> for NeuronSet {
    fn from_iter<I: IntoIterator<Item = NeuronId>>(iter: I) -> Self {
        NeuronSet(iter.into_iter().collect())
    }
}

/// Neuron count per layer.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Topology(Vec<usize>);

impl Topology {
    pub fn new(layers: Vec<usize>) -> Self {
        Topology(layers)
    }

    pub fn layers(&self) -> &[usize] {
        &self.0
    }

    pub fn total(&self) -> usize {
        self.0.iter().sum()
    }

    pub fn contains(&self, id: NeuronId) -> bool {
        self.0.get(id.layer()).is_some_and(|&n| id.position() < n)
    }

    pub fn all_neurons(&self) -> NeuronSet {
        self.0
            .iter()
            .enumerate()
            .flat_map(|(l, &n)| (0..n).map(move |p| NeuronId(l as u32, p as u32)))
            .collect()
    }
}

impl fmt::Display for Topology {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|n| n.to_string()).collect();
        write!(f, "[{}]", parts.join(", "))
    }
}

/// Raw outputs of every neuron for one program.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ActivationVector {
    pub layers: Vec<Vec<f64>>,
}

impl ActivationVector {
    pub fn new(layers: Vec<Vec<f64>>) -> Self {
        ActivationVector { layers }
    }

    pub fn matches(&self, topology: &Topology) -> bool {
        self.layers.len() == topology.layers().len()
            && self.layers.iter().zip(topology.layers()).all(|(l, &n)| l.len() == n)
    }
}

/// Min-max scales each layer to `[0, 1]` and keeps neurons strictly above
/// `threshold`. A constant layer carries no signal and activates nothing.
pub fn scale_and_threshold(raw: &ActivationVector, threshold: f64) -> NeuronSet {
    let mut set = NeuronSet::new();
    for (l, layer) in raw.layers.iter().enumerate() {
        let (min, max) = layer
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
        if max.partial_cmp(&min) != Some(std::cmp::Ordering::Greater) {
            continue;
        }
        let range = max - min;
        for (p, &v) in layer.iter().enumerate() {
            if (v - min) / range > threshold {
                set.insert(NeuronId(l as u32, p as u32));
            }
        }
    }
    set
}

/// Neurons in `current` that are not in `baseline`.
pub fn new_neurons(current: &NeuronSet, baseline: &NeuronSet) -> NeuronSet {
    NeuronSet(current.0.difference(&baseline.0).copied().collect())
}

/// `1 - |a ∩ b| / |a ∪ b|`; two empty sets overlap completely (0).
pub fn jaccard_distance(a: &NeuronSet, b: &NeuronSet) -> f64 {
    let inter = a.intersection_len(b);
    let union = a.len() + b.len() - inter;
    if union == 0 {
        log::debug!("jaccard distance of two empty neuron sets taken as 0");
        return 0.0;
    }
    1.0 - inter as f64 / union as f64
}

pub fn coverage_ratio(set: &NeuronSet, topology: &Topology) -> f64 {
    let total = topology.total();
    if total == 0 {
        return 0.0;
    }
    set.len() as f64 / total as f64
}

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("failed to start oracle `{command}`: {source}")]
    Spawn {
        command: String,
        #[source]
        source: std::io::Error,
    },
    #[error("oracle i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("oracle protocol error: {0}")]
    Protocol(String),
    #[error("oracle rejected request {id}: {message}")]
    Rejected { id: u64, message: String },
}

impl OracleError {
    /// Fatal errors abort the whole campaign; a rejected request only
    /// aborts the seed being fuzzed.
    pub fn is_fatal(&self) -> bool {
        !matches!(self, OracleError::Rejected { .. })
    }
}

/// A deterministic source of raw neuron outputs for program text.
pub trait CoverageOracle: Send + Sync {
    fn topology(&self) -> &Topology;

    fn activations(&self, program: &str) -> Result<ActivationVector, OracleError>;

    /// Short description recorded in reports.
    fn describe(&self) -> String;

    fn activated(&self, program: &str, threshold: f64) -> Result<NeuronSet, OracleError> {
        let raw = self.activations(program)?;
        if !raw.matches(self.topology()) {
            return Err(OracleError::Protocol(format!(
                "activation shape does not match topology {}",
                self.topology()
            )));
        }
        Ok(scale_and_threshold(&raw, threshold))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(ids: &[u32]) -> NeuronSet {
        ids.iter().map(|&p| NeuronId(0, p)).collect()
    }

    #[test]
    fn scale_examples() {
        let s = scale_and_threshold(&ActivationVector::new(vec![vec![0.0, 5.0, 10.0]]), 0.4);
        assert_eq!(s, set(&[1, 2]));
        let s = scale_and_threshold(&ActivationVector::new(vec![vec![2.0, 2.0, 2.0]]), 0.4);
        assert!(s.is_empty());
        let s = scale_and_threshold(&ActivationVector::new(vec![vec![-1.0, 1.0]]), 0.4);
        assert_eq!(s, set(&[1]));
    }

    #[test]
    fn threshold_is_strict() {
        // scaled values: 0, 0.4, 1
        let s = scale_and_threshold(&ActivationVector::new(vec![vec![0.0, 4.0, 10.0]]), 0.4);
        assert_eq!(s, set(&[2]));
    }

    #[test]
    fn layers_scale_independently() {
        let raw = ActivationVector::new(vec![vec![0.0, 1.0], vec![100.0, 50.0, 0.0]]);
        let s = scale_and_threshold(&raw, 0.4);
        let expected: NeuronSet =
            [NeuronId(0, 1), NeuronId(1, 0), NeuronId(1, 1)].into_iter().collect();
        assert_eq!(s, expected);
    }

    #[test]
    fn set_algebra_examples() {
        assert_eq!(new_neurons(&set(&[2, 3]), &set(&[1, 2])), set(&[3]));
        assert_eq!(new_neurons(&set(&[4, 5]), &NeuronSet::new()), set(&[4, 5]));
        assert!(new_neurons(&set(&[4, 5]), &set(&[4, 5])).is_empty());
    }

    #[test]
    fn jaccard_examples() {
        assert_eq!(jaccard_distance(&set(&[1, 2, 3]), &set(&[2, 3, 4])), 0.5);
        assert_eq!(jaccard_distance(&set(&[1, 2]), &set(&[1, 2])), 0.0);
        assert_eq!(jaccard_distance(&set(&[1]), &set(&[2])), 1.0);
        assert_eq!(jaccard_distance(&NeuronSet::new(), &NeuronSet::new()), 0.0);
    }

    #[test]
    fn coverage_examples() {
        let topo = Topology::new(vec![128; 4]);
        let half: NeuronSet = topo.all_neurons().iter().take(256).collect();
        assert_eq!(coverage_ratio(&half, &topo), 0.5);
        assert_eq!(coverage_ratio(&NeuronSet::new(), &topo), 0.0);
        assert_eq!(coverage_ratio(&topo.all_neurons(), &topo), 1.0);
    }

    #[test]
    fn topology_membership() {
        let topo = Topology::new(vec![2, 3]);
        assert!(topo.contains(NeuronId(1, 2)));
        assert!(!topo.contains(NeuronId(0, 2)));
        assert!(!topo.contains(NeuronId(2, 0)));
        assert_eq!(topo.all_neurons().len(), 5);
    }

    #[test]
    fn fatal_classification() {
        assert!(OracleError::Protocol("x".into()).is_fatal());
        assert!(!OracleError::Rejected { id: 1, message: "x".into() }.is_fatal());
    }
}

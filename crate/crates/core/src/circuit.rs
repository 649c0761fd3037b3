//! Layered Clifford circuits: `H`, `CNOT`, `CZ`, `S`, `H`, applied in that
//! order.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tableau::BinaryTableau;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Gate {
    H(usize),
    S(usize),
    Sdg(usize),
    Cnot { control: usize, target: usize },
    Cz(usize, usize),
}

/// Qubit indices are 0-based. `cnots` are kept sorted by control then
/// target, which is also their application order; `czs` hold `(a, b)` with
/// `a < b`, sorted. The layer sets are sorted and duplicate-free.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct CliffordCircuit {
    pub n_qubits: usize,
    pub h_pre: Vec<usize>,
    pub cnots: Vec<(usize, usize)>,
    pub czs: Vec<(usize, usize)>,
    pub s_layer: Vec<usize>,
    pub h_post: Vec<usize>,
}

impl CliffordCircuit {
    pub fn identity(n_qubits: usize) -> Self {
        Self {
            n_qubits,
            ..Self::default()
        }
    }

    pub fn is_identity(&self) -> bool {
        self.h_pre.is_empty()
            && self.cnots.is_empty()
            && self.czs.is_empty()
            && self.s_layer.is_empty()
            && self.h_post.is_empty()
    }

    pub fn gate_count(&self) -> usize {
        self.h_pre.len() + self.cnots.len() + self.czs.len() + self.s_layer.len() + self.h_post.len()
    }

    /// Gates in application order.
    pub fn gates(&self) -> Vec<Gate> {
        let mut out = Vec::with_capacity(self.gate_count());
        out.extend(self.h_pre.iter().map(|&q| Gate::H(q)));
        out.extend(
            self.cnots
                .iter()
                .map(|&(control, target)| Gate::Cnot { control, target }),
        );
        out.extend(self.czs.iter().map(|&(a, b)| Gate::Cz(a, b)));
        out.extend(self.s_layer.iter().map(|&q| Gate::S(q)));
        out.extend(self.h_post.iter().map(|&q| Gate::H(q)));
        out
    }

    /// Gates of the inverse circuit in application order.
    pub fn inverse_gates(&self) -> Vec<Gate> {
        self.gates()
            .into_iter()
            .rev()
            .map(|g| match g {
                Gate::S(q) => Gate::Sdg(q),
                Gate::Sdg(q) => Gate::S(q),
                other => other,
            })
            .collect()
    }

    /// Distinct CNOT controls with their target sets, in application order.
    pub fn cnot_batches(&self) -> Vec<(usize, Vec<usize>)> {
        let mut out: Vec<(usize, Vec<usize>)> = Vec::new();
        for &(c, t) in &self.cnots {
            match out.last_mut() {
                Some((lc, ts)) if *lc == c => ts.push(t),
                _ => out.push((c, vec![t])),
            }
        }
        out
    }

    /// Conjugates every tableau row by this circuit.
    pub fn apply_to_tableau(&self, tab: &mut BinaryTableau) -> Result<()> {
        if tab.n_qubits() != self.n_qubits {
            return Err(Error::DimensionMismatch {
                left: tab.n_qubits(),
                right: self.n_qubits,
            });
        }
        for g in self.gates() {
            match g {
                Gate::H(q) => tab.apply_h(q)?,
                Gate::S(q) => tab.apply_s(q)?,
                Gate::Sdg(q) => {
                    for _ in 0..3 {
                        tab.apply_s(q)?;
                    }
                }
                Gate::Cnot { control, target } => tab.apply_cnot(control, target)?,
                Gate::Cz(a, b) => tab.apply_cz(a, b)?,
            }
        }
        Ok(())
    }

    /// Checks the layer ordering and index invariants.
    pub fn validate(&self) -> Result<()> {
        let n = self.n_qubits;
        let in_range = |q: usize| {
            if q < n {
                Ok(())
            } else {
                Err(Error::QubitOutOfRange {
                    index: q,
                    n_qubits: n,
                })
            }
        };
        for layer in [&self.h_pre, &self.s_layer, &self.h_post] {
            for &q in layer.iter() {
                in_range(q)?;
            }
            if layer.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::InvalidInput(
                    "single-qubit layer must be sorted and duplicate-free".into(),
                ));
            }
        }
        for &(a, b) in self.cnots.iter().chain(&self.czs) {
            in_range(a)?;
            in_range(b)?;
            if a == b {
                return Err(Error::SameQubit(a));
            }
        }
        if self.cnots.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidInput(
                "CNOT layer must be sorted by control then target".into(),
            ));
        }
        if self.czs.iter().any(|&(a, b)| a > b) || self.czs.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidInput(
                "CZ layer must hold sorted (low, high) pairs".into(),
            ));
        }
        Ok(())
    }
}

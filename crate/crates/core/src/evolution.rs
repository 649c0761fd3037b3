//! First-order Trotter drivers, the exact reference, and observables.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::dense;
use crate::diagonalize::{diagonalize_group, DiagonalGroup};
use crate::error::{Error, Result};
use crate::hamiltonian::{greedy_partition, CommutingGroup, Hamiltonian};
use crate::pauli::{PauliString, WeightedTerm};
use crate::statevec::{StateVector, C64};

pub const DEFAULT_DT: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Baseline,
    Grouped,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TermOrder {
    /// Terms in Hamiltonian order.
    #[default]
    Input,
    /// Terms ordered group by group, as the partition lists them.
    GroupMajor,
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "baseline" => Ok(Method::Baseline),
            "grouped" => Ok(Method::Grouped),
            _ => Err(Error::InvalidInput(format!("unknown method {s:?}"))),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Baseline => "baseline",
            Method::Grouped => "grouped",
        })
    }
}

impl FromStr for TermOrder {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "input" => Ok(TermOrder::Input),
            "group_major" | "group-major" => Ok(TermOrder::GroupMajor),
            _ => Err(Error::InvalidInput(format!("unknown term order {s:?}"))),
        }
    }
}

impl fmt::Display for TermOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TermOrder::Input => "input",
            TermOrder::GroupMajor => "group_major",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolutionPlan {
    pub total_time: f64,
    pub n_steps: usize,
    pub method: Method,
    pub term_order: TermOrder,
}

impl EvolutionPlan {
    pub fn new(total_time: f64, n_steps: usize, method: Method) -> Result<Self> {
        if n_steps == 0 {
            return Err(Error::InvalidInput("need at least one Trotter step".into()));
        }
        if !total_time.is_finite() || !(total_time / n_steps as f64).is_finite() {
            return Err(Error::InvalidInput(format!("time {total_time} is not finite")));
        }
        Ok(Self {
            total_time,
            n_steps,
            method,
            term_order: TermOrder::Input,
        })
    }

    pub fn with_order(mut self, order: TermOrder) -> Self {
        self.term_order = order;
        self
    }

    pub fn dt(&self) -> f64 {
        self.total_time / self.n_steps as f64
    }
}

fn check_dims(n: usize, psi: &StateVector) -> Result<()> {
    if n != psi.n_qubits() {
        return Err(Error::DimensionMismatch {
            left: n,
            right: psi.n_qubits(),
        });
    }
    Ok(())
}

/// Terms listed group by group.
pub fn group_major_terms(h: &Hamiltonian) -> Vec<WeightedTerm> {
    greedy_partition(h)
        .into_iter()
        .flat_map(|g| g.terms)
        .collect()
}

/// One baseline Trotter step: a Pauli rotation per term.
pub fn baseline_step(terms: &[WeightedTerm], psi: &mut StateVector, dt: f64) -> Result<()> {
    for t in terms {
        psi.apply_pauli_rotation(t, dt)?;
    }
    Ok(())
}

pub fn evolve_baseline(h: &Hamiltonian, psi: &mut StateVector, plan: &EvolutionPlan) -> Result<()> {
    check_dims(h.n_qubits(), psi)?;
    let reordered;
    let terms = match plan.term_order {
        TermOrder::Input => h.terms(),
        TermOrder::GroupMajor => {
            reordered = group_major_terms(h);
            &reordered
        }
    };
    let dt = plan.dt();
    for _ in 0..plan.n_steps {
        baseline_step(terms, psi, dt)?;
    }
    Ok(())
}

/// A Hamiltonian's partition together with the diagonalized groups.
#[derive(Debug, Clone)]
pub struct GroupedHamiltonian {
    pub n_qubits: usize,
    pub groups: Vec<CommutingGroup>,
    pub diagonal: Vec<DiagonalGroup>,
}

impl GroupedHamiltonian {
    pub fn build(h: &Hamiltonian) -> Result<Self> {
        let groups = greedy_partition(h);
        let diagonal = groups
            .par_iter()
            .map(diagonalize_group)
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            n_qubits: h.n_qubits(),
            groups,
            diagonal,
        })
    }

    pub fn n_terms(&self) -> usize {
        self.groups.iter().map(CommutingGroup::len).sum()
    }
}

/// One grouped Trotter step: `C^dagger exp(-i dt Lambda) C` per group.
pub fn grouped_step(groups: &[DiagonalGroup], psi: &mut StateVector, dt: f64) -> Result<()> {
    for g in groups {
        psi.apply_clifford(&g.circuit)?;
        psi.apply_diagonal_exp(g, dt)?;
        psi.apply_clifford_inverse(&g.circuit)?;
    }
    Ok(())
}

pub fn evolve_grouped(
    groups: &[DiagonalGroup],
    psi: &mut StateVector,
    plan: &EvolutionPlan,
) -> Result<()> {
    for g in groups {
        check_dims(g.n_qubits, psi)?;
    }
    let dt = plan.dt();
    for _ in 0..plan.n_steps {
        grouped_step(groups, psi, dt)?;
    }
    Ok(())
}

/// `exp(-i H t) psi` from the dense eigendecomposition; at most
/// [`dense::MAX_DENSE_QUBITS`] qubits.
pub fn exact_evolve(h: &Hamiltonian, psi: &StateVector, t: f64) -> Result<StateVector> {
    check_dims(h.n_qubits(), psi)?;
    let m = dense::hamiltonian(h)?;
    dense::apply(&dense::expm_hermitian(&m, t), psi)
}

/// `<psi|P|psi>`
pub fn pauli_expectation(p: &PauliString, psi: &StateVector) -> Result<C64> {
    check_dims(p.num_qubits(), psi)?;
    let x = p.x().to_u64().expect("bounded width") as usize;
    let z = p.z().to_u64().expect("bounded width");
    let amps = psi.amplitudes();
    let sum: C64 = amps
        .iter()
        .enumerate()
        .map(|(b, a)| {
            let v = amps[b ^ x].conj() * a;
            if (z & b as u64).count_ones() & 1 == 1 {
                -v
            } else {
                v
            }
        })
        .sum();
    Ok(sum * C64::i().powu(p.phase_exp() as u32))
}

/// Imaginary parts above this make [`expectation`] fail.
pub const IMAG_TOLERANCE: f64 = 1e-9;

pub fn expectation(h: &Hamiltonian, psi: &StateVector) -> Result<f64> {
    let mut total = C64::new(0.0, 0.0);
    for t in h.terms() {
        total += pauli_expectation(&t.pauli, psi)? * t.coeff;
    }
    if total.im.abs() > IMAG_TOLERANCE * (1.0 + total.re.abs()) {
        return Err(Error::Invariant(format!(
            "expectation has imaginary residue {:e}",
            total.im
        )));
    }
    Ok(total.re)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceRow {
    pub step: usize,
    pub time: f64,
    pub energy: f64,
}

/// Evolves step by step, recording the energy before the first step and
/// after every step. `grouped` must be supplied for [`Method::Grouped`].
pub fn evolve_with_trace(
    h: &Hamiltonian,
    grouped: Option<&GroupedHamiltonian>,
    psi: &mut StateVector,
    plan: &EvolutionPlan,
) -> Result<Vec<TraceRow>> {
    check_dims(h.n_qubits(), psi)?;
    let dt = plan.dt();
    let mut rows = vec![TraceRow {
        step: 0,
        time: 0.0,
        energy: expectation(h, psi)?,
    }];
    let reordered;
    let terms = match plan.term_order {
        TermOrder::Input => h.terms(),
        TermOrder::GroupMajor => {
            reordered = group_major_terms(h);
            &reordered
        }
    };
    for step in 1..=plan.n_steps {
        match plan.method {
            Method::Baseline => baseline_step(terms, psi, dt)?,
            Method::Grouped => {
                let g = grouped.ok_or_else(|| {
                    Error::InvalidInput("grouped evolution needs the grouped Hamiltonian".into())
                })?;
                grouped_step(&g.diagonal, psi, dt)?
            }
        }
        rows.push(TraceRow {
            step,
            time: step as f64 * dt,
            energy: expectation(h, psi)?,
        });
    }
    Ok(rows)
}

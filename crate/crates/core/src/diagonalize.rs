//! Clifford synthesis that simultaneously diagonalizes a commuting group.
//!
//! The synthesis runs on a square tableau built from a linearly independent
//! subset of the group:
//!
//! 1. `maximize_x_rank`: Hadamards that raise the rank of the X block.
//! 2. `clear_upper_x`: CNOTs that make the X block lower triangular.
//! 3. `clear_z_block`: CZ and S gates that empty the Z block.
//! 4. `x_to_z`: Hadamards turning the remaining X components into Z.
//!
//! The recorded circuit is then replayed on a tableau of every group member;
//! the replay yields the diagonal Z masks and the sign of each term.
//!
//! Qubits on which every member acts as I/Z are already diagonal and are left
//! alone; qubits on which every member acts as I/X only need a Hadamard. Both
//! kinds are excluded from steps 1–3.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::bits::BitString;
use crate::circuit::CliffordCircuit;
use crate::error::{Error, Result};
use crate::hamiltonian::CommutingGroup;
use crate::pauli::PauliString;
use crate::tableau::{independent_subset, BinaryTableau};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QubitClass {
    /// Every member is I or Z here (includes all-identity columns).
    ZOnly,
    /// Every member is I or X here, and at least one is X.
    XOnly,
    General,
}

pub fn skip_trivial_columns(terms: &[PauliString]) -> Vec<QubitClass> {
    let n = terms.first().map_or(0, PauliString::num_qubits);
    (0..n)
        .map(|q| {
            let has_x = terms.iter().any(|t| t.x().get(q));
            let has_z = terms.iter().any(|t| t.z().get(q));
            match (has_x, has_z) {
                (false, _) => QubitClass::ZOnly,
                (true, false) => QubitClass::XOnly,
                (true, true) => QubitClass::General,
            }
        })
        .collect()
}

/// Step 1. Scans `qubits` from the highest index down and keeps `H(q)` iff it
/// strictly raises the X-block rank. If the X block still has lower rank than
/// the row space afterwards, Hadamards on the pivot columns of the pure-Z part
/// of the row space complete it. Returns the qubits that ended up toggled.
pub fn maximize_x_rank(tab: &mut BinaryTableau, qubits: &[usize]) -> Vec<usize> {
    let mut toggled = vec![false; tab.n_qubits()];
    let mut order = qubits.to_vec();
    order.sort_unstable_by(|a, b| b.cmp(a));
    let mut rank = tab.rank_x_block();
    for q in order {
        let with_h = tab.rank_x_block_with_h(q);
        if rank < with_h {
            tab.h(q);
            toggled[q] = true;
            rank = with_h;
        }
    }

    for q in z_pivot_columns(tab) {
        tab.h(q);
        toggled[q] ^= true;
    }

    toggled
        .iter()
        .enumerate()
        .filter_map(|(q, &t)| t.then_some(q))
        .collect()
}

fn full_rows(tab: &BinaryTableau) -> Vec<BitString> {
    let n = tab.n_qubits();
    (0..tab.rows())
        .map(|k| {
            let mut row = BitString::zeros(2 * n);
            for q in 0..n {
                row.set(q, tab.x(k, q));
                row.set(n + q, tab.z(k, q));
            }
            row
        })
        .collect()
}

/// Echelon-reduces the rows with X columns first; the rows left with a pivot
/// in the Z half have no X part, and their pivot qubits are returned.
fn z_pivot_columns(tab: &BinaryTableau) -> Vec<usize> {
    let n = tab.n_qubits();
    let mut rows = full_rows(tab);
    let mut rank = 0;
    let mut pivots = Vec::new();
    for col in 0..2 * n {
        let Some(p) = (rank..rows.len()).find(|&r| rows[r].get(col)) else {
            continue;
        };
        rows.swap(rank, p);
        let pivot = rows[rank].clone();
        for r in rank + 1..rows.len() {
            if rows[r].get(col) {
                rows[r].xor_assign(&pivot);
            }
        }
        if col >= n {
            pivots.push(col - n);
        }
        rank += 1;
    }
    pivots
}

/// Step 2. For each row in turn, picks the lowest remaining active column
/// that has a one in this or a later row (swapping that row up), then clears
/// the row's ones to the right of the pivot with `CNOT(pivot, j)`. When the X
/// block has full rank the pivots are the diagonal.
pub fn clear_upper_x(tab: &mut BinaryTableau, qubits: &[usize]) -> Vec<(usize, usize)> {
    let mut cols = qubits.to_vec();
    cols.sort_unstable();
    let mut cnots = Vec::new();
    let mut next_col = 0;
    for i in 0..tab.rows() {
        let found = cols[next_col..].iter().enumerate().find_map(|(off, &c)| {
            (i..tab.rows())
                .find(|&j| tab.x(j, c))
                .map(|j| (next_col + off, c, j))
        });
        let Some((ci, pivot, j)) = found else {
            break;
        };
        tab.swap_rows(i, j);
        for &t in &cols[ci + 1..] {
            if tab.x(i, t) {
                tab.cnot(pivot, t);
                cnots.push((pivot, t));
            }
        }
        next_col = ci + 1;
    }
    cnots
}

/// Pivot of a row after step 2: its highest active column holding an X bit.
fn row_pivot(tab: &BinaryTableau, row: usize, cols: &[usize]) -> Option<usize> {
    cols.iter().rev().copied().find(|&c| tab.x(row, c))
}

/// Step 3. For each row, `CZ(pivot, j)` for every other active `j` whose Z bit
/// is set, then `S(pivot)` if the pivot's Z bit is set. Returns the CZ pairs
/// (normalized low-high, in application order) and the S targets.
pub fn clear_z_block(tab: &mut BinaryTableau, qubits: &[usize]) -> (Vec<(usize, usize)>, Vec<usize>) {
    let mut cols = qubits.to_vec();
    cols.sort_unstable();
    let mut czs = Vec::new();
    let mut s_targets = Vec::new();
    for i in 0..tab.rows() {
        let Some(p) = row_pivot(tab, i, &cols) else {
            continue;
        };
        for &j in &cols {
            if j != p && tab.z(i, j) {
                tab.cz(p, j);
                czs.push((p.min(j), p.max(j)));
            }
        }
        if tab.z(i, p) {
            tab.s(p);
            s_targets.push(p);
        }
    }
    (czs, s_targets)
}

/// Step 4. `H(q)` for every column in `qubits` whose X column is nonzero.
pub fn x_to_z(tab: &mut BinaryTableau, qubits: &[usize]) -> Vec<usize> {
    let mut out = Vec::new();
    for &q in qubits {
        if tab.x_column(q).any() {
            tab.h(q);
            out.push(q);
        }
    }
    out
}

/// Synthesizes a circuit `C` with `C P C^dagger` diagonal for every `P`.
pub fn find_clifford(terms: &[PauliString]) -> Result<CliffordCircuit> {
    let Some(first) = terms.first() else {
        return Err(Error::InvalidInput("empty group".into()));
    };
    let n = first.num_qubits();
    if let Some(bad) = terms.iter().find(|t| t.num_qubits() != n) {
        return Err(Error::DimensionMismatch {
            left: n,
            right: bad.num_qubits(),
        });
    }

    let classes = skip_trivial_columns(terms);
    let active: Vec<usize> = (0..n)
        .filter(|&q| classes[q] == QubitClass::General)
        .collect();
    let x_only: Vec<usize> = (0..n)
        .filter(|&q| classes[q] == QubitClass::XOnly)
        .collect();

    let mut keep = BitString::zeros(n);
    for &q in &active {
        keep.set(q, true);
    }
    let masked: Vec<PauliString> = terms
        .iter()
        .map(|t| {
            let mut x = t.x().clone();
            x.and_assign(&keep);
            let mut z = t.z().clone();
            z.and_assign(&keep);
            PauliString::from_masks(x, z).expect("same length")
        })
        .collect();

    let chosen = independent_subset(&masked);
    if chosen.len() > n {
        return Err(Error::NotDiagonalized {
            group: 0,
            detail: format!("{} independent rows on {n} qubits", chosen.len()),
        });
    }
    let mut tab = BinaryTableau::zeros(n, 0).pad_to_square()?;
    if !chosen.is_empty() {
        tab = BinaryTableau::from_terms(chosen.iter().map(|&i| &masked[i]))?.pad_to_square()?;
    }

    let h_pre = maximize_x_rank(&mut tab, &active);
    let cnots = clear_upper_x(&mut tab, &active);
    let (cz_list, mut s_layer) = clear_z_block(&mut tab, &active);
    if !tab.z_block_is_zero() {
        return Err(Error::NotDiagonalized {
            group: 0,
            detail: "Z block not cleared".into(),
        });
    }
    let mut h_post: BTreeSet<usize> = x_to_z(&mut tab, &active).into_iter().collect();
    h_post.extend(x_only);
    if !tab.x_block_is_zero() {
        return Err(Error::NotDiagonalized {
            group: 0,
            detail: "X block not cleared".into(),
        });
    }

    // CZ gates are self-inverse and commute, so repeated pairs cancel.
    let mut czs = BTreeSet::new();
    for pair in cz_list {
        if !czs.remove(&pair) {
            czs.insert(pair);
        }
    }
    s_layer.sort_unstable();
    if s_layer.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::Invariant("S applied twice on one qubit".into()));
    }
    let mut cnots = cnots;
    cnots.sort_unstable();

    let circuit = CliffordCircuit {
        n_qubits: n,
        h_pre,
        cnots,
        czs: czs.into_iter().collect(),
        s_layer,
        h_post: h_post.into_iter().collect(),
    };
    circuit.validate()?;
    Ok(circuit)
}

/// A commuting group rewritten as `C^dagger (sum_k s_k c_k Z^{z_k}) C`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalGroup {
    pub group_index: usize,
    pub n_qubits: usize,
    pub z_masks: Vec<BitString>,
    /// `(-1)^{r_k} c_k`, in the source group's term order.
    pub signed_coeffs: Vec<f64>,
    pub circuit: CliffordCircuit,
}

impl DiagonalGroup {
    pub fn len(&self) -> usize {
        self.z_masks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.z_masks.is_empty()
    }

    /// Diagonal operator `sum_k s_k c_k Z^{z_k}` without any circuit.
    pub fn from_diagonal(
        group_index: usize,
        n_qubits: usize,
        z_masks: Vec<BitString>,
        signed_coeffs: Vec<f64>,
    ) -> Result<Self> {
        if z_masks.len() != signed_coeffs.len() {
            return Err(Error::InvalidInput(
                "z_masks and coefficients differ in length".into(),
            ));
        }
        if let Some(m) = z_masks.iter().find(|m| m.len() != n_qubits) {
            return Err(Error::DimensionMismatch {
                left: n_qubits,
                right: m.len(),
            });
        }
        Ok(Self {
            group_index,
            n_qubits,
            z_masks,
            signed_coeffs,
            circuit: CliffordCircuit::identity(n_qubits),
        })
    }
}

pub fn diagonalize_group(group: &CommutingGroup) -> Result<DiagonalGroup> {
    let tag = |e: Error| match e {
        Error::NotDiagonalized { detail, .. } => Error::NotDiagonalized {
            group: group.group_index,
            detail,
        },
        other => other,
    };
    let paulis: Vec<PauliString> = group.terms.iter().map(|t| t.pauli.clone()).collect();
    let circuit = find_clifford(&paulis).map_err(tag)?;
    let mut tab = BinaryTableau::from_terms(&paulis)?;
    circuit.apply_to_tableau(&mut tab)?;
    if let Some(k) = (0..tab.rows()).find(|&k| tab.row_x(k).any()) {
        return Err(Error::NotDiagonalized {
            group: group.group_index,
            detail: format!(
                "term {} maps to {} after the circuit",
                group.terms[k].pauli,
                tab.row_pauli(k)
            ),
        });
    }
    let z_masks = (0..tab.rows()).map(|k| tab.row_pauli(k).z().clone()).collect();
    let signed_coeffs = group
        .terms
        .iter()
        .enumerate()
        .map(|(k, t)| if tab.sign(k) { -t.coeff } else { t.coeff })
        .collect();
    Ok(DiagonalGroup {
        group_index: group.group_index,
        n_qubits: circuit.n_qubits,
        z_masks,
        signed_coeffs,
        circuit,
    })
}

/// Serialized form of a diagonalized group. Masks are hex with qubit 0 as the
/// least significant bit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagonalGroupDoc {
    pub group_index: usize,
    pub terms: Vec<DiagonalTermDoc>,
    pub circuit: CliffordCircuit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagonalTermDoc {
    pub pauli: String,
    pub coeff: f64,
    pub z_mask: String,
    pub signed_coeff: f64,
}

impl DiagonalGroupDoc {
    pub fn new(group: &CommutingGroup, diag: &DiagonalGroup) -> Self {
        let terms = group
            .terms
            .iter()
            .zip(diag.z_masks.iter().zip(&diag.signed_coeffs))
            .map(|(t, (mask, &signed))| DiagonalTermDoc {
                pauli: t.pauli.to_string(),
                coeff: t.coeff,
                z_mask: mask.to_hex(),
                signed_coeff: signed,
            })
            .collect();
        Self {
            group_index: diag.group_index,
            terms,
            circuit: diag.circuit.clone(),
        }
    }

    pub fn to_diagonal_group(&self) -> Result<DiagonalGroup> {
        let n = self.circuit.n_qubits;
        let z_masks = self
            .terms
            .iter()
            .map(|t| {
                BitString::from_hex(n, &t.z_mask)
                    .ok_or_else(|| Error::InvalidInput(format!("bad z mask {:?}", t.z_mask)))
            })
            .collect::<Result<Vec<_>>>()?;
        self.circuit.validate()?;
        Ok(DiagonalGroup {
            group_index: self.group_index,
            n_qubits: n,
            z_masks,
            signed_coeffs: self.terms.iter().map(|t| t.signed_coeff).collect(),
            circuit: self.circuit.clone(),
        })
    }
}

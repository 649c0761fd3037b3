//! Hamiltonian container, the line-oriented text format, and greedy
//! partitioning into commuting groups.
//!
//! Text format: one term per line, `<coeff> <pauli>`, e.g. `-0.5 ZZIX`.
//! Blank lines are ignored and `#` starts a comment. The qubit count is
//! taken from the first data line.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::pauli::{PauliString, WeightedTerm};

/// Coefficients with magnitude at or below this are dropped after merging.
pub const DROP_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct Hamiltonian {
    n_qubits: usize,
    terms: Vec<WeightedTerm>,
}

impl Hamiltonian {
    /// Builds a Hamiltonian, merging repeated Pauli strings by summing their
    /// coefficients (first occurrence keeps its position) and dropping
    /// near-zero results.
    pub fn from_terms(
        n_qubits: usize,
        terms: impl IntoIterator<Item = WeightedTerm>,
    ) -> Result<Self> {
        let mut merged: Vec<WeightedTerm> = Vec::new();
        let mut index: HashMap<PauliString, usize> = HashMap::new();
        for term in terms {
            if term.pauli.num_qubits() != n_qubits {
                return Err(Error::DimensionMismatch {
                    left: n_qubits,
                    right: term.pauli.num_qubits(),
                });
            }
            if !term.coeff.is_finite() {
                return Err(Error::InvalidInput(format!(
                    "coefficient of {} is not finite",
                    term.pauli
                )));
            }
            match index.get(&term.pauli) {
                Some(&k) => merged[k].coeff += term.coeff,
                None => {
                    index.insert(term.pauli.clone(), merged.len());
                    merged.push(term);
                }
            }
        }
        merged.retain(|t| t.coeff.abs() > DROP_TOLERANCE);
        Ok(Self {
            n_qubits,
            terms: merged,
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_reader(file)
    }

    pub fn from_reader(reader: impl Read) -> Result<Self> {
        let mut n_qubits = None;
        let mut raw = Vec::new();
        for (i, line) in BufReader::new(reader).lines().enumerate() {
            let line_no = i + 1;
            let line = line?;
            let data = line.split('#').next().unwrap_or("").trim();
            if data.is_empty() {
                continue;
            }
            let mut fields = data.split_whitespace();
            let (Some(coeff_text), Some(pauli_text), None) =
                (fields.next(), fields.next(), fields.next())
            else {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("expected `<coeff> <pauli>`, got {data:?}"),
                });
            };
            let coeff: f64 = coeff_text.parse().map_err(|_| Error::Parse {
                line: line_no,
                message: format!("coefficient {coeff_text:?} is not a real number"),
            })?;
            if !coeff.is_finite() {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("coefficient {coeff_text:?} is not finite"),
                });
            }
            let n = *n_qubits.get_or_insert(pauli_text.chars().count());
            let pauli = PauliString::parse(pauli_text, n).map_err(|e| Error::Parse {
                line: line_no,
                message: e.to_string(),
            })?;
            raw.push(WeightedTerm { coeff, pauli });
        }
        let n_qubits = n_qubits.ok_or_else(|| Error::Parse {
            line: 0,
            message: "no terms found".into(),
        })?;
        Self::from_terms(n_qubits, raw)
    }

    pub fn parse_str(text: &str) -> Result<Self> {
        Self::from_reader(text.as_bytes())
    }

    /// Writes the text format; coefficients use round-trip float formatting.
    pub fn write_to(&self, mut out: impl Write) -> std::io::Result<()> {
        for t in &self.terms {
            writeln!(out, "{} {}", t.coeff, t.pauli)?;
        }
        Ok(())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let wrap = |source| Error::Io {
            path: path.to_path_buf(),
            source,
        };
        let mut file = std::io::BufWriter::new(File::create(path).map_err(wrap)?);
        self.write_to(&mut file).map_err(wrap)?;
        file.flush().map_err(wrap)
    }

    #[inline]
    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    #[inline]
    pub fn terms(&self) -> &[WeightedTerm] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CommutingGroup {
    pub group_index: usize,
    pub terms: Vec<WeightedTerm>,
    /// Position of each member in the source Hamiltonian.
    pub term_indices: Vec<usize>,
}

impl CommutingGroup {
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn n_qubits(&self) -> Option<usize> {
        self.terms.first().map(|t| t.pauli.num_qubits())
    }

    pub fn is_pairwise_commuting(&self) -> bool {
        self.terms.iter().enumerate().all(|(i, a)| {
            self.terms[i + 1..]
                .iter()
                .all(|b| a.pauli.commutes_unchecked(&b.pauli))
        })
    }
}

/// First-fit greedy grouping: each term, in Hamiltonian order, joins the
/// earliest group whose every member it commutes with, or opens a new group.
pub fn greedy_partition(h: &Hamiltonian) -> Vec<CommutingGroup> {
    let mut groups: Vec<CommutingGroup> = Vec::new();
    for (idx, term) in h.terms().iter().enumerate() {
        let slot = groups.iter().position(|g| {
            g.terms
                .iter()
                .all(|m| m.pauli.commutes_unchecked(&term.pauli))
        });
        match slot {
            Some(g) => {
                groups[g].terms.push(term.clone());
                groups[g].term_indices.push(idx);
            }
            None => groups.push(CommutingGroup {
                group_index: groups.len(),
                terms: vec![term.clone()],
                term_indices: vec![idx],
            }),
        }
    }
    groups
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PartitionStats {
    pub n_terms: usize,
    pub n_groups: usize,
    pub max_group_size: usize,
    /// `m / (n * n_g)`, 0 when there are no groups.
    pub predicted_speedup: f64,
}

pub fn partition_stats(groups: &[CommutingGroup], n_qubits: usize) -> PartitionStats {
    let n_terms: usize = groups.iter().map(CommutingGroup::len).sum();
    let n_groups = groups.len();
    let max_group_size = groups.iter().map(CommutingGroup::len).max().unwrap_or(0);
    let denom = (n_qubits * n_groups) as f64;
    PartitionStats {
        n_terms,
        n_groups,
        max_group_size,
        predicted_speedup: if denom > 0.0 {
            n_terms as f64 / denom
        } else {
            0.0
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn load_simple() {
        let h = Hamiltonian::parse_str("0.5 ZZ\n-0.3 XI\n").unwrap();
        assert_eq!(h.n_qubits(), 2);
        assert_eq!(h.len(), 2);
        assert_eq!(h.terms()[1].coeff, -0.3);
    }

    #[test]
    fn duplicates_merge_in_first_seen_order() {
        let h = Hamiltonian::parse_str("1.0 ZI\n2.0 XX\n0.5 ZI\n").unwrap();
        assert_eq!(h.len(), 2);
        assert_eq!(h.terms()[0].pauli.to_string(), "ZI");
        assert_eq!(h.terms()[0].coeff, 1.5);
    }

    #[test]
    fn zero_terms_dropped() {
        let h = Hamiltonian::parse_str("1.0 ZZ\n0.0 XX\n").unwrap();
        assert_eq!(h.len(), 1);
        let h = Hamiltonian::parse_str("1.0 ZZ\n-1.0 ZZ\n0.25 XI\n").unwrap();
        assert_eq!(h.len(), 1);
    }

    #[test]
    fn comments_and_blank_lines() {
        let h = Hamiltonian::parse_str("# header\n\n 1.0 XY # trailing\n").unwrap();
        assert_eq!(h.len(), 1);
    }

    #[test]
    fn load_errors_carry_line_numbers() {
        let cases = [
            ("1.0 ZZ\nabc XX\n", 2),
            ("1.0 ZZ\nnan XX\n", 2),
            ("1.0 ZZ\n1.0 ZZZ\n", 2),
            ("1.0 ZZ\n1.0 ZQ\n", 2),
            ("1.0\n", 1),
        ];
        for (text, line) in cases {
            match Hamiltonian::parse_str(text) {
                Err(Error::Parse { line: l, .. }) => assert_eq!(l, line, "{text:?}"),
                other => panic!("{text:?}: {other:?}"),
            }
        }
        assert!(Hamiltonian::parse_str("# nothing\n").is_err());
    }

    #[test]
    fn single_term_single_group() {
        let h = Hamiltonian::parse_str("1.0 XYZ").unwrap();
        let g = greedy_partition(&h);
        assert_eq!(g.len(), 1);
        assert_eq!(g[0].len(), 1);
    }

    #[test]
    fn first_fit_order() {
        // XI and ZI anticommute, IZ commutes with both.
        let h = Hamiltonian::parse_str("1 XI\n1 ZI\n1 IZ\n1 XZ\n").unwrap();
        let g = greedy_partition(&h);
        assert_eq!(g.len(), 2);
        assert_eq!(g[0].term_indices, vec![0, 2, 3]);
        assert_eq!(g[1].term_indices, vec![1]);
    }

    #[test]
    fn stats_of_empty() {
        let s = partition_stats(&[], 4);
        assert_eq!((s.n_terms, s.n_groups, s.max_group_size), (0, 0, 0));
        assert_eq!(s.predicted_speedup, 0.0);
    }
}

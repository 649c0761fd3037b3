//! Binary symplectic tableau over a list of Pauli operators.
//!
//! Row `k` holds the x bits, z bits and a sign bit `r_k` of one operator; the
//! row stands for `(-1)^{r_k}` times the Hermitian Pauli string spelled by its
//! bits. Applying gate `U` replaces every row `P` by `U P U^dagger`.
//!
//! Storage is column-major (one bit vector over rows per qubit column), so a
//! gate update touches all rows with a handful of word operations.

use std::fmt;

use crate::bits::BitString;
use crate::error::{Error, Result};
use crate::pauli::PauliString;

#[derive(Clone, PartialEq, Eq)]
pub struct BinaryTableau {
    n_qubits: usize,
    rows: usize,
    x_cols: Vec<BitString>,
    z_cols: Vec<BitString>,
    sign: BitString,
}

impl BinaryTableau {
    /// All-zero tableau (every row the identity with sign `+`).
    pub fn zeros(n_qubits: usize, rows: usize) -> Self {
        Self {
            n_qubits,
            rows,
            x_cols: vec![BitString::zeros(rows); n_qubits],
            z_cols: vec![BitString::zeros(rows); n_qubits],
            sign: BitString::zeros(rows),
        }
    }

    pub fn from_terms<'a>(terms: impl IntoIterator<Item = &'a PauliString>) -> Result<Self> {
        let terms: Vec<&PauliString> = terms.into_iter().collect();
        let first = terms
            .first()
            .ok_or_else(|| Error::InvalidInput("tableau needs at least one term".into()))?;
        let n = first.num_qubits();
        let mut tab = Self::zeros(n, terms.len());
        for (k, t) in terms.iter().enumerate() {
            if t.num_qubits() != n {
                return Err(Error::DimensionMismatch {
                    left: n,
                    right: t.num_qubits(),
                });
            }
            tab.set_row(k, t);
        }
        Ok(tab)
    }

    fn set_row(&mut self, k: usize, p: &PauliString) {
        for q in 0..self.n_qubits {
            self.x_cols[q].set(k, p.x().get(q));
            self.z_cols[q].set(k, p.z().get(q));
        }
    }

    #[inline]
    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn x(&self, row: usize, qubit: usize) -> bool {
        self.x_cols[qubit].get(row)
    }

    #[inline]
    pub fn z(&self, row: usize, qubit: usize) -> bool {
        self.z_cols[qubit].get(row)
    }

    /// Accumulated sign bit `r_k`; `true` means a factor of -1.
    #[inline]
    pub fn sign(&self, row: usize) -> bool {
        self.sign.get(row)
    }

    /// Column of x bits for `qubit`, one bit per row.
    pub fn x_column(&self, qubit: usize) -> &BitString {
        &self.x_cols[qubit]
    }

    pub fn z_column(&self, qubit: usize) -> &BitString {
        &self.z_cols[qubit]
    }

    /// The unsigned Pauli string of a row.
    pub fn row_pauli(&self, row: usize) -> PauliString {
        let mut x = BitString::zeros(self.n_qubits);
        let mut z = BitString::zeros(self.n_qubits);
        for q in 0..self.n_qubits {
            x.set(q, self.x(row, q));
            z.set(q, self.z(row, q));
        }
        PauliString::from_masks(x, z).expect("equal lengths")
    }

    /// X bits of a row as an n-bit string.
    pub fn row_x(&self, row: usize) -> BitString {
        let mut x = BitString::zeros(self.n_qubits);
        for q in 0..self.n_qubits {
            x.set(q, self.x(row, q));
        }
        x
    }

    pub fn row_is_zero(&self, row: usize) -> bool {
        (0..self.n_qubits).all(|q| !self.x(row, q) && !self.z(row, q))
    }

    /// `true` when no row has an X or Y factor.
    pub fn x_block_is_zero(&self) -> bool {
        self.x_cols.iter().all(BitString::is_zero)
    }

    pub fn z_block_is_zero(&self) -> bool {
        self.z_cols.iter().all(BitString::is_zero)
    }

    /// Exchanges two rows, signs included. Pure bookkeeping, not a gate.
    pub fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for col in self.x_cols.iter_mut().chain(self.z_cols.iter_mut()) {
            col.swap_bits(a, b);
        }
        self.sign.swap_bits(a, b);
    }

    fn check_qubit(&self, q: usize) -> Result<()> {
        if q >= self.n_qubits {
            return Err(Error::QubitOutOfRange {
                index: q,
                n_qubits: self.n_qubits,
            });
        }
        Ok(())
    }

    fn check_pair(&self, c: usize, t: usize) -> Result<()> {
        self.check_qubit(c)?;
        self.check_qubit(t)?;
        if c == t {
            return Err(Error::SameQubit(c));
        }
        Ok(())
    }

    pub fn apply_h(&mut self, t: usize) -> Result<()> {
        self.check_qubit(t)?;
        self.h(t);
        Ok(())
    }

    pub fn apply_s(&mut self, t: usize) -> Result<()> {
        self.check_qubit(t)?;
        self.s(t);
        Ok(())
    }

    pub fn apply_cnot(&mut self, c: usize, t: usize) -> Result<()> {
        self.check_pair(c, t)?;
        self.cnot(c, t);
        Ok(())
    }

    pub fn apply_cz(&mut self, c: usize, t: usize) -> Result<()> {
        self.check_pair(c, t)?;
        self.cz(c, t);
        Ok(())
    }

    // r ^= x_t z_t; swap x_t <-> z_t
    pub(crate) fn h(&mut self, t: usize) {
        let sign = self.sign.words_mut();
        for (w, s) in sign.iter_mut().enumerate() {
            *s ^= self.x_cols[t].words()[w] & self.z_cols[t].words()[w];
        }
        std::mem::swap(&mut self.x_cols[t], &mut self.z_cols[t]);
    }

    // r ^= x_t z_t; z_t ^= x_t
    pub(crate) fn s(&mut self, t: usize) {
        for w in 0..self.sign.words().len() {
            let xt = self.x_cols[t].words()[w];
            let zt = self.z_cols[t].words()[w];
            self.sign.words_mut()[w] ^= xt & zt;
            self.z_cols[t].words_mut()[w] = zt ^ xt;
        }
    }

    // r ^= x_c z_t (x_t ^ z_c ^ 1); x_t ^= x_c; z_c ^= z_t
    pub(crate) fn cnot(&mut self, c: usize, t: usize) {
        for w in 0..self.sign.words().len() {
            let xc = self.x_cols[c].words()[w];
            let xt = self.x_cols[t].words()[w];
            let zc = self.z_cols[c].words()[w];
            let zt = self.z_cols[t].words()[w];
            self.sign.words_mut()[w] ^= xc & zt & !(xt ^ zc);
            self.x_cols[t].words_mut()[w] = xt ^ xc;
            self.z_cols[c].words_mut()[w] = zc ^ zt;
        }
    }

    // r ^= x_c x_t (z_t ^ z_c); z_t ^= x_c; z_c ^= x_t
    pub(crate) fn cz(&mut self, c: usize, t: usize) {
        for w in 0..self.sign.words().len() {
            let xc = self.x_cols[c].words()[w];
            let xt = self.x_cols[t].words()[w];
            let zc = self.z_cols[c].words()[w];
            let zt = self.z_cols[t].words()[w];
            self.sign.words_mut()[w] ^= xc & xt & (zt ^ zc);
            self.z_cols[t].words_mut()[w] = zt ^ xc;
            self.z_cols[c].words_mut()[w] = zc ^ xt;
        }
    }

    /// GF(2) rank of the X block; the tableau itself is not modified.
    pub fn rank_x_block(&self) -> usize {
        gf2_rank((0..self.rows).map(|k| self.row_x(k)).collect())
    }

    /// Rank of the X block as it would be after `H(t)`, i.e. with column
    /// `t` of the X block replaced by column `t` of the Z block.
    pub(crate) fn rank_x_block_with_h(&self, t: usize) -> usize {
        let rows = (0..self.rows)
            .map(|k| {
                let mut x = self.row_x(k);
                x.set(t, self.z(k, t));
                x
            })
            .collect();
        gf2_rank(rows)
    }

    /// Appends all-zero rows until there are exactly `n_qubits` rows.
    pub fn pad_to_square(&self) -> Result<BinaryTableau> {
        if self.rows > self.n_qubits {
            return Err(Error::InvalidInput(format!(
                "cannot pad {} rows down to {} qubits",
                self.rows, self.n_qubits
            )));
        }
        let n = self.n_qubits;
        let mut out = BinaryTableau::zeros(n, n);
        for k in 0..self.rows {
            for q in 0..n {
                out.x_cols[q].set(k, self.x(k, q));
                out.z_cols[q].set(k, self.z(k, q));
            }
            out.sign.set(k, self.sign(k));
        }
        Ok(out)
    }
}

/// Rows are printed as `x bits|z bits|r`, qubit 0 first.
impl fmt::Display for BinaryTableau {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for k in 0..self.rows {
            for q in 0..self.n_qubits {
                f.write_str(if self.x(k, q) { "1" } else { "0" })?;
            }
            f.write_str("|")?;
            for q in 0..self.n_qubits {
                f.write_str(if self.z(k, q) { "1" } else { "0" })?;
            }
            writeln!(f, "|{}", u8::from(self.sign(k)))?;
        }
        Ok(())
    }
}

impl fmt::Debug for BinaryTableau {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BinaryTableau {{\n{self}}}")
    }
}

pub(crate) fn gf2_rank(mut rows: Vec<BitString>) -> usize {
    let mut rank = 0;
    let width = rows.first().map_or(0, BitString::len);
    for col in 0..width {
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
        rank += 1;
        if rank == rows.len() {
            break;
        }
    }
    rank
}

/// Full symplectic row `x_0..x_{n-1} z_0..z_{n-1}`.
fn symplectic_row(p: &PauliString) -> BitString {
    let n = p.num_qubits();
    let mut row = BitString::zeros(2 * n);
    for q in p.x().iter_ones() {
        row.set(q, true);
    }
    for q in p.z().iter_ones() {
        row.set(n + q, true);
    }
    row
}

/// Indices of a maximal linearly independent subset of `terms`.
///
/// Sweeps columns left to right over the 2n-bit symplectic rows: when the
/// current row lacks a one in the current column it is swapped with the first
/// later row that has one (or the column is skipped); the pivot row is then
/// XORed into every later row with a one in that column. Rows still nonzero at
/// the end are independent. The returned indices refer to the input order and
/// are listed in final row order.
pub fn independent_subset(terms: &[PauliString]) -> Vec<usize> {
    let mut rows: Vec<(usize, BitString)> =
        terms.iter().map(symplectic_row).enumerate().collect();
    let width = rows.first().map_or(0, |(_, r)| r.len());
    let mut ir = 0;
    let mut ic = 0;
    while ir < rows.len() && ic < width {
        if !rows[ir].1.get(ic) {
            match (ir + 1..rows.len()).find(|&j| rows[j].1.get(ic)) {
                Some(j) => rows.swap(ir, j),
                None => {
                    ic += 1;
                    continue;
                }
            }
        }
        let pivot = rows[ir].1.clone();
        for (_, row) in rows.iter_mut().skip(ir + 1) {
            if row.get(ic) {
                row.xor_assign(&pivot);
            }
        }
        ir += 1;
        ic += 1;
    }
    rows.into_iter()
        .filter(|(_, r)| r.any())
        .map(|(i, _)| i)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> PauliString {
        s.parse().unwrap()
    }

    fn row_text(tab: &BinaryTableau, k: usize) -> String {
        let line = tab.to_string();
        line.lines().nth(k).unwrap().to_string()
    }

    #[test]
    fn from_terms_worked_example_rows() {
        let terms = ["YIXI", "IXIY", "XZYZ", "YZXZ"].map(p);
        let tab = BinaryTableau::from_terms(&terms).unwrap();
        let got: Vec<String> = (0..4)
            .map(|k| row_text(&tab, k).replace('|', "")[..8].to_string())
            .collect();
        assert_eq!(got, ["10101000", "01010001", "10100111", "10101101"]);
        assert!((0..4).all(|k| !tab.sign(k)));
    }

    #[test]
    fn from_terms_small_cases() {
        let tab = BinaryTableau::from_terms(&[p("III")]).unwrap();
        assert!(tab.row_is_zero(0));
        let tab = BinaryTableau::from_terms(&[p("XYZ")]).unwrap();
        assert_eq!(row_text(&tab, 0), "110|011|0");
        assert!(BinaryTableau::from_terms(&[]).is_err());
    }

    #[test]
    fn single_gate_examples() {
        let mut t = BinaryTableau::from_terms(&[p("X")]).unwrap();
        t.apply_h(0).unwrap();
        assert_eq!(row_text(&t, 0), "0|1|0");

        let mut t = BinaryTableau::from_terms(&[p("Y")]).unwrap();
        t.apply_s(0).unwrap();
        assert_eq!(row_text(&t, 0), "1|0|1");

        let mut t = BinaryTableau::from_terms(&[p("ZZ"), p("IZ"), p("ZI")]).unwrap();
        t.apply_cnot(0, 1).unwrap();
        assert_eq!(t.row_pauli(0), p("IZ"));
        assert_eq!(t.row_pauli(1), p("ZZ"));
        assert_eq!(t.row_pauli(2), p("ZI"));
        assert!((0..3).all(|k| !t.sign(k)));
    }

    #[test]
    fn gate_index_errors() {
        let mut t = BinaryTableau::from_terms(&[p("XX")]).unwrap();
        assert!(t.apply_h(2).is_err());
        assert!(matches!(t.apply_cnot(1, 1), Err(Error::SameQubit(1))));
        assert!(t.apply_cz(0, 5).is_err());
    }

    #[test]
    fn rank_examples() {
        let t = BinaryTableau::from_terms(&["YIXI", "IXIY", "XZYZ", "YZXZ"].map(p)).unwrap();
        assert_eq!(t.rank_x_block(), 2);
        let t = BinaryTableau::from_terms(&[p("ZZZ"), p("IZI")]).unwrap();
        assert_eq!(t.rank_x_block(), 0);
        let t = BinaryTableau::from_terms(&["XII", "IXI", "IIX"].map(p)).unwrap();
        assert_eq!(t.rank_x_block(), 3);
    }

    #[test]
    fn independent_subset_appendix_example() {
        let terms = ["ZYXI", "ZXYI", "IYXZ", "IXYZ", "YIZX", "YZIX", "XIZY", "XZIY"].map(p);
        let idx = independent_subset(&terms);
        let names: Vec<String> = idx.iter().map(|&i| terms[i].to_string()).collect();
        assert_eq!(names, ["YIZX", "ZXYI", "IYXZ", "IXYZ"]);
    }

    #[test]
    fn independent_subset_small() {
        assert_eq!(independent_subset(&[p("ZZ"), p("ZZ")]), vec![0]);
        assert_eq!(independent_subset(&[p("ZI"), p("IZ"), p("ZZ")]), vec![0, 1]);
        assert!(independent_subset(&[p("II")]).is_empty());
    }

    #[test]
    fn padding() {
        let t = BinaryTableau::from_terms(&[p("XXII"), p("IIZZ")]).unwrap();
        let sq = t.pad_to_square().unwrap();
        assert_eq!(sq.rows(), 4);
        assert!(sq.row_is_zero(2) && sq.row_is_zero(3));
        let t4 = BinaryTableau::from_terms(&["XIII", "IXII", "IIXI", "IIIX"].map(p)).unwrap();
        assert_eq!(t4.pad_to_square().unwrap(), t4);
        let empty = BinaryTableau::zeros(3, 0).pad_to_square().unwrap();
        assert_eq!(empty.rows(), 3);
        assert!((0..3).all(|k| empty.row_is_zero(k)));
        let tall = BinaryTableau::from_terms(&[p("X"), p("Z")]).unwrap();
        assert!(tall.pad_to_square().is_err());
    }

    #[test]
    fn involutions() {
        let base = BinaryTableau::from_terms(&["XYZI", "YYXZ", "ZIXY", "IXYZ"].map(p)).unwrap();
        let mut t = base.clone();
        t.h(1);
        t.h(1);
        assert_eq!(t, base);
        for _ in 0..4 {
            t.s(2);
        }
        assert_eq!(t, base);
        t.cnot(0, 3);
        t.cnot(0, 3);
        assert_eq!(t, base);
        let mut a = base.clone();
        let mut b = base.clone();
        a.cz(1, 2);
        b.cz(2, 1);
        assert_eq!(a, b);
    }
}

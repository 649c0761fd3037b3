//! Pauli strings in binary symplectic form.
//!
//! Qubit convention, used everywhere in this crate: qubit `q` (0-based) is
//! the `q`-th character of the text form counting from the left, bit `q` of
//! the x/z masks, and bit `q` of a computational basis index. So `"XI"`
//! flips basis index bit 0, and `|10>` written as text is basis index 1.
//!
//! A stored string is always Hermitian: it equals the literal tensor product
//! of its letters, i.e. `i^{#Y} * prod X^x Z^z`.

use std::fmt;
use std::str::FromStr;

use crate::bits::BitString;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn from_bits(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }

    pub fn bits(self) -> (bool, bool) {
        match self {
            Pauli::I => (false, false),
            Pauli::X => (true, false),
            Pauli::Y => (true, true),
            Pauli::Z => (false, true),
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    pub fn from_char(ch: char) -> Option<Self> {
        match ch {
            'I' => Some(Pauli::I),
            'X' => Some(Pauli::X),
            'Y' => Some(Pauli::Y),
            'Z' => Some(Pauli::Z),
            _ => None,
        }
    }
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PauliString {
    x: BitString,
    z: BitString,
}

impl PauliString {
    pub fn identity(n_qubits: usize) -> Self {
        Self {
            x: BitString::zeros(n_qubits),
            z: BitString::zeros(n_qubits),
        }
    }

    pub fn from_masks(x: BitString, z: BitString) -> Result<Self> {
        if x.len() != z.len() {
            return Err(Error::DimensionMismatch {
                left: x.len(),
                right: z.len(),
            });
        }
        Ok(Self { x, z })
    }

    pub fn single(n_qubits: usize, qubit: usize, p: Pauli) -> Result<Self> {
        let mut s = Self::identity(n_qubits);
        s.set(qubit, p)?;
        Ok(s)
    }

    /// Parses `text` as exactly `n_qubits` letters from `{I,X,Y,Z}`.
    pub fn parse(text: &str, n_qubits: usize) -> Result<Self> {
        let count = text.chars().count();
        if count != n_qubits {
            return Err(Error::LengthMismatch {
                expected: n_qubits,
                found: count,
            });
        }
        let mut s = Self::identity(n_qubits);
        for (position, ch) in text.chars().enumerate() {
            let p = Pauli::from_char(ch).ok_or(Error::InvalidPauliChar { ch, position })?;
            let (xb, zb) = p.bits();
            s.x.set(position, xb);
            s.z.set(position, zb);
        }
        Ok(s)
    }

    #[inline]
    pub fn num_qubits(&self) -> usize {
        self.x.len()
    }

    #[inline]
    pub fn x(&self) -> &BitString {
        &self.x
    }

    #[inline]
    pub fn z(&self) -> &BitString {
        &self.z
    }

    pub fn get(&self, qubit: usize) -> Pauli {
        Pauli::from_bits(self.x.get(qubit), self.z.get(qubit))
    }

    pub fn set(&mut self, qubit: usize, p: Pauli) -> Result<()> {
        if qubit >= self.num_qubits() {
            return Err(Error::QubitOutOfRange {
                index: qubit,
                n_qubits: self.num_qubits(),
            });
        }
        let (xb, zb) = p.bits();
        self.x.set(qubit, xb);
        self.z.set(qubit, zb);
        Ok(())
    }

    /// Number of Y factors.
    pub fn y_count(&self) -> usize {
        self.x.and_count(&self.z)
    }

    /// Power of `i` in the `i^s * prod X^x Z^z` form. Always `#Y mod 4`.
    pub fn phase_exp(&self) -> u8 {
        (self.y_count() % 4) as u8
    }

    pub fn weight(&self) -> usize {
        let mut support = self.x.clone();
        support.or_assign(&self.z);
        support.count_ones()
    }

    pub fn is_identity(&self) -> bool {
        self.x.is_zero() && self.z.is_zero()
    }

    /// Only I and Z factors.
    pub fn is_diagonal(&self) -> bool {
        self.x.is_zero()
    }

    fn check_dims(&self, other: &PauliString) -> Result<()> {
        if self.num_qubits() != other.num_qubits() {
            return Err(Error::DimensionMismatch {
                left: self.num_qubits(),
                right: other.num_qubits(),
            });
        }
        Ok(())
    }

    /// Symplectic inner product test.
    pub fn commutes(&self, other: &PauliString) -> Result<bool> {
        self.check_dims(other)?;
        Ok(self.commutes_unchecked(other))
    }

    #[inline]
    pub(crate) fn commutes_unchecked(&self, other: &PauliString) -> bool {
        let mut acc = 0u64;
        let words = self
            .x
            .words()
            .iter()
            .zip(self.z.words())
            .zip(other.x.words().iter().zip(other.z.words()));
        for ((ax, az), (bx, bz)) in words {
            acc ^= (ax & bz) ^ (az & bx);
        }
        acc.count_ones() & 1 == 0
    }

    /// Returns `(c, k)` with `self * other = i^k * c`, `c` canonical.
    pub fn multiply(&self, other: &PauliString) -> Result<(PauliString, u8)> {
        self.check_dims(other)?;
        let mut x = self.x.clone();
        x.xor_assign(&other.x);
        let mut z = self.z.clone();
        z.xor_assign(&other.z);
        // Z^za X^xb = (-1)^{za.xb} X^xb Z^za when reordering into X-then-Z form.
        let swaps = self.z.and_count(&other.x);
        let product = PauliString { x, z };
        let k = self.y_count() + other.y_count() + 2 * swaps + 4 * product.num_qubits()
            - product.y_count();
        Ok((product, (k % 4) as u8))
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for q in 0..self.num_qubits() {
            write!(f, "{}", self.get(q).as_char())?;
        }
        Ok(())
    }
}

impl fmt::Debug for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PauliString({self})")
    }
}

impl FromStr for PauliString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::parse(s, s.chars().count())
    }
}

/// `coeff * pauli` with a real, finite coefficient.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedTerm {
    pub coeff: f64,
    pub pauli: PauliString,
}

impl WeightedTerm {
    pub fn new(coeff: f64, pauli: PauliString) -> Result<Self> {
        if !coeff.is_finite() {
            return Err(Error::InvalidInput(format!(
                "coefficient {coeff} of {pauli} is not finite"
            )));
        }
        Ok(Self { coeff, pauli })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> PauliString {
        s.parse().unwrap()
    }

    #[test]
    fn parse_xyz_masks() {
        let s = PauliString::parse("XYZ", 3).unwrap();
        // Masks listed qubit 0 first: x = 110, z = 011.
        assert_eq!(s.x().to_string(), "110");
        assert_eq!(s.z().to_string(), "011");
        assert_eq!(s.phase_exp(), 1);
    }

    #[test]
    fn parse_identity_and_yy() {
        let id = PauliString::parse("III", 3).unwrap();
        assert!(id.is_identity());
        assert_eq!(id.phase_exp(), 0);
        let yy = PauliString::parse("YY", 2).unwrap();
        assert_eq!(yy.x().to_string(), "11");
        assert_eq!(yy.z().to_string(), "11");
        assert_eq!(yy.phase_exp(), 2);
    }

    #[test]
    fn parse_errors() {
        match PauliString::parse("XQZ", 3) {
            Err(Error::InvalidPauliChar { ch: 'Q', position: 1 }) => {}
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            PauliString::parse("XX", 3),
            Err(Error::LengthMismatch { expected: 3, found: 2 })
        ));
        assert!(PauliString::parse("xx", 2).is_err());
    }

    #[test]
    fn commutation_examples() {
        assert!(p("XI").commutes(&p("IX")).unwrap());
        assert!(!p("X").commutes(&p("Z")).unwrap());
        assert!(p("YIXI").commutes(&p("XZYZ")).unwrap());
        assert!(p("X").commutes(&p("XX")).is_err());
    }

    #[test]
    fn multiply_examples() {
        assert_eq!(p("X").multiply(&p("Z")).unwrap(), (p("Y"), 3));
        assert_eq!(p("Z").multiply(&p("X")).unwrap(), (p("Y"), 1));
        assert_eq!(p("ZX").multiply(&p("XX")).unwrap(), (p("YI"), 1));
        for s in ["XYZI", "YYYY", "IZIZ"] {
            assert_eq!(p(s).multiply(&p(s)).unwrap(), (p("IIII"), 0));
        }
    }

    #[test]
    fn wide_strings_use_multiple_words() {
        let text: String = (0..100).map(|i| ['I', 'X', 'Y', 'Z'][i % 4]).collect();
        let s = p(&text);
        assert_eq!(s.num_qubits(), 100);
        assert_eq!(s.to_string(), text);
        assert!(s.commutes(&s).unwrap());
    }
}

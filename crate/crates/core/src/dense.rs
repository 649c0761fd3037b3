//! Dense matrices for small systems, used as a reference and by
//! [`crate::evolution::exact_evolve`].
//!
//! The matrix of a Pauli string is `P_{n-1} (x) ... (x) P_0`, so qubit 0 is
//! the least significant bit of the row index, matching the state vector.

use nalgebra::{DMatrix, DVector};

use crate::bits::BitString;
use crate::circuit::{CliffordCircuit, Gate};
use crate::diagonalize::DiagonalGroup;
use crate::error::{Error, Result};
use crate::hamiltonian::{CommutingGroup, Hamiltonian};
use crate::pauli::{Pauli, PauliString};
use crate::statevec::{gates, StateVector, C64};

/// Dense routines refuse more qubits than this.
pub const MAX_DENSE_QUBITS: usize = 12;

pub type Matrix = DMatrix<C64>;

fn check(n: usize) -> Result<()> {
    if n > MAX_DENSE_QUBITS {
        return Err(Error::TooManyQubits {
            n_qubits: n,
            limit: MAX_DENSE_QUBITS,
        });
    }
    Ok(())
}

fn mat2(m: &[[C64; 2]; 2]) -> Matrix {
    Matrix::from_fn(2, 2, |i, j| m[i][j])
}

pub fn pauli_matrix(p: Pauli) -> Matrix {
    mat2(match p {
        Pauli::I => &gates::I,
        Pauli::X => &gates::X,
        Pauli::Y => &gates::Y,
        Pauli::Z => &gates::Z,
    })
}

pub fn pauli_string(p: &PauliString) -> Result<Matrix> {
    let n = p.num_qubits();
    check(n)?;
    let mut m = Matrix::identity(1, 1);
    for q in (0..n).rev() {
        m = m.kronecker(&pauli_matrix(p.get(q)));
    }
    Ok(m)
}

/// `sum_k c_k P_k`
pub fn hamiltonian(h: &Hamiltonian) -> Result<Matrix> {
    let n = h.n_qubits();
    check(n)?;
    let dim = 1 << n;
    let mut m = Matrix::zeros(dim, dim);
    for t in h.terms() {
        m += pauli_string(&t.pauli)? * C64::new(t.coeff, 0.0);
    }
    Ok(m)
}

/// Embeds a 2x2 gate on qubit `t`.
pub fn single_qubit(u: &[[C64; 2]; 2], t: usize, n: usize) -> Result<Matrix> {
    check(n)?;
    let mut m = Matrix::identity(1, 1);
    for q in (0..n).rev() {
        let f = if q == t { mat2(u) } else { Matrix::identity(2, 2) };
        m = m.kronecker(&f);
    }
    Ok(m)
}

/// Permutation-and-phase construction, independent of the tensor layout.
pub fn cnot(control: usize, target: usize, n: usize) -> Result<Matrix> {
    check(n)?;
    let dim = 1usize << n;
    Ok(Matrix::from_fn(dim, dim, |i, j| {
        let image = if j >> control & 1 == 1 { j ^ 1 << target } else { j };
        C64::new(if i == image { 1.0 } else { 0.0 }, 0.0)
    }))
}

pub fn cz(a: usize, b: usize, n: usize) -> Result<Matrix> {
    check(n)?;
    let dim = 1usize << n;
    Ok(Matrix::from_fn(dim, dim, |i, j| {
        if i != j {
            C64::new(0.0, 0.0)
        } else if i >> a & 1 == 1 && i >> b & 1 == 1 {
            C64::new(-1.0, 0.0)
        } else {
            C64::new(1.0, 0.0)
        }
    }))
}

pub fn gate(g: Gate, n: usize) -> Result<Matrix> {
    match g {
        Gate::H(q) => single_qubit(&gates::H, q, n),
        Gate::S(q) => single_qubit(&gates::S, q, n),
        Gate::Sdg(q) => single_qubit(&gates::SDG, q, n),
        Gate::Cnot { control, target } => cnot(control, target, n),
        Gate::Cz(a, b) => cz(a, b, n),
    }
}

/// Unitary of the whole circuit, gates multiplied in application order.
pub fn circuit(c: &CliffordCircuit) -> Result<Matrix> {
    let n = c.n_qubits;
    check(n)?;
    let mut u = Matrix::identity(1 << n, 1 << n);
    for g in c.gates() {
        u = gate(g, n)? * u;
    }
    Ok(u)
}

/// `exp(-i t H)` for Hermitian `h`, from its eigendecomposition.
pub fn expm_hermitian(h: &Matrix, t: f64) -> Matrix {
    let eig = h.clone().symmetric_eigen();
    let phases = DVector::from_iterator(
        eig.eigenvalues.len(),
        eig.eigenvalues.iter().map(|&e| C64::from_polar(1.0, -t * e)),
    );
    let v = &eig.eigenvectors;
    v * Matrix::from_diagonal(&phases) * v.adjoint()
}

/// Largest entrywise deviation of `C P_k C^dagger` from
/// `(s_k / c_k) Z^{z_k}` over the group's terms.
pub fn diagonalization_error(group: &CommutingGroup, diag: &DiagonalGroup) -> Result<f64> {
    let n = diag.n_qubits;
    let u = circuit(&diag.circuit)?;
    let mut worst: f64 = 0.0;
    for (k, t) in group.terms.iter().enumerate() {
        let conj = &u * pauli_string(&t.pauli)? * u.adjoint();
        let z = PauliString::from_masks(BitString::zeros(n), diag.z_masks[k].clone())?;
        let expected = pauli_string(&z)? * C64::new(diag.signed_coeffs[k] / t.coeff, 0.0);
        worst = worst.max((conj - expected).camax());
    }
    Ok(worst)
}

pub fn apply(m: &Matrix, psi: &StateVector) -> Result<StateVector> {
    if m.ncols() != psi.dim() {
        return Err(Error::DimensionMismatch {
            left: m.ncols(),
            right: psi.dim(),
        });
    }
    let v = DVector::from_column_slice(psi.amplitudes());
    StateVector::from_amplitudes((m * v).as_slice().to_vec())
}

//! Benchmark Hamiltonians: fully connected transverse-field Ising and the
//! four-body SYK model under Jordan-Wigner.
//!
//! Every random coupling is drawn from its own generator seeded by
//! `(seed, model tag, index tuple)`, so values do not depend on generation
//! order.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::hamiltonian::Hamiltonian;
use crate::pauli::{Pauli, PauliString, WeightedTerm};

const TAG_TFIM_ZZ: u64 = 0x7a7a;
const TAG_TFIM_X: u64 = 0x78;
const TAG_SYK: u64 = 0x73796b;

/// Residual imaginary part above this aborts SYK generation.
pub const HERMITICITY_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    Tfim,
    Syk,
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "tfim" => Ok(ModelKind::Tfim),
            "syk" => Ok(ModelKind::Syk),
            _ => Err(Error::InvalidInput(format!("unknown model {s:?}"))),
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModelKind::Tfim => "tfim",
            ModelKind::Syk => "syk",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModelSpec {
    pub kind: ModelKind,
    pub n_qubits: usize,
    pub seed: u64,
}

impl ModelSpec {
    pub fn generate(&self) -> Result<Hamiltonian> {
        match self.kind {
            ModelKind::Tfim => gen_tfim(self.n_qubits, self.seed),
            ModelKind::Syk => gen_syk(self.n_qubits, self.seed),
        }
    }
}

fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

fn keyed_rng(seed: u64, tag: u64, key: &[usize]) -> ChaCha8Rng {
    let mut h = splitmix(seed ^ splitmix(tag));
    for &k in key {
        h = splitmix(h ^ k as u64);
    }
    ChaCha8Rng::seed_from_u64(h)
}

fn check_n(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::InvalidInput(format!("model needs at least 2 qubits, got {n}")));
    }
    if n > 64 {
        return Err(Error::TooManyQubits { n_qubits: n, limit: 64 });
    }
    Ok(())
}

/// `sum_{i<j} J_ij Z_i Z_j + sum_i h_i X_i` with couplings uniform in
/// `(-1, 1)`. ZZ terms come first, in `(i, j)` lexicographic order.
pub fn gen_tfim(n: usize, seed: u64) -> Result<Hamiltonian> {
    check_n(n)?;
    let mut terms = Vec::with_capacity(n * (n + 1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            let mut p = PauliString::identity(n);
            p.set(i, Pauli::Z)?;
            p.set(j, Pauli::Z)?;
            let c = keyed_rng(seed, TAG_TFIM_ZZ, &[i, j]).gen_range(-1.0..1.0);
            terms.push(WeightedTerm::new(c, p)?);
        }
    }
    for i in 0..n {
        let c = keyed_rng(seed, TAG_TFIM_X, &[i]).gen_range(-1.0..1.0);
        terms.push(WeightedTerm::new(c, PauliString::single(n, i, Pauli::X)?)?);
    }
    Hamiltonian::from_terms(n, terms)
}

/// Majorana operator for mode `m` in `0..2n`: mode `2q` is
/// `Z_0 ... Z_{q-1} X_q`, mode `2q + 1` is `Z_0 ... Z_{q-1} Y_q`.
pub fn majorana(n: usize, m: usize) -> Result<PauliString> {
    if m >= 2 * n {
        return Err(Error::InvalidInput(format!(
            "Majorana mode {m} out of range for {n} qubits"
        )));
    }
    let q = m / 2;
    let mut p = PauliString::identity(n);
    for k in 0..q {
        p.set(k, Pauli::Z)?;
    }
    p.set(q, if m % 2 == 0 { Pauli::X } else { Pauli::Y })?;
    Ok(p)
}

/// Variance of the real and of the imaginary part of each coupling.
pub fn syk_variance(n: usize) -> f64 {
    let modes = (2 * n) as f64;
    6.0 / (modes * modes * modes)
}

/// `C(2n, 4)`: number of ordered mode quadruples.
pub fn syk_candidate_count(n: usize) -> usize {
    let m = 2 * n;
    if m < 4 {
        return 0;
    }
    m * (m - 1) * (m - 2) * (m - 3) / 24
}

/// SYK model with `2n` Majorana modes. For each `i < j < k < l` one complex
/// coupling `J` is sampled; its antisymmetric and conjugate partners add up
/// to `8 Re(J) c_i c_j c_k c_l`, and the Majorana product is a real sign
/// times a Hermitian Pauli string.
pub fn gen_syk(n: usize, seed: u64) -> Result<Hamiltonian> {
    check_n(n)?;
    let modes = 2 * n;
    let ops = (0..modes).map(|m| majorana(n, m)).collect::<Result<Vec<_>>>()?;
    let normal = Normal::new(0.0, syk_variance(n).sqrt()).expect("positive variance");
    let mut quads = Vec::with_capacity(syk_candidate_count(n));
    for i in 0..modes {
        for j in i + 1..modes {
            for k in j + 1..modes {
                for l in k + 1..modes {
                    quads.push([i, j, k, l]);
                }
            }
        }
    }
    let terms = quads
        .par_iter()
        .map(|quad| {
            let mut rng = keyed_rng(seed, TAG_SYK, quad);
            let coupling = Complex64::new(normal.sample(&mut rng), normal.sample(&mut rng));
            let mut product = ops[quad[0]].clone();
            let mut phase = 0u8;
            for &m in &quad[1..] {
                let (p, k) = product.multiply(&ops[m])?;
                product = p;
                phase = (phase + k) % 4;
            }
            let coeff = Complex64::i().powu(phase as u32) * (8.0 * coupling.re);
            if phase % 2 == 1 || coeff.im.abs() > HERMITICITY_TOLERANCE {
                return Err(Error::Invariant(format!(
                    "Majorana product {quad:?} is not Hermitian (phase i^{phase})"
                )));
            }
            WeightedTerm::new(coeff.re, product)
        })
        .collect::<Result<Vec<_>>>()?;
    Hamiltonian::from_terms(n, terms)
}

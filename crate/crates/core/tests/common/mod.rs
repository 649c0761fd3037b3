//! Dense references built from the index action of each operator, kept
//! independent of `simdiag::dense`, plus random generators.
#![allow(dead_code)]

use std::collections::BTreeSet;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rand::Rng;

use simdiag::bits::BitString;
use simdiag::circuit::{CliffordCircuit, Gate};
use simdiag::hamiltonian::Hamiltonian;
use simdiag::pauli::{PauliString, WeightedTerm};

pub type Mat = DMatrix<C64>;

pub fn mask(b: &BitString) -> usize {
    b.to_u64().expect("small width") as usize
}

pub fn parity(v: usize) -> bool {
    v.count_ones() % 2 == 1
}

pub fn pauli_from_masks(n: usize, x: usize, z: usize) -> PauliString {
    PauliString::from_masks(BitString::from_u64(n, x as u64), BitString::from_u64(n, z as u64))
        .unwrap()
}

/// `P|b> = i^{#Y} (-1)^{|b & z|} |b ^ x>`
pub fn pauli_dense(n: usize, x: usize, z: usize) -> Mat {
    let dim = 1 << n;
    let iy = C64::i().powu((x & z).count_ones());
    let mut m = Mat::zeros(dim, dim);
    for b in 0..dim {
        m[(b ^ x, b)] = if parity(b & z) { -iy } else { iy };
    }
    m
}

pub fn naive_gate(g: Gate, a: &mut [C64]) {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    for b in 0..a.len() {
        match g {
            Gate::H(t) if b >> t & 1 == 0 => {
                let (u, v) = (a[b], a[b | 1 << t]);
                a[b] = (u + v) * r;
                a[b | 1 << t] = (u - v) * r;
            }
            Gate::S(t) if b >> t & 1 == 1 => a[b] *= C64::i(),
            Gate::Sdg(t) if b >> t & 1 == 1 => a[b] *= -C64::i(),
            Gate::Cnot { control, target } if b >> control & 1 == 1 && b >> target & 1 == 0 => {
                a.swap(b, b | 1 << target)
            }
            Gate::Cz(p, q) if b >> p & 1 == 1 && b >> q & 1 == 1 => a[b] = -a[b],
            _ => {}
        }
    }
}

pub fn circuit_gates(c: &CliffordCircuit) -> Vec<Gate> {
    let mut g: Vec<Gate> = c.h_pre.iter().map(|&q| Gate::H(q)).collect();
    g.extend(c.cnots.iter().map(|&(control, target)| Gate::Cnot { control, target }));
    g.extend(c.czs.iter().map(|&(a, b)| Gate::Cz(a, b)));
    g.extend(c.s_layer.iter().map(|&q| Gate::S(q)));
    g.extend(c.h_post.iter().map(|&q| Gate::H(q)));
    g
}

pub fn dense_of_gates(gates: &[Gate], n: usize) -> Mat {
    let dim = 1 << n;
    let mut m = Mat::zeros(dim, dim);
    for j in 0..dim {
        let mut col = vec![C64::new(0.0, 0.0); dim];
        col[j] = C64::new(1.0, 0.0);
        for &g in gates {
            naive_gate(g, &mut col);
        }
        for i in 0..dim {
            m[(i, j)] = col[i];
        }
    }
    m
}

pub fn max_entry(m: &Mat) -> f64 {
    m.iter().map(|c| c.norm()).fold(0.0, f64::max)
}

/// Symplectic action on unsigned Pauli bits.
pub fn conjugate_bits(g: Gate, x: &mut usize, z: &mut usize) {
    let bit = |v: usize, q: usize| v >> q & 1;
    match g {
        Gate::H(t) => {
            let (xt, zt) = (bit(*x, t), bit(*z, t));
            *x = *x & !(1 << t) | zt << t;
            *z = *z & !(1 << t) | xt << t;
        }
        Gate::S(t) | Gate::Sdg(t) => *z ^= bit(*x, t) << t,
        Gate::Cnot { control, target } => {
            *x ^= bit(*x, control) << target;
            *z ^= bit(*z, target) << control;
        }
        Gate::Cz(a, b) => {
            *z ^= bit(*x, a) << b;
            *z ^= bit(*x, b) << a;
        }
    }
}

pub fn commute_bits(xa: usize, za: usize, xb: usize, zb: usize) -> bool {
    !parity(xa & zb ^ za & xb)
}

pub fn random_state(n: usize, rng: &mut impl Rng) -> Vec<C64> {
    let mut v: Vec<C64> = (0..1usize << n)
        .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    let norm = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    v.iter_mut().for_each(|c| *c /= norm);
    v
}

pub fn deficit(a: &[C64], b: &[C64]) -> f64 {
    let na = a.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    let nb = b.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    let ip: C64 = a.iter().zip(b).map(|(u, v)| u.conj() * v).sum();
    1.0 - ip.norm() / (na * nb)
}

pub fn random_subset(rng: &mut impl Rng, pool: &[usize], min: usize) -> Vec<usize> {
    loop {
        let s: Vec<usize> = pool.iter().copied().filter(|_| rng.gen_bool(0.5)).collect();
        if s.len() >= min {
            return s;
        }
    }
}

pub fn random_circuit(n: usize, rng: &mut impl Rng) -> CliffordCircuit {
    let all: Vec<usize> = (0..n).collect();
    let mut cnots = BTreeSet::new();
    let mut czs = BTreeSet::new();
    for _ in 0..rng.gen_range(0..2 * n) {
        let a = rng.gen_range(0..n);
        let b = rng.gen_range(0..n);
        if a != b {
            cnots.insert((a, b));
            czs.insert((a.min(b), a.max(b)));
        }
    }
    CliffordCircuit {
        n_qubits: n,
        h_pre: random_subset(rng, &all, 0),
        cnots: cnots.into_iter().collect(),
        czs: czs.into_iter().collect(),
        s_layer: random_subset(rng, &all, 0),
        h_post: random_subset(rng, &all, 0),
    }
}

pub fn random_hamiltonian(n: usize, m: usize, scale: f64, rng: &mut impl Rng) -> Hamiltonian {
    let terms = (0..m).map(|_| {
        let x = rng.gen_range(0..1usize << n);
        let z = rng.gen_range(0..1usize << n);
        WeightedTerm::new(rng.gen_range(-scale..scale), pauli_from_masks(n, x, z)).unwrap()
    });
    Hamiltonian::from_terms(n, terms.collect::<Vec<_>>()).unwrap()
}

pub fn random_word(n: usize, len: usize, rng: &mut impl Rng) -> Vec<Gate> {
    (0..len)
        .map(|_| {
            let a = rng.gen_range(0..n);
            let b = (a + rng.gen_range(1..n.max(2))) % n;
            match rng.gen_range(0..if n == 1 { 2 } else { 4 }) {
                0 => Gate::H(a),
                1 => Gate::S(a),
                2 => Gate::Cnot { control: a, target: b },
                _ => Gate::Cz(a, b),
            }
        })
        .collect()
}

/// Up to `k` distinct mutually commuting strings: random Z strings
/// conjugated by `word`.
pub fn conjugated_z_strings(n: usize, k: usize, word: &[Gate], rng: &mut impl Rng) -> Vec<(usize, usize)> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for _ in 0..k {
        let (mut x, mut z) = (0, rng.gen_range(0..1usize << n));
        for &g in word {
            conjugate_bits(g, &mut x, &mut z);
        }
        if seen.insert((x, z)) {
            out.push((x, z));
        }
    }
    out
}

/// GF(2) rank of bit rows.
pub fn gf2_rank(mut rows: Vec<u128>) -> usize {
    let mut rank = 0;
    for bit in 0..128 {
        let Some(p) = (rank..rows.len()).find(|&r| rows[r] >> bit & 1 == 1) else {
            continue;
        };
        rows.swap(rank, p);
        for r in 0..rows.len() {
            if r != rank && rows[r] >> bit & 1 == 1 {
                rows[r] ^= rows[rank];
            }
        }
        rank += 1;
    }
    rank
}

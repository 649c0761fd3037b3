//! Dense state vector and amplitude kernels.
//!
//! Amplitude `k` belongs to the basis state whose qubit `q` is bit `q` of
//! `k`. Kernels split the index space into fixed-size pieces; a piece is
//! always processed the same way whether it runs on a worker thread or not,
//! so results do not depend on the thread count.

use std::f64::consts::FRAC_1_SQRT_2;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::ops::Range;
use std::path::Path;
use std::sync::atomic::{AtomicU64, Ordering};

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::circuit::{CliffordCircuit, Gate};
use crate::diagonalize::DiagonalGroup;
use crate::error::{Error, Result};
use crate::pauli::WeightedTerm;

pub type C64 = Complex64;

/// Hard limit so basis indices and masks fit in a `u64`.
pub const MAX_QUBITS: usize = 40;

/// States smaller than this run every kernel on the calling thread.
const PAR_MIN_DIM: usize = 1 << 14;
/// Index-range length handed to one task by the pair kernels.
const PIECE: usize = 1 << 12;
/// Block size (log2) of the diagonal kernels' per-block tables.
const DIAG_BLOCK_BITS: usize = 10;
/// Hadamards on qubits below this are applied inside contiguous blocks.
const H_BLOCK_BITS: usize = 12;
/// At most this many high qubits per gathered Hadamard pass.
const H_BATCH: usize = 6;
/// Contiguous run length (log2) of the gathered Hadamard tiles.
const H_TILE_BITS: usize = 4;

pub mod gates {
    use super::C64;
    use std::f64::consts::FRAC_1_SQRT_2;

    const O: C64 = C64::new(0.0, 0.0);
    const L: C64 = C64::new(1.0, 0.0);
    const R: C64 = C64::new(FRAC_1_SQRT_2, 0.0);

    pub const I: [[C64; 2]; 2] = [[L, O], [O, L]];
    pub const X: [[C64; 2]; 2] = [[O, L], [L, O]];
    pub const Y: [[C64; 2]; 2] = [[O, C64::new(0.0, -1.0)], [C64::new(0.0, 1.0), O]];
    pub const Z: [[C64; 2]; 2] = [[L, O], [O, C64::new(-1.0, 0.0)]];
    pub const H: [[C64; 2]; 2] = [[R, R], [R, C64::new(-FRAC_1_SQRT_2, 0.0)]];
    pub const S: [[C64; 2]; 2] = [[L, O], [O, C64::new(0.0, 1.0)]];
    pub const SDG: [[C64; 2]; 2] = [[L, O], [O, C64::new(0.0, -1.0)]];

    /// Local index `2 * b(q1) + b(q2)`; `q1` is the control.
    pub const CNOT: [[C64; 4]; 4] = [[L, O, O, O], [O, L, O, O], [O, O, O, L], [O, O, L, O]];
    pub const CZ: [[C64; 4]; 4] = [
        [L, O, O, O],
        [O, L, O, O],
        [O, O, L, O],
        [O, O, O, C64::new(-1.0, 0.0)],
    ];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kernel {
    SingleQubit,
    TwoQubit,
    BatchedCnot,
    PhaseLayer,
    DiagonalExp,
    PauliRotation,
    HadamardLayer,
}

const N_KERNELS: usize = 7;

/// Amplitude reads/writes and invocations per kernel.
#[derive(Debug, Default)]
pub struct KernelStats {
    reads: [AtomicU64; N_KERNELS],
    writes: [AtomicU64; N_KERNELS],
    calls: [AtomicU64; N_KERNELS],
}

impl KernelStats {
    pub fn reads(&self, k: Kernel) -> u64 {
        self.reads[k as usize].load(Ordering::Relaxed)
    }

    pub fn writes(&self, k: Kernel) -> u64 {
        self.writes[k as usize].load(Ordering::Relaxed)
    }

    pub fn calls(&self, k: Kernel) -> u64 {
        self.calls[k as usize].load(Ordering::Relaxed)
    }

    pub fn reset(&self) {
        for a in self.reads.iter().chain(&self.writes).chain(&self.calls) {
            a.store(0, Ordering::Relaxed);
        }
    }

    fn call(&self, k: Kernel) {
        self.calls[k as usize].fetch_add(1, Ordering::Relaxed);
    }

    fn touch(&self, k: Kernel, reads: usize, writes: usize) {
        self.reads[k as usize].fetch_add(reads as u64, Ordering::Relaxed);
        self.writes[k as usize].fetch_add(writes as u64, Ordering::Relaxed);
    }
}

#[derive(Clone, Copy)]
struct SendPtr(*mut C64);
unsafe impl Send for SendPtr {}
unsafe impl Sync for SendPtr {}

impl SendPtr {
    #[inline]
    unsafe fn at(self, i: usize) -> *mut C64 {
        self.0.add(i)
    }
}

#[inline]
fn insert_zero(k: usize, bit: usize) -> usize {
    let lo = k & ((1 << bit) - 1);
    ((k ^ lo) << 1) | lo
}

#[inline]
fn parity(x: u64) -> u64 {
    (x.count_ones() & 1) as u64
}

/// `i^e * a`
#[inline]
fn mul_i_pow(a: C64, e: u8) -> C64 {
    match e & 3 {
        0 => a,
        1 => C64::new(-a.im, a.re),
        2 => -a,
        _ => C64::new(a.im, -a.re),
    }
}

const I_POW: [C64; 4] = [
    C64::new(1.0, 0.0),
    C64::new(0.0, 1.0),
    C64::new(-1.0, 0.0),
    C64::new(0.0, -1.0),
];

const SIN_TAYLOR: [f64; 8] = [
    1.0,
    -1.0 / 6.0,
    1.0 / 120.0,
    -1.0 / 5040.0,
    1.0 / 362880.0,
    -1.0 / 39916800.0,
    1.0 / 6227020800.0,
    -1.0 / 1307674368000.0,
];
const COS_TAYLOR: [f64; 8] = [
    1.0,
    -1.0 / 2.0,
    1.0 / 24.0,
    -1.0 / 720.0,
    1.0 / 40320.0,
    -1.0 / 3628800.0,
    1.0 / 479001600.0,
    -1.0 / 87178291200.0,
];

/// `(sin x, cos x)` from the first `K` Taylor terms of each.
#[inline(always)]
fn sin_cos_taylor<const K: usize>(x: f64) -> (f64, f64) {
    let x2 = x * x;
    let mut s = SIN_TAYLOR[K - 1];
    let mut c = COS_TAYLOR[K - 1];
    for k in (0..K - 1).rev() {
        s = s * x2 + SIN_TAYLOR[k];
        c = c * x2 + COS_TAYLOR[k];
    }
    (x * s, c)
}

/// Multiplies `amps[k]` by `exp(-i dt theta[k])`. Short Taylor series are
/// used when every angle is known to be small: with 5 terms for
/// `|x| <= 0.1` and 8 terms for `|x| <= 0.5` the truncation error stays
/// below `3e-17`.
fn apply_phases(amps: &mut [C64], theta: &[f64], dt: f64, bound: f64) {
    fn run(amps: &mut [C64], theta: &[f64], dt: f64, f: impl Fn(f64) -> (f64, f64)) {
        for (a, &t) in amps.iter_mut().zip(theta) {
            let (s, c) = f(dt * t);
            *a = C64::new(a.re * c + a.im * s, a.im * c - a.re * s);
        }
    }
    if bound <= 0.1 {
        run(amps, theta, dt, sin_cos_taylor::<5>)
    } else if bound <= 0.5 {
        run(amps, theta, dt, sin_cos_taylor::<8>)
    } else {
        run(amps, theta, dt, f64::sin_cos)
    }
}

const fn parity_table() -> [u8; 1 << DIAG_BLOCK_BITS] {
    let mut t = [0u8; 1 << DIAG_BLOCK_BITS];
    let mut i = 0;
    while i < t.len() {
        t[i] = (i.count_ones() & 1) as u8;
        i += 1;
    }
    t
}

static PARITY: [u8; 1 << DIAG_BLOCK_BITS] = parity_table();

/// `c` if `odd == 0`, else `-c`.
#[inline]
fn signed(c: f64, odd: u64) -> f64 {
    f64::from_bits(c.to_bits() ^ (odd << 63))
}

fn unitary_check<const D: usize>(u: &[[C64; D]; D]) -> Result<()> {
    for i in 0..D {
        for j in 0..D {
            let mut acc = C64::new(0.0, 0.0);
            for k in 0..D {
                acc += u[k][i].conj() * u[k][j];
            }
            let expect = if i == j { 1.0 } else { 0.0 };
            if (acc - expect).norm() > 1e-10 {
                return Err(Error::InvalidInput("gate matrix is not unitary".into()));
            }
        }
    }
    Ok(())
}

pub struct StateVector {
    n_qubits: usize,
    amps: Vec<C64>,
    stats: KernelStats,
}

impl Clone for StateVector {
    fn clone(&self) -> Self {
        Self {
            n_qubits: self.n_qubits,
            amps: self.amps.clone(),
            stats: KernelStats::default(),
        }
    }
}

impl std::fmt::Debug for StateVector {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("StateVector")
            .field("n_qubits", &self.n_qubits)
            .finish_non_exhaustive()
    }
}

fn check_size(n_qubits: usize) -> Result<()> {
    if n_qubits > MAX_QUBITS {
        return Err(Error::TooManyQubits {
            n_qubits,
            limit: MAX_QUBITS,
        });
    }
    Ok(())
}

impl StateVector {
    /// `|0...0>`
    pub fn zero(n_qubits: usize) -> Result<Self> {
        Self::basis(n_qubits, 0)
    }

    pub fn basis(n_qubits: usize, index: usize) -> Result<Self> {
        check_size(n_qubits)?;
        let dim = 1usize << n_qubits;
        if index >= dim {
            return Err(Error::InvalidInput(format!(
                "basis index {index} out of range for {n_qubits} qubits"
            )));
        }
        let mut amps = vec![C64::new(0.0, 0.0); dim];
        amps[index] = C64::new(1.0, 0.0);
        Ok(Self::from_vec_unchecked(n_qubits, amps))
    }

    /// `|+...+>`
    pub fn plus(n_qubits: usize) -> Result<Self> {
        check_size(n_qubits)?;
        let dim = 1usize << n_qubits;
        let a = (dim as f64).sqrt().recip();
        Ok(Self::from_vec_unchecked(n_qubits, vec![C64::new(a, 0.0); dim]))
    }

    /// Normalized vector of iid complex Gaussian amplitudes.
    pub fn random(n_qubits: usize, seed: u64) -> Result<Self> {
        check_size(n_qubits)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let amps: Vec<C64> = (0..1usize << n_qubits)
            .map(|_| {
                C64::new(
                    StandardNormal.sample(&mut rng),
                    StandardNormal.sample(&mut rng),
                )
            })
            .collect();
        let mut s = Self::from_vec_unchecked(n_qubits, amps);
        let norm = s.norm();
        s.amps.iter_mut().for_each(|a| *a /= norm);
        Ok(s)
    }

    /// Takes amplitudes as given (no normalization); length must be `2^n`.
    pub fn from_amplitudes(amps: Vec<C64>) -> Result<Self> {
        let dim = amps.len();
        if !dim.is_power_of_two() {
            return Err(Error::InvalidInput(format!(
                "{dim} amplitudes is not a power of two"
            )));
        }
        let n = dim.trailing_zeros() as usize;
        check_size(n)?;
        Ok(Self::from_vec_unchecked(n, amps))
    }

    fn from_vec_unchecked(n_qubits: usize, amps: Vec<C64>) -> Self {
        Self {
            n_qubits,
            amps,
            stats: KernelStats::default(),
        }
    }

    #[inline]
    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn amplitudes_mut(&mut self) -> &mut [C64] {
        &mut self.amps
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amps
    }

    pub fn stats(&self) -> &KernelStats {
        &self.stats
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `<self|other>`
    pub fn inner(&self, other: &StateVector) -> Result<C64> {
        if self.n_qubits != other.n_qubits {
            return Err(Error::DimensionMismatch {
                left: self.n_qubits,
                right: other.n_qubits,
            });
        }
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// `|<self|other>|`
    pub fn fidelity(&self, other: &StateVector) -> Result<f64> {
        Ok(self.inner(other)?.norm())
    }

    /// Raw little-endian `(re, im)` f64 pairs in basis order.
    pub fn write_raw(&self, out: impl Write) -> Result<()> {
        let mut out = BufWriter::new(out);
        for a in &self.amps {
            out.write_all(&a.re.to_le_bytes())?;
            out.write_all(&a.im.to_le_bytes())?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn read_raw(input: impl Read) -> Result<Self> {
        let mut bytes = Vec::new();
        BufReader::new(input).read_to_end(&mut bytes)?;
        if bytes.len() % 16 != 0 {
            return Err(Error::InvalidInput(format!(
                "state dump of {} bytes is not a whole number of amplitudes",
                bytes.len()
            )));
        }
        let f = |c: &[u8]| f64::from_le_bytes(c.try_into().expect("8 bytes"));
        let amps = bytes
            .chunks_exact(16)
            .map(|c| C64::new(f(&c[..8]), f(&c[8..])))
            .collect();
        Self::from_amplitudes(amps)
    }

    pub fn dump(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        self.write_raw(file)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::read_raw(file)
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

    fn parallel(&self) -> bool {
        self.dim() >= PAR_MIN_DIM && rayon::current_num_threads() > 1
    }

    /// Runs `f` over `0..count` split into `PIECE`-sized ranges.
    fn for_pieces(&self, count: usize, f: impl Fn(Range<usize>) + Sync + Send) {
        let pieces = count.div_ceil(PIECE);
        let range = |p: usize| p * PIECE..((p + 1) * PIECE).min(count);
        if self.parallel() {
            (0..pieces).into_par_iter().for_each(|p| f(range(p)));
        } else {
            (0..pieces).for_each(|p| f(range(p)));
        }
    }

    pub fn apply_single_qubit(&mut self, u: &[[C64; 2]; 2], t: usize) -> Result<()> {
        self.check_qubit(t)?;
        unitary_check(u)?;
        self.stats.call(Kernel::SingleQubit);
        let u = *u;
        let ptr = SendPtr(self.amps.as_mut_ptr());
        let stats = &self.stats;
        self.for_pieces(self.amps.len() / 2, |r| {
            let len = r.len();
            for k in r {
                let i = insert_zero(k, t);
                let j = i | 1 << t;
                // SAFETY: (i, j) pairs are disjoint across k.
                unsafe {
                    let (a, b) = (*ptr.at(i), *ptr.at(j));
                    *ptr.at(i) = u[0][0] * a + u[0][1] * b;
                    *ptr.at(j) = u[1][0] * a + u[1][1] * b;
                }
            }
            stats.touch(Kernel::SingleQubit, 2 * len, 2 * len);
        });
        Ok(())
    }

    /// `u` acts on local index `2 * b(q1) + b(q2)`.
    pub fn apply_two_qubit(&mut self, u: &[[C64; 4]; 4], q1: usize, q2: usize) -> Result<()> {
        self.check_qubit(q1)?;
        self.check_qubit(q2)?;
        if q1 == q2 {
            return Err(Error::SameQubit(q1));
        }
        unitary_check(u)?;
        self.stats.call(Kernel::TwoQubit);
        let u = *u;
        let (lo, hi) = (q1.min(q2), q1.max(q2));
        let ptr = SendPtr(self.amps.as_mut_ptr());
        let stats = &self.stats;
        self.for_pieces(self.amps.len() / 4, |r| {
            let len = r.len();
            for k in r {
                let base = insert_zero(insert_zero(k, lo), hi);
                let idx = [base, base | 1 << q2, base | 1 << q1, base | 1 << q1 | 1 << q2];
                // SAFETY: each quadruple is owned by one k.
                unsafe {
                    let v = idx.map(|i| *ptr.at(i));
                    for (row, &i) in u.iter().zip(&idx) {
                        *ptr.at(i) = row[0] * v[0] + row[1] * v[1] + row[2] * v[2] + row[3] * v[3];
                    }
                }
            }
            stats.touch(Kernel::TwoQubit, 4 * len, 4 * len);
        });
        Ok(())
    }

    /// Every CNOT with control `c` and target in `targets`, in one pass: for
    /// each basis state with bit `c` set, swaps it with the state obtained by
    /// flipping all target bits.
    pub fn apply_batched_cnot(&mut self, c: usize, targets: &[usize]) -> Result<()> {
        self.check_qubit(c)?;
        let Some(&t0) = targets.iter().min() else {
            return Err(Error::InvalidInput("batched CNOT needs a target".into()));
        };
        let mut mask = 0usize;
        for &t in targets {
            self.check_qubit(t)?;
            if t == c {
                return Err(Error::SameQubit(c));
            }
            if mask >> t & 1 == 1 {
                return Err(Error::InvalidInput(format!("target {t} repeated")));
            }
            mask |= 1 << t;
        }
        self.stats.call(Kernel::BatchedCnot);
        let (lo, hi) = (c.min(t0), c.max(t0));
        let ptr = SendPtr(self.amps.as_mut_ptr());
        let stats = &self.stats;
        self.for_pieces(self.amps.len() / 4, |r| {
            let len = r.len();
            for k in r {
                let i = insert_zero(insert_zero(k, lo), hi) | 1 << c;
                let j = i ^ mask;
                // SAFETY: i has bit t0 clear, j has it set; pairs are disjoint.
                unsafe { std::ptr::swap(ptr.at(i), ptr.at(j)) };
            }
            stats.touch(Kernel::BatchedCnot, 2 * len, 2 * len);
        });
        Ok(())
    }

    /// Multiplies amplitude `b` by `i^{sum_{t in s} b_t} (-1)^{sum_{(a,c)} b_a b_c}`.
    pub fn apply_phase_layer(&mut self, s_targets: &[usize], cz_pairs: &[(usize, usize)]) -> Result<()> {
        self.phase_layer(s_targets, 1, cz_pairs)
    }

    /// Inverse of [`Self::apply_phase_layer`]: `S^dagger` on `s_targets`.
    pub fn apply_phase_layer_dagger(
        &mut self,
        s_targets: &[usize],
        cz_pairs: &[(usize, usize)],
    ) -> Result<()> {
        self.phase_layer(s_targets, 3, cz_pairs)
    }

    fn phase_layer(&mut self, s_targets: &[usize], s_pow: u8, cz_pairs: &[(usize, usize)]) -> Result<()> {
        let n = self.n_qubits;
        let mut s_count = vec![0u8; n];
        for &t in s_targets {
            self.check_qubit(t)?;
            s_count[t] = (s_count[t] + s_pow) & 3;
        }
        // upper[a]: partners b > a, as an upper-triangular adjacency with
        // repeated pairs cancelling.
        let mut partner = vec![0u64; n];
        for &(a, b) in cz_pairs {
            self.check_qubit(a)?;
            self.check_qubit(b)?;
            if a == b {
                return Err(Error::SameQubit(a));
            }
            partner[a] ^= 1 << b;
            partner[b] ^= 1 << a;
        }
        self.stats.call(Kernel::PhaseLayer);
        if s_count.iter().all(|&c| c == 0) && partner.iter().all(|&p| p == 0) {
            return Ok(());
        }

        let lb = n.min(DIAG_BLOCK_BITS);
        let low_mask = (1u64 << lb) - 1;
        let exponent = |x: u64| -> u8 {
            let mut e = 0u32;
            let mut quad = 0u64;
            let mut rest = x;
            while rest != 0 {
                let a = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                e += s_count[a] as u32;
                // Each pair is counted from its lower member only.
                quad ^= parity(partner[a] & x & !((2u64 << a) - 1));
            }
            ((e + 2 * quad as u32) & 3) as u8
        };
        // Built from the highest set bit down: adding qubit `a` to `rest`
        // contributes its S power and the CZ pairs it forms with `rest`.
        let mut table = vec![0u8; 1 << lb];
        for lo in 1..table.len() {
            let a = lo.ilog2() as usize;
            let rest = lo ^ 1 << a;
            let pairs = PARITY[(partner[a] as usize) & rest];
            table[lo] = (table[rest] + s_count[a] + 2 * pairs) & 3;
        }
        let block = 1usize << lb;
        let stats = &self.stats;
        let work = |(h, chunk): (usize, &mut [C64])| {
            let hi = (h as u64) << lb;
            let e_hi = exponent(hi);
            let mut cross = 0usize;
            let mut rest = hi;
            while rest != 0 {
                let a = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                cross ^= (partner[a] & low_mask) as usize;
            }
            for (lo, (a, &t)) in chunk.iter_mut().zip(&table).enumerate() {
                let e = t + e_hi + 2 * PARITY[lo & cross & (PARITY.len() - 1)];
                *a *= I_POW[(e & 3) as usize];
            }
            stats.touch(Kernel::PhaseLayer, chunk.len(), chunk.len());
        };
        if self.dim() >= PAR_MIN_DIM && rayon::current_num_threads() > 1 {
            self.amps.par_chunks_mut(block).enumerate().for_each(work);
        } else {
            self.amps.chunks_mut(block).enumerate().for_each(work);
        }
        Ok(())
    }

    /// Multiplies amplitude `b` by `exp(-i dt sum_k s_k (-1)^{|z_k & b|})`
    /// in a single pass over the state.
    ///
    /// The phase angles are produced block by block: amplitudes are split
    /// into contiguous blocks of `2^L`, and within a block the angle is a
    /// Walsh-Hadamard transform over the low `L` bits of the terms'
    /// coefficients, each signed by its high bits. Small groups sum the terms
    /// directly instead.
    pub fn apply_diagonal_exp(&mut self, d: &DiagonalGroup, dt: f64) -> Result<()> {
        if !dt.is_finite() {
            return Err(Error::InvalidInput(format!("time step {dt} is not finite")));
        }
        if d.n_qubits != self.n_qubits {
            return Err(Error::DimensionMismatch {
                left: self.n_qubits,
                right: d.n_qubits,
            });
        }
        let masks: Vec<u64> = d
            .z_masks
            .iter()
            .map(|m| m.to_u64().expect("state size bounds the mask width"))
            .collect();
        self.diagonal_exp_masks(&masks, &d.signed_coeffs, dt);
        Ok(())
    }

    pub(crate) fn diagonal_exp_masks(&mut self, masks: &[u64], coeffs: &[f64], dt: f64) {
        self.stats.call(Kernel::DiagonalExp);
        let lb = self.n_qubits.min(DIAG_BLOCK_BITS);
        let block = 1usize << lb;
        let low_mask = (1u64 << lb) - 1;
        let direct = masks.len() <= 2;
        let bound = dt.abs() * coeffs.iter().map(|c| c.abs()).sum::<f64>();
        let stats = &self.stats;
        let work = |scratch: &mut Vec<f64>, (h, chunk): (usize, &mut [C64])| {
            let hi = (h as u64) << lb;
            scratch.clear();
            if direct {
                scratch.extend((0..chunk.len() as u64).map(|lo| {
                    let b = hi | lo;
                    let mut theta = 0.0;
                    for (&m, &c) in masks.iter().zip(coeffs) {
                        theta += signed(c, parity(m & b));
                    }
                    theta
                }));
            } else {
                scratch.resize(block, 0.0);
                for (&m, &c) in masks.iter().zip(coeffs) {
                    scratch[(m & low_mask) as usize] += signed(c, parity(m & hi));
                }
                walsh_hadamard(scratch);
            }
            apply_phases(chunk, scratch, dt, bound);
            stats.touch(Kernel::DiagonalExp, chunk.len(), chunk.len());
        };
        if self.dim() >= PAR_MIN_DIM && rayon::current_num_threads() > 1 {
            self.amps
                .par_chunks_mut(block)
                .enumerate()
                .for_each_init(Vec::new, work);
        } else {
            let mut scratch = Vec::new();
            self.amps
                .chunks_mut(block)
                .enumerate()
                .for_each(|item| work(&mut scratch, item));
        }
    }

    /// `exp(-i c dt P)` for one weighted Pauli term.
    pub fn apply_pauli_rotation(&mut self, term: &WeightedTerm, dt: f64) -> Result<()> {
        if term.pauli.num_qubits() != self.n_qubits {
            return Err(Error::DimensionMismatch {
                left: self.n_qubits,
                right: term.pauli.num_qubits(),
            });
        }
        if !dt.is_finite() {
            return Err(Error::InvalidInput(format!("time step {dt} is not finite")));
        }
        self.stats.call(Kernel::PauliRotation);
        let x = term.pauli.x().to_u64().expect("bounded width") as usize;
        let z = term.pauli.z().to_u64().expect("bounded width");
        let (s, c) = (term.coeff * dt).sin_cos();
        let stats = &self.stats;
        if x == 0 {
            let work = |(p, chunk): (usize, &mut [C64])| {
                let base = (p * PIECE) as u64;
                for (k, a) in chunk.iter_mut().enumerate() {
                    *a *= C64::new(c, -signed(s, parity(z & (base + k as u64))));
                }
                stats.touch(Kernel::PauliRotation, chunk.len(), chunk.len());
            };
            if self.parallel() {
                self.amps.par_chunks_mut(PIECE).enumerate().for_each(work);
            } else {
                self.amps.chunks_mut(PIECE).enumerate().for_each(work);
            }
            return Ok(());
        }
        // P|b> = i^y (-1)^{z.b} |b ^ x>, so the new amplitude at i is
        // c a_i - i s i^y (-1)^{z.j} a_j with j = i ^ x.
        let w = mul_i_pow(C64::new(s, 0.0), (3 + term.pauli.phase_exp()) & 3);
        let p = x.trailing_zeros() as usize;
        let ptr = SendPtr(self.amps.as_mut_ptr());
        self.for_pieces(self.amps.len() / 2, |r| {
            let len = r.len();
            for k in r {
                let i = insert_zero(k, p);
                let j = i ^ x;
                let wi = w * signed(1.0, parity(z & j as u64));
                let wj = w * signed(1.0, parity(z & i as u64));
                // SAFETY: i has bit p clear and j has it set; pairs are disjoint.
                unsafe {
                    let (a, b) = (*ptr.at(i), *ptr.at(j));
                    *ptr.at(i) = a * c + wi * b;
                    *ptr.at(j) = b * c + wj * a;
                }
            }
            stats.touch(Kernel::PauliRotation, 2 * len, 2 * len);
        });
        Ok(())
    }

    /// Hadamard on each qubit of `qubits` (a set), in few passes: one pass for
    /// all qubits below the block size, and one gathered pass per batch of
    /// higher qubits.
    pub fn apply_h_layer(&mut self, qubits: &[usize]) -> Result<()> {
        let mut qs = qubits.to_vec();
        qs.sort_unstable();
        for &q in &qs {
            self.check_qubit(q)?;
        }
        if qs.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidInput("Hadamard layer repeats a qubit".into()));
        }
        if qs.is_empty() {
            return Ok(());
        }
        self.stats.call(Kernel::HadamardLayer);
        let hb = self.n_qubits.min(H_BLOCK_BITS);
        let split = qs.partition_point(|&q| q < hb);
        let (low, high) = qs.split_at(split);
        if !low.is_empty() {
            self.h_low(low, hb);
        }
        for batch in high.chunks(H_BATCH) {
            self.h_gathered(batch);
        }
        Ok(())
    }

    fn h_low(&mut self, low: &[usize], hb: usize) {
        let stats = &self.stats;
        // Butterflies are left unnormalized except for the last qubit,
        // which applies the whole layer's factor.
        let scale = FRAC_1_SQRT_2.powi(low.len() as i32);
        let work = |chunk: &mut [C64]| {
            for (i, &q) in low.iter().enumerate() {
                let f = if i + 1 == low.len() { scale } else { 1.0 };
                let stride = 1 << q;
                if stride == 1 {
                    for pair in chunk.chunks_exact_mut(2) {
                        let (u, v) = (pair[0], pair[1]);
                        pair[0] = (u + v) * f;
                        pair[1] = (u - v) * f;
                    }
                    continue;
                }
                for pair in chunk.chunks_exact_mut(2 * stride) {
                    let (a, b) = pair.split_at_mut(stride);
                    for (x, y) in a.iter_mut().zip(b.iter_mut()) {
                        let (u, v) = (*x, *y);
                        *x = (u + v) * f;
                        *y = (u - v) * f;
                    }
                }
            }
            stats.touch(Kernel::HadamardLayer, chunk.len(), chunk.len());
        };
        if self.parallel() {
            self.amps.par_chunks_mut(1 << hb).for_each(work);
        } else {
            self.amps.chunks_mut(1 << hb).for_each(work);
        }
    }

    /// `batch` qubits are all at or above `H_TILE_BITS`. Each tile gathers
    /// the `2^k` rows of `2^H_TILE_BITS` contiguous amplitudes that differ
    /// only in the batch bits, transforms, and scatters back.
    fn h_gathered(&mut self, batch: &[usize]) {
        let k = batch.len();
        let rows = 1usize << k;
        let width = 1usize << H_TILE_BITS;
        let offsets: Vec<usize> = (0..rows)
            .map(|r| {
                batch
                    .iter()
                    .enumerate()
                    .filter(|&(bit, _)| r >> bit & 1 == 1)
                    .map(|(_, &q)| 1 << q)
                    .sum()
            })
            .collect();
        let tiles = self.dim() >> (k + H_TILE_BITS);
        let ptr = SendPtr(self.amps.as_mut_ptr());
        let stats = &self.stats;
        let scale = FRAC_1_SQRT_2.powi(k as i32);
        let work = |buf: &mut Vec<C64>, t: usize| {
            let mut base = t << H_TILE_BITS;
            for &q in batch {
                base = insert_zero(base, q);
            }
            buf.clear();
            for &off in &offsets {
                // SAFETY: tiles partition the index space.
                unsafe {
                    let src = std::slice::from_raw_parts(ptr.at(base + off), width);
                    buf.extend_from_slice(src);
                }
            }
            let mut h = width;
            while h < buf.len() {
                for pair in buf.chunks_exact_mut(2 * h) {
                    let (a, b) = pair.split_at_mut(h);
                    for (x, y) in a.iter_mut().zip(b.iter_mut()) {
                        let (u, v) = (*x, *y);
                        *x = u + v;
                        *y = u - v;
                    }
                }
                h *= 2;
            }
            for (r, &off) in offsets.iter().enumerate() {
                for (w, v) in buf[r * width..(r + 1) * width].iter().enumerate() {
                    // SAFETY: as above.
                    unsafe { *ptr.at(base + off + w) = *v * scale };
                }
            }
            stats.touch(Kernel::HadamardLayer, rows * width, rows * width);
        };
        if self.parallel() {
            (0..tiles).into_par_iter().for_each_init(Vec::new, work);
        } else {
            let mut buf = Vec::new();
            (0..tiles).for_each(|t| work(&mut buf, t));
        }
    }

    /// Applies one gate with the generic matrix kernels.
    pub fn apply_gate(&mut self, g: Gate) -> Result<()> {
        match g {
            Gate::H(q) => self.apply_single_qubit(&gates::H, q),
            Gate::S(q) => self.apply_single_qubit(&gates::S, q),
            Gate::Sdg(q) => self.apply_single_qubit(&gates::SDG, q),
            Gate::Cnot { control, target } => self.apply_two_qubit(&gates::CNOT, control, target),
            Gate::Cz(a, b) => self.apply_two_qubit(&gates::CZ, a, b),
        }
    }

    fn check_circuit(&self, c: &CliffordCircuit) -> Result<()> {
        if c.n_qubits != self.n_qubits {
            return Err(Error::DimensionMismatch {
                left: self.n_qubits,
                right: c.n_qubits,
            });
        }
        c.validate()
    }

    /// Layer by layer: H layer, one batched CNOT per control, one phase layer
    /// for all CZ and S gates, H layer.
    pub fn apply_clifford(&mut self, c: &CliffordCircuit) -> Result<()> {
        self.check_circuit(c)?;
        self.apply_h_layer(&c.h_pre)?;
        for (control, targets) in c.cnot_batches() {
            self.apply_batched_cnot(control, &targets)?;
        }
        if !c.czs.is_empty() || !c.s_layer.is_empty() {
            self.apply_phase_layer(&c.s_layer, &c.czs)?;
        }
        self.apply_h_layer(&c.h_post)
    }

    pub fn apply_clifford_inverse(&mut self, c: &CliffordCircuit) -> Result<()> {
        self.check_circuit(c)?;
        self.apply_h_layer(&c.h_post)?;
        if !c.czs.is_empty() || !c.s_layer.is_empty() {
            self.apply_phase_layer_dagger(&c.s_layer, &c.czs)?;
        }
        for (control, targets) in c.cnot_batches().into_iter().rev() {
            self.apply_batched_cnot(control, &targets)?;
        }
        self.apply_h_layer(&c.h_pre)
    }
}

/// In-place unnormalized Walsh-Hadamard transform; length a power of two.
fn walsh_hadamard(v: &mut [f64]) {
    let mut h = 1;
    while h < v.len() {
        for pair in v.chunks_exact_mut(2 * h) {
            let (a, b) = pair.split_at_mut(h);
            for (x, y) in a.iter_mut().zip(b.iter_mut()) {
                let (u, w) = (*x, *y);
                *x = u + w;
                *y = u - w;
            }
        }
        h *= 2;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::BitString;
    use std::f64::consts::PI;

    fn close(a: C64, b: C64) -> bool {
        (a - b).norm() < 1e-12
    }

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn h_on_zero() {
        let mut s = StateVector::zero(1).unwrap();
        s.apply_single_qubit(&gates::H, 0).unwrap();
        assert!(close(s.amplitudes()[0], c(FRAC_1_SQRT_2, 0.0)));
        assert!(close(s.amplitudes()[1], c(FRAC_1_SQRT_2, 0.0)));
    }

    #[test]
    fn x_on_qubit_one() {
        // Text |10> is basis index 1; X on qubit 1 gives |11>, index 3.
        let mut s = StateVector::basis(2, 1).unwrap();
        s.apply_single_qubit(&gates::X, 1).unwrap();
        assert!(close(s.amplitudes()[3], c(1.0, 0.0)));
    }

    #[test]
    fn z_flips_sign() {
        let mut s = StateVector::from_amplitudes(vec![c(0.6, 0.0), c(0.0, 0.8)]).unwrap();
        s.apply_single_qubit(&gates::Z, 0).unwrap();
        assert!(close(s.amplitudes()[1], c(0.0, -0.8)));
    }

    #[test]
    fn non_unitary_rejected() {
        let mut s = StateVector::zero(1).unwrap();
        let bad = [[c(1.0, 0.0), c(1.0, 0.0)], [c(0.0, 0.0), c(1.0, 0.0)]];
        assert!(s.apply_single_qubit(&bad, 0).is_err());
        assert!(s.apply_single_qubit(&gates::X, 1).is_err());
    }

    #[test]
    fn two_qubit_examples() {
        let mut s = StateVector::basis(2, 1).unwrap();
        s.apply_two_qubit(&gates::CNOT, 0, 1).unwrap();
        assert!(close(s.amplitudes()[3], c(1.0, 0.0)));

        let mut s = StateVector::basis(2, 3).unwrap();
        s.apply_two_qubit(&gates::CZ, 0, 1).unwrap();
        assert!(close(s.amplitudes()[3], c(-1.0, 0.0)));

        let mut s = StateVector::random(3, 1).unwrap();
        let before = s.clone();
        let mut id = [[c(0.0, 0.0); 4]; 4];
        for (k, row) in id.iter_mut().enumerate() {
            row[k] = c(1.0, 0.0);
        }
        s.apply_two_qubit(&id, 2, 0).unwrap();
        assert_eq!(s.amplitudes(), before.amplitudes());
        assert!(s.apply_two_qubit(&id, 1, 1).is_err());
    }

    #[test]
    fn batched_cnot_examples() {
        // n=3, control 0, targets {1,2}: |100> (index 1) <-> |111> (index 7).
        let mut s = StateVector::basis(3, 1).unwrap();
        s.apply_batched_cnot(0, &[1, 2]).unwrap();
        assert!(close(s.amplitudes()[7], c(1.0, 0.0)));
        // Control clear: untouched.
        let mut s = StateVector::basis(3, 6).unwrap();
        s.apply_batched_cnot(0, &[1, 2]).unwrap();
        assert!(close(s.amplitudes()[6], c(1.0, 0.0)));
        assert!(s.apply_batched_cnot(0, &[0]).is_err());
        assert!(s.apply_batched_cnot(0, &[]).is_err());
    }

    #[test]
    fn phase_layer_examples() {
        let mut s = StateVector::basis(1, 1).unwrap();
        s.apply_phase_layer(&[0], &[]).unwrap();
        assert!(close(s.amplitudes()[1], c(0.0, 1.0)));

        let mut s = StateVector::plus(2).unwrap();
        s.apply_phase_layer(&[], &[(0, 1)]).unwrap();
        assert!(close(s.amplitudes()[3], c(-0.5, 0.0)));
        assert!(close(s.amplitudes()[1], c(0.5, 0.0)));

        let mut s = StateVector::basis(2, 3).unwrap();
        s.apply_phase_layer(&[0, 1], &[]).unwrap();
        assert!(close(s.amplitudes()[3], c(-1.0, 0.0)));
    }

    #[test]
    fn diagonal_exp_examples() {
        let z = BitString::from_u64(1, 1);
        let d = DiagonalGroup::from_diagonal(0, 1, vec![z], vec![1.0]).unwrap();
        let mut s = StateVector::plus(1).unwrap();
        s.apply_diagonal_exp(&d, 0.01).unwrap();
        let a = FRAC_1_SQRT_2;
        assert!(close(s.amplitudes()[0], C64::from_polar(a, -0.01)));
        assert!(close(s.amplitudes()[1], C64::from_polar(a, 0.01)));

        let d = DiagonalGroup::from_diagonal(0, 2, vec![BitString::zeros(2)], vec![0.7]).unwrap();
        let mut s = StateVector::random(2, 3).unwrap();
        let before = s.clone();
        s.apply_diagonal_exp(&d, 0.5).unwrap();
        for (x, y) in s.amplitudes().iter().zip(before.amplitudes()) {
            assert!(close(*x, y * C64::from_polar(1.0, -0.35)));
        }
        assert!(s.apply_diagonal_exp(&d, f64::NAN).is_err());
    }

    #[test]
    fn pauli_rotation_examples() {
        let theta = 0.3;
        let mut s = StateVector::zero(1).unwrap();
        s.apply_pauli_rotation(&WeightedTerm::new(1.0, "X".parse().unwrap()).unwrap(), theta)
            .unwrap();
        assert!(close(s.amplitudes()[0], c(theta.cos(), 0.0)));
        assert!(close(s.amplitudes()[1], c(0.0, -theta.sin())));

        let mut s = StateVector::plus(1).unwrap();
        s.apply_pauli_rotation(&WeightedTerm::new(1.0, "Z".parse().unwrap()).unwrap(), PI)
            .unwrap();
        assert!(close(s.amplitudes()[0], c(-FRAC_1_SQRT_2, 0.0)));
        assert!(close(s.amplitudes()[1], c(-FRAC_1_SQRT_2, 0.0)));
    }

    #[test]
    fn h_layer_matches_single_gates() {
        for n in [1, 3, 13, 15] {
            let qs: Vec<usize> = (0..n).filter(|q| q % 2 == 0 || *q >= 12).collect();
            let mut a = StateVector::random(n, 7).unwrap();
            let mut b = a.clone();
            a.apply_h_layer(&qs).unwrap();
            for &q in &qs {
                b.apply_single_qubit(&gates::H, q).unwrap();
            }
            for (x, y) in a.amplitudes().iter().zip(b.amplitudes()) {
                assert!((x - y).norm() < 1e-12, "n={n}");
            }
        }
    }

    #[test]
    fn uniform_superposition() {
        let mut s = StateVector::zero(4).unwrap();
        let mut circ = CliffordCircuit::identity(4);
        circ.h_pre = vec![0, 1, 2, 3];
        s.apply_clifford(&circ).unwrap();
        for a in s.amplitudes() {
            assert!(close(*a, c(0.25, 0.0)));
        }
    }

    #[test]
    fn fidelity_and_norm() {
        let a = StateVector::random(3, 11).unwrap();
        assert!((a.fidelity(&a).unwrap() - 1.0).abs() < 1e-12);
        assert!((a.norm() - 1.0).abs() < 1e-12);
        let z = StateVector::basis(1, 0).unwrap();
        let o = StateVector::basis(1, 1).unwrap();
        assert_eq!(z.fidelity(&o).unwrap(), 0.0);
        assert!(a.fidelity(&z).is_err());
    }

    #[test]
    fn raw_round_trip() {
        let a = StateVector::random(3, 5).unwrap();
        let mut buf = Vec::new();
        a.write_raw(&mut buf).unwrap();
        assert_eq!(buf.len(), 8 * 16);
        let b = StateVector::read_raw(&buf[..]).unwrap();
        assert_eq!(a.amplitudes(), b.amplitudes());
        assert!(StateVector::read_raw(&buf[..40]).is_err());
    }

    #[test]
    fn diagonal_counters_one_pass() {
        let masks: Vec<BitString> = (0..40u64).map(|m| BitString::from_u64(12, m * 97 % 4096)).collect();
        let coeffs = vec![0.1; 40];
        let d = DiagonalGroup::from_diagonal(0, 12, masks, coeffs).unwrap();
        let mut s = StateVector::random(12, 1).unwrap();
        s.apply_diagonal_exp(&d, 0.1).unwrap();
        assert_eq!(s.stats().reads(Kernel::DiagonalExp), 4096);
        assert_eq!(s.stats().writes(Kernel::DiagonalExp), 4096);
    }
}

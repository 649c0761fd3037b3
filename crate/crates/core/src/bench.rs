//! Timing of single Trotter steps.

use std::time::Instant;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::evolution::{baseline_step, group_major_terms, grouped_step, GroupedHamiltonian, Method, TermOrder};
use crate::hamiltonian::{partition_stats, Hamiltonian};
use crate::statevec::StateVector;

pub const WARMUP_STEPS: usize = 3;
pub const MIN_REPEATS: usize = 5;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRecord {
    pub model: String,
    pub n_qubits: usize,
    pub m: usize,
    pub n_g: usize,
    pub method: Method,
    pub term_order: TermOrder,
    pub n_steps: usize,
    /// Median seconds per Trotter step.
    pub wall_time_per_step: f64,
    /// Input-order baseline time over this record's time.
    pub speedup_vs_baseline: f64,
    /// `m / (n * n_g)`
    pub predicted_speedup: f64,
    pub worker_count: usize,
}

impl BenchRecord {
    pub const CSV_HEADER: &'static str = "model,n_qubits,m,n_g,method,term_order,n_steps,wall_time_per_step,speedup_vs_baseline,predicted_speedup,worker_count";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{:.6e},{:.4},{:.4},{}",
            self.model,
            self.n_qubits,
            self.m,
            self.n_g,
            self.method,
            self.term_order,
            self.n_steps,
            self.wall_time_per_step,
            self.speedup_vs_baseline,
            self.predicted_speedup,
            self.worker_count
        )
    }
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    let k = xs.len();
    if k % 2 == 1 {
        xs[k / 2]
    } else {
        0.5 * (xs[k / 2 - 1] + xs[k / 2])
    }
}

fn time_steps(repeats: usize, mut step: impl FnMut() -> Result<()>) -> Result<f64> {
    for _ in 0..WARMUP_STEPS {
        step()?;
    }
    let mut times = Vec::with_capacity(repeats);
    for _ in 0..repeats {
        let start = Instant::now();
        step()?;
        times.push(start.elapsed().as_secs_f64());
    }
    Ok(median(times))
}

/// Benchmarks the input-order baseline, the group-major baseline and the
/// grouped method on the same random initial state. `repeats` is raised to
/// [`MIN_REPEATS`] if lower.
pub fn bench_hamiltonian(
    model: &str,
    h: &Hamiltonian,
    repeats: usize,
    dt: f64,
    seed: u64,
) -> Result<Vec<BenchRecord>> {
    if h.is_empty() {
        return Err(Error::InvalidInput("empty Hamiltonian".into()));
    }
    let repeats = repeats.max(MIN_REPEATS);
    let n = h.n_qubits();
    let grouped = GroupedHamiltonian::build(h)?;
    let stats = partition_stats(&grouped.groups, n);
    let psi0 = StateVector::random(n, seed)?;

    let mut psi = psi0.clone();
    let t_input = time_steps(repeats, || baseline_step(h.terms(), &mut psi, dt))?;
    let gm = group_major_terms(h);
    let mut psi = psi0.clone();
    let t_major = time_steps(repeats, || baseline_step(&gm, &mut psi, dt))?;
    let mut psi = psi0;
    let t_grouped = time_steps(repeats, || grouped_step(&grouped.diagonal, &mut psi, dt))?;

    let record = |method, term_order, t: f64| BenchRecord {
        model: model.to_string(),
        n_qubits: n,
        m: h.len(),
        n_g: stats.n_groups,
        method,
        term_order,
        n_steps: 1,
        wall_time_per_step: t,
        speedup_vs_baseline: t_input / t,
        predicted_speedup: stats.predicted_speedup,
        worker_count: rayon::current_num_threads(),
    };
    Ok(vec![
        record(Method::Baseline, TermOrder::Input, t_input),
        record(Method::Baseline, TermOrder::GroupMajor, t_major),
        record(Method::Grouped, TermOrder::GroupMajor, t_grouped),
    ])
}

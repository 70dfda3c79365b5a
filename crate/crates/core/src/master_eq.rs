//! Lindblad master equation: density matrices, the generator, and RK4 time stepping.

use nalgebra::SymmetricEigen;

use crate::entanglement::{bell_fidelity, concurrence, project_to_qubits, Bell};
use crate::error::{Error, Result};
use crate::hilbert::{CMatrix, CVector, HilbertSpec, C64, ZERO};
use crate::model::ModelOperators;

/// Density operator on the two-mode space.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    pub entries: CMatrix,
    pub spec: HilbertSpec,
}

impl DensityMatrix {
    pub fn from_entries(entries: CMatrix, spec: HilbertSpec) -> Result<Self> {
        let n = spec.total();
        if entries.nrows() != n || entries.ncols() != n {
            return Err(Error::Shape {
                expected: n,
                rows: entries.nrows(),
                cols: entries.ncols(),
            });
        }
        Ok(Self { entries, spec })
    }

    /// `|ψ⟩⟨ψ|` after normalizing `ψ`.
    pub fn from_pure(psi: &CVector, spec: HilbertSpec) -> Result<Self> {
        let norm = psi.norm();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::Parameter("state vector has zero or non-finite norm".into()));
        }
        let psi = psi / C64::from(norm);
        Self::from_entries(&psi * psi.adjoint(), spec)
    }

    pub fn maximally_mixed(spec: HilbertSpec) -> Self {
        let n = spec.total();
        Self {
            entries: CMatrix::identity(n, n) / C64::from(n as f64),
            spec,
        }
    }

    pub fn trace(&self) -> f64 {
        self.entries.trace().re
    }

    pub fn purity(&self) -> f64 {
        // tr(ρ²) = Σ|ρ_ij|² for Hermitian ρ
        self.entries.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn hermiticity_error(&self) -> f64 {
        let n = self.entries.nrows();
        let mut worst: f64 = 0.0;
        for j in 0..n {
            for i in 0..=j {
                let d = self.entries[(i, j)] - self.entries[(j, i)].conj();
                worst = worst.max(d.norm());
            }
        }
        worst
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let herm = (&self.entries + self.entries.adjoint()) * C64::from(0.5);
        SymmetricEigen::new(herm)
            .eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    /// Checks Hermiticity, unit trace, and positivity.
    pub fn validate(&self) -> Result<()> {
        let herm = self.hermiticity_error();
        if herm > 1e-9 {
            return Err(Error::Parameter(format!("density matrix not Hermitian ({herm:.3e})")));
        }
        let tr = self.trace();
        if (tr - 1.0).abs() > 1e-8 {
            return Err(Error::Parameter(format!("density matrix trace {tr} != 1")));
        }
        let min_eig = self.min_eigenvalue();
        if min_eig < -1e-9 {
            return Err(Error::Parameter(format!(
                "density matrix has negative eigenvalue {min_eig:.3e}"
            )));
        }
        Ok(())
    }

    /// Population of Fock level `n` of `mode a` (`a = true`) or mode b.
    fn level_population(&self, mode_a: bool, level: usize) -> f64 {
        let (da, db) = (self.spec.dim_a, self.spec.dim_b);
        if mode_a {
            (0..db).map(|nb| self.entries[(level * db + nb, level * db + nb)].re).sum()
        } else {
            (0..da).map(|na| self.entries[(na * db + level, na * db + level)].re).sum()
        }
    }

    pub fn mean_photons(&self) -> (f64, f64) {
        let db = self.spec.dim_b;
        let mut na = 0.0;
        let mut nb = 0.0;
        for k in 0..self.spec.total() {
            let p = self.entries[(k, k)].re;
            na += (k / db) as f64 * p;
            nb += (k % db) as f64 * p;
        }
        (na, nb)
    }

    /// Populations of the highest retained Fock level of each mode.
    pub fn top_level_populations(&self) -> (f64, f64) {
        (
            self.level_population(true, self.spec.dim_a - 1),
            self.level_population(false, self.spec.dim_b - 1),
        )
    }

    fn hermitize_in_place(&mut self) {
        let n = self.entries.nrows();
        let m = self.entries.as_mut_slice();
        for j in 0..n {
            m[j + j * n].im = 0.0;
            for i in 0..j {
                let avg = (m[i + j * n] + m[j + i * n].conj()) * 0.5;
                m[i + j * n] = avg;
                m[j + i * n] = avg.conj();
            }
        }
    }

    fn all_finite(&self) -> bool {
        self.entries.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

/// Row-compressed operator; the Lindblad operators here have at most a
/// handful of nonzeros per row.
#[derive(Debug, Clone)]
struct SparseRows {
    rows: Vec<Vec<(usize, C64)>>,
}

impl SparseRows {
    fn from_dense(m: &CMatrix) -> Self {
        let rows = (0..m.nrows())
            .map(|i| {
                (0..m.ncols())
                    .filter(|&j| m[(i, j)] != ZERO)
                    .map(|j| (j, m[(i, j)]))
                    .collect()
            })
            .collect();
        Self { rows }
    }
}

/// Real operator with at most one nonzero per row, stored as
/// `(row, source column, coefficient)`. Reservoir ladder operators have this form.
#[derive(Debug, Clone)]
struct LadderOp {
    entries: Vec<(usize, usize, f64)>,
}

impl LadderOp {
    fn from_sparse(m: &SparseRows) -> Option<Self> {
        let mut entries = Vec::new();
        for (i, row) in m.rows.iter().enumerate() {
            match row.as_slice() {
                [] => {}
                [(j, c)] if c.im == 0.0 => entries.push((i, *j, c.re)),
                _ => return None,
            }
        }
        Some(Self { entries })
    }
}

#[derive(Debug, Clone)]
enum JumpOp {
    Ladder(LadderOp),
    General(SparseRows),
}

/// Precomputed Lindblad generator of a model.
///
/// Writes `dρ/dt = −i H_eff ρ + i ρ H_eff† + Σ C ρ C†` with
/// `H_eff = H − (i/2) Σ C†C`. For Hermitian `ρ`, `H_eff ρ = (ρ H_eff†)†`, so
/// only one sparse product is needed for the coherent part.
#[derive(Debug, Clone)]
pub struct Generator {
    n: usize,
    /// Off-diagonal part of `H_eff`.
    h_eff: SparseRows,
    /// Diagonal of `H_eff` folded into `i(conj(d_c) − d_r)`, column-major.
    diag_factor: Vec<C64>,
    jumps: Vec<JumpOp>,
}

impl Generator {
    pub fn new(model: &ModelOperators) -> Self {
        let n = model.spec.total();
        let mut h_eff = model.hamiltonian.entries.clone();
        for c in &model.collapse_ops {
            let cdc = c.op.entries.adjoint() * &c.op.entries;
            h_eff -= cdc * C64::new(0.0, 0.5);
        }
        let d: Vec<C64> = (0..n).map(|k| h_eff[(k, k)]).collect();
        let i = C64::new(0.0, 1.0);
        let mut diag_factor = vec![ZERO; n * n];
        for c in 0..n {
            for r in 0..n {
                diag_factor[r + c * n] = i * (d[c].conj() - d[r]);
            }
        }
        for k in 0..n {
            h_eff[(k, k)] = ZERO;
        }
        Self {
            n,
            h_eff: SparseRows::from_dense(&h_eff),
            diag_factor,
            jumps: model
                .collapse_ops
                .iter()
                .map(|c| {
                    let sparse = SparseRows::from_dense(&c.op.entries);
                    match LadderOp::from_sparse(&sparse) {
                        Some(ladder) => JumpOp::Ladder(ladder),
                        None => JumpOp::General(sparse),
                    }
                })
                .collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// `out ← L(ρ)` for Hermitian `ρ`. Both slices are column-major `n×n`.
    /// `scratch` must have the same length.
    fn apply(&self, rho: &[C64], out: &mut [C64], scratch: &mut [C64]) {
        let n = self.n;
        // scratch = ρ H_eff†: column k accumulates conj(h_kl) ρ[:, l]
        scratch.fill(ZERO);
        for (k, row) in self.h_eff.rows.iter().enumerate() {
            let dst = &mut scratch[k * n..(k + 1) * n];
            for &(l, h) in row {
                let hc = h.conj();
                let src = &rho[l * n..(l + 1) * n];
                for (d, s) in dst.iter_mut().zip(src) {
                    *d += hc * s;
                }
            }
        }
        // out = iM + (iM)† with the diagonal of H_eff applied elementwise
        let i = C64::new(0.0, 1.0);
        for col in 0..n {
            for row in 0..n {
                let k = row + col * n;
                let m_rc = scratch[k];
                let m_cr = scratch[col + row * n];
                out[k] = i * (m_rc - m_cr.conj()) + self.diag_factor[k] * rho[k];
            }
        }
        for jump in &self.jumps {
            match jump {
                JumpOp::Ladder(op) => apply_ladder_jump(op, rho, out, n),
                JumpOp::General(op) => apply_general_jump(op, rho, out, scratch, n),
            }
        }
    }

    pub fn rhs(&self, rho: &DensityMatrix) -> Result<CMatrix> {
        if rho.entries.nrows() != self.n || rho.entries.ncols() != self.n {
            return Err(Error::Shape {
                expected: self.n,
                rows: rho.entries.nrows(),
                cols: rho.entries.ncols(),
            });
        }
        let mut out = CMatrix::zeros(self.n, self.n);
        let mut scratch = vec![ZERO; self.n * self.n];
        self.apply(rho.entries.as_slice(), out.as_mut_slice(), &mut scratch);
        Ok(out)
    }
}

/// `out += C ρ C†` where `(CρC†)_ik = c_i conj(c_k) ρ_{s_i s_k}`.
fn apply_ladder_jump(op: &LadderOp, rho: &[C64], out: &mut [C64], n: usize) {
    for &(k, sk, ck) in &op.entries {
        let src = &rho[sk * n..(sk + 1) * n];
        let dst = &mut out[k * n..(k + 1) * n];
        for &(i, si, ci) in &op.entries {
            dst[i] += src[si] * (ci * ck);
        }
    }
}

fn apply_general_jump(op: &SparseRows, rho: &[C64], out: &mut [C64], scratch: &mut [C64], n: usize) {
    // scratch = ρ C†, then out += C · scratch
    scratch.fill(ZERO);
    for (k, row) in op.rows.iter().enumerate() {
        let dst = &mut scratch[k * n..(k + 1) * n];
        for &(l, c) in row {
            let cc = c.conj();
            let src = &rho[l * n..(l + 1) * n];
            for (d, s) in dst.iter_mut().zip(src) {
                *d += cc * s;
            }
        }
    }
    for col in 0..n {
        let t = &scratch[col * n..(col + 1) * n];
        let o = &mut out[col * n..(col + 1) * n];
        for (i_row, row) in op.rows.iter().enumerate() {
            let mut acc = ZERO;
            for &(j, c) in row {
                acc += c * t[j];
            }
            o[i_row] += acc;
        }
    }
}

/// `dρ/dt = −i[H, ρ] + Σ_k (C_k ρ C_k† − ½{C_k†C_k, ρ})` for Hermitian `ρ`.
pub fn lindblad_rhs(rho: &DensityMatrix, model: &ModelOperators) -> Result<CMatrix> {
    if rho.spec != model.spec {
        return Err(Error::Shape {
            expected: model.spec.total(),
            rows: rho.entries.nrows(),
            cols: rho.entries.ncols(),
        });
    }
    Generator::new(model).rhs(rho)
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntegratorConfig {
    pub dt: f64,
    pub t_max: f64,
    /// Steps between recorded samples.
    pub record_every: usize,
    pub trace_drift_tol: f64,
    /// Keep full density-matrix snapshots alongside the observables.
    pub keep_states: bool,
    /// Renormalize the projected qubit block before taking the concurrence.
    pub normalize_block: bool,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            dt: 1e-3,
            t_max: 50.0,
            record_every: 10,
            trace_drift_tol: 1e-8,
            keep_states: false,
            normalize_block: false,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::Parameter(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.t_max > self.dt && self.t_max.is_finite()) {
            return Err(Error::Parameter(format!(
                "t_max must exceed dt, got t_max = {}, dt = {}",
                self.t_max, self.dt
            )));
        }
        if self.record_every == 0 {
            return Err(Error::Parameter("record_every must be at least 1".into()));
        }
        if !(self.trace_drift_tol > 0.0) {
            return Err(Error::Parameter("trace_drift_tol must be positive".into()));
        }
        Ok(())
    }

    /// Number of RK4 steps; `t_max` is rounded to the nearest whole step.
    pub fn n_steps(&self) -> usize {
        (self.t_max / self.dt).round() as usize
    }

    pub fn halved(&self) -> Self {
        Self {
            dt: self.dt / 2.0,
            record_every: self.record_every * 2,
            ..self.clone()
        }
    }
}

/// Observables recorded at each sample time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observables {
    pub concurrence: f64,
    pub fid_b1: f64,
    pub fid_b2: f64,
    pub fid_b3: f64,
    pub trace: f64,
    pub purity: f64,
    pub mean_na: f64,
    pub mean_nb: f64,
    pub top_pop_a: f64,
    pub top_pop_b: f64,
}

impl Observables {
    pub fn measure(rho: &DensityMatrix, normalize_block: bool) -> Result<Self> {
        let (mean_na, mean_nb) = rho.mean_photons();
        let (top_pop_a, top_pop_b) = rho.top_level_populations();
        Ok(Self {
            concurrence: concurrence(&project_to_qubits(rho, normalize_block))?,
            fid_b1: bell_fidelity(rho, Bell::B1),
            fid_b2: bell_fidelity(rho, Bell::B2),
            fid_b3: bell_fidelity(rho, Bell::B3),
            trace: rho.trace(),
            purity: rho.purity(),
            mean_na,
            mean_nb,
            top_pop_a,
            top_pop_b,
        })
    }
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub spec: HilbertSpec,
    pub times: Vec<f64>,
    pub records: Vec<Observables>,
    /// Present only when `keep_states` was requested.
    pub states: Option<Vec<DensityMatrix>>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn concurrence(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.concurrence).collect()
    }

    pub fn max_top_population(&self) -> f64 {
        self.records
            .iter()
            .map(|r| r.top_pop_a.max(r.top_pop_b))
            .fold(0.0, f64::max)
    }

    /// Truncation is inadequate when the highest Fock level carries more than `tol`.
    pub fn truncation_flagged(&self, tol: f64) -> bool {
        self.max_top_population() >= tol
    }

    pub fn max_trace_drift(&self) -> f64 {
        self.records.iter().map(|r| (r.trace - 1.0).abs()).fold(0.0, f64::max)
    }
}

/// Hook called at every recorded sample.
pub trait Observer {
    fn observe(&mut self, t: f64, rho: &DensityMatrix) -> Result<()>;
}

/// Tracks the smallest eigenvalue of ρ at every `every`-th sample.
#[derive(Debug, Clone)]
pub struct PositivityProbe {
    pub every: usize,
    pub min_eigenvalue: f64,
    pub checks: usize,
    seen: usize,
}

impl PositivityProbe {
    pub fn new(every: usize) -> Self {
        Self {
            every: every.max(1),
            min_eigenvalue: f64::INFINITY,
            checks: 0,
            seen: 0,
        }
    }
}

impl Observer for PositivityProbe {
    fn observe(&mut self, _t: f64, rho: &DensityMatrix) -> Result<()> {
        if self.seen.is_multiple_of(self.every) {
            self.min_eigenvalue = self.min_eigenvalue.min(rho.min_eigenvalue());
            self.checks += 1;
        }
        self.seen += 1;
        Ok(())
    }
}

/// Worst Hermiticity error over all samples.
#[derive(Debug, Clone, Default)]
pub struct HermiticityProbe {
    pub max_error: f64,
}

impl Observer for HermiticityProbe {
    fn observe(&mut self, _t: f64, rho: &DensityMatrix) -> Result<()> {
        self.max_error = self.max_error.max(rho.hermiticity_error());
        Ok(())
    }
}

/// Fixed-step classical RK4 on the matrix ODE.
///
/// After every step ρ is re-Hermitized; the run aborts when the trace drifts
/// beyond `cfg.trace_drift_tol` or an entry becomes non-finite.
pub fn evolve(
    rho0: &DensityMatrix,
    model: &ModelOperators,
    cfg: &IntegratorConfig,
    observers: &mut [&mut dyn Observer],
) -> Result<Trajectory> {
    cfg.validate()?;
    if rho0.spec != model.spec {
        return Err(Error::Dimension(format!(
            "initial state truncation {:?} differs from model {:?}",
            rho0.spec, model.spec
        )));
    }
    rho0.validate()?;
    let gen = Generator::new(model);
    let n2 = gen.dim() * gen.dim();
    let n_steps = cfg.n_steps();
    let dt = cfg.dt;

    let mut rho = rho0.clone();
    let mut traj = Trajectory {
        spec: rho0.spec,
        times: Vec::with_capacity(n_steps / cfg.record_every + 2),
        records: Vec::with_capacity(n_steps / cfg.record_every + 2),
        states: cfg.keep_states.then(Vec::new),
    };
    let mut record = |t: f64, rho: &DensityMatrix, traj: &mut Trajectory| -> Result<()> {
        traj.times.push(t);
        traj.records.push(Observables::measure(rho, cfg.normalize_block)?);
        if let Some(states) = traj.states.as_mut() {
            states.push(rho.clone());
        }
        for obs in observers.iter_mut() {
            obs.observe(t, rho)?;
        }
        Ok(())
    };
    record(0.0, &rho, &mut traj)?;

    let mut k1 = vec![ZERO; n2];
    let mut k2 = vec![ZERO; n2];
    let mut k3 = vec![ZERO; n2];
    let mut k4 = vec![ZERO; n2];
    let mut stage = vec![ZERO; n2];
    let mut scratch = vec![ZERO; n2];
    let half = C64::from(dt / 2.0);
    let full = C64::from(dt);
    let sixth = C64::from(dt / 6.0);

    for step in 1..=n_steps {
        let y = rho.entries.as_slice();
        gen.apply(y, &mut k1, &mut scratch);
        for ((s, y), k) in stage.iter_mut().zip(y).zip(&k1) {
            *s = y + half * k;
        }
        gen.apply(&stage, &mut k2, &mut scratch);
        for ((s, y), k) in stage.iter_mut().zip(y).zip(&k2) {
            *s = y + half * k;
        }
        gen.apply(&stage, &mut k3, &mut scratch);
        for ((s, y), k) in stage.iter_mut().zip(y).zip(&k3) {
            *s = y + full * k;
        }
        gen.apply(&stage, &mut k4, &mut scratch);
        let y = rho.entries.as_mut_slice();
        for i in 0..n2 {
            y[i] += sixth * (k1[i] + 2.0 * (k2[i] + k3[i]) + k4[i]);
        }
        rho.hermitize_in_place();

        let t = step as f64 * dt;
        let tr = rho.trace();
        let recording = step % cfg.record_every == 0 || step == n_steps;
        if !tr.is_finite() || (recording && !rho.all_finite()) {
            return Err(Error::NonFinite { t });
        }
        let drift = (tr - 1.0).abs();
        if drift > cfg.trace_drift_tol {
            return Err(Error::TraceDrift {
                t,
                drift,
                tol: cfg.trace_drift_tol,
            });
        }
        if recording {
            record(t, &rho, &mut traj)?;
        }
    }
    Ok(traj)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceReport {
    pub dt: f64,
    /// Sup-norm difference of sampled concurrence between the `dt` and `dt/2` runs.
    pub deviation: f64,
    pub samples: usize,
}

impl ConvergenceReport {
    /// Differences below this are roundoff.
    pub const ROUNDOFF_FLOOR: f64 = 1e-10;

    pub fn converged(&self) -> bool {
        self.deviation < Self::ROUNDOFF_FLOOR
    }

    pub fn within(&self, tol: f64) -> bool {
        self.deviation < tol
    }
}

/// Runs `evolve` at `dt` and `dt/2` and compares concurrence on the shared sample times.
pub fn check_convergence(
    rho0: &DensityMatrix,
    model: &ModelOperators,
    cfg: &IntegratorConfig,
) -> Result<ConvergenceReport> {
    let coarse = evolve(rho0, model, cfg, &mut [])?;
    let fine = evolve(rho0, model, &cfg.halved(), &mut [])?;
    let deviation = coarse
        .records
        .iter()
        .zip(&fine.records)
        .map(|(a, b)| (a.concurrence - b.concurrence).abs())
        .fold(0.0, f64::max);
    Ok(ConvergenceReport {
        dt: cfg.dt,
        deviation,
        samples: coarse.len().min(fine.len()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{basis_vector, ONE};
    use crate::model::CouplerParams;
    use rand::{Rng, SeedableRng};

    /// Textbook dense evaluation, independent of the sparse generator.
    fn dense_rhs(rho: &CMatrix, model: &ModelOperators) -> CMatrix {
        let h = &model.hamiltonian.entries;
        let i = C64::new(0.0, 1.0);
        let mut out = (h * rho - rho * h) * (-i);
        for c in &model.collapse_ops {
            let c = &c.op.entries;
            let cd = c.adjoint();
            let cdc = &cd * c;
            out += c * rho * &cd - (&cdc * rho + rho * &cdc) * C64::from(0.5);
        }
        out
    }

    fn random_state(spec: HilbertSpec, seed: u64) -> DensityMatrix {
        let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
        let n = spec.total();
        let g = CMatrix::from_fn(n, n, |_, _| C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5));
        let m = &g * g.adjoint();
        let tr = m.trace();
        DensityMatrix::from_entries(m / tr, spec).unwrap()
    }

    fn busy_model(spec: HilbertSpec) -> ModelOperators {
        let mut p = CouplerParams::symmetric(25.0, 0.03).with_thermal(0.7, 1.3).with_drive(0.4);
        p.epsilon = C64::new(0.2, 0.1);
        p.alpha = C64::new(0.4, -0.2);
        ModelOperators::new(&p, &spec).unwrap()
    }

    #[test]
    fn sparse_generator_matches_dense() {
        let spec = HilbertSpec::new(5, 4).unwrap();
        let model = busy_model(spec);
        let rho = random_state(spec, 7);
        let sparse = lindblad_rhs(&rho, &model).unwrap();
        let dense = dense_rhs(&rho.entries, &model);
        assert!((sparse - dense).norm() < 1e-12);
    }

    #[test]
    fn rhs_is_traceless() {
        let spec = HilbertSpec::new(4, 6).unwrap();
        let model = busy_model(spec);
        for seed in 0..5 {
            let rho = random_state(spec, seed);
            let d = lindblad_rhs(&rho, &model).unwrap();
            assert!(d.trace().norm() < 1e-12);
        }
    }

    #[test]
    fn single_photon_decay_rhs() {
        let spec = HilbertSpec::new(3, 3).unwrap();
        let gamma = 0.05;
        let mut p = CouplerParams::symmetric(0.0, 0.0);
        p.epsilon = ZERO;
        p.gamma_a = gamma;
        let model = ModelOperators::new(&p, &spec).unwrap();
        let (rho, _) = crate::hilbert::basis_state(1, 0, &spec).unwrap();
        let d = lindblad_rhs(&rho, &model).unwrap();
        let k0 = spec.flatten(0, 0).unwrap();
        let k1 = spec.flatten(1, 0).unwrap();
        let mut expect = CMatrix::zeros(9, 9);
        expect[(k0, k0)] = C64::from(2.0 * gamma);
        expect[(k1, k1)] = C64::from(-2.0 * gamma);
        assert!((d - expect).norm() < 1e-15);
    }

    #[test]
    fn unitary_rhs_is_anti_hermitian_commutator() {
        let spec = HilbertSpec::new(4, 4).unwrap();
        let mut p = CouplerParams::symmetric(25.0, 0.0).with_drive(0.3);
        p.epsilon = C64::new(0.1, 0.2);
        let model = ModelOperators::new(&p, &spec).unwrap();
        let rho = random_state(spec, 3);
        let d = lindblad_rhs(&rho, &model).unwrap();
        let h = &model.hamiltonian.entries;
        let comm = (h * &rho.entries - &rho.entries * h) * C64::new(0.0, -1.0);
        assert!((&d - &comm).norm() < 1e-12);
        // −i[H,ρ] is Hermitian for Hermitian H, ρ
        assert!((&d - d.adjoint()).norm() < 1e-12);
    }

    #[test]
    fn evolve_records_endpoints() {
        let spec = HilbertSpec::new(3, 3).unwrap();
        let model = ModelOperators::new(&CouplerParams::symmetric(25.0, 0.01), &spec).unwrap();
        let (rho0, _) = crate::hilbert::basis_state(2, 0, &spec).unwrap();
        let cfg = IntegratorConfig {
            dt: 1e-2,
            t_max: 1.05,
            record_every: 10,
            ..Default::default()
        };
        let traj = evolve(&rho0, &model, &cfg, &mut []).unwrap();
        assert_eq!(traj.times.first(), Some(&0.0));
        assert!((traj.times.last().unwrap() - 1.05).abs() < 1e-12);
        assert_eq!(traj.len(), 12);
        assert!(traj.times.windows(2).all(|w| w[1] > w[0]));
        assert!(traj.states.is_none());
    }

    #[test]
    fn evolve_rejects_bad_inputs() {
        let spec = HilbertSpec::new(3, 3).unwrap();
        let model = ModelOperators::new(&CouplerParams::default(), &spec).unwrap();
        let (rho0, _) = crate::hilbert::basis_state(0, 0, &spec).unwrap();
        let bad = IntegratorConfig {
            record_every: 0,
            ..Default::default()
        };
        assert!(evolve(&rho0, &model, &bad, &mut []).is_err());

        let mut unnormalized = rho0.clone();
        unnormalized.entries[(0, 0)] = C64::from(2.0);
        assert!(evolve(&unnormalized, &model, &IntegratorConfig::default(), &mut []).is_err());

        let other = HilbertSpec::new(4, 3).unwrap();
        let (rho_other, _) = crate::hilbert::basis_state(0, 0, &other).unwrap();
        assert!(evolve(&rho_other, &model, &IntegratorConfig::default(), &mut []).is_err());
    }

    #[test]
    fn trace_monitor_trips_on_unstable_step() {
        let spec = HilbertSpec::default();
        let model = ModelOperators::new(&CouplerParams::symmetric(25.0, 0.01), &spec).unwrap();
        let psi = (basis_vector(2, 0, &spec).unwrap() + basis_vector(9, 9, &spec).unwrap()) * C64::from(0.5f64.sqrt());
        let rho0 = DensityMatrix::from_pure(&psi, spec).unwrap();
        let cfg = IntegratorConfig {
            dt: 0.05,
            t_max: 5.0,
            ..Default::default()
        };
        let err = evolve(&rho0, &model, &cfg, &mut []).unwrap_err();
        assert!(err.is_numerical(), "{err}");
    }

    #[test]
    fn probes_and_snapshots() {
        let spec = HilbertSpec::new(3, 3).unwrap();
        let model = ModelOperators::new(&CouplerParams::symmetric(25.0, 0.05).with_thermal(0.5, 0.5), &spec).unwrap();
        let (rho0, _) = crate::hilbert::basis_state(2, 0, &spec).unwrap();
        let cfg = IntegratorConfig {
            dt: 1e-3,
            t_max: 1.0,
            record_every: 100,
            keep_states: true,
            ..Default::default()
        };
        let mut pos = PositivityProbe::new(2);
        let mut herm = HermiticityProbe::default();
        let traj = evolve(&rho0, &model, &cfg, &mut [&mut pos, &mut herm]).unwrap();
        assert_eq!(traj.states.as_ref().unwrap().len(), traj.len());
        assert_eq!(pos.checks, 6);
        assert!(pos.min_eigenvalue > -1e-10);
        assert!(herm.max_error < 1e-12);
        assert!(traj.max_trace_drift() < 1e-10);
        assert_eq!(rho0.entries[(6, 6)], ONE);
    }
}

//! Two-qubit entanglement of the `{|0⟩, |2⟩} ⊗ {|0⟩, |2⟩}` block of the coupler state.
//!
//! The qubit pair uses the ordered basis `(|0,0⟩, |0,2⟩, |2,0⟩, |2,2⟩)`: Fock
//! level 0 is qubit state 0 and Fock level 2 is qubit state 1 in each mode.

use std::f64::consts::FRAC_1_SQRT_2;

use nalgebra::{Matrix4, SymmetricEigen, Vector4};

use crate::error::{Error, Result};
use crate::hilbert::{CVector, HilbertSpec, C64, ONE, ZERO};
use crate::master_eq::DensityMatrix;

pub type Matrix4c = Matrix4<C64>;

/// Fock levels kept in each mode, in qubit order.
pub const QUBIT_LEVELS: [usize; 2] = [0, 2];

/// Tolerance on negative eigenvalues of a projected block.
pub const PSD_TOL: f64 = 1e-9;

/// Composite-space indices of the four qubit-pair basis states.
pub fn qubit_indices(spec: &HilbertSpec) -> [usize; 4] {
    let mut out = [0; 4];
    for (qa, &na) in QUBIT_LEVELS.iter().enumerate() {
        for (qb, &nb) in QUBIT_LEVELS.iter().enumerate() {
            out[2 * qa + qb] = na * spec.dim_b + nb;
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct QubitPairMatrix {
    pub entries: Matrix4c,
    /// Trace of the block as extracted, before any normalization.
    pub weight: f64,
}

impl QubitPairMatrix {
    pub fn new(entries: Matrix4c) -> Self {
        let weight = entries.trace().re;
        Self { entries, weight }
    }

    pub fn from_pure(psi: &Vector4<C64>) -> Self {
        Self::new(psi * psi.adjoint())
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self::new(self.entries * C64::from(s))
    }

    pub fn min_eigenvalue(&self) -> f64 {
        SymmetricEigen::new(hermitize(&self.entries))
            .eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }
}

fn hermitize(m: &Matrix4c) -> Matrix4c {
    (m + m.adjoint()) * C64::from(0.5)
}

/// Restricts `rho` to the qubit pair block. With `normalize`, the block is
/// divided by its weight (left as is when the weight vanishes).
pub fn project_to_qubits(rho: &DensityMatrix, normalize: bool) -> QubitPairMatrix {
    let idx = qubit_indices(&rho.spec);
    let block = Matrix4c::from_fn(|i, j| rho.entries[(idx[i], idx[j])]);
    let projected = QubitPairMatrix::new(block);
    if normalize && projected.weight > 0.0 {
        let weight = projected.weight;
        QubitPairMatrix {
            entries: projected.entries / C64::from(weight),
            weight,
        }
    } else {
        projected
    }
}

/// `σ_y ⊗ σ_y`, which is real in this basis.
pub fn sigma_yy() -> Matrix4c {
    let m = ONE;
    let z = ZERO;
    Matrix4c::new(z, z, z, -m, z, z, m, z, z, m, z, z, -m, z, z, z)
}

/// `ρ̃ = (σ_y⊗σ_y) ρ* (σ_y⊗σ_y)`.
pub fn spin_flip(rho_c: &QubitPairMatrix) -> Matrix4c {
    let yy = sigma_yy();
    yy * rho_c.entries.map(|z| z.conj()) * yy
}

/// Wootters concurrence of a (possibly unnormalized) two-qubit block.
///
/// With `ρ = W W†` from the eigendecomposition, the square roots of the
/// eigenvalues of `R = ρ ρ̃` are the singular values of `Wᵀ (σ_y⊗σ_y) W`.
/// Working with singular values keeps rank-deficient (e.g. pure) blocks
/// accurate to roundoff instead of its square root. Small negative
/// eigenvalues of `ρ` are clamped; anything below `-PSD_TOL` is an error.
pub fn concurrence(rho_c: &QubitPairMatrix) -> Result<f64> {
    let eig = SymmetricEigen::new(hermitize(&rho_c.entries));
    let min_eig = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    let scale = rho_c.weight.abs().max(1.0);
    if min_eig < -PSD_TOL * scale {
        return Err(Error::NotPositive { min_eig });
    }
    let roots = eig.eigenvalues.map(|l| C64::from(l.max(0.0).sqrt()));
    let w = eig.eigenvectors * Matrix4c::from_diagonal(&roots);
    let tau = w.transpose() * sigma_yy() * w;
    let mut lambdas: Vec<f64> = tau.singular_values().iter().copied().collect();
    lambdas.sort_by(|x, y| y.total_cmp(x));
    Ok((lambdas[0] - lambdas[1] - lambdas[2] - lambdas[3]).max(0.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Bell {
    /// `(|2,0⟩ + i|0,2⟩)/√2`
    B1,
    /// `(|2,0⟩ − i|0,2⟩)/√2`
    B2,
    /// `(|2,0⟩ + |1,2⟩)/√2`
    B3,
}

impl Bell {
    pub const ALL: [Bell; 3] = [Bell::B1, Bell::B2, Bell::B3];

    /// Nonzero amplitudes as `((n_a, n_b), amplitude)`.
    pub fn amplitudes(self) -> [((usize, usize), C64); 2] {
        let h = FRAC_1_SQRT_2;
        match self {
            Bell::B1 => [((2, 0), C64::new(h, 0.0)), ((0, 2), C64::new(0.0, h))],
            Bell::B2 => [((2, 0), C64::new(h, 0.0)), ((0, 2), C64::new(0.0, -h))],
            Bell::B3 => [((2, 0), C64::new(h, 0.0)), ((1, 2), C64::new(h, 0.0))],
        }
    }

    pub fn vector(self, spec: &HilbertSpec) -> CVector {
        let mut v = CVector::zeros(spec.total());
        for ((na, nb), amp) in self.amplitudes() {
            v[na * spec.dim_b + nb] = amp;
        }
        v
    }

    /// B1 and B2 in the qubit-pair basis. B3 leaves the qubit subspace.
    pub fn qubit_vector(self) -> Option<Vector4<C64>> {
        let h = FRAC_1_SQRT_2;
        match self {
            Bell::B1 => Some(Vector4::new(ZERO, C64::new(0.0, h), C64::new(h, 0.0), ZERO)),
            Bell::B2 => Some(Vector4::new(ZERO, C64::new(0.0, -h), C64::new(h, 0.0), ZERO)),
            Bell::B3 => None,
        }
    }
}

/// The three reference states on one truncation.
#[derive(Debug, Clone)]
pub struct BellStates {
    pub b1: CVector,
    pub b2: CVector,
    pub b3: CVector,
}

impl BellStates {
    pub fn new(spec: &HilbertSpec) -> Self {
        Self {
            b1: Bell::B1.vector(spec),
            b2: Bell::B2.vector(spec),
            b3: Bell::B3.vector(spec),
        }
    }
}

/// `⟨B|ρ|B⟩`.
pub fn bell_fidelity(rho: &DensityMatrix, which: Bell) -> f64 {
    let amps = which.amplitudes();
    let db = rho.spec.dim_b;
    let mut acc = ZERO;
    for ((ia, ib), ci) in amps {
        for ((ja, jb), cj) in amps {
            acc += ci.conj() * rho.entries[(ia * db + ib, ja * db + jb)] * cj;
        }
    }
    acc.re
}

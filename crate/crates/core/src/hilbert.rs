//! Truncated Fock spaces for the two coupler modes.
//!
//! Composite basis states are ordered with mode `a` outermost: the pair
//! `|n_a⟩|n_b⟩` sits at index `n_a * dim_b + n_b`. Every matrix and file in
//! the crate uses this ordering.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::master_eq::DensityMatrix;

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);

/// Truncation of the two Fock modes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HilbertSpec {
    pub dim_a: usize,
    pub dim_b: usize,
}

impl HilbertSpec {
    /// Both modes need the level `|2⟩`, so each dimension must be at least 3.
    pub fn new(dim_a: usize, dim_b: usize) -> Result<Self> {
        if dim_a < 3 || dim_b < 3 {
            return Err(Error::Dimension(format!(
                "each mode needs at least 3 Fock levels, got ({dim_a}, {dim_b})"
            )));
        }
        Ok(Self { dim_a, dim_b })
    }

    pub fn total(&self) -> usize {
        self.dim_a * self.dim_b
    }

    pub fn dim(&self, mode: Mode) -> usize {
        match mode {
            Mode::A => self.dim_a,
            Mode::B => self.dim_b,
        }
    }

    pub fn flatten(&self, n_a: usize, n_b: usize) -> Result<usize> {
        if n_a >= self.dim_a || n_b >= self.dim_b {
            return Err(Error::IndexOutOfRange {
                n_a,
                n_b,
                dim_a: self.dim_a,
                dim_b: self.dim_b,
            });
        }
        Ok(n_a * self.dim_b + n_b)
    }

    pub fn unflatten(&self, k: usize) -> (usize, usize) {
        (k / self.dim_b, k % self.dim_b)
    }
}

impl Default for HilbertSpec {
    fn default() -> Self {
        Self { dim_a: 10, dim_b: 10 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    A,
    B,
}

/// An operator on the composite two-mode space.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix {
    pub entries: CMatrix,
    pub label: String,
}

impl OperatorMatrix {
    pub fn new(entries: CMatrix, label: impl Into<String>) -> Self {
        Self {
            entries,
            label: label.into(),
        }
    }

    pub fn dagger(&self) -> Self {
        Self::new(self.entries.adjoint(), format!("({})†", self.label))
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }
}

/// Single-mode annihilation operator: `⟨n-1|a|n⟩ = √n`.
pub fn annihilation(dim: usize) -> Result<CMatrix> {
    if dim == 0 {
        return Err(Error::Dimension("annihilation operator needs dim >= 1".into()));
    }
    let mut a = CMatrix::zeros(dim, dim);
    for n in 1..dim {
        a[(n - 1, n)] = C64::new((n as f64).sqrt(), 0.0);
    }
    Ok(a)
}

pub fn creation(dim: usize) -> Result<CMatrix> {
    Ok(annihilation(dim)?.adjoint())
}

/// Single-mode number operator `a†a`.
pub fn number(dim: usize) -> Result<CMatrix> {
    let a = annihilation(dim)?;
    Ok(a.adjoint() * a)
}

/// Embeds a single-mode operator into the two-mode space (`op ⊗ I` or `I ⊗ op`).
pub fn lift(op: &CMatrix, mode: Mode, spec: &HilbertSpec) -> Result<OperatorMatrix> {
    let d = spec.dim(mode);
    if op.nrows() != d || op.ncols() != d {
        return Err(Error::Shape {
            expected: d,
            rows: op.nrows(),
            cols: op.ncols(),
        });
    }
    let entries = match mode {
        Mode::A => op.kronecker(&CMatrix::identity(spec.dim_b, spec.dim_b)),
        Mode::B => CMatrix::identity(spec.dim_a, spec.dim_a).kronecker(op),
    };
    let label = match mode {
        Mode::A => "op⊗I",
        Mode::B => "I⊗op",
    };
    Ok(OperatorMatrix::new(entries, label))
}

/// Fock state vector `|n_a⟩|n_b⟩`.
pub fn basis_vector(n_a: usize, n_b: usize, spec: &HilbertSpec) -> Result<CVector> {
    let k = spec.flatten(n_a, n_b)?;
    let mut v = CVector::zeros(spec.total());
    v[k] = ONE;
    Ok(v)
}

/// Fock state `|n_a⟩|n_b⟩` as both a projector and a state vector.
pub fn basis_state(
    n_a: usize,
    n_b: usize,
    spec: &HilbertSpec,
) -> Result<(DensityMatrix, CVector)> {
    let v = basis_vector(n_a, n_b, spec)?;
    Ok((DensityMatrix::from_pure(&v, *spec)?, v))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn re(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    #[test]
    fn annihilation_ladder() {
        let a2 = annihilation(2).unwrap();
        assert_eq!(a2, CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ZERO, ZERO]));

        let a3 = annihilation(3).unwrap();
        assert_eq!(a3[(0, 1)], ONE);
        assert_eq!(a3[(1, 2)], re(2f64.sqrt()));
        assert_eq!(a3.iter().filter(|z| z.norm() > 0.0).count(), 2);

        let n4 = number(4).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let expect = if i == j { i as f64 } else { 0.0 };
                assert!((n4[(i, j)] - re(expect)).norm() < 1e-15);
            }
        }
        assert!(annihilation(0).is_err());
    }

    #[test]
    fn truncated_commutator() {
        for dim in 1..8 {
            let a = annihilation(dim).unwrap();
            let ad = a.adjoint();
            let comm = &a * &ad - &ad * &a;
            for i in 0..dim {
                for j in 0..dim {
                    let expect = if i != j {
                        0.0
                    } else if i + 1 < dim {
                        1.0
                    } else {
                        1.0 - dim as f64
                    };
                    assert!((comm[(i, j)] - re(expect)).norm() < 1e-12, "dim {dim} ({i},{j})");
                }
            }
        }
    }

    #[test]
    fn lifted_modes_commute() {
        let spec = HilbertSpec::new(4, 3).unwrap();
        let a = lift(&annihilation(4).unwrap(), Mode::A, &spec).unwrap().entries;
        let b = lift(&annihilation(3).unwrap(), Mode::B, &spec).unwrap().entries;
        let comm = &a * &b - &b * &a;
        assert!(comm.iter().all(|z| z.norm() < 1e-15));

        let id = lift(&CMatrix::identity(4, 4), Mode::A, &spec).unwrap();
        assert_eq!(id.entries, CMatrix::identity(12, 12));
        assert!(lift(&CMatrix::identity(3, 3), Mode::A, &spec).is_err());
    }

    #[test]
    fn pair_exchange_matrix_element() {
        let spec = HilbertSpec::default();
        let ad = lift(&creation(10).unwrap(), Mode::A, &spec).unwrap().entries;
        let b = lift(&annihilation(10).unwrap(), Mode::B, &spec).unwrap().entries;
        let op = &ad * &ad * &b * &b;
        let v20 = basis_vector(2, 0, &spec).unwrap();
        let v02 = basis_vector(0, 2, &spec).unwrap();
        let elem = (v20.adjoint() * op * v02)[(0, 0)];
        assert!((elem - re(2.0)).norm() < 1e-12);
    }

    #[test]
    fn lift_preserves_spectrum_with_multiplicity() {
        let spec = HilbertSpec::new(5, 3).unwrap();
        let n = lift(&number(5).unwrap(), Mode::A, &spec).unwrap().entries;
        let mut diag: Vec<f64> = (0..15).map(|k| n[(k, k)].re).collect();
        diag.sort_by(f64::total_cmp);
        let expect: Vec<f64> = (0..5).flat_map(|v| [v as f64; 3]).collect();
        for (d, e) in diag.iter().zip(&expect) {
            assert!((d - e).abs() < 1e-12);
        }
    }

    #[test]
    fn flatten_round_trip() {
        let spec = HilbertSpec::new(7, 4).unwrap();
        for n_a in 0..7 {
            for n_b in 0..4 {
                let k = spec.flatten(n_a, n_b).unwrap();
                assert_eq!(spec.unflatten(k), (n_a, n_b));
            }
        }
        assert!(spec.flatten(7, 0).is_err());
        assert!(HilbertSpec::new(2, 5).is_err());
    }

    #[test]
    fn basis_projectors() {
        let spec = HilbertSpec::default();
        let (rho, _) = basis_state(0, 0, &spec).unwrap();
        assert_eq!(rho.entries[(0, 0)], ONE);
        assert_eq!(rho.entries.iter().filter(|z| z.norm() > 0.0).count(), 1);

        let (rho, v) = basis_state(2, 0, &spec).unwrap();
        assert_eq!(v[20], ONE);
        assert_eq!(rho.entries[(20, 20)], ONE);
        assert!((rho.trace() - 1.0).abs() < 1e-15);
        assert!(basis_state(10, 0, &spec).is_err());
    }
}

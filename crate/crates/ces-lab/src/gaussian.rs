//! Gaussian engine: first and second quadrature moments under symplectic
//! gates.
//!
//! Quadratures follow x = (a + a†)/√2, p = (a - a†)/(i√2), so [x, p] = i and
//! the vacuum covariance is I/2. Moment vectors are ordered
//! (x_1 … x_N, p_1 … p_N).

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub struct GaussianState {
    num_modes: usize,
    mean: DVector<f64>,
    cov: DMatrix<f64>,
}

/// Gate set mirrored by the Fock-engine generators: the symplectic action of
/// the same unitaries in the same sign conventions.
#[derive(Clone, Debug, PartialEq)]
pub enum SymplecticGate {
    BeamSplitter { mode_a: usize, mode_b: usize, theta: f64 },
    Displacement { mode: usize, eps: Complex64 },
    Squeeze { mode: usize, r: f64 },
}

impl GaussianState {
    pub fn num_modes(&self) -> usize {
        self.num_modes
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn cov(&self) -> &DMatrix<f64> {
        &self.cov
    }

    /// |det(2V) - 1|, zero for pure states.
    pub fn purity_deviation(&self) -> f64 {
        ((2.0 * self.cov.clone()).determinant() - 1.0).abs()
    }
}

pub fn vacuum_gaussian(num_modes: usize) -> GaussianState {
    GaussianState {
        num_modes,
        mean: DVector::zeros(2 * num_modes),
        cov: DMatrix::identity(2 * num_modes, 2 * num_modes) * 0.5,
    }
}

fn check_mode(n: usize, mode: usize) -> Result<()> {
    if mode >= n {
        return Err(Error::ModeOutOfRange { mode, num_modes: n });
    }
    Ok(())
}

impl SymplecticGate {
    /// 2N x 2N symplectic matrix of the gate.
    pub fn symplectic(&self, num_modes: usize) -> Result<DMatrix<f64>> {
        let n = num_modes;
        let mut s = DMatrix::identity(2 * n, 2 * n);
        match self {
            SymplecticGate::BeamSplitter { mode_a, mode_b, theta } => {
                check_mode(n, *mode_a)?;
                check_mode(n, *mode_b)?;
                if mode_a == mode_b {
                    return Err(Error::Shape("beam splitter needs two distinct modes".into()));
                }
                let (c, sn) = (theta.cos(), theta.sin());
                // mean a_i -> c a_i - s a_j, a_j -> s a_i + c a_j,
                // identically on the x and p blocks
                for blk in [0, n] {
                    let (i, j) = (blk + mode_a, blk + mode_b);
                    s[(i, i)] = c;
                    s[(i, j)] = -sn;
                    s[(j, i)] = sn;
                    s[(j, j)] = c;
                }
            }
            SymplecticGate::Displacement { mode, .. } => {
                check_mode(n, *mode)?;
            }
            SymplecticGate::Squeeze { mode, r } => {
                check_mode(n, *mode)?;
                s[(*mode, *mode)] = (-r).exp();
                s[(n + mode, n + mode)] = r.exp();
            }
        }
        Ok(s)
    }

    /// Mean-vector shift of the gate.
    pub fn displacement(&self, num_modes: usize) -> Result<DVector<f64>> {
        let mut d = DVector::zeros(2 * num_modes);
        if let SymplecticGate::Displacement { mode, eps } = self {
            check_mode(num_modes, *mode)?;
            d[*mode] = std::f64::consts::SQRT_2 * eps.re;
            d[num_modes + mode] = std::f64::consts::SQRT_2 * eps.im;
        }
        Ok(d)
    }
}

/// mean -> S mean + d, cov -> S cov Sᵀ.
pub fn apply_gate(state: &GaussianState, gate: &SymplecticGate) -> Result<GaussianState> {
    let s = gate.symplectic(state.num_modes)?;
    let d = gate.displacement(state.num_modes)?;
    Ok(GaussianState {
        num_modes: state.num_modes,
        mean: &s * &state.mean + d,
        cov: &s * &state.cov * s.transpose(),
    })
}

/// Mean and variance of the pair of collective quadratures
/// (1/N) Σ w_i x_i and (1/N) Σ w_i p_i.
/// Returns (mean_x, var_x, mean_p, var_p).
pub fn collective_quadrature_stats(
    state: &GaussianState,
    weights: &[f64],
) -> Result<(f64, f64, f64, f64)> {
    let n = state.num_modes;
    if weights.len() != n {
        return Err(Error::Shape(format!(
            "{} weights for {} modes",
            weights.len(),
            n
        )));
    }
    let scale = 1.0 / n as f64;
    let mut u = DVector::zeros(2 * n);
    let mut v = DVector::zeros(2 * n);
    for (i, w) in weights.iter().enumerate() {
        u[i] = w * scale;
        v[n + i] = w * scale;
    }
    let mean_x = u.dot(&state.mean);
    let mean_p = v.dot(&state.mean);
    let var_x = (u.transpose() * &state.cov * &u)[(0, 0)];
    let var_p = (v.transpose() * &state.cov * &v)[(0, 0)];
    Ok((mean_x, var_x, mean_p, var_p))
}

/// Squared overlap |⟨ψ₁|ψ₂⟩|² of two pure Gaussian states:
/// det(V₁+V₂)^{-1/2} exp(-δᵀ(V₁+V₂)⁻¹δ/2) with δ the mean difference.
/// Rejects impure inputs (|det(2V) - 1| beyond 1e-9).
pub fn overlap_gaussian(s1: &GaussianState, s2: &GaussianState) -> Result<f64> {
    if s1.num_modes != s2.num_modes {
        return Err(Error::Shape(format!(
            "overlap between {}-mode and {}-mode states",
            s1.num_modes, s2.num_modes
        )));
    }
    for s in [s1, s2] {
        let dev = s.purity_deviation();
        if dev > 1e-9 {
            return Err(Error::Impure { deviation: dev });
        }
    }
    let vsum = &s1.cov + &s2.cov;
    let delta = &s2.mean - &s1.mean;
    let chol = vsum
        .clone()
        .cholesky()
        .ok_or_else(|| Error::Domain("covariance sum is not positive definite".into()))?;
    let sol = chol.solve(&delta);
    let det = chol.determinant();
    Ok((1.0 / det.sqrt()) * (-0.5 * delta.dot(&sol)).exp())
}

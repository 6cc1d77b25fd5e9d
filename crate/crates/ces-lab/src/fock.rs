//! Dense truncated Fock-space engine.
//!
//! States live on the grid `{0, …, cutoff-1}^num_modes` with mode 0 slowest
//! in the flat amplitude layout. Ladder operators act exactly on the
//! truncated grid: a creation step that would leave the grid drops the
//! amplitude and adds its weight to a leak accumulator, so truncation error
//! is always visible rather than silent.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Amplitude-count budget for dense states (64 MiB of complex amplitudes).
pub const DEFAULT_AMP_BUDGET: usize = 4_000_000;

const FLOW_TOL: f64 = 1e-15;
const MAX_TAYLOR_TERMS: usize = 120;

/// Which ladder operator to apply.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LadderKind {
    Create,
    Annihilate,
}

/// Anti-Hermitian generators whose exponentials the engine can apply.
/// `BeamSplitter` is `-theta (a_i† a_j - a_i a_j†)`, `Displacement` is
/// `eps a† - eps* a`, `Squeeze` is `(r/2)(a² - a†²)` and `CollectiveSqueeze`
/// is the same quadratic in the normalized weighted combination
/// `R = Σ w_i a_i / ‖w‖`.
#[derive(Clone, Debug, PartialEq)]
pub enum Generator {
    BeamSplitter { mode_a: usize, mode_b: usize, theta: f64 },
    Displacement { mode: usize, eps: Complex64 },
    Squeeze { mode: usize, r: f64 },
    CollectiveSqueeze { weights: Vec<f64>, r: f64 },
}

#[derive(Clone, Debug)]
pub struct FockState {
    num_modes: usize,
    cutoff: usize,
    amps: Vec<Complex64>,
    norm_tracked: f64,
    leak: f64,
}

impl FockState {
    pub fn num_modes(&self) -> usize {
        self.num_modes
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    /// Cached squared norm; kept in sync by every operation.
    pub fn norm_tracked(&self) -> f64 {
        self.norm_tracked
    }

    pub fn norm(&self) -> f64 {
        self.norm_tracked.sqrt()
    }

    /// Weight dropped over the grid edge so far, accumulated through the
    /// operations that produced this state.
    pub fn leak(&self) -> f64 {
        self.leak
    }

    /// Probability weight currently sitting on the boundary shell
    /// (any occupancy equal to `cutoff - 1`).
    pub fn boundary_weight(&self) -> f64 {
        let top = self.cutoff - 1;
        let mut w = 0.0;
        for (i, a) in self.amps.iter().enumerate() {
            let mut rest = i;
            let mut on_edge = false;
            for m in (0..self.num_modes).rev() {
                let _ = m;
                if rest % self.cutoff == top {
                    on_edge = true;
                    break;
                }
                rest /= self.cutoff;
            }
            if on_edge {
                w += a.norm_sqr();
            }
        }
        w
    }

    pub fn flat_index(&self, occ: &[usize]) -> Result<usize> {
        if occ.len() != self.num_modes {
            return Err(Error::Shape(format!(
                "occupancy list has {} entries for {} modes",
                occ.len(),
                self.num_modes
            )));
        }
        let mut idx = 0;
        for &n in occ {
            if n >= self.cutoff {
                return Err(Error::Domain(format!(
                    "occupancy {n} at cutoff {}",
                    self.cutoff
                )));
            }
            idx = idx * self.cutoff + n;
        }
        Ok(idx)
    }

    pub fn amplitude(&self, occ: &[usize]) -> Result<Complex64> {
        Ok(self.amps[self.flat_index(occ)?])
    }

    pub(crate) fn set_amplitude(&mut self, occ: &[usize], value: Complex64) -> Result<()> {
        let idx = self.flat_index(occ)?;
        self.amps[idx] = value;
        self.refresh_norm();
        Ok(())
    }

    pub(crate) fn from_amps(
        num_modes: usize,
        cutoff: usize,
        amps: Vec<Complex64>,
        leak: f64,
    ) -> Self {
        let norm_tracked = sum_norm_sqr(&amps);
        FockState {
            num_modes,
            cutoff,
            amps,
            norm_tracked,
            leak,
        }
    }

    pub(crate) fn refresh_norm(&mut self) {
        self.norm_tracked = sum_norm_sqr(&self.amps);
    }

    pub fn scaled(&self, factor: Complex64) -> FockState {
        let amps = self.amps.iter().map(|a| a * factor).collect();
        FockState::from_amps(self.num_modes, self.cutoff, amps, self.leak)
    }

    pub fn normalized(&self) -> Result<FockState> {
        let n = self.norm();
        if n == 0.0 {
            return Err(Error::Domain("cannot normalize the zero vector".into()));
        }
        Ok(self.scaled(Complex64::new(1.0 / n, 0.0)))
    }

    /// Occupancies of a flat index, mode 0 first.
    pub fn occupancies(&self, mut flat: usize) -> Vec<usize> {
        let mut occ = vec![0; self.num_modes];
        for m in (0..self.num_modes).rev() {
            occ[m] = flat % self.cutoff;
            flat /= self.cutoff;
        }
        occ
    }
}

fn sum_norm_sqr(amps: &[Complex64]) -> f64 {
    amps.iter().map(|a| a.norm_sqr()).sum()
}

fn check_budget(num_modes: usize, cutoff: usize, budget: usize) -> Result<usize> {
    if num_modes == 0 || cutoff < 2 {
        return Err(Error::Shape(format!(
            "need at least one mode and cutoff >= 2, got {num_modes} modes at cutoff {cutoff}"
        )));
    }
    let required = (cutoff as u128).pow(num_modes as u32);
    if required > budget as u128 {
        return Err(Error::Budget {
            num_modes,
            cutoff,
            required,
            budget,
        });
    }
    Ok(required as usize)
}

/// Vacuum state under the default amplitude budget.
pub fn vacuum_fock(num_modes: usize, cutoff: usize) -> Result<FockState> {
    vacuum_fock_budgeted(num_modes, cutoff, DEFAULT_AMP_BUDGET)
}

pub fn vacuum_fock_budgeted(num_modes: usize, cutoff: usize, budget: usize) -> Result<FockState> {
    let dim = check_budget(num_modes, cutoff, budget)?;
    let mut amps = vec![Complex64::default(); dim];
    amps[0] = Complex64::new(1.0, 0.0);
    Ok(FockState::from_amps(num_modes, cutoff, amps, 0.0))
}

/// Number basis state |occ⟩.
pub fn basis_fock(cutoff: usize, occ: &[usize]) -> Result<FockState> {
    let mut s = vacuum_fock(occ.len(), cutoff)?;
    s.set_amplitude(&vec![0; occ.len()], Complex64::default())?;
    s.set_amplitude(occ, Complex64::new(1.0, 0.0))?;
    Ok(s)
}

fn mode_stride(num_modes: usize, cutoff: usize, mode: usize) -> usize {
    cutoff.pow((num_modes - 1 - mode) as u32)
}

/// dst += coef * (ladder op on `mode`) src. Returns the weight dropped over
/// the boundary (creation only). The blocked loop keeps this at streaming
/// speed; it is the kernel every generator below is built from.
pub(crate) fn ladder_pass(
    num_modes: usize,
    cutoff: usize,
    mode: usize,
    src: &[Complex64],
    dst: &mut [Complex64],
    kind: LadderKind,
    coef: Complex64,
) -> f64 {
    let stride = mode_stride(num_modes, cutoff, mode);
    let block = stride * cutoff;
    let dim = src.len();
    let mut dropped = 0.0;
    let mut base = 0;
    while base < dim {
        match kind {
            LadderKind::Create => {
                for n in 0..cutoff {
                    let row = base + n * stride;
                    if n + 1 < cutoff {
                        let f = coef * ((n + 1) as f64).sqrt();
                        for t in 0..stride {
                            dst[row + stride + t] += f * src[row + t];
                        }
                    } else {
                        let w = coef.norm_sqr() * ((n + 1) as f64);
                        for t in 0..stride {
                            dropped += w * src[row + t].norm_sqr();
                        }
                    }
                }
            }
            LadderKind::Annihilate => {
                for n in 1..cutoff {
                    let row = base + n * stride;
                    let f = coef * (n as f64).sqrt();
                    for t in 0..stride {
                        dst[row - stride + t] += f * src[row + t];
                    }
                }
            }
        }
        base += block;
    }
    dropped
}

fn check_mode(state: &FockState, mode: usize) -> Result<()> {
    if mode >= state.num_modes {
        return Err(Error::ModeOutOfRange {
            mode,
            num_modes: state.num_modes,
        });
    }
    Ok(())
}

/// Single ladder operator. Creation from the top level returns the zero
/// vector and records the dropped weight in the result's leak accumulator.
pub fn apply_ladder(state: &FockState, mode: usize, kind: LadderKind) -> Result<FockState> {
    check_mode(state, mode)?;
    let mut out = vec![Complex64::default(); state.dim()];
    let dropped = ladder_pass(
        state.num_modes,
        state.cutoff,
        mode,
        &state.amps,
        &mut out,
        kind,
        Complex64::new(1.0, 0.0),
    );
    Ok(FockState::from_amps(
        state.num_modes,
        state.cutoff,
        out,
        state.leak + dropped,
    ))
}

/// Inner product, conjugate linear in the first argument.
pub fn inner(lhs: &FockState, rhs: &FockState) -> Result<Complex64> {
    if lhs.num_modes != rhs.num_modes || lhs.cutoff != rhs.cutoff {
        return Err(Error::Shape(format!(
            "inner product between ({}, {}) and ({}, {}) grids",
            lhs.num_modes, lhs.cutoff, rhs.num_modes, rhs.cutoff
        )));
    }
    Ok(lhs
        .amps
        .iter()
        .zip(rhs.amps.iter())
        .map(|(a, b)| a.conj() * b)
        .sum())
}

struct GenApply<'a> {
    gen: &'a Generator,
    num_modes: usize,
    cutoff: usize,
    scratch: Vec<Complex64>,
}

impl<'a> GenApply<'a> {
    fn new(gen: &'a Generator, num_modes: usize, cutoff: usize, dim: usize) -> Self {
        GenApply {
            gen,
            num_modes,
            cutoff,
            scratch: vec![Complex64::default(); dim],
        }
    }

    /// dst = G src (dst is cleared first).
    fn apply(&mut self, src: &[Complex64], dst: &mut [Complex64]) {
        dst.fill(Complex64::default());
        let one = Complex64::new(1.0, 0.0);
        let (nm, c) = (self.num_modes, self.cutoff);
        match self.gen {
            Generator::BeamSplitter {
                mode_a,
                mode_b,
                theta,
            } => {
                // -theta a_a† a_b
                self.scratch.fill(Complex64::default());
                ladder_pass(nm, c, *mode_b, src, &mut self.scratch, LadderKind::Annihilate, one);
                ladder_pass(
                    nm,
                    c,
                    *mode_a,
                    &self.scratch,
                    dst,
                    LadderKind::Create,
                    Complex64::new(-theta, 0.0),
                );
                // +theta a_a a_b†
                self.scratch.fill(Complex64::default());
                ladder_pass(nm, c, *mode_b, src, &mut self.scratch, LadderKind::Create, one);
                ladder_pass(
                    nm,
                    c,
                    *mode_a,
                    &self.scratch,
                    dst,
                    LadderKind::Annihilate,
                    Complex64::new(*theta, 0.0),
                );
            }
            Generator::Displacement { mode, eps } => {
                ladder_pass(nm, c, *mode, src, dst, LadderKind::Create, *eps);
                ladder_pass(nm, c, *mode, src, dst, LadderKind::Annihilate, -eps.conj());
            }
            Generator::Squeeze { mode, r } => {
                let half = Complex64::new(r / 2.0, 0.0);
                self.scratch.fill(Complex64::default());
                ladder_pass(nm, c, *mode, src, &mut self.scratch, LadderKind::Annihilate, one);
                ladder_pass(nm, c, *mode, &self.scratch, dst, LadderKind::Annihilate, half);
                self.scratch.fill(Complex64::default());
                ladder_pass(nm, c, *mode, src, &mut self.scratch, LadderKind::Create, one);
                ladder_pass(nm, c, *mode, &self.scratch, dst, LadderKind::Create, -half);
            }
            Generator::CollectiveSqueeze { weights, r } => {
                let wn = weights.iter().map(|w| w * w).sum::<f64>().sqrt();
                let half = Complex64::new(r / 2.0, 0.0);
                // (r/2) R² with R = Σ w_i a_i / ‖w‖, applied as R(R src)
                self.scratch.fill(Complex64::default());
                for (m, w) in weights.iter().enumerate() {
                    ladder_pass(
                        nm,
                        c,
                        m,
                        src,
                        &mut self.scratch,
                        LadderKind::Annihilate,
                        Complex64::new(w / wn, 0.0),
                    );
                }
                let lowered = self.scratch.clone();
                for (m, w) in weights.iter().enumerate() {
                    ladder_pass(
                        nm,
                        c,
                        m,
                        &lowered,
                        dst,
                        LadderKind::Annihilate,
                        half * (w / wn),
                    );
                }
                // -(r/2) R†²
                self.scratch.fill(Complex64::default());
                for (m, w) in weights.iter().enumerate() {
                    ladder_pass(
                        nm,
                        c,
                        m,
                        src,
                        &mut self.scratch,
                        LadderKind::Create,
                        Complex64::new(w / wn, 0.0),
                    );
                }
                let raised = self.scratch.clone();
                for (m, w) in weights.iter().enumerate() {
                    ladder_pass(nm, c, m, &raised, dst, LadderKind::Create, -half * (w / wn));
                }
            }
        }
    }
}

fn generator_norm_bound(gen: &Generator, num_modes: usize, cutoff: usize) -> f64 {
    let c = cutoff as f64;
    match gen {
        Generator::BeamSplitter { theta, .. } => 2.0 * theta.abs() * c,
        Generator::Displacement { eps, .. } => 2.0 * eps.norm() * c.sqrt(),
        Generator::Squeeze { r, .. } => r.abs() * (c + 2.0),
        Generator::CollectiveSqueeze { r, .. } => {
            r.abs() * (num_modes as f64 * (c - 1.0) + 2.0)
        }
    }
}

fn validate_generator(gen: &Generator, state: &FockState) -> Result<()> {
    match gen {
        Generator::BeamSplitter { mode_a, mode_b, .. } => {
            check_mode(state, *mode_a)?;
            check_mode(state, *mode_b)?;
            if mode_a == mode_b {
                return Err(Error::Shape("beam splitter needs two distinct modes".into()));
            }
        }
        Generator::Displacement { mode, .. } | Generator::Squeeze { mode, .. } => {
            check_mode(state, *mode)?;
        }
        Generator::CollectiveSqueeze { weights, .. } => {
            if weights.len() != state.num_modes {
                return Err(Error::Shape(format!(
                    "{} collective weights for {} modes",
                    weights.len(),
                    state.num_modes
                )));
            }
            if weights.iter().map(|w| w * w).sum::<f64>() <= 0.0 {
                return Err(Error::Domain("collective weights are all zero".into()));
            }
        }
    }
    Ok(())
}

/// Exponential of an anti-Hermitian generator, evaluated by a substepped
/// Taylor flow of the generator clipped to the truncated grid. The result's
/// leak accumulator gains the norm deviation relative to the input; for the
/// exact gate that deviation is pure truncation loss.
pub fn apply_generator_exponential(state: &FockState, gen: &Generator) -> Result<FockState> {
    validate_generator(gen, state)?;
    let bound = generator_norm_bound(gen, state.num_modes, state.cutoff);
    let mut ga = GenApply::new(gen, state.num_modes, state.cutoff, state.dim());
    let amps = exp_flow(|src, dst| ga.apply(src, dst), state.amps.clone(), bound)?;
    let norm_in = state.norm_tracked;
    let mut out = FockState::from_amps(state.num_modes, state.cutoff, amps, 0.0);
    out.leak = state.leak + (out.norm_tracked - norm_in).abs();
    Ok(out)
}

/// exp(G) via `steps` substeps of a plain Taylor series, each with
/// ‖G‖/steps ≤ 1/2 on the truncated grid.
pub(crate) fn exp_flow<F: FnMut(&[Complex64], &mut [Complex64])>(
    mut apply: F,
    amps: Vec<Complex64>,
    bound: f64,
) -> Result<Vec<Complex64>> {
    let steps = (2.0 * bound).ceil().max(1.0) as usize;
    let dim = amps.len();
    let mut acc = amps;
    let mut term = vec![Complex64::default(); dim];
    let mut next = vec![Complex64::default(); dim];
    for _ in 0..steps {
        term.copy_from_slice(&acc);
        let mut acc_norm = sum_norm_sqr(&acc);
        let mut converged = false;
        for k in 1..=MAX_TAYLOR_TERMS {
            apply(&term, &mut next);
            let scale = 1.0 / (k as f64 * steps as f64);
            for (t, n) in term.iter_mut().zip(next.iter()) {
                *t = n * scale;
            }
            for (a, t) in acc.iter_mut().zip(term.iter()) {
                *a += t;
            }
            let term_norm = sum_norm_sqr(&term);
            acc_norm = acc_norm.max(sum_norm_sqr(&acc));
            if term_norm <= FLOW_TOL * FLOW_TOL * acc_norm.max(f64::MIN_POSITIVE) {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::Convergence(
                "Taylor flow did not reach tolerance within the term limit".into(),
            ));
        }
    }
    Ok(acc)
}

/// Spectral norm of a small complex matrix by power iteration on M†M.
pub(crate) fn spectral_norm(m: &DMatrix<Complex64>) -> f64 {
    let n = m.ncols();
    if n == 0 {
        return 0.0;
    }
    let mh = m.adjoint();
    let mut v = nalgebra::DVector::<Complex64>::from_element(n, Complex64::new(1.0, 0.0));
    // deterministic tilt so a symmetric start cannot sit in a null direction
    for (i, x) in v.iter_mut().enumerate() {
        *x += Complex64::new(0.0, 0.1 * (i as f64 + 1.0) / n as f64);
    }
    let mut last = 0.0;
    for _ in 0..400 {
        let mut v2 = &mh * (m * &v);
        let n2 = v2.norm();
        if n2 == 0.0 {
            return 0.0;
        }
        v2 /= Complex64::new(n2, 0.0);
        v = v2;
        if (n2.sqrt() - last).abs() <= 1e-14 * n2.sqrt().max(1.0) {
            return n2.sqrt();
        }
        last = n2.sqrt();
    }
    last
}

/// Builds `exp(c0 + Σ_i L_i a_i† + Σ_{ij} Q_{ij} a_i† a_j†) |0…0⟩` by a
/// truncated power series. `quad` must be symmetric with spectral norm below
/// 1/2; the series terminates once a term falls below 1e-14 of the
/// accumulated norm. The boundary-shell weight of the result is stored in
/// its leak accumulator.
pub fn build_quadratic_exponential(
    num_modes: usize,
    cutoff: usize,
    c0: Complex64,
    linear: &[Complex64],
    quad: &DMatrix<Complex64>,
) -> Result<FockState> {
    let dim = check_budget(num_modes, cutoff, DEFAULT_AMP_BUDGET)?;
    if linear.len() != num_modes || quad.nrows() != num_modes || quad.ncols() != num_modes {
        return Err(Error::Shape(format!(
            "linear/quadratic coefficients sized {}/{}x{} for {} modes",
            linear.len(),
            quad.nrows(),
            quad.ncols(),
            num_modes
        )));
    }
    let asym = (quad - quad.transpose()).iter().map(|z| z.norm()).fold(0.0, f64::max);
    if asym > 1e-12 {
        return Err(Error::Shape(format!(
            "quadratic coefficient matrix must be symmetric, max asymmetry {asym:.3e}"
        )));
    }
    let radius = spectral_norm(quad);
    if radius >= 0.5 {
        return Err(Error::Domain(format!(
            "quadratic coefficient spectral norm {radius:.6} is not below 1/2; \
             the series would not converge"
        )));
    }

    let one = Complex64::new(1.0, 0.0);
    let mut acc = vec![Complex64::default(); dim];
    acc[0] = one;
    let mut term = acc.clone();
    let mut next = vec![Complex64::default(); dim];
    let mut scratch = vec![Complex64::default(); dim];
    let max_iter = 8 * num_modes * cutoff + 64;
    let mut done = false;
    for k in 1..=max_iter {
        next.fill(Complex64::default());
        for (i, li) in linear.iter().enumerate() {
            ladder_pass(num_modes, cutoff, i, &term, &mut next, LadderKind::Create, *li);
        }
        for j in 0..num_modes {
            scratch.fill(Complex64::default());
            ladder_pass(num_modes, cutoff, j, &term, &mut scratch, LadderKind::Create, one);
            for i in 0..num_modes {
                let q = quad[(i, j)];
                if q != Complex64::default() {
                    ladder_pass(num_modes, cutoff, i, &scratch, &mut next, LadderKind::Create, q);
                }
            }
        }
        let scale = 1.0 / k as f64;
        for (t, n) in term.iter_mut().zip(next.iter()) {
            *t = n * scale;
        }
        for (a, t) in acc.iter_mut().zip(term.iter()) {
            *a += t;
        }
        let tn = sum_norm_sqr(&term);
        let an = sum_norm_sqr(&acc);
        if tn.sqrt() < 1e-14 * an.sqrt() {
            done = true;
            break;
        }
    }
    if !done {
        return Err(Error::Convergence(format!(
            "quadratic-exponential series still above tolerance after {max_iter} terms"
        )));
    }
    let scalar = c0.exp();
    for a in acc.iter_mut() {
        *a *= scalar;
    }
    let mut state = FockState::from_amps(num_modes, cutoff, acc, 0.0);
    state.leak = state.boundary_weight();
    Ok(state)
}

/// Expectation value ⟨state| n̂_mode |state⟩ / ⟨state|state⟩.
pub fn mean_occupation(state: &FockState, mode: usize) -> Result<f64> {
    check_mode(state, mode)?;
    let stride = mode_stride(state.num_modes, state.cutoff, mode);
    let mut acc = 0.0;
    for (i, a) in state.amps.iter().enumerate() {
        let n = (i / stride) % state.cutoff;
        acc += n as f64 * a.norm_sqr();
    }
    Ok(acc / state.norm_tracked)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn vacuum_is_unit_origin() {
        let v = vacuum_fock(3, 4).unwrap();
        assert_eq!(v.dim(), 64);
        assert_abs_diff_eq!(v.amplitude(&[0, 0, 0]).unwrap().re, 1.0, epsilon = 0.0);
        assert_abs_diff_eq!(v.norm_tracked(), 1.0, epsilon = 0.0);
        assert_eq!(v.leak(), 0.0);
    }

    #[test]
    fn budget_is_enforced() {
        match vacuum_fock(6, 40) {
            Err(Error::Budget { required, .. }) => assert_eq!(required, 4_096_000_000),
            other => panic!("expected budget error, got {other:?}"),
        }
    }

    #[test]
    fn ladder_matrix_elements() {
        let v = vacuum_fock(1, 10).unwrap();
        let mut s = v.clone();
        for n in 0..5usize {
            s = apply_ladder(&s, 0, LadderKind::Create).unwrap();
            // a† |n⟩ = √(n+1) |n+1⟩, so repeated creation gives √(n!)
            let expect: f64 = (1..=n + 1).map(|k| k as f64).product::<f64>().sqrt();
            assert_abs_diff_eq!(
                s.amplitude(&[n + 1]).unwrap().re,
                expect,
                epsilon = 1e-12
            );
        }
        let down = apply_ladder(&s, 0, LadderKind::Annihilate).unwrap();
        assert_abs_diff_eq!(
            down.amplitude(&[4]).unwrap().re / s.amplitude(&[5]).unwrap().re,
            5f64.sqrt(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn creation_from_top_level_drops_with_leak() {
        let mut top = vacuum_fock(1, 6).unwrap();
        top.set_amplitude(&[5], c(0.7, 0.0)).unwrap();
        top.set_amplitude(&[0], c(0.0, 0.0)).unwrap();
        let up = apply_ladder(&top, 0, LadderKind::Create).unwrap();
        assert_eq!(up.norm_tracked(), 0.0);
        assert_abs_diff_eq!(up.leak(), 6.0 * 0.49, epsilon = 1e-14);
    }

    #[test]
    fn commutator_is_identity_in_the_interior() {
        let mut s = vacuum_fock(2, 8).unwrap();
        s.set_amplitude(&[1, 2], c(0.4, -0.3)).unwrap();
        s.set_amplitude(&[3, 5], c(-0.2, 0.9)).unwrap();
        let aad = apply_ladder(&apply_ladder(&s, 0, LadderKind::Create).unwrap(), 0, LadderKind::Annihilate).unwrap();
        let ada = apply_ladder(&apply_ladder(&s, 0, LadderKind::Annihilate).unwrap(), 0, LadderKind::Create).unwrap();
        for i in 0..s.dim() {
            let occ = s.occupancies(i);
            if occ[0] < 7 {
                let comm = aad.amplitudes()[i] - ada.amplitudes()[i];
                assert!((comm - s.amplitudes()[i]).norm() < 1e-13, "at {occ:?}");
            }
        }
    }

    #[test]
    fn inner_is_conjugate_linear_in_first_argument() {
        let mut a = vacuum_fock(1, 4).unwrap();
        a.set_amplitude(&[1], c(0.0, 1.0)).unwrap();
        let mut b = vacuum_fock(1, 4).unwrap();
        b.set_amplitude(&[1], c(1.0, 0.0)).unwrap();
        let ab = inner(&a, &b).unwrap();
        // ⟨0| + conj(i)⟨1| against |0⟩ + |1⟩
        assert_abs_diff_eq!(ab.re, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(ab.im, -1.0, epsilon = 1e-15);
    }

    #[test]
    fn beam_splitter_quarter_and_half_mixing() {
        let one_photon = apply_ladder(&vacuum_fock(2, 5).unwrap(), 0, LadderKind::Create).unwrap();
        let swapped = apply_generator_exponential(
            &one_photon,
            &Generator::BeamSplitter { mode_a: 0, mode_b: 1, theta: std::f64::consts::FRAC_PI_2 },
        )
        .unwrap();
        assert_abs_diff_eq!(swapped.amplitude(&[0, 1]).unwrap().re, 1.0, epsilon = 1e-12);
        assert!(swapped.amplitude(&[1, 0]).unwrap().norm() < 1e-12);

        let half = apply_generator_exponential(
            &one_photon,
            &Generator::BeamSplitter { mode_a: 0, mode_b: 1, theta: std::f64::consts::FRAC_PI_4 },
        )
        .unwrap();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert_abs_diff_eq!(half.amplitude(&[1, 0]).unwrap().re, r, epsilon = 1e-12);
        assert_abs_diff_eq!(half.amplitude(&[0, 1]).unwrap().re, r, epsilon = 1e-12);
    }

    #[test]
    fn displacement_matches_coherent_closed_form() {
        let eps = c(0.7, 0.5);
        let disp = apply_generator_exponential(
            &vacuum_fock(1, 40).unwrap(),
            &Generator::Displacement { mode: 0, eps },
        )
        .unwrap();
        let pref = (-eps.norm_sqr() / 2.0).exp();
        let mut pow = c(1.0, 0.0);
        let mut fact = 1.0;
        for n in 0..40usize {
            if n > 0 {
                pow *= eps;
                fact *= n as f64;
            }
            let expect = pow * pref / fact.sqrt();
            let got = disp.amplitude(&[n]).unwrap();
            assert!((got - expect).norm() < 1e-12, "n={n}");
        }
    }

    #[test]
    fn squeeze_matches_squeezed_vacuum_closed_form() {
        // exp((r/2)(a²-a†²))|0⟩ has amplitudes sech^{1/2}(r) (-tanh r/2)^m √((2m)!)/m!
        let r = 0.5f64;
        let sq = apply_generator_exponential(
            &vacuum_fock(1, 48).unwrap(),
            &Generator::Squeeze { mode: 0, r },
        )
        .unwrap();
        let pref = (1.0 / r.cosh()).sqrt();
        for m in 0..12usize {
            let mut log_fact = 0.0;
            for k in 1..=2 * m {
                log_fact += (k as f64).ln();
            }
            let mut log_mfact = 0.0;
            for k in 1..=m {
                log_mfact += (k as f64).ln();
            }
            let mag = pref * (r.tanh() / 2.0).powi(m as i32) * (0.5 * log_fact - log_mfact).exp();
            let expect = if m % 2 == 0 { mag } else { -mag };
            let got = sq.amplitude(&[2 * m]).unwrap().re;
            assert!((got - expect).abs() < 1e-12, "m={m} got {got} expect {expect}");
        }
        assert!(sq.amplitude(&[1]).unwrap().norm() < 1e-14);
    }

    #[test]
    fn collective_squeeze_on_single_axis_equals_one_mode_squeeze() {
        let v = vacuum_fock(2, 12).unwrap();
        let a = apply_generator_exponential(
            &v,
            &Generator::CollectiveSqueeze { weights: vec![0.0, 2.5], r: 0.4 },
        )
        .unwrap();
        let b = apply_generator_exponential(&v, &Generator::Squeeze { mode: 1, r: 0.4 }).unwrap();
        for i in 0..v.dim() {
            assert!((a.amplitudes()[i] - b.amplitudes()[i]).norm() < 1e-12);
        }
    }

    #[test]
    fn quadratic_exponential_reproduces_closed_forms() {
        // pure scalar
        let q0 = DMatrix::from_element(1, 1, c(0.0, 0.0));
        let s = build_quadratic_exponential(1, 8, c(-0.25, 0.3), &[c(0.0, 0.0)], &q0).unwrap();
        let e = c(-0.25, 0.3).exp();
        assert!((s.amplitude(&[0]).unwrap() - e).norm() < 1e-14);

        // linear only: exp(eps a†)|0⟩ has amplitude eps^n/√(n!)
        let eps = c(0.4, -0.6);
        let s = build_quadratic_exponential(1, 24, c(0.0, 0.0), &[eps], &q0).unwrap();
        let mut pow = c(1.0, 0.0);
        let mut fact = 1.0;
        for n in 0..10usize {
            if n > 0 {
                pow *= eps;
                fact *= n as f64;
            }
            assert!((s.amplitude(&[n]).unwrap() - pow / fact.sqrt()).norm() < 1e-12);
        }

        // quadratic only: exp(q a†²)|0⟩ has amplitude q^m √((2m)!)/m! at level 2m
        let q = c(0.3, 0.1);
        let qm = DMatrix::from_element(1, 1, q);
        let s = build_quadratic_exponential(1, 40, c(0.0, 0.0), &[c(0.0, 0.0)], &qm).unwrap();
        for m in 0..8usize {
            let mut log_fact = 0.0;
            for k in 1..=2 * m {
                log_fact += (k as f64).ln();
            }
            let mut log_mfact = 0.0;
            for k in 1..=m {
                log_mfact += (k as f64).ln();
            }
            let expect = q.powu(m as u32) * (0.5 * log_fact - log_mfact).exp();
            assert!((s.amplitude(&[2 * m]).unwrap() - expect).norm() < 1e-10, "m={m}");
        }
    }

    #[test]
    fn quadratic_exponential_rejects_large_radius() {
        let qm = DMatrix::from_element(1, 1, c(0.6, 0.0));
        match build_quadratic_exponential(1, 10, c(0.0, 0.0), &[c(0.0, 0.0)], &qm) {
            Err(Error::Domain(msg)) => assert!(msg.contains("1/2")),
            other => panic!("expected domain error, got {other:?}"),
        }
    }

    #[test]
    fn quadratic_exponential_requires_symmetry() {
        let mut qm = DMatrix::from_element(2, 2, c(0.0, 0.0));
        qm[(0, 1)] = c(0.2, 0.0);
        match build_quadratic_exponential(2, 6, c(0.0, 0.0), &[c(0.0, 0.0); 2], &qm) {
            Err(Error::Shape(msg)) => assert!(msg.contains("symmetric")),
            other => panic!("expected shape error, got {other:?}"),
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn generator_exponentials_preserve_norm(
            theta in -1.2f64..1.2,
            re in -0.8f64..0.8,
            im in -0.8f64..0.8,
            r in -0.4f64..0.4,
        ) {
            let mut s = vacuum_fock(2, 18).unwrap();
            s.set_amplitude(&[1, 0], c(0.5, 0.1)).unwrap();
            s.set_amplitude(&[0, 2], c(-0.3, 0.2)).unwrap();
            let s = s.normalized().unwrap();
            let gates = [
                Generator::BeamSplitter { mode_a: 0, mode_b: 1, theta },
                Generator::Displacement { mode: 0, eps: c(re, im) },
                Generator::Squeeze { mode: 1, r },
            ];
            let mut cur = s;
            for g in &gates {
                cur = apply_generator_exponential(&cur, g).unwrap();
            }
            // far from the boundary these are unitary to truncation accuracy
            prop_assert!((cur.norm_tracked() - 1.0).abs() < 1e-9);
            prop_assert!(cur.leak() < 1e-9);
        }

        #[test]
        fn beam_splitter_conserves_total_photon_number(
            theta in -1.5f64..1.5,
        ) {
            let mut s = vacuum_fock(2, 12).unwrap();
            s.set_amplitude(&[2, 1], c(0.6, 0.0)).unwrap();
            s.set_amplitude(&[0, 3], c(0.0, 0.8)).unwrap();
            let s = s.normalized().unwrap();
            let out = apply_generator_exponential(
                &s,
                &Generator::BeamSplitter { mode_a: 0, mode_b: 1, theta },
            ).unwrap();
            let mut before = vec![0.0; 24];
            let mut after = vec![0.0; 24];
            for i in 0..s.dim() {
                let occ = s.occupancies(i);
                let tot = occ[0] + occ[1];
                before[tot] += s.amplitudes()[i].norm_sqr();
                after[tot] += out.amplitudes()[i].norm_sqr();
            }
            for t in 0..24 {
                prop_assert!((before[t] - after[t]).abs() < 1e-10, "total {}", t);
            }
        }
    }
}

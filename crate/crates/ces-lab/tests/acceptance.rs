//! Acceptance gate: eleven numbered end-to-end checks, one printed line each.
//! Run with `--nocapture` to see the lines for passing checks too.

use ces_lab::analysis::{
    collective_density_p, collective_density_x, completeness_mc, eigen_residuals,
    orthogonality_check, regularized_delta_width, squeeze_operator_check, su11_check,
    CollectiveWigner, EigenFlavor,
};
use ces_lab::circuits::{
    adjudicate_displacements_multi, cascade_rotation, generate_ces_circuit,
    generate_ces_circuit_gauged, generate_tripartite_circuit, multipartite_angles,
    run_circuit_fock, run_circuit_gaussian, solve_displacements_gauged, Circuit,
    DisplacementSource, GateSpec,
};
use ces_lab::fock::{self, basis_fock, vacuum_fock, FockState};
use ces_lab::gaussian::{collective_quadrature_stats, overlap_gaussian, vacuum_gaussian};
use ces_lab::states::{
    collective_cutoff_for, tripartite_ces_formula, CesFactored, CesParams, DisplacementGauge,
    ModeWeights, MultiWeights,
};
use ces_lab::tol;
use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use std::time::Instant;

fn cx(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn line(n: usize, pass: bool, detail: &str) {
    let tag = if pass { "PASS" } else { "FAIL" };
    println!("criterion {n:>2} [{tag}] {detail}");
    assert!(pass, "criterion {n} failed: {detail}");
}

fn onetwothree() -> ModeWeights {
    ModeWeights::new(1.0, 2.0, 3.0).unwrap()
}

fn rand_complex(rng: &mut StdRng, max_mag: f64) -> Complex64 {
    let mag = rng.gen_range(0.0..=max_mag);
    let phase = rng.gen_range(0.0..std::f64::consts::TAU);
    Complex64::from_polar(mag, phase)
}

fn relative_leak(s: &FockState) -> f64 {
    s.leak() / s.norm_tracked()
}

fn fmt_slice(values: &[f64]) -> String {
    let parts: Vec<String> = values.iter().map(|v| format!("{v:.3e}")).collect();
    parts.join(", ")
}

fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, intervals: usize) -> f64 {
    let n = intervals + intervals % 2;
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for k in 1..n {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + k as f64 * h);
    }
    acc * h / 3.0
}

/// Ladder eigenrelations hold on 20 random parameter sets at strong
/// regularization. The factored representation keeps the relative modes
/// closed-form, so the residual measures the relations themselves rather
/// than grid truncation; the collective factor is sized by the tail rule.
#[test]
fn criterion_01_ladder_relations_on_random_parameter_sets() {
    let start = Instant::now();
    let mut rng = StdRng::seed_from_u64(101);
    let reg_r = 2.0;
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let w = ModeWeights::new(
            rng.gen_range(0.5..=3.0),
            rng.gen_range(0.5..=3.0),
            rng.gen_range(0.5..=3.0),
        )
        .unwrap();
        let betas = [rand_complex(&mut rng, 1.0), rand_complex(&mut rng, 1.0)];
        let x = rng.gen_range(-1.0..=1.0);
        let mw = w.as_multi();
        let eps =
            solve_displacements_gauged(&mw, &betas, x, reg_r, DisplacementGauge::IdealLimit)
                .unwrap();
        let peak = eps.iter().map(|e| e.norm()).fold(0.0, f64::max);
        let cc = collective_cutoff_for(reg_r, peak * 3f64.sqrt());
        let f = CesFactored::build(&mw, &betas, x, reg_r, cc, DisplacementGauge::IdealLimit)
            .unwrap();
        for r in f.ladder_residuals().unwrap() {
            worst = worst.max(r);
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let pass = worst <= tol::LADDER_REL && secs < 60.0;
    line(
        1,
        pass,
        &format!(
            "20 random sets at reg_r 2: worst relative ladder residual {worst:.3e} (tol {:.0e}), {secs:.2}s (< 60s)",
            tol::LADDER_REL
        ),
    );
}

/// The collective-quadrature residual decays like e^{-reg_r/2}: strictly
/// decreasing over reg_r in {0.5, 1, 1.5, 2} with successive ratios inside
/// [e^{-1}/2, 2e^{-1}].
#[test]
fn criterion_02_quadrature_residual_decay() {
    let mw = onetwothree().as_multi();
    let betas = [cx(0.4, -0.3), cx(-0.2, 0.6)];
    let regs = [0.5, 1.0, 1.5, 2.0];
    let residuals: Vec<f64> = regs
        .iter()
        .map(|&r| {
            let cc = collective_cutoff_for(r, 3.0);
            CesFactored::build(&mw, &betas, 0.7, r, cc, DisplacementGauge::IdealLimit)
                .unwrap()
                .quadrature_residual()
        })
        .collect();
    let lo = (-1.0f64).exp() / 2.0;
    let hi = 2.0 * (-1.0f64).exp();
    let mut pass = true;
    let mut ratios = Vec::new();
    for k in 0..residuals.len() - 1 {
        let ratio = residuals[k + 1] / residuals[k];
        pass &= residuals[k + 1] < residuals[k] && ratio >= lo && ratio <= hi;
        ratios.push(ratio);
    }
    line(
        2,
        pass,
        &format!(
            "residuals [{}] strictly decreasing, ratios [{}] within [{lo:.4}, {hi:.4}]",
            fmt_slice(&residuals),
            fmt_slice(&ratios)
        ),
    );
}

/// The closed-form tripartite state and the circuit state describe the same
/// ray: normalized overlap magnitude at least 1 - 1e-6 on 10 random sets.
/// The circuit displacement scale is gauged to match the kernel at finite
/// reg_r; both routes must hold their truncation leak below the admissible
/// bound for the comparison to count.
#[test]
fn criterion_03_formula_route_matches_circuit_route() {
    let mut rng = StdRng::seed_from_u64(303);
    let cutoff = 30;
    let mut worst = 1.0f64;
    for _ in 0..10 {
        let w = ModeWeights::new(
            rng.gen_range(0.5..=2.0),
            rng.gen_range(0.5..=2.0),
            rng.gen_range(0.5..=2.0),
        )
        .unwrap();
        let beta = rand_complex(&mut rng, 0.8);
        let gamma = rand_complex(&mut rng, 0.8);
        let x = rng.gen_range(-0.8..=0.8);
        let reg_r = rng.gen_range(0.3..=0.55);
        let params = CesParams::new(beta, gamma, x, reg_r).unwrap();
        let formula = tripartite_ces_formula(&w, &params, cutoff).unwrap();
        let circuit = generate_ces_circuit_gauged(
            &w.as_multi(),
            &[beta, gamma],
            x,
            reg_r,
            DisplacementGauge::MatchKernel,
        )
        .unwrap();
        let state = run_circuit_fock(&circuit, cutoff).unwrap();
        for s in [&formula, &state] {
            let leak = relative_leak(s);
            assert!(
                leak < tol::LEAK_ADMISSIBLE,
                "route comparison needs admissible truncation, leak {leak:.3e}"
            );
        }
        let overlap =
            fock::inner(&formula, &state).unwrap().norm() / (formula.norm() * state.norm());
        worst = worst.min(overlap);
    }
    let pass = worst >= 1.0 - tol::ROUTE_OVERLAP;
    line(
        3,
        pass,
        &format!(
            "10 random sets at cutoff {cutoff}: worst |overlap| {worst:.9} (needs >= {:.9})",
            1.0 - tol::ROUTE_OVERLAP
        ),
    );
}

/// At weights (1,2,3) with beta = 1, gamma = i, x = 0.7 the constraint-solved
/// displacements satisfy every eigenrelation row while the printed tripartite
/// closed form misses at least one ladder relation by more than 1e-2
/// relative. Both verdicts come from the same adjudication report.
#[test]
fn criterion_04_displacement_adjudication_at_canonical_point() {
    let mw = onetwothree().as_multi();
    let rep = adjudicate_displacements_multi(&mw, &[cx(1.0, 0.0), cx(0.0, 1.0)], 0.7, 2.0)
        .unwrap();
    let solve = rep.verdict(DisplacementSource::ConstraintSolve).unwrap();
    let direct = rep.verdict(DisplacementSource::TripartiteDirect).unwrap();
    let solve_max = solve.ladder_residuals.iter().copied().fold(0.0, f64::max);
    let direct_max = direct.ladder_residuals.iter().copied().fold(0.0, f64::max);
    let pass = solve_max <= tol::ADJUDICATE
        && solve.collective_offset <= tol::ADJUDICATE
        && direct_max > tol::ADJUDICATE_FAIL;
    line(
        4,
        pass,
        &format!(
            "constraint solve: max ladder {solve_max:.3e}, collective offset {:.3e} (tol {:.0e}); printed direct form: max ladder {direct_max:.3e} (must exceed {:.0e})",
            solve.collective_offset,
            tol::ADJUDICATE,
            tol::ADJUDICATE_FAIL
        ),
    );
}

fn random_shaped_circuit(rng: &mut StdRng) -> Circuit {
    let mut gates = vec![GateSpec::Squeeze {
        mode: 0,
        r: rng.gen_range(-0.45..=0.45),
    }];
    for _ in 0..rng.gen_range(1..=2usize) {
        let a = rng.gen_range(0..3usize);
        let b = (a + rng.gen_range(1..3usize)) % 3;
        gates.push(GateSpec::BeamSplitter {
            mode_a: a,
            mode_b: b,
            theta: rng.gen_range(0.2..=1.4),
        });
    }
    for _ in 0..rng.gen_range(1..=3usize) {
        gates.push(GateSpec::Displacement {
            mode: rng.gen_range(0..3usize),
            eps: rand_complex(rng, 0.8),
        });
    }
    // provenance tag is reporting metadata; these circuits are hand-built
    Circuit {
        num_modes: 3,
        gates,
        provenance: DisplacementSource::ConstraintSolve,
    }
}

/// Both engines agree on 20 random well-shaped circuits: collective means
/// and variances within 1e-6, and pure-state overlaps |<a|b>|^2 within 1e-6
/// of the Gaussian closed form, with grid leak below the admissible bound.
#[test]
fn criterion_05_cross_engine_agreement_on_random_circuits() {
    let mut rng = StdRng::seed_from_u64(505);
    let w = onetwothree();
    let mut worst_moment = 0.0f64;
    let mut worst_overlap = 0.0f64;
    let mut worst_leak = 0.0f64;
    for pair in 0..10usize {
        let cutoff = 24 + (pair % 7);
        let mut runs = Vec::new();
        for _ in 0..2 {
            let circuit = random_shaped_circuit(&mut rng);
            let fs = run_circuit_fock(&circuit, cutoff).unwrap();
            let gs = run_circuit_gaussian(&circuit).unwrap();
            let leak = relative_leak(&fs);
            worst_leak = worst_leak.max(leak);
            assert!(leak < tol::LEAK_ADMISSIBLE, "leak {leak:.3e} at cutoff {cutoff}");
            let (mf, sf) = CollectiveWigner::from_fock(&fs, &w).unwrap().display_moments();
            let (mg, sg) = CollectiveWigner::from_gaussian(&gs, &w)
                .unwrap()
                .display_moments();
            for i in 0..2 {
                worst_moment = worst_moment
                    .max((mf[i] - mg[i]).abs())
                    .max((sf[i] * sf[i] - sg[i] * sg[i]).abs());
            }
            runs.push((fs, gs));
        }
        let overlap_fock = fock::inner(&runs[0].0, &runs[1].0).unwrap().norm_sqr()
            / (runs[0].0.norm_tracked() * runs[1].0.norm_tracked());
        let overlap_gauss = overlap_gaussian(&runs[0].1, &runs[1].1).unwrap();
        worst_overlap = worst_overlap.max((overlap_fock - overlap_gauss).abs());
    }
    let pass = worst_moment <= tol::CROSS_ENGINE && worst_overlap <= tol::CROSS_ENGINE;
    line(
        5,
        pass,
        &format!(
            "20 circuits: worst collective mean/variance deviation {worst_moment:.3e}, worst overlap deviation {worst_overlap:.3e} (tol {:.0e}), worst leak {worst_leak:.3e}",
            tol::CROSS_ENGINE
        ),
    );
}

/// The standard two-boson generators close on the interior window at weights
/// (1,2,3) and cutoff 20 with defects at most 1e-10; the printed variants'
/// defects are reported alongside.
#[test]
fn criterion_06_su11_standard_generators_close() {
    let rep = su11_check(&onetwothree(), 20).unwrap();
    let std_max = rep.standard_defects.iter().copied().fold(0.0, f64::max);
    let printed_max = rep.printed_defects.iter().copied().fold(0.0, f64::max);
    let pass = std_max <= tol::SU11_DEFECT
        && rep.standard_closes
        && rep.mode_commutator_defect <= 1e-12;
    line(
        6,
        pass,
        &format!(
            "standard defects max {std_max:.3e} (tol {:.0e}, interior total <= {}), printed variants max {printed_max:.3e}",
            tol::SU11_DEFECT,
            rep.interior_max_total
        ),
    );
}

/// The factored squeeze agrees with the exponentiated generator on the
/// interior window at l = e and cutoff 25, preserves the vacuum norm, and
/// its squeezed vacuum matches the prefactor-free closed form.
#[test]
fn criterion_07_factored_squeeze_matches_generator() {
    let rep = squeeze_operator_check(&onetwothree(), std::f64::consts::E, 25).unwrap();
    let norm_dev = (rep.unitary_vacuum_norm - 1.0).abs();
    let pass = rep.factored_vs_generator_defect <= tol::SQUEEZE_DEFECT
        && norm_dev <= tol::SQUEEZE_VACUUM
        && rep.squeezed_vacuum_overlap >= 1.0 - tol::SQUEEZE_VACUUM;
    line(
        7,
        pass,
        &format!(
            "interior defect {:.3e} (tol {:.0e}), vacuum norm deviation {norm_dev:.3e}, squeezed-vacuum overlap {:.12}",
            rep.factored_vs_generator_defect,
            tol::SQUEEZE_DEFECT,
            rep.squeezed_vacuum_overlap
        ),
    );
}

/// Overlap width fits match the regularized-delta prediction: within 5% of
/// (8/3) e^{-2 reg_r} at reg_r = 2, and shrinking by e^{-2} per unit reg_r
/// within 10% across reg_r in {1, 2, 3}.
#[test]
fn criterion_08_overlap_width_tracks_regularized_delta() {
    let w = onetwothree();
    let width_at = |reg_r: f64| -> f64 {
        let p = CesParams::new(cx(0.4, 0.0), cx(0.0, 0.3), 0.2, reg_r).unwrap();
        let cc = collective_cutoff_for(reg_r, 2.5);
        orthogonality_check(&w, &p, &p, cc)
            .unwrap()
            .fitted_delta_width
            .expect("width fit")
    };
    let widths = [width_at(1.0), width_at(2.0), width_at(3.0)];
    let expected = regularized_delta_width(2.0);
    let fit_rel = (widths[1] - expected).abs() / expected;
    let decay = (-2.0f64).exp();
    let r10 = (widths[1] / widths[0] - decay).abs() / decay;
    let r21 = (widths[2] / widths[1] - decay).abs() / decay;
    let pass = fit_rel <= tol::DELTA_WIDTH_REL
        && r10 <= tol::DELTA_DECAY_REL
        && r21 <= tol::DELTA_DECAY_REL;
    line(
        8,
        pass,
        &format!(
            "fitted width {:.6e} vs {expected:.6e} (rel {fit_rel:.4}, tol {}), decay ratio deviations {r10:.4}/{r21:.4} (tol {})",
            widths[1],
            tol::DELTA_WIDTH_REL,
            tol::DELTA_DECAY_REL
        ),
    );
}

/// Monte Carlo Gram matrix of {|000>, |100>, |010>} against the kernel-state
/// resolution at reg_r = 3 with 1e6 seeded samples: diagonal entries within
/// 5% of a common constant, off-diagonal entries within 3 standard errors of
/// zero, under five minutes.
#[test]
fn criterion_09_completeness_monte_carlo() {
    let start = Instant::now();
    let trio = [
        basis_fock(6, &[0, 0, 0]).unwrap(),
        basis_fock(6, &[1, 0, 0]).unwrap(),
        basis_fock(6, &[0, 1, 0]).unwrap(),
    ];
    let g = completeness_mc(&onetwothree(), &trio, 3.0, 1_000_000, 42).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let spread = g.diagonal_spread();
    let off = g.max_offdiagonal_sigma();
    let resolved = !g.inconclusive(tol::MC_DIAGONAL_REL);
    let pass = spread <= tol::MC_DIAGONAL_REL && off <= tol::MC_SIGMA && resolved && secs < 300.0;
    line(
        9,
        pass,
        &format!(
            "diagonal spread {spread:.4} (tol {}), max off-diagonal {off:.2} sigma (tol {}), measure constant {:.4}, {secs:.1}s (< 300s)",
            tol::MC_DIAGONAL_REL,
            tol::MC_SIGMA,
            g.measure_constant
        ),
    );
}

fn marginal_agreement(
    cw: &CollectiveWigner,
    gs: &ces_lab::gaussian::GaussianState,
    w: &ModeWeights,
) -> (f64, f64) {
    let (means, sigmas) = cw.display_moments();
    let mut dev = 0.0f64;
    for k in -2..=2 {
        let x = means[0] + k as f64 * sigmas[0];
        dev = dev.max((cw.marginal_x(x) - collective_density_x(gs, w, x).unwrap()).abs());
        let p = means[1] + k as f64 * sigmas[1];
        dev = dev.max((cw.marginal_p(p) - collective_density_p(gs, w, p).unwrap()).abs());
    }
    let mass = simpson(
        |x| cw.marginal_x(x),
        means[0] - 5.0 * sigmas[0],
        means[0] + 5.0 * sigmas[0],
        100,
    );
    (dev, mass)
}

/// The density-matrix Wigner marginal matches the Gaussian collective
/// density within 1e-4 pointwise for the vacuum and for one displaced
/// entangled state, and the normalized marginal carries unit mass to 1e-4.
#[test]
fn criterion_10_wigner_marginals_match_collective_density() {
    let w = onetwothree();
    // the 5-sigma corner of the vacuum band reaches |alpha|^2 of about 12,
    // so even the vacuum needs a deep grid for the parity series
    let vac_f = vacuum_fock(3, 32).unwrap();
    let vac_g = vacuum_gaussian(3);
    let cw_vac = CollectiveWigner::from_fock(&vac_f, &w).unwrap();
    let (dev_vac, mass_vac) = marginal_agreement(&cw_vac, &vac_g, &w);

    // weak regularization, moderate displacements and a deep grid keep the
    // displaced-number series converged across the whole 5-sigma band; the
    // corner of the band needs photon numbers up to roughly |alpha|^2 plus
    // a five-sigma Poisson tail
    let params = CesParams::new(cx(0.2, 0.1), cx(-0.1, 0.2), 0.4, 0.3).unwrap();
    let circuit =
        generate_tripartite_circuit(&w, &params, DisplacementSource::ConstraintSolve).unwrap();
    let fs = run_circuit_fock(&circuit, 48).unwrap();
    assert!(relative_leak(&fs) < tol::LEAK_ADMISSIBLE);
    let gs = run_circuit_gaussian(&circuit).unwrap();
    let cw_ces = CollectiveWigner::from_fock(&fs, &w).unwrap();
    let (dev_ces, mass_ces) = marginal_agreement(&cw_ces, &gs, &w);

    let dev = dev_vac.max(dev_ces);
    let mass_dev = (mass_vac - 1.0).abs().max((mass_ces - 1.0).abs());
    let pass = dev <= tol::WIGNER_MARGINAL && mass_dev <= tol::WIGNER_MARGINAL;
    line(
        10,
        pass,
        &format!(
            "worst pointwise marginal deviation {dev:.3e} (tol {:.0e}), worst unit-mass deviation {mass_dev:.3e}",
            tol::WIGNER_MARGINAL
        ),
    );
}

fn multipartite_case(
    weights: Vec<f64>,
    betas: &[Complex64],
    x: f64,
    cutoff: usize,
) -> (f64, f64, f64, f64) {
    // the squeezed tail must clear the small stated grids: the dense-state
    // ladder residual floor scales like the square root of the boundary-shell
    // weight, so the collective squeezing has to stay weak
    let reg_r = 0.05;
    let n = weights.len();
    let mw = MultiWeights::new(weights).unwrap();
    let circuit =
        generate_ces_circuit(&mw, betas, x, reg_r, DisplacementSource::ConstraintSolve).unwrap();
    let fs = run_circuit_fock(&circuit, cutoff).unwrap();
    let leak = relative_leak(&fs);
    let ladder = eigen_residuals(&fs, &mw, betas, x, EigenFlavor::Position, reg_r)
        .unwrap()
        .max_ladder_relative();
    let gs = run_circuit_gaussian(&circuit).unwrap();
    let (mean_x, _, _, _) = collective_quadrature_stats(&gs, mw.mu()).unwrap();
    let mean_dev = (mean_x - mw.lambda() * x / 2f64.sqrt()).abs();
    let thetas = multipartite_angles(&mw).unwrap();
    let rotation = cascade_rotation(n, &thetas);
    let scale = (n as f64).sqrt() * mw.lambda();
    let angle_dev = (0..n)
        .map(|i| (rotation[(i, 0)] - mw.mu()[i] / scale).abs())
        .fold(0.0, f64::max);
    (leak, ladder, mean_dev, angle_dev)
}

/// Four- and five-mode circuits at their stated cutoffs satisfy every
/// relative ladder relation, reproduce the collective mean on the Gaussian
/// engine, and reconstruct the cascade column from the weights exactly.
/// Weak regularization keeps the stated grids admissible.
#[test]
fn criterion_11_multipartite_circuits() {
    let four = multipartite_case(
        vec![1.0, 1.5, 0.8, 1.2],
        &[cx(0.2, 0.1), cx(-0.15, 0.2), cx(0.1, -0.1)],
        0.4,
        10,
    );
    let five = multipartite_case(
        vec![1.0, 1.2, 0.7, 1.3, 0.9],
        &[cx(0.08, 0.05), cx(-0.05, 0.08), cx(0.05, -0.03), cx(0.03, 0.05)],
        0.15,
        8,
    );
    let leak = four.0.max(five.0);
    let ladder = four.1.max(five.1);
    let mean_dev = four.2.max(five.2);
    let angle_dev = four.3.max(five.3);
    let pass = leak < tol::LEAK_ADMISSIBLE
        && ladder <= tol::LADDER_REL
        && mean_dev <= tol::CROSS_ENGINE
        && angle_dev <= 1e-12;
    line(
        11,
        pass,
        &format!(
            "N=4 (cutoff 10) and N=5 (cutoff 8): worst ladder {ladder:.3e} (tol {:.0e}), collective mean deviation {mean_dev:.3e}, cascade column deviation {angle_dev:.3e} (tol 1e-12), leak {leak:.3e}",
            tol::LADDER_REL
        ),
    );
}

/// Interior squeeze defect falls as the grid grows; the window rule keeps
/// the comparison region clear of the boundary at every size.
#[test]
fn invariant_squeeze_defect_chain_decreases() {
    let w = onetwothree();
    let defects: Vec<f64> = [12, 20, 30]
        .iter()
        .map(|&c| {
            squeeze_operator_check(&w, std::f64::consts::E, c)
                .unwrap()
                .factored_vs_generator_defect
        })
        .collect();
    assert!(
        defects[1] < defects[0] && defects[2] < defects[1],
        "defect chain [{}] must decrease",
        fmt_slice(&defects)
    );
}

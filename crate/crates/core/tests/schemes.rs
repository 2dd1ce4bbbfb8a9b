mod common;

use bumpfield::assumptions::{check_posterior, check_static, compute_m, AssumptionId, ScanConfig};
use bumpfield::dynamics::{evolve, probe_stability, stationarity_residual, EvolutionState, Verdict};
use bumpfield::numerics::{Grid, SampledFunction};
use bumpfield::scheme_direct::{
    extend_bump, iterate_direct, level_crossings, BumpSolution, DirectConfig, DirectScheme,
};
use bumpfield::scheme_width::{
    choose_k, cross_validate, reconstruct_bump, reconstruct_u_delta, WidthConfig, WidthScheme,
};
use bumpfield::FiringRate;

use common::*;

fn reference_bump() -> (SampledFunction, BumpSolution) {
    let (k, r, p) = (kernel(), rate(), pair());
    let out = iterate_direct(&k, &r, H, &p, &DirectConfig::default()).unwrap();
    let bump = extend_bump(&k, &r, H, &p, &out.upper, 3.0, 1201).unwrap();
    (out.upper, bump)
}

#[test]
fn static_assumptions_on_reference_configuration() {
    let rep = check_static(&kernel(), &rate(), H, TAU, &pair(), &ScanConfig::default()).unwrap();
    for id in [AssumptionId::A2, AssumptionId::A3, AssumptionId::A3pp, AssumptionId::A5] {
        assert!(rep.holds(id), "{id}: {:?}", rep.get(id));
    }
    // the A4 bound does not hold near delta_0 for this configuration
    let a4 = rep.get(AssumptionId::A4).unwrap();
    assert!(!a4.holds);
    assert!(a4.worst_margin < -0.05 && a4.worst_margin > -0.15);
    assert!((a4.witness[0] - pair().hi()).abs() < 0.05);
}

#[test]
fn a3pp_implies_a3_and_a3p() {
    let (k, r, p) = (kernel(), rate(), pair());
    let rep = check_static(&k, &r, H, TAU, &p, &ScanConfig::default()).unwrap();
    assert!(rep.holds(AssumptionId::A3pp));
    assert!(rep.holds(AssumptionId::A3));
    let w = WidthScheme::new(&k, &r, H, &p, &WidthConfig::default())
        .unwrap()
        .iterate(&WidthConfig::default())
        .unwrap();
    assert!(w.posterior.holds(AssumptionId::A3pPosterior));
}

#[test]
fn margins_stable_under_scan_refinement() {
    let (k, r, p) = (kernel(), rate(), pair());
    let coarse = check_static(&k, &r, H, TAU, &p, &ScanConfig { n: 201, far_cutoff: None }).unwrap();
    let fine = check_static(&k, &r, H, TAU, &p, &ScanConfig { n: 401, far_cutoff: None }).unwrap();
    // Lipschitz constants of the scanned quantities are below 10 here
    let spacing = (p.hi() - p.lo()) / 200.0;
    for (id, c) in &coarse.records {
        let f = &fine.records[id];
        assert!(
            (c.worst_margin - f.worst_margin).abs() < 10.0 * spacing * 10.0,
            "{id}: {} vs {}",
            c.worst_margin,
            f.worst_margin
        );
    }
}

#[test]
fn m_and_auto_k() {
    let p = pair();
    let m = compute_m(&kernel(), p.lo(), p.hi(), 2001).unwrap();
    let k = choose_k(m, 0.9).unwrap();
    assert!(k < 1.0 / m && k > 0.0);
}

#[test]
fn scheme_one_converges_to_unique_decreasing_fixed_point() {
    let (k, r, p) = (kernel(), rate(), pair());
    let cfg = DirectConfig::default();
    let scheme = DirectScheme::new(&k, &r, H, &p, cfg.grid_n).unwrap();
    let out = scheme.iterate(&cfg).unwrap();
    assert!(out.trace.converged);
    assert!(out.upper.max_abs_diff(&out.lower) < cfg.tol);
    let v = out.upper.values();
    assert!(v.windows(2).all(|w| w[1] < w[0]));
    // error sequence non-increasing
    assert!(out.trace.errors.windows(2).all(|e| e[1] <= e[0] + 1e-9));
    // fixed-point residual
    let again = scheme.apply(&out.upper).unwrap();
    assert!(again.max_abs_diff(&out.upper) <= cfg.tol);
}

#[test]
fn scheme_one_grid_refinement() {
    let (k, r, p) = (kernel(), rate(), pair());
    let a = iterate_direct(&k, &r, H, &p, &DirectConfig { grid_n: 201, ..Default::default() }).unwrap();
    let b = iterate_direct(&k, &r, H, &p, &DirectConfig { grid_n: 401, ..Default::default() }).unwrap();
    // every second fine node is a coarse node
    let diff = a
        .upper
        .values()
        .iter()
        .zip(b.upper.values().iter().step_by(2))
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max);
    assert!(diff < 1e-6, "{diff}");
}

#[test]
fn extended_bump_shape() {
    let (_, bump) = reference_bump();
    let p = pair();
    assert!(p.lo() < bump.delta_tau && bump.delta_tau < bump.delta_zero && bump.delta_zero < p.hi());
    let v = bump.profile.values();
    let mid = v.len() / 2;
    assert_eq!(bump.profile.max(), v[mid]);
    assert!(v[mid] > H + TAU);
    assert!(bump.asymmetry() < 1e-9);
}

#[test]
fn crossings_at_the_defining_levels() {
    let (_, bump) = reference_bump();
    let xs = level_crossings(&bump, &[H, H + TAU, H + TAU / 2.0]).unwrap();
    assert!((xs[0] - bump.delta_zero).abs() < 1e-8);
    assert!((xs[1] - bump.delta_tau).abs() < 1e-8);
    assert!(xs[2] > bump.delta_tau && xs[2] < bump.delta_zero);
}

#[test]
fn scheme_two_reference_run() {
    let (k, r, p) = (kernel(), rate(), pair());
    let cfg = WidthConfig::default();
    let scheme = WidthScheme::new(&k, &r, H, &p, &cfg).unwrap();
    let mut sandwich_ok = true;
    let mut prev: Option<(SampledFunction, SampledFunction)> = None;
    let out = scheme
        .iterate_with(&cfg, |_, lo, up| {
            if let Some((plo, pup)) = &prev {
                for i in 0..lo.values().len() {
                    let (a, b, c, d) = (plo.values()[i], lo.values()[i], up.values()[i], pup.values()[i]);
                    sandwich_ok &= a <= b + 1e-10 && b <= c + 1e-10 && c <= d + 1e-10;
                }
            }
            prev = Some((lo.clone(), up.clone()));
        })
        .unwrap();
    assert!(sandwich_ok);
    assert!(out.trace.converged);
    assert!(out.upper.max_abs_diff(&out.lower) < cfg.tol);
    assert!(out.decreasing);
    let st = 0.501_187_755_029_015_9;
    assert!(out.upper.min() >= st && out.upper.max() <= p.hi());
    assert!(out.posterior.all_hold(), "{}", out.posterior.to_table());
    // defining property u_Delta(Delta(t)) = t + h
    for (t, d) in out.upper.iter() {
        assert!((scheme.u_delta(&out.upper, d) - t - H).abs() <= 10.0 * cfg.tol);
    }
    let at_tau = *out.upper.values().last().unwrap();
    let u = reconstruct_u_delta(&k, &r, &out.upper, at_tau).unwrap();
    assert!((u - H - TAU).abs() < 1e-5);
}

#[test]
fn profile_derivative_matches_closed_form() {
    let (k, r, p) = (kernel(), rate(), pair());
    let cfg = WidthConfig::default();
    let out = WidthScheme::new(&k, &r, H, &p, &cfg).unwrap().iterate(&cfg).unwrap();
    let prof = &out.upper;
    let g = prof.grid();
    let dt = g.spacing();
    let v = prof.values();
    // inner integral with the same profile, trapezoid in xi
    for i in [20, 100, 180] {
        let fd = (v[i + 1] - v[i - 1]) / (2.0 * dt);
        let integral: f64 = (0..v.len())
            .map(|j| {
                let w = if j == 0 || j == v.len() - 1 { 0.5 } else { 1.0 };
                w * dt * r.density(g.point(j)).unwrap() * k.dphi_dx(v[i], v[j])
            })
            .sum();
        assert!((fd - 1.0 / integral).abs() < 10.0 * dt, "{fd} vs {}", 1.0 / integral);
    }
}

#[test]
fn reconstructed_and_extended_bumps_agree() {
    let (k, r, p) = (kernel(), rate(), pair());
    let (_, bump) = reference_bump();
    let cfg = WidthConfig::default();
    let out = WidthScheme::new(&k, &r, H, &p, &cfg).unwrap().iterate(&cfg).unwrap();
    let rec = reconstruct_bump(&k, &r, H, &out.upper, 3.0, 1201).unwrap();
    assert!(rec.profile.max_abs_diff(&bump.profile) < 1e-2);
    let first = out.upper.values()[0];
    let last = *out.upper.values().last().unwrap();
    assert!((rec.delta_zero - first).abs() < 1e-6);
    assert!((rec.delta_tau - last).abs() < 1e-6);
    assert!(cross_validate(&bump, &out.upper).unwrap() <= 5e-3);
    // a uniform 1 % stretch of the profile shows up as a 1 % gap
    let stretched = SampledFunction::new(*out.upper.grid(), out.upper.values().iter().map(|d| d * 1.01).collect()).unwrap();
    assert!((cross_validate(&bump, &stretched).unwrap() - 0.01).abs() < 1e-4);
}

#[test]
fn posterior_on_constant_upper_profile() {
    let g = Grid::new(0.0, TAU, 41).unwrap();
    let prof = SampledFunction::constant(g, pair().hi()).unwrap();
    let rep = check_posterior(&kernel(), &rate(), H, TAU, &prof, &ScanConfig::default()).unwrap();
    assert!(rep.holds(AssumptionId::A3pPosterior));
}

#[test]
fn stationary_bump_stays_put() {
    let (k, r) = (kernel(), rate());
    let (_, bump) = reference_bump();
    assert!(stationarity_residual(&k, &r, H, &bump.profile) <= 1e-4);
    let end = evolve(&k, &r, H, &EvolutionState::new(bump.profile.clone()), 0.05, 400).unwrap();
    assert!(end.field.max_abs_diff(&bump.profile) < 1e-4);
}

#[test]
fn zero_amplitude_probe_returns() {
    let (k, r) = (kernel(), rate());
    let (_, bump) = reference_bump();
    let (probe, _) = probe_stability(&k, &r, H, &bump, 0.0, 10.0, 0.05).unwrap();
    assert_eq!(probe.verdict, Verdict::Returned);
    assert!(probe.max_deviation < 1e-6);
}

#[test]
fn unstable_heaviside_bump_departs() {
    let k = kernel();
    let p = pair();
    let b = BumpSolution::heaviside(&k, H + TAU, p.lo(), 3.0, 1201).unwrap();
    let step = FiringRate::heaviside(0.0).unwrap();
    let (probe, _) = probe_stability(&k, &step, H + TAU, &b, 1e-3, 50.0, 0.05).unwrap();
    assert_eq!(probe.verdict, Verdict::Departed);
    assert!(probe.max_deviation > 0.1);
}

#[test]
fn evolution_commutes_with_even_grid_shifts() {
    let (k, r) = (kernel(), rate());
    let grid = Grid::new(-4.0, 4.0, 801).unwrap();
    let (_, bump) = reference_bump();
    let base = SampledFunction::from_fn(grid, |x| {
        bumpfield::numerics::interpolate(&bump.profile, x.clamp(-3.0, 3.0)).unwrap()
    })
    .unwrap();
    let shift = 20;
    let v = base.values();
    let n = v.len();
    let shifted: Vec<f64> = (0..n).map(|i| if i >= shift { v[i - shift] } else { v[0] }).collect();
    let shifted = SampledFunction::new(grid, shifted).unwrap();
    let a = evolve(&k, &r, H, &EvolutionState::new(base), 0.05, 100).unwrap();
    let b = evolve(&k, &r, H, &EvolutionState::new(shifted), 0.05, 100).unwrap();
    for i in shift..n {
        assert_eq!(b.field.values()[i], a.field.values()[i - shift], "node {i}");
    }
}

#[test]
fn halving_dt_changes_state_by_order_dt() {
    let (k, r) = (kernel(), rate());
    let grid = Grid::new(-3.0, 3.0, 601).unwrap();
    let init = SampledFunction::from_fn(grid, |x| 0.25 * (-2.0 * x * x).exp()).unwrap();
    let a = evolve(&k, &r, H, &EvolutionState::new(init.clone()), 0.1, 20).unwrap();
    let b = evolve(&k, &r, H, &EvolutionState::new(init.clone()), 0.05, 40).unwrap();
    let c = evolve(&k, &r, H, &EvolutionState::new(init), 0.025, 80).unwrap();
    let d1 = a.field.max_abs_diff(&b.field);
    let d2 = b.field.max_abs_diff(&c.field);
    assert!(d1 > 0.0 && d2 < 0.7 * d1, "{d1} {d2}");
}

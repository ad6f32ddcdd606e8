use edscat::alternate::{build_alt_kernel, invert_alternate, solve_alt, zero_energy_jost};
use edscat::direct::{
    find_bound_states, integrate_jost, scattering_coefficients, simple_norming_constants, transmission_denominator,
    BoundStateSearchRegion, DirectConfig,
};
use edscat::gauge::{compute_gauge, to_ps, to_uv};
use edscat::inverse::{
    build_auxiliary_data, invert, recover_phase, reflectionless_data, EnergyDependentData, InversionConfig,
};
use edscat::marchenko::{
    build_kernel, build_kernel_from_data, nystrom_solution, nystrom_solve, recover_potentials, KernelConfig,
    NystromConfig,
};
use edscat::model::{
    build_triplets, BoundState, BoundStateTriplets, JostKind, PotentialPair, SpatialGrid, SpectralAxis, SpectralGrid,
    Variant,
};
use edscat::numerics::{max_abs, max_abs_diff, tail_integral};
use num_complex::Complex64 as C64;
use std::f64::consts::PI;

fn gaussian(grid: SpatialGrid) -> PotentialPair {
    PotentialPair::from_fn(
        grid,
        Variant::EnergyDependent,
        |x| C64::new((-x * x).exp(), 0.0),
        |x| C64::new(0.5 * (-x * x).exp(), 0.0),
    )
    .unwrap()
}

#[test]
fn zero_energy_closed_forms_match_integration() {
    let g = SpatialGrid::new(-8.0, 8.0, 801).unwrap();
    let p = PotentialPair::from_fn(
        g,
        Variant::EnergyDependent,
        |x| C64::new((-x * x).exp(), 0.3 * x * (-x * x).exp()),
        |x| C64::new(0.5 * (-x * x).exp(), 0.0),
    )
    .unwrap();
    let gd = compute_gauge(&p).unwrap();
    let z = zero_energy_jost(&p, &gd).unwrap();
    let cfg = DirectConfig::default();
    let zero = C64::new(0.0, 0.0);
    let cases = [
        (to_uv(&p, &gd).unwrap(), &z.psi_uv, &z.psi_bar_uv),
        (to_ps(&p, &gd).unwrap(), &z.psi_ps, &z.psi_bar_ps),
    ];
    for (pot, psi, psi_bar) in cases {
        let a = integrate_jost(&pot, zero, JostKind::Psi, &cfg).unwrap().psi.unwrap();
        let b = integrate_jost(&pot, zero, JostKind::PsiBar, &cfg).unwrap().psi_bar.unwrap();
        for k in 0..g.len() {
            for c in 0..2 {
                assert!((a[k][c] - psi[k][c]).norm() < 1e-6, "{:?} psi at {k}", pot.variant);
                assert!((b[k][c] - psi_bar[k][c]).norm() < 1e-6, "{:?} psibar at {k}", pot.variant);
            }
        }
    }
}

#[test]
fn alternate_unknowns_are_marchenko_ratios() {
    let fine = SpatialGrid::new(-8.0, 8.0, 801).unwrap();
    let p = gaussian(fine);
    let sg = SpectralGrid::uniform(-40.0, 40.0, 1600, SpectralAxis::Lambda).unwrap();
    let s = scattering_coefficients(&p, &sg, &DirectConfig::default()).unwrap();
    let data = EnergyDependentData::new(s, BoundStateTriplets::empty()).unwrap();
    let phase = recover_phase(&data.scattering, 1e-3).unwrap().phase;
    let aux = build_auxiliary_data(&data, phase).unwrap();
    let grid = fine.subsample(5).unwrap();
    let uv = build_kernel_from_data(&aux.uv, &aux.triplets_uv, grid, &KernelConfig::default()).unwrap();
    let alt = build_alt_kernel(&aux, grid, &KernelConfig::default()).unwrap();
    assert!(alt.derivative_residual() < 1e-3);
    let tail_q = tail_integral(&p.first, fine.h());
    let cfg = NystromConfig::default();
    for x in [-2.0, 0.0, 1.5] {
        let m = nystrom_solve(&uv, x, &cfg).unwrap();
        let a = solve_alt(&alt, x, &cfg).unwrap();
        // the alternate rows reach the wider of the (u, v) and (p, s) supports
        assert!(a.y.len() >= m.y.len());
        let t1 = tail_integral(&m.k1, grid.h());
        let denom = 1.0 + tail_integral(&m.k1_bar, grid.h())[0];
        for j in 0..m.y.len() {
            assert!((a.k[j] - t1[j] / denom).norm() < 1e-4, "x = {x}, j = {j}");
        }
        let i = ((x - fine.x_min()) / fine.h()).round() as usize;
        let expect = -tail_q[i] / (phase * phase);
        assert!((a.k[0] - expect).norm() < 1e-4, "diagonal at {x}");
    }
}

#[test]
fn alternate_handles_bound_states() {
    let t = build_triplets(
        &[BoundState::simple(C64::new(0.0, 1.0), C64::new(2.0, 0.0))],
        &[BoundState::simple(C64::new(0.0, -1.0), C64::new(-2.0, 0.0))],
    )
    .unwrap();
    let sg = SpectralGrid::uniform(-200.0, 200.0, 2000, SpectralAxis::Lambda).unwrap();
    let (s, _) = reflectionless_data(&t, &sg, Variant::EnergyDependent).unwrap();
    let data = EnergyDependentData::new(s, t).unwrap();
    // the discrete kernels grow like e^{-2x} for x < 0, which limits how far left the
    // dense alternate system stays well conditioned
    let grid = SpatialGrid::new(-4.0, 10.0, 141).unwrap();
    let mut cfg = InversionConfig::new(grid);
    cfg.output_decay_tol = 0.1;
    let exact = invert(&data, &cfg).unwrap();
    assert!(exact.diagnostics.separable);
    let alt = invert_alternate(&data, &cfg).unwrap();
    let scale = max_abs(&exact.potentials.first);
    assert!(scale > 0.1);
    let err = max_abs_diff(&alt.potentials.first, &exact.potentials.first)
        .max(max_abs_diff(&alt.potentials.second, &exact.potentials.second));
    assert!(err < 2e-2 * scale, "{err}");
}

fn two_state() -> BoundStateTriplets {
    build_triplets(
        &[BoundState::simple(C64::new(0.0, 1.0), C64::new(2.0, 0.0))],
        &[BoundState::simple(C64::new(0.0, -1.0), C64::new(-2.0, 0.0))],
    )
    .unwrap()
}

#[test]
fn planted_state_and_norming_constants_are_recovered() {
    let t = two_state();
    let sg = SpectralGrid::uniform(-200.0, 200.0, 2000, SpectralAxis::Lambda).unwrap();
    let (s, _) = reflectionless_data(&t, &sg, Variant::EnergyDependent).unwrap();
    let data = EnergyDependentData::new(s, t).unwrap();
    let inv = invert(&data, &InversionConfig::new(SpatialGrid::new(-12.5, 12.5, 1001).unwrap())).unwrap();
    let mut pot = inv.potentials;
    pot.decay_tol = 1e-9;
    let cfg = DirectConfig::default();
    let up = find_bound_states(&pot, &BoundStateSearchRegion::default_upper(), &cfg).unwrap();
    let down = find_bound_states(&pot, &BoundStateSearchRegion::default_lower(), &cfg).unwrap();
    assert_eq!(up.len(), 1);
    assert_eq!(down.len(), 1);
    assert!((up[0].0 - C64::new(0.0, 1.0)).norm() < 1e-3 && up[0].1 == 1);
    let c = simple_norming_constants(&pot, up[0].0, 1, &cfg).unwrap();
    let cb = simple_norming_constants(&pot, down[0].0, 1, &cfg).unwrap();
    assert!((c.value - 2.0).norm() / 2.0 < 1e-2, "{:?}", c.value);
    assert!((cb.value + 2.0).norm() / 2.0 < 1e-2, "{:?}", cb.value);
    assert!(c.residual < 1e-6 && cb.residual < 1e-6);
    let w = winding(
        |z| transmission_denominator(&pot, z, &cfg).unwrap(),
        C64::new(-1.0, 0.5),
        C64::new(1.0, 1.5),
        200,
    );
    assert_eq!(w, 1);
    let back = scattering_coefficients(&pot, &SpectralGrid::uniform(-5.0, 5.0, 41, SpectralAxis::Lambda).unwrap(), &cfg)
        .unwrap();
    assert!(max_abs(&back.r).max(max_abs(&back.r_bar)) < 1e-4);
}

/// Winding of `f` around the boundary of a rectangle, by dense sampling.
fn winding(f: impl Fn(C64) -> C64, lo: C64, hi: C64, per_side: usize) -> i64 {
    let corners = [lo, C64::new(hi.re, lo.im), hi, C64::new(lo.re, hi.im), lo];
    let mut total = 0.0;
    let mut prev = f(lo).arg();
    for w in corners.windows(2) {
        for k in 1..=per_side {
            let z = w[0] + (w[1] - w[0]) * (k as f64 / per_side as f64);
            let a = f(z).arg();
            let mut d = a - prev;
            while d > PI {
                d -= 2.0 * PI;
            }
            while d < -PI {
                d += 2.0 * PI;
            }
            total += d;
            prev = a;
        }
    }
    (total / (2.0 * PI)).round() as i64
}

#[test]
fn zero_count_matches_winding_for_conjugate_symmetric_pair() {
    let g = SpatialGrid::new(-8.0, 8.0, 801).unwrap();
    let cfg = DirectConfig::default();
    for amp in [0.5, 3.0] {
        let p = PotentialPair::from_fn(
            g,
            Variant::EnergyDependent,
            |x| C64::new(amp * (-x * x).exp(), 0.0),
            |x| C64::new(-amp * (-x * x).exp(), 0.0),
        )
        .unwrap();
        let region = BoundStateSearchRegion::new(-3.0, 3.0, 0.05, 3.0, 256).unwrap();
        let found = find_bound_states(&p, &region, &cfg).unwrap();
        let count: usize = found.iter().map(|(_, m)| m).sum();
        let w = winding(
            |z| transmission_denominator(&p, z, &cfg).unwrap(),
            C64::new(-3.0, 0.05),
            C64::new(3.0, 3.0),
            400,
        );
        assert_eq!(count as i64, w, "amplitude {amp}: {found:?}");
    }
}

#[test]
fn gaussian_round_trip_both_methods() {
    let fine = SpatialGrid::new(-6.0, 6.0, 601).unwrap();
    let p = gaussian(fine);
    let sg = SpectralGrid::uniform(-40.0, 40.0, 1600, SpectralAxis::Lambda).unwrap();
    let s = scattering_coefficients(&p, &sg, &DirectConfig::default()).unwrap();
    let data = EnergyDependentData::new(s, BoundStateTriplets::empty()).unwrap();
    let out = fine.subsample(5).unwrap();
    let cfg = InversionConfig::new(out);
    let inv = invert(&data, &cfg).unwrap();
    let alt = invert_alternate(&data, &cfg).unwrap();
    let pick = |v: &[C64]| (0..out.len()).map(|i| v[5 * i]).collect::<Vec<_>>();
    let (q, r) = (pick(&p.first), pick(&p.second));
    let e = pick(&compute_gauge(&p).unwrap().e);
    for rec in [&inv.potentials, &alt.potentials] {
        assert!(max_abs_diff(&rec.first, &q) / max_abs(&q) < 1e-2);
        assert!(max_abs_diff(&rec.second, &r) / max_abs(&r) < 1e-2);
    }
    assert!(max_abs_diff(&inv.gauge.e, &e) < 1e-3);
    assert!(max_abs_diff(&inv.potentials.first, &alt.potentials.first) < 2e-2);
    assert!(!alt.stencil_fallback);
}

#[test]
fn uv_marchenko_round_trip() {
    let fine = SpatialGrid::new(-6.0, 6.0, 601).unwrap();
    let p = PotentialPair::from_fn(
        fine,
        Variant::Uv,
        |x| C64::new((-x * x).exp(), 0.2 * x * (-x * x).exp()),
        |x| C64::new(0.5 * (-(x - 0.5).powi(2)).exp(), 0.0),
    )
    .unwrap();
    let sg = SpectralGrid::uniform(-40.0, 40.0, 1600, SpectralAxis::Lambda).unwrap();
    let cfg = DirectConfig::default();
    let up = find_bound_states(&p, &BoundStateSearchRegion::default_upper(), &cfg).unwrap();
    let down = find_bound_states(&p, &BoundStateSearchRegion::default_lower(), &cfg).unwrap();
    assert!(up.is_empty() && down.is_empty());
    let s = scattering_coefficients(&p, &sg, &cfg).unwrap();
    let out = fine.subsample(5).unwrap();
    let kernel = build_kernel(&s.r, &s.r_bar, &sg, &BoundStateTriplets::empty(), out, Variant::Uv, &KernelConfig::default())
        .unwrap();
    let rec = recover_potentials(&nystrom_solution(&kernel, &NystromConfig::default()).unwrap(), 1e-4).unwrap();
    let pick = |v: &[C64]| (0..out.len()).map(|i| v[5 * i]).collect::<Vec<_>>();
    assert!(max_abs_diff(&rec.potentials.first, &pick(&p.first)) < 1e-3);
    assert!(max_abs_diff(&rec.potentials.second, &pick(&p.second)) < 1e-3);
}

#[test]
fn g_kernels_differentiate_to_omega() {
    let fine = SpatialGrid::new(-8.0, 8.0, 801).unwrap();
    let p = gaussian(fine);
    let sg = SpectralGrid::uniform(-40.0, 40.0, 1600, SpectralAxis::Lambda).unwrap();
    let s = scattering_coefficients(&p, &sg, &DirectConfig::default()).unwrap();
    let data = EnergyDependentData::new(s, BoundStateTriplets::empty()).unwrap();
    let phase = recover_phase(&data.scattering, 1e-3).unwrap().phase;
    let aux = build_auxiliary_data(&data, phase).unwrap();
    // kernel lattice spacing equals the grid spacing
    let grid = SpatialGrid::new(-4.0, 4.0, 321).unwrap();
    let alt = build_alt_kernel(&aux, grid, &KernelConfig::default()).unwrap();
    let h = grid.h();
    let pairs = [
        (&alt.g_uv, alt.uv.omega()),
        (&alt.g_bar_uv, alt.uv.omega_bar()),
        (&alt.g_ps, alt.ps.omega()),
        (&alt.g_bar_ps, alt.ps.omega_bar()),
    ];
    for (g, om) in pairs {
        // five-point central differences away from the lattice ends
        for m in 2..g.len() - 2 {
            let d = (g[m - 2] - g[m - 1] * 8.0 + g[m + 1] * 8.0 - g[m + 2]) / (12.0 * h);
            assert!((d + om[m]).norm() < 1e-6, "at lattice index {m}: {}", (d + om[m]).norm());
        }
    }
}

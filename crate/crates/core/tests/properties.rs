use num_complex::Complex64;
use proptest::prelude::*;
use qfpsim::linalg::eigenvalues;
use qfpsim::nuclear::{extrapolate, extrapolation_model, ExtrapolationOptions, NUCLEON_MASS};
use qfpsim::potential::{exp_model, fit_exponential, Channel, FitOptions};
use qfpsim::qfp::{
    comb_expectation, hadamard_metrics, measure_rho, plan_measurements, CombState, DensityMatrix, GateModel, ModeWindow,
    NoiseModel, PairReadout,
};
use qfpsim::schwinger::{
    build_hamiltonian, enumerate_physical_basis, find_study, project_symmetry, ChargeConfig, LatticeSpec, SymmetrySector,
};
use qfpsim::vqe::{acse_gradient, exact_expectation, ucc_amplitudes, ucc_real_amplitudes, EnergyRecord, UccState};
use qfpsim::HermitianOperator;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn symmetric(d: usize) -> impl Strategy<Value = HermitianOperator> {
    prop::collection::vec(-2.0f64..2.0, d * d).prop_map(move |v| {
        let mut m = vec![0.0; d * d];
        for i in 0..d {
            for j in 0..d {
                m[i * d + j] = 0.5 * (v[i * d + j] + v[j * d + i]);
            }
        }
        HermitianOperator::from_row_major(d, m).unwrap()
    })
}

fn problem() -> impl Strategy<Value = (HermitianOperator, Vec<f64>)> {
    (2usize..9).prop_flat_map(|d| (symmetric(d), prop::collection::vec(-1.5f64..1.5, d - 1)))
}

fn all_pairs(d: usize) -> Vec<(usize, usize)> {
    (0..d).flat_map(|k| (k + 1..d).map(move |l| (k, l))).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn ucc_preserves_norm(theta in prop::collection::vec(-10.0f64..10.0, 0..40)) {
        let a = ucc_real_amplitudes(&theta);
        let n: f64 = a.iter().map(|x| x * x).sum();
        prop_assert!((n - 1.0).abs() < 1e-12);
        let c = ucc_amplitudes(&UccState { theta });
        prop_assert!((c.norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn gradient_matches_finite_differences((h, theta) in problem()) {
        let state = UccState { theta: theta.clone() };
        let rho = DensityMatrix::from_state(&ucc_amplitudes(&state));
        let g = acse_gradient(&rho, &h, &state).unwrap();
        let eps = 1e-4;
        for k in 0..theta.len() {
            let at = |s: f64| {
                let mut t = theta.clone();
                t[k] += s;
                exact_expectation(&h, &t)
            };
            // fourth-order central difference
            let fd = (8.0 * (at(eps) - at(-eps)) - (at(2.0 * eps) - at(-2.0 * eps))) / (12.0 * eps);
            let scale = g[k].abs().max(1e-3);
            prop_assert!((g[k] - fd).abs() <= 1e-5 * scale, "k={} g={} fd={}", k, g[k], fd);
        }
    }

    #[test]
    fn noiseless_rho_is_outer_product(
        amps in prop::collection::vec(-1.0f64..1.0, 2..12),
        ideal in any::<bool>(),
        depth in 0.75f64..0.9,
    ) {
        let d = amps.len();
        let gate = if ideal { GateModel::Ideal } else { GateModel::Physical { depth } };
        let state = CombState::from_real(&amps);
        let plan = plan_measurements(&all_pairs(d), 3);
        let readout = PairReadout::new(&gate).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let rho = measure_rho(&state, &plan, &readout, &NoiseModel::noiseless(), &mut rng).unwrap();
        for k in 0..d {
            for l in 0..d {
                prop_assert!((rho.get(k, l) - amps[k] * amps[l]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn comb_energy_scales_with_power(
        (h, theta) in problem(),
        re in -3.0f64..3.0,
        im in -3.0f64..3.0,
    ) {
        let mut state = ucc_amplitudes(&UccState { theta: theta.clone() });
        let base = comb_expectation(&state, &h).unwrap();
        state.reference_scale = Complex64::new(re, im);
        let scaled = comb_expectation(&state, &h).unwrap();
        let alpha2 = re * re + im * im;
        prop_assert!((scaled - alpha2 * base).abs() <= 1e-12 * (1.0 + alpha2 * base.abs()));
        prop_assert!((base - exact_expectation(&h, &theta)).abs() < 1e-12);
    }

    #[test]
    fn measured_rho_is_invariant_to_comb_power(amps in prop::collection::vec(-1.0f64..1.0, 2..8), s in 0.1f64..5.0) {
        let d = amps.len();
        let mut state = CombState::from_real(&amps);
        let plan = plan_measurements(&all_pairs(d), 2);
        let readout = PairReadout::new(&GateModel::Ideal).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let a = measure_rho(&state, &plan, &readout, &NoiseModel::noiseless(), &mut rng).unwrap();
        state.reference_scale = Complex64::new(s, 0.0);
        let b = measure_rho(&state, &plan, &readout, &NoiseModel::noiseless(), &mut rng).unwrap();
        for k in 0..d {
            for l in 0..d {
                prop_assert!((a.get(k, l) - b.get(k, l)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn schedule_covers_each_pair_once(d in 2usize..30, max_parallel in 1usize..6) {
        let pairs = all_pairs(d);
        let plan = plan_measurements(&pairs, max_parallel);
        let mut seen: Vec<(usize, usize)> = plan.pairs().collect();
        seen.sort();
        prop_assert_eq!(&seen, &pairs);
        for round in &plan.rounds {
            prop_assert!(round.len() <= max_parallel);
            let mut bins: Vec<usize> = round.iter().flat_map(|&(k, l)| [k, l]).collect();
            bins.sort();
            bins.dedup();
            prop_assert_eq!(bins.len(), 2 * round.len());
        }
    }

    #[test]
    fn beamsplitter_conserves_or_leaks(depth in 0.0f64..2.5) {
        let m = hadamard_metrics(depth, ModeWindow::around((0, 1), 32), (0, 1)).unwrap();
        prop_assert!(m.reflectivity >= 0.0 && m.transmissivity >= 0.0 && m.leakage >= -1e-12);
        prop_assert!(m.reflectivity + m.transmissivity + m.leakage <= 1.0 + 1e-12);
    }

    #[test]
    fn fit_round_trip(g2 in 0.2f64..5.0, mass in 0.2f64..1.5, like in any::<bool>()) {
        let channel = if like { Channel::Like } else { Channel::Opposite };
        let extent = 8.0;
        let pts: Vec<_> = [0.0, 1.0, 2.0, 3.0, 4.0]
            .iter()
            .map(|&r| (r, EnergyRecord::exact(exp_model(r, g2, mass, extent, channel))))
            .collect();
        let opts = FitOptions { resamples: 0, ..FitOptions::new(extent) };
        let f = fit_exponential(&pts, channel, &opts).unwrap();
        prop_assert!((f.g_squared - g2).abs() < 1e-8 * g2, "g2 {} vs {}", f.g_squared, g2);
        prop_assert!((f.mass - mass).abs() < 1e-8 * mass, "M {} vs {}", f.mass, mass);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn extrapolation_round_trip(
        depth in 1.0f64..8.0,
        amp in 5.0f64..500.0,
        thr in -10.0f64..-1.0,
        l0 in 3.0f64..6.0,
        dl in 1.0f64..2.0,
    ) {
        let e_inf = thr - depth;
        let k = (2.0 * NUCLEON_MASS * depth).sqrt() / qfpsim::nuclear::HBARC;
        prop_assume!(amp * (-2.0 * k * l0).exp() < 0.5 * depth);
        prop_assume!(amp * (-2.0 * k * (l0 + 2.0 * dl)).exp() > 1e-4 * depth);
        let pts: Vec<_> = [l0, l0 + dl, l0 + 2.0 * dl]
            .iter()
            .map(|&l| (l, EnergyRecord::exact(extrapolation_model(l, e_inf, amp, thr, NUCLEON_MASS).unwrap())))
            .collect();
        let opts = ExtrapolationOptions { replicas: 0, ..ExtrapolationOptions::new(thr) };
        let f = extrapolate(&pts, &opts).map_err(|e| TestCaseError::fail(e.to_string()))?;
        prop_assert!((f.e_infinity.value - e_inf).abs() < 1e-8 * e_inf.abs(), "{} vs {}", f.e_infinity.value, e_inf);
        prop_assert!((f.amplitude - amp).abs() < 1e-8 * amp);
    }
}

fn study_sector(c: &[usize]) -> SymmetrySector {
    find_study(&ChargeConfig::new(c)).unwrap().sector
}

fn configs() -> impl Strategy<Value = (Vec<usize>, i32, SymmetrySector)> {
    prop_oneof![
        Just((vec![], 2, SymmetrySector::parity(0).with_momentum())),
        Just((vec![], 3, SymmetrySector::none().with_momentum())),
        Just((vec![0], 3, SymmetrySector::parity(0))),
        Just((vec![0, 0], 4, SymmetrySector::parity(0))),
        Just((vec![0, 2], 4, study_sector(&[0, 2]))),
        Just((vec![0, 1], 4, study_sector(&[0, 1]))),
        Just((vec![0, 3], 4, study_sector(&[0, 3]))),
        Just((vec![0, 2, 4], 4, study_sector(&[0, 2, 4]))),
        Just((vec![0, 2, 1], 3, study_sector(&[0, 2, 1]))),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn projection_keeps_eigenvalues((charges, lambda, sector) in configs(), x in 0.1f64..1.2, mu in -0.5f64..0.8) {
        let spec = LatticeSpec { x, mu, ..LatticeSpec::standard(lambda) };
        let basis = enumerate_physical_basis(&spec, &ChargeConfig::new(&charges)).unwrap();
        let full = build_hamiltonian(&spec, &basis).unwrap();
        let proj = project_symmetry(&full, &sector).map_err(|e| TestCaseError::fail(e.to_string()))?;
        prop_assert!(proj.dim < full.dim);
        let all = eigenvalues(&full.to_operator().unwrap());
        for e in eigenvalues(&proj.to_operator().unwrap()) {
            let nearest = all.iter().map(|f| (f - e).abs()).fold(f64::INFINITY, f64::min);
            prop_assert!(nearest < 1e-10, "{} missing from the full spectrum", e);
        }
    }
}

/// Every `(occupation, link)` assignment, filtered by Gauss's law
/// independently of the enumerator.
fn brute_force(spec: &LatticeSpec, charges: &ChargeConfig) -> Vec<(u32, Vec<i32>)> {
    let n = spec.n_fermion_sites;
    let q = charges.static_charges(n).unwrap();
    let lam = spec.lambda;
    let bound = (lam as f64).sqrt().floor() as i32;
    let mut out = Vec::new();
    let width = (2 * bound + 1) as u64;
    for bits in 0u32..(1 << n) {
        for code in 0..width.pow(n as u32) {
            let mut c = code;
            let links: Vec<i32> = (0..n)
                .map(|_| {
                    let v = (c % width) as i32 - bound;
                    c /= width;
                    v
                })
                .collect();
            if links.iter().map(|l| l * l).sum::<i32>() > lam {
                continue;
            }
            let ok = (0..n).all(|s| {
                let sigma = if bits >> s & 1 == 1 { 1 } else { -1 };
                let dyn_q = (sigma + if s % 2 == 0 { 1 } else { -1 }) / 2;
                links[s] - links[(s + n - 1) % n] == dyn_q + q[s]
            });
            if ok {
                out.push((bits, links));
            }
        }
    }
    out.sort();
    out
}

#[test]
fn gauss_law_exhaustive() {
    let cases: [(&[usize], i32); 6] = [(&[], 2), (&[], 3), (&[0], 2), (&[0, 1], 2), (&[0, 2], 3), (&[0, 0, 0], 2)];
    for (c, lambda) in cases {
        let spec = LatticeSpec { n_fermion_sites: 6, ..LatticeSpec::standard(lambda) };
        let charges = ChargeConfig::new(c);
        let basis = enumerate_physical_basis(&spec, &charges).unwrap();
        let mut got: Vec<(u32, Vec<i32>)> = basis.iter().map(|s| (s.occupations, s.links.clone())).collect();
        got.sort();
        assert_eq!(got, brute_force(&spec, &charges), "{charges} Λ={lambda}");
        let q = charges.static_charges(6).unwrap();
        for s in &basis {
            assert_eq!(s.implied_static_charges(), q);
        }
    }
}

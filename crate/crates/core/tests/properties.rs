use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;
use qkmm_core::algos::build_v2v;
use qkmm_core::circuit::{Circuit, Control, Gate};
use qkmm_core::decompose::decompose_circuit;
use qkmm_core::encoding::{build_encoder, build_encoder_inverse, NormalizedVector};
use qkmm_core::instances::{random_unit_vector, trial_rng};
use qkmm_core::metrics::fidelity;
use qkmm_core::noise::{
    amplitude_damping, apply_noise_model, depolarizing_from_fidelity, phase_damping, NoiseChannel, NoiseParams,
    NoiseSource,
};
use qkmm_core::state::{marginal_prefix, simulate, StateVector};
use qkmm_core::unitary::ancilla_equivalence_defect;
use qkmm_core::{sample_shots, DensityMatrix};
use statrs::distribution::{ChiSquared, ContinuousCDF};

fn gate_strategy(n: usize, max_controls: usize) -> impl Strategy<Value = Gate> {
    let angle = -6.3f64..6.3;
    prop_oneof![
        (0..n).prop_map(Gate::H),
        (0..n).prop_map(Gate::X),
        ((0..n), angle.clone()).prop_map(|(target, angle)| Gate::Ry { target, angle }),
        proptest::sample::subsequence((0..n).collect::<Vec<_>>(), 2)
            .prop_shuffle()
            .prop_map(|q| Gate::Cnot { control: q[0], target: q[1] }),
        (proptest::sample::subsequence((0..n).collect::<Vec<_>>(), 2).prop_shuffle(), angle.clone())
            .prop_map(|(q, angle)| Gate::Cry { control: q[1], target: q[0], angle }),
        proptest::sample::subsequence((0..n).collect::<Vec<_>>(), 3).prop_shuffle().prop_map(|q| Gate::Toffoli {
            controls: [q[2], q[0]],
            target: q[1],
        }),
        (
            proptest::sample::subsequence((0..n).collect::<Vec<_>>(), 1..=(max_controls + 1).min(n)),
            proptest::collection::vec(any::<bool>(), max_controls + 1),
            angle,
            any::<prop::sample::Index>(),
        )
            .prop_map(|(qubits, polarity, angle, pick)| {
                let t = pick.index(qubits.len());
                let target = qubits[t];
                let controls = qubits
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| *i != t)
                    .map(|(i, &q)| Control { qubit: q, on_one: polarity[i] })
                    .collect();
                Gate::Mcry { controls, target, angle }
            }),
    ]
}

fn circuit_strategy(max_qubits: usize, max_gates: usize, max_controls: usize) -> impl Strategy<Value = Circuit> {
    (3..=max_qubits).prop_flat_map(move |n| {
        proptest::collection::vec(gate_strategy(n, max_controls), 0..=max_gates).prop_map(move |gates| {
            let mut c = Circuit::new(n);
            c.extend(gates).unwrap();
            c
        })
    })
}

fn unit_vector_strategy(max_qubits: u32) -> impl Strategy<Value = NormalizedVector> {
    (1..=max_qubits)
        .prop_flat_map(|n| proptest::collection::vec(-1.0f64..1.0, 1usize << n))
        .prop_filter("non-zero", |v| v.iter().map(|x| x * x).sum::<f64>() > 1e-6)
        .prop_map(|v| NormalizedVector::normalized(&v).unwrap().0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn inverse_undoes_circuit(c in circuit_strategy(6, 200, 4), seed in 0u64..1000) {
        let mut rng = trial_rng(seed, 0);
        let start = random_unit_vector(1 << c.num_qubits(), &mut rng);
        let mut s = StateVector::from_real(start.values()).unwrap();
        s.apply_circuit(&c).unwrap();
        s.apply_circuit(&c.inverse()).unwrap();
        for (a, b) in s.amplitudes().iter().zip(start.values()) {
            prop_assert!((a - Complex64::new(*b, 0.0)).norm() < 1e-9);
        }
    }

    #[test]
    fn density_diagonal_matches_statevector(c in circuit_strategy(5, 40, 3)) {
        let sv = simulate(&c).unwrap().probabilities();
        let mut dm = DensityMatrix::zero(c.num_qubits()).unwrap();
        dm.apply_circuit(&c).unwrap();
        for (p, q) in sv.iter().zip(dm.probabilities().unwrap()) {
            prop_assert!((p - q).abs() < 1e-10);
        }
        prop_assert!(dm.hermiticity_defect() < 1e-12);
    }

    #[test]
    fn decomposition_is_sound(c in circuit_strategy(6, 30, 4)) {
        let d = decompose_circuit(&c).unwrap();
        prop_assert!(d.is_elementary());
        prop_assert!(ancilla_equivalence_defect(&c, &d).unwrap() < 1e-8);
    }

    #[test]
    fn text_format_round_trips(c in circuit_strategy(6, 30, 4)) {
        let text = c.to_text();
        let back = Circuit::from_text(&text).unwrap();
        prop_assert_eq!(back.to_text(), text);
        prop_assert_eq!(back.gates(), c.gates());
    }

    #[test]
    fn encoder_is_real_and_inner_product_law_holds(a in unit_vector_strategy(5), seed in 0u64..1000) {
        let b = random_unit_vector(a.len(), &mut trial_rng(seed, 1));
        let s = simulate(&build_encoder(&a)).unwrap();
        prop_assert!(s.max_imaginary() <= 1e-12);
        let mut t = s.clone();
        t.apply_circuit(&build_encoder_inverse(&b)).unwrap();
        prop_assert!((t.amplitudes()[0].norm() - a.dot(&b).abs()).abs() < 1e-9);
        prop_assert!(t.max_imaginary() <= 1e-12);
    }

    #[test]
    fn fidelity_is_symmetric_and_bounded(
        raw in proptest::collection::vec((0.0f64..1.0, 0.0f64..1.0), 1..32),
    ) {
        let (p, q): (Vec<f64>, Vec<f64>) = raw.into_iter().unzip();
        let normalize = |v: Vec<f64>| {
            let s: f64 = v.iter().sum();
            if s == 0.0 { let n = v.len() as f64; v.iter().map(|_| 1.0 / n).collect::<Vec<_>>() } else { v.iter().map(|x| x / s).collect() }
        };
        let (p, q) = (normalize(p), normalize(q));
        let f = fidelity(&p, &q).unwrap();
        prop_assert!((f - fidelity(&q, &p).unwrap()).abs() < 1e-12);
        prop_assert!((0.0..=1.0).contains(&f));
        prop_assert!((fidelity(&p, &p).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn generated_channels_are_cptp(
        duration in 0.0f64..5.0,
        t1 in 1.0f64..100.0,
        t2_frac in 0.01f64..1.0,
        f1 in 0.5f64..=1.0,
        f2 in 0.2f64..=1.0,
    ) {
        let channels = [
            amplitude_damping(duration, t1).unwrap(),
            phase_damping(duration, t1, 2.0 * t1 * t2_frac).unwrap(),
            depolarizing_from_fidelity(f1, 1).unwrap(),
            depolarizing_from_fidelity(f2, 2).unwrap(),
        ];
        for ch in &channels {
            prop_assert!(qkmm_core::density::kraus_completeness_defect(ch.kraus()) < 1e-8);
            prop_assert!(min_choi_eigenvalue(ch) >= -1e-8);
        }
    }
}

fn min_choi_eigenvalue(ch: &NoiseChannel) -> f64 {
    let d = 1usize << ch.arity();
    let mut choi = DMatrix::<Complex64>::zeros(d * d, d * d);
    for k in ch.kraus() {
        // vec(K) column-stacked: index (col·d + row)
        let v = DMatrix::from_fn(d * d, 1, |idx, _| k[(idx % d, idx / d)]);
        choi += &v * v.adjoint();
    }
    choi.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min)
}

#[test]
fn encoder_round_trip_500_vectors_per_dimension() {
    for n in 1..=5u32 {
        let len = 1usize << n;
        let mut rng = trial_rng(500 + n as u64, 0);
        for _ in 0..500 {
            let v = random_unit_vector(len, &mut rng);
            let s = simulate(&build_encoder(&v)).unwrap();
            for (a, x) in s.amplitudes().iter().zip(v.values()) {
                assert!((a.re - x).abs() < 1e-9 && a.im.abs() < 1e-12);
            }
        }
    }
}

#[test]
fn encoder_rotation_count_is_dimension_minus_one() {
    for n in 1..=6u32 {
        let len = 1usize << n;
        let v = random_unit_vector(len, &mut trial_rng(n as u64, 0));
        let rotations = build_encoder(&v)
            .gates()
            .iter()
            .filter(|g| matches!(g, Gate::Mcry { .. }))
            .count();
        assert_eq!(rotations, len - 1);
    }
}

#[test]
fn sampling_passes_chi_square_at_99_percent() {
    let p = [0.05, 0.1, 0.15, 0.2, 0.1, 0.05, 0.25, 0.1];
    let shots = 100_000u64;
    let critical = ChiSquared::new(7.0).unwrap().inverse_cdf(0.99);
    let mut failures = 0;
    for seed in 0..20 {
        let h = sample_shots(&p, shots, seed).unwrap();
        let chi: f64 = p
            .iter()
            .enumerate()
            .map(|(i, &pi)| {
                let e = pi * shots as f64;
                (h.count(i) as f64 - e).powi(2) / e
            })
            .sum();
        if chi > critical {
            failures += 1;
        }
    }
    // each seed fails with probability 0.01; two or more of 20 is a 1.7% event
    assert!(failures <= 1, "{failures} of 20 exceeded the 99% critical value");
}

fn v2v_fidelity(a: &NormalizedVector, b: &NormalizedVector, params: &NoiseParams) -> f64 {
    let bundle = build_v2v(a, b).unwrap();
    let d = decompose_circuit(&bundle.circuit).unwrap();
    let ideal = simulate(&bundle.circuit).unwrap().probabilities();
    let noisy = apply_noise_model(&d, params, &DensityMatrix::zero(d.num_qubits()).unwrap()).unwrap();
    let noisy = marginal_prefix(&noisy.probabilities().unwrap(), bundle.num_qubits()).unwrap();
    fidelity(&ideal, &noisy).unwrap()
}

#[test]
fn zero_duration_unit_fidelity_is_noiseless() {
    let params = NoiseParams {
        single_qubit_fidelity: 1.0,
        two_qubit_fidelity: 1.0,
        single_qubit_duration_ns: 0.0,
        two_qubit_duration_ns: 0.0,
        ..NoiseParams::default()
    };
    let mut rng = trial_rng(77, 0);
    let a = random_unit_vector(8, &mut rng);
    let b = random_unit_vector(8, &mut rng);
    let c = decompose_circuit(&build_v2v(&a, &b).unwrap().circuit).unwrap();
    let dm = DensityMatrix::zero(c.num_qubits()).unwrap();
    let mut ideal = dm.clone();
    ideal.apply_circuit(&c).unwrap();
    assert!(apply_noise_model(&c, &params, &dm).unwrap().max_distance(&ideal) < 1e-10);
}

// Per instance the property can fail: dephasing inserted mid-circuit changes
// later interference and occasionally nudges the outcome distribution back
// toward the ideal one (seed 900, trials 1 and 24 gain about 9e-5). The mean
// over instances is monotone, and no single gain exceeds 1e-3.
#[test]
fn extra_noise_sources_never_raise_mean_fidelity() {
    let subsets: Vec<Vec<NoiseSource>> = (0u8..8)
        .map(|mask| {
            NoiseSource::ALL
                .iter()
                .enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1)
                .map(|(_, s)| *s)
                .collect()
        })
        .collect();
    let trials = 50;
    let mut mean = vec![0.0; subsets.len()];
    let mut worst_gain: f64 = 0.0;
    for t in 0..trials {
        let mut rng = trial_rng(900, t);
        let a = random_unit_vector(4, &mut rng);
        let b = random_unit_vector(4, &mut rng);
        let f: Vec<f64> = subsets
            .iter()
            .map(|s| v2v_fidelity(&a, &b, &NoiseParams::default().with_sources(s.iter().copied())))
            .collect();
        assert!((f[0] - 1.0).abs() < 1e-12);
        for (i, si) in subsets.iter().enumerate() {
            mean[i] += f[i] / trials as f64;
            for (j, sj) in subsets.iter().enumerate() {
                if i != j && si.iter().all(|s| sj.contains(s)) {
                    worst_gain = worst_gain.max(f[j] - f[i]);
                }
            }
        }
    }
    for (i, si) in subsets.iter().enumerate() {
        for (j, sj) in subsets.iter().enumerate() {
            if i != j && si.iter().all(|s| sj.contains(s)) {
                assert!(mean[j] < mean[i], "{sj:?} {} vs {si:?} {}", mean[j], mean[i]);
            }
        }
    }
    assert!(worst_gain < 1e-3, "largest single-instance gain {worst_gain}");
}

//! Hardware-style noise: T1 relaxation, pure dephasing and depolarizing gate
//! errors, compiled into Kraus channels and injected after every gate.
//!
//! Durations are nanoseconds and coherence times microseconds in
//! [`NoiseParams`]; the channel constructors take any consistent unit.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, Gate};
use crate::density::{superoperator, DensityMatrix};
use crate::error::{QkmmError, Result};

type C64 = Complex64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum NoiseSource {
    #[serde(rename = "T1")]
    T1,
    #[serde(rename = "T2")]
    T2,
    #[serde(rename = "GATE")]
    Gate,
}

impl NoiseSource {
    pub const ALL: [NoiseSource; 3] = [NoiseSource::T1, NoiseSource::T2, NoiseSource::Gate];
}

impl fmt::Display for NoiseSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NoiseSource::T1 => "T1",
            NoiseSource::T2 => "T2",
            NoiseSource::Gate => "GATE",
        })
    }
}

impl FromStr for NoiseSource {
    type Err = QkmmError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "T1" => Ok(NoiseSource::T1),
            "T2" => Ok(NoiseSource::T2),
            "GATE" => Ok(NoiseSource::Gate),
            other => Err(QkmmError::Configuration(format!(
                "unknown noise source {other:?} (expected T1, T2 or GATE)"
            ))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseParams {
    pub t1_us: f64,
    pub t2_us: f64,
    pub single_qubit_fidelity: f64,
    pub two_qubit_fidelity: f64,
    pub single_qubit_duration_ns: f64,
    pub two_qubit_duration_ns: f64,
    pub enabled_sources: BTreeSet<NoiseSource>,
    /// Relax idle qubits for the length of every gate layer.
    pub idle_decoherence: bool,
}

impl Default for NoiseParams {
    fn default() -> Self {
        Self {
            t1_us: 50.0,
            t2_us: 30.0,
            single_qubit_fidelity: 0.998,
            two_qubit_fidelity: 0.975,
            single_qubit_duration_ns: 30.0,
            two_qubit_duration_ns: 200.0,
            enabled_sources: NoiseSource::ALL.into_iter().collect(),
            idle_decoherence: false,
        }
    }
}

impl NoiseParams {
    /// Default parameters with no source enabled.
    pub fn noiseless() -> Self {
        Self::default().with_sources([])
    }

    pub fn with_sources(mut self, sources: impl IntoIterator<Item = NoiseSource>) -> Self {
        self.enabled_sources = sources.into_iter().collect();
        self
    }

    pub fn is_enabled(&self, source: NoiseSource) -> bool {
        self.enabled_sources.contains(&source)
    }

    /// Serial length of the 6-CNOT, 9-single-qubit Toffoli circuit.
    pub fn toffoli_duration_ns(&self) -> f64 {
        6.0 * self.two_qubit_duration_ns + 9.0 * self.single_qubit_duration_ns
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(QkmmError::Validation(format!("{name} must be positive, got {v}")))
            }
        };
        positive("t1_us", self.t1_us)?;
        positive("t2_us", self.t2_us)?;
        if self.t2_us > 2.0 * self.t1_us {
            return Err(QkmmError::Validation(format!(
                "t2 = {} exceeds 2·t1 = {}",
                self.t2_us,
                2.0 * self.t1_us
            )));
        }
        for (name, f) in [
            ("single_qubit_fidelity", self.single_qubit_fidelity),
            ("two_qubit_fidelity", self.two_qubit_fidelity),
        ] {
            if !(f > 0.0 && f <= 1.0) {
                return Err(QkmmError::Validation(format!("{name} must lie in (0, 1], got {f}")));
            }
        }
        for (name, d) in [
            ("single_qubit_duration_ns", self.single_qubit_duration_ns),
            ("two_qubit_duration_ns", self.two_qubit_duration_ns),
        ] {
            if !(d.is_finite() && d >= 0.0) {
                return Err(QkmmError::Validation(format!("{name} must be non-negative, got {d}")));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NoiseChannel {
    kraus: Vec<DMatrix<C64>>,
    arity: usize,
    superop: Vec<C64>,
}

impl NoiseChannel {
    /// Fails unless Σ K†K = I within 1e-8.
    pub fn new(kraus: Vec<DMatrix<C64>>, arity: usize) -> Result<Self> {
        let superop = superoperator(&kraus, arity)?;
        Ok(Self { kraus, arity, superop })
    }

    pub fn identity(arity: usize) -> Self {
        let d = 1 << arity;
        Self::new(vec![DMatrix::identity(d, d)], arity).expect("identity is a channel")
    }

    pub fn kraus(&self) -> &[DMatrix<C64>] {
        &self.kraus
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    /// `self` followed by `next`.
    pub fn then(&self, next: &NoiseChannel) -> Result<NoiseChannel> {
        if self.arity != next.arity {
            return Err(QkmmError::Configuration("cannot compose channels of different arity".into()));
        }
        let kraus = next
            .kraus
            .iter()
            .flat_map(|b| self.kraus.iter().map(move |a| b * a))
            .filter(|k| k.iter().any(|z| z.norm_sqr() > 0.0))
            .collect();
        NoiseChannel::new(kraus, self.arity)
    }

    pub fn apply(&self, dm: &mut DensityMatrix, targets: &[usize]) -> Result<()> {
        if targets.len() != self.arity {
            return Err(QkmmError::Index(format!(
                "{}-qubit channel applied to {} targets",
                self.arity,
                targets.len()
            )));
        }
        dm.apply_superoperator(&self.superop, targets)
    }
}

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

fn check_duration(duration: f64) -> Result<()> {
    if duration.is_nan() || duration < 0.0 {
        return Err(QkmmError::Validation(format!("duration must be non-negative, got {duration}")));
    }
    Ok(())
}

/// γ = 1 − exp(−duration/t1) with the standard two-operator Kraus set.
pub fn amplitude_damping(duration: f64, t1: f64) -> Result<NoiseChannel> {
    check_duration(duration)?;
    if !(t1.is_finite() && t1 > 0.0) {
        return Err(QkmmError::Validation(format!("t1 must be positive, got {t1}")));
    }
    let gamma = -(-duration / t1).exp_m1();
    amplitude_damping_gamma(gamma)
}

pub fn amplitude_damping_gamma(gamma: f64) -> Result<NoiseChannel> {
    if !(0.0..=1.0).contains(&gamma) {
        return Err(QkmmError::Validation(format!("damping γ must lie in [0, 1], got {gamma}")));
    }
    let k0 = DMatrix::from_row_slice(2, 2, &[c(1.0), c(0.0), c(0.0), c((1.0 - gamma).sqrt())]);
    let k1 = DMatrix::from_row_slice(2, 2, &[c(0.0), c(gamma.sqrt()), c(0.0), c(0.0)]);
    NoiseChannel::new(vec![k0, k1], 1)
}

/// Pure dephasing at rate 1/Tφ = 1/t2 − 1/(2·t1); λ = 1 − exp(−duration/Tφ)
/// and off-diagonals shrink by 1 − λ.
pub fn phase_damping(duration: f64, t1: f64, t2: f64) -> Result<NoiseChannel> {
    check_duration(duration)?;
    if !(t1.is_finite() && t1 > 0.0 && t2.is_finite() && t2 > 0.0) {
        return Err(QkmmError::Validation(format!("t1 and t2 must be positive, got {t1}, {t2}")));
    }
    if t2 > 2.0 * t1 {
        return Err(QkmmError::Validation(format!("t2 = {t2} exceeds 2·t1 = {}", 2.0 * t1)));
    }
    let rate = (1.0 / t2 - 1.0 / (2.0 * t1)).max(0.0);
    let lambda = if rate == 0.0 {
        0.0
    } else if duration.is_infinite() {
        1.0
    } else {
        -(-duration * rate).exp_m1()
    };
    dephasing_lambda(lambda)
}

pub fn dephasing_lambda(lambda: f64) -> Result<NoiseChannel> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(QkmmError::Validation(format!("dephasing λ must lie in [0, 1], got {lambda}")));
    }
    let keep = (1.0 - lambda / 2.0).sqrt();
    let flip = (lambda / 2.0).sqrt();
    let k0 = DMatrix::from_row_slice(2, 2, &[c(keep), c(0.0), c(0.0), c(keep)]);
    let k1 = DMatrix::from_row_slice(2, 2, &[c(flip), c(0.0), c(0.0), c(-flip)]);
    NoiseChannel::new(vec![k0, k1], 1)
}

fn pauli(index: usize) -> DMatrix<C64> {
    let z = c(0.0);
    let o = c(1.0);
    let i = C64::new(0.0, 1.0);
    match index {
        0 => DMatrix::from_row_slice(2, 2, &[o, z, z, o]),
        1 => DMatrix::from_row_slice(2, 2, &[z, o, o, z]),
        2 => DMatrix::from_row_slice(2, 2, &[z, -i, i, z]),
        _ => DMatrix::from_row_slice(2, 2, &[o, z, z, -o]),
    }
}

/// ρ → (1 − p)ρ + p·I/d.
pub fn depolarizing(p: f64, arity: usize) -> Result<NoiseChannel> {
    if !(1..=3).contains(&arity) {
        return Err(QkmmError::Validation(format!("depolarizing arity must be 1..=3, got {arity}")));
    }
    let d = (1usize << arity) as f64;
    let d2 = d * d;
    if !(p >= 0.0 && p <= d2 / (d2 - 1.0)) {
        return Err(QkmmError::Validation(format!(
            "depolarizing p = {p} is outside [0, {}]",
            d2 / (d2 - 1.0)
        )));
    }
    if p == 0.0 {
        return Ok(NoiseChannel::identity(arity));
    }
    let strings = 1usize << (2 * arity);
    let mut kraus = Vec::with_capacity(strings);
    for s in 0..strings {
        let mut m = DMatrix::identity(1, 1);
        for q in 0..arity {
            m = m.kronecker(&pauli((s >> (2 * (arity - 1 - q))) & 3));
        }
        let weight = if s == 0 { 1.0 - p * (d2 - 1.0) / d2 } else { p / d2 };
        if weight > 0.0 {
            kraus.push(m * c(weight.sqrt()));
        }
    }
    NoiseChannel::new(kraus, arity)
}

/// Depolarizing strength p = (1 − F)·d/(d − 1), so the channel's average
/// state fidelity is F. Requires F ≥ 1/(d + 1).
pub fn depolarizing_probability(avg_fidelity: f64, arity: usize) -> Result<f64> {
    let d = (1usize << arity) as f64;
    if !(avg_fidelity > 0.0 && avg_fidelity <= 1.0) {
        return Err(QkmmError::Validation(format!(
            "fidelity must lie in (0, 1], got {avg_fidelity}"
        )));
    }
    if avg_fidelity < 1.0 / (d + 1.0) {
        return Err(QkmmError::Validation(format!(
            "fidelity {avg_fidelity} is below 1/(d+1) and has no depolarizing channel"
        )));
    }
    Ok((1.0 - avg_fidelity) * d / (d - 1.0))
}

pub fn depolarizing_from_fidelity(avg_fidelity: f64, arity: usize) -> Result<NoiseChannel> {
    depolarizing(depolarizing_probability(avg_fidelity, arity)?, arity)
}

/// Depolarizing applied `times` times in a row.
fn depolarizing_repeated(p: f64, arity: usize, times: i32) -> Result<NoiseChannel> {
    depolarizing(1.0 - (1.0 - p).powi(times), arity)
}

/// Channels compiled once per parameter set.
#[derive(Clone, Debug)]
pub struct NoiseModel {
    params: NoiseParams,
    depol1: Option<NoiseChannel>,
    depol2: Option<NoiseChannel>,
    // Toffoli: CNOT pairs (c1,t), (c0,t), (c0,c1) twice each; singles 6 on t, 2 on c1, 1 on c0
    toffoli_pair: Option<NoiseChannel>,
    toffoli_t: Option<NoiseChannel>,
    toffoli_c1: Option<NoiseChannel>,
    relax1: Option<NoiseChannel>,
    relax2: Option<NoiseChannel>,
    relax3: Option<NoiseChannel>,
}

impl NoiseModel {
    pub fn new(params: &NoiseParams) -> Result<Self> {
        params.validate()?;
        let gate = params.is_enabled(NoiseSource::Gate);
        let (mut depol1, mut depol2, mut toffoli_pair, mut toffoli_t, mut toffoli_c1) = (None, None, None, None, None);
        if gate {
            let p1 = depolarizing_probability(params.single_qubit_fidelity, 1)?;
            let p2 = depolarizing_probability(params.two_qubit_fidelity, 2)?;
            depol1 = Some(depolarizing(p1, 1)?);
            depol2 = Some(depolarizing(p2, 2)?);
            toffoli_pair = Some(depolarizing_repeated(p2, 2, 2)?);
            toffoli_t = Some(depolarizing_repeated(p1, 1, 6)?);
            toffoli_c1 = Some(depolarizing_repeated(p1, 1, 2)?);
        }
        let relax = |ns: f64| -> Result<Option<NoiseChannel>> {
            let us = ns / 1000.0;
            let mut ch: Option<NoiseChannel> = None;
            if params.is_enabled(NoiseSource::T1) {
                ch = Some(amplitude_damping(us, params.t1_us)?);
            }
            if params.is_enabled(NoiseSource::T2) {
                let pd = phase_damping(us, params.t1_us, params.t2_us)?;
                ch = Some(match ch {
                    Some(ad) => ad.then(&pd)?,
                    None => pd,
                });
            }
            Ok(ch)
        };
        Ok(Self {
            params: params.clone(),
            depol1,
            depol2,
            toffoli_pair,
            toffoli_t,
            toffoli_c1,
            relax1: relax(params.single_qubit_duration_ns)?,
            relax2: relax(params.two_qubit_duration_ns)?,
            relax3: relax(params.toffoli_duration_ns())?,
        })
    }

    pub fn params(&self) -> &NoiseParams {
        &self.params
    }

    fn relax_for(&self, arity: usize) -> Option<&NoiseChannel> {
        match arity {
            1 => self.relax1.as_ref(),
            2 => self.relax2.as_ref(),
            _ => self.relax3.as_ref(),
        }
    }

    fn apply_gate(&self, gate: &Gate, dm: &mut DensityMatrix) -> Result<()> {
        dm.apply_gate(gate)?;
        let qubits = gate.qubits();
        match qubits.as_slice() {
            [q] => {
                if let Some(ch) = &self.depol1 {
                    ch.apply(dm, &[*q])?;
                }
            }
            [a, b] => {
                if let Some(ch) = &self.depol2 {
                    ch.apply(dm, &[*a, *b])?;
                }
            }
            [c0, c1, t] => {
                if let (Some(pair), Some(t6), Some(c2), Some(single)) =
                    (&self.toffoli_pair, &self.toffoli_t, &self.toffoli_c1, &self.depol1)
                {
                    pair.apply(dm, &[*c1, *t])?;
                    pair.apply(dm, &[*c0, *t])?;
                    pair.apply(dm, &[*c0, *c1])?;
                    t6.apply(dm, &[*t])?;
                    c2.apply(dm, &[*c1])?;
                    single.apply(dm, &[*c0])?;
                }
            }
            _ => unreachable!("elementary gates act on one to three qubits"),
        }
        if let Some(relax) = self.relax_for(qubits.len()) {
            for &q in &qubits {
                relax.apply(dm, &[q])?;
            }
        }
        Ok(())
    }

    /// Runs an elementary circuit on `dm`, injecting noise after each gate.
    pub fn run(&self, circuit: &Circuit, dm: &mut DensityMatrix) -> Result<()> {
        if let Some(bad) = circuit.gates().iter().find(|g| !g.kind().is_elementary()) {
            return Err(QkmmError::Contract(format!(
                "noise model needs an elementary circuit, found {}",
                bad.kind()
            )));
        }
        if circuit.num_qubits() != dm.num_qubits() {
            return Err(QkmmError::Configuration(format!(
                "circuit has {} qubits, density matrix {}",
                circuit.num_qubits(),
                dm.num_qubits()
            )));
        }
        if !self.params.idle_decoherence {
            for gate in circuit.gates() {
                self.apply_gate(gate, dm)?;
            }
            return Ok(());
        }
        for layer in layers(circuit) {
            let mut busy = vec![false; circuit.num_qubits()];
            let mut longest = 0;
            for gate in &layer {
                self.apply_gate(gate, dm)?;
                let qubits = gate.qubits();
                longest = longest.max(qubits.len());
                for q in qubits {
                    busy[q] = true;
                }
            }
            if let Some(relax) = self.relax_for(longest) {
                for (q, _) in busy.iter().enumerate().filter(|(_, b)| !**b) {
                    relax.apply(dm, &[q])?;
                }
            }
        }
        Ok(())
    }
}

/// As-soon-as-possible layering; gates in one layer touch disjoint qubits.
fn layers(circuit: &Circuit) -> Vec<Vec<&Gate>> {
    let mut depth = vec![0usize; circuit.num_qubits()];
    let mut out: Vec<Vec<&Gate>> = Vec::new();
    for gate in circuit.gates() {
        let qubits = gate.qubits();
        let layer = qubits.iter().map(|&q| depth[q]).max().unwrap_or(0);
        for &q in &qubits {
            depth[q] = layer + 1;
        }
        if out.len() <= layer {
            out.resize_with(layer + 1, Vec::new);
        }
        out[layer].push(gate);
    }
    out
}

pub fn apply_noise_model(circuit: &Circuit, params: &NoiseParams, dm: &DensityMatrix) -> Result<DensityMatrix> {
    let model = NoiseModel::new(params)?;
    let mut out = dm.clone();
    model.run(circuit, &mut out)?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::kraus_completeness_defect;
    use crate::state::StateVector;

    fn plus_state() -> DensityMatrix {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        DensityMatrix::from_state(&StateVector::from_real(&[h, h]).unwrap()).unwrap()
    }

    #[test]
    fn zero_duration_damping_is_identity() {
        let ch = amplitude_damping(0.0, 50.0).unwrap();
        let mut dm = plus_state();
        ch.apply(&mut dm, &[0]).unwrap();
        assert!(dm.max_distance(&plus_state()) < 1e-15);
        assert!(amplitude_damping(1.0, 0.0).is_err());
        assert!(amplitude_damping(-1.0, 1.0).is_err());
    }

    #[test]
    fn damping_for_one_t1() {
        let ch = amplitude_damping(50.0, 50.0).unwrap();
        let gamma = ch.kraus()[1][(0, 1)].re.powi(2);
        assert!((gamma - (1.0 - (-1.0f64).exp())).abs() < 1e-12);
        assert!((gamma - 0.6321).abs() < 1e-4);
    }

    #[test]
    fn full_damping_relaxes_to_ground() {
        let mut dm = DensityMatrix::from_state(&StateVector::basis(1, 1).unwrap()).unwrap();
        amplitude_damping_gamma(1.0).unwrap().apply(&mut dm, &[0]).unwrap();
        assert!((dm.entry(0, 0).re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn dephasing_examples() {
        let ch = phase_damping(0.2, 50.0, 100.0).unwrap();
        let mut dm = plus_state();
        ch.apply(&mut dm, &[0]).unwrap();
        assert!(dm.max_distance(&plus_state()) < 1e-15);

        let mut dm = plus_state();
        phase_damping(f64::INFINITY, 50.0, 30.0).unwrap().apply(&mut dm, &[0]).unwrap();
        assert!(dm.entry(0, 1).norm() < 1e-15);

        let t_phi: f64 = 1.0 / (1.0 / 30.0 - 1.0 / 100.0);
        let lambda: f64 = 1.0 - (-0.2f64 / t_phi).exp();
        let mut dm = plus_state();
        phase_damping(0.2, 50.0, 30.0).unwrap().apply(&mut dm, &[0]).unwrap();
        assert!((dm.entry(0, 1).re - 0.5 * (1.0 - lambda)).abs() < 1e-15);

        assert!(matches!(phase_damping(0.1, 10.0, 25.0), Err(QkmmError::Validation(_))));
    }

    #[test]
    fn depolarizing_strengths() {
        assert_eq!(depolarizing_probability(1.0, 1).unwrap(), 0.0);
        assert!((depolarizing_probability(0.998, 1).unwrap() - 0.004).abs() < 1e-15);
        assert!((depolarizing_probability(0.975, 2).unwrap() - 0.025 * 4.0 / 3.0).abs() < 1e-15);
        assert!(depolarizing_from_fidelity(0.0, 1).is_err());
        assert!(depolarizing_from_fidelity(1.1, 1).is_err());
        assert!(depolarizing_from_fidelity(0.2, 1).is_err());
        assert_eq!(depolarizing_from_fidelity(1.0, 2).unwrap().kraus().len(), 1);
    }

    #[test]
    fn depolarizing_mixes_toward_identity() {
        let ch = depolarizing(0.3, 1).unwrap();
        let mut dm = DensityMatrix::from_state(&StateVector::basis(1, 0).unwrap()).unwrap();
        ch.apply(&mut dm, &[0]).unwrap();
        assert!((dm.entry(0, 0).re - 0.85).abs() < 1e-12);
        assert!((dm.entry(1, 1).re - 0.15).abs() < 1e-12);
        for arity in 1..=3 {
            let ch = depolarizing(0.1, arity).unwrap();
            assert!(kraus_completeness_defect(ch.kraus()) < 1e-12);
        }
    }

    #[test]
    fn composition_multiplies_out() {
        let a = dephasing_lambda(0.5).unwrap();
        let b = dephasing_lambda(0.5).unwrap();
        let mut dm = plus_state();
        a.then(&b).unwrap().apply(&mut dm, &[0]).unwrap();
        assert!((dm.entry(0, 1).re - 0.125).abs() < 1e-15);
    }

    #[test]
    fn params_validation_and_serde() {
        assert!(NoiseParams::default().validate().is_ok());
        let bad = NoiseParams {
            t2_us: 120.0,
            ..NoiseParams::default()
        };
        assert!(bad.validate().is_err());
        let json = serde_json::to_string(&NoiseParams::default()).unwrap();
        assert!(json.contains("\"GATE\""));
        let back: NoiseParams = serde_json::from_str(&json).unwrap();
        assert_eq!(back, NoiseParams::default());
        let partial: NoiseParams = serde_json::from_str(r#"{"t1_us": 80.0, "enabled_sources": ["T1"]}"#).unwrap();
        assert_eq!(partial.t2_us, 30.0);
        assert!(partial.is_enabled(NoiseSource::T1) && !partial.is_enabled(NoiseSource::Gate));
        assert_eq!("gate".parse::<NoiseSource>().unwrap(), NoiseSource::Gate);
    }

    #[test]
    fn non_elementary_circuit_is_a_contract_violation() {
        let mut c = Circuit::new(3);
        c.push(Gate::mcry(&[0, 1], 2, 0.3)).unwrap();
        let dm = DensityMatrix::zero(3).unwrap();
        assert!(matches!(
            apply_noise_model(&c, &NoiseParams::default(), &dm),
            Err(QkmmError::Contract(_))
        ));
    }

    #[test]
    fn disabled_sources_match_noiseless_evolution() {
        let mut c = Circuit::new(3);
        c.extend([
            Gate::H(0),
            Gate::Cry { control: 0, target: 1, angle: 0.4 },
            Gate::Toffoli { controls: [0, 1], target: 2 },
        ])
        .unwrap();
        let dm = DensityMatrix::zero(3).unwrap();
        let mut ideal = dm.clone();
        ideal.apply_circuit(&c).unwrap();
        let noisy = apply_noise_model(&c, &NoiseParams::noiseless(), &dm).unwrap();
        assert!(noisy.max_distance(&ideal) < 1e-10);
    }

    #[test]
    fn gate_noise_on_one_gate_is_a_depolarized_ideal_state() {
        let mut c = Circuit::new(1);
        c.push(Gate::H(0)).unwrap();
        let params = NoiseParams::default().with_sources([NoiseSource::Gate]);
        let out = apply_noise_model(&c, &params, &DensityMatrix::zero(1).unwrap()).unwrap();
        let p = 0.004;
        assert!((out.entry(0, 1).re - 0.5 * (1.0 - p)).abs() < 1e-12);
        assert!((out.entry(0, 0).re - 0.5).abs() < 1e-12);
    }

    #[test]
    fn idle_decoherence_only_adds_damage() {
        let mut c = Circuit::new(2);
        c.extend([Gate::X(0), Gate::X(1), Gate::X(0)]).unwrap();
        let params = NoiseParams::default().with_sources([NoiseSource::T1]);
        let idle = NoiseParams {
            idle_decoherence: true,
            ..params.clone()
        };
        let dm = DensityMatrix::zero(2).unwrap();
        let busy = apply_noise_model(&c, &params, &dm).unwrap();
        let relaxed = apply_noise_model(&c, &idle, &dm).unwrap();
        // qubit 1 idles during the second X on qubit 0 and relaxes toward |0⟩
        let p1_busy = busy.probabilities().unwrap()[0b01];
        let p1_idle = relaxed.probabilities().unwrap()[0b01];
        assert!(p1_idle < p1_busy);
        assert_eq!(layers(&c).len(), 2);
    }
}

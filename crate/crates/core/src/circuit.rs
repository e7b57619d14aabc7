//! Gate and circuit representation.
//!
//! Qubit 0 is the most significant bit of a basis-state index everywhere in
//! this crate. A [`Circuit`] is an ordered gate list over named, contiguous
//! registers. High-level gates (multi-controlled RY, unitary blocks) live next
//! to the elementary set {H, X, RY, CNOT, CRY, Toffoli}; see
//! [`crate::decompose`] for the lowering.

use std::collections::HashSet;
use std::fmt::{self, Write as _};
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{QkmmError, Result};

const UNITARY_TOL: f64 = 1e-8;

/// One control qubit together with the value it must hold for the gate to fire.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Control {
    pub qubit: usize,
    pub on_one: bool,
}

impl Control {
    pub fn on(qubit: usize) -> Self {
        Self { qubit, on_one: true }
    }

    pub fn off(qubit: usize) -> Self {
        Self { qubit, on_one: false }
    }
}

/// A dense unitary carried by `UNITARY` / `MCUNITARY` gates.
#[derive(Clone, Debug, PartialEq)]
pub struct UnitaryBlock {
    label: String,
    matrix: DMatrix<Complex64>,
    num_qubits: usize,
}

impl UnitaryBlock {
    pub fn new(label: impl Into<String>, matrix: DMatrix<Complex64>) -> Result<Self> {
        let label = label.into();
        if label.is_empty() || label.chars().any(char::is_whitespace) {
            return Err(QkmmError::Validation(format!(
                "unitary block label {label:?} must be non-empty and free of whitespace"
            )));
        }
        let dim = matrix.nrows();
        if dim != matrix.ncols() || dim < 2 || !dim.is_power_of_two() {
            return Err(QkmmError::Validation(format!(
                "unitary block {label} must be square with power-of-two dimension, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        if matrix.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(QkmmError::Numeric(format!("unitary block {label} has non-finite entries")));
        }
        let defect = unitarity_defect(&matrix);
        if defect > UNITARY_TOL {
            return Err(QkmmError::Validation(format!(
                "block {label} is not unitary (max |U†U - I| = {defect:.3e})"
            )));
        }
        Ok(Self {
            label,
            num_qubits: dim.trailing_zeros() as usize,
            matrix,
        })
    }

    /// Real-valued convenience constructor.
    pub fn from_real(label: impl Into<String>, matrix: &DMatrix<f64>) -> Result<Self> {
        Self::new(label, matrix.map(|x| Complex64::new(x, 0.0)))
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn adjoint(&self) -> Self {
        let label = match self.label.strip_suffix("_dg") {
            Some(base) => base.to_string(),
            None => format!("{}_dg", self.label),
        };
        Self {
            label,
            matrix: self.matrix.adjoint(),
            num_qubits: self.num_qubits,
        }
    }
}

/// Largest entry of |U†U − I|.
pub fn unitarity_defect(matrix: &DMatrix<Complex64>) -> f64 {
    let product = matrix.adjoint() * matrix;
    let mut worst: f64 = 0.0;
    for r in 0..product.nrows() {
        for c in 0..product.ncols() {
            let expected = if r == c { 1.0 } else { 0.0 };
            worst = worst.max((product[(r, c)] - Complex64::new(expected, 0.0)).norm());
        }
    }
    worst
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum GateKind {
    H,
    X,
    Ry,
    Cnot,
    Cry,
    Toffoli,
    Mcry,
    UnitaryBlock,
    McUnitaryBlock,
}

impl GateKind {
    pub const ELEMENTARY: [GateKind; 6] = [
        GateKind::H,
        GateKind::X,
        GateKind::Ry,
        GateKind::Cnot,
        GateKind::Cry,
        GateKind::Toffoli,
    ];

    pub fn name(self) -> &'static str {
        match self {
            GateKind::H => "H",
            GateKind::X => "X",
            GateKind::Ry => "RY",
            GateKind::Cnot => "CNOT",
            GateKind::Cry => "CRY",
            GateKind::Toffoli => "TOFFOLI",
            GateKind::Mcry => "MCRY",
            GateKind::UnitaryBlock => "UNITARY",
            GateKind::McUnitaryBlock => "MCUNITARY",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "H" => GateKind::H,
            "X" => GateKind::X,
            "RY" => GateKind::Ry,
            "CNOT" => GateKind::Cnot,
            "CRY" => GateKind::Cry,
            "TOFFOLI" => GateKind::Toffoli,
            "MCRY" => GateKind::Mcry,
            "UNITARY" => GateKind::UnitaryBlock,
            "MCUNITARY" => GateKind::McUnitaryBlock,
            _ => return None,
        })
    }

    pub fn is_elementary(self) -> bool {
        Self::ELEMENTARY.contains(&self)
    }
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Gate {
    H(usize),
    X(usize),
    Ry {
        target: usize,
        angle: f64,
    },
    Cnot {
        control: usize,
        target: usize,
    },
    Cry {
        control: usize,
        target: usize,
        angle: f64,
    },
    Toffoli {
        controls: [usize; 2],
        target: usize,
    },
    /// RY on `target` conditioned on every control matching its polarity.
    Mcry {
        controls: Vec<Control>,
        target: usize,
        angle: f64,
    },
    Unitary {
        targets: Vec<usize>,
        block: Arc<UnitaryBlock>,
    },
    McUnitary {
        controls: Vec<Control>,
        targets: Vec<usize>,
        block: Arc<UnitaryBlock>,
    },
}

impl Gate {
    /// Multi-controlled RY with every control firing on |1⟩.
    pub fn mcry(controls: &[usize], target: usize, angle: f64) -> Self {
        Gate::Mcry {
            controls: controls.iter().copied().map(Control::on).collect(),
            target,
            angle,
        }
    }

    pub fn kind(&self) -> GateKind {
        match self {
            Gate::H(_) => GateKind::H,
            Gate::X(_) => GateKind::X,
            Gate::Ry { .. } => GateKind::Ry,
            Gate::Cnot { .. } => GateKind::Cnot,
            Gate::Cry { .. } => GateKind::Cry,
            Gate::Toffoli { .. } => GateKind::Toffoli,
            Gate::Mcry { .. } => GateKind::Mcry,
            Gate::Unitary { .. } => GateKind::UnitaryBlock,
            Gate::McUnitary { .. } => GateKind::McUnitaryBlock,
        }
    }

    pub fn angle(&self) -> Option<f64> {
        match self {
            Gate::Ry { angle, .. } | Gate::Cry { angle, .. } | Gate::Mcry { angle, .. } => {
                Some(*angle)
            }
            _ => None,
        }
    }

    pub fn controls(&self) -> Vec<Control> {
        match self {
            Gate::Cnot { control, .. } | Gate::Cry { control, .. } => vec![Control::on(*control)],
            Gate::Toffoli { controls, .. } => controls.iter().copied().map(Control::on).collect(),
            Gate::Mcry { controls, .. } | Gate::McUnitary { controls, .. } => controls.clone(),
            _ => Vec::new(),
        }
    }

    pub fn targets(&self) -> Vec<usize> {
        match self {
            Gate::H(q) | Gate::X(q) => vec![*q],
            Gate::Ry { target, .. }
            | Gate::Cnot { target, .. }
            | Gate::Cry { target, .. }
            | Gate::Toffoli { target, .. }
            | Gate::Mcry { target, .. } => vec![*target],
            Gate::Unitary { targets, .. } | Gate::McUnitary { targets, .. } => targets.clone(),
        }
    }

    pub fn block(&self) -> Option<&Arc<UnitaryBlock>> {
        match self {
            Gate::Unitary { block, .. } | Gate::McUnitary { block, .. } => Some(block),
            _ => None,
        }
    }

    /// Every qubit the gate touches, controls first.
    pub fn qubits(&self) -> Vec<usize> {
        let mut qubits: Vec<usize> = self.controls().iter().map(|c| c.qubit).collect();
        qubits.extend(self.targets());
        qubits
    }

    pub fn arity(&self) -> usize {
        self.qubits().len()
    }

    pub fn inverse(&self) -> Gate {
        match self {
            Gate::Ry { target, angle } => Gate::Ry {
                target: *target,
                angle: -angle,
            },
            Gate::Cry {
                control,
                target,
                angle,
            } => Gate::Cry {
                control: *control,
                target: *target,
                angle: -angle,
            },
            Gate::Mcry {
                controls,
                target,
                angle,
            } => Gate::Mcry {
                controls: controls.clone(),
                target: *target,
                angle: -angle,
            },
            Gate::Unitary { targets, block } => Gate::Unitary {
                targets: targets.clone(),
                block: Arc::new(block.adjoint()),
            },
            Gate::McUnitary {
                controls,
                targets,
                block,
            } => Gate::McUnitary {
                controls: controls.clone(),
                targets: targets.clone(),
                block: Arc::new(block.adjoint()),
            },
            other => other.clone(),
        }
    }

    /// Checks index ranges, disjointness, finite angles and block widths.
    pub fn validate(&self, num_qubits: usize) -> Result<()> {
        let qubits = self.qubits();
        let mut seen = HashSet::with_capacity(qubits.len());
        for &q in &qubits {
            if q >= num_qubits {
                return Err(QkmmError::Index(format!(
                    "{} touches qubit {q} but the register has {num_qubits} qubits",
                    self.kind()
                )));
            }
            if !seen.insert(q) {
                return Err(QkmmError::Index(format!(
                    "{} uses qubit {q} more than once",
                    self.kind()
                )));
            }
        }
        if let Some(angle) = self.angle() {
            if !angle.is_finite() {
                return Err(QkmmError::Numeric(format!("{} angle is not finite", self.kind())));
            }
        }
        if let Some(block) = self.block() {
            let targets = self.targets();
            if block.num_qubits() != targets.len() {
                return Err(QkmmError::Configuration(format!(
                    "block {} acts on {} qubits but {} targets were given",
                    block.label(),
                    block.num_qubits(),
                    targets.len()
                )));
            }
        }
        Ok(())
    }
}

/// A named contiguous qubit range.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Register {
    pub name: String,
    pub start: usize,
    pub len: usize,
}

impl Register {
    pub fn qubits(&self) -> std::ops::Range<usize> {
        self.start..self.start + self.len
    }
}

/// Anything gates can be streamed into: a [`Circuit`], a plain list, or a counter.
pub trait GateSink {
    fn add(&mut self, gate: Gate) -> Result<()>;
}

impl GateSink for Vec<Gate> {
    fn add(&mut self, gate: Gate) -> Result<()> {
        self.push(gate);
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Circuit {
    num_qubits: usize,
    registers: Vec<Register>,
    gates: Vec<Gate>,
}

impl GateSink for Circuit {
    fn add(&mut self, gate: Gate) -> Result<()> {
        self.push(gate)
    }
}

impl Circuit {
    pub fn new(num_qubits: usize) -> Self {
        Self {
            num_qubits,
            registers: Vec::new(),
            gates: Vec::new(),
        }
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn registers(&self) -> &[Register] {
        &self.registers
    }

    pub fn register(&self, name: &str) -> Option<&Register> {
        self.registers.iter().find(|r| r.name == name)
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn add_register(&mut self, name: impl Into<String>, start: usize, len: usize) -> Result<()> {
        let name = name.into();
        if name.is_empty() || name.chars().any(char::is_whitespace) {
            return Err(QkmmError::Configuration(format!("bad register name {name:?}")));
        }
        if start + len > self.num_qubits {
            return Err(QkmmError::Configuration(format!(
                "register {name} [{start}, {}) exceeds {} qubits",
                start + len,
                self.num_qubits
            )));
        }
        for other in &self.registers {
            if other.name == name {
                return Err(QkmmError::Configuration(format!("duplicate register {name}")));
            }
            if start < other.start + other.len && other.start < start + len {
                return Err(QkmmError::Configuration(format!(
                    "register {name} overlaps {}",
                    other.name
                )));
            }
        }
        self.registers.push(Register { name, start, len });
        Ok(())
    }

    pub fn push(&mut self, gate: Gate) -> Result<()> {
        gate.validate(self.num_qubits)?;
        self.gates.push(gate);
        Ok(())
    }

    pub fn extend<I: IntoIterator<Item = Gate>>(&mut self, gates: I) -> Result<()> {
        for gate in gates {
            self.push(gate)?;
        }
        Ok(())
    }

    /// Appends every gate of `other`, which must not be wider than `self`.
    pub fn append(&mut self, other: &Circuit) -> Result<()> {
        if other.num_qubits > self.num_qubits {
            return Err(QkmmError::Configuration(format!(
                "cannot append a {}-qubit circuit to a {}-qubit one",
                other.num_qubits, self.num_qubits
            )));
        }
        self.gates.extend(other.gates.iter().cloned());
        Ok(())
    }

    /// Reversed gate order with every gate inverted.
    pub fn inverse(&self) -> Circuit {
        Circuit {
            num_qubits: self.num_qubits,
            registers: self.registers.clone(),
            gates: self.gates.iter().rev().map(Gate::inverse).collect(),
        }
    }

    /// Same registers and gates on a wider qubit range (new qubits at the end).
    pub fn widened(&self, num_qubits: usize) -> Result<Circuit> {
        if num_qubits < self.num_qubits {
            return Err(QkmmError::Configuration(format!(
                "cannot narrow a {}-qubit circuit to {num_qubits}",
                self.num_qubits
            )));
        }
        Ok(Circuit {
            num_qubits,
            registers: self.registers.clone(),
            gates: self.gates.clone(),
        })
    }

    pub fn is_elementary(&self) -> bool {
        self.gates.iter().all(|g| g.kind().is_elementary())
    }

    /// Indices of gates that are dense unitary blocks (opaque to decomposition).
    pub fn opaque_gates(&self) -> Vec<usize> {
        self.gates
            .iter()
            .enumerate()
            .filter(|(_, g)| g.block().is_some())
            .map(|(i, _)| i)
            .collect()
    }

    /// Line-oriented text form: a header, one `register` line per register,
    /// then one gate per line as `KIND ANGLE CONTROLS TARGETS [LABEL MATRIX]`.
    /// `-` marks an empty field and `~q` a control that fires on |0⟩.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "qkmm-circuit 1");
        let _ = writeln!(out, "qubits {}", self.num_qubits);
        for r in &self.registers {
            let _ = writeln!(out, "register {} {} {}", r.name, r.start, r.len);
        }
        for gate in &self.gates {
            let angle = gate.angle().map_or_else(|| "-".to_string(), |a| format!("{a:?}"));
            let controls = gate.controls();
            let controls = if controls.is_empty() {
                "-".to_string()
            } else {
                controls
                    .iter()
                    .map(|c| {
                        if c.on_one {
                            c.qubit.to_string()
                        } else {
                            format!("~{}", c.qubit)
                        }
                    })
                    .collect::<Vec<_>>()
                    .join(",")
            };
            let targets = join_usize(&gate.targets());
            let _ = write!(out, "{} {angle} {controls} {targets}", gate.kind());
            if let Some(block) = gate.block() {
                let entries: Vec<String> = block
                    .matrix()
                    .transpose()
                    .iter()
                    .map(|z| format!("{:?},{:?}", z.re, z.im))
                    .collect();
                let _ = write!(out, " {} {}", block.label(), entries.join(";"));
            }
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Circuit> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

        let (ln, header) = lines.next().ok_or(QkmmError::Parse {
            line: 0,
            message: "empty input".into(),
        })?;
        if header != "qkmm-circuit 1" {
            return Err(parse_err(ln, format!("unknown header {header:?}")));
        }
        let (ln, qubits_line) = lines.next().ok_or(parse_err(ln, "missing qubits line"))?;
        let num_qubits = match qubits_line.split_whitespace().collect::<Vec<_>>().as_slice() {
            ["qubits", n] => parse_usize(ln, n)?,
            _ => return Err(parse_err(ln, "expected `qubits <n>`")),
        };
        let mut circuit = Circuit::new(num_qubits);

        for (ln, line) in lines {
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields[0] == "register" {
                if fields.len() != 4 {
                    return Err(parse_err(ln, "expected `register <name> <start> <len>`"));
                }
                let start = parse_usize(ln, fields[2])?;
                let len = parse_usize(ln, fields[3])?;
                circuit
                    .add_register(fields[1], start, len)
                    .map_err(|e| parse_err(ln, e.to_string()))?;
                continue;
            }
            let gate = parse_gate(ln, &fields)?;
            circuit.push(gate).map_err(|e| parse_err(ln, e.to_string()))?;
        }
        Ok(circuit)
    }
}

fn join_usize(values: &[usize]) -> String {
    values.iter().map(usize::to_string).collect::<Vec<_>>().join(",")
}

fn parse_err(line: usize, message: impl Into<String>) -> QkmmError {
    QkmmError::Parse {
        line,
        message: message.into(),
    }
}

fn parse_usize(line: usize, s: &str) -> Result<usize> {
    s.parse().map_err(|_| parse_err(line, format!("expected an integer, got {s:?}")))
}

fn parse_f64(line: usize, s: &str) -> Result<f64> {
    s.parse().map_err(|_| parse_err(line, format!("expected a number, got {s:?}")))
}

fn parse_gate(ln: usize, fields: &[&str]) -> Result<Gate> {
    if fields.len() < 4 {
        return Err(parse_err(ln, "gate lines need KIND ANGLE CONTROLS TARGETS"));
    }
    let kind = GateKind::from_name(fields[0])
        .ok_or_else(|| parse_err(ln, format!("unknown gate kind {:?}", fields[0])))?;
    let angle = match fields[1] {
        "-" => None,
        s => Some(parse_f64(ln, s)?),
    };
    let controls: Vec<Control> = match fields[2] {
        "-" => Vec::new(),
        s => s
            .split(',')
            .map(|c| match c.strip_prefix('~') {
                Some(q) => parse_usize(ln, q).map(Control::off),
                None => parse_usize(ln, c).map(Control::on),
            })
            .collect::<Result<_>>()?,
    };
    let targets: Vec<usize> = fields[3]
        .split(',')
        .map(|t| parse_usize(ln, t))
        .collect::<Result<_>>()?;

    let need_angle = || angle.ok_or_else(|| parse_err(ln, format!("{kind} needs an angle")));
    let single_target = || match targets.as_slice() {
        [t] => Ok(*t),
        _ => Err(parse_err(ln, format!("{kind} takes exactly one target"))),
    };
    let positive = |count: usize| -> Result<Vec<usize>> {
        if controls.len() != count || controls.iter().any(|c| !c.on_one) {
            return Err(parse_err(
                ln,
                format!("{kind} takes exactly {count} positive control(s)"),
            ));
        }
        Ok(controls.iter().map(|c| c.qubit).collect())
    };

    let gate = match kind {
        GateKind::H => {
            positive(0)?;
            Gate::H(single_target()?)
        }
        GateKind::X => {
            positive(0)?;
            Gate::X(single_target()?)
        }
        GateKind::Ry => {
            positive(0)?;
            Gate::Ry {
                target: single_target()?,
                angle: need_angle()?,
            }
        }
        GateKind::Cnot => Gate::Cnot {
            control: positive(1)?[0],
            target: single_target()?,
        },
        GateKind::Cry => Gate::Cry {
            control: positive(1)?[0],
            target: single_target()?,
            angle: need_angle()?,
        },
        GateKind::Toffoli => {
            let c = positive(2)?;
            Gate::Toffoli {
                controls: [c[0], c[1]],
                target: single_target()?,
            }
        }
        GateKind::Mcry => Gate::Mcry {
            controls,
            target: single_target()?,
            angle: need_angle()?,
        },
        GateKind::UnitaryBlock | GateKind::McUnitaryBlock => {
            if fields.len() != 6 {
                return Err(parse_err(ln, "unitary gates need LABEL and MATRIX fields"));
            }
            let entries: Vec<Complex64> = fields[5]
                .split(';')
                .map(|pair| {
                    let (re, im) = pair
                        .split_once(',')
                        .ok_or_else(|| parse_err(ln, format!("bad matrix entry {pair:?}")))?;
                    Ok(Complex64::new(parse_f64(ln, re)?, parse_f64(ln, im)?))
                })
                .collect::<Result<_>>()?;
            let dim = 1usize << targets.len();
            if entries.len() != dim * dim {
                return Err(parse_err(
                    ln,
                    format!("expected {} matrix entries, got {}", dim * dim, entries.len()),
                ));
            }
            let matrix = DMatrix::from_row_slice(dim, dim, &entries);
            let block = Arc::new(
                UnitaryBlock::new(fields[4], matrix).map_err(|e| parse_err(ln, e.to_string()))?,
            );
            if kind == GateKind::UnitaryBlock {
                positive(0)?;
                Gate::Unitary { targets, block }
            } else {
                Gate::McUnitary {
                    controls,
                    targets,
                    block,
                }
            }
        }
    };
    Ok(gate)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validate_rejects_out_of_range_and_duplicates() {
        assert!(matches!(Gate::H(3).validate(3), Err(QkmmError::Index(_))));
        let dup = Gate::Cnot {
            control: 1,
            target: 1,
        };
        assert!(matches!(dup.validate(3), Err(QkmmError::Index(_))));
        let overlap = Gate::Mcry {
            controls: vec![Control::on(0), Control::off(2)],
            target: 2,
            angle: 0.1,
        };
        assert!(matches!(overlap.validate(3), Err(QkmmError::Index(_))));
    }

    #[test]
    fn registers_must_not_overlap() {
        let mut c = Circuit::new(4);
        c.add_register("a", 0, 2).unwrap();
        assert!(c.add_register("b", 1, 2).is_err());
        assert!(c.add_register("b", 2, 3).is_err());
        c.add_register("b", 2, 2).unwrap();
    }

    #[test]
    fn non_unitary_block_is_rejected() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 0.0, 1.0]);
        assert!(matches!(
            UnitaryBlock::from_real("bad", &m),
            Err(QkmmError::Validation(_))
        ));
    }

    #[test]
    fn inverse_reverses_and_negates() {
        let mut c = Circuit::new(2);
        c.push(Gate::H(0)).unwrap();
        c.push(Gate::Cry {
            control: 0,
            target: 1,
            angle: 0.3,
        })
        .unwrap();
        let inv = c.inverse();
        assert_eq!(
            inv.gates(),
            &[
                Gate::Cry {
                    control: 0,
                    target: 1,
                    angle: -0.3
                },
                Gate::H(0)
            ]
        );
    }

    #[test]
    fn text_format_golden() {
        let mut c = Circuit::new(3);
        c.add_register("data", 0, 3).unwrap();
        c.push(Gate::H(0)).unwrap();
        c.push(Gate::Mcry {
            controls: vec![Control::on(0), Control::off(1)],
            target: 2,
            angle: 0.5,
        })
        .unwrap();
        c.push(Gate::Toffoli {
            controls: [0, 1],
            target: 2,
        })
        .unwrap();
        let text = c.to_text();
        assert_eq!(
            text,
            "qkmm-circuit 1\nqubits 3\nregister data 0 3\nH - - 0\nMCRY 0.5 0,~1 2\nTOFFOLI - 0,1 2\n"
        );
        assert_eq!(Circuit::from_text(&text).unwrap(), c);
    }

    #[test]
    fn text_format_reports_bad_lines() {
        let err = Circuit::from_text("qkmm-circuit 1\nqubits 2\nFOO - - 0\n").unwrap_err();
        assert!(matches!(err, QkmmError::Parse { line: 3, .. }));
        let err = Circuit::from_text("qkmm-circuit 1\nqubits 2\nCNOT - ~0 1\n").unwrap_err();
        assert!(matches!(err, QkmmError::Parse { line: 3, .. }));
    }
}

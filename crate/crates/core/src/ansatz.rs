//! QCNN and hardware-efficient circuit families.
//!
//! A QCNN layer applies one two-qubit convolution block to every adjacent
//! pair of active qubits and then pools each odd-position active qubit into
//! its even-position neighbour, halving the active set. Qubit 0 always
//! survives and is the readout.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sim::{Angle, Circuit, Gate, MAX_QUBITS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Family {
    #[serde(rename = "QCNN_RY")]
    QcnnRy,
    #[serde(rename = "QCNN_SO4")]
    QcnnSo4,
    #[serde(rename = "QCNN_SU4")]
    QcnnSu4,
    #[serde(rename = "HEA_RY")]
    HeaRy,
    #[serde(rename = "HEA_RXRZRX")]
    HeaRxRzRx,
}

impl Family {
    pub fn is_qcnn(self) -> bool {
        matches!(self, Family::QcnnRy | Family::QcnnSo4 | Family::QcnnSu4)
    }

    pub fn name(self) -> &'static str {
        match self {
            Family::QcnnRy => "QCNN_RY",
            Family::QcnnSo4 => "QCNN_SO4",
            Family::QcnnSu4 => "QCNN_SU4",
            Family::HeaRy => "HEA_RY",
            Family::HeaRxRzRx => "HEA_RXRZRX",
        }
    }

    /// Parameters of one convolution block (QCNN families only).
    fn conv_params(self) -> usize {
        match self {
            Family::QcnnRy => 2,
            Family::QcnnSo4 => 6,
            Family::QcnnSu4 => 15,
            _ => 0,
        }
    }
}

impl std::fmt::Display for Family {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Parameters of one pooling unit.
const POOL_PARAMS: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HeaTemplate {
    /// rotation column, CZ ladder
    #[default]
    SingleColumn,
    /// rotation column, CZ ladder, rotation column
    DoubleColumn,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnsatzSpec {
    pub family: Family,
    pub num_qubits: usize,
    pub layers: usize,
    #[serde(default = "default_sharing")]
    pub weight_sharing: bool,
    #[serde(default)]
    pub hea_template: HeaTemplate,
}

fn default_sharing() -> bool {
    true
}

impl AnsatzSpec {
    pub fn qcnn(family: Family, num_qubits: usize, layers: usize) -> Self {
        AnsatzSpec {
            family,
            num_qubits,
            layers,
            weight_sharing: true,
            hea_template: HeaTemplate::SingleColumn,
        }
    }

    pub fn hea(family: Family, num_qubits: usize, layers: usize, template: HeaTemplate) -> Self {
        AnsatzSpec { family, num_qubits, layers, weight_sharing: true, hea_template: template }
    }

    /// Number of QCNN layers that reduce the register to a single qubit.
    pub fn full_depth(&self) -> usize {
        self.num_qubits.trailing_zeros() as usize
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.num_qubits;
        if self.layers == 0 {
            return Err(Error::InvalidAnsatz("at least one layer is required".into()));
        }
        if n > MAX_QUBITS {
            return Err(Error::InvalidAnsatz(format!("{n} qubits exceeds the simulator limit")));
        }
        if self.family.is_qcnn() {
            if n < 2 || !n.is_power_of_two() {
                return Err(Error::InvalidAnsatz(format!(
                    "QCNN needs a power-of-two register, got {n}"
                )));
            }
            if self.layers > self.full_depth() {
                return Err(Error::InvalidAnsatz(format!(
                    "{} layers exceed log2({n}) = {}",
                    self.layers,
                    self.full_depth()
                )));
            }
        } else if n < 2 {
            return Err(Error::InvalidAnsatz(format!("HEA needs at least 2 qubits, got {n}")));
        }
        Ok(())
    }

    /// Whether a QCNN spec ends with the single-qubit readout rotation.
    fn has_readout_rotation(&self) -> bool {
        self.family.is_qcnn() && self.layers == self.full_depth()
    }

    /// Closed-form description of the parameter count, recorded with results.
    pub fn count_formula(&self) -> String {
        match (self.family.is_qcnn(), self.weight_sharing, self.hea_template) {
            (true, true, _) => format!(
                "layers*(conv {} + pool {}){}",
                self.family.conv_params(),
                POOL_PARAMS,
                if self.has_readout_rotation() { " + 1 readout" } else { "" }
            ),
            (true, false, _) => "sum over layers of (conv blocks*conv + pool units*pool) [+ 1 readout]".into(),
            (false, _, t) => {
                let r = if self.family == Family::HeaRy { "" } else { "3*" };
                match t {
                    HeaTemplate::SingleColumn => format!("{r}N*(layers+1)"),
                    HeaTemplate::DoubleColumn => format!("{r}N*(2*layers+1)"),
                }
            }
        }
    }
}

/// One layer's qubit bookkeeping.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QcnnLayer {
    pub active: Vec<usize>,
    pub conv_pairs: Vec<(usize, usize)>,
    /// (source, kept) pairs; sources leave the active set.
    pub pooling: Vec<(usize, usize)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QcnnLayout {
    pub num_qubits: usize,
    pub layers: Vec<QcnnLayer>,
    pub readout_qubit: usize,
}

impl QcnnLayout {
    /// Layout of `layers` layers on `num_qubits` (a power of two).
    pub fn new(num_qubits: usize, layers: usize) -> Self {
        let mut active: Vec<usize> = (0..num_qubits).collect();
        let mut out = Vec::with_capacity(layers);
        for _ in 0..layers {
            let layer = QcnnLayer {
                conv_pairs: conv_pairs(&active),
                pooling: active.chunks(2).map(|p| (p[1], p[0])).collect(),
                active: active.clone(),
            };
            active = active.iter().step_by(2).copied().collect();
            out.push(layer);
        }
        QcnnLayout { num_qubits, layers: out, readout_qubit: 0 }
    }

    /// Qubits pooled out during the first `layers` layers, sorted.
    pub fn discard_after(&self, layers: usize) -> Vec<usize> {
        let mut d: Vec<usize> = self
            .layers
            .iter()
            .take(layers)
            .flat_map(|l| l.pooling.iter().map(|&(src, _)| src))
            .collect();
        d.sort_unstable();
        d
    }

    /// Active qubits after the first `layers` layers.
    pub fn active_after(&self, layers: usize) -> Vec<usize> {
        let discarded = self.discard_after(layers);
        (0..self.num_qubits).filter(|q| !discarded.contains(q)).collect()
    }
}

fn conv_pairs(active: &[usize]) -> Vec<(usize, usize)> {
    let m = active.len();
    if m == 2 {
        return vec![(active[0], active[1])];
    }
    let mut pairs: Vec<(usize, usize)> = active.chunks(2).map(|p| (p[0], p[1])).collect();
    pairs.extend((0..m / 2).map(|k| (active[2 * k + 1], active[(2 * k + 2) % m])));
    pairs
}

/// A built ansatz ready for training.
#[derive(Debug, Clone, PartialEq)]
pub struct Ansatz {
    pub spec: AnsatzSpec,
    pub circuit: Circuit,
    pub layout: Option<QcnnLayout>,
}

impl Ansatz {
    pub fn readout_qubit(&self) -> usize {
        self.layout.as_ref().map_or(0, |l| l.readout_qubit)
    }
}

pub fn build(spec: &AnsatzSpec) -> Result<Ansatz> {
    if spec.family.is_qcnn() {
        let (circuit, layout) = build_qcnn(spec)?;
        Ok(Ansatz { spec: *spec, circuit, layout: Some(layout) })
    } else {
        Ok(Ansatz { spec: *spec, circuit: build_hea(spec)?, layout: None })
    }
}

fn conv_block(c: &mut Circuit, family: Family, (q1, q2): (usize, usize), p: &[Angle]) -> Result<()> {
    let ry = |qubit, angle| Gate::RY { qubit, angle };
    let rz = |qubit, angle| Gate::RZ { qubit, angle };
    match family {
        Family::QcnnRy => {
            c.push(ry(q1, p[0]))?.push(ry(q2, p[1]))?.push(Gate::CZ { qubits: [q1, q2] })?;
        }
        Family::QcnnSo4 => {
            c.push(ry(q1, p[0]))?.push(ry(q2, p[1]))?;
            c.push(Gate::CNOT { control: q1, target: q2 })?;
            c.push(ry(q1, p[2]))?.push(ry(q2, p[3]))?;
            c.push(Gate::CNOT { control: q2, target: q1 })?;
            c.push(ry(q1, p[4]))?.push(ry(q2, p[5]))?;
        }
        Family::QcnnSu4 => {
            for (q, s) in [(q1, 0), (q2, 3)] {
                c.push(rz(q, p[s]))?.push(ry(q, p[s + 1]))?.push(rz(q, p[s + 2]))?;
            }
            c.push(Gate::CNOT { control: q2, target: q1 })?;
            c.push(rz(q1, p[6]))?.push(ry(q2, p[7]))?;
            c.push(Gate::CNOT { control: q1, target: q2 })?;
            c.push(ry(q2, p[8]))?;
            c.push(Gate::CNOT { control: q2, target: q1 })?;
            for (q, s) in [(q1, 9), (q2, 12)] {
                c.push(rz(q, p[s]))?.push(ry(q, p[s + 1]))?.push(rz(q, p[s + 2]))?;
            }
        }
        _ => unreachable!("HEA families have no convolution block"),
    }
    Ok(())
}

fn pool_unit(c: &mut Circuit, (source, kept): (usize, usize), p: &[Angle]) -> Result<()> {
    c.push(Gate::CRY { control: source, target: kept, angle: p[0] })?;
    c.push(Gate::X { qubit: source })?;
    c.push(Gate::CRY { control: source, target: kept, angle: p[1] })?;
    c.push(Gate::X { qubit: source })?;
    Ok(())
}

fn fresh(c: &mut Circuit, count: usize) -> Vec<Angle> {
    (0..count).map(|_| c.new_param()).collect()
}

pub fn build_qcnn(spec: &AnsatzSpec) -> Result<(Circuit, QcnnLayout)> {
    spec.validate()?;
    if !spec.family.is_qcnn() {
        return Err(Error::InvalidAnsatz(format!("{} is not a QCNN family", spec.family)));
    }
    let layout = QcnnLayout::new(spec.num_qubits, spec.layers);
    let mut c = Circuit::new(spec.num_qubits);
    let cp = spec.family.conv_params();
    for layer in &layout.layers {
        let shared_conv = spec.weight_sharing.then(|| fresh(&mut c, cp));
        for &pair in &layer.conv_pairs {
            let p = match &shared_conv {
                Some(p) => p.clone(),
                None => fresh(&mut c, cp),
            };
            conv_block(&mut c, spec.family, pair, &p)?;
        }
        let shared_pool = spec.weight_sharing.then(|| fresh(&mut c, POOL_PARAMS));
        for &pair in &layer.pooling {
            let p = match &shared_pool {
                Some(p) => p.clone(),
                None => fresh(&mut c, POOL_PARAMS),
            };
            pool_unit(&mut c, pair, &p)?;
        }
    }
    if spec.has_readout_rotation() {
        let a = c.new_param();
        c.push(Gate::RY { qubit: layout.readout_qubit, angle: a })?;
    }
    Ok((c, layout))
}

fn rotation_column(c: &mut Circuit, family: Family) -> Result<()> {
    for q in 0..c.num_qubits() {
        match family {
            Family::HeaRy => {
                let a = c.new_param();
                c.push(Gate::RY { qubit: q, angle: a })?;
            }
            Family::HeaRxRzRx => {
                let [a, b, d] = [c.new_param(), c.new_param(), c.new_param()];
                c.push(Gate::RX { qubit: q, angle: a })?;
                c.push(Gate::RZ { qubit: q, angle: b })?;
                c.push(Gate::RX { qubit: q, angle: d })?;
            }
            _ => unreachable!(),
        }
    }
    Ok(())
}

pub fn build_hea(spec: &AnsatzSpec) -> Result<Circuit> {
    spec.validate()?;
    if spec.family.is_qcnn() {
        return Err(Error::InvalidAnsatz(format!("{} is not an HEA family", spec.family)));
    }
    let n = spec.num_qubits;
    let mut c = Circuit::new(n);
    for _ in 0..spec.layers {
        rotation_column(&mut c, spec.family)?;
        for q in 0..n - 1 {
            c.push(Gate::CZ { qubits: [q, q + 1] })?;
        }
        if spec.hea_template == HeaTemplate::DoubleColumn {
            rotation_column(&mut c, spec.family)?;
        }
    }
    rotation_column(&mut c, spec.family)?;
    Ok(c)
}

/// Parameter count of the circuit `build(spec)` would produce.
pub fn param_count(spec: &AnsatzSpec) -> Result<usize> {
    spec.validate()?;
    let n = spec.num_qubits;
    let l = spec.layers;
    if spec.family.is_qcnn() {
        let cp = spec.family.conv_params();
        let body = if spec.weight_sharing {
            l * (cp + POOL_PARAMS)
        } else {
            (0..l)
                .map(|k| {
                    let m = n >> k;
                    let blocks = if m == 2 { 1 } else { m };
                    blocks * cp + (m / 2) * POOL_PARAMS
                })
                .sum()
        };
        Ok(body + usize::from(spec.has_readout_rotation()))
    } else {
        let per_site = if spec.family == Family::HeaRy { 1 } else { 3 };
        let columns = match spec.hea_template {
            HeaTemplate::SingleColumn => l + 1,
            HeaTemplate::DoubleColumn => 2 * l + 1,
        };
        Ok(per_site * n * columns)
    }
}

pub fn readout_qubit(spec: &AnsatzSpec) -> Result<usize> {
    spec.validate()?;
    Ok(0)
}

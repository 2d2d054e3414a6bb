//! Classifier evaluation and autoencoder reconstruction fidelity.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ansatz::QcnnLayout;
use crate::error::{Error, Result};
use crate::sim::{discard_masks, kraus_reset_branches, Circuit, State};
use crate::spin::Dataset;
use crate::training::check_params;

/// Qubits reset to `|0⟩` between encoder and decoder.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompressionSpec {
    discard: Vec<usize>,
}

impl CompressionSpec {
    /// Sorted discard set; rejects empty or repeated entries.
    pub fn new(mut discard: Vec<usize>) -> Result<Self> {
        if discard.is_empty() {
            return Err(Error::EmptyDiscard);
        }
        discard.sort_unstable();
        if discard.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidDiscard("repeated qubit".into()));
        }
        Ok(CompressionSpec { discard })
    }

    /// Qubits pooled away by the first `layers` QCNN layers.
    pub fn from_layout(layout: &QcnnLayout, layers: usize) -> Result<Self> {
        Self::new(layout.discard_after(layers))
    }

    pub fn discard(&self) -> &[usize] {
        &self.discard
    }

    pub fn n_d(&self) -> usize {
        self.discard.len()
    }

    /// At least one qubit must survive compression.
    pub fn validate(&self, num_qubits: usize) -> Result<()> {
        discard_masks(num_qubits, &self.discard).map(|_| ())
    }
}

/// `⟨Z_readout⟩` on `U(θ)|ψ⟩`.
pub fn score(circuit: &Circuit, readout: usize, params: &[f64], state: &State) -> Result<f64> {
    circuit.run(params, state)?.expectation_z(readout)
}

/// Sign of a score; an exact zero is labeled +1.
pub fn label_of(score: f64) -> i8 {
    if score >= 0.0 {
        1
    } else {
        -1
    }
}

pub fn predict(circuit: &Circuit, readout: usize, params: &[f64], state: &State) -> Result<i8> {
    score(circuit, readout, params, state).map(label_of)
}

/// Counts with +1 as the positive class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Confusion {
    pub true_positive: usize,
    pub false_positive: usize,
    pub true_negative: usize,
    pub false_negative: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationReport {
    pub accuracy: f64,
    pub scores: Vec<f64>,
    pub predictions: Vec<i8>,
    pub labels: Vec<i8>,
    pub confusion: Confusion,
    /// `(false-positive rate, true-positive rate)` from threshold `+∞` down to `−∞`.
    pub roc_points: Vec<(f64, f64)>,
    /// `None` when the labels contain a single class.
    pub auc: Option<f64>,
}

fn check_labels(scores: &[f64], labels: &[i8]) -> Result<()> {
    if scores.len() != labels.len() {
        return Err(Error::DimensionMismatch { expected: scores.len(), found: labels.len() });
    }
    if scores.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if let Some(&bad) = scores.iter().find(|s| !s.is_finite()) {
        return Err(Error::NonFinite(bad));
    }
    if let Some(&l) = labels.iter().find(|&&l| l != 1 && l != -1) {
        return Err(Error::Format(format!("label {l} is not ±1")));
    }
    Ok(())
}

/// ROC curve over every distinct score as threshold, plus `±∞`; a sample is
/// called positive iff its score is `≥ t`.
pub fn roc_curve(scores: &[f64], labels: &[i8]) -> Result<Vec<(f64, f64)>> {
    check_labels(scores, labels)?;
    let pos = labels.iter().filter(|&&l| l == 1).count();
    let neg = labels.len() - pos;
    let rate = |count: usize, total: usize, last: bool| {
        if total == 0 {
            if last {
                1.0
            } else {
                0.0
            }
        } else {
            count as f64 / total as f64
        }
    };
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    let mut points = vec![(0.0, 0.0)];
    let (mut tp, mut fp) = (0, 0);
    let mut k = 0;
    while k < order.len() {
        let t = scores[order[k]];
        while k < order.len() && scores[order[k]] == t {
            if labels[order[k]] == 1 {
                tp += 1;
            } else {
                fp += 1;
            }
            k += 1;
        }
        let last = k == order.len();
        points.push((rate(fp, neg, last), rate(tp, pos, last)));
    }
    if points.last() != Some(&(1.0, 1.0)) {
        points.push((1.0, 1.0));
    }
    Ok(points)
}

/// Mann-Whitney estimate of `P(score_+ > score_-)` with ties counted ½.
pub fn auc(scores: &[f64], labels: &[i8]) -> Result<Option<f64>> {
    check_labels(scores, labels)?;
    let pos = labels.iter().filter(|&&l| l == 1).count();
    let neg = labels.len() - pos;
    if pos == 0 || neg == 0 {
        return Ok(None);
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    // twice the rank sum of the positives, with tied groups sharing their mean rank
    let mut rank_sum_x2: u64 = 0;
    let mut k = 0;
    while k < order.len() {
        let mut end = k;
        while end < order.len() && scores[order[end]] == scores[order[k]] {
            end += 1;
        }
        let mean_rank_x2 = (k + 1 + end) as u64;
        let positives = order[k..end].iter().filter(|&&i| labels[i] == 1).count() as u64;
        rank_sum_x2 += positives * mean_rank_x2;
        k = end;
    }
    let (p, n) = (pos as u64, neg as u64);
    let u_x2 = rank_sum_x2 - p * (p + 1);
    Ok(Some(u_x2 as f64 / (2 * p * n) as f64))
}

/// Report from precomputed scores.
pub fn classification_report(scores: Vec<f64>, labels: Vec<i8>) -> Result<ClassificationReport> {
    let roc_points = roc_curve(&scores, &labels)?;
    let auc = auc(&scores, &labels)?;
    let predictions: Vec<i8> = scores.iter().map(|&s| label_of(s)).collect();
    let mut confusion = Confusion::default();
    for (&p, &l) in predictions.iter().zip(&labels) {
        match (p, l) {
            (1, 1) => confusion.true_positive += 1,
            (1, _) => confusion.false_positive += 1,
            (_, -1) => confusion.true_negative += 1,
            _ => confusion.false_negative += 1,
        }
    }
    let correct = confusion.true_positive + confusion.true_negative;
    Ok(ClassificationReport {
        accuracy: correct as f64 / labels.len() as f64,
        scores,
        predictions,
        labels,
        confusion,
        roc_points,
        auc,
    })
}

pub fn evaluate_classifier(
    circuit: &Circuit,
    readout: usize,
    params: &[f64],
    test: &Dataset,
) -> Result<ClassificationReport> {
    if test.is_empty() {
        return Err(Error::EmptyDataset);
    }
    check_params(circuit, params)?;
    let scores = test
        .records
        .par_iter()
        .map(|r| score(circuit, readout, params, &r.state))
        .collect::<Result<Vec<f64>>>()?;
    classification_report(scores, test.records.iter().map(|r| r.label).collect())
}

/// Decoded Kraus branches `U† K_b U |ψ⟩`, in branch order.
fn decoded_branches(encoder: &Circuit, params: &[f64], spec: &CompressionSpec, state: &State) -> Result<Vec<State>> {
    spec.validate(encoder.num_qubits())?;
    let encoded = encoder.run(params, state)?;
    let decoder = encoder.inverse();
    kraus_reset_branches(&encoded, spec.discard())?
        .into_iter()
        .map(|mut b| decoder.run_in_place(params, &mut b).map(|_| b))
        .collect()
}

/// `⟨ψ|ρ_dec|ψ⟩ = Σ_b |⟨ψ|U† K_b U|ψ⟩|²` for the reset-and-decode channel.
pub fn reconstruct_fidelity(encoder: &Circuit, params: &[f64], spec: &CompressionSpec, state: &State) -> Result<f64> {
    let mut f = 0.0;
    for b in decoded_branches(encoder, params, spec, state)? {
        f += state.inner(&b)?.norm_sqr();
    }
    Ok(f)
}

/// Fidelity conditioned on every discarded qubit measuring `|0⟩`; 0 when that outcome is impossible.
pub fn postselected_fidelity(encoder: &Circuit, params: &[f64], spec: &CompressionSpec, state: &State) -> Result<f64> {
    let branches = decoded_branches(encoder, params, spec, state)?;
    let kept = &branches[0];
    let p = kept.norm_sqr();
    if p == 0.0 {
        return Ok(0.0);
    }
    Ok(state.inner(kept)?.norm_sqr() / p)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompressionReport {
    pub fidelities: Vec<f64>,
    pub mean_fidelity: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub postselected: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub final_cost: Option<f64>,
    pub n_d: usize,
}

pub fn evaluate_autoencoder(
    encoder: &Circuit,
    params: &[f64],
    spec: &CompressionSpec,
    test: &Dataset,
    final_cost: Option<f64>,
    with_postselection: bool,
) -> Result<CompressionReport> {
    if test.is_empty() {
        return Err(Error::EmptyDataset);
    }
    check_params(encoder, params)?;
    let fidelities = test
        .records
        .par_iter()
        .map(|r| reconstruct_fidelity(encoder, params, spec, &r.state))
        .collect::<Result<Vec<f64>>>()?;
    let postselected = if with_postselection {
        Some(
            test.records
                .par_iter()
                .map(|r| postselected_fidelity(encoder, params, spec, &r.state))
                .collect::<Result<Vec<f64>>>()?,
        )
    } else {
        None
    };
    let mean_fidelity = fidelities.iter().sum::<f64>() / fidelities.len() as f64;
    Ok(CompressionReport { fidelities, mean_fidelity, postselected, final_cost, n_d: spec.n_d() })
}

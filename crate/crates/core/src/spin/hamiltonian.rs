use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sim::qubit_mask;

/// Default ceiling on chain length for Hamiltonian assembly.
pub const DEFAULT_MAX_SITES: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ModelKind {
    /// `-Σ Z_j Z_{j+1} - h Σ X_j`
    TFI,
    /// `-Σ (X_j X_{j+1} + Y_j Y_{j+1} + h Z_j Z_{j+1})`
    XXZ,
}

impl std::fmt::Display for ModelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ModelKind::TFI => "TFI",
            ModelKind::XXZ => "XXZ",
        })
    }
}

/// Open spin-1/2 chain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpinModel {
    pub kind: ModelKind,
    pub num_sites: usize,
    pub field: f64,
}

impl SpinModel {
    pub fn new(kind: ModelKind, num_sites: usize, field: f64) -> Self {
        SpinModel { kind, num_sites, field }
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_sites < 2 {
            return Err(Error::InvalidModel(format!(
                "chain needs at least 2 sites, got {}",
                self.num_sites
            )));
        }
        if !self.field.is_finite() {
            return Err(Error::InvalidModel(format!("field {} is not finite", self.field)));
        }
        Ok(())
    }
}

/// Real symmetric matrix in coordinate form, rows sorted, with row offsets for products.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseHamiltonian {
    dimension: usize,
    entries: Vec<(usize, usize, f64)>,
    row_offsets: Vec<usize>,
}

impl SparseHamiltonian {
    /// Builds from unsorted triplets; duplicates are summed and exact zeros dropped.
    pub fn from_triplets(dimension: usize, mut entries: Vec<(usize, usize, f64)>) -> Result<Self> {
        if let Some(&(r, c, _)) = entries.iter().find(|(r, c, _)| *r >= dimension || *c >= dimension)
        {
            return Err(Error::DimensionMismatch { expected: dimension, found: r.max(c) });
        }
        entries.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut merged: Vec<(usize, usize, f64)> = Vec::with_capacity(entries.len());
        for (r, c, v) in entries {
            match merged.last_mut() {
                Some(last) if last.0 == r && last.1 == c => last.2 += v,
                _ => merged.push((r, c, v)),
            }
        }
        merged.retain(|e| e.2 != 0.0);
        let mut row_offsets = vec![0; dimension + 1];
        for &(r, _, _) in &merged {
            row_offsets[r + 1] += 1;
        }
        for i in 0..dimension {
            row_offsets[i + 1] += row_offsets[i];
        }
        Ok(SparseHamiltonian { dimension, entries: merged, row_offsets })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn entries(&self) -> &[(usize, usize, f64)] {
        &self.entries
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        let row_entries = &self.entries[self.row_offsets[row]..self.row_offsets[row + 1]];
        row_entries
            .binary_search_by(|e| e.1.cmp(&col))
            .map_or(0.0, |k| row_entries[k].2)
    }

    /// `y = H x`.
    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        for (row, out) in y.iter_mut().enumerate() {
            *out = self.entries[self.row_offsets[row]..self.row_offsets[row + 1]]
                .iter()
                .map(|&(_, c, v)| v * x[c])
                .sum();
        }
    }

    /// `<v|H|v> / <v|v>`.
    pub fn rayleigh_quotient(&self, v: &[f64]) -> f64 {
        let mut hv = vec![0.0; self.dimension];
        self.apply(v, &mut hv);
        dot(v, &hv) / dot(v, v)
    }

    /// `‖Hv - e v‖`.
    pub fn residual(&self, v: &[f64], e: f64) -> f64 {
        let mut hv = vec![0.0; self.dimension];
        self.apply(v, &mut hv);
        hv.iter().zip(v).map(|(a, b)| (a - e * b).powi(2)).sum::<f64>().sqrt()
    }

    pub fn is_symmetric(&self) -> bool {
        self.entries.iter().all(|&(r, c, v)| self.get(c, r) == v)
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.dimension, self.dimension);
        for &(r, c, v) in &self.entries {
            m[(r, c)] = v;
        }
        m
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Assembles the model with the default ceiling of 16 sites.
pub fn build_hamiltonian(model: &SpinModel) -> Result<SparseHamiltonian> {
    build_hamiltonian_with_ceiling(model, DEFAULT_MAX_SITES)
}

pub fn build_hamiltonian_with_ceiling(model: &SpinModel, max_sites: usize) -> Result<SparseHamiltonian> {
    model.validate()?;
    let n = model.num_sites;
    if n > max_sites.min(crate::sim::MAX_QUBITS) {
        return Err(Error::TooLarge { num_sites: n, ceiling: max_sites });
    }
    let dim = 1usize << n;
    let h = model.field;
    let per_row = match model.kind {
        ModelKind::TFI => n + 1,
        ModelKind::XXZ => n,
    };
    let mut entries = Vec::with_capacity(dim * per_row);
    // sigma^z eigenvalue of bit value b is (-1)^b.
    let z = |i: usize, q: usize| if i & qubit_mask(n, q) == 0 { 1.0 } else { -1.0 };
    for i in 0..dim {
        let zz: f64 = (0..n - 1).map(|j| z(i, j) * z(i, j + 1)).sum();
        match model.kind {
            ModelKind::TFI => {
                entries.push((i, i, -zz));
                if h != 0.0 {
                    for j in 0..n {
                        entries.push((i, i ^ qubit_mask(n, j), -h));
                    }
                }
            }
            ModelKind::XXZ => {
                entries.push((i, i, -h * zz));
                // XX + YY = 2(|01><10| + |10><01|) on each bond.
                for j in 0..n - 1 {
                    if z(i, j) != z(i, j + 1) {
                        let flip = qubit_mask(n, j) | qubit_mask(n, j + 1);
                        entries.push((i, i ^ flip, -2.0));
                    }
                }
            }
        }
    }
    SparseHamiltonian::from_triplets(dim, entries)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dense(kind: ModelKind, n: usize, h: f64) -> DMatrix<f64> {
        build_hamiltonian(&SpinModel::new(kind, n, h)).unwrap().to_dense()
    }

    #[test]
    fn tfi_two_sites_zero_field() {
        let m = dense(ModelKind::TFI, 2, 0.0);
        assert_eq!(m, DMatrix::from_diagonal(&nalgebra::dvector![-1.0, 1.0, 1.0, -1.0]));
    }

    #[test]
    fn tfi_two_sites_unit_field() {
        let m = dense(ModelKind::TFI, 2, 1.0);
        let expected = DMatrix::from_row_slice(
            4,
            4,
            &[
                -1.0, -1.0, -1.0, 0.0, //
                -1.0, 1.0, 0.0, -1.0, //
                -1.0, 0.0, 1.0, -1.0, //
                0.0, -1.0, -1.0, -1.0,
            ],
        );
        assert_eq!(m, expected);
    }

    #[test]
    fn xxz_two_sites_zero_anisotropy() {
        let m = dense(ModelKind::XXZ, 2, 0.0);
        let mut expected = DMatrix::zeros(4, 4);
        expected[(1, 2)] = -2.0;
        expected[(2, 1)] = -2.0;
        assert_eq!(m, expected);
    }

    #[test]
    fn assembled_matrices_are_symmetric() {
        for kind in [ModelKind::TFI, ModelKind::XXZ] {
            for n in 2..=6 {
                let h = build_hamiltonian(&SpinModel::new(kind, n, 0.7)).unwrap();
                assert!(h.is_symmetric());
                let d = h.to_dense();
                assert_eq!(d, d.transpose());
            }
        }
    }

    #[test]
    fn ceiling_and_validation() {
        let big = SpinModel::new(ModelKind::TFI, 17, 1.0);
        assert!(matches!(build_hamiltonian(&big), Err(Error::TooLarge { .. })));
        let tiny = SpinModel::new(ModelKind::TFI, 1, 1.0);
        assert!(matches!(build_hamiltonian(&tiny), Err(Error::InvalidModel(_))));
        let nan = SpinModel::new(ModelKind::XXZ, 3, f64::NAN);
        assert!(build_hamiltonian(&nan).is_err());
    }
}

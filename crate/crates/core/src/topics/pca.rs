//! Exact PCA through the eigendecomposition of the sample covariance
//! (divisor n-1).

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use super::TopicError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcaModel {
    pub mean: Vec<f64>,
    /// d rows of length `dim`, orthonormal.
    pub components: Vec<Vec<f64>>,
    pub explained_variance: Vec<f64>,
}

impl PcaModel {
    pub fn input_dim(&self) -> usize {
        self.mean.len()
    }

    pub fn output_dim(&self) -> usize {
        self.components.len()
    }

    fn component_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.output_dim(), self.input_dim(), |r, c| self.components[r][c])
    }
}

/// Fits the top-`d` principal axes of mean-centered `x` (rows are samples).
/// Each component is sign-fixed so its largest-magnitude coordinate is positive.
pub fn fit_pca(x: &DMatrix<f64>, d: usize) -> Result<PcaModel, TopicError> {
    let (n, dim) = x.shape();
    if n < 2 {
        return Err(TopicError::TooFewSamples(n));
    }
    if d == 0 || d > (n - 1).min(dim) {
        return Err(TopicError::BadDimension { d, n, dim });
    }
    let first = x.row(0);
    if x.row_iter().all(|r| r == first) {
        return Err(TopicError::DegenerateInput);
    }

    let mean: Vec<f64> = x.column_iter().map(|c| c.sum() / n as f64).collect();
    let mut centered = x.clone();
    for (j, mut col) in centered.column_iter_mut().enumerate() {
        col.add_scalar_mut(-mean[j]);
    }
    let cov = (centered.transpose() * &centered) / (n as f64 - 1.0);
    let eig = SymmetricEigen::new(cov);

    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .total_cmp(&eig.eigenvalues[a])
            .then(a.cmp(&b))
    });

    let mut components = Vec::with_capacity(d);
    let mut explained_variance = Vec::with_capacity(d);
    for &idx in order.iter().take(d) {
        let mut v: Vec<f64> = eig.eigenvectors.column(idx).iter().copied().collect();
        let mut pivot = 0;
        for (i, x) in v.iter().enumerate() {
            if x.abs() > v[pivot].abs() {
                pivot = i;
            }
        }
        if v[pivot] < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
        components.push(v);
        explained_variance.push(eig.eigenvalues[idx].max(0.0));
    }
    Ok(PcaModel {
        mean,
        components,
        explained_variance,
    })
}

/// Projects rows of `x` onto the fitted components: (x - mean) · Cᵀ.
pub fn transform(model: &PcaModel, x: &DMatrix<f64>) -> Result<DMatrix<f64>, TopicError> {
    if x.ncols() != model.input_dim() {
        return Err(TopicError::DimMismatch {
            expected: model.input_dim(),
            found: x.ncols(),
        });
    }
    let mut centered = x.clone();
    for (j, mut col) in centered.column_iter_mut().enumerate() {
        col.add_scalar_mut(-model.mean[j]);
    }
    Ok(centered * model.component_matrix().transpose())
}

/// Maps reduced coordinates back into the input space.
pub fn inverse_transform(model: &PcaModel, y: &DMatrix<f64>) -> Result<DMatrix<f64>, TopicError> {
    if y.ncols() != model.output_dim() {
        return Err(TopicError::DimMismatch {
            expected: model.output_dim(),
            found: y.ncols(),
        });
    }
    let mut out = y * model.component_matrix();
    for (j, mut col) in out.column_iter_mut().enumerate() {
        col.add_scalar_mut(model.mean[j]);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn column_variance(y: &DMatrix<f64>, j: usize) -> f64 {
        let n = y.nrows() as f64;
        let m = y.column(j).sum() / n;
        y.column(j).iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n - 1.0)
    }

    #[test]
    fn cross_shaped_points() {
        // covariance diag(2/3, 8/3)
        let x = DMatrix::from_row_slice(4, 2, &[1.0, 0.0, -1.0, 0.0, 0.0, 2.0, 0.0, -2.0]);
        let m = fit_pca(&x, 2).unwrap();
        assert!((m.explained_variance[0] - 8.0 / 3.0).abs() < 1e-12);
        assert!((m.explained_variance[1] - 2.0 / 3.0).abs() < 1e-12);
        assert!((m.components[0][1] - 1.0).abs() < 1e-12);
        assert!((m.components[1][0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn points_on_a_line() {
        let x = DMatrix::from_fn(6, 3, |i, j| (i as f64 - 2.5) * [1.0, -2.0, 0.5][j] + 3.0);
        let m = fit_pca(&x, 1).unwrap();
        assert!(m.explained_variance[0] > 0.0);
        let y = transform(&m, &x).unwrap();
        let back = inverse_transform(&m, &y).unwrap();
        assert!((back - &x).abs().max() < 1e-6);
        // remaining axes carry nothing
        let full = fit_pca(&x, 2).unwrap();
        assert!(full.explained_variance[1].abs() < 1e-10);
    }

    #[test]
    fn degenerate_and_bad_dims() {
        let same = DMatrix::from_element(5, 3, 0.25);
        assert!(matches!(fit_pca(&same, 1), Err(TopicError::DegenerateInput)));
        let x = DMatrix::from_fn(3, 4, |i, j| (i * j) as f64);
        assert!(matches!(fit_pca(&x, 3), Err(TopicError::BadDimension { .. })));
        assert!(matches!(fit_pca(&x.rows(0, 1).into_owned(), 1), Err(TopicError::TooFewSamples(1))));
        let m = fit_pca(&x, 2).unwrap();
        assert!(matches!(
            transform(&m, &DMatrix::zeros(2, 3)),
            Err(TopicError::DimMismatch { expected: 4, found: 3 })
        ));
    }

    #[test]
    fn mean_row_maps_to_origin() {
        let x = DMatrix::from_fn(7, 4, |i, j| ((i * 7 + j * 3) % 5) as f64 - j as f64);
        let m = fit_pca(&x, 3).unwrap();
        let mean = DMatrix::from_row_slice(1, 4, &m.mean);
        assert!(transform(&m, &mean).unwrap().abs().max() < 1e-12);
    }

    proptest! {
        #[test]
        fn invariants_on_random_data(vals in prop::collection::vec(-5f64..5.0, 40), d in 1usize..=4) {
            let x = DMatrix::from_row_slice(10, 4, &vals);
            let m = fit_pca(&x, d).unwrap();
            let c = m.component_matrix();
            let gram = &c * c.transpose();
            prop_assert!((gram - DMatrix::identity(d, d)).abs().max() <= 1e-8);
            for w in m.explained_variance.windows(2) {
                prop_assert!(w[0] >= w[1]);
            }
            let y = transform(&m, &x).unwrap();
            for j in 0..d {
                prop_assert!((column_variance(&y, j) - m.explained_variance[j]).abs() <= 1e-8);
            }
            if d == 4 {
                let back = inverse_transform(&m, &y).unwrap();
                prop_assert!((back - &x).abs().max() <= 1e-6);
                for a in 0..10 {
                    for b in 0..10 {
                        let dx = (x.row(a) - x.row(b)).norm();
                        let dy = (y.row(a) - y.row(b)).norm();
                        prop_assert!((dx - dy).abs() <= 1e-6);
                    }
                }
            }
        }
    }
}

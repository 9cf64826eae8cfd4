use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::DenseMatrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pca {
    /// `n × k` scores of the centered rows.
    pub projected: DenseMatrix,
    /// Share of total variance per retained component, nonincreasing.
    pub explained_ratio: Vec<f64>,
    /// `k × d` loadings; the largest-magnitude loading of each row is positive.
    pub components: DenseMatrix,
    pub mean: Vec<f64>,
}

/// Projects the column-centered `x` onto the top `k` eigenvectors of its
/// sample covariance.
pub fn pca_project(x: &DenseMatrix, k: usize) -> Result<Pca> {
    let (n, d) = (x.rows(), x.cols());
    let max = n.saturating_sub(1).min(d);
    if k == 0 || k > max {
        return Err(Error::ComponentsOutOfRange { k, max });
    }
    let mean: Vec<f64> = (0..d).map(|j| crate::numerics::mean(&x.column_values(j))).collect();
    let centered = DMatrix::from_fn(n, d, |i, j| x.get(i, j) - mean[j]);
    let cov = (centered.transpose() * &centered) / (n - 1) as f64;
    let eig = SymmetricEigen::new(cov);
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|a, b| eig.eigenvalues[*b].total_cmp(&eig.eigenvalues[*a]).then(a.cmp(b)));
    let values: Vec<f64> = order.iter().map(|i| eig.eigenvalues[*i].max(0.0)).collect();
    let total: f64 = values.iter().sum();

    let mut loadings = Vec::with_capacity(k * d);
    for &c in &order[..k] {
        let v = eig.eigenvectors.column(c);
        let lead = (0..d).fold(0, |best, j| if v[j].abs() > v[best].abs() { j } else { best });
        let sign = if v[lead] < 0.0 { -1.0 } else { 1.0 };
        loadings.extend((0..d).map(|j| sign * v[j]));
    }
    let components = DenseMatrix::from_row_major(k, d, loadings)?;
    let scores: Vec<f64> = (0..n)
        .flat_map(|i| {
            let comps = &components;
            let c = &centered;
            (0..k).map(move |r| (0..d).map(|j| c[(i, j)] * comps.get(r, j)).sum::<f64>())
        })
        .collect();
    Ok(Pca {
        projected: DenseMatrix::from_row_major(n, k, scores)?,
        explained_ratio: values[..k].iter().map(|v| if total > 0.0 { v / total } else { 0.0 }).collect(),
        components,
        mean,
    })
}

impl Pca {
    /// Writes `pc1..pck, y, fidelity` rows for plotting.
    pub fn write_csv<W: std::io::Write>(&self, out: W, y: &[f64], fidelity: &[String]) -> Result<()> {
        let n = self.projected.rows();
        if y.len() != n || fidelity.len() != n {
            return Err(Error::DimensionMismatch {
                context: "PCA output rows",
                expected: n,
                got: y.len().min(fidelity.len()),
            });
        }
        let mut w = csv::Writer::from_writer(out);
        let mut header: Vec<String> = (1..=self.projected.cols()).map(|c| format!("pc{c}")).collect();
        header.extend(["y".to_string(), "fidelity".to_string()]);
        w.write_record(&header)?;
        for i in 0..n {
            let mut rec: Vec<String> = self.projected.row(i).iter().map(f64::to_string).collect();
            rec.push(y[i].to_string());
            rec.push(fidelity[i].clone());
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}

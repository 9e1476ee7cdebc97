//! PCA baseline and Grassmannian subspace comparison.
//!
//! PCA here means singular vectors of the raw points-as-columns matrix with
//! no mean subtraction (a centering flag exists but is off by default).
//! Subspaces are compared through principal angles and the geodesic
//! distance sqrt(sum of squared angles).

use crate::error::{Error, Result};
use crate::sap::ProjectionBasis;
use crate::secants::DataMatrix;
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

/// Principal angles between two subspaces, sorted ascending in [0, pi/2].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PrincipalAngles {
    pub angles: Vec<f64>,
}

impl PrincipalAngles {
    /// Number of angles, min(dim U, dim V).
    pub fn q(&self) -> usize {
        self.angles.len()
    }
}

/// Non-increasing singular values with a source tag.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SingularSpectrum {
    pub values: Vec<f64>,
    pub source: String,
}

/// Principal vector pairs (n x q, column-major) aligned with their angles:
/// left_k^T right_k = cos(angle_k).
#[derive(Debug, Clone)]
pub struct PrincipalVectorPairs {
    pub left: Vec<f64>,
    pub right: Vec<f64>,
    pub angles: PrincipalAngles,
}

/// Top-m left singular vectors of the uncentered points-as-columns matrix,
/// plus the full singular spectrum.
pub fn pca_basis(data: &DataMatrix, m: usize) -> Result<(ProjectionBasis, SingularSpectrum)> {
    pca_basis_with(data, m, false)
}

/// PCA with an explicit centering choice; `center = true` subtracts the
/// mean point first.
pub fn pca_basis_with(
    data: &DataMatrix,
    m: usize,
    center: bool,
) -> Result<(ProjectionBasis, SingularSpectrum)> {
    let n = data.dim();
    let npts = data.n_points();
    let q = n.min(npts);
    if m < 1 || m > q {
        return Err(Error::DimensionMismatch(format!(
            "requested {m} singular vectors from a {npts}x{n} data set (max {q})"
        )));
    }
    // Row-major N x n data read column-major is exactly points-as-columns.
    let mut x = DMatrix::from_iterator(n, npts, data.as_slice().iter().copied());
    if center {
        let mut mean = vec![0.0; n];
        for p in 0..npts {
            for (acc, &v) in mean.iter_mut().zip(data.row(p)) {
                *acc += v;
            }
        }
        for v in &mut mean {
            *v /= npts as f64;
        }
        for mut col in x.column_iter_mut() {
            for (entry, &mv) in col.iter_mut().zip(&mean) {
                *entry -= mv;
            }
        }
    }
    let svd = x.svd(true, false);
    let u = svd.u.expect("left singular vectors requested");
    let values: Vec<f64> = svd.singular_values.iter().copied().collect();
    let mut cols = Vec::with_capacity(n * m);
    for j in 0..m {
        cols.extend(u.column(j).iter());
    }
    let basis = ProjectionBasis::from_columns(cols, n, m)?;
    Ok((
        basis,
        SingularSpectrum {
            values,
            source: data.label().to_string(),
        },
    ))
}

/// Principal angles between span(U) and span(V): arccos of the singular
/// values of U^T V, clamped to [0, 1] first, sorted ascending.
///
/// The operand pair is put in a canonical order before the product so the
/// result is bit-identical under argument swap.
pub fn principal_angles(u: &ProjectionBasis, v: &ProjectionBasis) -> Result<PrincipalAngles> {
    if u.ambient_dim() != v.ambient_dim() {
        return Err(Error::DimensionMismatch(format!(
            "ambient dimensions differ: {} vs {}",
            u.ambient_dim(),
            v.ambient_dim()
        )));
    }
    let (first, second) = if basis_order(u, v) == std::cmp::Ordering::Greater {
        (v, u)
    } else {
        (u, v)
    };
    let prod = first.to_matrix().transpose() * second.to_matrix();
    let svd = prod.svd(false, false);
    let mut angles: Vec<f64> = svd
        .singular_values
        .iter()
        .map(|s| s.clamp(0.0, 1.0).acos())
        .collect();
    angles.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(PrincipalAngles { angles })
}

/// Geodesic distance on the Grassmannian: sqrt(sum of squared principal
/// angles). Requires equal ambient and equal subspace dimensions.
pub fn geodesic_distance(u: &ProjectionBasis, v: &ProjectionBasis) -> Result<f64> {
    if u.subspace_dim() != v.subspace_dim() {
        return Err(Error::DimensionMismatch(format!(
            "subspace dimensions differ: {} vs {}",
            u.subspace_dim(),
            v.subspace_dim()
        )));
    }
    let angles = principal_angles(u, v)?;
    Ok(angles.angles.iter().map(|t| t * t).sum::<f64>().sqrt())
}

/// Principal vector pairs for diagnostics, aligned with ascending angles.
pub fn principal_vectors(u: &ProjectionBasis, v: &ProjectionBasis) -> Result<PrincipalVectorPairs> {
    if u.ambient_dim() != v.ambient_dim() {
        return Err(Error::DimensionMismatch(format!(
            "ambient dimensions differ: {} vs {}",
            u.ambient_dim(),
            v.ambient_dim()
        )));
    }
    let mu = u.to_matrix();
    let mv = v.to_matrix();
    let svd = (mu.transpose() * &mv).svd(true, true);
    let a = svd.u.expect("left vectors requested");
    let bt = svd.v_t.expect("right vectors requested");
    let left = &mu * &a;
    let right = &mv * bt.transpose();
    let angles: Vec<f64> = svd
        .singular_values
        .iter()
        .map(|s| s.clamp(0.0, 1.0).acos())
        .collect();
    Ok(PrincipalVectorPairs {
        left: left.as_slice().to_vec(),
        right: right.as_slice().to_vec(),
        angles: PrincipalAngles { angles },
    })
}

/// Deterministic total order on bases so symmetric operations can pick a
/// canonical operand order.
fn basis_order(a: &ProjectionBasis, b: &ProjectionBasis) -> std::cmp::Ordering {
    a.subspace_dim().cmp(&b.subspace_dim()).then_with(|| {
        for (x, y) in a.columns_slice().iter().zip(b.columns_slice()) {
            let o = x.total_cmp(y);
            if o.is_ne() {
                return o;
            }
        }
        std::cmp::Ordering::Equal
    })
}

//! Normalized secant sets of point clouds.
//!
//! A secant is the unit direction `(x - y)/||x - y||` between two distinct
//! points. Secants are stored sign-canonicalized (first coordinate of
//! magnitude above 1e-12 made positive), deduplicated, and optionally
//! subsampled with a recorded seed when the full pairwise set is too large.

use crate::error::{Error, Result};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::collections::HashSet;

/// Default cap on the number of stored secants (N = 10^4 has ~5*10^7 pairs).
pub const DEFAULT_SECANT_CAP: usize = 2_000_000;

/// Pairs closer than `DUPLICATE_POINT_TOL * (1 + max row norm)` are skipped.
const DUPLICATE_POINT_TOL: f64 = 1e-10;

/// Two canonical secants within this Euclidean distance collapse to one.
const DEDUP_TOL: f64 = 1e-9;

/// Coordinates at or below this magnitude are ignored by the sign rule.
const SIGN_TOL: f64 = 1e-12;

/// Row-major point cloud: `rows` points in ambient dimension `cols`.
#[derive(Debug, Clone)]
pub struct DataMatrix {
    data: Vec<f64>,
    rows: usize,
    cols: usize,
    label: String,
}

impl DataMatrix {
    /// Builds a point cloud from a row-major buffer, rejecting non-finite
    /// entries, fewer than two points, or zero ambient dimension.
    pub fn new(data: Vec<f64>, rows: usize, cols: usize, label: impl Into<String>) -> Result<Self> {
        if rows < 2 || cols < 1 {
            return Err(Error::InvalidInput(format!(
                "need at least 2 points and dimension >= 1, got {rows}x{cols}"
            )));
        }
        if data.len() != rows * cols {
            return Err(Error::InvalidInput(format!(
                "buffer length {} does not match {rows}x{cols}",
                data.len()
            )));
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "non-finite entry at row {}, column {}",
                pos / cols,
                pos % cols
            )));
        }
        Ok(Self {
            data,
            rows,
            cols,
            label: label.into(),
        })
    }

    /// Builds from a slice of equal-length rows.
    pub fn from_rows(points: &[Vec<f64>], label: impl Into<String>) -> Result<Self> {
        let rows = points.len();
        let cols = points.first().map_or(0, Vec::len);
        if points.iter().any(|p| p.len() != cols) {
            return Err(Error::InvalidInput("ragged rows".into()));
        }
        let mut data = Vec::with_capacity(rows * cols);
        for p in points {
            data.extend_from_slice(p);
        }
        Self::new(data, rows, cols, label)
    }

    pub fn n_points(&self) -> usize {
        self.rows
    }

    /// Ambient dimension.
    pub fn dim(&self) -> usize {
        self.cols
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn set_label(&mut self, label: impl Into<String>) {
        self.label = label.into();
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }
}

/// Deduplicated, sign-canonicalized unit secants of a point cloud.
#[derive(Debug, Clone)]
pub struct SecantSet {
    data: Vec<f64>,
    count: usize,
    dim: usize,
    subsampled: bool,
    seed: Option<u64>,
}

impl SecantSet {
    pub fn count(&self) -> usize {
        self.count
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// True when the pairwise set exceeded the cap and a seeded subsample
    /// was drawn.
    pub fn subsampled(&self) -> bool {
        self.subsampled
    }

    /// The subsampling seed; `Some` exactly when `subsampled()` is true.
    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// Read-only chunks of whole rows, at most `rows_per_chunk` each.
    pub(crate) fn row_chunks(&self, rows_per_chunk: usize) -> impl IndexedParallelIterator<Item = &[f64]> {
        self.data.par_chunks(rows_per_chunk * self.dim)
    }
}

/// Builds the normalized secant set of `data`.
///
/// All index pairs i < j are formed as `(x_i - x_j)` normalized to unit
/// length, sign-canonicalized, and deduplicated. When the pair count
/// exceeds `max_secants`, a uniform seeded subsample of that many pairs is
/// drawn first and the set is flagged as subsampled. A missing seed
/// defaults to 0 so runs stay reproducible.
pub fn build_secants(
    data: &DataMatrix,
    max_secants: Option<usize>,
    seed: Option<u64>,
) -> Result<SecantSet> {
    if let Some(0) = max_secants {
        return Err(Error::InvalidConfig("max_secants must be positive".into()));
    }
    let n = data.n_points();
    let dim = data.dim();
    let total_pairs = n as u64 * (n as u64 - 1) / 2;

    let max_norm = (0..n)
        .map(|i| norm(data.row(i)))
        .fold(0.0f64, f64::max);
    let skip_tol = DUPLICATE_POINT_TOL * (1.0 + max_norm);

    let cap = max_secants.unwrap_or(usize::MAX);
    let (pair_indices, subsampled, used_seed) = if total_pairs > cap as u64 {
        let s = seed.unwrap_or(0);
        (sample_pair_indices(total_pairs, cap, s), true, Some(s))
    } else {
        ((0..total_pairs).collect(), false, None)
    };

    // Materialize sampled pairs in index order; degenerate pairs become NaN
    // rows and are dropped before dedup.
    let mut rows = vec![0.0f64; pair_indices.len() * dim];
    rows.par_chunks_mut(dim)
        .zip(pair_indices.par_iter())
        .for_each(|(out, &k)| {
            let (i, j) = pair_from_index(k, n as u64);
            let xi = data.row(i as usize);
            let xj = data.row(j as usize);
            let mut norm_sq = 0.0;
            for c in 0..dim {
                let d = xi[c] - xj[c];
                out[c] = d;
                norm_sq += d * d;
            }
            let len = norm_sq.sqrt();
            if len < skip_tol {
                out[0] = f64::NAN;
            } else {
                for v in out.iter_mut() {
                    *v /= len;
                }
                canonicalize_sign(out);
            }
        });

    let mut kept: Vec<usize> = (0..pair_indices.len())
        .filter(|&r| !rows[r * dim].is_nan())
        .collect();
    if kept.is_empty() {
        return Err(Error::AllPointsCoincident);
    }

    sort_and_dedup(&rows, dim, &mut kept);

    let mut out = Vec::with_capacity(kept.len() * dim);
    for &r in &kept {
        out.extend_from_slice(&rows[r * dim..(r + 1) * dim]);
    }
    Ok(SecantSet {
        data: out,
        count: kept.len(),
        dim,
        subsampled,
        seed: used_seed,
    })
}

/// Minimum projected secant norm `min_s ||B^T s||` and the index of a
/// minimizing row (lowest index on ties).
///
/// Secants are scanned in fixed-size chunks and chunk minima are combined
/// in (value, index) lexicographic order, so the result does not depend on
/// thread scheduling.
pub fn min_projected_norm(
    secants: &SecantSet,
    basis: &crate::sap::ProjectionBasis,
) -> Result<(f64, usize)> {
    if basis.ambient_dim() != secants.dim() {
        return Err(Error::DimensionMismatch(format!(
            "basis ambient dimension {} vs secant dimension {}",
            basis.ambient_dim(),
            secants.dim()
        )));
    }
    let (norm_sq, idx) = min_projected_norm_sq(secants, basis.columns_slice(), basis.subspace_dim());
    Ok((norm_sq.sqrt(), idx))
}

/// Chunk size (in rows) for parallel scans over the secant set.
pub(crate) const SCAN_CHUNK_ROWS: usize = 65_536;

/// Core reduction shared with the optimizer: returns (min ||B^T s||^2, index).
pub(crate) fn min_projected_norm_sq(secants: &SecantSet, cols: &[f64], m: usize) -> (f64, usize) {
    let dim = secants.dim();
    let chunk_minima: Vec<(f64, usize)> = secants
        .row_chunks(SCAN_CHUNK_ROWS)
        .enumerate()
        .map(|(ci, chunk)| {
            let base = ci * SCAN_CHUNK_ROWS;
            let mut best = (f64::INFINITY, 0usize);
            for (r, row) in chunk.chunks_exact(dim).enumerate() {
                let mut nrm = 0.0;
                for j in 0..m {
                    let d = dot(row, &cols[j * dim..(j + 1) * dim]);
                    nrm += d * d;
                }
                if nrm < best.0 {
                    best = (nrm, base + r);
                }
            }
            best
        })
        .collect();
    chunk_minima
        .into_iter()
        .fold((f64::INFINITY, usize::MAX), |acc, c| {
            if c.0 < acc.0 || (c.0 == acc.0 && c.1 < acc.1) {
                c
            } else {
                acc
            }
        })
}

/// Dot product with four accumulators; fixed association order.
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0f64; 4];
    let (a4, ar) = a.split_at(a.len() - a.len() % 4);
    let (b4, br) = b.split_at(a4.len());
    for (ca, cb) in a4.chunks_exact(4).zip(b4.chunks_exact(4)) {
        acc[0] += ca[0] * cb[0];
        acc[1] += ca[1] * cb[1];
        acc[2] += ca[2] * cb[2];
        acc[3] += ca[3] * cb[3];
    }
    let mut tail = 0.0;
    for (x, y) in ar.iter().zip(br) {
        tail += x * y;
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

pub(crate) fn norm(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}

/// Makes the first coordinate of magnitude above `SIGN_TOL` positive.
fn canonicalize_sign(row: &mut [f64]) {
    for &c in row.iter() {
        if c.abs() > SIGN_TOL {
            if c < 0.0 {
                for v in row.iter_mut() {
                    *v = -*v;
                }
            }
            return;
        }
    }
}

/// Lexicographic sort of the kept rows followed by a bounded backscan that
/// drops rows within `DEDUP_TOL` of an earlier kept row. Exact duplicates
/// are always adjacent after the sort and therefore always collapse; the
/// backscan window extends the tolerance to near-duplicates without
/// risking a quadratic pass on degenerate inputs.
fn sort_and_dedup(rows: &[f64], dim: usize, kept: &mut Vec<usize>) {
    const MAX_BACKSCAN: usize = 64;
    let row = |r: usize| &rows[r * dim..(r + 1) * dim];
    kept.sort_unstable_by(|&a, &b| {
        row(a)
            .iter()
            .zip(row(b))
            .find_map(|(x, y)| x.partial_cmp(y).filter(|o| o.is_ne()))
            .unwrap_or(std::cmp::Ordering::Equal)
    });

    let tol_sq = DEDUP_TOL * DEDUP_TOL;
    let mut out: Vec<usize> = Vec::with_capacity(kept.len());
    'next: for &r in kept.iter() {
        let cand = row(r);
        for &p in out.iter().rev().take(MAX_BACKSCAN) {
            let prev = row(p);
            if cand[0] - prev[0] > DEDUP_TOL {
                break;
            }
            let mut d = 0.0;
            for (x, y) in cand.iter().zip(prev) {
                let e = x - y;
                d += e * e;
                if d >= tol_sq {
                    break;
                }
            }
            if d < tol_sq {
                continue 'next;
            }
        }
        out.push(r);
    }
    *kept = out;
}

/// Maps a flat pair index to (i, j) with i < j, pairs ordered by i then j.
fn pair_from_index(k: u64, n: u64) -> (u64, u64) {
    // offset(i) = i*(2n-i-1)/2 counts pairs with first index < i.
    let offset = |i: u64| i * (2 * n - i - 1) / 2;
    let mut i = {
        let a = (2 * n - 1) as f64;
        let disc = (a * a - 8.0 * k as f64).max(0.0);
        ((a - disc.sqrt()) / 2.0).floor() as u64
    };
    i = i.min(n - 2);
    while i > 0 && offset(i) > k {
        i -= 1;
    }
    while offset(i + 1) <= k {
        i += 1;
    }
    let j = i + 1 + (k - offset(i));
    (i, j)
}

/// Uniform sample of `cap` distinct pair indices, returned sorted.
fn sample_pair_indices(total: u64, cap: usize, seed: u64) -> Vec<u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picked: Vec<u64>;
    if (cap as u64) <= total / 2 {
        let mut set = HashSet::with_capacity(cap);
        while set.len() < cap {
            set.insert(rng.gen_range(0..total));
        }
        picked = set.into_iter().collect();
    } else {
        // Cap close to the total: sample the complement instead.
        let drop_n = (total - cap as u64) as usize;
        let mut excluded = HashSet::with_capacity(drop_n);
        while excluded.len() < drop_n {
            excluded.insert(rng.gen_range(0..total));
        }
        picked = (0..total).filter(|k| !excluded.contains(k)).collect();
    }
    picked.sort_unstable();
    picked
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sap::ProjectionBasis;

    fn dm(points: &[&[f64]]) -> DataMatrix {
        let rows: Vec<Vec<f64>> = points.iter().map(|p| p.to_vec()).collect();
        DataMatrix::from_rows(&rows, "test").unwrap()
    }

    #[test]
    fn triangle_secants() {
        let data = dm(&[&[0.0, 0.0], &[1.0, 0.0], &[0.0, 1.0]]);
        let s = build_secants(&data, None, None).unwrap();
        assert_eq!(s.count(), 3);
        assert!(!s.subsampled());
        assert_eq!(s.seed(), None);
        let mut rows: Vec<Vec<f64>> = (0..3).map(|i| s.row(i).to_vec()).collect();
        rows.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let inv = std::f64::consts::FRAC_1_SQRT_2;
        let expect = [
            vec![0.0, 1.0],
            vec![inv, -inv],
            vec![1.0, 0.0],
        ];
        for (got, want) in rows.iter().zip(&expect) {
            for (g, w) in got.iter().zip(want) {
                assert!((g - w).abs() < 1e-12, "{rows:?}");
            }
        }
    }

    #[test]
    fn collinear_points_share_one_direction() {
        let data = dm(&[&[0.0, 0.0], &[2.0, 0.0], &[5.0, 0.0]]);
        let s = build_secants(&data, None, None).unwrap();
        assert_eq!(s.count(), 1);
        assert!((s.row(0)[0] - 1.0).abs() < 1e-15);
        assert!(s.row(0)[1].abs() < 1e-15);
    }

    #[test]
    fn coincident_points_error() {
        let data = dm(&[&[1.0, 2.0], &[1.0, 2.0]]);
        match build_secants(&data, None, None) {
            Err(Error::AllPointsCoincident) => {}
            other => panic!("expected AllPointsCoincident, got {other:?}"),
        }
    }

    #[test]
    fn non_finite_rejected() {
        assert!(matches!(
            DataMatrix::new(vec![0.0, f64::NAN], 2, 1, ""),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn count_formula_general_position() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 40;
        let data: Vec<f64> = (0..n * 3).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let data = DataMatrix::new(data, n, 3, "rand").unwrap();
        let s = build_secants(&data, None, None).unwrap();
        assert_eq!(s.count(), n * (n - 1) / 2);
    }

    #[test]
    fn canonical_sign_rule_holds() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 25;
        let data: Vec<f64> = (0..n * 4).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let data = DataMatrix::new(data, n, 4, "rand").unwrap();
        let s = build_secants(&data, None, None).unwrap();
        for i in 0..s.count() {
            let row = s.row(i);
            let first = row.iter().find(|c| c.abs() > 1e-12).unwrap();
            assert!(*first > 0.0);
            assert!((norm(row) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn subsample_is_reproducible() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 300;
        let data: Vec<f64> = (0..n * 2).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let data = DataMatrix::new(data, n, 2, "rand").unwrap();
        let a = build_secants(&data, Some(1000), Some(7)).unwrap();
        let b = build_secants(&data, Some(1000), Some(7)).unwrap();
        assert_eq!(a.count(), 1000);
        assert!(a.subsampled());
        assert_eq!(a.seed(), Some(7));
        assert_eq!(a.as_slice(), b.as_slice());
        let c = build_secants(&data, Some(1000), Some(8)).unwrap();
        assert_ne!(a.as_slice(), c.as_slice());
    }

    #[test]
    fn min_norm_identity_basis_is_one() {
        let data = dm(&[&[0.2, -0.4, 1.0], &[1.0, 0.3, -0.2], &[-0.5, 0.8, 0.1]]);
        let s = build_secants(&data, None, None).unwrap();
        let basis = ProjectionBasis::identity(3, 3).unwrap();
        let (kappa, _) = min_projected_norm(&s, &basis).unwrap();
        assert!((kappa - 1.0).abs() < 1e-12);
    }

    #[test]
    fn min_norm_annihilated_direction() {
        let s = SecantSet {
            data: vec![1.0, 0.0, 0.0, 1.0],
            count: 2,
            dim: 2,
            subsampled: false,
            seed: None,
        };
        let basis = ProjectionBasis::from_columns(vec![1.0, 0.0], 2, 1).unwrap();
        let (kappa, idx) = min_projected_norm(&s, &basis).unwrap();
        assert_eq!(kappa, 0.0);
        assert_eq!(idx, 1);
    }

    #[test]
    fn min_norm_picks_lowest_index() {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let s = SecantSet {
            data: vec![1.0, 0.0, r, r],
            count: 2,
            dim: 2,
            subsampled: false,
            seed: None,
        };
        let basis = ProjectionBasis::from_columns(vec![0.0, 1.0], 2, 1).unwrap();
        let (kappa, idx) = min_projected_norm(&s, &basis).unwrap();
        assert_eq!(kappa, 0.0);
        assert_eq!(idx, 0);
    }

    #[test]
    fn dimension_mismatch_reported() {
        let data = dm(&[&[0.0, 0.0], &[1.0, 0.0]]);
        let s = build_secants(&data, None, None).unwrap();
        let basis = ProjectionBasis::identity(3, 2).unwrap();
        assert!(matches!(
            min_projected_norm(&s, &basis),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn pair_index_roundtrip() {
        let n = 57u64;
        let mut k = 0u64;
        for i in 0..n - 1 {
            for j in i + 1..n {
                assert_eq!(pair_from_index(k, n), (i, j));
                k += 1;
            }
        }
    }
}

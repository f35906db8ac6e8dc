//! Stiefel manifold primitives.
//!
//! The feasible set is `St(d, r) = {U ∈ ℝ^{d×r} : UᵀU = I_r}` with the
//! Euclidean (Frobenius) metric inherited from `ℝ^{d×r}`. Tangent vectors at
//! `U` are the matrices `D` with `UᵀD + DᵀU = 0`.

use std::io::{Read, Write};

use nalgebra::SymmetricEigen;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::{Error, Mat, Result};

/// Feasibility tolerance for validating points handed in from outside.
pub const TOL_ORTH: f64 = 1e-8;
/// Tangency tolerance for validating tangent vectors.
pub const TOL_TAN: f64 = 1e-8;

/// A `d×r` matrix with orthonormal columns.
#[derive(Debug, Clone, PartialEq)]
pub struct StiefelPoint(Mat);

impl StiefelPoint {
    /// Validates `UᵀU = I_r` to [`TOL_ORTH`].
    pub fn new(entries: Mat) -> Result<Self> {
        Self::with_tolerance(entries, TOL_ORTH)
    }

    pub fn with_tolerance(entries: Mat, tol: f64) -> Result<Self> {
        let (d, r) = entries.shape();
        if r == 0 || r > d {
            return Err(Error::Dimension(format!(
                "Stiefel point needs 1 <= r <= d, got {d}x{r}"
            )));
        }
        let err = orthonormality_error(&entries);
        if !(err <= tol) {
            return Err(Error::Input(format!(
                "columns are not orthonormal: ||UᵀU - I|| = {err:e} > {tol:e}"
            )));
        }
        Ok(StiefelPoint(entries))
    }

    pub fn matrix(&self) -> &Mat {
        &self.0
    }

    pub fn into_matrix(self) -> Mat {
        self.0
    }

    /// Ambient dimension `d`.
    pub fn d(&self) -> usize {
        self.0.nrows()
    }

    /// Subspace dimension `r`.
    pub fn r(&self) -> usize {
        self.0.ncols()
    }

    /// `U Q` for an orthogonal `r×r` matrix `Q`; spans the same subspace.
    pub fn rotate(&self, q: &Mat) -> Result<Self> {
        if q.shape() != (self.r(), self.r()) {
            return Err(Error::Dimension(format!(
                "rotation must be {0}x{0}, got {1}x{2}",
                self.r(),
                q.nrows(),
                q.ncols()
            )));
        }
        StiefelPoint::new(&self.0 * q)
    }

    /// Writes `d` rows of `r` comma-separated values, no header.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new()
            .has_headers(false)
            .from_writer(writer);
        for i in 0..self.d() {
            w.write_record(self.0.row(i).iter().map(|v| v.to_string()))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        Self::read_csv_with_tolerance(reader, TOL_ORTH)
    }

    /// Reads a checkpoint, accepting orthonormality error up to `tol`.
    pub fn read_csv_with_tolerance<R: Read>(reader: R, tol: f64) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let mut rows: Vec<Vec<f64>> = Vec::new();
        for (line, record) in rdr.records().enumerate() {
            let record = record?;
            let row = record
                .iter()
                .map(|s| {
                    s.parse::<f64>().map_err(|_| {
                        Error::Input(format!("row {}: '{s}' is not a number", line + 1))
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            if let Some(first) = rows.first() {
                if first.len() != row.len() {
                    return Err(Error::Dimension(format!(
                        "row {} has {} columns, expected {}",
                        line + 1,
                        row.len(),
                        first.len()
                    )));
                }
            }
            rows.push(row);
        }
        if rows.is_empty() {
            return Err(Error::Dimension("empty matrix".into()));
        }
        let (d, r) = (rows.len(), rows[0].len());
        StiefelPoint::with_tolerance(Mat::from_fn(d, r, |i, j| rows[i][j]), tol)
    }
}

/// A direction in the tangent space at some Stiefel point.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentVector(Mat);

impl TangentVector {
    /// Validates `UᵀD + DᵀU = 0` to [`TOL_TAN`].
    pub fn new(base: &StiefelPoint, entries: Mat) -> Result<Self> {
        if entries.shape() != base.matrix().shape() {
            return Err(shape_error(base.matrix(), &entries));
        }
        let err = tangency_error(base, &entries);
        if !(err <= TOL_TAN) {
            return Err(Error::Input(format!(
                "not tangent: ||UᵀD + DᵀU|| = {err:e} > {TOL_TAN:e}"
            )));
        }
        Ok(TangentVector(entries))
    }

    pub fn zeros(base: &StiefelPoint) -> Self {
        TangentVector(Mat::zeros(base.d(), base.r()))
    }

    pub fn matrix(&self) -> &Mat {
        &self.0
    }

    pub fn into_matrix(self) -> Mat {
        self.0
    }

    /// Frobenius norm, the metric norm on the tangent space.
    pub fn norm(&self) -> f64 {
        self.0.norm()
    }

    pub fn scale(&self, t: f64) -> Self {
        TangentVector(&self.0 * t)
    }

    pub fn inner(&self, other: &Mat) -> f64 {
        self.0.dot(other)
    }
}

fn shape_error(u: &Mat, g: &Mat) -> Error {
    Error::Dimension(format!(
        "expected {}x{}, got {}x{}",
        u.nrows(),
        u.ncols(),
        g.nrows(),
        g.ncols()
    ))
}

/// `‖UᵀD + DᵀU‖_F`.
pub fn tangency_error(u: &StiefelPoint, d: &Mat) -> f64 {
    let utd = u.matrix().transpose() * d;
    (&utd + utd.transpose()).norm()
}

/// Orthogonal projection onto `T_U St`: `G − U(UᵀG + GᵀU)/2`.
pub fn project_to_tangent(u: &StiefelPoint, g: &Mat) -> Result<TangentVector> {
    let um = u.matrix();
    if g.shape() != um.shape() {
        return Err(shape_error(um, g));
    }
    let utg = um.transpose() * g;
    let sym = (&utg + utg.transpose()) * 0.5;
    Ok(TangentVector(g - um * sym))
}

/// Polar retraction `(U + D)(I_r + DᵀD)^{-1/2}`.
///
/// For tangent `D`, `(U + D)ᵀ(U + D) = I + DᵀD`, so this is the orthonormal
/// polar factor of `U + D`. The Gram matrix is formed from `U + D` itself:
/// with long steps, the `I + DᵀD` form lets roundoff in `UᵀU` grow from one
/// iterate to the next. The inverse square root comes from an `r×r`
/// symmetric eigendecomposition.
pub fn polar_retract(u: &StiefelPoint, d: &TangentVector) -> Result<StiefelPoint> {
    let (um, dm) = (u.matrix(), d.matrix());
    if dm.shape() != um.shape() {
        return Err(shape_error(um, dm));
    }
    let m = um + dm;
    let inv_sqrt = inverse_sqrt_spd(m.transpose() * &m)?;
    Ok(StiefelPoint(m * inv_sqrt))
}

/// `A^{-1/2}` for symmetric positive definite `A`.
fn inverse_sqrt_spd(a: Mat) -> Result<Mat> {
    let eig = SymmetricEigen::new(a);
    if let Some(bad) = eig.eigenvalues.iter().find(|&&l| !(l > 0.0 && l.is_finite())) {
        return Err(Error::Numerical(format!(
            "retraction Gram matrix is not positive definite (eigenvalue {bad:e})"
        )));
    }
    let scaled = eig.eigenvalues.map(|l| 1.0 / l.sqrt());
    let v = &eig.eigenvectors;
    Ok(v * Mat::from_diagonal(&scaled) * v.transpose())
}

/// Orthonormal factor of a seeded standard-Gaussian `d×r` matrix.
///
/// Uses ChaCha8 seeded from `seed`; entries are drawn in column-major order.
/// The Q factor is sign-normalized so that `R` has a positive diagonal.
pub fn random_stiefel(d: usize, r: usize, seed: u64) -> Result<StiefelPoint> {
    if r == 0 || r > d {
        return Err(Error::Dimension(format!(
            "random Stiefel point needs 1 <= r <= d, got d={d}, r={r}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = Mat::from_fn(d, r, |_, _| StandardNormal.sample(&mut rng));
    let qr = g.qr();
    let mut q = qr.q();
    let rdiag = qr.r().diagonal();
    for (j, &rj) in rdiag.iter().enumerate() {
        if rj < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    Ok(StiefelPoint(q))
}

/// `‖UᵀU − I_r‖_F`.
pub fn orthonormality_error(u: &Mat) -> f64 {
    let r = u.ncols();
    (u.transpose() * u - Mat::identity(r, r)).norm()
}

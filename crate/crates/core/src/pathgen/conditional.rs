//! Irregular-time simulation from a fine regular grid.
//!
//! The path is drawn exactly on a grid of step `h` by circulant embedding.
//! Each observation in cell `[g_c, g_{c+1})` is then drawn from its Gaussian
//! law conditional on the local grid increments `X(g_{c+r}) - X(g_c)`,
//! `r = -K+1..K`. Observations sharing a cell are drawn jointly. Residual
//! correlation between different cells is ignored; it lives at frequencies
//! near `π / h` and above.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use super::CirculantSampler;
use crate::error::{Error, Result};
use crate::spectral::SpectralModel;

pub struct GridConditionalSampler<'m> {
    model: &'m SpectralModel,
    h: f64,
    neighbors: usize,
    /// Number of grid cells covering `[0, horizon]`.
    cells: usize,
    grid: CirculantSampler,
    /// Relative neighbor offsets `r` (nonzero, `-K+1..=K`).
    offsets: Vec<i64>,
    /// `v(j h)` for `j = 0..=2K`.
    v_grid: Vec<f64>,
    /// Pseudo-inverse of the neighbor-increment covariance.
    zz_pinv: DMatrix<f64>,
}

impl std::fmt::Debug for GridConditionalSampler<'_> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("GridConditionalSampler")
            .field("h", &self.h)
            .field("neighbors", &self.neighbors)
            .field("cells", &self.cells)
            .finish()
    }
}

impl<'m> GridConditionalSampler<'m> {
    pub fn new(model: &'m SpectralModel, horizon: f64, h: f64, neighbors: usize) -> Result<Self> {
        if !(h > 0.0 && horizon > 0.0) || neighbors == 0 {
            return Err(Error::InvalidConfig(format!(
                "grid-conditional sampler needs h > 0, horizon > 0, neighbors >= 1 (h = {h}, horizon = {horizon}, neighbors = {neighbors})"
            )));
        }
        let k = neighbors;
        let cells = (horizon / h).floor() as usize + 1;
        let grid = CirculantSampler::new(model, h, cells + 2 * k)?;
        let v_grid: Vec<f64> = (0..=2 * k)
            .map(|j| model.increment_variance(j as f64 * h))
            .collect::<Result<_>>()?;
        let offsets: Vec<i64> = (-(k as i64) + 1..=k as i64).filter(|r| *r != 0).collect();
        let vg = |r: i64| v_grid[r.unsigned_abs() as usize];
        let p = offsets.len();
        let zz = DMatrix::from_fn(p, p, |i, j| {
            let (r, s) = (offsets[i], offsets[j]);
            0.5 * (vg(r) + vg(s) - vg(r - s))
        });
        let eig = zz.symmetric_eigen();
        let top = eig.eigenvalues.iter().copied().fold(0.0f64, f64::max);
        let inv_vals = eig.eigenvalues.map(|l| if l > 1e-12 * top { 1.0 / l } else { 0.0 });
        let zz_pinv = &eig.eigenvectors * DMatrix::from_diagonal(&inv_vals) * eig.eigenvectors.transpose();
        Ok(GridConditionalSampler {
            model,
            h,
            neighbors: k,
            cells,
            grid,
            offsets,
            v_grid,
            zz_pinv,
        })
    }

    pub fn step(&self) -> f64 {
        self.h
    }

    /// Values at `times` (which must lie in `[0, horizon]`, `times[0] = 0`).
    pub fn sample<R: Rng + ?Sized>(&self, times: &[f64], rng: &mut R) -> Result<Vec<f64>> {
        let k = self.neighbors as i64;
        let h = self.h;
        if let Some(t) = times
            .iter()
            .find(|t| **t < 0.0 || (**t / h).floor() as usize >= self.cells)
        {
            return Err(Error::InvalidConfig(format!(
                "time {t} outside the simulated horizon {}",
                self.cells as f64 * h
            )));
        }
        let fine = self.grid.sample(rng);
        // X(g_j) for grid index j ≥ -K, pinned so X(0) = 0.
        let x_grid = |j: i64| fine[(j + k) as usize] - fine[k as usize];
        let vg = |r: i64| self.v_grid[r.unsigned_abs() as usize];
        let v = |t: f64| self.model.increment_variance(t);

        let mut out = Vec::with_capacity(times.len());
        let mut start = 0;
        while start < times.len() {
            let c = (times[start] / h).floor() as i64;
            let mut end = start + 1;
            while end < times.len() && (times[end] / h).floor() as i64 == c {
                end += 1;
            }
            let base = c as f64 * h;
            let u: Vec<f64> = times[start..end].iter().map(|t| t - base).collect();
            let m = u.len();
            let p = self.offsets.len();
            let vu: Vec<f64> = u.iter().map(|x| v(*x)).collect::<Result<_>>()?;
            let mut cross = DMatrix::zeros(m, p);
            for (i, ui) in u.iter().enumerate() {
                for (j, r) in self.offsets.iter().enumerate() {
                    let d = v(ui - *r as f64 * h)?;
                    cross[(i, j)] = 0.5 * (vu[i] + vg(*r) - d);
                }
            }
            let mut dd = DMatrix::zeros(m, m);
            for i in 0..m {
                dd[(i, i)] = vu[i];
                for j in 0..i {
                    let c = 0.5 * (vu[i] + vu[j] - v(u[i] - u[j])?);
                    dd[(i, j)] = c;
                    dd[(j, i)] = c;
                }
            }
            let z = DVector::from_iterator(p, self.offsets.iter().map(|r| x_grid(c + r) - x_grid(c)));
            let w = &cross * &self.zz_pinv;
            let mean = &w * z;
            let cond = dd - &w * cross.transpose();
            let noise: Vec<f64> = (0..m).map(|_| rng.sample(StandardNormal)).collect();
            let resid = sqrt_apply(cond, &noise);
            let anchor = x_grid(c);
            for i in 0..m {
                out.push(anchor + mean[i] + resid[i]);
            }
            start = end;
        }
        // X(0) = 0 exactly.
        if times.first() == Some(&0.0) {
            out[0] = 0.0;
        }
        Ok(out)
    }
}

/// `S^{1/2} ε` for a symmetric PSD `S`, clipping negative eigenvalues.
fn sqrt_apply(s: DMatrix<f64>, eps: &[f64]) -> Vec<f64> {
    if s.nrows() == 1 {
        return vec![s[(0, 0)].max(0.0).sqrt() * eps[0]];
    }
    let eig = s.symmetric_eigen();
    let e = DVector::from_column_slice(eps);
    let scaled = eig
        .eigenvalues
        .map(|l| l.max(0.0).sqrt())
        .component_mul(&(eig.eigenvectors.transpose() * e));
    (&eig.eigenvectors * scaled).iter().copied().collect()
}

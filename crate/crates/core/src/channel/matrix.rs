use super::ChannelError;
use crate::optics::{channel_gain, ApertureLayout, OpticsError, OverlapTable, PropagatedField, Vec2};
use nalgebra::DMatrix;
use num_complex::Complex64;

/// β_i counts toward the rank iff β_i > RANK_THRESHOLD · β_max.
pub const RANK_THRESHOLD: f64 = 1e-10;

const SVD_EPS: f64 = 1e-15;
const SVD_MAX_ITER: usize = 10_000;

/// Anything able to report the complex gain between transmitter `j` and receiver `i`.
pub trait GainSource: Sync {
    fn gain(&self, j: usize, i: usize, layout: &ApertureLayout, offset: Vec2) -> Result<Complex64, OpticsError>;
}

impl GainSource for PropagatedField {
    fn gain(&self, j: usize, i: usize, layout: &ApertureLayout, offset: Vec2) -> Result<Complex64, OpticsError> {
        channel_gain(j, i, self, layout, offset)
    }
}

impl GainSource for OverlapTable {
    fn gain(&self, j: usize, i: usize, layout: &ApertureLayout, offset: Vec2) -> Result<Complex64, OpticsError> {
        OverlapTable::gain(self, j, i, layout, offset)
    }
}

/// One realisation of the MIMO channel.
#[derive(Debug, Clone)]
pub struct ChannelDraw {
    /// N_R × N_T gain matrix.
    pub h: DMatrix<Complex64>,
    /// Singular values in descending order, clamped to at most 1.
    pub singular_values: Vec<f64>,
    pub rank: usize,
    pub misalignment_offset: Vec2,
    /// Turbulence factor T_t per sub-channel (min(N_T, N_R) entries).
    pub turbulence: Vec<f64>,
    /// Set when some singular value exceeded 1 and was clamped.
    pub beta_clamped: bool,
}

impl ChannelDraw {
    /// Decomposes `h` and attaches the turbulence samples.
    pub fn from_matrix(h: DMatrix<Complex64>, offset: Vec2, turbulence: Vec<f64>) -> Result<Self, ChannelError> {
        let n_sub = h.nrows().min(h.ncols());
        if turbulence.len() < n_sub {
            return Err(ChannelError::ModelConsistency(format!(
                "{} turbulence samples for {n_sub} sub-channels",
                turbulence.len()
            )));
        }
        if let Some(t) = turbulence.iter().find(|t| !(**t > 0.0) || !t.is_finite()) {
            return Err(ChannelError::InvalidParameter { name: "turbulence sample", value: *t });
        }
        let fro = h.norm();
        if !fro.is_finite() {
            return Err(ChannelError::Svd("channel matrix has non-finite entries".into()));
        }
        let svd = h.clone().try_svd(false, false, SVD_EPS, SVD_MAX_ITER).ok_or_else(|| {
            ChannelError::Svd(format!(
                "no convergence after {SVD_MAX_ITER} iterations ({}x{}, Frobenius norm {fro:.3e})",
                h.nrows(),
                h.ncols()
            ))
        })?;
        let mut beta: Vec<f64> = svd.singular_values.iter().copied().collect();
        beta.sort_by(|a, b| b.total_cmp(a));
        let beta_max = beta.first().copied().unwrap_or(0.0);
        let rank = beta.iter().filter(|b| **b > RANK_THRESHOLD * beta_max && **b > 0.0).count();
        let mut beta_clamped = false;
        for b in beta.iter_mut().filter(|b| **b > 1.0) {
            log::warn!("singular value {b} exceeds 1; clamped");
            *b = 1.0;
            beta_clamped = true;
        }
        Ok(Self { h, singular_values: beta, rank, misalignment_offset: offset, turbulence, beta_clamped })
    }

    /// Non-zero singular values, i.e. the first `rank` entries.
    pub fn active(&self) -> &[f64] {
        &self.singular_values[..self.rank]
    }
}

/// Fills H from `source` at a common receive-array offset and decomposes it.
pub fn build_channel<S: GainSource + ?Sized>(
    source: &S,
    layout: &ApertureLayout,
    offset: Vec2,
    turbulence: Vec<f64>,
) -> Result<ChannelDraw, ChannelError> {
    let (n_r, n_t) = (layout.n_rx(), layout.n_tx());
    let mut h = DMatrix::<Complex64>::zeros(n_r, n_t);
    for i in 0..n_r {
        for j in 0..n_t {
            h[(i, j)] = source.gain(j, i, layout, offset)?;
        }
    }
    ChannelDraw::from_matrix(h, offset, turbulence)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optics::{propagate_field, BeamGeometry, GridSpec};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_matrix(rows: usize, cols: usize, seed: u64) -> DMatrix<Complex64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        DMatrix::from_fn(rows, cols, |_, _| {
            Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5) * 0.2
        })
    }

    #[test]
    fn reconstruction_and_frobenius() {
        for (r, c, seed) in [(4, 4, 1), (8, 3, 2), (3, 8, 3), (16, 16, 4)] {
            let h = random_matrix(r, c, seed);
            let svd = h.clone().svd(true, true);
            let u = svd.u.as_ref().unwrap();
            let vt = svd.v_t.as_ref().unwrap();
            let sigma = DMatrix::from_diagonal(&svd.singular_values.map(|s| Complex64::new(s, 0.0)));
            let rebuilt = u * sigma * vt;
            assert!((rebuilt - &h).norm() / h.norm() <= 1e-10);

            let draw = ChannelDraw::from_matrix(h.clone(), Vec2::ZERO, vec![1.0; r.min(c)]).unwrap();
            let sum_sq: f64 = draw.singular_values.iter().map(|b| b * b).sum();
            assert!((sum_sq - h.norm_squared()).abs() < 1e-9);
            assert!(draw.singular_values.windows(2).all(|w| w[0] >= w[1]));
            assert_eq!(draw.rank, r.min(c));
        }
    }

    #[test]
    fn permutation_invariance() {
        let h = random_matrix(5, 4, 7);
        let mut p = h.clone();
        p.swap_rows(0, 3);
        p.swap_columns(1, 2);
        let a = ChannelDraw::from_matrix(h, Vec2::ZERO, vec![1.0; 4]).unwrap();
        let b = ChannelDraw::from_matrix(p, Vec2::ZERO, vec![1.0; 4]).unwrap();
        for (x, y) in a.singular_values.iter().zip(&b.singular_values) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn duplicated_column_reduces_rank() {
        let mut h = random_matrix(4, 4, 11);
        let col = h.column(0).clone_owned();
        h.set_column(2, &col);
        let d = ChannelDraw::from_matrix(h, Vec2::ZERO, vec![1.0; 4]).unwrap();
        assert_eq!(d.rank, 3);
        assert_eq!(d.active().len(), 3);
    }

    #[test]
    fn scalar_channel() {
        let h = DMatrix::from_element(1, 1, Complex64::new(0.03, -0.04));
        let d = ChannelDraw::from_matrix(h, Vec2::ZERO, vec![1.0]).unwrap();
        assert!((d.singular_values[0] - 0.05).abs() < 1e-15);
    }

    #[test]
    fn large_singular_values_are_clamped() {
        let h = DMatrix::from_element(1, 1, Complex64::new(3.0, 0.0));
        let d = ChannelDraw::from_matrix(h, Vec2::ZERO, vec![1.0]).unwrap();
        assert_eq!(d.singular_values[0], 1.0);
        assert!(d.beta_clamped);
    }

    #[test]
    fn bad_turbulence_is_rejected() {
        let h = random_matrix(2, 2, 5);
        assert!(ChannelDraw::from_matrix(h.clone(), Vec2::ZERO, vec![1.0]).is_err());
        assert!(ChannelDraw::from_matrix(h, Vec2::ZERO, vec![1.0, -0.5]).is_err());
    }

    #[test]
    fn field_and_table_sources_agree() {
        let geom = BeamGeometry::new(1550e-9, 0.035, 1000.0, 4).unwrap();
        let layout = ApertureLayout::concentric(4, 4, 0.035, 0.2);
        let grid = GridSpec::covering(&layout, 0.003, 2048).unwrap();
        let field = propagate_field(&geom, &grid).unwrap();
        let table = OverlapTable::build(&field, 0.2, grid.r_max - 0.2, 2048).unwrap();
        let off = Vec2::new(0.001, 0.002);
        let a = build_channel(&field, &layout, off, vec![1.0; 4]).unwrap();
        let b = build_channel(&table, &layout, off, vec![1.0; 4]).unwrap();
        for (x, y) in a.singular_values.iter().zip(&b.singular_values) {
            assert!((x - y).abs() <= 1e-5 * x.max(1e-6));
        }
        assert!(a.singular_values[0] <= 1.0);
    }
}

//! Pilot transmission model: random analog combiners, noisy compressive
//! measurement, and noise pre-whitening.
//!
//! Noise enters at the antennas and is then combined, so the stacked noise
//! covariance is `sigma^2 blkdiag(A_p A_p^H)` rather than white. The
//! whitener is the block-wise Cholesky factor `D` of that block-diagonal
//! matrix; all applications of `D^{-1}` go through triangular solves.

use nalgebra::{Cholesky, DMatrix, Dyn};
use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::rng::sample_cn01;

/// Per-slot analog combiners with `+-1/sqrt(N)` entries and their row-stack.
#[derive(Debug, Clone)]
pub struct Combiner {
    slots: Vec<DMatrix<Complex64>>,
    stacked: DMatrix<Complex64>,
}

impl Combiner {
    pub fn pilot_len(&self) -> usize {
        self.slots.len()
    }

    pub fn num_rf(&self) -> usize {
        self.slots[0].nrows()
    }

    pub fn num_antennas(&self) -> usize {
        self.stacked.ncols()
    }

    /// Per-slot combiner `A_p` (`N_RF x N`).
    pub fn slot(&self, p: usize) -> &DMatrix<Complex64> {
        &self.slots[p]
    }

    /// The stacked `(P N_RF) x N` observation matrix `A`.
    pub fn stacked(&self) -> &DMatrix<Complex64> {
        &self.stacked
    }
}

/// Draw a combiner with i.i.d. equiprobable `+-1/sqrt(N)` entries.
pub fn generate_combiner<R: Rng>(
    rng: &mut R,
    pilot_len: usize,
    num_rf: usize,
    num_antennas: usize,
) -> Combiner {
    assert!(pilot_len >= 1 && num_rf >= 1 && num_antennas >= 1);
    let scale = 1.0 / (num_antennas as f64).sqrt();
    let slots: Vec<_> = (0..pilot_len)
        .map(|_| {
            DMatrix::from_fn(num_rf, num_antennas, |_, _| {
                let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
                Complex64::new(sign * scale, 0.0)
            })
        })
        .collect();
    let mut stacked = DMatrix::zeros(pilot_len * num_rf, num_antennas);
    for (p, slot) in slots.iter().enumerate() {
        stacked.rows_mut(p * num_rf, num_rf).copy_from(slot);
    }
    Combiner { slots, stacked }
}

/// Raw (unwhitened) pilot observation `Y = A H + stacked A_p n_p`.
#[derive(Debug, Clone)]
pub struct PilotObservation {
    pub combiner: Combiner,
    /// Received pilots, `(P N_RF) x M`.
    pub y: DMatrix<Complex64>,
    /// Per-antenna noise power `sigma^2`.
    pub noise_power: f64,
}

/// Observe a channel through the combiner with per-antenna noise
/// `n_{m,p} ~ CN(0, sigma^2 I_N)` applied before combining.
pub fn observe<R: Rng>(
    channel: &DMatrix<Complex64>,
    combiner: &Combiner,
    noise_power: f64,
    rng: &mut R,
) -> Result<PilotObservation> {
    if channel.nrows() != combiner.num_antennas() {
        return Err(Error::InvalidArgument(format!(
            "channel has {} antennas, combiner expects {}",
            channel.nrows(),
            combiner.num_antennas()
        )));
    }
    if !(noise_power >= 0.0) {
        return Err(Error::InvalidArgument("noise power must be >= 0".into()));
    }
    let mut y = combiner.stacked() * channel;
    if noise_power > 0.0 {
        let sigma = noise_power.sqrt();
        let n = combiner.num_antennas();
        let num_rf = combiner.num_rf();
        let mut antenna_noise = DMatrix::<Complex64>::zeros(n, 1);
        for m in 0..channel.ncols() {
            for p in 0..combiner.pilot_len() {
                for i in 0..n {
                    antenna_noise[(i, 0)] = sample_cn01(rng) * sigma;
                }
                let combined = combiner.slot(p) * &antenna_noise;
                for i in 0..num_rf {
                    y[(p * num_rf + i, m)] += combined[(i, 0)];
                }
            }
        }
    }
    Ok(PilotObservation {
        combiner: combiner.clone(),
        y,
        noise_power,
    })
}

/// Block-diagonal lower-triangular Cholesky factor `D` of
/// `blkdiag(A_p A_p^H)`, applied through per-block triangular solves.
#[derive(Debug, Clone)]
pub struct Whitener {
    blocks: Vec<Cholesky<Complex64, Dyn>>,
    block_size: usize,
}

/// Factor the noise covariance block by block. A numerically singular block
/// is regularized with `1e-10` on the diagonal and a warning instead of
/// aborting.
pub fn build_whitener(combiner: &Combiner) -> Whitener {
    let num_rf = combiner.num_rf();
    let blocks = (0..combiner.pilot_len())
        .map(|p| {
            let slot = combiner.slot(p);
            let cov = slot * slot.adjoint();
            Cholesky::new(cov.clone()).unwrap_or_else(|| {
                eprintln!("warning: singular noise-covariance block {p}, regularizing");
                let mut reg = cov;
                for i in 0..num_rf {
                    reg[(i, i)] += Complex64::new(1e-10, 0.0);
                }
                Cholesky::new(reg).expect("regularized block must factor")
            })
        })
        .collect();
    Whitener {
        blocks,
        block_size: num_rf,
    }
}

impl Whitener {
    pub fn num_rows(&self) -> usize {
        self.blocks.len() * self.block_size
    }

    /// Apply `D^{-1}` to a `(P N_RF) x K` matrix via forward substitution,
    /// block row by block row.
    pub fn solve(&self, rhs: &DMatrix<Complex64>) -> DMatrix<Complex64> {
        assert_eq!(rhs.nrows(), self.num_rows(), "row count mismatch");
        let mut out = rhs.clone();
        for (p, chol) in self.blocks.iter().enumerate() {
            let block = out.rows(p * self.block_size, self.block_size).into_owned();
            let solved = chol
                .l()
                .solve_lower_triangular(&block)
                .expect("Cholesky factor has positive diagonal");
            out.rows_mut(p * self.block_size, self.block_size)
                .copy_from(&solved);
        }
        out
    }

    /// The full block-diagonal lower-triangular `D`.
    pub fn d_matrix(&self) -> DMatrix<Complex64> {
        let n = self.num_rows();
        let mut d = DMatrix::zeros(n, n);
        for (p, chol) in self.blocks.iter().enumerate() {
            d.view_mut(
                (p * self.block_size, p * self.block_size),
                (self.block_size, self.block_size),
            )
            .copy_from(&chol.l());
        }
        d
    }
}

/// Whitened measurement: `y_bar = D^{-1} Y` and `psi_bar = D^{-1} A W` for
/// a given dictionary matrix `W`.
#[derive(Debug, Clone)]
pub struct WhitenedObservation {
    pub y_bar: DMatrix<Complex64>,
    pub psi_bar: DMatrix<Complex64>,
}

pub fn whiten(
    obs: &PilotObservation,
    whitener: &Whitener,
    dictionary: &DMatrix<Complex64>,
) -> WhitenedObservation {
    WhitenedObservation {
        y_bar: whitener.solve(&obs.y),
        psi_bar: whitener.solve(&(obs.combiner.stacked() * dictionary)),
    }
}

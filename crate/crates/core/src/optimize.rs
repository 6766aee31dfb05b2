//! Blahut–Arimoto on the probability simplex.
//!
//! The closed-form bound of [`crate::entropy`] maximizes over a set that is
//! larger than the simplex. Running the classical algorithm on the same
//! `2ⁿ × 2ⁿ` matrix gives the true `n`-letter value and, through its
//! upper/lower bracket, a numerical certificate that it does not exceed
//! `C↑_n`.
//!
//! Everything here treats one block of `n` uses as a single letter of a
//! memoryless channel; the coupling between consecutive blocks through the
//! state is ignored.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Float, Zero};
use serde::Serialize;

use crate::channel::{ChannelMatrix, State};
use crate::dyadic::Dyadic;
use crate::entropy::closed_form;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Floats usable by the optimizer.
pub trait Real: Float + Scalar + Serialize {}

impl<T: Float + Scalar + Serialize> Real for T {}

/// `(1/n) Σ_ij p_i P_ij log₂(P_ij / q_j)` with `q = Pᵀp` and `0 log 0 = 0`.
pub fn mutual_information<T: Real>(p: &ChannelMatrix<T>, dist: &[T]) -> Result<T> {
    let block = block_information(p, dist)?;
    Ok(block / T::from(p.n().max(1)).unwrap())
}

fn block_information<T: Real>(p: &ChannelMatrix<T>, dist: &[T]) -> Result<T> {
    if dist.len() != p.dim() {
        return Err(Error::LengthMismatch {
            expected: p.dim(),
            actual: dist.len(),
        });
    }
    let q = p.matrix().transpose_mul_vec(dist);
    let mut total = T::zero();
    for (row, &pi) in p.matrix().rows().zip(dist) {
        if pi <= T::zero() {
            continue;
        }
        for (&w, &qj) in row.iter().zip(&q) {
            if w > T::zero() {
                total = total + pi * w * (w / qj).log2();
            }
        }
    }
    Ok(total)
}

/// The same quantity in exact arithmetic, per letter. Returns `None` unless
/// every ratio `P_ij / q_j` on the support is a power of two, which is the
/// only case where the logarithms are rational.
pub fn mutual_information_exact(
    p: &ChannelMatrix<Dyadic>,
    dist: &[Dyadic],
) -> Result<Option<BigRational>> {
    if dist.len() != p.dim() {
        return Err(Error::LengthMismatch {
            expected: p.dim(),
            actual: dist.len(),
        });
    }
    let q = p.matrix().transpose_mul_vec(dist);
    let mut total = Dyadic::zero();
    for (row, pi) in p.matrix().rows().zip(dist) {
        if !pi.is_positive() {
            continue;
        }
        for (w, qj) in row.iter().zip(&q) {
            if !w.is_positive() {
                continue;
            }
            let ratio = w.to_rational() / qj.to_rational();
            let Some(log) = Dyadic::from_rational(&ratio).and_then(|r| r.log2_exact()) else {
                return Ok(None);
            };
            total += (pi * w).scale_int(log);
        }
    }
    let n = BigInt::from(p.n().max(1));
    Ok(Some(total.to_rational() / BigRational::from_integer(n)))
}

/// Capacity bracket of one iterate, in bits per block.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Bracket<T> {
    /// `I(p)` at the current iterate.
    pub lower: T,
    /// `max_i D(P_i ‖ q)`; no distribution does better.
    pub upper: T,
}

impl<T: Real> Bracket<T> {
    pub fn width(&self) -> T {
        self.upper - self.lower
    }
}

/// Iterator-style Blahut–Arimoto state.
pub struct BlahutArimoto<'a, T> {
    channel: &'a ChannelMatrix<T>,
    support: Vec<Vec<(usize, T)>>,
    dist: Vec<T>,
    divergences: Vec<T>,
    bracket: Bracket<T>,
    iterations: usize,
}

impl<'a, T: Real> BlahutArimoto<'a, T> {
    /// Starts from the uniform distribution.
    pub fn new(channel: &'a ChannelMatrix<T>) -> Self {
        let dim = channel.dim();
        let uniform = vec![T::one() / T::from(dim).unwrap(); dim];
        Self::with_initial(channel, uniform).expect("uniform start is valid")
    }

    /// Starts from `initial`, which must be a distribution of the right
    /// length.
    pub fn with_initial(channel: &'a ChannelMatrix<T>, initial: Vec<T>) -> Result<Self> {
        if initial.len() != channel.dim() {
            return Err(Error::LengthMismatch {
                expected: channel.dim(),
                actual: initial.len(),
            });
        }
        let total = initial.iter().fold(T::zero(), |a, &b| a + b);
        if initial.iter().any(|&x| x < T::zero() || !x.is_finite()) || total <= T::zero() {
            return Err(Error::InvalidParameter(
                "initial distribution must be non-negative with positive mass".into(),
            ));
        }
        let support = channel
            .matrix()
            .rows()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .filter(|(_, w)| **w > T::zero())
                    .map(|(j, &w)| (j, w))
                    .collect()
            })
            .collect();
        let mut ba = BlahutArimoto {
            channel,
            support,
            dist: initial.into_iter().map(|x| x / total).collect(),
            divergences: Vec::new(),
            bracket: Bracket {
                lower: T::zero(),
                upper: T::infinity(),
            },
            iterations: 0,
        };
        ba.evaluate();
        Ok(ba)
    }

    fn evaluate(&mut self) {
        let mut q = vec![T::zero(); self.channel.dim()];
        for (row, &pi) in self.support.iter().zip(&self.dist) {
            if pi > T::zero() {
                for &(j, w) in row {
                    q[j] = q[j] + pi * w;
                }
            }
        }
        self.divergences = self
            .support
            .iter()
            .map(|row| {
                row.iter()
                    .fold(T::zero(), |acc, &(j, w)| acc + w * (w / q[j]).log2())
            })
            .collect();
        let lower = self
            .dist
            .iter()
            .zip(&self.divergences)
            .fold(T::zero(), |acc, (&p, &d)| acc + p * d);
        let upper = self
            .divergences
            .iter()
            .fold(T::neg_infinity(), |acc, &d| acc.max(d));
        self.bracket = Bracket { lower, upper };
    }

    /// One multiplicative update `p_i ← p_i 2^{D_i} / Σ`.
    pub fn step(&mut self) -> Bracket<T> {
        let shift = self.bracket.upper;
        let weights: Vec<T> = self
            .dist
            .iter()
            .zip(&self.divergences)
            .map(|(&p, &d)| p * (d - shift).exp2())
            .collect();
        let total = weights.iter().fold(T::zero(), |a, &b| a + b);
        self.dist = weights.into_iter().map(|w| w / total).collect();
        self.iterations += 1;
        self.evaluate();
        self.bracket
    }

    pub fn bracket(&self) -> Bracket<T> {
        self.bracket
    }

    pub fn distribution(&self) -> &[T] {
        &self.dist
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    fn report(&self) -> OptimizationReport<T> {
        let n = T::from(self.channel.n().max(1)).unwrap();
        OptimizationReport {
            n: self.channel.n(),
            state: self.channel.initial_state(),
            capacity_per_letter: self.bracket.lower / n,
            iterations: self.iterations,
            final_gap: self.bracket.width() / n,
            distribution: self.dist.clone(),
        }
    }
}

/// Result of a converged run. `final_gap` is the bracket width per letter.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OptimizationReport<T> {
    pub n: usize,
    #[serde(rename = "s0")]
    pub state: State,
    pub capacity_per_letter: T,
    pub iterations: usize,
    pub final_gap: T,
    pub distribution: Vec<T>,
}

/// Runs until the block-level bracket is at most `tol`.
pub fn blahut_arimoto<T: Real>(
    p: &ChannelMatrix<T>,
    tol: T,
    max_iter: usize,
) -> Result<OptimizationReport<T>> {
    run(BlahutArimoto::new(p), tol, max_iter)
}

/// As [`blahut_arimoto`] from a caller-supplied starting point.
pub fn blahut_arimoto_from<T: Real>(
    p: &ChannelMatrix<T>,
    initial: Vec<T>,
    tol: T,
    max_iter: usize,
) -> Result<OptimizationReport<T>> {
    run(BlahutArimoto::with_initial(p, initial)?, tol, max_iter)
}

fn run<T: Real>(
    mut ba: BlahutArimoto<'_, T>,
    tol: T,
    max_iter: usize,
) -> Result<OptimizationReport<T>> {
    if !(tol > T::zero()) {
        return Err(Error::InvalidParameter("tolerance must be positive".into()));
    }
    while ba.bracket().width() > tol {
        if ba.iterations() >= max_iter {
            return Err(Error::NotConverged {
                iterations: ba.iterations(),
                gap: ba.bracket().width().to_f64().unwrap_or(f64::NAN),
            });
        }
        ba.step();
    }
    Ok(ba.report())
}

/// Blahut–Arimoto against the closed-form bound for one `(n, s0)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundCheck {
    pub holds: bool,
    pub c_upper: f64,
    /// `C↑_n` minus the simplex optimum, per letter.
    pub gap: f64,
    pub report: OptimizationReport<f64>,
}

/// True iff the simplex optimum does not exceed `C↑_n + tol`.
pub fn verify_bound(n: usize, state: State, tol: f64) -> Result<BoundCheck> {
    let p = ChannelMatrix::<f64>::build(n, state)?;
    let report = blahut_arimoto(&p, tol, DEFAULT_MAX_ITER)?;
    let c_upper = closed_form(n)?;
    Ok(BoundCheck {
        holds: report.capacity_per_letter <= c_upper + tol,
        c_upper,
        gap: c_upper - report.capacity_per_letter,
        report,
    })
}

pub const DEFAULT_MAX_ITER: usize = 100_000;

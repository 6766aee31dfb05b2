//! Conditional entropy vectors, their weighted counterparts, and the
//! closed-form capacity upper bound they produce.
//!
//! For a square non-singular channel `P`, the maximum of `(1/n) I(Xⁿ;Yⁿ)`
//! over "distributions" that sum to one and give non-negative output masses
//! (but may have negative entries) is
//!
//! ```text
//! C↑_n = (1/n) log₂ Σ_j 2^{ω_j},   ω = -P⁻¹ h,   h_i = H(Yⁿ | Xⁿ = x_i)
//! ```
//!
//! attained at `p_i = 2^{-n C↑_n} d_i` with `d = (P⁻¹)ᵀ 2^{ω}`.
//!
//! For the trapdoor channel every `h_i` is dyadic and every `ω_j` is an even
//! non-positive integer, so `S = Σ 2^{ω_j}` and `d` are computed exactly and
//! floats only appear in the final `log₂`.
//!
//! Recursions (initial state 0; state 1 is the reversal of each vector):
//!
//! * `h_{n+1} = [h_n ; ½h_n + ½Ĩh_n + 1]`
//! * `h_{n+2} = [h_n ; ½h_n + ½Ĩh_n + 1 ; ¾h_n + ¼Ĩh_n + 3/2 ; ¼h_n + ¾Ĩh_n + 3/2]`
//!   for even `n` (the last block's constant is 3/2; a derivation that
//!   ends in `+1` there disagrees with the definition already at `n = 2`).
//! * `ω_{2m} = [ω ; ω-2 ; ω-2 ; ω]` on `ω_{2m-2}`, from `ω_0 = [0]`.
//! * `ω_{2m+1} = [ω ; Ĩω ; ω-2 ; Ĩω-2]` on `ω_{2m-1}`, from `ω_1 = [0, -2]`.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::channel::{
    build_channel_matrix, inverse_transpose_apply, invert_channel_matrix, ChannelMatrix, Limits,
    State,
};
use crate::dyadic::Dyadic;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// `h_{n|s0}`: entry `i` is `H(Yⁿ | Xⁿ = x_i)` in bits.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EntropyVector {
    pub n: usize,
    pub state: State,
    pub entries: Vec<Dyadic>,
}

/// `ω_{n|s0} = -P⁻¹_{n|s0} h_{n|s0}`, stored as integers.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OmegaVector {
    pub n: usize,
    pub state: State,
    pub entries: Vec<i64>,
}

impl EntropyVector {
    /// The same vector for the other initial state (`Ĩ h`).
    pub fn exchanged(&self) -> Self {
        EntropyVector {
            n: self.n,
            state: self.state.flip(),
            entries: self.entries.iter().rev().cloned().collect(),
        }
    }
}

impl OmegaVector {
    pub fn exchanged(&self) -> Self {
        OmegaVector {
            n: self.n,
            state: self.state.flip(),
            entries: self.entries.iter().rev().copied().collect(),
        }
    }

    pub fn is_palindrome(&self) -> bool {
        self.entries.iter().eq(self.entries.iter().rev())
    }

    /// `Σ_j 2^{ω_j}`, exact.
    pub fn sum_exp2(&self) -> Dyadic {
        sum_exp2(&self.entries)
    }

    /// `2^{ω}` entrywise.
    pub fn exp2(&self) -> Vec<Dyadic> {
        self.entries.iter().map(|&w| Dyadic::pow2(w)).collect()
    }
}

/// `Σ 2^{w}` over integer exponents, grouped by exponent so the cost is in
/// the number of distinct values rather than big-number additions.
pub fn sum_exp2(exponents: &[i64]) -> Dyadic {
    let mut counts: BTreeMap<i64, u64> = BTreeMap::new();
    for &w in exponents {
        *counts.entry(w).or_default() += 1;
    }
    counts
        .into_iter()
        .map(|(w, c)| Dyadic::new(BigInt::from(c), 0).mul_pow2(w))
        .sum()
}

/// `-(P ∘ log₂P) 1`, straight from the definition: an entry `2^{-j}`
/// contributes `j·2^{-j}`, zeros contribute nothing.
pub fn entropy_vector_direct(p: &ChannelMatrix<Dyadic>) -> EntropyVector {
    let entries = p
        .matrix()
        .rows()
        .map(|row| {
            row.iter()
                .filter(|x| !x.is_zero())
                .map(|x| {
                    let log = x
                        .log2_exact()
                        .expect("trapdoor channel entries are powers of two");
                    x.scale_int(-log)
                })
                .sum()
        })
        .collect();
    EntropyVector {
        n: p.n(),
        state: p.initial_state(),
        entries,
    }
}

fn check_bound_cap(n: usize, limits: &Limits, what: &'static str) -> Result<()> {
    if n > limits.bound {
        return Err(Error::TooLarge {
            what,
            n,
            cap: limits.bound,
        });
    }
    Ok(())
}

/// `h_{n|0}` for even `n` via the two-step (four-block) recursion.
pub fn entropy_vector_recursive_even(n: usize) -> Result<EntropyVector> {
    if n % 2 == 1 {
        return Err(Error::OddLength(n));
    }
    check_bound_cap(n, &Limits::default(), "entropy recursion")?;
    let three_halves = Dyadic::new(3, 1);
    let mut h = vec![Dyadic::zero()];
    for _ in 0..n / 2 {
        let rev: Vec<Dyadic> = h.iter().rev().cloned().collect();
        let mix = |a: i64, b: i64, c: &Dyadic| -> Vec<Dyadic> {
            // (a/4) h + (b/4) Ĩh + c
            h.iter()
                .zip(&rev)
                .map(|(x, y)| (x.scale_int(a) + y.scale_int(b)).mul_pow2(-2) + c)
                .collect()
        };
        let b2 = mix(2, 2, &Dyadic::one());
        let b3 = mix(3, 1, &three_halves);
        let b4 = mix(1, 3, &three_halves);
        h.extend(b2);
        h.extend(b3);
        h.extend(b4);
    }
    Ok(EntropyVector {
        n,
        state: State::Zero,
        entries: h,
    })
}

/// `h_{n|0}` for any `n` via the one-step recursion.
pub fn entropy_vector_recursive_step(n: usize) -> Result<EntropyVector> {
    check_bound_cap(n, &Limits::default(), "entropy recursion")?;
    let mut h = vec![Dyadic::zero()];
    for _ in 0..n {
        let second: Vec<Dyadic> = h
            .iter()
            .zip(h.iter().rev())
            .map(|(x, y)| (x + y).mul_pow2(-1) + Dyadic::one())
            .collect();
        h.extend(second);
    }
    Ok(EntropyVector {
        n,
        state: State::Zero,
        entries: h,
    })
}

/// `-P⁻¹ h` with the exact inverse. Fails if the result is not a vector of
/// even non-positive integers, which would mean an arithmetic bug.
pub fn omega_direct(p: &ChannelMatrix<Dyadic>, h: &EntropyVector) -> Result<OmegaVector> {
    if h.n != p.n() || h.state != p.initial_state() {
        return Err(Error::InvalidParameter(format!(
            "entropy vector (n={}, s0={}) does not belong to P_{{{}|{}}}",
            h.n,
            h.state,
            p.n(),
            p.initial_state()
        )));
    }
    let q = invert_channel_matrix(p);
    let entries = q
        .mul_vec(&h.entries)
        .into_iter()
        .enumerate()
        .map(|(i, v)| {
            let w = -v;
            let as_int = w.to_integer().and_then(|z| i64::try_from(z.clone()).ok());
            match as_int {
                Some(k) if k <= 0 && k % 2 == 0 => Ok(k),
                _ => Err(Error::Invariant(format!(
                    "omega entry {i} is {w}, expected an even non-positive integer"
                ))),
            }
        })
        .collect::<Result<Vec<i64>>>()?;
    Ok(OmegaVector {
        n: p.n(),
        state: p.initial_state(),
        entries,
    })
}

/// `ω_{n|0}` by the parity-specific four-block recursion.
pub fn omega_recursive(n: usize) -> Result<OmegaVector> {
    omega_recursive_with_limits(n, &Limits::default())
}

pub fn omega_recursive_with_limits(n: usize, limits: &Limits) -> Result<OmegaVector> {
    check_bound_cap(n, limits, "omega recursion")?;
    let mut w: Vec<i64> = if n.is_multiple_of(2) { vec![0] } else { vec![0, -2] };
    let steps = n / 2;
    for _ in 0..steps {
        let minus2: Vec<i64> = w.iter().map(|x| x - 2).collect();
        let next: Vec<i64> = if n.is_multiple_of(2) {
            w.iter()
                .chain(&minus2)
                .chain(&minus2)
                .chain(&w)
                .copied()
                .collect()
        } else {
            let rev: Vec<i64> = w.iter().rev().copied().collect();
            let rev_minus2: Vec<i64> = rev.iter().map(|x| x - 2).collect();
            w.iter()
                .chain(&rev)
                .chain(&minus2)
                .chain(&rev_minus2)
                .copied()
                .collect()
        };
        w = next;
    }
    Ok(OmegaVector {
        n,
        state: State::Zero,
        entries: w,
    })
}

/// `ω_{n|1} = Ĩ ω_{n|0}`.
pub fn omega_state1(n: usize) -> Result<OmegaVector> {
    Ok(omega_recursive(n)?.exchanged())
}

/// `ω_{n|s0}` by recursion for either state.
pub fn omega_for_state(n: usize, state: State, limits: &Limits) -> Result<OmegaVector> {
    let w = omega_recursive_with_limits(n, limits)?;
    Ok(match state {
        State::Zero => w,
        State::One => w.exchanged(),
    })
}

/// The exact value of `Σ 2^{ω_{n|0}}` proved by induction:
/// `(5/2)^m` for `n = 2m`, `(5/4)(5/2)^{m-1}` for `n = 2m-1`.
pub fn analytic_sum(n: usize) -> Result<Dyadic> {
    if n == 0 {
        return Err(Error::InvalidParameter(
            "block length must be at least 1".into(),
        ));
    }
    let m = n.div_ceil(2) as u32;
    let five_m = BigInt::from(5).pow(m);
    Ok(if n.is_multiple_of(2) {
        Dyadic::new(five_m, m)
    } else {
        Dyadic::new(five_m, m + 1)
    })
}

/// `C↑_n` in bits per use from the closed forms:
/// `½log₂(5/2)` for even `n`, `(log₂(5/4) + (m-1)log₂(5/2)) / (2m-1)` for
/// odd `n = 2m-1`.
pub fn closed_form(n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidParameter(
            "block length must be at least 1".into(),
        ));
    }
    if n.is_multiple_of(2) {
        return Ok(0.5 * 2.5f64.log2());
    }
    let m = n.div_ceil(2);
    Ok((1.25f64.log2() + (m - 1) as f64 * 2.5f64.log2()) / n as f64)
}

/// Capacity of the trapdoor channel with feedback, `log₂` of the golden
/// ratio, for comparison with the bounds.
pub fn golden_ratio_reference() -> f64 {
    ((1.0 + 5f64.sqrt()) / 2.0).log2()
}

/// Zero-error capacity in bits per use, attained by the disjoint-output
/// input pair `00`, `11`.
pub const ZERO_ERROR_RATE: f64 = 0.5;

/// How `S` was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SumMethod {
    /// Expanded `ω` by recursion and summed `2^{ω}` exactly.
    Recursion,
    /// `n` is past the recursion cap; used the proven closed product.
    Analytic,
}

/// `C↑_n` with its exact ingredients.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundResult {
    pub n: usize,
    pub state: State,
    /// `S = 1ᵀ 2^{ω_{n|s0}}`.
    pub sum: Dyadic,
    /// `(1/n) log₂ S`.
    pub c_upper: f64,
    /// `d = (P⁻¹)ᵀ 2^{ω}`; the relaxed optimum is `d / S`. Absent when `n`
    /// exceeds the matrix cap or `S` came from the analytic product.
    pub d: Option<Vec<Dyadic>>,
    pub method: SumMethod,
}

impl BoundResult {
    /// 0-based indices with `d_i < 0`.
    pub fn negative_indices(&self) -> Option<Vec<usize>> {
        self.d.as_ref().map(|d| {
            d.iter()
                .enumerate()
                .filter(|(_, x)| x.is_negative())
                .map(|(i, _)| i)
                .collect()
        })
    }

    pub fn has_negative_d(&self) -> Option<bool> {
        self.d.as_ref().map(|d| d.iter().any(Dyadic::is_negative))
    }

    /// `p = d / S` as exact rationals.
    pub fn relaxed_distribution(&self) -> Option<Vec<num_rational::BigRational>> {
        let s = self.sum.to_rational();
        self.d
            .as_ref()
            .map(|d| d.iter().map(|x| x.to_rational() / &s).collect())
    }
}

/// `C↑_n` for initial state `s0` under the default caps.
pub fn upper_bound(n: usize, state: State) -> Result<BoundResult> {
    upper_bound_with_limits(n, state, &Limits::default())
}

pub fn upper_bound_with_limits(n: usize, state: State, limits: &Limits) -> Result<BoundResult> {
    bound(n, state, limits, true)
}

/// `S` and `C↑_n` only; skips the `O(3ⁿ)` Lagrange weights.
pub fn upper_bound_value(n: usize, state: State) -> Result<BoundResult> {
    bound(n, state, &Limits::default(), false)
}

fn bound(n: usize, state: State, limits: &Limits, with_d: bool) -> Result<BoundResult> {
    if n == 0 {
        return Err(Error::InvalidParameter(
            "block length must be at least 1".into(),
        ));
    }
    if n > limits.bound {
        let sum = analytic_sum(n)?;
        return Ok(BoundResult {
            n,
            state,
            c_upper: sum.log2() / n as f64,
            sum,
            d: None,
            method: SumMethod::Analytic,
        });
    }
    let omega = omega_for_state(n, state, limits)?;
    let sum = omega.sum_exp2();
    let d = if with_d && n <= limits.matrix {
        Some(inverse_transpose_apply(state, &omega.exp2()))
    } else {
        None
    };
    Ok(BoundResult {
        n,
        state,
        c_upper: sum.log2() / n as f64,
        sum,
        d,
        method: SumMethod::Recursion,
    })
}

/// `d_{n|s0} = (P⁻¹)ᵀ 2^{ω}` exactly.
pub fn d_vector(n: usize, state: State) -> Result<Vec<Dyadic>> {
    let limits = Limits::default();
    limits.check_matrix(n)?;
    let omega = omega_for_state(n, state, &limits)?;
    Ok(inverse_transpose_apply(state, &omega.exp2()))
}

/// The same vector through the dense inverse and the direct `ω`.
pub fn d_vector_dense(p: &ChannelMatrix<Dyadic>) -> Result<Vec<Dyadic>> {
    let h = entropy_vector_direct(p);
    let omega = omega_direct(p, &h)?;
    let q = invert_channel_matrix(p);
    Ok(q.transpose_mul_vec(&omega.exp2()))
}

/// Closed form of the second-to-last Lagrange weight `d_{2ⁿ-1}` (1-based)
/// for `n ≥ 2`, state 0.
///
/// Only the last column pair of `P⁻¹` touches it:
/// `d_{2ⁿ-1} = 2^{n-1} (2^{ω_{2ⁿ-1}} - 2^{ω_{2ⁿ}})`. The tail of `ω` is
/// `[-2, 0]` for even `n` and `[-4, -2]` for odd `n`, giving
/// `-3·2^{n-3}` and `-3·2^{n-5}` respectively. Negative in both cases, so
/// the relaxed optimum always leaves the simplex.
pub fn second_to_last_d(n: usize) -> Option<Dyadic> {
    if n < 2 {
        return None;
    }
    let shift = if n.is_multiple_of(2) {
        n as i64 - 3
    } else {
        n as i64 - 5
    };
    Some(Dyadic::from_integer(-3).mul_pow2(shift))
}

/// True iff `Pᵀ p ≥ 0` entrywise, i.e. `p` gives non-negative output
/// masses. `p` need not be normalized.
pub fn constraint_check<T: Scalar + PartialOrd>(
    p: &ChannelMatrix<T>,
    weights: &[T],
) -> Result<bool> {
    if weights.len() != p.dim() {
        return Err(Error::LengthMismatch {
            expected: p.dim(),
            actual: weights.len(),
        });
    }
    Ok(p.matrix()
        .transpose_mul_vec(weights)
        .iter()
        .all(|x| *x >= T::zero()))
}

/// Convenience: the whole chain `P → h → ω` for state `s0` via definitions.
pub fn direct_chain(
    n: usize,
    state: State,
) -> Result<(ChannelMatrix<Dyadic>, EntropyVector, OmegaVector)> {
    let p = build_channel_matrix(n, state)?;
    let h = entropy_vector_direct(&p);
    let w = omega_direct(&p, &h)?;
    Ok((p, h, w))
}

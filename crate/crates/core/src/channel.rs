//! Block-length-`n` trapdoor channel matrices `P_{n|s0}` and their inverses.
//!
//! Row `i` (0-based) is the input sequence whose binary expansion is `i`,
//! most significant bit first (time 1); column `j` is the output sequence
//! encoded the same way. The matrices follow the block recursions
//!
//! ```text
//! P_{n+1|0} = [ P_{n|0}      0        ]    P_{n+1|1} = [ ½P_{n|1}  ½P_{n|0} ]
//!             [ ½P_{n|1}  ½P_{n|0}    ]                [ 0         P_{n|1}  ]
//! ```
//!
//! starting from `P_{0|0} = P_{0|1} = [1]`.

use std::env;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dyadic::Dyadic;
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scalar::Scalar;

/// The ball initially in the box.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "u8", try_from = "u8")]
pub enum State {
    Zero,
    One,
}

impl State {
    pub fn bit(self) -> u8 {
        match self {
            State::Zero => 0,
            State::One => 1,
        }
    }

    pub fn from_bit(bit: u8) -> Result<Self> {
        match bit {
            0 => Ok(State::Zero),
            1 => Ok(State::One),
            other => Err(Error::InvalidState(other.to_string())),
        }
    }

    pub fn flip(self) -> Self {
        match self {
            State::Zero => State::One,
            State::One => State::Zero,
        }
    }

    pub const BOTH: [State; 2] = [State::Zero, State::One];
}

impl From<State> for u8 {
    fn from(s: State) -> u8 {
        s.bit()
    }
}

impl TryFrom<u8> for State {
    type Error = Error;

    fn try_from(bit: u8) -> Result<Self> {
        State::from_bit(bit)
    }
}

impl FromStr for State {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "0" => Ok(State::Zero),
            "1" => Ok(State::One),
            other => Err(Error::InvalidState(other.to_string())),
        }
    }
}

impl fmt::Display for State {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.bit())
    }
}

/// Resource guards on block length.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Limits {
    /// Largest `n` for which a dense `2^n × 2^n` matrix is built.
    pub matrix: usize,
    /// Longest input accepted by output enumeration.
    pub enumeration: usize,
    /// Largest `n` for which ω is expanded by recursion (vector of `2^n`).
    pub bound: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            matrix: 14,
            enumeration: 24,
            bound: 20,
        }
    }
}

impl Limits {
    pub const MATRIX_ENV: &'static str = "TRAPDOOR_MATRIX_CAP";
    pub const ENUMERATION_ENV: &'static str = "TRAPDOOR_ENUM_CAP";
    pub const BOUND_ENV: &'static str = "TRAPDOOR_BOUND_CAP";

    /// Defaults, overridden by `TRAPDOOR_MATRIX_CAP`, `TRAPDOOR_ENUM_CAP`
    /// and `TRAPDOOR_BOUND_CAP` when set to an integer.
    pub fn from_env() -> Self {
        let read = |key: &str, fallback: usize| {
            env::var(key)
                .ok()
                .and_then(|v| v.trim().parse().ok())
                .unwrap_or(fallback)
        };
        let d = Limits::default();
        Limits {
            matrix: read(Self::MATRIX_ENV, d.matrix),
            enumeration: read(Self::ENUMERATION_ENV, d.enumeration),
            bound: read(Self::BOUND_ENV, d.bound),
        }
    }

    pub fn check_matrix(&self, n: usize) -> Result<()> {
        if n > self.matrix {
            return Err(Error::TooLarge {
                what: "channel matrix",
                n,
                cap: self.matrix,
            });
        }
        Ok(())
    }
}

/// `P_{n|s0}` together with its block length and initial state.
#[derive(Clone, Debug, PartialEq)]
pub struct ChannelMatrix<T = Dyadic> {
    n: usize,
    state: State,
    matrix: Matrix<T>,
}

impl<T> ChannelMatrix<T> {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn initial_state(&self) -> State {
        self.state
    }

    pub fn matrix(&self) -> &Matrix<T> {
        &self.matrix
    }

    pub fn into_matrix(self) -> Matrix<T> {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn get(&self, row: usize, col: usize) -> &T {
        self.matrix.get(row, col)
    }

    pub fn row(&self, row: usize) -> &[T] {
        self.matrix.row(row)
    }

    /// Converts the entries, e.g. to floats for numerical optimization.
    pub fn map<U, F: FnMut(&T) -> U>(&self, f: F) -> ChannelMatrix<U> {
        ChannelMatrix {
            n: self.n,
            state: self.state,
            matrix: self.matrix.map(f),
        }
    }
}

impl<T: Scalar> ChannelMatrix<T> {
    /// Builds `P_{n|s0}` under the default [`Limits`].
    pub fn build(n: usize, state: State) -> Result<Self> {
        Self::build_with_limits(n, state, &Limits::default())
    }

    pub fn build_with_limits(n: usize, state: State, limits: &Limits) -> Result<Self> {
        let (zero, one) = Self::pair(n, limits)?;
        Ok(match state {
            State::Zero => zero,
            State::One => one,
        })
    }

    /// Both `P_{n|0}` and `P_{n|1}`; the recursion needs them together.
    pub fn pair(n: usize, limits: &Limits) -> Result<(Self, Self)> {
        limits.check_matrix(n)?;
        let mut p0 = Matrix::<T>::identity(1);
        let mut p1 = Matrix::<T>::identity(1);
        for _ in 0..n {
            let dim = p0.dim();
            let zero = Matrix::zeros(dim);
            let half0 = p0.mul_pow2(-1);
            let half1 = p1.mul_pow2(-1);
            let next0 = Matrix::from_blocks(&p0, &zero, &half1, &half0);
            let next1 = Matrix::from_blocks(&half1, &half0, &zero, &p1);
            p0 = next0;
            p1 = next1;
        }
        Ok((
            ChannelMatrix {
                n,
                state: State::Zero,
                matrix: p0,
            },
            ChannelMatrix {
                n,
                state: State::One,
                matrix: p1,
            },
        ))
    }

    /// Wraps an arbitrary matrix after checking its shape; entries are not
    /// validated. Intended for matrices read back from disk.
    pub fn from_parts(n: usize, state: State, matrix: Matrix<T>) -> Result<Self> {
        if matrix.dim() != 1 << n {
            return Err(Error::LengthMismatch {
                expected: 1 << n,
                actual: matrix.dim(),
            });
        }
        Ok(ChannelMatrix { n, state, matrix })
    }
}

/// Builds the exact `P_{n|s0}` with the default caps.
pub fn build_channel_matrix(n: usize, state: State) -> Result<ChannelMatrix<Dyadic>> {
    ChannelMatrix::build(n, state)
}

/// Exact inverse by the one-step block formula
/// `[[A,0],[C,D]]⁻¹ = [[A⁻¹,0],[-D⁻¹CA⁻¹,D⁻¹]]` (and its upper-triangular
/// twin for `s0 = 1`), recursing on the diagonal block down to `n = 0`.
pub fn invert_channel_matrix<T: Scalar>(p: &ChannelMatrix<T>) -> Matrix<T> {
    invert_block(p.matrix(), p.initial_state())
}

fn invert_block<T: Scalar>(p: &Matrix<T>, state: State) -> Matrix<T> {
    let dim = p.dim();
    if dim == 1 {
        debug_assert!(p.get(0, 0).is_one(), "P_0 must be [1]");
        return Matrix::identity(1);
    }
    let h = dim / 2;
    let zero = Matrix::zeros(h);
    match state {
        State::Zero => {
            // A = P_{n-1|0}, C = ½P_{n-1|1}, D = ½A
            let a_inv = invert_block(&p.block(0, 0, h), State::Zero);
            let c = p.block(h, 0, h);
            let d_inv = a_inv.mul_pow2(1);
            let lower = d_inv.mul(&c).mul(&a_inv).neg();
            Matrix::from_blocks(&a_inv, &zero, &lower, &d_inv)
        }
        State::One => {
            // A = ½P_{n-1|1}, B = ½P_{n-1|0}, D = P_{n-1|1} = 2A
            let d_inv = invert_block(&p.block(h, h, h), State::One);
            let b = p.block(0, h, h);
            let a_inv = d_inv.mul_pow2(1);
            let upper = a_inv.mul(&b).mul(&d_inv).neg();
            Matrix::from_blocks(&a_inv, &upper, &zero, &d_inv)
        }
    }
}

/// `P⁻¹_{n|s0}` for even `n ≥ 2` through the four-block two-step recursion
/// on `P⁻¹_{n-2|·}`, with `M₀ = P⁻¹_{·|0} P_{·|1} P⁻¹_{·|0}` and `M₁` its
/// mirror image.
pub fn invert_two_step<T: Scalar>(n: usize, state: State, limits: &Limits) -> Result<Matrix<T>> {
    if n < 2 || n % 2 == 1 {
        return Err(Error::OddLength(n));
    }
    limits.check_matrix(n)?;
    let mut p0 = Matrix::<T>::identity(1);
    let mut p1 = Matrix::<T>::identity(1);
    let mut q0 = Matrix::<T>::identity(1);
    let mut q1 = Matrix::<T>::identity(1);
    for _ in 0..n / 2 {
        let z = Matrix::zeros(q0.dim());
        let m0 = q0.mul(&p1).mul(&q0);
        let m1 = q1.mul(&p0).mul(&q1);
        let corner0 = m0.mul(&p1).mul(&q0).scale_int(2);
        let corner1 = m1.mul(&p0).mul(&q1).scale_int(2);
        let next_q0 = Matrix::from_block_grid(&[
            vec![&q0, &z, &z, &z],
            vec![&m0.neg(), &q0.scale_int(2), &z, &z],
            vec![&z, &q0.neg(), &q0.scale_int(2), &z],
            vec![
                &corner0,
                &m0.scale_int(-3),
                &m0.scale_int(-2),
                &q0.scale_int(4),
            ],
        ]);
        let next_q1 = Matrix::from_block_grid(&[
            vec![
                &q1.scale_int(4),
                &m1.scale_int(-2),
                &m1.scale_int(-3),
                &corner1,
            ],
            vec![&z, &q1.scale_int(2), &q1.neg(), &z],
            vec![&z, &z, &q1.scale_int(2), &m1.neg()],
            vec![&z, &z, &z, &q1],
        ]);
        let (next_p0, next_p1) = two_step_pair(&p0, &p1);
        p0 = next_p0;
        p1 = next_p1;
        q0 = next_q0;
        q1 = next_q1;
    }
    Ok(match state {
        State::Zero => q0,
        State::One => q1,
    })
}

/// `(P_{n+2|0}, P_{n+2|1})` from `(P_{n|0}, P_{n|1})` in one four-block step.
pub fn two_step_pair<T: Scalar>(p0: &Matrix<T>, p1: &Matrix<T>) -> (Matrix<T>, Matrix<T>) {
    let z = Matrix::zeros(p0.dim());
    let h0 = p0.mul_pow2(-1);
    let h1 = p1.mul_pow2(-1);
    let q0 = p0.mul_pow2(-2);
    let q1 = p1.mul_pow2(-2);
    let next0 = Matrix::from_block_grid(&[
        vec![p0, &z, &z, &z],
        vec![&h1, &h0, &z, &z],
        vec![&q1, &q0, &h0, &z],
        vec![&z, &h1, &q1, &q0],
    ]);
    let next1 = Matrix::from_block_grid(&[
        vec![&q1, &q0, &h0, &z],
        vec![&z, &h1, &q1, &q0],
        vec![&z, &z, &h1, &h0],
        vec![&z, &z, &z, p1],
    ]);
    (next0, next1)
}

/// `P_{n|s0}ᵀ x` computed from the block recursion without forming the
/// matrix; `O(3^n)` operations.
pub fn transpose_apply<T: Scalar>(state: State, x: &[T]) -> Vec<T> {
    let dim = x.len();
    assert!(dim.is_power_of_two(), "length must be a power of two");
    if dim == 1 {
        return x.to_vec();
    }
    let (x1, x2) = x.split_at(dim / 2);
    match state {
        // [P0ᵀ x1 + ½P1ᵀ x2 ; ½P0ᵀ x2]
        State::Zero => {
            let a = transpose_apply(State::Zero, x1);
            let b = transpose_apply(State::One, x2);
            let c = transpose_apply(State::Zero, x2);
            let top = a.into_iter().zip(b).map(|(a, b)| a + b.halve());
            top.chain(c.into_iter().map(|c| c.halve())).collect()
        }
        // [½P1ᵀ x1 ; ½P0ᵀ x1 + P1ᵀ x2]
        State::One => {
            let a = transpose_apply(State::One, x1);
            let b = transpose_apply(State::Zero, x1);
            let c = transpose_apply(State::One, x2);
            let bottom = b.into_iter().zip(c).map(|(b, c)| b.halve() + c);
            a.into_iter().map(|a| a.halve()).chain(bottom).collect()
        }
    }
}

/// `(P_{n|s0}⁻¹)ᵀ x` from the one-step inverse recursion, matrix-free.
pub fn inverse_transpose_apply<T: Scalar>(state: State, x: &[T]) -> Vec<T> {
    let dim = x.len();
    assert!(dim.is_power_of_two(), "length must be a power of two");
    if dim == 1 {
        return x.to_vec();
    }
    let (x1, x2) = x.split_at(dim / 2);
    match state {
        // P⁻¹ = [[Q, 0], [-Q P1 Q, 2Q]] with Q = P⁻¹_{n-1|0}
        State::Zero => {
            let u = inverse_transpose_apply(State::Zero, x2);
            let pu = transpose_apply(State::One, &u);
            let inner: Vec<T> = x1.iter().cloned().zip(pu).map(|(a, b)| a - b).collect();
            let top = inverse_transpose_apply(State::Zero, &inner);
            top.into_iter()
                .chain(u.into_iter().map(|v| v.double()))
                .collect()
        }
        // P⁻¹ = [[2Q, -Q P0 Q], [0, Q]] with Q = P⁻¹_{n-1|1}
        State::One => {
            let u = inverse_transpose_apply(State::One, x1);
            let pu = transpose_apply(State::Zero, &u);
            let inner: Vec<T> = x2.iter().cloned().zip(pu).map(|(a, b)| a - b).collect();
            let bottom = inverse_transpose_apply(State::One, &inner);
            u.iter().map(|v| v.double()).chain(bottom).collect()
        }
    }
}

/// `Ĩ M Ĩ`, the exchange-symmetry conjugation swapping the two states.
pub fn exchange_conjugate<T: Clone>(m: &Matrix<T>) -> Matrix<T> {
    m.exchange_conjugate()
}

/// `Ĩ v`: the vector upside down.
pub fn reverse_vector<T: Clone>(v: &[T]) -> Vec<T> {
    v.iter().rev().cloned().collect()
}

/// True when rows `row_a` and `row_b` (0-based) have disjoint supports, i.e.
/// the two inputs can never produce the same output.
pub fn disjoint_support_check<T: Scalar>(
    p: &ChannelMatrix<T>,
    row_a: usize,
    row_b: usize,
) -> Result<bool> {
    let dim = p.dim();
    for index in [row_a, row_b] {
        if index >= dim {
            return Err(Error::IndexOutOfRange { index, dim });
        }
    }
    Ok(p.row(row_a)
        .iter()
        .zip(p.row(row_b))
        .all(|(a, b)| a.is_zero() || b.is_zero()))
}

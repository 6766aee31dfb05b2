//! Output enumeration for a single input string.
//!
//! The recursion walks the input left to right. When the next input symbol
//! equals the ball in the box the output is forced; otherwise it branches
//! with probability ½ each into "emit the new ball, keep the state" and
//! "emit the old ball, the new one stays".

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::channel::{Limits, State};
use crate::dyadic::Dyadic;
use crate::error::{Error, Result};

/// A binary string, time 1 first.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct BitString(Vec<u8>);

impl BitString {
    pub fn from_bits(bits: Vec<u8>) -> Result<Self> {
        if bits.iter().any(|&b| b > 1) {
            return Err(Error::InvalidBits(format!("{bits:?}")));
        }
        Ok(BitString(bits))
    }

    /// The length-`n` string whose binary value is `index` (MSB = time 1).
    pub fn from_index(index: usize, n: usize) -> Self {
        BitString((0..n).rev().map(|k| ((index >> k) & 1) as u8).collect())
    }

    /// Row/column position of this string in `P_{n|s0}`.
    pub fn to_index(&self) -> usize {
        self.0.iter().fold(0, |acc, &b| (acc << 1) | b as usize)
    }

    pub fn bits(&self) -> &[u8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl FromStr for BitString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(0),
                '1' => Ok(1),
                _ => Err(Error::InvalidBits(s.to_string())),
            })
            .collect::<Result<Vec<u8>>>()
            .map(BitString)
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in &self.0 {
            write!(f, "{b}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitString({self})")
    }
}

impl Serialize for BitString {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for BitString {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Every feasible output of one input string with its exact likelihood,
/// sorted lexicographically by output.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OutputDistribution {
    input: BitString,
    state: State,
    outputs: BTreeMap<BitString, Dyadic>,
}

impl OutputDistribution {
    pub fn input(&self) -> &BitString {
        &self.input
    }

    pub fn initial_state(&self) -> State {
        self.state
    }

    pub fn outputs(&self) -> &BTreeMap<BitString, Dyadic> {
        &self.outputs
    }

    pub fn len(&self) -> usize {
        self.outputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outputs.is_empty()
    }

    pub fn probability(&self, output: &BitString) -> Dyadic {
        self.outputs.get(output).cloned().unwrap_or_default()
    }

    pub fn total(&self) -> Dyadic {
        self.outputs.values().sum()
    }
}

/// Enumerates feasible outputs under the default enumeration cap.
pub fn generate_outputs(input: &BitString, state: State) -> Result<OutputDistribution> {
    generate_outputs_with_limits(input, state, &Limits::default())
}

pub fn generate_outputs_with_limits(
    input: &BitString,
    state: State,
    limits: &Limits,
) -> Result<OutputDistribution> {
    if input.is_empty() {
        return Err(Error::EmptyInput);
    }
    if input.len() > limits.enumeration {
        return Err(Error::TooLarge {
            what: "output enumeration",
            n: input.len(),
            cap: limits.enumeration,
        });
    }
    let mut acc = Accumulator::default();
    let mut out = Vec::with_capacity(input.len());
    recurse(input.bits(), &mut out, state.bit(), Dyadic::one(), &mut acc);
    if acc.merges > 0 {
        return Err(Error::Invariant(format!(
            "{} output strings were reached along more than one path",
            acc.merges
        )));
    }
    Ok(OutputDistribution {
        input: input.clone(),
        state,
        outputs: acc.outputs,
    })
}

#[derive(Default)]
struct Accumulator {
    outputs: BTreeMap<BitString, Dyadic>,
    merges: usize,
}

fn recurse(input: &[u8], out: &mut Vec<u8>, state: u8, prob: Dyadic, acc: &mut Accumulator) {
    let Some((&x, rest)) = input.split_first() else {
        let key = BitString(out.clone());
        match acc.outputs.get_mut(&key) {
            Some(p) => {
                *p += prob;
                acc.merges += 1;
            }
            None => {
                acc.outputs.insert(key, prob);
            }
        }
        return;
    };
    out.push(x);
    if x == state {
        recurse(rest, out, state, prob, acc);
    } else {
        let half = prob.mul_pow2(-1);
        recurse(rest, out, state, half.clone(), acc);
        *out.last_mut().expect("just pushed") = state;
        recurse(rest, out, x, half, acc);
    }
    out.pop();
}

/// The dense row of `P_{n|s0}` for `input`, assembled from the enumeration.
pub fn channel_row_from_enumeration(
    n: usize,
    state: State,
    input: &BitString,
) -> Result<Vec<Dyadic>> {
    if input.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            actual: input.len(),
        });
    }
    let dist = generate_outputs(input, state)?;
    let mut row = vec![Dyadic::zero(); 1 << n];
    for (y, p) in dist.outputs() {
        row[y.to_index()] = p.clone();
    }
    Ok(row)
}

/// `p(output | input, s0)`, zero when the output cannot occur.
///
/// Runs the channel forward once: whenever the new ball differs from the
/// one in the box, the observed output symbol identifies which ball was
/// drawn, so there is at most one consistent state path.
pub fn feasibility(input: &BitString, output: &BitString, state: State) -> Result<Dyadic> {
    if input.len() != output.len() {
        return Err(Error::LengthMismatch {
            expected: input.len(),
            actual: output.len(),
        });
    }
    let mut s = state.bit();
    let mut halvings = 0i64;
    for (&x, &y) in input.bits().iter().zip(output.bits()) {
        if x == s {
            if y != x {
                return Ok(Dyadic::zero());
            }
        } else {
            halvings += 1;
            if y == s {
                s = x;
            }
        }
    }
    Ok(Dyadic::pow2(-halvings))
}

//! Channel matrices as shapes, and the iterated function systems that
//! generate them.
//!
//! A [`ShapeGrid`] of resolution `k` is a `2ᵏ × 2ᵏ` field of heights over
//! the unit square. Cell `(row r, col c)` covers
//! `x ∈ (c/2ᵏ, (c+1)/2ᵏ)`, `y ∈ (1-(r+1)/2ᵏ, 1-r/2ᵏ)`: rows run top to
//! bottom like image rows, and entry `(r, c)` of `P_{k|s0}` sits in cell
//! `(r, c)`. Cell boundaries are never assigned; every map used here sends
//! open dyadic squares to open dyadic squares, so the grid is exact.
//!
//! With this layout the three maps
//!
//! ```text
//! φ₁(x,y,z) = ((x+1)/2, y/2, z/2)          lower right,  ½ P_{k|0}
//! φ₂(x,y,z) = (x/2, (y+1)/2, z)            upper left,   P_{k|0}
//! φ₃(x,y,z) = ((1-x)/2, (1-y)/2, z/2)      lower left,   ½ P_{k|1}
//! ```
//!
//! turn the grid of `P_{k|0}` into the grid of `P_{k+1|0}`, so iterating
//! them `n` times on the flat unit shape reproduces `P_{n|0}` cell for cell.
//! The state-1 system is the same three maps conjugated by the half-turn
//! `τ(x,y,z) = (1-x, 1-y, z)`.

use std::fmt;

use num_traits::{One, Zero};

use crate::channel::{ChannelMatrix, State};
use crate::dyadic::Dyadic;
use crate::error::{Error, Result};

/// Heights over the unit square at resolution `k`, row-major, top row first.
#[derive(Clone, PartialEq, Eq)]
pub struct ShapeGrid {
    resolution: usize,
    cells: Vec<Dyadic>,
}

impl ShapeGrid {
    /// The flat shape `{z = 1}` at resolution 0.
    pub fn unit() -> Self {
        ShapeGrid {
            resolution: 0,
            cells: vec![Dyadic::one()],
        }
    }

    pub fn zeros(resolution: usize) -> Self {
        let side = 1 << resolution;
        ShapeGrid {
            resolution,
            cells: vec![Dyadic::zero(); side * side],
        }
    }

    pub fn from_cells(resolution: usize, cells: Vec<Dyadic>) -> Result<Self> {
        let side = 1usize << resolution;
        if cells.len() != side * side {
            return Err(Error::LengthMismatch {
                expected: side * side,
                actual: cells.len(),
            });
        }
        Ok(ShapeGrid { resolution, cells })
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn side(&self) -> usize {
        1 << self.resolution
    }

    pub fn get(&self, row: usize, col: usize) -> &Dyadic {
        &self.cells[row * self.side() + col]
    }

    pub fn cells(&self) -> &[Dyadic] {
        &self.cells
    }

    pub fn count_nonzero(&self) -> usize {
        self.cells.iter().filter(|z| !z.is_zero()).count()
    }

    /// One of the four half-resolution quadrants.
    pub fn quadrant(&self, top: bool, left: bool) -> Result<Self> {
        if self.resolution == 0 {
            return Err(Error::InvalidParameter(
                "a 1×1 grid has no quadrants".into(),
            ));
        }
        let half = self.side() / 2;
        let r0 = if top { 0 } else { half };
        let c0 = if left { 0 } else { half };
        let mut cells = Vec::with_capacity(half * half);
        for r in 0..half {
            cells.extend_from_slice(&self.cells[(r0 + r) * self.side() + c0..][..half]);
        }
        Ok(ShapeGrid {
            resolution: self.resolution - 1,
            cells,
        })
    }

    /// Multiplies every height by `2^k`.
    pub fn scale_heights(&self, k: i64) -> Self {
        ShapeGrid {
            resolution: self.resolution,
            cells: self.cells.iter().map(|z| z.mul_pow2(k)).collect(),
        }
    }
}

impl fmt::Debug for ShapeGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ShapeGrid(k={})", self.resolution)?;
        for row in self.cells.chunks(self.side()) {
            let line: Vec<String> = row.iter().map(|z| z.to_string()).collect();
            writeln!(f, "  {}", line.join(" "))?;
        }
        Ok(())
    }
}

/// `ρ(P)`: the matrix entries as heights, entry `(r, c)` in cell `(r, c)`.
pub fn rho_representation(p: &ChannelMatrix<Dyadic>) -> ShapeGrid {
    ShapeGrid {
        resolution: p.n(),
        cells: p.matrix().entries().to_vec(),
    }
}

/// `τ`: half-turn about the centre of the square, heights unchanged.
pub fn tau_transform(g: &ShapeGrid) -> ShapeGrid {
    let mut cells = g.cells.clone();
    cells.reverse();
    ShapeGrid {
        resolution: g.resolution,
        cells,
    }
}

/// `v ↦ L v + t` on `(x, y, z)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AffineMap3 {
    pub linear: [[Dyadic; 3]; 3],
    pub translation: [Dyadic; 3],
}

impl AffineMap3 {
    /// Builds a map from coefficients given in halves.
    pub fn from_halves(linear: [[i64; 3]; 3], translation: [i64; 3]) -> Self {
        let d = |x: i64| Dyadic::new(x, 1);
        AffineMap3 {
            linear: linear.map(|row| row.map(d)),
            translation: translation.map(d),
        }
    }

    pub fn apply(&self, v: [&Dyadic; 3]) -> [Dyadic; 3] {
        std::array::from_fn(|i| {
            let mut acc = self.translation[i].clone();
            for (a, x) in self.linear[i].iter().zip(v) {
                acc += a * x;
            }
            acc
        })
    }

    /// Largest singular value of the xy block.
    pub fn xy_norm(&self) -> f64 {
        let [a, b] = [self.linear[0][0].to_f64(), self.linear[0][1].to_f64()];
        let [c, d] = [self.linear[1][0].to_f64(), self.linear[1][1].to_f64()];
        let t = a * a + b * b + c * c + d * d;
        let det = a * d - b * c;
        ((t + (t * t - 4.0 * det * det).max(0.0).sqrt()) / 2.0).sqrt()
    }
}

/// A hyperbolic IFS: a non-empty list of xy-contractions.
#[derive(Clone, Debug, PartialEq)]
pub struct Ifs {
    maps: Vec<AffineMap3>,
    contractivity: f64,
}

impl Ifs {
    pub fn new(maps: Vec<AffineMap3>) -> Result<Self> {
        if maps.is_empty() {
            return Err(Error::EmptyIfs);
        }
        let mut contractivity = 0.0f64;
        for (index, m) in maps.iter().enumerate() {
            let norm = m.xy_norm();
            if !(norm < 1.0) {
                return Err(Error::NotContraction { index, norm });
            }
            contractivity = contractivity.max(norm);
        }
        Ok(Ifs {
            maps,
            contractivity,
        })
    }

    pub fn maps(&self) -> &[AffineMap3] {
        &self.maps
    }

    pub fn contractivity(&self) -> f64 {
        self.contractivity
    }
}

/// The system generating `ρ(P_{n|s0})`.
pub fn trapdoor_ifs(state: State) -> Ifs {
    let maps = match state {
        State::Zero => vec![
            AffineMap3::from_halves([[1, 0, 0], [0, 1, 0], [0, 0, 1]], [1, 0, 0]),
            AffineMap3::from_halves([[1, 0, 0], [0, 1, 0], [0, 0, 2]], [0, 1, 0]),
            AffineMap3::from_halves([[-1, 0, 0], [0, -1, 0], [0, 0, 1]], [1, 1, 0]),
        ],
        State::One => vec![
            AffineMap3::from_halves([[1, 0, 0], [0, 1, 0], [0, 0, 1]], [0, 1, 0]),
            AffineMap3::from_halves([[1, 0, 0], [0, 1, 0], [0, 0, 2]], [1, 0, 0]),
            AffineMap3::from_halves([[-1, 0, 0], [0, -1, 0], [0, 0, 1]], [2, 2, 0]),
        ],
    };
    Ifs::new(maps).expect("trapdoor maps contract by one half")
}

/// Three half-scale copies: lower left, lower right, upper left.
pub fn sierpinski_ifs() -> Ifs {
    Ifs::new(vec![
        AffineMap3::from_halves([[1, 0, 0], [0, 1, 0], [0, 0, 2]], [0, 0, 0]),
        AffineMap3::from_halves([[1, 0, 0], [0, 1, 0], [0, 0, 2]], [1, 0, 0]),
        AffineMap3::from_halves([[1, 0, 0], [0, 1, 0], [0, 0, 2]], [0, 1, 0]),
    ])
    .expect("half-scale maps contract")
}

/// A map reduced to integer arithmetic on cell centres.
///
/// Centres are tracked in units of `1/(4s)` for a source side `s`, which
/// keeps both source and target centres integral.
struct CellMap {
    // 2·L_xy, entries in {-1, 0, 1}
    lin: [[i64; 2]; 2],
    // 2·t_xy
    shift: [i64; 2],
    z_scale: Dyadic,
}

impl CellMap {
    fn compile(index: usize, m: &AffineMap3) -> Result<Self> {
        let bad = |reason: &str| Error::NonGridMap {
            index,
            reason: reason.to_string(),
        };
        let twice = |d: &Dyadic| -> Option<i64> {
            let v = d.mul_pow2(1);
            v.to_integer().and_then(|z| i64::try_from(z.clone()).ok())
        };
        let mut lin = [[0i64; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                lin[i][j] = twice(&m.linear[i][j])
                    .filter(|v| v.abs() <= 1)
                    .ok_or_else(|| bad("xy coefficients must be 0 or ±1/2"))?;
            }
        }
        let perm = (lin[0][0] != 0) as u8 + (lin[0][1] != 0) as u8 == 1
            && (lin[1][0] != 0) as u8 + (lin[1][1] != 0) as u8 == 1
            && (lin[0][0] != 0) == (lin[1][1] != 0);
        if !perm {
            return Err(bad("xy block must be one half of a signed permutation"));
        }
        let shift = [twice(&m.translation[0]), twice(&m.translation[1])];
        let [Some(sx), Some(sy)] = shift else {
            return Err(bad("xy translation must be a multiple of 1/2"));
        };
        if !(m.linear[0][2].is_zero()
            && m.linear[1][2].is_zero()
            && m.linear[2][0].is_zero()
            && m.linear[2][1].is_zero()
            && m.translation[2].is_zero())
        {
            return Err(bad("z must be scaled independently of x and y"));
        }
        let z_scale = m.linear[2][2].clone();
        if z_scale.is_negative() || z_scale > Dyadic::one() {
            return Err(bad("z scale must lie in [0, 1]"));
        }
        Ok(CellMap {
            lin,
            shift: [sx, sy],
            z_scale,
        })
    }

    /// Target `(row, col)` at side `2s` of source cell `(row, col)` at side
    /// `s`, or `None` if the image leaves the unit square.
    fn target(&self, row: usize, col: usize, s: usize) -> Option<(usize, usize)> {
        let s = s as i64;
        // centre in units of 1/(2s)
        let x = 2 * col as i64 + 1;
        let y = 2 * s - 2 * row as i64 - 1;
        // image centre in units of 1/(4s): 4s·(L/2·(x,y)/(2s)·2 + t/2)
        let xp = self.lin[0][0] * x + self.lin[0][1] * y + 2 * s * self.shift[0];
        let yp = self.lin[1][0] * x + self.lin[1][1] * y + 2 * s * self.shift[1];
        let side = 2 * s;
        if xp <= 0 || yp <= 0 || xp >= 2 * side || yp >= 2 * side {
            return None;
        }
        let col = (xp - 1) / 2;
        let row = (2 * side - yp - 1) / 2;
        Some((row as usize, col as usize))
    }
}

/// Applies the IFS `k` times, doubling the resolution each time. Every map
/// must send dyadic cells to dyadic cells, and the images must not overlap.
pub fn ifs_iterate(ifs: &Ifs, initial: &ShapeGrid, k: usize) -> Result<ShapeGrid> {
    let compiled = ifs
        .maps()
        .iter()
        .enumerate()
        .map(|(i, m)| CellMap::compile(i, m))
        .collect::<Result<Vec<_>>>()?;
    let mut grid = initial.clone();
    for _ in 0..k {
        grid = iterate_once(&compiled, &grid)?;
    }
    Ok(grid)
}

fn iterate_once(maps: &[CellMap], grid: &ShapeGrid) -> Result<ShapeGrid> {
    let s = grid.side();
    let mut next = ShapeGrid::zeros(grid.resolution + 1);
    let mut covered = vec![false; 4 * s * s];
    for (index, m) in maps.iter().enumerate() {
        for row in 0..s {
            for col in 0..s {
                let (r, c) = m.target(row, col, s).ok_or_else(|| Error::NonGridMap {
                    index,
                    reason: "image leaves the unit square".into(),
                })?;
                let slot = r * 2 * s + c;
                if covered[slot] {
                    return Err(Error::Overlap { row: r, col: c });
                }
                covered[slot] = true;
                let z = grid.get(row, col);
                if !z.is_zero() {
                    next.cells[slot] = z * &m.z_scale;
                }
            }
        }
    }
    Ok(next)
}

/// How heights become gray levels.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum RenderMode {
    /// `round(255 · z^γ)`.
    #[default]
    Linear,
    /// `round(255 · (1 - m/k))` for `z = 2^{-m}`; keeps deep levels visible.
    Log,
    /// 255 wherever `z > 0`.
    Binary,
}

impl std::str::FromStr for RenderMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "linear" => Ok(RenderMode::Linear),
            "log" => Ok(RenderMode::Log),
            "binary" => Ok(RenderMode::Binary),
            other => Err(Error::InvalidParameter(format!(
                "unknown render mode {other:?}"
            ))),
        }
    }
}

/// Gray levels, one byte per cell, top row first.
pub fn render_pixels(g: &ShapeGrid, mode: RenderMode, gamma: f64) -> Result<Vec<u8>> {
    if mode == RenderMode::Linear && !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "gamma must be positive, got {gamma}"
        )));
    }
    let k = g.resolution as f64;
    Ok(g.cells
        .iter()
        .map(|z| {
            if z.is_zero() {
                return 0;
            }
            let level = match mode {
                RenderMode::Binary => 1.0,
                RenderMode::Linear => z.to_f64().powf(gamma),
                RenderMode::Log => match z.log2_exact() {
                    Some(_) if k == 0.0 => 1.0,
                    Some(e) => 1.0 - (-e) as f64 / k,
                    None => 1.0 + z.log2() / k.max(1.0),
                },
            };
            (255.0 * level.clamp(0.0, 1.0)).round() as u8
        })
        .collect())
}

/// Binary graymap (P5), no comments.
pub fn render_pgm(g: &ShapeGrid, mode: RenderMode, gamma: f64) -> Result<Vec<u8>> {
    let side = g.side();
    let mut out = format!("P5\n{side} {side}\n255\n").into_bytes();
    out.extend(render_pixels(g, mode, gamma)?);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::build_channel_matrix;

    fn rho(n: usize, s: State) -> ShapeGrid {
        rho_representation(&build_channel_matrix(n, s).unwrap())
    }

    #[test]
    fn rho_of_one_step_matrix() {
        let g = rho(1, State::Zero);
        assert_eq!(g.get(0, 0), &Dyadic::one());
        assert_eq!(g.get(0, 1), &Dyadic::zero());
        assert_eq!(g.get(1, 0), &Dyadic::new(1, 1));
        assert_eq!(g.get(1, 1), &Dyadic::new(1, 1));
        assert_eq!(rho(0, State::Zero), ShapeGrid::unit());
        let q = rho(2, State::Zero).quadrant(true, false).unwrap();
        assert_eq!(q.count_nonzero(), 0);
    }

    #[test]
    fn tau_swaps_states() {
        for n in 0..=6 {
            assert_eq!(tau_transform(&rho(n, State::Zero)), rho(n, State::One));
        }
        let g = rho(3, State::Zero);
        assert_eq!(tau_transform(&tau_transform(&g)), g);
    }

    #[test]
    fn iterating_reproduces_matrices() {
        for s in State::BOTH {
            let ifs = trapdoor_ifs(s);
            assert_eq!(ifs.contractivity(), 0.5);
            for n in 0..=7 {
                let g = ifs_iterate(&ifs, &ShapeGrid::unit(), n).unwrap();
                assert_eq!(g, rho(n, s), "n = {n}, s0 = {s}");
            }
        }
    }

    #[test]
    fn state_one_system_is_conjugate() {
        assert_eq!(
            trapdoor_ifs(State::One).maps()[2].translation[..2],
            [Dyadic::one(), Dyadic::one()]
        );
        let g = rho(2, State::Zero);
        let a = ifs_iterate(&trapdoor_ifs(State::One), &tau_transform(&g), 1).unwrap();
        let b = tau_transform(&ifs_iterate(&trapdoor_ifs(State::Zero), &g, 1).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn quadrants_follow_block_structure() {
        let g = rho(3, State::Zero);
        let p2 = rho(2, State::Zero);
        assert_eq!(g.quadrant(true, true).unwrap(), p2);
        assert_eq!(g.quadrant(false, false).unwrap(), p2.scale_heights(-1));
        assert_eq!(
            g.quadrant(false, true).unwrap(),
            tau_transform(&p2).scale_heights(-1)
        );
    }

    #[test]
    fn sierpinski_counts() {
        let ifs = sierpinski_ifs();
        let one = ifs_iterate(&ifs, &ShapeGrid::unit(), 1).unwrap();
        assert_eq!(one.get(0, 1), &Dyadic::zero());
        assert_eq!(one.count_nonzero(), 3);
        for k in 0..=6 {
            let g = ifs_iterate(&ifs, &ShapeGrid::unit(), k).unwrap();
            assert_eq!(g.count_nonzero(), 3usize.pow(k as u32));
        }
    }

    #[test]
    fn rejects_bad_systems() {
        assert!(matches!(Ifs::new(vec![]), Err(Error::EmptyIfs)));
        let id = AffineMap3::from_halves([[2, 0, 0], [0, 2, 0], [0, 0, 2]], [0, 0, 0]);
        assert!(matches!(
            Ifs::new(vec![id]),
            Err(Error::NotContraction { .. })
        ));
        let twice = AffineMap3::from_halves([[1, 0, 0], [0, 1, 0], [0, 0, 2]], [0, 0, 0]);
        let ifs = Ifs::new(vec![twice.clone(), twice]).unwrap();
        assert!(matches!(
            ifs_iterate(&ifs, &ShapeGrid::unit(), 1),
            Err(Error::Overlap { .. })
        ));
        let third = AffineMap3 {
            linear: [
                [Dyadic::new(1, 2), Dyadic::zero(), Dyadic::zero()],
                [Dyadic::zero(), Dyadic::new(1, 1), Dyadic::zero()],
                [Dyadic::zero(), Dyadic::zero(), Dyadic::one()],
            ],
            translation: [Dyadic::zero(), Dyadic::zero(), Dyadic::zero()],
        };
        let ifs = Ifs::new(vec![third]).unwrap();
        assert!(matches!(
            ifs_iterate(&ifs, &ShapeGrid::unit(), 1),
            Err(Error::NonGridMap { .. })
        ));
    }

    #[test]
    fn pgm_bytes() {
        let unit = render_pgm(&ShapeGrid::unit(), RenderMode::Linear, 1.0).unwrap();
        assert_eq!(unit, b"P5\n1 1\n255\n\xff");
        let bin = render_pixels(&rho(1, State::Zero), RenderMode::Binary, 1.0).unwrap();
        assert_eq!(bin, vec![255, 0, 255, 255]);
        let lin = render_pixels(&rho(1, State::Zero), RenderMode::Linear, 1.0).unwrap();
        assert_eq!(lin, vec![255, 0, 128, 128]);
        let log = render_pixels(&rho(2, State::Zero), RenderMode::Log, 1.0).unwrap();
        assert_eq!(&log[..4], &[255, 0, 0, 0]);
        assert_eq!(log[15], 0);
        assert_eq!(log[4], 128);
        assert!(render_pixels(&ShapeGrid::zeros(2), RenderMode::Log, 1.0)
            .unwrap()
            .iter()
            .all(|&p| p == 0));
        assert!(render_pgm(&ShapeGrid::unit(), RenderMode::Linear, 0.0).is_err());
        assert_eq!(
            render_pixels(&ShapeGrid::unit(), RenderMode::Log, 1.0).unwrap(),
            vec![255]
        );
    }
}

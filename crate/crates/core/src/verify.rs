//! The full invariant suite behind `trapdoor verify`.
//!
//! Each check is independent of the others and reports a name, a verdict
//! and a short detail line. Groups run on separate threads.

use std::fmt;
use std::thread;

use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::channel::{invert_channel_matrix, invert_two_step, ChannelMatrix, Limits, State};
use crate::dyadic::Dyadic;
use crate::entropy::{
    analytic_sum, closed_form, entropy_vector_direct, entropy_vector_recursive_even,
    entropy_vector_recursive_step, golden_ratio_reference, omega_direct, omega_for_state,
    second_to_last_d, upper_bound_with_limits, ZERO_ERROR_RATE,
};
use crate::enumerate::{channel_row_from_enumeration, BitString};
use crate::fractal::{
    ifs_iterate, render_pgm, rho_representation, sierpinski_ifs, tau_transform, trapdoor_ifs,
    RenderMode, ShapeGrid,
};
use crate::matrix::Matrix;
use crate::optimize::{mutual_information_exact, BlahutArimoto};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Check {
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }

    fn from_failures(
        name: impl Into<String>,
        failures: Vec<String>,
        ok: impl Into<String>,
    ) -> Self {
        if failures.is_empty() {
            Check::new(name, true, ok)
        } else {
            Check::new(name, false, failures.join("; "))
        }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "[{verdict}] {}: {}", self.name, self.detail)
    }
}

/// Options for [`run_all`].
#[derive(Clone, Debug)]
pub struct VerifyOptions {
    /// Largest block length for the exact matrix checks.
    pub max_n: usize,
    /// Largest block length for Blahut–Arimoto.
    pub max_ba_n: usize,
    pub limits: Limits,
}

impl VerifyOptions {
    pub fn new(max_n: usize) -> Self {
        VerifyOptions {
            max_n,
            max_ba_n: max_n.min(8),
            limits: Limits::default(),
        }
    }
}

/// Runs every check and returns them in a fixed order.
pub fn run_all(opts: &VerifyOptions) -> Vec<Check> {
    type Group = fn(&VerifyOptions) -> Vec<Check>;
    let groups: [Group; 5] = [
        channel_checks,
        entropy_checks,
        bound_checks,
        optimize_checks,
        fractal_checks,
    ];
    thread::scope(|s| {
        let handles: Vec<_> = groups.iter().map(|g| s.spawn(move || g(opts))).collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("check group panicked"))
            .collect()
    })
}

pub fn all_passed(checks: &[Check]) -> bool {
    checks.iter().all(|c| c.passed)
}

fn matrix_n(opts: &VerifyOptions) -> usize {
    opts.max_n.min(opts.limits.matrix)
}

fn channel_checks(opts: &VerifyOptions) -> Vec<Check> {
    let top = matrix_n(opts);
    let mut rows = Vec::new();
    let mut inverse = Vec::new();
    let mut inverse_rows = Vec::new();
    let mut two_step = Vec::new();
    let mut symmetry = Vec::new();
    let mut enumeration = Vec::new();
    for n in 0..=top {
        let (p0, p1) = match ChannelMatrix::<Dyadic>::pair(n, &opts.limits) {
            Ok(pair) => pair,
            Err(e) => {
                rows.push(format!("n={n}: {e}"));
                continue;
            }
        };
        let q0 = invert_channel_matrix(&p0);
        let q1 = invert_channel_matrix(&p1);
        for (p, q) in [(&p0, &q0), (&p1, &q1)] {
            let s = p.initial_state();
            if !p.matrix().row_sums().iter().all(One::is_one) {
                rows.push(format!("n={n} s0={s}"));
            }
            if !p.matrix().mul(q).is_identity() {
                inverse.push(format!("n={n} s0={s}"));
            }
            if !q.row_sums().iter().all(One::is_one) {
                inverse_rows.push(format!("n={n} s0={s}"));
            }
            if n >= 2 && n % 2 == 0 {
                match invert_two_step::<Dyadic>(n, s, &opts.limits) {
                    Ok(m) if &m == q => {}
                    Ok(_) => two_step.push(format!("n={n} s0={s}")),
                    Err(e) => two_step.push(format!("n={n} s0={s}: {e}")),
                }
            }
            if (1..=opts.limits.enumeration).contains(&n) {
                for i in 0..p.dim() {
                    let x = BitString::from_index(i, n);
                    match channel_row_from_enumeration(n, s, &x) {
                        Ok(row) if row == p.row(i) => {}
                        Ok(_) => enumeration.push(format!("n={n} s0={s} x={x}")),
                        Err(e) => enumeration.push(format!("n={n} s0={s} x={x}: {e}")),
                    }
                }
            }
        }
        if p0.matrix().exchange_conjugate() != *p1.matrix() {
            symmetry.push(format!("P n={n}"));
        }
        if q0.exchange_conjugate() != q1 {
            symmetry.push(format!("P⁻¹ n={n}"));
        }
    }
    let range = format!("n ≤ {top}, both states");
    vec![
        Check::from_failures("channel rows sum to 1", rows, range.clone()),
        Check::from_failures("P · P⁻¹ = I", inverse, range.clone()),
        Check::from_failures("inverse rows sum to 1", inverse_rows, range.clone()),
        Check::from_failures(
            "two-step inverse = one-step inverse",
            two_step,
            format!("even 2 ≤ n ≤ {top}"),
        ),
        Check::from_failures("ĨPĨ swaps the initial states", symmetry, range.clone()),
        Check::from_failures(
            "enumeration reproduces every matrix row",
            enumeration,
            range,
        ),
        zero_error_check(),
    ]
}

fn zero_error_check() -> Check {
    let name = "00 and 11 give disjoint outputs, 0.5 b/u";
    let Ok(p) = ChannelMatrix::<Dyadic>::build(2, State::Zero) else {
        return Check::new(name, false, "cannot build P_2");
    };
    let h = Dyadic::new(1, 1);
    let z = Dyadic::zero();
    let mi = mutual_information_exact(&p, &[h.clone(), z.clone(), z, h]);
    let disjoint = crate::channel::disjoint_support_check(&p, 0, 3).unwrap_or(false);
    let half = BigRational::new(1.into(), 2.into());
    match mi {
        Ok(Some(v)) if v == half && disjoint => Check::new(name, true, format!("I = {v} exactly")),
        other => Check::new(name, false, format!("disjoint={disjoint}, I = {other:?}")),
    }
}

fn entropy_checks(opts: &VerifyOptions) -> Vec<Check> {
    let top = matrix_n(opts);
    let mut h_fail = Vec::new();
    let mut w_fail = Vec::new();
    let mut sym_fail = Vec::new();
    for n in 0..=top {
        let Ok((p0, p1)) = ChannelMatrix::<Dyadic>::pair(n, &opts.limits) else {
            h_fail.push(format!("n={n}: cannot build"));
            continue;
        };
        let h0 = entropy_vector_direct(&p0);
        let h1 = entropy_vector_direct(&p1);
        match entropy_vector_recursive_step(n) {
            Ok(h) if h.entries == h0.entries => {}
            _ => h_fail.push(format!("one-step n={n}")),
        }
        if n % 2 == 0 {
            match entropy_vector_recursive_even(n) {
                Ok(h) if h.entries == h0.entries => {}
                _ => h_fail.push(format!("two-step n={n}")),
            }
        }
        if h0.exchanged() != h1 {
            sym_fail.push(format!("h n={n}"));
        }
        let mut omegas = Vec::new();
        for (p, h) in [(&p0, &h0), (&p1, &h1)] {
            let s = p.initial_state();
            let direct = omega_direct(p, h);
            let recursive = omega_for_state(n, s, &opts.limits);
            match (direct, recursive) {
                (Ok(a), Ok(b)) if a == b => omegas.push(a),
                (a, b) => w_fail.push(format!("n={n} s0={s}: {a:?} vs {b:?}")),
            }
        }
        if let [a, b] = &omegas[..] {
            if a.exchanged() != *b {
                sym_fail.push(format!("ω n={n}"));
            }
        }
    }
    let range = format!("n ≤ {top}");
    vec![
        Check::from_failures("h recursions = −(P∘log₂P)1", h_fail, range.clone()),
        Check::from_failures(
            "ω recursion = −P⁻¹h",
            w_fail,
            format!("{range}, both states"),
        ),
        Check::from_failures("h and ω of state 1 are reversals", sym_fail, range),
    ]
}

fn bound_checks(opts: &VerifyOptions) -> Vec<Check> {
    let bound_top = opts.limits.bound.min(20);
    let mut sums = Vec::new();
    let mut values = Vec::new();
    let mut previous_odd = f64::NEG_INFINITY;
    let mut monotone = Vec::new();
    for n in 1..=bound_top {
        let b = match upper_bound_with_limits(n, State::Zero, &opts.limits) {
            Ok(b) => b,
            Err(e) => {
                sums.push(format!("n={n}: {e}"));
                continue;
            }
        };
        if analytic_sum(n).map(|s| s != b.sum).unwrap_or(true) {
            sums.push(format!("n={n}: S = {}", b.sum));
        }
        if closed_form(n)
            .map(|c| (c - b.c_upper).abs() > 1e-12)
            .unwrap_or(true)
        {
            values.push(format!("n={n}"));
        }
        if n % 2 == 1 {
            if !(b.c_upper > previous_odd && b.c_upper < closed_form(2).unwrap_or(0.0)) {
                monotone.push(format!("n={n}: {}", b.c_upper));
            }
            previous_odd = b.c_upper;
        }
    }

    let top = matrix_n(opts);
    let mut d_fail = Vec::new();
    for n in 1..=top {
        for s in State::BOTH {
            let b = match upper_bound_with_limits(n, s, &opts.limits) {
                Ok(b) => b,
                Err(e) => {
                    d_fail.push(format!("n={n} s0={s}: {e}"));
                    continue;
                }
            };
            let Some(d) = &b.d else {
                d_fail.push(format!("n={n} s0={s}: d missing"));
                continue;
            };
            if d.iter().sum::<Dyadic>() != b.sum {
                d_fail.push(format!("n={n} s0={s}: Σd ≠ S"));
            }
            if s == State::Zero {
                if n == 1 && d.iter().any(Dyadic::is_negative) {
                    d_fail.push("n=1: negative weight".into());
                }
                if n >= 2 {
                    let got = &d[d.len() - 2];
                    if Some(got) != second_to_last_d(n).as_ref() || !got.is_negative() {
                        d_fail.push(format!("n={n}: d_(2^n-1) = {got}"));
                    }
                }
            }
        }
    }

    let c2 = closed_form(2).unwrap_or(f64::NAN);
    let golden = golden_ratio_reference();
    vec![
        Check::from_failures(
            "Σ2^ω equals the closed product",
            sums,
            format!("1 ≤ n ≤ {bound_top}"),
        ),
        Check::from_failures(
            "C↑ matches the closed forms",
            values,
            format!("1 ≤ n ≤ {bound_top}"),
        ),
        Check::from_failures(
            "odd-length C↑ increases below ½log₂(5/2)",
            monotone,
            format!("odd n ≤ {bound_top}"),
        ),
        Check::from_failures(
            "d sums to S, d_(2^n-1) < 0 with parity-aware value",
            d_fail,
            format!("n ≤ {top}"),
        ),
        Check::new(
            "ZE rate < C↑₂ < log₂ φ",
            ZERO_ERROR_RATE < c2 && c2 < golden,
            format!("0.5 < {c2:.6} < {golden:.6}"),
        ),
    ]
}

fn optimize_checks(opts: &VerifyOptions) -> Vec<Check> {
    let top = opts.max_ba_n.min(opts.limits.matrix);
    let mut fail = Vec::new();
    let mut detail = Vec::new();
    for n in 1..=top {
        let Ok(p) = ChannelMatrix::<f64>::build(n, State::Zero) else {
            fail.push(format!("n={n}: cannot build"));
            continue;
        };
        let mut ba = BlahutArimoto::new(&p);
        let mut feasible = true;
        while ba.bracket().width() > 1e-8 && ba.iterations() < 50_000 {
            ba.step();
            if n <= 4 {
                let q = p.matrix().transpose_mul_vec(ba.distribution());
                feasible &= q.iter().all(|&x| x >= 0.0);
            }
        }
        let lower = ba.bracket().lower / n as f64;
        let c = closed_form(n).unwrap_or(f64::NAN);
        if !(lower <= c + 1e-8) || !feasible {
            fail.push(format!("n={n}: {lower:.9} vs {c:.9}"));
        }
        detail.push(format!("n={n}: {lower:.6}"));
    }
    vec![Check::from_failures(
        "simplex optimum ≤ C↑ (Blahut–Arimoto)",
        fail,
        detail.join(", "),
    )]
}

fn fractal_checks(opts: &VerifyOptions) -> Vec<Check> {
    let top = matrix_n(opts);
    let mut ifs_fail = Vec::new();
    let mut tau_fail = Vec::new();
    let mut count_fail = Vec::new();
    for s in State::BOTH {
        let ifs = trapdoor_ifs(s);
        let mut grid = ShapeGrid::unit();
        for n in 0..=top {
            if n > 0 {
                match ifs_iterate(&ifs, &grid, 1) {
                    Ok(g) => grid = g,
                    Err(e) => {
                        ifs_fail.push(format!("n={n} s0={s}: {e}"));
                        break;
                    }
                }
            }
            let Ok(p) = ChannelMatrix::<Dyadic>::build_with_limits(n, s, &opts.limits) else {
                ifs_fail.push(format!("n={n}: cannot build"));
                break;
            };
            let rho = rho_representation(&p);
            if grid != rho {
                ifs_fail.push(format!("n={n} s0={s}"));
            }
            if grid.count_nonzero() != p.matrix().count_nonzero() {
                count_fail.push(format!("trapdoor n={n} s0={s}"));
            }
            if s == State::Zero {
                let other = ChannelMatrix::<Dyadic>::build_with_limits(n, State::One, &opts.limits)
                    .map(|p1| rho_representation(&p1));
                if other.map(|o| tau_transform(&rho) != o).unwrap_or(true) {
                    tau_fail.push(format!("n={n}"));
                }
            }
        }
    }
    let sierpinski = sierpinski_ifs();
    let mut grid = ShapeGrid::unit();
    for k in 0..=top {
        if k > 0 {
            grid = match ifs_iterate(&sierpinski, &grid, 1) {
                Ok(g) => g,
                Err(e) => {
                    count_fail.push(format!("sierpinski k={k}: {e}"));
                    break;
                }
            };
        }
        if grid.count_nonzero() != 3usize.pow(k as u32) {
            count_fail.push(format!("sierpinski k={k}"));
        }
    }
    let deterministic = match (
        render_pgm(&grid, RenderMode::Log, 1.0),
        render_pgm(&grid, RenderMode::Log, 1.0),
    ) {
        (Ok(a), Ok(b)) => a == b,
        _ => false,
    };
    let range = format!("n ≤ {top}");
    vec![
        Check::from_failures("IFS iterate = ρ(P), both states", ifs_fail, range.clone()),
        Check::from_failures("τ ρ(P_{n|0}) = ρ(P_{n|1})", tau_fail, range.clone()),
        Check::from_failures(
            "non-zero cells: nnz(P) and 3^k for Sierpinski",
            count_fail,
            range,
        ),
        Check::new(
            "PGM rendering is deterministic",
            deterministic,
            "two renders compared",
        ),
    ]
}

/// Dense `P⁻¹` as rationals by Gauss–Jordan elimination; an oracle that
/// shares no code with the block recursions. Cubic cost, small `n` only.
pub fn gauss_jordan_inverse(m: &Matrix<BigRational>) -> Option<Matrix<BigRational>> {
    let dim = m.dim();
    let mut a: Vec<Vec<BigRational>> = m.rows().map(|r| r.to_vec()).collect();
    let mut inv: Vec<Vec<BigRational>> = Matrix::<BigRational>::identity(dim)
        .rows()
        .map(|r| r.to_vec())
        .collect();
    for col in 0..dim {
        let pivot = (col..dim).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, pivot);
        inv.swap(col, pivot);
        let scale = a[col][col].recip();
        for x in a[col].iter_mut().chain(inv[col].iter_mut()) {
            *x = &*x * &scale;
        }
        for r in 0..dim {
            if r == col || a[r][col].is_zero() {
                continue;
            }
            let factor = a[r][col].clone();
            for c in 0..dim {
                let da = &a[col][c] * &factor;
                a[r][c] -= da;
                let di = &inv[col][c] * &factor;
                inv[r][c] -= di;
            }
        }
    }
    Matrix::from_rows(inv).ok()
}

//! `trapdoor`: command-line front-end for trapdoor-core.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use trapdoor_core::entropy::{
    entropy_vector_direct, entropy_vector_recursive_step, golden_ratio_reference, omega_direct,
    omega_for_state, upper_bound_with_limits, BoundResult, ZERO_ERROR_RATE,
};
use trapdoor_core::enumerate::{generate_outputs_with_limits, BitString};
use trapdoor_core::fractal::{
    ifs_iterate, render_pgm, sierpinski_ifs, trapdoor_ifs, RenderMode, ShapeGrid,
};
use trapdoor_core::io::{self, BaReport, BoundReport, EnumerationReport, MatrixHeader};
use trapdoor_core::optimize::blahut_arimoto;
use trapdoor_core::verify::{all_passed, run_all, VerifyOptions};
use trapdoor_core::{
    entropy::closed_form, invert_channel_matrix, ChannelMatrix, Dyadic, Error, Limits, State,
};

#[derive(Parser)]
#[command(
    name = "trapdoor",
    version,
    about = "Exact and numerical tools for the binary trapdoor channel"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print P_{n|s0} or its inverse
    Matrix {
        #[command(flatten)]
        block: Block,
        /// Print the inverse instead
        #[arg(long)]
        inverse: bool,
        #[command(flatten)]
        out: Output,
    },
    /// List every output of one input string with its likelihood
    Enumerate {
        /// Input bits, time 1 first
        #[arg(short, long)]
        input: String,
        #[arg(short, long = "state", default_value = "0", value_parser = parse_state)]
        s: State,
        #[command(flatten)]
        out: Output,
    },
    /// Conditional entropy vector h, by definition and by recursion
    Entropy {
        #[command(flatten)]
        block: Block,
        #[command(flatten)]
        out: Output,
    },
    /// Weighted entropy vector ω = -P⁻¹h, by definition and by recursion
    Omega {
        #[command(flatten)]
        block: Block,
        #[command(flatten)]
        out: Output,
    },
    /// Closed-form upper bound C↑_n
    Bound {
        #[command(flatten)]
        block: Block,
        #[command(flatten)]
        out: Output,
    },
    /// Blahut–Arimoto on the probability simplex, compared with C↑_n
    Ba {
        #[command(flatten)]
        block: Block,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[arg(long, default_value_t = 100_000)]
        max_iter: usize,
        #[command(flatten)]
        out: Output,
    },
    /// Render ρ(P_{n|s0}) by iterating the trapdoor IFS
    Fractal {
        #[arg(short = 'n', long = "resolution", default_value_t = 8)]
        resolution: usize,
        #[arg(short, long = "state", default_value = "0", value_parser = parse_state)]
        s: State,
        #[command(flatten)]
        render: Render,
    },
    /// Render the Sierpinski triangle
    Sierpinski {
        #[arg(short = 'n', long = "resolution", default_value_t = 8)]
        resolution: usize,
        #[command(flatten)]
        render: Render,
    },
    /// Run the invariant suite; exits 1 if anything fails
    Verify {
        #[arg(long, default_value_t = 8)]
        max_n: usize,
    },
}

#[derive(Args)]
struct Block {
    /// Block length
    #[arg(short)]
    n: usize,
    /// Initial state
    #[arg(short, default_value = "0", value_parser = parse_state)]
    s: State,
}

#[derive(Args)]
struct Output {
    #[arg(short, long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Args)]
struct Render {
    #[arg(long, value_enum, default_value_t = Mode::Log)]
    mode: Mode,
    #[arg(long, default_value_t = 1.0)]
    gamma: f64,
    #[arg(short, long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Pgm)]
    format: Format,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
    Csv,
    Pgm,
    Png,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Linear,
    Log,
    Binary,
}

impl From<Mode> for RenderMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Linear => RenderMode::Linear,
            Mode::Log => RenderMode::Log,
            Mode::Binary => RenderMode::Binary,
        }
    }
}

fn parse_state(s: &str) -> Result<State, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

enum Failure {
    Usage(String),
    Runtime(Error),
    Verification,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::TooLarge { .. }
            | Error::OddLength(_)
            | Error::InvalidBits(_)
            | Error::EmptyInput
            | Error::InvalidState(_)
            | Error::InvalidParameter(_) => Failure::Usage(e.to_string()),
            other => Failure::Runtime(other),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let limits = Limits::from_env();
    match run(cli.command, &limits) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
        Err(Failure::Verification) => ExitCode::from(1),
    }
}

fn run(command: Command, limits: &Limits) -> Result<(), Failure> {
    match command {
        Command::Matrix {
            block,
            inverse,
            out,
        } => matrix(&block, inverse, &out, limits),
        Command::Enumerate { input, s, out } => enumerate(&input, s, &out, limits),
        Command::Entropy { block, out } => entropy(&block, &out, limits),
        Command::Omega { block, out } => omega(&block, &out, limits),
        Command::Bound { block, out } => bound(&block, &out, limits),
        Command::Ba {
            block,
            tol,
            max_iter,
            out,
        } => ba(&block, tol, max_iter, &out, limits),
        Command::Fractal {
            resolution,
            s,
            render: r,
        } => {
            limits.check_matrix(resolution)?;
            let grid = ifs_iterate(&trapdoor_ifs(s), &ShapeGrid::unit(), resolution)?;
            render(&grid, &r)
        }
        Command::Sierpinski {
            resolution,
            render: r,
        } => {
            limits.check_matrix(resolution)?;
            let grid = ifs_iterate(&sierpinski_ifs(), &ShapeGrid::unit(), resolution)?;
            render(&grid, &r)
        }
        Command::Verify { max_n } => verify(max_n, limits),
    }
}

fn allow(out: &Output, formats: &[Format]) -> Result<(), Failure> {
    if formats.contains(&out.format) {
        Ok(())
    } else {
        let names: Vec<_> = formats
            .iter()
            .map(|f| {
                f.to_possible_value()
                    .expect("no skipped variants")
                    .get_name()
                    .to_string()
            })
            .collect();
        Err(Failure::Usage(format!(
            "this command supports --format {}",
            names.join("|")
        )))
    }
}

fn emit(out: &Output, text: &str) -> Result<(), Failure> {
    match &out.output {
        Some(path) => io::write_bytes(path, text.as_bytes())?,
        None => print!("{text}"),
    }
    Ok(())
}

fn emit_json<T: serde::Serialize>(out: &Output, value: &T) -> Result<(), Failure> {
    emit(out, &io::to_json(value)?)
}

fn vector_lines(entries: &[String], n: usize) -> String {
    let mut s = String::new();
    for (i, e) in entries.iter().enumerate() {
        let x = if n == 0 {
            "-".to_string()
        } else {
            BitString::from_index(i, n).to_string()
        };
        s.push_str(&format!("{x}  {e}\n"));
    }
    s
}

fn matrix(block: &Block, inverse: bool, out: &Output, limits: &Limits) -> Result<(), Failure> {
    allow(out, &[Format::Text, Format::Csv])?;
    let p = ChannelMatrix::<Dyadic>::build_with_limits(block.n, block.s, limits)?;
    let (header, m) = if inverse {
        (MatrixHeader::inverse(&p), invert_channel_matrix(&p))
    } else {
        (MatrixHeader::channel(&p), p.matrix().clone())
    };
    if out.format == Format::Csv {
        let mut buf = Vec::new();
        io::write_matrix_csv(&mut buf, &header, &m)?;
        return emit(out, &String::from_utf8_lossy(&buf));
    }
    let cells: Vec<Vec<String>> = m
        .rows()
        .map(|r| r.iter().map(|x| x.to_string()).collect())
        .collect();
    let width = cells.iter().flatten().map(String::len).max().unwrap_or(1);
    let mut text = String::new();
    for row in cells {
        let line: Vec<String> = row.iter().map(|c| format!("{c:>width$}")).collect();
        text.push_str(line.join(" ").trim_end());
        text.push('\n');
    }
    emit(out, &text)
}

fn enumerate(input: &str, s: State, out: &Output, limits: &Limits) -> Result<(), Failure> {
    allow(out, &[Format::Text, Format::Json])?;
    let x: BitString = input.parse()?;
    let dist = generate_outputs_with_limits(&x, s, limits)?;
    if out.format == Format::Json {
        return emit_json(out, &EnumerationReport::from(&dist));
    }
    let mut text = format!("input {x}, s0 = {s}: {} outputs\n", dist.len());
    for (y, p) in dist.outputs() {
        text.push_str(&format!("{y}  {p}\n"));
    }
    text.push_str(&format!("total {}\n", dist.total()));
    emit(out, &text)
}

fn entropy(block: &Block, out: &Output, limits: &Limits) -> Result<(), Failure> {
    allow(out, &[Format::Text, Format::Json])?;
    let p = ChannelMatrix::<Dyadic>::build_with_limits(block.n, block.s, limits)?;
    let direct = entropy_vector_direct(&p);
    let mut recursive = entropy_vector_recursive_step(block.n)?;
    if block.s == State::One {
        recursive = recursive.exchanged();
    }
    let agrees = recursive == direct;
    let h: Vec<String> = direct.entries.iter().map(|x| x.to_string()).collect();
    if out.format == Format::Json {
        let entries: Vec<String> = direct.entries.iter().map(io::format_dyadic).collect();
        return emit_json(
            out,
            &serde_json::json!({"n": block.n, "s0": block.s, "h": entries, "recursion_agrees": agrees}),
        );
    }
    let mut text = vector_lines(&h, block.n);
    text.push_str(&format!(
        "recursion agrees with definition: {}\n",
        yes_no(agrees)
    ));
    emit(out, &text)
}

fn omega(block: &Block, out: &Output, limits: &Limits) -> Result<(), Failure> {
    allow(out, &[Format::Text, Format::Json])?;
    let recursive = omega_for_state(block.n, block.s, limits)?;
    let agrees = if block.n <= limits.matrix {
        let p = ChannelMatrix::<Dyadic>::build_with_limits(block.n, block.s, limits)?;
        let direct = omega_direct(&p, &entropy_vector_direct(&p))?;
        Some(direct == recursive)
    } else {
        None
    };
    if out.format == Format::Json {
        return emit_json(
            out,
            &serde_json::json!({
                "n": block.n,
                "s0": block.s,
                "omega": recursive.entries,
                "definition_agrees": agrees,
            }),
        );
    }
    let w: Vec<String> = recursive.entries.iter().map(|x| x.to_string()).collect();
    let mut text = vector_lines(&w, block.n);
    let verdict = match agrees {
        Some(a) => yes_no(a).to_string(),
        None => format!("not checked (n above matrix cap {})", limits.matrix),
    };
    text.push_str(&format!("recursion agrees with -P⁻¹h: {verdict}\n"));
    emit(out, &text)
}

fn yes_no(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

fn bound_text(b: &BoundResult) -> String {
    let mut text = format!("S = {}, C_up = {:.6} b/u\n", b.sum, b.c_upper);
    match b.negative_indices() {
        Some(neg) if neg.is_empty() => {
            text.push_str("d ≥ 0: the relaxed optimum is a distribution\n")
        }
        Some(neg) => {
            let list: Vec<String> = neg.iter().map(|i| (i + 1).to_string()).collect();
            text.push_str(&format!(
                "d < 0 at indices {} (1-based): the relaxed optimum leaves the simplex\n",
                list.join(", ")
            ));
        }
        None => text.push_str("d not computed at this block length\n"),
    }
    text.push_str(&format!(
        "feedback capacity log2(golden ratio) = {:.6} b/u\n",
        golden_ratio_reference()
    ));
    text.push_str(&format!("zero-error capacity = {ZERO_ERROR_RATE} b/u\n"));
    text
}

fn bound(block: &Block, out: &Output, limits: &Limits) -> Result<(), Failure> {
    allow(out, &[Format::Text, Format::Json])?;
    let b = upper_bound_with_limits(block.n, block.s, limits)?;
    if out.format == Format::Json {
        return emit_json(out, &BoundReport::from(&b));
    }
    emit(out, &bound_text(&b))
}

fn ba(
    block: &Block,
    tol: f64,
    max_iter: usize,
    out: &Output,
    limits: &Limits,
) -> Result<(), Failure> {
    allow(out, &[Format::Text, Format::Json])?;
    let p = ChannelMatrix::<f64>::build_with_limits(block.n, block.s, limits)?;
    let report = blahut_arimoto(&p, tol, max_iter)?;
    let c_upper = closed_form(block.n)?;
    let gap = c_upper - report.capacity_per_letter;
    if out.format == Format::Json {
        return emit_json(
            out,
            &BaReport {
                report,
                c_upper,
                gap_to_bound: gap,
            },
        );
    }
    let mut text = format!(
        "capacity = {:.9} b/u after {} iterations (bracket {:.1e} per letter)\n",
        report.capacity_per_letter, report.iterations, report.final_gap
    );
    text.push_str(&format!("C_up = {c_upper:.9} b/u, gap = {gap:.9}\n"));
    for (i, x) in report.distribution.iter().enumerate() {
        if *x > 1e-9 {
            text.push_str(&format!(
                "p({}) = {x:.9}\n",
                BitString::from_index(i, block.n)
            ));
        }
    }
    emit(out, &text)
}

fn render(grid: &ShapeGrid, r: &Render) -> Result<(), Failure> {
    let mode = RenderMode::from(r.mode);
    match r.format {
        Format::Pgm => {
            let bytes = render_pgm(grid, mode, r.gamma)?;
            match &r.output {
                Some(path) => io::write_pgm(path, &bytes)?,
                None => std::io::stdout()
                    .write_all(&bytes)
                    .map_err(|source| Error::Io {
                        path: Path::new("<stdout>").to_path_buf(),
                        source,
                    })?,
            }
            Ok(())
        }
        Format::Png => {
            let path = r
                .output
                .as_deref()
                .ok_or_else(|| Failure::Usage("--format png needs -o <path>".into()))?;
            io::write_png(path, grid, mode, r.gamma)?;
            Ok(())
        }
        _ => Err(Failure::Usage("images support --format pgm|png".into())),
    }
}

fn verify(max_n: usize, limits: &Limits) -> Result<(), Failure> {
    let opts = VerifyOptions {
        limits: limits.clone(),
        ..VerifyOptions::new(max_n)
    };
    let checks = run_all(&opts);
    for c in &checks {
        println!("{c}");
    }
    let passed = checks.iter().filter(|c| c.passed).count();
    println!("{passed}/{} checks passed", checks.len());
    if all_passed(&checks) {
        Ok(())
    } else {
        Err(Failure::Verification)
    }
}

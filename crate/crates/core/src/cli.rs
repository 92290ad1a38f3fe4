//! Command-line front end and the text file formats it speaks.
//!
//! All formats are line-structured UTF-8 with a versioned header line.
//! Numbers are printed with Rust's shortest round-trip float formatting,
//! so emitted files are byte-stable across runs and platforms and
//! re-parse to bit-identical objects.
//!
//! Exit contract: 0 on success, 1 on a domain failure (verification
//! fails, preconditions violated), 2 on I/O or parse failures.

use std::io::Read;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::factorize::{factorize_1d, reconstruct, ElementaryStep, FactorizationResult};
use crate::filterbank::{is_qmf, power_complementarity, vanishing_moments, Filter, FilterBank};
use crate::lattice::{CosetSystem, LatticeBasis};
use crate::transform::{analysis, apply_unitary, synthesis, Signal, SubbandSet};
use crate::DEFAULT_TOL;

const BANK_HEADER: &str = "qmf-bank";
const STEPS_HEADER: &str = "qmf-steps";
const SIGNAL_HEADER: &str = "qmf-signal";
const SUBBANDS_HEADER: &str = "qmf-subbands";
const FORMAT_VERSION: &str = "1";

/// Highest moment order reported by `verify` and `moments`.
const MOMENT_ORDER: usize = 3;

#[derive(Parser)]
#[command(
    name = "qmfband",
    version,
    about = "Generate, verify, factorize, and apply orthonormal filter banks over integer lattices"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum GenKind {
    /// Delta filters at the coset representatives.
    Lazy,
    /// The two-tap averaging/differencing bank on 2Z.
    Haar,
    /// Seeded random bank built from elementary steps.
    Random,
}

#[derive(Clone, Copy, ValueEnum)]
enum Direction {
    /// Signal in, one subband per channel out.
    Analyze,
    /// Subbands in, signal out.
    Synthesize,
    /// Signal in, signal out through the bank's translation-commuting unitary.
    Unitary,
}

#[derive(Subcommand)]
enum Cmd {
    /// Emit a bank file.
    Gen {
        kind: GenKind,
        /// Lattice spec: one integer m for mZ, or n*n integers (row-major).
        #[arg(long, default_value = "2")]
        lattice: String,
        /// Seed for the random kind.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Number of elementary steps for the random kind.
        #[arg(long, default_value_t = 4)]
        steps: usize,
        /// Write the payload here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check orthonormality of a bank file and print a residual report.
    Verify {
        /// Bank file, or - for standard input.
        bank: String,
        /// Residual tolerance for the verdict.
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
    },
    /// Factorize a two-channel 1-D bank into elementary steps.
    Factor {
        bank: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Rebuild a bank from a steps file.
    Synth {
        steps: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a signal through a bank.
    Transform {
        bank: String,
        /// Signal file for analyze/unitary, subbands file for synthesize.
        signal: String,
        #[arg(long)]
        direction: Direction,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the moment table of a 1-D bank.
    Moments { bank: String },
}

/// Entry point for the binary.  Maps parse and I/O failures to exit
/// code 2 and every other error to exit code 1.
pub fn run() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.cmd) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Parse(_) | Error::Io(_) => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}

fn dispatch(cmd: Cmd) -> Result<ExitCode> {
    match cmd {
        Cmd::Gen { kind, lattice, seed, steps, out } => {
            let lattice = parse_lattice_spec(&lattice)?;
            let bank = match kind {
                GenKind::Lazy => FilterBank::lazy(lattice),
                GenKind::Haar => {
                    if lattice.normal_form() != [vec![2]] {
                        return Err(Error::Unsupported(
                            "the haar kind is defined on the lattice 2Z".into(),
                        ));
                    }
                    FilterBank::haar()
                }
                GenKind::Random => crate::factorize::random_qmf(&lattice, steps, seed, false)?,
            };
            write_output(&out, &serialize_bank(&bank))?;
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Verify { bank, tol } => {
            let fb = parse_bank(&read_input(&bank)?)?;
            let report = is_qmf(&fb, tol);
            println!("paraunitarity {}", report.residual);
            println!(
                "location {} {} {}",
                report.row,
                report.col,
                join_i64(&report.shift)
            );
            for (k, f) in fb.filters().iter().enumerate() {
                println!("complementarity {k} {}", power_complementarity(f, fb.dual()));
            }
            if fb.dim() == 1 {
                for (k, f) in fb.filters().iter().enumerate() {
                    for (p, m) in vanishing_moments(f, MOMENT_ORDER)?.iter().enumerate() {
                        println!("moment {k} {p} {} {}", m.re, m.im);
                    }
                }
            }
            println!("tol {tol}");
            println!("verdict {}", if report.ok { "pass" } else { "fail" });
            Ok(if report.ok { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
        Cmd::Factor { bank, out } => {
            let fb = parse_bank(&read_input(&bank)?)?;
            let r = factorize_1d(&fb)?;
            let back = reconstruct(&r, fb.lattice())?;
            let err = bank_distance(&fb, &back);
            eprintln!("steps {}", r.steps.len());
            eprintln!("round-trip {err:e}");
            write_output(&out, &serialize_steps(fb.lattice(), &r))?;
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Synth { steps, out } => {
            let (lattice, r) = parse_steps(&read_input(&steps)?)?;
            let bank = reconstruct(&r, &lattice)?;
            let report = is_qmf(&bank, DEFAULT_TOL);
            if !report.ok {
                return Err(Error::NotParaunitary {
                    residual: report.residual,
                    tol: DEFAULT_TOL,
                });
            }
            write_output(&out, &serialize_bank(&bank))?;
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Transform { bank, signal, direction, out } => {
            let fb = parse_bank(&read_input(&bank)?)?;
            match direction {
                Direction::Analyze => {
                    let s = parse_signal(&read_input(&signal)?)?;
                    let bands = analysis(&fb, &s)?;
                    eprintln!("energy input {}", s.energy());
                    for (k, e) in bands.energies().iter().enumerate() {
                        eprintln!("energy channel {k} {e}");
                    }
                    write_output(&out, &serialize_subbands(&bands)?)?;
                }
                Direction::Synthesize => {
                    let bands = parse_subbands(&read_input(&signal)?)?;
                    if bands.lattice().normal_form() != fb.lattice().normal_form() {
                        return Err(Error::DomainNotFundamental(
                            "subband lattice does not match the bank lattice".into(),
                        ));
                    }
                    let s = synthesis(&fb, &bands)?;
                    for (k, e) in bands.energies().iter().enumerate() {
                        eprintln!("energy channel {k} {e}");
                    }
                    eprintln!("energy output {}", s.energy());
                    write_output(&out, &serialize_signal(&s))?;
                }
                Direction::Unitary => {
                    let s = parse_signal(&read_input(&signal)?)?;
                    let y = apply_unitary(&fb, &s, DEFAULT_TOL)?;
                    eprintln!("energy input {}", s.energy());
                    eprintln!("energy output {}", y.energy());
                    write_output(&out, &serialize_signal(&y))?;
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Moments { bank } => {
            let fb = parse_bank(&read_input(&bank)?)?;
            for (k, f) in fb.filters().iter().enumerate() {
                for (p, m) in vanishing_moments(f, MOMENT_ORDER)?.iter().enumerate() {
                    println!("moment {k} {p} {} {}", m.re, m.im);
                }
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn bank_distance(a: &FilterBank, b: &FilterBank) -> f64 {
    a.filters()
        .iter()
        .zip(b.filters())
        .map(|(x, y)| x.max_abs_diff(y))
        .fold(0.0, f64::max)
}

fn read_input(path: &str) -> Result<String> {
    if path == "-" {
        let mut buf = String::new();
        std::io::stdin().read_to_string(&mut buf)?;
        Ok(buf)
    } else {
        Ok(std::fs::read_to_string(path)?)
    }
}

fn write_output(out: &Option<PathBuf>, payload: &str) -> Result<()> {
    use std::io::Write;
    match out {
        Some(path) => std::fs::write(path, payload)?,
        None => std::io::stdout().write_all(payload.as_bytes())?,
    }
    Ok(())
}

/// Accepts one integer m (the lattice mZ) or n*n integers row-major,
/// separated by commas or whitespace.
pub fn parse_lattice_spec(spec: &str) -> Result<LatticeBasis> {
    let nums: Vec<i64> = spec
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse::<i64>()
                .map_err(|_| Error::Parse(format!("bad lattice entry '{t}'")))
        })
        .collect::<Result<_>>()?;
    if nums.len() == 1 {
        return LatticeBasis::one_dim(nums[0]);
    }
    let n = (nums.len() as f64).sqrt().round() as usize;
    if n * n != nums.len() {
        return Err(Error::Parse(format!(
            "lattice spec needs a square count of entries, got {}",
            nums.len()
        )));
    }
    LatticeBasis::new(nums.chunks(n).map(|c| c.to_vec()).collect())
}

struct Reader<'a> {
    lines: Vec<(usize, Vec<&'a str>)>,
    pos: usize,
}

impl<'a> Reader<'a> {
    fn new(text: &'a str) -> Self {
        let lines = text
            .lines()
            .enumerate()
            .filter_map(|(i, l)| {
                let toks: Vec<&str> = l.split_whitespace().collect();
                if toks.is_empty() {
                    None
                } else {
                    Some((i + 1, toks))
                }
            })
            .collect();
        Reader { lines, pos: 0 }
    }

    fn header(&mut self, tag: &str) -> Result<()> {
        let (no, toks) = self
            .lines
            .first()
            .ok_or_else(|| Error::Parse("empty input".into()))?;
        if toks.len() != 2 || toks[0] != tag || toks[1] != FORMAT_VERSION {
            return Err(Error::Parse(format!("line {no}: expected header '{tag} {FORMAT_VERSION}'")));
        }
        self.pos = 1;
        Ok(())
    }

    fn expect(&mut self, key: &str) -> Result<(usize, Vec<&'a str>)> {
        match self.lines.get(self.pos) {
            Some((no, toks)) if toks[0] == key => {
                self.pos += 1;
                Ok((*no, toks[1..].to_vec()))
            }
            Some((no, toks)) => {
                Err(Error::Parse(format!("line {no}: expected '{key}', found '{}'", toks[0])))
            }
            None => Err(Error::Parse(format!("unexpected end of input, expected '{key}'"))),
        }
    }

    fn take_if(&mut self, key: &str) -> Option<(usize, Vec<&'a str>)> {
        match self.lines.get(self.pos) {
            Some((no, toks)) if toks[0] == key => {
                let out = (*no, toks[1..].to_vec());
                self.pos += 1;
                Some(out)
            }
            _ => None,
        }
    }

    fn finish(&self) -> Result<()> {
        match self.lines.get(self.pos) {
            Some((no, toks)) => {
                Err(Error::Parse(format!("line {no}: unexpected trailing line '{}'", toks[0])))
            }
            None => Ok(()),
        }
    }
}

fn ints(no: usize, toks: &[&str], want: usize) -> Result<Vec<i64>> {
    if toks.len() != want {
        return Err(Error::Parse(format!("line {no}: expected {want} integers, got {}", toks.len())));
    }
    toks.iter()
        .map(|t| {
            t.parse::<i64>()
                .map_err(|_| Error::Parse(format!("line {no}: bad integer '{t}'")))
        })
        .collect()
}

fn floats(no: usize, toks: &[&str], want: usize) -> Result<Vec<f64>> {
    if toks.len() != want {
        return Err(Error::Parse(format!("line {no}: expected {want} numbers, got {}", toks.len())));
    }
    toks.iter()
        .map(|t| {
            t.parse::<f64>()
                .map_err(|_| Error::Parse(format!("line {no}: bad number '{t}'")))
        })
        .collect()
}

fn one_usize(no: usize, toks: &[&str]) -> Result<usize> {
    if toks.len() != 1 {
        return Err(Error::Parse(format!("line {no}: expected one integer")));
    }
    toks[0]
        .parse::<usize>()
        .map_err(|_| Error::Parse(format!("line {no}: bad index '{}'", toks[0])))
}

fn join_i64(v: &[i64]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}

fn parse_dim_and_lattice(r: &mut Reader) -> Result<LatticeBasis> {
    let (no, toks) = r.expect("dim")?;
    let n = one_usize(no, &toks)?;
    if n == 0 {
        return Err(Error::Parse(format!("line {no}: dimension must be positive")));
    }
    let (no, toks) = r.expect("lattice")?;
    let nums = ints(no, &toks, n * n)?;
    LatticeBasis::new(nums.chunks(n).map(|c| c.to_vec()).collect())
}

fn parse_taps(r: &mut Reader, n: usize) -> Result<Vec<(Vec<i64>, Complex64)>> {
    let mut taps = Vec::new();
    while let Some((no, toks)) = r.take_if("tap") {
        if toks.len() != n + 2 {
            return Err(Error::Parse(format!(
                "line {no}: tap needs {n} coordinates and two values"
            )));
        }
        let pos = ints(no, &toks[..n], n)?;
        let val = floats(no, &toks[n..], 2)?;
        taps.push((pos, Complex64::new(val[0], val[1])));
    }
    Ok(taps)
}

fn serialize_taps(out: &mut String, f: &Filter) {
    for (k, v) in f.taps() {
        out.push_str(&format!("tap {} {} {}\n", join_i64(k), v.re, v.im));
    }
}

/// Parses a bank file.  Semantic failures (bad transversal, singular
/// lattice) surface as their own domain errors, not parse errors.
pub fn parse_bank(text: &str) -> Result<FilterBank> {
    let mut r = Reader::new(text);
    r.header(BANK_HEADER)?;
    let lattice = parse_dim_and_lattice(&mut r)?;
    let n = lattice.dim();
    let count = lattice.index();
    let mut reps = Vec::with_capacity(count);
    for _ in 0..count {
        let (no, toks) = r.expect("coset")?;
        reps.push(ints(no, &toks, n)?);
    }
    let cosets = CosetSystem::with_reps(lattice, reps)?;
    let mut filters: Vec<Option<Filter>> = vec![None; count];
    for _ in 0..count {
        let (no, toks) = r.expect("filter")?;
        let idx = one_usize(no, &toks)?;
        if idx >= count || filters[idx].is_some() {
            return Err(Error::Parse(format!("line {no}: filter index {idx} out of range or repeated")));
        }
        filters[idx] = Some(Filter::from_taps(n, parse_taps(&mut r, n)?)?);
    }
    r.finish()?;
    let filters = filters.into_iter().map(|f| f.expect("all slots filled")).collect();
    FilterBank::new(cosets, filters)
}

/// Serializes a bank file; inverse of [`parse_bank`].
pub fn serialize_bank(fb: &FilterBank) -> String {
    let mut out = format!("{BANK_HEADER} {FORMAT_VERSION}\n");
    out.push_str(&format!("dim {}\n", fb.dim()));
    let flat: Vec<i64> = fb.lattice().rows().iter().flatten().copied().collect();
    out.push_str(&format!("lattice {}\n", join_i64(&flat)));
    for rep in fb.cosets().reps() {
        out.push_str(&format!("coset {}\n", join_i64(rep)));
    }
    for (k, f) in fb.filters().iter().enumerate() {
        out.push_str(&format!("filter {k}\n"));
        serialize_taps(&mut out, f);
    }
    out
}

/// Parses a steps file into the lattice and the factorization it encodes.
pub fn parse_steps(text: &str) -> Result<(LatticeBasis, FactorizationResult)> {
    let mut r = Reader::new(text);
    r.header(STEPS_HEADER)?;
    let lattice = parse_dim_and_lattice(&mut r)?;
    let n = lattice.dim();
    let count = lattice.index();
    let (no, toks) = r.expect("translation")?;
    let translation = ints(no, &toks, n)?;
    let mut steps = Vec::new();
    let mut next_idx = 0usize;
    while let Some((no, toks)) = r.take_if("step") {
        let idx = one_usize(no, &toks)?;
        if idx != next_idx {
            return Err(Error::Parse(format!("line {no}: steps must be numbered in order, expected {next_idx}")));
        }
        next_idx += 1;
        let mut reps = Vec::with_capacity(count);
        for _ in 0..count {
            let (no, toks) = r.expect("dom")?;
            reps.push(ints(no, &toks, n)?);
        }
        let domain = CosetSystem::with_reps(lattice.clone(), reps)?;
        let mut unitary = Vec::with_capacity(count);
        for _ in 0..count {
            let (no, toks) = r.expect("row")?;
            let vals = floats(no, &toks, 2 * count)?;
            unitary.push(
                vals.chunks(2).map(|p| Complex64::new(p[0], p[1])).collect::<Vec<_>>(),
            );
        }
        steps.push(ElementaryStep::new(unitary, domain)?);
    }
    r.finish()?;
    Ok((lattice, FactorizationResult { translation, steps }))
}

/// Serializes a steps file; inverse of [`parse_steps`].
pub fn serialize_steps(lattice: &LatticeBasis, r: &FactorizationResult) -> String {
    let mut out = format!("{STEPS_HEADER} {FORMAT_VERSION}\n");
    out.push_str(&format!("dim {}\n", lattice.dim()));
    let flat: Vec<i64> = lattice.rows().iter().flatten().copied().collect();
    out.push_str(&format!("lattice {}\n", join_i64(&flat)));
    out.push_str(&format!("translation {}\n", join_i64(&r.translation)));
    for (i, step) in r.steps.iter().enumerate() {
        out.push_str(&format!("step {i}\n"));
        for rep in step.domain().reps() {
            out.push_str(&format!("dom {}\n", join_i64(rep)));
        }
        for row in step.unitary() {
            let cells: Vec<String> =
                row.iter().map(|c| format!("{} {}", c.re, c.im)).collect();
            out.push_str(&format!("row {}\n", cells.join(" ")));
        }
    }
    out
}

/// Parses a signal file.
pub fn parse_signal(text: &str) -> Result<Signal> {
    let mut r = Reader::new(text);
    r.header(SIGNAL_HEADER)?;
    let (no, toks) = r.expect("dim")?;
    let n = one_usize(no, &toks)?;
    if n == 0 {
        return Err(Error::Parse(format!("line {no}: dimension must be positive")));
    }
    let taps = parse_taps(&mut r, n)?;
    r.finish()?;
    Filter::from_taps(n, taps)
}

/// Serializes a signal file; inverse of [`parse_signal`].
pub fn serialize_signal(s: &Signal) -> String {
    let mut out = format!("{SIGNAL_HEADER} {FORMAT_VERSION}\n");
    out.push_str(&format!("dim {}\n", s.dim()));
    serialize_taps(&mut out, s);
    out
}

/// Parses a subbands file.  Tap positions are lattice coordinates.
pub fn parse_subbands(text: &str) -> Result<SubbandSet> {
    let mut r = Reader::new(text);
    r.header(SUBBANDS_HEADER)?;
    let lattice = parse_dim_and_lattice(&mut r)?;
    let n = lattice.dim();
    let count = lattice.index();
    let mut channels: Vec<Option<Filter>> = vec![None; count];
    for _ in 0..count {
        let (no, toks) = r.expect("channel")?;
        let idx = one_usize(no, &toks)?;
        if idx >= count || channels[idx].is_some() {
            return Err(Error::Parse(format!("line {no}: channel index {idx} out of range or repeated")));
        }
        channels[idx] = Some(Filter::from_taps(n, parse_taps(&mut r, n)?)?);
    }
    r.finish()?;
    let channels = channels.into_iter().map(|c| c.expect("all slots filled")).collect();
    SubbandSet::new(lattice, channels)
}

/// Serializes a subbands file; inverse of [`parse_subbands`].
pub fn serialize_subbands(bands: &SubbandSet) -> Result<String> {
    let mut out = format!("{SUBBANDS_HEADER} {FORMAT_VERSION}\n");
    out.push_str(&format!("dim {}\n", bands.lattice().dim()));
    let flat: Vec<i64> = bands.lattice().rows().iter().flatten().copied().collect();
    out.push_str(&format!("lattice {}\n", join_i64(&flat)));
    for (k, c) in bands.channels().iter().enumerate() {
        out.push_str(&format!("channel {k}\n"));
        serialize_taps(&mut out, c);
    }
    Ok(out)
}

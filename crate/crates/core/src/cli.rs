//! Command-line front end.
//!
//! Exit codes: 0 success, 1 usage or input error, 2 the rows are not a
//! basis modulo `p`, 3 stabilization timeout, 4 a verification failed.

use std::ffi::OsString;
use std::fs;
use std::io::{self, Cursor, Read, Write};
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::arith::Modulus;
use crate::error::{Error, Result};
use crate::finite::get_basis_finite;
use crate::lattice::{self, FiniteBooleanAlgebra, Idempotent, LatticeRingElement};
use crate::matrix::{IntMatrix, RowStream};
use crate::oracle::{det_exact, random_basis_mod_q_with, verify_lift, LiftedBasis, VerificationReport};
use crate::stream::fixtures::Fixture;
use crate::stream::{lift_stream_finite, EliminationState};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_NOT_A_BASIS: i32 = 2;
pub const EXIT_TIMEOUT: i32 = 3;
pub const EXIT_VERIFY_FAILED: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "basislift", version, about = "Lift bases modulo prime powers to bases of Z^n")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Lift the rows of a finite matrix.
    Lift(LiftArgs),
    /// Lift a prefix of a row-finite infinite matrix.
    LiftStream(LiftStreamArgs),
    /// Check a lift document produced by `lift` or `lift-stream`.
    Verify(VerifyArgs),
    /// Print a random basis modulo q.
    Generate(GenerateArgs),
    /// Orthogonal decomposition of an ideal of the lattice ring.
    DecomposeIdeal(DecomposeArgs),
    /// Free basis of the lattice ring of a finite boolean algebra.
    FreeBasis(FreeBasisArgs),
}

#[derive(Debug, Args)]
pub struct ModulusArgs {
    #[arg(long, value_parser = parse_bigint)]
    pub prime: BigInt,
    #[arg(long)]
    pub exponent: u32,
    /// Skip the primality check of --prime.
    #[arg(long)]
    pub trusted: bool,
}

impl ModulusArgs {
    fn modulus(&self) -> Result<Modulus> {
        if self.trusted {
            Modulus::new_trusted(self.prime.clone(), self.exponent)
        } else {
            Modulus::new(self.prime.clone(), self.exponent)
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum Format {
    #[default]
    Text,
    #[value(alias = "structured")]
    Json,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum Engine {
    #[default]
    Finite,
    Stream,
}

#[derive(Debug, Args)]
pub struct LiftArgs {
    #[command(flatten)]
    pub modulus: ModulusArgs,
    /// Dense matrix file, `-` for standard input.
    #[arg(long, default_value = "-")]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value_t)]
    pub engine: Engine,
    #[arg(long)]
    pub no_verify: bool,
    #[arg(long, value_enum, default_value_t)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct LiftStreamArgs {
    #[command(flatten)]
    pub modulus: ModulusArgs,
    /// Sparse stream file, `-` for standard input.
    #[arg(long, conflicts_with = "fixture")]
    pub input: Option<PathBuf>,
    /// Named stream: identity, banded:<c|q>, lower:<c|q>, blocks:<seed>, nopivot0.
    #[arg(long)]
    pub fixture: Option<String>,
    /// Number of stable rows to report.
    #[arg(long)]
    pub rows: usize,
    #[arg(long, default_value_t = 1000)]
    pub max_loops: usize,
    #[arg(long)]
    pub no_verify: bool,
    #[arg(long, value_enum, default_value_t)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Lift document (text or JSON), `-` for standard input.
    #[arg(long, default_value = "-")]
    pub input: PathBuf,
    /// Must agree with the modulus recorded in the document when given.
    #[arg(long, value_parser = parse_bigint, requires = "exponent")]
    pub prime: Option<BigInt>,
    #[arg(long, requires = "prime")]
    pub exponent: Option<u32>,
    #[arg(long, value_enum, default_value_t)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long)]
    pub n: usize,
    #[command(flatten)]
    pub modulus: ModulusArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Number of random row operations; defaults to 3n.
    #[arg(long)]
    pub ops: Option<usize>,
    /// Entries are shifted by q times a value in [-k, k].
    #[arg(long, default_value_t = 2)]
    pub perturbation: i64,
}

#[derive(Debug, Args)]
pub struct DecomposeArgs {
    /// One generator per line as whitespace separated atom coordinates.
    #[arg(long, default_value = "-")]
    pub input: PathBuf,
    /// Atom count; inferred from the first generator when omitted.
    #[arg(long)]
    pub atoms: Option<usize>,
    #[arg(long, value_enum, default_value_t)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct FreeBasisArgs {
    #[arg(long)]
    pub atoms: usize,
    /// Explicit order: idempotents separated by spaces, atoms by commas,
    /// e.g. "0,1 0 1".
    #[arg(long, conflicts_with = "seed")]
    pub order: Option<String>,
    /// Shuffle the nonzero idempotents with this seed.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_enum, default_value_t)]
    pub format: Format,
}

fn parse_bigint(s: &str) -> std::result::Result<BigInt, String> {
    BigInt::from_str(s).map_err(|e| format!("{s:?}: {e}"))
}

/// Failure of a command, carrying its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::NotABasisModP { .. } => EXIT_NOT_A_BASIS,
            Error::StabilizationTimeout(_) => EXIT_TIMEOUT,
            _ => EXIT_USAGE,
        };
        Failure { code, message: e.to_string() }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Error::from(e).into()
    }
}

type CmdResult = std::result::Result<i32, Failure>;

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, stdin: &mut dyn Read, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(stderr, "{e}");
                return EXIT_USAGE;
            }
            let _ = write!(stdout, "{e}");
            return EXIT_OK;
        }
    };
    match execute(cli.command, stdin, stdout) {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(stderr, "error: {}", f.message);
            f.code
        }
    }
}

fn execute(command: Command, stdin: &mut dyn Read, out: &mut dyn Write) -> CmdResult {
    match command {
        Command::Lift(a) => lift(a, stdin, out),
        Command::LiftStream(a) => lift_stream(a, stdin, out),
        Command::Verify(a) => verify(a, stdin, out),
        Command::Generate(a) => generate(a, out),
        Command::DecomposeIdeal(a) => decompose(a, stdin, out),
        Command::FreeBasis(a) => free_basis(a, out),
    }
}

fn read_input(path: &PathBuf, stdin: &mut dyn Read) -> Result<String> {
    let mut text = String::new();
    if path.as_os_str() == "-" {
        stdin.read_to_string(&mut text)?;
    } else {
        text = fs::read_to_string(path)?;
    }
    Ok(text)
}

fn lift(a: LiftArgs, stdin: &mut dyn Read, out: &mut dyn Write) -> CmdResult {
    let modulus = a.modulus.modulus()?;
    let input = IntMatrix::parse_text(&read_input(&a.input, stdin)?)?;
    let mut doc = match a.engine {
        Engine::Finite => {
            let res = get_basis_finite(&input, &modulus)?;
            LiftDocument::new("finite", &input, &res)
        }
        Engine::Stream => {
            let report = lift_stream_finite(&input, &modulus)?;
            let mut doc = LiftDocument::new("stream", &input, &report);
            doc.loops_executed = Some(report.loops_executed);
            doc.stabilized_at = Some(report.stabilized_at.clone());
            doc
        }
    };
    finish_lift(&mut doc, &input, !a.no_verify, a.format, out)
}

fn finish_lift(doc: &mut LiftDocument, input: &IntMatrix, verify: bool, format: Format, out: &mut dyn Write) -> CmdResult {
    let mut code = EXIT_OK;
    if verify {
        let report = verify_lift(input, &*doc)?;
        if !report.all_ok() {
            code = EXIT_VERIFY_FAILED;
        }
        doc.verification = Some(report);
    }
    match format {
        Format::Text => out.write_all(doc.to_text().as_bytes())?,
        Format::Json => writeln!(out, "{}", doc.to_json())?,
    }
    Ok(code)
}

fn lift_stream(a: LiftStreamArgs, stdin: &mut dyn Read, out: &mut dyn Write) -> CmdResult {
    let modulus = a.modulus.modulus()?;
    let source = match (&a.input, &a.fixture) {
        (_, Some(name)) => name.parse::<Fixture>()?.stream(&modulus),
        (Some(path), None) => RowStream::from_reader(Cursor::new(read_input(path, stdin)?)),
        (None, None) => RowStream::from_reader(Cursor::new(read_input(&PathBuf::from("-"), stdin)?)),
    };
    let mut state = EliminationState::new(source, modulus)?;
    let report = state.run_until(a.rows, a.max_loops)?;
    let input = report.input.clone();
    let mut doc = LiftDocument::new("stream", &input, &report);
    doc.loops_executed = Some(report.loops_executed);
    doc.stabilized_at = Some(report.stabilized_at.clone());
    finish_lift(&mut doc, &input, !a.no_verify, a.format, out)
}

fn verify(a: VerifyArgs, stdin: &mut dyn Read, out: &mut dyn Write) -> CmdResult {
    let doc = LiftDocument::parse(&read_input(&a.input, stdin)?)?;
    if let (Some(p), Some(nu)) = (&a.prime, a.exponent) {
        if p != doc.modulus.prime() || nu != doc.modulus.exponent() {
            return Err(Failure {
                code: EXIT_USAGE,
                message: format!("document modulus {} differs from {p}^{nu}", doc.modulus),
            });
        }
    }
    let report = verify_lift(&doc.input, &doc)?;
    match a.format {
        Format::Text => out.write_all(report_text(&report).as_bytes())?,
        Format::Json => writeln!(out, "{}", serde_json::to_string_pretty(&ReportJson::from(&report)).expect("serializable"))?,
    }
    Ok(if report.all_ok() { EXIT_OK } else { EXIT_VERIFY_FAILED })
}

fn generate(a: GenerateArgs, out: &mut dyn Write) -> CmdResult {
    let modulus = a.modulus.modulus()?;
    let m = random_basis_mod_q_with(a.n, &modulus, a.seed, a.ops.unwrap_or(3 * a.n), a.perturbation);
    write!(out, "{m}")?;
    Ok(EXIT_OK)
}

fn decompose(a: DecomposeArgs, stdin: &mut dyn Read, out: &mut dyn Write) -> CmdResult {
    let text = read_input(&a.input, stdin)?;
    let mut gens = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let coords = line
            .split_whitespace()
            .map(|t| BigInt::from_str(t).map_err(|_| Error::parse(i + 1, format!("bad integer {t:?}"))))
            .collect::<Result<Vec<_>>>()?;
        gens.push(LatticeRingElement::new(coords));
    }
    let k = a.atoms.or_else(|| gens.first().map(LatticeRingElement::len)).unwrap_or(0);
    let alg = FiniteBooleanAlgebra::new(k)?;
    let d = lattice::decompose_ideal(alg, &gens)?;
    let generator = d.generator(k);
    match a.format {
        Format::Text => {
            for (f, m) in &d.pairs {
                writeln!(out, "{f} {m}")?;
            }
            writeln!(out, "generator {generator}")?;
        }
        Format::Json => {
            let doc = serde_json::json!({
                "atoms": k,
                "pairs": d.pairs.iter().map(|(f, m)| serde_json::json!({
                    "idempotent": f.atoms().collect::<Vec<_>>(),
                    "multiplicity": m.to_string(),
                })).collect::<Vec<_>>(),
                "generator": strings(&generator.coords),
            });
            writeln!(out, "{}", serde_json::to_string_pretty(&doc).expect("serializable"))?;
        }
    }
    Ok(EXIT_OK)
}

fn free_basis(a: FreeBasisArgs, out: &mut dyn Write) -> CmdResult {
    let alg = FiniteBooleanAlgebra::new(a.atoms)?;
    if a.atoms > lattice::MAX_FREE_BASIS_ATOMS {
        return Err(Error::TooManyAtoms { atoms: a.atoms, max: lattice::MAX_FREE_BASIS_ATOMS }.into());
    }
    let order: Vec<Idempotent> = match (&a.order, a.seed) {
        (Some(spec), _) => parse_order(spec)?,
        (None, Some(seed)) => {
            let mut order: Vec<Idempotent> = alg.nonzero_elements().collect();
            order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
            order
        }
        (None, None) => alg.nonzero_elements().collect(),
    };
    let basis = lattice::free_basis(alg, &order)?;
    let det = det_exact(&lattice::coordinate_matrix(&basis, a.atoms))?;
    match a.format {
        Format::Text => {
            for e in &basis {
                writeln!(out, "{e}")?;
            }
            writeln!(out, "det {det}")?;
        }
        Format::Json => {
            let doc = serde_json::json!({
                "atoms": a.atoms,
                "basis": basis.iter().map(|e| e.atoms().collect::<Vec<_>>()).collect::<Vec<_>>(),
                "det": det.to_string(),
            });
            writeln!(out, "{}", serde_json::to_string_pretty(&doc).expect("serializable"))?;
        }
    }
    Ok(EXIT_OK)
}

fn parse_order(spec: &str) -> Result<Vec<Idempotent>> {
    spec.split_whitespace()
        .map(|group| {
            group
                .split(',')
                .map(|a| match a.parse::<usize>() {
                    Ok(v) if v < lattice::MAX_ATOMS => Ok(v),
                    _ => Err(Error::InvalidOrder(format!("bad atom {a:?}"))),
                })
                .collect::<Result<Vec<_>>>()
                .map(Idempotent::from_atoms)
        })
        .collect()
}

fn strings(values: &[BigInt]) -> Vec<String> {
    values.iter().map(ToString::to_string).collect()
}

/// Everything `verify` needs to re-check a lift, plus run metadata.
#[derive(Clone, Debug)]
pub struct LiftDocument {
    pub engine: String,
    pub modulus: Modulus,
    pub input: IntMatrix,
    pub lifted: IntMatrix,
    pub units: Vec<BigInt>,
    pub pivots: Vec<usize>,
    pub loops_executed: Option<usize>,
    pub stabilized_at: Option<Vec<Option<usize>>>,
    pub verification: Option<VerificationReport>,
}

impl LiftedBasis for LiftDocument {
    fn lifted(&self) -> &IntMatrix {
        &self.lifted
    }
    fn units(&self) -> &[BigInt] {
        &self.units
    }
    fn modulus(&self) -> &Modulus {
        &self.modulus
    }
}

#[derive(Serialize, Deserialize)]
struct MatrixJson {
    rows: usize,
    cols: usize,
    entries: Vec<Vec<String>>,
}

impl MatrixJson {
    fn from_matrix(m: &IntMatrix) -> Self {
        MatrixJson { rows: m.rows(), cols: m.cols(), entries: m.iter_rows().map(strings).collect() }
    }

    fn to_matrix(&self) -> Result<IntMatrix> {
        let rows = self
            .entries
            .iter()
            .map(|r| r.iter().map(|x| json_int(x)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        let m = if rows.is_empty() { IntMatrix::zeros(0, self.cols) } else { IntMatrix::from_rows(rows)? };
        if m.rows() != self.rows || m.cols() != self.cols {
            return Err(Error::ShapeMismatch(format!("declared {}x{}, found {}x{}", self.rows, self.cols, m.rows(), m.cols())));
        }
        Ok(m)
    }
}

fn json_int(s: &str) -> Result<BigInt> {
    BigInt::from_str(s).map_err(|_| Error::parse(1, format!("bad integer {s:?}")))
}

#[derive(Serialize, Deserialize)]
struct ModulusJson {
    p: String,
    nu: u32,
    q: String,
}

#[derive(Serialize, Deserialize)]
struct ReportJson {
    all_ok: bool,
    units_ok: bool,
    congruence_ok: Vec<bool>,
    unimodular_ok: bool,
    basis_mod_q_ok: bool,
    details: Vec<String>,
}

impl From<&VerificationReport> for ReportJson {
    fn from(r: &VerificationReport) -> Self {
        ReportJson {
            all_ok: r.all_ok(),
            units_ok: r.units_ok,
            congruence_ok: r.congruence_ok.clone(),
            unimodular_ok: r.unimodular_ok,
            basis_mod_q_ok: r.basis_mod_q_ok,
            details: r.details.clone(),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct DocumentJson {
    format: String,
    engine: String,
    modulus: ModulusJson,
    input: MatrixJson,
    lifted: MatrixJson,
    units: Vec<String>,
    pivots: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    loops_executed: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    stabilized_at: Option<Vec<Option<usize>>>,
    #[serde(default)]
    verification: Option<ReportJson>,
}

pub const DOCUMENT_FORMAT: &str = "basislift-lift/1";

impl LiftDocument {
    pub fn new(engine: &str, input: &IntMatrix, lift: &(impl LiftedBasis + HasPivots)) -> Self {
        LiftDocument {
            engine: engine.to_string(),
            modulus: lift.modulus().clone(),
            input: input.clone(),
            lifted: lift.lifted().clone(),
            units: lift.units().to_vec(),
            pivots: lift.pivot_columns(),
            loops_executed: None,
            stabilized_at: None,
            verification: None,
        }
    }

    pub fn to_json(&self) -> String {
        let doc = DocumentJson {
            format: DOCUMENT_FORMAT.to_string(),
            engine: self.engine.clone(),
            modulus: ModulusJson {
                p: self.modulus.prime().to_string(),
                nu: self.modulus.exponent(),
                q: self.modulus.value().to_string(),
            },
            input: MatrixJson::from_matrix(&self.input),
            lifted: MatrixJson::from_matrix(&self.lifted),
            units: strings(&self.units),
            pivots: self.pivots.clone(),
            loops_executed: self.loops_executed,
            stabilized_at: self.stabilized_at.clone(),
            verification: self.verification.as_ref().map(ReportJson::from),
        };
        serde_json::to_string_pretty(&doc).expect("serializable")
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        s.push_str(&format!("engine {}\n", self.engine));
        s.push_str(&format!("modulus {}^{}\n", self.modulus.prime(), self.modulus.exponent()));
        s.push_str(&format!("input\n{}", self.input));
        s.push_str(&format!("lifted\n{}", self.lifted));
        s.push_str(&format!("units {}\n", strings(&self.units).join(" ")));
        let pivots: Vec<String> = self.pivots.iter().map(ToString::to_string).collect();
        s.push_str(&format!("pivots {}\n", pivots.join(" ")));
        if let Some(loops) = self.loops_executed {
            s.push_str(&format!("loops {loops}\n"));
        }
        if let Some(st) = &self.stabilized_at {
            let st: Vec<String> = st.iter().map(|x| x.map_or("-".to_string(), |v| v.to_string())).collect();
            s.push_str(&format!("stabilized_at {}\n", st.join(" ")));
        }
        if let Some(report) = &self.verification {
            s.push_str(&report_text(report));
        }
        s
    }

    /// Reads either the text or the JSON form.
    pub fn parse(text: &str) -> Result<Self> {
        if text.trim_start().starts_with('{') {
            Self::parse_json(text)
        } else {
            Self::parse_text(text)
        }
    }

    fn parse_json(text: &str) -> Result<Self> {
        let doc: DocumentJson =
            serde_json::from_str(text).map_err(|e| Error::parse(e.line(), e.to_string()))?;
        if doc.format != DOCUMENT_FORMAT {
            return Err(Error::parse(1, format!("unsupported document format {:?}", doc.format)));
        }
        let modulus = Modulus::new_trusted(json_int(&doc.modulus.p)?, doc.modulus.nu)?;
        if modulus.value().to_string() != doc.modulus.q {
            return Err(Error::parse(1, "q does not equal p^nu"));
        }
        Ok(LiftDocument {
            engine: doc.engine,
            modulus,
            input: doc.input.to_matrix()?,
            lifted: doc.lifted.to_matrix()?,
            units: doc.units.iter().map(|u| json_int(u)).collect::<Result<_>>()?,
            pivots: doc.pivots,
            loops_executed: doc.loops_executed,
            stabilized_at: doc.stabilized_at,
            verification: None,
        })
    }

    fn parse_text(text: &str) -> Result<Self> {
        let lines: Vec<&str> = text.lines().collect();
        let mut engine = String::from("finite");
        let mut modulus = None;
        let mut input = None;
        let mut lifted = None;
        let mut units = None;
        let mut pivots = Vec::new();
        let mut loops_executed = None;
        let mut i = 0;
        while i < lines.len() {
            let line_no = i + 1;
            let line = lines[i].trim();
            i += 1;
            let (key, rest) = line.split_once(' ').unwrap_or((line, ""));
            match key {
                "" | "#" => {}
                _ if key.starts_with('#') => {}
                "engine" => engine = rest.trim().to_string(),
                "modulus" => {
                    let (p, nu) = rest
                        .trim()
                        .split_once('^')
                        .ok_or_else(|| Error::parse(line_no, "modulus must be p^nu"))?;
                    let p = BigInt::from_str(p).map_err(|_| Error::parse(line_no, "bad prime"))?;
                    let nu = nu.parse().map_err(|_| Error::parse(line_no, "bad exponent"))?;
                    modulus = Some(Modulus::new_trusted(p, nu)?);
                }
                "input" | "lifted" => {
                    let header = lines.get(i).ok_or_else(|| Error::parse(line_no, "missing matrix"))?;
                    let rows: usize = header
                        .split_whitespace()
                        .next()
                        .and_then(|r| r.parse().ok())
                        .ok_or_else(|| Error::parse(i + 1, "bad matrix header"))?;
                    let block = lines[i..(i + 1 + rows).min(lines.len())].join("\n");
                    let m = IntMatrix::parse_text(&block).map_err(|e| match e {
                        Error::Parse { line, message } => Error::parse(i + line, message),
                        other => other,
                    })?;
                    i += 1 + rows;
                    if key == "input" {
                        input = Some(m);
                    } else {
                        lifted = Some(m);
                    }
                }
                "units" => {
                    units = Some(
                        rest.split_whitespace()
                            .map(|t| BigInt::from_str(t).map_err(|_| Error::parse(line_no, format!("bad unit {t:?}"))))
                            .collect::<Result<Vec<_>>>()?,
                    );
                }
                "pivots" => {
                    pivots = rest
                        .split_whitespace()
                        .map(|t| t.parse().map_err(|_| Error::parse(line_no, format!("bad pivot {t:?}"))))
                        .collect::<Result<Vec<_>>>()?;
                }
                "loops" => loops_executed = rest.trim().parse().ok(),
                // the report and run metadata are recomputed, not read back
                "stabilized_at" | "verification" | "units_ok" | "congruence_ok" | "unimodular_ok"
                | "basis_mod_q_ok" | "detail" => {}
                _ => return Err(Error::parse(line_no, format!("unexpected line {line:?}"))),
            }
        }
        let missing = |what: &str| Error::parse(lines.len().max(1), format!("document has no {what}"));
        Ok(LiftDocument {
            engine,
            modulus: modulus.ok_or_else(|| missing("modulus"))?,
            input: input.ok_or_else(|| missing("input"))?,
            lifted: lifted.ok_or_else(|| missing("lifted matrix"))?,
            units: units.ok_or_else(|| missing("units"))?,
            pivots,
            loops_executed,
            stabilized_at: None,
            verification: None,
        })
    }
}

/// Pivot columns of a lift, in row order.
pub trait HasPivots {
    fn pivot_columns(&self) -> Vec<usize>;
}

impl HasPivots for crate::finite::LiftResult {
    fn pivot_columns(&self) -> Vec<usize> {
        self.pivots.columns().to_vec()
    }
}

impl HasPivots for crate::stream::StreamLiftReport {
    fn pivot_columns(&self) -> Vec<usize> {
        self.pivots.columns().to_vec()
    }
}

fn report_text(r: &VerificationReport) -> String {
    let flag = |b: bool| if b { "true" } else { "false" };
    let mut s = format!("verification {}\n", if r.all_ok() { "ok" } else { "FAILED" });
    s.push_str(&format!("units_ok {}\n", flag(r.units_ok)));
    let cong: Vec<&str> = r.congruence_ok.iter().map(|&b| flag(b)).collect();
    s.push_str(&format!("congruence_ok {}\n", cong.join(" ")));
    s.push_str(&format!("unimodular_ok {}\n", flag(r.unimodular_ok)));
    s.push_str(&format!("basis_mod_q_ok {}\n", flag(r.basis_mod_q_ok)));
    for d in &r.details {
        s.push_str(&format!("detail {d}\n"));
    }
    s
}

/// Entry point used by the binary.
pub fn main_with_stdio() -> i32 {
    let stdin = io::stdin();
    let mut lock = stdin.lock();
    let stdout = io::stdout();
    let mut out = io::BufWriter::new(stdout.lock());
    let code = run(std::env::args_os(), &mut lock, &mut out, &mut io::stderr());
    let _ = out.flush();
    code
}

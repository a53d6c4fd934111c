//! Subcommands, their dispatch, and report assembly.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use colorgns::catalog;
use colorgns::color_lie::{check_axioms, check_perfectness, glv, ColorLieAlgebra};
use colorgns::gns::{
    check_cyclic, check_positive_definite, default_group_samples, gns_construct, gns_roundtrip, GnsOptions,
    PdFunction, Recording, RepFunction, SampleSet,
};
use colorgns::graded_linear::GradedSpace;
use colorgns::grading::{verify_alpha_cocycle, verify_lifting_relation, Character, Degree};
use colorgns::hc_rep::{check_pre_rep, check_unitary_rep, stability_extend, twist_rep, UnitaryRep};
use colorgns::report::Report;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::config::{ConfigFile, Format, Overrides, SessionConfig, CONFIG_ENV};
use crate::docs::{self, Document, RepDoc, REPORT_SCHEMA};
use crate::CliError;

const ALGEBRA_TOL: f64 = 1e-10;
const REP_TOL: f64 = 1e-9;
const EXTEND_TOL: f64 = 1e-8;
const PD_TOL: f64 = 1e-8;
const GNS_CHECK_TOL: f64 = 1e-6;
const PD_LEVEL: usize = 2;

#[derive(Parser, Debug, Clone)]
#[command(
    name = "colorgns",
    version,
    about = "Checkers and constructions for Z2^n-graded color Lie algebras and their unitary representations"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone, Default, PartialEq)]
pub struct GlobalArgs {
    /// TOML session config file.
    #[arg(long, global = true, env = CONFIG_ENV)]
    pub config: Option<PathBuf>,
    /// Rank n of the grading group Z2^n.
    #[arg(long = "n", visible_alias = "rank", global = true)]
    pub rank: Option<u8>,
    /// Tolerance for the command's checks (overrides the config file).
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Highest PBW level the GNS construction may sample.
    #[arg(long, global = true)]
    pub level_cap: Option<usize>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Load algebras without checking their axioms.
    #[arg(long, global = true)]
    pub skip_validate: bool,
}

impl GlobalArgs {
    fn overrides(&self) -> Overrides {
        Overrides {
            rank: self.rank,
            tol: self.tol,
            level_cap: self.level_cap,
            seed: self.seed,
            format: self.format,
            skip_validate: self.skip_validate,
        }
    }

    /// Values set here win; the rest come from `parent`.
    fn over(&self, parent: &GlobalArgs) -> GlobalArgs {
        GlobalArgs {
            config: self.config.clone().or_else(|| parent.config.clone()),
            rank: self.rank.or(parent.rank),
            tol: self.tol.or(parent.tol),
            level_cap: self.level_cap.or(parent.level_cap),
            seed: self.seed.or(parent.seed),
            format: self.format.or(parent.format),
            skip_validate: self.skip_validate || parent.skip_validate,
        }
    }

    pub fn session(&self) -> Result<SessionConfig, CliError> {
        let file = match &self.config {
            Some(p) => ConfigFile::load(p)?,
            None => ConfigFile::default(),
        };
        SessionConfig::resolve(file, &self.overrides())
    }
}

#[derive(Subcommand, Debug, Clone)]
pub enum Command {
    /// Exhaustive check of the alpha cocycle and the lifting relation at rank n.
    CheckGrading {
        /// Character mask twisting alpha, as 0/1 digits (e.g. 101).
        #[arg(long)]
        twist: Option<String>,
    },
    /// Check the axioms of an algebra file.
    CheckAlgebra { file: PathBuf },
    /// Check the perfectness hypothesis of the stability extension.
    CheckPerfect { file: PathBuf },
    /// Check a unitary representation file.
    CheckRep { file: PathBuf },
    /// Check a pre-representation file (null rho on unsupplied sectors).
    CheckPrerep { file: PathBuf },
    /// Extend a pre-representation to a unitary representation.
    StabilityExtend {
        file: PathBuf,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Positive-definiteness test of a matrix coefficient or a value table.
    CheckPd {
        file: PathBuf,
        /// PBW level of the sample set.
        #[arg(long, default_value_t = PD_LEVEL)]
        level: usize,
    },
    /// Reconstruct a cyclic representation from a matrix coefficient or table.
    GnsConstruct {
        file: PathBuf,
        #[arg(short, long)]
        out: Option<PathBuf>,
        /// Also tabulate every value the construction used (representation input only).
        #[arg(long)]
        export_table: Option<PathBuf>,
    },
    /// Reconstruct from the cyclic vector's matrix coefficient and certify equivalence.
    GnsRoundtrip { file: PathBuf },
    /// Twist a representation by a character and compare checker verdicts.
    TwistRep {
        file: PathBuf,
        /// Character mask as 0/1 digits.
        #[arg(long)]
        mask: String,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Write a named example file.
    Generate {
        #[arg(value_enum)]
        name: ExampleName,
        /// Component dimensions in lexicographic degree order (glV only).
        #[arg(long, value_delimiter = ',')]
        dims: Vec<usize>,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Run the tasks of a TOML batch file, concurrently, reporting in order.
    Batch { file: PathBuf },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::CheckGrading { .. } => "check-grading",
            Command::CheckAlgebra { .. } => "check-algebra",
            Command::CheckPerfect { .. } => "check-perfect",
            Command::CheckRep { .. } => "check-rep",
            Command::CheckPrerep { .. } => "check-prerep",
            Command::StabilityExtend { .. } => "stability-extend",
            Command::CheckPd { .. } => "check-pd",
            Command::GnsConstruct { .. } => "gns-construct",
            Command::GnsRoundtrip { .. } => "gns-roundtrip",
            Command::TwistRep { .. } => "twist-rep",
            Command::Generate { .. } => "generate",
            Command::Batch { .. } => "batch",
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExampleName {
    #[value(name = "glV")]
    GlV,
    CounterexampleN2,
    CliffordN1,
    RandomRep,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Pass,
    Fail,
    InputError,
}

#[derive(Clone, Debug, Serialize)]
pub struct Outcome {
    pub schema: &'static str,
    pub command: String,
    pub status: Status,
    pub exit_code: i32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub reports: Vec<Report>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub outputs: Vec<String>,
    #[serde(skip_serializing_if = "Value::is_null")]
    pub details: Value,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub tasks: Vec<Outcome>,
}

impl Outcome {
    fn new(command: &str) -> Self {
        Outcome {
            schema: REPORT_SCHEMA,
            command: command.into(),
            status: Status::Pass,
            exit_code: 0,
            error: None,
            reports: Vec::new(),
            outputs: Vec::new(),
            details: Value::Null,
            tasks: Vec::new(),
        }
    }

    fn push(&mut self, r: Report) {
        self.reports.push(r);
    }

    fn finish(mut self, result: Result<(), CliError>) -> Self {
        match result {
            Ok(()) => {
                let ok = self.reports.iter().all(|r| r.passed) && self.tasks.iter().all(|t| t.exit_code == 0);
                if !ok {
                    self.status = Status::Fail;
                    self.exit_code = self.tasks.iter().map(|t| t.exit_code).max().unwrap_or(1).max(1);
                }
            }
            Err(e) => {
                self.exit_code = e.exit_code();
                self.status = if e.exit_code() == 2 {
                    Status::InputError
                } else {
                    Status::Fail
                };
                self.error = Some(e.to_string());
            }
        }
        self
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => docs::to_json(self),
            Format::Text => {
                let mut s = String::new();
                self.render_text(&mut s);
                s
            }
        }
    }

    fn render_text(&self, s: &mut String) {
        for t in &self.tasks {
            t.render_text(s);
        }
        for r in &self.reports {
            let _ = write!(s, "{r}");
            if !s.ends_with('\n') {
                s.push('\n');
            }
        }
        if !self.details.is_null() {
            let _ = writeln!(s, "details: {}", self.details);
        }
        for o in &self.outputs {
            let _ = writeln!(s, "wrote {o}");
        }
        if let Some(e) = &self.error {
            let _ = writeln!(s, "error: {e}");
        }
        let status = match self.status {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::InputError => "INPUT ERROR",
        };
        let _ = writeln!(s, "{}: {status} (exit {})", self.command, self.exit_code);
    }
}

/// Parses the global flags' session and runs the command.
pub fn run_cli(cli: &Cli) -> (Outcome, Format) {
    match cli.global.session() {
        Ok(cfg) => {
            let format = cfg.format;
            (run_task(&cfg, &cli.global, &cli.command), format)
        }
        Err(e) => (
            Outcome::new(cli.command.name()).finish(Err(e)),
            cli.global.format.unwrap_or_default(),
        ),
    }
}

pub fn run_task(cfg: &SessionConfig, global: &GlobalArgs, cmd: &Command) -> Outcome {
    let mut out = Outcome::new(cmd.name());
    let result = dispatch(cfg, global, cmd, &mut out);
    out.finish(result)
}

fn failed(e: colorgns::Error) -> CliError {
    CliError::Failed(e.to_string())
}

fn input(msg: impl Into<String>) -> CliError {
    CliError::Input(msg.into())
}

fn parse_mask(s: &str, rank: u8, flag: &str) -> Result<Character, CliError> {
    let bits: Vec<u8> = s
        .chars()
        .filter(|c| *c != ',')
        .map(|c| match c {
            '0' => Ok(0),
            '1' => Ok(1),
            other => Err(input(format!("{flag}: '{other}' is not a 0/1 digit"))),
        })
        .collect::<Result<_, _>>()?;
    if bits.len() != rank as usize {
        return Err(input(format!("{flag} has {} digits, rank is {rank}", bits.len())));
    }
    Ok(Character::from_mask(Degree::from_bits(&bits).map_err(|e| input(format!("{flag}: {e}")))?))
}

fn check_session_rank(cfg: &SessionConfig, rank: u8) -> Result<(), CliError> {
    match cfg.rank {
        Some(n) if n != rank => Err(input(format!("file has rank {rank}, session rank n is {n}"))),
        _ => Ok(()),
    }
}

fn axiom_failure(r: &Report) -> String {
    let mut parts = Vec::new();
    for c in r.failures() {
        let mut m = format!("{} (residual {:e} > {:e})", c.name, c.residual, c.tolerance);
        if let Some(d) = &c.detail {
            m.push_str(&format!(" at {d}"));
        }
        parts.push(m);
    }
    format!("axiom failure: {}", parts.join("; "))
}

/// Reads a document and builds its algebra, checking the axioms unless
/// validation is skipped.
fn load(cfg: &SessionConfig, path: &Path, validate: bool) -> Result<(Document, ColorLieAlgebra), CliError> {
    let doc = docs::read_document(path)?;
    let a = doc.algebra();
    check_session_rank(cfg, a.rank)?;
    let l = docs::algebra_from(a)?;
    if validate && !cfg.skip_validate {
        let r = check_axioms(&l, cfg.tol_for("load", ALGEBRA_TOL));
        if !r.passed {
            return Err(input(format!("{}: {}", path.display(), axiom_failure(&r))));
        }
    }
    Ok((doc, l))
}

fn rep_doc_of(doc: Document, path: &Path) -> Result<Box<RepDoc>, CliError> {
    match doc {
        Document::Rep(r) => Ok(r),
        _ => Err(input(format!("{}: expected a {} document", path.display(), docs::REP_SCHEMA))),
    }
}

fn load_rep(cfg: &SessionConfig, path: &Path) -> Result<(UnitaryRep, Option<colorgns::linalg::CVec>), CliError> {
    let (doc, _) = load(cfg, path, true)?;
    docs::unitary_rep_from(&*rep_doc_of(doc, path)?).map_err(|e| match e {
        CliError::Input(m) => input(format!("{}: {m}", path.display())),
        other => other,
    })
}

fn load_function(cfg: &SessionConfig, path: &Path) -> Result<Box<dyn PdFunction>, CliError> {
    let (doc, _) = load(cfg, path, true)?;
    match doc {
        Document::Rep(d) => {
            let (r, v) = docs::unitary_rep_from(&d)?;
            let v = v.ok_or_else(|| input(format!("{}: representation has no cyclic_vector", path.display())))?;
            Ok(Box::new(RepFunction::diagonal(r, v)))
        }
        Document::Table(t) => Ok(Box::new(docs::table_from(&t)?)),
        Document::Algebra(_) => Err(input(format!(
            "{}: expected a representation with cyclic_vector or a value table",
            path.display()
        ))),
    }
}

fn write_out<T: Serialize>(out: &mut Outcome, path: &Path, doc: &T) -> Result<(), CliError> {
    docs::write_json(path, doc)?;
    out.outputs.push(path.display().to_string());
    Ok(())
}

fn gns_options(cfg: &SessionConfig, command: &str) -> GnsOptions {
    GnsOptions {
        level_cap: cfg.level_cap,
        check_tol: cfg.tol_for(command, GNS_CHECK_TOL),
        ..GnsOptions::default()
    }
}

fn dispatch(cfg: &SessionConfig, global: &GlobalArgs, cmd: &Command, out: &mut Outcome) -> Result<(), CliError> {
    let name = cmd.name();
    match cmd {
        Command::CheckGrading { twist } => {
            let n = cfg.require_rank()?;
            let chi = twist.as_deref().map(|t| parse_mask(t, n, "--twist")).transpose()?;
            let a = verify_alpha_cocycle(n, chi.as_ref()).map_err(|e| input(e.to_string()))?;
            out.push(a.to_report("verify_alpha_cocycle"));
            let b = verify_lifting_relation(n).map_err(|e| input(e.to_string()))?;
            out.push(b.to_report("verify_lifting_relation"));
        }
        Command::CheckAlgebra { file } => {
            let (_, l) = load(cfg, file, false)?;
            out.push(check_axioms(&l, cfg.tol_for(name, ALGEBRA_TOL)));
        }
        Command::CheckPerfect { file } => {
            let (_, l) = load(cfg, file, true)?;
            let p = check_perfectness(&l);
            out.details = json!({ "sectors": p.sectors });
            out.push(p.report);
        }
        Command::CheckRep { file } => {
            let (r, v) = load_rep(cfg, file)?;
            let tol = cfg.tol_for(name, REP_TOL);
            out.push(check_unitary_rep(&r, tol));
            if let Some(v) = v {
                out.push(check_cyclic(&r, &v, tol));
            }
        }
        Command::CheckPrerep { file } => {
            let (doc, _) = load(cfg, file, true)?;
            let p = docs::partial_rep_from(&*rep_doc_of(doc, file)?)?;
            out.push(check_pre_rep(&p, cfg.tol_for(name, REP_TOL)));
        }
        Command::StabilityExtend { file, out: dest } => {
            let (doc, _) = load(cfg, file, true)?;
            let p = docs::partial_rep_from(&*rep_doc_of(doc, file)?)?;
            let tol = cfg.tol_for(name, EXTEND_TOL);
            let (rep, ext) = stability_extend(&p, tol).map_err(failed)?;
            out.details = json!({ "records": ext.records });
            out.push(ext.report);
            if let Some(dest) = dest {
                write_out(out, dest, &docs::rep_doc(&rep, None))?;
            }
        }
        Command::CheckPd { file, level } => {
            let psi = load_function(cfg, file)?;
            let groups = default_group_samples(psi.pair());
            let samples = SampleSet::generate(psi.pair(), &groups, *level);
            out.push(check_positive_definite(psi.as_ref(), &samples, cfg.tol_for(name, PD_TOL)));
        }
        Command::GnsConstruct {
            file,
            out: dest,
            export_table,
        } => {
            let psi = load_function(cfg, file)?;
            let opts = gns_options(cfg, name);
            let res = match export_table {
                None => gns_construct(psi.as_ref(), &opts).map_err(failed)?,
                Some(table) => {
                    let rec = Recording::new(psi.as_ref());
                    let res = gns_construct(&rec, &opts).map_err(failed)?;
                    // Also tabulate the default check-pd sample set, so the
                    // table can be tested on its own.
                    let groups = default_group_samples(psi.pair());
                    let samples = SampleSet::generate(psi.pair(), &groups, PD_LEVEL);
                    out.push(check_positive_definite(&rec, &samples, cfg.tol_for("check-pd", PD_TOL)));
                    let t = docs::table_doc(rec.inner.pair(), &rec.inner.twist(), &rec.entries());
                    write_out(out, table, &t)?;
                    res
                }
            };
            out.details = json!({
                "dimension": res.rep.dim(),
                "level_used": res.level_used,
                "ranks": res.ranks,
                "spectrum": res.spectrum,
            });
            out.push(res.report.clone());
            if let Some(dest) = dest {
                write_out(out, dest, &docs::rep_doc(&res.rep, Some(&res.cyclic)))?;
            }
        }
        Command::GnsRoundtrip { file } => {
            let (r, v) = load_rep(cfg, file)?;
            let v = v.ok_or_else(|| input(format!("{}: representation has no cyclic_vector", file.display())))?;
            let rt = gns_roundtrip(&r, &v, &gns_options(cfg, name)).map_err(failed)?;
            out.details = json!({
                "cyclic_dim": rt.cyclic_dim,
                "reconstruction_dim": rt.gns.rep.dim(),
                "level_used": rt.gns.level_used,
                "ranks": rt.gns.ranks,
                "spectrum": rt.gns.spectrum,
            });
            out.push(rt.report);
        }
        Command::TwistRep { file, mask, out: dest } => {
            let (r, v) = load_rep(cfg, file)?;
            let chi = parse_mask(mask, r.pair.algebra.rank(), "--mask")?;
            let tol = cfg.tol_for(name, REP_TOL);
            let before = check_unitary_rep(&r, tol);
            let t = twist_rep(&r, &chi);
            let after = check_unitary_rep(&t, tol);
            let mut verdict = Report::new("twist_rep");
            verdict.require(
                "checker verdict preserved",
                before.passed == after.passed,
                Some(format!("original passes: {}, twisted passes: {}", before.passed, after.passed)),
            );
            verdict.absorb("original", before);
            verdict.absorb("twisted", after);
            out.push(verdict);
            if let Some(dest) = dest {
                write_out(out, dest, &docs::rep_doc(&t, v.as_ref()))?;
            }
        }
        Command::Generate { name: ex, dims, out: dest } => generate(cfg, *ex, dims, dest, out)?,
        Command::Batch { file } => batch(global, file, out)?,
    }
    Ok(())
}

fn generate(
    cfg: &SessionConfig,
    ex: ExampleName,
    dims: &[usize],
    dest: &Path,
    out: &mut Outcome,
) -> Result<(), CliError> {
    if ex != ExampleName::GlV && !dims.is_empty() {
        return Err(input("--dims applies to glV only"));
    }
    let tol = cfg.tol_for("generate", REP_TOL);
    match ex {
        ExampleName::GlV => {
            let n = cfg.require_rank()?;
            if dims.len() != 1 << n {
                return Err(input(format!(
                    "glV at rank {n} needs --dims with {} entries, got {}",
                    1 << n,
                    dims.len()
                )));
            }
            let v = GradedSpace::new(n, dims.to_vec()).map_err(|e| input(e.to_string()))?;
            let (l, _) = glv(&v).map_err(|e| input(e.to_string()))?;
            write_out(out, dest, &docs::algebra_doc(&l))?;
        }
        ExampleName::CounterexampleN2 => {
            check_session_rank(cfg, 2)?;
            write_out(out, dest, &docs::partial_rep_doc(&catalog::counterexample_prerep()))?;
        }
        ExampleName::CliffordN1 => {
            check_session_rank(cfg, 1)?;
            let (r, v) = catalog::clifford_rep();
            write_out(out, dest, &docs::rep_doc(&r, Some(&v)))?;
        }
        ExampleName::RandomRep => {
            let (r, v) = catalog::random_rep(cfg.seed);
            check_session_rank(cfg, r.pair.algebra.rank())?;
            write_out(out, dest, &docs::rep_doc(&r, Some(&v)))?;
        }
    }
    // Every generated file must reload and pass its own checker.
    let (doc, l) = load(cfg, dest, false)?;
    match doc {
        Document::Algebra(_) => out.push(check_axioms(&l, ALGEBRA_TOL)),
        Document::Rep(d) if d.rho.iter().any(|r| r.matrix.is_none()) => {
            out.push(check_pre_rep(&docs::partial_rep_from(&d)?, tol));
        }
        Document::Rep(d) => {
            let (r, v) = docs::unitary_rep_from(&d)?;
            out.push(check_unitary_rep(&r, tol));
            if let Some(v) = v {
                out.push(check_cyclic(&r, &v, tol));
            }
        }
        Document::Table(_) => unreachable!("no generator writes tables"),
    }
    out.details = json!({ "basis_elements": l.dim() });
    Ok(())
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BatchFile {
    pub task: Vec<BatchTask>,
}

/// One task: the command line it would take after `colorgns`.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BatchTask {
    pub args: Vec<String>,
}

fn batch(global: &GlobalArgs, path: &Path, out: &mut Outcome) -> Result<(), CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| input(format!("{}: {e}", path.display())))?;
    let spec: BatchFile = toml::from_str(&text).map_err(|e| input(format!("{}: {e}", path.display())))?;
    // Parse everything before running anything.
    let mut parsed = Vec::with_capacity(spec.task.len());
    for (k, t) in spec.task.iter().enumerate() {
        let cli = Cli::try_parse_from(std::iter::once("colorgns".to_string()).chain(t.args.iter().cloned()))
            .map_err(|e| input(format!("task {k}: {}", e.render().to_string().trim())))?;
        if matches!(cli.command, Command::Batch { .. }) {
            return Err(input(format!("task {k}: batches do not nest")));
        }
        let g = cli.global.over(global);
        let cfg = g.session().map_err(|e| input(format!("task {k}: {e}")))?;
        parsed.push((g, cfg, cli.command));
    }
    out.tasks = parsed
        .par_iter()
        .map(|(g, cfg, cmd)| run_task(cfg, g, cmd))
        .collect();
    Ok(())
}

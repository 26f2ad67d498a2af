use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use adicfactor::catalog;
use adicfactor::diagram::{BratteliDiagram, OrderCheck};
use adicfactor::dimgroup::{self, Trace, TraceMode};
use adicfactor::dps::{DpsAssignment, ExtPoint, Fibre, FibreCoord};
use adicfactor::embedding::{EmbeddingPair, FibreClassification, CONDITION_NAMES};
use adicfactor::finmodel;
use adicfactor::geometry;
use adicfactor::ifs::{self, IfsSystem, Separation};
use adicfactor::io;
use adicfactor::kreport::{self, AttractorShape};
use adicfactor::linalg;
use adicfactor::pathspace::LazyPath;
use adicfactor::vershik::OrderedSystem;
use adicfactor::Error;
use clap::{Args, Parser, Subcommand};
use num::BigRational;

#[derive(Parser)]
#[command(name = "adicfactor", version, about = "Bratteli diagrams, their factor groupoids and fibred extensions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct DiagramInput {
    /// Diagram JSON file.
    #[arg(long, conflicts_with = "example")]
    diagram: Option<PathBuf>,
    /// Built-in diagram: binary, single-edge, fibonacci, figure-two, k:<n>, odometer:<m>.
    #[arg(long)]
    example: Option<String>,
}

#[derive(Args)]
struct PairInput {
    /// Embedding pair JSON file.
    #[arg(long, conflicts_with = "pair")]
    embedding: Option<PathBuf>,
    /// Built-in pair: binary, ternary, quaternary, figure-two.
    #[arg(long)]
    pair: Option<String>,
}

#[derive(Args)]
struct SystemInput {
    /// Function system JSON file.
    #[arg(long, conflicts_with = "system")]
    ifs: Option<PathBuf>,
    /// Built-in system: middle-thirds, halves, single-point, sierpinski, carpet-cube, cube:<m>, shift:<k>.
    #[arg(long)]
    system: Option<String>,
}

#[derive(Args)]
struct AssignmentInput {
    /// Edge assignment JSON file.
    #[arg(long, conflicts_with = "assignment")]
    dps: Option<PathBuf>,
    /// Built-in full-word assignment: interval or a system name.
    #[arg(long)]
    assignment: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Check a diagram, an embedding pair or an edge assignment.
    Validate {
        #[command(flatten)]
        diagram: DiagramInput,
        #[command(flatten)]
        pair: PairInput,
        #[command(flatten)]
        assignment: AssignmentInput,
        /// Levels examined.
        #[arg(long, default_value_t = 4, value_parser = clap::value_parser!(u64).range(1..))]
        depth: u64,
    },
    /// Telescope a diagram along increasing cut levels and print it as JSON.
    Telescope {
        #[command(flatten)]
        diagram: DiagramInput,
        /// Comma-separated, strictly increasing cut levels.
        #[arg(long, value_delimiter = ',', required = true)]
        cuts: Vec<usize>,
    },
    /// Iterate the Vershik map from a path.
    Vershik {
        #[command(flatten)]
        diagram: DiagramInput,
        /// Path literal `prefix=[..] tail=allmax|allmin|periodic:[..]`; defaults to the minimal path.
        #[arg(long)]
        path: Option<String>,
        /// Number of iterates.
        #[arg(long, default_value_t = 1)]
        steps: usize,
        /// Iterate the inverse map.
        #[arg(long)]
        inverse: bool,
    },
    /// Identify the dimension group and print order units.
    Dimgroup {
        #[command(flatten)]
        diagram: DiagramInput,
        #[arg(long, default_value_t = 4, value_parser = clap::value_parser!(u64).range(1..))]
        depth: u64,
    },
    /// Print the trace weights level by level.
    Trace {
        #[command(flatten)]
        diagram: DiagramInput,
        #[arg(long, default_value_t = 4, value_parser = clap::value_parser!(u64).range(1..))]
        depth: u64,
        /// Use the extreme traces of the diagram truncated at this level instead of the Perron trace.
        #[arg(long)]
        finite: Option<usize>,
    },
    /// Fibres, covering families and regularity witnesses of an embedding pair.
    Quotient {
        #[command(flatten)]
        pair: PairInput,
        /// Classify the fibre over this path.
        #[arg(long)]
        path: Option<String>,
        /// Print the two covering families at this length.
        #[arg(long)]
        covering: Option<usize>,
        /// Second path of the arrow used with `--eps`; defaults to `--path`.
        #[arg(long)]
        other: Option<String>,
        /// Regularity witness at this scale for the arrow from `--path` to `--other`.
        #[arg(long)]
        eps: Option<String>,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Render a circle picture or diagram schematic as SVG.
    Render {
        /// ternary, shrinking, cantor or figure-two.
        #[arg(long)]
        example: String,
        #[arg(long, default_value_t = 4, value_parser = clap::value_parser!(u64).range(1..))]
        stage: u64,
        /// Write the SVG here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Contraction, separation and cell diameters of a function system.
    Ifs {
        #[command(flatten)]
        system: SystemInput,
        #[arg(long, default_value_t = 4, value_parser = clap::value_parser!(u64).range(1..))]
        depth: u64,
    },
    /// Fibres, extended dynamics and regularity for an edge assignment.
    Dps {
        #[command(flatten)]
        assignment: AssignmentInput,
        #[arg(long)]
        path: Option<String>,
        /// Coordinate in the fibre over `--path`, comma-separated rationals.
        #[arg(long)]
        coord: Option<String>,
        #[arg(long, default_value_t = 6, value_parser = clap::value_parser!(u64).range(1..))]
        depth: u64,
        #[arg(long)]
        eps: Option<String>,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// K-theory reports.
    Ktheory {
        #[command(subcommand)]
        action: KtheoryAction,
    },
    /// Exact identity checks.
    Verify {
        #[command(subcommand)]
        action: VerifyAction,
    },
}

#[derive(Subcommand)]
enum KtheoryAction {
    /// Invariants of a pair, or the exact sequences of an extension.
    Report {
        #[command(flatten)]
        pair: PairInput,
        #[command(flatten)]
        assignment: AssignmentInput,
        /// Attractor shape: cube:<m>, cantor:<k>, sierpinski, carpet-cube.
        #[arg(long)]
        shape: Option<String>,
    },
    /// Measure of the paths that follow the first embedding for `m` levels.
    Measure {
        #[command(flatten)]
        pair: PairInput,
        #[arg(long)]
        m: usize,
        /// Fixed initial edges, comma-separated.
        #[arg(long, value_delimiter = ',')]
        prefix: Vec<usize>,
    },
}

#[derive(Subcommand)]
enum VerifyAction {
    /// Partial isometry and Hadamard conjugation identities.
    Hadamard {
        #[arg(long)]
        n: usize,
    },
}

enum Outcome {
    Ok,
    Failed,
}

type Run = Result<Outcome, Error>;

fn read(path: &PathBuf) -> Result<String, Error> {
    fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

impl DiagramInput {
    fn given(&self) -> bool {
        self.diagram.is_some() || self.example.is_some()
    }

    fn load(&self) -> Result<BratteliDiagram, Error> {
        match (&self.diagram, &self.example) {
            (Some(p), _) => io::parse_diagram(&read(p)?),
            (None, Some(n)) => catalog::diagram_named(n),
            _ => Err(Error::Parse("give --diagram or --example".into())),
        }
    }
}

impl PairInput {
    fn given(&self) -> bool {
        self.embedding.is_some() || self.pair.is_some()
    }

    fn load(&self) -> Result<EmbeddingPair, Error> {
        match (&self.embedding, &self.pair) {
            (Some(p), _) => io::parse_embedding(&read(p)?),
            (None, Some(n)) => catalog::pair_named(n),
            _ => Err(Error::Parse("give --embedding or --pair".into())),
        }
    }
}

impl SystemInput {
    fn load(&self) -> Result<IfsSystem, Error> {
        match (&self.ifs, &self.system) {
            (Some(p), _) => io::parse_ifs(&read(p)?),
            (None, Some(n)) => catalog::ifs_named(n),
            _ => Err(Error::Parse("give --ifs or --system".into())),
        }
    }
}

impl AssignmentInput {
    fn given(&self) -> bool {
        self.dps.is_some() || self.assignment.is_some()
    }

    fn load(&self) -> Result<DpsAssignment, Error> {
        match (&self.dps, &self.assignment) {
            (Some(p), _) => io::parse_assignment(&read(p)?),
            (None, Some(n)) => catalog::assignment_named(n),
            _ => Err(Error::Parse("give --dps or --assignment".into())),
        }
    }
}

fn kv(key: &str, value: impl std::fmt::Display) {
    println!("{key}: {value}");
}

fn list<T: std::fmt::Display>(v: &[T]) -> String {
    format!("[{}]", v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", "))
}

fn rational(s: &str) -> Result<BigRational, Error> {
    s.trim().parse().map_err(|_| Error::Parse(format!("bad rational {s:?}")))
}

fn path_arg(s: Option<&String>) -> Result<Option<LazyPath>, Error> {
    s.map(|t| t.parse()).transpose()
}

fn verdict(ok: bool) -> Outcome {
    if ok {
        Outcome::Ok
    } else {
        Outcome::Failed
    }
}

fn validate(d: &DiagramInput, p: &PairInput, a: &AssignmentInput, depth: usize) -> Run {
    let given = [d.given(), p.given(), a.given()].iter().filter(|&&g| g).count();
    if given != 1 {
        return Err(Error::Parse("give exactly one of a diagram, a pair or an assignment".into()));
    }
    if d.given() {
        let d = d.load()?;
        let report = d.validate();
        kv("valid", report.is_valid());
        for v in &report.violations {
            kv("violation", format!("{v:?}"));
        }
        let ordered = match d.is_properly_ordered(depth) {
            OrderCheck::Yes { .. } => "yes".to_string(),
            OrderCheck::No { kind, .. } => format!("no ({kind:?} path not unique)"),
            OrderCheck::UnknownAtDepth => "unknown".into(),
        };
        kv("properly ordered", ordered);
        kv("full edge connections", d.has_full_edge_connections(depth));
        return Ok(verdict(report.is_valid()));
    }
    if p.given() {
        let pair = p.load()?;
        let report = pair.check_conditions();
        for o in &report.outcomes {
            let name = CONDITION_NAMES[o.condition - 1];
            match &o.witness {
                Some(w) if !o.passed => kv(&format!("condition {} ({name})", o.condition), format!("fail: {w}")),
                _ => kv(&format!("condition {} ({name})", o.condition), "pass"),
            }
        }
        kv("valid", report.all_pass());
        return Ok(verdict(report.all_pass()));
    }
    let asg = a.load()?;
    let report = asg.validate(depth);
    for c in &report.checks {
        match &c.witness {
            Some(w) => kv(c.name, format!("fail: {w}")),
            None => kv(c.name, "pass"),
        }
    }
    kv("exact cover", report.exact_cover);
    if !report.exact_cover {
        kv("net tolerance", format!("{:e}", report.net_tolerance));
    }
    kv("valid", report.is_valid());
    Ok(verdict(report.is_valid()))
}

fn vershik(d: &DiagramInput, path: Option<&String>, steps: usize, inverse: bool) -> Run {
    let d = d.load()?;
    let sys = OrderedSystem::new(&d)?;
    let mut x = path_arg(path)?.unwrap_or_else(|| sys.xmin().clone());
    kv("step 0", &x);
    for i in 1..=steps {
        x = if inverse { sys.vershik_inverse(&x)? } else { sys.vershik(&x)? };
        kv(&format!("step {i}"), &x);
    }
    Ok(Outcome::Ok)
}

fn dimgroup_cmd(d: &DiagramInput, depth: usize) -> Run {
    let d = d.load()?;
    kv("group", dimgroup::identify_group(&d));
    for n in 0..=depth {
        kv(&format!("order unit {n}"), list(&dimgroup::order_unit(&d, n)?.vector));
    }
    Ok(Outcome::Ok)
}

fn trace_cmd(d: &DiagramInput, depth: usize, finite: Option<usize>) -> Run {
    let d = d.load()?;
    let mode = finite.map_or(TraceMode::Perron, TraceMode::FiniteDepth);
    let show = |tag: &str, t: &dimgroup::TraceVector| -> Result<(), Error> {
        for n in 0..=depth {
            kv(&format!("{tag}level {n}"), list(&t.at(n)?));
        }
        if let Some(e) = t.error {
            kv(&format!("{tag}error bound"), format!("{e:e}"));
        }
        Ok(())
    };
    match dimgroup::trace(&d, mode)? {
        Trace::Unique(t) => {
            kv("traces", 1);
            show("", &t)?;
        }
        Trace::Simplex { vertices, .. } => {
            kv("traces", vertices.len());
            for (i, t) in vertices.iter().enumerate() {
                show(&format!("trace {i} "), t)?;
            }
        }
    }
    Ok(Outcome::Ok)
}

fn quotient(
    p: &PairInput,
    path: Option<&String>,
    other: Option<&String>,
    covering: Option<usize>,
    eps: Option<&String>,
    samples: usize,
    seed: u64,
) -> Run {
    let pair = p.load()?;
    let x = path_arg(path)?;
    if let Some(x) = &x {
        match pair.classify_fibre(x)? {
            FibreClassification::Singleton => kv("fibre", "singleton"),
            FibreClassification::Pair { partner, splitting_level, side, n0 } => {
                kv("fibre", "pair");
                kv("partner", partner);
                kv("splitting level", splitting_level);
                kv("side", side);
                kv("n0", n0);
            }
        }
    }
    if let Some(n) = covering {
        let (first, second) = pair.covering_families(n)?;
        kv("first family", first.len());
        kv("second family", second.len());
    }
    if let Some(e) = eps {
        let x = x.ok_or_else(|| Error::Parse("--eps needs --path".into()))?;
        let y = path_arg(other)?.unwrap_or_else(|| x.clone());
        let (x1, y1) = (pair.partner(&x)?, pair.partner(&y)?);
        let w = pair.regularity_witness((&x, &y), (&x1, &y1), &rational(e)?, samples, seed)?;
        kv("k", w.k);
        kv("samples", w.samples);
        kv("hausdorff hits", w.hausdorff_hits);
        kv("diameter hits", w.diameter_hits);
        kv("verified", w.verified);
        return Ok(verdict(w.verified));
    }
    Ok(Outcome::Ok)
}

fn render(example: &str, stage: usize, out: Option<&PathBuf>) -> Run {
    let scene = geometry::catalog_scene(example, stage)?;
    let svg = geometry::render_svg(&scene);
    match out {
        Some(p) => {
            fs::write(p, &svg).map_err(|e| Error::Geometry(format!("{}: {e}", p.display())))?;
            kv("circles", geometry::count_circles(&svg));
            kv("output", p.display());
        }
        None => print!("{svg}"),
    }
    Ok(Outcome::Ok)
}

fn ifs_cmd(s: &SystemInput, depth: usize) -> Run {
    let sys = s.load()?;
    kv("maps", sys.map_count());
    kv("contraction", sys.lambda());
    match ifs::strong_separation(&sys, depth) {
        Separation::Separated { gap, depth } => kv("separation", format!("separated, gap {gap} at depth {depth}")),
        Separation::Overlapping { point, first, second } => {
            kv("separation", format!("overlapping, maps {first} and {second} share ({})", list(&point)))
        }
        Separation::Unknown => kv("separation", "unknown"),
    }
    for n in 0..=depth {
        let cells = ifs::attractor_cells(&sys, n);
        kv(&format!("cells {n}"), format!("{} max diameter^2 {}", cells.cells.len(), cells.max_diameter_sq()));
    }
    Ok(Outcome::Ok)
}

fn parse_point(s: &str) -> Result<Vec<BigRational>, Error> {
    s.split(',').map(rational).collect()
}

#[allow(clippy::too_many_arguments)]
fn dps_cmd(
    a: &AssignmentInput,
    path: Option<&String>,
    coord: Option<&String>,
    depth: usize,
    eps: Option<&String>,
    samples: usize,
    seed: u64,
) -> Run {
    let asg = a.load()?;
    let report = asg.validate(depth.min(3));
    kv("valid", report.is_valid());
    if !report.is_valid() {
        return Ok(Outcome::Failed);
    }
    let Some(x) = path_arg(path)? else { return Ok(Outcome::Ok) };
    match asg.fibre(&x, depth)? {
        Fibre::Singleton { word, error, .. } => {
            kv("fibre", "point");
            kv("word length", word.len());
            kv("diameter bound", format!("{error:e}"));
        }
        Fibre::CopyOfC { word, m } => {
            kv("fibre", "copy of the attractor");
            kv("word", list(&word));
            kv("identity from level", m + 1);
        }
    }
    let c = match coord {
        Some(s) => FibreCoord::Point(parse_point(s)?),
        None => FibreCoord::Unique,
    };
    if coord.is_some() || matches!(asg.fibre(&x, depth)?, Fibre::Singleton { .. }) {
        let next = asg.phi_tilde(&ExtPoint { x: x.clone(), c })?;
        kv("image path", &next.x);
        match &next.c {
            FibreCoord::Unique => kv("image coordinate", "unique"),
            FibreCoord::Point(p) => kv("image coordinate", list(p)),
        }
    }
    if let Some(e) = eps {
        let w = asg.regularity_witness(&x, &rational(e)?, samples, seed)?;
        kv("k", w.k);
        kv("cylinder", list(&w.cylinder));
        kv("samples", w.samples);
        kv("diameter hits", w.diameter_hits);
        kv("hausdorff hits", w.hausdorff_hits);
        kv("verified", w.verified);
        return Ok(verdict(w.verified));
    }
    Ok(Outcome::Ok)
}

fn ktheory(action: &KtheoryAction) -> Run {
    match action {
        KtheoryAction::Report { pair, assignment, shape } => {
            let report = match (pair.given(), assignment.given()) {
                (true, false) => kreport::factor_invariants(&pair.load()?)?,
                (false, true) => {
                    let shape = shape.as_deref().map(str::parse::<AttractorShape>).transpose()?;
                    kreport::dps_invariants(&assignment.load()?, shape, None)?
                }
                _ => return Err(Error::Parse("give exactly one of a pair or an assignment".into())),
            };
            for (k, v) in report.lines() {
                kv(&k, v);
            }
            Ok(Outcome::Ok)
        }
        KtheoryAction::Measure { pair, m, prefix } => {
            let r = kreport::measure_vanishing(&pair.load()?, prefix, *m)?;
            kv("measure", &r.mu);
            kv("bound", &r.bound);
            kv("measure f64", format!("{:e}", linalg::rational_to_f64(&r.mu)));
            kv("ok", r.ok);
            Ok(verdict(r.ok))
        }
    }
}

fn verify(action: &VerifyAction) -> Run {
    match action {
        VerifyAction::Hadamard { n } => {
            let r = finmodel::hadamard_verify(*n)?;
            kv("n", r.n);
            kv("vv* = e11", r.vvstar_ok);
            kv("v*v = 2^-n J", r.vstarv_ok);
            kv("H e11 H = v*v", r.conjugation_ok);
            kv("residuals", list(&r.residuals));
            Ok(verdict(r.all_ok()))
        }
    }
}

fn telescope(d: &DiagramInput, cuts: &[usize]) -> Run {
    let t = d.load()?.telescope(cuts)?;
    println!("{}", io::diagram_to_json(&t));
    Ok(Outcome::Ok)
}

fn run(cli: &Cli) -> Run {
    match &cli.command {
        Command::Validate { diagram, pair, assignment, depth } => validate(diagram, pair, assignment, *depth as usize),
        Command::Telescope { diagram, cuts } => telescope(diagram, cuts),
        Command::Vershik { diagram, path, steps, inverse } => vershik(diagram, path.as_ref(), *steps, *inverse),
        Command::Dimgroup { diagram, depth } => dimgroup_cmd(diagram, *depth as usize),
        Command::Trace { diagram, depth, finite } => trace_cmd(diagram, *depth as usize, *finite),
        Command::Quotient { pair, path, other, covering, eps, samples, seed } => {
            quotient(pair, path.as_ref(), other.as_ref(), *covering, eps.as_ref(), *samples, *seed)
        }
        Command::Render { example, stage, out } => render(example, *stage as usize, out.as_ref()),
        Command::Ifs { system, depth } => ifs_cmd(system, *depth as usize),
        Command::Dps { assignment, path, coord, depth, eps, samples, seed } => {
            dps_cmd(assignment, path.as_ref(), coord.as_ref(), *depth as usize, eps.as_ref(), *samples, *seed)
        }
        Command::Ktheory { action } => ktheory(action),
        Command::Verify { action } => verify(action),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::Failed) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Parse(_) | Error::MalformedDiagram(_) | Error::InvalidPath(_) => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}

//! `khtight` — command-line front end for tightness certificates on
//! branched double covers of braid closures.
//!
//! Subcommands mirror the library: single-braid invariants (`kh`, `psi`,
//! `s`, `sig`, `det`, `qa`), the full `verdict` pipeline, contact-surgery
//! `d3`, `lattice` embedding obstructions, spectral-sequence `ss` pages for
//! bi-filtered complex files, and `family` sweeps over a word template.
//!
//! Exit codes: 0 success, 2 mathematical or input error, 3 resource cap
//! (tune the cap with the `KHTIGHT_MAX_GENERATORS` environment variable).

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use khtight::{
    braid_to_surgery, closure_diagram, d3, determinant, enumerate_embeddings, h1_order,
    orthogonal_complement, pages, parity_obstruction, parse_bifiltered, qa_verify, s_invariant,
    signature, tightness_verdict, BraidWord, Filtration, Flavor, GramLattice, HomologyTable,
    Obstruction, PagesReport, Reduction, Stabilize, SurgeryDiagram, WitnessStrategy,
};
use serde_json::json;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

#[derive(Parser)]
#[command(
    name = "khtight",
    version,
    about = "Tightness certificates for contact structures on branched double covers \
             of transverse braid closures, via reduced GF(2) Khovanov homology"
)]
struct Cli {
    /// Emit machine-readable JSON instead of human tables.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct BraidArgs {
    /// Braid word as comma-separated nonzero generator indices, e.g.
    /// "-1,-1,-1,2,1,1,1,2" (sign = crossing sign).
    #[arg(short, long, allow_hyphen_values = true)]
    braid: String,
    /// Strand count; defaults to (largest generator index) + 1.
    #[arg(long)]
    strands: Option<usize>,
}

impl BraidArgs {
    fn word(&self) -> Result<BraidWord> {
        Ok(BraidWord::parse(&self.braid, self.strands)?)
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum FiltArg {
    #[value(name = "I", alias = "i")]
    I,
    #[value(name = "A", alias = "a")]
    A,
}

impl From<FiltArg> for Filtration {
    fn from(f: FiltArg) -> Filtration {
        match f {
            FiltArg::I => Filtration::I,
            FiltArg::A => Filtration::A,
        }
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Homology table of the closure over GF(2) (reduced by default).
    Kh {
        #[command(flatten)]
        braid: BraidArgs,
        /// Compute the unreduced flavor instead.
        #[arg(long)]
        unreduced: bool,
    },
    /// Survival of the transverse cycle class, with a witness representative.
    Psi {
        #[command(flatten)]
        braid: BraidArgs,
    },
    /// Concordance s invariant of a knot closure.
    S {
        #[command(flatten)]
        braid: BraidArgs,
    },
    /// Signature of the closure (Goeritz form with the correction term).
    Sig {
        #[command(flatten)]
        braid: BraidArgs,
    },
    /// Determinant of the closure.
    Det {
        #[command(flatten)]
        braid: BraidArgs,
    },
    /// Full certificate pipeline: one report with flags, notes, and verdict.
    Verdict {
        #[command(flatten)]
        braid: BraidArgs,
    },
    /// Quasi-alternating certificate by recursive crossing resolution.
    Qa {
        #[command(flatten)]
        braid: BraidArgs,
        /// Print the full certificate tree, not just the summary.
        #[arg(long)]
        tree: bool,
    },
    /// d3 invariant of a contact (±1)-surgery presentation, generated from
    /// a braid or read from a diagram JSON file.
    D3 {
        /// Braid word to lift to a surgery presentation.
        #[arg(short, long, allow_hyphen_values = true, conflicts_with = "file")]
        braid: Option<String>,
        /// Strand count for --braid.
        #[arg(long, requires = "braid")]
        strands: Option<usize>,
        /// Surgery diagram JSON file: {"components":[{"tb":..,"rot":..,"coeff":..}],"linking":[[..]]}.
        #[arg(long, required_unless_present = "braid")]
        file: Option<PathBuf>,
        /// Keep an even strand count as given instead of stabilizing to odd.
        #[arg(long, requires = "braid")]
        no_stabilize: bool,
        /// Print the generated diagram as JSON instead of computing d3.
        #[arg(long, requires = "braid")]
        emit_diagram: bool,
    },
    /// Embeddings of a negative-definite lattice into the diagonal lattice,
    /// orthogonal complements, and the parity obstruction to Stein fillings.
    Lattice {
        /// Gram matrix JSON file: either [[..]] or {"gram":[[..]],"labels":[..]}.
        #[arg(long)]
        file: PathBuf,
        /// Ambient diagonal rank n to embed into.
        #[arg(long)]
        ambient: usize,
        /// First-homology order k for the parity obstruction.
        #[arg(long)]
        h1: Option<i64>,
    },
    /// Spectral-sequence pages of a bi-filtered complex file.
    Ss {
        /// Complex file: lines "g <name> i=<i> a=<a>" and "d <src> -> <t>,<t>".
        #[arg(long)]
        file: PathBuf,
        /// Which filtration to run: I (ascending) or A (descending).
        #[arg(long, value_enum)]
        filtration: FiltArg,
        /// Last page to print (pages 0..=N).
        #[arg(long, default_value_t = 3)]
        pages: usize,
    },
    /// Verdict sweep over a word template; "{r}" is the sweep variable.
    Family {
        /// Template word, e.g. "-1*{r},2,1,1,1,2" (letter*count blocks).
        #[arg(long, allow_hyphen_values = true)]
        template: String,
        /// Sweep range "a..b" (inclusive of both ends) or a single value.
        #[arg(long)]
        r: String,
        /// Strand count; defaults to (largest generator index) + 1 per word.
        #[arg(long)]
        strands: Option<usize>,
    },
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("error: {e:#}");
        let code =
            e.downcast_ref::<khtight::Error>()
                .map_or(2, |k| if k.is_resource_limit() { 3 } else { 2 });
        std::process::exit(code);
    }
}

fn run(cli: Cli) -> Result<()> {
    let json = cli.json;
    match cli.cmd {
        Cmd::Kh { braid, unreduced } => cmd_kh(&braid.word()?, unreduced, json),
        Cmd::Psi { braid } => cmd_psi(&braid.word()?, json),
        Cmd::S { braid } => {
            let w = braid.word()?;
            let s = s_invariant(&w)?;
            if json {
                println!("{}", json!({ "braid": w.to_string(), "s": s }));
            } else {
                println!("s({w}) = {s}");
            }
            Ok(())
        }
        Cmd::Sig { braid } => {
            let w = braid.word()?;
            let sigma = signature(&closure_diagram(&w))?;
            if json {
                println!("{}", json!({ "braid": w.to_string(), "sigma": sigma }));
            } else {
                println!("sigma({w}) = {sigma}");
            }
            Ok(())
        }
        Cmd::Det { braid } => {
            let w = braid.word()?;
            let det = determinant(&closure_diagram(&w));
            if json {
                println!("{}", json!({ "braid": w.to_string(), "det": det }));
            } else {
                println!("det({w}) = {det}");
            }
            Ok(())
        }
        Cmd::Verdict { braid } => {
            let report = tightness_verdict(&braid.word()?);
            if json {
                println!("{}", serde_json::to_string_pretty(&report)?);
            } else {
                print!("{}", render_verdict(&report));
            }
            Ok(())
        }
        Cmd::Qa { braid, tree } => cmd_qa(&braid.word()?, tree, json),
        Cmd::D3 {
            braid,
            strands,
            file,
            no_stabilize,
            emit_diagram,
        } => cmd_d3(braid, strands, file, no_stabilize, emit_diagram, json),
        Cmd::Lattice { file, ambient, h1 } => cmd_lattice(&file, ambient, h1, json),
        Cmd::Ss {
            file,
            filtration,
            pages: r_max,
        } => cmd_ss(&file, filtration.into(), r_max, json),
        Cmd::Family {
            template,
            r,
            strands,
        } => cmd_family(&template, &r, strands, json),
    }
}

// ---- kh --------------------------------------------------------------------

fn cmd_kh(w: &BraidWord, unreduced: bool, json: bool) -> Result<()> {
    let reduction = if unreduced {
        Reduction::Unreduced
    } else {
        Reduction::Reduced
    };
    let streamed =
        khtight::reduced_complex(&closure_diagram(w), Flavor::KhovanovF2, reduction, false)?;
    let table = khtight::homology(&streamed.complex);
    if json {
        let groups: Vec<_> = table
            .dims
            .iter()
            .map(|(&(i, q), &dim)| json!({ "i": i, "q": q, "dim": dim }))
            .collect();
        println!(
            "{}",
            json!({
                "braid": w.to_string(),
                "reduction": if unreduced { "unreduced" } else { "reduced" },
                "total_rank": table.total_rank,
                "groups": groups,
                "thin_on": thin_diagonal(&table),
            })
        );
    } else {
        print!("{}", render_kh(w, &table, unreduced));
    }
    Ok(())
}

/// The single diagonal q − 2i carrying all of the homology, if there is one.
fn thin_diagonal(table: &HomologyTable) -> Option<i64> {
    let mut diags = table.dims.keys().map(|&(i, q)| q as i64 - 2 * i as i64);
    let first = diags.next()?;
    diags.all(|d| d == first).then_some(first)
}

fn render_kh(w: &BraidWord, table: &HomologyTable, unreduced: bool) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "braid: {w}   strands: {}   flavor: GF(2) {}   rank: {}",
        w.strands(),
        if unreduced { "unreduced" } else { "reduced" },
        table.total_rank
    );
    if table.dims.is_empty() {
        let _ = writeln!(out, "(no homology)");
        return out;
    }
    let is: Vec<i16> = {
        let mut v: Vec<i16> = table.dims.keys().map(|&(i, _)| i).collect();
        v.sort_unstable();
        v.dedup();
        v
    };
    let qs: Vec<i16> = {
        let mut v: Vec<i16> = table.dims.keys().map(|&(_, q)| q).collect();
        v.sort_unstable();
        v.dedup();
        v.reverse();
        v
    };
    let _ = write!(out, "{:>5} |", "q\\i");
    for &i in &is {
        let _ = write!(out, "{i:>4}");
    }
    let _ = writeln!(out);
    let _ = writeln!(out, "{:-<width$}", "", width = 7 + 4 * is.len());
    for &q in &qs {
        let _ = write!(out, "{q:>5} |");
        for &i in &is {
            match table.dims.get(&(i, q)) {
                Some(&d) => {
                    let _ = write!(out, "{d:>4}");
                }
                None => {
                    let _ = write!(out, "{:>4}", ".");
                }
            }
        }
        let _ = writeln!(out);
    }
    // One line per diagonal makes thinness visible at a glance.
    let mut by_diag: std::collections::BTreeMap<i64, usize> = Default::default();
    for (&(i, q), &dim) in &table.dims {
        *by_diag.entry(q as i64 - 2 * i as i64).or_default() += dim;
    }
    let diag_list = by_diag
        .iter()
        .map(|(d, n)| format!("{d}: {n}"))
        .collect::<Vec<_>>()
        .join(", ");
    let _ = writeln!(
        out,
        "diagonals q-2i: {{{diag_list}}}{}",
        if by_diag.len() == 1 { "   (thin)" } else { "" }
    );
    out
}

// ---- psi -------------------------------------------------------------------

fn cmd_psi(w: &BraidWord, json: bool) -> Result<()> {
    let streamed = khtight::reduced_complex(
        &closure_diagram(w),
        Flavor::KhovanovF2,
        Reduction::Reduced,
        true,
    )?;
    let tracked = streamed
        .tracked
        .as_ref()
        .expect("tracking was requested")
        .clone();
    let nonzero = !tracked.is_empty();
    let sl = w.self_linking();
    let q = tracked
        .first()
        .map(|&g| streamed.complex.gens[g as usize].q);
    let survivors: Vec<_> = tracked
        .iter()
        .map(|&g| {
            let info = &streamed.complex.gens[g as usize];
            (g, info.i, info.q)
        })
        .collect();
    if json {
        println!(
            "{}",
            json!({
                "braid": w.to_string(),
                "sl": sl,
                "nonzero": nonzero,
                "q": q,
                "survivors": survivors.iter()
                    .map(|&(g, i, q)| json!({ "id": g, "i": i, "q": q }))
                    .collect::<Vec<_>>(),
                "materialized": streamed.materialized,
            })
        );
    } else {
        println!("braid: {w}   sl: {sl}");
        if nonzero {
            println!("psi: NONZERO   q = {} (sl + 1 = {})", q.unwrap(), sl + 1);
            println!(
                "witness: class representative with {} surviving generator(s) in the reduced complex",
                survivors.len()
            );
            for &(g, i, q) in &survivors {
                println!("  generator {g}: i = {i}, q = {q}");
            }
        } else {
            println!("psi: ZERO   (the tracked class died during reduction)");
        }
        println!(
            "generators materialized during streaming: {}",
            streamed.materialized
        );
    }
    Ok(())
}

// ---- verdict ---------------------------------------------------------------

fn opt<T: std::fmt::Display>(v: &Option<T>) -> String {
    v.as_ref().map_or_else(|| "-".into(), |x| x.to_string())
}

fn render_verdict(r: &khtight::VerdictReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{}   braid: {}", r.verdict, r.braid);
    let _ = writeln!(
        out,
        "  strands: {}   sl: {}   s: {}   sigma: {}   det: {}",
        r.strands,
        r.sl,
        opt(&r.s),
        opt(&r.sigma),
        r.det
    );
    let _ = writeln!(
        out,
        "  kh_rank: {}   thin: {}   collapse: {}   psi_nonzero: {}",
        opt(&r.kh_rank),
        r.thin,
        r.collapse,
        opt(&r.psi_nonzero)
    );
    for (k, v) in &r.notes {
        let _ = writeln!(out, "  note[{k}]: {v}");
    }
    let timings = r
        .timings_ms
        .iter()
        .map(|(k, v)| format!("{k} {v}ms"))
        .collect::<Vec<_>>()
        .join(", ");
    let _ = writeln!(out, "  timings: {timings}");
    out
}

// ---- qa --------------------------------------------------------------------

fn cmd_qa(w: &BraidWord, tree: bool, json: bool) -> Result<()> {
    let cert = qa_verify(w, WitnessStrategy::default())?;
    if json {
        println!("{}", serde_json::to_string_pretty(&cert)?);
        return Ok(());
    }
    println!(
        "quasi-alternating: YES   det: {}   recursion depth: {}   nodes: {}",
        cert.root.det, cert.depth, cert.nodes
    );
    if tree {
        fn walk(n: &khtight::QaNode, indent: usize, out: &mut String) {
            let pad = "  ".repeat(indent);
            match (&n.leaf, n.witness) {
                (Some(leaf), _) => {
                    let _ = writeln!(out, "{pad}{} det={} leaf: {leaf}", n.word, n.det);
                }
                (None, Some(wit)) => {
                    let _ = writeln!(out, "{pad}{} det={} resolve letter {wit}", n.word, n.det);
                }
                _ => {}
            }
            for c in &n.children {
                walk(c, indent + 1, out);
            }
        }
        let mut out = String::new();
        walk(&cert.root, 0, &mut out);
        print!("{out}");
    }
    Ok(())
}

// ---- d3 --------------------------------------------------------------------

fn cmd_d3(
    braid: Option<String>,
    strands: Option<usize>,
    file: Option<PathBuf>,
    no_stabilize: bool,
    emit_diagram: bool,
    json: bool,
) -> Result<()> {
    let (diagram, origin) = match (braid, file) {
        (Some(b), None) => {
            let w = BraidWord::parse(&b, strands)?;
            let stab = if no_stabilize {
                Stabilize::Never
            } else {
                Stabilize::Auto
            };
            (braid_to_surgery(&w, stab), w.to_string())
        }
        (None, Some(path)) => {
            let text = std::fs::read_to_string(&path)
                .with_context(|| format!("reading {}", path.display()))?;
            let d: SurgeryDiagram = serde_json::from_str(&text)
                .with_context(|| format!("parsing {}", path.display()))?;
            d.validate()?;
            (d, path.display().to_string())
        }
        _ => unreachable!("clap enforces exactly one input"),
    };
    if emit_diagram {
        println!("{}", serde_json::to_string_pretty(&diagram)?);
        return Ok(());
    }
    let res = d3(&diagram)?;
    if json {
        println!(
            "{}",
            json!({
                "input": origin,
                "components": diagram.len(),
                "d3": res.d3.to_string(),
                "c1_sq": res.c1_sq.to_string(),
                "chi": res.chi,
                "sign": res.sign,
                "m": res.m,
                "h1_order": res.h1_order,
            })
        );
    } else {
        println!("input: {origin}   components: {}", diagram.len());
        println!(
            "d3 = {}   (c1^2 = {}, chi = {}, sign = {}, m = {})",
            res.d3, res.c1_sq, res.chi, res.sign, res.m
        );
        println!("|H_1| = {}", res.h1_order);
        debug_assert_eq!(res.h1_order, h1_order(&diagram));
    }
    Ok(())
}

// ---- lattice ---------------------------------------------------------------

fn cmd_lattice(file: &PathBuf, ambient: usize, h1: Option<i64>, json: bool) -> Result<()> {
    let text =
        std::fs::read_to_string(file).with_context(|| format!("reading {}", file.display()))?;
    let value: serde_json::Value =
        serde_json::from_str(&text).with_context(|| format!("parsing {}", file.display()))?;
    let (gram_value, labels): (serde_json::Value, Option<Vec<String>>) = if value.is_array() {
        (value, None)
    } else {
        let gram = value
            .get("gram")
            .cloned()
            .ok_or_else(|| anyhow!("expected a \"gram\" field or a bare matrix"))?;
        let labels = value
            .get("labels")
            .map(|l| serde_json::from_value(l.clone()))
            .transpose()?;
        (gram, labels)
    };
    let gram: Vec<Vec<i64>> = serde_json::from_value(gram_value)?;
    let mut lattice = GramLattice::new(gram)?;
    if let Some(labels) = labels {
        if labels.len() != lattice.rank() {
            bail!(
                "{} labels for a rank-{} lattice",
                labels.len(),
                lattice.rank()
            );
        }
        lattice.labels = labels;
    }
    let classes = enumerate_embeddings(&lattice, ambient);

    if json {
        let entries: Vec<_> = classes
            .iter()
            .map(|e| {
                let comp = orthogonal_complement(e);
                let obstruction = h1.map(|k| {
                    parity_obstruction(&comp, k).map(|o| match o {
                        Obstruction::Obstructed => "OBSTRUCTED",
                        Obstruction::NotObstructed => "NOT_OBSTRUCTED",
                    })
                });
                json!({
                    "vectors": e.vectors,
                    "complement": {
                        "gram": comp.gram,
                        "diagonal": comp.diagonal(),
                    },
                    "obstruction": match obstruction {
                        None => serde_json::Value::Null,
                        Some(Ok(s)) => json!(s),
                        Some(Err(err)) => json!({ "error": err.to_string() }),
                    },
                })
            })
            .collect();
        println!(
            "{}",
            serde_json::to_string_pretty(&json!({
                "rank": lattice.rank(),
                "ambient": ambient,
                "classes": entries,
            }))?
        );
        return Ok(());
    }

    println!(
        "lattice: rank {} negative definite   ambient: Z^{ambient} with form -sum x_k y_k",
        lattice.rank()
    );
    println!(
        "embedding classes up to signed permutation: {}",
        classes.len()
    );
    for (idx, e) in classes.iter().enumerate() {
        println!("class {}:", idx + 1);
        for (label, vec) in lattice.labels.iter().zip(&e.vectors) {
            println!("  {label} -> {}", render_vector(vec));
        }
        let comp = orthogonal_complement(e);
        match comp.diagonal() {
            Some(diag) => {
                let form = diag
                    .iter()
                    .map(|d| format!("<{d}>"))
                    .collect::<Vec<_>>()
                    .join(" + ");
                println!("  complement (rank {}): {form}", comp.rank());
                if let Some(k) = h1 {
                    match parity_obstruction(&comp, k)? {
                        Obstruction::Obstructed => {
                            println!("  parity obstruction at k = {k}: OBSTRUCTED");
                            println!(
                                "  conditional chain: if c1 = 0, the vectors k*u_i must pair to \
                                 even integers, but an odd diagonal entry makes k^2*d odd;"
                            );
                            println!(
                                "  hence no Stein filling with b2 > 0 exists, and any Stein \
                                 filling forces d3 = 0."
                            );
                        }
                        Obstruction::NotObstructed => {
                            println!("  parity obstruction at k = {k}: not obstructed");
                        }
                    }
                }
            }
            None => {
                println!(
                    "  complement (rank {}): not diagonalized; Gram = {:?}",
                    comp.rank(),
                    comp.gram
                );
            }
        }
    }
    if classes.is_empty() {
        println!("no embedding exists at this ambient rank");
    }
    Ok(())
}

fn render_vector(v: &[i64]) -> String {
    let mut out = String::new();
    for (k, &c) in v.iter().enumerate() {
        if c == 0 {
            continue;
        }
        let sign = if c < 0 {
            "-"
        } else if out.is_empty() {
            ""
        } else {
            "+"
        };
        let mag = c.abs();
        if mag == 1 {
            let _ = write!(out, "{sign}e{}", k + 1);
        } else {
            let _ = write!(out, "{sign}{mag}e{}", k + 1);
        }
    }
    if out.is_empty() {
        out.push('0');
    }
    out
}

// ---- ss --------------------------------------------------------------------

fn cmd_ss(file: &PathBuf, which: Filtration, r_max: usize, json: bool) -> Result<()> {
    let text =
        std::fs::read_to_string(file).with_context(|| format!("reading {}", file.display()))?;
    let complex = parse_bifiltered(&text)?;
    let report = pages(&complex, which, r_max);
    if json {
        println!("{}", serde_json::to_string_pretty(&report)?);
    } else {
        print!("{}", render_pages(file, complex.len(), &report));
    }
    Ok(())
}

fn render_pages(file: &Path, n_gens: usize, report: &PagesReport) -> String {
    let (level_name, other_name) = match report.filtration {
        Filtration::I => ("i", "a"),
        Filtration::A => ("a", "i"),
    };
    let mut out = String::new();
    let _ = writeln!(
        out,
        "file: {}   filtration: {:?} (levels shown in the {level_name}-grading)   generators: {n_gens}",
        file.display(),
        report.filtration
    );
    for page in &report.pages {
        let dims = page
            .dims
            .iter()
            .map(|(lvl, dim)| format!("{level_name}={lvl}: {dim}"))
            .collect::<Vec<_>>()
            .join("   ");
        let _ = write!(
            out,
            "E^{}: {}",
            page.r,
            if dims.is_empty() { "0" } else { &dims }
        );
        if page.d_rank > 0 {
            let per = page
                .d_ranks
                .iter()
                .map(|(lvl, rk)| format!("from {level_name}={lvl}: {rk}"))
                .collect::<Vec<_>>()
                .join(", ");
            let _ = write!(out, "   | d_{} rank {} ({per})", page.r, page.d_rank);
        }
        if !page.induced_levels.is_empty() {
            let lv = page
                .induced_levels
                .iter()
                .map(|(lvl, n)| format!("{other_name}={lvl} x{n}"))
                .collect::<Vec<_>>()
                .join(", ");
            let _ = write!(out, "   | induced {other_name}-levels: {lv}");
        }
        let _ = writeln!(out);
    }
    let lv = report
        .total_levels
        .iter()
        .map(|(lvl, n)| format!("{other_name}={lvl} x{n}"))
        .collect::<Vec<_>>()
        .join(", ");
    let _ = writeln!(
        out,
        "total homology: rank {}   induced {other_name}-levels: {}",
        report.total_rank,
        if lv.is_empty() { "-".into() } else { lv }
    );
    out
}

// ---- family ----------------------------------------------------------------

fn parse_range(text: &str) -> Result<Vec<usize>> {
    let text = text.trim();
    if let Some((a, b)) = text.split_once("..") {
        let a: usize = a.trim().parse().context("range start")?;
        let b = b.trim().strip_prefix('=').unwrap_or(b.trim());
        let b: usize = b.parse().context("range end")?;
        if b < a {
            bail!("empty range {text}");
        }
        Ok((a..=b).collect())
    } else {
        Ok(vec![text.parse().context("range value")?])
    }
}

fn expand_template(template: &str, r: usize) -> Result<Vec<i32>> {
    let mut letters = Vec::new();
    for token in template.split(',') {
        let token = token.trim();
        if token.is_empty() {
            bail!("empty letter in template {template:?}");
        }
        let (letter, count) = match token.split_once('*') {
            None => (token, 1),
            Some((l, c)) => {
                let c = c.trim();
                let count = if c == "{r}" {
                    r
                } else {
                    c.parse().with_context(|| format!("repeat count {c:?}"))?
                };
                (l.trim(), count)
            }
        };
        let v: i32 = letter
            .parse()
            .with_context(|| format!("letter {letter:?}"))?;
        letters.extend(std::iter::repeat_n(v, count));
    }
    Ok(letters)
}

fn template_word(template: &str, r: usize, strands: Option<usize>) -> Result<BraidWord> {
    let letters = expand_template(template, r)?;
    let strands = strands.unwrap_or_else(|| {
        letters
            .iter()
            .map(|l| l.unsigned_abs() as usize)
            .max()
            .unwrap_or(0)
            + 1
    });
    Ok(BraidWord::new(letters, strands)?)
}

fn cmd_family(template: &str, range: &str, strands: Option<usize>, json: bool) -> Result<()> {
    let rs = parse_range(range)?;
    let words = rs
        .iter()
        .map(|&r| template_word(template, r, strands))
        .collect::<Result<Vec<_>>>()?;
    // Members run concurrently; reports come back in input order.
    let reports = khtight::par::map_vec(words, |w| tightness_verdict(&w));
    if json {
        let rows: Vec<_> = rs
            .iter()
            .zip(&reports)
            .map(|(&r, report)| json!({ "r": r, "report": report }))
            .collect();
        println!(
            "{}",
            serde_json::to_string_pretty(&json!({
                "template": template,
                "reports": rows,
            }))?
        );
        return Ok(());
    }
    println!(
        "{:>4} {:>4} {:>4} {:>6} {:>5} {:>5} {:>5} {:>9} {:>5} {:<16} braid",
        "r", "sl", "s", "sigma", "det", "rank", "thin", "collapse", "psi", "verdict"
    );
    for (&r, report) in rs.iter().zip(&reports) {
        println!(
            "{:>4} {:>4} {:>4} {:>6} {:>5} {:>5} {:>5} {:>9} {:>5} {:<16} {}",
            r,
            report.sl,
            opt(&report.s),
            opt(&report.sigma),
            report.det,
            opt(&report.kh_rank),
            report.thin,
            report.collapse,
            opt(&report.psi_nonzero),
            report.verdict.to_string(),
            report.braid
        );
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn template_expansion() {
        assert_eq!(
            expand_template("-1*{r},2,1,1,1,2", 3).unwrap(),
            vec![-1, -1, -1, 2, 1, 1, 1, 2]
        );
        assert_eq!(expand_template("-1*{r}", 0).unwrap(), Vec::<i32>::new());
        assert_eq!(expand_template("2*3", 0).unwrap(), vec![2, 2, 2]);
        assert!(expand_template("x,1", 1).is_err());
        assert!(expand_template("1,,2", 1).is_err());
    }

    #[test]
    fn range_parsing() {
        assert_eq!(parse_range("3..8").unwrap(), vec![3, 4, 5, 6, 7, 8]);
        assert_eq!(parse_range("3..=8").unwrap(), vec![3, 4, 5, 6, 7, 8]);
        assert_eq!(parse_range("5").unwrap(), vec![5]);
        assert!(parse_range("8..3").is_err());
        assert!(parse_range("a..b").is_err());
    }

    #[test]
    fn vector_rendering() {
        assert_eq!(render_vector(&[-1, 0, -1, 0, 1]), "-e1-e3+e5");
        assert_eq!(render_vector(&[0, 0]), "0");
        assert_eq!(render_vector(&[2, -3]), "2e1-3e2");
    }
}

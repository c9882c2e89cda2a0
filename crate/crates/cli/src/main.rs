use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use ddr::complex::{chain_map_check, induced_map_rank, presentation_stability, weight_truncate};
use ddr::derham::{
    a1_invariance_check, amitsur_vs_derham, cartier_check, completion_fibre_report, cotangent_complex, derham_raw_report,
    derham_report,
};
use ddr::dg::{koszul_over_quotient, parse_presentation, tower_map_over_quotient, DGPresentation};
use ddr::error::{Error, ParseError, StructureError};
use ddr::groebner::{annihilator_chain, buchberger, colon_principal, MonomialOrder};
use ddr::parse::parse_poly;
use ddr::reiffen::{classical_stalk_cohomology, divergence_system, family_scan, solve_system, DEFAULT_UNKNOWN_CAP};
use ddr::witness::{nonexactness_witness, DEFAULT_GRID, DEFAULT_PRECISION};
use ddr::{Poly, VarContext};

const DEFAULT_TRUNCATE: u32 = 6;
const DEFAULT_HODGE: u32 = 3;
const DEFAULT_DEGREE: u32 = 8;

/// Exact computations with derived de Rham complexes of polynomial algebras.
#[derive(Parser, Debug)]
#[command(name = "ddr", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Hodge-truncated derived de Rham cohomology of a presentation
    Derham {
        #[command(flatten)]
        input: PresentationArgs,
        #[arg(long)]
        hodge: Option<u32>,
        #[arg(long)]
        truncate: Option<u32>,
        /// Report the cohomology of the single stage instead of its image
        /// from the next stage
        #[arg(long)]
        raw: bool,
    },
    /// Cotangent complex of a presentation
    Cotangent {
        #[command(flatten)]
        input: PresentationArgs,
        #[arg(long)]
        truncate: Option<u32>,
    },
    /// Compare gr^k of the de Rham complex with the k-th wedge power of the cotangent complex
    Cartier {
        #[command(flatten)]
        input: PresentationArgs,
        /// Graded pieces to compare
        #[arg(long = "k", value_delimiter = ',', default_value = "0,1,2,3")]
        ks: Vec<usize>,
        #[arg(long)]
        truncate: Option<u32>,
    },
    /// Koszul presentation and its weight-truncated cohomology
    Koszul {
        #[command(flatten)]
        input: PresentationArgs,
        #[arg(long)]
        truncate: Option<u32>,
    },
    /// Transition map K_N -> K_n of the Koszul tower
    Tower {
        #[arg(long, value_delimiter = ',')]
        vars: Vec<String>,
        #[arg(long, value_delimiter = ',')]
        gens: Vec<String>,
        #[arg(long, value_delimiter = ',')]
        relations: Vec<String>,
        #[arg(long = "from")]
        big: u32,
        #[arg(long = "to")]
        small: u32,
        #[arg(long)]
        truncate: Option<u32>,
    },
    /// Totalization of the Amitsur complex of A -> A/(f) against derived de Rham cohomology
    AmitsurCompare {
        #[arg(long, value_delimiter = ',')]
        vars: Vec<String>,
        #[arg(long)]
        f: String,
        #[arg(long, default_value_t = 3)]
        pmax: usize,
        #[arg(long)]
        hodge: Option<u32>,
        #[arg(long)]
        truncate: Option<u32>,
    },
    /// Ideal computations
    Ideal {
        #[command(subcommand)]
        command: IdealCommand,
    },
    /// Divergence-equation feasibility for hypersurfaces
    Reiffen {
        #[command(subcommand)]
        command: ReiffenCommand,
    },
    /// Classical de Rham stalk cohomology of the zero set of an ideal
    Stalk {
        #[arg(long, value_delimiter = ',')]
        vars: Vec<String>,
        #[arg(long, value_delimiter = ',')]
        gens: Vec<String>,
        #[arg(long)]
        truncate: Option<u32>,
    },
    /// Log-domain positivity witness for the flat counterexample
    Witness {
        #[arg(long, default_value_t = 3)]
        nmax: u64,
        #[arg(long = "precision-bits", default_value_t = DEFAULT_PRECISION)]
        precision_bits: usize,
        #[arg(long, default_value_t = DEFAULT_GRID)]
        grid: usize,
    },
    /// Cohomology tables for I^inf Omega -> Omega -> dR with I = (f)
    FibreReport {
        #[arg(long, value_delimiter = ',')]
        vars: Vec<String>,
        #[arg(long)]
        f: String,
        #[arg(long)]
        hodge: Option<u32>,
        #[arg(long)]
        truncate: Option<u32>,
    },
    /// Compare de Rham cohomology before and after adjoining a free variable
    A1Check {
        #[command(flatten)]
        input: PresentationArgs,
        #[arg(long)]
        hodge: Option<u32>,
        #[arg(long)]
        truncate: Option<u32>,
    },
}

#[derive(Subcommand, Debug)]
enum IdealCommand {
    /// Reduced Gröbner basis
    Gb {
        #[arg(long, value_delimiter = ',')]
        vars: Vec<String>,
        #[arg(long, value_delimiter = ',')]
        gens: Vec<String>,
        #[arg(long, value_enum, default_value_t = Order::Grevlex)]
        order: Order,
    },
    /// Colon ideal (I : f)
    Colon {
        #[arg(long, value_delimiter = ',')]
        vars: Vec<String>,
        #[arg(long, value_delimiter = ',')]
        gens: Vec<String>,
        #[arg(long)]
        f: String,
    },
    /// Annihilator chain (I : f^n), n = 1..=nmax
    Annchain {
        #[arg(long, value_delimiter = ',')]
        vars: Vec<String>,
        #[arg(long, value_delimiter = ',')]
        gens: Vec<String>,
        #[arg(long)]
        f: String,
        #[arg(long, default_value_t = 4)]
        nmax: usize,
    },
}

#[derive(Subcommand, Debug)]
enum ReiffenCommand {
    /// Solve f*g = sum d_i(f*h_i) up to degree D
    Check {
        #[arg(long, value_delimiter = ',', default_value = "x,y")]
        vars: Vec<String>,
        #[arg(long)]
        f: String,
        #[arg(long, default_value = "1")]
        g: String,
        #[arg(long, default_value_t = DEFAULT_DEGREE)]
        degree: u32,
        /// Print the equations left after propagating forced zeros
        #[arg(long)]
        rows: bool,
        #[arg(long, default_value_t = DEFAULT_UNKNOWN_CAP)]
        cap: usize,
    },
    /// Verdicts for x^q + y^p + y^(p-1)*x over 4 <= q <= qmax, q < p <= pmax
    Scan {
        #[arg(long)]
        qmax: u32,
        #[arg(long)]
        pmax: u32,
        #[arg(long)]
        degree: Option<u32>,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Order {
    Grevlex,
    Lex,
}

/// A presentation from a file or from generators of a Koszul algebra.
#[derive(Args, Debug)]
struct PresentationArgs {
    /// Presentation file
    #[arg(long, conflicts_with_all = ["vars", "gens"])]
    file: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    vars: Vec<String>,
    /// Elements killed by the Koszul generators
    #[arg(long, value_delimiter = ',')]
    gens: Vec<String>,
    /// Koszul stage n: the generators bound the n-th powers
    #[arg(long, default_value_t = 1)]
    power: u32,
    /// Relations of the ambient ring
    #[arg(long, value_delimiter = ',')]
    relations: Vec<String>,
}

struct Loaded {
    presentation: DGPresentation,
    truncate: Option<u32>,
    hodge: Option<u32>,
    source: String,
}

fn context(vars: &[String]) -> Result<VarContext, Error> {
    if vars.is_empty() {
        return Err(StructureError::InvalidArgument("--vars is required".into()).into());
    }
    Ok(VarContext::new(vars.iter().map(|v| v.trim().to_string())))
}

fn polys(texts: &[String], vars: &VarContext) -> Result<Vec<Poly>, Error> {
    texts.iter().map(|t| Ok(parse_poly(t, vars)?)).collect()
}

impl PresentationArgs {
    fn load(&self) -> Result<Loaded, Error> {
        if let Some(path) = &self.file {
            let text = std::fs::read_to_string(path)
                .map_err(|e| StructureError::InvalidArgument(format!("cannot read {}: {e}", path.display())))?;
            let file = parse_presentation(&text).map_err(|e| annotate(e, path))?;
            return Ok(Loaded {
                presentation: file.presentation,
                truncate: file.truncate,
                hodge: file.hodge,
                source: format!("file={}", path.display()),
            });
        }
        let vars = context(&self.vars)?;
        let gens = polys(&self.gens, &vars)?;
        let relations = polys(&self.relations, &vars)?;
        let presentation = koszul_over_quotient(&vars, &relations, &gens, self.power)?;
        let mut source = format!("vars={} gens={} power={}", self.vars.join(","), self.gens.join(","), self.power);
        if !relations.is_empty() {
            write!(source, " relations={}", self.relations.join(",")).expect("write");
        }
        Ok(Loaded { presentation, truncate: None, hodge: None, source })
    }
}

fn annotate(e: ParseError, path: &std::path::Path) -> Error {
    StructureError::InvalidArgument(format!("{}: {e}", path.display())).into()
}

fn header(cmd: &str, params: &str) -> String {
    format!("# ddr {cmd}\n# params: {params}\n")
}

fn run(cli: Cli) -> Result<String, Error> {
    let out = match cli.command {
        Command::Derham { input, hodge, truncate, raw } => {
            let l = input.load()?;
            let k = hodge.or(l.hodge).unwrap_or(DEFAULT_HODGE);
            let w = truncate.or(l.truncate).unwrap_or(DEFAULT_TRUNCATE);
            let mut out = header("derham", &format!("{} hodge={k} truncate={w} raw={raw}", l.source));
            let report = if raw { derham_raw_report(&l.presentation, k, w)? } else { derham_report(&l.presentation, k, w)? };
            out += &report.to_string();
            out
        }
        Command::Cotangent { input, truncate } => {
            let l = input.load()?;
            let w = truncate.or(l.truncate).unwrap_or(DEFAULT_TRUNCATE);
            let mut out = header("cotangent", &format!("{} truncate={w}", l.source));
            let cot = cotangent_complex(&l.presentation)?;
            for (i, letter) in cot.letters.iter().enumerate() {
                writeln!(out, "d({}) = {}", letter.name, cot.display_differential(i)).expect("write");
            }
            let at = |w| cot.complex(w).map(|c| c.cohomology());
            out += &ddr::complex::CohomologyReport::compare(&at(w)?, &at(w + 1)?).to_string();
            out
        }
        Command::Cartier { input, ks, truncate } => {
            let l = input.load()?;
            let w = truncate.or(l.truncate).unwrap_or(DEFAULT_TRUNCATE);
            let ks_text: Vec<String> = ks.iter().map(usize::to_string).collect();
            let mut out = header("cartier", &format!("{} k={} truncate={w}", l.source, ks_text.join(",")));
            for k in ks {
                out += &cartier_check(&l.presentation, k, w)?.to_string();
            }
            out
        }
        Command::Koszul { input, truncate } => {
            let l = input.load()?;
            let w = truncate.or(l.truncate).unwrap_or(DEFAULT_TRUNCATE);
            let mut out = header("koszul", &format!("{} truncate={w}", l.source));
            for line in l.presentation.to_interchange().lines() {
                writeln!(out, "# {line}").expect("write");
            }
            out += &presentation_stability(&l.presentation, w)?.to_string();
            out
        }
        Command::Tower { vars, gens, relations, big, small, truncate } => {
            let ctx = context(&vars)?;
            let s = polys(&gens, &ctx)?;
            let rel = polys(&relations, &ctx)?;
            let w = truncate.unwrap_or(DEFAULT_TRUNCATE);
            let mut params = format!("vars={} gens={} from={big} to={small} truncate={w}", vars.join(","), gens.join(","));
            if !rel.is_empty() {
                write!(params, " relations={}", relations.join(",")).expect("write");
            }
            let mut out = header("tower", &params);
            let phi = tower_map_over_quotient(&ctx, &rel, &s, big, small)?;
            writeln!(out, "chain_map={}", chain_map_check(&phi, w)?).expect("write");
            let src = weight_truncate(&phi.source, w)?;
            for n in src.degrees() {
                writeln!(out, "H^{{{n}}} induced_rank={}", induced_map_rank(&phi, w, n)?).expect("write");
            }
            out
        }
        Command::AmitsurCompare { vars, f, pmax, hodge, truncate } => {
            let ctx = context(&vars)?;
            let f_poly = parse_poly(&f, &ctx)?;
            let k = hodge.unwrap_or(DEFAULT_HODGE);
            let w = truncate.unwrap_or(DEFAULT_TRUNCATE);
            let mut out = header("amitsur-compare", &format!("vars={} f={f} pmax={pmax} hodge={k} truncate={w}", vars.join(",")));
            out += &amitsur_vs_derham(&f_poly, pmax, k, w)?.to_string();
            out
        }
        Command::Ideal { command } => run_ideal(command)?,
        Command::Reiffen { command } => run_reiffen(command)?,
        Command::Stalk { vars, gens, truncate } => {
            let ctx = context(&vars)?;
            let g = polys(&gens, &ctx)?;
            let w = truncate.unwrap_or(DEFAULT_TRUNCATE);
            let mut out = header("stalk", &format!("vars={} gens={} truncate={w}", vars.join(","), gens.join(",")));
            out += &classical_stalk_cohomology(&g, w)?.to_string();
            out
        }
        Command::Witness { nmax, precision_bits, grid } => {
            let mut out = header("witness", &format!("nmax={nmax} precision-bits={precision_bits} grid={grid}"));
            out += &nonexactness_witness(nmax, precision_bits, grid)?.to_string();
            out
        }
        Command::FibreReport { vars, f, hodge, truncate } => {
            let ctx = context(&vars)?;
            let f_poly = parse_poly(&f, &ctx)?;
            let k = hodge.unwrap_or(DEFAULT_HODGE);
            let w = truncate.unwrap_or(DEFAULT_TRUNCATE);
            let mut out = header("fibre-report", &format!("vars={} f={f} hodge={k} truncate={w}", vars.join(",")));
            out += &completion_fibre_report(&f_poly, k, w)?.to_string();
            out
        }
        Command::A1Check { input, hodge, truncate } => {
            let l = input.load()?;
            let k = hodge.or(l.hodge).unwrap_or(DEFAULT_HODGE);
            let w = truncate.or(l.truncate).unwrap_or(DEFAULT_TRUNCATE);
            let mut out = header("a1-check", &format!("{} hodge={k} truncate={w}", l.source));
            out += &a1_invariance_check(&l.presentation, k, w)?.to_string();
            out
        }
    };
    Ok(out)
}

fn run_ideal(command: IdealCommand) -> Result<String, Error> {
    let mut out;
    match command {
        IdealCommand::Gb { vars, gens, order } => {
            let ctx = context(&vars)?;
            let g = polys(&gens, &ctx)?;
            let (mo, name) = match order {
                Order::Grevlex => (MonomialOrder::grevlex(ctx.len()), "grevlex"),
                Order::Lex => (MonomialOrder::lex(ctx.len()), "lex"),
            };
            out = header("ideal gb", &format!("vars={} gens={} order={name}", vars.join(","), gens.join(",")));
            writeln!(out, "gb={}", buchberger(&g, &ctx, &mo)?).expect("write");
        }
        IdealCommand::Colon { vars, gens, f } => {
            let ctx = context(&vars)?;
            let g = polys(&gens, &ctx)?;
            let f_poly = parse_poly(&f, &ctx)?;
            out = header("ideal colon", &format!("vars={} gens={} f={f}", vars.join(","), gens.join(",")));
            let gi = buchberger(&g, &ctx, &MonomialOrder::grevlex(ctx.len()))?;
            writeln!(out, "colon={}", colon_principal(&gi, &f_poly)?).expect("write");
        }
        IdealCommand::Annchain { vars, gens, f, nmax } => {
            let ctx = context(&vars)?;
            let g = polys(&gens, &ctx)?;
            let f_poly = parse_poly(&f, &ctx)?;
            out = header("ideal annchain", &format!("vars={} gens={} f={f} nmax={nmax}", vars.join(","), gens.join(",")));
            let chain = annihilator_chain(&g, &f_poly, nmax, &ctx)?;
            for (i, c) in chain.chain.iter().enumerate() {
                writeln!(out, "n={} colon={c}", i + 1).expect("write");
            }
            match chain.stabilization {
                Some(s) => writeln!(out, "stab={s}").expect("write"),
                None => writeln!(out, "stab=none").expect("write"),
            }
        }
    }
    Ok(out)
}

fn run_reiffen(command: ReiffenCommand) -> Result<String, Error> {
    let mut out;
    match command {
        ReiffenCommand::Check { vars, f, g, degree, rows, cap } => {
            let ctx = context(&vars)?;
            let f_poly = parse_poly(&f, &ctx)?;
            let g_poly = parse_poly(&g, &ctx)?;
            out = header("reiffen check", &format!("vars={} f={f} g={g} degree={degree}", vars.join(",")));
            let system = divergence_system(&f_poly, &g_poly, degree)?;
            writeln!(out, "# unknowns={} rows={}", system.unknowns.len(), system.rows.len()).expect("write");
            if rows {
                let (zeros, reduced) = system.forced_zero_view();
                let names: Vec<&str> = zeros.iter().map(|j| system.labels[*j].as_str()).collect();
                writeln!(out, "# forced zero: {}", names.join(" ")).expect("write");
                for r in &reduced {
                    writeln!(out, "# row {}", r.display(&system.labels)).expect("write");
                }
            }
            let verdict = solve_system(&system, cap);
            if verdict.is_feasible() {
                writeln!(out, "# feasible up to degree {degree} only; inconclusive for the full equation").expect("write");
            }
            writeln!(out, "{verdict}").expect("write");
        }
        ReiffenCommand::Scan { qmax, pmax, degree } => {
            let d = degree.unwrap_or(pmax + 4);
            out = header("reiffen scan", &format!("qmax={qmax} pmax={pmax} degree={d}"));
            for cell in family_scan(qmax, pmax, d)? {
                writeln!(out, "{cell}").expect("write");
            }
        }
    }
    Ok(out)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

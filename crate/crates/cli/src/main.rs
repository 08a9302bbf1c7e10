//! `rem` — relational e-matching from the command line.
//!
//! Exit codes: 0 success, 1 usage or I/O trouble, 2 malformed input
//! (patterns, rules, e-graph files), 3 the two engines disagreed.

use clap::{Parser, Subcommand, ValueEnum};
use std::io::Read;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use rem_core::{
    bt_ematch, from_json, parse_lines, parse_pattern, parse_patterns, parse_rules, parse_term,
    run_bench_engines, saturate, to_json, write_csv, BenchEngines, EGraph, Engine, Error,
    MatchOptions, MatchSet, SaturateOptions, VariableOrdering,
};

#[derive(Parser)]
#[command(name = "rem", version, about = "Relational e-matching over e-graphs")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum EngineChoice {
    /// Generic join over trie indices.
    Gj,
    /// Classic backtracking e-matcher.
    Em,
    /// Run both and fail (exit 3) if they disagree.
    Both,
}

impl std::fmt::Display for EngineChoice {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            EngineChoice::Gj => "gj",
            EngineChoice::Em => "em",
            EngineChoice::Both => "both",
        })
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Match a pattern (or a simultaneous multi-pattern) against an e-graph.
    ///
    /// Prints one line per match, `root=ID ?var=ID ...`, sorted.
    Match {
        /// E-graph JSON file (`-` for stdin).
        #[arg(short = 'g', long)]
        egraph: PathBuf,
        /// Pattern like `(f ?x (g ?x))`, or `((f ?x ?y) (g ?x))` to match
        /// several patterns simultaneously.
        #[arg(short, long)]
        pattern: String,
        #[arg(long, value_enum, default_value = "both")]
        engine: EngineChoice,
        /// Force a join variable ordering, e.g. `?x,$0,root`; `+` batches
        /// variables into one level (`?y+?z`). Generic join only.
        #[arg(long)]
        ordering: Option<String>,
        /// Compile even flat patterns instead of scanning.
        #[arg(long)]
        no_fast_path: bool,
    },
    /// Time the engines over a file of patterns and emit CSV.
    Bench {
        /// E-graph JSON file (`-` for stdin).
        #[arg(short = 'g', long)]
        egraph: PathBuf,
        /// One pattern per line; `#` or `;` comments.
        #[arg(short, long)]
        patterns: PathBuf,
        /// Engines to time; with both, results are cross-checked.
        #[arg(long, value_enum, value_delimiter = ',', default_values_t = [EngineChoice::Gj, EngineChoice::Em])]
        engines: Vec<EngineChoice>,
        /// Repetitions per measurement; the fastest is reported.
        #[arg(long, default_value_t = 3)]
        repeat: usize,
        /// CSV destination (stdout if omitted).
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Generate the worst-case f/g family with N constants as JSON.
    GenFgn {
        n: usize,
        /// Destination (stdout if omitted).
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Apply rewrite rules until fixpoint or a budget, then dump the e-graph.
    Saturate {
        /// Starting e-graph JSON file (`-` for stdin).
        #[arg(short = 'g', long)]
        egraph: Option<PathBuf>,
        /// Ground terms to add before saturating, one per line.
        #[arg(short, long)]
        terms: Option<PathBuf>,
        /// Rules file: `name: lhs => rhs` per line.
        #[arg(short, long)]
        rules: PathBuf,
        #[arg(long, default_value_t = 30)]
        max_iterations: usize,
        #[arg(long, default_value_t = 100_000)]
        max_nodes: usize,
        /// Destination for the saturated e-graph (stdout if omitted).
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}

fn exit_code_for(e: &Error) -> u8 {
    match e {
        Error::EngineDisagreement { .. } => 3,
        Error::Io(_) => 1,
        _ => 2,
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.cmd {
        Cmd::Match { egraph, pattern, engine, ordering, no_fast_path } => {
            let eg = read_egraph(&egraph)?;
            let patterns = parse_patterns(&pattern)?;
            let opts = MatchOptions {
                ordering: ordering.as_deref().map(VariableOrdering::parse).transpose()?,
                no_fast_path,
            };
            if engine != EngineChoice::Gj && (opts.ordering.is_some() || no_fast_path) {
                return Err(Error::InvalidOrdering(
                    "--ordering/--no-fast-path require --engine gj".into(),
                ));
            }
            let ms = match engine {
                EngineChoice::Gj => Engine::new(&eg)?.ematch(&eg, &patterns, &opts)?,
                EngineChoice::Em => bt_ematch(&eg, &patterns)?,
                EngineChoice::Both => {
                    let gj = Engine::new(&eg)?.ematch(&eg, &patterns, &opts)?;
                    let em = bt_ematch(&eg, &patterns)?;
                    if !gj.same_matches(&em) {
                        return Err(Error::EngineDisagreement {
                            pattern: patterns
                                .iter()
                                .map(ToString::to_string)
                                .collect::<Vec<_>>()
                                .join(" "),
                            diff: gj.diff(&em, 5),
                        });
                    }
                    gj
                }
            };
            print_matches(&ms);
            Ok(())
        }
        Cmd::Bench { egraph, patterns, engines, repeat, csv } => {
            let eg = read_egraph(&egraph)?;
            let text = read_to_string(&patterns)?;
            let pats = parse_lines(&text, parse_pattern)?;
            let both = EngineChoice::Both;
            let want_gj = engines.contains(&EngineChoice::Gj) || engines.contains(&both);
            let want_em = engines.contains(&EngineChoice::Em) || engines.contains(&both);
            let selected = match (want_gj, want_em) {
                (true, true) => BenchEngines::Both,
                (true, false) => BenchEngines::Gj,
                (false, true) => BenchEngines::Em,
                (false, false) => unreachable!("clap guarantees at least one engine"),
            };
            let records = run_bench_engines(&eg, &pats, repeat.max(1), selected)?;
            match csv {
                Some(path) => write_csv(&records, std::fs::File::create(path)?)?,
                None => write_csv(&records, std::io::stdout().lock())?,
            }
            Ok(())
        }
        Cmd::GenFgn { n, out } => {
            let eg = rem_core::gen_fgn(n);
            write_output(out.as_deref(), &to_json(&eg)?)
        }
        Cmd::Saturate { egraph, terms, rules, max_iterations, max_nodes, out } => {
            let mut eg = match &egraph {
                Some(path) => read_egraph(path)?,
                None => EGraph::new(),
            };
            if egraph.is_none() && terms.is_none() {
                return Err(Error::InvalidOrdering(
                    "saturate needs --egraph and/or --terms".into(),
                ));
            }
            if let Some(path) = &terms {
                let text = read_to_string(path)?;
                for term in parse_lines(&text, parse_term)? {
                    rem_core::add_term(&mut eg, &term)?;
                }
                eg.rebuild();
            }
            let ruleset = parse_rules(&read_to_string(&rules)?)?;
            let opts = SaturateOptions { max_iterations, max_nodes };
            let report = saturate(&mut eg, &ruleset, &opts)?;
            eprintln!(
                "saturation: {:?} after {} iteration(s); {} nodes, {} classes, \
                 {} unions, {} matches",
                report.stopped,
                report.iterations,
                report.n_nodes,
                report.n_classes,
                report.unions_applied,
                report.matches_found,
            );
            write_output(out.as_deref(), &to_json(&eg)?)
        }
    }
}

fn print_matches(ms: &MatchSet) {
    use std::io::Write;
    let stdout = std::io::stdout();
    let mut w = stdout.lock();
    for row in ms.sorted_rows() {
        let line = ms
            .head()
            .iter()
            .zip(row)
            .map(|(v, id)| format!("{v}={id}"))
            .collect::<Vec<_>>()
            .join(" ");
        let _ = writeln!(w, "{line}");
    }
    eprintln!("{} match(es)", ms.len());
}

fn read_egraph(path: &Path) -> Result<EGraph, Error> {
    from_json(&read_to_string(path)?)
}

fn read_to_string(path: &Path) -> Result<String, Error> {
    if path == Path::new("-") {
        let mut buf = String::new();
        std::io::stdin().read_to_string(&mut buf)?;
        Ok(buf)
    } else {
        Ok(std::fs::read_to_string(path)?)
    }
}

fn write_output(path: Option<&Path>, content: &str) -> Result<(), Error> {
    match path {
        Some(p) => std::fs::write(p, content.as_bytes())?,
        None => println!("{content}"),
    }
    Ok(())
}

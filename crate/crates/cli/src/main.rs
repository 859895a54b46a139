//! `pathlen-census`: command-line access to tree counts, constructions and
//! LZ78 universal types. Every command prints one JSON document (or CSV for
//! `table --format csv`) to stdout.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};

use pathlen_core::constructions::{
    build_minimal_tree, family_for_path_length, make_tree, minimal_tree_for_nodes, Beta,
    FamilySearch,
};
use pathlen_core::counting::{build_table, load_or_build, ratio_rows, theorem1_ratio};
use pathlen_core::formulas::{max_nodes_for_path_length, min_profile, p_min, stirling_scan};
use pathlen_core::lz78::{self, Sequence};
use pathlen_core::tree::{for_each_canonical, DEFAULT_ENUMERATION_CAP};
use pathlen_core::{CanonicalForm, CountTable, Error};

const TOOL: &str = "pathlen-census";
const SCHEMA: &str = "v1";

#[derive(Parser)]
#[command(name = TOOL, version, about = "Count and build t-ary trees by path length")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// T_t(p) with its per-node-count breakdown
    Count {
        #[arg(long)]
        t: usize,
        #[arg(long)]
        p: usize,
        #[arg(long)]
        cache: Option<PathBuf>,
    },
    /// T_t(p) and the growth ratio for every p up to a limit
    Table {
        #[arg(long)]
        t: usize,
        #[arg(long)]
        p_max: usize,
        #[arg(long)]
        cache: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// ln T_t(p) against the leading-order prediction on a grid of p
    Asymptotics {
        #[arg(long)]
        t: usize,
        #[arg(long, value_delimiter = ',', required = true)]
        p_grid: Vec<usize>,
    },
    /// Tree of least path length with a given number of leaves or nodes
    Mintree(MintreeArgs),
    /// Some [t,n,p] tree
    Maketree {
        #[arg(long)]
        t: usize,
        #[arg(long)]
        nodes: usize,
        #[arg(long)]
        p: usize,
    },
    /// Permutation family of distinct trees sharing one path length
    Family {
        #[arg(long)]
        t: usize,
        #[arg(long)]
        p: usize,
        /// filler size multiplier, an integer or a fraction such as 7/2
        #[arg(long)]
        beta: Option<String>,
        /// number of member trees to print
        #[arg(long, default_value_t = 1)]
        emit: usize,
    },
    #[command(subcommand)]
    Lz78(Lz78Command),
    /// Exhaustive (n, p) counts by enumeration
    Oracle {
        #[arg(long)]
        t: usize,
        #[arg(long)]
        max_n: usize,
    },
    /// C_t(n) n^(3/2) exp(-h(1/t) t n) over a range of n
    Stirling {
        #[arg(long)]
        t: usize,
        #[arg(long)]
        n_max: usize,
        #[arg(long, default_value_t = 10)]
        n_min: usize,
    },
}

#[derive(Args)]
struct MintreeArgs {
    #[arg(long)]
    t: usize,
    #[arg(long, required_unless_present = "nodes", conflicts_with = "nodes")]
    leaves: Option<usize>,
    #[arg(long)]
    nodes: Option<usize>,
}

#[derive(Subcommand)]
enum Lz78Command {
    /// Parse one sequence
    Parse {
        #[arg(long)]
        t: usize,
        /// letters mapped to symbols 0, 1, ...; without it SEQ is comma-separated integers
        #[arg(long)]
        alphabet: Option<String>,
        seq: String,
    },
    /// Distinct universal types among all exactly parsed sequences of a length
    Census {
        #[arg(long)]
        t: usize,
        #[arg(long)]
        len: usize,
    },
    /// Group the sequences of a file (one per line) by universal type
    Classify {
        #[arg(long)]
        t: usize,
        #[arg(long)]
        alphabet: Option<String>,
        #[arg(long)]
        input: PathBuf,
        /// reject sequences of differing lengths
        #[arg(long)]
        equal_length: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::ResourceLimit(_) => 3,
        Error::Invariant(_) => 5,
        Error::Io(_) | Error::Json(_) => 1,
        Error::FormatVersion { .. } | Error::Checksum { .. } | Error::CorruptTable(_) => 1,
        _ => 4,
    }
}

/// Rounds every float in the document to 12 significant digits.
fn round_reals(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = n.as_f64().unwrap_or_default();
            let rounded: f64 = format!("{x:.11e}").parse().unwrap_or(x);
            *v = json!(rounded);
        }
        Value::Array(items) => items.iter_mut().for_each(round_reals),
        Value::Object(map) => map.values_mut().for_each(round_reals),
        _ => {}
    }
}

fn document(command: &str, body: Value) -> String {
    let mut doc = Map::new();
    doc.insert("tool".into(), json!(TOOL));
    doc.insert("schema".into(), json!(SCHEMA));
    doc.insert("command".into(), json!(command));
    if let Value::Object(fields) = body {
        doc.extend(fields);
    }
    let mut doc = Value::Object(doc);
    round_reals(&mut doc);
    serde_json::to_string_pretty(&doc).expect("document serializes")
}

fn table_for(t: usize, p: usize, cache: Option<&PathBuf>) -> Result<CountTable, Error> {
    match cache {
        Some(path) => Ok(load_or_build(path, t, p)?.0),
        None => build_table(t, p),
    }
}

fn ratio_or_null(table: &CountTable, p: usize) -> Value {
    theorem1_ratio(table, p).map_or(Value::Null, |r| json!(r))
}

fn read_sequence(text: &str, t: usize, alphabet: Option<&str>) -> Result<Sequence, Error> {
    match alphabet {
        Some(a) => {
            let seq = Sequence::from_alphabet(text, a)?;
            if seq.t() != t {
                return Err(Error::Precondition(format!(
                    "alphabet {a:?} has {} letters but --t is {t}",
                    seq.t()
                )));
            }
            Ok(seq)
        }
        None => Sequence::from_integers(text, t),
    }
}

fn render_symbols(symbols: &[u32], alphabet: Option<&str>) -> Value {
    match alphabet {
        Some(a) => {
            let letters: Vec<char> = a.chars().collect();
            json!(symbols.iter().map(|&s| letters[s as usize]).collect::<String>())
        }
        None => json!(symbols),
    }
}

fn run(command: Command) -> Result<String, Error> {
    Ok(match command {
        Command::Count { t, p, cache } => {
            let table = table_for(t, p, cache.as_ref())?;
            let breakdown: Vec<Value> = table
                .breakdown(p)?
                .into_iter()
                .map(|(n, c)| json!({"n": n, "count": c.to_string()}))
                .collect();
            document(
                "count",
                json!({
                    "t": t,
                    "p": p,
                    "count": table.count_p(p)?.to_string(),
                    "n_max": max_nodes_for_path_length(t, p),
                    "breakdown": breakdown,
                }),
            )
        }
        Command::Table {
            t,
            p_max,
            cache,
            format,
        } => {
            let table = table_for(t, p_max, cache.as_ref())?;
            match format {
                Format::Csv => {
                    let mut out = String::from("p,count,ratio\n");
                    for p in 0..=p_max {
                        let ratio = theorem1_ratio(&table, p)
                            .map(|r| format!("{r:.11e}").parse::<f64>().unwrap_or(r).to_string())
                            .unwrap_or_default();
                        out.push_str(&format!("{p},{},{ratio}\n", table.count_p(p)?));
                    }
                    out.pop();
                    out
                }
                Format::Json => {
                    let rows = (0..=p_max)
                        .map(|p| {
                            Ok(json!({
                                "p": p,
                                "count": table.count_p(p)?.to_string(),
                                "ratio": ratio_or_null(&table, p),
                            }))
                        })
                        .collect::<Result<Vec<_>, Error>>()?;
                    document("table", json!({"t": t, "p_max": p_max, "rows": rows}))
                }
            }
        }
        Command::Asymptotics { t, p_grid } => {
            let hi = p_grid.iter().copied().max().unwrap_or(0);
            let table = build_table(t, hi)?;
            let rows = ratio_rows(&table, &p_grid)?;
            document("asymptotics", json!({"t": t, "rows": rows}))
        }
        Command::Mintree(MintreeArgs { t, leaves, nodes }) => match (leaves, nodes) {
            (Some(l), _) => {
                let result = min_profile(t, l)?;
                let tree = build_minimal_tree(t, l)?;
                document(
                    "mintree",
                    json!({"form": tree.encode(), "result": result}),
                )
            }
            (None, Some(n)) => {
                let tree = minimal_tree_for_nodes(t, n)?;
                let bound = p_min(t, n)?;
                document(
                    "mintree",
                    json!({
                        "form": tree.encode(),
                        "t": t,
                        "n": n,
                        "p_min": bound.p,
                        "mu": bound.mu,
                        "measure": tree.measure(),
                    }),
                )
            }
            (None, None) => unreachable!("clap requires one of --leaves, --nodes"),
        },
        Command::Maketree { t, nodes, p } => {
            let tree = make_tree(t, nodes, p)?;
            document(
                "maketree",
                json!({"t": t, "n": nodes, "p": p, "form": tree.encode()}),
            )
        }
        Command::Family { t, p, beta, emit } => {
            let beta = beta
                .map(|b| {
                    b.parse::<Beta>()
                        .ok()
                        .filter(|r| *r.numer() > 0)
                        .ok_or_else(|| Error::Precondition(format!("bad --beta {b:?}")))
                })
                .transpose()?;
            let search = family_for_path_length(t, p, beta)?;
            let mut body = json!({"search": search});
            if let FamilySearch::Found(family) = &search {
                let mut members = Vec::new();
                let mut report = Value::Null;
                for perm in family.permutations(emit.max(1)) {
                    let member = family.build(&perm)?;
                    if report.is_null() {
                        report = json!(member.report);
                    }
                    if members.len() < emit {
                        members.push(json!({"permutation": perm, "form": member.tree.encode()}));
                    }
                }
                body["report"] = report;
                body["members"] = json!(members);
            }
            document("family", body)
        }
        Command::Lz78(Lz78Command::Parse { t, alphabet, seq }) => {
            let alphabet = alphabet.as_deref();
            let sequence = read_sequence(&seq, t, alphabet)?;
            let result = lz78::parse(&sequence);
            let m = result.tree.measure();
            document(
                "lz78 parse",
                json!({
                    "t": t,
                    "length": sequence.len(),
                    "phrases": result.phrases.iter().map(|ph| render_symbols(ph, alphabet)).collect::<Vec<_>>(),
                    "residual": render_symbols(&result.residual, alphabet),
                    "exact": result.exact,
                    "type": result.tree.encode(),
                    "nodes": m.n,
                    "path_length": m.p,
                }),
            )
        }
        Command::Lz78(Lz78Command::Census { t, len }) => {
            let census = lz78::census(t, len)?;
            document("lz78 census", json!(census))
        }
        Command::Lz78(Lz78Command::Classify {
            t,
            alphabet,
            input,
            equal_length,
        }) => {
            let text = std::fs::read_to_string(&input)?;
            let corpus = text
                .lines()
                .map(|line| read_sequence(line.trim_end_matches('\r'), t, alphabet.as_deref()))
                .collect::<Result<Vec<_>, Error>>()?;
            let buckets: BTreeMap<CanonicalForm, Vec<usize>> =
                lz78::classify(&corpus, equal_length)?;
            let buckets: Vec<Value> = buckets
                .into_iter()
                .map(|(form, members)| json!({"type": form, "size": members.len(), "lines": members}))
                .collect();
            document(
                "lz78 classify",
                json!({"t": t, "sequences": corpus.len(), "types": buckets.len(), "buckets": buckets}),
            )
        }
        Command::Oracle { t, max_n } => {
            let mut counts: BTreeMap<(usize, usize), u64> = BTreeMap::new();
            for n in 1..=max_n {
                for_each_canonical(t, n, DEFAULT_ENUMERATION_CAP, |form| {
                    let p = CanonicalForm::stats_of(form).1;
                    *counts.entry((n, p)).or_default() += 1;
                })?;
            }
            let entries: Vec<Value> = counts
                .into_iter()
                .map(|((n, p), c)| json!({"n": n, "p": p, "count": c.to_string()}))
                .collect();
            document("oracle", json!({"t": t, "max_n": max_n, "entries": entries}))
        }
        Command::Stirling { t, n_max, n_min } => {
            let report = stirling_scan(t, n_min, n_max)?;
            let monotone = report.is_monotone_from(n_min);
            document(
                "stirling",
                json!({"report": report, "spread": report.c2 / report.c1, "monotone": monotone}),
            )
        }
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(out) => {
            // a closed pipe (e.g. `| head`) is not an error worth reporting
            let _ = writeln!(std::io::stdout().lock(), "{out}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{TOOL}: {}", e.to_string().replace('\n', " "));
            ExitCode::from(exit_code(&e))
        }
    }
}

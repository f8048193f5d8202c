use std::fs;
use std::io::Read;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use mutclass::poset::{build_universe_from, generate_seeds, Finiteness};
use mutclass::{
    build_hasse, build_hasse_partial, canonical_form, density_witness, is_avoiding, is_k_universal_bounded,
    is_mutation_acyclic, is_n_abundant, Budget, Cap, ClassSet, EmbedVerdict, Engine, ExchangeMatrix,
    FinitenessVerdict, MatrixJson, MutationSequence, PropertyVerdict, Status, Store, TopologyError, Universe,
    UniverseKind, Verdict,
};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "mutclass", version, about = "Mutation classes of quivers and exchange matrices")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    verb: Verb,
}

#[derive(Args)]
struct Global {
    /// Machine-readable output.
    #[arg(long, global = true)]
    json: bool,
    /// Member cap for class enumerations [default: 100000].
    #[arg(long, global = true, value_name = "N")]
    max_members: Option<usize>,
    /// Entry cap for class enumerations [default: 64].
    #[arg(long, global = true, value_name = "N")]
    max_entry: Option<u64>,
    /// Mutation depth cap for class enumerations [default: none].
    #[arg(long, global = true, value_name = "N")]
    max_depth: Option<usize>,
    /// Do not stop at the first entry above 2 when deciding finiteness.
    #[arg(long, global = true)]
    no_infinite_exit: bool,
    /// Worker threads.
    #[arg(long, global = true, value_name = "N")]
    jobs: Option<usize>,
    /// Cache directory.
    #[arg(long, global = true, env = "MUTCLASS_CACHE_DIR", value_name = "DIR")]
    cache_dir: Option<PathBuf>,
    /// Ignore the cache directory.
    #[arg(long, global = true)]
    no_cache: bool,
}

/// Matrix inputs: files (JSON or plain text, `-` for stdin) in order, then
/// inline matrices in order.
#[derive(Args)]
struct Inputs {
    files: Vec<PathBuf>,
    /// Inline matrix, rows separated by `;`.
    #[arg(long = "matrix", value_name = "ROWS")]
    inline: Vec<String>,
    /// Number of frozen indices (the last ones) in each inline matrix.
    #[arg(long, default_value_t = 0)]
    frozen: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum SeedOrder {
    Ascending,
    Descending,
    Shuffled,
}

/// Which universe to work in: a saved file, or built from bounds.
#[derive(Args)]
struct Space {
    /// Universe JSON written by `universe --json`.
    #[arg(long, value_name = "FILE", conflicts_with_all = ["rank", "weight", "kind"])]
    universe: Option<PathBuf>,
    /// Largest number of indices.
    #[arg(long, short = 'r')]
    rank: Option<usize>,
    /// Largest entry magnitude.
    #[arg(long, short = 'w')]
    weight: Option<u64>,
    #[arg(long, default_value = "quiver")]
    kind: UniverseKind,
    /// Order in which seeds are handed to the builder.
    #[arg(long, value_enum, default_value = "ascending")]
    seed_order: SeedOrder,
    /// RNG seed for `--seed-order shuffled`.
    #[arg(long, default_value_t = 0)]
    shuffle_seed: u64,
}

#[derive(Subcommand)]
enum Verb {
    /// Mutate at the given 1-based indices, in order.
    Mutate {
        #[command(flatten)]
        input: Inputs,
        #[arg(long = "at", required = true, value_name = "K")]
        at: Vec<usize>,
    },
    /// Enumerate the mutation class.
    Class {
        #[command(flatten)]
        input: Inputs,
        /// List every member with its witness sequence.
        #[arg(long)]
        members: bool,
    },
    /// Decide mutation-finiteness.
    Finite {
        #[command(flatten)]
        input: Inputs,
    },
    /// Decide whether the class of P embeds into the class of Q.
    Embeds {
        #[command(flatten)]
        input: Inputs,
    },
    /// Build a universe of classes and its embedding relation.
    Universe {
        #[command(flatten)]
        space: Space,
    },
    /// Cover relations of a universe.
    Hasse {
        #[command(flatten)]
        space: Space,
        /// Graphviz output.
        #[arg(long)]
        dot: bool,
        /// Draw resolved covers and dashed UNKNOWN pairs instead of refusing.
        #[arg(long)]
        partial: bool,
    },
    /// Smallest closed set containing the given classes.
    Closure {
        #[command(flatten)]
        space: Space,
        #[command(flatten)]
        input: Inputs,
        /// Universe class by 1-based index.
        #[arg(long = "class", value_name = "I")]
        classes: Vec<usize>,
    },
    /// Smallest open set containing the given classes.
    OpenSet {
        #[command(flatten)]
        space: Space,
        #[command(flatten)]
        input: Inputs,
        #[arg(long = "class", value_name = "I")]
        classes: Vec<usize>,
    },
    /// Whether Q avoids every class in S. The first input is Q.
    Avoid {
        #[command(flatten)]
        input: Inputs,
    },
    /// Whether every pair of mutable indices carries at least N arrows in some member.
    Abundant {
        #[command(flatten)]
        input: Inputs,
        #[arg(long, short = 'n', default_value_t = 2)]
        n: u64,
    },
    /// Whether the class has an acyclic member.
    Acyclic {
        #[command(flatten)]
        input: Inputs,
    },
    /// Whether every quiver class with K vertices and entries up to W embeds.
    Universal {
        #[command(flatten)]
        input: Inputs,
        #[arg(long, short = 'k')]
        k: usize,
        #[arg(long = "test-weight", default_value_t = 1, value_name = "W")]
        test_weight: u64,
    },
    /// The disjoint union of P and Q, with both block embeddings.
    DensityWitness {
        #[command(flatten)]
        input: Inputs,
    },
    /// Inspect or compact the cache.
    Cache {
        #[command(subcommand)]
        action: CacheAction,
    },
}

#[derive(Subcommand)]
enum CacheAction {
    Stats,
    Compact,
}

/// What a verb prints and how it exits.
struct Outcome {
    text: String,
    json: String,
    unknown: bool,
}

impl Outcome {
    fn new(text: String, json: Value, unknown: bool) -> Self {
        Self {
            text,
            json: json.to_string(),
            unknown,
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            // clap exits with 2, which is reserved for UNKNOWN
            let text = e.to_string();
            eprintln!("mutclass: {}", text.lines().next().unwrap_or("bad arguments").trim_start_matches("error: "));
            return ExitCode::from(1);
        }
    };
    match run(cli) {
        Ok((outcome, json)) => {
            let out = if json { outcome.json + "\n" } else { outcome.text };
            print!("{out}");
            if outcome.unknown {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e) => {
            let msg = format!("{e:#}").replace('\n', " ");
            eprintln!("mutclass: {msg}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Result<(Outcome, bool)> {
    let g = &cli.global;
    if let Some(jobs) = g.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs.max(1))
            .build_global()
            .context("thread pool")?;
    }
    let cache_dir = if g.no_cache { None } else { g.cache_dir.clone() };
    if let Verb::Cache { action } = &cli.verb {
        let dir = cache_dir.ok_or_else(|| anyhow!("no cache directory (use --cache-dir or MUTCLASS_CACHE_DIR)"))?;
        return Ok((cache(action, dir)?, g.json));
    }
    let defaults = Budget::default();
    let budget = Budget::new(
        g.max_members.unwrap_or(defaults.max_members),
        g.max_entry.unwrap_or(defaults.max_entry),
        g.max_depth.or(defaults.max_depth),
    )?;
    let engine = match &cache_dir {
        Some(dir) => Engine::with_store(budget, Store::open(dir)?),
        None => Engine::new(budget),
    }
    .infinite_exit(!g.no_infinite_exit);
    let outcome = dispatch(&engine, &cli.verb)?;
    for e in engine.cache_errors() {
        eprintln!("mutclass: warning: cache: {e}");
    }
    Ok((outcome, g.json))
}

fn dispatch(engine: &Engine, verb: &Verb) -> Result<Outcome> {
    let budget = serde_json::to_value(engine.budget())?;
    match verb {
        Verb::Mutate { input, at } => {
            let [b] = exactly::<1>(input)?;
            let seq = MutationSequence::from_one_based(at)?;
            let out = b.mutate_along(&seq)?;
            let json = json!({
                "matrix": MatrixJson::from(&out),
                "sequence": at,
                "hash": canonical_form(&out).hex(),
            });
            Ok(Outcome::new(out.to_string(), json, false))
        }
        Verb::Class { input, members } => {
            let [b] = exactly::<1>(input)?;
            let class = engine.enumerate(&b);
            let key = class.key().hex();
            let tripped: Vec<Cap> = class.tripped().iter().copied().collect();
            let mut text = format!("{} members={} depth={}", status_name(class.status()), class.len(), class.depth());
            if !tripped.is_empty() {
                text += &format!(" tripped={}", caps(&tripped));
            }
            text += &format!("\nkey {key}\n");
            let mut json = json!({
                "key": key,
                "status": class.status(),
                "members": class.len(),
                "depth": class.depth(),
                "tripped": tripped,
                "seed": class.seed().hex(),
                "matrix": MatrixJson::from(class.seed().matrix()),
                "budget": budget,
            });
            if *members {
                let list: Vec<Value> = class
                    .members()
                    .iter()
                    .map(|m| json!({"hash": m.form.hex(), "witness": m.witness.to_one_based()}))
                    .collect();
                for m in class.members() {
                    text += &format!("{} {:?}\n", m.form.hex(), m.witness.to_one_based());
                }
                json["list"] = Value::Array(list);
            }
            Ok(Outcome::new(text, json, class.status() == Status::Truncated))
        }
        Verb::Finite { input } => {
            let [b] = exactly::<1>(input)?;
            let v = engine.is_mutation_finite(&b);
            let mut json = json!({
                "verdict": v.to_string().split(' ').next().unwrap_or_default(),
                "matrix": MatrixJson::from(&b),
                "hash": canonical_form(&b).hex(),
                "budget": budget,
            });
            let mut text = format!("{v}\n");
            match &v {
                FinitenessVerdict::Finite { members } => json["members"] = json!(members),
                FinitenessVerdict::Infinite { matrix, sequence } => {
                    text += &format!("sequence {:?}\n", sequence.to_one_based());
                    json["witness"] = json!({"matrix": MatrixJson::from(matrix), "sequence": sequence.to_one_based()});
                }
                FinitenessVerdict::Unknown { members, tripped } => {
                    json["members"] = json!(members);
                    json["tripped"] = json!(tripped);
                }
            }
            Ok(Outcome::new(text, json, v.verdict() == Verdict::Unknown))
        }
        Verb::Embeds { input } => {
            let [p, q] = exactly::<2>(input)?;
            let v = engine.embeds(&p, &q);
            let mut json = json!({
                "verdict": v.verdict(),
                "lower": canonical_form(&p).hex(),
                "upper": canonical_form(&q).hex(),
                "budget": budget,
            });
            let text = match &v {
                EmbedVerdict::Yes(w) => {
                    let w = w.to_json();
                    let text = format!(
                        "YES\nupper_sequence {:?}\nsubset {:?}\nlower_sequence {:?}\n",
                        w.upper_sequence, w.subset, w.lower_sequence
                    );
                    json["witness"] = serde_json::to_value(w)?;
                    text
                }
                EmbedVerdict::No => "NO\n".to_string(),
                EmbedVerdict::Unknown { tripped } => {
                    json["tripped"] = json!(tripped);
                    format!("UNKNOWN tripped={}\n", caps(tripped))
                }
            };
            Ok(Outcome::new(text, json, v.verdict() == Verdict::Unknown))
        }
        Verb::Universe { space } => {
            let u = universe(engine, space)?;
            let p = u.params();
            let mut text = format!(
                "universe r={} w={} kind={} classes={} unknown={}\n",
                p.r,
                p.w,
                kind_name(p.kind),
                u.len(),
                u.unknown_pairs().len()
            );
            for (i, c) in u.classes().iter().enumerate() {
                text += &format!(
                    "#{} {} mutable={} frozen={} {} members={} {} seed={}\n",
                    i + 1,
                    &c.hash[..8],
                    c.seed.matrix().mutable(),
                    c.seed.matrix().frozen(),
                    status_name(c.status),
                    c.members,
                    finiteness_name(c.finiteness),
                    inline(c.seed.matrix()),
                );
            }
            Ok(Outcome {
                text,
                json: u.to_json(),
                unknown: false,
            })
        }
        Verb::Hasse { space, dot, partial } => {
            let u = universe(engine, space)?;
            let h = if *partial {
                build_hasse_partial(&u)
            } else {
                match build_hasse(&u) {
                    Ok(h) => h,
                    Err(e) => return unresolved(e, budget),
                }
            };
            let text = if *dot {
                h.to_dot()
            } else {
                let mut text = String::new();
                for (i, j) in &h.edges {
                    text += &format!("#{} -> #{}\n", i + 1, j + 1);
                }
                for (i, j) in &h.unknown {
                    text += &format!("#{} ?> #{}\n", i + 1, j + 1);
                }
                text
            };
            let one = |pairs: &[(usize, usize)]| pairs.iter().map(|(i, j)| [i + 1, j + 1]).collect::<Vec<_>>();
            let json = json!({
                "edges": one(&h.edges),
                "unknown": one(&h.unknown),
                "params": u.params(),
                "budget": budget,
            });
            let mut out = Outcome::new(text, json, h.is_partial());
            if *dot {
                // --dot wins over --json
                out.json = out.text.trim_end().to_string();
            }
            Ok(out)
        }
        Verb::Closure { space, input, classes } | Verb::OpenSet { space, input, classes } => {
            let u = universe(engine, space)?;
            let set = class_set(engine, &u, input, classes)?;
            let result = if matches!(verb, Verb::Closure { .. }) {
                u.closure(&set)
            } else {
                u.open_set_generated(&set)
            };
            let result = match result {
                Ok(r) => r,
                Err(e) => return unresolved(e, budget),
            };
            let mut text = String::new();
            let mut list = Vec::new();
            for i in result.iter() {
                let c = &u.classes()[i];
                text += &format!("#{} {} {}\n", i + 1, &c.hash[..8], inline(c.seed.matrix()));
                list.push(json!({"index": i + 1, "hash": c.hash, "matrix": MatrixJson::from(c.seed.matrix())}));
            }
            let json = json!({
                "input": set.iter().map(|i| i + 1).collect::<Vec<_>>(),
                "result": list,
                "params": u.params(),
                "budget": budget,
            });
            Ok(Outcome::new(text, json, false))
        }
        Verb::Avoid { input } => {
            let all = load(input)?;
            let (q, s) = all.split_first().ok_or_else(|| anyhow!("avoid needs Q followed by the forbidden classes"))?;
            Ok(property(is_avoiding(engine, q, s), budget))
        }
        Verb::Abundant { input, n } => {
            let [b] = exactly::<1>(input)?;
            Ok(property(is_n_abundant(engine, &b, *n), budget))
        }
        Verb::Acyclic { input } => {
            let [b] = exactly::<1>(input)?;
            Ok(property(is_mutation_acyclic(engine, &b), budget))
        }
        Verb::Universal { input, k, test_weight } => {
            let [b] = exactly::<1>(input)?;
            Ok(property(is_k_universal_bounded(engine, &b, *k, *test_weight), budget))
        }
        Verb::DensityWitness { input } => {
            let [p, q] = exactly::<2>(input)?;
            let d = density_witness(&p, &q);
            let subset = |v: &EmbedVerdict| v.witness().map(|w| w.to_json().subset).unwrap_or_default();
            let text = format!(
                "{}P at subset {:?}\nQ at subset {:?}\n",
                d.union,
                subset(&d.p_into_union),
                subset(&d.q_into_union)
            );
            let json = json!({
                "matrix": MatrixJson::from(&d.union),
                "hash": canonical_form(&d.union).hex(),
                "p": d.p_into_union.witness().map(|w| w.to_json()),
                "q": d.q_into_union.witness().map(|w| w.to_json()),
                "budget": budget,
            });
            Ok(Outcome::new(text, json, false))
        }
        Verb::Cache { .. } => unreachable!("handled before the engine is built"),
    }
}

fn cache(action: &CacheAction, dir: PathBuf) -> Result<Outcome> {
    let mut store = Store::open(&dir)?;
    match action {
        CacheAction::Stats => {
            let s = store.stats()?;
            let text = format!("classes={} embeds={} bytes={}\n", s.classes, s.embeds, s.bytes);
            Ok(Outcome::new(text, serde_json::to_value(s)?, false))
        }
        CacheAction::Compact => {
            let s = store.compact()?;
            let text = format!("kept={} dropped={}\n", s.kept, s.dropped);
            Ok(Outcome::new(text, serde_json::to_value(s)?, false))
        }
    }
}

fn property(v: PropertyVerdict, budget: Value) -> Outcome {
    let json = json!({
        "verdict": v.verdict,
        "reason": v.reason,
        "tripped": v.tripped,
        "budget": budget,
    });
    Outcome::new(format!("{v}\n"), json, v.verdict == Verdict::Unknown)
}

/// An UNKNOWN pair blocks a topology answer: report it as UNKNOWN, not as an error.
fn unresolved(e: TopologyError, budget: Value) -> Result<Outcome> {
    match e {
        TopologyError::UnresolvedRelation { lower, upper } => {
            let text = format!("UNKNOWN relation #{} -> #{} is unresolved\n", lower + 1, upper + 1);
            let json = json!({
                "verdict": Verdict::Unknown,
                "unresolved": [lower + 1, upper + 1],
                "budget": budget,
            });
            Ok(Outcome::new(text, json, true))
        }
        other => Err(other.into()),
    }
}

fn universe(engine: &Engine, space: &Space) -> Result<Universe> {
    if let Some(path) = &space.universe {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        return Universe::from_json(&text).map_err(|e| anyhow!("{}: {e}", path.display()));
    }
    let (Some(r), Some(w)) = (space.rank, space.weight) else {
        bail!("give --universe FILE or both --rank and --weight");
    };
    let kind = space.kind;
    let mut seeds = generate_seeds(r, w, kind);
    match space.seed_order {
        SeedOrder::Ascending => {}
        SeedOrder::Descending => seeds.reverse(),
        SeedOrder::Shuffled => seeds.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(space.shuffle_seed)),
    }
    Ok(build_universe_from(engine, r, w, kind, seeds))
}

fn class_set(engine: &Engine, u: &Universe, input: &Inputs, classes: &[usize]) -> Result<ClassSet> {
    let mut indices = Vec::new();
    for &i in classes {
        if i == 0 || i > u.len() {
            bail!("class #{i} is not in the universe (1..={})", u.len());
        }
        indices.push(i - 1);
    }
    for b in load(input)? {
        let i = u
            .locate_in(engine, &b)
            .ok_or_else(|| anyhow!("matrix {} is not in the universe", inline(&b)))?;
        indices.push(i);
    }
    if indices.is_empty() {
        bail!("no classes given (use matrix inputs or --class)");
    }
    Ok(ClassSet::new(u.len(), indices)?)
}

fn load(input: &Inputs) -> Result<Vec<ExchangeMatrix>> {
    let mut out = Vec::new();
    for path in &input.files {
        let text = if path.as_os_str() == "-" {
            let mut s = String::new();
            std::io::stdin().read_to_string(&mut s).context("reading stdin")?;
            s
        } else {
            fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?
        };
        out.push(parse_matrix(&text).with_context(|| format!("parsing {}", path.display()))?);
    }
    for rows in &input.inline {
        out.push(ExchangeMatrix::from_inline(rows, input.frozen).with_context(|| format!("parsing {rows:?}"))?);
    }
    Ok(out)
}

/// Matrix JSON, plain text, or any JSON output of this tool with a `matrix` field.
fn parse_matrix(text: &str) -> Result<ExchangeMatrix> {
    if !text.trim_start().starts_with('{') {
        return Ok(ExchangeMatrix::from_text(text)?);
    }
    let value: Value = serde_json::from_str(text)?;
    let value = match value.get("matrix") {
        Some(inner) if value.get("b").is_none() => inner.clone(),
        _ => value,
    };
    let json: MatrixJson = serde_json::from_value(value)?;
    Ok(ExchangeMatrix::try_from(json)?)
}

fn exactly<const N: usize>(input: &Inputs) -> Result<[ExchangeMatrix; N]> {
    let all = load(input)?;
    let got = all.len();
    all.try_into()
        .map_err(|_| anyhow!("expected {N} matrix input{}, got {got}", if N == 1 { "" } else { "s" }))
}

fn inline(b: &ExchangeMatrix) -> String {
    let rows: Vec<String> = b
        .rows()
        .iter()
        .map(|r| r.iter().map(i64::to_string).collect::<Vec<_>>().join(" "))
        .collect();
    let frozen = if b.frozen() > 0 { format!(" +{}f", b.frozen()) } else { String::new() };
    format!("'{}'{frozen}", rows.join(";"))
}

fn caps(tripped: &[Cap]) -> String {
    tripped.iter().map(Cap::to_string).collect::<Vec<_>>().join(",")
}

fn status_name(s: Status) -> &'static str {
    match s {
        Status::Closed => "CLOSED",
        Status::Truncated => "TRUNCATED",
    }
}

fn kind_name(k: UniverseKind) -> &'static str {
    match k {
        UniverseKind::Quiver => "quiver",
        UniverseKind::Ice => "ice",
        UniverseKind::Matrix => "matrix",
    }
}

fn finiteness_name(f: Finiteness) -> &'static str {
    match f {
        Finiteness::Finite => "FINITE",
        Finiteness::Infinite => "INFINITE",
        Finiteness::Unknown => "UNKNOWN",
    }
}

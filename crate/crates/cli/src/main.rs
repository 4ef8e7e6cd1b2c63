use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{anyhow, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use tropphylo::colex::SubsetVector;
use tropphylo::io as fmt_io;
use tropphylo::rational::{format_rational, parse_rational};
use tropphylo::tropcore::{format_scalars, RelationIndex, RelationTerm};
use tropphylo::{
    circuit_membership, dressian_report, facet_scan, four_point_check, inequality_membership,
    internal_node_points, leaf_free_subtrees, pairwise_map, parse_newick, phi_r, pluecker_minors,
    random_tree, reconstruct_tree, root_depth_point, run_verify, same_rowspace_check, serialize_newick,
    steiner_r_map, subtree_point, CandidatePoint, Convention, Error, Interpretation, Rational,
    RelationFamily, Subtree, VerifyConfig, WeightedTree,
};

const EXIT_IO: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_CHECK_FAILED: u8 = 3;

#[derive(Parser)]
#[command(name = "tropphylo", version, about = "Exact tree metrics, tropical Plücker relations and tropical linear spaces")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Tropical convention (default: max, or both for `verify`).
    #[arg(long, global = true, value_parser = parse_convention)]
    convention: Option<Convention>,
    /// Seed for random generation.
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Draw a random weighted tree and print it as Newick.
    Gen {
        #[arg(long)]
        n: usize,
        /// Edge weight range `lo..hi`.
        #[arg(long, default_value = "1..10", value_parser = parse_range)]
        weights: (Rational, Rational),
    },
    /// Pairwise distances of a Newick tree, or its Steiner weights with `--r`.
    Dissim {
        tree: PathBuf,
        #[arg(long, default_value_t = 2)]
        r: usize,
    },
    /// Minimal half-tour map φ^r of a pairwise map.
    Phi {
        map: PathBuf,
        #[arg(long)]
        r: usize,
    },
    /// Four-point condition of a pairwise map.
    Fourpoint { map: PathBuf },
    /// Rebuild the tree realising a tree metric.
    Reconstruct { map: PathBuf },
    /// Maximal minors of a matrix, optionally compared with a second matrix.
    Minors {
        matrix: PathBuf,
        /// Report whether both matrices have the same row space.
        #[arg(long)]
        same_as: Option<PathBuf>,
    },
    /// Check a vector against the tropical Plücker relations.
    PluckerCheck {
        vector: PathBuf,
        #[arg(long, default_value = "three-term", value_parser = parse_family)]
        family: RelationFamily,
        /// List the verdict of every relation.
        #[arg(long)]
        all: bool,
    },
    /// Membership of a point: slack inequalities against an r-map, or the
    /// circuit test against a Plücker vector.
    Member {
        map: PathBuf,
        point: PathBuf,
        #[arg(long)]
        circuit: bool,
    },
    /// Candidate points of a tree's tropical linear space.
    Points {
        tree: PathBuf,
        #[arg(long)]
        r: usize,
        /// Only the point of this subtree (comma-separated vertex names or ids).
        #[arg(long, conflicts_with = "root")]
        subtree: Option<String>,
        /// Only the root-depth point for this vertex.
        #[arg(long)]
        root: Option<String>,
    },
    /// Tightness of every r-subset at a subtree point against its prediction.
    Facets {
        tree: PathBuf,
        #[arg(long)]
        r: usize,
        #[arg(long)]
        subtree: String,
        #[arg(long, default_value = "pairwise", value_parser = parse_interpretation)]
        interpretation: Interpretation,
    },
    /// Seeded batch verification over random trees.
    Verify {
        #[arg(long, default_value_t = 50)]
        trials: usize,
        /// Leaf count range `lo..hi`, inclusive.
        #[arg(long, default_value = "4..7")]
        n_range: String,
        /// Comma-separated subset sizes.
        #[arg(long, default_value = "2,3", value_delimiter = ',')]
        r: Vec<usize>,
        #[arg(long, default_value = "1..10", value_parser = parse_range)]
        weights: (Rational, Rational),
        /// Append wall-clock time to the report.
        #[arg(long)]
        timing: bool,
    },
}

fn parse_convention(s: &str) -> std::result::Result<Convention, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_family(s: &str) -> std::result::Result<RelationFamily, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_interpretation(s: &str) -> std::result::Result<Interpretation, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_range(s: &str) -> std::result::Result<(Rational, Rational), String> {
    let (lo, hi) = s.split_once("..").ok_or_else(|| format!("expected lo..hi, got {s:?}"))?;
    let lo = parse_rational(lo).map_err(|e| e.to_string())?;
    let hi = parse_rational(hi).map_err(|e| e.to_string())?;
    Ok((lo, hi))
}

enum Status {
    Ok,
    CheckFailed,
}

struct Output {
    text: String,
    json: Value,
    status: Status,
}

impl Output {
    fn ok(text: String, json: Value) -> Self {
        Self { text, json, status: Status::Ok }
    }

    fn check(pass: bool, text: String, json: Value) -> Self {
        Self { text, json, status: if pass { Status::Ok } else { Status::CheckFailed } }
    }
}

fn read_input(path: &Path) -> Result<String> {
    if path == Path::new("-") {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s).context("reading standard input")?;
        return Ok(s);
    }
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn read_tree(path: &Path) -> Result<WeightedTree> {
    Ok(parse_newick(read_input(path)?.trim())?)
}

fn rationals_json(values: &[Rational]) -> Value {
    values.iter().map(format_rational).collect()
}

fn vector_json(v: &SubsetVector<Rational>) -> Value {
    json!({ "n": v.n(), "k": v.k(), "values": rationals_json(v.values()) })
}

fn join(values: &[usize], sep: &str) -> String {
    values.iter().map(usize::to_string).collect::<Vec<_>>().join(sep)
}

fn set(values: &[usize]) -> String {
    format!("{{{}}}", join(values, ","))
}

fn resolve_subtree(tree: &WeightedTree, keys: &str) -> Result<Subtree> {
    let vertices = keys
        .split(',')
        .map(|key| {
            let key = key.trim();
            tree.find_vertex(key).ok_or_else(|| anyhow!("no vertex named {key:?}"))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Subtree::induced(tree, vertices)?)
}

fn provenance_label(p: &CandidatePoint) -> String {
    match &p.provenance {
        tropphylo::Provenance::RootDepth { vertex } => format!("root {vertex}"),
        tropphylo::Provenance::Node { vertex } => format!("node {vertex}"),
        tropphylo::Provenance::Subtree { vertices, .. } => format!("subtree {}", join(vertices, ",")),
    }
}

fn relation_index(index: &RelationIndex) -> String {
    match index {
        RelationIndex::Quadratic { i_seq, j_seq } => format!("quadratic i={} j={}", set(i_seq), set(j_seq)),
        RelationIndex::ThreeTerm { base, quad } => format!("three-term base={} quad={}", set(base), join(quad, ",")),
    }
}

fn relation_terms(terms: &[RelationTerm]) -> String {
    terms
        .iter()
        .map(|t| format!("{}p{}p{}", if t.sign < 0 { "-" } else { "+" }, set(&t.a), set(&t.b)))
        .collect::<Vec<_>>()
        .join(" ")
}

fn run(cli: Cli) -> Result<Output> {
    let g = &cli.global;
    let convention = g.convention.unwrap_or(Convention::Max);
    Ok(match cli.command {
        Command::Gen { n, weights: (lo, hi) } => {
            let tree = random_tree(n, g.seed, &lo, &hi)?;
            let newick = serialize_newick(&tree);
            Output::ok(format!("{newick}\n"), json!({ "newick": newick }))
        }
        Command::Dissim { tree, r } => {
            let tree = read_tree(&tree)?;
            let v = if r == 2 {
                pairwise_map(&tree).as_subset_vector().clone()
            } else {
                steiner_r_map(&tree, r)?.as_subset_vector().clone()
            };
            Output::ok(fmt_io::format_subset_vector(&v), vector_json(&v))
        }
        Command::Phi { map, r } => {
            let d = fmt_io::parse_dissimilarity(&read_input(&map)?)?;
            let v = phi_r(&d, r)?.as_subset_vector().clone();
            Output::ok(fmt_io::format_subset_vector(&v), vector_json(&v))
        }
        Command::Fourpoint { map } => {
            let d = fmt_io::parse_dissimilarity(&read_input(&map)?)?;
            let verdict = four_point_check(&d);
            let mut text = format!("four-point: {}\n", if verdict.pass { "pass" } else { "fail" });
            if let Some(w) = verdict.witness {
                text += &format!("witness: {}\n", join(&w, " "));
            }
            Output::check(verdict.pass, text, serde_json::to_value(&verdict)?)
        }
        Command::Reconstruct { map } => {
            let d = fmt_io::parse_dissimilarity(&read_input(&map)?)?;
            match reconstruct_tree(&d) {
                Ok(tree) => {
                    let newick = serialize_newick(&tree);
                    Output::ok(format!("{newick}\n"), json!({ "newick": newick }))
                }
                Err(Error::NotAdditive(w)) => Output::check(
                    false,
                    format!("error: not additive\nwitness: {}\n", join(&w, " ")),
                    json!({ "error": "not-additive", "witness": w }),
                ),
                Err(Error::NonpositiveEdge { leaf }) => Output::check(
                    false,
                    format!("error: nonpositive edge\nleaf: {leaf}\n"),
                    json!({ "error": "nonpositive-edge", "leaf": leaf }),
                ),
                Err(e) => return Err(e.into()),
            }
        }
        Command::Minors { matrix, same_as } => {
            let m = fmt_io::parse_matrix(&read_input(&matrix)?)?;
            let minors = pluecker_minors(&m)?;
            match same_as {
                None => Output::ok(fmt_io::format_subset_vector(&minors), vector_json(&minors)),
                Some(other) => {
                    let other = fmt_io::parse_matrix(&read_input(&other)?)?;
                    let same = same_rowspace_check(&m, &other)?;
                    Output::check(
                        same,
                        format!("same-rowspace: {}\n", if same { "yes" } else { "no" }),
                        json!({ "same_rowspace": same, "minors": vector_json(&minors) }),
                    )
                }
            }
        }
        Command::PluckerCheck { vector, family, all } => {
            let p = fmt_io::parse_pluecker(&read_input(&vector)?)?;
            let report = dressian_report(&p, family, convention)?;
            let mut text = format!(
                "n: {}\nk: {}\nfamily: {}\nconvention: {}\nchecked: {}\nfailed: {}\nresult: {}\n",
                report.n,
                report.k,
                family,
                convention,
                report.checked,
                report.failed,
                if report.pass { "PASS" } else { "FAIL" }
            );
            if let Some(f) = &report.first_failure {
                text += &format!("first-failure: {}\n", relation_index(&f.index));
                text += &format!("first-failure.terms: {}\n", relation_terms(&f.terms));
                text += &format!("first-failure.values: {}\n", format_scalars(&f.term_values));
                text += &format!("first-failure.achievers: {}\n", join(&f.achievers, " "));
            }
            if all {
                for r in &report.results {
                    text += &format!("relation {}: {}\n", relation_index(&r.index), if r.holds { "holds" } else { "fails" });
                }
            }
            let mut value = serde_json::to_value(&report)?;
            if !all {
                value.as_object_mut().unwrap().remove("results");
            }
            Output::check(report.pass, text, value)
        }
        Command::Member { map, point, circuit } => {
            let x = fmt_io::parse_point(&read_input(&point)?)?;
            let map_text = read_input(&map)?;
            if circuit {
                let p = fmt_io::parse_pluecker(&map_text)?;
                let report = circuit_membership(&p, &x, convention)?;
                let mut text = format!(
                    "test: circuit\nconvention: {}\nverdict: {}\n",
                    convention,
                    if report.verdict { "member" } else { "not-member" }
                );
                if let Some(s) = &report.first_violation {
                    text += &format!("first-violation: {}\n", set(s));
                }
                Output::check(report.verdict, text, serde_json::to_value(&report)?)
            } else {
                let dr = fmt_io::parse_r_dissimilarity(&map_text)?;
                let report = inequality_membership(&x, &dr)?;
                let tight: Vec<String> = report.tight_sets.iter().map(|s| set(s)).collect();
                let mut text = format!(
                    "test: inequality\nverdict: {}\nmin-slack: {}\ntight-sets: {}\n",
                    if report.verdict { "member" } else { "not-member" },
                    format_rational(&report.min_slack),
                    tight.join(" ")
                );
                if let Some(s) = &report.first_violation {
                    text += &format!("first-violation: {}\n", set(s));
                }
                Output::check(report.verdict, text, serde_json::to_value(&report)?)
            }
        }
        Command::Points { tree, r, subtree, root } => {
            let tree = read_tree(&tree)?;
            let single = match (subtree, root) {
                (Some(keys), _) => Some(subtree_point(&tree, &resolve_subtree(&tree, &keys)?, r)?),
                (None, Some(key)) => {
                    let v = tree.find_vertex(&key).ok_or_else(|| anyhow!("no vertex named {key:?}"))?;
                    Some(root_depth_point(&tree, v)?)
                }
                (None, None) => None,
            };
            match single {
                Some(p) => Output::ok(fmt_io::format_point(&p.coords), serde_json::to_value(&p)?),
                None => {
                    let mut points = internal_node_points(&tree, r)?;
                    for tp in leaf_free_subtrees(&tree) {
                        points.push(subtree_point(&tree, &tp, r)?);
                    }
                    let text = points
                        .iter()
                        .map(|p| format!("{}: {}\n", provenance_label(p), fmt_io::format_rationals(&p.coords)))
                        .collect();
                    Output::ok(text, serde_json::to_value(&points)?)
                }
            }
        }
        Command::Facets { tree, r, subtree, interpretation } => {
            let tree = read_tree(&tree)?;
            let tp = resolve_subtree(&tree, &subtree)?;
            let scan = facet_scan(&tree, &tp, r, interpretation)?;
            let yes_no = |b: bool| if b { "yes" } else { "no" };
            let mut text = format!(
                "point: {}\ninterpretation: {}\n",
                fmt_io::format_rationals(&scan.point.coords),
                serde_json::to_value(interpretation)?.as_str().unwrap_or_default()
            );
            for rep in &scan.reports {
                text += &format!(
                    "subset {}: contains={} disjoint={} predicted={} actual={} slack={}\n",
                    set(&rep.subset),
                    yes_no(rep.contains_tprime),
                    yes_no(rep.disjoint),
                    yes_no(rep.predicted_tight),
                    yes_no(rep.actual_tight),
                    format_rational(&rep.slack)
                );
            }
            text += &format!("on-facet: {}\nagreement: {}\n", yes_no(scan.on_facet), yes_no(scan.agreement));
            Output::check(scan.agreement, text, serde_json::to_value(&scan)?)
        }
        Command::Verify { trials, n_range, r, weights: (weight_lo, weight_hi), timing } => {
            let (n_min, n_max) = n_range
                .split_once("..")
                .and_then(|(a, b)| Some((a.trim().parse().ok()?, b.trim().parse().ok()?)))
                .ok_or_else(|| anyhow!("expected leaf range lo..hi, got {n_range:?}"))?;
            let cfg = VerifyConfig {
                seed: g.seed,
                trials,
                n_min,
                n_max,
                r_set: r,
                conventions: g.convention.map_or(Convention::BOTH.to_vec(), |c| vec![c]),
                weight_lo,
                weight_hi,
            };
            let start = Instant::now();
            let mut report = run_verify(&cfg)?;
            if timing {
                report.elapsed_ms = Some(start.elapsed().as_millis() as u64);
            }
            Output::check(report.pass, report.to_text(), serde_json::to_value(&report)?)
        }
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    let format = cli.global.format;
    match run(cli) {
        Ok(out) => {
            let rendered = match format {
                Format::Text => out.text,
                Format::Json => serde_json::to_string_pretty(&out.json).expect("json renders") + "\n",
            };
            let mut stdout = std::io::stdout().lock();
            if stdout.write_all(rendered.as_bytes()).and_then(|_| stdout.flush()).is_err() {
                return ExitCode::from(EXIT_IO);
            }
            match out.status {
                Status::Ok => ExitCode::SUCCESS,
                Status::CheckFailed => ExitCode::from(EXIT_CHECK_FAILED),
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_IO)
        }
    }
}

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use relwork::classes::{
    age, check_property_with, eppa_witness, free_amalgam, hom_amalgam, member, parse_class_spec, verify_pushout,
    Property,
};
use relwork::colored::{
    check_caut_identity, color_automorphisms, decode_s, encode_s, hat_expansion, is_retraction, parse_colored,
    strong_automorphisms, tilde_expansion, verify_colored_extension_property, weak_automorphisms,
    build_universal_colored_with,
};
use relwork::fraisse::{build_generic_with, BuildOptions};
use relwork::io::{parse_structure, structure_to_value};
use relwork::morphism::{
    automorphism_group, core, endomorphisms, find_embedding, find_homomorphism, find_isomorphism,
    is_homomorphism_homogeneous, parse_morphism, PartialMap,
};
use relwork::oligomorphy::{check_worn, count_orbits, count_pe_types, oligomorphy_report, pe_type_leq, PointedStructure};
use relwork::{Budget, Error, Structure};

#[derive(Parser)]
#[command(name = "relwork", version, about = "Workbench for finite relational structures")]
struct Cli {
    #[command(flatten)]
    config: RunConfig,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunConfig {
    /// Seed for randomized constructions; also switches `generic` and
    /// `colored-build` to random links for fresh elements.
    #[arg(long, global = true, env = "RELWORK_SEED")]
    seed: Option<u64>,
    /// Search-node budget.
    #[arg(long, global = true, env = "RELWORK_NODE_BUDGET", default_value_t = 10_000_000,
          value_parser = clap::value_parser!(u64).range(1..))]
    node_budget: u64,
    /// Wall-clock budget in seconds.
    #[arg(long, global = true, env = "RELWORK_TIME_BUDGET", default_value_t = 60,
          value_parser = clap::value_parser!(u64).range(1..))]
    time_budget: u64,
    #[arg(long, global = true, env = "RELWORK_FORMAT", value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Table,
    Dot,
}

#[derive(Subcommand)]
enum Command {
    /// Find a homomorphism A → B.
    Hom(MapArgs),
    /// Find an embedding A ↪ B.
    Embed(MapArgs),
    /// Find an isomorphism A ≅ B.
    Iso { a: PathBuf, b: PathBuf },
    /// Compute a core and a retraction onto it.
    Core { a: PathBuf },
    /// List all endomorphisms.
    Endos { a: PathBuf },
    /// List all automorphisms.
    Auts { a: PathBuf },
    /// Check homomorphism-homogeneity.
    HhCheck { a: PathBuf },
    /// Test class membership.
    Member {
        #[arg(long)]
        spec: PathBuf,
        a: PathBuf,
    },
    /// Induced substructures up to isomorphism.
    Age {
        a: PathBuf,
        #[arg(long, default_value_t = 3)]
        max_size: usize,
    },
    /// Check HP, JEP, AP or FreeAP of a class up to a size bound.
    CheckAp(PropertyArgs),
    /// Check the homo-amalgamation property up to a size bound.
    CheckHap(PropertyArgs),
    /// Glue B1 and B2 over A and verify the pushout property.
    Amalgam {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b1: PathBuf,
        #[arg(long)]
        b2: PathBuf,
        /// Morphism A → B1.
        #[arg(long)]
        f1: PathBuf,
        /// Morphism A → B2.
        #[arg(long)]
        f2: PathBuf,
        /// Allow a homomorphism for f1 (homo-amalgam).
        #[arg(long)]
        hom: bool,
        #[arg(long, default_value_t = 3)]
        probe_bound: usize,
    },
    /// Search a class for a structure extending all partial isomorphisms of A.
    Eppa {
        #[arg(long)]
        spec: PathBuf,
        a: PathBuf,
        #[arg(long, default_value_t = 4)]
        bound: usize,
    },
    /// Build a finite approximant of the Fraïssé limit of a class.
    Generic {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long, default_value_t = 2)]
        demand_size: usize,
        #[arg(long, default_value_t = 100)]
        stages: usize,
    },
    /// Build a universal homogeneous colored approximant.
    ColoredBuild {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        template: PathBuf,
        #[arg(long, default_value_t = 2)]
        demand_size: usize,
        #[arg(long, default_value_t = 100)]
        stages: usize,
    },
    /// Strong, weak and color automorphism groups of a colored structure.
    ColoredAuts { c: PathBuf },
    /// Unary encoding of a colored structure.
    EncodeS { c: PathBuf },
    /// Decode a unary encoding against a template.
    DecodeS {
        encoded: PathBuf,
        #[arg(long)]
        template: PathBuf,
    },
    /// Kernel expansion of a colored structure.
    Tilde {
        c: PathBuf,
        /// Also add the pulled-back template relations.
        #[arg(long)]
        hat: bool,
    },
    /// Compare the color automorphism group with the kernel expansions.
    CheckCaut { c: PathBuf },
    /// Search for a co-retraction of the coloring.
    Retraction { c: PathBuf },
    /// Compare positive existential types of two pointed structures.
    PeLeq {
        a: PathBuf,
        /// Comma-separated element ids of the tuple in A.
        #[arg(long, value_delimiter = ',')]
        a_point: Vec<String>,
        b: PathBuf,
        #[arg(long, value_delimiter = ',')]
        b_point: Vec<String>,
    },
    /// Count positive existential types of n-tuples.
    PeTypes {
        a: PathBuf,
        #[arg(short, long)]
        n: usize,
    },
    /// Count automorphism orbits on n-tuples.
    Orbits {
        a: PathBuf,
        #[arg(short, long)]
        n: usize,
    },
    /// Evaluate hom-existence, age maps and CSP containment.
    WornCheck {
        a: PathBuf,
        b: PathBuf,
        #[arg(long, default_value_t = 3)]
        age_bound: usize,
    },
    /// Tabulate type and orbit counts.
    OligReport {
        a: PathBuf,
        #[arg(long, default_value_t = 2)]
        max_n: usize,
    },
    /// Gaifman graph.
    Gaifman { a: PathBuf },
}

#[derive(Args)]
struct MapArgs {
    a: PathBuf,
    b: PathBuf,
    /// Required image, as `source=target`; repeatable.
    #[arg(long = "fix")]
    fixed: Vec<String>,
}

#[derive(Args)]
struct PropertyArgs {
    #[arg(long)]
    spec: PathBuf,
    #[arg(long, default_value_t = 3)]
    bound: usize,
    /// HP, JEP, AP, HAP or FreeAP.
    #[arg(long)]
    property: Option<String>,
    /// Largest witness to search; default |B1| + |B2| − |A| per instance.
    #[arg(long)]
    witness_bound: Option<usize>,
}

/// A computed result: the report and its verdict.
struct Outcome {
    value: Value,
    verdict: bool,
    dot: Option<String>,
}

impl Outcome {
    fn new(value: Value, verdict: bool) -> Self {
        Outcome { value, verdict, dot: None }
    }
}

enum Failure {
    Budget(String),
    Input(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_budget() {
            Failure::Budget(e.to_string())
        } else {
            Failure::Input(e.to_string())
        }
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

fn read(path: &Path) -> CliResult<String> {
    if path == Path::new("-") {
        let mut s = String::new();
        std::io::Read::read_to_string(&mut std::io::stdin(), &mut s)
            .map_err(|e| Failure::Input(format!("stdin: {e}")))?;
        return Ok(s);
    }
    std::fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn structure(path: &Path) -> CliResult<Structure> {
    parse_structure(&read(path)?).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn with_path<T>(path: &Path, r: relwork::Result<T>) -> CliResult<T> {
    r.map_err(|e| match e {
        Error::BudgetExceeded { .. } => Failure::from(e),
        e => Failure::Input(format!("{}: {e}", path.display())),
    })
}

fn fixed_map(pairs: &[String]) -> CliResult<PartialMap> {
    let parsed = pairs
        .iter()
        .map(|p| {
            p.split_once('=')
                .map(|(a, b)| (a.to_string(), b.to_string()))
                .ok_or_else(|| Failure::Input(format!("--fix expects source=target, got `{p}`")))
        })
        .collect::<CliResult<Vec<_>>>()?;
    Ok(PartialMap::new(parsed)?)
}

fn run(cli: &Cli, budget: &Budget) -> CliResult<Outcome> {
    let seed = cli.config.seed;
    let options = |demand_size, stages| {
        let opts = BuildOptions::new(demand_size, stages);
        match seed {
            Some(s) => opts.seeded(s),
            None => opts,
        }
    };
    let morphisms = |ms: &[relwork::Morphism]| Value::from(ms.iter().map(|m| m.to_value()).collect::<Vec<_>>());
    Ok(match &cli.command {
        Command::Hom(m) | Command::Embed(m) => {
            let (a, b) = (structure(&m.a)?, structure(&m.b)?);
            let fixed = fixed_map(&m.fixed)?;
            let found = if matches!(cli.command, Command::Hom(_)) {
                find_homomorphism(&a, &b, &fixed, budget)?
            } else {
                find_embedding(&a, &b, &fixed, budget)?
            };
            let verdict = found.is_some();
            Outcome::new(found.map_or(Value::Null, |m| m.to_value()), verdict)
        }
        Command::Iso { a, b } => {
            let found = find_isomorphism(&structure(a)?, &structure(b)?, budget)?;
            let verdict = found.is_some();
            Outcome::new(found.map_or(Value::Null, |m| m.to_value()), verdict)
        }
        Command::Core { a } => {
            let c = core(&structure(a)?, budget)?;
            Outcome::new(
                json!({"core": structure_to_value(&c.structure), "retraction": c.retraction.to_value()}),
                true,
            )
        }
        Command::Endos { a } => {
            let ms = endomorphisms(&structure(a)?, budget)?;
            Outcome::new(json!({"count": ms.len(), "endomorphisms": morphisms(&ms)}), true)
        }
        Command::Auts { a } => {
            let ms = automorphism_group(&structure(a)?, budget)?;
            Outcome::new(json!({"order": ms.len(), "automorphisms": morphisms(&ms)}), true)
        }
        Command::HhCheck { a } => {
            let v = is_homomorphism_homogeneous(&structure(a)?, budget)?;
            Outcome::new(
                json!({
                    "holds": v.holds,
                    "local_maps_checked": v.local_maps_checked,
                    "counterexample": v.counterexample.as_ref().map(PartialMap::to_value),
                }),
                v.holds,
            )
        }
        Command::Member { spec, a } => {
            let spec_value = with_path(spec, parse_class_spec(&read(spec)?))?;
            let holds = member(&spec_value, &structure(a)?, budget)?;
            Outcome::new(json!({"member": holds}), holds)
        }
        Command::Age { a, max_size } => {
            let members = age(&structure(a)?, *max_size, budget)?;
            Outcome::new(
                json!({"count": members.len(), "members": members.iter().map(structure_to_value).collect::<Vec<_>>()}),
                true,
            )
        }
        Command::CheckAp(p) | Command::CheckHap(p) => {
            let default = if matches!(cli.command, Command::CheckAp(_)) {
                Property::Amalgamation
            } else {
                Property::HomoAmalgamation
            };
            let property = match &p.property {
                Some(s) => Property::parse(s)?,
                None => default,
            };
            let spec = with_path(&p.spec, parse_class_spec(&read(&p.spec)?))?;
            let r = check_property_with(&spec, property, p.bound, p.witness_bound, budget)?;
            Outcome::new(r.to_value(), r.holds_up_to_bound)
        }
        Command::Amalgam { a, b1, b2, f1, f2, hom, probe_bound } => {
            let (a, b1, b2) = (structure(a)?, structure(b1)?, structure(b2)?);
            let f1 = with_path(f1, parse_morphism(&read(f1)?, &a, &b1))?;
            let f2 = with_path(f2, parse_morphism(&read(f2)?, &a, &b2))?;
            let amalgam = if *hom { hom_amalgam(&f1, &f2)? } else { free_amalgam(&f1, &f2)? };
            let pushout = verify_pushout(&amalgam.g1, &amalgam.g2, &f1, &f2, *probe_bound, budget)?;
            let mut value = amalgam.to_value();
            value["pushout"] = pushout.to_value();
            Outcome::new(value, pushout.holds)
        }
        Command::Eppa { spec, a, bound } => {
            let spec = with_path(spec, parse_class_spec(&read(spec)?))?;
            let w = eppa_witness(&structure(a)?, &spec, *bound, budget)?;
            let verdict = w.is_some();
            Outcome::new(json!({"witness": w.as_ref().map(structure_to_value)}), verdict)
        }
        Command::Generic { spec, demand_size, stages } => {
            let spec = with_path(spec, parse_class_spec(&read(spec)?))?;
            let g = build_generic_with(&spec, options(*demand_size, *stages), budget)?;
            let verdict = g.complete() && g.verify(budget)?;
            Outcome::new(g.to_value(), verdict)
        }
        Command::ColoredBuild { spec, template, demand_size, stages } => {
            let spec = with_path(spec, parse_class_spec(&read(spec)?))?;
            let template = structure(template)?;
            let a = build_universal_colored_with(&spec, &template, options(*demand_size, *stages), budget)?;
            let ext = verify_colored_extension_property(&spec, &a.colored, *demand_size, budget)?;
            let mut value = a.to_value();
            value["extension_property"] = ext.to_value();
            Outcome::new(value, a.complete() && ext.holds)
        }
        Command::ColoredAuts { c } => {
            let c = with_path(c, parse_colored(&read(c)?))?;
            let strong = strong_automorphisms(&c, budget)?;
            let weak = weak_automorphisms(&c, budget)?;
            let color = color_automorphisms(&c, budget)?;
            Outcome::new(
                json!({
                    "strong_order": strong.len(),
                    "weak_order": weak.len(),
                    "color_order": color.len(),
                    "strong": morphisms(&strong),
                    "weak": weak.iter().map(|w| w.to_value()).collect::<Vec<_>>(),
                    "color": morphisms(&color),
                }),
                true,
            )
        }
        Command::EncodeS { c } => {
            let c = with_path(c, parse_colored(&read(c)?))?;
            Outcome::new(structure_to_value(&encode_s(&c)), true)
        }
        Command::DecodeS { encoded, template } => {
            let e = structure(encoded)?;
            let c = with_path(encoded, decode_s(&e, &structure(template)?))?;
            Outcome::new(c.to_value(), true)
        }
        Command::Tilde { c, hat } => {
            let c = with_path(c, parse_colored(&read(c)?))?;
            let s = if *hat { hat_expansion(&c) } else { tilde_expansion(&c) };
            Outcome::new(structure_to_value(&s), true)
        }
        Command::CheckCaut { c } => {
            let c = with_path(c, parse_colored(&read(c)?))?;
            let r = check_caut_identity(&c, budget)?;
            Outcome::new(r.to_value(), r.holds)
        }
        Command::Retraction { c } => {
            let c = with_path(c, parse_colored(&read(c)?))?;
            let iota = is_retraction(&c, budget)?;
            let verdict = iota.is_some();
            Outcome::new(
                json!({"retraction": verdict, "co_retraction": iota.as_ref().map(|m| m.to_value())}),
                verdict,
            )
        }
        Command::PeLeq { a, a_point, b, b_point } => {
            let pa = PointedStructure::new(structure(a)?, a_point)?;
            let pb = PointedStructure::new(structure(b)?, b_point)?;
            let holds = pe_type_leq(&pa, &pb, budget)?;
            Outcome::new(json!({"leq": holds}), holds)
        }
        Command::PeTypes { a, n } => {
            let count = count_pe_types(&structure(a)?, *n, budget)?;
            Outcome::new(json!({"n": n, "pe_types": count}), true)
        }
        Command::Orbits { a, n } => {
            let count = count_orbits(&structure(a)?, *n, budget)?;
            Outcome::new(json!({"n": n, "orbits": count}), true)
        }
        Command::WornCheck { a, b, age_bound } => {
            let r = check_worn(&structure(a)?, &structure(b)?, *age_bound, budget)?;
            Outcome::new(r.to_value(), r.agree())
        }
        Command::OligReport { a, max_n } => {
            let r = oligomorphy_report(&structure(a)?, *max_n, budget)?;
            Outcome::new(r.to_value(), r.coarsening_holds)
        }
        Command::Gaifman { a } => {
            let g = structure(a)?.gaifman_graph();
            let dot = g.to_dot();
            let mut out = Outcome::new(
                json!({"vertices": g.vertices, "edges": g.edges, "connected": g.component_count() <= 1}),
                true,
            );
            out.dot = Some(dot);
            out
        }
    })
}

fn table(value: &Value) -> String {
    match value {
        Value::Object(map) => map
            .iter()
            .map(|(k, v)| match v {
                Value::String(s) => format!("{k}\t{s}\n"),
                v => format!("{k}\t{v}\n"),
            })
            .collect(),
        v => format!("{v}\n"),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 3 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let budget = Budget::new(
        cli.config.node_budget,
        Some(Duration::from_secs(cli.config.time_budget)),
    );
    match run(&cli, &budget) {
        Ok(out) => {
            match (cli.config.format, out.dot) {
                (Format::Dot, Some(dot)) => print!("{dot}"),
                (Format::Table, _) => print!("{}", table(&out.value)),
                _ => println!("{}", serde_json::to_string_pretty(&out.value).expect("json values serialize")),
            }
            if out.verdict {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(Failure::Budget(msg)) => {
            eprintln!("budget exceeded: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}

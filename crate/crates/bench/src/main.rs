use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use smd_bench::config::{parse_problems, CampaignFile};
use smd_bench::io::{import_records, table_rows, write_table, TableRow};
use smd_bench::stats::{percent, LEGEND};
use smd_bench::{run_suite_traced, summarize, BenchError, DimPreset, Format, RunSpec};
use smd_core::{contour_grid, instantiate, split, BilevelVector, GridAxis, GridSpec, Level, ProblemId, ProblemInstance};

#[derive(Parser)]
#[command(name = "smd", version, about = "SMD bilevel test suite: campaigns, tables, reference points and grids")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a multi-seed campaign and write the per-run records.
    Run(RunArgs),
    /// Summarize a records file.
    Table(TableArgs),
    /// Print the analytic lower-level optimum for an upper vector.
    Psi(PsiArgs),
    /// Evaluate both objectives on a two-axis grid.
    Grid(GridArgs),
    /// List the problems with their bounds, properties and optima.
    Catalog(CatalogArgs),
}

#[derive(clap::Args)]
struct RunArgs {
    /// Comma separated problem names, or `all`.
    #[arg(long)]
    problems: Option<String>,
    /// 5, 10, 20 or p,q,r[,s].
    #[arg(long)]
    dims: Option<String>,
    #[arg(long)]
    runs: Option<u64>,
    /// Base seed; run k uses seed + k.
    #[arg(long)]
    seed: Option<u64>,
    /// Population size at both levels (default: preset value).
    #[arg(long)]
    pop: Option<usize>,
    /// Campaign file in TOML; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Records output (.json or .csv).
    #[arg(long, default_value = "results.json")]
    out: PathBuf,
    /// Directory for per-run convergence traces.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum TableFormat {
    Text,
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum Compare {
    Paper,
}

#[derive(clap::Args)]
struct TableArgs {
    /// Records file (.json or .csv).
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, value_enum, default_value = "text")]
    format: TableFormat,
    /// Put the published reference values beside the measured ones.
    #[arg(long, value_enum)]
    compare: Option<Compare>,
    /// Write to a file instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(clap::Args)]
struct PsiArgs {
    #[arg(long)]
    problem: String,
    #[arg(long, default_value = "5")]
    dims: String,
    /// Upper vector, comma separated (xu1 then xu2).
    #[arg(long, allow_hyphen_values = true)]
    xu: String,
}

#[derive(clap::Args)]
struct GridArgs {
    #[arg(long)]
    problem: String,
    #[arg(long, default_value = "5")]
    dims: String,
    /// Two axes: xu1, xu2, xl1, xl2 (first variable of a block) or u<i>, l<i>
    /// (flat index).
    #[arg(long, default_value = "xu1,xu2")]
    axes: String,
    #[arg(long, default_value_t = 100)]
    res: usize,
    /// Keep the lower block fixed instead of following the analytic optimum.
    #[arg(long)]
    fixed_lower: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(clap::Args)]
struct CatalogArgs {
    #[arg(long, default_value = "5")]
    dims: String,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run(a) => run(a),
        Command::Table(a) => table(a),
        Command::Psi(a) => psi(a),
        Command::Grid(a) => grid(a),
        Command::Catalog(a) => catalog(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn bad(msg: impl Into<String>) -> BenchError {
    BenchError::Config(msg.into())
}

fn preset(s: &str) -> Result<DimPreset, BenchError> {
    s.parse().map_err(|e: smd_bench::preset::ParsePresetError| bad(e.to_string()))
}

fn problem(s: &str) -> Result<ProblemId, BenchError> {
    s.parse().map_err(|_| bad(format!("unknown problem {s:?}")))
}

fn numbers(s: &str) -> Result<Vec<f64>, BenchError> {
    s.split(',').map(|t| t.trim().parse::<f64>().map_err(|_| bad(format!("not a number: {t:?}")))).collect()
}

fn run(a: RunArgs) -> Result<(), BenchError> {
    let mut spec = RunSpec::default();
    if let Some(path) = &a.config {
        spec = CampaignFile::load(path)?.apply(spec)?;
    }
    if let Some(p) = &a.problems {
        spec.problems = parse_problems(p)?;
    }
    if let Some(d) = &a.dims {
        spec.preset = preset(d)?;
    }
    if let Some(r) = a.runs {
        spec.runs = r;
    }
    if let Some(s) = a.seed {
        spec.base_seed = s;
    }
    if a.pop.is_some() {
        spec.population = a.pop;
    }
    Format::from_path(&a.out)?;
    if spec.preset == DimPreset::Twenty {
        eprintln!("note: the 20-variable split scales the 10-variable one");
    }
    let records = match a.jobs {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| bad(e.to_string()))?
            .install(|| run_suite_traced(&spec, a.trace.as_deref()))?,
        None => run_suite_traced(&spec, a.trace.as_deref())?,
    };
    smd_bench::export_records(&records, &a.out)?;
    let table = summarize(&records)?;
    print_text(&mut io::stdout().lock(), &table_rows(&table, false)).map_err(|e| BenchError::io(&a.out, e))?;
    eprintln!("wrote {} records to {}", records.len(), a.out.display());
    Ok(())
}

fn opt(x: Option<f64>) -> String {
    x.map_or("-".into(), |v| format!("{v:.3e}"))
}

fn opt_u(x: Option<u64>) -> String {
    x.map_or("-".into(), |v| v.to_string())
}

fn print_text(out: &mut impl Write, rows: &[TableRow]) -> io::Result<()> {
    writeln!(
        out,
        "{:<6} {:<9} {:>4} {:>10} {:>10} {:>10} {:>7} {:>10} {:>10} {:>8} {:>8} {:>5} {}",
        "prob", "p,q,r,s", "runs", "LL best", "LL median", "LL worst", "UL med", "UL acc", "LL acc", "calls", "ev/call", "ok", "mark"
    )?;
    for row in rows {
        let m = &row.measured;
        let d = m.dims;
        writeln!(
            out,
            "{:<6} {:<9} {:>4} {:>10} {:>10} {:>10} {:>7} {:>10} {:>10} {:>8} {:>8} {:>5} {}{}",
            m.problem.to_string(),
            format!("{},{},{},{}", d.p, d.q, d.r, d.s),
            m.runs,
            opt_u(m.ll_fe.map(|s| s.best)),
            opt_u(m.ll_fe.map(|s| s.median)),
            opt_u(m.ll_fe.map(|s| s.worst)),
            opt_u(m.ul_fe.map(|s| s.median)),
            opt(m.median_ul_accuracy),
            opt(m.median_ll_accuracy),
            opt_u(m.median_ll_calls),
            m.evals_per_call.map_or("-".into(), |v| format!("{v:.1}")),
            percent(m.success_rate),
            m.marker.symbol(),
            if m.worst_far { " (worst x)" } else { "" },
        )?;
        if let Some(p) = &row.reference {
            writeln!(
                out,
                "{:<6} {:<9} {:>4} {:>10} {:>10} {:>10} {:>7} {:>10} {:>10} {:>8} {:>8} {:>5} {}{}",
                "  ref",
                "",
                "",
                opt_u(p.ll_fe.map(|s| s.best)),
                opt_u(p.ll_fe.map(|s| s.median)),
                opt_u(p.ll_fe.map(|s| s.worst)),
                opt_u(p.ul_fe.map(|s| s.median)),
                opt(p.ul_accuracy),
                opt(p.ll_accuracy),
                opt_u(p.ll_calls),
                p.evals_per_call.map_or("-".into(), |v| format!("{v:.1}")),
                "",
                if p.infeasible { "-" } else { "" },
                if p.worst_far { " (worst x)" } else { "" },
            )?;
        }
    }
    writeln!(out, "\n{LEGEND}")
}

fn table(a: TableArgs) -> Result<(), BenchError> {
    let records = import_records(&a.input)?;
    let rows = table_rows(&summarize(&records)?, a.compare.is_some());
    let sink: Box<dyn Write> = match &a.out {
        Some(p) => Box::new(std::fs::File::create(p).map_err(|e| BenchError::io(p, e))?),
        None => Box::new(io::stdout().lock()),
    };
    let mut sink = BufWriter::new(sink);
    let path = a.out.clone().unwrap_or_else(|| PathBuf::from("<stdout>"));
    match a.format {
        TableFormat::Text => print_text(&mut sink, &rows).map_err(|e| BenchError::io(&path, e))?,
        TableFormat::Csv => write_table(&rows, Format::Csv, &mut sink)?,
        TableFormat::Json => {
            write_table(&rows, Format::Json, &mut sink)?;
            writeln!(sink).map_err(|e| BenchError::io(&path, e))?;
        }
    }
    sink.flush().map_err(|e| BenchError::io(&path, e))
}

fn build(name: &str, dims: &str) -> Result<(ProblemId, ProblemInstance), BenchError> {
    let id = problem(name)?;
    let inst = instantiate(id, preset(dims)?.dims(id)).map_err(|e| bad(e.to_string()))?;
    Ok((id, inst))
}

fn list(xs: &[f64]) -> String {
    xs.iter().map(|x| format!("{x}")).collect::<Vec<_>>().join(",")
}

fn psi(a: PsiArgs) -> Result<(), BenchError> {
    let (id, inst) = build(&a.problem, &a.dims)?;
    let xu = numbers(&a.xu)?;
    let r = inst.psi_reference(&xu).map_err(|e| bad(e.to_string()))?;
    let v = split(&xu, &r.lower(), inst.dims()).map_err(|e| bad(e.to_string()))?;
    let out = inst.evaluate(&v).map_err(|e| bad(e.to_string()))?;
    println!("problem   {id}");
    println!("xl1       {}", list(&r.xl1));
    println!("xl2       {}", list(&r.xl2));
    println!("set       {:?}{}", r.set, if r.is_unique { "" } else { " (one representative of many)" });
    println!("F         {}", out.upper_objective);
    println!("f         {}", out.lower_objective);
    println!("G viol    {}", out.upper_violation());
    println!("g viol    {}", out.lower_violation());
    Ok(())
}

fn axis(token: &str, inst: &ProblemInstance) -> Result<GridAxis, BenchError> {
    let d = inst.dims();
    let t = token.trim();
    let ax = match t {
        "xu1" => GridAxis::upper(0),
        "xu2" => GridAxis::upper(d.p),
        "xl1" => GridAxis::lower(0),
        "xl2" => GridAxis::lower(d.xl1_len()),
        _ => {
            let (level, rest) = match t.split_at_checked(1) {
                Some(("u", rest)) => (Level::Upper, rest),
                Some(("l", rest)) => (Level::Lower, rest),
                _ => return Err(bad(format!("bad axis {t:?}"))),
            };
            let index = rest.parse().map_err(|_| bad(format!("bad axis {t:?}")))?;
            GridAxis { level, index }
        }
    };
    Ok(ax)
}

fn grid(a: GridArgs) -> Result<(), BenchError> {
    let (_, inst) = build(&a.problem, &a.dims)?;
    let tokens: Vec<&str> = a.axes.split(',').collect();
    let [first, second] = tokens[..] else {
        return Err(bad("--axes takes exactly two names"));
    };
    let axes = [axis(first, &inst)?, axis(second, &inst)?];
    let mut base = BilevelVector::zeros(inst.dims());
    base.set_upper(&smd_core::clamp_to_bounds(&base.upper(), inst.upper_bounds()));
    base.set_lower(&smd_core::clamp_to_bounds(&base.lower(), inst.lower_bounds()));
    let spec = GridSpec { axes, resolution: a.res, base, lower_follows_psi: !a.fixed_lower };
    let samples = contour_grid(&inst, &spec).map_err(|e| bad(e.to_string()))?;
    let path = a.out.clone().unwrap_or_else(|| PathBuf::from("<stdout>"));
    let sink: Box<dyn Write> = match &a.out {
        Some(p) => Box::new(std::fs::File::create(p).map_err(|e| BenchError::io(p, e))?),
        None => Box::new(io::stdout().lock()),
    };
    let mut w = csv::Writer::from_writer(BufWriter::new(sink));
    w.write_record([first.trim(), second.trim(), "F", "f", "in_domain"])?;
    for s in samples {
        w.write_record([s.a.to_string(), s.b.to_string(), s.upper_objective.to_string(), s.lower_objective.to_string(), s.in_domain.to_string()])?;
    }
    w.flush().map_err(|e| BenchError::io(&path, e))
}

fn catalog(a: CatalogArgs) -> Result<(), BenchError> {
    let preset = preset(&a.dims)?;
    println!("{:<6} {:<9} {:<12} {:>5} {:>5} {:>5} {:>3} {:>3} {:>10} {:>10}", "prob", "p,q,r,s", "interaction", "llmm", "ulmm", "multi", "G", "g", "F*", "f*");
    for id in ProblemId::ALL {
        let d = preset.dims(id);
        let Ok(inst) = instantiate(id, d) else {
            println!("{id:<6} {:<9} (not valid at these dims)", format!("{},{},{},{}", d.p, d.q, d.r, d.s));
            continue;
        };
        let p = inst.properties().expect("suite problems carry properties");
        let o = inst.known_optimum().expect("suite problems have optima");
        let flag = |b: bool| if b { "yes" } else { "no" };
        println!(
            "{:<6} {:<9} {:<12} {:>5} {:>5} {:>5} {:>3} {:>3} {:>10.4} {:>10.4}",
            id.to_string(),
            format!("{},{},{},{}", d.p, d.q, d.r, d.s),
            format!("{:?}", p.interaction),
            flag(p.lower_multimodal),
            flag(p.upper_multimodal),
            flag(p.multiple_lower_optima),
            inst.upper_tags().len(),
            inst.lower_tags().len(),
            o.upper_objective,
            o.lower_objective,
        );
        let fmt_bounds = |b: &smd_core::Bounds| {
            b.intervals.iter().map(|iv| format!("[{:.4}, {:.4}]", iv.min_value(), iv.max_value())).collect::<Vec<_>>().join(" ")
        };
        println!("       upper {}", fmt_bounds(inst.upper_bounds()));
        println!("       lower {}", fmt_bounds(inst.lower_bounds()));
    }
    println!("\nllmm/ulmm: multimodal lower/upper level; multi: several lower optima per upper vector; G/g: constraint counts");
    Ok(())
}

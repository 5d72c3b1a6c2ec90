use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use serde::Serialize;

use cyclic_mds::props::{self, BranchNumbers, PropertyReport};
use cyclic_mds::search::{
    self, parse_predicates, CampaignOptions, CampaignSpec, Certificate, Mode, Predicate,
    SuiteReport,
};
use cyclic_mds::structured::{parse_cycle, FirstRow, Shape};
use cyclic_mds::{Element, FieldSpec, Matrix};

use crate::{CheckArgs, Cli, Command, OutputMode, SearchArgs, ShapeArgs, Suite, VerifyArgs};

/// Returns whether every verdict held.
pub fn run(cli: &Cli) -> Result<bool> {
    match &cli.command {
        Command::Construct { field, shape } => construct(cli, field, shape),
        Command::Check(args) => check(cli, args),
        Command::Search(args) => search_cmd(cli, args),
        Command::Verify(args) => verify(cli, args),
        Command::FieldInfo { field, elements } => field_info(cli, field, elements),
    }
}

fn parse_field(text: &str) -> Result<FieldSpec> {
    text.parse()
        .with_context(|| format!("invalid field `{text}`"))
}

fn print_json<T: Serialize>(value: &T) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

/// Shape and first row named by the shape flags.
fn shape_and_row(field: FieldSpec, args: &ShapeArgs) -> Result<(Shape, FirstRow)> {
    let row_of =
        |text: &str| FirstRow::parse(field, text).with_context(|| format!("invalid row `{text}`"));
    let given_row = || -> Result<FirstRow> {
        row_of(
            args.row
                .as_deref()
                .context("--row is required with this shape")?,
        )
    };
    if let Some(text) = &args.circulant {
        return Ok((Shape::Circulant, row_of(text)?));
    }
    if let Some(text) = &args.left_circulant {
        return Ok((Shape::LeftCirculant, row_of(text)?));
    }
    if let Some(g) = args.g_circulant {
        return Ok((Shape::GCirculant(g), given_row()?));
    }
    if let Some(text) = &args.cyclic {
        let row = given_row()?;
        let rho =
            parse_cycle(text, row.len()).with_context(|| format!("invalid cycle `{text}`"))?;
        return Ok((Shape::Cyclic(rho), row));
    }
    bail!("one of --circulant, --left-circulant, --g-circulant or --cyclic is required")
}

fn construct(cli: &Cli, field: &str, args: &ShapeArgs) -> Result<bool> {
    let (shape, row) = shape_and_row(parse_field(field)?, args)?;
    let m = shape.build(&row)?;
    match cli.output {
        OutputMode::Json => print_json(&m)?,
        OutputMode::Human => {
            println!("{shape} {row} over {}", m.field());
            print!("{m}");
        }
    }
    Ok(true)
}

#[derive(Serialize)]
struct CheckOutput {
    reports: Vec<PropertyReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    branch_numbers: Option<BranchNumbers>,
}

fn timed(cli: &Cli, check: impl FnOnce() -> PropertyReport) -> PropertyReport {
    let start = Instant::now();
    let report = check();
    if cli.timings {
        report.with_elapsed_ms(start.elapsed().as_millis() as u64)
    } else {
        report
    }
}

/// When a g-circulant of order `2^d` (`d >= 2`, odd `g`) is orthogonal, the
/// even/odd obstruction names the singular sub-g-circulant.
fn obstruction_report(shape: &Shape, row: &FirstRow) -> Option<PropertyReport> {
    let g = match shape {
        Shape::Circulant => 1,
        Shape::GCirculant(g) => *g,
        _ => return None,
    };
    let k = row.len();
    if k < 4 || !k.is_power_of_two() || g % 2 == 0 {
        return None;
    }
    props::orthogonality_obstruction_2d(row, g, k.trailing_zeros()).ok()
}

fn check(cli: &Cli, args: &CheckArgs) -> Result<bool> {
    let predicates = parse_predicates(&args.properties)?;
    let (matrix, structure) = match &args.matrix {
        Some(path) => {
            let text = fs::read_to_string(path)
                .with_context(|| format!("cannot read {}", path.display()))?;
            let m: Matrix = serde_json::from_str(&text)
                .with_context(|| format!("invalid matrix JSON in {}", path.display()))?;
            if let Some(field) = &args.field {
                if parse_field(field)? != m.field() {
                    bail!(
                        "--field {field} disagrees with the file's field {}",
                        m.field()
                    );
                }
            }
            (m, None)
        }
        None => {
            let field = args
                .field
                .as_deref()
                .context("--field is required unless --matrix is given")?;
            let (shape, row) = shape_and_row(parse_field(field)?, &args.shape)?;
            (shape.build(&row)?, Some((shape, row)))
        }
    };
    let mut reports: Vec<PropertyReport> = predicates
        .iter()
        .map(|p| timed(cli, || p.check(&matrix)))
        .collect();
    let orthogonal = props::is_orthogonal(&matrix).verdict;
    if predicates.contains(&Predicate::Mds) && orthogonal {
        if let Some((shape, row)) = &structure {
            if let Some(r) = obstruction_report(shape, row) {
                reports.push(r);
            }
        }
    }
    let branch_numbers = if args.branch {
        Some(props::branch_numbers(&matrix, args.budget)?)
    } else {
        None
    };
    let passed = reports.iter().all(|r| r.verdict);
    match cli.output {
        OutputMode::Json => print_json(&CheckOutput {
            reports,
            branch_numbers,
        })?,
        OutputMode::Human => {
            for r in &reports {
                println!("{}", report_line(r)?);
            }
            if let Some(b) = branch_numbers {
                println!(
                    "branch numbers: differential {}, linear {}",
                    b.differential, b.linear
                );
            }
        }
    }
    Ok(passed)
}

fn report_line(r: &PropertyReport) -> Result<String> {
    let mut line = format!("{} {}", if r.verdict { "PASS" } else { "FAIL" }, r.property);
    if let Some(w) = &r.witness {
        line.push_str(&format!("  {}", serde_json::to_string(w)?));
    }
    if let Some(ms) = r.elapsed_ms {
        line.push_str(&format!("  ({ms} ms)"));
    }
    Ok(line)
}

/// Prints a line on stderr at each tenth of the scan.
fn progress_printer(label: String) -> search::Progress {
    let last = Arc::new(AtomicU64::new(0));
    Arc::new(move |done, total| {
        let tenth = done * 10 / total.max(1);
        if last.fetch_max(tenth, Ordering::Relaxed) < tenth {
            eprintln!("{label}: {done}/{total}");
        }
    })
}

fn campaign_options(cli: &Cli, ceiling: u64, label: &str) -> CampaignOptions {
    CampaignOptions {
        ceiling,
        progress: (!cli.quiet).then(|| progress_printer(label.to_string())),
        ..CampaignOptions::default()
    }
}

fn search_cmd(cli: &Cli, args: &SearchArgs) -> Result<bool> {
    let field = parse_field(&args.field)?;
    let shape: Shape = args
        .shape
        .parse()
        .with_context(|| format!("invalid shape `{}`", args.shape))?;
    let mode = match (args.exhaustive, args.random, args.seed) {
        (true, None, _) => Mode::Exhaustive,
        (false, Some(trials), Some(seed)) => Mode::Random { seed, trials },
        _ => bail!("give either --exhaustive or --random <TRIALS> --seed <SEED>"),
    };
    let spec = CampaignSpec {
        field,
        k: args.k,
        shape,
        predicates: parse_predicates(&args.require)?,
        mode,
        limit: args.limit,
    };
    let mut options = campaign_options(cli, args.ceiling, "search");
    options.parallel = !args.sequential;
    options.cheapest_first = !args.given_order;
    let start = Instant::now();
    let mut result = search::run_campaign(&spec, &options)?;
    if cli.timings {
        result.elapsed_ms = Some(start.elapsed().as_millis() as u64);
    }
    let json = serde_json::to_string_pretty(&result)?;
    if let Some(path) = &args.out {
        write_file(path, &json)?;
    }
    match cli.output {
        OutputMode::Json => {
            println!("{json}");
            eprintln!("{}", result.summary());
        }
        OutputMode::Human => {
            for hit in &result.hits {
                println!("{}", FirstRow::new(field, hit.row.clone())?);
            }
            println!("{}", result.summary());
        }
    }
    Ok(true)
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    }
    fs::write(path, format!("{text}\n")).with_context(|| format!("cannot write {}", path.display()))
}

fn verify(cli: &Cli, args: &VerifyArgs) -> Result<bool> {
    if args.suite != Suite::Nonexistence2d
        && (args.field.is_some() || args.d.is_some() || !args.g.is_empty())
    {
        bail!("--field, --d and --g apply only to nonexistence-2d");
    }
    let start = Instant::now();
    let mut report = match args.suite {
        Suite::ReferenceExamples => search::verify_reference_examples()?,
        Suite::Lemmas => search::verify_lemmas(args.trials, args.seed)?,
        Suite::Equivalence => search::verify_equivalence(args.trials, args.seed)?,
        Suite::Nonexistence2d => return nonexistence(cli, args),
    };
    if cli.timings {
        let ms = start.elapsed().as_millis() as u64;
        report
            .reports
            .iter_mut()
            .for_each(|r| r.elapsed_ms = Some(ms));
    }
    print_suite(cli, &report)?;
    Ok(report.passed)
}

fn print_suite(cli: &Cli, report: &SuiteReport) -> Result<()> {
    match cli.output {
        OutputMode::Json => print_json(report)?,
        OutputMode::Human => {
            for r in &report.reports {
                println!("{}", report_line(r)?);
            }
            let passed = report.reports.iter().filter(|r| r.verdict).count();
            println!("{}: {passed}/{} passed", report.suite, report.reports.len());
        }
    }
    if let Some(first) = report.first_failure() {
        eprintln!("first failing assertion: {}", first.property);
    }
    Ok(())
}

fn certificate_path(dir: &Path, cert: &Certificate) -> PathBuf {
    dir.join(format!(
        "nonexistence-2d-m{}-{:#x}-d{}.json",
        cert.field.degree(),
        cert.field.modulus(),
        cert.d
    ))
}

fn nonexistence(cli: &Cli, args: &VerifyArgs) -> Result<bool> {
    let field = parse_field(
        args.field
            .as_deref()
            .context("--field is required for nonexistence-2d")?,
    )?;
    let d = args.d.context("--d is required for nonexistence-2d")?;
    let gs = if args.g.is_empty() {
        search::odd_residues(1usize.checked_shl(d).unwrap_or(0))
    } else {
        args.g.clone()
    };
    let start = Instant::now();
    let mut cert = search::verify_nonexistence_2d(
        field,
        d,
        &gs,
        &campaign_options(cli, args.ceiling, "nonexistence-2d"),
    )?;
    if cli.timings {
        cert.elapsed_ms = Some(start.elapsed().as_millis() as u64);
    }
    let json = serde_json::to_string_pretty(&cert)?;
    let path = certificate_path(&args.out, &cert);
    write_file(&path, &json)?;
    match cli.output {
        OutputMode::Json => println!("{json}"),
        OutputMode::Human => {
            for s in &cert.scans {
                let obstructed = s.obstructions.iter().filter(|o| o.verdict).count();
                println!(
                    "g = {}: {} hits / {} scanned / {}, {} orthogonal, {obstructed} obstructed",
                    s.g,
                    s.hit_count,
                    s.candidates_scanned,
                    if s.exhausted {
                        "exhausted"
                    } else {
                        "not exhausted"
                    },
                    s.orthogonal_count,
                );
            }
            println!(
                "{}: {} hits in {} rows, verdict {}",
                cert.field,
                cert.total_hits,
                cert.total_scanned,
                if cert.verdict { "PASS" } else { "FAIL" }
            );
        }
    }
    eprintln!("certificate written to {}", path.display());
    Ok(cert.verdict)
}

#[derive(Serialize)]
struct ElementInfo {
    literal: String,
    hex: Element,
    polynomial: String,
    inverse: Option<Element>,
    multiplicative_order: Option<u32>,
}

#[derive(Serialize)]
struct FieldInfo {
    field: FieldSpec,
    degree: u32,
    order: u32,
    modulus: String,
    elements: Vec<ElementInfo>,
}

fn modulus_poly(f: FieldSpec) -> String {
    let terms: Vec<String> = (0..=f.degree())
        .filter(|i| f.modulus() >> i & 1 == 1)
        .map(|i| match i {
            0 => "1".to_string(),
            1 => "x".to_string(),
            _ => format!("x^{i}"),
        })
        .collect();
    terms.join("+")
}

fn field_info(cli: &Cli, field: &str, elements: &[String]) -> Result<bool> {
    let f = parse_field(field)?;
    let elements = elements
        .iter()
        .map(|text| {
            let x = f
                .parse_literal(text)
                .with_context(|| format!("invalid element `{text}`"))?;
            let order = (!x.is_zero()).then(|| {
                (1..f.order())
                    .find(|&n| f.pow(x, u64::from(n)) == Element::ONE)
                    .unwrap_or(0)
            });
            Ok(ElementInfo {
                literal: text.clone(),
                hex: x,
                polynomial: f.format_poly(x),
                inverse: f.inv(x).ok(),
                multiplicative_order: order,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let info = FieldInfo {
        field: f,
        degree: f.degree(),
        order: f.order(),
        modulus: modulus_poly(f),
        elements,
    };
    match cli.output {
        OutputMode::Json => print_json(&info)?,
        OutputMode::Human => {
            println!(
                "{}: {} elements, modulus {}",
                info.field, info.order, info.modulus
            );
            for e in &info.elements {
                let inverse = e.inverse.map_or("none".to_string(), |i| i.to_string());
                let order = e
                    .multiplicative_order
                    .map_or("-".to_string(), |o| o.to_string());
                println!(
                    "{} = {} = {}, inverse {inverse}, order {order}",
                    e.literal, e.hex, e.polynomial
                );
            }
        }
    }
    Ok(true)
}

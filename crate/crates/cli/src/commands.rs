use std::fs::File;
use std::io::{self, BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use capsketch::bench::{run_point_bench, BenchRow, PointBenchParams};
use capsketch::element::aggregate;
use capsketch::estimators::{Mode, Pipeline, PipelineConfig};
use capsketch::mappers::replica_count;
use capsketch::oracle::{exact_statistic, ZIPF_KEYS};
use capsketch::random::Ordinal;
use capsketch::transforms::Statistic;
use capsketch::Error;

use crate::error::{CliError, CliResult};
use crate::file::SketchFile;
use crate::input::for_each_element;

pub fn parse_statistic(descriptor: &str) -> CliResult<Statistic> {
    descriptor.parse().map_err(|e| match e {
        Error::UnsupportedStatistic(_) => CliError::Core(e),
        other => CliError::Descriptor(format!("{descriptor:?}: {other}")),
    })
}

fn open_input(path: Option<&Path>) -> CliResult<Box<dyn BufRead>> {
    match path {
        None => Ok(Box::new(BufReader::new(io::stdin()))),
        Some(p) if p == Path::new("-") => Ok(Box::new(BufReader::new(io::stdin()))),
        Some(p) => {
            let f = File::open(p).map_err(|e| CliError::io(p.display().to_string(), e))?;
            Ok(Box::new(BufReader::new(f)))
        }
    }
}

fn write_out(out: &mut dyn Write, text: std::fmt::Arguments<'_>) -> CliResult<()> {
    out.write_fmt(text).map_err(|e| CliError::io("stdout", e))
}

/// Default sketch size: `⌈ε^{-2}⌉ + 2`, for a distinct-count CV near `ε`.
pub fn default_k(epsilon: f64) -> u32 {
    (epsilon.powi(-2)).ceil().min(u32::MAX as f64 - 2.0) as u32 + 2
}

#[derive(Debug, Clone)]
pub struct BuildArgs {
    pub input: Option<PathBuf>,
    pub stat: String,
    pub mode: Mode,
    pub epsilon: f64,
    pub r: Option<u32>,
    pub k: Option<u32>,
    pub seed: u64,
    /// Shard nonce of the ordinals; drawn at random when absent.
    pub shard: Option<u64>,
    /// Index of the first element.
    pub offset: u64,
    pub output: PathBuf,
}

/// Builds a sketch from TSV input and returns it with the shard used.
pub fn build_sketch(args: &BuildArgs, input: impl BufRead) -> CliResult<(SketchFile, u64)> {
    let stat = parse_statistic(&args.stat)?;
    let r = match args.r {
        Some(r) => r,
        None => replica_count(args.epsilon)?,
    };
    let k = args.k.unwrap_or_else(|| default_k(args.epsilon));
    let cfg = PipelineConfig::new(r, args.epsilon, k, args.seed)?;
    let mut pipeline = Pipeline::new(args.mode, cfg, &stat)?;
    let shard = args.shard.unwrap_or_else(rand::random);
    for_each_element(input, |e, i| {
        let index = args.offset.checked_add(i).ok_or_else(|| CliError::Usage("element index overflows".into()))?;
        Ok(pipeline.ingest(e, Ordinal::new(shard, index))?)
    })?;
    Ok((SketchFile::new(stat, pipeline), shard))
}

pub fn cmd_build(args: &BuildArgs, out: &mut dyn Write, err: &mut dyn Write) -> CliResult<()> {
    let (file, shard) = build_sketch(args, open_input(args.input.as_deref())?)?;
    file.write(&args.output)?;
    if args.shard.is_none() {
        write_out(err, format_args!("note: random shard nonce {shard}; pass --shard for reproducible merges\n"))?;
    }
    write_out(out, format_args!("elements\t{}\n", file.pipeline.elements()))?;
    write_out(out, format_args!("outputs\t{}\n", file.pipeline.outputs()))
}

/// Merges files in byte order of their contents, so the result does not
/// depend on argument order.
pub fn merge_files(files: &[SketchFile]) -> CliResult<SketchFile> {
    let mut encoded: Vec<(Vec<u8>, &SketchFile)> = files.iter().map(|f| (f.to_bytes(), f)).collect();
    encoded.sort_by(|a, b| a.0.cmp(&b.0));
    let mut iter = encoded.into_iter().map(|(_, f)| f);
    let first = iter.next().ok_or_else(|| CliError::Usage("merge needs at least one input".into()))?;
    let mut acc = first.clone();
    for f in iter {
        acc = acc.merge(f)?;
    }
    Ok(acc)
}

pub fn cmd_merge(inputs: &[PathBuf], output: &Path) -> CliResult<()> {
    let files = inputs.iter().map(|p| SketchFile::read(p)).collect::<CliResult<Vec<_>>>()?;
    merge_files(&files)?.write(output)
}

#[derive(Debug, Clone, Default)]
pub struct EstimateArgs {
    pub sketch: PathBuf,
    pub stat: Option<String>,
    pub t: Option<f64>,
}

pub fn cmd_estimate(args: &EstimateArgs, out: &mut dyn Write, err: &mut dyn Write) -> CliResult<()> {
    let file = SketchFile::read(&args.sketch)?;
    estimate_file(&file, args.stat.as_deref(), args.t, out, err)
}

pub fn estimate_file(
    file: &SketchFile,
    stat: Option<&str>,
    t: Option<f64>,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> CliResult<()> {
    if let Some(t) = t {
        if stat.is_some() {
            return Err(CliError::Usage("--t and --stat are exclusive".into()));
        }
        let v = file.pipeline.point_query(t)?;
        return write_out(out, format_args!("{v}\n"));
    }
    let stat = match stat {
        Some(d) => {
            let s = parse_statistic(d)?;
            if file.mode() != Mode::FullRange && s != file.stat {
                return Err(CliError::Usage(format!(
                    "a {} sketch answers only {}; --stat overrides need a fullrange sketch",
                    file.mode(),
                    file.stat
                )));
            }
            s
        }
        None => file.stat,
    };
    let est = file.pipeline.estimate(&stat)?;
    write_out(out, format_args!("{}\n", est.value))?;
    if est.clamped {
        write_out(err, format_args!("warning: negative estimate {} clamped to 0\n", est.raw))?;
    }
    if est.rho > 1.0 || est.approx_relerr > 0.0 {
        write_out(out, format_args!("rho\t{}\n", est.rho))?;
        write_out(out, format_args!("error_bound\t{}\n", est.error_bound))?;
        write_out(out, format_args!("approx_relerr\t{}\n", est.approx_relerr))?;
    }
    Ok(())
}

pub fn cmd_exact(input: Option<&Path>, stat: &str, out: &mut dyn Write) -> CliResult<()> {
    let stat = parse_statistic(stat)?;
    let mut elements = Vec::new();
    for_each_element(open_input(input)?, |e, _| {
        elements.push(e.clone());
        Ok(())
    })?;
    let v = exact_statistic(&aggregate(&elements), &stat);
    write_out(out, format_args!("{v}\n"))
}

#[derive(Debug, Clone)]
pub struct BenchArgs {
    pub alphas: Vec<f64>,
    pub n: usize,
    pub caps: Vec<f64>,
    pub replicas: Vec<u32>,
    pub k: u32,
    pub reps: u32,
    pub keys: usize,
    pub seed: u64,
    pub out: Option<PathBuf>,
}

impl Default for BenchArgs {
    fn default() -> Self {
        Self {
            alphas: vec![1.1, 1.2, 1.5, 2.0],
            n: 100_000,
            caps: vec![1.0, 5.0, 20.0, 100.0, 500.0],
            replicas: vec![1, 10, 100],
            k: 100,
            reps: 200,
            keys: ZIPF_KEYS,
            seed: 1,
            out: None,
        }
    }
}

pub fn write_bench_csv(rows: &[BenchRow], out: impl Write) -> CliResult<()> {
    let mut w = csv::Writer::from_writer(out);
    let csv_err = |e: csv::Error| CliError::io("csv", e.into());
    w.write_record(BenchRow::HEADER).map_err(csv_err)?;
    for row in rows {
        w.write_record(row.record()).map_err(csv_err)?;
    }
    w.flush().map_err(|e| CliError::io("csv", e))
}

pub fn cmd_bench(args: &BenchArgs, out: &mut dyn Write) -> CliResult<()> {
    if args.n == 0 || args.keys == 0 || args.k < 2 || args.reps == 0 {
        return Err(CliError::Usage("n, keys and reps must be positive and k at least 2".into()));
    }
    if args.replicas.contains(&0) {
        return Err(CliError::Usage("replica counts must be positive".into()));
    }
    let params = PointBenchParams {
        alphas: args.alphas.clone(),
        caps: args.caps.clone(),
        replicas: args.replicas.clone(),
        k: args.k,
        n_elements: args.n,
        n_keys: args.keys,
        reps: args.reps,
        seed: args.seed,
    };
    let rows = run_point_bench(&params)?;
    match &args.out {
        Some(p) => write_bench_csv(&rows, File::create(p).map_err(|e| CliError::io(p.display().to_string(), e))?),
        None => write_bench_csv(&rows, out),
    }
}

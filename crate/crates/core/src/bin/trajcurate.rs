use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use trajcurate::pipeline::{
    export_templates, gen_corpus, read_jsonl, run_all, run_classify, run_filter, run_match,
    write_jsonl, CorpusManifest, CorpusSpec, PipelineConfig, PipelineReport, FILTERED_FILE,
    LABELS_FILE, PAIRS_FILE, REPORT_FILE, VERDICTS_FILE,
};
use trajcurate::{Error, Result};

/// Camera-trajectory curation: filter, classify and match pose files.
#[derive(Parser)]
#[command(name = "trajcurate", version)]
struct Cli {
    /// Worker threads (overrides the config file).
    #[arg(long, global = true, env = "TRAJCURATE_JOBS")]
    jobs: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write the 50 canonical templates and templates.json.
    Templates {
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Generate a synthetic corpus with optional planted defects.
    Synth {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Smoothness filter; writes verdicts.jsonl and filtered.json.
    Filter {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Template classification; writes labels.jsonl.
    Classify {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Intra-class matching; writes pairs.jsonl.
    Match {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        labels: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// All stages; writes every artifact plus report.json.
    Pipeline {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Matching seed (overrides the config file).
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Print a summary of DIR/report.json.
    Report {
        #[arg(long)]
        dir: PathBuf,
    },
}

fn load_config(path: Option<&Path>, jobs: Option<usize>) -> Result<PipelineConfig> {
    let mut cfg = match path {
        Some(p) => PipelineConfig::load(p)?,
        None => PipelineConfig::default(),
    };
    if jobs.is_some() {
        cfg.jobs = jobs;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::Io {
        path: dir.to_path_buf(),
        source: e,
    })
}

fn rate_check(stage: &'static str, errors: usize, total: usize) -> Result<()> {
    if errors * 10 > total {
        Err(Error::ErrorRateExceeded {
            stage,
            errors,
            total,
        })
    } else {
        Ok(())
    }
}

fn report_errors(errors: &[trajcurate::pipeline::EntryError]) {
    for e in errors {
        eprintln!("warning: {} ({}): {}", e.id, e.stage, e.message);
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Templates { out, config } => {
            let cfg = load_config(config.as_deref(), cli.jobs)?;
            let written = export_templates(&cfg.templates, &out)?;
            println!("wrote {} files to {}", written.len(), out.display());
        }
        Command::Synth {
            spec,
            seed,
            out,
            config,
        } => {
            let cfg = load_config(config.as_deref(), cli.jobs)?;
            let spec = CorpusSpec::load(&spec)?;
            spec.validate(&cfg.templates)?;
            let m = gen_corpus(&spec, &cfg.templates, seed, &out)?;
            println!(
                "wrote {} trajectories to {}",
                m.entries.len(),
                out.display()
            );
        }
        Command::Filter {
            manifest,
            out,
            config,
        } => {
            let cfg = load_config(config.as_deref(), cli.jobs)?;
            let m = CorpusManifest::load(&manifest)?;
            let f = run_filter(&m, &cfg)?;
            create_dir(&out)?;
            write_jsonl(out.join(VERDICTS_FILE), &f.verdicts)?;
            f.kept.save(out.join(FILTERED_FILE))?;
            report_errors(&f.errors);
            println!(
                "{} verdicts, {} kept",
                f.verdicts.len(),
                f.kept.entries.len()
            );
            rate_check("filter", f.errors.len(), m.entries.len())?;
        }
        Command::Classify {
            manifest,
            out,
            config,
        } => {
            let cfg = load_config(config.as_deref(), cli.jobs)?;
            let m = CorpusManifest::load(&manifest)?;
            let c = run_classify(&m, &cfg)?;
            create_dir(&out)?;
            write_jsonl(out.join(LABELS_FILE), &c.labels)?;
            report_errors(&c.errors);
            println!("{} labels", c.labels.len());
            rate_check("classify", c.errors.len(), m.entries.len())?;
        }
        Command::Match {
            manifest,
            labels,
            out,
            config,
        } => {
            let cfg = load_config(config.as_deref(), cli.jobs)?;
            let m = CorpusManifest::load(&manifest)?;
            let labels = read_jsonl(&labels)?;
            let r = run_match(&labels, &m, &cfg)?;
            create_dir(&out)?;
            write_jsonl(out.join(PAIRS_FILE), &r.pairs)?;
            report_errors(&r.errors);
            println!(
                "{} pairs accepted of {} evaluated",
                r.pairs.len(),
                r.candidates_evaluated
            );
            rate_check("match", r.errors.len(), labels.len())?;
        }
        Command::Pipeline {
            manifest,
            out,
            config,
            seed,
        } => {
            let mut cfg = load_config(config.as_deref(), cli.jobs)?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            let m = CorpusManifest::load(&manifest)?;
            let report = match run_all(&m, &cfg, &out) {
                Ok(r) => r,
                Err(e) => {
                    if let Ok(partial) = PipelineReport::load(out.join(REPORT_FILE)) {
                        report_errors(&partial.errors);
                    }
                    return Err(e);
                }
            };
            report_errors(&report.errors);
            print!("{}", report.summary());
        }
        Command::Report { dir } => {
            let report = PipelineReport::load(dir.join(REPORT_FILE))?;
            print!("{}", report.summary());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::ErrorRateExceeded { .. } => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}

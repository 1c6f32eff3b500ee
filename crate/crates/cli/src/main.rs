use std::fmt::Display;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use textbin::compare::{acceptance_corpus, compare_dir, write_corpus, CompareError};
use textbin::pnm::{self, PnmError, PnmImage};
use textbin::synth::{generate, SynthError, SynthSpec};
use textbin::{binarize_pipeline, evaluate, BinaryImage, Method, PipelineConfig};

#[derive(Parser)]
#[command(
    name = "textbin",
    version,
    about = "Binarize text images and benchmark binarization methods"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Binarize a PGM/PPM/PBM image into a PBM
    Binarize {
        input: PathBuf,
        output: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Write every intermediate stage, report.txt, boxes.txt and config.txt here
        #[arg(long, value_name = "DIR")]
        dump_stages: Option<PathBuf>,
        #[arg(long, default_value = "sliding")]
        method: Method,
    },
    /// Render a synthetic spec to IMAGE.pgm and IMAGE.truth.pbm
    Synth { spec: PathBuf, out_dir: PathBuf },
    /// Write the twelve-image benchmark corpus
    Corpus { out_dir: PathBuf },
    /// Score a predicted PBM against a ground-truth PBM
    Eval { pred: PathBuf, truth: PathBuf },
    /// Score every method on each NAME.pgm / NAME.truth.pbm pair in a directory
    Compare {
        dir: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, value_name = "PATH")]
        csv: Option<PathBuf>,
    },
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn io(context: impl Display, err: impl Display) -> Self {
        Self {
            code: 1,
            message: format!("{context}: {err}"),
        }
    }

    fn config(message: impl Display) -> Self {
        Self {
            code: 2,
            message: message.to_string(),
        }
    }

    fn format(message: impl Display) -> Self {
        Self {
            code: 3,
            message: message.to_string(),
        }
    }

    fn pnm(path: &Path, err: PnmError) -> Self {
        if err.is_io() {
            Self::io(path.display(), err)
        } else {
            Self::format(format!("{}: {err}", path.display()))
        }
    }
}

type CmdResult = Result<(), Failure>;

fn read_text(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::io(path.display(), e))
}

fn load_config(path: Option<&Path>) -> Result<PipelineConfig, Failure> {
    match path {
        None => Ok(PipelineConfig::default()),
        Some(p) => PipelineConfig::parse(&read_text(p)?)
            .map_err(|e| Failure::config(format!("{}: {e}", p.display()))),
    }
}

fn read_pnm(path: &Path) -> Result<PnmImage, Failure> {
    pnm::read_image(path).map_err(|e| Failure::pnm(path, e))
}

fn read_pbm(path: &Path) -> Result<BinaryImage, Failure> {
    match read_pnm(path)? {
        PnmImage::Binary(b) => Ok(b),
        _ => Err(Failure::format(format!(
            "{}: expected a PBM image",
            path.display()
        ))),
    }
}

fn binarize(
    input: &Path,
    output: &Path,
    config: Option<&Path>,
    dump: Option<&Path>,
    method: Method,
) -> CmdResult {
    let cfg = load_config(config)?;
    let img = read_pnm(input)?.to_gray();
    let binary = if method == Method::Sliding {
        let out = binarize_pipeline(&img, &cfg);
        if let Some(dir) = dump {
            out.dump(dir).map_err(|e| Failure::pnm(dir, e))?;
            let cfg_path = dir.join("config.txt");
            std::fs::write(&cfg_path, cfg.to_kv())
                .map_err(|e| Failure::io(cfg_path.display(), e))?;
        }
        out.binary
    } else {
        if dump.is_some() {
            return Err(Failure::config(
                "--dump-stages is only available with --method sliding",
            ));
        }
        method.run(&img, &cfg).map_err(Failure::config)?
    };
    pnm::write_binary(&binary, output).map_err(|e| Failure::pnm(output, e))
}

fn synth_failure(err: CompareError) -> Failure {
    match err {
        CompareError::Image(path, e) => Failure::pnm(&path, e),
        e if e.is_io() => Failure::io("corpus", e),
        e @ (CompareError::EmptyCorpus(_) | CompareError::Synth(..) | CompareError::Method(..)) => {
            Failure::config(e)
        }
        e => Failure::format(e),
    }
}

fn synth(spec_path: &Path, out_dir: &Path) -> CmdResult {
    let text = read_text(spec_path)?;
    let spec = SynthSpec::parse(&text)
        .map_err(|e| Failure::config(format!("{}: {e}", spec_path.display())))?;
    let (img, truth) = generate(&spec)
        .map_err(|e: SynthError| Failure::config(format!("{}: {e}", spec_path.display())))?;
    std::fs::create_dir_all(out_dir).map_err(|e| Failure::io(out_dir.display(), e))?;
    let stem = spec_path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("image");
    let pgm = out_dir.join(format!("{stem}.pgm"));
    pnm::write_gray(&img, &pgm).map_err(|e| Failure::pnm(&pgm, e))?;
    let pbm = out_dir.join(format!("{stem}.truth.pbm"));
    pnm::write_binary(&truth, &pbm).map_err(|e| Failure::pnm(&pbm, e))
}

fn eval(pred: &Path, truth: &Path) -> CmdResult {
    let report = evaluate(&read_pbm(pred)?, &read_pbm(truth)?).map_err(Failure::format)?;
    println!("{report}");
    Ok(())
}

fn compare(dir: &Path, config: Option<&Path>, csv: Option<&Path>) -> CmdResult {
    let cfg = load_config(config)?;
    let result = compare_dir(dir, &cfg, &Method::ALL).map_err(synth_failure)?;
    print!("{}", result.to_table());
    if let Some(path) = csv {
        std::fs::write(path, result.to_csv()).map_err(|e| Failure::io(path.display(), e))?;
    }
    Ok(())
}

fn run(cli: Cli) -> CmdResult {
    match cli.command {
        Command::Binarize {
            input,
            output,
            config,
            dump_stages,
            method,
        } => binarize(
            &input,
            &output,
            config.as_deref(),
            dump_stages.as_deref(),
            method,
        ),
        Command::Synth { spec, out_dir } => synth(&spec, &out_dir),
        Command::Corpus { out_dir } => {
            write_corpus(&out_dir, &acceptance_corpus()).map_err(synth_failure)
        }
        Command::Eval { pred, truth } => eval(&pred, &truth),
        Command::Compare { dir, config, csv } => compare(&dir, config.as_deref(), csv.as_deref()),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("textbin: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

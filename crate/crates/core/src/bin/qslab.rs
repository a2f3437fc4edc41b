use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use qslab::experiments::{
    describe_model, load_bundle, read_text, report_bundle, run, to_pretty, Experiment, Format, RunConfig,
};
use qslab::models::ModelSpec;
use qslab::QsError;

#[derive(Parser)]
#[command(name = "qslab", version, about = "Finite-dimensional lab for K-structure non-uniqueness")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Clone)]
struct Common {
    /// Model spec file (JSON).
    #[arg(long)]
    model: Option<PathBuf>,
    #[arg(long, env = "QSLAB_SEED", default_value_t = 0)]
    seed: u64,
    /// Expected verdict; `any` accepts all.
    #[arg(long)]
    expect: Option<String>,
    /// Artifact prefix; without it the report goes to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_delimiter = ',', default_value = "json")]
    format: Vec<Format>,
    /// Include witness matrices.
    #[arg(long)]
    full: bool,
    #[arg(long)]
    state: Option<String>,
    #[arg(long)]
    kind_tol: Option<f64>,
    #[arg(long)]
    cluster_tol: Option<f64>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Describe a model.
    Model {
        #[arg(long)]
        model: PathBuf,
    },
    /// Certify non-uniqueness for a witness.
    Certify {
        #[command(flatten)]
        c: Common,
        #[arg(long)]
        witness: String,
        #[arg(long)]
        structure: Option<String>,
    },
    Timetravel {
        #[command(flatten)]
        c: Common,
        #[arg(long)]
        t: f64,
        #[arg(long)]
        samples: Option<usize>,
    },
    Altreality {
        #[command(flatten)]
        c: Common,
        #[arg(long)]
        structure: Option<String>,
        #[arg(long)]
        witness_seed: Option<u64>,
    },
    Altlaws {
        #[command(flatten)]
        c: Common,
        #[arg(long)]
        samples: Option<usize>,
    },
    Ergodicity {
        #[command(flatten)]
        c: Common,
        #[arg(long)]
        bound: Option<i64>,
        #[arg(long)]
        tol: Option<f64>,
    },
    Spacegraph {
        #[command(flatten)]
        c: Common,
        #[arg(long)]
        mi_floor: Option<f64>,
    },
    Decohere {
        #[command(flatten)]
        c: Common,
        #[arg(long)]
        times: Option<usize>,
        #[arg(long)]
        t_end: Option<f64>,
        #[arg(long)]
        witness_seed: Option<u64>,
    },
    Coherent {
        #[command(flatten)]
        c: Common,
        #[arg(long)]
        sites: Option<usize>,
        #[arg(long)]
        hbar: Option<f64>,
    },
    Factorfamily {
        #[command(flatten)]
        c: Common,
        #[arg(long)]
        count: Option<usize>,
    },
    /// Run a single config file.
    Run {
        config: PathBuf,
    },
    /// Run a bundle of configs.
    Bundle {
        bundle: PathBuf,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        /// Output directory for per-run artifacts and summary.json.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn config(exp: Experiment, c: Common) -> RunConfig {
    let mut cfg = RunConfig::new(exp);
    cfg.model_file = c.model;
    cfg.seed = c.seed;
    cfg.expect = c.expect;
    cfg.output = c.out;
    cfg.formats = c.format;
    cfg.full = c.full;
    cfg.params.state = c.state;
    cfg.tolerances.kind = c.kind_tol;
    cfg.tolerances.cluster = c.cluster_tol;
    cfg
}

fn execute(cfg: RunConfig) -> ExitCode {
    let outcome = run(&cfg);
    if let Some(e) = &outcome.error {
        eprintln!("qslab: {e}");
    } else if cfg.output.is_none() {
        print!("{}", to_pretty(&outcome.report));
    }
    if let (Some(v), Some(e)) = (&outcome.verdict, &outcome.expected) {
        if v != e {
            eprintln!("qslab: verdict {v} differs from expected {e}");
        }
    }
    ExitCode::from(outcome.exit_code() as u8)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match cli.cmd {
        Cmd::Model { model } => {
            let described = read_text(&model).and_then(|t| ModelSpec::from_json(&t)).and_then(|s| describe_model(&s));
            return match described {
                Ok(v) => {
                    print!("{}", to_pretty(&v));
                    ExitCode::SUCCESS
                }
                Err(e) => fail(e),
            };
        }
        Cmd::Run { config } => match read_text(&config).and_then(|t| RunConfig::from_json(&t)) {
            Ok(mut cfg) => {
                if let (Some(p), Some(base)) = (&cfg.model_file, config.parent()) {
                    if p.is_relative() {
                        cfg.model_file = Some(base.join(p));
                    }
                }
                cfg
            }
            Err(e) => return fail(e),
        },
        Cmd::Bundle { bundle, jobs, out } => {
            let report = load_bundle(&bundle).and_then(|cfgs| report_bundle(&cfgs, jobs, out.as_deref()));
            return match report {
                Ok(r) => {
                    if out.is_none() {
                        print!("{}", to_pretty(&r.summary));
                    }
                    for o in r.outcomes.iter().filter(|o| o.exit_code() != 0) {
                        eprintln!(
                            "qslab: {} {}",
                            o.name,
                            o.error.clone().unwrap_or_else(|| format!(
                                "verdict {} differs from expected {}",
                                o.verdict.as_deref().unwrap_or("-"),
                                o.expected.as_deref().unwrap_or("-")
                            ))
                        );
                    }
                    ExitCode::from(r.exit_code as u8)
                }
                Err(e) => fail(e),
            };
        }
        Cmd::Certify { c, witness, structure } => {
            let mut cfg = config(Experiment::Certify, c);
            cfg.params.witness = Some(witness);
            cfg.params.structure = structure;
            cfg
        }
        Cmd::Timetravel { c, t, samples } => {
            let mut cfg = config(Experiment::Timetravel, c);
            cfg.params.t = Some(t);
            cfg.params.samples = samples;
            cfg
        }
        Cmd::Altreality { c, structure, witness_seed } => {
            let mut cfg = config(Experiment::Altreality, c);
            cfg.params.structure = structure;
            cfg.params.witness_seed = witness_seed;
            cfg
        }
        Cmd::Altlaws { c, samples } => {
            let mut cfg = config(Experiment::Altlaws, c);
            cfg.params.samples = samples;
            cfg
        }
        Cmd::Ergodicity { c, bound, tol } => {
            let mut cfg = config(Experiment::Ergodicity, c);
            cfg.params.bound = bound;
            cfg.tolerances.relation = tol;
            cfg
        }
        Cmd::Spacegraph { c, mi_floor } => {
            let mut cfg = config(Experiment::Spacegraph, c);
            cfg.tolerances.mi_floor = mi_floor;
            cfg
        }
        Cmd::Decohere { c, times, t_end, witness_seed } => {
            let mut cfg = config(Experiment::Decohere, c);
            cfg.params.times = times;
            cfg.params.t_end = t_end;
            cfg.params.witness_seed = witness_seed;
            cfg
        }
        Cmd::Coherent { c, sites, hbar } => {
            let mut cfg = config(Experiment::Coherent, c);
            cfg.params.sites = sites;
            cfg.params.hbar = hbar;
            cfg
        }
        Cmd::Factorfamily { c, count } => {
            let mut cfg = config(Experiment::Factorfamily, c);
            cfg.params.count = count;
            cfg
        }
    };
    execute(cfg)
}

fn fail(e: QsError) -> ExitCode {
    eprintln!("qslab: {e}");
    ExitCode::from(1)
}

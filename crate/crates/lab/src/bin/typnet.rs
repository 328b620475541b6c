use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use typnet::config::{run_experiment, ExperimentConfig, MarginPreset, MarginsConfig};
use typnet::error::{io_err, Stage};
use typnet::formats::{margins_table, write_json, write_labeled_set, EstimateRecord, MarginSummary, SetMeta};
use typnet::instance::{self, InstanceSpec};
use typnet::studies::{bundled_spec, oracle_report, solve_teacher, ChannelSpec};
use typnet::{LabError, Result, Threaded};
use typnet_core::bounds::{self, BoundReport};
use typnet_core::contnet::{margin_density_experiment, MarginConfig};
use typnet_core::oracle::EnumBudget;
use typnet_core::rng::Streams;
use typnet_core::sampler::{self, DEFAULT_MAX_DRAWS};
use typnet_core::teacher::generate_dataset;

/// Quantized-network generalization laboratory.
#[derive(Parser)]
#[command(name = "typnet", version)]
struct Cli {
    /// Root seed for every random stream.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads; defaults to the available cores.
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Directory for result files.
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Evaluate a closed-form bound and print a JSON report.
    Bounds {
        #[command(subcommand)]
        which: BoundCmd,
    },
    /// Run Guess & Check on an instance.
    Gnc(GncArgs),
    /// Exact enumeration report for a small instance.
    Oracle(OracleArgs),
    /// Angular-margin experiment; writes margins.csv and margins.json.
    Margins(MarginArgs),
    /// Largest uniform teacher width ratio a sample budget supports.
    SolveTeacher {
        /// Channel spec JSON `{channels, kernels, N, eps, delta, Q}`.
        spec: Option<PathBuf>,
        /// Use a bundled spec instead.
        #[arg(long, conflicts_with = "spec")]
        bundled: Option<String>,
    },
    /// Config-driven studies.
    Experiment {
        #[command(subcommand)]
        action: ExperimentCmd,
    },
}

#[derive(Subcommand)]
enum ExperimentCmd {
    /// Run the study described by a config file.
    Run { config: PathBuf },
}

#[derive(Args)]
struct Sample {
    /// Accuracy parameter; adds the Lemma-style sample size to the report.
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long, default_value_t = 0.05)]
    delta: f64,
}

#[derive(Subcommand)]
enum BoundCmd {
    /// Vanilla fully connected.
    Fc(FcBound),
    /// Scaled-neuron fully connected.
    Sfc(FcBound),
    /// Plain convolutional.
    Cnn(ConvBound),
    /// Scaled-neuron convolutional.
    Scn(ConvBound),
    /// Two-layer continuous network with angular margins.
    Cont {
        #[arg(long)]
        d0: usize,
        #[arg(long)]
        d1: usize,
        #[arg(long)]
        d1_star: usize,
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        beta: f64,
    },
    /// Sparsest-interpolator rule.
    Sparse {
        #[arg(long)]
        m_star: usize,
        #[arg(long)]
        d0: usize,
        #[arg(long)]
        q: usize,
        #[arg(long)]
        eps: f64,
        #[arg(long, default_value_t = 0.05)]
        delta: f64,
    },
}

#[derive(Args)]
struct FcBound {
    #[arg(long)]
    d0: usize,
    /// Teacher widths d*_1..d*_L.
    #[arg(long, value_delimiter = ',')]
    teacher: Vec<usize>,
    /// Student widths d_1..d_L.
    #[arg(long, value_delimiter = ',')]
    student: Vec<usize>,
    #[arg(long)]
    q: usize,
    #[command(flatten)]
    sample: Sample,
}

#[derive(Args)]
struct ConvBound {
    /// Teacher channels c*_0..c*_L.
    #[arg(long, value_delimiter = ',')]
    teacher: Vec<usize>,
    /// Student channels c_0..c_L.
    #[arg(long, value_delimiter = ',')]
    student: Vec<usize>,
    #[arg(long, value_delimiter = ',')]
    kernels: Vec<usize>,
    /// Input length s_0.
    #[arg(long)]
    input_len: usize,
    #[arg(long)]
    q: usize,
    #[command(flatten)]
    sample: Sample,
}

#[derive(Clone, Copy, ValueEnum)]
enum Preset {
    TinyFc,
    TinyFcLine,
}

#[derive(Args)]
struct InstanceArgs {
    /// Instance JSON (teacher, student, q, domain, ...).
    #[arg(long, conflicts_with = "preset")]
    instance: Option<PathBuf>,
    #[arg(long, value_enum)]
    preset: Option<Preset>,
}

impl InstanceArgs {
    fn load(&self) -> Result<InstanceSpec> {
        let inst = match (&self.instance, self.preset) {
            (Some(p), _) => typnet::formats::read_json(p)?,
            (None, Some(Preset::TinyFc)) => instance::tiny_fc(),
            (None, Some(Preset::TinyFcLine)) => instance::tiny_fc_line(),
            (None, None) => return Err(LabError::Config("give --instance or --preset".into())),
        };
        inst.validate()?;
        Ok(inst)
    }
}

#[derive(Args)]
struct GncArgs {
    #[command(flatten)]
    inst: InstanceArgs,
    /// Training points drawn from the domain; the whole support when absent.
    #[arg(long)]
    n_train: Option<usize>,
    /// Allowed training error; 0 means interpolation.
    #[arg(long, default_value_t = 0.0)]
    gamma: f64,
    #[arg(long, default_value_t = DEFAULT_MAX_DRAWS)]
    max_draws: u64,
    /// Estimate the interpolation probability from this many draws instead.
    #[arg(long)]
    estimate_phat: Option<u64>,
    /// Save the training set as CSV with a JSON sidecar.
    #[arg(long)]
    save_data: Option<PathBuf>,
}

#[derive(Args)]
struct OracleArgs {
    #[command(flatten)]
    inst: InstanceArgs,
    #[arg(long)]
    n_train: Option<usize>,
    #[arg(long, default_value_t = 0.2)]
    eps: f64,
    #[arg(long, default_value_t = EnumBudget::default().max_configs)]
    budget: u64,
}

#[derive(Args)]
struct MarginArgs {
    #[arg(long, value_enum, default_value = "desk")]
    preset: PresetName,
    #[arg(long)]
    d0: Option<usize>,
    #[arg(long)]
    d1: Option<usize>,
    #[arg(long)]
    d1_star: Option<usize>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    rho: Option<f64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum PresetName {
    Desk,
    Full,
}

fn print<T: Serialize>(v: &T) -> Result<()> {
    use std::io::Write;
    let text = serde_json::to_string_pretty(v)?;
    match writeln!(std::io::stdout().lock(), "{text}") {
        // A closed pipe (e.g. `| head`) is not a failure of the run.
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
        r => r.map_err(io_err("<stdout>")),
    }
}

fn with_sample(r: BoundReport, s: &Sample) -> Result<BoundReport> {
    let r = r.input("delta", s.delta);
    match s.eps {
        Some(eps) => {
            let n = bounds::n_lemma1(r.c_hat, eps, s.delta).stage("n_lemma1")?;
            Ok(r.input("eps", eps).n(n))
        }
        None => Ok(r),
    }
}

fn bound(which: &BoundCmd) -> Result<BoundReport> {
    let list = |v: &[usize]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
    match which {
        BoundCmd::Fc(a) | BoundCmd::Sfc(a) => {
            let scaled = matches!(which, BoundCmd::Sfc(_));
            let (name, c) = if scaled {
                ("chat_sfc", bounds::chat_sfc(a.d0, &a.teacher, &a.student, a.q).stage("chat_sfc")?)
            } else {
                ("chat_fc", bounds::chat_fc(a.d0, &a.teacher, &a.student, a.q).stage("chat_fc")?)
            };
            let r = BoundReport::new(name, c).input("d0", a.d0 as f64).input("Q", a.q as f64).note(&format!(
                "teacher {} student {}",
                list(&a.teacher),
                list(&a.student)
            ));
            with_sample(r, &a.sample)
        }
        BoundCmd::Cnn(a) | BoundCmd::Scn(a) => {
            let flavor = if matches!(which, BoundCmd::Scn(_)) {
                typnet_core::quantnet::ConvFlavor::Scaled
            } else {
                typnet_core::quantnet::ConvFlavor::Plain
            };
            let mk = |c: &[usize]| {
                typnet_core::quantnet::ConvArch::new(a.kernels.clone(), c.to_vec(), a.input_len, flavor)
                    .stage("architecture")
            };
            let (t, s) = (mk(&a.teacher)?, mk(&a.student)?);
            let pc = bounds::pc_for(&t.clone().into(), &s.clone().into()).stage("bound exponent")?;
            let name = if flavor == typnet_core::quantnet::ConvFlavor::Scaled { "chat_scn" } else { "chat_cnn" };
            let r = BoundReport::new(name, pc as f64 * (a.q as f64).ln())
                .input("Q", a.q as f64)
                .input("PC", pc as f64)
                .input("d_s", s.head_width() as f64)
                .input("d_s_star", t.head_width() as f64)
                .note(&format!(
                    "teacher {} student {} kernels {}",
                    list(&a.teacher),
                    list(&a.student),
                    list(&a.kernels)
                ));
            with_sample(r, &a.sample)
        }
        BoundCmd::Cont { d0, d1, d1_star, alpha, beta } => {
            let c = bounds::chat_cont(*d0, *d1, *d1_star, *alpha, *beta).stage("chat_cont")?;
            Ok(BoundReport::new("chat_cont", c.exact)
                .input("d0", *d0 as f64)
                .input("d1", *d1 as f64)
                .input("d1_star", *d1_star as f64)
                .input("alpha", *alpha)
                .input("beta", *beta)
                .input("gamma", c.gamma)
                .input("asymptotic", c.asymptotic)
                .input("unmodeled_scale", c.unmodeled_scale)
                .note("c_hat is the exact product form; asymptotic drops an additive term without explicit constant"))
        }
        BoundCmd::Sparse { m_star, d0, q, eps, delta } => {
            let c = bounds::chat_sparse(*m_star, *d0, *q).stage("chat_sparse")?;
            let n = bounds::n_sparse(*m_star, *d0, *q, *eps, *delta).stage("n_sparse")?;
            Ok(BoundReport::new("chat_sparse", c)
                .input("M_star", *m_star as f64)
                .input("d0", *d0 as f64)
                .input("Q", *q as f64)
                .input("eps", *eps)
                .input("delta", *delta)
                .n(n))
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let exec = cli.workers.map_or_else(Threaded::available, Threaded::new);
    let out_dir = cli.out_dir.clone().unwrap_or_else(|| PathBuf::from("."));
    match cli.cmd {
        Cmd::Bounds { which } => print(&bound(&which)?),
        Cmd::Gnc(a) => {
            let inst = a.inst.load()?;
            let teacher = inst.teacher_spec()?;
            let streams = Streams::new(cli.seed);
            let set = match a.n_train {
                Some(n) => generate_dataset(&inst.domain, &teacher, n, &mut streams.named("data").stream(0))
                    .stage("dataset")?,
                None => teacher.label_points(&inst.support()?).stage("dataset")?,
            };
            if let Some(path) = &a.save_data {
                let meta = SetMeta {
                    domain: inst.domain.clone(),
                    seed: Some(cli.seed),
                    n: set.len(),
                    dim: set.dim(),
                    teacher: Some(teacher.clone()),
                };
                write_labeled_set(path, &set, &meta)?;
            }
            let prior = inst.prior()?;
            let seed = streams.named("sampler").seed();
            match a.estimate_phat {
                Some(draws) => {
                    let p = sampler::estimate_phat(&prior, &set, draws, seed, &exec).stage("estimate_phat")?;
                    print(&EstimateRecord::from_proportion(seed, &p, "monte-carlo"))
                }
                None => {
                    let t = sampler::gnc_threshold(&prior, &set, a.gamma, a.max_draws, seed, &exec)
                        .stage("guess and check")?;
                    print(&EstimateRecord::from_trace(&t))
                }
            }
        }
        Cmd::Oracle(a) => {
            let inst = a.inst.load()?;
            print(&oracle_report(&inst, a.n_train, a.eps, a.budget, cli.seed, &exec)?)
        }
        Cmd::Margins(a) => {
            let base = match a.preset {
                PresetName::Desk => MarginConfig::DESK,
                PresetName::Full => MarginConfig::FULL,
            };
            let cfg = MarginConfig {
                d0: a.d0.unwrap_or(base.d0),
                d1: a.d1.unwrap_or(base.d1),
                d1_star: a.d1_star.unwrap_or(base.d1_star),
                n: a.n.unwrap_or(base.n),
                trials: a.trials.unwrap_or(base.trials),
                rho: a.rho.unwrap_or(base.rho),
            };
            // Same validation as the config route.
            ExperimentConfig {
                schema: typnet::config::SCHEMA,
                name: None,
                seed: cli.seed,
                workers: None,
                out_dir: None,
                study: typnet::config::Study::Margins(MarginsConfig {
                    preset: Some(MarginPreset::Desk),
                    config: Some(cfg),
                }),
            }
            .validate()?;
            let rep = margin_density_experiment(&cfg, cli.seed, &exec).stage("margins")?;
            std::fs::create_dir_all(&out_dir).map_err(io_err(&out_dir))?;
            margins_table(&rep).write(&out_dir.join("margins.csv"))?;
            let summary = MarginSummary::of(&rep);
            write_json(&out_dir.join("margins.json"), &summary)?;
            print(&summary)
        }
        Cmd::SolveTeacher { spec, bundled } => {
            let spec: ChannelSpec = match (spec, bundled) {
                (Some(p), _) => typnet::formats::read_json(&p)?,
                (None, Some(name)) => bundled_spec(&name)?,
                (None, None) => bundled_spec("resnet18")?,
            };
            print(&solve_teacher(&spec)?)
        }
        Cmd::Experiment { action: ExperimentCmd::Run { config } } => {
            let cfg = ExperimentConfig::load(&config)?;
            let workers = cli.workers.or(cfg.workers);
            let exec = workers.map_or_else(Threaded::available, Threaded::new);
            let dir = cli
                .out_dir
                .or_else(|| cfg.out_dir.clone())
                .unwrap_or_else(|| PathBuf::from("results").join(cfg.study.kind()));
            print(&run_experiment(&cfg, &dir, &exec)?)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", serde_json::to_string(&e.report()).unwrap_or_else(|_| e.to_string()));
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

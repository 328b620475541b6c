//! The end-to-end studies. Each returns a structured result plus the CSV
//! table the experiment runner writes.

use serde::{Deserialize, Serialize};
use statrs::distribution::{Binomial, DiscreteCDF};
use typnet_core::bounds::{self, HeadRule, TeacherScale};
use typnet_core::exec::{Executor, Serial};
use typnet_core::oracle::{self, EnumBudget, FunctionCatalog};
use typnet_core::quantnet::{Architecture, QuantParams};
use typnet_core::rng::Streams;
use typnet_core::sampler::{self, DEFAULT_MAX_DRAWS};
use typnet_core::teacher::{generate_dataset, ErrorMode, InputDomain, ReferenceSet, TeacherSpec};

use crate::error::{LabError, Result, Stage};
use crate::formats::{fmt_f64, Provenance, Table};
use crate::instance::InstanceSpec;

fn default_budget() -> u64 {
    EnumBudget::default().max_configs
}

fn default_max_draws() -> u64 {
    DEFAULT_MAX_DRAWS
}

// ---------------------------------------------------------------- oracle vs bound

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleVsBoundConfig {
    #[serde(default = "crate::instance::bound_check_instances")]
    pub instances: Vec<InstanceSpec>,
    /// Teachers drawn per instance, with consecutive teacher seeds.
    #[serde(default = "one")]
    pub teachers: usize,
    #[serde(default = "default_budget")]
    pub budget: u64,
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundCheck {
    pub instance: String,
    pub kind: String,
    pub teacher_seed: u64,
    pub m: usize,
    pub q: usize,
    pub pc: usize,
    /// `Q^{-PC}`.
    pub bound: f64,
    pub p_tilde: f64,
    pub p_tilde_count: u64,
    pub total: u64,
    pub pass: bool,
}

impl OracleVsBoundConfig {
    pub fn validate(&self) -> Result<()> {
        if self.instances.is_empty() || self.teachers == 0 {
            return Err(LabError::Config("oracle-vs-bound needs instances and at least one teacher".into()));
        }
        for inst in &self.instances {
            inst.validate()?;
            if !inst.domain.is_enumerable() {
                return Err(LabError::Config(format!("instance {:?}: domain is not enumerable", inst.name)));
            }
            EnumBudget::new(self.budget).check(inst.q, inst.student.param_count()).stage("enumeration budget")?;
        }
        Ok(())
    }
}

/// Exact `p̃` against `Q^{-PC}` on every instance.
pub fn oracle_vs_bound<E: Executor>(cfg: &OracleVsBoundConfig, exec: &E) -> Result<Vec<BoundCheck>> {
    let mut out = Vec::new();
    for inst in &cfg.instances {
        let prior = inst.prior()?;
        let pc = inst.pc()?;
        let catalog =
            FunctionCatalog::build(&prior, &inst.support()?, EnumBudget::new(cfg.budget), exec).stage("oracle")?;
        for k in 0..cfg.teachers as u64 {
            let seed = inst.teacher_seed + k;
            let teacher = inst.clone().with_seed(seed).teacher_spec()?;
            let pt = catalog.ptilde(&teacher).stage("oracle")?;
            let bound = (inst.q as f64).powf(-(pc as f64));
            out.push(BoundCheck {
                instance: inst.name.clone(),
                kind: inst.student.kind().name().into(),
                teacher_seed: seed,
                m: inst.student.param_count(),
                q: inst.q,
                pc,
                bound,
                p_tilde: pt.value(),
                p_tilde_count: pt.count,
                total: pt.total,
                // Compare in counts: count / Q^M >= Q^{-PC}  ⇔  count >= Q^{M-PC}.
                pass: pt.count as u128 >= oracle::config_count(inst.q, inst.student.param_count() - pc),
            });
        }
    }
    Ok(out)
}

pub fn bound_check_table(rows: &[BoundCheck]) -> Table {
    let mut t = Table::new(&[
        "instance",
        "kind",
        "teacher_seed",
        "M",
        "Q",
        "PC",
        "q_pow_neg_pc",
        "p_tilde_exact",
        "p_tilde_count",
        "total",
        "pass",
        "provenance",
    ]);
    for r in rows {
        t.push(vec![
            r.instance.clone(),
            r.kind.clone(),
            r.teacher_seed.to_string(),
            r.m.to_string(),
            r.q.to_string(),
            r.pc.to_string(),
            fmt_f64(r.bound),
            fmt_f64(r.p_tilde),
            r.p_tilde_count.to_string(),
            r.total.to_string(),
            r.pass.to_string(),
            Provenance::Exact.label(None),
        ]);
    }
    t
}

// ---------------------------------------------------------------- oracle report

/// `{M, Q, p_tilde_exact, p_hat_exact, pc_fc, pc_sfc, bad_volume(ε), sparsest_support}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub instance: String,
    pub kind: String,
    #[serde(rename = "M")]
    pub m: usize,
    #[serde(rename = "Q")]
    pub q: usize,
    pub n_train: usize,
    pub p_tilde_exact: f64,
    pub p_hat_exact: f64,
    pub pc: usize,
    pub pc_fc: Option<usize>,
    pub pc_sfc: Option<usize>,
    pub eps: f64,
    pub bad_volume: Option<f64>,
    pub sparsest_support: Option<usize>,
    pub teacher_support: usize,
    pub provenance: String,
}

/// Every exact quantity for one instance, with the training set drawn from
/// the domain (`n_train` i.i.d. points) or the whole support when `None`.
pub fn oracle_report<E: Executor>(
    inst: &InstanceSpec,
    n_train: Option<usize>,
    eps: f64,
    budget: u64,
    seed: u64,
    exec: &E,
) -> Result<OracleReport> {
    inst.validate()?;
    let prior = inst.prior()?;
    let teacher = inst.teacher_spec()?;
    let support = inst.support()?;
    let train = match n_train {
        None => teacher.label_points(&support).stage("dataset")?,
        Some(n) => {
            let mut rng = Streams::new(seed).named("data").stream(0);
            generate_dataset(&inst.domain, &teacher, n, &mut rng).stage("dataset")?
        }
    };
    let budget = EnumBudget::new(budget);
    let catalog = FunctionCatalog::build(&prior, &support, budget, exec).stage("oracle")?;
    let reference = catalog.table_of(&teacher).stage("oracle")?;
    let (pc_fc, pc_sfc) = match (&inst.teacher, &inst.student) {
        (Architecture::Fc(t), Architecture::Fc(s)) => {
            let (d0, tw, sw) = (s.input_dim(), &t.widths()[1..], &s.widths()[1..]);
            (bounds::pc_fc(d0, tw, sw).ok(), bounds::pc_sfc(d0, tw, sw).ok())
        }
        _ => (None, None),
    };
    let sparse = oracle::sparsest_interpolator(&prior, &train, budget).stage("sparsest interpolator")?;
    let emb = typnet_core::teacher::embed_teacher(&teacher, &inst.student, None).stage("embedding")?;
    Ok(OracleReport {
        instance: inst.name.clone(),
        kind: inst.student.kind().name().into(),
        m: inst.student.param_count(),
        q: inst.q,
        n_train: train.len(),
        p_tilde_exact: catalog.ptilde(&teacher).stage("oracle")?.value(),
        p_hat_exact: catalog.phat(&train).stage("oracle")?.value(),
        pc: inst.pc()?,
        pc_fc,
        pc_sfc,
        eps,
        bad_volume: catalog.bad_volume(&train, &reference, eps).stage("oracle")?.map(|r| r.value()),
        sparsest_support: sparse.map(|s| s.support),
        teacher_support: emb.params.support(),
        provenance: Provenance::Exact.label(None),
    })
}

// ---------------------------------------------------------------- PAC frequency

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "kebab-case")]
pub enum PacRule {
    /// Interpolating sampler, `N` from the realizable sample-size bound.
    Lemma1,
    /// Threshold sampler against labels from the teacher widened by
    /// `extra_units` hidden units; the instance teacher is then the best
    /// network in reach and has error `ε*` against those labels.
    Noninterp {
        #[serde(default = "one")]
        extra_units: usize,
        #[serde(default = "default_eps_star_max")]
        eps_star_max: f64,
    },
}

fn default_eps_star_max() -> f64 {
    0.25
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PacConfig {
    pub instance: InstanceSpec,
    pub eps: f64,
    pub delta: f64,
    /// Dataset draws `R`.
    pub draws: u64,
    #[serde(flatten)]
    pub rule: PacRule,
    /// Overrides the bound's sample size.
    #[serde(default)]
    pub n: Option<u64>,
    #[serde(default = "default_max_draws")]
    pub max_draws: u64,
    #[serde(default = "default_budget")]
    pub budget: u64,
}

impl PacConfig {
    pub fn validate(&self) -> Result<()> {
        self.instance.validate()?;
        if !self.instance.domain.is_enumerable() {
            return Err(LabError::Config("pac-frequency needs an enumerable domain for exact errors".into()));
        }
        if self.draws == 0 {
            return Err(LabError::Config("pac-frequency needs at least one dataset draw".into()));
        }
        match self.rule {
            PacRule::Lemma1 => bounds::n_lemma1(1.0, self.eps, self.delta).stage("n_lemma1")?,
            PacRule::Noninterp { extra_units, .. } => {
                if extra_units == 0 || self.instance.teacher.kind() != typnet_core::quantnet::ArchKind::Fc {
                    return Err(LabError::Config(
                        "the widened-teacher surrogate needs a vanilla FC teacher and extra units".into(),
                    ));
                }
                bounds::n_noninterp(1.0, self.eps, self.delta).stage("n_noninterp")?
            }
        };
        EnumBudget::new(self.budget)
            .check(self.instance.q, self.instance.student.param_count())
            .stage("enumeration budget")?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PacReport {
    pub rule: PacRule,
    pub n: u64,
    /// Exact `-ln p̃` fed to the bound.
    pub c_hat: f64,
    pub eps: f64,
    pub delta: f64,
    /// Irreducible error of the best network in reach; 0 when realizable.
    pub eps_star: f64,
    /// Error level counted as success.
    pub target_error: f64,
    pub draws: u64,
    pub successes: u64,
    pub fraction: f64,
    /// `1 - δ - 3 sqrt(δ(1-δ)/R)`.
    pub threshold: f64,
    pub pass: bool,
    /// One-sided binomial test of `H0: P(success) >= 1 - δ`.
    pub p_value: f64,
    pub errors: Vec<f64>,
    pub provenance: String,
}

/// Appends hidden units to a one-hidden-layer FC teacher. The original
/// teacher is the truncation of the result to its first units.
pub fn widen_teacher(teacher: &TeacherSpec, extra: usize, seed: u64) -> Result<TeacherSpec> {
    let arch = teacher
        .arch
        .as_fc()
        .filter(|a| a.depth() == 2)
        .ok_or_else(|| LabError::Config("widening is defined for one-hidden-layer FC teachers".into()))?;
    let w = arch.widths();
    let (d0, d1) = (w[0], w[1]);
    let wide_arch = typnet_core::quantnet::FcArch::new(vec![d0, d1 + extra, 1], arch.flavor()).stage("widen")?;
    let layers = teacher.params.fc_layers(arch).stage("widen")?;
    let mut rng = Streams::new(seed).named("widen").stream(0);
    let mut fresh = vec![0.0; extra * (d0 + 2)];
    teacher.grid.fill_uniform(&mut rng, &mut fresh);
    let (rows, rest) = fresh.split_at(extra * d0);
    let (bias, head) = rest.split_at(extra);
    let mut first = layers[0].clone();
    first.weights.extend_from_slice(rows);
    first.bias.extend_from_slice(bias);
    let mut second = layers[1].clone();
    second.weights.extend_from_slice(head);
    let params = QuantParams::from_fc_layers(&wide_arch, &[first, second]).stage("widen")?;
    TeacherSpec::new(wide_arch.into(), teacher.activation, teacher.grid.clone(), params).stage("widen")
}

fn binomial_lower_tail(k: u64, n: u64, p: f64) -> f64 {
    Binomial::new(p, n).map(|b| b.cdf(k)).unwrap_or(f64::NAN)
}

/// Over `R` dataset draws with one posterior sample each, how often the
/// sample's exact population error meets the guarantee.
pub fn pac_frequency_check<E: Executor>(cfg: &PacConfig, seed: u64, exec: &E) -> Result<PacReport> {
    cfg.validate()?;
    let inst = &cfg.instance;
    let prior = inst.prior()?;
    let teacher = inst.teacher_spec()?;
    let budget = EnumBudget::new(cfg.budget);
    let c_hat = oracle::exact_ptilde(&prior, &teacher, &inst.domain, budget, exec).stage("oracle")?.neg_ln();
    let streams = Streams::new(seed);

    let (label_source, eps_star, gamma, target, n) = match cfg.rule {
        PacRule::Lemma1 => {
            let n = cfg.n.map_or_else(|| bounds::n_lemma1(c_hat, cfg.eps, cfg.delta).stage("n_lemma1"), Ok)?;
            (teacher.clone(), 0.0, 0.0, cfg.eps, n)
        }
        PacRule::Noninterp { extra_units, eps_star_max } => {
            let reference = |t: &TeacherSpec| -> Result<ReferenceSet> {
                ReferenceSet::new(t, &inst.domain, ErrorMode::Exact, &mut streams.stream(0)).stage("reference")
            };
            let net = teacher.network();
            let mut found = None;
            for k in 0..1000u64 {
                let wide = widen_teacher(&teacher, extra_units, streams.named("surrogate").child(k).seed())?;
                let e = reference(&wide)?.error(&mut net.evaluator(), teacher.params.values());
                if e > 0.0 && e <= eps_star_max {
                    found = Some((wide, e));
                    break;
                }
            }
            let (wide, e) = found.ok_or_else(|| {
                LabError::Config(format!(
                    "no widened teacher with irreducible error in (0, {eps_star_max}] after 1000 tries"
                ))
            })?;
            let n = cfg.n.map_or_else(|| bounds::n_noninterp(c_hat, cfg.eps, cfg.delta).stage("n_noninterp"), Ok)?;
            (wide, e, e + cfg.eps, e + 2.0 * cfg.eps, n)
        }
    };
    let reference =
        ReferenceSet::new(&label_source, &inst.domain, ErrorMode::Exact, &mut streams.stream(0)).stage("reference")?;
    let net = prior.network();
    let per_draw = exec.map_blocks(
        cfg.draws,
        1,
        || net.evaluator(),
        |ev, r| -> Result<Vec<f64>> {
            r.map(|i| {
                let s = streams.child(i);
                let mut rng = s.named("data").stream(0);
                let set = generate_dataset(&inst.domain, &label_source, n as usize, &mut rng).stage("dataset")?;
                let h = sampler::gnc_threshold(&prior, &set, gamma, cfg.max_draws, s.named("sampler").seed(), &Serial)
                    .stage("guess and check")?;
                Ok(reference.error(ev, h.params.values()))
            })
            .collect()
        },
    );
    let errors: Vec<f64> = per_draw.into_iter().collect::<Result<Vec<_>>>()?.into_iter().flatten().collect();
    let successes = errors.iter().filter(|&&e| e <= target + 1e-12).count() as u64;
    let r = cfg.draws as f64;
    let fraction = successes as f64 / r;
    let threshold = 1.0 - cfg.delta - 3.0 * (cfg.delta * (1.0 - cfg.delta) / r).sqrt();
    Ok(PacReport {
        rule: cfg.rule,
        n,
        c_hat,
        eps: cfg.eps,
        delta: cfg.delta,
        eps_star,
        target_error: target,
        draws: cfg.draws,
        successes,
        fraction,
        threshold,
        pass: fraction >= threshold,
        p_value: binomial_lower_tail(successes, cfg.draws, 1.0 - cfg.delta),
        errors,
        provenance: Provenance::Exact.label(None),
    })
}

pub fn pac_table(rep: &PacReport) -> Table {
    let mut t = Table::new(&["draw", "n", "population_error", "success", "provenance"]);
    for (i, &e) in rep.errors.iter().enumerate() {
        t.push(vec![
            i.to_string(),
            rep.n.to_string(),
            fmt_f64(e),
            (e <= rep.target_error + 1e-12).to_string(),
            Provenance::Exact.label(None),
        ]);
    }
    t
}

// ---------------------------------------------------------------- volume decay

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VolumeConfig {
    pub instance: InstanceSpec,
    pub eps: f64,
    pub delta: f64,
    pub draws: u64,
    #[serde(default)]
    pub n: Option<u64>,
    #[serde(default = "default_budget")]
    pub budget: u64,
}

impl VolumeConfig {
    pub fn validate(&self) -> Result<()> {
        self.instance.validate()?;
        if !self.instance.domain.is_enumerable() {
            return Err(LabError::Config("volume-decay needs an enumerable domain".into()));
        }
        if self.draws == 0 {
            return Err(LabError::Config("volume-decay needs at least one dataset draw".into()));
        }
        bounds::n_volume(1.0, self.eps, self.delta).stage("n_volume")?;
        EnumBudget::new(self.budget)
            .check(self.instance.q, self.instance.student.param_count())
            .stage("enumeration budget")?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VolumeDraw {
    pub draw: u64,
    /// Sample sizes `N/4, N/2, N`, nested prefixes of one draw.
    pub sizes: [u64; 3],
    pub bad_volume: [f64; 3],
    pub within_delta: bool,
    pub nonincreasing: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VolumeReport {
    pub n: u64,
    pub c_hat: f64,
    pub eps: f64,
    pub delta: f64,
    pub draws: Vec<VolumeDraw>,
    pub fraction_within_delta: f64,
    pub fraction_nonincreasing: f64,
    pub pass_within_delta: bool,
    pub pass_nonincreasing: bool,
    pub provenance: String,
}

/// Exact posterior mass of `L_D >= ε` at `N/4, N/2, N`.
pub fn volume_decay<E: Executor>(cfg: &VolumeConfig, seed: u64, exec: &E) -> Result<VolumeReport> {
    cfg.validate()?;
    let inst = &cfg.instance;
    let prior = inst.prior()?;
    let teacher = inst.teacher_spec()?;
    let catalog =
        FunctionCatalog::build(&prior, &inst.support()?, EnumBudget::new(cfg.budget), exec).stage("oracle")?;
    let c_hat = catalog.ptilde(&teacher).stage("oracle")?.neg_ln();
    let reference = catalog.table_of(&teacher).stage("oracle")?;
    let n = cfg.n.map_or_else(|| bounds::n_volume(c_hat, cfg.eps, cfg.delta).stage("n_volume"), Ok)?;
    let sizes = [(n / 4).max(1), (n / 2).max(1), n];
    let streams = Streams::new(seed);
    let mut draws = Vec::with_capacity(cfg.draws as usize);
    for i in 0..cfg.draws {
        let mut rng = streams.child(i).named("data").stream(0);
        let set = generate_dataset(&inst.domain, &teacher, n as usize, &mut rng).stage("dataset")?;
        let mut bv = [0.0; 3];
        for (k, &s) in sizes.iter().enumerate() {
            bv[k] = catalog
                .bad_volume(&set.prefix(s as usize), &reference, cfg.eps)
                .stage("oracle")?
                .ok_or_else(|| LabError::Core {
                    stage: "oracle".into(),
                    source: typnet_core::Error::Invariant("teacher-labeled data has no interpolator".into()),
                })?
                .value();
        }
        draws.push(VolumeDraw {
            draw: i,
            sizes,
            bad_volume: bv,
            within_delta: bv[2] <= cfg.delta,
            nonincreasing: bv[1] <= bv[0] + 1e-12 && bv[2] <= bv[1] + 1e-12,
        });
    }
    let r = draws.len() as f64;
    let fraction_within_delta = draws.iter().filter(|d| d.within_delta).count() as f64 / r;
    let fraction_nonincreasing = draws.iter().filter(|d| d.nonincreasing).count() as f64 / r;
    Ok(VolumeReport {
        n,
        c_hat,
        eps: cfg.eps,
        delta: cfg.delta,
        draws,
        fraction_within_delta,
        fraction_nonincreasing,
        pass_within_delta: fraction_within_delta >= 1.0 - cfg.delta,
        pass_nonincreasing: fraction_nonincreasing >= 0.9,
        provenance: Provenance::Exact.label(None),
    })
}

pub fn volume_table(rep: &VolumeReport) -> Table {
    let mut t = Table::new(&[
        "draw",
        "n_quarter",
        "n_half",
        "n",
        "bad_volume_quarter",
        "bad_volume_half",
        "bad_volume",
        "within_delta",
        "nonincreasing",
        "provenance",
    ]);
    for d in &rep.draws {
        t.push(vec![
            d.draw.to_string(),
            d.sizes[0].to_string(),
            d.sizes[1].to_string(),
            d.sizes[2].to_string(),
            fmt_f64(d.bad_volume[0]),
            fmt_f64(d.bad_volume[1]),
            fmt_f64(d.bad_volume[2]),
            d.within_delta.to_string(),
            d.nonincreasing.to_string(),
            Provenance::Exact.label(None),
        ]);
    }
    t
}

// ---------------------------------------------------------------- width sweep

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WidthSweepConfig {
    /// Teacher widths `d_0..d_L`.
    pub teacher: Vec<usize>,
    /// Student first-hidden-layer widths; other layers follow the teacher.
    pub widths: Vec<usize>,
    #[serde(default)]
    pub scaled: bool,
    pub q: usize,
    #[serde(default)]
    pub activation: Option<typnet_core::quantnet::Activation>,
    /// Input distribution; Gaussian in `d_0` dimensions when absent.
    #[serde(default)]
    pub domain: Option<InputDomain>,
    pub n_train: usize,
    /// Posterior samples per width.
    pub samples: u64,
    /// Monte-Carlo reference points for population error.
    pub reference: usize,
    #[serde(default = "default_max_draws")]
    pub max_draws: u64,
    #[serde(default)]
    pub teacher_seed: u64,
}

impl WidthSweepConfig {
    fn arch(&self, widths: &[usize]) -> Result<Architecture> {
        let flavor = if self.scaled {
            typnet_core::quantnet::FcFlavor::Scaled
        } else {
            typnet_core::quantnet::FcFlavor::Vanilla
        };
        Ok(typnet_core::quantnet::FcArch::new(widths.to_vec(), flavor).stage("architecture")?.into())
    }

    fn instance(&self, width: usize) -> Result<InstanceSpec> {
        let mut sw = self.teacher.clone();
        if sw.len() < 3 {
            return Err(LabError::Config("width-sweep needs a teacher with a hidden layer".into()));
        }
        sw[1] = width;
        let domain = match &self.domain {
            Some(d) => d.clone(),
            None => InputDomain::gaussian(self.teacher[0]).stage("domain")?,
        };
        let mut inst =
            InstanceSpec::new(&format!("width-{width}"), self.arch(&self.teacher)?, self.arch(&sw)?, self.q, domain);
        inst.activation = self.activation.unwrap_or(inst.activation);
        inst.teacher_seed = self.teacher_seed;
        Ok(inst)
    }

    pub fn validate(&self) -> Result<()> {
        if self.widths.is_empty() || self.samples == 0 || self.reference == 0 || self.n_train == 0 {
            return Err(LabError::Config(
                "width-sweep needs widths, samples, reference points and training points".into(),
            ));
        }
        for &w in &self.widths {
            self.instance(w)?.validate()?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WidthResult {
    pub width: usize,
    pub params: usize,
    pub samples: u64,
    pub mean_error: f64,
    /// Standard error of the mean over posterior samples.
    pub se: f64,
    pub mean_draws: f64,
    /// Largest 95% interval half-width of any single sample's error.
    pub max_sample_half_width: f64,
    pub errors: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WidthSweepReport {
    pub n_train: usize,
    pub reference: usize,
    pub teacher_params: Vec<f64>,
    pub results: Vec<WidthResult>,
}

/// Mean posterior test error per student width, one teacher, one dataset.
pub fn width_sweep<E: Executor>(cfg: &WidthSweepConfig, seed: u64, exec: &E) -> Result<WidthSweepReport> {
    cfg.validate()?;
    let streams = Streams::new(seed);
    let base = cfg.instance(cfg.widths[0])?;
    let teacher = base.teacher_spec()?;
    let train =
        generate_dataset(&base.domain, &teacher, cfg.n_train, &mut streams.named("data").stream(0)).stage("dataset")?;
    let reference = ReferenceSet::new(
        &teacher,
        &base.domain,
        ErrorMode::MonteCarlo { samples: cfg.reference },
        &mut streams.named("reference").stream(0),
    )
    .stage("reference")?;
    let mut results = Vec::new();
    for &w in &cfg.widths {
        let inst = cfg.instance(w)?;
        let prior = inst.prior()?;
        let traces = sampler::gnc_many(
            &prior,
            &train,
            0.0,
            cfg.samples,
            cfg.max_draws,
            streams.named("posterior").child(w as u64).seed(),
            exec,
        )
        .stage("guess and check")?;
        let net = prior.network();
        let est: Vec<(f64, f64)> = exec
            .map_blocks(
                traces.len() as u64,
                16,
                || net.evaluator(),
                |ev, r| {
                    r.map(|i| {
                        let e = reference.estimate(ev, traces[i as usize].params.values());
                        (e.estimate, 0.5 * (e.ci_high - e.ci_low))
                    })
                    .collect::<Vec<_>>()
                },
            )
            .into_iter()
            .flatten()
            .collect();
        let errors: Vec<f64> = est.iter().map(|e| e.0).collect();
        let k = errors.len() as f64;
        let mean = errors.iter().sum::<f64>() / k;
        let var = errors.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (k - 1.0).max(1.0);
        results.push(WidthResult {
            width: w,
            params: inst.student.param_count(),
            samples: cfg.samples,
            mean_error: mean,
            se: (var / k).sqrt(),
            mean_draws: traces.iter().map(|t| t.t as f64).sum::<f64>() / k,
            max_sample_half_width: est.iter().map(|e| e.1).fold(0.0, f64::max),
            errors,
        });
    }
    Ok(WidthSweepReport {
        n_train: cfg.n_train,
        reference: cfg.reference,
        teacher_params: teacher.params.values().to_vec(),
        results,
    })
}

pub fn width_table(rep: &WidthSweepReport) -> Table {
    let mut t = Table::new(&[
        "width",
        "params",
        "samples",
        "mean_error",
        "se",
        "mean_draws",
        "max_sample_half_width",
        "provenance",
    ]);
    for r in &rep.results {
        t.push(vec![
            r.width.to_string(),
            r.params.to_string(),
            r.samples.to_string(),
            fmt_f64(r.mean_error),
            fmt_f64(r.se),
            fmt_f64(r.mean_draws),
            fmt_f64(r.max_sample_half_width),
            Provenance::MonteCarlo.label(Some(rep.reference as u64)),
        ]);
    }
    t
}

// ---------------------------------------------------------------- teacher scale

/// `{channels, kernels, N, eps, delta, Q}` plus the head rule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelSpec {
    #[serde(default)]
    pub name: Option<String>,
    pub channels: Vec<usize>,
    pub kernels: Vec<usize>,
    #[serde(rename = "N")]
    pub n: u64,
    pub eps: f64,
    pub delta: f64,
    #[serde(rename = "Q")]
    pub q: usize,
    /// Head positions per final channel; 1 models global pooling.
    #[serde(default = "one")]
    pub positions: usize,
}

/// ResNet-18-like stack: a 7x7 stem and sixteen 3x3 convolutions, counted
/// as 1-D kernels of equal size, without skip connections.
pub const RESNET18: &str = include_str!("../data/resnet18.json");

pub fn bundled_spec(name: &str) -> Result<ChannelSpec> {
    match name {
        "resnet18" => Ok(serde_json::from_str(RESNET18)?),
        other => Err(LabError::Config(format!("no bundled channel spec named {other:?}"))),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TeacherScaleReport {
    pub spec: ChannelSpec,
    pub student_params: u64,
    #[serde(flatten)]
    pub result: TeacherScale,
    pub provenance: String,
}

pub fn solve_teacher(spec: &ChannelSpec) -> Result<TeacherScaleReport> {
    let result = bounds::solve_teacher_scale(
        &spec.channels,
        &spec.kernels,
        HeadRule { positions: spec.positions },
        spec.n,
        spec.eps,
        spec.delta,
        spec.q,
    )
    .stage("solve_teacher_scale")?;
    let student_params = (spec.positions * spec.channels[spec.channels.len() - 1] + 1) as u64
        + (1..spec.channels.len())
            .map(|l| (spec.kernels[l - 1] * spec.channels[l] * spec.channels[l - 1] + 2 * spec.channels[l]) as u64)
            .sum::<u64>();
    Ok(TeacherScaleReport { spec: spec.clone(), student_params, result, provenance: Provenance::Formula.label(None) })
}

/// One row per layer: student and teacher channels.
pub fn teacher_scale_table(rep: &TeacherScaleReport) -> Table {
    let mut t = Table::new(&["layer", "kernel", "student_channels", "teacher_channels", "alpha", "provenance"]);
    for (l, (&c, &ct)) in rep.spec.channels.iter().zip(&rep.result.teacher_channels).enumerate() {
        t.push(vec![
            l.to_string(),
            if l == 0 { String::new() } else { rep.spec.kernels[l - 1].to_string() },
            c.to_string(),
            ct.to_string(),
            fmt_f64(rep.result.alpha),
            Provenance::Formula.label(None),
        ]);
    }
    t
}

//! Teachers, datasets, teacher embeddings and error measurement.

mod domain;
mod embed;
mod measure;

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use serde::{Deserialize, Serialize};

pub use domain::{InputDomain, LabeledSet, Points, MAX_ENUM_DIM};
pub use embed::{embed_teacher, embed_teacher_conv, embed_teacher_fc, embed_teacher_sfc, Embedding};
pub use measure::{
    empirical_error, is_teacher_equivalent, population_error, ErrorEstimate, ErrorMode, ReferenceSet, TeMode, TeVerdict,
};

use crate::quantnet::{Activation, Architecture, Model, Network, Predictor, QuantGrid, QuantParams};
use crate::{Error, Result};

/// A quantized network used as the label source.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TeacherSpec {
    pub arch: Architecture,
    pub activation: Activation,
    pub grid: QuantGrid,
    pub params: QuantParams,
}

impl TeacherSpec {
    pub fn new(arch: Architecture, activation: Activation, grid: QuantGrid, params: QuantParams) -> Result<Self> {
        params.check_arch(&arch)?;
        params.check_grid(&grid)?;
        activation.validate()?;
        Ok(Self { arch, activation, grid, params })
    }

    pub fn network(&self) -> Network {
        Network::new(self.arch.clone(), self.activation).expect("validated at construction")
    }

    pub fn model(&self) -> Model {
        Model::new(self.network(), self.params.clone()).expect("validated at construction")
    }

    /// Teacher labels for every row of `points`.
    pub fn label_points(&self, points: &Points) -> Result<LabeledSet> {
        let model = self.model();
        if points.dim() != model.input_dim() {
            return Err(Error::Dimension { expected: model.input_dim(), actual: points.dim() });
        }
        let mut labels = Vec::with_capacity(points.len());
        model.labels_into(points.as_flat(), &mut labels);
        LabeledSet::new(points.clone(), labels)
    }
}

/// What to do with teachers that label everything the same way.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "policy", rename_all = "kebab-case")]
pub enum DegeneracyPolicy {
    Off,
    RejectConstant { probe: usize, attempts: usize },
}

impl Default for DegeneracyPolicy {
    fn default() -> Self {
        DegeneracyPolicy::RejectConstant { probe: 256, attempts: 100 }
    }
}

/// Draws every teacher parameter i.i.d. uniform on the grid, resampling
/// constant teachers when the policy asks for it.
pub fn sample_teacher<R: Rng + ?Sized>(
    arch: &Architecture,
    grid: &QuantGrid,
    activation: Activation,
    domain: &InputDomain,
    policy: DegeneracyPolicy,
    rng: &mut R,
) -> Result<TeacherSpec> {
    activation.validate()?;
    if domain.dim() != arch.input_dim() {
        return Err(Error::Dimension { expected: arch.input_dim(), actual: domain.dim() });
    }
    let net = Network::new(arch.clone(), activation)?;
    let mut values = vec![0.0; arch.param_count()];
    let (probe, attempts) = match policy {
        DegeneracyPolicy::Off => (0, 1),
        DegeneracyPolicy::RejectConstant { probe, attempts } => (probe, attempts.max(1)),
    };
    let mut positives = 0;
    for _ in 0..attempts {
        grid.fill_uniform(rng, &mut values);
        if probe == 0 {
            break;
        }
        let pts = domain.sample(probe, rng);
        let mut ev = net.evaluator();
        positives = pts.rows().filter(|x| ev.label(&values, x) > 0).count();
        if positives > 0 && positives < probe {
            let params = QuantParams::from_values(arch, values)?;
            return TeacherSpec::new(arch.clone(), activation, grid.clone(), params);
        }
    }
    if probe > 0 {
        return Err(Error::DegenerateTeacher { attempts, positives, probe });
    }
    let params = QuantParams::from_values(arch, values)?;
    TeacherSpec::new(arch.clone(), activation, grid.clone(), params)
}

/// `n` i.i.d. points from `domain`, labeled by `teacher`.
pub fn generate_dataset<R: Rng + ?Sized>(
    domain: &InputDomain,
    teacher: &TeacherSpec,
    n: usize,
    rng: &mut R,
) -> Result<LabeledSet> {
    if n == 0 {
        return Err(Error::EmptySet);
    }
    teacher.label_points(&domain.sample(n, rng))
}

/// Every support point of an enumerable domain, once each.
pub fn generate_exhaustive(domain: &InputDomain, teacher: &TeacherSpec) -> Result<LabeledSet> {
    teacher.label_points(&domain.enumerate()?)
}

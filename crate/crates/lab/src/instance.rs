//! A teacher/student pair on a quantized grid, the unit most studies run on.

use serde::{Deserialize, Serialize};
use typnet_core::quantnet::{Activation, Architecture, ConvArch, ConvFlavor, FcArch, QuantGrid, QuantParams};
use typnet_core::rng::Streams;
use typnet_core::sampler::Prior;
use typnet_core::teacher::{sample_teacher, DegeneracyPolicy, InputDomain, Points, TeacherSpec};

use crate::error::{LabError, Result, Stage};

fn relu() -> Activation {
    Activation::Relu
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceSpec {
    #[serde(default)]
    pub name: String,
    pub teacher: Architecture,
    pub student: Architecture,
    /// Grid size; the default integer grid of this size is used.
    pub q: usize,
    #[serde(default = "relu")]
    pub activation: Activation,
    pub domain: InputDomain,
    /// Explicit teacher parameters; drawn from the grid when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub teacher_params: Option<Vec<f64>>,
    #[serde(default)]
    pub teacher_seed: u64,
    #[serde(default)]
    pub degeneracy: Option<DegeneracyPolicy>,
}

impl InstanceSpec {
    pub fn new(name: &str, teacher: Architecture, student: Architecture, q: usize, domain: InputDomain) -> Self {
        Self {
            name: name.into(),
            teacher,
            student,
            q,
            activation: Activation::Relu,
            domain,
            teacher_params: None,
            teacher_seed: 0,
            degeneracy: None,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.teacher_seed = seed;
        self
    }

    pub fn grid(&self) -> Result<QuantGrid> {
        QuantGrid::integers(self.q).stage("grid")
    }

    /// Checks every precondition the studies rely on, before any compute.
    pub fn validate(&self) -> Result<()> {
        self.grid()?;
        self.activation.validate().stage("activation")?;
        let domain = self.domain.clone().validated().stage("domain")?;
        if domain.dim() != self.student.input_dim() || self.teacher.input_dim() != self.student.input_dim() {
            return Err(LabError::Config(format!(
                "instance {:?}: domain dimension {}, teacher input {}, student input {}",
                self.name,
                domain.dim(),
                self.teacher.input_dim(),
                self.student.input_dim()
            )));
        }
        typnet_core::bounds::pc_for(&self.teacher, &self.student).stage("teacher/student shapes")?;
        Ok(())
    }

    pub fn prior(&self) -> Result<Prior> {
        Prior::new(self.student.clone(), self.grid()?, self.activation).stage("prior")
    }

    pub fn teacher_spec(&self) -> Result<TeacherSpec> {
        let grid = self.grid()?;
        if let Some(v) = &self.teacher_params {
            let p = QuantParams::from_values(&self.teacher, v.clone()).stage("teacher parameters")?;
            return TeacherSpec::new(self.teacher.clone(), self.activation, grid, p).stage("teacher");
        }
        let mut rng = Streams::new(self.teacher_seed).named("teacher").stream(0);
        let policy = self.degeneracy.unwrap_or_default();
        sample_teacher(&self.teacher, &grid, self.activation, &self.domain, policy, &mut rng).stage("teacher")
    }

    /// Exact support points of an enumerable domain.
    pub fn support(&self) -> Result<Points> {
        self.domain.enumerate().stage("domain")
    }

    /// Bound exponent for this pair.
    pub fn pc(&self) -> Result<usize> {
        typnet_core::bounds::pc_for(&self.teacher, &self.student).stage("bound exponent")
    }
}

pub fn fc(widths: &[usize]) -> Architecture {
    FcArch::vanilla(widths).expect("preset widths are valid").into()
}

pub fn sfc(widths: &[usize]) -> Architecture {
    FcArch::scaled(widths).expect("preset widths are valid").into()
}

pub fn cnn(kernels: &[usize], channels: &[usize], len: usize) -> Architecture {
    ConvArch::new(kernels.to_vec(), channels.to_vec(), len, ConvFlavor::Plain).expect("preset conv is valid").into()
}

pub fn scn(kernels: &[usize], channels: &[usize], len: usize) -> Architecture {
    ConvArch::new(kernels.to_vec(), channels.to_vec(), len, ConvFlavor::Scaled).expect("preset conv is valid").into()
}

/// Evenly spaced nonzero points on a line: `±1, ±2, …, ±half`.
pub fn line(half: usize) -> InputDomain {
    let mut v: Vec<f64> = (1..=half).rev().map(|i| -(i as f64)).collect();
    v.extend((1..=half).map(|i| i as f64));
    InputDomain::finite(Points::new(1, v).unwrap()).unwrap()
}

/// One-input teacher with a single hidden unit, two-unit student, `Q = 3`,
/// on `{-2, -1, 1, 2}`.
pub fn tiny_fc() -> InstanceSpec {
    InstanceSpec::new("tiny-fc", fc(&[1, 1, 1]), fc(&[1, 2, 1]), 3, line(2))
}

/// The tiny FC pair on a 20-point line, fine enough for ε = 0.2.
pub fn tiny_fc_line() -> InstanceSpec {
    InstanceSpec::new("tiny-fc-line", fc(&[1, 1, 1]), fc(&[1, 2, 1]), 3, line(10))
}

/// Enumerable instances covering all four architectures with `Q ∈ {2, 3}`
/// and at most 12 student parameters.
pub fn bound_check_instances() -> Vec<InstanceSpec> {
    let cube = |d| InputDomain::hypercube(d).unwrap();
    vec![
        InstanceSpec::new("fc-121-q2", fc(&[1, 1, 1]), fc(&[1, 2, 1]), 2, line(2)),
        InstanceSpec::new("fc-121-q3", fc(&[1, 1, 1]), fc(&[1, 2, 1]), 3, line(2)),
        InstanceSpec::new("fc-221-q3", fc(&[2, 1, 1]), fc(&[2, 2, 1]), 3, cube(2)),
        InstanceSpec::new("fc-131-q2", fc(&[1, 1, 1]), fc(&[1, 3, 1]), 2, line(3)),
        InstanceSpec::new("sfc-121-q3", sfc(&[1, 1, 1]), sfc(&[1, 2, 1]), 3, line(2)),
        InstanceSpec::new("sfc-221-q2", sfc(&[2, 1, 1]), sfc(&[2, 2, 1]), 2, cube(2)),
        InstanceSpec::new("cnn-k2-q2", cnn(&[2], &[1, 1], 3), cnn(&[2], &[1, 2], 3), 2, cube(3)),
        InstanceSpec::new("scn-k1-q3", scn(&[1], &[1, 1], 2), scn(&[1], &[1, 2], 2), 3, cube(2)),
    ]
}

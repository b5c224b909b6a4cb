//! JSON configuration accepted by the commands. Every struct rejects unknown
//! fields so typos surface as schema errors.

use serde::{Deserialize, Serialize};

use layerpot::geometry::{FamilyDescriptor, FamilyParams, Interface};
use layerpot::{BallContext, LayerProblem, QuadratureSpec};

use crate::error::Failure;

fn three() -> usize {
    3
}
fn one() -> f64 {
    1.0
}
fn half() -> f64 {
    0.5
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    #[serde(default = "three")]
    pub n: usize,
    /// Ball radius.
    #[serde(default = "one")]
    pub radius: f64,
    pub interface: FamilyDescriptor,
    pub density: FamilyDescriptor,
    #[serde(default)]
    pub quadrature: QuadratureSpec<f64>,
}

impl ProblemConfig {
    pub fn build(&self) -> Result<LayerProblem<f64>, Failure> {
        let ctx = BallContext::new(self.n, self.radius).map_err(|e| Failure::schema("problem.n/radius", e))?;
        let interface: Interface<f64> = self.interface.interface(self.n).map_err(|e| Failure::schema("problem.interface", e))?;
        let density = self.density.density(self.n).map_err(|e| Failure::schema("problem.density", e))?;
        LayerProblem::new(ctx, interface, density, self.quadrature).map_err(|e| Failure::schema("problem", e))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassifyConfig {
    pub family: String,
    #[serde(default)]
    pub params: FamilyParams,
    #[serde(default = "default_ladder")]
    pub ladder: Vec<f64>,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "growth")]
    pub growth_factor: f64,
}

fn default_ladder() -> Vec<f64> {
    layerpot::modulus::default_ladder()
}
fn default_tol() -> f64 {
    1e-6
}
fn growth() -> f64 {
    1.5
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvalConfig {
    pub problem: ProblemConfig,
    pub points: Vec<Vec<f64>>,
    #[serde(default)]
    pub gradient: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JumpConfig {
    pub problem: ProblemConfig,
    pub x0: Vec<f64>,
    #[serde(default = "default_h_ladder")]
    pub h_ladder: Vec<f64>,
    /// Richardson order; taken from the problem modulus when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub order: Option<f64>,
}

fn default_h_ladder() -> Vec<f64> {
    layerpot::potential::DEFAULT_H_LADDER.to_vec()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RadialConfig {
    #[serde(default = "half")]
    pub s: f64,
    #[serde(default = "one")]
    pub r: f64,
    #[serde(default = "one")]
    pub g0: f64,
    #[serde(default = "oracle_radii")]
    pub radii: Vec<f64>,
}

fn oracle_radii() -> Vec<f64> {
    vec![0.1, 0.25, 0.6, 0.75, 0.9]
}

impl Default for RadialConfig {
    fn default() -> Self {
        Self {
            s: half(),
            r: one(),
            g0: one(),
            radii: oracle_radii(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlowupConfig {
    #[serde(default = "j_min")]
    pub j_min: u32,
    #[serde(default = "j_max")]
    pub j_max: u32,
    #[serde(default = "three")]
    pub n: usize,
    /// Run the flat / constant-density control instead.
    #[serde(default)]
    pub control: bool,
    #[serde(default)]
    pub quadrature: QuadratureSpec<f64>,
}

fn j_min() -> u32 {
    4
}
fn j_max() -> u32 {
    12
}

impl Default for BlowupConfig {
    fn default() -> Self {
        Self {
            j_min: j_min(),
            j_max: j_max(),
            n: 3,
            control: false,
            quadrature: QuadratureSpec::default(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KeyLemmaConfig {
    #[serde(default = "holder_interface")]
    pub interface: FamilyDescriptor,
    #[serde(default = "unit_density")]
    pub density: FamilyDescriptor,
    #[serde(default = "half")]
    pub rho: f64,
    #[serde(default = "lemma_radii")]
    pub radii: Vec<f64>,
    #[serde(default = "samples")]
    pub samples: usize,
    #[serde(default = "seed")]
    pub seed: u64,
    #[serde(default)]
    pub quadrature: QuadratureSpec<f64>,
}

fn holder_interface() -> FamilyDescriptor {
    FamilyDescriptor {
        family: "holder".into(),
        params: FamilyParams {
            alpha: Some(0.5),
            k: Some(1.0),
            ..Default::default()
        },
        n: Some(3),
    }
}
fn unit_density() -> FamilyDescriptor {
    FamilyDescriptor {
        family: "constant".into(),
        params: FamilyParams {
            c: Some(1.0),
            ..Default::default()
        },
        n: Some(3),
    }
}
fn lemma_radii() -> Vec<f64> {
    (1..=6).map(|k| 0.5f64.powi(k)).collect()
}
fn samples() -> usize {
    2000
}
fn seed() -> u64 {
    layerpot::sampling::DEFAULT_SEED
}

impl Default for KeyLemmaConfig {
    fn default() -> Self {
        Self {
            interface: holder_interface(),
            density: unit_density(),
            rho: half(),
            radii: lemma_radii(),
            samples: samples(),
            seed: seed(),
            quadrature: QuadratureSpec::default(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IterateConfig {
    pub problem: ProblemConfig,
    #[serde(default = "half")]
    pub rho: f64,
    #[serde(default = "steps")]
    pub steps: usize,
    #[serde(default = "n_theta")]
    pub n_theta: usize,
    #[serde(default = "n_phi")]
    pub n_phi: usize,
    /// Quasi-random points per sup-error measurement.
    #[serde(default = "iterate_samples")]
    pub samples: usize,
    #[serde(default = "seed")]
    pub seed: u64,
}

fn steps() -> usize {
    6
}
fn n_theta() -> usize {
    32
}
fn n_phi() -> usize {
    64
}
fn iterate_samples() -> usize {
    200
}

//! Counting rigid tropical stable maps through generic constraints.

mod search;

use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exactmath::{format_rational, lattice_index, parse_rational, IntMatrix, Rational};
use crate::maps::{is_zero_vec, CombinatorialType, DiscreteData, MapError, MapJson, TropicalStableMap, TypeJson};
use crate::moduli::{moduli_cone, ModuliError};
use crate::polyhedral::{Fan, PolyhedralError, QuotientProjection};

pub use search::enumerate_rigid_types;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CountError {
    #[error("constraint codimension {actual} does not match the moduli dimension {expected}")]
    CodimensionMismatch { expected: i64, actual: usize },
    #[error("need at least one marked point with trivial contact")]
    NoMarkedPoint,
    #[error("contact orders are not torically transverse")]
    NotTransverse,
    #[error("expected {expected} constraints, got {got}")]
    ConstraintCount { expected: usize, got: usize },
    #[error("translation has length {got}, fan rank is {rank}")]
    TranslationLength { got: usize, rank: usize },
    #[error("height bound must be positive")]
    HeightBound,
    #[error("too few legs for a stable tree")]
    TooFewLegs,
    #[error("constraints are not generic: {0}")]
    NonGeneric(String),
    #[error("evaluation matrix is singular")]
    Singular,
    #[error("not a planar point-constraint problem")]
    NotPlanarPointProblem,
    #[error(transparent)]
    Polyhedral(#[from] PolyhedralError),
    #[error(transparent)]
    Map(#[from] MapError),
    #[error(transparent)]
    Moduli(#[from] ModuliError),
}

/// Constraint for one trivial leg: its end must lie on translation + L.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Constraint {
    pub label: usize,
    pub projection: QuotientProjection,
    pub translation: Vec<Rational>,
}

impl Constraint {
    pub fn codimension(&self) -> usize {
        self.projection.codimension()
    }

    pub fn is_point(&self) -> bool {
        self.projection.subspace_basis.cols() == 0
    }

    /// Q t, the image of the translation in the quotient lattice.
    pub fn target(&self) -> Vec<Rational> {
        self.projection.projection.mul_rational(&self.translation)
    }
}

/// Requested subspace for one trivial leg; a missing translation is drawn at random.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubspaceSpec {
    pub basis: IntMatrix,
    pub translation: Option<Vec<Rational>>,
}

impl SubspaceSpec {
    pub fn point(rank: usize) -> Self {
        SubspaceSpec { basis: IntMatrix::zeros(rank, 0), translation: None }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConstraintConfig {
    pub constraints: Vec<Constraint>,
    pub seed: u64,
    pub height_bound: u64,
}

fn random_rational(rng: &mut ChaCha8Rng, h: i64) -> Rational {
    let num: i64 = rng.gen_range(-h..=h);
    let den: i64 = rng.gen_range(1..=h);
    Rational::new(num.into(), den.into())
}

/// Constraints for the trivial legs of `gamma`, in label order. Legs beyond `subspaces` get
/// point constraints. Translations come from a ChaCha stream seeded by `seed`.
pub fn generate_constraints(gamma: &DiscreteData, subspaces: &[SubspaceSpec], seed: u64, height_bound: u64) -> Result<ConstraintConfig, CountError> {
    let rank = gamma.fan().rank();
    let m = gamma.m();
    if subspaces.len() > m {
        return Err(CountError::ConstraintCount { expected: m, got: subspaces.len() });
    }
    if height_bound == 0 {
        return Err(CountError::HeightBound);
    }
    let h = height_bound.min(i64::MAX as u64) as i64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut constraints = Vec::new();
    for (i, &label) in gamma.trivial_legs().iter().enumerate() {
        let spec = subspaces.get(i).cloned().unwrap_or_else(|| SubspaceSpec::point(rank));
        let projection = QuotientProjection::new(rank, &spec.basis)?;
        let drawn: Vec<Rational> = (0..rank).map(|_| random_rational(&mut rng, h)).collect();
        let translation = match spec.translation {
            Some(t) if t.len() != rank => return Err(CountError::TranslationLength { got: t.len(), rank }),
            Some(t) => t,
            None => drawn,
        };
        constraints.push(Constraint { label, projection, translation });
    }
    let actual: usize = constraints.iter().map(|c| c.codimension()).sum();
    let expected = gamma.expected_dimension();
    if actual as i64 != expected {
        return Err(CountError::CodimensionMismatch { expected, actual });
    }
    Ok(ConstraintConfig { constraints, seed, height_bound })
}

#[derive(Clone, Debug)]
pub struct CountProblem {
    pub gamma: DiscreteData,
    pub constraints: ConstraintConfig,
}

impl CountProblem {
    pub fn new(gamma: DiscreteData, constraints: ConstraintConfig) -> Result<Self, CountError> {
        if gamma.m() == 0 {
            return Err(CountError::NoMarkedPoint);
        }
        if !gamma.torically_transverse() {
            return Err(CountError::NotTransverse);
        }
        if constraints.constraints.len() != gamma.m() {
            return Err(CountError::ConstraintCount { expected: gamma.m(), got: constraints.constraints.len() });
        }
        if gamma.leg_count() < 3 {
            return Err(CountError::TooFewLegs);
        }
        let actual: usize = constraints.constraints.iter().map(|c| c.codimension()).sum();
        let expected = gamma.expected_dimension();
        if actual as i64 != expected {
            return Err(CountError::CodimensionMismatch { expected, actual });
        }
        Ok(CountProblem { gamma, constraints })
    }

    /// Point constraints on all trivial legs, translations from `seed`.
    pub fn points(gamma: DiscreteData, seed: u64, height_bound: u64) -> Result<Self, CountError> {
        let c = generate_constraints(&gamma, &[], seed, height_bound)?;
        CountProblem::new(gamma, c)
    }

    pub fn fan(&self) -> &Fan {
        self.gamma.fan()
    }

    pub fn constraint(&self, label: usize) -> Option<&Constraint> {
        self.constraints.constraints.iter().find(|c| c.label == label)
    }

    pub fn is_planar_point_problem(&self) -> bool {
        self.fan().rank() == 2 && self.constraints.constraints.iter().all(|c| c.is_point())
    }
}

/// Evaluation at the constrained legs, on the integral span basis of the moduli cone.
pub fn evaluation_matrix(ty: &CombinatorialType, problem: &CountProblem) -> Result<IntMatrix, CountError> {
    let fan = problem.fan();
    let r = fan.rank();
    let cone = moduli_cone(fan, ty)?;
    let mut rows: Vec<Vec<BigInt>> = Vec::new();
    for c in &problem.constraints.constraints {
        let leg = ty.leg(c.label).ok_or(MapError::UnknownLabel(c.label))?;
        let q = &c.projection.projection;
        for i in 0..q.rows() {
            let mut row = vec![BigInt::zero(); cone.ambient_dim];
            for k in 0..r {
                row[r * leg.vertex + k] = q[(i, k)].clone();
            }
            rows.push(row);
        }
    }
    Ok(IntMatrix::from_rows(rows, cone.ambient_dim).mul(&cone.span_basis))
}

/// Lattice index of the evaluation matrix.
pub fn multiplicity(ty: &CombinatorialType, problem: &CountProblem) -> Result<BigInt, CountError> {
    let ev = evaluation_matrix(ty, problem)?;
    if ev.rows() != ev.cols() {
        return Err(CountError::Singular);
    }
    match lattice_index(&ev) {
        Ok(x) if !x.is_zero() => Ok(x),
        _ => Err(CountError::Singular),
    }
}

/// Product over vertices with three nonzero directions of |det(d1, d2)|.
pub fn mikhalkin_multiplicity(ty: &CombinatorialType, problem: &CountProblem) -> Result<BigInt, CountError> {
    if !problem.is_planar_point_problem() {
        return Err(CountError::NotPlanarPointProblem);
    }
    let mut total = BigInt::one();
    for v in 0..ty.vertex_count() {
        let mut dirs: Vec<Vec<i64>> = ty.neighbours(v).into_iter().map(|(_, _, d)| d).collect();
        dirs.extend(ty.legs.iter().filter(|l| l.vertex == v).map(|l| l.contact.clone()));
        let nonzero: Vec<&Vec<i64>> = dirs.iter().filter(|d| !is_zero_vec(d)).collect();
        match nonzero.len() {
            3 => {
                let (a, b) = (nonzero[0], nonzero[1]);
                total *= BigInt::from(a[0] * b[1] - a[1] * b[0]).abs();
            }
            2 if dirs.len() == 3 => {}
            _ => return Err(CountError::NotPlanarPointProblem),
        }
    }
    Ok(total)
}

fn binomial(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let mut r = BigInt::one();
    for i in 0..k {
        r = r * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    r
}

/// Number of rational plane curves of degree d through 3d - 1 general points.
pub fn kontsevich_oracle(d: u64) -> BigInt {
    assert!(d >= 1, "degree must be positive");
    let mut n: Vec<BigInt> = vec![BigInt::zero(), BigInt::one()];
    for e in 2..=d {
        let mut s = BigInt::zero();
        for d1 in 1..e {
            let d2 = e - d1;
            let a = BigInt::from(d2) * binomial(3 * e - 4, 3 * d1 - 2);
            let b = BigInt::from(d1) * binomial(3 * e - 4, 3 * d1 - 1);
            s += &n[d1 as usize] * &n[d2 as usize] * BigInt::from(d1 * d1 * d2) * (a - b);
        }
        n.push(s);
    }
    n[d as usize].clone()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Contribution {
    pub key: String,
    /// stabilized type, vertex cones located at the solution
    pub ty: CombinatorialType,
    /// the solved map, subdivided along walls
    pub map: TropicalStableMap,
    pub multiplicity: BigInt,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CountResult {
    pub total: BigInt,
    pub contributions: Vec<Contribution>,
    pub seed: u64,
    pub rejected_nongeneric: usize,
    /// search nodes that survived pruning, summed over levels
    pub nodes: usize,
}

/// Counts the maps of `problem` using the current rayon pool.
pub fn count(problem: &CountProblem) -> Result<CountResult, CountError> {
    let (contributions, nodes) = search::solve_all(problem)?;
    let total = contributions.iter().map(|c| &c.multiplicity).sum();
    Ok(CountResult { total, contributions, seed: problem.constraints.seed, rejected_nongeneric: 0, nodes })
}

/// Runs `count` on a dedicated pool with `threads` workers.
pub fn count_with_threads(problem: &CountProblem, threads: usize) -> Result<CountResult, CountError> {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads.max(1)).build().expect("thread pool");
    pool.install(|| count(problem))
}

/// Point-or-subspace count with reseeding: attempt k uses seed + k. `rejected_nongeneric`
/// records how many seeds were discarded.
pub fn count_with_retries(
    gamma: &DiscreteData,
    subspaces: &[SubspaceSpec],
    seed: u64,
    height_bound: u64,
    retries: usize,
    threads: usize,
) -> Result<CountResult, CountError> {
    let mut last = None;
    for attempt in 0..=retries {
        let s = seed.wrapping_add(attempt as u64);
        let config = generate_constraints(gamma, subspaces, s, height_bound)?;
        let problem = CountProblem::new(gamma.clone(), config)?;
        match count_with_threads(&problem, threads) {
            Ok(mut r) => {
                r.rejected_nongeneric = attempt;
                return Ok(r);
            }
            Err(e @ CountError::NonGeneric(_)) => last = Some(e),
            Err(e) => return Err(e),
        }
    }
    Err(last.expect("at least one attempt"))
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct ConstraintJson {
    pub label: usize,
    pub subspace: Vec<Vec<i64>>,
    pub translation: Vec<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct ContributionJson {
    pub key: String,
    #[serde(rename = "type")]
    pub ty: TypeJson,
    pub map: MapJson,
    pub multiplicity: u64,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct CountResultJson {
    pub schema: String,
    pub total: u64,
    pub seed: u64,
    pub rejected_nongeneric: usize,
    pub constraints: Vec<ConstraintJson>,
    pub contributions: Vec<ContributionJson>,
}

fn big_u64(x: &BigInt) -> u64 {
    x.to_u64().expect("count fits in 64 bits")
}

impl CountResult {
    pub fn to_json(&self, problem: &CountProblem) -> CountResultJson {
        let fan = problem.fan();
        CountResultJson {
            schema: crate::SCHEMA.to_string(),
            total: big_u64(&self.total),
            seed: self.seed,
            rejected_nongeneric: self.rejected_nongeneric,
            constraints: problem
                .constraints
                .constraints
                .iter()
                .map(|c| ConstraintJson {
                    label: c.label,
                    subspace: c.projection.subspace_basis.transpose().to_i64_rows().unwrap_or_default(),
                    translation: c.translation.iter().map(format_rational).collect(),
                })
                .collect(),
            contributions: self
                .contributions
                .iter()
                .map(|c| ContributionJson { key: c.key.clone(), ty: c.ty.to_json(fan), map: c.map.to_json(fan), multiplicity: big_u64(&c.multiplicity) })
                .collect(),
        }
    }

    /// Reads a result back; `nodes` is not serialized and comes back as zero.
    pub fn from_json(fan: &Fan, j: &CountResultJson) -> Result<CountResult, CountError> {
        let mut contributions = Vec::new();
        for c in &j.contributions {
            contributions.push(Contribution {
                key: c.key.clone(),
                ty: CombinatorialType::from_json(fan, &c.ty)?,
                map: TropicalStableMap::from_json(fan, &c.map)?,
                multiplicity: BigInt::from(c.multiplicity),
            });
        }
        Ok(CountResult { total: BigInt::from(j.total), contributions, seed: j.seed, rejected_nongeneric: j.rejected_nongeneric, nodes: 0 })
    }
}

impl ConstraintJson {
    pub fn to_spec(&self, rank: usize) -> Result<SubspaceSpec, CountError> {
        let cols: Vec<Vec<BigInt>> = self.subspace.iter().map(|v| v.iter().map(|&x| BigInt::from(x)).collect()).collect();
        let translation = self
            .translation
            .iter()
            .map(|s| parse_rational(s).map_err(|_| MapError::BadNumber(s.clone())))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(SubspaceSpec { basis: IntMatrix::from_columns(&cols, rank), translation: Some(translation) })
    }
}

/// Fan shared by the problem; convenience for callers holding an Arc.
pub fn shared_fan(problem: &CountProblem) -> Arc<Fan> {
    problem.gamma.fan_arc()
}

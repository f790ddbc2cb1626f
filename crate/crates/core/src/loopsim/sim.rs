use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use super::ast::{Dist, LoopProgram, Rhs, Statement};
use crate::error::{Error, Result};
use crate::estimator::MomentTensor;
use crate::moment_sources::{MomentAccumulator, Observations};

/// What to run: `replications` independent copies of `program`, each stopped
/// after `iterations` body executions.
#[derive(Debug, Clone)]
pub struct SimulationSpec {
    pub program: LoopProgram,
    pub iterations: u64,
    pub replications: u64,
    pub seed: u64,
    /// Variables to report; empty means all program outputs.
    pub variables: Vec<String>,
    /// Moment degree per reported variable (used by [`simulate_moments`]).
    pub degrees: Vec<usize>,
}

impl SimulationSpec {
    pub fn new(program: LoopProgram, iterations: u64, replications: u64, seed: u64) -> Self {
        SimulationSpec {
            program,
            iterations,
            replications,
            seed,
            variables: Vec::new(),
            degrees: Vec::new(),
        }
    }

    pub fn with_variables(mut self, vars: &[&str]) -> Self {
        self.variables = vars.iter().map(|s| s.to_string()).collect();
        self
    }

    pub fn with_degrees(mut self, degrees: &[usize]) -> Self {
        self.degrees = degrees.to_vec();
        self
    }

    fn columns(&self) -> Result<(Vec<String>, Vec<usize>)> {
        if self.iterations == 0 || self.replications == 0 {
            return Err(Error::InvalidArgument(
                "iterations and replications must be at least 1".into(),
            ));
        }
        if self.variables.is_empty() {
            let names = self.program.output_names().iter().map(|s| s.to_string()).collect();
            return Ok((names, self.program.outputs.clone()));
        }
        let slots = self
            .variables
            .iter()
            .map(|v| {
                self.program
                    .var_index(v)
                    .filter(|i| self.program.outputs.contains(i))
                    .ok_or_else(|| Error::InvalidArgument(format!("`{v}` is not an output of the program")))
            })
            .collect::<Result<_>>()?;
        Ok((self.variables.clone(), slots))
    }
}

/// The generator for replication `r`: seeded by `seed`, stream `r`.
pub fn replication_rng(seed: u64, r: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(r);
    rng
}

fn draw(dist: Dist, a: f64, b: f64, rng: &mut ChaCha8Rng) -> std::result::Result<f64, String> {
    match dist {
        Dist::Uniform => {
            let u: f64 = rng.random();
            Ok(a + (b - a) * u)
        }
        Dist::Normal => {
            if !(b >= 0.0) {
                return Err(format!("Normal variance {b} is negative"));
            }
            let z: f64 = StandardNormal.sample(rng);
            Ok(a + b.sqrt() * z)
        }
        Dist::Beta => rand_distr::Beta::new(a, b)
            .map(|d| d.sample(rng))
            .map_err(|e| format!("Beta({a}, {b}): {e}")),
    }
}

fn execute(
    program: &LoopProgram,
    s: &Statement,
    env: &mut [f64],
    rng: &mut ChaCha8Rng,
    replication: u64,
    iteration: u64,
) -> Result<()> {
    let value = match &s.rhs {
        Rhs::Expr(e) => e.eval(env),
        Rhs::Draw(d, a, b) => draw(*d, a.eval(env), b.eval(env), rng).map_err(|msg| {
            Error::InvalidArgument(format!(
                "replication {replication}, iteration {iteration}, `{}`: {msg}",
                program.vars[s.target]
            ))
        })?,
        Rhs::Branch(a, p, b) => {
            let u: f64 = rng.random();
            if u < *p {
                a.eval(env)
            } else {
                b.eval(env)
            }
        }
    };
    if !value.is_finite() {
        return Err(Error::NumericOverflow {
            replication,
            iteration,
            variable: program.vars[s.target].clone(),
        });
    }
    env[s.target] = value;
    Ok(())
}

/// Runs one replication and returns the full variable state after
/// `iterations` body executions.
pub fn run_replication(program: &LoopProgram, iterations: u64, seed: u64, r: u64) -> Result<Vec<f64>> {
    let mut rng = replication_rng(seed, r);
    let mut env = vec![f64::NAN; program.vars.len()];
    for s in &program.init {
        execute(program, s, &mut env, &mut rng, r, 0)?;
    }
    for it in 1..=iterations {
        for s in &program.body {
            execute(program, s, &mut env, &mut rng, r, it)?;
        }
    }
    Ok(env)
}

/// R x |variables| matrix of final values, row r from replication r.
pub fn simulate(spec: &SimulationSpec) -> Result<Observations> {
    let (names, slots) = spec.columns()?;
    let rows = (0..spec.replications)
        .into_par_iter()
        .map(|r| {
            let env = run_replication(&spec.program, spec.iterations, spec.seed, r)?;
            Ok(slots.iter().map(|i| env[*i]).collect())
        })
        .collect::<Result<Vec<Vec<f64>>>>()?;
    Observations::new(names, rows)
}

const BLOCK: u64 = 4096;

/// Moments of the simulated variables, accumulated block by block without
/// keeping the observation matrix.
pub fn simulate_moments(spec: &SimulationSpec) -> Result<MomentTensor> {
    let (_, slots) = spec.columns()?;
    if spec.degrees.len() != slots.len() {
        return Err(Error::DimensionMismatch {
            expected: slots.len(),
            actual: spec.degrees.len(),
        });
    }
    let blocks = spec.replications.div_ceil(BLOCK);
    let parts = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut acc = MomentAccumulator::new(&spec.degrees);
            let mut row = vec![0.0; slots.len()];
            for r in b * BLOCK..((b + 1) * BLOCK).min(spec.replications) {
                let env = run_replication(&spec.program, spec.iterations, spec.seed, r)?;
                for (v, i) in row.iter_mut().zip(&slots) {
                    *v = env[*i];
                }
                acc.push(&row);
            }
            Ok(acc)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut total = MomentAccumulator::new(&spec.degrees);
    for p in &parts {
        total.merge(p);
    }
    total.finish()
}

//! Non-nested probabilistic loop programs: parsing, pretty-printing and
//! Monte Carlo execution.

mod ast;
mod parser;
mod sim;

pub use ast::{BinOp, Dist, Expr, Func, LoopProgram, Rhs, Statement};
pub use parser::{compile_function, parse, CompiledFunction};
pub use sim::{replication_rng, run_replication, simulate, simulate_moments, SimulationSpec};

/// A program shipped with the crate.
#[derive(Debug, Clone, Copy)]
pub struct BundledProgram {
    pub name: &'static str,
    pub description: &'static str,
    pub source: &'static str,
}

macro_rules! bundled {
    ($($name:literal => $desc:literal),* $(,)?) => {
        &[$(BundledProgram {
            name: $name,
            description: $desc,
            source: include_str!(concat!("../../programs/", $name, ".loop")),
        }),*]
    };
}

pub const BUNDLED: &[BundledProgram] = bundled![
    "robot" => "differential-drive mobile robot (x, y, theta)",
    "irwin_hall" => "running sum of Uniform(0, 1) draws",
    "turning_vehicle" => "turning vehicle model",
    "turning_vehicle_small_var" => "turning vehicle with smaller heading variance",
    "taylor_rule" => "Taylor rule for the nominal interest rate",
    "robotic_arm" => "2D robotic arm end-effector position",
    "rimless_wheel" => "rimless wheel walker",
    "vasicek" => "discretized Vasicek short-rate model",
    "stuttering_p" => "stuttering accumulator with a discrete branch",
    "pdp" => "piecewise-deterministic gene circuit",
    "random_walk_1d" => "symmetric random walk on the integers",
    "random_walk_2d" => "simple random walk on the square lattice",
];

pub fn bundled(name: &str) -> Option<&'static BundledProgram> {
    BUNDLED.iter().find(|p| p.name == name)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::{Error, ParseError};
    use crate::moment_sources::{irwin_hall_moments, sample_moments};

    #[test]
    fn irwin_hall_listing() {
        let p = parse(bundled("irwin_hall").unwrap().source).unwrap();
        assert_eq!(p.init.len(), 1);
        assert_eq!(p.body.len(), 2);
        assert_eq!(p.output_names(), vec!["x"]);
    }

    #[test]
    fn robot_outputs() {
        let p = parse(bundled("robot").unwrap().source).unwrap();
        assert_eq!(p.output_names(), vec!["x", "y", "theta"]);
        let greek = "x := 0\nθ := Normal(0, 0.1)\nwhile (True):\n  Ω_r := Beta(1, 3)\n  θ := θ + Ω_r\nend\n";
        assert_eq!(parse(greek).unwrap().output_names(), vec!["x", "θ"]);
    }

    #[test]
    fn syntax_errors() {
        let empty = "x := 0\nwhile (True):\nend\n";
        assert!(matches!(parse(empty), Err(ParseError::Syntax { line: 3, .. })));
        let nested = "x := 0\nwhile (True):\n  x := x + 1\n  while (True):\n";
        assert_eq!(parse(nested), Err(ParseError::NestedLoop { line: 4 }));
        let before = "x := 0\nwhile (True):\n  x := x + u\n  u := Uniform(0, 1)\nend";
        assert!(matches!(parse(before), Err(ParseError::UseBeforeAssign { line: 3, ref name }) if name == "u"));
        let unknown = "x := 0\nwhile (True):\n  x := exp(x)\nend";
        assert!(matches!(parse(unknown), Err(ParseError::UnknownFunction { line: 3, ref name }) if name == "exp"));
        let prob = "x := 0\nwhile (True):\n  x := x {1.5} 0\nend";
        assert!(matches!(parse(prob), Err(ParseError::BadProbability { line: 3, .. })));
        let missing = "x := 0\nwhile (True):\n  x := x + 1\n";
        assert!(matches!(parse(missing), Err(ParseError::Syntax { .. })));
        let col = "x := 0\nwhile (True):\n  x := x + * 2\nend";
        assert!(matches!(parse(col), Err(ParseError::Syntax { line: 3, column: 12, .. })));
        let draw_in_expr = "x := 0\nwhile (True):\n  x := x + Uniform(0, 1)\nend";
        assert!(parse(draw_in_expr).is_err());
        let branch_in_init = "x := 1 {0.5} 0\nwhile (True):\n  x := x\nend";
        assert!(parse(branch_in_init).is_err());
    }

    #[test]
    fn comments_and_semicolons() {
        let src = "# header\nx := 0; y := 1 # trailing\nwhile (True):\n  x := x + y; y := -y\nend\n";
        let p = parse(src).unwrap();
        assert_eq!(p.init.len(), 2);
        assert_eq!(p.body.len(), 2);
    }

    #[test]
    fn pretty_print_round_trips_bundled() {
        for b in BUNDLED {
            let p = parse(b.source).unwrap();
            let again = parse(&p.pretty_print()).unwrap();
            assert_eq!(again, p, "{}", b.name);
        }
    }

    #[test]
    fn bundled_programs_run() {
        for b in BUNDLED {
            let p = parse(b.source).unwrap();
            let obs = simulate(&SimulationSpec::new(p, 20, 1000, 1)).unwrap();
            assert_eq!(obs.len(), 1000, "{}", b.name);
        }
    }

    #[test]
    fn fixpoint_program() {
        let p = parse("x := 5\nwhile (True):\n  x := x\nend").unwrap();
        let obs = simulate(&SimulationSpec::new(p, 7, 50, 3)).unwrap();
        assert!(obs.rows.iter().all(|r| r == &vec![5.0]));
    }

    #[test]
    fn determinism_and_prefix_stability() {
        let p = parse(bundled("robot").unwrap().source).unwrap();
        let a = simulate(&SimulationSpec::new(p.clone(), 10, 500, 42)).unwrap();
        let b = simulate(&SimulationSpec::new(p.clone(), 10, 500, 42)).unwrap();
        assert_eq!(a, b);
        let c = simulate(&SimulationSpec::new(p, 10, 800, 42)).unwrap();
        assert_eq!(&c.rows[..500], &a.rows[..]);
    }

    #[test]
    fn streamed_moments_equal_materialized() {
        let p = parse(bundled("robot").unwrap().source).unwrap();
        let spec = SimulationSpec::new(p, 5, 9000, 9).with_variables(&["x", "y"]).with_degrees(&[3, 2]);
        let streamed = simulate_moments(&spec).unwrap();
        let obs = simulate(&spec).unwrap();
        assert_eq!(streamed, sample_moments(&obs.rows, &[3, 2]).unwrap());
    }

    #[test]
    fn irwin_hall_simulated_moments() {
        let p = parse(bundled("irwin_hall").unwrap().source).unwrap();
        let spec = SimulationSpec::new(p, 3, 1_000_000, 2024).with_degrees(&[12]);
        let m = simulate_moments(&spec).unwrap();
        let exact = irwin_hall_moments(3).unwrap();
        for k in 1..=6 {
            let se = ((m.values()[2 * k] - m.values()[k].powi(2)) / 1e6).sqrt();
            assert!((m.values()[k] - exact.values()[k]).abs() < 4.0 * se, "k={k}");
        }
    }

    #[test]
    fn overflow_is_reported() {
        let p = parse("x := 1\nwhile (True):\n  x := x*1e200\nend").unwrap();
        let err = simulate(&SimulationSpec::new(p, 5, 4, 0)).unwrap_err();
        assert!(matches!(err, Error::NumericOverflow { iteration: 2, ref variable, .. } if variable == "x"));
    }

    #[test]
    fn unknown_output_variable() {
        let p = parse(bundled("irwin_hall").unwrap().source).unwrap();
        assert!(simulate(&SimulationSpec::new(p, 1, 1, 0).with_variables(&["u"])).is_err());
    }

    #[test]
    fn compiled_function() {
        let f = compile_function("2*x - abs(x - 1) + max(x, 0.5)", "x").unwrap();
        assert_eq!(f.eval(2.0), 4.0 - 1.0 + 2.0);
        assert!(compile_function("y + 1", "x").is_err());
        assert!(compile_function("x +", "x").is_err());
    }
}

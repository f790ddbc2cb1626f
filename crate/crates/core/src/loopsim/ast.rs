use std::fmt;

/// Built-in scalar functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Min,
    Max,
    Abs,
}

impl Func {
    pub fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "min" => Func::Min,
            "max" => Func::Max,
            "abs" => Func::Abs,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Min => "min",
            Func::Max => "max",
            Func::Abs => "abs",
        }
    }

    pub fn arity(self) -> usize {
        match self {
            Func::Min | Func::Max => 2,
            _ => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl BinOp {
    fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
        }
    }

    fn precedence(self) -> u8 {
        match self {
            BinOp::Add | BinOp::Sub => 1,
            BinOp::Mul | BinOp::Div => 2,
        }
    }
}

/// Arithmetic expression. Variables refer to slots of [`LoopProgram::vars`].
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(usize),
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Vec<Expr>),
}

impl Expr {
    pub fn eval(&self, env: &[f64]) -> f64 {
        match self {
            Expr::Num(v) => *v,
            Expr::Var(i) => env[*i],
            Expr::Neg(e) => -e.eval(env),
            Expr::Bin(op, a, b) => {
                let (a, b) = (a.eval(env), b.eval(env));
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => a / b,
                }
            }
            Expr::Call(f, args) => match f {
                Func::Sin => args[0].eval(env).sin(),
                Func::Cos => args[0].eval(env).cos(),
                Func::Abs => args[0].eval(env).abs(),
                Func::Min => args[0].eval(env).min(args[1].eval(env)),
                Func::Max => args[0].eval(env).max(args[1].eval(env)),
            },
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Bin(op, ..) => op.precedence(),
            Expr::Neg(_) => 3,
            _ => 4,
        }
    }

    fn write(&self, vars: &[String], out: &mut String) {
        match self {
            Expr::Num(v) => out.push_str(&format!("{v:?}")),
            Expr::Var(i) => out.push_str(&vars[*i]),
            Expr::Neg(e) => {
                out.push('-');
                write_wrapped(e, e.precedence() < 3, vars, out);
            }
            Expr::Bin(op, a, b) => {
                let p = op.precedence();
                write_wrapped(a, a.precedence() < p, vars, out);
                out.push(' ');
                out.push_str(op.symbol());
                out.push(' ');
                // left-associative: an equal-precedence right operand needs parentheses
                write_wrapped(b, b.precedence() <= p, vars, out);
            }
            Expr::Call(f, args) => {
                out.push_str(f.name());
                out.push('(');
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        out.push_str(", ");
                    }
                    a.write(vars, out);
                }
                out.push(')');
            }
        }
    }
}

fn write_wrapped(e: &Expr, wrap: bool, vars: &[String], out: &mut String) {
    if wrap {
        out.push('(');
        e.write(vars, out);
        out.push(')');
    } else {
        e.write(vars, out);
    }
}

/// Distribution families available as draws.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dist {
    /// Uniform(lower, upper)
    Uniform,
    /// Normal(mean, variance)
    Normal,
    /// Beta(alpha, beta)
    Beta,
}

impl Dist {
    pub fn from_name(name: &str) -> Option<Dist> {
        Some(match name {
            "Uniform" => Dist::Uniform,
            "Normal" => Dist::Normal,
            "Beta" => Dist::Beta,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Dist::Uniform => "Uniform",
            Dist::Normal => "Normal",
            Dist::Beta => "Beta",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Rhs {
    Expr(Expr),
    Draw(Dist, Expr, Expr),
    /// first value with the given probability, otherwise the second
    Branch(Expr, f64, Expr),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Statement {
    pub target: usize,
    pub rhs: Rhs,
}

/// A parsed program: initialization statements followed by a
/// `while (True):` body. Outputs are the variables assigned during
/// initialization, in order of first assignment.
#[derive(Debug, Clone, PartialEq)]
pub struct LoopProgram {
    pub vars: Vec<String>,
    pub init: Vec<Statement>,
    pub body: Vec<Statement>,
    pub outputs: Vec<usize>,
}

impl LoopProgram {
    pub fn output_names(&self) -> Vec<&str> {
        self.outputs.iter().map(|i| self.vars[*i].as_str()).collect()
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.vars.iter().position(|v| v == name)
    }

    fn write_statement(&self, s: &Statement, out: &mut String) {
        out.push_str(&self.vars[s.target]);
        out.push_str(" := ");
        match &s.rhs {
            Rhs::Expr(e) => e.write(&self.vars, out),
            Rhs::Draw(d, a, b) => {
                out.push_str(d.name());
                out.push('(');
                a.write(&self.vars, out);
                out.push_str(", ");
                b.write(&self.vars, out);
                out.push(')');
            }
            Rhs::Branch(a, p, b) => {
                a.write(&self.vars, out);
                out.push_str(&format!(" {{{p:?}}} "));
                b.write(&self.vars, out);
            }
        }
        out.push('\n');
    }

    /// Canonical source text; parsing it yields an equal program.
    pub fn pretty_print(&self) -> String {
        let mut out = String::new();
        for s in &self.init {
            self.write_statement(s, &mut out);
        }
        out.push_str("while (True):\n");
        for s in &self.body {
            out.push_str("    ");
            self.write_statement(s, &mut out);
        }
        out.push_str("end\n");
        out
    }
}

impl fmt::Display for LoopProgram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.pretty_print())
    }
}

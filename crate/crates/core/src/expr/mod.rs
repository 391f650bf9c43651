//! Matrix-valued expression language.
//!
//! Expressions are written in curly braces, e.g. `{hbar/2*(|0><1|_2+|1><0|_2)}`,
//! and evaluate to dense complex matrices. Scalars are 1×1 matrices.
//!
//! Precedence from loosest to tightest: `+`/`-`, `otimes`, `*`/`/`,
//! `sqrt`/`exp`, unary minus. All binary operators are left-associative.

mod lexer;
mod parser;

use std::fmt;

use ndarray::Array2;

use crate::{ComplexMatrix, C64};

pub use parser::parse_inner;

/// Reduced Planck constant in meV·ps.
pub const HBAR: f64 = 0.658_211_956_9;
/// Boltzmann constant in meV/K.
pub const KB: f64 = 0.086_173_332_62;
/// Conversion from wavenumbers (1/cm) to angular frequency (1/ps): 2πc in cm/ps.
pub const WN: f64 = 2.0 * std::f64::consts::PI * 0.029_979_245_8;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ExprError {
    #[error("syntax error at position {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("unknown identifier '{0}'")]
    UnknownIdentifier(String),
    #[error("shape mismatch in {op}: {lhs:?} vs {rhs:?}")]
    Shape { op: &'static str, lhs: (usize, usize), rhs: (usize, usize) },
    #[error("{0}() requires a 1x1 argument, got {1:?}")]
    NonScalarFunction(&'static str, (usize, usize)),
    #[error("division by zero")]
    DivisionByZero,
    #[error("invalid operator '{name}': {msg}")]
    InvalidOperator { name: String, msg: String },
    #[error("expected a 1x1 expression, got {0:?}")]
    NotScalar((usize, usize)),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
    Otimes,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Function {
    Sqrt,
    Exp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Constant {
    Pi,
    Hbar,
    Kb,
    Wn,
}

impl Constant {
    pub fn value(self) -> f64 {
        match self {
            Constant::Pi => std::f64::consts::PI,
            Constant::Hbar => HBAR,
            Constant::Kb => KB,
            Constant::Wn => WN,
        }
    }

    fn name(self) -> &'static str {
        match self {
            Constant::Pi => "pi",
            Constant::Hbar => "hbar",
            Constant::Kb => "kB",
            Constant::Wn => "wn",
        }
    }
}

/// Predefined operators of the expression language.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Operator {
    Dirac { row: usize, col: usize, dim: usize },
    Identity(usize),
    SigmaX,
    SigmaY,
    SigmaZ,
    Create(usize),
    Annihilate(usize),
    Number(usize),
}

impl Operator {
    /// Parses an identifier such as `Id_3`, `bdagger_5` or `sigma_z`.
    pub fn from_ident(name: &str) -> Option<Result<Operator, ExprError>> {
        let op = match name {
            "sigma_x" => Operator::SigmaX,
            "sigma_y" => Operator::SigmaY,
            "sigma_z" => Operator::SigmaZ,
            _ => {
                let (prefix, dim) = name.rsplit_once('_')?;
                let ctor: fn(usize) -> Operator = match prefix {
                    "Id" => Operator::Identity,
                    "bdagger" => Operator::Create,
                    "b" => Operator::Annihilate,
                    "n" => Operator::Number,
                    _ => return None,
                };
                return Some(match dim.parse::<usize>() {
                    Ok(d) => Ok(ctor(d)),
                    Err(_) => Err(ExprError::InvalidOperator {
                        name: name.to_string(),
                        msg: "dimension must be a non-negative integer".into(),
                    }),
                });
            }
        };
        Some(Ok(op))
    }

    pub fn matrix(self) -> Result<ComplexMatrix, ExprError> {
        predefined_operator(self)
    }
}

impl fmt::Display for Operator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Operator::Dirac { row, col, dim } => write!(f, "|{row}><{col}|_{dim}"),
            Operator::Identity(d) => write!(f, "Id_{d}"),
            Operator::SigmaX => f.write_str("sigma_x"),
            Operator::SigmaY => f.write_str("sigma_y"),
            Operator::SigmaZ => f.write_str("sigma_z"),
            Operator::Create(d) => write!(f, "bdagger_{d}"),
            Operator::Annihilate(d) => write!(f, "b_{d}"),
            Operator::Number(d) => write!(f, "n_{d}"),
        }
    }
}

/// Parsed expression tree.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Number(f64),
    Constant(Constant),
    Operator(Operator),
    Neg(Box<Expr>),
    Call(Function, Box<Expr>),
    Binary(BinaryOp, Box<Expr>, Box<Expr>),
    Group(Box<Expr>),
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Number(v) => write!(f, "{v:?}"),
            Expr::Constant(c) => f.write_str(c.name()),
            Expr::Operator(op) => write!(f, "{op}"),
            Expr::Neg(e) => write!(f, "(-{e})"),
            Expr::Call(Function::Sqrt, e) => write!(f, "sqrt({e})"),
            Expr::Call(Function::Exp, e) => write!(f, "exp({e})"),
            Expr::Group(e) => write!(f, "({e})"),
            Expr::Binary(op, l, r) => {
                let sym = match op {
                    BinaryOp::Add => "+",
                    BinaryOp::Sub => "-",
                    BinaryOp::Mul => "*",
                    BinaryOp::Div => "/",
                    BinaryOp::Otimes => " otimes ",
                };
                write!(f, "({l}{sym}{r})")
            }
        }
    }
}

/// Parses a brace-delimited expression such as `{Id_2}`.
pub fn parse_expression(text: &str) -> Result<Expr, ExprError> {
    let trimmed = text.trim();
    let open = trimmed.find('{');
    if open != Some(0) {
        return Err(ExprError::Syntax { pos: 0, msg: "expression must start with '{'".into() });
    }
    let mut depth = 0usize;
    let mut close = None;
    for (i, c) in trimmed.char_indices() {
        match c {
            '{' => depth += 1,
            '}' => {
                if depth == 0 {
                    return Err(ExprError::Syntax { pos: i, msg: "unbalanced '}'".into() });
                }
                depth -= 1;
                if depth == 0 {
                    close = Some(i);
                    break;
                }
            }
            _ => {}
        }
    }
    let close = close.ok_or(ExprError::Syntax { pos: trimmed.len(), msg: "unbalanced '{'".into() })?;
    if close + 1 != trimmed.len() {
        return Err(ExprError::Syntax { pos: close + 1, msg: "trailing characters after '}'".into() });
    }
    let inner = &trimmed[1..close];
    if inner.contains('{') {
        return Err(ExprError::Syntax { pos: 1, msg: "nested braces are not allowed".into() });
    }
    parser::parse_inner(inner).map_err(|e| match e {
        ExprError::Syntax { pos, msg } => ExprError::Syntax { pos: pos + 1, msg },
        other => other,
    })
}

/// Evaluates an expression tree to a matrix.
pub fn evaluate(node: &Expr) -> Result<ComplexMatrix, ExprError> {
    match node {
        Expr::Number(v) => Ok(scalar(C64::new(*v, 0.0))),
        Expr::Constant(c) => Ok(scalar(C64::new(c.value(), 0.0))),
        Expr::Operator(op) => op.matrix(),
        Expr::Group(e) => evaluate(e),
        Expr::Neg(e) => Ok(evaluate(e)?.mapv(|x| -x)),
        Expr::Call(func, e) => {
            let m = evaluate(e)?;
            let x = as_scalar(&m).ok_or(ExprError::NonScalarFunction(
                match func {
                    Function::Sqrt => "sqrt",
                    Function::Exp => "exp",
                },
                m.dim(),
            ))?;
            Ok(scalar(match func {
                Function::Sqrt => x.sqrt(),
                Function::Exp => x.exp(),
            }))
        }
        Expr::Binary(op, l, r) => {
            let a = evaluate(l)?;
            let b = evaluate(r)?;
            binary(*op, a, b)
        }
    }
}

fn binary(op: BinaryOp, a: ComplexMatrix, b: ComplexMatrix) -> Result<ComplexMatrix, ExprError> {
    match op {
        BinaryOp::Add | BinaryOp::Sub => {
            if a.dim() != b.dim() {
                return Err(ExprError::Shape {
                    op: if op == BinaryOp::Add { "+" } else { "-" },
                    lhs: a.dim(),
                    rhs: b.dim(),
                });
            }
            Ok(if op == BinaryOp::Add { a + b } else { a - b })
        }
        BinaryOp::Mul => {
            if let Some(s) = as_scalar(&a) {
                Ok(b.mapv(|x| x * s))
            } else if let Some(s) = as_scalar(&b) {
                Ok(a.mapv(|x| x * s))
            } else if a.ncols() == b.nrows() {
                Ok(a.dot(&b))
            } else {
                Err(ExprError::Shape { op: "*", lhs: a.dim(), rhs: b.dim() })
            }
        }
        BinaryOp::Div => {
            let s = as_scalar(&b).ok_or(ExprError::Shape { op: "/", lhs: a.dim(), rhs: b.dim() })?;
            if s == C64::new(0.0, 0.0) {
                return Err(ExprError::DivisionByZero);
            }
            Ok(a.mapv(|x| x / s))
        }
        BinaryOp::Otimes => Ok(crate::tensor::kron(&a, &b)),
    }
}

fn scalar(x: C64) -> ComplexMatrix {
    Array2::from_elem((1, 1), x)
}

fn as_scalar(m: &ComplexMatrix) -> Option<C64> {
    (m.dim() == (1, 1)).then(|| m[[0, 0]])
}

/// Builds the matrix of a predefined operator.
pub fn predefined_operator(op: Operator) -> Result<ComplexMatrix, ExprError> {
    let check_dim = |d: usize| {
        if d < 1 {
            Err(ExprError::InvalidOperator { name: op.to_string(), msg: "dimension must be at least 1".into() })
        } else {
            Ok(d)
        }
    };
    let one = C64::new(1.0, 0.0);
    let i = C64::new(0.0, 1.0);
    Ok(match op {
        Operator::Dirac { row, col, dim } => {
            let d = check_dim(dim)?;
            if row >= d || col >= d {
                return Err(ExprError::InvalidOperator {
                    name: op.to_string(),
                    msg: format!("index out of range for dimension {d}"),
                });
            }
            let mut m = Array2::zeros((d, d));
            m[[row, col]] = one;
            m
        }
        Operator::Identity(d) => Array2::eye(check_dim(d)?),
        Operator::SigmaX => ndarray::array![[C64::new(0.0, 0.0), one], [one, C64::new(0.0, 0.0)]],
        Operator::SigmaY => ndarray::array![[C64::new(0.0, 0.0), -i], [i, C64::new(0.0, 0.0)]],
        Operator::SigmaZ => ndarray::array![[one, C64::new(0.0, 0.0)], [C64::new(0.0, 0.0), -one]],
        Operator::Annihilate(d) => annihilator(check_dim(d)?),
        Operator::Create(d) => annihilator(check_dim(d)?).t().mapv(|x| x.conj()),
        Operator::Number(d) => {
            let b = annihilator(check_dim(d)?);
            b.t().mapv(|x| x.conj()).dot(&b)
        }
    })
}

fn annihilator(d: usize) -> ComplexMatrix {
    let mut b = Array2::zeros((d, d));
    for m in 0..d.saturating_sub(1) {
        b[[m, m + 1]] = C64::new(((m + 1) as f64).sqrt(), 0.0);
    }
    b
}

/// Parses and evaluates a brace-delimited expression.
pub fn eval_str(text: &str) -> Result<ComplexMatrix, ExprError> {
    evaluate(&parse_expression(text)?)
}

/// Evaluates a 1×1 expression and returns its real part.
pub fn scalar_from_expression(text: &str) -> Result<f64, ExprError> {
    let m = eval_str(text)?;
    as_scalar(&m).map(|x| x.re).ok_or(ExprError::NotScalar(m.dim()))
}

/// Formats a matrix one row per line as `(re,im)` pairs.
pub fn format_matrix(m: &ComplexMatrix) -> String {
    let mut s = String::new();
    for row in m.rows() {
        let cells: Vec<String> = row.iter().map(|x| format!("({},{})", x.re, x.im)).collect();
        s.push_str(&cells.join(" "));
        s.push('\n');
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn dirac_operator() {
        let m = eval_str("{|0><1|_2}").unwrap();
        assert_eq!(m.dim(), (2, 2));
        assert_eq!(m[[0, 1]], c(1.0));
        assert_eq!(m.iter().filter(|x| x.norm() > 0.0).count(), 1);
    }

    #[test]
    fn spin_operator() {
        let m = eval_str("{hbar/2*(|0><1|_2+|1><0|_2)}").unwrap();
        assert!((m[[0, 1]].re - HBAR / 2.0).abs() < 1e-15);
        assert!((m[[1, 0]].re - HBAR / 2.0).abs() < 1e-15);
        assert_eq!(m[[0, 0]], c(0.0));
    }

    #[test]
    fn unbalanced_brace() {
        assert!(matches!(parse_expression("{2*pi"), Err(ExprError::Syntax { .. })));
        assert!(matches!(parse_expression("{(2*pi}"), Err(ExprError::Syntax { .. })));
    }

    #[test]
    fn number_operator() {
        let m = eval_str("{bdagger_3*b_3}").unwrap();
        for k in 0..3 {
            assert!((m[[k, k]] - c(k as f64)).norm() < 1e-14);
        }
    }

    #[test]
    fn constants() {
        assert!((scalar_from_expression("{hbar}").unwrap() - 0.6582119569).abs() < 1e-12);
        assert!((scalar_from_expression("{kB}").unwrap() - 0.08617333262).abs() < 1e-12);
        assert!((scalar_from_expression("{wn}").unwrap() - 0.1883651567).abs() < 1e-10);
        assert!((scalar_from_expression("{2*pi}").unwrap() - std::f64::consts::TAU).abs() < 1e-15);
        let ratio = scalar_from_expression("{hbar/kB}").unwrap();
        assert!((ratio - 0.6582119569 / 0.08617333262).abs() < 1e-12);
        assert!((ratio - 7.6382).abs() < 1e-4);
    }

    #[test]
    fn jaynes_cummings_coupling() {
        let m = eval_str("{|0><1|_2 otimes bdagger_5 + |1><0|_2 otimes b_5}").unwrap();
        assert_eq!(m.dim(), (10, 10));
        // |0,n+1><1,n| with sqrt(n+1)
        assert!((m[[1, 5]] - c(1.0)).norm() < 1e-14);
        assert!((m[[5, 1]] - c(1.0)).norm() < 1e-14);
        assert!((m[[2, 6]] - c(2f64.sqrt())).norm() < 1e-14);
        let h = &m - &m.t().mapv(|x| x.conj());
        assert!(h.iter().all(|x| x.norm() < 1e-14));
    }

    #[test]
    fn exp_and_sqrt_are_scalar() {
        assert_eq!(eval_str("{exp(0)}").unwrap()[[0, 0]], c(1.0));
        assert!((eval_str("{sqrt(4)}").unwrap()[[0, 0]] - c(2.0)).norm() < 1e-15);
        assert!(matches!(eval_str("{exp(Id_2)}"), Err(ExprError::NonScalarFunction(..))));
    }

    #[test]
    fn predefined() {
        assert_eq!(eval_str("{Id_3}").unwrap(), Array2::<C64>::eye(3));
        assert_eq!(eval_str("{b_2}").unwrap(), ndarray::array![[c(0.0), c(1.0)], [c(0.0), c(0.0)]]);
        let sy = eval_str("{sigma_y}").unwrap();
        assert_eq!(sy[[0, 1]], C64::new(0.0, -1.0));
        assert_eq!(sy[[1, 0]], C64::new(0.0, 1.0));
        assert_eq!(eval_str("{sigma_x*sigma_x}").unwrap(), Array2::<C64>::eye(2));
    }

    #[test]
    fn errors() {
        assert!(matches!(eval_str("{|2><0|_2}"), Err(ExprError::InvalidOperator { .. })));
        assert!(matches!(eval_str("{Id_0}"), Err(ExprError::InvalidOperator { .. })));
        assert!(matches!(eval_str("{foo}"), Err(ExprError::UnknownIdentifier(_))));
        assert!(matches!(eval_str("{1/0}"), Err(ExprError::DivisionByZero)));
        assert!(matches!(eval_str("{Id_2+Id_3}"), Err(ExprError::Shape { .. })));
        assert!(matches!(eval_str("{Id_2*Id_3}"), Err(ExprError::Shape { .. })));
        assert!(matches!(scalar_from_expression("{Id_2}"), Err(ExprError::NotScalar(_))));
    }

    #[test]
    fn precedence() {
        // otimes binds looser than *, tighter than +.
        let a = eval_str("{2*sigma_z otimes Id_2 + Id_4}").unwrap();
        let b = eval_str("{((2*sigma_z) otimes Id_2) + Id_4}").unwrap();
        assert_eq!(a, b);
        assert_eq!(scalar_from_expression("{-2*3}").unwrap(), -6.0);
        assert_eq!(scalar_from_expression("{8/2/2}").unwrap(), 2.0);
        assert_eq!(scalar_from_expression("{1-2-3}").unwrap(), -4.0);
        assert_eq!(scalar_from_expression("{1e-3*1E3}").unwrap(), 1.0);
        assert_eq!(scalar_from_expression("{ 2 * ( 1 + 2 ) }").unwrap(), 6.0);
    }

    #[test]
    fn dirac_completeness() {
        for d in 1..=8 {
            let terms: Vec<String> = (0..d).map(|i| format!("|{i}><{i}|_{d}")).collect();
            let m = eval_str(&format!("{{{}}}", terms.join("+"))).unwrap();
            assert_eq!(m, Array2::<C64>::eye(d));
        }
    }

    #[test]
    fn creation_is_adjoint_of_annihilation() {
        for d in 1..=10 {
            let bd = eval_str(&format!("{{bdagger_{d}}}")).unwrap();
            let b = eval_str(&format!("{{b_{d}}}")).unwrap();
            assert_eq!(bd.t().mapv(|x| x.conj()), b);
        }
    }

    fn leaf() -> impl Strategy<Value = Expr> {
        prop_oneof![
            (0.0f64..10.0).prop_map(Expr::Number),
            Just(Expr::Constant(Constant::Pi)),
            Just(Expr::Constant(Constant::Hbar)),
            Just(Expr::Operator(Operator::SigmaX)),
            Just(Expr::Operator(Operator::SigmaY)),
            Just(Expr::Operator(Operator::SigmaZ)),
            Just(Expr::Operator(Operator::Identity(2))),
            (0usize..2, 0usize..2).prop_map(|(row, col)| Expr::Operator(Operator::Dirac { row, col, dim: 2 })),
        ]
    }

    fn tree() -> impl Strategy<Value = Expr> {
        leaf().prop_recursive(4, 24, 2, |inner| {
            prop_oneof![
                inner.clone().prop_map(|e| Expr::Neg(Box::new(e))),
                inner.clone().prop_map(|e| Expr::Group(Box::new(e))),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::Binary(BinaryOp::Add, Box::new(a), Box::new(b))),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::Binary(BinaryOp::Sub, Box::new(a), Box::new(b))),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::Binary(BinaryOp::Mul, Box::new(a), Box::new(b))),
                (inner.clone(), inner).prop_map(|(a, b)| Expr::Binary(BinaryOp::Otimes, Box::new(a), Box::new(b))),
            ]
        })
    }

    proptest! {
        #[test]
        fn print_parse_round_trip(e in tree()) {
            let printed = format!("{{{e}}}");
            let reparsed = parse_expression(&printed).unwrap();
            match (evaluate(&e), evaluate(&reparsed)) {
                (Ok(a), Ok(b)) => prop_assert_eq!(a, b),
                (Err(_), Err(_)) => {}
                (a, b) => prop_assert!(false, "evaluation mismatch {:?} vs {:?}", a, b),
            }
        }

        #[test]
        fn kron_associative(i in 0usize..4, j in 0usize..4, k in 0usize..4) {
            let names = ["sigma_x", "sigma_y", "sigma_z", "|0><1|_2"];
            let (a, b, c) = (names[i], names[j], names[k]);
            let left = eval_str(&format!("{{{a} otimes ({b} otimes {c})}}")).unwrap();
            let right = eval_str(&format!("{{({a} otimes {b}) otimes {c}}}")).unwrap();
            prop_assert_eq!(left, right);
        }
    }
}

use super::lexer::{tokenize, Spanned, Token};
use super::{BinaryOp, Constant, Expr, ExprError, Function, Operator};

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
    end: usize,
}

/// Parses the text between the braces of an expression.
pub fn parse_inner(src: &str) -> Result<Expr, ExprError> {
    let toks = tokenize(src)?;
    let mut p = Parser { toks, pos: 0, end: src.len() };
    if p.toks.is_empty() {
        return Err(ExprError::Syntax { pos: 0, msg: "empty expression".into() });
    }
    let e = p.sum()?;
    if let Some(t) = p.toks.get(p.pos) {
        return Err(ExprError::Syntax { pos: t.pos, msg: format!("unexpected token {:?}", t.token) });
    }
    Ok(e)
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.toks.get(self.pos).map(|t| &t.token)
    }

    fn here(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |t| t.pos)
    }

    fn sum(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.kron()?;
        loop {
            let op = match self.peek() {
                Some(Token::Plus) => BinaryOp::Add,
                Some(Token::Minus) => BinaryOp::Sub,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.kron()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn kron(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.product()?;
        while matches!(self.peek(), Some(Token::Ident(s)) if s == "otimes") {
            self.pos += 1;
            let rhs = self.product()?;
            lhs = Expr::Binary(BinaryOp::Otimes, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn product(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Some(Token::Star) => BinaryOp::Mul,
                Some(Token::Slash) => BinaryOp::Div,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.unary()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn unary(&mut self) -> Result<Expr, ExprError> {
        if matches!(self.peek(), Some(Token::Minus)) {
            self.pos += 1;
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<Expr, ExprError> {
        let pos = self.here();
        let tok = self
            .toks
            .get(self.pos)
            .map(|t| t.token.clone())
            .ok_or(ExprError::Syntax { pos, msg: "unexpected end of expression".into() })?;
        self.pos += 1;
        match tok {
            Token::Number(v) => Ok(Expr::Number(v)),
            Token::Dirac { row, col, dim } => Ok(Expr::Operator(Operator::Dirac { row, col, dim })),
            Token::LParen => {
                let inner = self.sum()?;
                self.expect_rparen()?;
                Ok(Expr::Group(Box::new(inner)))
            }
            Token::Ident(name) => self.ident(name, pos),
            other => Err(ExprError::Syntax { pos, msg: format!("unexpected token {other:?}") }),
        }
    }

    fn ident(&mut self, name: String, pos: usize) -> Result<Expr, ExprError> {
        let constant = match name.as_str() {
            "pi" => Some(Constant::Pi),
            "hbar" => Some(Constant::Hbar),
            "kB" => Some(Constant::Kb),
            "wn" => Some(Constant::Wn),
            _ => None,
        };
        if let Some(c) = constant {
            return Ok(Expr::Constant(c));
        }
        let func = match name.as_str() {
            "sqrt" => Some(Function::Sqrt),
            "exp" => Some(Function::Exp),
            _ => None,
        };
        if let Some(f) = func {
            if !matches!(self.peek(), Some(Token::LParen)) {
                return Err(ExprError::Syntax { pos: self.here(), msg: format!("expected '(' after {name}") });
            }
            self.pos += 1;
            let arg = self.sum()?;
            self.expect_rparen()?;
            return Ok(Expr::Call(f, Box::new(arg)));
        }
        if name == "otimes" {
            return Err(ExprError::Syntax { pos, msg: "missing left operand of otimes".into() });
        }
        match Operator::from_ident(&name) {
            Some(op) => Ok(Expr::Operator(op?)),
            None => Err(ExprError::UnknownIdentifier(name)),
        }
    }

    fn expect_rparen(&mut self) -> Result<(), ExprError> {
        if matches!(self.peek(), Some(Token::RParen)) {
            self.pos += 1;
            Ok(())
        } else {
            Err(ExprError::Syntax { pos: self.here(), msg: "expected ')'".into() })
        }
    }
}

//! Scalar expressions of one free variable.
//!
//! Coefficients `a(z)`, `b(z)`, the initial datum `k(z)` and the boundary
//! data `h1(v)`, `h2(v)` are supplied as text and evaluated on the grid.
//!
//! Grammar (ASCII, whitespace ignored):
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := ('-' | '+') unary | power
//! power   := primary ('^' unary)?
//! primary := number | 'pi' | variable | func '(' expr ')' | '(' expr ')'
//! func    := sin | cos | exp | log | sqrt | abs
//! number  := digits ['.' digits] [('e' | 'E') ['+' | '-'] digits]
//! ```
//!
//! `^` is right-associative and binds tighter than unary minus, so `-z^2`
//! is `-(z^2)` and `2^-1` is `0.5`. The variable may be spelled `z`, `v`
//! or `x`, but a single expression may only use one of them.

use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExprError {
    #[error("syntax error at offset {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("domain error in `{node}` at {variable} = {input}: {message}")]
    Domain {
        node: String,
        variable: String,
        input: f64,
        message: String,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Log,
    Sqrt,
    Abs,
}

impl Func {
    pub const ALL: [Func; 6] = [
        Func::Sin,
        Func::Cos,
        Func::Exp,
        Func::Log,
        Func::Sqrt,
        Func::Abs,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
        }
    }

    fn from_name(name: &str) -> Option<Func> {
        Func::ALL.into_iter().find(|f| f.name() == name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    fn symbol(self) -> char {
        match self {
            BinOp::Add => '+',
            BinOp::Sub => '-',
            BinOp::Mul => '*',
            BinOp::Div => '/',
            BinOp::Pow => '^',
        }
    }
}

/// Expression tree. Leaves are constants or the free variable.
#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Const(f64),
    Var,
    Neg(Box<Node>),
    Call(Func, Box<Node>),
    Binary(BinOp, Box<Node>, Box<Node>),
}

/// A parsed expression together with the spelling of its variable.
#[derive(Debug, Clone, PartialEq)]
pub struct Expr {
    root: Node,
    variable: String,
}

const VARIABLE_NAMES: [&str; 3] = ["z", "v", "x"];

impl Expr {
    pub fn parse(text: &str) -> Result<Expr, ExprError> {
        Parser::new(text).parse()
    }

    pub fn constant(value: f64) -> Expr {
        Expr {
            root: Node::Const(value),
            variable: "z".to_string(),
        }
    }

    pub fn from_node(root: Node, variable: &str) -> Expr {
        Expr {
            root,
            variable: variable.to_string(),
        }
    }

    pub fn root(&self) -> &Node {
        &self.root
    }

    pub fn variable(&self) -> &str {
        &self.variable
    }

    /// True when the expression does not reference its variable.
    pub fn is_constant(&self) -> bool {
        !self.root.mentions_var()
    }

    pub fn eval(&self, x: f64) -> Result<f64, ExprError> {
        self.root
            .eval(x)
            .map_err(|(node, message)| ExprError::Domain {
                node: node.display(&self.variable).to_string(),
                variable: self.variable.clone(),
                input: x,
                message,
            })
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.root.display(&self.variable).fmt(f)
    }
}

impl std::str::FromStr for Expr {
    type Err = ExprError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Expr::parse(s)
    }
}

impl Node {
    fn mentions_var(&self) -> bool {
        match self {
            Node::Const(_) => false,
            Node::Var => true,
            Node::Neg(inner) | Node::Call(_, inner) => inner.mentions_var(),
            Node::Binary(_, lhs, rhs) => lhs.mentions_var() || rhs.mentions_var(),
        }
    }

    fn eval(&self, x: f64) -> Result<f64, (&Node, String)> {
        let value = match self {
            Node::Const(c) => *c,
            Node::Var => x,
            Node::Neg(inner) => -inner.eval(x)?,
            Node::Call(func, inner) => {
                let arg = inner.eval(x)?;
                match func {
                    Func::Log if arg <= 0.0 => {
                        return Err((self, format!("log of non-positive value {arg}")))
                    }
                    Func::Sqrt if arg < 0.0 => {
                        return Err((self, format!("sqrt of negative value {arg}")))
                    }
                    _ => {}
                }
                match func {
                    Func::Sin => arg.sin(),
                    Func::Cos => arg.cos(),
                    Func::Exp => arg.exp(),
                    Func::Log => arg.ln(),
                    Func::Sqrt => arg.sqrt(),
                    Func::Abs => arg.abs(),
                }
            }
            Node::Binary(op, lhs, rhs) => {
                let l = lhs.eval(x)?;
                let r = rhs.eval(x)?;
                match op {
                    BinOp::Add => l + r,
                    BinOp::Sub => l - r,
                    BinOp::Mul => l * r,
                    BinOp::Div => {
                        if r == 0.0 {
                            return Err((self, "division by zero".to_string()));
                        }
                        l / r
                    }
                    BinOp::Pow => l.powf(r),
                }
            }
        };
        if value.is_finite() {
            Ok(value)
        } else {
            Err((self, format!("non-finite result {value}")))
        }
    }

    fn display<'a>(&'a self, variable: &'a str) -> NodeDisplay<'a> {
        NodeDisplay {
            node: self,
            variable,
        }
    }
}

struct NodeDisplay<'a> {
    node: &'a Node,
    variable: &'a str,
}

// Binary nodes are always parenthesized; the output favours re-parsability
// over brevity.
impl fmt::Display for NodeDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.node {
            Node::Const(c) if *c < 0.0 || (*c == 0.0 && c.is_sign_negative()) => {
                write!(f, "(-{})", -c)
            }
            Node::Const(c) => write!(f, "{c}"),
            Node::Var => f.write_str(self.variable),
            Node::Neg(inner) => write!(f, "(-{})", inner.display(self.variable)),
            Node::Call(func, inner) => {
                write!(f, "{}({})", func.name(), inner.display(self.variable))
            }
            Node::Binary(op, lhs, rhs) => write!(
                f,
                "({} {} {})",
                lhs.display(self.variable),
                op.symbol(),
                rhs.display(self.variable)
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Number(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
    End,
}

struct Parser<'a> {
    text: &'a str,
    pos: usize,
    token: Token,
    token_start: usize,
    variable: Option<String>,
}

impl<'a> Parser<'a> {
    fn new(text: &'a str) -> Self {
        Parser {
            text,
            pos: 0,
            token: Token::End,
            token_start: 0,
            variable: None,
        }
    }

    fn error<T>(&self, offset: usize, message: impl Into<String>) -> Result<T, ExprError> {
        Err(ExprError::Syntax {
            offset,
            message: message.into(),
        })
    }

    fn parse(mut self) -> Result<Expr, ExprError> {
        if self.text.trim().is_empty() {
            return self.error(0, "empty expression");
        }
        self.advance()?;
        let root = self.expr()?;
        if self.token != Token::End {
            return self.error(self.token_start, "unexpected trailing input");
        }
        Ok(Expr {
            root,
            variable: self.variable.unwrap_or_else(|| "z".to_string()),
        })
    }

    fn advance(&mut self) -> Result<(), ExprError> {
        let bytes = self.text.as_bytes();
        while self.pos < bytes.len() && bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        self.token_start = self.pos;
        if self.pos >= bytes.len() {
            self.token = Token::End;
            return Ok(());
        }
        let c = bytes[self.pos];
        self.token = match c {
            b'+' | b'-' | b'*' | b'/' | b'^' => {
                self.pos += 1;
                Token::Op(c as char)
            }
            b'(' => {
                self.pos += 1;
                Token::LParen
            }
            b')' => {
                self.pos += 1;
                Token::RParen
            }
            b'0'..=b'9' | b'.' => self.number()?,
            c if c.is_ascii_alphabetic() || c == b'_' => {
                let start = self.pos;
                while self.pos < bytes.len()
                    && (bytes[self.pos].is_ascii_alphanumeric() || bytes[self.pos] == b'_')
                {
                    self.pos += 1;
                }
                Token::Ident(self.text[start..self.pos].to_string())
            }
            _ => {
                let ch = self.text[self.pos..].chars().next().unwrap_or('?');
                return self.error(self.pos, format!("unexpected character '{ch}'"));
            }
        };
        Ok(())
    }

    fn number(&mut self) -> Result<Token, ExprError> {
        let bytes = self.text.as_bytes();
        let start = self.pos;
        let digits = |pos: &mut usize| {
            let from = *pos;
            while *pos < bytes.len() && bytes[*pos].is_ascii_digit() {
                *pos += 1;
            }
            *pos - from
        };
        let mut count = digits(&mut self.pos);
        if self.pos < bytes.len() && bytes[self.pos] == b'.' {
            self.pos += 1;
            count += digits(&mut self.pos);
        }
        if count == 0 {
            return self.error(start, "malformed number");
        }
        if self.pos < bytes.len() && (bytes[self.pos] == b'e' || bytes[self.pos] == b'E') {
            let mut look = self.pos + 1;
            if look < bytes.len() && (bytes[look] == b'+' || bytes[look] == b'-') {
                look += 1;
            }
            if digits(&mut look) == 0 {
                return self.error(self.pos, "malformed exponent");
            }
            self.pos = look;
        }
        match self.text[start..self.pos].parse::<f64>() {
            Ok(value) if value.is_finite() => Ok(Token::Number(value)),
            _ => self.error(start, "number out of range"),
        }
    }

    fn expr(&mut self) -> Result<Node, ExprError> {
        let mut lhs = self.term()?;
        while let Token::Op(c @ ('+' | '-')) = self.token {
            self.advance()?;
            let rhs = self.term()?;
            let op = if c == '+' { BinOp::Add } else { BinOp::Sub };
            lhs = Node::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Node, ExprError> {
        let mut lhs = self.unary()?;
        while let Token::Op(c @ ('*' | '/')) = self.token {
            self.advance()?;
            let rhs = self.unary()?;
            let op = if c == '*' { BinOp::Mul } else { BinOp::Div };
            lhs = Node::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Node, ExprError> {
        match self.token {
            Token::Op('-') => {
                self.advance()?;
                Ok(Node::Neg(Box::new(self.unary()?)))
            }
            Token::Op('+') => {
                self.advance()?;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Node, ExprError> {
        let base = self.primary()?;
        if self.token == Token::Op('^') {
            self.advance()?;
            let exponent = self.unary()?;
            return Ok(Node::Binary(BinOp::Pow, Box::new(base), Box::new(exponent)));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Node, ExprError> {
        let start = self.token_start;
        match self.token.clone() {
            Token::Number(value) => {
                self.advance()?;
                Ok(Node::Const(value))
            }
            Token::LParen => {
                self.advance()?;
                let inner = self.expr()?;
                self.expect_rparen(start)?;
                Ok(inner)
            }
            Token::Ident(name) => {
                self.advance()?;
                if name == "pi" {
                    return Ok(Node::Const(std::f64::consts::PI));
                }
                if VARIABLE_NAMES.contains(&name.as_str()) {
                    match &self.variable {
                        Some(existing) if *existing != name => {
                            return self.error(
                                start,
                                format!("second variable '{name}' (already using '{existing}')"),
                            );
                        }
                        _ => self.variable = Some(name),
                    }
                    return Ok(Node::Var);
                }
                let Some(func) = Func::from_name(&name) else {
                    return self.error(start, format!("unknown identifier '{name}'"));
                };
                if self.token != Token::LParen {
                    return self.error(self.token_start, format!("expected '(' after '{name}'"));
                }
                let open = self.token_start;
                self.advance()?;
                let arg = self.expr()?;
                self.expect_rparen(open)?;
                Ok(Node::Call(func, Box::new(arg)))
            }
            Token::End => self.error(start, "unexpected end of input"),
            Token::RParen => self.error(start, "unexpected ')'"),
            Token::Op(c) => self.error(start, format!("unexpected operator '{c}'")),
        }
    }

    fn expect_rparen(&mut self, open: usize) -> Result<(), ExprError> {
        match self.token {
            Token::RParen => self.advance(),
            Token::End => self.error(open, "unbalanced '('"),
            _ => self.error(self.token_start, "expected ')'"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn eval(text: &str, x: f64) -> f64 {
        Expr::parse(text).unwrap().eval(x).unwrap()
    }

    fn syntax_offset(text: &str) -> usize {
        match Expr::parse(text) {
            Err(ExprError::Syntax { offset, .. }) => offset,
            other => panic!("expected syntax error for {text:?}, got {other:?}"),
        }
    }

    #[test]
    fn basic_values() {
        assert_eq!(eval("z+1", 0.5), 1.5);
        assert_eq!(eval("(z+1)^2", 1.0), 4.0);
        assert_eq!(eval("(z+1)^2", 0.25), 1.5625);
        assert_eq!(eval("exp(0)", 7.0), 1.0);
    }

    #[test]
    fn precedence() {
        assert_eq!(eval("2*z^2", 3.0), 18.0);
        assert_eq!(eval("-z^2", 3.0), -9.0);
        assert_eq!(eval("2^3^2", 0.0), 512.0);
        assert_eq!(eval("2^-1", 0.0), 0.5);
        assert_eq!(eval("1-2-3", 0.0), -4.0);
        assert_eq!(eval("8/4/2", 0.0), 1.0);
        assert_eq!(eval("1+2*3", 0.0), 7.0);
        assert_eq!(eval("-(z+1)*2", 1.0), -4.0);
    }

    #[test]
    fn numbers_and_functions() {
        assert_eq!(eval("1.5e2", 0.0), 150.0);
        assert_eq!(eval("2E-1", 0.0), 0.2);
        assert_eq!(eval(".5", 0.0), 0.5);
        assert!((eval("sin(pi/2)", 0.0) - 1.0).abs() < 1e-15);
        assert_eq!(eval("sqrt(abs(v))", -16.0), 4.0);
        assert_eq!(eval("log(exp(x))", 2.0), 2.0);
        assert!((eval("cos(0)", 0.0) - 1.0).abs() == 0.0);
    }

    #[test]
    fn syntax_errors_report_offsets() {
        assert_eq!(syntax_offset("z+"), 2);
        assert_eq!(syntax_offset("(z+1"), 0);
        assert_eq!(syntax_offset("z+1)"), 3);
        assert_eq!(syntax_offset("foo(z)"), 0);
        assert_eq!(syntax_offset("z * $"), 4);
        assert_eq!(syntax_offset("sin z"), 4);
        assert_eq!(syntax_offset("z + v"), 4);
        assert_eq!(syntax_offset("1e"), 1);
        assert_eq!(syntax_offset(""), 0);
        assert_eq!(syntax_offset("   "), 0);
    }

    #[test]
    fn domain_errors() {
        let e = Expr::parse("1/(z-1)").unwrap();
        match e.eval(1.0) {
            Err(ExprError::Domain { node, input, .. }) => {
                assert_eq!(input, 1.0);
                assert!(node.contains('/'), "{node}");
            }
            other => panic!("{other:?}"),
        }
        assert!(Expr::parse("log(z)").unwrap().eval(0.0).is_err());
        assert!(Expr::parse("sqrt(z)").unwrap().eval(-1.0).is_err());
        assert!(Expr::parse("exp(z)").unwrap().eval(1000.0).is_err());
        assert!(Expr::parse("z^0.5").unwrap().eval(-1.0).is_err());
    }

    #[test]
    fn variable_spelling_is_recorded() {
        assert_eq!(Expr::parse("v^2").unwrap().variable(), "v");
        assert_eq!(Expr::parse("3").unwrap().variable(), "z");
        assert!(Expr::parse("3*pi").unwrap().is_constant());
        assert!(!Expr::parse("0*z").unwrap().is_constant());
    }

    #[test]
    fn parsing_is_pure() {
        let a = Expr::parse("sin(z)*(1+z)^2 - 3/z").unwrap();
        let b = Expr::parse("sin(z)*(1+z)^2 - 3/z").unwrap();
        assert_eq!(a, b);
        assert_eq!(
            a.eval(0.7).unwrap().to_bits(),
            b.eval(0.7).unwrap().to_bits()
        );
    }

    fn arb_node() -> impl Strategy<Value = Node> {
        let leaf = prop_oneof![
            (-10.0f64..10.0).prop_map(Node::Const),
            (0u32..1000).prop_map(|k| Node::Const(k as f64 * 0.125)),
            Just(Node::Var),
        ];
        leaf.prop_recursive(5, 48, 2, |inner| {
            prop_oneof![
                inner.clone().prop_map(|n| Node::Neg(Box::new(n))),
                (prop::sample::select(Func::ALL.to_vec()), inner.clone())
                    .prop_map(|(f, n)| Node::Call(f, Box::new(n))),
                (
                    prop::sample::select(vec![
                        BinOp::Add,
                        BinOp::Sub,
                        BinOp::Mul,
                        BinOp::Div,
                        BinOp::Pow
                    ]),
                    inner.clone(),
                    inner
                )
                    .prop_map(|(op, l, r)| Node::Binary(
                        op,
                        Box::new(l),
                        Box::new(r)
                    )),
            ]
        })
    }

    proptest! {
        #[test]
        fn print_then_parse_preserves_values(node in arb_node(), xs in prop::collection::vec(-3.0f64..3.0, 100)) {
            let expr = Expr::from_node(node, "z");
            let reparsed = Expr::parse(&expr.to_string()).unwrap();
            for x in xs {
                match (expr.eval(x), reparsed.eval(x)) {
                    (Ok(a), Ok(b)) => prop_assert_eq!(a.to_bits(), b.to_bits()),
                    (Err(_), Err(_)) => {}
                    (a, b) => prop_assert!(false, "mismatch at {}: {:?} vs {:?}", x, a, b),
                }
            }
        }
    }
}

//! A deliberately tiny line-oriented language used by the bundled test
//! corpus: integer-only programs the injector can corrupt and the runner can
//! execute hermetically.
//!
//! ```text
//! let total = 0        # assignment
//! read n               # next integer from stdin
//! while n > 0          # blocks close with `end`
//!     let total = total + n
//!     let n = n - 1
//! end
//! if total % 2 == 0
//!     print total
//! else
//!     print 0 - total
//! end
//! ```
//!
//! Semantics: 64-bit wrapping integers; comparisons and `and`/`or`/`not`
//! yield 1 or 0; any nonzero value is true; `/` and `%` by zero are runtime
//! errors; `#` starts a comment. Output is collected in memory and returned
//! only on success, so a crashing program produces no output at all — the
//! runner distinguishes "aborted" from "answered wrongly" by exactly this.

use std::collections::HashMap;
use std::fmt;

use crate::profile::{load_profile, LexProfile};
use crate::tokenizer::{tokenize, Token, TokenKind};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MiniError {
    /// Line numbers are 1-based for human-readable runner output.
    Parse { line: usize, message: String },
    Runtime { line: usize, message: String },
    StepLimit,
}

impl fmt::Display for MiniError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MiniError::Parse { line, message } => write!(f, "parse error, line {line}: {message}"),
            MiniError::Runtime { line, message } => {
                write!(f, "runtime error, line {line}: {message}")
            }
            MiniError::StepLimit => write!(f, "step limit exceeded"),
        }
    }
}

impl std::error::Error for MiniError {}

#[derive(Debug, Clone)]
enum Expr {
    Num(i64),
    Var(String),
    Unary(UnOp, Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
}

#[derive(Debug, Clone, Copy)]
enum UnOp {
    Neg,
    Not,
}

#[derive(Debug, Clone, Copy)]
enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Rem,
    Eq,
    Ne,
    Lt,
    Gt,
    Le,
    Ge,
    And,
    Or,
}

#[derive(Debug, Clone)]
enum Stmt {
    Let(String, Expr),
    Print(Expr),
    Read(String),
    While(Expr, Vec<Spanned>),
    If(Expr, Vec<Spanned>, Vec<Spanned>),
}

#[derive(Debug, Clone)]
struct Spanned {
    line: usize,
    stmt: Stmt,
}

fn parse_err(line: usize, message: impl Into<String>) -> MiniError {
    MiniError::Parse {
        line,
        message: message.into(),
    }
}

/// Code tokens grouped per physical source line (comments dropped).
fn logical_lines(source: &str, profile: &LexProfile) -> Vec<(usize, Vec<Token>)> {
    let stream = tokenize(source, profile);
    let mut lines: Vec<(usize, Vec<Token>)> = Vec::new();
    for tok in stream.tokens() {
        if !matches!(tok.kind, TokenKind::Ident | TokenKind::Keyword | TokenKind::Number | TokenKind::Operator) {
            continue;
        }
        match lines.last_mut() {
            Some((line, toks)) if *line == tok.line + 1 => toks.push(tok.clone()),
            _ => lines.push((tok.line + 1, vec![tok.clone()])),
        }
    }
    lines
}

struct LineParser<'a> {
    line: usize,
    toks: &'a [Token],
    pos: usize,
}

impl<'a> LineParser<'a> {
    fn peek(&self) -> Option<&str> {
        self.toks.get(self.pos).map(|t| t.text.as_str())
    }

    fn bump(&mut self) -> Option<&'a Token> {
        let t = self.toks.get(self.pos);
        self.pos += 1;
        t
    }

    fn eat(&mut self, text: &str) -> bool {
        if self.peek() == Some(text) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect_ident(&mut self) -> Result<String, MiniError> {
        match self.bump() {
            Some(t) if t.kind == TokenKind::Ident => Ok(t.text.clone()),
            Some(t) => Err(parse_err(
                self.line,
                format!("expected a variable name, found `{}`", t.text),
            )),
            None => Err(parse_err(self.line, "expected a variable name")),
        }
    }

    fn finish(&self) -> Result<(), MiniError> {
        match self.toks.get(self.pos) {
            None => Ok(()),
            Some(t) => Err(parse_err(
                self.line,
                format!("unexpected `{}` after a complete statement", t.text),
            )),
        }
    }

    fn expr(&mut self) -> Result<Expr, MiniError> {
        let e = self.or_expr()?;
        Ok(e)
    }

    fn or_expr(&mut self) -> Result<Expr, MiniError> {
        let mut lhs = self.and_expr()?;
        while self.eat("or") {
            let rhs = self.and_expr()?;
            lhs = Expr::Binary(BinOp::Or, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn and_expr(&mut self) -> Result<Expr, MiniError> {
        let mut lhs = self.not_expr()?;
        while self.eat("and") {
            let rhs = self.not_expr()?;
            lhs = Expr::Binary(BinOp::And, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn not_expr(&mut self) -> Result<Expr, MiniError> {
        if self.eat("not") {
            let e = self.not_expr()?;
            return Ok(Expr::Unary(UnOp::Not, Box::new(e)));
        }
        self.comparison()
    }

    fn comparison(&mut self) -> Result<Expr, MiniError> {
        let lhs = self.additive()?;
        let op = match self.peek() {
            Some("==") => BinOp::Eq,
            Some("!=") => BinOp::Ne,
            Some("<") => BinOp::Lt,
            Some(">") => BinOp::Gt,
            Some("<=") => BinOp::Le,
            Some(">=") => BinOp::Ge,
            _ => return Ok(lhs),
        };
        self.pos += 1;
        let rhs = self.additive()?;
        Ok(Expr::Binary(op, Box::new(lhs), Box::new(rhs)))
    }

    fn additive(&mut self) -> Result<Expr, MiniError> {
        let mut lhs = self.multiplicative()?;
        loop {
            let op = match self.peek() {
                Some("+") => BinOp::Add,
                Some("-") => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.multiplicative()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn multiplicative(&mut self) -> Result<Expr, MiniError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Some("*") => BinOp::Mul,
                Some("/") => BinOp::Div,
                Some("%") => BinOp::Rem,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.unary()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn unary(&mut self) -> Result<Expr, MiniError> {
        if self.eat("-") {
            let e = self.unary()?;
            return Ok(Expr::Unary(UnOp::Neg, Box::new(e)));
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<Expr, MiniError> {
        let line = self.line;
        match self.bump() {
            Some(t) if t.kind == TokenKind::Number => t
                .text
                .parse::<i64>()
                .map(Expr::Num)
                .map_err(|_| parse_err(line, format!("`{}` is not a 64-bit integer", t.text))),
            Some(t) if t.kind == TokenKind::Ident => Ok(Expr::Var(t.text.clone())),
            Some(t) if t.text == "(" => {
                let e = self.expr()?;
                if !self.eat(")") {
                    return Err(parse_err(line, "missing closing parenthesis"));
                }
                Ok(e)
            }
            Some(t) => Err(parse_err(line, format!("unexpected `{}` in expression", t.text))),
            None => Err(parse_err(line, "expression ends abruptly")),
        }
    }
}

struct BlockParser {
    lines: Vec<(usize, Vec<Token>)>,
    pos: usize,
}

impl BlockParser {
    /// Parse statements until one of `closers` appears at block level.
    /// Returns the statements and which closer ended the block.
    fn block(&mut self, closers: &[&str]) -> Result<(Vec<Spanned>, Option<String>), MiniError> {
        let mut stmts = Vec::new();
        while self.pos < self.lines.len() {
            let (line, toks) = &self.lines[self.pos];
            let line = *line;
            let head = toks[0].text.clone();
            if closers.contains(&head.as_str()) {
                if toks.len() > 1 {
                    return Err(parse_err(line, format!("`{head}` takes nothing after it")));
                }
                self.pos += 1;
                return Ok((stmts, Some(head)));
            }
            self.pos += 1;
            let mut lp = LineParser {
                line,
                toks,
                pos: 0,
            };
            let stmt = match head.as_str() {
                "let" => {
                    lp.pos = 1;
                    let name = lp.expect_ident()?;
                    if !lp.eat("=") {
                        return Err(parse_err(line, "expected `=` after the variable name"));
                    }
                    let e = lp.expr()?;
                    lp.finish()?;
                    Stmt::Let(name, e)
                }
                "print" => {
                    lp.pos = 1;
                    let e = lp.expr()?;
                    lp.finish()?;
                    Stmt::Print(e)
                }
                "read" => {
                    lp.pos = 1;
                    let name = lp.expect_ident()?;
                    lp.finish()?;
                    Stmt::Read(name)
                }
                "while" => {
                    lp.pos = 1;
                    let cond = lp.expr()?;
                    lp.finish()?;
                    let (body, closer) = self.block(&["end"])?;
                    if closer.is_none() {
                        return Err(parse_err(line, "`while` block never reaches `end`"));
                    }
                    Stmt::While(cond, body)
                }
                "if" => {
                    lp.pos = 1;
                    let cond = lp.expr()?;
                    lp.finish()?;
                    let (then, closer) = self.block(&["else", "end"])?;
                    match closer.as_deref() {
                        Some("end") => Stmt::If(cond, then, Vec::new()),
                        Some("else") => {
                            let (els, closer) = self.block(&["end"])?;
                            if closer.is_none() {
                                return Err(parse_err(line, "`else` block never reaches `end`"));
                            }
                            Stmt::If(cond, then, els)
                        }
                        _ => return Err(parse_err(line, "`if` block never reaches `end`")),
                    }
                }
                "end" | "else" => {
                    return Err(parse_err(line, format!("`{head}` without an open block")))
                }
                other => {
                    return Err(parse_err(
                        line,
                        format!("a statement cannot start with `{other}`"),
                    ))
                }
            };
            stmts.push(Spanned { line, stmt });
        }
        Ok((stmts, None))
    }
}

fn parse(source: &str) -> Result<Vec<Spanned>, MiniError> {
    let profile = load_profile("mini").expect("builtin mini profile");
    let lines = logical_lines(source, &profile);
    let mut parser = BlockParser { lines, pos: 0 };
    let (stmts, closer) = parser.block(&[])?;
    debug_assert!(closer.is_none());
    Ok(stmts)
}

/// Parse without running — the runner's syntax gate.
pub fn check(source: &str) -> Result<(), MiniError> {
    parse(source).map(|_| ())
}

struct Exec<'a> {
    vars: HashMap<String, i64>,
    inputs: std::vec::IntoIter<&'a str>,
    out: String,
    steps: u64,
    max_steps: Option<u64>,
}

impl<'a> Exec<'a> {
    fn tick(&mut self) -> Result<(), MiniError> {
        self.steps += 1;
        match self.max_steps {
            Some(max) if self.steps > max => Err(MiniError::StepLimit),
            _ => Ok(()),
        }
    }

    fn eval(&self, e: &Expr, line: usize) -> Result<i64, MiniError> {
        let rt = |message: String| MiniError::Runtime { line, message };
        Ok(match e {
            Expr::Num(v) => *v,
            Expr::Var(name) => *self
                .vars
                .get(name)
                .ok_or_else(|| rt(format!("variable `{name}` used before `let` or `read`")))?,
            Expr::Unary(UnOp::Neg, e) => self.eval(e, line)?.wrapping_neg(),
            Expr::Unary(UnOp::Not, e) => (self.eval(e, line)? == 0) as i64,
            Expr::Binary(op, l, r) => {
                // `and`/`or` short-circuit so guards like `b != 0 and a / b`
                // behave as written
                match op {
                    BinOp::And => {
                        if self.eval(l, line)? == 0 {
                            return Ok(0);
                        }
                        return Ok((self.eval(r, line)? != 0) as i64);
                    }
                    BinOp::Or => {
                        if self.eval(l, line)? != 0 {
                            return Ok(1);
                        }
                        return Ok((self.eval(r, line)? != 0) as i64);
                    }
                    _ => {}
                }
                let a = self.eval(l, line)?;
                let b = self.eval(r, line)?;
                match op {
                    BinOp::Add => a.wrapping_add(b),
                    BinOp::Sub => a.wrapping_sub(b),
                    BinOp::Mul => a.wrapping_mul(b),
                    BinOp::Div => {
                        if b == 0 {
                            return Err(rt("division by zero".into()));
                        }
                        a.wrapping_div(b)
                    }
                    BinOp::Rem => {
                        if b == 0 {
                            return Err(rt("remainder by zero".into()));
                        }
                        a.wrapping_rem(b)
                    }
                    BinOp::Eq => (a == b) as i64,
                    BinOp::Ne => (a != b) as i64,
                    BinOp::Lt => (a < b) as i64,
                    BinOp::Gt => (a > b) as i64,
                    BinOp::Le => (a <= b) as i64,
                    BinOp::Ge => (a >= b) as i64,
                    BinOp::And | BinOp::Or => unreachable!("handled above"),
                }
            }
        })
    }

    fn run_block(&mut self, stmts: &[Spanned]) -> Result<(), MiniError> {
        for s in stmts {
            self.tick()?;
            match &s.stmt {
                Stmt::Let(name, e) => {
                    let v = self.eval(e, s.line)?;
                    self.vars.insert(name.clone(), v);
                }
                Stmt::Print(e) => {
                    let v = self.eval(e, s.line)?;
                    self.out.push_str(&v.to_string());
                    self.out.push('\n');
                }
                Stmt::Read(name) => {
                    let raw = self.inputs.next().ok_or_else(|| MiniError::Runtime {
                        line: s.line,
                        message: "input exhausted".into(),
                    })?;
                    let v: i64 = raw.parse().map_err(|_| MiniError::Runtime {
                        line: s.line,
                        message: format!("`{raw}` is not an integer"),
                    })?;
                    self.vars.insert(name.clone(), v);
                }
                Stmt::While(cond, body) => loop {
                    self.tick()?;
                    if self.eval(cond, s.line)? == 0 {
                        break;
                    }
                    self.run_block(body)?;
                },
                Stmt::If(cond, then, els) => {
                    if self.eval(cond, s.line)? != 0 {
                        self.run_block(then)?;
                    } else {
                        self.run_block(els)?;
                    }
                }
            }
        }
        Ok(())
    }
}

/// Run a program against whitespace-separated integer input. Output is
/// all-or-nothing: an error yields no partial output. `max_steps: None`
/// means no limit — infinite loops are then the caller's problem (the
/// injector's runner handles them with a wall-clock timeout).
pub fn run(source: &str, input: &str, max_steps: Option<u64>) -> Result<String, MiniError> {
    let program = parse(source)?;
    let mut exec = Exec {
        vars: HashMap::new(),
        inputs: input.split_whitespace().collect::<Vec<_>>().into_iter(),
        out: String::new(),
        steps: 0,
        max_steps,
    };
    exec.run_block(&program)?;
    Ok(exec.out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_ok(source: &str, input: &str) -> String {
        run(source, input, Some(1_000_000)).unwrap()
    }

    #[test]
    fn arithmetic_precedence_and_parens() {
        assert_eq!(run_ok("print 2 + 3 * 4", ""), "14\n");
        assert_eq!(run_ok("print (2 + 3) * 4", ""), "20\n");
        assert_eq!(run_ok("print 7 / 2", ""), "3\n");
        assert_eq!(run_ok("print 7 % 3", ""), "1\n");
        assert_eq!(run_ok("print - 3 + 10", ""), "7\n");
        assert_eq!(run_ok("print 10 - 2 - 3", ""), "5\n");
    }

    #[test]
    fn comparisons_and_logic_yield_bits() {
        assert_eq!(run_ok("print 3 > 2", ""), "1\n");
        assert_eq!(run_ok("print 3 < 2", ""), "0\n");
        assert_eq!(run_ok("print 2 == 2 and 1 < 3", ""), "1\n");
        assert_eq!(run_ok("print 0 or 5", ""), "1\n");
        assert_eq!(run_ok("print not 7", ""), "0\n");
        assert_eq!(run_ok("print not 0", ""), "1\n");
        // short-circuit: the division never runs
        assert_eq!(run_ok("let b = 0\nprint b != 0 and 1 / b > 0", ""), "0\n");
    }

    #[test]
    fn integers_wrap_like_the_machine() {
        assert_eq!(
            run_ok("print 9223372036854775807 + 1", ""),
            format!("{}\n", i64::MIN)
        );
    }

    #[test]
    fn while_and_if_control_flow() {
        let src = "\
let n = 5
let total = 0
while n > 0
let total = total + n
let n = n - 1
end
if total == 15
print total
else
print 0 - total
end
";
        assert_eq!(run_ok(src, ""), "15\n");
    }

    #[test]
    fn read_consumes_stdin_tokens() {
        let src = "read a\nread b\nprint a * b";
        assert_eq!(run_ok(src, "6 7"), "42\n");
        assert_eq!(run_ok(src, "6\n7\n"), "42\n");
        match run(src, "6", Some(1000)).unwrap_err() {
            MiniError::Runtime { line, message } => {
                assert_eq!(line, 2);
                assert!(message.contains("input exhausted"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn runtime_errors_abort_without_output() {
        let err = run("print 1\nprint 1 / 0", "", Some(1000)).unwrap_err();
        assert!(matches!(err, MiniError::Runtime { line: 2, .. }));
        let err = run("print x", "", Some(1000)).unwrap_err();
        assert!(matches!(err, MiniError::Runtime { line: 1, .. }));
    }

    #[test]
    fn parse_errors_name_the_line() {
        for (src, want_line) in [
            ("let = 5", 1),
            ("print 1\nfoo bar", 2),
            ("while 1\nprint 1", 1),
            ("end", 1),
            ("else", 1),
            ("print 1 2", 1),
            // unterminated blocks report the opening line
            ("if 1\nprint 1\nelse\nprint 2", 1),
            ("let x = (1 + 2", 1),
            ("let x = 99999999999999999999", 1),
        ] {
            match check(src).unwrap_err() {
                MiniError::Parse { line, .. } => assert_eq!(line, want_line, "src: {src:?}"),
                other => panic!("expected parse error for {src:?}, got {other:?}"),
            }
        }
    }

    #[test]
    fn step_limit_stops_infinite_loops() {
        assert_eq!(
            run("while 1\nend", "", Some(10_000)).unwrap_err(),
            MiniError::StepLimit
        );
        // even with an empty body the condition check itself ticks
        assert_eq!(
            run("let i = 0\nwhile i == 0\nlet i = 0\nend", "", Some(10_000)).unwrap_err(),
            MiniError::StepLimit
        );
    }

    #[test]
    fn comments_and_blank_lines_are_ignored() {
        let src = "# leading comment\n\nlet x = 1 # trailing\n\nprint x\n# done\n";
        assert_eq!(run_ok(src, ""), "1\n");
    }

    #[test]
    fn check_accepts_without_running() {
        // would loop forever if executed; check only parses
        check("while 1\nend").unwrap();
    }
}

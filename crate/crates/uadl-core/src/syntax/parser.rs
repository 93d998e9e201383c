//! Recursive-descent parser for the model grammar.

use super::ast::*;
use super::labels::LabelAllocator;
use num_bigint::BigInt;
use num_traits::{One, Zero};
use std::collections::{BTreeSet, HashMap};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParseError {
    #[error("{line}:{col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("duplicate explicit label @{0}")]
    DuplicateLabel(String),
    #[error("arity mismatch for {name}: used with {found} and {expected} arguments")]
    Arity {
        name: String,
        expected: usize,
        found: usize,
    },
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Num(Rat),
    Sym(&'static str),
    At(String),
    Eof,
}

#[derive(Clone, Debug)]
struct Spanned {
    tok: Tok,
    line: usize,
    col: usize,
}

const SYMBOLS: &[&str] = &[
    "<->", "->", ":=", "&&", "||", "++", ">=", "<=", "(", ")", "[", "]", "{", "}", ",", ";", "'",
    "=", ">", "<", "!", "+", "-", "*", "/", "^", "?", ".", "&",
];

fn lex(text: &str) -> Result<Vec<Spanned>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0, 1, 1);
    let err = |line, col, msg: String| ParseError::Syntax { line, col, msg };
    while i < chars.len() {
        let c = chars[i];
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let (sl, sc) = (line, col);
        if c.is_ascii_alphabetic() || c == '_' || c == '@' {
            let start = if c == '@' { i + 1 } else { i };
            let mut j = start;
            while j < chars.len() && (chars[j].is_ascii_alphanumeric() || chars[j] == '_') {
                j += 1;
            }
            let word: String = chars[start..j].iter().collect();
            if c == '@' {
                if word.is_empty() {
                    return Err(err(sl, sc, "empty label annotation".into()));
                }
                out.push(Spanned {
                    tok: Tok::At(word),
                    line: sl,
                    col: sc,
                });
            } else {
                out.push(Spanned {
                    tok: Tok::Ident(word),
                    line: sl,
                    col: sc,
                });
            }
            col += j - i;
            i = j;
            continue;
        }
        if c.is_ascii_digit() {
            let mut j = i;
            while j < chars.len() && chars[j].is_ascii_digit() {
                j += 1;
            }
            let int: String = chars[i..j].iter().collect();
            let mut value = Rat::from_integer(int.parse::<BigInt>().unwrap());
            if j + 1 < chars.len() && chars[j] == '.' && chars[j + 1].is_ascii_digit() {
                let mut k = j + 1;
                while k < chars.len() && chars[k].is_ascii_digit() {
                    k += 1;
                }
                let frac: String = chars[j + 1..k].iter().collect();
                let scale = num_traits::pow(BigInt::from(10), frac.len());
                value += Rat::new(frac.parse::<BigInt>().unwrap(), scale);
                j = k;
            }
            out.push(Spanned {
                tok: Tok::Num(value),
                line: sl,
                col: sc,
            });
            col += j - i;
            i = j;
            continue;
        }
        let rest: String = chars[i..chars.len().min(i + 3)].iter().collect();
        match SYMBOLS.iter().find(|s| rest.starts_with(**s)) {
            Some(s) => {
                out.push(Spanned {
                    tok: Tok::Sym(s),
                    line: sl,
                    col: sc,
                });
                i += s.len();
                col += s.len();
            }
            None => return Err(err(sl, sc, format!("unexpected character '{c}'"))),
        }
    }
    out.push(Spanned {
        tok: Tok::Eof,
        line,
        col,
    });
    Ok(out)
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
    explicit: Vec<String>,
    arity: HashMap<String, usize>,
}

type PResult<T> = Result<T, ParseError>;

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        let i = (self.pos + k).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn is_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Sym(x) if *x == s)
    }

    fn eat(&mut self, s: &str) -> bool {
        if self.is_sym(s) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn error<T>(&self, msg: impl Into<String>) -> PResult<T> {
        let s = &self.toks[self.pos];
        Err(ParseError::Syntax {
            line: s.line,
            col: s.col,
            msg: msg.into(),
        })
    }

    fn expect(&mut self, s: &str) -> PResult<()> {
        if self.eat(s) {
            Ok(())
        } else {
            self.error(format!("expected '{s}', found {}", describe(self.peek())))
        }
    }

    fn ident(&mut self) -> PResult<String> {
        match self.peek().clone() {
            Tok::Ident(w) if !is_keyword(&w) => {
                self.bump();
                Ok(w)
            }
            t => self.error(format!("expected identifier, found {}", describe(&t))),
        }
    }

    fn check_arity(&mut self, name: &str, n: usize) -> PResult<()> {
        match self.arity.get(name) {
            Some(&m) if m != n => Err(ParseError::Arity {
                name: name.to_string(),
                expected: m,
                found: n,
            }),
            _ => {
                self.arity.insert(name.to_string(), n);
                Ok(())
            }
        }
    }

    fn annotations(&mut self) -> Vec<Label> {
        let mut out = Vec::new();
        while let Tok::At(name) = self.peek().clone() {
            self.bump();
            self.explicit.push(name.clone());
            out.push(Label::new(&name, Origin::Model));
        }
        out
    }

    // formulas, loosest first

    fn formula(&mut self) -> PResult<Fml> {
        let lhs = self.implication()?;
        if self.eat("<->") {
            let rhs = self.implication()?;
            return Ok(Fml::equiv(lhs, rhs));
        }
        Ok(lhs)
    }

    fn implication(&mut self) -> PResult<Fml> {
        let lhs = self.disjunction()?;
        if self.eat("->") {
            let rhs = self.implication()?;
            return Ok(Fml::imp(lhs, rhs));
        }
        Ok(lhs)
    }

    fn disjunction(&mut self) -> PResult<Fml> {
        let mut lhs = self.conjunction()?;
        while self.eat("||") {
            let rhs = self.conjunction()?;
            lhs = Fml::or(lhs, rhs);
        }
        Ok(lhs)
    }

    fn conjunction(&mut self) -> PResult<Fml> {
        let mut lhs = self.unary()?;
        while self.eat("&&") {
            let rhs = self.unary()?;
            lhs = Fml::and(lhs, rhs);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> PResult<Fml> {
        if self.eat("!") {
            return Ok(Fml::not(self.unary()?));
        }
        if let Tok::Ident(w) = self.peek().clone() {
            if w == "forall" || w == "exists" {
                self.bump();
                let x = self.ident()?;
                self.expect(".")?;
                let body = self.unary()?;
                return Ok(if w == "forall" {
                    Fml::forall(&x, body)
                } else {
                    Fml::exists(&x, body)
                });
            }
        }
        if self.eat("[") {
            let p = self.program()?;
            self.expect("]")?;
            return Ok(Fml::boxed(p, self.unary()?));
        }
        if self.is_sym("<") {
            self.bump();
            let p = self.program()?;
            self.expect(">")?;
            return Ok(Fml::diamond(p, self.unary()?));
        }
        if self.is_sym("(") && !matches!(self.peek_at(1), Tok::At(_)) {
            let save = self.pos;
            let saved_explicit = self.explicit.len();
            if let Ok(a) = self.atom(Vec::new()) {
                return Ok(a);
            }
            self.pos = save;
            self.explicit.truncate(saved_explicit);
            self.bump();
            let f = self.formula()?;
            self.expect(")")?;
            return Ok(f);
        }
        if self.is_sym("(") {
            self.bump();
            let f = self.formula()?;
            self.expect(")")?;
            return Ok(f);
        }
        let labels = self.annotations();
        self.atom(labels)
    }

    fn atom(&mut self, mut labels: Vec<Label>) -> PResult<Fml> {
        if let Tok::Ident(w) = self.peek().clone() {
            if w == "true" || w == "false" {
                self.bump();
                let a = if w == "true" { Atom::True } else { Atom::False };
                return Ok(Fml::atom(labels, a));
            }
        }
        let lhs = self.term()?;
        let op = match self.peek() {
            Tok::Sym("=") => CmpOp::Eq,
            Tok::Sym(">=") => CmpOp::Ge,
            Tok::Sym(">") => CmpOp::Gt,
            Tok::Sym("<=") => CmpOp::Le,
            Tok::Sym("<") => CmpOp::Lt,
            _ => {
                if let Term::Func(name, args) = lhs {
                    if name == "sqrt" {
                        return self.error("sqrt used as a predicate");
                    }
                    return Ok(Fml::atom(labels, Atom::Pred(name, args)));
                }
                return self.error(format!(
                    "expected comparison operator, found {}",
                    describe(self.peek())
                ));
            }
        };
        self.bump();
        labels.extend(self.annotations());
        let rhs = self.term()?;
        Ok(Fml::atom(labels, Atom::Cmp(op, lhs, rhs)))
    }

    // programs, loosest first

    fn program(&mut self) -> PResult<Prog> {
        let lhs = self.sequence()?;
        if self.eat("++") {
            let rhs = self.program()?;
            return Ok(Prog::choice(lhs, rhs));
        }
        Ok(lhs)
    }

    fn sequence(&mut self) -> PResult<Prog> {
        let first = self.postfix()?;
        let mut items = vec![first];
        loop {
            self.eat(";");
            if !self.starts_program() {
                break;
            }
            items.push(self.postfix()?);
        }
        let mut it = items.into_iter().rev();
        let mut acc = it.next().unwrap();
        for p in it {
            acc = Prog::seq(p, acc);
        }
        Ok(acc)
    }

    fn starts_program(&self) -> bool {
        match self.peek() {
            Tok::Sym("(") | Tok::Sym("{") | Tok::Sym("?") | Tok::At(_) => true,
            Tok::Ident(w) => !is_keyword(w),
            _ => false,
        }
    }

    fn postfix(&mut self) -> PResult<Prog> {
        let mut p = self.primary_program()?;
        while self.eat("*") {
            p = Prog::Loop(Box::new(p));
        }
        Ok(p)
    }

    fn primary_program(&mut self) -> PResult<Prog> {
        if self.eat("(") {
            let p = self.program()?;
            self.expect(")")?;
            return Ok(p);
        }
        if self.is_sym("{") {
            let mut k = 1;
            while matches!(self.peek_at(k), Tok::At(_)) {
                k += 1;
            }
            let is_ode = matches!(
                (self.peek_at(k), self.peek_at(k + 1), self.peek_at(k + 2)),
                (Tok::Ident(_), Tok::Sym("'"), Tok::Sym("="))
            );
            self.bump();
            if is_ode {
                return self.ode();
            }
            let p = self.program()?;
            self.expect("}")?;
            return Ok(p);
        }
        if self.eat("?") {
            return Ok(Prog::test(self.formula()?));
        }
        let labels = self.annotations();
        let x = self.ident()?;
        let prime = self.eat("'");
        self.expect(":=")?;
        if self.eat("*") {
            if prime {
                return self.error("nondeterministic assignment to a differential symbol");
            }
            return Ok(Prog::Atom(LAtom::new(labels, Atom::AssignAny(x))));
        }
        let e = self.term()?;
        let target = VarRef { name: x, prime };
        Ok(Prog::Atom(LAtom::new(labels, Atom::Assign(target, e))))
    }

    fn ode(&mut self) -> PResult<Prog> {
        let mut eqs = Vec::new();
        loop {
            let labels = self.annotations();
            let x = self.ident()?;
            self.expect("'")?;
            self.expect("=")?;
            let e = self.term()?;
            eqs.push(LAtom::new(labels, Atom::OdeEq(x, e)));
            if !self.eat(",") {
                break;
            }
        }
        let domain = if self.eat("&") {
            Some(Box::new(self.formula()?))
        } else {
            None
        };
        self.expect("}")?;
        Ok(Prog::Ode(Ode { eqs, domain }))
    }

    // terms

    fn term(&mut self) -> PResult<Term> {
        let mut lhs = self.signed()?;
        loop {
            if self.eat("+") {
                let rhs = self.signed()?;
                lhs = Term::add(lhs, rhs);
            } else if self.is_sym("-") {
                self.bump();
                let rhs = self.signed()?;
                lhs = Term::sub(lhs, rhs);
            } else {
                return Ok(lhs);
            }
        }
    }

    /// A product, optionally preceded by unary minus which scopes over it.
    fn signed(&mut self) -> PResult<Term> {
        if self.eat("-") {
            return Ok(Term::neg(self.signed()?));
        }
        self.product()
    }

    fn product(&mut self) -> PResult<Term> {
        let mut lhs = self.power()?;
        loop {
            if self.is_sym("*") && self.starts_factor_at(1) {
                self.bump();
                let rhs = self.power()?;
                lhs = Term::mul(lhs, rhs);
            } else if self.eat("/") {
                let rhs = self.power()?;
                lhs = Term::div(lhs, rhs);
            } else {
                return Ok(lhs);
            }
        }
    }

    fn starts_factor_at(&self, k: usize) -> bool {
        match self.peek_at(k) {
            Tok::Num(_) | Tok::Sym("(") | Tok::Sym("-") => true,
            Tok::Ident(w) => !is_keyword(w),
            _ => false,
        }
    }

    fn power(&mut self) -> PResult<Term> {
        let base = self.factor()?;
        if self.eat("^") {
            return match self.bump() {
                Tok::Num(n) if n.is_integer() && n >= Rat::zero() => {
                    match u32::try_from(n.to_integer()) {
                        Ok(e) => Ok(Term::Pow(Box::new(base), e)),
                        Err(_) => self.error("exponent too large"),
                    }
                }
                _ => self.error("exponent must be a natural number literal"),
            };
        }
        Ok(base)
    }

    fn factor(&mut self) -> PResult<Term> {
        match self.peek().clone() {
            Tok::Num(n) => {
                self.bump();
                // a literal fraction is one constant
                if self.is_sym("/") {
                    if let Tok::Num(d) = self.peek_at(1).clone() {
                        if !d.is_zero() && !matches!(self.peek_at(2), Tok::Sym("^")) {
                            self.bump();
                            self.bump();
                            return Ok(Term::Const(n / d));
                        }
                    }
                }
                Ok(Term::Const(n))
            }
            Tok::Sym("-") => {
                self.bump();
                Ok(Term::neg(self.power()?))
            }
            Tok::Sym("(") => {
                self.bump();
                let t = self.term()?;
                self.expect(")")?;
                if self.eat("'") {
                    return Ok(differential_of(t));
                }
                Ok(t)
            }
            Tok::Ident(w) if !is_keyword(&w) => {
                self.bump();
                if self.eat("(") {
                    let mut args = Vec::new();
                    if !self.is_sym(")") {
                        loop {
                            args.push(self.term()?);
                            if !self.eat(",") {
                                break;
                            }
                        }
                    }
                    self.expect(")")?;
                    self.check_arity(&w, args.len())?;
                    return Ok(Term::Func(w, args));
                }
                if self.is_sym("'") && !matches!(self.peek_at(1), Tok::Sym(":=")) {
                    self.bump();
                    return Ok(Term::DiffSym(w));
                }
                Ok(Term::Var(w))
            }
            t => self.error(format!("expected term, found {}", describe(&t))),
        }
    }
}

fn differential_of(t: Term) -> Term {
    match t {
        Term::Var(x) => Term::DiffSym(x),
        t => Term::Diff(Box::new(t)),
    }
}

fn is_keyword(w: &str) -> bool {
    matches!(w, "true" | "false" | "forall" | "exists")
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Ident(w) => format!("'{w}'"),
        Tok::Num(n) => format!("'{n}'"),
        Tok::Sym(s) => format!("'{s}'"),
        Tok::At(l) => format!("'@{l}'"),
        Tok::Eof => "end of input".to_string(),
    }
}

/// Parses formula text, keeping explicit labels and leaving other atoms
/// unlabeled.
pub fn parse_fml_raw(text: &str) -> Result<(Fml, Vec<String>), ParseError> {
    let mut p = Parser {
        toks: lex(text)?,
        pos: 0,
        explicit: Vec::new(),
        arity: HashMap::from([("sqrt".to_string(), 1)]),
    };
    let f = p.formula()?;
    if *p.peek() != Tok::Eof {
        return p.error(format!("unexpected {}", describe(p.peek())));
    }
    Ok((f, p.explicit))
}

/// Parses an unlabeled formula, for proof-script parameters.
pub fn parse_fml(text: &str) -> Result<Fml, ParseError> {
    let (f, _) = parse_fml_raw(text)?;
    Ok(f.unlabel())
}

pub fn parse_term(text: &str) -> Result<Term, ParseError> {
    let mut p = Parser {
        toks: lex(text)?,
        pos: 0,
        explicit: Vec::new(),
        arity: HashMap::from([("sqrt".to_string(), 1)]),
    };
    let t = p.term()?;
    if *p.peek() != Tok::Eof {
        return p.error(format!("unexpected {}", describe(p.peek())));
    }
    Ok(t)
}

/// Parses a single atom (as used in witness and candidate files). Accepts
/// assignments `x := e` as well as formula atoms.
pub fn parse_atom(text: &str) -> Result<Atom, ParseError> {
    let mut p = Parser {
        toks: lex(text)?,
        pos: 0,
        explicit: Vec::new(),
        arity: HashMap::from([("sqrt".to_string(), 1)]),
    };
    let is_assign = matches!(p.peek_at(1), Tok::Sym(":="))
        || matches!((p.peek_at(1), p.peek_at(2)), (Tok::Sym("'"), Tok::Sym(":=")));
    let atom = if is_assign {
        match p.primary_program()? {
            Prog::Atom(a) => a.atom,
            _ => unreachable!(),
        }
    } else {
        match p.atom(Vec::new())? {
            Fml::Atom(a) => a.atom,
            _ => unreachable!(),
        }
    };
    if *p.peek() != Tok::Eof {
        return p.error(format!("unexpected {}", describe(p.peek())));
    }
    Ok(atom)
}

/// Parses a model. Explicit `@name` labels are kept; every other atom gets
/// a fresh model label from `alloc`.
pub fn parse_model_with(text: &str, alloc: &mut LabelAllocator) -> Result<Fml, ParseError> {
    let (f, explicit) = parse_fml_raw(text)?;
    let mut seen = BTreeSet::new();
    for name in &explicit {
        if !seen.insert(name.clone()) || !alloc.reserve(name) {
            return Err(ParseError::DuplicateLabel(name.clone()));
        }
    }
    Ok(crate::syntax::labels::assign_missing(&f, alloc))
}

pub fn parse_model(text: &str) -> Result<(Fml, LabelAllocator), ParseError> {
    let mut alloc = LabelAllocator::new();
    let f = parse_model_with(text, &mut alloc)?;
    Ok((f, alloc))
}

impl Term {
    pub fn one() -> Term {
        Term::Const(Rat::one())
    }
}

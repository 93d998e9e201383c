//! Concrete syntax printing. The output re-parses to the same tree.

use super::ast::*;
use num_traits::{One, Signed};
use std::fmt::Write;

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Ctx {
    Top,
    AddRight,
    MulLeft,
    MulRight,
    PowBase,
}

fn is_neg(t: &Term) -> Option<&Term> {
    match t {
        Term::Sub(a, b) if a.is_zero() => Some(b),
        _ => None,
    }
}

fn const_text(c: &Rat, ctx: Ctx) -> String {
    let body = if c.denom().is_one() {
        c.numer().abs().to_string()
    } else {
        format!("{}/{}", c.numer().abs(), c.denom())
    };
    if c.is_negative() {
        format!("(-{body})")
    } else if !c.denom().is_one() && ctx >= Ctx::MulRight {
        format!("({body})")
    } else {
        body
    }
}

fn term_into(t: &Term, ctx: Ctx, out: &mut String) {
    let paren = |need: bool, out: &mut String, f: &mut dyn FnMut(&mut String)| {
        if need {
            out.push('(');
        }
        f(out);
        if need {
            out.push(')');
        }
    };
    if let Some(e) = is_neg(t) {
        paren(ctx >= Ctx::MulLeft, out, &mut |o| {
            o.push('-');
            term_into(e, Ctx::MulLeft, o);
        });
        return;
    }
    match t {
        Term::Var(x) => out.push_str(x),
        Term::Const(c) => out.push_str(&const_text(c, ctx)),
        Term::DiffSym(x) => {
            out.push_str(x);
            out.push('\'');
        }
        Term::Diff(e) => {
            out.push('(');
            term_into(e, Ctx::Top, out);
            out.push_str(")'");
        }
        Term::Add(a, b) | Term::Sub(a, b) => {
            let op = if matches!(t, Term::Add(..)) { " + " } else { " - " };
            paren(ctx >= Ctx::AddRight, out, &mut |o| {
                term_into(a, Ctx::Top, o);
                o.push_str(op);
                term_into(b, Ctx::AddRight, o);
            });
        }
        Term::Mul(a, b) | Term::Div(a, b) => {
            let op = if matches!(t, Term::Mul(..)) { "*" } else { "/" };
            paren(ctx >= Ctx::MulRight, out, &mut |o| {
                term_into(a, Ctx::MulLeft, o);
                o.push_str(op);
                term_into(b, Ctx::MulRight, o);
            });
        }
        Term::Pow(a, n) => {
            paren(ctx >= Ctx::PowBase, out, &mut |o| {
                term_into(a, Ctx::PowBase, o);
                let _ = write!(o, "^{n}");
            });
        }
        Term::Func(f, args) => {
            out.push_str(f);
            out.push('(');
            for (i, a) in args.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                term_into(a, Ctx::Top, out);
            }
            out.push(')');
        }
    }
}

pub fn print_term(t: &Term) -> String {
    let mut s = String::new();
    term_into(t, Ctx::Top, &mut s);
    s
}

pub fn print_atom(a: &Atom) -> String {
    match a {
        Atom::True => "true".into(),
        Atom::False => "false".into(),
        Atom::Cmp(op, l, r) => format!("{} {} {}", print_term(l), op.symbol(), print_term(r)),
        Atom::Pred(p, args) => print_term(&Term::Func(p.clone(), args.clone())),
        Atom::Assign(x, e) => format!("{} := {}", x.key(), print_term(e)),
        Atom::AssignAny(x) => format!("{x} := *"),
        Atom::OdeEq(x, e) => format!("{x}' = {}", print_term(e)),
    }
}

/// Printing options: with `labels` set, every atom is preceded by its
/// `@name` annotations.
#[derive(Clone, Copy)]
struct Style {
    labels: bool,
}

fn latom_into(a: &LAtom, st: Style, out: &mut String) {
    if st.labels {
        for l in &a.labels {
            let _ = write!(out, "@{l} ");
        }
    }
    out.push_str(&print_atom(&a.atom));
}

// Formula precedence: 0 <->, 1 ->, 2 ||, 3 &&, 4 unary.
fn fml_prec(f: &Fml) -> u8 {
    match f {
        Fml::Equiv(..) => 0,
        Fml::Imp(..) => 1,
        Fml::Or(..) => 2,
        Fml::And(..) => 3,
        _ => 4,
    }
}

fn fml_into(f: &Fml, min: u8, st: Style, out: &mut String) {
    let p = fml_prec(f);
    let need = p < min;
    if need {
        out.push('(');
    }
    match f {
        Fml::Atom(a) => latom_into(a, st, out),
        Fml::Not(a) => {
            out.push('!');
            fml_into(a, 4, st, out);
        }
        Fml::Forall(x, a) | Fml::Exists(x, a) => {
            let q = if matches!(f, Fml::Forall(..)) { "forall" } else { "exists" };
            let _ = write!(out, "{q} {x} . ");
            fml_into(a, 4, st, out);
        }
        Fml::Boxed(prog, a) => {
            out.push('[');
            prog_into(prog, 0, st, out);
            out.push_str("] ");
            fml_into(a, 4, st, out);
        }
        Fml::Diamond(prog, a) => {
            out.push('<');
            prog_into(prog, 0, st, out);
            out.push_str("> ");
            fml_into(a, 4, st, out);
        }
        Fml::And(a, b) => {
            fml_into(a, 3, st, out);
            out.push_str(" && ");
            fml_into(b, 4, st, out);
        }
        Fml::Or(a, b) => {
            fml_into(a, 2, st, out);
            out.push_str(" || ");
            fml_into(b, 3, st, out);
        }
        Fml::Imp(a, b) => {
            fml_into(a, 2, st, out);
            out.push_str(" -> ");
            fml_into(b, 1, st, out);
        }
        Fml::Equiv(a, b) => {
            fml_into(a, 1, st, out);
            out.push_str(" <-> ");
            fml_into(b, 1, st, out);
        }
    }
    if need {
        out.push(')');
    }
}

// Program precedence: 0 ++, 1 ;, 2 postfix *, 3 primary.
fn prog_prec(p: &Prog) -> u8 {
    match p {
        Prog::Choice(..) => 0,
        Prog::Seq(..) => 1,
        Prog::Test(f) if !matches!(**f, Fml::Atom(_)) => 3,
        Prog::Loop(_) | Prog::Test(_) | Prog::Atom(_) => 2,
        Prog::Ode(_) => 3,
    }
}

fn prog_into(p: &Prog, min: u8, st: Style, out: &mut String) {
    let need = prog_prec(p) < min;
    if need {
        out.push('(');
    }
    match p {
        Prog::Atom(a) => latom_into(a, st, out),
        Prog::Test(f) => {
            out.push('?');
            if matches!(**f, Fml::Atom(_)) {
                fml_into(f, 0, st, out);
            } else {
                out.push('(');
                fml_into(f, 0, st, out);
                out.push(')');
            }
        }
        Prog::Seq(a, b) => {
            prog_into(a, 2, st, out);
            out.push_str("; ");
            prog_into(b, 1, st, out);
        }
        Prog::Choice(a, b) => {
            prog_into(a, 1, st, out);
            out.push_str(" ++ ");
            prog_into(b, 0, st, out);
        }
        Prog::Loop(a) => {
            prog_into(a, 3, st, out);
            out.push('*');
        }
        Prog::Ode(ode) => {
            out.push('{');
            for (i, e) in ode.eqs.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                latom_into(e, st, out);
            }
            if let Some(q) = &ode.domain {
                out.push_str(" & ");
                fml_into(q, 0, st, out);
            }
            out.push('}');
        }
    }
    if need {
        out.push(')');
    }
}

/// Prints a formula with `@label` annotations.
pub fn print_model(f: &Fml) -> String {
    let mut s = String::new();
    fml_into(f, 0, Style { labels: true }, &mut s);
    s
}

/// Prints a formula without labels.
pub fn print_fml(f: &Fml) -> String {
    let mut s = String::new();
    fml_into(f, 0, Style { labels: false }, &mut s);
    s
}

pub fn print_prog(p: &Prog) -> String {
    let mut s = String::new();
    prog_into(p, 0, Style { labels: false }, &mut s);
    s
}

pub fn print_sequent(s: &Sequent) -> String {
    let side = |fs: &[Fml]| fs.iter().map(print_fml).collect::<Vec<_>>().join(", ");
    format!("{} |- {}", side(&s.ante), side(&s.succ))
}

pub fn print_sequent_labeled(s: &Sequent) -> String {
    let side = |fs: &[Fml]| fs.iter().map(print_model).collect::<Vec<_>>().join(", ");
    format!("{} |- {}", side(&s.ante), side(&s.succ))
}

impl std::fmt::Display for Term {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&print_term(self))
    }
}

impl std::fmt::Display for Atom {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&print_atom(self))
    }
}

impl std::fmt::Display for Fml {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&print_fml(self))
    }
}

impl std::fmt::Display for Sequent {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&print_sequent(self))
    }
}

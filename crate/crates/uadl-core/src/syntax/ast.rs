use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

pub type Rat = BigRational;

pub fn rat(n: i64) -> Rat {
    BigRational::from_integer(BigInt::from(n))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Origin {
    Model,
    Fresh,
}

/// A label attached to an atom occurrence.
///
/// Identity is the display name, which the allocator keeps unique. This lets
/// labels survive a print/parse round trip and be named in JSON files.
#[derive(Clone, Debug)]
pub struct Label {
    name: Arc<str>,
    origin: Origin,
}

impl Label {
    pub fn new(name: &str, origin: Origin) -> Self {
        Label {
            name: Arc::from(name),
            origin,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn origin(&self) -> Origin {
        self.origin
    }
}

impl PartialEq for Label {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name
    }
}

impl Eq for Label {}

impl Hash for Label {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.name.hash(state)
    }
}

impl PartialOrd for Label {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Label {
    fn cmp(&self, other: &Self) -> Ordering {
        natural_cmp(&self.name, &other.name)
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

/// Orders `i2` before `i10` so reports list labels the way people count.
pub fn natural_cmp(a: &str, b: &str) -> Ordering {
    fn split(s: &str) -> (&str, Option<u64>, &str) {
        let start = s.find(|c: char| c.is_ascii_digit()).unwrap_or(s.len());
        let rest = &s[start..];
        let end = rest
            .find(|c: char| !c.is_ascii_digit())
            .unwrap_or(rest.len());
        let num = rest[..end].parse::<u64>().ok();
        (&s[..start], num, &rest[end..])
    }
    let (pa, na, ra) = split(a);
    let (pb, nb, rb) = split(b);
    pa.cmp(pb)
        .then(na.cmp(&nb))
        .then_with(|| natural_cmp_tail(ra, rb))
        .then(a.cmp(b))
}

fn natural_cmp_tail(a: &str, b: &str) -> Ordering {
    if a.is_empty() || b.is_empty() {
        a.cmp(b)
    } else {
        natural_cmp(a, b)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Term {
    Var(String),
    Const(Rat),
    Add(Box<Term>, Box<Term>),
    Sub(Box<Term>, Box<Term>),
    Mul(Box<Term>, Box<Term>),
    Div(Box<Term>, Box<Term>),
    Pow(Box<Term>, u32),
    Func(String, Vec<Term>),
    /// The differential symbol `x'`.
    DiffSym(String),
    /// The differential `(e)'` of a compound term.
    Diff(Box<Term>),
}

impl Term {
    pub fn var(name: &str) -> Term {
        Term::Var(name.to_string())
    }

    pub fn int(n: i64) -> Term {
        Term::Const(rat(n))
    }

    pub fn zero() -> Term {
        Term::Const(Rat::zero())
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Term::Const(c) if c.is_zero())
    }

    pub fn add(a: Term, b: Term) -> Term {
        Term::Add(Box::new(a), Box::new(b))
    }

    pub fn sub(a: Term, b: Term) -> Term {
        Term::Sub(Box::new(a), Box::new(b))
    }

    pub fn mul(a: Term, b: Term) -> Term {
        Term::Mul(Box::new(a), Box::new(b))
    }

    pub fn div(a: Term, b: Term) -> Term {
        Term::Div(Box::new(a), Box::new(b))
    }

    pub fn neg(a: Term) -> Term {
        Term::sub(Term::zero(), a)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CmpOp {
    Eq,
    Ge,
    Gt,
    Le,
    Lt,
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Eq => "=",
            CmpOp::Ge => ">=",
            CmpOp::Gt => ">",
            CmpOp::Le => "<=",
            CmpOp::Lt => "<",
        }
    }

    pub fn holds(self, ord: Ordering) -> bool {
        match self {
            CmpOp::Eq => ord == Ordering::Equal,
            CmpOp::Ge => ord != Ordering::Less,
            CmpOp::Gt => ord == Ordering::Greater,
            CmpOp::Le => ord != Ordering::Greater,
            CmpOp::Lt => ord == Ordering::Less,
        }
    }
}

/// Left-hand side of an assignment: `x` or the differential symbol `x'`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct VarRef {
    pub name: String,
    pub prime: bool,
}

impl VarRef {
    pub fn plain(name: &str) -> Self {
        VarRef {
            name: name.to_string(),
            prime: false,
        }
    }

    pub fn primed(name: &str) -> Self {
        VarRef {
            name: name.to_string(),
            prime: true,
        }
    }

    /// Name as it appears in variable sets (`x` or `x'`).
    pub fn key(&self) -> String {
        if self.prime {
            format!("{}'", self.name)
        } else {
            self.name.clone()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Atom {
    True,
    False,
    Cmp(CmpOp, Term, Term),
    Pred(String, Vec<Term>),
    Assign(VarRef, Term),
    AssignAny(String),
    /// A bare differential equation `x' = e`, without domain.
    OdeEq(String, Term),
}

impl Atom {
    pub fn is_program(&self) -> bool {
        matches!(self, Atom::Assign(..) | Atom::AssignAny(_))
    }
}

/// An atom together with its labels. Model atoms carry one label; cut
/// atoms matched against several context atoms and fused occurrences
/// carry several.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LAtom {
    pub labels: Vec<Label>,
    pub atom: Atom,
}

impl LAtom {
    pub fn new(labels: Vec<Label>, atom: Atom) -> Self {
        let mut labels = labels;
        labels.sort();
        labels.dedup();
        LAtom { labels, atom }
    }

    pub fn unlabeled(atom: Atom) -> Self {
        LAtom {
            labels: Vec::new(),
            atom,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Fml {
    Atom(LAtom),
    Not(Box<Fml>),
    And(Box<Fml>, Box<Fml>),
    Or(Box<Fml>, Box<Fml>),
    Imp(Box<Fml>, Box<Fml>),
    Equiv(Box<Fml>, Box<Fml>),
    Forall(String, Box<Fml>),
    Exists(String, Box<Fml>),
    Boxed(Box<Prog>, Box<Fml>),
    Diamond(Box<Prog>, Box<Fml>),
}

impl Fml {
    pub fn atom(labels: Vec<Label>, atom: Atom) -> Fml {
        Fml::Atom(LAtom::new(labels, atom))
    }

    pub fn not(a: Fml) -> Fml {
        Fml::Not(Box::new(a))
    }

    pub fn and(a: Fml, b: Fml) -> Fml {
        Fml::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Fml, b: Fml) -> Fml {
        Fml::Or(Box::new(a), Box::new(b))
    }

    pub fn imp(a: Fml, b: Fml) -> Fml {
        Fml::Imp(Box::new(a), Box::new(b))
    }

    pub fn equiv(a: Fml, b: Fml) -> Fml {
        Fml::Equiv(Box::new(a), Box::new(b))
    }

    pub fn boxed(p: Prog, f: Fml) -> Fml {
        Fml::Boxed(Box::new(p), Box::new(f))
    }

    pub fn diamond(p: Prog, f: Fml) -> Fml {
        Fml::Diamond(Box::new(p), Box::new(f))
    }

    pub fn forall(x: &str, f: Fml) -> Fml {
        Fml::Forall(x.to_string(), Box::new(f))
    }

    pub fn exists(x: &str, f: Fml) -> Fml {
        Fml::Exists(x.to_string(), Box::new(f))
    }

    pub fn is_true_atom(&self) -> bool {
        matches!(self, Fml::Atom(a) if a.atom == Atom::True)
    }

    pub fn is_false_atom(&self) -> bool {
        matches!(self, Fml::Atom(a) if a.atom == Atom::False)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Ode {
    pub eqs: Vec<LAtom>,
    pub domain: Option<Box<Fml>>,
}

impl Ode {
    /// Variables evolved by the system, in equation order.
    pub fn vars(&self) -> Vec<String> {
        self.eqs
            .iter()
            .filter_map(|e| match &e.atom {
                Atom::OdeEq(x, _) => Some(x.clone()),
                _ => None,
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Prog {
    /// `x := e` or `x := *`.
    Atom(LAtom),
    Test(Box<Fml>),
    Seq(Box<Prog>, Box<Prog>),
    Choice(Box<Prog>, Box<Prog>),
    Loop(Box<Prog>),
    Ode(Ode),
}

impl Prog {
    pub fn seq(a: Prog, b: Prog) -> Prog {
        Prog::Seq(Box::new(a), Box::new(b))
    }

    pub fn choice(a: Prog, b: Prog) -> Prog {
        Prog::Choice(Box::new(a), Box::new(b))
    }

    pub fn test(f: Fml) -> Prog {
        Prog::Test(Box::new(f))
    }
}

/// `Γ ⊢ Δ`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Sequent {
    pub ante: Vec<Fml>,
    pub succ: Vec<Fml>,
}

impl Sequent {
    pub fn new(ante: Vec<Fml>, succ: Vec<Fml>) -> Self {
        Sequent { ante, succ }
    }
}

/// Strips labels so formulas can be compared syntactically.
pub trait Unlabel {
    fn unlabel(&self) -> Self;
}

impl Unlabel for Fml {
    fn unlabel(&self) -> Fml {
        crate::syntax::visit::relabel_fml(self, &mut |_| Vec::new())
    }
}

impl Unlabel for Prog {
    fn unlabel(&self) -> Prog {
        crate::syntax::visit::relabel_prog(self, &mut |_| Vec::new())
    }
}

impl Unlabel for Sequent {
    fn unlabel(&self) -> Sequent {
        Sequent {
            ante: self.ante.iter().map(Unlabel::unlabel).collect(),
            succ: self.succ.iter().map(Unlabel::unlabel).collect(),
        }
    }
}

//! Random models and proofs for the fuzz criteria.
//!
//! Models are implication chains of linear hypotheses ending in a goal, so
//! that the propositional rules alone (no andL/orR) reach atomic leaves.
//! The generator tracks every premise itself and only emits a step whose
//! premises the linear oracle confirms valid.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use uadl_core::calculus::ProofNode;
use uadl_core::mutation::{default_weaken_candidates, WeakeningProvider};
use uadl_core::oracle::{LinearOracle, Oracle};
use uadl_core::syntax::{parse_atom, parse_fml, parse_model, print_term, Atom, CmpOp, Fml, Sequent, Unlabel};

pub const VARS: [&str; 3] = ["x", "y", "z"];
pub const MAX_ATOMS: usize = 6;

#[derive(Clone, Debug)]
pub struct Cmp {
    pub coef: [i64; 3],
    pub op: &'static str,
    pub rhs: i64,
}

impl Cmp {
    pub fn text(&self) -> String {
        let mut s = String::new();
        for (c, x) in self.coef.iter().zip(VARS) {
            if *c == 0 {
                continue;
            }
            let mag = c.abs();
            let term = if mag == 1 { x.to_string() } else { format!("{mag}*{x}") };
            if s.is_empty() {
                s = if *c < 0 { format!("-{term}") } else { term };
            } else {
                s = format!("{s} {} {term}", if *c < 0 { "-" } else { "+" });
            }
        }
        if s.is_empty() {
            s = "0".into();
        }
        format!("{s} {} {}", self.op, self.rhs)
    }

    /// A consequence of `self`: the same side, shifted outwards.
    pub fn loosen(&self, rng: &mut ChaCha8Rng) -> Cmp {
        let k = rng.gen_range(0..=2);
        let (op, rhs) = match self.op {
            ">" | ">=" => (if k == 0 { ">=" } else { *[">", ">="].choose(rng).unwrap() }, self.rhs - k),
            "<" | "<=" => (if k == 0 { "<=" } else { *["<", "<="].choose(rng).unwrap() }, self.rhs + k),
            _ => (*[">=", "<="].choose(rng).unwrap(), self.rhs),
        };
        Cmp { coef: self.coef, op, rhs }
    }
}

pub fn random_cmp(rng: &mut ChaCha8Rng, nvars: usize) -> Cmp {
    let mut coef = [0i64; 3];
    while coef.iter().all(|c| *c == 0) {
        for c in coef.iter_mut().take(nvars) {
            *c = if rng.gen_bool(0.6) { rng.gen_range(-3..=3) } else { 0 };
        }
    }
    let op = *[">", ">=", "<", "<=", ">", "<", "="].choose(rng).unwrap();
    Cmp { coef, op, rhs: rng.gen_range(-5..=5) }
}

/// Gives every comparison a weakening: strict ones drop strictness, the
/// rest move their bound outwards by one and equations keep one side.
#[derive(Clone, Copy, Debug, Default)]
pub struct ShiftProvider;

impl WeakeningProvider for ShiftProvider {
    fn candidates(&self, a: &Atom) -> Vec<Atom> {
        let mut out = default_weaken_candidates(a);
        if let Atom::Cmp(op, l, r) = a {
            let (l, r) = (print_term(l), print_term(r));
            let text = match op {
                CmpOp::Ge => format!("{l} >= {r} - 1"),
                CmpOp::Le => format!("{l} <= {r} + 1"),
                CmpOp::Eq => format!("{l} >= {r}"),
                _ => String::new(),
            };
            if let Ok(w) = parse_atom(&text) {
                out.push(w);
            }
        }
        out
    }
}

pub fn valid(s: &Sequent) -> bool {
    LinearOracle.decide(s).is_valid()
}

fn fml(text: &str) -> Fml {
    parse_fml(text).unwrap_or_else(|e| panic!("{text}: {e}"))
}

#[derive(Clone, Debug)]
pub struct Case {
    pub text: String,
    pub model: Fml,
    pub proof: ProofNode,
    pub cuts: usize,
}

impl Case {
    fn new(text: String, proof: ProofNode, cuts: usize) -> Case {
        let model = parse_model(&text).unwrap_or_else(|e| panic!("{text}: {e}")).0;
        Case { text, model, proof, cuts }
    }
}

/// A valid linear model of at most [`MAX_ATOMS`] atoms.
pub fn linear_model(rng: &mut ChaCha8Rng) -> String {
    loop {
        let nvars = rng.gen_range(1..=3);
        let total = rng.gen_range(2..=MAX_ATOMS);
        let mut hyp_atoms = Vec::new();
        let mut hyps = Vec::new();
        let mut used = 0;
        let nhyp = rng.gen_range(1..=3.min(total - 1));
        for _ in 0..nhyp {
            if used + 2 < total && rng.gen_bool(0.3) {
                let (a, b) = (random_cmp(rng, nvars), random_cmp(rng, nvars));
                hyps.push(format!("({} || {})", a.text(), b.text()));
                hyp_atoms.push(a);
                hyp_atoms.push(b);
                used += 2;
            } else {
                let a = random_cmp(rng, nvars);
                hyps.push(a.text());
                hyp_atoms.push(a);
                used += 1;
            }
        }
        let mut goals = Vec::new();
        let ngoal = rng.gen_range(1..=(total - used).clamp(1, 3));
        let pick = |rng: &mut ChaCha8Rng| -> Cmp {
            let base = hyp_atoms.choose(rng).unwrap();
            match rng.gen_range(0..10) {
                0..=4 => base.loosen(rng),
                5..=7 => base.clone(),
                _ => random_cmp(rng, nvars),
            }
        };
        for _ in 0..ngoal {
            if used + 2 <= total && rng.gen_bool(0.15) {
                let (a, b) = (random_cmp(rng, nvars), pick(rng));
                goals.push(format!("({} -> {})", a.text(), b.text()));
                used += 2;
            } else {
                goals.push(pick(rng).text());
                used += 1;
            }
        }
        let mut text = goals.join(" && ");
        for h in hyps.iter().rev() {
            text = format!("{h} -> ({text})");
        }
        if valid(&Sequent::new(vec![], vec![fml(&text)])) {
            return text;
        }
    }
}

pub struct Gen<'r> {
    pub rng: &'r mut ChaCha8Rng,
    pub cut_prob: f64,
    pub weaken_prob: f64,
    pub cuts_left: usize,
    pub cuts: usize,
}

fn at(side: char, i: usize) -> String {
    format!("{side}{i}")
}

impl Gen<'_> {
    pub fn prove(&mut self, s: Sequent) -> ProofNode {
        if let Some(i) = s.succ.iter().position(|f| matches!(f, Fml::Imp(..))) {
            let Fml::Imp(a, b) = &s.succ[i] else { unreachable!() };
            let mut n = s.clone();
            n.succ[i] = (**b).clone();
            n.ante.push((**a).clone());
            return ProofNode::new("impR").param("at", &at('R', i)).child(self.prove(n));
        }
        if let Some(i) = s.ante.iter().position(|f| matches!(f, Fml::Or(..))) {
            let Fml::Or(a, b) = &s.ante[i] else { unreachable!() };
            let (mut l, mut r) = (s.clone(), s.clone());
            l.ante[i] = (**a).clone();
            r.ante[i] = (**b).clone();
            return ProofNode::new("orL").param("at", &at('L', i)).child(self.prove(l)).child(self.prove(r));
        }
        if let Some(i) = s.succ.iter().position(|f| matches!(f, Fml::And(..))) {
            let Fml::And(a, b) = &s.succ[i] else { unreachable!() };
            let (mut l, mut r) = (s.clone(), s.clone());
            l.succ[i] = (**a).clone();
            r.succ[i] = (**b).clone();
            return ProofNode::new("andR").param("at", &at('R', i)).child(self.prove(l)).child(self.prove(r));
        }
        if self.cuts_left > 0 && self.rng.gen_bool(self.cut_prob) {
            if let Some(n) = self.try_cut(&s) {
                return n;
            }
        }
        if self.rng.gen_bool(self.weaken_prob) {
            if let Some(n) = self.try_weaken(&s) {
                return n;
            }
        }
        let shared = s.ante.iter().any(|a| s.succ.iter().any(|b| a.unlabel() == b.unlabel()));
        if shared && self.rng.gen_bool(0.8) {
            ProofNode::new("id")
        } else {
            ProofNode::new("QE")
        }
    }

    fn try_cut(&mut self, s: &Sequent) -> Option<ProofNode> {
        for _ in 0..8 {
            let base = s.ante.choose(self.rng).cloned();
            let c = match base {
                Some(f @ Fml::Atom(_)) if self.rng.gen_bool(0.8) => shifted(&f, self.rng),
                _ => None,
            }
            .unwrap_or_else(|| random_cmp(self.rng, 3).text());
            let cf = fml(&c);
            let mut left = s.clone();
            left.succ.push(cf.clone());
            let mut right = s.clone();
            right.ante.push(cf);
            if valid(&left) && valid(&right) {
                self.cuts_left -= 1;
                self.cuts += 1;
                let (l, r) = (self.prove(left), self.prove(right));
                return Some(ProofNode::new("cut").param("formula", &c).child(l).child(r));
            }
        }
        None
    }

    fn try_weaken(&mut self, s: &Sequent) -> Option<ProofNode> {
        let right = self.rng.gen_bool(0.5);
        let v = if right { &s.succ } else { &s.ante };
        if v.is_empty() {
            return None;
        }
        let i = self.rng.gen_range(0..v.len());
        let mut n = s.clone();
        if right {
            n.succ.remove(i);
        } else {
            n.ante.remove(i);
        }
        if !valid(&n) {
            return None;
        }
        let rule = if right { "WR" } else { "WL" };
        let side = if right { 'R' } else { 'L' };
        Some(ProofNode::new(rule).param("at", &at(side, i)).child(self.prove(n)))
    }
}

/// A loosened copy of an atomic comparison, as text.
fn shifted(f: &Fml, rng: &mut ChaCha8Rng) -> Option<String> {
    let text = uadl_core::syntax::print_fml(&f.unlabel());
    let (op, k) = [(" >= ", -1), (" > ", -1), (" <= ", 1), (" < ", 1)]
        .into_iter()
        .find(|(op, _)| text.contains(op))?;
    let (lhs, rhs) = text.split_once(op)?;
    let rhs: i64 = rhs.trim().parse().ok()?;
    let d = rng.gen_range(0..=2);
    Some(format!("{lhs}{op}{}", rhs + k * d))
}

pub fn linear_case(rng: &mut ChaCha8Rng) -> Case {
    let text = linear_model(rng);
    let mut g = Gen {
        rng,
        cut_prob: 0.3,
        weaken_prob: 0.3,
        cuts_left: 2,
        cuts: 0,
    };
    let proof = g.prove(Sequent::new(vec![], vec![fml(&text)]));
    let cuts = g.cuts;
    Case::new(text, proof, cuts)
}

/// A linear case whose proof has at least one cut.
pub fn cut_case(rng: &mut ChaCha8Rng) -> Case {
    loop {
        let text = linear_model(rng);
        let mut g = Gen {
            rng,
            cut_prob: 0.9,
            weaken_prob: 0.2,
            cuts_left: 2,
            cuts: 0,
        };
        let proof = g.prove(Sequent::new(vec![], vec![fml(&text)]));
        if g.cuts > 0 {
            let cuts = g.cuts;
            return Case::new(text, proof, cuts);
        }
    }
}

/// `H -> [a]P && [b]P`, proved by joining the two boxes with forward [∪]
/// so that both copies of `P` end up in one fusion class.
pub fn union_case(rng: &mut ChaCha8Rng) -> Case {
    loop {
        let h = random_cmp(rng, 2);
        let p = random_cmp(rng, 2);
        let step = |rng: &mut ChaCha8Rng| {
            let x = *VARS[..2].choose(rng).unwrap();
            format!("{x} := {x} + {}", rng.gen_range(-2..=2))
        };
        let (a, b) = (step(rng), step(rng));
        let text = format!("{} -> ([{a}] {} && [{b}] {})", h.text(), p.text(), p.text());
        if !valid(&Sequent::new(vec![], vec![fml(&text)])) {
            continue;
        }
        let proof = ProofNode::new("impR").then(vec![
            ProofNode::new("CER").param("at", "R0").param("axiom", "[++]").param("direction", "forward"),
            ProofNode::new("QE"),
        ]);
        return Case::new(text, proof, 0);
    }
}

/// Random formula text mixing connectives, modalities and atoms of every
/// mutable sort.
pub fn formula_text(rng: &mut ChaCha8Rng, depth: usize) -> String {
    if depth == 0 || rng.gen_bool(0.25) {
        return match rng.gen_range(0..6) {
            0 => "true".into(),
            1 => "p(x)".into(),
            _ => random_cmp(rng, 3).text(),
        };
    }
    let sub = |rng: &mut ChaCha8Rng| formula_text(rng, depth - 1);
    match rng.gen_range(0..8) {
        0 => format!("({} && {})", sub(rng), sub(rng)),
        1 => format!("({} || {})", sub(rng), sub(rng)),
        2 => format!("({} -> {})", sub(rng), sub(rng)),
        3 => format!("!({})", sub(rng)),
        4 => format!("(forall y . {})", sub(rng)),
        _ => format!("[{}] {}", program_text(rng, depth - 1), sub(rng)),
    }
}

fn program_text(rng: &mut ChaCha8Rng, depth: usize) -> String {
    let x = *VARS.choose(rng).unwrap();
    if depth == 0 || rng.gen_bool(0.4) {
        return match rng.gen_range(0..5) {
            0 => format!("{x} := *"),
            1 => format!("{{{x}' = {}, z' = 1 & {}}}", rng.gen_range(-2..=2), random_cmp(rng, 2).text()),
            _ => format!("{x} := {x} + {}", rng.gen_range(-3..=3)),
        };
    }
    let sub = |rng: &mut ChaCha8Rng| program_text(rng, depth - 1);
    match rng.gen_range(0..4) {
        0 => format!("{}; {}", sub(rng), sub(rng)),
        1 => format!("{{{} ++ {}}}", sub(rng), sub(rng)),
        2 => format!("?{}", random_cmp(rng, 2).text()),
        _ => format!("{{{}}}*", sub(rng)),
    }
}

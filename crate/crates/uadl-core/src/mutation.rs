//! The mutation operator μ and the weakening provider.

use crate::labelsets::MutationKind;
pub use crate::labelsets::MutationChoice;
use crate::syntax::vars::all_vars_prog;
use crate::syntax::*;
use serde_json::Value;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MutationError {
    #[error("no weakening candidate for {label} ({atom})")]
    NoCandidate { label: String, atom: String },
    #[error("weakening {label} to {replacement} introduces new variables")]
    SideCondition { label: String, replacement: String },
    #[error("witness {witness} for {label} does not fit atom {atom}")]
    BadWitness {
        label: String,
        witness: String,
        atom: String,
    },
    #[error("fused labels {0} are given different mutations")]
    FusionViolation(String),
}

/// Supplies replacement atoms for the W mutation, in preference order.
pub trait WeakeningProvider: Send + Sync {
    fn candidates(&self, atom: &Atom) -> Vec<Atom>;
}

/// Strict comparisons weaken to their non-strict forms; user candidates
/// are tried afterwards.
#[derive(Clone, Debug, Default)]
pub struct DefaultProvider {
    extra: Vec<(Atom, Vec<Atom>)>,
}

impl DefaultProvider {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_candidates(mut self, atom: Atom, replacements: Vec<Atom>) -> Self {
        self.extra.push((atom, replacements));
        self
    }

    /// Reads `{"candidates": [{"atom": "x > 100", "replacements": ["x >= 0"]}]}`.
    pub fn from_json(v: &Value) -> Result<Self, String> {
        let mut p = DefaultProvider::new();
        let list = v
            .get("candidates")
            .and_then(Value::as_array)
            .ok_or("missing \"candidates\" array")?;
        for entry in list {
            let atom = entry
                .get("atom")
                .and_then(Value::as_str)
                .ok_or("candidate without \"atom\"")?;
            let atom = parse_atom(atom).map_err(|e| e.to_string())?;
            let reps = entry
                .get("replacements")
                .and_then(Value::as_array)
                .ok_or("candidate without \"replacements\"")?;
            let mut out = Vec::new();
            for r in reps {
                let r = r.as_str().ok_or("replacement must be text")?;
                out.push(parse_atom(r).map_err(|e| e.to_string())?);
            }
            p = p.with_candidates(atom, out);
        }
        Ok(p)
    }
}

impl WeakeningProvider for DefaultProvider {
    fn candidates(&self, atom: &Atom) -> Vec<Atom> {
        let mut out = default_weaken_candidates(atom);
        for (a, reps) in &self.extra {
            if a == atom {
                out.extend(reps.iter().cloned());
            }
        }
        out
    }
}

pub fn default_weaken_candidates(a: &Atom) -> Vec<Atom> {
    match a {
        Atom::Cmp(CmpOp::Gt, l, r) => vec![Atom::Cmp(CmpOp::Ge, l.clone(), r.clone())],
        Atom::Cmp(CmpOp::Lt, l, r) => vec![Atom::Cmp(CmpOp::Le, l.clone(), r.clone())],
        _ => Vec::new(),
    }
}

/// Whether W on this atom is the identity per the atom table.
pub fn weakening_is_identity(a: &Atom) -> bool {
    matches!(
        a,
        Atom::True | Atom::False | Atom::Pred(..) | Atom::AssignAny(_) | Atom::OdeEq(..)
    )
}

/// Kind selected for an atom; absent labels are skipped.
fn kind_of(choice: &MutationChoice, a: &LAtom) -> Result<MutationKind, MutationError> {
    let mut found: Option<MutationKind> = None;
    for l in &a.labels {
        if let Some(k) = choice.get(l) {
            match found {
                Some(prev) if prev != k => {
                    let names: Vec<&str> = a.labels.iter().map(Label::name).collect();
                    return Err(MutationError::FusionViolation(names.join(",")));
                }
                _ => found = Some(k),
            }
        }
    }
    Ok(found.unwrap_or(MutationKind::Id))
}

fn first_label(a: &LAtom) -> String {
    a.labels
        .first()
        .map(|l| l.name().to_string())
        .unwrap_or_else(|| "?".into())
}

fn weaken(
    choice: &MutationChoice,
    a: &LAtom,
    provider: &dyn WeakeningProvider,
) -> Result<Atom, MutationError> {
    let witness = a.labels.iter().find_map(|l| choice.witnesses.get(l)).cloned();
    let replacement = match witness {
        Some(w) => w,
        None => provider
            .candidates(&a.atom)
            .into_iter()
            .next()
            .ok_or_else(|| MutationError::NoCandidate {
                label: first_label(a),
                atom: print_atom(&a.atom),
            })?,
    };
    let fits = match (&a.atom, &replacement) {
        (Atom::Cmp(..), Atom::Cmp(..)) => true,
        (Atom::Assign(x, _), Atom::Assign(y, _)) => x == y,
        _ => false,
    };
    if !fits {
        return Err(MutationError::BadWitness {
            label: first_label(a),
            witness: print_atom(&replacement),
            atom: print_atom(&a.atom),
        });
    }
    Ok(replacement)
}

fn apply_formula_atom(
    choice: &MutationChoice,
    a: &LAtom,
    provider: &dyn WeakeningProvider,
) -> Result<Fml, MutationError> {
    if matches!(a.atom, Atom::True | Atom::False) {
        return Ok(Fml::Atom(a.clone()));
    }
    let atom = match kind_of(choice, a)? {
        MutationKind::Id => a.atom.clone(),
        MutationKind::R => Atom::True,
        MutationKind::W => match &a.atom {
            Atom::Pred(..) => a.atom.clone(),
            _ => weaken(choice, a, provider)?,
        },
    };
    Ok(Fml::Atom(LAtom {
        labels: a.labels.clone(),
        atom,
    }))
}

/// μ applied to a formula.
pub fn apply(
    choice: &MutationChoice,
    f: &Fml,
    provider: &dyn WeakeningProvider,
) -> Result<Fml, MutationError> {
    let r = |g: &Fml| apply(choice, g, provider);
    Ok(match f {
        Fml::Atom(a) => apply_formula_atom(choice, a, provider)?,
        Fml::Not(a) => Fml::not(r(a)?),
        Fml::And(a, b) => Fml::and(r(a)?, r(b)?),
        Fml::Or(a, b) => Fml::or(r(a)?, r(b)?),
        Fml::Imp(a, b) => Fml::imp(r(a)?, r(b)?),
        Fml::Equiv(a, b) => Fml::equiv(r(a)?, r(b)?),
        Fml::Forall(x, a) => Fml::forall(x, r(a)?),
        Fml::Exists(x, a) => Fml::exists(x, r(a)?),
        Fml::Boxed(p, a) => Fml::boxed(program_under(choice, p, provider)?, r(a)?),
        Fml::Diamond(p, a) => Fml::diamond(program_under(choice, p, provider)?, r(a)?),
    })
}

/// μ on a whole modal program, with the variable side condition checked
/// against that program: a replacement may use any variable it mentions.
fn program_under(
    choice: &MutationChoice,
    p: &Prog,
    provider: &dyn WeakeningProvider,
) -> Result<Prog, MutationError> {
    let q = apply_prog(choice, p, provider)?;
    if check_var_side_condition(p, &q) {
        return Ok(q);
    }
    let culprit = atoms_of_prog(p)
        .into_iter()
        .find(|a| a.atom.is_program() && kind_of(choice, a) == Ok(MutationKind::W));
    let (label, replacement) = match culprit {
        Some(a) => (first_label(a), weaken(choice, a, provider).map(|w| print_atom(&w)).unwrap_or_default()),
        None => ("?".into(), String::new()),
    };
    Err(MutationError::SideCondition { label, replacement })
}

/// μ applied to a program. The side condition is checked by [`apply`].
pub fn apply_prog(
    choice: &MutationChoice,
    p: &Prog,
    provider: &dyn WeakeningProvider,
) -> Result<Prog, MutationError> {
    let r = |q: &Prog| apply_prog(choice, q, provider);
    Ok(match p {
        Prog::Atom(a) => match kind_of(choice, a)? {
            MutationKind::Id => p.clone(),
            MutationKind::R => Prog::test(Fml::Atom(LAtom {
                labels: a.labels.clone(),
                atom: Atom::True,
            })),
            MutationKind::W => match &a.atom {
                Atom::AssignAny(_) => p.clone(),
                _ => Prog::Atom(LAtom {
                    labels: a.labels.clone(),
                    atom: weaken(choice, a, provider)?,
                }),
            },
        },
        Prog::Test(f) => Prog::test(apply(choice, f, provider)?),
        Prog::Seq(a, b) => Prog::seq(r(a)?, r(b)?),
        Prog::Choice(a, b) => Prog::choice(r(a)?, r(b)?),
        Prog::Loop(a) => Prog::Loop(Box::new(r(a)?)),
        Prog::Ode(ode) => {
            let mut removed = None;
            for e in &ode.eqs {
                if kind_of(choice, e)? == MutationKind::R && removed.is_none() {
                    removed = Some(e.labels.clone());
                }
            }
            let domain = match &ode.domain {
                Some(q) => Some(apply(choice, q, provider)?),
                None => None,
            };
            match removed {
                Some(labels) => Prog::test(domain.unwrap_or({
                    Fml::Atom(LAtom {
                        labels,
                        atom: Atom::True,
                    })
                })),
                None => Prog::Ode(Ode {
                    eqs: ode.eqs.clone(),
                    domain: domain.map(Box::new),
                }),
            }
        }
    })
}

pub fn apply_sequent(
    choice: &MutationChoice,
    s: &Sequent,
    provider: &dyn WeakeningProvider,
) -> Result<Sequent, MutationError> {
    Ok(Sequent {
        ante: s
            .ante
            .iter()
            .map(|f| apply(choice, f, provider))
            .collect::<Result<_, _>>()?,
        succ: s
            .succ
            .iter()
            .map(|f| apply(choice, f, provider))
            .collect::<Result<_, _>>()?,
    })
}

/// The mutated program mentions no variable the original does not.
pub fn check_var_side_condition(original: &Prog, mutated: &Prog) -> bool {
    all_vars_prog(mutated).is_subset(&all_vars_prog(original))
}

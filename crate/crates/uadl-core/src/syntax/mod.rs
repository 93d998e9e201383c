//! Labeled differential-dynamic-logic syntax.

pub mod ast;
pub mod labels;
pub mod parser;
pub mod printer;
pub mod subst;
pub mod vars;
pub mod visit;

pub use ast::*;
pub use labels::{assign_labels, label_fresh, resolve_phi, syntactically_equal, LabelAllocator};
pub use parser::{parse_atom, parse_fml, parse_model, parse_model_with, parse_term, ParseError};
pub use printer::{print_atom, print_fml, print_model, print_prog, print_sequent, print_sequent_labeled, print_term};
pub use vars::{bound_vars, free_vars, VarSet};
pub use visit::{atoms_of, atoms_of_prog, labels_of, sequent_labels};

#[cfg(test)]
mod tests {
    use super::*;

    const PARACHUTE: &str = "@i1 g > 0 && @i2 p > a && @i3 T > 0 && @i4 m < -sqrt(g/p) \
        && @i5 x >= 0 && @i6 v < 0 && @i7 v > -sqrt(g/p) && @i8 r = a \
        -> [((?(@j v - g*T > -sqrt(g/p) && @k r = a && @l x > 100) ++ @m r := p); @n t := 0; \
        {@o1 x' = v, @o2 v' = -g + r*v^2, @o3 t' = 1 & @p1 t <= T && @p2 x >= 0 && @p3 v < 0})*] \
        (@q1 x = 0 -> @q2 v >= m)";

    #[test]
    fn single_atom_gets_one_label() {
        let (f, _) = parse_model("x > 100").unwrap();
        let atoms = atoms_of(&f);
        assert_eq!(atoms.len(), 1);
        assert_eq!(atoms[0].labels.len(), 1);
    }

    #[test]
    fn duplicate_explicit_label_is_rejected() {
        assert_eq!(
            parse_model("x > @l 100 && x > @l 0").unwrap_err(),
            ParseError::DuplicateLabel("l".into())
        );
        assert!(parse_model("@l x > 100 && @l x > 0").is_err());
    }

    #[test]
    fn arity_is_checked() {
        assert!(matches!(
            parse_model("f(x) > 0 && f(x, y) > 0"),
            Err(ParseError::Arity { .. })
        ));
    }

    #[test]
    fn syntax_errors_carry_positions() {
        match parse_model("x > 0 &&\n  y >").unwrap_err() {
            ParseError::Syntax { line, .. } => assert_eq!(line, 2),
            e => panic!("{e}"),
        }
    }

    #[test]
    fn parachute_has_one_label_per_atom() {
        let (f, _) = parse_model(PARACHUTE).unwrap();
        let labels = labels_of(&f);
        assert_eq!(labels.len(), 21);
        let set: std::collections::BTreeSet<_> = labels.iter().collect();
        assert_eq!(set.len(), 21);
    }

    #[test]
    fn negation_is_subtraction_from_zero() {
        assert_eq!(
            parse_term("-1").unwrap(),
            Term::sub(Term::zero(), Term::int(1))
        );
        assert_eq!(print_term(&parse_term("-g + r*v^2").unwrap()), "-g + r*v^2");
    }

    #[test]
    fn round_trip_parachute() {
        let (f, _) = parse_model(PARACHUTE).unwrap();
        let text = print_model(&f);
        let (g, _) = parse_model(&text).unwrap();
        assert_eq!(f, g);
        assert_eq!(print_model(&g), text);
    }

    #[test]
    fn round_trip_assorted() {
        for text in [
            "x - (y - z) > -(a + b)",
            "a*(b*c) = a/(b/c) - -x",
            "(x + 1)^2 >= 0 <-> true",
            "(a > 0 -> b > 0) -> c < 1 || !d = 2 && e <= 3",
            "forall x . exists y . x < y",
            "[x := 1; (y := 2; z := *)*; ?(x > 0 && y > 0) ++ ?x > 0] <{x' = 1, y' = -x}> x' = 0",
            "[{x' = v & x >= 0}; (?x > 1)*] (x + y)' >= 1/2*x",
            "p(x, y) && q(1/3)",
        ] {
            let (f, _) = parse_model(text).unwrap();
            let (g, _) = parse_model(&print_model(&f)).unwrap();
            assert_eq!(f, g, "{text} printed as {}", print_model(&f));
        }
    }
}

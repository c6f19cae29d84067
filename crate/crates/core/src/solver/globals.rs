//! Global constraints as conjunctions of primitive ones.

use crate::store::{ArithOp, Constraint, Rel};
use crate::term::{sym, Symbol, Term, VarGen};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GlobalError {
    #[error("`{0}` expects a relation such as (#=) as its comparison argument")]
    BadRelation(String),
    #[error("`{0}`: argument lists differ in length")]
    LengthMismatch(String),
    #[error("`{0}` can only be imposed, not negated or reified")]
    NotImposed(String),
}

fn relation(name: &str, t: &Term) -> Result<Rel, GlobalError> {
    match t {
        Term::App(s, a) if a.is_empty() => Rel::of_primitive(s).ok_or_else(|| GlobalError::BadRelation(name.into())),
        _ => Err(GlobalError::BadRelation(name.into())),
    }
}

/// `x1 + … + xn rel c` through a chain of fresh accumulators.
fn sum_chain(xs: &[Term], rel: Rel, c: &Term, fresh: &mut VarGen, out: &mut Vec<Constraint>) {
    match xs {
        [] => out.push(Constraint::cmp(Term::Int(0), rel, c.clone())),
        [x] => out.push(Constraint::cmp(x.clone(), rel, c.clone())),
        _ => {
            let mut acc = xs[0].clone();
            for (k, x) in xs[1..].iter().enumerate() {
                if k + 2 == xs.len() {
                    out.push(Constraint::arith(acc.clone(), ArithOp::Add, x.clone(), rel, c.clone()));
                } else {
                    let t = Term::Var(fresh.fresh());
                    out.push(Constraint::arith(acc, ArithOp::Add, x.clone(), Rel::Eq, t.clone()));
                    acc = t;
                }
            }
        }
    }
}

/// Decomposes an imposed global constraint. `Ok(None)` means a list argument
/// has no known spine yet.
pub fn decompose_global(g: &Symbol, args: &[Term], fresh: &mut VarGen) -> Result<Option<Vec<Constraint>>, GlobalError> {
    let name = g.name().to_string();
    let mut out = vec![];
    if *g == *sym::ALL_DIFFERENT {
        let Some(xs) = args[0].list_items() else { return Ok(None) };
        for i in 0..xs.len() {
            for j in i + 1..xs.len() {
                out.push(Constraint::cmp(xs[i].clone(), Rel::Ne, xs[j].clone()));
            }
        }
    } else if *g == *sym::SUM {
        let Some(xs) = args[0].list_items() else { return Ok(None) };
        let rel = relation(&name, &args[1])?;
        sum_chain(&xs, rel, &args[2], fresh, &mut out);
    } else if *g == *sym::SCALAR_PRODUCT {
        let (Some(cs), Some(xs)) = (args[0].list_items(), args[1].list_items()) else { return Ok(None) };
        if cs.len() != xs.len() {
            return Err(GlobalError::LengthMismatch(name));
        }
        let rel = relation(&name, &args[2])?;
        let mut prods = vec![];
        for (c, x) in cs.iter().zip(&xs) {
            let p = Term::Var(fresh.fresh());
            out.push(Constraint::arith(c.clone(), ArithOp::Mul, x.clone(), Rel::Eq, p.clone()));
            prods.push(p);
        }
        sum_chain(&prods, rel, &args[3], fresh, &mut out);
    } else if *g == *sym::COUNT {
        let value = &args[0];
        let Some(xs) = args[1].list_items() else { return Ok(None) };
        let rel = relation(&name, &args[2])?;
        let mut indicators = vec![];
        for x in &xs {
            let hit = Term::Var(fresh.fresh());
            let b = Term::Var(fresh.fresh());
            out.push(Constraint::Seq { t: x.clone(), s: value.clone(), r: hit.clone() });
            out.push(Constraint::Dom { u: b.clone(), set: Term::int_list([1]), r: hit });
            indicators.push(b);
        }
        if !indicators.is_empty() {
            out.push(Constraint::Range { us: indicators.clone(), lo: Term::Int(0), hi: Term::Int(1) });
        }
        sum_chain(&indicators, rel, &args[3], fresh, &mut out);
    } else {
        return Ok(None);
    }
    Ok(Some(out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::store::{Store, Universe};

    #[test]
    fn sum_matches_arithmetic() {
        let mut fresh = VarGen::starting_at(10);
        let xs = Term::list(vec![Term::Var(0), Term::Var(1), Term::Var(2)]);
        let cs = decompose_global(&sym::SUM, &[xs, Term::constant(&sym::EQ), Term::Int(4)], &mut fresh).unwrap().unwrap();
        let store = Store::from_constraints(cs);
        let ints: Vec<Term> = (0..=4).map(Term::Int).collect();
        let u = Universe::uniform(ints);
        let sols = crate::store::projected_solutions(&crate::store::Alternative::new(store, fresh), &[0, 1, 2], &u).unwrap();
        let expected = (0..=4i64)
            .flat_map(|a| (0..=4i64).flat_map(move |b| (0..=4i64).map(move |c| (a, b, c))))
            .filter(|(a, b, c)| a + b + c == 4)
            .count();
        assert_eq!(sols.len(), expected);
    }
}

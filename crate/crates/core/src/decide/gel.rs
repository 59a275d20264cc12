//! Satisfiability for group epistemic logic, by a separate, deliberately
//! plain type elimination: types are found by trying every valuation of
//! the atoms and common-knowledge formulas of the closure, and obligations
//! are checked by graph search.

use std::collections::{BTreeSet, VecDeque};

use super::DecideError;
use crate::formula::ClosureError;
use crate::translate::GelFormula;

/// Largest number of atoms plus common-knowledge formulas accepted.
pub const GEL_BASE_CAP: usize = 22;

/// Whether `phi` has a model.
pub fn gel_sat(phi: &GelFormula) -> Result<bool, DecideError> {
    let mut sigma: BTreeSet<GelFormula> = BTreeSet::new();
    for f in phi.subformulae() {
        sigma.insert(f.nneg());
        sigma.insert(f);
    }
    let sigma: Vec<GelFormula> = sigma.into_iter().collect();
    let base: Vec<usize> = (0..sigma.len())
        .filter(|&i| matches!(sigma[i], GelFormula::Atom(_) | GelFormula::C(..)))
        .collect();
    if base.len() > GEL_BASE_CAP {
        return Err(DecideError::Closure(ClosureError::CapExceeded { cap: GEL_BASE_CAP }));
    }
    let pos = |f: &GelFormula| sigma.iter().position(|g| g == f).expect("closed");

    let mut types: Vec<Vec<bool>> = Vec::new();
    for mask in 0u64..(1u64 << base.len()) {
        let mut val = vec![false; sigma.len()];
        for (bit, &i) in base.iter().enumerate() {
            val[i] = mask >> bit & 1 == 1;
        }
        let truth: Vec<bool> = sigma.iter().map(|f| eval(f, &val, &pos)).collect();
        let coherent = sigma.iter().enumerate().all(|(i, f)| match f {
            GelFormula::C(_, body) => !truth[i] || truth[pos(body)],
            _ => true,
        });
        if coherent {
            types.push(truth);
        }
    }

    let cs: Vec<(usize, &BTreeSet<String>, usize)> = sigma
        .iter()
        .enumerate()
        .filter_map(|(i, f)| match f {
            GelFormula::C(g, body) => Some((i, g, pos(body))),
            _ => None,
        })
        .collect();
    let linked = |s: &[bool], t: &[bool], name: &String| {
        cs.iter()
            .filter(|(_, g, _)| g.contains(name))
            .all(|&(i, _, _)| s[i] == t[i])
    };

    let mut alive = vec![true; types.len()];
    loop {
        let mut changed = false;
        for s in 0..types.len() {
            if !alive[s] {
                continue;
            }
            let fulfilled = cs.iter().filter(|&&(i, _, _)| !types[s][i]).all(|&(_, g, body)| {
                let mut seen = vec![false; types.len()];
                seen[s] = true;
                let mut queue = VecDeque::from([s]);
                while let Some(u) = queue.pop_front() {
                    if !types[u][body] {
                        return true;
                    }
                    for v in 0..types.len() {
                        if alive[v]
                            && !seen[v]
                            && g.iter().any(|a| linked(&types[u], &types[v], a))
                        {
                            seen[v] = true;
                            queue.push_back(v);
                        }
                    }
                }
                false
            });
            if !fulfilled {
                alive[s] = false;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    let root = pos(phi);
    Ok((0..types.len()).any(|s| alive[s] && types[s][root]))
}

fn eval(f: &GelFormula, val: &[bool], pos: &dyn Fn(&GelFormula) -> usize) -> bool {
    match f {
        GelFormula::Falsum => false,
        GelFormula::Atom(_) | GelFormula::C(..) => val[pos(f)],
        GelFormula::Not(g) => !eval(g, val, pos),
        GelFormula::And(a, b) => eval(a, val, pos) && eval(b, val, pos),
    }
}

//! Slow, obviously-correct reference computations shared by the
//! integration tests. Nothing here calls into the search code.

#![allow(dead_code)]

use std::path::PathBuf;
use std::sync::Arc;

use lawvere::{parse_theory, Elem, FiniteAlgebra, Term, Theory};

pub fn theory_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../theories").join(name)
}

pub fn load(name: &str) -> Arc<Theory> {
    let text = std::fs::read_to_string(theory_path(&format!("{name}.thy"))).unwrap();
    Arc::new(parse_theory(&text).unwrap())
}

/// Direct recursive evaluation on the raw tables.
pub fn eval(a: &FiniteAlgebra, t: &Term, env: &[Elem]) -> Elem {
    match t {
        Term::Var(i) => env[*i],
        Term::App(s, args) => {
            let op = a.theory().signature().iter().position(|x| x == s).unwrap();
            let vals: Vec<Elem> = args.iter().map(|x| eval(a, x, env)).collect();
            let cell = vals.iter().fold(0, |acc, &v| acc * a.size() + v);
            a.tables()[op][cell]
        }
    }
}

/// All `len`-tuples over `0..size`, first coordinate slowest.
pub fn all_tuples(size: usize, len: usize) -> Vec<Vec<Elem>> {
    let mut out = vec![vec![]];
    for _ in 0..len {
        out = out.into_iter().flat_map(|t| (0..size).map(move |x| [t.clone(), vec![x]].concat())).collect();
    }
    out
}

pub fn satisfies(a: &FiniteAlgebra) -> bool {
    a.theory()
        .equations()
        .iter()
        .all(|eq| all_tuples(a.size(), eq.var_count).iter().all(|env| eval(a, &eq.lhs, env) == eval(a, &eq.rhs, env)))
}

/// Every labeled model of the given size, by filtering all tables.
pub fn filter_models(theory: &Arc<Theory>, size: usize) -> Vec<FiniteAlgebra> {
    let shapes: Vec<usize> = theory.signature().iter().map(|s| size.pow(s.arity() as u32)).collect();
    let cells: usize = shapes.iter().sum();
    let mut out = Vec::new();
    for flat in all_tuples(size, cells) {
        let mut tables = Vec::new();
        let mut rest = &flat[..];
        for &len in &shapes {
            tables.push(rest[..len].to_vec());
            rest = &rest[len..];
        }
        let a = FiniteAlgebra::new(theory.clone(), size, tables).unwrap();
        if satisfies(&a) {
            out.push(a);
        }
    }
    out
}

pub fn is_hom(map: &[Elem], a: &FiniteAlgebra, b: &FiniteAlgebra) -> bool {
    a.theory().signature().iter().enumerate().all(|(op, s)| {
        all_tuples(a.size(), s.arity()).iter().all(|args| {
            let cell_a = args.iter().fold(0, |acc, &v| acc * a.size() + v);
            let moved: Vec<Elem> = args.iter().map(|&x| map[x]).collect();
            let cell_b = moved.iter().fold(0, |acc, &v| acc * b.size() + v);
            map[a.tables()[op][cell_a]] == b.tables()[op][cell_b]
        })
    })
}

/// Every homomorphism, by trying all `|B|^|A|` maps.
pub fn brute_homs(a: &FiniteAlgebra, b: &FiniteAlgebra) -> Vec<Vec<Elem>> {
    all_tuples(b.size(), a.size()).into_iter().filter(|m| is_hom(m, a, b)).collect()
}

/// Pairwise isomorphism classes, by trying every bijection.
pub fn iso_classes(models: &[FiniteAlgebra]) -> usize {
    let mut reps: Vec<&FiniteAlgebra> = Vec::new();
    for a in models {
        let iso = |b: &&FiniteAlgebra| {
            a.size() == b.size()
                && brute_homs(a, b).iter().any(|m| {
                    let mut seen = m.clone();
                    seen.sort();
                    seen.dedup();
                    seen.len() == a.size()
                })
        };
        if !reps.iter().any(iso) {
            reps.push(a);
        }
    }
    reps.len()
}

/// Natural families `A^n -> A` over `algebras`, chosen one component at a
/// time among all functions and checked against every map found by
/// `brute_homs` between components chosen so far.
pub fn brute_families(algebras: &[FiniteAlgebra], n: usize) -> Vec<Vec<Vec<Elem>>> {
    let homs: Vec<Vec<Vec<Vec<Elem>>>> =
        algebras.iter().map(|a| algebras.iter().map(|b| brute_homs(a, b)).collect()).collect();
    let mut partial: Vec<Vec<Vec<Elem>>> = vec![vec![]];
    for (j, b) in algebras.iter().enumerate() {
        let inputs = all_tuples(b.size(), n);
        let mut next = Vec::new();
        for chosen in &partial {
            for table in all_tuples(b.size(), inputs.len()) {
                let mut family = chosen.clone();
                family.push(table);
                let ok = (0..=j).all(|i| {
                    let pairs = [(i, j), (j, i)];
                    pairs.iter().all(|&(s, t)| {
                        let (src, tgt) = (&algebras[s], &algebras[t]);
                        homs[s][t].iter().all(|f| {
                            all_tuples(src.size(), n).iter().enumerate().all(|(row, input)| {
                                let moved: Vec<Elem> = input.iter().map(|&x| f[x]).collect();
                                let moved_row = moved.iter().fold(0, |acc, &v| acc * tgt.size() + v);
                                f[family[s][row]] == family[t][moved_row]
                            })
                        })
                    })
                });
                if ok {
                    next.push(family);
                }
            }
        }
        partial = next;
    }
    partial
}

//! Finite Boolean fields of sets: generation, atoms, joins, the dyadic fields
//! on a grid of `(0,1]`, and fields pulled back from measure evaluations.
//!
//! A field is stored through its atoms. Members are the unions of atoms and
//! are only listed explicitly for fields with at most [`MEMBER_ENUMERATION_LIMIT`] atoms.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::Zero;
use serde::Serialize;

use crate::convex::{ConvexSpaceSpec, Point};
use crate::error::{Error, Result};
use crate::measures::{measure_eval, FinMeasure};
use crate::rational::{fmt_rational, rat, Rational};

pub const GENERATOR_LIMIT: usize = 16;
pub const MAX_DYADIC_DEPTH: usize = 8;
pub const MEMBER_ENUMERATION_LIMIT: usize = 20;

/// Indices into a field's universe.
pub type Subset = BTreeSet<usize>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SetField {
    /// Names of the universe points, in index order.
    pub universe: Vec<String>,
    pub generators: Vec<Subset>,
    atoms: Vec<Subset>,
}

/// The Boolean closure of at most [`GENERATOR_LIMIT`] subsets.
pub fn generate_field(universe: Vec<String>, generators: Vec<Subset>) -> Result<SetField> {
    if generators.len() > GENERATOR_LIMIT {
        return Err(Error::TooManyGenerators(generators.len()));
    }
    build(universe, generators)
}

fn build(universe: Vec<String>, generators: Vec<Subset>) -> Result<SetField> {
    let n = universe.len();
    if let Some(bad) = generators.iter().flatten().find(|&&x| x >= n) {
        return Err(Error::Invalid(format!(
            "generator point {bad} outside a universe of {n}"
        )));
    }
    // points with the same membership pattern share an atom
    let mut by_signature: BTreeMap<Vec<bool>, Subset> = BTreeMap::new();
    for x in 0..n {
        let signature: Vec<bool> = generators.iter().map(|g| g.contains(&x)).collect();
        by_signature.entry(signature).or_default().insert(x);
    }
    let mut atoms: Vec<Subset> = by_signature.into_values().collect();
    atoms.sort_by_key(|a| a.first().copied());
    Ok(SetField {
        universe,
        generators,
        atoms,
    })
}

impl SetField {
    pub fn atoms(&self) -> &[Subset] {
        &self.atoms
    }

    pub fn universe_set(&self) -> Subset {
        (0..self.universe.len()).collect()
    }

    /// Members are exactly the unions of atoms.
    pub fn contains(&self, s: &Subset) -> bool {
        s.iter().all(|&x| x < self.universe.len())
            && self
                .atoms
                .iter()
                .all(|a| a.is_subset(s) || a.is_disjoint(s))
    }

    /// `log2 |members|`.
    pub fn member_count_log2(&self) -> usize {
        self.atoms.len()
    }

    /// Every member, ordered by the binary code of the atoms it contains.
    pub fn members(&self) -> Result<Vec<Subset>> {
        let k = self.atoms.len();
        if k > MEMBER_ENUMERATION_LIMIT {
            return Err(Error::TooManyAtoms(k));
        }
        Ok((0u32..(1 << k))
            .map(|mask| {
                self.atoms
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| mask >> i & 1 == 1)
                    .flat_map(|(_, a)| a.iter().copied())
                    .collect()
            })
            .collect())
    }

    pub fn describe(&self, s: &Subset) -> String {
        let names: Vec<&str> = s.iter().map(|&i| self.universe[i].as_str()).collect();
        format!("{{{}}}", names.join(","))
    }

    /// Every atom of `self` lies inside an atom of `coarser`.
    pub fn refines(&self, coarser: &SetField) -> bool {
        self.atoms
            .iter()
            .all(|a| coarser.atoms.iter().any(|b| a.is_subset(b)))
    }
}

/// The field generated by both generator lists.
pub fn field_join(a: &SetField, b: &SetField) -> Result<SetField> {
    if a.universe != b.universe {
        return Err(Error::UniverseMismatch(a.universe.len(), b.universe.len()));
    }
    build(
        a.universe.clone(),
        a.generators.iter().chain(&b.generators).cloned().collect(),
    )
}

/// Grid `{k/2^8 : 1 ≤ k ≤ 2^8}` of `(0,1]`.
pub fn dyadic_grid() -> Vec<Rational> {
    let top = 1i64 << MAX_DYADIC_DEPTH;
    (1..=top).map(|k| rat(k, top)).collect()
}

/// `F_n`, generated by `E_{n,k} = (k/2^n, 1]` for `0 ≤ k < 2^n` on the dyadic grid.
pub fn dyadic_field(depth: usize) -> Result<SetField> {
    if depth > MAX_DYADIC_DEPTH {
        return Err(Error::DepthExceeded(depth));
    }
    let grid = dyadic_grid();
    let cells = 1i64 << depth;
    let generators = (0..cells)
        .map(|k| {
            let cut = rat(k, cells);
            grid.iter()
                .enumerate()
                .filter(|(_, x)| **x > cut)
                .map(|(i, _)| i)
                .collect()
        })
        .collect();
    build(grid.iter().map(fmt_rational).collect(), generators)
}

/// Names `P0, P1, …` for a list of measures.
fn measure_names(count: usize) -> Vec<String> {
    (0..count).map(|j| format!("P{j}")).collect()
}

/// `{j : P_j(U) > k/2^depth}` for `0 ≤ k < 2^depth`.
fn ev_generators(measures: &[FinMeasure], u: &BTreeSet<Point>, depth: usize) -> Vec<Subset> {
    let cells = 1i64 << depth;
    let values: Vec<Rational> = measures.iter().map(|p| measure_eval(p, u)).collect();
    (0..cells)
        .map(|k| {
            let cut = rat(k, cells);
            values
                .iter()
                .enumerate()
                .filter(|(_, v)| **v > cut)
                .map(|(j, _)| j)
                .collect()
        })
        .collect()
}

/// `G_{i,depth}` on a finite list of measures: the preimages of `(k/2^depth, 1]` under `ev_U`.
pub fn ev_component(
    measures: &[FinMeasure],
    u: &BTreeSet<Point>,
    depth: usize,
) -> Result<SetField> {
    if depth > MAX_DYADIC_DEPTH {
        return Err(Error::DepthExceeded(depth));
    }
    build(
        measure_names(measures.len()),
        ev_generators(measures, u, depth),
    )
}

/// The diagonal field `G_n = G_{0,n} ∨ G_{1,n-1} ∨ … ∨ G_{n-1,1}`, built
/// directly from all its generators. Terms with `i ≥ |us|` are skipped.
pub fn ev_field(measures: &[FinMeasure], us: &[BTreeSet<Point>], n: usize) -> Result<SetField> {
    if n > MAX_DYADIC_DEPTH {
        return Err(Error::DepthExceeded(n));
    }
    let generators = (0..n.min(us.len()))
        .flat_map(|i| ev_generators(measures, &us[i], n - i))
        .collect();
    build(measure_names(measures.len()), generators)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AgreementReport {
    pub generators_agree: bool,
    /// `P(V) = Q(V)` for every member `V`.
    pub field_agrees: bool,
    /// An atom with different masses, when the field does not agree.
    pub distinguishing: Option<String>,
}

/// Compares `P` and `Q` on a field whose universe names points of `space`.
/// Agreement on the field is decided on atoms, since members are disjoint unions of atoms.
pub fn agreement_check(
    p: &FinMeasure,
    q: &FinMeasure,
    field: &SetField,
    space: &ConvexSpaceSpec,
) -> Result<AgreementReport> {
    let index: BTreeMap<&str, usize> = field
        .universe
        .iter()
        .enumerate()
        .map(|(i, s)| (s.as_str(), i))
        .collect();
    let masses = |m: &FinMeasure| -> Result<BTreeMap<usize, Rational>> {
        let mut out = BTreeMap::new();
        for (x, w) in m.atoms() {
            let name = space.fmt_point(x);
            let i = *index
                .get(name.as_str())
                .ok_or(Error::SupportEscapes(name.clone()))?;
            out.insert(i, w.clone());
        }
        Ok(out)
    };
    let (mp, mq) = (masses(p)?, masses(q)?);
    let mass = |m: &BTreeMap<usize, Rational>, s: &Subset| -> Rational {
        s.iter()
            .filter_map(|i| m.get(i))
            .fold(Rational::zero(), |acc, w| acc + w)
    };
    let generators_agree = field
        .generators
        .iter()
        .all(|g| mass(&mp, g) == mass(&mq, g));
    let distinguishing = field
        .atoms
        .iter()
        .find(|a| mass(&mp, a) != mass(&mq, a))
        .map(|a| field.describe(a));
    Ok(AgreementReport {
        generators_agree,
        field_agrees: distinguishing.is_none(),
        distinguishing,
    })
}

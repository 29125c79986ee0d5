use serde::Serialize;

use super::{default_p_grid, Carrier, ConvexSpaceSpec, Point, SpaceKind};
use crate::error::{Error, Result};

/// Largest finite carrier classified by exhaustive pair tests.
const EXHAUSTIVE_KIND_LIMIT: usize = 128;

/// The order `y ≤ x` iff `p·y + (1-p)·x = x` on a finite discrete space.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PosetReport {
    pub elements: Vec<Point>,
    /// Pairs `(y, x)` of element indices with `y ≤ x`, reflexive pairs included.
    pub leq: Vec<(usize, usize)>,
    pub is_total_order: bool,
    /// `(a, b, a+b)` for the first pair that combines to a third element.
    pub witness: Option<(Point, Point, Point)>,
}

impl PosetReport {
    pub fn le(&self, y: usize, x: usize) -> bool {
        self.leq.contains(&(y, x))
    }
}

pub fn discrete_poset(space: &ConvexSpaceSpec) -> Result<PosetReport> {
    let elements = space
        .enumerate()
        .ok_or_else(|| Error::InfiniteCarrier(space.id.clone()))?;
    let grid = default_p_grid();
    let n = elements.len();
    // combined[a][b] is the p-independent value of p·a + (1-p)·b
    let mut combined = vec![vec![0usize; n]; n];
    for a in 0..n {
        for b in 0..n {
            let first = space.combine2(&grid[0], &elements[a], &elements[b])?;
            for p in &grid[1..] {
                if space.combine2(p, &elements[a], &elements[b])? != first {
                    return Err(Error::NotDiscrete(space.id.clone()));
                }
            }
            combined[a][b] = elements
                .iter()
                .position(|e| *e == first)
                .expect("combination stays in carrier");
        }
    }
    let mut leq = Vec::new();
    let mut witness = None;
    let mut total = true;
    for y in 0..n {
        for x in 0..n {
            if combined[y][x] == x {
                leq.push((y, x));
            }
        }
    }
    for a in 0..n {
        for b in (a + 1)..n {
            let c = combined[a][b];
            if c != a && c != b {
                total = false;
                if witness.is_none() {
                    witness = Some((
                        elements[a].clone(),
                        elements[b].clone(),
                        elements[c].clone(),
                    ));
                }
            }
            if !leq.contains(&(a, b)) && !leq.contains(&(b, a)) {
                total = false;
            }
        }
    }
    Ok(PosetReport {
        elements,
        leq,
        is_total_order: total,
        witness,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum KindDecision {
    /// Every pair of a finite carrier tested on the p-grid.
    Exhaustive,
    /// Known answer for the carrier family.
    Analytic,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KindReport {
    pub kind: SpaceKind,
    pub decision: KindDecision,
    /// A pair whose combination does not depend on `p`.
    pub constant_pair: Option<(Point, Point)>,
    /// A pair whose combination varies with `p`.
    pub varying_pair: Option<(Point, Point)>,
}

pub fn classify_kind(space: &ConvexSpaceSpec) -> Result<KindReport> {
    if let Some(elements) = space
        .enumerate()
        .filter(|e| e.len() <= EXHAUSTIVE_KIND_LIMIT)
    {
        let grid = default_p_grid();
        let mut constant_pair = None;
        let mut varying_pair = None;
        for (i, x) in elements.iter().enumerate() {
            for y in &elements[i + 1..] {
                let first = space.combine2(&grid[0], x, y)?;
                let mut constant = true;
                for p in &grid[1..] {
                    if space.combine2(p, x, y)? != first {
                        constant = false;
                        break;
                    }
                }
                let slot = if constant {
                    &mut constant_pair
                } else {
                    &mut varying_pair
                };
                if slot.is_none() {
                    *slot = Some((x.clone(), y.clone()));
                }
            }
        }
        let kind = match (&constant_pair, &varying_pair) {
            (Some(_), Some(_)) => SpaceKind::Mixed,
            (None, Some(_)) => SpaceKind::Geometric,
            (Some(_), None) => SpaceKind::Discrete,
            (None, None) => space.kind,
        };
        return Ok(KindReport {
            kind,
            decision: KindDecision::Exhaustive,
            constant_pair,
            varying_pair,
        });
    }
    analytic_kind(space).map(|kind| KindReport {
        kind,
        decision: KindDecision::Analytic,
        constant_pair: None,
        varying_pair: None,
    })
}

fn analytic_kind(space: &ConvexSpaceSpec) -> Result<SpaceKind> {
    Ok(match &space.carrier {
        Carrier::Box { .. } | Carrier::Simplex { .. } => SpaceKind::Geometric,
        // ∞ absorbs every finite point while finite pairs vary with p
        Carrier::ExtendedReal | Carrier::ExtendedNonneg => SpaceKind::Mixed,
        Carrier::Chain { .. } | Carrier::Labels { .. } => SpaceKind::Discrete,
        Carrier::Product(a, b) => {
            if a.finite_size() == Some(1) {
                return classify_kind(b).map(|r| r.kind);
            }
            if b.finite_size() == Some(1) {
                return classify_kind(a).map(|r| r.kind);
            }
            let (ka, kb) = (classify_kind(a)?.kind, classify_kind(b)?.kind);
            if ka == kb {
                ka
            } else {
                SpaceKind::Mixed
            }
        }
        Carrier::Semidirect { components, .. } => {
            if components.len() == 1 {
                return classify_kind(&components[0]).map(|r| r.kind);
            }
            SpaceKind::Mixed
        }
    })
}

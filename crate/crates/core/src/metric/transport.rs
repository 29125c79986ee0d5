//! Exact transportation simplex for Wasserstein-1 on finite supports.
//!
//! Costs are compared lexicographically as `(mass on ∞ cells, finite cost)`,
//! so a plan avoids infinite distances whenever some feasible plan does.

use std::collections::VecDeque;

use num_traits::{One, Signed, Zero};
use serde::Serialize;

use super::{distance, ExtMetric};
use crate::convex::{product_space, Point};
use crate::error::{Error, Result};
use crate::measures::{Dist, FinMeasure};
use crate::rational::{ExtValue, Rational};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Lp,
    Brute,
}

/// A joint measure on `X × X` together with its intended marginals.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Coupling {
    pub joint: FinMeasure,
    pub left: FinMeasure,
    pub right: FinMeasure,
}

impl Coupling {
    /// Projects the joint onto both factors and compares exactly.
    pub fn marginals_match(&self) -> bool {
        let project = |first: bool| {
            self.joint.dist.map(|xy| match xy {
                Point::Pair(a, b) => {
                    if first {
                        (**a).clone()
                    } else {
                        (**b).clone()
                    }
                }
                other => other.clone(),
            })
        };
        project(true) == self.left.dist && project(false) == self.right.dist
    }

    /// `Σ J(x, y) · d(x, y)`.
    pub fn cost(&self, metric: &ExtMetric) -> ExtValue {
        self.joint
            .atoms()
            .map(|(xy, w)| match xy {
                Point::Pair(a, b) => distance(&metric.space, &metric.metric, a, b).scale(w),
                _ => ExtValue::Infinity,
            })
            .sum()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TransportResult {
    pub cost: ExtValue,
    pub plan: Coupling,
    pub method: Method,
}

/// `(mass on infinite cells, finite cost)`.
pub(super) type Lex = (Rational, Rational);

pub(super) fn lex_add(a: &Lex, b: &Lex) -> Lex {
    (&a.0 + &b.0, &a.1 + &b.1)
}

fn lex_sub(a: &Lex, b: &Lex) -> Lex {
    (&a.0 - &b.0, &a.1 - &b.1)
}

pub(super) fn lex_scale(a: &Lex, w: &Rational) -> Lex {
    (&a.0 * w, &a.1 * w)
}

fn lex_zero() -> Lex {
    (Rational::zero(), Rational::zero())
}

/// A balanced transportation instance built from two measures.
pub(super) struct Problem {
    pub rows: Vec<(Point, Rational)>,
    pub cols: Vec<(Point, Rational)>,
    pub cost: Vec<Vec<Lex>>,
    left: FinMeasure,
    right: FinMeasure,
    metric: ExtMetric,
}

impl Problem {
    pub fn new(p: &FinMeasure, q: &FinMeasure, metric: &ExtMetric) -> Result<Problem> {
        for m in [p, q] {
            if m.space_id != metric.space.id {
                return Err(Error::SpaceMismatch {
                    expected: metric.space.id.clone(),
                    found: m.space_id.clone(),
                });
            }
        }
        let rows: Vec<(Point, Rational)> = p.atoms().map(|(x, w)| (x.clone(), w.clone())).collect();
        let cols: Vec<(Point, Rational)> = q.atoms().map(|(x, w)| (x.clone(), w.clone())).collect();
        let cost = rows
            .iter()
            .map(|(x, _)| {
                cols.iter()
                    .map(
                        |(y, _)| match distance(&metric.space, &metric.metric, x, y) {
                            ExtValue::Finite(c) => (Rational::zero(), c),
                            ExtValue::Infinity => (Rational::one(), Rational::zero()),
                        },
                    )
                    .collect()
            })
            .collect();
        Ok(Problem {
            rows,
            cols,
            cost,
            left: p.clone(),
            right: q.clone(),
            metric: metric.clone(),
        })
    }

    pub fn total(&self, flow: &[Vec<Rational>]) -> Lex {
        let mut total = lex_zero();
        for (i, row) in flow.iter().enumerate() {
            for (j, f) in row.iter().enumerate() {
                if !f.is_zero() {
                    total = lex_add(&total, &lex_scale(&self.cost[i][j], f));
                }
            }
        }
        total
    }

    /// Packages an optimal flow; an optimum that still moves mass across an
    /// infinite distance has cost `∞` and reports the independent coupling.
    pub fn finish(&self, flow: &[Vec<Rational>], method: Method) -> TransportResult {
        let (inf_mass, finite) = self.total(flow);
        let space = product_space(&self.metric.space, &self.metric.space);
        let mut atoms = Vec::new();
        let cost = if inf_mass.is_positive() {
            for (x, a) in &self.rows {
                for (y, b) in &self.cols {
                    atoms.push((Point::pair(x.clone(), y.clone()), a * b));
                }
            }
            ExtValue::Infinity
        } else {
            for (i, row) in flow.iter().enumerate() {
                for (j, f) in row.iter().enumerate() {
                    if !f.is_zero() {
                        atoms.push((
                            Point::pair(self.rows[i].0.clone(), self.cols[j].0.clone()),
                            f.clone(),
                        ));
                    }
                }
            }
            ExtValue::Finite(finite)
        };
        let joint = FinMeasure {
            space_id: space.id,
            dist: Dist::from_weighted(atoms).expect("plan is a probability"),
        };
        TransportResult {
            cost,
            plan: Coupling {
                joint,
                left: self.left.clone(),
                right: self.right.clone(),
            },
            method,
        }
    }
}

/// Exact `d_W(P, Q)` with an optimal plan.
pub fn wasserstein(p: &FinMeasure, q: &FinMeasure, metric: &ExtMetric) -> Result<TransportResult> {
    let problem = Problem::new(p, q, metric)?;
    let supply: Vec<Rational> = problem.rows.iter().map(|(_, w)| w.clone()).collect();
    let demand: Vec<Rational> = problem.cols.iter().map(|(_, w)| w.clone()).collect();
    let flow = network_simplex(&problem.cost, &supply, &demand);
    Ok(problem.finish(&flow, Method::Lp))
}

/// Primal transportation simplex with Bland's rule: the entering cell is the
/// lowest-index cell with negative reduced cost, the leaving cell the
/// lowest-index blocking cell. Cells are indexed row-major.
pub(super) fn network_simplex(
    cost: &[Vec<Lex>],
    supply: &[Rational],
    demand: &[Rational],
) -> Vec<Vec<Rational>> {
    let (n, m) = (supply.len(), demand.len());
    let mut flow = vec![vec![Rational::zero(); m]; n];
    let mut basic = vec![vec![false; m]; n];

    // northwest corner: a staircase of n + m - 1 basic cells
    let (mut s, mut d) = (supply.to_vec(), demand.to_vec());
    let (mut i, mut j) = (0, 0);
    while j < m {
        let x = s[i].clone().min(d[j].clone());
        flow[i][j] = x.clone();
        basic[i][j] = true;
        s[i] -= &x;
        d[j] -= &x;
        if i == n - 1 {
            j += 1;
        } else if j == m - 1 || s[i].is_zero() {
            i += 1;
        } else {
            j += 1;
        }
    }

    loop {
        let (u, v) = potentials(cost, &basic);
        let entering = (0..n * m).map(|k| (k / m, k % m)).find(|&(i, j)| {
            !basic[i][j] && lex_sub(&lex_sub(&cost[i][j], &u[i]), &v[j]) < lex_zero()
        });
        let Some((ei, ej)) = entering else { break };

        let path = tree_path(&basic, ej, ei);
        // path runs column ej -> row ei; odd positions lose flow
        let minus: Vec<(usize, usize)> = path.iter().step_by(2).copied().collect();
        let theta = minus
            .iter()
            .map(|&(i, j)| flow[i][j].clone())
            .min()
            .expect("cycle has a minus cell");
        let leaving = *minus
            .iter()
            .filter(|&&(i, j)| flow[i][j] == theta)
            .min_by_key(|&&(i, j)| i * m + j)
            .expect("a blocking cell");
        for (k, &(i, j)) in path.iter().enumerate() {
            if k % 2 == 0 {
                flow[i][j] -= &theta;
            } else {
                flow[i][j] += &theta;
            }
        }
        flow[ei][ej] = theta;
        basic[ei][ej] = true;
        basic[leaving.0][leaving.1] = false;
    }
    flow
}

/// Dual potentials with `u_0 = 0` and `u_i + v_j = c_ij` on basic cells.
fn potentials(cost: &[Vec<Lex>], basic: &[Vec<bool>]) -> (Vec<Lex>, Vec<Lex>) {
    let (n, m) = (basic.len(), basic[0].len());
    let mut u: Vec<Option<Lex>> = vec![None; n];
    let mut v: Vec<Option<Lex>> = vec![None; m];
    u[0] = Some(lex_zero());
    let mut queue = VecDeque::from([(true, 0usize)]);
    while let Some((is_row, k)) = queue.pop_front() {
        if is_row {
            let ui = u[k].clone().expect("set before queued");
            for j in 0..m {
                if basic[k][j] && v[j].is_none() {
                    v[j] = Some(lex_sub(&cost[k][j], &ui));
                    queue.push_back((false, j));
                }
            }
        } else {
            let vj = v[k].clone().expect("set before queued");
            for i in 0..n {
                if basic[i][k] && u[i].is_none() {
                    u[i] = Some(lex_sub(&cost[i][k], &vj));
                    queue.push_back((true, i));
                }
            }
        }
    }
    (
        u.into_iter()
            .map(|x| x.expect("basis spans all rows"))
            .collect(),
        v.into_iter()
            .map(|x| x.expect("basis spans all columns"))
            .collect(),
    )
}

/// Basic cells on the tree path from column `col` to row `row`, in order.
fn tree_path(basic: &[Vec<bool>], col: usize, row: usize) -> Vec<(usize, usize)> {
    let (n, m) = (basic.len(), basic[0].len());
    // nodes: rows 0..n, columns n..n+m
    let mut parent: Vec<Option<usize>> = vec![None; n + m];
    let start = n + col;
    parent[start] = Some(start);
    let mut queue = VecDeque::from([start]);
    while let Some(node) = queue.pop_front() {
        if node == row {
            break;
        }
        let neighbours: Vec<usize> = if node < n {
            (0..m).filter(|&j| basic[node][j]).map(|j| n + j).collect()
        } else {
            (0..n).filter(|&i| basic[i][node - n]).collect()
        };
        for next in neighbours {
            if parent[next].is_none() {
                parent[next] = Some(node);
                queue.push_back(next);
            }
        }
    }
    let mut cells = Vec::new();
    let mut node = row;
    while node != start {
        let prev = parent[node].expect("row reachable in the spanning tree");
        let cell = if node < n {
            (node, prev - n)
        } else {
            (prev, node - n)
        };
        cells.push(cell);
        node = prev;
    }
    cells.reverse();
    cells
}

//! Seeded generators for random measures, meta-measures and 3-level towers.

use rand::Rng;

use crate::convex::{label_space, ordered_labels, ChainRule, ConvexSpaceSpec, WeightVector};
use crate::measures::{Dist, FinMeasure, MetaMeasure};
use crate::metric::{metric_closure, Metric};
use crate::rational::{int, rat, ExtValue, Rational};

/// `n` positive weights with small denominators.
pub fn random_weights<R: Rng + ?Sized>(rng: &mut R, n: usize) -> WeightVector {
    let raw: Vec<i64> = (0..n).map(|_| rng.gen_range(1..=6)).collect();
    let total: i64 = raw.iter().sum();
    WeightVector::new(raw.into_iter().map(|r| rat(r, total)).collect()).expect("normalized")
}

/// A measure with `1..=max_atoms` atoms (fewer after merging repeated draws).
pub fn random_measure<R: Rng + ?Sized>(
    space: &ConvexSpaceSpec,
    rng: &mut R,
    max_atoms: usize,
) -> FinMeasure {
    let n = rng.gen_range(1..=max_atoms);
    let w = random_weights(rng, n);
    let atoms: Vec<_> = w
        .as_slice()
        .iter()
        .map(|w| (space.sample(rng), w.clone()))
        .collect();
    FinMeasure::new(space, atoms).expect("sampled points lie in the space")
}

pub fn random_meta<R: Rng + ?Sized>(
    space: &ConvexSpaceSpec,
    rng: &mut R,
    max_atoms: usize,
) -> MetaMeasure {
    let n = rng.gen_range(1..=max_atoms);
    let w = random_weights(rng, n);
    let atoms: Vec<(FinMeasure, Rational)> = w
        .as_slice()
        .iter()
        .map(|w| (random_measure(space, rng, max_atoms), w.clone()))
        .collect();
    MetaMeasure::new(atoms).expect("inner measures share the space")
}

/// A distribution over meta-measures: the third level of the tower.
pub fn random_tower<R: Rng + ?Sized>(
    space: &ConvexSpaceSpec,
    rng: &mut R,
    max_atoms: usize,
) -> Dist<MetaMeasure> {
    let n = rng.gen_range(1..=max_atoms);
    let w = random_weights(rng, n);
    Dist::from_weighted(
        w.as_slice()
            .iter()
            .map(|w| (random_meta(space, rng, max_atoms), w.clone()))
            .collect::<Vec<_>>(),
    )
    .expect("normalized")
}

/// A discrete space on 2 to 4 labels: an ordered chain half the time,
/// otherwise a random symmetric idempotent table.
pub fn random_label_space<R: Rng + ?Sized>(rng: &mut R, id: &str) -> ConvexSpaceSpec {
    let n = rng.gen_range(2..=4);
    let names: Vec<String> = (0..n).map(|i| format!("a{i}")).collect();
    let names: Vec<&str> = names.iter().map(String::as_str).collect();
    if rng.gen_bool(0.5) {
        let rule = if rng.gen_bool(0.5) {
            ChainRule::Min
        } else {
            ChainRule::Max
        };
        return ordered_labels(id, &names, rule).expect("ordered labels are valid");
    }
    let mut table: Vec<Vec<usize>> = (0..n).map(|a| vec![a; n]).collect();
    for a in 0..n {
        for b in a + 1..n {
            let c = if rng.gen_bool(0.5) {
                [a, b][rng.gen_range(0..2)]
            } else {
                rng.gen_range(0..n)
            };
            table[a][b] = c;
            table[b][a] = c;
        }
    }
    label_space(id, &names, table).expect("symmetric idempotent table")
}

/// A metric on `n` points: one of the named discrete metrics, or the
/// shortest-path closure of random weights in `{1, 2, 3, ∞}`.
pub fn random_discrete_metric<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Metric {
    match rng.gen_range(0..5) {
        0 => Metric::Discrete,
        1 => Metric::DiscreteInf,
        2 => Metric::Order,
        _ => {
            let mut rows = vec![vec![ExtValue::zero(); n]; n];
            for i in 0..n {
                for j in i + 1..n {
                    let v = match rng.gen_range(0..4) {
                        3 => ExtValue::Infinity,
                        k => ExtValue::Finite(int(k + 1)),
                    };
                    rows[i][j] = v.clone();
                    rows[j][i] = v;
                }
            }
            Metric::Table(metric_closure(rows))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::check::CheckConfig;
    use crate::convex::builtin::all;
    use num_traits::One;

    #[test]
    fn samples_are_normalized_and_bounded() {
        let cfg = CheckConfig::default();
        for space in all() {
            let mut rng = cfg.rng(&space.id);
            for _ in 0..50 {
                let p = random_measure(&space, &mut rng, 5);
                assert!(p.atoms().count() <= 5);
                assert!(p.atoms().map(|(_, w)| w.clone()).sum::<Rational>().is_one());
                let t = random_tower(&space, &mut rng, 3);
                assert!(t.len() <= 3);
            }
        }
    }

    #[test]
    fn random_discrete_metrics_fit_random_spaces() {
        let mut rng = CheckConfig::default().rng("labels");
        for k in 0..40 {
            let space = random_label_space(&mut rng, &format!("R{k}"));
            let n = space.finite_size().unwrap();
            let metric = random_discrete_metric(&mut rng, n);
            let m = crate::metric::ExtMetric::new(&space, metric).unwrap();
            assert!(crate::metric::metric_axioms(&m, &CheckConfig::default()).passed());
        }
    }
}

//! Affine maps into the extended line that separate the points of each
//! built-in space family.

use crate::convex::builtin::extended_real;
use crate::convex::{
    char_map, enumerate_ideals, glue_point, AffineMap, Carrier, ChainRule, ConvexSpaceSpec, Point,
};
use crate::rational::{ExtValue, Rational};

type Rule = Box<dyn Fn(&Point) -> Option<Point> + Send + Sync>;

fn ext(v: Rational) -> Point {
    Point::Ext(ExtValue::Finite(v))
}

/// A coseparating family of affine maps `space → ℝ∞`.
///
/// Geometric carriers use coordinates (and reflected coordinates on boxes),
/// discrete carriers the `{0, ∞}` maps of their ideals, products pull back the
/// maps of each factor, and semidirect products lift component maps along the
/// base order.
pub fn coseparating_maps(space: &ConvexSpaceSpec) -> Vec<AffineMap> {
    let target = extended_real();
    let map = |name: String, rule: Rule| {
        AffineMap::new(name, space.clone(), target.clone(), move |x| rule(x))
    };
    match &space.carrier {
        Carrier::Box { hi, .. } => {
            let mut maps = Vec::new();
            for i in 0..hi.len() {
                maps.push(map(
                    format!("x{i}"),
                    Box::new(move |x| Some(ext(x.as_vector()?[i].clone()))),
                ));
                let top = hi[i].clone();
                maps.push(map(
                    format!("hi{i}-x{i}"),
                    Box::new(move |x| Some(ext(&top - &x.as_vector()?[i]))),
                ));
            }
            maps
        }
        Carrier::Simplex { dim } => (0..*dim)
            .map(|i| {
                map(
                    format!("x{i}"),
                    Box::new(move |x| Some(ext(x.as_vector()?[i].clone()))),
                )
            })
            .collect(),
        Carrier::ExtendedReal | Carrier::ExtendedNonneg => vec![
            map("id".into(), Box::new(|x| Some(x.clone()))),
            map(
                "chi{inf}".into(),
                Box::new(|x| {
                    Some(Point::Ext(if x.as_ext()?.is_infinite() {
                        ExtValue::Infinity
                    } else {
                        ExtValue::zero()
                    }))
                }),
            ),
        ],
        Carrier::Chain { size, rule, .. } => {
            // ideals are down-sets {0..k} under min and up-sets {k..} under max
            let (size, rule) = (*size, *rule);
            (0..size.saturating_sub(1))
                .map(|k| {
                    let (name, inside): (String, Box<dyn Fn(usize) -> bool + Send + Sync>) =
                        match rule {
                            ChainRule::Min => (format!("chi{{0..{k}}}"), Box::new(move |i| i <= k)),
                            ChainRule::Max => (
                                format!("chi{{{}..{}}}", k + 1, size - 1),
                                Box::new(move |i| i > k),
                            ),
                        };
                    map(
                        name,
                        Box::new(move |x| match x {
                            Point::Label(i) => Some(Point::Ext(if inside(*i) {
                                ExtValue::Infinity
                            } else {
                                ExtValue::zero()
                            })),
                            _ => None,
                        }),
                    )
                })
                .collect()
        }
        Carrier::Labels { .. } => enumerate_ideals(space)
            .map(|ideals| ideals.iter().filter_map(|i| char_map(i).ok()).collect())
            .unwrap_or_default(),
        Carrier::Product(a, b) => {
            let mut maps = Vec::new();
            for (first, factor) in [(true, a), (false, b)] {
                for m in coseparating_maps(factor) {
                    let name = format!("{}∘pi{}", m.name, if first { 1 } else { 2 });
                    maps.push(map(
                        name,
                        Box::new(move |x| match x {
                            Point::Pair(l, r) => m.apply(if first { l } else { r }).ok(),
                            _ => None,
                        }),
                    ));
                }
            }
            maps
        }
        Carrier::Semidirect {
            base,
            components,
            glues,
        } => {
            let n = components.len();
            let half = Rational::new(1.into(), 2.into());
            // absorbs[i][j]: branch j survives a combination with branch i
            let absorbs: Vec<Vec<bool>> = (0..n)
                .map(|i| {
                    (0..n)
                        .map(|j| {
                            base.combine2(&half, &Point::Label(i), &Point::Label(j))
                                .ok()
                                == Some(Point::Label(j))
                        })
                        .collect()
                })
                .collect();
            let mut maps = Vec::new();
            for (b, component) in components.iter().enumerate() {
                // ∞ on branch b and every branch that absorbs it, 0 below
                let above: Vec<bool> = (0..n).map(|i| i == b || absorbs[b][i]).collect();
                let label = base.fmt_point(&Point::Label(b));
                if above.iter().any(|a| !a) {
                    let above = above.clone();
                    maps.push(map(
                        format!("chi{{{label}..}}"),
                        Box::new(move |x| match x {
                            Point::Branch(i, _) => Some(Point::Ext(if above[*i] {
                                ExtValue::Infinity
                            } else {
                                ExtValue::zero()
                            })),
                            _ => None,
                        }),
                    ));
                }
                for m in coseparating_maps(component) {
                    // below b: the value at the glue point; above b: ∞
                    let below: Vec<Option<Point>> = (0..n)
                        .map(|i| {
                            if i != b && absorbs[i][b] {
                                glue_point(glues, i, b).and_then(|g| m.apply(g).ok())
                            } else {
                                None
                            }
                        })
                        .collect();
                    maps.push(map(
                        format!("{}@{label}", m.name),
                        Box::new(move |x| match x {
                            Point::Branch(i, inner) if *i == b => m.apply(inner).ok(),
                            Point::Branch(i, _) => match &below[*i] {
                                Some(v) => Some(v.clone()),
                                None => Some(Point::Ext(ExtValue::Infinity)),
                            },
                            _ => None,
                        }),
                    ));
                }
            }
            maps
        }
    }
}

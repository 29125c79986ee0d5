//! The built-in spaces used by the CLI, the law suites and the examples.

use super::{
    chain, interval, label_space, ordered_labels, product_space, semidirect_space,
    truncated_naturals, Carrier, ChainRule, ConvexSpaceSpec, Glue, Point, SpaceKind,
};
use crate::rational::{int, Rational};

pub const NATURALS_TRUNCATION: usize = 32;

pub fn unit_interval() -> ConvexSpaceSpec {
    interval("I", int(0), int(1))
}

/// `[0,1] × [0,2]`.
pub fn rational_box() -> ConvexSpaceSpec {
    ConvexSpaceSpec::new(
        "box",
        SpaceKind::Geometric,
        Carrier::Box {
            lo: vec![int(0), int(0)],
            hi: vec![int(1), int(2)],
        },
    )
}

pub fn simplex3() -> ConvexSpaceSpec {
    ConvexSpaceSpec::new(
        "simplex3",
        SpaceKind::Geometric,
        Carrier::Simplex { dim: 3 },
    )
}

/// `ℝ∞ = ℚ ∪ {+∞}`. Declared geometric: it is the one-point compactification of a
/// geometric space, although the exhaustive pair test sees the absorbing `∞`.
pub fn extended_real() -> ConvexSpaceSpec {
    ConvexSpaceSpec::new("Rinf", SpaceKind::Geometric, Carrier::ExtendedReal)
}

pub fn extended_nonneg() -> ConvexSpaceSpec {
    ConvexSpaceSpec::new("Rplus", SpaceKind::Geometric, Carrier::ExtendedNonneg)
}

pub fn naturals_min() -> ConvexSpaceSpec {
    truncated_naturals("N-min", NATURALS_TRUNCATION)
}

pub fn chain_max() -> ConvexSpaceSpec {
    chain("chain-max", 5, ChainRule::Max)
}

/// The three-point space `C = {0, u, 1}` with `p·0 + (1-p)·1 = u` and `u` absorbing.
pub fn space_c() -> ConvexSpaceSpec {
    // label order 0, 1, u
    label_space(
        "C",
        &["0", "1", "u"],
        vec![vec![0, 2, 2], vec![2, 1, 2], vec![2, 2, 2]],
    )
    .expect("space C table is valid")
}

/// `2 = {0, 1}` with `p·0 + (1-p)·1 = 1`.
pub fn two() -> ConvexSpaceSpec {
    ordered_labels("2", &["0", "1"], ChainRule::Max).expect("two-point space is valid")
}

pub fn one_point() -> ConvexSpaceSpec {
    label_space("pt", &["*"], vec![vec![0]]).expect("one-point space is valid")
}

/// `[0,1] × {0,1,2,3}` with the min rule on the discrete factor.
pub fn product_i_d() -> ConvexSpaceSpec {
    product_space(&unit_interval(), &chain("D4", 4, ChainRule::Min)).with_id("IxD")
}

/// Two intervals `[0,l]` and `[0,h]` over the base `2 = {L < H}`: the `L` branch is
/// glued to the base point `0` of `H`, so `p·xL + (1-p)·yH = ((1-p)·y)H`.
pub fn meng_space(l: Rational, h: Rational) -> ConvexSpaceSpec {
    let base = ordered_labels("LH", &["L", "H"], ChainRule::Max).expect("base is valid");
    let comps = vec![interval("[0,L]", int(0), l), interval("[0,H]", int(0), h)];
    let glue = Glue {
        from: 0,
        to: 1,
        point: Point::scalar(int(0)),
    };
    semidirect_space("meng", &base, comps, vec![glue]).expect("meng space is valid")
}

/// Every built-in space, in registry order.
pub fn all() -> Vec<ConvexSpaceSpec> {
    vec![
        unit_interval(),
        rational_box(),
        simplex3(),
        extended_real(),
        extended_nonneg(),
        naturals_min(),
        chain_max(),
        product_i_d(),
        meng_space(int(1), int(1)),
        space_c(),
        two(),
        one_point(),
    ]
}

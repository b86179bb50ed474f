//! Fixed-order Gauss-Legendre rule on [-1, 1].

/// 8-node Gauss-Legendre nodes and weights.
pub const GAUSS_LEGENDRE_8: ([f64; 8], [f64; 8]) = (
    [
        -0.960_289_856_497_536_2,
        -0.796_666_477_413_626_7,
        -0.525_532_409_916_329,
        -0.183_434_642_495_649_8,
        0.183_434_642_495_649_8,
        0.525_532_409_916_329,
        0.796_666_477_413_626_7,
        0.960_289_856_497_536_2,
    ],
    [
        0.101_228_536_290_376_69,
        0.222_381_034_453_374_34,
        0.313_706_645_877_887_05,
        0.362_683_783_378_361_77,
        0.362_683_783_378_361_77,
        0.313_706_645_877_887_05,
        0.222_381_034_453_374_34,
        0.101_228_536_290_376_69,
    ],
);

/// Integrates `f` over `[a, b]` with the 8-node rule.
pub fn gauss_legendre<F, E>(f: &mut F, a: f64, b: f64) -> Result<f64, E>
where
    F: FnMut(f64) -> Result<f64, E>,
{
    let (nodes, weights) = GAUSS_LEGENDRE_8;
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut acc = 0.0;
    for (t, w) in nodes.iter().zip(weights.iter()) {
        acc += w * f(mid + half * t)?;
    }
    Ok(acc * half)
}

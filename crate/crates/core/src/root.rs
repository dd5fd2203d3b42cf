//! Bracketing root finder for monotone scalar functions.

use crate::error::{Error, Result};

/// Outcome of [`bisect_secant`].
#[derive(Debug, Clone, Copy)]
pub struct RootResult {
    pub root: f64,
    pub value: f64,
    pub iterations: usize,
}

/// Finds a root of an increasing function `g` on `[lo, hi]` by bisection down to
/// bracket width `xtol`, followed by a single secant polish kept inside the bracket.
///
/// `g` is only assumed continuous and increasing; no derivative is used.
pub fn bisect_secant<G: FnMut(f64) -> f64>(mut g: G, lo: f64, hi: f64, xtol: f64) -> Result<RootResult> {
    let (mut a, mut b) = (lo, hi);
    let (mut ga, mut gb) = (g(a), g(b));
    if ga == 0.0 {
        return Ok(RootResult { root: a, value: 0.0, iterations: 0 });
    }
    if gb == 0.0 {
        return Ok(RootResult { root: b, value: 0.0, iterations: 0 });
    }
    if !(ga < 0.0 && gb > 0.0) {
        return Err(Error::BracketFailure { lo, hi, g_lo: ga, g_hi: gb });
    }
    let mut it = 0;
    while b - a > xtol && it < 200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let gm = g(m);
        it += 1;
        if gm == 0.0 {
            return Ok(RootResult { root: m, value: 0.0, iterations: it });
        }
        if gm < 0.0 {
            a = m;
            ga = gm;
        } else {
            b = m;
            gb = gm;
        }
    }
    // secant polish
    let s = a - ga * (b - a) / (gb - ga);
    let (root, value) = if s > a && s < b {
        let gs = g(s);
        it += 1;
        let best = [(a, ga), (b, gb), (s, gs)]
            .into_iter()
            .min_by(|x, y| x.1.abs().partial_cmp(&y.1.abs()).unwrap())
            .unwrap();
        best
    } else if ga.abs() < gb.abs() {
        (a, ga)
    } else {
        (b, gb)
    };
    Ok(RootResult { root, value, iterations: it })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_sqrt_two() {
        let r = bisect_secant(|x| x * x - 2.0, 0.0, 2.0, 1e-13).unwrap();
        assert!((r.root - 2f64.sqrt()).abs() < 1e-13);
    }

    #[test]
    fn reports_bad_bracket() {
        let e = bisect_secant(|x| x + 5.0, 0.0, 1.0, 1e-12).unwrap_err();
        assert!(matches!(e, Error::BracketFailure { .. }));
    }

    #[test]
    fn handles_flat_degenerate_derivative() {
        // cube-root-like: derivative blows up at the root
        let r = bisect_secant(|x: f64| x.signum() * x.abs().powf(1.0 / 3.0) - 0.0, -1.0, 2.0, 1e-13).unwrap();
        assert!(r.root.abs() < 1e-12);
    }
}

//! Small numeric helpers shared by every module.

/// Signed fractional power `sgn(z)|z|^e`, with `z = 0` mapped to 0.
#[inline]
pub fn signed_pow(z: f64, e: f64) -> f64 {
    if z == 0.0 {
        0.0
    } else if z > 0.0 {
        (z.ln() * e).exp()
    } else {
        -((-z).ln() * e).exp()
    }
}

/// Euclidean norm.
#[inline]
pub fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

#[inline]
pub fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

/// `|z|^e` with the convention `0^e = 0` for `e > 0` and `0^0 = 1`.
#[inline]
pub fn abs_pow(z: f64, e: f64) -> f64 {
    if e == 0.0 {
        1.0
    } else if z == 0.0 {
        0.0
    } else {
        z.abs().powf(e)
    }
}

/// The p-Laplace flux map `z |z|^{p-2}` applied to a vector, written into `out`.
#[inline]
pub fn flux_map(z: &[f64], p: f64, out: &mut [f64]) {
    let s = abs_pow(norm(z), p - 2.0);
    for (o, v) in out.iter_mut().zip(z) {
        *o = v * s;
    }
}

/// Neumaier-compensated sum.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0f64;
    let mut c = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            c += (sum - t) + v;
        } else {
            c += (v - t) + sum;
        }
        sum = t;
    }
    sum + c
}

/// Conjugate exponent `p / (p - 1)`.
#[inline]
pub fn conjugate(p: f64) -> f64 {
    p / (p - 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_sum_recovers_cancelled_terms() {
        assert_eq!(compensated_sum([1.0, 1e100, 1.0, -1e100]), 2.0);
        assert_ne!([0.1; 10].iter().sum::<f64>(), 1.0);
        assert_eq!(compensated_sum([0.1; 10]), 1.0);
    }

    #[test]
    fn signed_pow_handles_sign_and_zero() {
        assert_eq!(signed_pow(0.0, 0.5), 0.0);
        assert!((signed_pow(4.0, 0.5) - 2.0).abs() < 1e-15);
        assert!((signed_pow(-4.0, 0.5) + 2.0).abs() < 1e-15);
        assert!((signed_pow(-8.0, 1.0 / 3.0) + 2.0).abs() < 1e-14);
    }

    #[test]
    fn flux_map_at_p2_is_identity() {
        let mut out = [0.0; 2];
        flux_map(&[3.0, -4.0], 2.0, &mut out);
        assert_eq!(out, [3.0, -4.0]);
        flux_map(&[3.0, -4.0], 3.0, &mut out);
        assert_eq!(out, [15.0, -20.0]);
    }

    proptest::proptest! {
        #[test]
        fn signed_pow_inverts(z in -1e3f64..1e3, e in 0.2f64..5.0) {
            let back = signed_pow(signed_pow(z, e), 1.0 / e);
            proptest::prop_assert!((back - z).abs() <= 1e-12 * z.abs().max(1.0));
        }

        #[test]
        fn compensated_sum_is_order_independent(v in proptest::collection::vec(-1e6f64..1e6, 1..200)) {
            let mut r = v.clone();
            r.reverse();
            let (a, b) = (compensated_sum(v.iter().copied()), compensated_sum(r));
            let scale: f64 = v.iter().map(|x| x.abs()).sum::<f64>().max(1.0);
            proptest::prop_assert!((a - b).abs() <= 4.0 * f64::EPSILON * f64::EPSILON * scale + f64::EPSILON * a.abs());
        }
    }
}

//! Algebraic inequalities for the p-Laplace flux map `z |z|^{p-2}`, the Bregman
//! remainder `g_xi` and the two-point functional `G_{xi,eta}`, with seeded
//! randomized batteries that estimate the (existence-only) constants.
//!
//! Sampling is counter-based: sample chunk `k` draws from a ChaCha stream selected
//! by `k`, so serial and parallel runs agree for a given seed.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::num::{abs_pow, dot, norm, signed_pow};

/// Exponents visited by the batteries.
pub const P_VALUES: [f64; 6] = [2.0, 2.5, 3.0, 3.5, 4.0, 5.0];
/// Pairs closer than this are excluded from ratio denominators.
pub const DEGENERACY_GUARD: f64 = 1e-9;
/// Relative round-off allowance when counting violations.
pub const ROUNDOFF_GUARD: f64 = 1e-10;

const CHUNK: usize = 4096;

/// The pairing `(x|x|^{p-2} - y|y|^{p-2}).(x - y)` with its three comparators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonotonePairing {
    pub lhs: f64,
    /// `|x - y|^p`.
    pub p_lower: f64,
    /// `(|x|^{p-2} + |y|^{p-2}) |x - y|^2`.
    pub weighted_lower: f64,
    /// `|x|x|^{p-2} - y|y|^{p-2}|`.
    pub upper: f64,
}

pub fn monotone_pairing(x: &[f64], y: &[f64], p: f64) -> MonotonePairing {
    let nx = abs_pow(norm(x), p - 2.0);
    let ny = abs_pow(norm(y), p - 2.0);
    let mut lhs = 0.0;
    let mut diff2 = 0.0;
    let mut flux_diff2 = 0.0;
    for (a, b) in x.iter().zip(y) {
        let fd = a * nx - b * ny;
        lhs += fd * (a - b);
        diff2 += (a - b) * (a - b);
        flux_diff2 += fd * fd;
    }
    MonotonePairing {
        lhs,
        p_lower: diff2.sqrt().powf(p),
        weighted_lower: (nx + ny) * diff2,
        upper: flux_diff2.sqrt(),
    }
}

/// `g_xi(x) = |xi + x|^p - |xi|^p - p xi|xi|^{p-2} . x`.
pub fn g_xi(xi: &[f64], x: &[f64], p: f64) -> f64 {
    let sum: Vec<f64> = xi.iter().zip(x).map(|(a, b)| a + b).collect();
    let nxi = norm(xi);
    norm(&sum).powf(p) - nxi.powf(p) - p * abs_pow(nxi, p - 2.0) * dot(xi, x)
}

/// `g_xi(x) / (|x|^2 |xi|^{p-2} + |x|^p)`, reported as `(lower, upper)` (the same number
/// twice) so batteries can aggregate min and max.
pub fn g_xi_bounds_ratio(xi: &[f64], x: &[f64], p: f64) -> Result<(f64, f64)> {
    let nx = norm(x);
    if nx == 0.0 {
        return Err(Error::DegenerateInput("g_xi ratio undefined at x = 0".into()));
    }
    let r = g_xi(xi, x, p) / (nx * nx * abs_pow(norm(xi), p - 2.0) + nx.powf(p));
    Ok((r, r))
}

/// `G_{xi,eta}(X, Y) = |xi+X|^p + |eta+Y|^p - |xi+T|^p - |eta+T|^p - (p/2)(xi|xi|^{p-2} - eta|eta|^{p-2}).(X-Y)`
/// with `T = (X+Y)/2`.
pub fn big_g(xi: &[f64], eta: &[f64], big_x: &[f64], big_y: &[f64], p: f64) -> f64 {
    big_g_terms(xi, eta, big_x, big_y, p).0
}

/// Value of `G` and the sum of absolute values of its terms (round-off scale).
fn big_g_terms(xi: &[f64], eta: &[f64], bx: &[f64], by: &[f64], p: f64) -> (f64, f64) {
    let d = xi.len();
    let mut a = [0.0; 3];
    let mut b = [0.0; 3];
    let mut c = [0.0; 3];
    let mut e = [0.0; 3];
    let mut pair = 0.0;
    let sx = abs_pow(norm(xi), p - 2.0);
    let se = abs_pow(norm(eta), p - 2.0);
    for k in 0..d {
        let t = 0.5 * (bx[k] + by[k]);
        a[k] = xi[k] + bx[k];
        b[k] = eta[k] + by[k];
        c[k] = xi[k] + t;
        e[k] = eta[k] + t;
        pair += (xi[k] * sx - eta[k] * se) * (bx[k] - by[k]);
    }
    let terms = [
        norm(&a[..d]).powf(p),
        norm(&b[..d]).powf(p),
        -norm(&c[..d]).powf(p),
        -norm(&e[..d]).powf(p),
        -0.5 * p * pair,
    ];
    (terms.iter().sum(), terms.iter().map(|t| t.abs()).sum())
}

/// Draws one coordinate: uniform on `[-10, 10]` or, one time in five, a Cauchy-like
/// heavy-tail value clipped at `1e3`.
fn coord<R: Rng>(rng: &mut R) -> f64 {
    if rng.random::<f64>() < 0.8 {
        rng.random_range(-10.0..10.0)
    } else {
        let u: f64 = rng.random::<f64>() - 0.5;
        (std::f64::consts::PI * u).tan().clamp(-1e3, 1e3)
    }
}

fn vector<R: Rng>(rng: &mut R, d: usize, out: &mut [f64; 3]) {
    for v in out.iter_mut().take(d) {
        *v = coord(rng);
    }
    for v in out.iter_mut().skip(d) {
        *v = 0.0;
    }
}

fn chunk_rng(seed: u64, chunk: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk as u64);
    rng
}

/// Empirical extremes of a ratio over a battery.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RatioStats {
    pub name: String,
    pub samples: usize,
    /// Samples excluded by the degeneracy guard.
    pub skipped: usize,
    pub min_ratio: f64,
    pub max_ratio: f64,
    /// Analytic constant the ratio is checked against, when one is known.
    pub reference: Option<f64>,
    /// `true` if `reference` is a lower bound, `false` for an upper bound.
    pub reference_is_lower: bool,
    pub violations: usize,
}

impl RatioStats {
    fn new(name: &str, reference: Option<f64>, lower: bool) -> Self {
        Self {
            name: name.into(),
            samples: 0,
            skipped: 0,
            min_ratio: f64::INFINITY,
            max_ratio: f64::NEG_INFINITY,
            reference,
            reference_is_lower: lower,
            violations: 0,
        }
    }

    /// Records `num / den`; `slack` is the absolute round-off allowance on `num`.
    fn push(&mut self, num: f64, den: f64, slack: f64, reference: f64) {
        self.samples += 1;
        let r = num / den;
        self.min_ratio = self.min_ratio.min(r);
        self.max_ratio = self.max_ratio.max(r);
        let bad = if self.reference_is_lower {
            num < reference * den - slack
        } else {
            num > reference * den + slack
        };
        if bad {
            self.violations += 1;
        }
    }

    fn merge(mut self, o: &RatioStats) -> Self {
        self.samples += o.samples;
        self.skipped += o.skipped;
        self.min_ratio = self.min_ratio.min(o.min_ratio);
        self.max_ratio = self.max_ratio.max(o.max_ratio);
        self.violations += o.violations;
        self
    }

    pub fn passed(&self) -> bool {
        self.violations == 0 && self.samples > 0
    }
}

/// Monotonicity inequalities: returns stats for the `|x-y|^p` lower bound, the weighted
/// lower bound and the flux-difference upper bound, each checked against a known
/// admissible constant at the sampled `p`.
///
/// The reference constants are `2^{2-p}`, `1/2` and `p - 1`.
pub fn monotone_battery(samples: usize, seed: u64) -> Vec<RatioStats> {
    let chunks = samples.div_ceil(CHUNK);
    let per_chunk: Vec<[RatioStats; 3]> = (0..chunks)
        .into_par_iter()
        .map(|k| {
            let mut rng = chunk_rng(seed, k);
            let mut s = fresh_monotone();
            let (mut x, mut y) = ([0.0; 3], [0.0; 3]);
            let n = CHUNK.min(samples - k * CHUNK);
            for _ in 0..n {
                let d = rng.random_range(1..=3usize);
                let p = P_VALUES[rng.random_range(0..P_VALUES.len())];
                vector(&mut rng, d, &mut x);
                vector(&mut rng, d, &mut y);
                let diff = norm(&[x[0] - y[0], x[1] - y[1], x[2] - y[2]][..d]);
                if diff <= DEGENERACY_GUARD {
                    for st in s.iter_mut() {
                        st.skipped += 1;
                    }
                    continue;
                }
                let m = monotone_pairing(&x[..d], &y[..d], p);
                let scale = norm(&x[..d]).max(norm(&y[..d]));
                let slack = ROUNDOFF_GUARD * scale.powf(p);
                s[0].push(m.lhs, m.p_lower, slack, 2f64.powf(2.0 - p));
                s[1].push(m.lhs, m.weighted_lower, slack, 0.5);
                let den = m.weighted_lower / diff;
                s[2].push(m.upper, den, ROUNDOFF_GUARD * scale.powf(p - 1.0), p - 1.0);
            }
            s
        })
        .collect();
    let mut out = fresh_monotone();
    for c in &per_chunk {
        for i in 0..3 {
            out[i] = out[i].clone().merge(&c[i]);
        }
    }
    // references vary with p; report the least favourable one
    out[0].reference = Some(2f64.powf(2.0 - 5.0));
    out[2].reference = Some(5.0 - 1.0);
    out.to_vec()
}

fn fresh_monotone() -> [RatioStats; 3] {
    [
        RatioStats::new("monotone_p_lower", None, true),
        RatioStats::new("monotone_weighted_lower", Some(0.5), true),
        RatioStats::new("monotone_flux_upper", None, false),
    ]
}

/// Two-sided bound of `g_xi(x)` against `|x|^2|xi|^{p-2} + |x|^p` on random samples with
/// `p > 2`; also counts negative values of `g_xi` beyond round-off.
pub fn g_xi_battery(samples: usize, seed: u64) -> (RatioStats, usize) {
    let chunks = samples.div_ceil(CHUNK);
    let parts: Vec<(RatioStats, usize)> = (0..chunks)
        .into_par_iter()
        .map(|k| {
            let mut rng = chunk_rng(seed ^ 0x6a09_e667, k);
            let mut st = RatioStats::new("g_xi_two_sided", None, true);
            let mut negatives = 0;
            let (mut xi, mut x) = ([0.0; 3], [0.0; 3]);
            let n = CHUNK.min(samples - k * CHUNK);
            for _ in 0..n {
                let d = rng.random_range(1..=3usize);
                let p = P_VALUES[rng.random_range(1..P_VALUES.len())];
                vector(&mut rng, d, &mut xi);
                vector(&mut rng, d, &mut x);
                let nx = norm(&x[..d]);
                let nxi = norm(&xi[..d]);
                if nx <= DEGENERACY_GUARD {
                    st.skipped += 1;
                    continue;
                }
                let g = g_xi(&xi[..d], &x[..d], p);
                let scale = (nxi + nx).powf(p);
                if g < -ROUNDOFF_GUARD * scale {
                    negatives += 1;
                }
                let den = nx * nx * abs_pow(nxi, p - 2.0) + nx.powf(p);
                // g is a difference of O(scale) terms, so its absolute error is O(eps*scale)
                if den < 1e3 * f64::EPSILON * scale {
                    st.skipped += 1;
                    continue;
                }
                st.push(g, den, 0.0, 0.0);
            }
            (st, negatives)
        })
        .collect();
    let mut st = RatioStats::new("g_xi_two_sided", None, true);
    let mut neg = 0;
    for (s, n) in &parts {
        st = st.merge(s);
        neg += n;
    }
    (st, neg)
}

/// `|(x+h)^{1/(p-1)} - x^{1/(p-1)}| <= C |h|^{1/(p-1)}` for signed powers, against the
/// admissible constant `2^{1 - 1/(p-1)}`.
pub fn holder_root_battery(samples: usize, seed: u64) -> RatioStats {
    let chunks = samples.div_ceil(CHUNK);
    let parts: Vec<RatioStats> = (0..chunks)
        .into_par_iter()
        .map(|k| {
            let mut rng = chunk_rng(seed ^ 0xbb67_ae85, k);
            let mut st = RatioStats::new("signed_root_holder", Some(2.0), false);
            let n = CHUNK.min(samples - k * CHUNK);
            for _ in 0..n {
                let p = P_VALUES[rng.random_range(0..P_VALUES.len())];
                let beta = 1.0 / (p - 1.0);
                let x = coord(&mut rng);
                let h = coord(&mut rng);
                if h.abs() <= DEGENERACY_GUARD {
                    st.skipped += 1;
                    continue;
                }
                let num = (signed_pow(x + h, beta) - signed_pow(x, beta)).abs();
                let den = h.abs().powf(beta);
                let slack = ROUNDOFF_GUARD * (x.abs() + h.abs()).powf(beta);
                st.push(num, den, slack, 2f64.powf(1.0 - beta));
            }
            st
        })
        .collect();
    parts
        .iter()
        .fold(RatioStats::new("signed_root_holder", Some(2.0), false), |a, b| a.merge(b))
}

/// Feasibility certificate for the lower bound on `G_{xi,eta}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LowerBoundReport {
    pub p: f64,
    pub delta: f64,
    pub samples: usize,
    pub seed: u64,
    /// Largest feasible `gamma` on the grid `2^{-k}`.
    pub gamma: Option<f64>,
    /// Smallest grid `c` making `gamma` feasible.
    pub c: Option<f64>,
    /// `(gamma, minimal c required)`; `None` when no finite `c` works.
    pub per_gamma: Vec<(f64, Option<f64>)>,
    pub passed: bool,
}

/// Grid of `gamma` values.
pub fn gamma_grid() -> Vec<f64> {
    (0..=20).map(|k| 2f64.powi(-k)).collect()
}

/// Grid of `c` values: zero and `2^j`, `j = -10..=20`.
pub fn c_grid() -> Vec<f64> {
    std::iter::once(0.0).chain((-10..=20).map(|j| 2f64.powi(j))).collect()
}

/// One sample of the lower-bound check: `(G, |X-Y|^p, correction, round-off scale)`.
fn lemma51_sample<R: Rng>(rng: &mut R, p: f64, delta: f64) -> (f64, f64, f64, f64) {
    let d = rng.random_range(1..=3usize);
    let (mut xi, mut eta, mut bx, mut by) = ([0.0; 3], [0.0; 3], [0.0; 3], [0.0; 3]);
    vector(rng, d, &mut xi);
    if p < 3.0 {
        // |xi| >= delta, eta in B(xi, delta/2)
        let n = norm(&xi[..d]);
        if n < delta {
            let s = if n == 0.0 { 0.0 } else { delta / n * (1.0 + rng.random::<f64>()) };
            if s == 0.0 {
                xi[0] = delta;
            } else {
                xi.iter_mut().take(d).for_each(|v| *v *= s);
            }
        }
        loop {
            let mut u = [0.0; 3];
            for v in u.iter_mut().take(d) {
                *v = rng.random_range(-1.0..1.0);
            }
            let nu = norm(&u[..d]);
            if nu < 1.0 {
                for k in 0..d {
                    eta[k] = xi[k] + 0.5 * delta * u[k] * 0.999_999;
                }
                break;
            }
        }
    } else {
        vector(rng, d, &mut eta);
    }
    // a fraction of samples probes X = Y and small |X - Y|
    vector(rng, d, &mut bx);
    match rng.random_range(0..8u32) {
        0 => by = bx,
        1 => {
            for k in 0..d {
                by[k] = bx[k] + 1e-3 * coord(rng);
            }
        }
        _ => vector(rng, d, &mut by),
    }
    let (g, scale) = big_g_terms(&xi[..d], &eta[..d], &bx[..d], &by[..d], p);
    let diff: Vec<f64> = (0..d).map(|k| bx[k] - by[k]).collect();
    let sum: Vec<f64> = (0..d).map(|k| bx[k] + by[k]).collect();
    let dxy = norm(&diff);
    let sxy = norm(&sum);
    let de = norm(&(0..d).map(|k| xi[k] - eta[k]).collect::<Vec<_>>());
    let corr = if p < 3.0 {
        (abs_pow(de, p - 2.0) * dxy + delta.powf(p - 3.0) * de * sxy) * dxy
    } else {
        let s = norm(&xi[..d]) + norm(&eta[..d]);
        (abs_pow(de, p - 2.0) * dxy + de * abs_pow(sxy, p - 2.0) + abs_pow(s, p - 3.0) * de * sxy) * dxy
    };
    (g, dxy.powf(p), corr, scale)
}

/// Checks that some `(gamma, c)` on fixed grids satisfies
/// `G - gamma |X-Y|^p + c * correction >= 0` on every sample.
///
/// For `2 <= p < 3` the samples are restricted to `|xi| >= delta`, `eta` in `B(xi, delta/2)`;
/// for `p >= 3` they are unrestricted.
pub fn check_lemma51(p: f64, delta: f64, samples: usize, seed: u64) -> Result<LowerBoundReport> {
    if !(p >= 2.0) {
        return Err(Error::InvalidInput(format!("requires p >= 2, got {p}")));
    }
    if p < 3.0 && !(delta > 0.0) {
        return Err(Error::InvalidInput("2 <= p < 3 requires delta > 0".into()));
    }
    let gammas = gamma_grid();
    let chunks = samples.div_ceil(CHUNK);
    // per gamma: (minimal c required, infeasible-at-any-c flag)
    let parts: Vec<Vec<(f64, bool)>> = (0..chunks)
        .into_par_iter()
        .map(|k| {
            let mut rng = chunk_rng(seed ^ 0x3c6e_f372, k);
            let mut need = vec![(0.0f64, false); gammas.len()];
            let n = CHUNK.min(samples - k * CHUNK);
            for _ in 0..n {
                let (g, dist, corr, scale) = lemma51_sample(&mut rng, p, delta);
                let slack = ROUNDOFF_GUARD * scale;
                for (i, gamma) in gammas.iter().enumerate() {
                    let deficit = gamma * dist - g - slack;
                    if deficit <= 0.0 {
                        continue;
                    }
                    if corr > 0.0 {
                        need[i].0 = need[i].0.max(deficit / corr);
                    } else {
                        need[i].1 = true;
                    }
                }
            }
            need
        })
        .collect();
    let cs = c_grid();
    let cmax = *cs.last().unwrap();
    let mut per_gamma = Vec::with_capacity(gammas.len());
    for (i, gamma) in gammas.iter().enumerate() {
        let (mut req, mut inf) = (0.0f64, false);
        for part in &parts {
            req = req.max(part[i].0);
            inf |= part[i].1;
        }
        let c = if inf || req > cmax { None } else { cs.iter().copied().find(|c| *c >= req) };
        per_gamma.push((*gamma, c));
    }
    let best = per_gamma.iter().find(|(_, c)| c.is_some()).copied();
    Ok(LowerBoundReport {
        p,
        delta,
        samples,
        seed,
        gamma: best.map(|b| b.0),
        c: best.and_then(|b| b.1),
        per_gamma,
        passed: best.is_some(),
    })
}

/// Full battery over every inequality.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BatteryReport {
    pub samples: usize,
    pub seed: u64,
    pub ratios: Vec<RatioStats>,
    pub g_xi_negatives: usize,
    pub lemma51: Vec<LowerBoundReport>,
}

impl BatteryReport {
    pub fn passed(&self) -> bool {
        self.g_xi_negatives == 0
            && self.ratios.iter().all(|r| r.violations == 0 && r.samples > 0)
            && self.lemma51.iter().all(|r| r.passed)
    }
}

pub fn run_battery(samples: usize, seed: u64) -> BatteryReport {
    let mut ratios = monotone_battery(samples, seed);
    let (g, neg) = g_xi_battery(samples, seed);
    ratios.push(g);
    ratios.push(holder_root_battery(samples, seed));
    let lemma51 = P_VALUES
        .iter()
        .map(|&p| check_lemma51(p, 1.0, samples, seed).expect("valid p"))
        .collect();
    BatteryReport { samples, seed, ratios, g_xi_negatives: neg, lemma51 }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairing_at_p2_is_squared_distance() {
        let m = monotone_pairing(&[1.0, -2.0], &[0.5, 3.0], 2.0);
        let d2 = 0.25 + 25.0;
        assert!((m.lhs - d2).abs() < 1e-12);
        assert!((m.p_lower - d2).abs() < 1e-12);
    }

    #[test]
    fn pairing_vanishes_on_diagonal() {
        let m = monotone_pairing(&[1.0, 2.0], &[1.0, 2.0], 3.5);
        assert_eq!((m.lhs, m.p_lower, m.weighted_lower), (0.0, 0.0, 0.0));
    }

    #[test]
    fn pairing_scalar_arithmetic() {
        let m = monotone_pairing(&[2.0], &[1.0], 3.0);
        assert!((m.lhs - 3.0).abs() < 1e-14);
        assert!((m.p_lower - 1.0).abs() < 1e-14);
        assert!((m.weighted_lower - 3.0).abs() < 1e-14);
        assert!((m.upper - 3.0).abs() < 1e-14);
    }

    #[test]
    fn g_xi_special_cases() {
        let x = [0.3, -1.2];
        assert!((g_xi(&[0.0, 0.0], &x, 3.0) - norm(&x).powi(3)).abs() < 1e-14);
        assert_eq!(g_xi(&[1.0, 2.0], &[0.0, 0.0], 3.5), 0.0);
        let r = g_xi(&[1.7, -0.4], &x, 2.0);
        assert!((r - dot(&x, &x)).abs() < 1e-12);
    }

    #[test]
    fn g_ratio_at_zero_xi_and_p2() {
        let (a, b) = g_xi_bounds_ratio(&[0.0], &[2.5], 3.7).unwrap();
        assert!((a - 1.0).abs() < 1e-14 && a == b);
        // at p = 2 both denominator terms equal |x|^2
        let (a, _) = g_xi_bounds_ratio(&[4.0, 1.0], &[-0.3, 2.0], 2.0).unwrap();
        assert!((a - 0.5).abs() < 1e-12);
        assert!(g_xi_bounds_ratio(&[1.0], &[0.0], 3.0).is_err());
    }

    #[test]
    fn big_g_examples() {
        assert!(big_g(&[1.0, 2.0], &[-1.0, 0.5], &[0.3, 0.3], &[0.3, 0.3], 3.0).abs() < 1e-13);
        let x = [0.7, -1.1];
        let g = big_g(&[2.0, 1.0], &[2.0, 1.0], &x, &[-0.7, 1.1], 2.0);
        assert!((g - 2.0 * dot(&x, &x)).abs() < 1e-12);
        // xi = eta = X = (1,0), Y = 0, p = 3: 8 + 1 - 2 * 1.5^3 - 0
        let g = big_g(&[1.0, 0.0], &[1.0, 0.0], &[1.0, 0.0], &[0.0, 0.0], 3.0);
        assert!((g - (9.0 - 2.0 * 3.375)).abs() < 1e-13);
    }

    #[test]
    fn lemma51_p2_admits_half() {
        let r = check_lemma51(2.0, 1.0, 20_000, 7).unwrap();
        assert!(r.passed);
        let half = r.per_gamma.iter().find(|(g, _)| *g == 0.5).unwrap();
        assert_eq!(half.1, Some(0.0));
    }

    #[test]
    fn lemma51_rejects_bad_input() {
        assert!(check_lemma51(1.5, 1.0, 10, 1).is_err());
        assert!(check_lemma51(2.5, 0.0, 10, 1).is_err());
    }

    #[test]
    fn batteries_are_seed_deterministic() {
        let a = monotone_battery(10_000, 3);
        let b = monotone_battery(10_000, 3);
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.min_ratio.to_bits(), y.min_ratio.to_bits());
            assert_eq!(x.max_ratio.to_bits(), y.max_ratio.to_bits());
        }
    }

    proptest::proptest! {
        #[test]
        fn pairing_is_symmetric_and_nonnegative(x in proptest::array::uniform2(-5.0f64..5.0),
                                                y in proptest::array::uniform2(-5.0f64..5.0), p in 2.0f64..6.0) {
            let a = monotone_pairing(&x, &y, p);
            let b = monotone_pairing(&y, &x, p);
            proptest::prop_assert!(a.lhs >= 0.0);
            proptest::prop_assert!((a.lhs - b.lhs).abs() <= 1e-12 * a.lhs.max(1.0));
        }
    }
}

//! Six-wave resonance combinatorics.
//!
//! Frequencies `k_1..k_6` with `k_1 - k_2 + k_3 - k_4 + k_5 - k_6 = 0`, the
//! resonance function `Omega`, the symmetrized weight `psi`, and executable
//! checks of the counting, `psi` and space-time sum estimates.

use std::f64::consts::PI;
use std::ops::RangeInclusive;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fft;
use crate::spectral::WeightFamily;

/// A 6-tuple of integer frequencies.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Tuple6(pub [i64; 6]);

impl Tuple6 {
    /// `k_1 - k_2 + k_3 - k_4 + k_5 - k_6`.
    pub fn alternating_sum(&self) -> i64 {
        let k = &self.0;
        k[0] - k[1] + k[2] - k[3] + k[4] - k[5]
    }

    pub fn negated(&self) -> Self {
        Self(self.0.map(|k| -k))
    }

    /// `(k_1, k_3, k_5) <-> (k_2, k_4, k_6)`.
    pub fn swap_parity(&self) -> Self {
        let k = &self.0;
        Self([k[1], k[0], k[3], k[2], k[5], k[4]])
    }
}

/// `Omega(k) = sum_j (-1)^{j-1} k_j^2`, exact.
pub fn omega(t: &Tuple6) -> i64 {
    let k = &t.0;
    k[0] * k[0] - k[1] * k[1] + k[2] * k[2] - k[3] * k[3] + k[4] * k[4] - k[5] * k[5]
}

/// `psi(k) = sum_j (-1)^{j-1} m(k_j)`.
///
/// For [`WeightKind::EquivalentNorm`](crate::spectral::WeightKind) the constants cancel and this
/// is `sum_j (-1)^{j-1} |k_j|^{2s}`.
pub fn psi(t: &Tuple6, family: &WeightFamily) -> f64 {
    let k = &t.0;
    let m = |x: i64| family.multiplier(x);
    ((m(k[0]) - m(k[1])) + (m(k[2]) - m(k[3]))) + (m(k[4]) - m(k[5]))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum ResonanceFilter {
    All,
    NonResonant,
    Resonant,
}

impl ResonanceFilter {
    #[inline]
    fn accepts(self, om: i64) -> bool {
        match self {
            Self::All => true,
            Self::NonResonant => om != 0,
            Self::Resonant => om == 0,
        }
    }
}

/// Lexicographic stream over `(k_1..k_5)` of constrained tuples with `|k_j| <= n`;
/// `k_6` is solved from the constraint.
#[derive(Clone, Debug)]
pub struct ConstrainedTuples {
    n: i64,
    filter: ResonanceFilter,
    k1_end: i64,
    cur: [i64; 5],
    done: bool,
}

impl Iterator for ConstrainedTuples {
    type Item = Tuple6;

    fn next(&mut self) -> Option<Tuple6> {
        while !self.done {
            let [k1, k2, k3, k4, k5] = self.cur;
            self.advance();
            let k6 = k1 - k2 + k3 - k4 + k5;
            if k6.abs() <= self.n {
                let t = Tuple6([k1, k2, k3, k4, k5, k6]);
                if self.filter.accepts(omega(&t)) {
                    return Some(t);
                }
            }
        }
        None
    }
}

impl ConstrainedTuples {
    fn advance(&mut self) {
        for i in (0..5).rev() {
            let end = if i == 0 { self.k1_end } else { self.n };
            if self.cur[i] < end {
                self.cur[i] += 1;
                return;
            }
            self.cur[i] = -self.n;
        }
        self.done = true;
    }
}

/// Every constrained tuple with `|k_j| <= n_cut` passing `filter`.
pub fn enumerate_constrained(n_cut: usize, filter: ResonanceFilter) -> ConstrainedTuples {
    let n = n_cut as i64;
    enumerate_constrained_k1(n_cut, filter, -n..=n)
}

/// The sub-stream with `k_1` restricted to `k1_range`; disjoint ranges give disjoint,
/// independently iterable pieces of [`enumerate_constrained`].
pub fn enumerate_constrained_k1(
    n_cut: usize,
    filter: ResonanceFilter,
    k1_range: RangeInclusive<i64>,
) -> ConstrainedTuples {
    let n = n_cut as i64;
    let (lo, hi) = (*k1_range.start().max(&-n), *k1_range.end().min(&n));
    ConstrainedTuples { n, filter, k1_end: hi, cur: [lo, -n, -n, -n, -n], done: lo > hi }
}

/// Number of constrained tuples, split over `k_1`.
pub fn count_constrained(n_cut: usize, filter: ResonanceFilter) -> u64 {
    let n = n_cut as i64;
    (-n..=n)
        .into_par_iter()
        .map(|k1| enumerate_constrained_k1(n_cut, filter, k1..=k1).count() as u64)
        .sum()
}

/// Tuples grouped by the value of `Omega`, keyed in increasing order.
pub fn group_by_omega(n_cut: usize, filter: ResonanceFilter) -> std::collections::BTreeMap<i64, Vec<Tuple6>> {
    let mut out = std::collections::BTreeMap::new();
    for t in enumerate_constrained(n_cut, filter) {
        out.entry(omega(&t)).or_insert_with(Vec::new).push(t);
    }
    out
}

/// Magnitudes sorted in decreasing order together with the positions they came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OrderedMagnitudes {
    /// `perm[i]` is the (0-based) index of `k_{(i+1)}` in the tuple.
    pub perm: [usize; 6],
    pub mags: [u64; 6],
}

/// Stable ordering by magnitude, ties broken by original position.
pub fn order_desc(t: &Tuple6) -> OrderedMagnitudes {
    let mut perm = [0, 1, 2, 3, 4, 5];
    perm.sort_by_key(|&i| std::cmp::Reverse(t.0[i].unsigned_abs()));
    OrderedMagnitudes { perm, mags: perm.map(|i| t.0[i].unsigned_abs()) }
}

/// Frequencies of the dyadic block `N`: `|k| <= 1` for `N = 1`, `N <= |k| < 2N` otherwise.
pub fn dyadic_block(block: u64) -> Result<Vec<i64>> {
    if block == 0 || !block.is_power_of_two() {
        return Err(Error::InvalidArgument(format!("{block} is not a dyadic block")));
    }
    if block == 1 {
        return Ok(vec![-1, 0, 1]);
    }
    let b = block as i64;
    Ok((-2 * b + 1..=-b).chain(b..2 * b).collect())
}

/// Outcome of one counting-bound evaluation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CountingCheck {
    pub count: u64,
    pub bound: u64,
    pub ratio: f64,
}

/// `N_(2) * ... * N_(m)`: product of all blocks but the largest.
pub fn counting_bound(blocks: &[u64]) -> u64 {
    let mut b = blocks.to_vec();
    b.sort_unstable_by(|a, b| b.cmp(a));
    b.iter().skip(1).product()
}

fn check_counting_args(blocks: &[u64], signs: &[i8]) -> Result<()> {
    if !(2..=6).contains(&blocks.len()) || blocks.len() != signs.len() {
        return Err(Error::InvalidArgument("counting check needs 2..=6 blocks and matching signs".into()));
    }
    if signs.iter().any(|s| s.abs() != 1) {
        return Err(Error::InvalidArgument("signs must be +1 or -1".into()));
    }
    Ok(())
}

/// Exhaustive count of `sum_j eps_j k_j = kappa` with each `k_j` in its block.
pub fn counting_check(blocks: &[u64], signs: &[i8], kappa: i64) -> Result<CountingCheck> {
    check_counting_args(blocks, signs)?;
    let sets = blocks.iter().map(|&b| dyadic_block(b)).collect::<Result<Vec<_>>>()?;
    fn rec(sets: &[Vec<i64>], signs: &[i8], j: usize, acc: i64, kappa: i64) -> u64 {
        if j == sets.len() {
            return (acc == kappa) as u64;
        }
        sets[j].iter().map(|&k| rec(sets, signs, j + 1, acc + signs[j] as i64 * k, kappa)).sum()
    }
    let count = rec(&sets, signs, 0, 0, kappa);
    let bound = counting_bound(blocks);
    Ok(CountingCheck { count, bound, ratio: count as f64 / bound as f64 })
}

/// Counts for every `kappa` at once: the distribution of `sum_j eps_j k_j`,
/// as `(offset, counts)` with `counts[i]` the number of solutions at `kappa = i - offset`.
pub fn counting_distribution(blocks: &[u64], signs: &[i8]) -> Result<(i64, Vec<u64>)> {
    check_counting_args(blocks, signs)?;
    let mut offset = 0i64;
    let mut dist = vec![1u64];
    for (&b, &e) in blocks.iter().zip(signs) {
        let set: Vec<i64> = dyadic_block(b)?.into_iter().map(|k| e as i64 * k).collect();
        let (lo, hi) = (*set.iter().min().unwrap(), *set.iter().max().unwrap());
        let mut next = vec![0u64; dist.len() + (hi - lo) as usize];
        for (i, &c) in dist.iter().enumerate() {
            if c == 0 {
                continue;
            }
            for &k in &set {
                next[i + (k - lo) as usize] += c;
            }
        }
        offset -= lo;
        dist = next;
    }
    Ok((offset, dist))
}

/// Counting constant for `m <= 4` and blocks `<= 8`: with three unit blocks of three
/// frequencies each, a fixed largest frequency leaves `3^3` solutions against a bound of 1.
pub const COUNTING_CONSTANT: f64 = 27.0;

/// Worst case of a counting-bound sweep.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CountingSweep {
    pub max_ratio: f64,
    pub blocks: Vec<u64>,
    pub signs: Vec<i8>,
    pub kappa: i64,
    pub cases: u64,
}

/// Maximum of `count / bound` over `2 <= m <= max_m`, dyadic blocks `<= max_block`,
/// all sign patterns and `|kappa| <= max_kappa`.
pub fn counting_sweep(max_m: usize, max_block: u64, max_kappa: i64) -> Result<CountingSweep> {
    let dyadics: Vec<u64> = (0..).map(|e| 1u64 << e).take_while(|&b| b <= max_block).collect();
    let mut best = CountingSweep { max_ratio: 0.0, blocks: vec![], signs: vec![], kappa: 0, cases: 0 };
    for m in 2..=max_m {
        let n_blocks = dyadics.len().pow(m as u32);
        for code in 0..n_blocks {
            let blocks: Vec<u64> = (0..m).map(|j| dyadics[(code / dyadics.len().pow(j as u32)) % dyadics.len()]).collect();
            let bound = counting_bound(&blocks) as f64;
            for smask in 0..(1u32 << m) {
                let signs: Vec<i8> = (0..m).map(|j| if smask >> j & 1 == 1 { -1 } else { 1 }).collect();
                let (offset, dist) = counting_distribution(&blocks, &signs)?;
                for kappa in -max_kappa..=max_kappa {
                    best.cases += 1;
                    let idx = kappa + offset;
                    let count = if idx >= 0 && (idx as usize) < dist.len() { dist[idx as usize] } else { 0 };
                    let r = count as f64 / bound;
                    if r > best.max_ratio {
                        best.max_ratio = r;
                        best.blocks = blocks.clone();
                        best.signs = signs.clone();
                        best.kappa = kappa;
                    }
                }
            }
        }
    }
    Ok(best)
}

/// `max |psi_{2s}(k)| / (|k_(1)|^{2s-2} (|Omega(k)| + |k_(3)|^2))` over all nonzero
/// constrained tuples with `|k_j| <= n_cut`.
///
/// Tuples with a vanishing denominator are skipped after asserting `psi_{2s} = 0` on them.
pub fn psi_bound_ratio(n_cut: usize, s: f64) -> f64 {
    let n = n_cut as i64;
    let pow: Vec<f64> = (0..=n).map(|k| (k as f64).powf(2.0 * s)).collect();
    let pow_m2: Vec<f64> = (0..=n).map(|k| (k as f64).powf(2.0 * s - 2.0)).collect();
    (-n..=n)
        .into_par_iter()
        .map(|k1| {
            let mut best = 0.0f64;
            for t in enumerate_constrained_k1(n_cut, ResonanceFilter::All, k1..=k1) {
                let a = t.0.map(|k| k.unsigned_abs() as usize);
                let p = ((pow[a[0]] - pow[a[1]]) + (pow[a[2]] - pow[a[3]])) + (pow[a[4]] - pow[a[5]]);
                let mut m = a;
                m.sort_unstable_by(|x, y| y.cmp(x));
                if m[0] == 0 {
                    continue;
                }
                let den = pow_m2[m[0]] * ((omega(&t).abs() as f64) + (m[2] * m[2]) as f64);
                if den == 0.0 {
                    assert!(p == 0.0, "psi must vanish where the bound degenerates: {t:?}");
                    continue;
                }
                best = best.max(p.abs() / den);
            }
            best
        })
        .reduce(|| 0.0, f64::max)
}

/// Both evaluations of the constrained six-fold sum at fixed `Omega = kappa`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct StrichartzSums {
    /// Direct sum over tuples.
    pub brute: f64,
    /// Space-time mean of `F1 conj(F2) F3 conj(F4) F5 conj(F6)`.
    pub quadrature: f64,
    pub t_points: usize,
    pub x_points: usize,
}

/// `sum_{k_1 - ... - k_6 = 0, Omega = kappa} prod_j |f^{(j)}_{k_j}|`, evaluated directly
/// and as a space-time integral with default grids.
pub fn strichartz_sum(n_cut: usize, kappa: i64, f: [&[f64]; 6]) -> Result<StrichartzSums> {
    let n2 = (n_cut * n_cut) as i64;
    let t_pts = (12 * n2 + 2).max(3 * n2 + kappa.abs() + 1) as usize;
    strichartz_sum_with_grids(n_cut, kappa, f, t_pts, (6 * n_cut + 2).next_power_of_two())
}

/// As [`strichartz_sum`] with explicit grid sizes.
pub fn strichartz_sum_with_grids(
    n_cut: usize,
    kappa: i64,
    f: [&[f64]; 6],
    t_points: usize,
    x_points: usize,
) -> Result<StrichartzSums> {
    let len = 2 * n_cut + 1;
    if f.iter().any(|a| a.len() != len) {
        return Err(Error::InvalidArgument(format!("coefficient arrays must have length {len}")));
    }
    let n = n_cut as i64;
    let need_x = 6 * n_cut + 2;
    if x_points < need_x {
        return Err(Error::GridTooSmall { got: x_points, need: need_x });
    }
    let need_t = (3 * n * n + kappa.abs() + 1) as usize;
    if t_points < need_t {
        return Err(Error::GridTooSmall { got: t_points, need: need_t });
    }
    let at = |j: usize, k: i64| f[j][(k + n) as usize].abs();

    let brute: f64 = (-n..=n)
        .into_par_iter()
        .map(|k1| {
            enumerate_constrained_k1(n_cut, ResonanceFilter::All, k1..=k1)
                .filter(|t| omega(t) == kappa)
                .map(|t| (0..6).map(|j| at(j, t.0[j])).product::<f64>())
                .sum::<f64>()
        })
        .collect::<Vec<_>>()
        .iter()
        .sum();

    // F^{(j)}(t, x) = sum_k |f_k| e^{-itk^2} e^{ikx}, with an extra e^{it kappa} on F^{(1)}.
    let total: Complex64 = (0..t_points)
        .into_par_iter()
        .map(|l| {
            let t = 2.0 * PI * l as f64 / t_points as f64;
            let mut grids: Vec<Vec<Complex64>> = Vec::with_capacity(6);
            for j in 0..6 {
                let coeffs: Vec<Complex64> = (-n..=n)
                    .map(|k| {
                        let extra = if j == 0 { kappa as f64 * t } else { 0.0 };
                        Complex64::from_polar(at(j, k), extra - (k * k) as f64 * t)
                    })
                    .collect();
                let mut buf = vec![Complex64::new(0.0, 0.0); x_points];
                fft::synthesize(&coeffs, n_cut, &mut buf);
                grids.push(buf);
            }
            (0..x_points)
                .map(|i| {
                    grids[0][i]
                        * grids[1][i].conj()
                        * grids[2][i]
                        * grids[3][i].conj()
                        * grids[4][i]
                        * grids[5][i].conj()
                })
                .sum::<Complex64>()
        })
        .collect::<Vec<_>>()
        .iter()
        .sum();
    let quadrature = total.re / (t_points * x_points) as f64;
    Ok(StrichartzSums { brute, quadrature, t_points, x_points })
}

/// One CSV row of a lemma sweep.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LemmaRow {
    pub lemma: String,
    pub params: String,
    pub count_or_ratio: f64,
    pub bound: f64,
}

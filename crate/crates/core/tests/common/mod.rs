//! Brute-force nested-loop oracles. They share no code with the library beyond the
//! multiplier `m(k)` and plain complex arithmetic.

#![allow(dead_code)]

use qnls_core::measures::{sample_state, SeededRng};
use qnls_core::{Complex64, FourierState, MeasureParams, WeightFamily};

/// `(value, sum of |terms|)` of a constrained six-fold sum.
pub struct OracleSum {
    pub value: Complex64,
    pub abs_sum: f64,
}

fn at(u: &[Complex64], n: i64, k: i64) -> Complex64 {
    u[(k + n) as usize]
}

fn omega6(k: [i64; 6]) -> i64 {
    k[0] * k[0] - k[1] * k[1] + k[2] * k[2] - k[3] * k[3] + k[4] * k[4] - k[5] * k[5]
}

fn psi6(k: [i64; 6], fam: &WeightFamily) -> f64 {
    let m = |x: i64| fam.multiplier(x);
    m(k[0]) - m(k[1]) + m(k[2]) - m(k[3]) + m(k[4]) - m(k[5])
}

/// Low coefficients `|k| <= n` of `u`.
pub fn low(u: &FourierState, n: usize) -> Vec<Complex64> {
    (-(n as i64)..=n as i64).map(|k| u.coeff(k)).collect()
}

/// Six nested loops over `[-n, n]^6`, keeping `k1 - k2 + k3 - k4 + k5 - k6 = 0`;
/// `weight(k)` returns `None` to skip a tuple. Slot 1 reads `a`, slot 2 reads `b`
/// (conjugated), the rest read `w`.
fn six_fold(
    w: &[Complex64],
    a: &[Complex64],
    b: &[Complex64],
    n: i64,
    weight: impl Fn([i64; 6]) -> Option<f64>,
) -> OracleSum {
    let mut value = Complex64::new(0.0, 0.0);
    let mut abs_sum = 0.0;
    for k1 in -n..=n {
        for k2 in -n..=n {
            for k3 in -n..=n {
                for k4 in -n..=n {
                    for k5 in -n..=n {
                        for k6 in -n..=n {
                            if k1 - k2 + k3 - k4 + k5 - k6 != 0 {
                                continue;
                            }
                            let k = [k1, k2, k3, k4, k5, k6];
                            let Some(c) = weight(k) else { continue };
                            let term = at(a, n, k1)
                                * at(b, n, k2).conj()
                                * at(w, n, k3)
                                * at(w, n, k4).conj()
                                * at(w, n, k5)
                                * at(w, n, k6).conj()
                                * c;
                            value += term;
                            abs_sum += term.norm();
                        }
                    }
                }
            }
        }
    }
    OracleSum { value, abs_sum }
}

/// `R_{s,N}` by brute force: `(R, scale)` with `scale = 1/6 sum |terms|`.
pub fn r_oracle(u: &FourierState, n: usize, fam: &WeightFamily) -> (f64, f64) {
    let w = low(u, n);
    let s = six_fold(&w, &w, &w, n as i64, |k| {
        let om = omega6(k);
        (om != 0).then(|| psi6(k, fam) / om as f64)
    });
    (s.value.re / 6.0, s.abs_sum / 6.0)
}

/// `Pi_n(|w|^4 w)` by a five-fold convolution over `[-n, n]^5`.
pub fn quintic_oracle(u: &FourierState, n: usize) -> Vec<Complex64> {
    let w = low(u, n);
    let ni = n as i64;
    let mut out = vec![Complex64::new(0.0, 0.0); 2 * n + 1];
    for k1 in -ni..=ni {
        for k2 in -ni..=ni {
            for k3 in -ni..=ni {
                for k4 in -ni..=ni {
                    for k5 in -ni..=ni {
                        let k = k1 - k2 + k3 - k4 + k5;
                        if k.abs() > ni {
                            continue;
                        }
                        out[(k + ni) as usize] += at(&w, ni, k1)
                            * at(&w, ni, k2).conj()
                            * at(&w, ni, k3)
                            * at(&w, ni, k4).conj()
                            * at(&w, ni, k5);
                    }
                }
            }
        }
    }
    out
}

/// `Q_{s,N}` by brute force: `(Q, scale)` where `scale` bounds the size of the summed terms.
pub fn q_oracle(u: &FourierState, n: usize, fam: &WeightFamily) -> (f64, f64) {
    let w = low(u, n);
    let v = quintic_oracle(u, n);
    let ni = n as i64;
    let nonres = |k: [i64; 6]| {
        let om = omega6(k);
        (om != 0).then(|| psi6(k, fam) / om as f64)
    };
    let q0 = six_fold(&w, &w, &w, ni, |k| (omega6(k) == 0).then(|| psi6(k, fam)));
    let q1 = six_fold(&w, &v, &w, ni, nonres);
    let q2 = six_fold(&w, &w, &v, ni, nonres);
    let q = (-q0.value / 6.0 + q1.value * 0.5 - q2.value * 0.5).im;
    (q, q0.abs_sum / 6.0 + 0.5 * (q1.abs_sum + q2.abs_sum))
}

/// Number of constrained tuples in `[-n, n]^6` by six loops.
pub fn count_oracle(n: i64, resonant: Option<bool>) -> u64 {
    let mut c = 0;
    for k1 in -n..=n {
        for k2 in -n..=n {
            for k3 in -n..=n {
                for k4 in -n..=n {
                    for k5 in -n..=n {
                        for k6 in -n..=n {
                            if k1 - k2 + k3 - k4 + k5 - k6 != 0 {
                                continue;
                            }
                            let r = omega6([k1, k2, k3, k4, k5, k6]) == 0;
                            if resonant.is_none_or(|want| want == r) {
                                c += 1;
                            }
                        }
                    }
                }
            }
        }
    }
    c
}

/// A draw from `mu_{s,M}`.
pub fn draw(s: f64, m: usize, seed: u64, stream: u64) -> FourierState {
    sample_state(&SeededRng::new(seed, stream), &MeasureParams::japanese(s, m).unwrap())
}

//! Randomized comparison of the fast sums against the brute-force oracles, plus
//! the symmetries every monomial of the normal form respects.

mod common;

use proptest::prelude::*;
use qnls_core::energy::{q_derivative, r_correction, EnergyParams, SumMethod};
use qnls_core::resonance::count_constrained;
use qnls_core::spectral::{quintic_nonlinearity, GridSpec};
use qnls_core::{omega, psi, Complex64, FourierState, ResonanceFilter, Tuple6, WeightFamily, WeightKind};

use common::{count_oracle, q_oracle, quintic_oracle, r_oracle};

fn state(n: usize, m_extra: usize) -> impl Strategy<Value = FourierState> {
    let m = n + m_extra;
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 2 * m + 1).prop_map(move |v| {
        FourierState::from_coeffs(m, v.into_iter().map(|(a, b)| Complex64::new(a, b)).collect()).unwrap()
    })
}

fn family() -> impl Strategy<Value = WeightFamily> {
    (prop_oneof![Just(WeightKind::JapaneseBracket), Just(WeightKind::EquivalentNorm)], 1.6f64..4.0)
        .prop_map(|(kind, s)| WeightFamily::new(kind, s).unwrap())
}

fn tuple(n: i64) -> impl Strategy<Value = Tuple6> {
    prop::array::uniform5(-n..=n).prop_filter_map("k6 out of range", move |k| {
        let k6 = k[0] - k[1] + k[2] - k[3] + k[4];
        (k6.abs() <= n).then_some(Tuple6([k[0], k[1], k[2], k[3], k[4], k6]))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn correction_and_derivative_match_brute_force(
        (n, u) in (1usize..=2).prop_flat_map(|n| (Just(n), state(n, 2))),
        fam in family(),
    ) {
        let grid = GridSpec::for_quintic(n);
        let (r_ref, r_scale) = r_oracle(&u, n, &fam);
        let (q_ref, q_scale) = q_oracle(&u, n, &fam);
        for method in [SumMethod::Enumerate, SumMethod::SpaceTime] {
            let e = EnergyParams::new(n, fam).with_method(method);
            prop_assert!((r_correction(&u, &e).unwrap() - r_ref).abs() <= 1e-12 * r_scale.max(1e-300));
            prop_assert!((q_derivative(&u, &e, &grid).unwrap() - q_ref).abs() <= 1e-12 * q_scale.max(1e-300));
        }
    }

    #[test]
    fn quintic_matches_five_fold_convolution((n, u) in (1usize..=3).prop_flat_map(|n| (Just(n), state(n, 1)))) {
        let v = quintic_nonlinearity(&u, n, &GridSpec::for_quintic(n)).unwrap();
        let wiener: f64 = (-(n as i64)..=n as i64).map(|k| u.coeff(k).norm()).sum();
        for (i, z) in quintic_oracle(&u, n).iter().enumerate() {
            prop_assert!((v.coeff(i as i64 - n as i64) - z).norm() <= 1e-13 * wiener.powi(5));
        }
        // output is supported on |k| <= n
        prop_assert!(v.iter().filter(|(k, _)| k.unsigned_abs() as usize > n).all(|(_, c)| c == Complex64::new(0.0, 0.0)));
    }

    #[test]
    fn energies_are_gauge_invariant(u in state(3, 0), theta in -3.0f64..3.0, alpha in -3.0f64..3.0) {
        let e = EnergyParams::new(3, WeightFamily::japanese(2.0)).with_method(SumMethod::SpaceTime);
        let grid = GridSpec::for_quintic(3);
        let r = r_correction(&u, &e).unwrap();
        let q = q_derivative(&u, &e, &grid).unwrap();
        for v in [u.rotate_phase(theta), u.translate(alpha)] {
            prop_assert!((r_correction(&v, &e).unwrap() - r).abs() <= 1e-11 * (1.0 + r.abs()));
            prop_assert!((q_derivative(&v, &e, &grid).unwrap() - q).abs() <= 1e-10 * (1.0 + q.abs()));
        }
    }

    #[test]
    fn omega_and_psi_symmetries(t in tuple(12), fam in family()) {
        prop_assert_eq!(omega(&t.negated()), omega(&t));
        prop_assert_eq!(psi(&t.negated(), &fam), psi(&t, &fam));
        prop_assert_eq!(omega(&t.swap_parity()), -omega(&t));
        prop_assert_eq!(psi(&t.swap_parity(), &fam), -psi(&t, &fam));
    }
}

#[test]
fn tuple_counts_match_six_loops() {
    for n in 0..=3usize {
        for (filter, which) in [
            (ResonanceFilter::All, None),
            (ResonanceFilter::Resonant, Some(true)),
            (ResonanceFilter::NonResonant, Some(false)),
        ] {
            assert_eq!(count_constrained(n, filter), count_oracle(n as i64, which), "n = {n}, {filter:?}");
        }
    }
}

use num_complex::Complex64;
use proptest::prelude::*;

use twinbeam::fock::{apply_beamsplitter, apply_observable, expectation, FockState, LadderMonomial, Observable, Occupation};
use twinbeam::homodyne::count_difference_observable;
use twinbeam::squeeze::{Budget, HomodyneSetup};

fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

/// Brute-force permanent over all permutations.
fn permanent(m: &[Vec<Complex64>]) -> Complex64 {
    fn go(m: &[Vec<Complex64>], row: usize, used: &mut Vec<bool>) -> Complex64 {
        if row == m.len() {
            return Complex64::new(1.0, 0.0);
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for col in 0..m.len() {
            if !used[col] {
                used[col] = true;
                acc += m[row][col] * go(m, row + 1, used);
                used[col] = false;
            }
        }
        acc
    }
    go(m, 0, &mut vec![false; m.len()])
}

/// `⟨k, n−k| U |n_i, n_j⟩` for `U = [[1, i], [i, 1]]/√2`, via the permanent.
fn oracle_amplitude(n_i: u32, n_j: u32, k: u32) -> Complex64 {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let u = [
        [Complex64::new(s, 0.0), Complex64::new(0.0, s)],
        [Complex64::new(0.0, s), Complex64::new(s, 0.0)],
    ];
    let n = n_i + n_j;
    let inputs: Vec<usize> = (0..n).map(|p| usize::from(p >= n_i)).collect();
    let outputs: Vec<usize> = (0..n).map(|p| usize::from(p >= k)).collect();
    let m: Vec<Vec<Complex64>> = inputs
        .iter()
        .map(|&a| outputs.iter().map(|&b| u[a][b]).collect())
        .collect();
    permanent(&m) / (factorial(n_i) * factorial(n_j) * factorial(k) * factorial(n - k)).sqrt()
}

#[test]
fn beamsplitter_matches_permanent_oracle() {
    for n in 0..=6u32 {
        for n_i in 0..=n {
            let n_j = n - n_i;
            let out = apply_beamsplitter(&FockState::basis(&[n_i, n_j]), 0, 1).unwrap();
            for k in 0..=n {
                let got = out.amplitude(&Occupation::new(&[k, n - k]));
                let want = oracle_amplitude(n_i, n_j, k);
                assert!((got - want).norm() < 1e-12, "|{n_i},{n_j}> -> k={k}: {got} vs {want}");
            }
            assert!((out.norm_sqr() - 1.0).abs() < 1e-12);
        }
    }
}

#[test]
fn beamsplitter_on_spectator_modes() {
    let out = apply_beamsplitter(&FockState::basis(&[2, 5, 1]), 0, 2).unwrap();
    for (ket, amp) in out.iter() {
        assert_eq!(ket.get(1), 5);
        let want = oracle_amplitude(2, 1, ket.get(0));
        assert!((amp - want).norm() < 1e-12);
    }
}

fn random_state(modes: usize, max_occ: u32) -> impl Strategy<Value = FockState> {
    prop::collection::vec(
        (prop::collection::vec(0..=max_occ, modes), -1.0f64..1.0, -1.0f64..1.0),
        1..8,
    )
    .prop_filter_map("zero norm", move |terms| {
        let entries = terms
            .into_iter()
            .map(|(occ, re, im)| (Occupation::new(&occ), Complex64::new(re, im)));
        FockState::new(modes, entries).ok()
    })
}

fn photon_number_distribution(state: &FockState) -> std::collections::BTreeMap<u64, f64> {
    let mut out = std::collections::BTreeMap::new();
    for (ket, amp) in state.iter() {
        *out.entry(ket.total()).or_insert(0.0) += amp.norm_sqr();
    }
    out
}

proptest! {
    #[test]
    fn beamsplitter_preserves_norm_and_photon_number(state in random_state(3, 3)) {
        let out = apply_beamsplitter(&state, 0, 1).unwrap();
        prop_assert!((out.norm_sqr() - 1.0).abs() < 1e-12);
        let before = photon_number_distribution(&state);
        let after = photon_number_distribution(&out);
        prop_assert_eq!(before.len(), after.len());
        for ((n0, p0), (n1, p1)) in before.iter().zip(after.iter()) {
            prop_assert_eq!(n0, n1);
            prop_assert!((p0 - p1).abs() < 1e-12);
        }
    }

    #[test]
    fn double_beamsplitter_swaps_modes(n_i in 0u32..6, n_j in 0u32..6) {
        let once = apply_beamsplitter(&FockState::basis(&[n_i, n_j]), 0, 1).unwrap();
        let twice = apply_beamsplitter(&once, 0, 1).unwrap();
        let phase = Complex64::i().powu(n_i + n_j);
        let target = twice.amplitude(&Occupation::new(&[n_j, n_i]));
        prop_assert!((target - phase).norm() < 1e-12);
        prop_assert!(twice.norm_sqr() - target.norm_sqr() < 1e-24);
    }

    #[test]
    fn number_operator_counts_photons(state in random_state(3, 4), mode in 0usize..3) {
        let n = Observable::from(LadderMonomial::number(mode));
        let got = expectation(&state, &n).unwrap();
        let want: f64 = state.iter().map(|(k, a)| k.get(mode) as f64 * a.norm_sqr()).sum();
        prop_assert!((got.re - want).abs() < 1e-12 * want.max(1.0));
        prop_assert!(got.im.abs() < 1e-12);
    }

    #[test]
    fn commutator_is_identity(state in random_state(2, 4), mode in 0usize..2) {
        let aad = LadderMonomial::lower(mode).then(&LadderMonomial::raise(mode));
        let ada = LadderMonomial::number(mode);
        let lhs = apply_observable(&state, &Observable::new(vec![aad, ada.scaled(Complex64::new(-1.0, 0.0))])).unwrap();
        prop_assert!((lhs.inner(&state) - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        prop_assert!((lhs.norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn hermitian_expectations_are_real(
        state in random_state(4, 3),
        ta in 0.0f64..6.3,
        tb in 0.0f64..6.3,
    ) {
        let setup = HomodyneSetup::from_quadratures(ta, tb, Budget::Photons(10.0)).unwrap();
        let obs = count_difference_observable(&setup);
        prop_assert!(obs.is_hermitian(1e-12));
        prop_assert!(expectation(&state, &obs).unwrap().im.abs() < 1e-12);
        let squared = obs.then(&obs);
        prop_assert!(expectation(&state, &squared).unwrap().im.abs() < 1e-12);
    }
}

use expsum::bounds::{guarded_floor, outer_chamber_bound, t_bound, theorem1_bound};
use expsum::gale::s_bound;
use expsum::linalg::random_orthogonal;
use expsum::zeroset::{count_components_1d, ExpSum};
use expsum::{sign_class, xi, SignVector, Spectrum};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Spectra with `n <= 2`, `2 <= k <= 4` and distinct small integer columns.
fn spectrum() -> impl Strategy<Value = Spectrum> {
    (1usize..=2, 2usize..=4)
        .prop_flat_map(|(n, k)| {
            proptest::collection::btree_set(proptest::collection::vec(0i32..=5, n), n + k)
                .prop_map(move |cols| (n, cols.into_iter().collect::<Vec<_>>()))
        })
        .prop_filter_map("non-defective", |(n, cols)| {
            let rows: Vec<Vec<f64>> = (0..n).map(|r| cols.iter().map(|c| f64::from(c[r])).collect()).collect();
            let refs: Vec<&[f64]> = rows.iter().map(|r| r.as_slice()).collect();
            let spec = Spectrum::from_rows(&refs).ok()?;
            (spec.affine_dim() == n).then_some(spec)
        })
}

fn nonzero() -> impl Strategy<Value = f64> {
    prop_oneof![0.1f64..10.0, -10.0f64..-0.1]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn null_basis_annihilates_lift(spec in spectrum()) {
        let basis = spec.null_basis().unwrap();
        prop_assert!(basis.kernel_residual(&spec.lift()) < 1e-10);
        prop_assert!(basis.orthonormality_residual() < 1e-10);
        prop_assert_eq!(basis.dim(), spec.len() - spec.affine_dim() - 1);
    }

    #[test]
    fn xi_is_projective(spec in spectrum(), seed in any::<u64>(), t in nonzero()) {
        let basis = spec.null_basis().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let lambda: Vec<f64> = (0..basis.dim()).map(|_| rand::Rng::gen_range(&mut rng, -2.0..2.0)).collect();
        if let Ok(x) = xi(&basis, &lambda) {
            let scaled: Vec<f64> = lambda.iter().map(|v| v * t).collect();
            let y = xi(&basis, &scaled).unwrap();
            for (a, b) in x.iter().zip(&y) {
                prop_assert!((a - b).abs() < 1e-9);
            }
            prop_assert_eq!(sign_class(&basis, &lambda).unwrap(), sign_class(&basis, &scaled).unwrap());
        }
    }

    #[test]
    fn xi_rotates_with_basis(spec in spectrum(), seed in any::<u64>()) {
        let basis = spec.null_basis().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let q = random_orthogonal(basis.dim(), &mut rng);
        let rotated = basis.rotated(&q);
        let lambda: Vec<f64> = (0..basis.dim()).map(|_| rand::Rng::gen_range(&mut rng, -2.0..2.0)).collect();
        let lq: Vec<f64> = (0..basis.dim())
            .map(|c| (0..basis.dim()).map(|r| lambda[r] * q[(r, c)]).sum())
            .collect();
        if let Ok(x) = xi(&basis, &lambda) {
            let y = xi(&rotated, &lq).unwrap();
            for c in 0..basis.dim() {
                let xq: f64 = (0..basis.dim()).map(|r| x[r] * q[(r, c)]).sum();
                prop_assert!((xq - y[c]).abs() < 1e-9);
            }
            prop_assert_eq!(sign_class(&basis, &lambda).unwrap(), sign_class(&rotated, &lq).unwrap());
        }
    }

    #[test]
    fn sign_vectors_are_canonical(signs in proptest::collection::vec(prop_oneof![Just(1i8), Just(-1i8)], 1..8)) {
        let s = SignVector::new(&signs).unwrap();
        let flipped: Vec<i8> = signs.iter().map(|v| -v).collect();
        prop_assert_eq!(s.as_slice()[0], 1);
        prop_assert_eq!(&s, &SignVector::new(&flipped).unwrap());
        prop_assert_eq!(s.to_string().parse::<SignVector>().unwrap(), s);
    }

    #[test]
    fn eval_scaled_matches_direct(spec in spectrum(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c: Vec<f64> = (0..spec.len()).map(|_| rand::Rng::gen_range(&mut rng, 0.5..2.0)).collect();
        let y: Vec<f64> = (0..spec.n()).map(|_| rand::Rng::gen_range(&mut rng, -3.0..3.0)).collect();
        let direct: f64 = (0..spec.len())
            .map(|j| c[j] * spec.column(j).iter().zip(&y).map(|(a, v)| a * v).sum::<f64>().exp())
            .sum();
        let g = ExpSum::new(spec, c).unwrap();
        prop_assert!((g.eval(&y) - direct).abs() <= 1e-12 * direct.abs());
    }

    #[test]
    fn descartes_and_scaling_in_one_variable(
        exps in proptest::collection::btree_set(-6i32..=6, 2..=7),
        signs in proptest::collection::vec(nonzero(), 7),
        t in nonzero(),
    ) {
        let exps: Vec<f64> = exps.into_iter().map(f64::from).collect();
        let c: Vec<f64> = signs[..exps.len()].to_vec();
        let spec = Spectrum::from_rows(&[&exps]).unwrap();
        let g = ExpSum::new(spec.clone(), c.clone()).unwrap();
        let n = count_components_1d(&g).unwrap();
        prop_assert!(n.count <= g.sign_changes());
        prop_assert!(g.sign_changes() < exps.len());
        let scaled = ExpSum::new(spec, c.iter().map(|v| v * t).collect()).unwrap();
        prop_assert_eq!(count_components_1d(&scaled).unwrap().count, n.count);
    }

    #[test]
    fn bounds_are_monotone(n in 1u64..=8, k in 1u64..=8) {
        prop_assert!(theorem1_bound(n, k) <= theorem1_bound(n + 1, k));
        prop_assert!(theorem1_bound(n, k) <= theorem1_bound(n, k + 1));
        prop_assert!(outer_chamber_bound(n, k) <= outer_chamber_bound(n + 1, k));
        prop_assert!(t_bound(n, k).is_finite() && t_bound(n, k) > 0.0);
        prop_assert!(s_bound(n, k as i64) <= s_bound(n + 1, k as i64));
    }

    #[test]
    fn guarded_floor_matches_floor_away_from_integers(x in 0.0f64..1e6) {
        let (f, flagged) = guarded_floor(x);
        if (x - x.round()).abs() > 1e-6 * x.max(1.0) {
            prop_assert_eq!(f, x.floor() as u128);
            prop_assert!(!flagged);
        }
    }
}

use ifs_jacobi::analysis::{nevai_report, powerlaw_fit};
use ifs_jacobi::io::{jacobi_to_string, parse_atoms, parse_jacobi_any, Format};
use ifs_jacobi::{
    closure, closure_atoms, convolve, frobenius_distance, gauss_rule, invert, jacobi_from_discrete, jacobi_lebesgue,
    Atoms, Ifs, Jacobi,
};
use proptest::prelude::*;

/// Discrete measures with `min..max` well separated nodes in `[-1, 1]`.
fn atoms(min: usize, max: usize) -> impl Strategy<Value = Atoms> {
    prop::collection::btree_set(-1000i32..=1000, min..max).prop_flat_map(|nodes| {
        let k = nodes.len();
        (Just(nodes), prop::collection::vec(0.05f64..1.0, k))
            .prop_map(|(nodes, w)| Atoms::normalized(nodes.into_iter().map(|x| x as f64 / 1000.0).zip(w)).unwrap())
    })
}

fn symmetric_atoms() -> impl Strategy<Value = Atoms> {
    prop::collection::btree_map(1i32..=1000, 0.05f64..1.0, 2..8).prop_map(|half| {
        Atoms::normalized(half.into_iter().flat_map(|(x, w)| {
            let x = x as f64 / 1000.0;
            [(-x, w), (x, w)]
        }))
        .unwrap()
    })
}

fn jacobi(max: usize) -> impl Strategy<Value = Jacobi> {
    (1..max).prop_flat_map(|n| {
        (prop::collection::vec(-10.0f64..10.0, n), prop::collection::vec(1e-3f64..10.0, n - 1))
            .prop_map(|(a, b)| Jacobi::new(a, b).unwrap())
    })
}

/// `sum w p_i(x) p_j(x)` for `i, j < n` with the recurrence run from `p_0 = 1`.
fn gram(m: &Atoms, j: &Jacobi, n: usize) -> Vec<Vec<f64>> {
    let mut g = vec![vec![0.0; n]; n];
    for (x, w) in m.atoms() {
        let mut p = vec![1.0, 0.0];
        p[1] = (x - j.a(0)) / j.b(1);
        for k in 1..n.saturating_sub(1) {
            let next = ((x - j.a(k)) * p[k] - j.b(k) * p[k - 1]) / j.b(k + 1);
            p.push(next);
        }
        for r in 0..n {
            for c in 0..n {
                g[r][c] += w * p[r] * p[c];
            }
        }
    }
    g
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn discrete_orthonormality(m in atoms(3, 30)) {
        // the forward recurrence loses accuracy near full rank, where b_n can be tiny
        let n = m.distinct_nodes().div_ceil(2);
        let j = jacobi_from_discrete(&m, n).unwrap();
        let g = gram(&m, &j, n);
        for (r, row) in g.iter().enumerate() {
            for (c, v) in row.iter().enumerate() {
                let target = if r == c { 1.0 } else { 0.0 };
                prop_assert!((v - target).abs() <= 1e-10, "G[{r}][{c}] = {v}");
            }
        }
    }

    #[test]
    fn full_rank_gauss_rule_recovers_atoms(m in atoms(2, 30)) {
        let k = m.distinct_nodes();
        let rule = gauss_rule(&jacobi_from_discrete(&m, k).unwrap(), k).unwrap();
        // eigenvector perturbation scales with eps over the smallest node gap
        let gap = m.nodes().windows(2).map(|w| w[1] - w[0]).fold(2.0, f64::min);
        let weight_tol = 64.0 * f64::EPSILON / gap;
        for (x, y) in rule.nodes().iter().zip(m.nodes()) {
            prop_assert!((x - y).abs() <= 1e-13, "node {x} vs {y}");
        }
        for (v, w) in rule.weights().iter().zip(m.weights()) {
            prop_assert!((v - w).abs() <= weight_tol * w, "weight {v} vs {w}");
        }
    }

    #[test]
    fn support_bound(m in atoms(2, 40)) {
        let j = jacobi_from_discrete(&m, m.distinct_nodes()).unwrap();
        prop_assert!(j.diag().iter().all(|a| a.abs() <= 1.0 + 1e-14));
        prop_assert!(j.offdiag().iter().all(|b| *b <= 1.0 + 1e-14));
    }

    #[test]
    fn text_round_trip_is_bit_exact(j in jacobi(40)) {
        prop_assert_eq!(parse_jacobi_any::<f64>(&jacobi_to_string(&j, Format::Text)).unwrap(), j.clone());
        prop_assert_eq!(parse_jacobi_any::<f64>(&jacobi_to_string(&j, Format::Json)).unwrap(), j);
    }

    #[test]
    fn atoms_text_round_trip(m in atoms(1, 20)) {
        let text = ifs_jacobi::io::atoms_to_string(&m, Format::Text);
        prop_assert_eq!(parse_atoms::<f64>(&text).unwrap(), m);
    }

    #[test]
    fn exchange_symmetry(s in atoms(12, 20), e in atoms(12, 20), delta in 0.05f64..0.95) {
        let n = 10;
        let js = jacobi_from_discrete(&s, n).unwrap();
        let je = jacobi_from_discrete(&e, n).unwrap();
        let left = convolve(&js, &je, delta, n).unwrap();
        let right = convolve(&je, &js, 1.0 - delta, n).unwrap();
        prop_assert!(frobenius_distance(&left, &right).unwrap() <= 1e-12);
    }

    #[test]
    fn closure_is_fixed_point_of_convolution(m in atoms(2, 6), delta in 0.1f64..0.9) {
        let n = 24;
        let spec = Ifs::from_atoms(delta, m.clone()).unwrap();
        let mu = closure_atoms(&m, delta, n).unwrap();
        prop_assert_eq!(&mu, &spec.closure(n).unwrap());
        let lifted = spec.convolve(&mu, n).unwrap();
        prop_assert!(frobenius_distance(&lifted, &mu).unwrap() <= 1e-10);
    }

    #[test]
    fn normalization_holds_every_step(m in atoms(2, 8), delta in 0.05f64..0.95) {
        let (_, err) = Ifs::from_atoms(delta, m).unwrap().closure_with_diagnostics(60).unwrap();
        prop_assert!(err <= 1e-10, "{err}");
    }

    #[test]
    fn prefix_stability(m in atoms(2, 6), delta in 0.05f64..0.95, k in 1usize..40) {
        let full = closure_atoms(&m, delta, 40).unwrap();
        let part = closure_atoms(&m, delta, k).unwrap();
        prop_assert_eq!(part.diag(), &full.diag()[..k]);
        prop_assert_eq!(part.b_slice(), &full.b_slice()[..k]);
    }

    #[test]
    fn symmetric_sigma_has_zero_diagonal(m in symmetric_atoms(), delta in 0.05f64..0.95) {
        let j = closure_atoms(&m, delta, 30).unwrap();
        prop_assert!(j.diag().iter().all(|a| a.abs() <= 1e-13));
    }

    #[test]
    fn delta_zero_convolution_returns_sigma(s in atoms(10, 16), e in atoms(10, 16)) {
        let n = 8;
        let js = jacobi_from_discrete(&s, n).unwrap();
        let je = jacobi_from_discrete(&e, n).unwrap();
        let out = convolve(&js, &je, 0.0, n).unwrap();
        prop_assert!(frobenius_distance(&out, &js).unwrap() <= 1e-13);
    }

    #[test]
    fn inverse_undoes_closure(delta in 1e-4f64..1e-2) {
        let sigma = jacobi_lebesgue::<f64>(30).unwrap();
        let mu = closure(&sigma, delta, 30).unwrap();
        let r = invert(&mu, delta, 30).unwrap();
        prop_assert!(r.is_complete());
        prop_assert!(frobenius_distance(&r.sigma_jacobi, &sigma).unwrap() <= 1e-10);
    }

    #[test]
    fn planted_power_law(c in 0.1f64..10.0, gamma in -3.0f64..0.5) {
        let v: Vec<f64> = (1..=300).map(|n| c * (n as f64).powf(gamma)).collect();
        let f = powerlaw_fit(&v, 10..=300).unwrap();
        prop_assert!((f.exponent - gamma).abs() <= 1e-10);
        prop_assert!((f.prefactor / c - 1.0).abs() <= 1e-9);
    }

    #[test]
    fn nevai_partial_sums_monotone(j in jacobi(60)) {
        prop_assume!(j.size() >= 2);
        let r = nevai_report(&j, Some(0.0), Some(0.5), None).unwrap();
        prop_assert!(r.partial_sums.windows(2).all(|w| w[1] >= w[0]));
        prop_assert_eq!(r.partial_sums.len(), j.size() - 1);
    }
}

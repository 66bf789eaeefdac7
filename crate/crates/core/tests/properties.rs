use proptest::prelude::*;

use intertwine::coarsen::{local_errors, schur_complement, sparsify};
use intertwine::filterbank::{analyze, build_reconstructors, green_kernel, reconstruct, wavelet_functions, KernelMethod};
use intertwine::zoo::random_connected;
use intertwine::WeightedGraph;

fn graph_and_subset() -> impl Strategy<Value = (WeightedGraph, Vec<usize>)> {
    (3usize..14, 0.2f64..0.8, any::<u64>(), prop::collection::vec(any::<bool>(), 14)).prop_filter_map(
        "proper nonempty subset",
        |(n, p, seed, mask)| {
            let kept: Vec<usize> = (0..n).filter(|&x| mask[x]).collect();
            if kept.is_empty() || kept.len() == n {
                return None;
            }
            Some((random_connected(n, p, seed).ok()?, kept))
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn one_level_reconstruction_is_exact(
        (g, kept) in graph_and_subset(),
        qscale in 0.05f64..5.0,
        f in prop::collection::vec(-10.0f64..10.0, 14),
    ) {
        let f = &f[..g.n()];
        let level = schur_complement(&g, &kept).unwrap();
        let bank = build_reconstructors(&g, &level, qscale * g.alpha()).unwrap();
        let back = reconstruct(&bank, &analyze(&bank, f).unwrap()).unwrap();
        let scale = f.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        for (a, b) in back.iter().zip(f) {
            prop_assert!((a - b).abs() <= 1e-9 * scale);
        }
    }

    #[test]
    fn kernel_is_stochastic_and_reversible((g, _) in graph_and_subset(), q in 0.01f64..20.0) {
        let k = green_kernel(&g, q, KernelMethod::Exact).unwrap();
        let mu = g.mu();
        for x in 0..g.n() {
            prop_assert!((k.row(x).sum() - 1.0).abs() < 1e-10);
            for y in 0..g.n() {
                prop_assert!(k[(x, y)] >= -1e-12);
                prop_assert!((mu[x] * k[(x, y)] - mu[y] * k[(y, x)]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn schur_complement_is_a_reversible_generator((g, kept) in graph_and_subset()) {
        let level = schur_complement(&g, &kept).unwrap();
        let m = kept.len();
        let mu = &level.mu_bar;
        prop_assert!((mu.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        for i in 0..m {
            prop_assert!(level.lbar.row(i).sum().abs() < 1e-10 * g.alpha().max(1.0));
            for j in 0..m {
                if i != j {
                    prop_assert!(level.lbar[(i, j)] >= -1e-12);
                    prop_assert!((mu[i] * level.lbar[(i, j)] - mu[j] * level.lbar[(j, i)]).abs() < 1e-10);
                }
            }
        }
        // The trace of a connected walk stays connected.
        prop_assert_eq!(level.components(), 1);
        prop_assert!(level.alpha_bar <= g.alpha() * (1.0 + 1e-12));
        prop_assert!(level.inv_gamma() > 0.0 && level.inv_beta() > 0.0);
    }

    #[test]
    fn schur_complement_composes((g, kept) in graph_and_subset(), drop_one in any::<prop::sample::Index>()) {
        // Eliminating in two steps equals eliminating at once.
        prop_assume!(kept.len() >= 2);
        let first = schur_complement(&g, &kept).unwrap();
        let pos = drop_one.index(kept.len());
        let inner: Vec<usize> = (0..kept.len()).filter(|&i| i != pos).collect();
        let two_step = schur_complement(&first.graph, &inner).unwrap();
        let direct_kept: Vec<usize> = inner.iter().map(|&i| kept[i]).collect();
        let direct = schur_complement(&g, &direct_kept).unwrap();
        let gap = (&two_step.lbar - &direct.lbar).abs().max();
        prop_assert!(gap < 1e-9 * g.alpha().max(1.0), "gap {}", gap);
    }

    #[test]
    fn wavelets_have_zero_mean((g, kept) in graph_and_subset(), qscale in 0.1f64..3.0) {
        let level = schur_complement(&g, &kept).unwrap();
        let bank = build_reconstructors(&g, &level, qscale * g.alpha()).unwrap();
        let family = wavelet_functions(&bank, &g);
        let mu = g.mu();
        for row in family.wavelets.row_iter() {
            let mean: f64 = row.iter().zip(mu).map(|(v, m)| v * m).sum();
            prop_assert!(mean.abs() < 1e-10);
        }
        for row in family.scaling.row_iter() {
            let mass: f64 = row.iter().zip(mu).map(|(v, m)| v * m).sum();
            prop_assert!((mass - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn sparsify_stays_within_budget((g, kept) in graph_and_subset(), theta in 1.0f64..10.0, qscale in 0.1f64..3.0) {
        let level = schur_complement(&g, &kept).unwrap();
        let qprime = qscale * g.alpha();
        let eps = local_errors(&level, &g, qprime).unwrap();
        let s = sparsify(&level, &eps, theta, g.alpha()).unwrap();
        let info = s.sparsification.as_ref().unwrap();
        for (x, (&used, &budget)) in info.row_perturbation.iter().zip(&info.row_budget).enumerate() {
            prop_assert!(used <= budget * (1.0 + 1e-12) + 1e-15, "row {}: {} > {}", x, used, budget);
            let expected = eps[x] * level.alpha_bar / (theta * g.alpha());
            prop_assert!((budget - expected).abs() <= 1e-12 * expected.max(1e-300));
        }
        for i in 0..kept.len() {
            prop_assert!(s.lbar.row(i).sum().abs() < 1e-10 * g.alpha().max(1.0));
        }
    }
}

use ctxscore_core::corpus::{AttentionStack, CorpusItem, Dimension, Group, RatingRecord};
use ctxscore_core::metrics::{
    clipscore, contextual_clipscore, cosine, information_flow, layer_maxima,
    normalized_mutual_information, spurts, strip_stopwords, ContextMode, StopwordList,
};
use ctxscore_core::stats::{
    aggregate_ratings, derangement, ols, pearson, shuffle_test, variance_decomposition,
};
use proptest::prelude::*;

fn vector(dim: usize) -> impl Strategy<Value = Vec<f32>> {
    prop::collection::vec(-10.0f32..10.0, dim).prop_filter("non-zero", |v| {
        v.iter().map(|x| f64::from(*x).powi(2)).sum::<f64>() > 1e-6
    })
}

fn pair() -> impl Strategy<Value = (Vec<f32>, Vec<f32>)> {
    (1usize..16).prop_flat_map(|d| (vector(d), vector(d)))
}

fn joint() -> impl Strategy<Value = (usize, usize, Vec<f64>)> {
    (1usize..6, 1usize..6).prop_flat_map(|(r, c)| {
        (
            Just(r),
            Just(c),
            prop::collection::vec(0.0f64..1.0, r * c)
                .prop_filter("positive mass", |v| v.iter().sum::<f64>() > 1e-9),
        )
    })
}

/// Random row-stochastic stack.
fn stack() -> impl Strategy<Value = AttentionStack> {
    (1usize..4, 1usize..4, 1usize..5).prop_flat_map(|(l, h, t)| {
        prop::collection::vec(0.01f32..1.0, l * h * t * t).prop_map(move |raw| {
            let mut w = raw;
            for row in w.chunks_mut(t) {
                let s: f32 = row.iter().sum();
                row.iter_mut().for_each(|v| *v /= s);
            }
            AttentionStack::new("s", &[l, h, t, t], w).unwrap()
        })
    })
}

proptest! {
    #[test]
    fn clipscore_scale_invariant((a, b) in pair(), l in 0.01f32..50.0, m in 0.01f32..50.0) {
        let sa: Vec<f32> = a.iter().map(|v| v * l).collect();
        let sb: Vec<f32> = b.iter().map(|v| v * m).collect();
        let base = clipscore(&a, &b, 1.0).unwrap();
        prop_assert!((clipscore(&sa, &sb, 1.0).unwrap() - base).abs() < 1e-5);
    }

    #[test]
    fn clipscore_clips((a, b) in pair(), scale in 0.1f64..5.0) {
        let c = cosine(&a, &b).unwrap();
        let s = clipscore(&a, &b, scale).unwrap();
        prop_assert!(s >= 0.0 && s <= scale + 1e-12);
        prop_assert_eq!(s == 0.0, c <= 0.0);
    }

    #[test]
    fn contextual_reduces_to_cosine((d, c) in pair()) {
        let norm = c.iter().map(|v| f64::from(*v).powi(2)).sum::<f64>().sqrt();
        let unit: Vec<f32> = c.iter().map(|v| (f64::from(*v) / norm) as f32).collect();
        let v = contextual_clipscore(&d, &unit, &unit, ContextMode::Literal).unwrap();
        prop_assert!((v - cosine(&d, &unit).unwrap()).abs() < 1e-5);
    }

    #[test]
    fn nmi_bounded_and_symmetric((r, c, j) in joint()) {
        let v = normalized_mutual_information(&j, r, c).unwrap();
        prop_assert!((0.0..=1.0).contains(&v));
        let mut t = vec![0.0; r * c];
        for i in 0..r {
            for k in 0..c {
                t[k * r + i] = j[i * c + k];
            }
        }
        let vt = normalized_mutual_information(&t, c, r).unwrap();
        prop_assert!((v - vt).abs() < 1e-12);
    }

    #[test]
    fn spurts_between_head_extremes(s in stack()) {
        let mut flows = Vec::new();
        for l in 0..s.layers {
            for h in 0..s.heads {
                flows.push(information_flow(s.head(l, h), s.tokens).unwrap());
            }
        }
        let lo = flows.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = flows.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let v = spurts(&s).unwrap();
        prop_assert!(v >= lo - 1e-15 && v <= hi + 1e-15);
        prop_assert!((0.0..=1.0).contains(&v));
        prop_assert_eq!(layer_maxima(&s).unwrap().len(), s.layers);
    }

    #[test]
    fn strip_idempotent(tokens in prop::collection::vec("[a-zA-Z']{0,6}", 0..20)) {
        let list = StopwordList::english();
        let once = strip_stopwords(&tokens, &list);
        prop_assert_eq!(strip_stopwords(&once, &list), once.clone());
        prop_assert!(once.iter().all(|t| !list.contains(t)));
    }

    #[test]
    fn pearson_symmetry_and_affine(
        xy in prop::collection::vec((-100.0f64..100.0, -100.0f64..100.0), 3..40),
        a in 0.1f64..10.0,
        b in -10.0f64..10.0,
    ) {
        let (x, y): (Vec<f64>, Vec<f64>) = xy.into_iter().unzip();
        let Ok(base) = pearson(&x, &y) else { return Ok(()); };
        let rev = pearson(&y, &x).unwrap();
        prop_assert!((base.r - rev.r).abs() < 1e-12);
        let ax: Vec<f64> = x.iter().map(|v| a * v + b).collect();
        prop_assert!((pearson(&ax, &y).unwrap().r - base.r).abs() < 1e-9);
        let neg: Vec<f64> = x.iter().map(|v| -a * v).collect();
        prop_assert!((pearson(&neg, &y).unwrap().r + base.r).abs() < 1e-9);
        prop_assert!((0.0..=1.0).contains(&base.p_value));
    }

    #[test]
    fn ols_residuals_orthogonal(
        rows in prop::collection::vec((-5.0f64..5.0, -5.0f64..5.0, -5.0f64..5.0), 6..40),
    ) {
        let x1: Vec<f64> = rows.iter().map(|r| r.0).collect();
        let x2: Vec<f64> = rows.iter().map(|r| r.1).collect();
        let y: Vec<f64> = rows.iter().map(|r| r.2).collect();
        let Ok(fit) = ols(&[&x1, &x2], &y, true) else { return Ok(()); };
        for col in [&vec![1.0; y.len()], &x1, &x2] {
            let dot: f64 = col.iter().zip(&fit.residuals).map(|(a, b)| a * b).sum();
            prop_assert!(dot.abs() < 1e-8, "dot = {dot}");
        }
        prop_assert!((0.0..=1.0).contains(&fit.r_squared));
    }

    #[test]
    fn joint_r2_dominates(
        rows in prop::collection::vec((-5.0f64..5.0, -5.0f64..5.0, -5.0f64..5.0), 6..40),
    ) {
        let x1: Vec<f64> = rows.iter().map(|r| r.0).collect();
        let x2: Vec<f64> = rows.iter().map(|r| r.1).collect();
        let y: Vec<f64> = rows.iter().map(|r| r.2).collect();
        let Ok(vd) = variance_decomposition(&[("a", &x1), ("b", &x2)], &y) else { return Ok(()); };
        prop_assert!(vd["a+b"] >= vd["a"].max(vd["b"]) - 1e-12);
    }

    #[test]
    fn derangement_has_no_fixed_images(
        images in prop::collection::vec(0u8..6, 2..40),
        seed in any::<u64>(),
    ) {
        let ids: Vec<String> = images.iter().map(|i| i.to_string()).collect();
        let refs: Vec<&str> = ids.iter().map(String::as_str).collect();
        if let Ok(perm) = derangement(&refs, seed) {
            let mut sorted = perm.clone();
            sorted.sort();
            prop_assert_eq!(sorted, (0..refs.len()).collect::<Vec<_>>());
            for (i, &j) in perm.iter().enumerate() {
                prop_assert_ne!(refs[i], refs[j]);
            }
        }
    }

    #[test]
    fn shuffle_is_seed_deterministic(seed in any::<u64>()) {
        let items: Vec<CorpusItem> = (0..10)
            .map(|i| CorpusItem::new(format!("d{i}"), format!("i{}", i % 4), "c", "t").unwrap())
            .collect();
        let f = |img: &str, d: &str| (img.len() * 7 + d.len()) as f64 / 10.0;
        prop_assert_eq!(
            shuffle_test(f, &items, seed).unwrap(),
            shuffle_test(f, &items, seed).unwrap()
        );
    }

    #[test]
    fn rescaling_preserves_order(values in prop::collection::vec(1i64..=5, 1..30)) {
        let ratings: Vec<RatingRecord> = values
            .iter()
            .enumerate()
            .map(|(i, v)| RatingRecord::new(format!("d{:02}", i / 2), format!("r{}", i % 2), Group::Blv, Dimension::Overall, *v).unwrap())
            .collect();
        let agg = aggregate_ratings(&ratings, Group::Blv, Dimension::Overall).unwrap();
        for a in &agg {
            prop_assert!((a.rescaled - (a.mean_value - 1.0) / 4.0).abs() < 1e-15);
            prop_assert!((0.0..=1.0).contains(&a.rescaled));
        }
        for w in agg.windows(2) {
            prop_assert_eq!(w[0].mean_value < w[1].mean_value, w[0].rescaled < w[1].rescaled);
        }
    }
}

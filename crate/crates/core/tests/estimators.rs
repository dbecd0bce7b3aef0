use hashlearn::data::SynthSpec;
use hashlearn::experiment::{mean_var, train_eval, ExperimentConfig, Method};
use hashlearn::projection::{
    cm_bucket, cm_estimate_biased, vw_estimate_inner, vw_hash, BucketHashSpec, SparseRealVector,
};
use hashlearn::rng::{derive_seed, StreamFamily};
use hashlearn::sketch::{
    estimate_pb, estimate_resemblance_bbit, minwise_sketch, resemblance, truncate_to_b_bits, BBitParams,
    ExplicitPermutationFamily, MinwiseHasher, SparseBinarySet, TwoUniversalHashFamily,
};
use rand::seq::index::sample;
use rand::Rng;

const TRIALS: u64 = 4000;

/// Non-negative vectors on disjoint supports, so the true inner product is 0.
fn disjoint_pair() -> (SparseRealVector, SparseRealVector) {
    let d = 1 << 16;
    let mut rng = StreamFamily::new(77).stream(0);
    let ids: Vec<u64> = sample(&mut rng, d as usize, 60).into_iter().map(|i| i as u64).collect();
    let mut draw = |ids: &[u64]| {
        let mut e: Vec<(u64, f64)> = ids.iter().map(|&i| (i, rng.gen_range(0.5..1.5))).collect();
        e.sort_unstable_by_key(|p| p.0);
        SparseRealVector::new(e, d).unwrap()
    };
    (draw(&ids[..30]), draw(&ids[30..]))
}

#[test]
fn count_min_overestimates_where_vw_does_not() {
    let (u1, u2) = disjoint_pair();
    assert_eq!(u1.dot(&u2), 0.0);
    let mut cm = Vec::new();
    let mut vw = Vec::new();
    for t in 0..TRIALS {
        let spec = BucketHashSpec::new(64, derive_seed(t, 0), derive_seed(t, 1)).unwrap();
        cm.push(cm_estimate_biased(&cm_bucket(&u1, &spec), &cm_bucket(&u2, &spec)).unwrap());
        vw.push(vw_estimate_inner(&vw_hash(&u1, &spec), &vw_hash(&u2, &spec)).unwrap());
    }
    let se = |v: f64| (v / TRIALS as f64).sqrt();
    let (cm_mean, cm_var) = mean_var(&cm);
    let (vw_mean, vw_var) = mean_var(&vw);
    assert!(cm.iter().all(|&x| x >= 0.0));
    assert!(cm_mean > 3.0 * se(cm_var), "count-min mean {cm_mean}");
    // expected bias: sum u1 * sum u2 / k
    let bias = u1.entries().iter().map(|e| e.1).sum::<f64>() * u2.entries().iter().map(|e| e.1).sum::<f64>() / 64.0;
    assert!((cm_mean - bias).abs() < 3.0 * se(cm_var), "{cm_mean} vs {bias}");
    assert!(vw_mean.abs() < 3.0 * se(vw_var), "vw mean {vw_mean}");
}

#[test]
fn bucket_occupancy_matches_the_birthday_law() {
    // m features thrown into k buckets: E[occupied] = k (1 - (1 - 1/k)^m)
    for (m, k) in [(50u64, 64usize), (200, 64), (1000, 4096)] {
        let mut occupied = Vec::new();
        for t in 0..500 {
            let spec = BucketHashSpec::new(k, derive_seed(t, 7), 0).unwrap();
            let mut hit = vec![false; k];
            for i in 0..m {
                hit[spec.bucket(i * 7919)] = true;
            }
            occupied.push(hit.iter().filter(|&&h| h).count() as f64);
        }
        let (mean, var) = mean_var(&occupied);
        let expected = k as f64 * (1.0 - (1.0 - 1.0 / k as f64).powi(m as i32));
        let se = (var / occupied.len() as f64).sqrt();
        assert!((mean - expected).abs() < 4.0 * se, "m={m} k={k}: {mean} vs {expected}");
    }
}

#[test]
fn two_universal_maps_double_up_at_most_p_minus_d_values() {
    // ((c1 + c2 t) mod p) mod D is injective before the outer reduction, so only
    // the p - D wrapped residues can have two preimages
    for d in [4096u64, 1000, 97] {
        let h = TwoUniversalHashFamily::new(40, d, 5).unwrap();
        let extra = h.prime() - d;
        for j in 0..h.num_hashes() {
            let mut count = vec![0u8; d as usize];
            for t in 0..d {
                count[h.hash(j, t) as usize] += 1;
            }
            assert!(count.iter().all(|&c| c <= 2));
            let doubled = count.iter().filter(|&&c| c == 2).count() as u64;
            assert!(doubled <= extra, "d={d} map {j}: {doubled} doubled values");
        }
    }
}

#[test]
fn tie_bias_is_small_and_absent_for_permutations() {
    // dense sets in a small universe hit the doubled residues often; the shift stays small
    let d = 1 << 12;
    let mut rng = StreamFamily::new(31).stream(0);
    let ids: Vec<u64> = sample(&mut rng, d as usize, 800)
        .into_iter()
        .map(|i| i as u64)
        .collect();
    let s1 = SparseBinarySet::from_unsorted(ids[..500].to_vec(), d).unwrap();
    let s2 = SparseBinarySet::from_unsorted(ids[300..].to_vec(), d).unwrap();
    let r = resemblance(&s1, &s2).unwrap();
    let params = BBitParams::new(s1.len() as u64, s2.len() as u64, d, 2).unwrap();
    let estimate = |h: &dyn MinwiseHasher| {
        let a = truncate_to_b_bits(&minwise_sketch(&s1, h).unwrap(), 2).unwrap();
        let b = truncate_to_b_bits(&minwise_sketch(&s2, h).unwrap(), 2).unwrap();
        estimate_resemblance_bbit(estimate_pb(&a, &b).unwrap(), &params)
            .unwrap()
            .value
    };
    let mut universal = Vec::new();
    let mut perms = Vec::new();
    for t in 0..200 {
        universal.push(estimate(
            &TwoUniversalHashFamily::new(100, d, derive_seed(t, 0)).unwrap(),
        ));
        perms.push(estimate(
            &ExplicitPermutationFamily::random(100, d, derive_seed(t, 1)).unwrap(),
        ));
    }
    let (mu, _) = mean_var(&universal);
    let (mp, vp) = mean_var(&perms);
    assert!((mu - r).abs() < 0.05, "2-universal mean {mu} vs {r}");
    // the finite-D collision law is only approximate, allow its O(r) error on top of noise
    assert!(
        (mp - r).abs() < 3.0 * (vp / 200.0).sqrt() + 0.01,
        "permutation mean {mp} vs {r}"
    );
}

fn spearman(xs: &[f64], ys: &[f64]) -> f64 {
    let rank = |v: &[f64]| {
        let mut idx: Vec<usize> = (0..v.len()).collect();
        idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
        let mut r = vec![0.0; v.len()];
        let mut i = 0;
        while i < idx.len() {
            let mut j = i;
            while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
                j += 1;
            }
            for &p in &idx[i..=j] {
                r[p] = (i + j) as f64 / 2.0;
            }
            i = j + 1;
        }
        r
    };
    let (rx, ry) = (rank(xs), rank(ys));
    let (mx, _) = mean_var(&rx);
    let (my, _) = mean_var(&ry);
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sx: f64 = rx.iter().map(|a| (a - mx).powi(2)).sum::<f64>().sqrt();
    let sy: f64 = ry.iter().map(|b| (b - my).powi(2)).sum::<f64>().sqrt();
    cov / (sx * sy)
}

#[test]
fn accuracy_grows_with_k() {
    let ks = vec![5, 10, 20, 50, 100, 200];
    let cfg = ExperimentConfig {
        synthetic: Some(SynthSpec {
            n: 2000,
            universe_size: 1 << 18,
            f_mean: 100,
            class_sep: 0.1,
            seed: 4,
        }),
        k: ks.clone(),
        b: vec![4],
        c: vec![1.0],
        method: Method::Bbit,
        trials: 5,
        seed: 12,
        ..ExperimentConfig::default()
    };
    let rows = train_eval(&cfg).unwrap();
    let acc: Vec<f64> = rows.iter().map(|r| r.accuracy()).collect();
    let kf: Vec<f64> = ks.iter().map(|&k| k as f64).collect();
    let rho = spearman(&kf, &acc);
    assert!(rho >= 0.9, "spearman {rho} for accuracies {acc:?}");
    assert!(acc[acc.len() - 1] > acc[0] + 0.05, "{acc:?}");
}

#[test]
fn sketches_do_not_depend_on_thread_count() {
    let spec = SynthSpec {
        n: 300,
        universe_size: 1 << 20,
        f_mean: 50,
        class_sep: 0.3,
        seed: 8,
    };
    let cfg = ExperimentConfig {
        synthetic: Some(spec),
        k: vec![20, 60],
        b: vec![2, 8],
        c: vec![0.1, 1.0],
        trials: 2,
        ..ExperimentConfig::default()
    };
    let run = |threads| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| train_eval(&cfg).unwrap())
    };
    let a: Vec<Vec<f64>> = run(1).into_iter().map(|r| r.accuracies).collect();
    let b: Vec<Vec<f64>> = run(4).into_iter().map(|r| r.accuracies).collect();
    assert_eq!(a, b);
}

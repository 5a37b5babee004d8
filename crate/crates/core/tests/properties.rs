use std::collections::BTreeMap;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wscluster::instance::{generate_network, parse_instance, serialize_instance, Coupling, CELL_SITES};
use wscluster::landscape::{classify_peaks, spin_overlap, OverlapHistogram, PeakParams, BINS};
use wscluster::scaling::{fit_linear, fit_log_corrected, FitPoint};
use wscluster::solvers::{houdayer_icm_move, superspin_reduce, IcmScratch};
use wscluster::tts::{aggregate_percentile, time_to_solution};
use wscluster::{ProblemInstance, RngStream, SpinState, WeakStrongLayout};

fn random_state(n: usize, rng: &mut impl Rng) -> Vec<i8> {
    (0..n).map(|_| if rng.random::<bool>() { 1 } else { -1 }).collect()
}

fn random_instance(n: usize, density: f64, seed: u64) -> ProblemInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut couplings = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.random::<f64>() < density {
                couplings.push(Coupling::new(i, j, if rng.random::<bool>() { 25 } else { -25 }));
            }
        }
    }
    let fields = (0..n).map(|_| [-25, 0, 11][rng.random_range(0..3)]).collect();
    ProblemInstance::new(n, 25, couplings, fields).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn delta_matches_recompute(pairs in 1usize..7, seed in any::<u64>(), state_seed in any::<u64>()) {
        let inst = generate_network(&WeakStrongLayout::for_pair_count(pairs).unwrap(), seed).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(state_seed);
        for _ in 0..20 {
            let mut state = random_state(inst.n(), &mut rng);
            let e = inst.energy(&state).unwrap();
            for site in 0..inst.n() {
                let d = inst.delta_energy(&state, site).unwrap();
                state[site] = -state[site];
                prop_assert_eq!(inst.energy(&state).unwrap(), e + d);
                state[site] = -state[site];
            }
        }
    }

    #[test]
    fn generated_fields_and_couplings(pairs in 1usize..10, seed in any::<u64>()) {
        let inst = generate_network(&WeakStrongLayout::for_pair_count(pairs).unwrap(), seed).unwrap();
        prop_assert_eq!(inst.n(), 16 * pairs);
        prop_assert!(inst.couplings().iter().all(|c| c.value.abs() == 25 && c.i < c.j));
        prop_assert!(inst.fields().iter().all(|&h| h == -25 || h == 11));
        prop_assert_eq!(inst.fields().iter().filter(|&&h| h == 11).count(), 8 * pairs);
    }

    #[test]
    fn file_round_trip(pairs in 1usize..8, seed in any::<u64>()) {
        let inst = generate_network(&WeakStrongLayout::for_pair_count(pairs).unwrap(), seed).unwrap();
        let text = serialize_instance(&inst);
        let back = parse_instance(&text).unwrap();
        prop_assert_eq!(&back, &inst);
        prop_assert_eq!(serialize_instance(&back), text);
    }

    #[test]
    fn zero_field_flip_symmetry(n in 2usize..14, seed in any::<u64>()) {
        let base = random_instance(n, 0.4, seed);
        let inst = ProblemInstance::new(n, 25, base.couplings().to_vec(), vec![0; n]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 1);
        let s = random_state(n, &mut rng);
        let flipped: Vec<i8> = s.iter().map(|x| -x).collect();
        prop_assert_eq!(inst.energy(&s).unwrap(), inst.energy(&flipped).unwrap());
    }

    #[test]
    fn icm_conserves_total_energy(n in 2usize..20, seed in any::<u64>()) {
        let inst = random_instance(n, 0.3, seed);
        let mut rng = RngStream::new(seed);
        let mut scratch = IcmScratch::new(n);
        let mut a = SpinState::random(&inst, &mut rng);
        let mut b = SpinState::random(&inst, &mut rng);
        for _ in 0..50 {
            let total = a.energy() + b.energy();
            houdayer_icm_move(&inst, &mut a, &mut b, &mut scratch, &mut rng);
            prop_assert_eq!(a.energy() + b.energy(), total);
            prop_assert!(a.is_coherent(&inst) && b.is_coherent(&inst));
            let flip = rng.random_range(0..n);
            a.flip(&inst, flip);
        }
    }

    #[test]
    fn superspin_identity(pairs in 1usize..10, seed in any::<u64>()) {
        let inst = generate_network(&WeakStrongLayout::for_pair_count(pairs).unwrap(), seed).unwrap();
        let red = superspin_reduce(&inst).unwrap();
        prop_assert_eq!(red.reduced().n(), inst.n() / CELL_SITES);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..50 {
            let logical = random_state(red.reduced().n(), &mut rng);
            let full = red.lift(&logical).unwrap();
            prop_assert_eq!(red.reduced_energy(&logical).unwrap(), inst.energy(&full).unwrap());
        }
    }

    #[test]
    fn tts_monotone_in_p(p1 in 0.0f64..=1.0, p2 in 0.0f64..=1.0, t in 1.0f64..1e6) {
        let (lo, hi) = if p1 <= p2 { (p1, p2) } else { (p2, p1) };
        prop_assert!(time_to_solution(hi, t).unwrap() <= time_to_solution(lo, t).unwrap());
        if hi > 0.99 {
            prop_assert_eq!(time_to_solution(hi, t).unwrap(), t);
        }
    }

    #[test]
    fn percentile_permutation_and_scale(
        values in prop::collection::vec(prop_oneof![9 => 1.0f64..1e6, 1 => Just(f64::INFINITY)], 1..40),
        factor in 0.01f64..100.0,
        pct in 1.0f64..99.0,
        shuffle_seed in any::<u64>(),
    ) {
        prop_assume!(values.iter().any(|v| v.is_finite()));
        let base = aggregate_percentile(&values, pct, &mut RngStream::new(5)).unwrap();
        let mut shuffled = values.clone();
        let mut rng = ChaCha8Rng::seed_from_u64(shuffle_seed);
        for i in (1..shuffled.len()).rev() {
            shuffled.swap(i, rng.random_range(0..=i));
        }
        prop_assert_eq!(aggregate_percentile(&shuffled, pct, &mut RngStream::new(5)).unwrap(), base);
        let scaled: Vec<f64> = values.iter().map(|v| v * factor).collect();
        let (v, ci, c) = aggregate_percentile(&scaled, pct, &mut RngStream::new(5)).unwrap();
        prop_assert!(v == base.0 * factor || (v - base.0 * factor).abs() <= 1e-12 * v.abs());
        prop_assert!(ci.low == base.1.low * factor || (ci.low - base.1.low * factor).abs() <= 1e-12 * ci.low.abs());
        prop_assert_eq!(c, base.2);
    }

    #[test]
    fn fit_shift_equivariance(a in -3.0f64..3.0, b in 0.0f64..0.3, c in -2.0f64..2.0, wiggle in 0.0f64..0.2) {
        let pts: Vec<FitPoint> = [64.0, 144.0, 256.0, 400.0, 576.0]
            .iter()
            .enumerate()
            .map(|(k, &n): (usize, &f64)| FitPoint {
                n,
                log10_tts: a + b * n.sqrt() + c * n.sqrt().log10() + wiggle * (k as f64 * 1.3).sin(),
            })
            .collect();
        let shifted: Vec<FitPoint> = pts.iter().map(|p| FitPoint { n: p.n, log10_tts: p.log10_tts + 1.0 }).collect();
        let (l0, l1) = (fit_linear(&pts, 0).unwrap(), fit_linear(&shifted, 0).unwrap());
        prop_assert!((l1.a - l0.a - 1.0).abs() < 1e-9 && (l1.b - l0.b).abs() < 1e-9);
        let (g0, g1) = (fit_log_corrected(&pts).unwrap(), fit_log_corrected(&shifted).unwrap());
        prop_assert!((g1.a - g0.a - 1.0).abs() < 1e-9 && (g1.b - g0.b).abs() < 1e-9);
        prop_assert!((g1.c.unwrap() - g0.c.unwrap()).abs() < 1e-9);
    }

    #[test]
    fn overlap_symmetric(n in 1usize..64, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_state(n, &mut rng);
        let b = random_state(n, &mut rng);
        prop_assert_eq!(spin_overlap(&a, &b).unwrap(), spin_overlap(&b, &a).unwrap());
        prop_assert_eq!(spin_overlap(&a, &b).unwrap() == 1.0, a == b);
    }

    #[test]
    fn histogram_merge_order_free(qs in prop::collection::vec(-1.0f64..=1.0, 3..200), cut1 in 0usize..100, cut2 in 0usize..100) {
        let (i, j) = (cut1.min(qs.len()), cut2.min(qs.len()));
        let (i, j) = (i.min(j), i.max(j));
        let part = |range: &[f64]| {
            let mut h = OverlapHistogram::new(0.5, 0.5);
            range.iter().for_each(|&q| h.record(q));
            h
        };
        let (x, y, z) = (part(&qs[..i]), part(&qs[i..j]), part(&qs[j..]));
        let mut left = x.clone();
        left.merge(&y).unwrap();
        left.merge(&z).unwrap();
        let mut right = z.clone();
        let mut yx = y.clone();
        yx.merge(&x).unwrap();
        right.merge(&yx).unwrap();
        prop_assert_eq!(&left, &right);
        prop_assert_eq!(left, part(&qs));
    }

    #[test]
    fn classification_count_scale_invariant(counts in prop::collection::vec(0u64..50, BINS), k in 1u64..20) {
        prop_assume!(counts.iter().any(|&c| c > 0));
        let mut h = OverlapHistogram::new(0.5, 0.5);
        h.counts = counts.clone();
        let mut hk = h.clone();
        hk.counts = counts.iter().map(|c| c * k).collect();
        let p = PeakParams::default();
        let (a, b) = (classify_peaks(&h, &p).unwrap(), classify_peaks(&hk, &p).unwrap());
        prop_assert_eq!(a.classification, b.classification);
        prop_assert_eq!(a.peaks.len(), b.peaks.len());
    }
}

#[test]
fn exhaustive_minimum_not_above_all_down() {
    for seed in 0..5 {
        let inst = generate_network(&WeakStrongLayout::single_pair(), seed).unwrap();
        let (ground, state) = wscluster::instance::brute_force_ground_state(&inst).unwrap();
        let down = inst.energy(&inst.all_down()).unwrap();
        assert!(ground <= down);
        if ground == down {
            assert_eq!(state, inst.all_down());
        }
    }
}

#[test]
fn reference_methods_by_size() {
    let small = generate_network(&WeakStrongLayout::single_pair(), 0).unwrap();
    assert_eq!(small.reference_method(), wscluster::ReferenceMethod::Exhaustive);
    let big = generate_network(&WeakStrongLayout::for_pair_count(4).unwrap(), 0).unwrap();
    assert_eq!(big.reference_method(), wscluster::ReferenceMethod::Construction);
    assert_eq!(big.reference_energy_scaled(), Some(big.energy(&big.all_down()).unwrap()));
    let mut by_n = BTreeMap::new();
    for p in [4, 9, 16, 25] {
        by_n.insert(p, generate_network(&WeakStrongLayout::for_pair_count(p).unwrap(), 1).unwrap().n());
    }
    assert_eq!(by_n.into_values().collect::<Vec<_>>(), vec![64, 144, 256, 400]);
}

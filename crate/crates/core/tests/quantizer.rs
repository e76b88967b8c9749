use dcsi_core::allocation::BitAllocation;
use dcsi_core::channel::{complex_gaussian, ChannelModel, RandomStream};
use dcsi_core::numerics::ComplexMatrix;
use dcsi_core::quantizer::*;
use num_complex::Complex64;
use proptest::prelude::*;

fn gaussian_vec(m: usize, stream: RandomStream) -> Vec<Complex64> {
    let mut rng = stream.rng();
    (0..m).map(|_| complex_gaussian(&mut rng)).collect()
}

fn mean_sin2(m: usize, bits: u32, draws: u64, rvq: bool, seed: u64) -> f64 {
    let support: Vec<usize> = (0..m).collect();
    let total: f64 = (0..draws)
        .map(|t| {
            let h = gaussian_vec(m, RandomStream::derive(seed, &[0, t]));
            let q = RandomStream::derive(seed, &[1, t]);
            let est = if rvq {
                rvq_quantize(&h, &support, bits, q)
            } else {
                error_model_quantize(&h, &support, bits, q)
            }
            .unwrap();
            chordal_sin2(&h, &est)
        })
        .sum();
    total / draws as f64
}

fn sin2_samples(m: usize, draws: u64, rvq: bool, seed: u64) -> Vec<f64> {
    let support: Vec<usize> = (0..m).collect();
    (0..draws)
        .map(|t| {
            let h = gaussian_vec(m, RandomStream::derive(seed, &[0, t]));
            let q = RandomStream::derive(seed, &[1, t]);
            let est = if rvq {
                rvq_quantize(&h, &support, 0, q)
            } else {
                error_model_quantize(&h, &support, 0, q)
            }
            .unwrap();
            chordal_sin2(&h, &est)
        })
        .collect()
}

#[test]
fn zero_bits_carry_no_information() {
    let m = 3;
    let mean = mean_sin2(m, 0, 10_000, true, 1);
    assert!((mean - (m as f64 - 1.0) / m as f64).abs() < 0.02, "{mean}");
}

#[test]
fn rvq_small_codebook_mean() {
    let mean = mean_sin2(2, 4, 10_000, true, 2);
    assert!((mean - 0.0625).abs() <= 0.2 * 0.0625, "{mean}");
    // order statistic of 16 uniform chordal errors
    assert!((mean - 1.0 / 17.0).abs() <= 0.05 / 17.0, "{mean}");
}

#[test]
fn rvq_large_codebook_tail() {
    let support = [0, 1];
    let draws = 2_000;
    let good = (0..draws)
        .filter(|&t| {
            let h = gaussian_vec(2, RandomStream::derive(3, &[0, t]));
            let est = rvq_quantize(&h, &support, 12, RandomStream::derive(3, &[1, t])).unwrap();
            chordal_sin2(&h, &est) <= 0.01
        })
        .count();
    assert!(good as f64 >= 0.95 * draws as f64);
}

#[test]
fn error_model_mean_matches_rate() {
    let mean = mean_sin2(2, 10, 10_000, false, 4);
    let target = 2f64.powi(-10);
    assert!(mean >= 0.8 * target && mean <= 1.2 * target, "{mean}");
}

fn ks_statistic(mut a: Vec<f64>, mut b: Vec<f64>) -> f64 {
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (mut i, mut j, mut d) = (0, 0, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / a.len() as f64 - j as f64 / b.len() as f64).abs());
    }
    d
}

#[test]
fn zero_bit_paths_agree_in_distribution() {
    let n = 2_000;
    let d = ks_statistic(sin2_samples(3, n, true, 5), sin2_samples(3, n, false, 6));
    let critical = 1.358 * (2.0 / n as f64).sqrt();
    assert!(d < critical, "D = {d}, critical {critical}");
}

#[test]
fn error_shrinks_with_bits() {
    let means: Vec<f64> = [0, 2, 4, 8, 12].iter().map(|&b| mean_sin2(2, b, 10_000, true, 7)).collect();
    for w in means.windows(2) {
        assert!(w[1] <= 1.05 * w[0], "{means:?}");
    }
}

#[test]
fn full_scaling_estimate_is_accurate_at_high_power() {
    let (k, power) = (6, 1e6);
    let bits = (2.0 * f64::log2(power)).ceil() as u32;
    let alloc = BitAllocation::per_vector(k, |_, _| bits);
    let spec = QuantizerSpec::default();
    let (mut err, mut energy) = (0.0, 0.0);
    for t in 0..200u64 {
        let h = ChannelModel::Wyner.generate(k, 0.5, RandomStream::new(8, t)).unwrap();
        for j in 0..k {
            let est = build_local_estimate(&h, ChannelModel::Wyner, 0.5, j, &alloc, &spec, RandomStream::derive(8, &[t, j as u64])).unwrap();
            err += (&est.matrix - &h).frobenius_norm().powi(2);
            energy += h.frobenius_norm().powi(2);
        }
    }
    assert!(err / energy <= 1e-4, "{}", err / energy);
}

#[test]
fn zero_allocation_uses_fallback_rows() {
    let k = 5;
    let h = ChannelModel::Wyner.generate(k, 0.7, RandomStream::new(9, 0)).unwrap();
    let est = build_local_estimate(&h, ChannelModel::Wyner, 0.7, 2, &BitAllocation::zeros(k), &QuantizerSpec::default(), RandomStream::new(9, 1)).unwrap();
    assert!(est.row_bits.iter().all(|&b| b == 0));
    for i in 0..k {
        let norm = |m: &ComplexMatrix| m.row(i).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        assert!((norm(&est.matrix) - norm(&h)).abs() < 1e-12);
        assert!(chordal_sin2(est.matrix.row(i), h.row(i)) > 1e-6);
    }
}

#[test]
fn transmitters_quantize_independently() {
    let k = 4;
    let h = ChannelModel::Wyner.generate(k, 0.5, RandomStream::new(10, 0)).unwrap();
    let alloc = BitAllocation::per_vector(k, |_, _| 6);
    let spec = QuantizerSpec::new(QuantizerKind::Rvq);
    let a = build_local_estimate(&h, ChannelModel::Wyner, 0.5, 0, &alloc, &spec, RandomStream::new(10, 1)).unwrap();
    let b = build_local_estimate(&h, ChannelModel::Wyner, 0.5, 1, &alloc, &spec, RandomStream::new(10, 2)).unwrap();
    assert_ne!(a.matrix, b.matrix);
    let again = build_local_estimate(&h, ChannelModel::Wyner, 0.5, 0, &alloc, &spec, RandomStream::new(10, 1)).unwrap();
    assert_eq!(a.matrix, again.matrix);
}

proptest! {
    #[test]
    fn vector_quantizers_keep_norm(seed in any::<u64>(), bits in 0u32..10, m in 1usize..5, rvq in any::<bool>()) {
        let h = gaussian_vec(m, RandomStream::new(seed, 0));
        let support: Vec<usize> = (0..m).collect();
        let est = if rvq {
            rvq_quantize(&h, &support, bits, RandomStream::new(seed, 1))
        } else {
            error_model_quantize(&h, &support, bits, RandomStream::new(seed, 1))
        }.unwrap();
        let n = |v: &[Complex64]| v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        prop_assert!((n(&est) - n(&h)).abs() <= 1e-12 * n(&h).max(1.0));
    }

    #[test]
    fn wyner_estimates_stay_tridiagonal(seed in any::<u64>(), bits in 0u32..20, scalar in any::<bool>()) {
        let k = 6;
        let h = ChannelModel::Wyner.generate(k, 0.5, RandomStream::new(seed, 0)).unwrap();
        let alloc = BitAllocation::per_vector(k, |j, i| if i.abs_diff(j) < 3 { bits } else { 0 });
        let spec = QuantizerSpec::new(if scalar { QuantizerKind::Scalar } else { QuantizerKind::ErrorModel });
        let est = build_local_estimate(&h, ChannelModel::Wyner, 0.5, 3, &alloc, &spec, RandomStream::new(seed, 1)).unwrap();
        prop_assert!(est.matrix.is_tridiagonal());
    }

    #[test]
    fn fine_scalar_quantization(re in -2.8f64..2.8, im in -2.8f64..2.8) {
        let sigma = 2f64.sqrt();
        let x = Complex64::new(re, im);
        prop_assert!((scalar_quantize(x, sigma, 20, 4.0) - x).norm() <= 1e-2 * sigma);
    }
}

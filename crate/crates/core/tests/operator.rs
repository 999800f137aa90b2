mod common;

use qama_core::anneal::{BackendConfig, DEFAULT_BRUTE_CAP};
use qama_core::hamiltonian::{dynamic_coefficients, energy_breakdown};
use qama_core::operator::{backward, energy_output_with_masks, extract_head_masks, forward};
use qama_core::synth::generate_instance;
use qama_core::{AttentionInput, CoefficientConfig, SelectionMask, Shape, Tensor4};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn brute() -> BackendConfig {
    BackendConfig::Brute {
        cap: DEFAULT_BRUTE_CAP,
    }
}

fn random_tensor(shape: Shape, rng: &mut ChaCha8Rng) -> Tensor4 {
    let data = (0..shape.numel())
        .map(|_| rng.random_range(-1.0..1.0))
        .collect();
    Tensor4::from_vec(shape, data).unwrap()
}

fn loss(
    input: &AttentionInput,
    cfg: &CoefficientConfig,
    masks: &[SelectionMask],
    g: &Tensor4,
) -> f64 {
    let out = energy_output_with_masks(input, cfg, masks).unwrap();
    out.e_dist
        .data()
        .iter()
        .zip(g.data())
        .map(|(a, b)| a * b)
        .sum()
}

fn check(analytic: f64, numeric: f64) -> bool {
    if analytic.abs() < 1e-6 {
        (analytic - numeric).abs() < 1e-8
    } else {
        (analytic - numeric).abs() / analytic.abs() < 1e-4
    }
}

#[test]
fn gradients_match_central_differences() {
    let cfg = CoefficientConfig::default();
    let step = 1e-5;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut instances = 0;
    let mut nonzero_masks = 0;
    for seed in 0..24u64 {
        let heads = 1 + seed as usize % 2;
        let seq_len = 2 + seed as usize % 3;
        let dim = 1 + seed as usize % 4;
        let shape = Shape::new(2, heads, seq_len, dim).unwrap();
        let input = generate_instance(&shape, seed).unwrap();
        let (_, cache) = forward(&input, &cfg, &brute(), seed).unwrap();
        nonzero_masks += cache.masks.iter().filter(|m| m.count_ones() > 0).count();
        let g = random_tensor(shape, &mut rng);
        let grads = backward(&g, &cache).unwrap();
        let masks = &cache.masks;

        for which in 0..3 {
            let analytic = [&grads.dq, &grads.dk, &grads.dv][which];
            for idx in 0..shape.numel() {
                let perturbed = |delta: f64| {
                    let mut inp = input.clone();
                    let t = match which {
                        0 => &mut inp.q,
                        1 => &mut inp.k,
                        _ => &mut inp.v,
                    };
                    *t = t.with_entry(idx, t.data()[idx] + delta);
                    loss(&inp, &cfg, masks, &g)
                };
                let numeric = (perturbed(step) - perturbed(-step)) / (2.0 * step);
                let a = analytic.data()[idx];
                assert!(
                    check(a, numeric),
                    "seed {seed} tensor {which} idx {idx}: {a} vs {numeric}"
                );
            }
        }
        for d in 0..dim {
            let perturbed = |delta: f64| {
                let mut inp = input.clone();
                inp.w_eps[d] += delta;
                loss(&inp, &cfg, masks, &g)
            };
            let numeric = (perturbed(step) - perturbed(-step)) / (2.0 * step);
            let a = grads.dw_eps[d];
            assert!(check(a, numeric), "seed {seed} w_eps {d}: {a} vs {numeric}");
        }
        instances += 1;
    }
    assert!(instances >= 20);
    assert!(nonzero_masks > 0);
}

#[test]
fn gradient_shapes_and_finiteness() {
    let shape = Shape::new(2, 2, 3, 4).unwrap();
    let input = generate_instance(&shape, 5).unwrap();
    let (out, cache) = forward(&input, &CoefficientConfig::default(), &brute(), 0).unwrap();
    assert_eq!(out.e_dist.shape(), input.v.shape());
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let g = backward(&random_tensor(shape, &mut rng), &cache).unwrap();
    for t in [&g.dq, &g.dk, &g.dv] {
        assert_eq!(t.shape(), shape);
        assert!(t.is_finite());
    }
    assert_eq!(g.dw_eps.len(), shape.dim);
    assert!(g.dw_eps.iter().all(|x| x.is_finite()));
}

#[test]
fn output_matches_breakdown_and_excludes_penalty() {
    let cfg = CoefficientConfig::default();
    for seed in 0..20u64 {
        let shape = Shape::new(3, 2, 4, 3).unwrap();
        let input = generate_instance(&shape, seed).unwrap();
        let (out, cache) = forward(&input, &cfg, &brute(), seed).unwrap();
        let coeff = dynamic_coefficients(&shape, &cfg);
        for b in 0..shape.batch {
            let mask = &cache.masks[b];
            let br = energy_breakdown(mask, &cache.couplings[b], &cache.fields[b], &coeff).unwrap();
            let expected = -br.h_alpha - coeff.rho * br.h_beta;
            assert!((out.e_out[b] - expected).abs() < 1e-9);
            let block = shape.heads * shape.seq_len;
            let sum: f64 = out.e_token[b * block..(b + 1) * block].iter().sum();
            assert!((sum - out.e_out[b]).abs() < 1e-9);
            for t in 0..shape.heads {
                for i in 0..shape.seq_len {
                    for d in 0..shape.dim {
                        assert_eq!(
                            out.e_dist.get(b, t, i, d),
                            out.token(b, t, i) * input.w_eps[d]
                        );
                    }
                }
            }
        }

        // a different lambda changes the solved problem, never e_out for a fixed mask
        let other = CoefficientConfig::new(cfg.rho0, 0.05).unwrap();
        let again = energy_output_with_masks(&input, &other, &cache.masks).unwrap();
        assert_eq!(again.e_out, out.e_out);
        assert_eq!(again.e_token, out.e_token);
    }
}

#[test]
fn batch_permutation_permutes_outputs() {
    let shape = Shape::new(3, 2, 3, 2).unwrap();
    let input = generate_instance(&shape, 8).unwrap();
    let perm = [2usize, 0, 1];
    let block = shape.heads * shape.seq_len * shape.dim;
    let permute = |t: &Tensor4| {
        let data = perm
            .iter()
            .flat_map(|&b| t.data()[b * block..(b + 1) * block].to_vec())
            .collect();
        Tensor4::from_vec(shape, data).unwrap()
    };
    let permuted = AttentionInput::new(
        permute(&input.q),
        permute(&input.k),
        permute(&input.v),
        input.w_eps.clone(),
    )
    .unwrap();
    let cfg = CoefficientConfig::default();
    for backend in [brute(), BackendConfig::default()] {
        let (a, _) = forward(&input, &cfg, &backend, 3).unwrap();
        let (b, _) = forward(&permuted, &cfg, &backend, 3).unwrap();
        for (new, &old) in perm.iter().enumerate() {
            assert_eq!(b.e_out[new], a.e_out[old]);
        }
        assert_eq!(b.e_dist, permute(&a.e_dist));
    }
}

#[test]
fn w_eps_scaling_recomputed() {
    let shape = Shape::new(1, 2, 3, 3).unwrap();
    let input = generate_instance(&shape, 4).unwrap();
    let cfg = CoefficientConfig::default();
    let (_, cache) = forward(&input, &cfg, &brute(), 0).unwrap();
    let c = 2.5;
    let mut scaled = input.clone();
    scaled.w_eps.iter_mut().for_each(|w| *w *= c);
    let base = energy_output_with_masks(&input, &cfg, &cache.masks).unwrap();
    let out = energy_output_with_masks(&scaled, &cfg, &cache.masks).unwrap();

    let coeff = dynamic_coefficients(&shape, &cfg);
    let n = shape.seq_len;
    let mask = &cache.masks[0];
    for t in 0..shape.heads {
        for i in 0..n {
            let s = if mask.get(t * n + i) { 1.0 } else { 0.0 };
            let pair: f64 = (0..n)
                .filter(|&j| j != i && mask.get(t * n + j))
                .map(|j| cache.couplings[0].get(t, i, j))
                .sum();
            let field = cache.fields[0].get(t, i);
            let token = -s * (0.5 * pair + coeff.rho * c * field);
            assert!((out.token(0, t, i) - token).abs() < 1e-12);
            for d in 0..shape.dim {
                let expected = token * input.w_eps[d] * c;
                assert!((out.e_dist.get(0, t, i, d) - expected).abs() < 1e-12);
            }
        }
    }
    assert_eq!(base.e_dist.shape(), out.e_dist.shape());
}

#[test]
fn single_token_sequence() {
    let shape = Shape::new(1, 2, 1, 3).unwrap();
    let input = generate_instance(&shape, 2).unwrap();
    let (out, cache) = forward(&input, &CoefficientConfig::default(), &brute(), 0).unwrap();
    let coeff = dynamic_coefficients(&shape, &CoefficientConfig::default());
    for t in 0..2 {
        let s = if cache.masks[0].get(t) { 1.0 } else { 0.0 };
        assert_eq!(
            out.token(0, t, 0),
            -s * coeff.rho * cache.fields[0].get(t, 0)
        );
    }
    assert!(out.e_out[0].is_finite());
}

#[test]
fn head_masks_flatten_back() {
    let shape = Shape::new(2, 3, 4, 2).unwrap();
    let input = generate_instance(&shape, 6).unwrap();
    let (_, cache) = forward(&input, &CoefficientConfig::default(), &brute(), 0).unwrap();
    for (maps, mask) in extract_head_masks(&cache).iter().zip(&cache.masks) {
        assert_eq!(maps.rows.len(), 3);
        assert!(maps.rows.iter().all(|r| r.len() == 4));
        assert_eq!(&maps.flatten(), mask);
    }
}

#[test]
fn forward_is_deterministic() {
    let shape = Shape::new(2, 2, 6, 4).unwrap();
    let input = generate_instance(&shape, 1).unwrap();
    let cfg = CoefficientConfig::default();
    let a = forward(&input, &cfg, &BackendConfig::default(), 17).unwrap();
    let b = forward(&input, &cfg, &BackendConfig::default(), 17).unwrap();
    assert_eq!(a, b);
}

#[test]
fn non_finite_input_rejected() {
    let shape = Shape::new(1, 1, 2, 1).unwrap();
    let mut input = generate_instance(&shape, 0).unwrap();
    input.v = input.v.with_entry(0, f64::NAN);
    assert!(forward(&input, &CoefficientConfig::default(), &brute(), 0).is_err());
}

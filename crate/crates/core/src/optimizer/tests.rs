use std::collections::HashMap;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::ansatz::{init_params, Dtype, GpsModel, GpsVariant, LogDerivatives, ModelSpec};
use crate::hamiltonians::{Hamiltonian, HeisenbergParams};
use crate::hilbert::{Boundary, Configuration, Lattice, LocalSpace, SiteOrdering};
use crate::oracle::{exact_ground_state, SectorBasis};
use crate::sampling::direct_batch;
use crate::symmetry::GaugeConstraint;

fn real_rows(rows: &[&[f64]]) -> Vec<LogDerivatives> {
    rows.iter().map(|r| LogDerivatives::Real(r.to_vec())).collect()
}

#[test]
fn constant_derivatives_give_zero_metric() {
    let o = real_rows(&[&[1.0, 2.0], &[1.0, 2.0], &[1.0, 2.0]]);
    let e = [1.0, -3.0, 2.0].map(|v| Complex64::new(v, 0.0));
    let q = accumulate_qgt(&[1.0; 3], &o, &e);
    assert!(q.dense_s().iter().all(|&v| v == 0.0));
    assert!(q.gradient.iter().all(|&v| v == 0.0));
}

#[test]
fn hand_covariance() {
    let o = real_rows(&[&[1.0], &[-1.0]]);
    let e = [Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0)];
    let q = accumulate_qgt(&[0.5, 0.5], &o, &e);
    assert!((q.dense_s()[(0, 0)] - 1.0).abs() < 1e-15);
    assert!((q.gradient[0] - 1.0).abs() < 1e-15);
    assert_eq!(q.energy, Complex64::new(0.0, 0.0));
}

#[test]
fn complex_metric_matches_definition() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (n, p) = (40, 5);
    let o: Vec<Vec<Complex64>> = (0..n)
        .map(|_| {
            (0..p)
                .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect()
        })
        .collect();
    let e: Vec<Complex64> = (0..n)
        .map(|_| Complex64::new(rng.gen_range(-2.0..0.0), rng.gen_range(-0.1..0.1)))
        .collect();
    let w: Vec<f64> = (0..n).map(|_| rng.gen_range(0.5..2.0)).collect();
    let q = accumulate_qgt(
        &w,
        &o.iter().cloned().map(LogDerivatives::Complex).collect::<Vec<_>>(),
        &e,
    );

    let wsum: f64 = w.iter().sum();
    let avg = |f: &dyn Fn(usize) -> Complex64| (0..n).map(|s| w[s] * f(s)).sum::<Complex64>() / wsum;
    let s = q.dense_s();
    for i in 0..p {
        let oi = avg(&|s| o[s][i]);
        let want_g = avg(&|s| o[s][i].conj() * e[s]) - oi.conj() * avg(&|s| e[s]);
        assert!((q.gradient[i] - want_g.re).abs() < 1e-12);
        for j in 0..p {
            let oj = avg(&|s| o[s][j]);
            let want = avg(&|s| o[s][i].conj() * o[s][j]) - oi.conj() * oj;
            assert!((s[(i, j)] - want.re).abs() < 1e-12);
        }
    }
}

#[test]
fn regularization_examples() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let a = DMatrix::from_fn(4, 4, |_, _| rng.gen_range(-1.0..1.0));
    let s = &a * a.transpose();
    let v = vec![0.3, 1.0, 2.0, 0.0];
    assert_eq!(regularize(&s, &v, 0.0), s);

    let r = regularize(&s, &[1.0; 4], 1.0);
    assert_eq!(r, DMatrix::identity(4, 4) * (1.0 + 1e-8));

    let r = regularize(&DMatrix::identity(3, 3), &[4.0; 3], 0.1);
    for k in 0..3 {
        assert!((r[(k, k)] - (0.9 + 0.1 * (2.0 + 1e-8))).abs() < 1e-15);
    }
    assert_eq!(r[(0, 1)], 0.0);
}

#[test]
fn moving_average() {
    let mut v = vec![0.0];
    update_moving_average(&mut v, &[2.0], 0.9);
    assert!((v[0] - 0.4).abs() < 1e-15);
    for _ in 0..5 {
        let before = v[0];
        update_moving_average(&mut v, &[0.0], 0.9);
        assert!((v[0] - 0.9 * before).abs() < 1e-16);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let beta = 0.9;
    let g: Vec<f64> = (0..60).map(|_| rng.gen_range(-3.0..3.0)).collect();
    let mut v = vec![0.0];
    for gt in &g {
        update_moving_average(&mut v, &[*gt], beta);
    }
    let t = g.len() - 1;
    let closed: f64 = (0..=t)
        .map(|k| (1.0 - beta) * beta.powi(k as i32) * g[t - k].powi(2))
        .sum();
    assert!((v[0] - closed).abs() < 1e-12);
}

#[test]
fn cg_trivial_systems() {
    let g = vec![1.0, -2.0, 0.5];
    let id = |x: &[f64], out: &mut [f64]| out.copy_from_slice(x);
    let r = conjugate_gradient(id, &g, None, 1e-12, 10).unwrap();
    assert!(r.converged);
    assert!(r.x.iter().zip(&g).all(|(a, b)| (a - b).abs() < 1e-14));

    let d = [2.0, 4.0, 0.5];
    let diag = |x: &[f64], out: &mut [f64]| {
        for k in 0..3 {
            out[k] = d[k] * x[k];
        }
    };
    let r = conjugate_gradient(diag, &g, None, 1e-12, 10).unwrap();
    for k in 0..3 {
        assert!((r.x[k] - g[k] / d[k]).abs() < 1e-12);
    }
    let r = conjugate_gradient(id, &[0.0; 3], None, 1e-12, 10).unwrap();
    assert_eq!(r.x, vec![0.0; 3]);
    assert!(conjugate_gradient(id, &[f64::NAN, 0.0, 0.0], None, 1e-6, 10).is_err());
}

fn random_spd(n: usize, seed: u64) -> DMatrix<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
    &a * a.transpose() + DMatrix::identity(n, n) * 0.1
}

#[test]
fn cg_matches_dense_solve() {
    let m = random_spd(50, 2);
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let b: Vec<f64> = (0..50).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let apply = |x: &[f64], out: &mut [f64]| {
        let y = &m * nalgebra::DVector::from_column_slice(x);
        out.copy_from_slice(y.as_slice());
    };
    let exact = m.clone().lu().solve(&nalgebra::DVector::from_column_slice(&b)).unwrap();
    let inv_diag: Vec<f64> = m.diagonal().iter().map(|d| 1.0 / d).collect();
    for pre in [None, Some(inv_diag.as_slice())] {
        let r = preconditioned_cg(apply, pre, &b, None, 1e-10, 1000).unwrap();
        assert!(r.converged);
        let diff = (nalgebra::DVector::from_column_slice(&r.x) - &exact).norm() / exact.norm();
        assert!(diff < 1e-5, "{diff}");
    }
    let capped = conjugate_gradient(apply, &b, None, 1e-14, 3).unwrap();
    assert!(!capped.converged);
    assert_eq!(capped.iterations, 3);
    assert!(capped.relative_residual <= 1.0);
}

#[test]
fn dense_and_matrix_free_operators_agree() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let (rows, p) = (30, 8);
    let o: Vec<LogDerivatives> = (0..rows)
        .map(|_| LogDerivatives::Real((0..p).map(|_| rng.gen_range(-1.0..1.0)).collect()))
        .collect();
    let e: Vec<Complex64> = (0..rows)
        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), 0.0))
        .collect();
    let q = accumulate_qgt(&vec![1.0; rows], &o, &e);
    let v: Vec<f64> = (0..p).map(|_| rng.gen_range(0.0..1.0)).collect();
    let dense = q.regularized_operator(&v, 0.2);
    assert!(matches!(dense, RegularizedS::Dense(_)));
    let x: Vec<f64> = (0..p).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let (mut a, mut b) = (vec![0.0; p], vec![0.0; p]);
    dense.apply(&x, &mut a);
    q.apply_regularized(&v, 0.2, &x, &mut b);
    assert!(a.iter().zip(&b).all(|(s, t)| (s - t).abs() < 1e-12));
    let direct = dense.solve_direct(&q.gradient).unwrap();
    let cg = conjugate_gradient(
        |x, out| q.apply_regularized(&v, 0.2, x, out),
        &q.gradient,
        None,
        1e-12,
        200,
    )
    .unwrap();
    assert!(direct.iter().zip(&cg.x).all(|(s, t)| (s - t).abs() < 1e-8));
}

#[test]
fn sample_space_solve_matches_dense() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let (rows, p) = (8, 40);
    for complex in [false, true] {
        let o: Vec<LogDerivatives> = (0..rows)
            .map(|_| {
                if complex {
                    LogDerivatives::Complex(
                        (0..p)
                            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                            .collect(),
                    )
                } else {
                    LogDerivatives::Real((0..p).map(|_| rng.gen_range(-1.0..1.0)).collect())
                }
            })
            .collect();
        let e: Vec<Complex64> = (0..rows)
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-0.1..0.1)))
            .collect();
        let w: Vec<f64> = (0..rows).map(|_| rng.gen_range(0.5..2.0)).collect();
        let q = accumulate_qgt(&w, &o, &e);
        let v: Vec<f64> = (0..p).map(|_| rng.gen_range(0.0..1e-2)).collect();
        let op = q.regularized_operator(&v, 0.1);
        assert!(matches!(op, RegularizedS::SampleSpace { .. }));
        let x = op.solve_direct(&q.gradient).unwrap();
        let exact = regularize(&q.dense_s(), &v, 0.1)
            .lu()
            .solve(&nalgebra::DVector::from_column_slice(&q.gradient))
            .unwrap();
        let err = (nalgebra::DVector::from_column_slice(&x) - &exact).norm() / exact.norm();
        assert!(err < 1e-10, "{err}");
    }
    let q = accumulate_qgt(
        &[1.0; 2],
        &[LogDerivatives::Real(vec![1.0; 5]), LogDerivatives::Real(vec![0.0; 5])],
        &[Complex64::new(1.0, 0.0); 2],
    );
    assert!(q
        .regularized_operator(&[0.0; 5], 0.0)
        .solve_direct(&q.gradient)
        .is_none());
}

#[test]
fn rmsprop_limit() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (rows, p) = (20, 6);
    let o: Vec<LogDerivatives> = (0..rows)
        .map(|_| LogDerivatives::Real((0..p).map(|_| rng.gen_range(-1.0..1.0)).collect()))
        .collect();
    let e: Vec<Complex64> = (0..rows)
        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), 0.0))
        .collect();
    let q = accumulate_qgt(&vec![1.0; rows], &o, &e);
    let mut v = vec![0.0; p];
    update_moving_average(&mut v, &q.gradient, 0.9);
    let rms: Vec<f64> = q
        .gradient
        .iter()
        .zip(&v)
        .map(|(g, v)| g / (v.sqrt() + SHIFT_EPS))
        .collect();
    let op = q.regularized_operator(&v, 1.0);
    let x = conjugate_gradient(|a, out| op.apply(a, out), &q.gradient, None, 1e-12, 100)
        .unwrap()
        .x;
    let dot: f64 = x.iter().zip(&rms).map(|(a, b)| a * b).sum();
    let norm = |u: &[f64]| u.iter().map(|a| a * a).sum::<f64>().sqrt();
    assert!(dot / (norm(&x) * norm(&rms)) > 0.999);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn metric_is_positive_semidefinite(seed in 0u64..10_000, rows in 2usize..30, p in 1usize..12, complex: bool) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let o: Vec<LogDerivatives> = (0..rows)
            .map(|_| {
                if complex {
                    LogDerivatives::Complex((0..p).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect())
                } else {
                    LogDerivatives::Real((0..p).map(|_| rng.gen_range(-1.0..1.0)).collect())
                }
            })
            .collect();
        let e: Vec<Complex64> = (0..rows).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), 0.0)).collect();
        let w: Vec<f64> = (0..rows).map(|_| rng.gen_range(0.1..1.0)).collect();
        let s = accumulate_qgt(&w, &o, &e).dense_s();
        prop_assert!((&s - s.transpose()).abs().max() < 1e-12);
        let min = SymmetricEigen::new(s).eigenvalues.min();
        prop_assert!(min >= -1e-10);
    }
}

fn heisenberg(lattice: Lattice) -> Hamiltonian {
    Hamiltonian::Heisenberg(HeisenbergParams::new(1.0, lattice))
}

fn ar_model(lattice: Lattice, m: usize, dtype: Dtype, gauge: GaugeConstraint, seed: u64, scale: f64) -> GpsModel {
    let spec = ModelSpec::new(GpsVariant::AR_GPS, LocalSpace::Spin, lattice, m)
        .unwrap()
        .with_dtype(dtype)
        .with_gauge(Some(gauge));
    init_params(spec, seed, scale).unwrap()
}

#[test]
fn zero_gradient_leaves_parameters() {
    let lattice = Lattice::chain(4, Boundary::Open).unwrap();
    let gauge = GaugeConstraint::magnetization(4);
    let model = ar_model(lattice.clone(), 2, Dtype::Real, gauge, 1, 0.3);
    let basis = SectorBasis::new(4, LocalSpace::Spin, Some(&gauge)).unwrap();
    assert_eq!(basis.len(), 1);
    let before = model.real_params();
    let mut vmc = Vmc::new(
        model,
        heisenberg(lattice),
        Sampler::Exact(basis),
        SrConfig::lattice(),
        0,
        1,
    )
    .unwrap();
    let r = vmc.step().unwrap();
    assert!((r.stats.mean.re - 0.75).abs() < 1e-12);
    assert_eq!(vmc.model.real_params(), before);
}

#[test]
fn two_site_singlet() {
    let lattice = Lattice::chain(2, Boundary::Open).unwrap();
    let gauge = GaugeConstraint::magnetization(0);
    let model = ar_model(lattice.clone(), 2, Dtype::Complex, gauge, 3, 0.1);
    let basis = SectorBasis::new(2, LocalSpace::Spin, Some(&gauge)).unwrap();
    let cfg = SrConfig {
        eta: 0.05,
        ..SrConfig::lattice()
    };
    let mut vmc = Vmc::new(model, heisenberg(lattice), Sampler::Exact(basis), cfg, 0, 1).unwrap();
    vmc.run(500, |_| Ok(())).unwrap();
    let e = *vmc.energies().last().unwrap();
    assert!((e + 0.75).abs() < 1e-6, "{e}");
}

#[test]
fn full_sum_energy_is_monotone() {
    let lattice = Lattice::square(2, 3, Boundary::Open).unwrap();
    let gauge = GaugeConstraint::magnetization(0);
    let mut h = HeisenbergParams::new(1.0, lattice.clone());
    h.marshall = true;
    let model = ar_model(lattice, 2, Dtype::Real, gauge, 2, 0.2);
    let basis = SectorBasis::new(6, LocalSpace::Spin, Some(&gauge)).unwrap();
    let cfg = SrConfig {
        eta: 1e-3,
        ..SrConfig::lattice()
    };
    let mut vmc = Vmc::new(model, Hamiltonian::Heisenberg(h), Sampler::Exact(basis), cfg, 0, 1).unwrap();
    vmc.run(200, |_| Ok(())).unwrap();
    let e = vmc.energies();
    for w in e.windows(2) {
        assert!(w[1] <= w[0] + 1e-10, "{} -> {}", w[0], w[1]);
    }
    assert!(e[199] < e[0]);
}

#[test]
fn sampled_energies_respect_variational_bound() {
    let lattice = Lattice::square(2, 4, Boundary::Periodic).unwrap();
    let gauge = GaugeConstraint::magnetization(0);
    let mut p = HeisenbergParams::new(1.0, lattice.clone());
    p.marshall = true;
    let h = Hamiltonian::Heisenberg(p);
    let e0 = exact_ground_state(&h, Some(&gauge)).unwrap().energy;
    let model = ar_model(lattice, 4, Dtype::Real, gauge, 5, 0.05);
    let mut vmc = Vmc::new(model, h, Sampler::Direct, SrConfig::lattice(), 512, 7).unwrap();
    vmc.run(60, |r| {
        assert!(
            r.stats.mean.re >= e0 - 3.0 * r.stats.std_error,
            "{} < {e0}",
            r.stats.mean.re
        );
        Ok(())
    })
    .unwrap();
    let last = vmc.final_energy().unwrap();
    assert!(last < vmc.energies()[0]);
}

#[test]
fn identical_seeds_give_identical_steps() {
    let lattice = Lattice::chain(6, Boundary::Periodic).unwrap();
    let gauge = GaugeConstraint::magnetization(0);
    let run = || {
        let model = ar_model(lattice.clone(), 2, Dtype::Complex, gauge, 4, 0.1);
        let mut vmc = Vmc::new(
            model,
            heisenberg(lattice.clone()),
            Sampler::Direct,
            SrConfig::lattice(),
            256,
            3,
        )
        .unwrap();
        vmc.run(5, |_| Ok(())).unwrap();
        (vmc.energies().to_vec(), vmc.model.real_params())
    };
    assert_eq!(run(), run());
}

/// Elementwise comparison of the exact metric and gradient with a large
/// Monte Carlo estimate, using per-element standard errors.
#[test]
fn monte_carlo_metric_matches_full_sum() {
    let n = 6;
    let lattice = Lattice::chain(n, Boundary::Open).unwrap();
    let mut p = HeisenbergParams::new(1.0, lattice.clone());
    p.marshall = true;
    let h = Hamiltonian::Heisenberg(p);
    let spec = ModelSpec::new(GpsVariant::AR_FILTER_GPS, LocalSpace::Spin, lattice, 1)
        .unwrap()
        .with_ordering(SiteOrdering::identity(n));
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let model = GpsModel::from_fn(spec, |_| Complex64::new(rng.gen_range(0.3..1.2), 0.0)).unwrap();
    let np = model.n_real_params();

    let basis = SectorBasis::new(n, LocalSpace::Spin, None).unwrap();
    let exact = exact_batch(&model, &basis);
    let eval = |xs: &[Configuration]| -> (Vec<LogDerivatives>, Vec<Complex64>) {
        xs.iter()
            .map(|x| {
                (
                    model.log_derivatives(x),
                    crate::hamiltonians::local_energy_fresh(&model, &h, x),
                )
            })
            .unzip()
    };
    let (o, e) = eval(&exact.configs);
    let q_exact = accumulate_qgt(&exact.weights, &o, &e);

    let samples = 1_000_000;
    let batch = direct_batch(&model, samples, 21, 0).unwrap();
    let mut counts: HashMap<Configuration, f64> = HashMap::new();
    for x in &batch.configs {
        *counts.entry(x.clone()).or_default() += 1.0;
    }
    let (xs, w): (Vec<Configuration>, Vec<f64>) = counts.into_iter().unzip();
    let (o, e) = eval(&xs);
    let q_mc = accumulate_qgt(&w, &o, &e);

    // Per-sample variances of the centred products, using the exact centres.
    let total: f64 = w.iter().sum();
    let mut var_s = DMatrix::<f64>::zeros(np, np);
    let mut var_g = vec![0.0; np];
    let (s_ex, g_ex) = (q_exact.dense_s(), &q_exact.gradient);
    for ((ok, ek), wk) in o.iter().zip(&e).zip(&w) {
        let d: Vec<f64> = (0..np).map(|i| ok.get(i).re - q_exact.mean_o[i].re).collect();
        let de = ek.re - q_exact.energy.re;
        for i in 0..np {
            var_g[i] += wk * (d[i] * de - g_ex[i]).powi(2);
            for j in 0..np {
                var_s[(i, j)] += wk * (d[i] * d[j] - s_ex[(i, j)]).powi(2);
            }
        }
    }
    let s_mc = q_mc.dense_s();
    for i in 0..np {
        let sigma = (var_g[i] / total / total).sqrt();
        assert!(
            (q_mc.gradient[i] - g_ex[i]).abs() <= 3.0 * sigma + 1e-12,
            "g[{i}]: {} vs {} (σ = {sigma})",
            q_mc.gradient[i],
            g_ex[i]
        );
        for j in 0..np {
            // Centering with the sample mean adds a bias of order √(S_ii S_jj)/n.
            let bias = (s_ex[(i, i)] * s_ex[(j, j)]).sqrt() / total;
            let sigma = (var_s[(i, j)] / total / total).sqrt() + bias;
            assert!(
                (s_mc[(i, j)] - s_ex[(i, j)]).abs() <= 3.0 * sigma + 1e-12,
                "S[{i},{j}]: {} vs {} (σ = {sigma})",
                s_mc[(i, j)],
                s_ex[(i, j)]
            );
        }
    }
}

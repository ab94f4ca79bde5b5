use proptest::prelude::*;
use sonclust::analytic::{beta_d, gamma_d, lambda1_sphere_mass};
use sonclust::certificates::{lambda1_bounds, lambda1_exact};
use sonclust::measure::sampling::{sample_ball, sample_power_law_ball, sample_sphere, sample_two_balls};
use sonclust::solver::{minimize, minimize_with_init, objective, SolverOptions};
use sonclust::transport::{w1, w_infty};
use sonclust::{IndexSubset, Measure, Partition};

fn measure(max_n: usize) -> impl Strategy<Value = Measure> {
    (1usize..=3, 2usize..=max_n).prop_flat_map(|(d, n)| {
        (
            prop::collection::vec(prop::collection::vec(-1.0f64..1.0, d), n),
            prop::collection::vec(0.1f64..1.0, n),
        )
            .prop_map(move |(p, w)| Measure::new(d, p, w).unwrap())
    })
}

fn probability(d: usize, n: usize) -> impl Strategy<Value = Measure> {
    prop::collection::vec(prop::collection::vec(-1.0f64..1.0, d), n)
        .prop_map(move |p| Measure::empirical(d, p).unwrap())
}

fn sq_gap(m: &Measure, a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    a.iter()
        .zip(b)
        .enumerate()
        .map(|(i, (x, y))| m.weight(i) * x.iter().zip(y).map(|(p, q)| (p - q) * (p - q)).sum::<f64>())
        .sum()
}

fn max_gap(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    a.iter()
        .flatten()
        .zip(b.iter().flatten())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn minimiser_beats_candidates(m in measure(20), frac in 0.01f64..1.5, seed in any::<u64>()) {
        let lambda = frac * m.diameter() / m.total_mass();
        let r = minimize(&m, lambda, &SolverOptions::default()).unwrap();
        let tol = 1e-7 * (1.0 + r.objective);
        let id: Vec<Vec<f64>> = m.points().map(<[f64]>::to_vec).collect();
        let c = m.global_centroid();
        let constant = vec![c; m.len()];
        let mut s = seed;
        let random: Vec<Vec<f64>> = id
            .iter()
            .map(|p| p.iter().map(|v| {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                v + ((s >> 11) as f64 / (1u64 << 53) as f64 - 0.5)
            }).collect())
            .collect();
        for cand in [&id, &constant, &random] {
            prop_assert!(r.objective <= objective(&m, lambda, cand).unwrap() + tol);
        }
    }

    #[test]
    fn independent_starts_agree(m in measure(15), frac in 0.01f64..1.5) {
        let lambda = frac * m.diameter() / m.total_mass();
        let opts = SolverOptions::default();
        let a = minimize(&m, lambda, &opts).unwrap();
        let init: Vec<Vec<f64>> = m.points().map(|p| p.iter().map(|v| -v).collect()).collect();
        let b = minimize_with_init(&m, lambda, &opts, &init).unwrap();
        let jstar = a.objective.min(b.objective);
        let bound = 2.0 * (a.objective - jstar) + 2.0 * (b.objective - jstar);
        prop_assert!(sq_gap(&m, &a.u_values, &b.u_values) <= bound + 1e-10);
        prop_assert!(max_gap(&a.u_values, &b.u_values) <= 1e-4);
    }

    #[test]
    fn rigid_motion_equivariance(m in measure(15), frac in 0.01f64..1.5, theta in 0.0f64..6.3, shift in -2.0f64..2.0) {
        let lambda = frac * m.diameter() / m.total_mass();
        let (c, s) = (theta.cos(), theta.sin());
        let t = |p: &[f64]| -> Vec<f64> {
            let mut q = p.to_vec();
            if q.len() >= 2 {
                let (x, y) = (q[0], q[1]);
                q[0] = c * x - s * y;
                q[1] = s * x + c * y;
            }
            q.iter().map(|v| v + shift).collect()
        };
        let opts = SolverOptions::default();
        let a = minimize(&m, lambda, &opts).unwrap();
        let b = minimize(&m.map_points(t).unwrap(), lambda, &opts).unwrap();
        let ta: Vec<Vec<f64>> = a.u_values.iter().map(|u| t(u)).collect();
        prop_assert!(max_gap(&ta, &b.u_values) <= 1e-4, "{}", max_gap(&ta, &b.u_values));
    }

    #[test]
    fn scaling_laws(m in measure(15), frac in 0.01f64..1.5, sc in 0.2f64..5.0) {
        let lambda = frac * m.diameter() / m.total_mass();
        let opts = SolverOptions::default();
        let a = minimize(&m, lambda, &opts).unwrap();
        let scaled = m.map_points(|p| p.iter().map(|v| sc * v).collect()).unwrap();
        let b = minimize(&scaled, sc * lambda, &opts).unwrap();
        let sa: Vec<Vec<f64>> = a.u_values.iter().map(|u| u.iter().map(|v| sc * v).collect()).collect();
        prop_assert!(max_gap(&sa, &b.u_values) <= 1e-4 * sc.max(1.0));
        // heavier weights act like a larger λ
        let heavy = m.scale_weights(sc).unwrap();
        let h = minimize(&heavy, lambda, &opts).unwrap();
        let l = minimize(&m, sc * lambda, &opts).unwrap();
        prop_assert!(max_gap(&h.u_values, &l.u_values) <= 1e-4);
    }

    #[test]
    fn large_lambda_is_the_centroid(m in measure(20)) {
        let lambda = 1.01 * m.diameter() / m.total_mass();
        let r = minimize(&m, lambda, &SolverOptions::default()).unwrap();
        let c = m.global_centroid();
        prop_assert!(max_gap(&r.u_values, &vec![c; m.len()]) <= 1e-5);
        let z = minimize(&m, 0.0, &SolverOptions::default()).unwrap();
        prop_assert_eq!(z.u_flat(), m.coords().to_vec());
    }

    #[test]
    fn lambda1_in_trivial_bracket(m in measure(12)) {
        let (lo, hi) = lambda1_bounds(&m);
        let (v, cert) = lambda1_exact(&m, 1e-4 * hi).unwrap();
        prop_assert!(v >= lo * (1.0 - 1e-9) && v <= hi * (1.0 + 1e-9));
        prop_assert!(cert.lower_bound / m.total_mass() <= v * (1.0 + 1e-9));
    }

    #[test]
    fn consolidation_and_centroids(m in measure(20), cut in 0.0f64..1.0) {
        let n = m.len();
        let k = ((cut * n as f64) as usize).clamp(1, n - 1);
        let a = IndexSubset::new((0..k).collect(), n).unwrap();
        let b = IndexSubset::new((k..n).collect(), n).unwrap();
        let (ma, mb): (f64, f64) = ((0..k).map(|i| m.weight(i)).sum(), (k..n).map(|i| m.weight(i)).sum());
        let (ca, cb) = (m.centroid(&a).unwrap(), m.centroid(&b).unwrap());
        let all = m.centroid(&IndexSubset::all(n)).unwrap();
        for j in 0..m.dim() {
            prop_assert!((all[j] - (ma * ca[j] + mb * cb[j]) / (ma + mb)).abs() <= 1e-12);
        }
        let labels: Vec<usize> = (0..n).map(|i| usize::from(i >= k)).collect();
        let p = Partition::from_labels(&m, &labels).unwrap();
        let c = m.consolidate(&p).unwrap();
        prop_assert_eq!(c.len(), 2);
        prop_assert!((c.total_mass() - m.total_mass()).abs() <= 1e-12 * m.total_mass());
        let one = m.consolidate(&Partition::from_labels(&m, &vec![0; n]).unwrap()).unwrap();
        prop_assert_eq!(one.len(), 1);
        prop_assert!(max_gap(&[one.point(0).to_vec()], &[all]) <= 1e-12);
    }

    #[test]
    fn w1_is_a_metric(a in probability(2, 5), b in probability(2, 5), c in probability(2, 5)) {
        let ab = w1(&a, &b).unwrap().0;
        let ba = w1(&b, &a).unwrap().0;
        let bc = w1(&b, &c).unwrap().0;
        let ac = w1(&a, &c).unwrap().0;
        prop_assert!((ab - ba).abs() <= 1e-9);
        prop_assert!(ac <= ab + bc + 1e-9);
        prop_assert!(w_infty(&a, &b).unwrap().0 >= ab - 1e-9);
    }
}

#[test]
fn samplers_are_reproducible_and_supported() {
    for seed in [0, 7, 1234] {
        assert_eq!(sample_ball::<f64>(3, 50, seed).unwrap(), sample_ball::<f64>(3, 50, seed).unwrap());
        let b = sample_ball::<f64>(3, 200, seed).unwrap();
        assert!(b.points().all(|p| p.iter().map(|v| v * v).sum::<f64>() <= 1.0));
        let s = sample_sphere::<f64>(4, 200, seed).unwrap();
        assert!(s.points().all(|p| (p.iter().map(|v| v * v).sum::<f64>().sqrt() - 1.0).abs() <= 1e-12));
        let t = sample_two_balls::<f64>(2, 1.5, 200, seed).unwrap();
        assert!(t.points().all(|p| {
            let l = ((p[0] + 1.5).powi(2) + p[1] * p[1]).sqrt();
            let r = ((p[0] - 1.5).powi(2) + p[1] * p[1]).sqrt();
            l.min(r) <= 1.0 + 1e-12
        }));
        let w = sample_power_law_ball::<f64>(2, 2.0, 200, seed).unwrap();
        assert!(w.points().all(|p| p.iter().map(|v| v * v).sum::<f64>().sqrt() <= 2.0));
    }
}

#[test]
fn closed_form_sanity() {
    let sqrt2 = std::f64::consts::SQRT_2;
    for d in 2..=200 {
        let g = gamma_d(d).unwrap();
        assert!(g > 1.0 && g < sqrt2, "gamma_{d} = {g}");
        assert!(beta_d(d).unwrap().is_finite());
        assert!(lambda1_sphere_mass(d).unwrap() >= sqrt2 - 1e-12);
        if d >= 3 {
            assert!(gamma_d(d).unwrap() > gamma_d(d - 2).unwrap());
        }
    }
    assert!((gamma_d(200).unwrap() - sqrt2).abs() < 1e-2);
}

use super::*;
use crate::gauss::GaussianState;

fn mean_photon(s: &FockScenario, mode: usize) -> f64 {
    let (mean, cov) = s.quadrature_moments();
    let (x, p) = (2 * mode, 2 * mode + 1);
    (mean[x] * mean[x] + mean[p] * mean[p] + cov[(x, x)] + cov[(p, p)] - 2.0) / 4.0
}

#[test]
fn displaced_vacuum() {
    let s = FockScenario::vacuum(1, 20)
        .unwrap()
        .apply_gate(&Gate::Displace {
            mode: 0,
            re: 1.0,
            im: 0.0,
        })
        .unwrap();
    assert!((mean_photon(&s, 0) - 1.0).abs() < 1e-8);
    assert!(!s.truncation_warning());
}

#[test]
fn squeezed_vacuum() {
    let s = FockScenario::vacuum(1, 30)
        .unwrap()
        .apply_gate(&Gate::Squeeze {
            mode: 0,
            r: 0.5,
            angle: 0.0,
        })
        .unwrap();
    let want = 0.5f64.sinh().powi(2);
    assert!((mean_photon(&s, 0) - want).abs() < 1e-6);
    assert!((want - 0.27154).abs() < 1e-5);
    // X stretched, P squeezed
    let (_, cov) = s.quadrature_moments();
    assert!((cov[(0, 0)] - 1f64.exp()).abs() < 1e-6);
    assert!((cov[(1, 1)] - (-1f64).exp()).abs() < 1e-6);
}

#[test]
fn single_photon_splitting() {
    let s = FockScenario::basis(2, 4, &[1, 0])
        .unwrap()
        .apply_op(&Op::Beamsplit { i: 0, j: 1, t: 0.5 })
        .unwrap();
    assert!((s.probability(&[1, 0]) - 0.5).abs() < 1e-12);
    assert!((s.probability(&[0, 1]) - 0.5).abs() < 1e-12);
    assert!(s.leakage() < 1e-12);
}

#[test]
fn nminus_examples() {
    let coh = FockScenario::vacuum(2, 20)
        .unwrap()
        .apply_gate(&Gate::Displace {
            mode: 0,
            re: 1.0,
            im: 0.0,
        })
        .unwrap();
    let (m, v) = coh.nminus_stats(0, 1, FRAC_PI_2).unwrap();
    assert!(m.abs() < 1e-6 && (v - 1.0).abs() < 1e-6);

    let sq = FockScenario::vacuum(2, 30)
        .unwrap()
        .apply_gate(&Gate::Squeeze {
            mode: 0,
            r: 0.5,
            angle: 0.0,
        })
        .unwrap();
    let (m, v) = sq.nminus_stats(0, 1, 0.0).unwrap();
    assert!(m.abs() < 1e-6 && (v - 0.27154).abs() < 1e-5);

    let vac = FockScenario::vacuum(2, 4).unwrap();
    assert_eq!(vac.nminus_stats(0, 1, 0.3).unwrap(), (0.0, 0.0));
    assert!(vac.nminus_stats(1, 1, 0.0).is_err());
}

#[test]
fn gates_invert() {
    let start = FockScenario::vacuum(2, 12)
        .unwrap()
        .apply_gate(&Gate::Displace {
            mode: 0,
            re: 0.3,
            im: -0.2,
        })
        .unwrap();
    let gates = [
        Gate::Displace {
            mode: 1,
            re: 0.4,
            im: 0.1,
        },
        Gate::Squeeze {
            mode: 0,
            r: 0.2,
            angle: 0.3,
        },
        Gate::Beamsplit { i: 0, j: 1, theta: 0.7 },
        Gate::Phase { mode: 1, phi: 1.1 },
        Gate::TwoModeSqueeze { i: 0, j: 1, g: 0.2 },
    ];
    for g in gates {
        let back = start.apply_gate(&g).unwrap().apply_inverse(&g).unwrap();
        assert!(1.0 - back.fidelity(&start) < 1e-8, "{g:?}");
    }
}

#[test]
fn moments_match_gaussian_engine() {
    let ops = [
        Op::Displace {
            mode: 0,
            x: 0.8,
            p: 0.3,
        },
        Op::Squeeze {
            mode: 1,
            r: 0.2,
            angle: 0.4,
        },
        Op::Beamsplit { i: 0, j: 1, t: 0.6 },
        Op::Amplify {
            signal: 1,
            idler: 2,
            gain: 1.1,
        },
        Op::Phase { mode: 1, phi: 0.9 },
    ];
    let g = GaussianState::vacuum(3).unwrap().apply_all(&ops).unwrap();
    let f = FockScenario::vacuum(3, 20).unwrap().apply_ops(&ops).unwrap();
    let (mean, cov) = f.quadrature_moments();
    assert!((mean - g.displacement()).amax() < 1e-6);
    assert!((cov - g.covariance()).amax() < 1e-6);
}

#[test]
fn passive_chain_is_exact() {
    let p = ParamPoint::new(0.64, 0.0, 0.6, 1.0, 0.0).unwrap();
    let r = full_chain_check(&p, 12).unwrap();
    assert!(r.max_deviation() < 1e-8, "{r:?}");
}

#[test]
fn full_chain_converges_to_gaussian() {
    // the amplified arm has a thermal-like tail, so G = 1.5 needs a large cutoff
    let p = ParamPoint::new(0.64, 0.3, 0.6, 1.5, 0.3).unwrap();
    let devs: Vec<f64> = [8, 12, 16, 20]
        .iter()
        .map(|&c| full_chain_check(&p, c).unwrap().max_deviation())
        .collect();
    assert!(devs.windows(2).all(|w| w[1] < w[0]), "{devs:?}");
    assert!(devs[3] < 2e-3, "{devs:?}");

    let mild = ParamPoint::new(0.64, 0.3, 0.6, 1.2, 0.3).unwrap();
    let r = full_chain_check(&mild, 12).unwrap();
    assert!(r.max_deviation() < 1e-3, "{r:?}");
    assert!(r.truncation_warning);
}

#[test]
fn invalid_scenarios() {
    assert!(FockScenario::vacuum(5, 4).is_err());
    assert!(FockScenario::vacuum(2, 3).is_err());
    assert!(FockScenario::vacuum(4, 32).is_err());
    let s = FockScenario::vacuum(2, 4).unwrap();
    assert!(s.apply_gate(&Gate::Phase { mode: 2, phi: 0.1 }).is_err());
    assert!(s.apply_gate(&Gate::Beamsplit { i: 1, j: 1, theta: 0.1 }).is_err());
}

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::group::{Aperiodicity, CompactSet, GroupElement, GroupModel};
use crate::orlicz::OrliczVector;
use crate::translation::{Weight, WeightedTranslation};
use crate::young::YoungFunction;

fn z(x: i64) -> GroupElement {
    GroupElement::new(&[x])
}

fn z_range(lo: i64, hi: i64) -> CompactSet {
    (lo..=hi).map(z).collect()
}

fn line_scenario(weights: Vec<Weight<f64>>, powers: Vec<usize>, k: CompactSet) -> Scenario<f64> {
    Scenario::new(GroupModel::int_line(), YoungFunction::power(1.0).unwrap(), z(1), weights, powers, k)
}

fn step_line(eps: f64) -> Scenario<f64> {
    line_scenario(vec![Weight::step(0), Weight::step(0)], vec![1, 2], z_range(-3, 3)).with_epsilon(eps)
}

fn heisenberg(eps: f64) -> Scenario<f64> {
    let m = GroupModel::heisenberg_int();
    Scenario::new(
        m,
        YoungFunction::power(2.0).unwrap(),
        GroupElement::new(&[1, 0, 2]),
        vec![Weight::step(2), Weight::step(2)],
        vec![1, 2],
        CompactSet::box_units(&m, &[-3, -3, -3], &[3, 3, 3]).unwrap(),
    )
    .with_epsilon(eps)
}

/// Blocks of 32 halvings then 32 doublings along the forward orbit of 0, and
/// the mirror image backwards, so `φ_n(0) = φ̃_n(0)` oscillates between 1 and `2^{-32}`.
fn oscillating_weight(reach: i64) -> Weight<f64> {
    let fwd = |j: i64| if (j - 1).rem_euclid(64) < 32 { 0.5 } else { 2.0 };
    let mut entries: Vec<(GroupElement, f64)> = (1..=reach).map(|j| (z(j), fwd(j))).collect();
    entries.extend((0..reach).map(|j| (z(-j), 1.0 / fwd(j + 1))));
    Weight::table(entries, 1.0).unwrap()
}

fn direct_phi(w: &Weight<f64>, x: i64, m: usize) -> f64 {
    let model = GroupModel::int_line();
    (1..=m as i64).map(|j| w.eval(&model, &z(x + j))).product()
}

fn direct_phi_tilde(w: &Weight<f64>, x: i64, m: usize) -> f64 {
    let model = GroupModel::int_line();
    1.0 / (0..m as i64).map(|j| w.eval(&model, &z(x - j))).product::<f64>()
}

#[test]
fn line_transitive_example() {
    let rep = check_disjoint_transitive(&step_line(1e-2)).unwrap();
    assert_eq!(rep.verdict, Verdict::Verified { n: 14 });
    assert_eq!(rep.aperiodicity, Some(Aperiodicity::Bound(6)));
    let phi = rep.column("phi_1").unwrap();
    let tilde = rep.column("phi_tilde_1").unwrap();
    for n in 5..=64usize {
        assert_eq!(phi[n - 1], 2f64.powi(5 - n as i32), "n={n}");
        assert_eq!(tilde[n - 1], 2f64.powi(7 - n as i32), "n={n}");
    }
    assert!(rep.rows.iter().all(|r| r.e_k_deficit == 0.0));
    let at = rep.row(14).unwrap();
    assert!(at.accepted && at.values.iter().all(|&v| v < 1e-2));
    assert!(!rep.row(13).unwrap().accepted);
}

#[test]
fn trace_matches_direct_products() {
    let s = step_line(1e-2);
    let rep = check_disjoint_transitive(&s).unwrap();
    let w = Weight::step(0);
    let sup = |f: &dyn Fn(i64) -> f64| (-3..=3).map(f).fold(0.0, f64::max);
    for n in 1..=64usize {
        let row = rep.row(n).unwrap();
        let expect = [
            sup(&|x| direct_phi(&w, x, n)),
            sup(&|x| direct_phi(&w, x, 2 * n)),
            sup(&|x| direct_phi_tilde(&w, x, n)),
            sup(&|x| direct_phi_tilde(&w, x, 2 * n)),
            sup(&|x| direct_phi_tilde(&w, x, n) * direct_phi_tilde(&w, x, 2 * n) / direct_phi_tilde(&w, x, 2 * n)),
            sup(&|x| direct_phi(&w, x, n) * direct_phi_tilde(&w, x, n) / direct_phi_tilde(&w, x, n)),
        ];
        for (got, want) in row.values.iter().zip(expect) {
            assert!(((got - want) / want).abs() < 1e-10, "n={n}: {got} vs {want}");
        }
    }
}

#[test]
fn trace_matches_materialized_operators() {
    // φ_m(x) is the coefficient of T^m δ_x at x a^m; φ̃_m(x) that of S^m δ_x at x a^{-m}.
    let op: WeightedTranslation<f64> = WeightedTranslation::new(GroupModel::int_line(), z(1), Weight::step(0)).unwrap();
    let rep = check_disjoint_transitive(&step_line(1e-2)).unwrap();
    for n in [1usize, 3, 7, 12] {
        let mut phi = 0.0f64;
        let mut tilde = 0.0f64;
        for x in -3..=3 {
            let delta = OrliczVector::point(GroupModel::int_line(), z(x), 1.0).unwrap();
            phi = phi.max(op.apply_t(&delta, n).unwrap().get(&z(x + n as i64)));
            tilde = tilde.max(op.apply_s(&delta, n).unwrap().get(&z(x - n as i64)));
        }
        let row = rep.row(n).unwrap();
        assert!(((row.values[0] - phi) / phi).abs() < 1e-10);
        assert!(((row.values[2] - tilde) / tilde).abs() < 1e-10);
    }
}

#[test]
fn heisenberg_example() {
    let rep = check_disjoint_transitive(&heisenberg(1e-3)).unwrap();
    assert_eq!(rep.aperiodicity, Some(Aperiodicity::Bound(3)));
    let n = rep.n_star().expect("verified");
    assert!(n <= 64);
    assert_eq!(n, 14);
    assert_eq!(rep.column("phi_tilde_1").unwrap()[13], 2f64.powi(-10));
}

#[test]
fn same_weight_agrees_with_general() {
    let s = step_line(1e-2);
    let rep = check_same_weight(&s).unwrap();
    assert_eq!(rep.verdict, Verdict::Verified { n: 14 });
    assert_eq!(rep.general_verdict, Some(rep.verdict.clone()));
    assert!(rep.columns.contains(&"same_tilde_1_2".to_string()));

    let differ = line_scenario(vec![Weight::step(0), Weight::constant(0.5).unwrap()], vec![1, 2], z_range(-3, 3));
    assert_eq!(check_same_weight(&differ).unwrap().verdict, Verdict::Refused(Refusal::WeightsDiffer));
}

#[test]
fn constant_weight_never_verified() {
    let c = Weight::constant(2.0).unwrap();
    let s = line_scenario(vec![c.clone(), c], vec![1, 2], z_range(-3, 3)).with_epsilon(1e-2);
    assert_eq!(check_same_weight(&s).unwrap().verdict, Verdict::NotVerifiedWithinBound);
    assert_eq!(check_disjoint_transitive(&s).unwrap().verdict, Verdict::NotVerifiedWithinBound);
}

#[test]
fn refusals() {
    let one = Weight::constant(1.0).unwrap();
    let s = line_scenario(vec![one.clone(), one.clone()], vec![1, 2], z_range(-3, 3));
    let rep = check_disjoint_transitive(&s).unwrap();
    match &rep.verdict {
        Verdict::Refused(r @ Refusal::WeightNotExpanding { operator: 1, .. }) => {
            assert!(r.to_string().contains("‖w_1‖_∞ ≤ 1"))
        }
        v => panic!("unexpected {v:?}"),
    }
    assert_eq!(rep.rows.len(), 64);
    assert!(rep.rows.iter().all(|r| !r.accepted));

    let overridden = check_disjoint_transitive(&s.clone().with_override(true)).unwrap();
    assert_eq!(overridden.verdict, Verdict::NotVerifiedWithinBound);
    assert_eq!(overridden.rows.len(), 64);
    assert!(overridden.notes.iter().any(|n| n.contains("overridden")));

    let mut periodic = step_line(1e-2);
    periodic.a = z(0);
    let rep = check_disjoint_transitive(&periodic).unwrap();
    assert_eq!(rep.verdict, Verdict::Refused(Refusal::Periodic { order: 1 }));
    assert!(rep.verdict.to_string().contains("not aperiodic"));

    assert_eq!(
        check_disjoint_mixing(&s).unwrap().verdict,
        Verdict::Refused(Refusal::WeightNotExpanding { operator: 1, sup: 1.0 })
    );
}

#[test]
fn invalid_scenarios() {
    let single = line_scenario(vec![Weight::step(0)], vec![1], z_range(-3, 3));
    assert_eq!(
        check_disjoint_transitive(&single).unwrap_err(),
        DynamicsError::TooFewOperators { needed: 2, got: 1 }
    );
    let unsorted = line_scenario(vec![Weight::step(0), Weight::step(0)], vec![2, 1], z_range(-3, 3));
    assert!(matches!(check_disjoint_transitive(&unsorted), Err(DynamicsError::InvalidScenario(_))));
    let empty = line_scenario(vec![Weight::step(0), Weight::step(0)], vec![1, 2], CompactSet::new());
    assert!(check_disjoint_transitive(&empty).is_err());
    assert!(check_chaotic(&step_line(1e-2).with_chaos_terms(4), 0).is_err());
    assert!(check_chaotic(&step_line(1e-2), 2).is_err());
}

#[test]
fn mixing_line_example() {
    let s = step_line(1e-2);
    let mix = check_disjoint_mixing(&s).unwrap();
    assert_eq!(mix.verdict, Verdict::Verified { n: 14 });
    let short = check_disjoint_mixing(&s.clone().with_n_max(16).with_mixing_window(4)).unwrap();
    assert_eq!(short.verdict, Verdict::NotVerifiedWithinBound);
}

#[test]
fn oscillating_weight_is_transitive_not_mixing() {
    let w = oscillating_weight(420);
    let s = line_scenario(vec![w.clone(), w.clone()], vec![1, 2], z_range(0, 0)).with_epsilon(1e-3).with_n_max(200);
    let trans = check_disjoint_transitive(&s).unwrap();
    assert_eq!(trans.verdict, Verdict::Verified { n: 10 });
    let mix = check_disjoint_mixing(&s).unwrap();
    assert_eq!(mix.verdict, Verdict::NotVerifiedWithinBound);
    // the trace oscillates: back to 1 at n = 64
    let phi = trans.column("phi_1").unwrap();
    assert_eq!(phi[63], 1.0);
    for n in [1usize, 10, 32, 64, 100, 200] {
        let want = direct_phi(&w, 0, n);
        assert!(((phi[n - 1] - want) / want).abs() < 1e-10, "n={n}");
        let want = direct_phi_tilde(&w, 0, 2 * n);
        let got = trans.column("phi_tilde_2").unwrap()[n - 1];
        assert!(((got - want) / want).abs() < 1e-10, "n={n}");
    }
}

#[test]
fn chaos_series_closed_form() {
    let op: WeightedTranslation<f64> = WeightedTranslation::new(GroupModel::int_line(), z(1), Weight::step(0)).unwrap();
    let c = chaos_sum(&op, &z(0), 10, 50);
    let want: f64 = 3.0 * 2f64.powi(-10) / (1.0 - 2f64.powi(-10));
    assert!(c.certified);
    assert!((c.partial - want).abs() < 1e-12);
    assert!((c.value() - want).abs() < 1e-12);

    let flat = WeightedTranslation::new(GroupModel::int_line(), z(1), Weight::constant(1.0).unwrap()).unwrap();
    let c = chaos_sum(&flat, &z(0), 3, 16);
    assert!(!c.certified);
    assert_eq!(c.partial, 32.0);
}

#[test]
fn chaotic_line_example() {
    let rep = check_chaotic(&step_line(0.01), 0).unwrap();
    assert_eq!(rep.verdict, Verdict::Verified { n: 14 });
    assert_eq!(rep.columns, ["phi_1", "phi_tilde_1", "chaos_1"]);

    let one = line_scenario(vec![Weight::constant(1.0).unwrap()], vec![1], z_range(-3, 3)).with_override(true);
    let rep = check_chaotic(&one, 0).unwrap();
    assert_eq!(rep.verdict, Verdict::NotVerifiedWithinBound);
    assert!(rep.rows.iter().all(|r| r.lower_bound && r.values[2] >= 2.0 * 16.0));
}

#[test]
fn disjoint_chaos_localizes_failure() {
    let s = line_scenario(vec![Weight::step(0), Weight::constant(1.0).unwrap()], vec![1, 2], z_range(-3, 3))
        .with_epsilon(1e-2);
    let rep = check_disjoint_chaotic(&s).unwrap();
    assert!(matches!(rep.verdict, Verdict::Refused(Refusal::WeightNotExpanding { operator: 2, .. })));
    assert_eq!(rep.sub_verdicts[0], (1, Verdict::Verified { n: 14 }));
    assert!(matches!(rep.sub_verdicts[1], (2, Verdict::Refused(_))));

    let rep = check_disjoint_chaotic(&heisenberg(1e-2)).unwrap();
    assert!(rep.verdict.is_verified());
    assert!(rep.sub_verdicts.iter().all(|(_, v)| v.is_verified()));
}

#[test]
fn deficit_cap_drops_worst_points() {
    let strict = check_disjoint_transitive(&step_line(1e-2)).unwrap();
    let relaxed = check_disjoint_transitive(&step_line(1e-2).with_deficit_cap(2.0)).unwrap();
    let n = relaxed.n_star().unwrap();
    assert!(n < strict.n_star().unwrap());
    let row = relaxed.row(n).unwrap();
    assert!(row.e_k_deficit > 0.0 && row.e_k_deficit <= 2.0);
    assert!(row.values.iter().all(|&v| v < 1e-2));
}

#[test]
fn witness_example() {
    let s = step_line(1e-2);
    let m = GroupModel::int_line();
    let delta = OrliczVector::point(m, z(0), 1.0).unwrap();
    let e = z_range(0, 0);
    let targets = [delta.clone(), delta.clone()];
    let s = Scenario { k: e.clone(), ..s };

    let v = build_witness(&s, &delta, &targets, 4, &e).unwrap();
    assert_eq!(v.support_len(), 3);
    assert_eq!((v.get(&z(0)), v.get(&z(-4)), v.get(&z(-8))), (1.0, 0.125, 2f64.powi(-7)));
    let res = verify_witness(&s, &v, &delta, &targets, 4).unwrap();
    assert!((res.rho0 - 0.1328125).abs() <= 1e-12);

    let v = build_witness(&s, &delta, &targets, 16, &e).unwrap();
    let res = verify_witness(&s, &v, &delta, &targets, 16).unwrap();
    assert!(res.max() < 1e-3, "{res:?}");

    let bare = build_witness(&s, &delta, &[], 4, &e).unwrap();
    assert_eq!(bare, delta);
    assert_eq!(verify_witness(&s, &bare, &delta, &[], 4).unwrap().rho0, 0.0);
    let identity = build_witness(&s, &delta, &targets, 0, &e).unwrap();
    assert_eq!(identity.get(&z(0)), 3.0);

    let outside = OrliczVector::point(m, z(5), 1.0).unwrap();
    assert!(matches!(
        build_witness(&s, &outside, &targets, 4, &e),
        Err(DynamicsError::SupportEscapesK { .. })
    ));
}

#[test]
fn witness_soundness_link() {
    // Verified at n* bounds every residual by the ε-controlled terms of the proof.
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for s in [step_line(1e-2), heisenberg(1e-3)] {
        let rep = check_disjoint_transitive(&s).unwrap();
        let n = rep.n_star().unwrap();
        let row = rep.row(n).unwrap();
        let col = |name: &str| row.values[rep.column_index(name).unwrap()];
        let random = |rng: &mut ChaCha8Rng| {
            OrliczVector::from_entries(s.model, s.k.iter().map(|x| (x.clone(), rng.gen_range(-1.0..1.0)))).unwrap()
        };
        let f = random(&mut rng);
        let g = [random(&mut rng), random(&mut rng)];
        let v = build_witness(&s, &f, &g, n, &s.k).unwrap();
        let res = verify_witness(&s, &v, &f, &g, n).unwrap();
        let norm = |u: &OrliczVector<f64>| u.luxemburg_norm(&s.phi);
        let slack = 1.0 + 1e-9;
        let b0 = col("phi_tilde_1") * norm(&g[0]) + col("phi_tilde_2") * norm(&g[1]);
        assert!(res.rho0 <= b0 * slack, "{} > {b0}", res.rho0);
        let b1 = col("phi_1") * norm(&f) + col("cross_tilde_1_2") * norm(&g[1]);
        assert!(res.rho[0] <= b1 * slack, "{} > {b1}", res.rho[0]);
        let b2 = col("phi_2") * norm(&f) + col("cross_phi_1_2") * norm(&g[0]);
        assert!(res.rho[1] <= b2 * slack, "{} > {b2}", res.rho[1]);
    }
}

#[test]
fn periodic_point_residual() {
    let m = GroupModel::int_line();
    let op = WeightedTranslation::new(m, z(1), Weight::step(0)).unwrap();
    let phi = YoungFunction::power(1.0).unwrap();
    let f = OrliczVector::point(m, z(0), 1.0).unwrap();
    let e = z_range(0, 0);
    let residual = |p: &OrliczVector<f64>| op.apply_t(p, 10).unwrap().sub(p).unwrap().luxemburg_norm(&phi);

    let pp = build_periodic_point(&op, &phi, &f, &e, 10, 20, 1e-2).unwrap();
    let r = residual(&pp.p);
    assert!(r <= pp.tail_bound && r <= 1e-6, "{r} vs {}", pp.tail_bound);
    assert_eq!(pp.p.support_len(), 41);

    let pp = build_periodic_point(&op, &phi, &f, &e, 10, 0, 1e-2).unwrap();
    assert_eq!(pp.p, f);
    assert!(residual(&pp.p) <= pp.tail_bound);

    let zero = OrliczVector::zero(m);
    let pp = build_periodic_point(&op, &phi, &zero, &e, 10, 5, 1e-2).unwrap();
    assert!(pp.p.is_zero());
    assert_eq!(residual(&pp.p), 0.0);

    let wide: CompactSet = [z(0), z(10)].into_iter().collect();
    assert_eq!(
        build_periodic_point(&op, &phi, &f, &wide, 10, 3, 1e-2).unwrap_err(),
        DynamicsError::DisjointnessViolated { k: 1 }
    );
    assert!(matches!(
        build_periodic_point(&op, &phi, &f, &e, 2, 3, 1e-2),
        Err(DynamicsError::NotChaoticAtN { n: 2, .. })
    ));
}

#[test]
fn single_precision_matches() {
    let s = Scenario::<f32>::new(
        GroupModel::int_line(),
        YoungFunction::power(1.0).unwrap(),
        z(1),
        vec![Weight::step(0), Weight::step(0)],
        vec![1, 2],
        z_range(-3, 3),
    )
    .with_epsilon(1e-2);
    assert_eq!(check_disjoint_transitive(&s).unwrap().verdict, Verdict::Verified { n: 14 });
}

use qot_core::adversary::*;
use qot_core::noise::bqsm_survival_probability;

fn within(stats: &AttackStats, expected: f64) -> bool {
    let se = (expected * (1.0 - expected) / stats.trials as f64).sqrt();
    (stats.success_both - expected).abs() <= 3.0 * se.max(1e-12)
}

#[test]
fn known_indices_recover_everything() {
    for n in [2, 4, 6] {
        let s = sdc_known_indices_attack(n, 2_000, 1).unwrap();
        assert_eq!(s.success_both, 1.0);
        assert!(!bound_audit(&s, n).pass || n == 2);
    }
}

#[test]
fn blind_guess_matches_collision_estimate() {
    // Right pair: both bits. Wrong pair: the Bell readout of two
    // uncorrelated or half-correlated cells is uniform over four outcomes.
    let n = 4;
    let e = 6.0;
    let expected = 1.0 / e + (1.0 - 1.0 / e) / 4.0;
    let s = sdc_blind_attack(n, 20_000, 2).unwrap();
    assert!(within(&s, expected), "{} vs {expected}", s.success_both);
    assert!(bound_audit(&s, n).pass);
}

#[test]
fn honest_receiver_knows_exactly_one_bit() {
    for y in [false, true] {
        let s = honest_receiver_attack(4, y, 10_000, 3).unwrap();
        assert_eq!(s.success_any_single, 1.0);
        assert!(within(&s, 0.5));
        assert!(bound_audit(&s, 4).pass);
    }
}

#[test]
fn delay_attack_limits() {
    let noiseless = nqsm_delay_attack(4, 1.0, 10, 2_000, 4).unwrap();
    assert_eq!(noiseless.success_both, 1.0);
    let decohered = nqsm_delay_attack(4, 0.1, 30, 20_000, 4).unwrap();
    assert!(within(&decohered, 0.25));
    let half = nqsm_delay_attack(4, 0.5, 1, 20_000, 4).unwrap();
    assert!(within(&half, delay_attack_closed_form(0.5)));
    assert!(half.success_both > 0.25 && half.success_both < 1.0);
}

#[test]
fn delay_attack_is_monotone_in_survival() {
    let mut last = 0.0;
    for tau in (0..=8).rev() {
        let s = nqsm_delay_attack(4, 0.7, tau, 20_000, 5).unwrap();
        let p = 0.7f64.powi(tau as i32);
        assert!(within(&s, delay_attack_closed_form(p)), "tau={tau}");
        assert!(s.success_both >= last - 0.02, "tau={tau}");
        last = s.success_both;
    }
}

#[test]
fn delay_attack_exact_and_sampled_agree() {
    for p in [0.2, 0.6, 0.9] {
        let exact = delay_attack_exact_success(4, p).unwrap();
        assert!((exact - delay_attack_closed_form(p)).abs() < 1e-10);
    }
}

#[test]
fn subset_attack_follows_enumeration() {
    for (n, m) in [(4usize, 2usize), (8, 2), (6, 3)] {
        let s = bqsm_subset_attack(n, m, true, 20_000, 6).unwrap();
        let p = bqsm_survival_probability(n, m).unwrap().combinatorial;
        assert!((s.stored_pair - p).abs() <= 3.0 * (p * (1.0 - p) / s.trials as f64).sqrt(), "N={n} M={m}");
        assert!(within(&s, subset_attack_closed_form(p)), "N={n} M={m}: {}", s.success_both);
    }
}

#[test]
fn full_storage_breaks_bqsm() {
    let s = bqsm_subset_attack(4, 4, false, 2_000, 7).unwrap();
    assert_eq!(s.stored_pair, 1.0);
    assert_eq!(s.success_both, 1.0);
}

#[test]
fn compliant_attacks_pass_the_audit() {
    for n in [4, 6, 8] {
        let m = (2..=n)
            .rev()
            .find(|&m| {
                subset_attack_closed_form(bqsm_survival_probability(n, m).unwrap().combinatorial)
                    <= 0.5 + 1.0 / n as f64
            })
            .unwrap();
        let subset = bqsm_subset_attack(n, m, true, 20_000, 8).unwrap();
        bound_audit(&subset, n).into_result().unwrap();
        let delay = nqsm_delay_attack(n, 0.5, 20, 20_000, 8).unwrap();
        bound_audit(&delay, n).into_result().unwrap();
    }
}

#[test]
fn attack_csv_row_shape() {
    let cfg =
        AttackConfig { attack: AttackKind::Delay, n: 4, m: 0, rate: 0.5, tau_ticks: 3, trials: 100, seed: 1, y: true };
    let report = run_attack(&cfg).unwrap();
    assert_eq!(report.csv_row().split(',').count(), ATTACK_CSV_HEADER.split(',').count());
    assert_eq!(run_attack(&cfg).unwrap().csv_row(), report.csv_row());
    for kind in AttackKind::ALL {
        assert_eq!(kind.name().parse::<AttackKind>().unwrap(), kind);
    }
}

use proptest::prelude::*;
use qot_core::rng::rng_from_seed;
use qot_core::tlp::*;
use qot_core::Error;
use sha2::{Digest, Sha256};

// Reference values computed with an independent SHA-256 (Python hashlib).
const ZERO_SEED_TAU2_CIPHERTEXT: &str = "46ccb76ce13cc8e481d3";
const ZERO_SEED_TAU2_SERIALIZED_SHA256: &str = "7b1ab4336a471a24f4b5c8c75889a3ec2e0dd39a93b63d9d6f9345854da62d79";

#[test]
fn fixed_vector_is_bit_exact() {
    let s = PuzzleSolution::new(3, 5, vec![0xab, 0xcd], 16).unwrap();
    let z = seal_with_seed(2, [0u8; 32], &s.encode(), &mut HashMeter::default()).unwrap();
    assert_eq!(hex::encode(z.ciphertext()), ZERO_SEED_TAU2_CIPHERTEXT);
    assert_eq!(hex::encode(Sha256::digest(z.to_bytes())), ZERO_SEED_TAU2_SERIALIZED_SHA256);
    assert_eq!(puzzle_sol(&z, 16).unwrap(), s);
}

#[test]
fn roundtrip_on_random_solutions() {
    let mut rng = rng_from_seed(100);
    for tau in [1u64, 10, 1000] {
        for i in 0..100u32 {
            let lambda = 1 + (i * 7) % 64;
            let k = 1 + i % 9;
            let s = PuzzleSolution::random(k, k + 1 + i % 5, lambda, &mut rng).unwrap();
            let z = puzzle_gen(tau, &s, &mut rng).unwrap();
            assert_eq!(z.ciphertext().len(), PuzzleSolution::encoded_len(lambda));
            assert_eq!(puzzle_sol(&z, lambda).unwrap(), s);
        }
    }
}

#[test]
fn generation_and_solve_counters() {
    let mut rng = rng_from_seed(101);
    let s = PuzzleSolution::random(1, 2, 32, &mut rng).unwrap();
    let mut gen = HashMeter::default();
    let z = puzzle_gen_metered(1, &s, &mut rng, &mut gen).unwrap();
    assert_eq!(gen.chain, 1);
    assert_eq!(puzzle_sol(&z, 32).unwrap(), s);
    for tau in [1u64, 100, 100_000] {
        let z = puzzle_gen(tau, &s, &mut rng).unwrap();
        let mut meter = HashMeter::default();
        puzzle_sol_metered(&z, 32, &mut meter).unwrap();
        assert_eq!(meter.chain, tau);
    }
}

#[test]
fn same_seed_gives_identical_puzzles() {
    let s = PuzzleSolution::new(2, 4, vec![1, 2, 3, 4], 32).unwrap();
    let a = puzzle_gen(50, &s, &mut rng_from_seed(7)).unwrap();
    let b = puzzle_gen(50, &s, &mut rng_from_seed(7)).unwrap();
    assert_eq!(a.to_bytes(), b.to_bytes());
}

#[test]
fn tampering_is_caught_or_changes_the_indices() {
    let mut rng = rng_from_seed(102);
    let s = PuzzleSolution::random(2, 3, 16, &mut rng).unwrap();
    let z = puzzle_gen(5, &s, &mut rng).unwrap();
    for byte in 0..8 {
        for bit in 0..8 {
            let mut t = z.clone();
            t.ciphertext_mut()[byte] ^= 1 << bit;
            match puzzle_sol(&t, 16) {
                Err(Error::Integrity(_)) => {}
                Ok(other) => assert!((other.k, other.l) != (s.k, s.l)),
                Err(e) => panic!("unexpected error {e}"),
            }
        }
    }
}

#[test]
fn distinguisher_advantage_tracks_budget() {
    let s0 = PuzzleSolution::new(1, 2, vec![0; 4], 32).unwrap();
    let s1 = PuzzleSolution::new(3, 4, vec![0xff; 4], 32).unwrap();
    let tau = 64;
    let full = indistinguishability_smoke(&s0, &s1, tau, tau, 2_000, &mut rng_from_seed(1)).unwrap();
    assert!((full.advantage - 0.5).abs() < 1e-12);
    for budget in [0, tau / 2, tau - 1] {
        let r = indistinguishability_smoke(&s0, &s1, tau, budget, 10_000, &mut rng_from_seed(2)).unwrap();
        assert!(r.advantage.abs() <= 3.0 * r.std_error, "budget {budget}: {r:?}");
    }
}

#[test]
fn solve_time_is_linear_in_tau() {
    let taus = [50_000u64, 100_000, 150_000, 200_000];
    let times: Vec<f64> = taus
        .iter()
        .map(|&t| (0..7).map(|_| time_solve(t).unwrap().as_secs_f64()).fold(f64::INFINITY, f64::min))
        .collect();
    let xs: Vec<f64> = taus.iter().map(|&t| t as f64).collect();
    let (slope, _, r2) = linear_fit(&xs, &times);
    assert!(slope > 0.0);
    assert!(r2 >= 0.99, "R² = {r2}, times {times:?}");
}

proptest! {
    #[test]
    fn roundtrip_property(tau in 1u64..200, k in 1u32..1000, gap in 1u32..1000, lambda in 0u32..200, seed in any::<u64>()) {
        let mut rng = rng_from_seed(seed);
        let s = PuzzleSolution::random(k, k + gap, lambda, &mut rng).unwrap();
        let z = puzzle_gen(tau, &s, &mut rng).unwrap();
        let parsed = Puzzle::from_bytes(&z.to_bytes()).unwrap();
        prop_assert_eq!(&parsed, &z);
        prop_assert_eq!(puzzle_sol(&parsed, lambda).unwrap(), s);
    }

    #[test]
    fn batch_roundtrip_property(count in 0usize..20, lambda in 0u32..64, seed in any::<u64>()) {
        let mut rng = rng_from_seed(seed);
        let sols: Vec<_> = (0..count as u32).map(|i| PuzzleSolution::random(i + 1, i + 3, lambda, &mut rng).unwrap()).collect();
        let mut gen = HashMeter::default();
        let z = puzzle_gen_batch(9, &sols, &mut rng, &mut gen).unwrap();
        prop_assert_eq!(gen.chain, 9);
        let mut sol = HashMeter::default();
        prop_assert_eq!(puzzle_sol_batch(&z, lambda, &mut sol).unwrap(), sols);
        prop_assert_eq!(sol.chain, 9);
    }
}

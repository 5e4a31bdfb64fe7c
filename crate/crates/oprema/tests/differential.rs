//! Differential equivalence of the two arithmetic implementations: the
//! digit-serial unit in `alu` and the independent integer re-implementation
//! in `oracle::sim` must agree bit-exactly on every operation, finite or
//! special, because they realize the same machine semantics through
//! different code.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use oprema::alu::{self, Transform};
use oprema::numeric::{parse_decimal, OpremaNumber, Sign};
use oprema::oracle::sim;

fn random_operand(rng: &mut ChaCha8Rng) -> OpremaNumber {
    if rng.gen_bool(0.08) {
        return match rng.gen_range(0..3) {
            0 => OpremaNumber::zero(),
            1 => OpremaNumber::infinite(),
            _ => OpremaNumber::indeterminate(),
        };
    }
    let mut digits = [0u8; 8];
    // occasionally unnormalized, as a plugged row can be
    let lead = if rng.gen_bool(0.1) { 1 } else { 0 };
    digits[lead] = rng.gen_range(1..=9);
    for d in digits.iter_mut().skip(lead + 1) {
        *d = rng.gen_range(0..=9);
    }
    let sign = if rng.gen_bool(0.5) {
        Sign::Plus
    } else {
        Sign::Minus
    };
    OpremaNumber::finite(sign, digits, rng.gen_range(-15 + lead as i32..=15))
}

#[test]
fn alu_and_sim_agree_exactly() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xd1ff);
    for _ in 0..20_000 {
        let x = random_operand(&mut rng);
        let y = random_operand(&mut rng);
        let tx = Transform::ALL[rng.gen_range(0..4)];
        let ty = Transform::ALL[rng.gen_range(0..4)];

        assert_eq!(
            alu::add_variant(&x, &y, tx, ty),
            sim::add_variant(&x, &y, tx, ty),
            "add {tx:?} {ty:?} over {x}, {y}"
        );
        assert_eq!(
            alu::multiply(&x, &y),
            sim::multiply(&x, &y),
            "mul over {x}, {y}"
        );
        assert_eq!(
            alu::divide(&x, &y),
            sim::divide(&x, &y),
            "div over {x}, {y}"
        );
        let negate = rng.gen_bool(0.5);
        assert_eq!(
            alu::sqrt_op(&x, negate),
            sim::sqrt(&x, negate),
            "sqrt over {x}"
        );
    }
}

#[test]
fn multiply_matches_the_replayed_schedule() {
    let x = parse_decimal("0.12345678e1").unwrap();
    let y = parse_decimal("0.87654321e1").unwrap();
    let product = alu::multiply(&x, &y);
    assert_eq!(product, sim::multiply(&x, &y));
    // exact product 10.8215202237…; the normalization rounding bumps the
    // even kept digit, one unit above the round-to-nearest value
    assert_eq!(product, parse_decimal("0.10821521e2").unwrap());
    assert!(oprema::oracle::within_ulps(
        &product,
        &parse_decimal("0.10821520e2").unwrap(),
        1
    ));
}

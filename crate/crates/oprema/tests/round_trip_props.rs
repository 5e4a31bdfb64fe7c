//! Property tests for the encoding layers: number rows, text parsing, and
//! the frame arithmetic against a plain integer model.

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use oprema::alu::Significand9;
use oprema::numeric::{
    decode_row, encode_row, format_number, parse_decimal, OpremaNumber, Sign, Special,
};

fn arb_sign() -> impl Strategy<Value = Sign> {
    prop_oneof![Just(Sign::Plus), Just(Sign::Minus)]
}

/// Any representable number, normalized or not, finite or special.
fn arb_number() -> impl Strategy<Value = OpremaNumber> {
    prop_oneof![
        8 => (
            arb_sign(),
            proptest::array::uniform8(0u8..=9),
            arb_sign(),
            0u8..=15
        )
            .prop_map(|(sign, digits, exp_sign, exp)| {
                let e = if exp_sign == Sign::Minus { -(exp as i32) } else { exp as i32 };
                OpremaNumber::finite(sign, digits, e)
            }),
        1 => prop_oneof![
            Just(OpremaNumber::zero()),
            Just(OpremaNumber::infinite()),
            Just(OpremaNumber::indeterminate())
        ],
    ]
}

proptest! {
    #[test]
    fn row_encoding_round_trips(n in arb_number()) {
        let row = encode_row(&n);
        prop_assert_eq!(decode_row(row).unwrap(), n);
        // every emitted tetrad is a valid excess-3 value
        for tetrad_index in 0..8u8 {
            let first = 2 + 4 * tetrad_index;
            let mut value = 0u8;
            for k in 0..4u8 {
                value = value << 1 | row.bit(first + k) as u8;
            }
            if n.is_finite() {
                prop_assert!((3..=12).contains(&value));
            }
        }
    }

    #[test]
    fn format_parse_round_trips_on_normalized(
        sign in arb_sign(),
        d1 in 1u8..=9,
        rest in proptest::array::uniform7(0u8..=9),
        exp in -15i32..=15
    ) {
        let mut digits = [0u8; 8];
        digits[0] = d1;
        digits[1..].copy_from_slice(&rest);
        let n = OpremaNumber::finite(sign, digits, exp);
        prop_assert_eq!(parse_decimal(&format_number(&n)).unwrap(), n);
    }

    #[test]
    fn frame_ops_match_integer_model(
        a in 0u64..100_000_000,
        b in 0u64..100_000_000,
        shift in 0usize..12
    ) {
        let fa = Significand9::from_value(a);
        let fb = Significand9::from_value(b);
        prop_assert_eq!(fa.add(&fb).value(), a + b);
        let (hi, lo) = if a >= b { (fa, fb) } else { (fb, fa) };
        prop_assert_eq!(hi.sub(&lo).value(), a.max(b) - a.min(b));
        let (shifted, tail) = fa.shift_right(shift);
        let mut reassembled = shifted.value();
        for d in tail {
            reassembled = reassembled * 10 + d as u64;
        }
        prop_assert_eq!(reassembled, a);
    }
}

#[test]
fn row_round_trip_randomized_100k() {
    let mut rng = ChaCha8Rng::seed_from_u64(39);
    for _ in 0..100_000 {
        let mut digits = [0u8; 8];
        for d in digits.iter_mut() {
            *d = rng.gen_range(0..=9);
        }
        let sign = if rng.gen_bool(0.5) {
            Sign::Plus
        } else {
            Sign::Minus
        };
        let n = OpremaNumber::finite(sign, digits, rng.gen_range(-15..=15));
        assert_eq!(decode_row(encode_row(&n)).unwrap(), n);
    }
    // and exhaustively over the specials
    for kind in [Special::Zero, Special::Infinite, Special::Indeterminate] {
        let n = OpremaNumber::special(kind);
        assert_eq!(decode_row(encode_row(&n)).unwrap(), n);
    }
}

//! Differential property suites run by the `verify` command and by the
//! acceptance tests: the machine's documented worked examples, the
//! exhaustive rounding-error enumeration, quotient-digit equivalence against
//! schoolbook long division, accuracy of every operation against the exact
//! oracle, and the structural invariants of the multiples store and the
//! root extraction.
//!
//! The sweeps are data-parallel; with the `parallel` feature (default) they
//! fan out over rayon, and a sequential fallback remains behind the same
//! API. Inputs are generated from a seeded stream first, so both paths
//! check the identical trial set.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::alu::{self, Significand9, Transform};
use crate::numeric::{format_number, OpremaNumber, Sign};
use crate::oracle::{self, ExactDecimal, ExactOp};

/// Sizing and seeding of the randomized sweeps.
#[derive(Debug, Clone, Copy)]
pub struct SweepConfig {
    pub n_random: usize,
    pub seed: u64,
    pub parallel: bool,
}

impl Default for SweepConfig {
    fn default() -> SweepConfig {
        SweepConfig {
            n_random: 100_000,
            seed: 0x1954_0405,
            parallel: cfg!(feature = "parallel"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct PropertyOutcome {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
    pub counterexample: Option<String>,
}

impl PropertyOutcome {
    fn pass(name: &'static str, detail: impl Into<String>) -> PropertyOutcome {
        PropertyOutcome {
            name,
            pass: true,
            detail: detail.into(),
            counterexample: None,
        }
    }

    fn fail(name: &'static str, counterexample: String) -> PropertyOutcome {
        PropertyOutcome {
            name,
            pass: false,
            detail: "FAILED".into(),
            counterexample: Some(counterexample),
        }
    }

    fn from_counterexample(
        name: &'static str,
        detail: impl Into<String>,
        ce: Option<String>,
    ) -> PropertyOutcome {
        match ce {
            None => PropertyOutcome::pass(name, detail),
            Some(ce) => PropertyOutcome::fail(name, ce),
        }
    }
}

/// First counterexample over a trial set, in input order, parallel when
/// asked for and compiled in.
fn find_counterexample<T, F>(items: &[T], parallel: bool, f: F) -> Option<String>
where
    T: Send + Sync,
    F: Fn(&T) -> Option<String> + Send + Sync,
{
    #[cfg(feature = "parallel")]
    if parallel {
        use rayon::prelude::*;
        return items.par_iter().find_map_first(&f);
    }
    let _ = parallel;
    items.iter().find_map(f)
}

fn random_number(rng: &mut ChaCha8Rng, exp_range: std::ops::RangeInclusive<i32>) -> OpremaNumber {
    let mut digits = [0u8; 8];
    digits[0] = rng.gen_range(1..=9);
    for d in digits.iter_mut().skip(1) {
        *d = rng.gen_range(0..=9);
    }
    let sign = if rng.gen_bool(0.5) {
        Sign::Plus
    } else {
        Sign::Minus
    };
    OpremaNumber::finite(sign, digits, rng.gen_range(exp_range))
}

/// Four significant digits: the square of such a value is exactly
/// representable, so the square-then-root chain must reproduce it.
fn random_short_number(rng: &mut ChaCha8Rng) -> OpremaNumber {
    let mut digits = [0u8; 8];
    digits[0] = rng.gen_range(1..=9);
    for d in digits.iter_mut().take(4).skip(1) {
        *d = rng.gen_range(0..=9);
    }
    let sign = if rng.gen_bool(0.5) {
        Sign::Plus
    } else {
        Sign::Minus
    };
    OpremaNumber::finite(sign, digits, rng.gen_range(-7..=7))
}

fn random_frame(rng: &mut ChaCha8Rng) -> Significand9 {
    let mut d = [0u8; 9];
    d[1] = rng.gen_range(1..=9);
    for slot in d.iter_mut().skip(2) {
        *slot = rng.gen_range(0..=9);
    }
    Significand9::from_digits(d)
}

/// The worked examples the machine's documentation records, checked
/// bit-exact.
pub fn check_worked_examples() -> PropertyOutcome {
    let name = "worked_examples";
    let fr = Significand9::from_digits;

    // normalization rounding
    let (r, _) = alu::round_norm(&fr([1, 2, 2, 2, 2, 2, 2, 1, 9]));
    if r != fr([0, 1, 2, 2, 2, 2, 2, 2, 1]) {
        return PropertyOutcome::fail(name, format!("roundNorm(1 2222 2219) = {r}"));
    }
    let (r, _) = alu::round_norm(&fr([1, 2, 2, 2, 2, 2, 2, 2, 1]));
    if r != fr([0, 1, 2, 2, 2, 2, 2, 2, 3]) {
        return PropertyOutcome::fail(name, format!("roundNorm(1 2222 2221) = {r}"));
    }

    // round-ties-away carry ripple in the add-5 form
    let r = alu::rta_drop_last(&fr([0, 9, 9, 9, 9, 9, 9, 9, 5]));
    if r != fr([1, 0, 0, 0, 0, 0, 0, 0, 0]) {
        return PropertyOutcome::fail(name, format!("rta(0 9999 9995) = {r}"));
    }

    // reference ties-to-even ripple
    let r = oracle::rtte_drop_last(&[1, 9, 9, 9, 9, 9, 9, 9, 5]);
    if r != [0, 2, 0, 0, 0, 0, 0, 0, 0] {
        return PropertyOutcome::fail(name, format!("rtte(1 9999 9995) = {r:?}"));
    }

    // division correction step
    let s = fr([0, 2, 0, 1, 0, 0, 0, 0, 0]);
    let rest = fr([0, 8, 0, 0, 0, 0, 0, 0, 0]);
    let multiples = alu::MultiplesStore::build(&s);
    let step = alu::quotient_digit_step(&rest, &multiples);
    if step.candidate != 4
        || step.quotient_digit != 3
        || step.rest_after != fr([0, 1, 9, 7, 0, 0, 0, 0, 0])
    {
        return PropertyOutcome::fail(
            name,
            format!(
                "division step: i={} q={} rest={}",
                step.candidate, step.quotient_digit, step.rest_after
            ),
        );
    }

    // square root of 1225
    let root = alu::sqrt_op(&crate::numeric::parse_decimal("1225").unwrap(), false);
    if format_number(&root) != "+0.35000000e+02" {
        return PropertyOutcome::fail(name, format!("sqrt(1225) = {root}"));
    }

    // frame addition with overflow digit
    let sum = fr([0, 5, 0, 0, 0, 0, 0, 0, 0]).add(&fr([0, 6, 0, 0, 0, 0, 0, 0, 0]));
    if sum != fr([1, 1, 0, 0, 0, 0, 0, 0, 0]) {
        return PropertyOutcome::fail(name, format!("5000 0000 + 6000 0000 = {sum}"));
    }
    let normalized = alu::normalize(&sum, 1, Sign::Plus).value;
    if format_number(&normalized) != "+0.11000000e+02" {
        return PropertyOutcome::fail(name, format!("normalized sum = {normalized}"));
    }

    PropertyOutcome::pass(name, "6 documented examples exact")
}

/// Signed drift of a normalization-style rounding (drop `d8`, keep `d7`,
/// shifted) over the hundred `(d7, d8)` pairs, in units of the dropped
/// digit. Zero for the machine's rule; any defective rule shows up here.
pub fn rounding_drift(round: impl Fn(&Significand9) -> Significand9) -> i64 {
    let mut sum = 0i64;
    for d7 in 0..=9u8 {
        for d8 in 0..=9u8 {
            let mut frame = [0u8; 9];
            frame[1] = 1; // keep the frame nonzero
            frame[7] = d7;
            frame[8] = d8;
            let f = Significand9::from_digits(frame);
            let rounded = round(&f);
            sum += rounded.value() as i64 * 10 - f.value() as i64;
        }
    }
    sum
}

/// The exhaustive rounding-error statistics over all hundred `(d7, d8)`
/// pairs: zero signed drift, mean absolute errors 4.5 vs 2.5 (ratio 1.8),
/// ties kept odd, no carry past `d7`.
pub fn check_rounding_stats() -> PropertyOutcome {
    let name = "rounding_stats";
    // drift measured directly on the implementation…
    let drift = rounding_drift(|f| alu::round_norm(f).0);
    if drift != 0 {
        return PropertyOutcome::fail(name, format!("implementation drifts by {drift}"));
    }
    // …and on the enumerated reference table
    let table = oracle::enumerate_rounding_errors();
    if table.sum_signed_norm() != 0 {
        return PropertyOutcome::fail(name, format!("signed drift {}", table.sum_signed_norm()));
    }
    if table.total_abs_norm() != 450 || table.total_abs_rta() != 250 {
        return PropertyOutcome::fail(
            name,
            format!(
                "mean |err| {}/100 vs {}/100",
                table.total_abs_norm(),
                table.total_abs_rta()
            ),
        );
    }
    for e in &table.entries {
        if e.d8 == 5 && e.norm_kept % 2 == 0 {
            return PropertyOutcome::fail(name, format!("tie d7={} kept even digit", e.d7));
        }
        if e.norm_kept > 9 {
            return PropertyOutcome::fail(name, format!("carry past d7 at d7={}", e.d7));
        }
        // cross-check the table against the frame-level implementation
        let mut frame = [0u8; 9];
        frame[1] = 1;
        frame[7] = e.d7;
        frame[8] = e.d8;
        let (rounded, _) = alu::round_norm(&Significand9::from_digits(frame));
        if rounded.digit(8) != e.norm_kept {
            return PropertyOutcome::fail(name, format!("table disagrees with roundNorm at {e:?}"));
        }
    }
    PropertyOutcome::pass(name, "drift 0, mean |err| 4.5 vs 2.5 (ratio 1.8), ties odd")
}

/// Every quotient digit chosen by the two-digit lookahead plus parallel
/// correction equals the schoolbook digit, and the rest invariant
/// `0 <= rest < divisor` holds after every step. Runs the exhaustive
/// two-digit-prefix sweep plus `n_random` random significand pairs.
pub fn check_division_digits(cfg: &SweepConfig) -> PropertyOutcome {
    let name = "division_digit_equivalence";

    // Exhaustive over the two-digit prefixes the lookahead actually
    // compares, with edge tails.
    let tails: [[u8; 6]; 3] = [[0; 6], [9; 6], [4, 7, 0, 2, 9, 1]];
    let mut prefix_cases = Vec::new();
    for a in 1..=9u8 {
        for b in 0..=9u8 {
            for c in 0..=9u8 {
                for d in 0..=9u8 {
                    for (ti, tail_s) in tails.iter().enumerate() {
                        let tail_r = &tails[(ti + 1) % 3];
                        let mut s = [0u8; 9];
                        s[1] = a;
                        s[2] = b;
                        s[3..].copy_from_slice(&tail_s[..6]);
                        let mut r = [0u8; 9];
                        r[0] = c;
                        r[1] = d;
                        r[2] = tail_r[0];
                        r[3..].copy_from_slice(&tail_r[..6]);
                        prefix_cases
                            .push((Significand9::from_digits(s), Significand9::from_digits(r)));
                    }
                }
            }
        }
    }
    let step_check = |&(s, r): &(Significand9, Significand9)| -> Option<String> {
        // a step is only ever entered with rest < 10·divisor
        if r.value() >= 10 * s.value() {
            return None;
        }
        let multiples = alu::MultiplesStore::build(&s);
        let step = alu::quotient_digit_step(&r, &multiples);
        let want = (r.value() / s.value()) as u8;
        if step.quotient_digit != want {
            return Some(format!(
                "step s={s} r={r}: chose {} want {want}",
                step.quotient_digit
            ));
        }
        if step.rest_after.value() != r.value() - want as u64 * s.value()
            || step.rest_after.value() >= s.value()
        {
            return Some(format!("step s={s} r={r}: rest {}", step.rest_after));
        }
        None
    };
    if let Some(ce) = find_counterexample(&prefix_cases, cfg.parallel, step_check) {
        return PropertyOutcome::fail(name, ce);
    }

    // Random full divisions against the long-division oracle.
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let pairs: Vec<(Significand9, Significand9)> = (0..cfg.n_random)
        .map(|_| (random_frame(&mut rng), random_frame(&mut rng)))
        .collect();
    let full_check = |&(dividend, divisor): &(Significand9, Significand9)| -> Option<String> {
        let (digits, steps) = alu::quotient_digits(&dividend, &divisor);
        let want = oracle::reference_division_digits(dividend.digits(), divisor.digits(), 9);
        if digits.as_slice() != want.as_slice() {
            return Some(format!(
                "digits {digits:?} want {want:?} for {dividend} / {divisor}"
            ));
        }
        for step in &steps {
            if step.rest_after.value() >= divisor.value() {
                return Some(format!(
                    "rest invariant broken at {dividend} / {divisor}: rest {}",
                    step.rest_after
                ));
            }
        }
        None
    };
    let ce = find_counterexample(&pairs, cfg.parallel, full_check);
    PropertyOutcome::from_counterexample(
        name,
        format!(
            "{} prefix steps + {} random divisions match long division",
            prefix_cases.len(),
            pairs.len()
        ),
        ce,
    )
}

/// Accuracy against the correctly-rounded exact result: every operation on
/// finite operands lands within one unit in the last place, `x - x` is
/// exactly zero and `x / x` exactly one, and the root of an emulated square
/// reproduces the magnitude within one unit.
pub fn check_arithmetic_accuracy(cfg: &SweepConfig) -> PropertyOutcome {
    let name = "arithmetic_accuracy";
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0xacc);
    #[derive(Clone, Copy)]
    struct Trial {
        x: OpremaNumber,
        y: OpremaNumber,
        tx: Transform,
        ty: Transform,
        narrow_x: OpremaNumber,
    }
    let trials: Vec<Trial> = (0..cfg.n_random)
        .map(|_| Trial {
            x: random_number(&mut rng, -15..=15),
            y: random_number(&mut rng, -15..=15),
            tx: Transform::ALL[rng.gen_range(0..4)],
            ty: Transform::ALL[rng.gen_range(0..4)],
            narrow_x: random_short_number(&mut rng),
        })
        .collect();

    let check = |t: &Trial| -> Option<String> {
        let ex = ExactDecimal::from_number(&t.x).unwrap();
        let ey = ExactDecimal::from_number(&t.y).unwrap();

        // Addition family, one of the sixteen variants. The unit of the
        // tolerance is the eighth digit of the aligned working frame: a
        // cancelling subtraction keeps only the digits the aligned frame
        // held, so the result scale can sit below the working scale.
        let emu = alu::add_variant(&t.x, &t.y, t.tx, t.ty);
        let exact = oracle::exact_op(
            ExactOp::Add,
            &transformed(&ex, t.tx),
            &transformed(&ey, t.ty),
        )
        .unwrap();
        let common = t.x.exponent().max(t.y.exponent());
        if let Some(ce) = compare(name, "add", &t.x, &t.y, &emu, &exact, Some(common)) {
            return Some(ce);
        }

        // multiplication
        let emu = alu::multiply(&t.x, &t.y);
        let exact = oracle::exact_op(ExactOp::Mul, &ex, &ey).unwrap();
        if let Some(ce) = compare(name, "mul", &t.x, &t.y, &emu, &exact, None) {
            return Some(ce);
        }

        // division
        let emu = alu::divide(&t.x, &t.y);
        let exact = oracle::exact_op(ExactOp::DivToDigits(14), &ex, &ey).unwrap();
        if let Some(ce) = compare(name, "div", &t.x, &t.y, &emu, &exact, None) {
            return Some(ce);
        }

        // square root over the magnitude
        let pos = t.x.with_sign(Sign::Plus);
        let emu = alu::sqrt_op(&pos, false);
        let exact = oracle::exact_op(
            ExactOp::SqrtToDigits(14),
            &ExactDecimal::from_number(&pos).unwrap(),
            &ExactDecimal::from_int(0),
        )
        .unwrap();
        if let Some(ce) = compare(name, "sqrt", &pos, &pos, &emu, &exact, None) {
            return Some(ce);
        }

        // identities
        let diff = alu::add_variant(&t.x, &t.x, Transform::Identity, Transform::Negate);
        if !diff.is_zero() {
            return Some(format!("x - x = {diff} for x = {}", t.x));
        }
        let quot = alu::divide(&t.x, &t.x);
        if format_number(&quot) != "+0.10000000e+01" {
            return Some(format!("x / x = {quot} for x = {}", t.x));
        }

        // root of an emulated square
        let square = alu::multiply(&t.narrow_x, &t.narrow_x);
        let root = alu::sqrt_op(&square, false);
        let magnitude = t.narrow_x.with_sign(Sign::Plus);
        if !oracle::within_ulps(&root, &magnitude, 1) {
            return Some(format!(
                "sqrt(x*x) = {root}, |x| = {magnitude} for x = {}",
                t.narrow_x
            ));
        }
        None
    };
    let ce = find_counterexample(&trials, cfg.parallel, check);
    PropertyOutcome::from_counterexample(
        name,
        format!("{} trials per operation within 1 ulp", trials.len()),
        ce,
    )
}

fn transformed(x: &ExactDecimal, t: Transform) -> ExactDecimal {
    use num_traits::Signed;
    let m = match t {
        Transform::Identity => x.mantissa.clone(),
        Transform::Negate => -x.mantissa.clone(),
        Transform::Abs => x.mantissa.abs(),
        Transform::NegAbs => -x.mantissa.abs(),
    };
    ExactDecimal::new(m, x.scale)
}

/// One-ulp comparison against the correctly-rounded exact result. The unit
/// is the eighth digit at the reference's exponent, or at `scale_floor`
/// when that working scale is higher.
fn compare(
    _name: &str,
    op: &str,
    x: &OpremaNumber,
    y: &OpremaNumber,
    emu: &OpremaNumber,
    exact: &ExactDecimal,
    scale_floor: Option<i32>,
) -> Option<String> {
    if exact.is_zero() {
        return if emu.is_zero() {
            None
        } else {
            Some(format!("{op}({x}, {y}) = {emu}, exact result is zero"))
        };
    }
    match oracle::round_to_8_rta(exact) {
        Some(reference) => {
            let scale = match scale_floor {
                Some(floor) => reference.exponent().max(floor),
                None => reference.exponent(),
            };
            if oracle::within_units_at(emu, &reference, 1, scale) {
                None
            } else {
                Some(format!(
                    "{op}({x}, {y}) = {emu}, correctly rounded {reference}"
                ))
            }
        }
        // reference leaves the exponent range: the machine must have folded
        // to a special
        None => {
            if emu.is_special() {
                None
            } else {
                Some(format!(
                    "{op}({x}, {y}) = {emu}, expected overflow/underflow special"
                ))
            }
        }
    }
}

/// The storage of multiples is exact: `m[i] = i · s` as integers.
pub fn check_multiples(cfg: &SweepConfig) -> PropertyOutcome {
    let name = "multiples_store";
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x6d);
    let n = cfg.n_random.min(10_000);
    let frames: Vec<Significand9> = (0..n).map(|_| random_frame(&mut rng)).collect();
    let ce = find_counterexample(&frames, cfg.parallel, |s| {
        let m = alu::MultiplesStore::build(s);
        for i in 1..=9u8 {
            if m.get(i).value() != i as u64 * s.value() {
                return Some(format!("m[{i}] of {s} = {}", m.get(i)));
            }
        }
        None
    });
    PropertyOutcome::from_counterexample(name, format!("{n} stores exact"), ce)
}

/// After every digit pair, the accumulated root `a` satisfies
/// `a² <= consumed < (a+1)²` (equivalently `rest <= 2a` with
/// `a² + rest = consumed`).
pub fn check_sqrt_invariants(cfg: &SweepConfig) -> PropertyOutcome {
    let name = "sqrt_digit_invariant";
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x50);
    let n = cfg.n_random.min(10_000);
    let frames: Vec<Significand9> = (0..n)
        .map(|_| {
            let f = random_frame(&mut rng);
            if rng.gen_bool(0.5) {
                f.shift_left1()
            } else {
                f
            }
        })
        .collect();
    let ce = find_counterexample(&frames, cfg.parallel, |radicand| {
        let mut trace = Vec::new();
        let digits = alu::sqrt_digits(radicand, &mut trace);
        // reconstruct the consumed prefix pair by pair
        let d = radicand.digits();
        let groups: [u64; 9] = [
            d[0] as u64,
            (d[1] * 10 + d[2]) as u64,
            (d[3] * 10 + d[4]) as u64,
            (d[5] * 10 + d[6]) as u64,
            (d[7] * 10 + d[8]) as u64,
            0,
            0,
            0,
            0,
        ];
        let mut consumed: u128 = 0;
        for (k, state) in trace.iter().enumerate() {
            consumed = consumed * 100 + groups[k] as u128;
            let a = state.root_so_far as u128;
            if !(a * a <= consumed && consumed < (a + 1) * (a + 1)) {
                return Some(format!("pair {k} of {radicand}: a={a} consumed={consumed}"));
            }
            if state.rest as u128 != consumed - a * a {
                return Some(format!("pair {k} of {radicand}: rest {}", state.rest));
            }
        }
        // digits agree with the integer square root
        let root: u64 = digits.iter().fold(0, |acc, &x| acc * 10 + x as u64);
        let exact = num_integer::Roots::sqrt(&(radicand.value() as u128 * 100_000_000u128)) as u64;
        if root != exact {
            return Some(format!("{radicand}: digits {root} vs isqrt {exact}"));
        }
        None
    });
    PropertyOutcome::from_counterexample(name, format!("{n} radicands, invariant per pair"), ce)
}

/// Runs every suite with one configuration.
pub fn run_all(cfg: &SweepConfig) -> Vec<PropertyOutcome> {
    vec![
        check_worked_examples(),
        check_rounding_stats(),
        check_division_digits(cfg),
        check_arithmetic_accuracy(cfg),
        check_multiples(cfg),
        check_sqrt_invariants(cfg),
    ]
}

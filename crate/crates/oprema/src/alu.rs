//! Arithmetic exactly as the machine computed it: 9-digit adder frames,
//! operand alignment, the sixteen-variant addition, multiplication over a
//! storage of multiples, quotient-digit lookahead division with a parallel
//! correction subtraction, digit-pair square root by odd-number subtraction,
//! the two rounding rules, normalization, and the special-value algebra.
//!
//! Frames carry nine digits `d0..d8`; a frame with exponent `e` denotes the
//! value `d0d1…d8 · 10^(e-8)` read as an integer, so a normalized operand
//! (`d0 = 0`, `d1 > 0`) is `0.d1…d8 · 10^e`.

use std::fmt;

use crate::numeric::{OpremaNumber, Sign, Special, EXP_MAX};

/// The 9-digit working frame of the adders.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Significand9 {
    d: [u8; 9],
}

impl Significand9 {
    pub const ZERO: Significand9 = Significand9 { d: [0; 9] };

    pub fn from_digits(d: [u8; 9]) -> Significand9 {
        assert!(d.iter().all(|&x| x <= 9), "digit out of range");
        Significand9 { d }
    }

    /// Loads a number's eight digits into the frame as `0 d1..d8`.
    pub fn from_number(n: &OpremaNumber) -> Significand9 {
        let mut d = [0u8; 9];
        d[1..].copy_from_slice(n.digits());
        Significand9 { d }
    }

    pub fn digits(&self) -> &[u8; 9] {
        &self.d
    }

    pub fn digit(&self, i: usize) -> u8 {
        self.d[i]
    }

    pub fn is_zero(&self) -> bool {
        self.d.iter().all(|&x| x == 0)
    }

    /// Frame read as an integer, `d0` most significant.
    pub fn value(&self) -> u64 {
        self.d.iter().fold(0u64, |acc, &x| acc * 10 + x as u64)
    }

    pub fn from_value(mut v: u64) -> Significand9 {
        assert!(v < 1_000_000_000, "does not fit nine digits");
        let mut d = [0u8; 9];
        for slot in d.iter_mut().rev() {
            *slot = (v % 10) as u8;
            v /= 10;
        }
        Significand9 { d }
    }

    /// First two digits `d0 d1` as a two-digit number, the prefix the
    /// division lookahead compares.
    pub fn prefix2(&self) -> u8 {
        self.d[0] * 10 + self.d[1]
    }

    /// Digit-serial addition with carry; the frame never overflows in any
    /// schedule the operations use, which the assertion guards.
    pub fn add(&self, other: &Significand9) -> Significand9 {
        let mut out = [0u8; 9];
        let mut carry = 0u8;
        for i in (0..9).rev() {
            let s = self.d[i] + other.d[i] + carry;
            out[i] = s % 10;
            carry = s / 10;
        }
        assert_eq!(carry, 0, "adder frame overflow");
        Significand9 { d: out }
    }

    /// Digit-serial subtraction; requires `self >= other`.
    pub fn sub(&self, other: &Significand9) -> Significand9 {
        let mut out = [0u8; 9];
        let mut borrow = 0i8;
        for i in (0..9).rev() {
            let mut s = self.d[i] as i8 - other.d[i] as i8 - borrow;
            if s < 0 {
                s += 10;
                borrow = 1;
            } else {
                borrow = 0;
            }
            out[i] = s as u8;
        }
        assert_eq!(borrow, 0, "subtraction went negative");
        Significand9 { d: out }
    }

    /// Shift one place left; `d0` must be free.
    pub fn shift_left1(&self) -> Significand9 {
        assert_eq!(self.d[0], 0, "left shift would drop a digit");
        let mut out = [0u8; 9];
        out[..8].copy_from_slice(&self.d[1..]);
        Significand9 { d: out }
    }

    /// Shift `n` places right, returning the shifted-out digits (most
    /// significant first) for the rounding stage.
    pub fn shift_right(&self, n: usize) -> (Significand9, Vec<u8>) {
        if n == 0 {
            return (*self, Vec::new());
        }
        if n >= 9 {
            // the whole frame falls out, behind n-9 zero positions
            let mut tail = vec![0u8; n - 9];
            tail.extend_from_slice(&self.d);
            return (Significand9::ZERO, tail);
        }
        let mut out = [0u8; 9];
        out[n..].copy_from_slice(&self.d[..9 - n]);
        (Significand9 { d: out }, self.d[9 - n..].to_vec())
    }
}

impl fmt::Display for Significand9 {
    /// Grouped the way the machine's documentation writes frames:
    /// `d0 d1d2d3d4 d5d6d7d8`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {}{}{}{} {}{}{}{}",
            self.d[0],
            self.d[1],
            self.d[2],
            self.d[3],
            self.d[4],
            self.d[5],
            self.d[6],
            self.d[7],
            self.d[8]
        )
    }
}

/// A sign-carrying frame, as produced by the subtractions of the division
/// step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SignedFrame {
    pub sign: Sign,
    pub frame: Significand9,
}

impl SignedFrame {
    pub fn is_negative(&self) -> bool {
        self.sign.is_minus() && !self.frame.is_zero()
    }
}

/// `a - b` on frames, sign-magnitude.
pub fn frame_sub_signed(a: &Significand9, b: &Significand9) -> SignedFrame {
    if a >= b {
        SignedFrame {
            sign: Sign::Plus,
            frame: a.sub(b),
        }
    } else {
        SignedFrame {
            sign: Sign::Minus,
            frame: b.sub(a),
        }
    }
}

/// Sign-magnitude addition of two signed frames: equal signs add the
/// magnitudes, unequal signs subtract the smaller from the larger and take
/// the larger's sign.
pub fn frame_add(
    a_sign: Sign,
    a: &Significand9,
    b_sign: Sign,
    b: &Significand9,
) -> (Sign, Significand9) {
    if a_sign == b_sign {
        (a_sign, a.add(b))
    } else if a >= b {
        (a_sign, a.sub(b))
    } else {
        (b_sign, b.sub(a))
    }
}

/// The nine multiples `1·s ... 9·s` built by repeated addition, the
/// machine's scratch store for multiplication and division.
#[derive(Debug, Clone)]
pub struct MultiplesStore {
    m: [Significand9; 9],
}

impl MultiplesStore {
    pub fn build(s: &Significand9) -> MultiplesStore {
        let mut m = [*s; 9];
        for i in 1..9 {
            m[i] = m[i - 1].add(s);
        }
        MultiplesStore { m }
    }

    /// `i · s` for `i` in 1..=9. There is no register for multiple 0.
    pub fn get(&self, i: u8) -> &Significand9 {
        assert!((1..=9).contains(&i));
        &self.m[i as usize - 1]
    }
}

fn increment_from(frame: &Significand9, pos: usize) -> Significand9 {
    let mut d = *frame.digits();
    for i in (0..=pos).rev() {
        if d[i] == 9 {
            d[i] = 0;
        } else {
            d[i] += 1;
            return Significand9::from_digits(d);
        }
    }
    panic!("carry ripple overflowed the frame");
}

/// Round-half-away-from-zero applied to a frame whose tail was just shifted
/// out: a leading tail digit of 5 or more adds one unit in the last place,
/// with full carry propagation (the ripple may run all the way to `d0`).
pub fn round_ties_away(frame: &Significand9, shifted_out_tail: &[u8]) -> Significand9 {
    if shifted_out_tail.first().copied().unwrap_or(0) >= 5 {
        increment_from(frame, 8)
    } else {
        *frame
    }
}

/// The adder's round-to-eight-digits in its historical add-5 form: add 5 at
/// `d8`, whose carry may ripple all the way to `d0`, then clear `d8`, the
/// digit being dropped.
pub fn rta_drop_last(frame: &Significand9) -> Significand9 {
    let mut d = *frame.digits();
    let last = d[8];
    d[8] = 0;
    let kept = Significand9::from_digits(d);
    if last >= 5 {
        increment_from(&kept, 7)
    } else {
        kept
    }
}

/// Shift one place right and fold the shifted-out digit back in with
/// round-ties-away; the step between the partial-product additions.
pub fn shift_right1_rta(frame: &Significand9) -> Significand9 {
    let (shifted, tail) = frame.shift_right(1);
    round_ties_away(&shifted, &tail)
}

/// The normalization-stage rounding: drops `d8` during the right shift of
/// normalization. `d8 = 0` or an odd `d7` simply drop; an even `d7` with
/// `d8 != 0` is incremented, which can never carry because 8 is the largest
/// even digit. Returns the shifted frame `0 d0..d7±` and the exponent
/// adjustment (+1).
pub fn round_norm(s_u: &Significand9) -> (Significand9, i32) {
    let d = s_u.digits();
    let mut out = [0u8; 9];
    out[1..].copy_from_slice(&d[..8]);
    if d[8] != 0 && d[7].is_multiple_of(2) {
        out[8] += 1;
    }
    (Significand9::from_digits(out), 1)
}

/// Overflow/underflow record for one operation; the exponent adder had no
/// way to signal these, so the emulator folds them to the special values and
/// flags the event.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OpStatus {
    pub exp_overflow: bool,
    pub exp_underflow: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AluResult {
    pub value: OpremaNumber,
    pub status: OpStatus,
}

impl AluResult {
    fn plain(value: OpremaNumber) -> AluResult {
        AluResult {
            value,
            status: OpStatus::default(),
        }
    }
}

/// Normalizes a frame into the number format: an all-zero frame becomes the
/// special zero; `d0 > 0` takes the rounded right shift; otherwise the frame
/// shifts left until `d1 > 0`. An exponent beyond +15 collapses to infinite,
/// below -15 to zero, with the event flagged.
pub fn normalize(frame: &Significand9, exponent: i32, sign: Sign) -> AluResult {
    if frame.is_zero() {
        return AluResult::plain(OpremaNumber::zero());
    }
    let mut f = *frame;
    let mut e = exponent;
    if f.digit(0) > 0 {
        let (rounded, delta) = round_norm(&f);
        f = rounded;
        e += delta;
    } else {
        while f.digit(1) == 0 {
            f = f.shift_left1();
            e -= 1;
        }
    }
    if e > EXP_MAX {
        return AluResult {
            value: OpremaNumber::infinite(),
            status: OpStatus {
                exp_overflow: true,
                exp_underflow: false,
            },
        };
    }
    if e < -EXP_MAX {
        return AluResult {
            value: OpremaNumber::zero(),
            status: OpStatus {
                exp_overflow: false,
                exp_underflow: true,
            },
        };
    }
    let mut digits = [0u8; 8];
    digits.copy_from_slice(&f.digits()[1..]);
    AluResult::plain(OpremaNumber::finite(sign, digits, e))
}

/// Normalizes a possibly-unnormalized number, as the machine did when a
/// plugged row was read into an internal register.
pub fn normalize_number(n: &OpremaNumber) -> AluResult {
    if n.is_special() {
        return AluResult::plain(*n);
    }
    normalize(&Significand9::from_number(n), n.exponent(), n.sign())
}

/// The four operand forms of the addition group.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Transform {
    Identity,
    Negate,
    Abs,
    NegAbs,
}

impl Transform {
    pub const ALL: [Transform; 4] = [
        Transform::Identity,
        Transform::Negate,
        Transform::Abs,
        Transform::NegAbs,
    ];

    /// Two-bit encoding used in the opcode table.
    pub fn code(self) -> u8 {
        match self {
            Transform::Identity => 0,
            Transform::Negate => 1,
            Transform::Abs => 2,
            Transform::NegAbs => 3,
        }
    }

    pub fn from_code(code: u8) -> Transform {
        match code {
            0 => Transform::Identity,
            1 => Transform::Negate,
            2 => Transform::Abs,
            3 => Transform::NegAbs,
            _ => panic!("transform code out of range"),
        }
    }

    pub fn apply_sign(self, sign: Sign) -> Sign {
        match self {
            Transform::Identity => sign,
            Transform::Negate => sign.flip(),
            Transform::Abs => Sign::Plus,
            Transform::NegAbs => Sign::Minus,
        }
    }

    /// Operand-form syntax: `+x`, `-x`, `+|x|`, `-|x|`.
    pub fn mnemonic(self, operand: &str) -> String {
        match self {
            Transform::Identity => format!("+{operand}"),
            Transform::Negate => format!("-{operand}"),
            Transform::Abs => format!("+|{operand}|"),
            Transform::NegAbs => format!("-|{operand}|"),
        }
    }
}

/// An ingested operand: special kind, effective sign after a transform,
/// normalized frame, exponent.
#[derive(Debug, Clone, Copy)]
struct Operand {
    special: Option<Special>,
    sign: Sign,
    frame: Significand9,
    exponent: i32,
}

fn ingest(n: &OpremaNumber, t: Transform) -> Operand {
    let normalized = normalize_number(n).value;
    Operand {
        special: normalized.special_kind(),
        sign: t.apply_sign(normalized.sign()),
        frame: Significand9::from_number(&normalized),
        exponent: normalized.exponent(),
    }
}

/// Aligns two finite operands onto a common exponent: the smaller-exponent
/// significand shifts right by the exponent difference and the shifted-out
/// tail rounds back in at the last place.
pub fn align(x: &OpremaNumber, y: &OpremaNumber) -> (Significand9, Significand9, i32) {
    assert!(x.is_finite() && y.is_finite());
    let fx = Significand9::from_number(x);
    let fy = Significand9::from_number(y);
    let (ex, ey) = (x.exponent(), y.exponent());
    let common = ex.max(ey);
    let shift_in = |f: &Significand9, delta: i32| {
        let (shifted, tail) = f.shift_right(delta as usize);
        round_ties_away(&shifted, &tail)
    };
    if ex < ey {
        (shift_in(&fx, ey - ex), fy, common)
    } else if ey < ex {
        (fx, shift_in(&fy, ex - ey), common)
    } else {
        (fx, fy, common)
    }
}

/// One of the sixteen additions: both operands pass through their form
/// (identity, negation, absolute value, negated absolute value), align,
/// add in sign-magnitude, and the result normalizes.
pub fn add_variant(
    x: &OpremaNumber,
    y: &OpremaNumber,
    tx: Transform,
    ty: Transform,
) -> OpremaNumber {
    add_variant_full(x, y, tx, ty).value
}

pub fn add_variant_full(
    x: &OpremaNumber,
    y: &OpremaNumber,
    tx: Transform,
    ty: Transform,
) -> AluResult {
    let a = ingest(x, tx);
    let b = ingest(y, ty);
    match (a.special, b.special) {
        (Some(Special::Indeterminate), _) | (_, Some(Special::Indeterminate)) => {
            return AluResult::plain(OpremaNumber::indeterminate())
        }
        (Some(Special::Infinite), Some(Special::Infinite)) => {
            return AluResult::plain(if a.sign == b.sign {
                OpremaNumber::infinite()
            } else {
                // infinite - infinite
                OpremaNumber::indeterminate()
            });
        }
        (Some(Special::Infinite), _) | (_, Some(Special::Infinite)) => {
            return AluResult::plain(OpremaNumber::infinite())
        }
        (Some(Special::Zero), Some(Special::Zero)) => return AluResult::plain(OpremaNumber::zero()),
        (Some(Special::Zero), None) => {
            return AluResult::plain(operand_number(&b));
        }
        (None, Some(Special::Zero)) => {
            return AluResult::plain(operand_number(&a));
        }
        (None, None) => {}
    }
    let xa = operand_number(&a);
    let ya = operand_number(&b);
    let (fx, fy, common) = align(&xa, &ya);
    let (sign, sum) = frame_add(a.sign, &fx, b.sign, &fy);
    normalize(&sum, common, sign)
}

fn operand_number(op: &Operand) -> OpremaNumber {
    if let Some(kind) = op.special {
        return OpremaNumber::special(kind);
    }
    let mut digits = [0u8; 8];
    digits.copy_from_slice(&op.frame.digits()[1..]);
    OpremaNumber::finite(op.sign, digits, op.exponent)
}

/// Multiplication: phase 1 fills the storage of multiples from the second
/// operand, phase 2 walks the first operand's digits from `d8` leftward,
/// adding the selected multiple (a zero digit contributes only the shift)
/// and shifting the partial product one place right with round-ties-away on
/// the shifted-out digit. No shift follows the final addition: that last
/// right shift is the normalization step, which also folds the exponent sum
/// from the exponent adder and the sign rule in.
pub fn multiply(x: &OpremaNumber, y: &OpremaNumber) -> OpremaNumber {
    multiply_full(x, y).value
}

pub fn multiply_full(x: &OpremaNumber, y: &OpremaNumber) -> AluResult {
    let a = ingest(x, Transform::Identity);
    let b = ingest(y, Transform::Identity);
    if let Some(special) =
        special_combine(SpecialBinOp::Mul, &operand_number(&a), &operand_number(&b))
    {
        return AluResult::plain(special);
    }
    let multiples = MultiplesStore::build(&b.frame);
    let mut p = Significand9::ZERO;
    for step in 0..8 {
        let digit = a.frame.digit(8 - step);
        if digit != 0 {
            p = p.add(multiples.get(digit));
        }
        if step != 7 {
            p = shift_right1_rta(&p);
        }
    }
    normalize(&p, a.exponent + b.exponent - 1, a.sign.xor(b.sign))
}

/// One quotient-digit selection: the lookahead over the first two digits,
/// the two parallel subtractions, and the corrected digit.
#[derive(Debug, Clone)]
pub struct DivisionStep {
    /// Rest entering the step (already multiplied by 10 from the previous
    /// step).
    pub rest: Significand9,
    /// Candidate digit selected by the two-digit comparison.
    pub candidate: u8,
    /// Main-adder subtraction `rest - s·i`.
    pub main_result: SignedFrame,
    /// Secondary-adder subtraction `rest - s·(i-1)`.
    pub secondary_result: SignedFrame,
    /// The digit that survives the correction.
    pub quotient_digit: u8,
    /// Rest after the step, before the times-10 shift.
    pub rest_after: Significand9,
}

/// Selects one quotient digit: the minimal `i` whose multiple's two-digit
/// prefix reaches the rest's prefix, checked by the parallel pair
/// `ma = r - s·i`, `sa = r - s·(i-1)`; when no multiple reaches the prefix
/// the digit is 9 and only the single subtraction is needed.
pub fn quotient_digit_step(rest: &Significand9, multiples: &MultiplesStore) -> DivisionStep {
    let rp = rest.prefix2();
    let candidate = (1..=9u8).find(|&i| multiples.get(i).prefix2() >= rp);
    match candidate {
        Some(i) => {
            let ma = frame_sub_signed(rest, multiples.get(i));
            let sa = if i > 1 {
                frame_sub_signed(rest, multiples.get(i - 1))
            } else {
                SignedFrame {
                    sign: Sign::Plus,
                    frame: *rest,
                }
            };
            let (q, new_rest) = if !ma.is_negative() {
                (i, ma.frame)
            } else {
                (i - 1, sa.frame)
            };
            DivisionStep {
                rest: *rest,
                candidate: i,
                main_result: ma,
                secondary_result: sa,
                quotient_digit: q,
                rest_after: new_rest,
            }
        }
        None => {
            // Every two-digit prefix fell short: the digit must be 9.
            let ma = frame_sub_signed(rest, multiples.get(9));
            DivisionStep {
                rest: *rest,
                candidate: 9,
                main_result: ma,
                secondary_result: ma,
                quotient_digit: 9,
                rest_after: ma.frame,
            }
        }
    }
}

/// Runs phase 2 for nine quotient digits over normalized significands,
/// returning the digits and the per-step records.
pub fn quotient_digits(
    dividend: &Significand9,
    divisor: &Significand9,
) -> ([u8; 9], Vec<DivisionStep>) {
    let multiples = MultiplesStore::build(divisor);
    let mut rest = *dividend;
    let mut digits = [0u8; 9];
    let mut steps = Vec::with_capacity(9);
    for q in digits.iter_mut() {
        let step = quotient_digit_step(&rest, &multiples);
        *q = step.quotient_digit;
        rest = step.rest_after;
        steps.push(step);
        // r := r × 10 before the next digit.
        rest = rest.shift_left1();
    }
    (digits, steps)
}

pub fn divide(x: &OpremaNumber, y: &OpremaNumber) -> OpremaNumber {
    divide_full(x, y).value
}

pub fn divide_full(x: &OpremaNumber, y: &OpremaNumber) -> AluResult {
    let a = ingest(x, Transform::Identity);
    let b = ingest(y, Transform::Identity);
    if let Some(special) =
        special_combine(SpecialBinOp::Div, &operand_number(&a), &operand_number(&b))
    {
        return AluResult::plain(special);
    }
    let (digits, _) = quotient_digits(&a.frame, &b.frame);
    normalize(
        &Significand9::from_digits(digits),
        a.exponent - b.exponent,
        a.sign.xor(b.sign),
    )
}

/// One digit-pair group of the square root: the rest swallows two more
/// digits and consecutive odd numbers `20a+1, 20a+3, …` are subtracted
/// until the next one would go negative; the count is the root digit.
#[derive(Debug, Clone)]
pub struct SqrtState {
    /// Root accumulated so far, as an integer over the digits produced.
    pub root_so_far: u64,
    /// Working rest after this group.
    pub rest: u64,
    /// Index of the digit pair just consumed.
    pub pair_index: usize,
    /// Number of successful subtractions in this group (= the digit).
    pub subtractions: u8,
}

/// Extracts nine root digits from a radicand frame with an even exponent.
/// The frame digits pair as `(d0)(d1d2)(d3d4)(d5d6)(d7d8)` followed by four
/// zero pairs, the leading single digit forming its own group.
pub fn sqrt_digits(radicand: &Significand9, trace: &mut Vec<SqrtState>) -> [u8; 9] {
    let d = radicand.digits();
    // Pair groups, most significant first.
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
    let mut digits = [0u8; 9];
    let mut a: u64 = 0;
    let mut rest: u64 = 0;
    for (idx, &group) in groups.iter().enumerate() {
        rest = rest * 100 + group;
        let mut count = 0u8;
        let mut odd = 20 * a + 1;
        while rest >= odd {
            rest -= odd;
            odd += 2;
            count += 1;
        }
        digits[idx] = count;
        a = a * 10 + count as u64;
        trace.push(SqrtState {
            root_so_far: a,
            rest,
            pair_index: idx,
            subtractions: count,
        });
    }
    digits
}

/// Square root; the second opcode variant negates the result. A negative
/// radicand yields indeterminate. An odd exponent first shifts the
/// significand one place left into the free `d0`, making the exponent even
/// without losing a digit.
pub fn sqrt_op(x: &OpremaNumber, negate_result: bool) -> OpremaNumber {
    sqrt_full(x, negate_result).value
}

pub fn sqrt_full(x: &OpremaNumber, negate_result: bool) -> AluResult {
    let a = ingest(x, Transform::Identity);
    match a.special {
        Some(Special::Indeterminate) => return AluResult::plain(OpremaNumber::indeterminate()),
        Some(Special::Infinite) => return AluResult::plain(OpremaNumber::infinite()),
        Some(Special::Zero) => return AluResult::plain(OpremaNumber::zero()),
        None => {}
    }
    if a.sign.is_minus() {
        return AluResult::plain(OpremaNumber::indeterminate());
    }
    let mut frame = a.frame;
    let mut e = a.exponent;
    if e.rem_euclid(2) != 0 {
        frame = frame.shift_left1();
        e -= 1;
    }
    let mut trace = Vec::new();
    let digits = sqrt_digits(&frame, &mut trace);
    let mut result = normalize(&Significand9::from_digits(digits), e / 2, Sign::Plus);
    if negate_result {
        result.value = result.value.with_sign(Sign::Minus);
    }
    result
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpecialBinOp {
    Add,
    Sub,
    Mul,
    Div,
}

/// The special-value algebra, in the style reported for the Z4:
/// indeterminate absorbs everything; `∞ − ∞`, `0 · ∞`, `0/0` and `∞/∞` are
/// indeterminate; a finite value divided by zero is infinite; zero absorbs
/// multiplication and is the identity of addition. Returns `None` when both
/// operands are finite and no degenerate case applies.
pub fn special_combine(
    op: SpecialBinOp,
    a: &OpremaNumber,
    b: &OpremaNumber,
) -> Option<OpremaNumber> {
    use Special::*;
    let (sa, sb) = (a.special_kind(), b.special_kind());
    if sa == Some(Indeterminate) || sb == Some(Indeterminate) {
        return Some(OpremaNumber::indeterminate());
    }
    match op {
        SpecialBinOp::Add | SpecialBinOp::Sub => {
            // Subtraction routes through the sign transform of the addition
            // group; expressed here over the effective signs.
            let sign_b = if op == SpecialBinOp::Sub {
                b.sign().flip()
            } else {
                b.sign()
            };
            match (sa, sb) {
                (Some(Infinite), Some(Infinite)) => Some(if a.sign() == sign_b {
                    OpremaNumber::infinite()
                } else {
                    OpremaNumber::indeterminate()
                }),
                (Some(Infinite), _) | (_, Some(Infinite)) => Some(OpremaNumber::infinite()),
                (Some(Zero), Some(Zero)) => Some(OpremaNumber::zero()),
                (Some(Zero), None) => Some(b.with_sign(sign_b)),
                (None, Some(Zero)) => Some(*a),
                (None, None) => None,
                _ => unreachable!("indeterminate handled above"),
            }
        }
        SpecialBinOp::Mul => match (sa, sb) {
            (Some(Zero), Some(Infinite)) | (Some(Infinite), Some(Zero)) => {
                Some(OpremaNumber::indeterminate())
            }
            (Some(Zero), _) | (_, Some(Zero)) => Some(OpremaNumber::zero()),
            (Some(Infinite), _) | (_, Some(Infinite)) => Some(OpremaNumber::infinite()),
            (None, None) => None,
            _ => unreachable!("indeterminate handled above"),
        },
        SpecialBinOp::Div => match (sa, sb) {
            (Some(Zero), Some(Zero)) | (Some(Infinite), Some(Infinite)) => {
                Some(OpremaNumber::indeterminate())
            }
            (Some(Zero), _) => Some(OpremaNumber::zero()),
            (_, Some(Zero)) => Some(OpremaNumber::infinite()),
            (Some(Infinite), _) => Some(OpremaNumber::infinite()),
            (_, Some(Infinite)) => Some(OpremaNumber::zero()),
            (None, None) => None,
            _ => unreachable!("indeterminate handled above"),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::parse_decimal;

    fn num(text: &str) -> OpremaNumber {
        parse_decimal(text).unwrap()
    }

    fn frame(digits: [u8; 9]) -> Significand9 {
        Significand9::from_digits(digits)
    }

    #[test]
    fn round_norm_worked_examples() {
        let (r, d) = round_norm(&frame([1, 2, 2, 2, 2, 2, 2, 1, 9]));
        assert_eq!(r, frame([0, 1, 2, 2, 2, 2, 2, 2, 1]));
        assert_eq!(d, 1);
        let (r, _) = round_norm(&frame([1, 2, 2, 2, 2, 2, 2, 2, 1]));
        assert_eq!(r, frame([0, 1, 2, 2, 2, 2, 2, 2, 3]));
        // d8 = 0: pure shift
        let (r, _) = round_norm(&frame([1, 2, 2, 2, 2, 2, 2, 2, 0]));
        assert_eq!(r, frame([0, 1, 2, 2, 2, 2, 2, 2, 2]));
    }

    #[test]
    fn round_ties_away_ripples() {
        // add-5 form on 0 9999 9995: full ripple to d0
        let rounded = rta_drop_last(&frame([0, 9, 9, 9, 9, 9, 9, 9, 5]));
        assert_eq!(rounded, frame([1, 0, 0, 0, 0, 0, 0, 0, 0]));
        // below half truncates
        assert_eq!(
            round_ties_away(&frame([0, 1, 0, 0, 0, 0, 0, 0, 0]), &[4, 9, 9, 9]),
            frame([0, 1, 0, 0, 0, 0, 0, 0, 0])
        );
        // a tie rounds away
        assert_eq!(
            round_ties_away(&frame([0, 1, 0, 0, 0, 0, 0, 0, 0]), &[5, 0]),
            frame([0, 1, 0, 0, 0, 0, 0, 0, 1])
        );
    }

    #[test]
    fn align_examples() {
        let x = num("0.10000005e1");
        let y = num("0.10000000e2");
        let (fx, fy, e) = align(&x, &y);
        assert_eq!(fx, frame([0, 0, 1, 0, 0, 0, 0, 0, 1]));
        assert_eq!(fy, Significand9::from_number(&y));
        assert_eq!(e, 2);

        // Δe = 0 leaves both frames alone
        let (fx, fy, _) = align(&x, &x);
        assert_eq!(fx, fy);

        // Δe = 12 shifts the smaller operand fully out
        let small = num("0.99999999e-11");
        let big = num("0.10000000e1");
        let (fs, _, _) = align(&small, &big);
        assert_eq!(fs, Significand9::ZERO);
    }

    #[test]
    fn addition_examples() {
        // 5000 0000 + 6000 0000 = 1 1000 0000, normalized 0.11e2
        let a = num("0.5e1");
        let b = num("0.6e1");
        let (fa, fb, _) = align(&a, &b);
        assert_eq!(fa.add(&fb), frame([1, 1, 0, 0, 0, 0, 0, 0, 0]));
        assert_eq!(
            add_variant(&a, &b, Transform::Identity, Transform::Identity),
            num("0.11e2")
        );
        // x - x = zero
        let x = num("0.12345678e5");
        assert_eq!(
            add_variant(&x, &x, Transform::Identity, Transform::Negate),
            OpremaNumber::zero()
        );
        // |−3| + |−4| = 7
        assert_eq!(
            add_variant(&num("-3"), &num("-4"), Transform::Abs, Transform::Abs),
            num("7")
        );
        // +|3| + −|−4| = −1
        assert_eq!(
            add_variant(&num("3"), &num("-4"), Transform::Abs, Transform::NegAbs),
            num("-1")
        );
    }

    #[test]
    fn multiply_examples() {
        assert_eq!(multiply(&num("2"), &num("3")), num("6"));
        assert_eq!(multiply(&num("0.5"), &num("0.5")), num("0.25"));
        assert_eq!(
            multiply(&num("12"), &OpremaNumber::zero()),
            OpremaNumber::zero()
        );
        assert_eq!(
            multiply(&OpremaNumber::zero(), &OpremaNumber::infinite()),
            OpremaNumber::indeterminate()
        );
    }

    #[test]
    fn multiples_store_is_exact() {
        let s = frame([0, 2, 0, 1, 0, 0, 0, 0, 0]);
        let m = MultiplesStore::build(&s);
        for i in 1..=9u8 {
            assert_eq!(m.get(i).value(), i as u64 * s.value());
        }
        // documented example: 0.2010 × 4 = 0.8040
        assert_eq!(m.get(4), &frame([0, 8, 0, 4, 0, 0, 0, 0, 0]));
    }

    #[test]
    fn division_step_worked_example() {
        // s = 0 2010 0000, r = 0 8000 0000 -> i = 4, ma < 0, q = 3
        let s = frame([0, 2, 0, 1, 0, 0, 0, 0, 0]);
        let r = frame([0, 8, 0, 0, 0, 0, 0, 0, 0]);
        let multiples = MultiplesStore::build(&s);
        let step = quotient_digit_step(&r, &multiples);
        assert_eq!(step.candidate, 4);
        assert!(step.main_result.is_negative());
        assert_eq!(step.quotient_digit, 3);
        assert_eq!(step.rest_after, frame([0, 1, 9, 7, 0, 0, 0, 0, 0]));
    }

    #[test]
    fn divide_examples() {
        let x = num("0.12345678e3");
        assert_eq!(divide(&x, &x), num("1"));
        assert_eq!(divide(&num("1"), &num("3")), num("0.33333333"));
        assert_eq!(
            divide(&num("1"), &OpremaNumber::zero()),
            OpremaNumber::infinite()
        );
        assert_eq!(
            divide(&OpremaNumber::zero(), &OpremaNumber::zero()),
            OpremaNumber::indeterminate()
        );
    }

    #[test]
    fn sqrt_worked_example() {
        // √1225 = 35; pair 12 takes 3 subtractions, pair 25 (rest 325)
        // takes 5 (61, 63, 65, 67, 69).
        let mut trace = Vec::new();
        let digits = sqrt_digits(&frame([0, 1, 2, 2, 5, 0, 0, 0, 0]), &mut trace);
        assert_eq!(digits, [0, 3, 5, 0, 0, 0, 0, 0, 0]);
        assert_eq!(trace[1].subtractions, 3);
        assert_eq!(trace[2].subtractions, 5);
        assert_eq!(sqrt_op(&num("1225"), false), num("35"));
        assert_eq!(sqrt_op(&num("1225"), true), num("-35"));
    }

    #[test]
    fn sqrt_edge_cases() {
        assert_eq!(sqrt_op(&OpremaNumber::zero(), false), OpremaNumber::zero());
        assert_eq!(sqrt_op(&num("-4"), false), OpremaNumber::indeterminate());
        // odd exponent: shift left into d0 keeps every digit
        assert_eq!(sqrt_op(&num("4"), false), num("2"));
        assert_eq!(sqrt_op(&num("0.4e-1"), false), num("0.2"));
    }

    #[test]
    fn special_algebra() {
        let inf = OpremaNumber::infinite();
        let fin = num("2");
        assert_eq!(
            special_combine(SpecialBinOp::Sub, &inf, &inf),
            Some(OpremaNumber::indeterminate())
        );
        assert_eq!(
            special_combine(SpecialBinOp::Div, &fin, &OpremaNumber::zero()),
            Some(OpremaNumber::infinite())
        );
        assert_eq!(
            special_combine(SpecialBinOp::Mul, &OpremaNumber::indeterminate(), &fin),
            Some(OpremaNumber::indeterminate())
        );
        assert_eq!(special_combine(SpecialBinOp::Add, &fin, &fin), None);
        // zero is the identity of addition
        assert_eq!(
            special_combine(SpecialBinOp::Add, &OpremaNumber::zero(), &fin),
            Some(fin)
        );
    }

    #[test]
    fn exponent_overflow_folds_to_specials() {
        let big = num("0.9e15");
        let r = multiply_full(&big, &big);
        assert_eq!(r.value, OpremaNumber::infinite());
        assert!(r.status.exp_overflow);
        let tiny = num("0.1e-15");
        let r = multiply_full(&tiny, &tiny);
        assert_eq!(r.value, OpremaNumber::zero());
        assert!(r.status.exp_underflow);
    }

    #[test]
    fn normalize_examples() {
        let r = normalize(&frame([0, 0, 0, 0, 1, 2, 0, 0, 0]), 0, Sign::Plus);
        assert_eq!(r.value, num("0.12e-3"));
        let r = normalize(&Significand9::ZERO, 7, Sign::Minus);
        assert_eq!(r.value, OpremaNumber::zero());
        let r = normalize(&frame([1, 1, 0, 0, 0, 0, 0, 0, 0]), 1, Sign::Plus);
        assert_eq!(r.value, num("0.11e2"));
    }
}

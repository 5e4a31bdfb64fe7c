//! The machine's number format: eight decimal digits with sign and a signed
//! decimal exponent, packed into 39-bit plugboard rows using excess-3 tetrads.
//!
//! A finite value reads as `sign · 0.d1d2…d8 · 10^(±e)` with `0 <= e <= 15`
//! and, once normalized, `d1 > 0`. Zero has no normalized representation, so
//! it is carried as one of three special values (`zero`, `infinite`,
//! `indeterminate`) selected by bit 39 together with bits 36–38.
//!
//! Rows decoded from plugboards may be unnormalized (`d1 = 0`); they keep
//! that shape until they pass through the arithmetic unit, mirroring the
//! machine, which normalized numbers on the way into its internal registers.

use std::fmt;

use thiserror::Error;

/// Largest exponent magnitude the 4-bit exponent tetrad can hold.
pub const EXP_MAX: i32 = 15;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn flip(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }

    /// Sign of a product or quotient.
    pub fn xor(self, other: Sign) -> Sign {
        if self == other {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }

    pub fn is_minus(self) -> bool {
        self == Sign::Minus
    }

    fn as_char(self) -> char {
        match self {
            Sign::Plus => '+',
            Sign::Minus => '-',
        }
    }
}

/// The three non-normal encodings selected by bit 39.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Special {
    Zero,
    Infinite,
    Indeterminate,
}

impl Special {
    pub fn keyword(self) -> &'static str {
        match self {
            Special::Zero => "zero",
            Special::Infinite => "inf",
            Special::Indeterminate => "indet",
        }
    }
}

/// One machine number: sign, digits `d1..d8`, signed exponent, special flag.
///
/// Specials are canonical: all digits zero, both signs `+`, exponent 0.
/// Finite values built by [`OpremaNumber::finite`] may be unnormalized
/// (`d1 = 0`, as plugged rows can be); the arithmetic unit normalizes them
/// on use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct OpremaNumber {
    sig_sign: Sign,
    digits: [u8; 8],
    exp_sign: Sign,
    exponent: u8,
    special: Option<Special>,
}

impl OpremaNumber {
    /// A finite (possibly unnormalized) value `sign · 0.d1…d8 · 10^exp`.
    ///
    /// Panics if a digit exceeds 9 or `|exp| > 15`; all-zero digits are
    /// legal here and denote an unnormalized zero row.
    pub fn finite(sign: Sign, digits: [u8; 8], exp: i32) -> OpremaNumber {
        assert!(digits.iter().all(|&d| d <= 9), "digit out of range");
        assert!(exp.abs() <= EXP_MAX, "exponent out of range: {exp}");
        let (exp_sign, exponent) = if exp < 0 {
            (Sign::Minus, (-exp) as u8)
        } else {
            (Sign::Plus, exp as u8)
        };
        OpremaNumber {
            sig_sign: sign,
            digits,
            exp_sign,
            exponent,
            special: None,
        }
    }

    pub fn special(kind: Special) -> OpremaNumber {
        OpremaNumber {
            sig_sign: Sign::Plus,
            digits: [0; 8],
            exp_sign: Sign::Plus,
            exponent: 0,
            special: Some(kind),
        }
    }

    pub fn zero() -> OpremaNumber {
        OpremaNumber::special(Special::Zero)
    }

    pub fn infinite() -> OpremaNumber {
        OpremaNumber::special(Special::Infinite)
    }

    pub fn indeterminate() -> OpremaNumber {
        OpremaNumber::special(Special::Indeterminate)
    }

    pub fn special_kind(&self) -> Option<Special> {
        self.special
    }

    pub fn is_special(&self) -> bool {
        self.special.is_some()
    }

    pub fn is_zero(&self) -> bool {
        self.special == Some(Special::Zero)
    }

    pub fn is_finite(&self) -> bool {
        self.special.is_none()
    }

    pub fn sign(&self) -> Sign {
        self.sig_sign
    }

    pub fn digits(&self) -> &[u8; 8] {
        &self.digits
    }

    /// Signed exponent in `[-15, 15]`.
    pub fn exponent(&self) -> i32 {
        let e = self.exponent as i32;
        if self.exp_sign.is_minus() {
            -e
        } else {
            e
        }
    }

    /// Finite with `d1 > 0`, or a special.
    pub fn is_normalized(&self) -> bool {
        self.special.is_some() || self.digits[0] > 0
    }

    pub fn with_sign(mut self, sign: Sign) -> OpremaNumber {
        if self.special.is_none() {
            self.sig_sign = sign;
        }
        self
    }
}

/// One 39-bit plugboard row, bits numbered 1..=39.
///
/// Layout: bit 1 significand sign (set = minus), bits 2–33 the tetrads for
/// `d1..d8` in excess-3 (each tetrad most-significant bit first), bit 34
/// exponent sign, bits 35–38 the exponent in plain binary (bit 35 the
/// most-significant), bit 39 the special flag. With bit 39 set, exactly one
/// of bits 36/37/38 selects indeterminate/infinite/zero and every other bit
/// is clear.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Row39(u64);

impl Row39 {
    pub const ZERO: Row39 = Row39(0);
    const MASK: u64 = (1 << 39) - 1;

    pub fn from_bits(bits: u64) -> Row39 {
        assert!(bits <= Self::MASK, "more than 39 bits");
        Row39(bits)
    }

    pub fn bits(&self) -> u64 {
        self.0
    }

    pub fn bit(&self, i: u8) -> bool {
        assert!((1..=39).contains(&i));
        self.0 >> (i - 1) & 1 == 1
    }

    pub fn set_bit(&mut self, i: u8, value: bool) {
        assert!((1..=39).contains(&i));
        if value {
            self.0 |= 1 << (i - 1);
        } else {
            self.0 &= !(1 << (i - 1));
        }
    }

    pub fn flip_bit(&mut self, i: u8) {
        assert!((1..=39).contains(&i));
        self.0 ^= 1 << (i - 1);
    }

    /// Packs the row into 5 bytes, bit 1 as the least-significant bit of the
    /// first byte; the final (40th) bit is padding and stays zero.
    pub fn to_bytes(&self) -> [u8; 5] {
        let mut out = [0u8; 5];
        for (i, b) in out.iter_mut().enumerate() {
            *b = (self.0 >> (8 * i)) as u8;
        }
        out
    }

    /// Rejects a set padding bit so packed images stay byte-exact.
    pub fn from_bytes(bytes: [u8; 5]) -> Result<Row39, RowError> {
        let mut bits = 0u64;
        for (i, b) in bytes.iter().enumerate() {
            bits |= (*b as u64) << (8 * i);
        }
        if bits > Self::MASK {
            return Err(RowError::PaddingBitSet);
        }
        Ok(Row39(bits))
    }

    /// 10 hex characters, first packed byte first.
    pub fn hex(&self) -> String {
        self.to_bytes().iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RowError {
    #[error("tetrad {index} holds {value}, outside the excess-3 range 3..=12")]
    InvalidTetrad { index: u8, value: u8 },
    #[error("special row does not carry a valid one-hot selector in bits 36-38")]
    InvalidSpecial,
    #[error("padding bit beyond bit 39 is set")]
    PaddingBitSet,
}

const TETRAD_FIRST_BIT: [u8; 8] = [2, 6, 10, 14, 18, 22, 26, 30];

/// Encodes a number into its 39-bit row. Inverse of [`decode_row`].
pub fn encode_row(n: &OpremaNumber) -> Row39 {
    let mut row = Row39::ZERO;
    if let Some(kind) = n.special_kind() {
        row.set_bit(39, true);
        let selector = match kind {
            Special::Zero => 38,
            Special::Infinite => 37,
            Special::Indeterminate => 36,
        };
        row.set_bit(selector, true);
        return row;
    }
    row.set_bit(1, n.sig_sign.is_minus());
    for (i, &d) in n.digits.iter().enumerate() {
        let tetrad = d + 3;
        let first = TETRAD_FIRST_BIT[i];
        for k in 0u8..4 {
            row.set_bit(first + k, tetrad >> (3 - k) & 1 == 1);
        }
    }
    row.set_bit(34, n.exp_sign.is_minus());
    for k in 0u8..4 {
        row.set_bit(35 + k, n.exponent >> (3 - k) & 1 == 1);
    }
    row
}

/// Decodes a row without normalizing; `d1` may come back zero when the
/// number was plugged unnormalized.
pub fn decode_row(row: Row39) -> Result<OpremaNumber, RowError> {
    if row.bit(39) {
        let selector = (row.bit(36), row.bit(37), row.bit(38));
        let kind = match selector {
            (false, false, true) => Special::Zero,
            (false, true, false) => Special::Infinite,
            (true, false, false) => Special::Indeterminate,
            _ => return Err(RowError::InvalidSpecial),
        };
        // Everything outside the selector must be unplugged.
        let expected = encode_row(&OpremaNumber::special(kind));
        if row != expected {
            return Err(RowError::InvalidSpecial);
        }
        return Ok(OpremaNumber::special(kind));
    }
    let mut digits = [0u8; 8];
    for (i, d) in digits.iter_mut().enumerate() {
        let first = TETRAD_FIRST_BIT[i];
        let mut tetrad = 0u8;
        for k in 0u8..4 {
            tetrad = tetrad << 1 | row.bit(first + k) as u8;
        }
        if !(3..=12).contains(&tetrad) {
            return Err(RowError::InvalidTetrad {
                index: i as u8 + 1,
                value: tetrad,
            });
        }
        *d = tetrad - 3;
    }
    let mut exponent = 0u8;
    for k in 0u8..4 {
        exponent = exponent << 1 | row.bit(35 + k) as u8;
    }
    let sig_sign = if row.bit(1) { Sign::Minus } else { Sign::Plus };
    // Exponent sign is canonicalized: a minus plug on exponent 0 decodes
    // to plain +0.
    let exp = if row.bit(34) {
        -(exponent as i32)
    } else {
        exponent as i32
    };
    Ok(OpremaNumber::finite(sig_sign, digits, exp))
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("invalid number syntax: {0}")]
    Syntax(String),
    #[error("value outside the representable exponent range -15..=15")]
    ExponentOverflow,
}

/// Parses decimal text (`[+-]?digits[.digits]?[eE[+-]?int]?` or one of the
/// keywords `zero`/`inf`/`indet`) into the machine format, normalized.
/// Excess significant digits are folded in with the normalization-stage
/// rounding rule.
pub fn parse_decimal(text: &str) -> Result<OpremaNumber, ParseError> {
    let t = text.trim();
    match t.to_ascii_lowercase().as_str() {
        "zero" => return Ok(OpremaNumber::zero()),
        "inf" => return Ok(OpremaNumber::infinite()),
        "indet" => return Ok(OpremaNumber::indeterminate()),
        _ => {}
    }
    let bad = || ParseError::Syntax(text.to_string());
    let mut chars = t.chars().peekable();
    let sign = match chars.peek() {
        Some('+') => {
            chars.next();
            Sign::Plus
        }
        Some('-') => {
            chars.next();
            Sign::Minus
        }
        _ => Sign::Plus,
    };
    let mut int_part = String::new();
    let mut frac_part = String::new();
    while let Some(c) = chars.peek() {
        if c.is_ascii_digit() {
            int_part.push(*c);
            chars.next();
        } else {
            break;
        }
    }
    if chars.peek() == Some(&'.') {
        chars.next();
        while let Some(c) = chars.peek() {
            if c.is_ascii_digit() {
                frac_part.push(*c);
                chars.next();
            } else {
                break;
            }
        }
    }
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    let mut exp_part: i64 = 0;
    if matches!(chars.peek(), Some('e') | Some('E')) {
        chars.next();
        let mut exp_str = String::new();
        if matches!(chars.peek(), Some('+') | Some('-')) {
            exp_str.push(chars.next().unwrap());
        }
        while let Some(c) = chars.peek() {
            if c.is_ascii_digit() {
                exp_str.push(*c);
                chars.next();
            } else {
                break;
            }
        }
        if exp_str.is_empty() || exp_str == "+" || exp_str == "-" {
            return Err(bad());
        }
        exp_part = exp_str.parse::<i64>().map_err(|_| bad())?;
    }
    if chars.next().is_some() {
        return Err(bad());
    }

    // All digits, radix point after int_part. Value = 0.D · 10^(len(int)+exp).
    let all: Vec<u8> = int_part
        .bytes()
        .chain(frac_part.bytes())
        .map(|b| b - b'0')
        .collect();
    let Some(first_sig) = all.iter().position(|&d| d != 0) else {
        return Ok(OpremaNumber::zero());
    };
    let e10 = int_part.len() as i64 - first_sig as i64 + exp_part;
    if !(-(EXP_MAX as i64)..=EXP_MAX as i64).contains(&e10) {
        return Err(ParseError::ExponentOverflow);
    }
    // Nine leading significant digits feed the normalization rounding; any
    // further digits are beyond what the adder frame ever saw.
    let mut frame = [0u8; 9];
    for (slot, &d) in frame.iter_mut().zip(all[first_sig..].iter()) {
        *slot = d;
    }
    let out = crate::alu::normalize(
        &crate::alu::Significand9::from_digits(frame),
        e10 as i32 - 1,
        sign,
    );
    if out.status.exp_overflow || out.status.exp_underflow {
        return Err(ParseError::ExponentOverflow);
    }
    Ok(out.value)
}

/// Parses decimal text preserving the written digit alignment, the way a
/// number was plugged: leading zeros stay in the digit frame (an
/// unnormalized row) as long as the eight digits and the exponent range
/// allow. More than eight significant digits fall back to the normalizing
/// parse.
pub fn parse_plugged(text: &str) -> Result<OpremaNumber, ParseError> {
    let normalized = parse_decimal(text)?;
    if !normalized.is_finite() {
        return Ok(normalized);
    }
    // Count the leading zeros the text wrote between the radix point and
    // the first significant digit, then put back as many as fit.
    let t = text.trim();
    let body = t.trim_start_matches(['+', '-']);
    let digits_part: String = body
        .chars()
        .take_while(|c| c.is_ascii_digit() || *c == '.')
        .filter(|c| c.is_ascii_digit())
        .collect();
    let int_len = body.chars().take_while(|c| c.is_ascii_digit()).count() as i64;
    let first_sig = digits_part.bytes().position(|b| b != b'0').unwrap_or(0) as i64;
    let written_leading_zeros = (first_sig - int_len).max(0);

    let sig_count = normalized
        .digits()
        .iter()
        .rposition(|&d| d != 0)
        .map(|p| p + 1)
        .unwrap_or(0) as i64;
    let room = 8 - sig_count;
    let mut zeros = written_leading_zeros.min(room);
    // keep the exponent representable
    zeros = zeros.min(EXP_MAX as i64 - normalized.exponent() as i64);
    if zeros <= 0 {
        return Ok(normalized);
    }
    let mut digits = [0u8; 8];
    for (i, &d) in normalized.digits().iter().enumerate() {
        if (i as i64) + zeros < 8 {
            digits[i + zeros as usize] = d;
        }
    }
    Ok(OpremaNumber::finite(
        normalized.sign(),
        digits,
        normalized.exponent() + zeros as i32,
    ))
}

/// Canonical text: `±0.dddddddd e ±ee` or the special keyword.
/// `parse_decimal` of the output is the identity.
pub fn format_number(n: &OpremaNumber) -> String {
    if let Some(kind) = n.special_kind() {
        return kind.keyword().to_string();
    }
    let digits: String = n.digits.iter().map(|d| (d + b'0') as char).collect();
    format!(
        "{}0.{}e{}{:02}",
        n.sig_sign.as_char(),
        digits,
        n.exp_sign.as_char(),
        n.exponent
    )
}

impl fmt::Display for OpremaNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_number(self))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn num(text: &str) -> OpremaNumber {
        parse_decimal(text).unwrap()
    }

    #[test]
    fn tetrad_boundaries() {
        // digit 0 -> 0011, digit 9 -> 1100
        let n = OpremaNumber::finite(Sign::Plus, [9, 0, 0, 0, 0, 0, 0, 0], 0);
        let row = encode_row(&n);
        // d1 occupies bits 2..=5, most-significant bit first.
        assert_eq!(
            (row.bit(2), row.bit(3), row.bit(4), row.bit(5)),
            (true, true, false, false)
        );
        // d2 = 0 -> 0011
        assert_eq!(
            (row.bit(6), row.bit(7), row.bit(8), row.bit(9)),
            (false, false, true, true)
        );
    }

    #[test]
    fn special_rows_match_table() {
        let zero = encode_row(&OpremaNumber::zero());
        assert!(zero.bit(38) && zero.bit(39));
        assert_eq!(zero.bits().count_ones(), 2);

        let inf = encode_row(&OpremaNumber::infinite());
        assert!(inf.bit(37) && inf.bit(39));

        let indet = encode_row(&OpremaNumber::indeterminate());
        assert!(indet.bit(36) && indet.bit(39));

        let mut r = Row39::ZERO;
        r.set_bit(37, true);
        r.set_bit(39, true);
        assert_eq!(decode_row(r).unwrap(), OpremaNumber::infinite());
    }

    #[test]
    fn worked_row_example() {
        // +0.12250000 · 10^4
        let n = num("1225");
        assert_eq!(n.digits(), &[1, 2, 2, 5, 0, 0, 0, 0]);
        assert_eq!(n.exponent(), 4);
        let row = encode_row(&n);
        assert!(!row.bit(1));
        assert!(!row.bit(34));
        // exponent 4 = 0100 over bits 35..38
        assert_eq!(
            (row.bit(35), row.bit(36), row.bit(37), row.bit(38)),
            (false, true, false, false)
        );
        assert!(!row.bit(39));
        assert_eq!(decode_row(row).unwrap(), n);
    }

    #[test]
    fn all_zero_tetrad_is_invalid() {
        // A fully unplugged row fails digit decoding (0000 < 3).
        assert_eq!(
            decode_row(Row39::ZERO),
            Err(RowError::InvalidTetrad { index: 1, value: 0 })
        );
    }

    #[test]
    fn invalid_special_selector() {
        let mut r = Row39::ZERO;
        r.set_bit(39, true);
        assert_eq!(decode_row(r), Err(RowError::InvalidSpecial));
        r.set_bit(36, true);
        r.set_bit(37, true);
        assert_eq!(decode_row(r), Err(RowError::InvalidSpecial));
    }

    #[test]
    fn unnormalized_rows_decode() {
        let n = OpremaNumber::finite(Sign::Plus, [0, 3, 0, 0, 0, 0, 0, 0], 2);
        let back = decode_row(encode_row(&n)).unwrap();
        assert_eq!(back, n);
        assert!(!back.is_normalized());
    }

    #[test]
    fn parse_examples() {
        assert_eq!(format_number(&num("1225")), "+0.12250000e+04");
        assert_eq!(num("0"), OpremaNumber::zero());
        assert_eq!(num("0.000e5"), OpremaNumber::zero());
        assert_eq!(format_number(&num("-0.5e-3")), "-0.50000000e-03");
        assert_eq!(format_number(&num("-0.10000000e-15")), "-0.10000000e-15");
        assert_eq!(num("zero"), OpremaNumber::zero());
        assert_eq!(num("inf"), OpremaNumber::infinite());
        assert_eq!(num("indet"), OpremaNumber::indeterminate());
        assert!(parse_decimal("1e99").is_err());
        assert!(parse_decimal("1e-99").is_err());
        assert!(parse_decimal("abc").is_err());
        assert!(parse_decimal("1.2.3").is_err());
        assert!(parse_decimal("").is_err());
    }

    #[test]
    fn parse_rounds_ninth_digit_with_round_norm() {
        // 0.123456789 -> frame 123456789, d8=9 nonzero, d7=8 even -> bump
        assert_eq!(format_number(&num("0.123456789")), "+0.12345679e+00");
        // d7 odd -> drop
        assert_eq!(format_number(&num("0.123456719")), "+0.12345671e+00");
    }

    #[test]
    fn plugged_parse_preserves_written_alignment() {
        let n = parse_plugged("0.0125e2").unwrap();
        assert_eq!(n.digits(), &[0, 1, 2, 5, 0, 0, 0, 0]);
        assert_eq!(n.exponent(), 2);
        assert!(!n.is_normalized());
        // format -> parse_plugged is the identity on unnormalized rows
        assert_eq!(parse_plugged(&format_number(&n)).unwrap(), n);
        // no room for the zeros: falls back to the normalized form
        let m = parse_plugged("0.012345678").unwrap();
        assert_eq!(m, parse_decimal("0.012345678").unwrap());
        // exponent cap limits the padding
        let e = parse_plugged("0.0125e16").unwrap();
        assert_eq!(e, parse_decimal("0.0125e16").unwrap());
        assert_eq!(parse_plugged("zero").unwrap(), OpremaNumber::zero());
    }

    #[test]
    fn format_parse_round_trip_boundaries() {
        for d1 in 1..=9u8 {
            for e in [-15i32, 0, 15] {
                let n = OpremaNumber::finite(Sign::Minus, [d1, 0, 4, 0, 0, 0, 0, 7], e);
                assert_eq!(parse_decimal(&format_number(&n)).unwrap(), n);
            }
        }
    }

    #[test]
    fn row_byte_packing() {
        let n = num("1225");
        let row = encode_row(&n);
        let bytes = row.to_bytes();
        assert_eq!(Row39::from_bytes(bytes).unwrap(), row);
        // bit 1 is the LSB of the first byte
        let mut r = Row39::ZERO;
        r.set_bit(1, true);
        assert_eq!(r.to_bytes()[0], 1);
        // padding bit must stay clear
        let mut bad = row.to_bytes();
        bad[4] |= 0x80;
        assert_eq!(Row39::from_bytes(bad), Err(RowError::PaddingBitSet));
    }
}

//! LEB128-style VarInt and zigzag mapping.

use crate::error::{Error, Result};

/// Longest valid encoding of a `u64`.
pub const MAX_VARINT_LEN: usize = 10;

/// Number of bytes [`encode`] emits for `value`.
#[inline]
pub fn encoded_len(value: u64) -> usize {
    let bits = 64 - value.leading_zeros() as usize;
    bits.div_ceil(7).max(1)
}

/// Appends `value` as little-endian base-128 groups; every byte but the last
/// has its continuation bit (0x80) set.
#[inline]
pub fn encode(mut value: u64, out: &mut Vec<u8>) {
    while value >= 0x80 {
        out.push((value as u8) | 0x80);
        value >>= 7;
    }
    out.push(value as u8);
}

pub fn encode_to_vec(value: u64) -> Vec<u8> {
    let mut out = Vec::with_capacity(encoded_len(value));
    encode(value, &mut out);
    out
}

/// Decodes one VarInt from the start of `bytes`, returning the value and the
/// number of bytes consumed.
#[inline]
pub fn decode(bytes: &[u8]) -> Result<(u64, usize)> {
    decode_at(bytes, 0).map(|(v, end)| (v, end))
}

/// Decodes one VarInt starting at `pos`; returns the value and the position
/// just past it. Errors carry the absolute byte offset of the bad VarInt.
#[inline]
pub fn decode_at(bytes: &[u8], pos: usize) -> Result<(u64, usize)> {
    let mut value = 0u64;
    let mut shift = 0u32;
    let mut i = pos;
    loop {
        let Some(&byte) = bytes.get(i) else {
            return Err(Error::MalformedEncoding { offset: pos, reason: "truncated varint" });
        };
        i += 1;
        let payload = (byte & 0x7f) as u64;
        if shift == 63 && payload > 1 {
            return Err(Error::MalformedEncoding { offset: pos, reason: "varint overflows 64 bits" });
        }
        value |= payload << shift;
        if byte & 0x80 == 0 {
            return Ok((value, i));
        }
        shift += 7;
        if i - pos >= MAX_VARINT_LEN {
            return Err(Error::MalformedEncoding { offset: pos, reason: "varint longer than 10 bytes" });
        }
    }
}

#[inline]
pub fn zigzag(value: i64) -> u64 {
    ((value << 1) ^ (value >> 63)) as u64
}

#[inline]
pub fn unzigzag(value: u64) -> i64 {
    ((value >> 1) as i64) ^ -((value & 1) as i64)
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    use super::*;

    #[test]
    fn encode_examples() {
        assert_eq!(encode_to_vec(0), vec![0x00]);
        assert_eq!(encode_to_vec(127), vec![0x7f]);
        assert_eq!(encode_to_vec(128), vec![0x80, 0x01]);
        assert_eq!(encode_to_vec(u64::MAX).len(), MAX_VARINT_LEN);
    }

    #[test]
    fn decode_examples() {
        assert_eq!(decode(&[0x00]).unwrap(), (0, 1));
        assert_eq!(decode(&[0x80, 0x01]).unwrap(), (128, 2));
        assert_eq!(decode(&[0x7f, 0xff]).unwrap(), (127, 1));
    }

    #[test]
    fn overlong_and_truncated_inputs_are_rejected() {
        let overlong = [0x80u8; 11];
        assert!(matches!(decode(&overlong), Err(Error::MalformedEncoding { offset: 0, .. })));
        assert!(matches!(decode(&[0x80, 0x80]), Err(Error::MalformedEncoding { .. })));
        assert!(decode(&[]).is_err());
        let mut too_big = vec![0xff; 9];
        too_big.push(0x02);
        assert!(decode(&too_big).is_err());
    }

    #[test]
    fn zigzag_examples() {
        assert_eq!(zigzag(0), 0);
        assert_eq!(zigzag(-1), 1);
        assert_eq!(zigzag(3), 6);
        assert_eq!(zigzag(i64::MIN), u64::MAX);
        assert_eq!(unzigzag(1), -1);
    }

    #[test]
    fn million_random_roundtrips() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        let mut buf = Vec::new();
        for _ in 0..1_000_000 {
            // Spread over all byte lengths, not just huge values.
            let bits = rng.gen_range(0..=64);
            let v: u64 = if bits == 0 { 0 } else { rng.gen::<u64>() >> (64 - bits) };
            buf.clear();
            encode(v, &mut buf);
            assert_eq!(buf.len(), encoded_len(v));
            assert_eq!(decode(&buf).unwrap(), (v, buf.len()));
        }
    }

    proptest! {
        #[test]
        fn zigzag_is_a_bijection(v: i64) {
            prop_assert_eq!(unzigzag(zigzag(v)), v);
        }

        #[test]
        fn encoding_is_minimal(v: u64) {
            let bytes = encode_to_vec(v);
            prop_assert!(bytes.last().unwrap() & 0x80 == 0);
            prop_assert!(bytes.len() == 1 || *bytes.last().unwrap() != 0);
        }
    }
}

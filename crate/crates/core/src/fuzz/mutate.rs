//! Byte-level mutation operators: the deterministic stage and havoc.
//!
//! Bits are numbered from the least significant bit of byte 0, and every
//! multi-byte word is little-endian, matching how inputs are decoded.

use rand::Rng;

pub const ARITH_MAX: u32 = 35;
pub const HAVOC_MIN_STACK: u32 = 2;
pub const HAVOC_MAX_STACK: u32 = 128;

/// `{0, 1, -1, max, min, 16, 32, 64, 100}` for a word of `width` bytes.
pub fn interesting_values(width: usize) -> [u32; 9] {
    let bits = 8 * width as u32;
    let mask = if bits == 32 { u32::MAX } else { (1u32 << bits) - 1 };
    let smin = 1u32 << (bits - 1);
    [0, 1, mask, smin - 1, smin, 16, 32, 64, 100]
}

pub fn flip_bits(bytes: &mut [u8], first_bit: usize, count: usize) {
    for bit in first_bit..(first_bit + count).min(bytes.len() * 8) {
        bytes[bit / 8] ^= 1 << (bit % 8);
    }
}

pub fn flip_byte(bytes: &mut [u8], at: usize) {
    bytes[at] ^= 0xFF;
}

fn read_word(bytes: &[u8], at: usize, width: usize) -> u32 {
    (0..width).fold(0, |v, i| v | (bytes[at + i] as u32) << (8 * i))
}

fn write_word(bytes: &mut [u8], at: usize, width: usize, v: u32) {
    for i in 0..width {
        bytes[at + i] = (v >> (8 * i)) as u8;
    }
}

/// Adds `delta` (possibly negative) to the little-endian word at `at`, wrapping.
pub fn add_to_word(bytes: &mut [u8], at: usize, width: usize, delta: i32) {
    let v = read_word(bytes, at, width).wrapping_add(delta as u32);
    write_word(bytes, at, width, v);
}

pub fn set_word(bytes: &mut [u8], at: usize, width: usize, v: u32) {
    write_word(bytes, at, width, v);
}

/// All mutants of the deterministic stage, in order: walking 1-, 2- and
/// 4-bit flips, byte flips, arithmetic on 1/2/4-byte words, interesting values.
pub fn deterministic_stage(seed: &[u8]) -> Vec<Vec<u8>> {
    let len = seed.len();
    let mut out = Vec::new();
    let mut push = |f: &dyn Fn(&mut Vec<u8>)| {
        let mut m = seed.to_vec();
        f(&mut m);
        out.push(m);
    };
    for count in [1, 2, 4] {
        for bit in 0..(len * 8).saturating_sub(count - 1) {
            push(&|m| flip_bits(m, bit, count));
        }
    }
    for at in 0..len {
        push(&|m| flip_byte(m, at));
    }
    for width in [1, 2, 4] {
        for at in 0..(len + 1).saturating_sub(width) {
            for d in 1..=ARITH_MAX as i32 {
                push(&|m| add_to_word(m, at, width, d));
                push(&|m| add_to_word(m, at, width, -d));
            }
        }
    }
    for width in [1, 2, 4] {
        for at in 0..(len + 1).saturating_sub(width) {
            for v in interesting_values(width) {
                push(&|m| set_word(m, at, width, v));
            }
        }
    }
    out
}

/// One random operator from the deterministic set, at a random position.
pub fn random_op<R: Rng>(rng: &mut R, bytes: &mut [u8]) {
    let len = bytes.len();
    if len == 0 {
        return;
    }
    let width_for = |w: usize| if len >= w { w } else { 1 };
    match rng.gen_range(0..10) {
        op @ 0..=2 => {
            let count = 1 << op;
            let bit = rng.gen_range(0..(len * 8).saturating_sub(count - 1).max(1));
            flip_bits(bytes, bit, count);
        }
        3 => flip_byte(bytes, rng.gen_range(0..len)),
        op @ 4..=6 => {
            let width = width_for(1 << (op - 4));
            let at = rng.gen_range(0..=len - width);
            let d = rng.gen_range(1..=ARITH_MAX as i32);
            add_to_word(bytes, at, width, if rng.gen_bool(0.5) { d } else { -d });
        }
        op => {
            let width = width_for(1 << (op - 7));
            let at = rng.gen_range(0..=len - width);
            let values = interesting_values(width);
            set_word(bytes, at, width, values[rng.gen_range(0..values.len())]);
        }
    }
}

/// Stacks a power-of-two number of random operators, 2 to 128.
pub fn havoc<R: Rng>(rng: &mut R, seed: &[u8]) -> Vec<u8> {
    let mut out = seed.to_vec();
    let stack = 1u32 << rng.gen_range(1..=7);
    debug_assert!((HAVOC_MIN_STACK..=HAVOC_MAX_STACK).contains(&stack));
    for _ in 0..stack {
        random_op(rng, &mut out);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_bit_flip() {
        let mut b = [0u8];
        flip_bits(&mut b, 0, 1);
        assert_eq!(b, [0x01]);
    }

    #[test]
    fn arithmetic_carries_across_bytes() {
        let mut b = [0xFF, 0x00];
        add_to_word(&mut b, 0, 2, 1);
        assert_eq!(b, [0x00, 0x01]);
        add_to_word(&mut b, 0, 2, -1);
        assert_eq!(b, [0xFF, 0x00]);
    }

    #[test]
    fn interesting_sets_per_width() {
        assert_eq!(interesting_values(1), [0, 1, 0xFF, 0x7F, 0x80, 16, 32, 64, 100]);
        assert_eq!(interesting_values(4)[2..5], [u32::MAX, 0x7FFF_FFFF, 0x8000_0000]);
    }

    #[test]
    fn deterministic_stage_size_for_two_bytes() {
        // 16 + 15 + 13 flips, 2 byte flips, 70 × (2 + 1) arith, 9 × (2 + 1) interesting.
        assert_eq!(deterministic_stage(&[0, 0]).len(), 44 + 2 + 210 + 27);
        assert!(deterministic_stage(&[]).is_empty());
    }

    #[test]
    fn havoc_preserves_length() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        for len in 0..6 {
            let seed = vec![0xA5; len];
            for _ in 0..50 {
                assert_eq!(havoc(&mut rng, &seed).len(), len);
            }
        }
    }
}

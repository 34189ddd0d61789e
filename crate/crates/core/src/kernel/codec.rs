//! Cantor pairing and the finite-set codec.
//!
//! `pair(x, y) = (x + y)(x + y + 1)/2 + y`. Finite sets are coded as
//! `pair(len, tuple)` where `tuple` right-nests the strictly increasing listing
//! (`tuple() = 0`, `tuple(a) = a`, `tuple(a, rest..) = pair(a, tuple(rest..))`).

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};

use super::Nat;

pub fn pair(x: &Nat, y: &Nat) -> Nat {
    let s = x + y;
    let t = &s * (&s + 1u32);
    (t >> 1) + y
}

pub fn pair_u64(x: u64, y: u64) -> Nat {
    pair(&Nat::from(x), &Nat::from(y))
}

pub fn unpair(z: &Nat) -> (Nat, Nat) {
    // w = floor((sqrt(8z + 1) - 1) / 2)
    let disc: BigUint = (z << 3u32) + 1u32;
    let w: Nat = (disc.sqrt() - 1u32) >> 1u32;
    let t: Nat = (&w * (&w + 1u32)) >> 1u32;
    let y = z - &t;
    let x = &w - &y;
    (x, y)
}

pub fn left(z: &Nat) -> Nat {
    unpair(z).0
}

pub fn right(z: &Nat) -> Nat {
    unpair(z).1
}

/// Encodes a finite set; the input is sorted and deduplicated first.
pub fn encode_set<I>(elems: I) -> Nat
where
    I: IntoIterator<Item = Nat>,
{
    let mut v: Vec<Nat> = elems.into_iter().collect();
    v.sort();
    v.dedup();
    let len = Nat::from(v.len());
    let mut tuple = Nat::zero();
    for (i, a) in v.iter().enumerate().rev() {
        tuple = if i == v.len() - 1 { a.clone() } else { pair(a, &tuple) };
    }
    pair(&len, &tuple)
}

pub fn encode_set_u64(elems: &[u64]) -> Nat {
    encode_set(elems.iter().map(|&a| Nat::from(a)))
}

/// Decodes any natural to a finite set. Non-canonical codes (unsorted or
/// repeated listings) normalize by sorting and deduplicating.
pub fn decode_set(code: &Nat) -> Vec<Nat> {
    let (len, mut tuple) = unpair(code);
    let len = len.to_usize().unwrap_or(usize::MAX);
    let mut out = Vec::new();
    if len == 0 {
        return out;
    }
    // A code can only carry as many elements as it has bits; bail out early on
    // absurd lengths instead of looping forever on zeros.
    let cap = (code.bits() as usize).saturating_add(1);
    let len = len.min(cap);
    for i in 0..len {
        if i == len - 1 {
            out.push(tuple.clone());
        } else {
            let (a, rest) = unpair(&tuple);
            out.push(a);
            tuple = rest;
        }
    }
    out.sort();
    out.dedup();
    out
}

/// True when `code` is exactly the code of its decoded set.
pub fn is_canonical_set(code: &Nat) -> bool {
    encode_set(decode_set(code)) == *code
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairing_base_values() {
        assert_eq!(pair_u64(0, 0), Nat::from(0u32));
        assert_eq!(pair_u64(1, 1), Nat::from(4u32));
        assert_eq!(unpair(&Nat::from(4u32)), (Nat::from(1u32), Nat::from(1u32)));
        assert_eq!(pair_u64(0, 1), Nat::from(2u32));
        assert_eq!(pair_u64(3, 4), Nat::from(32u32));
    }

    #[test]
    fn set_round_trip() {
        let c = encode_set_u64(&[0, 2, 5]);
        assert_eq!(c, Nat::from(179_097u32));
        assert_eq!(decode_set(&c), vec![Nat::from(0u32), Nat::from(2u32), Nat::from(5u32)]);
        assert_eq!(encode_set_u64(&[]), Nat::from(0u32));
        assert_eq!(encode_set_u64(&[0]), Nat::from(1u32));
    }

    #[test]
    fn non_canonical_set_codes_normalize() {
        // listing (5, 2) is not increasing
        let raw = pair(&Nat::from(2u32), &pair_u64(5, 2));
        let s = decode_set(&raw);
        assert_eq!(s, vec![Nat::from(2u32), Nat::from(5u32)]);
        assert!(!is_canonical_set(&raw));
        // repeated element
        let rep = pair(&Nat::from(2u32), &pair_u64(3, 3));
        assert_eq!(decode_set(&rep), vec![Nat::from(3u32)]);
    }
}

//! Programs, Gödel numbering, fuel-bounded evaluation and the coding toolkit
//! (pairing, finite sets, s-m-n, padding, fixed points, κ gadgets).

pub mod asm;
pub mod codec;
pub mod gadgets;
pub mod machine;
pub mod program;

use serde::{Deserialize, Serialize};

pub use codec::{decode_set, encode_set, encode_set_u64, left, pair, pair_u64, right, unpair};
pub use gadgets::{
    builtin_indices, conjugate_v, constant, fixpoint, inverse_kappa_avoiding, pad, pad_by, quine_maker, shift_kappa, smn,
    Builtins,
};
pub use machine::{eval, iter_eval, EvalOutcome, Machine};
pub use program::{Instr, Program, ProgramIndex, Reg};

pub type Nat = num_bigint::BigUint;

/// Resource bounds for a computation: `stage` counts dovetailing rounds,
/// `fuel` caps interpreter steps per evaluation, `universe` caps the elements
/// examined.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Budget {
    pub stage: u64,
    pub fuel: u64,
    pub universe: u64,
}

impl Budget {
    pub const fn new(stage: u64, fuel: u64, universe: u64) -> Self {
        Budget { stage, fuel, universe }
    }

    pub fn with_fuel(self, fuel: u64) -> Self {
        Budget { fuel, ..self }
    }

    pub fn with_stage(self, stage: u64) -> Self {
        Budget { stage, ..self }
    }

    pub fn with_universe(self, universe: u64) -> Self {
        Budget { universe, ..self }
    }

    /// Componentwise order.
    pub fn le(&self, other: &Budget) -> bool {
        self.stage <= other.stage && self.fuel <= other.fuel && self.universe <= other.universe
    }

    /// Effective dovetail horizon for enumerating a c.e. object: element `z`
    /// shows up once `max(z, steps) <= min(stage, fuel)`.
    pub fn horizon(&self) -> u64 {
        self.stage.min(self.fuel)
    }

    /// Parses `S,F,N`.
    pub fn parse(s: &str) -> Option<Budget> {
        let parts: Vec<u64> = s
            .split(',')
            .map(|p| p.trim().parse().ok())
            .collect::<Option<_>>()?;
        match parts[..] {
            [stage, fuel, universe] => Some(Budget { stage, fuel, universe }),
            _ => None,
        }
    }
}

impl Default for Budget {
    fn default() -> Self {
        Budget::new(200, 200, 64)
    }
}

impl std::fmt::Display for Budget {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{},{},{}", self.stage, self.fuel, self.universe)
    }
}

/// Serializes naturals as decimal strings; also accepts JSON integers.
pub mod nat_serde {
    use super::Nat;
    use serde::de::{self, Visitor};
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(n: &Nat, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&n.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Nat, D::Error> {
        struct V;
        impl<'de> Visitor<'de> for V {
            type Value = Nat;
            fn expecting(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
                f.write_str("a natural number or decimal string")
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Nat, E> {
                Ok(Nat::from(v))
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Nat, E> {
                u64::try_from(v)
                    .map(Nat::from)
                    .map_err(|_| E::custom("negative number"))
            }
            fn visit_str<E: de::Error>(self, v: &str) -> Result<Nat, E> {
                v.parse().map_err(|_| E::custom(format!("not a natural: {v:?}")))
            }
        }
        d.deserialize_any(V)
    }
}

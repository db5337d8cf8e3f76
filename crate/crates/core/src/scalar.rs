//! Scalars: arbitrary-precision rationals and prime fields.
//!
//! All linear algebra in the crate is generic over a [`Field`] context object
//! (the pattern used by most exact-algebra crates: the context carries the
//! modulus, elements are plain data). Two fields are provided: [`Rationals`]
//! with element type [`Rat`] and [`PrimeField`] with `u64` residues.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::fmt;
use std::hash::Hash;

/// Exact rational scalar used for grid coordinates, slopes and integrals.
pub type Rat = BigRational;

/// `a / b` as an exact rational. Panics if `b == 0`.
pub fn rat(a: i64, b: i64) -> Rat {
    Rat::new(BigInt::from(a), BigInt::from(b))
}

/// An integer as an exact rational.
pub fn rat_int(a: i64) -> Rat {
    Rat::from_integer(BigInt::from(a))
}

/// Largest integer `<= r`, as a `Rat`.
pub fn rat_floor(r: &Rat) -> Rat {
    r.floor()
}

/// Smallest integer `>= r`, as a `Rat`.
pub fn rat_ceil(r: &Rat) -> Rat {
    r.ceil()
}

/// `floor(r)` as an `i64`; errors if it does not fit.
pub fn rat_floor_i64(r: &Rat) -> crate::Result<i64> {
    r.floor()
        .to_integer()
        .to_i64()
        .ok_or_else(|| crate::Error::InvalidArgument {
            op: "rat_floor_i64",
            detail: format!("{r} is out of the supported integer range"),
        })
}

/// Field of scalars, passed around as a context object so that prime fields
/// can carry their modulus at runtime.
pub trait Field: Clone + PartialEq + Eq + Hash + fmt::Debug {
    /// Element representation.
    type Elem: Clone + PartialEq + Eq + Hash + fmt::Debug;

    fn zero(&self) -> Self::Elem;
    fn one(&self) -> Self::Elem;
    fn is_zero(&self, a: &Self::Elem) -> bool;
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn sub(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn neg(&self, a: &Self::Elem) -> Self::Elem;
    /// Multiplicative inverse; `None` for zero.
    fn inv(&self, a: &Self::Elem) -> Option<Self::Elem>;
    /// Image of an exact rational under the canonical map into this field;
    /// `None` when the denominator is not invertible.
    fn from_rat(&self, r: &Rat) -> Option<Self::Elem>;
    /// Number of elements for finite fields, `None` otherwise.
    fn order(&self) -> Option<u64>;
    /// All elements of a finite field (zero first), `None` otherwise.
    fn elements(&self) -> Option<Vec<Self::Elem>>;
    /// Human-readable field name for reports.
    fn name(&self) -> String;
}

/// The field of rational numbers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Rationals;

impl Field for Rationals {
    type Elem = Rat;

    fn zero(&self) -> Rat {
        Rat::zero()
    }
    fn one(&self) -> Rat {
        Rat::one()
    }
    fn is_zero(&self, a: &Rat) -> bool {
        a.is_zero()
    }
    fn add(&self, a: &Rat, b: &Rat) -> Rat {
        a + b
    }
    fn sub(&self, a: &Rat, b: &Rat) -> Rat {
        a - b
    }
    fn mul(&self, a: &Rat, b: &Rat) -> Rat {
        a * b
    }
    fn neg(&self, a: &Rat) -> Rat {
        -a
    }
    fn inv(&self, a: &Rat) -> Option<Rat> {
        if a.is_zero() {
            None
        } else {
            Some(a.recip())
        }
    }
    fn from_rat(&self, r: &Rat) -> Option<Rat> {
        Some(r.clone())
    }
    fn order(&self) -> Option<u64> {
        None
    }
    fn elements(&self) -> Option<Vec<Rat>> {
        None
    }
    fn name(&self) -> String {
        "Q".to_string()
    }
}

/// Largest modulus accepted for [`PrimeField`]; keeps `u64` products exact
/// through a `u128` intermediate.
pub const MAX_PRIME: u64 = (1 << 31) - 1;

/// The prime field `F_p` with elements stored as residues in `0..p`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PrimeField {
    p: u64,
}

impl PrimeField {
    /// Builds `F_p`, validating that `p` is a prime within range.
    pub fn new(p: u64) -> crate::Result<Self> {
        if p < 2 || p > MAX_PRIME {
            return Err(crate::Error::InvalidArgument {
                op: "PrimeField::new",
                detail: format!("modulus {p} out of range 2..={MAX_PRIME}"),
            });
        }
        if !is_prime(p) {
            return Err(crate::Error::InvalidArgument {
                op: "PrimeField::new",
                detail: format!("{p} is not prime"),
            });
        }
        Ok(PrimeField { p })
    }

    pub fn modulus(&self) -> u64 {
        self.p
    }

    /// Residue of a (signed) integer.
    pub fn residue(&self, a: i64) -> u64 {
        let m = self.p as i128;
        (((a as i128 % m) + m) % m) as u64
    }
}

fn is_prime(p: u64) -> bool {
    if p < 4 {
        return p >= 2;
    }
    if p % 2 == 0 {
        return false;
    }
    let mut d = 3u64;
    while d.saturating_mul(d) <= p {
        if p % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1u64;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = ((acc as u128 * base as u128) % m as u128) as u64;
        }
        base = ((base as u128 * base as u128) % m as u128) as u64;
        exp >>= 1;
    }
    acc
}

impl Field for PrimeField {
    type Elem = u64;

    fn zero(&self) -> u64 {
        0
    }
    fn one(&self) -> u64 {
        1 % self.p
    }
    fn is_zero(&self, a: &u64) -> bool {
        *a == 0
    }
    fn add(&self, a: &u64, b: &u64) -> u64 {
        (a + b) % self.p
    }
    fn sub(&self, a: &u64, b: &u64) -> u64 {
        (a + self.p - b) % self.p
    }
    fn mul(&self, a: &u64, b: &u64) -> u64 {
        ((*a as u128 * *b as u128) % self.p as u128) as u64
    }
    fn neg(&self, a: &u64) -> u64 {
        if *a == 0 {
            0
        } else {
            self.p - a
        }
    }
    fn inv(&self, a: &u64) -> Option<u64> {
        if *a == 0 {
            None
        } else {
            Some(pow_mod(*a, self.p - 2, self.p))
        }
    }
    fn from_rat(&self, r: &Rat) -> Option<u64> {
        let p_big = BigInt::from(self.p);
        let num = ((r.numer() % &p_big) + &p_big) % &p_big;
        let den = ((r.denom() % &p_big) + &p_big) % &p_big;
        let num = num.to_u64().expect("residue fits in u64");
        let den = den.to_u64().expect("residue fits in u64");
        let den_inv = self.inv(&den)?;
        Some(self.mul(&num, &den_inv))
    }
    fn order(&self) -> Option<u64> {
        Some(self.p)
    }
    fn elements(&self) -> Option<Vec<u64>> {
        Some((0..self.p).collect())
    }
    fn name(&self) -> String {
        format!("F_{}", self.p)
    }
}

/// Formats a rational as `p/q` (or just `p` for integers), the canonical
/// on-disk representation.
pub fn format_rat(r: &Rat) -> String {
    r.to_string()
}

/// Parses `p/q`, a plain integer, or a finite decimal such as `-0.25`,
/// exactly.
pub fn parse_rat(s: &str) -> crate::Result<Rat> {
    let s = s.trim();
    let err = || crate::Error::InvalidArgument {
        op: "parse_rat",
        detail: format!("cannot parse {s:?} as an exact rational"),
    };
    if s.is_empty() {
        return Err(err());
    }
    if let Some((num, den)) = s.split_once('/') {
        let num: BigInt = num.trim().parse().map_err(|_| err())?;
        let den: BigInt = den.trim().parse().map_err(|_| err())?;
        if den.is_zero() {
            return Err(err());
        }
        return Ok(Rat::new(num, den));
    }
    if let Some((int_part, frac_part)) = s.split_once('.') {
        if frac_part.is_empty() || !frac_part.bytes().all(|b| b.is_ascii_digit()) {
            return Err(err());
        }
        let negative = int_part.trim_start().starts_with('-');
        let int_part: BigInt = if int_part.is_empty() || int_part == "-" || int_part == "+" {
            BigInt::zero()
        } else {
            int_part.parse().map_err(|_| err())?
        };
        let frac: BigInt = frac_part.parse().map_err(|_| err())?;
        let scale = BigInt::from(10u32).pow(frac_part.len() as u32);
        let abs = Rat::from_integer(int_part.abs()) + Rat::new(frac, scale);
        return Ok(if negative { -abs } else { abs });
    }
    let int: BigInt = s.parse().map_err(|_| err())?;
    Ok(Rat::from_integer(int))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_field_ops() {
        let f = Rationals;
        let a = rat(2, 3);
        let b = rat(1, 6);
        assert_eq!(f.add(&a, &b), rat(5, 6));
        assert_eq!(f.mul(&a, &b), rat(1, 9));
        assert_eq!(f.inv(&a).unwrap(), rat(3, 2));
        assert_eq!(f.inv(&f.zero()), None);
        assert!(f.elements().is_none());
    }

    #[test]
    fn prime_field_ops() {
        let f2 = PrimeField::new(2).unwrap();
        assert_eq!(f2.add(&1, &1), 0);
        assert_eq!(f2.elements().unwrap(), vec![0, 1]);

        let f7 = PrimeField::new(7).unwrap();
        assert_eq!(f7.mul(&3, &5), 1);
        assert_eq!(f7.inv(&3).unwrap(), 5);
        assert_eq!(f7.neg(&2), 5);
        for a in 1..7 {
            let inv = f7.inv(&a).unwrap();
            assert_eq!(f7.mul(&a, &inv), 1);
        }
    }

    #[test]
    fn prime_field_rejects_composites_and_giants() {
        assert!(PrimeField::new(1).is_err());
        assert!(PrimeField::new(6).is_err());
        assert!(PrimeField::new(1 << 40).is_err());
        assert!(PrimeField::new(32749).is_ok());
    }

    #[test]
    fn rational_reduction_mod_p() {
        let f7 = PrimeField::new(7).unwrap();
        // 3/2 = 3 * 4 = 12 = 5 (mod 7)
        assert_eq!(f7.from_rat(&rat(3, 2)).unwrap(), 5);
        // denominator divisible by p is not reducible
        assert_eq!(f7.from_rat(&rat(1, 7)), None);
        assert_eq!(f7.from_rat(&rat(-1, 1)).unwrap(), 6);
    }

    #[test]
    fn parse_and_format_rationals() {
        assert_eq!(parse_rat("3/4").unwrap(), rat(3, 4));
        assert_eq!(parse_rat("-7").unwrap(), rat_int(-7));
        assert_eq!(parse_rat("0.25").unwrap(), rat(1, 4));
        assert_eq!(parse_rat("-1.5").unwrap(), rat(-3, 2));
        assert_eq!(parse_rat(" 2 / 6 ").unwrap(), rat(1, 3));
        assert!(parse_rat("1/0").is_err());
        assert!(parse_rat("abc").is_err());
        assert!(parse_rat("1.2.3").is_err());
        assert_eq!(format_rat(&rat(3, 4)), "3/4");
        assert_eq!(format_rat(&rat_int(5)), "5");
        assert_eq!(format_rat(&rat(-1, 2)), "-1/2");
    }

    #[test]
    fn floor_and_ceil() {
        assert_eq!(rat_floor(&rat(7, 2)), rat_int(3));
        assert_eq!(rat_floor(&rat(-7, 2)), rat_int(-4));
        assert_eq!(rat_ceil(&rat(7, 2)), rat_int(4));
        assert_eq!(rat_floor_i64(&rat(9, 4)).unwrap(), 2);
    }
}

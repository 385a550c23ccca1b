//! Coefficients: Laurent polynomials in ħ, polynomials in ε and k, over ℚ.

use num_rational::Rational64;
use num_traits::{One, Signed, Zero};
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

pub type Rat = Rational64;

/// Exponent triple (ħ, ε, k).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Exponent {
    pub hbar: i32,
    pub eps: u32,
    pub k: u32,
}

impl Exponent {
    pub const fn new(hbar: i32, eps: u32, k: u32) -> Self {
        Exponent { hbar, eps, k }
    }

    fn mul(self, o: Exponent) -> Exponent {
        Exponent {
            hbar: self.hbar + o.hbar,
            eps: self.eps + o.eps,
            k: self.k + o.k,
        }
    }
}

/// Sparse exact scalar. Terms are kept sorted by exponent with nonzero
/// coefficients, so structural equality is mathematical equality.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Scalar {
    terms: Vec<(Exponent, Rat)>,
}

impl Scalar {
    pub fn zero() -> Self {
        Scalar { terms: Vec::new() }
    }

    pub fn one() -> Self {
        Self::int(1)
    }

    pub fn int(n: i64) -> Self {
        Self::rat(Rat::from_integer(n))
    }

    pub fn frac(n: i64, d: i64) -> Self {
        Self::rat(Rat::new(n, d))
    }

    pub fn rat(r: Rat) -> Self {
        Self::monomial(r, Exponent::default())
    }

    pub fn monomial(c: Rat, e: Exponent) -> Self {
        if c.is_zero() {
            Self::zero()
        } else {
            Scalar { terms: vec![(e, c)] }
        }
    }

    pub fn hbar() -> Self {
        Self::monomial(Rat::one(), Exponent::new(1, 0, 0))
    }

    pub fn eps() -> Self {
        Self::monomial(Rat::one(), Exponent::new(0, 1, 0))
    }

    pub fn k() -> Self {
        Self::monomial(Rat::one(), Exponent::new(0, 0, 1))
    }

    pub fn hbar_pow(p: i32) -> Self {
        Self::monomial(Rat::one(), Exponent::new(p, 0, 0))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> &[(Exponent, Rat)] {
        &self.terms
    }

    /// The constant value, if the scalar has no symbolic part.
    pub fn as_constant(&self) -> Option<Rat> {
        match self.terms.as_slice() {
            [] => Some(Rat::zero()),
            [(e, c)] if *e == Exponent::default() => Some(*c),
            _ => None,
        }
    }

    fn from_unsorted(mut v: Vec<(Exponent, Rat)>) -> Self {
        v.sort_by_key(|a| a.0);
        let mut out: Vec<(Exponent, Rat)> = Vec::with_capacity(v.len());
        for (e, c) in v {
            match out.last_mut() {
                Some(last) if last.0 == e => last.1 += c,
                _ => out.push((e, c)),
            }
        }
        out.retain(|t| !t.1.is_zero());
        Scalar { terms: out }
    }

    pub fn scale(&self, r: Rat) -> Self {
        if r.is_zero() {
            return Self::zero();
        }
        Scalar {
            terms: self.terms.iter().map(|(e, c)| (*e, c * r)).collect(),
        }
    }

    pub fn scale_int(&self, n: i64) -> Self {
        self.scale(Rat::from_integer(n))
    }

    /// Multiply by ħ^{-p}.
    pub fn div_hbar_pow(&self, p: i32) -> Self {
        Scalar {
            terms: self
                .terms
                .iter()
                .map(|(e, c)| (Exponent::new(e.hbar - p, e.eps, e.k), *c))
                .collect(),
        }
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut acc = Self::one();
        for _ in 0..n {
            acc = &acc * self;
        }
        acc
    }

    /// Replace ε by `value` everywhere.
    pub fn subst_eps(&self, value: &Scalar) -> Self {
        let mut out = Self::zero();
        for (e, c) in &self.terms {
            let rest = Self::monomial(*c, Exponent::new(e.hbar, 0, e.k));
            out += &(&rest * &value.pow(e.eps));
        }
        out
    }

    fn merge(&self, other: &Scalar, sign: Rat) -> Scalar {
        let mut out = Vec::with_capacity(self.terms.len() + other.terms.len());
        let (mut i, mut j) = (0, 0);
        let (a, b) = (&self.terms, &other.terms);
        while i < a.len() || j < b.len() {
            if j == b.len() || (i < a.len() && a[i].0 < b[j].0) {
                out.push(a[i]);
                i += 1;
            } else if i == a.len() || b[j].0 < a[i].0 {
                out.push((b[j].0, b[j].1 * sign));
                j += 1;
            } else {
                let c = a[i].1 + b[j].1 * sign;
                if !c.is_zero() {
                    out.push((a[i].0, c));
                }
                i += 1;
                j += 1;
            }
        }
        Scalar { terms: out }
    }
}

impl From<i64> for Scalar {
    fn from(n: i64) -> Self {
        Scalar::int(n)
    }
}

impl From<Rat> for Scalar {
    fn from(r: Rat) -> Self {
        Scalar::rat(r)
    }
}

impl Add<&Scalar> for &Scalar {
    type Output = Scalar;
    fn add(self, o: &Scalar) -> Scalar {
        self.merge(o, Rat::one())
    }
}

impl Sub<&Scalar> for &Scalar {
    type Output = Scalar;
    fn sub(self, o: &Scalar) -> Scalar {
        self.merge(o, -Rat::one())
    }
}

impl Mul<&Scalar> for &Scalar {
    type Output = Scalar;
    fn mul(self, o: &Scalar) -> Scalar {
        if self.is_zero() || o.is_zero() {
            return Scalar::zero();
        }
        if self.terms.len() == 1 && self.terms[0].0 == Exponent::default() {
            return o.scale(self.terms[0].1);
        }
        if o.terms.len() == 1 && o.terms[0].0 == Exponent::default() {
            return self.scale(o.terms[0].1);
        }
        let mut v = Vec::with_capacity(self.terms.len() * o.terms.len());
        for (e1, c1) in &self.terms {
            for (e2, c2) in &o.terms {
                v.push((e1.mul(*e2), c1 * c2));
            }
        }
        Scalar::from_unsorted(v)
    }
}

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        self.scale(-Rat::one())
    }
}

macro_rules! owned_ops {
    ($tr:ident, $m:ident) => {
        impl $tr<Scalar> for Scalar {
            type Output = Scalar;
            fn $m(self, o: Scalar) -> Scalar {
                (&self).$m(&o)
            }
        }
        impl $tr<&Scalar> for Scalar {
            type Output = Scalar;
            fn $m(self, o: &Scalar) -> Scalar {
                (&self).$m(o)
            }
        }
        impl $tr<Scalar> for &Scalar {
            type Output = Scalar;
            fn $m(self, o: Scalar) -> Scalar {
                self.$m(&o)
            }
        }
    };
}
owned_ops!(Add, add);
owned_ops!(Sub, sub);
owned_ops!(Mul, mul);

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        -&self
    }
}

impl AddAssign<&Scalar> for Scalar {
    fn add_assign(&mut self, o: &Scalar) {
        *self = &*self + o;
    }
}

impl SubAssign<&Scalar> for Scalar {
    fn sub_assign(&mut self, o: &Scalar) {
        *self = &*self - o;
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (n, (e, c)) in self.terms.iter().enumerate() {
            let mut parts: Vec<String> = Vec::new();
            let sym = *e != Exponent::default();
            let mag = c.abs();
            if n > 0 {
                write!(f, "{}", if c.is_negative() { "-" } else { "+" })?;
            } else if c.is_negative() {
                write!(f, "-")?;
            }
            if !sym || !mag.is_one() {
                parts.push(mag.to_string());
            }
            match e.hbar {
                0 => {}
                1 => parts.push("h".into()),
                p => parts.push(format!("h^{p}")),
            }
            match e.eps {
                0 => {}
                1 => parts.push("e".into()),
                p => parts.push(format!("e^{p}")),
            }
            match e.k {
                0 => {}
                1 => parts.push("k".into()),
                p => parts.push(format!("k^{p}")),
            }
            write!(f, "{}", parts.join("*"))?;
        }
        Ok(())
    }
}

impl fmt::Debug for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn laurent_cancellation() {
        let level = Scalar::eps().div_hbar_pow(1);
        assert_eq!(&Scalar::hbar() * &level, Scalar::eps());
        assert!((&Scalar::hbar() - &Scalar::hbar()).is_zero());
    }

    #[test]
    fn alpha_at_n6_q3() {
        let alpha = &Scalar::k() + &Scalar::int(6 - 3);
        assert_eq!(alpha.to_string(), "3+k");
    }

    #[test]
    fn wrap_constant_differs() {
        let a = &Scalar::eps() + &Scalar::hbar().scale(Rat::new(3, 2));
        let b = &Scalar::eps() + &Scalar::hbar().scale_int(2);
        assert_ne!(a, b);
    }

    #[test]
    fn display_form() {
        let s = Scalar::monomial(Rat::new(3, 2), Exponent::new(-1, 2, 1));
        assert_eq!(s.to_string(), "3/2*h^-1*e^2*k");
        assert_eq!((-Scalar::hbar()).to_string(), "-h");
    }

    #[test]
    fn eps_substitution() {
        // ε = ħ(k+3), level ε/ħ - 0 -> k+3
        let val = &Scalar::hbar() * &(&Scalar::k() + &Scalar::int(3));
        let level = Scalar::eps().div_hbar_pow(1).subst_eps(&val);
        assert_eq!(level, &Scalar::k() + &Scalar::int(3));
    }
}

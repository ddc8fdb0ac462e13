//! Polynomials and rational functions in one variable over F_q.
//!
//! These are the residue-field counterparts of the valued-field series: the
//! coefficient type is a bare `Fq` code and the valuation is trivial. Rational
//! functions are kept reduced with a monic denominator, so structural equality
//! is semantic equality.

use crate::error::{Error, Result};
use crate::gf::{Fq, GfField};

/// Dense polynomial over F_q; `coeffs[i]` is the coefficient of w^i, with no
/// trailing zeros stored.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Poly {
    coeffs: Vec<Fq>,
}

impl Poly {
    pub fn zero() -> Poly {
        Poly { coeffs: vec![] }
    }

    pub fn one() -> Poly {
        Poly::constant(1)
    }

    pub fn constant(c: Fq) -> Poly {
        let mut p = Poly { coeffs: vec![c] };
        p.trim();
        p
    }

    /// c * w^k
    pub fn monomial(c: Fq, k: usize) -> Poly {
        let mut coeffs = vec![0; k + 1];
        coeffs[k] = c;
        let mut p = Poly { coeffs };
        p.trim();
        p
    }

    pub fn var() -> Poly {
        Poly::monomial(1, 1)
    }

    pub fn from_coeffs(coeffs: Vec<Fq>) -> Poly {
        let mut p = Poly { coeffs };
        p.trim();
        p
    }

    fn trim(&mut self) {
        while self.coeffs.last() == Some(&0) {
            self.coeffs.pop();
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree; -1 for the zero polynomial.
    pub fn deg(&self) -> i64 {
        self.coeffs.len() as i64 - 1
    }

    pub fn coeff(&self, i: usize) -> Fq {
        self.coeffs.get(i).copied().unwrap_or(0)
    }

    pub fn coeffs(&self) -> &[Fq] {
        &self.coeffs
    }

    pub fn leading(&self) -> Fq {
        self.coeffs.last().copied().unwrap_or(0)
    }

    pub fn add(&self, gf: &GfField, other: &Poly) -> Poly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..n).map(|i| gf.add(self.coeff(i), other.coeff(i))).collect();
        Poly::from_coeffs(coeffs)
    }

    pub fn neg(&self, gf: &GfField) -> Poly {
        Poly::from_coeffs(self.coeffs.iter().map(|&c| gf.neg(c)).collect())
    }

    pub fn sub(&self, gf: &GfField, other: &Poly) -> Poly {
        self.add(gf, &other.neg(gf))
    }

    pub fn mul(&self, gf: &GfField, other: &Poly) -> Poly {
        if self.is_zero() || other.is_zero() {
            return Poly::zero();
        }
        let mut coeffs = vec![0; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &b) in other.coeffs.iter().enumerate() {
                coeffs[i + j] = gf.add(coeffs[i + j], gf.mul(a, b));
            }
        }
        Poly::from_coeffs(coeffs)
    }

    pub fn mul_scalar(&self, gf: &GfField, c: Fq) -> Poly {
        Poly::from_coeffs(self.coeffs.iter().map(|&a| gf.mul(a, c)).collect())
    }

    pub fn pow(&self, gf: &GfField, n: u32) -> Poly {
        let mut out = Poly::one();
        for _ in 0..n {
            out = out.mul(gf, self);
        }
        out
    }

    /// Euclidean division: self = q * d + r with deg r < deg d.
    pub fn divrem(&self, gf: &GfField, d: &Poly) -> Result<(Poly, Poly)> {
        if d.is_zero() {
            return Err(Error::InvalidInput("polynomial division by zero".into()));
        }
        let lead_inv = gf.inv(d.leading())?;
        let mut rem = self.clone();
        let mut quo = vec![0; (self.deg() - d.deg() + 1).max(0) as usize];
        while !rem.is_zero() && rem.deg() >= d.deg() {
            let k = (rem.deg() - d.deg()) as usize;
            let c = gf.mul(rem.leading(), lead_inv);
            quo[k] = c;
            rem = rem.sub(gf, &d.mul(gf, &Poly::monomial(c, k)));
        }
        Ok((Poly::from_coeffs(quo), rem))
    }

    pub fn rem(&self, gf: &GfField, d: &Poly) -> Result<Poly> {
        Ok(self.divrem(gf, d)?.1)
    }

    pub fn monic(&self, gf: &GfField) -> Result<Poly> {
        if self.is_zero() {
            return Err(Error::InvalidInput("zero polynomial has no monic form".into()));
        }
        Ok(self.mul_scalar(gf, gf.inv(self.leading())?))
    }

    /// Monic greatest common divisor.
    pub fn gcd(&self, gf: &GfField, other: &Poly) -> Result<Poly> {
        let mut a = self.clone();
        let mut b = other.clone();
        while !b.is_zero() {
            let r = a.rem(gf, &b)?;
            a = b;
            b = r;
        }
        if a.is_zero() {
            Ok(Poly::zero())
        } else {
            a.monic(gf)
        }
    }

    pub fn derivative(&self, gf: &GfField) -> Poly {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, &c)| gf.mul(gf.from_int(i as i64), c))
            .collect();
        Poly::from_coeffs(coeffs)
    }

    pub fn eval(&self, gf: &GfField, x: Fq) -> Fq {
        let mut acc = 0;
        for &c in self.coeffs.iter().rev() {
            acc = gf.add(gf.mul(acc, x), c);
        }
        acc
    }

    /// Multiplicity of the (nonconstant) divisor `pi` in self.
    pub fn multiplicity(&self, gf: &GfField, pi: &Poly) -> Result<u32> {
        if self.is_zero() {
            return Err(Error::InvalidInput(
                "multiplicity of a factor in the zero polynomial is undefined".into(),
            ));
        }
        let mut f = self.clone();
        let mut n = 0;
        loop {
            let (q, r) = f.divrem(gf, pi)?;
            if !r.is_zero() {
                return Ok(n);
            }
            f = q;
            n += 1;
        }
    }

    /// Factorization into monic irreducibles with multiplicities, sorted by
    /// (degree, coefficient order). Trial division: factors of smaller degree
    /// are stripped first, so every successful divisor found is irreducible.
    pub fn factor(&self, gf: &GfField) -> Result<Vec<(Poly, u32)>> {
        if self.is_zero() {
            return Err(Error::InvalidInput("cannot factor the zero polynomial".into()));
        }
        let mut f = self.monic(gf)?;
        let mut out = vec![];
        let mut d = 1i64;
        while f.deg() > 0 {
            if 2 * d > f.deg() {
                // what remains is irreducible
                out.push((f, 1));
                break;
            }
            for g in monic_of_degree(gf, d as usize) {
                let m = f.multiplicity(gf, &g)?;
                if m > 0 {
                    for _ in 0..m {
                        f = f.divrem(gf, &g)?.0;
                    }
                    out.push((g, m));
                }
            }
            d += 1;
        }
        Ok(out)
    }

    /// Write self = a^p + b with b supported on exponents coprime to p.
    /// Every exponent divisible by p is absorbed into the p-th power part,
    /// which is exact because F_q is perfect.
    pub fn p_power_approx(&self, gf: &GfField) -> (Poly, Poly) {
        let p = gf.p as usize;
        let mut root = Poly::zero();
        let mut tame = Poly::zero();
        for (i, &c) in self.coeffs.iter().enumerate() {
            if c == 0 {
                continue;
            }
            if i % p == 0 {
                root = root.add(gf, &Poly::monomial(gf.pth_root(c), i / p));
            } else {
                tame = tame.add(gf, &Poly::monomial(c, i));
            }
        }
        (root, tame)
    }
}

/// All monic polynomials of the given degree over F_q, in coefficient order.
fn monic_of_degree(gf: &GfField, d: usize) -> Vec<Poly> {
    let q = gf.q as u64;
    let count = q.pow(d as u32);
    let mut out = Vec::with_capacity(count as usize);
    for code in 0..count {
        let mut coeffs = Vec::with_capacity(d + 1);
        let mut c = code;
        for _ in 0..d {
            coeffs.push((c % q) as Fq);
            c /= q;
        }
        coeffs.push(1);
        out.push(Poly { coeffs });
    }
    out
}

impl std::fmt::Display for Poly {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, &c) in self.coeffs.iter().enumerate().rev() {
            if c == 0 {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match (c, i) {
                (_, 0) => write!(f, "{c}")?,
                (1, 1) => write!(f, "w")?,
                (1, _) => write!(f, "w^{i}")?,
                (_, 1) => write!(f, "{c}*w")?,
                (_, _) => write!(f, "{c}*w^{i}")?,
            }
        }
        Ok(())
    }
}

/// Reduced rational function num/den over F_q: gcd(num, den) = 1 and den is
/// monic, so equal values have equal representations.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RationalFn {
    num: Poly,
    den: Poly,
}

impl RationalFn {
    pub fn new(gf: &GfField, num: Poly, den: Poly) -> Result<RationalFn> {
        if den.is_zero() {
            return Err(Error::InvalidInput("rational function with zero denominator".into()));
        }
        if num.is_zero() {
            return Ok(RationalFn { num: Poly::zero(), den: Poly::one() });
        }
        let g = num.gcd(gf, &den)?;
        let num = num.divrem(gf, &g)?.0;
        let den = den.divrem(gf, &g)?.0;
        let lead_inv = gf.inv(den.leading())?;
        Ok(RationalFn { num: num.mul_scalar(gf, lead_inv), den: den.mul_scalar(gf, lead_inv) })
    }

    pub fn from_poly(p: Poly) -> RationalFn {
        RationalFn { num: p, den: Poly::one() }
    }

    pub fn zero() -> RationalFn {
        RationalFn::from_poly(Poly::zero())
    }

    pub fn one() -> RationalFn {
        RationalFn::from_poly(Poly::one())
    }

    pub fn var() -> RationalFn {
        RationalFn::from_poly(Poly::var())
    }

    pub fn num(&self) -> &Poly {
        &self.num
    }

    pub fn den(&self) -> &Poly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_polynomial(&self) -> bool {
        self.den.deg() == 0
    }

    /// deg num - deg den; only meaningful for nonzero functions.
    pub fn deg(&self) -> i64 {
        self.num.deg() - self.den.deg()
    }

    pub fn add(&self, gf: &GfField, other: &RationalFn) -> Result<RationalFn> {
        let num = self
            .num
            .mul(gf, &other.den)
            .add(gf, &other.num.mul(gf, &self.den));
        RationalFn::new(gf, num, self.den.mul(gf, &other.den))
    }

    pub fn neg(&self, gf: &GfField) -> RationalFn {
        RationalFn { num: self.num.neg(gf), den: self.den.clone() }
    }

    pub fn sub(&self, gf: &GfField, other: &RationalFn) -> Result<RationalFn> {
        self.add(gf, &other.neg(gf))
    }

    pub fn mul(&self, gf: &GfField, other: &RationalFn) -> Result<RationalFn> {
        RationalFn::new(gf, self.num.mul(gf, &other.num), self.den.mul(gf, &other.den))
    }

    pub fn inv(&self, gf: &GfField) -> Result<RationalFn> {
        if self.is_zero() {
            return Err(Error::InvalidInput("inverse of the zero rational function".into()));
        }
        RationalFn::new(gf, self.den.clone(), self.num.clone())
    }

    pub fn div(&self, gf: &GfField, other: &RationalFn) -> Result<RationalFn> {
        self.mul(gf, &other.inv(gf)?)
    }

    pub fn pow(&self, gf: &GfField, n: i64) -> Result<RationalFn> {
        let base = if n < 0 { self.inv(gf)? } else { self.clone() };
        let mut out = RationalFn::one();
        for _ in 0..n.unsigned_abs() {
            out = out.mul(gf, &base)?;
        }
        Ok(out)
    }

    pub fn mul_scalar(&self, gf: &GfField, c: Fq) -> RationalFn {
        if c == 0 {
            return RationalFn::zero();
        }
        RationalFn { num: self.num.mul_scalar(gf, c), den: self.den.clone() }
    }

    pub fn derivative(&self, gf: &GfField) -> Result<RationalFn> {
        let num = self
            .num
            .derivative(gf)
            .mul(gf, &self.den)
            .sub(gf, &self.num.mul(gf, &self.den.derivative(gf)));
        RationalFn::new(gf, num, self.den.mul(gf, &self.den))
    }

    /// Order of vanishing at the closed point with minimal polynomial `pi`.
    pub fn ord_at(&self, gf: &GfField, pi: &Poly) -> Result<i64> {
        if self.is_zero() {
            return Err(Error::InvalidInput(
                "order of the zero function is undefined".into(),
            ));
        }
        let up = self.num.multiplicity(gf, pi)? as i64;
        let down = self.den.multiplicity(gf, pi)? as i64;
        Ok(up - down)
    }

    pub fn eval(&self, gf: &GfField, x: Fq) -> Result<Fq> {
        let d = self.den.eval(gf, x);
        if d == 0 {
            return Err(Error::InvalidInput("evaluation at a pole".into()));
        }
        Ok(gf.mul(self.num.eval(gf, x), gf.inv(d)?))
    }

    /// Numerator of mu(self) for a polynomial mu: sum mu_i num^i den^(deg mu - i).
    /// Vanishing of a closed point on this polynomial detects whether the point
    /// maps to the locus mu = 0 under self.
    pub fn compose_num(&self, gf: &GfField, mu: &Poly) -> Poly {
        let d = mu.deg().max(0) as usize;
        let mut out = Poly::zero();
        for i in 0..=d {
            let c = mu.coeff(i);
            if c == 0 {
                continue;
            }
            let term = self
                .num
                .pow(gf, i as u32)
                .mul(gf, &self.den.pow(gf, (d - i) as u32))
                .mul_scalar(gf, c);
            out = out.add(gf, &term);
        }
        out
    }

    /// Substitute w -> 1/u and return the result as a rational function in u.
    /// Used for order computations on the chart at infinity.
    pub fn at_infinity_chart(&self, gf: &GfField) -> Result<RationalFn> {
        let rev = |p: &Poly| Poly::from_coeffs(p.coeffs.iter().rev().copied().collect());
        let dn = self.num.deg().max(0) as usize;
        let dd = self.den.deg().max(0) as usize;
        // num(1/u)/den(1/u) = u^(dd-dn) * rev(num)/rev(den)
        let (mut num, mut den) = (rev(&self.num), rev(&self.den));
        if dd >= dn {
            num = num.mul(gf, &Poly::monomial(1, dd - dn));
        } else {
            den = den.mul(gf, &Poly::monomial(1, dn - dd));
        }
        RationalFn::new(gf, num, den)
    }

    /// Decompose self as sum over j in 0..p of g_j^p w^j; returns the g_j.
    /// Possible because F_q is perfect: with N = num * den^(p-1) we have
    /// self = N / den^p, and N splits by exponent residue classes mod p.
    pub fn p_power_decompose(&self, gf: &GfField) -> Result<Vec<RationalFn>> {
        let p = gf.p as usize;
        let n = self.num.mul(gf, &self.den.pow(gf, gf.p - 1));
        let mut parts = vec![Poly::zero(); p];
        for (i, &c) in n.coeffs.iter().enumerate() {
            if c == 0 {
                continue;
            }
            parts[i % p] = parts[i % p].add(gf, &Poly::monomial(gf.pth_root(c), i / p));
        }
        parts
            .into_iter()
            .map(|g| RationalFn::new(gf, g, self.den.clone()))
            .collect()
    }

    /// The Cartier image coefficient: c with C(self * dw) = c * dw.
    pub fn cartier(&self, gf: &GfField) -> Result<RationalFn> {
        Ok(self.p_power_decompose(gf)?.pop().expect("p >= 2"))
    }

    /// A primitive h with dh = self * dw, when one exists (the Cartier image
    /// must vanish). From self = sum g_j^p w^j, the term g_j^p w^j integrates
    /// to g_j^p w^(j+1)/(j+1) because p-th powers are constants for d.
    pub fn antiderivative(&self, gf: &GfField) -> Result<RationalFn> {
        let parts = self.p_power_decompose(gf)?;
        let p = gf.p as usize;
        if !parts[p - 1].is_zero() {
            return Err(Error::InvalidInput(
                "not an exact differential: nonzero Cartier image".into(),
            ));
        }
        let mut out = RationalFn::zero();
        for (j, g) in parts.iter().enumerate().take(p - 1) {
            if g.is_zero() {
                continue;
            }
            let c = gf.inv(gf.from_int(j as i64 + 1))?;
            let term = g
                .pow(gf, gf.p as i64)?
                .mul(gf, &RationalFn::from_poly(Poly::monomial(c, j + 1)))?;
            out = out.add(gf, &term)?;
        }
        Ok(out)
    }
}

impl std::fmt::Display for RationalFn {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.den.deg() == 0 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "({}) / ({})", self.num, self.den)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn divrem_and_gcd() {
        let gf = GfField::new(2, 1).unwrap();
        // (w+1)^2 * w = w^3 + w in char 2
        let f = Poly::from_coeffs(vec![0, 1, 0, 1]);
        let wp1 = Poly::from_coeffs(vec![1, 1]);
        assert_eq!(f.multiplicity(&gf, &wp1).unwrap(), 2);
        let g = f.gcd(&gf, &f.derivative(&gf)).unwrap();
        // f' = w^2 + 1 = (w+1)^2
        assert_eq!(g, Poly::from_coeffs(vec![1, 0, 1]));
    }

    #[test]
    fn factor_trial_division() {
        let gf = GfField::new(3, 1).unwrap();
        // w^2 + 1 is irreducible over F_3; w^3 - w = w(w-1)(w+1)
        let f = Poly::from_coeffs(vec![0, 2, 0, 1]).mul(&gf, &Poly::from_coeffs(vec![1, 0, 1]));
        let factors = f.factor(&gf).unwrap();
        assert_eq!(
            factors,
            vec![
                (Poly::from_coeffs(vec![0, 1]), 1),
                (Poly::from_coeffs(vec![1, 1]), 1),
                (Poly::from_coeffs(vec![2, 1]), 1),
                (Poly::from_coeffs(vec![1, 0, 1]), 1),
            ]
        );
    }

    #[test]
    fn rational_reduction_is_canonical() {
        let gf = GfField::new(2, 1).unwrap();
        let w = Poly::var();
        let wp1 = Poly::from_coeffs(vec![1, 1]);
        let a = RationalFn::new(&gf, w.mul(&gf, &wp1), wp1.pow(&gf, 2)).unwrap();
        let b = RationalFn::new(&gf, w, wp1.clone()).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.ord_at(&gf, &wp1).unwrap(), -1);
        assert_eq!(a.ord_at(&gf, &Poly::var()).unwrap(), 1);
    }

    #[test]
    fn derivative_quotient_rule() {
        let gf = GfField::new(3, 1).unwrap();
        // d(1/w) = -1/w^2
        let f = RationalFn::new(&gf, Poly::one(), Poly::var()).unwrap();
        let d = f.derivative(&gf).unwrap();
        let expect =
            RationalFn::new(&gf, Poly::constant(2), Poly::monomial(1, 2)).unwrap();
        assert_eq!(d, expect);
    }

    #[test]
    fn p_power_approx_strips_squares() {
        let gf = GfField::new(2, 1).unwrap();
        // z^2 + z^3 -> (z, z^3)
        let f = Poly::from_coeffs(vec![0, 0, 1, 1]);
        let (c, t) = f.p_power_approx(&gf);
        assert_eq!(c, Poly::var());
        assert_eq!(t, Poly::monomial(1, 3));
        // z^4 -> (z^2, 0)
        let (c, t) = Poly::monomial(1, 4).p_power_approx(&gf);
        assert_eq!(c, Poly::monomial(1, 2));
        assert!(t.is_zero());
    }

    #[test]
    fn cartier_and_antiderivative() {
        let gf = GfField::new(2, 1).unwrap();
        // w dw has Cartier image dw (coefficient 1): not exact in char 2
        let g = RationalFn::from_poly(Poly::var());
        assert_eq!(g.cartier(&gf).unwrap(), RationalFn::one());
        assert!(g.antiderivative(&gf).is_err());
        // w^2 dw integrates to w^3/3 = w^3 in char 2
        let g = RationalFn::from_poly(Poly::monomial(1, 2));
        assert!(g.cartier(&gf).unwrap().is_zero());
        let h = g.antiderivative(&gf).unwrap();
        assert_eq!(h.derivative(&gf).unwrap(), g);
        // 1/w^2 dw is exact with primitive 1/w
        let g = RationalFn::new(&gf, Poly::one(), Poly::monomial(1, 2)).unwrap();
        let h = g.antiderivative(&gf).unwrap();
        assert_eq!(h.derivative(&gf).unwrap(), g);
        // dw/w is not exact (it is the fixed form of Cartier)
        let g = RationalFn::new(&gf, Poly::one(), Poly::var()).unwrap();
        assert_eq!(g.cartier(&gf).unwrap(), g);
    }

    #[test]
    fn infinity_chart_substitution() {
        let gf = GfField::new(3, 1).unwrap();
        // f = w^2: at the chart u = 1/w this is 1/u^2
        let f = RationalFn::from_poly(Poly::monomial(1, 2));
        let g = f.at_infinity_chart(&gf).unwrap();
        assert_eq!(g, RationalFn::new(&gf, Poly::one(), Poly::monomial(1, 2)).unwrap());
    }
}

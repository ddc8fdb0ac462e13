//! Arithmetic in the finite field F_q, q = p^m.
//!
//! Elements are stored as `u32` codes: the polynomial Σ c_i x^i over F_p is
//! packed as Σ c_i p^i. A `GfField` owns discrete log/exp tables, so
//! multiplication, inversion and root extraction are table lookups. This keeps
//! field elements `Copy`, which matters because they sit inside every series
//! coefficient in the crate.

use crate::error::{Error, Result};
use num_integer::Integer;

const MAX_Q: u64 = 1 << 16;

#[derive(Debug, Clone)]
pub struct GfField {
    pub p: u32,
    pub m: u32,
    pub q: u32,
    /// monic irreducible modulus of degree m, packed like an element plus the x^m term
    modulus: u64,
    exp: Vec<u32>,
    log: Vec<u32>,
}

pub type Fq = u32;

fn poly_add(p: u32, a: u64, b: u64) -> u64 {
    let (mut a, mut b) = (a, b);
    let mut out = 0u64;
    let mut place = 1u64;
    while a > 0 || b > 0 {
        let d = (a % p as u64 + b % p as u64) % p as u64;
        out += d * place;
        a /= p as u64;
        b /= p as u64;
        place *= p as u64;
    }
    out
}

fn poly_deg(p: u32, mut a: u64) -> i32 {
    if a == 0 {
        return -1;
    }
    let mut d = -1;
    while a > 0 {
        a /= p as u64;
        d += 1;
    }
    d
}

fn poly_coeff(p: u32, a: u64, i: u32) -> u64 {
    (a / (p as u64).pow(i)) % p as u64
}

fn poly_mul(p: u32, a: u64, b: u64) -> u64 {
    let da = poly_deg(p, a);
    let db = poly_deg(p, b);
    if da < 0 || db < 0 {
        return 0;
    }
    let mut out = 0u64;
    for i in 0..=da as u32 {
        for j in 0..=db as u32 {
            let c = (poly_coeff(p, a, i) * poly_coeff(p, b, j)) % p as u64;
            let place = (p as u64).pow(i + j);
            let cur = (out / place) % p as u64;
            out = out - cur * place + ((cur + c) % p as u64) * place;
        }
    }
    out
}

fn poly_rem(p: u32, mut a: u64, b: u64) -> u64 {
    let db = poly_deg(p, b);
    assert!(db >= 0);
    let lead_inv = mod_inv(poly_coeff(p, b, db as u32), p as u64);
    while poly_deg(p, a) >= db {
        let da = poly_deg(p, a);
        let factor = (poly_coeff(p, a, da as u32) * lead_inv) % p as u64;
        // a -= factor * x^(da-db) * b
        for j in 0..=db as u32 {
            let c = (poly_coeff(p, b, j) * factor) % p as u64;
            let place = (p as u64).pow(j + (da - db) as u32);
            let cur = (a / place) % p as u64;
            let newc = (cur + p as u64 - c) % p as u64;
            a = a - cur * place + newc * place;
        }
    }
    a
}

fn mod_inv(a: u64, p: u64) -> u64 {
    // p prime, a nonzero mod p
    let mut result = 1u64;
    let mut base = a % p;
    let mut e = p - 2;
    while e > 0 {
        if e & 1 == 1 {
            result = result * base % p;
        }
        base = base * base % p;
        e >>= 1;
    }
    result
}

fn is_irreducible(p: u32, f: u64, m: u32) -> bool {
    // trial division by all monic polynomials of degree 1..=m/2
    for d in 1..=m / 2 {
        let lo = (p as u64).pow(d);
        let hi = (p as u64).pow(d + 1);
        for g in lo..hi {
            if poly_coeff(p, g, d) != 1 {
                continue; // monic only
            }
            if poly_rem(p, f, g) == 0 {
                return false;
            }
        }
    }
    true
}

fn is_prime(n: u32) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u32;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

impl GfField {
    /// Build F_{p^m} with the lexicographically smallest monic irreducible modulus.
    pub fn new(p: u32, m: u32) -> Result<GfField> {
        if !is_prime(p) {
            return Err(Error::InvalidInput(format!("{p} is not prime")));
        }
        if m == 0 {
            return Err(Error::InvalidInput("extension degree must be >= 1".into()));
        }
        let q128 = (p as u64).checked_pow(m).filter(|&q| q <= MAX_Q);
        let q = q128.ok_or_else(|| {
            Error::InvalidInput(format!("field size p^m = {p}^{m} too large"))
        })? as u32;

        let modulus = if m == 1 {
            p as u64 // x - 0 placeholder; unused for m = 1
        } else {
            let lo = (p as u64).pow(m);
            let hi = (p as u64).pow(m + 1);
            (lo..hi)
                .find(|&f| poly_coeff(p, f, m) == 1 && is_irreducible(p, f, m))
                .expect("an irreducible polynomial of every degree exists over F_p")
        };

        let mut field = GfField { p, m, q, modulus, exp: vec![], log: vec![] };
        field.build_tables();
        Ok(field)
    }

    fn mul_raw(&self, a: u64, b: u64) -> u64 {
        let prod = poly_mul(self.p, a, b);
        if self.m == 1 {
            prod % self.p as u64
        } else {
            poly_rem(self.p, prod, self.modulus)
        }
    }

    fn element_order(&self, a: u64) -> u32 {
        let mut x = a;
        let mut n = 1u32;
        while x != 1 {
            x = self.mul_raw(x, a);
            n += 1;
        }
        n
    }

    fn build_tables(&mut self) {
        let q = self.q as u64;
        let gen = (1..q)
            .find(|&g| self.element_order(g) == self.q - 1)
            .expect("the multiplicative group of a finite field is cyclic");
        let mut exp = vec![0u32; (self.q - 1) as usize];
        let mut log = vec![0u32; self.q as usize];
        let mut x = 1u64;
        for i in 0..(self.q - 1) as usize {
            exp[i] = x as u32;
            log[x as usize] = i as u32;
            x = self.mul_raw(x, gen);
        }
        self.exp = exp;
        self.log = log;
    }

    pub fn zero(&self) -> Fq {
        0
    }

    pub fn one(&self) -> Fq {
        1
    }

    pub fn from_int(&self, n: i64) -> Fq {
        n.rem_euclid(self.p as i64) as Fq
    }

    pub fn add(&self, a: Fq, b: Fq) -> Fq {
        poly_add(self.p, a as u64, b as u64) as Fq
    }

    pub fn neg(&self, a: Fq) -> Fq {
        let mut out = 0u64;
        let mut a = a as u64;
        let mut place = 1u64;
        while a > 0 {
            let d = a % self.p as u64;
            out += ((self.p as u64 - d) % self.p as u64) * place;
            a /= self.p as u64;
            place *= self.p as u64;
        }
        out as Fq
    }

    pub fn sub(&self, a: Fq, b: Fq) -> Fq {
        self.add(a, self.neg(b))
    }

    pub fn mul(&self, a: Fq, b: Fq) -> Fq {
        if a == 0 || b == 0 {
            return 0;
        }
        let la = self.log[a as usize] as u64;
        let lb = self.log[b as usize] as u64;
        self.exp[((la + lb) % (self.q as u64 - 1)) as usize]
    }

    pub fn inv(&self, a: Fq) -> Result<Fq> {
        if a == 0 {
            return Err(Error::InvalidInput("division by zero in F_q".into()));
        }
        let la = self.log[a as usize] as u64;
        let e = (self.q as u64 - 1 - la) % (self.q as u64 - 1);
        Ok(self.exp[e as usize])
    }

    pub fn pow(&self, a: Fq, n: i64) -> Fq {
        if a == 0 {
            return if n == 0 { 1 } else { 0 };
        }
        let order = self.q as i64 - 1;
        let la = self.log[a as usize] as i64;
        let e = (la * (n.rem_euclid(order))).rem_euclid(order);
        self.exp[e as usize]
    }

    /// Inverse of Frobenius: the unique b with b^p = a.
    pub fn pth_root(&self, a: Fq) -> Fq {
        // x -> x^(p^(m-1)) inverts x -> x^p on F_{p^m}
        let mut b = a;
        for _ in 0..self.m.saturating_sub(1) {
            b = self.pow(b, self.p as i64);
        }
        b
    }

    /// Some b with b^n = a, if one exists in F_q.
    pub fn nth_root(&self, a: Fq, n: u32) -> Result<Fq> {
        if a == 0 {
            return Ok(0);
        }
        let order = self.q as u64 - 1;
        let la = self.log[a as usize] as u64;
        let n = n as u64 % order;
        if n == 0 {
            return if a == 1 {
                Ok(1)
            } else {
                Err(Error::RootNotRepresentable(format!(
                    "no root of index {n} for element of order dividing q-1"
                )))
            };
        }
        let g = n.gcd(&order);
        if !la.is_multiple_of(g) {
            return Err(Error::RootNotRepresentable(format!(
                "element has no {n}-th root in F_{}",
                self.q
            )));
        }
        // solve n*b = la mod order; pick the smallest solution for determinism
        let n1 = n / g;
        let o1 = order / g;
        let b = (la / g) % o1 * mod_inv_u64(n1 % o1, o1) % o1;
        Ok(self.exp[b as usize])
    }

    pub fn elements(&self) -> impl Iterator<Item = Fq> {
        0..self.q
    }
}

fn mod_inv_u64(a: u64, n: u64) -> u64 {
    if n == 1 {
        return 0;
    }
    // extended euclid
    let (mut t, mut newt) = (0i128, 1i128);
    let (mut r, mut newr) = (n as i128, a as i128);
    while newr != 0 {
        let qq = r / newr;
        (t, newt) = (newt, t - qq * newt);
        (r, newr) = (newr, r - qq * newr);
    }
    assert!(r == 1, "not invertible");
    t.rem_euclid(n as i128) as u64
}

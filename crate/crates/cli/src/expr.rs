//! Parser for map and family expressions: standard infix over `z`, the
//! parameter `l`, and rational literals, evaluated exactly over the
//! rationals before conversion to working-field scalars.

use berkdyn_core::families::{AnalyticFamily, ZPoly};
use berkdyn_core::poly::Poly;
use berkdyn_core::{FieldConfig, PadicScalar, RationalMap};
use num_bigint::BigInt;
use num_rational::Ratio;
use num_traits::{One, ToPrimitive, Zero};

type Q = Ratio<BigInt>;

#[derive(Debug)]
pub struct ParseError {
    pub position: usize,
    pub message: String,
}

impl std::fmt::Display for ParseError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "parse error at {}: {}", self.position, self.message)
    }
}

impl std::error::Error for ParseError {}

/// Dense bivariate polynomial over the rationals: `coeffs[i][j] z^i l^j`.
#[derive(Clone, Debug)]
struct BiPoly {
    coeffs: Vec<Vec<Q>>,
}

impl BiPoly {
    fn zero() -> Self {
        BiPoly { coeffs: vec![] }
    }

    fn constant(q: Q) -> Self {
        if q.is_zero() {
            Self::zero()
        } else {
            BiPoly { coeffs: vec![vec![q]] }
        }
    }

    fn var_z() -> Self {
        BiPoly { coeffs: vec![vec![], vec![Q::one()]] }
    }

    fn var_l() -> Self {
        BiPoly { coeffs: vec![vec![Q::zero(), Q::one()]] }
    }

    fn get(&self, i: usize, j: usize) -> Q {
        self.coeffs
            .get(i)
            .and_then(|r| r.get(j))
            .cloned()
            .unwrap_or_else(Q::zero)
    }

    fn trim(mut self) -> Self {
        for row in &mut self.coeffs {
            while row.last().is_some_and(|c| c.is_zero()) {
                row.pop();
            }
        }
        while self.coeffs.last().is_some_and(|r| r.is_empty()) {
            self.coeffs.pop();
        }
        self
    }

    fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|r| r.iter().all(|c| c.is_zero()))
    }

    fn add(&self, o: &Self) -> Self {
        let zi = self.coeffs.len().max(o.coeffs.len());
        let mut coeffs = vec![];
        for i in 0..zi {
            let lj = self
                .coeffs
                .get(i)
                .map(|r| r.len())
                .unwrap_or(0)
                .max(o.coeffs.get(i).map(|r| r.len()).unwrap_or(0));
            coeffs.push((0..lj).map(|j| self.get(i, j) + o.get(i, j)).collect());
        }
        BiPoly { coeffs }.trim()
    }

    fn neg(&self) -> Self {
        BiPoly {
            coeffs: self.coeffs.iter().map(|r| r.iter().map(|c| -c.clone()).collect()).collect(),
        }
    }

    fn mul(&self, o: &Self) -> Self {
        if self.is_zero() || o.is_zero() {
            return Self::zero();
        }
        let mut coeffs: Vec<Vec<Q>> = vec![];
        for (i1, r1) in self.coeffs.iter().enumerate() {
            for (j1, c1) in r1.iter().enumerate() {
                if c1.is_zero() {
                    continue;
                }
                for (i2, r2) in o.coeffs.iter().enumerate() {
                    for (j2, c2) in r2.iter().enumerate() {
                        if c2.is_zero() {
                            continue;
                        }
                        let (i, j) = (i1 + i2, j1 + j2);
                        while coeffs.len() <= i {
                            coeffs.push(vec![]);
                        }
                        while coeffs[i].len() <= j {
                            coeffs[i].push(Q::zero());
                        }
                        coeffs[i][j] += c1 * c2;
                    }
                }
            }
        }
        BiPoly { coeffs }.trim()
    }

    fn pow(&self, e: u32) -> Self {
        let mut acc = Self::constant(Q::one());
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    fn z_degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    fn l_degree(&self) -> usize {
        self.coeffs.iter().map(|r| r.len().saturating_sub(1)).max().unwrap_or(0)
    }
}

/// A fraction of bivariate polynomials.
#[derive(Clone, Debug)]
struct BiRat {
    num: BiPoly,
    den: BiPoly,
}

impl BiRat {
    fn from_poly(p: BiPoly) -> Self {
        BiRat { num: p, den: BiPoly::constant(Q::one()) }
    }

    fn add(&self, o: &Self) -> Self {
        BiRat {
            num: self.num.mul(&o.den).add(&o.num.mul(&self.den)),
            den: self.den.mul(&o.den),
        }
    }

    fn neg(&self) -> Self {
        BiRat { num: self.num.neg(), den: self.den.clone() }
    }

    fn mul(&self, o: &Self) -> Self {
        BiRat { num: self.num.mul(&o.num), den: self.den.mul(&o.den) }
    }

    fn div(&self, o: &Self, pos: usize) -> Result<Self, ParseError> {
        if o.num.is_zero() {
            return Err(ParseError { position: pos, message: "division by zero".into() });
        }
        Ok(BiRat { num: self.num.mul(&o.den), den: self.den.mul(&o.num) })
    }

    fn pow(&self, e: u32) -> Self {
        BiRat { num: self.num.pow(e), den: self.den.pow(e) }
    }
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(BigInt),
    Z,
    L,
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    End,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer { src: src.as_bytes(), pos: 0 }
    }

    fn next_tok(&mut self) -> Result<(Tok, usize), ParseError> {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        let start = self.pos;
        if self.pos >= self.src.len() {
            return Ok((Tok::End, start));
        }
        let c = self.src[self.pos];
        self.pos += 1;
        let t = match c {
            b'+' => Tok::Plus,
            b'-' => Tok::Minus,
            b'*' => Tok::Star,
            b'/' => Tok::Slash,
            b'^' => Tok::Caret,
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            b'z' | b'Z' => Tok::Z,
            b'l' | b'L' => Tok::L,
            b'0'..=b'9' => {
                let mut n = BigInt::from((c - b'0') as u32);
                while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                    n = n * 10 + (self.src[self.pos] - b'0') as u32;
                    self.pos += 1;
                }
                Tok::Num(n)
            }
            other => {
                return Err(ParseError {
                    position: start,
                    message: format!("unexpected character '{}'", other as char),
                })
            }
        };
        Ok((t, start))
    }
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    idx: usize,
}

impl Parser {
    fn new(src: &str) -> Result<Self, ParseError> {
        let mut lex = Lexer::new(src);
        let mut toks = vec![];
        loop {
            let (t, p) = lex.next_tok()?;
            let end = t == Tok::End;
            toks.push((t, p));
            if end {
                break;
            }
        }
        Ok(Parser { toks, idx: 0 })
    }

    fn peek(&self) -> &(Tok, usize) {
        &self.toks[self.idx]
    }

    fn bump(&mut self) -> (Tok, usize) {
        let t = self.toks[self.idx].clone();
        if self.idx + 1 < self.toks.len() {
            self.idx += 1;
        }
        t
    }

    fn expr(&mut self) -> Result<BiRat, ParseError> {
        let mut acc = self.term()?;
        loop {
            match self.peek().0 {
                Tok::Plus => {
                    self.bump();
                    acc = acc.add(&self.term()?);
                }
                Tok::Minus => {
                    self.bump();
                    acc = acc.add(&self.term()?.neg());
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<BiRat, ParseError> {
        let mut acc = self.unary()?;
        loop {
            match self.peek().0 {
                Tok::Star => {
                    self.bump();
                    acc = acc.mul(&self.unary()?);
                }
                Tok::Slash => {
                    let (_, p) = self.bump();
                    let rhs = self.unary()?;
                    acc = acc.div(&rhs, p)?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn unary(&mut self) -> Result<BiRat, ParseError> {
        if self.peek().0 == Tok::Minus {
            self.bump();
            return Ok(self.unary()?.neg());
        }
        self.power()
    }

    fn power(&mut self) -> Result<BiRat, ParseError> {
        let base = self.atom()?;
        if self.peek().0 == Tok::Caret {
            let (_, p) = self.bump();
            let (t, ep) = self.bump();
            let Tok::Num(n) = t else {
                return Err(ParseError { position: ep, message: "expected integer exponent".into() });
            };
            let e = n.to_u32().ok_or(ParseError { position: p, message: "exponent too large".into() })?;
            if e > 16 {
                return Err(ParseError { position: p, message: "exponent too large".into() });
            }
            return Ok(base.pow(e));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<BiRat, ParseError> {
        let (t, p) = self.bump();
        match t {
            Tok::Num(n) => Ok(BiRat::from_poly(BiPoly::constant(Q::from_integer(n)))),
            Tok::Z => Ok(BiRat::from_poly(BiPoly::var_z())),
            Tok::L => Ok(BiRat::from_poly(BiPoly::var_l())),
            Tok::LParen => {
                let e = self.expr()?;
                let (t2, p2) = self.bump();
                if t2 != Tok::RParen {
                    return Err(ParseError { position: p2, message: "expected ')'".into() });
                }
                Ok(e)
            }
            other => Err(ParseError { position: p, message: format!("unexpected token {other:?}") }),
        }
    }

    fn finish(mut self) -> Result<BiRat, ParseError> {
        let e = self.expr()?;
        let (t, p) = self.bump();
        if t != Tok::End {
            return Err(ParseError { position: p, message: "trailing input".into() });
        }
        Ok(e)
    }
}

fn parse_birat(src: &str) -> Result<BiRat, ParseError> {
    Parser::new(src)?.finish()
}

fn clear_denominators(p: &BiPoly) -> (BiPoly, BigInt) {
    let mut lcm = BigInt::one();
    for r in &p.coeffs {
        for c in r {
            let d = c.denom();
            let g = num_integer::Integer::gcd(&lcm, d);
            lcm = &lcm / g * d;
        }
    }
    let scaled = BiPoly {
        coeffs: p
            .coeffs
            .iter()
            .map(|r| r.iter().map(|c| c * Q::from_integer(lcm.clone())).collect())
            .collect(),
    };
    (scaled, lcm)
}

fn to_zpoly(p: &BiPoly, cfg: &FieldConfig) -> ZPoly {
    let coeffs: Vec<Poly<PadicScalar>> = p
        .coeffs
        .iter()
        .map(|row| {
            Poly::new(
                row.iter()
                    .map(|q| PadicScalar::from_big_rational(cfg, q.clone()))
                    .collect::<Vec<_>>(),
            )
        })
        .collect();
    ZPoly::new(coeffs)
}

/// Parse an expression in `z` and `l` into an analytic family.
pub fn parse_family(src: &str, cfg: &FieldConfig) -> Result<AnalyticFamily, String> {
    let r = parse_birat(src).map_err(|e| e.to_string())?;
    // scale both sides to integral coefficients
    let (num, dn) = clear_denominators(&r.num);
    let (den, dd) = clear_denominators(&r.den);
    let num = num.mul(&BiPoly::constant(Q::from_integer(dd)));
    let den = den.mul(&BiPoly::constant(Q::from_integer(dn)));
    if den.z_degree() > 0 && num.z_degree() == 0 {
        // fine: a reciprocal family
    }
    AnalyticFamily::new(to_zpoly(&num, cfg), to_zpoly(&den, cfg), cfg).map_err(|e| e.to_string())
}

/// Parse an expression in `z` alone into a rational map.
pub fn parse_map(src: &str, cfg: &FieldConfig) -> Result<RationalMap, String> {
    let r = parse_birat(src).map_err(|e| e.to_string())?;
    if r.num.l_degree() > 0 || r.den.l_degree() > 0 {
        return Err("map expressions must not contain the parameter 'l'".into());
    }
    let to_poly = |p: &BiPoly| {
        Poly::new(
            p.coeffs
                .iter()
                .map(|row| {
                    let q = row.first().cloned().unwrap_or_else(Q::zero);
                    PadicScalar::from_big_rational(cfg, q)
                })
                .collect::<Vec<_>>(),
        )
    };
    RationalMap::new(to_poly(&r.num), to_poly(&r.den), cfg).map_err(|e| e.to_string())
}

/// Parse a rational literal (possibly signed, with a `/`).
pub fn parse_rational(src: &str) -> Result<(i128, i128), String> {
    let s = src.trim();
    let (neg, rest) = match s.strip_prefix('-') {
        Some(r) => (true, r.trim()),
        None => (false, s),
    };
    let mut parts = rest.splitn(2, '/');
    let n: i128 = parts
        .next()
        .unwrap()
        .trim()
        .parse()
        .map_err(|_| format!("bad rational literal '{src}'"))?;
    let d: i128 = match parts.next() {
        Some(d) => d.trim().parse().map_err(|_| format!("bad rational literal '{src}'"))?,
        None => 1,
    };
    if d == 0 {
        return Err("zero denominator".into());
    }
    Ok((if neg { -n } else { n }, d))
}

//! Point literals: `zeta(a, r)` disc points, plain rationals for type I
//! points, and `inf`.  Radii are powers of the working prime, written
//! either as plain rationals (`3`, `1/9`) or as `p^e` with a rational or
//! `sqrt2`-mixed exponent (`3^-2`, `3^-(1/2)`, `3^-(1 + 1/2*sqrt2)`).

use berkdyn_core::berk::RadiusExp;
use berkdyn_core::{BerkPoint, FieldConfig, PadicScalar, Rat};
use num_traits::Zero;

use crate::expr::parse_rational;

/// Parse a point literal; returns the point and its canonical rendering.
pub fn parse_point(src: &str, cfg: &FieldConfig) -> Result<(BerkPoint, String), String> {
    let s = src.trim();
    if s.eq_ignore_ascii_case("inf") || s == "oo" {
        return Ok((BerkPoint::Infinity, "inf".into()));
    }
    if let Some(rest) = s.strip_prefix("zeta") {
        let rest = rest.trim();
        let inner = rest
            .strip_prefix('(')
            .and_then(|r| r.strip_suffix(')'))
            .ok_or("expected zeta(center, radius)")?;
        let (a_str, r_str) = split_top_comma(inner).ok_or("expected zeta(center, radius)")?;
        let (an, ad) = parse_rational(a_str)?;
        let center = PadicScalar::from_rational(cfg, an as i64, ad as i64)
            .map_err(|e| e.to_string())?;
        let rexp = parse_radius(r_str.trim(), cfg)?;
        let lit = format!("zeta({}, {})", canon_rat(an, ad), radius_literal(&rexp, cfg));
        return Ok((BerkPoint::disc(center, rexp), lit));
    }
    let (n, d) = parse_rational(s)?;
    let x = PadicScalar::from_rational(cfg, n as i64, d as i64).map_err(|e| e.to_string())?;
    Ok((BerkPoint::TypeI(x), canon_rat(n, d)))
}

fn split_top_comma(s: &str) -> Option<(&str, &str)> {
    let mut depth = 0usize;
    for (i, c) in s.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth = depth.saturating_sub(1),
            ',' if depth == 0 => return Some((&s[..i], &s[i + 1..])),
            _ => {}
        }
    }
    None
}

fn canon_rat(n: i128, d: i128) -> String {
    let g = gcd(n.abs(), d.abs()).max(1);
    let (n, d) = (n / g, d / g);
    if d == 1 {
        n.to_string()
    } else {
        format!("{n}/{d}")
    }
}

fn gcd(a: i128, b: i128) -> i128 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Parse a radius: a plain p-power rational or `p^exponent`.
fn parse_radius(s: &str, cfg: &FieldConfig) -> Result<RadiusExp, String> {
    let p = cfg.prime() as i128;
    if let Some(idx) = s.find('^') {
        let base: i128 = s[..idx]
            .trim()
            .parse()
            .map_err(|_| format!("bad radius base in '{s}'"))?;
        if base != p {
            return Err(format!("radius base {base} differs from the prime {p}"));
        }
        // p^e encodes radius p^e, i.e. exponent field -e
        let e = parse_exponent(s[idx + 1..].trim())?;
        return Ok(RadiusExp::new(-e.0, -e.1));
    }
    // plain rational: must be a power of p
    let (n, d) = parse_rational(s)?;
    if n <= 0 {
        return Err("radius must be positive".into());
    }
    let mut num = n;
    let mut den = d;
    let mut k: i64 = 0;
    while num % p == 0 {
        num /= p;
        k -= 1;
    }
    while den % p == 0 {
        den /= p;
        k += 1;
    }
    let g = gcd(num, den).max(1);
    if num / g != 1 || den / g != 1 {
        return Err(format!("radius {s} is not a power of {p}"));
    }
    Ok(RadiusExp::from_int(k))
}

/// Exponent grammar: `r`, `-r`, `(r)`, `(r + t*sqrt2)`, `-(...)` with
/// rational `r`, `t`.
fn parse_exponent(s: &str) -> Result<(Rat, Rat), String> {
    let s = s.trim();
    if let Some(rest) = s.strip_prefix('-') {
        let (a, b) = parse_exponent(rest.trim())?;
        return Ok((-a, -b));
    }
    if let Some(inner) = s.strip_prefix('(').and_then(|r| r.strip_suffix(')')) {
        return parse_exponent_sum(inner);
    }
    let (n, d) = parse_rational(s)?;
    Ok((Rat::new(n, d), Rat::zero()))
}

fn parse_exponent_sum(s: &str) -> Result<(Rat, Rat), String> {
    // split on the last top-level '+' or '-' (the sqrt2 part sign)
    let bytes = s.as_bytes();
    let mut split = None;
    for i in (1..bytes.len()).rev() {
        let c = bytes[i] as char;
        if (c == '+' || c == '-') && !matches!(bytes[i - 1] as char, '+' | '-' | '*' | '/' | '^') {
            split = Some((i, c));
            break;
        }
    }
    match split {
        None => parse_exponent(s),
        Some((i, sign)) => {
            let (a, az) = parse_exponent(&s[..i])?;
            if !az.is_zero() {
                return Err("malformed exponent".into());
            }
            let tail = s[i + 1..].trim();
            let b = parse_sqrt2_term(tail)?;
            Ok((a, if sign == '-' { -b } else { b }))
        }
    }
}

fn parse_sqrt2_term(s: &str) -> Result<Rat, String> {
    let s = s.trim();
    if s == "sqrt2" {
        return Ok(Rat::new(1, 1));
    }
    let coeff = s
        .strip_suffix("sqrt2")
        .ok_or(format!("expected a sqrt2 term, got '{s}'"))?
        .trim()
        .strip_suffix('*')
        .ok_or("expected 'coefficient*sqrt2'")?
        .trim();
    let (n, d) = parse_rational(coeff)?;
    Ok(Rat::new(n, d))
}

fn fmt_rat(r: &Rat) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Canonical rendering of a radius.
pub fn radius_literal(rexp: &RadiusExp, cfg: &FieldConfig) -> String {
    let p = cfg.prime();
    if rexp.b.is_zero() {
        if rexp.a.is_zero() {
            return "1".into();
        }
        if rexp.a.is_integer() {
            return format!("{p}^{}", -rexp.a.numer());
        }
        return format!("{p}^-({})", fmt_rat(&rexp.a));
    }
    let a = -rexp.a;
    let b = -rexp.b;
    if b > Rat::zero() {
        format!("{p}^({} + {}*sqrt2)", fmt_rat(&a), fmt_rat(&b))
    } else {
        format!("{p}^({} - {}*sqrt2)", fmt_rat(&a), fmt_rat(&(-b)))
    }
}

//! The four subcommands, each producing a deterministic JSON document:
//! sorted object keys, exact valuation pairs and digit strings, no floats,
//! no timestamps.

use berkdyn_core::berk::{BerkPoint, Norm};
use berkdyn_core::dynamics::PointClass;
use berkdyn_core::families::ParamPoint;
use berkdyn_core::padic::ValInfo;
use berkdyn_core::{FieldConfig, PadicScalar};
use serde_json::{json, Value};

use crate::expr::{parse_family, parse_map, parse_rational};
use crate::points::parse_point;

/// Errors mapped to the documented exit codes.
#[derive(Debug)]
pub enum CmdError {
    /// exit 2
    Parse(String),
    /// exit 3
    Domain(String),
    /// exit 4
    Unsupported(String),
}

impl CmdError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CmdError::Parse(_) => 2,
            CmdError::Domain(_) => 3,
            CmdError::Unsupported(_) => 4,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CmdError::Parse(m) | CmdError::Domain(m) | CmdError::Unsupported(m) => m,
        }
    }
}

pub struct Ctx {
    pub cfg: FieldConfig,
    pub max_period: u32,
}

fn from_dyn(e: berkdyn_core::dynamics::DynError) -> CmdError {
    use berkdyn_core::dynamics::DynError as E;
    match e {
        E::IrreducibleFactorTooLarge { .. } => CmdError::Unsupported(e.to_string()),
        E::Series(berkdyn_core::series::SeriesError::Unsupported) => {
            CmdError::Unsupported(e.to_string())
        }
        other => CmdError::Domain(other.to_string()),
    }
}

fn point_json(pt: &BerkPoint) -> Value {
    match pt {
        BerkPoint::Infinity => json!({"kind": "infinity"}),
        BerkPoint::TypeI(x) => json!({"kind": "typeI", "coord": x}),
        BerkPoint::Disc { center, rexp } => json!({
            "kind": if rexp.is_rational() { "typeII" } else { "typeIII" },
            "center": center,
            "rexp": rexp,
        }),
    }
}

fn norm_json(n: &Norm) -> Value {
    match n {
        Norm::Zero => json!({"zero": true}),
        Norm::Pos(e) => json!({"exp": e}),
    }
}

fn class_str(c: PointClass) -> &'static str {
    match c {
        PointClass::Attracting => "attracting",
        PointClass::Indifferent => "indifferent",
        PointClass::Repelling => "repelling",
    }
}

/// `classify MAP POINT`: point kind, image, periodicity up to the period
/// bound, and classification data.
pub fn cmd_classify(ctx: &Ctx, map_expr: &str, point_lit: &str) -> Result<Value, CmdError> {
    let map = parse_map(map_expr, &ctx.cfg).map_err(CmdError::Parse)?;
    let (pt, lit) = parse_point(point_lit, &ctx.cfg).map_err(CmdError::Parse)?;
    let kind = match &pt {
        BerkPoint::Infinity => "infinity",
        BerkPoint::TypeI(_) => "typeI",
        BerkPoint::Disc { rexp, .. } => {
            if rexp.is_rational() {
                "typeII"
            } else {
                "typeIII"
            }
        }
    };
    let image = map.evaluate(&pt).map_err(from_dyn)?;
    let mut period: Option<u32> = None;
    for m in 1..=ctx.max_period {
        match map.exact_period_of(&pt, m) {
            Ok(Some(d)) => {
                period = Some(d);
                break;
            }
            Ok(None) => {}
            Err(e) => return Err(from_dyn(e)),
        }
    }
    let mut class = Value::Null;
    let mut local_degree = Value::Null;
    let mut multiplier = Value::Null;
    if let Some(m) = period {
        match &pt {
            BerkPoint::TypeI(_) | BerkPoint::Infinity => {
                let mult = map.orbit_multiplier(&pt, m).map_err(from_dyn)?;
                let cls = match mult.cmp(&Norm::one()) {
                    std::cmp::Ordering::Less => PointClass::Attracting,
                    std::cmp::Ordering::Equal => PointClass::Indifferent,
                    std::cmp::Ordering::Greater => PointClass::Repelling,
                };
                class = json!(class_str(cls));
                multiplier = norm_json(&mult);
            }
            BerkPoint::Disc { .. } => {
                let it = map.iterate(m).map_err(from_dyn)?;
                let ld = it.local_degree(&pt).map_err(from_dyn)?;
                class = json!(class_str(ld.class));
                local_degree = json!(ld.degree);
            }
        }
    }
    Ok(json!({
        "command": "classify",
        "prime": ctx.cfg.prime(),
        "map": map_expr,
        "point": lit,
        "kind": kind,
        "image": point_json(&image),
        "fixed": period == Some(1),
        "period": period,
        "class": class,
        "local_degree": local_degree,
        "multiplier": multiplier,
    }))
}

/// `periodic MAP N`: all classified type I periodic points of period
/// dividing N that are solvable over the working field, plus unresolved
/// factor reports.  The boolean is true when a factor of degree >= 3
/// stayed unresolved.
pub fn cmd_periodic(ctx: &Ctx, map_expr: &str, n: u32) -> Result<(Value, bool), CmdError> {
    let map = parse_map(map_expr, &ctx.cfg).map_err(CmdError::Parse)?;
    if n == 0 || n > ctx.max_period {
        return Err(CmdError::Parse(format!(
            "period {n} outside 1..={}",
            ctx.max_period
        )));
    }
    let out = map.periodic_points(n).map_err(from_dyn)?;
    let rows: Vec<Value> = out
        .records
        .iter()
        .map(|r| {
            json!({
                "point": point_json(&r.point),
                "period": r.period,
                "class": class_str(r.class),
                "multiplier": norm_json(&r.multiplier_abs),
            })
        })
        .collect();
    let unresolved: Vec<Value> = out
        .unresolved
        .iter()
        .map(|u| {
            json!({
                "degree": u.degree,
                "description": u.description,
                "root_valuations": u
                    .root_valuations
                    .iter()
                    .map(|(v, l)| json!([v.to_string(), l]))
                    .collect::<Vec<_>>(),
            })
        })
        .collect();
    let major = out.unresolved.iter().any(|u| u.degree >= 3);
    Ok((
        json!({
            "command": "periodic",
            "prime": ctx.cfg.prime(),
            "map": map_expr,
            "n": n,
            "records": rows,
            "unresolved": unresolved,
        }),
        major,
    ))
}

/// `scan FAMILY POINTS N_MAX`: bifurcation report over the listed
/// parameter points.
pub fn cmd_scan(
    ctx: &Ctx,
    family_expr: &str,
    points_src: &str,
    n_max: u32,
) -> Result<Value, CmdError> {
    let fam = parse_family(family_expr, &ctx.cfg).map_err(CmdError::Parse)?;
    let mut points = vec![];
    for line in points_src.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (pt, lit) = parse_point(line, &ctx.cfg).map_err(CmdError::Parse)?;
        points.push(ParamPoint::new(pt, lit));
    }
    if points.is_empty() {
        return Err(CmdError::Parse("points file lists no parameter points".into()));
    }
    let report = fam.stability_scan(n_max, &points);
    let rows: Vec<Value> = report
        .rows
        .iter()
        .map(|r| serde_json::to_value(r).expect("serializable row"))
        .collect();
    Ok(json!({
        "command": "scan",
        "family": family_expr,
        "prime": ctx.cfg.prime(),
        "n_max": n_max,
        "rows": rows,
    }))
}

/// `cantor LAMBDA LENGTH`: verify the shift conjugacy of the itinerary
/// coding on all binary words of the given length.
pub fn cmd_cantor(ctx: &Ctx, lambda_lit: &str, length: u32) -> Result<Value, CmdError> {
    let (n, d) = parse_rational(lambda_lit).map_err(CmdError::Parse)?;
    let lambda = PadicScalar::from_rational(&ctx.cfg, n as i64, d as i64)
        .map_err(|e| CmdError::Parse(e.to_string()))?;
    if length == 0 || length > 16 {
        return Err(CmdError::Parse("word length must be between 1 and 16".into()));
    }
    let map = parse_map(
        &format!("z^2 + ({lambda_lit})"),
        &ctx.cfg,
    )
    .map_err(CmdError::Parse)?;
    // codings level by level: words of length k+1 are branch images of
    // words of length k
    let mut level: Vec<(Vec<u8>, PadicScalar)> = vec![(vec![], anchor(&lambda, &ctx.cfg)?)];
    let mut worst: Option<berkdyn_core::Rat> = None;
    let mut rows = vec![];
    for _ in 0..length {
        let mut next = vec![];
        for (word, x) in &level {
            for bit in [0u8, 1] {
                let mut w = vec![bit];
                w.extend_from_slice(word);
                let coded = berkdyn_core::dynamics::cantor_coding(&lambda, &w)
                    .map_err(|e| CmdError::Domain(e.to_string()))?;
                let BerkPoint::TypeI(y) = coded else {
                    return Err(CmdError::Domain("coding left the classical points".into()));
                };
                // shift conjugacy: f(x_w) = x_shift(w)
                let img = map
                    .evaluate(&BerkPoint::TypeI(y.clone()))
                    .map_err(|e| CmdError::Domain(e.to_string()))?;
                let BerkPoint::TypeI(fy) = img else {
                    return Err(CmdError::Domain("image left the classical points".into()));
                };
                let res = fy.sub_raw(x);
                let floor = match res.val_info() {
                    ValInfo::Zero => None,
                    ValInfo::Exact(v) => Some(v),
                    ValInfo::AtLeast(f) => Some(f),
                };
                if let Some(f) = floor {
                    worst = Some(match worst {
                        None => f,
                        Some(w0) => w0.min(f),
                    });
                }
                if w.len() == length as usize {
                    rows.push(json!({
                        "word": w.iter().map(|b| b.to_string()).collect::<String>(),
                        "residual_val_at_least": floor.map(|f| f.to_string()),
                    }));
                }
                next.push((w, y));
            }
        }
        level = next;
    }
    let bound = berkdyn_core::Rat::new(40, 1);
    let pass = worst.map(|w| w >= bound).unwrap_or(true);
    Ok(json!({
        "command": "cantor",
        "prime": ctx.cfg.prime(),
        "lambda": lambda_lit,
        "length": length,
        "words_checked": rows.len(),
        "residual_bound_exp": "40",
        "min_residual_val": worst.map(|w| w.to_string()),
        "pass": pass,
        "residuals": rows,
    }))
}

fn anchor(lambda: &PadicScalar, _cfg: &FieldConfig) -> Result<PadicScalar, CmdError> {
    let pt = berkdyn_core::dynamics::cantor_coding(lambda, &[])
        .map_err(|e| CmdError::Domain(e.to_string()))?;
    match pt {
        BerkPoint::TypeI(x) => Ok(x),
        _ => Err(CmdError::Domain("anchor is not classical".into())),
    }
}
